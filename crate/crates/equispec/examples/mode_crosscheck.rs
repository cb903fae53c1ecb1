//! Compare the radial mode solver against 2D wedge discretizations of the
//! catenoidal annulus stability problem.
//!
//! Usage: cargo run --example mode_crosscheck [level]

use equispec::models::{k0_mode_crosscheck, CatenoidParams};

fn main() -> equispec::Result<()> {
    let level: u32 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(3);
    let start = std::time::Instant::now();
    for check in k0_mode_crosscheck(CatenoidParams::default(), level, &[0, 1, 2, 3], 3)? {
        println!("mode {}:", check.mode);
        println!("  radial  {:?}", check.one_d);
        println!("  surface {:?}", check.two_d);
        println!("  worst relative error {:.5}", check.worst_rel_err);
    }
    println!("level {} finished in {:.1?}", level, start.elapsed());
    Ok(())
}
