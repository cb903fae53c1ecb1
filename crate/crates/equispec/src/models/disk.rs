//! The flat unit disk as a stability model: plain Neumann Laplacian and its
//! antiprismatic equivariant refinements.

use serde::Serialize;

use crate::error::Result;
use crate::mesh::{build_builtin, Params, ProblemSpec};
use crate::spectral::{index_nullity, solve_equivariant, EquivariantStrategy, IndexNullity};
use crate::symmetry::{standard_group, GroupKind, TwistVariant};

/// Neumann Laplacian problem on the unit disk (the Jacobi form of the flat
/// disk: zero potential, Neumann boundary).
pub fn disk_problem(level: u32, sym_k: Option<usize>) -> Result<ProblemSpec> {
    let mut params = Params::default();
    if let Some(k) = sym_k {
        params = params.set("sym_k", k as f64);
    }
    let mesh = build_builtin("unit_disk", level, &params)?;
    Ok(ProblemSpec::laplacian(mesh))
}

#[derive(Clone, Debug, Serialize)]
pub struct DiskEquivariantReport {
    /// m, for the antiprismatic group of order 4(m+1).
    pub m: usize,
    pub zero_tol: f64,
    pub counts: IndexNullity,
    pub lowest_eigenvalue: Option<f64>,
}

/// Index and nullity of the disk Neumann problem restricted to functions
/// equivariant under the antiprismatic group of order 4(m+1) with the
/// normal-sign twist: the half-turns flip the disk normal, so constants are
/// not equivariant and both counts vanish.
pub fn disk_equivariant_index(
    m: usize,
    level: u32,
    zero_tol: f64,
) -> Result<DiskEquivariantReport> {
    let k = m + 1;
    let problem = disk_problem(level, Some(k))?;
    let group = standard_group(GroupKind::Antiprismatic, k)?
        .act_on_mesh(&problem.mesh, 1e-9)?;
    let group = group.with_twist(TwistVariant::NormalSign(&problem.mesh))?;
    let spectrum = solve_equivariant(&problem, &group, 6, EquivariantStrategy::ProjectedSubspace)?;
    let (counts, _) = index_nullity(&spectrum, zero_tol)?;
    Ok(DiskEquivariantReport {
        m,
        zero_tol,
        counts,
        lowest_eigenvalue: spectrum.eigenvalues.first().copied(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::solve_problem;
    use crate::symmetry::Sign;

    #[test]
    fn plain_disk_has_index_zero_nullity_one() {
        let p = disk_problem(2, None).unwrap();
        let s = solve_problem(&p, 4, 0.05).unwrap();
        // constants are an exact discrete kernel
        assert!(s.eigenvalues[0].abs() < 1e-10, "{:?}", s.eigenvalues);
        let (counts, _) = index_nullity(&s, 0.05).unwrap();
        assert_eq!(counts, IndexNullity { index: 0, nullity: 1 });
    }

    #[test]
    fn antiprismatic_twist_mixes_signs_on_the_disk() {
        let p = disk_problem(1, Some(2)).unwrap();
        let g = standard_group(GroupKind::Antiprismatic, 2)
            .unwrap()
            .act_on_mesh(&p.mesh, 1e-9)
            .unwrap()
            .with_twist(TwistVariant::NormalSign(&p.mesh))
            .unwrap();
        assert!(g.twist.iter().any(|s| *s == Sign::Minus));
        assert!(g.twist.iter().any(|s| *s == Sign::Plus));
    }

    #[test]
    fn equivariant_disk_kills_the_kernel() {
        for m in 1..=3 {
            let rep = disk_equivariant_index(m, 2, 0.05).unwrap();
            assert_eq!(
                rep.counts,
                IndexNullity { index: 0, nullity: 0 },
                "m = {}: {:?}",
                m,
                rep
            );
            assert!(rep.lowest_eigenvalue.unwrap() > 0.05);
        }
    }
}
