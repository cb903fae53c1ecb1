//! Reproduction suites: each case study runs behind a common trait,
//! registered by name and selected from the command line.

use serde::Serialize;

use equispec::mesh::{build_builtin, Params};
use equispec::models::{
    disk_equivariant_index, disk_problem, k0_certificate, k0_equivariant_index,
    k0_mode_crosscheck, killing_jacobi_field, nodal_domains, nodal_tolerance, sphere_table_with,
    CatenoidParams,
};
use equispec::montielros::{
    glued_surface_ledger, standard_block_rows, symmetry_lower_bound, GluedRecipe,
    SymmetryBoundVariant,
};
use equispec::spectral::{convergence_study, index_nullity, IndexNullity};
use equispec::Result;

#[derive(Clone, Debug, Default)]
pub struct SuiteOptions {
    /// Lower resolutions for a quick smoke run.
    pub fast: bool,
    /// When set, suites drop plot data (CSV) next to their JSON reports.
    pub output_dir: Option<std::path::PathBuf>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteRow {
    pub label: String,
    pub computed: String,
    pub reference: String,
    pub tolerance: String,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub rows: Vec<SuiteRow>,
    pub pass: bool,
}

impl SuiteReport {
    fn new(suite: &str, rows: Vec<SuiteRow>) -> Self {
        let pass = rows.iter().all(|r| r.pass);
        SuiteReport {
            suite: suite.to_string(),
            rows,
            pass,
        }
    }
}

fn row(label: impl Into<String>, computed: impl Into<String>, reference: impl Into<String>, tolerance: impl Into<String>, pass: bool) -> SuiteRow {
    SuiteRow {
        label: label.into(),
        computed: computed.into(),
        reference: reference.into(),
        tolerance: tolerance.into(),
        pass,
    }
}

fn fmt_counts(c: IndexNullity) -> String {
    format!("(ind {}, nul {})", c.index, c.nullity)
}

pub trait Suite: Sync {
    fn name(&self) -> &'static str;
    fn describe(&self) -> &'static str;
    fn run(&self, opts: &SuiteOptions) -> Result<SuiteReport>;
}

pub fn registry() -> &'static [&'static dyn Suite] {
    static REGISTRY: [&dyn Suite; 5] = [
        &SphereTableSuite,
        &K0Suite,
        &DiskSuite,
        &NodalSuite,
        &LedgerSuite,
    ];
    &REGISTRY
}

pub struct SphereTableSuite;

impl Suite for SphereTableSuite {
    fn name(&self) -> &'static str {
        "sphere-table"
    }
    fn describe(&self) -> &'static str {
        "index/nullity of the five spherical boundary-value rows"
    }
    fn run(&self, opts: &SuiteOptions) -> Result<SuiteReport> {
        let base = if opts.fast { 2 } else { 3 };
        let table = sphere_table_with(base, 3, 6, 0.05)?;
        let rows = table
            .rows
            .iter()
            .map(|r| {
                row(
                    format!("{} / Dirichlet on {}", r.domain, r.dirichlet_part),
                    fmt_counts(r.computed),
                    fmt_counts(r.expected),
                    "exact integer match at zero_tol 0.05".to_string(),
                    r.pass,
                )
            })
            .collect();
        Ok(SuiteReport::new(self.name(), rows))
    }
}

pub struct K0Suite;

impl Suite for K0Suite {
    fn name(&self) -> &'static str {
        "k0"
    }
    fn describe(&self) -> &'static str {
        "catenoidal annulus: certificate constants, equivariant counts, radial cross-check"
    }
    fn run(&self, opts: &SuiteOptions) -> Result<SuiteReport> {
        let mut rows = Vec::new();
        let params = CatenoidParams::default();
        let cert = k0_certificate(params)?;
        rows.push(row(
            "interval constant (variational side)",
            format!("{:.5}", cert.left_constant),
            "0.5962",
            "5e-4",
            (cert.left_constant - 0.5962).abs() < 5e-4,
        ));
        rows.push(row(
            "interval constant (Robin side)",
            format!("{:.5}", cert.right_constant),
            "0.4443",
            "5e-4",
            (cert.right_constant - 0.4443).abs() < 5e-4,
        ));
        rows.push(row(
            "intervals overlap",
            format!("{}", cert.intervals_overlap),
            "true",
            "exact",
            cert.intervals_overlap,
        ));
        rows.push(row(
            "radial mode 0: lambda1 < -0.1 < 0.1 < lambda2",
            format!("lambda1 {:.4}, lambda2 {:.4}", cert.lambda1, cert.lambda2),
            "one negative direction, positive second eigenvalue",
            "margins 0.1",
            cert.lambda1 < -0.1 && cert.lambda2 > 0.1,
        ));
        rows.push(row(
            "upper circle on the unit sphere",
            format!("{:.2e}", cert.boundary_residual),
            "0 (rounded published parameters)",
            "5e-4",
            cert.boundary_residual.abs() < 5e-4,
        ));

        let base = k0_equivariant_index(params, None, 0.05, false)?;
        rows.push(row(
            "rotation-invariant index/nullity",
            fmt_counts(base.counts),
            "(ind 1, nul 0)",
            "exact",
            base.counts == IndexNullity { index: 1, nullity: 0 },
        ));
        rows.push(row(
            "empirical mode threshold k_min",
            format!("{}", base.k_min),
            "small (single digits)",
            "reported",
            base.k_min < 10,
        ));
        let ks = if opts.fast {
            vec![base.k_min, 12]
        } else {
            vec![base.k_min, base.k_min + 1, base.k_min + 2, 12]
        };
        for k in ks {
            let rep = k0_equivariant_index(params, Some(k), 0.05, !opts.fast && k == base.k_min)?;
            let mut pass = rep.counts == IndexNullity { index: 1, nullity: 0 };
            let mut computed = fmt_counts(rep.counts);
            if let Some(c2) = rep.counts_2d {
                pass &= c2 == rep.counts;
                computed = format!("{} (2d check {})", computed, fmt_counts(c2));
            }
            rows.push(row(
                format!("pyramidal order 2k, k = {}", k),
                computed,
                "(ind 1, nul 0)",
                "exact, zero_tol 0.05",
                pass,
            ));
        }

        let (level, tol) = if opts.fast { (3, 0.025) } else { (4, 0.01) };
        for check in k0_mode_crosscheck(params, level, &[0, 1, 2, 3], 3)? {
            rows.push(row(
                format!("radial vs 2D, mode {}", check.mode),
                format!("worst rel err {:.4}", check.worst_rel_err),
                "agreement of the first 3 eigenvalues",
                format!("{}", tol),
                check.worst_rel_err < tol,
            ));
        }
        Ok(SuiteReport::new(self.name(), rows))
    }
}

pub struct DiskSuite;

impl Suite for DiskSuite {
    fn name(&self) -> &'static str {
        "disk"
    }
    fn describe(&self) -> &'static str {
        "flat disk: plain and antiprismatic-equivariant counts, second eigenvalue"
    }
    fn run(&self, opts: &SuiteOptions) -> Result<SuiteReport> {
        let mut rows = Vec::new();
        let level = if opts.fast { 1 } else { 2 };
        let p = disk_problem(level, None)?;
        let s = equispec::spectral::solve_problem(&p, 5, 0.05)?;
        let (counts, _) = index_nullity(&s, 0.05)?;
        rows.push(row(
            "plain Neumann disk",
            fmt_counts(counts),
            "(ind 0, nul 1)",
            "exact, zero_tol 0.05",
            counts == IndexNullity { index: 0, nullity: 1 },
        ));
        for m in 1..=3usize {
            let rep = disk_equivariant_index(m, level, 0.05)?;
            rows.push(row(
                format!("antiprismatic order 4(m+1), m = {}", m),
                fmt_counts(rep.counts),
                "(ind 0, nul 0)",
                "exact, zero_tol 0.05",
                rep.counts == IndexNullity { index: 0, nullity: 0 },
            ));
        }
        // second eigenvalue against the independent Bessel-root oracle
        let base_level = if opts.fast { 0 } else { 1 };
        let study = convergence_study(&disk_problem(base_level, None)?, 3, 4)?;
        let lambda2 = study.rows[1].extrapolated;
        let root = first_bessel_j1_prime_root();
        let expect = root * root;
        rows.push(row(
            "second Neumann eigenvalue (extrapolated)",
            format!("{:.4}", lambda2),
            format!("{:.4}", expect),
            "0.5%",
            (lambda2 - expect).abs() < 0.005 * expect,
        ));
        Ok(SuiteReport::new(self.name(), rows))
    }
}

/// First positive root of d/dx J1(x), via the series for J1 and bisection
/// on its derivative (J0 - J1/x); independent of all mesh machinery.
pub fn first_bessel_j1_prime_root() -> f64 {
    fn bessel(n: u32, x: f64) -> f64 {
        let half = 0.5 * x;
        let mut term = half.powi(n as i32);
        for k in 1..=n as u64 {
            term /= k as f64;
        }
        let mut sum = term;
        for k in 1..80u64 {
            term *= -(half * half) / (k as f64 * (k as f64 + n as f64));
            sum += term;
            if term.abs() < 1e-18 * sum.abs().max(1e-300) {
                break;
            }
        }
        sum
    }
    let dj1 = |x: f64| bessel(0, x) - bessel(1, x) / x;
    let (mut lo, mut hi) = (1.0f64, 3.0f64);
    let mut flo = dj1(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = dj1(mid);
        if flo * fm <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    0.5 * (lo + hi)
}

pub struct NodalSuite;

impl Suite for NodalSuite {
    fn name(&self) -> &'static str {
        "nodal"
    }
    fn describe(&self) -> &'static str {
        "nodal domains of the rotation Jacobi field on the annulus and its mirror union"
    }
    fn run(&self, opts: &SuiteOptions) -> Result<SuiteReport> {
        let mut rows = Vec::new();
        let levels = if opts.fast { 2..4u32 } else { 3..6u32 };
        for level in levels {
            for (id, expect) in [("catenoid_K0", 4usize), ("union_pm_K0", 8usize)] {
                let mesh = build_builtin(id, level, &Params::default())?;
                let axis = equispec::nalgebra::Vector3::new(1.0, 0.0, 0.0);
                let kappa = killing_jacobi_field(&mesh, axis)?;
                let nd = nodal_domains(&mesh, &kappa, nodal_tolerance(&kappa))?;
                if let Some(dir) = &opts.output_dir {
                    std::fs::create_dir_all(dir)?;
                    let csv = equispec::report::nodal_csv(&mesh, &nd);
                    std::fs::write(dir.join(format!("nodal-{}-L{}.csv", id, level)), csv)?;
                }
                rows.push(row(
                    format!("{} at level {}", id, level),
                    format!("{}", nd.count),
                    format!("{}", expect),
                    "exact count",
                    nd.count == expect,
                ));
            }
        }
        Ok(SuiteReport::new(self.name(), rows))
    }
}

pub struct LedgerSuite;

impl Suite for LedgerSuite {
    fn name(&self) -> &'static str {
        "ledger"
    }
    fn describe(&self) -> &'static str {
        "glued-surface block arithmetic and symmetry lower bounds"
    }
    fn run(&self, _opts: &SuiteOptions) -> Result<SuiteReport> {
        let mut rows = Vec::new();
        for (recipe, expect_sum, expect_abs) in [
            (GluedRecipe::AntiprismaticThreeBlock, 2u64, None),
            (GluedRecipe::PyramidalThreeBlock, 6, Some("12m + 12")),
            (GluedRecipe::PrismaticTwoBlock, 2, Some("8n")),
        ] {
            let ledger = glued_surface_ledger(&standard_block_rows(recipe), recipe)?;
            rows.push(row(
                format!("{} block sum", ledger.recipe),
                format!("{}", ledger.equivariant_bound),
                format!("{}", expect_sum),
                "exact arithmetic",
                ledger.equivariant_bound == expect_sum,
            ));
            if let Some(abs) = expect_abs {
                let got = ledger
                    .absolute_bound
                    .map(|b| format!("{}", b))
                    .unwrap_or_else(|| "none".into());
                rows.push(row(
                    format!("{} absolute bound", ledger.recipe),
                    got.clone(),
                    abs,
                    "exact arithmetic",
                    got == abs,
                ));
            }
        }
        // symmetry lower bounds at symbolic parameters: check the formulas
        // on a sweep of concrete values
        let prism_ok = (2..12).all(|n| {
            symmetry_lower_bound(n, SymmetryBoundVariant::PrismEven).unwrap() == 2 * n as u64 - 1
        });
        rows.push(row(
            "mirror-even lower bound",
            "2n - 1",
            "2n - 1",
            "exact for n in 2..12",
            prism_ok,
        ));
        let pyr_ok = (1..12).all(|m| {
            symmetry_lower_bound(m + 1, SymmetryBoundVariant::Pyramidal).unwrap()
                == 2 * (m as u64) + 1
        });
        rows.push(row(
            "pyramidal lower bound at k = m + 1",
            "2m + 1",
            "2m + 1",
            "exact for m in 1..12",
            pyr_ok,
        ));
        let odd_ok =
            symmetry_lower_bound(2, SymmetryBoundVariant::PlaneOdd).unwrap() == 1;
        rows.push(row(
            "mirror-odd lower bound at k = 2",
            "1",
            "1",
            "exact",
            odd_ok,
        ));
        Ok(SuiteReport::new(self.name(), rows))
    }
}
