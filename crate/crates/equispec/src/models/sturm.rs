//! One-dimensional Sturm–Liouville solver used as an independent oracle for
//! the surface computations.
//!
//! The general problem is -(p u')' - q u = lambda w u on an interval, with
//! an optional Dirichlet condition on the left and an optional Robin term
//! c u(b) v(b) added to the form on the right, discretized with P1 elements
//! on a uniform grid (coefficients sampled at element midpoints).

use super::catenoid::CatenoidParams;
use crate::error::{Error, Result};
use crate::spectral::sparse::CsrMatrix;
use crate::spectral::{solve_pencil, PencilSolution, SolveOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LeftCondition {
    Neumann,
    Dirichlet,
}

/// The radial eigenvalue problem of an azimuthal Fourier mode on the
/// catenoidal annulus: u'' + ((a^2 + a^-2)/cosh^2(a z - s) - a^2 l^2) u =
/// -lambda cosh^2(a z - s) u on [0, h], Robin u'(h) = cosh(a h - s) u(h).
#[derive(Clone, Debug)]
pub struct SturmLiouvilleProblem {
    pub params: CatenoidParams,
    /// Azimuthal mode number l >= 0.
    pub mode: u32,
    pub left: LeftCondition,
    /// Grid intervals; at least 2000 for oracle-grade accuracy.
    pub intervals: usize,
}

impl SturmLiouvilleProblem {
    pub fn new(params: CatenoidParams, mode: u32, left: LeftCondition) -> Self {
        SturmLiouvilleProblem {
            params,
            mode,
            left,
            intervals: 2048,
        }
    }
}

/// Generic 1D assembly on a uniform grid over [x0, x1].
pub struct Grid1d {
    pub nodes: Vec<f64>,
}

pub fn assemble_1d(
    x0: f64,
    x1: f64,
    intervals: usize,
    p: impl Fn(f64) -> f64,
    q: impl Fn(f64) -> f64,
    w: impl Fn(f64) -> f64,
    left_dirichlet: bool,
    robin_right: f64,
) -> (Grid1d, CsrMatrix, CsrMatrix) {
    let n_nodes = intervals + 1;
    let h = (x1 - x0) / intervals as f64;
    let nodes: Vec<f64> = (0..n_nodes).map(|i| x0 + h * i as f64).collect();
    let offset = usize::from(left_dirichlet);
    let n = n_nodes - offset;
    let mut kt: Vec<(usize, usize, f64)> = Vec::with_capacity(4 * intervals);
    let mut mt: Vec<(usize, usize, f64)> = Vec::with_capacity(4 * intervals);
    let idx = |node: usize| -> Option<usize> { node.checked_sub(offset) };
    for e in 0..intervals {
        let mid = x0 + h * (e as f64 + 0.5);
        let (pe, qe, we) = (p(mid), q(mid), w(mid));
        let stiff = [[pe / h, -pe / h], [-pe / h, pe / h]];
        let mass = [[h / 3.0, h / 6.0], [h / 6.0, h / 3.0]];
        for li in 0..2 {
            let Some(gi) = idx(e + li) else { continue };
            for lj in 0..2 {
                let Some(gj) = idx(e + lj) else { continue };
                kt.push((gi, gj, stiff[li][lj] - qe * mass[li][lj]));
                mt.push((gi, gj, we * mass[li][lj]));
            }
        }
    }
    if robin_right != 0.0 {
        let last = idx(n_nodes - 1).expect("right node is always free");
        kt.push((last, last, -robin_right));
    }
    (
        Grid1d { nodes },
        CsrMatrix::from_triplets(n, &mut kt),
        CsrMatrix::from_triplets(n, &mut mt),
    )
}

/// Solve the mode problem for the lowest `count` eigenvalues.  The returned
/// eigenvectors are node samples on the full grid (zero at a Dirichlet end).
pub fn sl_solve(problem: &SturmLiouvilleProblem, count: usize) -> Result<SlSolution> {
    if problem.intervals < 16 {
        return Err(Error::InvalidInput("grid is too coarse".into()));
    }
    let CatenoidParams { a, h, s } = problem.params;
    let l2 = (problem.mode as f64) * (problem.mode as f64);
    let qf = move |z: f64| (a * a + 1.0 / (a * a)) / (a * z - s).cosh().powi(2) - a * a * l2;
    let wf = move |z: f64| (a * z - s).cosh().powi(2);
    let robin = (a * h - s).cosh();
    let left_dirichlet = problem.left == LeftCondition::Dirichlet;
    let (grid, k, m) = assemble_1d(0.0, h, problem.intervals, |_| 1.0, qf, wf, left_dirichlet, robin);
    let opts = SolveOptions {
        seed: 0x51_1d,
        shift_hint: Some(1.0 + a * a + 1.0 / (a * a) + 2.0 * robin / h),
        ..Default::default()
    };
    let sol = solve_pencil(&k, &m, count, &opts)?;
    Ok(SlSolution {
        grid,
        left_dirichlet,
        stiffness: k,
        mass: m,
        sol,
    })
}

pub struct SlSolution {
    pub grid: Grid1d,
    pub left_dirichlet: bool,
    pub stiffness: CsrMatrix,
    pub mass: CsrMatrix,
    pub sol: PencilSolution,
}

impl SlSolution {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.sol.eigenvalues
    }

    /// Node samples on the full grid for eigenpair i.
    pub fn eigenfunction(&self, i: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.grid.nodes.len());
        if self.left_dirichlet {
            out.push(0.0);
        }
        out.extend_from_slice(&self.sol.eigenvectors[i]);
        out
    }

    /// Rayleigh quotient of arbitrary node samples against this problem's
    /// pencil (samples must honor the Dirichlet end).
    pub fn rayleigh_of(&self, samples: &[f64]) -> Result<f64> {
        let free: Vec<f64> = if self.left_dirichlet {
            if samples[0].abs() > 1e-12 {
                return Err(Error::InvalidInput(
                    "samples do not vanish at the Dirichlet end".into(),
                ));
            }
            samples[1..].to_vec()
        } else {
            samples.to_vec()
        };
        let ku = self.stiffness.mul_vec_alloc(&free);
        let mu = self.mass.mul_vec_alloc(&free);
        let num: f64 = free.iter().zip(&ku).map(|(a, b)| a * b).sum();
        let den: f64 = free.iter().zip(&mu).map(|(a, b)| a * b).sum();
        Ok(num / den)
    }
}

/// Radial (mode-0) reduction of the Neumann Laplacian on the unit disk:
/// -(rho u')' = lambda rho u on [0, 1], natural conditions at both ends.
pub fn disk_radial_neumann(count: usize, intervals: usize) -> Result<PencilSolution> {
    let (_, k, m) = assemble_1d(0.0, 1.0, intervals, |r| r, |_| 0.0, |r| r, false, 0.0);
    let opts = SolveOptions {
        seed: 0xd15c,
        shift_hint: Some(1.0),
        ..Default::default()
    };
    solve_pencil(&k, &m, count, &opts)
}
