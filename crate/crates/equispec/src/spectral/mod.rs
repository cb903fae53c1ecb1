//! Discrete bilinear form, generalized symmetric eigensolver, and
//! index/nullity classification.

mod assemble;
pub mod convergence;
mod eigen;
mod equivariant;
pub mod sparse;

pub use assemble::assemble;
pub use convergence::{convergence_study, ConvergenceRow, ConvergenceStudy};
pub use eigen::{solve_pencil, PencilSolution, SolveOptions};
pub use equivariant::{solve_equivariant, EquivariantStrategy};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mesh::ProblemSpec;
use sparse::CsrMatrix;

/// Discretized problem on the free (non-Dirichlet) vertices.
#[derive(Clone, Debug)]
pub struct Assembly {
    /// The form matrix: stiffness minus potential mass minus Robin boundary
    /// mass, so that u' K u = T(u, u) for nodal vectors.
    pub stiffness: CsrMatrix,
    /// Consistent P1 mass matrix on the free vertices.
    pub mass: CsrMatrix,
    /// Per mesh vertex: eliminated by the Dirichlet condition?
    pub constrained: Vec<bool>,
    /// Mesh vertex -> free row (None when constrained).
    pub free_index: Vec<Option<usize>>,
    /// Free row -> mesh vertex.
    pub free_to_vertex: Vec<usize>,
    /// Coercivity shift heuristic: K + shift * M should be positive
    /// definite; verified (and grown if needed) by the solver.
    pub shift: f64,
    /// Hash of the assembled data, used to seed iterative solvers.
    pub problem_hash: u64,
    pub mesh_level: u32,
}

impl Assembly {
    pub fn n_free(&self) -> usize {
        self.stiffness.n
    }

    /// Restrict full per-vertex samples to the free vertices.
    pub fn restrict(&self, values: &[f64]) -> Result<Vec<f64>> {
        if values.len() != self.constrained.len() {
            return Err(Error::InvalidInput(format!(
                "expected {} per-vertex samples, got {}",
                self.constrained.len(),
                values.len()
            )));
        }
        Ok(self.free_to_vertex.iter().map(|&v| values[v]).collect())
    }

    /// Embed free-space values into the full vertex set, zeros on the
    /// constrained vertices.
    pub fn embed(&self, free_values: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.constrained.len()];
        for (row, &v) in self.free_to_vertex.iter().enumerate() {
            out[v] = free_values[row];
        }
        out
    }
}

/// Which invariant subspace a spectrum was computed in.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub enum SubspaceDesc {
    Plain,
    Projected {
        group_order: usize,
        twist: String,
        subspace_dim: usize,
    },
    ReducedDomain {
        group_order: usize,
        interface_neumann: usize,
        interface_dirichlet: usize,
    },
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveMeta {
    pub shift: f64,
    pub residuals: Vec<f64>,
    pub mesh_level: u32,
    pub subspace: SubspaceDesc,
    /// True when the spectrum lists every eigenvalue of a finite-dimensional
    /// problem (possibly none at all).
    pub exhausted: bool,
    pub iterations: usize,
    pub method: String,
}

/// Ascending eigenvalues with M-orthonormal discrete eigenfunctions given as
/// per-vertex samples on the mesh the problem was assembled on.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenfunctions: Vec<Vec<f64>>,
    pub meta: SolveMeta,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Does the spectrum account for every eigenvalue at or below `t`?
    pub fn covers(&self, t: f64) -> bool {
        self.meta.exhausted || self.eigenvalues.last().is_some_and(|l| *l > t)
    }
}

/// Index/nullity classification at an explicit zero tolerance.
#[derive(Clone, Copy, Debug, Serialize, PartialEq, Eq)]
pub struct IndexNullity {
    pub index: usize,
    pub nullity: usize,
}

/// Count eigenvalues below -zero_tol (index) and within zero_tol of zero
/// (nullity).  Also returns the classification margin: the smallest distance
/// from any eigenvalue to the thresholds +-zero_tol.
pub fn index_nullity(spectrum: &Spectrum, zero_tol: f64) -> Result<(IndexNullity, f64)> {
    if !(zero_tol > 0.0) {
        return Err(Error::InvalidInput("zero_tol must be positive".into()));
    }
    if !spectrum.covers(zero_tol) {
        return Err(Error::InsufficientCoverage(format!(
            "last computed eigenvalue {:?} does not exceed zero_tol {}",
            spectrum.eigenvalues.last(),
            zero_tol
        )));
    }
    let mut index = 0;
    let mut nullity = 0;
    let mut margin = f64::INFINITY;
    for &l in &spectrum.eigenvalues {
        if l < -zero_tol {
            index += 1;
        } else if l <= zero_tol {
            nullity += 1;
        }
        margin = margin.min((l - zero_tol).abs().min((l + zero_tol).abs()));
    }
    Ok((IndexNullity { index, nullity }, margin))
}

/// Rayleigh quotient T(u, u) / <u, u>_M for per-vertex samples vanishing on
/// the Dirichlet set; by min-max this upper-bounds the first eigenvalue.
pub fn rayleigh(assembly: &Assembly, values: &[f64]) -> Result<f64> {
    if values.len() != assembly.constrained.len() {
        return Err(Error::InvalidInput(format!(
            "expected {} per-vertex samples, got {}",
            assembly.constrained.len(),
            values.len()
        )));
    }
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return Err(Error::InvalidInput(
            "Rayleigh quotient of the zero function".into(),
        ));
    }
    for (v, &c) in assembly.constrained.iter().enumerate() {
        if c && values[v].abs() > 1e-10 * scale {
            return Err(Error::InvalidInput(format!(
                "test function does not vanish on Dirichlet vertex {} ({})",
                v, values[v]
            )));
        }
    }
    let u = assembly.restrict(values)?;
    let ku = assembly.stiffness.mul_vec_alloc(&u);
    let mu = assembly.mass.mul_vec_alloc(&u);
    let num: f64 = u.iter().zip(&ku).map(|(a, b)| a * b).sum();
    let den: f64 = u.iter().zip(&mu).map(|(a, b)| a * b).sum();
    Ok(num / den)
}

/// Solve for the `count` lowest eigenpairs of the assembled problem.
pub fn solve(assembly: &Assembly, count: usize, zero_tol: f64) -> Result<Spectrum> {
    solve_with(assembly, count, zero_tol, &SolveOptions::default())
}

pub fn solve_with(
    assembly: &Assembly,
    count: usize,
    zero_tol: f64,
    opts: &SolveOptions,
) -> Result<Spectrum> {
    let _ = zero_tol;
    let mut opts = opts.clone();
    if opts.seed == 0 {
        opts.seed = assembly.problem_hash;
    }
    opts.shift_hint = Some(assembly.shift);
    let sol = eigen::solve_pencil(&assembly.stiffness, &assembly.mass, count, &opts)?;
    let eigenfunctions = sol
        .eigenvectors
        .iter()
        .map(|u| assembly.embed(u))
        .collect();
    Ok(Spectrum {
        eigenvalues: sol.eigenvalues,
        eigenfunctions,
        meta: SolveMeta {
            shift: sol.shift,
            residuals: sol.residuals,
            mesh_level: assembly.mesh_level,
            subspace: SubspaceDesc::Plain,
            exhausted: sol.exhausted,
            iterations: sol.iterations,
            method: sol.method,
        },
    })
}

/// Assemble and solve in one step.
pub fn solve_problem(problem: &ProblemSpec, count: usize, zero_tol: f64) -> Result<Spectrum> {
    let a = assemble(problem)?;
    solve(&a, count, zero_tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_builtin, BoundaryTag, Coefficient, Params};

    #[test]
    fn rayleigh_rejects_zero_and_constrained_violations() {
        let mesh = build_builtin("lune_cut(0.0)", 2, &Params::default()).unwrap();
        let p = ProblemSpec::new(
            mesh,
            Coefficient::Constant(2.0),
            Coefficient::Constant(0.0),
        );
        let a = assemble(&p).unwrap();
        let n = p.mesh.n_vertices();
        assert!(rayleigh(&a, &vec![0.0; n]).is_err());
        // the constant violates the Dirichlet constraint on the cut
        assert!(rayleigh(&a, &vec![1.0; n]).is_err());
        // a compliant function passes: zero out the constrained vertices
        let mut ok = vec![1.0; n];
        for (v, c) in a.constrained.iter().enumerate() {
            if *c {
                ok[v] = 0.0;
            }
        }
        let val = rayleigh(&a, &ok).unwrap();
        assert!(val.is_finite());
    }

    #[test]
    fn index_nullity_requires_coverage_past_the_window() {
        let mesh = build_builtin("catenoid_K0", 2, &Params::default()).unwrap();
        let mut p = ProblemSpec::new(
            mesh,
            Coefficient::CatenoidJacobi { a: 2.3328, s: 1.4907 },
            Coefficient::Constant(1.0),
        );
        let top = 0.87028;
        p.retag_where(
            |x, y| x.z.abs() > top - 1e-9 && y.z.abs() > top - 1e-9,
            BoundaryTag::Robin,
        );
        // the stability problem has several negative directions; three
        // eigenvalues cannot certify the counts
        let s = solve_problem(&p, 3, 0.05).unwrap();
        assert!(matches!(
            index_nullity(&s, 0.05),
            Err(Error::InsufficientCoverage(_))
        ));
        let s = solve_problem(&p, 10, 0.05).unwrap();
        let (counts, _) = index_nullity(&s, 0.05).unwrap();
        // one rotationally symmetric pinching mode and a pair of
        // translation-like first-harmonic modes
        assert_eq!(counts, IndexNullity { index: 3, nullity: 0 });
    }
}
