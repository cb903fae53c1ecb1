//! Refinement sweeps with Richardson extrapolation of eigenvalues.
//!
//! Eigenvalues are tracked across levels by overlap of the prolonged
//! eigenfunctions in the fine mass inner product.  A track that jumps to a
//! different part of the spectrum (an eigenvalue crossing) is reported and
//! its extrapolation suppressed; degenerate clusters are matched as
//! clusters, so rotations inside an eigenspace are not flagged.

use serde::Serialize;

use super::{assemble, solve_with, SolveOptions, Spectrum};
use crate::error::{Error, Result};
use crate::mesh::{refine_with_map, ProblemSpec, RefineMap};

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceRow {
    pub index: usize,
    /// Eigenvalue at each level, coarsest first.
    pub per_level: Vec<f64>,
    /// Observed convergence order from the last three levels, when the
    /// corrections behave like a clean power of the mesh size.
    pub observed_order: Option<f64>,
    pub extrapolated: f64,
    /// Magnitude of the final correction (or of the last level step when no
    /// clean order was observed).
    pub error_bar: f64,
    /// True when eigenfunction tracking detected a crossing or lost the
    /// track; `extrapolated` then just repeats the finest value.
    pub crossing: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceStudy {
    /// Mesh refinement levels, coarsest first.
    pub levels: Vec<u32>,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceStudy {
    pub fn extrapolated(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.extrapolated).collect()
    }
}

fn prolong(map: &RefineMap, coarse: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(map.parent_vertices + map.midpoints.len());
    out.extend_from_slice(coarse);
    for &(a, b) in &map.midpoints {
        out.push(0.5 * (coarse[a] + coarse[b]));
    }
    out
}

/// Solve the problem on `levels` successive refinements (starting at the
/// problem's own level) and Richardson-extrapolate the lowest `count`
/// eigenvalues.
pub fn convergence_study(
    problem: &ProblemSpec,
    levels: usize,
    count: usize,
) -> Result<ConvergenceStudy> {
    convergence_study_with(problem, levels, count, &SolveOptions::default())
}

pub fn convergence_study_with(
    problem: &ProblemSpec,
    levels: usize,
    count: usize,
    opts: &SolveOptions,
) -> Result<ConvergenceStudy> {
    if levels < 3 {
        return Err(Error::InvalidInput(
            "a convergence study needs at least 3 levels".into(),
        ));
    }
    // solve every level, remembering the refinement maps between them
    let mut problems = vec![problem.clone()];
    let mut maps: Vec<RefineMap> = Vec::new();
    for _ in 1..levels {
        let prev = problems.last().unwrap();
        let (fine_mesh, map) = refine_with_map(&prev.mesh)?;
        let _ = fine_mesh;
        maps.push(map);
        problems.push(prev.refine()?);
    }
    let mut spectra: Vec<Spectrum> = Vec::with_capacity(levels);
    let mut mesh_levels = Vec::with_capacity(levels);
    for p in &problems {
        let a = assemble(p)?;
        spectra.push(solve_with(&a, count, 0.0, opts)?);
        mesh_levels.push(p.mesh.level);
    }
    let n_rows = spectra.iter().map(|s| s.len()).min().unwrap_or(0).min(count);

    // track by overlap: crossing[i] set when the tracked index moves to a
    // different eigenvalue cluster or the overlap mass is lost
    let mut crossing = vec![false; n_rows];
    for lv in 0..levels - 1 {
        let coarse = &spectra[lv];
        let fine = &spectra[lv + 1];
        let fine_assembly = assemble(&problems[lv + 1])?;
        let fine_free: Vec<Vec<f64>> = fine
            .eigenfunctions
            .iter()
            .take(n_rows)
            .map(|u| fine_assembly.restrict(u))
            .collect::<Result<_>>()?;
        let m_fine: Vec<Vec<f64>> = fine_free
            .iter()
            .map(|u| fine_assembly.mass.mul_vec_alloc(u))
            .collect();
        for i in 0..n_rows {
            let lifted = prolong(&maps[lv], &coarse.eigenfunctions[i]);
            let lf = fine_assembly.restrict(&lifted)?;
            let norm2: f64 = {
                let ml = fine_assembly.mass.mul_vec_alloc(&lf);
                lf.iter().zip(&ml).map(|(a, b)| a * b).sum()
            };
            if norm2 <= 0.0 {
                crossing[i] = true;
                continue;
            }
            let overlaps: Vec<f64> = (0..n_rows)
                .map(|j| {
                    let dot: f64 = lf.iter().zip(&m_fine[j]).map(|(a, b)| a * b).sum();
                    dot * dot / norm2
                })
                .collect();
            let best = (0..n_rows)
                .max_by(|&a, &b| overlaps[a].total_cmp(&overlaps[b]))
                .unwrap();
            // captured mass within the best index's eigenvalue cluster
            let cluster_tol = 1e-3 * (1.0 + fine.eigenvalues[best].abs());
            let captured: f64 = (0..n_rows)
                .filter(|&j| (fine.eigenvalues[j] - fine.eigenvalues[best]).abs() < cluster_tol)
                .map(|j| overlaps[j])
                .sum();
            let same_cluster =
                (fine.eigenvalues[best] - fine.eigenvalues[i]).abs() < cluster_tol;
            if !same_cluster || captured < 0.8 {
                crossing[i] = true;
            }
        }
    }

    let mut rows = Vec::with_capacity(n_rows);
    for i in 0..n_rows {
        let per_level: Vec<f64> = spectra.iter().map(|s| s.eigenvalues[i]).collect();
        let row = extrapolate_row(i, per_level, crossing[i]);
        rows.push(row);
    }
    Ok(ConvergenceStudy {
        levels: mesh_levels,
        rows,
    })
}

fn extrapolate_row(index: usize, per_level: Vec<f64>, crossing: bool) -> ConvergenceRow {
    let n = per_level.len();
    let last = per_level[n - 1];
    let scale = per_level.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    if crossing {
        return ConvergenceRow {
            index,
            per_level,
            observed_order: None,
            extrapolated: last,
            error_bar: f64::NAN,
            crossing: true,
        };
    }
    let d1 = per_level[n - 2] - per_level[n - 3];
    let d2 = last - per_level[n - 2];
    if d2.abs() <= 1e-11 * scale {
        // already converged to solver accuracy (e.g. an exactly discrete
        // eigenfunction)
        return ConvergenceRow {
            index,
            per_level,
            observed_order: None,
            extrapolated: last,
            error_bar: d2.abs(),
            crossing: false,
        };
    }
    let ratio = d1 / d2;
    if ratio > 1.2 {
        let p = ratio.log2();
        let correction = d2 / (2f64.powf(p) - 1.0);
        ConvergenceRow {
            index,
            per_level,
            observed_order: Some(p),
            extrapolated: last + correction,
            error_bar: correction.abs(),
            crossing: false,
        }
    } else {
        // corrections are not contracting cleanly; report the finest value
        // with a conservative bar
        ConvergenceRow {
            index,
            per_level,
            observed_order: None,
            extrapolated: last,
            error_bar: 3.0 * d2.abs(),
            crossing: false,
        }
    }
}
