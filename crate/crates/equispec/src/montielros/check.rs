//! The two counting inequalities, verified on computed spectra.

use rayon::prelude::*;
use serde::Serialize;

use super::{internalize, Internalization, Partition};
use crate::error::{Error, Result};
use crate::mesh::ProblemSpec;
use crate::spectral::{
    assemble, solve_equivariant, solve_with, EquivariantStrategy, SolveOptions, Spectrum,
};
use crate::symmetry::GroupAction;

/// dim E_{<t} and dim E_{<=t} of a computed spectrum.
#[derive(Clone, Copy, Debug, Serialize, PartialEq, Eq)]
pub struct CountPair {
    pub below: usize,
    pub at_or_below: usize,
}

/// Classify a spectrum against the threshold.  Eigenvalues within zero_tol
/// of t count as equal to t; eigenvalues in the ambiguous band
/// (zero_tol, 2 zero_tol) of t are refused, because discretization noise
/// could flip their classification.
pub fn count_spectrum(spectrum: &Spectrum, t: f64, zero_tol: f64) -> Result<CountPair> {
    if !spectrum.covers(t + 2.0 * zero_tol) {
        return Err(Error::InsufficientCoverage(format!(
            "spectrum ends at {:?} but the threshold window reaches {}",
            spectrum.eigenvalues.last(),
            t + 2.0 * zero_tol
        )));
    }
    let mut below = 0;
    let mut at = 0;
    for &l in &spectrum.eigenvalues {
        let d = l - t;
        if d.abs() <= zero_tol {
            at += 1;
        } else if d.abs() < 2.0 * zero_tol {
            return Err(Error::AmbiguousClassification(format!(
                "eigenvalue {} sits in the ambiguous band around the threshold {} \
                 (zero_tol {})",
                l, t, zero_tol
            )));
        } else if d < 0.0 {
            below += 1;
        }
    }
    Ok(CountPair {
        below,
        at_or_below: below + at,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct PieceCountReport {
    pub piece: usize,
    pub triangles: usize,
    pub dirichlet: CountPair,
    pub neumann: CountPair,
}

#[derive(Clone, Debug, Serialize)]
pub struct MrInequality {
    pub distinguished: usize,
    /// dim E_{<t}(T) >= dim E_{<t}(T^D_1) + sum dim E_{<=t}(T^D_i)
    pub lower_lhs: usize,
    pub lower_rhs: usize,
    pub lower_holds: bool,
    /// dim E_{<=t}(T) <= dim E_{<=t}(T^N_1) + sum dim E_{<t}(T^N_i)
    pub upper_lhs: usize,
    pub upper_rhs: usize,
    pub upper_holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct MrCheckReport {
    pub t: f64,
    pub zero_tol: f64,
    pub equivariant: bool,
    pub parent: CountPair,
    pub pieces: Vec<PieceCountReport>,
    pub inequalities: Vec<MrInequality>,
    pub all_hold: bool,
}

/// Evaluate both inequalities for every distinguished piece, from parent
/// counts and per-piece (Dirichlet, Neumann) counts.
pub fn evaluate_inequalities(
    parent: CountPair,
    pieces: &[(CountPair, CountPair)],
) -> (Vec<MrInequality>, bool) {
    let mut out = Vec::with_capacity(pieces.len());
    let mut all = true;
    for p1 in 0..pieces.len() {
        let lower_rhs: usize = pieces
            .iter()
            .enumerate()
            .map(|(i, (d, _))| if i == p1 { d.below } else { d.at_or_below })
            .sum();
        let upper_rhs: usize = pieces
            .iter()
            .enumerate()
            .map(|(i, (_, n))| if i == p1 { n.at_or_below } else { n.below })
            .sum();
        let ineq = MrInequality {
            distinguished: p1,
            lower_lhs: parent.below,
            lower_rhs,
            lower_holds: parent.below >= lower_rhs,
            upper_lhs: parent.at_or_below,
            upper_rhs,
            upper_holds: parent.at_or_below <= upper_rhs,
        };
        all &= ineq.lower_holds && ineq.upper_holds;
        out.push(ineq);
    }
    (out, all)
}

fn solve_counting(
    problem: &ProblemSpec,
    group: Option<&GroupAction>,
    t: f64,
    zero_tol: f64,
) -> Result<Spectrum> {
    let needed = t + 2.0 * zero_tol;
    let mut count = 8;
    loop {
        let spectrum = match group {
            None => {
                let a = assemble(problem)?;
                solve_with(&a, count, zero_tol, &SolveOptions::default())?
            }
            Some(g) => solve_equivariant(
                problem,
                g,
                count,
                EquivariantStrategy::ProjectedSubspace,
            )?,
        };
        if spectrum.covers(needed) {
            return Ok(spectrum);
        }
        if count > 4096 {
            return Err(Error::InsufficientCoverage(format!(
                "still no coverage of {} with {} eigenvalues",
                needed, count
            )));
        }
        count *= 2;
    }
}

/// Verify both counting inequalities for the partition at threshold t, for
/// every choice of distinguished piece.  With a group, the counts are taken
/// in the twisted-invariant subspaces and every piece must be setwise
/// invariant.
pub fn montiel_ros_check(
    problem: &ProblemSpec,
    partition: &Partition,
    t: f64,
    group: Option<&GroupAction>,
    zero_tol: f64,
) -> Result<MrCheckReport> {
    let mesh = &problem.mesh;
    let group = match group {
        Some(g) => match &g.vertex_maps {
            Some(maps) if maps[0].len() == mesh.n_vertices() => Some(g.clone()),
            _ => Some(g.act_on_mesh(mesh, 1e-9)?),
        },
        None => None,
    };

    // the group (trivial if absent) must act transitively on components
    let (comp, n_comp) = mesh.triangle_components();
    if n_comp > 1 {
        let reached: std::collections::HashSet<usize> = match &group {
            Some(g) => g
                .triangle_maps
                .as_ref()
                .unwrap()
                .iter()
                .map(|tm| comp[tm[0]])
                .collect(),
            None => std::iter::once(comp[0]).collect(),
        };
        if reached.len() != n_comp {
            return Err(Error::Partition(format!(
                "the action is not transitive on the {} components of the domain",
                n_comp
            )));
        }
    }

    // pieces must be setwise invariant under the group
    if let Some(g) = &group {
        let tmaps = g.triangle_maps.as_ref().unwrap();
        for (pi, piece) in partition.pieces.iter().enumerate() {
            let members: std::collections::HashSet<usize> = piece.iter().copied().collect();
            for tm in tmaps {
                if piece.iter().any(|&t| !members.contains(&tm[t])) {
                    return Err(Error::Partition(format!(
                        "piece {} is not invariant under the group",
                        pi
                    )));
                }
            }
        }
    }

    let parent_spectrum = solve_counting(problem, group.as_ref(), t, zero_tol)?;
    let parent = count_spectrum(&parent_spectrum, t, zero_tol)?;

    let piece_reports: Vec<PieceCountReport> = partition
        .pieces
        .par_iter()
        .enumerate()
        .map(|(pi, piece)| -> Result<PieceCountReport> {
            let mut counts = [CountPair {
                below: 0,
                at_or_below: 0,
            }; 2];
            for (slot, mode) in [Internalization::Dirichlet, Internalization::Neumann]
                .into_iter()
                .enumerate()
            {
                let internal = internalize(problem, piece, mode)?;
                let sub_group = match &group {
                    None => None,
                    Some(g) => Some(g.act_on_mesh(&internal.problem.mesh, 1e-9)?),
                };
                let spectrum =
                    solve_counting(&internal.problem, sub_group.as_ref(), t, zero_tol)?;
                counts[slot] = count_spectrum(&spectrum, t, zero_tol)?;
            }
            Ok(PieceCountReport {
                piece: pi,
                triangles: piece.len(),
                dirichlet: counts[0],
                neumann: counts[1],
            })
        })
        .collect::<Result<_>>()?;

    let pairs: Vec<(CountPair, CountPair)> = piece_reports
        .iter()
        .map(|p| (p.dirichlet, p.neumann))
        .collect();
    let (inequalities, all_hold) = evaluate_inequalities(parent, &pairs);
    Ok(MrCheckReport {
        t,
        zero_tol,
        equivariant: group.is_some(),
        parent,
        pieces: piece_reports,
        inequalities,
        all_hold,
    })
}
