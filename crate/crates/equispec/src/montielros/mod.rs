//! Two-sided eigenvalue-counting bounds from domain partitions.
//!
//! A partition of the domain into group-invariant pieces yields, for any
//! threshold t, a lower bound on the number of eigenvalues below t from the
//! Dirichlet-internalized pieces and an upper bound from the
//! Neumann-internalized ones.  The checker computes every spectrum involved
//! and verifies both inequalities for every choice of distinguished piece.

mod check;
mod internalize;
mod ledger;

pub use check::{
    count_spectrum, evaluate_inequalities, montiel_ros_check, CountPair, MrCheckReport,
    MrInequality, PieceCountReport,
};
pub use internalize::{internalize, InternalizedPiece, Internalization};
pub use ledger::{
    glued_surface_ledger, isometric_pieces_bounds, standard_block_rows, symmetry_lower_bound,
    BlockBound, BoundLedger, GluedLedger, GluedRecipe, LinearBound, PieceCounts,
    SymmetryBoundVariant,
};

use crate::error::{Error, Result};
use crate::mesh::SurfaceMesh;

/// Disjoint triangle subsets covering the whole mesh, each inducing a valid
/// submesh (pieces may be disconnected).
#[derive(Clone, Debug)]
pub struct Partition {
    pub pieces: Vec<Vec<usize>>,
}

impl Partition {
    pub fn new(mesh: &SurfaceMesh, pieces: Vec<Vec<usize>>) -> Result<Partition> {
        let mut owner = vec![usize::MAX; mesh.n_triangles()];
        for (pi, piece) in pieces.iter().enumerate() {
            if piece.is_empty() {
                return Err(Error::Partition(format!("piece {} is empty", pi)));
            }
            for &t in piece {
                if t >= mesh.n_triangles() {
                    return Err(Error::Partition(format!(
                        "piece {} references triangle {} of {}",
                        pi,
                        t,
                        mesh.n_triangles()
                    )));
                }
                if owner[t] != usize::MAX {
                    return Err(Error::Partition(format!(
                        "triangle {} belongs to pieces {} and {}",
                        t, owner[t], pi
                    )));
                }
                owner[t] = pi;
            }
        }
        if let Some(t) = owner.iter().position(|&o| o == usize::MAX) {
            return Err(Error::Partition(format!(
                "triangle {} is covered by no piece",
                t
            )));
        }
        Ok(Partition { pieces })
    }

    /// Partition by a labeling function on triangle index.
    pub fn by_label<F: Fn(usize) -> usize>(
        mesh: &SurfaceMesh,
        n_pieces: usize,
        label: F,
    ) -> Result<Partition> {
        let mut pieces = vec![Vec::new(); n_pieces];
        for t in 0..mesh.n_triangles() {
            let l = label(t);
            if l >= n_pieces {
                return Err(Error::Partition(format!(
                    "label {} out of range {}",
                    l, n_pieces
                )));
            }
            pieces[l].push(t);
        }
        Partition::new(mesh, pieces)
    }

    /// Edges shared between distinct pieces, as (min, max) parent vertex
    /// pairs.
    pub fn interface_edges(&self, mesh: &SurfaceMesh) -> Vec<(usize, usize)> {
        let mut owner = vec![usize::MAX; mesh.n_triangles()];
        for (pi, piece) in self.pieces.iter().enumerate() {
            for &t in piece {
                owner[t] = pi;
            }
        }
        let mut out = Vec::new();
        for (key, tris) in mesh.edge_incidence() {
            if tris.len() == 2 && owner[tris[0]] != owner[tris[1]] {
                out.push(key);
            }
        }
        out.sort_unstable();
        out
    }

    /// Parse the partition file format: one `piece <id>: <indices...>` line
    /// per piece.
    pub fn parse(text: &str, mesh: &SurfaceMesh) -> Result<Partition> {
        let mut pieces = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let rest = line.strip_prefix("piece").ok_or_else(|| {
                Error::Format(format!("line {}: expected `piece <id>: ...`", lineno + 1))
            })?;
            let (_, indices) = rest.split_once(':').ok_or_else(|| {
                Error::Format(format!("line {}: missing `:` after piece id", lineno + 1))
            })?;
            let tris: Vec<usize> = indices
                .split_whitespace()
                .map(|s| {
                    s.parse::<usize>().map_err(|_| {
                        Error::Format(format!("line {}: bad triangle index `{}`", lineno + 1, s))
                    })
                })
                .collect::<Result<_>>()?;
            pieces.push(tris);
        }
        Partition::new(mesh, pieces)
    }

    pub fn to_text(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::new();
        for (i, piece) in self.pieces.iter().enumerate() {
            let _ = write!(out, "piece {}:", i);
            for t in piece {
                let _ = write!(out, " {}", t);
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_builtin, Params};

    #[test]
    fn partition_must_cover_and_not_overlap() {
        let mesh = build_builtin("sphere_octant", 1, &Params::default()).unwrap();
        assert!(Partition::new(&mesh, vec![vec![0, 1], vec![2]]).is_err()); // misses 3
        assert!(Partition::new(&mesh, vec![vec![0, 1, 2], vec![2, 3]]).is_err()); // overlap
        let p = Partition::new(&mesh, vec![vec![0, 1], vec![2, 3]]).unwrap();
        assert!(!p.interface_edges(&mesh).is_empty());
    }

    #[test]
    fn partition_file_round_trip() {
        let mesh = build_builtin("sphere_lune", 1, &Params::default()).unwrap();
        let n = mesh.n_triangles();
        let p = Partition::by_label(&mesh, 2, |t| if t < n / 2 { 0 } else { 1 }).unwrap();
        let text = p.to_text();
        let back = Partition::parse(&text, &mesh).unwrap();
        assert_eq!(p.pieces, back.pieces);
        assert!(Partition::parse("piece 0: 0 1 999999\n", &mesh).is_err());
    }
}
