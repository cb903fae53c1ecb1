//! Arithmetic combination of per-piece index/nullity counts into lower and
//! upper bounds, and the glued-surface bookkeeping built on top of it.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};

/// Index/nullity of one piece under its Dirichlet and Neumann
/// internalizations.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct PieceCounts {
    pub ind_d: u64,
    pub nul_d: u64,
    pub ind_n: u64,
    pub nul_n: u64,
}

/// Bounds obtained from n pairwise isometric copies of one piece.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BoundLedger {
    pub pieces: u64,
    /// index >= n ind_d + (n-1) nul_d
    pub lower_index: u64,
    /// index + nullity <= n ind_n + nul_n
    pub upper_index_plus_nullity: u64,
    /// n (ind_n - ind_d) - ((n-1) nul_d - nul_n); non-negative whenever the
    /// two bounds come from the same spectra.
    pub compatibility_slack: i64,
    pub consistent: bool,
}

pub fn isometric_pieces_bounds(counts: PieceCounts, n: usize) -> Result<BoundLedger> {
    if n < 1 {
        return Err(Error::InvalidInput("need at least one piece".into()));
    }
    let n64 = n as u64;
    let lower_index = n64 * counts.ind_d + (n64 - 1) * counts.nul_d;
    let upper = n64 * counts.ind_n + counts.nul_n;
    let slack = n as i64 * (counts.ind_n as i64 - counts.ind_d as i64)
        - ((n as i64 - 1) * counts.nul_d as i64 - counts.nul_n as i64);
    Ok(BoundLedger {
        pieces: n64,
        lower_index,
        upper_index_plus_nullity: upper,
        compatibility_slack: slack,
        consistent: slack >= 0 && lower_index <= upper,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SymmetryBoundVariant {
    /// 2k pairwise isometric wedges, each with Dirichlet nullity >= 1.
    Pyramidal,
    /// Odd functions across a mirror: k equivariantly paired wedges.
    PlaneOdd,
    /// Even functions across the perpendicular mirror, 2k wedges.
    PrismEven,
}

/// Index lower bound guaranteed by a k-fold rotation/reflection symmetry
/// together with a rotational Jacobi field vanishing on the wedge walls:
/// 2k-1 (plain or mirror-even), k-1 (mirror-odd).
pub fn symmetry_lower_bound(k: usize, variant: SymmetryBoundVariant) -> Result<u64> {
    if k < 2 {
        return Err(Error::InvalidInput(
            "symmetry lower bounds need k >= 2".into(),
        ));
    }
    let k = k as u64;
    Ok(match variant {
        SymmetryBoundVariant::Pyramidal => 2 * k - 1,
        SymmetryBoundVariant::PlaneOdd => k - 1,
        SymmetryBoundVariant::PrismEven => 2 * k - 1,
    })
}

/// A per-block contribution to a glued bound: either exact counts or an
/// index-plus-nullity cap.
#[derive(Clone, Copy, Debug, Serialize)]
pub enum BlockBound {
    Exact { ind: u64, nul: u64 },
    TotalAtMost(u64),
}

impl BlockBound {
    fn total(&self) -> u64 {
        match self {
            BlockBound::Exact { ind, nul } => ind + nul,
            BlockBound::TotalAtMost(b) => *b,
        }
    }

    fn index_only(&self) -> u64 {
        match self {
            BlockBound::Exact { ind, .. } => *ind,
            BlockBound::TotalAtMost(b) => *b,
        }
    }
}

/// c * var + offset, printed as e.g. `12m + 12`.
#[derive(Clone, Copy, Debug, Serialize, PartialEq, Eq)]
pub struct LinearBound {
    pub coeff: u64,
    pub offset: u64,
    pub var: char,
}

impl std::fmt::Display for LinearBound {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.offset == 0 {
            write!(f, "{}{}", self.coeff, self.var)
        } else {
            write!(f, "{}{} + {}", self.coeff, self.var, self.offset)
        }
    }
}

/// The three block recipes for the glued families: a genus-m surface with
/// three boundary circles under its full antiprismatic symmetry or the
/// smaller pyramidal one, and the genus-zero family under its prismatic
/// symmetry.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GluedRecipe {
    /// catenoid + tower + disk blocks, maximal (antiprismatic) symmetry.
    AntiprismaticThreeBlock,
    /// two catenoid copies + tower + disk, pyramidal symmetry; combines over
    /// 2(m+1) wedges into the absolute bound.
    PyramidalThreeBlock,
    /// catenoid + tower, prismatic symmetry; combines over 4n wedges.
    PrismaticTwoBlock,
}

#[derive(Clone, Debug, Serialize)]
pub struct GluedLedger {
    pub recipe: String,
    /// Per-block contributions in recipe order.
    pub contributions: Vec<(String, u64)>,
    /// Equivariant index-plus-nullity bound (the sum of the contributions).
    pub equivariant_bound: u64,
    /// Absolute index-plus-nullity bound after multiplying over the wedges,
    /// when the recipe provides one.
    pub absolute_bound: Option<LinearBound>,
}

/// Combine per-block equivariant bounds into the glued-surface ledger.
/// `rows` must contain entries for "catenoid", "tower" and (for the
/// three-block recipes) "disk".
pub fn glued_surface_ledger(
    rows: &BTreeMap<String, BlockBound>,
    recipe: GluedRecipe,
) -> Result<GluedLedger> {
    let need = |name: &str| -> Result<BlockBound> {
        rows.get(name)
            .copied()
            .ok_or_else(|| Error::InvalidInput(format!("missing block row `{}`", name)))
    };
    let cat = need("catenoid")?;
    let tower = need("tower")?;
    match recipe {
        GluedRecipe::AntiprismaticThreeBlock => {
            let disk = need("disk")?;
            // index contributions from the annulus and tower blocks, full
            // index-plus-nullity from the disk block
            let contributions = vec![
                ("catenoid".into(), cat.index_only()),
                ("tower".into(), tower.index_only()),
                ("disk".into(), disk.total()),
            ];
            let bound = contributions.iter().map(|(_, v)| v).sum();
            Ok(GluedLedger {
                recipe: "antiprismatic".into(),
                contributions,
                equivariant_bound: bound,
                absolute_bound: None,
            })
        }
        GluedRecipe::PyramidalThreeBlock => {
            let disk = need("disk")?;
            let contributions = vec![
                ("catenoid (x2)".into(), 2 * cat.index_only()),
                ("tower".into(), tower.total()),
                ("disk".into(), disk.total()),
            ];
            let bound: u64 = contributions.iter().map(|(_, v)| v).sum();
            // 2(m+1) wedges, each capped by the equivariant bound
            Ok(GluedLedger {
                recipe: "pyramidal".into(),
                contributions,
                equivariant_bound: bound,
                absolute_bound: Some(LinearBound {
                    coeff: 2 * bound,
                    offset: 2 * bound,
                    var: 'm',
                }),
            })
        }
        GluedRecipe::PrismaticTwoBlock => {
            let contributions = vec![
                ("catenoid".into(), cat.index_only()),
                ("tower".into(), tower.total()),
            ];
            let bound: u64 = contributions.iter().map(|(_, v)| v).sum();
            // 4n wedges
            Ok(GluedLedger {
                recipe: "prismatic".into(),
                contributions,
                equivariant_bound: bound,
                absolute_bound: Some(LinearBound {
                    coeff: 4 * bound,
                    offset: 0,
                    var: 'n',
                }),
            })
        }
    }
}

/// The block rows established for the glued families: the catenoidal
/// annulus contributes (1, 0), the desingularizing tower (1, 0) under the
/// maximal symmetry with caps 3 (pyramidal) and 1 (prismatic), and the disk
/// (0, 0).
pub fn standard_block_rows(recipe: GluedRecipe) -> BTreeMap<String, BlockBound> {
    let mut rows = BTreeMap::new();
    rows.insert("catenoid".into(), BlockBound::Exact { ind: 1, nul: 0 });
    match recipe {
        GluedRecipe::AntiprismaticThreeBlock => {
            rows.insert("tower".into(), BlockBound::Exact { ind: 1, nul: 0 });
            rows.insert("disk".into(), BlockBound::Exact { ind: 0, nul: 0 });
        }
        GluedRecipe::PyramidalThreeBlock => {
            rows.insert("tower".into(), BlockBound::TotalAtMost(3));
            rows.insert("disk".into(), BlockBound::TotalAtMost(1));
        }
        GluedRecipe::PrismaticTwoBlock => {
            rows.insert("tower".into(), BlockBound::TotalAtMost(1));
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dirichlet_nullity_one_reproduces_the_wedge_bound() {
        // 2k wedges whose Dirichlet problem has nullity >= 1: lower bound
        // 2k - 1 on the index
        for k in 2..8 {
            let counts = PieceCounts {
                ind_d: 0,
                nul_d: 1,
                ind_n: 1,
                nul_n: 1,
            };
            let ledger = isometric_pieces_bounds(counts, 2 * k).unwrap();
            assert_eq!(ledger.lower_index, (2 * k - 1) as u64);
            assert_eq!(
                ledger.lower_index,
                symmetry_lower_bound(k, SymmetryBoundVariant::Pyramidal).unwrap()
            );
            assert!(ledger.consistent);
        }
    }

    #[test]
    fn single_piece_bounds_collapse() {
        let counts = PieceCounts {
            ind_d: 1,
            nul_d: 0,
            ind_n: 1,
            nul_n: 0,
        };
        let ledger = isometric_pieces_bounds(counts, 1).unwrap();
        assert_eq!(ledger.lower_index, 1);
        assert_eq!(ledger.upper_index_plus_nullity, 1);
        assert_eq!(ledger.compatibility_slack, 0);
        assert!(ledger.consistent);
    }

    #[test]
    fn symmetry_bounds_match_the_formulas() {
        assert_eq!(
            symmetry_lower_bound(5, SymmetryBoundVariant::PrismEven).unwrap(),
            9
        );
        assert_eq!(
            symmetry_lower_bound(4, SymmetryBoundVariant::Pyramidal).unwrap(),
            7
        );
        assert_eq!(
            symmetry_lower_bound(2, SymmetryBoundVariant::PlaneOdd).unwrap(),
            1
        );
        assert!(symmetry_lower_bound(1, SymmetryBoundVariant::Pyramidal).is_err());
    }

    #[test]
    fn glued_ledgers_reproduce_the_three_sums() {
        let anti = glued_surface_ledger(
            &standard_block_rows(GluedRecipe::AntiprismaticThreeBlock),
            GluedRecipe::AntiprismaticThreeBlock,
        )
        .unwrap();
        assert_eq!(anti.equivariant_bound, 2);

        let pyr = glued_surface_ledger(
            &standard_block_rows(GluedRecipe::PyramidalThreeBlock),
            GluedRecipe::PyramidalThreeBlock,
        )
        .unwrap();
        assert_eq!(pyr.equivariant_bound, 6);
        assert_eq!(
            pyr.absolute_bound,
            Some(LinearBound {
                coeff: 12,
                offset: 12,
                var: 'm'
            })
        );
        assert_eq!(format!("{}", pyr.absolute_bound.unwrap()), "12m + 12");

        let pri = glued_surface_ledger(
            &standard_block_rows(GluedRecipe::PrismaticTwoBlock),
            GluedRecipe::PrismaticTwoBlock,
        )
        .unwrap();
        assert_eq!(pri.equivariant_bound, 2);
        assert_eq!(
            pri.absolute_bound,
            Some(LinearBound {
                coeff: 8,
                offset: 0,
                var: 'n'
            })
        );
    }

    #[test]
    fn missing_block_is_an_error() {
        let mut rows = standard_block_rows(GluedRecipe::PrismaticTwoBlock);
        rows.remove("tower");
        assert!(glued_surface_ledger(&rows, GluedRecipe::PrismaticTwoBlock).is_err());
    }
}
