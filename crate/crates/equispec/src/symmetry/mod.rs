//! Finite symmetry groups acting on meshes, sign twists, the averaged
//! projection onto twisted-invariant functions, and reduction to a
//! fundamental domain.

mod action;
mod fundamental;
mod groups;

pub use fundamental::{fundamental_domain_reduce, FundamentalDomain};
pub use groups::{standard_group, GroupKind};

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::mesh::SurfaceMesh;

/// A sign in the multiplicative group {+1, -1}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn from_value(v: f64) -> Result<Sign> {
        if (v - 1.0).abs() < 1e-9 {
            Ok(Sign::Plus)
        } else if (v + 1.0).abs() < 1e-9 {
            Ok(Sign::Minus)
        } else {
            Err(Error::Group(format!("{} is not a sign", v)))
        }
    }
}

impl std::ops::Mul for Sign {
    type Output = Sign;
    fn mul(self, rhs: Sign) -> Sign {
        if self == rhs {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

/// Which twist homomorphism to attach to a group.
pub enum TwistVariant<'a> {
    /// sigma = +1 everywhere.
    Trivial,
    /// sigma = det of the matrix.
    Determinant,
    /// sigma(phi) = sign of <phi_* nu, nu> on the oriented surface; requires
    /// the mesh to be invariant under the group with a consistent sign.
    NormalSign(&'a SurfaceMesh),
    /// User table in element order; validated as a homomorphism.
    Explicit(Vec<Sign>),
}

/// A finite group of orthogonal matrices, optionally realized as a mesh
/// automorphism group.  The identity is element 0 and the remaining elements
/// are in breadth-first order over the generators used to build the group.
#[derive(Clone, Debug)]
pub struct GroupAction {
    pub elements: Vec<Matrix3<f64>>,
    pub twist: Vec<Sign>,
    /// `vertex_maps[e][v]` = image of vertex v under element e.
    pub vertex_maps: Option<Vec<Vec<usize>>>,
    /// `triangle_maps[e][t]` = image triangle of t under element e.
    pub triangle_maps: Option<Vec<Vec<usize>>>,
}

pub(crate) const MATRIX_MATCH_TOL: f64 = 1e-10;

pub(crate) fn match_element(elements: &[Matrix3<f64>], m: &Matrix3<f64>) -> Option<usize> {
    elements
        .iter()
        .position(|e| (e - m).abs().max() < MATRIX_MATCH_TOL)
}

impl GroupAction {
    /// Generate the group spanned by orthogonal generators, breadth-first,
    /// with the trivial twist.
    pub fn from_generators(generators: &[Matrix3<f64>]) -> Result<GroupAction> {
        for g in generators {
            if ((g * g.transpose()) - Matrix3::identity()).abs().max() > 1e-9 {
                return Err(Error::Group("generator is not orthogonal".into()));
            }
        }
        let mut elements = vec![Matrix3::identity()];
        let mut queue = std::collections::VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            let base = elements[i];
            for g in generators {
                let p = g * base;
                if match_element(&elements, &p).is_none() {
                    elements.push(p);
                    queue.push_back(elements.len() - 1);
                    if elements.len() > 4096 {
                        return Err(Error::Group(
                            "group generation exceeded 4096 elements; generators do not \
                             span a small finite group"
                                .into(),
                        ));
                    }
                }
            }
        }
        let twist = vec![Sign::Plus; elements.len()];
        Ok(GroupAction {
            elements,
            twist,
            vertex_maps: None,
            triangle_maps: None,
        })
    }

    /// Order-2 group generated by the reflection through the plane with unit
    /// normal `n`.
    pub fn reflection(normal: Vector3<f64>) -> Result<GroupAction> {
        let n = normal
            .try_normalize(1e-12)
            .ok_or_else(|| Error::Group("zero reflection normal".into()))?;
        let m = Matrix3::identity() - 2.0 * n * n.transpose();
        Self::from_generators(&[m])
    }

    /// Cyclic group of rotations about the z-axis of order k.
    pub fn rotation_z(k: usize) -> Result<GroupAction> {
        if k == 0 {
            return Err(Error::Group("rotation order must be positive".into()));
        }
        let t = std::f64::consts::TAU / k as f64;
        let m = Matrix3::new(
            t.cos(),
            -t.sin(),
            0.0,
            t.sin(),
            t.cos(),
            0.0,
            0.0,
            0.0,
            1.0,
        );
        Self::from_generators(&[m])
    }

    pub fn trivial() -> GroupAction {
        GroupAction {
            elements: vec![Matrix3::identity()],
            twist: vec![Sign::Plus],
            vertex_maps: None,
            triangle_maps: None,
        }
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    /// Index of elements[i] * elements[j].
    pub fn product_index(&self, i: usize, j: usize) -> Result<usize> {
        let p = self.elements[i] * self.elements[j];
        match_element(&self.elements, &p)
            .ok_or_else(|| Error::Group("group is not closed under composition".into()))
    }

    pub fn inverse_index(&self, i: usize) -> Result<usize> {
        let inv = self.elements[i].transpose(); // orthogonal
        match_element(&self.elements, &inv)
            .ok_or_else(|| Error::Group("group is not closed under inversion".into()))
    }

    /// Closure and inverse-closure to matrix tolerance.
    pub fn check_closure(&self) -> Result<()> {
        for i in 0..self.order() {
            self.inverse_index(i)?;
            for j in 0..self.order() {
                self.product_index(i, j)?;
            }
        }
        Ok(())
    }

    /// twist(ab) = twist(a) twist(b) for all pairs.
    pub fn check_twist_homomorphism(&self) -> Result<()> {
        for i in 0..self.order() {
            for j in 0..self.order() {
                let k = self.product_index(i, j)?;
                if self.twist[k] != self.twist[i] * self.twist[j] {
                    return Err(Error::Group(format!(
                        "twist is not a homomorphism at pair ({}, {})",
                        i, j
                    )));
                }
            }
        }
        Ok(())
    }

    /// Attach a twist homomorphism.
    pub fn with_twist(&self, variant: TwistVariant) -> Result<GroupAction> {
        let mut out = self.clone();
        match variant {
            TwistVariant::Trivial => {
                out.twist = vec![Sign::Plus; self.order()];
            }
            TwistVariant::Determinant => {
                out.twist = self
                    .elements
                    .iter()
                    .map(|m| Sign::from_value(m.determinant()))
                    .collect::<Result<_>>()?;
            }
            TwistVariant::NormalSign(mesh) => {
                if out.vertex_maps.is_none() {
                    out = out.act_on_mesh(mesh, 1e-9)?;
                }
                out.twist = action::normal_sign_twist(&out, mesh)?;
            }
            TwistVariant::Explicit(table) => {
                if table.len() != self.order() {
                    return Err(Error::Group(format!(
                        "twist table has {} entries for a group of order {}",
                        table.len(),
                        self.order()
                    )));
                }
                out.twist = table;
            }
        }
        out.check_twist_homomorphism()?;
        Ok(out)
    }

    /// Realize the group as a mesh automorphism group by nearest-vertex
    /// matching within `tol`; fails loudly on any mismatch.
    pub fn act_on_mesh(&self, mesh: &SurfaceMesh, tol: f64) -> Result<GroupAction> {
        action::act_on_mesh(self, mesh, tol)
    }

    /// Averaged twisted projection of per-vertex samples:
    /// (P u)(p) = (1/|G|) sum_phi sigma(phi) u(phi^{-1}(p)).
    pub fn twisted_project(&self, values: &[f64]) -> Result<Vec<f64>> {
        action::twisted_project(self, values)
    }

    /// Orbit partition of the vertex set under the twisted action.
    pub fn vertex_orbits(&self) -> Result<Vec<VertexOrbit>> {
        action::vertex_orbits(self)
    }
}

/// Orbit of a vertex under the twisted action.
#[derive(Clone, Debug)]
pub struct VertexOrbit {
    pub representative: usize,
    /// (vertex, coefficient) pairs of the projected hat function of the
    /// representative, scaled by the group order.
    pub support: Vec<(usize, f64)>,
    /// False when the twisted average of the representative's hat function
    /// vanishes identically (stabilizer with mixed twist signs).
    pub alive: bool,
}
