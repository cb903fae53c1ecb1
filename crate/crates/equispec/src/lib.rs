//! Spectral analysis of Schrödinger-type bilinear forms on triangulated
//! surfaces, with mixed Dirichlet/Neumann/Robin boundary conditions and
//! finite symmetry groups.
//!
//! The crate assembles the form
//!
//! ```text
//! T(u, v) = ∫_Ω ( g(∇u, ∇v) − q u v ) dA − ∫_{∂_R Ω} r u v ds
//! ```
//!
//! with piecewise-linear elements on a triangle mesh, solves the generalized
//! symmetric eigenproblem `K u = λ M u`, and classifies Morse index and
//! nullity.  On top of that sit:
//!
//! * sign-twisted group actions of finite subgroups of O(3), the averaged
//!   projection onto invariant functions, and fundamental-domain reduction
//!   of equivariant spectra ([`symmetry`]);
//! * Montiel–Ros style two-sided counting bounds obtained by partitioning a
//!   domain and internalizing Dirichlet or Neumann conditions on the
//!   interfaces ([`montielros`]);
//! * the model geometries these tools are exercised on: spherical triangles
//!   and lunes, a catenoidal annulus meeting the unit sphere, and the flat
//!   unit disk, together with a 1D Sturm–Liouville cross-check solver,
//!   rotation-induced Jacobi fields, and nodal-domain counting ([`models`]).
//!
//! Built-in domains are registered behind the [`mesh::DomainBuilder`] trait
//! and selected by name at runtime; see [`mesh::builtin_registry`].

pub mod error;
pub mod expr;
pub mod mesh;
pub mod problem;
pub mod report;
pub mod models;
pub mod montielros;
pub mod spectral;
pub mod symmetry;
pub(crate) mod util;

pub use nalgebra;

pub use error::{Error, Result};

/// Stable FNV-1a hash of arbitrary bytes, for deterministic config hashes.
pub fn util_hash(bytes: &[u8]) -> u64 {
    util::fnv1a(bytes)
}
pub use mesh::{
    build_builtin, BoundaryDecomposition, BoundaryTag, Params, ProblemSpec, SurfaceMesh,
};

