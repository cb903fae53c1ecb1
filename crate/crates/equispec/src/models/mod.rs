//! Concrete model problems: the catenoidal annulus and its 1D radial
//! oracle, the flat disk, the spherical index/nullity table, rotation
//! Jacobi fields, and nodal domain counting.

pub mod catenoid;
pub mod disk;
pub mod killing;
pub mod nodal;
pub mod sphere_table;
pub mod sturm;

pub use catenoid::{
    k0_certificate, k0_equivariant_index, k0_jacobi_surface, k0_mode_crosscheck, k0_profile,
    union_jacobi_surface, CatenoidParams, JacobiSurface, K0Certificate, K0EquivariantReport,
    K0Sample, ModeCrossCheck,
};
pub use disk::{disk_equivariant_index, disk_problem, DiskEquivariantReport};
pub use killing::killing_jacobi_field;
pub use nodal::{nodal_domains, nodal_tolerance, NodalDomains};
pub use sphere_table::{
    classify_extrapolated, lune_cut_sandwich, sphere_table, sphere_table_with, SphereTable,
    SphereTableRow,
};
pub use sturm::{
    assemble_1d, disk_radial_neumann, sl_solve, LeftCondition, SlSolution, SturmLiouvilleProblem,
};
