//! The standard reflection-generated subgroups of O(3) used by the model
//! problems: pyramidal (order 2k), prismatic and antiprismatic (order 4k),
//! and the two order-2 reflection groups.

use nalgebra::Matrix3;

use super::GroupAction;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GroupKind {
    Pyramidal,
    Prismatic,
    Antiprismatic,
    /// Reflection through the plane {z = 0}.
    ReflectionPlane,
    /// Rotation by pi about the x-axis {y = z = 0}.
    ReflectionLine,
}

impl GroupKind {
    pub fn parse(name: &str) -> Result<GroupKind> {
        match name {
            "pyramidal" => Ok(GroupKind::Pyramidal),
            "prismatic" => Ok(GroupKind::Prismatic),
            "antiprismatic" => Ok(GroupKind::Antiprismatic),
            "reflection_plane" => Ok(GroupKind::ReflectionPlane),
            "reflection_line" => Ok(GroupKind::ReflectionLine),
            other => Err(Error::Group(format!("unknown group kind `{}`", other))),
        }
    }
}

/// Reflection through the vertical plane containing the direction
/// theta = alpha (in-plane mirror about the line at angle alpha, z fixed).
pub fn vertical_mirror(alpha: f64) -> Matrix3<f64> {
    let (s, c) = (2.0 * alpha).sin_cos();
    Matrix3::new(c, s, 0.0, s, -c, 0.0, 0.0, 0.0, 1.0)
}

pub fn mirror_z() -> Matrix3<f64> {
    Matrix3::from_diagonal(&nalgebra::Vector3::new(1.0, 1.0, -1.0))
}

pub fn half_turn_x() -> Matrix3<f64> {
    Matrix3::from_diagonal(&nalgebra::Vector3::new(1.0, -1.0, -1.0))
}

/// Build one of the standard symmetry groups; the twist starts out trivial.
pub fn standard_group(kind: GroupKind, k: usize) -> Result<GroupAction> {
    if k == 0 {
        return Err(Error::Group("group parameter k must be at least 1".into()));
    }
    let half = std::f64::consts::PI / (2.0 * k as f64);
    let group = match kind {
        GroupKind::Pyramidal => {
            GroupAction::from_generators(&[vertical_mirror(-half), vertical_mirror(half)])?
        }
        GroupKind::Prismatic => GroupAction::from_generators(&[
            vertical_mirror(-half),
            vertical_mirror(half),
            mirror_z(),
        ])?,
        GroupKind::Antiprismatic => {
            GroupAction::from_generators(&[vertical_mirror(half), half_turn_x()])?
        }
        GroupKind::ReflectionPlane => GroupAction::from_generators(&[mirror_z()])?,
        GroupKind::ReflectionLine => GroupAction::from_generators(&[half_turn_x()])?,
    };
    let expected = match kind {
        GroupKind::Pyramidal => 2 * k,
        GroupKind::Prismatic | GroupKind::Antiprismatic => 4 * k,
        GroupKind::ReflectionPlane | GroupKind::ReflectionLine => 2,
    };
    if group.order() != expected {
        return Err(Error::Group(format!(
            "generated group has order {}, expected {}",
            group.order(),
            expected
        )));
    }
    Ok(group)
}
