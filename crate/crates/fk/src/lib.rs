//! Forward kinematics driven only by URDD modules.
//!
//! The model is assembled from `urdf_module` (joint origins, axes, types),
//! `dof_module` (configuration layout and mimic bindings) and `chain_module`
//! (evaluation order). No URDF parsing is involved.
//!
//! Conventions: planar joints take `(u, v, θ)` where `θ` rotates about the
//! joint axis and `(u, v)` is the basis from [`plane_basis`]; floating joints
//! take `(x, y, z, roll, pitch, yaw)`.

mod error;
mod model;
mod transform;

pub use error::FkError;
pub use model::{fk, fk_link, plane_basis, FkModel, FkResult};
pub use transform::{axis_angle_matrix, quaternion_wxyz, rpy_matrix, RigidTransform};
