//! URDF to URDD conversion.

mod error;
pub mod composer;
#[doc(hidden)]
pub mod fixtures;
pub mod geometry;
pub mod kinematics;
pub mod model;
pub mod pipeline;
pub mod proximity;

pub use error::{Error, ErrorClass, GeometryError, ModelError, Result};
pub use model::{parse_urdf, parse_urdf_with, resolve_mesh_path, to_urdf_xml, ParseOptions, RobotModel};
