//! 3D math, the transform hierarchy and ray picking.

mod math;
mod obb;
mod scene;

pub use math::{compose, Pose, Quat, Ray, Vec3};
pub use obb::{ray_intersect_obb, Obb};
pub use scene::{pick, world_pose, NodeId, NodeKind, PickHit, Scene, SceneNode, PICK_TIE_EPSILON};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpatialError {
    #[error("node {0} not found")]
    NotFound(NodeId),
    #[error("parenting {node} under {parent} would create a cycle")]
    Cycle { node: NodeId, parent: NodeId },
    #[error("node name already in use: {0:?}")]
    DuplicateName(String),
    #[error("node name must not be empty")]
    EmptyName,
    #[error("half extents must be positive and finite, got {0:?}")]
    InvalidExtents(Vec3),
    #[error("non-finite {0}")]
    NonFinite(&'static str),
    #[error("rotation quaternion is zero or non-finite")]
    DegenerateRotation,
}
