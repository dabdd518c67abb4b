//! Grab-to-reposition, contextual visibility and persistent layouts.

mod context;
mod grab;
mod persist;

pub use context::{set_context, ContextOutcome, ContextRule, ContextRules, DEFAULT_CONTEXT};
pub use grab::{begin_grab, end_grab, update_grab, GrabSession, SnapPolicy};
pub use persist::{format_timestamp, load_layout, save_layout, LayoutDocument, LAYOUT_VERSION};
pub(crate) use persist::PoseRecord;

use thiserror::Error;

use crate::spatial::{NodeId, SpatialError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LayoutError {
    #[error("node {0} not found or hidden")]
    NotFound(NodeId),
    #[error("node {0} is not grabbable")]
    NotGrabbable(NodeId),
    #[error("invalid state: {0}")]
    InvalidState(&'static str),
    #[error("no component named {0:?}")]
    UnknownComponent(String),
    #[error("unsupported layout version {0}")]
    UnsupportedVersion(u32),
    #[error("malformed document: {0}")]
    Format(String),
    #[error(transparent)]
    Spatial(#[from] SpatialError),
}
