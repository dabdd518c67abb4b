//! Sprung buttons, the center-anchored rate slider, and grid panels.

mod button;
mod panel;
mod slider;

pub use button::{button_update, Button3D, ButtonConfig};
pub use panel::{panel_slot_pose, set_opacity, Panel};
pub use slider::{slider_update, Slider3D, SliderConfig};

use thiserror::Error;

use crate::physics::PhysicsError;
use crate::spatial::NodeId;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WidgetError {
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
    #[error("invalid widget configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("slot ({column}, {row}) outside {columns}x{rows} grid")]
    SlotOutOfRange { column: u32, row: u32, columns: u32, rows: u32 },
    #[error("cell ({column}, {row}) already holds {existing}")]
    CellOccupied { column: u32, row: u32, existing: NodeId },
    #[error(transparent)]
    Physics(#[from] PhysicsError),
}

/// A returning spring closer than this to rest (meters, meters per second)
/// is snapped onto it, so an idle widget stops changing.
pub(crate) const REST_SNAP_POSITION: f64 = 1e-9;
pub(crate) const REST_SNAP_VELOCITY: f64 = 1e-7;

pub(crate) fn snap_to_rest(state: crate::physics::SpringState) -> crate::physics::SpringState {
    if state.displacement.abs() < REST_SNAP_POSITION && state.velocity.abs() < REST_SNAP_VELOCITY {
        crate::physics::SpringState::at_rest()
    } else {
        state
    }
}
