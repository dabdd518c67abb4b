//! The session loop and everything that feeds it.
//!
//! A [`World`] owns the scene, the widgets and the interaction state and is
//! advanced only by [`World::tick`]. Frames arrive as line-delimited JSON
//! (see [`protocol`]), either live or from a replay script, and each tick
//! answers with event records and one [`SceneSnapshot`].

mod config;
pub mod demo;
pub mod protocol;
mod replay;
mod world;

pub use config::{Config, MapConfig};
pub use demo::{build_demo_world, default_rules, DemoWorld};
pub use protocol::{directive_to_json, frame_to_json, parse_line, Directive, NodeSnapshot, SceneSnapshot, ScriptLine};
pub use replay::{apply_directive, run_replay, ReplayScript};
pub use world::{tick, ButtonBinding, TickOutput, World, PHYSICS_RATE};

use thiserror::Error;

use crate::geo::GeoError;
use crate::input::InputError;
use crate::layout::LayoutError;
use crate::spatial::SpatialError;
use crate::widgets::WidgetError;

#[derive(Debug, Error)]
pub enum RuntimeError {
    /// A frame that breaks the protocol: stale, duplicated devices, bad values.
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("line {line}: {message}")]
    Script { line: usize, message: String },
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Geo(#[from] GeoError),
    #[error(transparent)]
    Layout(#[from] LayoutError),
    #[error(transparent)]
    Widget(#[from] WidgetError),
    #[error(transparent)]
    Spatial(#[from] SpatialError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<InputError> for RuntimeError {
    fn from(e: InputError) -> Self {
        RuntimeError::Protocol(e.to_string())
    }
}

impl RuntimeError {
    /// Process exit code for this error: 3 for protocol violations, 2 for
    /// malformed input files, 1 for anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            RuntimeError::Protocol(_) => 3,
            RuntimeError::Script { .. } | RuntimeError::Config(_) | RuntimeError::Geo(_) => 2,
            RuntimeError::Layout(
                LayoutError::Format(_) | LayoutError::UnsupportedVersion(_) | LayoutError::UnknownComponent(_),
            ) => 2,
            _ => 1,
        }
    }
}
