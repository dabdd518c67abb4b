//! Engine-agnostic spatial GUI toolkit.
//!
//! Physical widgets that spring back, controller-ray and pinch input behind
//! one event stream, panels the user can grab and place anywhere (with
//! per-user layout files and contextual visibility), and a geospatial EV
//! charger map built from those pieces. [`runtime`] ties it together in a
//! deterministic tick loop that can be replayed from scripts.

pub mod event;
pub mod geo;
pub mod input;
pub mod layout;
pub mod physics;
pub mod runtime;
pub mod spatial;
pub mod widgets;

pub use event::{Event, EventKind};
