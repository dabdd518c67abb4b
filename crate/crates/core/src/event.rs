//! Interaction and widget events, and their line-delimited JSON form.

use serde::{Deserialize, Serialize};

use crate::input::DeviceId;
use crate::spatial::NodeId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EventKind {
    HoverEntered,
    HoverExited,
    SelectStart,
    SelectEnd,
    GrabStarted,
    GrabEnded,
    Pressed,
    Released,
    ValueChanged,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::HoverEntered => "HoverEntered",
            EventKind::HoverExited => "HoverExited",
            EventKind::SelectStart => "SelectStart",
            EventKind::SelectEnd => "SelectEnd",
            EventKind::GrabStarted => "GrabStarted",
            EventKind::GrabEnded => "GrabEnded",
            EventKind::Pressed => "Pressed",
            EventKind::Released => "Released",
            EventKind::ValueChanged => "ValueChanged",
        }
    }
}

/// Something that happened to a node at a point in session time.
///
/// `payload` is the button depth for press events and the bound value for
/// `ValueChanged`; zero otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub kind: EventKind,
    pub node: NodeId,
    pub payload: f64,
    pub timestamp: f64,
    pub device: Option<DeviceId>,
}

impl Event {
    pub fn new(kind: EventKind, node: NodeId, payload: f64, timestamp: f64) -> Self {
        Self {
            kind,
            node,
            payload,
            timestamp,
            device: None,
        }
    }

    pub fn from_device(kind: EventKind, node: NodeId, timestamp: f64, device: DeviceId) -> Self {
        Self {
            kind,
            node,
            payload: 0.0,
            timestamp,
            device: Some(device),
        }
    }

    pub fn to_record(&self) -> EventRecord {
        EventRecord {
            ev: self.kind,
            node: self.node,
            t: self.timestamp,
            dev: self.device.clone(),
            value: (self.kind == EventKind::ValueChanged).then_some(self.payload),
        }
    }

    /// One JSON object, no trailing newline.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(&self.to_record()).expect("event records always serialize")
    }
}

/// Wire form: `{"ev":"Pressed","node":3,"t":0.5}` plus optional `dev` and
/// `value` fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub ev: EventKind,
    pub node: NodeId,
    pub t: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dev: Option<DeviceId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wire_shape() {
        let e = Event::new(EventKind::Pressed, NodeId(3), 0.01, 0.5);
        assert_eq!(e.to_json_line(), r#"{"ev":"Pressed","node":3,"t":0.5}"#);
        let v = Event::new(EventKind::ValueChanged, NodeId(4), 1.25, 1.0);
        assert_eq!(v.to_json_line(), r#"{"ev":"ValueChanged","node":4,"t":1.0,"value":1.25}"#);
        let d = Event::from_device(EventKind::HoverEntered, NodeId(1), 0.0, DeviceId::from("right"));
        let back: EventRecord = serde_json::from_str(&d.to_json_line()).unwrap();
        assert_eq!(back, d.to_record());
    }
}
