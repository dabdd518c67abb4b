//! Line-delimited JSON spoken between a frontend (or a replay script) and
//! the core.
//!
//! Client to core, one object per line:
//!
//! ```text
//! {"t":0.5,"head":{"p":[0,1.6,0],"q":[0,0,0,1]},
//!  "devices":[{"id":"right","kind":"ray","p":[..],"q":[..],"trigger":0.9}]}
//! {"t":0.6,"directive":"set_context","tag":"scan"}
//! ```
//!
//! Core to client: the tick's event records, then one snapshot record
//! `{"frame":n,"nodes":[..]}`.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::geo::ChargerType;
use crate::input::{DeviceKind, DeviceSample, InputFrame};
use crate::layout::PoseRecord;
use crate::spatial::{NodeId, NodeKind, Pose, Quat, Vec3};

/// A non-frame instruction, executed between ticks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "directive", rename_all = "snake_case", deny_unknown_fields)]
pub enum Directive {
    SetContext {
        tag: String,
    },
    /// Saves the named components, or every grabbable layout root if
    /// `names` is absent. The world keeps the document for `load_layout`.
    SaveLayout {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        names: Option<Vec<String>>,
    },
    /// Restores the most recently saved layout.
    LoadLayout {},
    Query {
        #[serde(default)]
        types: BTreeSet<ChargerType>,
        #[serde(default)]
        available_only: bool,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScriptLine {
    Frame(InputFrame),
    Directive { t: f64, directive: Directive },
}

impl ScriptLine {
    pub fn timestamp(&self) -> f64 {
        match self {
            ScriptLine::Frame(f) => f.timestamp,
            ScriptLine::Directive { t, .. } => *t,
        }
    }
}

#[derive(Debug, Deserialize)]
struct DeviceRecord {
    id: String,
    kind: DeviceKind,
    p: [f64; 3],
    q: [f64; 4],
    #[serde(default)]
    pinch: f64,
    #[serde(default)]
    trigger: f64,
}

#[derive(Debug, Deserialize)]
struct FrameRecord {
    t: f64,
    #[serde(default)]
    head: Option<PoseRecord>,
    #[serde(default)]
    devices: Vec<DeviceRecord>,
}

fn wire_pose(rec: &PoseRecord, what: &str) -> Result<Pose, String> {
    let position = Vec3::from_array(rec.p);
    if !position.is_finite() {
        return Err(format!("{what}: non-finite position"));
    }
    let q = Quat::from_array(rec.q);
    // Unit input is kept bit for bit so re-encoded frames replay identically.
    let rotation = if (q.norm() - 1.0).abs() <= 1e-12 {
        q
    } else {
        q.try_normalized()
            .map_err(|_| format!("{what}: rotation must be a non-zero finite quaternion"))?
    };
    Ok(Pose::new(position, rotation))
}

fn unit_scalar(v: f64, what: &str) -> Result<f64, String> {
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{what} must be in [0, 1], got {v}"))
    }
}

fn frame_from_record(rec: FrameRecord) -> Result<InputFrame, String> {
    if !rec.t.is_finite() {
        return Err("t must be finite".into());
    }
    let head = match &rec.head {
        Some(h) => wire_pose(h, "head")?,
        None => Pose::IDENTITY,
    };
    let mut devices = Vec::with_capacity(rec.devices.len());
    for d in rec.devices {
        if d.id.is_empty() {
            return Err("device id must not be empty".into());
        }
        let pose = wire_pose(&PoseRecord { p: d.p, q: d.q }, &format!("device {:?}", d.id))?;
        let pinch = unit_scalar(d.pinch, "pinch")?;
        let trigger = unit_scalar(d.trigger, "trigger")?;
        devices.push(DeviceSample::new(d.id, d.kind, pose, pinch, trigger));
    }
    Ok(InputFrame {
        timestamp: rec.t,
        head,
        devices,
    })
}

/// Parses one client line: a frame, or a directive if it has a
/// `"directive"` key.
pub fn parse_line(text: &str) -> Result<ScriptLine, String> {
    let mut value: serde_json::Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let Some(object) = value.as_object_mut() else {
        return Err("expected a JSON object".into());
    };
    if object.contains_key("directive") {
        let t = object
            .remove("t")
            .and_then(|t| t.as_f64())
            .ok_or("directive needs a numeric t")?;
        let directive: Directive = serde_json::from_value(value).map_err(|e| e.to_string())?;
        return Ok(ScriptLine::Directive { t, directive });
    }
    let rec: FrameRecord = serde_json::from_value(value).map_err(|e| e.to_string())?;
    frame_from_record(rec).map(ScriptLine::Frame)
}

#[derive(Serialize)]
struct DeviceOut<'a> {
    id: &'a str,
    kind: DeviceKind,
    p: [f64; 3],
    q: [f64; 4],
    pinch: f64,
    trigger: f64,
}

#[derive(Serialize)]
struct FrameOut<'a> {
    t: f64,
    head: PoseRecord,
    devices: Vec<DeviceOut<'a>>,
}

/// Client-side encoding of a frame; [`parse_line`] reads it back.
pub fn frame_to_json(frame: &InputFrame) -> String {
    let out = FrameOut {
        t: frame.timestamp,
        head: frame.head.into(),
        devices: frame
            .devices
            .iter()
            .map(|d| DeviceOut {
                id: &d.id.0,
                kind: d.kind,
                p: d.pose.position.to_array(),
                q: d.pose.rotation.to_array(),
                pinch: d.pinch_strength(),
                trigger: d.trigger(),
            })
            .collect(),
    };
    serde_json::to_string(&out).expect("frames always serialize")
}

pub fn directive_to_json(t: f64, directive: &Directive) -> String {
    let mut value = serde_json::to_value(directive).expect("directives always serialize");
    value
        .as_object_mut()
        .expect("directives serialize as objects")
        .insert("t".into(), serde_json::json!(t));
    value.to_string()
}

/// One node as the frontend should draw it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSnapshot {
    pub id: NodeId,
    pub kind: NodeKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent: Option<NodeId>,
    /// World position.
    pub p: [f64; 3],
    /// World rotation `[x, y, z, w]`.
    pub q: [f64; 4],
    pub opacity: f64,
    /// Effective visibility: the node and all of its ancestors are visible.
    pub visible: bool,
    /// Button cap depth in meters.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<f64>,
    /// Slider handle offset from center in meters.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offset: Option<f64>,
    /// Slider bound value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    /// Charger id for markers and the scan view.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

/// The whole scene after a tick, ascending by node id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSnapshot {
    pub frame: u64,
    pub nodes: Vec<NodeSnapshot>,
}

impl SceneSnapshot {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("snapshots always serialize")
    }

    pub fn node(&self, id: NodeId) -> Option<&NodeSnapshot> {
        self.nodes.iter().find(|n| n.id == id)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_full_frame() {
        let line = r#"{"t":0.5,"head":{"p":[0,1.6,0],"q":[0,0,0,1]},
            "devices":[{"id":"r","kind":"ray","p":[0.1,1.2,-0.2],"q":[0,0,0,2],"trigger":0.9},
                       {"id":"h","kind":"hand","p":[0,1,0],"q":[0,0,0,1],"pinch":0.3}]}"#;
        let ScriptLine::Frame(f) = parse_line(&line.replace('\n', "")).unwrap() else {
            panic!("expected a frame");
        };
        assert_eq!(f.timestamp, 0.5);
        assert_eq!(f.head.position, Vec3::new(0.0, 1.6, 0.0));
        assert_eq!(f.devices.len(), 2);
        assert_eq!(f.devices[0].kind, DeviceKind::ControllerRay);
        assert_eq!(f.devices[0].pose.rotation, Quat::IDENTITY);
        assert_eq!(f.devices[0].activation(), 0.9);
        assert_eq!(f.devices[1].activation(), 0.3);
    }

    #[test]
    fn head_and_devices_are_optional() {
        let ScriptLine::Frame(f) = parse_line(r#"{"t":1}"#).unwrap() else { panic!() };
        assert_eq!(f.head, Pose::IDENTITY);
        assert!(f.devices.is_empty());
    }

    #[test]
    fn parses_directives() {
        assert_eq!(
            parse_line(r#"{"t":2,"directive":"set_context","tag":"scan"}"#).unwrap(),
            ScriptLine::Directive {
                t: 2.0,
                directive: Directive::SetContext { tag: "scan".into() }
            }
        );
        let line = parse_line(r#"{"t":3,"directive":"query","types":["rapid"],"available_only":true}"#).unwrap();
        assert_eq!(
            line,
            ScriptLine::Directive {
                t: 3.0,
                directive: Directive::Query {
                    types: [ChargerType::Rapid].into(),
                    available_only: true
                }
            }
        );
        assert!(parse_line(r#"{"t":3,"directive":"teleport"}"#).is_err());
        assert!(parse_line(r#"{"t":3,"directive":"load_layout","extra":1}"#).is_err());
    }

    #[test]
    fn rejects_malformed_frames() {
        for bad in [
            "",
            "[]",
            r#"{"devices":[]}"#,
            r#"{"t":0,"devices":[{"id":"r","kind":"wand","p":[0,0,0],"q":[0,0,0,1]}]}"#,
            r#"{"t":0,"devices":[{"id":"r","kind":"ray","p":[0,0],"q":[0,0,0,1]}]}"#,
            r#"{"t":0,"devices":[{"id":"r","kind":"ray","p":[0,0,0],"q":[0,0,0,0]}]}"#,
            r#"{"t":0,"devices":[{"id":"r","kind":"ray","p":[0,0,0],"q":[0,0,0,1],"trigger":1.5}]}"#,
            r#"{"t":0,"devices":[{"id":"","kind":"ray","p":[0,0,0],"q":[0,0,0,1]}]}"#,
        ] {
            assert!(parse_line(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn frames_and_directives_round_trip() {
        let frame = InputFrame {
            timestamp: 0.125,
            head: Pose::from_translation(Vec3::new(0.0, 1.6, 0.0)),
            devices: vec![
                DeviceSample::controller("r", Pose::from_rotation(Quat::from_yaw(0.3)), 0.25),
                DeviceSample::hand("h", Pose::IDENTITY, 0.75),
            ],
        };
        assert_eq!(parse_line(&frame_to_json(&frame)).unwrap(), ScriptLine::Frame(frame));
        let d = Directive::SaveLayout {
            names: Some(vec!["map".into()]),
        };
        assert_eq!(
            parse_line(&directive_to_json(4.5, &d)).unwrap(),
            ScriptLine::Directive { t: 4.5, directive: d }
        );
    }

    #[test]
    fn snapshot_record_shape() {
        let snap = SceneSnapshot {
            frame: 3,
            nodes: vec![NodeSnapshot {
                id: NodeId(1),
                kind: NodeKind::Button,
                name: None,
                parent: None,
                p: [0.0, 0.0, 0.0],
                q: [0.0, 0.0, 0.0, 1.0],
                opacity: 1.0,
                visible: true,
                depth: Some(0.0),
                offset: None,
                value: None,
                label: None,
            }],
        };
        assert_eq!(
            snap.to_json_line(),
            r#"{"frame":3,"nodes":[{"id":1,"kind":"button","p":[0.0,0.0,0.0],"q":[0.0,0.0,0.0,1.0],"opacity":1.0,"visible":true,"depth":0.0}]}"#
        );
    }
}
