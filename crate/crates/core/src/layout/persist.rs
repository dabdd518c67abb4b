//! Per-user layout files.
//!
//! ```text
//! {"version":1,"saved_at":"<ISO-8601>","entries":{"<name>":{"p":[x,y,z],"q":[x,y,z,w]}}}
//! ```
//!
//! Numbers are written in shortest round-trip form, so a load restores
//! every pose bit for bit.

use std::collections::BTreeMap;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

use super::LayoutError;
use crate::spatial::{Pose, Quat, Scene, Vec3};

pub const LAYOUT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub(crate) struct PoseRecord {
    pub(crate) p: [f64; 3],
    pub(crate) q: [f64; 4],
}

impl From<Pose> for PoseRecord {
    fn from(pose: Pose) -> Self {
        Self {
            p: pose.position.to_array(),
            q: pose.rotation.to_array(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct LayoutFile {
    version: u32,
    saved_at: String,
    entries: BTreeMap<String, PoseRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayoutDocument {
    pub version: u32,
    pub saved_at: String,
    pub entries: BTreeMap<String, Pose>,
}

impl LayoutDocument {
    pub fn to_json(&self) -> String {
        let file = LayoutFile {
            version: self.version,
            saved_at: self.saved_at.clone(),
            entries: self.entries.iter().map(|(k, v)| (k.clone(), (*v).into())).collect(),
        };
        serde_json::to_string(&file).expect("layout always serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, LayoutError> {
        let file: LayoutFile = serde_json::from_str(text).map_err(|e| LayoutError::Format(e.to_string()))?;
        if file.version != LAYOUT_VERSION {
            return Err(LayoutError::UnsupportedVersion(file.version));
        }
        DateTime::parse_from_rfc3339(&file.saved_at)
            .map_err(|e| LayoutError::Format(format!("saved_at: {e}")))?;
        let mut entries = BTreeMap::new();
        for (name, rec) in file.entries {
            if name.is_empty() {
                return Err(LayoutError::Format("empty component name".into()));
            }
            let pose = Pose::new(Vec3::from_array(rec.p), Quat::from_array(rec.q));
            let norm = pose.rotation.norm();
            if !pose.is_finite() || (norm - 1.0).abs() > 1e-6 {
                return Err(LayoutError::Format(format!("invalid pose for {name:?}")));
            }
            entries.insert(name, pose);
        }
        Ok(Self {
            version: file.version,
            saved_at: file.saved_at,
            entries,
        })
    }
}

pub fn format_timestamp(at: DateTime<Utc>) -> String {
    at.to_rfc3339_opts(SecondsFormat::Millis, true)
}

/// Captures the world pose of each named component.
pub fn save_layout<S: AsRef<str>>(
    scene: &Scene,
    names: &[S],
    saved_at: DateTime<Utc>,
) -> Result<LayoutDocument, LayoutError> {
    let mut entries = BTreeMap::new();
    for name in names {
        let name = name.as_ref();
        let id = scene
            .lookup(name)
            .ok_or_else(|| LayoutError::UnknownComponent(name.to_string()))?;
        entries.insert(name.to_string(), scene.world_pose(id)?);
    }
    Ok(LayoutDocument {
        version: LAYOUT_VERSION,
        saved_at: format_timestamp(saved_at),
        entries,
    })
}

/// Restores world poses from `doc`. Components missing from the scene are
/// skipped; one warning is returned per skipped entry.
pub fn load_layout(scene: &mut Scene, doc: &LayoutDocument) -> Result<Vec<String>, LayoutError> {
    if doc.version != LAYOUT_VERSION {
        return Err(LayoutError::UnsupportedVersion(doc.version));
    }
    let mut warnings = Vec::new();
    for (name, pose) in &doc.entries {
        match scene.lookup(name) {
            Some(id) => scene.set_world_pose(id, *pose)?,
            None => warnings.push(format!("layout names unknown component {name:?}; skipped")),
        }
    }
    Ok(warnings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spatial::{NodeKind, SceneNode};
    use chrono::TimeZone;
    use proptest::prelude::*;

    fn when() -> DateTime<Utc> {
        Utc.with_ymd_and_hms(2024, 3, 1, 12, 0, 0).unwrap()
    }

    fn scene_with(names: &[&str]) -> Scene {
        let mut s = Scene::new();
        for (i, name) in names.iter().enumerate() {
            let pose = Pose::new(
                Vec3::new(0.1 * i as f64, 1.3, -0.7 - i as f64 / 3.0),
                Quat::from_yaw(0.2 + i as f64),
            );
            s.insert(SceneNode::new(NodeKind::Panel).with_name(*name).with_local(pose))
                .unwrap();
        }
        s
    }

    #[test]
    fn round_trip_on_unchanged_scene() {
        let mut s = scene_with(&["a", "b"]);
        let before = s.clone();
        let doc = save_layout(&s, &["a", "b"], when()).unwrap();
        let back = LayoutDocument::from_json(&doc.to_json()).unwrap();
        assert_eq!(back, doc);
        assert!(load_layout(&mut s, &back).unwrap().is_empty());
        assert_eq!(s, before);
    }

    #[test]
    fn wire_shape() {
        let s = scene_with(&["a"]);
        let json = save_layout(&s, &["a"], when()).unwrap().to_json();
        assert!(json.starts_with(r#"{"version":1,"saved_at":"2024-03-01T12:00:00.000Z","entries":{"a":{"p":[0.0,1.3,"#));
    }

    #[test]
    fn missing_component_warns_and_restores_the_rest() {
        let mut s = scene_with(&["a", "b"]);
        let mut doc = save_layout(&s, &["a", "b"], when()).unwrap();
        doc.entries.insert("gone".into(), Pose::IDENTITY);
        doc.entries.insert("a".into(), Pose::from_translation(Vec3::new(9.0, 9.0, 9.0)));
        let warnings = load_layout(&mut s, &doc).unwrap();
        assert_eq!(warnings.len(), 1);
        assert_eq!(s.world_pose(s.lookup("a").unwrap()).unwrap().position, Vec3::new(9.0, 9.0, 9.0));
    }

    #[test]
    fn rejects_unknown_version_and_bad_names() {
        let text = r#"{"version":2,"saved_at":"2024-03-01T12:00:00.000Z","entries":{}}"#;
        assert_eq!(LayoutDocument::from_json(text), Err(LayoutError::UnsupportedVersion(2)));
        let s = scene_with(&["a"]);
        assert!(matches!(save_layout(&s, &["zzz"], when()), Err(LayoutError::UnknownComponent(_))));
        let bad_q = r#"{"version":1,"saved_at":"2024-03-01T12:00:00.000Z","entries":{"a":{"p":[0,0,0],"q":[0,0,0,2]}}}"#;
        assert!(matches!(LayoutDocument::from_json(bad_q), Err(LayoutError::Format(_))));
    }

    proptest! {
        #[test]
        fn save_load_save_is_a_fixpoint(
            poses in proptest::collection::vec(
                ((-5.0f64..5.0, -5.0f64..5.0, -5.0f64..5.0), (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0, 0.05f64..1.0)),
                1..8,
            )
        ) {
            let names: Vec<String> = (0..poses.len()).map(|i| format!("c{i}")).collect();
            let mut scene = Scene::new();
            for (name, ((x, y, z), (qx, qy, qz, qw))) in names.iter().zip(&poses) {
                let q = Quat::new(*qx, *qy, *qz, *qw).normalized();
                scene.insert(SceneNode::new(NodeKind::Panel).with_name(name.as_str())
                    .with_local(Pose::new(Vec3::new(*x, *y, *z), q))).unwrap();
            }
            let first = save_layout(&scene, &names, when()).unwrap().to_json();
            let mut other = scene.clone();
            for id in other.ids().collect::<Vec<_>>() {
                other.node_mut(id).unwrap().local = Pose::IDENTITY;
            }
            load_layout(&mut other, &LayoutDocument::from_json(&first).unwrap()).unwrap();
            let second = save_layout(&other, &names, when()).unwrap().to_json();
            prop_assert_eq!(first, second);
        }
    }
}
