//! Controller rays and tracked-hand pinches, folded into one event stream.
//!
//! Each device has a scalar activation: the trigger for controllers, the
//! pinch strength for hands. A device engages whatever it hovers once the
//! activation reaches the engage threshold and lets go only when it falls to
//! the lower release threshold.
//!
//! Hovering differs by modality. Controllers pick along their pointer ray.
//! Hands first look for a collider within the near-interaction radius of the
//! pinch point and otherwise fall back to a wrist-forward ray, so every
//! widget can be reached either way.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::event::{Event, EventKind};
use crate::layout::{begin_grab, GrabSession};
use crate::spatial::{NodeId, Pose, Ray, Scene, Vec3};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InputError {
    #[error("frame at t={got} is not after previous frame at t={previous}")]
    OutOfOrder { previous: f64, got: f64 },
    #[error("non-finite frame timestamp")]
    BadTimestamp,
    #[error("device {0} appears twice in one frame")]
    DuplicateDevice(DeviceId),
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DeviceId(pub String);

impl From<&str> for DeviceId {
    fn from(s: &str) -> Self {
        DeviceId(s.to_string())
    }
}

impl fmt::Display for DeviceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DeviceKind {
    #[serde(rename = "ray")]
    ControllerRay,
    #[serde(rename = "hand")]
    TrackedHand,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviceSample {
    pub id: DeviceId,
    pub kind: DeviceKind,
    /// Grip pose for controllers, wrist pose for hands.
    pub pose: Pose,
    pinch_strength: f64,
    trigger: f64,
}

fn unit_clamp(v: f64) -> f64 {
    if v.is_nan() {
        0.0
    } else {
        v.clamp(0.0, 1.0)
    }
}

impl DeviceSample {
    pub fn new(id: impl Into<DeviceId>, kind: DeviceKind, pose: Pose, pinch_strength: f64, trigger: f64) -> Self {
        Self {
            id: id.into(),
            kind,
            pose,
            pinch_strength: unit_clamp(pinch_strength),
            trigger: unit_clamp(trigger),
        }
    }

    pub fn controller(id: &str, pose: Pose, trigger: f64) -> Self {
        Self::new(id, DeviceKind::ControllerRay, pose, 0.0, trigger)
    }

    pub fn hand(id: &str, pose: Pose, pinch_strength: f64) -> Self {
        Self::new(id, DeviceKind::TrackedHand, pose, pinch_strength, 0.0)
    }

    pub fn pinch_strength(&self) -> f64 {
        self.pinch_strength
    }

    pub fn trigger(&self) -> f64 {
        self.trigger
    }

    /// Trigger for controllers, pinch strength for hands.
    pub fn activation(&self) -> f64 {
        match self.kind {
            DeviceKind::ControllerRay => self.trigger,
            DeviceKind::TrackedHand => self.pinch_strength,
        }
    }

    /// Ray from the device pose along its local `-z`, for either modality.
    pub fn forward_ray(&self) -> Ray {
        Ray::new(self.pose.position, self.pose.transform_vector(Vec3::FORWARD))
            .expect("a rotated unit vector is never zero")
    }

    /// Where near interaction is measured from.
    pub fn pinch_point(&self) -> Vec3 {
        self.pose.position
    }
}

impl From<String> for DeviceId {
    fn from(s: String) -> Self {
        DeviceId(s)
    }
}

/// Laser ray of a controller: from the grip origin along grip `-z`.
pub fn pointer_ray(device: &DeviceSample) -> Result<Ray, InputError> {
    match device.kind {
        DeviceKind::ControllerRay => Ok(device.forward_ray()),
        DeviceKind::TrackedHand => Err(InputError::InvalidArgument("pointer_ray needs a controller")),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InputFrame {
    pub timestamp: f64,
    pub head: Pose,
    pub devices: Vec<DeviceSample>,
}

impl InputFrame {
    pub fn new(timestamp: f64, devices: Vec<DeviceSample>) -> Self {
        Self {
            timestamp,
            head: Pose::IDENTITY,
            devices,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InputConfig {
    pub engage_threshold: f64,
    pub release_threshold: f64,
    /// Hand near-interaction radius in meters.
    pub near_radius: f64,
}

impl Default for InputConfig {
    fn default() -> Self {
        Self {
            engage_threshold: 0.8,
            release_threshold: 0.6,
            near_radius: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EngageKind {
    Select,
    Grab,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Engagement {
    pub node: NodeId,
    pub kind: EngageKind,
    pub grab: Option<GrabSession>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviceInteraction {
    pub hovered: Option<NodeId>,
    pub engaged: Option<Engagement>,
    /// Latest sample seen for the device.
    pub sample: DeviceSample,
}

impl DeviceInteraction {
    pub fn grab_offset(&self) -> Option<Pose> {
        self.engaged.as_ref()?.grab.as_ref().map(GrabSession::offset)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct InteractionState {
    devices: BTreeMap<DeviceId, DeviceInteraction>,
    last_timestamp: Option<f64>,
    finished_grabs: Vec<GrabSession>,
}

impl InteractionState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn device(&self, id: &DeviceId) -> Option<&DeviceInteraction> {
        self.devices.get(id)
    }

    pub fn devices(&self) -> impl Iterator<Item = (&DeviceId, &DeviceInteraction)> {
        self.devices.iter()
    }

    pub fn last_timestamp(&self) -> Option<f64> {
        self.last_timestamp
    }

    /// Active grab sessions with the grabber pose that should drive them.
    pub fn active_grabs_mut(&mut self) -> impl Iterator<Item = (Pose, &mut GrabSession)> {
        self.devices.values_mut().filter_map(|d| {
            let pose = d.sample.pose;
            d.engaged.as_mut()?.grab.as_mut().map(|g| (pose, g))
        })
    }

    /// Grab sessions released since the last call, in release order.
    pub fn take_finished_grabs(&mut self) -> Vec<GrabSession> {
        std::mem::take(&mut self.finished_grabs)
    }

    fn release(&mut self, id: &DeviceId, timestamp: f64, events: &mut Vec<Event>) {
        let Some(dev) = self.devices.get_mut(id) else { return };
        let Some(mut eng) = dev.engaged.take() else { return };
        let kind = match eng.kind {
            EngageKind::Select => EventKind::SelectEnd,
            EngageKind::Grab => EventKind::GrabEnded,
        };
        if let Some(mut grab) = eng.grab.take() {
            // Follow the release pose before handing the session back.
            let _ = grab.update(&dev.sample.pose);
            self.finished_grabs.push(grab);
        }
        events.push(Event::from_device(kind, eng.node, timestamp, id.clone()));
    }
}

fn hover_target(scene: &Scene, device: &DeviceSample, config: &InputConfig) -> Option<NodeId> {
    if device.kind == DeviceKind::TrackedHand {
        if let Some(hit) = scene.nearest_within(device.pinch_point(), config.near_radius) {
            return Some(hit.node);
        }
    }
    scene.pick(&device.forward_ray()).map(|h| h.node)
}

/// Folds one frame into the interaction state and reports what changed.
///
/// Per device, in device-id order: releases first, then hover changes,
/// then new engagements. Devices missing from the frame are released and
/// unhovered.
pub fn process_frame(
    frame: &InputFrame,
    scene: &Scene,
    state: &mut InteractionState,
    config: &InputConfig,
) -> Result<Vec<Event>, InputError> {
    let t = frame.timestamp;
    if !t.is_finite() {
        return Err(InputError::BadTimestamp);
    }
    if let Some(prev) = state.last_timestamp {
        if t <= prev {
            return Err(InputError::OutOfOrder { previous: prev, got: t });
        }
    }
    let mut seen = BTreeSet::new();
    for d in &frame.devices {
        if !seen.insert(d.id.clone()) {
            return Err(InputError::DuplicateDevice(d.id.clone()));
        }
    }
    state.last_timestamp = Some(t);

    let mut events = Vec::new();

    let gone: Vec<DeviceId> = state.devices.keys().filter(|id| !seen.contains(*id)).cloned().collect();
    let mut samples: Vec<&DeviceSample> = frame.devices.iter().collect();
    samples.sort_by(|a, b| a.id.cmp(&b.id));

    let mut order: Vec<(DeviceId, Option<&DeviceSample>)> = samples.into_iter().map(|s| (s.id.clone(), Some(s))).collect();
    order.extend(gone.into_iter().map(|id| (id, None)));
    order.sort_by(|a, b| a.0.cmp(&b.0));

    for (id, sample) in order {
        let Some(sample) = sample else {
            state.release(&id, t, &mut events);
            if let Some(prev) = state.devices.remove(&id).and_then(|d| d.hovered) {
                events.push(Event::from_device(EventKind::HoverExited, prev, t, id.clone()));
            }
            continue;
        };

        let entry = state.devices.entry(id.clone()).or_insert_with(|| DeviceInteraction {
            hovered: None,
            engaged: None,
            sample: sample.clone(),
        });
        entry.sample = sample.clone();
        let previous_hover = entry.hovered;
        let engaged = entry.engaged.is_some();

        let activation = sample.activation();
        if engaged && activation <= config.release_threshold {
            state.release(&id, t, &mut events);
        }

        let hover = hover_target(scene, sample, config);
        let entry = state.devices.get_mut(&id).expect("inserted above");
        if hover != previous_hover {
            if let Some(prev) = previous_hover {
                events.push(Event::from_device(EventKind::HoverExited, prev, t, id.clone()));
            }
            if let Some(next) = hover {
                events.push(Event::from_device(EventKind::HoverEntered, next, t, id.clone()));
            }
            entry.hovered = hover;
        }

        if entry.engaged.is_none() && activation >= config.engage_threshold {
            if let Some(node) = hover {
                let grab = scene
                    .node(node)
                    .ok()
                    .filter(|n| n.grabbable)
                    .and_then(|_| begin_grab(scene, node, &sample.pose).ok());
                let (kind, ev) = match grab {
                    Some(_) => (EngageKind::Grab, EventKind::GrabStarted),
                    None => (EngageKind::Select, EventKind::SelectStart),
                };
                entry.engaged = Some(Engagement { node, kind, grab });
                events.push(Event::from_device(ev, node, t, id.clone()));
            }
        }
    }
    Ok(events)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spatial::{NodeKind, Obb, Quat, SceneNode};
    use std::f64::consts::FRAC_PI_2;

    fn kinds(events: &[Event]) -> Vec<EventKind> {
        events.iter().map(|e| e.kind).collect()
    }

    fn one_button_scene(grabbable: bool) -> (Scene, NodeId) {
        let mut scene = Scene::new();
        let id = scene
            .insert(
                SceneNode::new(NodeKind::Button)
                    .with_local(Pose::from_translation(Vec3::new(0.0, 0.0, -1.0)))
                    .with_collider(Obb::axis_aligned(Vec3::ZERO, Vec3::new(0.05, 0.05, 0.01)).unwrap())
                    .grabbable(grabbable),
            )
            .unwrap();
        (scene, id)
    }

    #[test]
    fn identity_grip_points_forward() {
        let ray = pointer_ray(&DeviceSample::controller("r", Pose::IDENTITY, 0.0)).unwrap();
        assert_eq!(ray.origin(), Vec3::ZERO);
        assert_eq!(ray.direction(), Vec3::FORWARD);
    }

    #[test]
    fn yawed_grip_points_left() {
        let pose = Pose::from_rotation(Quat::from_yaw(FRAC_PI_2));
        let d = pointer_ray(&DeviceSample::controller("r", pose, 0.0)).unwrap().direction();
        assert!((d - Vec3::new(-1.0, 0.0, 0.0)).length() < 1e-12);
    }

    #[test]
    fn pointer_ray_rejects_hands() {
        assert!(pointer_ray(&DeviceSample::hand("h", Pose::IDENTITY, 0.0)).is_err());
    }

    #[test]
    fn empty_frame_is_quiet() {
        let (scene, _) = one_button_scene(false);
        let mut state = InteractionState::new();
        let ev = process_frame(&InputFrame::new(0.0, vec![]), &scene, &mut state, &InputConfig::default()).unwrap();
        assert!(ev.is_empty());
        assert_eq!(state.devices().count(), 0);
    }

    #[test]
    fn trigger_ramp_hovers_then_selects_once() {
        let (scene, id) = one_button_scene(false);
        let mut state = InteractionState::new();
        let cfg = InputConfig::default();
        let mut log = Vec::new();
        for (i, trig) in [0.0, 0.5, 1.0].into_iter().enumerate() {
            let frame = InputFrame::new(i as f64, vec![DeviceSample::controller("r", Pose::IDENTITY, trig)]);
            log.push(kinds(&process_frame(&frame, &scene, &mut state, &cfg).unwrap()));
        }
        assert_eq!(log, vec![vec![EventKind::HoverEntered], vec![], vec![EventKind::SelectStart]]);
        let eng = state.device(&"r".into()).unwrap().engaged.as_ref().unwrap();
        assert_eq!((eng.node, eng.kind), (id, EngageKind::Select));
    }

    #[test]
    fn pinch_hysteresis_keeps_engagement() {
        let (scene, _) = one_button_scene(false);
        let mut state = InteractionState::new();
        let cfg = InputConfig::default();
        // Hand within 5 cm of the button face.
        let pose = Pose::from_translation(Vec3::new(0.0, 0.0, -0.97));
        let mut run = |t: f64, pinch: f64| {
            let frame = InputFrame::new(t, vec![DeviceSample::hand("h", pose, pinch)]);
            kinds(&process_frame(&frame, &scene, &mut state, &cfg).unwrap())
        };
        assert_eq!(run(0.0, 0.85), vec![EventKind::HoverEntered, EventKind::SelectStart]);
        assert_eq!(run(0.1, 0.65), vec![]);
        assert_eq!(run(0.2, 0.6), vec![EventKind::SelectEnd]);
    }

    #[test]
    fn grabbable_nodes_are_grabbed() {
        let (scene, id) = one_button_scene(true);
        let mut state = InteractionState::new();
        let cfg = InputConfig::default();
        let f = InputFrame::new(0.0, vec![DeviceSample::controller("r", Pose::IDENTITY, 1.0)]);
        assert_eq!(
            kinds(&process_frame(&f, &scene, &mut state, &cfg).unwrap()),
            vec![EventKind::HoverEntered, EventKind::GrabStarted]
        );
        assert_eq!(state.active_grabs_mut().count(), 1);
        let f = InputFrame::new(0.1, vec![DeviceSample::controller("r", Pose::IDENTITY, 0.0)]);
        assert_eq!(kinds(&process_frame(&f, &scene, &mut state, &cfg).unwrap()), vec![EventKind::GrabEnded]);
        let done = state.take_finished_grabs();
        assert_eq!(done.len(), 1);
        assert_eq!(done[0].grabbed(), id);
    }

    #[test]
    fn lost_device_releases_and_unhovers() {
        let (scene, _) = one_button_scene(false);
        let mut state = InteractionState::new();
        let cfg = InputConfig::default();
        let f = InputFrame::new(0.0, vec![DeviceSample::controller("r", Pose::IDENTITY, 1.0)]);
        process_frame(&f, &scene, &mut state, &cfg).unwrap();
        let ev = process_frame(&InputFrame::new(0.1, vec![]), &scene, &mut state, &cfg).unwrap();
        assert_eq!(kinds(&ev), vec![EventKind::SelectEnd, EventKind::HoverExited]);
    }

    #[test]
    fn no_engagement_without_hover() {
        let (scene, _) = one_button_scene(false);
        let mut state = InteractionState::new();
        let away = Pose::from_rotation(Quat::from_yaw(FRAC_PI_2));
        let f = InputFrame::new(0.0, vec![DeviceSample::controller("r", away, 1.0)]);
        assert!(process_frame(&f, &scene, &mut state, &InputConfig::default()).unwrap().is_empty());
    }

    #[test]
    fn hidden_nodes_are_not_hovered() {
        let (mut scene, id) = one_button_scene(false);
        scene.node_mut(id).unwrap().visible = false;
        let mut state = InteractionState::new();
        let f = InputFrame::new(0.0, vec![DeviceSample::controller("r", Pose::IDENTITY, 0.0)]);
        assert!(process_frame(&f, &scene, &mut state, &InputConfig::default()).unwrap().is_empty());
    }

    #[test]
    fn rejects_stale_frames_and_duplicate_devices() {
        let (scene, _) = one_button_scene(false);
        let mut state = InteractionState::new();
        let cfg = InputConfig::default();
        process_frame(&InputFrame::new(1.0, vec![]), &scene, &mut state, &cfg).unwrap();
        assert!(matches!(
            process_frame(&InputFrame::new(1.0, vec![]), &scene, &mut state, &cfg),
            Err(InputError::OutOfOrder { .. })
        ));
        let dup = vec![
            DeviceSample::controller("r", Pose::IDENTITY, 0.0),
            DeviceSample::controller("r", Pose::IDENTITY, 0.0),
        ];
        assert!(matches!(
            process_frame(&InputFrame::new(2.0, dup), &scene, &mut state, &cfg),
            Err(InputError::DuplicateDevice(_))
        ));
    }

    #[test]
    fn samples_clamp_activation() {
        let s = DeviceSample::new("x", DeviceKind::TrackedHand, Pose::IDENTITY, 1.5, f64::NAN);
        assert_eq!(s.pinch_strength(), 1.0);
        assert_eq!(s.trigger(), 0.0);
    }
}
