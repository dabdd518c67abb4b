use serde::{Deserialize, Serialize};

use super::LayoutError;
use crate::spatial::{NodeId, Pose, Quat, Scene, Vec3};

/// Optional snapping applied when a grab ends. Off by default.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SnapPolicy {
    pub enabled: bool,
    /// Position grid in meters.
    pub cell: f64,
    pub yaw_snap: bool,
    pub yaw_step_degrees: f64,
}

impl Default for SnapPolicy {
    fn default() -> Self {
        Self {
            enabled: false,
            cell: 0.05,
            yaw_snap: false,
            yaw_step_degrees: 15.0,
        }
    }
}

impl SnapPolicy {
    pub fn off() -> Self {
        Self::default()
    }

    pub fn grid(cell: f64) -> Self {
        Self {
            enabled: true,
            cell,
            ..Self::default()
        }
    }

    pub fn with_yaw(mut self, step_degrees: f64) -> Self {
        self.yaw_snap = true;
        self.yaw_step_degrees = step_degrees;
        self
    }

    /// Rounds the position to the grid and, with yaw snapping, the twist
    /// about `+y` to the nearest step. Pitch and roll are kept.
    pub fn apply(&self, pose: Pose) -> Pose {
        let mut out = pose;
        if self.enabled && self.cell > 0.0 {
            let snap = |v: f64| (v / self.cell).round() * self.cell;
            out.position = Vec3::new(snap(pose.position.x), snap(pose.position.y), snap(pose.position.z));
        }
        if self.yaw_snap && self.yaw_step_degrees > 0.0 {
            let (swing, twist) = pose.rotation.swing_twist_y();
            let step = self.yaw_step_degrees.to_radians();
            let yaw = (twist.yaw() / step).round() * step;
            out.rotation = (swing * Quat::from_yaw(yaw)).normalized();
        }
        out
    }
}

/// A node being carried by a grabber (hand or controller).
///
/// The grabbed node is usually a handle; the pose that moves is the root of
/// its hierarchy, so the whole panel follows the handle.
#[derive(Debug, Clone, PartialEq)]
pub struct GrabSession {
    grabbed: NodeId,
    target: NodeId,
    offset: Pose,
    current: Pose,
    active: bool,
}

impl GrabSession {
    pub fn grabbed(&self) -> NodeId {
        self.grabbed
    }

    /// The node whose pose follows the grabber.
    pub fn target(&self) -> NodeId {
        self.target
    }

    /// Target pose in the grabber's frame, fixed at grab start.
    pub fn offset(&self) -> Pose {
        self.offset
    }

    /// Most recent world pose computed for the target.
    pub fn current(&self) -> Pose {
        self.current
    }

    pub fn is_active(&self) -> bool {
        self.active
    }

    /// World pose for the target given the grabber's new pose.
    pub fn update(&mut self, grabber: &Pose) -> Result<Pose, LayoutError> {
        if !self.active {
            return Err(LayoutError::InvalidState("grab session already ended"));
        }
        self.current = grabber.compose(&self.offset);
        Ok(self.current)
    }

    /// Closes the session and returns the target's final (optionally
    /// snapped) world pose.
    pub fn end(&mut self, snap: &SnapPolicy) -> Result<Pose, LayoutError> {
        if !self.active {
            return Err(LayoutError::InvalidState("grab session already ended"));
        }
        self.active = false;
        self.current = snap.apply(self.current);
        Ok(self.current)
    }
}

/// Starts carrying the hierarchy that `node` belongs to.
pub fn begin_grab(scene: &Scene, node: NodeId, grabber: &Pose) -> Result<GrabSession, LayoutError> {
    let n = scene.node(node)?;
    if !scene.is_visible(node) {
        return Err(LayoutError::NotFound(node));
    }
    if !n.grabbable {
        return Err(LayoutError::NotGrabbable(node));
    }
    let target = scene.root_of(node)?;
    let world = scene.world_pose(target)?;
    Ok(GrabSession {
        grabbed: node,
        target,
        offset: grabber.inverse().compose(&world),
        current: world,
        active: true,
    })
}

pub fn update_grab(session: &mut GrabSession, grabber: &Pose) -> Result<Pose, LayoutError> {
    session.update(grabber)
}

pub fn end_grab(session: &mut GrabSession, snap: &SnapPolicy) -> Result<Pose, LayoutError> {
    session.end(snap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spatial::{NodeKind, SceneNode};
    use std::f64::consts::FRAC_PI_2;

    fn scene_with_handle(at: Pose) -> (Scene, NodeId, NodeId) {
        let mut scene = Scene::new();
        let panel = scene.insert(SceneNode::new(NodeKind::Panel).with_local(at)).unwrap();
        let handle = scene
            .insert(
                SceneNode::new(NodeKind::Handle)
                    .with_parent(panel)
                    .with_local(Pose::from_translation(Vec3::new(0.0, 0.2, 0.0)))
                    .grabbable(true),
            )
            .unwrap();
        (scene, panel, handle)
    }

    fn close(a: Vec3, b: Vec3) -> bool {
        (a - b).length() < 1e-12
    }

    #[test]
    fn identity_grab_has_identity_offset() {
        let mut scene = Scene::new();
        let n = scene.insert(SceneNode::new(NodeKind::Handle).grabbable(true)).unwrap();
        let s = begin_grab(&scene, n, &Pose::IDENTITY).unwrap();
        assert_eq!(s.offset(), Pose::IDENTITY);
        assert_eq!(s.target(), n);
    }

    #[test]
    fn offset_is_in_grabber_frame() {
        let mut scene = Scene::new();
        let n = scene.insert(SceneNode::new(NodeKind::Handle).grabbable(true)).unwrap();
        let s = begin_grab(&scene, n, &Pose::from_translation(Vec3::Z)).unwrap();
        assert_eq!(s.offset().position, Vec3::new(0.0, 0.0, -1.0));
    }

    #[test]
    fn handle_moves_panel_root() {
        let (scene, panel, handle) = scene_with_handle(Pose::from_translation(Vec3::new(0.0, 1.0, -1.0)));
        let mut s = begin_grab(&scene, handle, &Pose::IDENTITY).unwrap();
        assert_eq!(s.target(), panel);
        let moved = s.update(&Pose::from_translation(Vec3::new(0.3, 0.0, 0.0))).unwrap();
        assert!(close(moved.position, Vec3::new(0.3, 1.0, -1.0)));
        assert!(close(s.update(&Pose::IDENTITY).unwrap().position, Vec3::new(0.0, 1.0, -1.0)));
    }

    #[test]
    fn rotating_grabber_orbits_target() {
        let mut scene = Scene::new();
        let n = scene
            .insert(
                SceneNode::new(NodeKind::Handle)
                    .with_local(Pose::from_translation(Vec3::new(0.0, 0.0, -1.0)))
                    .grabbable(true),
            )
            .unwrap();
        let mut s = begin_grab(&scene, n, &Pose::IDENTITY).unwrap();
        let p = s.update(&Pose::from_rotation(Quat::from_yaw(FRAC_PI_2))).unwrap();
        // -z rotated +90° about +y lands on -x.
        assert!(close(p.position, Vec3::new(-1.0, 0.0, 0.0)), "{p:?}");
    }

    #[test]
    fn refuses_non_grabbable_and_hidden() {
        let (mut scene, panel, handle) = scene_with_handle(Pose::IDENTITY);
        assert!(matches!(begin_grab(&scene, panel, &Pose::IDENTITY), Err(LayoutError::NotGrabbable(_))));
        scene.node_mut(panel).unwrap().visible = false;
        assert!(matches!(begin_grab(&scene, handle, &Pose::IDENTITY), Err(LayoutError::NotFound(_))));
    }

    #[test]
    fn ended_session_is_stale() {
        let (scene, _, handle) = scene_with_handle(Pose::IDENTITY);
        let mut s = begin_grab(&scene, handle, &Pose::IDENTITY).unwrap();
        s.end(&SnapPolicy::off()).unwrap();
        assert!(matches!(s.update(&Pose::IDENTITY), Err(LayoutError::InvalidState(_))));
    }

    #[test]
    fn snapping_rounds_position_and_yaw() {
        let p = Pose::new(Vec3::new(0.12, 0.99, -0.26), Quat::from_yaw(37f64.to_radians()));
        assert_eq!(SnapPolicy::off().apply(p), p);
        let snapped = SnapPolicy::grid(0.05).with_yaw(15.0).apply(p);
        assert!(close(snapped.position, Vec3::new(0.10, 1.00, -0.25)), "{snapped:?}");
        assert!((snapped.rotation.yaw().to_degrees() - 30.0).abs() < 1e-9);
    }
}
