//! Transform hierarchy and ray picking.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::math::{Pose, Ray, Vec3};
use super::obb::Obb;
use super::SpatialError;

/// Distances closer than this are treated as ties and resolved by node id.
pub const PICK_TIE_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Panel,
    Button,
    Slider,
    Marker,
    PointCloud,
    MapPlane,
    Handle,
    /// Reserved for media panels; carries no playback behavior.
    Video,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneNode {
    id: NodeId,
    parent: Option<NodeId>,
    name: Option<String>,
    opacity: f64,
    pub kind: NodeKind,
    pub local: Pose,
    /// Collider in the node's local frame.
    pub collider: Option<Obb>,
    pub grabbable: bool,
    /// Context tags under which the node is shown. Empty means the node is
    /// not governed by contextual visibility.
    pub context_tags: BTreeSet<String>,
    pub visible: bool,
}

impl SceneNode {
    pub fn new(kind: NodeKind) -> Self {
        Self {
            id: NodeId(0),
            parent: None,
            name: None,
            opacity: 1.0,
            kind,
            local: Pose::IDENTITY,
            collider: None,
            grabbable: false,
            context_tags: BTreeSet::new(),
            visible: true,
        }
    }

    pub fn with_parent(mut self, parent: NodeId) -> Self {
        self.parent = Some(parent);
        self
    }

    pub fn with_local(mut self, local: Pose) -> Self {
        self.local = local;
        self
    }

    pub fn with_collider(mut self, collider: Obb) -> Self {
        self.collider = Some(collider);
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn grabbable(mut self, grabbable: bool) -> Self {
        self.grabbable = grabbable;
        self
    }

    pub fn with_opacity(mut self, opacity: f64) -> Self {
        self.set_opacity(opacity);
        self
    }

    pub fn id(&self) -> NodeId {
        self.id
    }

    pub fn parent(&self) -> Option<NodeId> {
        self.parent
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn opacity(&self) -> f64 {
        self.opacity
    }

    /// Clamps into `[0, 1]`; NaN becomes fully opaque.
    pub fn set_opacity(&mut self, value: f64) {
        self.opacity = if value.is_nan() { 1.0 } else { value.clamp(0.0, 1.0) };
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PickHit {
    pub node: NodeId,
    pub distance: f64,
}

/// A forest of [`SceneNode`]s keyed by id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Scene {
    nodes: BTreeMap<NodeId, SceneNode>,
    names: BTreeMap<String, NodeId>,
    next_id: u32,
}

impl Scene {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Inserts a node and assigns it the next free id. The parent, if any,
    /// must already exist, which keeps the hierarchy acyclic.
    pub fn insert(&mut self, mut node: SceneNode) -> Result<NodeId, SpatialError> {
        if let Some(parent) = node.parent {
            if !self.nodes.contains_key(&parent) {
                return Err(SpatialError::NotFound(parent));
            }
        }
        if !node.local.is_finite() {
            return Err(SpatialError::NonFinite("node pose"));
        }
        if let Some(name) = &node.name {
            if name.is_empty() {
                return Err(SpatialError::EmptyName);
            }
            if self.names.contains_key(name) {
                return Err(SpatialError::DuplicateName(name.clone()));
            }
        }
        self.next_id += 1;
        let id = NodeId(self.next_id);
        node.id = id;
        if let Some(name) = &node.name {
            self.names.insert(name.clone(), id);
        }
        self.nodes.insert(id, node);
        Ok(id)
    }

    pub fn get(&self, id: NodeId) -> Option<&SceneNode> {
        self.nodes.get(&id)
    }

    pub fn node(&self, id: NodeId) -> Result<&SceneNode, SpatialError> {
        self.nodes.get(&id).ok_or(SpatialError::NotFound(id))
    }

    pub fn node_mut(&mut self, id: NodeId) -> Result<&mut SceneNode, SpatialError> {
        self.nodes.get_mut(&id).ok_or(SpatialError::NotFound(id))
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.nodes.contains_key(&id)
    }

    /// Nodes in ascending id order.
    pub fn iter(&self) -> impl Iterator<Item = &SceneNode> {
        self.nodes.values()
    }

    pub fn ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.keys().copied()
    }

    pub fn lookup(&self, name: &str) -> Option<NodeId> {
        self.names.get(name).copied()
    }

    pub fn names(&self) -> impl Iterator<Item = (&str, NodeId)> {
        self.names.iter().map(|(n, id)| (n.as_str(), *id))
    }

    /// Re-parents `id`, refusing links that would close a cycle.
    pub fn set_parent(&mut self, id: NodeId, parent: Option<NodeId>) -> Result<(), SpatialError> {
        self.node(id)?;
        if let Some(p) = parent {
            self.node(p)?;
            if self.ancestors_or_self(p).any(|a| a == id) {
                return Err(SpatialError::Cycle { node: id, parent: p });
            }
        }
        self.node_mut(id)?.parent = parent;
        Ok(())
    }

    /// `id`, its parent, grandparent, ... up to the root.
    pub fn ancestors_or_self(&self, id: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        std::iter::successors(self.nodes.get(&id).map(|n| n.id), move |cur| {
            self.nodes.get(cur).and_then(|n| n.parent)
        })
    }

    pub fn root_of(&self, id: NodeId) -> Result<NodeId, SpatialError> {
        self.node(id)?;
        Ok(self.ancestors_or_self(id).last().unwrap_or(id))
    }

    /// Composition of local poses from the root down to `id`.
    pub fn world_pose(&self, id: NodeId) -> Result<Pose, SpatialError> {
        self.node(id)?;
        let chain: Vec<NodeId> = self.ancestors_or_self(id).collect();
        let mut iter = chain.iter().rev();
        let root = iter.next().copied().unwrap_or(id);
        let mut acc = self.nodes[&root].local;
        for nid in iter {
            acc = acc.compose(&self.nodes[nid].local);
        }
        Ok(acc)
    }

    /// Sets the local pose of `id` so that its world pose becomes `world`.
    /// Root nodes take `world` verbatim.
    pub fn set_world_pose(&mut self, id: NodeId, world: Pose) -> Result<(), SpatialError> {
        if !world.is_finite() {
            return Err(SpatialError::NonFinite("world pose"));
        }
        let local = match self.node(id)?.parent {
            None => world,
            Some(parent) => self.world_pose(parent)?.inverse().compose(&world),
        };
        self.node_mut(id)?.local = local;
        Ok(())
    }

    /// True when the node and all of its ancestors are visible.
    pub fn is_visible(&self, id: NodeId) -> bool {
        self.contains(id)
            && self
                .ancestors_or_self(id)
                .all(|a| self.nodes.get(&a).is_some_and(|n| n.visible))
    }

    /// The node's collider in world coordinates.
    pub fn world_collider(&self, id: NodeId) -> Option<Obb> {
        let collider = self.nodes.get(&id)?.collider?;
        Some(collider.transformed(&self.world_pose(id).ok()?))
    }

    /// Nearest visible collider-bearing node along `ray`.
    pub fn pick(&self, ray: &Ray) -> Option<PickHit> {
        self.pick_filtered(ray, |_| true)
    }

    /// Like [`Scene::pick`], restricted to nodes accepted by `filter`.
    pub fn pick_filtered(&self, ray: &Ray, filter: impl Fn(&SceneNode) -> bool) -> Option<PickHit> {
        self.nearest_by(&filter, |obb| obb.ray_intersect(ray))
    }

    /// Nearest visible collider within `radius` of `point`.
    pub fn nearest_within(&self, point: Vec3, radius: f64) -> Option<PickHit> {
        self.nearest_by(&|_| true, |obb| {
            let d = obb.distance_to_point(point);
            (d <= radius).then_some(d)
        })
    }

    fn nearest_by(
        &self,
        filter: &dyn Fn(&SceneNode) -> bool,
        measure: impl Fn(&Obb) -> Option<f64>,
    ) -> Option<PickHit> {
        let mut best: Option<PickHit> = None;
        // Ascending id order: a later node only wins if strictly nearer.
        for node in self.nodes.values() {
            if node.collider.is_none() || !filter(node) || !self.is_visible(node.id) {
                continue;
            }
            let Some(obb) = self.world_collider(node.id) else {
                continue;
            };
            let Some(d) = measure(&obb) else { continue };
            if best.is_none_or(|b| d < b.distance - PICK_TIE_EPSILON) {
                best = Some(PickHit {
                    node: node.id,
                    distance: d,
                });
            }
        }
        best
    }
}

/// Free-function form of [`Scene::world_pose`].
pub fn world_pose(scene: &Scene, id: NodeId) -> Result<Pose, SpatialError> {
    scene.world_pose(id)
}

/// Free-function form of [`Scene::pick`].
pub fn pick(scene: &Scene, ray: &Ray) -> Option<PickHit> {
    scene.pick(ray)
}
