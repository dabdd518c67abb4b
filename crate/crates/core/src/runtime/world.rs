use std::collections::BTreeMap;

use chrono::{DateTime, Utc};

use super::config::Config;
use super::protocol::{NodeSnapshot, SceneSnapshot};
use super::RuntimeError;
use crate::event::{Event, EventKind};
use crate::geo::{mercator_project, ChargerQuery, ChargerRecord, ChargerType, MapPlaneSpec, PointCloud};
use crate::input::{process_frame, DeviceKind, DeviceSample, EngageKind, InputFrame, InteractionState};
use crate::layout::{load_layout, save_layout, set_context, ContextOutcome, ContextRules, LayoutDocument, DEFAULT_CONTEXT};
use crate::spatial::{NodeId, NodeKind, Obb, Pose, Scene, SceneNode, Vec3};
use crate::widgets::{Button3D, Panel, Slider3D};

/// Physics substeps per second.
pub const PHYSICS_RATE: f64 = 90.0;

/// Half size of a marker's pick box, meters.
const MARKER_HALF_SIZE: f64 = 0.01;

/// What a button does to the charger query when it is pressed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ButtonBinding {
    ToggleType(ChargerType),
    ToggleAvailableOnly,
}

#[derive(Debug, Clone)]
struct ButtonSlot {
    widget: Button3D,
    binding: Option<ButtonBinding>,
}

#[derive(Debug, Clone)]
struct MapBinding {
    node: NodeId,
    spec: MapPlaneSpec,
    center: (f64, f64),
    scale_slider: Option<NodeId>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TickOutput {
    pub events: Vec<Event>,
    pub snapshot: SceneSnapshot,
}

/// A running session: scene, widgets, interaction state and demo data.
#[derive(Debug, Clone)]
pub struct World {
    scene: Scene,
    config: Config,
    buttons: BTreeMap<NodeId, ButtonSlot>,
    sliders: BTreeMap<NodeId, Slider3D>,
    panels: BTreeMap<NodeId, Panel>,
    interaction: InteractionState,
    rules: ContextRules,
    context: String,
    context_dirty: bool,
    map: Option<MapBinding>,
    chargers: Vec<ChargerRecord>,
    markers: BTreeMap<NodeId, usize>,
    query: ChargerQuery,
    markers_dirty: bool,
    scans: BTreeMap<String, PointCloud>,
    scan_view: Option<NodeId>,
    active_scan: Option<String>,
    saved_layout: Option<LayoutDocument>,
    event_log: Vec<Event>,
    frame: u64,
    last_time: Option<f64>,
    warnings: Vec<String>,
}

impl World {
    pub fn new(scene: Scene, config: Config) -> Result<Self, RuntimeError> {
        config.validate()?;
        Ok(Self {
            scene,
            config,
            buttons: BTreeMap::new(),
            sliders: BTreeMap::new(),
            panels: BTreeMap::new(),
            interaction: InteractionState::new(),
            rules: ContextRules::default(),
            context: DEFAULT_CONTEXT.to_string(),
            context_dirty: false,
            map: None,
            chargers: Vec::new(),
            markers: BTreeMap::new(),
            query: ChargerQuery::all(),
            markers_dirty: false,
            scans: BTreeMap::new(),
            scan_view: None,
            active_scan: None,
            saved_layout: None,
            event_log: Vec::new(),
            frame: 0,
            last_time: None,
            warnings: Vec::new(),
        })
    }

    pub fn scene(&self) -> &Scene {
        &self.scene
    }

    /// Direct scene access for building a world. Mutating poses of nodes
    /// that are being grabbed is overwritten on the next tick.
    pub fn scene_mut(&mut self) -> &mut Scene {
        &mut self.scene
    }

    pub fn config(&self) -> &Config {
        &self.config
    }

    pub fn interaction(&self) -> &InteractionState {
        &self.interaction
    }

    pub fn event_log(&self) -> &[Event] {
        &self.event_log
    }

    pub fn frame_counter(&self) -> u64 {
        self.frame
    }

    pub fn last_time(&self) -> Option<f64> {
        self.last_time
    }

    pub fn context(&self) -> &str {
        &self.context
    }

    pub fn query(&self) -> &ChargerQuery {
        &self.query
    }

    pub fn chargers(&self) -> &[ChargerRecord] {
        &self.chargers
    }

    pub fn active_scan(&self) -> Option<&str> {
        self.active_scan.as_deref()
    }

    pub fn saved_layout(&self) -> Option<&LayoutDocument> {
        self.saved_layout.as_ref()
    }

    /// Warnings collected since the last call (unknown contexts, layout
    /// entries naming missing components, and so on).
    pub fn take_warnings(&mut self) -> Vec<String> {
        std::mem::take(&mut self.warnings)
    }

    pub fn button(&self, node: NodeId) -> Option<&Button3D> {
        self.buttons.get(&node).map(|b| &b.widget)
    }

    pub fn slider(&self, node: NodeId) -> Option<&Slider3D> {
        self.sliders.get(&node)
    }

    pub fn panel(&self, node: NodeId) -> Option<&Panel> {
        self.panels.get(&node)
    }

    pub fn map_spec(&self) -> Option<MapPlaneSpec> {
        self.map.as_ref().map(|m| m.spec)
    }

    /// Marker node for each charger, ascending by node id.
    pub fn markers(&self) -> impl Iterator<Item = (NodeId, &ChargerRecord)> {
        self.markers.iter().map(|(id, i)| (*id, &self.chargers[*i]))
    }

    fn require_node(&self, node: NodeId) -> Result<(), RuntimeError> {
        self.scene.node(node)?;
        Ok(())
    }

    /// Attaches a button to an existing scene node.
    pub fn add_button(&mut self, node: NodeId, binding: Option<ButtonBinding>) -> Result<(), RuntimeError> {
        self.require_node(node)?;
        let widget = Button3D::new(node, self.config.button)?;
        self.buttons.insert(node, ButtonSlot { widget, binding });
        Ok(())
    }

    pub fn add_slider(&mut self, node: NodeId) -> Result<(), RuntimeError> {
        self.require_node(node)?;
        self.sliders.insert(node, Slider3D::new(node, self.config.slider)?);
        Ok(())
    }

    pub fn add_panel(&mut self, panel: Panel) -> Result<(), RuntimeError> {
        self.require_node(panel.node_id())?;
        self.require_node(panel.handle_node_id())?;
        self.panels.insert(panel.node_id(), panel);
        Ok(())
    }

    pub fn set_panel_opacity(&mut self, node: NodeId, opacity: f64) -> Result<(), RuntimeError> {
        let panel = self.panels.get_mut(&node).ok_or(crate::spatial::SpatialError::NotFound(node))?;
        panel.set_opacity(opacity);
        self.scene.node_mut(node)?.set_opacity(panel.opacity());
        Ok(())
    }

    /// Installs context rules and re-applies the current context.
    pub fn set_rules(&mut self, rules: ContextRules) {
        self.rules = rules;
        self.apply_context();
    }

    pub fn rules(&self) -> &ContextRules {
        &self.rules
    }

    /// Makes `node` the map plane. Marker positions are measured from
    /// `center` (`(lat, lon)`), and the slider, if given, drives the scale.
    pub fn bind_map(
        &mut self,
        node: NodeId,
        spec: MapPlaneSpec,
        center: (f64, f64),
        scale_slider: Option<NodeId>,
    ) -> Result<(), RuntimeError> {
        self.require_node(node)?;
        mercator_project(center.0, center.1, &spec)?;
        let mut spec = spec;
        if let Some(s) = scale_slider {
            let slider = self.sliders.get_mut(&s).ok_or(crate::spatial::SpatialError::NotFound(s))?;
            slider.set_value(spec.scale());
            spec = spec.with_scale(slider.value())?;
        }
        self.map = Some(MapBinding {
            node,
            spec,
            center,
            scale_slider,
        });
        self.refresh_markers()?;
        Ok(())
    }

    /// Adds one marker per record under the map plane.
    pub fn add_chargers(&mut self, records: Vec<ChargerRecord>) -> Result<(), RuntimeError> {
        let map_node = self
            .map
            .as_ref()
            .map(|m| m.node)
            .ok_or(RuntimeError::Config("chargers need a bound map plane".into()))?;
        let half = Vec3::new(MARKER_HALF_SIZE, MARKER_HALF_SIZE, MARKER_HALF_SIZE);
        for record in records {
            let collider = Obb::axis_aligned(Vec3::new(0.0, 0.0, MARKER_HALF_SIZE), half)?;
            let id = self
                .scene
                .insert(SceneNode::new(NodeKind::Marker).with_parent(map_node).with_collider(collider))?;
            self.markers.insert(id, self.chargers.len());
            self.chargers.push(record);
        }
        self.refresh_markers()
    }

    /// Registers the point cloud shown when the charger's marker is selected.
    pub fn attach_scan(&mut self, charger_id: &str, cloud: PointCloud) {
        self.scans.insert(charger_id.to_string(), cloud);
    }

    pub fn scan(&self, charger_id: &str) -> Option<&PointCloud> {
        self.scans.get(charger_id)
    }

    pub fn set_scan_view(&mut self, node: NodeId) -> Result<(), RuntimeError> {
        self.require_node(node)?;
        self.scan_view = Some(node);
        Ok(())
    }

    /// Switches the active context; unknown tags fall back to the default.
    pub fn set_context(&mut self, tag: &str) -> ContextOutcome {
        self.context = tag.to_string();
        self.apply_context()
    }

    fn apply_context(&mut self) -> ContextOutcome {
        let outcome = set_context(&mut self.scene, &self.rules, &self.context);
        self.context = outcome.applied.clone();
        self.context_dirty = false;
        self.warnings.extend(outcome.warnings.iter().cloned());
        outcome
    }

    pub fn set_query(&mut self, query: ChargerQuery) -> Result<(), RuntimeError> {
        self.query = query;
        self.refresh_markers()
    }

    /// Named root nodes: the components a layout file covers by default.
    pub fn layout_components(&self) -> Vec<String> {
        self.scene
            .names()
            .filter(|(_, id)| self.scene.get(*id).is_some_and(|n| n.parent().is_none()))
            .map(|(name, _)| name.to_string())
            .collect()
    }

    /// Saves the named components (default: [`World::layout_components`])
    /// and keeps the document for [`World::restore_saved_layout`].
    pub fn save_layout(
        &mut self,
        names: Option<&[String]>,
        saved_at: DateTime<Utc>,
    ) -> Result<LayoutDocument, RuntimeError> {
        let doc = match names {
            Some(names) => save_layout(&self.scene, names, saved_at)?,
            None => save_layout(&self.scene, &self.layout_components(), saved_at)?,
        };
        self.saved_layout = Some(doc.clone());
        Ok(doc)
    }

    pub fn load_layout(&mut self, doc: &LayoutDocument) -> Result<(), RuntimeError> {
        let warnings = load_layout(&mut self.scene, doc)?;
        self.warnings.extend(warnings);
        Ok(())
    }

    pub fn restore_saved_layout(&mut self) -> Result<(), RuntimeError> {
        let doc = self
            .saved_layout
            .clone()
            .ok_or(RuntimeError::Protocol("load_layout before any save_layout".into()))?;
        self.load_layout(&doc)
    }

    /// Advances the world to `frame.timestamp`.
    ///
    /// The elapsed time is split into equal substeps no longer than
    /// `1 / PHYSICS_RATE`. The frame's input is applied on the last
    /// substep, which lands exactly on the frame time; earlier substeps
    /// keep the previous frame's input. Each substep runs input, widgets
    /// (state machines and their springs), grab application, then marker
    /// and context visibility. The first frame is a single zero-length
    /// substep.
    pub fn tick(&mut self, frame: &InputFrame) -> Result<TickOutput, RuntimeError> {
        let t = frame.timestamp;
        if !t.is_finite() {
            return Err(RuntimeError::Protocol("non-finite frame timestamp".into()));
        }
        if let Some(previous) = self.last_time {
            if t <= previous {
                return Err(RuntimeError::Protocol(format!(
                    "frame at t={t} is not after previous frame at t={previous}"
                )));
            }
        }
        let mut ids = std::collections::BTreeSet::new();
        if let Some(d) = frame.devices.iter().find(|d| !ids.insert(&d.id)) {
            return Err(RuntimeError::Protocol(format!("device {} appears twice in one frame", d.id)));
        }

        let start = self.last_time.unwrap_or(t);
        let dt = t - start;
        let substeps = if dt == 0.0 {
            1
        } else {
            ((dt * PHYSICS_RATE - 1e-9).ceil() as usize).max(1)
        };
        let h = dt / substeps as f64;

        let mut events = Vec::new();
        for i in 1..=substeps {
            let now = if i == substeps { t } else { start + h * i as f64 };
            if i == substeps {
                let input = process_frame(frame, &self.scene, &mut self.interaction, &self.config.input)?;
                self.react_to_input(&input);
                events.extend(input);
            }
            self.update_widgets(h, now, &mut events)?;
            self.apply_grabs()?;
            if self.markers_dirty {
                self.refresh_markers()?;
            }
            if self.context_dirty {
                self.apply_context();
            }
        }

        self.last_time = Some(t);
        self.frame += 1;
        self.event_log.extend(events.iter().cloned());
        Ok(TickOutput {
            events,
            snapshot: self.snapshot(),
        })
    }

    fn react_to_input(&mut self, events: &[Event]) {
        for e in events {
            if e.kind != EventKind::SelectStart {
                continue;
            }
            let Some(&index) = self.markers.get(&e.node) else { continue };
            let id = &self.chargers[index].id;
            if self.scans.contains_key(id) {
                self.active_scan = Some(id.clone());
                self.context = "scan".to_string();
                self.context_dirty = true;
            }
        }
    }

    /// The device holding a Select on `node`, lowest device id first.
    fn selecting_device(&self, node: NodeId) -> Option<&DeviceSample> {
        self.interaction
            .devices()
            .find(|(_, d)| {
                d.engaged
                    .as_ref()
                    .is_some_and(|e| e.node == node && e.kind == EngageKind::Select)
            })
            .map(|(_, d)| &d.sample)
    }

    /// Cap depth commanded by a selecting device: activation between the
    /// release and engage thresholds maps linearly onto the full travel.
    fn button_contact(&self, slot: &ButtonSlot) -> Option<f64> {
        let sample = self.selecting_device(slot.widget.node_id())?;
        let input = &self.config.input;
        let span = input.engage_threshold - input.release_threshold;
        let fraction = ((sample.activation() - input.release_threshold) / span).clamp(0.0, 1.0);
        Some(slot.widget.travel() * fraction)
    }

    /// Handle position along the slider's local x axis pointed at by the
    /// selecting device: the pinch point for a hand within reach, otherwise
    /// where the device's forward ray crosses the slider plane.
    fn slider_target(&self, slider: &Slider3D) -> Option<f64> {
        let node = slider.node_id();
        let sample = self.selecting_device(node)?;
        let frame = self.scene.world_pose(node).ok()?;
        if sample.kind == DeviceKind::TrackedHand {
            let near = self
                .scene
                .world_collider(node)
                .is_some_and(|c| c.distance_to_point(sample.pinch_point()) <= self.config.input.near_radius);
            if near {
                return Some(frame.inverse().transform_point(sample.pinch_point()).x);
            }
        }
        let ray = sample.forward_ray().to_local(&frame);
        let (o, d) = (ray.origin(), ray.direction());
        if d.z.abs() < 1e-9 {
            return Some(slider.handle_offset());
        }
        let s = -o.z / d.z;
        if s < 0.0 {
            return Some(slider.handle_offset());
        }
        Some(o.x + s * d.x)
    }

    fn update_widgets(&mut self, dt: f64, now: f64, events: &mut Vec<Event>) -> Result<(), RuntimeError> {
        let ids: Vec<NodeId> = self.buttons.keys().copied().collect();
        for id in ids {
            let contact = self.button_contact(&self.buttons[&id]);
            let slot = self.buttons.get_mut(&id).expect("id taken from the map");
            let fired = slot.widget.update(contact, dt, now)?;
            if let Some(binding) = slot.binding {
                if fired.iter().any(|e| e.kind == EventKind::Pressed) {
                    match binding {
                        ButtonBinding::ToggleType(t) => self.query.toggle_type(t),
                        ButtonBinding::ToggleAvailableOnly => self.query.available_only = !self.query.available_only,
                    }
                    self.markers_dirty = true;
                }
            }
            events.extend(fired);
        }

        let ids: Vec<NodeId> = self.sliders.keys().copied().collect();
        for id in ids {
            let target = self.slider_target(&self.sliders[&id]);
            let slider = self.sliders.get_mut(&id).expect("id taken from the map");
            let fired = slider.update(target, dt, now)?;
            let value = slider.value();
            if let Some(map) = self.map.as_mut() {
                if map.scale_slider == Some(id) && !fired.is_empty() {
                    map.spec = map.spec.with_scale(value)?;
                    self.markers_dirty = true;
                }
            }
            events.extend(fired);
        }
        Ok(())
    }

    fn apply_grabs(&mut self) -> Result<(), RuntimeError> {
        let mut moves = Vec::new();
        for (grabber, session) in self.interaction.active_grabs_mut() {
            moves.push((session.target(), session.update(&grabber)?));
        }
        for mut session in self.interaction.take_finished_grabs() {
            moves.push((session.target(), session.end(&self.config.snap)?));
        }
        for (target, pose) in moves {
            self.scene.set_world_pose(target, pose)?;
        }
        Ok(())
    }

    /// Places every marker for the current map scale and hides those that
    /// fail the query or fall off the plane.
    fn refresh_markers(&mut self) -> Result<(), RuntimeError> {
        self.markers_dirty = false;
        let Some(map) = &self.map else { return Ok(()) };
        let (cx, cy) = mercator_project(map.center.0, map.center.1, &map.spec)?;
        let half = map.spec.extent() / 2.0;
        for (&id, &index) in &self.markers {
            let record = &self.chargers[index];
            let (x, y) = mercator_project(record.latitude, record.longitude, &map.spec)?;
            let (x, y) = (x - cx, y - cy);
            let node = self.scene.node_mut(id)?;
            node.local = Pose::from_translation(Vec3::new(x, y, 0.0));
            node.visible = x.abs() <= half && y.abs() <= half && self.query.matches(record);
        }
        Ok(())
    }

    /// Immutable picture of the current world.
    pub fn snapshot(&self) -> SceneSnapshot {
        let nodes = self
            .scene
            .iter()
            .map(|n| {
                let id = n.id();
                let world = self.scene.world_pose(id).expect("every scene node has a world pose");
                let slider = self.sliders.get(&id);
                let label = match self.markers.get(&id) {
                    Some(&i) => Some(self.chargers[i].id.clone()),
                    None if Some(id) == self.scan_view => self.active_scan.clone(),
                    None => None,
                };
                NodeSnapshot {
                    id,
                    kind: n.kind,
                    name: n.name().map(str::to_string),
                    parent: n.parent(),
                    p: world.position.to_array(),
                    q: world.rotation.to_array(),
                    opacity: n.opacity(),
                    visible: self.scene.is_visible(id),
                    depth: self.buttons.get(&id).map(|b| b.widget.depth()),
                    offset: slider.map(Slider3D::handle_offset),
                    value: slider.map(Slider3D::value),
                    label,
                }
            })
            .collect();
        SceneSnapshot {
            frame: self.frame,
            nodes,
        }
    }
}

/// Free-function form of [`World::tick`].
pub fn tick(world: &mut World, frame: &InputFrame) -> Result<TickOutput, RuntimeError> {
    world.tick(frame)
}
