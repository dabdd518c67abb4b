//! The EV-charger map scene.
//!
//! Facing `-z` from the origin the user sees, left to right: the filter
//! panel (one toggle per charger type plus "available only"), the map plane
//! lying on a table in front, and the panel with the map scale slider.
//! Each panel and the map carry a grabbable handle along their lower edge.
//! A point-cloud view behind the map shows the scan of a selected charger
//! in the `scan` context.

use std::f64::consts::FRAC_PI_2;

use super::config::Config;
use super::world::{ButtonBinding, World};
use super::RuntimeError;
use crate::geo::{load_chargers, ChargerType, RowError};
use crate::layout::{ContextRule, ContextRules, LayoutDocument, DEFAULT_CONTEXT};
use crate::spatial::{NodeId, NodeKind, Obb, Pose, Quat, Scene, SceneNode, Vec3};
use crate::widgets::Panel;

pub const FILTER_PANEL: &str = "filter_panel";
pub const SCALE_PANEL: &str = "scale_panel";
pub const MAP: &str = "map";
pub const SCAN_VIEW: &str = "scan_view";
pub const SCALE_SLIDER: &str = "scale_slider";
pub const AVAILABLE_BUTTON: &str = "btn_available";

/// Button name for a charger type toggle, e.g. `btn_rapid`.
pub fn type_button(t: ChargerType) -> String {
    format!("btn_{}", t.as_str())
}

const CELL: f64 = 0.1;
const HANDLE_DROP: f64 = 0.08;

/// A built demo and the charger rows that were rejected on the way.
#[derive(Debug)]
pub struct DemoWorld {
    pub world: World,
    pub row_errors: Vec<RowError>,
}

/// Rules used when no rules file is given: everything in the default
/// context, the scan replacing the panels in `scan`.
pub fn default_rules() -> ContextRules {
    let rule = |tag: &str, names: &[&str]| ContextRule {
        tag: tag.to_string(),
        visible: names.iter().map(|s| s.to_string()).collect(),
    };
    ContextRules::new(vec![
        rule(DEFAULT_CONTEXT, &[FILTER_PANEL, SCALE_PANEL, MAP]),
        rule("map-query", &[FILTER_PANEL, MAP]),
        rule("scan", &[MAP, SCAN_VIEW]),
    ])
    .expect("built-in rules are valid")
}

fn boxed(center: Vec3, half: Vec3) -> Result<Obb, RuntimeError> {
    Ok(Obb::axis_aligned(center, half)?)
}

fn handle(scene: &mut Scene, parent: NodeId, name: String, at: Vec3, half_width: f64) -> Result<NodeId, RuntimeError> {
    Ok(scene.insert(
        SceneNode::new(NodeKind::Handle)
            .with_parent(parent)
            .with_name(name)
            .with_local(Pose::from_translation(at))
            .with_collider(boxed(Vec3::ZERO, Vec3::new(half_width, 0.015, 0.015))?)
            .grabbable(true),
    )?)
}

fn panel_root(scene: &mut Scene, name: &str, at: Vec3, half: Vec3) -> Result<NodeId, RuntimeError> {
    Ok(scene.insert(
        SceneNode::new(NodeKind::Panel)
            .with_name(name)
            .with_local(Pose::from_translation(at))
            .with_collider(boxed(Vec3::new(0.0, 0.0, -0.006), Vec3::new(half.x, half.y, 0.005))?),
    )?)
}

/// Builds the demo from charger CSV text, optional context rules (the
/// defaults otherwise) and an optional saved layout.
pub fn build_demo_world(
    config: &Config,
    chargers_csv: &str,
    rules: Option<ContextRules>,
    layout: Option<&LayoutDocument>,
) -> Result<DemoWorld, RuntimeError> {
    config.validate()?;
    let (records, row_errors) = load_chargers(chargers_csv)?;
    let mut scene = Scene::new();
    let mut panels = Vec::new();

    // Filter panel: four toggles in one row.
    let filter = panel_root(&mut scene, FILTER_PANEL, Vec3::new(-0.45, 1.3, -0.8), Vec3::new(0.2, 0.05, 0.0))?;
    let filter_handle = handle(
        &mut scene,
        filter,
        format!("{FILTER_PANEL}_handle"),
        Vec3::new(0.0, -HANDLE_DROP, 0.0),
        0.06,
    )?;
    let mut filter_panel = Panel::new(filter, filter_handle, 4, 1, CELL)?;
    let mut buttons = Vec::new();
    let toggles = ChargerType::ALL
        .iter()
        .map(|t| (type_button(*t), ButtonBinding::ToggleType(*t)))
        .chain([(AVAILABLE_BUTTON.to_string(), ButtonBinding::ToggleAvailableOnly)]);
    for (column, (name, binding)) in toggles.enumerate() {
        let button_half = Vec3::new(0.04, 0.04, 0.01);
        let id = scene.insert(
            SceneNode::new(NodeKind::Button)
                .with_parent(filter)
                .with_name(name)
                .with_collider(boxed(Vec3::new(0.0, 0.0, 0.01), button_half)?),
        )?;
        scene.node_mut(id)?.local = filter_panel.place(id, column as u32, 0)?;
        buttons.push((id, binding));
    }
    panels.push(filter_panel);

    // Scale panel: one slider.
    let half_range = config.slider.half_range;
    let scale = panel_root(
        &mut scene,
        SCALE_PANEL,
        Vec3::new(0.45, 1.3, -0.8),
        Vec3::new(half_range + 0.02, 0.04, 0.0),
    )?;
    let scale_handle = handle(
        &mut scene,
        scale,
        format!("{SCALE_PANEL}_handle"),
        Vec3::new(0.0, -HANDLE_DROP, 0.0),
        0.06,
    )?;
    let mut scale_panel = Panel::new(scale, scale_handle, 1, 1, 2.0 * half_range + 0.04)?;
    let slider = scene.insert(
        SceneNode::new(NodeKind::Slider)
            .with_parent(scale)
            .with_name(SCALE_SLIDER)
            .with_collider(boxed(Vec3::new(0.0, 0.0, 0.01), Vec3::new(half_range, 0.02, 0.01))?),
    )?;
    scene.node_mut(slider)?.local = scale_panel.place(slider, 0, 0)?;
    panels.push(scale_panel);

    // Map plane on the table, north pointing away from the user.
    let extent = config.map.extent;
    let tabletop = Pose::new(Vec3::new(0.0, 0.8, -0.9), Quat::from_axis_angle(Vec3::X, -FRAC_PI_2));
    let map = scene.insert(
        SceneNode::new(NodeKind::MapPlane)
            .with_name(MAP)
            .with_local(tabletop)
            .with_collider(boxed(Vec3::ZERO, Vec3::new(extent / 2.0, extent / 2.0, 0.002))?),
    )?;
    handle(
        &mut scene,
        map,
        format!("{MAP}_handle"),
        Vec3::new(0.0, -extent / 2.0 - 0.05, 0.015),
        0.08,
    )?;

    let scan_view = scene.insert(
        SceneNode::new(NodeKind::PointCloud)
            .with_name(SCAN_VIEW)
            .with_local(Pose::from_translation(Vec3::new(0.0, 1.3, -1.4))),
    )?;

    let mut world = World::new(scene, *config)?;
    for (id, binding) in buttons {
        world.add_button(id, Some(binding))?;
    }
    world.add_slider(slider)?;
    for panel in panels {
        world.add_panel(panel)?;
    }
    world.set_scan_view(scan_view)?;
    let spec = config.map.plane_spec()?;
    let (lat, lon) = (config.map.center[0], config.map.center[1]);
    world.bind_map(map, spec, (lat, lon), Some(slider))?;
    world.add_chargers(records)?;
    world.set_rules(rules.unwrap_or_else(default_rules));
    if let Some(doc) = layout {
        world.load_layout(doc)?;
    }
    Ok(DemoWorld { world, row_errors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::CHARGER_HEADER;

    fn csv(rows: &[&str]) -> String {
        let mut text = CHARGER_HEADER.join(",") + "\n";
        for r in rows {
            text.push_str(r);
            text.push('\n');
        }
        text
    }

    #[test]
    fn zero_chargers_builds_map_and_panels() {
        let demo = build_demo_world(&Config::default(), &csv(&[]), None, None).unwrap();
        let scene = demo.world.scene();
        for name in [FILTER_PANEL, SCALE_PANEL, MAP, SCAN_VIEW, SCALE_SLIDER, AVAILABLE_BUTTON] {
            assert!(scene.lookup(name).is_some(), "{name}");
        }
        assert_eq!(demo.world.markers().count(), 0);
        assert!(scene.iter().all(|n| n.kind != NodeKind::Marker));
        // Scan view starts hidden under the default context.
        assert!(!scene.is_visible(scene.lookup(SCAN_VIEW).unwrap()));
    }

    #[test]
    fn charger_at_origin_sits_at_plane_center() {
        let demo = build_demo_world(&Config::default(), &csv(&["z,0,0,slow,1,"]), None, None).unwrap();
        let world = &demo.world;
        let (marker, _) = world.markers().next().unwrap();
        let map = world.scene().lookup(MAP).unwrap();
        assert_eq!(world.scene().node(marker).unwrap().parent(), Some(map));
        assert_eq!(world.scene().node(marker).unwrap().local, Pose::IDENTITY);
        let (a, b) = (world.scene().world_pose(marker).unwrap(), world.scene().world_pose(map).unwrap());
        assert!((a.position - b.position).length() < 1e-12);
    }

    #[test]
    fn bad_rows_are_reported_and_the_world_is_still_built() {
        let demo = build_demo_world(&Config::default(), &csv(&["a,1,1,slow,1,", "b,99,0,fast,1,"]), None, None)
            .unwrap();
        assert_eq!(demo.world.markers().count(), 1);
        assert_eq!(demo.row_errors.len(), 1);
        assert_eq!(demo.row_errors[0].line, 3);
    }

    #[test]
    fn far_chargers_are_off_the_plane() {
        // With a 1 m plane at scale 1 the plane spans the whole world; at
        // scale 4 only the central quarter remains.
        let mut config = Config::default();
        config.map.initial_scale = 4.0;
        let demo = build_demo_world(&config, &csv(&["near,1,1,slow,1,", "far,0,120,slow,1,"]), None, None).unwrap();
        let visible: Vec<&str> = demo
            .world
            .markers()
            .filter(|(id, _)| demo.world.scene().node(*id).unwrap().visible)
            .map(|(_, r)| r.id.as_str())
            .collect();
        assert_eq!(visible, vec!["near"]);
    }

    #[test]
    fn layout_is_applied() {
        let demo = build_demo_world(&Config::default(), &csv(&[]), None, None).unwrap();
        let mut world = demo.world;
        let moved = Pose::from_translation(Vec3::new(1.0, 2.0, 3.0));
        let map = world.scene().lookup(MAP).unwrap();
        world.scene_mut().set_world_pose(map, moved).unwrap();
        let doc = world
            .save_layout(None, chrono::DateTime::from_timestamp(0, 0).unwrap())
            .unwrap();
        assert_eq!(
            doc.entries.keys().map(String::as_str).collect::<Vec<_>>(),
            vec![FILTER_PANEL, MAP, SCALE_PANEL, SCAN_VIEW]
        );
        let rebuilt = build_demo_world(&Config::default(), &csv(&[]), None, Some(&doc)).unwrap();
        assert_eq!(rebuilt.world.scene().world_pose(map).unwrap(), moved);
    }
}
