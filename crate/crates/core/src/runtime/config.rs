use serde::{Deserialize, Serialize};

use super::RuntimeError;
use crate::geo::{check_coordinates, MapPlaneSpec};
use crate::input::InputConfig;
use crate::layout::SnapPolicy;
use crate::physics::SpringParams;
use crate::widgets::{ButtonConfig, SliderConfig};

/// Map plane placement of the geospatial demo.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MapConfig {
    /// Side length of the map plane in meters.
    pub extent: f64,
    /// Initial zoom; the scale slider changes it at run time.
    pub initial_scale: f64,
    /// `[lat, lon]` shown at the plane center.
    pub center: [f64; 2],
}

impl Default for MapConfig {
    fn default() -> Self {
        Self {
            extent: 1.0,
            initial_scale: 1.0,
            center: [0.0, 0.0],
        }
    }
}

impl MapConfig {
    pub fn plane_spec(&self) -> Result<MapPlaneSpec, RuntimeError> {
        Ok(MapPlaneSpec::new(self.extent, self.initial_scale)?)
    }
}

/// Everything tunable about a session, loadable from TOML. Missing tables
/// and keys take their defaults.
///
/// ```toml
/// [button]
/// travel = 0.01
/// press_threshold = 0.7
///
/// [button.spring]
/// stiffness = 300.0
/// damping = 9.86
/// mass = 0.1
///
/// [map]
/// extent = 1.2
/// center = [57.15, -2.09]
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct Config {
    pub button: ButtonConfig,
    pub slider: SliderConfig,
    pub input: InputConfig,
    pub snap: SnapPolicy,
    pub map: MapConfig,
}

fn check_spring(spring: &SpringParams, what: &str) -> Result<(), RuntimeError> {
    SpringParams::new(spring.stiffness(), spring.damping(), spring.mass())
        .map(|_| ())
        .map_err(|e| RuntimeError::Config(format!("{what}: {e}")))
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self, RuntimeError> {
        let config: Config = toml::from_str(text).map_err(|e| RuntimeError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), RuntimeError> {
        let bad = |e: &dyn std::fmt::Display| RuntimeError::Config(e.to_string());
        self.button.validate().map_err(|e| bad(&e))?;
        self.slider.validate().map_err(|e| bad(&e))?;
        check_spring(&self.button.spring, "button spring")?;
        check_spring(&self.slider.spring, "slider spring")?;
        let input = &self.input;
        if !(0.0..=1.0).contains(&input.release_threshold)
            || !(0.0..=1.0).contains(&input.engage_threshold)
            || input.release_threshold >= input.engage_threshold
        {
            return Err(RuntimeError::Config(
                "input thresholds need 0 <= release < engage <= 1".into(),
            ));
        }
        if !(input.near_radius.is_finite() && input.near_radius >= 0.0) {
            return Err(RuntimeError::Config("near_radius must be non-negative".into()));
        }
        if self.snap.enabled && !(self.snap.cell.is_finite() && self.snap.cell > 0.0) {
            return Err(RuntimeError::Config("snap cell must be positive".into()));
        }
        if self.snap.yaw_snap && !(self.snap.yaw_step_degrees.is_finite() && self.snap.yaw_step_degrees > 0.0) {
            return Err(RuntimeError::Config("yaw snap step must be positive".into()));
        }
        self.map.plane_spec().map_err(|e| bad(&e))?;
        check_coordinates(self.map.center[0], self.map.center[1]).map_err(|e| bad(&e))?;
        Ok(())
    }
}
