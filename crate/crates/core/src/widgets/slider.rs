use serde::{Deserialize, Serialize};

use super::{snap_to_rest, WidgetError};
use crate::event::{Event, EventKind};
use crate::physics::{spring_advance, SpringParams, SpringState};
use crate::spatial::NodeId;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SliderConfig {
    /// Handle travel either side of center, meters.
    pub half_range: f64,
    /// Value units per second at full deflection.
    pub gain: f64,
    pub min_value: f64,
    pub max_value: f64,
    pub initial_value: f64,
    pub spring: SpringParams,
}

impl Default for SliderConfig {
    fn default() -> Self {
        Self {
            half_range: 0.1,
            gain: 1.0,
            min_value: 0.25,
            max_value: 4.0,
            initial_value: 1.0,
            spring: SpringParams::default_slider(),
        }
    }
}

impl SliderConfig {
    pub fn validate(&self) -> Result<(), WidgetError> {
        if !(self.half_range.is_finite() && self.half_range > 0.0) {
            return Err(WidgetError::InvalidConfig("slider half range must be positive"));
        }
        if !self.gain.is_finite() {
            return Err(WidgetError::InvalidConfig("slider gain must be finite"));
        }
        if !(self.min_value.is_finite() && self.max_value.is_finite() && self.min_value <= self.max_value) {
            return Err(WidgetError::InvalidConfig("slider bounds must be finite with min <= max"));
        }
        if !(self.min_value..=self.max_value).contains(&self.initial_value) {
            return Err(WidgetError::InvalidConfig("initial slider value outside bounds"));
        }
        Ok(())
    }
}

/// A rate-control slider whose handle rests at center.
///
/// While held, the handle's deflection from center sets how fast the bound
/// value changes. Once let go, the handle springs back to center and the
/// value stays where it was.
#[derive(Debug, Clone, PartialEq)]
pub struct Slider3D {
    node_id: NodeId,
    config: SliderConfig,
    handle_offset: f64,
    value: f64,
    spring_state: SpringState,
    engaged: bool,
}

impl Slider3D {
    pub fn new(node_id: NodeId, config: SliderConfig) -> Result<Self, WidgetError> {
        config.validate()?;
        Ok(Self {
            node_id,
            value: config.initial_value,
            config,
            handle_offset: 0.0,
            spring_state: SpringState::at_rest(),
            engaged: false,
        })
    }

    pub fn node_id(&self) -> NodeId {
        self.node_id
    }

    pub fn config(&self) -> &SliderConfig {
        &self.config
    }

    pub fn half_range(&self) -> f64 {
        self.config.half_range
    }

    pub fn handle_offset(&self) -> f64 {
        self.handle_offset
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn is_engaged(&self) -> bool {
        self.engaged
    }

    /// Overwrites the bound value (clamped), e.g. when restoring state.
    pub fn set_value(&mut self, value: f64) {
        if !value.is_nan() {
            self.value = value.clamp(self.config.min_value, self.config.max_value);
        }
    }

    pub fn update(&mut self, handle_target: Option<f64>, dt: f64, timestamp: f64) -> Result<Vec<Event>, WidgetError> {
        if !(dt >= 0.0 && dt.is_finite()) {
            return Err(WidgetError::InvalidArgument("dt must be finite and non-negative"));
        }
        let hr = self.config.half_range;
        let mut events = Vec::new();
        match handle_target {
            Some(t) if t.is_nan() => {
                return Err(WidgetError::InvalidArgument("handle target is NaN"));
            }
            Some(t) => {
                self.engaged = true;
                self.handle_offset = t.clamp(-hr, hr);
                self.spring_state = SpringState::new(self.handle_offset, 0.0);
                let next = (self.value + self.config.gain * (self.handle_offset / hr) * dt)
                    .clamp(self.config.min_value, self.config.max_value);
                if next != self.value {
                    self.value = next;
                    events.push(Event::new(EventKind::ValueChanged, self.node_id, next, timestamp));
                }
            }
            None => {
                self.engaged = false;
                let mut s = snap_to_rest(spring_advance(self.spring_state, &self.config.spring, 0.0, dt)?);
                if s.displacement.abs() >= hr {
                    s = SpringState::new(s.displacement.clamp(-hr, hr), 0.0);
                }
                self.spring_state = s;
                self.handle_offset = s.displacement;
            }
        }
        Ok(events)
    }
}

/// Free-function form of [`Slider3D::update`].
pub fn slider_update(
    slider: &mut Slider3D,
    handle_target: Option<f64>,
    dt: f64,
    timestamp: f64,
) -> Result<Vec<Event>, WidgetError> {
    slider.update(handle_target, dt, timestamp)
}
