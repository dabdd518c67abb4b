use serde::{Deserialize, Serialize};

use super::{snap_to_rest, WidgetError};
use crate::event::{Event, EventKind};
use crate::physics::{spring_advance, SpringParams, SpringState};
use crate::spatial::{NodeId, Vec3};

/// Tunables shared by every button in a world.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ButtonConfig {
    /// Full press travel in meters.
    pub travel: f64,
    /// Fraction of travel at which a press registers.
    pub press_threshold: f64,
    /// Fraction of travel below which a latched press releases.
    pub release_threshold: f64,
    pub spring: SpringParams,
}

impl Default for ButtonConfig {
    fn default() -> Self {
        Self {
            travel: 0.01,
            press_threshold: 0.7,
            release_threshold: 0.4,
            spring: SpringParams::default_button(),
        }
    }
}

impl ButtonConfig {
    pub fn validate(&self) -> Result<(), WidgetError> {
        if !(self.travel.is_finite() && self.travel > 0.0) {
            return Err(WidgetError::InvalidConfig("button travel must be positive"));
        }
        let (p, r) = (self.press_threshold, self.release_threshold);
        if !(p > 0.0 && p < 1.0) {
            return Err(WidgetError::InvalidConfig("press threshold must be in (0, 1)"));
        }
        if !(r > 0.0 && r < p) {
            return Err(WidgetError::InvalidConfig("release threshold must be in (0, press threshold)"));
        }
        Ok(())
    }
}

/// A momentary push button that springs back to rest.
///
/// `depth` is how far the cap is pushed along `press_axis`; the button
/// latches when depth crosses the press threshold and unlatches below the
/// lower release threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct Button3D {
    node_id: NodeId,
    press_axis: Vec3,
    config: ButtonConfig,
    depth: f64,
    spring_state: SpringState,
    latched: bool,
}

impl Button3D {
    pub fn new(node_id: NodeId, config: ButtonConfig) -> Result<Self, WidgetError> {
        config.validate()?;
        Ok(Self {
            node_id,
            press_axis: Vec3::FORWARD,
            config,
            depth: 0.0,
            spring_state: SpringState::at_rest(),
            latched: false,
        })
    }

    pub fn with_press_axis(mut self, axis: Vec3) -> Result<Self, WidgetError> {
        self.press_axis = axis
            .normalized()
            .ok_or(WidgetError::InvalidConfig("press axis must be non-zero"))?;
        Ok(self)
    }

    pub fn node_id(&self) -> NodeId {
        self.node_id
    }

    pub fn press_axis(&self) -> Vec3 {
        self.press_axis
    }

    pub fn travel(&self) -> f64 {
        self.config.travel
    }

    pub fn config(&self) -> &ButtonConfig {
        &self.config
    }

    pub fn depth(&self) -> f64 {
        self.depth
    }

    pub fn is_latched(&self) -> bool {
        self.latched
    }

    pub fn spring_state(&self) -> SpringState {
        self.spring_state
    }

    /// Advances the button by `dt` seconds.
    ///
    /// With a contact, the cap follows it (capped at full travel); without
    /// one, the spring drives it back toward rest, stopping at the rest
    /// position rather than overshooting past it.
    pub fn update(&mut self, contact_depth: Option<f64>, dt: f64, timestamp: f64) -> Result<Vec<Event>, WidgetError> {
        if !(dt >= 0.0 && dt.is_finite()) {
            return Err(WidgetError::InvalidArgument("dt must be finite and non-negative"));
        }
        match contact_depth {
            Some(c) if c.is_nan() || c < 0.0 => {
                return Err(WidgetError::InvalidArgument("contact depth must be non-negative"));
            }
            Some(c) => {
                self.depth = c.min(self.config.travel);
                self.spring_state = SpringState::new(self.depth, 0.0);
            }
            None => {
                let mut s = snap_to_rest(spring_advance(self.spring_state, &self.config.spring, 0.0, dt)?);
                if s.displacement <= 0.0 {
                    s = SpringState::at_rest();
                } else if s.displacement >= self.config.travel {
                    s = SpringState::new(self.config.travel, 0.0);
                }
                self.spring_state = s;
                self.depth = s.displacement;
            }
        }

        let fraction = self.depth / self.config.travel;
        let mut events = Vec::new();
        if !self.latched && fraction >= self.config.press_threshold {
            self.latched = true;
            events.push(Event::new(EventKind::Pressed, self.node_id, self.depth, timestamp));
        } else if self.latched && fraction < self.config.release_threshold {
            self.latched = false;
            events.push(Event::new(EventKind::Released, self.node_id, self.depth, timestamp));
        }
        Ok(events)
    }
}

/// Free-function form of [`Button3D::update`].
pub fn button_update(
    button: &mut Button3D,
    contact_depth: Option<f64>,
    dt: f64,
    timestamp: f64,
) -> Result<Vec<Event>, WidgetError> {
    button.update(contact_depth, dt, timestamp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const DT: f64 = 1.0 / 90.0;

    fn button() -> Button3D {
        Button3D::new(NodeId(1), ButtonConfig::default()).unwrap()
    }

    fn kinds(events: &[Event]) -> Vec<EventKind> {
        events.iter().map(|e| e.kind).collect()
    }

    #[test]
    fn idle_button_stays_at_rest() {
        let mut b = button();
        for i in 0..10 {
            assert!(b.update(None, DT, i as f64 * DT).unwrap().is_empty());
        }
        assert_eq!(b.depth(), 0.0);
    }

    #[test]
    fn ramp_presses_once_on_frame_seven() {
        // Frame i pushes to i/9 of travel; 7/9 is the first fraction >= 0.7.
        let mut b = button();
        let travel = b.travel();
        let mut fired = Vec::new();
        for i in 0..10 {
            let ev = b.update(Some(travel * i as f64 / 9.0), DT, i as f64).unwrap();
            if !ev.is_empty() {
                fired.push((i, kinds(&ev)));
            }
        }
        assert_eq!(fired, vec![(7, vec![EventKind::Pressed])]);
    }

    #[test]
    fn hysteresis_band_is_quiet() {
        let mut b = button();
        let travel = b.travel();
        assert_eq!(kinds(&b.update(Some(travel), DT, 0.0).unwrap()), vec![EventKind::Pressed]);
        for i in 0..20 {
            let d = if i % 2 == 0 { 0.5 } else { 0.65 };
            assert!(b.update(Some(travel * d), DT, 0.0).unwrap().is_empty());
        }
        assert_eq!(kinds(&b.update(Some(travel * 0.39), DT, 0.0).unwrap()), vec![EventKind::Released]);
    }

    #[test]
    fn spring_returns_and_releases() {
        let mut b = button();
        b.update(Some(b.travel()), DT, 0.0).unwrap();
        let mut released = 0;
        for i in 0..90 {
            released += b.update(None, DT, i as f64).unwrap().len();
        }
        assert_eq!(released, 1);
        assert!(!b.is_latched());
        assert_eq!(b.depth(), 0.0);
    }

    #[test]
    fn contact_beyond_travel_is_capped() {
        let mut b = button();
        b.update(Some(5.0), DT, 0.0).unwrap();
        assert_eq!(b.depth(), b.travel());
        b.update(Some(f64::INFINITY), DT, 0.0).unwrap();
        assert_eq!(b.depth(), b.travel());
    }

    #[test]
    fn negative_or_nan_contact_is_rejected() {
        let mut b = button();
        assert!(b.update(Some(-0.001), DT, 0.0).is_err());
        assert!(b.update(Some(f64::NAN), DT, 0.0).is_err());
    }

    #[test]
    fn thresholds_are_validated() {
        let bad = ButtonConfig {
            release_threshold: 0.8,
            ..ButtonConfig::default()
        };
        assert!(Button3D::new(NodeId(1), bad).is_err());
    }

    proptest! {
        #[test]
        fn events_alternate_and_depth_stays_in_range(
            trace in proptest::collection::vec(
                prop_oneof![Just(None), (0.0f64..0.03).prop_map(Some), Just(Some(1e9))],
                0..200,
            )
        ) {
            let mut b = button();
            let mut expect_press = true;
            for (i, c) in trace.into_iter().enumerate() {
                for e in b.update(c, DT, i as f64 * DT).unwrap() {
                    let want = if expect_press { EventKind::Pressed } else { EventKind::Released };
                    prop_assert_eq!(e.kind, want);
                    expect_press = !expect_press;
                }
                prop_assert!((0.0..=b.travel()).contains(&b.depth()));
            }
        }
    }
}
