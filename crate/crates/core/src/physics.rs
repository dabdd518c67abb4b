//! Spring-damper integration for button return and slider recentering.
//!
//! The stepper is semi-implicit (symplectic) Euler: the acceleration is
//! evaluated at the current state, the velocity is advanced first, and the
//! new velocity moves the displacement:
//!
//! ```text
//! v' = v + ((-k x - c v + F) / m) dt
//! x' = x + v' dt
//! ```
//!
//! `x = 0` is the anchor the spring pulls toward.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest single step [`spring_step`] accepts.
pub const MAX_STEP: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PhysicsError {
    #[error("time step must be in (0, {MAX_STEP}], got {0}")]
    InvalidStep(f64),
    #[error("invalid spring parameters: {0}")]
    InvalidParams(&'static str),
    #[error("settle tolerances must be positive")]
    InvalidTolerance,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpringParams {
    stiffness: f64,
    damping: f64,
    mass: f64,
}

impl SpringParams {
    pub fn new(stiffness: f64, damping: f64, mass: f64) -> Result<Self, PhysicsError> {
        if !(stiffness.is_finite() && stiffness > 0.0) {
            return Err(PhysicsError::InvalidParams("stiffness must be positive"));
        }
        if !(damping.is_finite() && damping >= 0.0) {
            return Err(PhysicsError::InvalidParams("damping must be non-negative"));
        }
        if !(mass.is_finite() && mass > 0.0) {
            return Err(PhysicsError::InvalidParams("mass must be positive"));
        }
        Ok(Self {
            stiffness,
            damping,
            mass,
        })
    }

    /// Parameters with damping given as a fraction of critical damping.
    pub fn from_damping_ratio(stiffness: f64, damping_ratio: f64, mass: f64) -> Result<Self, PhysicsError> {
        let critical = 2.0 * (stiffness * mass).abs().sqrt();
        Self::new(stiffness, critical * damping_ratio, mass)
    }

    /// Button return spring: k = 300, m = 0.1, 0.9 of critical damping.
    pub fn default_button() -> Self {
        Self::from_damping_ratio(300.0, 0.9, 0.1).expect("constant parameters are valid")
    }

    /// Slider recentering spring: k = 150, m = 0.1, critically damped.
    pub fn default_slider() -> Self {
        Self::from_damping_ratio(150.0, 1.0, 0.1).expect("constant parameters are valid")
    }

    pub fn stiffness(&self) -> f64 {
        self.stiffness
    }

    pub fn damping(&self) -> f64 {
        self.damping
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn natural_frequency(&self) -> f64 {
        (self.stiffness / self.mass).sqrt()
    }

    /// Whether one step of size `dt` can never raise `½kx² + ½mv²` when no
    /// external force acts, from any starting state.
    ///
    /// The per-step energy change is a quadratic form in `(x, v)`; it is
    /// negative semi-definite exactly when `k dt² <= m` and
    /// `c² dt - 2 c m + k m dt <= 0`.
    pub fn dissipates_energy_at(&self, dt: f64) -> bool {
        let (k, c, m) = (self.stiffness, self.damping, self.mass);
        k * dt * dt <= m && c * c * dt - 2.0 * c * m + k * m * dt <= 0.0
    }
}

impl Default for SpringParams {
    fn default() -> Self {
        Self::default_button()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SpringState {
    pub displacement: f64,
    pub velocity: f64,
}

impl SpringState {
    pub fn new(displacement: f64, velocity: f64) -> Self {
        Self {
            displacement,
            velocity,
        }
    }

    pub fn at_rest() -> Self {
        Self::default()
    }

    pub fn energy(&self, params: &SpringParams) -> f64 {
        0.5 * params.stiffness * self.displacement * self.displacement
            + 0.5 * params.mass * self.velocity * self.velocity
    }
}

/// One semi-implicit Euler step.
pub fn spring_step(
    state: SpringState,
    params: &SpringParams,
    external_force: f64,
    dt: f64,
) -> Result<SpringState, PhysicsError> {
    if !(dt > 0.0 && dt <= MAX_STEP) {
        return Err(PhysicsError::InvalidStep(dt));
    }
    let accel = (-params.stiffness * state.displacement - params.damping * state.velocity + external_force)
        / params.mass;
    let velocity = state.velocity + accel * dt;
    Ok(SpringState {
        displacement: state.displacement + velocity * dt,
        velocity,
    })
}

/// Advances by `dt`, splitting into equal steps no longer than [`MAX_STEP`].
/// A zero `dt` leaves the state untouched.
pub fn spring_advance(
    state: SpringState,
    params: &SpringParams,
    external_force: f64,
    dt: f64,
) -> Result<SpringState, PhysicsError> {
    if dt == 0.0 {
        return Ok(state);
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(PhysicsError::InvalidStep(dt));
    }
    let steps = (dt / MAX_STEP).ceil().max(1.0) as usize;
    let h = dt / steps as f64;
    (0..steps).try_fold(state, |s, _| spring_step(s, params, external_force, h))
}

/// True iff `|x| < position_eps` and `|v| < velocity_eps`.
pub fn is_settled(state: &SpringState, position_eps: f64, velocity_eps: f64) -> Result<bool, PhysicsError> {
    if !(position_eps > 0.0 && velocity_eps > 0.0) {
        return Err(PhysicsError::InvalidTolerance);
    }
    Ok(state.displacement.abs() < position_eps && state.velocity.abs() < velocity_eps)
}
