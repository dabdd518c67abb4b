//! Normalized Web Mercator onto a square map plane.
//!
//! `u = lon / 180`, `v = ln(tan(π/4 + φ/2)) / π`, both in `[-1, 1]` over the
//! valid domain, then scaled by `extent / 2 · scale`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::GeoError;

/// Latitude limit of the Web Mercator square, degrees.
pub const MAX_LATITUDE: f64 = 85.05113;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapPlaneSpec {
    extent: f64,
    scale: f64,
}

impl MapPlaneSpec {
    pub fn new(extent: f64, scale: f64) -> Result<Self, GeoError> {
        if !(extent.is_finite() && extent > 0.0) {
            return Err(GeoError::InvalidMapSpec("extent must be positive"));
        }
        if !(scale.is_finite() && scale > 0.0) {
            return Err(GeoError::InvalidMapSpec("scale must be positive"));
        }
        Ok(Self { extent, scale })
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn with_scale(self, scale: f64) -> Result<Self, GeoError> {
        Self::new(self.extent, scale)
    }

    fn half_size(&self) -> f64 {
        self.extent / 2.0 * self.scale
    }
}

// asinh(tan φ) equals ln(tan(π/4 + φ/2)) and stays exact at the equator.
fn mercator_v(latitude_deg: f64) -> f64 {
    latitude_deg.to_radians().tan().asinh() / PI
}

/// `|v|` at the latitude limit; slightly above 1 because the limit is rounded.
fn max_v() -> f64 {
    mercator_v(MAX_LATITUDE)
}

pub fn check_coordinates(latitude: f64, longitude: f64) -> Result<(), GeoError> {
    if latitude.is_nan() || latitude.abs() > MAX_LATITUDE {
        return Err(GeoError::LatitudeOutOfDomain(latitude));
    }
    if !((-180.0..180.0).contains(&longitude)) {
        return Err(GeoError::LongitudeOutOfDomain(longitude));
    }
    Ok(())
}

/// Degrees to map-plane meters.
pub fn mercator_project(latitude: f64, longitude: f64, spec: &MapPlaneSpec) -> Result<(f64, f64), GeoError> {
    check_coordinates(latitude, longitude)?;
    let u = longitude / 180.0;
    let v = mercator_v(latitude);
    let half = spec.half_size();
    Ok((u * half, v * half))
}

/// Map-plane meters back to `(latitude, longitude)` degrees.
pub fn mercator_unproject(x: f64, y: f64, spec: &MapPlaneSpec) -> Result<(f64, f64), GeoError> {
    let half = spec.half_size();
    let (u, v) = (x / half, y / half);
    if !(u.abs() <= 1.0 && v.abs() <= max_v()) {
        return Err(GeoError::OutsideMap { x, y });
    }
    let latitude = (v * PI).sinh().atan().to_degrees();
    Ok((latitude, u * 180.0))
}
