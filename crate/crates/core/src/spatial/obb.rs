//! Oriented bounding boxes, the only collider shape widgets use.

use serde::{Deserialize, Serialize};

use super::math::{Pose, Ray, Vec3};
use super::SpatialError;

/// A box centered on `center` (position and orientation) with positive
/// half extents along its local axes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Obb {
    center: Pose,
    half_extents: Vec3,
}

impl Obb {
    pub fn new(center: Pose, half_extents: Vec3) -> Result<Self, SpatialError> {
        let h = half_extents;
        if !h.is_finite() || !(h.x > 0.0 && h.y > 0.0 && h.z > 0.0) {
            return Err(SpatialError::InvalidExtents(h));
        }
        if !center.is_finite() {
            return Err(SpatialError::NonFinite("box center"));
        }
        Ok(Self {
            center: Pose::new(center.position, center.rotation.try_normalized()?),
            half_extents,
        })
    }

    /// Axis-aligned box at `position`.
    pub fn axis_aligned(position: Vec3, half_extents: Vec3) -> Result<Self, SpatialError> {
        Self::new(Pose::from_translation(position), half_extents)
    }

    pub fn center(&self) -> &Pose {
        &self.center
    }

    pub fn half_extents(&self) -> Vec3 {
        self.half_extents
    }

    /// The same box re-expressed through `frame` (e.g. a node's world pose).
    pub fn transformed(&self, frame: &Pose) -> Obb {
        Obb {
            center: frame.compose(&self.center),
            half_extents: self.half_extents,
        }
    }

    pub fn contains_point(&self, p: Vec3) -> bool {
        let local = self.center.inverse().transform_point(p).abs();
        let h = self.half_extents;
        local.x <= h.x && local.y <= h.y && local.z <= h.z
    }

    /// Euclidean distance from `p` to the box; zero inside.
    pub fn distance_to_point(&self, p: Vec3) -> f64 {
        let local = self.center.inverse().transform_point(p).abs();
        let outside = local - self.half_extents;
        Vec3::new(outside.x.max(0.0), outside.y.max(0.0), outside.z.max(0.0)).length()
    }

    /// Smallest `t >= 0` at which the ray is on or inside the box.
    ///
    /// A ray starting inside the box hits at `t = 0`.
    pub fn ray_intersect(&self, ray: &Ray) -> Option<f64> {
        let local = ray.to_local(&self.center);
        let (o, d, h) = (local.origin(), local.direction(), self.half_extents);

        let mut t_enter = 0.0_f64;
        let mut t_exit = f64::INFINITY;
        for axis in 0..3 {
            let (oa, da, ha) = (o.component(axis), d.component(axis), h.component(axis));
            if da.abs() < 1e-300 {
                if oa.abs() > ha {
                    return None;
                }
                continue;
            }
            let inv = 1.0 / da;
            let (mut t0, mut t1) = ((-ha - oa) * inv, (ha - oa) * inv);
            if t0 > t1 {
                std::mem::swap(&mut t0, &mut t1);
            }
            t_enter = t_enter.max(t0);
            t_exit = t_exit.min(t1);
            if t_enter > t_exit {
                return None;
            }
        }
        Some(t_enter)
    }
}

/// Free-function form of [`Obb::ray_intersect`].
pub fn ray_intersect_obb(ray: &Ray, obb: &Obb) -> Option<f64> {
    obb.ray_intersect(ray)
}
