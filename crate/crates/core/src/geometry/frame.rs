//! Foot-frame normalization.
//!
//! The change of variables `z_r = (n̂·r − c_p) / (n̂·ê_z)` keeps `x, y` and
//! maps the contact plane to `z_r = 0`. It is a vertical shear, so the CoM
//! dynamics keep exactly the same form with `z_p = 0`.

use serde::Serialize;

use crate::error::{diag, Result, VhipError};
use crate::geometry::surface::{ContactSurface, MIN_NORMAL_Z};
use crate::model::PendulumState;
use crate::scalar::Real;
use crate::vector::Vec3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FootFrame<T> {
    pub normal: Vec3<T>,
    pub plane_offset: T,
    /// `1 / (n̂·ê_z)`, always ≥ 1.
    pub scale: T,
}

/// Frame attached to the plane of `surface`.
pub fn foot_frame<T: Real>(surface: &ContactSurface<T>) -> Result<FootFrame<T>> {
    let n = surface.normal();
    if n.z < T::lit(MIN_NORMAL_Z) {
        return Err(VhipError::UnsupportedOrientation(diag(n.z)));
    }
    Ok(FootFrame {
        normal: n,
        plane_offset: surface.plane_offset(),
        scale: T::one() / n.z,
    })
}

impl<T: Real> FootFrame<T> {
    /// Horizontal plane `z = 0`; the identity transform.
    pub fn identity() -> Self {
        Self {
            normal: Vec3::unit_z(),
            plane_offset: T::zero(),
            scale: T::one(),
        }
    }

    pub fn point_to_frame(&self, p: Vec3<T>) -> Vec3<T> {
        Vec3::new(
            p.x,
            p.y,
            (self.normal.dot(p) - self.plane_offset) * self.scale,
        )
    }

    pub fn point_from_frame(&self, p: Vec3<T>) -> Vec3<T> {
        let n = self.normal;
        let z = (p.z * n.z + self.plane_offset - n.x * p.x - n.y * p.y) / n.z;
        Vec3::new(p.x, p.y, z)
    }

    pub fn vector_to_frame(&self, v: Vec3<T>) -> Vec3<T> {
        Vec3::new(v.x, v.y, self.normal.dot(v) * self.scale)
    }

    pub fn vector_from_frame(&self, v: Vec3<T>) -> Vec3<T> {
        let n = self.normal;
        Vec3::new(v.x, v.y, (v.z * n.z - n.x * v.x - n.y * v.y) / n.z)
    }

    pub fn to_frame(&self, state: &PendulumState<T>) -> PendulumState<T> {
        PendulumState::new(self.point_to_frame(state.r), self.vector_to_frame(state.v))
    }

    pub fn from_frame(&self, state: &PendulumState<T>) -> PendulumState<T> {
        PendulumState::new(
            self.point_from_frame(state.r),
            self.vector_from_frame(state.v),
        )
    }

    /// The surface expressed in this frame: same XY polygon at `z_r = 0`.
    pub fn surface_to_frame(&self, surface: &ContactSurface<T>) -> Result<ContactSurface<T>> {
        surface.map_vertices(|v| {
            let p = self.point_to_frame(v);
            Vec3::new(p.x, p.y, T::zero())
        })
    }
}

/// Expresses `state` in the foot frame of `frame`.
pub fn to_foot_frame<T: Real>(state: &PendulumState<T>, frame: &FootFrame<T>) -> PendulumState<T> {
    frame.to_frame(state)
}

/// Inverse of [`to_foot_frame`].
pub fn from_foot_frame<T: Real>(
    state: &PendulumState<T>,
    frame: &FootFrame<T>,
) -> PendulumState<T> {
    frame.from_frame(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vector::Vec2;

    #[test]
    fn horizontal_ground_is_identity() {
        let s = ContactSurface::horizontal_box(-0.1, 0.1, -0.1, 0.1, 0.0).unwrap();
        let f = foot_frame(&s).unwrap();
        let st = PendulumState::new(Vec3::new(0.3, -0.2, 0.9), Vec3::new(0.1, 0.2, -0.3));
        assert_eq!(to_foot_frame(&st, &f), st);
        assert_eq!(f.scale, 1.0);
    }

    #[test]
    fn tilted_height_direct_evaluation() {
        let th = 10.0_f64.to_radians();
        let n = Vec3::new(0.0, -th.sin(), th.cos());
        let s = ContactSurface::rectangle(Vec3::zero(), n, Vec2::new(0.1, 0.1), 0.0).unwrap();
        let f = foot_frame(&s).unwrap();
        let p = f.point_to_frame(Vec3::new(0.0, 0.5, 1.0));
        let expected = (th.cos() - th.sin() * 0.5) / th.cos();
        assert!((p.z - expected).abs() < 1e-12);
        assert!((p.z - 0.9118).abs() < 1e-4);
        assert!(f.scale >= 1.0);
    }

    #[test]
    fn vertices_map_to_zero_height() {
        let n = Vec3::new(0.2_f64, 0.1, 1.0).normalized();
        let s = ContactSurface::rectangle(Vec3::new(0.5, 0.2, 0.3), n, Vec2::new(0.12, 0.05), 1.0)
            .unwrap();
        let f = foot_frame(&s).unwrap();
        for v in s.vertices() {
            assert!(f.point_to_frame(*v).z.abs() < 1e-12);
        }
        let flat = f.surface_to_frame(&s).unwrap();
        assert_eq!(flat.normal(), Vec3::unit_z());
    }
}
