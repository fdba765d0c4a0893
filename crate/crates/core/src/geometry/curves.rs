//! Instantaneous curves parametrized by the virtual time `τ`.

use crate::model::{PendulumState, PhysicalConstants};
use crate::scalar::Real;
use crate::vector::Vec3;

/// Free-fall parabola from the current state, `r + v τ − (g/2) τ² ê_z`.
pub fn ballistic_point<T: Real>(
    state: &PendulumState<T>,
    tau: T,
    constants: &PhysicalConstants<T>,
) -> Vec3<T> {
    state.r + state.v * tau + constants.gravity() * (T::half() * tau * tau)
}

/// Instantaneous capture curve, `r + v τ − g τ² ê_z`.
pub fn icc_point<T: Real>(
    state: &PendulumState<T>,
    tau: T,
    constants: &PhysicalConstants<T>,
) -> Vec3<T> {
    state.r + state.v * tau + constants.gravity() * (tau * tau)
}

/// Instantaneous divergent curve, `r + v τ`.
pub fn idc_point<T: Real>(state: &PendulumState<T>, tau: T) -> Vec3<T> {
    state.r + state.v * tau
}

/// Positive root of `z + ż τ − k τ² = 0` for `z > 0`, `k > 0`.
///
/// Uses the cancellation-free form of the quadratic formula.
pub fn descending_root<T: Real>(z: T, zdot: T, k: T) -> T {
    let s = (zdot * zdot + T::lit(4.0) * k * z).sqrt();
    if zdot >= T::zero() {
        (zdot + s) / (T::two() * k)
    } else {
        T::two() * z / (s - zdot)
    }
}

/// Time for the ballistic parabola to reach height zero.
pub fn ballistic_ground_time<T: Real>(z: T, zdot: T, g: T) -> T {
    descending_root(z, zdot, T::half() * g)
}

/// Time for the capture curve to reach height zero (classical ICP time).
pub fn icc_ground_time<T: Real>(z: T, zdot: T, g: T) -> T {
    descending_root(z, zdot, g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k() -> PhysicalConstants<f64> {
        PhysicalConstants::default()
    }

    #[test]
    fn curves_at_zero_are_identity() {
        let s = PendulumState::new(Vec3::new(0.1, 0.2, 0.9), Vec3::new(0.5, -0.2, 0.1));
        assert_eq!(ballistic_point(&s, 0.0, &k()), s.r);
        assert_eq!(icc_point(&s, 0.0, &k()), s.r);
        assert_eq!(idc_point(&s, 0.0), s.r);
    }

    #[test]
    fn ballistic_direct_evaluation() {
        let s = PendulumState::new(Vec3::new(0.0, 0.0, 1.0), Vec3::new(1.0, 0.0, 0.0));
        let p = ballistic_point(&s, 0.5, &k());
        assert!((p - Vec3::new(0.5, 0.0, -0.22625)).max_abs() < 1e-12);
    }

    #[test]
    fn vertical_drop_keeps_xy() {
        let s = PendulumState::new(Vec3::new(0.3, -0.1, 1.0), Vec3::new(0.0, 0.0, 0.4));
        for tau in [0.1, 0.5, 2.0] {
            let p = ballistic_point(&s, tau, &k());
            assert_eq!((p.x, p.y), (0.3, -0.1));
        }
    }

    #[test]
    fn idc_direct_evaluation() {
        let s = PendulumState::new(Vec3::new(1.0, 2.0, 3.0), Vec3::new(-1.0, 0.0, 1.0));
        assert_eq!(idc_point(&s, 2.0), Vec3::new(-1.0, 2.0, 5.0));
        let rest = PendulumState::at_rest(Vec3::new(1.0, 2.0, 3.0));
        assert_eq!(idc_point(&rest, 7.0), rest.r);
    }

    #[test]
    fn icc_crosses_ground_at_capture_time() {
        let s = PendulumState::at_rest(Vec3::new(0.0, 0.0, 1.0));
        let t = icc_ground_time(1.0, 0.0, 9.81);
        assert!((t - (1.0_f64 / 9.81).sqrt()).abs() < 1e-12);
        assert!(icc_point(&s, t, &k()).z.abs() < 1e-12);
        let tc = ballistic_ground_time(1.0, 0.0, 9.81);
        assert!((tc - (2.0_f64 / 9.81).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn icc_below_ibt() {
        let s = PendulumState::new(Vec3::new(0.0, 0.0, 1.0), Vec3::new(0.3, 0.1, 0.4));
        for i in 1..50 {
            let tau = i as f64 * 0.05;
            assert!(icc_point(&s, tau, &k()).z < ballistic_point(&s, tau, &k()).z);
        }
    }

    #[test]
    fn roots_stable_for_fast_descent() {
        // ż strongly negative: naive formula loses digits.
        let (z, zd, g) = (1e-6_f64, -50.0, 9.81);
        let t = ballistic_ground_time(z, zd, g);
        let resid = z + zd * t - 0.5 * g * t * t;
        assert!(t > 0.0 && resid.abs() < 1e-18);
    }
}
