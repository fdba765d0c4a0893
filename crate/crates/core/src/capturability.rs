//! 0-step capturability for fixed and variable CoP, the fixed-CoP capture
//! segment and the separating-plane certificate of non-capturability.

use serde::{Deserialize, Serialize};

use crate::error::{diag, Result, VhipError};
use crate::geometry::{
    foot_frame, icc_ground_time, tau_window, ContactSurface, TauWindow, MIN_HORIZONTAL_SPEED,
};
use crate::model::{PendulumState, PhysicalConstants};
use crate::scalar::Real;
use crate::vector::{Vec2, Vec3};

/// Minimum length of a feasible τ-interval, s.
pub const MIN_INTERVAL: f64 = 1e-9;
/// Relative tolerance on `w` for "CoP on the ballistic line".
pub const W_RELATIVE_TOLERANCE: f64 = 1e-9;
/// Absolute floor of the same test, m²/s; covers roundoff near rest.
pub const W_ABSOLUTE_TOLERANCE: f64 = 1e-10;
/// Default initialization margin `k`.
pub const DEFAULT_MARGIN: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FailureReason {
    /// The foot lies on one side of the ballistic line.
    MissesBallisticLine,
    /// Every crossing point lies at or above the ballistic trajectory.
    AboveBallisticTrajectory,
    /// The foot is crossed only behind the push direction (`τ₂ ≤ 0`).
    BehindPush,
    /// Capturable with unbounded stiffness only.
    BoundedUShifted,
}

impl FailureReason {
    pub fn tag(self) -> &'static str {
        match self {
            Self::MissesBallisticLine => "misses-ballistic-line",
            Self::AboveBallisticTrajectory => "above-ballistic-trajectory",
            Self::BehindPush => "behind-push",
            Self::BoundedUShifted => "bounded-u-shifted",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CaptureAssessment<T> {
    pub capturable: bool,
    pub window: TauWindow<T>,
    /// Feasible τ-interval of the verdict (bounded when `u_max` is given).
    pub feasible_tau_interval: Option<(T, T)>,
    /// Fixed CoP on the ballistic line at the middle of the feasible interval.
    pub suggested_fixed_cop: Option<Vec3<T>>,
    /// `clamp(τ_ICP, τ_min, τ_max)` with the default margin.
    pub suggested_t_g0: Option<T>,
    pub failure_reasons: Vec<FailureReason>,
    pub u_max: Option<T>,
}

/// Margin-shrunk bounds `(τ_min, τ_max)` of an interval `(lo, hi)`.
pub fn margin_bounds<T: Real>(lo: T, hi: T, k: T) -> (T, T) {
    (k * hi + (T::one() - k) * lo, (T::one() - k) * hi + k * lo)
}

/// Sub-interval of `(lo, hi)` admissible with stiffness at most `u_max`.
fn bounded_interval<T: Real>(lo: T, hi: T, z: T, zdot: T, u_max: T, g: T) -> Option<(T, T)> {
    let lo = lo.max(T::one() / u_max.sqrt());
    // z + ż τ − g/2 τ² > g / (2 u_max)
    let rest = z - g / (T::two() * u_max);
    let disc = zdot * zdot + T::two() * g * rest;
    if disc <= T::zero() {
        return None;
    }
    let s = disc.sqrt();
    let lo = lo.max((zdot - s) / g);
    let hi = hi.min((zdot + s) / g);
    (hi - lo > T::lit(MIN_INTERVAL)).then_some((lo, hi))
}

/// Exact 0-step capturability verdict of `state` over `surface`.
pub fn assess_zero_step<T: Real>(
    state: &PendulumState<T>,
    surface: &ContactSurface<T>,
    constants: &PhysicalConstants<T>,
    u_max: Option<T>,
) -> Result<CaptureAssessment<T>> {
    if let Some(m) = u_max {
        if !(m > T::zero() && m.is_finite()) {
            return Err(VhipError::InvalidParameter(format!(
                "u_max must be positive, got {}",
                m
            )));
        }
    }
    let window = tau_window(state, surface, constants)?;
    let unbounded = window
        .feasible()
        .filter(|(lo, hi)| *hi - *lo > T::lit(MIN_INTERVAL));

    let mut failure_reasons = Vec::new();
    let interval = match (window.line, unbounded) {
        (None, _) => {
            failure_reasons.push(FailureReason::MissesBallisticLine);
            None
        }
        (Some(c), None) => {
            failure_reasons.push(if c.tau2 <= T::zero() {
                FailureReason::BehindPush
            } else {
                FailureReason::AboveBallisticTrajectory
            });
            None
        }
        (Some(_), Some((lo, hi))) => match u_max {
            None => Some((lo, hi)),
            Some(m) => {
                let local = foot_frame(surface)?.to_frame(state);
                let b = bounded_interval(lo, hi, local.r.z, local.v.z, m, constants.g);
                if b.is_none() {
                    failure_reasons.push(FailureReason::BoundedUShifted);
                }
                b
            }
        },
    };

    let suggested_fixed_cop = interval.map(|(lo, hi)| {
        let tau = T::half() * (lo + hi);
        surface.lift_to_plane(state.r.xy() + state.v.xy() * tau)
    });
    let suggested_t_g0 = interval.map(|(lo, hi)| {
        let (tmin, tmax) = margin_bounds(lo, hi, T::lit(DEFAULT_MARGIN));
        window.tau_icp.max(tmin).min(tmax)
    });
    Ok(CaptureAssessment {
        capturable: interval.is_some(),
        window,
        feasible_tau_interval: interval,
        suggested_fixed_cop,
        suggested_t_g0,
        failure_reasons,
        u_max,
    })
}

/// Fixed-CoP quantities in the CoP-centred ballistic plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FixedCopDiagnostics<T> {
    /// Planar angular momentum about the CoP, m²/s.
    pub w: T,
    /// Time for the horizontal motion to reach the CoP column, s.
    pub t: T,
    /// Height of the ballistic parabola over the CoP, m.
    pub z_c: T,
}

impl<T: Real> FixedCopDiagnostics<T> {
    pub fn capturable(&self) -> bool {
        self.t > T::zero() && self.z_c > T::zero()
    }
}

/// Largest `|w|` still treated as "CoP on the ballistic line".
pub(crate) fn w_tolerance<T: Real>(rel_xy: T, v_xy: T) -> T {
    T::lit(W_RELATIVE_TOLERANCE) * rel_xy * v_xy + T::lit(W_ABSOLUTE_TOLERANCE)
}

/// Evaluates `w`, `T` and `z_c` of `state` for a CoP fixed at `cop`.
pub fn fixed_cop_diagnostics<T: Real>(
    state: &PendulumState<T>,
    cop: Vec3<T>,
    constants: &PhysicalConstants<T>,
) -> Result<FixedCopDiagnostics<T>> {
    if !state.is_finite() || !cop.is_finite() {
        return Err(VhipError::NonFinite("fixed-CoP diagnostics input"));
    }
    let rel = state.r - cop;
    let (rel_xy, v_xy) = (rel.xy(), state.v.xy());
    let w = rel_xy.cross(v_xy);
    if w.abs() > w_tolerance(rel_xy.norm(), v_xy.norm()) {
        return Err(VhipError::NotOnBallisticLine(diag(w)));
    }
    let g = constants.g;
    let speed = v_xy.norm();
    if speed < T::lit(MIN_HORIZONTAL_SPEED) {
        if rel_xy.norm() > T::lit(MIN_HORIZONTAL_SPEED) {
            return Err(VhipError::DegenerateVertical);
        }
        // CoM straight above the CoP: the capture-curve root plays the role of T.
        if rel.z <= T::zero() {
            return Ok(FixedCopDiagnostics {
                w,
                t: T::zero(),
                z_c: rel.z,
            });
        }
        let t = icc_ground_time(rel.z, state.v.z, g);
        return Ok(FixedCopDiagnostics {
            w,
            t,
            z_c: rel.z + state.v.z * t - T::half() * g * t * t,
        });
    }
    let x = rel_xy.dot(v_xy) / speed;
    let t = -x / speed;
    let z_c = rel.z + state.v.z * t - T::half() * g * t * t;
    Ok(FixedCopDiagnostics { w, t, z_c })
}

/// Endpoints of the 1D fixed-CoP capture region on the contact plane.
pub fn fixed_cop_capture_segment<T: Real>(
    state: &PendulumState<T>,
    surface: &ContactSurface<T>,
    constants: &PhysicalConstants<T>,
) -> Result<Option<(Vec3<T>, Vec3<T>)>> {
    let a = assess_zero_step(state, surface, constants, None)?;
    Ok(a.feasible_tau_interval.map(|(lo, hi)| {
        let at = |tau: T| surface.lift_to_plane(state.r.xy() + state.v.xy() * tau);
        (at(lo), at(hi))
    }))
}

/// Plane `n_B·r = c` with `n_B = (−a, −b, 1)` separating the contact surface
/// (above) from the forward ballistic trajectory (below).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SeparationCertificate<T> {
    pub plane_normal: Vec3<T>,
    pub plane_offset: T,
    /// `n_B·r(0) − c`.
    pub initial_h_m2: T,
    /// Peak of the forward ballistic trajectory over the plane,
    /// `n_B·r(0) − c + max(n_B·v(0), 0)² / (2g)`.
    pub initial_h_m: T,
    /// `n_B·v(0)`.
    pub initial_rate: T,
    /// `min_p n_B·p − c` over the surface vertices.
    pub clearance: T,
}

impl<T: Real> SeparationCertificate<T> {
    pub fn h_m2(&self, state: &PendulumState<T>) -> T {
        self.plane_normal.dot(state.r) - self.plane_offset
    }

    /// Peak height over the plane of the ballistic arc for `τ ≥ 0`.
    pub fn h_m(&self, state: &PendulumState<T>, g: T) -> T {
        let q = self.plane_normal.dot(state.v).max(T::zero());
        self.h_m2(state) + q * q / (T::two() * g)
    }

    /// Peak over all `τ ∈ ℝ` (the whole parabola).
    pub fn h_m_full(&self, state: &PendulumState<T>, g: T) -> T {
        let q = self.plane_normal.dot(state.v);
        self.h_m2(state) + q * q / (T::two() * g)
    }

    pub fn is_valid(&self) -> bool {
        self.clearance > T::zero() && self.initial_h_m < T::zero()
    }
}

const GRID_HALF_WIDTH: f64 = 10.0;
const GRID_POINTS: usize = 101;
const MAX_SLOPE: f64 = 1e3;
const PATTERN_ITERATIONS: usize = 4000;

/// Separating-plane gap for slopes `(a, b)`: vertex clearance minus the peak
/// of the forward ballistic trajectory.
fn plane_gap<T: Real>(
    a: T,
    b: T,
    state: &PendulumState<T>,
    vertices: &[Vec3<T>],
    g: T,
) -> (T, T, T) {
    let n = Vec3::new(-a, -b, T::one());
    let low = vertices
        .iter()
        .map(|p| n.dot(*p))
        .fold(T::infinity(), T::min);
    let q = n.dot(state.v).max(T::zero());
    let peak = n.dot(state.r) + q * q / (T::two() * g);
    (low - peak, low, peak)
}

/// Compass search with rotating directions and step expansion.
fn pattern_ascent<T: Real>(start: Vec2<T>, step0: T, f: &impl Fn(Vec2<T>) -> T) -> Vec2<T> {
    let mut p = start;
    let mut best = f(p);
    let mut step = step0;
    let mut phase = T::zero();
    let golden = T::lit(2.399_963_229_728_653);
    let dirs = 16;
    for _ in 0..PATTERN_ITERATIONS {
        let mut moved = false;
        for k in 0..dirs {
            let ang = phase + T::two() * T::PI() * T::lit(k as f64) / T::lit(dirs as f64);
            let cand = p + Vec2::new(ang.cos(), ang.sin()) * step;
            if cand.x.abs() > T::lit(MAX_SLOPE) || cand.y.abs() > T::lit(MAX_SLOPE) {
                continue;
            }
            let val = f(cand);
            if val > best {
                best = val;
                p = cand;
                moved = true;
                break;
            }
        }
        if moved {
            step *= T::two();
        } else {
            step *= T::half();
            phase += golden;
            if step < T::lit(1e-12) * (T::one() + p.norm()) {
                break;
            }
        }
    }
    p
}

/// Searches for a plane certifying that `state` cannot be captured over
/// `surface`. Returns `None` when no valid plane is found.
pub fn separation_certificate<T: Real>(
    state: &PendulumState<T>,
    surface: &ContactSurface<T>,
    constants: &PhysicalConstants<T>,
) -> Option<SeparationCertificate<T>> {
    if !state.is_finite() {
        return None;
    }
    let g = constants.g;
    let verts = surface.vertices();
    let gap = |s: Vec2<T>| plane_gap(s.x, s.y, state, verts, g).0;

    let spacing = T::lit(2.0 * GRID_HALF_WIDTH / (GRID_POINTS - 1) as f64);
    let mut start = Vec2::zero();
    let mut best = T::neg_infinity();
    for i in 0..GRID_POINTS {
        for j in 0..GRID_POINTS {
            let s = Vec2::new(
                T::lit(-GRID_HALF_WIDTH) + spacing * T::lit(i as f64),
                T::lit(-GRID_HALF_WIDTH) + spacing * T::lit(j as f64),
            );
            let v = gap(s);
            if v > best {
                best = v;
                start = s;
            }
        }
    }
    let mut slopes = pattern_ascent(start, spacing, &gap);
    if gap(slopes) > T::zero() {
        // Widen the margin in geometric units.
        let normalized = |s: Vec2<T>| {
            let v = gap(s);
            if v > T::zero() {
                v / (T::one() + s.norm_squared()).sqrt()
            } else {
                v
            }
        };
        slopes = pattern_ascent(slopes, spacing, &normalized);
    }

    let (value, low, peak) = plane_gap(slopes.x, slopes.y, state, verts, g);
    if !(value > T::zero()) {
        return None;
    }
    let n = Vec3::new(-slopes.x, -slopes.y, T::one());
    let c = T::half() * (low + peak);
    let clearance = verts
        .iter()
        .map(|p| n.dot(*p) - c)
        .fold(T::infinity(), T::min);
    let cert = SeparationCertificate {
        plane_normal: n,
        plane_offset: c,
        initial_h_m2: n.dot(state.r) - c,
        initial_h_m: T::zero(),
        initial_rate: n.dot(state.v),
        clearance,
    };
    let cert = SeparationCertificate {
        initial_h_m: cert.h_m(state, g),
        ..cert
    };
    cert.is_valid().then_some(cert)
}

/// `h_m` along a trajectory.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonitorReport<T> {
    pub h_m: Vec<T>,
    pub max_h_m: T,
    /// Index of the first sample with `h_m ≥ 0`, if any.
    pub first_nonnegative: Option<usize>,
    /// Largest single-sample increase of `h_m`.
    pub max_increase: T,
}

impl<T: Real> MonitorReport<T> {
    /// `h_m` stayed negative over every sample.
    pub fn stays_negative(&self) -> bool {
        self.first_nonnegative.is_none()
    }
}

/// Evaluates `h_m` on every sample of a trajectory.
pub fn certificate_monitor<T: Real>(
    certificate: &SeparationCertificate<T>,
    samples: &[PendulumState<T>],
    constants: &PhysicalConstants<T>,
) -> MonitorReport<T> {
    let h_m: Vec<T> = samples
        .iter()
        .map(|s| certificate.h_m(s, constants.g))
        .collect();
    let max_h_m = h_m.iter().copied().fold(T::neg_infinity(), T::max);
    let first_nonnegative = h_m.iter().position(|h| *h >= T::zero());
    let max_increase = h_m
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(T::neg_infinity(), T::max);
    MonitorReport {
        h_m,
        max_h_m,
        first_nonnegative,
        max_increase,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ballistic_point;

    fn k() -> PhysicalConstants<f64> {
        PhysicalConstants::default()
    }

    fn side_foot() -> ContactSurface<f64> {
        ContactSurface::horizontal_box(0.05, 0.15, -0.05, 0.05, 0.0).unwrap()
    }

    fn forward_state() -> PendulumState<f64> {
        PendulumState::new(Vec3::new(0.0, 0.0, 1.0), Vec3::new(0.4, 0.0, 0.0))
    }

    #[test]
    fn forward_window_capturable() {
        let a = assess_zero_step(&forward_state(), &side_foot(), &k(), None).unwrap();
        assert!(a.capturable && a.failure_reasons.is_empty());
        let (lo, hi) = a.feasible_tau_interval.unwrap();
        assert!((lo - 0.125).abs() < 1e-12 && (hi - 0.375).abs() < 1e-12);
        assert!((a.window.tau_crit - 0.4515).abs() < 1e-4);
        let cop = a.suggested_fixed_cop.unwrap();
        assert!((cop - Vec3::new(0.1, 0.0, 0.0)).max_abs() < 1e-12);
    }

    #[test]
    fn bounded_stiffness_removes_window() {
        let a = assess_zero_step(&forward_state(), &side_foot(), &k(), Some(9.81)).unwrap();
        assert!(!a.capturable);
        assert_eq!(a.failure_reasons, vec![FailureReason::BoundedUShifted]);
        // Ballistic height at the window end is below g/(2 u_max).
        let z = ballistic_point(&forward_state(), 0.375, &k()).z;
        assert!((z - 0.310).abs() < 1e-3);
    }

    #[test]
    fn foot_beside_line_misses() {
        let s = PendulumState::new(Vec3::new(0.0, 0.3, 1.0), Vec3::new(0.4, 0.0, 0.0));
        let a = assess_zero_step(&s, &side_foot(), &k(), None).unwrap();
        assert!(!a.capturable);
        assert_eq!(a.failure_reasons, vec![FailureReason::MissesBallisticLine]);
        assert!(separation_certificate(&s, &side_foot(), &k()).is_some());
    }

    #[test]
    fn foot_beyond_trajectory_is_above() {
        let s = PendulumState::new(Vec3::new(0.0, 0.0, 0.5), Vec3::new(3.0, 0.0, 0.0));
        let foot = ContactSurface::horizontal_box(1.5, 1.7, -0.1, 0.1, 0.0).unwrap();
        let a = assess_zero_step(&s, &foot, &k(), None).unwrap();
        assert!(a.window.line.unwrap().tau1 >= a.window.tau_crit);
        assert_eq!(
            a.failure_reasons,
            vec![FailureReason::AboveBallisticTrajectory]
        );
        assert!(separation_certificate(&s, &foot, &k()).is_some());
    }

    #[test]
    fn foot_behind_push() {
        let s = PendulumState::new(Vec3::new(0.3, 0.0, 1.0), Vec3::new(0.5, 0.0, 0.0));
        let foot = ContactSurface::horizontal_box(-0.1, 0.1, -0.1, 0.1, 0.0).unwrap();
        let a = assess_zero_step(&s, &foot, &k(), None).unwrap();
        assert_eq!(a.failure_reasons, vec![FailureReason::BehindPush]);
        let c = separation_certificate(&s, &foot, &k()).unwrap();
        assert!(c.initial_h_m < 0.0 && c.clearance > 0.0);
    }

    #[test]
    fn capturable_state_has_no_certificate() {
        assert!(separation_certificate(&forward_state(), &side_foot(), &k()).is_none());
    }

    #[test]
    fn capture_segment_endpoints() {
        let (p, q) = fixed_cop_capture_segment(&forward_state(), &side_foot(), &k())
            .unwrap()
            .unwrap();
        assert!((p - Vec3::new(0.05, 0.0, 0.0)).max_abs() < 1e-12);
        assert!((q - Vec3::new(0.15, 0.0, 0.0)).max_abs() < 1e-12);

        let rest = PendulumState::at_rest(Vec3::new(0.1, 0.0, 1.0));
        let (p, q) = fixed_cop_capture_segment(&rest, &side_foot(), &k())
            .unwrap()
            .unwrap();
        assert_eq!(p, q);
        assert_eq!(p, Vec3::new(0.1, 0.0, 0.0));

        let s = PendulumState::new(Vec3::new(0.0, 0.3, 1.0), Vec3::new(0.4, 0.0, 0.0));
        assert!(fixed_cop_capture_segment(&s, &side_foot(), &k())
            .unwrap()
            .is_none());
    }

    #[test]
    fn diagnostics_direct_evaluation() {
        let s = PendulumState::new(Vec3::new(0.2, 0.0, 1.0), Vec3::new(-1.0, 0.0, 0.0));
        let d = fixed_cop_diagnostics(&s, Vec3::zero(), &k()).unwrap();
        assert_eq!(d.w, 0.0);
        assert!((d.t - 0.2).abs() < 1e-12 && (d.z_c - 0.8038).abs() < 1e-12);
        assert!(d.capturable());

        let s = PendulumState::new(Vec3::new(0.2, 0.0, 0.1), Vec3::new(-2.0, 0.0, 0.0));
        let d = fixed_cop_diagnostics(&s, Vec3::zero(), &k()).unwrap();
        assert!((d.t - 0.1).abs() < 1e-12 && (d.z_c - 0.05095).abs() < 1e-12);
        let s = PendulumState::new(Vec3::new(0.2, 0.0, 0.1), Vec3::new(-2.0, 0.0, -3.0));
        let d = fixed_cop_diagnostics(&s, Vec3::zero(), &k()).unwrap();
        assert!(d.z_c < 0.0 && !d.capturable());
    }

    #[test]
    fn off_line_cop_violates_w() {
        let s = PendulumState::new(Vec3::new(0.2, 0.1, 1.0), Vec3::new(-1.0, 0.0, 0.0));
        assert!(matches!(
            fixed_cop_diagnostics(&s, Vec3::zero(), &k()),
            Err(VhipError::NotOnBallisticLine(_))
        ));
    }

    #[test]
    fn vertical_motion_cases() {
        let s = PendulumState::new(Vec3::new(0.0, 0.0, 1.0), Vec3::new(0.0, 0.0, 0.2));
        let d = fixed_cop_diagnostics(&s, Vec3::zero(), &k()).unwrap();
        assert!(d.capturable());
        let s = PendulumState::at_rest(Vec3::new(0.1, 0.0, 1.0));
        assert_eq!(
            fixed_cop_diagnostics(&s, Vec3::zero(), &k()),
            Err(VhipError::DegenerateVertical)
        );
    }

    #[test]
    fn free_fall_keeps_h_m_constant() {
        let s = PendulumState::new(Vec3::new(0.0, 0.3, 1.0), Vec3::new(0.4, 0.0, 0.1));
        let cert = separation_certificate(&s, &side_foot(), &k()).unwrap();
        let samples: Vec<_> = (0..50)
            .map(|i| {
                let t = i as f64 * 0.01;
                let r = ballistic_point(&s, t, &k());
                PendulumState::new(r, s.v + k().gravity() * t)
            })
            .collect();
        let rep = certificate_monitor(&cert, &samples, &k());
        assert!(rep.stays_negative());
        let scale = rep.h_m.iter().fold(1.0_f64, |m, h| m.max(h.abs()));
        assert!(rep.max_increase <= 1e-12 * scale);
        // Constant while the arc still rises relative to the plane.
        for (s, h) in samples.iter().zip(&rep.h_m) {
            if cert.plane_normal.dot(s.v) > 0.0 {
                assert!((h - rep.h_m[0]).abs() < 1e-12 * scale);
            }
        }
    }

    #[test]
    fn margin_bounds_collapse_at_zero() {
        assert_eq!(margin_bounds(0.1, 0.3, 0.0), (0.1, 0.3));
        let (a, b) = margin_bounds(0.1_f64, 0.3, 0.05);
        assert!((a - 0.11).abs() < 1e-15 && (b - 0.29).abs() < 1e-15);
    }

    #[test]
    fn tags_are_kebab_case() {
        let j = serde_json::to_string(&FailureReason::BoundedUShifted).unwrap();
        assert_eq!(j, "\"bounded-u-shifted\"");
        assert_eq!(FailureReason::BehindPush.tag(), "behind-push");
    }
}
