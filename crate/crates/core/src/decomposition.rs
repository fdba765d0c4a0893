//! Generalized DCM, CBP and gVRP of the augmented state, its subsystem
//! split, and initialization of the virtual time state.

use serde::Serialize;

use crate::capturability::{assess_zero_step, margin_bounds};
use crate::error::{Result, VhipError};
use crate::geometry::{foot_frame, ContactSurface, INSIDE_TOLERANCE};
use crate::model::{AugmentedState, ControlInput, PendulumState, PhysicalConstants};
use crate::scalar::Real;
use crate::vector::{Vec2, Vec3};

/// Minimum CBP height for a valid decomposition, m.
pub const MIN_CBP_HEIGHT: f64 = 1e-9;

/// Quantities derived from an augmented state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecompositionView<T> {
    /// `ξ_g = r + v t_g`.
    pub xi_g: Vec3<T>,
    /// Critical ballistic point, `ξ_g − (g/2) t_g² ê_z`.
    pub phi: Vec3<T>,
    pub z_cg: T,
    /// `r_p + (g/u) ê_z`; absent without an input or when `u = 0`.
    pub gvrp: Option<Vec3<T>>,
    pub t_g: T,
}

/// Evaluates the decomposition of `aug`, in the frame `aug` is expressed in.
pub fn view<T: Real>(
    aug: &AugmentedState<T>,
    input: Option<&ControlInput<T>>,
    constants: &PhysicalConstants<T>,
) -> DecompositionView<T> {
    let t = aug.t_g;
    let xi_g = aug.pendulum.r + aug.pendulum.v * t;
    let phi = Vec3::new(xi_g.x, xi_g.y, xi_g.z - T::half() * constants.g * t * t);
    let gvrp = input
        .filter(|i| i.u > T::zero())
        .map(|i| i.cop + Vec3::unit_z() * (constants.g / i.u));
    DecompositionView {
        xi_g,
        phi,
        z_cg: phi.z,
        gvrp,
        t_g: t,
    }
}

/// Time derivatives of the three subsystems.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SubsystemDerivatives<T> {
    pub t_g: T,
    pub z_cg: T,
    pub xi_xy: Vec2<T>,
    pub r_xy: Vec2<T>,
    pub z: T,
}

/// Right-hand sides of the `(t_g, z_cg)`, `ξ_gxy` and CoM subsystems.
///
/// `aug` and `cop` must be expressed in the foot frame (`z_p = 0`).
pub fn subsystem_derivatives<T: Real>(
    aug: &AugmentedState<T>,
    u: T,
    cop: Vec3<T>,
    constants: &PhysicalConstants<T>,
) -> Result<SubsystemDerivatives<T>> {
    let t = aug.t_g;
    if t == T::zero() {
        return Err(VhipError::SingularGccm);
    }
    let g = constants.g;
    let v = view(aug, None, constants);
    let half_gt2 = T::half() * g * t * t;
    let r = aug.pendulum.r;
    Ok(SubsystemDerivatives {
        t_g: -T::one() + t * t * u,
        z_cg: u * t * (v.z_cg - half_gt2),
        xi_xy: (v.xi_g.xy() - cop.xy()) * (u * t),
        r_xy: (v.xi_g.xy() - r.xy()) / t,
        z: (v.z_cg + half_gt2 - r.z) / t,
    })
}

/// Window and margin bounds used to pick the initial `t_g`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InitializationBounds<T> {
    pub tau1: T,
    pub tau2: T,
    pub tau_crit: T,
    pub tau_icp: T,
    /// Admissible interval before the margin is applied.
    pub lower: T,
    pub upper: T,
    pub tau_min: T,
    pub tau_max: T,
    pub k: T,
}

/// Picks `t_g0 = clamp(τ_ICP, τ_min, τ_max)` for `state` over `surface`.
///
/// With `u_max` the admissible interval is the bounded-stiffness one.
pub fn initialize_tg<T: Real>(
    state: &PendulumState<T>,
    surface: &ContactSurface<T>,
    k: T,
    constants: &PhysicalConstants<T>,
    u_max: Option<T>,
) -> Result<(T, InitializationBounds<T>)> {
    if !(k >= T::zero() && k < T::half()) {
        return Err(VhipError::InvalidParameter(format!(
            "margin k must lie in [0, 0.5), got {k}"
        )));
    }
    let a = assess_zero_step(state, surface, constants, u_max)?;
    let (lower, upper) = a.feasible_tau_interval.ok_or(VhipError::NoValidTg)?;
    let line = a.window.line.ok_or(VhipError::NoValidTg)?;
    let (tau_min, tau_max) = margin_bounds(lower, upper, k);
    let t_g0 = a.window.tau_icp.max(tau_min).min(tau_max);
    let bounds = InitializationBounds {
        tau1: line.tau1,
        tau2: line.tau2,
        tau_crit: a.window.tau_crit,
        tau_icp: a.window.tau_icp,
        lower,
        upper,
        tau_min,
        tau_max,
        k,
    };
    Ok((t_g0, bounds))
}

/// CBP over the surface, above the contact plane, with positive `t_g`.
///
/// `aug` is in world coordinates; heights are checked in the foot frame.
pub fn cbp_valid<T: Real>(
    aug: &AugmentedState<T>,
    surface: &ContactSurface<T>,
    constants: &PhysicalConstants<T>,
) -> Result<bool> {
    if !(aug.t_g > T::zero()) {
        return Ok(false);
    }
    let frame = foot_frame(surface)?;
    let local = AugmentedState::new(frame.to_frame(&aug.pendulum), aug.t_g);
    let v = view(&local, None, constants);
    let inside = surface.signed_distance_xy(v.phi.xy()) >= -T::lit(INSIDE_TOLERANCE);
    Ok(inside && v.z_cg > T::lit(MIN_CBP_HEIGHT))
}

/// Resets `t_g` when the CBP of `aug` is no longer valid.
pub fn reinitialize_after_push<T: Real>(
    aug: &AugmentedState<T>,
    surface: &ContactSurface<T>,
    k: T,
    constants: &PhysicalConstants<T>,
    u_max: Option<T>,
) -> Result<AugmentedState<T>> {
    if cbp_valid(aug, surface, constants)? {
        return Ok(*aug);
    }
    let (t_g, _) = initialize_tg(&aug.pendulum, surface, k, constants, u_max)?;
    Ok(AugmentedState::new(aug.pendulum, t_g))
}
