use serde::Serialize;

use crate::error::{diag, Result, VhipError};
use crate::geometry::curves::{ballistic_ground_time, icc_ground_time};
use crate::geometry::frame::foot_frame;
use crate::geometry::surface::ContactSurface;
use crate::model::{PendulumState, PhysicalConstants};
use crate::scalar::Real;

/// Horizontal speed below which the ballistic line collapses to a point.
pub const MIN_HORIZONTAL_SPEED: f64 = 1e-9;

/// Parameters of the XY ballistic line where it enters and leaves the polygon.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LineCrossing<T> {
    pub tau1: T,
    pub tau2: T,
}

/// τ-window of the current state over a contact surface.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TauWindow<T> {
    /// Crossing of the whole ballistic line (`τ ∈ ℝ`); `None` when the line
    /// misses the polygon. Parameters may be negative.
    pub line: Option<LineCrossing<T>>,
    /// Ballistic height-zero crossing in the foot frame.
    pub tau_crit: T,
    /// Capture-curve height-zero crossing in the foot frame.
    pub tau_icp: T,
    /// No polygon point on the line for `τ ≥ 0`.
    pub empty: bool,
}

impl<T: Real> TauWindow<T> {
    /// `(max(τ₁, 0), min(τ₂, τ_crit))` when nonempty.
    pub fn feasible(&self) -> Option<(T, T)> {
        let c = self.line?;
        let lo = c.tau1.max(T::zero());
        let hi = c.tau2.min(self.tau_crit);
        (hi > lo).then_some((lo, hi))
    }
}

/// Computes the τ-window of `state` over `surface`.
///
/// Heights are measured in the foot frame of the surface; the XY line is the
/// same in every frame.
pub fn tau_window<T: Real>(
    state: &PendulumState<T>,
    surface: &ContactSurface<T>,
    constants: &PhysicalConstants<T>,
) -> Result<TauWindow<T>> {
    if !state.is_finite() {
        return Err(VhipError::NonFinite("pendulum state"));
    }
    let frame = foot_frame(surface)?;
    let local = frame.to_frame(state);
    let (z, zdot) = (local.r.z, local.v.z);
    if !(z > T::zero()) {
        return Err(VhipError::DegenerateState(diag(z)));
    }
    let g = constants.g;
    let tau_crit = ballistic_ground_time(z, zdot, g);
    let tau_icp = icc_ground_time(z, zdot, g);

    let p0 = local.r.xy();
    let d = local.v.xy();
    let line = if d.norm() < T::lit(MIN_HORIZONTAL_SPEED) {
        surface.contains_xy(p0).then_some(LineCrossing {
            tau1: T::zero(),
            tau2: tau_crit,
        })
    } else {
        surface
            .clip_line(p0, d)
            .map(|(tau1, tau2)| LineCrossing { tau1, tau2 })
    };
    let empty = line.is_none_or(|c| c.tau2 <= T::zero());
    Ok(TauWindow {
        line,
        tau_crit,
        tau_icp,
        empty,
    })
}
