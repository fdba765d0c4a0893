//! Point-mass pendulum model under constant angular momentum.
//!
//! The CoM obeys `r̈ = u (r − r_p) + g` with `g = (0, 0, −g)`, where the
//! normalized leg stiffness `u ≥ 0` and the CoP `r_p` are the inputs. The
//! augmented system adds the virtual time state `T_g` with
//! `Ṫ_g = −1 + T_g² u`.

use serde::{Deserialize, Serialize};

use crate::error::{diag, Result, VhipError};
use crate::scalar::Real;
use crate::vector::Vec3;

/// Gravity magnitude and robot mass.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalConstants<T> {
    /// Gravitational acceleration, m/s² (positive).
    pub g: T,
    /// Robot mass, kg. Only used to reconstruct forces.
    pub mass: T,
}

impl<T: Real> PhysicalConstants<T> {
    pub fn new(g: T, mass: T) -> Result<Self> {
        if !(g > T::zero() && g.is_finite()) {
            return Err(VhipError::InvalidParameter(format!(
                "g must be positive, got {g}"
            )));
        }
        if !(mass > T::zero() && mass.is_finite()) {
            return Err(VhipError::InvalidParameter(format!(
                "mass must be positive, got {mass}"
            )));
        }
        Ok(Self { g, mass })
    }

    /// Gravity as a vector, `(0, 0, −g)`.
    pub fn gravity(&self) -> Vec3<T> {
        Vec3::new(T::zero(), T::zero(), -self.g)
    }
}

impl<T: Real> Default for PhysicalConstants<T> {
    fn default() -> Self {
        Self {
            g: T::lit(9.81),
            mass: T::one(),
        }
    }
}

/// CoM position and velocity.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PendulumState<T> {
    pub r: Vec3<T>,
    pub v: Vec3<T>,
}

impl<T: Real> PendulumState<T> {
    pub fn new(r: Vec3<T>, v: Vec3<T>) -> Self {
        Self { r, v }
    }

    pub fn at_rest(r: Vec3<T>) -> Self {
        Self { r, v: Vec3::zero() }
    }

    pub fn is_finite(&self) -> bool {
        self.r.is_finite() && self.v.is_finite()
    }

    /// Applies an impulsive change of CoM velocity.
    pub fn pushed(self, dv: Vec3<T>) -> Self {
        Self {
            r: self.r,
            v: self.v + dv,
        }
    }
}

/// Normalized leg stiffness and CoP location.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ControlInput<T> {
    /// Normalized stiffness `u = ‖f‖ / (m ‖r − r_p‖)`, 1/s².
    pub u: T,
    /// Center of pressure, m.
    pub cop: Vec3<T>,
}

impl<T: Real> ControlInput<T> {
    pub fn new(u: T, cop: Vec3<T>) -> Self {
        Self { u, cop }
    }

    fn validate(&self) -> Result<()> {
        if !self.u.is_finite() || !self.cop.is_finite() {
            return Err(VhipError::NonFinite("control input"));
        }
        if self.u < T::zero() {
            return Err(VhipError::NegativeStiffness(diag(self.u)));
        }
        Ok(())
    }
}

/// Pendulum state plus the virtual time state `t_g`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AugmentedState<T> {
    pub pendulum: PendulumState<T>,
    pub t_g: T,
}

impl<T: Real> AugmentedState<T> {
    pub fn new(pendulum: PendulumState<T>, t_g: T) -> Self {
        Self { pendulum, t_g }
    }

    pub fn is_finite(&self) -> bool {
        self.pendulum.is_finite() && self.t_g.is_finite()
    }

    /// `self + h · d`, the Euler-style update used by the integrators.
    pub fn advanced(&self, d: &AugmentedDerivative<T>, h: T) -> Self {
        Self {
            pendulum: PendulumState {
                r: self.pendulum.r + d.r * h,
                v: self.pendulum.v + d.v * h,
            },
            t_g: self.t_g + d.t_g * h,
        }
    }
}

/// Time derivative of an [`AugmentedState`].
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct AugmentedDerivative<T> {
    pub t_g: T,
    pub r: Vec3<T>,
    pub v: Vec3<T>,
}

/// Desired rest configuration at the end of a recovery.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaptureTarget<T> {
    /// Final CoP on the contact surface.
    pub final_cop: Vec3<T>,
    /// Height of the CoM above the final CoP.
    pub final_height: T,
    /// CoM height coordinate tracked by the controllers.
    pub z_f: T,
}

impl<T: Real> CaptureTarget<T> {
    pub fn new(
        final_cop: Vec3<T>,
        final_height: T,
        surface: &crate::geometry::ContactSurface<T>,
    ) -> Result<Self> {
        if !(final_height > T::zero()) {
            return Err(VhipError::InvalidParameter(
                "final height must be positive".into(),
            ));
        }
        if !surface.contains_xy(final_cop.xy()) {
            return Err(VhipError::InvalidParameter(
                "final CoP outside the contact surface".into(),
            ));
        }
        let final_cop = surface.lift_to_plane(final_cop.xy());
        Ok(Self {
            final_cop,
            final_height,
            z_f: final_cop.z + final_height,
        })
    }

    /// Final CoM position, directly above the final CoP.
    pub fn final_com(&self) -> Vec3<T> {
        self.final_cop + Vec3::unit_z() * self.final_height
    }
}

/// `r̈ = u (r − r_p) + g`.
pub fn com_acceleration<T: Real>(
    state: &PendulumState<T>,
    input: &ControlInput<T>,
    constants: &PhysicalConstants<T>,
) -> Result<Vec3<T>> {
    input.validate()?;
    if !state.is_finite() {
        return Err(VhipError::NonFinite("pendulum state"));
    }
    Ok((state.r - input.cop) * input.u + constants.gravity())
}

/// Ground reaction force `m u (r − r_p)`; points from the CoP toward the CoM.
pub fn ground_reaction_force<T: Real>(
    state: &PendulumState<T>,
    input: &ControlInput<T>,
    constants: &PhysicalConstants<T>,
) -> Result<Vec3<T>> {
    input.validate()?;
    if !state.is_finite() {
        return Err(VhipError::NonFinite("pendulum state"));
    }
    Ok((state.r - input.cop) * (constants.mass * input.u))
}

/// Inverse of [`ground_reaction_force`]: `u = ‖f‖ / (m ‖r − r_p‖)`.
pub fn stiffness_from_force<T: Real>(
    force_magnitude: T,
    state: &PendulumState<T>,
    cop: Vec3<T>,
    constants: &PhysicalConstants<T>,
) -> Result<T> {
    if !force_magnitude.is_finite() || force_magnitude < T::zero() {
        return Err(VhipError::InvalidParameter(
            "force magnitude must be finite and nonnegative".into(),
        ));
    }
    let leg = (state.r - cop).norm();
    if !(leg > T::zero()) {
        return Err(VhipError::CoincidentCop);
    }
    Ok(force_magnitude / (constants.mass * leg))
}

/// Right-hand side of the augmented 7-state system.
pub fn augmented_derivative<T: Real>(
    state: &AugmentedState<T>,
    input: &ControlInput<T>,
    constants: &PhysicalConstants<T>,
) -> Result<AugmentedDerivative<T>> {
    let v = com_acceleration(&state.pendulum, input, constants)?;
    Ok(AugmentedDerivative {
        t_g: -T::one() + state.t_g * state.t_g * input.u,
        r: state.pendulum.v,
        v,
    })
}

/// Planar angular momentum about the CoP, `w = (x − x_p) ẏ − (y − y_p) ẋ`.
///
/// Conserved whenever the CoP is fixed; zero exactly when the horizontal
/// velocity is radial with respect to the CoP.
pub fn planar_angular_momentum<T: Real>(state: &PendulumState<T>, cop: Vec3<T>) -> T {
    (state.r - cop).xy().cross(state.v.xy())
}
