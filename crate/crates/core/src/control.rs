//! Feedback laws: CoP command with polygon saturation, the clipped
//! orbital-energy stiffness, its bounded-stiffness wrapper and the fixed-CoP
//! planar controller.

use serde::{Deserialize, Serialize};

use crate::capturability::{w_tolerance, DEFAULT_MARGIN};
use crate::decomposition::{view, DecompositionView};
use crate::error::{diag, Result, VhipError};
use crate::geometry::{icc_ground_time, ContactSurface, INSIDE_TOLERANCE, MIN_HORIZONTAL_SPEED};
use crate::model::{AugmentedState, ControlInput, PendulumState, PhysicalConstants};
use crate::scalar::Real;
use crate::vector::{Vec2, Vec3};

/// Smallest `t_g` accepted by the stiffness laws, s.
pub const MIN_TG: f64 = 1e-6;
/// Smallest `b` accepted by the orbital-energy law, m/s.
pub const MIN_B: f64 = 1e-9;
/// Default proportional CoP gain.
pub const DEFAULT_KP: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControllerKind {
    OrbitalEnergy,
    Bounded,
    FixedCop,
}

/// Gain schedule of the CoP law `r_p = ξ + k_eff (ξ − ξ_target)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum CopLaw<T> {
    /// Constant `k_eff = k_p`.
    Proportional { k_p: T },
    /// `k_eff = k_p / (u t_g)`: `ξ_g` decays exactly like `exp(−k_p t)`.
    Exponential { k_p: T },
}

impl<T: Real> CopLaw<T> {
    pub fn gain(&self) -> T {
        match *self {
            Self::Proportional { k_p } | Self::Exponential { k_p } => k_p,
        }
    }

    fn nominal(&self, u: T, t_g: T) -> T {
        match *self {
            Self::Proportional { k_p } => k_p,
            Self::Exponential { k_p } => {
                let ut = u * t_g;
                if ut > T::zero() {
                    k_p / ut
                } else {
                    T::infinity()
                }
            }
        }
    }
}

impl<T: Real> Default for CopLaw<T> {
    fn default() -> Self {
        Self::Proportional {
            k_p: T::lit(DEFAULT_KP),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct ControllerConfig<T> {
    pub kind: ControllerKind,
    /// Target CoM height above the contact plane, m.
    pub z_f: T,
    /// Final `ξ_gxy`; the surface centroid when absent.
    #[serde(default)]
    pub xi_target: Option<Vec2<T>>,
    #[serde(default)]
    pub cop_law: CopLaw<T>,
    #[serde(default)]
    pub u_max: Option<T>,
    /// Initialization margin `k` of `t_g`.
    #[serde(default = "default_margin")]
    pub k_margin: T,
    /// CoP for [`ControllerKind::FixedCop`].
    #[serde(default)]
    pub fixed_cop: Option<Vec3<T>>,
}

fn default_margin<T: Real>() -> T {
    T::lit(DEFAULT_MARGIN)
}

impl<T: Real> ControllerConfig<T> {
    pub fn orbital_energy(z_f: T) -> Self {
        Self {
            kind: ControllerKind::OrbitalEnergy,
            z_f,
            xi_target: None,
            cop_law: CopLaw::default(),
            u_max: None,
            k_margin: T::lit(DEFAULT_MARGIN),
            fixed_cop: None,
        }
    }

    pub fn bounded(z_f: T, u_max: T) -> Self {
        Self {
            kind: ControllerKind::Bounded,
            u_max: Some(u_max),
            ..Self::orbital_energy(z_f)
        }
    }

    pub fn fixed_cop(z_f: T, cop: Vec3<T>) -> Self {
        Self {
            kind: ControllerKind::FixedCop,
            fixed_cop: Some(cop),
            ..Self::orbital_energy(z_f)
        }
    }

    /// Target `ξ_gxy`, defaulting to the polygon centroid.
    pub fn target(&self, surface: &ContactSurface<T>) -> Vec2<T> {
        self.xi_target.unwrap_or_else(|| surface.centroid_xy())
    }

    pub fn validate(&self, surface: &ContactSurface<T>) -> Result<()> {
        let bad = |m: String| Err(VhipError::Config(m));
        if !(self.z_f > T::zero() && self.z_f.is_finite()) {
            return bad(format!("z_f must be positive, got {}", self.z_f));
        }
        let k_p = self.cop_law.gain();
        if !(k_p > T::zero() && k_p.is_finite()) {
            return bad(format!("k_p must be positive, got {k_p}"));
        }
        if !(self.k_margin >= T::zero() && self.k_margin < T::half()) {
            return bad(format!(
                "k_margin must lie in [0, 0.5), got {}",
                self.k_margin
            ));
        }
        if !surface.contains_xy(self.target(surface)) {
            return bad("xi_target outside the contact surface".into());
        }
        match (self.kind, self.u_max) {
            (ControllerKind::Bounded, None) => return bad("bounded controller needs u_max".into()),
            (_, Some(m)) if !(m > T::zero() && m.is_finite()) => {
                return bad(format!("u_max must be positive, got {m}"))
            }
            _ => {}
        }
        if self.kind == ControllerKind::FixedCop {
            match self.fixed_cop {
                None => return bad("fixed_cop controller needs a CoP".into()),
                Some(c) if !surface.contains_xy(c.xy()) => {
                    return bad("fixed CoP outside the contact surface".into())
                }
                _ => {}
            }
        }
        Ok(())
    }
}

/// Saturated CoP command.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CopCommand<T> {
    pub cop: Vec3<T>,
    /// Gain actually applied.
    pub k_eff: T,
    /// `k_eff` was reduced to stay inside the polygon.
    pub saturated: bool,
}

/// CoP command `r_pxy = ξ_gxy + k_eff (ξ_gxy − ξ_target)`, lifted to the
/// contact plane, with `k_eff` reduced to keep the CoP inside the polygon.
pub fn cop_command<T: Real>(
    v: &DecompositionView<T>,
    u: T,
    law: &CopLaw<T>,
    target: Vec2<T>,
    surface: &ContactSurface<T>,
) -> Result<CopCommand<T>> {
    let xi = v.xi_g.xy();
    if !xi.is_finite() {
        return Err(VhipError::NonFinite("gDCM"));
    }
    if surface.signed_distance_xy(xi) < -T::lit(INSIDE_TOLERANCE) {
        return Err(VhipError::InfeasibleCbp);
    }
    let nominal = law.nominal(u, v.t_g);
    let d = xi - target;
    if d.norm() <= T::epsilon() {
        return Ok(CopCommand {
            cop: surface.lift_to_plane(xi),
            k_eff: nominal,
            saturated: false,
        });
    }
    let exit = surface
        .clip_line(xi, d)
        .map_or(T::zero(), |(_, hi)| hi.max(T::zero()));
    let (k_eff, saturated) = if nominal > exit {
        (exit, true)
    } else {
        (nominal, false)
    };
    Ok(CopCommand {
        cop: surface.lift_to_plane(xi + d * k_eff),
        k_eff,
        saturated,
    })
}

/// `a = −1/t_g`, `b = (z_cg + (g/2) t_g²) / t_g`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OrbitalEnergyTerms<T> {
    pub a: T,
    pub b: T,
}

impl<T: Real> OrbitalEnergyTerms<T> {
    pub fn new(t_g: T, z_cg: T, g: T) -> Result<Self> {
        if !(t_g >= T::lit(MIN_TG)) {
            return Err(VhipError::ControllerDomain(format!(
                "t_g = {t_g} below {MIN_TG}"
            )));
        }
        let b = (z_cg + T::half() * g * t_g * t_g) / t_g;
        if !(b >= T::lit(MIN_B)) {
            return Err(VhipError::ControllerDomain(format!(
                "b = {b} below {MIN_B}"
            )));
        }
        Ok(Self {
            a: -T::one() / t_g,
            b,
        })
    }

    /// Unclipped `U = −7a² + (3 z_f a³ − g a)/b − 10 a³ b / g`.
    pub fn law(&self, z_f: T, g: T) -> T {
        let (a, b) = (self.a, self.b);
        let a3 = a * a * a;
        -T::lit(7.0) * a * a + (T::lit(3.0) * z_f * a3 - g * a) / b - T::lit(10.0) * a3 * b / g
    }
}

/// Unclipped orbital-energy stiffness at `(t_g, z_cg)` with target `z_f`.
pub fn orbital_energy_raw<T: Real>(t_g: T, z_cg: T, z_f: T, g: T) -> Result<T> {
    Ok(OrbitalEnergyTerms::new(t_g, z_cg, g)?.law(z_f, g))
}

/// Clipped orbital-energy stiffness `max(U, 0)`.
///
/// `v` must be expressed in the foot frame, where `z_f` is measured.
pub fn orbital_energy_u<T: Real>(
    v: &DecompositionView<T>,
    z_f: T,
    constants: &PhysicalConstants<T>,
) -> Result<T> {
    Ok(orbital_energy_raw(v.t_g, v.z_cg, z_f, constants.g)?.max(T::zero()))
}

/// Stiffness law in units where `g = 1` and `u_max = 1`.
pub trait NormalizedLaw<T: Real> {
    fn evaluate(&self, t: T, z_c: T, z_f: T) -> Result<T>;
}

/// Orbital-energy law written in normalized coordinates.
#[derive(Clone, Copy, Debug, Default)]
pub struct NormalizedOrbitalEnergy;

impl<T: Real> NormalizedLaw<T> for NormalizedOrbitalEnergy {
    fn evaluate(&self, t: T, z_c: T, z_f: T) -> Result<T> {
        orbital_energy_raw(t, z_c, z_f, T::one())
    }
}

/// Bounded stiffness `u_max · clamp(U(√u_max t_g, u_max z_cg / g), 0, 1)`.
pub fn bounded_u<T: Real>(
    v: &DecompositionView<T>,
    z_f: T,
    u_max: T,
    law: &impl NormalizedLaw<T>,
    constants: &PhysicalConstants<T>,
) -> Result<T> {
    if !(u_max > T::zero() && u_max.is_finite()) {
        return Err(VhipError::InvalidParameter(format!(
            "u_max must be positive, got {u_max}"
        )));
    }
    let s = u_max / constants.g;
    let normalized = law.evaluate(u_max.sqrt() * v.t_g, s * v.z_cg, s * z_f)?;
    Ok(u_max * normalized.max(T::zero()).min(T::one()))
}

/// Motion of a fixed-CoP pendulum in its ballistic plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PlanarReduction<T> {
    /// Unit XY direction of the ballistic line.
    pub direction: Vec2<T>,
    /// `x₀ / y₀`, mapping the lateral coordinate onto the sagittal one.
    pub ratio_xy: Option<T>,
    /// CoP-relative `(x, z, ẋ, ż)` in the plane.
    pub x: T,
    pub z: T,
    pub xdot: T,
    pub zdot: T,
    /// Out-of-plane position and velocity; zero up to roundoff.
    pub transverse: T,
    pub transverse_rate: T,
}

/// Rotates the CoP-centred frame so the motion lies in one vertical plane.
pub fn planar_reduction<T: Real>(
    state: &PendulumState<T>,
    cop: Vec3<T>,
) -> Result<PlanarReduction<T>> {
    let rel = state.r - cop;
    let (p, v) = (rel.xy(), state.v.xy());
    let w = p.cross(v);
    if w.abs() > w_tolerance(p.norm(), v.norm()) {
        return Err(VhipError::NotOnBallisticLine(diag(w)));
    }
    let eps = T::lit(MIN_HORIZONTAL_SPEED);
    let direction = if p.norm() > eps {
        p / p.norm()
    } else if v.norm() > eps {
        v / v.norm()
    } else {
        Vec2::new(T::one(), T::zero())
    };
    let n = direction.perp();
    let ratio_xy = (direction.y.abs() > eps).then(|| direction.x / direction.y);
    Ok(PlanarReduction {
        direction,
        ratio_xy,
        x: p.dot(direction),
        z: rel.z,
        xdot: v.dot(direction),
        zdot: state.v.z,
        transverse: p.dot(n),
        transverse_rate: v.dot(n),
    })
}

/// Virtual time and CBP height of a fixed-CoP state in its ballistic plane.
pub fn fixed_cop_tg<T: Real>(
    state: &PendulumState<T>,
    cop: Vec3<T>,
    constants: &PhysicalConstants<T>,
) -> Result<(T, T)> {
    let red = planar_reduction(state, cop)?;
    let g = constants.g;
    let t = if red.xdot.abs() > T::lit(MIN_HORIZONTAL_SPEED) {
        -red.x / red.xdot
    } else if red.x.abs() <= T::lit(MIN_HORIZONTAL_SPEED) && red.z > T::zero() {
        icc_ground_time(red.z, red.zdot, g)
    } else {
        return Err(VhipError::DegenerateVertical);
    };
    let z_c = red.z + red.zdot * t - T::half() * g * t * t;
    if !(t > T::zero() && z_c > T::zero()) {
        return Err(VhipError::NotCapturable {
            t: diag(t),
            z_c: diag(z_c),
        });
    }
    Ok((t, z_c))
}

/// Orbital-energy stiffness for a CoP held at `cop`; `z_f` is measured in
/// the frame of `state` and `cop`.
pub fn fixed_cop_controller<T: Real>(
    state: &PendulumState<T>,
    cop: Vec3<T>,
    z_f: T,
    constants: &PhysicalConstants<T>,
) -> Result<ControlInput<T>> {
    let (t, z_c) = fixed_cop_tg(state, cop, constants)?;
    let u = orbital_energy_raw(t, z_c, z_f - cop.z, constants.g)?.max(T::zero());
    Ok(ControlInput::new(u, cop))
}

/// One evaluation of a configured controller.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ControlOutput<T> {
    pub input: ControlInput<T>,
    pub k_eff: Option<T>,
    pub saturated: bool,
}

/// Evaluates `config` on a foot-frame augmented state over a foot-frame
/// surface.
pub fn evaluate<T: Real>(
    config: &ControllerConfig<T>,
    aug: &AugmentedState<T>,
    surface: &ContactSurface<T>,
    constants: &PhysicalConstants<T>,
    law: &impl NormalizedLaw<T>,
) -> Result<ControlOutput<T>> {
    let v = view(aug, None, constants);
    if config.kind == ControllerKind::FixedCop {
        let cop = config
            .fixed_cop
            .ok_or_else(|| VhipError::Config("missing fixed CoP".into()))?;
        let cop = surface.lift_to_plane(cop.xy());
        let u = orbital_energy_u(&v, config.z_f - cop.z, constants)?;
        return Ok(ControlOutput {
            input: ControlInput::new(u, cop),
            k_eff: None,
            saturated: false,
        });
    }
    let u = match (config.kind, config.u_max) {
        (ControllerKind::Bounded, Some(m)) => bounded_u(&v, config.z_f, m, law, constants)?,
        (ControllerKind::Bounded, None) => {
            return Err(VhipError::Config("bounded controller needs u_max".into()))
        }
        _ => orbital_energy_u(&v, config.z_f, constants)?,
    };
    let cmd = cop_command(&v, u, &config.cop_law, config.target(surface), surface)?;
    Ok(ControlOutput {
        input: ControlInput::new(u, cmd.cop),
        k_eff: Some(cmd.k_eff),
        saturated: cmd.saturated,
    })
}
