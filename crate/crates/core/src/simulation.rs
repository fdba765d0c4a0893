//! Fixed-step closed-loop simulation with impulsive pushes, CBP monitoring
//! and re-initialization of the virtual time state.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::control::{
    evaluate, fixed_cop_tg, ControllerConfig, ControllerKind, NormalizedOrbitalEnergy,
};
use crate::decomposition::{cbp_valid, initialize_tg, view};
use crate::error::{diag, Result, VhipError};
use crate::geometry::{foot_frame, support_hull, ContactSurface, FootFrame};
use crate::model::{
    augmented_derivative, AugmentedState, ControlInput, PendulumState, PhysicalConstants,
};
use crate::scalar::Real;
use crate::vector::{Vec2, Vec3};

pub const DEFAULT_STEP: f64 = 1e-3;
pub const MAX_STEP: f64 = 0.01;
/// Time the convergence conditions must hold before a run is declared converged, s.
pub const CONVERGENCE_DWELL: f64 = 0.2;
pub const CSV_HEADER: &str =
    "t,x,y,z,vx,vy,vz,u,xp,yp,zp,tg,xig_x,xig_y,xig_z,zcg,gvrp_x,gvrp_y,gvrp_z";

/// Impulsive change of CoM velocity at `time`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Push<T> {
    pub time: T,
    pub dv: Vec3<T>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances<T> {
    /// Bound on ‖v‖, m/s.
    pub speed: T,
    /// Bound on `|z − z_f|` and `‖r_xy − ξ_target‖`, m.
    pub position: T,
}

impl<T: Real> Default for Tolerances<T> {
    fn default() -> Self {
        Self {
            speed: T::lit(1e-3),
            position: T::lit(1e-3),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario<T> {
    pub constants: PhysicalConstants<T>,
    pub initial: PendulumState<T>,
    /// One surface, or several coplanar ones that are hulled.
    pub surfaces: Vec<ContactSurface<T>>,
    pub controller: ControllerConfig<T>,
    pub pushes: Vec<Push<T>>,
    pub step_size: T,
    pub max_time: T,
    pub tolerances: Tolerances<T>,
    /// Log every n-th tick.
    pub sample_every: usize,
}

impl<T: Real> Scenario<T> {
    pub fn new(
        initial: PendulumState<T>,
        surface: ContactSurface<T>,
        controller: ControllerConfig<T>,
    ) -> Self {
        Self {
            constants: PhysicalConstants::default(),
            initial,
            surfaces: vec![surface],
            controller,
            pushes: Vec::new(),
            step_size: T::lit(DEFAULT_STEP),
            max_time: T::lit(10.0),
            tolerances: Tolerances::default(),
            sample_every: 10,
        }
    }

    /// Support polygon of the scenario.
    pub fn support(&self) -> Result<ContactSurface<T>> {
        match self.surfaces.as_slice() {
            [] => Err(VhipError::Config("scenario has no contact surface".into())),
            [one] => Ok(one.clone()),
            many => support_hull(many),
        }
    }

    pub fn validate(&self) -> Result<ContactSurface<T>> {
        let bad = |m: String| Err(VhipError::Config(m));
        if !(self.step_size > T::zero() && self.step_size <= T::lit(MAX_STEP)) {
            return bad(format!(
                "step_size must lie in (0, {MAX_STEP}], got {}",
                self.step_size
            ));
        }
        if !(self.max_time > T::zero() && self.max_time.is_finite()) {
            return bad(format!("max_time must be positive, got {}", self.max_time));
        }
        if !self.initial.is_finite() {
            return bad("initial state is not finite".into());
        }
        if self.sample_every == 0 {
            return bad("sample_every must be at least 1".into());
        }
        if !(self.tolerances.speed > T::zero() && self.tolerances.position > T::zero()) {
            return bad("tolerances must be positive".into());
        }
        for w in self.pushes.windows(2) {
            if !(w[1].time > w[0].time) {
                return bad("push times must be strictly increasing".into());
            }
        }
        for p in &self.pushes {
            if !(p.time >= T::zero() && p.time <= self.max_time) || !p.dv.is_finite() {
                return bad(format!(
                    "push at t = {} outside [0, max_time] or not finite",
                    p.time
                ));
            }
        }
        let support = self.support()?;
        self.controller.validate(&support)?;
        Ok(support)
    }
}

/// `v += dv`; position and `t_g` unchanged.
pub fn apply_push<T: Real>(state: &PendulumState<T>, dv: Vec3<T>) -> PendulumState<T> {
    state.pushed(dv)
}

/// One classical RK4 step of the augmented system with `input` held.
pub fn rk4_step<T: Real>(
    aug: &AugmentedState<T>,
    input: &ControlInput<T>,
    constants: &PhysicalConstants<T>,
    h: T,
) -> Result<AugmentedState<T>> {
    let half = T::half() * h;
    let k1 = augmented_derivative(aug, input, constants)?;
    let k2 = augmented_derivative(&aug.advanced(&k1, half), input, constants)?;
    let k3 = augmented_derivative(&aug.advanced(&k2, half), input, constants)?;
    let k4 = augmented_derivative(&aug.advanced(&k3, h), input, constants)?;
    let two = T::two();
    let sixth = h / T::lit(6.0);
    let next = AugmentedState {
        pendulum: PendulumState {
            r: aug.pendulum.r + (k1.r + k2.r * two + k3.r * two + k4.r) * sixth,
            v: aug.pendulum.v + (k1.v + k2.v * two + k3.v * two + k4.v) * sixth,
        },
        t_g: aug.t_g + (k1.t_g + two * k2.t_g + two * k3.t_g + k4.t_g) * sixth,
    };
    if !next.is_finite() {
        return Err(VhipError::NumericalBlowup(f64::NAN));
    }
    Ok(next)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Converged,
    Fell,
    Timeout,
    NumericalBlowup,
}

impl Outcome {
    pub fn tag(self) -> &'static str {
        match self {
            Self::Converged => "converged",
            Self::Fell => "fell",
            Self::Timeout => "timeout",
            Self::NumericalBlowup => "numerical-blowup",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EventKind<T> {
    PushApplied { dv: Vec3<T> },
    CbpInvalid,
    Reinitialized { t_g: T },
    NoValidTg { message: String },
    ControllerError { message: String },
    Converged,
    Fell,
    Timeout,
    NumericalBlowup,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Event<T> {
    pub time: T,
    #[serde(flatten)]
    pub kind: EventKind<T>,
}

/// One logged tick, in world coordinates except `z_cg` (foot frame).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LogRow<T> {
    pub t: T,
    pub r: Vec3<T>,
    pub v: Vec3<T>,
    pub u: T,
    pub cop: Vec3<T>,
    pub t_g: T,
    pub xi_g: Vec3<T>,
    pub z_cg: T,
    pub gvrp: Option<Vec3<T>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrajectoryLog<T> {
    #[serde(skip)]
    pub rows: Vec<LogRow<T>>,
    pub events: Vec<Event<T>>,
    pub outcome: Outcome,
    /// Last evaluated tick.
    pub last: LogRow<T>,
    /// Foot-frame state at the last tick.
    pub final_local: AugmentedState<T>,
}

impl<T: Real> TrajectoryLog<T> {
    pub fn has_event(&self, pred: impl Fn(&EventKind<T>) -> bool) -> bool {
        self.events.iter().any(|e| pred(&e.kind))
    }

    pub fn reinitialized(&self) -> bool {
        self.has_event(|k| matches!(k, EventKind::Reinitialized { .. }))
    }

    pub fn write_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "{CSV_HEADER}")?;
        for r in &self.rows {
            let g = r
                .gvrp
                .map_or(["nan".to_string(), "nan".into(), "nan".into()], |p| {
                    [p.x.to_string(), p.y.to_string(), p.z.to_string()]
                });
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                r.t,
                r.r.x,
                r.r.y,
                r.r.z,
                r.v.x,
                r.v.y,
                r.v.z,
                r.u,
                r.cop.x,
                r.cop.y,
                r.cop.z,
                r.t_g,
                r.xi_g.x,
                r.xi_g.y,
                r.xi_g.z,
                r.z_cg,
                g[0],
                g[1],
                g[2]
            )?;
        }
        Ok(())
    }

    /// Events and outcome as a JSON document.
    pub fn events_json(&self) -> serde_json::Value
    where
        T: Serialize,
    {
        serde_json::to_value(self).unwrap_or(serde_json::Value::Null)
    }
}

struct Loop<'a, T> {
    frame: FootFrame<T>,
    surface: ContactSurface<T>,
    config: ControllerConfig<T>,
    constants: &'a PhysicalConstants<T>,
}

impl<T: Real> Loop<'_, T> {
    fn fixed_cop(&self) -> Option<Vec3<T>> {
        (self.config.kind == ControllerKind::FixedCop)
            .then(|| {
                self.config
                    .fixed_cop
                    .map(|c| Vec3::new(c.x, c.y, T::zero()))
            })
            .flatten()
    }

    fn bounded_u_max(&self) -> Option<T> {
        (self.config.kind == ControllerKind::Bounded)
            .then_some(self.config.u_max)
            .flatten()
    }

    fn initial_tg(&self, state: &PendulumState<T>) -> Result<T> {
        match self.fixed_cop() {
            Some(cop) => Ok(fixed_cop_tg(state, cop, self.constants)?.0),
            None => Ok(initialize_tg(
                state,
                &self.surface,
                self.config.k_margin,
                self.constants,
                self.bounded_u_max(),
            )?
            .0),
        }
    }

    fn row(&self, t: T, aug: &AugmentedState<T>, input: &ControlInput<T>) -> LogRow<T> {
        let local = view(aug, Some(input), self.constants);
        let f = &self.frame;
        LogRow {
            t,
            r: f.point_from_frame(aug.pendulum.r),
            v: f.vector_from_frame(aug.pendulum.v),
            u: input.u,
            cop: f.point_from_frame(input.cop),
            t_g: aug.t_g,
            xi_g: f.point_from_frame(local.xi_g),
            z_cg: local.z_cg,
            gvrp: local.gvrp.map(|p| f.point_from_frame(p)),
        }
    }
}

/// Runs `scenario` to convergence, fall or `max_time`.
pub fn run<T: Real>(scenario: &Scenario<T>) -> Result<TrajectoryLog<T>> {
    let support = scenario.validate()?;
    let frame = foot_frame(&support)?;
    let surface = frame.surface_to_frame(&support)?;
    let constants = &scenario.constants;
    let mut config = scenario.controller.clone();
    config.xi_target = Some(config.target(&support));
    let target: Vec2<T> = match (config.kind, config.fixed_cop) {
        (ControllerKind::FixedCop, Some(c)) => c.xy(),
        _ => config.target(&support),
    };
    let lp = Loop {
        frame,
        surface,
        config,
        constants,
    };
    let h = scenario.step_size;

    let mut pushes: Vec<(usize, Vec3<T>)> = scenario
        .pushes
        .iter()
        .map(|p| {
            (
                (p.time / h).round().to_usize().unwrap_or(0),
                frame.vector_to_frame(p.dv),
            )
        })
        .collect();
    pushes.reverse();

    let mut events = Vec::new();
    let mut rows = Vec::new();
    let mut pendulum = frame.to_frame(&scenario.initial);
    let mut fallback = false;
    let t_g = match lp.initial_tg(&pendulum) {
        Ok(t) => t,
        Err(e) => {
            events.push(Event {
                time: T::zero(),
                kind: EventKind::NoValidTg {
                    message: e.to_string(),
                },
            });
            fallback = true;
            T::zero()
        }
    };
    let mut aug = AugmentedState::new(pendulum, t_g);
    let n_steps = (scenario.max_time / h).ceil().to_usize().unwrap_or(0);
    let ballistic = ControlInput::new(T::zero(), Vec3::zero());
    let mut since: Option<T> = None;
    let mut input = ballistic;
    let mut outcome = Outcome::Timeout;

    let mut tick = 0usize;
    loop {
        let t = T::lit(tick as f64) * h;
        while pushes.last().is_some_and(|(k, _)| *k == tick) {
            let (_, dv) = pushes.pop().unwrap();
            pendulum = apply_push(&aug.pendulum, dv);
            aug.pendulum = pendulum;
            events.push(Event {
                time: t,
                kind: EventKind::PushApplied {
                    dv: frame.vector_from_frame(dv),
                },
            });
            since = None;
        }
        if aug.pendulum.r.z <= T::zero() {
            events.push(Event {
                time: t,
                kind: EventKind::Fell,
            });
            outcome = Outcome::Fell;
            break;
        }
        if !fallback {
            input = match control_tick(&lp, &mut aug, t, &mut events) {
                Ok(i) => i,
                Err(_) => {
                    fallback = true;
                    ballistic
                }
            };
        } else {
            input = ballistic;
        }
        if tick.is_multiple_of(scenario.sample_every) {
            rows.push(lp.row(t, &aug, &input));
        }

        let p = &aug.pendulum;
        let ok = !fallback
            && p.v.norm() < scenario.tolerances.speed
            && (p.r.z - lp.config.z_f).abs() < scenario.tolerances.position
            && (p.r.xy() - target).norm() < scenario.tolerances.position;
        if ok {
            let s = *since.get_or_insert(t);
            if t - s >= T::lit(CONVERGENCE_DWELL) - h * T::lit(1e-6) {
                events.push(Event {
                    time: t,
                    kind: EventKind::Converged,
                });
                outcome = Outcome::Converged;
                break;
            }
        } else {
            since = None;
        }
        if tick >= n_steps {
            events.push(Event {
                time: t,
                kind: EventKind::Timeout,
            });
            break;
        }
        match rk4_step(&aug, &input, constants, h) {
            Ok(next) => aug = next,
            Err(_) => {
                events.push(Event {
                    time: t,
                    kind: EventKind::NumericalBlowup,
                });
                outcome = Outcome::NumericalBlowup;
                break;
            }
        }
        tick += 1;
    }
    let t = T::lit(tick as f64) * h;
    let last = lp.row(t, &aug, &input);
    if rows.last().is_none_or(|r| r.t < t) {
        rows.push(last);
    }
    Ok(TrajectoryLog {
        rows,
        events,
        outcome,
        last,
        final_local: aug,
    })
}

/// CBP check, re-initialization and controller evaluation for one tick.
fn control_tick<T: Real>(
    lp: &Loop<'_, T>,
    aug: &mut AugmentedState<T>,
    t: T,
    events: &mut Vec<Event<T>>,
) -> Result<ControlInput<T>> {
    if let Some(cop) = lp.fixed_cop() {
        // State feedback: t_g = −x/ẋ in the ballistic plane of the CoP.
        match fixed_cop_tg(&aug.pendulum, cop, lp.constants) {
            Ok((t_g, _)) => aug.t_g = t_g,
            Err(e) => {
                log::info!("t = {}: fixed CoP lost the state: {e}", diag(t));
                events.push(Event {
                    time: t,
                    kind: EventKind::ControllerError {
                        message: e.to_string(),
                    },
                });
                return Err(e);
            }
        }
    } else if !cbp_valid(aug, &lp.surface, lp.constants)? {
        events.push(Event {
            time: t,
            kind: EventKind::CbpInvalid,
        });
        match lp.initial_tg(&aug.pendulum) {
            Ok(t_g) => {
                aug.t_g = t_g;
                events.push(Event {
                    time: t,
                    kind: EventKind::Reinitialized { t_g },
                });
                log::debug!("t = {}: t_g reinitialized to {}", diag(t), diag(t_g));
            }
            Err(e) => {
                log::info!("t = {}: no valid t_g: {e}", diag(t));
                events.push(Event {
                    time: t,
                    kind: EventKind::NoValidTg {
                        message: e.to_string(),
                    },
                });
                return Err(e);
            }
        }
    }
    match evaluate(
        &lp.config,
        aug,
        &lp.surface,
        lp.constants,
        &NormalizedOrbitalEnergy,
    ) {
        Ok(out) => Ok(out.input),
        Err(e) => {
            log::info!("t = {}: controller error: {e}", diag(t));
            events.push(Event {
                time: t,
                kind: EventKind::ControllerError {
                    message: e.to_string(),
                },
            });
            Err(e)
        }
    }
}
