//! Variable-height inverted pendulum: capturability analysis, decomposed
//! dynamics and height-varying balance control.
//!
//! Every numeric routine is generic over [`Real`] (`f32` or `f64`); the
//! aliases below fix the scalar type for the common cases.

// `!(a > b)` is how NaN gets rejected throughout.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod capturability;
pub mod control;
pub mod decomposition;
pub mod error;
pub mod geometry;
pub mod model;
pub mod scalar;
pub mod scenario_file;
pub mod simulation;
pub mod vector;

pub use capturability::{
    assess_zero_step, certificate_monitor, fixed_cop_capture_segment, fixed_cop_diagnostics,
    separation_certificate, FailureReason,
};
pub use error::{Result, VhipError};
pub use scalar::Real;
pub use simulation::{run, Outcome};
pub use vector::{Vec2, Vec3};

macro_rules! aliases {
    ($t:ty, $($alias:ident = $path:ident :: $ty:ident),* $(,)?) => {
        $(pub type $alias = $path::$ty<$t>;)*
    };
}

/// Double-precision aliases.
pub mod f64 {
    use crate::{capturability, control, decomposition, geometry, model, simulation, vector};
    aliases!(
        f64,
        Vector2 = vector::Vec2,
        Vector3 = vector::Vec3,
        PhysicalConstants = model::PhysicalConstants,
        PendulumState = model::PendulumState,
        ControlInput = model::ControlInput,
        AugmentedState = model::AugmentedState,
        CaptureTarget = model::CaptureTarget,
        ContactSurface = geometry::ContactSurface,
        TauWindow = geometry::TauWindow,
        CaptureAssessment = capturability::CaptureAssessment,
        FixedCopDiagnostics = capturability::FixedCopDiagnostics,
        SeparationCertificate = capturability::SeparationCertificate,
        DecompositionView = decomposition::DecompositionView,
        InitializationBounds = decomposition::InitializationBounds,
        ControllerConfig = control::ControllerConfig,
        Scenario = simulation::Scenario,
        TrajectoryLog = simulation::TrajectoryLog,
    );
}

/// Single-precision aliases.
pub mod f32 {
    use crate::{capturability, control, decomposition, geometry, model, simulation, vector};
    aliases!(
        f32,
        Vector2 = vector::Vec2,
        Vector3 = vector::Vec3,
        PhysicalConstants = model::PhysicalConstants,
        PendulumState = model::PendulumState,
        ControlInput = model::ControlInput,
        AugmentedState = model::AugmentedState,
        CaptureTarget = model::CaptureTarget,
        ContactSurface = geometry::ContactSurface,
        TauWindow = geometry::TauWindow,
        CaptureAssessment = capturability::CaptureAssessment,
        FixedCopDiagnostics = capturability::FixedCopDiagnostics,
        SeparationCertificate = capturability::SeparationCertificate,
        DecompositionView = decomposition::DecompositionView,
        InitializationBounds = decomposition::InitializationBounds,
        ControllerConfig = control::ControllerConfig,
        Scenario = simulation::Scenario,
        TrajectoryLog = simulation::TrajectoryLog,
    );
}

#[cfg(test)]
mod tests {
    #[test]
    fn single_precision_pipeline() {
        let foot =
            crate::f32::ContactSurface::horizontal_box(0.05, 0.15, -0.05, 0.05, 0.0).unwrap();
        let s = crate::f32::PendulumState::new(
            crate::f32::Vector3::new(0.0, 0.0, 1.0),
            crate::f32::Vector3::new(0.4, 0.0, 0.0),
        );
        let a = crate::assess_zero_step(&s, &foot, &Default::default(), None).unwrap();
        assert!(a.capturable);
        let (lo, hi) = a.feasible_tau_interval.unwrap();
        assert!((lo - 0.125).abs() < 1e-5 && (hi - 0.375).abs() < 1e-5);
    }
}
