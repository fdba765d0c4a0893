//! JSON scenario documents.

use serde::{Deserialize, Serialize};

use crate::control::ControllerConfig;
use crate::error::{Result, VhipError};
use crate::geometry::ContactSurface;
use crate::model::{PendulumState, PhysicalConstants};
use crate::simulation::{Push, Scenario, Tolerances, DEFAULT_STEP};
use crate::vector::{Vec2, Vec3};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RectangleSpec {
    pub center: Vec3<f64>,
    #[serde(default = "unit_z")]
    pub normal: Vec3<f64>,
    pub half_extents: Vec2<f64>,
    #[serde(default)]
    pub yaw: f64,
}

fn unit_z() -> Vec3<f64> {
    Vec3::unit_z()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SurfaceSpec {
    Vertices(Vec<Vec3<f64>>),
    Rectangle(RectangleSpec),
}

impl SurfaceSpec {
    pub fn build(&self) -> Result<ContactSurface<f64>> {
        match self {
            Self::Vertices(v) => ContactSurface::from_vertices(v.clone()),
            Self::Rectangle(r) => {
                ContactSurface::rectangle(r.center, r.normal, r.half_extents, r.yaw)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSpec {
    pub r: Vec3<f64>,
    #[serde(default)]
    pub v: Vec3<f64>,
}

fn default_step() -> f64 {
    DEFAULT_STEP
}

fn default_max_time() -> f64 {
    10.0
}

fn default_sample_every() -> usize {
    10
}

/// Scenario document: a [`Scenario`] plus descriptive metadata.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub description: String,
    /// Seed for randomized sweeps.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub constants: PhysicalConstants<f64>,
    pub initial: StateSpec,
    pub surfaces: Vec<SurfaceSpec>,
    pub controller: ControllerConfig<f64>,
    #[serde(default)]
    pub pushes: Vec<Push<f64>>,
    #[serde(default = "default_step")]
    pub step_size: f64,
    #[serde(default = "default_max_time")]
    pub max_time: f64,
    #[serde(default)]
    pub tolerances: Tolerances<f64>,
    #[serde(default = "default_sample_every")]
    pub sample_every: usize,
}

impl ScenarioFile {
    /// Parses and validates a scenario document.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: Self =
            serde_json::from_str(text).map_err(|e| VhipError::Config(e.to_string()))?;
        file.to_scenario()?.validate()?;
        Ok(file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn to_scenario(&self) -> Result<Scenario<f64>> {
        let constants = PhysicalConstants::new(self.constants.g, self.constants.mass)?;
        let surfaces = self
            .surfaces
            .iter()
            .map(SurfaceSpec::build)
            .collect::<Result<Vec<_>>>()?;
        Ok(Scenario {
            constants,
            initial: PendulumState::new(self.initial.r, self.initial.v),
            surfaces,
            controller: self.controller.clone(),
            pushes: self.pushes.clone(),
            step_size: self.step_size,
            max_time: self.max_time,
            tolerances: self.tolerances,
            sample_every: self.sample_every,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::{ControllerKind, CopLaw};

    const DOC: &str = r#"{
        "name": "rest",
        "initial": {"r": [0.0, 0.0, 1.0]},
        "surfaces": [{"rectangle": {"center": [0.0, 0.0, 0.0], "half_extents": [0.1, 0.05]}}],
        "controller": {"kind": "orbital_energy", "z_f": 1.0}
    }"#;

    #[test]
    fn minimal_document_uses_defaults() {
        let f = ScenarioFile::from_json(DOC).unwrap();
        assert_eq!(f.step_size, 1e-3);
        assert_eq!(f.sample_every, 10);
        assert_eq!(f.controller.kind, ControllerKind::OrbitalEnergy);
        assert_eq!(f.controller.cop_law, CopLaw::Proportional { k_p: 0.5 });
        assert_eq!(f.controller.k_margin, 0.05);
        assert_eq!(f.constants.g, 9.81);
    }

    #[test]
    fn round_trip() {
        let f = ScenarioFile::from_json(DOC).unwrap();
        let g = ScenarioFile::from_json(&f.to_json()).unwrap();
        assert_eq!(f, g);
        assert_eq!(f.to_scenario().unwrap(), g.to_scenario().unwrap());
    }

    #[test]
    fn unknown_keys_rejected() {
        let bad = DOC.replace("\"name\"", "\"nmae\"");
        assert!(matches!(
            ScenarioFile::from_json(&bad),
            Err(VhipError::Config(_))
        ));
        let bad = DOC.replace("\"z_f\"", "\"zf\"");
        assert!(ScenarioFile::from_json(&bad).is_err());
        let bad = DOC.replace(
            "\"half_extents\"",
            "\"yaw\": 0, \"size\": 1, \"half_extents\"",
        );
        assert!(ScenarioFile::from_json(&bad).is_err());
    }

    #[test]
    fn parse_errors_carry_position() {
        let err = ScenarioFile::from_json("{\n  \"name\": ,\n}").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn vertex_surfaces() {
        let doc = DOC.replace(
            r#"{"rectangle": {"center": [0.0, 0.0, 0.0], "half_extents": [0.1, 0.05]}}"#,
            r#"{"vertices": [[-0.1,-0.1,0],[0.1,-0.1,0],[0.1,0.1,0],[-0.1,0.1,0]]}"#,
        );
        let s = ScenarioFile::from_json(&doc)
            .unwrap()
            .to_scenario()
            .unwrap();
        assert_eq!(s.surfaces[0].vertices().len(), 4);
    }
}
