//! Interactive driving scenarios and the experiment grid.
//!
//! A scenario file is TOML describing one scenario in its three urgency
//! variations:
//!
//! ```toml
//! name = "pedestrian_cutin"
//! varied_axis = "timing of the behavior change"
//!
//! [[variation]]
//! name = "pedestrian_cutin"
//! variation = 1
//! duration = 12.0
//! ego_desired_speed = 10.0
//! ego_v_max = 10.0
//! target_object = "pedestrian"
//! target_predicted_path = "sidewalk"      # optional
//!
//! [variation.paths]
//! ego = [[0.0, 0.0], [200.0, 0.0]]
//! sidewalk = [[0.0, -4.0], [200.0, -4.0]]
//!
//! [[variation.vehicles]]
//! id = "ego"                              # exactly one vehicle is "ego"
//! path = "ego"
//! arc_position = 0.0
//! speed = 10.0
//! footprint_radius = 1.0
//!
//! [[variation.events]]
//! time = 3.0
//! vehicle = "pedestrian"
//! action = { kind = "switch_path", path = "crossing" }
//!
//! [[variation.events]]
//! time = 5.0
//! vehicle = "ego"
//! action = { kind = "plan", segments = [[-3.0, 1.5]] }   # [accel, duration]
//! ```
//!
//! A path switch re-projects the vehicle's current position onto the new
//! path; a plan replaces the vehicle's active acceleration profile.

mod catalog;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::personalization::DriverType;
use crate::world::{DrivingPath, MotionPlan, PlanSegment};

pub use catalog::builtin_file;

pub const EGO_ID: &str = "ego";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioName {
    MotorcycleLaneChange,
    CarOvertaking,
    PriorityIntersection,
    CurveIntersection,
    BicycleCutin,
    PedestrianCutin,
}

impl ScenarioName {
    pub const ALL: [ScenarioName; 6] = [
        ScenarioName::MotorcycleLaneChange,
        ScenarioName::CarOvertaking,
        ScenarioName::PriorityIntersection,
        ScenarioName::CurveIntersection,
        ScenarioName::BicycleCutin,
        ScenarioName::PedestrianCutin,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioName::MotorcycleLaneChange => "motorcycle_lane_change",
            ScenarioName::CarOvertaking => "car_overtaking",
            ScenarioName::PriorityIntersection => "priority_intersection",
            ScenarioName::CurveIntersection => "curve_intersection",
            ScenarioName::BicycleCutin => "bicycle_cutin",
            ScenarioName::PedestrianCutin => "pedestrian_cutin",
        }
    }
}

impl fmt::Display for ScenarioName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ScenarioName::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| Error::input(format!("unknown scenario '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VehicleSpec {
    pub id: String,
    pub path: String,
    pub arc_position: f64,
    pub speed: f64,
    pub footprint_radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EventAction {
    SwitchPath { path: String },
    /// Segments as `[acceleration, duration]` pairs.
    Plan { segments: Vec<[f64; 2]> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScriptedEvent {
    pub time: f64,
    pub vehicle: String,
    pub action: EventAction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub name: ScenarioName,
    pub variation: u8,
    pub duration: f64,
    pub ego_desired_speed: f64,
    pub ego_v_max: f64,
    pub target_object: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_predicted_path: Option<String>,
    pub paths: BTreeMap<String, Vec<[f64; 2]>>,
    pub vehicles: Vec<VehicleSpec>,
    #[serde(default)]
    pub events: Vec<ScriptedEvent>,
}

/// A validated scenario with its paths built.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub spec: ScenarioSpec,
    paths: BTreeMap<String, Arc<DrivingPath>>,
}

impl Scenario {
    pub fn path(&self, name: &str) -> Option<&Arc<DrivingPath>> {
        self.paths.get(name)
    }

    pub fn name(&self) -> ScenarioName {
        self.spec.name
    }

    pub fn variation(&self) -> u8 {
        self.spec.variation
    }

    pub fn predicted_path(&self) -> Option<&Arc<DrivingPath>> {
        self.spec
            .target_predicted_path
            .as_deref()
            .and_then(|p| self.paths.get(p))
    }

    pub fn vehicle(&self, id: &str) -> Option<&VehicleSpec> {
        self.spec.vehicles.iter().find(|v| v.id == id)
    }

    /// A copy with every vehicle except the ego and `keep` removed, along
    /// with their events.
    pub fn with_only(&self, keep: &str) -> Result<Self> {
        let mut spec = self.spec.clone();
        spec.vehicles.retain(|v| v.id == EGO_ID || v.id == keep);
        spec.events.retain(|e| e.vehicle == EGO_ID || e.vehicle == keep);
        spec.compile()
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::input(format!("{name} must be positive, got {v}")))
    }
}

pub(crate) fn plan_from_pairs(segments: &[[f64; 2]]) -> Result<MotionPlan> {
    MotionPlan::new(
        segments
            .iter()
            .map(|s| PlanSegment {
                acceleration: s[0],
                duration: s[1],
            })
            .collect(),
    )
}

impl ScenarioSpec {
    /// Checks the invariants and builds the paths.
    pub fn compile(self) -> Result<Scenario> {
        let label = format!("{} variation {}", self.name, self.variation);
        let ctx = |e: Error| Error::input(format!("{label}: {e}"));

        if !(1..=3).contains(&self.variation) {
            return Err(ctx(Error::input("variation must be 1, 2 or 3")));
        }
        positive("duration", self.duration).map_err(ctx)?;
        positive("ego_desired_speed", self.ego_desired_speed).map_err(ctx)?;
        positive("ego_v_max", self.ego_v_max).map_err(ctx)?;

        let mut paths = BTreeMap::new();
        for (name, pts) in &self.paths {
            let path = DrivingPath::from_xy(pts)
                .map_err(|e| ctx(Error::input(format!("path '{name}': {e}"))))?;
            paths.insert(name.clone(), Arc::new(path));
        }

        let mut ids = BTreeSet::new();
        for v in &self.vehicles {
            if !ids.insert(v.id.as_str()) {
                return Err(ctx(Error::input(format!("duplicate vehicle id '{}'", v.id))));
            }
            let path = paths
                .get(&v.path)
                .ok_or_else(|| ctx(Error::input(format!("vehicle '{}' uses unknown path '{}'", v.id, v.path))))?;
            if !(0.0..=path.length()).contains(&v.arc_position) {
                return Err(ctx(Error::input(format!(
                    "vehicle '{}' starts outside its path",
                    v.id
                ))));
            }
            if !(v.speed >= 0.0 && v.speed.is_finite()) {
                return Err(ctx(Error::input(format!("vehicle '{}' has a negative speed", v.id))));
            }
            if !(v.footprint_radius >= 0.0 && v.footprint_radius.is_finite()) {
                return Err(ctx(Error::input(format!(
                    "vehicle '{}' has an invalid footprint radius",
                    v.id
                ))));
            }
        }
        if !ids.contains(EGO_ID) {
            return Err(ctx(Error::input("scenario has no ego vehicle")));
        }
        if self.target_object == EGO_ID || !ids.contains(self.target_object.as_str()) {
            return Err(ctx(Error::input(format!(
                "target object '{}' is not another vehicle",
                self.target_object
            ))));
        }
        if let Some(p) = &self.target_predicted_path {
            if !paths.contains_key(p) {
                return Err(ctx(Error::input(format!("unknown predicted path '{p}'"))));
            }
        }
        for e in &self.events {
            if !(e.time >= 0.0 && e.time.is_finite()) {
                return Err(ctx(Error::input("event time must be >= 0")));
            }
            if !ids.contains(e.vehicle.as_str()) {
                return Err(ctx(Error::input(format!("event for unknown vehicle '{}'", e.vehicle))));
            }
            match &e.action {
                EventAction::SwitchPath { path } => {
                    if !paths.contains_key(path) {
                        return Err(ctx(Error::input(format!("event uses unknown path '{path}'"))));
                    }
                }
                EventAction::Plan { segments } => {
                    plan_from_pairs(segments).map_err(ctx)?;
                }
            }
        }
        Ok(Scenario { spec: self, paths })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub name: ScenarioName,
    /// Which urgency axis the three variations vary.
    pub varied_axis: String,
    #[serde(rename = "variation")]
    pub variations: Vec<ScenarioSpec>,
}

impl ScenarioFile {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let file: Self = toml::from_str(text).map_err(|e| Error::parse("scenario file", e))?;
        file.validate()?;
        Ok(file)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario files always serialize")
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen: Vec<u8> = self.variations.iter().map(|v| v.variation).collect();
        seen.sort_unstable();
        if seen != [1, 2, 3] {
            return Err(Error::input(format!(
                "{}: expected variations 1, 2 and 3, found {seen:?}",
                self.name
            )));
        }
        for v in &self.variations {
            if v.name != self.name {
                return Err(Error::input(format!(
                    "variation {} is named {} inside the {} file",
                    v.variation, v.name, self.name
                )));
            }
            v.clone().compile()?;
        }
        Ok(())
    }

    pub fn compile(self) -> Result<Vec<Scenario>> {
        self.validate()?;
        let mut out: Vec<Scenario> = self
            .variations
            .into_iter()
            .map(ScenarioSpec::compile)
            .collect::<Result<_>>()?;
        out.sort_by_key(|s| s.variation());
        Ok(out)
    }
}

/// Built-in scenario in the given urgency variation.
pub fn build_scenario(name: ScenarioName, variation: u8) -> Result<Scenario> {
    if !(1..=3).contains(&variation) {
        return Err(Error::input(format!("variation must be 1, 2 or 3, got {variation}")));
    }
    let file = builtin_file(name);
    let spec = file
        .variations
        .into_iter()
        .find(|v| v.variation == variation)
        .expect("built-in files carry all variations");
    spec.compile()
}

/// The set of scenarios a sweep runs over.
#[derive(Debug, Clone)]
pub struct ScenarioCatalog {
    scenarios: BTreeMap<(ScenarioName, u8), Arc<Scenario>>,
}

impl ScenarioCatalog {
    pub fn builtin() -> Self {
        let mut scenarios = BTreeMap::new();
        for name in ScenarioName::ALL {
            for s in builtin_file(name).compile().expect("built-in scenarios are valid") {
                scenarios.insert((name, s.variation()), Arc::new(s));
            }
        }
        Self { scenarios }
    }

    /// Loads every `*.toml` scenario file in `dir`.
    pub fn from_dir(dir: &Path) -> Result<Self> {
        let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
        let mut files: Vec<_> = entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "toml"))
            .collect();
        files.sort();
        let mut scenarios = BTreeMap::new();
        for path in files {
            let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            let file = ScenarioFile::from_toml_str(&text).map_err(|e| match e {
                Error::Parse { message, .. } => Error::parse(path.display().to_string(), message),
                other => Error::input(format!("{}: {other}", path.display())),
            })?;
            let name = file.name;
            for s in file.compile()? {
                if scenarios.insert((name, s.variation()), Arc::new(s)).is_some() {
                    return Err(Error::input(format!(
                        "scenario {name} defined more than once in {}",
                        dir.display()
                    )));
                }
            }
        }
        if scenarios.is_empty() {
            return Err(Error::input(format!(
                "no scenario files found in {}",
                dir.display()
            )));
        }
        Ok(Self { scenarios })
    }

    pub fn get(&self, name: ScenarioName, variation: u8) -> Option<&Arc<Scenario>> {
        self.scenarios.get(&(name, variation))
    }

    pub fn iter(&self) -> impl Iterator<Item = &Arc<Scenario>> {
        self.scenarios.values()
    }

    pub fn len(&self) -> usize {
        self.scenarios.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scenarios.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorVariant {
    None,
    Ne,
    Fe,
    Ie,
}

impl ErrorVariant {
    pub const ALL: [ErrorVariant; 4] = [
        ErrorVariant::None,
        ErrorVariant::Ne,
        ErrorVariant::Fe,
        ErrorVariant::Ie,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ErrorVariant::None => "none",
            ErrorVariant::Ne => "ne",
            ErrorVariant::Fe => "fe",
            ErrorVariant::Ie => "ie",
        }
    }

    /// (NE, FE, IE) levels of this variant.
    pub fn levels(self) -> (f64, f64, f64) {
        match self {
            ErrorVariant::None => (0.0, 0.0, 0.0),
            ErrorVariant::Ne => (1.0, 0.0, 0.0),
            ErrorVariant::Fe => (0.0, 1.0, 0.0),
            ErrorVariant::Ie => (0.0, 0.0, 1.0),
        }
    }
}

impl fmt::Display for ErrorVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ErrorVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ErrorVariant::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| Error::input(format!("unknown error variant '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModelKind {
    #[serde(rename = "baseline")]
    Baseline,
    #[serde(rename = "human")]
    HumanBased,
}

impl ModelKind {
    pub const ALL: [ModelKind; 2] = [ModelKind::Baseline, ModelKind::HumanBased];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Baseline => "baseline",
            ModelKind::HumanBased => "human",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "baseline" => Ok(ModelKind::Baseline),
            "human" | "human_based" => Ok(ModelKind::HumanBased),
            other => Err(Error::input(format!("unknown model '{other}'"))),
        }
    }
}

/// One simulation to run. Fully deterministic; there is no seed.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeConfig {
    pub scenario: Arc<Scenario>,
    pub error: ErrorVariant,
    pub driver: DriverType,
    pub model: ModelKind,
}

/// Sort key shared by every emitted table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EpisodeKey {
    pub scenario: ScenarioName,
    pub variation: u8,
    pub driver: DriverType,
    pub error: ErrorVariant,
    pub model: ModelKind,
}

impl EpisodeConfig {
    pub fn key(&self) -> EpisodeKey {
        EpisodeKey {
            scenario: self.scenario.name(),
            variation: self.scenario.variation(),
            driver: self.driver,
            error: self.error,
            model: self.model,
        }
    }
}

/// Cross product of scenarios, variations, driver types and error variants,
/// each emitted for both models. Order: scenario, variation, driver type,
/// error variant, model (all in their declaration order).
pub fn variation_grid(catalog: &ScenarioCatalog) -> Vec<EpisodeConfig> {
    let mut grid = Vec::with_capacity(catalog.len() * 24);
    for scenario in catalog.iter() {
        for driver in DriverType::ALL {
            for error in ErrorVariant::ALL {
                for model in ModelKind::ALL {
                    grid.push(EpisodeConfig {
                        scenario: scenario.clone(),
                        error,
                        driver,
                        model,
                    });
                }
            }
        }
    }
    grid
}
