use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::grid::CylinderGrid;
use crate::solver::validate_schedule;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    AreaConstantPsi,
    PositivitySweep,
    HomotopyInvariance,
    IdentitySuite,
    TamingStudy,
    ConvergenceStudy,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::AreaConstantPsi,
        Experiment::PositivitySweep,
        Experiment::HomotopyInvariance,
        Experiment::IdentitySuite,
        Experiment::TamingStudy,
        Experiment::ConvergenceStudy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::AreaConstantPsi => "area-constant-psi",
            Experiment::PositivitySweep => "positivity-sweep",
            Experiment::HomotopyInvariance => "homotopy-invariance",
            Experiment::IdentitySuite => "identity-suite",
            Experiment::TamingStudy => "taming-study",
            Experiment::ConvergenceStudy => "convergence-study",
        }
    }

    pub fn summary(self) -> &'static str {
        match self {
            Experiment::AreaConstantPsi => "area of u_k for constant ψ = τ against πk",
            Experiment::PositivitySweep => "λ-continued solutions over k × bump mass, area ≥ −tol",
            Experiment::HomotopyInvariance => "area along a λ schedule for one family",
            Experiment::IdentitySuite => "second-order refinement of the discrete identities, gradient duality",
            Experiment::TamingStudy => "sampled taming margin at N = factor·(f/2)² over several seeds",
            Experiment::ConvergenceStudy => "energy identity and family residual under refinement",
        }
    }

    /// Studies that draw random samples and so need a seed.
    pub fn randomized(self) -> bool {
        matches!(self, Experiment::IdentitySuite | Experiment::TamingStudy)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// The cylinder is `[−half_length, half_length] × S¹`.
    pub half_length: f64,
    pub n_s: usize,
    pub n_t: usize,
}

impl GridConfig {
    pub fn grid(&self) -> Result<CylinderGrid> {
        CylinderGrid::symmetric(self.half_length, self.n_s, self.n_t)
    }
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { half_length: 6.0, n_s: 400, n_t: 64 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FamilyConfig {
    /// Winding numbers; every listed `k` is a separate case.
    pub k: Vec<i32>,
    /// Constant ψ value for `area-constant-psi`.
    pub tau: f64,
    /// Support of the bump ψ.
    pub support: [f64; 2],
    /// Bump masses; every listed mass is a separate case.
    pub masses: Vec<f64>,
    /// Final λ when no schedule is given.
    pub lambda: f64,
    pub schedule: Option<Vec<f64>>,
}

impl Default for FamilyConfig {
    fn default() -> Self {
        FamilyConfig { k: vec![1], tau: 2.0, support: [-1.0, 1.0], masses: vec![1.0], lambda: 1.0, schedule: None }
    }
}

impl FamilyConfig {
    /// The configured schedule, or five even stages from 0 to `lambda`.
    pub fn schedule(&self) -> Vec<f64> {
        match &self.schedule {
            Some(s) => s.clone(),
            None => (0..5).map(|i| self.lambda * i as f64 / 4.0).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { tol: 1e-9, max_iter: 12 }
    }
}

/// Every tolerance a report row can be judged against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// `|area − πk|`.
    pub area: f64,
    /// Allowed negative area.
    pub positivity: f64,
    /// Pairwise area difference along a homotopy.
    pub drift: f64,
    /// Accepted range of the defect ratio per grid halving.
    pub order_ratio: [f64; 2],
    /// `|⟨∇H, v⟩ − dH(v)|`.
    pub duality: f64,
    /// `|E − N − area|`.
    pub energy: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { area: 1e-3, positivity: 1e-3, drift: 1e-3, order_ratio: [3.5, 4.5], duality: 1e-8, energy: 1e-2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StudyConfig {
    /// Random samples per seed (taming) or in total (gradient duality).
    pub samples: usize,
    /// Consecutive seeds starting at `seed` (taming).
    pub seeds: u64,
    /// `N = n_factor · (f/2)²` (taming).
    pub n_factor: f64,
    /// Weight `N` of the base form (energy identity).
    pub energy_n: f64,
    /// Grid levels of a refinement study; ratios need at least two.
    pub levels: usize,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig { samples: 10_000, seeds: 10, n_factor: 1.1, energy_n: 10.0, levels: 3 }
    }
}

/// One experiment, read from TOML.
///
/// ```toml
/// experiment = "positivity-sweep"
/// output = "out/sweep"
///
/// [grid]
/// half_length = 6.0
/// n_s = 400
/// n_t = 64
///
/// [family]
/// k = [-2, -1, 1, 2, 3]
/// masses = [0.5, 1.0, 2.0]
/// schedule = [0.0, 0.25, 0.5, 0.75, 1.0]
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub family: FamilyConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub study: StudyConfig,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(LabError::Config(format!("{name} must be positive, got {v}")))
    }
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment) -> Self {
        ExperimentConfig {
            experiment,
            seed: None,
            output: None,
            grid: GridConfig::default(),
            family: FamilyConfig::default(),
            solver: SolverConfig::default(),
            tolerances: Tolerances::default(),
            study: StudyConfig::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| LabError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        ExperimentConfig::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let t = &self.tolerances;
        for (name, v) in [
            ("tolerances.area", t.area),
            ("tolerances.positivity", t.positivity),
            ("tolerances.drift", t.drift),
            ("tolerances.duality", t.duality),
            ("tolerances.energy", t.energy),
            ("tolerances.order_ratio[0]", t.order_ratio[0]),
            ("solver.tol", self.solver.tol),
        ] {
            positive(name, v)?;
        }
        if t.order_ratio[1] < t.order_ratio[0] {
            return Err(LabError::Config("tolerances.order_ratio must be [low, high]".into()));
        }
        if self.experiment.randomized() && self.seed.is_none() {
            return Err(LabError::Config(format!("{} draws random samples and needs a seed", self.experiment.name())));
        }
        self.grid.grid()?;
        if self.family.k.is_empty() {
            return Err(LabError::Config("family.k is empty".into()));
        }
        let [a, b] = self.family.support;
        if !(a < b) {
            return Err(LabError::Config(format!("family.support [{a}, {b}] is empty")));
        }
        if self.family.masses.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
            return Err(LabError::Config("family.masses must be finite and ≥ 0".into()));
        }
        if matches!(self.experiment, Experiment::PositivitySweep | Experiment::HomotopyInvariance) {
            if self.family.masses.is_empty() {
                return Err(LabError::Config("family.masses is empty".into()));
            }
            validate_schedule(&self.family.schedule())?;
        }
        if self.solver.max_iter == 0 {
            return Err(LabError::Config("solver.max_iter must be at least 1".into()));
        }
        let s = &self.study;
        if s.samples == 0 || s.seeds == 0 {
            return Err(LabError::Config("study.samples and study.seeds must be at least 1".into()));
        }
        positive("study.n_factor", s.n_factor)?;
        positive("study.energy_n", s.energy_n)?;
        if s.levels < 2 {
            return Err(LabError::Config("study.levels must be at least 2".into()));
        }
        Ok(())
    }
}
