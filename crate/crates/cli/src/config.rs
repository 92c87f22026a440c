//! Run configuration: TOML sections, dotted overrides, validation.
//!
//! Layering order is preset, then config file (or the `config` object of an
//! emitted manifest), then `--set` overrides. Merging happens on a JSON value
//! tree so that TOML files and JSON manifests share one code path.

use std::f64::consts::{FRAC_PI_4, PI};
use std::path::Path;

use kuramoto_core::kinetic::{DEFAULT_FREQ_NODES, DEFAULT_PHASE_NODES};
use kuramoto_core::mean_field::{DEFAULT_GRID, KC_TOL, K_MAX};
use kuramoto_core::stationary::{DEFAULT_ANGLE_TOL, DEFAULT_MASS_TOL};
use kuramoto_core::{Atom, DensitySpec, FrequencyDistribution, PhaseLaw, SimConfig, SolverOptions};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Finite,
    Kinetic,
    Roots,
    Kc,
    Classify,
    Sweep,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Finite => "finite",
            Mode::Kinetic => "kinetic",
            Mode::Roots => "roots",
            Mode::Kc => "kc",
            Mode::Classify => "classify",
            Mode::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub run: RunSection,
    pub model: ModelSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frequency: Option<FrequencySection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub density: Option<DensitySection>,
    pub sim: SimSection,
    pub roots: RootsSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    pub classify: ClassifySection,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub mode: Option<Mode>,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitKind {
    /// `n` phases drawn uniformly from the seeded stream.
    #[default]
    Random,
    /// The symmetric three-oscillator family `(δ₀, −δ₀, π)`.
    ThreeOsc,
    /// `phases` (and optionally `freqs`) given verbatim.
    Explicit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    pub coupling: f64,
    pub init: InitKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phases: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub freqs: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta0: Option<f64>,
    /// Integrate in the frame rotating at the mean natural frequency.
    pub comoving: bool,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            coupling: 1.0,
            init: InitKind::Random,
            n: None,
            phases: None,
            freqs: None,
            delta0: None,
            comoving: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FrequencySection {
    Dirac {
        #[serde(default)]
        omega0: f64,
    },
    Uniform {
        #[serde(default)]
        center: f64,
        halfwidth: f64,
    },
    /// `atoms = [[omega, mass], ...]`.
    Discrete { atoms: Vec<[f64; 2]> },
    TruncatedGaussian {
        #[serde(default)]
        mean: f64,
        sigma: f64,
        cut: f64,
    },
}

impl FrequencySection {
    pub fn build(&self) -> Result<FrequencyDistribution<f64>, CliError> {
        let g = match self {
            FrequencySection::Dirac { omega0 } => Ok(FrequencyDistribution::dirac(*omega0)),
            FrequencySection::Uniform { center, halfwidth } => FrequencyDistribution::uniform(*center, *halfwidth),
            FrequencySection::Discrete { atoms } => {
                FrequencyDistribution::discrete(atoms.iter().map(|a| (a[0], a[1])).collect())
            }
            FrequencySection::TruncatedGaussian { mean, sigma, cut } => {
                FrequencyDistribution::truncated_gaussian(*mean, *sigma, *cut)
            }
        };
        let g = g.map_err(|e| CliError::Config(format!("[frequency]: {e}")))?;
        g.validate().map_err(|e| CliError::Config(format!("[frequency]: {e}")))?;
        Ok(g)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseShape {
    UniformArc,
    TruncatedGaussianArc,
}

fn default_phase_nodes() -> usize {
    DEFAULT_PHASE_NODES
}

fn default_freq_nodes() -> usize {
    DEFAULT_FREQ_NODES
}

fn default_halfwidth() -> f64 {
    PI
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DensitySection {
    UniformArc {
        #[serde(default)]
        center: f64,
        #[serde(default = "default_halfwidth")]
        halfwidth: f64,
        #[serde(default = "default_phase_nodes")]
        phase_nodes: usize,
    },
    TruncatedGaussianArc {
        #[serde(default)]
        center: f64,
        sigma: f64,
        #[serde(default = "default_halfwidth")]
        halfwidth: f64,
        #[serde(default = "default_phase_nodes")]
        phase_nodes: usize,
    },
    /// `atoms = [[mass, theta, omega], ...]`.
    Atoms { atoms: Vec<[f64; 3]> },
    /// Phase law times the `[frequency]` law on a tensor grid.
    Product {
        phase: PhaseShape,
        #[serde(default)]
        center: f64,
        #[serde(default = "default_halfwidth")]
        halfwidth: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sigma: Option<f64>,
        #[serde(default = "default_phase_nodes")]
        phase_nodes: usize,
        #[serde(default = "default_freq_nodes")]
        freq_nodes: usize,
    },
    /// Phase-locked stationary state for the `[frequency]` law. Without `r`
    /// the largest self-consistency root at the model coupling is used.
    PhaseLocked {
        #[serde(default)]
        phi_star: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        r: Option<f64>,
        #[serde(default = "default_freq_nodes")]
        freq_nodes: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimSection {
    pub dt: f64,
    pub t_max: f64,
    pub record_every: usize,
    pub stationarity_tol: f64,
}

impl Default for SimSection {
    fn default() -> Self {
        let d = SimConfig::<f64>::default();
        Self { dt: d.dt, t_max: d.t_max, record_every: d.record_every, stationarity_tol: d.stationarity_tol }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RootsSection {
    pub grid: usize,
    pub kc_tol: f64,
    pub k_max: f64,
}

impl Default for RootsSection {
    fn default() -> Self {
        Self { grid: DEFAULT_GRID, kc_tol: KC_TOL, k_max: K_MAX }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepTarget {
    #[default]
    Kinetic,
    Finite,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub k_min: f64,
    pub k_max: f64,
    pub points: usize,
    #[serde(default)]
    pub target: SweepTarget,
}

impl SweepSection {
    pub fn couplings(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.k_min];
        }
        let span = self.k_max - self.k_min;
        (0..self.points).map(|i| self.k_min + span * i as f64 / (self.points - 1) as f64).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClassifySection {
    pub angle_tol: f64,
    pub mass_tol: f64,
}

impl Default for ClassifySection {
    fn default() -> Self {
        Self { angle_tol: DEFAULT_ANGLE_TOL, mass_tol: DEFAULT_MASS_TOL }
    }
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// Parses a TOML document into the merge tree.
pub fn toml_to_value(text: &str, origin: &str) -> Result<Value, CliError> {
    let table: toml::Table = toml::from_str(text).map_err(|e| config_err(format!("{origin}: {e}")))?;
    serde_json::to_value(table).map_err(|e| config_err(format!("{origin}: {e}")))
}

/// Reads a config file. A `.json` path is treated as an emitted manifest and
/// its `config` object is used.
pub fn load_file(path: &Path) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
    if path.extension().is_some_and(|e| e == "json") {
        let doc: Value = serde_json::from_str(&text).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        doc.get("config")
            .cloned()
            .ok_or_else(|| config_err(format!("{}: manifest has no `config` object", path.display())))
    } else {
        toml_to_value(&text, &path.display().to_string())
    }
}

/// Recursively overlays `top` onto `base`. Tables merge key by key; any
/// other value replaces. A table whose `kind` changes is replaced whole, so a
/// preset's variant fields do not leak into a different variant.
pub fn merge(base: &mut Value, top: Value) {
    match (base, top) {
        (Value::Object(b), Value::Object(t)) => {
            let kind_changed = matches!((b.get("kind"), t.get("kind")), (Some(x), Some(y)) if x != y);
            if kind_changed {
                *b = t;
                return;
            }
            for (k, v) in t {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

/// Applies one `section.key=value` override. The value is read as a TOML
/// value (numbers, booleans, arrays, quoted strings); anything that does not
/// parse is taken as a bare string.
pub fn apply_override(tree: &mut Value, assignment: &str) -> Result<(), CliError> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| config_err(format!("override `{assignment}` is not of the form key=value")))?;
    let key = key.trim();
    let path: Vec<&str> = key.split('.').collect();
    if path.iter().any(|p| p.is_empty()) {
        return Err(config_err(format!("override key `{key}` has an empty component")));
    }
    let raw = raw.trim();
    let value = match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
        Ok(mut t) => serde_json::to_value(t.remove("v").expect("key present"))
            .map_err(|e| config_err(format!("override `{key}`: {e}")))?,
        Err(_) => Value::String(raw.to_string()),
    };
    let mut patch = value;
    for part in path.iter().rev() {
        let mut m = Map::new();
        m.insert((*part).to_string(), patch);
        patch = Value::Object(m);
    }
    merge(tree, patch);
    Ok(())
}

impl RunConfig {
    pub fn from_value(tree: Value) -> Result<Self, CliError> {
        serde_json::from_value(tree).map_err(|e| config_err(e.to_string()))
    }

    pub fn mode(&self) -> Mode {
        self.run.mode.expect("mode resolved before validation")
    }

    pub fn sim_config(&self) -> SimConfig<f64> {
        SimConfig {
            dt: self.sim.dt,
            t_max: self.sim.t_max,
            record_every: self.sim.record_every,
            stationarity_tol: self.sim.stationarity_tol,
            seed: self.run.seed,
        }
    }

    pub fn solver_options(&self) -> SolverOptions<f64> {
        SolverOptions {
            grid: self.roots.grid,
            kc_tol: self.roots.kc_tol,
            k_max: self.roots.k_max,
            ..SolverOptions::default()
        }
    }

    pub fn frequency_law(&self) -> Result<FrequencyDistribution<f64>, CliError> {
        self.frequency.as_ref().ok_or_else(|| config_err("[frequency] section is required for this mode"))?.build()
    }

    /// Builds the kinetic initial datum together with its node count.
    /// `coupling` is used by the phase-locked variant when `r` is absent.
    pub fn density_spec(&self, coupling: f64) -> Result<(DensitySpec<f64>, usize), CliError> {
        let d = self.density.as_ref().ok_or_else(|| config_err("[density] section is required for this mode"))?;
        Ok(match d {
            DensitySection::UniformArc { center, halfwidth, phase_nodes } => {
                (DensitySpec::UniformArc { center: *center, halfwidth: *halfwidth }, *phase_nodes)
            }
            DensitySection::TruncatedGaussianArc { center, sigma, halfwidth, phase_nodes } => (
                DensitySpec::TruncatedGaussianArc { center: *center, sigma: *sigma, halfwidth: *halfwidth },
                *phase_nodes,
            ),
            DensitySection::Atoms { atoms } => (
                DensitySpec::AtomList(atoms.iter().map(|a| Atom { weight: a[0], theta: a[1], omega: a[2] }).collect()),
                1,
            ),
            DensitySection::Product { phase, center, halfwidth, sigma, phase_nodes, freq_nodes } => {
                let law = match phase {
                    PhaseShape::UniformArc => PhaseLaw::UniformArc { center: *center, halfwidth: *halfwidth },
                    PhaseShape::TruncatedGaussianArc => PhaseLaw::TruncatedGaussianArc {
                        center: *center,
                        sigma: sigma.ok_or_else(|| config_err("density.sigma is required for a Gaussian arc"))?,
                        halfwidth: *halfwidth,
                    },
                };
                (
                    DensitySpec::Product { phase: law, freq: self.frequency_law()?, freq_nodes: *freq_nodes },
                    *phase_nodes,
                )
            }
            DensitySection::PhaseLocked { phi_star, r, freq_nodes } => {
                let g = self.frequency_law()?;
                let r = match r {
                    Some(r) => *r,
                    None => kuramoto_core::self_consistency_roots_with(&g, coupling, &self.solver_options())
                        .map_err(|e| config_err(format!("phase-locked density: {e}")))?
                        .largest
                        .ok_or_else(|| {
                            config_err(format!("phase-locked density: no self-consistency root at K = {coupling}"))
                        })?,
                };
                let sd = kuramoto_core::stationary_density(&g, coupling, r, *phi_star)
                    .map_err(|e| config_err(format!("phase-locked density: {e}")))?;
                (sd.density_spec(), *freq_nodes)
            }
        })
    }

    /// Mode-specific presence and range checks, run before any computation.
    pub fn validate(&self) -> Result<(), CliError> {
        let mode = self.run.mode.ok_or_else(|| config_err("no mode given"))?;
        let finite_pos = |x: f64| x.is_finite() && x > 0.0;
        if !(self.model.coupling.is_finite() && self.model.coupling >= 0.0) {
            return Err(config_err(format!("model.coupling must be finite and >= 0, got {}", self.model.coupling)));
        }
        if !(self.classify.angle_tol > 0.0 && self.classify.angle_tol < FRAC_PI_4) {
            return Err(config_err(format!(
                "classify.angle_tol must lie in (0, pi/4), got {}",
                self.classify.angle_tol
            )));
        }
        if !finite_pos(self.classify.mass_tol) {
            return Err(config_err("classify.mass_tol must be positive"));
        }
        if self.roots.grid < 2 || !finite_pos(self.roots.kc_tol) || !finite_pos(self.roots.k_max) {
            return Err(config_err("roots.grid must be >= 2 and roots.kc_tol, roots.k_max positive"));
        }
        let needs_sim = matches!(mode, Mode::Finite | Mode::Kinetic | Mode::Sweep);
        if needs_sim {
            self.sim_config().validate().map_err(|e| config_err(format!("[sim]: {e}")))?;
        }
        if let Some(f) = &self.frequency {
            f.build()?;
        }
        match mode {
            Mode::Finite => self.validate_finite_model()?,
            Mode::Kinetic => {
                self.density_spec(self.model.coupling)?;
            }
            Mode::Roots | Mode::Kc => {
                self.frequency_law()?;
            }
            Mode::Classify => {
                if self.density.is_some() {
                    self.density_spec(self.model.coupling)?;
                } else {
                    self.validate_finite_model()?;
                }
            }
            Mode::Sweep => {
                let s = self.sweep.as_ref().ok_or_else(|| config_err("[sweep] section is required for sweep mode"))?;
                if s.points == 0
                    || !(s.k_min.is_finite() && s.k_max.is_finite() && 0.0 <= s.k_min && s.k_min <= s.k_max)
                {
                    return Err(config_err("sweep needs points >= 1 and 0 <= k_min <= k_max"));
                }
                match s.target {
                    SweepTarget::Finite => self.validate_finite_model()?,
                    SweepTarget::Kinetic => {
                        if matches!(self.density, Some(DensitySection::PhaseLocked { .. })) {
                            return Err(config_err("a phase-locked density depends on K and cannot be swept"));
                        }
                        self.density_spec(s.k_max)?;
                    }
                }
            }
        }
        Ok(())
    }

    fn validate_finite_model(&self) -> Result<(), CliError> {
        let m = &self.model;
        match m.init {
            InitKind::Random => {
                let n = m.n.ok_or_else(|| config_err("model.n is required for random initial phases"))?;
                if n == 0 {
                    return Err(config_err("model.n must be at least 1"));
                }
                if m.phases.is_some() {
                    return Err(config_err("model.phases is only read with init = \"explicit\""));
                }
                if let Some(f) = &m.freqs {
                    if f.len() != n {
                        return Err(config_err(format!("model.freqs has {} entries, model.n is {n}", f.len())));
                    }
                }
            }
            InitKind::ThreeOsc => {
                let d = m.delta0.ok_or_else(|| config_err("model.delta0 is required for init = \"three_osc\""))?;
                if !d.is_finite() {
                    return Err(config_err("model.delta0 must be finite"));
                }
            }
            InitKind::Explicit => {
                let p =
                    m.phases.as_ref().ok_or_else(|| config_err("model.phases is required for init = \"explicit\""))?;
                if p.is_empty() {
                    return Err(config_err("model.phases must not be empty"));
                }
                if let Some(f) = &m.freqs {
                    if f.len() != p.len() {
                        return Err(config_err("model.freqs and model.phases differ in length"));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Resolves a config: preset, then file, then overrides, then the mode from
/// the command line.
pub fn resolve(
    preset: Option<&str>,
    file: Option<&Path>,
    overrides: &[String],
    mode: Option<Mode>,
) -> Result<RunConfig, CliError> {
    let mut tree = Value::Object(Map::new());
    if let Some(name) = preset {
        merge(&mut tree, crate::presets::load(name)?);
    }
    if let Some(path) = file {
        merge(&mut tree, load_file(path)?);
    }
    for o in overrides {
        apply_override(&mut tree, o)?;
    }
    let mut cfg = RunConfig::from_value(tree)?;
    if let Some(m) = mode {
        cfg.run.mode = Some(m);
    }
    cfg.validate()?;
    Ok(cfg)
}
