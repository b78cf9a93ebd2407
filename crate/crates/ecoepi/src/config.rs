//! JSON configuration. Every block is optional at parse time; commands
//! check for the blocks they need. Unknown keys are rejected and model
//! constants are validated while parsing.

use std::path::Path;

use ecoepi_core::model::PARAMETER_NAMES;
use ecoepi_core::simulate::RunSettings;
use ecoepi_core::steady::SteadyTarget;
use ecoepi_core::verify::{InitialData, Scenario};
use ecoepi_core::{Boundary, Grid, Parameters, PreyPredatorParams};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Model constants as written in a config. `gamma` / `sigma` default to
/// `ell` / `theta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsInput {
    a: f64,
    b: f64,
    c: f64,
    k: f64,
    ell: f64,
    #[serde(default)]
    gamma: Option<f64>,
    theta: f64,
    #[serde(default)]
    sigma: Option<f64>,
    rho: f64,
    d: f64,
    #[serde(rename = "D")]
    big_d: f64,
}

/// Validated model constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ParamsInput", into = "ParamsInput")]
pub struct ModelParams(pub Parameters);

impl TryFrom<ParamsInput> for ModelParams {
    type Error = String;

    fn try_from(v: ParamsInput) -> Result<Self, String> {
        let p = Parameters {
            a: v.a,
            b: v.b,
            c: v.c,
            k: v.k,
            ell: v.ell,
            gamma: v.gamma.unwrap_or(v.ell),
            theta: v.theta,
            sigma: v.sigma.unwrap_or(v.theta),
            rho: v.rho,
            d: v.d,
            big_d: v.big_d,
        };
        p.validate().map_err(|e| e.to_string())?;
        Ok(ModelParams(p))
    }
}

impl From<ModelParams> for ParamsInput {
    fn from(m: ModelParams) -> Self {
        let p = m.0;
        ParamsInput {
            a: p.a,
            b: p.b,
            c: p.c,
            k: p.k,
            ell: p.ell,
            gamma: Some(p.gamma),
            theta: p.theta,
            sigma: Some(p.sigma),
            rho: p.rho,
            d: p.d,
            big_d: p.big_d,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub length: f64,
    pub n: usize,
    pub bc: Boundary,
}

impl GridConfig {
    pub fn build(&self) -> Result<Grid, CliError> {
        Grid::new(self.length, self.n, self.bc).map_err(|e| CliError::Config(format!("grid: {e}")))
    }
}

fn default_tol() -> f64 {
    1e-3
}

fn default_window() -> usize {
    10
}

fn default_initial() -> InitialData {
    InitialData::Perturbed
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(rename = "T")]
    pub horizon: f64,
    pub dt: f64,
    pub sample_every: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_window")]
    pub window: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot_ratio: Option<f64>,
    #[serde(default = "default_initial")]
    pub initial: InitialData,
}

impl RunConfig {
    pub fn settings(&self) -> RunSettings {
        RunSettings {
            horizon: self.horizon,
            dt: self.dt,
            sample_every: self.sample_every,
            snapshot_ratio: self.snapshot_ratio,
        }
    }

    fn validate(&self) -> Result<(), CliError> {
        let bad = |m: &str| Err(CliError::Config(format!("run: {m}")));
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return bad("T must be finite and > 0");
        }
        if !(self.dt.is_finite() && self.dt > 0.0 && self.dt <= self.horizon) {
            return bad("dt must be in (0, T]");
        }
        if self.sample_every == 0 {
            return bad("sample_every must be >= 1");
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return bad("tol must be > 0");
        }
        if self.window == 0 {
            return bad("window must be >= 1");
        }
        if let Some(r) = self.snapshot_ratio {
            if !(r.is_finite() && r > 1.0) {
                return bad("snapshot_ratio must be > 1");
            }
        }
        Ok(())
    }
}

/// Potential `q`: a constant or one value per grid node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PotentialConfig {
    Constant(f64),
    Nodal(Vec<f64>),
}

impl Default for PotentialConfig {
    fn default() -> Self {
        PotentialConfig::Constant(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EigenConfig {
    pub d: f64,
    #[serde(default)]
    pub q: PotentialConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SteadyConfig {
    pub target: SteadyTarget,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub axis: String,
    pub values: Vec<f64>,
}

/// Constant initial data for `simulate`: `[S, I, P]`, or `[u, v]` for the
/// two-species system. Without it, seeded data around the predicted limit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constant: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub params: ModelParams,
    pub grid: GridConfig,
    /// Falls back to the top-level run block.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub run: Option<RunConfig>,
    /// Also check that every non-attracting constant equilibrium is
    /// escaped (Neumann only).
    #[serde(default)]
    pub escape: bool,
}

/// A two-species run scored by its Lyapunov functional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LyapunovConfig {
    pub name: String,
    pub params: PreyPredatorParams,
    pub grid: GridConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub run: Option<RunConfig>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<ModelParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub run: Option<RunConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eigen: Option<EigenConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steady: Option<SteadyConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulate: Option<SimulateConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prey_predator: Option<PreyPredatorParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenarios: Option<Vec<ScenarioConfig>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lyapunov: Option<Vec<LyapunovConfig>>,
}

impl Config {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: Config = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Checks that do not depend on the command.
    pub fn validate(&self) -> Result<(), CliError> {
        if let Some(g) = &self.grid {
            g.build()?;
        }
        if let Some(r) = &self.run {
            r.validate()?;
        }
        if let Some(e) = &self.eigen {
            if !(e.d.is_finite() && e.d > 0.0) {
                return Err(CliError::Config("eigen: d must be finite and > 0".into()));
            }
            match &e.q {
                PotentialConfig::Constant(c) if !c.is_finite() => {
                    return Err(CliError::Config("eigen: q must be finite".into()))
                }
                PotentialConfig::Nodal(v) => {
                    if v.iter().any(|x| !x.is_finite()) {
                        return Err(CliError::Config("eigen: q must be finite".into()));
                    }
                    if let Some(g) = &self.grid {
                        if g.bc == Boundary::Dirichlet && v.len() != g.n {
                            return Err(CliError::Config(format!(
                                "eigen: q has {} values, grid has {} nodes",
                                v.len(),
                                g.n
                            )));
                        }
                    }
                }
                _ => {}
            }
        }
        if let Some(s) = &self.sweep {
            if !PARAMETER_NAMES.contains(&s.axis.as_str()) {
                return Err(CliError::Config(format!("sweep: unknown axis {:?}", s.axis)));
            }
            ecoepi_core::verify::check_sweep_values(&s.values).map_err(|e| CliError::Config(format!("sweep: {e}")))?;
        }
        if let Some(q) = &self.prey_predator {
            q.validate().map_err(|e| CliError::Config(format!("prey_predator: {e}")))?;
        }
        if let Some(sim) = &self.simulate {
            if let Some(c) = &sim.constant {
                if c.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                    return Err(CliError::Config("simulate: constant data must be finite and >= 0".into()));
                }
            }
        }
        for sc in self.scenarios.iter().flatten() {
            sc.grid.build()?;
            let run = sc.run.or(self.run).ok_or_else(|| {
                CliError::Config(format!("scenario {:?}: no run block", sc.name))
            })?;
            run.validate()?;
        }
        for ly in self.lyapunov.iter().flatten() {
            ly.grid.build()?;
            ly.params
                .validate()
                .map_err(|e| CliError::Config(format!("lyapunov {:?}: {e}", ly.name)))?;
            let run = ly.run.or(self.run).ok_or_else(|| {
                CliError::Config(format!("lyapunov {:?}: no run block", ly.name))
            })?;
            run.validate()?;
        }
        Ok(())
    }

    pub fn require_params(&self) -> Result<Parameters, CliError> {
        self.params.map(|m| m.0).ok_or_else(|| missing("params"))
    }

    pub fn require_grid(&self) -> Result<Grid, CliError> {
        self.grid.ok_or_else(|| missing("grid"))?.build()
    }

    pub fn require_run(&self) -> Result<RunConfig, CliError> {
        self.run.ok_or_else(|| missing("run"))
    }

    /// The scenario described by the top-level params/grid/run blocks.
    pub fn base_scenario(&self, name: &str) -> Result<Scenario, CliError> {
        let run = self.require_run()?;
        Ok(Scenario {
            name: name.to_string(),
            params: self.require_params()?,
            grid: self.require_grid()?,
            run: run.settings(),
            tol: run.tol,
            window: run.window,
            seed: run.seed,
            initial: run.initial,
        })
    }
}

impl ScenarioConfig {
    pub fn scenario(&self, fallback: Option<RunConfig>) -> Result<Scenario, CliError> {
        let run = self.run.or(fallback).ok_or_else(|| missing("run"))?;
        Ok(Scenario {
            name: self.name.clone(),
            params: self.params.0,
            grid: self.grid.build()?,
            run: run.settings(),
            tol: run.tol,
            window: run.window,
            seed: run.seed,
            initial: run.initial,
        })
    }
}

fn missing(block: &str) -> CliError {
    CliError::Config(format!("missing {block:?} block"))
}
