//! Experiment configuration: a target id plus optional overrides of its defaults.

use serde::{Deserialize, Serialize};
use varharm_core::potentials::OperatorSpecFile;

/// What a user may put in a config file. Every field is optional; missing ones fall back
/// to the target's defaults, and the command line may supply the target.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub target: String,
    pub dim: Option<usize>,
    pub half_width: Option<f64>,
    pub points: Option<usize>,
    pub exponent: Option<String>,
    pub alpha: Option<f64>,
    pub p0: Option<f64>,
    pub atom_q: Option<f64>,
    pub atoms: Option<usize>,
    pub radius_min: Option<f64>,
    pub radius_max: Option<f64>,
    pub center_spread: Option<f64>,
    pub relative_centers: Option<bool>,
    pub cases: Option<usize>,
    pub seed: Option<u64>,
    pub stability_tol: Option<f64>,
    pub spread_max: Option<f64>,
    pub slope_tol: Option<f64>,
    pub refine: Option<bool>,
    pub operator: Option<OperatorSpecFile>,
}

impl ExperimentConfig {
    pub fn for_target(target: &str) -> Self {
        Self {
            target: target.to_string(),
            ..Self::default()
        }
    }
}

/// Fully resolved parameters of one run.
#[derive(Clone, Debug, Serialize)]
pub struct Settings {
    pub target: String,
    pub dim: usize,
    pub half_width: f64,
    pub points: usize,
    pub exponent: String,
    pub alpha: f64,
    pub p0: f64,
    pub atom_q: f64,
    pub atoms: usize,
    pub radius_min: f64,
    pub radius_max: f64,
    pub center_spread: f64,
    /// Centres scale with the radius, `spread * r * u`, so the ladder is dilation-invariant.
    pub relative_centers: bool,
    pub cases: usize,
    pub seed: u64,
    pub stability_tol: f64,
    pub spread_max: f64,
    pub slope_tol: f64,
    pub refine: bool,
    pub operator: Option<OperatorSpecFile>,
}

impl Settings {
    /// Shared defaults: 1-D desk scale.
    pub fn base(target: &str) -> Self {
        Self {
            target: target.to_string(),
            dim: 1,
            half_width: 8.0,
            points: 1024,
            exponent: "even-sym:bump:0.6:0.8".into(),
            alpha: 0.5,
            p0: 0.6,
            atom_q: 64.0,
            atoms: 10,
            radius_min: 0.25,
            radius_max: 2.0,
            center_spread: 1.0,
            relative_centers: false,
            cases: 20,
            seed: 42,
            stability_tol: 0.25,
            spread_max: 10.0,
            slope_tol: 0.1,
            refine: true,
            operator: None,
        }
    }

    pub fn overlay(mut self, c: &ExperimentConfig) -> anyhow::Result<Self> {
        macro_rules! take {
            ($($f:ident),*) => { $( if let Some(v) = c.$f.clone() { self.$f = v; } )* };
        }
        take!(
            dim,
            half_width,
            points,
            exponent,
            alpha,
            p0,
            atom_q,
            atoms,
            radius_min,
            radius_max,
            center_spread,
            relative_centers,
            cases,
            seed,
            stability_tol,
            spread_max,
            slope_tol,
            refine
        );
        if c.operator.is_some() {
            self.operator = c.operator.clone();
        }
        anyhow::ensure!(self.stability_tol > 0.0, "stability_tol must be positive");
        anyhow::ensure!(self.spread_max > 1.0, "spread_max must exceed 1");
        anyhow::ensure!(self.slope_tol > 0.0, "slope_tol must be positive");
        anyhow::ensure!(
            self.radius_min > 0.0 && self.radius_max >= self.radius_min,
            "bad radius range"
        );
        anyhow::ensure!(self.cases > 0 && self.atoms > 0, "cases and atoms must be positive");
        Ok(self)
    }
}
