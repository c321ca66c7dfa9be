//! Run configuration in TOML. Unknown keys are rejected and omitted keys
//! take the desk defaults.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Coord, PlanarRect};
use crate::gridgen::ParamSeed;
use crate::planner::{validate_plan, ParamPlan, PlanReport, DEFAULT_K_CAP};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Crossing,
    Road,
    Fkg,
    Census,
}

fn default_gamma() -> f64 {
    1.0
}
fn default_nu0() -> u64 {
    1
}
fn default_c() -> f64 {
    0.5
}
fn default_trials() -> usize {
    1000
}
fn default_viewport() -> [Coord; 2] {
    [600, 600]
}
fn default_p() -> Vec<f64> {
    vec![0.6, 0.9]
}
fn default_census_p() -> f64 {
    0.95
}
fn default_experiments() -> Vec<Experiment> {
    vec![
        Experiment::Crossing,
        Experiment::Road,
        Experiment::Fkg,
        Experiment::Census,
    ]
}
fn default_out() -> PathBuf {
    PathBuf::from("out")
}
fn default_k_cap() -> u64 {
    DEFAULT_K_CAP
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub l0: Coord,
    pub d0: Coord,
    /// Frame counts `L_1..L_K`.
    #[serde(rename = "L")]
    pub frames: Vec<Coord>,
    pub seed: u64,
    /// Width and height of the viewport, anchored at the origin.
    #[serde(default = "default_viewport")]
    pub viewport: [Coord; 2],
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default = "default_nu0")]
    pub nu0: u64,
    #[serde(default = "default_c")]
    pub c: f64,
    /// Retention probabilities for the crossing and road experiments.
    #[serde(default = "default_p")]
    pub p: Vec<f64>,
    #[serde(default = "default_census_p")]
    pub census_p: f64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_experiments")]
    pub experiments: Vec<Experiment>,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    /// Explicit slice counts per index `j`; chosen automatically if absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<Vec<usize>>,
    #[serde(default = "default_k_cap")]
    pub k_cap: u64,
    /// Require `l_i` to increase strictly.
    #[serde(default)]
    pub strict: bool,
    /// Span box for the census; the default window hull if absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub span_box: Option<[Coord; 4]>,
}

fn bad(key: &str, reason: impl Into<String>) -> Error {
    Error::Config {
        key: key.into(),
        reason: reason.into(),
    }
}

impl RunConfig {
    /// Desk instance with the given seed.
    pub fn desk(seed: u64) -> Self {
        Self {
            l0: 2,
            d0: 3,
            frames: vec![3, 4, 5],
            seed,
            viewport: default_viewport(),
            gamma: default_gamma(),
            nu0: default_nu0(),
            c: default_c(),
            p: default_p(),
            census_p: default_census_p(),
            trials: default_trials(),
            experiments: default_experiments(),
            out: default_out(),
            m: Some(vec![1, 1, 1, 1, 3, 3]),
            k_cap: default_k_cap(),
            strict: false,
            span_box: None,
        }
    }

    pub fn param_seed(&self) -> ParamSeed {
        ParamSeed::new(self.l0, self.d0, self.frames.clone(), self.seed)
    }

    pub fn viewport_rect(&self) -> PlanarRect {
        PlanarRect::from_bounds(0, self.viewport[0] - 1, 0, self.viewport[1] - 1)
    }

    pub fn span_rect(&self) -> Option<PlanarRect> {
        self.span_box
            .map(|[x0, x1, y0, y1]| PlanarRect::from_bounds(x0, x1, y0, y1))
    }

    pub fn plan(&self) -> Result<ParamPlan> {
        ParamPlan::new(
            self.param_seed(),
            self.gamma,
            self.nu0,
            self.c,
            self.m.clone(),
            self.k_cap,
        )
    }

    /// Range checks per key, then the full plan validation.
    pub fn validate(&self) -> Result<PlanReport> {
        if self.l0 < 1 {
            return Err(bad("l0", "must be at least 1"));
        }
        if self.d0 < 1 {
            return Err(bad("d0", "must be at least 1"));
        }
        if self.frames.is_empty() || self.frames.iter().any(|&l| l < 2) {
            return Err(bad("L", "needs at least one entry, each at least 2"));
        }
        if self.viewport.iter().any(|&s| s < 1) {
            return Err(bad("viewport", "sides must be positive"));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(bad(
                "gamma",
                format!("{} is not a positive number", self.gamma),
            ));
        }
        if self.nu0 < 1 {
            return Err(bad("nu0", "must be a positive integer"));
        }
        if !(self.c > 0.0 && self.c < 1.0) {
            return Err(bad("c", "must lie in (0, 1)"));
        }
        if let Some(p) = self.p.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(bad("p", format!("{p} is outside [0, 1]")));
        }
        if !(0.0..=1.0).contains(&self.census_p) {
            return Err(bad("census_p", "must lie in [0, 1]"));
        }
        if self.trials < 1 {
            return Err(bad("trials", "must be at least 1"));
        }
        if let Some(m) = &self.m {
            if m.len() != 2 * self.frames.len() {
                return Err(bad(
                    "m",
                    format!("needs {} entries, one per index j", 2 * self.frames.len()),
                ));
            }
        }
        if let Some([x0, x1, y0, y1]) = self.span_box {
            if x0 > x1 || y0 > y1 {
                return Err(bad(
                    "span_box",
                    "expects [x0, x1, y0, y1] with x0 <= x1 and y0 <= y1",
                ));
            }
        }
        let plan = self.plan().map_err(|e| bad("plan", e.to_string()))?;
        validate_plan(&plan, self.strict).map_err(|e| bad("plan", e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

/// Parses and validates a configuration.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::ConfigParse(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}
