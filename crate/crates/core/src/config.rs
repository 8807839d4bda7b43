//! Experiment configuration: the JSON surface of the batch front-end.
//!
//! Parsing is two-stage. The structural stage is plain serde and reports
//! the first malformed field; the semantic stage runs on a structurally
//! valid document and collects every violated constraint at once, so a CI
//! user fixes a bad config in one round trip.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::space::{FNormLadder, OpenBall, Seminorm, SparseVector, SpaceMetric};
use crate::verify::HorizonPolicy;
use crate::weights::{CompactInterval, WeightFamily};
use crate::{construct, Error, Result};

/// Metric the balls live in. The plain l^p metric takes its exponent from
/// the config's p; an F-norm lists its seminorm ladder explicitly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MetricSpec {
    Lp,
    Fnorm { seminorms: Vec<Seminorm> },
}

impl Default for MetricSpec {
    fn default() -> Self {
        MetricSpec::Lp
    }
}

impl MetricSpec {
    pub fn build(&self, p: f64) -> Result<SpaceMetric> {
        match self {
            MetricSpec::Lp => SpaceMetric::lp(p),
            MetricSpec::Fnorm { seminorms } => {
                Ok(SpaceMetric::f_norm(FNormLadder::new(seminorms.clone())?))
            }
        }
    }
}

/// An open ball given by its center's sparse entries and a radius.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallSpec {
    pub center: SparseVector,
    pub radius: f64,
}

fn default_grid_per_block() -> u32 {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub family: WeightFamily,
    pub p: f64,
    /// Parameter interval as [a, b].
    pub k: [f64; 2],
    pub u: BallSpec,
    pub v: BallSpec,
    /// Visits are sought at times >= m.
    pub m: u64,
    pub budget_cap: u128,
    #[serde(default = "default_grid_per_block")]
    pub lambda_grid_per_block: u32,
    #[serde(default)]
    pub horizon_policy: HorizonPolicy,
    #[serde(default)]
    pub metric: MetricSpec,
    /// Where pipeline artifacts are written; defaults to the working
    /// directory at run time.
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn interval(&self) -> Result<CompactInterval> {
        CompactInterval::new(self.k[0], self.k[1])
    }

    pub fn space_metric(&self) -> Result<SpaceMetric> {
        self.metric.build(self.p)
    }

    pub fn u_ball(&self) -> Result<OpenBall> {
        OpenBall::new(self.u.center.clone(), self.u.radius, self.space_metric()?)
    }

    pub fn v_ball(&self) -> Result<OpenBall> {
        OpenBall::new(self.v.center.clone(), self.v.radius, self.space_metric()?)
    }

    /// Every semantic constraint, collected rather than short-circuited.
    fn semantic_errors(&self) -> Vec<String> {
        let mut errors = Vec::new();
        let mut err = |field: &str, msg: String| errors.push(format!("{field}: {msg}"));

        if let Err(e) = self.family.validate() {
            err("family", e.to_string());
        }
        if !self.p.is_finite() || self.p < 1.0 {
            err("p", format!("exponent {} must be finite and >= 1", self.p));
        }
        match self.interval() {
            Err(e) => err("k", e.to_string()),
            Ok(k) => {
                // parameters must sit strictly inside the family's workable
                // range, not just inside the evaluable one
                if let Some(bound) = self.family.theorem_lower_bound(self.p) {
                    if k.lower() <= bound {
                        err(
                            "k",
                            format!(
                                "lower endpoint {} must exceed {bound} for this family at p = {}",
                                k.lower(),
                                self.p
                            ),
                        );
                    }
                }
            }
        }
        for (field, ball) in [("u", &self.u), ("v", &self.v)] {
            if !(ball.radius.is_finite() && ball.radius > 0.0) {
                err(field, format!("radius {} must be finite and positive", ball.radius));
            }
        }
        if self.m < 1 {
            err("m", "minimum visit time must be >= 1".into());
        }
        if self.budget_cap < 1 {
            err("budget_cap", "cap must be >= 1".into());
        }
        if self.lambda_grid_per_block < 1 {
            err("lambda_grid_per_block", "grid density must be >= 1".into());
        }
        match self.space_metric() {
            Err(e) => err("metric", e.to_string()),
            Ok(metric) => {
                if let Err(e) = construct::check_metric_compatible(&metric, self.p) {
                    err("metric", e.to_string());
                }
            }
        }
        errors
    }

    pub fn validate(&self) -> Result<()> {
        let errors = self.semantic_errors();
        if errors.is_empty() {
            Ok(())
        } else {
            Err(Error::Config { errors })
        }
    }
}

/// Parse and validate a JSON config document.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let config: ExperimentConfig = serde_json::from_str(text)
        .map_err(|e| Error::Config { errors: vec![format!("document: {e}")] })?;
    config.validate()?;
    Ok(config)
}
