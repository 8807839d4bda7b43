//! Batch pipeline: check, plan, build, verify, with JSON artifacts at
//! every stage so any step can be reproduced or resumed from disk.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::checker::{self, Verdict};
use crate::config::ExperimentConfig;
use crate::construct::{self, Budget, ConstructionPlan};
use crate::density::Rational;
use crate::space::SparseVector;
use crate::verify::{self, Certificate, HorizonPolicy};
use crate::{Error, Result};

pub const VERDICTS_FILE: &str = "verdicts.json";
pub const PLAN_FILE: &str = "plan.json";
pub const VECTOR_FILE: &str = "vector.json";
pub const CERTIFICATE_FILE: &str = "certificate.json";
pub const CERTIFICATE_CSV_FILE: &str = "certificate.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Everything a full run produces in memory.
#[derive(Clone, Debug)]
pub struct RunArtifacts {
    pub verdicts: Vec<Verdict>,
    pub plan: ConstructionPlan,
    pub vector: SparseVector,
    pub certificate: Certificate,
}

/// Plan scalars copied into the manifest so a run's parameters are
/// readable without opening the plan itself.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DerivedParams {
    pub eta: f64,
    pub s0: u64,
    pub n0: u64,
    pub c: u64,
    pub tau: u32,
    pub delta: Rational,
    pub budget: Budget,
}

impl From<&ConstructionPlan> for DerivedParams {
    fn from(plan: &ConstructionPlan) -> Self {
        DerivedParams {
            eta: plan.eta,
            s0: plan.s0,
            n0: plan.n0,
            c: plan.c,
            tau: plan.tau,
            delta: plan.delta,
            budget: plan.budget,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    /// SHA-256 of the config's canonical JSON form (not of the input
    /// text, so formatting does not change the identity of a run).
    pub config_digest: String,
    pub metric: String,
    pub horizon_policy: HorizonPolicy,
    pub lambda_grid_per_block: u32,
    /// Artifact files this run wrote, in order.
    pub artifacts: Vec<String>,
    /// Present once a plan exists.
    pub derived: Option<DerivedParams>,
}

pub fn config_digest(config: &ExperimentConfig) -> Result<String> {
    let bytes = serde_json::to_vec(config)
        .map_err(|e| Error::InvalidInput(format!("config does not serialize: {e}")))?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::InvalidInput(format!("{name} does not serialize: {e}")))?;
    fs::write(dir.join(name), text + "\n")?;
    Ok(())
}

fn read_json<T: for<'de> Deserialize<'de>>(dir: &Path, name: &str) -> Result<T> {
    let text = fs::read_to_string(dir.join(name))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::InvalidInput(format!("{name} does not parse: {e}")))
}

/// Tracks which artifacts a run has written and finalizes the manifest.
struct Stage<'a> {
    config: &'a ExperimentConfig,
    dir: &'a Path,
    written: Vec<String>,
}

impl<'a> Stage<'a> {
    fn new(config: &'a ExperimentConfig, dir: &'a Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Stage { config, dir, written: Vec::new() })
    }

    fn write<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        write_json(self.dir, name, value)?;
        self.written.push(name.to_string());
        Ok(())
    }

    fn write_raw(&mut self, name: &str, text: &str) -> Result<()> {
        fs::write(self.dir.join(name), text)?;
        self.written.push(name.to_string());
        Ok(())
    }

    fn finish(mut self, derived: Option<DerivedParams>) -> Result<Manifest> {
        let manifest = Manifest {
            config_digest: config_digest(self.config)?,
            metric: self.config.space_metric()?.to_string(),
            horizon_policy: self.config.horizon_policy,
            lambda_grid_per_block: self.config.lambda_grid_per_block,
            artifacts: {
                self.written.push(MANIFEST_FILE.to_string());
                self.written.clone()
            },
            derived,
        };
        write_json(self.dir, MANIFEST_FILE, &manifest)?;
        Ok(manifest)
    }
}

/// Applicability verdicts for the configured family and interval. Reports
/// honestly; gating is the planner's job.
pub fn run_check(config: &ExperimentConfig, out_dir: &Path) -> Result<Vec<Verdict>> {
    config.validate()?;
    let verdicts = checker::check_family_criterion_default(
        &config.family,
        &config.interval()?,
        config.p,
    )?;
    let mut stage = Stage::new(config, out_dir)?;
    stage.write(VERDICTS_FILE, &verdicts)?;
    stage.finish(None)?;
    Ok(verdicts)
}

fn plan_from_config(config: &ExperimentConfig) -> Result<ConstructionPlan> {
    construct::plan(
        &config.family,
        &config.interval()?,
        config.p,
        &config.u_ball()?,
        &config.v_ball()?,
        config.m,
        config.budget_cap,
    )
}

/// Gate on applicability and emit the construction plan.
pub fn run_plan(config: &ExperimentConfig, out_dir: &Path) -> Result<ConstructionPlan> {
    config.validate()?;
    let plan = plan_from_config(config)?;
    let mut stage = Stage::new(config, out_dir)?;
    stage.write(PLAN_FILE, &plan)?;
    let derived = DerivedParams::from(&plan);
    stage.finish(Some(derived))?;
    Ok(plan)
}

/// Plan and assemble the vector.
pub fn run_construct(
    config: &ExperimentConfig,
    out_dir: &Path,
) -> Result<(ConstructionPlan, SparseVector)> {
    config.validate()?;
    let plan = plan_from_config(config)?;
    let vector = construct::build(&plan)?;
    let mut stage = Stage::new(config, out_dir)?;
    stage.write(PLAN_FILE, &plan)?;
    stage.write(VECTOR_FILE, &vector)?;
    let derived = DerivedParams::from(&plan);
    stage.finish(Some(derived))?;
    Ok((plan, vector))
}

/// Verify from the plan and vector previously written to out_dir. The
/// plan is re-validated before being trusted, and the certificate it
/// yields is identical to the one an in-memory run produces.
pub fn run_verify(config: &ExperimentConfig, out_dir: &Path) -> Result<Certificate> {
    config.validate()?;
    let plan: ConstructionPlan = read_json(out_dir, PLAN_FILE)?;
    plan.validate()?;
    let vector: SparseVector = read_json(out_dir, VECTOR_FILE)?;
    let certificate = certify(config, &plan, &vector)?;
    let mut stage = Stage::new(config, out_dir)?;
    stage.write(CERTIFICATE_FILE, &certificate)?;
    stage.write_raw(CERTIFICATE_CSV_FILE, &verify::certificate_csv(&certificate))?;
    let derived = DerivedParams::from(&plan);
    stage.finish(Some(derived))?;
    Ok(certificate)
}

fn certify(
    config: &ExperimentConfig,
    plan: &ConstructionPlan,
    vector: &SparseVector,
) -> Result<Certificate> {
    let grid = verify::default_grid(plan, config.lambda_grid_per_block);
    verify::verify_density_certificate(plan, vector, &grid, config.horizon_policy)
}

/// The full pipeline: check, plan, build, verify, all artifacts written.
/// Verdicts are written even when the planner then rejects the family, so
/// a failed run still explains itself.
pub fn run_all(config: &ExperimentConfig, out_dir: &Path) -> Result<RunArtifacts> {
    config.validate()?;
    let mut stage = Stage::new(config, out_dir)?;
    let verdicts = checker::check_family_criterion_default(
        &config.family,
        &config.interval()?,
        config.p,
    )?;
    stage.write(VERDICTS_FILE, &verdicts)?;
    let plan = match plan_from_config(config) {
        Ok(plan) => plan,
        Err(e) => {
            stage.finish(None)?;
            return Err(e);
        }
    };
    let vector = construct::build(&plan)?;
    let certificate = certify(config, &plan, &vector)?;
    stage.write(PLAN_FILE, &plan)?;
    stage.write(VECTOR_FILE, &vector)?;
    stage.write(CERTIFICATE_FILE, &certificate)?;
    stage.write_raw(CERTIFICATE_CSV_FILE, &verify::certificate_csv(&certificate))?;
    let derived = DerivedParams::from(&plan);
    stage.finish(Some(derived))?;
    Ok(RunArtifacts { verdicts, plan, vector, certificate })
}
