//! Grid verification of a built vector against its plan.
//!
//! A certificate is empirical: it checks membership, scheduled visits, and
//! visit densities at finitely many grid parameters, and says nothing about
//! parameters between grid points. Continuity makes nearby parameters
//! behave alike, but no interval arithmetic is attempted here.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::construct::ConstructionPlan;
use crate::density::{best_density_from, visiting_times, visits_at, DensityReport};
use crate::par;
use crate::space::{OpenBall, SparseVector};
use crate::{Error, Result};

/// How much of a block's horizon each grid parameter walks.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HorizonPolicy {
    /// Evaluate the orbit at scheduled times only. This undercounts the
    /// true visiting set, so a passing density is conservative.
    #[default]
    Scheduled,
    /// Evaluate every time up to the block horizon. Cost grows with
    /// horizon * support; meant for small schedules.
    Exhaustive,
}

/// Outcome at one grid parameter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaOutcome {
    pub lambda: f64,
    /// Block whose subinterval contains lambda; a boundary parameter
    /// belongs to the block ending at it.
    pub block: u32,
    /// Scheduled times examined, l_t + 1 for block t.
    pub checked_times: u64,
    /// Scheduled times whose orbit point landed in V.
    pub passed_times: u64,
    /// Best finite-horizon density at or after the plan's M, against the
    /// plan's exact threshold.
    pub density: DensityReport,
    /// Every scheduled time landed in V and the density cleared the
    /// threshold.
    pub passed: bool,
}

/// Verification record for one (plan, vector, grid) triple.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    /// SHA-256 of the plan's JSON, tying the record to one exact plan.
    pub plan_digest: String,
    pub metric: String,
    pub policy: HorizonPolicy,
    /// What this record claims: grid-point checks, not a statement about
    /// the whole parameter interval.
    pub scope: String,
    /// z lies in the source ball U (parameter independent).
    pub membership: bool,
    /// The grid actually used: sorted, deduplicated, within [a, b].
    pub grid: Vec<f64>,
    pub outcomes: Vec<LambdaOutcome>,
    /// Set when the grid was empty; overall is then vacuous.
    pub degenerate: bool,
    pub overall: bool,
}

/// Hex SHA-256 of the plan's JSON serialization.
pub fn plan_digest(plan: &ConstructionPlan) -> Result<String> {
    let bytes = serde_json::to_vec(plan)
        .map_err(|e| Error::InvalidInput(format!("plan does not serialize: {e}")))?;
    let digest = Sha256::digest(&bytes);
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

pub fn verify_membership(z: &SparseVector, u: &OpenBall) -> bool {
    u.contains(z)
}

/// Check one parameter: all scheduled visits of its block, then the best
/// density from the plan's M on the block horizon.
pub fn verify_lambda(
    plan: &ConstructionPlan,
    z: &SparseVector,
    lambda: f64,
    policy: HorizonPolicy,
) -> Result<LambdaOutcome> {
    let block = plan.block_of(lambda)?;
    let horizon = plan.horizon(block);
    let schedule = plan.scheduled_times(block);
    let profile = match policy {
        HorizonPolicy::Scheduled => {
            visits_at(&plan.family, lambda, z, &plan.v, &schedule, horizon)?
        }
        HorizonPolicy::Exhaustive => visiting_times(&plan.family, lambda, z, &plan.v, horizon)?,
    };
    let checked_times = schedule.len() as u64;
    let passed_times = match policy {
        // under the scheduled policy every recorded visit is a scheduled one
        HorizonPolicy::Scheduled => profile.times().len() as u64,
        HorizonPolicy::Exhaustive => schedule
            .iter()
            .filter(|n| profile.times().binary_search(n).is_ok())
            .count() as u64,
    };
    let density = best_density_from(&profile, plan.m.min(horizon), plan.delta)?;
    Ok(LambdaOutcome {
        lambda,
        block,
        checked_times,
        passed_times,
        density,
        passed: passed_times == checked_times && density.passed,
    })
}

/// Scheduled-visit pass counts per grid parameter, as (lambda, passed,
/// checked) triples.
pub fn verify_scheduled_visits(
    plan: &ConstructionPlan,
    z: &SparseVector,
    grid: &[f64],
) -> Result<Vec<(f64, u64, u64)>> {
    grid.iter()
        .map(|&lambda| {
            let out = verify_lambda(plan, z, lambda, HorizonPolicy::Scheduled)?;
            Ok((lambda, out.passed_times, out.checked_times))
        })
        .collect()
}

/// Full certificate over a grid. Per-parameter checks run independently
/// (in parallel under the default feature) and are aggregated in sorted
/// parameter order, so the result is deterministic.
pub fn verify_density_certificate(
    plan: &ConstructionPlan,
    z: &SparseVector,
    grid: &[f64],
    policy: HorizonPolicy,
) -> Result<Certificate> {
    let mut grid: Vec<f64> = grid.to_vec();
    if grid.iter().any(|l| l.is_nan()) {
        return Err(Error::InvalidInput("grid contains NaN".into()));
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let membership = verify_membership(z, &plan.u);
    let outcomes = par::try_map_collect(grid.clone(), |lambda| {
        verify_lambda(plan, z, lambda, policy)
    })?;
    let degenerate = outcomes.is_empty();
    let overall = membership && outcomes.iter().all(|o| o.passed);
    Ok(Certificate {
        plan_digest: plan_digest(plan)?,
        metric: plan.u.metric.to_string(),
        policy,
        scope: "empirical: finite parameter grid only".into(),
        membership,
        grid,
        outcomes,
        degenerate,
        overall,
    })
}

/// Evenly spaced grid with per_block segments in every subinterval. Block
/// endpoints (a, b, and every interior subdivision point) are included
/// exactly, never recomputed through arithmetic that could drift off them.
pub fn default_grid(plan: &ConstructionPlan, per_block: u32) -> Vec<f64> {
    let per_block = per_block.max(1);
    let mut grid = Vec::new();
    for t in 1..=plan.tau as usize {
        let lo = plan.lambda_points[t - 1];
        let hi = plan.lambda_points[t];
        grid.push(lo);
        for i in 1..per_block {
            grid.push(lo + (hi - lo) * i as f64 / per_block as f64);
        }
    }
    grid.push(plan.lambda_points[plan.tau as usize]);
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

/// CSV companion: one row per grid parameter.
pub fn certificate_csv(cert: &Certificate) -> String {
    let mut out =
        String::from("lambda,t,checked_times,passed_times,best_density_num,best_density_den\n");
    for o in &cert.outcomes {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            o.lambda,
            o.block,
            o.checked_times,
            o.passed_times,
            o.density.best_density.num,
            o.density.best_density.den
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct;
    use crate::density::Rational;
    use crate::space::{Seminorm, SpaceMetric};
    use crate::weights::{CompactInterval, WeightFamily};

    fn l2() -> SpaceMetric {
        SpaceMetric::lp(2.0).unwrap()
    }

    fn demo_plan() -> construct::ConstructionPlan {
        construct::plan(
            &WeightFamily::ConstantMultiple,
            &CompactInterval::new(2.0, 2.0).unwrap(),
            2.0,
            &OpenBall::new(SparseVector::zero(), 1.0, l2()).unwrap(),
            &OpenBall::new(SparseVector::basis(0), 0.5, l2()).unwrap(),
            1,
            1_000_000,
        )
        .unwrap()
    }

    fn narrow_plan() -> construct::ConstructionPlan {
        construct::plan(
            &WeightFamily::RatioPower,
            &CompactInterval::new(1.0, 1.03).unwrap(),
            2.0,
            &OpenBall::new(SparseVector::zero(), 1.0, l2()).unwrap(),
            &OpenBall::new(SparseVector::basis(0), 0.6, l2()).unwrap(),
            1,
            10_000_000,
        )
        .unwrap()
    }

    #[test]
    fn membership_is_strict() {
        let u = OpenBall::new(SparseVector::zero(), 1.0, l2()).unwrap();
        assert!(verify_membership(&SparseVector::zero(), &u));
        // a point exactly on the sphere is outside the open ball
        assert!(!verify_membership(&SparseVector::basis(3), &u));
    }

    #[test]
    fn demo_scheduled_visits_all_pass() {
        let plan = demo_plan();
        let z = construct::build(&plan).unwrap();
        assert!(verify_membership(&z, &plan.u));

        let counts = verify_scheduled_visits(&plan, &z, &[2.0]).unwrap();
        assert_eq!(counts, vec![(2.0, 7, 7)]);

        // hand checks: the orbit at the first scheduled time has unit mass
        // on e_0 plus a fast-decaying cross tail; the orbit at the last is
        // exactly e_0
        let at6 = plan.family.shift_power(2.0, 6, &z).unwrap();
        assert_eq!(at6.coeff(0), 1.0);
        assert_eq!(at6.coeff(4), 2f64.powi(-4));
        let at30 = plan.family.shift_power(2.0, 30, &z).unwrap();
        assert_eq!(at30.entries(), &[(0, 1.0)]);
    }

    #[test]
    fn demo_certificate_passes_with_exact_density() {
        let plan = demo_plan();
        let z = construct::build(&plan).unwrap();
        let cert =
            verify_density_certificate(&plan, &z, &[2.0], HorizonPolicy::Scheduled).unwrap();
        assert!(cert.overall && cert.membership && !cert.degenerate);
        assert_eq!(cert.outcomes.len(), 1);
        let o = &cert.outcomes[0];
        assert_eq!((o.block, o.checked_times, o.passed_times), (1, 7, 7));
        assert_eq!(o.density.best_density, Rational::new(7, 31));
        assert_eq!(o.density.achieved_at, 30);
        assert!(o.density.best_density > plan.delta);
        assert_eq!(cert.plan_digest.len(), 64);

        let csv = certificate_csv(&cert);
        assert_eq!(
            csv,
            "lambda,t,checked_times,passed_times,best_density_num,best_density_den\n2,1,7,7,7,31\n"
        );
    }

    #[test]
    fn empty_grid_is_vacuous_but_flagged() {
        let plan = demo_plan();
        let z = construct::build(&plan).unwrap();
        let cert = verify_density_certificate(&plan, &z, &[], HorizonPolicy::Scheduled).unwrap();
        assert!(cert.degenerate);
        assert!(cert.overall);
        assert!(cert.outcomes.is_empty());
    }

    #[test]
    fn grid_outside_interval_is_rejected() {
        let plan = demo_plan();
        let z = construct::build(&plan).unwrap();
        let err = verify_density_certificate(&plan, &z, &[2.5], HorizonPolicy::Scheduled);
        assert!(matches!(err, Err(Error::InvalidInput(_))));
    }

    #[test]
    fn scheduled_densities_are_conservative() {
        // exhaustive scans can only find more visits on the same horizon
        let plan = demo_plan();
        let z = construct::build(&plan).unwrap();
        let s = verify_lambda(&plan, &z, 2.0, HorizonPolicy::Scheduled).unwrap();
        let e = verify_lambda(&plan, &z, 2.0, HorizonPolicy::Exhaustive).unwrap();
        assert!(s.density.best_density <= e.density.best_density);
        assert_eq!(s.passed_times, e.passed_times);
        assert!(e.passed);
    }

    #[test]
    fn certificates_are_deterministic() {
        let plan = narrow_plan();
        let z = construct::build(&plan).unwrap();
        let grid = default_grid(&plan, 2);
        let a = verify_density_certificate(&plan, &z, &grid, HorizonPolicy::Scheduled).unwrap();
        let b = verify_density_certificate(&plan, &z, &grid, HorizonPolicy::Scheduled).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );

        // a plan reloaded from its JSON yields the identical certificate
        let reloaded: construct::ConstructionPlan =
            serde_json::from_str(&serde_json::to_string(&plan).unwrap()).unwrap();
        reloaded.validate().unwrap();
        let c =
            verify_density_certificate(&reloaded, &z, &grid, HorizonPolicy::Scheduled).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&c).unwrap()
        );
    }

    #[test]
    fn default_grid_hits_every_block_endpoint() {
        let plan = narrow_plan();
        assert!(plan.tau >= 2, "test needs a genuine subdivision");
        let grid = default_grid(&plan, 3);
        for pt in &plan.lambda_points {
            assert!(grid.contains(pt), "missing endpoint {pt}");
        }
        assert_eq!(grid.len(), 3 * plan.tau as usize + 1);
        assert!(grid.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn refining_the_grid_only_adds_outcomes() {
        let plan = narrow_plan();
        let z = construct::build(&plan).unwrap();
        let a = plan.k.lower();
        let coarse = vec![a];
        let mid = a + (plan.lambda_points[1] - a) / 2.0;
        let fine = vec![a, mid];
        let c1 =
            verify_density_certificate(&plan, &z, &coarse, HorizonPolicy::Scheduled).unwrap();
        let c2 = verify_density_certificate(&plan, &z, &fine, HorizonPolicy::Scheduled).unwrap();
        // outcomes at shared parameters agree, and the refined overall is
        // the coarse overall AND the extra parameters' verdicts
        assert_eq!(c1.outcomes[0], c2.outcomes[0]);
        let extras_pass = c2.outcomes[1..].iter().all(|o| o.passed);
        assert_eq!(c2.overall, c1.overall && extras_pass);
        assert!(c2.overall, "the built vector should verify at both parameters");
    }

    #[test]
    fn boundary_parameter_belongs_to_its_own_block() {
        let plan = narrow_plan();
        let z = construct::build(&plan).unwrap();
        let boundary = plan.lambda_points[1];
        let out = verify_lambda(&plan, &z, boundary, HorizonPolicy::Scheduled).unwrap();
        assert_eq!(out.block, 1);
        assert!(out.passed);
        let above = boundary + 1e-9;
        if above <= plan.k.upper() {
            let out2 = verify_lambda(&plan, &z, above, HorizonPolicy::Scheduled).unwrap();
            assert_eq!(out2.block, 2);
        }
    }

    #[test]
    fn density_threshold_is_strict() {
        // a profile sitting exactly on the threshold must not pass
        let profile = crate::density::VisitProfile::new(vec![0], 5).unwrap();
        let report = best_density_from(&profile, 5, Rational::new(1, 6)).unwrap();
        assert_eq!(report.best_density, Rational::new(1, 6));
        assert!(!report.passed);
    }

    #[test]
    fn fnorm_plans_verify_too() {
        let ladder = crate::space::FNormLadder::new(vec![
            Seminorm::Lp { p: 2.0 },
            Seminorm::TruncatedLp { p: 2.0, cutoff: 8 },
        ])
        .unwrap();
        let metric = SpaceMetric::f_norm(ladder);
        let u = OpenBall::new(SparseVector::zero(), 0.25, metric.clone()).unwrap();
        let v = OpenBall::new(SparseVector::basis(0), 0.125, metric).unwrap();
        let plan = construct::plan(
            &WeightFamily::ConstantMultiple,
            &CompactInterval::new(2.0, 2.0).unwrap(),
            2.0,
            &u,
            &v,
            1,
            10_000_000,
        )
        .unwrap();
        let z = construct::build(&plan).unwrap();
        let cert = verify_density_certificate(
            &plan,
            &z,
            &default_grid(&plan, 1),
            HorizonPolicy::Scheduled,
        )
        .unwrap();
        assert!(cert.overall, "{cert:#?}");
        assert!(cert.metric.starts_with("fnorm"));
    }
}
