//! Optimizer runs over family members and their two-copy powers.

use std::time::Instant;

use privstate_core::linalg;
use privstate_core::measures;
use privstate_core::opt::{self, OptResult};
use privstate_core::states;
use privstate_core::{family_construct, Family, Operator, OptConfig, Party, StateFamilyParams};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::report::{Check, VerificationReport};
use crate::suites::opt_config;

/// Max evaluations per restart on the two-copy state.
const TWO_COPY_MAX_EVALS: usize = 2000;

#[derive(Debug, Clone)]
pub struct OptimizeRun {
    pub family: Family,
    pub d: usize,
    pub copies: usize,
    pub single: OptResult,
    /// Present when two copies were requested.
    pub double: Option<OptResult>,
    pub log_negativity: f64,
    pub relative_entropy: f64,
}

impl OptimizeRun {
    /// The run on the requested number of copies.
    pub fn result(&self) -> &OptResult {
        self.double.as_ref().unwrap_or(&self.single)
    }

    /// Best value per copy.
    pub fn normalized_best(&self) -> f64 {
        self.result().best.value / self.copies as f64
    }
}

fn alice_labels(rho: &Operator) -> Vec<String> {
    rho.layout().labels_with_party(Party::A).into_iter().map(String::from).collect()
}

fn refs(v: &[String]) -> Vec<&str> {
    v.iter().map(String::as_str).collect()
}

pub fn optimize_family(
    family: Family,
    d: usize,
    copies: usize,
    cfg: &OptConfig,
) -> privstate_core::Result<OptimizeRun> {
    let rho = family_construct(&StateFamilyParams::new(family, d))?.state;
    let hat = states::key_attack(&rho)?;
    let labels = alice_labels(&rho);
    let single = opt::optimize_da(&rho, &hat, &refs(&labels), cfg)?;
    let bob = rho.layout().labels_with_party(Party::B);
    let log_negativity = measures::log_negativity(&rho, &bob)?.value;
    let relative_entropy = measures::relative_entropy(&rho, &hat)?.value;
    let double = if copies == 2 {
        let rho2 = rho.tensor_power(2)?;
        let hat2 = states::key_attack(&rho2)?;
        let labels2 = alice_labels(&rho2);
        let u = single.best_params.unitary()?;
        let cfg2 = OptConfig {
            candidates: vec![linalg::kron(&u, &u)],
            max_evals: cfg.max_evals.min(TWO_COPY_MAX_EVALS),
            ..cfg.clone()
        };
        Some(opt::optimize_da(&rho2, &hat2, &refs(&labels2), &cfg2)?)
    } else {
        None
    };
    Ok(OptimizeRun { family, d, copies, single, double, log_negativity, relative_entropy })
}

/// Checks recorded for one optimizer run.
pub fn run_checks(run: &OptimizeRun, cfg: &RunConfig, ms: u64) -> privstate_core::Result<Vec<Check>> {
    let base = format!("optimize.{}.d{:02}.n{}", run.family, run.d, run.copies);
    let res = run.result();
    let n = run.copies as f64;
    let tol = cfg.tol_or(1e-6);
    let mut out = vec![
        Check::flag(
            format!("{base}.sandwich"),
            "per-copy D_A lies between 0 and the log-negativity",
            res.best.finite && run.normalized_best() >= -1e-10 && run.normalized_best() <= run.log_negativity + tol,
        ),
        Check::flag(
            format!("{base}.below-relative-entropy"),
            "measured divergence does not exceed D(ρ‖ρ̂)",
            res.best.value <= n * run.relative_entropy + 1e-9,
        ),
        Check::flag(
            format!("{base}.above-computational"),
            "optimum is at least the computational-basis value",
            res.best.value >= res.restarts[0].start_value - 1e-10,
        ),
    ];
    if run.double.is_some() {
        out.push(Check::flag(
            format!("{base}.two-copy-gain"),
            "two copies do no worse per copy than one",
            run.normalized_best() >= run.single.best.value - tol,
        ));
    }
    let (rho, hat) = rebuild(run)?;
    for r in &res.restarts {
        let v = opt::da_objective(&rho, &hat, &opt::povm_from_params(&r.params)?, &r.params.label_refs())?;
        out.push(Check::close(
            format!("{base}.restart.{:02}", r.index),
            "restart value is reproduced by its measurement",
            v.value,
            r.final_value,
            cfg.tol_or(1e-10),
        ));
    }
    out.push(Check::close(
        format!("{base}.best"),
        "reported optimum is the best restart",
        res.best.value,
        res.restarts[res.best_restart()].final_value,
        cfg.tol_or(1e-10),
    ));
    for c in &mut out {
        c.runtime_ms = ms;
    }
    Ok(out)
}

fn rebuild(run: &OptimizeRun) -> privstate_core::Result<(Operator, Operator)> {
    let mut rho = family_construct(&StateFamilyParams::new(run.family, run.d))?.state;
    if run.copies == 2 {
        rho = rho.tensor_power(2)?;
    }
    let hat = states::key_attack(&rho)?;
    Ok((rho, hat))
}

pub fn run_optimize(cfg: &RunConfig) -> Result<VerificationReport, CliError> {
    let family = cfg.family.unwrap_or(Family::Swap);
    let oc = opt_config(cfg);
    let mut checks = Vec::new();
    for d in cfg.dims_or(&[2]) {
        let start = Instant::now();
        let run = optimize_family(family, d, cfg.copies, &oc)?;
        let ms = start.elapsed().as_millis() as u64;
        checks.extend(run_checks(&run, cfg, ms)?);
    }
    Ok(VerificationReport::new(crate::metadata(cfg), checks))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn swap_d2_passes() {
        let cfg = RunConfig { restarts: 3, ..RunConfig::default() };
        let report = run_optimize(&cfg).unwrap();
        assert!(report.all_passed(), "{:?}", report.failures().collect::<Vec<_>>());
        assert_eq!(report.checks.iter().filter(|c| c.id.contains(".restart.")).count(), 3);
    }

    #[test]
    fn alpha_uses_register() {
        let oc = OptConfig { restarts: 1, max_evals: 50, ..OptConfig::default() };
        let run = optimize_family(Family::Alpha, 4, 1, &oc).unwrap();
        assert!(run.single.best_params.labels.iter().any(|l| l == privstate_core::families::REGISTER));
    }
}
