//! Lower-bound estimates of the partially measured divergence `D_A(ρ‖ρ̂)` by
//! searching over projective measurements on Alice's parts.
//!
//! A measurement is the column basis of `base · G(angles)`, where `G` is a
//! product of two-level rotations, one `(θ, φ)` pair for every index pair `p < q`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::layout::Party;
use crate::linalg::{self, c, CMatrix};
use crate::maps;
use crate::measures::{self, BitsValue};
use crate::operator::{self, Operator};
use crate::povm::{self, Povm};

#[derive(Debug, Clone)]
pub struct PovmParams {
    /// Unitary the rotations are applied to.
    pub base: CMatrix,
    pub angles: Vec<f64>,
    pub n_outcomes: usize,
    pub labels: Vec<String>,
}

impl PovmParams {
    pub fn angle_count(dim: usize) -> usize {
        dim * dim.saturating_sub(1)
    }

    /// Identity base with all angles zero: the computational basis.
    pub fn computational(dim: usize, labels: &[&str]) -> Self {
        Self::from_base(linalg::identity(dim), labels)
    }

    pub fn from_base(base: CMatrix, labels: &[&str]) -> Self {
        let dim = base.nrows();
        Self {
            base,
            angles: vec![0.0; Self::angle_count(dim)],
            n_outcomes: dim,
            labels: labels.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.base.nrows()
    }

    pub fn label_refs(&self) -> Vec<&str> {
        self.labels.iter().map(String::as_str).collect()
    }

    pub fn unitary(&self) -> Result<CMatrix> {
        let n = self.dim();
        let expected = Self::angle_count(n);
        if self.angles.len() != expected {
            return Err(Error::AngleCount { expected, found: self.angles.len() });
        }
        let mut u = self.base.clone();
        let mut k = 0;
        for p in 0..n {
            for q in p + 1..n {
                let (theta, phi) = (self.angles[k], self.angles[k + 1]);
                k += 2;
                rotate_columns(&mut u, p, q, theta, phi);
            }
        }
        Ok(u)
    }
}

/// Right-multiplies by the rotation `[[cos θ, −e^{−iφ} sin θ], [e^{iφ} sin θ, cos θ]]` on columns `p, q`.
fn rotate_columns(u: &mut CMatrix, p: usize, q: usize, theta: f64, phi: f64) {
    let (s, co) = theta.sin_cos();
    let e = c(phi.cos(), phi.sin());
    for r in 0..u.nrows() {
        let (a, b) = (u[(r, p)], u[(r, q)]);
        u[(r, p)] = a * co + b * e * s;
        u[(r, q)] = b * co - a * e.conj() * s;
    }
}

pub fn povm_from_params(p: &PovmParams) -> Result<Povm> {
    if p.n_outcomes == 0 || p.n_outcomes > p.dim() {
        return Err(Error::InvalidPovm(format!("{} outcomes for dimension {}", p.n_outcomes, p.dim())));
    }
    let u = p.unitary()?;
    let dev = linalg::unitarity_deviation(&u);
    if dev > 1e-10 {
        return Err(Error::NotUnitary(dev));
    }
    let povm = Povm::from_basis(&u, p.n_outcomes);
    Ok(Povm::trusted(povm.dim(), povm.elements().to_vec()))
}

fn require_alice(rho: &Operator, labels: &[&str]) -> Result<()> {
    for l in labels {
        if rho.layout().part(l)?.party != Party::A {
            return Err(Error::NotAliceLabel(l.to_string()));
        }
    }
    Ok(())
}

/// `D(M(ρ)‖M(ρ̂))` with `M` a measurement of Alice's `labels` keeping the rest.
pub fn da_objective(rho: &Operator, rho_hat: &Operator, povm: &Povm, labels: &[&str]) -> Result<BitsValue> {
    require_alice(rho, labels)?;
    measures::measured_relative_entropy(rho, rho_hat, povm, labels, true)
}

/// `(1/n) Σ_k D(M(σ_k)‖M(σ))` over the shield states of a Bell private state.
pub fn da_belldiagonal(sigmas: &[Operator], sigma_avg: &Operator, povm: &Povm, labels: &[&str]) -> Result<BitsValue> {
    let n = sigmas.len();
    if n == 0 {
        return Err(Error::InvalidSpec("no shield states".into()));
    }
    let mut mix = CMatrix::zeros(sigma_avg.dim(), sigma_avg.dim());
    for s in sigmas {
        operator::same_layout(s.layout(), sigma_avg.layout())?;
        mix += s.matrix() / linalg::real(n as f64);
    }
    let dev = linalg::max_abs_diff(&mix, sigma_avg.matrix());
    if dev > 1e-10 {
        return Err(Error::MixtureMismatch(dev));
    }
    require_alice(sigma_avg, labels)?;
    let mut total = 0.0;
    let mut truncated = 0.0;
    for s in sigmas {
        let v = measures::measured_relative_entropy(s, sigma_avg, povm, labels, true)?;
        if !v.finite {
            return Ok(v);
        }
        total += v.value / n as f64;
        truncated += v.truncated / n as f64;
    }
    Ok(BitsValue { value: total, finite: true, truncated })
}

#[derive(Debug, Clone)]
pub struct OptConfig {
    pub restarts: usize,
    pub max_evals: usize,
    pub seed: u64,
    /// Stop when the simplex spread of objective values falls below this.
    pub tol: f64,
    /// Seed restarts 0 and 1 with the computational and conjugate bases.
    pub basis_seeds: bool,
    /// Extra starting bases, each run as an additional restart.
    pub candidates: Vec<CMatrix>,
    pub n_outcomes: Option<usize>,
}

impl Default for OptConfig {
    fn default() -> Self {
        Self {
            restarts: 16,
            max_evals: 4000,
            seed: 42,
            tol: 1e-7,
            basis_seeds: true,
            candidates: Vec::new(),
            n_outcomes: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RestartTrace {
    pub index: usize,
    pub start_value: f64,
    pub final_value: f64,
    pub evaluations: usize,
    pub exhausted: bool,
    pub params: PovmParams,
}

#[derive(Debug, Clone)]
pub struct OptResult {
    pub best: BitsValue,
    pub best_params: PovmParams,
    pub restarts: Vec<RestartTrace>,
    pub evaluations: usize,
}

impl OptResult {
    /// Index of the best restart; ties go to the lowest index.
    pub fn best_restart(&self) -> usize {
        self.restarts
            .iter()
            .fold(
                (0, f64::NEG_INFINITY),
                |(bi, bv), r| if r.final_value > bv { (r.index, r.final_value) } else { (bi, bv) },
            )
            .0
    }

    /// Restart values in index order.
    pub fn finals(&self) -> Vec<f64> {
        self.restarts.iter().map(|r| r.final_value).collect()
    }
}

/// Objective value used by the search; an infinite divergence counts as `+∞`.
fn score(v: &BitsValue) -> f64 {
    if v.finite {
        v.value
    } else {
        f64::INFINITY
    }
}

struct Search<'a> {
    rho: &'a Operator,
    rho_hat: &'a Operator,
    labels: Vec<&'a str>,
    n_outcomes: usize,
}

impl Search<'_> {
    fn params(&self, base: &CMatrix, angles: &[f64]) -> PovmParams {
        PovmParams {
            base: base.clone(),
            angles: angles.to_vec(),
            n_outcomes: self.n_outcomes,
            labels: self.labels.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn eval(&self, base: &CMatrix, angles: &[f64]) -> f64 {
        let p = self.params(base, angles);
        povm_from_params(&p)
            .and_then(|m| {
                let a = maps::apply_povm_partial(self.rho, &m, &self.labels)?;
                let b = maps::apply_povm_partial(self.rho_hat, &m, &self.labels)?;
                Ok(measures::cq_relative_entropy(&a, &b))
            })
            .map(|v| score(&v))
            .unwrap_or(f64::NEG_INFINITY)
    }
}

/// Nelder–Mead maximization from `x0`; returns the best point, its value,
/// the evaluation count and whether the budget ran out.
fn nelder_mead(
    f: impl Fn(&[f64]) -> f64,
    x0: &[f64],
    step: f64,
    max_evals: usize,
    tol: f64,
) -> (Vec<f64>, f64, usize, bool) {
    let n = x0.len();
    let mut evals = 0usize;
    let call = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        f(x)
    };
    if n == 0 {
        let v = call(x0, &mut evals);
        return (x0.to_vec(), v, evals, false);
    }
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let v0 = call(x0, &mut evals);
    simplex.push((x0.to_vec(), v0));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += step;
        let v = call(&x, &mut evals);
        simplex.push((x, v));
    }
    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    let sort = |s: &mut Vec<(Vec<f64>, f64)>| s.sort_by(|a, b| b.1.total_cmp(&a.1));
    sort(&mut simplex);
    let mut exhausted = false;
    loop {
        let spread = simplex[0].1 - simplex[n].1;
        if simplex[0].1.is_infinite() || spread.abs() <= tol {
            break;
        }
        if evals >= max_evals {
            exhausted = true;
            break;
        }
        let centroid: Vec<f64> =
            (0..n).map(|j| simplex[..n].iter().map(|(x, _)| x[j]).sum::<f64>() / n as f64).collect();
        let worst = simplex[n].clone();
        let along = |t: f64| -> Vec<f64> { centroid.iter().zip(&worst.0).map(|(c, w)| c + t * (c - w)).collect() };
        let xr = along(alpha);
        let vr = call(&xr, &mut evals);
        if vr > simplex[0].1 {
            let xe = along(gamma);
            let ve = call(&xe, &mut evals);
            simplex[n] = if ve > vr { (xe, ve) } else { (xr, vr) };
        } else if vr > simplex[n - 1].1 {
            simplex[n] = (xr, vr);
        } else {
            let outside = vr > worst.1;
            let xc = along(if outside { rho } else { -rho });
            let vc = call(&xc, &mut evals);
            let accept = if outside { vc >= vr } else { vc > worst.1 };
            if accept {
                simplex[n] = (xc, vc);
            } else {
                let best = simplex[0].0.clone();
                for item in simplex.iter_mut().skip(1) {
                    let x: Vec<f64> = best.iter().zip(&item.0).map(|(b, x)| b + sigma * (x - b)).collect();
                    let v = call(&x, &mut evals);
                    *item = (x, v);
                }
            }
        }
        sort(&mut simplex);
    }
    let (x, v) = simplex.swap_remove(0);
    (x, v, evals, exhausted)
}

/// Multi-start simplex search over projective measurements of Alice's `labels`.
/// Restart `i` draws from its own generator stream `(seed, i)`; restart 0 starts
/// from the computational basis, restart 1 from the conjugate basis, the rest
/// from random angles, followed by one restart per injected candidate basis.
pub fn optimize_da(rho: &Operator, rho_hat: &Operator, labels: &[&str], cfg: &OptConfig) -> Result<OptResult> {
    operator::same_layout(rho.layout(), rho_hat.layout())?;
    rho.require_density()?;
    rho_hat.require_density()?;
    require_alice(rho, labels)?;
    if cfg.restarts == 0 || cfg.max_evals == 0 || cfg.tol <= 0.0 {
        return Err(Error::InvalidSpec("restarts, max_evals and tol must be positive".into()));
    }
    let dim = rho.layout().dim_of(labels)?;
    for cand in &cfg.candidates {
        if cand.nrows() != dim || linalg::unitarity_deviation(cand) > 1e-10 {
            return Err(Error::InvalidSpec(format!("candidate basis is not a {dim}x{dim} unitary")));
        }
    }
    let n_outcomes = cfg.n_outcomes.unwrap_or(dim);
    let search = Search { rho, rho_hat, labels: labels.to_vec(), n_outcomes };
    let conj = povm::conjugate_basis(rho.layout(), labels)?;
    let n_angles = PovmParams::angle_count(dim);
    let total = cfg.restarts + cfg.candidates.len();

    let runs: Vec<RestartTrace> = (0..total)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(i as u64);
            let (base, x0) = if i >= cfg.restarts {
                (cfg.candidates[i - cfg.restarts].clone(), vec![0.0; n_angles])
            } else if cfg.basis_seeds && i == 0 {
                (linalg::identity(dim), vec![0.0; n_angles])
            } else if cfg.basis_seeds && i == 1 {
                (conj.clone(), vec![0.0; n_angles])
            } else {
                let x: Vec<f64> = (0..n_angles).map(|_| rng.random_range(-PI..PI)).collect();
                (linalg::identity(dim), x)
            };
            let start_value = search.eval(&base, &x0);
            let (x, v, evals, exhausted) = nelder_mead(|a| search.eval(&base, a), &x0, 0.25, cfg.max_evals, cfg.tol);
            let params = search.params(&base, &x);
            RestartTrace { index: i, start_value, final_value: v, evaluations: evals, exhausted, params }
        })
        .collect();

    let mut best_i = 0;
    for (i, r) in runs.iter().enumerate() {
        if r.final_value > runs[best_i].final_value {
            best_i = i;
        }
    }
    let best_params = runs[best_i].params.clone();
    let best = da_objective(rho, rho_hat, &povm_from_params(&best_params)?, labels)?;
    let evaluations = runs.iter().map(|r| r.evaluations).sum();
    Ok(OptResult { best, best_params, restarts: runs, evaluations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{family_construct, Family, StateFamilyParams};
    use crate::qudit;
    use crate::states::{self, KA, KB, SA};

    fn swap(d: usize) -> (Operator, Operator) {
        let g = family_construct(&StateFamilyParams::new(Family::Swap, d)).unwrap().state;
        let h = states::key_attack(&g).unwrap();
        (g, h)
    }

    #[test]
    fn zero_angles_give_computational_basis() {
        let p = PovmParams::computational(2, &["Q"]);
        assert!(linalg::max_abs_diff(&p.unitary().unwrap(), &linalg::identity(2)) < 1e-15);
    }

    #[test]
    fn quarter_turn_gives_conjugate_basis() {
        let mut p = PovmParams::computational(2, &["Q"]);
        p.angles[0] = PI / 4.0;
        let m = povm_from_params(&p).unwrap();
        let h = qudit::fourier_matrix(2);
        let want = Povm::from_basis(&h, 2);
        let mut got: Vec<f64> = m.elements().iter().map(|e| e[(0, 1)].re).collect();
        let mut exp: Vec<f64> = want.elements().iter().map(|e| e[(0, 1)].re).collect();
        got.sort_by(f64::total_cmp);
        exp.sort_by(f64::total_cmp);
        assert!((got[0] - exp[0]).abs() < 1e-12 && (got[1] - exp[1]).abs() < 1e-12);
    }

    #[test]
    fn random_params_complete() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut p = PovmParams::computational(4, &["Q"]);
        p.angles.iter_mut().for_each(|a| *a = rng.random_range(-PI..PI));
        let m = povm_from_params(&p).unwrap();
        Povm::new(m.elements().to_vec()).unwrap();
        p.angles.pop();
        assert!(matches!(povm_from_params(&p), Err(Error::AngleCount { .. })));
    }

    #[test]
    fn bob_labels_rejected() {
        let (g, h) = swap(2);
        let m = Povm::computational(2);
        assert!(matches!(da_objective(&g, &h, &m, &[KB]), Err(Error::NotAliceLabel(_))));
    }

    #[test]
    fn identical_states_give_zero() {
        let (_, h) = swap(2);
        let cfg = OptConfig { restarts: 3, max_evals: 300, ..OptConfig::default() };
        let r = optimize_da(&h, &h, &[SA, KA], &cfg).unwrap();
        assert!(r.best.value.abs() < 1e-8);
    }

    #[test]
    fn swap_sandwich_and_determinism() {
        let (g, h) = swap(2);
        let cfg = OptConfig { restarts: 4, max_evals: 1500, ..OptConfig::default() };
        let a = optimize_da(&g, &h, &[SA, KA], &cfg).unwrap();
        let b = optimize_da(&g, &h, &[SA, KA], &cfg).unwrap();
        assert_eq!(a.best.value.to_bits(), b.best.value.to_bits());
        assert!(a.best.value <= 1.5f64.log2() + 1e-6);
        assert!(a.best.value >= a.restarts[0].start_value - 1e-10);
        let again = da_objective(&g, &h, &povm_from_params(&a.best_params).unwrap(), &[SA, KA]).unwrap();
        assert!((again.value - a.best.value).abs() < 1e-10);
    }

    #[test]
    fn belldiagonal_examples() {
        let (rs, ra) = qudit::sym_asym_states(2).unwrap();
        let avg = Operator::mixture(&[(0.5, &rs), (0.5, &ra)]).unwrap();
        let m = Povm::computational(2);
        let v = da_belldiagonal(&[rs.clone(), ra.clone()], &avg, &m, &[SA]).unwrap();
        assert!(v.value >= -1e-12 && v.value <= 1.5f64.log2());
        let same = da_belldiagonal(&[rs.clone(), rs.clone()], &rs, &m, &[SA]).unwrap();
        assert!(same.value.abs() < 1e-10);
        assert!(matches!(da_belldiagonal(&[rs.clone(), ra], &rs, &m, &[SA]), Err(Error::MixtureMismatch(_))));
    }
}
