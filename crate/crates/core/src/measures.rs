//! Entropies, relative entropies, entanglement measures and closed-form reference values.
//! Every quantity is in bits.

use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, EIG_ZERO};
use crate::maps::{self, CqState};
use crate::operator::{self, Operator};
use crate::povm::Povm;

/// Mass of `ρ` outside `supp(σ)` above which the relative entropy is infinite.
pub const LEAK_TOL: f64 = 1e-9;
/// Default tolerance of the PPT test.
pub const PPT_TOL: f64 = 1e-10;
/// Outcomes with probability below this are skipped.
pub const NULL_PROB: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BitsValue {
    pub value: f64,
    pub finite: bool,
    /// Mass of the first argument dropped outside the support of the second.
    pub truncated: f64,
}

impl BitsValue {
    pub fn finite(value: f64) -> Self {
        Self { value, finite: true, truncated: 0.0 }
    }

    pub fn infinite() -> Self {
        Self { value: f64::INFINITY, finite: false, truncated: 0.0 }
    }

    pub fn has_warning(&self) -> bool {
        self.truncated > 0.0
    }
}

impl fmt::Display for BitsValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.finite {
            write!(f, "{:.9} bits", self.value)
        } else {
            f.write_str("+inf")
        }
    }
}

fn entropy_of_spectrum(eigs: &[f64]) -> f64 {
    -eigs.iter().filter(|&&x| x > EIG_ZERO).map(|&x| x * x.log2()).sum::<f64>()
}

fn entropy_matrix(m: &CMatrix) -> f64 {
    entropy_of_spectrum(&linalg::eigvalsh(m))
}

/// Von Neumann entropy.
pub fn entropy(rho: &Operator) -> Result<BitsValue> {
    rho.require_density()?;
    Ok(BitsValue::finite(entropy_matrix(rho.matrix())))
}

/// `D(ρ‖σ)` for unit-trace Hermitian matrices, with the support rule of [`relative_entropy`].
pub(crate) fn relative_entropy_matrix(rho: &CMatrix, sigma: &CMatrix) -> BitsValue {
    let (vals, vecs) = linalg::eigh(sigma);
    let support: Vec<usize> = (0..vals.len()).filter(|&k| vals[k] > EIG_ZERO).collect();
    if support.is_empty() {
        return BitsValue::infinite();
    }
    // ρ in the eigenbasis of σ, restricted to its support.
    let v = CMatrix::from_fn(vecs.nrows(), support.len(), |r, c| vecs[(r, support[c])]);
    let inner = v.adjoint() * rho * &v;
    let total = linalg::trace(rho).re;
    let kept = linalg::trace(&inner).re;
    let mut leaked = (total - kept).max(0.0);
    if leaked > LEAK_TOL {
        return BitsValue::infinite();
    }
    if leaked <= EIG_ZERO {
        leaked = 0.0;
    }
    let inner = if leaked > 0.0 && kept > 0.0 { inner * linalg::real(total / kept) } else { inner };
    let cross: f64 = support.iter().enumerate().map(|(c, &k)| inner[(c, c)].re * vals[k].log2()).sum();
    BitsValue { value: -entropy_matrix(&inner) - cross, finite: true, truncated: leaked }
}

/// `D(ρ‖σ) = tr ρ (log ρ − log σ)`; infinite when more than [`LEAK_TOL`] of `ρ`
/// lies outside `supp(σ)`, otherwise the leaked part is dropped and `ρ` renormalized.
pub fn relative_entropy(rho: &Operator, sigma: &Operator) -> Result<BitsValue> {
    operator::same_layout(rho.layout(), sigma.layout())?;
    rho.require_density()?;
    sigma.require_density()?;
    Ok(relative_entropy_matrix(rho.matrix(), sigma.matrix()))
}

fn check_cut(rho: &Operator, labels: &[&str]) -> Result<()> {
    rho.layout().positions(labels)?;
    if labels.is_empty() || labels.len() == rho.layout().len() {
        return Err(Error::BadPartition(format!("cut {labels:?} is trivial")));
    }
    Ok(())
}

/// `I(X:Y) = H(X) + H(Y) − H(XY)` with `Y` the complement of `x_labels`.
pub fn mutual_information(rho: &Operator, x_labels: &[&str]) -> Result<BitsValue> {
    rho.require_density()?;
    check_cut(rho, x_labels)?;
    let y_labels = rho.layout().complement(x_labels);
    let hx = entropy_matrix(rho.marginal(x_labels)?.matrix());
    let hy = entropy_matrix(rho.marginal(&y_labels)?.matrix());
    Ok(BitsValue::finite(hx + hy - entropy_matrix(rho.matrix())))
}

/// `I(X⟩Y) = H(Y) − H(XY)`; the two label sets must partition the layout.
pub fn coherent_information(rho: &Operator, from_labels: &[&str], to_labels: &[&str]) -> Result<BitsValue> {
    rho.require_density()?;
    let mut all: Vec<&str> = from_labels.iter().chain(to_labels).copied().collect();
    rho.layout().positions(&all)?;
    all.sort_unstable();
    let mut layout_labels = rho.layout().labels();
    layout_labels.sort_unstable();
    if all != layout_labels || to_labels.is_empty() {
        return Err(Error::BadPartition(format!("{from_labels:?} and {to_labels:?}")));
    }
    let hy = entropy_matrix(rho.marginal(to_labels)?.matrix());
    Ok(BitsValue::finite(hy - entropy_matrix(rho.matrix())))
}

/// Hashing rate `H(Bob) − H(all)`; may be negative.
pub fn hashing_lower_bound(rho: &Operator, bob_labels: &[&str]) -> Result<BitsValue> {
    rho.require_density()?;
    rho.layout().positions(bob_labels)?;
    if bob_labels.is_empty() {
        return Err(Error::BadPartition("no Bob labels".into()));
    }
    let hb = entropy_matrix(rho.marginal(bob_labels)?.matrix());
    Ok(BitsValue::finite(hb - entropy_matrix(rho.matrix())))
}

/// `log2 ‖ρ^Γ‖₁` with the transpose on `cut_labels`.
pub fn log_negativity(rho: &Operator, cut_labels: &[&str]) -> Result<BitsValue> {
    rho.require_density()?;
    check_cut(rho, cut_labels)?;
    let pt = rho.partial_transpose(cut_labels)?;
    let norm: f64 = linalg::eigvalsh(pt.matrix()).iter().map(|x| x.abs()).sum();
    Ok(BitsValue::finite(norm.log2()))
}

/// `(min eig(ρ^Γ) ≥ −tol, min eig(ρ^Γ))`.
pub fn is_ppt(rho: &Operator, cut_labels: &[&str], tol: f64) -> Result<(bool, f64)> {
    rho.require_density()?;
    check_cut(rho, cut_labels)?;
    let min = linalg::eigvalsh(rho.partial_transpose(cut_labels)?.matrix()).first().copied().unwrap_or(0.0);
    Ok((min >= -tol, min))
}

/// Classical relative entropy of two distributions.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> BitsValue {
    let mut total = 0.0;
    for (&pk, &qk) in p.iter().zip(q) {
        if pk <= NULL_PROB {
            continue;
        }
        if qk <= NULL_PROB {
            return BitsValue::infinite();
        }
        total += pk * (pk / qk).log2();
    }
    BitsValue::finite(total)
}

/// `Σ_k p_k [log(p_k/q_k) + D(ρ_k‖σ_k)]` for two cq states with matching outcomes.
pub fn cq_relative_entropy(rho: &CqState, sigma: &CqState) -> BitsValue {
    let mut total = 0.0;
    let mut truncated = 0.0;
    for ((p, r), (q, s)) in rho.outcomes().iter().zip(sigma.outcomes()) {
        if *p <= NULL_PROB {
            continue;
        }
        let (Some(r), Some(s)) = (r, s) else {
            return BitsValue::infinite();
        };
        if *q <= NULL_PROB {
            return BitsValue::infinite();
        }
        let d = relative_entropy_matrix(r.matrix(), s.matrix());
        if !d.finite {
            return d;
        }
        total += p * ((p / q).log2() + d.value);
        truncated += p * d.truncated;
    }
    BitsValue { value: total, finite: true, truncated }
}

/// Relative entropy after measuring `labels` with `povm`. With `partial` the
/// unmeasured parts are kept and the result is the divergence of the cq states;
/// otherwise it is the divergence of the outcome distributions.
pub fn measured_relative_entropy(
    rho: &Operator,
    sigma: &Operator,
    povm: &Povm,
    labels: &[&str],
    partial: bool,
) -> Result<BitsValue> {
    operator::same_layout(rho.layout(), sigma.layout())?;
    let a = maps::apply_povm_partial(rho, povm, labels)?;
    let b = maps::apply_povm_partial(sigma, povm, labels)?;
    if partial {
        Ok(cq_relative_entropy(&a, &b))
    } else {
        Ok(kl_divergence(&a.probabilities(), &b.probabilities()))
    }
}

/// Closed-form reference values.
pub mod closed {
    const LOG2_E: f64 = std::f64::consts::LOG2_E;

    fn sqrt(d: usize) -> f64 {
        (d as f64).sqrt()
    }

    pub fn en_swap(d: usize) -> f64 {
        (1.0 + 1.0 / d as f64).log2()
    }

    pub fn en_fourier(d: usize) -> f64 {
        (1.0 + 1.0 / sqrt(d)).log2()
    }

    pub fn en_flower(d: usize) -> f64 {
        (1.0 + sqrt(d)).log2()
    }

    pub fn er_oneway_ebit(m: u32) -> f64 {
        (2f64.powi(m as i32) + 1.0).log2() - 1.0
    }

    pub fn repeater_swap(d: usize) -> f64 {
        2.0 * en_swap(d)
    }

    pub fn repeater_fourier(d: usize) -> f64 {
        2.0 * en_fourier(d)
    }

    pub fn repeater_ppt(d: usize) -> f64 {
        2.0 * en_fourier(d)
    }

    pub fn ppt_invariant_bound(d: usize) -> f64 {
        2.0 * alpha_divergence_bound(d)
    }

    pub fn alpha_divergence_bound(d: usize) -> f64 {
        (1.0 + LOG2_E) / (1.0 + sqrt(d))
    }

    pub fn alpha_divergence(d: usize) -> f64 {
        let r = 1.0 / sqrt(d);
        (r.ln_1p() * LOG2_E + r) / (1.0 + r)
    }

    pub fn ppt_two_way(d: usize) -> f64 {
        1.0 / (sqrt(d) + 1.0)
    }

    pub fn key_marginal(m: u32, probs: &[f64]) -> f64 {
        m as f64 - crate::linalg::shannon_bits(probs)
    }

    pub fn single_copy_combinator(key_dim: usize, ed_bound: f64) -> f64 {
        key_dim as f64 * ed_bound
    }
}

/// Parameters of [`closed_form`]; each name reads only the fields it needs.
#[derive(Debug, Clone, Default)]
pub struct ClosedFormParams {
    pub d: Option<usize>,
    pub m: Option<u32>,
    pub probs: Option<Vec<f64>>,
    pub key_dim: Option<usize>,
    pub ed_bound: Option<f64>,
}

impl ClosedFormParams {
    pub fn d(d: usize) -> Self {
        Self { d: Some(d), ..Self::default() }
    }

    pub fn m(m: u32) -> Self {
        Self { m: Some(m), ..Self::default() }
    }
}

pub const CLOSED_FORM_NAMES: [&str; 14] = [
    "en_swap",
    "en_fourier",
    "en_flower",
    "er_oneway_ebit",
    "repeater_swap",
    "repeater_fourier",
    "repeater_ppt",
    "ppt_invariant_bound",
    "alpha_divergence_bound",
    "alpha_divergence",
    "ppt_two_way",
    "key_marginal",
    "single_copy_combinator",
    "flower_hashing",
];

/// Evaluates a named closed form.
pub fn closed_form(name: &str, params: &ClosedFormParams) -> Result<BitsValue> {
    let need_d = || -> Result<usize> {
        match params.d {
            Some(d) if d >= 2 => Ok(d),
            Some(d) => Err(Error::ClosedFormRange(format!("{name} needs d >= 2, got {d}"))),
            None => Err(Error::ClosedFormRange(format!("{name} needs d"))),
        }
    };
    let need_m = || -> Result<u32> {
        match params.m {
            Some(m) if (1..=30).contains(&m) => Ok(m),
            Some(m) => Err(Error::ClosedFormRange(format!("{name} needs 1 <= m <= 30, got {m}"))),
            None => Err(Error::ClosedFormRange(format!("{name} needs m"))),
        }
    };
    let value = match name {
        "en_swap" => closed::en_swap(need_d()?),
        "en_fourier" => closed::en_fourier(need_d()?),
        "en_flower" => closed::en_flower(need_d()?),
        "er_oneway_ebit" => closed::er_oneway_ebit(need_m()?),
        "repeater_swap" => closed::repeater_swap(need_d()?),
        "repeater_fourier" => closed::repeater_fourier(need_d()?),
        "repeater_ppt" => closed::repeater_ppt(need_d()?),
        "ppt_invariant_bound" => closed::ppt_invariant_bound(need_d()?),
        "alpha_divergence_bound" => closed::alpha_divergence_bound(need_d()?),
        "alpha_divergence" => closed::alpha_divergence(need_d()?),
        "ppt_two_way" => closed::ppt_two_way(need_d()?),
        "flower_hashing" => {
            need_d()?;
            1.0
        }
        "key_marginal" => {
            let m = need_m()?;
            let p = params
                .probs
                .as_deref()
                .ok_or_else(|| Error::ClosedFormRange("key_marginal needs probabilities".into()))?;
            let sum: f64 = p.iter().sum();
            if p.len() != 1usize << m || p.iter().any(|&x| x < 0.0) || (sum - 1.0).abs() > 1e-12 {
                return Err(Error::ClosedFormRange(format!("key_marginal needs a distribution of length 2^{m}")));
            }
            closed::key_marginal(m, p)
        }
        "single_copy_combinator" => {
            let k =
                params.key_dim.ok_or_else(|| Error::ClosedFormRange("single_copy_combinator needs key_dim".into()))?;
            let e = params
                .ed_bound
                .ok_or_else(|| Error::ClosedFormRange("single_copy_combinator needs ed_bound".into()))?;
            closed::single_copy_combinator(k, e)
        }
        _ => return Err(Error::UnknownClosedForm(name.to_string())),
    };
    Ok(BitsValue::finite(value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{family_construct, Family, StateFamilyParams};
    use crate::layout::SystemLayout;
    use crate::qudit::{self, BellIndex};
    use crate::states::{self, KA, KB, SA, SB};

    fn phi(d: usize) -> Operator {
        qudit::bell_state(d, BellIndex { i: 0, j: 0 }).unwrap()
    }

    fn qubit(m: CMatrix) -> Operator {
        let l = SystemLayout::from_tuples(&[("Q", 2, crate::layout::Party::A, crate::layout::Role::Key)]).unwrap();
        Operator::density(l, m).unwrap()
    }

    #[test]
    fn entropy_examples() {
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 0)] = linalg::real(0.75);
        m[(1, 1)] = linalg::real(0.25);
        assert!((entropy(&qubit(m)).unwrap().value - 0.811278124459).abs() < 1e-9);
        assert!(entropy(&phi(3)).unwrap().value.abs() < 1e-12);
    }

    #[test]
    fn disjoint_support_is_infinite() {
        let a = qubit(linalg::projector(&linalg::ket(2, 0)));
        let b = qubit(linalg::projector(&linalg::ket(2, 1)));
        let d = relative_entropy(&a, &b).unwrap();
        assert!(!d.finite);
        assert!(relative_entropy(&a, &a).unwrap().value.abs() < 1e-12);
    }

    #[test]
    fn phi_measures() {
        let p = phi(2);
        assert!((mutual_information(&p, &[KA]).unwrap().value - 2.0).abs() < 1e-12);
        assert!((coherent_information(&p, &[KA], &[KB]).unwrap().value - 1.0).abs() < 1e-12);
        assert!((hashing_lower_bound(&p, &[KB]).unwrap().value - 1.0).abs() < 1e-12);
        let (ppt, min) = is_ppt(&p, &[KB], PPT_TOL).unwrap();
        assert!(!ppt && (min + 0.5).abs() < 1e-12);
        let hat = states::key_attack(&p).unwrap();
        assert!(coherent_information(&hat, &[KA], &[KB]).unwrap().value.abs() < 1e-12);
        assert!(log_negativity(&hat, &[KB]).unwrap().value.abs() < 1e-12);
    }

    #[test]
    fn swap_values() {
        let g = family_construct(&StateFamilyParams::new(Family::Swap, 2)).unwrap().state;
        let en = log_negativity(&g, &[KB, SB]).unwrap().value;
        assert!((en - 1.5f64.log2()).abs() < 1e-10);
        let hat = states::key_attack(&g).unwrap();
        assert!((relative_entropy(&g, &hat).unwrap().value - 1.0).abs() < 1e-9);
        let key = g.marginal(&[KA, KB]).unwrap();
        assert!((hashing_lower_bound(&key, &[KB]).unwrap().value - 0.188721875540).abs() < 1e-9);
        assert!((mutual_information(&g, &[KA, KB]).unwrap().value - 0.811278124459).abs() < 1e-9);
        let _ = SA;
    }

    #[test]
    fn closed_form_examples() {
        let v = |n: &str, p: ClosedFormParams| closed_form(n, &p).unwrap().value;
        assert!((v("repeater_swap", ClosedFormParams::d(2)) - 1.169925001442).abs() < 1e-9);
        assert!((v("er_oneway_ebit", ClosedFormParams::m(1)) - 0.584962500721).abs() < 1e-9);
        assert!((v("ppt_invariant_bound", ClosedFormParams::d(4)) - 1.6284633606).abs() < 1e-9);
        assert!(matches!(closed_form("nope", &ClosedFormParams::default()), Err(Error::UnknownClosedForm(_))));
        assert!(closed_form("en_swap", &ClosedFormParams::d(1)).is_err());
        assert!(closed::alpha_divergence(9) <= closed::alpha_divergence_bound(9));
    }

    #[test]
    fn measured_phi_against_hat() {
        let p = phi(2);
        let hat = states::key_attack(&p).unwrap();
        let comp = Povm::computational(4);
        let v = measured_relative_entropy(&p, &hat, &comp, &[KA, KB], false).unwrap();
        assert!(v.value.abs() < 1e-12);
        let conj = Povm::conjugate(p.layout(), &[KA, KB]).unwrap();
        let v = measured_relative_entropy(&p, &hat, &conj, &[KA, KB], false).unwrap();
        assert!((v.value - 1.0).abs() < 1e-12);
    }
}
