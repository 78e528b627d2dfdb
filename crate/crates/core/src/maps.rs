//! Channels: the reversible BNOT map and its inverse, phase flips, untwisting,
//! partial measurements, and the distillation circuit of the `2m` example.

use crate::error::{Error, Result};
use crate::families::TWO_M_LABELS;
use crate::layout::{Part, Party, Role, SystemLayout};
use crate::linalg::{self, CMatrix};
use crate::measures::NULL_PROB;
use crate::operator::Operator;
use crate::povm::Povm;
use crate::qudit;
use crate::states::{PrivateStateSpec, SA, SB};

/// Allowed deviation from `1_corr`-invariance for key-correlated inputs.
pub const KEY_CORRELATION_TOL: f64 = 1e-10;

/// Prefix of the fresh key labels appended by [`reversible_map`].
pub const TARGET_PREFIX: &str = "T";

/// Outcome probabilities with the post-measurement states of the unmeasured parts.
#[derive(Debug, Clone)]
pub struct CqState {
    outcomes: Vec<(f64, Option<Operator>)>,
    register: String,
    rest: SystemLayout,
}

impl CqState {
    pub fn outcomes(&self) -> &[(f64, Option<Operator>)] {
        &self.outcomes
    }

    pub fn register(&self) -> &str {
        &self.register
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.outcomes.iter().map(|(p, _)| *p).collect()
    }

    /// `Σ_k p_k |k><k|_REG ⊗ ρ_k` with the register as the first part.
    pub fn to_block_diagonal(&self) -> Result<Operator> {
        let n = self.outcomes.len();
        let reg = SystemLayout::new(vec![Part::new(self.register.clone(), n, Party::Reg, Role::Register)])?;
        let layout = reg.concat(&self.rest)?;
        let r = self.rest.dim();
        let mut m = CMatrix::zeros(n * r, n * r);
        for (k, (p, cond)) in self.outcomes.iter().enumerate() {
            if let Some(c) = cond {
                m.view_mut((k * r, k * r), (r, r)).copy_from(&(c.matrix() * linalg::real(*p)));
            }
        }
        Operator::density(layout, m)
    }
}

/// Measures `labels` with `povm`: `p_k = tr[(M_k ⊗ 1)ρ]`, conditionals
/// `tr_labels[(M_k ⊗ 1)ρ] / p_k` on the remaining parts in layout order.
pub fn apply_povm_partial(rho: &Operator, povm: &Povm, labels: &[&str]) -> Result<CqState> {
    let (sel, rest) = rho.layout().split_offsets(labels)?;
    if povm.dim() != sel.len() {
        return Err(Error::InvalidPovm(format!(
            "POVM acts on dimension {}, labels {labels:?} have {}",
            povm.dim(),
            sel.len()
        )));
    }
    let rest_labels = rho.layout().complement(labels);
    let rest_layout = rho.layout().select(&rest_labels)?;
    let m = rho.matrix();
    let r = rest.len();
    // blocks[a][b] = <a| ρ |b> on the unmeasured parts.
    let blocks: Vec<Vec<CMatrix>> = sel
        .iter()
        .map(|&sa| sel.iter().map(|&sb| CMatrix::from_fn(r, r, |i, j| m[(sa + rest[i], sb + rest[j])])).collect())
        .collect();
    let outcomes = povm
        .elements()
        .iter()
        .map(|e| {
            let mut acc = CMatrix::zeros(r, r);
            for (a, row) in blocks.iter().enumerate() {
                for (b, blk) in row.iter().enumerate() {
                    let w = e[(b, a)];
                    if w != linalg::ZERO {
                        acc += blk * w;
                    }
                }
            }
            let p = linalg::trace(&acc).re;
            if p <= NULL_PROB {
                (p.max(0.0), None)
            } else {
                let cond = Operator::trusted_density(rest_layout.clone(), acc / linalg::real(p));
                (p, Some(cond))
            }
        })
        .collect();
    Ok(CqState { outcomes, register: "REG".into(), rest: rest_layout })
}

/// The single key part held by `party`.
fn key_part(layout: &SystemLayout, party: Party) -> Result<&Part> {
    let mut keys = layout.parts().iter().filter(|p| p.role == Role::Key && p.party == party);
    let first = keys.next().ok_or(Error::MissingRole("key"))?;
    if keys.next().is_some() {
        return Err(Error::InvalidSpec(format!("more than one key part on side {party}")));
    }
    Ok(first)
}

fn with_role(layout: &SystemLayout, labels: &[&str], role: Role) -> Result<SystemLayout> {
    let parts = layout
        .parts()
        .iter()
        .map(|p| {
            let mut p = p.clone();
            if labels.contains(&p.label.as_str()) {
                p.role = role;
            }
            p
        })
        .collect();
    SystemLayout::new(parts)
}

/// `max |Π ρ Π − ρ|` with `Π` the maximally correlated projector on the key pair.
pub fn key_correlation_leakage(rho: &Operator) -> Result<f64> {
    let ka = key_part(rho.layout(), Party::A)?;
    let kb = key_part(rho.layout(), Party::B)?;
    if ka.dim != kb.dim {
        return Err(Error::DimensionMismatch { expected: ka.dim, found: kb.dim });
    }
    let proj = qudit::max_corr_matrix(ka.dim);
    let p = rho.conjugate_local(&proj, &[&ka.label, &kb.label])?;
    Ok(linalg::max_abs_diff(p.matrix(), rho.matrix()))
}

/// `E(ρ) = BNOT† (ρ ⊗ Φ̂_T) BNOT` with the key pair as controls and a fresh
/// key pair `T<KA>, T<KB>` appended as targets. The old key parts become shield.
pub fn reversible_map(rho: &Operator) -> Result<Operator> {
    rho.require_density()?;
    let leak = key_correlation_leakage(rho)?;
    if leak > KEY_CORRELATION_TOL {
        return Err(Error::NotKeyCorrelated(leak));
    }
    let ka = key_part(rho.layout(), Party::A)?.label.clone();
    let kb = key_part(rho.layout(), Party::B)?.label.clone();
    let d = rho.layout().dim_of(&[&ka])?;
    let (ta, tb) = (format!("{TARGET_PREFIX}{ka}"), format!("{TARGET_PREFIX}{kb}"));
    let targets = SystemLayout::new(vec![
        Part::new(ta.clone(), d, Party::A, Role::Key),
        Part::new(tb.clone(), d, Party::B, Role::Key),
    ])?;
    let hat = Operator::density(targets, qudit::max_corr_matrix(d) / linalg::real(d as f64))?;
    let joint = rho.tensor(&hat)?;
    let layout = with_role(joint.layout(), &[&ka, &kb], Role::Shield)?;
    let bnot = Operator::embed_local(&layout, &qudit::bnot_matrix(d), &[&ka, &kb, &ta, &tb])?;
    let out = joint.with_layout(layout)?.conjugate(&bnot.adjoint())?;
    Ok(out)
}

/// Undoes [`reversible_map`]: applies BNOT, traces the appended targets and
/// restores the key role of the controls.
pub fn reversible_inverse(e_out: &Operator) -> Result<Operator> {
    let layout = e_out.layout();
    let ta = key_part(layout, Party::A)?.label.clone();
    let tb = key_part(layout, Party::B)?.label.clone();
    let (Some(ka), Some(kb)) = (ta.strip_prefix(TARGET_PREFIX), tb.strip_prefix(TARGET_PREFIX)) else {
        return Err(Error::LayoutMismatch(format!("{layout} was not produced by the reversible map")));
    };
    let n = layout.len();
    if layout.labels()[n - 2..] != [ta.as_str(), tb.as_str()] || !layout.contains(ka) || !layout.contains(kb) {
        return Err(Error::LayoutMismatch(format!("{layout} was not produced by the reversible map")));
    }
    let d = layout.dim_of(&[&ta])?;
    let bnot = Operator::embed_local(layout, &qudit::bnot_matrix(d), &[ka, kb, &ta, &tb])?;
    let back = e_out.conjugate(&bnot)?.partial_trace(&[&ta, &tb])?;
    let restored = with_role(back.layout(), &[ka, kb], Role::Key)?;
    back.with_layout(restored)
}

/// `Z^k ρ Z^{-k}` on the named key part.
pub fn phase_flip(rho: &Operator, k: i64, label: &str) -> Result<Operator> {
    let part = rho.layout().part(label)?;
    if part.role != Role::Key {
        return Err(Error::InvalidSpec(format!("`{label}` is not a key part")));
    }
    let z = linalg::mat_pow(&qudit::clock(part.dim), k);
    rho.conjugate_local(&z, &[label])
}

/// `(1/d) Σ_k Z^k(ρ) ⊗ φ_{0k}` on the layout produced by [`reversible_map`].
pub fn reversible_reference(rho: &Operator) -> Result<Operator> {
    let ka = key_part(rho.layout(), Party::A)?.label.clone();
    let kb = key_part(rho.layout(), Party::B)?.label.clone();
    let d = rho.layout().dim_of(&[&ka])?;
    let n = rho.dim();
    let mut m = CMatrix::zeros(n * d * d, n * d * d);
    for k in 0..d {
        let flipped = phase_flip(rho, k as i64, &ka)?;
        let flag = qudit::bell_projector(d, qudit::BellIndex { i: 0, j: k });
        m += flipped.matrix().kronecker(&flag) * linalg::real(1.0 / d as f64);
    }
    let targets = SystemLayout::new(vec![
        Part::new(format!("{TARGET_PREFIX}{ka}"), d, Party::A, Role::Key),
        Part::new(format!("{TARGET_PREFIX}{kb}"), d, Party::B, Role::Key),
    ])?;
    let layout = with_role(&rho.layout().concat(&targets)?, &[&ka, &kb], Role::Shield)?;
    Operator::density(layout, m)
}

/// `tr_shield T† γ T` on the canonical layout.
pub fn untwist_trace(gamma: &Operator, spec: &PrivateStateSpec) -> Result<Operator> {
    let t = spec.twisting_operator()?;
    crate::operator::same_layout(gamma.layout(), t.layout())?;
    gamma.conjugate(&t.matrix().adjoint())?.partial_trace(&[SA, SB])
}

fn require_two_m(gamma: &Operator) -> Result<()> {
    let ok = gamma.layout().labels() == TWO_M_LABELS && gamma.layout().parts().iter().all(|p| p.dim == 2);
    if !ok {
        return Err(Error::LayoutMismatch(format!("{} is not the two_m_example layout", gamma.layout())));
    }
    Ok(())
}

/// The three stages of the distillation circuit of the `2m` example:
/// BNOT from pair 2 onto pair 3, `F ⊗ F̄` on pair 3, BNOT from pair 1 onto pair 3.
pub fn distill_2m_steps(gamma: &Operator) -> Result<[Operator; 3]> {
    require_two_m(gamma)?;
    let b = qudit::bnot_matrix(2);
    let layout = gamma.layout();
    let step1 = gamma.conjugate(&Operator::embed_local(layout, &b, &["KA2", "KB2", SA, SB])?)?;
    let f = qudit::fourier_matrix(2);
    let ff = f.kronecker(&f.map(|z| z.conj()));
    let step2 = step1.conjugate_local(&ff, &[SA, SB])?;
    let step3 = step2.conjugate(&Operator::embed_local(layout, &b, &["KA1", "KB1", SA, SB])?)?;
    Ok([step1, step2, step3])
}

/// Maps `Σ_ij 4^{-1} φ_{0i} ⊗ φ_{0j} ⊗ φ_ij` to `φ_00 ⊗ φ_00 ⊗ τ` using local unitaries only.
pub fn distill_2m_circuit(gamma: &Operator) -> Result<Operator> {
    let [_, _, out] = distill_2m_steps(gamma)?;
    Ok(out)
}

/// `φ_00 ⊗ φ_00 ⊗ τ` on the `2m` layout.
pub fn distill_2m_target() -> Result<Operator> {
    let phi = qudit::bell_projector(2, qudit::BellIndex { i: 0, j: 0 });
    let tau = linalg::identity(4) / linalg::real(4.0);
    let layout = SystemLayout::new(vec![
        Part::new("KA1", 2, Party::A, Role::Key),
        Part::new("KB1", 2, Party::B, Role::Key),
        Part::new("KA2", 2, Party::A, Role::Key),
        Part::new("KB2", 2, Party::B, Role::Key),
        Part::new(SA, 2, Party::A, Role::Shield),
        Part::new(SB, 2, Party::B, Role::Shield),
    ])?;
    Operator::density(layout, linalg::kron_all(&[&phi, &phi, &tau]))?.reorder(&TWO_M_LABELS)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{family_construct, Family, StateFamilyParams};
    use crate::qudit::BellIndex;
    use crate::random;
    use crate::states::{self, KA, KB};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn build(f: Family, d: usize) -> Operator {
        family_construct(&StateFamilyParams::new(f, d)).unwrap().state
    }

    #[test]
    fn reversible_on_phi() {
        let phi = qudit::bell_state(2, BellIndex { i: 0, j: 0 }).unwrap();
        let e = reversible_map(&phi).unwrap();
        let mut want = CMatrix::zeros(16, 16);
        for k in 0..2 {
            let p = qudit::bell_projector(2, BellIndex { i: 0, j: k });
            want += p.kronecker(&p) * linalg::real(0.5);
        }
        assert!(linalg::max_abs_diff(e.matrix(), &want) < 1e-12);
        assert!(reversible_inverse(&e).unwrap().max_abs_diff(&phi).unwrap() < 1e-12);
    }

    #[test]
    fn reversible_matches_reference_on_random_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for dims in [(2, 2), (3, 3)] {
            for _ in 0..3 {
                let rho = random::key_correlated_state(&mut rng, 2, dims).unwrap();
                let e = reversible_map(&rho).unwrap();
                let r = reversible_reference(&rho).unwrap();
                assert!(e.trace_distance(&r).unwrap() < 1e-9);
                assert!(reversible_inverse(&e).unwrap().max_abs_diff(&rho).unwrap() < 1e-10);
            }
        }
    }

    #[test]
    fn non_key_correlated_rejected() {
        let layout = states::pbit_layout(2, (1, 1)).unwrap();
        let rho = Operator::maximally_mixed(layout);
        assert!(matches!(reversible_map(&rho), Err(Error::NotKeyCorrelated(_))));
    }

    #[test]
    fn phase_flip_examples() {
        let phi = qudit::bell_state(2, BellIndex { i: 0, j: 0 }).unwrap();
        let f = phase_flip(&phi, 1, KA).unwrap();
        let want = qudit::bell_projector(2, BellIndex { i: 0, j: 1 });
        assert!(linalg::max_abs_diff(f.matrix(), &want) < 1e-12);
        let g = build(Family::Swap, 3);
        let hat = states::key_attack(&g).unwrap();
        assert!(phase_flip(&hat, 1, KB).unwrap().max_abs_diff(&hat).unwrap() < 1e-12);
        assert!(phase_flip(&g, 0, KA).unwrap().max_abs_diff(&g).unwrap() < 1e-14);
        assert!(phase_flip(&g, 1, SA).is_err());
    }

    #[test]
    fn untwist_private_state_gives_phi() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let spec = random::bell_private_spec(&mut rng, 2, (2, 2));
        let tw = states::bell_twisting(&spec).unwrap();
        let gamma = states::private_state(&tw).unwrap();
        let out = untwist_trace(&gamma, &tw).unwrap();
        let phi = qudit::bell_projector(2, BellIndex { i: 0, j: 0 });
        assert!(linalg::max_abs_diff(out.matrix(), &phi) < 1e-10);
    }

    #[test]
    fn povm_partial_examples() {
        let phi = qudit::bell_state(2, BellIndex { i: 0, j: 0 }).unwrap();
        let cq = apply_povm_partial(&phi, &Povm::computational(2), &[KA]).unwrap();
        for (k, (p, c)) in cq.outcomes().iter().enumerate() {
            assert!((p - 0.5).abs() < 1e-12);
            let want = linalg::projector(&linalg::ket(2, k));
            assert!(linalg::max_abs_diff(c.as_ref().unwrap().matrix(), &want) < 1e-12);
        }
        let id = apply_povm_partial(&phi, &Povm::identity(4), &[KA, KB]).unwrap();
        assert_eq!(id.outcomes().len(), 1);
        assert!((id.outcomes()[0].0 - 1.0).abs() < 1e-12);
        let bd = cq.to_block_diagonal().unwrap();
        assert_eq!(bd.layout().labels(), vec!["REG", KB]);
    }

    #[test]
    fn distill_2m() {
        let g = build(Family::TwoMExample, 2);
        let [s1, _, out] = distill_2m_steps(&g).unwrap();
        let target = distill_2m_target().unwrap();
        assert!(out.trace_distance(&target).unwrap() < 1e-10);
        let pair2 = s1.marginal(&["KA2", "KB2"]).unwrap();
        let phi = qudit::bell_projector(2, BellIndex { i: 0, j: 0 });
        assert!(linalg::max_abs_diff(pair2.matrix(), &phi) < 1e-12);
        let hat = states::key_attack(&g).unwrap();
        assert!(distill_2m_circuit(&hat).unwrap().max_abs_diff(&hat).unwrap() < 1e-12);
        assert!(distill_2m_circuit(&build(Family::Swap, 2)).is_err());
    }
}
