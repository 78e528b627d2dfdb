//! Private states, Bell private states, key-correlated states and their companions.
//!
//! All states produced here live on the canonical layout `KA, SA, KB, SB`
//! (key of Alice, shield of Alice, key of Bob, shield of Bob). Internally the
//! matrices are assembled in the key-first order `KA, KB, SA, SB`, which is the
//! order the block forms are written in, and then reordered.

use crate::error::{BlockFormViolation, Error, Result};
use crate::layout::{Part, Party, Role, SystemLayout};
use crate::linalg::{self, CMatrix, EIG_ZERO};
use crate::operator::{validate_density, Operator};
use crate::qudit::{self, BellIndex};

/// Overlap of support projectors above which shield states count as non-orthogonal.
pub const ORTHOGONALITY_TOL: f64 = 1e-8;

pub const KA: &str = "KA";
pub const KB: &str = "KB";
pub const SA: &str = "SA";
pub const SB: &str = "SB";

/// Canonical `[KA, SA, KB, SB]` layout.
pub fn pbit_layout(key_dim: usize, shield_dims: (usize, usize)) -> Result<SystemLayout> {
    SystemLayout::new(vec![
        Part::new(KA, key_dim, Party::A, Role::Key),
        Part::new(SA, shield_dims.0, Party::A, Role::Shield),
        Part::new(KB, key_dim, Party::B, Role::Key),
        Part::new(SB, shield_dims.1, Party::B, Role::Shield),
    ])
}

fn key_first_layout(key_dim: usize, shield_dims: (usize, usize)) -> Result<SystemLayout> {
    SystemLayout::new(vec![
        Part::new(KA, key_dim, Party::A, Role::Key),
        Part::new(KB, key_dim, Party::B, Role::Key),
        Part::new(SA, shield_dims.0, Party::A, Role::Shield),
        Part::new(SB, shield_dims.1, Party::B, Role::Shield),
    ])
}

/// Wraps a key-first density matrix and moves it to the canonical order.
pub(crate) fn canonical_density(key_dim: usize, shield_dims: (usize, usize), m: CMatrix) -> Result<Operator> {
    let op = Operator::density(key_first_layout(key_dim, shield_dims)?, m)?;
    op.reorder(&[KA, SA, KB, SB])
}

/// `Σ |ab><ce| ⊗ B_{ab,ce}` in key-first order. `block(a, b, c, e)` returns the
/// shield block for key row `|ab>` and key column `|ce>`, or `None` for zero.
pub(crate) fn assemble_key_blocks(
    key_dim: usize,
    shield_dim: usize,
    block: impl Fn(usize, usize, usize, usize) -> Option<CMatrix>,
) -> CMatrix {
    let kd = key_dim * key_dim;
    let n = kd * shield_dim;
    let mut out = CMatrix::zeros(n, n);
    for row in 0..kd {
        for col in 0..kd {
            let (a, b, c, e) = (row / key_dim, row % key_dim, col / key_dim, col % key_dim);
            if let Some(blk) = block(a, b, c, e) {
                out.view_mut((row * shield_dim, col * shield_dim), (shield_dim, shield_dim)).copy_from(&blk);
            }
        }
    }
    out
}

/// A general private state `T(Φ ⊗ σ)T†` with twisting `T = Σ_ij |ij><ij| ⊗ U_i`.
#[derive(Debug, Clone)]
pub struct PrivateStateSpec {
    /// `|K_A| = |K_B|`; equals `2^m` for an m-bit key.
    pub key_dim: usize,
    pub shield_dims: (usize, usize),
    /// One unitary on `SA SB` per value of Alice's key.
    pub twisting: Vec<CMatrix>,
    pub sigma: CMatrix,
}

impl PrivateStateSpec {
    pub fn validate(&self) -> Result<()> {
        if self.key_dim < 2 {
            return Err(Error::QuditDimension(self.key_dim));
        }
        let s = self.shield_dims.0 * self.shield_dims.1;
        if self.twisting.len() != self.key_dim {
            return Err(Error::InvalidSpec(format!(
                "{} twisting unitaries for key dimension {}",
                self.twisting.len(),
                self.key_dim
            )));
        }
        for u in &self.twisting {
            if u.nrows() != s || u.ncols() != s {
                return Err(Error::DimensionMismatch { expected: s, found: u.nrows() });
            }
            let dev = linalg::unitarity_deviation(u);
            if dev > 1e-10 {
                return Err(Error::NotUnitary(dev));
            }
        }
        if self.sigma.nrows() != s {
            return Err(Error::DimensionMismatch { expected: s, found: self.sigma.nrows() });
        }
        validate_density(&self.sigma)
    }

    /// The controlled unitary `T` in key-first order `KA KB SA SB`.
    pub fn twisting_matrix(&self) -> CMatrix {
        let d = self.key_dim;
        let s = self.shield_dims.0 * self.shield_dims.1;
        assemble_key_blocks(d, s, |a, b, c, e| if a == c && b == e { Some(self.twisting[a].clone()) } else { None })
    }

    /// `T` on the canonical layout.
    pub fn twisting_operator(&self) -> Result<Operator> {
        let op = Operator::unitary(key_first_layout(self.key_dim, self.shield_dims)?, self.twisting_matrix())?;
        op.reorder(&[KA, SA, KB, SB])
    }
}

/// Bell private state `Σ_k p_k φ_{0k} ⊗ σ_k` with pairwise orthogonal `σ_k`.
#[derive(Debug, Clone)]
pub struct BellPrivateSpec {
    pub probs: Vec<f64>,
    pub sigmas: Vec<CMatrix>,
    pub shield_dims: (usize, usize),
}

impl BellPrivateSpec {
    pub fn key_dim(&self) -> usize {
        self.probs.len()
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.probs.len();
        if d < 2 {
            return Err(Error::QuditDimension(d));
        }
        if self.sigmas.len() != d {
            return Err(Error::InvalidSpec(format!("{} shield states for {} probabilities", self.sigmas.len(), d)));
        }
        if let Some(p) = self.probs.iter().find(|&&p| p < 0.0 || !p.is_finite()) {
            return Err(Error::InvalidSpec(format!("negative probability {p}")));
        }
        let total: f64 = self.probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidSpec(format!("probabilities sum to {total}")));
        }
        let s = self.shield_dims.0 * self.shield_dims.1;
        for sig in &self.sigmas {
            if sig.nrows() != s {
                return Err(Error::DimensionMismatch { expected: s, found: sig.nrows() });
            }
            validate_density(sig)?;
        }
        let projs = self.support_projectors();
        for j in 0..d {
            for k in j + 1..d {
                let overlap = linalg::frobenius(&(&projs[j] * &projs[k]));
                if overlap > ORTHOGONALITY_TOL {
                    return Err(Error::NonOrthogonalSupports(j, k, overlap));
                }
            }
        }
        Ok(())
    }

    pub fn support_projectors(&self) -> Vec<CMatrix> {
        self.sigmas.iter().map(|s| linalg::support_projector(s, EIG_ZERO)).collect()
    }

    /// `σ = Σ_k p_k σ_k`.
    pub fn average_shield(&self) -> CMatrix {
        let s = self.sigmas[0].nrows();
        self.probs.iter().zip(&self.sigmas).fold(CMatrix::zeros(s, s), |acc, (&p, sig)| acc + sig * linalg::real(p))
    }
}

/// `ρ = Σ_{μν} |φ_{0μ}><φ_{0ν}| ⊗ P_{μν}`; `blocks[μ][ν]` is `P_{μν}` on `SA SB`.
pub fn key_correlated(blocks: &[Vec<CMatrix>], shield_dims: (usize, usize)) -> Result<Operator> {
    let d = blocks.len();
    if d < 2 {
        return Err(Error::QuditDimension(d));
    }
    let s = shield_dims.0 * shield_dims.1;
    let phis: Vec<CMatrix> = (0..d).map(|k| qudit::bell_vector(d, BellIndex { i: 0, j: k })).collect();
    let mut out = CMatrix::zeros(d * d * s, d * d * s);
    for (mu, row) in blocks.iter().enumerate() {
        if row.len() != d {
            return Err(Error::InvalidSpec(format!("block row {mu} has {} entries, expected {d}", row.len())));
        }
        for (nu, p) in row.iter().enumerate() {
            if p.nrows() != s || p.ncols() != s {
                return Err(Error::DimensionMismatch { expected: s, found: p.nrows() });
            }
            out += (&phis[mu] * phis[nu].adjoint()).kronecker(p);
        }
    }
    canonical_density(d, shield_dims, out)
}

/// `γ = T(Φ ⊗ σ)T†`.
pub fn private_state(spec: &PrivateStateSpec) -> Result<Operator> {
    spec.validate()?;
    let d = spec.key_dim;
    let phi = qudit::bell_projector(d, BellIndex { i: 0, j: 0 });
    let t = spec.twisting_matrix();
    let gamma = &t * phi.kronecker(&spec.sigma) * t.adjoint();
    canonical_density(d, spec.shield_dims, gamma)
}

/// `γ = Σ_k p_k φ_{0k} ⊗ σ_k`.
pub fn bell_private_state(spec: &BellPrivateSpec) -> Result<Operator> {
    spec.validate()?;
    let d = spec.key_dim();
    let s = spec.shield_dims.0 * spec.shield_dims.1;
    let mut out = CMatrix::zeros(d * d * s, d * d * s);
    for (k, (&p, sig)) in spec.probs.iter().zip(&spec.sigmas).enumerate() {
        if p == 0.0 {
            continue;
        }
        out += qudit::bell_projector(d, BellIndex { i: 0, j: k }).kronecker(sig) * linalg::real(p);
    }
    canonical_density(d, spec.shield_dims, out)
}

/// `U_σ = Σ_k ω^k P_{σ_k} + P_{σ⊥}` with `ω = exp(2πi/|K|)`.
pub fn bell_twisting_unitary(spec: &BellPrivateSpec) -> Result<CMatrix> {
    spec.validate()?;
    let d = spec.key_dim();
    let projs = spec.support_projectors();
    let s = projs[0].nrows();
    let mut u = linalg::identity(s);
    for (k, p) in projs.iter().enumerate() {
        u += p * (linalg::root_of_unity(k as i64, d) - linalg::ONE);
    }
    Ok(u)
}

/// Rewrites a Bell private state as twisting `U_i = U_σ^i` applied to `Φ ⊗ Σ p_k σ_k`.
pub fn bell_twisting(spec: &BellPrivateSpec) -> Result<PrivateStateSpec> {
    let u = bell_twisting_unitary(spec)?;
    let d = spec.key_dim();
    Ok(PrivateStateSpec {
        key_dim: d,
        shield_dims: spec.shield_dims,
        twisting: (0..d).map(|i| linalg::mat_pow(&u, i as i64)).collect(),
        sigma: spec.average_shield(),
    })
}

/// Builds `γ = 2^{-m} Σ_ij |ii><jj| ⊗ |Y| (Y/|Y|)^{i-j}` from a shield operator `Y`.
pub fn block_form_state(y: &CMatrix, shield_dims: (usize, usize), m: u32) -> Result<Operator> {
    let s = shield_dims.0 * shield_dims.1;
    if y.nrows() != s || y.ncols() != s {
        return Err(Error::DimensionMismatch { expected: s, found: y.nrows() });
    }
    let d = 1usize << m;
    let yd = y.adjoint();
    let normal = linalg::max_abs_diff(&(y * &yd), &(&yd * y));
    if normal > 1e-10 {
        return Err(Error::BlockForm(BlockFormViolation::NotNormal(normal)));
    }
    let norm = linalg::trace_norm(y);
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::BlockForm(BlockFormViolation::TraceNorm(norm)));
    }
    let power = linalg::mat_pow(y, d as i64);
    let herm = linalg::hermitian_deviation(&power);
    let min = linalg::eigvalsh(&power).first().copied().unwrap_or(0.0);
    if herm > 1e-10 || min < -1e-10 {
        let worst = if herm > 1e-10 { -herm } else { min };
        return Err(Error::BlockForm(BlockFormViolation::PowerNotPositive(worst)));
    }
    let yy = &yd * y;
    let abs = linalg::herm_fn(&yy, |x| x.max(0.0).sqrt());
    let abs_pinv = linalg::herm_fn(&yy, |x| if x > EIG_ZERO { 1.0 / x.sqrt() } else { 0.0 });
    let phase = y * abs_pinv;
    let inv_d = linalg::real(1.0 / d as f64);
    let m = assemble_key_blocks(d, s, |a, b, c, e| {
        if a != b || c != e {
            return None;
        }
        Some(&abs * linalg::mat_pow(&phase, a as i64 - c as i64) * inv_d)
    });
    canonical_density(d, shield_dims, m)
}

/// Key-attacked state: pinching in the computational basis of every key part.
pub fn key_attack(rho: &Operator) -> Result<Operator> {
    let keys = rho.layout().labels_with_role(Role::Key);
    if keys.is_empty() {
        return Err(Error::MissingRole("key"));
    }
    let key_of = key_index_map(rho.layout(), &keys)?;
    let m = rho.matrix();
    let n = rho.dim();
    let out = CMatrix::from_fn(n, n, |i, j| if key_of[i] == key_of[j] { m[(i, j)] } else { linalg::ZERO });
    let op = Operator::new(rho.layout().clone(), out)?;
    if rho.is_density() {
        Ok(Operator::trusted_density(rho.layout().clone(), op.into_matrix()))
    } else {
        Ok(op)
    }
}

/// For every full basis index, the composite index of the named parts.
pub(crate) fn key_index_map(layout: &SystemLayout, labels: &[&str]) -> Result<Vec<usize>> {
    let (sel, rest) = layout.split_offsets(labels)?;
    let mut out = vec![0usize; layout.dim()];
    for (a, &sa) in sel.iter().enumerate() {
        for &r in &rest {
            out[sa + r] = a;
        }
    }
    Ok(out)
}

/// `γ° = γ_key ⊗ γ_rest`, returned on the original layout order.
pub fn marginal_product(gamma: &Operator) -> Result<Operator> {
    let layout = gamma.layout();
    let keys = layout.labels_with_role(Role::Key);
    if keys.is_empty() {
        return Err(Error::MissingRole("key"));
    }
    let rest = layout.complement(&keys);
    if rest.is_empty() {
        return Err(Error::MissingRole("shield"));
    }
    let key_marg = gamma.marginal(&keys)?;
    let rest_marg = gamma.marginal(&rest)?;
    key_marg.tensor(&rest_marg)?.reorder(&layout.labels())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs_diff, real};
    use crate::random;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn swap_spec(d: usize) -> BellPrivateSpec {
        let (s, a) = qudit::sym_asym_states(d).unwrap();
        let df = d as f64;
        BellPrivateSpec {
            probs: vec![0.5 * (1.0 + 1.0 / df), 0.5 * (1.0 - 1.0 / df)],
            sigmas: vec![s.into_matrix(), a.into_matrix()],
            shield_dims: (d, d),
        }
    }

    #[test]
    fn trivial_blocks_give_phi() {
        let z = CMatrix::zeros(1, 1);
        let one = CMatrix::from_element(1, 1, linalg::ONE);
        let rho = key_correlated(&[vec![one, z.clone()], vec![z.clone(), z]], (1, 1)).unwrap();
        let phi = qudit::bell_projector(2, BellIndex { i: 0, j: 0 });
        assert!(max_abs_diff(rho.matrix(), &phi) < 1e-15);
    }

    #[test]
    fn invalid_blocks_rejected() {
        let one = CMatrix::from_element(1, 1, real(1.0));
        let two = CMatrix::from_element(1, 1, real(2.0));
        let z = CMatrix::zeros(1, 1);
        let err = key_correlated(&[vec![one, two.clone()], vec![two, z]], (1, 1)).unwrap_err();
        assert!(matches!(err, Error::NotDensity(_)));
    }

    #[test]
    fn random_key_correlated_is_density() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rho = random::key_correlated_state(&mut rng, 2, (2, 2)).unwrap();
        assert!(rho.min_eigenvalue() > -1e-12);
        assert!((rho.trace().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn trivial_twisting_is_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let sigma = random::density(&mut rng, 4, 4);
        let spec = PrivateStateSpec {
            key_dim: 2,
            shield_dims: (2, 2),
            twisting: vec![linalg::identity(4), linalg::identity(4)],
            sigma: sigma.clone(),
        };
        let gamma = private_state(&spec).unwrap();
        let phi = qudit::bell_projector(2, BellIndex { i: 0, j: 0 });
        let want = canonical_density(2, (2, 2), phi.kronecker(&sigma)).unwrap();
        assert!(gamma.max_abs_diff(&want).unwrap() < 1e-12);
    }

    #[test]
    fn swap_twisting_matches_bell_form() {
        for d in 2..=4 {
            let spec = PrivateStateSpec {
                key_dim: 2,
                shield_dims: (d, d),
                twisting: vec![linalg::identity(d * d), qudit::swap_operator(d)],
                sigma: linalg::identity(d * d) / real((d * d) as f64),
            };
            let a = private_state(&spec).unwrap();
            let b = bell_private_state(&swap_spec(d)).unwrap();
            assert!(a.max_abs_diff(&b).unwrap() < 1e-12, "d={d}");
        }
    }

    #[test]
    fn pure_sigma_gives_pure_gamma() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let v = random::ginibre(&mut rng, 4, 1);
        let v = &v / real(linalg::frobenius(&v));
        let u = random::unitary(&mut rng, 4);
        let spec = PrivateStateSpec {
            key_dim: 2,
            shield_dims: (2, 2),
            twisting: vec![linalg::identity(4), u],
            sigma: linalg::projector(&v),
        };
        let g = private_state(&spec).unwrap();
        let purity = linalg::trace(&(g.matrix() * g.matrix())).re;
        assert!((purity - 1.0).abs() < 1e-12);
    }

    #[test]
    fn swap_bell_twisting_is_swap() {
        let u = bell_twisting_unitary(&swap_spec(2)).unwrap();
        assert!(max_abs_diff(&u, &qudit::swap_operator(2)) < 1e-12);
    }

    #[test]
    fn single_term_twisting_acts_trivially_on_support() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s0 = random::density(&mut rng, 4, 2);
        let spec = BellPrivateSpec {
            probs: vec![1.0, 0.0],
            sigmas: vec![s0.clone(), {
                let p = linalg::identity(4) - linalg::support_projector(&s0, EIG_ZERO);
                &p / linalg::trace(&p)
            }],
            shield_dims: (2, 2),
        };
        let u = bell_twisting_unitary(&spec).unwrap();
        assert!(max_abs_diff(&(&u * &s0), &s0) < 1e-12);
        let g = bell_private_state(&spec).unwrap();
        let want =
            canonical_density(2, (2, 2), qudit::bell_projector(2, BellIndex { i: 0, j: 0 }).kronecker(&s0)).unwrap();
        assert!(g.max_abs_diff(&want).unwrap() < 1e-12);
    }

    #[test]
    fn overlapping_supports_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let s0 = random::density(&mut rng, 4, 4);
        let spec = BellPrivateSpec { probs: vec![0.5, 0.5], sigmas: vec![s0.clone(), s0], shield_dims: (2, 2) };
        assert!(matches!(bell_private_state(&spec).unwrap_err(), Error::NonOrthogonalSupports(0, 1, _)));
    }

    #[test]
    fn classically_flagged_pbit() {
        let d = 2;
        let sigmas: Vec<CMatrix> = (0..d)
            .map(|k| {
                let kk = linalg::ket(d, k).kronecker(&linalg::ket(d, k));
                linalg::projector(&kk)
            })
            .collect();
        let spec = BellPrivateSpec { probs: vec![0.5, 0.5], sigmas, shield_dims: (d, d) };
        let g = bell_private_state(&spec).unwrap();
        assert!(g.min_eigenvalue() > -1e-12);
    }

    #[test]
    fn block_form_scalar_shield_is_phi() {
        let y = CMatrix::from_element(1, 1, real(1.0));
        let g = block_form_state(&y, (1, 1), 1).unwrap();
        assert!(max_abs_diff(g.matrix(), &qudit::bell_projector(2, BellIndex { i: 0, j: 0 })) < 1e-12);
    }

    #[test]
    fn block_form_of_swap() {
        let d = 3;
        let y = qudit::swap_operator(d) / real((d * d) as f64);
        let g = block_form_state(&y, (d, d), 1).unwrap();
        let want = bell_private_state(&swap_spec(d)).unwrap();
        assert!(g.max_abs_diff(&want).unwrap() < 1e-10);
    }

    #[test]
    fn block_form_hermitian_example() {
        let y = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![real(0.5), real(-0.5)]));
        let g = block_form_state(&y, (2, 1), 1).unwrap();
        let p0 = linalg::projector(&linalg::ket(2, 0));
        let p1 = linalg::projector(&linalg::ket(2, 1));
        let plus = qudit::bell_projector(2, BellIndex { i: 0, j: 0 });
        let minus = qudit::bell_projector(2, BellIndex { i: 0, j: 1 });
        let m = plus.kronecker(&p0) * real(0.5) + minus.kronecker(&p1) * real(0.5);
        let want = canonical_density(2, (2, 1), m).unwrap();
        assert!(g.max_abs_diff(&want).unwrap() < 1e-12);
    }

    #[test]
    fn block_form_preconditions() {
        let not_normal = CMatrix::from_row_slice(2, 2, &[real(0.0), real(1.0), real(0.0), real(0.0)]);
        assert!(matches!(
            block_form_state(&not_normal, (2, 1), 1).unwrap_err(),
            Error::BlockForm(BlockFormViolation::NotNormal(_))
        ));
        let big = linalg::identity(2);
        assert!(matches!(
            block_form_state(&big, (2, 1), 1).unwrap_err(),
            Error::BlockForm(BlockFormViolation::TraceNorm(_))
        ));
        let imag = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![linalg::c(0.0, 0.5), real(0.5)]));
        assert!(matches!(
            block_form_state(&imag, (2, 1), 1).unwrap_err(),
            Error::BlockForm(BlockFormViolation::PowerNotPositive(_))
        ));
    }

    #[test]
    fn key_attack_of_phi() {
        let phi = qudit::bell_state(2, BellIndex { i: 0, j: 0 }).unwrap();
        let hat = key_attack(&phi).unwrap();
        let mut want = CMatrix::zeros(4, 4);
        want[(0, 0)] = real(0.5);
        want[(3, 3)] = real(0.5);
        assert!(max_abs_diff(hat.matrix(), &want) < 1e-15);
        assert_eq!(key_attack(&hat).unwrap(), hat);
    }

    #[test]
    fn key_attack_needs_key() {
        let (s, _) = qudit::sym_asym_states(2).unwrap();
        assert_eq!(key_attack(&s).unwrap_err(), Error::MissingRole("key"));
    }

    #[test]
    fn swap_marginal_product() {
        let g = bell_private_state(&swap_spec(2)).unwrap();
        let prod = marginal_product(&g).unwrap();
        let key = qudit::bell_projector(2, BellIndex { i: 0, j: 0 }) * real(0.75)
            + qudit::bell_projector(2, BellIndex { i: 0, j: 1 }) * real(0.25);
        let want = canonical_density(2, (2, 2), key.kronecker(&(linalg::identity(4) / real(4.0)))).unwrap();
        assert!(prod.max_abs_diff(&want).unwrap() < 1e-12);
        assert!(marginal_product(&prod).unwrap().max_abs_diff(&prod).unwrap() < 1e-12);
    }

    #[test]
    fn uniform_bell_pbit_marginal_product_is_hat() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut spec = random::bell_private_spec(&mut rng, 2, (2, 2));
        spec.probs = vec![0.5, 0.5];
        let g = bell_private_state(&spec).unwrap();
        let prod = marginal_product(&g).unwrap();
        let hat = key_attack(&g).unwrap();
        assert!(prod.max_abs_diff(&hat).unwrap() < 1e-12);
    }
}
