//! Named state families: Swap, Fourier, Flower, PPT, PPT-invariant, the `2m`
//! example, and the auxiliary pair `α`, `α̃` used for the PPT-invariant bound.
//!
//! Fourier, Flower and the families derived from them are defined from a unitary
//! `U = d^{-1/2} Σ u_ij |i><j|` with `|u_ij| = 1`, through
//! `𝕌 = Σ u_ij |ii><jj|` and `𝒰 = Σ u_ij |ij><ji|` on the shield pair.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::layout::{Part, Party, Role};
use crate::linalg::{self, real, CMatrix};
use crate::measures::closed;
use crate::operator::Operator;
use crate::qudit::{self, BellIndex};
use crate::states::{self, assemble_key_blocks, canonical_density, BellPrivateSpec, KA, KB, SA, SB};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    Swap,
    Fourier,
    Flower,
    Ppt,
    PptInvariant,
    TwoMExample,
    Alpha,
    AlphaTilde,
}

impl Family {
    pub const ALL: [Family; 8] = [
        Family::Swap,
        Family::Fourier,
        Family::Flower,
        Family::Ppt,
        Family::PptInvariant,
        Family::TwoMExample,
        Family::Alpha,
        Family::AlphaTilde,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Swap => "swap",
            Family::Fourier => "fourier",
            Family::Flower => "flower",
            Family::Ppt => "ppt",
            Family::PptInvariant => "ppt_invariant",
            Family::TwoMExample => "two_m_example",
            Family::Alpha => "alpha",
            Family::AlphaTilde => "alpha_tilde",
        }
    }

    /// Families whose `U` must have entries of modulus `1/√d`.
    fn needs_flat_unitary(self) -> bool {
        matches!(self, Family::Fourier | Family::Ppt | Family::PptInvariant | Family::Alpha | Family::AlphaTilde)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s || f.name().replace('_', "-") == s)
            .ok_or_else(|| Error::UnsupportedFamily(format!("unknown family `{s}`")))
    }
}

#[derive(Debug, Clone)]
pub struct StateFamilyParams {
    pub family: Family,
    /// Shield dimension `|S_A| = |S_B|`.
    pub d: usize,
    /// Overrides the default unitary (DFT, or Hadamard powers for `flower`).
    pub unitary: Option<CMatrix>,
}

impl StateFamilyParams {
    pub fn new(family: Family, d: usize) -> Self {
        Self { family, d, unitary: None }
    }
}

/// Closed-form values attached to a constructed family member.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FamilyReference {
    /// Log-negativity across the A:B cut.
    pub log_negativity: Option<f64>,
    /// Hashing value `H(B) - H(AB)` of the whole state.
    pub hashing: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct FamilyState {
    pub state: Operator,
    pub reference: FamilyReference,
}

/// Register label used by `α` and `α̃`.
pub const REGISTER: &str = "RA";

/// Labels of the `2m` example at `m = 1`: three Bell pairs, the first two forming the key.
pub const TWO_M_LABELS: [&str; 6] = ["KA1", "KA2", "SA", "KB1", "KB2", "SB"];

fn check_d(family: Family, d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::UnsupportedFamily(format!("{family} needs d >= 2, got {d}")));
    }
    Ok(())
}

/// Validates a caller-supplied `U`, or supplies the family default.
fn family_unitary(params: &StateFamilyParams) -> Result<CMatrix> {
    let d = params.d;
    let u = match &params.unitary {
        Some(u) => u.clone(),
        None if params.family == Family::Flower => qudit::hadamard_power(d)
            .ok_or_else(|| Error::UnsupportedFamily(format!("flower default unitary needs d a power of 2, got {d}")))?,
        None => qudit::fourier_matrix(d),
    };
    if u.nrows() != d || u.ncols() != d {
        return Err(Error::DimensionMismatch { expected: d, found: u.nrows() });
    }
    let dev = linalg::unitarity_deviation(&u);
    if dev > 1e-10 {
        return Err(Error::NotUnitary(dev));
    }
    if params.family.needs_flat_unitary() {
        let target = 1.0 / (d as f64).sqrt();
        let worst = u.iter().map(|z| (z.norm() - target).abs()).fold(0.0, f64::max);
        if worst > 1e-10 {
            return Err(Error::InvalidSpec(format!(
                "{} needs |U_ij| = 1/sqrt(d); deviation {worst:.3e}",
                params.family
            )));
        }
    }
    Ok(u)
}

/// `𝕌 = Σ u_ij |ii><jj|` with `u_ij = √d U_ij`.
pub fn flower_operator(u: &CMatrix) -> CMatrix {
    let d = u.nrows();
    let s = real((d as f64).sqrt());
    let mut m = CMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            m[(i * d + i, j * d + j)] = u[(i, j)] * s;
        }
    }
    m
}

/// `𝒰 = Σ u_ij |ij><ji|` with `u_ij = √d U_ij`.
pub fn fourier_operator(u: &CMatrix) -> CMatrix {
    let d = u.nrows();
    let s = real((d as f64).sqrt());
    let mut m = CMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            m[(i * d + j, j * d + i)] = u[(i, j)] * s;
        }
    }
    m
}

/// Key-first blocks of a key-qubit state; indices are `(row key |ab>, column key |ce>)`.
type Blocks = Vec<((usize, usize), (usize, usize), CMatrix)>;

fn from_blocks(d: usize, blocks: &Blocks) -> CMatrix {
    assemble_key_blocks(2, d * d, |a, b, c, e| {
        let mut acc: Option<CMatrix> = None;
        for (row, col, m) in blocks {
            if *row == (a, b) && *col == (c, e) {
                acc = Some(match acc {
                    Some(x) => x + m,
                    None => m.clone(),
                });
            }
        }
        acc
    })
}

fn scale(blocks: Blocks, s: f64) -> Blocks {
    blocks.into_iter().map(|(r, c, m)| (r, c, m * real(s))).collect()
}

fn hat(blocks: Blocks) -> Blocks {
    blocks.into_iter().filter(|(r, c, _)| r == c).collect()
}

/// Bit flip on Alice's key.
fn flip_a(blocks: Blocks) -> Blocks {
    blocks.into_iter().map(|((a, b), (c, e), m)| ((a ^ 1, b), (c ^ 1, e), m)).collect()
}

/// Bit flip on Bob's key.
fn flip_b(blocks: Blocks) -> Blocks {
    blocks.into_iter().map(|((a, b), (c, e), m)| ((a, b ^ 1), (c, e ^ 1), m)).collect()
}

fn fourier_blocks(u: &CMatrix) -> Blocks {
    let d = u.nrows();
    let w = 1.0 / (2.0 * (d * d) as f64);
    let id = linalg::identity(d * d);
    let f = fourier_operator(u);
    scale(
        vec![
            ((0, 0), (0, 0), id.clone()),
            ((0, 0), (1, 1), f.clone()),
            ((1, 1), (0, 0), f.adjoint()),
            ((1, 1), (1, 1), id),
        ],
        w,
    )
}

fn flower_blocks(u: &CMatrix) -> Blocks {
    let d = u.nrows();
    let w = 1.0 / (2.0 * d as f64);
    let corr = qudit::max_corr_matrix(d);
    let f = flower_operator(u) / real((d as f64).sqrt());
    scale(
        vec![
            ((0, 0), (0, 0), corr.clone()),
            ((0, 0), (1, 1), f.clone()),
            ((1, 1), (0, 0), f.adjoint()),
            ((1, 1), (1, 1), corr),
        ],
        w,
    )
}

fn noise_weight(d: usize) -> (f64, f64) {
    let r = 1.0 / (d as f64).sqrt();
    (1.0 / (1.0 + r), r)
}

/// `ξ_U = c (γ_U + d^{-1/2} X_A γ̂_flower X_A)`.
fn ppt_blocks(u: &CMatrix) -> Blocks {
    let (c, r) = noise_weight(u.nrows());
    let mut b = fourier_blocks(u);
    b.extend(scale(flip_a(hat(flower_blocks(u))), r));
    scale(b, c)
}

/// `ξ_Γ = c (γ_U + d^{-1/2} X_B γ_flower X_B)`; the flip places `𝕌` in the
/// `|01><10|` block so the state equals its partial transpose on `KB SB`.
fn ppt_invariant_blocks(u: &CMatrix) -> Blocks {
    let (c, r) = noise_weight(u.nrows());
    let mut b = fourier_blocks(u);
    b.extend(scale(flip_b(flower_blocks(u)), r));
    scale(b, c)
}

fn key_qubit_state(d: usize, blocks: &Blocks) -> Result<Operator> {
    canonical_density(2, (d, d), from_blocks(d, blocks))
}

/// `c (|0><0| ⊗ first + d^{-1/2} |1><1| ⊗ second)` with the flag as a shield qubit
/// of Alice placed right after `SA`.
fn flagged_pair(d: usize, first: &Blocks, second: &Blocks) -> Result<Operator> {
    let (c, r) = noise_weight(d);
    let flag = |k: usize| linalg::projector(&linalg::ket(2, k));
    let m =
        flag(0).kronecker(&from_blocks(d, first)) * real(c) + flag(1).kronecker(&from_blocks(d, second)) * real(c * r);
    let layout = crate::layout::SystemLayout::new(vec![
        Part::new(REGISTER, 2, Party::A, Role::Shield),
        Part::new(KA, 2, Party::A, Role::Key),
        Part::new(KB, 2, Party::B, Role::Key),
        Part::new(SA, d, Party::A, Role::Shield),
        Part::new(SB, d, Party::B, Role::Shield),
    ])?;
    Operator::density(layout, m)?.reorder(&[KA, SA, REGISTER, KB, SB])
}

/// `Σ_ij 4^{-1} φ_{0i} ⊗ φ_{0j} ⊗ φ_{ij}` on qubit pairs, canonical labels
/// [`TWO_M_LABELS`].
fn two_m_example() -> Result<Operator> {
    let bell = |i, j| qudit::bell_projector(2, BellIndex { i, j });
    let mut m = CMatrix::zeros(64, 64);
    for i in 0..2 {
        for j in 0..2 {
            m += linalg::kron_all(&[&bell(0, i), &bell(0, j), &bell(i, j)]) * real(0.25);
        }
    }
    let layout = crate::layout::SystemLayout::new(vec![
        Part::new("KA1", 2, Party::A, Role::Key),
        Part::new("KB1", 2, Party::B, Role::Key),
        Part::new("KA2", 2, Party::A, Role::Key),
        Part::new("KB2", 2, Party::B, Role::Key),
        Part::new("SA", 2, Party::A, Role::Shield),
        Part::new("SB", 2, Party::B, Role::Shield),
    ])?;
    Operator::density(layout, m)?.reorder(&TWO_M_LABELS)
}

/// Shield states and weights of the Swap family as a Bell private state.
pub fn swap_spec(d: usize) -> Result<BellPrivateSpec> {
    let (s, a) = qudit::sym_asym_states(d)?;
    let df = d as f64;
    Ok(BellPrivateSpec {
        probs: vec![0.5 * (1.0 + 1.0 / df), 0.5 * (1.0 - 1.0 / df)],
        sigmas: vec![s.into_matrix(), a.into_matrix()],
        shield_dims: (d, d),
    })
}

/// Builds a family member on its canonical layout together with its closed-form values.
pub fn family_construct(params: &StateFamilyParams) -> Result<FamilyState> {
    let d = params.d;
    let family = params.family;
    check_d(family, d)?;
    let none = FamilyReference::default();
    let out = match family {
        Family::Swap => FamilyState {
            state: states::bell_private_state(&swap_spec(d)?)?,
            reference: FamilyReference { log_negativity: Some(closed::en_swap(d)), hashing: None },
        },
        Family::Fourier => FamilyState {
            state: key_qubit_state(d, &fourier_blocks(&family_unitary(params)?))?,
            reference: FamilyReference { log_negativity: Some(closed::en_fourier(d)), hashing: None },
        },
        Family::Flower => FamilyState {
            state: key_qubit_state(d, &flower_blocks(&family_unitary(params)?))?,
            reference: FamilyReference { log_negativity: Some(closed::en_flower(d)), hashing: Some(1.0) },
        },
        Family::Ppt => FamilyState {
            state: key_qubit_state(d, &ppt_blocks(&family_unitary(params)?))?,
            reference: FamilyReference { log_negativity: Some(0.0), hashing: None },
        },
        Family::PptInvariant => FamilyState {
            state: key_qubit_state(d, &ppt_invariant_blocks(&family_unitary(params)?))?,
            reference: FamilyReference { log_negativity: Some(0.0), hashing: None },
        },
        Family::TwoMExample => {
            if d == 4 {
                return Err(Error::UnsupportedFamily(
                    "two_m_example at m=2 needs total dimension 16384, above the desk-scale budget".into(),
                ));
            }
            if d != 2 {
                return Err(Error::UnsupportedFamily(format!(
                    "two_m_example is realized at m=1 only (shield dimension 2), got d={d}"
                )));
            }
            FamilyState { state: two_m_example()?, reference: none }
        }
        Family::Alpha => {
            let u = family_unitary(params)?;
            FamilyState { state: flagged_pair(d, &fourier_blocks(&u), &flower_blocks(&u))?, reference: none }
        }
        Family::AlphaTilde => {
            let u = family_unitary(params)?;
            FamilyState { state: flagged_pair(d, &ppt_blocks(&u), &hat(flower_blocks(&u)))?, reference: none }
        }
    };
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;

    fn build(f: Family, d: usize) -> Operator {
        family_construct(&StateFamilyParams::new(f, d)).unwrap().state
    }

    #[test]
    fn family_names_round_trip() {
        for f in Family::ALL {
            assert_eq!(f.name().parse::<Family>().unwrap(), f);
        }
        assert!("xml".parse::<Family>().is_err());
    }

    #[test]
    fn swap_d2_weights() {
        let g = build(Family::Swap, 2);
        assert_eq!(g.dim(), 16);
        let key = g.marginal(&[KA, KB]).unwrap();
        let plus = qudit::bell_projector(2, BellIndex { i: 0, j: 0 });
        let minus = qudit::bell_projector(2, BellIndex { i: 0, j: 1 });
        let want = plus * real(0.75) + minus * real(0.25);
        assert!(max_abs_diff(key.matrix(), &want) < 1e-12);
    }

    #[test]
    fn fourier_and_flower_operators() {
        for d in 2..=5 {
            let u = qudit::fourier_matrix(d);
            assert!(linalg::unitarity_deviation(&fourier_operator(&u)) < 1e-12);
            let f = flower_operator(&u) / real((d as f64).sqrt());
            assert!(max_abs_diff(&(&f * f.adjoint()), &qudit::max_corr_matrix(d)) < 1e-12);
        }
    }

    #[test]
    fn every_family_is_a_density() {
        for f in Family::ALL {
            let ds: &[usize] = match f {
                Family::TwoMExample => &[2],
                Family::Flower => &[2, 4],
                _ => &[2, 3, 4],
            };
            for &d in ds {
                let g = build(f, d);
                assert!(g.min_eigenvalue() > -1e-10, "{f} d={d}");
                assert!((g.trace().re - 1.0).abs() < 1e-10, "{f} d={d}");
            }
        }
    }

    #[test]
    fn ppt_invariant_equals_partial_transpose() {
        for d in [2, 3, 4] {
            let x = build(Family::PptInvariant, d);
            let xt = x.partial_transpose(&[KB, SB]).unwrap();
            assert!(x.max_abs_diff(&xt).unwrap() < 1e-12, "d={d}");
        }
    }

    #[test]
    fn two_m_rejects_m2_and_other_dims() {
        let err = family_construct(&StateFamilyParams::new(Family::TwoMExample, 4)).unwrap_err();
        assert!(matches!(err, Error::UnsupportedFamily(ref s) if s.contains("16384")));
        assert!(family_construct(&StateFamilyParams::new(Family::TwoMExample, 3)).is_err());
    }

    #[test]
    fn flower_default_needs_power_of_two() {
        assert!(family_construct(&StateFamilyParams::new(Family::Flower, 3)).is_err());
        let p = StateFamilyParams { family: Family::Flower, d: 3, unitary: Some(qudit::fourier_matrix(3)) };
        assert!(family_construct(&p).is_ok());
    }

    #[test]
    fn non_flat_unitary_rejected_for_fourier() {
        let p = StateFamilyParams { family: Family::Fourier, d: 2, unitary: Some(linalg::identity(2)) };
        assert!(matches!(family_construct(&p).unwrap_err(), Error::InvalidSpec(_)));
    }

    #[test]
    fn alpha_layout_has_register_in_shield() {
        let a = build(Family::Alpha, 2);
        assert_eq!(a.layout().labels(), vec![KA, SA, REGISTER, KB, SB]);
        assert_eq!(a.layout().part(REGISTER).unwrap().role, Role::Shield);
    }
}
