//! Qudit primitives: generalized Paulis, Bell basis, CNOT/BNOT, Werner extremes.
//!
//! Conventions: `ω = exp(2πi/d)`, `X|j> = |j+1>`, `Z|j> = ω^j |j>`, and
//! `|φ_ij> = (X^i Z^j ⊗ 1)|Φ>` with `|Φ> = d^{-1/2} Σ_k |kk>`, i.e. the flips act
//! on the first qudit of the pair.

use crate::error::{Error, Result};
use crate::layout::{Party, Role, SystemLayout};
use crate::linalg::{self, root_of_unity, CMatrix, ONE};
use crate::operator::{Kind, Operator};

fn check_d(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::QuditDimension(d));
    }
    Ok(())
}

/// Index of a generalized Bell state, both components reduced mod `d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BellIndex {
    pub i: usize,
    pub j: usize,
}

impl BellIndex {
    pub fn new(i: i64, j: i64, d: usize) -> Self {
        let d = d as i64;
        Self { i: i.rem_euclid(d) as usize, j: j.rem_euclid(d) as usize }
    }
}

/// Shift `X = Σ|j+1><j|`.
pub fn shift(d: usize) -> CMatrix {
    CMatrix::from_fn(d, d, |r, c| if r == (c + 1) % d { ONE } else { linalg::ZERO })
}

/// Clock `Z = Σ ω^j |j><j|`.
pub fn clock(d: usize) -> CMatrix {
    CMatrix::from_fn(d, d, |r, c| if r == c { root_of_unity(r as i64, d) } else { linalg::ZERO })
}

/// `X^i Z^j`, exponents taken mod `d`.
pub fn weyl(d: usize, i: i64, j: i64) -> CMatrix {
    linalg::mat_pow(&shift(d), i.rem_euclid(d as i64)) * linalg::mat_pow(&clock(d), j.rem_euclid(d as i64))
}

fn qudit_layout(label: &str, d: usize) -> Result<SystemLayout> {
    SystemLayout::from_tuples(&[(label, d, Party::A, Role::Key)])
}

/// Layout `[KA(d), KB(d)]` for a key pair.
pub fn key_pair_layout(d: usize) -> Result<SystemLayout> {
    SystemLayout::from_tuples(&[("KA", d, Party::A, Role::Key), ("KB", d, Party::B, Role::Key)])
}

/// Layout `[SA(d), SB(d)]` for a shield pair.
pub fn shield_pair_layout(d: usize) -> Result<SystemLayout> {
    SystemLayout::from_tuples(&[("SA", d, Party::A, Role::Shield), ("SB", d, Party::B, Role::Shield)])
}

/// Generalized bit flip and phase flip on a single qudit labelled `Q`.
pub fn pauli_ops(d: usize) -> Result<(Operator, Operator)> {
    check_d(d)?;
    let l = qudit_layout("Q", d)?;
    Ok((Operator::unitary(l.clone(), shift(d))?, Operator::unitary(l, clock(d))?))
}

/// Column vector `|φ_ij>` on `C^d ⊗ C^d`.
pub fn bell_vector(d: usize, idx: BellIndex) -> CMatrix {
    let norm = 1.0 / (d as f64).sqrt();
    let mut v = CMatrix::zeros(d * d, 1);
    for k in 0..d {
        let a = (k + idx.i) % d;
        v[(a * d + k, 0)] = root_of_unity((idx.j * k) as i64, d) * norm;
    }
    v
}

pub fn bell_projector(d: usize, idx: BellIndex) -> CMatrix {
    linalg::projector(&bell_vector(d, idx))
}

/// `|φ_ij><φ_ij|` on the key pair layout `[KA, KB]`.
pub fn bell_state(d: usize, idx: BellIndex) -> Result<Operator> {
    check_d(d)?;
    Ok(Operator::trusted_density(key_pair_layout(d)?, bell_projector(d, idx)))
}

/// `Σ_ab |a, a+b><a, b|`, control first.
pub fn cnot_matrix(d: usize) -> CMatrix {
    let n = d * d;
    let mut m = CMatrix::zeros(n, n);
    for a in 0..d {
        for b in 0..d {
            m[(a * d + (a + b) % d, a * d + b)] = ONE;
        }
    }
    m
}

/// Generalized CNOT on `[C(d), T(d)]`.
pub fn cnot(d: usize) -> Result<Operator> {
    check_d(d)?;
    let l = SystemLayout::from_tuples(&[("C", d, Party::A, Role::Key), ("T", d, Party::A, Role::Key)])?;
    Operator::unitary(l, cnot_matrix(d))
}

/// Layout `[C1, C2, T1, T2]` for the bilateral CNOT. The control pair is `C1 C2`,
/// the target pair `T1 T2`; Alice holds `C1 T1`, Bob holds `C2 T2`.
pub fn bnot_layout(d: usize) -> Result<SystemLayout> {
    SystemLayout::from_tuples(&[
        ("C1", d, Party::A, Role::Key),
        ("C2", d, Party::B, Role::Key),
        ("T1", d, Party::A, Role::Key),
        ("T2", d, Party::B, Role::Key),
    ])
}

/// `CNOT_{C1→T1} ⊗ CNOT_{C2→T2}` in the `[C1, C2, T1, T2]` ordering.
pub fn bnot_matrix(d: usize) -> CMatrix {
    let c = cnot_matrix(d);
    let layout = bnot_layout(d).expect("bnot layout");
    let a = Operator::embed_local(&layout, &c, &["C1", "T1"]).expect("alice cnot");
    let b = Operator::embed_local(&layout, &c, &["C2", "T2"]).expect("bob cnot");
    a * b
}

pub fn bnot(d: usize) -> Result<Operator> {
    check_d(d)?;
    Operator::unitary(bnot_layout(d)?, bnot_matrix(d))
}

/// Bell indices after BNOT acts on `φ_ij ⊗ φ_kl` (control pair first).
pub fn bnot_rule(d: usize, control: BellIndex, target: BellIndex) -> (BellIndex, BellIndex) {
    let (i, j, k, l) = (control.i as i64, control.j as i64, target.i as i64, target.j as i64);
    (BellIndex::new(i, j - l, d), BellIndex::new(k + i, l, d))
}

/// Swap operator `S = Σ |ij><ji|` on `C^d ⊗ C^d`.
pub fn swap_operator(d: usize) -> CMatrix {
    let n = d * d;
    CMatrix::from_fn(n, n, |r, c| {
        let (i, j) = (r / d, r % d);
        if c == j * d + i {
            ONE
        } else {
            linalg::ZERO
        }
    })
}

/// Normalized projectors onto the symmetric and antisymmetric subspaces of
/// `[SA(d), SB(d)]`.
pub fn sym_asym_states(d: usize) -> Result<(Operator, Operator)> {
    check_d(d)?;
    let s = swap_operator(d);
    let id = linalg::identity(d * d);
    let df = d as f64;
    let rho_s = (&id + &s) * linalg::real(1.0 / (df * (df + 1.0)));
    let rho_a = (&id - &s) * linalg::real(1.0 / (df * (df - 1.0)));
    let l = shield_pair_layout(d)?;
    Ok((Operator::trusted_density(l.clone(), rho_s), Operator::trusted_density(l, rho_a)))
}

pub fn max_corr_matrix(d: usize) -> CMatrix {
    let n = d * d;
    CMatrix::from_fn(n, n, |r, c| if r == c && r / d == r % d { ONE } else { linalg::ZERO })
}

/// `1_corr = Σ_k |kk><kk|` on `[KA, KB]`.
pub fn max_corr_projector(d: usize) -> Result<Operator> {
    check_d(d)?;
    Ok(Operator::trusted(
        key_pair_layout(d)?,
        max_corr_matrix(d),
        Kind { hermitian: true, unitary: false, density: false },
    ))
}

/// Discrete Fourier transform with entries `ω^{jk}/√d`.
pub fn fourier_matrix(d: usize) -> CMatrix {
    let s = 1.0 / (d as f64).sqrt();
    CMatrix::from_fn(d, d, |j, k| root_of_unity((j * k) as i64, d) * s)
}

/// `H^{⊗k}` if `d = 2^k`.
pub fn hadamard_power(d: usize) -> Option<CMatrix> {
    if d < 2 || !d.is_power_of_two() {
        return None;
    }
    let h = fourier_matrix(2);
    let mut acc = CMatrix::from_element(1, 1, ONE);
    let mut n = 1;
    while n < d {
        acc = acc.kronecker(&h);
        n *= 2;
    }
    Some(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs_diff, real, trace};
    use approx::assert_abs_diff_eq;

    #[test]
    fn qubit_paulis() {
        let (x, z) = pauli_ops(2).unwrap();
        let xm = CMatrix::from_row_slice(2, 2, &[real(0.0), real(1.0), real(1.0), real(0.0)]);
        let zm = CMatrix::from_row_slice(2, 2, &[real(1.0), real(0.0), real(0.0), real(-1.0)]);
        assert!(max_abs_diff(x.matrix(), &xm) < 1e-15);
        assert!(max_abs_diff(z.matrix(), &zm) < 1e-15);
    }

    #[test]
    fn weyl_commutation_d3() {
        let (x, z) = (shift(3), clock(3));
        let omega = root_of_unity(1, 3);
        assert!(max_abs_diff(&(&z * &x), &((&x * &z) * omega)) < 1e-12);
    }

    #[test]
    fn paulis_have_order_d() {
        for d in 2..=6 {
            assert!(max_abs_diff(&linalg::mat_pow(&shift(d), d as i64), &linalg::identity(d)) < 1e-12);
            assert!(max_abs_diff(&linalg::mat_pow(&clock(d), d as i64), &linalg::identity(d)) < 1e-12);
        }
    }

    #[test]
    fn bell_qubit_examples() {
        let s = 1.0 / 2f64.sqrt();
        let phi00 = bell_vector(2, BellIndex::new(0, 0, 2));
        let phi01 = bell_vector(2, BellIndex::new(0, 1, 2));
        let want00 = CMatrix::from_column_slice(4, 1, &[real(s), real(0.0), real(0.0), real(s)]);
        let want01 = CMatrix::from_column_slice(4, 1, &[real(s), real(0.0), real(0.0), real(-s)]);
        assert!(max_abs_diff(&phi00, &want00) < 1e-15);
        assert!(max_abs_diff(&phi01, &want01) < 1e-15);
    }

    #[test]
    fn bell_d3_shift_example() {
        // (|10> + |21> + |02>)/√3
        let v = bell_vector(3, BellIndex::new(1, 0, 3));
        let s = 1.0 / 3f64.sqrt();
        let mut want = CMatrix::zeros(9, 1);
        for idx in [3, 7, 2] {
            want[(idx, 0)] = real(s);
        }
        assert!(max_abs_diff(&v, &want) < 1e-15);
    }

    #[test]
    fn bell_from_weyl_definition() {
        for d in 2..=4 {
            let phi = bell_vector(d, BellIndex::new(0, 0, d));
            for i in 0..d {
                for j in 0..d {
                    let w = weyl(d, i as i64, j as i64).kronecker(&linalg::identity(d));
                    let v = &w * &phi;
                    assert!(max_abs_diff(&v, &bell_vector(d, BellIndex { i, j })) < 1e-12);
                }
            }
        }
    }

    #[test]
    fn bell_orthonormal() {
        for d in 2..=5 {
            for a in 0..d * d {
                for b in 0..d * d {
                    let p = bell_projector(d, BellIndex { i: a / d, j: a % d });
                    let q = bell_projector(d, BellIndex { i: b / d, j: b % d });
                    let want = if a == b { 1.0 } else { 0.0 };
                    assert_abs_diff_eq!(trace(&(p * q)).re, want, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn qubit_cnot_is_standard() {
        let c = cnot(2).unwrap();
        let mut want = CMatrix::zeros(4, 4);
        for (r, col) in [(0, 0), (1, 1), (3, 2), (2, 3)] {
            want[(r, col)] = ONE;
        }
        assert_eq!(c.matrix(), &want);
    }

    #[test]
    fn bnot_d3_example() {
        let d = 3;
        let v = bnot_matrix(d);
        let input = bell_projector(d, BellIndex::new(1, 2, d)).kronecker(&bell_projector(d, BellIndex::new(0, 1, d)));
        let out = &v * input * v.adjoint();
        let want = bell_projector(d, BellIndex::new(1, 1, d)).kronecker(&bell_projector(d, BellIndex::new(1, 1, d)));
        assert!(max_abs_diff(&out, &want) < 1e-12);
    }

    #[test]
    fn bnot_fixes_phi_phi() {
        for d in 2..=4 {
            let phi = bell_projector(d, BellIndex::new(0, 0, d));
            let pp = phi.kronecker(&phi);
            let v = bnot_matrix(d);
            assert!(max_abs_diff(&(&v * &pp * v.adjoint()), &pp) < 1e-12);
        }
    }

    #[test]
    fn werner_extremes() {
        for d in 2..=5 {
            let (s, a) = sym_asym_states(d).unwrap();
            assert_abs_diff_eq!(s.trace().re, 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(a.trace().re, 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(trace(&(s.matrix() * a.matrix())).norm(), 0.0, epsilon = 1e-12);
        }
        let (_, a) = sym_asym_states(2).unwrap();
        let singlet = bell_projector(2, BellIndex::new(1, 1, 2));
        assert!(max_abs_diff(a.matrix(), &singlet) < 1e-12);
    }

    #[test]
    fn max_corr_is_sum_of_phase_bells() {
        for d in 2..=5 {
            let sum =
                (0..d).fold(CMatrix::zeros(d * d, d * d), |acc, k| acc + bell_projector(d, BellIndex { i: 0, j: k }));
            assert!(max_abs_diff(&sum, &max_corr_matrix(d)) < 1e-12);
            let phi = bell_projector(d, BellIndex::new(0, 0, d));
            assert!(max_abs_diff(&(max_corr_matrix(d) * &phi), &phi) < 1e-12);
        }
        let p = max_corr_projector(2).unwrap();
        let diag: Vec<f64> = p.matrix().diagonal().iter().map(|z| z.re).collect();
        assert_eq!(diag, vec![1.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn small_dimension_rejected() {
        assert_eq!(pauli_ops(1).unwrap_err(), Error::QuditDimension(1));
        assert_eq!(bell_state(1, BellIndex { i: 0, j: 0 }).unwrap_err(), Error::QuditDimension(1));
    }

    #[test]
    fn hadamard_power_is_unitary() {
        for d in [2, 4, 8, 16] {
            let h = hadamard_power(d).unwrap();
            assert!(linalg::unitarity_deviation(&h) < 1e-12);
        }
        assert!(hadamard_power(6).is_none());
    }
}
