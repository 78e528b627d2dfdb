//! Seeded random matrices and states for property checks and verification suites.

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::error::Result;
use crate::linalg::{self, c, CMatrix};
use crate::operator::Operator;
use crate::states::{self, BellPrivateSpec};

/// Complex Ginibre matrix with i.i.d. standard normal real and imaginary parts.
pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        c(re, im)
    })
}

/// Haar-random unitary (QR of a Ginibre matrix with the phase fix on `R`'s diagonal).
pub fn unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    let qr = ginibre(rng, n, n).qr();
    let (mut q, r) = (qr.q(), qr.r());
    for k in 0..n {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { linalg::ONE };
        q.column_mut(k).iter_mut().for_each(|z| *z *= phase);
    }
    q
}

/// Random density matrix of the given rank (induced measure).
pub fn density<R: Rng + ?Sized>(rng: &mut R, n: usize, rank: usize) -> CMatrix {
    let g = ginibre(rng, n, rank.max(1));
    let m = &g * g.adjoint();
    let t = linalg::trace(&m);
    m / t
}

/// Random probability vector with all entries positive.
pub fn probabilities<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).map(|x: f64| x + 1e-3).collect();
    let total: f64 = raw.iter().sum();
    let mut p: Vec<f64> = raw.iter().map(|x| x / total).collect();
    let head: f64 = p[..n - 1].iter().sum();
    p[n - 1] = 1.0 - head;
    p
}

/// Random key-correlated state on `[KA, SA, KB, SB]`.
pub fn key_correlated_state<R: Rng + ?Sized>(
    rng: &mut R,
    key_dim: usize,
    shield_dims: (usize, usize),
) -> Result<Operator> {
    let s = shield_dims.0 * shield_dims.1;
    let big = density(rng, key_dim * s, key_dim * s);
    let blocks: Vec<Vec<CMatrix>> = (0..key_dim)
        .map(|mu| (0..key_dim).map(|nu| big.view((mu * s, nu * s), (s, s)).into_owned()).collect())
        .collect();
    states::key_correlated(&blocks, shield_dims)
}

/// Random Bell private state specification with pairwise orthogonal shield states.
/// Requires `shield_dims.0 * shield_dims.1 >= key_dim`.
pub fn bell_private_spec<R: Rng + ?Sized>(rng: &mut R, key_dim: usize, shield_dims: (usize, usize)) -> BellPrivateSpec {
    let s = shield_dims.0 * shield_dims.1;
    assert!(s >= key_dim, "shield too small for {key_dim} orthogonal states");
    let v = unitary(rng, s);
    let sigmas = (0..key_dim)
        .map(|k| {
            let cols: Vec<usize> = (k..s).step_by(key_dim).collect();
            let w = CMatrix::from_fn(s, cols.len(), |r, j| v[(r, cols[j])]);
            let inner = density(rng, cols.len(), cols.len());
            &w * inner * w.adjoint()
        })
        .collect();
    BellPrivateSpec { probs: probabilities(rng, key_dim), sigmas, shield_dims }
}
