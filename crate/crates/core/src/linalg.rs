//! Dense complex matrix helpers on top of `nalgebra`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<Complex64>;

/// Eigenvalues with `|λ|` below this are treated as zero for rank and support decisions.
pub const EIG_ZERO: f64 = 1e-12;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn real(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// `exp(2πi k / d)`.
pub fn root_of_unity(k: i64, d: usize) -> C64 {
    let d = d as i64;
    let k = k.rem_euclid(d);
    let theta = 2.0 * std::f64::consts::PI * (k as f64) / (d as f64);
    C64::from_polar(1.0, theta)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn kron_all(ms: &[&CMatrix]) -> CMatrix {
    ms.iter().fold(CMatrix::from_element(1, 1, ONE), |acc, m| acc.kronecker(*m))
}

pub fn ket(dim: usize, k: usize) -> CMatrix {
    let mut v = CMatrix::zeros(dim, 1);
    v[(k, 0)] = ONE;
    v
}

/// `|v><v|` for a column vector.
pub fn projector(v: &CMatrix) -> CMatrix {
    v * v.adjoint()
}

pub fn trace(m: &CMatrix) -> C64 {
    m.diagonal().iter().copied().sum()
}

/// Largest entry modulus of `a - b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch");
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * real(0.5)
}

/// Eigendecomposition of the Hermitian part of `m`: eigenvalues in ascending order
/// and the matching eigenvectors as columns.
pub fn eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    let scale = max_entry(m);
    if scale == 0.0 {
        return (vec![0.0; n], identity(n));
    }
    let (evals, evecs) = raw_eigh(&hermitize(m).map(|z| z.unscale(scale)));
    let mut idx: Vec<usize> = (0..evals.len()).collect();
    idx.sort_by(|&i, &j| evals[i].total_cmp(&evals[j]));
    let vals = idx.iter().map(|&i| evals[i] * scale).collect();
    let vecs = CMatrix::from_fn(n, idx.len(), |r, k| evecs[(r, idx[k])]);
    (vals, vecs)
}

pub fn eigvalsh(m: &CMatrix) -> Vec<f64> {
    eigh(m).0
}

/// `SymmetricEigen` can return NaN on some sparse complex Hermitian inputs; in
/// that case the decomposition is redone on `Q h Q†` for a fixed dense unitary `Q`.
fn raw_eigh(h: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = h.nrows();
    let diagonal = (0..n).all(|i| (0..n).all(|j| i == j || h[(i, j)] == ZERO));
    if diagonal {
        return ((0..n).map(|i| h[(i, i)].re).collect(), identity(n));
    }
    let eig = SymmetricEigen::new(h.clone());
    let bad = |e: &SymmetricEigen<C64, nalgebra::Dyn>| {
        e.eigenvalues.iter().any(|x| !x.is_finite())
            || e.eigenvectors.iter().any(|z| !z.re.is_finite() || !z.im.is_finite())
    };
    if !bad(&eig) {
        return (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors);
    }
    let q = scrambler(h.nrows());
    let rotated = hermitize(&(&q * h * q.adjoint()));
    let eig = SymmetricEigen::new(rotated);
    assert!(!bad(&eig), "Hermitian eigensolver failed");
    (eig.eigenvalues.iter().copied().collect(), q.adjoint() * eig.eigenvectors)
}

/// `D F D` with `F` the DFT and `D` a quadratic-phase diagonal.
fn scrambler(n: usize) -> CMatrix {
    let norm = 1.0 / (n as f64).sqrt();
    let chirp = |j: usize| {
        let t = 0.7 * (j * j) as f64 + 0.3 * j as f64;
        c(t.cos(), t.sin())
    };
    CMatrix::from_fn(n, n, |j, k| chirp(j) * root_of_unity((j * k) as i64, n) * chirp(k) * norm)
}

fn max_entry(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Applies a real function to the spectrum of a Hermitian matrix.
pub fn herm_fn(m: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let (vals, vecs) = eigh(m);
    let mut scaled = vecs.clone();
    for (k, &v) in vals.iter().enumerate() {
        let s = f(v);
        scaled.column_mut(k).iter_mut().for_each(|z| *z *= s);
    }
    scaled * vecs.adjoint()
}

/// Projector onto the span of eigenvectors with eigenvalue above `cutoff`.
pub fn support_projector(m: &CMatrix, cutoff: f64) -> CMatrix {
    herm_fn(m, |x| if x > cutoff { 1.0 } else { 0.0 })
}

/// Sum of singular values. Hermitian inputs go through the eigenvalue route.
pub fn trace_norm(m: &CMatrix) -> f64 {
    let scale = max_entry(m).max(1.0);
    if hermitian_deviation(m) <= 1e-13 * scale {
        eigvalsh(m).iter().map(|x| x.abs()).sum()
    } else {
        m.clone().svd(false, false).singular_values.iter().sum()
    }
}

/// `‖|a><a| − |b><b|‖₁` for unit vectors, from the part of `b` orthogonal to `a`.
pub fn pure_trace_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    let overlap = a.dotc(b);
    let orth = b - a * overlap;
    2.0 * orth.norm()
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `||U†U - 1||_F`.
pub fn unitarity_deviation(u: &CMatrix) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    frobenius(&(u.adjoint() * u - identity(u.nrows())))
}

/// Integer matrix power; negative exponents use the adjoint, which is the inverse
/// for unitaries and the support inverse for partial isometries.
pub fn mat_pow(m: &CMatrix, k: i64) -> CMatrix {
    let base = if k < 0 { m.adjoint() } else { m.clone() };
    let mut e = k.unsigned_abs();
    let mut acc = identity(m.nrows());
    let mut sq = base;
    while e > 0 {
        if e & 1 == 1 {
            acc = &acc * &sq;
        }
        sq = &sq * &sq;
        e >>= 1;
    }
    acc
}

/// Binary entropy of a probability vector, in bits.
pub fn shannon_bits(p: &[f64]) -> f64 {
    p.iter().filter(|&&x| x > EIG_ZERO).map(|&x| -x * x.log2()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn trace_norm_of_identity() {
        assert_abs_diff_eq!(trace_norm(&identity(5)), 5.0, epsilon = 1e-12);
    }

    #[test]
    fn trace_norm_non_hermitian_uses_svd() {
        let m = CMatrix::from_row_slice(2, 2, &[ZERO, real(2.0), ZERO, ZERO]);
        assert_abs_diff_eq!(trace_norm(&m), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn negative_power_is_adjoint() {
        let u = CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]) * c(0.0, 1.0);
        let p = mat_pow(&u, -3);
        assert!(max_abs_diff(&(p * mat_pow(&u, 3)), &identity(2)) < 1e-14);
    }

    #[test]
    fn eigh_sorted_and_reconstructs() {
        let m = CMatrix::from_row_slice(2, 2, &[real(2.0), c(0.0, 1.0), c(0.0, -1.0), real(2.0)]);
        let (vals, vecs) = eigh(&m);
        assert_abs_diff_eq!(vals[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(vals[1], 3.0, epsilon = 1e-12);
        let d = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(2, vals.iter().map(|&x| real(x))));
        assert!(max_abs_diff(&(&vecs * d * vecs.adjoint()), &m) < 1e-12);
    }

    #[test]
    fn tiny_and_zero_matrices() {
        assert_eq!(eigvalsh(&CMatrix::zeros(3, 3)), vec![0.0; 3]);
        let m = identity(3) * real(1e-300);
        assert!(eigvalsh(&m).iter().all(|&x| (x - 1e-300).abs() < 1e-310));
    }

    #[test]
    fn scrambler_is_unitary() {
        for n in [1, 2, 7, 16] {
            assert!(unitarity_deviation(&scrambler(n)) < 1e-12);
        }
    }

    #[test]
    fn pure_distance_matches_trace_norm() {
        let a = ket(3, 0);
        let b = (ket(3, 0) + ket(3, 1)) / real(2f64.sqrt());
        let want = trace_norm(&(projector(&a) - projector(&b)));
        assert_abs_diff_eq!(pure_trace_distance(&a, &b), want, epsilon = 1e-12);
        assert_abs_diff_eq!(pure_trace_distance(&a, &(a.clone() * c(0.0, 1.0))), 0.0, epsilon = 1e-15);
    }
}
