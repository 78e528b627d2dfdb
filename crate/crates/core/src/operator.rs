//! Operators bound to a [`SystemLayout`].

use crate::error::{Error, Result};
use crate::layout::SystemLayout;
use crate::linalg::{self, CMatrix, C64, ONE, ZERO};

/// Tolerances used when validating operator kinds.
pub mod tol {
    pub const HERMITIAN: f64 = 1e-12;
    pub const TRACE: f64 = 1e-10;
    pub const MIN_EIGENVALUE: f64 = -1e-10;
    pub const UNITARY: f64 = 1e-10;
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Kind {
    pub hermitian: bool,
    pub unitary: bool,
    pub density: bool,
}

/// A dense complex square matrix on a layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    layout: SystemLayout,
    matrix: CMatrix,
    kind: Kind,
}

impl Operator {
    /// Wraps a matrix without any kind claims. Only the Hermitian flag is inferred.
    pub fn new(layout: SystemLayout, matrix: CMatrix) -> Result<Self> {
        check_shape(&layout, &matrix)?;
        let hermitian = linalg::hermitian_deviation(&matrix) <= tol::HERMITIAN;
        Ok(Self { layout, matrix, kind: Kind { hermitian, ..Kind::default() } })
    }

    /// Validates and wraps a density operator: Hermitian, unit trace, PSD.
    pub fn density(layout: SystemLayout, matrix: CMatrix) -> Result<Self> {
        check_shape(&layout, &matrix)?;
        validate_density(&matrix)?;
        Ok(Self { layout, matrix, kind: Kind { hermitian: true, unitary: false, density: true } })
    }

    pub fn unitary(layout: SystemLayout, matrix: CMatrix) -> Result<Self> {
        check_shape(&layout, &matrix)?;
        let dev = linalg::unitarity_deviation(&matrix);
        if dev > tol::UNITARY {
            return Err(Error::NotUnitary(dev));
        }
        let hermitian = linalg::hermitian_deviation(&matrix) <= tol::HERMITIAN;
        Ok(Self { layout, matrix, kind: Kind { hermitian, unitary: true, density: false } })
    }

    /// Wraps a matrix whose kind is known by construction.
    pub(crate) fn trusted(layout: SystemLayout, matrix: CMatrix, kind: Kind) -> Self {
        debug_assert_eq!(layout.dim(), matrix.nrows());
        Self { layout, matrix, kind }
    }

    pub(crate) fn trusted_density(layout: SystemLayout, matrix: CMatrix) -> Self {
        Self::trusted(layout, matrix, Kind { hermitian: true, unitary: false, density: true })
    }

    pub fn identity(layout: SystemLayout) -> Self {
        let n = layout.dim();
        Self::trusted(layout, linalg::identity(n), Kind { hermitian: true, unitary: true, density: n == 1 })
    }

    /// Maximally mixed state on a layout.
    pub fn maximally_mixed(layout: SystemLayout) -> Self {
        let n = layout.dim();
        Self::trusted_density(layout, linalg::identity(n) / linalg::real(n as f64))
    }

    pub fn layout(&self) -> &SystemLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    pub fn is_density(&self) -> bool {
        self.kind.density
    }

    pub fn trace(&self) -> C64 {
        linalg::trace(&self.matrix)
    }

    /// Re-validates as a density operator.
    pub fn into_density(self) -> Result<Self> {
        Self::density(self.layout, self.matrix)
    }

    /// Fails unless the operator was constructed or validated as a density.
    pub fn require_density(&self) -> Result<()> {
        if self.kind.density {
            Ok(())
        } else {
            validate_density(&self.matrix)
        }
    }

    /// Same matrix with every label suffixed, for building tensor powers.
    pub fn relabel(&self, suffix: &str) -> Self {
        Self { layout: self.layout.with_suffix(suffix), ..self.clone() }
    }

    pub fn with_layout(&self, layout: SystemLayout) -> Result<Self> {
        check_shape(&layout, &self.matrix)?;
        Ok(Self { layout, ..self.clone() })
    }

    /// Kronecker product; the layout is the concatenation.
    pub fn tensor(&self, other: &Operator) -> Result<Self> {
        let layout = self.layout.concat(&other.layout)?;
        let kind = Kind {
            hermitian: self.kind.hermitian && other.kind.hermitian,
            unitary: self.kind.unitary && other.kind.unitary,
            density: self.kind.density && other.kind.density,
        };
        Ok(Self::trusted(layout, self.matrix.kronecker(&other.matrix), kind))
    }

    /// n-fold tensor power with labels suffixed `_1`, `_2`, ...; `n = 1` returns a copy.
    pub fn tensor_power(&self, n: usize) -> Result<Self> {
        assert!(n >= 1);
        if n == 1 {
            return Ok(self.clone());
        }
        let mut acc = self.relabel("_1");
        for k in 2..=n {
            acc = acc.tensor(&self.relabel(&format!("_{k}")))?;
        }
        Ok(acc)
    }

    /// Traces out the named subsystems; the remaining parts keep their order.
    pub fn partial_trace(&self, labels: &[&str]) -> Result<Self> {
        let (traced, kept) = self.layout.split_offsets(labels)?;
        let kept_labels = self.layout.complement(labels);
        let layout = self.layout.select(&kept_labels)?;
        let n = kept.len();
        let m = &self.matrix;
        let out = CMatrix::from_fn(n, n, |r, c| {
            let (br, bc) = (kept[r], kept[c]);
            traced.iter().map(|&t| m[(br + t, bc + t)]).sum()
        });
        let kind = Kind { hermitian: self.kind.hermitian, unitary: false, density: self.kind.density };
        Ok(Self::trusted(layout, out, kind))
    }

    /// Keeps only the named subsystems, in the order given.
    pub fn marginal(&self, labels: &[&str]) -> Result<Self> {
        let traced = self.layout.complement(labels);
        let traced: Vec<&str> = traced.to_vec();
        let reduced = self.partial_trace(&traced)?;
        reduced.reorder(labels)
    }

    /// Transposes the named subsystems. An involution.
    pub fn partial_transpose(&self, labels: &[&str]) -> Result<Self> {
        let (sel, rest) = self.layout.split_offsets(labels)?;
        let n = self.dim();
        let mut out = CMatrix::zeros(n, n);
        let m = &self.matrix;
        for &ra in &rest {
            for &rb in &rest {
                for &sa in &sel {
                    for &sb in &sel {
                        out[(sa + ra, sb + rb)] = m[(sb + ra, sa + rb)];
                    }
                }
            }
        }
        let kind = Kind { hermitian: self.kind.hermitian, unitary: false, density: false };
        Ok(Self::trusted(self.layout.clone(), out, kind))
    }

    /// Reorders the parts to the given label order (must name every part).
    pub fn reorder(&self, order: &[&str]) -> Result<Self> {
        if order.len() != self.layout.len() {
            return Err(Error::BadPartition(format!(
                "reorder needs all {} labels, got {}",
                self.layout.len(),
                order.len()
            )));
        }
        let pos = self.layout.positions(order)?;
        let perm = self.layout.offsets(&pos);
        let layout = self.layout.select(order)?;
        let m = &self.matrix;
        let out = CMatrix::from_fn(perm.len(), perm.len(), |i, j| m[(perm[i], perm[j])]);
        Ok(Self::trusted(layout, out, self.kind))
    }

    /// `(U ⊗ 1) X` with `U` acting on the named parts (in the given order).
    pub fn left_mul_local(&self, u: &CMatrix, labels: &[&str]) -> Result<Self> {
        let out = left_mul_local(&self.layout, &self.matrix, u, labels)?;
        Ok(Self::trusted(self.layout.clone(), out, Kind::default()))
    }

    /// `(U ⊗ 1) X (U ⊗ 1)†` with `U` acting on the named parts.
    pub fn conjugate_local(&self, u: &CMatrix, labels: &[&str]) -> Result<Self> {
        let ux = left_mul_local(&self.layout, &self.matrix, u, labels)?;
        let uxu = left_mul_local(&self.layout, &ux.adjoint(), u, labels)?.adjoint();
        Ok(Self::trusted(self.layout.clone(), uxu, self.conjugated_kind(u)))
    }

    /// `V X V†` for an operator on the full layout.
    pub fn conjugate(&self, v: &CMatrix) -> Result<Self> {
        if v.nrows() != self.dim() || v.ncols() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: v.nrows() });
        }
        let out = v * &self.matrix * v.adjoint();
        Ok(Self::trusted(self.layout.clone(), out, self.conjugated_kind(v)))
    }

    fn conjugated_kind(&self, u: &CMatrix) -> Kind {
        let unitary = linalg::unitarity_deviation(u) <= tol::UNITARY;
        Kind { hermitian: self.kind.hermitian, unitary: false, density: self.kind.density && unitary }
    }

    /// Embeds a local operator on the named parts into the full layout.
    pub fn embed_local(layout: &SystemLayout, u: &CMatrix, labels: &[&str]) -> Result<CMatrix> {
        let (sel, rest) = layout.split_offsets(labels)?;
        if u.nrows() != sel.len() || u.ncols() != sel.len() {
            return Err(Error::DimensionMismatch { expected: sel.len(), found: u.nrows() });
        }
        let n = layout.dim();
        let mut out = CMatrix::zeros(n, n);
        for &r in &rest {
            for (a, &sa) in sel.iter().enumerate() {
                for (b, &sb) in sel.iter().enumerate() {
                    out[(sa + r, sb + r)] = u[(a, b)];
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Operator) -> Result<Self> {
        same_layout(&self.layout, &other.layout)?;
        Self::new(self.layout.clone(), &self.matrix + &other.matrix)
    }

    pub fn scale(&self, s: f64) -> Self {
        let kind = Kind { density: false, unitary: false, hermitian: self.kind.hermitian };
        Self::trusted(self.layout.clone(), &self.matrix * linalg::real(s), kind)
    }

    /// Convex combination `Σ w_i ρ_i` of densities on one layout.
    pub fn mixture(terms: &[(f64, &Operator)]) -> Result<Self> {
        let first = terms.first().ok_or_else(|| Error::InvalidSpec("empty mixture".into()))?.1;
        let mut acc = CMatrix::zeros(first.dim(), first.dim());
        for (w, op) in terms {
            same_layout(&first.layout, &op.layout)?;
            acc += op.matrix() * linalg::real(*w);
        }
        Self::density(first.layout.clone(), acc)
    }

    pub fn trace_norm(&self) -> f64 {
        linalg::trace_norm(&self.matrix)
    }

    /// Trace distance `||a - b||_1` (not halved).
    pub fn trace_distance(&self, other: &Operator) -> Result<f64> {
        same_layout(&self.layout, &other.layout)?;
        Ok(linalg::trace_norm(&(&self.matrix - &other.matrix)))
    }

    pub fn max_abs_diff(&self, other: &Operator) -> Result<f64> {
        same_layout(&self.layout, &other.layout)?;
        Ok(linalg::max_abs_diff(&self.matrix, &other.matrix))
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::eigvalsh(&self.matrix)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }
}

pub(crate) fn same_layout(a: &SystemLayout, b: &SystemLayout) -> Result<()> {
    if a != b {
        return Err(Error::LayoutMismatch(format!("{a} vs {b}")));
    }
    Ok(())
}

fn check_shape(layout: &SystemLayout, m: &CMatrix) -> Result<()> {
    if !m.is_square() || m.nrows() != layout.dim() {
        return Err(Error::DimensionMismatch { expected: layout.dim(), found: m.nrows() });
    }
    Ok(())
}

pub(crate) fn validate_density(m: &CMatrix) -> Result<()> {
    let herm = linalg::hermitian_deviation(m);
    if herm > tol::HERMITIAN {
        return Err(Error::NotDensity(format!("not Hermitian (deviation {herm:.3e})")));
    }
    let tr = linalg::trace(m);
    if (tr - ONE).norm() > tol::TRACE {
        return Err(Error::NotDensity(format!("trace is {:.12}", tr.re)));
    }
    let min = linalg::eigvalsh(m).first().copied().unwrap_or(0.0);
    if min < tol::MIN_EIGENVALUE {
        return Err(Error::NotDensity(format!("negative eigenvalue {min:.3e}")));
    }
    Ok(())
}

fn left_mul_local(layout: &SystemLayout, x: &CMatrix, u: &CMatrix, labels: &[&str]) -> Result<CMatrix> {
    let (sel, rest) = layout.split_offsets(labels)?;
    if u.nrows() != sel.len() || u.ncols() != sel.len() {
        return Err(Error::DimensionMismatch { expected: sel.len(), found: u.nrows() });
    }
    let n = layout.dim();
    let mut out = CMatrix::zeros(n, n);
    for &r in &rest {
        for (a, &sa) in sel.iter().enumerate() {
            for (b, &sb) in sel.iter().enumerate() {
                let w = u[(a, b)];
                if w == ZERO {
                    continue;
                }
                for col in 0..n {
                    out[(sa + r, col)] += w * x[(sb + r, col)];
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layout::{Party, Role};
    use crate::linalg::real;

    fn qubits(labels: &[&str]) -> SystemLayout {
        SystemLayout::new(
            labels
                .iter()
                .enumerate()
                .map(|(i, l)| crate::layout::Part::new(*l, 2, if i % 2 == 0 { Party::A } else { Party::B }, Role::Key))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn identity_tensor_identity() {
        let a = Operator::identity(qubits(&["X"]));
        let l3 = SystemLayout::from_tuples(&[("Y", 3, Party::B, Role::Shield)]).unwrap();
        let b = Operator::identity(l3);
        let ab = a.tensor(&b).unwrap();
        assert_eq!(ab.matrix(), &linalg::identity(6));
    }

    #[test]
    fn tensor_label_clash() {
        let a = Operator::identity(qubits(&["X"]));
        assert_eq!(a.tensor(&a).unwrap_err(), Error::LabelClash("X".into()));
    }

    #[test]
    fn full_trace_is_scalar() {
        let l = qubits(&["X", "Y"]);
        let m = CMatrix::from_fn(4, 4, |i, j| real((i * 4 + j) as f64));
        let op = Operator::new(l, m.clone()).unwrap();
        let t = op.partial_trace(&["X", "Y"]).unwrap();
        assert_eq!(t.dim(), 1);
        assert_eq!(t.matrix()[(0, 0)], linalg::trace(&m));
    }

    #[test]
    fn unknown_label_errors() {
        let op = Operator::identity(qubits(&["X"]));
        assert_eq!(op.partial_trace(&["Q"]).unwrap_err(), Error::UnknownLabel("Q".into()));
        assert_eq!(op.partial_transpose(&["Q"]).unwrap_err(), Error::UnknownLabel("Q".into()));
    }

    #[test]
    fn reorder_roundtrip() {
        let l = SystemLayout::from_tuples(&[("X", 2, Party::A, Role::Key), ("Y", 3, Party::B, Role::Key)]).unwrap();
        let m = CMatrix::from_fn(6, 6, |i, j| linalg::c(i as f64, j as f64));
        let op = Operator::new(l, m).unwrap();
        let back = op.reorder(&["Y", "X"]).unwrap().reorder(&["X", "Y"]).unwrap();
        assert_eq!(back, op);
    }

    #[test]
    fn conjugate_local_matches_embedding() {
        let l = qubits(&["X", "Y"]);
        let m = CMatrix::from_fn(4, 4, |i, j| linalg::c((i + 2 * j) as f64, (i as f64) - (j as f64)));
        let op = Operator::new(l.clone(), m.clone()).unwrap();
        let u = CMatrix::from_row_slice(2, 2, &[real(0.0), real(1.0), linalg::c(0.0, 1.0), real(0.0)]);
        let got = op.conjugate_local(&u, &["Y"]).unwrap();
        let full = Operator::embed_local(&l, &u, &["Y"]).unwrap();
        let want = &full * m * full.adjoint();
        assert!(linalg::max_abs_diff(got.matrix(), &want) < 1e-12);
    }
}
