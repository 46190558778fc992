//! Divergences between symmetric positive-definite matrices.
//!
//! Matrix functions go through a symmetric eigendecomposition; eigenvalues at
//! or below [`PD_FLOOR`] are rejected rather than clamped.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric;

pub const PD_FLOOR: f64 = 1e-10;
const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixKind {
    /// `trace(A²) + trace(B²) − 2 trace(BA)`, generated by `f(x) = x²`
    Classical,
    /// `trace[A (log A − log B)]`, generated by `f(x) = x log x`
    Umegaki,
    /// `‖√A − √B‖²` in Hilbert–Schmidt norm, associated with `f(x) = (√x − 1)²`
    Quantum,
}

impl MatrixKind {
    fn f(self, t: f64) -> f64 {
        match self {
            MatrixKind::Classical => t * t,
            MatrixKind::Umegaki => t * t.ln(),
            MatrixKind::Quantum => (t.sqrt() - 1.0).powi(2),
        }
    }

    fn df(self, t: f64) -> f64 {
        match self {
            MatrixKind::Classical => 2.0 * t,
            MatrixKind::Umegaki => t.ln() + 1.0,
            MatrixKind::Quantum => 1.0 - 1.0 / t.sqrt(),
        }
    }
}

/// A symmetric matrix with every eigenvalue above [`PD_FLOOR`], stored with
/// its eigendecomposition.
#[derive(Debug, Clone)]
pub struct PdMatrix {
    entries: DMatrix<f64>,
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<f64>,
}

impl PdMatrix {
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        if !entries.is_square() || entries.nrows() == 0 {
            return Err(Error::InvalidArgument("matrix must be square and nonempty".into()));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
        }
        let scale = entries.amax().max(1.0);
        let asym = (&entries - entries.transpose()).amax();
        if asym > SYMMETRY_TOL * scale {
            return Err(Error::NotSymmetric(asym));
        }
        let sym = (&entries + entries.transpose()) * 0.5;
        let eig = SymmetricEigen::new(sym.clone());
        let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        if min <= PD_FLOOR {
            return Err(Error::NotPositiveDefinite { min_eigenvalue: min, floor: PD_FLOOR });
        }
        Ok(Self {
            entries: sym,
            eigenvalues: eig.eigenvalues.iter().copied().collect(),
            eigenvectors: eig.eigenvectors,
        })
    }

    /// Row-major construction.
    pub fn from_rows(dim: usize, data: &[f64]) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, got: data.len() });
        }
        Self::new(DMatrix::from_row_slice(dim, dim, data))
    }

    pub fn diagonal(diag: &[f64]) -> Result<Self> {
        let n = diag.len();
        Self::new(DMatrix::from_fn(n, n, |i, j| if i == j { diag[i] } else { 0.0 }))
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// `V diag(h(λ)) Vᵀ`
    pub fn apply_fn(&self, h: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let v = &self.eigenvectors;
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            self.eigenvalues.len(),
            self.eigenvalues.iter().map(|&l| h(l)),
        ));
        v * d * v.transpose()
    }
}

fn trace_of_product(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    // trace(AB) = Σ_ij A_ij B_ji
    let n = a.nrows();
    numeric::sum((0..n).flat_map(|i| (0..n).map(move |j| a[(i, j)] * b[(j, i)])))
}

fn frobenius_sq(m: &DMatrix<f64>) -> f64 {
    numeric::sum(m.iter().map(|v| v * v))
}

fn same_dim(a: &PdMatrix, b: &PdMatrix) -> Result<()> {
    if a.dim() == b.dim() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected: a.dim(), got: b.dim() })
    }
}

/// The closed-form matrix divergences.
pub fn matrix_divergence(kind: MatrixKind, a: &PdMatrix, b: &PdMatrix) -> Result<f64> {
    same_dim(a, b)?;
    let value = match kind {
        MatrixKind::Classical => frobenius_sq(&(a.entries() - b.entries())),
        MatrixKind::Umegaki => {
            let a_log_a = numeric::sum(a.eigenvalues().iter().map(|&l| l * l.ln()));
            let log_b = b.apply_fn(f64::ln);
            a_log_a - trace_of_product(a.entries(), &log_b)
        }
        MatrixKind::Quantum => {
            let diff = a.apply_fn(f64::sqrt) - b.apply_fn(f64::sqrt);
            frobenius_sq(&diff)
        }
    };
    Ok(value)
}

/// Bregman distance of the trace function `g(A) = trace f(A)`:
/// `trace f(A) − trace f(B) − trace[(A − B) f′(B)]`.
///
/// Agrees with [`matrix_divergence`] for the classical kind always, and for
/// the Umegaki kind whenever `trace A = trace B`.
pub fn matrix_bregman_distance(kind: MatrixKind, a: &PdMatrix, b: &PdMatrix) -> Result<f64> {
    same_dim(a, b)?;
    let ga = numeric::sum(a.eigenvalues().iter().map(|&l| kind.f(l)));
    let gb = numeric::sum(b.eigenvalues().iter().map(|&l| kind.f(l)));
    let dfb = b.apply_fn(|l| kind.df(l));
    let diff = a.entries() - b.entries();
    Ok(ga - gb - trace_of_product(&diff, &dfb))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classical_diag_example() {
        let a = PdMatrix::diagonal(&[2.0, 1.0]).unwrap();
        let b = PdMatrix::diagonal(&[1.0, 1.0]).unwrap();
        assert!((matrix_divergence(MatrixKind::Classical, &a, &b).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn umegaki_self_is_zero() {
        let a = PdMatrix::from_rows(2, &[2.0, 0.5, 0.5, 1.0]).unwrap();
        assert!(matrix_divergence(MatrixKind::Umegaki, &a, &a).unwrap().abs() < 1e-14);
    }

    #[test]
    fn quantum_scalar_example() {
        let a = PdMatrix::diagonal(&[4.0]).unwrap();
        let b = PdMatrix::diagonal(&[1.0]).unwrap();
        assert!((matrix_divergence(MatrixKind::Quantum, &a, &b).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_non_pd_and_asymmetric() {
        assert!(matches!(PdMatrix::diagonal(&[1.0, 0.0]), Err(Error::NotPositiveDefinite { .. })));
        assert!(matches!(PdMatrix::diagonal(&[1.0, 1e-11]), Err(Error::NotPositiveDefinite { .. })));
        assert!(matches!(PdMatrix::from_rows(2, &[1.0, 0.5, 0.0, 1.0]), Err(Error::NotSymmetric(_))));
        let a = PdMatrix::diagonal(&[1.0]).unwrap();
        let b = PdMatrix::diagonal(&[1.0, 1.0]).unwrap();
        assert!(matches!(matrix_divergence(MatrixKind::Classical, &a, &b), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn classical_trace_formula_on_full_matrices() {
        let a = PdMatrix::from_rows(2, &[2.0, 0.3, 0.3, 1.0]).unwrap();
        let b = PdMatrix::from_rows(2, &[1.5, -0.2, -0.2, 0.7]).unwrap();
        let ea = a.entries();
        let eb = b.entries();
        let literal = (ea * ea).trace() + (eb * eb).trace() - 2.0 * (eb * ea).trace();
        let d = matrix_divergence(MatrixKind::Classical, &a, &b).unwrap();
        assert!((d - literal).abs() < 1e-12);
        let breg = matrix_bregman_distance(MatrixKind::Classical, &a, &b).unwrap();
        assert!((d - breg).abs() < 1e-12);
    }

    #[test]
    fn umegaki_matches_bregman_form_on_equal_trace() {
        let a = PdMatrix::from_rows(2, &[0.6, 0.1, 0.1, 0.4]).unwrap();
        let b = PdMatrix::from_rows(2, &[0.3, -0.05, -0.05, 0.7]).unwrap();
        let d = matrix_divergence(MatrixKind::Umegaki, &a, &b).unwrap();
        let breg = matrix_bregman_distance(MatrixKind::Umegaki, &a, &b).unwrap();
        assert!(d > 0.0);
        assert!((d - breg).abs() < 1e-12, "{d} vs {breg}");
    }
}
