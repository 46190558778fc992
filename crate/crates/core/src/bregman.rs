//! Bregman generators and the distances they induce.
//!
//! A generator is a strictly convex, differentiable function `g` on an open
//! domain `U ⊂ Rⁿ`. Its Bregman distance is
//!
//! ```text
//! D_g(x, y) = g(x) − g(y) − ⟨x − y, ∇g(y)⟩
//! ```
//!
//! which is nonnegative, vanishes only on the diagonal, and is in general
//! neither symmetric nor a metric. The built-in generators are all separable,
//! `g(x) = Σ f(xᵢ)`, which is also how the matrix divergences act on diagonal
//! matrices.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::matrix::MatrixKind;
use crate::numeric::{self, CompensatedSum};

/// Coordinates below this value are outside the domain of entropy-type generators.
pub const DOMAIN_FLOOR: f64 = 1e-12;

/// A strictly convex differentiable function with a gradient oracle.
pub trait BregmanGenerator: Send + Sync {
    fn name(&self) -> &str;

    fn dimension(&self) -> usize;

    fn domain_contains(&self, x: &[f64]) -> bool;

    /// `g(x)`; callers guarantee `x` is in the domain.
    fn evaluate(&self, x: &[f64]) -> f64;

    /// `∇g(x)`; callers guarantee `x` is in the domain.
    fn gradient(&self, x: &[f64]) -> Vec<f64>;

    /// Bound on `‖∇g‖` over the ball of the given radius about the origin, when one exists.
    fn lipschitz_bound(&self, _radius: f64) -> Option<f64> {
        None
    }

    fn strongly_coercive(&self) -> bool;

    fn locally_bounded(&self) -> bool;

    /// Whether `D_g(x, y) = D_g(y, x)` identically.
    fn symmetric_distance(&self) -> bool {
        false
    }

    /// Bregman projections exist and are unique for these generators.
    fn projection_capable(&self) -> bool {
        self.strongly_coercive() && self.locally_bounded()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    /// `‖x‖²`
    SqNorm,
    /// `Σ xᵢ log xᵢ` on the open orthant
    NegEntropy,
    /// diagonal embedding of `trace(A²)`
    MatClassical,
    /// diagonal embedding of `trace(A log A)`
    MatUmegaki,
    /// diagonal embedding of `trace((√A − I)²)`
    MatQuantum,
}

impl GeneratorKind {
    pub const ALL: [GeneratorKind; 5] = [
        GeneratorKind::SqNorm,
        GeneratorKind::NegEntropy,
        GeneratorKind::MatClassical,
        GeneratorKind::MatUmegaki,
        GeneratorKind::MatQuantum,
    ];

    pub fn identifier(self) -> &'static str {
        match self {
            GeneratorKind::SqNorm => "sq_norm",
            GeneratorKind::NegEntropy => "neg_entropy",
            GeneratorKind::MatClassical => "mat_classical",
            GeneratorKind::MatUmegaki => "mat_umegaki",
            GeneratorKind::MatQuantum => "mat_quantum",
        }
    }

    pub fn from_identifier(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.identifier() == name)
    }

    /// Matrix divergence this generator realizes on diagonal matrices.
    pub fn matrix_kind(self) -> Option<MatrixKind> {
        match self {
            GeneratorKind::MatClassical => Some(MatrixKind::Classical),
            GeneratorKind::MatUmegaki => Some(MatrixKind::Umegaki),
            GeneratorKind::MatQuantum => Some(MatrixKind::Quantum),
            _ => None,
        }
    }
}

/// One of the built-in separable generators at a fixed dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    kind: GeneratorKind,
    dim: usize,
}

impl Generator {
    pub fn new(kind: GeneratorKind, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("generator dimension must be positive".into()));
        }
        Ok(Self { kind, dim })
    }

    pub fn from_name(name: &str, dim: usize) -> Result<Self> {
        let kind = GeneratorKind::from_identifier(name)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown generator `{name}`")))?;
        Self::new(kind, dim)
    }

    pub fn sq_norm(dim: usize) -> Self {
        Self { kind: GeneratorKind::SqNorm, dim: dim.max(1) }
    }

    pub fn neg_entropy(dim: usize) -> Self {
        Self { kind: GeneratorKind::NegEntropy, dim: dim.max(1) }
    }

    pub fn kind(&self) -> GeneratorKind {
        self.kind
    }

    fn scalar(&self, t: f64) -> f64 {
        match self.kind {
            GeneratorKind::SqNorm | GeneratorKind::MatClassical => t * t,
            GeneratorKind::NegEntropy | GeneratorKind::MatUmegaki => t * t.ln(),
            GeneratorKind::MatQuantum => {
                let r = t.sqrt() - 1.0;
                r * r
            }
        }
    }

    fn scalar_derivative(&self, t: f64) -> f64 {
        match self.kind {
            GeneratorKind::SqNorm | GeneratorKind::MatClassical => 2.0 * t,
            GeneratorKind::NegEntropy | GeneratorKind::MatUmegaki => t.ln() + 1.0,
            GeneratorKind::MatQuantum => 1.0 - 1.0 / t.sqrt(),
        }
    }

    fn coordinate_floor(&self) -> Option<f64> {
        match self.kind {
            GeneratorKind::SqNorm => None,
            GeneratorKind::NegEntropy => Some(DOMAIN_FLOOR),
            GeneratorKind::MatClassical | GeneratorKind::MatUmegaki | GeneratorKind::MatQuantum => {
                Some(crate::matrix::PD_FLOOR)
            }
        }
    }
}

impl BregmanGenerator for Generator {
    fn name(&self) -> &str {
        self.kind.identifier()
    }

    fn dimension(&self) -> usize {
        self.dim
    }

    fn domain_contains(&self, x: &[f64]) -> bool {
        if x.len() != self.dim || x.iter().any(|v| !v.is_finite()) {
            return false;
        }
        match self.coordinate_floor() {
            None => true,
            Some(floor) => x.iter().all(|&v| v >= floor),
        }
    }

    fn evaluate(&self, x: &[f64]) -> f64 {
        numeric::sum(x.iter().map(|&t| self.scalar(t)))
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        x.iter().map(|&t| self.scalar_derivative(t)).collect()
    }

    fn lipschitz_bound(&self, radius: f64) -> Option<f64> {
        match self.kind {
            GeneratorKind::SqNorm => Some(2.0 * radius),
            _ => None,
        }
    }

    fn strongly_coercive(&self) -> bool {
        // (√t − 1)² grows only linearly.
        !matches!(self.kind, GeneratorKind::MatQuantum)
    }

    fn locally_bounded(&self) -> bool {
        true
    }

    fn symmetric_distance(&self) -> bool {
        matches!(self.kind, GeneratorKind::SqNorm | GeneratorKind::MatClassical)
    }
}

/// Dimension, finiteness and domain check for a single point.
pub fn check_point<G: BregmanGenerator + ?Sized>(g: &G, x: &[f64]) -> Result<()> {
    check_dim(g.dimension(), x.len())?;
    if g.domain_contains(x) {
        Ok(())
    } else {
        Err(Error::Domain { generator: g.name().to_string(), point: x.to_vec() })
    }
}

/// `D_g(x, y)`, accumulated in a single compensated sum.
///
/// The raw value is returned, so rounding can leave it a few ulps below zero.
pub fn bregman_distance<G: BregmanGenerator + ?Sized>(g: &G, x: &[f64], y: &[f64]) -> Result<f64> {
    check_point(g, x)?;
    check_point(g, y)?;
    Ok(distance_unchecked(g, x, y))
}

pub(crate) fn distance_unchecked<G: BregmanGenerator + ?Sized>(g: &G, x: &[f64], y: &[f64]) -> f64 {
    let grad_y = g.gradient(y);
    distance_with_gradient(g, x, y, &grad_y)
}

/// `D_g(x, y)` with `∇g(y)` supplied by the caller.
pub(crate) fn distance_with_gradient<G: BregmanGenerator + ?Sized>(g: &G, x: &[f64], y: &[f64], grad_y: &[f64]) -> f64 {
    let mut acc = CompensatedSum::new();
    acc.add(g.evaluate(x));
    acc.add(-g.evaluate(y));
    for ((xi, yi), gi) in x.iter().zip(y).zip(grad_y) {
        acc.add(-(xi - yi) * gi);
    }
    acc.value()
}

/// Residual of the three-point identity
/// `D(x,z) = D(x,y) + D(y,z) + ⟨x − y, ∇g(y) − ∇g(z)⟩`.
pub fn three_point_residual<G: BregmanGenerator + ?Sized>(g: &G, x: &[f64], y: &[f64], z: &[f64]) -> Result<f64> {
    Ok(three_point_terms(g, x, y, z)?.residual())
}

/// The four terms of the three-point identity, for callers that need a scale.
#[derive(Debug, Clone, Copy)]
pub struct ThreePointTerms {
    pub d_xz: f64,
    pub d_xy: f64,
    pub d_yz: f64,
    pub cross: f64,
}

impl ThreePointTerms {
    pub fn residual(&self) -> f64 {
        let mut acc = CompensatedSum::new();
        acc.add(self.d_xz);
        acc.add(-self.d_xy);
        acc.add(-self.d_yz);
        acc.add(-self.cross);
        acc.value()
    }

    pub fn scale(&self) -> f64 {
        self.d_xz.abs().max(self.d_xy.abs()).max(self.d_yz.abs()).max(self.cross.abs())
    }
}

pub fn three_point_terms<G: BregmanGenerator + ?Sized>(
    g: &G,
    x: &[f64],
    y: &[f64],
    z: &[f64],
) -> Result<ThreePointTerms> {
    check_point(g, x)?;
    check_point(g, y)?;
    check_point(g, z)?;
    let gy = g.gradient(y);
    let gz = g.gradient(z);
    let cross = numeric::sum(x.iter().zip(y).zip(gy.iter().zip(&gz)).map(|((xi, yi), (a, b))| (xi - yi) * (a - b)));
    Ok(ThreePointTerms {
        d_xz: distance_with_gradient(g, x, z, &gz),
        d_xy: distance_with_gradient(g, x, y, &gy),
        d_yz: distance_with_gradient(g, y, z, &gz),
        cross,
    })
}

/// Largest deviation between central finite differences of `g` and its gradient.
pub fn gradient_check<G: BregmanGenerator + ?Sized>(g: &G, x: &[f64], step: f64) -> Result<f64> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidArgument(format!("step must be positive, got {step}")));
    }
    check_point(g, x)?;
    let grad = g.gradient(x);
    let mut worst = 0.0_f64;
    let mut probe = x.to_vec();
    for i in 0..x.len() {
        probe[i] = x[i] + step;
        check_point(g, &probe)?;
        let fwd = g.evaluate(&probe);
        probe[i] = x[i] - step;
        check_point(g, &probe)?;
        let bwd = g.evaluate(&probe);
        probe[i] = x[i];
        let fd = (fwd - bwd) / (2.0 * step);
        worst = worst.max((fd - grad[i]).abs());
    }
    Ok(worst)
}

/// `(D_g(x, y), D_g(y, x))`.
pub fn asymmetry_witness<G: BregmanGenerator + ?Sized>(g: &G, x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    Ok((bregman_distance(g, x, y)?, bregman_distance(g, y, x)?))
}

/// Sampled strict-convexity check: largest `g(tx+(1−t)y) − (t g(x) + (1−t) g(y))`
/// over the supplied pairs, evaluated at `t = 1/2`. Negative means strictly convex there.
pub fn convexity_gap<G: BregmanGenerator + ?Sized>(g: &G, pairs: &[(Vec<f64>, Vec<f64>)]) -> Result<f64> {
    let mut worst = f64::NEG_INFINITY;
    for (x, y) in pairs {
        check_point(g, x)?;
        check_point(g, y)?;
        let m = numeric::midpoint(x, y);
        let gap = g.evaluate(&m) - 0.5 * (g.evaluate(x) + g.evaluate(y));
        worst = worst.max(gap);
    }
    Ok(worst)
}
