//! Convex-set oracles: membership, Euclidean projection, sampling.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::numeric;

pub const DYKSTRA_MAX_SWEEPS: usize = 1000;
const DYKSTRA_TOL: f64 = 1e-13;

/// Default radius of the sampling ball for unbounded sets.
pub const DEFAULT_SAMPLING_RADIUS: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "set", rename_all = "snake_case")]
pub enum ConvexSet {
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    Box {
        lower: Vec<f64>,
        upper: Vec<f64>,
    },
    /// `{x : ⟨normal, x⟩ ≤ offset}`
    Halfspace {
        normal: Vec<f64>,
        offset: f64,
        #[serde(default = "default_sampling_radius")]
        sampling_radius: f64,
    },
    /// `{x : ⟨normalᵢ, x⟩ ≤ offsetᵢ for all i}`
    Halfspaces {
        normals: Vec<Vec<f64>>,
        offsets: Vec<f64>,
        #[serde(default = "default_sampling_radius")]
        sampling_radius: f64,
    },
    /// Probability simplex `{x ≥ 0, Σx = 1}`. A zero dimension is filled in
    /// from the scenario's generator.
    Simplex {
        #[serde(default)]
        dimension: usize,
    },
    /// Sphere `{x : ‖x − center‖ = radius}`. Not convex; diagnostics only.
    Circle {
        center: Vec<f64>,
        radius: f64,
    },
}

fn default_sampling_radius() -> f64 {
    DEFAULT_SAMPLING_RADIUS
}

impl ConvexSet {
    pub fn ball(center: Vec<f64>, radius: f64) -> Self {
        ConvexSet::Ball { center, radius }
    }

    pub fn unit_ball(dim: usize) -> Self {
        ConvexSet::Ball { center: vec![0.0; dim], radius: 1.0 }
    }

    pub fn cube(lower: Vec<f64>, upper: Vec<f64>) -> Self {
        ConvexSet::Box { lower, upper }
    }

    pub fn interval(lo: f64, hi: f64) -> Self {
        ConvexSet::Box { lower: vec![lo], upper: vec![hi] }
    }

    pub fn simplex(dimension: usize) -> Self {
        ConvexSet::Simplex { dimension }
    }

    pub fn halfspaces(normals: Vec<Vec<f64>>, offsets: Vec<f64>) -> Self {
        ConvexSet::Halfspaces { normals, offsets, sampling_radius: DEFAULT_SAMPLING_RADIUS }
    }

    pub fn circle(center: Vec<f64>, radius: f64) -> Self {
        ConvexSet::Circle { center, radius }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ConvexSet::Ball { .. } => "ball",
            ConvexSet::Box { .. } => "box",
            ConvexSet::Halfspace { .. } => "halfspace",
            ConvexSet::Halfspaces { .. } => "halfspaces",
            ConvexSet::Simplex { .. } => "simplex",
            ConvexSet::Circle { .. } => "circle",
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            ConvexSet::Ball { center, .. } | ConvexSet::Circle { center, .. } => center.len(),
            ConvexSet::Box { lower, .. } => lower.len(),
            ConvexSet::Halfspace { normal, .. } => normal.len(),
            ConvexSet::Halfspaces { normals, .. } => normals.first().map_or(0, Vec::len),
            ConvexSet::Simplex { dimension } => *dimension,
        }
    }

    pub fn is_convex(&self) -> bool {
        !matches!(self, ConvexSet::Circle { .. })
    }

    /// Collects every structural problem with the set description.
    pub fn validate(&self) -> Vec<String> {
        let mut problems = Vec::new();
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        match self {
            ConvexSet::Ball { center, radius } | ConvexSet::Circle { center, radius } => {
                if center.is_empty() {
                    problems.push("set.center: must be nonempty".into());
                }
                if !finite(center) {
                    problems.push("set.center: entries must be finite".into());
                }
                if !(*radius > 0.0 && radius.is_finite()) {
                    problems.push(format!("set.radius: must be positive, got {radius}"));
                }
            }
            ConvexSet::Box { lower, upper } => {
                if lower.len() != upper.len() {
                    problems.push(format!("set.lower/set.upper: lengths differ ({} vs {})", lower.len(), upper.len()));
                }
                if lower.iter().zip(upper).any(|(l, u)| !(l <= u)) || !finite(lower) || !finite(upper) {
                    problems.push("set.lower/set.upper: need finite lower ≤ upper".into());
                }
            }
            ConvexSet::Halfspace { normal, offset, sampling_radius } => {
                if numeric::norm(normal) == 0.0 || !finite(normal) || !offset.is_finite() {
                    problems.push("set.normal: must be finite and nonzero".into());
                }
                if !(*sampling_radius > 0.0) {
                    problems.push("set.sampling_radius: must be positive".into());
                }
            }
            ConvexSet::Halfspaces { normals, offsets, sampling_radius } => {
                if normals.is_empty() {
                    problems.push("set.normals: at least one halfspace required".into());
                }
                if normals.len() != offsets.len() {
                    problems.push(format!(
                        "set.normals/set.offsets: counts differ ({} vs {})",
                        normals.len(),
                        offsets.len()
                    ));
                }
                let d = self.dimension();
                for (i, a) in normals.iter().enumerate() {
                    if a.len() != d {
                        problems.push(format!("set.normals[{i}]: dimension {} differs from {d}", a.len()));
                    }
                    if numeric::norm(a) == 0.0 || !finite(a) {
                        problems.push(format!("set.normals[{i}]: must be finite and nonzero"));
                    }
                }
                if !(*sampling_radius > 0.0) {
                    problems.push("set.sampling_radius: must be positive".into());
                }
            }
            ConvexSet::Simplex { dimension } => {
                if *dimension == 0 {
                    problems.push("set.dimension: simplex needs a positive dimension".into());
                }
            }
        }
        problems
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        if x.len() != self.dimension() || x.iter().any(|v| !v.is_finite()) {
            return false;
        }
        match self {
            ConvexSet::Ball { center, radius } => numeric::dist(x, center) <= radius + tol,
            ConvexSet::Box { lower, upper } => {
                x.iter().zip(lower.iter().zip(upper)).all(|(v, (l, u))| *v >= l - tol && *v <= u + tol)
            }
            ConvexSet::Halfspace { normal, offset, .. } => {
                numeric::dot(normal, x) - offset <= tol * numeric::norm(normal)
            }
            ConvexSet::Halfspaces { normals, offsets, .. } => {
                normals.iter().zip(offsets).all(|(a, b)| numeric::dot(a, x) - b <= tol * numeric::norm(a))
            }
            ConvexSet::Simplex { .. } => {
                x.iter().all(|&v| v >= -tol) && (numeric::sum(x.iter().copied()) - 1.0).abs() <= tol
            }
            ConvexSet::Circle { center, radius } => (numeric::dist(x, center) - radius).abs() <= tol,
        }
    }

    /// Nearest point of the set in Euclidean norm.
    pub fn euclid_project(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dimension(), x.len())?;
        Ok(match self {
            ConvexSet::Ball { center, radius } => {
                let d = numeric::dist(x, center);
                if d <= *radius {
                    x.to_vec()
                } else {
                    let k = radius / d;
                    center.iter().zip(x).map(|(c, v)| c + k * (v - c)).collect()
                }
            }
            ConvexSet::Box { lower, upper } => {
                x.iter().zip(lower.iter().zip(upper)).map(|(v, (l, u))| v.clamp(*l, *u)).collect()
            }
            ConvexSet::Halfspace { normal, offset, .. } => project_halfspace(x, normal, *offset),
            ConvexSet::Halfspaces { normals, offsets, .. } => dykstra(normals, offsets, x, DYKSTRA_MAX_SWEEPS).point,
            ConvexSet::Simplex { .. } => project_simplex(x),
            ConvexSet::Circle { center, radius } => {
                let mut dir = numeric::sub(x, center);
                let n = numeric::norm(&dir);
                if n == 0.0 {
                    // every point of the sphere is nearest; pick the first axis
                    dir = vec![0.0; x.len()];
                    dir[0] = 1.0;
                } else {
                    dir.iter_mut().for_each(|v| *v /= n);
                }
                numeric::axpy(center, *radius, &dir)
            }
        })
    }

    /// A point of the set, strictly inside whenever the set has interior.
    pub fn interior_point(&self) -> Vec<f64> {
        match self {
            ConvexSet::Ball { center, .. } => center.clone(),
            ConvexSet::Box { lower, upper } => numeric::midpoint(lower, upper),
            ConvexSet::Simplex { dimension } => vec![1.0 / *dimension as f64; *dimension],
            ConvexSet::Circle { center, radius } => {
                let mut p = center.clone();
                p[0] += radius;
                p
            }
            ConvexSet::Halfspace { .. } | ConvexSet::Halfspaces { .. } => {
                let zero = vec![0.0; self.dimension()];
                self.euclid_project(&zero).unwrap_or(zero)
            }
        }
    }

    /// Radius of a ball about the origin containing the set (or its sampling region).
    pub fn bounding_radius(&self) -> f64 {
        match self {
            ConvexSet::Ball { center, radius } | ConvexSet::Circle { center, radius } => numeric::norm(center) + radius,
            ConvexSet::Box { lower, upper } => {
                numeric::sum(lower.iter().zip(upper).map(|(l, u)| l.abs().max(u.abs()).powi(2))).sqrt()
            }
            ConvexSet::Simplex { .. } => 1.0,
            ConvexSet::Halfspace { sampling_radius, .. } | ConvexSet::Halfspaces { sampling_radius, .. } => {
                numeric::norm(&self.interior_point()) + sampling_radius
            }
        }
    }

    /// Draws one point of the set.
    ///
    /// Ball, box, simplex and sphere are sampled uniformly; halfspace sets are
    /// sampled by projecting uniform points of a ball around an interior point.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<f64>> {
        let n = self.dimension();
        let point = match self {
            ConvexSet::Ball { center, radius } => {
                let dir = unit_direction(rng, n);
                let r = radius * rng.random::<f64>().powf(1.0 / n as f64);
                numeric::axpy(center, r, &dir)
            }
            ConvexSet::Box { lower, upper } => {
                lower.iter().zip(upper).map(|(l, u)| if l == u { *l } else { rng.random_range(*l..=*u) }).collect()
            }
            ConvexSet::Simplex { .. } => {
                let e: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
                let s = numeric::sum(e.iter().copied());
                e.into_iter().map(|v| v / s).collect()
            }
            ConvexSet::Circle { center, radius } => numeric::axpy(center, *radius, &unit_direction(rng, n)),
            ConvexSet::Halfspace { sampling_radius, .. } | ConvexSet::Halfspaces { sampling_radius, .. } => {
                let base = self.interior_point();
                let dir = unit_direction(rng, n);
                let r = sampling_radius * rng.random::<f64>().powf(1.0 / n as f64);
                self.euclid_project(&numeric::axpy(&base, r, &dir))?
            }
        };
        if point.iter().all(|v| v.is_finite()) {
            Ok(point)
        } else {
            Err(Error::SamplerFailure(self.name().to_string()))
        }
    }
}

fn unit_direction<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        let norm = numeric::norm(&v);
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

pub fn project_halfspace(x: &[f64], normal: &[f64], offset: f64) -> Vec<f64> {
    let excess = numeric::dot(normal, x) - offset;
    if excess <= 0.0 {
        x.to_vec()
    } else {
        numeric::axpy(x, -excess / numeric::norm_sq(normal), normal)
    }
}

/// Euclidean projection onto the probability simplex by sorting.
pub fn project_simplex(x: &[f64]) -> Vec<f64> {
    let mut u = x.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (j, &uj) in u.iter().enumerate() {
        cumulative += uj;
        let t = (cumulative - 1.0) / (j + 1) as f64;
        if uj - t > 0.0 {
            theta = t;
        }
    }
    x.iter().map(|v| (v - theta).max(0.0)).collect()
}

#[derive(Debug, Clone)]
pub struct DykstraOutcome {
    pub point: Vec<f64>,
    pub sweeps: usize,
    pub converged: bool,
    /// Largest normalized constraint violation at the returned point.
    pub max_violation: f64,
}

/// Dykstra's alternating projections onto an intersection of halfspaces.
pub fn dykstra(normals: &[Vec<f64>], offsets: &[f64], x: &[f64], max_sweeps: usize) -> DykstraOutcome {
    let violation = |p: &[f64]| {
        normals.iter().zip(offsets).map(|(a, b)| (numeric::dot(a, p) - b) / numeric::norm(a)).fold(0.0_f64, f64::max)
    };
    let v0 = violation(x);
    if v0 <= 0.0 {
        return DykstraOutcome { point: x.to_vec(), sweeps: 0, converged: true, max_violation: v0 };
    }
    let m = normals.len();
    let n = x.len();
    let mut point = x.to_vec();
    let mut corrections = vec![vec![0.0; n]; m];
    let mut sweeps = 0;
    let mut converged = false;
    while sweeps < max_sweeps {
        sweeps += 1;
        let mut change = 0.0_f64;
        for i in 0..m {
            let shifted = numeric::add(&point, &corrections[i]);
            let next = project_halfspace(&shifted, &normals[i], offsets[i]);
            corrections[i] = numeric::sub(&shifted, &next);
            change = change.max(numeric::dist(&next, &point));
            point = next;
        }
        let scale = 1.0 + numeric::norm(&point);
        if change <= DYKSTRA_TOL * scale {
            converged = true;
            break;
        }
    }
    let max_violation = violation(&point);
    DykstraOutcome { point, sweeps, converged, max_violation }
}
