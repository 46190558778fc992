//! Actions of `ℕᵏ` on a convex set through commuting generator maps.
//!
//! The element `s = (s₁, …, s_k)` acts as `T_s = T₁^{s₁} ∘ … ∘ T_k^{s_k}`, so
//! `T_{s+t} = T_s ∘ T_t` by commutativity. Generators with a declared finite
//! order have their exponents reduced modulo that order, which realizes the
//! cyclic quotients (e.g. a quarter-turn rotation of order 4).

use std::sync::atomic::{AtomicU64, Ordering};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::numeric;
use crate::semigroup::{IndexBox, SemigroupElement};
use crate::sets::ConvexSet;

/// Tolerance for treating a computed point as a member of the set.
pub const MEMBERSHIP_TOL: f64 = 1e-9;
/// Points farther than this from the set are a modeling error, not drift.
pub const DRIFT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorMap {
    Identity,
    /// `x ↦ A x + b`
    Affine {
        matrix: Vec<Vec<f64>>,
        #[serde(default)]
        offset: Option<Vec<f64>>,
        #[serde(default)]
        order: Option<u64>,
    },
    /// Rotation by `angle` in the coordinate plane `plane` (default `(0, 1)`) about `center`.
    Rotation {
        angle: f64,
        #[serde(default)]
        order: Option<u64>,
        #[serde(default)]
        plane: Option<(usize, usize)>,
        #[serde(default)]
        center: Option<Vec<f64>>,
    },
    /// `x ↦ center + factor (x − center)`
    Scaling {
        factor: f64,
        #[serde(default)]
        center: Option<Vec<f64>>,
    },
    /// Applies `maps` in list order.
    Composed {
        maps: Vec<GeneratorMap>,
    },
}

impl GeneratorMap {
    pub fn rotation(angle: f64) -> Self {
        GeneratorMap::Rotation { angle, order: None, plane: None, center: None }
    }

    pub fn rotation_of_order(order: u64) -> Self {
        GeneratorMap::Rotation {
            angle: std::f64::consts::TAU / order as f64,
            order: Some(order),
            plane: None,
            center: None,
        }
    }

    pub fn scaling(factor: f64) -> Self {
        GeneratorMap::Scaling { factor, center: None }
    }

    pub fn affine(matrix: Vec<Vec<f64>>, offset: Vec<f64>) -> Self {
        GeneratorMap::Affine { matrix, offset: Some(offset), order: None }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            GeneratorMap::Identity => "identity",
            GeneratorMap::Affine { .. } => "affine",
            GeneratorMap::Rotation { .. } => "rotation",
            GeneratorMap::Scaling { .. } => "scaling",
            GeneratorMap::Composed { .. } => "composed",
        }
    }

    /// Declared finite order, if any (`T^order = id`).
    pub fn order(&self) -> Option<u64> {
        match self {
            GeneratorMap::Identity => Some(1),
            GeneratorMap::Affine { order, .. } | GeneratorMap::Rotation { order, .. } => *order,
            _ => None,
        }
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        match self {
            GeneratorMap::Identity => x.to_vec(),
            GeneratorMap::Affine { matrix, offset, .. } => {
                let mut y: Vec<f64> = matrix.iter().map(|row| numeric::dot(row, x)).collect();
                if let Some(b) = offset {
                    y.iter_mut().zip(b).for_each(|(v, bi)| *v += bi);
                }
                y
            }
            GeneratorMap::Rotation { angle, plane, center, .. } => {
                let (i, j) = plane.unwrap_or((0, 1));
                let (s, c) = angle.sin_cos();
                let mut y = x.to_vec();
                let (ci, cj) = center.as_ref().map_or((0.0, 0.0), |c| (c[i], c[j]));
                let (u, v) = (x[i] - ci, x[j] - cj);
                y[i] = ci + (c * u - s * v);
                y[j] = cj + (s * u + c * v);
                y
            }
            GeneratorMap::Scaling { factor, center } => match center {
                None => x.iter().map(|v| factor * v).collect(),
                Some(c) => x.iter().zip(c).map(|(v, ci)| ci + factor * (v - ci)).collect(),
            },
            GeneratorMap::Composed { maps } => maps.iter().fold(x.to_vec(), |acc, m| m.eval(&acc)),
        }
    }

    /// Structural problems for a map acting on `dim`-dimensional points.
    pub fn validate(&self, dim: usize, path: &str) -> Vec<String> {
        let mut problems = Vec::new();
        match self {
            GeneratorMap::Identity => {}
            GeneratorMap::Affine { matrix, offset, order } => {
                if matrix.len() != dim || matrix.iter().any(|r| r.len() != dim) {
                    problems.push(format!("{path}.matrix: must be {dim}x{dim}"));
                }
                if let Some(b) = offset {
                    if b.len() != dim {
                        problems.push(format!("{path}.offset: length {} differs from dimension {dim}", b.len()));
                    }
                }
                if *order == Some(0) {
                    problems.push(format!("{path}.order: must be positive"));
                }
            }
            GeneratorMap::Rotation { angle, order, plane, center } => {
                let (i, j) = plane.unwrap_or((0, 1));
                if dim < 2 || i >= dim || j >= dim || i == j {
                    problems.push(format!("{path}.plane: invalid rotation plane ({i},{j}) in dimension {dim}"));
                }
                if !angle.is_finite() {
                    problems.push(format!("{path}.angle: must be finite"));
                }
                if let Some(c) = center {
                    if c.len() != dim {
                        problems.push(format!("{path}.center: length {} differs from dimension {dim}", c.len()));
                    }
                }
                match order {
                    Some(0) => problems.push(format!("{path}.order: must be positive")),
                    Some(m) => {
                        let turns = angle * *m as f64 / std::f64::consts::TAU;
                        if (turns - turns.round()).abs() > 1e-9 {
                            problems
                                .push(format!("{path}.order: angle {angle} times {m} is not a whole number of turns"));
                        }
                    }
                    None => {}
                }
            }
            GeneratorMap::Scaling { factor, center } => {
                if !factor.is_finite() {
                    problems.push(format!("{path}.factor: must be finite"));
                }
                if let Some(c) = center {
                    if c.len() != dim {
                        problems.push(format!("{path}.center: length {} differs from dimension {dim}", c.len()));
                    }
                }
            }
            GeneratorMap::Composed { maps } => {
                if maps.is_empty() {
                    problems.push(format!("{path}.maps: composition needs at least one map"));
                }
                for (k, m) in maps.iter().enumerate() {
                    problems.extend(m.validate(dim, &format!("{path}.maps[{k}]")));
                }
            }
        }
        problems
    }
}

/// A finitely generated commutative action on a convex set with a base point.
#[derive(Debug)]
pub struct ActionSpec {
    generators: Vec<GeneratorMap>,
    set: ConvexSet,
    base_point: Vec<f64>,
    drift: AtomicU64,
}

impl Clone for ActionSpec {
    fn clone(&self) -> Self {
        Self {
            generators: self.generators.clone(),
            set: self.set.clone(),
            base_point: self.base_point.clone(),
            drift: AtomicU64::new(0),
        }
    }
}

impl ActionSpec {
    pub fn new(generators: Vec<GeneratorMap>, set: ConvexSet, base_point: Vec<f64>) -> Result<Self> {
        let dim = set.dimension();
        check_dim(dim, base_point.len())?;
        if generators.is_empty() {
            return Err(Error::InvalidArgument("an action needs at least one generator".into()));
        }
        let problems: Vec<String> =
            generators.iter().enumerate().flat_map(|(i, g)| g.validate(dim, &format!("generators[{i}]"))).collect();
        if !problems.is_empty() {
            return Err(Error::InvalidArgument(problems.join("; ")));
        }
        Ok(Self { generators, set, base_point, drift: AtomicU64::new(0) })
    }

    pub fn generators(&self) -> &[GeneratorMap] {
        &self.generators
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    pub fn dimension(&self) -> usize {
        self.base_point.len()
    }

    pub fn set(&self) -> &ConvexSet {
        &self.set
    }

    pub fn base_point(&self) -> &[f64] {
        &self.base_point
    }

    pub fn with_base_point(&self, base_point: Vec<f64>) -> Result<Self> {
        Self::new(self.generators.clone(), self.set.clone(), base_point)
    }

    /// Number of drift re-projections performed so far.
    pub fn drift_count(&self) -> u64 {
        self.drift.load(Ordering::Relaxed)
    }

    fn reduced_exponent(&self, i: usize, e: u64) -> u64 {
        match self.generators[i].order() {
            Some(m) if m > 0 => e % m,
            _ => e,
        }
    }

    fn settle(&self, y: Vec<f64>) -> Result<Vec<f64>> {
        if self.set.contains(&y, MEMBERSHIP_TOL) {
            return Ok(y);
        }
        let p = self.set.euclid_project(&y)?;
        let d = numeric::dist(&p, &y);
        if d <= DRIFT_TOL {
            let n = self.drift.fetch_add(1, Ordering::Relaxed) + 1;
            log::warn!(target: "bregman_lab::drift", "re-projected drifted point (distance {d:e}, count {n})");
            Ok(p)
        } else {
            Err(Error::LeftSet { distance: d })
        }
    }

    /// One application of generator `i`, with drift re-projection.
    pub fn step(&self, i: usize, x: &[f64]) -> Result<Vec<f64>> {
        self.settle(self.generators[i].eval(x))
    }

    /// `T_s x`, checking set membership after every generator application.
    pub fn apply(&self, s: &SemigroupElement, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.rank(), s.rank())?;
        check_dim(self.dimension(), x.len())?;
        let mut p = x.to_vec();
        for i in (0..self.rank()).rev() {
            for _ in 0..self.reduced_exponent(i, s.0[i]) {
                p = self.step(i, &p)?;
            }
        }
        Ok(p)
    }

    /// `T_s x` by plain composition, with no membership checks.
    pub fn apply_raw(&self, s: &SemigroupElement, x: &[f64]) -> Vec<f64> {
        let mut p = x.to_vec();
        for i in (0..self.rank()).rev() {
            for _ in 0..self.reduced_exponent(i, s.0[i]) {
                p = self.generators[i].eval(&p);
            }
        }
        p
    }

    /// The orbit of `x` over an index box, memoized along the enumeration.
    ///
    /// Every stored point equals `apply(s, x)` bitwise.
    pub fn orbit_of(&self, x: &[f64], bx: &IndexBox) -> Result<Orbit> {
        check_dim(self.rank(), bx.rank())?;
        check_dim(self.dimension(), x.len())?;
        if bx.is_empty() {
            return Err(Error::EmptySet);
        }
        let dim = self.dimension();
        let mut data = vec![0.0; bx.len() * dim];
        let mut idx = vec![0u64; self.rank()];
        self.fill(self.rank(), x.to_vec(), bx, &mut idx, &mut data)?;
        Ok(Orbit { bx: bx.clone(), dim, data })
    }

    pub fn orbit(&self, bx: &IndexBox) -> Result<Orbit> {
        self.orbit_of(&self.base_point, bx)
    }

    fn fill(&self, level: usize, p: Vec<f64>, bx: &IndexBox, idx: &mut [u64], out: &mut [f64]) -> Result<()> {
        let dim = self.dimension();
        if level == 0 {
            let side = bx.side as usize;
            let pos = idx.iter().fold(0usize, |acc, &e| acc * side + e as usize);
            out[pos * dim..(pos + 1) * dim].copy_from_slice(&p);
            return Ok(());
        }
        let i = level - 1;
        let offset = bx.offset.0[i];
        match self.generators[i].order() {
            Some(m) if m > 0 => {
                let mut cycle = Vec::with_capacity(m as usize);
                cycle.push(p);
                for _ in 1..m {
                    let next = self.step(i, cycle.last().expect("nonempty"))?;
                    cycle.push(next);
                }
                for j in 0..bx.side {
                    idx[i] = j;
                    let q = cycle[((offset + j) % m) as usize].clone();
                    self.fill(i, q, bx, idx, out)?;
                }
            }
            _ => {
                let mut q = p;
                for _ in 0..offset {
                    q = self.step(i, &q)?;
                }
                for j in 0..bx.side {
                    idx[i] = j;
                    if j > 0 {
                        q = self.step(i, &q)?;
                    }
                    self.fill(i, q.clone(), bx, idx, out)?;
                }
            }
        }
        Ok(())
    }

    /// `max ‖T_s c‖` over the box.
    pub fn orbit_bound(&self, bx: &IndexBox) -> Result<f64> {
        Ok(self.orbit(bx)?.points().map(numeric::norm).fold(0.0, f64::max))
    }

    /// Largest `‖T_i T_j x − T_j T_i x‖` over sampled `x ∈ C` and generator pairs.
    pub fn commutation_defect(&self, samples: usize, seed: u64) -> Result<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = self.rank();
        let mut worst = 0.0_f64;
        for _ in 0..samples {
            let x = self.set.sample(&mut rng)?;
            for i in 0..k {
                for j in (i + 1)..k {
                    let a = self.generators[i].eval(&self.generators[j].eval(&x));
                    let b = self.generators[j].eval(&self.generators[i].eval(&x));
                    worst = worst.max(numeric::dist(&a, &b));
                }
            }
        }
        Ok(worst)
    }

    /// Largest distance from `T_i x` to `C` over sampled `x ∈ C`.
    pub fn invariance_defect(&self, samples: usize, seed: u64) -> Result<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = 0.0_f64;
        for _ in 0..samples {
            let x = self.set.sample(&mut rng)?;
            for g in &self.generators {
                let y = g.eval(&x);
                worst = worst.max(numeric::dist(&self.set.euclid_project(&y)?, &y));
            }
        }
        Ok(worst)
    }
}

/// Points `T_s x` for every `s` in an index box, stored contiguously.
#[derive(Debug, Clone)]
pub struct Orbit {
    bx: IndexBox,
    dim: usize,
    data: Vec<f64>,
}

impl Orbit {
    pub fn index_box(&self) -> &IndexBox {
        &self.bx
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.bx.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn at(&self, position: usize) -> &[f64] {
        &self.data[position * self.dim..(position + 1) * self.dim]
    }

    pub fn get(&self, s: &SemigroupElement) -> Option<&[f64]> {
        self.bx.position(s).map(|p| self.at(p))
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dim)
    }

    pub fn raw(&self) -> &[f64] {
        &self.data
    }
}
