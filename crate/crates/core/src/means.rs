//! Approximate invariant means as uniform averages over Følner boxes, and
//! barycenters of bounded orbits.
//!
//! Every average is accumulated in fixed-size chunks with compensated sums
//! that are merged in chunk order, so results do not depend on the number of
//! worker threads.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::actions::{ActionSpec, Orbit};
use crate::bregman::{check_point, distance_unchecked, distance_with_gradient, BregmanGenerator};
use crate::error::{check_dim, Error, Result};
use crate::numeric::{self, CompensatedSum};
use crate::projection::{bregman_project, ProjectionOptions};
use crate::semigroup::{IndexBox, SemigroupElement};

const CHUNK: usize = 4096;

/// Compensated average of `f(0), …, f(len−1)` with a thread-independent reduction order.
pub fn chunked_mean(len: usize, f: impl Fn(usize) -> f64 + Sync) -> Result<f64> {
    if len == 0 {
        return Err(Error::EmptySet);
    }
    let chunks: Vec<CompensatedSum> = (0..len.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| (c * CHUNK..((c + 1) * CHUNK).min(len)).map(&f).collect())
        .collect();
    let mut total = CompensatedSum::new();
    chunks.iter().for_each(|c| total.merge(c));
    Ok(total.value() / len as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleKind {
    Boxes,
    ShiftedBoxes,
    Custom,
}

/// A growing sequence of index boxes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FolnerSchedule {
    pub kind: ScheduleKind,
    /// Box side lengths, strictly increasing.
    #[serde(default)]
    pub sizes: Vec<u64>,
    /// Offset of every box for `shifted_boxes`.
    #[serde(default)]
    pub shift: Option<Vec<u64>>,
    /// Explicit boxes for `custom`.
    #[serde(default)]
    pub boxes: Vec<IndexBox>,
}

impl FolnerSchedule {
    pub fn boxes(sizes: Vec<u64>) -> Self {
        Self { kind: ScheduleKind::Boxes, sizes, shift: None, boxes: Vec::new() }
    }

    pub fn shifted(sizes: Vec<u64>, shift: Vec<u64>) -> Self {
        Self { kind: ScheduleKind::ShiftedBoxes, sizes, shift: Some(shift), boxes: Vec::new() }
    }

    pub fn validate(&self, rank: usize) -> Vec<String> {
        let mut problems = Vec::new();
        match self.kind {
            ScheduleKind::Boxes | ScheduleKind::ShiftedBoxes => {
                if self.sizes.is_empty() {
                    problems.push("folner.sizes: schedule is empty".to_string());
                }
                if self.sizes.contains(&0) {
                    problems.push("folner.sizes: sizes must be positive".to_string());
                }
                if self.sizes.windows(2).any(|w| w[0] >= w[1]) {
                    problems.push("folner.sizes: sizes must be strictly increasing".to_string());
                }
                match (&self.shift, self.kind) {
                    (Some(s), _) if s.len() != rank => problems
                        .push(format!("folner.shift: length {} differs from the number of generators {rank}", s.len())),
                    (None, ScheduleKind::ShiftedBoxes) => {
                        problems.push("folner.shift: required for shifted_boxes".to_string())
                    }
                    _ => {}
                }
            }
            ScheduleKind::Custom => {
                if self.boxes.is_empty() {
                    problems.push("folner.boxes: custom schedule needs at least one box".to_string());
                }
                for (i, b) in self.boxes.iter().enumerate() {
                    if b.rank() != rank {
                        problems.push(format!("folner.boxes[{i}]: rank {} differs from {rank}", b.rank()));
                    }
                    if b.is_empty() {
                        problems.push(format!("folner.boxes[{i}]: empty box"));
                    }
                }
            }
        }
        problems
    }

    /// The means along the schedule, optionally capping box sides at `max_side`.
    pub fn means(&self, rank: usize, max_side: Option<u64>) -> Vec<ApproximateMean> {
        let cap = |s: u64| max_side.is_none_or(|m| s <= m);
        match self.kind {
            ScheduleKind::Custom => {
                self.boxes.iter().filter(|b| cap(b.side)).cloned().map(ApproximateMean::new).collect()
            }
            _ => {
                let offset = match (&self.shift, self.kind) {
                    (Some(s), ScheduleKind::ShiftedBoxes) => SemigroupElement(s.clone()),
                    _ => SemigroupElement::identity(rank),
                };
                self.sizes
                    .iter()
                    .filter(|&&s| cap(s))
                    .map(|&s| ApproximateMean::new(IndexBox::new(offset.clone(), s)))
                    .collect()
            }
        }
    }
}

/// The uniform probability on a finite index box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproximateMean {
    pub folner_set: IndexBox,
}

impl ApproximateMean {
    pub fn new(folner_set: IndexBox) -> Self {
        Self { folner_set }
    }

    pub fn weight(&self) -> f64 {
        1.0 / self.folner_set.len() as f64
    }

    /// `μ(f)`, the average of `f` over the box.
    pub fn mean_value(&self, f: impl Fn(&SemigroupElement) -> f64 + Sync) -> Result<f64> {
        let bx = &self.folner_set;
        chunked_mean(bx.len(), |p| f(&bx.element_at(p)))
    }

    /// `|μ(l_t f) − μ(f)|` with `(l_t f)(s) = f(t + s)`.
    pub fn invariance_defect(&self, f: impl Fn(&SemigroupElement) -> f64 + Sync, t: &SemigroupElement) -> Result<f64> {
        let base = self.mean_value(&f)?;
        let shifted = self.mean_value(|s| f(&(t + s)))?;
        Ok((shifted - base).abs())
    }
}

/// The scalar functions of the orbit whose means define the barycenter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Coefficient {
    /// `s ↦ ⟨T_s c, x*⟩`
    Linear { functional: Vec<f64> },
    /// `s ↦ D(T_s c, x)`
    DistTo { point: Vec<f64> },
    /// `s ↦ D(x, T_s c)`
    DistFrom { point: Vec<f64> },
}

/// A coefficient function, possibly left-translated: `s ↦ h(T_{shift+s} c)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientFunction {
    pub coefficient: Coefficient,
    pub shift: SemigroupElement,
}

impl CoefficientFunction {
    pub fn new(coefficient: Coefficient, rank: usize) -> Self {
        Self { coefficient, shift: SemigroupElement::identity(rank) }
    }

    /// `l_t f`
    pub fn translate(&self, t: &SemigroupElement) -> Self {
        Self { coefficient: self.coefficient.clone(), shift: &self.shift + t }
    }

    /// The coefficient evaluated at an orbit point.
    pub fn value_at<G: BregmanGenerator + ?Sized>(&self, g: &G, p: &[f64]) -> Result<f64> {
        match &self.coefficient {
            Coefficient::Linear { functional } => {
                check_dim(p.len(), functional.len())?;
                Ok(numeric::dot(p, functional))
            }
            Coefficient::DistTo { point } => {
                check_point(g, p)?;
                check_point(g, point)?;
                Ok(distance_unchecked(g, p, point))
            }
            Coefficient::DistFrom { point } => {
                check_point(g, p)?;
                check_point(g, point)?;
                Ok(distance_unchecked(g, point, p))
            }
        }
    }

    pub fn eval<G: BregmanGenerator + ?Sized>(&self, g: &G, action: &ActionSpec, s: &SemigroupElement) -> Result<f64> {
        let p = action.apply(&(&self.shift + s), action.base_point())?;
        self.value_at(g, &p)
    }

    /// `μ(f)` computed from the memoized orbit over the translated box.
    pub fn mean<G: BregmanGenerator + ?Sized>(
        &self,
        g: &G,
        action: &ActionSpec,
        mean: &ApproximateMean,
    ) -> Result<f64> {
        let orbit = action.orbit(&mean.folner_set.translate(&self.shift))?;
        let values: Vec<f64> = orbit.points().map(|p| self.value_at(g, p)).collect::<Result<_>>()?;
        chunked_mean(values.len(), |i| values[i])
    }
}

/// Coordinatewise average of the orbit points.
pub fn orbit_average(orbit: &Orbit) -> Result<Vec<f64>> {
    (0..orbit.dim()).map(|j| chunked_mean(orbit.len(), |i| orbit.at(i)[j])).collect()
}

/// `z_N`, the uniform average of `{T_s c : s ∈ F_N}`.
pub fn barycenter(action: &ActionSpec, mean: &ApproximateMean) -> Result<Vec<f64>> {
    orbit_average(&action.orbit(&mean.folner_set)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailEntry {
    pub side: u64,
    pub point: Vec<f64>,
    /// Distance to the previous barycenter along the schedule.
    pub gap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BarycenterResult {
    pub point: Vec<f64>,
    pub schedule_tail: Vec<TailEntry>,
    /// Last consecutive gap; infinite when the schedule has a single entry.
    pub cauchy_gap: f64,
    pub converged: bool,
    /// `‖P_C(z) − z‖` in the Bregman sense, once certified.
    pub in_set_residual: Option<f64>,
    /// Minimizer-identity residual at a probe point, once certified.
    pub minimizer_residual: Option<f64>,
}

impl BarycenterResult {
    /// The mean that produced the final point.
    pub fn final_side(&self) -> u64 {
        self.schedule_tail.last().map_or(0, |t| t.side)
    }
}

/// Barycenters along the schedule, stopping once a consecutive gap drops below `tol`.
///
/// Running out of schedule is not an error: the result carries `converged = false`.
pub fn barycenter_converge(action: &ActionSpec, means: &[ApproximateMean], tol: f64) -> Result<BarycenterResult> {
    if means.is_empty() {
        return Err(Error::InvalidArgument("Folner schedule is empty".into()));
    }
    let mut tail: Vec<TailEntry> = Vec::new();
    let mut converged = false;
    let mut gap = f64::INFINITY;
    for m in means {
        let z = barycenter(action, m)?;
        let step = tail.last().map(|prev| numeric::dist(&prev.point, &z));
        if let Some(d) = step {
            gap = d;
        }
        tail.push(TailEntry { side: m.folner_set.side, point: z, gap: step });
        if gap < tol {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!(target: "bregman_lab::no_convergence", "barycenter gap {gap:e} above tolerance {tol:e} at schedule end");
    }
    Ok(BarycenterResult {
        point: tail.last().expect("nonempty").point.clone(),
        schedule_tail: tail,
        cauchy_gap: gap,
        converged,
        in_set_residual: None,
        minimizer_residual: None,
    })
}

/// Terms of the minimizer identity `μ D(T_s c, x) − μ D(T_s c, z) = D(z, x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinimizerIdentity {
    pub mean_to_x: f64,
    pub mean_to_z: f64,
    pub z_to_x: f64,
}

impl MinimizerIdentity {
    pub fn residual(&self) -> f64 {
        let mut acc = CompensatedSum::new();
        acc.add(self.mean_to_x);
        acc.add(-self.mean_to_z);
        acc.add(-self.z_to_x);
        acc.value().abs()
    }

    pub fn scale(&self) -> f64 {
        self.mean_to_x.abs().max(self.mean_to_z.abs()).max(self.z_to_x.abs())
    }
}

/// `μ D(T_s c, x)` over the orbit.
pub fn averaged_distance<G: BregmanGenerator + ?Sized>(g: &G, orbit: &Orbit, x: &[f64]) -> Result<f64> {
    check_point(g, x)?;
    for p in orbit.points() {
        check_point(g, p)?;
    }
    let grad_x = g.gradient(x);
    chunked_mean(orbit.len(), |i| distance_with_gradient(g, orbit.at(i), x, &grad_x))
}

/// Evaluates both sides of the minimizer identity, where `z` is the orbit's average.
pub fn minimizer_identity<G: BregmanGenerator + ?Sized>(
    g: &G,
    orbit: &Orbit,
    z: &[f64],
    x: &[f64],
) -> Result<MinimizerIdentity> {
    check_point(g, z)?;
    Ok(MinimizerIdentity {
        mean_to_x: averaged_distance(g, orbit, x)?,
        mean_to_z: averaged_distance(g, orbit, z)?,
        z_to_x: distance_unchecked(g, z, x),
    })
}

/// `|μ D(T_s c, x) − μ D(T_s c, z) − D(z, x)|` for the barycenter `z` of `mean`.
pub fn minimizer_identity_residual<G: BregmanGenerator + ?Sized>(
    g: &G,
    action: &ActionSpec,
    mean: &ApproximateMean,
    x: &[f64],
) -> Result<MinimizerIdentity> {
    let orbit = action.orbit(&mean.folner_set)?;
    let z = orbit_average(&orbit)?;
    minimizer_identity(g, &orbit, &z, x)
}

/// `‖P^g_C(z) − z‖`; zero when `z` lies in `C`.
///
/// Non-convex sets are accepted for diagnostics only, with a symmetric generator.
pub fn barycenter_in_set<G: BregmanGenerator + ?Sized>(
    g: &G,
    action: &ActionSpec,
    z: &[f64],
    opts: &ProjectionOptions,
) -> Result<f64> {
    let set = action.set();
    if !set.is_convex() {
        // Projected gradient has no meaning on a non-convex set. A symmetric
        // generator here is a squared norm, whose nearest points are Euclidean.
        if !g.symmetric_distance() {
            return Err(Error::InvalidArgument(format!(
                "Bregman projection onto the non-convex set `{}` needs a symmetric generator",
                set.name()
            )));
        }
        check_point(g, z)?;
        return Ok(numeric::dist(&set.euclid_project(z)?, z));
    }
    let p = bregman_project(g, set, z, opts)?;
    Ok(numeric::dist(&p.point, z))
}
