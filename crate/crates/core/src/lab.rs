//! Verification checks built on barycenters: fixed-point residuals,
//! attractive-point membership, truncated sup-inf sandwiches, independence
//! from the choice of mean, and projections onto sampled attractive sets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::actions::ActionSpec;
use crate::bregman::{check_point, distance_unchecked, distance_with_gradient, BregmanGenerator};
use crate::error::{check_dim, Error, Result};
use crate::means::{barycenter_converge, chunked_mean, ApproximateMean, BarycenterResult};
use crate::numeric::{self, CompensatedSum};
use crate::semigroup::{IndexBox, SemigroupElement};
use crate::sets::{dykstra, DYKSTRA_MAX_SWEEPS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Pass,
    Fail,
    Skipped,
    NotEvaluated,
}

/// One named measurement with its tolerance and verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub check: String,
    pub value: Option<f64>,
    pub tol: f64,
    pub verdict: Verdict,
    pub witness: serde_json::Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckRecord {
    /// PASS iff `value ≤ tol`.
    pub fn measured(check: impl Into<String>, value: f64, tol: f64, witness: serde_json::Value) -> Self {
        let verdict = if value <= tol { Verdict::Pass } else { Verdict::Fail };
        Self { check: check.into(), value: Some(value), tol, verdict, witness, note: None }
    }

    pub fn unmeasured(check: impl Into<String>, tol: f64, verdict: Verdict, note: impl Into<String>) -> Self {
        Self {
            check: check.into(),
            value: None,
            tol,
            verdict,
            witness: serde_json::Value::Null,
            note: Some(note.into()),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// `max_i ‖T_i z − z‖` over the generators.
pub fn fixed_point_residual(action: &ActionSpec, z: &[f64]) -> Result<(f64, usize)> {
    check_dim(action.dimension(), z.len())?;
    let mut worst = (0.0, 0);
    for (i, g) in action.generators().iter().enumerate() {
        let r = numeric::dist(&g.eval(z), z);
        if r > worst.0 {
            worst = (r, i);
        }
    }
    Ok(worst)
}

pub fn verify_fixed_point(action: &ActionSpec, z: &[f64], tol: f64) -> Result<CheckRecord> {
    let (residual, generator) = fixed_point_residual(action, z)?;
    Ok(CheckRecord::measured("fixed_point", residual, tol, json!({ "generator": generator, "z": z }))
        .with_note("residual over generators; T_{s+t} z = T_s T_t z covers the whole semigroup"))
}

/// Largest sampled `D(z, T_s y) − D(z, y)` over `y ∈ C` and `s ∈ {0, …, exponent_radius}ᵏ`.
pub fn attractive_membership<G: BregmanGenerator + ?Sized>(
    g: &G,
    action: &ActionSpec,
    z: &[f64],
    samples: usize,
    seed: u64,
    exponent_radius: u64,
    tol: f64,
) -> Result<CheckRecord> {
    check_point(g, z)?;
    let k = action.rank();
    let outcomes: Vec<Option<(f64, Vec<f64>, SemigroupElement)>> = (0..samples)
        .into_par_iter()
        .map(|i| -> Result<_> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let y = action.set().sample(&mut rng)?;
            let s = SemigroupElement((0..k).map(|_| rng.random_range(0..=exponent_radius)).collect());
            let ty = action.apply_raw(&s, &y);
            if !(g.domain_contains(&y) && g.domain_contains(&ty)) {
                return Ok(None);
            }
            let mut acc = CompensatedSum::new();
            acc.add(distance_unchecked(g, z, &ty));
            acc.add(-distance_unchecked(g, z, &y));
            Ok(Some((acc.value(), y, s)))
        })
        .collect::<Result<_>>()?;
    let mut best: Option<(f64, Vec<f64>, SemigroupElement)> = None;
    let mut skipped = 0usize;
    for o in outcomes {
        match o {
            None => skipped += 1,
            Some(v) => {
                if best.as_ref().is_none_or(|b| v.0 > b.0) {
                    best = Some(v);
                }
            }
        }
    }
    let Some((value, y, s)) = best else {
        return Ok(CheckRecord::unmeasured(
            "attractive_membership",
            tol,
            Verdict::NotEvaluated,
            "no sample fell inside the generator's domain",
        ));
    };
    let mut rec = CheckRecord::measured("attractive_membership", value, tol, json!({ "y": y, "s": s, "z": z }));
    if skipped > 0 {
        rec = rec.with_note(format!("{skipped} samples outside the generator's domain were skipped"));
    }
    Ok(rec)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sandwich {
    /// `sup_t inf_s D(T_{t+s} c, z)` over the truncation box.
    pub lower: f64,
    /// Mean of `D(T_{s*+u} c, z)` over the mean's box, `s*` attaining `upper`.
    pub middle: f64,
    /// `inf_s sup_t D(T_{t+s} c, z)` over the truncation box.
    pub upper: f64,
    pub s_star: SemigroupElement,
    pub truncation_side: u64,
    pub mean_side: u64,
}

impl Sandwich {
    /// Largest amount by which `lower ≤ middle ≤ upper` fails; nonpositive when it holds.
    pub fn ordering_violation(&self) -> f64 {
        (self.lower - self.middle).max(self.middle - self.upper)
    }

    pub fn equality_gap(&self) -> f64 {
        (self.upper - self.lower).abs()
    }
}

/// Truncated sup-inf and inf-sup of `u ↦ D(T_u c, z)` around a mean value.
///
/// `s` and `t` range over `{0, …, truncation_side−1}ᵏ`. These are one-sided
/// estimates of the untruncated quantities. The middle term averages the
/// function translated by the minimizing `s*`, which for an invariant mean has
/// the same value as the untranslated average.
pub fn sup_inf_sandwich<G: BregmanGenerator + ?Sized>(
    g: &G,
    action: &ActionSpec,
    z: &[f64],
    truncation_side: u64,
    mean: &ApproximateMean,
) -> Result<Sandwich> {
    check_point(g, z)?;
    if truncation_side == 0 {
        return Err(Error::EmptySet);
    }
    let k = action.rank();
    let grad_z = g.gradient(z);
    let wide = IndexBox::origin(k, 2 * truncation_side - 1);
    let orbit = action.orbit(&wide)?;
    let values: Vec<f64> = orbit
        .points()
        .map(|p| {
            check_point(g, p)?;
            Ok(distance_with_gradient(g, p, z, &grad_z))
        })
        .collect::<Result<_>>()?;
    let trunc = IndexBox::origin(k, truncation_side);
    let f = |t: &SemigroupElement, s: &SemigroupElement| {
        values[wide.position(&(t + s)).expect("t + s lies in the wide box")]
    };
    let shifts = trunc.graded_lex();
    let lower = shifts
        .iter()
        .map(|t| shifts.iter().map(|s| f(t, s)).fold(f64::INFINITY, f64::min))
        .fold(f64::NEG_INFINITY, f64::max);
    let (s_star, upper) = shifts
        .iter()
        .map(|s| (s, shifts.iter().map(|t| f(t, s)).fold(f64::NEG_INFINITY, f64::max)))
        .fold((None, f64::INFINITY), |acc, (s, v)| if v < acc.1 { (Some(s), v) } else { acc });
    let s_star = s_star.expect("nonempty truncation box").clone();

    let shifted = action.orbit(&mean.folner_set.translate(&s_star))?;
    let middle = chunked_mean(shifted.len(), |i| distance_with_gradient(g, shifted.at(i), z, &grad_z))?;
    Ok(Sandwich { lower, middle, upper, s_star, truncation_side, mean_side: mean.folner_set.side })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanIndependence {
    pub first: BarycenterResult,
    pub second: BarycenterResult,
    pub distance: f64,
}

/// Barycenters from two different schedules and the distance between them.
pub fn mean_independence(
    action: &ActionSpec,
    first: &[ApproximateMean],
    second: &[ApproximateMean],
    tol: f64,
) -> Result<MeanIndependence> {
    let a = barycenter_converge(action, first, tol)?;
    let b = barycenter_converge(action, second, tol)?;
    let distance = numeric::dist(&a.point, &b.point);
    Ok(MeanIndependence { first: a, second: b, distance })
}

type ConstraintRow = (Vec<f64>, SemigroupElement, Vec<f64>, f64);

/// Sampled attractive-point constraints `‖x − T_s y‖² ≤ ‖x − y‖²`, each the
/// halfspace `⟨2(y − T_s y), x⟩ ≤ ‖y‖² − ‖T_s y‖²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttractiveSetModel {
    pub constraints: Vec<(Vec<f64>, SemigroupElement)>,
    pub normals: Vec<Vec<f64>>,
    pub offsets: Vec<f64>,
}

impl AttractiveSetModel {
    /// Requires a generator whose distance is the squared Euclidean norm.
    pub fn sample<G: BregmanGenerator + ?Sized>(
        g: &G,
        action: &ActionSpec,
        samples: usize,
        seed: u64,
        exponent_radius: u64,
    ) -> Result<Self> {
        if !g.symmetric_distance() {
            return Err(Error::InvalidArgument(format!(
                "attractive-set model needs a squared-norm generator, got `{}`",
                g.name()
            )));
        }
        let k = action.rank();
        let rows: Vec<Option<ConstraintRow>> = (0..samples)
            .into_par_iter()
            .map(|i| -> Result<_> {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(i as u64);
                let y = action.set().sample(&mut rng)?;
                let s = SemigroupElement((0..k).map(|_| rng.random_range(1..=exponent_radius.max(1))).collect());
                let ty = action.apply_raw(&s, &y);
                let normal = numeric::scale(&numeric::sub(&y, &ty), 2.0);
                // constraints with a vanishing normal hold everywhere or nowhere
                if numeric::norm(&normal) <= 1e-12 * (1.0 + numeric::norm(&y)) {
                    return Ok(None);
                }
                let offset = numeric::norm_sq(&y) - numeric::norm_sq(&ty);
                Ok(Some((y, s, normal, offset)))
            })
            .collect::<Result<_>>()?;
        let mut model = Self { constraints: Vec::new(), normals: Vec::new(), offsets: Vec::new() };
        for (y, s, a, b) in rows.into_iter().flatten() {
            model.constraints.push((y, s));
            model.normals.push(a);
            model.offsets.push(b);
        }
        Ok(model)
    }

    pub fn len(&self) -> usize {
        self.normals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.normals.is_empty()
    }

    /// Euclidean projection onto the sampled intersection.
    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        if self.is_empty() {
            return Err(Error::EmptyModel);
        }
        let out = dykstra(&self.normals, &self.offsets, x, DYKSTRA_MAX_SWEEPS);
        if out.max_violation > 1e-6 {
            return Err(Error::InfeasibleModel { violation: out.max_violation });
        }
        Ok(out.point)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitPoint {
    pub t: SemigroupElement,
    pub distance: f64,
}

/// `‖P_A(T_t c) − z‖` along the given exponents.
pub fn attractive_projection_limit(
    model: &AttractiveSetModel,
    action: &ActionSpec,
    z: &[f64],
    ts: &[SemigroupElement],
) -> Result<Vec<LimitPoint>> {
    check_dim(action.dimension(), z.len())?;
    ts.iter()
        .map(|t| {
            let p = model.project(&action.apply(t, action.base_point())?)?;
            Ok(LimitPoint { t: t.clone(), distance: numeric::dist(&p, z) })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitDiagnostics {
    /// Largest `‖T_{s+t} c − T_{s+t'} c‖ − ‖T_t c − T_{t'} c‖` over sampled triples.
    pub nonexpansive_violation: f64,
    pub witness: Option<(SemigroupElement, SemigroupElement, SemigroupElement)>,
    /// Size of a greedy ε-net of the truncated orbit.
    pub net_size: usize,
    pub epsilon: f64,
    /// Largest `|g(p) − g(q)| / ‖p − q‖` over sampled orbit pairs.
    pub lipschitz_estimate: f64,
}

impl OrbitDiagnostics {
    pub fn nonexpansive_orbit(&self, tol: f64) -> bool {
        self.nonexpansive_violation <= tol
    }
}

/// Orbit hypotheses: nonexpansive orbit, precompactness proxy, Lipschitz estimate.
pub fn orbit_diagnostics<G: BregmanGenerator + ?Sized>(
    g: &G,
    action: &ActionSpec,
    bx: &IndexBox,
    epsilon: f64,
    samples: usize,
    seed: u64,
) -> Result<OrbitDiagnostics> {
    if bx.is_empty() {
        return Err(Error::EmptySet);
    }
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument("epsilon must be positive".into()));
    }
    let k = action.rank();
    let wide = IndexBox::new(bx.offset.clone(), 2 * bx.side - 1);
    let orbit = action.orbit(&wide)?;
    let at = |s: &SemigroupElement| orbit.get(s).expect("inside the wide box");

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| SemigroupElement((0..k).map(|_| rng.random_range(0..bx.side)).collect());
    let mut worst = f64::NEG_INFINITY;
    let mut witness = None;
    let mut lipschitz = 0.0_f64;
    for _ in 0..samples {
        let s = draw(&mut rng);
        let t = &bx.offset + &draw(&mut rng);
        let t2 = &bx.offset + &draw(&mut rng);
        let (p, q) = (at(&t), at(&t2));
        let v = numeric::dist(at(&(&s + &t)), at(&(&s + &t2))) - numeric::dist(p, q);
        if v > worst {
            worst = v;
            witness = Some((s, t, t2));
        }
        let d = numeric::dist(p, q);
        if d > 0.0 && g.domain_contains(p) && g.domain_contains(q) {
            lipschitz = lipschitz.max((g.evaluate(p) - g.evaluate(q)).abs() / d);
        }
    }

    let mut centers: Vec<&[f64]> = Vec::new();
    for s in bx.iter() {
        let p = at(&s);
        if centers.iter().all(|c| numeric::dist(c, p) > epsilon) {
            centers.push(p);
        }
    }
    Ok(OrbitDiagnostics {
        nonexpansive_violation: worst.max(0.0),
        witness,
        net_size: centers.len(),
        epsilon,
        lipschitz_estimate: lipschitz,
    })
}
