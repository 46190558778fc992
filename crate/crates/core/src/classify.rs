//! Sampled classification of actions against the Bregman nonexpansiveness
//! inequalities.
//!
//! Each check evaluates its inequality on seeded samples `(x, y) ∈ C × C` and
//! exponents `s` from the box `{0, …, exponent_radius}ᵏ`, and reports the
//! largest violation with the inputs that produced it. A pass is evidence, not
//! proof. Maps are applied without membership checks so that expansive maps
//! can be classified; samples whose images leave the set are counted.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::actions::{ActionSpec, MEMBERSHIP_TOL};
use crate::bregman::{distance_unchecked, BregmanGenerator};
use crate::error::{check_dim, Error, Result};
use crate::numeric::CompensatedSum;
use crate::semigroup::{IndexBox, SemigroupElement};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyConfig {
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
    /// Sampled exponents range over `{0, …, exponent_radius}` per generator.
    pub exponent_radius: u64,
    /// Pairs evaluated against every exponent in the box, in addition to the samples.
    #[serde(default)]
    pub extra_pairs: Vec<(Vec<f64>, Vec<f64>)>,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        Self { samples: 1000, seed: 0, tol: 1e-8, exponent_radius: 4, extra_pairs: Vec::new() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Inequality {
    /// `D(T_s x, T_s y) ≤ D(x, y)`
    Nonexpansive,
    /// `D(T_s x, T_s y) + D(T_s y, T_s x) ≤ D(T_s x, y) + D(T_s y, x)`
    Nonspreading,
    /// `α D(T_s x, T_s y) + (1−α) D(x, T_s y) ≤ β D(T_s x, y) + (1−β) D(x, y)`
    GeneralizedHybrid { alpha: f64, beta: f64 },
}

impl Inequality {
    pub fn label(&self) -> String {
        match self {
            Inequality::Nonexpansive => "nonexpansive".into(),
            Inequality::Nonspreading => "nonspreading".into(),
            Inequality::GeneralizedHybrid { alpha, beta } => format!("generalized_hybrid({alpha},{beta})"),
        }
    }

    /// Left side minus right side; positive values violate the inequality.
    fn violation<G: BregmanGenerator + ?Sized>(&self, g: &G, x: &[f64], y: &[f64], tx: &[f64], ty: &[f64]) -> f64 {
        let d = |a: &[f64], b: &[f64]| distance_unchecked(g, a, b);
        let mut acc = CompensatedSum::new();
        match *self {
            Inequality::Nonexpansive => {
                acc.add(d(tx, ty));
                acc.add(-d(x, y));
            }
            Inequality::Nonspreading => {
                acc.add(d(tx, ty));
                acc.add(d(ty, tx));
                acc.add(-d(tx, y));
                acc.add(-d(ty, x));
            }
            Inequality::GeneralizedHybrid { alpha, beta } => {
                acc.add(alpha * d(tx, ty));
                acc.add((1.0 - alpha) * d(x, ty));
                acc.add(-beta * d(tx, y));
                acc.add(-(1.0 - beta) * d(x, y));
            }
        }
        acc.value()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub s: SemigroupElement,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub kind: String,
    pub max_violation: f64,
    pub pass: bool,
    pub witness: Option<Witness>,
    pub samples_evaluated: usize,
    /// Samples whose images left the set.
    pub left_set: usize,
    /// Samples skipped because a point fell outside the generator's domain.
    pub skipped_domain: usize,
}

enum Outcome {
    Evaluated { violation: f64, witness: Witness, left: bool },
    Skipped,
}

fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn sample_exponent(rng: &mut ChaCha8Rng, k: usize, radius: u64) -> SemigroupElement {
    SemigroupElement((0..k).map(|_| rng.random_range(0..=radius)).collect())
}

fn evaluate<G: BregmanGenerator + ?Sized>(
    g: &G,
    action: &ActionSpec,
    ineq: &Inequality,
    x: Vec<f64>,
    y: Vec<f64>,
    s: SemigroupElement,
) -> Outcome {
    let tx = action.apply_raw(&s, &x);
    let ty = action.apply_raw(&s, &y);
    if ![&x, &y, &tx, &ty].iter().all(|p| g.domain_contains(p)) {
        return Outcome::Skipped;
    }
    let violation = ineq.violation(g, &x, &y, &tx, &ty);
    if !violation.is_finite() {
        return Outcome::Skipped;
    }
    let set = action.set();
    let left = !(set.contains(&tx, MEMBERSHIP_TOL) && set.contains(&ty, MEMBERSHIP_TOL));
    Outcome::Evaluated { violation, witness: Witness { x, y, s }, left }
}

/// Evaluates `ineq` on the configured samples and extra pairs.
pub fn classify<G: BregmanGenerator + ?Sized>(
    g: &G,
    action: &ActionSpec,
    ineq: Inequality,
    cfg: &ClassifyConfig,
) -> Result<ClassificationReport> {
    check_dim(g.dimension(), action.dimension())?;
    let k = action.rank();
    let sampled: Vec<Outcome> = (0..cfg.samples)
        .into_par_iter()
        .map(|i| -> Result<Outcome> {
            let mut rng = sample_rng(cfg.seed, i as u64);
            let x = action.set().sample(&mut rng)?;
            let y = action.set().sample(&mut rng)?;
            let s = sample_exponent(&mut rng, k, cfg.exponent_radius);
            Ok(evaluate(g, action, &ineq, x, y, s))
        })
        .collect::<Result<_>>()?;

    let full_box = IndexBox::origin(k, cfg.exponent_radius + 1);
    let mut outcomes = sampled;
    for (x, y) in &cfg.extra_pairs {
        check_dim(action.dimension(), x.len())?;
        check_dim(action.dimension(), y.len())?;
        for s in full_box.iter() {
            outcomes.push(evaluate(g, action, &ineq, x.clone(), y.clone(), s));
        }
    }

    // Strict comparison keeps the lowest index among ties.
    let mut best: Option<(f64, Witness)> = None;
    let (mut evaluated, mut left_set, mut skipped) = (0, 0, 0);
    for o in outcomes {
        match o {
            Outcome::Skipped => skipped += 1,
            Outcome::Evaluated { violation, witness, left } => {
                evaluated += 1;
                left_set += left as usize;
                if best.as_ref().is_none_or(|(v, _)| violation > *v) {
                    best = Some((violation, witness));
                }
            }
        }
    }
    let (max_violation, witness) = match best {
        Some((v, w)) => (v, Some(w)),
        None => (f64::NEG_INFINITY, None),
    };
    Ok(ClassificationReport {
        kind: ineq.label(),
        max_violation,
        pass: evaluated > 0 && max_violation <= cfg.tol,
        witness,
        samples_evaluated: evaluated,
        left_set,
        skipped_domain: skipped,
    })
}

pub fn check_nonexpansive<G: BregmanGenerator + ?Sized>(
    g: &G,
    action: &ActionSpec,
    cfg: &ClassifyConfig,
) -> Result<ClassificationReport> {
    classify(g, action, Inequality::Nonexpansive, cfg)
}

pub fn check_nonspreading<G: BregmanGenerator + ?Sized>(
    g: &G,
    action: &ActionSpec,
    cfg: &ClassifyConfig,
) -> Result<ClassificationReport> {
    classify(g, action, Inequality::Nonspreading, cfg)
}

pub fn check_generalized_hybrid<G: BregmanGenerator + ?Sized>(
    g: &G,
    action: &ActionSpec,
    alpha: f64,
    beta: f64,
    cfg: &ClassifyConfig,
) -> Result<ClassificationReport> {
    classify(g, action, Inequality::GeneralizedHybrid { alpha, beta }, cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticWitness {
    pub s_eps: SemigroupElement,
    pub defect: f64,
    /// Candidates examined before the witness, inclusive.
    pub candidates: usize,
}

/// Searches `search_box` in graded-lexicographic order for `s_ε` with
/// `max D(T_{s+s_ε} x, T_{s+s_ε} y) − D(x, y) ≤ ε` over common sampled `(s, x)`.
pub fn asymptotic_defect<G: BregmanGenerator + ?Sized>(
    g: &G,
    action: &ActionSpec,
    y: &[f64],
    epsilon: f64,
    search_box: &IndexBox,
    cfg: &ClassifyConfig,
) -> Result<AsymptoticWitness> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument("epsilon must be positive".into()));
    }
    check_dim(g.dimension(), y.len())?;
    check_dim(action.rank(), search_box.rank())?;
    if search_box.is_empty() {
        return Err(Error::EmptySet);
    }
    let k = action.rank();
    let draws: Vec<(Vec<f64>, SemigroupElement)> = (0..cfg.samples)
        .into_par_iter()
        .map(|i| -> Result<_> {
            let mut rng = sample_rng(cfg.seed, i as u64);
            let x = action.set().sample(&mut rng)?;
            Ok((x, sample_exponent(&mut rng, k, cfg.exponent_radius)))
        })
        .collect::<Result<_>>()?;

    let mut best = f64::INFINITY;
    for (n, cand) in search_box.graded_lex().into_iter().enumerate() {
        let defects: Vec<Option<f64>> = draws
            .par_iter()
            .map(|(x, s)| {
                let shift = s + &cand;
                let tx = action.apply_raw(&shift, x);
                let ty = action.apply_raw(&shift, y);
                if ![x.as_slice(), y, &tx, &ty].iter().all(|p| g.domain_contains(p)) {
                    return None;
                }
                let mut acc = CompensatedSum::new();
                acc.add(distance_unchecked(g, &tx, &ty));
                acc.add(-distance_unchecked(g, x, y));
                Some(acc.value()).filter(|v| v.is_finite())
            })
            .collect();
        let defect = defects.into_iter().flatten().fold(f64::NEG_INFINITY, f64::max);
        if defect <= epsilon {
            return Ok(AsymptoticWitness { s_eps: cand, defect, candidates: n + 1 });
        }
        best = best.min(defect);
    }
    Err(Error::NotFoundInBox { best_defect: best })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::actions::GeneratorMap;
    use crate::bregman::Generator;
    use crate::sets::ConvexSet;

    fn rotation() -> ActionSpec {
        ActionSpec::new(vec![GeneratorMap::rotation(1.0)], ConvexSet::unit_ball(2), vec![1.0, 0.0]).unwrap()
    }

    fn expansion() -> ActionSpec {
        ActionSpec::new(vec![GeneratorMap::scaling(2.0)], ConvexSet::interval(-1.0, 1.0), vec![1.0]).unwrap()
    }

    fn only_pair(x: f64, y: f64) -> ClassifyConfig {
        ClassifyConfig { samples: 0, exponent_radius: 1, extra_pairs: vec![(vec![x], vec![y])], ..Default::default() }
    }

    #[test]
    fn rotation_is_nonexpansive_but_not_nonspreading() {
        let g = Generator::sq_norm(2);
        let cfg = ClassifyConfig { samples: 300, ..Default::default() };
        let ne = check_nonexpansive(&g, &rotation(), &cfg).unwrap();
        assert!(ne.pass && ne.max_violation.abs() < 1e-12, "{ne:?}");
        // the inequality reduces to (1 − cos θ)⟨x, y⟩ ≥ 0, false for obtuse pairs
        let ns = check_nonspreading(&g, &rotation(), &cfg).unwrap();
        assert!(!ns.pass);
        let w = ns.witness.unwrap();
        assert!(crate::numeric::dot(&w.x, &w.y) < 0.0);
    }

    #[test]
    fn coordinate_projection_is_nonspreading() {
        let g = Generator::sq_norm(2);
        let p = ActionSpec::new(
            vec![GeneratorMap::affine(vec![vec![1.0, 0.0], vec![0.0, 0.0]], vec![0.0, 0.0])],
            ConvexSet::unit_ball(2),
            vec![0.6, 0.8],
        )
        .unwrap();
        let cfg = ClassifyConfig { samples: 500, ..Default::default() };
        assert!(check_nonspreading(&g, &p, &cfg).unwrap().pass);
        assert!(check_nonexpansive(&g, &p, &cfg).unwrap().pass);
    }

    #[test]
    fn expansion_fails_with_the_expected_witness() {
        let g = Generator::sq_norm(1);
        let ne = check_nonexpansive(&g, &expansion(), &only_pair(1.0, 0.0)).unwrap();
        assert!(!ne.pass);
        assert!((ne.max_violation - 3.0).abs() < 1e-12);
        assert_eq!(ne.witness.unwrap().s, SemigroupElement(vec![1]));
        let ns = check_nonspreading(&g, &expansion(), &only_pair(1.0, 0.0)).unwrap();
        assert!((ns.max_violation - 3.0).abs() < 1e-12);
        let hy = check_generalized_hybrid(&g, &expansion(), 1.0, 0.0, &only_pair(1.0, 0.0)).unwrap();
        assert!(!hy.pass);
    }

    #[test]
    fn identity_passes_exactly() {
        let g = Generator::sq_norm(2);
        let id = ActionSpec::new(vec![GeneratorMap::Identity], ConvexSet::unit_ball(2), vec![0.0, 0.0]).unwrap();
        let cfg = ClassifyConfig { samples: 100, ..Default::default() };
        for ineq in [
            Inequality::Nonexpansive,
            Inequality::Nonspreading,
            Inequality::GeneralizedHybrid { alpha: 0.0, beta: 0.0 },
        ] {
            let r = classify(&g, &id, ineq, &cfg).unwrap();
            assert!(r.pass);
            assert_eq!(r.max_violation, 0.0, "{}", r.kind);
        }
    }

    #[test]
    fn hybrid_one_zero_reproduces_nonexpansive_violations() {
        let g = Generator::sq_norm(2);
        let a = ActionSpec::new(vec![GeneratorMap::scaling(0.7)], ConvexSet::unit_ball(2), vec![1.0, 0.0]).unwrap();
        let cfg = ClassifyConfig { samples: 200, seed: 9, ..Default::default() };
        let ne = check_nonexpansive(&g, &a, &cfg).unwrap();
        let hy = check_generalized_hybrid(&g, &a, 1.0, 0.0, &cfg).unwrap();
        assert_eq!(ne.max_violation.to_bits(), hy.max_violation.to_bits());
        assert_eq!(ne.witness, hy.witness);
    }

    #[test]
    fn reports_are_thread_count_independent() {
        let g = Generator::sq_norm(2);
        let cfg = ClassifyConfig { samples: 500, seed: 3, ..Default::default() };
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| check_nonspreading(&g, &rotation(), &cfg).unwrap());
        let b = four.install(|| check_nonspreading(&g, &rotation(), &cfg).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn asymptotic_witnesses() {
        let g = Generator::sq_norm(1);
        let half =
            ActionSpec::new(vec![GeneratorMap::scaling(0.5)], ConvexSet::interval(-1.0, 1.0), vec![1.0]).unwrap();
        let cfg = ClassifyConfig { samples: 200, ..Default::default() };
        let w = asymptotic_defect(&g, &half, &[0.0], 0.1, &IndexBox::origin(1, 5), &cfg).unwrap();
        assert_eq!(w.s_eps, SemigroupElement(vec![0]));

        let g2 = Generator::sq_norm(2);
        let w = asymptotic_defect(&g2, &rotation(), &[0.0, 0.0], 0.1, &IndexBox::origin(1, 3), &cfg).unwrap();
        assert_eq!(w.s_eps, SemigroupElement(vec![0]));
        assert!(w.defect <= 1e-12);

        let e = asymptotic_defect(&g, &expansion(), &[0.0], 0.1, &IndexBox::origin(1, 4), &cfg);
        assert!(matches!(e, Err(Error::NotFoundInBox { .. })));
    }
}
