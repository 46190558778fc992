//! Command dispatch over a validated scenario.

use std::fmt::Write as _;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use thiserror::Error;

use crate::actions::ActionSpec;
use crate::bregman::{self, BregmanGenerator, Generator};
use crate::classify::{self, ClassifyConfig};
use crate::error::Error;
use crate::lab::{self, AttractiveSetModel, CheckRecord, Verdict};
use crate::means::{self, ApproximateMean, BarycenterResult};
use crate::numeric;
use crate::projection::{self, ProjectionOptions};
use crate::report::{RunReport, EXIT_NUMERIC};
use crate::scenario::{CheckSpec, ClassifyType, Scenario};
use crate::semigroup::{IndexBox, SemigroupElement};

pub const THREE_POINT_TOL: f64 = 1e-10;
pub const GRADIENT_TOL: f64 = 1e-5;
pub const PROJECTION_TOL: f64 = 1e-6;
pub const DEFAULT_TRUNCATION_SIDE: u64 = 20;
pub const DEFAULT_T_MAX: u64 = 40;
pub const DEFAULT_NET_EPSILON: f64 = 0.1;
pub const DEFAULT_DIAGNOSTIC_SIDE: u64 = 200;
pub const DEFAULT_MEAN_SHIFT: u64 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Distance,
    Project,
    Classify,
    Barycenter,
    Verify,
    All,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Distance => "distance",
            Command::Project => "project",
            Command::Classify => "classify",
            Command::Barycenter => "barycenter",
            Command::Verify => "verify",
            Command::All => "all",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        [Self::Distance, Self::Project, Self::Classify, Self::Barycenter, Self::Verify, Self::All]
            .into_iter()
            .find(|c| c.name() == name)
    }
}

#[derive(Debug, Error)]
#[error("scenario `{scenario}`: {source}")]
pub struct RunError {
    pub scenario: String,
    #[source]
    pub source: Error,
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        EXIT_NUMERIC
    }
}

/// Runs `command` on `scenario`. Numeric failures abort the run; failed checks do not.
pub fn run(scenario: &Scenario, command: Command) -> Result<RunReport, RunError> {
    let start = Instant::now();
    let mut runner = Runner::new(scenario, command);
    runner.dispatch(command).map_err(|source| RunError { scenario: scenario.id.clone(), source })?;
    let mut report = runner.finish();
    report.runtime_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(report)
}

const NEEDS_BARYCENTER: [&str; 6] =
    ["barycenter", "fixed_point", "attractive_membership", "sandwich", "projection_limit", "barycenter_in_set"];

struct Runner<'a> {
    sc: &'a Scenario,
    g: &'a Generator,
    action: ActionSpec,
    means: Vec<ApproximateMean>,
    report: RunReport,
    barycenter: Option<BarycenterResult>,
}

impl<'a> Runner<'a> {
    fn new(sc: &'a Scenario, command: Command) -> Self {
        Self {
            sc,
            g: &sc.generator,
            // A fresh copy so drift counts belong to this run alone.
            action: sc.action.clone(),
            means: sc.folner.means(sc.action.rank(), None),
            report: RunReport::new(&sc.id, command.name(), sc.seed, sc.defaults_applied.clone()),
            barycenter: None,
        }
    }

    fn finish(mut self) -> RunReport {
        self.report.warnings.drift_reprojections = self.action.drift_count();
        self.report.barycenter = self.barycenter;
        self.report
    }

    fn push(&mut self, rec: CheckRecord) {
        self.report.checks.push(rec);
    }

    fn dispatch(&mut self, command: Command) -> crate::Result<()> {
        match command {
            Command::Distance => self.distance(),
            Command::Project => self.project(),
            Command::Classify => self.classify().map(|_| ()),
            Command::Barycenter => self.barycenter_command(),
            Command::Verify => {
                for c in self.sc.checks.clone() {
                    self.check(&c)?;
                }
                Ok(())
            }
            Command::All => {
                if !self.classify()? {
                    self.skip_all("classification failed");
                    return Ok(());
                }
                self.record_barycenter()?;
                let bary_ok = self.report.checks.last().is_some_and(|r| r.passed());
                for c in self.sc.checks.clone() {
                    if c.name == "barycenter" {
                        continue;
                    }
                    if !bary_ok && NEEDS_BARYCENTER.contains(&c.name.as_str()) {
                        let tol = self.sc.tol_of(&c);
                        self.push(CheckRecord::unmeasured(
                            &c.name,
                            tol,
                            Verdict::Skipped,
                            "barycenter did not converge",
                        ));
                    } else {
                        self.check(&c)?;
                    }
                }
                Ok(())
            }
        }
    }

    fn skip_all(&mut self, why: &str) {
        let tol = self.barycenter_tol();
        self.push(CheckRecord::unmeasured("barycenter", tol, Verdict::Skipped, why));
        for c in self.sc.checks.clone() {
            if c.name != "barycenter" {
                let tol = self.sc.tol_of(&c);
                self.push(CheckRecord::unmeasured(&c.name, tol, Verdict::Skipped, why));
            }
        }
    }

    fn spec(&self, name: &str) -> Option<&'a CheckSpec> {
        self.sc.checks.iter().find(|c| c.name == name)
    }

    fn barycenter_tol(&self) -> f64 {
        self.spec("barycenter").map_or(self.sc.tol, |c| self.sc.tol_of(c))
    }

    /// A point of `C` inside the generator's domain, for probes left unspecified.
    fn probe_point(&self, salt: u64) -> crate::Result<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.sc.seed);
        rng.set_stream(salt);
        for _ in 0..1000 {
            let p = self.action.set().sample(&mut rng)?;
            if self.g.domain_contains(&p) {
                return Ok(p);
            }
        }
        Err(Error::SamplerFailure("no sampled point fell inside the generator's domain".into()))
    }

    fn distance(&mut self) -> crate::Result<()> {
        let g = self.g;
        let x = self.sc.probe.x.clone().unwrap_or_else(|| self.action.base_point().to_vec());
        let y = self.sc.probe.y.clone().unwrap_or_else(|| self.action.set().interior_point());
        let z = match self.sc.probe.z.clone() {
            Some(z) => z,
            None => self.probe_point(1)?,
        };
        let (dxy, dyx) = bregman::asymmetry_witness(g, &x, &y)?;
        self.push(CheckRecord::measured(
            "nonnegativity",
            -dxy.min(dyx),
            self.sc.tol,
            json!({ "x": x, "y": y, "d_xy": dxy, "d_yx": dyx }),
        ));
        let terms = bregman::three_point_terms(g, &x, &y, &z)?;
        self.push(CheckRecord::measured(
            "three_point_identity",
            terms.residual().abs() / (1.0 + terms.scale()),
            THREE_POINT_TOL,
            json!({ "x": x, "y": y, "z": z, "d_xz": terms.d_xz, "d_xy": terms.d_xy, "d_yz": terms.d_yz, "cross": terms.cross }),
        ).with_note("relative residual |r| / (1 + scale)"));
        let fd = bregman::gradient_check(g, &x, 1e-6);
        self.push(match fd {
            Ok(v) => CheckRecord::measured("gradient_check", v, GRADIENT_TOL, json!({ "x": x, "step": 1e-6 })),
            Err(Error::Domain { .. }) => CheckRecord::unmeasured(
                "gradient_check",
                GRADIENT_TOL,
                Verdict::NotEvaluated,
                "finite-difference stencil leaves the domain",
            ),
            Err(e) => return Err(e),
        });
        Ok(())
    }

    fn project(&mut self) -> crate::Result<()> {
        let g = self.g;
        if !g.projection_capable() {
            let note = format!("`{}` does not support Bregman projections", g.name());
            self.push(CheckRecord::unmeasured("projection_certificate", PROJECTION_TOL, Verdict::NotEvaluated, &note));
            self.push(CheckRecord::unmeasured("variational_inequality", PROJECTION_TOL, Verdict::NotEvaluated, note));
            return Ok(());
        }
        let x = self.sc.probe.x.clone().unwrap_or_else(|| numeric::scale(self.action.base_point(), 2.0));
        let opts = ProjectionOptions { seed: self.sc.seed, certificate_samples: self.sc.samples, ..Default::default() };
        let p = projection::bregman_project(g, self.action.set(), &x, &opts)?;
        let witness =
            json!({ "x": x, "projection": p.point, "iterations": p.iterations, "objective_gap": p.objective_gap });
        self.push(CheckRecord::measured(
            "projection_certificate",
            p.certificate_violation,
            PROJECTION_TOL,
            witness.clone(),
        ));
        let vi = projection::variational_violation(g, self.action.set(), &x, &p.point, self.sc.samples, self.sc.seed)?;
        self.push(CheckRecord::measured("variational_inequality", vi, PROJECTION_TOL, witness));
        Ok(())
    }

    /// Runs every configured classification; true when all of them pass.
    fn classify(&mut self) -> crate::Result<bool> {
        let cs = &self.sc.classify;
        let cfg = ClassifyConfig {
            samples: cs.samples,
            seed: cs.seed,
            tol: cs.tol,
            exponent_radius: cs.exponent_radius,
            extra_pairs: cs.extra_pairs.clone(),
        };
        let mut all_pass = true;
        for t in &cs.types {
            let rec = match t {
                ClassifyType::Inequality(ineq) => {
                    let r = classify::classify(self.g, &self.action, *ineq, &cfg)?;
                    let mut rec = CheckRecord::measured(
                        format!("classify_{}", ineq.label()),
                        r.max_violation,
                        cfg.tol,
                        json!({
                            "witness": r.witness,
                            "samples_evaluated": r.samples_evaluated,
                            "left_set": r.left_set,
                            "skipped_domain": r.skipped_domain,
                        }),
                    );
                    if r.left_set > 0 {
                        rec = rec.with_note(format!("{} sampled images left the set", r.left_set));
                    }
                    rec
                }
                ClassifyType::Asymptotic => {
                    let y = cs.asymptotic_point.clone().unwrap_or_else(|| self.action.base_point().to_vec());
                    let search = IndexBox::origin(self.action.rank(), cs.search_side);
                    match classify::asymptotic_defect(self.g, &self.action, &y, cs.epsilon, &search, &cfg) {
                        Ok(w) => CheckRecord::measured(
                            "asymptotic_defect",
                            w.defect,
                            cs.epsilon,
                            json!({ "s_eps": w.s_eps, "candidates": w.candidates, "y": y }),
                        ),
                        Err(Error::NotFoundInBox { best_defect }) => {
                            self.report.warnings.not_found_in_box += 1;
                            log::warn!(
                                target: "bregman_lab::not_found_in_box",
                                "no asymptotic witness in box of side {} (best defect {best_defect:e}, epsilon {:e})",
                                cs.search_side,
                                cs.epsilon
                            );
                            CheckRecord::measured(
                                "asymptotic_defect",
                                best_defect,
                                cs.epsilon,
                                json!({ "search_side": cs.search_side, "y": y }),
                            )
                            .with_note("no witness in the search box")
                        }
                        Err(e) => return Err(e),
                    }
                }
            };
            all_pass &= rec.verdict != Verdict::Fail;
            self.push(rec);
        }
        Ok(all_pass)
    }

    fn ensure_barycenter(&mut self) -> crate::Result<&BarycenterResult> {
        if self.barycenter.is_none() {
            let r = means::barycenter_converge(&self.action, &self.means, self.barycenter_tol())?;
            if !r.converged {
                self.report.warnings.no_convergence += 1;
            }
            self.barycenter = Some(r);
        }
        Ok(self.barycenter.as_ref().expect("just computed"))
    }

    fn final_mean(&mut self) -> crate::Result<ApproximateMean> {
        let n = self.ensure_barycenter()?.schedule_tail.len();
        Ok(self.means[n - 1].clone())
    }

    fn record_barycenter(&mut self) -> crate::Result<()> {
        let tol = self.barycenter_tol();
        let r = self.ensure_barycenter()?;
        let rec = CheckRecord::measured(
            "barycenter",
            r.cauchy_gap,
            tol,
            json!({ "point": r.point, "final_side": r.final_side(), "converged": r.converged }),
        )
        .with_note("consecutive barycenter gap along the Folner schedule");
        self.push(rec);
        Ok(())
    }

    fn barycenter_command(&mut self) -> crate::Result<()> {
        self.record_barycenter()?;
        let in_set = self.spec("barycenter_in_set").cloned().unwrap_or_else(|| CheckSpec::named("barycenter_in_set"));
        self.check(&in_set)?;
        let minimizer = self.spec("minimizer_identity").cloned().unwrap_or_else(|| {
            let mut c = CheckSpec::named("minimizer_identity");
            c.tol = Some(THREE_POINT_TOL);
            c
        });
        self.check(&minimizer)?;
        Ok(())
    }

    fn check(&mut self, c: &CheckSpec) -> crate::Result<()> {
        let tol = self.sc.tol_of(c);
        let seed = self.sc.seed;
        let samples = c.samples.unwrap_or(self.sc.samples);
        let radius = c.exponent_radius.unwrap_or(self.sc.classify.exponent_radius);
        let g = self.g;
        match c.name.as_str() {
            "barycenter" => self.record_barycenter(),
            "fixed_point" => {
                let z = self.ensure_barycenter()?.point.clone();
                let rec = lab::verify_fixed_point(&self.action, &z, tol)?;
                self.push(rec);
                Ok(())
            }
            "attractive_membership" => {
                let z = self.ensure_barycenter()?.point.clone();
                let rec = lab::attractive_membership(g, &self.action, &z, samples, seed, radius, tol)?;
                self.push(rec);
                Ok(())
            }
            "sandwich" => {
                let z = self.ensure_barycenter()?.point.clone();
                let mean = self.final_mean()?;
                let side = c.truncation_side.unwrap_or(DEFAULT_TRUNCATION_SIDE);
                let s = lab::sup_inf_sandwich(g, &self.action, &z, side, &mean)?;
                let witness = json!({
                    "lower": s.lower, "middle": s.middle, "upper": s.upper,
                    "s_star": s.s_star, "truncation_side": s.truncation_side, "mean_side": s.mean_side,
                });
                self.push(
                    CheckRecord::measured("sandwich", s.ordering_violation(), tol, witness.clone())
                        .with_note("sup-inf <= mean <= inf-sup on the truncation box"),
                );
                let wants_equality =
                    c.tol_eq.is_some() || self.sc.classify.types.iter().any(|t| matches!(t, ClassifyType::Asymptotic));
                if wants_equality {
                    let tol_eq = c.tol_eq.unwrap_or(crate::scenario::DEFAULT_TOL_EQ);
                    self.push(
                        CheckRecord::measured("sandwich_equality", s.equality_gap(), tol_eq, witness)
                            .with_note("|inf-sup - sup-inf| on the truncation box"),
                    );
                }
                Ok(())
            }
            "mean_independence" => {
                let shift =
                    SemigroupElement(c.shift.clone().unwrap_or_else(|| vec![DEFAULT_MEAN_SHIFT; self.action.rank()]));
                let shifted: Vec<ApproximateMean> =
                    self.means.iter().map(|m| ApproximateMean::new(m.folner_set.translate(&shift))).collect();
                let r = lab::mean_independence(&self.action, &self.means, &shifted, self.barycenter_tol())?;
                self.report.warnings.no_convergence += u64::from(!r.first.converged) + u64::from(!r.second.converged);
                self.push(CheckRecord::measured(
                    "mean_independence",
                    r.distance,
                    tol,
                    json!({
                        "first": r.first.point, "first_side": r.first.final_side(),
                        "second": r.second.point, "second_side": r.second.final_side(),
                        "shift": shift,
                    }),
                ));
                Ok(())
            }
            "projection_limit" => {
                if !g.symmetric_distance() {
                    self.push(CheckRecord::unmeasured(
                        "projection_limit",
                        tol,
                        Verdict::NotEvaluated,
                        "attractive-set constraints are affine only under the squared norm",
                    ));
                    return Ok(());
                }
                let z = self.ensure_barycenter()?.point.clone();
                let model = AttractiveSetModel::sample(g, &self.action, samples, seed, radius)?;
                let t_max = c.t_max.unwrap_or(DEFAULT_T_MAX);
                let ts: Vec<SemigroupElement> =
                    (t_max / 2..=t_max).map(|t| SemigroupElement::uniform(self.action.rank(), t)).collect();
                let limits = match lab::attractive_projection_limit(&model, &self.action, &z, &ts) {
                    Err(Error::EmptyModel) => {
                        self.push(CheckRecord::unmeasured(
                            "projection_limit",
                            tol,
                            Verdict::NotEvaluated,
                            "every sampled constraint was trivial",
                        ));
                        return Ok(());
                    }
                    other => other?,
                };
                let worst = limits
                    .iter()
                    .fold(None::<&lab::LimitPoint>, |acc, l| match acc {
                        Some(a) if a.distance >= l.distance => Some(a),
                        _ => Some(l),
                    })
                    .expect("nonempty range");
                self.push(CheckRecord::measured(
                    "projection_limit",
                    worst.distance,
                    tol,
                    json!({ "t": worst.t, "constraints": model.len(), "t_range": [t_max / 2, t_max], "z": z }),
                ));
                Ok(())
            }
            "minimizer_identity" => {
                let x = match self.sc.probe.x.clone() {
                    Some(x) => x,
                    None => self.probe_point(2)?,
                };
                let mut worst = (f64::NEG_INFINITY, 0u64);
                for m in self.means.clone() {
                    let mi = means::minimizer_identity_residual(g, &self.action, &m, &x)?;
                    let rel = mi.residual() / (1.0 + mi.scale());
                    if rel > worst.0 {
                        worst = (rel, m.folner_set.side);
                    }
                }
                if let Some(b) = self.barycenter.as_mut() {
                    b.minimizer_residual = Some(worst.0);
                }
                self.push(
                    CheckRecord::measured("minimizer_identity", worst.0, tol, json!({ "x": x, "side": worst.1 }))
                        .with_note("largest relative residual over every Folner size"),
                );
                Ok(())
            }
            "barycenter_in_set" => {
                let z = self.ensure_barycenter()?.point.clone();
                let convex = self.action.set().is_convex();
                if (convex && !g.projection_capable()) || (!convex && !g.symmetric_distance()) {
                    self.push(CheckRecord::unmeasured(
                        "barycenter_in_set",
                        tol,
                        Verdict::NotEvaluated,
                        format!("`{}` does not support this projection", g.name()),
                    ));
                    return Ok(());
                }
                let opts = ProjectionOptions { seed, ..Default::default() };
                let r = means::barycenter_in_set(g, &self.action, &z, &opts)?;
                if let Some(b) = self.barycenter.as_mut() {
                    b.in_set_residual = Some(r);
                }
                self.push(CheckRecord::measured(
                    "barycenter_in_set",
                    r,
                    tol,
                    json!({ "z": z, "set": self.action.set().name() }),
                ));
                Ok(())
            }
            "orbit_diagnostics" => {
                let side = c.side.unwrap_or(DEFAULT_DIAGNOSTIC_SIDE);
                let eps = c.epsilon.unwrap_or(DEFAULT_NET_EPSILON);
                let bx = IndexBox::origin(self.action.rank(), side);
                let d = lab::orbit_diagnostics(g, &self.action, &bx, eps, samples, seed)?;
                self.push(CheckRecord::measured(
                    "orbit_diagnostics",
                    d.nonexpansive_violation,
                    tol,
                    json!({
                        "witness": d.witness, "net_size": d.net_size, "epsilon": d.epsilon,
                        "lipschitz_estimate": d.lipschitz_estimate, "side": side,
                    }),
                ));
                Ok(())
            }
            "commutation" => {
                let v = self.action.commutation_defect(samples, seed)?;
                self.push(CheckRecord::measured("commutation", v, tol, json!({ "samples": samples })));
                Ok(())
            }
            "invariance" => {
                let v = self.action.invariance_defect(samples, seed)?;
                self.push(CheckRecord::measured("invariance", v, tol, json!({ "samples": samples })));
                Ok(())
            }
            other => Err(Error::InvalidArgument(format!("unknown check `{other}`"))),
        }
    }
}

/// `D_g(x, y)` on a grid for `g = x²` and `g = x log x`, as CSV.
pub fn curves_csv(ys: &[f64], xs: &[f64]) -> crate::Result<String> {
    let mut out = String::from("generator,y,x,distance\n");
    for g in [Generator::sq_norm(1), Generator::neg_entropy(1)] {
        for &y in ys {
            for &x in xs {
                let d = bregman::bregman_distance(&g, &[x], &[y])?;
                let _ = writeln!(out, "{},{y},{x},{d:e}", g.name());
            }
        }
    }
    Ok(out)
}

/// The default grid for `curves`.
pub fn default_curve_grid() -> (Vec<f64>, Vec<f64>) {
    (vec![0.5, 1.0, 2.0], (1..=60).map(|i| i as f64 * 0.05).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{parse_scenario, Overrides};

    fn scenario(text: &str) -> Scenario {
        Scenario::from_file(parse_scenario(text).unwrap(), &Overrides::default()).unwrap()
    }

    const ROTATION: &str = r#"{
        "id": "rot4",
        "generator": {"name": "sq_norm", "dimension": 2},
        "set": {"set": "ball", "center": [0, 0], "radius": 1},
        "action": {"generators": [{"kind": "rotation", "angle": 1.5707963267948966, "order": 4}], "base_point": [1, 0],
                   "classify": {"types": ["generalized_hybrid"], "alpha": 1, "beta": 0, "samples": 200}},
        "folner": {"kind": "boxes", "sizes": [100, 1000]},
        "checks": [{"name": "fixed_point", "tol": 1e-12}, {"name": "commutation"}],
        "seed": 3
    }"#;

    #[test]
    fn all_runs_the_pipeline_in_order() {
        let r = run(&scenario(ROTATION), Command::All).unwrap();
        let names: Vec<&str> = r.checks.iter().map(|c| c.check.as_str()).collect();
        assert_eq!(names, ["classify_generalized_hybrid(1,0)", "barycenter", "fixed_point", "commutation"]);
        assert!(r.checks.iter().all(|c| c.passed()), "{}", r.to_json());
        assert_eq!(r.exit_code(), 0);
    }

    #[test]
    fn failed_classification_skips_the_rest() {
        let text = ROTATION
            .replace(
                r#""kind": "rotation", "angle": 1.5707963267948966, "order": 4"#,
                r#""kind": "scaling", "factor": 2"#,
            )
            .replace(r#""base_point": [1, 0]"#, r#""base_point": [0.1, 0]"#)
            .replace(r#""radius": 1}"#, r#""radius": 100}"#);
        let r = run(&scenario(&text), Command::All).unwrap();
        assert_eq!(r.checks[0].verdict, Verdict::Fail);
        assert!(r.checks[1..].iter().all(|c| c.verdict == Verdict::Skipped));
        assert_eq!(r.exit_code(), 1);
    }

    #[test]
    fn empty_check_list_verifies_to_an_empty_report() {
        let text = ROTATION.replace(
            r#""checks": [{"name": "fixed_point", "tol": 1e-12}, {"name": "commutation"}]"#,
            r#""checks": []"#,
        );
        let r = run(&scenario(&text), Command::Verify).unwrap();
        assert!(r.checks.is_empty());
        assert_eq!(r.exit_code(), 0);
    }

    #[test]
    fn distance_and_project_commands() {
        let sc = scenario(ROTATION);
        let d = run(&sc, Command::Distance).unwrap();
        assert!(d.checks.iter().all(|c| c.passed()), "{}", d.to_json());
        let p = run(&sc, Command::Project).unwrap();
        assert!(p.checks.iter().all(|c| c.passed()), "{}", p.to_json());
        let proj = &p.checks[0].witness["projection"];
        assert!((proj[0].as_f64().unwrap() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn barycenter_command_certifies_the_point() {
        let r = run(&scenario(ROTATION), Command::Barycenter).unwrap();
        let b = r.barycenter.as_ref().unwrap();
        assert!(numeric::norm(&b.point) < 1e-12);
        assert!(b.in_set_residual.unwrap() < 1e-12);
        assert!(b.minimizer_residual.unwrap() < 1e-10);
    }

    #[test]
    fn curves_cover_both_generators() {
        let (ys, xs) = default_curve_grid();
        let csv = curves_csv(&ys, &xs).unwrap();
        assert_eq!(csv.lines().count(), 1 + 2 * ys.len() * xs.len());
        assert!(csv.contains("sq_norm,1,1,0e0"));
    }
}
