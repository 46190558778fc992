//! Scenario files: parsing, validation and defaults.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::actions::{ActionSpec, GeneratorMap};
use crate::bregman::{BregmanGenerator, Generator, GeneratorKind};
use crate::classify::Inequality;
use crate::means::FolnerSchedule;
use crate::sets::ConvexSet;

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_SAMPLES: usize = 1000;
pub const DEFAULT_SIZES: [u64; 3] = [100, 1000, 10_000];
pub const DEFAULT_EXPONENT_RADIUS: u64 = 4;
pub const DEFAULT_TOL_EQ: f64 = 1e-3;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {message}")]
    Io { path: PathBuf, message: String },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },

    #[error("invalid scenario:\n  {}", .0.join("\n  "))]
    Validation(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub name: String,
    pub dimension: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifySpec {
    #[serde(default)]
    pub types: Vec<String>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default)]
    pub samples: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub exponent_radius: Option<u64>,
    #[serde(default)]
    pub extra_pairs: Vec<(Vec<f64>, Vec<f64>)>,
    /// Asymptotic search: ε, the search-box side and the point `y`.
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub search_side: Option<u64>,
    #[serde(default)]
    pub asymptotic_point: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionFile {
    pub generators: Vec<GeneratorMap>,
    pub base_point: Vec<f64>,
    #[serde(default)]
    pub classify: Option<ClassifySpec>,
}

/// A named verification with its tolerance and optional parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSpec {
    pub name: String,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub tol_eq: Option<f64>,
    #[serde(default)]
    pub samples: Option<usize>,
    #[serde(default)]
    pub exponent_radius: Option<u64>,
    #[serde(default)]
    pub truncation_side: Option<u64>,
    #[serde(default)]
    pub shift: Option<Vec<u64>>,
    #[serde(default)]
    pub t_max: Option<u64>,
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub side: Option<u64>,
}

impl CheckSpec {
    pub fn named(name: &str) -> Self {
        Self {
            name: name.to_string(),
            tol: None,
            tol_eq: None,
            samples: None,
            exponent_radius: None,
            truncation_side: None,
            shift: None,
            t_max: None,
            epsilon: None,
            side: None,
        }
    }
}

pub const CHECK_NAMES: [&str; 11] = [
    "barycenter",
    "fixed_point",
    "attractive_membership",
    "sandwich",
    "mean_independence",
    "projection_limit",
    "minimizer_identity",
    "barycenter_in_set",
    "orbit_diagnostics",
    "commutation",
    "invariance",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Probe {
    #[serde(default)]
    pub x: Option<Vec<f64>>,
    #[serde(default)]
    pub y: Option<Vec<f64>>,
    #[serde(default)]
    pub z: Option<Vec<f64>>,
}

/// The file format, before validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub id: String,
    pub generator: GeneratorSpec,
    pub set: ConvexSet,
    pub action: ActionFile,
    #[serde(default)]
    pub folner: Option<FolnerSchedule>,
    #[serde(default)]
    pub checks: Option<Vec<CheckSpec>>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub probe: Option<Probe>,
    /// Allows non-convex sets, which only make sense as negative controls.
    #[serde(default)]
    pub diagnostic: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ClassifyType {
    Inequality(Inequality),
    Asymptotic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifySettings {
    pub types: Vec<ClassifyType>,
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
    pub exponent_radius: u64,
    pub extra_pairs: Vec<(Vec<f64>, Vec<f64>)>,
    pub epsilon: f64,
    pub search_side: u64,
    pub asymptotic_point: Option<Vec<f64>>,
}

/// A validated scenario with every default filled in.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub id: String,
    pub generator: Generator,
    pub action: ActionSpec,
    pub folner: FolnerSchedule,
    pub checks: Vec<CheckSpec>,
    pub seed: u64,
    pub tol: f64,
    pub samples: usize,
    pub classify: ClassifySettings,
    pub probe: Probe,
    pub diagnostic: bool,
    /// Human-readable notes for each default that was applied.
    pub defaults_applied: Vec<String>,
}

/// Command-line overrides applied while filling defaults.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub samples: Option<usize>,
    pub folner_max: Option<u64>,
}

pub fn parse_scenario(text: &str) -> Result<ScenarioFile, ScenarioError> {
    serde_json::from_str(text).map_err(|e| ScenarioError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

pub fn load_scenario(path: &Path, overrides: &Overrides) -> Result<Scenario, ScenarioError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ScenarioError::Io { path: path.to_path_buf(), message: e.to_string() })?;
    Scenario::from_file(parse_scenario(&text)?, overrides)
}

fn parse_type(name: &str, alpha: f64, beta: f64) -> Option<ClassifyType> {
    Some(match name {
        "nonexpansive" => ClassifyType::Inequality(Inequality::Nonexpansive),
        "nonspreading" => ClassifyType::Inequality(Inequality::Nonspreading),
        "generalized_hybrid" | "hybrid" => ClassifyType::Inequality(Inequality::GeneralizedHybrid { alpha, beta }),
        "asymptotic" | "asymptotically_nonexpansive" => ClassifyType::Asymptotic,
        _ => return None,
    })
}

impl Scenario {
    pub fn from_file(file: ScenarioFile, overrides: &Overrides) -> Result<Self, ScenarioError> {
        let mut problems = Vec::new();
        let mut defaults = Vec::new();
        let dim = file.generator.dimension;

        if file.id.trim().is_empty() {
            problems.push("id: must be nonempty".to_string());
        }
        let generator = match GeneratorKind::from_identifier(&file.generator.name) {
            None => {
                problems.push(format!(
                    "generator.name: unknown generator `{}` (expected one of {})",
                    file.generator.name,
                    GeneratorKind::ALL.map(|k| k.identifier()).join(", ")
                ));
                None
            }
            Some(_) if dim == 0 => {
                problems.push("generator.dimension: must be positive".to_string());
                None
            }
            Some(kind) => Generator::new(kind, dim).ok(),
        };

        let mut set = file.set.clone();
        if let ConvexSet::Simplex { dimension } = &mut set {
            if *dimension == 0 {
                *dimension = dim;
                defaults.push(format!("set.dimension = {dim} (from generator.dimension)"));
            }
        }
        for p in set.validate() {
            problems.push(format!("set: {p}"));
        }
        if set.dimension() != dim {
            problems.push(format!("set.dimension is {} but generator.dimension is {dim}", set.dimension()));
        }
        if !set.is_convex() && !file.diagnostic {
            problems.push(format!("set: `{}` is not convex; allowed only with \"diagnostic\": true", set.name()));
        }

        let base = &file.action.base_point;
        if base.len() != dim {
            problems.push(format!("action.base_point has length {} but generator.dimension is {dim}", base.len()));
        } else {
            if set.dimension() == dim && !set.contains(base, 1e-9) {
                problems.push("action.base_point: not inside the set".to_string());
            }
            if let Some(g) = &generator {
                if !g.domain_contains(base) {
                    problems.push(format!("action.base_point: outside the domain of `{}`", g.name()));
                }
            }
        }
        if file.action.generators.is_empty() {
            problems.push("action.generators: at least one generator is required".to_string());
        }
        for (i, g) in file.action.generators.iter().enumerate() {
            problems.extend(g.validate(dim, &format!("action.generators[{i}]")));
        }
        let rank = file.action.generators.len();

        let seed = match (overrides.seed, file.seed) {
            (Some(s), _) => s,
            (None, Some(s)) => s,
            (None, None) => {
                defaults.push("seed = 0".to_string());
                0
            }
        };
        let tol = overrides.tol.unwrap_or(DEFAULT_TOL);
        let samples = overrides.samples.unwrap_or(DEFAULT_SAMPLES);

        let mut folner = match file.folner.clone() {
            Some(f) => f,
            None => {
                defaults.push(format!("folner = boxes {:?}", DEFAULT_SIZES));
                FolnerSchedule::boxes(DEFAULT_SIZES.to_vec())
            }
        };
        problems.extend(folner.validate(rank));
        if let Some(max) = overrides.folner_max {
            folner.sizes.retain(|&s| s <= max);
            folner.boxes.retain(|b| b.side <= max);
            if folner.sizes.is_empty() && folner.boxes.is_empty() {
                problems.push(format!("--folner-max {max} removes every Folner box"));
            }
        }

        let spec = file.action.classify.clone().unwrap_or_else(|| {
            defaults.push("action.classify = {} (no classification types)".to_string());
            ClassifySpec {
                types: Vec::new(),
                alpha: None,
                beta: None,
                samples: None,
                seed: None,
                tol: None,
                exponent_radius: None,
                extra_pairs: Vec::new(),
                epsilon: None,
                search_side: None,
                asymptotic_point: None,
            }
        });
        let needs_hybrid = spec.types.iter().any(|t| t == "generalized_hybrid" || t == "hybrid");
        let alpha = spec.alpha.unwrap_or_else(|| {
            if needs_hybrid {
                defaults.push("action.classify.alpha = 1".to_string());
            }
            1.0
        });
        let beta = spec.beta.unwrap_or_else(|| {
            if needs_hybrid {
                defaults.push("action.classify.beta = 0".to_string());
            }
            0.0
        });
        let mut types = Vec::new();
        for t in &spec.types {
            match parse_type(t, alpha, beta) {
                Some(ct) => types.push(ct),
                None => problems.push(format!("action.classify.types: unknown type `{t}`")),
            }
        }
        let class_samples = match (overrides.samples, spec.samples) {
            (Some(n), _) => n,
            (None, Some(n)) => n,
            (None, None) => {
                defaults.push(format!("action.classify.samples = {DEFAULT_SAMPLES}"));
                DEFAULT_SAMPLES
            }
        };
        let class_tol = spec.tol.unwrap_or_else(|| {
            defaults.push(format!("action.classify.tol = {tol:e}"));
            tol
        });
        for (i, (x, y)) in spec.extra_pairs.iter().enumerate() {
            if x.len() != dim || y.len() != dim {
                problems.push(format!("action.classify.extra_pairs[{i}]: points must have dimension {dim}"));
            }
        }
        if let Some(p) = &spec.asymptotic_point {
            if p.len() != dim {
                problems.push(format!("action.classify.asymptotic_point: length {} differs from {dim}", p.len()));
            }
        }
        let classify = ClassifySettings {
            types,
            samples: class_samples,
            seed: spec.seed.unwrap_or(seed),
            tol: class_tol,
            exponent_radius: spec.exponent_radius.unwrap_or(DEFAULT_EXPONENT_RADIUS),
            extra_pairs: spec.extra_pairs.clone(),
            epsilon: spec.epsilon.unwrap_or(0.1),
            search_side: spec.search_side.unwrap_or(5),
            asymptotic_point: spec.asymptotic_point.clone(),
        };

        let checks = match file.checks.clone() {
            Some(c) => c,
            None => {
                defaults.push("checks = []".to_string());
                Vec::new()
            }
        };
        for (i, c) in checks.iter().enumerate() {
            if !CHECK_NAMES.contains(&c.name.as_str()) {
                problems.push(format!("checks[{i}].name: unknown check `{}`", c.name));
            }
            if let Some(t) = c.tol {
                if !(t >= 0.0) {
                    problems.push(format!("checks[{i}].tol: must be nonnegative"));
                }
            }
            if let Some(s) = &c.shift {
                if s.len() != rank {
                    problems.push(format!("checks[{i}].shift: length {} differs from {rank} generators", s.len()));
                }
            }
        }

        let probe = file.probe.clone().unwrap_or(Probe { x: None, y: None, z: None });
        for (name, p) in [("x", &probe.x), ("y", &probe.y), ("z", &probe.z)] {
            if let Some(p) = p {
                if p.len() != dim {
                    problems.push(format!("probe.{name}: length {} differs from generator.dimension {dim}", p.len()));
                }
            }
        }

        if !problems.is_empty() {
            return Err(ScenarioError::Validation(problems));
        }
        let generator = generator.expect("validated");
        let action = ActionSpec::new(file.action.generators.clone(), set, base.clone())
            .map_err(|e| ScenarioError::Validation(vec![format!("action: {e}")]))?;
        Ok(Scenario {
            id: file.id,
            generator,
            action,
            folner,
            checks,
            seed,
            tol,
            samples,
            classify,
            probe,
            diagnostic: file.diagnostic,
            defaults_applied: defaults,
        })
    }

    /// Tolerance of a check, falling back to the scenario default.
    pub fn tol_of(&self, check: &CheckSpec) -> f64 {
        check.tol.unwrap_or(self.tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "id": "mini",
        "generator": {"name": "sq_norm", "dimension": 2},
        "set": {"set": "ball", "center": [0, 0], "radius": 1},
        "action": {"generators": [{"kind": "rotation", "angle": 1.5707963267948966, "order": 4}], "base_point": [1, 0]}
    }"#;

    #[test]
    fn defaults_are_filled_and_recorded() {
        let s = Scenario::from_file(parse_scenario(MINIMAL).unwrap(), &Overrides::default()).unwrap();
        assert_eq!(s.tol, DEFAULT_TOL);
        assert_eq!(s.classify.samples, DEFAULT_SAMPLES);
        assert_eq!(s.folner.sizes, DEFAULT_SIZES.to_vec());
        assert!(s.defaults_applied.iter().any(|d| d.starts_with("seed")));
        assert!(s.defaults_applied.iter().any(|d| d.starts_with("folner")));
        assert!(s.checks.is_empty());
    }

    #[test]
    fn parse_errors_carry_positions() {
        let err = parse_scenario("{\n  \"id\": \"x\",\n  oops\n}").unwrap_err();
        match err {
            ScenarioError::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn validation_lists_every_problem() {
        let text = r#"{
            "id": "bad",
            "generator": {"name": "sq_norm", "dimension": 2},
            "set": {"set": "ball", "center": [0, 0, 0], "radius": 1},
            "action": {"generators": [{"kind": "scaling", "factor": 0.5}], "base_point": [1, 0, 0],
                       "classify": {"types": ["nonexpansive", "bogus"]}},
            "checks": [{"name": "no_such_check"}]
        }"#;
        let err = Scenario::from_file(parse_scenario(text).unwrap(), &Overrides::default()).unwrap_err();
        let ScenarioError::Validation(problems) = err else { panic!() };
        let all = problems.join("\n");
        assert!(all.contains("set.dimension") && all.contains("generator.dimension"), "{all}");
        assert!(all.contains("action.base_point"));
        assert!(all.contains("bogus"));
        assert!(all.contains("no_such_check"));
        assert!(problems.len() >= 4);
    }

    #[test]
    fn nonconvex_sets_need_the_diagnostic_flag() {
        let text = MINIMAL.replace(
            r#""set": "ball", "center": [0, 0], "radius": 1"#,
            r#""set": "circle", "center": [0, 0], "radius": 1"#,
        );
        assert!(Scenario::from_file(parse_scenario(&text).unwrap(), &Overrides::default()).is_err());
        let flagged = text.replacen('{', "{\"diagnostic\": true,", 1);
        assert!(Scenario::from_file(parse_scenario(&flagged).unwrap(), &Overrides::default()).is_ok());
    }

    #[test]
    fn overrides_win() {
        let o = Overrides { seed: Some(42), tol: Some(1e-6), samples: Some(10), folner_max: Some(1000) };
        let s = Scenario::from_file(parse_scenario(MINIMAL).unwrap(), &o).unwrap();
        assert_eq!((s.seed, s.tol, s.classify.samples), (42, 1e-6, 10));
        assert_eq!(s.folner.sizes, vec![100, 1000]);
    }
}
