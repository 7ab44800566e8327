//! Experiment configuration: a JSON document validated in one pass so that
//! every problem is reported together with its path.

use std::fmt;
use std::path::PathBuf;

use finsum_bounds::solvers::{SolverConfig, SolverKind};
use serde::Serialize;
use serde_json::{Map, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    /// Solvers on the fixed separable hard instance.
    HardStatic,
    /// Solvers against the single-function resisting oracle.
    ResistSingle,
    /// Solvers against the incremental resisting oracle, one adversary per component.
    ResistIfo,
    /// Solvers on regularized least squares over sphere data, plus the complexity table.
    Rls,
    /// Complexity table for sphere data; solvers optional.
    BoundsTable,
}

impl ExperimentKind {
    pub const NAMES: [&'static str; 5] = ["hard-static", "resist-single", "resist-ifo", "rls", "bounds-table"];

    pub fn name(self) -> &'static str {
        match self {
            Self::HardStatic => "hard-static",
            Self::ResistSingle => "resist-single",
            Self::ResistIfo => "resist-ifo",
            Self::Rls => "rls",
            Self::BoundsTable => "bounds-table",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        [Self::HardStatic, Self::ResistSingle, Self::ResistIfo, Self::Rls, Self::BoundsTable]
            .into_iter()
            .find(|k| k.name() == s)
    }

    pub fn is_resisting(self) -> bool {
        matches!(self, Self::ResistSingle | Self::ResistIfo)
    }

    pub fn uses_dataset(self) -> bool {
        matches!(self, Self::Rls | Self::BoundsTable)
    }
}

/// Instance parameters. Fields that do not apply to the kind keep their
/// defaults and are ignored.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InstanceConfig {
    pub n: usize,
    pub mu: f64,
    /// Smoothness constant of the class; derived from the data for dataset kinds.
    #[serde(rename = "L")]
    pub l: Option<f64>,
    pub gamma: f64,
    /// Dimension per component (hard and resisting kinds).
    pub dim: usize,
    /// Row norm of the sphere data.
    #[serde(rename = "R")]
    pub radius: f64,
    pub d: usize,
    pub noise: f64,
    pub data_seed: u64,
    /// Target accuracy for rate reports and calls-to-accuracy summaries.
    pub eps: f64,
    /// Failure probability of the concentration check.
    pub delta: f64,
}

impl InstanceConfig {
    pub fn kappa(&self) -> Option<f64> {
        self.l.map(|l| l / self.mu)
    }
}

/// One solver entry with its overrides.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolverSpec {
    pub kind: SolverKind,
    pub budget: usize,
    pub seeds: Vec<u64>,
    pub step: Option<f64>,
    pub epoch_len: Option<usize>,
    pub mu_eff: Option<f64>,
    pub l_eff: Option<f64>,
    pub sample_every: Option<usize>,
}

impl SolverSpec {
    /// Seeds this solver runs with: one run for deterministic methods.
    pub fn run_seeds(&self) -> Vec<Option<u64>> {
        if self.kind.is_deterministic() {
            vec![None]
        } else {
            self.seeds.iter().copied().map(Some).collect()
        }
    }

    pub fn solver_config(&self, seed: Option<u64>) -> SolverConfig {
        let mut c = SolverConfig::new(self.kind, self.budget).with_seed(seed.unwrap_or(0));
        c.step = self.step;
        c.epoch_len = self.epoch_len;
        c.mu_eff = self.mu_eff;
        c.l_eff = self.l_eff;
        c.sample_every = self.sample_every;
        c
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub instance: InstanceConfig,
    pub solvers: Vec<SolverSpec>,
    pub budget: usize,
    pub seeds: Vec<u64>,
    pub output_dir: PathBuf,
}

pub const DEFAULT_BUDGET: usize = 1000;
pub const DEFAULT_OUTPUT_DIR: &str = "finsum-out";

/// A validation problem at a JSON path such as `solvers[2].budget`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigIssue {
    pub path: String,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

struct Issues(Vec<ConfigIssue>);

impl Issues {
    fn push(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.0.push(ConfigIssue {
            path: path.into(),
            message: message.into(),
        });
    }
}

/// Typed access to the fields of one JSON object; unknown keys are reported
/// when the reader is closed.
struct Fields<'a> {
    obj: &'a Map<String, Value>,
    prefix: String,
    seen: Vec<&'static str>,
}

impl<'a> Fields<'a> {
    fn new(obj: &'a Map<String, Value>, prefix: impl Into<String>) -> Self {
        Self {
            obj,
            prefix: prefix.into(),
            seen: Vec::new(),
        }
    }

    fn path(&self, key: &str) -> String {
        if self.prefix.is_empty() {
            key.to_string()
        } else {
            format!("{}.{key}", self.prefix)
        }
    }

    fn raw(&mut self, key: &'static str) -> Option<&'a Value> {
        self.seen.push(key);
        self.obj.get(key).filter(|v| !v.is_null())
    }

    fn f64(&mut self, key: &'static str, issues: &mut Issues) -> Option<f64> {
        let v = self.raw(key)?;
        match v.as_f64() {
            Some(x) if x.is_finite() => Some(x),
            _ => {
                issues.push(self.path(key), format!("expected a finite number, got {v}"));
                None
            }
        }
    }

    fn positive(&mut self, key: &'static str, issues: &mut Issues) -> Option<f64> {
        let x = self.f64(key, issues)?;
        if x > 0.0 {
            Some(x)
        } else {
            issues.push(self.path(key), format!("must be positive, got {x}"));
            None
        }
    }

    fn u64(&mut self, key: &'static str, issues: &mut Issues) -> Option<u64> {
        let v = self.raw(key)?;
        match v.as_u64() {
            Some(x) => Some(x),
            None => {
                issues.push(self.path(key), format!("expected a non-negative integer, got {v}"));
                None
            }
        }
    }

    fn count(&mut self, key: &'static str, issues: &mut Issues) -> Option<usize> {
        let x = self.u64(key, issues)?;
        if x == 0 {
            issues.push(self.path(key), "must be positive");
            return None;
        }
        match usize::try_from(x) {
            Ok(x) => Some(x),
            Err(_) => {
                issues.push(self.path(key), "value too large");
                None
            }
        }
    }

    fn seeds(&mut self, key: &'static str, issues: &mut Issues) -> Option<Vec<u64>> {
        let v = self.raw(key)?;
        let path = self.path(key);
        let Some(items) = v.as_array() else {
            issues.push(path, format!("expected an array of seeds, got {v}"));
            return None;
        };
        if items.is_empty() {
            issues.push(path, "must list at least one seed");
            return None;
        }
        let mut out = Vec::new();
        for (j, s) in items.iter().enumerate() {
            match s.as_u64() {
                Some(s) => out.push(s),
                None => issues.push(format!("{path}[{j}]"), format!("expected a non-negative integer, got {s}")),
            }
        }
        (out.len() == items.len()).then_some(out)
    }

    fn close(self, issues: &mut Issues) {
        for key in self.obj.keys() {
            if !self.seen.contains(&key.as_str()) {
                issues.push(self.path(key), "unknown field");
            }
        }
    }
}

/// Parses and validates a configuration document. Either the whole config
/// is valid or every problem found is returned.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, Vec<ConfigIssue>> {
    let doc: Value = serde_json::from_str(text).map_err(|e| {
        vec![ConfigIssue {
            path: "$".into(),
            message: format!("not a JSON document: {e}"),
        }]
    })?;
    let Some(root) = doc.as_object() else {
        return Err(vec![ConfigIssue {
            path: "$".into(),
            message: "expected a JSON object".into(),
        }]);
    };
    let mut issues = Issues(Vec::new());
    let mut top = Fields::new(root, "");

    let kind = match top.raw("kind") {
        None => {
            issues.push("kind", format!("missing; one of {}", ExperimentKind::NAMES.join(", ")));
            None
        }
        Some(v) => match v.as_str().and_then(ExperimentKind::parse) {
            Some(k) => Some(k),
            None => {
                issues.push("kind", format!("expected one of {}, got {v}", ExperimentKind::NAMES.join(", ")));
                None
            }
        },
    };
    let budget = top.count("budget", &mut issues).unwrap_or(DEFAULT_BUDGET);
    let seeds = top.seeds("seeds", &mut issues).unwrap_or_else(|| vec![0]);
    let output_dir = match top.raw("output_dir") {
        None => PathBuf::from(DEFAULT_OUTPUT_DIR),
        Some(v) => match v.as_str() {
            Some(s) if !s.is_empty() => PathBuf::from(s),
            _ => {
                issues.push("output_dir", format!("expected a non-empty path string, got {v}"));
                PathBuf::from(DEFAULT_OUTPUT_DIR)
            }
        },
    };

    let empty = Map::new();
    let instance_obj = match top.raw("instance") {
        None => &empty,
        Some(v) => match v.as_object() {
            Some(o) => o,
            None => {
                issues.push("instance", format!("expected an object, got {v}"));
                &empty
            }
        },
    };
    let instance = parse_instance(instance_obj, kind, &mut issues);

    let mut solvers = Vec::new();
    match top.raw("solvers") {
        None => {}
        Some(Value::Array(items)) => {
            for (j, item) in items.iter().enumerate() {
                if let Some(s) = parse_solver(item, j, budget, &seeds, &mut issues) {
                    if solvers.iter().any(|o: &SolverSpec| o.kind == s.kind) {
                        issues.push(format!("solvers[{j}]"), format!("duplicate solver {:?}", s.kind.name()));
                    } else {
                        solvers.push(s);
                    }
                }
            }
        }
        Some(v) => issues.push("solvers", format!("expected an array, got {v}")),
    }
    if solvers.is_empty() && kind.is_some_and(|k| k != ExperimentKind::BoundsTable) && issues.0.is_empty() {
        issues.push("solvers", "at least one solver is required for this kind");
    }
    top.close(&mut issues);

    match (kind, issues.0.is_empty()) {
        (Some(kind), true) => Ok(ExperimentConfig {
            kind,
            instance,
            solvers,
            budget,
            seeds,
            output_dir,
        }),
        _ => Err(issues.0),
    }
}

fn parse_instance(obj: &Map<String, Value>, kind: Option<ExperimentKind>, issues: &mut Issues) -> InstanceConfig {
    let mut f = Fields::new(obj, "instance");
    let n = f.count("n", issues);
    let mu_given = f.positive("mu", issues);
    let l = f.positive("L", issues);
    let kappa = f.f64("kappa", issues);
    let gamma = f.positive("gamma", issues).unwrap_or(1.0);
    let dim = f.count("dim", issues).unwrap_or(512);
    let radius = f.positive("R", issues).unwrap_or(1.0);
    let d = f.count("d", issues).unwrap_or(50);
    let noise = match f.f64("noise", issues) {
        Some(x) if x < 0.0 => {
            issues.push("instance.noise", format!("must be non-negative, got {x}"));
            0.1
        }
        Some(x) => x,
        None => 0.1,
    };
    let data_seed = f.u64("data_seed", issues).unwrap_or(2024);
    let eps = match f.f64("eps", issues) {
        Some(x) if !(x > 0.0 && x < 1.0) => {
            issues.push("instance.eps", format!("must lie in (0, 1), got {x}"));
            1e-6
        }
        Some(x) => x,
        None => 1e-6,
    };
    let delta = match f.f64("delta", issues) {
        Some(x) if !(x > 0.0 && x < 1.0) => {
            issues.push("instance.delta", format!("must lie in (0, 1), got {x}"));
            0.01
        }
        Some(x) => x,
        None => 0.01,
    };
    f.close(issues);

    let n = match (kind, n) {
        (Some(ExperimentKind::ResistSingle), Some(m)) if m != 1 => {
            issues.push("instance.n", format!("resist-single uses one function, got n = {m}"));
            1
        }
        (Some(ExperimentKind::ResistSingle), _) => 1,
        (Some(k), None) if k.uses_dataset() => 2000,
        (_, Some(m)) => m,
        (_, None) => 8,
    };
    let dataset = kind.is_some_and(ExperimentKind::uses_dataset);
    let mu = mu_given.unwrap_or(if dataset { 1.0 / n as f64 } else { 1.0 });

    let mut l_out = None;
    if dataset {
        if l.is_some() {
            issues.push("instance.L", "not used for dataset kinds: smoothness follows from R and mu");
        }
        if kappa.is_some() {
            issues.push("instance.kappa", "not used for dataset kinds: smoothness follows from R and mu");
        }
    } else {
        if let Some(k) = kappa {
            if k <= 1.0 {
                issues.push("instance.kappa", format!("must exceed 1, got {k}"));
            }
        }
        l_out = match (l, kappa) {
            (Some(l), Some(k)) => {
                if (l / mu - k).abs() > 1e-12 * k.abs().max(1.0) {
                    issues.push(
                        "instance.kappa, instance.L",
                        format!("inconsistent: kappa = {k} but L/mu = {l}/{mu} = {}", l / mu),
                    );
                }
                Some(l)
            }
            (Some(l), None) => Some(l),
            (None, Some(k)) => Some(k * mu),
            (None, None) => Some(101.0 * mu),
        };
        if let (Some(l), None) = (l, kappa) {
            if l <= mu {
                issues.push("instance.L", format!("must exceed mu = {mu}, got {l}"));
            }
        }
    }
    InstanceConfig {
        n,
        mu,
        l: l_out,
        gamma,
        dim,
        radius,
        d,
        noise,
        data_seed,
        eps,
        delta,
    }
}

fn parse_solver(item: &Value, j: usize, budget: usize, seeds: &[u64], issues: &mut Issues) -> Option<SolverSpec> {
    let path = format!("solvers[{j}]");
    let known = SolverKind::ALL.map(SolverKind::name).join(", ");
    let name_kind = |v: &Value, issues: &mut Issues, at: String| match v.as_str() {
        Some(s) => match s.parse::<SolverKind>() {
            Ok(k) => Some(k),
            Err(_) => {
                issues.push(at, format!("unknown solver {s:?}; known: {known}"));
                None
            }
        },
        None => {
            issues.push(at, format!("expected a solver name, got {v}"));
            None
        }
    };
    match item {
        Value::String(_) => {
            let kind = name_kind(item, issues, path)?;
            Some(SolverSpec {
                kind,
                budget,
                seeds: seeds.to_vec(),
                step: None,
                epoch_len: None,
                mu_eff: None,
                l_eff: None,
                sample_every: None,
            })
        }
        Value::Object(obj) => {
            let mut f = Fields::new(obj, path.clone());
            let kind = match f.raw("name") {
                Some(v) => name_kind(v, issues, format!("{path}.name")),
                None => {
                    issues.push(format!("{path}.name"), "missing solver name");
                    None
                }
            };
            let spec_budget = f.count("budget", issues);
            let spec_seeds = f.seeds("seeds", issues);
            let step = f.positive("step", issues);
            let epoch_len = f.count("epoch_len", issues);
            let mu_eff = f.positive("mu_eff", issues);
            let l_eff = f.positive("l_eff", issues);
            let sample_every = f.count("sample_every", issues);
            f.close(issues);
            Some(SolverSpec {
                kind: kind?,
                budget: spec_budget.unwrap_or(budget),
                seeds: spec_seeds.unwrap_or_else(|| seeds.to_vec()),
                step,
                epoch_len,
                mu_eff,
                l_eff,
                sample_every,
            })
        }
        v => {
            issues.push(path, format!("expected a solver name or object, got {v}"));
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_document_takes_defaults() {
        let c = parse_config(r#"{"kind": "hard-static", "solvers": ["gd"]}"#).unwrap();
        assert_eq!(c.budget, DEFAULT_BUDGET);
        assert_eq!(c.seeds, vec![0]);
        assert_eq!(c.output_dir, PathBuf::from(DEFAULT_OUTPUT_DIR));
        assert_eq!(c.instance.n, 8);
        assert_eq!(c.instance.mu, 1.0);
        assert_eq!(c.instance.l, Some(101.0));
        assert_eq!(c.instance.dim, 512);
        assert_eq!(c.solvers[0].budget, DEFAULT_BUDGET);
    }

    #[test]
    fn kappa_alone_sets_l() {
        let c = parse_config(r#"{"kind": "resist-ifo", "instance": {"mu": 2, "kappa": 10}, "solvers": ["agm"]}"#)
            .unwrap();
        assert_eq!(c.instance.l, Some(20.0));
        assert_eq!(c.instance.kappa(), Some(10.0));
    }

    #[test]
    fn dataset_defaults_scale_mu_with_n() {
        let c = parse_config(r#"{"kind": "bounds-table", "instance": {"n": 500}}"#).unwrap();
        assert_eq!(c.instance.mu, 1.0 / 500.0);
        assert_eq!(c.instance.l, None);
        assert!(c.solvers.is_empty());
    }

    #[test]
    fn all_problems_are_reported() {
        let err = parse_config(
            r#"{"kind": "resist-ifo", "budget": 0, "instance": {"mu": -1, "dims": 3},
                "solvers": ["gd", "newton", {"name": "sag", "step": "big"}]}"#,
        )
        .unwrap_err();
        let paths: Vec<&str> = err.iter().map(|i| i.path.as_str()).collect();
        for p in ["budget", "instance.mu", "instance.dims", "solvers[1]", "solvers[2].step"] {
            assert!(paths.contains(&p), "{p} missing from {paths:?}");
        }
    }

    #[test]
    fn single_oracle_forces_one_component() {
        let c = parse_config(r#"{"kind": "resist-single", "solvers": ["gd"]}"#).unwrap();
        assert_eq!(c.instance.n, 1);
        assert!(parse_config(r#"{"kind": "resist-single", "instance": {"n": 3}, "solvers": ["gd"]}"#).is_err());
    }

    #[test]
    fn randomized_solvers_run_once_per_seed() {
        let c = parse_config(r#"{"kind": "hard-static", "seeds": [1, 2], "solvers": ["cg", {"name": "sgd", "seeds": [7]}, "saga"]}"#)
            .unwrap();
        assert_eq!(c.solvers[0].run_seeds(), vec![None]);
        assert_eq!(c.solvers[1].run_seeds(), vec![Some(7)]);
        assert_eq!(c.solvers[2].run_seeds(), vec![Some(1), Some(2)]);
    }
}
