use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::{StatTest, DEFAULT_EPSILON};
use crate::digit::MutationExtent;
use crate::error::{Error, Result};
use crate::fitness::RegressionTolerance;
use crate::harness::{
    Activation, MutationSpec, Operator, Task, TrainSpec, WeaknessParams, WeightInit, MAX_FRACTION,
};
use crate::search::SearchConfig;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Subject {
    Digits,
    Regression,
}

impl Subject {
    pub fn task(self) -> Task {
        match self {
            Subject::Digits => Task::Classification,
            Subject::Regression => Task::Regression,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    Desk,
    Paper,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchSection {
    pub popsize: usize,
    pub g_max: usize,
    pub repop_upper_bound: usize,
    pub rng_seed: u64,
    /// Digits: displacement bounds of one mutation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mutation_extent: Option<MutationExtent>,
    /// Regression: archive distance threshold.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_a: Option<f64>,
    /// Regression: number of sampled seed chromosomes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed_pool: Option<usize>,
}

impl SearchSection {
    pub fn search_config(&self, run: usize) -> SearchConfig {
        SearchConfig {
            popsize: self.popsize,
            g_max: self.g_max,
            repop_upper_bound: self.repop_upper_bound,
            rng_seed: self.rng_seed.wrapping_add(run as u64),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarnessSection {
    pub n: usize,
    pub o: usize,
    pub m: usize,
    pub base_seed: u64,
    #[serde(default = "default_tolerance_deg")]
    pub tolerance_deg: f64,
}

fn default_tolerance_deg() -> f64 {
    5.0
}

/// The original training specification, minus task and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainingSection {
    pub hidden_sizes: Vec<usize>,
    pub activations: Vec<Activation>,
    pub weight_init: Vec<WeightInit>,
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
}

/// One mutation operator family and the range its search covers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorFamily {
    pub op: Operator,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lo: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    /// TCL and TUD: the affected class.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<u8>,
    /// TCO: the class whose rows are blended.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub from: Option<u8>,
    /// TCO: the class blended in.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub to: Option<u8>,
}

impl OperatorFamily {
    pub fn range(&self) -> (f64, f64, f64) {
        (
            self.lo.unwrap_or(0.0),
            self.hi.unwrap_or(MAX_FRACTION),
            self.epsilon.unwrap_or(DEFAULT_EPSILON),
        )
    }

    /// Short name used for directories and report rows, e.g. `TCL3`.
    pub fn key(&self) -> String {
        let mut k = self.op.code().to_string();
        for v in [self.label, self.from, self.to].into_iter().flatten() {
            k.push_str(&v.to_string());
        }
        k
    }

    fn require(&self, field: &str, v: Option<u8>) -> Result<u8> {
        let v = v.ok_or_else(|| Error::Config(format!("operator {} needs `{field}`", self.op)))?;
        if v >= crate::harness::NUM_CLASSES as u8 {
            return Err(Error::Config(format!("operator {}: class {v} out of range", self.op)));
        }
        Ok(v)
    }

    pub fn validate(&self, task: Task) -> Result<()> {
        if !self.op.supports(task) {
            return Err(Error::Config(format!("operator {} does not apply to {}", self.op, task.name())));
        }
        match self.op {
            Operator::Tcl | Operator::Tud => {
                self.require("label", self.label)?;
            }
            Operator::Tco => {
                let (f, t) = (self.require("from", self.from)?, self.require("to", self.to)?);
                if f == t {
                    return Err(Error::Config("TCO needs distinct `from` and `to`".into()));
                }
            }
            _ => {}
        }
        if self.op.is_continuous() {
            let (lo, hi, eps) = self.range();
            if !(0.0 <= lo && lo < hi && hi <= MAX_FRACTION) || !(eps > 0.0) {
                return Err(Error::Config(format!(
                    "operator {}: need 0 <= lo < hi <= {MAX_FRACTION} and epsilon > 0",
                    self.op
                )));
            }
        } else if self.lo.is_some() || self.hi.is_some() || self.epsilon.is_some() {
            return Err(Error::Config(format!("operator {} is discrete; drop lo/hi/epsilon", self.op)));
        }
        Ok(())
    }

    /// The mutation at search parameter `x`. Data operators take `x` as the
    /// affected fraction; HLR and HNE take it as an aggressiveness that
    /// scales the base learning rate or epoch count by `1 - x`.
    pub fn spec_at(&self, x: f64, base: &TrainSpec) -> MutationSpec {
        match self.op {
            Operator::Tcl => MutationSpec::Tcl { fraction: x, label: self.label.unwrap_or(0) },
            Operator::Trd => MutationSpec::Trd { fraction: x },
            Operator::Tud => MutationSpec::Tud { fraction: x, label: self.label.unwrap_or(0) },
            Operator::Tan => MutationSpec::Tan { fraction: x },
            Operator::Tco => MutationSpec::Tco {
                fraction: x,
                from: self.from.unwrap_or(0),
                to: self.to.unwrap_or(1),
            },
            Operator::Hlr => MutationSpec::Hlr { learning_rate: base.learning_rate * (1.0 - x) },
            Operator::Hne => MutationSpec::Hne {
                epochs: ((base.epochs as f64 * (1.0 - x)).round() as usize).max(1),
            },
            Operator::Ach | Operator::Arm | Operator::Wci => {
                unreachable!("discrete operators have no continuous parameter")
            }
        }
    }

    /// Every configuration of a discrete operator, in a fixed order.
    pub fn discrete_values(&self, base: &TrainSpec) -> Vec<MutationSpec> {
        let hidden = base.hidden_sizes.len();
        match self.op {
            Operator::Ach => (0..hidden)
                .flat_map(|layer| {
                    Activation::ALL
                        .into_iter()
                        .filter(move |a| *a != base.activations[layer])
                        .map(move |activation| MutationSpec::Ach { layer, activation })
                })
                .collect(),
            Operator::Arm => (0..hidden).map(|layer| MutationSpec::Arm { layer }).collect(),
            Operator::Wci => (0..=hidden)
                .flat_map(|layer| {
                    WeightInit::ALL
                        .into_iter()
                        .filter(move |w| *w != base.weight_init[layer])
                        .map(move |init| MutationSpec::Wci { layer, init })
                })
                .collect(),
            _ => Vec::new(),
        }
    }
}

/// A full pipeline configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub subject: Subject,
    pub scale: Scale,
    pub dataset: PathBuf,
    /// Digits seed corpus directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seeds: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub run_count: usize,
    #[serde(default)]
    pub stat_test: StatTest,
    pub search: SearchSection,
    pub harness: HarnessSection,
    pub training: TrainingSection,
    #[serde(default)]
    pub weakness: WeaknessParams,
    pub operators: Vec<OperatorFamily>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "schema_version {} unsupported (expected {SCHEMA_VERSION})",
                cfg.schema_version
            )));
        }
        Ok(cfg)
    }

    /// Loads a config file; relative paths inside it resolve against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        resolve(&mut cfg.dataset);
        resolve(&mut cfg.output_dir);
        if let Some(s) = cfg.seeds.as_mut() {
            resolve(s);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let h = &self.harness;
        if h.n == 0 || h.o == 0 || h.m == 0 || h.o > h.n || h.m > h.n {
            return Err(Error::Config(format!(
                "need 1 <= o <= n and 1 <= m <= n, got n={} o={} m={}",
                h.n, h.o, h.m
            )));
        }
        RegressionTolerance::from_degrees(h.tolerance_deg).map_err(|e| Error::Config(e.to_string()))?;
        if self.run_count == 0 {
            return Err(Error::Config("run_count must be at least 1".into()));
        }
        self.search
            .search_config(0)
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        match self.subject {
            Subject::Digits => {
                if self.seeds.is_none() {
                    return Err(Error::Config("digits subject needs a `seeds` directory".into()));
                }
            }
            Subject::Regression => {
                if !self.search.t_a.is_some_and(|t| t >= 0.0) {
                    return Err(Error::Config("regression subject needs search.t_a >= 0".into()));
                }
            }
        }
        self.train_spec().validate().map_err(|e| Error::Config(e.to_string()))?;
        if self.operators.is_empty() {
            return Err(Error::Config("no operators configured".into()));
        }
        let mut keys = std::collections::HashSet::new();
        for fam in &self.operators {
            fam.validate(self.subject.task())?;
            if !keys.insert(fam.key()) {
                return Err(Error::Config(format!("operator {} listed twice", fam.key())));
            }
        }
        Ok(())
    }

    pub fn tolerance(&self) -> RegressionTolerance {
        RegressionTolerance::from_degrees(self.harness.tolerance_deg).expect("validated")
    }

    pub fn train_spec(&self) -> TrainSpec {
        let t = &self.training;
        TrainSpec {
            task: self.subject.task(),
            hidden_sizes: t.hidden_sizes.clone(),
            activations: t.activations.clone(),
            weight_init: t.weight_init.clone(),
            epochs: t.epochs,
            learning_rate: t.learning_rate,
            batch_size: t.batch_size,
            rng_seed: 0,
        }
    }

    pub fn family(&self, key: &str) -> Option<&OperatorFamily> {
        self.operators.iter().find(|f| f.key() == key)
    }

    /// Switches the search budget to the full-size experiment settings.
    pub fn apply_paper_scale(&mut self) {
        self.scale = Scale::Paper;
        let s = &mut self.search;
        match self.subject {
            Subject::Digits => {
                s.popsize = 100;
                s.g_max = 1000;
                s.repop_upper_bound = 10;
            }
            Subject::Regression => {
                s.popsize = 12;
                s.g_max = 100;
                s.repop_upper_bound = 2;
                s.t_a = Some(0.55);
            }
        }
    }

    pub fn override_seed(&mut self, seed: u64) {
        self.search.rng_seed = seed;
        self.harness.base_seed = seed;
    }
}
