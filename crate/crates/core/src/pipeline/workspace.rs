use std::collections::HashMap;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use serde::Serialize;

use super::config::RunConfig;
use crate::analysis::{is_killed, KillOutcome};
use crate::error::{Error, Result};
use crate::fitness::RegressionTolerance;
use crate::harness::{build_instances, Dataset, ModelInstanceSet, MutationSpec, Split, TinyModel, TrainSpec};

/// Loaded configuration plus the shared state of one command invocation.
pub struct Workspace {
    pub cfg: RunConfig,
    pub ds: Dataset,
    pub spec: TrainSpec,
    pub tol: RegressionTolerance,
    pub force: bool,
    cache: Mutex<HashMap<String, Arc<ModelInstanceSet>>>,
}

impl Workspace {
    pub fn open(cfg: RunConfig, force: bool) -> Result<Self> {
        cfg.validate()?;
        let ds = Dataset::load(&cfg.dataset)?;
        if ds.task != cfg.subject.task() {
            return Err(Error::Config(format!(
                "{} holds a {} dataset",
                cfg.dataset.display(),
                ds.task.name()
            )));
        }
        Ok(Self {
            spec: cfg.train_spec(),
            tol: cfg.tolerance(),
            ds,
            cfg,
            force,
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn out(&self, parts: &[&str]) -> PathBuf {
        parts.iter().fold(self.cfg.output_dir.clone(), |p, s| p.join(s))
    }

    /// Trained instance set of a mutation, memoised for the whole command.
    pub fn instances(&self, mu: &MutationSpec) -> Result<Arc<ModelInstanceSet>> {
        let key = serde_json::to_string(mu)?;
        if let Some(hit) = self.cache.lock().expect("cache lock").get(&key) {
            return Ok(hit.clone());
        }
        log::debug!("training {} instances of {mu}", self.cfg.harness.n);
        let set = Arc::new(build_instances(
            &self.ds,
            &self.spec,
            Some(mu),
            self.cfg.harness.n,
            self.cfg.harness.base_seed,
        )?);
        self.cache.lock().expect("cache lock").insert(key, set.clone());
        Ok(set)
    }

    /// Seeds the cache with an instance set loaded from disk.
    pub fn remember(&self, set: ModelInstanceSet) -> Result<Arc<ModelInstanceSet>> {
        let mu = set
            .origin
            .as_ref()
            .ok_or_else(|| Error::invalid("only mutant instance sets are cached"))?;
        let key = serde_json::to_string(mu)?;
        let set = Arc::new(set);
        self.cache.lock().expect("cache lock").insert(key, set.clone());
        Ok(set)
    }

    pub fn train_originals(&self) -> Result<ModelInstanceSet> {
        build_instances(&self.ds, &self.spec, None, self.cfg.harness.n, self.cfg.harness.base_seed)
    }

    /// Killing verdict of `test` on a mutant set against the originals.
    pub fn verdict(
        &self,
        originals: &ModelInstanceSet,
        mutants: &ModelInstanceSet,
        test: &Split,
    ) -> Result<KillOutcome> {
        let o = originals.metrics(test, self.tol)?;
        let m = mutants.metrics(test, self.tol)?;
        is_killed(&o, &m, self.cfg.stat_test)
    }

    pub fn kill(&self, originals: &ModelInstanceSet, mu: &MutationSpec, test: &Split) -> Result<KillOutcome> {
        let mutants = self.instances(mu)?;
        self.verdict(originals, &mutants, test)
    }
}

/// Fails when `path` exists, unless `force` is set, in which case it is
/// removed first.
pub fn claim(path: &Path, force: bool) -> Result<()> {
    if path.exists() {
        if !force {
            return Err(Error::WouldOverwrite(path.to_path_buf()));
        }
        let removed = if path.is_dir() {
            std::fs::remove_dir_all(path)
        } else {
            std::fs::remove_file(path)
        };
        removed.map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}

pub fn require(paths: &[PathBuf]) -> Result<()> {
    let missing: Vec<PathBuf> = paths.iter().filter(|p| !p.exists()).cloned().collect();
    if missing.is_empty() {
        Ok(())
    } else {
        Err(Error::MissingArtifacts(missing))
    }
}

pub fn mkdir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

fn model_path(dir: &Path, k: usize) -> PathBuf {
    dir.join(format!("model_{k:02}.mfm"))
}

pub fn save_models(dir: &Path, set: &ModelInstanceSet) -> Result<()> {
    mkdir(dir)?;
    for (k, m) in set.instances.iter().enumerate() {
        let path = model_path(dir, k);
        let file = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
        let mut w = BufWriter::new(file);
        m.write_to(&mut w).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

pub fn load_models(dir: &Path, n: usize, origin: Option<MutationSpec>, base_seed: u64) -> Result<ModelInstanceSet> {
    let instances = (0..n)
        .map(|k| {
            let path = model_path(dir, k);
            let file = std::fs::File::open(&path).map_err(|e| Error::io(&path, e))?;
            TinyModel::read_from(&mut BufReader::new(file))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ModelInstanceSet {
        instances,
        origin,
        base_seed,
    })
}

/// Stores a split as a dataset file whose train part is empty.
pub fn save_split(path: &Path, task: crate::harness::Task, features: usize, split: &Split) -> Result<()> {
    Dataset {
        task,
        features,
        train: Split::default(),
        test: split.clone(),
    }
    .save(path, 1.0)
}

pub fn load_split(path: &Path) -> Result<Split> {
    Ok(Dataset::load(path)?.test)
}
