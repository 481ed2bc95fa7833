use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::{OperatorFamily, Subject};
use super::workspace::{
    claim, load_models, load_split, mkdir, read_json, require, save_models, save_split, write_json,
    Workspace,
};
use crate::analysis::{
    binary_search_config, exhaustive_search, mutation_score, OperatorSearchResult, SearchOutcome,
};
use crate::digit::{load_seed_corpus, MutationExtent};
use crate::error::{Error, Result};
use crate::eye::{EyeSchema, DEFAULT_SCHEMA};
use crate::harness::{
    derive_weak_test_set, quality_metric, ModelInstanceSet, MutationSpec, Split, TrainSpec,
    WeaknessParams,
};
use crate::search::{
    archive_split, check_archive, run_search, save_archive, DigitDomain, Domain, EyeDomain, Guides,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub index: usize,
    pub seed: u64,
    pub file: String,
    pub weights_digest: String,
    pub test_quality: f64,
    pub train_quality: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineManifest {
    pub subject: Subject,
    pub dataset_digest: String,
    pub spec: TrainSpec,
    pub spec_hash: String,
    pub n: usize,
    pub base_seed: u64,
    pub weakness: WeaknessParams,
    pub weak_size: usize,
    pub test_size: usize,
    pub instances: Vec<InstanceRecord>,
}

/// Trains the original instances and derives the weak test set.
pub fn cmd_baseline(ws: &Workspace) -> Result<BaselineManifest> {
    let dir = ws.out(&["baseline"]);
    claim(&dir, ws.force)?;
    let set = ws.train_originals()?;
    save_models(&dir, &set)?;
    let weak = derive_weak_test_set(&ws.ds.test, &set, ws.ds.task, &ws.cfg.weakness)?;
    save_split(&dir.join("weak.csv"), ws.ds.task, ws.ds.features, &weak)?;
    let instances = set
        .instances
        .iter()
        .enumerate()
        .map(|(k, m)| {
            Ok(InstanceRecord {
                index: k,
                seed: m.seed,
                file: format!("model_{k:02}.mfm"),
                weights_digest: m.weights_digest(),
                test_quality: quality_metric(m, &ws.ds.test, ws.tol)?,
                train_quality: quality_metric(m, &ws.ds.train, ws.tol)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let manifest = BaselineManifest {
        subject: ws.cfg.subject,
        dataset_digest: ws.ds.digest(),
        spec_hash: hex::encode(ws.spec.spec_hash()),
        spec: ws.spec.clone(),
        n: ws.cfg.harness.n,
        base_seed: ws.cfg.harness.base_seed,
        weakness: ws.cfg.weakness,
        weak_size: weak.len(),
        test_size: ws.ds.test.len(),
        instances,
    };
    write_json(&dir.join("manifest.json"), &manifest)?;
    Ok(manifest)
}

/// The persisted originals and weak test set.
pub fn load_baseline(ws: &Workspace) -> Result<(ModelInstanceSet, Split)> {
    let dir = ws.out(&["baseline"]);
    let manifest_path = dir.join("manifest.json");
    require(&[manifest_path.clone(), dir.join("weak.csv")])?;
    let manifest: BaselineManifest = read_json(&manifest_path)?;
    if manifest.dataset_digest != ws.ds.digest()
        || manifest.n != ws.cfg.harness.n
        || manifest.spec != ws.spec
        || manifest.base_seed != ws.cfg.harness.base_seed
    {
        return Err(Error::Config(
            "baseline was built from a different dataset or configuration; rerun `baseline --force`".into(),
        ));
    }
    let set = load_models(&dir, manifest.n, None, manifest.base_seed)?;
    let weak = load_split(&dir.join("weak.csv"))?;
    Ok((set, weak))
}

/// Search results of one operator family on the weak and training sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorAssessment {
    pub key: String,
    pub family: OperatorFamily,
    pub weak: OperatorSearchResult,
    pub train: OperatorSearchResult,
    pub likely_equivalent: bool,
    /// Mutation score of the weak test set; undefined for likely
    /// equivalent operators.
    pub weak_ms: Option<f64>,
    /// The generation target: the least aggressive configuration the weak
    /// set fails to kill.
    pub target: Option<MutationSpec>,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MutantsSummary {
    pub assessments: Vec<OperatorAssessment>,
}

impl MutantsSummary {
    pub fn targets(&self) -> impl Iterator<Item = &OperatorAssessment> {
        self.assessments.iter().filter(|a| a.target.is_some())
    }

    pub fn get(&self, key: &str) -> Option<&OperatorAssessment> {
        self.assessments.iter().find(|a| a.key == key)
    }
}

fn assess(ws: &Workspace, fam: &OperatorFamily, originals: &ModelInstanceSet, weak: &Split) -> Result<OperatorAssessment> {
    let train_split = &ws.ds.train;
    let (weak_res, train_res, target, note) = if fam.op.is_continuous() {
        let (lo, hi, eps) = fam.range();
        let search = |test: &Split| {
            binary_search_config(fam.op, lo, hi, eps, |x| ws.kill(originals, &fam.spec_at(x, &ws.spec), test))
        };
        let weak_res = search(weak)?;
        let train_res = search(train_split)?;
        let (target, note) = match weak_res.outcome {
            _ if train_res.kills_nothing() => (None, "likely equivalent: training set kills nothing".to_string()),
            SearchOutcome::Continuous { all_killed: true, .. } => {
                (None, "weak set kills every configuration".to_string())
            }
            SearchOutcome::Continuous { boundary, none_killed, .. } => {
                let note = if none_killed {
                    "weak set kills nothing; targeting the most aggressive configuration"
                } else {
                    "boundary configuration"
                };
                (Some(fam.spec_at(boundary, &ws.spec)), note.to_string())
            }
            SearchOutcome::Discrete { .. } => unreachable!("continuous search"),
        };
        (weak_res, train_res, target, note)
    } else {
        let values = fam.discrete_values(&ws.spec);
        let search = |test: &Split| {
            exhaustive_search(fam.op, &values, MutationSpec::to_string, |mu| ws.kill(originals, mu, test))
        };
        let weak_res = search(weak)?;
        let train_res = search(train_split)?;
        let killed = |r: &OperatorSearchResult, label: &str| match &r.outcome {
            SearchOutcome::Discrete { killed, .. } => killed.iter().any(|k| k == label),
            SearchOutcome::Continuous { .. } => false,
        };
        let target = values
            .iter()
            .find(|v| {
                let label = v.to_string();
                killed(&train_res, &label) && !killed(&weak_res, &label)
            })
            .cloned();
        let note = if train_res.kills_nothing() {
            "likely equivalent: training set kills nothing"
        } else if target.is_none() {
            "weak set kills every configuration the training set kills"
        } else {
            "first configuration killed by the training set only"
        };
        (weak_res, train_res, target, note.to_string())
    };
    let likely_equivalent = train_res.kills_nothing();
    let weak_ms = match mutation_score(&weak_res, &train_res) {
        Ok(ms) => Some(ms),
        Err(Error::UndefinedScore(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(OperatorAssessment {
        key: fam.key(),
        family: fam.clone(),
        weak: weak_res,
        train: train_res,
        likely_equivalent,
        weak_ms,
        target,
        note,
    })
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| format!("{x:.4}"))
}

/// Searches every configured operator and persists the generation targets.
pub fn cmd_mutants(ws: &Workspace) -> Result<MutantsSummary> {
    let (originals, weak) = load_baseline(ws)?;
    let dir = ws.out(&["mutants"]);
    claim(&dir, ws.force)?;
    mkdir(&dir)?;
    let mut assessments = Vec::new();
    for fam in &ws.cfg.operators {
        let a = assess(ws, fam, &originals, &weak)?;
        log::info!("{}: weak {} train {} -> {}", a.key, a.weak.summary(), a.train.summary(), a.note);
        let op_dir = dir.join(&a.key);
        mkdir(&op_dir)?;
        if let Some(t) = &a.target {
            save_models(&op_dir.join("instances"), &*ws.instances(t)?)?;
        }
        write_json(&op_dir.join("search.json"), &a)?;
        assessments.push(a);
    }
    let summary = MutantsSummary { assessments };
    write_json(&dir.join("summary.json"), &summary)?;

    let path = dir.join("mutants.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["operator", "kind", "weak", "train", "weak_ms", "likely_equivalent", "target"])?;
    for a in &summary.assessments {
        w.write_record([
            a.key.clone(),
            if a.weak.is_continuous() { "continuous" } else { "discrete" }.to_string(),
            a.weak.summary(),
            a.train.summary(),
            opt(a.weak_ms),
            a.likely_equivalent.to_string(),
            a.target.as_ref().map_or_else(String::new, |t| t.to_string()),
        ])?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;

    if summary.targets().next().is_none() {
        return Err(Error::NoTargets);
    }
    Ok(summary)
}

pub fn load_mutants(ws: &Workspace) -> Result<MutantsSummary> {
    let path = ws.out(&["mutants", "summary.json"]);
    require(std::slice::from_ref(&path))?;
    read_json(&path)
}

/// The persisted instance set of an operator's generation target.
pub fn load_target(ws: &Workspace, a: &OperatorAssessment) -> Result<ModelInstanceSet> {
    let target = a
        .target
        .clone()
        .ok_or_else(|| Error::invalid(format!("{} has no generation target", a.key)))?;
    let dir = ws.out(&["mutants", &a.key, "instances"]);
    require(&[dir.join("model_00.mfm")])?;
    load_models(&dir, ws.cfg.harness.n, Some(target), ws.cfg.harness.base_seed)
}

/// One augmentation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run: usize,
    pub rng_seed: u64,
    pub archive_size: usize,
    pub augmented_inputs: usize,
    /// Killing probability contribution of the weak set.
    pub k_weak: f64,
    /// Killing probability contribution of the augmented set.
    pub k_augmented: f64,
    /// Whether the augmented set kills the target configuration itself.
    pub target_killed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub augmented_search: Option<OperatorSearchResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentSummary {
    pub key: String,
    pub target: MutationSpec,
    pub config: String,
    pub run_count: usize,
    pub k_weak: f64,
    pub k_augmented: f64,
    pub mean_archive_size: f64,
    pub runs: Vec<RunRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct PopulationSeeds {
    runs: Vec<u64>,
}

/// The search domain of the configured subject.
pub enum SubjectDomain {
    Digits(DigitDomain),
    Regression(EyeDomain),
}

impl SubjectDomain {
    pub fn build(ws: &Workspace) -> Result<Self> {
        let s = &ws.cfg.search;
        Ok(match ws.cfg.subject {
            Subject::Digits => {
                let dir = ws.cfg.seeds.as_ref().expect("validated");
                let corpus = load_seed_corpus(dir)?;
                let extent = s.mutation_extent.unwrap_or_default();
                MutationExtent::new(extent.lo, extent.hi)?;
                SubjectDomain::Digits(DigitDomain::new(&corpus, extent)?)
            }
            Subject::Regression => SubjectDomain::Regression(EyeDomain::new(
                EyeSchema::parse(DEFAULT_SCHEMA)?,
                s.seed_pool.unwrap_or(200),
                s.t_a.expect("validated"),
                s.rng_seed,
            )?),
        })
    }
}

struct RunInputs<'a> {
    run: usize,
    dir: &'a Path,
    guides: Guides<'a>,
    weak: &'a Split,
}

/// Runs the search and writes the run's archive, log and input split.
/// Returns the archive size and the augmented test set.
fn search_and_save<D: Domain>(ws: &Workspace, domain: &D, r: &RunInputs<'_>) -> Result<(usize, Split)> {
    let cfg = ws.cfg.search.search_config(r.run);
    let out = run_search(&cfg, domain, r.guides, r.weak)?;
    if let Err(e) = check_archive(domain, &out.archive) {
        return Err(Error::invalid(format!("archive invariant violated: {e}")));
    }
    save_archive(domain, &out.archive, &r.dir.join("archive"))?;
    let log_path = r.dir.join("runlog.jsonl");
    let mut log = std::io::BufWriter::new(std::fs::File::create(&log_path).map_err(|e| Error::io(&log_path, e))?);
    for line in &out.log {
        writeln!(log, "{}", serde_json::to_string(line)?).map_err(|e| Error::io(&log_path, e))?;
    }
    log.flush().map_err(|e| Error::io(&log_path, e))?;
    let inputs = archive_split(domain, &out.archive);
    save_split(&r.dir.join("archive.csv"), ws.ds.task, ws.ds.features, &inputs)?;
    Ok((out.archive.len(), out.augmented))
}

/// Repeated augmentation runs against one generation target. `mutant_guides`
/// overrides the configured number of guiding mutant instances (1vsM).
pub fn cmd_augment(ws: &Workspace, key: &str, mutant_guides: Option<usize>) -> Result<AugmentSummary> {
    let (originals, weak) = load_baseline(ws)?;
    let mutants = load_mutants(ws)?;
    let a = mutants
        .get(key)
        .ok_or_else(|| Error::Config(format!("operator {key} is not configured")))?;
    if a.target.is_none() {
        return Err(Error::MissingArtifacts(vec![ws.out(&["mutants", key, "instances"])]));
    }
    let target_set = ws.remember(load_target(ws, a)?)?;
    let target = a.target.clone().expect("checked");
    let h = &ws.cfg.harness;
    let m = mutant_guides.unwrap_or(h.m);
    if m == 0 || m > h.n {
        return Err(Error::Config(format!("1vs{m} needs between 1 and {} mutant instances", h.n)));
    }
    let config = format!("{}vs{m}", h.o);
    let dir = ws.out(&["augment", key, &config]);
    let seeds = PopulationSeeds {
        runs: (0..ws.cfg.run_count).map(|r| ws.cfg.search.search_config(r).rng_seed).collect(),
    };
    let finished = dir.join("summary.json");
    if finished.exists() && !ws.force {
        // a finished set of runs from the same settings is reused as is
        let prev: AugmentSummary = read_json(&finished)?;
        let same_runs = prev.runs.iter().map(|r| r.rng_seed).eq(seeds.runs.iter().copied());
        if prev.target == target && same_runs {
            log::info!("{key} {config} already complete, reusing {}", finished.display());
            return Ok(prev);
        }
    }
    if finished.exists() {
        claim(&dir, ws.force)?;
    }
    mkdir(&dir)?;
    write_json(&dir.join("populations.json"), &seeds)?;

    let domain = SubjectDomain::build(ws)?;
    let guides = Guides {
        originals: originals.head(h.o),
        mutants: target_set.head(m),
        tol: ws.tol,
    };
    let fam = &a.family;
    let mut runs = Vec::with_capacity(ws.cfg.run_count);
    for (run, &rng_seed) in seeds.runs.iter().enumerate() {
        let run_dir = dir.join(format!("run_{run:02}"));
        let done = run_dir.join("done.json");
        if done.exists() {
            let rec: RunRecord = read_json(&done)?;
            if rec.rng_seed == rng_seed {
                runs.push(rec);
                continue;
            }
        }
        if run_dir.exists() {
            claim(&run_dir, true)?;
        }
        mkdir(&run_dir)?;
        let started = Instant::now();
        let inputs = RunInputs {
            run,
            dir: &run_dir,
            guides,
            weak: &weak,
        };
        let (archive_size, augmented) = match &domain {
            SubjectDomain::Digits(d) => search_and_save(ws, d, &inputs)?,
            SubjectDomain::Regression(d) => search_and_save(ws, d, &inputs)?,
        };
        let target_killed = ws.verdict(&originals, &target_set, &augmented)?.killed;
        let (k_weak, k_augmented, augmented_search) = if fam.op.is_continuous() {
            let (lo, hi, eps) = fam.range();
            let res = binary_search_config(fam.op, lo, hi, eps, |x| {
                ws.kill(&originals, &fam.spec_at(x, &ws.spec), &augmented)
            })?;
            let k = mutation_score(&res, &a.train)?;
            (a.weak_ms.unwrap_or(0.0), k, Some(res))
        } else {
            (0.0, if target_killed { 1.0 } else { 0.0 }, None)
        };
        let rec = RunRecord {
            run,
            rng_seed,
            archive_size,
            augmented_inputs: augmented.len(),
            k_weak,
            k_augmented,
            target_killed,
            augmented_search,
        };
        log::info!(
            "{key} {config} run {run}: archive {archive_size}, K weak {k_weak:.3} -> augmented {k_augmented:.3}"
        );
        write_json(&run_dir.join("timing.json"), &serde_json::json!({ "seconds": started.elapsed().as_secs_f64() }))?;
        write_json(&done, &rec)?;
        runs.push(rec);
    }

    let path = dir.join("report.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["run", "rng_seed", "archive_size", "augmented_inputs", "k_weak", "k_augmented", "target_killed"])?;
    for r in &runs {
        w.write_record([
            r.run.to_string(),
            r.rng_seed.to_string(),
            r.archive_size.to_string(),
            r.augmented_inputs.to_string(),
            format!("{:.4}", r.k_weak),
            format!("{:.4}", r.k_augmented),
            r.target_killed.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;

    let count = runs.len() as f64;
    let summary = AugmentSummary {
        key: key.to_string(),
        target,
        config,
        run_count: runs.len(),
        k_weak: runs.iter().map(|r| r.k_weak).sum::<f64>() / count,
        k_augmented: runs.iter().map(|r| r.k_augmented).sum::<f64>() / count,
        mean_archive_size: runs.iter().map(|r| r.archive_size as f64).sum::<f64>() / count,
        runs,
    };
    write_json(&dir.join("summary.json"), &summary)?;
    Ok(summary)
}

fn augment_dir(ws: &Workspace, key: &str) -> PathBuf {
    let h = &ws.cfg.harness;
    ws.out(&["augment", key, &format!("{}vs{}", h.o, h.m)])
}

/// One row of the leave-one-out report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossvalRow {
    pub mutant: String,
    pub target: String,
    pub donors: Vec<String>,
    /// Mean number of donor inputs per run.
    pub inputs: Option<f64>,
    pub killed: Option<usize>,
    pub runs: usize,
}

impl CrossvalRow {
    pub fn skipped(&self) -> bool {
        self.killed.is_none()
    }
}

/// Holds out each target in turn and checks whether the inputs generated
/// for the other operators' mutants kill it.
pub fn cmd_crossval(ws: &Workspace) -> Result<Vec<CrossvalRow>> {
    let (originals, weak) = load_baseline(ws)?;
    let mutants = load_mutants(ws)?;
    let augmented: Vec<&OperatorAssessment> = mutants
        .targets()
        .filter(|a| augment_dir(ws, &a.key).join("summary.json").exists())
        .collect();
    if augmented.is_empty() {
        return Err(Error::MissingArtifacts(
            mutants.targets().map(|a| augment_dir(ws, &a.key).join("summary.json")).collect(),
        ));
    }
    let dir = ws.out(&["crossval"]);
    claim(&dir, ws.force)?;
    mkdir(&dir)?;
    let run_count = ws.cfg.run_count;

    let mut rows = Vec::new();
    for held in mutants.targets() {
        let donors: Vec<&OperatorAssessment> = augmented
            .iter()
            .copied()
            .filter(|d| d.family.op != held.family.op)
            .collect();
        let mut row = CrossvalRow {
            mutant: held.key.clone(),
            target: held.target.as_ref().expect("targets only").to_string(),
            donors: donors.iter().map(|d| d.key.clone()).collect(),
            inputs: None,
            killed: None,
            runs: run_count,
        };
        if donors.is_empty() {
            rows.push(row);
            continue;
        }
        let held_set = load_target(ws, held)?;
        let mut killed = 0;
        let mut inputs = 0usize;
        for run in 0..run_count {
            let mut test = weak.clone();
            for d in &donors {
                let path = augment_dir(ws, &d.key).join(format!("run_{run:02}")).join("archive.csv");
                require(std::slice::from_ref(&path))?;
                let archive = load_split(&path)?;
                inputs += archive.len();
                test = test.union(&archive);
            }
            if ws.verdict(&originals, &held_set, &test)?.killed {
                killed += 1;
            }
        }
        row.inputs = Some(inputs as f64 / run_count as f64);
        row.killed = Some(killed);
        rows.push(row);
    }

    write_json(&dir.join("crossval.json"), &rows)?;
    let path = dir.join("crossval.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["MO", "Inputs", "Killed"])?;
    for r in &rows {
        let mo = format!("{} ({})", r.mutant, r.target);
        match (r.inputs, r.killed) {
            (Some(i), Some(k)) => w.write_record([mo, format!("{i:.1}"), format!("{k}/{}", r.runs)])?,
            _ => w.write_record([mo, "-".to_string(), "skipped".to_string()])?,
        }
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    Ok(rows)
}

/// One consolidated report row per target and guidance configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub operator: String,
    pub kind: String,
    pub target: String,
    pub config: String,
    pub k_weak: f64,
    pub k: f64,
    pub mean_inputs: f64,
    pub runs: usize,
}

/// Merges every augmentation summary into `report/report.csv`, with
/// runtimes in `report/timing.csv`.
pub fn cmd_report(ws: &Workspace) -> Result<Vec<ReportRow>> {
    let mutants = load_mutants(ws)?;
    let mut rows = Vec::new();
    let mut timing = Vec::new();
    let mut missing = Vec::new();
    for a in mutants.targets() {
        let base = ws.out(&["augment", &a.key]);
        let mut configs: Vec<PathBuf> = match std::fs::read_dir(&base) {
            Ok(entries) => entries
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.join("summary.json").exists())
                .collect(),
            Err(_) => Vec::new(),
        };
        if configs.is_empty() {
            missing.push(augment_dir(ws, &a.key).join("summary.json"));
            continue;
        }
        configs.sort();
        for cdir in configs {
            let s: AugmentSummary = read_json(&cdir.join("summary.json"))?;
            let mut seconds = 0.0;
            for r in &s.runs {
                let t = cdir.join(format!("run_{:02}", r.run)).join("timing.json");
                if let Ok(v) = read_json::<serde_json::Value>(&t) {
                    seconds += v["seconds"].as_f64().unwrap_or(0.0);
                }
            }
            timing.push((a.key.clone(), s.config.clone(), seconds));
            rows.push(ReportRow {
                operator: a.key.clone(),
                kind: if a.family.op.is_continuous() { "continuous" } else { "discrete" }.into(),
                target: s.target.to_string(),
                config: s.config.clone(),
                k_weak: s.k_weak,
                k: s.k_augmented,
                mean_inputs: s.mean_archive_size,
                runs: s.run_count,
            });
        }
    }
    if !missing.is_empty() {
        return Err(Error::MissingArtifacts(missing));
    }
    let dir = ws.out(&["report"]);
    claim(&dir, ws.force)?;
    mkdir(&dir)?;
    let path = dir.join("report.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["operator", "kind", "target", "config", "k_weak", "k", "mean_inputs", "runs"])?;
    for r in &rows {
        w.write_record([
            r.operator.clone(),
            r.kind.clone(),
            r.target.clone(),
            r.config.clone(),
            format!("{:.4}", r.k_weak),
            format!("{:.4}", r.k),
            format!("{:.2}", r.mean_inputs),
            r.runs.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    write_json(&dir.join("report.json"), &rows)?;

    let path = dir.join("timing.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["operator", "config", "seconds"])?;
    for (op, config, s) in &timing {
        w.write_record([op.clone(), config.clone(), format!("{s:.1}")])?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    Ok(rows)
}
