//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any of them fails.

use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use metisforge::analysis::{binary_search_config, cohens_d, mutation_score, rank_sum_p, OperatorSearchResult, SearchOutcome};
use metisforge::digit::{random_digit, rasterize, CubicSegment, PathModel, Point, Subpath};
use metisforge::eye::EyeChromosome;
use metisforge::fitness::gene_distance;
use metisforge::harness::{output_is_correct, ModelInstanceSet, Operator};
use metisforge::pipeline::{
    cmd_augment, cmd_baseline, cmd_crossval, cmd_mutants, load_baseline, load_mutants, load_split, load_target,
    AugmentSummary, RunConfig, Workspace,
};
use metisforge::search::{fast_nondominated_sort, FitnessPair};

type Check = Result<String, String>;

fn fail(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn continuous(lo: f64, hi: f64, boundary: f64) -> OperatorSearchResult {
    OperatorSearchResult {
        operator: Operator::Trd,
        outcome: SearchOutcome::Continuous {
            lo,
            hi,
            epsilon: 0.01,
            boundary,
            none_killed: false,
            all_killed: false,
        },
        probes: Vec::new(),
    }
}

fn mutation_score_example() -> Check {
    let train = continuous(0.0, 0.99, 0.10);
    let test = continuous(0.0, 0.99, 0.25);
    let ms = mutation_score(&test, &train).map_err(fail)?;
    if (ms - 0.8315).abs() <= 5e-3 {
        Ok(format!("MS = {ms:.4}"))
    } else {
        Err(format!("MS = {ms:.4}, expected 0.8315"))
    }
}

/// Fronts by repeatedly peeling off the non-dominated points.
fn brute_force_fronts(f: &[(f64, f64)]) -> Vec<Vec<usize>> {
    let dominates = |a: (f64, f64), b: (f64, f64)| a.0 <= b.0 && a.1 >= b.1 && (a.0 < b.0 || a.1 > b.1);
    let mut left: Vec<usize> = (0..f.len()).collect();
    let mut fronts = Vec::new();
    while !left.is_empty() {
        let front: Vec<usize> = left
            .iter()
            .copied()
            .filter(|&i| !left.iter().any(|&j| dominates(f[j], f[i])))
            .collect();
        left.retain(|i| !front.contains(i));
        fronts.push(front);
    }
    fronts
}

fn nsga_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for trial in 0..200 {
        let size = rng.random_range(1..=20);
        let coarse = trial % 2 == 0;
        let objs: Vec<(f64, f64)> = (0..size)
            .map(|_| {
                let (a, b) = (rng.random_range(-5.0..5.0f64), rng.random_range(0.0..3.0f64));
                if coarse { (a.round(), b.round()) } else { (a, b) }
            })
            .collect();
        let fits: Vec<FitnessPair> = objs.iter().map(|&(a, b)| FitnessPair::new(a, b)).collect();
        let mut got = fast_nondominated_sort(&fits);
        let mut want = brute_force_fronts(&objs);
        for f in got.iter_mut().chain(want.iter_mut()) {
            f.sort_unstable();
        }
        if got != want {
            return Err(format!("population {trial}: {got:?} != {want:?}"));
        }
    }
    Ok("200 populations match".into())
}

#[derive(Deserialize)]
struct StatsCase {
    a: Vec<f64>,
    b: Vec<f64>,
    p: f64,
    d: f64,
}

#[derive(Deserialize)]
struct StatsFixture {
    cases: Vec<StatsCase>,
}

fn statistics_oracle() -> Check {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/stats_oracle.json");
    let text = std::fs::read_to_string(&path).map_err(fail)?;
    let fixture: StatsFixture = serde_json::from_str(&text).map_err(fail)?;
    let (mut worst_p, mut worst_d) = (0.0f64, 0.0f64);
    for (i, c) in fixture.cases.iter().enumerate() {
        let p = rank_sum_p(&c.a, &c.b).map_err(fail)?;
        let d = cohens_d(&c.a, &c.b).map_err(fail)?;
        worst_p = worst_p.max((p - c.p).abs());
        worst_d = worst_d.max((d - c.d).abs());
        if (p - c.p).abs() > 1e-4 || (d - c.d).abs() > 1e-9 {
            return Err(format!("case {i}: p {p} vs {}, d {d} vs {}", c.p, c.d));
        }
    }
    let tied = vec![0.5; 20];
    let (p, d) = (rank_sum_p(&tied, &tied).map_err(fail)?, cohens_d(&tied, &tied).map_err(fail)?);
    if p != 1.0 || d != 0.0 {
        return Err(format!("all-tied samples gave p {p}, d {d}"));
    }
    Ok(format!(
        "{} pairs, max |dp| {worst_p:.1e}, max |dd| {worst_d:.1e}; tied case p 1, d 0",
        fixture.cases.len()
    ))
}

fn binary_search_oracle() -> Check {
    let (lo, hi, eps) = (0.0f64, 0.99, 0.01);
    let budget = ((hi - lo) / eps).log2().ceil() as usize + 2;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut most = 0;
    for trial in 0..100 {
        let threshold: f64 = rng.random_range(lo + eps..hi);
        let mut calls = 0;
        let res = binary_search_config(Operator::Trd, lo, hi, eps, |x| {
            calls += 1;
            Ok::<bool, metisforge::Error>(x >= threshold)
        })
        .map_err(fail)?;
        let SearchOutcome::Continuous { boundary, .. } = res.outcome else {
            return Err("continuous search gave a discrete result".into());
        };
        if !(boundary < threshold && threshold - boundary <= eps) {
            return Err(format!("trial {trial}: boundary {boundary} for threshold {threshold}"));
        }
        if calls > budget {
            return Err(format!("trial {trial}: {calls} probes, budget {budget}"));
        }
        most = most.max(calls);
    }
    Ok(format!("100 thresholds within eps, at most {most}/{budget} probes"))
}

fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> PathModel {
    let sub = Subpath::polygon(&[
        Point::new(x0, y0),
        Point::new(x1, y0),
        Point::new(x1, y1),
        Point::new(x0, y1),
    ])
    .expect("rectangle");
    PathModel::new(vec![sub]).expect("path")
}

fn rasterizer_invariants() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for label in 0..10 {
        let m = random_digit(label, &mut rng).map_err(fail)?;
        if rasterize(&m).pixels() != rasterize(&m).pixels() {
            return Err(format!("digit {label} rasterized differently twice"));
        }
    }
    let p = Point::new(10.0, 10.0);
    let blank = PathModel::new(vec![Subpath::from_segments(&[CubicSegment::new(p, p, p, p)]).map_err(fail)?])
        .map_err(fail)?;
    if rasterize(&blank).pixels().iter().any(|&v| v != 0) {
        return Err("blank model inked pixels".into());
    }
    let full = rasterize(&rect(0.0, 0.0, 28.0, 28.0));
    for y in 1..27 {
        for x in 1..27 {
            if full.get(x, y) < 254 {
                return Err(format!("full canvas pixel ({x}, {y}) = {}", full.get(x, y)));
            }
        }
    }
    let half = rasterize(&rect(5.0, 7.0, 5.5, 8.0)).get(5, 7);
    if (half as i32 - 128).abs() > 8 {
        return Err(format!("half-covered pixel = {half}"));
    }
    Ok(format!("deterministic, blank 0, full 255, half-cell {half}"))
}

struct Desk {
    ws: Workspace,
    augmented: Vec<AugmentSummary>,
}

impl Desk {
    fn prepare(config: &str, out: &Path, only: Option<&[&str]>) -> Result<Self, String> {
        let mut cfg = RunConfig::load(&repo_root().join("configs").join(config)).map_err(fail)?;
        cfg.output_dir = out.to_path_buf();
        if let Some(keep) = only {
            cfg.operators.retain(|f| keep.contains(&f.key().as_str()));
        }
        let ws = Workspace::open(cfg, false).map_err(fail)?;
        cmd_baseline(&ws).map_err(fail)?;
        let summary = cmd_mutants(&ws).map_err(fail)?;
        let augmented = summary
            .targets()
            .map(|a| cmd_augment(&ws, &a.key, None))
            .collect::<metisforge::Result<Vec<_>>>()
            .map_err(fail)?;
        Ok(Self { ws, augmented })
    }

    fn augment_dir(&self, key: &str) -> PathBuf {
        let h = &self.ws.cfg.harness;
        self.ws.out(&["augment", key, &format!("{}vs{}", h.o, h.m)])
    }

    fn summary(&self, key: &str) -> Result<&AugmentSummary, String> {
        self.augmented
            .iter()
            .find(|s| s.key == key)
            .ok_or_else(|| format!("no {key} augmentation"))
    }
}

fn desk_effectiveness(digits: &Desk) -> Check {
    let s = digits.summary("TRD")?;
    let nonempty = s.runs.iter().filter(|r| r.archive_size > 0).count();
    let improved = s.runs.iter().filter(|r| r.k_augmented > r.k_weak).count();
    let n = s.runs.len();
    let detail = format!(
        "target {}: archive non-empty {nonempty}/{n}, K augmented > K weak {improved}/{n} (mean {:.3} -> {:.3})",
        s.target, s.k_weak, s.k_augmented
    );
    if n == 10 && nonempty >= 9 && improved >= 8 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn is_candidate(originals: &[metisforge::harness::TinyModel], mutants: &[metisforge::harness::TinyModel], ws: &Workspace, x: &[f64], t: metisforge::harness::Target) -> bool {
    originals.iter().any(|m| output_is_correct(&m.forward(x), t, ws.tol))
        && mutants.iter().any(|m| !output_is_correct(&m.forward(x), t, ws.tol))
}

/// Re-checks the persisted archives of every augmented target.
fn archive_invariants(desk: &Desk, min_distance: Option<f64>) -> Result<usize, String> {
    let (originals, _) = load_baseline(&desk.ws).map_err(fail)?;
    let mutants = load_mutants(&desk.ws).map_err(fail)?;
    let h = &desk.ws.cfg.harness;
    let mut checked = 0;
    for s in &desk.augmented {
        let a = mutants.get(&s.key).ok_or("missing assessment")?;
        let target: ModelInstanceSet = load_target(&desk.ws, a).map_err(fail)?;
        for r in &s.runs {
            let run_dir = desk.augment_dir(&s.key).join(format!("run_{:02}", r.run));
            let text = std::fs::read_to_string(run_dir.join("archive/manifest.json")).map_err(fail)?;
            let manifest: serde_json::Value = serde_json::from_str(&text).map_err(fail)?;
            let entries = manifest["entries"].as_array().ok_or("manifest without entries")?;
            let inputs = load_split(&run_dir.join("archive.csv")).map_err(fail)?;
            if inputs.len() != entries.len() {
                return Err(format!("{} run {}: manifest and inputs disagree", s.key, r.run));
            }
            for (x, t) in inputs.iter() {
                if !is_candidate(originals.head(h.o), target.head(h.m), &desk.ws, x, t) {
                    return Err(format!("{} run {}: archived input is not a candidate", s.key, r.run));
                }
            }
            match min_distance {
                None => {
                    let mut seen = HashSet::new();
                    for e in entries {
                        if !seen.insert(e["seed_origin"].as_str().unwrap_or_default().to_string()) {
                            return Err(format!("{} run {}: seed {} archived twice", s.key, r.run, e["seed_origin"]));
                        }
                    }
                }
                Some(t_a) => {
                    let genes = entries
                        .iter()
                        .map(|e| serde_json::from_value::<EyeChromosome>(e["chromosome"].clone()))
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(fail)?;
                    for (i, a) in genes.iter().enumerate() {
                        for b in &genes[i + 1..] {
                            let d = gene_distance(a, b);
                            if d <= t_a {
                                return Err(format!("{} run {}: entries {d:.4} apart", s.key, r.run));
                            }
                        }
                    }
                }
            }
            checked += entries.len();
        }
    }
    Ok(checked)
}

fn archives(digits: &Desk, gaze: &Desk) -> Check {
    let per_seed = archive_invariants(digits, None)?;
    let t_a = gaze.ws.cfg.search.t_a.ok_or("gaze config without t_a")?;
    let threshold = archive_invariants(gaze, Some(t_a))?;
    Ok(format!("{per_seed} per-seed entries and {threshold} threshold entries (t_a {t_a}) verified"))
}

fn snapshot(dir: &Path, runs: usize) -> Result<Vec<(String, Vec<u8>)>, String> {
    let mut files = vec!["report.csv".to_string(), "summary.json".to_string()];
    files.extend((0..runs).map(|r| format!("run_{r:02}/archive/manifest.json")));
    files
        .into_iter()
        .map(|f| std::fs::read(dir.join(&f)).map(|b| (f, b)).map_err(fail))
        .collect()
}

fn determinism(digits: &mut Desk) -> Check {
    let dir = digits.augment_dir("TRD");
    let runs = digits.ws.cfg.run_count;
    let first = snapshot(&dir, runs)?;
    digits.ws.force = true;
    let again = cmd_augment(&digits.ws, "TRD", None).map_err(fail);
    digits.ws.force = false;
    again?;
    let second = snapshot(&dir, runs)?;
    for ((name, a), (_, b)) in first.iter().zip(&second) {
        if a != b {
            return Err(format!("{name} differs between executions"));
        }
    }
    Ok(format!("{} files byte-identical across two executions", first.len()))
}

fn crossval(digits: &Desk) -> Check {
    if digits.augmented.len() < 3 {
        return Err(format!("only {} operators augmented", digits.augmented.len()));
    }
    let rows = cmd_crossval(&digits.ws).map_err(fail)?;
    let path = digits.ws.out(&["crossval", "crossval.csv"]);
    let mut rdr = csv::Reader::from_path(&path).map_err(fail)?;
    let header: Vec<String> = rdr.headers().map_err(fail)?.iter().map(String::from).collect();
    if header != ["MO", "Inputs", "Killed"] {
        return Err(format!("columns {header:?}"));
    }
    let records = rdr.records().collect::<Result<Vec<_>, _>>().map_err(fail)?;
    if records.len() != digits.augmented.len() {
        return Err(format!("{} rows for {} targets", records.len(), digits.augmented.len()));
    }
    let runs = digits.ws.cfg.run_count;
    for rec in &records {
        let killed = &rec[2];
        let ok = killed == "skipped"
            || killed
                .split_once('/')
                .is_some_and(|(k, n)| k.parse::<usize>().is_ok_and(|k| k <= runs) && n == runs.to_string());
        if !ok {
            return Err(format!("row {:?} has Killed = {killed}", &rec[0]));
        }
    }
    let best = rows.iter().filter_map(|r| r.killed).max().unwrap_or(0);
    let cells: Vec<String> = rows
        .iter()
        .map(|r| format!("{} {}", r.mutant, r.killed.map_or("skipped".into(), |k| format!("{k}/{runs}"))))
        .collect();
    if best >= 1 {
        Ok(cells.join(", "))
    } else {
        Err(format!("no held-out mutant killed: {}", cells.join(", ")))
    }
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut report = |n: usize, name: &str, started: Instant, result: Check| {
        let secs = started.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {n} PASS  {name}: {detail} [{secs:.1}s]"),
            Err(detail) => {
                failed += 1;
                println!("criterion {n} FAIL  {name}: {detail} [{secs:.1}s]");
            }
        }
    };

    let t = Instant::now();
    report(1, "mutation score example", t, mutation_score_example());
    let t = Instant::now();
    report(2, "non-dominated sort oracle", t, nsga_oracle());
    let t = Instant::now();
    report(3, "statistics oracle", t, statistics_oracle());
    let t = Instant::now();
    report(4, "binary search", t, binary_search_oracle());
    let t = Instant::now();
    report(5, "rasterizer invariants", t, rasterizer_invariants());

    let tmp = tempfile::tempdir().expect("temp dir");
    let t = Instant::now();
    let digits = Desk::prepare("digits-desk.toml", &tmp.path().join("digits"), None);
    let gaze = Desk::prepare("gaze-desk.toml", &tmp.path().join("gaze"), Some(&["TRD"]));
    let setup = t.elapsed().as_secs_f64();
    match (digits, gaze) {
        (Ok(mut digits), Ok(gaze)) => {
            println!("desk pipelines prepared in {setup:.1}s");
            let t = Instant::now();
            report(6, "archive invariants", t, archives(&digits, &gaze));
            let t = Instant::now();
            report(7, "augment determinism", t, determinism(&mut digits));
            let t = Instant::now();
            report(8, "desk TRD effectiveness", t, desk_effectiveness(&digits));
            let t = Instant::now();
            report(9, "leave-one-out cross-validation", t, crossval(&digits));
        }
        (d, g) => {
            let why = [d.err(), g.err()].into_iter().flatten().collect::<Vec<_>>().join("; ");
            for (n, name) in [
                (6, "archive invariants"),
                (7, "augment determinism"),
                (8, "desk TRD effectiveness"),
                (9, "leave-one-out cross-validation"),
            ] {
                report(n, name, t, Err(format!("desk pipeline failed: {why}")));
            }
        }
    }

    if failed == 0 {
        println!("acceptance: all 9 criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} of 9 criteria fail");
        ExitCode::FAILURE
    }
}
