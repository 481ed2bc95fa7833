use serde::{Deserialize, Serialize};

use super::nsga::FitnessPair;
use crate::fitness::{is_solution_candidate, EvalOutcome};
use crate::harness::Target;

/// A candidate test input and its evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct Individual<G, P> {
    pub id: u64,
    pub genotype: G,
    pub phenotype: P,
    pub seed_origin: String,
    pub target: Target,
    /// Outcomes on the guiding original instances.
    pub originals: Vec<EvalOutcome>,
    /// Outcomes on the guiding mutant instances.
    pub mutants: Vec<EvalOutcome>,
    pub fitness: Option<FitnessPair>,
    pub rank: Option<usize>,
    pub crowding: f64,
}

impl<G, P> Individual<G, P> {
    pub fn new(id: u64, genotype: G, phenotype: P, seed_origin: String, target: Target) -> Self {
        Self {
            id,
            genotype,
            phenotype,
            seed_origin,
            target,
            originals: Vec::new(),
            mutants: Vec::new(),
            fitness: None,
            rank: None,
            crowding: 0.0,
        }
    }

    pub fn is_evaluated(&self) -> bool {
        self.fitness.is_some()
    }

    pub fn f1(&self) -> f64 {
        self.fitness.map_or(f64::INFINITY, |f| f.f1)
    }

    /// Correct on at least one original and wrong on at least one mutant.
    pub fn is_candidate(&self) -> bool {
        is_solution_candidate(&self.originals, &self.mutants)
    }

    pub fn misbehaves_on_all_originals(&self) -> bool {
        !self.originals.is_empty() && self.originals.iter().all(|o| !o.correct)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum ArchivePolicy {
    /// One entry per seed, the lowest `f1` wins.
    PerSeed,
    /// Entries further apart than `t_a`; close candidates compete locally.
    Threshold { t_a: f64 },
}

/// The store of best mutant-killing inputs found so far.
#[derive(Debug, Clone, PartialEq)]
pub struct Archive<G, P> {
    pub policy: ArchivePolicy,
    entries: Vec<Individual<G, P>>,
}

impl<G: Clone, P: Clone> Archive<G, P> {
    pub fn new(policy: ArchivePolicy) -> Self {
        Self {
            policy,
            entries: Vec::new(),
        }
    }

    pub fn entries(&self) -> &[Individual<G, P>] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Offers one individual. Returns whether the archive changed.
    ///
    /// Under the threshold policy a close candidate must have a lower `f1`
    /// than every entry within `t_a`; those entries are then all replaced,
    /// which keeps entries pairwise further apart than `t_a`. Ties keep the
    /// incumbent.
    pub fn offer(
        &mut self,
        cand: &Individual<G, P>,
        dist: impl Fn(&Individual<G, P>, &Individual<G, P>) -> f64,
    ) -> bool {
        if !cand.is_candidate() || !cand.is_evaluated() {
            return false;
        }
        match self.policy {
            ArchivePolicy::PerSeed => {
                match self.entries.iter().position(|e| e.seed_origin == cand.seed_origin) {
                    None => {
                        self.entries.push(cand.clone());
                        true
                    }
                    Some(i) if cand.f1() < self.entries[i].f1() => {
                        self.entries[i] = cand.clone();
                        true
                    }
                    Some(_) => false,
                }
            }
            ArchivePolicy::Threshold { t_a } => {
                let close: Vec<usize> = (0..self.entries.len())
                    .filter(|&i| dist(cand, &self.entries[i]) <= t_a)
                    .collect();
                if close.iter().any(|&i| cand.f1() >= self.entries[i].f1()) {
                    return false;
                }
                let mut k = 0;
                self.entries.retain(|_| {
                    let keep = close.binary_search(&k).is_err();
                    k += 1;
                    keep
                });
                self.entries.push(cand.clone());
                true
            }
        }
    }

    /// Offers each individual in order.
    pub fn update<'a>(
        &mut self,
        candidates: impl IntoIterator<Item = &'a Individual<G, P>>,
        dist: impl Fn(&Individual<G, P>, &Individual<G, P>) -> f64,
    ) -> usize
    where
        G: 'a,
        P: 'a,
    {
        candidates
            .into_iter()
            .filter(|c| self.offer(c, &dist))
            .count()
    }
}
