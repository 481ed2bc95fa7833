//! Pareto ranking, crowding distance, and the selection operators built on
//! them. Everything here works on plain fitness slices; indices refer to
//! positions in that slice.

use std::cmp::Ordering;

use rand::Rng;
use serde::{Deserialize, Serialize};

/// Objective values of an individual: `f1` minimised, `f2` maximised.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitnessPair {
    pub f1: f64,
    /// `f64::INFINITY` when the archive holds no other entry.
    #[serde(with = "infinite_f64")]
    pub f2: f64,
}

impl FitnessPair {
    pub fn new(f1: f64, f2: f64) -> Self {
        Self { f1, f2 }
    }

    pub fn dominates(&self, other: &FitnessPair) -> bool {
        let no_worse = self.f1 <= other.f1 && self.f2 >= other.f2;
        let better = self.f1 < other.f1 || self.f2 > other.f2;
        no_worse && better
    }
}

/// JSON has no infinity; store it as `null`.
mod infinite_f64 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

/// Fronts of non-dominated indices, best front first; indices ascend within
/// each front.
pub fn fast_nondominated_sort(fits: &[FitnessPair]) -> Vec<Vec<usize>> {
    let n = fits.len();
    let mut dominated_by_me: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut domination_count = vec![0usize; n];
    for i in 0..n {
        for j in i + 1..n {
            if fits[i].dominates(&fits[j]) {
                dominated_by_me[i].push(j);
                domination_count[j] += 1;
            } else if fits[j].dominates(&fits[i]) {
                dominated_by_me[j].push(i);
                domination_count[i] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| domination_count[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominated_by_me[i] {
                domination_count[j] -= 1;
                if domination_count[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(current);
        current = next;
    }
    fronts
}

/// Crowding distance of each member of `front`, in front order.
///
/// Boundary members get `f64::INFINITY`. Each objective adds its normalised
/// neighbour gap divided by the number of objectives, so interior values lie
/// in `[0, 1]`. An infinite `f2` is measured as one unit above the largest
/// finite `f2` of the front.
pub fn crowding_distance(fits: &[FitnessPair], front: &[usize]) -> Vec<f64> {
    let k = front.len();
    let mut dist = vec![0.0; k];
    if k <= 2 {
        return vec![f64::INFINITY; k];
    }
    let max_finite_f2 = front
        .iter()
        .map(|&i| fits[i].f2)
        .filter(|v| v.is_finite())
        .fold(f64::NEG_INFINITY, f64::max);
    let cap = if max_finite_f2.is_finite() { max_finite_f2 + 1.0 } else { 0.0 };
    let objectives: [Box<dyn Fn(usize) -> f64>; 2] = [
        Box::new(|i: usize| fits[i].f1),
        Box::new(move |i: usize| if fits[i].f2.is_finite() { fits[i].f2 } else { cap }),
    ];
    for obj in &objectives {
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| obj(front[a]).total_cmp(&obj(front[b])).then(a.cmp(&b)));
        let lo = obj(front[order[0]]);
        let hi = obj(front[order[k - 1]]);
        dist[order[0]] = f64::INFINITY;
        dist[order[k - 1]] = f64::INFINITY;
        let range = (hi - lo) * objectives.len() as f64;
        if range <= 0.0 {
            continue;
        }
        for w in 1..k - 1 {
            let gap = obj(front[order[w + 1]]) - obj(front[order[w - 1]]);
            dist[order[w]] += gap / range;
        }
    }
    dist
}

/// Rank and crowding of every individual.
#[derive(Debug, Clone, PartialEq)]
pub struct Ranking {
    pub rank: Vec<usize>,
    pub crowding: Vec<f64>,
    pub fronts: Vec<Vec<usize>>,
}

pub fn rank_population(fits: &[FitnessPair]) -> Ranking {
    let fronts = fast_nondominated_sort(fits);
    let mut rank = vec![0; fits.len()];
    let mut crowding = vec![0.0; fits.len()];
    for (r, front) in fronts.iter().enumerate() {
        for (&i, c) in front.iter().zip(crowding_distance(fits, front)) {
            rank[i] = r;
            crowding[i] = c;
        }
    }
    Ranking {
        rank,
        crowding,
        fronts,
    }
}

/// NSGA-II environmental selection: whole fronts while they fit, then the
/// last admitted front by descending crowding (ties: lower `tiebreak`).
/// Returns the chosen indices in selection order.
pub fn select(ranking: &Ranking, tiebreak: &[u64], count: usize) -> Vec<usize> {
    let mut chosen = Vec::with_capacity(count);
    for front in &ranking.fronts {
        if chosen.len() + front.len() <= count {
            chosen.extend(front);
            continue;
        }
        let mut rest = front.clone();
        rest.sort_by(|&a, &b| {
            ranking.crowding[b]
                .total_cmp(&ranking.crowding[a])
                .then(tiebreak[a].cmp(&tiebreak[b]))
        });
        chosen.extend(&rest[..count - chosen.len()]);
        break;
    }
    chosen
}

/// Outcome of a two-way comparison by rank, then crowding.
pub fn crowded_compare(rank: &[usize], crowding: &[f64], a: usize, b: usize) -> Ordering {
    rank[a]
        .cmp(&rank[b])
        .then(crowding[b].total_cmp(&crowding[a]))
}

/// `count` binary tournaments; lower rank wins, then larger crowding, and a
/// full tie is a coin flip.
pub fn sel_tour_dcd<R: Rng + ?Sized>(
    rank: &[usize],
    crowding: &[f64],
    count: usize,
    rng: &mut R,
) -> Vec<usize> {
    let n = rank.len();
    (0..count)
        .map(|_| {
            let a = rng.random_range(0..n);
            let b = rng.random_range(0..n);
            binary_tournament(rank, crowding, a, b, rng)
        })
        .collect()
}

/// Winner of one tournament between `a` and `b`.
pub fn binary_tournament<R: Rng + ?Sized>(
    rank: &[usize],
    crowding: &[f64],
    a: usize,
    b: usize,
    rng: &mut R,
) -> usize {
    match crowded_compare(rank, crowding, a, b) {
        Ordering::Less => a,
        Ordering::Greater => b,
        Ordering::Equal => {
            if rng.random_bool(0.5) {
                a
            } else {
                b
            }
        }
    }
}

/// Indices ordered from most to least dominated: highest rank first, then
/// lowest crowding, then lowest `tiebreak`.
pub fn most_dominated_order(rank: &[usize], crowding: &[f64], tiebreak: &[u64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..rank.len()).collect();
    order.sort_by(|&a, &b| {
        rank[b]
            .cmp(&rank[a])
            .then(crowding[a].total_cmp(&crowding[b]))
            .then(tiebreak[a].cmp(&tiebreak[b]))
    });
    order
}
