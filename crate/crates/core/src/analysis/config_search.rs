//! Search over operator configurations for the killability boundary.

use serde::{Deserialize, Serialize};

use super::stats::KillOutcome;
use crate::error::{Error, Result};
use crate::harness::{short_real, Operator};

/// Default bisection precision for percentage operators.
pub const DEFAULT_EPSILON: f64 = 0.01;

/// What an oracle reports for one probed configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub killed: bool,
    pub p_value: Option<f64>,
    pub effect_size: Option<f64>,
}

impl From<bool> for Verdict {
    fn from(killed: bool) -> Self {
        Verdict {
            killed,
            p_value: None,
            effect_size: None,
        }
    }
}

impl From<&KillOutcome> for Verdict {
    fn from(k: &KillOutcome) -> Self {
        Verdict {
            killed: k.killed,
            p_value: Some(k.p_value),
            effect_size: Some(k.effect_size),
        }
    }
}

impl From<KillOutcome> for Verdict {
    fn from(k: KillOutcome) -> Self {
        Verdict::from(&k)
    }
}

/// One oracle call, in probe order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub param: String,
    #[serde(flatten)]
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SearchOutcome {
    Continuous {
        lo: f64,
        hi: f64,
        epsilon: f64,
        /// Last observed non-killed value; `hi` when nothing is killed and
        /// `lo` when even `lo` is killed.
        boundary: f64,
        /// The most aggressive configuration survived.
        none_killed: bool,
        /// Even the least aggressive configuration was killed.
        all_killed: bool,
    },
    Discrete {
        values: Vec<String>,
        killed: Vec<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorSearchResult {
    pub operator: Operator,
    pub outcome: SearchOutcome,
    pub probes: Vec<Probe>,
}

impl OperatorSearchResult {
    pub fn is_continuous(&self) -> bool {
        matches!(self.outcome, SearchOutcome::Continuous { .. })
    }

    /// Whether no configuration at all was killed.
    pub fn kills_nothing(&self) -> bool {
        match &self.outcome {
            SearchOutcome::Continuous { none_killed, .. } => *none_killed,
            SearchOutcome::Discrete { killed, .. } => killed.is_empty(),
        }
    }

    /// Continuous killed region as an interval, if any.
    pub fn killed_interval(&self) -> Option<(f64, f64)> {
        match self.outcome {
            SearchOutcome::Continuous {
                none_killed: true, ..
            } => None,
            SearchOutcome::Continuous { boundary, hi, .. } => Some((boundary, hi)),
            SearchOutcome::Discrete { .. } => None,
        }
    }

    /// Compact description of the killed region for reports.
    pub fn summary(&self) -> String {
        match &self.outcome {
            SearchOutcome::Continuous {
                none_killed: true, ..
            } => "none".into(),
            SearchOutcome::Continuous {
                boundary,
                all_killed,
                ..
            } => {
                if *all_killed {
                    format!("all>={}", short_real(*boundary))
                } else {
                    short_real(*boundary)
                }
            }
            SearchOutcome::Discrete { killed, .. } => format!("{{{}}}", killed.join(";")),
        }
    }
}

/// Upper bound on oracle calls made by [`binary_search_config`].
pub fn probe_bound(lo: f64, hi: f64, epsilon: f64) -> usize {
    bisection_steps(lo, hi, epsilon) + 2
}

fn bisection_steps(lo: f64, hi: f64, epsilon: f64) -> usize {
    let ratio = (hi - lo) / epsilon;
    if ratio <= 1.0 {
        0
    } else {
        ratio.log2().ceil() as usize
    }
}

fn probe_error(param: String, e: Error) -> Error {
    Error::Probe {
        param,
        source: Box::new(e),
    }
}

/// Bisection for the least aggressive killed configuration of a continuous
/// operator, with `lo..hi` ordered by increasing aggressiveness.
///
/// The most aggressive value `hi` is probed first; if it survives, the
/// search stops. Otherwise the interval is halved until its width is at most
/// `epsilon` and the last surviving value becomes the boundary.
pub fn binary_search_config<F, V>(
    operator: Operator,
    lo: f64,
    hi: f64,
    epsilon: f64,
    mut oracle: F,
) -> Result<OperatorSearchResult>
where
    F: FnMut(f64) -> Result<V>,
    V: Into<Verdict>,
{
    if !(epsilon > 0.0) {
        return Err(Error::invalid("epsilon must be positive"));
    }
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::invalid(format!("bad search range ({lo}, {hi})")));
    }
    let mut probes = Vec::new();
    let mut probe = |x: f64, probes: &mut Vec<Probe>| -> Result<bool> {
        let v: Verdict = oracle(x).map_err(|e| probe_error(x.to_string(), e))?.into();
        probes.push(Probe {
            param: x.to_string(),
            verdict: v,
        });
        Ok(v.killed)
    };
    let done = |boundary: f64, none_killed: bool, all_killed: bool, probes: Vec<Probe>| {
        Ok(OperatorSearchResult {
            operator,
            outcome: SearchOutcome::Continuous {
                lo,
                hi,
                epsilon,
                boundary,
                none_killed,
                all_killed,
            },
            probes,
        })
    };

    if !probe(hi, &mut probes)? {
        return done(hi, true, false, probes);
    }
    let (mut low, mut high) = (lo, hi);
    let mut survivor = None;
    for _ in 0..bisection_steps(lo, hi, epsilon) {
        let mid = 0.5 * (low + high);
        if probe(mid, &mut probes)? {
            if let Some(s) = survivor {
                if mid < s {
                    log::warn!("{operator}: {mid} killed below surviving {s}; oracle not monotone");
                }
            }
            high = mid;
        } else {
            low = mid;
            survivor = Some(mid);
        }
    }
    match survivor {
        Some(s) => done(s, false, false, probes),
        None => {
            let killed = probe(lo, &mut probes)?;
            done(lo, false, killed, probes)
        }
    }
}

/// Evaluates every discrete configuration.
pub fn exhaustive_search<T, F, V>(
    operator: Operator,
    values: &[T],
    label: impl Fn(&T) -> String,
    mut oracle: F,
) -> Result<OperatorSearchResult>
where
    F: FnMut(&T) -> Result<V>,
    V: Into<Verdict>,
{
    if values.is_empty() {
        return Err(Error::invalid(format!("{operator}: no configurations to search")));
    }
    let mut probes = Vec::with_capacity(values.len());
    let mut killed = Vec::new();
    for v in values {
        let name = label(v);
        let verdict: Verdict = oracle(v).map_err(|e| probe_error(name.clone(), e))?.into();
        if verdict.killed {
            killed.push(name.clone());
        }
        probes.push(Probe {
            param: name,
            verdict,
        });
    }
    Ok(OperatorSearchResult {
        operator,
        outcome: SearchOutcome::Discrete {
            values: values.iter().map(label).collect(),
            killed,
        },
        probes,
    })
}

/// A mutant is likely equivalent when even the training data cannot kill it.
pub fn likely_equivalent<F, V>(mut train_oracle: F) -> Result<bool>
where
    F: FnMut() -> Result<V>,
    V: Into<Verdict>,
{
    Ok(!train_oracle()?.into().killed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step(t: f64) -> impl FnMut(f64) -> Result<bool> {
        move |x| Ok(x >= t)
    }

    #[test]
    fn everything_killed_reports_lo() {
        let r = binary_search_config(Operator::Trd, 0.0, 0.99, 0.01, |_| Ok(true)).unwrap();
        match r.outcome {
            SearchOutcome::Continuous {
                boundary, all_killed, ..
            } => {
                assert_eq!(boundary, 0.0);
                assert!(all_killed);
            }
            _ => unreachable!(),
        }
        assert!(r.probes.len() <= probe_bound(0.0, 0.99, 0.01));
    }

    #[test]
    fn step_oracle_boundary() {
        let r = binary_search_config(Operator::Trd, 0.0, 0.99, 0.01, step(0.30)).unwrap();
        let SearchOutcome::Continuous { boundary, .. } = r.outcome else {
            unreachable!()
        };
        assert!((0.29..0.30).contains(&boundary), "{boundary}");
        assert!(r.probes.len() <= 7 + 1 + 1);
    }

    #[test]
    fn never_killed_stops_after_first_probe() {
        let r = binary_search_config(Operator::Trd, 0.0, 0.99, 0.01, |_| Ok(false)).unwrap();
        assert_eq!(r.probes.len(), 1);
        assert_eq!(r.probes[0].param, "0.99");
        assert!(r.kills_nothing());
        assert_eq!(r.killed_interval(), None);
    }

    #[test]
    fn oracle_errors_name_the_parameter() {
        let err = binary_search_config(Operator::Tan, 0.0, 0.5, 0.1, |_| -> Result<bool> {
            Err(Error::invalid("boom"))
        })
        .unwrap_err();
        assert!(matches!(err, Error::Probe { ref param, .. } if param == "0.5"));
    }

    #[test]
    fn exhaustive_filters() {
        let layers = [0usize, 1, 2, 3];
        let name = |l: &usize| format!("l{l}");
        let none = exhaustive_search(Operator::Arm, &layers, name, |_| Ok(false)).unwrap();
        assert!(none.kills_nothing());
        let all = exhaustive_search(Operator::Arm, &layers, name, |_| Ok(true)).unwrap();
        let SearchOutcome::Discrete { killed, .. } = &all.outcome else {
            unreachable!()
        };
        assert_eq!(killed.len(), 4);
        let mixed = exhaustive_search(Operator::Arm, &layers, name, |l| Ok(l % 2 == 1)).unwrap();
        let SearchOutcome::Discrete { killed, .. } = &mixed.outcome else {
            unreachable!()
        };
        assert_eq!(killed, &["l1", "l3"]);
        assert!(exhaustive_search(Operator::Arm, &[] as &[usize], name, |_| Ok(true)).is_err());
    }

    #[test]
    fn equivalence_follows_train_verdict() {
        assert!(!likely_equivalent(|| Ok(true)).unwrap());
        assert!(likely_equivalent(|| Ok(false)).unwrap());
    }
}
