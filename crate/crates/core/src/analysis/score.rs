use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config_search::{OperatorSearchResult, SearchOutcome};
use crate::error::{Error, Result};
use crate::harness::Operator;

/// Share of the training set's killed configurations that the test set also
/// kills.
///
/// Continuous operators compare the killed intervals `[boundary, hi]` by
/// length; discrete operators compare killed sets by size.
pub fn mutation_score(test: &OperatorSearchResult, train: &OperatorSearchResult) -> Result<f64> {
    if test.operator != train.operator {
        return Err(Error::invalid(format!(
            "cannot score {} against {}",
            test.operator, train.operator
        )));
    }
    let undefined = || Error::UndefinedScore(train.operator.to_string());
    match (&test.outcome, &train.outcome) {
        (
            SearchOutcome::Continuous { lo: tlo, hi: thi, .. },
            SearchOutcome::Continuous { lo, hi, .. },
        ) => {
            if tlo != lo || thi != hi {
                return Err(Error::invalid("test and train searched different ranges"));
            }
            let (train_from, train_to) = train.killed_interval().ok_or_else(undefined)?;
            let train_len = train_to - train_from;
            if train_len <= 0.0 {
                return Err(undefined());
            }
            let shared = match test.killed_interval() {
                None => 0.0,
                Some((from, to)) => (to.min(train_to) - from.max(train_from)).max(0.0),
            };
            Ok(shared / train_len)
        }
        (
            SearchOutcome::Discrete { killed: test_killed, .. },
            SearchOutcome::Discrete { killed: train_killed, .. },
        ) => {
            if train_killed.is_empty() {
                return Err(undefined());
            }
            let shared = test_killed.iter().filter(|k| train_killed.contains(k)).count();
            Ok(shared as f64 / train_killed.len() as f64)
        }
        _ => Err(Error::invalid("cannot mix continuous and discrete results")),
    }
}

/// Outcome of one augmentation run for the killing probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunOutcome {
    Score(f64),
    Killed(bool),
}

/// Mean mutation score (continuous) or fraction of runs killed (discrete).
pub fn killing_probability(runs: &[RunOutcome]) -> Result<f64> {
    if runs.is_empty() {
        return Err(Error::invalid("killing probability needs at least one run"));
    }
    let total: f64 = runs
        .iter()
        .map(|r| match *r {
            RunOutcome::Score(s) => s,
            RunOutcome::Killed(k) => k as u8 as f64,
        })
        .sum();
    Ok(total / runs.len() as f64)
}

/// One CSV row of the mutation score report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub operator: Operator,
    pub kind: String,
    pub train: String,
    pub test: String,
    /// Empty when the score is undefined.
    pub ms: Option<f64>,
    pub killing_probability: Option<f64>,
    pub likely_equivalent: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MutationScoreReport {
    pub rows: Vec<ScoreRow>,
}

impl MutationScoreReport {
    /// Adds a row for an operator searched with both the train and the test set.
    pub fn push(&mut self, test: &OperatorSearchResult, train: &OperatorSearchResult) -> Result<()> {
        let ms = match mutation_score(test, train) {
            Ok(v) => Some(v),
            Err(Error::UndefinedScore(_)) => None,
            Err(e) => return Err(e),
        };
        let kind = if train.is_continuous() { "continuous" } else { "discrete" };
        self.rows.push(ScoreRow {
            operator: train.operator,
            kind: kind.into(),
            train: train.summary(),
            test: test.summary(),
            ms,
            killing_probability: ms,
            likely_equivalent: train.kills_nothing(),
        });
        Ok(())
    }

    /// Mean MS over operators with a defined score.
    pub fn overall(&self) -> Option<f64> {
        let defined: Vec<f64> = self.rows.iter().filter_map(|r| r.ms).collect();
        if defined.is_empty() {
            None
        } else {
            Some(defined.iter().sum::<f64>() / defined.len() as f64)
        }
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn continuous(boundary: f64, none_killed: bool) -> OperatorSearchResult {
        OperatorSearchResult {
            operator: Operator::Trd,
            outcome: SearchOutcome::Continuous {
                lo: 0.0,
                hi: 0.99,
                epsilon: 0.01,
                boundary,
                none_killed,
                all_killed: false,
            },
            probes: vec![],
        }
    }

    fn discrete(killed: &[&str]) -> OperatorSearchResult {
        OperatorSearchResult {
            operator: Operator::Arm,
            outcome: SearchOutcome::Discrete {
                values: vec!["l0".into(), "l1".into(), "l2".into()],
                killed: killed.iter().map(|s| s.to_string()).collect(),
            },
            probes: vec![],
        }
    }

    #[test]
    fn worked_example() {
        let ms = mutation_score(&continuous(0.25, false), &continuous(0.10, false)).unwrap();
        assert!((ms - 0.74 / 0.89).abs() < 1e-12);
        assert!((ms - 0.8315).abs() < 5e-3);
    }

    #[test]
    fn same_boundary_scores_one() {
        assert_eq!(mutation_score(&continuous(0.4, false), &continuous(0.4, false)).unwrap(), 1.0);
        // test kills more than train: capped by the intersection
        assert_eq!(mutation_score(&continuous(0.1, false), &continuous(0.4, false)).unwrap(), 1.0);
        assert_eq!(mutation_score(&continuous(0.99, true), &continuous(0.4, false)).unwrap(), 0.0);
    }

    #[test]
    fn discrete_set_ratio() {
        let ms = mutation_score(&discrete(&["l1"]), &discrete(&["l0", "l1", "l2"])).unwrap();
        assert!((ms - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn undefined_when_train_kills_nothing() {
        assert!(matches!(
            mutation_score(&continuous(0.5, false), &continuous(0.99, true)),
            Err(Error::UndefinedScore(_))
        ));
        assert!(matches!(
            mutation_score(&discrete(&[]), &discrete(&[])),
            Err(Error::UndefinedScore(_))
        ));
        assert!(mutation_score(&discrete(&[]), &continuous(0.1, false)).is_err());
    }

    #[test]
    fn killing_probability_cases() {
        assert_eq!(killing_probability(&[RunOutcome::Killed(true); 10]).unwrap(), 1.0);
        assert_eq!(killing_probability(&[RunOutcome::Killed(false); 10]).unwrap(), 0.0);
        let k = killing_probability(&[RunOutcome::Score(0.8), RunOutcome::Score(0.9)]).unwrap();
        assert!((k - 0.85).abs() < 1e-12);
        assert!(killing_probability(&[]).is_err());
    }

    #[test]
    fn report_rows_and_csv() {
        let mut rep = MutationScoreReport::default();
        rep.push(&continuous(0.25, false), &continuous(0.10, false)).unwrap();
        rep.push(&discrete(&[]), &discrete(&[])).unwrap();
        assert_eq!(rep.rows.len(), 2);
        assert!(rep.rows[1].ms.is_none());
        assert!(rep.rows[1].likely_equivalent);
        assert!((rep.overall().unwrap() - 0.74 / 0.89).abs() < 1e-12);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.csv");
        rep.write_csv(&p).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("operator,kind,train,test,ms,killing_probability,likely_equivalent\n"));
        assert!(text.contains("ARM,discrete,{},{},,,true"));
    }
}
