//! Two-sample tests and effect sizes behind the killing verdict.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};

pub const SIGNIFICANCE: f64 = 0.05;
pub const MIN_EFFECT_SIZE: f64 = 0.5;

/// Which Wilcoxon variant decides significance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatTest {
    /// Unpaired rank-sum (Mann–Whitney U).
    #[default]
    RankSum,
    /// Paired signed-rank, pairing instance k with instance k.
    SignedRank,
}

/// Upper tail of the standard normal.
fn normal_sf(z: f64) -> f64 {
    0.5 * erfc(z / std::f64::consts::SQRT_2)
}

/// Average ranks (1-based) of `values`, plus the tie-group sizes.
fn average_ranks(values: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut ties = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j + 1) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = avg;
        }
        ties.push(j - i);
        i = j;
    }
    (ranks, ties)
}

fn check_finite(v: &[f64], name: &str) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} contains non-finite values")))
    }
}

/// Two-sided Mann–Whitney U p-value, normal approximation with tie and
/// continuity correction. Returns 1.0 when every value is tied.
pub fn rank_sum_p(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() < 3 || b.len() < 3 {
        return Err(Error::invalid(format!(
            "rank-sum test needs at least 3 values per sample, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    check_finite(a, "first sample")?;
    check_finite(b, "second sample")?;
    let (n1, n2) = (a.len() as f64, b.len() as f64);
    let n = n1 + n2;
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let (ranks, ties) = average_ranks(&pooled);
    let r1: f64 = ranks[..a.len()].iter().sum();
    let u1 = r1 - n1 * (n1 + 1.0) / 2.0;
    let mu = n1 * n2 / 2.0;
    let tie_term: f64 = ties.iter().map(|&t| (t * t * t - t) as f64).sum::<f64>() / (n * (n - 1.0));
    let var = n1 * n2 / 12.0 * ((n + 1.0) - tie_term);
    if var <= 0.0 {
        return Ok(1.0);
    }
    let z = ((u1 - mu).abs() - 0.5) / var.sqrt();
    Ok((2.0 * normal_sf(z)).min(1.0))
}

/// Two-sided Wilcoxon signed-rank p-value on paired samples, normal
/// approximation with tie and continuity correction; zero differences are
/// dropped. Returns 1.0 when no nonzero difference remains.
pub fn signed_rank_p(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::invalid("signed-rank test needs paired samples"));
    }
    if a.len() < 3 {
        return Err(Error::invalid("signed-rank test needs at least 3 pairs"));
    }
    check_finite(a, "first sample")?;
    check_finite(b, "second sample")?;
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).filter(|v| *v != 0.0).collect();
    if d.is_empty() {
        return Ok(1.0);
    }
    let n = d.len() as f64;
    let abs: Vec<f64> = d.iter().map(|v| v.abs()).collect();
    let (ranks, ties) = average_ranks(&abs);
    let w_plus: f64 = d.iter().zip(&ranks).filter(|(v, _)| **v > 0.0).map(|(_, r)| r).sum();
    let mu = n * (n + 1.0) / 4.0;
    let tie_term: f64 = ties.iter().map(|&t| (t * t * t - t) as f64).sum::<f64>() / 48.0;
    let var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term;
    if var <= 0.0 {
        return Ok(1.0);
    }
    let z = ((w_plus - mu).abs() - 0.5) / var.sqrt();
    Ok((2.0 * normal_sf(z)).min(1.0))
}

fn mean_var(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Cohen's d with the df-weighted pooled sample standard deviation.
///
/// Equal means give 0; a zero pooled deviation with unequal means gives
/// `f64::INFINITY`.
pub fn cohens_d(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::invalid("effect size needs at least 2 values per sample"));
    }
    check_finite(a, "first sample")?;
    check_finite(b, "second sample")?;
    let (ma, va) = mean_var(a);
    let (mb, vb) = mean_var(b);
    let diff = (ma - mb).abs();
    if diff == 0.0 {
        return Ok(0.0);
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let pooled = (((na - 1.0) * va + (nb - 1.0) * vb) / (na + nb - 2.0)).sqrt();
    if pooled == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(diff / pooled)
}

/// Verdict of one killing check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KillOutcome {
    pub p_value: f64,
    pub effect_size: f64,
    pub killed: bool,
    pub original: Vec<f64>,
    pub mutant: Vec<f64>,
}

/// The conjunction rule for a kill.
pub fn kill_rule(p_value: f64, effect_size: f64) -> bool {
    p_value < SIGNIFICANCE && effect_size >= MIN_EFFECT_SIZE
}

/// Compares quality metrics of original and mutant instances.
pub fn is_killed(original: &[f64], mutant: &[f64], test: StatTest) -> Result<KillOutcome> {
    if original.len() != mutant.len() {
        return Err(Error::invalid(format!(
            "{} original metrics vs {} mutant metrics",
            original.len(),
            mutant.len()
        )));
    }
    let p_value = match test {
        StatTest::RankSum => rank_sum_p(original, mutant)?,
        StatTest::SignedRank => signed_rank_p(original, mutant)?,
    };
    let effect_size = cohens_d(original, mutant)?;
    Ok(KillOutcome {
        p_value,
        effect_size,
        killed: kill_rule(p_value, effect_size),
        original: original.to_vec(),
        mutant: mutant.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn identical_samples_give_p_one() {
        let a = [0.9, 0.8, 0.85, 0.7];
        assert_eq!(rank_sum_p(&a, &a).unwrap(), 1.0);
        assert_eq!(rank_sum_p(&[1.0; 5], &[1.0; 5]).unwrap(), 1.0);
    }

    #[test]
    fn separated_samples() {
        let a: Vec<f64> = (1..=10).map(f64::from).collect();
        let b: Vec<f64> = (11..=20).map(f64::from).collect();
        let p = rank_sum_p(&a, &b).unwrap();
        assert_abs_diff_eq!(p, 1.8e-4, epsilon = 1e-4);
        assert_eq!(p, rank_sum_p(&b, &a).unwrap());
    }

    #[test]
    fn undersized_samples_rejected() {
        assert!(rank_sum_p(&[1.0, 2.0], &[1.0, 2.0, 3.0]).is_err());
        assert!(cohens_d(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn cohens_d_definition() {
        assert_eq!(cohens_d(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), 0.0);
        // both samples have sd 1, means one apart
        assert_abs_diff_eq!(cohens_d(&[0.0, 1.0, 2.0], &[1.0, 2.0, 3.0]).unwrap(), 1.0, epsilon = 1e-12);
        assert_eq!(cohens_d(&[1.0; 3], &[2.0; 3]).unwrap(), f64::INFINITY);
        assert_eq!(cohens_d(&[2.0; 3], &[2.0; 3]).unwrap(), 0.0);
        // sd 0.01 in both, mean gap 0.1
        assert_abs_diff_eq!(
            cohens_d(&[0.9, 0.91, 0.92], &[0.8, 0.81, 0.82]).unwrap(),
            10.0,
            epsilon = 1e-9
        );
    }

    #[test]
    fn kill_verdicts() {
        let same = [0.9, 0.91, 0.92, 0.93];
        let k = is_killed(&same, &same, StatTest::RankSum).unwrap();
        assert!(!k.killed);
        assert_eq!((k.p_value, k.effect_size), (1.0, 0.0));

        let orig: Vec<f64> = (0..20).map(|i| 0.95 + 1e-6 * i as f64).collect();
        let mutant: Vec<f64> = (0..20).map(|i| 0.30 + 1e-6 * i as f64).collect();
        let k = is_killed(&orig, &mutant, StatTest::RankSum).unwrap();
        assert!(k.killed);
        assert!(is_killed(&orig, &mutant, StatTest::SignedRank).unwrap().killed);

        assert!(!kill_rule(0.01, 0.3));
        assert!(kill_rule(0.01, 0.5));
        assert!(!kill_rule(0.05, 2.0));
    }

    #[test]
    fn verdict_symmetric_under_swap() {
        let a = [0.8, 0.82, 0.79, 0.85, 0.81, 0.8];
        let b = [0.7, 0.72, 0.75, 0.69, 0.71, 0.8];
        let x = is_killed(&a, &b, StatTest::RankSum).unwrap();
        let y = is_killed(&b, &a, StatTest::RankSum).unwrap();
        assert_eq!(x.killed, y.killed);
        assert_eq!(x.p_value, y.p_value);
    }

    #[test]
    fn signed_rank_matches_hand_computation() {
        // differences 1..=6 all positive: W+ = 21, mu = 10.5, var = 22.75
        let a = [2.0, 4.0, 6.0, 8.0, 10.0, 12.0];
        let b = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let z: f64 = (10.5 - 0.5) / 22.75f64.sqrt();
        let expected = 2.0 * normal_sf(z);
        assert_abs_diff_eq!(signed_rank_p(&a, &b).unwrap(), expected, epsilon = 1e-15);
        assert_eq!(signed_rank_p(&a, &a).unwrap(), 1.0);
    }
}
