use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal, StudentsT};
use statrs::function::gamma::ln_gamma;

use super::rank::{tie_groups, RankTable};
use crate::error::{contract, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub statistic: f64,
    pub p_value: f64,
    /// Base-10 log of the p-value; stays finite when `p_value` underflows.
    pub log10_p: f64,
    pub alpha: f64,
    pub reject: bool,
    /// Set when the data left the test undefined and a fixed verdict was used.
    pub degenerate: bool,
    /// Effective sample size (nonzero pairs, blocks, ...).
    pub n: usize,
}

impl TestReport {
    fn from_p(statistic: f64, p: f64, alpha: f64, n: usize) -> Self {
        let p = p.clamp(0.0, 1.0);
        Self {
            statistic,
            p_value: p,
            log10_p: p.log10(),
            alpha,
            reject: p < alpha,
            degenerate: false,
            n,
        }
    }

    fn degenerate(statistic: f64, p: f64, alpha: f64, n: usize) -> Self {
        Self {
            degenerate: true,
            ..Self::from_p(statistic, p, alpha, n)
        }
    }
}

fn check_pairs(a: &[f64], b: &[f64], min: usize) -> Result<Vec<f64>> {
    if a.len() != b.len() {
        return Err(contract(format!("paired samples differ in length: {} vs {}", a.len(), b.len())));
    }
    if a.len() < min {
        return Err(contract(format!("need at least {min} pairs, got {}", a.len())));
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    if d.iter().any(|v| !v.is_finite()) {
        return Err(contract("paired samples contain non-finite values"));
    }
    Ok(d)
}

fn normal_sf(z: f64) -> f64 {
    Normal::new(0.0, 1.0).expect("unit normal").sf(z)
}

/// Standard-normal upper quantile.
pub fn z_upper(alpha: f64) -> f64 {
    Normal::new(0.0, 1.0).expect("unit normal").inverse_cdf(1.0 - alpha)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WilcoxonMethod {
    Exact,
    Normal,
    /// Exact up to [`WILCOXON_EXACT_MAX`] nonzero pairs, normal beyond.
    Auto,
}

pub const WILCOXON_EXACT_MAX: usize = 25;
pub const WILCOXON_MIN_PAIRS: usize = 6;

/// Two-sided Wilcoxon signed-rank test; `statistic` is W+, the rank sum of
/// the positive differences `a - b`.
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64], alpha: f64) -> Result<TestReport> {
    wilcoxon_with(a, b, alpha, WilcoxonMethod::Auto)
}

pub fn wilcoxon_with(a: &[f64], b: &[f64], alpha: f64, method: WilcoxonMethod) -> Result<TestReport> {
    let d = check_pairs(a, b, 1)?;
    let nonzero: Vec<f64> = d.into_iter().filter(|&v| v != 0.0).collect();
    let n = nonzero.len();
    if n == 0 {
        return Ok(TestReport::degenerate(0.0, 1.0, alpha, 0));
    }
    if n < WILCOXON_MIN_PAIRS {
        return Err(contract(format!(
            "Wilcoxon needs at least {WILCOXON_MIN_PAIRS} nonzero differences, got {n}"
        )));
    }
    let abs: Vec<f64> = nonzero.iter().map(|v| v.abs()).collect();
    // Ascending midranks of |d|.
    let neg: Vec<f64> = abs.iter().map(|v| -v).collect();
    let ranks = super::rank::rank_descending(&neg);
    let w_plus: f64 = nonzero
        .iter()
        .zip(&ranks)
        .filter(|(v, _)| **v > 0.0)
        .map(|(_, r)| r)
        .sum();

    let exact = match method {
        WilcoxonMethod::Exact => true,
        WilcoxonMethod::Normal => false,
        WilcoxonMethod::Auto => n <= WILCOXON_EXACT_MAX,
    };
    let p = if exact {
        wilcoxon_exact_p(&ranks, w_plus)
    } else {
        wilcoxon_normal_p(&abs, w_plus)
    };
    Ok(TestReport::from_p(w_plus, p, alpha, n))
}

/// Exact two-sided p-value by enumerating all sign assignments over the
/// (possibly tied) ranks. Ranks are doubled so midranks become integers.
fn wilcoxon_exact_p(ranks: &[f64], w_plus: f64) -> f64 {
    let doubled: Vec<usize> = ranks.iter().map(|r| (r * 2.0).round() as usize).collect();
    let total: usize = doubled.iter().sum();
    // dist[s] = probability that the doubled positive rank sum equals s.
    let mut dist = vec![0.0f64; total + 1];
    dist[0] = 1.0;
    for &r in &doubled {
        let mut next = vec![0.0; total + 1];
        for (s, &p) in dist.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            next[s] += 0.5 * p;
            next[s + r] += 0.5 * p;
        }
        dist = next;
    }
    let w = (w_plus * 2.0).round() as usize;
    let lower: f64 = dist[..=w].iter().sum();
    let upper: f64 = dist[w..].iter().sum();
    (2.0 * lower.min(upper)).min(1.0)
}

fn wilcoxon_normal_p(abs: &[f64], w_plus: f64) -> f64 {
    let n = abs.len() as f64;
    let mean = n * (n + 1.0) / 4.0;
    let ties: f64 = tie_groups(abs).iter().map(|&t| (t * t * t - t) as f64).sum();
    let var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - ties / 48.0;
    if var <= 0.0 {
        return 1.0;
    }
    let z = ((w_plus - mean).abs() - 0.5).max(0.0) / var.sqrt();
    (2.0 * normal_sf(z)).min(1.0)
}

/// Tabled one-sided normal quantiles for the usual levels, matching the
/// precision customarily used with the sign-test rule.
const TABLED_Z: [(f64, f64); 6] = [
    (0.10, 1.282),
    (0.05, 1.645),
    (0.025, 1.96),
    (0.01, 2.33),
    (0.005, 2.576),
    (0.001, 3.09),
];

fn check_sign_args(n_exp: usize, alpha: f64) -> Result<()> {
    if n_exp == 0 {
        return Err(contract("the sign test needs at least one experiment"));
    }
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(contract(format!("alpha must lie in (0, 0.5), got {alpha}")));
    }
    Ok(())
}

/// Wins (plus half the ties) needed over `n_exp` experiments to claim a
/// significant win: `n/2 + z * sqrt(n)/2`, with the tabled `z` at the usual
/// levels and the exact normal quantile elsewhere.
pub fn sign_test_critical(n_exp: usize, alpha: f64) -> Result<f64> {
    check_sign_args(n_exp, alpha)?;
    let z = TABLED_Z
        .iter()
        .find(|(a, _)| (a - alpha).abs() < 1e-12)
        .map(|&(_, z)| z)
        .unwrap_or_else(|| z_upper(alpha));
    Ok(critical(n_exp, z))
}

/// As [`sign_test_critical`] but always with the exact normal quantile.
pub fn sign_test_critical_exact(n_exp: usize, alpha: f64) -> Result<f64> {
    check_sign_args(n_exp, alpha)?;
    Ok(critical(n_exp, z_upper(alpha)))
}

fn critical(n: usize, z: f64) -> f64 {
    let n = n as f64;
    n / 2.0 + z * n.sqrt() / 2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignTest {
    pub wins: usize,
    pub ties: usize,
    pub losses: usize,
    pub n: usize,
    pub alpha: f64,
    pub critical: f64,
    /// Wins plus half the ties reach the critical value.
    pub reject: bool,
}

/// Counts how often `a` beats `b` and applies the critical-value rule.
pub fn sign_test(a: &[f64], b: &[f64], alpha: f64) -> Result<SignTest> {
    let d = check_pairs(a, b, 1)?;
    let wins = d.iter().filter(|&&v| v > 0.0).count();
    let ties = d.iter().filter(|&&v| v == 0.0).count();
    let losses = d.len() - wins - ties;
    let critical = sign_test_critical(d.len(), alpha)?;
    Ok(SignTest {
        wins,
        ties,
        losses,
        n: d.len(),
        alpha,
        critical,
        reject: wins as f64 + ties as f64 / 2.0 >= critical,
    })
}

/// Friedman chi-square over a rank table, corrected for within-block ties.
pub fn friedman(table: &RankTable, alpha: f64) -> Result<TestReport> {
    let (n, k) = (table.n_blocks(), table.k());
    if n < 2 || k < 2 {
        return Err(contract(format!(
            "Friedman needs at least 2 blocks and 2 methods, got {n} x {k}"
        )));
    }
    let (nf, kf) = (n as f64, k as f64);
    let avg = table.average_ranks();
    let sum_sq: f64 = avg.iter().map(|r| r * r).sum();
    let raw = 12.0 * nf / (kf * (kf + 1.0)) * (sum_sq - kf * (kf + 1.0).powi(2) / 4.0);
    let tie_sum: f64 = table
        .scores
        .iter()
        .flat_map(|row| tie_groups(row))
        .map(|t| (t * t * t - t) as f64)
        .sum();
    let correction = 1.0 - tie_sum / (nf * kf * (kf * kf - 1.0));
    if correction <= 1e-12 {
        return Ok(TestReport::degenerate(0.0, 1.0, alpha, n));
    }
    let stat = (raw / correction).max(0.0);
    let df = kf - 1.0;
    let p = ChiSquared::new(df).expect("df >= 1").sf(stat);
    let mut report = TestReport::from_p(stat, p, alpha, n);
    if p < 1e-300 {
        report.log10_p = ln_chi2_sf(stat, df) / std::f64::consts::LN_10;
    }
    Ok(report)
}

/// Natural log of the chi-square survival function via the continued
/// fraction for the upper incomplete gamma, usable far past underflow.
pub fn ln_chi2_sf(x: f64, df: f64) -> f64 {
    let a = df / 2.0;
    let x = x / 2.0;
    if x <= 0.0 {
        return 0.0;
    }
    if x < a + 1.0 {
        return ChiSquared::new(df).expect("df > 0").sf(2.0 * x).ln();
    }
    let tiny = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < 1e-15 {
            break;
        }
    }
    -x + a * x.ln() - ln_gamma(a) + h.ln()
}

/// Two-sided paired t-test on `a - b`.
///
/// Zero variance makes the statistic undefined: identical samples report
/// p = 1, a constant nonzero shift reports p = 0; both are flagged degenerate.
pub fn paired_t_test(a: &[f64], b: &[f64], alpha: f64) -> Result<TestReport> {
    let d = check_pairs(a, b, 2)?;
    let n = d.len() as f64;
    let mean = d.iter().sum::<f64>() / n;
    let var = d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    if var <= 0.0 {
        return Ok(if mean == 0.0 {
            TestReport::degenerate(0.0, 1.0, alpha, d.len())
        } else {
            TestReport::degenerate(mean.signum() * f64::INFINITY, 0.0, alpha, d.len())
        });
    }
    let t = mean / (var / n).sqrt();
    let dist = StudentsT::new(0.0, 1.0, n - 1.0).expect("df >= 1");
    let p = (2.0 * dist.sf(t.abs())).min(1.0);
    Ok(TestReport::from_p(t, p, alpha, d.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn wilcoxon_identical_is_degenerate() {
        let a = [0.1, 0.2, 0.3];
        let r = wilcoxon_signed_rank(&a, &a, 0.1).unwrap();
        assert_eq!(r.p_value, 1.0);
        assert!(!r.reject && r.degenerate);
    }

    #[test]
    fn wilcoxon_all_positive_n8() {
        let a: Vec<f64> = (1..=8).map(|i| i as f64).collect();
        let b = vec![0.0; 8];
        let r = wilcoxon_signed_rank(&a, &b, 0.1).unwrap();
        assert_abs_diff_eq!(r.p_value, 2.0 / 256.0, epsilon = 1e-15);
        assert_eq!(r.statistic, 36.0);
        let swapped = wilcoxon_signed_rank(&b, &a, 0.1).unwrap();
        assert_abs_diff_eq!(swapped.p_value, r.p_value, epsilon = 1e-15);
    }

    #[test]
    fn wilcoxon_too_few_pairs() {
        assert!(wilcoxon_signed_rank(&[1.0, 2.0], &[0.0, 0.0], 0.1).is_err());
    }

    #[test]
    fn sign_test_rule() {
        let a = vec![1.0; 30];
        let b = vec![0.0; 30];
        let r = sign_test(&a, &b, 0.05).unwrap();
        assert_eq!(r.wins, 30);
        assert!(r.reject);
        let r = sign_test(&b, &a, 0.05).unwrap();
        assert!(!r.reject);
        assert!(sign_test_critical(40, 0.5).is_err());
        assert!(sign_test_critical(0, 0.1).is_err());
    }

    #[test]
    fn friedman_identical_columns() {
        let t = RankTable::new(
            vec!["a".into(), "b".into()],
            vec!["x".into(), "y".into()],
            vec![vec![0.5, 0.5], vec![0.3, 0.3]],
        )
        .unwrap();
        let r = friedman(&t, 0.05).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn friedman_dominant_method() {
        // Method a always first, b and c alternate: mean ranks 1, 2.5, 2.5.
        let t = RankTable::new(
            vec!["a".into(), "b".into(), "c".into()],
            (0..4).map(|i| i.to_string()).collect(),
            vec![
                vec![0.9, 0.5, 0.4],
                vec![0.9, 0.4, 0.5],
                vec![0.9, 0.5, 0.4],
                vec![0.9, 0.4, 0.5],
            ],
        )
        .unwrap();
        let r = friedman(&t, 0.05).unwrap();
        // 12*4/(3*4) * (1 + 6.25 + 6.25 - 12) = 4 * 1.5 = 6.
        assert_abs_diff_eq!(r.statistic, 6.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.p_value, (-3.0f64).exp(), epsilon = 1e-12);
    }

    #[test]
    fn friedman_needs_two_blocks() {
        let t = RankTable::new(vec!["a".into(), "b".into()], vec!["x".into()], vec![vec![0.5, 0.4]]).unwrap();
        assert!(friedman(&t, 0.05).is_err());
    }

    #[test]
    fn ln_sf_matches_direct_where_representable() {
        for &(x, df) in &[(30.0, 3.0), (100.0, 7.0), (250.0, 7.0)] {
            let direct = ChiSquared::new(df).unwrap().sf(x).ln();
            assert_abs_diff_eq!(ln_chi2_sf(x, df), direct, epsilon = 1e-9 * direct.abs());
        }
    }

    #[test]
    fn paired_t_degenerate_cases() {
        let a = [1.0, 2.0, 3.0];
        let r = paired_t_test(&a, &a, 0.05).unwrap();
        assert!(r.degenerate && !r.reject && r.p_value == 1.0);
        let b = [0.0, 1.0, 2.0];
        let r = paired_t_test(&a, &b, 0.05).unwrap();
        assert!(r.degenerate && r.reject);
    }

    #[test]
    fn paired_t_jittered_shift() {
        let a = [1.001, 0.999, 1.002, 0.998];
        let b = [0.0; 4];
        let r = paired_t_test(&a, &b, 0.05).unwrap();
        assert!(r.p_value < 0.01);
    }
}
