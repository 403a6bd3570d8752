//! Binary hypothesis test on the position test statistic, empirical error
//! rates, ROC sweeps, and the angle-of-arrival baseline scheme.
//!
//! The test statistic is TS = ‖p̂ − p̂_A‖₂, the distance between the
//! extracted position and the tracker's predicted position. H1 (malicious)
//! is declared when TS ≥ ε_th; equality is classified H1 (fail-closed).

use crate::channel::LinkQuality;
use crate::scenario::Rsu;
use crate::{Error, Result, Vec2};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use std::io::Write;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Decision {
    H0,
    H1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Truth {
    Legit,
    Malicious,
}

/// One authentication trial outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecisionRecord {
    pub trial: u64,
    pub truth: Truth,
    pub test_statistic: f64,
    pub threshold: f64,
    pub decision: Decision,
}

/// Empirical false-alarm and missed-detection rates with their sample
/// counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorRates {
    pub p_fa: f64,
    pub p_md: f64,
    pub n_h0: usize,
    pub n_h1: usize,
}

/// One point of a receiver operating characteristic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub threshold: f64,
    pub p_fa: f64,
    /// Detection rate, 1 − p_md.
    pub p_d: f64,
}

/// TS = ‖p̂ − p̂_A‖₂.
pub fn test_statistic(p_hat: Vec2, p_ground: Vec2) -> f64 {
    p_hat.distance(p_ground)
}

/// H0 if ts < threshold, H1 otherwise (ties fail closed).
pub fn decide(ts: f64, threshold: f64) -> Result<Decision> {
    if !(threshold >= 0.0) {
        return Err(Error::InvalidConfig(format!(
            "decision threshold must be >= 0 (got {threshold})"
        )));
    }
    Ok(if ts < threshold {
        Decision::H0
    } else {
        Decision::H1
    })
}

/// Frequencies of wrong decisions per class: p_fa among legit trials, p_md
/// among malicious trials.
pub fn empirical_error_rates(records: &[DecisionRecord]) -> Result<ErrorRates> {
    let mut n_h0 = 0usize;
    let mut n_h1 = 0usize;
    let mut false_alarms = 0usize;
    let mut missed = 0usize;
    for r in records {
        match r.truth {
            Truth::Legit => {
                n_h0 += 1;
                if r.decision == Decision::H1 {
                    false_alarms += 1;
                }
            }
            Truth::Malicious => {
                n_h1 += 1;
                if r.decision == Decision::H0 {
                    missed += 1;
                }
            }
        }
    }
    if n_h0 == 0 || n_h1 == 0 {
        return Err(Error::InvalidConfig(
            "error rates need at least one legit and one malicious record".into(),
        ));
    }
    Ok(ErrorRates {
        p_fa: false_alarms as f64 / n_h0 as f64,
        p_md: missed as f64 / n_h1 as f64,
        n_h0,
        n_h1,
    })
}

/// One ROC point per threshold, all computed from the same fixed score
/// arrays.
pub fn roc_sweep(ts_h0: &[f64], ts_h1: &[f64], thresholds: &[f64]) -> Result<Vec<RocPoint>> {
    if ts_h0.is_empty() || ts_h1.is_empty() {
        return Err(Error::InvalidConfig(
            "roc_sweep needs non-empty score arrays".into(),
        ));
    }
    if thresholds.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidConfig(
            "thresholds must be sorted ascending".into(),
        ));
    }
    let frac_ge = |scores: &[f64], thr: f64| {
        scores.iter().filter(|&&s| s >= thr).count() as f64 / scores.len() as f64
    };
    thresholds
        .iter()
        .map(|&thr| {
            if !(thr >= 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "roc threshold must be >= 0 (got {thr})"
                )));
            }
            Ok(RocPoint {
                threshold: thr,
                p_fa: frac_ge(ts_h0, thr),
                p_d: frac_ge(ts_h1, thr),
            })
        })
        .collect()
}

/// Wrap an angle to (−π, π].
pub fn wrap_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Noisy bearing of the transmitter as seen from one RSU: the true
/// atan2 bearing plus Gaussian noise of variance 1/(2·LQ_linear), wrapped
/// to (−π, π].
pub fn aoa_estimate<R: Rng>(tx: Vec2, rsu: &Rsu, lq: LinkQuality, rng: &mut R) -> Result<f64> {
    let d = tx - rsu.position;
    if d.norm_sq() == 0.0 {
        return Err(Error::InvalidConfig(
            "AoA bearing undefined for a transmitter at the RSU position".into(),
        ));
    }
    let bearing = d.y.atan2(d.x);
    let sigma = (1.0 / (2.0 * lq.linear())).sqrt();
    let noise: f64 = rng.sample(StandardNormal);
    Ok(wrap_angle(bearing + sigma * noise))
}

/// ℓ₂ norm of the wrapped per-RSU bearing differences.
pub fn aoa_test_statistic(angles: &[f64; 3], ground_angles: &[f64; 3]) -> f64 {
    angles
        .iter()
        .zip(ground_angles.iter())
        .map(|(a, g)| wrap_angle(a - g).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Decision rule of the baseline: threshold the angular test statistic.
pub fn aoa_decide(angles: &[f64; 3], ground_angles: &[f64; 3], threshold: f64) -> Result<Decision> {
    decide(aoa_test_statistic(angles, ground_angles), threshold)
}

/// Export decision records as CSV: `trial,truth,ts,threshold,decision`.
pub fn decision_log_csv<W: Write>(records: &[DecisionRecord], mut w: W) -> Result<()> {
    writeln!(w, "trial,truth,ts,threshold,decision")?;
    for r in records {
        let truth = match r.truth {
            Truth::Legit => "legit",
            Truth::Malicious => "malicious",
        };
        let decision = match r.decision {
            Decision::H0 => "H0",
            Decision::H1 => "H1",
        };
        writeln!(
            w,
            "{},{},{:.6},{:.6},{}",
            r.trial, truth, r.test_statistic, r.threshold, decision
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn test_statistic_examples() {
        assert_eq!(
            test_statistic(Vec2::new(1.0, 1.0), Vec2::new(1.0, 1.0)),
            0.0
        );
        assert_relative_eq!(
            test_statistic(Vec2::new(4.0, 5.0), Vec2::new(1.0, 1.0)),
            5.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn decide_branches_and_tie() {
        assert_eq!(decide(0.1, 2.0).unwrap(), Decision::H0);
        assert_eq!(decide(5.0, 2.0).unwrap(), Decision::H1);
        assert_eq!(decide(2.0, 2.0).unwrap(), Decision::H1); // tie fails closed
        assert!(decide(1.0, -0.5).is_err());
    }

    #[test]
    fn error_rates_at_extreme_thresholds() {
        let mk = |truth, ts, thr: f64| DecisionRecord {
            trial: 0,
            truth,
            test_statistic: ts,
            threshold: thr,
            decision: decide(ts, thr).unwrap(),
        };
        // threshold above every score: all H0
        let records: Vec<_> = (0..10)
            .map(|i| {
                let truth = if i % 2 == 0 {
                    Truth::Legit
                } else {
                    Truth::Malicious
                };
                mk(truth, i as f64, 100.0)
            })
            .collect();
        let r = empirical_error_rates(&records).unwrap();
        assert_eq!((r.p_fa, r.p_md), (0.0, 1.0));
        assert_eq!((r.n_h0, r.n_h1), (5, 5));

        // threshold 0: TS >= 0 always, all H1
        let records: Vec<_> = (0..10)
            .map(|i| {
                let truth = if i % 2 == 0 {
                    Truth::Legit
                } else {
                    Truth::Malicious
                };
                mk(truth, i as f64, 0.0)
            })
            .collect();
        let r = empirical_error_rates(&records).unwrap();
        assert_eq!((r.p_fa, r.p_md), (1.0, 0.0));
    }

    #[test]
    fn error_rates_require_both_classes() {
        let only_legit = vec![DecisionRecord {
            trial: 0,
            truth: Truth::Legit,
            test_statistic: 1.0,
            threshold: 2.0,
            decision: Decision::H0,
        }];
        assert!(empirical_error_rates(&only_legit).is_err());
        assert!(empirical_error_rates(&[]).is_err());
    }

    #[test]
    fn roc_endpoints_and_staircase() {
        let mut rng = substream(5, &[1]);
        let h0: Vec<f64> = (0..1000).map(|_| rng.gen_range(0.0..1.0)).collect();
        let h1: Vec<f64> = (0..1000).map(|_| rng.gen_range(0.5..2.0)).collect();
        let max = 2.0;
        let thresholds: Vec<f64> = (0..=200).map(|i| i as f64 * (max + 1.0) / 200.0).collect();
        let roc = roc_sweep(&h0, &h1, &thresholds).unwrap();
        assert_eq!(roc[0].p_fa, 1.0);
        assert_eq!(roc[0].p_d, 1.0);
        assert_eq!(roc.last().unwrap().p_fa, 0.0);
        assert_eq!(roc.last().unwrap().p_d, 0.0);
        for w in roc.windows(2) {
            assert!(w[1].p_fa <= w[0].p_fa);
            assert!(w[1].p_d <= w[0].p_d);
        }
    }

    #[test]
    fn roc_rejects_unsorted_thresholds() {
        assert!(roc_sweep(&[1.0], &[2.0], &[1.0, 0.5]).is_err());
        assert!(roc_sweep(&[], &[1.0], &[0.0]).is_err());
    }

    #[test]
    fn aoa_bearing_geometry() {
        let rsu = Rsu {
            id: 0,
            position: Vec2::ZERO,
        };
        let mut rng = substream(1, &[0]);
        // enormous LQ -> negligible noise
        let a = aoa_estimate(
            Vec2::new(1.0, 1.0),
            &rsu,
            LinkQuality::from_db(200.0),
            &mut rng,
        )
        .unwrap();
        assert_relative_eq!(a, PI / 4.0, epsilon = 1e-6);
        assert!(aoa_estimate(Vec2::ZERO, &rsu, LinkQuality::from_db(10.0), &mut rng).is_err());
    }

    #[test]
    fn aoa_wrapping_stays_in_range() {
        let rsu = Rsu {
            id: 0,
            position: Vec2::ZERO,
        };
        let mut rng = substream(2, &[0]);
        for _ in 0..1000 {
            // transmitter on the negative x axis: true bearing exactly pi
            let a = aoa_estimate(
                Vec2::new(-5.0, 0.0),
                &rsu,
                LinkQuality::from_db(3.0),
                &mut rng,
            )
            .unwrap();
            assert!(a > -PI && a <= PI);
        }
    }

    #[test]
    fn aoa_sample_variance_matches_model() {
        let rsu = Rsu {
            id: 0,
            position: Vec2::ZERO,
        };
        let lq = LinkQuality::from_db(10.0);
        let expected = 1.0 / (2.0 * lq.linear());
        let mut rng = substream(3, &[0]);
        let n = 100_000;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..n {
            let a = aoa_estimate(Vec2::new(3.0, 4.0), &rsu, lq, &mut rng).unwrap();
            sum += a;
            sum_sq += a * a;
        }
        let mean = sum / n as f64;
        let var = sum_sq / n as f64 - mean * mean;
        assert!((var - expected).abs() / expected < 0.05);
    }

    #[test]
    fn aoa_decide_examples() {
        let g = [0.1, 0.2, 0.3];
        assert_eq!(aoa_decide(&g, &g, 0.01).unwrap(), Decision::H0);
        // differences (0.3, 0, 0.4) -> TS 0.5 >= 0.4 -> H1
        let a = [g[0] + 0.3, g[1], g[2] + 0.4];
        assert_relative_eq!(aoa_test_statistic(&a, &g), 0.5, epsilon = 1e-12);
        assert_eq!(aoa_decide(&a, &g, 0.4).unwrap(), Decision::H1);
    }

    #[test]
    fn decision_log_format() {
        let records = vec![DecisionRecord {
            trial: 3,
            truth: Truth::Malicious,
            test_statistic: 1.25,
            threshold: 0.5,
            decision: Decision::H1,
        }];
        let mut buf = Vec::new();
        decision_log_csv(&records, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "trial,truth,ts,threshold,decision\n3,malicious,1.250000,0.500000,H1\n"
        );
    }

    proptest! {
        #[test]
        fn decide_is_monotone(ts in 0.0f64..100.0, ts2 in 0.0f64..100.0, thr in 0.0f64..100.0) {
            let (lo, hi) = if ts <= ts2 { (ts, ts2) } else { (ts2, ts) };
            if decide(lo, thr).unwrap() == Decision::H1 {
                prop_assert_eq!(decide(hi, thr).unwrap(), Decision::H1);
            }
        }

        #[test]
        fn roc_is_monotone_staircase(
            h0 in prop::collection::vec(0.0f64..10.0, 1..50),
            h1 in prop::collection::vec(0.0f64..10.0, 1..50),
            grid in prop::collection::vec(0.0f64..11.0, 2..40),
        ) {
            let mut grid = grid;
            grid.sort_by(f64::total_cmp);
            let roc = roc_sweep(&h0, &h1, &grid).unwrap();
            for w in roc.windows(2) {
                prop_assert!(w[1].p_fa <= w[0].p_fa);
                prop_assert!(w[1].p_d <= w[0].p_d);
            }
        }

        #[test]
        fn wrap_angle_range_and_identity(a in -50.0f64..50.0) {
            let w = wrap_angle(a);
            prop_assert!(w > -PI && w <= PI);
            // wrapping is idempotent and preserves the angle modulo 2pi
            prop_assert!((wrap_angle(w) - w).abs() < 1e-12);
            let diff = (a - w).rem_euclid(TAU);
            prop_assert!(diff < 1e-9 || (TAU - diff) < 1e-9);
        }
    }
}
