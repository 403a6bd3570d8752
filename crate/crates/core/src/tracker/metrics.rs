//! Regression metrics over 2D position predictions.
//!
//! MAE and MSE average over all 2n scalar coordinates (the 1/(2n) factor),
//! and R² pools both coordinates into a single sum-of-squares ratio.

use crate::{Error, Result, Vec2};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressionMetrics {
    pub mae: f64,
    pub mse: f64,
    pub rmse: f64,
    pub r2: f64,
}

/// MAE = (1/2n)·Σ‖pᵢ − p̂ᵢ‖₁, MSE = (1/2n)·Σ‖pᵢ − p̂ᵢ‖₂², RMSE = √MSE,
/// R² = 1 − SS_res/SS_tot with SS_tot about the pooled per-coordinate mean.
pub fn evaluate_predictions(actual: &[Vec2], predicted: &[Vec2]) -> Result<RegressionMetrics> {
    if actual.is_empty() {
        return Err(Error::InvalidConfig(
            "metrics require at least one sample".into(),
        ));
    }
    if actual.len() != predicted.len() {
        return Err(Error::DimensionMismatch {
            expected: actual.len(),
            got: predicted.len(),
        });
    }
    let n = actual.len() as f64;
    let mut abs_sum = 0.0;
    let mut sq_sum = 0.0;
    let mut mean = Vec2::ZERO;
    for (a, p) in actual.iter().zip(predicted.iter()) {
        let d = *a - *p;
        abs_sum += d.x.abs() + d.y.abs();
        sq_sum += d.norm_sq();
        mean += *a;
    }
    let mean = mean * (1.0 / n);
    let ss_tot: f64 = actual.iter().map(|a| (*a - mean).norm_sq()).sum();
    if ss_tot == 0.0 {
        return Err(Error::UndefinedMetric(
            "R² undefined: all actual positions identical (SS_tot = 0)".into(),
        ));
    }
    let mse = sq_sum / (2.0 * n);
    Ok(RegressionMetrics {
        mae: abs_sum / (2.0 * n),
        mse,
        rmse: mse.sqrt(),
        r2: 1.0 - sq_sum / ss_tot,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn hand_example_with_half_factor() {
        // actual {(0,0),(2,2)}, predicted {(1,0),(2,2)}:
        // MAE = (1 + 0 + 0 + 0) / 4 = 0.25, MSE = 1 / 4 = 0.25
        let actual = vec![Vec2::new(0.0, 0.0), Vec2::new(2.0, 2.0)];
        let predicted = vec![Vec2::new(1.0, 0.0), Vec2::new(2.0, 2.0)];
        let m = evaluate_predictions(&actual, &predicted).unwrap();
        assert_relative_eq!(m.mae, 0.25, epsilon = 1e-15);
        assert_relative_eq!(m.mse, 0.25, epsilon = 1e-15);
        assert_relative_eq!(m.rmse, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn perfect_predictions() {
        let actual = vec![
            Vec2::new(1.0, 2.0),
            Vec2::new(3.0, 4.0),
            Vec2::new(5.0, 0.0),
        ];
        let m = evaluate_predictions(&actual, &actual).unwrap();
        assert_eq!(m.mae, 0.0);
        assert_eq!(m.mse, 0.0);
        assert_eq!(m.rmse, 0.0);
        assert_relative_eq!(m.r2, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn mean_predictor_scores_zero_r2() {
        let actual = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(2.0, 4.0),
            Vec2::new(4.0, 2.0),
        ];
        let mean = Vec2::new(2.0, 2.0);
        let predicted = vec![mean; 3];
        let m = evaluate_predictions(&actual, &predicted).unwrap();
        assert_relative_eq!(m.r2, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn rmse_squared_is_mse() {
        use rand::Rng;
        let mut rng = crate::rng::substream(21, &[0]);
        for _ in 0..100 {
            let n = rng.gen_range(2..50);
            let actual: Vec<Vec2> = (0..n)
                .map(|_| Vec2::new(rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0)))
                .collect();
            let predicted: Vec<Vec2> = actual
                .iter()
                .map(|a| *a + Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let m = evaluate_predictions(&actual, &predicted).unwrap();
            assert!((m.rmse * m.rmse - m.mse).abs() <= 1e-12 * m.mse.max(1e-300));
        }
    }

    #[test]
    fn degenerate_inputs_rejected() {
        assert!(evaluate_predictions(&[], &[]).is_err());
        let a = vec![Vec2::ZERO];
        let p = vec![Vec2::ZERO, Vec2::ZERO];
        assert!(matches!(
            evaluate_predictions(&a, &p),
            Err(Error::DimensionMismatch { .. })
        ));
        // identical actuals -> SS_tot = 0 -> R² undefined
        let a = vec![Vec2::new(1.0, 1.0); 4];
        let p = vec![Vec2::new(1.0, 2.0); 4];
        assert!(matches!(
            evaluate_predictions(&a, &p),
            Err(Error::UndefinedMetric(_))
        ));
    }
}
