//! Position extraction from range estimates.
//!
//! Squaring the range equations linearizes them in θ = [x, y, x²+y²]ᵀ:
//! each anchor contributes the row [−2xⱼ, −2yⱼ, 1]·θ = r̂ⱼ² − xⱼ² − yⱼ².
//! The least-squares solution of that system yields the position in its
//! first two entries. [`grid_oracle`] provides an independent brute-force
//! minimizer of the nonlinear range residual for verification.

use crate::channel::RangeEstimate;
use crate::scenario::Rsu;
use crate::{Error, Result, Vec2};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Condition number above which the anchor geometry is rejected outright.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Condition number above which an estimate is flagged but still returned.
pub const ILL_CONDITION_FLAG: f64 = 1e8;

/// The linearized squared-range system A·θ = b̂.
#[derive(Debug, Clone)]
pub struct RangeSystem {
    /// L×3 design matrix, row j = [−2xⱼ, −2yⱼ, 1].
    pub design_matrix: DMatrix<f64>,
    /// Noisy observation vector, b̂ⱼ = r̂ⱼ² − xⱼ² − yⱼ².
    pub observation: DVector<f64>,
    pub anchor_ids: Vec<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConditionFlag {
    Ok,
    IllConditioned,
}

/// Least-squares solution with diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositionEstimate {
    /// (x̂, ŷ) extracted from θ̂.
    pub position: Vec2,
    /// Full solution θ̂ = [x̂, ŷ, θ̂₃].
    pub theta: [f64; 3],
    /// ‖A·θ̂ − b̂‖₂.
    pub residual_norm: f64,
    pub condition_flag: ConditionFlag,
}

/// Axis-aligned search rectangle for [`grid_oracle`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub min: Vec2,
    pub max: Vec2,
}

impl Bounds {
    pub fn new(min: Vec2, max: Vec2) -> Self {
        Bounds { min, max }
    }

    pub fn centered(center: Vec2, half_width: f64) -> Self {
        Bounds {
            min: center + Vec2::new(-half_width, -half_width),
            max: center + Vec2::new(half_width, half_width),
        }
    }
}

/// Assemble the linearized system from anchors and their range estimates,
/// matched by RSU id.
pub fn build_system(rsus: &[Rsu], ranges: &[RangeEstimate]) -> Result<RangeSystem> {
    if rsus.len() != ranges.len() {
        return Err(Error::DimensionMismatch {
            expected: rsus.len(),
            got: ranges.len(),
        });
    }
    if rsus.len() < 3 {
        return Err(Error::InsufficientCoverage {
            needed: 3,
            in_range: rsus.len(),
        });
    }
    let l = rsus.len();
    let mut a = DMatrix::zeros(l, 3);
    let mut b = DVector::zeros(l);
    let mut ids = Vec::with_capacity(l);
    for (j, rsu) in rsus.iter().enumerate() {
        let range = ranges
            .iter()
            .find(|r| r.rsu_id == rsu.id)
            .ok_or_else(|| Error::InvalidConfig(format!("no range estimate for RSU {}", rsu.id)))?;
        let p = rsu.position;
        a[(j, 0)] = -2.0 * p.x;
        a[(j, 1)] = -2.0 * p.y;
        a[(j, 2)] = 1.0;
        b[j] = range.range * range.range - p.x * p.x - p.y * p.y;
        ids.push(rsu.id);
    }
    Ok(RangeSystem {
        design_matrix: a,
        observation: b,
        anchor_ids: ids,
    })
}

/// Solve min‖A·θ − b̂‖₂² by orthogonal factorization and extract the
/// position estimate.
pub fn solve_ls(system: &RangeSystem) -> Result<PositionEstimate> {
    let svd = system.design_matrix.clone().svd(true, true);
    let s_max = svd.singular_values.max();
    let s_min = svd.singular_values.min();
    let cond = if s_min > 0.0 {
        s_max / s_min
    } else {
        f64::INFINITY
    };
    if !cond.is_finite() || cond > CONDITION_LIMIT {
        return Err(Error::DegenerateGeometry {
            cond,
            limit: CONDITION_LIMIT,
        });
    }
    let mut theta = svd
        .solve(&system.observation, 0.0)
        .map_err(|e| Error::InvalidConfig(e.to_string()))?;
    // A couple of refinement steps sharpen the factorization's solution to
    // machine precision (matters for the zero-noise consistency contract).
    for _ in 0..2 {
        let r = &system.observation - &system.design_matrix * &theta;
        if let Ok(delta) = svd.solve(&r, 0.0) {
            theta += delta;
        }
    }
    let residual = (&system.design_matrix * &theta) - &system.observation;
    Ok(PositionEstimate {
        position: Vec2::new(theta[0], theta[1]),
        theta: [theta[0], theta[1], theta[2]],
        residual_norm: residual.norm(),
        condition_flag: if cond > ILL_CONDITION_FLAG {
            ConditionFlag::IllConditioned
        } else {
            ConditionFlag::Ok
        },
    })
}

/// Position from the first two entries of θ̂; the x²+y² surrogate is
/// discarded.
pub fn extract_position(theta: [f64; 3]) -> Vec2 {
    Vec2::new(theta[0], theta[1])
}

/// Nonlinear range residual Σⱼ (‖p − pⱼ‖ − r̂ⱼ)².
pub fn range_cost(rsus: &[Rsu], ranges: &[RangeEstimate], p: Vec2) -> f64 {
    rsus.iter()
        .zip(ranges.iter())
        .map(|(rsu, r)| {
            let d = rsu.position.distance(p) - r.range;
            d * d
        })
        .sum()
}

/// Exhaustive grid minimizer of [`range_cost`] over `bounds`. Ties are
/// broken by smaller x, then smaller y. If the continuous minimum lies
/// outside the bounds the boundary argmin is returned.
pub fn grid_oracle(
    rsus: &[Rsu],
    ranges: &[RangeEstimate],
    bounds: Bounds,
    step: f64,
) -> Result<Vec2> {
    if !(step > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "grid step must be > 0 (got {step})"
        )));
    }
    if bounds.max.x < bounds.min.x || bounds.max.y < bounds.min.y {
        return Err(Error::EmptyGrid);
    }
    let nx = ((bounds.max.x - bounds.min.x) / step).floor() as usize + 1;
    let ny = ((bounds.max.y - bounds.min.y) / step).floor() as usize + 1;

    let mut best = (f64::INFINITY, Vec2::ZERO);
    for ix in 0..nx {
        let x = bounds.min.x + ix as f64 * step;
        for iy in 0..ny {
            let y = bounds.min.y + iy as f64 * step;
            let p = Vec2::new(x, y);
            let cost = range_cost(rsus, ranges, p);
            if cost < best.0 {
                best = (cost, p);
            }
        }
    }
    Ok(best.1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn anchors() -> Vec<Rsu> {
        vec![
            Rsu {
                id: 0,
                position: Vec2::new(0.0, 0.0),
            },
            Rsu {
                id: 1,
                position: Vec2::new(10.0, 0.0),
            },
            Rsu {
                id: 2,
                position: Vec2::new(0.0, 10.0),
            },
        ]
    }

    fn exact_ranges(rsus: &[Rsu], p: Vec2) -> Vec<RangeEstimate> {
        rsus.iter()
            .map(|r| RangeEstimate {
                rsu_id: r.id,
                range: r.position.distance(p),
                variance: 0.0,
            })
            .collect()
    }

    #[test]
    fn build_system_direct_substitution() {
        let rsus = anchors();
        let ranges = vec![
            RangeEstimate {
                rsu_id: 0,
                range: 5.0,
                variance: 0.0,
            },
            RangeEstimate {
                rsu_id: 1,
                range: 65f64.sqrt(),
                variance: 0.0,
            },
            RangeEstimate {
                rsu_id: 2,
                range: 45f64.sqrt(),
                variance: 0.0,
            },
        ];
        let sys = build_system(&rsus, &ranges).unwrap();
        assert_relative_eq!(sys.observation[0], 25.0, epsilon = 1e-9);
        assert_relative_eq!(sys.observation[1], -35.0, epsilon = 1e-9);
        assert_relative_eq!(sys.observation[2], -55.0, epsilon = 1e-9);
        assert_eq!(
            sys.design_matrix.row(0).transpose().as_slice(),
            &[0.0, 0.0, 1.0]
        );
        assert_eq!(
            sys.design_matrix.row(1).transpose().as_slice(),
            &[-20.0, 0.0, 1.0]
        );
        assert_eq!(
            sys.design_matrix.row(2).transpose().as_slice(),
            &[0.0, -20.0, 1.0]
        );
    }

    #[test]
    fn build_system_too_few_anchors() {
        let rsus = anchors()[..2].to_vec();
        let ranges = exact_ranges(&rsus, Vec2::new(3.0, 4.0));
        assert!(matches!(
            build_system(&rsus, &ranges),
            Err(Error::InsufficientCoverage { .. })
        ));
    }

    #[test]
    fn build_system_zero_ranges() {
        let rsus = anchors();
        let ranges: Vec<RangeEstimate> = rsus
            .iter()
            .map(|r| RangeEstimate {
                rsu_id: r.id,
                range: 0.0,
                variance: 0.0,
            })
            .collect();
        let sys = build_system(&rsus, &ranges).unwrap();
        for (j, rsu) in rsus.iter().enumerate() {
            assert_relative_eq!(sys.observation[j], -rsu.position.norm_sq(), epsilon = 1e-12);
        }
    }

    #[test]
    fn solve_consistent_system() {
        let rsus = anchors();
        let ranges = exact_ranges(&rsus, Vec2::new(3.0, 4.0));
        let est = solve_ls(&build_system(&rsus, &ranges).unwrap()).unwrap();
        assert_relative_eq!(est.position.x, 3.0, epsilon = 1e-9);
        assert_relative_eq!(est.position.y, 4.0, epsilon = 1e-9);
        assert_relative_eq!(est.theta[2], 25.0, epsilon = 1e-6);
        assert!(est.residual_norm < 1e-9, "residual {}", est.residual_norm);
        assert_eq!(est.condition_flag, ConditionFlag::Ok);
    }

    #[test]
    fn collinear_anchors_are_degenerate() {
        let rsus = vec![
            Rsu {
                id: 0,
                position: Vec2::new(0.0, 0.0),
            },
            Rsu {
                id: 1,
                position: Vec2::new(10.0, 0.0),
            },
            Rsu {
                id: 2,
                position: Vec2::new(20.0, 0.0),
            },
        ];
        let ranges = exact_ranges(&rsus, Vec2::new(3.0, 4.0));
        assert!(matches!(
            solve_ls(&build_system(&rsus, &ranges).unwrap()),
            Err(Error::DegenerateGeometry { .. })
        ));
    }

    #[test]
    fn extract_position_projects() {
        assert_eq!(extract_position([3.0, 4.0, 25.0]), Vec2::new(3.0, 4.0));
        assert_eq!(extract_position([0.0, 0.0, 0.0]), Vec2::ZERO);
        assert_eq!(extract_position([1.0, 2.0, 99.0]), Vec2::new(1.0, 2.0));
    }

    #[test]
    fn normal_equation_identity() {
        // A^T (A theta - b) = 0 for the least-squares solution.
        let rsus = vec![
            Rsu {
                id: 0,
                position: Vec2::new(0.0, 0.0),
            },
            Rsu {
                id: 1,
                position: Vec2::new(10.0, 0.0),
            },
            Rsu {
                id: 2,
                position: Vec2::new(0.0, 10.0),
            },
            Rsu {
                id: 3,
                position: Vec2::new(12.0, 9.0),
            },
        ];
        let mut ranges = exact_ranges(&rsus, Vec2::new(3.0, 4.0));
        // perturb so the system is inconsistent
        ranges[0].range += 0.5;
        ranges[2].range -= 0.3;
        let sys = build_system(&rsus, &ranges).unwrap();
        let est = solve_ls(&sys).unwrap();
        let theta = DVector::from_column_slice(&est.theta);
        let grad = sys.design_matrix.transpose() * (&sys.design_matrix * &theta - &sys.observation);
        let scale = sys.design_matrix.transpose().norm() * sys.observation.norm();
        assert!(grad.norm() / scale < 1e-8);
    }

    #[test]
    fn perturbations_never_beat_least_squares() {
        let rsus = anchors();
        let mut ranges = exact_ranges(&rsus, Vec2::new(3.0, 4.0));
        ranges[1].range += 0.7;
        let sys = build_system(&rsus, &ranges).unwrap();
        let est = solve_ls(&sys).unwrap();
        let base = {
            let theta = DVector::from_column_slice(&est.theta);
            ((&sys.design_matrix * theta) - &sys.observation).norm_squared()
        };
        let mut rng = crate::rng::substream(5, &[11]);
        use rand::Rng;
        for _ in 0..100 {
            let dir: [f64; 3] = [
                rng.gen::<f64>() - 0.5,
                rng.gen::<f64>() - 0.5,
                rng.gen::<f64>() - 0.5,
            ];
            let norm = (dir[0].powi(2) + dir[1].powi(2) + dir[2].powi(2)).sqrt();
            let theta = DVector::from_iterator(
                3,
                est.theta
                    .iter()
                    .zip(dir.iter())
                    .map(|(t, d)| t + 1e-3 * d / norm),
            );
            let cost = ((&sys.design_matrix * theta) - &sys.observation).norm_squared();
            assert!(cost >= base - 1e-12);
        }
    }

    #[test]
    fn grid_oracle_recovers_exact_point() {
        let rsus = anchors();
        let ranges = exact_ranges(&rsus, Vec2::new(3.0, 4.0));
        let p = grid_oracle(
            &rsus,
            &ranges,
            Bounds::new(Vec2::new(0.0, 0.0), Vec2::new(8.0, 8.0)),
            0.1,
        )
        .unwrap();
        assert_relative_eq!(p.x, 3.0, epsilon = 1e-9);
        assert_relative_eq!(p.y, 4.0, epsilon = 1e-9);
    }

    #[test]
    fn grid_oracle_boundary_argmin_when_excluded() {
        let rsus = anchors();
        let ranges = exact_ranges(&rsus, Vec2::new(3.0, 4.0));
        // bounds exclude (3,4); the returned point is the exhaustive grid
        // argmin inside the bounds, not an error
        let bounds = Bounds::new(Vec2::new(5.0, 4.0), Vec2::new(7.0, 6.0));
        let step = 0.5;
        let p = grid_oracle(&rsus, &ranges, bounds, step).unwrap();
        assert!(p.x >= bounds.min.x && p.x <= bounds.max.x);
        assert!(p.y >= bounds.min.y && p.y <= bounds.max.y);
        let best = range_cost(&rsus, &ranges, p);
        for ix in 0..=4 {
            for iy in 0..=4 {
                let q = bounds.min + Vec2::new(ix as f64 * step, iy as f64 * step);
                assert!(best <= range_cost(&rsus, &ranges, q) + 1e-12);
            }
        }
    }

    #[test]
    fn grid_oracle_rejects_bad_step() {
        let rsus = anchors();
        let ranges = exact_ranges(&rsus, Vec2::new(3.0, 4.0));
        assert!(grid_oracle(
            &rsus,
            &ranges,
            Bounds::new(Vec2::ZERO, Vec2::new(1.0, 1.0)),
            0.0
        )
        .is_err());
    }

    #[test]
    fn noisy_mean_converges_with_shrinking_noise() {
        // Empirical mean of the estimate approaches the true position as the
        // range noise shrinks.
        use rand_distr::{Distribution, Normal};
        let rsus = anchors();
        let truth = Vec2::new(3.0, 4.0);
        let mut spreads = Vec::new();
        for sigma in [1.0f64, 0.1, 0.01] {
            let normal = Normal::new(0.0, sigma).unwrap();
            let mut rng = crate::rng::substream(17, &[sigma.to_bits()]);
            let n = 10_000;
            let mut mean = Vec2::ZERO;
            let mut count = 0;
            for _ in 0..n {
                let ranges: Vec<RangeEstimate> = rsus
                    .iter()
                    .map(|r| RangeEstimate {
                        rsu_id: r.id,
                        range: r.position.distance(truth) + normal.sample(&mut rng),
                        variance: sigma * sigma,
                    })
                    .collect();
                if let Ok(est) = solve_ls(&build_system(&rsus, &ranges).unwrap()) {
                    mean += est.position;
                    count += 1;
                }
            }
            let mean = mean * (1.0 / count as f64);
            spreads.push(mean.distance(truth));
        }
        assert!(spreads[1] < spreads[0]);
        assert!(spreads[2] < spreads[1]);
        assert!(spreads[2] < 1e-2);
    }
}
