//! ε-insensitive support vector regression solved by sequential minimal
//! optimization (SMO).
//!
//! The dual is posed over 2n variables α = [α⁺; α⁻] with signs s = [+1; −1],
//! objective ½αᵀQα + pᵀα, Q_tu = s_t s_u K(x_t, x_u), p = [ε−y; ε+y],
//! subject to sᵀα = 0 and 0 ≤ α ≤ C. Each step picks i as the most violating
//! index of the "up" set, pairs it with the "down"-set index j that maximizes
//! the guaranteed objective decrease (second-order selection), solves the
//! two-variable subproblem analytically, and updates the cached gradient.
//! The fitted function is f(x) = Σ βᵢ K(xᵢ, x) + b with β = α⁺ − α⁻.

use super::FEATURE_DIM;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Kernel for the SVR dual. Linear by default; Gaussian available.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kernel {
    Linear,
    Rbf { gamma: f64 },
}

impl Kernel {
    pub fn eval(&self, a: &[f64; FEATURE_DIM], b: &[f64; FEATURE_DIM]) -> f64 {
        match self {
            Kernel::Linear => a.iter().zip(b.iter()).map(|(x, y)| x * y).sum(),
            Kernel::Rbf { gamma } => {
                let d2: f64 = a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum();
                (-gamma * d2).exp()
            }
        }
    }
}

/// SVR hyperparameters. `epsilon` is in the units of the labels passed to
/// [`fit`]; `max_iter = 0` selects max(10⁷, 100·n) automatically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvrParams {
    pub c: f64,
    pub epsilon: f64,
    pub tol: f64,
    pub max_iter: u64,
    pub kernel: Kernel,
}

impl Default for SvrParams {
    fn default() -> Self {
        SvrParams {
            c: 1.0,
            epsilon: 0.1,
            tol: 1e-3,
            max_iter: 0,
            kernel: Kernel::Linear,
        }
    }
}

impl SvrParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0) {
            return Err(Error::InvalidConfig("svr C must be > 0".into()));
        }
        if !(self.epsilon >= 0.0) {
            return Err(Error::InvalidConfig("svr epsilon must be >= 0".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidConfig("svr tol must be > 0".into()));
        }
        if let Kernel::Rbf { gamma } = self.kernel {
            if !(gamma > 0.0) {
                return Err(Error::InvalidConfig("rbf gamma must be > 0".into()));
            }
        }
        Ok(())
    }

    fn iteration_budget(&self, n: usize) -> u64 {
        if self.max_iter > 0 {
            self.max_iter
        } else {
            10_000_000u64.max(100 * n as u64)
        }
    }
}

/// A fitted single-output SVR: only vectors with nonzero dual coefficient
/// are retained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvrModel {
    pub kernel: Kernel,
    pub support_vectors: Vec<[f64; FEATURE_DIM]>,
    /// β = α⁺ − α⁻ per support vector, each in [−C, C].
    pub coefficients: Vec<f64>,
    pub bias: f64,
    pub iterations: u64,
    /// For the linear kernel the expansion collapses to a single weight
    /// vector w = Σ βᵢ xᵢ, making prediction O(d) instead of O(n_sv·d).
    #[serde(default)]
    pub linear_weights: Option<[f64; FEATURE_DIM]>,
}

impl SvrModel {
    pub fn predict(&self, x: &[f64; FEATURE_DIM]) -> f64 {
        if let Some(w) = &self.linear_weights {
            return w.iter().zip(x.iter()).map(|(wi, xi)| wi * xi).sum::<f64>() + self.bias;
        }
        self.support_vectors
            .iter()
            .zip(self.coefficients.iter())
            .map(|(sv, c)| c * self.kernel.eval(sv, x))
            .sum::<f64>()
            + self.bias
    }
}

#[inline]
fn sign(t: usize, n: usize) -> f64 {
    if t < n {
        1.0
    } else {
        -1.0
    }
}

fn kernel_row(kernel: &Kernel, features: &[[f64; FEATURE_DIM]], idx: usize, out: &mut [f64]) {
    let xi = &features[idx];
    for (o, x) in out.iter_mut().zip(features.iter()) {
        *o = kernel.eval(x, xi);
    }
}

/// FIFO cache of kernel rows keyed by base-point index; the working set
/// revisits a small pool of hot violators, so most lookups hit.
struct RowCache {
    rows: Vec<Option<Box<[f64]>>>,
    order: std::collections::VecDeque<usize>,
    capacity: usize,
}

impl RowCache {
    fn new(n: usize) -> Self {
        // cap resident rows at ~64 MB
        let capacity = (64_000_000 / (8 * n.max(1))).clamp(2, n.max(2));
        RowCache {
            rows: vec![None; n],
            order: std::collections::VecDeque::new(),
            capacity,
        }
    }

    fn get(&mut self, kernel: &Kernel, features: &[[f64; FEATURE_DIM]], idx: usize) -> &[f64] {
        if self.rows[idx].is_none() {
            if self.order.len() >= self.capacity {
                if let Some(old) = self.order.pop_front() {
                    self.rows[old] = None;
                }
            }
            let mut row = vec![0.0f64; features.len()].into_boxed_slice();
            kernel_row(kernel, features, idx, &mut row);
            self.rows[idx] = Some(row);
            self.order.push_back(idx);
        }
        self.rows[idx].as_deref().unwrap()
    }
}

/// Fit one SVR by SMO. `labels` must be in the same scale as `epsilon`.
pub fn fit(
    features: &[[f64; FEATURE_DIM]],
    labels: &[f64],
    params: &SvrParams,
) -> Result<SvrModel> {
    params.validate()?;
    let n = features.len();
    if n == 0 || labels.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: labels.len(),
        });
    }
    match params.kernel {
        Kernel::Linear => fit_linear(features, labels, params),
        Kernel::Rbf { .. } => fit_generic(features, labels, params),
    }
}

/// SMO over an explicit kernel matrix row cache; used for non-linear kernels.
fn fit_generic(
    features: &[[f64; FEATURE_DIM]],
    labels: &[f64],
    params: &SvrParams,
) -> Result<SvrModel> {
    let n = features.len();
    let c = params.c;
    let budget = params.iteration_budget(n);

    let mut alpha = vec![0.0f64; 2 * n];
    // g = Qα + p; at α = 0 this is just p.
    let mut g: Vec<f64> = (0..2 * n)
        .map(|t| {
            if t < n {
                params.epsilon - labels[t]
            } else {
                params.epsilon + labels[t - n]
            }
        })
        .collect();

    let diag: Vec<f64> = features.iter().map(|x| params.kernel.eval(x, x)).collect();
    let mut cache = RowCache::new(n);
    let mut row_i = vec![0.0f64; n];
    let mut iterations = 0u64;
    loop {
        // First-order scan: most violating up-set index i and the down-set
        // extreme (for the stopping criterion).
        let mut up: Option<(usize, f64)> = None;
        let mut low_min = f64::INFINITY;
        for t in 0..2 * n {
            let s = sign(t, n);
            let score = -s * g[t];
            if (s > 0.0 && alpha[t] < c) || (s < 0.0 && alpha[t] > 0.0) {
                if up.map_or(true, |(_, v)| score > v) {
                    up = Some((t, score));
                }
            }
            if ((s > 0.0 && alpha[t] > 0.0) || (s < 0.0 && alpha[t] < c)) && score < low_min {
                low_min = score;
            }
        }
        let Some((i, m)) = up else { break };
        let violation = m - low_min;
        if !(violation > params.tol) {
            break;
        }
        if iterations >= budget {
            return Err(Error::NonConvergence {
                iterations,
                violation,
            });
        }
        iterations += 1;

        let bi = i % n;
        let si = sign(i, n);
        row_i.copy_from_slice(cache.get(&params.kernel, features, bi));

        // Second-order scan: down-set index j maximizing the guaranteed
        // decrease b²/(2a) of the two-variable subproblem.
        let mut best: Option<(usize, f64, f64)> = None;
        for t in 0..2 * n {
            let s = sign(t, n);
            if !((s > 0.0 && alpha[t] > 0.0) || (s < 0.0 && alpha[t] < c)) {
                continue;
            }
            let score = -s * g[t];
            if score >= m {
                continue;
            }
            let b = m - score;
            let a = (diag[bi] + diag[t % n] - 2.0 * row_i[t % n]).max(1e-12);
            let obj = -(b * b) / a;
            if best.map_or(true, |(_, o, _)| obj < o) {
                best = Some((t, obj, b));
            }
        }
        let Some((j, _, gap)) = best else { break };
        let bj = j % n;
        let sj = sign(j, n);
        let row_j = cache.get(&params.kernel, features, bj);
        let quad = (diag[bi] + diag[bj] - 2.0 * row_i[bj]).max(1e-12);

        // Step along u with u_i = s_i, u_j = −s_j (feasible direction);
        // unconstrained optimum at gap/quad, clipped to both boxes.
        let cap_i = if si > 0.0 { c - alpha[i] } else { alpha[i] };
        let cap_j = if sj > 0.0 { alpha[j] } else { c - alpha[j] };
        let d = (gap / quad).min(cap_i).min(cap_j).max(0.0);
        let delta_i = si * d;
        let delta_j = -sj * d;
        alpha[i] = (alpha[i] + delta_i).clamp(0.0, c);
        alpha[j] = (alpha[j] + delta_j).clamp(0.0, c);

        for t in 0..2 * n {
            let s = sign(t, n);
            g[t] += s * si * row_i[t % n] * delta_i + s * sj * row_j[t % n] * delta_j;
        }
    }

    // The gradient encodes the bias-free residuals: g⁺_t = f(x_t) + ε − y_t.
    let residuals: Vec<f64> = (0..n).map(|t| params.epsilon - g[t]).collect();
    let mut bias = balanced_bias(&residuals, params.epsilon);
    // Clamp into the dual-consistent band so every variable's KKT condition
    // still holds to the configured tolerance.
    let mut m = f64::NEG_INFINITY;
    let mut low = f64::INFINITY;
    for t in 0..2 * n {
        let s = sign(t, n);
        let sc = -s * g[t];
        if (s > 0.0 && alpha[t] < c) || (s < 0.0 && alpha[t] > 0.0) {
            m = m.max(sc);
        }
        if (s > 0.0 && alpha[t] > 0.0) || (s < 0.0 && alpha[t] < c) {
            low = low.min(sc);
        }
    }
    if m.is_finite() && low.is_finite() {
        bias = bias.clamp(m.min(low), m.max(low));
    }

    Ok(finish_model(
        features,
        &alpha,
        params.kernel,
        bias,
        iterations,
    ))
}

/// Primal-optimal intercept given the rest of the fitted function: the
/// minimizer of Σ max(|rᵢ − b| − ε, 0) over b, where rᵢ = yᵢ − f(xᵢ) + b is
/// the bias-free residual. The objective is piecewise linear with slope
/// #{r + ε < b} − #{r − ε > b}, so the minimum sits at the median of the
/// merged multiset {r − ε} ∪ {r + ε}. The converged dual only pins b inside
/// a ±tol band (which is wide when labels are standardized from large raw
/// scales), so picking the primal optimum inside that band removes the
/// systematic offset the band would otherwise allow; the caller clamps the
/// result into the band to keep the dual KKT certificate intact.
fn balanced_bias(residuals: &[f64], eps: f64) -> f64 {
    let n = residuals.len();
    let mut s: Vec<f64> = residuals.iter().flat_map(|r| [r - eps, r + eps]).collect();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    0.5 * (s[n - 1] + s[n])
}

/// Assemble the fitted model from the dual solution.
fn finish_model(
    features: &[[f64; FEATURE_DIM]],
    alpha: &[f64],
    kernel: Kernel,
    bias: f64,
    iterations: u64,
) -> SvrModel {
    let n = features.len();
    let mut support_vectors = Vec::new();
    let mut coefficients = Vec::new();
    for t in 0..n {
        let beta = alpha[t] - alpha[n + t];
        if beta != 0.0 {
            support_vectors.push(features[t]);
            coefficients.push(beta);
        }
    }
    let linear_weights = match kernel {
        Kernel::Linear => {
            let mut w = [0.0f64; FEATURE_DIM];
            for (sv, beta) in support_vectors.iter().zip(coefficients.iter()) {
                for (wk, xk) in w.iter_mut().zip(sv.iter()) {
                    *wk += beta * xk;
                }
            }
            Some(w)
        }
        Kernel::Rbf { .. } => None,
    };
    SvrModel {
        kernel,
        support_vectors,
        coefficients,
        bias,
        iterations,
        linear_weights,
    }
}

/// Warm start for the linear-kernel dual. At the optimum every point whose
/// residual lies outside the ε-tube has its dual coefficient pinned at ±C
/// with the residual's sign, and for small ε the primal objective is close
/// to least-absolute-deviations regression. A short IRLS (iteratively
/// reweighted least-squares) approximation of that L1 fit predicts most of
/// the optimal signs, so starting there leaves SMO only the near-tube
/// boundary and the few free variables to resolve. The equality constraint
/// is kept feasible by dropping the least-confident assignments from the
/// larger side. Falls back to the zero start on tiny or degenerate problems.
fn warm_start_duals(features: &[[f64; FEATURE_DIM]], labels: &[f64], c: f64, eps: f64) -> Vec<f64> {
    let n = features.len();
    let mut alpha = vec![0.0f64; 2 * n];
    if n <= FEATURE_DIM + 1 {
        return alpha;
    }
    let a = nalgebra::DMatrix::from_fn(n, FEATURE_DIM + 1, |r, col| {
        if col < FEATURE_DIM {
            features[r][col]
        } else {
            1.0
        }
    });
    let y = nalgebra::DVector::from_row_slice(labels);
    let svd = a.clone().svd(true, true);
    let Ok(mut theta) = svd.solve(&y, 1e-12) else {
        return alpha;
    };
    let mut resid = &y - &a * &theta;
    // IRLS refinement toward the L1 fit: weight each row by 1/max(|e|, δ)
    // and re-solve the weighted normal equations.
    let delta = 1e-4;
    for _ in 0..8 {
        let mut ata = nalgebra::DMatrix::zeros(FEATURE_DIM + 1, FEATURE_DIM + 1);
        let mut aty = nalgebra::DVector::zeros(FEATURE_DIM + 1);
        for t in 0..n {
            let wgt = 1.0 / resid[t].abs().max(delta);
            let row = a.row(t);
            for u in 0..FEATURE_DIM + 1 {
                aty[u] += wgt * row[u] * y[t];
                for v in u..FEATURE_DIM + 1 {
                    ata[(u, v)] += wgt * row[u] * row[v];
                }
            }
        }
        ata.fill_lower_triangle_with_upper_triangle();
        let Some(next) = ata.cholesky().map(|ch| ch.solve(&aty)) else {
            break;
        };
        theta = next;
        resid = &y - &a * &theta;
    }
    let mut plus: Vec<usize> = Vec::new();
    let mut minus: Vec<usize> = Vec::new();
    for t in 0..n {
        if resid[t] > eps {
            plus.push(t);
        } else if resid[t] < -eps {
            minus.push(t);
        }
    }
    if plus.len() > minus.len() {
        let k = plus.len() - minus.len();
        plus.sort_by(|&u, &v| resid[u].partial_cmp(&resid[v]).unwrap().then(u.cmp(&v)));
        plus.drain(..k);
    } else if minus.len() > plus.len() {
        let k = minus.len() - plus.len();
        minus.sort_by(|&u, &v| resid[v].partial_cmp(&resid[u]).unwrap().then(u.cmp(&v)));
        minus.drain(..k);
    }
    for &t in &plus {
        alpha[t] = c;
    }
    for &t in &minus {
        alpha[n + t] = c;
    }
    alpha
}

/// Linear-kernel SMO specialized to the primal weight representation.
/// Gradients are evaluated on demand from w = Σ βᵢ xᵢ in O(d), so no kernel
/// rows or cached 2n-gradient vector are needed; a shrinking heuristic keeps
/// the scanned working set small, and the duals are warm-started from a
/// least-squares fit. Optimality is always certified by a full-set scan at
/// the same tolerance as the generic path before returning.
fn fit_linear(
    features: &[[f64; FEATURE_DIM]],
    labels: &[f64],
    params: &SvrParams,
) -> Result<SvrModel> {
    let n = features.len();
    let two_n = 2 * n;
    let c = params.c;
    let eps = params.epsilon;
    let tol = params.tol;
    let budget = params.iteration_budget(n);

    #[inline]
    fn dot(a: &[f64; FEATURE_DIM], b: &[f64; FEATURE_DIM]) -> f64 {
        a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
    }
    let p = |t: usize| -> f64 {
        if t < n {
            eps - labels[t]
        } else {
            eps + labels[t - n]
        }
    };
    // score(t) = −s_t g_t with g_t = s_t (x_t·w) + p_t
    let score =
        |t: usize, w: &[f64; FEATURE_DIM]| -> f64 { -dot(&features[t % n], w) - sign(t, n) * p(t) };
    let recompute_w = |alpha: &[f64]| -> [f64; FEATURE_DIM] {
        let mut w = [0.0f64; FEATURE_DIM];
        for t in 0..n {
            let beta = alpha[t] - alpha[n + t];
            if beta != 0.0 {
                for (wk, xk) in w.iter_mut().zip(features[t].iter()) {
                    *wk += beta * xk;
                }
            }
        }
        w
    };

    let mut alpha = warm_start_duals(features, labels, c, eps);
    let mut w = recompute_w(&alpha);
    let sq: Vec<f64> = features.iter().map(|x| dot(x, x)).collect();

    let in_up = |alpha: &[f64], t: usize| -> bool {
        if t < n {
            alpha[t] < c
        } else {
            alpha[t] > 0.0
        }
    };
    let in_low = |alpha: &[f64], t: usize| -> bool {
        if t < n {
            alpha[t] > 0.0
        } else {
            alpha[t] < c
        }
    };

    // Twin variables (the two tube sides of one point) are kept adjacent so
    // scans can reuse the x·w dot product of the shared base point.
    let interleaved = || (0..n).flat_map(|b| [b, n + b]).collect::<Vec<usize>>();

    const SHRINK_INTERVAL: u64 = 1000;
    let mut active: Vec<usize> = interleaved();
    let mut scores: Vec<f64> = Vec::with_capacity(two_n);
    let mut iterations = 0u64;
    let mut next_shrink = 200;
    let mut certified = false;
    loop {
        // First-order scan over the active set: most violating up-set index
        // and the down-set extreme for the stopping criterion. Scores are
        // kept for the partner scan below.
        scores.clear();
        let mut up: Option<(usize, f64)> = None;
        let mut low_min = f64::INFINITY;
        let mut last_b = usize::MAX;
        let mut fv = 0.0;
        for &t in &active {
            let b = t % n;
            if b != last_b {
                fv = dot(&features[b], &w);
                last_b = b;
            }
            let sc = -fv - sign(t, n) * p(t);
            scores.push(sc);
            if in_up(&alpha, t) && up.map_or(true, |(_, v)| sc > v) {
                up = Some((t, sc));
            }
            if in_low(&alpha, t) && sc < low_min {
                low_min = sc;
            }
        }
        let converged = match up {
            Some((_, m)) => !(m - low_min > tol),
            None => true,
        };
        if converged {
            if certified {
                break; // the scan just ran over the full set
            }
            // Converged on the shrunk set only: resync w against drift and
            // re-certify against every variable on the next pass.
            w = recompute_w(&alpha);
            active = interleaved();
            certified = true;
            continue;
        }
        if certified {
            // Full-set scan found fresh violations: keep only current
            // pairing candidates and resume.
            let (_, m_full) = up.unwrap();
            active = active
                .iter()
                .zip(scores.iter())
                .filter(|&(&t, &sc)| {
                    let free = alpha[t] > 0.0 && alpha[t] < c;
                    free || (in_up(&alpha, t) && sc > low_min) || (in_low(&alpha, t) && sc < m_full)
                })
                .map(|(&t, _)| t)
                .collect();
            certified = false;
            next_shrink = iterations + SHRINK_INTERVAL;
            continue;
        }
        let (i, m) = up.unwrap();
        let violation = m - low_min;
        if iterations >= budget {
            return Err(Error::NonConvergence {
                iterations,
                violation,
            });
        }
        iterations += 1;

        let bi = i % n;
        let si = sign(i, n);
        let xi = &features[bi];
        // Second-order scan: down-set index maximizing the guaranteed
        // decrease b²/(2a) of the two-variable subproblem.
        let mut best: Option<(usize, f64, f64)> = None;
        let mut last_b = usize::MAX;
        let mut xd = 0.0;
        for (&t, &sc) in active.iter().zip(scores.iter()) {
            if !in_low(&alpha, t) || sc >= m {
                continue;
            }
            let bt = t % n;
            if bt != last_b {
                xd = dot(xi, &features[bt]);
                last_b = bt;
            }
            let b = m - sc;
            let a = (sq[bi] + sq[bt] - 2.0 * xd).max(1e-12);
            let obj = -(b * b) / a;
            if best.map_or(true, |(_, o, _)| obj < o) {
                best = Some((t, obj, b));
            }
        }
        let Some((j, _, gap)) = best else {
            break;
        };
        let bj = j % n;
        let sj = sign(j, n);
        let quad = (sq[bi] + sq[bj] - 2.0 * dot(xi, &features[bj])).max(1e-12);
        let cap_i = if si > 0.0 { c - alpha[i] } else { alpha[i] };
        let cap_j = if sj > 0.0 { alpha[j] } else { c - alpha[j] };
        let d = (gap / quad).min(cap_i).min(cap_j).max(0.0);
        alpha[i] = (alpha[i] + si * d).clamp(0.0, c);
        alpha[j] = (alpha[j] - sj * d).clamp(0.0, c);
        // dβ = +d at the up base point and −d at the down base point,
        // independent of which tube side each variable sits on.
        for (k, wk) in w.iter_mut().enumerate() {
            *wk += d * (features[bi][k] - features[bj][k]);
        }

        if iterations >= next_shrink {
            // Drop bound-tight variables that cannot currently pair with
            // either extreme; the final full-set scan guards correctness.
            w = recompute_w(&alpha);
            let scored: Vec<(usize, f64)> = active.iter().map(|&t| (t, score(t, &w))).collect();
            let mut m_cur = f64::NEG_INFINITY;
            let mut low_cur = f64::INFINITY;
            for &(t, sc) in &scored {
                if in_up(&alpha, t) && sc > m_cur {
                    m_cur = sc;
                }
                if in_low(&alpha, t) && sc < low_cur {
                    low_cur = sc;
                }
            }
            active = scored
                .into_iter()
                .filter(|&(t, sc)| {
                    let free = alpha[t] > 0.0 && alpha[t] < c;
                    free || (in_up(&alpha, t) && sc > low_cur) || (in_low(&alpha, t) && sc < m_cur)
                })
                .map(|(t, _)| t)
                .collect();
            next_shrink = iterations + SHRINK_INTERVAL;
        }
    }

    w = recompute_w(&alpha);
    let residuals: Vec<f64> = (0..n).map(|t| labels[t] - dot(&features[t], &w)).collect();
    let mut bias = balanced_bias(&residuals, eps);
    // Clamp into the dual-consistent band [max up score, min low score]
    // (ordered either way within the tolerance) so every variable's KKT
    // condition still holds to the configured tolerance.
    let mut m = f64::NEG_INFINITY;
    let mut low = f64::INFINITY;
    for t in 0..two_n {
        let sc = score(t, &w);
        if in_up(&alpha, t) && sc > m {
            m = sc;
        }
        if in_low(&alpha, t) && sc < low {
            low = sc;
        }
    }
    if m.is_finite() && low.is_finite() {
        bias = bias.clamp(m.min(low), m.max(low));
    }

    Ok(finish_model(
        features,
        &alpha,
        params.kernel,
        bias,
        iterations,
    ))
}

/// Recompute the worst KKT violation of a fitted model over its training
/// set, from scratch. For each point with residual e = f(x) − y and dual
/// coefficient β:
/// β = 0 requires |e| ≤ ε; β = C requires e ≤ −ε; β = −C requires e ≥ ε;
/// interior β requires e = −sign(β)·ε. Returns the largest excess.
pub fn max_kkt_violation(
    features: &[[f64; FEATURE_DIM]],
    labels: &[f64],
    model: &SvrModel,
    params: &SvrParams,
) -> f64 {
    let eps = params.epsilon;
    let c = params.c;
    let beta_of = |x: &[f64; FEATURE_DIM]| {
        model
            .support_vectors
            .iter()
            .zip(model.coefficients.iter())
            .find(|(sv, _)| sv.iter().zip(x.iter()).all(|(a, b)| a == b))
            .map(|(_, b)| *b)
            .unwrap_or(0.0)
    };
    let mut worst = 0.0f64;
    for (x, &y) in features.iter().zip(labels.iter()) {
        let e = model.predict(x) - y;
        let beta = beta_of(x);
        let v = if beta == 0.0 {
            (e.abs() - eps).max(0.0)
        } else if beta >= c {
            (e + eps).max(0.0)
        } else if beta <= -c {
            (-e + eps).max(0.0)
        } else if beta > 0.0 {
            (e + eps).abs()
        } else {
            (e - eps).abs()
        };
        worst = worst.max(v);
    }
    worst
}
