//! Sequential minimal optimization for the soft-margin SVM dual
//!
//! ```text
//! min_a  1/2 a^T Q a - e^T a   s.t.  y^T a = 0,  0 <= a_i <= u_i
//! ```
//!
//! with `Q_ij = y_i y_j K_ij`, using second-order working-set selection.

use crate::error::SvmError;

/// Curvature used when a pair's second derivative is not positive.
const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverParams {
    /// Stop once the maximal KKT violating pair is closer than this.
    pub tolerance: f64,
    pub stall_epochs: usize,
    pub max_iterations: usize,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self::from_config(&crate::config::SvmConfig::default())
    }
}

impl SolverParams {
    pub fn from_config(cfg: &crate::config::SvmConfig) -> Self {
        Self {
            tolerance: cfg.kkt_tolerance,
            stall_epochs: cfg.stall_epochs,
            max_iterations: cfg.max_iterations,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    pub alpha: Vec<f64>,
    /// Decision offset: `f(x) = sum a_i y_i K(x_i, x) - rho`.
    pub rho: f64,
    /// Gradient `Q a - e` at the solution.
    pub gradient: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    /// Maximal violating-pair gap at exit.
    pub gap: f64,
}

impl DualSolution {
    /// Per-point violation of the KKT conditions with the computed offset.
    pub fn kkt_residuals(&self, y: &[f64], upper: &[f64]) -> Vec<f64> {
        self.alpha
            .iter()
            .zip(&self.gradient)
            .zip(y.iter().zip(upper))
            .map(|((&a, &g), (&yi, &u))| {
                // y_i f(x_i) - 1
                let margin = g - yi * self.rho;
                if a <= 0.0 {
                    (-margin).max(0.0)
                } else if a >= u {
                    margin.max(0.0)
                } else {
                    margin.abs()
                }
            })
            .collect()
    }
}

/// Dual objective `1/2 a^T Q a - e^T a` for a kernel matrix (row-major).
pub fn dual_objective(kernel: &[f64], y: &[f64], alpha: &[f64]) -> f64 {
    let n = y.len();
    let mut quad = 0.0;
    for i in 0..n {
        if alpha[i] == 0.0 {
            continue;
        }
        for j in 0..n {
            quad += alpha[i] * alpha[j] * y[i] * y[j] * kernel[i * n + j];
        }
    }
    0.5 * quad - alpha.iter().sum::<f64>()
}

/// Solves the dual for a dense row-major kernel matrix, labels `y` in
/// {-1, +1} and per-point upper bounds.
pub fn solve_dual(
    kernel: &[f64],
    y: &[f64],
    upper: &[f64],
    params: &SolverParams,
) -> Result<DualSolution, SvmError> {
    solve_dual_from(kernel, y, upper, None, params)
}

/// As [`solve_dual`], starting from a feasible `start` (for example the
/// solution for a smaller C).
pub fn solve_dual_from(
    kernel: &[f64],
    y: &[f64],
    upper: &[f64],
    start: Option<&[f64]>,
    params: &SolverParams,
) -> Result<DualSolution, SvmError> {
    let n = y.len();
    if n == 0 || kernel.len() != n * n || upper.len() != n || start.is_some_and(|a| a.len() != n) {
        return Err(SvmError::BadShape);
    }
    let has_pos = y.iter().any(|&v| v > 0.0);
    let has_neg = y.iter().any(|&v| v < 0.0);
    if !(has_pos && has_neg) {
        return Err(SvmError::SingleClass);
    }
    let q = |i: usize, j: usize| y[i] * y[j] * kernel[i * n + j];
    let mut alpha: Vec<f64> = match start {
        Some(a) => a
            .iter()
            .zip(upper)
            .map(|(&v, &u)| v.clamp(0.0, u))
            .collect(),
        None => vec![0.0; n],
    };
    let mut grad = vec![-1.0; n];
    for (j, &aj) in alpha.iter().enumerate() {
        if aj != 0.0 {
            for (i, g) in grad.iter_mut().enumerate() {
                *g += q(i, j) * aj;
            }
        }
    }
    let at_upper = |a: &[f64], t: usize| a[t] >= upper[t];
    let at_lower = |a: &[f64], t: usize| a[t] <= 0.0;

    let mut iterations = 0usize;
    let mut best_gap = f64::INFINITY;
    let mut last_improvement = 0usize;
    let stall_limit = params.stall_epochs.saturating_mul(n.max(1));
    let gap;
    loop {
        // First index: maximal violation in the "up" set.
        let mut g_max = f64::NEG_INFINITY;
        let mut i_sel = None;
        for t in 0..n {
            let in_up = if y[t] > 0.0 {
                !at_upper(&alpha, t)
            } else {
                !at_lower(&alpha, t)
            };
            if in_up {
                let v = -y[t] * grad[t];
                if v >= g_max {
                    g_max = v;
                    i_sel = Some(t);
                }
            }
        }
        // Second index: best second-order decrease in the "low" set.
        let mut g_max2 = f64::NEG_INFINITY;
        let mut j_sel = None;
        let mut best_decrease = f64::INFINITY;
        if let Some(i) = i_sel {
            for t in 0..n {
                let in_low = if y[t] > 0.0 {
                    !at_lower(&alpha, t)
                } else {
                    !at_upper(&alpha, t)
                };
                if !in_low {
                    continue;
                }
                let v = y[t] * grad[t];
                if v >= g_max2 {
                    g_max2 = v;
                }
                let grad_diff = g_max + v;
                if grad_diff > 0.0 {
                    let curvature = kernel[i * n + i] + kernel[t * n + t] - 2.0 * kernel[i * n + t];
                    let curvature = if curvature > 0.0 { curvature } else { TAU };
                    let decrease = -(grad_diff * grad_diff) / curvature;
                    if decrease <= best_decrease {
                        best_decrease = decrease;
                        j_sel = Some(t);
                    }
                }
            }
        }
        let current_gap = g_max + g_max2;
        let (i, j) = match (i_sel, j_sel) {
            (Some(i), Some(j)) if current_gap >= params.tolerance => (i, j),
            _ => {
                gap = if current_gap.is_finite() {
                    current_gap.max(0.0)
                } else {
                    0.0
                };
                break;
            }
        };
        if current_gap < best_gap {
            best_gap = current_gap;
            last_improvement = iterations;
        }
        if iterations >= params.max_iterations || iterations - last_improvement > stall_limit {
            return Err(SvmError::Convergence {
                iterations,
                gap: current_gap,
            });
        }
        iterations += 1;

        let (old_i, old_j) = (alpha[i], alpha[j]);
        let (ci, cj) = (upper[i], upper[j]);
        if y[i] != y[j] {
            let curvature = kernel[i * n + i] + kernel[j * n + j] + 2.0 * q(i, j);
            let curvature = if curvature > 0.0 { curvature } else { TAU };
            let delta = (-grad[i] - grad[j]) / curvature;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > ci - cj {
                if alpha[i] > ci {
                    alpha[i] = ci;
                    alpha[j] = ci - diff;
                }
            } else if alpha[j] > cj {
                alpha[j] = cj;
                alpha[i] = cj + diff;
            }
        } else {
            let curvature = kernel[i * n + i] + kernel[j * n + j] - 2.0 * q(i, j);
            let curvature = if curvature > 0.0 { curvature } else { TAU };
            let delta = (grad[i] - grad[j]) / curvature;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > ci {
                if alpha[i] > ci {
                    alpha[i] = ci;
                    alpha[j] = sum - ci;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > cj {
                if alpha[j] > cj {
                    alpha[j] = cj;
                    alpha[i] = sum - cj;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for (k, g) in grad.iter_mut().enumerate() {
            *g += q(i, k) * di + q(j, k) * dj;
        }
    }

    let rho = offset(&alpha, &grad, y, upper);
    let objective = 0.5
        * alpha
            .iter()
            .zip(&grad)
            .map(|(a, g)| a * (g - 1.0))
            .sum::<f64>();
    Ok(DualSolution {
        alpha,
        rho,
        gradient: grad,
        objective,
        iterations,
        gap,
    })
}

/// Offset from free support vectors, or the midpoint of the feasible
/// interval when every multiplier sits at a bound.
fn offset(alpha: &[f64], grad: &[f64], y: &[f64], upper: &[f64]) -> f64 {
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut sum_free, mut n_free) = (0.0, 0usize);
    for t in 0..alpha.len() {
        let yg = y[t] * grad[t];
        if alpha[t] >= upper[t] {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            n_free += 1;
            sum_free += yg;
        }
    }
    if n_free > 0 {
        sum_free / n_free as f64
    } else {
        (ub + lb) / 2.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rbf(x: &[Vec<f64>], gamma: f64) -> Vec<f64> {
        let n = x.len();
        let mut k = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let d: f64 = x[i].iter().zip(&x[j]).map(|(a, b)| (a - b).powi(2)).sum();
                k[i * n + j] = (-gamma * d).exp();
            }
        }
        k
    }

    #[test]
    fn two_points_by_hand() {
        // K = [[1, e], [e, 1]] with e = exp(-4 gamma); the symmetric optimum
        // is a1 = a2 = 1 / (1 - e) and rho = 0.
        let gamma = 0.5;
        let k = rbf(&[vec![-1.0], vec![1.0]], gamma);
        let y = [-1.0, 1.0];
        let sol = solve_dual(&k, &y, &[1e6, 1e6], &SolverParams::default()).unwrap();
        let e = (-4.0 * gamma).exp();
        let expected = 1.0 / (1.0 - e);
        assert!((sol.alpha[0] - expected).abs() < 1e-9, "{:?}", sol.alpha);
        assert!((sol.alpha[1] - expected).abs() < 1e-9);
        assert!(sol.rho.abs() < 1e-9);
        assert!((sol.objective + expected).abs() < 1e-9);
    }

    #[test]
    fn single_class_is_rejected() {
        let k = rbf(&[vec![0.0], vec![1.0]], 1.0);
        assert_eq!(
            solve_dual(&k, &[1.0, 1.0], &[1.0, 1.0], &SolverParams::default()),
            Err(SvmError::SingleClass)
        );
    }

    #[test]
    fn iteration_cap_reports_convergence_failure() {
        let x: Vec<Vec<f64>> = (0..30)
            .map(|i| vec![(i as f64 * 0.37).sin(), (i as f64 * 1.3).cos()])
            .collect();
        let y: Vec<f64> = (0..30)
            .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 })
            .collect();
        let k = rbf(&x, 1.0);
        let params = SolverParams {
            tolerance: 1e-3,
            stall_epochs: 200,
            max_iterations: 2,
        };
        assert!(matches!(
            solve_dual(&k, &y, &vec![100.0; 30], &params),
            Err(SvmError::Convergence { .. })
        ));
    }

    #[test]
    fn warm_start_reaches_the_same_objective() {
        let x: Vec<Vec<f64>> = (0..25)
            .map(|i| vec![(i as f64 * 0.9).sin(), (i as f64 * 0.4).cos()])
            .collect();
        let y: Vec<f64> = x
            .iter()
            .map(|r| if r[0] * r[1] > 0.0 { 1.0 } else { -1.0 })
            .collect();
        let k = rbf(&x, 1.5);
        let small = solve_dual(&k, &y, &[0.5; 25], &SolverParams::default()).unwrap();
        let cold = solve_dual(&k, &y, &[5.0; 25], &SolverParams::default()).unwrap();
        let warm = solve_dual_from(
            &k,
            &y,
            &[5.0; 25],
            Some(&small.alpha),
            &SolverParams::default(),
        )
        .unwrap();
        assert!((cold.objective - warm.objective).abs() <= 1e-3 * cold.objective.abs());
        assert!(warm
            .kkt_residuals(&y, &[5.0; 25])
            .iter()
            .all(|&r| r <= 1e-3));
    }

    #[test]
    fn feasibility_and_kkt_at_exit() {
        let x: Vec<Vec<f64>> = (0..40)
            .map(|i| vec![(i as f64 * 0.71).sin() * 2.0, (i as f64 * 0.29).cos()])
            .collect();
        let y: Vec<f64> = x
            .iter()
            .map(|r| if r[0] + 0.3 * r[1] > 0.1 { 1.0 } else { -1.0 })
            .collect();
        let upper: Vec<f64> = y.iter().map(|&v| if v > 0.0 { 3.0 } else { 2.0 }).collect();
        let k = rbf(&x, 0.8);
        let sol = solve_dual(&k, &y, &upper, &SolverParams::default()).unwrap();
        let balance: f64 = sol.alpha.iter().zip(&y).map(|(a, b)| a * b).sum();
        assert!(balance.abs() < 1e-6);
        assert!(sol
            .alpha
            .iter()
            .zip(&upper)
            .all(|(a, u)| *a >= 0.0 && a <= u));
        assert!(sol.kkt_residuals(&y, &upper).iter().all(|&r| r <= 1e-3));
        assert!((sol.objective - dual_objective(&k, &y, &sol.alpha)).abs() < 1e-9);
    }
}
