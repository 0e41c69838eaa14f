//! The single-trajectory penalized least-squares subproblem.
//!
//! This is the inner engine of the alternating minimization: given the points
//! currently owned by one cluster, return the exact grid minimizer of
//!
//! ```text
//! (1/n_total) * sum_i |y_i - mu(t_i)|^2 + lambda * ||D^s mu||^2
//! ```
//!
//! where `mu(t_i)` applies the piecewise-linear interpolation operator. The
//! scaling uses the full sample size `n_total`, not the cluster size, so the
//! per-cluster objectives sum to the global objective and the alternation
//! descends exactly.
//!
//! Per coordinate the normal equations are `(A^T A / n + lambda L + ridge I) c
//! = A^T y / n` with `L` banded of semi-bandwidth `s`; the solve uses the
//! banded Cholesky in [`crate::banded`].

use crate::banded::SymBandMatrix;
use crate::error::{Error, Result};
use crate::trajectory::{difference_stencil, interp_weights, GridTrajectory};

/// Configuration of the single-trajectory smoother.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmootherConfig {
    /// Penalty order, >= 1.
    pub s: usize,
    /// Regularization weight, > 0.
    pub lambda: f64,
    /// Grid size, >= s + 1.
    pub m: usize,
    /// Tiny stabilizer added to the diagonal; keeps adversarial clusters
    /// (fewer than `s` distinct times) solvable and deterministic.
    pub ridge: f64,
}

impl SmootherConfig {
    pub const DEFAULT_RIDGE: f64 = 1e-12;

    pub fn new(s: usize, lambda: f64, m: usize) -> Result<Self> {
        Self::with_ridge(s, lambda, m, Self::DEFAULT_RIDGE)
    }

    pub fn with_ridge(s: usize, lambda: f64, m: usize, ridge: f64) -> Result<Self> {
        if s == 0 {
            return Err(Error::Domain("penalty order s must be >= 1".into()));
        }
        if !(lambda > 0.0) {
            return Err(Error::Domain(format!("lambda must be > 0, got {lambda}")));
        }
        if m < s + 1 {
            return Err(Error::GridTooCoarse { m, s });
        }
        if !(ridge >= 0.0) {
            return Err(Error::Domain(format!("ridge must be >= 0, got {ridge}")));
        }
        Ok(Self {
            s,
            lambda,
            m,
            ridge,
        })
    }
}

/// The observations owned by one cluster: times in [0,1] and targets in R^d.
#[derive(Debug, Clone)]
pub struct WeightedPoints {
    times: Vec<f64>,
    targets: Vec<f64>, // row-major (count x d)
    d: usize,
}

impl WeightedPoints {
    pub fn new(times: Vec<f64>, targets: Vec<f64>, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::Shape("dimension must be >= 1".into()));
        }
        if targets.len() != times.len() * d {
            return Err(Error::Shape(format!(
                "expected {} target values for {} points in R^{d}, got {}",
                times.len() * d,
                times.len(),
                targets.len()
            )));
        }
        if !times
            .iter()
            .all(|t| t.is_finite() && (0.0..=1.0).contains(t))
        {
            return Err(Error::Data("times must be finite and in [0, 1]".into()));
        }
        if !targets.iter().all(|y| y.is_finite()) {
            return Err(Error::Data("targets must be finite".into()));
        }
        Ok(Self { times, targets, d })
    }

    pub fn count(&self) -> usize {
        self.times.len()
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn target(&self, i: usize) -> &[f64] {
        &self.targets[i * self.d..(i + 1) * self.d]
    }
}

/// The penalty Gram matrix `L = dt * (D^s)^T (D^s)` added into `a`, scaled
/// by `lambda`.
fn add_penalty_matrix(a: &mut SymBandMatrix, m: usize, s: usize, lambda: f64) {
    let stencil = difference_stencil(s);
    let dt = 1.0 / (m - 1) as f64;
    let scale = lambda * dt.powi(1 - 2 * s as i32);
    for g in 0..m - s {
        for i in 0..=s {
            for j in 0..=i {
                a.add(g + i, g + j, scale * stencil[i] * stencil[j]);
            }
        }
    }
}

/// Exact grid minimizer of the penalized least-squares objective for one
/// cluster. `n_total` is the full sample size of the surrounding problem.
///
/// The factored matrix folds the data term into the penalty term; at large
/// `lambda` the fold costs the data term most of its bits. Two rounds of
/// iterative refinement with a term-wise residual recover them.
pub fn fit_single(
    points: &WeightedPoints,
    n_total: usize,
    cfg: &SmootherConfig,
) -> Result<GridTrajectory> {
    if n_total == 0 {
        return Err(Error::Data("n_total must be >= 1".into()));
    }
    if points.count() == 0 {
        return Err(Error::EmptyCluster);
    }
    let (m, d) = (cfg.m, points.dim());
    let inv_n = 1.0 / n_total as f64;

    let mut a = SymBandMatrix::zeros(m, cfg.s);
    let mut rows = Vec::with_capacity(points.count());
    let mut rhs = vec![0.0; m * d]; // column-major: coordinate dim at [dim * m ..]
    for (i, &t) in points.times().iter().enumerate() {
        let (g, w) = interp_weights(m, t)?;
        let (w0, w1) = (1.0 - w, w);
        rows.push((g, w0, w1));
        a.add(g, g, inv_n * w0 * w0);
        a.add(g + 1, g, inv_n * w1 * w0);
        a.add(g + 1, g + 1, inv_n * w1 * w1);
        let y = points.target(i);
        for dim in 0..d {
            rhs[dim * m + g] += inv_n * w0 * y[dim];
            rhs[dim * m + g + 1] += inv_n * w1 * y[dim];
        }
    }
    add_penalty_matrix(&mut a, m, cfg.s, cfg.lambda);
    if cfg.ridge > 0.0 {
        for i in 0..m {
            a.add(i, i, cfg.ridge);
        }
    }

    let chol = a.cholesky()?;
    let stencil = difference_stencil(cfg.s);
    let dt = 1.0 / (m - 1) as f64;
    let penalty_scale = cfg.lambda * dt.powi(1 - 2 * cfg.s as i32);
    let mut values = vec![0.0; m * d];
    let mut residual = vec![0.0; m];
    for dim in 0..d {
        let b = rhs[dim * m..(dim + 1) * m].to_vec();
        let col = &mut rhs[dim * m..(dim + 1) * m];
        chol.solve_in_place(col);
        for _ in 0..2 {
            // residual with the data and penalty terms applied separately
            residual.copy_from_slice(&b);
            for &(g, w0, w1) in &rows {
                let fitted = w0 * col[g] + w1 * col[g + 1];
                residual[g] -= inv_n * w0 * fitted;
                residual[g + 1] -= inv_n * w1 * fitted;
            }
            for g in 0..m - cfg.s {
                let mut diff = 0.0;
                for (i, c) in stencil.iter().enumerate() {
                    diff += c * col[g + i];
                }
                let scaled = penalty_scale * diff;
                for (i, c) in stencil.iter().enumerate() {
                    residual[g + i] -= c * scaled;
                }
            }
            if cfg.ridge > 0.0 {
                for g in 0..m {
                    residual[g] -= cfg.ridge * col[g];
                }
            }
            chol.solve_in_place(&mut residual);
            for g in 0..m {
                col[g] += residual[g];
            }
        }
        for g in 0..m {
            values[g * d + dim] = col[g];
        }
    }
    GridTrajectory::new(values, m, d)
}

/// The objective that [`fit_single`] minimizes, for a candidate trajectory.
pub fn cluster_objective(
    points: &WeightedPoints,
    n_total: usize,
    cfg: &SmootherConfig,
    trajectory: &GridTrajectory,
) -> Result<f64> {
    let mut misfit = 0.0;
    for (i, &t) in points.times().iter().enumerate() {
        misfit += trajectory.sq_dist_at(t, points.target(i))?;
    }
    Ok(misfit / n_total as f64 + cfg.lambda * trajectory.penalty(cfg.s)?)
}

/// Ordinary least-squares fit in the monomial basis `{t^i / i!, i < s}`,
/// sampled to the grid. This is the large-lambda limit of [`fit_single`]:
/// the penalty annihilates exactly the polynomials of degree below `s`.
pub fn polynomial_limit_fit(points: &WeightedPoints, s: usize, m: usize) -> Result<GridTrajectory> {
    if s == 0 {
        return Err(Error::Domain("penalty order s must be >= 1".into()));
    }
    let mut distinct: Vec<f64> = points.times().to_vec();
    distinct.sort_by(|a, b| a.partial_cmp(b).unwrap());
    distinct.dedup();
    if distinct.len() < s {
        return Err(Error::DegenerateDesign { need: s });
    }

    let d = points.dim();
    // basis values per point, then dense s x s normal equations
    let mut gram = SymBandMatrix::zeros(s, s.saturating_sub(1));
    let mut rhs = vec![0.0; s * d];
    let mut basis = vec![0.0; s];
    for (idx, &t) in points.times().iter().enumerate() {
        let mut factorial = 1.0;
        for (i, b) in basis.iter_mut().enumerate() {
            if i > 1 {
                factorial *= i as f64;
            }
            *b = t.powi(i as i32) / factorial;
        }
        for i in 0..s {
            for j in 0..=i {
                gram.add(i, j, basis[i] * basis[j]);
            }
        }
        let y = points.target(idx);
        for dim in 0..d {
            for i in 0..s {
                rhs[dim * s + i] += basis[i] * y[dim];
            }
        }
    }
    let chol = gram
        .cholesky()
        .map_err(|_| Error::DegenerateDesign { need: s })?;
    let mut coeffs = vec![0.0; s * d];
    for dim in 0..d {
        let col = &mut rhs[dim * s..(dim + 1) * s];
        chol.solve_in_place(col);
        coeffs[dim * s..(dim + 1) * s].copy_from_slice(col);
    }

    GridTrajectory::from_fn(m, d, |t, out| {
        for (dim, o) in out.iter_mut().enumerate() {
            let mut factorial = 1.0;
            let mut acc = 0.0;
            for i in 0..s {
                if i > 1 {
                    factorial *= i as f64;
                }
                acc += coeffs[dim * s + i] * t.powi(i as i32) / factorial;
            }
            *o = acc;
        }
    })
}
