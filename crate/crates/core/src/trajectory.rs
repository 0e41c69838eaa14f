//! Trajectory centers on a uniform grid over [0,1].
//!
//! A trajectory is stored as its values at the grid times `t_g = g/(m-1)` and
//! evaluated in between by piecewise-linear interpolation. The roughness
//! penalty, the norm of the polynomial component and the distance between
//! trajectory sets are all discretized on the same grid so that every
//! consumer of these quantities sees one consistent bilinear form.

use crate::error::{Error, Result};

/// One trajectory center: `m` points in `R^d` on the uniform grid over [0,1].
#[derive(Debug, Clone, PartialEq)]
pub struct GridTrajectory {
    values: Vec<f64>, // row-major (m x d)
    m: usize,
    d: usize,
}

/// A tuple of `k` trajectory centers sharing one grid, with the penalty order
/// `s` and the separation parameter `delta` they are meant to be used with.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySet {
    trajectories: Vec<GridTrajectory>,
    s: usize,
    delta: f64,
}

/// Decomposed Sobolev norm of a single trajectory: `hs = h0 + h1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SobolevNorms {
    /// Norm of the polynomial component, from one-sided derivatives at t = 0.
    pub h0: f64,
    /// Seminorm of the oscillatory component, `||D^s v||_{L2}`.
    pub h1: f64,
    /// `h0 + h1`.
    pub hs: f64,
}

/// Result of the post-hoc separation check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparationReport {
    pub ok: bool,
    pub min_gap: f64,
}

/// Interpolation stencil for time `t` on an `m`-point grid: value is
/// `(1 - w) * v[g] + w * v[g + 1]`.
///
/// Times that are exactly a canonical node time `g/(m-1)` snap to that node
/// so grid values are reproduced bit-exactly.
pub(crate) fn interp_weights(m: usize, t: f64) -> Result<(usize, f64)> {
    if !t.is_finite() || !(0.0..=1.0).contains(&t) {
        return Err(Error::Domain(format!("time {t} outside [0, 1]")));
    }
    let last = (m - 1) as f64;
    let x = t * last;
    let g = x.round();
    if g / last == t {
        let g = g as usize;
        return Ok(if g == m - 1 { (m - 2, 1.0) } else { (g, 0.0) });
    }
    let base = (x.floor() as usize).min(m - 2);
    Ok((base, x - base as f64))
}

/// Signed binomial stencil of the s-th forward difference:
/// `c[i] = (-1)^(s-i) * C(s, i)`.
pub(crate) fn difference_stencil(s: usize) -> Vec<f64> {
    let mut c = vec![0.0; s + 1];
    let mut binom = 1.0;
    for (i, ci) in c.iter_mut().enumerate() {
        *ci = if (s - i) % 2 == 0 { binom } else { -binom };
        binom = binom * (s - i) as f64 / (i + 1) as f64;
    }
    c
}

impl GridTrajectory {
    /// Build from row-major (m x d) values. All values must be finite and
    /// the grid must have at least the two endpoint nodes.
    pub fn new(values: Vec<f64>, m: usize, d: usize) -> Result<Self> {
        if m < 2 || d == 0 {
            return Err(Error::Shape(format!(
                "need m >= 2 and d >= 1, got m = {m}, d = {d}"
            )));
        }
        if values.len() != m * d {
            return Err(Error::Shape(format!(
                "expected {} values for m = {m}, d = {d}, got {}",
                m * d,
                values.len()
            )));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::Data("trajectory values must be finite".into()));
        }
        Ok(Self { values, m, d })
    }

    /// Constant trajectory equal to `point` everywhere.
    pub fn constant(point: &[f64], m: usize) -> Result<Self> {
        let d = point.len();
        let mut values = Vec::with_capacity(m * d);
        for _ in 0..m {
            values.extend_from_slice(point);
        }
        Self::new(values, m, d)
    }

    /// Sample a function of time to the grid. `f(t, out)` writes the point
    /// at time `t` into `out`.
    pub fn from_fn(m: usize, d: usize, mut f: impl FnMut(f64, &mut [f64])) -> Result<Self> {
        let mut values = vec![0.0; m * d];
        for g in 0..m {
            let t = g as f64 / (m - 1) as f64;
            f(t, &mut values[g * d..(g + 1) * d]);
        }
        Self::new(values, m, d)
    }

    pub fn grid_len(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Canonical time of grid node `g`.
    pub fn node_time(&self, g: usize) -> f64 {
        g as f64 / (self.m - 1) as f64
    }

    /// Stored point at grid node `g`.
    pub fn node(&self, g: usize) -> &[f64] {
        &self.values[g * self.d..(g + 1) * self.d]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Piecewise-linear evaluation at `t`, written into `out`. Exact at
    /// grid nodes.
    pub fn eval_into(&self, t: f64, out: &mut [f64]) -> Result<()> {
        let (g, w) = interp_weights(self.m, t)?;
        let a = self.node(g);
        if w == 0.0 {
            out.copy_from_slice(a);
        } else if w == 1.0 {
            out.copy_from_slice(self.node(g + 1));
        } else {
            let b = self.node(g + 1);
            for i in 0..self.d {
                out[i] = (1.0 - w) * a[i] + w * b[i];
            }
        }
        Ok(())
    }

    /// Piecewise-linear evaluation at `t`.
    pub fn eval(&self, t: f64) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.d];
        self.eval_into(t, &mut out)?;
        Ok(out)
    }

    /// Squared Euclidean distance from `point` to the trajectory at time `t`.
    pub fn sq_dist_at(&self, t: f64, point: &[f64]) -> Result<f64> {
        let (g, w) = interp_weights(self.m, t)?;
        let a = self.node(g);
        let b = self.node((g + 1).min(self.m - 1));
        let mut acc = 0.0;
        for i in 0..self.d {
            let v = (1.0 - w) * a[i] + w * b[i];
            let r = point[i] - v;
            acc += r * r;
        }
        Ok(acc)
    }

    /// Discrete roughness penalty `||D^s v||^2`: the Riemann sum
    /// `dt * sum_g |s-th difference quotient at g|^2`.
    pub fn penalty(&self, s: usize) -> Result<f64> {
        self.penalty_inner(self, s)
    }

    /// The bilinear form behind [`penalty`](Self::penalty):
    /// `dt * sum_g (D^s self)_g . (D^s other)_g`.
    pub fn penalty_inner(&self, other: &Self, s: usize) -> Result<f64> {
        self.check_order(s)?;
        if self.m != other.m || self.d != other.d {
            return Err(Error::Shape(
                "penalty inner product needs matching shapes".into(),
            ));
        }
        let stencil = difference_stencil(s);
        let mut acc = 0.0;
        for g in 0..self.m - s {
            for dim in 0..self.d {
                let mut da = 0.0;
                let mut db = 0.0;
                for (i, c) in stencil.iter().enumerate() {
                    da += c * self.values[(g + i) * self.d + dim];
                    db += c * other.values[(g + i) * self.d + dim];
                }
                acc += da * db;
            }
        }
        let dt = 1.0 / (self.m - 1) as f64;
        // difference quotients carry 1/dt^s each, plus dt from the Riemann sum
        Ok(acc * dt.powi(1 - 2 * s as i32))
    }

    /// Norm of the polynomial component: `sum_{i<s} |i-th derivative at 0| / i!`
    /// with derivatives estimated by one-sided differences on the leading nodes.
    pub fn h0_norm(&self, s: usize) -> Result<f64> {
        self.check_order(s)?;
        let dt = 1.0 / (self.m - 1) as f64;
        let mut acc = 0.0;
        let mut factorial = 1.0;
        for i in 0..s {
            if i > 1 {
                factorial *= i as f64;
            }
            let stencil = difference_stencil(i);
            let mut sq = 0.0;
            for dim in 0..self.d {
                let mut diff = 0.0;
                for (j, c) in stencil.iter().enumerate() {
                    diff += c * self.values[j * self.d + dim];
                }
                sq += diff * diff;
            }
            acc += sq.sqrt() / (dt.powi(i as i32) * factorial);
        }
        Ok(acc)
    }

    /// Both Sobolev pieces at once; `h1` is the square root of [`penalty`](Self::penalty).
    pub fn sobolev_norms(&self, s: usize) -> Result<SobolevNorms> {
        let h0 = self.h0_norm(s)?;
        let h1 = self.penalty(s)?.sqrt();
        Ok(SobolevNorms {
            h0,
            h1,
            hs: h0 + h1,
        })
    }

    /// Node-wise difference `self - other`.
    pub fn difference(&self, other: &Self) -> Result<Self> {
        if self.m != other.m || self.d != other.d {
            return Err(Error::Shape(format!(
                "trajectory shapes differ: ({}, {}) vs ({}, {})",
                self.m, self.d, other.m, other.d
            )));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a - b)
            .collect();
        Self::new(values, self.m, self.d)
    }

    /// Node-wise `self + alpha * direction`.
    pub fn axpy(&self, alpha: f64, direction: &Self) -> Result<Self> {
        if self.m != direction.m || self.d != direction.d {
            return Err(Error::Shape("axpy needs matching shapes".into()));
        }
        let values = self
            .values
            .iter()
            .zip(&direction.values)
            .map(|(a, b)| a + alpha * b)
            .collect();
        Self::new(values, self.m, self.d)
    }

    /// Node-wise shift by a constant point.
    pub fn shifted(&self, offset: &[f64]) -> Result<Self> {
        if offset.len() != self.d {
            return Err(Error::Shape("offset dimension mismatch".into()));
        }
        let mut values = self.values.clone();
        for g in 0..self.m {
            for i in 0..self.d {
                values[g * self.d + i] += offset[i];
            }
        }
        Self::new(values, self.m, self.d)
    }

    fn check_order(&self, s: usize) -> Result<()> {
        if s == 0 {
            return Err(Error::Domain("penalty order s must be >= 1".into()));
        }
        if self.m < s + 1 {
            return Err(Error::GridTooCoarse { m: self.m, s });
        }
        Ok(())
    }
}

impl TrajectorySet {
    pub fn new(trajectories: Vec<GridTrajectory>, s: usize, delta: f64) -> Result<Self> {
        if trajectories.is_empty() {
            return Err(Error::Shape("need at least one trajectory".into()));
        }
        if s == 0 {
            return Err(Error::Domain("penalty order s must be >= 1".into()));
        }
        if !(delta > 0.0) {
            return Err(Error::Domain(format!("delta must be > 0, got {delta}")));
        }
        let (m, d) = (trajectories[0].grid_len(), trajectories[0].dim());
        if trajectories
            .iter()
            .any(|tr| tr.grid_len() != m || tr.dim() != d)
        {
            return Err(Error::Shape(
                "all trajectories must share one grid and dimension".into(),
            ));
        }
        if m < s + 1 {
            return Err(Error::GridTooCoarse { m, s });
        }
        Ok(Self {
            trajectories,
            s,
            delta,
        })
    }

    pub fn k(&self) -> usize {
        self.trajectories.len()
    }

    pub fn grid_len(&self) -> usize {
        self.trajectories[0].grid_len()
    }

    pub fn dim(&self) -> usize {
        self.trajectories[0].dim()
    }

    pub fn order(&self) -> usize {
        self.s
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn trajectory(&self, j: usize) -> &GridTrajectory {
        &self.trajectories[j]
    }

    pub fn trajectories(&self) -> &[GridTrajectory] {
        &self.trajectories
    }

    /// Replace trajectory `j`, keeping `s` and `delta`.
    pub fn with_trajectory(&self, j: usize, trajectory: GridTrajectory) -> Result<Self> {
        let mut trajectories = self.trajectories.clone();
        trajectories[j] = trajectory;
        Self::new(trajectories, self.s, self.delta)
    }

    /// Reorder trajectories; the objective is invariant under this.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.k() {
            return Err(Error::Shape("permutation length must equal k".into()));
        }
        let trajectories = perm.iter().map(|&j| self.trajectories[j].clone()).collect();
        Self::new(trajectories, self.s, self.delta)
    }

    /// Sum of the roughness penalties of all trajectories.
    pub fn total_penalty(&self) -> Result<f64> {
        let mut acc = 0.0;
        for tr in &self.trajectories {
            acc += tr.penalty(self.s)?;
        }
        Ok(acc)
    }

    /// Component-wise `self + alpha * direction`.
    pub fn perturbed(&self, alpha: f64, direction: &TrajectorySet) -> Result<Self> {
        if direction.k() != self.k() {
            return Err(Error::Shape("direction must have the same k".into()));
        }
        let trajectories = self
            .trajectories
            .iter()
            .zip(direction.trajectories())
            .map(|(a, b)| a.axpy(alpha, b))
            .collect::<Result<Vec<_>>>()?;
        Self::new(trajectories, self.s, self.delta)
    }

    /// Minimum pairwise gap over grid nodes, compared against `delta`.
    /// For k = 1 there is nothing to separate and the gap is infinite.
    pub fn separation_check(&self) -> SeparationReport {
        let k = self.k();
        if k < 2 {
            return SeparationReport {
                ok: true,
                min_gap: f64::INFINITY,
            };
        }
        let (m, d) = (self.grid_len(), self.dim());
        let mut min_gap = f64::INFINITY;
        for g in 0..m {
            for j in 0..k {
                let a = self.trajectories[j].node(g);
                for l in j + 1..k {
                    let b = self.trajectories[l].node(g);
                    let mut sq = 0.0;
                    for i in 0..d {
                        let r = a[i] - b[i];
                        sq += r * r;
                    }
                    min_gap = min_gap.min(sq.sqrt());
                }
            }
        }
        SeparationReport {
            ok: min_gap >= self.delta,
            min_gap,
        }
    }
}

/// Distance between two trajectory sets in the summed per-component
/// `h0 + h1` norm, minimized over all label permutations.
pub fn hs_distance(a: &TrajectorySet, b: &TrajectorySet) -> Result<f64> {
    if a.k() != b.k()
        || a.grid_len() != b.grid_len()
        || a.dim() != b.dim()
        || a.order() != b.order()
    {
        return Err(Error::Shape(format!(
            "set shapes differ: (k, m, d, s) = ({}, {}, {}, {}) vs ({}, {}, {}, {})",
            a.k(),
            a.grid_len(),
            a.dim(),
            a.order(),
            b.k(),
            b.grid_len(),
            b.dim(),
            b.order()
        )));
    }
    let k = a.k();
    let s = a.order();
    let mut cost = vec![0.0; k * k];
    for j in 0..k {
        for l in 0..k {
            let diff = a.trajectory(j).difference(b.trajectory(l))?;
            cost[j * k + l] = diff.sobolev_norms(s)?.hs;
        }
    }
    let mut used = vec![false; k];
    Ok(min_assignment(&cost, k, 0, &mut used))
}

fn min_assignment(cost: &[f64], k: usize, row: usize, used: &mut [bool]) -> f64 {
    if row == k {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    for l in 0..k {
        if used[l] {
            continue;
        }
        used[l] = true;
        let c = cost[row * k + l] + min_assignment(cost, k, row + 1, used);
        used[l] = false;
        if c < best {
            best = c;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use std::f64::consts::PI;

    fn scalar_traj(f: impl Fn(f64) -> f64, m: usize) -> GridTrajectory {
        GridTrajectory::from_fn(m, 1, |t, out| out[0] = f(t)).unwrap()
    }

    #[test]
    fn eval_constant_anywhere() {
        let tr = GridTrajectory::constant(&[7.25], 11).unwrap();
        assert_eq!(tr.eval(0.37).unwrap(), vec![7.25]);
    }

    #[test]
    fn eval_midpoint_of_two_nodes() {
        let tr = GridTrajectory::new(vec![0.0, 1.0], 2, 1).unwrap();
        assert_eq!(tr.eval(0.5).unwrap(), vec![0.5]);
    }

    #[test]
    fn eval_quadratic_within_interpolation_bound() {
        let tr = scalar_traj(|t| t * t, 101);
        let got = tr.eval(0.315).unwrap()[0];
        assert!((got - 0.315f64 * 0.315).abs() < 1e-4);
    }

    #[test]
    fn eval_outside_domain_is_rejected() {
        let tr = GridTrajectory::constant(&[0.0], 5).unwrap();
        assert!(matches!(tr.eval(-0.1), Err(Error::Domain(_))));
        assert!(matches!(tr.eval(1.1), Err(Error::Domain(_))));
        assert!(matches!(tr.eval(f64::NAN), Err(Error::Domain(_))));
    }

    #[test]
    fn eval_reproduces_nodes_bit_exactly() {
        let tr = scalar_traj(|t| (13.0 * t).sin() * 3.7, 37);
        for g in 0..tr.grid_len() {
            let t = tr.node_time(g);
            assert_eq!(tr.eval(t).unwrap()[0].to_bits(), tr.node(g)[0].to_bits());
        }
    }

    #[test]
    fn penalty_of_constant_is_zero() {
        let tr = GridTrajectory::constant(&[4.2, -1.0], 17).unwrap();
        assert_eq!(tr.penalty(1).unwrap(), 0.0);
    }

    #[test]
    fn penalty_annihilates_affine_for_s2() {
        let tr = scalar_traj(|t| 3.5 * t - 0.25, 33);
        assert_abs_diff_eq!(tr.penalty(2).unwrap(), 0.0, epsilon = 1e-20);
    }

    #[test]
    fn penalty_of_sine_matches_integral() {
        // integral of (2 pi cos(2 pi t))^2 over [0,1] is 2 pi^2
        let tr = scalar_traj(|t| (2.0 * PI * t).sin(), 201);
        let expected = 2.0 * PI * PI;
        assert!((tr.penalty(1).unwrap() - expected).abs() < 0.01 * expected);
    }

    #[test]
    fn penalty_rejects_coarse_grid() {
        let tr = GridTrajectory::constant(&[0.0], 2).unwrap();
        assert!(matches!(
            tr.penalty(2),
            Err(Error::GridTooCoarse { m: 2, s: 2 })
        ));
    }

    #[test]
    fn h0_norm_of_constant() {
        let tr = GridTrajectory::constant(&[-3.0, 4.0], 9).unwrap();
        assert_eq!(tr.h0_norm(1).unwrap(), 5.0);
    }

    #[test]
    fn h0_norm_exact_for_affine() {
        let tr = scalar_traj(|t| 3.0 * t, 21);
        assert_abs_diff_eq!(tr.h0_norm(2).unwrap(), 3.0, epsilon = 1e-12);
    }

    #[test]
    fn h0_norm_of_exponential() {
        let tr = scalar_traj(|t| t.exp(), 1001);
        assert!((tr.h0_norm(2).unwrap() - 2.0).abs() < 1e-2);
    }

    #[test]
    fn hs_distance_identity_and_swap() {
        let a = TrajectorySet::new(
            vec![scalar_traj(|t| t, 11), scalar_traj(|t| 1.0 - t, 11)],
            1,
            0.1,
        )
        .unwrap();
        let swapped = a.permuted(&[1, 0]).unwrap();
        assert_eq!(hs_distance(&a, &a).unwrap(), 0.0);
        assert_eq!(hs_distance(&a, &swapped).unwrap(), 0.0);
    }

    #[test]
    fn hs_distance_between_constants() {
        let a = TrajectorySet::new(vec![GridTrajectory::constant(&[0.0], 11).unwrap()], 1, 1.0)
            .unwrap();
        let b = TrajectorySet::new(vec![GridTrajectory::constant(&[3.0], 11).unwrap()], 1, 1.0)
            .unwrap();
        assert_relative_eq!(hs_distance(&a, &b).unwrap(), 3.0, max_relative = 1e-12);
    }

    #[test]
    fn hs_distance_shape_mismatch() {
        let a = TrajectorySet::new(vec![GridTrajectory::constant(&[0.0], 11).unwrap()], 1, 1.0)
            .unwrap();
        let b = TrajectorySet::new(vec![GridTrajectory::constant(&[0.0], 12).unwrap()], 1, 1.0)
            .unwrap();
        assert!(matches!(hs_distance(&a, &b), Err(Error::Shape(_))));
    }

    #[test]
    fn separation_of_well_separated_constants() {
        let set = TrajectorySet::new(
            vec![
                GridTrajectory::constant(&[0.0], 11).unwrap(),
                GridTrajectory::constant(&[10.0], 11).unwrap(),
            ],
            1,
            1.0,
        )
        .unwrap();
        let rep = set.separation_check();
        assert!(rep.ok);
        assert_eq!(rep.min_gap, 10.0);
    }

    #[test]
    fn separation_detects_crossing_on_grid() {
        // t and 1 - t cross at t = 0.5, which lies on the grid for odd m
        let set = TrajectorySet::new(
            vec![scalar_traj(|t| t, 11), scalar_traj(|t| 1.0 - t, 11)],
            1,
            0.1,
        )
        .unwrap();
        let rep = set.separation_check();
        assert!(!rep.ok);
        assert_eq!(rep.min_gap, 0.0);
    }

    #[test]
    fn separation_minimum_of_sine_gap() {
        let set = TrajectorySet::new(
            vec![
                GridTrajectory::constant(&[0.0], 201).unwrap(),
                scalar_traj(|t| 0.5 + 0.1 * (2.0 * PI * t).sin(), 201),
            ],
            1,
            0.5,
        )
        .unwrap();
        let rep = set.separation_check();
        assert!(!rep.ok);
        assert_abs_diff_eq!(rep.min_gap, 0.4, epsilon = 1e-12);
    }

    #[test]
    fn separation_single_trajectory() {
        let set =
            TrajectorySet::new(vec![GridTrajectory::constant(&[0.0], 5).unwrap()], 1, 1.0).unwrap();
        let rep = set.separation_check();
        assert!(rep.ok);
        assert!(rep.min_gap.is_infinite());
    }

    #[test]
    fn non_finite_values_rejected() {
        assert!(GridTrajectory::new(vec![0.0, f64::NAN], 2, 1).is_err());
        assert!(GridTrajectory::new(vec![0.0, f64::INFINITY], 2, 1).is_err());
    }
}
