//! The infinite-data objective and its directional derivative.
//!
//! The population objective replaces the sample average of the empirical
//! objective by an integral against the generating density,
//!
//! ```text
//! f(mu) = int_0^1 int min_j |y - mu_j(t)|^2 phi_Y(y|t) phi_T(t) dy dt
//!         + lambda * sum_j ||D^s mu_j||^2
//! ```
//!
//! with `phi_Y(y|t) = sum_j p_j phi_0(y - truth_j(t))`. The y-integral is
//! truncated to the box [-R, R]^d and evaluated by tensor-product
//! Gauss-Legendre; the truncation is certified against the noise tails
//! before any integration happens.
//!
//! The directional derivative in direction `nu` is evaluated in closed form:
//!
//! ```text
//! 2 int int (mu_(j*)(t) - y) . nu_(j*)(t) phi_Y phi_T dy dt
//!   + 2 lambda sum_j <D^s nu_j, D^s mu_j>
//! ```
//!
//! where `j*` is the nearest trajectory (smallest index on ties, matching
//! the assignment rule; the ambiguous set has measure zero and quadrature
//! nodes landing on it are taken as-is).

use crate::error::{Error, Result};
use crate::quadrature::{GaussLegendre, TensorGrid};
use crate::solver::{objective_empirical, Dataset};
use crate::synth::MixtureModel;
use crate::trajectory::TrajectorySet;

/// Maximum truncated noise mass tolerated by the certification check.
pub const TRUNCATION_MASS_LIMIT: f64 = 1e-10;

/// Tail mass per dimension targeted when choosing a default radius.
const DEFAULT_RADIUS_TAIL: f64 = 1e-12;

/// Product quadrature over [0,1] x [-R, R]^d.
///
/// The integrands are only piecewise-smooth in t (trajectories are
/// piecewise-linear across their grid), so the time rule is composite:
/// `t_nodes` Gauss-Legendre nodes on every grid cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    /// Gauss-Legendre nodes per trajectory-grid cell of the time interval.
    pub t_nodes: usize,
    /// Truncation radius of the y-integral.
    pub y_radius: f64,
    /// Gauss-Legendre nodes per y-dimension.
    pub y_nodes: usize,
}

impl QuadratureSpec {
    pub fn new(t_nodes: usize, y_radius: f64, y_nodes: usize) -> Result<Self> {
        if t_nodes < 8 {
            return Err(Error::Domain(format!("need t_nodes >= 8, got {t_nodes}")));
        }
        if y_nodes < 16 {
            return Err(Error::Domain(format!("need y_nodes >= 16, got {y_nodes}")));
        }
        if !(y_radius > 0.0 && y_radius.is_finite()) {
            return Err(Error::Domain(format!("need y_radius > 0, got {y_radius}")));
        }
        Ok(Self {
            t_nodes,
            y_radius,
            y_nodes,
        })
    }

    /// Default radius for a model: the largest truth coordinate plus the
    /// noise quantile with per-dimension tail mass 1e-12 (8 sigma for
    /// Gaussian noise).
    pub fn for_model(model: &MixtureModel, t_nodes: usize, y_nodes: usize) -> Result<Self> {
        let margin = match *model.noise() {
            crate::synth::NoiseSpec::Gaussian { sigma } => 8.0 * sigma,
            _ => model.noise().upper_quantile(DEFAULT_RADIUS_TAIL)?,
        };
        Self::new(t_nodes, model.max_abs_coordinate() + margin, y_nodes)
    }
}

/// Certify that the mass of `phi_Y(.|t)` outside the quadrature box is below
/// [`TRUNCATION_MASS_LIMIT`], uniformly in t.
fn check_truncation(model: &MixtureModel, quad: &QuadratureSpec) -> Result<()> {
    let margin = quad.y_radius - model.max_abs_coordinate();
    if margin <= 0.0 {
        return Err(Error::Quadrature(format!(
            "radius {} does not even cover the truth trajectories",
            quad.y_radius
        )));
    }
    let d = model.dim() as f64;
    let mass = 2.0 * d * model.noise().upper_tail(margin)?;
    if !(mass < TRUNCATION_MASS_LIMIT) {
        return Err(Error::Quadrature(format!(
            "truncated noise mass bound {mass:.3e} exceeds {TRUNCATION_MASS_LIMIT:.0e}; \
             increase y_radius"
        )));
    }
    Ok(())
}

fn check_dims(set: &TrajectorySet, model: &MixtureModel, quad: &QuadratureSpec) -> Result<()> {
    if set.dim() != model.dim() {
        return Err(Error::Shape(format!(
            "set dimension {} != model dimension {}",
            set.dim(),
            model.dim()
        )));
    }
    if set.dim() > 3 {
        return Err(Error::Quadrature(format!(
            "tensor quadrature is limited to d <= 3, got d = {}; \
             use the Monte Carlo estimator",
            set.dim()
        )));
    }
    check_truncation(model, quad)
}

/// Trajectory and truth values at one time node.
struct TimeSlice {
    set_values: Vec<f64>,   // (k x d)
    truth_values: Vec<f64>, // (k_truth x d)
    dir_values: Vec<f64>,   // (k x d), zero when unused
    // density_1d(y_node[q] - truth[l][dim]) at [l, dim, q]; used for the
    // outer tensor dimensions only
    pdf_table: Vec<f64>,
}

impl TimeSlice {
    fn new(k: usize, k_truth: usize, d: usize, y_nodes: usize) -> Self {
        Self {
            set_values: vec![0.0; k * d],
            truth_values: vec![0.0; k_truth * d],
            dir_values: vec![0.0; k * d],
            pdf_table: vec![0.0; k_truth * d * y_nodes],
        }
    }

    fn fill(
        &mut self,
        t: f64,
        set: &TrajectorySet,
        direction: Option<&TrajectorySet>,
        model: &MixtureModel,
        y_rule: &GaussLegendre,
        pdf: &crate::synth::NoisePdf,
    ) -> Result<()> {
        let d = set.dim();
        for (j, tr) in set.trajectories().iter().enumerate() {
            tr.eval_into(t, &mut self.set_values[j * d..(j + 1) * d])?;
        }
        if let Some(dir) = direction {
            for (j, tr) in dir.trajectories().iter().enumerate() {
                tr.eval_into(t, &mut self.dir_values[j * d..(j + 1) * d])?;
            }
        }
        for (l, tr) in model.truth().trajectories().iter().enumerate() {
            tr.eval_into(t, &mut self.truth_values[l * d..(l + 1) * d])?;
        }
        let nq = y_rule.len();
        for l in 0..model.k() {
            for dim in 0..d {
                let center = self.truth_values[l * d + dim];
                let row = &mut self.pdf_table[(l * d + dim) * nq..(l * d + dim + 1) * nq];
                for (q, &node) in y_rule.nodes.iter().enumerate() {
                    row[q] = pdf.density_1d(node - center);
                }
            }
        }
        Ok(())
    }

    /// Dimension along which the trajectories differ most, summed over
    /// pairs. The inner integral runs along this axis so the assignment
    /// boundaries can be split off exactly.
    fn split_dimension(&self, k: usize, d: usize) -> usize {
        if k < 2 {
            return 0;
        }
        let mut best = (0, -1.0);
        for dim in 0..d {
            let mut power = 0.0;
            for a in 0..k {
                for b in a + 1..k {
                    let diff = self.set_values[a * d + dim] - self.set_values[b * d + dim];
                    power += diff * diff;
                }
            }
            if power > best.1 {
                best = (dim, power);
            }
        }
        best.0
    }
}

/// Quadrature value of the population objective.
pub fn objective_population(
    set: &TrajectorySet,
    model: &MixtureModel,
    quad: &QuadratureSpec,
    lambda: f64,
) -> Result<f64> {
    integrate(set, None, model, quad, lambda)
}

/// Closed-form directional derivative of the population objective at `set`
/// in direction `direction`.
pub fn gateaux_derivative(
    set: &TrajectorySet,
    direction: &TrajectorySet,
    model: &MixtureModel,
    quad: &QuadratureSpec,
    lambda: f64,
) -> Result<f64> {
    if direction.k() != set.k()
        || direction.grid_len() != set.grid_len()
        || direction.dim() != set.dim()
    {
        return Err(Error::Shape("direction must match the set's shape".into()));
    }
    integrate(set, Some(direction), model, quad, lambda)
}

/// Shared quadrature driver. With `direction = None` it accumulates the
/// objective data term plus the penalty; otherwise the derivative data term
/// plus the penalty inner products.
///
/// The nearest-trajectory kernel has kinks (and, for the derivative, jumps)
/// across the assignment boundaries. Those boundaries are hyperplanes, so
/// along any axis-parallel line they are at most k(k-1)/2 explicit points:
/// the inner integral runs along the most discriminating axis, splits at
/// those points, and integrates each piece with its own Gauss-Legendre rule,
/// leaving only smooth integrands for every rule involved.
fn integrate(
    set: &TrajectorySet,
    direction: Option<&TrajectorySet>,
    model: &MixtureModel,
    quad: &QuadratureSpec,
    lambda: f64,
) -> Result<f64> {
    check_dims(set, model, quad)?;
    let pdf = model.noise().pdf()?;
    let (k, d) = (set.k(), set.dim());
    let k_truth = model.k();
    let radius = quad.y_radius;

    // composite time rule: spectral per cell, cells aligned with the grid
    // kinks of both the set and the truth
    let unit_t = GaussLegendre::new(quad.t_nodes, 0.0, 1.0)?;
    let mut boundaries: Vec<f64> = Vec::new();
    for m in [set.grid_len(), model.truth().grid_len()] {
        for g in 0..m {
            boundaries.push(g as f64 / (m - 1) as f64);
        }
    }
    boundaries.sort_by(|a, b| a.partial_cmp(b).unwrap());
    boundaries.dedup();
    let mut t_rule = GaussLegendre {
        nodes: Vec::new(),
        weights: Vec::new(),
    };
    for cell in boundaries.windows(2) {
        let width = cell[1] - cell[0];
        if width <= 0.0 {
            continue;
        }
        for (&u, &wu) in unit_t.nodes.iter().zip(&unit_t.weights) {
            t_rule.nodes.push(cell[0] + width * u);
            t_rule.weights.push(width * wu);
        }
    }

    let y_rule = GaussLegendre::new(quad.y_nodes, -radius, radius)?;
    // unit rule mapped onto each boundary-free segment of the inner axis
    let unit_rule = GaussLegendre::new(quad.y_nodes, 0.0, 1.0)?;
    let nq = y_rule.len();

    let mut slice = TimeSlice::new(k, k_truth, d, nq);
    let mut y_outer = vec![0.0; d.saturating_sub(1)];
    let mut splits: Vec<f64> = Vec::new();
    let mut line_density = vec![0.0; k_truth]; // outer pdf product per component
    let mut line_residual = vec![0.0; k]; // outer squared distance per trajectory
    let mut line_dot = vec![0.0; k]; // outer (mu - y) . nu per trajectory
    let mut acc = 0.0;

    for (&t, &wt) in t_rule.nodes.iter().zip(&t_rule.weights) {
        slice.fill(t, set, direction, model, &y_rule, &pdf)?;
        let inner_dim = slice.split_dimension(k, d);
        let outer_dims: Vec<usize> = (0..d).filter(|&dim| dim != inner_dim).collect();
        let time_weight = wt * model.time().density(t);

        let mut t_acc = 0.0;
        // for d == 1 the outer grid is the empty product: one line
        let mut grid = TensorGrid::new(&y_rule, d - 1);
        while grid.advance() {
            grid.write_point(&mut y_outer);
            let idx = grid.index();
            let outer_weight = grid.weight();

            for l in 0..k_truth {
                let mut prod = model.weights()[l];
                for (pos, &dim) in outer_dims.iter().enumerate() {
                    prod *= slice.pdf_table[(l * d + dim) * nq + idx[pos]];
                }
                line_density[l] = prod;
            }
            for j in 0..k {
                let mut sq = 0.0;
                let mut dot = 0.0;
                for (pos, &dim) in outer_dims.iter().enumerate() {
                    let r = slice.set_values[j * d + dim] - y_outer[pos];
                    sq += r * r;
                    dot += r * slice.dir_values[j * d + dim];
                }
                line_residual[j] = sq;
                line_dot[j] = dot;
            }

            // crossing points of pairwise assignment boundaries on this line
            splits.clear();
            splits.push(-radius);
            for a in 0..k {
                for b in a + 1..k {
                    let da = slice.set_values[a * d + inner_dim];
                    let db = slice.set_values[b * d + inner_dim];
                    let denom = 2.0 * (db - da);
                    if denom.abs() < 1e-14 {
                        continue;
                    }
                    // |y - mu_a|^2 = |y - mu_b|^2 along the inner axis
                    let numer = (db * db - da * da) + (line_residual[b] - line_residual[a]);
                    let cross = numer / denom;
                    if cross > -radius && cross < radius {
                        splits.push(cross);
                    }
                }
            }
            splits.push(radius);
            splits.sort_by(|x, z| x.partial_cmp(z).unwrap());

            let mut line_acc = 0.0;
            for seg in 0..splits.len() - 1 {
                let (lo, hi) = (splits[seg], splits[seg + 1]);
                if hi - lo < 1e-13 * radius {
                    continue;
                }
                // the owner is constant inside a boundary-free segment
                let mid = 0.5 * (lo + hi);
                let mut owner = 0;
                let mut best = f64::INFINITY;
                for j in 0..k {
                    let r = mid - slice.set_values[j * d + inner_dim];
                    let sq = line_residual[j] + r * r;
                    if sq < best {
                        best = sq;
                        owner = j;
                    }
                }
                let own_center = slice.set_values[owner * d + inner_dim];
                let own_dir = slice.dir_values[owner * d + inner_dim];
                let width = hi - lo;
                for (&u, &wu) in unit_rule.nodes.iter().zip(&unit_rule.weights) {
                    let yv = lo + width * u;
                    let mut phi = 0.0;
                    for l in 0..k_truth {
                        phi += line_density[l]
                            * pdf.density_1d(yv - slice.truth_values[l * d + inner_dim]);
                    }
                    let r = own_center - yv;
                    let kernel = match direction {
                        None => line_residual[owner] + r * r,
                        Some(_) => line_dot[owner] + r * own_dir,
                    };
                    line_acc += width * wu * kernel * phi;
                }
            }
            t_acc += outer_weight * line_acc;
        }
        acc += time_weight * t_acc;
    }

    match direction {
        None => Ok(acc + lambda * set.total_penalty()?),
        Some(dir) => {
            let mut penalty_terms = 0.0;
            for j in 0..k {
                penalty_terms += dir
                    .trajectory(j)
                    .penalty_inner(set.trajectory(j), set.order())?;
            }
            Ok(2.0 * acc + 2.0 * lambda * penalty_terms)
        }
    }
}

/// Monte Carlo estimate of the population objective with its standard
/// error. Works in any dimension; this is the fallback beyond d = 3 and the
/// independent cross-check for the quadrature path.
pub fn objective_population_mc(
    set: &TrajectorySet,
    model: &MixtureModel,
    samples: usize,
    seed: u64,
    lambda: f64,
) -> Result<(f64, f64)> {
    if set.dim() != model.dim() {
        return Err(Error::Shape("set and model dimensions differ".into()));
    }
    if samples < 2 {
        return Err(Error::Domain("need at least two samples".into()));
    }
    let mut y = vec![0.0; model.dim()];
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for i in 0..samples {
        let (t, _) = model.sample_observation(seed, i as u64, &mut y)?;
        let mut g = f64::INFINITY;
        for tr in set.trajectories() {
            g = g.min(tr.sq_dist_at(t, &y)?);
        }
        let count = (i + 1) as f64;
        let delta = g - mean;
        mean += delta / count;
        m2 += delta * (g - mean);
    }
    let n = samples as f64;
    let stderr = (m2 / (n - 1.0)).sqrt() / n.sqrt();
    Ok((mean + lambda * set.total_penalty()?, stderr))
}

/// The scaled gap between the empirical and the population objective,
/// `sqrt(n) * (f_n - f)`. Bounded in probability as n grows.
pub fn fluctuation_statistic(
    set: &TrajectorySet,
    data: &Dataset,
    model: &MixtureModel,
    quad: &QuadratureSpec,
    lambda: f64,
) -> Result<f64> {
    let empirical = objective_empirical(set, data, lambda)?;
    let population = objective_population(set, model, quad, lambda)?;
    Ok((data.n() as f64).sqrt() * (empirical - population))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{NoiseSpec, Primitive, TimeSpec};
    use crate::trajectory::GridTrajectory;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn centered_model(d: usize) -> MixtureModel {
        let zero = Primitive::Constant {
            value: vec![0.0; d],
        };
        MixtureModel::from_primitives(
            &[zero],
            vec![1.0],
            NoiseSpec::Gaussian { sigma: 1.0 },
            TimeSpec::Uniform,
            1.0,
            21,
            1,
        )
        .unwrap()
    }

    #[test]
    fn objective_at_truth_is_the_noise_second_moment() {
        for d in 1..=3 {
            let model = centered_model(d);
            let quad = QuadratureSpec::for_model(&model, 8, 48).unwrap();
            let value = objective_population(model.truth(), &model, &quad, 1.0).unwrap();
            assert_abs_diff_eq!(value, d as f64, epsilon = 1e-6);
        }
    }

    #[test]
    fn lambda_term_is_additive() {
        let model = MixtureModel::from_primitives(
            &[Primitive::Sinusoid {
                offset: vec![0.0],
                amplitude: vec![1.0],
                frequency: 1.0,
                phase: 0.0,
            }],
            vec![1.0],
            NoiseSpec::Gaussian { sigma: 0.5 },
            TimeSpec::Uniform,
            1.0,
            101,
            1,
        )
        .unwrap();
        let quad = QuadratureSpec::for_model(&model, 8, 32).unwrap();
        let set = model.truth();
        let lambda = 0.37;
        let with = objective_population(set, &model, &quad, lambda).unwrap();
        let without = objective_population(set, &model, &quad, 0.0).unwrap();
        assert_abs_diff_eq!(
            with - without,
            lambda * set.total_penalty().unwrap(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn derivative_vanishes_at_a_penalty_free_truth() {
        let model = MixtureModel::from_primitives(
            &[
                Primitive::Constant { value: vec![-2.0] },
                Primitive::Constant { value: vec![2.0] },
            ],
            vec![0.5, 0.5],
            NoiseSpec::Gaussian { sigma: 0.4 },
            TimeSpec::Uniform,
            1.0,
            21,
            1,
        )
        .unwrap();
        let quad = QuadratureSpec::for_model(&model, 8, 64).unwrap();
        let dir = TrajectorySet::new(
            vec![
                GridTrajectory::from_fn(21, 1, |t, out| out[0] = t * t - 0.3).unwrap(),
                GridTrajectory::from_fn(21, 1, |t, out| out[0] = (3.0 * t).cos()).unwrap(),
            ],
            1,
            1.0,
        )
        .unwrap();
        let d = gateaux_derivative(model.truth(), &dir, &model, &quad, 0.2).unwrap();
        assert_abs_diff_eq!(d, 0.0, epsilon = 1e-6);
    }

    #[test]
    fn derivative_in_own_direction_reduces_to_penalty_term() {
        // at the truth with centered noise the data term vanishes, leaving
        // 2 lambda <D^s mu, D^s mu> = 2 lambda * penalty
        let model = MixtureModel::from_primitives(
            &[Primitive::Sinusoid {
                offset: vec![0.0],
                amplitude: vec![1.0],
                frequency: 1.0,
                phase: 0.0,
            }],
            vec![1.0],
            NoiseSpec::Gaussian { sigma: 0.5 },
            TimeSpec::Uniform,
            1.0,
            101,
            1,
        )
        .unwrap();
        let quad = QuadratureSpec::for_model(&model, 8, 48).unwrap();
        let set = model.truth();
        let lambda = 0.11;
        let d = gateaux_derivative(set, set, &model, &quad, lambda).unwrap();
        assert_relative_eq!(
            d,
            2.0 * lambda * set.total_penalty().unwrap(),
            max_relative = 1e-6
        );
    }

    #[test]
    fn objective_is_invariant_under_relabeling() {
        let model = MixtureModel::from_primitives(
            &[
                Primitive::Constant { value: vec![-2.0] },
                Primitive::Sinusoid {
                    offset: vec![2.0],
                    amplitude: vec![0.5],
                    frequency: 1.0,
                    phase: 0.3,
                },
            ],
            vec![0.4, 0.6],
            NoiseSpec::Gaussian { sigma: 0.4 },
            TimeSpec::Uniform,
            1.0,
            21,
            1,
        )
        .unwrap();
        let quad = QuadratureSpec::for_model(&model, 8, 48).unwrap();
        let set = model.truth().perturbed(0.2, model.truth()).unwrap();
        let swapped = set.permuted(&[1, 0]).unwrap();
        let a = objective_population(&set, &model, &quad, 0.05).unwrap();
        let b = objective_population(&swapped, &model, &quad, 0.05).unwrap();
        assert_abs_diff_eq!(a, b, epsilon = 1e-12 * a.abs());
    }

    #[test]
    fn zero_direction_has_zero_derivative() {
        let model = centered_model(2);
        let quad = QuadratureSpec::for_model(&model, 8, 32).unwrap();
        let at = model.truth().perturbed(0.4, model.truth()).unwrap();
        let zero = TrajectorySet::new(
            vec![GridTrajectory::constant(&[0.0, 0.0], 21).unwrap()],
            1,
            1.0,
        )
        .unwrap();
        assert_eq!(
            gateaux_derivative(&at, &zero, &model, &quad, 0.3).unwrap(),
            0.0
        );
        // the matching finite difference is exactly zero as well
        let plus =
            objective_population(&at.perturbed(1e-4, &zero).unwrap(), &model, &quad, 0.3).unwrap();
        let minus =
            objective_population(&at.perturbed(-1e-4, &zero).unwrap(), &model, &quad, 0.3).unwrap();
        assert_eq!(plus - minus, 0.0);
    }

    #[test]
    fn derivative_is_independent_of_lambda_for_penalty_free_set() {
        let model = centered_model(1);
        let quad = QuadratureSpec::for_model(&model, 8, 32).unwrap();
        let shifted =
            TrajectorySet::new(vec![GridTrajectory::constant(&[0.7], 21).unwrap()], 1, 1.0)
                .unwrap();
        let dir = TrajectorySet::new(
            vec![GridTrajectory::from_fn(21, 1, |t, out| out[0] = (2.0 * t).sin()).unwrap()],
            1,
            1.0,
        )
        .unwrap();
        let a = gateaux_derivative(&shifted, &dir, &model, &quad, 0.1).unwrap();
        let b = gateaux_derivative(&shifted, &dir, &model, &quad, 0.2).unwrap();
        assert_abs_diff_eq!(a, b, epsilon = 1e-12);
    }

    #[test]
    fn derivative_is_linear_in_the_direction() {
        let model = centered_model(1);
        let quad = QuadratureSpec::for_model(&model, 8, 48).unwrap();
        let at = TrajectorySet::new(
            vec![GridTrajectory::from_fn(21, 1, |t, out| out[0] = 0.4 + 0.2 * t).unwrap()],
            1,
            1.0,
        )
        .unwrap();
        let nu1 = TrajectorySet::new(
            vec![GridTrajectory::from_fn(21, 1, |t, out| out[0] = t).unwrap()],
            1,
            1.0,
        )
        .unwrap();
        let nu2 = TrajectorySet::new(
            vec![GridTrajectory::from_fn(21, 1, |t, out| out[0] = (5.0 * t).cos()).unwrap()],
            1,
            1.0,
        )
        .unwrap();
        let (a, b) = (1.7, -0.6);
        let combo = nu1
            .perturbed(b / a, &nu2)
            .and_then(|s| {
                // a * nu1 + b * nu2 built via two axpy steps
                let zero = TrajectorySet::new(
                    vec![GridTrajectory::constant(&[0.0], 21).unwrap()],
                    1,
                    1.0,
                )?;
                zero.perturbed(a, &s)
            })
            .unwrap();
        let lambda = 0.05;
        let d1 = gateaux_derivative(&at, &nu1, &model, &quad, lambda).unwrap();
        let d2 = gateaux_derivative(&at, &nu2, &model, &quad, lambda).unwrap();
        let dc = gateaux_derivative(&at, &combo, &model, &quad, lambda).unwrap();
        assert_abs_diff_eq!(dc, a * d1 + b * d2, epsilon = 1e-8);
    }

    #[test]
    fn fluctuation_statistic_cancels_by_construction() {
        let model = centered_model(1);
        let quad = QuadratureSpec::for_model(&model, 8, 48).unwrap();
        let set = model.truth().clone();
        let lambda = 0.3;
        let population = objective_population(&set, &model, &quad, 0.0).unwrap();
        // one observation whose squared residual equals the population data term
        let data = Dataset::new(vec![0.5], vec![population.sqrt()], 1).unwrap();
        let y = fluctuation_statistic(&set, &data, &model, &quad, lambda).unwrap();
        assert_abs_diff_eq!(y, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn rejects_high_dimension_for_tensor_rule() {
        let model = centered_model(1);
        // build a 4-d model through unchecked to hit the dimension guard
        let truth = TrajectorySet::new(
            vec![GridTrajectory::constant(&[0.0; 4], 11).unwrap()],
            1,
            1.0,
        )
        .unwrap();
        let model4 = MixtureModel::unchecked(
            truth.clone(),
            vec![1.0],
            NoiseSpec::Gaussian { sigma: 1.0 },
            TimeSpec::Uniform,
        )
        .unwrap();
        let quad = QuadratureSpec::new(8, 9.0, 32).unwrap();
        assert!(matches!(
            objective_population(&truth, &model4, &quad, 1.0),
            Err(Error::Quadrature(_))
        ));
        drop(model);
    }

    #[test]
    fn rejects_insufficient_radius() {
        let model = centered_model(1);
        let quad = QuadratureSpec::new(8, 2.0, 32).unwrap(); // mass outside ~ 4.5e-2
        assert!(matches!(
            objective_population(model.truth(), &model, &quad, 1.0),
            Err(Error::Quadrature(_))
        ));
    }

    #[test]
    fn monte_carlo_matches_quadrature_for_single_gaussian() {
        let model = centered_model(2);
        let quad = QuadratureSpec::for_model(&model, 8, 48).unwrap();
        let set = model.truth();
        let exact = objective_population(set, &model, &quad, 0.5).unwrap();
        let (mc, stderr) = objective_population_mc(set, &model, 200_000, 13, 0.5).unwrap();
        assert!(
            (mc - exact).abs() < 4.0 * stderr + 1e-9,
            "mc {mc} vs quadrature {exact} (stderr {stderr})"
        );
    }
}
