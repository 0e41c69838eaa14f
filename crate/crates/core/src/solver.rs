//! The alternating minimization for the multi-trajectory objective.
//!
//! Each iteration assigns every observation to its nearest trajectory and
//! refits each trajectory on the points it owns. The assignment step can only
//! lower the data term and the refit solves its subproblem exactly, so the
//! objective is non-increasing and the iteration terminates once the
//! assignment repeats.
//!
//! The objective is not convex for k > 1, so [`solve`] runs seeded restarts
//! and keeps the best final objective. The separation constraint is never
//! enforced during iteration; it is checked post hoc and reported.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::smoother::{fit_single, SmootherConfig, WeightedPoints};
use crate::trajectory::{GridTrajectory, TrajectorySet};

/// Unlabeled space-time observations.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    times: Vec<f64>,
    targets: Vec<f64>, // row-major (n x d)
    d: usize,
}

impl Dataset {
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

    pub fn n(&self) -> usize {
        self.times.len()
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn time(&self, i: usize) -> f64 {
        self.times[i]
    }

    pub fn target(&self, i: usize) -> &[f64] {
        &self.targets[i * self.d..(i + 1) * self.d]
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    /// The subset of points with `labels[i] == cluster`, as smoother input.
    pub fn cluster_points(&self, labels: &[usize], cluster: usize) -> WeightedPoints {
        let mut times = Vec::new();
        let mut targets = Vec::new();
        for (i, &l) in labels.iter().enumerate() {
            if l == cluster {
                times.push(self.times[i]);
                targets.extend_from_slice(self.target(i));
            }
        }
        WeightedPoints::new(times, targets, self.d).expect("cluster subset of a valid dataset")
    }

    /// All points, as smoother input.
    pub fn all_points(&self) -> WeightedPoints {
        WeightedPoints::new(self.times.clone(), self.targets.clone(), self.d)
            .expect("valid dataset")
    }
}

/// Hard data association: `labels[i]` is the 0-based index of the trajectory
/// owning observation `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    pub labels: Vec<usize>,
}

/// Diagnostics of one [`solve`] call (the winning restart).
#[derive(Debug, Clone)]
pub struct SolveReport {
    /// Objective after each iteration; non-increasing.
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
    /// True iff the iteration stopped because the assignment repeated.
    pub converged: bool,
    pub restarts_used: usize,
    /// Post-hoc separation verdict at the requested delta.
    pub separation_ok: bool,
    pub min_gap: f64,
}

impl SolveReport {
    pub fn final_objective(&self) -> f64 {
        *self.objective_trace.last().expect("at least one iteration")
    }
}

/// Initialization strategy for each restart.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitStrategy {
    /// Fit one global smoother, then offset k copies by k-means++-style
    /// seeding on the residual vectors.
    #[default]
    PerturbedGlobal,
    /// Constant trajectories through k distinct random data points.
    RandomPoints,
}

/// Restart schedule and seeding for [`solve`].
#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub restarts: usize,
    pub seed: u64,
    pub init: InitStrategy,
}

impl SolveOptions {
    pub fn new(restarts: usize, seed: u64) -> Self {
        Self {
            restarts,
            seed,
            init: InitStrategy::default(),
        }
    }
}

pub const MAX_ITERATIONS: usize = 100;
const RELATIVE_STALL: f64 = 1e-12;

/// Assign every observation to the nearest trajectory, ties to the smallest
/// index.
pub fn assign(set: &TrajectorySet, data: &Dataset) -> Result<Assignment> {
    if set.dim() != data.dim() {
        return Err(Error::Shape(format!(
            "set dimension {} != data dimension {}",
            set.dim(),
            data.dim()
        )));
    }
    let mut labels = vec![0usize; data.n()];
    for i in 0..data.n() {
        let (t, y) = (data.time(i), data.target(i));
        let mut best = f64::INFINITY;
        for (j, tr) in set.trajectories().iter().enumerate() {
            let sq = tr.sq_dist_at(t, y)?;
            if sq < best {
                best = sq;
                labels[i] = j;
            }
        }
    }
    Ok(Assignment { labels })
}

/// The empirical objective: mean squared distance to the nearest trajectory
/// plus `lambda` times the total roughness penalty.
pub fn objective_empirical(set: &TrajectorySet, data: &Dataset, lambda: f64) -> Result<f64> {
    if data.n() == 0 {
        return Err(Error::Data("empty dataset".into()));
    }
    if set.dim() != data.dim() {
        return Err(Error::Shape("set and data dimensions differ".into()));
    }
    let mut misfit = 0.0;
    for i in 0..data.n() {
        let (t, y) = (data.time(i), data.target(i));
        let mut best = f64::INFINITY;
        for tr in set.trajectories() {
            best = best.min(tr.sq_dist_at(t, y)?);
        }
        misfit += best;
    }
    Ok(misfit / data.n() as f64 + lambda * set.total_penalty()?)
}

/// One alternation step: assign, reseed empty clusters, refit every cluster.
/// Returns the refitted set and the assignment the refit used.
pub fn lloyd_step(
    set: &TrajectorySet,
    data: &Dataset,
    cfg: &SmootherConfig,
) -> Result<(TrajectorySet, Assignment)> {
    let mut assignment = assign(set, data)?;
    let k = set.k();
    let mut working = set.clone();

    let mut sizes = vec![0usize; k];
    for &l in &assignment.labels {
        sizes[l] += 1;
    }
    for j in 0..k {
        if sizes[j] > 0 {
            continue;
        }
        // reseed: constant trajectory through the point farthest from its
        // assigned center, skipping points that would empty their own cluster
        let mut best: Option<(usize, f64)> = None;
        for i in 0..data.n() {
            let l = assignment.labels[i];
            if sizes[l] < 2 {
                continue;
            }
            let r = working
                .trajectory(l)
                .sq_dist_at(data.time(i), data.target(i))?;
            if best.is_none_or(|(_, br)| r > br) {
                best = Some((i, r));
            }
        }
        let (i_star, _) = best.ok_or(Error::TooFewPoints { n: data.n(), k })?;
        let constant = GridTrajectory::constant(data.target(i_star), set.grid_len())?;
        working = working.with_trajectory(j, constant)?;
        sizes[assignment.labels[i_star]] -= 1;
        sizes[j] += 1;
        assignment.labels[i_star] = j;
    }

    let mut refitted = Vec::with_capacity(k);
    for j in 0..k {
        let points = data.cluster_points(&assignment.labels, j);
        refitted.push(fit_single(&points, data.n(), cfg)?);
    }
    let set = TrajectorySet::new(refitted, set.order(), set.delta())?;
    Ok((set, assignment))
}

/// Run the alternation from an explicit initial assignment. This is the
/// restart body of [`solve`] and the hook for exhaustive-initialization
/// studies on tiny instances.
pub fn lloyd_from_assignment(
    data: &Dataset,
    k: usize,
    init_labels: &[usize],
    cfg: &SmootherConfig,
    delta: f64,
) -> Result<(TrajectorySet, SolveReport)> {
    if init_labels.len() != data.n() {
        return Err(Error::Shape("label count must equal n".into()));
    }
    if init_labels.iter().any(|&l| l >= k) {
        return Err(Error::Shape(format!("labels must lie in 0..{k}")));
    }
    let mut trajectories = Vec::with_capacity(k);
    for j in 0..k {
        let points = data.cluster_points(init_labels, j);
        let tr = if points.count() == 0 {
            GridTrajectory::constant(&vec![0.0; data.dim()], cfg.m)?
        } else {
            fit_single(&points, data.n(), cfg)?
        };
        trajectories.push(tr);
    }
    let init = TrajectorySet::new(trajectories, cfg.s, delta)?;
    iterate(init, data, cfg, 1)
}

fn iterate(
    init: TrajectorySet,
    data: &Dataset,
    cfg: &SmootherConfig,
    restarts_used: usize,
) -> Result<(TrajectorySet, SolveReport)> {
    let mut set = init;
    let mut trace = Vec::new();
    let mut prev_labels: Option<Assignment> = None;
    let mut converged = false;

    for _ in 0..MAX_ITERATIONS {
        let (next, assignment) = lloyd_step(&set, data, cfg)?;
        set = next;
        let obj = objective_empirical(&set, data, cfg.lambda)?;
        let stalled = trace
            .last()
            .is_some_and(|&last: &f64| (last - obj).abs() <= RELATIVE_STALL * last.abs().max(1.0));
        trace.push(obj);
        if prev_labels.as_ref() == Some(&assignment) {
            converged = true;
            break;
        }
        if stalled {
            break;
        }
        prev_labels = Some(assignment);
    }

    let separation = set.separation_check();
    let report = SolveReport {
        iterations: trace.len(),
        objective_trace: trace,
        converged,
        restarts_used,
        separation_ok: separation.ok,
        min_gap: separation.min_gap,
    };
    Ok((set, report))
}

/// Minimize the empirical objective with seeded restarts; returns the
/// restart with the lowest final objective.
pub fn solve(
    data: &Dataset,
    k: usize,
    cfg: &SmootherConfig,
    delta: f64,
    opts: &SolveOptions,
) -> Result<(TrajectorySet, SolveReport)> {
    if k == 0 {
        return Err(Error::Domain("k must be >= 1".into()));
    }
    if data.n() < k {
        return Err(Error::TooFewPoints { n: data.n(), k });
    }
    if opts.restarts == 0 {
        return Err(Error::Domain("restarts must be >= 1".into()));
    }

    let global = match opts.init {
        InitStrategy::PerturbedGlobal => Some(fit_single(&data.all_points(), data.n(), cfg)?),
        InitStrategy::RandomPoints => None,
    };

    let mut best: Option<(TrajectorySet, SolveReport)> = None;
    for r in 0..opts.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        rng.set_stream(r as u64);
        let init = match opts.init {
            InitStrategy::PerturbedGlobal => {
                init_perturbed_global(data, k, global.as_ref().unwrap(), cfg, delta, &mut rng)?
            }
            InitStrategy::RandomPoints => init_random_points(data, k, cfg, delta, &mut rng)?,
        };
        let (set, mut report) = iterate(init, data, cfg, opts.restarts)?;
        if best
            .as_ref()
            .is_none_or(|(_, b)| report.final_objective() < b.final_objective())
        {
            report.restarts_used = opts.restarts;
            best = Some((set, report));
        }
    }
    Ok(best.expect("at least one restart"))
}

fn init_perturbed_global(
    data: &Dataset,
    k: usize,
    global: &GridTrajectory,
    cfg: &SmootherConfig,
    delta: f64,
    rng: &mut ChaCha8Rng,
) -> Result<TrajectorySet> {
    let (n, d) = (data.n(), data.dim());
    let mut residuals = vec![0.0; n * d];
    let mut point = vec![0.0; d];
    for i in 0..n {
        global.eval_into(data.time(i), &mut point)?;
        for dim in 0..d {
            residuals[i * d + dim] = data.target(i)[dim] - point[dim];
        }
    }

    // k-means++-style seeding over the residual vectors
    let mut offsets: Vec<usize> = Vec::with_capacity(k);
    offsets.push(rng.random_range(0..n));
    let sq =
        |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum() };
    let mut dist: Vec<f64> = (0..n)
        .map(|i| {
            sq(
                &residuals[i * d..(i + 1) * d],
                &residuals[offsets[0] * d..(offsets[0] + 1) * d],
            )
        })
        .collect();
    while offsets.len() < k {
        let total: f64 = dist.iter().sum();
        let pick = if total > 0.0 {
            let mut u = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &w) in dist.iter().enumerate() {
                u -= w;
                if u <= 0.0 {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        offsets.push(pick);
        for i in 0..n {
            let s = sq(
                &residuals[i * d..(i + 1) * d],
                &residuals[pick * d..(pick + 1) * d],
            );
            if s < dist[i] {
                dist[i] = s;
            }
        }
    }

    let trajectories = offsets
        .iter()
        .map(|&i| global.shifted(&residuals[i * d..(i + 1) * d]))
        .collect::<Result<Vec<_>>>()?;
    TrajectorySet::new(trajectories, cfg.s, delta)
}

fn init_random_points(
    data: &Dataset,
    k: usize,
    cfg: &SmootherConfig,
    delta: f64,
    rng: &mut ChaCha8Rng,
) -> Result<TrajectorySet> {
    // partial Fisher-Yates for k distinct indices
    let n = data.n();
    let mut indices: Vec<usize> = (0..n).collect();
    for j in 0..k {
        let pick = rng.random_range(j..n);
        indices.swap(j, pick);
    }
    let trajectories = indices[..k]
        .iter()
        .map(|&i| GridTrajectory::constant(data.target(i), cfg.m))
        .collect::<Result<Vec<_>>>()?;
    TrajectorySet::new(trajectories, cfg.s, delta)
}
