//! Ground-truth mixture models and reproducible sampling.
//!
//! A model is k true trajectories with selection weights, an observation-time
//! density on [0,1] and a centered noise density on R^d. Sampling draws, per
//! observation, a component, a time and a noise vector, and also returns the
//! generating labels for diagnostics; the solver never sees them.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{Beta, Continuous, ContinuousCDF, Normal, StudentsT};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::solver::{Assignment, Dataset};
use crate::trajectory::{GridTrajectory, TrajectorySet};

/// Analytic trajectory formulas used to build ground truth. Coefficients are
/// per coordinate, so one primitive describes a curve in R^d.
#[derive(Debug, Clone, PartialEq)]
pub enum Primitive {
    Constant {
        value: Vec<f64>,
    },
    Affine {
        intercept: Vec<f64>,
        slope: Vec<f64>,
    },
    /// `offset + amplitude * sin(2 pi frequency t + phase)` per coordinate.
    Sinusoid {
        offset: Vec<f64>,
        amplitude: Vec<f64>,
        frequency: f64,
        phase: f64,
    },
    /// `c0 + c1 t + c2 t^2 + c3 t^3` per coordinate.
    Cubic {
        c0: Vec<f64>,
        c1: Vec<f64>,
        c2: Vec<f64>,
        c3: Vec<f64>,
    },
}

impl Primitive {
    pub fn dim(&self) -> Result<usize> {
        let dims: Vec<usize> = match self {
            Primitive::Constant { value } => vec![value.len()],
            Primitive::Affine { intercept, slope } => vec![intercept.len(), slope.len()],
            Primitive::Sinusoid {
                offset, amplitude, ..
            } => vec![offset.len(), amplitude.len()],
            Primitive::Cubic { c0, c1, c2, c3 } => vec![c0.len(), c1.len(), c2.len(), c3.len()],
        };
        let d = dims[0];
        if d == 0 || dims.iter().any(|&x| x != d) {
            return Err(Error::Shape(
                "primitive coefficient lengths disagree".into(),
            ));
        }
        Ok(d)
    }

    pub fn eval(&self, t: f64, out: &mut [f64]) {
        match self {
            Primitive::Constant { value } => out.copy_from_slice(value),
            Primitive::Affine { intercept, slope } => {
                for i in 0..out.len() {
                    out[i] = intercept[i] + slope[i] * t;
                }
            }
            Primitive::Sinusoid {
                offset,
                amplitude,
                frequency,
                phase,
            } => {
                let s = (2.0 * std::f64::consts::PI * frequency * t + phase).sin();
                for i in 0..out.len() {
                    out[i] = offset[i] + amplitude[i] * s;
                }
            }
            Primitive::Cubic { c0, c1, c2, c3 } => {
                for i in 0..out.len() {
                    out[i] = c0[i] + t * (c1[i] + t * (c2[i] + t * c3[i]));
                }
            }
        }
    }

    /// Sample the formula onto the grid.
    pub fn to_grid(&self, m: usize) -> Result<GridTrajectory> {
        let d = self.dim()?;
        GridTrajectory::from_fn(m, d, |t, out| self.eval(t, out))
    }
}

/// Noise family for the observation error; coordinates are i.i.d.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseSpec {
    Gaussian { sigma: f64 },
    StudentT { dof: f64, scale: f64 },
}

impl NoiseSpec {
    /// Check the assumptions: strictly positive density, centered, and a
    /// polynomial tail fast enough for the population integrals, which for
    /// the t family means `dof > d + 3`.
    pub fn validate(&self, d: usize) -> Result<()> {
        match *self {
            NoiseSpec::Gaussian { sigma } => {
                if !(sigma > 0.0) {
                    return Err(Error::AssumptionViolated(format!(
                        "gaussian noise needs sigma > 0, got {sigma}"
                    )));
                }
            }
            NoiseSpec::StudentT { dof, scale } => {
                if !(scale > 0.0) {
                    return Err(Error::AssumptionViolated(format!(
                        "t noise needs scale > 0, got {scale}"
                    )));
                }
                if !(dof > (d + 3) as f64) {
                    return Err(Error::AssumptionViolated(format!(
                        "t noise needs dof > d + 3 = {}, got {dof}",
                        d + 3
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn is_degenerate(&self) -> bool {
        matches!(*self, NoiseSpec::Gaussian { sigma } if sigma == 0.0)
    }

    /// Nominal scale, used for sanity bounds in tests and default radii.
    pub fn std_dev(&self) -> f64 {
        match *self {
            NoiseSpec::Gaussian { sigma } => sigma,
            NoiseSpec::StudentT { dof, scale } => scale * (dof / (dof - 2.0)).sqrt(),
        }
    }

    /// One-dimensional upper tail mass `P(X > x)` for x >= 0.
    pub fn upper_tail(&self, x: f64) -> Result<f64> {
        match *self {
            NoiseSpec::Gaussian { sigma } => {
                let dist = Normal::new(0.0, sigma)
                    .map_err(|e| Error::AssumptionViolated(e.to_string()))?;
                Ok(1.0 - dist.cdf(x))
            }
            NoiseSpec::StudentT { dof, scale } => {
                let dist = StudentsT::new(0.0, scale, dof)
                    .map_err(|e| Error::AssumptionViolated(e.to_string()))?;
                Ok(1.0 - dist.cdf(x))
            }
        }
    }

    /// Point q with upper tail mass `tail`: `P(X > q) = tail`.
    pub fn upper_quantile(&self, tail: f64) -> Result<f64> {
        match *self {
            NoiseSpec::Gaussian { sigma } => {
                let dist = Normal::new(0.0, sigma)
                    .map_err(|e| Error::AssumptionViolated(e.to_string()))?;
                Ok(dist.inverse_cdf(1.0 - tail))
            }
            NoiseSpec::StudentT { dof, scale } => {
                let dist = StudentsT::new(0.0, scale, dof)
                    .map_err(|e| Error::AssumptionViolated(e.to_string()))?;
                Ok(dist.inverse_cdf(1.0 - tail))
            }
        }
    }

    /// Precompute the density constants for fast pointwise evaluation.
    pub fn pdf(&self) -> Result<NoisePdf> {
        match *self {
            NoiseSpec::Gaussian { sigma } => {
                if sigma <= 0.0 {
                    return Err(Error::Quadrature("degenerate noise has no density".into()));
                }
                Ok(NoisePdf::Gaussian {
                    norm: 1.0 / (sigma * (2.0 * std::f64::consts::PI).sqrt()),
                    inv_two_var: 1.0 / (2.0 * sigma * sigma),
                })
            }
            NoiseSpec::StudentT { dof, scale } => {
                let norm = gamma((dof + 1.0) / 2.0)
                    / (gamma(dof / 2.0) * (dof * std::f64::consts::PI).sqrt() * scale);
                Ok(NoisePdf::StudentT {
                    norm,
                    dof,
                    inv_scale: 1.0 / scale,
                })
            }
        }
    }

    fn add_sample(&self, rng: &mut ChaCha8Rng, out: &mut [f64]) {
        match *self {
            NoiseSpec::Gaussian { sigma } => {
                if sigma == 0.0 {
                    return;
                }
                let dist = Normal::new(0.0, sigma).expect("validated sigma");
                for v in out.iter_mut() {
                    *v += rng.sample(dist);
                }
            }
            NoiseSpec::StudentT { dof, scale } => {
                let dist = StudentsT::new(0.0, scale, dof).expect("validated dof/scale");
                for v in out.iter_mut() {
                    *v += rng.sample(dist);
                }
            }
        }
    }
}

/// Cached density constants; coordinates multiply.
#[derive(Debug, Clone, Copy)]
pub enum NoisePdf {
    Gaussian { norm: f64, inv_two_var: f64 },
    StudentT { norm: f64, dof: f64, inv_scale: f64 },
}

impl NoisePdf {
    #[inline]
    pub fn density_1d(&self, x: f64) -> f64 {
        match *self {
            NoisePdf::Gaussian { norm, inv_two_var } => norm * (-x * x * inv_two_var).exp(),
            NoisePdf::StudentT {
                norm,
                dof,
                inv_scale,
            } => {
                let z = x * inv_scale;
                norm * (1.0 + z * z / dof).powf(-(dof + 1.0) / 2.0)
            }
        }
    }

    /// Product density of a centered vector.
    #[inline]
    pub fn density(&self, eps: &[f64]) -> f64 {
        eps.iter().map(|&x| self.density_1d(x)).product()
    }
}

/// Observation-time density on [0,1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeSpec {
    Uniform,
    Beta { a: f64, b: f64 },
}

impl TimeSpec {
    /// The density must be continuous on the closed interval, which for the
    /// Beta family rules out shapes below 1.
    pub fn validate(&self) -> Result<()> {
        if let TimeSpec::Beta { a, b } = *self {
            if !(a >= 1.0 && b >= 1.0) {
                return Err(Error::AssumptionViolated(format!(
                    "beta time density needs a, b >= 1 for continuity on [0,1], got ({a}, {b})"
                )));
            }
        }
        Ok(())
    }

    pub fn density(&self, t: f64) -> f64 {
        match *self {
            TimeSpec::Uniform => 1.0,
            TimeSpec::Beta { a, b } => Beta::new(a, b).expect("validated shapes").pdf(t),
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match *self {
            TimeSpec::Uniform => rng.random(),
            TimeSpec::Beta { a, b } => rng.sample(Beta::new(a, b).expect("validated shapes")),
        }
    }
}

/// The generating process: truth trajectories, selection weights, time and
/// noise densities.
#[derive(Debug, Clone)]
pub struct MixtureModel {
    truth: TrajectorySet,
    weights: Vec<f64>,
    noise: NoiseSpec,
    time: TimeSpec,
}

impl MixtureModel {
    /// Build and validate a model from analytic primitives sampled to the
    /// grid. Rejects invalid weights, assumption-violating densities and
    /// truth tuples closer than `delta`.
    pub fn from_primitives(
        primitives: &[Primitive],
        weights: Vec<f64>,
        noise: NoiseSpec,
        time: TimeSpec,
        delta: f64,
        m: usize,
        s: usize,
    ) -> Result<Self> {
        if primitives.is_empty() {
            return Err(Error::Shape("need at least one primitive".into()));
        }
        let trajectories = primitives
            .iter()
            .map(|p| p.to_grid(m))
            .collect::<Result<Vec<_>>>()?;
        let truth = TrajectorySet::new(trajectories, s, delta)?;
        Self::validated(truth, weights, noise, time)
    }

    fn validated(
        truth: TrajectorySet,
        weights: Vec<f64>,
        noise: NoiseSpec,
        time: TimeSpec,
    ) -> Result<Self> {
        let k = truth.k();
        if weights.len() != k {
            return Err(Error::InvalidWeights(format!(
                "got {} weights for {k} trajectories",
                weights.len()
            )));
        }
        if weights.iter().any(|&p| !(p > 0.0)) {
            return Err(Error::InvalidWeights(
                "weights must be strictly positive".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidWeights(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        noise.validate(truth.dim())?;
        time.validate()?;
        let sep = truth.separation_check();
        if !sep.ok {
            return Err(Error::SeparationViolated {
                min_gap: sep.min_gap,
                delta: truth.delta(),
            });
        }
        Ok(Self {
            truth,
            weights,
            noise,
            time,
        })
    }

    /// Skip the assumption checks. Exists for degenerate test scenarios,
    /// zero noise in particular; the shape checks still apply.
    pub fn unchecked(
        truth: TrajectorySet,
        weights: Vec<f64>,
        noise: NoiseSpec,
        time: TimeSpec,
    ) -> Result<Self> {
        if weights.len() != truth.k() {
            return Err(Error::InvalidWeights("one weight per trajectory".into()));
        }
        Ok(Self {
            truth,
            weights,
            noise,
            time,
        })
    }

    pub fn truth(&self) -> &TrajectorySet {
        &self.truth
    }

    pub fn k(&self) -> usize {
        self.truth.k()
    }

    pub fn dim(&self) -> usize {
        self.truth.dim()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn noise(&self) -> &NoiseSpec {
        &self.noise
    }

    pub fn time(&self) -> &TimeSpec {
        &self.time
    }

    /// Largest absolute coordinate the truth attains on the grid.
    pub fn max_abs_coordinate(&self) -> f64 {
        self.truth
            .trajectories()
            .iter()
            .flat_map(|tr| tr.values().iter())
            .fold(0.0, |acc: f64, &v| acc.max(v.abs()))
    }

    /// Draw observation `index` of the stream started by `seed`, writing the
    /// target into `y`. Each observation owns one counter stream, so draws
    /// are independent of evaluation order and batch size.
    pub fn sample_observation(&self, seed: u64, index: u64, y: &mut [f64]) -> Result<(f64, usize)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        let label = self.pick_component(rng.random());
        let t = self.time.sample(&mut rng);
        self.truth.trajectory(label).eval_into(t, y)?;
        self.noise.add_sample(&mut rng, y);
        Ok((t, label))
    }

    /// Draw n i.i.d. observations plus their generating labels.
    pub fn sample(&self, n: usize, seed: u64) -> Result<(Dataset, Assignment)> {
        if n == 0 {
            return Err(Error::Domain("need n >= 1 samples".into()));
        }
        let d = self.dim();
        let mut times = Vec::with_capacity(n);
        let mut targets = vec![0.0; n * d];
        let mut labels = Vec::with_capacity(n);
        for i in 0..n {
            let (t, label) =
                self.sample_observation(seed, i as u64, &mut targets[i * d..(i + 1) * d])?;
            times.push(t);
            labels.push(label);
        }
        Ok((Dataset::new(times, targets, d)?, Assignment { labels }))
    }

    fn pick_component(&self, u: f64) -> usize {
        let mut cum = 0.0;
        for (j, &p) in self.weights.iter().enumerate() {
            cum += p;
            if u < cum {
                return j;
            }
        }
        self.weights.len() - 1
    }
}
