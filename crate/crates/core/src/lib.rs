//! Estimation of multiple trajectory centers from unlabeled space-time
//! observations.
//!
//! Observations `(t_i, y_i)` in `[0,1] x R^d` are generated by k moving
//! targets plus noise, with the target responsible for each observation
//! unknown. The estimator couples hard data association (each point belongs
//! to its nearest trajectory) with roughness-penalized smoothing of each
//! trajectory, and is computed by a k-means-style alternation whose inner
//! step is an exactly solvable banded linear system.
//!
//! Crate layout:
//! - [`trajectory`]: grid trajectories, Sobolev norms, separation checks
//! - [`smoother`]: the single-trajectory penalized least-squares engine
//! - [`solver`]: assignment, the alternation, restarts and reporting
//! - [`population`]: the infinite-data objective, its directional derivative
//!   and the scaled empirical-population gap
//! - [`synth`]: ground-truth models and reproducible sampling
//! - [`io`]: CSV formats for datasets and trajectory sets

pub mod banded;
pub mod error;
pub mod io;
pub mod population;
pub mod quadrature;
pub mod smoother;
pub mod solver;
pub mod synth;
pub mod trajectory;

pub use error::{Error, Result};
pub use smoother::{fit_single, polynomial_limit_fit, SmootherConfig, WeightedPoints};
pub use solver::{
    assign, lloyd_from_assignment, lloyd_step, objective_empirical, solve, Assignment, Dataset,
    InitStrategy, SolveOptions, SolveReport,
};
pub use trajectory::{hs_distance, GridTrajectory, SeparationReport, SobolevNorms, TrajectorySet};
