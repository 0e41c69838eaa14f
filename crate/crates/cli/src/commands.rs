//! The five subcommands: data generation, fitting, the convergence-rate
//! study, the derivative check and the empirical-to-population check.

use std::io::Write;
use std::path::{Path, PathBuf};

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use sda_core::io::{load_dataset, save_dataset, save_trajectory_set};
use sda_core::population::{gateaux_derivative, objective_population, QuadratureSpec};
use sda_core::solver::{objective_empirical, solve, SolveReport};
use sda_core::synth::MixtureModel;
use sda_core::trajectory::{hs_distance, GridTrajectory, TrajectorySet};

use crate::config::Config;
use crate::report::{log_log_slope, median, Report};
use crate::CliError;

/// Deterministic stream derivation: one seed per (purpose, cell, replicate).
fn mix_seed(parts: &[u64]) -> u64 {
    let mut h = 0x9E37_79B9_7F4A_7C15u64;
    for &p in parts {
        let mut z = h ^ p.wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        h = z ^ (z >> 31);
    }
    h
}

fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(suffix);
    path.with_file_name(name)
}

fn quadrature(config: &Config, model: &MixtureModel) -> Result<QuadratureSpec, CliError> {
    let section = config.quadrature.as_ref();
    let t_nodes = section.and_then(|q| q.t_nodes).unwrap_or(8);
    let y_nodes = section.and_then(|q| q.y_nodes).unwrap_or(96);
    match section.and_then(|q| q.y_radius) {
        Some(radius) => Ok(QuadratureSpec::new(t_nodes, radius, y_nodes)?),
        None => Ok(QuadratureSpec::for_model(model, t_nodes, y_nodes)?),
    }
}

pub fn generate(config: &Config, out: &Path, seed_override: Option<u64>) -> Result<(), CliError> {
    let section = config
        .generate
        .as_ref()
        .ok_or_else(|| CliError::input("config is missing the [generate] section".into()))?;
    let model = config.build_model()?;
    let seed = seed_override.unwrap_or(section.seed);
    let (data, labels) = model.sample(section.n, seed)?;
    save_dataset(out, &data, section.labels.then_some(&labels))?;

    let mut meta = Report::new();
    meta.push("seed", seed);
    meta.push("n", section.n);
    meta.push("d", model.dim());
    meta.push("k", model.k());
    meta.push("model_hash", config.model_hash()?);
    meta.write_to(&sidecar(out, ".meta"))?;
    println!("wrote {} observations to {}", section.n, out.display());
    Ok(())
}

fn solve_report(report: &SolveReport, n: usize, k: usize, lambda: f64) -> Report {
    let mut out = Report::new();
    out.push("n", n);
    out.push("k", k);
    out.push("lambda", lambda);
    out.push("objective", report.final_objective());
    out.push("iterations", report.iterations);
    out.push("converged", report.converged);
    out.push("restarts", report.restarts_used);
    out.push("separation_ok", report.separation_ok);
    out.push("min_gap", report.min_gap);
    out.push_floats("objective_trace", &report.objective_trace);
    out
}

pub fn fit(
    config: &Config,
    data_path: &Path,
    out: &Path,
    seed_override: Option<u64>,
) -> Result<(), CliError> {
    let (data, _) = load_dataset(data_path)?;
    let cfg = config.smoother_config()?;
    let delta = config.delta()?;
    let opts = config.solve_options(seed_override)?;
    let (set, report) = solve(&data, config.solver.k, &cfg, delta, &opts)?;
    save_trajectory_set(out, &set)?;
    solve_report(&report, data.n(), config.solver.k, cfg.lambda)
        .write_to(&sidecar(out, ".report"))?;
    println!(
        "fitted {} tracks to {} points: objective {:.6e}, {} iterations, min gap {:.4}",
        config.solver.k,
        data.n(),
        report.final_objective(),
        report.iterations,
        report.min_gap
    );
    Ok(())
}

struct RateRow {
    n: usize,
    replicate: usize,
    hs_error: f64,
    objective: f64,
    iterations: usize,
    converged: bool,
    separation_ok: bool,
    min_gap: f64,
}

pub fn rate_study(config: &Config, out: &Path, seed_override: Option<u64>) -> Result<(), CliError> {
    let section = config
        .rate_study
        .as_ref()
        .ok_or_else(|| CliError::input("config is missing the [rate_study] section".into()))?;
    if section.n_grid.is_empty() || section.n_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CliError::input(
            "rate_study.n_grid must be increasing".into(),
        ));
    }
    if section.replicates < 3 {
        return Err(CliError::input("rate_study.replicates must be >= 3".into()));
    }
    let max_n = *section.n_grid.last().unwrap();
    if section.reference_n <= max_n {
        return Err(CliError::input(format!(
            "rate_study.reference_n = {} must exceed max n_grid = {max_n}",
            section.reference_n
        )));
    }
    let model = config.build_model()?;
    let cfg = config.smoother_config()?;
    let delta = config.delta()?;
    let base_seed = seed_override.unwrap_or(section.base_seed);
    let k = config.solver.k;

    // the limit object is unobservable; a large-sample fit stands in for it
    let (ref_data, _) = model.sample(section.reference_n, mix_seed(&[base_seed, 0, 0]))?;
    let mut ref_opts = config.solve_options(None)?;
    ref_opts.seed = mix_seed(&[base_seed, 0, 1]);
    let (reference, ref_report) = solve(&ref_data, k, &cfg, delta, &ref_opts)?;

    let jobs: Vec<(usize, usize)> = section
        .n_grid
        .iter()
        .enumerate()
        .flat_map(|(i, _)| (0..section.replicates).map(move |rep| (i, rep)))
        .collect();
    let rows: Vec<RateRow> = jobs
        .par_iter()
        .map(|&(i, rep)| -> Result<RateRow, CliError> {
            let n = section.n_grid[i];
            let (data, _) = model.sample(n, mix_seed(&[base_seed, 1, i as u64, rep as u64]))?;
            let mut opts = config.solve_options(None)?;
            opts.seed = mix_seed(&[base_seed, 2, i as u64, rep as u64]);
            let (fitted, report) = solve(&data, k, &cfg, delta, &opts)?;
            Ok(RateRow {
                n,
                replicate: rep,
                hs_error: hs_distance(&fitted, &reference)?,
                objective: report.final_objective(),
                iterations: report.iterations,
                converged: report.converged,
                separation_ok: report.separation_ok,
                min_gap: report.min_gap,
            })
        })
        .collect::<Result<_, _>>()?;

    let mut csv =
        String::from("n,replicate,hs_error,objective,iterations,converged,separation_ok,min_gap\n");
    for row in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            row.n,
            row.replicate,
            row.hs_error,
            row.objective,
            row.iterations,
            row.converged,
            row.separation_ok,
            row.min_gap
        ));
    }
    std::fs::File::create(out)
        .and_then(|mut f| f.write_all(csv.as_bytes()))
        .map_err(|e| CliError::input(format!("cannot write {}: {e}", out.display())))?;

    let medians: Vec<f64> = section
        .n_grid
        .iter()
        .enumerate()
        .map(|(i, _)| {
            let errors: Vec<f64> = rows
                .iter()
                .filter(|r| r.n == section.n_grid[i])
                .map(|r| r.hs_error)
                .collect();
            median(&errors)
        })
        .collect();
    let ns: Vec<f64> = section.n_grid.iter().map(|&n| n as f64).collect();
    let (slope, stderr, intercept) = log_log_slope(&ns, &medians);
    let separation_failures = rows.iter().filter(|r| !r.separation_ok).count();

    let mut summary = Report::new();
    summary.push("reference_n", section.reference_n);
    summary.push("reference_objective", ref_report.final_objective());
    summary.push("reference_converged", ref_report.converged);
    summary.push("replicates", section.replicates);
    summary.push_floats("n_grid", &ns);
    summary.push_floats("median_hs_error", &medians);
    summary.push("slope", slope);
    summary.push("slope_stderr", stderr);
    summary.push("intercept", intercept);
    summary.push("separation_failures", separation_failures);
    summary.write_to(&sidecar(out, ".summary"))?;
    println!(
        "rate study: slope {slope:.4} (stderr {stderr:.4}) over {} sample sizes, \
         {separation_failures} separation failures",
        section.n_grid.len()
    );
    Ok(())
}

/// Smooth pseudo-random direction with the same shape as `like`.
fn random_direction(like: &TrajectorySet, rng: &mut ChaCha8Rng) -> TrajectorySet {
    let (m, d, k) = (like.grid_len(), like.dim(), like.k());
    let trajectories = (0..k)
        .map(|_| {
            let a: Vec<f64> = (0..d).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
            let b: Vec<f64> = (0..d).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
            let c: Vec<f64> = (0..d).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
            let freq = 1.0 + rng.random::<f64>() * 2.0;
            GridTrajectory::from_fn(m, d, |t, out| {
                for dim in 0..d {
                    out[dim] = a[dim]
                        + b[dim] * t
                        + c[dim] * (2.0 * std::f64::consts::PI * freq * t).sin();
                }
            })
            .expect("direction construction")
        })
        .collect();
    TrajectorySet::new(trajectories, like.order(), like.delta()).expect("direction shape")
}

pub fn grad_check(config: &Config, out: &Path, seed_override: Option<u64>) -> Result<(), CliError> {
    let section = config
        .grad_check
        .as_ref()
        .ok_or_else(|| CliError::input("config is missing the [grad_check] section".into()))?;
    let model = config.build_model()?;
    let quad = quadrature(config, &model)?;
    let lambda = config.smoother_config()?.lambda;
    let perturbation = section.perturbation.unwrap_or(0.15);
    let at = model.truth().perturbed(perturbation, model.truth())?;
    let seed = seed_override.unwrap_or(section.seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut report = Report::new();
    report.push("directions", section.directions);
    report.push("step", section.step);
    report.push("perturbation", perturbation);
    report.push("lambda", lambda);

    let mut max_rel = 0.0f64;
    let mut rows = Vec::new();
    for idx in 0..section.directions {
        let direction = random_direction(&at, &mut rng);
        let analytic = gateaux_derivative(&at, &direction, &model, &quad, lambda)?;
        let plus = objective_population(
            &at.perturbed(section.step, &direction)?,
            &model,
            &quad,
            lambda,
        )?;
        let minus = objective_population(
            &at.perturbed(-section.step, &direction)?,
            &model,
            &quad,
            lambda,
        )?;
        let numeric = (plus - minus) / (2.0 * section.step);
        let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-12);
        max_rel = max_rel.max(rel);
        rows.push((idx, analytic, numeric, rel));
    }
    report.push("max_rel_error", max_rel);
    for (idx, analytic, numeric, rel) in rows {
        report.push(&format!("analytic_{idx}"), analytic);
        report.push(&format!("numeric_{idx}"), numeric);
        report.push(&format!("rel_error_{idx}"), rel);
    }
    report.write_to(out)?;
    println!(
        "gradient check: max relative error {max_rel:.3e} over {} directions",
        section.directions
    );
    Ok(())
}

pub fn gamma_check(
    config: &Config,
    out: &Path,
    seed_override: Option<u64>,
) -> Result<(), CliError> {
    let section = config
        .gamma_check
        .as_ref()
        .ok_or_else(|| CliError::input("config is missing the [gamma_check] section".into()))?;
    if section.n_grid.len() < 3 {
        return Err(CliError::input(
            "gamma_check.n_grid needs at least 3 sizes".into(),
        ));
    }
    let model = config.build_model()?;
    let quad = quadrature(config, &model)?;
    let lambda = config.smoother_config()?.lambda;
    let base_seed = seed_override.unwrap_or(section.base_seed);
    let at = model.truth();
    let f_infinity = objective_population(at, &model, &quad, lambda)?;

    let jobs: Vec<(usize, usize)> = section
        .n_grid
        .iter()
        .enumerate()
        .flat_map(|(i, _)| (0..section.replicates).map(move |rep| (i, rep)))
        .collect();
    let gaps: Vec<(usize, usize, f64)> = jobs
        .par_iter()
        .map(|&(i, rep)| -> Result<(usize, usize, f64), CliError> {
            let n = section.n_grid[i];
            let (data, _) = model.sample(n, mix_seed(&[base_seed, 3, i as u64, rep as u64]))?;
            let f_n = objective_empirical(at, &data, lambda)?;
            Ok((n, rep, (f_n - f_infinity).abs()))
        })
        .collect::<Result<_, _>>()?;

    let mut csv = String::from("n,replicate,abs_gap\n");
    for (n, rep, gap) in &gaps {
        csv.push_str(&format!("{n},{rep},{gap}\n"));
    }
    std::fs::File::create(out)
        .and_then(|mut f| f.write_all(csv.as_bytes()))
        .map_err(|e| CliError::input(format!("cannot write {}: {e}", out.display())))?;

    let rms: Vec<f64> = section
        .n_grid
        .iter()
        .map(|&n| {
            let sq: Vec<f64> = gaps
                .iter()
                .filter(|(gn, _, _)| *gn == n)
                .map(|(_, _, g)| g * g)
                .collect();
            (sq.iter().sum::<f64>() / sq.len() as f64).sqrt()
        })
        .collect();
    let ns: Vec<f64> = section.n_grid.iter().map(|&n| n as f64).collect();
    let (slope, stderr, _) = log_log_slope(&ns, &rms);

    let mut summary = Report::new();
    summary.push("f_infinity", f_infinity);
    summary.push("replicates", section.replicates);
    summary.push_floats("n_grid", &ns);
    summary.push_floats("rms_gap", &rms);
    summary.push("slope", slope);
    summary.push("slope_stderr", stderr);
    summary.write_to(&sidecar(out, ".summary"))?;
    println!("objective-gap study: slope {slope:.4} (stderr {stderr:.4})");
    Ok(())
}
