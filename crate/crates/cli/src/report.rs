//! Key-value report files and the small statistics the harness needs.

use std::io::Write;
use std::path::Path;

use crate::CliError;

/// Ordered `key=value` lines; values use the shortest round-trip float form
/// so repeated runs are byte-identical.
#[derive(Debug, Default)]
pub struct Report {
    lines: Vec<(String, String)>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, key: &str, value: impl std::fmt::Display) {
        self.lines.push((key.to_string(), value.to_string()));
    }

    pub fn push_floats(&mut self, key: &str, values: &[f64]) {
        let joined = values
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(",");
        self.lines.push((key.to_string(), joined));
    }

    pub fn write_to(&self, path: &Path) -> Result<(), CliError> {
        let mut out = String::new();
        for (k, v) in &self.lines {
            out.push_str(k);
            out.push('=');
            out.push_str(v);
            out.push('\n');
        }
        let mut file = std::fs::File::create(path)
            .map_err(|e| CliError::input(format!("cannot create {}: {e}", path.display())))?;
        file.write_all(out.as_bytes())
            .map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display())))?;
        Ok(())
    }
}

/// Median of an unsorted slice.
pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty());
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mid = sorted.len() / 2;
    if sorted.len() % 2 == 0 {
        0.5 * (sorted[mid - 1] + sorted[mid])
    } else {
        sorted[mid]
    }
}

/// Ordinary least squares of `ln y` on `ln x`: returns (slope, stderr of the
/// slope, intercept).
pub fn log_log_slope(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    assert_eq!(x.len(), y.len());
    assert!(x.len() >= 3, "need at least three points for a slope error");
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(a, b)| {
            let r = b - (intercept + slope * a);
            r * r
        })
        .sum();
    let stderr = (rss / (n - 2.0) / sxx).sqrt();
    (slope, stderr, intercept)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn median_of_even_and_odd_lengths() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert_eq!(median(&[7.0]), 7.0);
    }

    #[test]
    fn slope_recovers_exact_power_law() {
        let x: Vec<f64> = (1..=6).map(|i| 10f64.powi(i)).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v.powf(-0.5)).collect();
        let (slope, stderr, intercept) = log_log_slope(&x, &y);
        assert_relative_eq!(slope, -0.5, max_relative = 1e-12);
        assert_abs_diff_eq!(stderr, 0.0, epsilon = 1e-10);
        assert_relative_eq!(intercept, 3.0f64.ln(), max_relative = 1e-10);
    }

    #[test]
    fn report_lines_are_ordered() {
        let mut report = Report::new();
        report.push("b", 2);
        report.push("a", 1.5);
        report.push_floats("trace", &[1.0, 0.5]);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.txt");
        report.write_to(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, "b=2\na=1.5\ntrace=1,0.5\n");
    }
}
