//! CSV formats.
//!
//! Dataset files carry `t,y1..yd[,label]` with one observation per row; the
//! optional label column holds the generating component for diagnostics.
//! Trajectory files carry `t,track,y1..yd` with one row per (grid node,
//! track) pair, node-major. All floats use the shortest round-trip decimal
//! form, so write-read cycles are lossless and outputs are byte-stable.

use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::solver::{Assignment, Dataset};
use crate::trajectory::{GridTrajectory, TrajectorySet};

fn parse_field<T: std::str::FromStr>(field: &str, line: usize, what: &str) -> Result<T> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("line {line}: cannot parse {what} from {field:?}")))
}

/// Write a dataset, appending the label column when labels are given.
pub fn write_dataset(mut w: impl Write, data: &Dataset, labels: Option<&Assignment>) -> Result<()> {
    if let Some(a) = labels {
        if a.labels.len() != data.n() {
            return Err(Error::Shape("label count must equal n".into()));
        }
    }
    write!(w, "t")?;
    for dim in 1..=data.dim() {
        write!(w, ",y{dim}")?;
    }
    if labels.is_some() {
        write!(w, ",label")?;
    }
    writeln!(w)?;
    for i in 0..data.n() {
        write!(w, "{}", data.time(i))?;
        for v in data.target(i) {
            write!(w, ",{v}")?;
        }
        if let Some(a) = labels {
            write!(w, ",{}", a.labels[i])?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Read a dataset written by [`write_dataset`]; returns the labels when the
/// file carries them.
pub fn read_dataset(r: impl BufRead) -> Result<(Dataset, Option<Assignment>)> {
    let mut lines = r.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty file".into()))??;
    let cols: Vec<&str> = header.trim().split(',').collect();
    if cols.first() != Some(&"t") {
        return Err(Error::Parse(format!(
            "expected header starting with 't', got {header:?}"
        )));
    }
    let has_label = cols.last() == Some(&"label");
    let d = cols.len() - 1 - usize::from(has_label);
    if d == 0 {
        return Err(Error::Parse("header has no y columns".into()));
    }
    for (dim, col) in cols[1..1 + d].iter().enumerate() {
        if *col != format!("y{}", dim + 1) {
            return Err(Error::Parse(format!(
                "expected column y{}, got {col:?}",
                dim + 1
            )));
        }
    }

    let mut times = Vec::new();
    let mut targets = Vec::new();
    let mut labels = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line = line?;
        let lineno = idx + 2;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != cols.len() {
            return Err(Error::Parse(format!(
                "line {lineno}: expected {} fields, got {}",
                cols.len(),
                fields.len()
            )));
        }
        times.push(parse_field(fields[0], lineno, "time")?);
        for field in &fields[1..1 + d] {
            targets.push(parse_field(field, lineno, "target")?);
        }
        if has_label {
            labels.push(parse_field(fields[d + 1], lineno, "label")?);
        }
    }
    let data = Dataset::new(times, targets, d)?;
    let labels = has_label.then_some(Assignment { labels });
    Ok((data, labels))
}

/// Write a trajectory set, one row per (grid node, track), node-major.
pub fn write_trajectory_set(mut w: impl Write, set: &TrajectorySet) -> Result<()> {
    write!(w, "t,track")?;
    for dim in 1..=set.dim() {
        write!(w, ",y{dim}")?;
    }
    writeln!(w)?;
    for g in 0..set.grid_len() {
        for (j, tr) in set.trajectories().iter().enumerate() {
            write!(w, "{},{j}", tr.node_time(g))?;
            for v in tr.node(g) {
                write!(w, ",{v}")?;
            }
            writeln!(w)?;
        }
    }
    Ok(())
}

/// Read a trajectory set written by [`write_trajectory_set`]. The penalty
/// order and the separation parameter are not part of the file format and
/// must be supplied.
pub fn read_trajectory_set(r: impl BufRead, s: usize, delta: f64) -> Result<TrajectorySet> {
    let mut lines = r.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty file".into()))??;
    let cols: Vec<&str> = header.trim().split(',').collect();
    if cols.len() < 3 || cols[0] != "t" || cols[1] != "track" {
        return Err(Error::Parse(format!(
            "expected header 't,track,y1..', got {header:?}"
        )));
    }
    let d = cols.len() - 2;

    // rows[track] collects that track's values in node order
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line = line?;
        let lineno = idx + 2;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != cols.len() {
            return Err(Error::Parse(format!(
                "line {lineno}: expected {} fields, got {}",
                cols.len(),
                fields.len()
            )));
        }
        let track: usize = parse_field(fields[1], lineno, "track")?;
        if track >= rows.len() {
            if track != rows.len() {
                return Err(Error::Parse(format!(
                    "line {lineno}: track ids must appear as 0,1,2,.., got {track}"
                )));
            }
            rows.push(Vec::new());
        }
        for field in &fields[2..] {
            rows[track].push(parse_field(field, lineno, "value")?);
        }
    }
    if rows.is_empty() {
        return Err(Error::Parse("no trajectory rows".into()));
    }
    let m = rows[0].len() / d;
    let trajectories = rows
        .into_iter()
        .map(|values| GridTrajectory::new(values, m, d))
        .collect::<Result<Vec<_>>>()?;
    TrajectorySet::new(trajectories, s, delta)
}

/// Convenience wrapper writing a dataset to a path.
pub fn save_dataset(
    path: impl AsRef<Path>,
    data: &Dataset,
    labels: Option<&Assignment>,
) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_dataset(std::io::BufWriter::new(file), data, labels)
}

/// Convenience wrapper reading a dataset from a path.
pub fn load_dataset(path: impl AsRef<Path>) -> Result<(Dataset, Option<Assignment>)> {
    let file = std::fs::File::open(path)?;
    read_dataset(std::io::BufReader::new(file))
}

/// Convenience wrapper writing a trajectory set to a path.
pub fn save_trajectory_set(path: impl AsRef<Path>, set: &TrajectorySet) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_trajectory_set(std::io::BufWriter::new(file), set)
}

/// Convenience wrapper reading a trajectory set from a path.
pub fn load_trajectory_set(path: impl AsRef<Path>, s: usize, delta: f64) -> Result<TrajectorySet> {
    let file = std::fs::File::open(path)?;
    read_trajectory_set(std::io::BufReader::new(file), s, delta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dataset_round_trips_with_labels() {
        let data = Dataset::new(
            vec![0.0, 0.25, 1.0],
            vec![1.5, -0.125, 3.0, 0.1, 7.25e-3, -9.0],
            2,
        )
        .unwrap();
        let labels = Assignment {
            labels: vec![0, 1, 0],
        };
        let mut buf = Vec::new();
        write_dataset(&mut buf, &data, Some(&labels)).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t,y1,y2,label\n"));
        let (back, back_labels) = read_dataset(buf.as_slice()).unwrap();
        assert_eq!(back, data);
        assert_eq!(back_labels.unwrap(), labels);
    }

    #[test]
    fn dataset_round_trips_without_labels() {
        let data = Dataset::new(vec![0.5], vec![0.1234567890123456], 1).unwrap();
        let mut buf = Vec::new();
        write_dataset(&mut buf, &data, None).unwrap();
        let (back, labels) = read_dataset(buf.as_slice()).unwrap();
        assert_eq!(back, data);
        assert!(labels.is_none());
    }

    #[test]
    fn malformed_headers_are_rejected() {
        assert!(matches!(
            read_dataset("time,y1\n0.5,1.0\n".as_bytes()),
            Err(Error::Parse(_))
        ));
        assert!(matches!(
            read_dataset("t,z1\n0.5,1.0\n".as_bytes()),
            Err(Error::Parse(_))
        ));
        assert!(matches!(read_dataset("".as_bytes()), Err(Error::Parse(_))));
    }

    #[test]
    fn ragged_rows_report_the_line() {
        let err = read_dataset("t,y1\n0.5,1.0\n0.25\n".as_bytes()).unwrap_err();
        match err {
            Error::Parse(msg) => assert!(msg.contains("line 3"), "message was {msg}"),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn trajectory_set_round_trips() {
        let set = TrajectorySet::new(
            vec![
                GridTrajectory::from_fn(5, 2, |t, out| {
                    out[0] = t;
                    out[1] = -t * t;
                })
                .unwrap(),
                GridTrajectory::from_fn(5, 2, |t, out| {
                    out[0] = 3.0 + t;
                    out[1] = 4.5;
                })
                .unwrap(),
            ],
            2,
            0.75,
        )
        .unwrap();
        let mut buf = Vec::new();
        write_trajectory_set(&mut buf, &set).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t,track,y1,y2\n"));
        let back = read_trajectory_set(buf.as_slice(), 2, 0.75).unwrap();
        assert_eq!(back, set);
    }
}
