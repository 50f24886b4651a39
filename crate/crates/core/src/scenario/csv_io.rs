//! Trajectory CSV: `t,x_0,…,x_{n-1},psi,Psi,H`, one row per sample.

use std::path::Path;

use super::ScenarioError;
use crate::analysis::{metrics, StateSeries};

/// Renders a real with 17 significant digits, enough to reload the exact
/// `f64`.
pub fn format_real(v: f64) -> String {
    format!("{v:.16e}")
}

fn io_err(path: &Path, source: std::io::Error) -> ScenarioError {
    ScenarioError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Indices written for a given stride: every `stride`-th sample plus the
/// last one.
pub fn strided_indices(len: usize, stride: u64) -> Vec<usize> {
    let stride = stride.max(1) as usize;
    let mut idx: Vec<usize> = (0..len).step_by(stride).collect();
    if len > 0 && idx.last() != Some(&(len - 1)) {
        idx.push(len - 1);
    }
    idx
}

/// Writes the CSV and returns the number of data rows.
pub fn emit_trajectory_csv<S: StateSeries + ?Sized>(
    series: &S,
    path: impl AsRef<Path>,
    stride: u64,
) -> Result<usize, ScenarioError> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
    let n = if series.is_empty() { 0 } else { series.values(0).len() };
    let mut header = vec!["t".to_string()];
    header.extend((0..n).map(|i| format!("x_{i}")));
    header.extend(["psi", "Psi", "H"].map(String::from));
    w.write_record(&header)?;
    let rows = strided_indices(series.len(), stride);
    for &k in &rows {
        let x = series.values(k);
        let m = metrics(x)?;
        let mut rec = Vec::with_capacity(n + 4);
        rec.push(format_real(series.time(k)));
        rec.extend(x.iter().map(|&v| format_real(v)));
        rec.extend([m.min, m.max, m.spread].map(format_real));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| io_err(path, e))?;
    Ok(rows.len())
}

/// A reloaded trajectory CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTrajectory {
    pub samples: Vec<(f64, Vec<f64>)>,
    /// `(psi, Psi, H)` columns as written.
    pub metrics: Vec<(f64, f64, f64)>,
}

impl StateSeries for CsvTrajectory {
    fn len(&self) -> usize {
        self.samples.len()
    }

    fn time(&self, k: usize) -> f64 {
        self.samples[k].0
    }

    fn values(&self, k: usize) -> &[f64] {
        &self.samples[k].1
    }
}

pub fn read_trajectory_csv(path: impl AsRef<Path>) -> Result<CsvTrajectory, ScenarioError> {
    let path = path.as_ref();
    let mut r = csv::Reader::from_path(path)?;
    let header = r.headers()?.clone();
    let width = header.len();
    if width < 5 || &header[0] != "t" || &header[width - 3] != "psi" {
        return Err(ScenarioError::MalformedCsv("unexpected header".into()));
    }
    let n = width - 4;
    let mut out = CsvTrajectory {
        samples: Vec::new(),
        metrics: Vec::new(),
    };
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let vals: Vec<f64> = rec
            .iter()
            .map(|f| f.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| ScenarioError::MalformedCsv(format!("row {}: {e}", line + 1)))?;
        out.samples.push((vals[0], vals[1..=n].to_vec()));
        out.metrics.push((vals[n + 1], vals[n + 2], vals[n + 3]));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{BeliefVector, Trajectory};

    #[test]
    fn single_sample_gives_two_lines() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let traj = Trajectory {
            t0: 0,
            states: vec![BeliefVector::new(0, vec![0.1, 0.7])],
        };
        assert_eq!(emit_trajectory_csv(&traj, &path, 1).unwrap(), 1);
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert_eq!(text.lines().next().unwrap(), "t,x_0,x_1,psi,Psi,H");
    }

    #[test]
    fn reload_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let traj = Trajectory {
            t0: 3,
            states: (0..7)
                .map(|k| BeliefVector::new(3 + k, vec![0.1 / (k + 1) as f64, 2.0f64.sqrt(), -1e-300]))
                .collect(),
        };
        emit_trajectory_csv(&traj, &path, 2).unwrap();
        let back = read_trajectory_csv(&path).unwrap();
        let idx = strided_indices(7, 2);
        assert_eq!(idx, vec![0, 2, 4, 6]);
        for (row, &k) in idx.iter().enumerate() {
            assert_eq!(back.samples[row].1, traj.states[k].values);
            let m = traj.metrics_at(k);
            assert_eq!(back.metrics[row], (m.min, m.max, m.spread));
            assert_eq!(back.metrics[row].2, back.metrics[row].1 - back.metrics[row].0);
        }
    }

    #[test]
    fn last_sample_is_always_written() {
        assert_eq!(strided_indices(5, 3), vec![0, 3, 4]);
        assert_eq!(strided_indices(1, 10), vec![0]);
        assert!(strided_indices(0, 2).is_empty());
    }
}
