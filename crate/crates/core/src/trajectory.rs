//! Sampled point trajectories and their CSV form.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::spatial::Vec3;

/// Positions of named points sampled at common times, metres.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub time: Vec<f64>,
    pub names: Vec<String>,
    /// `points[k][s]` is point `k` at sample `s`.
    pub points: Vec<Vec<[f64; 3]>>,
}

impl Trajectory {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Self {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        let points = vec![Vec::new(); names.len()];
        Self {
            time: Vec::new(),
            names,
            points,
        }
    }

    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }

    pub fn push(&mut self, t: f64, positions: &[Vec3]) {
        assert_eq!(positions.len(), self.names.len(), "one position per tracked point");
        self.time.push(t);
        for (series, p) in self.points.iter_mut().zip(positions) {
            series.push([p.x, p.y, p.z]);
        }
    }

    pub fn series(&self, name: &str) -> Option<&[[f64; 3]]> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|k| self.points[k].as_slice())
    }

    /// One coordinate (0 = X, 1 = Y, 2 = Z) of a named point.
    pub fn component(&self, name: &str, axis: usize) -> Option<Vec<f64>> {
        self.series(name).map(|s| s.iter().map(|p| p[axis]).collect())
    }

    /// Samples with `t >= t0`.
    pub fn tail_from(&self, t0: f64) -> Trajectory {
        let start = self.time.partition_point(|&t| t < t0);
        Trajectory {
            time: self.time[start..].to_vec(),
            names: self.names.clone(),
            points: self.points.iter().map(|s| s[start..].to_vec()).collect(),
        }
    }

    pub fn sample_interval(&self) -> Option<f64> {
        (self.time.len() >= 2).then(|| self.time[1] - self.time[0])
    }

    /// CSV with `# key: value` metadata lines, then a header and one row per sample.
    /// Extra columns must have one value per sample.
    pub fn to_csv(&self, metadata: &[(String, String)], extra: &[(&str, &[f64])]) -> String {
        let mut out = String::new();
        for (k, v) in metadata {
            let _ = writeln!(out, "# {k}: {v}");
        }
        out.push_str("t_s");
        for n in &self.names {
            for c in ["x", "y", "z"] {
                let _ = write!(out, ",{n}_{c}_m");
            }
        }
        for (name, col) in extra {
            assert_eq!(col.len(), self.len(), "extra column {name} has the wrong length");
            let _ = write!(out, ",{name}");
        }
        out.push('\n');
        for s in 0..self.len() {
            let _ = write!(out, "{}", self.time[s]);
            for series in &self.points {
                let p = series[s];
                let _ = write!(out, ",{},{},{}", p[0], p[1], p[2]);
            }
            for (_, col) in extra {
                let _ = write!(out, ",{}", col[s]);
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: &Path, metadata: &[(String, String)], extra: &[(&str, &[f64])]) -> Result<()> {
        write_text(path, &self.to_csv(metadata, extra))
    }

    /// Parse CSV written by [`Trajectory::to_csv`]; extra columns are ignored.
    pub fn from_csv(text: &str) -> Result<Trajectory> {
        let table = CsvTable::parse(text)?;
        let mut names = Vec::new();
        for h in &table.header[1..] {
            if let Some(base) = h.strip_suffix("_x_m") {
                names.push(base.to_string());
            }
        }
        let mut traj = Trajectory::new(names.clone());
        let cols: Vec<[usize; 3]> = names
            .iter()
            .map(|n| {
                let find = |c: &str| table.column_index(&format!("{n}_{c}_m"));
                Ok([find("x")?, find("y")?, find("z")?])
            })
            .collect::<Result<_>>()?;
        for row in &table.rows {
            let p: Vec<Vec3> = cols.iter().map(|c| Vec3::new(row[c[0]], row[c[1]], row[c[2]])).collect();
            traj.push(row[0], &p);
        }
        Ok(traj)
    }
}

/// A numeric CSV table with optional `#` metadata lines.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CsvTable {
    pub metadata: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn parse(text: &str) -> Result<CsvTable> {
        let mut table = CsvTable::default();
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        for (lineno, line) in lines.by_ref() {
            if let Some(meta) = line.strip_prefix('#') {
                if let Some((k, v)) = meta.split_once(':') {
                    table.metadata.push((k.trim().to_string(), v.trim().to_string()));
                }
                continue;
            }
            table.header = line.split(',').map(|h| h.trim().to_string()).collect();
            if table.header.is_empty() {
                return Err(parse_error(lineno, "empty header"));
            }
            break;
        }
        if table.header.is_empty() {
            return Err(Error::Parse {
                what: "csv".into(),
                message: "missing header row".into(),
            });
        }
        for (lineno, line) in lines {
            if line.starts_with('#') {
                continue;
            }
            let row = line
                .split(',')
                .map(|c| c.trim().parse::<f64>().map_err(|e| parse_error(lineno, &e.to_string())))
                .collect::<Result<Vec<f64>>>()?;
            if row.len() != table.header.len() {
                return Err(parse_error(
                    lineno,
                    &format!("expected {} columns, found {}", table.header.len(), row.len()),
                ));
            }
            table.rows.push(row);
        }
        Ok(table)
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.header.iter().position(|h| h == name).ok_or_else(|| Error::Parse {
            what: "csv".into(),
            message: format!("missing column {name}"),
        })
    }

    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let k = self.column_index(name)?;
        Ok(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

fn parse_error(lineno: usize, message: &str) -> Error {
    Error::Parse {
        what: "csv".into(),
        message: format!("line {}: {message}", lineno + 1),
    }
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
    }
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}

pub(crate) fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_is_exact() {
        let mut t = Trajectory::new(["tip", "m1"]);
        t.push(0.0, &[Vec3::new(0.05, 1e-17, -0.1), Vec3::new(0.1 + 0.2, 0.0, 3.0)]);
        t.push(1e-4, &[Vec3::new(-0.0, 2.5e-300, 1.0 / 3.0), Vec3::new(1.0, 2.0, 3.0)]);
        let csv = t.to_csv(&[("seed".into(), "7".into())], &[("fn_n", &[0.0, 1.5])]);
        assert!(csv.starts_with("# seed: 7\nt_s,tip_x_m"));
        let back = Trajectory::from_csv(&csv).unwrap();
        assert_eq!(back, t);
        let table = CsvTable::parse(&csv).unwrap();
        assert_eq!(table.column("fn_n").unwrap(), vec![0.0, 1.5]);
        assert_eq!(table.meta("seed"), Some("7"));
    }

    #[test]
    fn ragged_rows_are_rejected() {
        assert!(CsvTable::parse("a,b\n1,2\n3\n").is_err());
        assert!(CsvTable::parse("a,b\n1,x\n").is_err());
        assert!(CsvTable::parse("# only: meta\n").is_err());
    }

    #[test]
    fn tail_from_keeps_later_samples() {
        let mut t = Trajectory::new(["p"]);
        for k in 0..10 {
            t.push(k as f64 * 0.1, &[Vec3::new(k as f64, 0.0, 0.0)]);
        }
        let tail = t.tail_from(0.55);
        assert_eq!(tail.len(), 4);
        assert_eq!(tail.series("p").unwrap()[0][0], 6.0);
    }
}
