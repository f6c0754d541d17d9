//! Output files: numeric CSV tables with a header row, JSON reports and the
//! per-run manifest. Floats are written with 17 significant digits so that
//! reading a file back recovers every value bit for bit.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ibm::Trajectory;
use crate::model::Genotype;

pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

/// Column-named table of floats.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new<S: Into<String>>(headers: impl IntoIterator<Item = S>) -> Self {
        Self {
            headers: headers.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) -> Result<()> {
        if row.len() != self.headers.len() {
            return Err(Error::InvalidParameter(format!(
                "row has {} values for {} columns",
                row.len(),
                self.headers.len()
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.headers.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.headers)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|x| format_float(*x)))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path)?;
        let headers = r.headers()?.iter().map(String::from).collect();
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let row = rec
                .iter()
                .map(|s| {
                    s.parse::<f64>()
                        .map_err(|e| Error::Config(format!("{}: bad number {s:?}: {e}", path.display())))
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push(row);
        }
        Ok(Self { headers, rows })
    }
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_reader(std::io::BufReader::new(File::open(path)?))?)
}

/// Genotype behind each density column of a trajectory table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenotypeDictionary {
    pub k: f64,
    pub columns: Vec<DictionaryEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DictionaryEntry {
    pub column: String,
    pub genotype: Genotype,
}

/// Density table with columns `t, g0, g1, ...` plus its dictionary.
pub fn trajectory_table(traj: &Trajectory) -> Result<(Table, GenotypeDictionary)> {
    let names: Vec<String> = (0..traj.dictionary.len()).map(|i| format!("g{i}")).collect();
    let mut table = Table::new(std::iter::once("t".to_string()).chain(names.iter().cloned()));
    for (t, d) in traj.densities(&traj.dictionary) {
        let mut row = Vec::with_capacity(d.len() + 1);
        row.push(t);
        row.extend(d);
        table.push(row)?;
    }
    let dict = GenotypeDictionary {
        k: traj.k,
        columns: names
            .into_iter()
            .zip(&traj.dictionary)
            .map(|(column, g)| DictionaryEntry { column, genotype: *g })
            .collect(),
    };
    Ok((table, dict))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let mut t = Table::new(["t", "x"]);
        for v in [0.1, 1.0 / 3.0, 1e-300, -2.5e17, std::f64::consts::PI, f64::MIN_POSITIVE] {
            t.push(vec![v, v * 7.0]).unwrap();
        }
        t.write_csv(&path).unwrap();
        let back = Table::read_csv(&path).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.column("x").unwrap()[1], (1.0 / 3.0) * 7.0);
        assert!(t.push(vec![1.0]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.json");
        let d = GenotypeDictionary {
            k: 10.0,
            columns: vec![DictionaryEntry {
                column: "g0".into(),
                genotype: Genotype::new(0.1, 0.3),
            }],
        };
        write_json(&path, &d).unwrap();
        assert_eq!(read_json::<GenotypeDictionary>(&path).unwrap(), d);
    }
}
