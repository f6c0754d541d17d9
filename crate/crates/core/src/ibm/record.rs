use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::Observer;
use crate::model::Genotype;

/// Population state at one recording time; counts are keyed by index into
/// the trajectory's genotype dictionary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub time: f64,
    pub counts: Vec<(usize, u64)>,
}

/// Regularly sampled IBM trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub k: f64,
    pub dictionary: Vec<Genotype>,
    pub snapshots: Vec<Snapshot>,
}

impl Trajectory {
    /// Densities of the listed genotypes at every recording time.
    pub fn densities(&self, genotypes: &[Genotype]) -> Vec<(f64, Vec<f64>)> {
        let ids: Vec<Option<usize>> = genotypes
            .iter()
            .map(|g| self.dictionary.iter().position(|h| h == g))
            .collect();
        self.snapshots
            .iter()
            .map(|s| {
                let d = ids
                    .iter()
                    .map(|id| {
                        id.and_then(|id| s.counts.iter().find(|(j, _)| *j == id))
                            .map_or(0.0, |(_, n)| *n as f64 / self.k)
                    })
                    .collect();
                (s.time, d)
            })
            .collect()
    }

    /// Total density at every recording time.
    pub fn total_density(&self) -> Vec<(f64, f64)> {
        self.snapshots
            .iter()
            .map(|s| (s.time, s.counts.iter().map(|(_, n)| *n as f64).sum::<f64>() / self.k))
            .collect()
    }
}

/// Observer sampling the state every `dt` time units from time 0.
#[derive(Debug, Clone)]
pub struct Recorder {
    dt: f64,
    next: u64,
    k: f64,
    ids: HashMap<Genotype, usize>,
    trajectory: Trajectory,
}

impl Recorder {
    pub fn new(dt: f64, k: f64) -> Self {
        Self {
            dt,
            next: 0,
            k,
            ids: HashMap::new(),
            trajectory: Trajectory {
                k,
                dictionary: Vec::new(),
                snapshots: Vec::new(),
            },
        }
    }

    pub fn finish(self) -> Trajectory {
        self.trajectory
    }

    pub fn k(&self) -> f64 {
        self.k
    }
}

impl Observer for Recorder {
    fn next_time(&self) -> Option<f64> {
        Some(self.next as f64 * self.dt)
    }

    fn record(&mut self, t: f64, counts: &mut dyn Iterator<Item = (Genotype, u64)>) {
        let mut row = Vec::new();
        for (g, n) in counts {
            let dict = &mut self.trajectory.dictionary;
            let id = *self.ids.entry(g).or_insert_with(|| {
                dict.push(g);
                dict.len() - 1
            });
            row.push((id, n));
        }
        row.sort_unstable();
        self.trajectory.snapshots.push(Snapshot { time: t, counts: row });
        self.next += 1;
    }
}
