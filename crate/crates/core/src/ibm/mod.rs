//! Exact event-driven simulation of the individual-based process:
//! Mendelian births (possibly mutant) between distinct partners and deaths
//! from background mortality plus competition scaled by `1/K`.
//!
//! Individuals are grouped by genotype and rates are kept per genotype, so
//! each event costs `O(G)` where `G` is the number of genotypes present.

mod record;

use std::collections::{BTreeMap, HashMap};

use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

pub use record::{Recorder, Snapshot, Trajectory};

use crate::error::{Error, Result};
use crate::model::{DemographyModel, Genotype};

/// Genotype counts at system size `K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationState {
    pub counts: BTreeMap<Genotype, u64>,
    pub k: f64,
    pub time: f64,
}

impl PopulationState {
    pub fn new(k: f64) -> Self {
        Self {
            counts: BTreeMap::new(),
            k,
            time: 0.0,
        }
    }

    /// `n` homozygotes `(u, u)`.
    pub fn monomorphic(u: f64, n: u64, k: f64) -> Self {
        Self::new(k).with(Genotype::homozygote(u), n)
    }

    /// Adds `n` individuals of genotype `g` (ignored when `n == 0`).
    pub fn with(mut self, g: Genotype, n: u64) -> Self {
        if n > 0 {
            *self.counts.entry(g).or_insert(0) += n;
        }
        self
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn density(&self) -> f64 {
        self.total() as f64 / self.k
    }

    pub fn count(&self, g: &Genotype) -> u64 {
        self.counts.get(g).copied().unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Birth,
    MutantBirth,
    Death,
    /// Sign switch of an external death-rate perturbation.
    Perturbation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub time: f64,
    pub kind: EventKind,
    pub genotype: Genotype,
    pub parents: Option<(Genotype, Genotype)>,
}

/// Bounded random perturbation of the per-capita death rate: a telegraph
/// process taking values `+amplitude` and `-amplitude`, switching sign at
/// rate `switch_rate`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeathPerturbation {
    pub amplitude: f64,
    pub switch_rate: f64,
}

#[derive(Debug, Clone)]
struct Slot {
    genotype: Genotype,
    count: u64,
    fertility: f64,
    death: f64,
    /// `sum_j C(g, g_j) n_j` over all individuals, the focal one included.
    load: f64,
}

/// When to end a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopRule {
    pub horizon: f64,
    pub max_events: u64,
}

impl StopRule {
    pub fn horizon(horizon: f64) -> Self {
        Self {
            horizon,
            max_events: u64::MAX,
        }
    }

    pub fn with_max_events(mut self, max_events: u64) -> Self {
        self.max_events = max_events;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunEnd {
    Horizon,
    Extinct,
    Predicate,
    /// Event budget exhausted before the horizon.
    Truncated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub end: RunEnd,
    pub time: f64,
    pub events: u64,
}

const RATE_REFRESH: u64 = 10_000;

/// Gillespie simulator over a validated model.
#[derive(Debug, Clone)]
pub struct Simulator<'m> {
    model: &'m DemographyModel,
    k: f64,
    mu: f64,
    slots: Vec<Slot>,
    index: HashMap<Genotype, usize>,
    comp: Vec<Vec<f64>>,
    time: f64,
    events: u64,
    perturbation: Option<(DeathPerturbation, f64)>,
    max_load_drift: f64,
}

impl<'m> Simulator<'m> {
    pub fn new(model: &'m DemographyModel, state: &PopulationState) -> Result<Self> {
        if !(state.k > 0.0) {
            return Err(Error::InvalidParameter(format!("system size must be positive, got {}", state.k)));
        }
        let space = model.space();
        let mut sim = Self {
            model,
            k: state.k,
            mu: model.mutation_probability(),
            slots: Vec::new(),
            index: HashMap::new(),
            comp: Vec::new(),
            time: state.time,
            events: 0,
            perturbation: None,
            max_load_drift: 0.0,
        };
        for (g, &n) in &state.counts {
            space.check(g.u1())?;
            space.check(g.u2())?;
            if n > 0 {
                let i = sim.slot_of(*g);
                sim.slots[i].count = n;
            }
        }
        sim.refresh_loads(false);
        Ok(sim)
    }

    /// Adds an external death-rate perturbation, starting at `+amplitude`.
    pub fn with_perturbation(mut self, p: DeathPerturbation) -> Self {
        self.perturbation = Some((p, p.amplitude));
        self
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn events(&self) -> u64 {
        self.events
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn total(&self) -> u64 {
        self.slots.iter().map(|s| s.count).sum()
    }

    pub fn is_extinct(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn count(&self, g: &Genotype) -> u64 {
        self.index.get(g).map_or(0, |&i| self.slots[i].count)
    }

    /// Genotypes present with their counts, in internal order.
    pub fn genotypes(&self) -> impl Iterator<Item = (Genotype, u64)> + '_ {
        self.slots.iter().map(|s| (s.genotype, s.count))
    }

    pub fn state(&self) -> PopulationState {
        PopulationState {
            counts: self.genotypes().collect(),
            k: self.k,
            time: self.time,
        }
    }

    /// Largest discrepancy seen so far between incrementally maintained
    /// competition loads and their from-scratch recomputation.
    pub fn max_load_drift(&self) -> f64 {
        self.max_load_drift
    }

    /// Per-capita death rate `D(g) + (1/K) sum_j C(g, g_j)` of a genotype
    /// present in the population.
    pub fn death_rate(&self, g: &Genotype) -> Option<f64> {
        self.index.get(g).map(|&i| self.per_capita_death(i))
    }

    fn per_capita_death(&self, i: usize) -> f64 {
        let s = &self.slots[i];
        let extra = self.perturbation.map_or(0.0, |(_, v)| v);
        (s.death + s.load / self.k + extra).max(0.0)
    }

    /// Total birth and death rates. The birth total is
    /// `sum_i f_i (F - f_i) / F` over individuals, `F = sum_i f_i`.
    pub fn total_rates(&self) -> (f64, f64) {
        let (mut big_f, mut sq) = (0.0, 0.0);
        let mut death = 0.0;
        for (i, s) in self.slots.iter().enumerate() {
            let n = s.count as f64;
            big_f += n * s.fertility;
            sq += n * s.fertility * s.fertility;
            death += n * self.per_capita_death(i);
        }
        let birth = if big_f > 0.0 { (big_f - sq / big_f).max(0.0) } else { 0.0 };
        (birth, death)
    }

    fn slot_of(&mut self, g: Genotype) -> usize {
        if let Some(&i) = self.index.get(&g) {
            return i;
        }
        let m = self.model;
        let i = self.slots.len();
        let row: Vec<f64> = self.slots.iter().map(|s| m.competition(&g, &s.genotype)).collect();
        for (j, r) in self.comp.iter_mut().enumerate() {
            r.push(m.competition(&self.slots[j].genotype, &g));
        }
        let mut row = row;
        row.push(m.competition(&g, &g));
        let load = self.slots.iter().zip(&row).map(|(s, c)| c * s.count as f64).sum();
        self.comp.push(row);
        self.slots.push(Slot {
            genotype: g,
            count: 0,
            fertility: m.fertility(&g),
            death: m.death(&g),
            load,
        });
        self.index.insert(g, i);
        i
    }

    fn remove_slot(&mut self, i: usize) {
        let g = self.slots[i].genotype;
        self.index.remove(&g);
        self.slots.swap_remove(i);
        self.comp.swap_remove(i);
        for r in &mut self.comp {
            r.swap_remove(i);
        }
        if i < self.slots.len() {
            self.index.insert(self.slots[i].genotype, i);
        }
    }

    fn change(&mut self, i: usize, up: bool) {
        let sign = if up { 1.0 } else { -1.0 };
        for (j, s) in self.slots.iter_mut().enumerate() {
            s.load += sign * self.comp[j][i];
        }
        if up {
            self.slots[i].count += 1;
        } else {
            self.slots[i].count -= 1;
            if self.slots[i].count == 0 {
                self.remove_slot(i);
            }
        }
    }

    fn refresh_loads(&mut self, track: bool) {
        for j in 0..self.slots.len() {
            let exact: f64 = self.comp[j]
                .iter()
                .zip(&self.slots)
                .map(|(c, s)| c * s.count as f64)
                .sum();
            let drift = (exact - self.slots[j].load).abs() / exact.abs().max(1.0);
            if track {
                self.max_load_drift = self.max_load_drift.max(drift);
            }
            self.slots[j].load = exact;
        }
    }

    fn pick<F: Fn(usize, &Slot) -> f64, R: Rng + ?Sized>(&self, weight: F, rng: &mut R) -> usize {
        let total: f64 = self.slots.iter().enumerate().map(|(i, s)| weight(i, s)).sum();
        let mut target = rng.random::<f64>() * total;
        let mut last = 0;
        for (i, s) in self.slots.iter().enumerate() {
            let w = weight(i, s);
            if w > 0.0 {
                last = i;
                if target < w {
                    return i;
                }
                target -= w;
            }
        }
        last
    }

    /// Offspring of a mating: one uniformly chosen allele from each parent,
    /// then with probability `mu` one uniformly chosen slot of the child
    /// mutates by a step drawn from the mutation law at that allele.
    pub fn offspring<R: Rng + ?Sized>(
        model: &DemographyModel,
        mother: &Genotype,
        father: &Genotype,
        mu: f64,
        rng: &mut R,
    ) -> Result<(Genotype, bool)> {
        let from_mother = mother.alleles()[rng.random_range(0..2)];
        let from_father = father.alleles()[rng.random_range(0..2)];
        let mut alleles = [from_mother, from_father];
        let mutated = mu > 0.0 && rng.random::<f64>() < mu;
        if mutated {
            let slot = rng.random_range(0..2);
            let u = alleles[slot];
            alleles[slot] = model.space().clamp(u + model.mutation_law().sample(u, rng)?);
        }
        Ok((Genotype::new(alleles[0], alleles[1]), mutated))
    }

    /// One event. Returns `None` once the population is extinct.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<Option<EventRecord>> {
        match self.advance(rng, f64::INFINITY, &mut NoObserver)? {
            Advance::Event(ev) => Ok(Some(ev)),
            _ => Ok(None),
        }
    }

    /// Samples the next event time; if it falls beyond `horizon` the clock
    /// stops at the horizon and nothing happens (exact by memorylessness).
    /// The observer sees the pre-event state at its requested times.
    fn advance<R, O>(&mut self, rng: &mut R, horizon: f64, observer: &mut O) -> Result<Advance>
    where
        R: Rng + ?Sized,
        O: Observer + ?Sized,
    {
        let (birth, death) = self.total_rates();
        let switch = self.perturbation.map_or(0.0, |(p, _)| p.switch_rate);
        let total = birth + death + switch;
        if self.slots.is_empty() || !(total > 0.0) {
            return Ok(Advance::Extinct);
        }
        let wait: f64 = rng.sample(Exp1);
        let t_next = self.time + wait / total;
        if t_next > horizon {
            observer.observe_until(self, horizon);
            self.time = horizon;
            return Ok(Advance::Horizon);
        }
        observer.observe_before(self, t_next);
        self.time = t_next;
        self.events += 1;
        let x = rng.random::<f64>() * total;
        let record = if x < birth {
            let big_f: f64 = self.slots.iter().map(|s| s.count as f64 * s.fertility).sum();
            let m = self.pick(|_, s| s.count as f64 * s.fertility * (big_f - s.fertility), rng);
            let fa = self.pick(|i, s| s.fertility * (s.count - u64::from(i == m)) as f64, rng);
            let (mother, father) = (self.slots[m].genotype, self.slots[fa].genotype);
            let (child, mutated) = Self::offspring(self.model, &mother, &father, self.mu, rng)?;
            let i = self.slot_of(child);
            self.change(i, true);
            EventRecord {
                time: self.time,
                kind: if mutated { EventKind::MutantBirth } else { EventKind::Birth },
                genotype: child,
                parents: Some((mother, father)),
            }
        } else if x < birth + death {
            let i = self.pick(|i, s| s.count as f64 * self.per_capita_death(i), rng);
            let g = self.slots[i].genotype;
            self.change(i, false);
            EventRecord {
                time: self.time,
                kind: EventKind::Death,
                genotype: g,
                parents: None,
            }
        } else {
            if let Some((_, v)) = self.perturbation.as_mut() {
                *v = -*v;
            }
            EventRecord {
                time: self.time,
                kind: EventKind::Perturbation,
                genotype: self.slots[0].genotype,
                parents: None,
            }
        };
        if self.events.is_multiple_of(RATE_REFRESH) {
            self.refresh_loads(true);
        }
        Ok(Advance::Event(record))
    }

    /// Runs until the horizon, extinction, the event budget, or until `stop`
    /// returns true after an event.
    pub fn run<R, O, P>(&mut self, rule: StopRule, rng: &mut R, observer: &mut O, mut stop: P) -> Result<RunSummary>
    where
        R: Rng + ?Sized,
        O: Observer + ?Sized,
        P: FnMut(&Simulator<'m>) -> bool,
    {
        let start = self.events;
        observer.observe_until(self, self.time);
        let end = loop {
            if self.events - start >= rule.max_events {
                break RunEnd::Truncated;
            }
            match self.advance(rng, rule.horizon, observer)? {
                Advance::Horizon => break RunEnd::Horizon,
                Advance::Extinct => {
                    if rule.horizon.is_finite() {
                        observer.observe_until(self, rule.horizon);
                    }
                    break RunEnd::Extinct;
                }
                Advance::Event(_) => {
                    if self.is_extinct() {
                        if rule.horizon.is_finite() {
                            observer.observe_until(self, rule.horizon);
                        }
                        break RunEnd::Extinct;
                    }
                    if stop(self) {
                        break RunEnd::Predicate;
                    }
                }
            }
        };
        Ok(RunSummary {
            end,
            time: self.time,
            events: self.events - start,
        })
    }
}

enum Advance {
    Event(EventRecord),
    Horizon,
    Extinct,
}

/// Receives the piecewise-constant state at the times it asks for.
pub trait Observer {
    /// Next time at which the observer wants a sample, if any.
    fn next_time(&self) -> Option<f64>;
    /// Record `counts` as the state at time `t`.
    fn record(&mut self, t: f64, counts: &mut dyn Iterator<Item = (Genotype, u64)>);

    /// Samples the current state at all requested times `<= until`.
    fn observe_until(&mut self, sim: &Simulator<'_>, until: f64) {
        while let Some(t) = self.next_time() {
            if t > until {
                break;
            }
            self.record(t, &mut sim.genotypes());
        }
    }

    /// Samples the current state at all requested times `< until`.
    fn observe_before(&mut self, sim: &Simulator<'_>, until: f64) {
        while let Some(t) = self.next_time() {
            if t >= until {
                break;
            }
            self.record(t, &mut sim.genotypes());
        }
    }
}

/// Observer that records nothing.
pub struct NoObserver;

impl Observer for NoObserver {
    fn next_time(&self) -> Option<f64> {
        None
    }

    fn record(&mut self, _t: f64, _counts: &mut dyn Iterator<Item = (Genotype, u64)>) {}
}
