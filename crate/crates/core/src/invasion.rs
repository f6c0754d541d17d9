//! Invasion of a rare mutant allele: the linear bi-type branching
//! approximation of the mutant lineage, its extinction probabilities, Monte
//! Carlo estimates on the full individual-based process, the three phases
//! of a successful invasion and exit times from the resident equilibrium.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::DimorphicModel;
use crate::error::{Error, Result};
use crate::ibm::{DeathPerturbation, NoObserver, Observer, PopulationState, RunEnd, Simulator, StopRule};
use crate::model::{DemographyModel, Genotype};
use crate::numerics::ode::{integrate_with, OdeOptions, Output};
use crate::numerics::stats::Proportion;
use crate::rng::stream;

/// Per-capita rates of the two-type linear birth and death chain that
/// approximates the mutant lineage while the resident sits at equilibrium.
/// Both types only give birth to heterozygotes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchingSpec {
    /// `Aa`-births per heterozygote.
    pub heterozygote_birth: f64,
    /// `Aa`-births per mutant homozygote.
    pub homozygote_birth: f64,
    pub heterozygote_death: f64,
    pub homozygote_death: f64,
}

impl BranchingSpec {
    pub fn new(heterozygote_birth: f64, homozygote_birth: f64, heterozygote_death: f64, homozygote_death: f64) -> Result<Self> {
        let spec = Self {
            heterozygote_birth,
            homozygote_birth,
            heterozygote_death,
            homozygote_death,
        };
        let rates = [heterozygote_birth, homozygote_birth, heterozygote_death, homozygote_death];
        if rates.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
            return Err(Error::InvalidParameter(format!("branching rates must be finite and nonnegative, got {rates:?}")));
        }
        Ok(spec)
    }

    /// Linearisation of the dimorphic dynamics around `(n_AA, 0, 0)`.
    pub fn from_dimorphic(dm: &DimorphicModel) -> Result<Self> {
        let n = dm.resident_equilibrium();
        Self::new(
            dm.fertility[1],
            2.0 * dm.fertility[2],
            dm.death[1] + dm.competition[1][0] * n,
            dm.death[2] + dm.competition[2][0] * n,
        )
    }

    /// Growth rate of the heterozygote line.
    pub fn malthusian(&self) -> f64 {
        self.heterozygote_birth - self.heterozygote_death
    }

    /// Smallest positive rate; sets the relaxation time of the extinction ODE.
    pub fn slowest_rate(&self) -> Result<f64> {
        [
            self.heterozygote_birth,
            self.homozygote_birth,
            self.heterozygote_death,
            self.homozygote_death,
            self.malthusian().abs(),
        ]
        .into_iter()
        .filter(|r| *r > 0.0)
        .reduce(f64::min)
        .ok_or_else(|| Error::Degenerate("all branching rates vanish".into()))
    }
}

/// `[S]_+ / f_Aa`: survival probability of a lineage founded by one heterozygote.
pub fn survival_probability(dm: &DimorphicModel) -> Result<f64> {
    let f = dm.fertility[1];
    if f == 0.0 {
        return Err(Error::Degenerate("heterozygote fertility is zero".into()));
    }
    Ok(dm.fitness_in_resident().max(0.0) / f)
}

/// Extinction probabilities by time `t` of lineages founded by one `Aa`
/// (`q1`) and one `aa` (`q2`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtinctionState {
    pub q1: f64,
    pub q2: f64,
}

impl ExtinctionState {
    pub fn new(q1: f64, q2: f64) -> Self {
        Self { q1, q2 }
    }
}

/// Backward equations of the branching chain.
pub fn extinction_ode_rhs(e: ExtinctionState, spec: &BranchingSpec) -> (f64, f64) {
    let BranchingSpec {
        heterozygote_birth: f1,
        homozygote_birth: f2,
        heterozygote_death: d1,
        homozygote_death: d2,
    } = *spec;
    (
        f1 * e.q1 * e.q1 + d1 - (f1 + d1) * e.q1,
        f2 * e.q1 * e.q2 + d2 - (f2 + d2) * e.q2,
    )
}

/// Closed-form limit of the extinction probabilities started from `(0, 0)`.
pub fn extinction_fixed_point(spec: &BranchingSpec) -> Result<ExtinctionState> {
    let (f1, f2, d1, d2) = (
        spec.heterozygote_birth,
        spec.homozygote_birth,
        spec.heterozygote_death,
        spec.homozygote_death,
    );
    if f1 == 0.0 && d1 == 0.0 {
        return Err(Error::Degenerate("heterozygotes neither reproduce nor die".into()));
    }
    let q1 = if d1 >= f1 { 1.0 } else { d1 / f1 };
    let denom = f2 + d2 - f2 * q1;
    let q2 = if denom == 0.0 { 1.0 } else { d2 / denom };
    Ok(ExtinctionState::new(q1, q2))
}

/// Extinction probabilities at `horizon`, integrated from `(0, 0)`. With
/// `horizon = None` the integration runs to `50 / slowest_rate`.
pub fn integrate_extinction(spec: &BranchingSpec, horizon: Option<f64>) -> Result<(f64, ExtinctionState)> {
    let t_end = match horizon {
        Some(t) => t,
        None => 50.0 / spec.slowest_rate()?,
    };
    let path = integrate_with(
        |_, q: &[f64; 2]| {
            let (a, b) = extinction_ode_rhs(ExtinctionState::new(q[0], q[1]), spec);
            Ok([a, b])
        },
        0.0,
        [0.0, 0.0],
        t_end,
        &OdeOptions::with_tolerances(1e-12, 1e-14),
        Output::Final,
        |q| {
            for v in q.iter_mut() {
                *v = v.clamp(0.0, 1.0);
            }
        },
        |_, _| false,
    )?;
    let (t, q) = path.last();
    Ok((t, ExtinctionState::new(q[0], q[1])))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Founder {
    Heterozygote,
    Homozygote,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchingOutcome {
    Extinct,
    /// The lineage reached the size threshold.
    Reached,
    /// Event budget exhausted first.
    Censored,
}

/// Runs the branching chain from a single founder until extinction or until
/// the lineage holds `threshold` individuals. Only the sequence of events
/// matters for the outcome, so the embedded jump chain is simulated.
pub fn simulate_branching<R: Rng + ?Sized>(
    spec: &BranchingSpec,
    founder: Founder,
    threshold: u64,
    max_events: u64,
    rng: &mut R,
) -> BranchingOutcome {
    let (mut y, mut z): (u64, u64) = match founder {
        Founder::Heterozygote => (1, 0),
        Founder::Homozygote => (0, 1),
    };
    for _ in 0..max_events {
        if y + z == 0 {
            return BranchingOutcome::Extinct;
        }
        if y + z >= threshold {
            return BranchingOutcome::Reached;
        }
        let (yf, zf) = (y as f64, z as f64);
        let birth = spec.heterozygote_birth * yf + spec.homozygote_birth * zf;
        let death_y = spec.heterozygote_death * yf;
        let death_z = spec.homozygote_death * zf;
        let total = birth + death_y + death_z;
        if total <= 0.0 {
            return BranchingOutcome::Censored;
        }
        let r = rng.random::<f64>() * total;
        if r < birth {
            y += 1;
        } else if r < birth + death_y {
            y -= 1;
        } else {
            z -= 1;
        }
    }
    if y + z == 0 {
        BranchingOutcome::Extinct
    } else if y + z >= threshold {
        BranchingOutcome::Reached
    } else {
        BranchingOutcome::Censored
    }
}

/// Fraction of replicates reaching `threshold`, with one RNG stream per replicate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurvivalEstimate {
    pub survival: Proportion,
    pub censored: u64,
}

pub fn branching_survival(
    spec: &BranchingSpec,
    founder: Founder,
    threshold: u64,
    replicates: u64,
    seed: u64,
) -> SurvivalEstimate {
    let outcomes: Vec<BranchingOutcome> = (0..replicates)
        .into_par_iter()
        .map(|r| simulate_branching(spec, founder, threshold, 100_000_000, &mut stream(seed, r)))
        .collect();
    tally(&outcomes)
}

fn tally(outcomes: &[BranchingOutcome]) -> SurvivalEstimate {
    let reached = outcomes.iter().filter(|o| **o == BranchingOutcome::Reached).count() as u64;
    let censored = outcomes.iter().filter(|o| **o == BranchingOutcome::Censored).count() as u64;
    SurvivalEstimate {
        survival: Proportion::new(reached, outcomes.len() as u64),
        censored,
    }
}

/// Monte Carlo invasion on the full process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvasionSetup {
    pub u_resident: f64,
    pub u_mutant: f64,
    /// Mutant individuals (`Aa` plus `aa`) counted as a success, as a fraction of `K`.
    pub epsilon: f64,
    pub replicates: u64,
    pub max_events: u64,
}

impl InvasionSetup {
    pub fn new(u_resident: f64, u_mutant: f64, epsilon: f64, replicates: u64) -> Self {
        Self {
            u_resident,
            u_mutant,
            epsilon,
            replicates,
            max_events: 1_000_000_000,
        }
    }
}

/// Copy of `model` with mutation switched off.
pub fn without_mutation(model: &DemographyModel) -> Result<DemographyModel> {
    DemographyModel::new_unchecked(model.spec().clone().with_mu(0.0))
}

/// Resident population `floor(K n_AA)` plus one heterozygote.
pub fn invasion_start(model: &DemographyModel, dm: &DimorphicModel) -> PopulationState {
    let k = model.system_size();
    let residents = (k * dm.resident_equilibrium()).floor().max(0.0) as u64;
    PopulationState::new(k)
        .with(Genotype::homozygote(dm.u_resident), residents)
        .with(Genotype::new(dm.u_resident, dm.u_mutant), 1)
}

/// Outcome of one invasion attempt on the individual-based process.
pub fn invasion_attempt<R: Rng + ?Sized>(
    model: &DemographyModel,
    dm: &DimorphicModel,
    setup: &InvasionSetup,
    rng: &mut R,
) -> Result<BranchingOutcome> {
    let start = invasion_start(model, dm);
    let mut sim = Simulator::new(model, &start)?;
    let het = Genotype::new(dm.u_resident, dm.u_mutant);
    let hom = Genotype::homozygote(dm.u_mutant);
    let target = (setup.epsilon * model.system_size()).ceil().max(1.0) as u64;
    let mut reached = false;
    let summary = sim.run(StopRule::horizon(f64::INFINITY).with_max_events(setup.max_events), rng, &mut NoObserver, |s| {
        let mutants = s.count(&het) + s.count(&hom);
        reached = mutants >= target;
        reached || mutants == 0
    })?;
    Ok(match summary.end {
        RunEnd::Predicate if reached => BranchingOutcome::Reached,
        RunEnd::Predicate | RunEnd::Extinct => BranchingOutcome::Extinct,
        RunEnd::Truncated | RunEnd::Horizon => BranchingOutcome::Censored,
    })
}

/// Fraction of replicates in which the mutant lineage reaches `epsilon K`
/// individuals before dying out. Replicate `r` uses stream `r` of `seed`.
pub fn monte_carlo_invasion(model: &DemographyModel, setup: &InvasionSetup, seed: u64) -> Result<SurvivalEstimate> {
    if !(setup.epsilon > 0.0) {
        return Err(Error::InvalidParameter(format!("epsilon must be positive, got {}", setup.epsilon)));
    }
    let model = without_mutation(model)?;
    let dm = DimorphicModel::new(&model, setup.u_resident, setup.u_mutant)?;
    let outcomes: Vec<BranchingOutcome> = (0..setup.replicates)
        .into_par_iter()
        .map(|r| invasion_attempt(&model, &dm, setup, &mut stream(seed, r)))
        .collect::<Result<_>>()?;
    Ok(tally(&outcomes))
}

/// Entry times into the three phases of an invasion that fixed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseSplit {
    /// Mutant density `y + z` first reaches `epsilon`.
    pub t1: f64,
    /// State first within `epsilon` of `(0, 0, n_aa)` in max-norm.
    pub t2: f64,
    /// Resident allele lost: `x = y = 0`.
    pub t3: f64,
}

impl PhaseSplit {
    pub fn durations(&self) -> [f64; 3] {
        [self.t1, self.t2 - self.t1, self.t3 - self.t2]
    }
}

/// Online detector of the phase boundaries along a trajectory of densities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseTracker {
    epsilon: f64,
    mutant_equilibrium: f64,
    t1: Option<f64>,
    t2: Option<f64>,
    t3: Option<f64>,
}

impl PhaseTracker {
    pub fn new(epsilon: f64, mutant_equilibrium: f64) -> Self {
        Self {
            epsilon,
            mutant_equilibrium,
            t1: None,
            t2: None,
            t3: None,
        }
    }

    /// Feeds the state `(x, y, z)` holding from time `t` on.
    pub fn update(&mut self, t: f64, d: [f64; 3]) {
        let [x, y, z] = d;
        if self.t1.is_none() && y + z >= self.epsilon {
            self.t1 = Some(t);
        }
        let near = x.abs().max(y.abs()).max((z - self.mutant_equilibrium).abs()) <= self.epsilon;
        if self.t1.is_some() && self.t2.is_none() && near {
            self.t2 = Some(t);
        }
        if self.t3.is_none() && x == 0.0 && y == 0.0 && z > 0.0 {
            self.t3 = Some(t);
            // fixation before entering the neighbourhood ends phase two there
            self.t1.get_or_insert(t);
            self.t2.get_or_insert(t);
        }
    }

    pub fn is_complete(&self) -> bool {
        self.t3.is_some()
    }

    pub fn split(&self) -> Option<PhaseSplit> {
        Some(PhaseSplit {
            t1: self.t1?,
            t2: self.t2?,
            t3: self.t3?,
        })
    }
}

/// Phase boundaries of a recorded trajectory `(t, [x, y, z])`; `None` when
/// the resident allele is never lost.
pub fn three_phase_split(trajectory: &[(f64, [f64; 3])], epsilon: f64, mutant_equilibrium: f64) -> Option<PhaseSplit> {
    let mut tracker = PhaseTracker::new(epsilon, mutant_equilibrium);
    for (t, d) in trajectory {
        tracker.update(*t, *d);
        if tracker.is_complete() {
            break;
        }
    }
    tracker.split()
}

/// One invasion attempt followed to fixation or loss of the mutant allele,
/// tracking phase boundaries event by event and passing samples to `observer`.
pub fn invasion_phases<R, O>(
    model: &DemographyModel,
    dm: &DimorphicModel,
    epsilon: f64,
    max_events: u64,
    rng: &mut R,
    observer: &mut O,
) -> Result<Option<PhaseSplit>>
where
    R: Rng + ?Sized,
    O: Observer + ?Sized,
{
    let start = invasion_start(model, dm);
    let k = model.system_size();
    let gs = [
        Genotype::homozygote(dm.u_resident),
        Genotype::new(dm.u_resident, dm.u_mutant),
        Genotype::homozygote(dm.u_mutant),
    ];
    let mut sim = Simulator::new(model, &start)?;
    let mut tracker = PhaseTracker::new(epsilon, dm.mutant_equilibrium());
    let summary = sim.run(StopRule::horizon(f64::INFINITY).with_max_events(max_events), rng, observer, |s| {
        let d = gs.map(|g| s.count(&g) as f64 / k);
        tracker.update(s.time(), d);
        tracker.is_complete() || d[1] + d[2] == 0.0
    })?;
    if summary.end == RunEnd::Truncated {
        return Err(Error::NoConvergence {
            what: "invasion run within the event budget",
            iterations: max_events as usize,
        });
    }
    Ok(tracker.split())
}

/// Exit frequency from the `epsilon`-neighbourhood of the equilibrium at one `K`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExitRow {
    pub k: u64,
    pub exits: Proportion,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExitSetup {
    pub u_resident: f64,
    pub epsilon: f64,
    pub horizon: f64,
    pub replicates: u64,
    /// Optional bounded perturbation of the death rate.
    pub perturbation: Option<DeathPerturbation>,
}

/// For each `K`, the fraction of monomorphic runs started at `floor(K n)`
/// whose density leaves `[n - epsilon, n + epsilon]` before the horizon.
pub fn exit_time_scaling(model: &DemographyModel, setup: &ExitSetup, ks: &[u64], seed: u64) -> Result<Vec<ExitRow>> {
    let model = without_mutation(model)?;
    let u = setup.u_resident;
    let n_bar = model.carrying_capacity(u)?;
    ks.iter()
        .enumerate()
        .map(|(i, &k)| {
            let sized = DemographyModel::new_unchecked(model.spec().clone().with_k(k))?;
            let start = PopulationState::monomorphic(u, (k as f64 * n_bar).floor() as u64, k as f64);
            let exits = (0..setup.replicates)
                .into_par_iter()
                .map(|r| {
                    let mut rng = stream(seed, ((i as u64) << 40) | r);
                    let mut sim = Simulator::new(&sized, &start)?;
                    if let Some(p) = setup.perturbation {
                        sim = sim.with_perturbation(p);
                    }
                    let summary = sim.run(StopRule::horizon(setup.horizon), &mut rng, &mut NoObserver, |s| {
                        (s.total() as f64 / s.k() - n_bar).abs() > setup.epsilon
                    })?;
                    Ok(matches!(summary.end, RunEnd::Predicate | RunEnd::Extinct))
                })
                .collect::<Result<Vec<bool>>>()?;
            let n = exits.iter().filter(|e| **e).count() as u64;
            Ok(ExitRow {
                k,
                exits: Proportion::new(n, setup.replicates),
            })
        })
        .collect()
}
