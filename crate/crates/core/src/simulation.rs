//! Four-population co-evolution and the paired H1/H0 experiment harness.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{mean, sample_std, silhouette_score, welch_t_test, WelchResult};
use crate::error::{Error, Result};
use crate::fitness::{evaluate_generation, EvaluationSettings, FitnessMode, ScoreMetrics};
use crate::neat::{NeatConfig, Population};
use crate::network::DEFAULT_SLOPE;
use crate::rng::{stream, Stream};
use crate::soundscape::{band_usage, BandUsage, Message, Species, TransmissionMode, BANDS, MESSAGE_BITS, RECEIVER_OUTPUTS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum LogDetail {
    #[default]
    Summary,
    /// Also keep every raw signal at the configured generation stride.
    FullSignals,
}

impl FromStr for LogDetail {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "summary" => Ok(LogDetail::Summary),
            "full-signals" => Ok(LogDetail::FullSignals),
            _ => Err(Error::Argument(format!("unknown log detail `{s}` (expected summary or full-signals)"))),
        }
    }
}

impl fmt::Display for LogDetail {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LogDetail::Summary => "summary",
            LogDetail::FullSignals => "full-signals",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub generations: usize,
    pub mode: FitnessMode,
    pub transmission: TransmissionMode,
    pub neat: NeatConfig,
    pub seed: u64,
    pub log_detail: LogDetail,
    /// With full-signals detail, keep signals of every `signal_stride`-th generation.
    pub signal_stride: usize,
    pub activation_slope: f64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            generations: 300,
            mode: FitnessMode::H1,
            transmission: TransmissionMode::Binary,
            neat: NeatConfig::default(),
            seed: 0,
            log_detail: LogDetail::Summary,
            signal_stride: 1,
            activation_slope: DEFAULT_SLOPE,
        }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.generations < 1 {
            return Err(Error::Config("simulation.generations must be at least 1".into()));
        }
        if self.signal_stride < 1 {
            return Err(Error::Config("simulation.signal_stride must be at least 1".into()));
        }
        if !(self.activation_slope.is_finite() && self.activation_slope > 0.0) {
            return Err(Error::Config("simulation.activation_slope must be positive".into()));
        }
        self.neat.validate()
    }

    fn keeps_signals(&self, generation: usize) -> bool {
        self.log_detail == LogDetail::FullSignals && generation.is_multiple_of(self.signal_stride)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitnessSummary {
    pub max: f64,
    pub mean: f64,
}

impl FitnessSummary {
    fn of(values: &[f64]) -> Self {
        FitnessSummary {
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            mean: mean(values),
        }
    }
}

/// A raw signal as stored in full-signal logs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalRecord {
    pub species: Species,
    pub sender: usize,
    pub message: Message,
    pub channels: [f64; BANDS],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationLog {
    pub generation: usize,
    /// Per species (index A = 0, B = 1): signals using each band.
    pub band_usage: BandUsage,
    pub scores: [ScoreMetrics; 2],
    pub senders: [FitnessSummary; 2],
    pub receivers: [FitnessSummary; 2],
    /// Silhouette of the raw signals grouped by species.
    pub silhouette: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signals: Option<Vec<SignalRecord>>,
}

impl GenerationLog {
    /// Species-ID rate averaged over both species' receivers.
    pub fn species_id_rate(&self) -> Option<f64> {
        Some((self.scores[0].species_id_rate? + self.scores[1].species_id_rate?) / 2.0)
    }
}

#[derive(Debug, Clone)]
pub struct RunLog {
    pub config: SimulationConfig,
    pub generations: Vec<GenerationLog>,
    /// Wall-clock time of the run; not persisted.
    pub elapsed: Duration,
}

impl PartialEq for RunLog {
    fn eq(&self, other: &Self) -> bool {
        self.config == other.config && self.generations == other.generations
    }
}

impl RunLog {
    pub fn seed(&self) -> u64 {
        self.config.seed
    }

    /// Signals per species and generation (senders × messages).
    pub fn signals_per_species(&self) -> usize {
        self.config.neat.population_size * crate::soundscape::MESSAGE_COUNT
    }
}

const SENDER_A: u8 = 0;
const RECEIVER_A: u8 = 1;
const SENDER_B: u8 = 2;
const RECEIVER_B: u8 = 3;

pub fn run_simulation(cfg: &SimulationConfig) -> Result<RunLog> {
    cfg.validate()?;
    let started = Instant::now();
    let population = |k: u8, n_in, n_out| {
        Population::new(n_in, n_out, cfg.neat.clone(), &mut stream(cfg.seed, Stream::Init(k)), stream(cfg.seed, Stream::Evolve(k)))
    };
    let mut pops = [
        population(SENDER_A, MESSAGE_BITS, BANDS),
        population(RECEIVER_A, BANDS, RECEIVER_OUTPUTS),
        population(SENDER_B, MESSAGE_BITS, BANDS),
        population(RECEIVER_B, BANDS, RECEIVER_OUTPUTS),
    ];
    let settings = EvaluationSettings {
        mode: cfg.mode,
        transmission: cfg.transmission,
        activation_slope: cfg.activation_slope,
        keep_records: false,
    };

    let mut generations = Vec::with_capacity(cfg.generations);
    for generation in 0..cfg.generations {
        let [sa, ra, sb, rb] = &pops;
        let eval = evaluate_generation([&sa.genomes, &sb.genomes], [&ra.genomes, &rb.genomes], &settings)?;
        let tables = &eval.tables;
        for (pop, fitness) in pops.iter_mut().zip([&tables.senders[0], &tables.receivers[0], &tables.senders[1], &tables.receivers[1]]) {
            for (g, &f) in pop.genomes.iter_mut().zip(fitness) {
                g.fitness = f;
            }
        }

        let channels: Vec<&[f64]> = eval.signals.iter().map(|s| &s.channels[..]).collect();
        let labels: Vec<Species> = eval.signals.iter().map(|s| s.origin_species).collect();
        let signals = cfg.keeps_signals(generation).then(|| {
            eval.signals
                .iter()
                .map(|s| SignalRecord {
                    species: s.origin_species,
                    sender: s.origin_sender,
                    message: s.source_message,
                    channels: s.channels,
                })
                .collect()
        });
        generations.push(GenerationLog {
            generation,
            band_usage: band_usage(&eval.signals),
            scores: tables.scores,
            senders: [FitnessSummary::of(&tables.senders[0]), FitnessSummary::of(&tables.senders[1])],
            receivers: [FitnessSummary::of(&tables.receivers[0]), FitnessSummary::of(&tables.receivers[1])],
            silhouette: silhouette_score(&channels, &labels)?,
            signals,
        });

        if generation + 1 < cfg.generations {
            for pop in &mut pops {
                pop.evolve();
            }
        }
    }
    Ok(RunLog { config: cfg.clone(), generations, elapsed: started.elapsed() })
}

/// Cross-run comparison of H1 and H0 silhouettes at one generation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerationComparison {
    pub generation: usize,
    pub h1_mean: f64,
    pub h1_std: f64,
    pub h0_mean: f64,
    pub h0_std: f64,
    pub welch: WelchResult,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentLog {
    pub h1: Vec<RunLog>,
    pub h0: Vec<RunLog>,
    pub comparisons: Vec<GenerationComparison>,
}

/// Runs `n_runs` seed-paired simulations per condition (seeds
/// `seed_base + k`) and compares silhouettes generation by generation.
pub fn run_experiment(base: &SimulationConfig, n_runs: usize, seed_base: u64) -> Result<ExperimentLog> {
    if n_runs < 2 {
        return Err(Error::Config(format!("an experiment needs at least 2 runs per condition, got {n_runs}")));
    }
    base.validate()?;
    let jobs: Vec<SimulationConfig> = [FitnessMode::H1, FitnessMode::H0]
        .iter()
        .flat_map(|&mode| {
            (0..n_runs as u64).map(move |k| SimulationConfig { mode, seed: seed_base + k, ..base.clone() })
        })
        .collect();
    let mut runs: Vec<RunLog> = jobs.par_iter().map(run_simulation).collect::<Result<_>>()?;
    let h0 = runs.split_off(n_runs);
    let h1 = runs;
    let comparisons = compare_conditions(&h1, &h0)?;
    Ok(ExperimentLog { h1, h0, comparisons })
}

pub fn compare_conditions(h1: &[RunLog], h0: &[RunLog]) -> Result<Vec<GenerationComparison>> {
    let generations = h1.iter().chain(h0).map(|r| r.generations.len()).min().unwrap_or(0);
    (0..generations)
        .map(|g| {
            let a: Vec<f64> = h1.iter().map(|r| r.generations[g].silhouette).collect();
            let b: Vec<f64> = h0.iter().map(|r| r.generations[g].silhouette).collect();
            Ok(GenerationComparison {
                generation: g,
                h1_mean: mean(&a),
                h1_std: sample_std(&a),
                h0_mean: mean(&b),
                h0_std: sample_std(&b),
                welch: welch_t_test(&a, &b)?,
            })
        })
        .collect()
}

/// Summary of when and how strongly H1 and H0 silhouettes separate.
#[derive(Debug, Clone, PartialEq)]
pub struct SignificanceReport {
    pub alpha: f64,
    /// First generation from which every later p-value is below `alpha`.
    pub first_sustained: Option<usize>,
    /// Mean p-value from `first_sustained` on (descriptive only).
    pub mean_p_after: Option<f64>,
    /// Fraction of generations with p < alpha.
    pub significant_fraction: f64,
    /// Mean H1 minus mean H0 silhouette, averaged over generations.
    pub mean_difference: f64,
}

impl SignificanceReport {
    pub fn new(comparisons: &[GenerationComparison], alpha: f64) -> Self {
        let mut first = None;
        for c in comparisons.iter().rev() {
            if c.welch.p < alpha && c.h1_mean > c.h0_mean {
                first = Some(c.generation);
            } else {
                break;
            }
        }
        let after: Vec<f64> = first
            .map(|f| comparisons.iter().filter(|c| c.generation >= f).map(|c| c.welch.p).collect())
            .unwrap_or_default();
        let n = comparisons.len().max(1) as f64;
        SignificanceReport {
            alpha,
            first_sustained: first,
            mean_p_after: (!after.is_empty()).then(|| mean(&after)),
            significant_fraction: comparisons.iter().filter(|c| c.welch.p < alpha).count() as f64 / n,
            mean_difference: comparisons.iter().map(|c| c.h1_mean - c.h0_mean).sum::<f64>() / n,
        }
    }
}

impl fmt::Display for SignificanceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.first_sustained {
            Some(g) => writeln!(f, "first generation with sustained p < {}: {g}", self.alpha)?,
            None => writeln!(f, "first generation with sustained p < {}: none", self.alpha)?,
        }
        if let Some(p) = self.mean_p_after {
            writeln!(f, "mean p-value from that generation on: {p:.3e}")?;
        }
        writeln!(f, "generations with p < {}: {:.1}%", self.alpha, 100.0 * self.significant_fraction)?;
        writeln!(f, "mean silhouette difference (H1 - H0): {:.4}", self.mean_difference)
    }
}
