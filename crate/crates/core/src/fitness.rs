//! Fitness equations and the per-generation evaluation protocol.
//!
//! Every sender encodes all eight messages. Under [`FitnessMode::H1`] each
//! receiver hears every signal of both species and must tell conspecific
//! from heterospecific ones; under [`FitnessMode::H0`] receivers hear only
//! their own species and are rewarded for decoding alone.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::neat::Genome;
use crate::network::FeedforwardNetwork;
use crate::soundscape::{
    decode, encode, transmit, DecodedOutput, Message, Signal, Species, TransmissionMode, BANDS, MESSAGE_BITS,
    MESSAGE_COUNT, THRESHOLD,
};

/// Steepness of the sigmoidal fitness adjustment.
const ADJ_GAIN: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum FitnessMode {
    /// Species identification drives fitness (`e_s = 1`).
    #[default]
    H1,
    /// Null model: species known a priori (`e_s = 0`), conspecific signals only.
    H0,
}

impl FromStr for FitnessMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "h1" | "H1" => Ok(FitnessMode::H1),
            "h0" | "H0" => Ok(FitnessMode::H0),
            _ => Err(Error::Argument(format!("unknown fitness mode `{s}` (expected h1 or h0)"))),
        }
    }
}

impl fmt::Display for FitnessMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FitnessMode::H1 => "h1",
            FitnessMode::H0 => "h0",
        })
    }
}

/// Sharp sigmoidal step centred on 0.5: `½(tanh(8(x − ½)) + 1)`.
pub fn f_adj(x: f64) -> f64 {
    0.5 * ((ADJ_GAIN * (x - 0.5)).tanh() + 1.0)
}

pub fn species_fitness(m3: f64, is_conspecific: bool) -> f64 {
    let target = if is_conspecific { 1.0 } else { 0.0 };
    f_adj(1.0 - (target - m3).abs())
}

pub fn decoding_fitness(original: Message, decoded: &DecodedOutput) -> f64 {
    let bits = decoded.bits();
    3.0 * (0..MESSAGE_BITS)
        .map(|i| f_adj(1.0 - (bit_value(original, i) - bits[i]).abs()))
        .product::<f64>()
}

/// Bonus multiplier `Π_{i=0..N} (i/10 + 1)` when species identification is
/// enabled, 1 otherwise.
pub fn bonus(species_enabled: bool, correct_bits: u32) -> f64 {
    if !species_enabled {
        return 1.0;
    }
    (0..=correct_bits).map(|i| i as f64 / 10.0 + 1.0).product()
}

pub fn total_fitness(species_enabled: bool, decoding_enabled: bool, f_s: f64, f_d: f64, f_b: f64) -> f64 {
    let e_s = if species_enabled { 1.0 } else { 0.0 };
    let e_d = if decoding_enabled { 1.0 } else { 0.0 };
    (e_s * f_s + e_d * f_d) * f_b
}

fn bit_value(msg: Message, i: usize) -> f64 {
    if msg.bit(i) {
        1.0
    } else {
        0.0
    }
}

/// Number of message bits decoded within 0.5 of the original.
pub fn correct_bits(original: Message, decoded: &DecodedOutput) -> u32 {
    let bits = decoded.bits();
    (0..MESSAGE_BITS)
        .filter(|&i| (bit_value(original, i) - bits[i]).abs() < THRESHOLD)
        .count() as u32
}

/// Outcome of one receiver decoding one signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRecord {
    pub sender_species: Species,
    pub sender_index: usize,
    pub receiver_species: Species,
    pub receiver_index: usize,
    pub message: Message,
    pub decoded: DecodedOutput,
    pub species_id_correct: bool,
    /// Raw count of correctly decoded bits.
    pub correct_bits: u32,
    /// `e_d`: whether decoding contributed to this evaluation.
    pub decoding_enabled: bool,
    pub f_s: f64,
    pub f_d: f64,
    pub f_b: f64,
    pub f_t: f64,
}

/// Scores of one species' receivers in one generation.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ScoreMetrics {
    /// Fraction of decodes classified to the right species; `None` under H0.
    pub species_id_rate: Option<f64>,
    /// Fraction of bits decoded correctly over conspecific decodes.
    pub bit_rate: f64,
    /// Fraction of conspecific decodes with every bit correct.
    pub message_rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitnessTables {
    /// Mean fitness per sender, indexed by [`Species::index`].
    pub senders: [Vec<f64>; 2],
    pub receivers: [Vec<f64>; 2],
    pub scores: [ScoreMetrics; 2],
}

#[derive(Debug, Clone)]
pub struct GenerationEvaluation {
    pub tables: FitnessTables,
    /// Every decode, receiver-major. Empty unless requested.
    pub records: Vec<EvaluationRecord>,
    /// All signals: species A first, then sender, then message order.
    pub signals: Vec<Signal>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvaluationSettings {
    pub mode: FitnessMode,
    pub transmission: TransmissionMode,
    pub activation_slope: f64,
    pub keep_records: bool,
}

impl Default for EvaluationSettings {
    fn default() -> Self {
        EvaluationSettings {
            mode: FitnessMode::H1,
            transmission: TransmissionMode::Binary,
            activation_slope: crate::network::DEFAULT_SLOPE,
            keep_records: false,
        }
    }
}

/// Evaluated networks of the four populations, indexed by [`Species::index`].
pub struct Networks<'a> {
    pub senders: [&'a [FeedforwardNetwork]; 2],
    pub receivers: [&'a [FeedforwardNetwork]; 2],
}

struct ReceiverOutcome {
    total: f64,
    heard: usize,
    /// f_t for each conspecific signal, indexed `sender * 8 + message`.
    conspecific: Vec<f64>,
    id_correct: u64,
    bits_correct: u64,
    messages_correct: u64,
    records: Vec<EvaluationRecord>,
}

/// Builds networks from genomes and evaluates one generation.
pub fn evaluate_generation(
    senders: [&[Genome]; 2],
    receivers: [&[Genome]; 2],
    settings: &EvaluationSettings,
) -> Result<GenerationEvaluation> {
    let build = |gs: &[Genome]| -> Result<Vec<FeedforwardNetwork>> {
        gs.iter().map(|g| FeedforwardNetwork::build(g, settings.activation_slope)).collect()
    };
    let s = [build(senders[0])?, build(senders[1])?];
    let r = [build(receivers[0])?, build(receivers[1])?];
    evaluate_networks(
        &Networks { senders: [&s[0], &s[1]], receivers: [&r[0], &r[1]] },
        settings,
    )
}

pub fn evaluate_networks(nets: &Networks<'_>, settings: &EvaluationSettings) -> Result<GenerationEvaluation> {
    let size = nets.senders[0].len();
    if nets.senders.iter().chain(&nets.receivers).any(|p| p.len() != size) || size == 0 {
        return Err(Error::Config(format!(
            "population sizes differ or are empty: senders {}/{}, receivers {}/{}",
            nets.senders[0].len(),
            nets.senders[1].len(),
            nets.receivers[0].len(),
            nets.receivers[1].len()
        )));
    }

    let mut signals = Vec::with_capacity(2 * size * MESSAGE_COUNT);
    for sp in Species::ALL {
        for (i, net) in nets.senders[sp.index()].iter().enumerate() {
            for msg in Message::all() {
                signals.push(encode(net, msg, sp, i)?);
            }
        }
    }
    let heard: Vec<[f64; BANDS]> = signals.iter().map(|s| transmit(s, settings.transmission)).collect();
    let per_species = size * MESSAGE_COUNT;

    let jobs: Vec<(Species, usize)> =
        Species::ALL.iter().flat_map(|&sp| (0..size).map(move |r| (sp, r))).collect();
    let outcomes: Vec<ReceiverOutcome> = jobs
        .par_iter()
        .map(|&(sp, r)| {
            let net = &nets.receivers[sp.index()][r];
            let range = match settings.mode {
                FitnessMode::H1 => 0..signals.len(),
                FitnessMode::H0 => sp.index() * per_species..(sp.index() + 1) * per_species,
            };
            evaluate_receiver(net, sp, r, &signals[range.clone()], &heard[range], settings)
        })
        .collect::<Result<_>>()?;

    let mut tables = FitnessTables {
        senders: [vec![0.0; size], vec![0.0; size]],
        receivers: [vec![0.0; size], vec![0.0; size]],
        scores: [ScoreMetrics::default(); 2],
    };
    let mut records = Vec::new();
    for sp in Species::ALL {
        let k = sp.index();
        let (mut decodes, mut id_correct, mut bits, mut msgs) = (0u64, 0u64, 0u64, 0u64);
        for (r, out) in outcomes[k * size..(k + 1) * size].iter().enumerate() {
            tables.receivers[k][r] = out.total / out.heard as f64;
            for (sender, fts) in out.conspecific.chunks(MESSAGE_COUNT).enumerate() {
                tables.senders[k][sender] += fts.iter().sum::<f64>();
            }
            decodes += out.heard as u64;
            id_correct += out.id_correct;
            bits += out.bits_correct;
            msgs += out.messages_correct;
        }
        let evaluations_per_sender = (size * MESSAGE_COUNT) as f64;
        tables.senders[k].iter_mut().for_each(|f| *f /= evaluations_per_sender);
        let conspecific_decodes = (size * per_species) as f64;
        tables.scores[k] = ScoreMetrics {
            species_id_rate: match settings.mode {
                FitnessMode::H1 => Some(id_correct as f64 / decodes as f64),
                FitnessMode::H0 => None,
            },
            bit_rate: bits as f64 / (conspecific_decodes * MESSAGE_BITS as f64),
            message_rate: msgs as f64 / conspecific_decodes,
        };
    }
    if settings.keep_records {
        for out in outcomes {
            records.extend(out.records);
        }
    }
    Ok(GenerationEvaluation { tables, records, signals })
}

fn evaluate_receiver(
    net: &FeedforwardNetwork,
    species: Species,
    index: usize,
    signals: &[Signal],
    heard: &[[f64; BANDS]],
    settings: &EvaluationSettings,
) -> Result<ReceiverOutcome> {
    let species_enabled = settings.mode == FitnessMode::H1;
    let mut out = ReceiverOutcome {
        total: 0.0,
        heard: signals.len(),
        conspecific: Vec::with_capacity(signals.len()),
        id_correct: 0,
        bits_correct: 0,
        messages_correct: 0,
        records: Vec::new(),
    };
    for (sig, input) in signals.iter().zip(heard) {
        let decoded = decode(net, input)?;
        let conspecific = sig.origin_species == species;
        let id_correct = decoded.judged_conspecific() == conspecific;
        let n_correct = correct_bits(sig.source_message, &decoded);

        let decoding_enabled = match settings.mode {
            FitnessMode::H1 => conspecific && decoded.judged_conspecific(),
            FitnessMode::H0 => true,
        };
        let f_s = species_fitness(decoded.conspecific_confidence(), conspecific);
        let f_d = decoding_fitness(sig.source_message, &decoded);
        let f_b = bonus(species_enabled, if decoding_enabled { n_correct } else { 0 });
        let f_t = total_fitness(species_enabled, decoding_enabled, f_s, f_d, f_b);

        out.total += f_t;
        out.id_correct += id_correct as u64;
        if conspecific {
            out.conspecific.push(f_t);
            out.bits_correct += n_correct as u64;
            out.messages_correct += (n_correct == MESSAGE_BITS as u32) as u64;
        }
        if settings.keep_records {
            out.records.push(EvaluationRecord {
                sender_species: sig.origin_species,
                sender_index: sig.origin_sender,
                receiver_species: species,
                receiver_index: index,
                message: sig.source_message,
                decoded,
                species_id_correct: id_correct,
                correct_bits: n_correct,
                decoding_enabled,
                f_s,
                f_d,
                f_b,
                f_t,
            });
        }
    }
    Ok(out)
}
