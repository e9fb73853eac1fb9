//! Messages, 9-band signals, transmission and decoding.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::FeedforwardNetwork;

pub const BANDS: usize = 9;
pub const MESSAGE_BITS: usize = 3;
pub const MESSAGE_COUNT: usize = 1 << MESSAGE_BITS;
pub const RECEIVER_OUTPUTS: usize = MESSAGE_BITS + 1;

/// A band is in use, and a signal judged conspecific, at or above this level.
pub const THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Species {
    A,
    B,
}

impl Species {
    pub const ALL: [Species; 2] = [Species::A, Species::B];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn other(self) -> Species {
        match self {
            Species::A => Species::B,
            Species::B => Species::A,
        }
    }
}

impl fmt::Display for Species {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Species::A => "A",
            Species::B => "B",
        })
    }
}

impl FromStr for Species {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" | "a" => Ok(Species::A),
            "B" | "b" => Ok(Species::B),
            _ => Err(Error::Argument(format!("unknown species `{s}` (expected A or B)"))),
        }
    }
}

/// A 3-bit message; bit `i` of the index is `o_i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Message(u8);

impl Message {
    pub fn new(index: u8) -> Result<Self> {
        if (index as usize) < MESSAGE_COUNT {
            Ok(Message(index))
        } else {
            Err(Error::Argument(format!("message index {index} exceeds {MESSAGE_BITS} bits")))
        }
    }

    pub fn from_bits(bits: [bool; MESSAGE_BITS]) -> Self {
        Message(bits.iter().enumerate().map(|(i, &b)| (b as u8) << i).sum())
    }

    pub fn all() -> impl Iterator<Item = Message> {
        (0..MESSAGE_COUNT as u8).map(Message)
    }

    pub fn index(self) -> u8 {
        self.0
    }

    pub fn bit(self, i: usize) -> bool {
        (self.0 >> i) & 1 == 1
    }

    pub fn as_inputs(self) -> [f64; MESSAGE_BITS] {
        std::array::from_fn(|i| if self.bit(i) { 1.0 } else { 0.0 })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransmissionMode {
    /// Receivers hear the binarized 9-bit soundscape.
    #[default]
    Binary,
    /// Receivers hear raw sender activations.
    Continuous,
}

impl FromStr for TransmissionMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "binary" => Ok(TransmissionMode::Binary),
            "continuous" => Ok(TransmissionMode::Continuous),
            _ => Err(Error::Argument(format!("unknown transmission mode `{s}` (expected binary or continuous)"))),
        }
    }
}

impl fmt::Display for TransmissionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TransmissionMode::Binary => "binary",
            TransmissionMode::Continuous => "continuous",
        })
    }
}

/// One sender emission into the soundscape.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    pub channels: [f64; BANDS],
    used_bands: [bool; BANDS],
    pub origin_species: Species,
    pub origin_sender: usize,
    pub source_message: Message,
}

impl Signal {
    pub fn new(channels: [f64; BANDS], origin_species: Species, origin_sender: usize, source_message: Message) -> Self {
        Signal {
            channels,
            used_bands: channels.map(|c| c >= THRESHOLD),
            origin_species,
            origin_sender,
            source_message,
        }
    }

    pub fn used_bands(&self) -> &[bool; BANDS] {
        &self.used_bands
    }
}

/// A receiver's reading of a signal: `m[0..3]` message bits, `m[3]`
/// conspecific confidence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecodedOutput {
    pub m: [f64; RECEIVER_OUTPUTS],
}

impl DecodedOutput {
    pub fn bits(&self) -> &[f64] {
        &self.m[..MESSAGE_BITS]
    }

    pub fn conspecific_confidence(&self) -> f64 {
        self.m[MESSAGE_BITS]
    }

    pub fn judged_conspecific(&self) -> bool {
        self.conspecific_confidence() >= THRESHOLD
    }
}

pub fn encode(sender: &FeedforwardNetwork, msg: Message, species: Species, sender_index: usize) -> Result<Signal> {
    if sender.n_inputs() != MESSAGE_BITS || sender.n_outputs() != BANDS {
        return Err(Error::Arity { expected: MESSAGE_BITS, got: sender.n_inputs() });
    }
    let mut channels = [0.0; BANDS];
    sender.activate_into(&msg.as_inputs(), &mut channels)?;
    Ok(Signal::new(channels, species, sender_index, msg))
}

/// What a receiver hears of a signal. No mixing, noise or attenuation.
pub fn transmit(sig: &Signal, mode: TransmissionMode) -> [f64; BANDS] {
    match mode {
        TransmissionMode::Binary => sig.used_bands.map(|u| if u { 1.0 } else { 0.0 }),
        TransmissionMode::Continuous => sig.channels,
    }
}

pub fn decode(receiver: &FeedforwardNetwork, heard: &[f64]) -> Result<DecodedOutput> {
    if receiver.n_inputs() != BANDS || receiver.n_outputs() != RECEIVER_OUTPUTS {
        return Err(Error::Arity { expected: BANDS, got: receiver.n_inputs() });
    }
    let mut m = [0.0; RECEIVER_OUTPUTS];
    receiver.activate_into(heard, &mut m)?;
    Ok(DecodedOutput { m })
}

/// Per-species count of signals using each band, indexed by [`Species::index`].
pub type BandUsage = [[u32; BANDS]; 2];

pub fn band_usage<'a>(signals: impl IntoIterator<Item = &'a Signal>) -> BandUsage {
    let mut counts = [[0; BANDS]; 2];
    for s in signals {
        for (c, &used) in counts[s.origin_species.index()].iter_mut().zip(s.used_bands()) {
            *c += used as u32;
        }
    }
    counts
}
