use crate::simulation::RunLog;
use crate::soundscape::{Species, BANDS};

/// Per-generation score series for one species.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreCurves {
    /// Empty under H0.
    pub species_id: Vec<f64>,
    pub bit: Vec<f64>,
    pub message: Vec<f64>,
}

/// Trailing moving average; `window <= 1` returns the input unchanged.
pub fn moving_average(xs: &[f64], window: usize) -> Vec<f64> {
    if window <= 1 {
        return xs.to_vec();
    }
    let mut sum = 0.0;
    let mut out = Vec::with_capacity(xs.len());
    for (i, &x) in xs.iter().enumerate() {
        sum += x;
        if i >= window {
            sum -= xs[i - window];
        }
        out.push(sum / (i + 1).min(window) as f64);
    }
    out
}

pub fn score_curves(run: &RunLog, species: Species, window: usize) -> ScoreCurves {
    let s = species.index();
    let gens = &run.generations;
    let species_id: Vec<f64> = gens.iter().filter_map(|g| g.scores[s].species_id_rate).collect();
    let bit: Vec<f64> = gens.iter().map(|g| g.scores[s].bit_rate).collect();
    let message: Vec<f64> = gens.iter().map(|g| g.scores[s].message_rate).collect();
    ScoreCurves {
        species_id: moving_average(&species_id, window),
        bit: moving_average(&bit, window),
        message: moving_average(&message, window),
    }
}

/// Band usage of one species: `counts[band][generation]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram {
    pub species: Species,
    pub counts: Vec<Vec<u32>>,
    /// Signals emitted per generation; the denominator of [`Spectrogram::rates`].
    pub signals_per_generation: usize,
}

impl Spectrogram {
    pub fn generations(&self) -> usize {
        self.counts.first().map_or(0, Vec::len)
    }

    pub fn rates(&self) -> Vec<Vec<f64>> {
        let n = self.signals_per_generation as f64;
        self.counts.iter().map(|row| row.iter().map(|&c| f64::from(c) / n).collect()).collect()
    }

    /// Usage per band summed over `generations`.
    pub fn totals(&self, generations: std::ops::Range<usize>) -> [u64; BANDS] {
        let mut t = [0u64; BANDS];
        for (band, row) in self.counts.iter().enumerate() {
            t[band] = row[generations.clone()].iter().map(|&c| u64::from(c)).sum();
        }
        t
    }
}

pub fn spectrogram(run: &RunLog) -> [Spectrogram; 2] {
    Species::ALL.map(|species| Spectrogram {
        species,
        counts: (0..BANDS)
            .map(|band| run.generations.iter().map(|g| g.band_usage[species.index()][band]).collect())
            .collect(),
        signals_per_generation: run.signals_per_species(),
    })
}

/// Indices of the three most used bands, ties broken by lower index.
pub fn top_bands(totals: &[u64; BANDS]) -> [usize; 3] {
    let mut order: Vec<usize> = (0..BANDS).collect();
    order.sort_by(|&a, &b| totals[b].cmp(&totals[a]).then(a.cmp(&b)));
    [order[0], order[1], order[2]]
}

/// Share of all usage carried by the three most used bands; 0 for no usage.
pub fn top_share(totals: &[u64; BANDS]) -> f64 {
    let all: u64 = totals.iter().sum();
    if all == 0 {
        return 0.0;
    }
    let top: u64 = top_bands(totals).iter().map(|&b| totals[b]).sum();
    top as f64 / all as f64
}
