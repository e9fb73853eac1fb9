//! On-disk formats: JSON-lines run logs, summary and analysis CSVs, and the
//! experiment significance report.
//!
//! A run log starts with a header object echoing every simulation and NEAT
//! setting, followed by one [`GenerationLog`] object per line.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::{mean, sample_std, score_curves, spectrogram};
use crate::config::{simulation_from_pairs, simulation_pairs};
use crate::error::{Error, Result};
use crate::fitness::FitnessMode;
use crate::simulation::{ExperimentLog, GenerationComparison, GenerationLog, RunLog, SignificanceReport};
use crate::soundscape::Species;

pub const SUMMARY_HEADER: [&str; 16] = [
    "generation",
    "species",
    "band0",
    "band1",
    "band2",
    "band3",
    "band4",
    "band5",
    "band6",
    "band7",
    "band8",
    "species_id_rate",
    "bit_rate",
    "msg_rate",
    "max_fitness",
    "mean_fitness",
];

pub const EXPERIMENT_HEADER: [&str; 8] =
    ["generation", "h1_sil_mean", "h1_sil_std", "h0_sil_mean", "h0_sil_std", "welch_t", "welch_df", "welch_p"];

const NA: &str = "NA";

#[derive(Serialize, Deserialize)]
struct Header {
    config: BTreeMap<String, String>,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    Ok(csv::Writer::from_writer(create(path)?))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Malformed { path: path.display().to_string(), line: 0, message: format!("{other:?}") },
    }
}

fn write_rows<I, R>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv_writer(path)?;
    w.write_record(header).map_err(|e| csv_error(path, e))?;
    for row in rows {
        w.write_record(row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_run_log(log: &RunLog, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    let header = Header { config: simulation_pairs(&log.config).into_iter().collect() };
    let io = |e| Error::io(path, e);
    serde_json::to_writer(&mut w, &header).map_err(|e| Error::io(path, e.into()))?;
    w.write_all(b"\n").map_err(io)?;
    for g in &log.generations {
        serde_json::to_writer(&mut w, g).map_err(|e| Error::io(path, e.into()))?;
        w.write_all(b"\n").map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn read_run_log(path: &Path) -> Result<RunLog> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let malformed = |line: usize, message: String| Error::Malformed { path: path.display().to_string(), line, message };
    let mut lines = BufReader::new(file).lines().enumerate();
    let (_, first) = lines.next().ok_or_else(|| malformed(1, "empty run log".into()))?;
    let first = first.map_err(|e| Error::io(path, e))?;
    let header: Header = serde_json::from_str(&first).map_err(|e| malformed(1, e.to_string()))?;
    let config = simulation_from_pairs(header.config.iter().map(|(k, v)| (k.as_str(), v.as_str())))?;
    let mut generations = Vec::new();
    for (i, line) in lines {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let g: GenerationLog = serde_json::from_str(&line).map_err(|e| malformed(i + 1, e.to_string()))?;
        generations.push(g);
    }
    Ok(RunLog { config, generations, elapsed: Default::default() })
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| NA.to_string(), |v| v.to_string())
}

/// One row per generation and species; fitness columns describe that
/// species' receiver population.
pub fn write_summary_csv(log: &RunLog, path: &Path) -> Result<()> {
    let rows = log.generations.iter().flat_map(|g| {
        Species::ALL.map(|sp| {
            let s = sp.index();
            let mut row = vec![g.generation.to_string(), sp.to_string()];
            row.extend(g.band_usage[s].iter().map(u32::to_string));
            row.extend([
                opt(g.scores[s].species_id_rate),
                g.scores[s].bit_rate.to_string(),
                g.scores[s].message_rate.to_string(),
                g.receivers[s].max.to_string(),
                g.receivers[s].mean.to_string(),
            ]);
            row
        })
    });
    write_rows(path, &SUMMARY_HEADER, rows)
}

pub fn write_experiment_csv(comparisons: &[GenerationComparison], path: &Path) -> Result<()> {
    let rows = comparisons.iter().map(|c| {
        vec![
            c.generation.to_string(),
            c.h1_mean.to_string(),
            c.h1_std.to_string(),
            c.h0_mean.to_string(),
            c.h0_std.to_string(),
            c.welch.t.to_string(),
            c.welch.df.to_string(),
            c.welch.p.to_string(),
        ]
    });
    write_rows(path, &EXPERIMENT_HEADER, rows)
}

pub fn run_file_stem(mode: Option<FitnessMode>, seed: u64) -> String {
    match mode {
        Some(m) => format!("{m}_run_{seed}"),
        None => format!("run_{seed}"),
    }
}

/// Writes per-run logs and summaries, `experiment.csv` and
/// `significance.txt` into `dir`; returns the paths written.
pub fn write_experiment(exp: &ExperimentLog, dir: &Path, alpha: f64) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for run in exp.h1.iter().chain(&exp.h0) {
        let stem = run_file_stem(Some(run.config.mode), run.seed());
        let log = dir.join(format!("{stem}.log"));
        let csv = dir.join(format!("{stem}.csv"));
        write_run_log(run, &log)?;
        write_summary_csv(run, &csv)?;
        written.extend([log, csv]);
    }
    let csv = dir.join("experiment.csv");
    write_experiment_csv(&exp.comparisons, &csv)?;
    let report = dir.join("significance.txt");
    std::fs::write(&report, SignificanceReport::new(&exp.comparisons, alpha).to_string())
        .map_err(|e| Error::io(&report, e))?;
    written.extend([csv, report]);
    Ok(written)
}

/// Long-form spectrogram: per species, one row per band, one column per generation.
pub fn write_spectrogram_csv(run: &RunLog, path: &Path) -> Result<()> {
    let spec = spectrogram(run);
    let gens = spec[0].generations();
    let mut header = vec!["species".to_string(), "band".to_string()];
    header.extend((0..gens).map(|g| format!("g{g}")));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows = spec.iter().flat_map(|s| {
        s.rates().into_iter().enumerate().map(move |(band, rates)| {
            let mut row = vec![s.species.to_string(), band.to_string()];
            row.extend(rates.iter().map(f64::to_string));
            row
        })
    });
    write_rows(path, &header, rows)
}

pub fn write_scores_csv(run: &RunLog, window: usize, path: &Path) -> Result<()> {
    let curves = Species::ALL.map(|sp| score_curves(run, sp, window));
    let rows = (0..run.generations.len()).flat_map(|g| {
        let curves = &curves;
        Species::ALL.map(move |sp| {
            let c = &curves[sp.index()];
            vec![
                g.to_string(),
                sp.to_string(),
                opt(c.species_id.get(g).copied()),
                c.bit[g].to_string(),
                c.message[g].to_string(),
            ]
        })
    });
    write_rows(path, &["generation", "species", "species_id_rate", "bit_rate", "msg_rate"], rows)
}

pub fn write_run_silhouette_csv(run: &RunLog, path: &Path) -> Result<()> {
    let rows = run.generations.iter().map(|g| vec![g.generation.to_string(), g.silhouette.to_string()]);
    write_rows(path, &["generation", "silhouette"], rows)
}

/// Cross-run silhouette mean and sample standard deviation per generation.
pub fn write_condition_silhouette_csv(runs: &[RunLog], path: &Path) -> Result<()> {
    let gens = runs.iter().map(|r| r.generations.len()).min().unwrap_or(0);
    let rows = (0..gens).map(|g| {
        let xs: Vec<f64> = runs.iter().map(|r| r.generations[g].silhouette).collect();
        vec![g.to_string(), mean(&xs).to_string(), sample_std(&xs).to_string()]
    });
    write_rows(path, &["generation", "mean", "std"], rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingRow {
    pub point_index: usize,
    pub species: Species,
    pub x: f64,
    pub y: f64,
    pub generation: usize,
}

pub fn write_embedding_csv(rows: &[EmbeddingRow], path: &Path) -> Result<()> {
    let rows = rows.iter().map(|r| {
        vec![r.point_index.to_string(), r.species.to_string(), r.x.to_string(), r.y.to_string(), r.generation.to_string()]
    });
    write_rows(path, &["point_index", "species", "x", "y", "generation"], rows)
}

/// A CSV file held as strings, with typed column access.
#[derive(Debug, Clone)]
pub struct CsvTable {
    path: String,
    headers: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn read(path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
        let headers = r.headers().map_err(|e| csv_error(path, e))?.iter().map(str::to_string).collect();
        let rows = r
            .records()
            .map(|rec| rec.map(|rec| rec.iter().map(str::to_string).collect()))
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| csv_error(path, e))?;
        Ok(CsvTable { path: path.display().to_string(), headers, rows })
    }

    pub fn headers(&self) -> &[String] {
        &self.headers
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    fn index(&self, column: &str) -> Result<usize> {
        self.headers
            .iter()
            .position(|h| h == column)
            .ok_or_else(|| Error::MissingColumn { column: column.to_string(), path: self.path.clone() })
    }

    pub fn require(&self, columns: &[&str]) -> Result<()> {
        columns.iter().try_for_each(|c| self.index(c).map(drop))
    }

    pub fn strings(&self, column: &str) -> Result<Vec<&str>> {
        let i = self.index(column)?;
        Ok(self.rows.iter().map(|r| r.get(i).map_or("", String::as_str)).collect())
    }

    /// Numeric column; `NA` cells read as `None`.
    pub fn floats(&self, column: &str) -> Result<Vec<Option<f64>>> {
        let i = self.index(column)?;
        self.rows
            .iter()
            .enumerate()
            .map(|(n, r)| match r.get(i).map(String::as_str) {
                Some(NA) => Ok(None),
                Some(v) => v.parse().map(Some).map_err(|_| Error::Malformed {
                    path: self.path.clone(),
                    line: n + 2,
                    message: format!("column `{column}`: `{v}` is not a number"),
                }),
                None => Err(Error::Malformed { path: self.path.clone(), line: n + 2, message: "short row".into() }),
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulation::{run_simulation, LogDetail, SimulationConfig};
    use crate::soundscape::BANDS;
    use crate::NeatConfig;

    fn small(mode: FitnessMode) -> RunLog {
        run_simulation(&SimulationConfig {
            generations: 3,
            mode,
            seed: 3,
            log_detail: LogDetail::FullSignals,
            neat: NeatConfig { population_size: 5, ..NeatConfig::default() },
            ..SimulationConfig::default()
        })
        .unwrap()
    }

    #[test]
    fn run_log_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        for mode in [FitnessMode::H1, FitnessMode::H0] {
            let log = small(mode);
            let path = dir.path().join("nested/run.log");
            write_run_log(&log, &path).unwrap();
            assert_eq!(read_run_log(&path).unwrap(), log);
        }
    }

    #[test]
    fn summary_rows_and_na() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        write_summary_csv(&small(FitnessMode::H0), &path).unwrap();
        let t = CsvTable::read(&path).unwrap();
        assert_eq!(t.headers(), SUMMARY_HEADER);
        assert_eq!(t.len(), 2 * 3);
        assert!(t.floats("species_id_rate").unwrap().iter().all(Option::is_none));
        assert!(matches!(t.floats("nope"), Err(Error::MissingColumn { .. })));
    }

    #[test]
    fn spectrogram_has_nine_rows_per_species() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("spec.csv");
        write_spectrogram_csv(&small(FitnessMode::H1), &path).unwrap();
        let t = CsvTable::read(&path).unwrap();
        assert_eq!(t.len(), 2 * BANDS);
        assert_eq!(t.headers().len(), 2 + 3);
        assert!(t.floats("g2").unwrap().iter().all(|r| (0.0..=1.0).contains(&r.unwrap())));
    }

    #[test]
    fn missing_file_names_path() {
        let e = read_run_log(Path::new("/nonexistent/run.log")).unwrap_err().to_string();
        assert!(e.contains("/nonexistent/run.log"), "{e}");
    }
}
