//! Command-line front end: `run`, `experiment`, `analyze` and `plot`.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::analysis::tsne_embed;
use crate::config::Settings;
use crate::error::{Error, Result};
use crate::files::{
    read_run_log, run_file_stem, write_condition_silhouette_csv, write_embedding_csv, write_experiment,
    write_experiment_csv, write_run_log, write_run_silhouette_csv, write_scores_csv, write_spectrogram_csv,
    write_summary_csv, CsvTable, EmbeddingRow,
};
use crate::fitness::FitnessMode;
use crate::plot::{clusters_svg, scores_svg, silhouette_svg, spectrogram_svg, Figure};
use crate::simulation::{compare_conditions, run_experiment, run_simulation, RunLog, SignificanceReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FAILURE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "acoustic-niche", version, about = "Co-evolving senders and receivers in a shared 9-band soundscape")]
pub struct Cli {
    /// Worker threads for evaluation and independent runs (default: all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Sectioned key=value configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// Override a setting, e.g. `--set generations=2` or `--set neat.c3=0.5`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,

    /// Output directory.
    #[arg(short, long, env = "ACOUSTIC_NICHE_OUT", default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one simulation and write its log and summary CSV.
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run seed-paired H1/H0 simulations and compare their silhouettes.
    Experiment {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 20)]
        runs: usize,
        #[arg(long, default_value_t = 0)]
        seed_base: u64,
    },
    /// Derive figure data from a run log, or from an experiment directory.
    Analyze {
        #[command(flatten)]
        common: Common,
        input: PathBuf,
    },
    /// Render an SVG figure from analysis CSVs.
    Plot {
        #[command(flatten)]
        common: Common,
        /// spectrogram, silhouette, clusters or scores.
        figure: Figure,
        input: PathBuf,
        /// Single-run silhouette CSV drawn over the silhouette figure.
        #[arg(long)]
        overlay: Option<PathBuf>,
    },
}

fn settings(common: &Common) -> Result<Settings> {
    let mut s = match &common.config {
        Some(path) => Settings::load(path)?,
        None => Settings::default(),
    };
    for o in &common.overrides {
        s.apply_override(o)?;
    }
    s.validate()?;
    Ok(s)
}

fn report_run(log: &RunLog, out: &mut dyn Write) -> std::io::Result<()> {
    let Some(last) = log.generations.last() else { return Ok(()) };
    writeln!(out, "seed {} ({}), {} generations in {:.2?}", log.seed(), log.config.mode, log.generations.len(), log.elapsed)?;
    match last.species_id_rate() {
        Some(r) => writeln!(out, "species-ID rate: {r:.4}")?,
        None => writeln!(out, "species-ID rate: NA")?,
    }
    for (s, name) in ["A", "B"].iter().enumerate() {
        writeln!(out, "species {name}: bit rate {:.4}, message rate {:.4}", last.scores[s].bit_rate, last.scores[s].message_rate)?;
    }
    writeln!(out, "silhouette: {:.4}", last.silhouette)
}

/// Runs one simulation; writes `run_{seed}.log` and `run_{seed}.csv` into `dir`.
pub fn cmd_run(settings: &Settings, dir: &Path, out: &mut dyn Write) -> Result<RunLog> {
    let log = run_simulation(&settings.simulation)?;
    let stem = run_file_stem(None, log.seed());
    write_run_log(&log, &dir.join(format!("{stem}.log")))?;
    write_summary_csv(&log, &dir.join(format!("{stem}.csv")))?;
    report_run(&log, out).map_err(|e| Error::io("<stdout>", e))?;
    Ok(log)
}

pub fn cmd_experiment(settings: &Settings, runs: usize, seed_base: u64, dir: &Path, out: &mut dyn Write) -> Result<()> {
    let exp = run_experiment(&settings.simulation, runs, seed_base)?;
    write_experiment(&exp, dir, settings.analysis.alpha)?;
    let io = |e| Error::io("<stdout>", e);
    for run in exp.h1.iter().chain(&exp.h0) {
        writeln!(out, "{} seed {}: {:.2?}", run.config.mode, run.seed(), run.elapsed).map_err(io)?;
    }
    write!(out, "{}", SignificanceReport::new(&exp.comparisons, settings.analysis.alpha)).map_err(io)
}

fn embeddings(settings: &Settings, log: &RunLog) -> Result<Vec<EmbeddingRow>> {
    let wanted: Vec<_> = log
        .generations
        .iter()
        .filter(|g| settings.analysis.cluster_generations.contains(&g.generation))
        .filter_map(|g| g.signals.as_ref().map(|s| (g.generation, s)))
        .collect();
    let per_generation: Vec<Vec<EmbeddingRow>> = wanted
        .par_iter()
        .map(|&(generation, signals)| {
            let points: Vec<&[f64]> = signals.iter().map(|s| &s.channels[..]).collect();
            let e = tsne_embed(&points, &settings.tsne, log.seed() ^ generation as u64)?;
            Ok(e.points
                .iter()
                .zip(signals)
                .enumerate()
                .map(|(i, (p, s))| EmbeddingRow { point_index: i, species: s.species, x: p[0], y: p[1], generation })
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(per_generation.concat())
}

/// With a run log: writes `spectrogram.csv`, `scores.csv`, `silhouette.csv`
/// and, for logs with stored signals, `embedding.csv`. With an experiment
/// directory: writes `silhouette_h1.csv`, `silhouette_h0.csv` and
/// `experiment.csv` from the run logs it contains.
pub fn cmd_analyze(settings: &Settings, input: &Path, dir: &Path, out: &mut dyn Write) -> Result<Vec<PathBuf>> {
    let io = |e| Error::io("<stdout>", e);
    let mut written = Vec::new();
    if input.is_dir() {
        let mut conditions: [Vec<RunLog>; 2] = Default::default();
        let mut entries: Vec<PathBuf> = std::fs::read_dir(input)
            .map_err(|e| Error::io(input, e))?
            .map(|e| e.map(|e| e.path()).map_err(|err| Error::io(input, err)))
            .collect::<Result<_>>()?;
        entries.sort();
        for path in entries {
            let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("");
            for (k, mode) in [FitnessMode::H1, FitnessMode::H0].iter().enumerate() {
                if name.starts_with(&format!("{mode}_run_")) && name.ends_with(".log") {
                    conditions[k].push(read_run_log(&path)?);
                }
            }
        }
        let [h1, h0] = &conditions;
        if h1.len() < 2 || h0.len() < 2 {
            return Err(Error::Argument(format!(
                "{} holds {} H1 and {} H0 run logs; at least 2 of each are needed",
                input.display(),
                h1.len(),
                h0.len()
            )));
        }
        for (runs, name) in [(h1, "silhouette_h1.csv"), (h0, "silhouette_h0.csv")] {
            let path = dir.join(name);
            write_condition_silhouette_csv(runs, &path)?;
            written.push(path);
        }
        let comparisons = compare_conditions(h1, h0)?;
        let path = dir.join("experiment.csv");
        write_experiment_csv(&comparisons, &path)?;
        written.push(path);
        write!(out, "{}", SignificanceReport::new(&comparisons, settings.analysis.alpha)).map_err(io)?;
    } else {
        let log = read_run_log(input)?;
        let w = settings.analysis.smoothing_window;
        type Job<'a> = &'a dyn Fn(&Path) -> Result<()>;
        let jobs: [(&str, Job); 3] = [
            ("spectrogram.csv", &|p| write_spectrogram_csv(&log, p)),
            ("scores.csv", &|p| write_scores_csv(&log, w, p)),
            ("silhouette.csv", &|p| write_run_silhouette_csv(&log, p)),
        ];
        for (name, job) in jobs {
            let path = dir.join(name);
            job(&path)?;
            written.push(path);
        }
        let rows = embeddings(settings, &log)?;
        if rows.is_empty() {
            writeln!(out, "no stored signals for the cluster generations; skipping embedding.csv").map_err(io)?;
        } else {
            let path = dir.join("embedding.csv");
            write_embedding_csv(&rows, &path)?;
            written.push(path);
        }
    }
    for p in &written {
        writeln!(out, "wrote {}", p.display()).map_err(io)?;
    }
    Ok(written)
}

pub fn cmd_plot(
    settings: &Settings,
    figure: Figure,
    input: &Path,
    overlay: Option<&Path>,
    dir: &Path,
) -> Result<PathBuf> {
    let table = CsvTable::read(input)?;
    let svg = match figure {
        Figure::Spectrogram => spectrogram_svg(&table)?,
        Figure::Silhouette => {
            let overlay = overlay.map(CsvTable::read).transpose()?;
            silhouette_svg(&table, overlay.as_ref())?
        }
        Figure::Clusters => clusters_svg(&table, &settings.analysis.cluster_generations)?,
        Figure::Scores => scores_svg(&table)?,
    };
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join(format!("{figure}.svg"));
    std::fs::write(&path, svg).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::ConfigParse { .. } | Error::UnknownKey { .. } | Error::Argument(_) => EXIT_USAGE,
        _ => EXIT_FAILURE,
    }
}

fn dispatch(cli: Cli, out: &mut (dyn Write + Send)) -> Result<()> {
    match cli.command {
        Command::Run { common, seed } => {
            let mut s = settings(&common)?;
            if let Some(seed) = seed {
                s.simulation.seed = seed;
            }
            cmd_run(&s, &common.out, out).map(drop)
        }
        Command::Experiment { common, runs, seed_base } => {
            cmd_experiment(&settings(&common)?, runs, seed_base, &common.out, out)
        }
        Command::Analyze { common, input } => cmd_analyze(&settings(&common)?, &input, &common.out, out).map(drop),
        Command::Plot { common, figure, input, overlay } => {
            let path = cmd_plot(&settings(&common)?, figure, &input, overlay.as_deref(), &common.out)?;
            writeln!(out, "wrote {}", path.display()).map_err(|e| Error::io("<stdout>", e))
        }
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn main_with_args<I, T>(args: I, out: &mut (dyn Write + Send), err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    let result = match cli.workers {
        Some(0) => Err(Error::Argument("--workers must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Argument(format!("cannot start {n} workers: {e}")))
            .and_then(|pool| pool.install(|| dispatch(cli, out))),
        None => dispatch(cli, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}
