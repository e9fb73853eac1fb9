//! Sectioned `key = value` run configuration.
//!
//! ```text
//! # comments start with '#'
//! [simulation]
//! generations = 300
//! mode = h1
//!
//! [neat]
//! population_size = 50
//! ```
//!
//! Overrides use dotted keys (`neat.c3=0.5`) or bare keys when the name is
//! unique across sections (`generations=2`).

use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::analysis::TsneConfig;
use crate::error::{Error, Result};
use crate::simulation::SimulationConfig;

pub const SECTIONS: [&str; 4] = ["simulation", "neat", "tsne", "analysis"];

/// Every accepted `section.key`, in file order.
pub const KEYS: [&str; 32] = [
    "simulation.generations",
    "simulation.species",
    "simulation.mode",
    "simulation.transmission",
    "simulation.seed",
    "simulation.log_detail",
    "simulation.signal_stride",
    "simulation.activation_slope",
    "neat.population_size",
    "neat.c1",
    "neat.c2",
    "neat.c3",
    "neat.compatibility_threshold",
    "neat.weight_mutate_rate",
    "neat.weight_perturb_stddev",
    "neat.weight_replace_rate",
    "neat.add_connection_rate",
    "neat.add_node_rate",
    "neat.survival_fraction",
    "neat.elitism_threshold",
    "neat.stagnation_limit",
    "tsne.perplexity",
    "tsne.iterations",
    "tsne.learning_rate",
    "tsne.early_exaggeration",
    "tsne.exaggeration_iterations",
    "tsne.initial_momentum",
    "tsne.final_momentum",
    "tsne.init_stddev",
    "analysis.smoothing_window",
    "analysis.cluster_generations",
    "analysis.alpha",
];

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisConfig {
    /// Moving-average window for score curves; 1 disables smoothing.
    pub smoothing_window: usize,
    /// Generations embedded for the cluster figure.
    pub cluster_generations: Vec<usize>,
    /// Significance level of the experiment report.
    pub alpha: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig { smoothing_window: 1, cluster_generations: vec![0, 12, 175, 299], alpha: 0.01 }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Settings {
    pub simulation: SimulationConfig,
    pub tsne: TsneConfig,
    pub analysis: AnalysisConfig,
}

fn parse<T: FromStr>(value: &str) -> std::result::Result<T, String>
where
    T::Err: Display,
{
    value.parse::<T>().map_err(|e| format!("invalid value `{value}`: {e}"))
}

fn join<T: Display>(xs: &[T]) -> String {
    xs.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

impl Settings {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut s = Settings::default();
        s.apply_text(&text, &path.display().to_string())?;
        Ok(s)
    }

    /// Applies a config file's contents; `origin` names the source in errors.
    pub fn apply_text(&mut self, text: &str, origin: &str) -> Result<()> {
        let mut section: Option<&str> = None;
        for (n, raw) in text.lines().enumerate() {
            let err = |message: String| Error::ConfigParse { path: origin.to_string(), line: n + 1, message };
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let name = name.trim();
                if !SECTIONS.contains(&name) {
                    return Err(err(format!("unknown section [{name}]; valid sections are {}", SECTIONS.join(", "))));
                }
                section = Some(name);
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(err(format!("expected `key = value`, found `{line}`")));
            };
            let Some(section) = section else {
                return Err(err(format!("key `{}` appears before any [section]", key.trim())));
            };
            let full = format!("{section}.{}", key.trim());
            if !KEYS.contains(&full.as_str()) {
                return Err(err(format!("unknown key `{full}`; valid keys are: {}", KEYS.join(", "))));
            }
            self.set(&full, value.trim()).map_err(|m| err(format!("{full}: {m}")))?;
        }
        Ok(())
    }

    /// Applies one `key=value` override.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Argument(format!("override `{assignment}` is not of the form key=value")))?;
        let full = resolve_key(key.trim())?;
        self.set(&full, value.trim()).map_err(|m| Error::Config(format!("{full}: {m}")))
    }

    pub fn validate(&self) -> Result<()> {
        self.simulation.validate()?;
        if self.analysis.smoothing_window < 1 {
            return Err(Error::Config("analysis.smoothing_window must be at least 1".into()));
        }
        if !(self.analysis.alpha > 0.0 && self.analysis.alpha < 1.0) {
            return Err(Error::Config("analysis.alpha must lie in (0, 1)".into()));
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<String> {
        let sim = &self.simulation;
        let neat = &sim.neat;
        let t = &self.tsne;
        let a = &self.analysis;
        Some(match key {
            "simulation.generations" => sim.generations.to_string(),
            "simulation.species" => "2".to_string(),
            "simulation.mode" => sim.mode.to_string(),
            "simulation.transmission" => sim.transmission.to_string(),
            "simulation.seed" => sim.seed.to_string(),
            "simulation.log_detail" => sim.log_detail.to_string(),
            "simulation.signal_stride" => sim.signal_stride.to_string(),
            "simulation.activation_slope" => sim.activation_slope.to_string(),
            "neat.population_size" => neat.population_size.to_string(),
            "neat.c1" => neat.c1.to_string(),
            "neat.c2" => neat.c2.to_string(),
            "neat.c3" => neat.c3.to_string(),
            "neat.compatibility_threshold" => neat.compatibility_threshold.to_string(),
            "neat.weight_mutate_rate" => neat.weight_mutate_rate.to_string(),
            "neat.weight_perturb_stddev" => neat.weight_perturb_stddev.to_string(),
            "neat.weight_replace_rate" => neat.weight_replace_rate.to_string(),
            "neat.add_connection_rate" => neat.add_connection_rate.to_string(),
            "neat.add_node_rate" => neat.add_node_rate.to_string(),
            "neat.survival_fraction" => neat.survival_fraction.to_string(),
            "neat.elitism_threshold" => neat.elitism_threshold.to_string(),
            "neat.stagnation_limit" => neat.stagnation_limit.to_string(),
            "tsne.perplexity" => t.perplexity.to_string(),
            "tsne.iterations" => t.iterations.to_string(),
            "tsne.learning_rate" => t.learning_rate.to_string(),
            "tsne.early_exaggeration" => t.early_exaggeration.to_string(),
            "tsne.exaggeration_iterations" => t.exaggeration_iterations.to_string(),
            "tsne.initial_momentum" => t.initial_momentum.to_string(),
            "tsne.final_momentum" => t.final_momentum.to_string(),
            "tsne.init_stddev" => t.init_stddev.to_string(),
            "analysis.smoothing_window" => a.smoothing_window.to_string(),
            "analysis.cluster_generations" => join(&a.cluster_generations),
            "analysis.alpha" => a.alpha.to_string(),
            _ => return None,
        })
    }

    fn set(&mut self, key: &str, v: &str) -> std::result::Result<(), String> {
        let sim = &mut self.simulation;
        let t = &mut self.tsne;
        let a = &mut self.analysis;
        match key {
            "simulation.generations" => sim.generations = parse(v)?,
            "simulation.species" => {
                if parse::<usize>(v)? != 2 {
                    return Err("only two species are supported".into());
                }
            }
            "simulation.mode" => sim.mode = parse(v)?,
            "simulation.transmission" => sim.transmission = parse(v)?,
            "simulation.seed" => sim.seed = parse(v)?,
            "simulation.log_detail" => sim.log_detail = parse(v)?,
            "simulation.signal_stride" => sim.signal_stride = parse(v)?,
            "simulation.activation_slope" => sim.activation_slope = parse(v)?,
            "neat.population_size" => sim.neat.population_size = parse(v)?,
            "neat.c1" => sim.neat.c1 = parse(v)?,
            "neat.c2" => sim.neat.c2 = parse(v)?,
            "neat.c3" => sim.neat.c3 = parse(v)?,
            "neat.compatibility_threshold" => sim.neat.compatibility_threshold = parse(v)?,
            "neat.weight_mutate_rate" => sim.neat.weight_mutate_rate = parse(v)?,
            "neat.weight_perturb_stddev" => sim.neat.weight_perturb_stddev = parse(v)?,
            "neat.weight_replace_rate" => sim.neat.weight_replace_rate = parse(v)?,
            "neat.add_connection_rate" => sim.neat.add_connection_rate = parse(v)?,
            "neat.add_node_rate" => sim.neat.add_node_rate = parse(v)?,
            "neat.survival_fraction" => sim.neat.survival_fraction = parse(v)?,
            "neat.elitism_threshold" => sim.neat.elitism_threshold = parse(v)?,
            "neat.stagnation_limit" => sim.neat.stagnation_limit = parse(v)?,
            "tsne.perplexity" => t.perplexity = parse(v)?,
            "tsne.iterations" => t.iterations = parse(v)?,
            "tsne.learning_rate" => t.learning_rate = parse(v)?,
            "tsne.early_exaggeration" => t.early_exaggeration = parse(v)?,
            "tsne.exaggeration_iterations" => t.exaggeration_iterations = parse(v)?,
            "tsne.initial_momentum" => t.initial_momentum = parse(v)?,
            "tsne.final_momentum" => t.final_momentum = parse(v)?,
            "tsne.init_stddev" => t.init_stddev = parse(v)?,
            "analysis.smoothing_window" => a.smoothing_window = parse(v)?,
            "analysis.cluster_generations" => {
                a.cluster_generations = v
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(parse)
                    .collect::<std::result::Result<_, _>>()?
            }
            "analysis.alpha" => a.alpha = parse(v)?,
            _ => return Err(format!("unknown key; valid keys are: {}", KEYS.join(", "))),
        }
        Ok(())
    }

    /// The file form of these settings; parsing it back yields equal settings.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for section in SECTIONS {
            if !out.is_empty() {
                out.push('\n');
            }
            out.push_str(&format!("[{section}]\n"));
            for key in KEYS.iter().filter(|k| k.split('.').next() == Some(section)) {
                let bare = &key[section.len() + 1..];
                out.push_str(&format!("{bare} = {}\n", self.get(key).unwrap_or_default()));
            }
        }
        out
    }
}

/// Maps a dotted or unique bare key to its `section.key` form.
pub fn resolve_key(key: &str) -> Result<String> {
    let unknown = || Error::UnknownKey { key: key.to_string(), valid: KEYS.join(", ") };
    if key.contains('.') {
        return KEYS.iter().find(|k| **k == key).map(|k| k.to_string()).ok_or_else(unknown);
    }
    let matches: Vec<&str> = KEYS.iter().copied().filter(|k| k.split_once('.').map(|(_, b)| b) == Some(key)).collect();
    match matches.as_slice() {
        [one] => Ok(one.to_string()),
        [] => Err(unknown()),
        many => Err(Error::Argument(format!("key `{key}` is ambiguous; use one of {}", many.join(", ")))),
    }
}

/// The simulation and NEAT settings as `(section.key, value)` pairs.
pub fn simulation_pairs(cfg: &SimulationConfig) -> Vec<(String, String)> {
    let s = Settings { simulation: cfg.clone(), ..Settings::default() };
    KEYS.iter()
        .filter(|k| k.starts_with("simulation.") || k.starts_with("neat."))
        .map(|k| (k.to_string(), s.get(k).unwrap_or_default()))
        .collect()
}

pub fn simulation_from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<SimulationConfig> {
    let mut s = Settings::default();
    for (key, value) in pairs {
        if !(key.starts_with("simulation.") || key.starts_with("neat.")) || !KEYS.contains(&key) {
            return Err(Error::UnknownKey { key: key.to_string(), valid: KEYS[..21].join(", ") });
        }
        s.set(key, value).map_err(|m| Error::Config(format!("{key}: {m}")))?;
    }
    Ok(s.simulation)
}
