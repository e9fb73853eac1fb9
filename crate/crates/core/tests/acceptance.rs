//! Acceptance suite: one verdict line per criterion, non-zero exit if any fails.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use acoustic_niche::analysis::{
    kl_divergence, joint_affinities, silhouette_score, spectrogram, student_t_cdf, top_bands, top_share, tsne_embed,
    welch_t_test, TsneConfig,
};
use acoustic_niche::cli::main_with_args;
use acoustic_niche::fitness::{bonus, decoding_fitness, f_adj, species_fitness, total_fitness};
use acoustic_niche::neat::{NeatConfig, Population};
use acoustic_niche::network::{FeedforwardNetwork, DEFAULT_SLOPE};
use acoustic_niche::rng::{stream, Stream};
use acoustic_niche::simulation::{run_experiment, ExperimentLog, RunLog, SimulationConfig};
use acoustic_niche::soundscape::{DecodedOutput, Message};
use rand::Rng;
use rand_distr::{Distribution, Normal};

type Verdict = Result<String, String>;

fn check(ok: bool, detail: String) -> Verdict {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

// ---- criteria 1-3: the paired experiment -------------------------------

const RUNS: usize = 10;
const TAIL: std::ops::Range<usize> = 250..300;

fn experiment() -> ExperimentLog {
    let exp = run_experiment(&SimulationConfig::default(), RUNS, 0).expect("experiment runs");
    assert_eq!(exp.h1.len(), RUNS);
    assert_eq!(exp.h0.len(), RUNS);
    exp
}

fn niche_significance(exp: &ExperimentLog) -> Verdict {
    let window: Vec<_> = exp.comparisons.iter().filter(|c| (50..300).contains(&c.generation)).collect();
    let significant = window.iter().filter(|c| c.welch.p < 0.05).count() as f64 / window.len() as f64;
    let h1 = window.iter().map(|c| c.h1_mean).sum::<f64>() / window.len() as f64;
    let h0 = window.iter().map(|c| c.h0_mean).sum::<f64>() / window.len() as f64;
    check(
        window.len() == 250 && significant >= 0.8 && h1 > h0,
        format!("p < 0.05 in {:.1}% of generations 50-299; mean silhouette H1 {h1:.4} vs H0 {h0:.4}", 100.0 * significant),
    )
}

fn species_id_rate(exp: &ExperimentLog) -> Verdict {
    let per_run: Vec<f64> = exp
        .h1
        .iter()
        .map(|r| r.generations[TAIL].iter().map(|g| g.species_id_rate().unwrap()).sum::<f64>() / TAIL.len() as f64)
        .collect();
    let mean = per_run.iter().sum::<f64>() / per_run.len() as f64;
    check((0.65..=0.95).contains(&mean), format!("mean species-ID rate over generations 250-299: {mean:.4}"))
}

/// (runs where both species' top-3 share ≥ 0.6, mean top-3 overlap, shares)
fn band_convergence(runs: &[RunLog]) -> (usize, f64, Vec<[f64; 2]>) {
    let mut converged = 0;
    let mut overlap = 0.0;
    let mut shares = Vec::new();
    for run in runs {
        let totals = spectrogram(run).map(|s| s.totals(TAIL));
        let share = [top_share(&totals[0]), top_share(&totals[1])];
        if share.iter().all(|&s| s >= 0.6) {
            converged += 1;
        }
        let (a, b) = (top_bands(&totals[0]), top_bands(&totals[1]));
        overlap += a.iter().filter(|x| b.contains(x)).count() as f64;
        shares.push(share);
    }
    (converged, overlap / runs.len() as f64, shares)
}

fn band_convergence_verdict(exp: &ExperimentLog) -> Verdict {
    let (converged, h1_overlap, shares) = band_convergence(&exp.h1);
    let (_, h0_overlap, _) = band_convergence(&exp.h0);
    let min_share = shares.iter().map(|s| s[0].min(s[1])).fold(f64::INFINITY, f64::min);
    let max_share = shares.iter().map(|s| s[0].min(s[1])).fold(0.0, f64::max);
    check(
        converged >= 7 && h1_overlap < h0_overlap,
        format!(
            "{converged}/{RUNS} H1 runs with top-3 share >= 0.6 for both species (weaker species' share {min_share:.2}-{max_share:.2}); \
             top-3 overlap H1 {h1_overlap:.2} vs H0 {h0_overlap:.2}"
        ),
    )
}

// ---- criterion 4: fitness equations against an independent oracle -------

mod oracle {
    /// Logistic form of ½(tanh(8(x − ½)) + 1).
    pub fn adj(x: f64) -> f64 {
        1.0 / (1.0 + (-16.0 * (x - 0.5)).exp())
    }

    pub fn species(m3: f64, conspecific: bool) -> f64 {
        let target = if conspecific { 1.0 } else { 0.0 };
        adj(1.0 - (target - m3).abs())
    }

    pub fn decoding(message: u8, m: &[f64; 4]) -> f64 {
        let mut product = 1.0;
        for (i, mi) in m.iter().take(3).enumerate() {
            let o = f64::from((message >> i) & 1);
            product *= adj(1.0 - (o - mi).abs());
        }
        3.0 * product
    }

    pub fn bonus(species_enabled: bool, correct: u32) -> f64 {
        const TABLE: [f64; 4] = [1.0, 1.1, 1.1 * 1.2, 1.1 * 1.2 * 1.3];
        if species_enabled {
            TABLE[correct as usize]
        } else {
            1.0
        }
    }

    pub fn total(e_s: bool, e_d: bool, f_s: f64, f_d: f64, f_b: f64) -> f64 {
        let on = |b: bool| if b { 1.0 } else { 0.0 };
        (on(e_s) * f_s + on(e_d) * f_d) * f_b
    }
}

fn fitness_oracle() -> Verdict {
    const TOL: f64 = 1e-12;
    // mpmath, 40 digits
    const F_ADJ_ONE: f64 = 0.999_664_649_869_533_5;
    const F_ADJ_ZERO: f64 = 0.000_335_350_130_466_478_1;
    const EXACT_DECODE: f64 = 2.996_982_860_850_051_6;
    const ONE_BIT_WRONG: f64 = 0.001_005_375_746_279_546_3;
    const FULL_TOTAL: f64 = 6.858_247_128_394_808;

    let exact = DecodedOutput { m: [1.0, 0.0, 1.0, 1.0] };
    let m5 = Message::new(5).unwrap();
    let examples = [
        (f_adj(0.5), 0.5),
        (f_adj(1.0), F_ADJ_ONE),
        (f_adj(0.0), F_ADJ_ZERO),
        (species_fitness(1.0, true), F_ADJ_ONE),
        (species_fitness(0.5, false), 0.5),
        (decoding_fitness(m5, &exact), EXACT_DECODE),
        (decoding_fitness(m5, &DecodedOutput { m: [0.5; 4] }), 0.375),
        (decoding_fitness(m5, &DecodedOutput { m: [0.0, 0.0, 1.0, 1.0] }), ONE_BIT_WRONG),
        (bonus(false, 3), 1.0),
        (bonus(true, 0), 1.0),
        (bonus(true, 3), 1.716),
        (total_fitness(true, false, 0.9, 2.5, 1.0), 0.9),
        (total_fitness(false, true, 0.9, 2.0, 1.0), 2.0),
        (total_fitness(true, true, F_ADJ_ONE, EXACT_DECODE, 1.716), FULL_TOTAL),
    ]
    .iter()
    .map(|(a, b)| (a - b).abs())
    .fold(0.0, f64::max);

    let mut worst = examples;
    let mut rng = stream(4, Stream::Aux(4));
    for _ in 0..1000 {
        let x: f64 = rng.random_range(-0.5..1.5);
        let m3: f64 = rng.random();
        let conspecific: bool = rng.random();
        let idx: u8 = rng.random_range(0..8);
        let m = [rng.random(), rng.random(), rng.random(), rng.random()];
        let (e_s, n): (bool, u32) = (rng.random(), rng.random_range(0..4));
        let (e_d, f_s, f_d, f_b): (bool, f64, f64, f64) =
            (rng.random(), rng.random(), rng.random_range(0.0..3.0), rng.random_range(1.0..1.716));
        let pairs = [
            (f_adj(x), oracle::adj(x)),
            (species_fitness(m3, conspecific), oracle::species(m3, conspecific)),
            (decoding_fitness(Message::new(idx).unwrap(), &DecodedOutput { m }), oracle::decoding(idx, &m)),
            (bonus(e_s, n), oracle::bonus(e_s, n)),
            (total_fitness(e_s, e_d, f_s, f_d, f_b), oracle::total(e_s, e_d, f_s, f_d, f_b)),
        ];
        worst = pairs.iter().map(|(a, b)| (a - b).abs()).fold(worst, f64::max);
    }
    check(worst < TOL, format!("max |error| {worst:.2e} over 5000 random cases (worked examples {examples:.2e})"))
}

// ---- criterion 5: statistics --------------------------------------------

fn brute_force_silhouette(points: &[Vec<f64>], labels: &[u8]) -> f64 {
    let dist = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let mut total = 0.0;
    for i in 0..points.len() {
        let mut sums: BTreeMap<u8, (f64, usize)> = BTreeMap::new();
        for j in 0..points.len() {
            if i != j {
                let e = sums.entry(labels[j]).or_insert((0.0, 0));
                e.0 += dist(&points[i], &points[j]);
                e.1 += 1;
            }
        }
        let Some(&(own_sum, own_n)) = sums.get(&labels[i]) else { continue };
        let a = own_sum / own_n as f64;
        let b = sums
            .iter()
            .filter(|(l, _)| **l != labels[i])
            .map(|(_, (s, n))| s / *n as f64)
            .fold(f64::INFINITY, f64::min);
        if a.max(b) > 0.0 {
            total += (b - a) / a.max(b);
        }
    }
    total / points.len() as f64
}

fn statistics_oracles() -> Verdict {
    let mut rng = stream(5, Stream::Aux(5));
    let mut sil_err: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.random_range(3..60);
        let k = rng.random_range(2..5u8);
        let mut labels: Vec<u8> = (0..n).map(|_| rng.random_range(0..k)).collect();
        labels[0] = 0;
        labels[1] = 1;
        let points: Vec<Vec<f64>> =
            labels.iter().map(|&l| (0..9).map(|_| f64::from(l) + rng.random_range(-1.5..1.5)).collect()).collect();
        sil_err = sil_err.max((silhouette_score(&points, &labels).unwrap() - brute_force_silhouette(&points, &labels)).abs());
    }

    let w = welch_t_test(&[1.0, 2.0, 3.0, 4.0, 5.0], &[2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
    // scipy.stats.ttest_ind(equal_var=False)
    let p_err = (w.p - 0.346_593_507_087_334_16).abs();

    let mut cauchy_err: f64 = 0.0;
    let mut symmetry_err: f64 = 0.0;
    for i in -400..=400 {
        let t = f64::from(i) * 0.05;
        cauchy_err = cauchy_err.max((student_t_cdf(t, 1.0) - (0.5 + t.atan() / std::f64::consts::PI)).abs());
        for df in [0.5, 1.0, 2.5, 8.0, 30.0, 250.0] {
            symmetry_err = symmetry_err.max((student_t_cdf(t, df) + student_t_cdf(-t, df) - 1.0).abs());
        }
    }
    check(
        sil_err < 1e-12 && w.t == -1.0 && w.df == 8.0 && p_err < 1e-4 && cauchy_err < 1e-10 && symmetry_err < 1e-10,
        format!(
            "silhouette vs brute force {sil_err:.1e}; welch t={} df={} p={:.6}; cauchy {cauchy_err:.1e}; symmetry {symmetry_err:.1e}",
            w.t, w.df, w.p
        ),
    )
}

// ---- criterion 6: t-SNE ----------------------------------------------------

fn blobs(seed: u64, per_blob: usize) -> (Vec<Vec<f64>>, Vec<u8>) {
    let mut rng = stream(seed, Stream::Aux(6));
    let noise = Normal::new(0.0, 0.1).unwrap();
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for blob in 0..2u8 {
        // centroids 10 apart: (10/3)·(1,…,1) in 9-d
        let centre = f64::from(blob) * 10.0 / 3.0;
        for _ in 0..per_blob {
            points.push((0..9).map(|_| centre + noise.sample(&mut rng)).collect());
            labels.push(blob);
        }
    }
    (points, labels)
}

fn tsne_properties() -> Verdict {
    let cfg = TsneConfig { perplexity: 50.0, ..TsneConfig::default() };
    let mut details = Vec::new();
    let mut ok = true;

    let (points, _) = blobs(0, 100);
    let a = tsne_embed(&points, &cfg, 1).unwrap();
    let b = tsne_embed(&points, &cfg, 1).unwrap();
    let c = tsne_embed(&points, &cfg, 2).unwrap();
    let deterministic = a == b && a.points != c.points;
    ok &= deterministic;
    details.push(format!("deterministic {deterministic}"));

    let mut kl_ok = true;
    let mut sils = Vec::new();
    for seed in 0..3 {
        let (points, labels) = blobs(seed, 100);
        let e = tsne_embed(&points, &cfg, seed).unwrap();
        let (k300, k1000) = (e.kl_at(300).unwrap(), e.kl_at(1000).unwrap());
        kl_ok &= k1000 <= k300;
        let p = joint_affinities(&points, cfg.perplexity);
        kl_ok &= (kl_divergence(&p, &e.points) - k1000).abs() < 1e-12;
        sils.push(silhouette_score(&e.points, &labels).unwrap());
    }
    ok &= kl_ok && sils.iter().all(|&s| s > 0.9);
    details.push(format!("KL(1000) <= KL(300) {kl_ok}"));
    details.push(format!("two-blob silhouettes {:?}", sils.iter().map(|s| format!("{s:.3}")).collect::<Vec<_>>()));
    check(ok, details.join("; "))
}

// ---- criterion 7: XOR ---------------------------------------------------------

/// Generation at which some genome first gets all four cases within 0.5.
fn solve_xor(seed: u64) -> Option<usize> {
    const CASES: [([f64; 2], f64); 4] = [([0.0, 0.0], 0.0), ([0.0, 1.0], 1.0), ([1.0, 0.0], 1.0), ([1.0, 1.0], 0.0)];
    let mut pop = Population::new(2, 1, NeatConfig::default(), &mut stream(seed, Stream::Init(0)), stream(seed, Stream::Evolve(0)));
    for generation in 0..300 {
        let mut solved = false;
        for genome in &mut pop.genomes {
            let net = FeedforwardNetwork::build(genome, DEFAULT_SLOPE).unwrap();
            let errors: Vec<f64> = CASES.iter().map(|(x, t)| (net.activate(x).unwrap()[0] - t).abs()).collect();
            genome.fitness = 4.0 - errors.iter().map(|e| e * e).sum::<f64>();
            solved |= errors.iter().all(|&e| e < 0.5);
        }
        if solved {
            return Some(generation);
        }
        pop.evolve();
    }
    None
}

fn xor_benchmark() -> Verdict {
    let results: Vec<Option<usize>> = (0..20).map(solve_xor).collect();
    let solved: Vec<usize> = results.iter().flatten().copied().collect();
    check(
        solved.len() >= 16,
        format!("{}/20 seeds solved XOR within 300 generations (slowest {:?})", solved.len(), solved.iter().max()),
    )
}

// ---- criterion 8: determinism across worker counts ------------------------

fn experiment_files(workers: usize, dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let args = [
        "acoustic-niche",
        "--workers",
        &workers.to_string(),
        "experiment",
        "--runs",
        "3",
        "--seed-base",
        "40",
        "--set",
        "generations=15",
        "--set",
        "population_size=20",
        "-o",
        dir.to_str().unwrap(),
    ];
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = main_with_args(args, &mut out, &mut err);
    assert_eq!(code, 0, "{}", String::from_utf8_lossy(&err));
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv" || x == "log" || x == "txt"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect()
}

fn determinism() -> Verdict {
    let (a, b, c) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let one = experiment_files(1, a.path());
    let four = experiment_files(4, b.path());
    let again = experiment_files(1, c.path());
    let csvs = one.keys().filter(|k| k.ends_with(".csv")).count();
    check(
        one == four && one == again && one.contains_key("experiment.csv") && csvs == 7,
        format!("{} output files ({csvs} CSVs) byte-identical across --workers 1, 4 and a repeat", one.len()),
    )
}

fn main() {
    let mut failures = 0;
    let mut report = |n: usize, name: &str, verdict: std::thread::Result<Verdict>| {
        let (tag, detail) = match verdict {
            Ok(Ok(d)) => ("PASS", d),
            Ok(Err(d)) => ("FAIL", d),
            Err(panic) => {
                let msg = panic.downcast_ref::<String>().cloned().or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()));
                ("FAIL", format!("panicked: {}", msg.unwrap_or_default()))
            }
        };
        if tag == "FAIL" {
            failures += 1;
        }
        println!("criterion {n} [{tag}] {name}: {detail}");
    };

    let exp = catch_unwind(experiment);
    let with_exp = |f: fn(&ExperimentLog) -> Verdict| match &exp {
        Ok(e) => catch_unwind(AssertUnwindSafe(|| f(e))),
        Err(_) => Ok(Err("experiment failed to run".to_string())),
    };
    report(1, "niche-differentiation significance", with_exp(niche_significance));
    report(2, "species-identification rate", with_exp(species_id_rate));
    report(3, "band convergence", with_exp(band_convergence_verdict));
    report(4, "fitness-equation oracle", catch_unwind(fitness_oracle));
    report(5, "statistics oracles", catch_unwind(statistics_oracles));
    report(6, "t-SNE properties", catch_unwind(tsne_properties));
    report(7, "NEAT XOR benchmark", catch_unwind(xor_benchmark));
    report(8, "determinism across workers", catch_unwind(determinism));

    println!("acceptance: {} of 8 criteria passed", 8 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
