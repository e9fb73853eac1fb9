//! Evaluation protocol checked against hand-built networks and a
//! brute-force composition of the fitness equations.

use acoustic_niche::fitness::{evaluate_generation, EvaluationSettings, FitnessMode};
use acoustic_niche::neat::{initial_genome, mutate, ConnectionGene, Genome, InnovationRegistry, NeatConfig, NodeId};
use acoustic_niche::rng::{stream, Stream};
use acoustic_niche::soundscape::{Species, TransmissionMode, BANDS};
use approx::assert_abs_diff_eq;
use proptest::prelude::*;

const SLOPE: f64 = 4.9;

fn settings(mode: FitnessMode) -> EvaluationSettings {
    EvaluationSettings { mode, transmission: TransmissionMode::Binary, activation_slope: SLOPE, keep_records: true }
}

/// Direct links only: `(from, to, weight)` with node ids in genome layout.
fn direct(n_in: usize, n_out: usize, links: &[(NodeId, NodeId, f64)]) -> Genome {
    let connections = links
        .iter()
        .enumerate()
        .map(|(k, &(from, to, weight))| ConnectionGene { innovation: k as u64, from, to, weight, enabled: true })
        .collect();
    Genome::from_parts(n_in, n_out, [], connections).unwrap()
}

/// Sender: message bit i drives band `bands[i]`, bias lights `marker`.
fn sender(bands: [usize; 3], marker: usize, gain: f64) -> Genome {
    let out = |b: usize| (3 + 1 + b) as NodeId;
    let mut links: Vec<(NodeId, NodeId, f64)> = Vec::new();
    for (i, &b) in bands.iter().enumerate() {
        links.push((i as NodeId, out(b), 2.0 * gain));
    }
    for b in 0..BANDS {
        links.push((3, out(b), if b == marker { gain } else { -gain }));
    }
    direct(3, BANDS, &links)
}

/// Receiver: bit i read from band `bands[i]`, m3 from `marker`.
fn receiver(bands: [usize; 3], marker: usize, gain: f64) -> Genome {
    let out = |o: usize| (BANDS + 1 + o) as NodeId;
    let mut links: Vec<(NodeId, NodeId, f64)> = Vec::new();
    for (o, &b) in bands.iter().chain([&marker]).enumerate() {
        links.push((b as NodeId, out(o), 2.0 * gain));
        links.push((BANDS as NodeId, out(o), -gain));
    }
    direct(BANDS, 4, &links)
}

mod oracle {
    pub fn sigma(x: f64) -> f64 {
        1.0 / (1.0 + (-super::SLOPE * x).exp())
    }
    pub fn adj(x: f64) -> f64 {
        1.0 / (1.0 + (-16.0 * (x - 0.5)).exp())
    }
}

/// Brute-force f_t for one sender/receiver pair and message.
fn expected_ft(
    mode: FitnessMode,
    s: ([usize; 3], usize, f64),
    r: ([usize; 3], usize, f64),
    msg: u8,
    conspecific: bool,
) -> f64 {
    let (s_bands, s_marker, sg) = s;
    let bits: Vec<f64> = (0..3).map(|i| f64::from((msg >> i) & 1)).collect();
    let mut heard = [0.0; BANDS];
    for (b, h) in heard.iter_mut().enumerate() {
        let mut x = if b == s_marker { sg } else { -sg };
        if let Some(i) = s_bands.iter().position(|&sb| sb == b) {
            x += 2.0 * sg * bits[i];
        }
        *h = if oracle::sigma(x) >= 0.5 { 1.0 } else { 0.0 };
    }
    let (r_bands, r_marker, rg) = r;
    let m: Vec<f64> = r_bands.iter().chain([&r_marker]).map(|&b| oracle::sigma(2.0 * rg * heard[b] - rg)).collect();

    let f_d = 3.0 * (0..3).map(|i| oracle::adj(1.0 - (bits[i] - m[i]).abs())).product::<f64>();
    match mode {
        FitnessMode::H0 => f_d,
        FitnessMode::H1 => {
            let target = if conspecific { 1.0 } else { 0.0 };
            let f_s = oracle::adj(1.0 - (target - m[3]).abs());
            let e_d = conspecific && m[3] >= 0.5;
            let n = if e_d { (0..3).filter(|&i| (bits[i] - m[i]).abs() < 0.5).count() } else { 0 };
            let f_b: f64 = (0..=n).map(|i| i as f64 / 10.0 + 1.0).product();
            (f_s + if e_d { f_d } else { 0.0 }) * f_b
        }
    }
}

#[test]
fn micro_instance_matches_brute_force() {
    // species A speaks on 0,2,4 with marker 6; B on 1,3,5 with marker 7;
    // receiver B listens to the wrong bands so heterospecific paths differ
    let sa = ([0, 2, 4], 6, 1.3);
    let sb = ([1, 3, 5], 7, 0.9);
    let ra = ([0, 2, 4], 6, 0.8);
    let rb = ([1, 2, 5], 7, 0.4);
    let senders = [vec![sender(sa.0, sa.1, sa.2)], vec![sender(sb.0, sb.1, sb.2)]];
    let receivers = [vec![receiver(ra.0, ra.1, ra.2)], vec![receiver(rb.0, rb.1, rb.2)]];

    for mode in [FitnessMode::H1, FitnessMode::H0] {
        let eval = evaluate_generation([&senders[0], &senders[1]], [&receivers[0], &receivers[1]], &settings(mode)).unwrap();
        let expected_records = if mode == FitnessMode::H1 { 2 * 16 } else { 2 * 8 };
        assert_eq!(eval.records.len(), expected_records);
        let mut receiver_sum = [0.0; 2];
        let mut sender_sum = [0.0; 2];
        for rec in &eval.records {
            let s = if rec.sender_species == Species::A { sa } else { sb };
            let r = if rec.receiver_species == Species::A { ra } else { rb };
            let conspecific = rec.sender_species == rec.receiver_species;
            let want = expected_ft(mode, s, r, rec.message.index(), conspecific);
            assert_abs_diff_eq!(rec.f_t, want, epsilon = 1e-12);
            receiver_sum[rec.receiver_species.index()] += want;
            if conspecific {
                sender_sum[rec.sender_species.index()] += want;
            }
        }
        let heard = if mode == FitnessMode::H1 { 16.0 } else { 8.0 };
        for k in 0..2 {
            assert_abs_diff_eq!(eval.tables.receivers[k][0], receiver_sum[k] / heard, epsilon = 1e-12);
            assert_abs_diff_eq!(eval.tables.senders[k][0], sender_sum[k] / 8.0, epsilon = 1e-12);
        }
    }
}

#[test]
fn perfect_codes_score_one_everywhere() {
    let g = 6.0;
    let senders = [vec![sender([0, 1, 2], 3, g)], vec![sender([4, 5, 6], 7, g)]];
    let receivers = [vec![receiver([0, 1, 2], 3, g)], vec![receiver([4, 5, 6], 7, g)]];
    let eval = evaluate_generation([&senders[0], &senders[1]], [&receivers[0], &receivers[1]], &settings(FitnessMode::H1)).unwrap();
    for s in eval.tables.scores {
        assert_eq!(s.species_id_rate, Some(1.0));
        assert_eq!(s.bit_rate, 1.0);
        assert_eq!(s.message_rate, 1.0);
    }
}

fn random_population(seed: u64, n: usize, n_in: usize, n_out: usize, mutations: usize) -> Vec<Genome> {
    let mut rng = stream(seed, Stream::Aux(n_in as u32));
    let cfg = NeatConfig { add_node_rate: 0.5, add_connection_rate: 0.5, ..NeatConfig::default() };
    let mut reg = InnovationRegistry::new(n_in, n_out);
    (0..n)
        .map(|_| {
            let mut g = initial_genome(n_in, n_out, &mut rng);
            for _ in 0..mutations {
                mutate(&mut g, &cfg, &mut reg, &mut rng);
            }
            g
        })
        .collect()
}

#[test]
fn desk_sized_record_counts() {
    let s = [random_population(1, 50, 3, 9, 0), random_population(2, 50, 3, 9, 0)];
    let r = [random_population(3, 50, 9, 4, 0), random_population(4, 50, 9, 4, 0)];
    let h1 = evaluate_generation([&s[0], &s[1]], [&r[0], &r[1]], &settings(FitnessMode::H1)).unwrap();
    assert_eq!(h1.records.len(), 2 * 50 * 800);
    assert_eq!(h1.signals.len(), 800);
    let h0 = evaluate_generation([&s[0], &s[1]], [&r[0], &r[1]], &settings(FitnessMode::H0)).unwrap();
    assert_eq!(h0.records.len(), 2 * 50 * 400);
    assert!(h0.records.iter().all(|rec| rec.sender_species == rec.receiver_species));
    assert!(h0.tables.scores.iter().all(|s| s.species_id_rate.is_none()));
}

#[test]
fn binary_soundscape_has_at_most_512_patterns() {
    let s = [random_population(5, 30, 3, 9, 4), random_population(6, 30, 3, 9, 4)];
    let r = [random_population(7, 30, 9, 4, 0), random_population(8, 30, 9, 4, 0)];
    let eval = evaluate_generation([&s[0], &s[1]], [&r[0], &r[1]], &settings(FitnessMode::H1)).unwrap();
    let patterns: std::collections::BTreeSet<[bool; BANDS]> = eval.signals.iter().map(|s| *s.used_bands()).collect();
    assert!(patterns.len() <= 512);
    for sig in &eval.signals {
        for (c, u) in sig.channels.iter().zip(sig.used_bands()) {
            assert_eq!(*u, *c >= 0.5);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn fitness_is_non_negative_and_bounded(seed in 0u64..10_000, mutations in 0usize..6, h1 in any::<bool>()) {
        let mode = if h1 { FitnessMode::H1 } else { FitnessMode::H0 };
        let s = [random_population(seed, 4, 3, 9, mutations), random_population(seed + 1, 4, 3, 9, mutations)];
        let r = [random_population(seed + 2, 4, 9, 4, mutations), random_population(seed + 3, 4, 9, 4, mutations)];
        let eval = evaluate_generation([&s[0], &s[1]], [&r[0], &r[1]], &settings(mode)).unwrap();
        for rec in &eval.records {
            prop_assert!(rec.f_s >= 0.0 && rec.f_d >= 0.0 && rec.f_b >= 1.0);
            prop_assert!(rec.f_t >= 0.0 && rec.f_t < 6.87);
            prop_assert!(rec.correct_bits <= 3);
            prop_assert_eq!(rec.species_id_correct, rec.decoded.judged_conspecific() == (rec.sender_species == rec.receiver_species));
        }
        for table in eval.tables.senders.iter().chain(&eval.tables.receivers) {
            prop_assert!(table.iter().all(|&f| (0.0..6.87).contains(&f)));
        }
        for s in eval.tables.scores {
            prop_assert!(s.message_rate <= s.bit_rate);
            prop_assert!((0.0..=1.0).contains(&s.bit_rate));
        }
    }

    #[test]
    fn h0_ignores_the_other_species(seed in 0u64..10_000) {
        let sa = random_population(seed, 5, 3, 9, 2);
        let ra = random_population(seed + 1, 5, 9, 4, 2);
        let b1 = (random_population(seed + 2, 5, 3, 9, 2), random_population(seed + 3, 5, 9, 4, 2));
        let b2 = (random_population(seed + 4, 5, 3, 9, 3), random_population(seed + 5, 5, 9, 4, 3));
        let e1 = evaluate_generation([&sa, &b1.0], [&ra, &b1.1], &settings(FitnessMode::H0)).unwrap();
        let e2 = evaluate_generation([&sa, &b2.0], [&ra, &b2.1], &settings(FitnessMode::H0)).unwrap();
        prop_assert_eq!(&e1.tables.senders[0], &e2.tables.senders[0]);
        prop_assert_eq!(&e1.tables.receivers[0], &e2.tables.receivers[0]);
    }
}
