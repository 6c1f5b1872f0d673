//! End-to-end acceptance suite. Each test prints a single
//! `criterion N: PASS/FAIL` line with the measured numbers; run with
//! `--nocapture` to see the lines for passing tests too.

mod common;

use std::time::Instant;

use chmm::analysis::{
    decode_scrambled, encode_scrambled, fit_kneser_ney, ngram_bps,
    permutation_baseline_accuracy, prune_sweep, scramble, word_boundaries,
};
use chmm::datasets::{
    bracket_generate, concat_ab_alphabet, concat_ab_generate, normalize_text, toy_alphabet,
    toy_generate, toy_ground_truth_model, BracketParams, ToyFsmParams,
};
use chmm::inference::{bits_per_symbol, viterbi, EvidenceSequence};
use chmm::learning::{
    batch_windows, e_step_corpus_sequential, fit_batch_em, fit_dense_hmm, fit_online_em,
    fit_online_em_with, greedy_split_demo, m_step_with_support, EmConfig, OnlineEmConfig,
};
use chmm::model::{
    allocate_clones_by_frequency, init_random, Alphabet, BlockTransitionModel, CloneLayout,
};
use common::{oracle, random_fixture, sample_sequence};

const EPS_EVAL: f64 = 1e-5;

fn report(n: usize, ok: bool, detail: &str) {
    let status = if ok { "PASS" } else { "FAIL" };
    println!("criterion {n}: {status} — {detail}");
    assert!(ok, "criterion {n}: {detail}");
}

fn test_bps(model: &BlockTransitionModel, seq: &[usize]) -> f64 {
    bits_per_symbol(&model.smoothed_for_eval(EPS_EVAL), &EvidenceSequence::hard(seq))
        .unwrap()
        .value
}

/// Toy layout: one clone per signal symbol, `noise` clones for the rest.
fn toy_layout(k: usize, noise: usize) -> CloneLayout {
    let mut clones = vec![1; 4];
    clones.extend(std::iter::repeat(noise).take(4 * k - 2));
    CloneLayout::new(clones).unwrap()
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn median(xs: &[f64]) -> f64 {
    let mut s = xs.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    s[s.len() / 2]
}

fn train_toy_batch(k: usize, noise: usize, n_train: usize, seed: u64) -> BlockTransitionModel {
    let train = toy_generate(&ToyFsmParams::new(k, seed), n_train).unwrap();
    let config = EmConfig {
        max_iters: 100,
        rel_tol: 1e-6,
        seed,
        smoothing_floor: EPS_EVAL,
    };
    fit_batch_em(
        &toy_alphabet(k),
        &toy_layout(k, noise),
        std::slice::from_ref(&train),
        &config,
    )
    .unwrap()
    .0
}

fn train_toy_online(
    k: usize,
    noise: usize,
    n_train: usize,
    epochs: usize,
    seed: u64,
) -> BlockTransitionModel {
    let train = toy_generate(&ToyFsmParams::new(k, seed), n_train).unwrap();
    let config = OnlineEmConfig {
        batch_size: 400,
        lambda: 0.9,
        epochs,
        update_every: 1,
    };
    // escaping the plateau takes tens to hundreds of epochs, with large
    // run-to-run variance; stop as soon as a probe slice reaches the
    // generator's entropy rate instead of always running the epoch cap
    let probe = EvidenceSequence::hard(&train[..4000.min(train.len())]);
    let optimal = (k as f64 + 1.0) / (3.0 * k as f64);
    let model = init_random(&toy_alphabet(k), &toy_layout(k, noise), seed, None).unwrap();
    // the probe crosses the threshold right at the escape transition, so
    // keep polishing for a while after it first trips
    let mut reached: Option<usize> = None;
    fit_online_em_with(model, &train, &config, |m, epoch| {
        let bps = bits_per_symbol(&m.smoothed_for_eval(EPS_EVAL), &probe)
            .unwrap()
            .value;
        if reached.is_none() && bps <= optimal + 0.01 {
            reached = Some(epoch);
        }
        match reached {
            Some(e) => epoch < e + 30,
            None => true,
        }
    })
    .unwrap()
    .0
}

fn toy_test_seq(k: usize, seed: u64, n: usize) -> Vec<usize> {
    toy_generate(&ToyFsmParams::new(k, 1000 + seed), n).unwrap()
}

// ------------------------------------------------------------------------

#[test]
fn criterion_01_oracle_equivalence() {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for seed in 0..100u64 {
        let (model, evidence) = random_fixture(seed, 3, 2, 7);
        let expected = oracle(&model, &evidence).unwrap();
        let (gammas, loglik) = chmm::inference::posteriors(&model, &evidence).unwrap();
        let (stats, _) = chmm::learning::e_step(&model, &evidence).unwrap();
        let path = viterbi(&model, &evidence).unwrap();
        let mut rel = |a: f64, b: f64| {
            worst = worst.max((a - b).abs() / a.abs().max(b.abs()).max(1.0));
        };
        rel(loglik, expected.loglik);
        rel(path.log_score, expected.best_log_score);
        for (n, g) in gammas.iter().enumerate() {
            for (got, want) in g.to_dense(&model).iter().zip(&expected.gamma[n]) {
                rel(*got, *want);
            }
        }
        for (got, want) in common::xi_dense(&stats).iter().zip(&expected.xi) {
            rel(*got, *want);
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    report(
        1,
        worst <= 1e-10 && elapsed < 10.0,
        &format!("100 fixtures, worst relative error {worst:.2e}, {elapsed:.1}s (limit 10s)"),
    );
}

#[test]
fn criterion_02_em_monotonicity() {
    let mut worst_drop: f64 = 0.0;
    for f in 0..20u64 {
        let generator = random_fixture(1000 + f, 3, 2, 5).0;
        let data = sample_sequence(&generator, 200, f);
        let config = EmConfig {
            max_iters: 50,
            rel_tol: 0.0,
            seed: f,
            smoothing_floor: EPS_EVAL,
        };
        let (_, rep) = fit_batch_em(
            &Alphabet::integers(3),
            &CloneLayout::uniform(3, 2).unwrap(),
            std::slice::from_ref(&data),
            &config,
        )
        .unwrap();
        for w in rep.train_loglik.windows(2) {
            let drop = (w[0] - w[1]) / w[0].abs().max(1.0);
            worst_drop = worst_drop.max(drop);
        }
    }
    report(
        2,
        worst_drop <= 1e-9,
        &format!("20 fixtures x 50 iterations, worst relative loglik drop {worst_drop:.2e}"),
    );
}

#[test]
fn criterion_03_toy_k2_batch() {
    let start = Instant::now();
    let bps: Vec<f64> = (0..10)
        .map(|seed| {
            let model = train_toy_batch(2, 2, 11250, seed);
            test_bps(&model, &toy_test_seq(2, seed, 10000))
        })
        .collect();
    let m = mean(&bps);
    let elapsed = start.elapsed().as_secs_f64();
    report(
        3,
        (0.49..=0.52).contains(&m) && elapsed < 120.0,
        &format!("mean test BPS {m:.4} over 10 seeds (band [0.49, 0.52]), {elapsed:.1}s (limit 120s)"),
    );
}

#[test]
fn criterion_04_toy_k3_online() {
    let start = Instant::now();
    // escaping the k=3 plateau takes 100-1500 epochs depending on the seed
    let bps: Vec<f64> = (0..10)
        .map(|seed| {
            let model = train_toy_online(3, 2, 33750, 3000, seed);
            test_bps(&model, &toy_test_seq(3, seed, 10000))
        })
        .collect();
    let m = mean(&bps);
    let elapsed = start.elapsed().as_secs_f64();
    report(
        4,
        (0.43..=0.46).contains(&m) && elapsed < 300.0,
        &format!("mean test BPS {m:.4} over 10 seeds (band [0.43, 0.46]), {elapsed:.1}s (limit 300s)"),
    );
}

#[test]
fn criterion_05_toy_k4_online() {
    let start = Instant::now();
    let bps: Vec<f64> = (0..5)
        .map(|seed| {
            let model = train_toy_online(4, 3, 90000, 3000, seed);
            test_bps(&model, &toy_test_seq(4, seed, 10000))
        })
        .collect();
    let m = mean(&bps);
    let elapsed = start.elapsed().as_secs_f64();
    report(
        5,
        (0.41..=0.43).contains(&m) && elapsed < 600.0,
        &format!("mean test BPS {m:.4} over 5 seeds (band [0.41, 0.43]), {elapsed:.1}s (limit 600s)"),
    );
}

#[test]
fn criterion_06_dense_hmm_local_minimum() {
    fn dense_bps(k: usize, hidden: usize, n_train: usize, seed: u64) -> f64 {
        let train = toy_generate(&ToyFsmParams::new(k, seed), n_train).unwrap();
        let config = EmConfig {
            max_iters: 50,
            rel_tol: 1e-6,
            seed,
            smoothing_floor: EPS_EVAL,
        };
        let e = 4 * k + 2;
        let (model, _) = fit_dense_hmm(hidden, e, std::slice::from_ref(&train), &config).unwrap();
        model
            .smoothed_for_eval(EPS_EVAL)
            .bits_per_symbol(std::slice::from_ref(&toy_test_seq(k, seed, 10000)))
            .unwrap()
    }
    let hmm_k2: Vec<f64> = (0..10).map(|s| dense_bps(2, 16, 11250, s)).collect();
    let mean_hmm_k2 = mean(&hmm_k2);
    let chmm_k2: Vec<f64> = (0..5)
        .map(|s| test_bps(&train_toy_batch(2, 2, 11250, s), &toy_test_seq(2, s, 10000)))
        .collect();
    let hmm_k3: Vec<f64> = (0..5).map(|s| dense_bps(3, 24, 33750, s)).collect();
    let chmm_k3: Vec<f64> = (0..5)
        .map(|s| test_bps(&train_toy_online(3, 2, 33750, 3000, s), &toy_test_seq(3, s, 10000)))
        .collect();
    let ok = (0.63..=0.69).contains(&mean_hmm_k2)
        && median(&chmm_k2) < median(&hmm_k2)
        && median(&chmm_k3) < median(&hmm_k3);
    report(
        6,
        ok,
        &format!(
            "dense H=16 mean test BPS {:.4} (band [0.63, 0.69]); medians CHMM/HMM k=2 {:.4}/{:.4}, k=3 {:.4}/{:.4}",
            mean_hmm_k2,
            median(&chmm_k2),
            median(&hmm_k2),
            median(&chmm_k3),
            median(&hmm_k3)
        ),
    );
}

fn bracket_alphabet_obj() -> Alphabet {
    chmm::datasets::bracket_alphabet()
}

#[test]
fn criterion_07_bracket_k2() {
    let alphabet = bracket_alphabet_obj();
    let batch: Vec<f64> = (0..5)
        .map(|seed| {
            let train = bracket_generate(&BracketParams::uniform(2, seed), 50000).unwrap();
            let config = EmConfig {
                max_iters: 100,
                rel_tol: 1e-6,
                seed,
                smoothing_floor: EPS_EVAL,
            };
            let layout = CloneLayout::uniform(5, 6).unwrap();
            let (model, _) =
                fit_batch_em(&alphabet, &layout, std::slice::from_ref(&train), &config).unwrap();
            let test = bracket_generate(&BracketParams::uniform(2, 1000 + seed), 10000).unwrap();
            test_bps(&model, &test)
        })
        .collect();
    let online: Vec<f64> = (0..3)
        .map(|seed| {
            let train = bracket_generate(&BracketParams::uniform(2, 50 + seed), 50000).unwrap();
            let config = OnlineEmConfig {
                batch_size: 400,
                lambda: 0.9,
                epochs: 30,
                update_every: 1,
            };
            let layout = CloneLayout::uniform(5, 4).unwrap();
            let (model, _) = fit_online_em(&alphabet, &layout, &train, &config, seed).unwrap();
            let test = bracket_generate(&BracketParams::uniform(2, 2000 + seed), 10000).unwrap();
            test_bps(&model, &test)
        })
        .collect();
    let mb = mean(&batch);
    let mo = mean(&online);
    report(
        7,
        (1.03..=1.08).contains(&mb) && mo <= 1.08,
        &format!(
            "batch 6-clone mean test BPS {mb:.4} (band [1.03, 1.08]); online 4-clone mean {mo:.4} (<= 1.08)"
        ),
    );
}

#[test]
fn criterion_08_bracket_k3_online() {
    let alphabet = bracket_alphabet_obj();
    let bps: Vec<f64> = (0..3)
        .map(|seed| {
            let train = bracket_generate(&BracketParams::uniform(3, seed), 50000).unwrap();
            // batches of 400 occasionally forget an observed transition to
            // exact zero at this state count; 1000 is stable
            let config = OnlineEmConfig {
                batch_size: 1000,
                lambda: 0.9,
                epochs: 120,
                update_every: 1,
            };
            let layout = CloneLayout::uniform(5, 20).unwrap();
            let (model, _) = fit_online_em(&alphabet, &layout, &train, &config, seed).unwrap();
            let test = bracket_generate(&BracketParams::uniform(3, 1000 + seed), 10000).unwrap();
            test_bps(&model, &test)
        })
        .collect();
    let m = mean(&bps);
    report(
        8,
        (1.11..=1.16).contains(&m),
        &format!("mean test BPS {m:.4} over 3 seeds (band [1.11, 1.16])"),
    );
}

#[test]
fn criterion_09_online_batch_consistency() {
    let seq = toy_generate(&ToyFsmParams::new(2, 5), 2000).unwrap();
    let alphabet = toy_alphabet(2);
    let layout = toy_layout(2, 2);
    let init = init_random(&alphabet, &layout, 7, None).unwrap();
    let uniform = vec![1.0 / init.total_states() as f64; init.total_states()];
    let init = init.with_prior(uniform).unwrap();
    let windows = batch_windows(seq.len(), 400);

    let config = OnlineEmConfig {
        batch_size: 400,
        lambda: 1.0 - 1e-12,
        epochs: 1,
        update_every: windows.len(),
    };
    let (online_model, _) = fit_online_em_with(init.clone(), &seq, &config, |_, _| true).unwrap();

    // one M-step over the same windows treated as independent sequences
    let window_seqs: Vec<Vec<usize>> = windows.iter().map(|&(s, e)| seq[s..e].to_vec()).collect();
    let (stats, _) = e_step_corpus_sequential(&init, &window_seqs).unwrap();
    let reference = m_step_with_support(&stats, &alphabet, &init.presence()).unwrap();

    let mut worst: f64 = 0.0;
    for (i, j) in reference.present_blocks() {
        let a = online_model.block(i, j).unwrap();
        let b = reference.block(i, j).unwrap();
        for (x, y) in a.iter().zip(b) {
            worst = worst.max((x - y).abs() / x.abs().max(y.abs()).max(1e-300));
        }
    }
    report(
        9,
        worst <= 1e-6,
        &format!("worst relative transition difference {worst:.2e} (limit 1e-6)"),
    );
}

#[test]
fn criterion_10_greedy_split_failure() {
    let corpus = vec![concat_ab_generate(50000, 17)];
    let config = EmConfig {
        max_iters: 100,
        rel_tol: 1e-7,
        seed: 1,
        smoothing_floor: EPS_EVAL,
    };
    let report_out = greedy_split_demo(&concat_ab_alphabet(), &corpus, &[0, 1], &config).unwrap();
    let worst_single = report_out
        .single_gains
        .iter()
        .map(|(_, g)| *g)
        .fold(f64::NEG_INFINITY, f64::max);
    report(
        10,
        worst_single <= 1e-4 && report_out.joint_gain >= 0.01,
        &format!(
            "best single-symbol gain {worst_single:.2e} nats/symbol (<= 1e-4); joint a+b gain {:.4} (>= 0.01)",
            report_out.joint_gain
        ),
    );
}

#[test]
fn criterion_11_scrambled_decoding() {
    // unscrambled decode is the identity
    let truth = toy_ground_truth_model(2).unwrap();
    let seq = toy_generate(&ToyFsmParams::new(2, 3), 500).unwrap();
    let path = viterbi(&truth, &EvidenceSequence::hard(&seq)).unwrap();
    let identity_ok = path.symbols == seq;

    // a deterministic cycle has a unique consistent path, so interior
    // scrambling is fully recoverable
    let alphabet = Alphabet::new(["s", "a", "b", "c", "d"]).unwrap();
    let word: Vec<usize> = vec![1, 2, 3, 4, 0];
    let chain: Vec<usize> = word
        .iter()
        .cycle()
        .take(200)
        .copied()
        .collect();
    let config = EmConfig {
        max_iters: 30,
        rel_tol: 1e-9,
        seed: 2,
        smoothing_floor: EPS_EVAL,
    };
    let layout = CloneLayout::uniform(5, 1).unwrap();
    let (chain_model, _) = fit_batch_em(
        &alphabet,
        &layout,
        std::slice::from_ref(&chain),
        &config,
    )
    .unwrap();
    let boundaries = word_boundaries(&chain, 0);
    let shuffled = scramble(&chain, &boundaries, 11).unwrap();
    let encoding = encode_scrambled(&shuffled, &boundaries, 5).unwrap();
    let decoded = decode_scrambled(&chain_model, &encoding, &chain).unwrap();
    let exact_ok = decoded.decoded == chain && decoded.word_accuracy == 1.0;

    // a small trained text model beats the analytic permutation baseline
    let text = load_text_chars(100_000);
    let train = &text[..60_000];
    let test = &text[60_000..66_000];
    let text_alphabet = Alphabet::lowercase_text();
    let space = text_alphabet.index_of(" ").unwrap();
    let layout = allocate_clones_by_frequency(train, 27, 150, 1).unwrap();
    let config = EmConfig {
        max_iters: 10,
        rel_tol: 1e-6,
        seed: 0,
        smoothing_floor: EPS_EVAL,
    };
    let (text_model, _) = fit_batch_em(
        &text_alphabet,
        &layout,
        &[train.to_vec()],
        &config,
    )
    .unwrap();
    let text_model = text_model.smoothed_for_eval(EPS_EVAL);
    let boundaries = word_boundaries(test, space);
    let shuffled = scramble(test, &boundaries, 7).unwrap();
    let encoding = encode_scrambled(&shuffled, &boundaries, 27).unwrap();
    let decoded = decode_scrambled(&text_model, &encoding, test).unwrap();
    let baseline = permutation_baseline_accuracy(test, &boundaries);
    let text_ok = decoded.word_accuracy > baseline;

    report(
        11,
        identity_ok && exact_ok && text_ok,
        &format!(
            "identity {identity_ok}; deterministic-cycle recovery {exact_ok}; text word accuracy {:.4} vs permutation baseline {:.4}",
            decoded.word_accuracy, baseline
        ),
    );
}

#[test]
fn criterion_12_pruning() {
    let train = toy_generate(&ToyFsmParams::new(2, 0), 11250).unwrap();
    let config = EmConfig {
        max_iters: 100,
        rel_tol: 1e-6,
        seed: 0,
        smoothing_floor: EPS_EVAL,
    };
    let layout = CloneLayout::uniform(10, 2).unwrap();
    let (model, _) =
        fit_batch_em(&toy_alphabet(2), &layout, std::slice::from_ref(&train), &config).unwrap();
    let test = toy_test_seq(2, 0, 10000);
    let base = test_bps(&model, &test);
    let eval = EvidenceSequence::hard(&test);
    let (_, sweep) =
        prune_sweep(&model, &[0.05, 0.1, 0.2, 0.3], &eval, EPS_EVAL).unwrap();
    let hit = sweep
        .rows
        .iter()
        .find(|r| r.fraction_zeroed >= 0.9 && r.bps - base < 0.01);
    let detail = match &hit {
        Some(r) => format!(
            "threshold {} zeroes {:.1}% with BPS {:.4} vs {:.4} unpruned",
            r.threshold,
            100.0 * r.fraction_zeroed,
            r.bps,
            base
        ),
        None => format!(
            "no threshold in sweep reached 90% zeroed with < 0.01 BPS increase: {:?}",
            sweep
                .rows
                .iter()
                .map(|r| (r.threshold, r.fraction_zeroed, r.bps - base))
                .collect::<Vec<_>>()
        ),
    };
    report(12, hit.is_some(), &detail);
}

fn load_text_chars(n: usize) -> Vec<usize> {
    let raw = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/tests/data/licenses.txt"
    ))
    .unwrap();
    let normalized = normalize_text(&raw);
    let clipped: String = normalized.chars().take(n).collect();
    Alphabet::lowercase_text().encode_chars(&clipped).unwrap()
}

#[test]
fn criterion_13_capacity_monotonicity() {
    let start = Instant::now();
    let text = load_text_chars(100_000);
    let alphabet = Alphabet::lowercase_text();
    let capacities = [250usize, 500, 1000, 2000];
    let mut medians = Vec::new();
    for &cap in &capacities {
        let runs: Vec<f64> = (0..3)
            .map(|seed| {
                let layout = allocate_clones_by_frequency(&text, 27, cap, 1).unwrap();
                // the comparison is between trained models; larger state
                // counts need more iterations to converge, so give every
                // capacity the same generous budget
                let config = EmConfig {
                    max_iters: 60,
                    rel_tol: 1e-7,
                    seed,
                    smoothing_floor: EPS_EVAL,
                };
                let (model, _) =
                    fit_batch_em(&alphabet, &layout, &[text.clone()], &config).unwrap();
                // raw train BPS: the fit criterion itself
                bits_per_symbol(&model, &EvidenceSequence::hard(&text))
                    .unwrap()
                    .value
            })
            .collect();
        medians.push(median(&runs));
    }
    let monotone = medians.windows(2).all(|w| w[1] <= w[0] + 1e-9);
    let elapsed = start.elapsed().as_secs_f64();
    report(
        13,
        monotone && elapsed < 1800.0,
        &format!(
            "median train BPS at capacities {capacities:?}: {medians:?}, {elapsed:.0}s (limit 1800s)"
        ),
    );
}

#[test]
fn criterion_14_chmm_beats_kneser_ney() {
    let text = load_text_chars(100_000);
    let (train, test) = text.split_at(90_000);
    let kn = fit_kneser_ney(&[train.to_vec()], 5, 27).unwrap();
    let kn_bps = ngram_bps(&kn, test).unwrap();

    let alphabet = Alphabet::lowercase_text();
    let layout = allocate_clones_by_frequency(train, 27, 1000, 1).unwrap();
    let config = EmConfig {
        max_iters: 100,
        rel_tol: 1e-7,
        seed: 0,
        smoothing_floor: EPS_EVAL,
    };
    let (model, _) = fit_batch_em(&alphabet, &layout, &[train.to_vec()], &config).unwrap();
    let chmm_bps = test_bps(&model, test);
    // Known red at this scale: a 1000-state model trained on 90k chars
    // loses to the 5-gram by ~0.2 bits on every corpus window tried
    // (more iterations, n-gram-based clone allocation, and online EM do
    // not close the gap). The ordering the check describes comes from
    // models orders of magnitude larger.
    report(
        14,
        chmm_bps < kn_bps,
        &format!("capacity-1000 CHMM test BPS {chmm_bps:.4} vs Kneser-Ney 5-gram {kn_bps:.4}"),
    );
}

#[test]
fn criterion_15_theory_sections_not_executable() {
    report(
        15,
        true,
        "theory-only material has no executable content; nothing to test",
    );
}
