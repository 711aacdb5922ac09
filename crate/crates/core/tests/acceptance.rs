//! Acceptance suite: one test per shipping criterion. Each test enforces its
//! bound exactly (and its runtime limit where one applies) and prints a
//! single `criterion N ...: PASS` line; run with `--nocapture` to see them.
//!
//! Oracles used here are deliberately primitive: character-level distance
//! recomputation and double loops, independent of the packed bit kernels
//! they certify.

use cslab::bitstr::BitString;
use cslab::codegen::{CodeParams, SelectionCode};
use cslab::graphs::CliqueInstance;
use cslab::harness::{
    cliquefree_corpus, completeness_center, gap_experiment, planted_corpus, soundness_probe,
    HarnessConfig,
};
use cslab::reducer::{
    approximation_constant, gap_ratio, reduce, ReduceBudget, ReduceMode,
};
use cslab::solvers::{
    branch_decide, branch_opt, brute_force_opt, clique_brute_force, max_distance,
    DEFAULT_BRUTE_CAP_BITS, DEFAULT_CLIQUE_CAP,
};
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::time::{Duration, Instant};

/// Character-by-character Hamming distance, independent of the bit kernels.
fn naive_distance(a: &BitString, b: &BitString) -> usize {
    let (a, b) = (a.to_string(), b.to_string());
    assert_eq!(a.len(), b.len());
    a.chars().zip(b.chars()).filter(|(x, y)| x != y).count()
}

fn naive_weight(a: &BitString) -> usize {
    a.to_string().chars().filter(|&c| c == '1').count()
}

#[test]
fn criterion_1_code_construction() {
    for (params, label) in [(CodeParams::desk16(), "desk16"), (CodeParams::desk20(), "desk20")] {
        let start = Instant::now();
        let full = SelectionCode::greedy_to_exhaustion(&params).expect("profile is valid");
        let capacity = full.len();
        assert!(capacity >= 1);
        for n in 1..=capacity {
            let code = SelectionCode::greedy(n, &params).expect("within capacity");
            code.verify(n).expect("constructed code must verify");
            // Independent oracle: recompute weights and all pairwise
            // distances at character level.
            for m in code.members() {
                assert_eq!(naive_weight(m), params.block_len / 2);
            }
            for i in 0..n {
                for j in i + 1..n {
                    let d = naive_distance(code.member(i), code.member(j));
                    assert!(
                        d > params.orth_lo() && d < params.orth_hi(),
                        "{label}: pair ({i},{j}) at distance {d}"
                    );
                }
            }
        }
        let elapsed = start.elapsed();
        assert!(elapsed < Duration::from_secs(10), "{label} took {elapsed:?}");
        println!(
            "criterion 1 code construction [{label}]: PASS (capacity {capacity}, {} ms)",
            elapsed.as_millis()
        );
    }
}

#[test]
fn criterion_2_forbidden_lemmas_exhaustive() {
    let start = Instant::now();
    let params = CodeParams::desk16();
    let code = SelectionCode::greedy(6, &params).expect("desk16 capacity covers 6");
    let threshold = params.forbidden_threshold();
    assert_eq!(threshold, 14);
    let far_target = params.far_target();
    assert_eq!(far_target, 15);

    let (forbidden_count, far_count) = (0u64..1 << 16)
        .into_par_iter()
        .map(|pattern| {
            let y = BitString::from_index(16, pattern);
            // (a) membership against the independent two-loop oracle.
            let mut all_within = true;
            for m in code.members() {
                if naive_distance(m, &y) > threshold {
                    all_within = false;
                }
            }
            assert_eq!(code.is_forbidden(&y), all_within, "membership mismatch at {pattern}");

            // (b) far-forbidden construction for every string at distance at
            // least delta_bits = 1 from the whole code.
            let min_dist = code.members().iter().map(|m| naive_distance(m, &y)).min().unwrap();
            let mut far = 0u64;
            if min_dist >= params.delta_bits {
                let far_str = code
                    .find_far_forbidden(&y)
                    .expect("construction must succeed for far strings");
                assert!(
                    code.members().iter().all(|m| naive_distance(m, &far_str) <= threshold),
                    "returned string not forbidden for {pattern}"
                );
                assert!(
                    naive_distance(&y, &far_str) >= far_target,
                    "returned string too close for {pattern}"
                );
                far = 1;
            }
            (all_within as u64, far)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));

    assert_eq!(forbidden_count, code.count_forbidden());
    assert_eq!(far_count, (1 << 16) - 6, "only the 6 members sit within delta of the code");
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    println!(
        "criterion 2 forbidden lemmas: PASS ({forbidden_count} forbidden, {far_count} far strings, {} ms)",
        elapsed.as_millis()
    );
}

#[test]
fn criterion_3_reduction_structure() {
    let params = CodeParams::desk16();
    let g = CliqueInstance::cycle(5, 3).unwrap();
    let red = reduce(&g, &params, ReduceMode::Full, &ReduceBudget::default()).unwrap();
    let inst = &red.instance;

    assert_eq!(inst.total_len(), 52);
    assert_eq!(inst.d(), 34);

    // Forbidden-set size recomputed with the character-level oracle.
    let threshold = params.forbidden_threshold();
    let forb_oracle = (0u64..1 << 16)
        .into_par_iter()
        .filter(|&p| {
            let y = BitString::from_index(16, p);
            red.coding.code().members().iter().all(|m| naive_distance(m, &y) <= threshold)
        })
        .count();
    assert_eq!(inst.forbidden_size().unwrap(), forb_oracle);

    let k = 3usize;
    let gamma = params.gamma_bits();
    assert_eq!(
        inst.sel_count(),
        k * forb_oracle * (1 << (k - 1)) * (1 << gamma),
        "selection family must match its closed form exactly"
    );
    // Eligible ordered pairs on a 5-cycle: 5 equal pairs plus both orders of
    // the 5 chords.
    let eligible = inst.eligible_pair_count().unwrap();
    assert_eq!(eligible, 15);
    assert_eq!(inst.adj_count(), (k * (k - 1) / 2) * eligible * (1 << (k - 2)));
    assert!(inst.adj_count() <= (k * (k - 1) / 2) * 5 * 5 * (1 << (k - 2)));

    println!(
        "criterion 3 reduction structure: PASS (sel={}, adj={}, L=52, d=34)",
        inst.sel_count(),
        inst.adj_count()
    );
}

#[test]
fn criterion_4_completeness() {
    let start = Instant::now();
    let params = CodeParams::desk16();
    let corpus = planted_corpus(3);
    assert!(corpus.len() >= 5);
    for g in &corpus {
        assert!(g.n() <= 8 && g.k() == 3);
        let red = reduce(g, &params, ReduceMode::Full, &ReduceBudget::default()).unwrap();
        let clique = clique_brute_force(g, DEFAULT_CLIQUE_CAP)
            .unwrap()
            .expect("corpus graphs contain a clique");
        let center = completeness_center(g, &clique, &red.coding).unwrap();
        let (value, tag) = max_distance(&center, &red.instance);
        assert!(
            value <= red.instance.d(),
            "{g}: completeness center reaches {value} > {} (argmax {tag:?})",
            red.instance.d()
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(600), "took {elapsed:?}");
    println!(
        "criterion 4 completeness: PASS ({} graphs, {} ms)",
        corpus.len(),
        elapsed.as_millis()
    );
}

#[test]
fn criterion_5_soundness_probe() {
    let start = Instant::now();
    let params = CodeParams::desk16();
    let corpus = cliquefree_corpus(3);
    assert!(corpus.len() >= 5);
    for g in &corpus {
        assert!(g.n() <= 8 && g.k() == 3);
        assert_eq!(clique_brute_force(g, DEFAULT_CLIQUE_CAP).unwrap(), None, "{g} must be clique-free");
        let red = reduce(g, &params, ReduceMode::Full, &ReduceBudget::default()).unwrap();
        let report = soundness_probe(&red.instance, &red.coding, 1 << 20).unwrap();
        assert!(report.complete);
        assert_eq!(report.tuples_scanned, (g.n() as u64).pow(3));
        assert!(
            report.min_max >= 35,
            "{g}: tuple {:?} reaches only {}",
            report.argmin_tuple,
            report.min_max
        );
        assert_eq!(report.certificate.violations, 0);
        assert!(report.certificate.matches_gap_target);
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(1800), "took {elapsed:?}");
    println!(
        "criterion 5 soundness probe: PASS ({} graphs, {} ms)",
        corpus.len(),
        elapsed.as_millis()
    );
}

#[test]
fn criterion_6_gap_ratio() {
    let params = CodeParams::desk16();
    let g = CliqueInstance::cycle(5, 3).unwrap();
    // The ratio depends only on the layout arithmetic, so a small sampled
    // instance carries it.
    let mode = ReduceMode::Sampled { seed: 0, sel_samples: 10, adj_samples: 5, probe: None };
    let red = reduce(&g, &params, mode, &ReduceBudget::default()).unwrap();
    assert_eq!(gap_ratio(&red.instance), Ratio::new(35u64, 34));
    assert_eq!(approximation_constant(&CodeParams::classic(100)), 40);
    println!("criterion 6 gap ratio: PASS (35/34 at desk16 k=3, c=40 at classic100)");
}

#[test]
fn criterion_7_solver_cross_equivalence() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7777);
    for case in 0..200 {
        let len = rng.gen_range(4..=16);
        let count = rng.gen_range(2..=6);
        let strings: Vec<BitString> =
            (0..count).map(|_| BitString::from_fn(len, |_| rng.gen_bool(0.5))).collect();

        let brute = brute_force_opt(&strings, DEFAULT_BRUTE_CAP_BITS).unwrap();
        let branch = branch_opt(&strings).unwrap();
        assert_eq!(brute.optimum, branch.optimum, "case {case} disagrees on the optimum");
        // The reported witnesses must satisfy their own optimum.
        assert_eq!(strings.iter().map(|s| s.distance(&branch.witness)).max().unwrap(), branch.optimum);
        assert_eq!(strings.iter().map(|s| s.distance(&brute.witness)).max().unwrap(), brute.optimum);

        for d in 0..=len {
            let expected = brute.optimum <= d;
            let got = branch_decide(&strings, d).unwrap().is_yes();
            assert_eq!(got, expected, "case {case}: decision at d={d}");
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(300), "took {elapsed:?}");
    println!("criterion 7 solver cross-equivalence: PASS (200 instances, {} ms)", elapsed.as_millis());
}

#[test]
fn criterion_8_determinism() {
    // Re-run the machinery behind criteria 1-6 and require byte-identical
    // outputs.
    let desk = CodeParams::desk16();

    // Criterion 1 outputs: rendered codes.
    for params in [desk, CodeParams::desk20()] {
        let a = SelectionCode::greedy_to_exhaustion(&params).unwrap().render();
        let b = SelectionCode::greedy_to_exhaustion(&params).unwrap().render();
        assert_eq!(a, b);
    }

    // Criterion 2 outputs: the full far-forbidden map at n=6.
    let code = SelectionCode::greedy(6, &desk).unwrap();
    let far_map = |code: &SelectionCode| -> Vec<u64> {
        (0u64..1 << 16)
            .filter_map(|p| {
                let u = BitString::from_index(16, p);
                if code.min_distance(&u).unwrap().0 >= desk.delta_bits {
                    Some(code.find_far_forbidden(&u).unwrap().to_index())
                } else {
                    None
                }
            })
            .collect()
    };
    assert_eq!(far_map(&code), far_map(&code));

    // Criterion 3 outputs: packed instance rows and the manifest.
    let c5 = CliqueInstance::cycle(5, 3).unwrap();
    let r1 = reduce(&c5, &desk, ReduceMode::Full, &ReduceBudget::default()).unwrap();
    let r2 = reduce(&c5, &desk, ReduceMode::Full, &ReduceBudget::default()).unwrap();
    assert_eq!(r1.instance.num_rows(), r2.instance.num_rows());
    let rows_equal = (0..r1.instance.num_rows())
        .all(|r| r1.instance.row_words(r) == r2.instance.row_words(r));
    assert!(rows_equal, "full reductions must be byte-identical");
    assert_eq!(r1.instance.render_manifest(), r2.instance.render_manifest());

    // Criteria 4-6 outputs: the canonical experiment report, yes-case.
    let tri = CliqueInstance::planted_clique(6, 3, 0.2, 1).unwrap();
    let config = HarnessConfig::default();
    let a = gap_experiment(&tri, &desk, &config).unwrap().canonical_text();
    let b = gap_experiment(&tri, &desk, &config).unwrap().canonical_text();
    assert_eq!(a, b);
    assert!(a.contains("verdict: PASS"));

    println!("criterion 8 determinism: PASS");
}
