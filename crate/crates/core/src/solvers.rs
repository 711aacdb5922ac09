//! Exact Closest String solvers for small inputs, a brute-force Clique
//! oracle, and streaming objective evaluation against reduced instances.
//!
//! The reduced instances themselves are far outside the reach of any exact
//! solver (their decision distance scales with the whole block structure),
//! so these exist to certify the machinery on desk-sized inputs and to
//! cross-check one another.

use crate::bitstr::{distance_words, BitString};
use crate::graphs::CliqueInstance;
use crate::reducer::{ClosestStringInstance, Tag};
use itertools::Itertools;
use rayon::prelude::*;
use std::time::{Duration, Instant};
use thiserror::Error;

/// Default cap on `2^L` center enumeration.
pub const DEFAULT_BRUTE_CAP_BITS: usize = 24;

/// Default cap on the number of `k`-subsets the clique oracle will visit.
pub const DEFAULT_CLIQUE_CAP: u64 = 10_000_000;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("no constraints given; the objective is undefined")]
    EmptyFamily,
    #[error("constraints must share one length; found {0} and {1}")]
    MixedLengths(usize, usize),
    #[error("length {len} exceeds the enumeration cap of {cap} bits")]
    CapExceeded { len: usize, cap: usize },
    #[error("{subsets} subsets exceed the enumeration budget of {cap}")]
    SubsetBudget { subsets: u128, cap: u64 },
    #[error("search exceeded the node budget of {0}")]
    NodeBudget(u64),
}

/// Result of an exact optimization run. The witness invariant (its maximum
/// distance over the constraints equals `optimum`) is re-checked by the
/// solver before returning.
#[derive(Clone, Debug)]
pub struct SolveResult {
    pub optimum: usize,
    pub witness: BitString,
    pub nodes: u64,
    pub wall: Duration,
}

impl SolveResult {
    pub fn render(&self) -> String {
        format!(
            "optimum: {}\nwitness: {}\nnodes: {}\ntime_ms: {}\n",
            self.optimum,
            self.witness,
            self.nodes,
            self.wall.as_millis()
        )
    }
}

/// Outcome of a decision query.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decision {
    Yes(BitString),
    No,
}

impl Decision {
    pub fn is_yes(&self) -> bool {
        matches!(self, Decision::Yes(_))
    }
}

fn check_family(strings: &[BitString]) -> Result<usize, SolverError> {
    let first = strings.first().ok_or(SolverError::EmptyFamily)?;
    for s in strings {
        if s.len() != first.len() {
            return Err(SolverError::MixedLengths(first.len(), s.len()));
        }
    }
    Ok(first.len())
}

/// Exact optimum by enumerating every center of length `L <= cap_bits`,
/// in ascending index order so the reported witness is the
/// lexicographically least optimal center. Deterministic under any degree
/// of parallelism.
pub fn brute_force_opt(strings: &[BitString], cap_bits: usize) -> Result<SolveResult, SolverError> {
    let start = Instant::now();
    let len = check_family(strings)?;
    if len > cap_bits || cap_bits > 63 {
        return Err(SolverError::CapExceeded { len, cap: cap_bits.min(63) });
    }
    let patterns: Vec<u64> = strings.iter().map(|s| s.to_index()).collect();
    let space = 1u64 << len;
    let (best_val, best_center) = (0..space)
        .into_par_iter()
        .map(|center| {
            let val = patterns.iter().map(|&p| (p ^ center).count_ones() as usize).max().unwrap();
            (val, center)
        })
        .reduce(|| (usize::MAX, 0), |a, b| if b < a { b } else { a });
    let witness = BitString::from_index(len, best_center);
    debug_assert_eq!(strings.iter().map(|s| s.distance(&witness)).max().unwrap(), best_val);
    Ok(SolveResult { optimum: best_val, witness, nodes: space, wall: start.elapsed() })
}

/// Decides whether a center within distance `d` of every constraint exists,
/// via the classical flip-toward-a-violator recursion: starting from the
/// first constraint, while some constraint sits beyond `d`, branch over its
/// first `d + 1` mismatch positions, spending one unit of flip budget per
/// branch step.
pub fn branch_decide(strings: &[BitString], d: usize) -> Result<Decision, SolverError> {
    branch_decide_with_budget(strings, d, None).map(|(decision, _)| decision)
}

/// Same as [`branch_decide`], with an optional node budget and the explored
/// node count. The witness, when one exists, is the first found in
/// depth-first order and is therefore deterministic.
pub fn branch_decide_with_budget(
    strings: &[BitString],
    d: usize,
    max_nodes: Option<u64>,
) -> Result<(Decision, u64), SolverError> {
    check_family(strings)?;
    let words: Vec<&[u64]> = strings.iter().map(|s| s.words()).collect();
    let mut candidate: Vec<u64> = words[0].to_vec();
    let mut nodes = 0u64;
    let found = branch_rec(&words, strings, d, &mut candidate, d, &mut nodes, max_nodes)?;
    let decision = match found {
        Some(words) => Decision::Yes(BitString::from_words(strings[0].len(), words)),
        None => Decision::No,
    };
    Ok((decision, nodes))
}

fn branch_rec(
    words: &[&[u64]],
    strings: &[BitString],
    d: usize,
    candidate: &mut Vec<u64>,
    budget: usize,
    nodes: &mut u64,
    max_nodes: Option<u64>,
) -> Result<Option<Vec<u64>>, SolverError> {
    *nodes += 1;
    if let Some(cap) = max_nodes {
        if *nodes > cap {
            return Err(SolverError::NodeBudget(cap));
        }
    }
    let violator = words.iter().position(|w| distance_words(candidate, w) > d);
    let Some(vi) = violator else {
        return Ok(Some(candidate.clone()));
    };
    let dist = distance_words(candidate, words[vi]);
    // No sequence of `budget` single-position moves can pull a constraint
    // closer than `dist - budget`.
    if dist > d + budget || budget == 0 {
        return Ok(None);
    }
    let x = &strings[vi];
    let positions: Vec<usize> = {
        let cand_bits = BitString::from_words(x.len(), candidate.clone());
        cand_bits.mismatch_positions(x).take(d + 1).collect()
    };
    for p in positions {
        let word = p >> 6;
        let mask = 1u64 << (p & 63);
        candidate[word] ^= mask; // move toward the violator at p
        let found = branch_rec(words, strings, d, candidate, budget - 1, nodes, max_nodes)?;
        candidate[word] ^= mask;
        if found.is_some() {
            return Ok(found);
        }
    }
    Ok(None)
}

/// Exact optimum via the branching decider, climbing from the pairwise
/// lower bound `ceil(max pairwise distance / 2)` until the first yes.
pub fn branch_opt(strings: &[BitString]) -> Result<SolveResult, SolverError> {
    let start = Instant::now();
    let len = check_family(strings)?;
    let mut lower = 0;
    for i in 0..strings.len() {
        for j in i + 1..strings.len() {
            lower = lower.max(strings[i].distance(&strings[j]).div_ceil(2));
        }
    }
    let mut nodes = 0u64;
    for d in lower..=len {
        let (decision, n) = branch_decide_with_budget(strings, d, None)?;
        nodes += n;
        if let Decision::Yes(witness) = decision {
            debug_assert_eq!(strings.iter().map(|s| s.distance(&witness)).max().unwrap(), d);
            return Ok(SolveResult { optimum: d, witness, nodes, wall: start.elapsed() });
        }
    }
    unreachable!("distance {len} always admits the first constraint as center");
}

/// First `k`-clique in lexicographic vertex order, or `None`. Refuses when
/// the number of `k`-subsets exceeds `cap`.
pub fn clique_brute_force(g: &CliqueInstance, cap: u64) -> Result<Option<Vec<usize>>, SolverError> {
    let subsets = binomial_u128(g.n(), g.k());
    if subsets > cap as u128 {
        return Err(SolverError::SubsetBudget { subsets, cap });
    }
    for cand in (0..g.n()).combinations(g.k()) {
        if g.is_clique(&cand) {
            return Ok(Some(cand));
        }
    }
    Ok(None)
}

fn binomial_u128(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i + 1) as u128;
    }
    acc
}

/// Maximum distance from `center` to any constraint of a reduced instance,
/// with the provenance tag of the first row (in canonical order) attaining
/// it. Streams the packed rows; parallel but deterministic.
pub fn max_distance(center: &BitString, inst: &ClosestStringInstance) -> (usize, Tag) {
    assert_eq!(center.len(), inst.total_len(), "center length must match the instance");
    let center_words = center.words();
    let (value, row) = (0..inst.num_rows())
        .into_par_iter()
        .map(|r| (distance_words(center_words, inst.row_words(r)), r))
        .reduce(
            || (0, usize::MAX),
            |a, b| {
                // Prefer the larger value; break ties toward the earlier row.
                match b.0.cmp(&a.0) {
                    std::cmp::Ordering::Greater => b,
                    std::cmp::Ordering::Equal if b.1 < a.1 => b,
                    _ => a,
                }
            },
        );
    (value, inst.tag(row))
}

/// Maximum distance from `center` over a plain string family, with the
/// index of the first maximizer.
pub fn max_distance_rows(center: &BitString, rows: &[BitString]) -> (usize, usize) {
    assert!(!rows.is_empty(), "objective undefined on an empty family");
    rows.iter()
        .enumerate()
        .map(|(i, r)| (center.distance(r), i))
        .max_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)))
        .unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codegen::CodeParams;
    use crate::reducer::{reduce, ReduceBudget, ReduceMode};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn family(texts: &[&str]) -> Vec<BitString> {
        texts.iter().map(|t| t.parse().unwrap()).collect()
    }

    #[test]
    fn brute_force_examples() {
        let r = brute_force_opt(&family(&["00", "11"]), DEFAULT_BRUTE_CAP_BITS).unwrap();
        assert_eq!(r.optimum, 1);
        assert_eq!(r.witness.to_string(), "01", "lexicographically least optimal center");

        let single = family(&["010011"]);
        let r = brute_force_opt(&single, DEFAULT_BRUTE_CAP_BITS).unwrap();
        assert_eq!(r.optimum, 0);
        assert_eq!(r.witness, single[0]);

        let r = brute_force_opt(&family(&["000", "111"]), DEFAULT_BRUTE_CAP_BITS).unwrap();
        assert_eq!(r.optimum, 2);
        assert_eq!(r.witness.to_string(), "001");
    }

    #[test]
    fn brute_force_refusals() {
        assert!(matches!(brute_force_opt(&[], 24), Err(SolverError::EmptyFamily)));
        let long = vec![BitString::zeros(30)];
        assert!(matches!(
            brute_force_opt(&long, 24),
            Err(SolverError::CapExceeded { len: 30, cap: 24 })
        ));
        assert!(matches!(
            brute_force_opt(&family(&["01", "011"]), 24),
            Err(SolverError::MixedLengths(2, 3))
        ));
    }

    #[test]
    fn branch_decide_examples() {
        let f = family(&["000", "111"]);
        assert_eq!(branch_decide(&f, 1).unwrap(), Decision::No);
        assert!(branch_decide(&f, 2).unwrap().is_yes());

        let same = family(&["0101", "0101"]);
        match branch_decide(&same, 0).unwrap() {
            Decision::Yes(w) => assert_eq!(w, same[0]),
            Decision::No => panic!("identical constraints admit themselves at distance 0"),
        }
    }

    #[test]
    fn branch_witnesses_satisfy_the_budget() {
        let f = family(&["010110", "110011", "001100"]);
        for d in 0..=6 {
            if let Decision::Yes(w) = branch_decide(&f, d).unwrap() {
                assert!(f.iter().map(|s| s.distance(&w)).max().unwrap() <= d);
            }
        }
    }

    #[test]
    fn branch_opt_examples() {
        assert_eq!(branch_opt(&family(&["00", "11"])).unwrap().optimum, 1);
        assert_eq!(branch_opt(&family(&["10010"])).unwrap().optimum, 0);
    }

    #[test]
    fn node_budget_is_enforced() {
        // At d = 8 the two extremes force real branching (distance 16 is
        // exactly d + budget, so nothing prunes at the root).
        let f = family(&["0000000000000000", "1111111111111111"]);
        let err = branch_decide_with_budget(&f, 8, Some(3));
        assert!(matches!(err, Err(SolverError::NodeBudget(3))));
        let (decision, nodes) = branch_decide_with_budget(&f, 8, None).unwrap();
        assert!(decision.is_yes());
        assert!(nodes > 3);
    }

    #[test]
    fn solvers_agree_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..30 {
            let len = rng.gen_range(4..=12);
            let count = rng.gen_range(2..=5);
            let strings: Vec<BitString> = (0..count)
                .map(|_| BitString::from_fn(len, |_| rng.gen_bool(0.5)))
                .collect();
            let brute = brute_force_opt(&strings, DEFAULT_BRUTE_CAP_BITS).unwrap();
            let branch = branch_opt(&strings).unwrap();
            assert_eq!(brute.optimum, branch.optimum);
            for d in 0..=len {
                let expected = brute.optimum <= d;
                assert_eq!(branch_decide(&strings, d).unwrap().is_yes(), expected);
            }
        }
    }

    #[test]
    fn clique_examples() {
        let triangle = CliqueInstance::complete(3, 3).unwrap();
        assert_eq!(clique_brute_force(&triangle, DEFAULT_CLIQUE_CAP).unwrap(), Some(vec![0, 1, 2]));

        let path = CliqueInstance::path(3, 3).unwrap();
        assert_eq!(clique_brute_force(&path, DEFAULT_CLIQUE_CAP).unwrap(), None);

        for seed in 0..10 {
            let g = CliqueInstance::planted_clique(9, 4, 0.25, seed).unwrap();
            let found = clique_brute_force(&g, DEFAULT_CLIQUE_CAP).unwrap();
            let clique = found.expect("planting guarantees a clique");
            assert!(g.is_clique(&clique));
        }

        let big = CliqueInstance::empty(64, 10).unwrap();
        assert!(matches!(
            clique_brute_force(&big, 1000),
            Err(SolverError::SubsetBudget { .. })
        ));
    }

    #[test]
    fn max_distance_rows_examples() {
        let rows = family(&["0110"]);
        assert_eq!(max_distance_rows(&rows[0], &rows), (0, 0));
        assert_eq!(max_distance_rows(&rows[0].complement(), &rows), (4, 0));

        // Reordering changes the argmax index but never the value.
        let rows = family(&["0000", "1111", "0011"]);
        let center: BitString = "0001".parse().unwrap();
        let (v1, _) = max_distance_rows(&center, &rows);
        let reordered = family(&["1111", "0011", "0000"]);
        let (v2, _) = max_distance_rows(&center, &reordered);
        assert_eq!(v1, v2);
    }

    #[test]
    fn max_distance_streams_instances() {
        let params = CodeParams::desk16();
        let g = CliqueInstance::cycle(5, 3).unwrap();
        let mode = ReduceMode::Sampled { seed: 5, sel_samples: 64, adj_samples: 16, probe: None };
        let red = reduce(&g, &params, mode, &ReduceBudget::default()).unwrap();
        let center = BitString::zeros(red.instance.total_len());
        let (value, tag) = max_distance(&center, &red.instance);
        // Recompute serially over materialized rows.
        let rows: Vec<BitString> =
            (0..red.instance.num_rows()).map(|r| red.instance.row_bits(r)).collect();
        let (expected, row) = max_distance_rows(&center, &rows);
        assert_eq!(value, expected);
        assert_eq!(tag, red.instance.tag(row));
    }
}
