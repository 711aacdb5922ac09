//! Construction and verification of the selection code: a family of
//! balanced binary strings whose pairwise distances all fall strictly inside
//! a narrow band around half the length, together with the forbidden-string
//! membership test built on top of it.
//!
//! The constant profile is parameterized rather than fixed. Each validity
//! predicate in [`CodeParams::validate`] corresponds to one inequality the
//! downstream distance arguments consume, so any passing profile supports
//! the full construction-and-certification pipeline.

use crate::bitstr::BitString;
use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// Full-enumeration construction walks all `2^block_len` strings and keeps a
/// used-marker per string; beyond this many bits the marking array no longer
/// fits a sane memory budget and the randomized mode takes over.
pub const FULL_ENUM_MAX_BITS: usize = 26;

/// Default per-round retry budget for the randomized construction mode.
pub const DEFAULT_RANDOM_RETRIES: usize = 200_000;

/// Constant profile for the code and everything built on it, expressed in
/// bits rather than ratios so all derived quantities are exact integers.
///
/// * `alpha_bits`: orthogonality slack; pairwise code distances must lie
///   strictly inside `(block_len/2 - alpha_bits, block_len/2 + alpha_bits)`.
/// * `beta_bits`: opposition slack; a string is forbidden when its distance
///   to every code member is at most `block_len - beta_bits`.
/// * `delta_bits`: closeness threshold separating "near some code member"
///   from "far from the whole code".
/// * The balancing block has `gamma_bits() = alpha_bits + beta_bits` bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeParams {
    pub block_len: usize,
    pub alpha_bits: usize,
    pub beta_bits: usize,
    pub delta_bits: usize,
}

impl CodeParams {
    pub fn new(block_len: usize, alpha_bits: usize, beta_bits: usize, delta_bits: usize) -> Self {
        CodeParams { block_len, alpha_bits, beta_bits, delta_bits }
    }

    /// Default desk-scale profile: 16-bit blocks, exhaustively checkable.
    pub fn desk16() -> Self {
        CodeParams::new(16, 2, 2, 1)
    }

    /// Larger desk profile for the same slack widths.
    pub fn desk20() -> Self {
        CodeParams::new(20, 2, 2, 1)
    }

    /// The classic ratio profile (alpha, beta, delta) = (1/100, 1/10, 1/20)
    /// scaled to a block length divisible by 100.
    pub fn classic(block_len: usize) -> Self {
        assert!(
            block_len > 0 && block_len.is_multiple_of(100),
            "classic ratios need a block length divisible by 100"
        );
        CodeParams::new(block_len, block_len / 100, block_len / 10, block_len / 20)
    }

    pub fn gamma_bits(&self) -> usize {
        self.alpha_bits + self.beta_bits
    }

    /// Target weight of every code member.
    pub fn half(&self) -> usize {
        self.block_len / 2
    }

    /// Pairwise distances must exceed this (exclusive lower band edge).
    pub fn orth_lo(&self) -> usize {
        self.half().saturating_sub(self.alpha_bits)
    }

    /// Pairwise distances must stay below this (exclusive upper band edge).
    pub fn orth_hi(&self) -> usize {
        self.half() + self.alpha_bits
    }

    /// A string is forbidden iff its distance to every member is at most
    /// this.
    pub fn forbidden_threshold(&self) -> usize {
        self.block_len - self.beta_bits
    }

    /// Distance the far-forbidden construction guarantees.
    pub fn far_target(&self) -> usize {
        self.block_len - self.delta_bits
    }

    /// Checks every predicate the downstream arguments rely on and reports
    /// all violations; an empty report is a pass.
    pub fn validate(&self) -> ParamsReport {
        let mut violations = Vec::new();
        let mut fail = |rule: String, guards: &'static str| {
            violations.push(RuleViolation { rule, guards });
        };

        if self.block_len == 0 || !self.block_len.is_multiple_of(2) {
            fail(
                format!("block_len must be positive and even (got {})", self.block_len),
                "the balanced weight block_len/2 must be an integer",
            );
        }
        if self.alpha_bits == 0 || self.beta_bits == 0 || self.delta_bits == 0 {
            fail(
                format!(
                    "alpha_bits, beta_bits, delta_bits must all be positive (got {}, {}, {})",
                    self.alpha_bits, self.beta_bits, self.delta_bits
                ),
                "zero-width margins collapse the distance bands",
            );
        }
        if self.beta_bits != 2 * self.delta_bits {
            fail(
                format!(
                    "beta_bits must equal 2*delta_bits (got {} vs 2*{})",
                    self.beta_bits, self.delta_bits
                ),
                "the far-forbidden flip step must land exactly delta_bits past the forbidden threshold",
            );
        }
        if self.block_len.is_multiple_of(2) && 5 * self.delta_bits >= self.half().saturating_sub(self.alpha_bits) {
            fail(
                format!(
                    "5*delta_bits must be below block_len/2 - alpha_bits ({} vs {})",
                    5 * self.delta_bits,
                    self.half() as isize - self.alpha_bits as isize
                ),
                "keeps 2*beta+delta and 3*delta below the orthogonality floor, which the \
                 far-forbidden membership argument and the adjacency-violation penalty both need",
            );
        }
        if self.beta_bits + self.delta_bits >= self.block_len {
            fail(
                format!(
                    "beta_bits + delta_bits must be below block_len ({} vs {})",
                    self.beta_bits + self.delta_bits,
                    self.block_len
                ),
                "a flip set of delta_bits agreeing positions must always exist",
            );
        }
        if self.block_len.is_multiple_of(2) {
            let lo = self.orth_lo();
            let hi = self.orth_hi();
            let has_even = (lo + 1..hi).any(|v| v != 0 && v % 2 == 0);
            if !has_even {
                fail(
                    format!("open interval ({lo}, {hi}) contains no nonzero even integer"),
                    "balanced strings sit at even pairwise distances; the orthogonality band must \
                     admit at least one",
                );
            }
        }
        ParamsReport { violations }
    }

    pub fn is_valid(&self) -> bool {
        self.validate().passed()
    }
}

/// One violated validity predicate, with the downstream step it protects.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RuleViolation {
    pub rule: String,
    pub guards: &'static str,
}

/// Outcome of [`CodeParams::validate`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ParamsReport {
    pub violations: Vec<RuleViolation>,
}

impl ParamsReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ParamsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.passed() {
            return writeln!(f, "params: pass");
        }
        writeln!(f, "params: fail ({} violation(s))", self.violations.len())?;
        for v in &self.violations {
            writeln!(f, "  - {} [protects: {}]", v.rule, v.guards)?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum CodegenError {
    #[error("invalid parameter profile:\n{0}")]
    InvalidParams(ParamsReport),
    #[error("block length {block_len} exceeds the full-enumeration cap of {cap} bits")]
    EnumTooLarge { block_len: usize, cap: usize },
    #[error("code capacity exhausted: constructed {constructed} of {requested} members")]
    Exhausted { constructed: usize, requested: usize },
    #[error(
        "string is within {distance} < {required} of code member {member_index} ({member}); \
         the far-forbidden construction requires distance at least {required} from every member"
    )]
    TooCloseToCode {
        member_index: usize,
        member: BitString,
        distance: usize,
        required: usize,
    },
    #[error("code file is malformed: {0}")]
    BadFile(String),
}

/// Binary entropy `-p*log2(p) - (1-p)*log2(1-p)`.
pub fn entropy(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "entropy is defined on (0, 1); got {p}");
    -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
}

fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// Approximate base-2 logarithm of a big integer, good to ~1e-12 relative.
fn log2_biguint(v: &BigUint) -> f64 {
    let bits = v.bits();
    if bits <= 53 {
        return v.to_f64().unwrap().log2();
    }
    let shifted = v >> (bits - 53);
    shifted.to_f64().unwrap().log2() + (bits - 53) as f64
}

/// Exact count of strings whose distance from any fixed string falls outside
/// the open orthogonality band: the two binomial tails
/// `sum_{i<=half-alpha} C(l,i) + sum_{i>=half+alpha} C(l,i)`.
///
/// This bounds the number of strings each greedy round marks as used. The
/// entropy sanity bound `A <= 2 * 2^(l*H2((half-alpha)/l))` is asserted.
pub fn tail_count(params: &CodeParams) -> BigUint {
    let l = params.block_len;
    let lo = params.orth_lo();
    let hi = params.orth_hi();
    let mut a = BigUint::zero();
    for i in 0..=lo {
        a += binomial(l, i);
    }
    for i in hi..=l {
        a += binomial(l, i);
    }
    let h = entropy(lo as f64 / l as f64);
    assert!(
        log2_biguint(&a) <= 1.0 + l as f64 * h + 1e-9,
        "tail count exceeds its entropy bound"
    );
    a
}

/// What a code verification found wrong, if anything.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum CodeViolation {
    #[error("code has {actual} members; expected {expected}")]
    Size { expected: usize, actual: usize },
    #[error("member {index} has weight {weight}; every member must weigh {expected}")]
    Weight { index: usize, weight: usize, expected: usize },
    #[error(
        "members {first} and {second} are at distance {distance}, outside the open band ({lo}, {hi})"
    )]
    Distance { first: usize, second: usize, distance: usize, lo: usize, hi: usize },
}

/// The selection code: an ordered family of balanced strings with pairwise
/// distances strictly inside the orthogonality band, in construction order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SelectionCode {
    params: CodeParams,
    members: Vec<BitString>,
}

impl SelectionCode {
    /// Deterministic full-enumeration greedy construction.
    ///
    /// Rounds alternate picking the lexicographically least unused balanced
    /// string and marking everything outside the open band around the pick
    /// as used. Fails with [`CodegenError::Exhausted`] when fewer than `n`
    /// rounds succeed; the error carries the count achieved.
    pub fn greedy(n: usize, params: &CodeParams) -> Result<Self, CodegenError> {
        Self::greedy_rounds(params, n, false)
    }

    /// Runs the full-enumeration greedy until no unused balanced string
    /// remains, returning whatever capacity the profile admits.
    pub fn greedy_to_exhaustion(params: &CodeParams) -> Result<Self, CodegenError> {
        Self::greedy_rounds(params, usize::MAX, true)
    }

    fn greedy_rounds(params: &CodeParams, n: usize, stop_at_capacity: bool) -> Result<Self, CodegenError> {
        let report = params.validate();
        if !report.passed() {
            return Err(CodegenError::InvalidParams(report));
        }
        let bits = params.block_len;
        if bits > FULL_ENUM_MAX_BITS {
            return Err(CodegenError::EnumTooLarge { block_len: bits, cap: FULL_ENUM_MAX_BITS });
        }
        let space = 1u64 << bits;
        let half = params.half() as u32;
        let lo = params.orth_lo() as u32;
        let hi = params.orth_hi() as u32;

        let mut used = vec![0u64; (space as usize).div_ceil(64)];
        let mut members = Vec::new();
        // Strings only ever become used, so the least unused balanced string
        // never moves backwards and one forward cursor suffices.
        let mut cursor = 0u64;
        while members.len() < n {
            while cursor < space
                && (cursor.count_ones() != half || used[(cursor >> 6) as usize] >> (cursor & 63) & 1 == 1)
            {
                cursor += 1;
            }
            if cursor == space {
                if stop_at_capacity {
                    break;
                }
                return Err(CodegenError::Exhausted { constructed: members.len(), requested: n });
            }
            let pick = cursor;
            members.push(BitString::from_index(bits, pick));
            for y in 0..space {
                let d = (pick ^ y).count_ones();
                if d <= lo || d >= hi {
                    used[(y >> 6) as usize] |= 1 << (y & 63);
                }
            }
        }
        Ok(SelectionCode { params: *params, members })
    }

    /// Seeded randomized construction for block lengths beyond the
    /// full-enumeration cap: sample balanced strings uniformly and keep the
    /// ones that respect the band against everything kept so far.
    pub fn randomized(
        n: usize,
        params: &CodeParams,
        seed: u64,
        retries_per_round: usize,
    ) -> Result<Self, CodegenError> {
        let report = params.validate();
        if !report.passed() {
            return Err(CodegenError::InvalidParams(report));
        }
        let bits = params.block_len;
        let lo = params.orth_lo();
        let hi = params.orth_hi();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut positions: Vec<usize> = (0..bits).collect();
        let mut members: Vec<BitString> = Vec::with_capacity(n);
        while members.len() < n {
            let mut accepted = false;
            for _ in 0..retries_per_round {
                positions.shuffle(&mut rng);
                let mut ones = positions[..params.half()].to_vec();
                ones.sort_unstable();
                let cand = BitString::from_fn(bits, |p| ones.binary_search(&p).is_ok());
                if members.iter().all(|m| {
                    let d = m.distance(&cand);
                    d > lo && d < hi
                }) {
                    members.push(cand);
                    accepted = true;
                    break;
                }
            }
            if !accepted {
                return Err(CodegenError::Exhausted { constructed: members.len(), requested: n });
            }
        }
        Ok(SelectionCode { params: *params, members })
    }

    /// Builds a code from raw parts without any property checks; callers are
    /// expected to run [`SelectionCode::verify`] if the source is untrusted.
    pub fn from_parts(params: CodeParams, members: Vec<BitString>) -> Self {
        SelectionCode { params, members }
    }

    pub fn params(&self) -> &CodeParams {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn member(&self, i: usize) -> &BitString {
        &self.members[i]
    }

    pub fn members(&self) -> &[BitString] {
        &self.members
    }

    /// Minimum distance from `u` to the code and the index attaining it.
    pub fn min_distance(&self, u: &BitString) -> Option<(usize, usize)> {
        self.members
            .iter()
            .enumerate()
            .map(|(i, m)| (m.distance(u), i))
            .min()
    }

    /// A string is forbidden when it is not almost diametrically opposite to
    /// any member: every member sits within the forbidden threshold.
    pub fn is_forbidden(&self, y: &BitString) -> bool {
        assert_eq!(y.len(), self.params.block_len, "forbidden test needs a block-length string");
        let t = self.params.forbidden_threshold();
        self.members.iter().all(|m| m.distance(y) <= t)
    }

    /// Same membership test on the index form, for enumeration loops.
    fn is_forbidden_pattern(&self, patterns: &[u64], y: u64) -> bool {
        let t = self.params.forbidden_threshold() as u32;
        patterns.iter().all(|&m| (m ^ y).count_ones() <= t)
    }

    /// Index forms of all members (block length must be at most 64 bits).
    pub fn member_patterns(&self) -> Vec<u64> {
        self.members.iter().map(|m| m.to_index()).collect()
    }

    /// Streams the forbidden set in ascending index order. Enumerates the
    /// whole `2^block_len` space; the caller is responsible for budgeting.
    pub fn forbidden_patterns(&self) -> impl Iterator<Item = u64> + '_ {
        assert!(self.params.block_len <= 64);
        let patterns = self.member_patterns();
        let space: u64 = 1u64 << self.params.block_len;
        (0..space).filter(move |&y| self.is_forbidden_pattern(&patterns, y))
    }

    pub fn count_forbidden(&self) -> u64 {
        self.forbidden_patterns().count() as u64
    }

    /// Given `u` at distance at least `delta_bits` from every member,
    /// produces a forbidden string at distance at least
    /// `block_len - delta_bits` from `u`.
    ///
    /// The construction takes the complement of `u` when that is already
    /// forbidden; otherwise it finds the first member almost opposite to the
    /// complement and flips the first `delta_bits` positions (ascending) on
    /// which the two complements agree.
    pub fn find_far_forbidden(&self, u: &BitString) -> Result<BitString, CodegenError> {
        assert_eq!(u.len(), self.params.block_len);
        let required = self.params.delta_bits;
        if let Some((d, i)) = self.min_distance(u) {
            if d < required {
                return Err(CodegenError::TooCloseToCode {
                    member_index: i,
                    member: self.members[i].clone(),
                    distance: d,
                    required,
                });
            }
        }
        let comp = u.complement();
        if self.is_forbidden(&comp) {
            return Ok(comp);
        }
        let threshold = self.params.forbidden_threshold();
        let blocker = self
            .members
            .iter()
            .find(|m| m.distance(&comp) > threshold)
            .expect("a non-forbidden string has a member beyond the threshold");
        let blocker_comp = blocker.complement();
        // Flip the first delta_bits positions where comp agrees with the
        // blocking member's complement; agreement positions are exactly the
        // non-mismatch positions, walked in ascending order.
        let mut flipped = comp.clone();
        let mut remaining = self.params.delta_bits;
        let mut mismatches = comp.mismatch_positions(&blocker_comp).peekable();
        for p in 0..self.params.block_len {
            if remaining == 0 {
                break;
            }
            if mismatches.peek() == Some(&p) {
                mismatches.next();
                continue;
            }
            flipped = flipped.with_bit(p, !flipped.get(p));
            remaining -= 1;
        }
        debug_assert_eq!(remaining, 0, "agreement positions exhausted before delta_bits flips");
        debug_assert!(self.is_forbidden(&flipped));
        debug_assert!(u.distance(&flipped) >= self.params.far_target());
        Ok(flipped)
    }

    /// Checks the construction contract: expected size, balanced weights,
    /// and all pairwise distances strictly inside the band. Reports the
    /// first violation found.
    pub fn verify(&self, expected: usize) -> Result<(), CodeViolation> {
        if self.members.len() != expected {
            return Err(CodeViolation::Size { expected, actual: self.members.len() });
        }
        let half = self.params.half();
        for (i, m) in self.members.iter().enumerate() {
            let w = m.weight();
            if w != half {
                return Err(CodeViolation::Weight { index: i, weight: w, expected: half });
            }
        }
        let (lo, hi) = (self.params.orth_lo(), self.params.orth_hi());
        for i in 0..self.members.len() {
            for j in i + 1..self.members.len() {
                let d = self.members[i].distance(&self.members[j]);
                if d <= lo || d >= hi {
                    return Err(CodeViolation::Distance { first: i, second: j, distance: d, lo, hi });
                }
            }
        }
        Ok(())
    }

    /// Renders the code file format: a header line
    /// `block_len alpha_bits beta_bits delta_bits n` followed by one member
    /// per line. Round-trips exactly through [`SelectionCode::parse`].
    pub fn render(&self) -> String {
        let mut out = format!(
            "{} {} {} {} {}\n",
            self.params.block_len,
            self.params.alpha_bits,
            self.params.beta_bits,
            self.params.delta_bits,
            self.members.len()
        );
        for m in &self.members {
            out.push_str(&m.to_string());
            out.push('\n');
        }
        out
    }

    /// Parses the code file format. Validates structure (header arithmetic,
    /// counts, lengths) but not the distance properties; run
    /// [`SelectionCode::verify`] to check those.
    pub fn parse(text: &str) -> Result<Self, CodegenError> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| CodegenError::BadFile("empty file".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 5 {
            return Err(CodegenError::BadFile(format!(
                "header must be 'block_len alpha beta delta n'; got {header:?}"
            )));
        }
        let parse = |s: &str| -> Result<usize, CodegenError> {
            s.parse().map_err(|_| CodegenError::BadFile(format!("bad integer {s:?} in header")))
        };
        let params = CodeParams::new(parse(fields[0])?, parse(fields[1])?, parse(fields[2])?, parse(fields[3])?);
        let n = parse(fields[4])?;
        let mut members = Vec::with_capacity(n);
        for line in lines {
            let m: BitString = line
                .parse()
                .map_err(|e| CodegenError::BadFile(format!("bad member line {line:?}: {e}")))?;
            if m.len() != params.block_len {
                return Err(CodegenError::BadFile(format!(
                    "member has length {}; header says {}",
                    m.len(),
                    params.block_len
                )));
            }
            members.push(m);
        }
        if members.len() != n {
            return Err(CodegenError::BadFile(format!(
                "header promises {n} members; file has {}",
                members.len()
            )));
        }
        Ok(SelectionCode { params, members })
    }
}
