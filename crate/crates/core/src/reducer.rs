//! Compilation of a Clique instance into a Closest String instance.
//!
//! The output string space is laid out as one block per clique slot followed
//! by a balancing block. Two constraint families are emitted: selection
//! constraints force any good center to pick a codeword per block, and
//! adjacency constraints penalize centers whose picks are equal or
//! non-adjacent. Full mode materializes both families exactly; sampled mode
//! draws a seeded subsample and can additionally include, per draw, the
//! fill/balance choices that are adversarial for a supplied probe center.
//!
//! Constraints are stored as packed rows in one contiguous buffer, in
//! canonical provenance order (all selection constraints sorted by their
//! tags, then all adjacency constraints sorted by theirs), so a reduction is
//! byte-reproducible. In full mode tags are decoded from the row index
//! instead of being stored.

use crate::bitstr::{copy_bit_span, words_for, BitString, Block, BlockLayout};
use crate::codegen::{CodegenError, CodeParams, ParamsReport, SelectionCode, FULL_ENUM_MAX_BITS};
use crate::graphs::CliqueInstance;
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::fmt;
use std::io::{self, Write};
use thiserror::Error;

/// Provenance tags hold block payloads as raw index-form patterns, which
/// caps the supported block length.
pub const MAX_TAG_BITS: usize = 64;

/// Fill-block masks are 32-bit, which caps the number of vertex blocks.
pub const MAX_BLOCKS: usize = 33;

const SAMPLING_TRIES: usize = 100_000;

#[derive(Debug, Error)]
pub enum ReduceError {
    #[error("invalid parameter profile:\n{0}")]
    InvalidParams(ParamsReport),
    #[error(transparent)]
    Code(#[from] CodegenError),
    #[error("block length {0} exceeds the {MAX_TAG_BITS}-bit provenance limit")]
    BlockTooLong(usize),
    #[error("{0} vertex blocks exceed the limit of {MAX_BLOCKS}")]
    TooManyBlocks(usize),
    #[error("full enumeration of the forbidden set needs block length at most {FULL_ENUM_MAX_BITS}; got {0}")]
    EnumTooLarge(usize),
    #[error("instance would hold {estimated} constraints, over the budget of {budget}")]
    Budget { estimated: u128, budget: u64 },
    #[error("graph has {n} vertices but the code holds {code_len} members")]
    CodingMismatch { n: usize, code_len: usize },
    #[error("selection constraints require a forbidden block payload")]
    NotForbidden,
    #[error("vertices {0} and {1} are distinct and adjacent; no adjacency constraint exists for such a pair")]
    PairNotEligible(usize, usize),
    #[error("probe center has length {got}; the instance layout needs {want}")]
    ProbeLength { got: usize, want: usize },
    #[error("sampling failed to find an admissible draw within {0} tries")]
    SamplingStuck(usize),
}

/// Bijection between graph vertices and code members: vertex `v` is encoded
/// by the `v`-th constructed member.
#[derive(Clone, Debug)]
pub struct VertexCoding {
    code: SelectionCode,
}

impl VertexCoding {
    pub fn new(code: SelectionCode, n: usize) -> Result<Self, ReduceError> {
        if code.len() != n {
            return Err(ReduceError::CodingMismatch { n, code_len: code.len() });
        }
        Ok(VertexCoding { code })
    }

    pub fn encode(&self, vertex: usize) -> &BitString {
        self.code.member(vertex)
    }

    pub fn code(&self) -> &SelectionCode {
        &self.code
    }

    pub fn len(&self) -> usize {
        self.code.len()
    }

    pub fn is_empty(&self) -> bool {
        self.code.is_empty()
    }
}

/// Where a constraint row came from. Block payloads are index-form patterns;
/// fill masks assign bit `t` to the `t`-th remaining block in ascending
/// order (set bit = all-ones fill).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Tag {
    /// Selection constraint: forbidden payload `y` on `block`, constant fill
    /// elsewhere, free balance payload `z`.
    Sel { block: u8, y: u64, phi: u32, z: u64 },
    /// Adjacency constraint: complemented codewords of an equal-or-non-adjacent
    /// ordered pair on two blocks, constant fill elsewhere, zero balance.
    Adj { block_a: u8, block_b: u8, first: u32, second: u32, psi: u32 },
}

impl Tag {
    /// Human-readable rendering with 1-indexed blocks and vertices and
    /// payloads spelled as bit text.
    pub fn describe(&self, params: &CodeParams, k: usize) -> String {
        match *self {
            Tag::Sel { block, y, phi, z } => format!(
                "sel(block={}, y={}, fill={}, balance={})",
                block + 1,
                BitString::from_index(params.block_len, y),
                mask_bits(phi, k - 1),
                BitString::from_index(params.gamma_bits(), z),
            ),
            Tag::Adj { block_a, block_b, first, second, psi } => format!(
                "adj(blocks=({}, {}), pair=({}, {}), fill={})",
                block_a + 1,
                block_b + 1,
                first + 1,
                second + 1,
                mask_bits(psi, k - 2),
            ),
        }
    }
}

fn mask_bits(mask: u32, width: usize) -> String {
    (0..width).map(|t| if mask >> t & 1 == 1 { '1' } else { '0' }).collect()
}

/// How to emit the constraint families.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ReduceMode {
    /// Emit both families exactly as defined.
    Full,
    /// Seeded uniform subsample of each family. When `probe` is set, every
    /// draw also contributes a sibling whose fill and balance payloads are
    /// the adversarial choice against the probe center (majority-opposing
    /// fills; complemented probe balance).
    Sampled { seed: u64, sel_samples: usize, adj_samples: usize, probe: Option<BitString> },
}

impl ReduceMode {
    fn label(&self) -> String {
        match self {
            ReduceMode::Full => "full".into(),
            ReduceMode::Sampled { seed, sel_samples, adj_samples, probe } => format!(
                "sampled(seed={seed}, sel={sel_samples}, adj={adj_samples}, probe={})",
                if probe.is_some() { "yes" } else { "no" }
            ),
        }
    }
}

/// Resource limits for a reduction.
#[derive(Clone, Copy, Debug)]
pub struct ReduceBudget {
    pub max_constraints: u64,
}

impl Default for ReduceBudget {
    fn default() -> Self {
        ReduceBudget { max_constraints: 50_000_000 }
    }
}

/// A materialized Closest String instance: packed constraint rows in
/// canonical order plus everything needed to decode provenance.
pub struct ClosestStringInstance {
    layout: BlockLayout,
    params: CodeParams,
    n: usize,
    d: usize,
    mode: ReduceMode,
    words_per_row: usize,
    rows: Vec<u64>,
    sel_count: usize,
    adj_count: usize,
    /// Adversarial sibling counts within the sampled totals.
    sel_adversarial: usize,
    adj_adversarial: usize,
    /// Ascending forbidden patterns (full mode only; drives tag decoding).
    forb: Vec<u64>,
    /// Ascending eligible ordered pairs (full mode only).
    pairs: Vec<(u32, u32)>,
    /// Explicit tags (sampled mode only).
    explicit_tags: Option<Vec<Tag>>,
}

/// Output of [`reduce`]: the instance together with the vertex coding used
/// to build it.
pub struct Reduction {
    pub coding: VertexCoding,
    pub instance: ClosestStringInstance,
}

impl ClosestStringInstance {
    pub fn layout(&self) -> &BlockLayout {
        &self.layout
    }

    pub fn params(&self) -> &CodeParams {
        &self.params
    }

    /// Number of vertex blocks.
    pub fn k(&self) -> usize {
        self.layout.num_blocks()
    }

    /// Vertex count of the source graph.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn total_len(&self) -> usize {
        self.layout.total_len()
    }

    /// Decision distance: a yes-instance admits a center within `d` of every
    /// constraint.
    pub fn d(&self) -> usize {
        self.d
    }

    /// No-instance floor for tuple centers: `d + delta_bits`.
    pub fn gap_target(&self) -> usize {
        self.d + self.params.delta_bits
    }

    pub fn mode(&self) -> &ReduceMode {
        &self.mode
    }

    pub fn num_rows(&self) -> usize {
        self.sel_count + self.adj_count
    }

    pub fn sel_count(&self) -> usize {
        self.sel_count
    }

    pub fn adj_count(&self) -> usize {
        self.adj_count
    }

    pub fn words_per_row(&self) -> usize {
        self.words_per_row
    }

    pub fn row_words(&self, row: usize) -> &[u64] {
        &self.rows[row * self.words_per_row..(row + 1) * self.words_per_row]
    }

    pub fn row_bits(&self, row: usize) -> BitString {
        BitString::from_words(self.total_len(), self.row_words(row).to_vec())
    }

    /// Size of the forbidden set (full mode).
    pub fn forbidden_size(&self) -> Option<usize> {
        if self.mode == ReduceMode::Full {
            Some(self.forb.len())
        } else {
            None
        }
    }

    /// Number of eligible ordered pairs (full mode).
    pub fn eligible_pair_count(&self) -> Option<usize> {
        if self.mode == ReduceMode::Full {
            Some(self.pairs.len())
        } else {
            None
        }
    }

    /// Provenance of a row: decoded positionally in full mode, looked up in
    /// sampled mode.
    pub fn tag(&self, row: usize) -> Tag {
        assert!(row < self.num_rows(), "row {row} out of range");
        if let Some(tags) = &self.explicit_tags {
            return tags[row];
        }
        let k = self.k();
        let z_count = 1usize << self.params.gamma_bits();
        let phi_count = 1usize << (k - 1);
        if row < self.sel_count {
            let per_block = self.forb.len() * phi_count * z_count;
            let block = row / per_block;
            let r = row % per_block;
            let per_y = phi_count * z_count;
            let y = self.forb[r / per_y];
            let r = r % per_y;
            Tag::Sel { block: block as u8, y, phi: (r / z_count) as u32, z: (r % z_count) as u64 }
        } else {
            let psi_count = 1usize << (k - 2);
            let r = row - self.sel_count;
            let per_pair_of_blocks = self.pairs.len() * psi_count;
            let (block_a, block_b) = unrank_block_pair(k, r / per_pair_of_blocks);
            let r = r % per_pair_of_blocks;
            let (first, second) = self.pairs[r / psi_count];
            Tag::Adj {
                block_a: block_a as u8,
                block_b: block_b as u8,
                first,
                second,
                psi: (r % psi_count) as u32,
            }
        }
    }

    /// Recomputes a row from its provenance tag through the single-constraint
    /// builders; spot checks compare this against the packed row bit for bit.
    pub fn rebuild_row(&self, tag: &Tag, coding: &VertexCoding) -> BitString {
        let params = &self.params;
        match *tag {
            Tag::Sel { block, y, phi, z } => compose_sel(
                &self.layout,
                block as usize,
                &BitString::from_index(params.block_len, y),
                phi,
                &BitString::from_index(params.gamma_bits(), z),
            ),
            Tag::Adj { block_a, block_b, first, second, psi } => compose_adj(
                &self.layout,
                block_a as usize,
                block_b as usize,
                &coding.encode(first as usize).complement(),
                &coding.encode(second as usize).complement(),
                psi,
            ),
        }
    }

    /// Writes the instance text format: header `N L d`, then one constraint
    /// per line.
    pub fn write_text(&self, out: &mut impl Write) -> io::Result<()> {
        writeln!(out, "{} {} {}", self.num_rows(), self.total_len(), self.d)?;
        for r in 0..self.num_rows() {
            writeln!(out, "{}", self.row_bits(r))?;
        }
        Ok(())
    }

    /// Sidecar manifest: stable key-value text describing how the instance
    /// was produced.
    pub fn render_manifest(&self) -> String {
        let stats = instance_stats(self);
        let mut out = String::new();
        out.push_str("schema: cslab-manifest/1\n");
        out.push_str("provenance_scheme: cslab-tags/1\n");
        out.push_str(&format!("mode: {}\n", self.mode.label()));
        if let ReduceMode::Sampled { seed, .. } = &self.mode {
            out.push_str(&format!("seed: {seed}\n"));
        }
        out.push_str(&format!("block_len: {}\n", self.params.block_len));
        out.push_str(&format!("alpha_bits: {}\n", self.params.alpha_bits));
        out.push_str(&format!("beta_bits: {}\n", self.params.beta_bits));
        out.push_str(&format!("delta_bits: {}\n", self.params.delta_bits));
        out.push_str(&format!("gamma_bits: {}\n", self.params.gamma_bits()));
        out.push_str(&format!("vertex_blocks: {}\n", self.k()));
        out.push_str(&format!("vertices: {}\n", self.n));
        out.push_str(&format!("total_len: {}\n", self.total_len()));
        out.push_str(&format!("decision_distance: {}\n", self.d));
        out.push_str(&format!("gap_target: {}\n", self.gap_target()));
        out.push_str(&format!("sel_constraints: {}\n", stats.sel_count));
        out.push_str(&format!("adj_constraints: {}\n", stats.adj_count));
        if let Some(f) = stats.forbidden_size {
            out.push_str(&format!("forbidden_size: {f}\n"));
        }
        if let Some(p) = stats.eligible_pairs {
            out.push_str(&format!("eligible_pairs: {p}\n"));
        }
        if stats.sel_adversarial + stats.adj_adversarial > 0 {
            out.push_str(&format!("sel_adversarial: {}\n", stats.sel_adversarial));
            out.push_str(&format!("adj_adversarial: {}\n", stats.adj_adversarial));
        }
        out
    }
}

fn unrank_block_pair(k: usize, mut rank: usize) -> (usize, usize) {
    for a in 0..k {
        let count = k - 1 - a;
        if rank < count {
            return (a, a + 1 + rank);
        }
        rank -= count;
    }
    panic!("block pair rank out of range");
}

/// Builds one selection constraint: `payload` on `block`, all-zeros or
/// all-ones on every other block as `fill` dictates (ascending block order),
/// and `balance` on the balancing block. The payload must be forbidden.
pub fn build_sel_constraint(
    layout: &BlockLayout,
    block: usize,
    payload: &BitString,
    fill: &[bool],
    balance: &BitString,
    code: &SelectionCode,
) -> Result<BitString, ReduceError> {
    assert!(block < layout.num_blocks(), "block index out of range");
    assert_eq!(payload.len(), layout.block_len(), "payload must fill one block");
    assert_eq!(fill.len(), layout.num_blocks() - 1, "one fill choice per remaining block");
    assert_eq!(balance.len(), layout.balance_len(), "balance payload must fill the balancing block");
    if !code.is_forbidden(payload) {
        return Err(ReduceError::NotForbidden);
    }
    let mut mask = 0u32;
    for (t, &bit) in fill.iter().enumerate() {
        if bit {
            mask |= 1 << t;
        }
    }
    Ok(compose_sel(layout, block, payload, mask, balance))
}

/// Builds one adjacency constraint for an ordered pair that is equal or
/// non-adjacent: complemented codewords on the two named blocks, constant
/// fill elsewhere, zeros on the balancing block.
pub fn build_adj_constraint(
    layout: &BlockLayout,
    block_a: usize,
    block_b: usize,
    pair: (usize, usize),
    fill: &[bool],
    coding: &VertexCoding,
    graph: &CliqueInstance,
) -> Result<BitString, ReduceError> {
    assert!(block_a < block_b && block_b < layout.num_blocks(), "blocks must be ordered and in range");
    assert_eq!(fill.len(), layout.num_blocks() - 2, "one fill choice per remaining block");
    let (u, v) = pair;
    if u != v && graph.adjacent(u, v) {
        return Err(ReduceError::PairNotEligible(u, v));
    }
    let mut mask = 0u32;
    for (t, &bit) in fill.iter().enumerate() {
        if bit {
            mask |= 1 << t;
        }
    }
    Ok(compose_adj(
        layout,
        block_a,
        block_b,
        &coding.encode(u).complement(),
        &coding.encode(v).complement(),
        mask,
    ))
}

fn fill_part(layout: &BlockLayout, on: bool) -> BitString {
    if on {
        BitString::ones(layout.block_len())
    } else {
        BitString::zeros(layout.block_len())
    }
}

fn compose_sel(layout: &BlockLayout, block: usize, payload: &BitString, phi: u32, balance: &BitString) -> BitString {
    let mut parts: Vec<BitString> = Vec::with_capacity(layout.num_blocks() + 1);
    let mut t = 0;
    for j in 0..layout.num_blocks() {
        if j == block {
            parts.push(payload.clone());
        } else {
            parts.push(fill_part(layout, phi >> t & 1 == 1));
            t += 1;
        }
    }
    parts.push(balance.clone());
    BitString::concat(parts.iter())
}

fn compose_adj(
    layout: &BlockLayout,
    block_a: usize,
    block_b: usize,
    comp_a: &BitString,
    comp_b: &BitString,
    psi: u32,
) -> BitString {
    let mut parts: Vec<BitString> = Vec::with_capacity(layout.num_blocks() + 1);
    let mut t = 0;
    for j in 0..layout.num_blocks() {
        if j == block_a {
            parts.push(comp_a.clone());
        } else if j == block_b {
            parts.push(comp_b.clone());
        } else {
            parts.push(fill_part(layout, psi >> t & 1 == 1));
            t += 1;
        }
    }
    parts.push(BitString::zeros(layout.balance_len()));
    BitString::concat(parts.iter())
}

/// Fill choice that opposes the majority of `center` on each block other
/// than the excluded ones: a majority-ones block gets the all-zeros fill and
/// vice versa.
fn adversarial_fill_mask(center: &BitString, layout: &BlockLayout, excluded: &[usize]) -> u32 {
    let mut mask = 0u32;
    let mut t = 0;
    for j in 0..layout.num_blocks() {
        if excluded.contains(&j) {
            continue;
        }
        let ones = layout.slice(center, Block::Vertex(j)).weight();
        if ones <= layout.block_len() / 2 {
            mask |= 1 << t;
        }
        t += 1;
    }
    mask
}

/// Runs the reduction. The selection code is constructed greedily (full
/// enumeration when the block length permits, seeded randomized otherwise),
/// the layout and decision distance follow from the profile, and the
/// constraint families are emitted per `mode`.
pub fn reduce(
    graph: &CliqueInstance,
    params: &CodeParams,
    mode: ReduceMode,
    budget: &ReduceBudget,
) -> Result<Reduction, ReduceError> {
    let report = params.validate();
    if !report.passed() {
        return Err(ReduceError::InvalidParams(report));
    }
    if params.block_len > MAX_TAG_BITS {
        return Err(ReduceError::BlockTooLong(params.block_len));
    }
    let k = graph.k();
    let n = graph.n();
    if k > MAX_BLOCKS {
        return Err(ReduceError::TooManyBlocks(k));
    }

    let code = if params.block_len <= FULL_ENUM_MAX_BITS {
        SelectionCode::greedy(n, params)?
    } else {
        let seed = match &mode {
            ReduceMode::Sampled { seed, .. } => *seed,
            ReduceMode::Full => 0,
        };
        SelectionCode::randomized(n, params, seed, crate::codegen::DEFAULT_RANDOM_RETRIES)?
    };
    let coding = VertexCoding::new(code, n)?;

    let layout = BlockLayout::new(k, params.block_len, params.gamma_bits());
    let d = (k + 1) * params.block_len / 2 + params.alpha_bits;
    let words_per_row = words_for(layout.total_len());

    let instance = match mode {
        ReduceMode::Full => {
            if params.block_len > FULL_ENUM_MAX_BITS {
                return Err(ReduceError::EnumTooLarge(params.block_len));
            }
            emit_full(graph, params, &coding, layout, d, words_per_row, budget)?
        }
        ReduceMode::Sampled { seed, sel_samples, adj_samples, ref probe } => {
            if let Some(p) = probe {
                if p.len() != layout.total_len() {
                    return Err(ReduceError::ProbeLength { got: p.len(), want: layout.total_len() });
                }
            }
            emit_sampled(
                graph,
                params,
                &coding,
                layout,
                d,
                words_per_row,
                budget,
                seed,
                sel_samples,
                adj_samples,
                probe.clone(),
            )?
        }
    };
    Ok(Reduction { coding, instance })
}

fn emit_full(
    graph: &CliqueInstance,
    params: &CodeParams,
    coding: &VertexCoding,
    layout: BlockLayout,
    d: usize,
    words_per_row: usize,
    budget: &ReduceBudget,
) -> Result<ClosestStringInstance, ReduceError> {
    let k = layout.num_blocks();
    let l = params.block_len;
    let gamma = params.gamma_bits();
    let forb: Vec<u64> = coding.code().forbidden_patterns().collect();
    let pairs = graph.eligible_pairs();

    let phi_count = 1u128 << (k - 1);
    let psi_count = 1u128 << (k - 2);
    let z_count = 1u128 << gamma;
    let sel_total = k as u128 * forb.len() as u128 * phi_count * z_count;
    let adj_total = (k * (k - 1) / 2) as u128 * pairs.len() as u128 * psi_count;
    let estimated = sel_total + adj_total;
    if estimated > budget.max_constraints as u128 {
        return Err(ReduceError::Budget { estimated, budget: budget.max_constraints });
    }
    let sel_count = sel_total as usize;
    let adj_count = adj_total as usize;

    let mut rows = vec![0u64; (sel_count + adj_count) * words_per_row];
    let ones_src = [!0u64; 1];

    // Selection family, canonical (block, payload, fill, balance) order.
    let z_stored: Vec<u64> = (0..1u64 << gamma)
        .map(|z| {
            let b = BitString::from_index(gamma, z);
            if gamma == 0 {
                0
            } else {
                b.words()[0]
            }
        })
        .collect();
    let mut row = 0usize;
    let mut scratch = vec![0u64; words_per_row];
    for block in 0..k {
        for &y in &forb {
            let y_stored = BitString::from_index(l, y);
            for phi in 0..1u32 << (k - 1) {
                scratch.iter_mut().for_each(|w| *w = 0);
                y_stored.write_into(&mut scratch, block * l);
                let mut t = 0;
                for j in 0..k {
                    if j == block {
                        continue;
                    }
                    if phi >> t & 1 == 1 {
                        copy_bit_span(&ones_src, 0, l, &mut scratch, j * l);
                    }
                    t += 1;
                }
                for &z in &z_stored {
                    let window = &mut rows[row * words_per_row..(row + 1) * words_per_row];
                    window.copy_from_slice(&scratch);
                    if gamma > 0 {
                        copy_bit_span(&[z], 0, gamma, window, k * l);
                    }
                    row += 1;
                }
            }
        }
    }

    // Adjacency family, canonical (block pair, vertex pair, fill) order.
    let comp_stored: Vec<BitString> =
        (0..graph.n()).map(|v| coding.encode(v).complement()).collect();
    for block_a in 0..k {
        for block_b in block_a + 1..k {
            for &(u, v) in &pairs {
                scratch.iter_mut().for_each(|w| *w = 0);
                comp_stored[u as usize].write_into(&mut scratch, block_a * l);
                comp_stored[v as usize].write_into(&mut scratch, block_b * l);
                for psi in 0..1u32 << (k - 2) {
                    let window = &mut rows[row * words_per_row..(row + 1) * words_per_row];
                    window.copy_from_slice(&scratch);
                    let mut t = 0;
                    for j in 0..k {
                        if j == block_a || j == block_b {
                            continue;
                        }
                        if psi >> t & 1 == 1 {
                            copy_bit_span(&ones_src, 0, l, window, j * l);
                        }
                        t += 1;
                    }
                    row += 1;
                }
            }
        }
    }
    debug_assert_eq!(row, sel_count + adj_count);

    Ok(ClosestStringInstance {
        layout,
        params: *params,
        n: graph.n(),
        d,
        mode: ReduceMode::Full,
        words_per_row,
        rows,
        sel_count,
        adj_count,
        sel_adversarial: 0,
        adj_adversarial: 0,
        forb,
        pairs,
        explicit_tags: None,
    })
}

#[allow(clippy::too_many_arguments)]
fn emit_sampled(
    graph: &CliqueInstance,
    params: &CodeParams,
    coding: &VertexCoding,
    layout: BlockLayout,
    d: usize,
    words_per_row: usize,
    budget: &ReduceBudget,
    seed: u64,
    sel_samples: usize,
    adj_samples: usize,
    probe: Option<BitString>,
) -> Result<ClosestStringInstance, ReduceError> {
    let k = layout.num_blocks();
    let l = params.block_len;
    let gamma = params.gamma_bits();
    let n = graph.n();
    let per_draw = if probe.is_some() { 2u128 } else { 1 };
    let estimated = (sel_samples as u128 + adj_samples as u128) * per_draw;
    if estimated > budget.max_constraints as u128 {
        return Err(ReduceError::Budget { estimated, budget: budget.max_constraints });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let threshold = params.forbidden_threshold() as u32;
    let member_patterns = coding.code().member_patterns();
    let pattern_mask: u64 = if l == 64 { !0 } else { (1u64 << l) - 1 };

    let mut rows: Vec<u64> = Vec::with_capacity(estimated as usize * words_per_row);
    let mut tags: Vec<Tag> = Vec::with_capacity(estimated as usize);
    let mut sel_adversarial = 0usize;
    let mut adj_adversarial = 0usize;

    let probe_balance_comp: Option<u64> = probe.as_ref().map(|p| {
        let balance = layout.slice(p, Block::Balance).complement();
        balance.to_index()
    });

    let push = |tag: Tag, bits: &BitString, rows: &mut Vec<u64>, tags: &mut Vec<Tag>| {
        let start = rows.len();
        rows.resize(start + words_per_row, 0);
        bits.write_into(&mut rows[start..], 0);
        tags.push(tag);
    };

    for _ in 0..sel_samples {
        let block = rng.gen_range(0..k);
        let mut y = None;
        for _ in 0..SAMPLING_TRIES {
            let cand = rng.gen::<u64>() & pattern_mask;
            if member_patterns.iter().all(|&m| (m ^ cand).count_ones() <= threshold) {
                y = Some(cand);
                break;
            }
        }
        let y = y.ok_or(ReduceError::SamplingStuck(SAMPLING_TRIES))?;
        let phi = rng.gen::<u32>() & mask_of_width(k - 1);
        let z = if gamma == 0 { 0 } else { rng.gen::<u64>() & ((1u64 << gamma) - 1) };
        let y_bits = BitString::from_index(l, y);
        let z_bits = BitString::from_index(gamma, z);
        push(
            Tag::Sel { block: block as u8, y, phi, z },
            &compose_sel(&layout, block, &y_bits, phi, &z_bits),
            &mut rows,
            &mut tags,
        );
        if let (Some(p), Some(zc)) = (&probe, probe_balance_comp) {
            let phi_adv = adversarial_fill_mask(p, &layout, &[block]);
            push(
                Tag::Sel { block: block as u8, y, phi: phi_adv, z: zc },
                &compose_sel(&layout, block, &y_bits, phi_adv, &BitString::from_index(gamma, zc)),
                &mut rows,
                &mut tags,
            );
            sel_adversarial += 1;
        }
    }

    for _ in 0..adj_samples {
        let rank = rng.gen_range(0..k * (k - 1) / 2);
        let (block_a, block_b) = unrank_block_pair(k, rank);
        let mut pair = None;
        for _ in 0..SAMPLING_TRIES {
            let u = rng.gen_range(0..n);
            let v = rng.gen_range(0..n);
            if u == v || !graph.adjacent(u, v) {
                pair = Some((u, v));
                break;
            }
        }
        let (u, v) = pair.ok_or(ReduceError::SamplingStuck(SAMPLING_TRIES))?;
        let psi = rng.gen::<u32>() & mask_of_width(k - 2);
        let comp_u = coding.encode(u).complement();
        let comp_v = coding.encode(v).complement();
        push(
            Tag::Adj { block_a: block_a as u8, block_b: block_b as u8, first: u as u32, second: v as u32, psi },
            &compose_adj(&layout, block_a, block_b, &comp_u, &comp_v, psi),
            &mut rows,
            &mut tags,
        );
        if let Some(p) = &probe {
            let psi_adv = adversarial_fill_mask(p, &layout, &[block_a, block_b]);
            push(
                Tag::Adj {
                    block_a: block_a as u8,
                    block_b: block_b as u8,
                    first: u as u32,
                    second: v as u32,
                    psi: psi_adv,
                },
                &compose_adj(&layout, block_a, block_b, &comp_u, &comp_v, psi_adv),
                &mut rows,
                &mut tags,
            );
            adj_adversarial += 1;
        }
    }

    let sel_count = sel_samples + sel_adversarial;
    let adj_count = adj_samples + adj_adversarial;
    Ok(ClosestStringInstance {
        layout,
        params: *params,
        n,
        d,
        mode: ReduceMode::Sampled { seed, sel_samples, adj_samples, probe },
        words_per_row,
        rows,
        sel_count,
        adj_count,
        sel_adversarial,
        adj_adversarial,
        forb: Vec::new(),
        pairs: Vec::new(),
        explicit_tags: Some(tags),
    })
}

fn mask_of_width(width: usize) -> u32 {
    if width == 0 {
        0
    } else if width >= 32 {
        !0
    } else {
        (1u32 << width) - 1
    }
}

/// Summary counts and sizes for an instance.
#[derive(Clone, Debug, Serialize)]
pub struct InstanceStats {
    pub mode: String,
    pub n: usize,
    pub k: usize,
    pub block_len: usize,
    pub total_len: usize,
    pub d: usize,
    pub gap_target: usize,
    pub sel_count: usize,
    pub adj_count: usize,
    pub sel_adversarial: usize,
    pub adj_adversarial: usize,
    pub forbidden_size: Option<usize>,
    pub eligible_pairs: Option<usize>,
    pub memory_bytes: usize,
}

pub fn instance_stats(inst: &ClosestStringInstance) -> InstanceStats {
    InstanceStats {
        mode: inst.mode.label(),
        n: inst.n,
        k: inst.k(),
        block_len: inst.params.block_len,
        total_len: inst.total_len(),
        d: inst.d,
        gap_target: inst.gap_target(),
        sel_count: inst.sel_count,
        adj_count: inst.adj_count,
        sel_adversarial: inst.sel_adversarial,
        adj_adversarial: inst.adj_adversarial,
        forbidden_size: inst.forbidden_size(),
        eligible_pairs: inst.eligible_pair_count(),
        memory_bytes: inst.rows.len() * 8
            + inst.explicit_tags.as_ref().map_or(0, |t| t.len() * std::mem::size_of::<Tag>())
            + inst.forb.len() * 8
            + inst.pairs.len() * 8,
    }
}

impl fmt::Display for InstanceStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "instance: mode={} n={} k={}", self.mode, self.n, self.k)?;
        writeln!(
            f,
            "  L={} d={} gap_target={} block_len={}",
            self.total_len, self.d, self.gap_target, self.block_len
        )?;
        writeln!(
            f,
            "  sel_constraints={} adj_constraints={} total={}",
            self.sel_count,
            self.adj_count,
            self.sel_count + self.adj_count
        )?;
        if let (Some(forb), Some(pairs)) = (self.forbidden_size, self.eligible_pairs) {
            writeln!(f, "  forbidden_size={forb} eligible_pairs={pairs}")?;
        }
        if self.sel_adversarial + self.adj_adversarial > 0 {
            writeln!(
                f,
                "  adversarial: sel={} adj={}",
                self.sel_adversarial, self.adj_adversarial
            )?;
        }
        write!(f, "  memory_bytes={}", self.memory_bytes)
    }
}

/// Achieved yes/no gap as an exact rational `(d + delta_bits) / d`, checked
/// against the floor `1 + 1/(c*k)` for `c = ceil(2 / delta)`.
pub fn gap_ratio(inst: &ClosestStringInstance) -> Ratio<u64> {
    let ratio = Ratio::new(inst.gap_target() as u64, inst.d() as u64);
    let c = approximation_constant(inst.params());
    let floor = Ratio::new(1, c * inst.k() as u64) + 1;
    assert!(ratio >= floor, "gap ratio {ratio} fell below its floor {floor}");
    ratio
}

/// The constant `c = ceil(2 / delta) = ceil(2 * block_len / delta_bits)`:
/// any no-instance forces every center beyond `(1 + 1/(c*k)) * d`.
pub fn approximation_constant(params: &CodeParams) -> u64 {
    (2 * params.block_len).div_ceil(params.delta_bits) as u64
}

/// Equal-length string family with a declared decision distance: the
/// instance text format, as read back for solving.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InstanceFile {
    pub total_len: usize,
    pub d: usize,
    pub strings: Vec<BitString>,
}

#[derive(Debug, Error)]
pub enum InstanceFileError {
    #[error("instance file is malformed: {0}")]
    Bad(String),
}

impl InstanceFile {
    pub fn parse(text: &str) -> Result<Self, InstanceFileError> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| InstanceFileError::Bad("empty file".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(InstanceFileError::Bad(format!("header must be 'N L d'; got {header:?}")));
        }
        let parse = |s: &str| -> Result<usize, InstanceFileError> {
            s.parse().map_err(|_| InstanceFileError::Bad(format!("bad integer {s:?} in header")))
        };
        let n = parse(fields[0])?;
        let total_len = parse(fields[1])?;
        let d = parse(fields[2])?;
        let mut strings = Vec::with_capacity(n);
        for line in lines {
            let s: BitString = line
                .parse()
                .map_err(|e| InstanceFileError::Bad(format!("bad constraint line: {e}")))?;
            if s.len() != total_len {
                return Err(InstanceFileError::Bad(format!(
                    "constraint has length {}; header says {total_len}",
                    s.len()
                )));
            }
            strings.push(s);
        }
        if strings.len() != n {
            return Err(InstanceFileError::Bad(format!(
                "header promises {n} constraints; file has {}",
                strings.len()
            )));
        }
        Ok(InstanceFile { total_len, d, strings })
    }

    pub fn render(&self) -> String {
        let mut out = format!("{} {} {}\n", self.strings.len(), self.total_len, self.d);
        for s in &self.strings {
            out.push_str(&s.to_string());
            out.push('\n');
        }
        out
    }
}
