//! Fixed-length binary strings packed into 64-bit words, plus the block
//! position layout used by the reduction.
//!
//! Position 0 is the leftmost character of the text rendering (the canonical
//! form used by every file format). Values are immutable after construction;
//! anything that changes bits returns a new string.

use smallvec::SmallVec;
use std::cmp::Ordering;
use std::fmt;
use std::ops::Range;
use std::str::FromStr;
use thiserror::Error;

/// Inline storage for one word covers every desk-scale length without a heap
/// allocation; longer strings spill automatically.
type Words = SmallVec<[u64; 1]>;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitString {
    len: usize,
    words: Words,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseBitsError {
    #[error("invalid character {found:?} at position {pos}; expected '0' or '1'")]
    BadChar { pos: usize, found: char },
}

#[inline]
pub(crate) fn words_for(len: usize) -> usize {
    len.div_ceil(64)
}

/// Mask selecting the significant bits of the last word of a `len`-bit string.
#[inline]
fn tail_mask(len: usize) -> u64 {
    match len % 64 {
        0 => !0,
        r => (1u64 << r) - 1,
    }
}

/// Number of set bits across a word slice.
#[inline]
pub(crate) fn weight_words(words: &[u64]) -> usize {
    words.iter().map(|w| w.count_ones() as usize).sum()
}

/// Hamming distance between two equal-length word slices.
///
/// Both slices must obey the trailing-bits-are-zero invariant.
#[inline]
pub(crate) fn distance_words(a: &[u64], b: &[u64]) -> usize {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x ^ y).count_ones() as usize)
        .sum()
}

#[inline]
pub(crate) fn get_bit(words: &[u64], pos: usize) -> bool {
    words[pos >> 6] >> (pos & 63) & 1 == 1
}

#[inline]
pub(crate) fn set_bit(words: &mut [u64], pos: usize, value: bool) {
    let mask = 1u64 << (pos & 63);
    if value {
        words[pos >> 6] |= mask;
    } else {
        words[pos >> 6] &= !mask;
    }
}

/// ORs `len` bits starting at `src[src_start]` into `dst` at `dst_start`.
///
/// The destination span must currently be zero; callers compose rows by
/// writing disjoint spans into a zeroed buffer.
pub(crate) fn copy_bit_span(
    src: &[u64],
    src_start: usize,
    len: usize,
    dst: &mut [u64],
    dst_start: usize,
) {
    let mut copied = 0;
    while copied < len {
        let s = src_start + copied;
        let d = dst_start + copied;
        let chunk = (len - copied).min(64 - (s & 63)).min(64 - (d & 63));
        let mask = if chunk == 64 { !0 } else { (1u64 << chunk) - 1 };
        let bits = (src[s >> 6] >> (s & 63)) & mask;
        debug_assert_eq!(dst[d >> 6] >> (d & 63) & mask, 0, "destination span not zero");
        dst[d >> 6] |= bits << (d & 63);
        copied += chunk;
    }
}

impl BitString {
    /// All-zeros string. Length 0 is allowed (an empty balancing block
    /// slices to an empty string).
    pub fn zeros(len: usize) -> Self {
        BitString {
            len,
            words: smallvec::smallvec![0; words_for(len)],
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut words: Words = smallvec::smallvec![!0u64; words_for(len)];
        if let Some(last) = words.last_mut() {
            *last &= tail_mask(len);
        }
        BitString { len, words }
    }

    pub fn from_fn(len: usize, mut f: impl FnMut(usize) -> bool) -> Self {
        let mut s = Self::zeros(len);
        for p in 0..len {
            if f(p) {
                set_bit(&mut s.words, p, true);
            }
        }
        s
    }

    /// Builds a string from already-packed words (trailing bits beyond `len`
    /// are cleared).
    pub(crate) fn from_words(len: usize, mut words: Vec<u64>) -> Self {
        words.truncate(words_for(len));
        debug_assert_eq!(words.len(), words_for(len));
        let mut words: Words = words.into_iter().collect();
        if let Some(last) = words.last_mut() {
            *last &= tail_mask(len);
        }
        BitString { len, words }
    }

    /// The string whose text rendering is the `len`-character big-endian
    /// binary expansion of `index`. Ascending indices enumerate strings in
    /// ascending lexicographic (text) order, which is the canonical
    /// enumeration order everywhere in this crate.
    pub fn from_index(len: usize, index: u64) -> Self {
        assert!(len <= 64, "index form only covers lengths up to 64");
        if len < 64 {
            assert!(index < 1u64 << len, "index {index} out of range for length {len}");
        }
        if len == 0 {
            return Self::zeros(0);
        }
        BitString {
            len,
            words: smallvec::smallvec![index.reverse_bits() >> (64 - len)],
        }
    }

    /// Inverse of [`BitString::from_index`].
    pub fn to_index(&self) -> u64 {
        assert!(self.len <= 64, "index form only covers lengths up to 64");
        if self.len == 0 {
            return 0;
        }
        (self.words[0] << (64 - self.len)).reverse_bits()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, pos: usize) -> bool {
        assert!(pos < self.len, "position {pos} out of range for length {}", self.len);
        get_bit(&self.words, pos)
    }

    /// Copy with one position overridden.
    pub fn with_bit(&self, pos: usize, value: bool) -> Self {
        assert!(pos < self.len);
        let mut s = self.clone();
        set_bit(&mut s.words, pos, value);
        s
    }

    pub(crate) fn words(&self) -> &[u64] {
        &self.words
    }

    /// Number of ones.
    pub fn weight(&self) -> usize {
        weight_words(&self.words)
    }

    /// Number of positions on which `self` and `other` differ.
    ///
    /// Panics if the lengths differ; distance is only defined on
    /// equal-length strings.
    pub fn distance(&self, other: &BitString) -> usize {
        assert_eq!(
            self.len, other.len,
            "distance requires equal lengths ({} vs {})",
            self.len, other.len
        );
        distance_words(&self.words, &other.words)
    }

    /// Flips every position.
    pub fn complement(&self) -> Self {
        let mut words: Words = self.words.iter().map(|w| !w).collect();
        if let Some(last) = words.last_mut() {
            *last &= tail_mask(self.len);
        }
        BitString { len: self.len, words }
    }

    /// Substring at `range` (0-indexed, half-open).
    pub fn slice(&self, range: Range<usize>) -> Self {
        assert!(range.start <= range.end && range.end <= self.len, "slice {range:?} out of range");
        let len = range.end - range.start;
        let mut out = Self::zeros(len);
        if len > 0 {
            copy_bit_span(&self.words, range.start, len, &mut out.words, 0);
        }
        out
    }

    /// Concatenation in order; the inverse of slicing under a matching
    /// layout.
    pub fn concat<'a>(parts: impl IntoIterator<Item = &'a BitString>) -> Self {
        let parts: Vec<&BitString> = parts.into_iter().collect();
        let len = parts.iter().map(|p| p.len).sum();
        let mut out = Self::zeros(len);
        let mut at = 0;
        for p in parts {
            if p.len > 0 {
                copy_bit_span(&p.words, 0, p.len, &mut out.words, at);
            }
            at += p.len;
        }
        out
    }

    /// ORs this string into `dst` starting at bit `offset`; the target span
    /// must be zero.
    pub(crate) fn write_into(&self, dst: &mut [u64], offset: usize) {
        if self.len > 0 {
            copy_bit_span(&self.words, 0, self.len, dst, offset);
        }
    }

    /// Positions (ascending) on which `self` and `other` differ.
    pub fn mismatch_positions<'a>(&'a self, other: &'a BitString) -> impl Iterator<Item = usize> + 'a {
        assert_eq!(self.len, other.len);
        self.words
            .iter()
            .zip(other.words.iter())
            .enumerate()
            .flat_map(|(wi, (a, b))| {
                let mut diff = a ^ b;
                std::iter::from_fn(move || {
                    if diff == 0 {
                        None
                    } else {
                        let bit = diff.trailing_zeros() as usize;
                        diff &= diff - 1;
                        Some(wi * 64 + bit)
                    }
                })
            })
    }
}

impl PartialOrd for BitString {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Lexicographic order of the text rendering ('0' < '1'); shorter strings
/// order before their extensions.
impl Ord for BitString {
    fn cmp(&self, other: &Self) -> Ordering {
        let shared = self.words.len().min(other.words.len());
        for i in 0..shared {
            let diff = self.words[i] ^ other.words[i];
            if diff != 0 {
                let pos = diff.trailing_zeros() as usize;
                // Positions past the shorter length cannot differ: trailing
                // bits are zero in the shorter string and equal by `diff`.
                let a = self.words[i] >> pos & 1;
                return if a == 0 { Ordering::Less } else { Ordering::Greater };
            }
        }
        self.len.cmp(&other.len)
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::with_capacity(self.len);
        for p in 0..self.len {
            s.push(if get_bit(&self.words, p) { '1' } else { '0' });
        }
        f.write_str(&s)
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({self})")
    }
}

impl FromStr for BitString {
    type Err = ParseBitsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut out = Self::zeros(s.chars().count());
        for (pos, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => set_bit(&mut out.words, pos, true),
                found => return Err(ParseBitsError::BadChar { pos, found }),
            }
        }
        Ok(out)
    }
}

/// Which part of a laid-out string a slice refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Block {
    /// One of the per-vertex blocks, 0-indexed.
    Vertex(usize),
    /// The trailing balancing block.
    Balance,
}

/// Partition of positions into `num_blocks` vertex blocks of `block_len` bits
/// followed by a balancing block of `balance_len` bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BlockLayout {
    num_blocks: usize,
    block_len: usize,
    balance_len: usize,
}

impl BlockLayout {
    pub fn new(num_blocks: usize, block_len: usize, balance_len: usize) -> Self {
        assert!(num_blocks > 0, "layout needs at least one vertex block");
        assert!(block_len > 0, "vertex blocks must be non-empty");
        BlockLayout { num_blocks, block_len, balance_len }
    }

    pub fn num_blocks(&self) -> usize {
        self.num_blocks
    }

    pub fn block_len(&self) -> usize {
        self.block_len
    }

    pub fn balance_len(&self) -> usize {
        self.balance_len
    }

    pub fn total_len(&self) -> usize {
        self.num_blocks * self.block_len + self.balance_len
    }

    /// Position range of a block (0-indexed, half-open).
    pub fn range(&self, block: Block) -> Range<usize> {
        match block {
            Block::Vertex(i) => {
                assert!(i < self.num_blocks, "block index {i} out of range (k = {})", self.num_blocks);
                i * self.block_len..(i + 1) * self.block_len
            }
            Block::Balance => self.num_blocks * self.block_len..self.total_len(),
        }
    }

    /// Substring of `w` at the block's positions.
    pub fn slice(&self, w: &BitString, block: Block) -> BitString {
        assert_eq!(w.len(), self.total_len(), "string length does not match layout");
        w.slice(self.range(block))
    }

    /// All blocks in position order, the vertex blocks then the balance
    /// block.
    pub fn blocks(&self) -> impl Iterator<Item = Block> + '_ {
        (0..self.num_blocks).map(Block::Vertex).chain(std::iter::once(Block::Balance))
    }
}
