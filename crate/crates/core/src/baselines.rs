//! Comparison baselines: q-gram sets, Bloom filters, tabulation min-hash
//! sketches, and plain edit-distance similarity.
//!
//! These are the standard token-set comparators that suffix-tree matching
//! is evaluated against. Their shared weakness motivates the tree
//! encoding: q-grams ignore token order and position, Bloom filters add
//! collision noise on top, and one-bit min-hash sketches estimate rather
//! than measure. The evaluation harness quantifies each distortion.

use std::collections::BTreeSet;
use std::fmt;

use sha2::{Digest as _, Sha256};

// ---- errors ----

/// Errors raised by baseline parameter validation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BaselineError {
    /// q must be at least 1.
    ZeroGramLen,
    /// Bit arrays must be non-empty.
    ZeroBits,
    /// At least one hash function is required.
    ZeroHashes,
}

impl fmt::Display for BaselineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BaselineError::ZeroGramLen => write!(f, "gram length must be at least 1"),
            BaselineError::ZeroBits => write!(f, "bit array length must be at least 1"),
            BaselineError::ZeroHashes => write!(f, "hash count must be at least 1"),
        }
    }
}

impl std::error::Error for BaselineError {}

// ---- q-grams ----

/// The set of contiguous q-character substrings of `s` (set semantics:
/// duplicates collapse). Strings shorter than `q` yield the empty set.
pub fn qgram_set(s: &str, q: usize) -> BTreeSet<String> {
    assert!(q >= 1, "gram length must be at least 1");
    let chars: Vec<char> = s.chars().collect();
    let mut out = BTreeSet::new();
    if chars.len() < q {
        return out;
    }
    for i in 0..=chars.len() - q {
        out.insert(chars[i..i + q].iter().collect());
    }
    out
}

/// Dice coefficient of two sets: `2|A ∩ B| / (|A| + |B|)`. Two empty
/// sets count as identical (1.0); one empty set shares nothing (0.0).
pub fn dice_sets(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let shared = a.intersection(b).count();
    2.0 * shared as f64 / (a.len() + b.len()) as f64
}

/// Jaccard coefficient of two sets: `|A ∩ B| / |A ∪ B|`, with the same
/// empty-set conventions as [`dice_sets`].
pub fn jaccard_sets(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let shared = a.intersection(b).count();
    shared as f64 / (a.len() + b.len() - shared) as f64
}

// ---- bit arrays ----

/// A plain bit array in 64-bit blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitArray {
    blocks: Vec<u64>,
    len: usize,
}

impl BitArray {
    fn zeros(len: usize) -> Self {
        BitArray { blocks: vec![0; len.div_ceil(64)], len }
    }

    fn set(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.blocks[i / 64] |= 1 << (i % 64);
    }

    /// Value of bit `i`.
    pub fn get(&self, i: usize) -> bool {
        self.blocks[i / 64] >> (i % 64) & 1 == 1
    }

    /// Number of bits in the array.
    pub fn len(&self) -> usize {
        self.len
    }

    /// True when the array has zero length (never for built filters).
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Number of set bits.
    pub fn count_ones(&self) -> usize {
        self.blocks.iter().map(|b| b.count_ones() as usize).sum()
    }

    /// Number of positions set in both arrays.
    pub fn count_shared(&self, other: &BitArray) -> usize {
        debug_assert_eq!(self.len, other.len);
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(x, y)| (x & y).count_ones() as usize)
            .sum()
    }

    /// Number of positions with equal values (set or unset).
    pub fn count_agreeing(&self, other: &BitArray) -> usize {
        debug_assert_eq!(self.len, other.len);
        let mut agree = 0;
        for (idx, (x, y)) in self.blocks.iter().zip(&other.blocks).enumerate() {
            let mut eq = !(x ^ y);
            // Mask the tail beyond `len` in the last block.
            let used = (self.len - idx * 64).min(64);
            if used < 64 {
                eq &= (1u64 << used) - 1;
            }
            agree += eq.count_ones() as usize;
        }
        agree
    }
}

// ---- Bloom filters ----

/// Bloom filter parameters: array size, hashes per gram, and the keyed
/// secret both parties must share.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BloomParams {
    /// Bit array length; 1000 is the conventional choice.
    pub bits: usize,
    /// Hash functions per gram; see [`optimal_num_hashes`].
    pub num_hashes: usize,
    /// Keying secret mixed into both base hashes.
    pub secret: String,
}

impl BloomParams {
    /// 1000-bit filter with the given hash count.
    pub fn new(num_hashes: usize, secret: impl Into<String>) -> Self {
        BloomParams { bits: 1000, num_hashes, secret: secret.into() }
    }

    /// Checks the structural constraints.
    pub fn validate(&self) -> Result<(), BaselineError> {
        if self.bits == 0 {
            return Err(BaselineError::ZeroBits);
        }
        if self.num_hashes == 0 {
            return Err(BaselineError::ZeroHashes);
        }
        Ok(())
    }
}

/// Attribute families with conventional hash counts tuned for 1000-bit
/// filters over bigram sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttributeKind {
    CreditCard,
    Iban,
    Surname,
    City,
    StreetAddress,
    Telephone,
}

/// The tuned hashes-per-gram count for each attribute family.
pub fn optimal_num_hashes(kind: AttributeKind) -> usize {
    match kind {
        AttributeKind::CreditCard => 46,
        AttributeKind::Iban => 30,
        AttributeKind::Surname => 116,
        AttributeKind::City => 87,
        AttributeKind::StreetAddress => 36,
        AttributeKind::Telephone => 77,
    }
}

fn keyed_u64(domain: u8, secret: &str, gram: &str) -> u64 {
    let mut h = Sha256::new();
    h.update([domain]);
    h.update(secret.as_bytes());
    h.update(gram.as_bytes());
    let digest = h.finalize();
    u64::from_be_bytes(digest[..8].try_into().expect("eight bytes"))
}

/// Encodes a gram set into a Bloom filter using double hashing: gram `x`
/// sets positions `(H1(x) + i * H2(x)) mod bits` for `i` in
/// `0..num_hashes`, with `H1`, `H2` keyed by the secret.
pub fn bloom_encode(grams: &BTreeSet<String>, params: &BloomParams) -> BitArray {
    params.validate().expect("validated Bloom parameters");
    let mut bits = BitArray::zeros(params.bits);
    let m = params.bits as u64;
    for gram in grams {
        let h1 = keyed_u64(0x01, &params.secret, gram) % m;
        let h2 = keyed_u64(0x02, &params.secret, gram) % m;
        for i in 0..params.num_hashes as u64 {
            bits.set(((h1 + (i % m) * h2) % m) as usize);
        }
    }
    bits
}

/// Dice coefficient on filters: `2 * shared_bits / (bits_a + bits_b)`,
/// with the empty-filter conventions of [`dice_sets`].
pub fn dice_filters(a: &BitArray, b: &BitArray) -> f64 {
    let ones_a = a.count_ones();
    let ones_b = b.count_ones();
    if ones_a == 0 && ones_b == 0 {
        return 1.0;
    }
    if ones_a == 0 || ones_b == 0 {
        return 0.0;
    }
    2.0 * a.count_shared(b) as f64 / (ones_a + ones_b) as f64
}

// ---- tabulation min-hash sketches ----

/// Tabulation sketch parameters: eight 64-bit keys and the sketch width.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TabHashParams {
    /// The eight tabulation keys.
    pub keys: [u64; 8],
    /// Sketch width in bits; 1000 is the conventional choice.
    pub sketch_bits: usize,
}

impl TabHashParams {
    /// Expands one seed into the eight keys, 1000-bit sketches.
    pub fn from_seed(seed: u64) -> Self {
        let mut state = seed;
        let mut keys = [0u64; 8];
        for k in &mut keys {
            *k = splitmix64(&mut state);
        }
        TabHashParams { keys, sketch_bits: 1000 }
    }

    /// Checks the structural constraints.
    pub fn validate(&self) -> Result<(), BaselineError> {
        if self.sketch_bits == 0 {
            return Err(BaselineError::ZeroBits);
        }
        Ok(())
    }
}

/// A one-bit-per-position min-hash sketch of a gram set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TabHashSketch {
    /// Bit `i` is the least significant bit of the minimum position-`i`
    /// hash over all grams.
    pub bits: BitArray,
    /// True when the gram set was empty; the all-zero bits then carry no
    /// min-hash information.
    pub degenerate: bool,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E3779B97F4A7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Precomputed tabulation state: byte tables expanded from the keys and
/// one starting value per sketch position. Build once per corpus.
pub struct TabSketcher {
    tables: Vec<[u64; 256]>,
    position_salt: Vec<u64>,
    sketch_bits: usize,
}

impl TabSketcher {
    /// Expands the parameters into lookup tables.
    pub fn new(params: &TabHashParams) -> Self {
        params.validate().expect("validated sketch parameters");
        let tables = params
            .keys
            .iter()
            .map(|&key| {
                let mut state = key;
                let mut table = [0u64; 256];
                for slot in table.iter_mut() {
                    *slot = splitmix64(&mut state);
                }
                table
            })
            .collect();
        let mut state = params.keys.iter().fold(0u64, |acc, &k| acc ^ k).wrapping_add(1);
        let position_salt = (0..params.sketch_bits).map(|_| splitmix64(&mut state)).collect();
        TabSketcher { tables, position_salt, sketch_bits: params.sketch_bits }
    }

    /// Position-`pos` hash of one gram: absorb bytes through the key
    /// tables, then avalanche so the low bit is well mixed.
    fn gram_hash(&self, pos: usize, gram: &str) -> u64 {
        let mut h = self.position_salt[pos];
        for (i, b) in gram.bytes().enumerate() {
            h ^= self.tables[i & 7][b as usize];
            h = h.rotate_left(7);
        }
        h ^= h >> 33;
        h = h.wrapping_mul(0xFF51AFD7ED558CCD);
        h ^ (h >> 33)
    }

    /// Sketches a gram set: per position, the low bit of the minimum
    /// gram hash. Identical sets get identical sketches; the probability
    /// that two sets agree at a position is `(1 + J) / 2` for Jaccard
    /// similarity `J`, which [`jaccard_sketches`] inverts.
    pub fn encode(&self, grams: &BTreeSet<String>) -> TabHashSketch {
        let mut bits = BitArray::zeros(self.sketch_bits);
        if grams.is_empty() {
            return TabHashSketch { bits, degenerate: true };
        }
        for pos in 0..self.sketch_bits {
            let min = grams
                .iter()
                .map(|g| self.gram_hash(pos, g))
                .min()
                .expect("non-empty gram set");
            if min & 1 == 1 {
                bits.set(pos);
            }
        }
        TabHashSketch { bits, degenerate: false }
    }
}

/// Convenience one-shot sketch; prefer [`TabSketcher`] in loops.
pub fn tabhash_encode(grams: &BTreeSet<String>, params: &TabHashParams) -> TabHashSketch {
    TabSketcher::new(params).encode(grams)
}

/// Jaccard estimate from two sketches: with agreement fraction `a`,
/// `J ≈ 2(a - 1/2)`, clipped at zero. Degenerate sketches follow the
/// empty-set conventions.
pub fn jaccard_sketches(a: &TabHashSketch, b: &TabHashSketch) -> f64 {
    if a.degenerate && b.degenerate {
        return 1.0;
    }
    if a.degenerate || b.degenerate {
        return 0.0;
    }
    let agree = a.bits.count_agreeing(&b.bits) as f64 / a.bits.len() as f64;
    (2.0 * (agree - 0.5)).max(0.0)
}

// ---- edit distance ----

/// Levenshtein distance in characters, two-row dynamic programming.
pub fn levenshtein(s1: &str, s2: &str) -> usize {
    let a: Vec<char> = s1.chars().collect();
    let b: Vec<char> = s2.chars().collect();
    if a.is_empty() {
        return b.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    for (i, &ca) in a.iter().enumerate() {
        let mut cur = vec![i + 1; b.len() + 1];
        for (j, &cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        prev = cur;
    }
    prev[b.len()]
}

/// Edit similarity `1 - lev / max(len_1, len_2)`; two empty strings are
/// identical (1.0).
pub fn edit_sim(s1: &str, s2: &str) -> f64 {
    let max_len = s1.chars().count().max(s2.chars().count());
    if max_len == 0 {
        return 1.0;
    }
    1.0 - levenshtein(s1, s2) as f64 / max_len as f64
}
