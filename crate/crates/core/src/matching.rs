//! Longest-common-substring matching on suffix collections.
//!
//! Every operation here runs on sorted suffix views — sequences of opaque,
//! comparable tokens plus a start offset — so the same code serves both
//! encoded trees (tokens are digest slots) and plaintext trees (tokens are
//! characters). On encodings, token equality at position `p` certifies
//! equality of the underlying prefix up to `p`, so the longest common
//! token prefix over all cross-tree suffix pairs *is* the longest common
//! substring.
//!
//! Two interchangeable engines compute it:
//!
//! - [`Engine::Recursive`] walks the two suffix collections as tries,
//!   descending only where both sides continue with the same token — a
//!   depth-first intersection of the trees.
//! - [`Engine::SortedMerge`] merges the two sorted suffix lists and takes
//!   the best token-wise common prefix between each entry and the most
//!   recent entry from the other list, the classic merged-suffix-array
//!   formulation.
//!
//! Both return identical lengths and identical tie-broken positions
//! (lexicographically smallest offset pair); the test suite holds them to
//! that and to the plaintext dynamic-programming oracle.
//!
//! Lengths below the encoding minimum `m` are reported as zero across all
//! operations: the trees only retain suffixes of length `m` or more, so
//! nothing shorter is certified, and nothing shorter is meant to be
//! revealed.

use std::collections::BTreeMap;
use std::fmt;

use crate::encoding::{EncodedSuffixTree, Slot};
use crate::suffix_tree::SuffixTree;

/// Which lcs engine to run. The engines are interchangeable; the merge
/// engine is the default in the linkage driver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Engine {
    Recursive,
    #[default]
    SortedMerge,
}

/// Length and one occurrence of a longest common substring.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LcsResult {
    /// Length in characters; zero when no common substring of the minimum
    /// length exists.
    pub length: usize,
    /// 1-based start offsets of one maximal occurrence in each string,
    /// the lexicographically smallest such pair; `None` when length is 0.
    pub positions: Option<(usize, usize)>,
}

impl LcsResult {
    const NONE: LcsResult = LcsResult { length: 0, positions: None };
}

/// Everything the linkage unit reports about one compared pair.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchOutcome {
    /// Longest common substring length (0 if below the minimum).
    pub lcs_length: usize,
    /// One maximal occurrence, as in [`LcsResult`].
    pub lcs_positions: Option<(usize, usize)>,
    /// `lcs_length / max(len_1, len_2)`, in `[0, 1]`.
    pub sim: f64,
    /// Length of the common prefix (0 if below the minimum).
    pub common_prefix_len: usize,
    /// Length of the common suffix (0 if below the minimum).
    pub common_suffix_len: usize,
    /// True when a common substring exists but neither a common prefix
    /// nor a common suffix does — the match sits strictly inside both.
    pub has_common_middle: bool,
}

/// Errors raised by matching operations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MatchError {
    /// The common-suffix sentinel must exceed both source lengths,
    /// otherwise `sentinel + length` is ambiguous against plain lengths.
    SentinelTooSmall { sentinel: u64, max_source_len: usize },
}

impl fmt::Display for MatchError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MatchError::SentinelTooSmall { sentinel, max_source_len } => write!(
                f,
                "sentinel {sentinel} does not exceed the maximum source length {max_source_len}"
            ),
        }
    }
}

impl std::error::Error for MatchError {}

/// Default common-suffix sentinel; any value above every source length works.
pub const DEFAULT_SENTINEL: u64 = 999;

// ---- suffix views ----

/// A borrowed view of one suffix: its token sequence and 1-based start.
#[derive(Debug, Clone, Copy)]
pub(crate) struct SeqView<'a, T> {
    pub tokens: &'a [T],
    pub start_offset: usize,
}

/// Sorted slot views of an encoded tree (already stored sorted).
fn encoded_views(tree: &EncodedSuffixTree) -> Vec<SeqView<'_, Slot>> {
    tree.suffixes
        .iter()
        .map(|s| SeqView { tokens: &s.slots, start_offset: s.start_offset })
        .collect()
}

/// Sorted character views of a plaintext tree's suffixes of length at
/// least `min_len` — the plaintext twin of the encoded representation.
fn plain_views(tree: &SuffixTree, min_len: usize) -> Vec<SeqView<'_, char>> {
    let src = tree.source();
    let min_len = min_len.max(1);
    let mut views: Vec<SeqView<'_, char>> = (0..src.len().saturating_sub(min_len - 1))
        .map(|p| SeqView { tokens: &src[p..], start_offset: p + 1 })
        .collect();
    views.sort_by(|a, b| a.tokens.cmp(b.tokens));
    views
}

// ---- generic engines ----

fn lcp_len<T: Eq>(a: &[T], b: &[T]) -> usize {
    a.iter().zip(b.iter()).take_while(|(x, y)| x == y).count()
}

#[derive(Debug, Clone, Copy)]
struct RawLcs {
    length: usize,
    positions: Option<(usize, usize)>,
}

impl RawLcs {
    const NONE: RawLcs = RawLcs { length: 0, positions: None };

    /// Keep the deeper candidate; on equal depth keep the smaller
    /// offset pair.
    fn consider(&mut self, length: usize, pos_a: usize, pos_b: usize) {
        if length > self.length {
            self.length = length;
            self.positions = Some((pos_a, pos_b));
        } else if length == self.length && length > 0 {
            let cand = (pos_a, pos_b);
            if self.positions.map_or(true, |best| cand < best) {
                self.positions = Some(cand);
            }
        }
    }

    fn floored(self, min_len: usize) -> LcsResult {
        if self.length >= min_len.max(1) {
            LcsResult { length: self.length, positions: self.positions }
        } else {
            LcsResult::NONE
        }
    }
}

/// End of the run of entries sharing `s[start]`'s token at `depth`.
fn run_end<T: Ord>(s: &[SeqView<'_, T>], start: usize, depth: usize) -> usize {
    let t = &s[start].tokens[depth];
    start
        + s[start..]
            .iter()
            .take_while(|x| &x.tokens[depth] == t)
            .count()
}

/// Depth-first intersection of the two suffix tries.
///
/// Invariant on entry: every sequence in `a` and in `b` carries the same
/// first `depth` tokens (across both sides), so the groups jointly spell
/// one common substring of that length.
fn walk<T: Ord>(a: &[SeqView<'_, T>], b: &[SeqView<'_, T>], depth: usize, best: &mut RawLcs) {
    if depth > 0 {
        let pos_a = a.iter().map(|s| s.start_offset).min().expect("non-empty group");
        let pos_b = b.iter().map(|s| s.start_offset).min().expect("non-empty group");
        best.consider(depth, pos_a, pos_b);
    }
    // Sequences ending exactly here sort before their extensions and
    // cannot descend further.
    let a = &a[a.iter().take_while(|s| s.tokens.len() == depth).count()..];
    let b = &b[b.iter().take_while(|s| s.tokens.len() == depth).count()..];
    if a.is_empty() || b.is_empty() {
        return;
    }
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].tokens[depth].cmp(&b[j].tokens[depth]) {
            std::cmp::Ordering::Less => i = run_end(a, i, depth),
            std::cmp::Ordering::Greater => j = run_end(b, j, depth),
            std::cmp::Ordering::Equal => {
                let ie = run_end(a, i, depth);
                let je = run_end(b, j, depth);
                walk(&a[i..ie], &b[j..je], depth + 1, best);
                i = ie;
                j = je;
            }
        }
    }
}

fn lcs_recursive<T: Ord>(a: &[SeqView<'_, T>], b: &[SeqView<'_, T>]) -> RawLcs {
    let mut best = RawLcs::NONE;
    walk(a, b, 0, &mut best);
    best
}

/// Merged-order scan: the maximal cross-list common prefix is realized by
/// some pair adjacent in the merged sorted order, so comparing each entry
/// with the latest entry of the other list finds the length.
fn lcs_merge<T: Ord>(a: &[SeqView<'_, T>], b: &[SeqView<'_, T>]) -> RawLcs {
    let mut best_len = 0;
    let (mut i, mut j) = (0, 0);
    let mut last_a: Option<usize> = None;
    let mut last_b: Option<usize> = None;
    while i < a.len() || j < b.len() {
        let take_a = match (i < a.len(), j < b.len()) {
            (true, true) => a[i].tokens <= b[j].tokens,
            (has_a, _) => has_a,
        };
        if take_a {
            if let Some(y) = last_b {
                best_len = best_len.max(lcp_len(a[i].tokens, b[y].tokens));
            }
            last_a = Some(i);
            i += 1;
        } else {
            if let Some(x) = last_a {
                best_len = best_len.max(lcp_len(b[j].tokens, a[x].tokens));
            }
            last_b = Some(j);
            j += 1;
        }
    }
    if best_len == 0 {
        return RawLcs::NONE;
    }

    // Recover the smallest offset pair: group both sides by their first
    // `best_len` tokens and take the lexicographic minimum over prefixes
    // present on both sides.
    let mut groups: BTreeMap<&[T], (Option<usize>, Option<usize>)> = BTreeMap::new();
    for x in a.iter().filter(|x| x.tokens.len() >= best_len) {
        let e = groups.entry(&x.tokens[..best_len]).or_default();
        e.0 = Some(e.0.map_or(x.start_offset, |v: usize| v.min(x.start_offset)));
    }
    for y in b.iter().filter(|y| y.tokens.len() >= best_len) {
        let e = groups.entry(&y.tokens[..best_len]).or_default();
        e.1 = Some(e.1.map_or(y.start_offset, |v: usize| v.min(y.start_offset)));
    }
    let positions = groups
        .values()
        .filter_map(|(pa, pb)| pa.zip(*pb))
        .min();
    debug_assert!(positions.is_some());
    RawLcs { length: best_len, positions }
}

fn lcs_views<T: Ord>(a: &[SeqView<'_, T>], b: &[SeqView<'_, T>], engine: Engine) -> RawLcs {
    match engine {
        Engine::Recursive => lcs_recursive(a, b),
        Engine::SortedMerge => lcs_merge(a, b),
    }
}

/// Longest entirely-equal sequence pair: the common suffix, since every
/// view is a suffix of its source. Both inputs sorted.
fn common_suffix_views<T: Ord>(a: &[SeqView<'_, T>], b: &[SeqView<'_, T>]) -> usize {
    let (mut i, mut j) = (0, 0);
    let mut best = 0;
    while i < a.len() && j < b.len() {
        match a[i].tokens.cmp(b[j].tokens) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                best = best.max(a[i].tokens.len());
                i += 1;
                j += 1;
            }
        }
    }
    best
}

/// Token-wise common prefix of the two longest views (the full strings).
fn common_prefix_views<T: Eq>(a: Option<&[T]>, b: Option<&[T]>) -> usize {
    match (a, b) {
        (Some(a), Some(b)) => lcp_len(a, b),
        _ => 0,
    }
}

fn longest_tokens<'a, T>(views: &'a [SeqView<'a, T>]) -> Option<&'a [T]> {
    views.iter().max_by_key(|v| v.tokens.len()).map(|v| v.tokens)
}

// ---- assembled generic pipeline ----

struct PairInput<'a, T> {
    a: Vec<SeqView<'a, T>>,
    b: Vec<SeqView<'a, T>>,
    len_a: usize,
    len_b: usize,
}

impl<'a, T: Ord> PairInput<'a, T> {
    fn check_sentinel(&self, sentinel: u64) -> Result<(), MatchError> {
        let max_source_len = self.len_a.max(self.len_b);
        if sentinel <= max_source_len as u64 {
            return Err(MatchError::SentinelTooSmall { sentinel, max_source_len });
        }
        Ok(())
    }

    fn lcs(&self, min_len: usize, engine: Engine) -> LcsResult {
        lcs_views(&self.a, &self.b, engine).floored(min_len)
    }

    fn common_prefix(&self, min_len: usize) -> usize {
        let raw = common_prefix_views(longest_tokens(&self.a), longest_tokens(&self.b));
        if raw >= min_len.max(1) {
            raw
        } else {
            0
        }
    }

    /// Sentinel form: `sentinel + L` when a common suffix of length `L`
    /// exists, otherwise the plain walk value, necessarily below the
    /// sentinel.
    fn common_suffix_sentinel(&self, sentinel: u64, engine: Engine) -> Result<u64, MatchError> {
        self.check_sentinel(sentinel)?;
        let best = common_suffix_views(&self.a, &self.b);
        if best > 0 {
            Ok(sentinel + best as u64)
        } else {
            Ok(lcs_views(&self.a, &self.b, engine).length as u64)
        }
    }

    fn outcome(&self, min_len: usize, sentinel: u64, engine: Engine) -> Result<MatchOutcome, MatchError> {
        self.check_sentinel(sentinel)?;
        let lcs = self.lcs(min_len, engine);
        let common_prefix_len = self.common_prefix(min_len);
        let common_suffix_len = common_suffix_views(&self.a, &self.b);
        let max_len = self.len_a.max(self.len_b);
        let sim = if max_len == 0 { 0.0 } else { lcs.length as f64 / max_len as f64 };
        Ok(MatchOutcome {
            lcs_length: lcs.length,
            lcs_positions: lcs.positions,
            sim,
            common_prefix_len,
            common_suffix_len,
            has_common_middle: lcs.length > 0 && common_prefix_len == 0 && common_suffix_len == 0,
        })
    }
}

fn encoded_pair<'a>(a: &'a EncodedSuffixTree, b: &'a EncodedSuffixTree) -> PairInput<'a, Slot> {
    PairInput {
        a: encoded_views(a),
        b: encoded_views(b),
        len_a: a.source_length,
        len_b: b.source_length,
    }
}

fn plain_pair<'a>(a: &'a SuffixTree, b: &'a SuffixTree, min_len: usize) -> PairInput<'a, char> {
    PairInput {
        a: plain_views(a, min_len),
        b: plain_views(b, min_len),
        len_a: a.source_len(),
        len_b: b.source_len(),
    }
}

// ---- public operations, encoded ----

/// Longest common substring length (and one occurrence) of the two
/// encoded strings; zero when below `min_len`. Both trees must come from
/// the same encoding parameters, which the protocol layer enforces.
pub fn lcs_encoded(
    a: &EncodedSuffixTree,
    b: &EncodedSuffixTree,
    min_len: usize,
    engine: Engine,
) -> LcsResult {
    encoded_pair(a, b).lcs(min_len, engine)
}

/// Common prefix length of the two encoded strings; zero when below
/// `min_len`. With first-character hardening a nonzero report certifies
/// agreement on at least the hardening prefix, since position 1 commits
/// to the first `k` characters.
pub fn longest_common_prefix(a: &EncodedSuffixTree, b: &EncodedSuffixTree, min_len: usize) -> usize {
    encoded_pair(a, b).common_prefix(min_len)
}

/// Common suffix detection in sentinel form: returns `sentinel + L` when
/// the strings share a suffix of length `L >= m`, otherwise a value below
/// the sentinel. The sentinel must exceed both source lengths.
pub fn longest_common_suffix(
    a: &EncodedSuffixTree,
    b: &EncodedSuffixTree,
    sentinel: u64,
) -> Result<u64, MatchError> {
    encoded_pair(a, b).common_suffix_sentinel(sentinel, Engine::SortedMerge)
}

/// Length of the longest common substring when it lies strictly inside
/// both strings (no common prefix, no common suffix); zero otherwise.
pub fn longest_common_middle(
    a: &EncodedSuffixTree,
    b: &EncodedSuffixTree,
    min_len: usize,
    sentinel: u64,
) -> Result<usize, MatchError> {
    let outcome = encoded_pair(a, b).outcome(min_len, sentinel, Engine::SortedMerge)?;
    Ok(if outcome.has_common_middle { outcome.lcs_length } else { 0 })
}

/// `lcs / max(len_1, len_2)`: 0 means no common substring of the minimum
/// length, 1 means the strings are identical.
pub fn sim_lcs(a: &EncodedSuffixTree, b: &EncodedSuffixTree, min_len: usize, engine: Engine) -> f64 {
    let max_len = a.source_length.max(b.source_length);
    if max_len == 0 {
        return 0.0;
    }
    lcs_encoded(a, b, min_len, engine).length as f64 / max_len as f64
}

/// Computes the full [`MatchOutcome`] for one encoded pair.
pub fn match_pair(
    a: &EncodedSuffixTree,
    b: &EncodedSuffixTree,
    min_len: usize,
    sentinel: u64,
    engine: Engine,
) -> Result<MatchOutcome, MatchError> {
    encoded_pair(a, b).outcome(min_len, sentinel, engine)
}

// ---- public operations, plaintext ----
//
// The same pipeline on character tokens. Running matcher and encoder in
// either order commutes: match(encode(s1), encode(s2)) equals
// match(s1, s2) field for field, which the tests verify.

/// [`lcs_encoded`] on plaintext trees.
pub fn lcs_plain(a: &SuffixTree, b: &SuffixTree, min_len: usize, engine: Engine) -> LcsResult {
    plain_pair(a, b, min_len).lcs(min_len, engine)
}

/// [`match_pair`] on plaintext trees.
pub fn match_pair_plain(
    a: &SuffixTree,
    b: &SuffixTree,
    min_len: usize,
    sentinel: u64,
    engine: Engine,
) -> Result<MatchOutcome, MatchError> {
    plain_pair(a, b, min_len).outcome(min_len, sentinel, engine)
}

/// [`sim_lcs`] on plaintext trees.
pub fn sim_lcs_plain(a: &SuffixTree, b: &SuffixTree, min_len: usize, engine: Engine) -> f64 {
    let max_len = a.source_len().max(b.source_len());
    if max_len == 0 {
        return 0.0;
    }
    lcs_plain(a, b, min_len, engine).length as f64 / max_len as f64
}

// ---- plaintext oracle ----

/// Quadratic dynamic-programming longest common substring on plaintext,
/// entirely independent of trees and encodings. This is the ground truth
/// the engines are verified against; it uses the same position tie-break
/// (lexicographically smallest 1-based offset pair).
pub fn lcs_oracle(s1: &str, s2: &str) -> LcsResult {
    let a: Vec<char> = s1.chars().collect();
    let b: Vec<char> = s2.chars().collect();
    let mut best = RawLcs::NONE;
    let mut prev = vec![0usize; b.len() + 1];
    for i in 1..=a.len() {
        let mut cur = vec![0usize; b.len() + 1];
        for j in 1..=b.len() {
            if a[i - 1] == b[j - 1] {
                let run = prev[j - 1] + 1;
                cur[j] = run;
                best.consider(run, i - run + 1, j - run + 1);
            }
        }
        prev = cur;
    }
    LcsResult { length: best.length, positions: best.positions }
}
