//! Privacy-preserving string matching over hash-encoded suffix trees.
//!
//! Data owners encode each value as the set of its suffixes, and every
//! suffix as a chain of salted digests, one per character. Because a
//! digest at position `p` commits to the whole prefix up to `p`, equal
//! digests certify equal characters-in-context, and a linkage unit can
//! compute longest-common-substring style similarity on encodings alone,
//! without ever seeing a character of the underlying values.
//!
//! Module map:
//!
//! - [`suffix_tree`] — linear-time suffix tree construction and suffix
//!   enumeration with a minimum-length filter
//! - [`encoding`] — chained digest encoding, first-character hardening,
//!   and first-position frequency analysis
//! - [`matching`] — lcs, common prefix / suffix / middle, and similarity,
//!   on encoded or plaintext trees, plus the plaintext DP oracle
//! - [`baselines`] — q-gram sets, Bloom filters, tabulation sketches and
//!   edit-distance similarity for comparison experiments
//! - [`protocol`] — the data-owner / linkage-unit exchange: database
//!   container, serialization, and the all-pairs matching driver
//! - [`datagen`] — deterministic synthetic corpora: corrupted pairs and
//!   skewed-first-digit strings
//! - [`eval`] — similarity scatter, frequency flattening, collision-bound
//!   diagnostics, the frequency-alignment attack, and timing runs

pub mod baselines;
pub mod datagen;
pub mod encoding;
pub mod eval;
pub mod matching;
pub mod protocol;
pub mod suffix_tree;
