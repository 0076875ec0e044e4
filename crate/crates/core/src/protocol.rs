//! The three-party linkage flow: each data owner encodes its records and
//! serializes them; the linkage unit ingests two encoded databases,
//! compares all cross pairs, and reports the matching ones.
//!
//! The serialized container carries only public parameters, record ids,
//! lengths, offsets, digests, and residues — never salts or plaintext
//! values. Salts travel out-of-band between the data owners.

use std::collections::BTreeSet;
use std::fmt;

use rayon::prelude::*;

use crate::encoding::{
    encode_tree, first_char_encode, EncodeError, EncodedSuffix, EncodedSuffixTree, EncodingParams,
    FirstCharParams, HashId, Slot,
};
use crate::matching::{match_pair, Engine, MatchError, MatchOutcome, DEFAULT_SENTINEL};
use crate::suffix_tree::{build_suffix_tree, TreeError};

const MAGIC: [u8; 4] = *b"ESTD";
const FORMAT_VERSION: u16 = 1;

// ---- errors ----

/// One parameter on which two database headers disagree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HeaderDiff {
    /// Which header field differs.
    pub field: &'static str,
    /// The first database's value, rendered.
    pub left: String,
    /// The second database's value, rendered.
    pub right: String,
}

impl fmt::Display for HeaderDiff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} != {}", self.field, self.left, self.right)
    }
}

/// Why one record could not be encoded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RecordFailure {
    /// Suffix tree construction rejected the value.
    Tree(TreeError),
    /// Encoding rejected the value.
    Encoding(EncodeError),
}

impl fmt::Display for RecordFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RecordFailure::Tree(e) => write!(f, "suffix tree construction failed: {e}"),
            RecordFailure::Encoding(e) => write!(f, "encoding failed: {e}"),
        }
    }
}

/// An encoding failure attributed to its record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecordError {
    /// The id of the record that failed.
    pub record_id: String,
    /// What went wrong.
    pub failure: RecordFailure,
}

impl fmt::Display for RecordError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "record {:?}: {}", self.record_id, self.failure)
    }
}

/// Errors raised by the protocol layer.
#[derive(Debug)]
pub enum ProtocolError {
    /// The encoding parameters themselves are invalid.
    InvalidParams(EncodeError),
    /// Two input records share an id.
    DuplicateRecordId { record_id: String },
    /// A record failed to encode while abort-on-error was requested.
    Record(RecordError),
    /// The two databases were encoded under different public parameters.
    HeaderMismatch { diffs: Vec<HeaderDiff> },
    /// The requested minimum match length is below the encoded minimum
    /// suffix length, so the databases cannot answer the query.
    MinLenBelowHeader { requested: usize, header: usize },
    /// A matching-level parameter problem (sentinel versus source lengths).
    Match(MatchError),
    /// A serialized database failed structural validation.
    Malformed { offset: usize, detail: String },
    /// The container version is not understood.
    UnsupportedVersion { found: u16 },
    /// The worker pool could not be constructed.
    WorkerPool { detail: String },
}

impl ProtocolError {
    /// Conventional process exit code: 1 for unusable parameters, 2 for
    /// parameter disagreement between the parties, 3 for malformed or
    /// unencodable input data, 4 for internal failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            ProtocolError::InvalidParams(_) => 1,
            ProtocolError::HeaderMismatch { .. }
            | ProtocolError::MinLenBelowHeader { .. }
            | ProtocolError::Match(_) => 2,
            ProtocolError::DuplicateRecordId { .. }
            | ProtocolError::Record(_)
            | ProtocolError::Malformed { .. }
            | ProtocolError::UnsupportedVersion { .. } => 3,
            ProtocolError::WorkerPool { .. } => 4,
        }
    }
}

impl fmt::Display for ProtocolError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProtocolError::InvalidParams(e) => write!(f, "invalid encoding parameters: {e}"),
            ProtocolError::DuplicateRecordId { record_id } => {
                write!(f, "duplicate record id {record_id:?}")
            }
            ProtocolError::Record(e) => write!(f, "{e}"),
            ProtocolError::HeaderMismatch { diffs } => {
                write!(f, "encoded databases disagree on public parameters: ")?;
                for (i, d) in diffs.iter().enumerate() {
                    if i > 0 {
                        write!(f, "; ")?;
                    }
                    write!(f, "{d}")?;
                }
                Ok(())
            }
            ProtocolError::MinLenBelowHeader { requested, header } => write!(
                f,
                "minimum match length {requested} is below the encoded minimum suffix length {header}"
            ),
            ProtocolError::Match(e) => write!(f, "{e}"),
            ProtocolError::Malformed { offset, detail } => {
                write!(f, "malformed encoded database at byte {offset}: {detail}")
            }
            ProtocolError::UnsupportedVersion { found } => {
                write!(f, "unsupported container version {found} (expected {FORMAT_VERSION})")
            }
            ProtocolError::WorkerPool { detail } => write!(f, "worker pool setup failed: {detail}"),
        }
    }
}

impl std::error::Error for ProtocolError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            ProtocolError::InvalidParams(e) => Some(e),
            ProtocolError::Match(e) => Some(e),
            _ => None,
        }
    }
}

// ---- domain types ----

/// The public parameters stamped on a serialized database. Everything a
/// linkage unit needs to check compatibility — and nothing secret.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatabaseHeader {
    /// Hash function used for chain digests.
    pub hash: HashId,
    /// Minimum retained suffix length (`m`).
    pub min_suffix_len: usize,
    /// First-character hardening parameters, when enabled.
    pub first_char: Option<FirstCharParams>,
    /// Size of the declared input alphabet.
    pub alphabet_size: usize,
}

impl DatabaseHeader {
    /// Extracts the public half of the encoding parameters.
    pub fn from_params(params: &EncodingParams) -> Self {
        DatabaseHeader {
            hash: params.hash,
            min_suffix_len: params.min_suffix_len,
            first_char: params.first_char.clone(),
            alphabet_size: params.alphabet.len(),
        }
    }
}

/// One encoded record: a public id and the encoding of its value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedRecord {
    /// Public record identifier.
    pub record_id: String,
    /// The encoded suffix tree of the record's value.
    pub tree: EncodedSuffixTree,
}

/// A data owner's complete output: header plus encoded records, in input
/// order, with unique ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedDatabase {
    /// Public parameters shared by every record.
    pub header: DatabaseHeader,
    /// The encoded records.
    pub records: Vec<EncodedRecord>,
}

/// What [`do_prepare`] produced: the database plus any records skipped
/// for per-record errors (empty unless abort-on-error was disabled).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrepareReport {
    /// The encoded database over the successfully encoded records.
    pub database: EncodedDatabase,
    /// Records that could not be encoded, in input order.
    pub failures: Vec<RecordError>,
}

/// The linkage unit's verdict on one record pair.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchRecord {
    /// Id of the record from the first database.
    pub id_a: String,
    /// Id of the record from the second database.
    pub id_b: String,
    /// The full comparison outcome.
    pub outcome: MatchOutcome,
    /// True exactly when `outcome.lcs_length` reaches the requested
    /// minimum match length.
    pub is_match: bool,
}

/// Knobs for [`lu_match`] beyond the two databases.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchOptions {
    /// Minimum common-substring length for a pair to match. Must be at
    /// least the databases' encoded minimum suffix length.
    pub min_len: usize,
    /// When set, additionally require `sim >= threshold`.
    pub sim_threshold: Option<f64>,
    /// Common-suffix sentinel; must exceed every source length.
    pub sentinel: u64,
    /// Worker thread count; `None` uses the global default pool.
    pub workers: Option<usize>,
    /// Which longest-common-substring engine to run.
    pub engine: Engine,
}

impl MatchOptions {
    /// Defaults: no similarity threshold, standard sentinel, global
    /// thread pool, default engine.
    pub fn new(min_len: usize) -> Self {
        MatchOptions {
            min_len,
            sim_threshold: None,
            sentinel: DEFAULT_SENTINEL,
            workers: None,
            engine: Engine::default(),
        }
    }
}

// ---- data owner side ----

fn encode_one(value: &str, params: &EncodingParams) -> Result<EncodedSuffixTree, RecordFailure> {
    let tree = build_suffix_tree(value).map_err(RecordFailure::Tree)?;
    let encoded = encode_tree(&tree, params).map_err(RecordFailure::Encoding)?;
    if params.first_char.is_some() {
        first_char_encode(&encoded, &tree, params).map_err(RecordFailure::Encoding)
    } else {
        Ok(encoded)
    }
}

/// Encodes a whole database of `(record_id, value)` rows under one set of
/// parameters. With `abort_on_error`, the first failing record aborts the
/// run; otherwise failing records are reported in the [`PrepareReport`]
/// and the rest proceed. Duplicate ids always abort.
pub fn do_prepare(
    records: &[(String, String)],
    params: &EncodingParams,
    abort_on_error: bool,
) -> Result<PrepareReport, ProtocolError> {
    params.validate().map_err(ProtocolError::InvalidParams)?;
    let mut seen = BTreeSet::new();
    for (record_id, _) in records {
        if !seen.insert(record_id.as_str()) {
            return Err(ProtocolError::DuplicateRecordId { record_id: record_id.clone() });
        }
    }

    let mut encoded = Vec::with_capacity(records.len());
    let mut failures = Vec::new();
    for (record_id, value) in records {
        match encode_one(value, params) {
            Ok(tree) => encoded.push(EncodedRecord { record_id: record_id.clone(), tree }),
            Err(failure) => {
                let err = RecordError { record_id: record_id.clone(), failure };
                if abort_on_error {
                    return Err(ProtocolError::Record(err));
                }
                failures.push(err);
            }
        }
    }

    Ok(PrepareReport {
        database: EncodedDatabase { header: DatabaseHeader::from_params(params), records: encoded },
        failures,
    })
}

// ---- linkage unit side ----

fn first_char_string(fc: &Option<FirstCharParams>) -> String {
    match fc {
        Some(p) => format!("enabled(prefix_len={}, modulus={})", p.prefix_len, p.modulus),
        None => "disabled".to_string(),
    }
}

fn header_diffs(a: &DatabaseHeader, b: &DatabaseHeader) -> Vec<HeaderDiff> {
    let mut diffs = Vec::new();
    if a.hash != b.hash {
        diffs.push(HeaderDiff {
            field: "hash",
            left: a.hash.to_string(),
            right: b.hash.to_string(),
        });
    }
    if a.min_suffix_len != b.min_suffix_len {
        diffs.push(HeaderDiff {
            field: "min_suffix_len",
            left: a.min_suffix_len.to_string(),
            right: b.min_suffix_len.to_string(),
        });
    }
    if a.first_char != b.first_char {
        diffs.push(HeaderDiff {
            field: "first_char",
            left: first_char_string(&a.first_char),
            right: first_char_string(&b.first_char),
        });
    }
    diffs
}

/// Compares every record of `edb_a` against every record of `edb_b` and
/// returns the matching pairs — `lcs >= min_len`, plus `sim >= threshold`
/// when one is set — sorted by `(id_a, id_b)`. Headers must agree on all
/// public parameters; the requested minimum length may exceed (but not
/// undercut) the encoded minimum suffix length.
pub fn lu_match(
    edb_a: &EncodedDatabase,
    edb_b: &EncodedDatabase,
    opts: &MatchOptions,
) -> Result<Vec<MatchRecord>, ProtocolError> {
    let diffs = header_diffs(&edb_a.header, &edb_b.header);
    if !diffs.is_empty() {
        return Err(ProtocolError::HeaderMismatch { diffs });
    }
    if opts.min_len < edb_a.header.min_suffix_len {
        return Err(ProtocolError::MinLenBelowHeader {
            requested: opts.min_len,
            header: edb_a.header.min_suffix_len,
        });
    }
    let max_source_len = edb_a
        .records
        .iter()
        .chain(&edb_b.records)
        .map(|r| r.tree.source_length)
        .max()
        .unwrap_or(0);
    if opts.sentinel as u128 <= max_source_len as u128 {
        return Err(ProtocolError::Match(MatchError::SentinelTooSmall {
            sentinel: opts.sentinel,
            max_source_len,
        }));
    }

    let compare_all = || -> Vec<MatchRecord> {
        edb_a
            .records
            .par_iter()
            .flat_map_iter(|ra| {
                edb_b.records.iter().filter_map(move |rb| {
                    let outcome = match_pair(
                        &ra.tree,
                        &rb.tree,
                        opts.min_len,
                        opts.sentinel,
                        opts.engine,
                    )
                    .expect("sentinel checked against both databases");
                    let is_match = outcome.lcs_length >= opts.min_len
                        && opts.sim_threshold.is_none_or(|t| outcome.sim >= t);
                    is_match.then(|| MatchRecord {
                        id_a: ra.record_id.clone(),
                        id_b: rb.record_id.clone(),
                        outcome,
                        is_match,
                    })
                })
            })
            .collect()
    };

    let mut results = match opts.workers {
        Some(workers) => rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| ProtocolError::WorkerPool { detail: e.to_string() })?
            .install(compare_all),
        None => compare_all(),
    };
    results.sort_by(|x, y| (&x.id_a, &x.id_b).cmp(&(&y.id_a, &y.id_b)));
    Ok(results)
}

// ---- serialization ----

struct Writer {
    out: Vec<u8>,
}

impl Writer {
    fn u8(&mut self, v: u8) {
        self.out.push(v);
    }
    fn u16(&mut self, v: u16) {
        self.out.extend_from_slice(&v.to_le_bytes());
    }
    fn u32(&mut self, v: usize) {
        let v = u32::try_from(v).expect("field fits in u32");
        self.out.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.out.extend_from_slice(&v.to_le_bytes());
    }
    fn bytes(&mut self, v: &[u8]) {
        self.out.extend_from_slice(v);
    }
}

struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn malformed(&self, detail: impl Into<String>) -> ProtocolError {
        ProtocolError::Malformed { offset: self.pos, detail: detail.into() }
    }

    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8], ProtocolError> {
        if self.data.len() - self.pos < n {
            return Err(self.malformed(format!("unexpected end of input reading {what}")));
        }
        let slice = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }

    fn u8(&mut self, what: &str) -> Result<u8, ProtocolError> {
        Ok(self.take(1, what)?[0])
    }
    fn u16(&mut self, what: &str) -> Result<u16, ProtocolError> {
        Ok(u16::from_le_bytes(self.take(2, what)?.try_into().expect("two bytes")))
    }
    fn u32(&mut self, what: &str) -> Result<usize, ProtocolError> {
        let v = u32::from_le_bytes(self.take(4, what)?.try_into().expect("four bytes"));
        Ok(v as usize)
    }
    fn u64(&mut self, what: &str) -> Result<u64, ProtocolError> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().expect("eight bytes")))
    }
}

impl EncodedDatabase {
    /// Serializes to the versioned binary container. Layout, all integers
    /// little-endian: magic, version, hash id, first-char flag, minimum
    /// suffix length, prefix length `k`, modulus `n` (zero when the flag
    /// is off), alphabet size, record count; then per record its id
    /// (length-prefixed UTF-8), source length, and suffixes in canonical
    /// slot order, each as start offset, slot count, a tagged first slot
    /// (0 = digest, 1 = residue) and raw digest bytes for the rest.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer { out: Vec::new() };
        w.bytes(&MAGIC);
        w.u16(FORMAT_VERSION);
        w.u8(self.header.hash.code());
        match &self.header.first_char {
            Some(fc) => {
                w.u8(1);
                w.u32(self.header.min_suffix_len);
                w.u32(fc.prefix_len);
                w.u64(fc.modulus);
            }
            None => {
                w.u8(0);
                w.u32(self.header.min_suffix_len);
                w.u32(0);
                w.u64(0);
            }
        }
        w.u32(self.header.alphabet_size);
        w.u64(self.records.len() as u64);
        for record in &self.records {
            let id = record.record_id.as_bytes();
            w.u32(id.len());
            w.bytes(id);
            w.u32(record.tree.source_length);
            w.u32(record.tree.suffixes.len());
            for suffix in &record.tree.suffixes {
                w.u32(suffix.start_offset);
                w.u32(suffix.slots.len());
                let mut slots = suffix.slots.iter();
                match slots.next().expect("encoded suffixes are never empty") {
                    Slot::Digest(d) => {
                        w.u8(0);
                        w.bytes(d);
                    }
                    Slot::Residue(r) => {
                        w.u8(1);
                        w.u64(*r);
                    }
                }
                for slot in slots {
                    let digest = slot
                        .as_digest()
                        .expect("only the first slot of a suffix can be a residue");
                    w.bytes(digest);
                }
            }
        }
        w.out
    }

    /// Parses and validates a serialized database. Rejects wrong magic or
    /// version, truncation, trailing bytes, non-canonical suffix order,
    /// out-of-range offsets, residues at or above the modulus, and slot
    /// kinds inconsistent with the first-char flag.
    pub fn from_bytes(data: &[u8]) -> Result<Self, ProtocolError> {
        let mut r = Reader { data, pos: 0 };
        if r.take(4, "magic")? != MAGIC {
            return Err(ProtocolError::Malformed {
                offset: 0,
                detail: "bad magic (not an encoded suffix tree database)".into(),
            });
        }
        let version = r.u16("version")?;
        if version != FORMAT_VERSION {
            return Err(ProtocolError::UnsupportedVersion { found: version });
        }
        let hash_code = r.u8("hash id")?;
        let hash = HashId::from_code(hash_code)
            .ok_or_else(|| r.malformed(format!("unknown hash id {hash_code}")))?;
        let fc_flag = r.u8("first-char flag")?;
        if fc_flag > 1 {
            return Err(r.malformed(format!("first-char flag must be 0 or 1, got {fc_flag}")));
        }
        let min_suffix_len = r.u32("minimum suffix length")?;
        if min_suffix_len == 0 {
            return Err(r.malformed("minimum suffix length must be at least 1"));
        }
        let prefix_len = r.u32("prefix length")?;
        let modulus = r.u64("modulus")?;
        let first_char = if fc_flag == 1 {
            if prefix_len < 2 {
                return Err(r.malformed(format!(
                    "first-char prefix length must be at least 2, got {prefix_len}"
                )));
            }
            if modulus == 0 {
                return Err(r.malformed("first-char modulus must be at least 1"));
            }
            Some(FirstCharParams { prefix_len, modulus })
        } else {
            if prefix_len != 0 || modulus != 0 {
                return Err(r.malformed(
                    "prefix length and modulus must be zero when first-char is disabled",
                ));
            }
            None
        };
        let alphabet_size = r.u32("alphabet size")?;
        if alphabet_size == 0 {
            return Err(r.malformed("alphabet size must be at least 1"));
        }
        let record_count = r.u64("record count")?;

        let digest_len = hash.digest_len();
        let mut records = Vec::new();
        let mut seen_ids = BTreeSet::new();
        for _ in 0..record_count {
            let id_len = r.u32("record id length")?;
            let id_bytes = r.take(id_len, "record id")?;
            let record_id = std::str::from_utf8(id_bytes)
                .map_err(|_| r.malformed("record id is not valid UTF-8"))?
                .to_string();
            if !seen_ids.insert(record_id.clone()) {
                return Err(r.malformed(format!("duplicate record id {record_id:?}")));
            }
            let source_length = r.u32("source length")?;
            let suffix_count = r.u32("suffix count")?;
            let mut suffixes = Vec::new();
            for _ in 0..suffix_count {
                let start_offset = r.u32("suffix start offset")?;
                let slot_count = r.u32("suffix slot count")?;
                if slot_count == 0 {
                    return Err(r.malformed("suffix has zero slots"));
                }
                if start_offset == 0 || start_offset + slot_count > source_length + 1 {
                    return Err(r.malformed(format!(
                        "suffix at offset {start_offset} with {slot_count} slots \
                         exceeds source length {source_length}"
                    )));
                }
                let tag = r.u8("first-slot tag")?;
                let first = match (tag, &first_char) {
                    (0, None) => Slot::Digest(r.take(digest_len, "first digest")?.to_vec()),
                    (1, Some(fc)) => {
                        let residue = r.u64("residue")?;
                        if residue >= fc.modulus {
                            return Err(r.malformed(format!(
                                "residue {residue} not below modulus {}",
                                fc.modulus
                            )));
                        }
                        Slot::Residue(residue)
                    }
                    (0, Some(_)) => {
                        return Err(r.malformed(
                            "digest first slot in a first-char hardened database",
                        ))
                    }
                    (1, None) => {
                        return Err(r.malformed("residue first slot without first-char hardening"))
                    }
                    (t, _) => {
                        return Err(r.malformed(format!("first-slot tag must be 0 or 1, got {t}")))
                    }
                };
                let mut slots = vec![first];
                for _ in 1..slot_count {
                    slots.push(Slot::Digest(r.take(digest_len, "chain digest")?.to_vec()));
                }
                let suffix = EncodedSuffix { slots, start_offset };
                if let Some(prev) = suffixes.last() {
                    let prev: &EncodedSuffix = prev;
                    if prev.slots >= suffix.slots {
                        return Err(r.malformed("suffixes out of canonical slot order"));
                    }
                }
                suffixes.push(suffix);
            }
            records.push(EncodedRecord {
                record_id,
                tree: EncodedSuffixTree { suffixes, source_length },
            });
        }
        if r.pos != data.len() {
            return Err(ProtocolError::Malformed {
                offset: r.pos,
                detail: format!("{} trailing bytes after the last record", data.len() - r.pos),
            });
        }
        Ok(EncodedDatabase {
            header: DatabaseHeader { hash, min_suffix_len, first_char, alphabet_size },
            records,
        })
    }
}
