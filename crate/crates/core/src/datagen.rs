//! Synthetic corpora for evaluation: corrupted string pairs over a
//! declared alphabet, Benford-skewed digit strings, and the CSV file
//! formats that carry pair and value corpora between tools.
//!
//! All generators are seed-deterministic: the same seed yields the same
//! corpus, byte for byte, across runs and machines.

use std::io;
use std::ops::RangeInclusive;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::encoding::{Alphabet, EncodeError};

// ---- errors ----

/// Errors raised by generation and corpus file handling.
#[derive(Debug)]
pub enum DatagenError {
    /// Corruption needs at least one edit.
    ZeroMaxEdits,
    /// Cannot place more substitutions than the shortest string has
    /// positions.
    MaxEditsExceedsLength { max_edits: usize, min_length: usize },
    /// Substitution needs at least two symbols to choose from.
    AlphabetTooSmall { size: usize },
    /// The length range is empty.
    EmptyLengthRange { start: usize, end: usize },
    /// Strings must have at least one character.
    ZeroLength,
    /// The first line of a corpus file must declare the alphabet.
    MissingAlphabetLine,
    /// The declared alphabet is unusable.
    BadAlphabet(EncodeError),
    /// The CSV header row does not match the documented schema.
    BadSchema { expected: &'static str, found: String },
    /// A data row contains a character outside the declared alphabet.
    RowOutsideAlphabet { row: usize, ch: char },
    /// Underlying I/O failure.
    Io(io::Error),
    /// CSV-level failure (malformed row, wrong field count).
    Csv(csv::Error),
}

impl std::fmt::Display for DatagenError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DatagenError::ZeroMaxEdits => write!(f, "max_edits must be at least 1"),
            DatagenError::MaxEditsExceedsLength { max_edits, min_length } => write!(
                f,
                "max_edits {max_edits} exceeds the minimum string length {min_length}"
            ),
            DatagenError::AlphabetTooSmall { size } => {
                write!(f, "alphabet with {size} symbol(s) cannot support substitutions")
            }
            DatagenError::EmptyLengthRange { start, end } => {
                write!(f, "length range {start}..={end} is empty")
            }
            DatagenError::ZeroLength => write!(f, "string length must be at least 1"),
            DatagenError::MissingAlphabetLine => {
                write!(f, "corpus file must start with an '#alphabet=' line")
            }
            DatagenError::BadAlphabet(e) => write!(f, "declared alphabet is invalid: {e}"),
            DatagenError::BadSchema { expected, found } => {
                write!(f, "expected CSV header {expected:?}, found {found:?}")
            }
            DatagenError::RowOutsideAlphabet { row, ch } => {
                write!(f, "data row {row} contains {ch:?}, outside the declared alphabet")
            }
            DatagenError::Io(e) => write!(f, "I/O error: {e}"),
            DatagenError::Csv(e) => write!(f, "CSV error: {e}"),
        }
    }
}

impl std::error::Error for DatagenError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            DatagenError::BadAlphabet(e) => Some(e),
            DatagenError::Io(e) => Some(e),
            DatagenError::Csv(e) => Some(e),
            _ => None,
        }
    }
}

impl From<io::Error> for DatagenError {
    fn from(e: io::Error) -> Self {
        DatagenError::Io(e)
    }
}

impl From<csv::Error> for DatagenError {
    fn from(e: csv::Error) -> Self {
        DatagenError::Csv(e)
    }
}

// ---- domain types ----

/// One original string and its corrupted counterpart.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorruptedPair {
    /// Stable pair identifier, unique within the corpus.
    pub pair_id: String,
    /// The original string.
    pub s1: String,
    /// The corrupted string: same length, 1 to `max_edits` positions
    /// substituted with different symbols from the same alphabet.
    pub s2: String,
}

/// Where a corpus came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Provenance {
    /// Built by [`gen_corrupted_pairs`] from this seed.
    Generated { seed: u64 },
    /// Read from an external pair file.
    Imported { source: String },
}

/// A corpus of string pairs over one alphabet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairCorpus {
    /// The pairs, in generation or file order.
    pub pairs: Vec<CorruptedPair>,
    /// The alphabet every character is drawn from.
    pub alphabet: Alphabet,
    /// Seed or file source, for audit trails.
    pub provenance: Provenance,
}

// ---- generators ----

fn random_string(rng: &mut ChaCha8Rng, alphabet: &[char], len: usize) -> String {
    (0..len).map(|_| alphabet[rng.gen_range(0..alphabet.len())]).collect()
}

/// Corrupts `s1` by substituting `edits` distinct positions, each with a
/// different symbol from the alphabet.
fn corrupt(rng: &mut ChaCha8Rng, s1: &str, alphabet: &[char], edits: usize) -> String {
    let mut chars: Vec<char> = s1.chars().collect();
    let positions = rand::seq::index::sample(rng, chars.len(), edits);
    for pos in positions {
        let current = alphabet
            .iter()
            .position(|&c| c == chars[pos])
            .expect("generated characters stay inside the alphabet");
        // Draw from the alphabet minus the current symbol.
        let mut pick = rng.gen_range(0..alphabet.len() - 1);
        if pick >= current {
            pick += 1;
        }
        chars[pos] = alphabet[pick];
    }
    chars.into_iter().collect()
}

/// Generates `count` pairs of strings over `alphabet`. Each original
/// string's length is drawn uniformly from `lengths`; its partner differs
/// in 1 to `max_edits` substituted positions (exact count drawn uniformly
/// per pair). Reproducible from `seed`.
pub fn gen_corrupted_pairs(
    count: usize,
    alphabet: &Alphabet,
    lengths: RangeInclusive<usize>,
    max_edits: usize,
    seed: u64,
) -> Result<PairCorpus, DatagenError> {
    let (min_len, max_len) = (*lengths.start(), *lengths.end());
    if min_len > max_len {
        return Err(DatagenError::EmptyLengthRange { start: min_len, end: max_len });
    }
    if min_len == 0 {
        return Err(DatagenError::ZeroLength);
    }
    if max_edits == 0 {
        return Err(DatagenError::ZeroMaxEdits);
    }
    if max_edits > min_len {
        return Err(DatagenError::MaxEditsExceedsLength { max_edits, min_length: min_len });
    }
    if alphabet.len() < 2 {
        return Err(DatagenError::AlphabetTooSmall { size: alphabet.len() });
    }

    let chars = alphabet.chars();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::with_capacity(count);
    for i in 0..count {
        let len = rng.gen_range(min_len..=max_len);
        let s1 = random_string(&mut rng, chars, len);
        let edits = rng.gen_range(1..=max_edits);
        let s2 = corrupt(&mut rng, &s1, chars, edits);
        pairs.push(CorruptedPair { pair_id: format!("p{:06}", i + 1), s1, s2 });
    }
    Ok(PairCorpus {
        pairs,
        alphabet: alphabet.clone(),
        provenance: Provenance::Generated { seed },
    })
}

/// Samples `count` digit strings whose first digit follows Benford's law
/// — digit `d` with probability `log10(1 + 1/d)` — and whose remaining
/// digits are uniform. Reproducible from `seed`.
pub fn benford_sample(count: usize, length: usize, seed: u64) -> Result<Vec<String>, DatagenError> {
    if length == 0 {
        return Err(DatagenError::ZeroLength);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let mut s = String::with_capacity(length);
        let x: f64 = rng.gen();
        let mut first = 9u32; // cumulative masses telescope to exactly 1
        let mut cumulative = 0.0;
        for d in 1..=9u32 {
            cumulative += (1.0 + 1.0 / d as f64).log10();
            if x < cumulative {
                first = d;
                break;
            }
        }
        s.push(char::from_digit(first, 10).expect("digit"));
        for _ in 1..length {
            s.push(char::from_digit(rng.gen_range(0..10), 10).expect("digit"));
        }
        out.push(s);
    }
    Ok(out)
}

// ---- corpus files ----
//
// Both formats share one shape: a first line declaring the alphabet,
// then ordinary CSV with a fixed header.
//
//   #alphabet=0123456789
//   pair_id,s1,s2            (pair files)
//   record_id,value          (value files)

const PAIR_HEADER: &str = "pair_id,s1,s2";
const VALUE_HEADER: &str = "record_id,value";

fn alphabet_line(alphabet: &Alphabet) -> String {
    let symbols: String = alphabet.chars().iter().collect();
    format!("#alphabet={symbols}\n")
}

fn parse_alphabet_line(line: &str) -> Result<Alphabet, DatagenError> {
    let declared = line
        .strip_prefix("#alphabet=")
        .ok_or(DatagenError::MissingAlphabetLine)?
        .trim_end_matches(['\r', '\n']);
    Alphabet::from_chars(declared.chars()).map_err(DatagenError::BadAlphabet)
}

fn check_in_alphabet(row: usize, value: &str, alphabet: &Alphabet) -> Result<(), DatagenError> {
    match value.chars().find(|&c| !alphabet.contains(c)) {
        Some(ch) => Err(DatagenError::RowOutsideAlphabet { row, ch }),
        None => Ok(()),
    }
}

fn check_header(found: &csv::StringRecord, expected: &'static str) -> Result<(), DatagenError> {
    let found_joined = found.iter().collect::<Vec<_>>().join(",");
    if found_joined != expected {
        return Err(DatagenError::BadSchema { expected, found: found_joined });
    }
    Ok(())
}

/// Writes a pair corpus in the documented format.
pub fn write_pair_file<W: io::Write>(corpus: &PairCorpus, mut w: W) -> Result<(), DatagenError> {
    w.write_all(alphabet_line(&corpus.alphabet).as_bytes())?;
    let mut csv_writer = csv::Writer::from_writer(w);
    csv_writer.write_record(["pair_id", "s1", "s2"])?;
    for pair in &corpus.pairs {
        csv_writer.write_record([&pair.pair_id, &pair.s1, &pair.s2])?;
    }
    csv_writer.flush()?;
    Ok(())
}

/// Reads a pair corpus, validating the schema and that every character
/// sits inside the declared alphabet.
pub fn read_pair_file<R: io::Read>(reader: R, source: &str) -> Result<PairCorpus, DatagenError> {
    let mut buf = io::BufReader::new(reader);
    let mut first_line = String::new();
    io::BufRead::read_line(&mut buf, &mut first_line)?;
    let alphabet = parse_alphabet_line(&first_line)?;

    let mut csv_reader = csv::Reader::from_reader(buf);
    check_header(csv_reader.headers()?, PAIR_HEADER)?;
    let mut pairs = Vec::new();
    for (i, record) in csv_reader.records().enumerate() {
        let record = record?;
        let row = i + 1;
        let pair = CorruptedPair {
            pair_id: record.get(0).unwrap_or_default().to_string(),
            s1: record.get(1).unwrap_or_default().to_string(),
            s2: record.get(2).unwrap_or_default().to_string(),
        };
        check_in_alphabet(row, &pair.s1, &alphabet)?;
        check_in_alphabet(row, &pair.s2, &alphabet)?;
        pairs.push(pair);
    }
    Ok(PairCorpus { pairs, alphabet, provenance: Provenance::Imported { source: source.into() } })
}

/// Writes a value corpus — `(record_id, value)` rows — in the documented
/// format.
pub fn write_value_file<W: io::Write>(
    records: &[(String, String)],
    alphabet: &Alphabet,
    mut w: W,
) -> Result<(), DatagenError> {
    w.write_all(alphabet_line(alphabet).as_bytes())?;
    let mut csv_writer = csv::Writer::from_writer(w);
    csv_writer.write_record(["record_id", "value"])?;
    for (record_id, value) in records {
        csv_writer.write_record([record_id, value])?;
    }
    csv_writer.flush()?;
    Ok(())
}

/// Reads a value corpus, validating the schema and alphabet membership.
pub fn read_value_file<R: io::Read>(
    reader: R,
) -> Result<(Vec<(String, String)>, Alphabet), DatagenError> {
    let mut buf = io::BufReader::new(reader);
    let mut first_line = String::new();
    io::BufRead::read_line(&mut buf, &mut first_line)?;
    let alphabet = parse_alphabet_line(&first_line)?;

    let mut csv_reader = csv::Reader::from_reader(buf);
    check_header(csv_reader.headers()?, VALUE_HEADER)?;
    let mut records = Vec::new();
    for (i, record) in csv_reader.records().enumerate() {
        let record = record?;
        let record_id = record.get(0).unwrap_or_default().to_string();
        let value = record.get(1).unwrap_or_default().to_string();
        check_in_alphabet(i + 1, &value, &alphabet)?;
        records.push((record_id, value));
    }
    Ok((records, alphabet))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hamming(a: &str, b: &str) -> usize {
        assert_eq!(a.chars().count(), b.chars().count());
        a.chars().zip(b.chars()).filter(|(x, y)| x != y).count()
    }

    #[test]
    fn corrupted_pairs_respect_the_edit_contract() {
        let alphabet = Alphabet::digits();
        let corpus = gen_corrupted_pairs(500, &alphabet, 16..=16, 10, 7).expect("generate");
        assert_eq!(corpus.pairs.len(), 500);
        assert_eq!(corpus.provenance, Provenance::Generated { seed: 7 });
        let mut edit_counts = std::collections::BTreeSet::new();
        for pair in &corpus.pairs {
            assert_eq!(pair.s1.len(), 16);
            assert_eq!(pair.s2.len(), 16);
            let edits = hamming(&pair.s1, &pair.s2);
            assert!((1..=10).contains(&edits), "got {edits} edits");
            edit_counts.insert(edits);
            for c in pair.s1.chars().chain(pair.s2.chars()) {
                assert!(alphabet.contains(c));
            }
        }
        // Over 500 pairs the edit count should actually vary.
        assert!(edit_counts.len() > 5, "edit counts barely vary: {edit_counts:?}");
    }

    #[test]
    fn ranged_lengths_cover_the_whole_range() {
        let alphabet = Alphabet::lowercase_letters();
        let corpus = gen_corrupted_pairs(1000, &alphabet, 4..=12, 4, 99).expect("generate");
        let mut seen = std::collections::BTreeSet::new();
        for pair in &corpus.pairs {
            let len = pair.s1.chars().count();
            assert!((4..=12).contains(&len));
            assert_eq!(pair.s2.chars().count(), len);
            seen.insert(len);
        }
        assert_eq!(seen.len(), 9, "lengths missing from {seen:?}");
    }

    #[test]
    fn generation_is_seed_deterministic() {
        let alphabet = Alphabet::digits();
        let one = gen_corrupted_pairs(50, &alphabet, 8..=8, 3, 42).expect("one");
        let two = gen_corrupted_pairs(50, &alphabet, 8..=8, 3, 42).expect("two");
        assert_eq!(one, two);
        let other = gen_corrupted_pairs(50, &alphabet, 8..=8, 3, 43).expect("three");
        assert_ne!(one.pairs, other.pairs);
    }

    #[test]
    fn generator_preconditions_are_enforced() {
        let digits = Alphabet::digits();
        assert!(matches!(
            gen_corrupted_pairs(1, &digits, 8..=8, 0, 1),
            Err(DatagenError::ZeroMaxEdits)
        ));
        assert!(matches!(
            gen_corrupted_pairs(1, &digits, 4..=8, 5, 1),
            Err(DatagenError::MaxEditsExceedsLength { max_edits: 5, min_length: 4 })
        ));
        assert!(matches!(
            gen_corrupted_pairs(1, &digits, 8..=4, 2, 1),
            Err(DatagenError::EmptyLengthRange { .. })
        ));
        assert!(matches!(
            gen_corrupted_pairs(1, &digits, 0..=4, 2, 1),
            Err(DatagenError::ZeroLength)
        ));
        let unary = Alphabet::from_chars(['x']).expect("alphabet");
        assert!(matches!(
            gen_corrupted_pairs(1, &unary, 8..=8, 2, 1),
            Err(DatagenError::AlphabetTooSmall { size: 1 })
        ));
    }

    #[test]
    fn benford_first_digits_follow_the_law() {
        let sample = benford_sample(100_000, 8, 3).expect("sample");
        let mut counts = [0u64; 10];
        for s in &sample {
            assert_eq!(s.len(), 8);
            let first = s.chars().next().unwrap().to_digit(10).unwrap();
            counts[first as usize] += 1;
        }
        assert_eq!(counts[0], 0, "leading zeros must not occur");
        for d in 1..=9u32 {
            let expected = (1.0 + 1.0 / d as f64).log10();
            let observed = counts[d as usize] as f64 / sample.len() as f64;
            assert!(
                (observed - expected).abs() < 0.01,
                "digit {d}: observed {observed:.4}, law says {expected:.4}"
            );
        }
    }

    #[test]
    fn benford_edge_cases() {
        let singles = benford_sample(100, 1, 5).expect("singles");
        assert!(singles.iter().all(|s| s.len() == 1 && s != "0"));
        assert_eq!(benford_sample(10, 4, 11).unwrap(), benford_sample(10, 4, 11).unwrap());
        assert!(matches!(benford_sample(10, 0, 1), Err(DatagenError::ZeroLength)));
    }

    #[test]
    fn pair_files_round_trip() {
        let corpus =
            gen_corrupted_pairs(25, &Alphabet::alphanumeric(), 4..=9, 3, 123).expect("generate");
        let mut bytes = Vec::new();
        write_pair_file(&corpus, &mut bytes).expect("write");
        let text = String::from_utf8(bytes.clone()).expect("utf8");
        assert!(text.starts_with("#alphabet=0123456789abcdefghijklmnopqrstuvwxyz\n"));
        assert!(text.lines().nth(1) == Some("pair_id,s1,s2"));

        let back = read_pair_file(&bytes[..], "test.csv").expect("read");
        assert_eq!(back.pairs, corpus.pairs);
        assert_eq!(back.alphabet, corpus.alphabet);
        assert_eq!(back.provenance, Provenance::Imported { source: "test.csv".into() });
    }

    #[test]
    fn value_files_round_trip() {
        let records = vec![
            ("r1".to_string(), "83321".to_string()),
            ("r2".to_string(), "33327".to_string()),
        ];
        let mut bytes = Vec::new();
        write_value_file(&records, &Alphabet::digits(), &mut bytes).expect("write");
        let (back, alphabet) = read_value_file(&bytes[..]).expect("read");
        assert_eq!(back, records);
        assert_eq!(alphabet, Alphabet::digits());
    }

    #[test]
    fn corrupt_files_are_rejected() {
        assert!(matches!(
            read_pair_file(&b"pair_id,s1,s2\np1,12,13\n"[..], "x"),
            Err(DatagenError::MissingAlphabetLine)
        ));
        assert!(matches!(
            read_pair_file(&b"#alphabet=0123456789\nwrong,header,row\np1,12,13\n"[..], "x"),
            Err(DatagenError::BadSchema { .. })
        ));
        assert!(matches!(
            read_pair_file(&b"#alphabet=01\npair_id,s1,s2\np1,0a,01\n"[..], "x"),
            Err(DatagenError::RowOutsideAlphabet { row: 1, ch: 'a' })
        ));
        assert!(matches!(
            read_value_file(&b"#alphabet=\nrecord_id,value\n"[..]),
            Err(DatagenError::BadAlphabet(EncodeError::EmptyAlphabet))
        ));
        // Field-count errors surface as CSV errors.
        assert!(matches!(
            read_pair_file(&b"#alphabet=01\npair_id,s1,s2\np1,01\n"[..], "x"),
            Err(DatagenError::Csv(_))
        ));
    }
}
