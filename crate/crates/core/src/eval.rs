//! Evaluation harness: similarity scatter data, first-position frequency
//! histograms with a flatness statistic, collision-probability
//! diagnostics, the frequency-alignment attack, bootstrap confidence
//! intervals, and timing runs. All table output is CSV.

use std::collections::BTreeMap;
use std::io;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::baselines::{
    bloom_encode, dice_filters, dice_sets, jaccard_sets, jaccard_sketches, qgram_set, BitArray,
    BloomParams, TabHashParams, TabHashSketch, TabSketcher,
};
use crate::datagen::PairCorpus;
use crate::encoding::{
    analyze_first_chars_encoded, analyze_first_chars_plain, encode_tree, first_char_encode,
    prefix_residue, EncodeError, EncodedSuffixTree, EncodingParams, FirstCharParams, Slot,
};
use crate::matching::{match_pair, sim_lcs, sim_lcs_plain, Engine, DEFAULT_SENTINEL};
use crate::protocol::EncodedDatabase;
use crate::suffix_tree::{build_suffix_tree, SuffixTree};

// ---- errors ----

/// Errors raised by the evaluation harness.
#[derive(Debug)]
pub enum EvalError {
    /// The method and its parameters disagree.
    MethodParams { method: &'static str, detail: String },
    /// One corpus pair could not be processed.
    Pair { pair_id: String, detail: String },
    /// An input failed a precondition.
    Input(String),
    /// Underlying I/O failure.
    Io(io::Error),
    /// CSV-level failure.
    Csv(csv::Error),
}

impl std::fmt::Display for EvalError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EvalError::MethodParams { method, detail } => {
                write!(f, "bad parameters for method {method}: {detail}")
            }
            EvalError::Pair { pair_id, detail } => write!(f, "pair {pair_id}: {detail}"),
            EvalError::Input(detail) => write!(f, "{detail}"),
            EvalError::Io(e) => write!(f, "I/O error: {e}"),
            EvalError::Csv(e) => write!(f, "CSV error: {e}"),
        }
    }
}

impl std::error::Error for EvalError {}

impl From<io::Error> for EvalError {
    fn from(e: io::Error) -> Self {
        EvalError::Io(e)
    }
}

impl From<csv::Error> for EvalError {
    fn from(e: csv::Error) -> Self {
        EvalError::Csv(e)
    }
}

// ---- methods ----

/// One comparison method with everything it needs. The plaintext-side
/// similarity is the method's own reference: longest-common-substring
/// similarity for the suffix methods, set Dice for Bloom filters, set
/// Jaccard for tabulation sketches.
#[derive(Debug, Clone)]
pub enum MethodParams {
    /// Chained suffix-tree encoding without hardening.
    SuffixBasic(EncodingParams),
    /// Chained suffix-tree encoding with first-character hardening.
    SuffixFirstChar(EncodingParams),
    /// Bloom filters over q-gram sets.
    Bloom { params: BloomParams, gram_len: usize },
    /// Tabulation min-hash sketches over q-gram sets.
    TabHash { params: TabHashParams, gram_len: usize },
}

impl MethodParams {
    /// Stable method token used in CSV output and CLI flags.
    pub fn method_name(&self) -> &'static str {
        match self {
            MethodParams::SuffixBasic(_) => "suffix_basic",
            MethodParams::SuffixFirstChar(_) => "suffix_firstchar",
            MethodParams::Bloom { .. } => "bloom",
            MethodParams::TabHash { .. } => "tabhash",
        }
    }

    fn validate(&self) -> Result<(), EvalError> {
        let method = self.method_name();
        let bad = |detail: String| EvalError::MethodParams { method, detail };
        match self {
            MethodParams::SuffixBasic(p) => {
                if p.first_char.is_some() {
                    return Err(bad("first-character hardening must be disabled".into()));
                }
                p.validate().map_err(|e| bad(e.to_string()))
            }
            MethodParams::SuffixFirstChar(p) => {
                if p.first_char.is_none() {
                    return Err(bad("first-character hardening must be enabled".into()));
                }
                p.validate().map_err(|e| bad(e.to_string()))
            }
            MethodParams::Bloom { params, gram_len } => {
                if *gram_len == 0 {
                    return Err(bad("gram length must be at least 1".into()));
                }
                params.validate().map_err(|e| bad(e.to_string()))
            }
            MethodParams::TabHash { params, gram_len } => {
                if *gram_len == 0 {
                    return Err(bad("gram length must be at least 1".into()));
                }
                params.validate().map_err(|e| bad(e.to_string()))
            }
        }
    }
}

// ---- scatter evaluation ----

/// One scatter point: the same pair measured before and after encoding.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatterRow {
    /// The pair this row measures.
    pub pair_id: String,
    /// Similarity computed on plaintext.
    pub plain_sim: f64,
    /// Similarity computed on encodings only.
    pub encoded_sim: f64,
}

fn suffix_encode(
    value: &str,
    params: &EncodingParams,
) -> Result<(SuffixTree, EncodedSuffixTree), String> {
    let tree = build_suffix_tree(value).map_err(|e| e.to_string())?;
    let encoded = encode_tree(&tree, params).map_err(|e| e.to_string())?;
    let encoded = if params.first_char.is_some() {
        first_char_encode(&encoded, &tree, params).map_err(|e| e.to_string())?
    } else {
        encoded
    };
    Ok((tree, encoded))
}

fn scatter_suffix(corpus: &PairCorpus, params: &EncodingParams) -> Result<Vec<ScatterRow>, EvalError> {
    let m = params.min_suffix_len;
    let engine = Engine::default();
    corpus
        .pairs
        .par_iter()
        .map(|pair| {
            let fail = |detail: String| EvalError::Pair { pair_id: pair.pair_id.clone(), detail };
            let (t1, e1) = suffix_encode(&pair.s1, params).map_err(fail)?;
            let (t2, e2) = suffix_encode(&pair.s2, params).map_err(
                |detail| EvalError::Pair { pair_id: pair.pair_id.clone(), detail },
            )?;
            Ok(ScatterRow {
                pair_id: pair.pair_id.clone(),
                plain_sim: sim_lcs_plain(&t1, &t2, m, engine),
                encoded_sim: sim_lcs(&e1, &e2, m, engine),
            })
        })
        .collect()
}

fn scatter_bloom(
    corpus: &PairCorpus,
    params: &BloomParams,
    gram_len: usize,
) -> Vec<ScatterRow> {
    corpus
        .pairs
        .par_iter()
        .map(|pair| {
            let a = qgram_set(&pair.s1, gram_len);
            let b = qgram_set(&pair.s2, gram_len);
            ScatterRow {
                pair_id: pair.pair_id.clone(),
                plain_sim: dice_sets(&a, &b),
                encoded_sim: dice_filters(&bloom_encode(&a, params), &bloom_encode(&b, params)),
            }
        })
        .collect()
}

fn scatter_tabhash(
    corpus: &PairCorpus,
    params: &TabHashParams,
    gram_len: usize,
) -> Vec<ScatterRow> {
    let sketcher = TabSketcher::new(params);
    corpus
        .pairs
        .par_iter()
        .map(|pair| {
            let a = qgram_set(&pair.s1, gram_len);
            let b = qgram_set(&pair.s2, gram_len);
            ScatterRow {
                pair_id: pair.pair_id.clone(),
                plain_sim: jaccard_sets(&a, &b),
                encoded_sim: jaccard_sketches(&sketcher.encode(&a), &sketcher.encode(&b)),
            }
        })
        .collect()
}

/// Measures every corpus pair with one method, plaintext-side and
/// encoded-side, in corpus order.
pub fn eval_scatter(
    corpus: &PairCorpus,
    method: &MethodParams,
) -> Result<Vec<ScatterRow>, EvalError> {
    method.validate()?;
    match method {
        MethodParams::SuffixBasic(p) | MethodParams::SuffixFirstChar(p) => {
            scatter_suffix(corpus, p)
        }
        MethodParams::Bloom { params, gram_len } => Ok(scatter_bloom(corpus, params, *gram_len)),
        MethodParams::TabHash { params, gram_len } => {
            Ok(scatter_tabhash(corpus, params, *gram_len))
        }
    }
}

/// Writes scatter rows as `pair_id,plain_sim,encoded_sim` with six
/// decimal places; byte-stable for a given input.
pub fn write_scatter_csv<W: io::Write>(rows: &[ScatterRow], w: W) -> Result<(), EvalError> {
    let mut csv_writer = csv::Writer::from_writer(w);
    csv_writer.write_record(["pair_id", "plain_sim", "encoded_sim"])?;
    for row in rows {
        csv_writer.write_record([
            row.pair_id.as_str(),
            &format!("{:.6}", row.plain_sim),
            &format!("{:.6}", row.encoded_sim),
        ])?;
    }
    csv_writer.flush()?;
    Ok(())
}

// ---- first-position frequency evaluation ----

/// Chi-squared statistic of observed counts against the uniform
/// distribution over all bins (zero-count bins included). Zero when
/// there are no observations or no bins.
pub fn chi2_to_uniform(counts: &[u64]) -> f64 {
    let bins = counts.len();
    let total: u64 = counts.iter().sum();
    if bins == 0 || total == 0 {
        return 0.0;
    }
    let expected = total as f64 / bins as f64;
    counts
        .iter()
        .map(|&observed| {
            let diff = observed as f64 - expected;
            diff * diff / expected
        })
        .sum()
}

/// One labeled histogram with its flatness statistic.
#[derive(Debug, Clone, PartialEq)]
pub struct FreqHistogram {
    /// Series label: `plain` or `k=<prefix length>`.
    pub series: String,
    /// All bins in label order, zero-count bins included.
    pub bins: Vec<(String, u64)>,
    /// Chi-squared distance of the counts from uniform.
    pub chi2_to_uniform: f64,
}

impl FreqHistogram {
    fn new(series: String, bins: Vec<(String, u64)>) -> Self {
        let counts: Vec<u64> = bins.iter().map(|&(_, c)| c).collect();
        let chi2 = chi2_to_uniform(&counts);
        FreqHistogram { series, bins, chi2_to_uniform: chi2 }
    }
}

/// First-position distributions: the plaintext first-character histogram
/// and one residue histogram per requested prefix length.
#[derive(Debug, Clone, PartialEq)]
pub struct FirstCharFreqReport {
    /// First characters of the plaintext values, one bin per alphabet
    /// symbol.
    pub plain: FreqHistogram,
    /// Residue histograms after hardening, one per prefix length, each
    /// with one bin per residue class.
    pub hardened: Vec<FreqHistogram>,
}

/// Measures how the first-position value distribution flattens as the
/// hardening prefix length grows. `base` supplies salts, hash, alphabet,
/// and minimum suffix length; its own hardening setting is ignored and
/// replaced per `k` with the given modulus.
pub fn eval_first_char_freq(
    values: &[String],
    k_values: &[usize],
    base: &EncodingParams,
    modulus: u64,
) -> Result<FirstCharFreqReport, EvalError> {
    if values.is_empty() {
        return Err(EvalError::Input("no values to analyze".into()));
    }
    let plain_counts = analyze_first_chars_plain(values.iter().map(String::as_str))
        .map_err(|e| EvalError::Input(e.to_string()))?;
    let plain_bins: Vec<(String, u64)> = base
        .alphabet
        .chars()
        .iter()
        .map(|&c| (c.to_string(), plain_counts.get(&c).copied().unwrap_or(0)))
        .collect();
    let plain = FreqHistogram::new("plain".into(), plain_bins);

    let mut hardened = Vec::with_capacity(k_values.len());
    for &k in k_values {
        let mut params = base.clone();
        params.first_char = Some(FirstCharParams { prefix_len: k, modulus });
        params.min_suffix_len = params.min_suffix_len.max(k);
        params.validate().map_err(|e| {
            EvalError::MethodParams { method: "suffix_firstchar", detail: e.to_string() }
        })?;
        // Validate every record exactly as the encoder would.
        for v in values {
            for (position, c) in v.chars().enumerate() {
                if !params.alphabet.contains(c) {
                    return Err(EvalError::Pair {
                        pair_id: v.clone(),
                        detail: EncodeError::CharOutsideAlphabet { ch: c, position }.to_string(),
                    });
                }
            }
        }
        // The histogram reads only the first slot of each record's longest
        // suffix. After hardening that slot is the residue of the record's
        // leading `k` characters — the chain digests behind it never enter
        // the count — so hash just that prefix per record.
        let mut counts = vec![0u64; modulus as usize];
        for v in values {
            let chars: Vec<char> = v.chars().collect();
            if chars.len() < params.min_suffix_len {
                return Err(EvalError::Input(EncodeError::EmptyInput.to_string()));
            }
            let prefix: String = chars[..k].iter().collect();
            counts[prefix_residue(&prefix, &params, modulus) as usize] += 1;
        }
        let bins: Vec<(String, u64)> =
            counts.iter().enumerate().map(|(r, &c)| (r.to_string(), c)).collect();
        hardened.push(FreqHistogram::new(format!("k={k}"), bins));
    }
    Ok(FirstCharFreqReport { plain, hardened })
}

/// Writes all histograms as `series,bin,count` rows, plain first.
pub fn write_freq_histogram_csv<W: io::Write>(
    report: &FirstCharFreqReport,
    w: W,
) -> Result<(), EvalError> {
    let mut csv_writer = csv::Writer::from_writer(w);
    csv_writer.write_record(["series", "bin", "count"])?;
    for hist in std::iter::once(&report.plain).chain(&report.hardened) {
        for (bin, count) in &hist.bins {
            csv_writer.write_record([&hist.series, bin, &count.to_string()])?;
        }
    }
    csv_writer.flush()?;
    Ok(())
}

/// Writes one `series,chi2_to_uniform` row per histogram, plain first.
pub fn write_freq_chi2_csv<W: io::Write>(
    report: &FirstCharFreqReport,
    w: W,
) -> Result<(), EvalError> {
    let mut csv_writer = csv::Writer::from_writer(w);
    csv_writer.write_record(["series", "chi2_to_uniform"])?;
    for hist in std::iter::once(&report.plain).chain(&report.hardened) {
        csv_writer.write_record([&hist.series, &format!("{:.6}", hist.chi2_to_uniform)])?;
    }
    csv_writer.flush()?;
    Ok(())
}

// ---- collision-probability diagnostics ----

/// Numeric evaluations of the two collision upper bounds. Diagnostics
/// only: these talk about adversarial hash collisions, not about
/// anything the test suite should tolerate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollisionBounds {
    /// Bound on an incorrect common-substring result of length `l` under
    /// basic encoding: `2^-l * (|Σ|^l / 2^128)^(2l)`.
    pub basic: f64,
    /// Base-2 logarithm of `basic`, exact even when the probability
    /// underflows to zero.
    pub basic_log2: f64,
    /// Bound under first-character hardening:
    /// `hc * 2^-(k-1) * (|Σ|^k / 2^128)^(2(k-1))`.
    pub first_char: f64,
    /// Base-2 logarithm of `first_char`.
    pub first_char_log2: f64,
    /// `hc`: the probability that hashing all `|Σ|^k` prefixes into `n`
    /// residues collides at all — exactly 1 by pigeonhole when
    /// `|Σ|^k > n`, else the birthday approximation.
    pub prefix_residue_collision: f64,
}

/// Evaluates both collision bounds for substring length `l`, alphabet
/// size `sigma_size`, prefix length `k`, and residue modulus `n`.
pub fn collision_bound(
    l: usize,
    sigma_size: usize,
    k: usize,
    n: u64,
) -> Result<CollisionBounds, EvalError> {
    if l == 0 {
        return Err(EvalError::Input("substring length must be at least 1".into()));
    }
    if sigma_size == 0 {
        return Err(EvalError::Input("alphabet size must be at least 1".into()));
    }
    if k < 2 {
        return Err(EvalError::Input("prefix length must be at least 2".into()));
    }
    if n == 0 {
        return Err(EvalError::Input("modulus must be at least 1".into()));
    }
    let log2_sigma = (sigma_size as f64).log2();
    let l = l as f64;
    let basic_log2 = -l + 2.0 * l * (l * log2_sigma - 128.0);

    let prefix_bits = k as f64 * log2_sigma; // log2(|Σ|^k)
    let hc = if prefix_bits > (n as f64).log2() {
        1.0
    } else {
        let w = prefix_bits.exp2();
        1.0 - (-(w * (w - 1.0)) / (2.0 * n as f64)).exp()
    };
    let first_char_log2 = hc.log2() - (k as f64 - 1.0) + 2.0 * (k as f64 - 1.0) * (prefix_bits - 128.0);

    Ok(CollisionBounds {
        basic: basic_log2.exp2(),
        basic_log2,
        first_char: first_char_log2.exp2(),
        first_char_log2,
        prefix_residue_collision: hc,
    })
}

// ---- frequency-alignment attack ----

/// The attacker's guess: each first-position encoding mapped to the
/// plaintext character it most plausibly stands for.
#[derive(Debug, Clone, PartialEq)]
pub struct AttackGuess {
    /// Encoding-to-character guesses, most frequent encoding first.
    pub mapping: Vec<(Slot, char)>,
}

/// Mounts the frequency-alignment attack: rank the first-position
/// encodings of the database by frequency, rank the first characters of
/// a reference corpus with a similar distribution, and align the ranks.
/// Records too short to encode are ignored.
pub fn frequency_attack(
    edb: &EncodedDatabase,
    reference_values: &[String],
) -> Result<AttackGuess, EvalError> {
    let analyzable: Vec<&EncodedSuffixTree> = edb
        .records
        .iter()
        .map(|r| &r.tree)
        .filter(|t| !t.suffixes.is_empty())
        .collect();
    if analyzable.is_empty() {
        return Err(EvalError::Input("no analyzable records in the encoded database".into()));
    }
    let encoded_counts = analyze_first_chars_encoded(analyzable.into_iter())
        .map_err(|e| EvalError::Input(e.to_string()))?;
    let reference_counts = analyze_first_chars_plain(reference_values.iter().map(String::as_str))
        .map_err(|e| EvalError::Input(format!("reference corpus: {e}")))?;

    let mut encoded_ranked: Vec<(Slot, u64)> = encoded_counts.into_iter().collect();
    encoded_ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let mut reference_ranked: Vec<(char, u64)> = reference_counts.into_iter().collect();
    reference_ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));

    let mapping = encoded_ranked
        .into_iter()
        .zip(reference_ranked)
        .map(|((slot, _), (ch, _))| (slot, ch))
        .collect();
    Ok(AttackGuess { mapping })
}

/// Scores a guess against ground truth: the fraction of analyzable
/// records whose guessed first character is the true one. Truth maps
/// record ids to true first characters and lives on the evaluation side
/// only — a real attacker never sees it.
pub fn score_attack(
    guess: &AttackGuess,
    edb: &EncodedDatabase,
    truth: &BTreeMap<String, char>,
) -> Result<f64, EvalError> {
    let mapping: BTreeMap<&Slot, char> = guess.mapping.iter().map(|(s, c)| (s, *c)).collect();
    let mut scored = 0u64;
    let mut hits = 0u64;
    for record in &edb.records {
        let Some(longest) = record.tree.longest_suffix() else { continue };
        let truth_char = truth.get(&record.record_id).copied().ok_or_else(|| {
            EvalError::Input(format!("no ground truth for record {:?}", record.record_id))
        })?;
        scored += 1;
        if mapping.get(&longest.slots[0]) == Some(&truth_char) {
            hits += 1;
        }
    }
    if scored == 0 {
        return Err(EvalError::Input("no analyzable records to score".into()));
    }
    Ok(hits as f64 / scored as f64)
}

// ---- bootstrap confidence interval ----

/// A mean with a bootstrap percentile confidence interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanCi {
    /// Sample mean.
    pub mean: f64,
    /// Lower 95% bound.
    pub lo: f64,
    /// Upper 95% bound.
    pub hi: f64,
}

/// Bootstraps a 95% percentile confidence interval for the mean:
/// `iterations` resamples with replacement, seeded for reproducibility.
pub fn bootstrap_mean_ci(
    samples: &[f64],
    iterations: usize,
    seed: u64,
) -> Result<MeanCi, EvalError> {
    if samples.is_empty() {
        return Err(EvalError::Input("cannot bootstrap an empty sample".into()));
    }
    if iterations < 100 {
        return Err(EvalError::Input("need at least 100 bootstrap iterations".into()));
    }
    let n = samples.len();
    let mean = samples.iter().sum::<f64>() / n as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut means: Vec<f64> = (0..iterations)
        .map(|_| (0..n).map(|_| samples[rng.gen_range(0..n)]).sum::<f64>() / n as f64)
        .collect();
    means.sort_by(f64::total_cmp);
    let lo_idx = (iterations as f64 * 0.025).floor() as usize;
    let hi_idx = ((iterations as f64 * 0.975).ceil() as usize).min(iterations) - 1;
    Ok(MeanCi { mean, lo: means[lo_idx], hi: means[hi_idx] })
}

// ---- timing runs ----

/// Where a timing run happened; recorded alongside the numbers since
/// they mean nothing without it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MachineDescriptor {
    /// Operating system, e.g. `linux`.
    pub os: String,
    /// CPU architecture, e.g. `x86_64`.
    pub arch: String,
    /// Logical CPU count visible to the process.
    pub logical_cpus: usize,
}

impl MachineDescriptor {
    /// Reads the descriptor for the current machine.
    pub fn detect() -> Self {
        MachineDescriptor {
            os: std::env::consts::OS.to_string(),
            arch: std::env::consts::ARCH.to_string(),
            logical_cpus: std::thread::available_parallelism().map_or(1, |p| p.get()),
        }
    }

    /// Compact one-token form for CSV cells.
    pub fn label(&self) -> String {
        format!("{}-{}-{}cpu", self.os, self.arch, self.logical_cpus)
    }
}

/// Average per-item wall-clock times for one method.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    /// Method token.
    pub method: String,
    /// Average time to encode one string, in nanoseconds.
    pub encode_ns_per_string: f64,
    /// Average time to compare one pair of encodings, in nanoseconds.
    pub match_ns_per_pair: f64,
    /// Measured repetitions (after one warm-up pass).
    pub repetitions: usize,
}

/// A complete timing report.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    /// Machine the numbers were taken on.
    pub machine: MachineDescriptor,
    /// One row per method, in request order.
    pub rows: Vec<BenchRow>,
}

enum PreparedMethod {
    Suffix { params: EncodingParams, encoded: Vec<(EncodedSuffixTree, EncodedSuffixTree)> },
    Bloom { encoded: Vec<(BitArray, BitArray)> },
    TabHash { encoded: Vec<(TabHashSketch, TabHashSketch)> },
}

/// Times encoding and matching for each method over the corpus:
/// single-threaded, one untimed warm-up pass, then at least three
/// measured repetitions averaged per string and per pair.
pub fn bench(
    corpus: &PairCorpus,
    methods: &[MethodParams],
    repetitions: usize,
) -> Result<BenchReport, EvalError> {
    if repetitions < 3 {
        return Err(EvalError::Input("need at least 3 timing repetitions".into()));
    }
    if corpus.pairs.is_empty() {
        return Err(EvalError::Input("cannot time an empty corpus".into()));
    }
    let pair_count = corpus.pairs.len();
    let string_count = 2 * pair_count;
    let mut rows = Vec::with_capacity(methods.len());

    for method in methods {
        method.validate()?;

        // Warm-up: one full untimed encode pass, keeping the encodings
        // for the matching phase.
        let prepared = prepare_bench(corpus, method)?;

        let mut encode_total = std::time::Duration::ZERO;
        for _ in 0..repetitions {
            let start = Instant::now();
            prepare_bench(corpus, method)?;
            encode_total += start.elapsed();
        }

        let mut match_total = std::time::Duration::ZERO;
        for _ in 0..repetitions {
            let start = Instant::now();
            let mut checksum = 0.0f64;
            match &prepared {
                PreparedMethod::Suffix { params, encoded } => {
                    for (a, b) in encoded {
                        let outcome = match_pair(
                            a,
                            b,
                            params.min_suffix_len,
                            DEFAULT_SENTINEL,
                            Engine::default(),
                        )
                        .map_err(|e| EvalError::Input(e.to_string()))?;
                        checksum += outcome.sim;
                    }
                }
                PreparedMethod::Bloom { encoded, .. } => {
                    for (a, b) in encoded {
                        checksum += dice_filters(a, b);
                    }
                }
                PreparedMethod::TabHash { encoded, .. } => {
                    for (a, b) in encoded {
                        checksum += jaccard_sketches(a, b);
                    }
                }
            }
            std::hint::black_box(checksum);
            match_total += start.elapsed();
        }

        rows.push(BenchRow {
            method: method.method_name().to_string(),
            encode_ns_per_string: encode_total.as_nanos() as f64
                / (repetitions * string_count) as f64,
            match_ns_per_pair: match_total.as_nanos() as f64 / (repetitions * pair_count) as f64,
            repetitions,
        });
    }
    Ok(BenchReport { machine: MachineDescriptor::detect(), rows })
}

fn prepare_bench(corpus: &PairCorpus, method: &MethodParams) -> Result<PreparedMethod, EvalError> {
    match method {
        MethodParams::SuffixBasic(params) | MethodParams::SuffixFirstChar(params) => {
            let mut encoded = Vec::with_capacity(corpus.pairs.len());
            for pair in &corpus.pairs {
                let fail =
                    |detail: String| EvalError::Pair { pair_id: pair.pair_id.clone(), detail };
                let (_, e1) = suffix_encode(&pair.s1, params).map_err(fail)?;
                let (_, e2) = suffix_encode(&pair.s2, params)
                    .map_err(|d| EvalError::Pair { pair_id: pair.pair_id.clone(), detail: d })?;
                encoded.push((e1, e2));
            }
            Ok(PreparedMethod::Suffix { params: params.clone(), encoded })
        }
        MethodParams::Bloom { params, gram_len } => {
            let encoded = corpus
                .pairs
                .iter()
                .map(|pair| {
                    (
                        bloom_encode(&qgram_set(&pair.s1, *gram_len), params),
                        bloom_encode(&qgram_set(&pair.s2, *gram_len), params),
                    )
                })
                .collect();
            Ok(PreparedMethod::Bloom { encoded })
        }
        MethodParams::TabHash { params, gram_len } => {
            let sketcher = TabSketcher::new(params);
            let encoded = corpus
                .pairs
                .iter()
                .map(|pair| {
                    (
                        sketcher.encode(&qgram_set(&pair.s1, *gram_len)),
                        sketcher.encode(&qgram_set(&pair.s2, *gram_len)),
                    )
                })
                .collect();
            Ok(PreparedMethod::TabHash { encoded })
        }
    }
}

/// Writes timing rows as
/// `method,encode_ns_per_string,match_ns_per_pair,repetitions,machine`.
pub fn write_bench_csv<W: io::Write>(report: &BenchReport, w: W) -> Result<(), EvalError> {
    let mut csv_writer = csv::Writer::from_writer(w);
    csv_writer.write_record([
        "method",
        "encode_ns_per_string",
        "match_ns_per_pair",
        "repetitions",
        "machine",
    ])?;
    let machine = report.machine.label();
    for row in &report.rows {
        csv_writer.write_record([
            row.method.as_str(),
            &format!("{:.1}", row.encode_ns_per_string),
            &format!("{:.1}", row.match_ns_per_pair),
            &row.repetitions.to_string(),
            &machine,
        ])?;
    }
    csv_writer.flush()?;
    Ok(())
}
