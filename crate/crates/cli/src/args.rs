//! Command-line surface. Every flag here can also be supplied through a
//! TOML config file (`--config`); explicit flags win over config values.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ppsm::encoding::HashId;

#[derive(Parser)]
#[command(
    name = "ppsm",
    version,
    about = "Privacy-preserving string matching over chained-hash suffix trees",
    long_about = "Privacy-preserving string matching over chained-hash suffix trees.\n\
                  Data owners encode value files into encoded databases; a linkage\n\
                  unit compares encoded databases without ever seeing plaintext.\n\
                  Secrets are only ever read from files or environment variables\n\
                  (PPSM_SALT, PPSM_FIRST_SALT) and are never printed."
)]
pub struct Cli {
    /// TOML file supplying defaults for this subcommand's flags
    /// (keys are flag names; explicit flags win)
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Generate synthetic corpora
    Gen(GenArgs),
    /// Encode a value file into an encoded database (data-owner step)
    Encode(EncodeArgs),
    /// Compare two encoded databases and report matching pairs (linkage-unit step)
    Match(MatchArgs),
    /// Plain-versus-encoded similarity scatter for one method
    EvalScatter(EvalScatterArgs),
    /// First-position frequency histograms with a flatness statistic
    EvalFreq(EvalFreqArgs),
    /// Frequency-alignment attack against an encoded database
    Attack(AttackArgs),
    /// Per-item encode and match timings
    Bench(BenchArgs),
}

/// Chain hash function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum HashChoice {
    Sha256,
    Sha512,
}

impl From<HashChoice> for HashId {
    fn from(h: HashChoice) -> HashId {
        match h {
            HashChoice::Sha256 => HashId::Sha256,
            HashChoice::Sha512 => HashId::Sha512,
        }
    }
}

#[derive(Args)]
pub struct GenArgs {
    #[command(subcommand)]
    pub kind: GenKind,
}

#[derive(Subcommand)]
pub enum GenKind {
    /// Corrupted string pairs: s2 is s1 with 1..=max-edits substitutions
    Pairs(GenPairsArgs),
    /// Benford-skewed digit strings, written as a value file
    Benford(GenBenfordArgs),
}

#[derive(Args)]
pub struct GenPairsArgs {
    /// Number of pairs
    #[arg(long)]
    pub count: usize,

    /// Alphabet: digits | letters | alphanumeric | literal symbols
    #[arg(long, default_value = "digits")]
    pub alphabet: String,

    /// Minimum string length
    #[arg(long)]
    pub min_length: usize,

    /// Maximum string length (defaults to --min-length)
    #[arg(long)]
    pub max_length: Option<usize>,

    /// Maximum substitutions per pair (at least one is always applied)
    #[arg(long, default_value_t = 4)]
    pub max_edits: usize,

    /// RNG seed
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Output pair file (stdout when omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct GenBenfordArgs {
    /// Number of strings
    #[arg(long)]
    pub count: usize,

    /// Length of every string
    #[arg(long, default_value_t = 8)]
    pub length: usize,

    /// RNG seed
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Output value file (stdout when omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct EncodeArgs {
    /// Input value file: an alphabet header line, then record_id,value rows
    pub input: PathBuf,

    /// Output encoded database
    #[arg(long)]
    pub out: PathBuf,

    /// File holding the chain salt (alternative: PPSM_SALT)
    #[arg(long, value_name = "FILE")]
    pub salt_file: Option<PathBuf>,

    /// File holding the first-character salt (alternative: PPSM_FIRST_SALT)
    #[arg(long, value_name = "FILE")]
    pub first_salt_file: Option<PathBuf>,

    /// Minimum retained suffix length m
    #[arg(long, default_value_t = 2)]
    pub min_len: usize,

    /// Enable first-character hardening with prefix length K (bare flag
    /// means K=2; raises --min-len to K when K is larger)
    #[arg(long, num_args = 0..=1, default_missing_value = "2", value_name = "K")]
    pub first_char_k: Option<usize>,

    /// Residue modulus n (defaults to the alphabet size; needs --first-char-k)
    #[arg(long)]
    pub modulus: Option<u64>,

    /// Chain hash function
    #[arg(long, value_enum, default_value_t = HashChoice::Sha256)]
    pub hash: HashChoice,

    /// Override the alphabet declared in the input file
    #[arg(long)]
    pub alphabet: Option<String>,

    /// Keep going when a record fails to encode, reporting it on stderr
    #[arg(long)]
    pub skip_bad_records: bool,
}

#[derive(Args)]
pub struct MatchArgs {
    /// First encoded database
    pub db_a: PathBuf,

    /// Second encoded database
    pub db_b: PathBuf,

    /// Minimum common-substring length for a match
    #[arg(long, default_value_t = 2)]
    pub min_len: usize,

    /// Additionally require similarity >= this threshold (0..=1)
    #[arg(long)]
    pub threshold: Option<f64>,

    /// Common-suffix sentinel; must exceed every source string length
    #[arg(long, default_value_t = 999)]
    pub sentinel: u64,

    /// Worker threads for pair comparison (default: one per CPU)
    #[arg(long)]
    pub workers: Option<usize>,

    /// Output CSV (stdout when omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct EvalScatterArgs {
    /// Input pair file
    pub pairs: PathBuf,

    /// Method: suffix_basic | suffix_firstchar | bloom | tabhash
    #[arg(long)]
    pub method: String,

    /// File holding the chain salt / Bloom secret (alternative: PPSM_SALT)
    #[arg(long, value_name = "FILE")]
    pub salt_file: Option<PathBuf>,

    /// File holding the first-character salt (alternative: PPSM_FIRST_SALT)
    #[arg(long, value_name = "FILE")]
    pub first_salt_file: Option<PathBuf>,

    /// Minimum retained suffix length m (suffix methods)
    #[arg(long, default_value_t = 2)]
    pub min_len: usize,

    /// Hardening prefix length K for suffix_firstchar (bare flag means K=2)
    #[arg(long, num_args = 0..=1, default_missing_value = "2", value_name = "K")]
    pub first_char_k: Option<usize>,

    /// Residue modulus n (defaults to the alphabet size)
    #[arg(long)]
    pub modulus: Option<u64>,

    /// Chain hash function (suffix methods)
    #[arg(long, value_enum, default_value_t = HashChoice::Sha256)]
    pub hash: HashChoice,

    /// q-gram length (bloom and tabhash)
    #[arg(long, default_value_t = 2)]
    pub gram_len: usize,

    /// Bloom filter hash count
    #[arg(long, default_value_t = 46)]
    pub num_hashes: usize,

    /// Tabulation key seed (tabhash)
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Output CSV (stdout when omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct EvalFreqArgs {
    /// Input value file
    pub values: PathBuf,

    /// Hardening prefix lengths to evaluate, comma-separated
    #[arg(long, default_value = "2,3,4,5")]
    pub ks: String,

    /// Residue modulus n (defaults to the alphabet size)
    #[arg(long)]
    pub modulus: Option<u64>,

    /// File holding the chain salt (alternative: PPSM_SALT)
    #[arg(long, value_name = "FILE")]
    pub salt_file: Option<PathBuf>,

    /// File holding the first-character salt (alternative: PPSM_FIRST_SALT)
    #[arg(long, value_name = "FILE")]
    pub first_salt_file: Option<PathBuf>,

    /// Minimum retained suffix length m
    #[arg(long, default_value_t = 2)]
    pub min_len: usize,

    /// Chain hash function
    #[arg(long, value_enum, default_value_t = HashChoice::Sha256)]
    pub hash: HashChoice,

    /// Histogram CSV output (stdout when omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Also write a series,chi2_to_uniform summary CSV here
    #[arg(long)]
    pub chi2_out: Option<PathBuf>,
}

#[derive(Args)]
pub struct AttackArgs {
    /// Encoded database under attack
    pub db: PathBuf,

    /// Plaintext value file with a first-character distribution similar
    /// to the attacked data
    #[arg(long)]
    pub reference: PathBuf,

    /// Ground-truth value file; prints top-1 accuracy to stdout
    #[arg(long)]
    pub truth: Option<PathBuf>,

    /// Guessed-mapping CSV (stdout when omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct BenchArgs {
    /// Input pair file
    pub pairs: PathBuf,

    /// Comma-separated method tokens to time
    #[arg(long, default_value = "suffix_basic,suffix_firstchar,bloom,tabhash")]
    pub methods: String,

    /// Timing repetitions (after one untimed warm-up pass; at least 3)
    #[arg(long, default_value_t = 3)]
    pub reps: usize,

    /// File holding the chain salt / Bloom secret (alternative: PPSM_SALT)
    #[arg(long, value_name = "FILE")]
    pub salt_file: Option<PathBuf>,

    /// File holding the first-character salt (alternative: PPSM_FIRST_SALT)
    #[arg(long, value_name = "FILE")]
    pub first_salt_file: Option<PathBuf>,

    /// Minimum retained suffix length m (suffix methods)
    #[arg(long, default_value_t = 2)]
    pub min_len: usize,

    /// Hardening prefix length K for suffix_firstchar (bare flag means K=2)
    #[arg(long, num_args = 0..=1, default_missing_value = "2", value_name = "K")]
    pub first_char_k: Option<usize>,

    /// Residue modulus n (defaults to the alphabet size)
    #[arg(long)]
    pub modulus: Option<u64>,

    /// Chain hash function (suffix methods)
    #[arg(long, value_enum, default_value_t = HashChoice::Sha256)]
    pub hash: HashChoice,

    /// q-gram length (bloom and tabhash)
    #[arg(long, default_value_t = 2)]
    pub gram_len: usize,

    /// Bloom filter hash count
    #[arg(long, default_value_t = 46)]
    pub num_hashes: usize,

    /// Tabulation key seed (tabhash)
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Output CSV (stdout when omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
}
