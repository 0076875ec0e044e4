//! One function per subcommand, each mapping straight onto a library
//! operation. All file outputs go through atomic writes; summaries and
//! warnings go to stderr so stdout stays parseable.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use ppsm::baselines::{BloomParams, TabHashParams};
use ppsm::datagen::{
    benford_sample, gen_corrupted_pairs, read_pair_file, read_value_file, write_pair_file,
    write_value_file, PairCorpus,
};
use ppsm::encoding::{Alphabet, EncodingParams, FirstCharParams};
use ppsm::eval::{
    bench, eval_first_char_freq, eval_scatter, frequency_attack, score_attack, write_bench_csv,
    write_freq_chi2_csv, write_freq_histogram_csv, write_scatter_csv, MethodParams,
};
use ppsm::matching::Engine;
use ppsm::protocol::{do_prepare, lu_match, EncodedDatabase, MatchOptions};

use crate::args::{
    AttackArgs, BenchArgs, EncodeArgs, EvalFreqArgs, EvalScatterArgs, GenArgs, GenBenfordArgs,
    GenKind, GenPairsArgs, HashChoice, MatchArgs,
};
use crate::support::{
    atomic_write, bad_data, emit, internal, load_secret, parse_alphabet, render_slot, usage,
    CliResult, Failure,
};

// ---- shared input/output helpers ----

fn read_db(path: &Path) -> CliResult<EncodedDatabase> {
    let bytes = fs::read(path).map_err(|e| {
        bad_data(format!("cannot read encoded database {}: {e}", path.display()))
    })?;
    EncodedDatabase::from_bytes(&bytes).map_err(|e| Failure {
        code: e.exit_code() as u8,
        message: format!("{}: {e}", path.display()),
    })
}

fn read_pairs(path: &Path) -> CliResult<PairCorpus> {
    let file = fs::File::open(path)
        .map_err(|e| bad_data(format!("cannot read pair file {}: {e}", path.display())))?;
    read_pair_file(file, &path.display().to_string())
        .map_err(|e| bad_data(format!("pair file {}: {e}", path.display())))
}

fn read_values(path: &Path) -> CliResult<(Vec<(String, String)>, Alphabet)> {
    let file = fs::File::open(path)
        .map_err(|e| bad_data(format!("cannot read value file {}: {e}", path.display())))?;
    read_value_file(file).map_err(|e| bad_data(format!("value file {}: {e}", path.display())))
}

// ---- shared parameter builders ----

/// The flag subset shared by every command that builds comparison
/// methods.
struct MethodFlags<'a> {
    salt_file: Option<&'a PathBuf>,
    first_salt_file: Option<&'a PathBuf>,
    min_len: usize,
    first_char_k: Option<usize>,
    modulus: Option<u64>,
    hash: HashChoice,
    gram_len: usize,
    num_hashes: usize,
    seed: u64,
}

fn suffix_params(
    flags: &MethodFlags<'_>,
    alphabet: &Alphabet,
    hardened: bool,
) -> CliResult<EncodingParams> {
    let chain_salt = load_secret(flags.salt_file, "PPSM_SALT", "--salt-file")?;
    let mut params = EncodingParams::basic(chain_salt, alphabet.clone());
    params.hash = flags.hash.into();
    params.min_suffix_len = flags.min_len;
    if hardened {
        params.first_salt =
            load_secret(flags.first_salt_file, "PPSM_FIRST_SALT", "--first-salt-file")?;
        let prefix_len = flags.first_char_k.unwrap_or(2);
        let modulus = flags
            .modulus
            .unwrap_or_else(|| EncodingParams::default_modulus(alphabet));
        params.first_char = Some(FirstCharParams { prefix_len, modulus });
        params.min_suffix_len = params.min_suffix_len.max(prefix_len);
    }
    params
        .validate()
        .map_err(|e| usage(format!("invalid encoding parameters: {e}")))?;
    Ok(params)
}

fn method_from_token(
    token: &str,
    flags: &MethodFlags<'_>,
    alphabet: &Alphabet,
) -> CliResult<MethodParams> {
    match token {
        "suffix_basic" => Ok(MethodParams::SuffixBasic(suffix_params(flags, alphabet, false)?)),
        "suffix_firstchar" => {
            Ok(MethodParams::SuffixFirstChar(suffix_params(flags, alphabet, true)?))
        }
        "bloom" => {
            let secret = load_secret(flags.salt_file, "PPSM_SALT", "--salt-file")?;
            let params = BloomParams::new(flags.num_hashes, secret);
            params
                .validate()
                .map_err(|e| usage(format!("invalid Bloom parameters: {e}")))?;
            Ok(MethodParams::Bloom { params, gram_len: flags.gram_len })
        }
        "tabhash" => Ok(MethodParams::TabHash {
            params: TabHashParams::from_seed(flags.seed),
            gram_len: flags.gram_len,
        }),
        other => Err(usage(format!(
            "unknown method {other:?} (expected suffix_basic, suffix_firstchar, bloom, or tabhash)"
        ))),
    }
}

// ---- gen ----

pub fn cmd_gen(args: GenArgs) -> CliResult<()> {
    match args.kind {
        GenKind::Pairs(a) => gen_pairs(a),
        GenKind::Benford(a) => gen_benford(a),
    }
}

fn gen_pairs(args: GenPairsArgs) -> CliResult<()> {
    let alphabet = parse_alphabet(&args.alphabet)?;
    let max_length = args.max_length.unwrap_or(args.min_length);
    let corpus = gen_corrupted_pairs(
        args.count,
        &alphabet,
        args.min_length..=max_length,
        args.max_edits,
        args.seed,
    )
    .map_err(|e| usage(format!("cannot generate pairs: {e}")))?;
    let mut bytes = Vec::new();
    write_pair_file(&corpus, &mut bytes)
        .map_err(|e| internal(format!("cannot serialize pair file: {e}")))?;
    emit(args.out.as_ref(), &bytes)?;
    if let Some(path) = &args.out {
        eprintln!("wrote {} pairs to {}", corpus.pairs.len(), path.display());
    }
    Ok(())
}

fn gen_benford(args: GenBenfordArgs) -> CliResult<()> {
    let values = benford_sample(args.count, args.length, args.seed)
        .map_err(|e| usage(format!("cannot generate values: {e}")))?;
    let records: Vec<(String, String)> = values
        .into_iter()
        .enumerate()
        .map(|(i, v)| (format!("r{i:05}"), v))
        .collect();
    let mut bytes = Vec::new();
    write_value_file(&records, &Alphabet::digits(), &mut bytes)
        .map_err(|e| internal(format!("cannot serialize value file: {e}")))?;
    emit(args.out.as_ref(), &bytes)?;
    if let Some(path) = &args.out {
        eprintln!("wrote {} values to {}", records.len(), path.display());
    }
    Ok(())
}

// ---- encode ----

pub fn cmd_encode(args: EncodeArgs) -> CliResult<()> {
    if args.first_char_k.is_none() {
        if args.modulus.is_some() {
            return Err(usage("--modulus requires --first-char-k"));
        }
        if args.first_salt_file.is_some() {
            return Err(usage("--first-salt-file requires --first-char-k"));
        }
    }
    let chain_salt = load_secret(args.salt_file.as_ref(), "PPSM_SALT", "--salt-file")?;

    let (records, file_alphabet) = read_values(&args.input)?;
    let alphabet = match &args.alphabet {
        Some(spec) => parse_alphabet(spec)?,
        None => file_alphabet,
    };

    let mut params = EncodingParams::basic(chain_salt, alphabet);
    params.hash = args.hash.into();
    params.min_suffix_len = args.min_len;
    if let Some(prefix_len) = args.first_char_k {
        params.first_salt =
            load_secret(args.first_salt_file.as_ref(), "PPSM_FIRST_SALT", "--first-salt-file")?;
        let modulus = args
            .modulus
            .unwrap_or_else(|| EncodingParams::default_modulus(&params.alphabet));
        params.first_char = Some(FirstCharParams { prefix_len, modulus });
        params.min_suffix_len = params.min_suffix_len.max(prefix_len);
    }
    params
        .validate()
        .map_err(|e| usage(format!("invalid encoding parameters: {e}")))?;

    let report = do_prepare(&records, &params, !args.skip_bad_records)?;
    for failure in &report.failures {
        eprintln!("warning: skipped {failure}");
    }
    atomic_write(&args.out, &report.database.to_bytes())?;
    let skipped = match report.failures.len() {
        0 => String::new(),
        n => format!(" ({n} records skipped)"),
    };
    eprintln!(
        "encoded {} records into {}{skipped}",
        report.database.records.len(),
        args.out.display()
    );
    Ok(())
}

// ---- match ----

pub fn cmd_match(args: MatchArgs) -> CliResult<()> {
    if let Some(t) = args.threshold {
        if !(0.0..=1.0).contains(&t) {
            return Err(usage(format!("--threshold must be within 0..=1, got {t}")));
        }
    }
    let db_a = read_db(&args.db_a)?;
    let db_b = read_db(&args.db_b)?;
    let opts = MatchOptions {
        min_len: args.min_len,
        sim_threshold: args.threshold,
        sentinel: args.sentinel,
        workers: args.workers,
        engine: Engine::default(),
    };
    let matches = lu_match(&db_a, &db_b, &opts)?;

    let mut bytes = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut bytes);
        w.write_record([
            "id_a",
            "id_b",
            "lcs_length",
            "pos_a",
            "pos_b",
            "sim",
            "common_prefix_len",
            "common_suffix_len",
            "has_common_middle",
        ])
        .map_err(|e| internal(format!("cannot serialize matches: {e}")))?;
        for m in &matches {
            let (pos_a, pos_b) = match m.outcome.lcs_positions {
                Some((a, b)) => (a.to_string(), b.to_string()),
                None => (String::new(), String::new()),
            };
            w.write_record([
                m.id_a.as_str(),
                m.id_b.as_str(),
                &m.outcome.lcs_length.to_string(),
                &pos_a,
                &pos_b,
                &format!("{:.6}", m.outcome.sim),
                &m.outcome.common_prefix_len.to_string(),
                &m.outcome.common_suffix_len.to_string(),
                if m.outcome.has_common_middle { "true" } else { "false" },
            ])
            .map_err(|e| internal(format!("cannot serialize matches: {e}")))?;
        }
        w.flush().map_err(|e| internal(format!("cannot serialize matches: {e}")))?;
    }
    emit(args.out.as_ref(), &bytes)?;
    if let Some(path) = &args.out {
        eprintln!("{} matching pairs -> {}", matches.len(), path.display());
    }
    Ok(())
}

// ---- eval-scatter ----

pub fn cmd_eval_scatter(args: EvalScatterArgs) -> CliResult<()> {
    let corpus = read_pairs(&args.pairs)?;
    let flags = MethodFlags {
        salt_file: args.salt_file.as_ref(),
        first_salt_file: args.first_salt_file.as_ref(),
        min_len: args.min_len,
        first_char_k: args.first_char_k,
        modulus: args.modulus,
        hash: args.hash,
        gram_len: args.gram_len,
        num_hashes: args.num_hashes,
        seed: args.seed,
    };
    let method = method_from_token(&args.method, &flags, &corpus.alphabet)?;
    let rows = eval_scatter(&corpus, &method)?;
    let mut bytes = Vec::new();
    write_scatter_csv(&rows, &mut bytes)?;
    emit(args.out.as_ref(), &bytes)?;
    if let Some(path) = &args.out {
        eprintln!("{} scatter rows ({}) -> {}", rows.len(), method.method_name(), path.display());
    }
    Ok(())
}

// ---- eval-freq ----

fn parse_ks(spec: &str) -> CliResult<Vec<usize>> {
    let ks: Vec<usize> = spec
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<usize>()
                .map_err(|_| usage(format!("--ks: {s:?} is not a whole number")))
        })
        .collect::<CliResult<_>>()?;
    if ks.is_empty() {
        return Err(usage("--ks needs at least one prefix length"));
    }
    if let Some(k) = ks.iter().find(|&&k| k < 2) {
        return Err(usage(format!("--ks: prefix length {k} is below the minimum of 2")));
    }
    Ok(ks)
}

pub fn cmd_eval_freq(args: EvalFreqArgs) -> CliResult<()> {
    let ks = parse_ks(&args.ks)?;
    let chain_salt = load_secret(args.salt_file.as_ref(), "PPSM_SALT", "--salt-file")?;
    let first_salt =
        load_secret(args.first_salt_file.as_ref(), "PPSM_FIRST_SALT", "--first-salt-file")?;

    let (records, alphabet) = read_values(&args.values)?;
    let values: Vec<String> = records.into_iter().map(|(_, v)| v).collect();

    let mut base = EncodingParams::basic(chain_salt, alphabet);
    base.hash = args.hash.into();
    base.min_suffix_len = args.min_len;
    base.first_salt = first_salt;
    let modulus = args
        .modulus
        .unwrap_or_else(|| EncodingParams::default_modulus(&base.alphabet));

    let report = eval_first_char_freq(&values, &ks, &base, modulus)?;
    let mut bytes = Vec::new();
    write_freq_histogram_csv(&report, &mut bytes)?;
    emit(args.out.as_ref(), &bytes)?;
    if let Some(path) = &args.out {
        eprintln!("frequency histograms -> {}", path.display());
    }
    if let Some(path) = &args.chi2_out {
        let mut bytes = Vec::new();
        write_freq_chi2_csv(&report, &mut bytes)?;
        atomic_write(path, &bytes)?;
        eprintln!("chi-squared summary -> {}", path.display());
    }
    Ok(())
}

// ---- attack ----

pub fn cmd_attack(args: AttackArgs) -> CliResult<()> {
    let db = read_db(&args.db)?;
    let (reference_records, _) = read_values(&args.reference)?;
    let reference: Vec<String> = reference_records.into_iter().map(|(_, v)| v).collect();
    let guess = frequency_attack(&db, &reference)?;

    let mut bytes = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut bytes);
        w.write_record(["rank", "first_position_encoding", "guessed_char"])
            .map_err(|e| internal(format!("cannot serialize guesses: {e}")))?;
        for (rank, (slot, ch)) in guess.mapping.iter().enumerate() {
            w.write_record([
                &(rank + 1).to_string(),
                &render_slot(slot),
                &ch.to_string(),
            ])
            .map_err(|e| internal(format!("cannot serialize guesses: {e}")))?;
        }
        w.flush().map_err(|e| internal(format!("cannot serialize guesses: {e}")))?;
    }
    emit(args.out.as_ref(), &bytes)?;
    if let Some(path) = &args.out {
        eprintln!("{} guessed mappings -> {}", guess.mapping.len(), path.display());
    }

    if let Some(truth_path) = &args.truth {
        let (truth_records, _) = read_values(truth_path)?;
        let truth: BTreeMap<String, char> = truth_records
            .iter()
            .filter_map(|(id, v)| v.chars().next().map(|c| (id.clone(), c)))
            .collect();
        let accuracy = score_attack(&guess, &db, &truth)?;
        println!("top-1 accuracy: {accuracy:.4}");
    }
    Ok(())
}

// ---- bench ----

pub fn cmd_bench(args: BenchArgs) -> CliResult<()> {
    if args.reps < 3 {
        return Err(usage(format!("--reps must be at least 3, got {}", args.reps)));
    }
    let corpus = read_pairs(&args.pairs)?;
    let flags = MethodFlags {
        salt_file: args.salt_file.as_ref(),
        first_salt_file: args.first_salt_file.as_ref(),
        min_len: args.min_len,
        first_char_k: args.first_char_k,
        modulus: args.modulus,
        hash: args.hash,
        gram_len: args.gram_len,
        num_hashes: args.num_hashes,
        seed: args.seed,
    };
    let tokens: Vec<&str> = args
        .methods
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect();
    if tokens.is_empty() {
        return Err(usage("--methods needs at least one method token"));
    }
    let methods: Vec<MethodParams> = tokens
        .iter()
        .map(|t| method_from_token(t, &flags, &corpus.alphabet))
        .collect::<CliResult<_>>()?;

    let report = bench(&corpus, &methods, args.reps)?;
    let mut bytes = Vec::new();
    write_bench_csv(&report, &mut bytes)?;
    emit(args.out.as_ref(), &bytes)?;
    if let Some(path) = &args.out {
        eprintln!("{} timing rows -> {}", report.rows.len(), path.display());
    }
    Ok(())
}
