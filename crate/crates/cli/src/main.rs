//! `ppsm` — privacy-preserving string matching over chained-hash suffix
//! trees. Exit codes: 0 success, 1 usage, 2 parameter mismatch between
//! the parties, 3 malformed or unencodable input, 4 internal failure.

mod args;
mod commands;
mod config;
mod support;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};
use support::{usage, CliResult, Failure};

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure { code, message }) => {
            if !message.is_empty() {
                eprintln!("error: {message}");
            }
            ExitCode::from(code)
        }
    }
}

fn run() -> CliResult<()> {
    let mut raw = Vec::new();
    for arg in std::env::args_os() {
        raw.push(
            arg.into_string()
                .map_err(|_| usage("arguments must be valid UTF-8"))?,
        );
    }
    let argv = config::preprocess(raw)?;
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let ok = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            e.print().ok();
            if ok {
                return Ok(());
            }
            return Err(Failure { code: 1, message: String::new() });
        }
    };
    match cli.command {
        Command::Gen(a) => commands::cmd_gen(a),
        Command::Encode(a) => commands::cmd_encode(a),
        Command::Match(a) => commands::cmd_match(a),
        Command::EvalScatter(a) => commands::cmd_eval_scatter(a),
        Command::EvalFreq(a) => commands::cmd_eval_freq(a),
        Command::Attack(a) => commands::cmd_attack(a),
        Command::Bench(a) => commands::cmd_bench(a),
    }
}
