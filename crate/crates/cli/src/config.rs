//! `--config` handling. The TOML file is flat: every key names a long
//! flag of some subcommand (`min-len = 3`, `salt-file = "chain.salt"`;
//! underscores are accepted in place of hyphens). Keys that apply to the
//! subcommand being run are spliced into the argument list unless that
//! flag was given explicitly — so command-line flags always win. Keys
//! belonging only to other subcommands are ignored, which lets one file
//! drive a whole pipeline; keys no subcommand knows are usage errors.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use clap::{ArgAction, CommandFactory};

use crate::args::Cli;
use crate::support::{usage, CliResult};

/// Extracts `--config` from the raw arguments and, when present, splices
/// the file's values in. Returns the argument list to hand to the parser.
pub fn preprocess(raw: Vec<String>) -> CliResult<Vec<String>> {
    let mut config: Option<PathBuf> = None;
    let mut argv = Vec::with_capacity(raw.len());
    let mut it = raw.into_iter();
    while let Some(arg) = it.next() {
        if arg == "--config" {
            let value = it
                .next()
                .ok_or_else(|| usage("--config requires a file path"))?;
            config = Some(PathBuf::from(value));
        } else if let Some(value) = arg.strip_prefix("--config=") {
            config = Some(PathBuf::from(value));
        } else {
            argv.push(arg);
        }
    }
    match config {
        Some(path) => splice(argv, &path),
        None => Ok(argv),
    }
}

fn splice(mut argv: Vec<String>, path: &Path) -> CliResult<Vec<String>> {
    let text = fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read config file {}: {e}", path.display())))?;
    let table: toml::Table = text
        .parse()
        .map_err(|e| usage(format!("config file {}: {e}", path.display())))?;

    let root = Cli::command();
    let Some(target) = resolve_subcommand(&root, &argv) else {
        // No subcommand on the command line; leave the parser to explain.
        return Ok(argv);
    };

    // Flags of the subcommand being run, with the action that tells us
    // whether they take a value.
    let applicable: BTreeMap<String, ArgAction> = target
        .get_arguments()
        .filter_map(|a| a.get_long().map(|l| (l.to_string(), a.get_action().clone())))
        .filter(|(l, _)| l != "help" && l != "config")
        .collect();
    let mut known_anywhere = BTreeSet::new();
    collect_long_flags(&root, &mut known_anywhere);

    for (key, value) in &table {
        let flag = key.replace('_', "-");
        let Some(action) = applicable.get(&flag) else {
            if known_anywhere.contains(&flag) {
                continue; // some other subcommand's flag — ignore here
            }
            return Err(usage(format!(
                "config file {}: unknown key {key:?}",
                path.display()
            )));
        };
        if flag_present(&argv, &flag) {
            continue; // explicit flag wins
        }
        match action {
            ArgAction::SetTrue | ArgAction::SetFalse => match value {
                toml::Value::Boolean(true) => argv.push(format!("--{flag}")),
                toml::Value::Boolean(false) => {}
                other => {
                    return Err(usage(format!(
                        "config file {}: key {key:?} must be a boolean, got {other}",
                        path.display()
                    )));
                }
            },
            _ => {
                argv.push(format!("--{flag}"));
                argv.push(render_value(value).ok_or_else(|| {
                    usage(format!(
                        "config file {}: key {key:?} has an unsupported value type",
                        path.display()
                    ))
                })?);
            }
        }
    }
    Ok(argv)
}

/// Follows the subcommand tokens in the argument list down to the
/// deepest subcommand (`gen pairs` is two levels).
fn resolve_subcommand<'c>(root: &'c clap::Command, argv: &[String]) -> Option<&'c clap::Command> {
    let mut current = root;
    let mut found = None;
    for token in argv.iter().skip(1) {
        if token.starts_with('-') {
            continue;
        }
        match current.find_subcommand(token) {
            Some(sub) => {
                found = Some(sub);
                current = sub;
                if current.get_subcommands().next().is_none() {
                    break;
                }
            }
            None => break,
        }
    }
    found
}

fn collect_long_flags(cmd: &clap::Command, into: &mut BTreeSet<String>) {
    for arg in cmd.get_arguments() {
        if let Some(long) = arg.get_long() {
            into.insert(long.to_string());
        }
    }
    for sub in cmd.get_subcommands() {
        collect_long_flags(sub, into);
    }
}

fn flag_present(argv: &[String], flag: &str) -> bool {
    let exact = format!("--{flag}");
    let prefix = format!("--{flag}=");
    argv.iter().any(|a| a == &exact || a.starts_with(&prefix))
}

/// Renders a TOML value as one flag argument. Arrays become a
/// comma-separated list, matching the list flags' syntax.
fn render_value(value: &toml::Value) -> Option<String> {
    match value {
        toml::Value::String(s) => Some(s.clone()),
        toml::Value::Integer(i) => Some(i.to_string()),
        toml::Value::Float(f) => Some(f.to_string()),
        toml::Value::Boolean(b) => Some(b.to_string()),
        toml::Value::Array(items) => {
            let parts: Option<Vec<String>> = items
                .iter()
                .map(|v| match v {
                    toml::Value::Array(_) | toml::Value::Table(_) => None,
                    other => render_value(other),
                })
                .collect();
            parts.map(|p| p.join(","))
        }
        toml::Value::Datetime(_) | toml::Value::Table(_) => None,
    }
}
