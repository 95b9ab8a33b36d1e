//! Command line front end. Boolean commands exit 0 for a positive
//! answer and 1 for a negative one; anything malformed (flags, syntax,
//! ill-formed expressions, missing preconditions) exits 2 with a one
//! line diagnostic on stderr.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use cfx_core::cfe::Cfe;
use cfx_core::coerce::{self, apply_downcast, apply_upcast, predictive_parser};
use cfx_core::coercion::{term_to_json, CoercionError, Fuel};
use cfx_core::reach;
use cfx_core::regex::{simp, Alphabet, RegEx};
use cfx_core::syntax::{parse_cfe, parse_regex};
use cfx_core::trees::{tree_from_json, tree_to_json, ParseTree};

#[derive(Parser)]
#[command(
    name = "cfx",
    about = "Context-free expressions against regular ones: derivatives, containment, and parse tree coercions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Derivative of a regular expression by one symbol.
    Derive {
        #[arg(short = 'r', help = "regular expression")]
        regex: String,
        #[arg(short = 'x', help = "symbol to derive by")]
        symbol: char,
        #[arg(long, help = "print the derivative before canonicalization")]
        raw: bool,
    },
    /// Canonical form of a regular expression.
    Canon {
        #[arg(short = 'r', help = "regular expression")]
        regex: String,
    },
    /// States of the target reachable under complete words of the
    /// expression, one canonical form per line.
    Reach {
        #[arg(short = 'e', help = "context-free expression")]
        expr: String,
        #[arg(short = 'r', help = "regular expression")]
        regex: String,
    },
    /// Whether the expression's language is contained in the target's.
    Contains {
        #[arg(short = 'e', help = "context-free expression")]
        expr: String,
        #[arg(short = 'r', help = "regular expression")]
        regex: String,
    },
    /// Convert a tree of the expression into a tree of the target.
    Upcast {
        #[arg(short = 'e', help = "context-free expression")]
        expr: String,
        #[arg(short = 'r', help = "regular expression")]
        regex: String,
        #[arg(long, help = "file holding the input tree")]
        tree: PathBuf,
    },
    /// Recover a tree of the expression from a tree of the target,
    /// printing Just with the tree and the residue, or Nothing.
    Downcast {
        #[arg(short = 'e', help = "context-free expression")]
        expr: String,
        #[arg(short = 'r', help = "regular expression")]
        regex: String,
        #[arg(long, help = "file holding the input tree")]
        tree: PathBuf,
        #[arg(
            long,
            help = "evaluation step budget; required when the expression is unguarded"
        )]
        fuel: Option<u64>,
    },
    /// Parse a word with the predictive parser of a guarded expression.
    Parse {
        #[arg(short = 'e', help = "context-free expression")]
        expr: String,
        #[arg(long, help = "input word")]
        word: String,
        #[arg(long, help = "alphabet symbols, e.g. xy; defaults to the expression's")]
        alphabet: Option<String>,
    },
    /// Write a synthesized coercion term to a file as JSON.
    EmitCoercion {
        #[arg(value_enum)]
        direction: Direction,
        #[arg(short = 'e', help = "context-free expression")]
        expr: String,
        #[arg(short = 'r', help = "regular expression")]
        regex: String,
        #[arg(short = 'o', help = "output file")]
        out: PathBuf,
    },
    /// Words of the expression's language up to a length, one per line.
    Enumerate {
        #[arg(short = 'e', help = "context-free expression")]
        expr: String,
        #[arg(long = "max-len", help = "maximum word length")]
        max_len: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Direction {
    Up,
    Down,
}

fn main() -> ExitCode {
    match run(Cli::parse().command) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("{msg}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<ExitCode, String> {
    match command {
        Command::Derive { regex, symbol, raw } => {
            let d = regex_arg(&regex)?.deriv(symbol);
            println!("{}", if raw { d } else { simp(&d) });
            Ok(ExitCode::SUCCESS)
        }
        Command::Canon { regex } => {
            println!("{}", simp(&regex_arg(&regex)?));
            Ok(ExitCode::SUCCESS)
        }
        Command::Reach { expr, regex } => {
            let e = expr_arg(&expr)?;
            let r = regex_arg(&regex)?;
            for state in reach::reach(&e, &r) {
                println!("{state}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Contains { expr, regex } => {
            let verdict = reach::contains(&expr_arg(&expr)?, &regex_arg(&regex)?);
            println!("{verdict}");
            Ok(if verdict {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Upcast { expr, regex, tree } => {
            let e = expr_arg(&expr)?;
            let r = regex_arg(&regex)?;
            let tree = tree_arg(&tree)?;
            let up = coerce::upcast(&e, &r, &union_sigma(&e, &r))
                .map_err(|err| format!("upcast: {err}"))?;
            let out = apply_upcast(&up, &tree, Fuel::Unlimited)
                .map_err(|err| format!("upcast: {err}"))?;
            println!("{}", tree_to_json(&out));
            Ok(ExitCode::SUCCESS)
        }
        Command::Downcast {
            expr,
            regex,
            tree,
            fuel,
        } => {
            let e = expr_arg(&expr)?;
            let r = regex_arg(&regex)?;
            let tree = tree_arg(&tree)?;
            if !e.is_guarded() && fuel.is_none() {
                return Err("downcasting an unguarded expression needs --fuel".into());
            }
            let dn = coerce::downcast(&e, &r, &union_sigma(&e, &r))
                .map_err(|err| format!("downcast: {err}"))?;
            let fuel = fuel.map_or(Fuel::Unlimited, Fuel::Limited);
            match apply_downcast(&dn, &tree, fuel) {
                Ok(Some((p, rest))) => {
                    println!("Just");
                    println!("{}", tree_to_json(&p));
                    println!("{}", tree_to_json(&rest));
                    Ok(ExitCode::SUCCESS)
                }
                Ok(None) => {
                    println!("Nothing");
                    Ok(ExitCode::from(1))
                }
                Err(CoercionError::Diverged(steps)) => {
                    eprintln!("no answer after {steps} steps");
                    Ok(ExitCode::from(1))
                }
                Err(err) => Err(format!("downcast: {err}")),
            }
        }
        Command::Parse {
            expr,
            word,
            alphabet,
        } => {
            let e = expr_arg(&expr)?;
            let sigma = match alphabet {
                Some(s) => Alphabet::new(s.chars()),
                None => Alphabet::from_symbol_sets([e.symbols()]),
            };
            let parser =
                predictive_parser(&e, &sigma).map_err(|err| format!("parse: {err}"))?;
            match parser.parse(&word, Fuel::Unlimited) {
                Ok(Some(p)) => {
                    println!("Just");
                    println!("{}", tree_to_json(&p));
                    Ok(ExitCode::SUCCESS)
                }
                Ok(None) => {
                    println!("Nothing");
                    Ok(ExitCode::from(1))
                }
                Err(err) => Err(format!("parse: {err}")),
            }
        }
        Command::EmitCoercion {
            direction,
            expr,
            regex,
            out,
        } => {
            let e = expr_arg(&expr)?;
            let r = regex_arg(&regex)?;
            let sigma = union_sigma(&e, &r);
            let term = match direction {
                Direction::Up => {
                    coerce::upcast(&e, &r, &sigma)
                        .map_err(|err| format!("emit-coercion: {err}"))?
                        .term
                }
                Direction::Down => {
                    coerce::downcast(&e, &r, &sigma)
                        .map_err(|err| format!("emit-coercion: {err}"))?
                        .term
                }
            };
            fs::write(&out, format!("{}\n", term_to_json(&term)))
                .map_err(|err| format!("cannot write {}: {err}", out.display()))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Enumerate { expr, max_len } => {
            let e = expr_arg(&expr)?;
            for word in e.enumerate_words(max_len) {
                println!("{word}");
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn regex_arg(text: &str) -> Result<RegEx, String> {
    parse_regex(text).map_err(|err| format!("-r: {err}"))
}

fn expr_arg(text: &str) -> Result<Cfe, String> {
    let e = parse_cfe(text).map_err(|err| format!("-e: {err}"))?;
    e.check_well_formed().map_err(|err| format!("-e: {err}"))?;
    Ok(e)
}

fn tree_arg(path: &Path) -> Result<ParseTree, String> {
    let text = fs::read_to_string(path)
        .map_err(|err| format!("cannot read {}: {err}", path.display()))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|err| format!("{}: {err}", path.display()))?;
    tree_from_json(&value).map_err(|err| format!("{}: {err}", path.display()))
}

fn union_sigma(e: &Cfe, r: &RegEx) -> Alphabet {
    Alphabet::from_symbol_sets([e.symbols(), r.symbols()])
}
