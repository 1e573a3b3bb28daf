use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gramwalk::fixtures::{example_text, EXAMPLE_NAMES};
use gramwalk::grammar::{
    parse_grammar_with, validate_grammar, Grammar, GrammarVocab, ParseOptions, DEFAULT_NAMESPACE,
};
use gramwalk::graph::{parse_into, SemanticNetwork};
use gramwalk::oracle::{compare_rankings_with, solve, OracleConfig};
use gramwalk::output::{read_distribution, round_sig, to_string};
use gramwalk::walker::{run, RunConfig, RunResult};

#[derive(Parser)]
#[command(
    name = "gramwalk",
    version,
    about = "Grammar-constrained random walker ranking"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run walkers and write the rank vector as JSON (and CSV next to it).
    Run {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        walk: WalkArgs,
        /// Output JSON path; the CSV gets the same stem. Prints JSON if absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute the exact stationary distribution.
    Oracle {
        #[command(flatten)]
        input: Input,
        /// Ignore Reresolve rules and blend the implied network with uniform
        /// teleportation at this weight.
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Distances and rank agreement between two result files.
    Compare {
        a: PathBuf,
        b: PathBuf,
        /// Values this close to their neighbour in rank order count as tied.
        #[arg(long, default_value_t = 0.0)]
        tie_tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a grammar against a network.
    Validate {
        #[command(flatten)]
        input: Input,
    },
    /// Write a bundled example (`all` writes every example into a directory).
    GenExample {
        name: String,
        /// File (or directory for `all`). Prints to stdout if absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Input {
    /// Network file; repeat to merge several.
    #[arg(long = "graph", required = true)]
    graphs: Vec<PathBuf>,
    #[arg(long)]
    grammar: PathBuf,
    /// Base IRI of the grammar vocabulary.
    #[arg(long, default_value = DEFAULT_NAMESPACE)]
    namespace: String,
}

#[derive(Args)]
struct WalkArgs {
    #[arg(long, env = "GRAMWALK_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.001)]
    epsilon: f64,
    #[arg(long, default_value_t = 5_000_000)]
    max_steps: u64,
    #[arg(long, default_value_t = 1)]
    walkers: usize,
    #[arg(long, default_value_t = 100)]
    check_every: u64,
}

/// A failure with its exit code.
enum Failure {
    /// Grammar diagnostics or an unsupported/unrunnable request.
    Rejected(String),
    /// Unreadable or unparsable input.
    Input(String),
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Rejected(m) | Failure::Input(m) => f.write_str(m),
        }
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Rejected(_) => 1,
            Failure::Input(_) => 2,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}

fn execute(command: Command) -> Result<(), Failure> {
    match command {
        Command::Run { input, walk, out } => {
            let (net, grammar) = load(&input)?;
            let cfg = RunConfig {
                seed: walk.seed,
                walkers: walk.walkers,
                epsilon: walk.epsilon,
                max_steps: walk.max_steps,
                check_every: walk.check_every,
                ..RunConfig::default()
            };
            let result = run(&net, &grammar, &cfg).map_err(|e| Failure::Rejected(e.to_string()))?;
            let json = to_string(&result.to_json());
            match out {
                Some(path) => {
                    write(&path, &json)?;
                    write(&path.with_extension("csv"), &csv_text(&result)?)?;
                }
                None => print(&json)?,
            }
            if !result.converged {
                eprintln!("warning: step budget exhausted before convergence");
            }
            Ok(())
        }
        Command::Oracle { input, delta, out } => {
            let (net, grammar) = load(&input)?;
            let cfg = OracleConfig {
                delta,
                ..OracleConfig::default()
            };
            let report =
                solve(&net, &grammar, &cfg).map_err(|e| Failure::Rejected(e.to_string()))?;
            emit(out.as_deref(), &to_string(&report.to_json()))
        }
        Command::Compare { a, b, tie_tol, out } => {
            let read = |p: &Path| -> Result<_, Failure> {
                read_distribution(&read(p)?)
                    .map_err(|e| Failure::Input(format!("{}: {e}", p.display())))
            };
            let c = compare_rankings_with(&read(&a)?, &read(&b)?, tie_tol);
            let json = serde_json::json!({
                "l1": round_sig(c.l1),
                "l2": round_sig(c.l2),
                "rank_agreement": c.rank_agreement,
            });
            emit(out.as_deref(), &to_string(&json))
        }
        Command::Validate { input } => {
            let (net, grammar) = load_unchecked(&input)?;
            let diagnostics = validate_grammar(&grammar, Some(&net));
            for d in &diagnostics {
                println!("{d}");
            }
            let errors = diagnostics.iter().filter(|d| d.is_error()).count();
            if errors > 0 {
                return Err(Failure::Rejected(format!("{errors} error(s)")));
            }
            Ok(())
        }
        Command::GenExample { name, out } => gen_example(&name, out.as_deref()),
    }
}

fn gen_example(name: &str, out: Option<&Path>) -> Result<(), Failure> {
    if name == "all" {
        let dir = out.ok_or_else(|| Failure::Rejected("`all` needs --out DIR".into()))?;
        fs::create_dir_all(dir).map_err(|e| Failure::Input(format!("{}: {e}", dir.display())))?;
        for n in EXAMPLE_NAMES {
            write(
                &dir.join(format!("{n}.nt")),
                &example_text(n).expect("listed example"),
            )?;
        }
        return Ok(());
    }
    let text = example_text(name).ok_or_else(|| {
        Failure::Rejected(format!(
            "unknown example {name}; expected one of: all, {}",
            EXAMPLE_NAMES.join(", ")
        ))
    })?;
    emit(out, &text)
}

fn load(input: &Input) -> Result<(SemanticNetwork, Grammar), Failure> {
    let (net, grammar) = load_unchecked(input)?;
    let errors: Vec<String> = validate_grammar(&grammar, None)
        .into_iter()
        .filter(|d| d.is_error())
        .map(|d| d.to_string())
        .collect();
    if !errors.is_empty() {
        return Err(Failure::Rejected(errors.join("\n")));
    }
    Ok((net, grammar))
}

fn load_unchecked(input: &Input) -> Result<(SemanticNetwork, Grammar), Failure> {
    let mut net = SemanticNetwork::new();
    for path in &input.graphs {
        parse_into(&mut net, &read(path)?)
            .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    }
    let mut grammar_net = SemanticNetwork::new();
    parse_into(&mut grammar_net, &read(&input.grammar)?)
        .map_err(|e| Failure::Input(format!("{}: {e}", input.grammar.display())))?;
    let opts = ParseOptions {
        vocab: GrammarVocab::new(input.namespace.clone()),
        ..ParseOptions::default()
    };
    let parsed = parse_grammar_with(&grammar_net, &opts)
        .map_err(|e| Failure::Rejected(format!("{}: {e}", input.grammar.display())))?;
    for w in &parsed.warnings {
        eprintln!("warning: {w}");
    }
    Ok((net, parsed.grammar))
}

fn csv_text(result: &RunResult) -> Result<String, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| Failure::Input(e.to_string());
    w.write_record(["vertex", "count", "normalized"])
        .map_err(fail)?;
    for (node, count, share) in result.ranking() {
        w.write_record([node.key(), count.to_string(), round_sig(share).to_string()])
            .map_err(fail)?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::Input(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn print(text: &str) -> Result<(), Failure> {
    std::io::stdout()
        .write_all(text.as_bytes())
        .map_err(|e| Failure::Input(e.to_string()))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => write(p, text),
        None => print(text),
    }
}
