//! Command-line front end: batch verification and report emission for the
//! small cancellation toolkit.
//!
//! Exit codes: 0 = pass/success, 1 = fail with witness, 2 = error.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use smallcancel::completion::{
    build_completion, check_cprime_star, check_gr_star, is_embedded_sheets, parse_factors,
};
use smallcancel::conditions::{
    check_c_classical, check_cprime_classical, check_gr, check_grprime, parse_lambda,
    ConditionReport, Scope,
};
use smallcancel::diagram::{curvature_audit, parse_diagram};
use smallcancel::distortion::{classify_case, gen_distorted_family};
use smallcancel::graph::{parse_graph, write_graph};
use smallcancel::witness::{select_witnesses_classical, verify_classical_package};
use smallcancel::words::{cyclic_reduce, Presentation};

#[derive(Parser)]
#[command(name = "smallcancel", version, about = "Small cancellation condition checkers and constructions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Condition {
    /// Classical C(n) on a presentation, or plain-piece C(n) on a graph.
    C,
    /// Classical C'(λ) on a presentation, or plain-piece C'(λ) on a graph.
    Cprime,
    /// Gr(n) on a graph (essential pieces).
    Gr,
    /// Gr'(λ) on a graph (essential pieces).
    Grprime,
    /// C_*(n) on a completion (plain pieces).
    Cstar,
    /// Gr_*(n) on a completion (essential pieces).
    Grstar,
    /// C_*'(λ) on a completion (plain pieces).
    Cprimestar,
    /// Gr_*'(λ) on a completion (essential pieces).
    Grprimestar,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Structured,
}

#[derive(Args)]
struct CheckArgs {
    /// Condition to check.
    #[arg(long, value_enum)]
    condition: Condition,
    /// Piece-count parameter n for C(n)/Gr(n) variants.
    #[arg(long)]
    n: Option<usize>,
    /// Rational λ as `p/q` for the primed variants.
    #[arg(long)]
    lambda: Option<String>,
    /// Presentation file (classical conditions).
    #[arg(long)]
    presentation: Option<PathBuf>,
    /// Graph file (graphical conditions).
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Factor file (starred conditions over free products).
    #[arg(long)]
    factors: Option<PathBuf>,
    /// Also check all closed paths up to this length, not only simple
    /// cycles.
    #[arg(long)]
    exhaustive_max_len: Option<usize>,
    /// Report destination (stdout when absent).
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "structured")]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Run a condition check; exit 0 pass, 1 fail with witness, 2 error.
    Check(CheckArgs),
    /// Emit a generated relator family as a presentation file.
    Generate {
        /// Family name; `distorted` is the built-in family.
        #[arg(long, default_value = "distorted")]
        family: String,
        #[arg(long)]
        p: u32,
        #[arg(long = "N")]
        n: u32,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Audit the curvature identity of a spherical diagram.
    Curvature {
        #[arg(long)]
        diagram: PathBuf,
    },
    /// Build the witness package for a classical presentation.
    Witness {
        #[arg(long)]
        presentation: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Build the free-product completion of a labelled graph.
    Completion {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        factors: PathBuf,
        /// Write the completed graph here.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Classify cyclic-subgroup distortion of a word over a graph.
    Distortion {
        #[arg(long)]
        graph: PathBuf,
        /// The word w, in presentation token syntax.
        #[arg(long)]
        word: String,
        /// Fail hard when the graph is not Gr'(1/6).
        #[arg(long)]
        strict: bool,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn emit(output: &Option<PathBuf>, text: &str) -> Result<(), String> {
    match output {
        Some(path) => fs::write(path, text).map_err(|e| format!("write {path:?}: {e}")),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read(path: &PathBuf) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("read {path:?}: {e}"))
}

fn report_exit(report: &ConditionReport, args_format: Format, output: &Option<PathBuf>) -> Result<ExitCode, String> {
    let text = match args_format {
        Format::Structured => report.to_text(),
        Format::Text => format!(
            "{}: {}\n",
            report.condition,
            if report.passed() { "pass" } else { "fail" }
        ),
    };
    emit(output, &text)?;
    Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_check(args: CheckArgs) -> Result<ExitCode, String> {
    let scope = match args.exhaustive_max_len {
        Some(m) => Scope::Exhaustive { max_len: m },
        None => Scope::SimpleCycles,
    };
    let need_n = || args.n.ok_or_else(|| "missing --n".to_string());
    let need_lambda = || -> Result<_, String> {
        let raw = args.lambda.as_ref().ok_or("missing --lambda")?;
        parse_lambda(raw).ok_or_else(|| format!("bad rational `{raw}`"))
    };
    match (&args.presentation, &args.graph) {
        (Some(pres_path), None) => {
            let p = Presentation::parse(&read(pres_path)?).map_err(|e| e.to_string())?;
            let report = match args.condition {
                Condition::C => check_c_classical(&p, need_n()?),
                Condition::Cprime => check_cprime_classical(&p, need_lambda()?),
                _ => return Err("this condition needs --graph".into()),
            }
            .map_err(|e| e.to_string())?;
            report_exit(&report, args.format, &args.output)
        }
        (None, Some(graph_path)) => {
            let g = parse_graph(&read(graph_path)?).map_err(|e| e.to_string())?;
            let report = match (&args.factors, args.condition) {
                (None, Condition::C) => {
                    check_gr(&g, need_n()?, false, scope).map_err(|e| e.to_string())?
                }
                (None, Condition::Gr) => {
                    check_gr(&g, need_n()?, true, scope).map_err(|e| e.to_string())?
                }
                (None, Condition::Cprime) => {
                    check_grprime(&g, need_lambda()?, false).map_err(|e| e.to_string())?
                }
                (None, Condition::Grprime) => {
                    check_grprime(&g, need_lambda()?, true).map_err(|e| e.to_string())?
                }
                (Some(fp), cond) => {
                    let factors = parse_factors(&read(fp)?).map_err(|e| e.to_string())?;
                    let c = build_completion(&g, &factors).map_err(|e| e.to_string())?;
                    match cond {
                        Condition::Cstar => {
                            check_gr_star(&c, need_n()?, false).map_err(|e| e.to_string())?
                        }
                        Condition::Grstar => {
                            check_gr_star(&c, need_n()?, true).map_err(|e| e.to_string())?
                        }
                        Condition::Cprimestar => check_cprime_star(&c, need_lambda()?, false)
                            .map_err(|e| e.to_string())?,
                        Condition::Grprimestar => check_cprime_star(&c, need_lambda()?, true)
                            .map_err(|e| e.to_string())?,
                        _ => return Err("starred conditions need --factors only".into()),
                    }
                }
                (None, _) => return Err("starred conditions need --factors".into()),
            };
            report_exit(&report, args.format, &args.output)
        }
        _ => Err("provide exactly one of --presentation or --graph".into()),
    }
}

fn run() -> Result<ExitCode, String> {
    match Cli::parse().command {
        Command::Check(args) => cmd_check(args),
        Command::Generate { family, p, n, output } => {
            if family != "distorted" {
                return Err(format!("unknown family `{family}`"));
            }
            if p < 2 || n < 1 {
                return Err("family requires --p >= 2 and --N >= 1".into());
            }
            let pres = gen_distorted_family(p, n);
            emit(&output, &pres.to_text())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Curvature { diagram } => {
            let d = parse_diagram(&read(&diagram)?).map_err(|e| e.to_string())?;
            let v = curvature_audit(&d).map_err(|e| e.to_string())?;
            if v.is_integer() {
                println!("{}", v.numer());
            } else {
                println!("{}/{}", v.numer(), v.denom());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Witness { presentation, output } => {
            let p = Presentation::parse(&read(&presentation)?).map_err(|e| e.to_string())?;
            let pkg = select_witnesses_classical(&p).map_err(|e| e.to_string())?;
            verify_classical_package(&p, &pkg)?;
            emit(&output, &pkg.to_text())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Completion { graph, factors, output } => {
            let g = parse_graph(&read(&graph)?).map_err(|e| e.to_string())?;
            let fs_ = parse_factors(&read(&factors)?).map_err(|e| e.to_string())?;
            let c = build_completion(&g, &fs_).map_err(|e| e.to_string())?;
            let verdict = is_embedded_sheets(&c);
            let mut text = write_graph(&c.graph);
            text.push_str(&format!(
                "# sheets: {}; embedded: {}\n",
                c.sheets.len(),
                verdict.embedded
            ));
            if let Some(r) = c.truncated {
                text.push_str(&format!("# truncation radius: {r}\n"));
            }
            emit(&output, &text)?;
            Ok(if verdict.embedded { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Distortion { graph, word, strict, output } => {
            let g = parse_graph(&read(&graph)?).map_err(|e| e.to_string())?;
            let w = g.alphabet().parse_word(&word).map_err(|e| e.to_string())?;
            let (cw, _) = cyclic_reduce(&w).map_err(|e| e.to_string())?;
            let cert = classify_case(&g, &cw, strict).map_err(|e| e.to_string())?;
            emit(&output, &cert.to_text(g.alphabet()))?;
            Ok(if cert.small_cancellation_ok && !cert.downgraded() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
