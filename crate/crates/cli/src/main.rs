use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, Context};
use clap::builder::PossibleValuesParser;
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use etopacity::arith::{build_div_formula, check_smt, emit_smt, to_lpsl, DivFormula};
use etopacity::model::{parse_model, substitute, Pta, Valuation};
use etopacity::opacity::{bounded, check_valuation, status_name, BoundedProblem, CheckMode, ExactAnalysis, OpacityReport};
use etopacity::oracle::{check_opacity_concrete, enumerate_durations, to_csv};
use etopacity::registry::{pet_methods, synth_problems, PetOutput};
use etopacity::zonegraph::{ef_synth_with, to_dot, ExplorationBudget, SynthOptions};

#[derive(Parser)]
#[command(name = "etopacity", version, about = "Execution-time opacity analysis of parametric timed automata")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Human-readable output instead of JSON.
    #[arg(long, global = true)]
    pretty: bool,
    /// Include wall-clock timings in the report.
    #[arg(long, global = true)]
    timings: bool,
    /// Symbolic states explored per synthesis before giving up.
    #[arg(long, global = true, env = "ETOPACITY_MAX_STATES", default_value_t = 10_000)]
    max_states: usize,
    /// Maximal exploration depth per synthesis.
    #[arg(long, global = true, env = "ETOPACITY_MAX_DEPTH", default_value_t = 256)]
    max_depth: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and check a model, report its class.
    Validate { model: PathBuf },
    /// Parametric execution times of the model.
    Pet {
        model: PathBuf,
        #[arg(long, default_value = "auto", value_parser = PossibleValuesParser::new(pet_methods().names()))]
        method: String,
        /// Print the expression of the automaton of the zones (zones method).
        #[arg(long)]
        emit_expr: bool,
        /// Write the automaton of the zones, or the zone graph, as DOT.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Synthesize opaque valuations (and durations).
    Synth {
        model: PathBuf,
        #[arg(long, value_parser = PossibleValuesParser::new(synth_problems().names()))]
        problem: String,
    },
    /// Opacity at one parameter valuation.
    Check {
        model: PathBuf,
        /// Comma-separated `param=value` list.
        #[arg(long, default_value = "")]
        valuation: String,
        #[arg(long, value_enum)]
        mode: Mode,
    },
    /// Emptiness over all valuations with parameters up to a bound.
    Bounded {
        model: PathBuf,
        #[arg(long, value_enum)]
        problem: Problem,
        #[arg(long, default_value_t = 64)]
        pmax: u64,
        /// Worker threads.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Discrete-time enumeration of run durations at one valuation.
    Oracle {
        model: PathBuf,
        #[arg(long, default_value = "")]
        valuation: String,
        #[arg(long, default_value_t = 40)]
        bound: u64,
        /// Per-duration visibility table as CSV.
        #[arg(long)]
        csv: bool,
    },
    /// Symbolic encodings of the duration sets.
    Export {
        model: PathBuf,
        /// SMT-LIB 2 query for a valuation with an opaque duration.
        #[arg(long)]
        smt: Option<PathBuf>,
        /// Linear parametric semilinear form (one parameter), as JSON.
        #[arg(long)]
        lpsl: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Exist,
    Full,
}

#[derive(Clone, Copy, ValueEnum)]
enum Problem {
    Eoe,
    Foe,
}

/// Usage errors exit with 2, analysis failures with 1.
enum Failure {
    Usage(anyhow::Error),
    Analysis(anyhow::Error),
}

fn usage<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Usage(e.into())
}

fn analysis<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Analysis(e.into())
}

struct Output {
    report: OpacityReport,
    /// Rendering for `--pretty`.
    human: String,
    /// Print `human` as is, whatever the output mode.
    raw: bool,
}

fn load(path: &Path) -> Result<Pta, Failure> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display())).map_err(usage)?;
    parse_model(&text).with_context(|| format!("in {}", path.display())).map_err(analysis)
}

fn parse_valuation(s: &str, pta: &Pta) -> Result<Valuation, Failure> {
    let mut v = Valuation::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, x) = part.split_once('=').ok_or_else(|| usage(anyhow!("expected param=value, got `{part}`")))?;
        let k = k.trim();
        if !pta.is_param(k) {
            return Err(usage(anyhow!("unknown parameter `{k}`")));
        }
        let x: u64 = x.trim().parse().map_err(|_| usage(anyhow!("`{x}` is not a natural number")))?;
        v.insert(k.to_string(), x);
    }
    if let Some(p) = pta.params.iter().find(|p| !v.contains_key(*p)) {
        return Err(usage(anyhow!("missing value for parameter `{p}`")));
    }
    Ok(v)
}

fn report(problem: &str, status: &str, result: Value, human: String) -> Output {
    Output { report: OpacityReport { problem: problem.into(), status: status.into(), result, timings: None }, human, raw: false }
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display())).map_err(usage)
}

fn run(cli: &Cli) -> Result<Output, Failure> {
    let budget = ExplorationBudget { max_states: cli.max_states, max_depth: cli.max_depth };
    match &cli.command {
        Command::Validate { model } => {
            let pta = load(model)?;
            let d = pta.diagnostics();
            let human = format!("{pta}\n{d:#?}");
            Ok(report("validate", "complete", serde_json::to_value(&d).map_err(analysis)?, human))
        }
        Command::Pet { model, method, emit_expr, dot } => {
            let pta = load(model)?;
            let m = pet_methods();
            let out = m.get(method).expect("validated by clap").compute(&pta, budget).map_err(analysis)?;
            let mut result = out.to_json();
            let mut human = String::new();
            match &out {
                PetOutput::Polyhedral { set, .. } => human.push_str(&format!("PET = {set}\n")),
                PetOutput::Zones(z) => {
                    for (a, b, s) in &z.automaton.transitions {
                        human.push_str(&format!("Z({a}, {b}) = {s}\n"));
                    }
                    human.push_str(&format!("expression = {}\n", z.expr));
                    for t in &z.terms {
                        let loops: Vec<String> = t.loops.iter().map(|l| format!("({l})*")).collect();
                        human.push_str(&format!("term: [{}] ({}) {}\n", t.params_constraint, t.base, loops.join(" ")));
                    }
                }
            }
            if *emit_expr {
                let PetOutput::Zones(z) = &out else {
                    return Err(usage(anyhow!("--emit-expr needs the zones method")));
                };
                result["expr"] = json!(z.expr.emit(&z.automaton.vars));
            }
            if let Some(path) = dot {
                let text = match &out {
                    PetOutput::Zones(z) => z.automaton.to_dot(),
                    PetOutput::Polyhedral { .. } => {
                        let target = etopacity::model::build_pet_target(&pta).map_err(analysis)?;
                        let fin = target.final_location().name.clone();
                        let opts = SynthOptions { record_graph: true, ..SynthOptions::default() };
                        let (_, graph) = ef_synth_with(&target, &[fin], budget, opts).map_err(analysis)?;
                        to_dot(&graph, &target.name)
                    }
                };
                write_file(path, &text)?;
            }
            Ok(report("pet", status_name(out.status()), result, human))
        }
        Command::Synth { model, problem } => {
            let pta = load(model)?;
            let s = synth_problems();
            let (set, status) = s.get(problem).expect("validated by clap").run(&pta, budget).map_err(analysis)?;
            let human = format!("{problem} = {set}");
            Ok(report(problem, status_name(status), serde_json::to_value(&set).map_err(analysis)?, human))
        }
        Command::Check { model, valuation, mode } => {
            let pta = load(model)?;
            let v = parse_valuation(valuation, &pta)?;
            let mode = match mode {
                Mode::Exist => CheckMode::Exist,
                Mode::Full => CheckMode::Full,
            };
            let r = check_valuation(&pta, &v, mode, budget).map_err(analysis)?;
            let mut human = format!("opaque: {}", r.opaque);
            if let Some(d) = &r.duration {
                let what = if r.side.is_some() { "counterexample" } else { "witness" };
                human.push_str(&format!("\n{what} duration: {}", etopacity::geometry::display_rational(d)));
            }
            if let Some(s) = r.side {
                human.push_str(&format!(" ({})", serde_json::to_value(s).map_err(analysis)?.as_str().unwrap_or("")));
            }
            Ok(report("check", "complete", serde_json::to_value(&r).map_err(analysis)?, human))
        }
        Command::Bounded { model, problem, pmax, jobs } => {
            let pta = load(model)?;
            let problem = match problem {
                Problem::Eoe => BoundedProblem::Eoe,
                Problem::Foe => BoundedProblem::Foe,
            };
            let r = bounded(&pta, problem, *pmax, *jobs, budget).map_err(analysis)?;
            let human = match &r.witness {
                Some(w) => format!("non-empty, witness {w:?} (checked {} valuations)", r.checked),
                None => format!("empty for all parameters up to {} (checked {} valuations)", r.bound, r.checked),
            };
            let name = serde_json::to_value(problem).map_err(analysis)?;
            Ok(report(name.as_str().unwrap_or(""), &format!("bounded({pmax})"), serde_json::to_value(&r).map_err(analysis)?, human))
        }
        Command::Oracle { model, valuation, bound, csv } => {
            let pta = load(model)?;
            let v = parse_valuation(valuation, &pta)?;
            let ta = substitute(&pta, &v).map_err(analysis)?;
            if *csv {
                let table = check_opacity_concrete(&ta, *bound).map_err(analysis)?;
                let text = to_csv(&table);
                let mut out = report("oracle", "complete", json!(text), text);
                out.raw = true;
                return Ok(out);
            }
            let d = enumerate_durations(&ta, *bound).map_err(analysis)?;
            let human = format!("private: {:?}\npublic: {:?}", d.private, d.public);
            Ok(report("oracle", "complete", json!({ "bound": bound, "private": d.private, "public": d.public }), human))
        }
        Command::Export { model, smt, lpsl } => {
            if smt.is_none() && lpsl.is_none() {
                return Err(usage(anyhow!("nothing to export: give --smt and/or --lpsl")));
            }
            let pta = load(model)?;
            let exact = ExactAnalysis::new(&pta, budget).map_err(analysis)?;
            let mut result = json!({});
            if let Some(path) = smt {
                let f = DivFormula::and(vec![
                    build_div_formula(&exact.private.terms).map_err(analysis)?,
                    build_div_formula(&exact.public.terms).map_err(analysis)?,
                ]);
                let text = emit_smt(&f);
                check_smt(&text).map_err(|e| analysis(anyhow!("generated SMT script is malformed: {e}")))?;
                write_file(path, &text)?;
                result["smt"] = json!(path.display().to_string());
            }
            if let Some(path) = lpsl {
                let [p] = pta.params.as_slice() else {
                    return Err(analysis(anyhow!("the LpSl form needs exactly one parameter, found {}", pta.params.len())));
                };
                let out = json!({
                    "scale": "durations are doubled",
                    "private": to_lpsl(&exact.private.terms, p).map_err(analysis)?,
                    "public": to_lpsl(&exact.public.terms, p).map_err(analysis)?,
                });
                write_file(path, &serde_json::to_string_pretty(&out).map_err(analysis)?)?;
                result["lpsl"] = json!(path.display().to_string());
            }
            let human = format!("{result}");
            Ok(report("export", "complete", result, human))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    match run(&cli) {
        Ok(mut out) => {
            if cli.timings {
                out.report.timings = Some(json!({ "total_ms": start.elapsed().as_secs_f64() * 1e3 }));
            }
            if out.raw {
                print!("{}", out.human);
            } else if cli.pretty {
                println!("{}", out.human.trim_end());
                if let Some(t) = &out.report.timings {
                    println!("timings: {t}");
                }
            } else {
                println!("{}", serde_json::to_string(&out.report).expect("serializable report"));
            }
            ExitCode::SUCCESS
        }
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            eprintln!("usage: etopacity <validate|pet|synth|check|bounded|oracle|export> <model> [options]");
            ExitCode::from(2)
        }
        Err(Failure::Analysis(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
