use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use gschema::emptiness::{build_system, decide, EmptinessVerdict, DEFAULT_BOUND};
use gschema::graph::{validate, DataGraph};
use gschema::query::{eval, parse_query, Language};
use gschema::schema::{check_well_formed, witness_graph, GraphSchema, RawSchema};
use gschema::typing::{infer, sat, SatVerdict};
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

#[derive(Parser)]
#[command(
    name = "gschema",
    version,
    about = "Graph schemas, validation and query typing"
)]
struct Cli {
    /// Print JSON on a single line.
    #[arg(long, global = true)]
    compact: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the conflict-freeness, dangling-label, disjointness and
    /// well-formedness checks.
    CheckSchema { schema: PathBuf },
    /// Build a graph conforming to a well-formed schema.
    Witness {
        schema: PathBuf,
        /// Write the graph here and print only the typing.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Type every node of a graph.
    Validate {
        schema: PathBuf,
        graph: PathBuf,
        /// Reject repeated edges.
        #[arg(long)]
        strict: bool,
    },
    /// Infer the element pairs a query can relate.
    Infer {
        schema: PathBuf,
        query: String,
        #[arg(long, default_value = "gxpath")]
        lang: Language,
    },
    /// Decide whether a query can have answers on a conforming graph.
    Sat {
        schema: PathBuf,
        query: String,
        #[arg(long, default_value = "rpq")]
        lang: Language,
    },
    /// Evaluate a query over a graph.
    Eval {
        graph: PathBuf,
        query: String,
        #[arg(long, default_value = "gxpath")]
        lang: Language,
    },
    /// Build the counting equations of a schema and search for a solution.
    Emptiness {
        schema: PathBuf,
        #[arg(long, default_value_t = DEFAULT_BOUND)]
        bound: u64,
    },
}

/// A failed internal consistency check.
#[derive(Debug, Error)]
#[error("internal error: {0}")]
struct Breach(String);

struct Report {
    body: Value,
    positive: bool,
}

impl Report {
    fn new(body: Value, positive: bool) -> Self {
        Report { body, positive }
    }
}

fn read_input(path: &Path) -> Result<String> {
    if path.as_os_str() == "-" {
        let mut text = String::new();
        io::stdin()
            .read_to_string(&mut text)
            .context("reading standard input")?;
        return Ok(text);
    }
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_schema(path: &Path) -> Result<GraphSchema> {
    let text = read_input(path)?;
    GraphSchema::from_json(&text).with_context(|| format!("loading schema {}", path.display()))
}

fn load_graph(path: &Path, strict: bool) -> Result<DataGraph> {
    let text = read_input(path)?;
    DataGraph::from_json(&text, strict).with_context(|| format!("loading graph {}", path.display()))
}

fn to_value(x: impl Serialize) -> Value {
    serde_json::to_value(x).expect("report types serialize to JSON")
}

fn render(v: &Value, compact: bool) -> String {
    if compact {
        v.to_string()
    } else {
        serde_json::to_string_pretty(v).expect("values always serialize")
    }
}

fn run(cli: &Cli) -> Result<Report> {
    match &cli.command {
        Command::CheckSchema { schema } => {
            let raw = RawSchema::from_json(&read_input(schema)?)
                .with_context(|| format!("loading schema {}", schema.display()))?;
            let report = check_well_formed(&raw);
            Ok(Report::new(to_value(&report), report.accepted))
        }
        Command::Witness { schema, output } => {
            let raw = RawSchema::from_json(&read_input(schema)?)
                .with_context(|| format!("loading schema {}", schema.display()))?;
            let report = check_well_formed(&raw);
            if !report.accepted {
                return Ok(Report::new(to_value(&report), false));
            }
            let s =
                GraphSchema::try_from(raw).context("schema passed the checks but does not load")?;
            let w = witness_graph(&s)
                .map_err(|e| Breach(format!("witness construction failed: {e}")))?;
            if let Err(e) = validate(&w.graph, &s) {
                return Err(Breach(format!("witness does not validate: {e}")).into());
            }
            let typing = to_value(&w.typing);
            let body = match output {
                Some(path) => {
                    let text = render(&w.graph.to_json_value(), cli.compact) + "\n";
                    fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
                    json!({ "graph": path.display().to_string(), "typing": typing })
                }
                None => json!({ "graph": w.graph.to_json_value(), "typing": typing }),
            };
            Ok(Report::new(body, true))
        }
        Command::Validate {
            schema,
            graph,
            strict,
        } => {
            let s = load_schema(schema)?;
            let g = load_graph(graph, *strict)?;
            Ok(match validate(&g, &s) {
                Ok(typing) => {
                    Report::new(json!({ "valid": true, "typing": to_value(&typing) }), true)
                }
                Err(failure) => Report::new(
                    json!({ "valid": false, "untypable": to_value(&failure.untypable) }),
                    false,
                ),
            })
        }
        Command::Infer {
            schema,
            query,
            lang,
        } => {
            let s = load_schema(schema)?;
            let q = parse_query(query, *lang)?;
            Ok(Report::new(
                json!({ "pairs": to_value(infer(&s, &q)) }),
                true,
            ))
        }
        Command::Sat {
            schema,
            query,
            lang,
        } => {
            let s = load_schema(schema)?;
            let q = parse_query(query, *lang)?;
            let result = sat(&s, &q);
            let positive = result.verdict != SatVerdict::Unsat;
            Ok(Report::new(to_value(&result), positive))
        }
        Command::Eval { graph, query, lang } => {
            let g = load_graph(graph, false)?;
            let q = parse_query(query, *lang)?;
            let answers: Vec<Value> = eval(&g, &q)
                .into_iter()
                .map(|(from, to)| json!({ "from": from.as_str(), "to": to.as_str() }))
                .collect();
            Ok(Report::new(Value::Array(answers), true))
        }
        Command::Emptiness { schema, bound } => {
            if *bound == 0 {
                bail!("--bound must be at least 1");
            }
            let raw = RawSchema::from_json(&read_input(schema)?)
                .with_context(|| format!("loading schema {}", schema.display()))?;
            let sys = build_system(&raw)?;
            let verdict = decide(&sys, *bound);
            let nonempty = matches!(verdict, EmptinessVerdict::Nonempty { .. });
            let mut body = to_value(&verdict);
            let equations: Vec<String> = sys.to_string().lines().map(str::to_string).collect();
            body["equations"] = to_value(equations);
            body["variables"] = to_value(
                sys.elements
                    .iter()
                    .zip(&sys.variables)
                    .collect::<BTreeMap<_, _>>(),
            );
            body["parameters"] = to_value(&sys.parameters);
            Ok(Report::new(body, nonempty))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            let mut out = io::stdout().lock();
            if writeln!(out, "{}", render(&report.body, cli.compact)).is_err() {
                return ExitCode::from(2);
            }
            ExitCode::from(if report.positive { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if e.is::<Breach>() { 3 } else { 2 })
        }
    }
}
