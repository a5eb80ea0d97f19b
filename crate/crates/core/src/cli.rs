//! Command-line front end.
//!
//! Exit status is 0 on success, 1 when the request is well formed but fails
//! (an infeasible flow, an unreachable cut request, too many labelings), and
//! 2 on usage, I/O or parse errors. Results go to the output stream (or the
//! `--output` file), diagnostics to the error stream.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use crate::lp_oracle::build_lp;
use crate::random_models::{
    csv_rows, exact_flow_distribution, expected_max_flow, generate_family, mc_estimate,
    parse_model, sample_labeling, truncated_expectation, EstimateRow, FamilyKind, RandomModelSpec,
    Statistic, DEFAULT_ENUMERATION_CAP,
};
use crate::steg::StegGraph;
use crate::temporal_flow::{
    amount_to_json, buffer_trajectories, decompose_into_journeys, flow_from_json, flow_to_json,
    flow_value, min_temporal_cut, solve_mtf, verify_flow,
};
use crate::temporal_graph::{parse_network, serialize_network, Label, TemporalGraph};

#[derive(Debug, Parser)]
#[command(
    name = "tempflow",
    version,
    about = "Maximum flows on temporal networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
struct Output {
    /// Write the result to this file instead of standard output.
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Maximum temporal flow and an optimal flow, as JSON.
    Solve {
        network: PathBuf,
        /// Last day on which flow may arrive (default: the largest label).
        #[arg(long)]
        deadline: Option<Label>,
        /// Also write the time-extended graph in text form.
        #[arg(long, value_name = "PATH")]
        steg_dump: Option<PathBuf>,
        /// Also write the linear program in text form.
        #[arg(long, value_name = "PATH")]
        lp_dump: Option<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
    /// Minimum temporal cut and its capacity, as JSON.
    Cut {
        network: PathBuf,
        #[arg(long)]
        deadline: Option<Label>,
        #[command(flatten)]
        out: Output,
    },
    /// Splits a flow (by default an optimal one) into journeys.
    Decompose {
        network: PathBuf,
        /// Flow JSON to decompose instead of solving.
        #[arg(long, value_name = "PATH")]
        flow: Option<PathBuf>,
        #[arg(long, conflicts_with = "flow")]
        deadline: Option<Label>,
        #[command(flatten)]
        out: Output,
    },
    /// Checks a flow JSON against the network; exit 1 lists the violations.
    Verify {
        network: PathBuf,
        flow: PathBuf,
        /// Check against the network restricted to days up to the deadline.
        #[arg(long)]
        deadline: Option<Label>,
        #[command(flatten)]
        out: Output,
    },
    /// Temporal distance between two vertices.
    Distance {
        network: PathBuf,
        from: String,
        to: String,
        #[command(flatten)]
        out: Output,
    },
    /// Draws one labeling of a random model and prints it as a network file.
    Sample {
        model: PathBuf,
        #[arg(long)]
        alpha: Label,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: Output,
    },
    /// Exact law of the maximum flow of a random model.
    Enumerate {
        model: PathBuf,
        #[arg(long)]
        alpha: Label,
        /// Default: the later of alpha and the largest fixed label.
        #[arg(long)]
        deadline: Option<Label>,
        /// Maximum number of labelings to visit.
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
        cap: u64,
        /// Also report the expectation truncated at this value.
        #[arg(long, value_name = "B")]
        truncate: Option<u64>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        workers: Option<usize>,
        #[command(flatten)]
        out: Output,
    },
    /// Monte Carlo estimate of a statistic of the maximum flow.
    Estimate {
        #[arg(required_unless_present = "family", conflicts_with = "family")]
        model: Option<PathBuf>,
        /// Generated family instead of a model file, e.g. `thin:5`,
        /// `parallel:1/1,1/2`, `truncated:B:b:1/1`, `multiblock:c:d:n`.
        /// Repeat for several rows.
        #[arg(long)]
        family: Vec<String>,
        #[arg(long)]
        alpha: Label,
        #[arg(long)]
        deadline: Option<Label>,
        /// `positive`, `mean` or `tail:<C>`.
        #[arg(long, default_value = "positive", value_parser = parse_statistic)]
        statistic: Statistic,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Worker threads; the output does not depend on this.
        #[arg(long)]
        workers: Option<usize>,
        #[command(flatten)]
        out: Output,
    },
}

fn parse_statistic(s: &str) -> Result<Statistic, String> {
    s.parse()
}

enum Failure {
    Usage(String),
    Domain(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Domain(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Domain(m) => m,
        }
    }
}

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn domain(e: impl std::fmt::Display) -> Failure {
    Failure::Domain(e.to_string())
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn load_network(path: &Path) -> Result<TemporalGraph, Failure> {
    parse_network(&read(path)?).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn load_model(path: &Path, alpha: Label) -> Result<RandomModelSpec, Failure> {
    parse_model(&read(path)?, alpha).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

fn with_workers<T: Send>(
    workers: Option<usize>,
    job: impl FnOnce() -> T + Send,
) -> Result<T, Failure> {
    match workers {
        None => Ok(job()),
        Some(0) => Err(Failure::Usage("--workers must be at least 1".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(usage)?;
            Ok(pool.install(job))
        }
    }
}

/// Runs one command. `args[0]` is the program name.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let (result, target) = match cli.command {
        Command::Solve { ref out, .. }
        | Command::Cut { ref out, .. }
        | Command::Decompose { ref out, .. }
        | Command::Verify { ref out, .. }
        | Command::Distance { ref out, .. }
        | Command::Sample { ref out, .. }
        | Command::Enumerate { ref out, .. }
        | Command::Estimate { ref out, .. } => (dispatch(&cli.command), out.output.clone()),
    };
    let (text, code) = match result {
        Ok(done) => done,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message());
            return f.code();
        }
    };
    match target {
        Some(path) => {
            if let Err(f) = write_file(&path, &text) {
                let _ = writeln!(err, "error: {}", f.message());
                return f.code();
            }
        }
        None => {
            if out
                .write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .is_err()
            {
                return 2;
            }
        }
    }
    code
}

fn deadline_or_default(g: &TemporalGraph, deadline: Option<Label>) -> Label {
    deadline.unwrap_or_else(|| g.l_max())
}

/// Result text and exit status.
fn dispatch(command: &Command) -> Result<(String, i32), Failure> {
    if let Command::Verify {
        network,
        flow,
        deadline,
        ..
    } = command
    {
        let mut g = load_network(network)?;
        if let Some(d) = deadline {
            g = g.restrict_to_deadline(*d);
        }
        let assignments = flow_from_json(&read(flow)?)
            .map_err(|e| Failure::Usage(format!("{}: {e}", flow.display())))?;
        let tf = buffer_trajectories(&g, assignments);
        // violations are the result, reported with status 1
        return Ok(match verify_flow(&g, &tf) {
            Ok(()) => (format!("OK value={}\n", flow_value(&g, &tf)), 0),
            Err(violations) => (violations.iter().map(|v| format!("{v}\n")).collect(), 1),
        });
    }
    compute(command).map(|text| (text, 0))
}

fn compute(command: &Command) -> Result<String, Failure> {
    match command {
        Command::Solve {
            network,
            deadline,
            steg_dump,
            lp_dump,
            ..
        } => {
            let g = load_network(network)?;
            let d = deadline_or_default(&g, *deadline);
            if let Some(path) = steg_dump {
                write_file(path, &StegGraph::build(&g, d).dump())?;
            }
            if let Some(path) = lp_dump {
                write_file(path, &build_lp(&g, d).dump())?;
            }
            let sol = solve_mtf(&g, d).map_err(domain)?;
            let value = crate::temporal_flow::Amount::from_integer(sol.value.into());
            Ok(pretty(&flow_to_json(&value, &sol.flow, None)))
        }
        Command::Cut {
            network, deadline, ..
        } => {
            let g = load_network(network)?;
            let cut = min_temporal_cut(&g, deadline_or_default(&g, *deadline)).map_err(domain)?;
            let edges: Vec<Value> = cut
                .time_edges
                .iter()
                .map(|te| json!({ "edge": te.edge, "label": te.label }))
                .collect();
            Ok(pretty(
                &json!({ "capacity": cut.capacity, "time_edges": edges }),
            ))
        }
        Command::Decompose {
            network,
            flow,
            deadline,
            ..
        } => {
            let g = load_network(network)?;
            let tf = match flow {
                Some(path) => {
                    let assignments = flow_from_json(&read(path)?)
                        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
                    buffer_trajectories(&g, assignments)
                }
                None => {
                    solve_mtf(&g, deadline_or_default(&g, *deadline))
                        .map_err(domain)?
                        .flow
                }
            };
            let journeys = decompose_into_journeys(&g, &tf).map_err(domain)?;
            Ok(pretty(&flow_to_json(
                &flow_value(&g, &tf),
                &tf,
                Some(&journeys),
            )))
        }
        Command::Verify { .. } => unreachable!("handled in dispatch"),
        Command::Distance {
            network, from, to, ..
        } => {
            let g = load_network(network)?;
            for v in [from, to] {
                if !g.contains_vertex(v) {
                    return Err(Failure::Usage(format!("unknown vertex {v}")));
                }
            }
            Ok(match g.temporal_distance(from, to) {
                Some(d) => format!("{d}\n"),
                None => "unreachable\n".to_string(),
            })
        }
        Command::Sample {
            model, alpha, seed, ..
        } => {
            let spec = load_model(model, *alpha)?;
            Ok(serialize_network(&sample_labeling(&spec, *seed)))
        }
        Command::Enumerate {
            model,
            alpha,
            deadline,
            cap,
            truncate,
            format,
            workers,
            ..
        } => {
            let spec = load_model(model, *alpha)?;
            let d = deadline.unwrap_or_else(|| spec.default_deadline());
            let dist = with_workers(*workers, || exact_flow_distribution(&spec, d, *cap))?
                .map_err(domain)?;
            match format {
                Format::Csv => {
                    let mut w = csv::Writer::from_writer(Vec::new());
                    w.write_record(["value", "probability"]).map_err(usage)?;
                    for (v, p) in &dist.support {
                        w.write_record([v.to_string(), p.to_string()])
                            .map_err(usage)?;
                    }
                    Ok(String::from_utf8(w.into_inner().map_err(usage)?).map_err(usage)?)
                }
                Format::Json => {
                    let support: Vec<Value> = dist
                        .support
                        .iter()
                        .map(|(v, p)| json!({ "probability": amount_to_json(p), "value": v }))
                        .collect();
                    let mut doc = Map::new();
                    doc.insert("alpha".into(), json!(alpha));
                    doc.insert("deadline".into(), json!(d));
                    doc.insert("distribution".into(), Value::Array(support));
                    doc.insert(
                        "expectation".into(),
                        amount_to_json(&expected_max_flow(&dist)),
                    );
                    doc.insert("labelings".into(), json!(spec.labeling_count().to_string()));
                    if let Some(b) = truncate {
                        doc.insert(
                            "truncated_expectation".into(),
                            json!({ "bound": b, "value": amount_to_json(&truncated_expectation(&dist, *b)) }),
                        );
                    }
                    Ok(pretty(&Value::Object(doc)))
                }
            }
        }
        Command::Estimate {
            model,
            family,
            alpha,
            deadline,
            statistic,
            trials,
            seed,
            format,
            workers,
            ..
        } => {
            let mut specs = Vec::new();
            if let Some(path) = model {
                let name = path
                    .file_name()
                    .map(|n| n.to_string_lossy().into_owned())
                    .unwrap_or_default();
                specs.push(("file".to_string(), name, load_model(path, *alpha)?));
            }
            for desc in family {
                let kind: FamilyKind = desc.parse().map_err(usage)?;
                let spec = generate_family(&kind, *alpha).map_err(usage)?;
                specs.push((kind.name().to_string(), kind.params(), spec));
            }
            let mut rows = Vec::new();
            for (family, param, spec) in specs {
                let d = deadline.unwrap_or_else(|| spec.default_deadline());
                let estimate = with_workers(*workers, || {
                    mc_estimate(&spec, d, *statistic, *trials, *seed)
                })?
                .map_err(domain)?;
                rows.push(EstimateRow {
                    family,
                    param,
                    alpha: *alpha,
                    statistic: *statistic,
                    estimate,
                    trials: *trials,
                    seed: *seed,
                });
            }
            Ok(match format {
                Format::Csv => csv_rows(&rows),
                // estimates are written as decimal strings: JSON output never holds floats
                Format::Json => pretty(&Value::Array(
                    rows.iter()
                        .map(|r| {
                            json!({
                                "alpha": r.alpha,
                                "estimate": r.estimate.estimate.to_string(),
                                "family": r.family,
                                "param": r.param,
                                "seed": r.seed,
                                "statistic": r.statistic.to_string(),
                                "stderr": r.estimate.stderr.to_string(),
                                "trials": r.trials,
                            })
                        })
                        .collect(),
                )),
            })
        }
    }
}
