//! `cpw`: command-line front end for the workbench.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use cp_workbench::cyclic::Order;
use cp_workbench::harness::{self, CpWitnessReport, HarnessError, Outcome, Timing, SCHEMA};
use cp_workbench::hf::{self, HfOrder};
use cp_workbench::incidence::IncidenceStructure;
use cp_workbench::ngon::{self, NGonError};
use cp_workbench::plane::{self, PlaneError};
use cp_workbench::steiner::{self, PartialSteiner, SteinerParams};
use cp_workbench::tfab::Characteristic;

#[derive(Parser)]
#[command(name = "cpw", version, about = "Construction-principle witness workbench")]
struct Cli {
    /// Seed for every randomized check.
    #[arg(long, global = true, env = "WORKBENCH_SEED", default_value_t = 0)]
    seed: u64,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Leave timing out of the report.
    #[arg(long, global = true)]
    no_timing: bool,
    #[command(subcommand)]
    domain: Domain,
}

#[derive(Subcommand)]
enum Domain {
    /// (k,n)-Steiner systems.
    #[command(subcommand)]
    Steiner(SteinerCmd),
    /// Generalized n-gons, odd n.
    #[command(subcommand)]
    Ngon(NgonCmd),
    /// Projective planes.
    #[command(subcommand)]
    Plane(PlaneCmd),
    /// Free products of cyclic groups.
    #[command(subcommand)]
    Cyclic(CyclicCmd),
    /// Torsion-free abelian groups of rank one and their sums.
    #[command(subcommand)]
    Tfab(TfabCmd),
}

#[derive(Args)]
struct SteinerFlags {
    #[arg(long)]
    k: usize,
    #[arg(long)]
    n: usize,
}

#[derive(Subcommand)]
enum SteinerCmd {
    /// Free completion of a partial system read from JSON.
    Complete {
        #[command(flatten)]
        params: SteinerFlags,
        #[arg(long, default_value_t = 1)]
        stages: usize,
        #[arg(long = "in")]
        input: PathBuf,
        /// Also write the completion as Graphviz.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Chain, bound and obstruction for the Steiner construction.
    CpWitness {
        #[command(flatten)]
        params: SteinerFlags,
        #[arg(long, default_value_t = 2)]
        lmax: usize,
        #[arg(long, default_value_t = steiner::CP_STAGES)]
        stages: usize,
        /// Check chain step `l` backwards (seeded fault).
        #[arg(long)]
        inject_chain_fault: Option<usize>,
    },
    /// Checks an HF-order, given as text or a file holding it.
    VerifyHf {
        #[command(flatten)]
        params: SteinerFlags,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        order: String,
    },
}

#[derive(Subcommand)]
enum NgonCmd {
    CpWitness {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        lmax: usize,
        #[arg(long, default_value_t = ngon::CP_STAGES)]
        stages: usize,
        #[arg(long)]
        inject_chain_fault: Option<usize>,
        /// Write the ambient configuration as Graphviz.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum PlaneCmd {
    /// Stage sizes of the free completion of a Hall configuration.
    Hall {
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 2)]
        stages: usize,
    },
    /// Canonical basis for a finite generating configuration, with the
    /// re-completion check.
    Canonicalize {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 8)]
        budget: usize,
        #[arg(long)]
        dot: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum CyclicCmd {
    CpWitness {
        #[arg(long)]
        order: Order,
        #[arg(long, default_value_t = 2)]
        lmax: usize,
        #[arg(long, default_value_t = 12)]
        length_budget: u64,
        #[arg(long)]
        inject_chain_fault: Option<usize>,
    },
}

#[derive(Subcommand)]
enum TfabCmd {
    CpWitness {
        #[arg(long = "char")]
        chi: Characteristic,
        #[arg(long, default_value_t = 2)]
        p: u64,
        #[arg(long, default_value_t = 6)]
        lmax: usize,
        #[arg(long, default_value_t = 64)]
        height_budget: usize,
        #[arg(long)]
        inject_chain_fault: Option<usize>,
    },
}

/// Report for commands that are not CP witnesses.
#[derive(Serialize)]
struct CommandReport {
    schema: &'static str,
    command: String,
    config: Value,
    verdict: Outcome,
    #[serde(skip_serializing_if = "Option::is_none")]
    first_failure: Option<String>,
    result: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    timing: Option<Timing>,
}

enum Failure {
    Usage(String),
    Budget(String),
    Io(String),
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::BudgetExhausted(m) => Failure::Budget(m),
            HarnessError::Unsupported(m) | HarnessError::Adapter(m) => Failure::Usage(m),
        }
    }
}

impl From<PlaneError> for Failure {
    fn from(e: PlaneError) -> Self {
        match e {
            PlaneError::BudgetExhausted(_) => Failure::Budget(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

fn read(path: &PathBuf) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn read_structure(path: &PathBuf) -> Result<IncidenceStructure, Failure> {
    IncidenceStructure::from_json(&read(path)?).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn write(path: &PathBuf, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn steiner_params(f: &SteinerFlags) -> Result<SteinerParams, Failure> {
    SteinerParams::new(f.k, f.n).map_err(|e| Failure::Usage(e.to_string()))
}

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

enum Output {
    Cp(CpWitnessReport),
    Command(CommandReport),
}

fn command(name: &str, config: Value, ok: bool, first_failure: Option<String>, result: Value) -> Output {
    Output::Command(CommandReport {
        schema: SCHEMA,
        command: name.to_string(),
        config,
        verdict: Outcome::from_bool(ok),
        first_failure: if ok { None } else { first_failure },
        result,
        timing: None,
    })
}

fn fault(i: Option<usize>) -> Option<harness::ChainFault> {
    i.map(|index| harness::ChainFault { index })
}

fn run(cli: &Cli) -> Result<Output, Failure> {
    let seed = cli.seed;
    Ok(match &cli.domain {
        Domain::Steiner(SteinerCmd::Complete { params, stages, input, dot }) => {
            let p = steiner_params(params)?;
            let a = PartialSteiner::from_structure(p, read_structure(input)?).map_err(usage)?;
            let c = steiner::free_completion(&a, *stages).map_err(usage)?;
            if let Some(d) = dot {
                write(d, &c.structure.to_dot("completion"))?;
            }
            let config = json!({"k": p.k, "n": p.n, "stages": stages, "in": input.display().to_string()});
            command("steiner complete", config, true, None, serde_json::to_value(c.structure.to_json_value()).unwrap_or(Value::Null))
        }
        Domain::Steiner(SteinerCmd::CpWitness { params, lmax, stages, inject_chain_fault }) => {
            steiner_params(params)?;
            Output::Cp(harness::steiner_cp_report(params.k, params.n, *lmax, *stages, seed, fault(*inject_chain_fault))?)
        }
        Domain::Steiner(SteinerCmd::VerifyHf { params, input, order }) => {
            let p = steiner_params(params)?;
            let s = read_structure(input)?;
            let path = PathBuf::from(order);
            let text = if path.is_file() { read(&path)? } else { order.clone() };
            let o: HfOrder = text.trim().parse().map_err(usage)?;
            let v = hf::verify_hf_order(&s, &o, p.criterion()).map_err(usage)?;
            let config = json!({"k": p.k, "n": p.n, "in": input.display().to_string(), "order": o.render()});
            let first = v.first_failure.map(|i| format!("HfOrder at tuple {i}"));
            command("steiner verify-hf", config, v.valid, first, serde_json::to_value(&v).unwrap_or(Value::Null))
        }
        Domain::Ngon(NgonCmd::CpWitness { n, lmax, stages, inject_chain_fault, dot }) => {
            if n % 2 == 0 {
                return Err(Failure::Usage(NGonError::UnsupportedParity(*n).to_string()));
            }
            let r = harness::ngon_cp_report(*n, *lmax, *stages, seed, fault(*inject_chain_fault))?;
            if let Some(d) = dot {
                let w = ngon::build_ngon_cp_witness(*n, *lmax, *stages).map_err(usage)?;
                write(d, &w.s().to_dot(&format!("ngon n={n}")))?;
            }
            Output::Cp(r)
        }
        Domain::Plane(PlaneCmd::Hall { k, stages }) => {
            let h = plane::hall_config(*k)?;
            let counts = plane::stage_counts(&h, *stages)?;
            command("plane hall", json!({"k": k, "stages": stages}), true, None, json!({"stage_sizes": counts}))
        }
        Domain::Plane(PlaneCmd::Canonicalize { input, budget, dot }) => {
            let g = read_structure(input)?;
            let order = plane::derive_order(&g)?;
            let c = plane::canonicalize(&g, &order, *budget)?;
            let t = plane::truncation(&g)?;
            let rep = plane::verify_recompletion(&c, &t.structure, 2 * budget)?;
            if let Some(d) = dot {
                write(d, &c.frame()?.to_dot("canonical frame"))?;
            }
            let config = json!({"in": input.display().to_string(), "budget": budget});
            let result = json!({
                "order": order,
                "basis": c.basis(),
                "steps": c.steps,
                "recompletion": rep,
            });
            let first = if !rep.frame_is_clean {
                "frame incidences"
            } else if !rep.round_trip {
                "round trip"
            } else {
                "back-and-forth equivalence"
            };
            command("plane canonicalize", config, rep.passed(), Some(first.into()), result)
        }
        Domain::Cyclic(CyclicCmd::CpWitness { order, lmax, length_budget, inject_chain_fault }) => {
            Output::Cp(harness::cyclic_cp_report(*order, *lmax, *length_budget, seed, fault(*inject_chain_fault))?)
        }
        Domain::Tfab(TfabCmd::CpWitness { chi, p, lmax, height_budget, inject_chain_fault }) => {
            Output::Cp(harness::tfab_cp_report(chi, *p, *lmax, *height_budget, seed, fault(*inject_chain_fault))?)
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let out = match run(&cli) {
        Ok(o) => o,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            return ExitCode::from(2);
        }
        Err(Failure::Io(m)) => {
            eprintln!("error: {m}");
            return ExitCode::from(2);
        }
        Err(Failure::Budget(m)) => {
            eprintln!("budget exhausted: {m}");
            return ExitCode::from(3);
        }
    };
    let timing = (!cli.no_timing).then(|| Timing { total_ms: start.elapsed().as_millis() });
    let (text, passed, first) = match out {
        Output::Cp(mut r) => {
            r.timing = timing;
            let first = r.first_failing_check().map(|c| match c.index {
                Some(i) => format!("{} at {i}", c.clause),
                None => c.clause.to_string(),
            });
            (r.to_json(true), r.passed(), first)
        }
        Output::Command(mut r) => {
            r.timing = timing;
            let text = serde_json::to_string_pretty(&r).expect("report serializes");
            (text, r.verdict == Outcome::Pass, r.first_failure.clone())
        }
    };
    match &cli.out {
        Some(p) => {
            if let Err(Failure::Io(m)) = write(p, &(text + "\n")) {
                eprintln!("error: {m}");
                return ExitCode::from(2);
            }
        }
        None => println!("{text}"),
    }
    if passed {
        ExitCode::SUCCESS
    } else {
        eprintln!("FAIL: first failing clause: {}", first.unwrap_or_default());
        ExitCode::from(1)
    }
}
