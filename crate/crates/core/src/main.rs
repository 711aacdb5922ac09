//! Command-line front end for the lab: code construction and verification,
//! the reduction, small exact solvers, center verification, the end-to-end
//! gap experiment, and the emission benchmark.
//!
//! Exit codes: 0 when the requested check passes (or the command simply
//! succeeds), 1 when a verification or experiment fails its assertion, 2 on
//! usage, IO, or budget errors.

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use cslab::bitstr::BitString;
use cslab::codegen::{CodeParams, SelectionCode, DEFAULT_RANDOM_RETRIES, FULL_ENUM_MAX_BITS};
use cslab::graphs::CliqueInstance;
use cslab::harness::{
    bench, gap_experiment, render_bench_table, BenchConfig, HarnessConfig, Verdict,
};
use cslab::reducer::{
    instance_stats, reduce, InstanceFile, ReduceBudget, ReduceMode,
};
use cslab::solvers::{
    branch_decide_with_budget, branch_opt, brute_force_opt, max_distance_rows, Decision,
    DEFAULT_BRUTE_CAP_BITS,
};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

#[derive(Parser)]
#[command(name = "cslab", version, about = "Closest String reduction laboratory")]
struct Cli {
    /// Output rendering for reports and results.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Selection-code operations.
    #[command(subcommand)]
    Code(CodeCommand),
    /// Compile a clique instance into a Closest String instance.
    Reduce(ReduceArgs),
    /// Solve a small instance exactly.
    Solve(SolveArgs),
    /// Evaluate a candidate center against an instance.
    VerifyCenter(VerifyCenterArgs),
    /// Run the full reduce-and-certify experiment on one graph.
    GapTest(GapTestArgs),
    /// Time full reductions over growing k.
    Bench(BenchArgs),
}

#[derive(Subcommand)]
enum CodeCommand {
    /// Construct a code and write the code file.
    Gen(CodeGenArgs),
    /// Check a code file against the construction contract.
    Verify(CodeVerifyArgs),
}

/// Named profile or colon-separated `block_len:alpha:beta:delta`.
#[derive(Clone)]
struct Profile(CodeParams);

impl FromStr for Profile {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "desk16" => return Ok(Profile(CodeParams::desk16())),
            "desk20" => return Ok(Profile(CodeParams::desk20())),
            "classic100" => return Ok(Profile(CodeParams::classic(100))),
            _ => {}
        }
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 4 {
            return Err(format!(
                "unknown profile {s:?}; use desk16, desk20, classic100, or block_len:alpha:beta:delta"
            ));
        }
        let mut nums = [0usize; 4];
        for (slot, part) in nums.iter_mut().zip(&parts) {
            *slot = part.parse().map_err(|_| format!("bad integer {part:?} in profile"))?;
        }
        Ok(Profile(CodeParams::new(nums[0], nums[1], nums[2], nums[3])))
    }
}

#[derive(Args)]
struct CodeGenArgs {
    /// Number of members to construct.
    #[arg(short, long)]
    n: usize,
    #[arg(long, default_value = "desk16")]
    profile: Profile,
    /// full: deterministic enumeration (small block lengths);
    /// random: seeded sampling; auto picks by block length.
    #[arg(long, default_value = "auto")]
    mode: GenMode,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_RANDOM_RETRIES)]
    retries: usize,
    /// Output path; stdout when omitted.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GenMode {
    Auto,
    Full,
    Random,
}

#[derive(Args)]
struct CodeVerifyArgs {
    /// Code file produced by `code gen`.
    #[arg(long)]
    code: PathBuf,
    /// Expected member count; defaults to the file's own count.
    #[arg(short, long)]
    n: Option<usize>,
}

#[derive(Args)]
struct ReduceArgs {
    /// Graph file: header `n m k`, then 1-indexed edge lines.
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, default_value = "desk16")]
    profile: Profile,
    #[arg(long, value_enum, default_value_t = ReduceKind::Full)]
    mode: ReduceKind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    sel_samples: usize,
    #[arg(long, default_value_t = 200)]
    adj_samples: usize,
    /// Probe center (0/1 text) whose adversarial constraints the sample must
    /// include.
    #[arg(long)]
    probe: Option<String>,
    #[arg(long, default_value_t = ReduceBudget::default().max_constraints)]
    max_constraints: u64,
    /// Instance output path; stdout when omitted.
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Sidecar manifest path.
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReduceKind {
    Full,
    Sampled,
}

#[derive(Args)]
struct SolveArgs {
    /// Instance file: header `N L d`, then one constraint per line.
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, value_enum)]
    algo: Algo,
    /// Decision distance for `--algo branch`; omit to optimize.
    #[arg(long)]
    d: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_BRUTE_CAP_BITS)]
    cap_bits: usize,
    /// Node budget for the branching search.
    #[arg(long)]
    max_nodes: Option<u64>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Algo {
    Brute,
    Branch,
}

#[derive(Args)]
struct VerifyCenterArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Center as 0/1 text.
    #[arg(long, conflicts_with = "center_file")]
    center: Option<String>,
    /// File holding the center as 0/1 text.
    #[arg(long)]
    center_file: Option<PathBuf>,
}

#[derive(Args)]
struct GapTestArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, default_value = "desk16")]
    profile: Profile,
    /// Also write the report here.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Append the non-canonical timing footer.
    #[arg(long)]
    timings: bool,
    #[arg(long, default_value_t = ReduceBudget::default().max_constraints)]
    max_constraints: u64,
    #[arg(long, default_value_t = HarnessConfig::default().tuple_cap)]
    tuple_cap: u64,
    #[arg(long, default_value_t = HarnessConfig::default().clique_cap)]
    clique_cap: u64,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value = "desk16")]
    profile: Profile,
    #[arg(long, default_value_t = 6)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    k_min: usize,
    #[arg(long, default_value_t = 4)]
    k_max: usize,
    #[arg(long, default_value_t = 0.3)]
    prob: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = ReduceBudget::default().max_constraints)]
    max_constraints: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Result<bool> {
    match &cli.command {
        Command::Code(CodeCommand::Gen(args)) => code_gen(args),
        Command::Code(CodeCommand::Verify(args)) => code_verify(args, cli.format),
        Command::Reduce(args) => run_reduce(args),
        Command::Solve(args) => solve(args, cli.format),
        Command::VerifyCenter(args) => verify_center(args, cli.format),
        Command::GapTest(args) => gap_test(args, cli.format),
        Command::Bench(args) => run_bench(args, cli.format),
    }
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write_output(path: Option<&PathBuf>, content: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, content).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn code_gen(args: &CodeGenArgs) -> Result<bool> {
    let params = args.profile.0;
    let use_full = match args.mode {
        GenMode::Full => true,
        GenMode::Random => false,
        GenMode::Auto => params.block_len <= FULL_ENUM_MAX_BITS,
    };
    let code = if use_full {
        SelectionCode::greedy(args.n, &params)?
    } else {
        SelectionCode::randomized(args.n, &params, args.seed, args.retries)?
    };
    write_output(args.out.as_ref(), &code.render())?;
    Ok(true)
}

fn code_verify(args: &CodeVerifyArgs, format: Format) -> Result<bool> {
    let code = SelectionCode::parse(&read_to_string(&args.code)?)?;
    let expected = args.n.unwrap_or_else(|| code.len());
    let params_report = code.params().validate();
    let outcome = if params_report.passed() {
        code.verify(expected).map_err(|v| v.to_string())
    } else {
        Err(format!("invalid parameter profile: {params_report}"))
    };
    let pass = outcome.is_ok();
    match format {
        Format::Json => println!(
            "{}",
            serde_json::json!({
                "pass": pass,
                "members": code.len(),
                "expected": expected,
                "violation": outcome.err(),
            })
        ),
        Format::Text => match &outcome {
            Ok(()) => println!("code: pass ({} members)", code.len()),
            Err(v) => println!("code: FAIL {v}"),
        },
    }
    Ok(pass)
}

fn parse_reduce_mode(args: &ReduceArgs) -> Result<ReduceMode> {
    Ok(match args.mode {
        ReduceKind::Full => ReduceMode::Full,
        ReduceKind::Sampled => {
            let probe = match &args.probe {
                Some(text) => {
                    Some(text.parse::<BitString>().map_err(|e| anyhow!("bad probe: {e}"))?)
                }
                None => None,
            };
            ReduceMode::Sampled {
                seed: args.seed,
                sel_samples: args.sel_samples,
                adj_samples: args.adj_samples,
                probe,
            }
        }
    })
}

fn run_reduce(args: &ReduceArgs) -> Result<bool> {
    let graph = CliqueInstance::parse(&read_to_string(&args.graph)?)?;
    let mode = parse_reduce_mode(args)?;
    let budget = ReduceBudget { max_constraints: args.max_constraints };
    let reduction = reduce(&graph, &args.profile.0, mode, &budget)?;
    let inst = &reduction.instance;

    match &args.out {
        Some(p) => {
            let file = fs::File::create(p).with_context(|| format!("creating {}", p.display()))?;
            let mut w = std::io::BufWriter::new(file);
            inst.write_text(&mut w)?;
        }
        None => {
            let mut buf = Vec::new();
            inst.write_text(&mut buf)?;
            print!("{}", String::from_utf8_lossy(&buf));
        }
    }
    if let Some(p) = &args.manifest {
        fs::write(p, inst.render_manifest()).with_context(|| format!("writing {}", p.display()))?;
    }
    eprintln!("{}", instance_stats(inst));
    Ok(true)
}

fn solve(args: &SolveArgs, format: Format) -> Result<bool> {
    let file = InstanceFile::parse(&read_to_string(&args.instance)?)?;
    match (args.algo, args.d) {
        (Algo::Brute, _) => {
            let result = brute_force_opt(&file.strings, args.cap_bits)?;
            match format {
                Format::Json => println!(
                    "{}",
                    serde_json::json!({
                        "optimum": result.optimum,
                        "witness": result.witness.to_string(),
                        "nodes": result.nodes,
                    })
                ),
                Format::Text => print!("{}", result.render()),
            }
        }
        (Algo::Branch, Some(d)) => {
            let (decision, nodes) = branch_decide_with_budget(&file.strings, d, args.max_nodes)?;
            match format {
                Format::Json => println!(
                    "{}",
                    serde_json::json!({
                        "d": d,
                        "decision": if decision.is_yes() { "yes" } else { "no" },
                        "witness": match &decision {
                            Decision::Yes(w) => Some(w.to_string()),
                            Decision::No => None,
                        },
                        "nodes": nodes,
                    })
                ),
                Format::Text => match &decision {
                    Decision::Yes(w) => println!("yes\nwitness: {w}\nnodes: {nodes}"),
                    Decision::No => println!("no\nnodes: {nodes}"),
                },
            }
        }
        (Algo::Branch, None) => {
            let result = branch_opt(&file.strings)?;
            match format {
                Format::Json => println!(
                    "{}",
                    serde_json::json!({
                        "optimum": result.optimum,
                        "witness": result.witness.to_string(),
                        "nodes": result.nodes,
                    })
                ),
                Format::Text => print!("{}", result.render()),
            }
        }
    }
    Ok(true)
}

fn verify_center(args: &VerifyCenterArgs, format: Format) -> Result<bool> {
    let file = InstanceFile::parse(&read_to_string(&args.instance)?)?;
    let center_text = match (&args.center, &args.center_file) {
        (Some(text), _) => text.clone(),
        (None, Some(path)) => read_to_string(path)?.trim().to_string(),
        (None, None) => bail!("provide --center or --center-file"),
    };
    let center: BitString = center_text.parse().map_err(|e| anyhow!("bad center: {e}"))?;
    if center.len() != file.total_len {
        bail!("center has length {}; instance needs {}", center.len(), file.total_len);
    }
    if file.strings.is_empty() {
        bail!("instance has no constraints");
    }
    let (value, argmax) = max_distance_rows(&center, &file.strings);
    let pass = value <= file.d;
    match format {
        Format::Json => println!(
            "{}",
            serde_json::json!({
                "max_distance": value,
                "argmax_row": argmax,
                "d": file.d,
                "pass": pass,
            })
        ),
        Format::Text => println!(
            "max_distance: {value}\nargmax_row: {argmax}\nd: {}\nresult: {}",
            file.d,
            if pass { "pass" } else { "FAIL" }
        ),
    }
    Ok(pass)
}

fn gap_test(args: &GapTestArgs, format: Format) -> Result<bool> {
    let graph = CliqueInstance::parse(&read_to_string(&args.graph)?)?;
    let config = HarnessConfig {
        reduce_budget: ReduceBudget { max_constraints: args.max_constraints },
        tuple_cap: args.tuple_cap,
        clique_cap: args.clique_cap,
    };
    let report = gap_experiment(&graph, &args.profile.0, &config)?;
    let rendered = match format {
        Format::Json => format!("{}\n", serde_json::to_string_pretty(&report)?),
        Format::Text => report.render(args.timings),
    };
    print!("{rendered}");
    if let Some(p) = &args.report {
        fs::write(p, report.canonical_text())
            .with_context(|| format!("writing {}", p.display()))?;
    }
    match report.verdict {
        Verdict::Pass => Ok(true),
        Verdict::Fail => Ok(false),
        Verdict::Incomplete => bail!("experiment incomplete: a stage exceeded its budget"),
    }
}

fn run_bench(args: &BenchArgs, format: Format) -> Result<bool> {
    if args.k_max < args.k_min {
        bail!("k range is empty: {} > {}", args.k_min, args.k_max);
    }
    let config = BenchConfig {
        params: args.profile.0,
        n: args.n,
        ks: (args.k_min..=args.k_max).collect(),
        edge_prob: args.prob,
        seed: args.seed,
        budget: ReduceBudget { max_constraints: args.max_constraints },
    };
    let outcomes = bench(&config);
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&outcomes)?),
        Format::Text => print!("{}", render_bench_table(&outcomes)),
    }
    Ok(true)
}
