//! `srr`: exact service-rate-region computations for binary coded
//! storage, as a batch CLI. JSON in, JSON/markdown/CSV out.
//!
//! Exit codes: 0 success or affirmative verdict, 1 negative verdict
//! (not covered / not a member / a sweep disagreement), 2 invalid
//! input or usage, 3 solver node budget exhausted.

use std::fs;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use srr_core::bounds::{bound_report, hyperplane_inequalities};
use srr_core::construct::{construct_k2, sweep_k2, t_fold_simplex, verify_scheme};
use srr_core::gf2::PointMultiset;
use srr_core::lp::SolveLimits;
use srr_core::ratio::{format_rational, JsonRational};
use srr_core::region::MAX_CAP;
use srr_core::service::{check_coverage, exact_nmin, in_service_region, MAX_NMIN_K};
use srr_core::{Demand, Error, RegionSpec};

#[derive(Parser)]
#[command(
    name = "srr",
    version,
    about = "Exact service-rate-region computations for binary coded storage"
)]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Markdown,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Inspect demand regions: canonical caps, vertices, generators,
    /// membership.
    Region {
        #[command(subcommand)]
        action: RegionAction,
    },
    /// Exact minimum number of servers covering a region, with the
    /// full lower-bound table.
    Nmin(NminArgs),
    /// Lower bounds and hyperplane inequalities of a region.
    Bounds(BoundsArgs),
    /// Build storage schemes and verify them against their regions.
    Construct {
        #[command(subcommand)]
        scheme: ConstructCmd,
    },
    /// Check a design against a whole region or a single demand.
    Check {
        #[command(subcommand)]
        target: CheckCmd,
    },
    /// Verify the two-file construction across a grid of cap triples.
    SweepK2(SweepArgs),
}

#[derive(Subcommand)]
enum RegionAction {
    /// Rewrite the cap table to its monotone subadditive canonical
    /// form (the region itself is unchanged).
    Canonicalize { region: String },
    /// All vertices of the region polytope.
    Vertices { region: String },
    /// The generating set: the non-dominated vertices.
    GenSet {
        region: String,
        /// Keep the cap table as given instead of canonicalizing.
        #[arg(long)]
        no_canonicalize: bool,
    },
    /// Whether a demand vector lies in the region (exit 0 either way).
    Contains { region: String, demand: String },
}

#[derive(Args)]
struct NminArgs {
    region: String,
    /// Keep the cap table as given instead of canonicalizing.
    #[arg(long)]
    no_canonicalize: bool,
    /// Skip integer programs: bounds stop at the LP relaxation and the
    /// exact minimum is not computed.
    #[arg(long)]
    lp_only: bool,
    /// Branch-and-bound node budget (default 1000000; the
    /// SRR_NODE_LIMIT environment variable overrides the default).
    #[arg(long)]
    node_limit: Option<u64>,
}

#[derive(Args)]
struct BoundsArgs {
    region: String,
    /// Keep the cap table as given instead of canonicalizing.
    #[arg(long)]
    no_canonicalize: bool,
    /// Skip the integer hyperplane bound.
    #[arg(long)]
    lp_only: bool,
    /// Branch-and-bound node budget for the integer bound.
    #[arg(long)]
    node_limit: Option<u64>,
}

#[derive(Subcommand)]
enum ConstructCmd {
    /// Optimal two-file scheme for caps (X, Y, Sigma).
    K2 {
        x: u64,
        y: u64,
        sigma: u64,
        /// Certify with the LP bound only (skip the integer bound).
        #[arg(long)]
        lp_only: bool,
        #[arg(long)]
        node_limit: Option<u64>,
    },
    /// t-fold simplex scheme on k files, verified against the uniform
    /// region with caps t * 2^(k-1).
    Simplex {
        k: usize,
        t: u64,
        /// Certify with the LP bound only (skip the integer bound).
        #[arg(long)]
        lp_only: bool,
        #[arg(long)]
        node_limit: Option<u64>,
    },
}

#[derive(Subcommand)]
enum CheckCmd {
    /// Does the design serve every demand of the region?
    Covers { design: String, region: String },
    /// Does the design serve this one demand?
    Member { design: String, demand: String },
}

#[derive(Args)]
struct SweepArgs {
    /// Largest per-file cap in the grid.
    #[arg(long, default_value_t = 4)]
    max: u64,
    #[arg(long)]
    node_limit: Option<u64>,
}

/// A failed run: message to stderr, nonzero exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        let code = match err {
            Error::NodeLimitExceeded { .. } => 3,
            _ => 2,
        };
        Failure {
            code,
            message: err.to_string(),
        }
    }
}

/// Successful run: payload for stdout plus the verdict exit code.
struct Output {
    payload: String,
    code: u8,
}

impl Output {
    fn ok(payload: String) -> Self {
        Output { payload, code: 0 }
    }

    fn verdict(payload: String, affirmative: bool) -> Self {
        Output {
            payload,
            code: if affirmative { 0 } else { 1 },
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(output) => {
            println!("{}", output.payload);
            ExitCode::from(output.code)
        }
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

fn run(cli: Cli) -> Result<Output, Failure> {
    let format = cli.format;
    match cli.command {
        Command::Region { action } => run_region(action, format),
        Command::Nmin(args) => run_nmin(args, format),
        Command::Bounds(args) => run_bounds(args, format),
        Command::Construct { scheme } => run_construct(scheme, format),
        Command::Check { target } => run_check(target, format),
        Command::SweepK2(args) => run_sweep(args, format),
    }
}

// ---------- input handling ----------

/// Inline JSON (leading '{') or the contents of a file at the path.
fn load_text(arg: &str) -> Result<String, Failure> {
    if arg.trim_start().starts_with('{') {
        return Ok(arg.to_string());
    }
    fs::read_to_string(arg).map_err(|e| Failure::input(format!("cannot read {arg}: {e}")))
}

fn parse_region(arg: &str) -> Result<RegionSpec, Failure> {
    serde_json::from_str(&load_text(arg)?)
        .map_err(|e| Failure::input(format!("invalid region: {e}")))
}

fn parse_demand(arg: &str) -> Result<Demand, Failure> {
    serde_json::from_str(&load_text(arg)?)
        .map_err(|e| Failure::input(format!("invalid demand: {e}")))
}

fn parse_design(arg: &str) -> Result<PointMultiset, Failure> {
    serde_json::from_str(&load_text(arg)?)
        .map_err(|e| Failure::input(format!("invalid design: {e}")))
}

/// Node budget: flag, then SRR_NODE_LIMIT, then the default.
fn solve_limits(flag: Option<u64>) -> Result<SolveLimits, Failure> {
    if let Some(n) = flag {
        return Ok(SolveLimits::with_max_nodes(n));
    }
    match std::env::var("SRR_NODE_LIMIT") {
        Ok(raw) => raw
            .parse::<u64>()
            .map(SolveLimits::with_max_nodes)
            .map_err(|_| {
                Failure::input(format!(
                    "SRR_NODE_LIMIT must be a nonnegative integer, got {raw:?}"
                ))
            }),
        Err(_) => Ok(SolveLimits::default()),
    }
}

// ---------- output handling ----------

fn pretty(value: &Value) -> String {
    serde_json::to_string_pretty(value).expect("JSON values always serialize")
}

fn to_value<T: serde::Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("report types always serialize")
}

fn unsupported(format: &str, subcommand: &str) -> Failure {
    Failure::input(format!(
        "{format} output is not supported for `{subcommand}`"
    ))
}

fn demand_row(demand: &Demand) -> Vec<Value> {
    (1..=demand.len())
        .map(|i| to_value(&JsonRational(demand.rate(i).clone())))
        .collect()
}

fn demand_csv(demand: &Demand) -> String {
    (1..=demand.len())
        .map(|i| format_rational(demand.rate(i)))
        .collect::<Vec<_>>()
        .join(",")
}

fn csv_header(k: usize) -> String {
    (1..=k)
        .map(|i| format!("lambda_{i}"))
        .collect::<Vec<_>>()
        .join(",")
}

fn caps_equal(a: &RegionSpec, b: &RegionSpec) -> bool {
    a.k() == b.k() && a.masks().all(|m| a.cap(m) == b.cap(m))
}

fn design_inline(design: &PointMultiset) -> String {
    let parts: Vec<String> = design
        .support()
        .map(|(j, count)| format!("n_{j} = {count}"))
        .collect();
    if parts.is_empty() {
        "empty".to_string()
    } else {
        parts.join(", ")
    }
}

// ---------- subcommands ----------

fn run_region(action: RegionAction, format: Format) -> Result<Output, Failure> {
    match action {
        RegionAction::Canonicalize { region } => {
            if format != Format::Json {
                return Err(unsupported("non-JSON", "region canonicalize"));
            }
            let input = parse_region(&region)?;
            let canonical = input.canonicalize();
            let changed = !caps_equal(&input, &canonical);
            Ok(Output::ok(pretty(&json!({
                "input": to_value(&input),
                "canonical": to_value(&canonical),
                "changed": changed,
            }))))
        }
        RegionAction::Vertices { region } => {
            let input = parse_region(&region)?;
            let vertices = input.vertices().map_err(Failure::from)?;
            match format {
                Format::Json => Ok(Output::ok(pretty(&json!({
                    "k": input.k(),
                    "vertices": vertices.iter().map(demand_row).collect::<Vec<_>>(),
                })))),
                Format::Csv => {
                    let mut lines = vec![csv_header(input.k())];
                    lines.extend(vertices.iter().map(demand_csv));
                    Ok(Output::ok(lines.join("\n")))
                }
                Format::Markdown => Err(unsupported("markdown", "region vertices")),
            }
        }
        RegionAction::GenSet {
            region,
            no_canonicalize,
        } => {
            let input = parse_region(&region)?;
            let working = if no_canonicalize {
                input.clone()
            } else {
                input.canonicalize()
            };
            let generators = working.generating_set().map_err(Failure::from)?;
            match format {
                Format::Json => Ok(Output::ok(pretty(&json!({
                    "input": to_value(&input),
                    "canonical": to_value(&working),
                    "generating_set": generators.iter().map(demand_row).collect::<Vec<_>>(),
                })))),
                Format::Csv => {
                    let mut lines = vec![csv_header(working.k())];
                    lines.extend(generators.iter().map(demand_csv));
                    Ok(Output::ok(lines.join("\n")))
                }
                Format::Markdown => Err(unsupported("markdown", "region gen-set")),
            }
        }
        RegionAction::Contains { region, demand } => {
            if format != Format::Json {
                return Err(unsupported("non-JSON", "region contains"));
            }
            let input = parse_region(&region)?;
            let demand = parse_demand(&demand)?;
            let contains = input.contains(&demand).map_err(Failure::from)?;
            Ok(Output::ok(pretty(&json!({ "contains": contains }))))
        }
    }
}

fn run_nmin(args: NminArgs, format: Format) -> Result<Output, Failure> {
    let input = parse_region(&args.region)?;
    let working = if args.no_canonicalize {
        input.clone()
    } else {
        input.canonicalize()
    };
    let limits = solve_limits(args.node_limit)?;
    let report = bound_report(&working, !args.lp_only, &limits).map_err(Failure::from)?;
    let (exact, notice) = if args.lp_only {
        (None, Some("exact minimum skipped: --lp-only".to_string()))
    } else if working.k() > MAX_NMIN_K {
        (
            None,
            Some(format!(
                "exact minimum skipped: k = {} exceeds the supported {MAX_NMIN_K}",
                working.k()
            )),
        )
    } else {
        (Some(exact_nmin(&working, &limits).map_err(Failure::from)?), None)
    };

    match format {
        Format::Json => {
            let mut body = json!({
                "input": to_value(&input),
                "canonical": to_value(&working),
                "bounds": to_value(&report),
                "exact": exact.as_ref().map(to_value),
            });
            if let Some(n) = &notice {
                body["notice"] = json!(n);
            }
            Ok(Output::ok(pretty(&body)))
        }
        Format::Markdown => {
            let mut out = String::from("# Minimum servers\n\n");
            out.push_str(&report.to_markdown());
            out.push('\n');
            match (&exact, &notice) {
                (Some(result), _) => {
                    out.push_str(&format!("exact minimum: {}\n", result.size));
                    out.push_str(&format!("design: {}\n", design_inline(&result.design)));
                }
                (None, Some(n)) => out.push_str(&format!("{n}\n")),
                (None, None) => {}
            }
            Ok(Output::ok(out.trim_end().to_string()))
        }
        Format::Csv => Err(unsupported("csv", "nmin")),
    }
}

fn run_bounds(args: BoundsArgs, format: Format) -> Result<Output, Failure> {
    let input = parse_region(&args.region)?;
    let working = if args.no_canonicalize {
        input.clone()
    } else {
        input.canonicalize()
    };
    let limits = solve_limits(args.node_limit)?;
    let inequalities = hyperplane_inequalities(&working).map_err(Failure::from)?;
    let report = bound_report(&working, !args.lp_only, &limits).map_err(Failure::from)?;
    match format {
        Format::Json => Ok(Output::ok(pretty(&json!({
            "input": to_value(&input),
            "canonical": to_value(&working),
            "inequalities": to_value(&inequalities),
            "report": to_value(&report),
        })))),
        Format::Markdown => {
            let mut out = String::from("# Lower bounds\n\nHyperplane inequalities:\n\n");
            for ineq in &inequalities {
                out.push_str(&format!("- {ineq}\n"));
            }
            out.push('\n');
            out.push_str(&report.to_markdown());
            Ok(Output::ok(out.trim_end().to_string()))
        }
        Format::Csv => Err(unsupported("csv", "bounds")),
    }
}

fn run_construct(scheme: ConstructCmd, format: Format) -> Result<Output, Failure> {
    let (recipe, region, lp_only, node_limit) = match scheme {
        ConstructCmd::K2 {
            x,
            y,
            sigma,
            lp_only,
            node_limit,
        } => {
            let recipe = construct_k2(x, y, sigma).map_err(Failure::from)?;
            let region = RegionSpec::new(2, vec![x, y, sigma]).map_err(Failure::from)?;
            (recipe, region, lp_only, node_limit)
        }
        ConstructCmd::Simplex {
            k,
            t,
            lp_only,
            node_limit,
        } => {
            let recipe = t_fold_simplex(k, t).map_err(Failure::from)?;
            let cap = u128::from(t) << (k - 1);
            if cap > u128::from(MAX_CAP) {
                return Err(Failure::input(format!(
                    "t * 2^(k-1) = {cap} exceeds the supported cap {MAX_CAP}"
                )));
            }
            let region = RegionSpec::from_fn(k, |_| cap as u64).map_err(Failure::from)?;
            (recipe, region, lp_only, node_limit)
        }
    };
    let limits = solve_limits(node_limit)?;
    let report = verify_scheme(&recipe, &region, !lp_only, &limits).map_err(Failure::from)?;
    let covered = report.coverage.covered;
    match format {
        Format::Json => Ok(Output::verdict(
            pretty(&json!({
                "recipe": to_value(&recipe),
                "region": to_value(&region),
                "report": to_value(&report),
            })),
            covered,
        )),
        Format::Markdown => {
            let mut out = String::from("# Scheme\n\n");
            out.push_str(&format!("size: {}\n", recipe.size()));
            out.push_str(&format!("design: {}\n", design_inline(recipe.multiset())));
            out.push_str(&format!("covered: {}\n", if covered { "yes" } else { "no" }));
            out.push_str(&format!(
                "certified optimal: {}\n\n",
                if report.certified_optimal { "yes" } else { "no" }
            ));
            out.push_str(&report.bounds.to_markdown());
            Ok(Output::verdict(out.trim_end().to_string(), covered))
        }
        Format::Csv => Err(unsupported("csv", "construct")),
    }
}

fn run_check(target: CheckCmd, format: Format) -> Result<Output, Failure> {
    if format != Format::Json {
        return Err(unsupported("non-JSON", "check"));
    }
    match target {
        CheckCmd::Covers { design, region } => {
            let design = parse_design(&design)?;
            let region = parse_region(&region)?;
            let coverage = check_coverage(&design, &region).map_err(Failure::from)?;
            let covered = coverage.covered;
            Ok(Output::verdict(pretty(&to_value(&coverage)), covered))
        }
        CheckCmd::Member { design, demand } => {
            let design = parse_design(&design)?;
            let demand = parse_demand(&demand)?;
            let witness = in_service_region(&design, &demand).map_err(Failure::from)?;
            let member = witness.is_some();
            Ok(Output::verdict(
                pretty(&json!({
                    "member": member,
                    "allocation": witness.as_ref().map(to_value),
                })),
                member,
            ))
        }
    }
}

fn run_sweep(args: SweepArgs, format: Format) -> Result<Output, Failure> {
    let limits = solve_limits(args.node_limit)?;
    let rows = sweep_k2(args.max, &limits).map_err(Failure::from)?;
    let all_agree = rows.iter().all(|r| r.agrees);
    match format {
        Format::Json => Ok(Output::verdict(
            pretty(&json!({
                "max": args.max,
                "all_agree": all_agree,
                "rows": to_value(&rows),
            })),
            all_agree,
        )),
        Format::Csv => {
            let mut lines =
                vec!["x,y,sigma,size,formula,nmin,averaging,covered,agrees".to_string()];
            lines.extend(rows.iter().map(|r| {
                format!(
                    "{},{},{},{},{},{},{},{},{}",
                    r.x, r.y, r.sigma, r.size, r.formula, r.nmin, r.averaging, r.covered, r.agrees
                )
            }));
            Ok(Output::verdict(lines.join("\n"), all_agree))
        }
        Format::Markdown => {
            let mut out = String::from(
                "| x | y | sigma | size | formula | nmin | averaging | covered | agrees |\n\
                 |---|---|---|---|---|---|---|---|---|\n",
            );
            for r in &rows {
                out.push_str(&format!(
                    "| {} | {} | {} | {} | {} | {} | {} | {} | {} |\n",
                    r.x, r.y, r.sigma, r.size, r.formula, r.nmin, r.averaging, r.covered, r.agrees
                ));
            }
            Ok(Output::verdict(out.trim_end().to_string(), all_agree))
        }
    }
}
