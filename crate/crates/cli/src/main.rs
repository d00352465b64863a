//! `resilsim` command-line front end.
//!
//! Exit codes: 0 success (or complete solution), 1 incomplete solution or
//! unmet scenario expectation, 2 input error.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use resilsim::engine::{run, SimConfig, SimReport, Trace};
use resilsim::patterns::{catalog, Architecture, CatalogEntry, Strategy};
use resilsim::scenarios::{self, Scenario};

#[derive(Parser)]
#[command(name = "resilsim", version, about = "Resilience design-pattern simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a configuration, for one seed or a range of seeds.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Check a configuration's solution for completeness.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Recompute the report from a stored trace.
    Metrics {
        trace: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Print the pattern catalog.
    Catalog {
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Built-in case studies.
    Scenario {
        #[command(subcommand)]
        action: ScenarioAction,
    },
}

#[derive(Subcommand)]
enum ScenarioAction {
    /// List the built-in scenarios.
    List,
    /// Print a scenario's configuration document.
    Export { name: String },
    /// Run a scenario and check its expectations.
    Run {
        name: String,
        #[command(flatten)]
        opts: RunOpts,
    },
}

#[derive(Args)]
struct RunOpts {
    /// Seed override; falls back to the configuration's seed.
    #[arg(long, env = "RESILSIM_SEED", conflicts_with = "seeds")]
    seed: Option<u64>,
    /// Inclusive seed range, e.g. `1..100`.
    #[arg(long, value_parser = parse_seeds)]
    seeds: Option<SeedRange>,
    /// Directory for trace and report files.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Structured,
}

#[derive(Clone, Copy, Debug)]
struct SeedRange(u64, u64);

fn parse_seeds(s: &str) -> Result<SeedRange, String> {
    let (a, b) = s.split_once("..").ok_or("expected A..B")?;
    let a: u64 = a.trim().parse().map_err(|_| format!("bad seed `{a}`"))?;
    let b: u64 = b.trim().trim_start_matches('=').parse().map_err(|_| format!("bad seed `{b}`"))?;
    if b < a {
        return Err(format!("empty range {a}..{b}"));
    }
    Ok(SeedRange(a, b))
}

/// An error that maps to exit status 2.
#[derive(Debug)]
struct InputError(String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

fn input<E: std::fmt::Display>(context: &str) -> impl FnOnce(E) -> anyhow::Error + '_ {
    move |e| InputError(format!("{context}: {e}")).into()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = if e.downcast_ref::<InputError>().is_some() { 2 } else { 1 };
            ExitCode::from(code)
        }
    }
}

fn dispatch(command: Command) -> Result<u8> {
    match command {
        Command::Run { config, opts } => {
            let cfg = load_config(&config)?;
            execute(&cfg, &opts)?;
            Ok(0)
        }
        Command::Validate { config } => {
            let cfg = load_config(&config)?;
            print!("{}", cfg.verdict);
            if let Some(line) = cfg.verdict.missing_line() {
                println!("{line}");
            }
            Ok(if cfg.verdict.complete { 0 } else { 1 })
        }
        Command::Metrics { trace, format } => {
            let text = fs::read_to_string(&trace).map_err(input(&trace.display().to_string()))?;
            let trace = Trace::parse(&text).map_err(input("malformed trace"))?;
            print!("{}", render(&SimReport::from_trace(&trace), format));
            Ok(0)
        }
        Command::Catalog { format } => {
            print!("{}", render_catalog(&catalog(), format));
            Ok(0)
        }
        Command::Scenario { action } => scenario(action),
    }
}

fn load_config(path: &Path) -> Result<SimConfig> {
    let text = fs::read_to_string(path).map_err(input(&path.display().to_string()))?;
    SimConfig::from_toml(&text).map_err(input(&format!("invalid configuration {}", path.display())))
}

fn render(report: &SimReport, format: Format) -> String {
    match format {
        Format::Text => format!("{report}\n"),
        Format::Structured => report.to_json(),
    }
}

fn report_ext(format: Format) -> &'static str {
    match format {
        Format::Text => "txt",
        Format::Structured => "json",
    }
}

/// Runs one or many seeds. Reports go to stdout unless `--out` is given.
fn execute(cfg: &SimConfig, opts: &RunOpts) -> Result<Vec<(u64, Trace, SimReport)>> {
    let seeds: Vec<u64> = match (opts.seeds, opts.seed) {
        (Some(SeedRange(a, b)), _) => (a..=b).collect(),
        (None, Some(s)) => vec![s],
        (None, None) => vec![cfg.seed],
    };
    let mut runs: Vec<(u64, Trace, SimReport)> = seeds
        .par_iter()
        .map(|&s| {
            let (trace, report) = run(&cfg.clone().with_seed(s));
            (s, trace, report)
        })
        .collect();
    runs.sort_by_key(|r| r.0);

    if let Some(dir) = &opts.out {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for (seed, trace, report) in &runs {
            fs::write(dir.join(format!("trace-{seed}.log")), trace.to_text())?;
            fs::write(
                dir.join(format!("report-{seed}.{}", report_ext(opts.format))),
                render(report, opts.format),
            )?;
        }
    }
    if runs.len() == 1 {
        if opts.out.is_none() {
            print!("{}", render(&runs[0].2, opts.format));
        } else {
            println!("wrote trace-{0}.log and report-{0}.{1}", runs[0].0, report_ext(opts.format));
        }
    } else {
        let summary = summarize(&runs, opts.format);
        if let Some(dir) = &opts.out {
            fs::write(dir.join(format!("summary.{}", report_ext(opts.format))), &summary)?;
        }
        print!("{summary}");
    }
    Ok(runs)
}

fn mean(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let (n, s) = xs.fold((0u32, 0.0), |(n, s), x| (n + 1, s + x));
    (n > 0).then(|| s / n as f64)
}

fn summarize(runs: &[(u64, Trace, SimReport)], format: Format) -> String {
    let reports = || runs.iter().map(|r| &r.2);
    match format {
        Format::Structured => {
            let rows: Vec<_> = runs
                .iter()
                .map(|(seed, _, report)| serde_json::json!({ "seed": seed, "report": report }))
                .collect();
            let doc = serde_json::json!({
                "runs": rows,
                "mean": {
                    "progress": mean(reports().map(|r| r.accounting.progress)),
                    "lost_work": mean(reports().map(|r| r.accounting.lost_work)),
                    "availability": mean(reports().filter_map(|r| r.availability)),
                    "app_availability": mean(reports().filter_map(|r| r.app_availability)),
                    "failures": mean(reports().map(|r| r.chain.failures as f64)),
                }
            });
            let mut s = serde_json::to_string_pretty(&doc).expect("summary serializes");
            s.push('\n');
            s
        }
        Format::Text => {
            let mut s = String::from("seed        progress        lost    overhead  app_avail  failures\n");
            let cell = |x: Option<f64>| x.map(|v| format!("{v:.6}")).unwrap_or_else(|| "-".into());
            for (seed, _, r) in runs {
                let a = &r.accounting;
                let _ = writeln!(
                    s,
                    "{seed:<8} {:>11.4} {:>11.4} {:>11.4} {:>10} {:>9}",
                    a.progress,
                    a.lost_work,
                    a.overhead,
                    cell(r.app_availability),
                    r.chain.failures
                );
            }
            let _ = writeln!(
                s,
                "mean     {:>11.4} {:>11.4} {:>11.4} {:>10} {:>9.2}",
                mean(reports().map(|r| r.accounting.progress)).unwrap_or(0.0),
                mean(reports().map(|r| r.accounting.lost_work)).unwrap_or(0.0),
                mean(reports().map(|r| r.accounting.overhead)).unwrap_or(0.0),
                cell(mean(reports().filter_map(|r| r.app_availability))),
                mean(reports().map(|r| r.chain.failures as f64)).unwrap_or(0.0),
            );
            s
        }
    }
}

fn render_catalog(entries: &[CatalogEntry], format: Format) -> String {
    if format == Format::Structured {
        let mut s = serde_json::to_string_pretty(entries).expect("catalog serializes");
        s.push('\n');
        return s;
    }
    let mut s = String::new();
    for &strategy in Strategy::ALL {
        let _ = writeln!(s, "{strategy}");
        for &arch in Architecture::ALL {
            let under: Vec<&CatalogEntry> = entries
                .iter()
                .filter(|e| e.hierarchy.strategy == strategy && e.hierarchy.architecture == arch)
                .collect();
            if under.is_empty() {
                continue;
            }
            let _ = writeln!(s, "  {arch}");
            for e in under {
                let caps: Vec<&str> = e.capabilities.iter().map(|c| c.as_str()).collect();
                let _ = writeln!(s, "    {} [{}]", e.hierarchy.structure, caps.join(", "));
                for n in &e.notes {
                    let _ = writeln!(s, "      note: {n}");
                }
                for p in &e.params {
                    let _ = writeln!(s, "      {} (default {}): {}", p.name, p.default, p.doc);
                }
            }
        }
    }
    s
}

fn find_scenario(name: &str) -> Result<Scenario> {
    match scenarios::by_name(name) {
        Some(s) => Ok(s),
        None => {
            let names: Vec<&str> = scenarios::builtin().iter().map(|s| s.name).collect();
            Err(InputError(format!("unknown scenario `{name}` (known: {})", names.join(", "))).into())
        }
    }
}

fn scenario(action: ScenarioAction) -> Result<u8> {
    match action {
        ScenarioAction::List => {
            for s in scenarios::builtin() {
                println!("{:<20} {}", s.name, s.summary);
            }
            Ok(0)
        }
        ScenarioAction::Export { name } => {
            print!("{}", find_scenario(&name)?.config_toml());
            Ok(0)
        }
        ScenarioAction::Run { name, opts } => {
            let sc = find_scenario(&name)?;
            let cfg = match sc.config() {
                Ok(c) => c,
                Err(e) => bail!("built-in scenario `{name}` is invalid: {e}"),
            };
            let runs = execute(&cfg, &opts)?;
            let mut unmet = 0;
            for (seed, trace, _) in &runs {
                for f in sc.check(&cfg.verdict, trace) {
                    eprintln!("seed {seed}: {f}");
                    unmet += 1;
                }
            }
            Ok(if unmet == 0 { 0 } else { 1 })
        }
    }
}
