//! `grac`: command-line front end for generalized random access code experiments.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use grac::bloch::BlochVector;
use grac::channels::{
    critical_depolarizing, crossing_window, dephasing_sweep, depolarizing_sweep, uniform_grid,
    ChannelKind, SweepResult, DEFAULT_GRID_POINTS, DEFAULT_REFINE_TOL,
};
use grac::classical::{classical_optimum, DEFAULT_STRATEGY_CAP};
use grac::eacc::{eacc_seesaw, EaccConfig};
use grac::mubs::{classify_quadruple, is_mubs, select_set, FunctionSet};
use grac::quantum::{
    appendix_fixture, evaluate_pm, seesaw, theorem2_bound, AppendixCase, SeesawConfig,
};
use grac::report::{reproduce_tables, ReportConfig, TableId, TableReport};

#[derive(Parser)]
#[command(
    name = "grac",
    version,
    about = "Generalized random access codes over parity function sets"
)]
struct Cli {
    /// Input width in bits.
    #[arg(long, global = true, default_value_t = 3)]
    n: u8,

    /// Question set: `all`, `k=<m>[:xor-closed|open]`, or comma-separated bitstrings.
    #[arg(long, global = true, default_value = "all")]
    labels: String,

    /// Seed for every randomized search.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Write the artifact here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Channel {
    Depolarizing,
    Dephasing,
}

#[derive(Subcommand)]
enum Command {
    /// Check that a set of parity functions is mutually unbiased and balanced.
    Mubs {
        /// Set to check; defaults to `--labels`.
        #[arg(long)]
        check: Option<String>,
    },
    /// Exact classical optimum by enumeration of all encodings.
    Classical {
        /// Maximum number of optimal strategies to emit.
        #[arg(long, default_value_t = DEFAULT_STRATEGY_CAP)]
        cap: usize,
    },
    /// Qubit prepare-and-measure see-saw, or a closed-form protocol.
    Quantum {
        #[arg(long, default_value_t = 64)]
        restarts: usize,
        #[arg(long, default_value_t = 10_000)]
        max_iters: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Evaluate a closed-form protocol (A, B1, B2, C, D_box, D_planar, E) instead.
        #[arg(long)]
        case: Option<AppendixCase>,
    },
    /// Noise thresholds, channel sweeps and crossing windows.
    Noise {
        #[arg(long, value_enum, default_value_t = Channel::Depolarizing)]
        channel: Channel,
        /// Sweep the noise parameter instead of reporting the threshold.
        #[arg(long)]
        sweep: bool,
        /// Dephasing axis as `x,y,z`.
        #[arg(long, default_value = "1,0,0")]
        axis: String,
        #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
        points: usize,
        /// Largest noise parameter on the grid; defaults to the channel maximum.
        #[arg(long)]
        lambda_max: Option<f64>,
        /// Second set: report where `--labels` beats it under dephasing.
        #[arg(long)]
        against: Option<String>,
        #[arg(long, default_value_t = DEFAULT_REFINE_TOL)]
        refine_tol: f64,
        #[arg(long, default_value_t = 64)]
        restarts: usize,
    },
    /// Entanglement-assisted see-saw with one classical bit.
    Eacc {
        /// Local dimension of each party.
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 64)]
        restarts: usize,
        #[arg(long, default_value_t = 10_000)]
        max_iters: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Recompute reference tables and compare against stored values.
    Tables {
        /// Table ids (I, II, III, IV, Q), comma-separated, or `all`.
        #[arg(long, default_value = "all")]
        table: String,
        /// Local dimension used for the open quadruple row of Table IV.
        #[arg(long, default_value_t = 4)]
        open_dim: usize,
    },
}

/// What a command produced: a one-line summary and the rendered artifact.
struct Output {
    summary: String,
    body: String,
    code: ExitCode,
}

impl Output {
    fn new(summary: String, body: String) -> Self {
        Self {
            summary,
            body,
            code: ExitCode::SUCCESS,
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn csv_line(fields: &[String]) -> String {
    let mut line = fields.join(",");
    line.push('\n');
    line
}

fn parse_axis(s: &str) -> Result<BlochVector> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .with_context(|| format!("bad axis {s:?}"))?;
    match parts[..] {
        [x, y, z] => Ok(BlochVector::new(x, y, z)),
        _ => bail!("axis needs three components, got {s:?}"),
    }
}

fn set_names(set: &FunctionSet) -> String {
    set.to_string()
}

fn run_mubs(cli: &Cli, check: Option<&str>) -> Result<Output> {
    let set = select_set(cli.n, check.unwrap_or(&cli.labels))?;
    let ok = is_mubs(&set);
    let class = (set.len() == 4)
        .then(|| classify_quadruple(&set))
        .transpose()?;
    let summary = format!("MUBS: {ok}");
    let body = match cli.format {
        Format::Json => to_json(&json!({
            "n": cli.n,
            "set": set,
            "mubs": ok,
            "quadruple_class": class.map(|c| c.to_string()),
        }))?,
        Format::Csv => {
            let class = class.map(|c| c.to_string()).unwrap_or_default();
            csv_line(&["set".into(), "mubs".into(), "quadruple_class".into()])
                + &csv_line(&[format!("\"{set}\""), ok.to_string(), class])
        }
        Format::Text => {
            let mut s = format!("{summary}\n");
            if let Some(c) = class {
                writeln!(s, "quadruple class: {c}")?;
            }
            s
        }
    };
    Ok(Output::new(summary, body))
}

fn run_classical(cli: &Cli, cap: usize) -> Result<Output> {
    let set = select_set(cli.n, &cli.labels)?;
    let opt = classical_optimum(&set, cap)?;
    let summary = format!(
        "classical optimum for {}: {} ({:.6}), {} optimal encodings",
        set_names(&set),
        opt.value,
        opt.value.value(),
        opt.optimal_encodings
    );
    let body = match cli.format {
        Format::Json => to_json(&json!({
            "set": set,
            "exact": opt.value.to_string(),
            "value": opt.value.value(),
            "optimal_encodings": opt.optimal_encodings,
            "strategies": opt.strategies,
        }))?,
        Format::Csv => {
            let mut s = csv_line(&["index".into(), "encoding".into(), "decoding".into()]);
            for (i, strat) in opt.strategies.iter().enumerate() {
                let decoding = set
                    .iter()
                    .map(|l| {
                        let z0 = strat.decode(l, false).unwrap_or(false) as u8;
                        let z1 = strat.decode(l, true).unwrap_or(false) as u8;
                        format!("{l}:{z0}{z1}")
                    })
                    .collect::<Vec<_>>()
                    .join(" ");
                s += &csv_line(&[i.to_string(), strat.encoding.to_bitstring(), decoding]);
            }
            s
        }
        Format::Text => {
            let mut s = format!("{summary}\n");
            for strat in &opt.strategies {
                writeln!(s, "  encoding {}", strat.encoding.to_bitstring())?;
            }
            s
        }
    };
    Ok(Output::new(summary, body))
}

fn run_quantum(cli: &Cli, config: SeesawConfig, case: Option<AppendixCase>) -> Result<Output> {
    let (set, strategy, value, report) = match case {
        Some(case) => {
            let (set, strategy) = appendix_fixture(case);
            let value = evaluate_pm(&strategy, &set)?;
            (set, strategy, value, None)
        }
        None => {
            let set = select_set(cli.n, &cli.labels)?;
            let report = seesaw(&set, &config, None)?;
            (
                set,
                report.best_strategy.clone(),
                report.value,
                Some(report),
            )
        }
    };
    let bound = theorem2_bound(set.len());
    let summary = format!(
        "quantum value for {}: {value:.6} (bound {bound:.6})",
        set_names(&set)
    );
    let body = match cli.format {
        Format::Json => to_json(&json!({
            "set": set,
            "case": case.map(|c| c.to_string()),
            "value": value,
            "bound": bound,
            "report": report,
            "strategy": strategy,
        }))?,
        Format::Csv => {
            let mut s = csv_line(&[
                "kind".into(),
                "key".into(),
                "x".into(),
                "y".into(),
                "z".into(),
            ]);
            for (x, r) in strategy.preparations().iter().enumerate() {
                let key = grac::mubs::input_bitstring(set.width(), x as u32);
                s += &csv_line(&[
                    "preparation".into(),
                    key,
                    format!("{:.12}", r.x()),
                    format!("{:.12}", r.y()),
                    format!("{:.12}", r.z()),
                ]);
            }
            for (l, v) in strategy.measurements() {
                s += &csv_line(&[
                    "measurement".into(),
                    l.to_string(),
                    format!("{:.12}", v.x()),
                    format!("{:.12}", v.y()),
                    format!("{:.12}", v.z()),
                ]);
            }
            s
        }
        Format::Text => {
            let mut s = format!("{summary}\n");
            if let Some(r) = &report {
                writeln!(
                    s,
                    "  iterations {}, restarts {}, converged {}, monotone {}",
                    r.iterations, r.restarts_used, r.converged, r.monotone
                )?;
            }
            s
        }
    };
    Ok(Output::new(summary, body))
}

fn sweep_json(kind: ChannelKind, set: &FunctionSet, sweep: &SweepResult) -> serde_json::Value {
    json!({
        "channel": kind,
        "set": set,
        "classical_exact": sweep.classical.to_string(),
        "classical_value": sweep.classical.value(),
        "lambda": sweep.grid,
        "quantum_value": sweep.values,
        "ratio": sweep.ratio,
    })
}

struct NoiseArgs<'a> {
    channel: Channel,
    sweep: bool,
    axis: &'a str,
    points: usize,
    lambda_max: Option<f64>,
    against: Option<&'a str>,
    refine_tol: f64,
    restarts: usize,
}

fn run_noise(cli: &Cli, args: NoiseArgs<'_>) -> Result<Output> {
    let set = select_set(cli.n, &cli.labels)?;
    let config = SeesawConfig {
        restarts: args.restarts,
        ..SeesawConfig::with_seed(cli.seed)
    };
    let kind = match args.channel {
        Channel::Depolarizing => ChannelKind::Depolarizing,
        Channel::Dephasing => ChannelKind::Dephasing,
    };
    let grid = uniform_grid(args.lambda_max.unwrap_or(kind.max_lambda()), args.points);

    if let Some(other) = args.against {
        if args.channel != Channel::Dephasing {
            bail!("--against compares sets under dephasing; pass --channel dephasing");
        }
        let other = select_set(cli.n, other)?;
        let axis = parse_axis(args.axis)?;
        let w = crossing_window(&set, &other, axis, &grid, args.refine_tol, &config)?;
        let summary = format!(
            "{} beats {} for 1-lambda in ({:.4}, {:.4})",
            set_names(&set),
            set_names(&other),
            w.low,
            w.high
        );
        let body = match cli.format {
            Format::Json => to_json(&w)?,
            Format::Csv => {
                csv_line(&["low".into(), "high".into(), "tol".into()])
                    + &csv_line(&[w.low.to_string(), w.high.to_string(), w.tol.to_string()])
            }
            Format::Text => format!("{summary}\n"),
        };
        return Ok(Output::new(summary, body));
    }

    if args.channel == Channel::Depolarizing && !args.sweep {
        let crit = critical_depolarizing(&set, &config)?;
        let summary = format!(
            "critical depolarizing noise for {}: {:.6} (classical {}, quantum {:.6})",
            set_names(&set),
            crit.lambda_crit,
            crit.classical,
            crit.quantum
        );
        let body = match cli.format {
            Format::Json => to_json(&crit)?,
            Format::Csv => {
                csv_line(&["classical".into(), "quantum".into(), "lambda_crit".into()])
                    + &csv_line(&[
                        crit.classical.value().to_string(),
                        crit.quantum.to_string(),
                        crit.lambda_crit.to_string(),
                    ])
            }
            Format::Text => format!("{summary}\n"),
        };
        return Ok(Output::new(summary, body));
    }

    let sweep = match args.channel {
        Channel::Depolarizing => depolarizing_sweep(&set, &grid, &config)?,
        Channel::Dephasing => dephasing_sweep(&set, parse_axis(args.axis)?, &grid, &config)?,
    };
    let summary = format!(
        "{kind:?} sweep for {}: {} points, value {:.6} to {:.6}",
        set_names(&set),
        sweep.grid.len(),
        sweep.values.first().copied().unwrap_or(f64::NAN),
        sweep.values.last().copied().unwrap_or(f64::NAN)
    );
    let body = match cli.format {
        Format::Json => to_json(&sweep_json(kind, &set, &sweep))?,
        Format::Csv | Format::Text => sweep.to_csv(),
    };
    Ok(Output::new(summary, body))
}

fn run_eacc(cli: &Cli, config: EaccConfig) -> Result<Output> {
    let set = select_set(cli.n, &cli.labels)?;
    let report = eacc_seesaw(&set, &config)?;
    let summary = format!(
        "entanglement-assisted value for {} at {d}x{d}: {:.6} (bound {:.6})",
        set_names(&set),
        report.value,
        theorem2_bound(set.len()),
        d = config.local_dim
    );
    let body = match cli.format {
        Format::Json => to_json(&json!({ "set": set, "report": report }))?,
        Format::Csv => {
            csv_line(&[
                "value".into(),
                "local_dim".into(),
                "iterations".into(),
                "restarts".into(),
                "converged".into(),
                "monotone".into(),
                "completeness_error".into(),
            ]) + &csv_line(&[
                report.value.to_string(),
                report.local_dim.to_string(),
                report.iterations.to_string(),
                report.restarts_used.to_string(),
                report.converged.to_string(),
                report.monotone.to_string(),
                report.completeness_error.to_string(),
            ])
        }
        Format::Text => format!(
            "{summary}\n  iterations {}, restarts {}, converged {}, monotone {}, completeness error {:.1e}\n",
            report.iterations,
            report.restarts_used,
            report.converged,
            report.monotone,
            report.completeness_error
        ),
    };
    Ok(Output::new(summary, body))
}

fn parse_tables(selector: &str) -> Result<Vec<TableId>> {
    if selector.trim().eq_ignore_ascii_case("all") {
        return Ok(TableId::ALL.to_vec());
    }
    Ok(selector.split(',').map(str::parse).collect::<Result<_, _>>()?)
}

fn tables_csv(reports: &[TableReport]) -> String {
    let mut s = csv_line(
        &[
            "table",
            "key",
            "computed",
            "exact",
            "reference",
            "delta",
            "tolerance",
            "within",
        ]
        .map(String::from),
    );
    for t in reports {
        for r in &t.rows {
            s += &csv_line(&[
                t.table_id.to_string(),
                r.key.clone(),
                format!("{:.12}", r.computed),
                r.exact.clone().unwrap_or_default(),
                format!("{:.12}", r.reference),
                format!("{:.3e}", r.delta),
                format!("{:.0e}", r.tolerance),
                r.within.to_string(),
            ]);
        }
    }
    s
}

fn run_tables(cli: &Cli, table: &str, open_dim: usize) -> Result<Output> {
    let which = parse_tables(table)?;
    let config = ReportConfig {
        eacc_open_dim: open_dim,
        ..ReportConfig::with_seed(cli.seed)
    };
    let reports = reproduce_tables(&which, &config)?;
    let rows: usize = reports.iter().map(|t| t.rows.len()).sum();
    let failed: usize = reports.iter().map(|t| t.failures().count()).sum();
    let summary = format!(
        "tables {}: {} of {rows} rows within tolerance",
        which
            .iter()
            .map(|t| t.to_string())
            .collect::<Vec<_>>()
            .join(","),
        rows - failed
    );
    let body = match cli.format {
        Format::Json => to_json(&reports)?,
        Format::Csv => tables_csv(&reports),
        Format::Text => {
            let mut s = String::new();
            for t in &reports {
                write!(s, "{t}")?;
            }
            writeln!(s, "{summary}")?;
            s
        }
    };
    let mut out = Output::new(summary, body);
    if failed > 0 {
        out.code = ExitCode::from(2);
    }
    Ok(out)
}

/// Writes through a temporary file in the target directory, then renames.
fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("cannot create a temporary file in {}", dir.display()))?;
    tmp.write_all(contents.as_bytes())?;
    tmp.persist(path)
        .with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

fn run(cli: &Cli) -> Result<Output> {
    match &cli.command {
        Command::Mubs { check } => run_mubs(cli, check.as_deref()),
        Command::Classical { cap } => run_classical(cli, *cap),
        Command::Quantum {
            restarts,
            max_iters,
            tol,
            case,
        } => run_quantum(
            cli,
            SeesawConfig {
                restarts: *restarts,
                max_iters: *max_iters,
                tol: *tol,
                seed: cli.seed,
            },
            *case,
        ),
        Command::Noise {
            channel,
            sweep,
            axis,
            points,
            lambda_max,
            against,
            refine_tol,
            restarts,
        } => run_noise(
            cli,
            NoiseArgs {
                channel: *channel,
                sweep: *sweep,
                axis,
                points: *points,
                lambda_max: *lambda_max,
                against: against.as_deref(),
                refine_tol: *refine_tol,
                restarts: *restarts,
            },
        ),
        Command::Eacc {
            dim,
            restarts,
            max_iters,
            tol,
        } => run_eacc(
            cli,
            EaccConfig {
                local_dim: *dim,
                restarts: *restarts,
                max_iters: *max_iters,
                tol: *tol,
                seed: cli.seed,
            },
        ),
        Command::Tables { table, open_dim } => run_tables(cli, table, *open_dim),
    }
}

fn fail(err: impl std::fmt::Display) -> ExitCode {
    eprintln!("{}", json!({ "error": err.to_string() }));
    ExitCode::from(1)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail(e.to_string().trim_end()),
    };
    let output = match run(&cli) {
        Ok(o) => o,
        Err(e) => return fail(format!("{e:#}")),
    };
    match &cli.out {
        Some(path) => {
            if let Err(e) = write_atomic(path, &output.body) {
                return fail(format!("{e:#}"));
            }
            println!("{} -> {}", output.summary, path.display());
        }
        None if cli.format == Format::Text => print!("{}", output.body),
        None => {
            eprintln!("{}", output.summary);
            print!("{}", output.body);
        }
    }
    output.code
}
