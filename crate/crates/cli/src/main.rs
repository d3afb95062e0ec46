mod manifest;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use jscc_core::analysis::analyze;
use jscc_core::catalog::{self, CATALOG};
use jscc_core::codec::{LiftedCode, DEFAULT_MAX_FILLERS};
use jscc_core::codefile::{parse_code, serialize_code};
use jscc_core::exit::{channel_threshold, shannon_limit, ExitConfig, SourceModel};
use jscc_core::lifting::{lift, DEFAULT_ATTEMPTS};
use jscc_core::optimize::{
    de_optimize, enumerate_search, Block, DeParams, FreeCell, LinkRule, SearchSpace,
};
use jscc_core::sim::{run_sweep, SimConfig};
use jscc_core::{JointCode, Orientation};

use manifest::RunManifest;

#[derive(Parser)]
#[command(
    name = "jscc",
    version,
    about = "Design and evaluate DP-LDPC joint source-channel codes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Lift a code to a quasi-cyclic parity-check matrix.
    Lift(LiftArgs),
    /// Channel threshold and Shannon limits of a code.
    Threshold(ThresholdArgs),
    /// Search free protomatrix entries for the lowest threshold.
    Optimize(OptimizeArgs),
    /// Complexity and latency of a linked code against its baseline.
    Analyze(AnalyzeArgs),
    /// Monte Carlo source-bit error rate sweep.
    Simulate(SimulateArgs),
    /// Shipped reference codes.
    Codes {
        #[command(subcommand)]
        action: CodesAction,
    },
}

#[derive(Subcommand)]
enum CodesAction {
    /// List shipped codes with their rates and published thresholds.
    List,
}

#[derive(clap::Args)]
struct LiftArgs {
    /// Code file, or the id of a shipped code.
    #[arg(long)]
    code: String,
    #[arg(long, default_value_t = 4)]
    z1: usize,
    /// Defaults to the shipped code's setting, else 400.
    #[arg(long)]
    z2: Option<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_ATTEMPTS)]
    attempts: usize,
    /// Shift-grid output file.
    #[arg(long)]
    out: PathBuf,
    /// Also write the expanded matrix in alist format.
    #[arg(long)]
    alist: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Normalize {
    /// Es/N0 per transmitted channel symbol.
    Channel,
    /// Es/N0 per source symbol, Es/N0 - 10 log10 R.
    Source,
}

#[derive(Clone, Copy, ValueEnum)]
enum SourceModelArg {
    Biased,
    Bsc,
}

#[derive(clap::Args)]
struct ThresholdArgs {
    #[arg(long)]
    code: String,
    #[arg(long, value_enum, default_value_t = Normalize::Source)]
    normalize: Normalize,
    #[arg(long, value_enum, default_value_t = SourceModelArg::Biased)]
    source_model: SourceModelArg,
    /// Print a header line before the record.
    #[arg(long)]
    header: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum Method {
    Enumerate,
    De,
}

#[derive(Clone, Copy, ValueEnum)]
enum FreeLink {
    Lower,
    Upper,
    Either,
}

#[derive(clap::Args)]
struct OptimizeArgs {
    /// Template code.
    #[arg(long)]
    code: String,
    /// Search-space file (JSON).
    #[arg(long, conflicts_with = "free_link")]
    space: Option<PathBuf>,
    /// Free every off-diagonal link entry on the given side(s).
    #[arg(long, value_enum)]
    free_link: Option<FreeLink>,
    /// Pin cells outside punctured columns to zero.
    #[arg(long)]
    punctured_only: bool,
    #[arg(long, value_enum, default_value_t = Method::Enumerate)]
    method: Method,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 50)]
    population: usize,
    #[arg(long, default_value_t = 0.5)]
    scale: f64,
    #[arg(long, default_value_t = 0.9)]
    crossover: f64,
    #[arg(long, default_value_t = 100)]
    generations: usize,
    /// Search history CSV.
    #[arg(long)]
    out: PathBuf,
    /// Best code file.
    #[arg(long)]
    out_code: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Markdown,
}

#[derive(clap::Args)]
struct AnalyzeArgs {
    /// Linked code.
    #[arg(long)]
    new: String,
    /// Identity-linked baseline.
    #[arg(long)]
    old: String,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Precision {
    F64,
    F32,
}

#[derive(clap::Args)]
struct SimulateArgs {
    #[arg(long)]
    code: String,
    #[arg(long, default_value_t = 4)]
    z1: usize,
    #[arg(long)]
    z2: Option<usize>,
    /// Lift seed.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    sim_seed: u64,
    /// `start:stop:step` (inclusive) or a comma-separated list, in dB.
    #[arg(long, allow_hyphen_values = true)]
    esn0_grid: String,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 200)]
    i_max: usize,
    #[arg(long, default_value_t = 200_000)]
    max_frames: u64,
    #[arg(long, default_value_t = 100)]
    target_errors: u64,
    #[arg(long, default_value_t = 5000)]
    min_frames: u64,
    #[arg(long, default_value_t = DEFAULT_ATTEMPTS)]
    attempts: usize,
    #[arg(long, value_enum, default_value_t = Precision::F64)]
    precision: Precision,
}

/// A loaded code with its source text and label.
struct Loaded {
    code: JointCode,
    text: String,
    label: String,
}

fn load_code(arg: &str) -> Result<Loaded> {
    let path = Path::new(arg);
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => match catalog::find(arg) {
            Some(entry) if !path.exists() => entry.text.to_string(),
            _ => return Err(e).with_context(|| format!("cannot read code file {arg}")),
        },
    };
    let code = parse_code(&text).with_context(|| format!("invalid code file {arg}"))?;
    Ok(Loaded {
        code,
        text,
        label: arg.to_string(),
    })
}

fn code_id(loaded: &Loaded) -> String {
    loaded.code.id().map(str::to_string).unwrap_or_else(|| {
        Path::new(&loaded.label)
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| loaded.label.clone())
    })
}

fn default_z2(loaded: &Loaded) -> usize {
    loaded
        .code
        .id()
        .and_then(catalog::find)
        .map_or(400, |e| e.default_z2)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Parses `a:b:step` (inclusive) or `x,y,z`.
fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let round = |x: f64| (x * 1e6).round() / 1e6;
    match parts.as_slice() {
        [a, b, step] => {
            let (a, b, step): (f64, f64, f64) =
                (a.trim().parse()?, b.trim().parse()?, step.trim().parse()?);
            if step <= 0.0 || b < a {
                bail!("grid {spec} needs start <= stop and a positive step");
            }
            let n = ((b - a) / step + 1e-9).floor() as usize;
            Ok((0..=n).map(|k| round(a + k as f64 * step)).collect())
        }
        [_] => spec
            .split(',')
            .map(|x| x.trim().parse::<f64>().map_err(Into::into))
            .collect(),
        _ => bail!("cannot parse Es/N0 grid {spec}"),
    }
}

fn cmd_lift(a: LiftArgs) -> Result<()> {
    let loaded = load_code(&a.code)?;
    let z2 = a.z2.unwrap_or_else(|| default_z2(&loaded));
    let qc = lift(&loaded.code, a.z1, z2, a.seed, a.attempts)?;
    write_text(&a.out, &qc.to_text())?;
    let mut m = RunManifest::new("lift");
    m.input(&loaded.label, &loaded.text);
    m.seed("lift_seed", a.seed);
    m.output(&a.out);
    if let Some(alist) = &a.alist {
        write_text(alist, &qc.expand().to_alist())?;
        m.output(alist);
    }
    m.write_beside(&a.out)?;
    println!(
        "{}: {}x{} shifts, z2 {}, girth {}",
        code_id(&loaded),
        qc.rows(),
        qc.cols(),
        z2,
        qc.girth()
    );
    Ok(())
}

fn fmt_db(x: f64) -> String {
    format!("{x:.3}")
}

fn cmd_threshold(a: ThresholdArgs) -> Result<()> {
    let loaded = load_code(&a.code)?;
    let config = ExitConfig {
        source_model: match a.source_model {
            SourceModelArg::Biased => SourceModel::Biased,
            SourceModelArg::Bsc => SourceModel::Bsc,
        },
        ..ExitConfig::default()
    };
    let report = channel_threshold(&loaded.code, config)?;
    let limit = shannon_limit(loaded.code.p1(), report.rate);
    let (thr, gauss, biawgn) = match a.normalize {
        Normalize::Channel => (report.threshold_db, limit.gaussian_db, limit.biawgn_db),
        Normalize::Source => (
            report.threshold_source_db,
            limit.gaussian_source_db,
            limit.biawgn_source_db,
        ),
    };
    let mut out = String::new();
    if a.header {
        out.push_str(
            "code_id,threshold_dB,shannon_gauss_dB,shannon_biawgn_dB,iterations_at_threshold\n",
        );
    }
    writeln!(
        out,
        "{},{},{},{},{}",
        code_id(&loaded),
        fmt_db(thr),
        fmt_db(gauss),
        biawgn.map_or_else(|| "inf".to_string(), fmt_db),
        report.iterations_at_threshold
    )?;
    print!("{out}");
    if let Some(path) = &a.out {
        write_text(path, &out)?;
        let mut m = RunManifest::new("threshold");
        m.input(&loaded.label, &loaded.text);
        m.output(path);
        m.write_beside(path)?;
    }
    Ok(())
}

/// Search-space file. Rows and columns are 1-based.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SpaceFile {
    cells: Vec<SpaceCell>,
    #[serde(default)]
    link_rule: LinkRule,
    #[serde(default)]
    punctured_only: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SpaceCell {
    block: Block,
    row: usize,
    col: usize,
    #[serde(default)]
    lo: u32,
    hi: Option<u32>,
}

fn link_cells(code: &JointCode, side: FreeLink) -> Vec<FreeCell> {
    let m = code.link().size();
    let max = code.max_entry();
    let mut cells = Vec::new();
    for r in 0..m {
        for c in 0..m {
            let keep = match side {
                FreeLink::Lower => c < r,
                FreeLink::Upper => c > r,
                FreeLink::Either => c != r,
            };
            if keep {
                cells.push(FreeCell {
                    block: Block::Link,
                    row: r,
                    col: c,
                    lo: 0,
                    hi: max,
                });
            }
        }
    }
    cells
}

fn cmd_optimize(a: OptimizeArgs) -> Result<()> {
    let loaded = load_code(&a.code)?;
    let mut m = RunManifest::new("optimize");
    m.input(&loaded.label, &loaded.text);
    let max = loaded.code.max_entry();
    let (cells, rule, punctured_only) = match (&a.space, a.free_link) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("cannot read space file {}", path.display()))?;
            m.input(&path.display().to_string(), &text);
            let file: SpaceFile = serde_json::from_str(&text)
                .with_context(|| format!("invalid space file {}", path.display()))?;
            let mut cells = Vec::new();
            for c in file.cells {
                if c.row == 0 || c.col == 0 {
                    bail!("space file cells are 1-based");
                }
                cells.push(FreeCell {
                    block: c.block,
                    row: c.row - 1,
                    col: c.col - 1,
                    lo: c.lo,
                    hi: c.hi.unwrap_or(max),
                });
            }
            (
                cells,
                file.link_rule,
                file.punctured_only || a.punctured_only,
            )
        }
        (None, Some(side)) => {
            let rule = match side {
                FreeLink::Either => LinkRule::Either,
                _ => LinkRule::Fixed,
            };
            let mut template = loaded.code.clone();
            if let FreeLink::Upper | FreeLink::Lower = side {
                let want = if let FreeLink::Upper = side {
                    Orientation::Upper
                } else {
                    Orientation::Lower
                };
                if template.link().orientation() != want {
                    if !template.link().is_identity() {
                        bail!("template link is not {} triangular", want);
                    }
                    template = template.with_link(jscc_core::TriangularLink::identity(
                        template.link().size(),
                        want,
                    ))?;
                }
            }
            return run_optimize(a, template, link_cells(&loaded.code, side), rule, m);
        }
        (None, None) => bail!("give --space or --free-link"),
    };
    let template = loaded.code.clone();
    let a = OptimizeArgs {
        punctured_only,
        ..a
    };
    run_optimize(a, template, cells, rule, m)
}

fn run_optimize(
    a: OptimizeArgs,
    template: JointCode,
    cells: Vec<FreeCell>,
    rule: LinkRule,
    mut m: RunManifest,
) -> Result<()> {
    let space = SearchSpace::new(template, cells, rule, a.punctured_only)?;
    let config = ExitConfig::default();
    let join = |v: &[u32]| v.iter().map(u32::to_string).collect::<Vec<_>>().join(" ");
    let mut csv = String::new();
    let best = match a.method {
        Method::Enumerate => {
            let ranked = enumerate_search(&space, &config)?;
            csv.push_str("rank,threshold_dB,assignment\n");
            for (i, e) in ranked.iter().enumerate() {
                writeln!(
                    csv,
                    "{},{},{}",
                    i + 1,
                    fmt_db(e.threshold_db),
                    join(&e.assignment)
                )?;
            }
            ranked.into_iter().next().context("no feasible candidate")?
        }
        Method::De => {
            let params = DeParams {
                population: a.population,
                scale: a.scale,
                crossover: a.crossover,
                generations: a.generations,
            };
            m.seed("de_seed", a.seed);
            let result = de_optimize(&space, params, &config, a.seed);
            csv.push_str("generation,best_threshold_dB,assignment\n");
            for g in &result.history {
                writeln!(
                    csv,
                    "{},{},{}",
                    g.generation,
                    fmt_db(g.best_threshold_db),
                    join(&g.assignment)
                )?;
            }
            if !result.best.threshold_db.is_finite() {
                bail!("no feasible candidate found");
            }
            result.best
        }
    };
    let code = space
        .build(&best.assignment)
        .context("best assignment is infeasible")?;
    write_text(&a.out, &csv)?;
    write_text(&a.out_code, &serialize_code(&code))?;
    m.output(&a.out);
    m.output(&a.out_code);
    m.write_beside(&a.out)?;
    println!(
        "best assignment [{}] threshold {} dB",
        join(&best.assignment),
        fmt_db(best.threshold_db)
    );
    Ok(())
}

fn cmd_analyze(a: AnalyzeArgs) -> Result<()> {
    let new = load_code(&a.new)?;
    let old = load_code(&a.old)?;
    let r = analyze(&new.code, &old.code)?;
    let title = format!("{} vs {}", code_id(&new), code_id(&old));
    let rows = [
        (
            "Complexity increase in source encoding",
            r.source_complexity,
        ),
        ("Delta latency, source", r.latency_source),
        ("Complexity increase in decoding", r.decoding_complexity),
        ("Delta latency, dec", r.latency_dec),
    ];
    let mut out = String::new();
    match a.format {
        Format::Csv => {
            writeln!(out, "metric,{title}")?;
            for (name, v) in rows {
                writeln!(out, "\"{name}\",{v}")?;
            }
        }
        Format::Markdown => {
            writeln!(out, "| Metric | {title} |\n|---|---|")?;
            for (name, v) in rows {
                writeln!(out, "| {name} | {v} |")?;
            }
        }
    }
    print!("{out}");
    if let Some(path) = &a.out {
        write_text(path, &out)?;
        let mut m = RunManifest::new("analyze");
        m.input(&new.label, &new.text);
        m.input(&old.label, &old.text);
        m.output(path);
        m.write_beside(path)?;
    }
    Ok(())
}

fn cmd_simulate(a: SimulateArgs) -> Result<()> {
    let loaded = load_code(&a.code)?;
    let z2 = a.z2.unwrap_or_else(|| default_z2(&loaded));
    let grid = parse_grid(&a.esn0_grid)?;
    let lifted = LiftedCode::build(
        &loaded.code,
        a.z1,
        z2,
        a.seed,
        a.attempts,
        DEFAULT_MAX_FILLERS,
        10,
    )?;
    let config = SimConfig {
        code_id: code_id(&loaded),
        z1: a.z1,
        z2,
        lift_seed: a.seed,
        sim_seed: a.sim_seed,
        grid,
        i_max: a.i_max,
        max_frames: a.max_frames,
        target_error_frames: a.target_errors,
        min_frames: a.min_frames,
        batch: 64,
    };
    let points = match a.precision {
        Precision::F64 => run_sweep::<f64>(&lifted, &config, &a.out)?,
        Precision::F32 => run_sweep::<f32>(&lifted, &config, &a.out)?,
    };
    let mut m = RunManifest::new("simulate");
    m.input(&loaded.label, &loaded.text);
    m.seed("lift_seed", a.seed);
    m.seed("sim_seed", a.sim_seed);
    m.output(&a.out);
    m.write_beside(&a.out)?;
    for p in points {
        println!(
            "{:>8.3} dB  sser {:.3e}  fer {:.3e}  frames {}  ({})",
            p.esn0_db, p.sser, p.fer, p.frames, p.stop_reason
        );
    }
    Ok(())
}

fn cmd_codes_list() -> Result<()> {
    println!("id,p1,R,published_threshold_dB,published_shannon_dB,default_z2");
    for e in CATALOG.iter() {
        let code = e.code();
        let rate = code.rates()?.overall;
        println!(
            "{},{},{},{},{:.2},{}",
            e.id,
            code.p1(),
            rate,
            fmt_db(e.published_threshold_db),
            e.published_shannon_db,
            e.default_z2
        );
    }
    Ok(())
}

fn configure_workers() -> Result<()> {
    if let Ok(v) = std::env::var("JSCC_WORKERS") {
        let n: usize = v
            .parse()
            .with_context(|| format!("JSCC_WORKERS must be a positive integer, got {v}"))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .context("configuring worker pool")?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_workers().and_then(|()| match cli.command {
        Command::Lift(a) => cmd_lift(a),
        Command::Threshold(a) => cmd_threshold(a),
        Command::Optimize(a) => cmd_optimize(a),
        Command::Analyze(a) => cmd_analyze(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Codes {
            action: CodesAction::List,
        } => cmd_codes_list(),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
