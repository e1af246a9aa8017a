mod config;
mod plot;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use config::{read_config, ConfigError, Overrides, RawConfig, RunConfig};
use roughlim::analysis::{
    auto_cluster_box, auto_limit_box, cluster_set, core_set, nonemptiness_certificate,
    rough_limit_direct, rough_limit_via_clusters, ClusterReport,
};
use roughlim::geometry::{minimal_enclosing_ball, Aabb, GridRegion, Label};
use roughlim::ideal::Verdict;
use roughlim::sequence::load_csv;
use roughlim::verify::{run_suite, Status, Suite};

#[derive(Parser)]
#[command(name = "roughlim", version, about = "Rough ideal limit sets of sequences from finite prefixes")]
struct Cli {
    /// JSON run config; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (also ROUGHLIM_OUT).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    horizon: Option<usize>,
    /// Grid resolution.
    #[arg(long, global = true)]
    h: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the sequence prefix as CSV.
    Generate,
    /// Ideal cluster set.
    Cluster {
        /// Read the sequence from a CSV file instead of the config.
        #[arg(long)]
        from_csv: Option<PathBuf>,
    },
    /// Rough limit set, by both methods unless one is chosen.
    Limitset {
        #[arg(long, value_enum)]
        method: Option<MethodArg>,
        #[arg(long)]
        from_csv: Option<PathBuf>,
        /// Draw the cluster set over the limit set.
        #[arg(long)]
        overlay: bool,
    },
    /// Ideal core (convex hull of the cluster set).
    Core {
        #[arg(long)]
        from_csv: Option<PathBuf>,
    },
    /// Minimal enclosing ball of a point CSV.
    Meb {
        #[arg(long)]
        points: PathBuf,
    },
    /// Run a verification suite.
    Verify {
        #[arg(long, default_value = "golden")]
        suite: SuiteArg,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Direct,
    ViaClusters,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Golden,
    Properties,
    All,
}

enum Failure {
    Config(ConfigError),
    Compute(String),
    Unexpected(usize),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e)
    }
}

impl From<roughlim::Error> for Failure {
    fn from(e: roughlim::Error) -> Self {
        Failure::Compute(e.to_string())
    }
}

impl From<plot::PlotError> for Failure {
    fn from(e: plot::PlotError) -> Self {
        Failure::Compute(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn write(path: &Path, contents: &str) -> Outcome {
    fs::write(path, contents).map_err(|e| Failure::Compute(format!("cannot write {}: {e}", path.display())))
}

fn write_json(path: &Path, value: &impl Serialize) -> Outcome {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    write(path, &text)
}

/// Report body: the echoed config, the result and any warnings.
fn report(command: &str, cfg: &RunConfig, result: Value, warnings: &[String]) -> Value {
    json!({
        "command": command,
        "status": if warnings.is_empty() { "ok" } else { "warning" },
        "warnings": warnings,
        "config": cfg,
        "result": result,
    })
}

fn warn(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

fn region_warnings(name: &str, region: &GridRegion) -> Vec<String> {
    let unsure = region.count(Label::Uncertain);
    let sure = region.count(Label::In) + region.count(Label::Out);
    if unsure > sure {
        vec![format!("{name}: {unsure} inconclusive cells outnumber {sure} decided ones")]
    } else {
        Vec::new()
    }
}

fn cluster_warnings(c: &ClusterReport) -> Vec<String> {
    let mut w = region_warnings("cluster set", &c.region);
    if c.diagnostics.escape != Verdict::Small {
        w.push(format!(
            "{} terms lie outside the cluster box ({:?}); cluster points may be missed",
            c.diagnostics.escape_count, c.diagnostics.escape
        ));
    }
    w
}

/// Writes `<stem>.json`, `<stem>.csv` and `<stem>.svg`.
fn emit_region(
    cfg: &RunConfig,
    stem: &str,
    command: &str,
    region: &GridRegion,
    mut result: Value,
    warnings: &[String],
    overlay: Option<&GridRegion>,
) -> Outcome {
    result["summary"] = serde_json::to_value(region.summary()).unwrap();
    result["grid"] = json!({
        "h": region.grid().h(),
        "origin": region.grid().origin(),
        "shape": region.grid().shape(),
    });
    write_json(&cfg.out.join(format!("{stem}.json")), &report(command, cfg, result, warnings))?;
    write(&cfg.out.join(format!("{stem}.csv")), &region.to_csv_string())?;
    if region.grid().dim() <= 2 {
        let svg = plot::render_svg(region, &stem.replace('_', " "), overlay)?;
        write(&cfg.out.join(format!("{stem}.svg")), &svg)?;
    }
    let s = region.summary();
    println!(
        "{stem}: {} in, {} uncertain, {} out; {} component(s)",
        s.in_cells,
        s.uncertain_cells,
        s.out_cells,
        s.components.len()
    );
    Ok(())
}

fn cluster_for(cfg: &RunConfig, x: &roughlim::sequence::SequencePrefix, bbox: Option<&Aabb>) -> Result<ClusterReport, Failure> {
    let bbox = match bbox {
        Some(b) => b.clone(),
        None => auto_cluster_box(x, &cfg.ideal, cfg.h, &cfg.eps)?,
    };
    Ok(cluster_set(x, &cfg.ideal, &bbox, cfg.h, &cfg.eps)?)
}

fn generate(mut cfg: RunConfig) -> Outcome {
    let x = cfg.prefix()?;
    let path = cfg.out.join("sequence.csv");
    write(&path, &x.to_csv_string())?;
    let result = json!({
        "horizon": x.horizon(),
        "dim": x.dim(),
        "provenance": x.provenance(),
        "csv": path,
    });
    write_json(&cfg.out.join("generate.json"), &report("generate", &cfg, result, &[]))?;
    println!("wrote {} terms to {}", x.horizon(), path.display());
    Ok(())
}

fn cluster(mut cfg: RunConfig) -> Outcome {
    let x = cfg.prefix()?;
    let c = cluster_for(&cfg, &x, cfg.fixed_box())?;
    let warnings = cluster_warnings(&c);
    warn(&warnings);
    let result = serde_json::to_value(&c).unwrap();
    emit_region(&cfg, "cluster", "cluster", &c.region, result, &warnings, None)
}

fn limitset(mut cfg: RunConfig, method: Option<MethodArg>, overlay: bool) -> Outcome {
    let x = cfg.prefix()?;
    let family = cfg.family_spec()?;
    let bbox = match cfg.fixed_box() {
        Some(b) => b.clone(),
        None => auto_limit_box(&x, &cfg.ideal, &family, cfg.h)?,
    };
    cfg.check_family(&family, x.dim(), &bbox)?;
    let want_via = !matches!(method, Some(MethodArg::Direct));
    let want_direct = !matches!(method, Some(MethodArg::ViaClusters));
    if want_via && !family.is_closed() && method.is_some() {
        return Err(Failure::Compute(roughlim::Error::RequiresClosedFamily.to_string()));
    }
    let cluster = if overlay || (want_via && family.is_closed()) {
        Some(cluster_for(&cfg, &x, None)?)
    } else {
        None
    };
    let shown = cluster.as_ref().filter(|_| overlay).map(|c| &c.region);
    if want_direct {
        let l = rough_limit_direct(&x, &cfg.ideal, &family, &bbox, cfg.h)?;
        let warnings = region_warnings("limit set", &l.region);
        warn(&warnings);
        let mut result = serde_json::to_value(&l).unwrap();
        result["box"] = serde_json::to_value(&bbox).unwrap();
        emit_region(&cfg, "limitset_direct", "limitset", &l.region, result, &warnings, shown)?;
    }
    if want_via {
        match &cluster {
            Some(c) => {
                let l = rough_limit_via_clusters(c, &family, &bbox, cfg.h)?;
                let mut warnings = cluster_warnings(c);
                warnings.extend(region_warnings("limit set", &l.region));
                warn(&warnings);
                let mut result = serde_json::to_value(&l).unwrap();
                result["box"] = serde_json::to_value(&bbox).unwrap();
                emit_region(&cfg, "limitset_via_clusters", "limitset", &l.region, result, &warnings, shown)?;
            }
            None => eprintln!("note: open family, skipping the via-clusters method"),
        }
    }
    Ok(())
}

fn core(mut cfg: RunConfig) -> Outcome {
    let x = cfg.prefix()?;
    let c = cluster_for(&cfg, &x, cfg.fixed_box())?;
    let region = core_set(&c)?;
    let mut warnings = cluster_warnings(&c);
    warnings.extend(region_warnings("core", &region));
    warn(&warnings);
    let mut result = json!({ "cluster": c });
    let radius = cfg.family.as_ref().and_then(|f| match f {
        roughlim::family::RoughFamilySpec::ClosedBall { radius } => radius.constant(),
        _ => None,
    });
    if let Some(r) = radius {
        result["nonemptiness"] = serde_json::to_value(nonemptiness_certificate(&c, r)?).unwrap();
    }
    emit_region(&cfg, "core", "core", &region, result, &warnings, Some(&c.region))
}

fn meb(cfg: RunConfig, points: &Path) -> Outcome {
    let x = load_csv(points).map_err(|e| Failure::Config(ConfigError::new("points", e)))?;
    let pts: Vec<Vec<f64>> = x.points().map(|p| p.to_vec()).collect();
    let ball = minimal_enclosing_ball(&pts)?;
    let result = json!({
        "points": points,
        "count": pts.len(),
        "center": ball.center,
        "radius": ball.radius,
    });
    write_json(&cfg.out.join("meb.json"), &report("meb", &cfg, result, &[]))?;
    println!("center {:?} radius {}", ball.center, ball.radius);
    Ok(())
}

fn verify(cfg: RunConfig, suite: SuiteArg) -> Outcome {
    let suite = match suite {
        SuiteArg::Golden => Suite::Golden,
        SuiteArg::Properties => Suite::Properties,
        SuiteArg::All => Suite::All,
    };
    let r = run_suite(suite, cfg.seed);
    for c in &r.cases {
        let tag = match (c.unexpected, c.report.status) {
            (true, _) => "UNEXPECTED",
            (false, Status::HypothesisViolated) => "expected-fail",
            (false, _) => "ok",
        };
        println!("{tag:>13}  {:<55} {:?}", c.case, c.report.status);
    }
    let passed = r.cases.iter().filter(|c| !c.unexpected).count();
    println!("{passed} of {} cases as expected ({:.1} s)", r.cases.len(), r.runtime_ms / 1e3);
    write_json(&cfg.out.join("verify.json"), &report("verify", &cfg, serde_json::to_value(&r).unwrap(), &[]))?;
    if r.unexpected > 0 {
        Err(Failure::Unexpected(r.unexpected))
    } else {
        Ok(())
    }
}

fn run(cli: Cli) -> Outcome {
    let raw = match &cli.config {
        Some(p) => read_config(p)?,
        None => RawConfig::default(),
    };
    let from_csv = match &cli.command {
        Command::Cluster { from_csv } | Command::Limitset { from_csv, .. } | Command::Core { from_csv } => {
            from_csv.clone()
        }
        _ => None,
    };
    let cfg = RunConfig::resolve(
        raw,
        Overrides {
            horizon: cli.horizon,
            h: cli.h,
            out: cli.out,
            seed: cli.seed,
            from_csv,
        },
    )?;
    fs::create_dir_all(&cfg.out)
        .map_err(|e| ConfigError::new("out", format!("cannot create {}: {e}", cfg.out.display())))?;
    match cli.command {
        Command::Generate => generate(cfg),
        Command::Cluster { .. } => cluster(cfg),
        Command::Limitset { method, overlay, .. } => limitset(cfg, method, overlay),
        Command::Core { .. } => core(cfg),
        Command::Meb { points } => meb(cfg, &points),
        Command::Verify { suite } => verify(cfg, suite),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("config error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Compute(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Unexpected(n)) => {
            eprintln!("verification: {n} unexpected result(s)");
            ExitCode::from(3)
        }
    }
}
