//! Command-line interface.
//!
//! Exit codes: 0 success, 1 input or output failure, 2 invalid parameters,
//! 3 every trial failed, 4 fixture check failed.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::clustering::{self, Objective, TrialConfig};
use crate::datagen::{self, GenSpec};
use crate::error::Error;
use crate::fixture;
use crate::hopfield::{BipolarState, DEFAULT_MAX_SWEEPS};
use crate::render;
use crate::report::{self, BestClustering, Parameters, ReportDocument, FORMAT_VERSION};
use crate::spchart::{self, ChartType, SpChart, TypeThresholds};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_PARAMS: i32 = 2;
pub const EXIT_ALL_FAILED: i32 = 3;
pub const EXIT_FIXTURE: i32 = 4;

/// Environment variable capping the number of worker threads.
pub const WORKERS_ENV: &str = "SPCLUSTER_WORKERS";

#[derive(Debug, Parser)]
#[command(
    name = "spcluster",
    version,
    about = "Cluster S-P charts by recurrent-network attractors"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Attractor clustering with random restarts.
    Cluster(ClusterArgs),
    /// Score-ordered equal-size split.
    Baseline(BaselineArgs),
    /// Rearranged chart with S- and P-curves.
    Inspect(InspectArgs),
    /// Synthetic chart of a given type.
    Generate(GenerateArgs),
    /// Check the built-in reference example.
    Fixture(FixtureArgs),
}

#[derive(Debug, Args)]
pub struct ThresholdArgs {
    /// Mean correct rate at or above which a chart counts as a drill.
    #[arg(long, default_value_t = 0.65)]
    pub drill_threshold: f64,
    /// Mean correct rate at or below which a chart counts as a pre-test.
    #[arg(long, default_value_t = 0.35)]
    pub pretest_threshold: f64,
}

impl ThresholdArgs {
    fn thresholds(&self) -> Result<TypeThresholds, CliError> {
        let t = TypeThresholds {
            drill: self.drill_threshold,
            pretest: self.pretest_threshold,
        };
        if !(0.0..=1.0).contains(&t.drill)
            || !(0.0..=1.0).contains(&t.pretest)
            || t.pretest >= t.drill
        {
            return Err(CliError::params(
                "--drill-threshold/--pretest-threshold must lie in [0, 1] with pretest < drill",
            ));
        }
        Ok(t)
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ObjectiveArg {
    F2,
    F1,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Desired number of clusters M.
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u64).range(1..))]
    pub clusters: u64,
    #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// JSON report path.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Directory for per-cluster rearranged charts (CSV and text rendering).
    #[arg(long)]
    pub emit_charts: Option<PathBuf>,
    /// Primary selection criterion for the best trial.
    #[arg(long, value_enum, default_value = "f2")]
    pub objective: ObjectiveArg,
    #[arg(long, default_value_t = DEFAULT_MAX_SWEEPS as u64, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_sweeps: u64,
    /// Let trials with more than M clusters compete for best.
    #[arg(long)]
    pub allow_extra_clusters: bool,
    /// Worker threads; the report does not depend on it.
    #[arg(long, env = WORKERS_ENV, value_parser = clap::value_parser!(u64).range(1..))]
    pub workers: Option<u64>,
    #[command(flatten)]
    pub thresholds: ThresholdArgs,
}

#[derive(Debug, Args)]
pub struct BaselineArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u64).range(1..))]
    pub clusters: u64,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub emit_charts: Option<PathBuf>,
    #[command(flatten)]
    pub thresholds: ThresholdArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum RenderFormat {
    Txt,
    Svg,
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "txt")]
    pub format: RenderFormat,
    /// Rendering destination; standard output when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub thresholds: ThresholdArgs,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// test, drill or pretest.
    #[arg(long = "type")]
    pub chart_type: ChartType,
    #[arg(long, default_value_t = 100)]
    pub students: usize,
    #[arg(long, default_value_t = 10)]
    pub problems: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Per-cell flip probability, at most 0.5.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    /// CSV destination; standard output when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FixtureArgs {
    /// Flip one representative bit, given as ROW,COL (1-indexed), before checking.
    #[arg(long, hide = true, value_parser = parse_position)]
    pub flip_bit: Option<(usize, usize)>,
}

fn parse_position(s: &str) -> Result<(usize, usize), String> {
    let (r, c) = s.split_once(',').ok_or("expected ROW,COL")?;
    let r: usize = r.trim().parse().map_err(|e| format!("row: {e}"))?;
    let c: usize = c.trim().parse().map_err(|e| format!("col: {e}"))?;
    if !(1..=4).contains(&r) || !(1..=10).contains(&c) {
        return Err("position outside the 4x10 representative block".into());
    }
    Ok((r, c))
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn params(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_PARAMS,
            message: message.into(),
        }
    }

    fn io(path: &Path, err: std::io::Error) -> Self {
        Self {
            code: EXIT_INPUT,
            message: format!("{}: {err}", path.display()),
        }
    }

    fn from_error(context: &str, err: Error) -> Self {
        let code = match err {
            Error::InvalidParameter(_) | Error::MTooLarge { .. } => EXIT_PARAMS,
            Error::AllTrialsFailed { .. } => EXIT_ALL_FAILED,
            _ => EXIT_INPUT,
        };
        Self {
            code,
            message: format!("{context}: {err}"),
        }
    }
}

/// Parses `args` (program name first) and runs the command, writing normal
/// output to `out`. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_PARAMS } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Cluster(a) => cmd_cluster(&a, out),
        Command::Baseline(a) => cmd_baseline(&a, out),
        Command::Inspect(a) => cmd_inspect(&a, out),
        Command::Generate(a) => cmd_generate(&a, out),
        Command::Fixture(a) => cmd_fixture(&a, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

fn load_chart(path: &Path) -> Result<(Vec<u8>, SpChart), CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    let chart = spchart::parse_chart(bytes.as_slice())
        .map_err(|e| CliError::from_error(&format!("--input {}", path.display()), e))?;
    Ok((bytes, chart))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn check_clusters(clusters: u64, chart: &SpChart) -> Result<usize, CliError> {
    let m = clusters as usize;
    if m > chart.students() {
        return Err(CliError::params(format!(
            "--clusters {m} exceeds the number of students ({})",
            chart.students()
        )));
    }
    Ok(m)
}

fn emit_charts(
    dir: &Path,
    chart: &SpChart,
    doc: &ReportDocument,
    members: &[Vec<usize>],
) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    for (entry, rows) in doc.best.clusters.iter().zip(members) {
        let sub = chart
            .select_rows(rows)
            .map_err(|e| CliError::from_error("cluster", e))?;
        let rc = spchart::rearrange(&sub);
        let stem = format!("cluster_{}", entry.cluster);
        write_file(&dir.join(format!("{stem}.csv")), &rc.chart.to_csv())?;
        write_file(&dir.join(format!("{stem}.txt")), &render::render_text(&rc))?;
        write_file(&dir.join(format!("{stem}.svg")), &render::render_svg(&rc))?;
    }
    Ok(())
}

fn finish_report(
    doc: &ReportDocument,
    output: Option<&Path>,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    if let Some(path) = output {
        write_file(path, &doc.to_json())?;
    }
    let _ = out.write_all(doc.summary_table().as_bytes());
    Ok(())
}

pub fn cmd_cluster(args: &ClusterArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let thresholds = args.thresholds.thresholds()?;
    let (bytes, chart) = load_chart(&args.input)?;
    let m = check_clusters(args.clusters, &chart)?;
    let config = TrialConfig {
        clusters: m,
        trials: args.trials as usize,
        master_seed: args.seed,
        objective: match args.objective {
            ObjectiveArg::F2 => Objective::F2ThenF1,
            ObjectiveArg::F1 => Objective::F1ThenF2,
        },
        max_sweeps: args.max_sweeps as usize,
        cap_clusters: !args.allow_extra_clusters,
        workers: args.workers.map(|w| w as usize),
    };
    let run = clustering::run_trials(&chart, &config)
        .map_err(|e| CliError::from_error("clustering", e))?;
    let best = &run.best;
    let doc = ReportDocument {
        format_version: FORMAT_VERSION.into(),
        command: "cluster".into(),
        input_digest: report::input_digest(&bytes),
        students: chart.students(),
        problems: chart.problems(),
        parameters: Parameters {
            clusters: m,
            trials: Some(config.trials),
            seed: Some(config.master_seed),
            objective: Some(config.objective),
            max_sweeps: Some(config.max_sweeps),
            cap_clusters: Some(config.cap_clusters),
            thresholds,
        },
        whole_chart_average_caution: spchart::average_caution(&chart),
        whole_chart_type: spchart::classify_type_with(&chart, thresholds),
        best: BestClustering {
            trial_index: Some(best.trial_index),
            representatives: best
                .clustering
                .representatives
                .iter()
                .map(|&i| chart.rows()[i].student_id.clone())
                .collect(),
            f1: best.f1,
            f2: best.f2,
            clusters: report::cluster_entries(&chart, &best.clustering, thresholds),
            sweeps_histogram: best.sweeps_histogram.clone(),
        },
        trials: report::trial_rows(&run),
    };
    if let Some(dir) = &args.emit_charts {
        let members: Vec<Vec<usize>> = best
            .clustering
            .clusters
            .iter()
            .map(|c| c.members.clone())
            .collect();
        emit_charts(dir, &chart, &doc, &members)?;
    }
    finish_report(&doc, args.output.as_deref(), out)?;
    Ok(EXIT_OK)
}

pub fn cmd_baseline(args: &BaselineArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let thresholds = args.thresholds.thresholds()?;
    let (bytes, chart) = load_chart(&args.input)?;
    let m = check_clusters(args.clusters, &chart)?;
    let c =
        clustering::score_baseline(&chart, m).map_err(|e| CliError::from_error("baseline", e))?;
    let doc = ReportDocument {
        format_version: FORMAT_VERSION.into(),
        command: "baseline".into(),
        input_digest: report::input_digest(&bytes),
        students: chart.students(),
        problems: chart.problems(),
        parameters: Parameters {
            clusters: m,
            trials: None,
            seed: None,
            objective: None,
            max_sweeps: None,
            cap_clusters: None,
            thresholds,
        },
        whole_chart_average_caution: spchart::average_caution(&chart),
        whole_chart_type: spchart::classify_type_with(&chart, thresholds),
        best: BestClustering {
            trial_index: None,
            representatives: Vec::new(),
            f1: clustering::f1(&c, m),
            f2: clustering::f2(&c).map_err(|e| CliError::from_error("baseline", e))?,
            clusters: report::cluster_entries(&chart, &c, thresholds),
            sweeps_histogram: Default::default(),
        },
        trials: Vec::new(),
    };
    if let Some(dir) = &args.emit_charts {
        let members: Vec<Vec<usize>> = c.clusters.iter().map(|c| c.members.clone()).collect();
        emit_charts(dir, &chart, &doc, &members)?;
    }
    finish_report(&doc, args.output.as_deref(), out)?;
    Ok(EXIT_OK)
}

pub fn cmd_inspect(args: &InspectArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let thresholds = args.thresholds.thresholds()?;
    let (_, chart) = load_chart(&args.input)?;
    let rc = spchart::rearrange(&chart);
    let rendering = match args.format {
        RenderFormat::Txt => render::render_text(&rc),
        RenderFormat::Svg => render::render_svg(&rc),
    };
    let join = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(" ");
    let mut summary = String::new();
    summary.push_str(&format!(
        "students: {}\nproblems: {}\n",
        chart.students(),
        chart.problems()
    ));
    summary.push_str(&format!("S: {}\n", join(&rc.s_totals)));
    summary.push_str(&format!("P: {}\n", join(&rc.p_totals)));
    summary.push_str(&format!(
        "type: {}\n",
        spchart::classify_type_with(&chart, thresholds)
    ));
    summary.push_str(&format!(
        "average caution: {:.3}\n",
        spchart::average_caution(&chart)
    ));
    match &args.output {
        Some(path) => {
            write_file(path, &rendering)?;
            let _ = out.write_all(summary.as_bytes());
        }
        None => {
            let _ = out.write_all(rendering.as_bytes());
            let _ = out.write_all(b"\n");
            let _ = out.write_all(summary.as_bytes());
        }
    }
    Ok(EXIT_OK)
}

pub fn cmd_generate(args: &GenerateArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let spec = GenSpec {
        chart_type: args.chart_type,
        students: args.students,
        problems: args.problems,
        seed: args.seed,
        noise: args.noise,
    };
    spec.validate()
        .map_err(|e| CliError::from_error("generate", e))?;
    let chart = datagen::generate_chart(&spec).map_err(|e| CliError::from_error("generate", e))?;
    let csv = chart.to_csv();
    match &args.output {
        Some(path) => write_file(path, &csv)?,
        None => {
            let _ = out.write_all(csv.as_bytes());
        }
    }
    Ok(EXIT_OK)
}

pub fn cmd_fixture(args: &FixtureArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let mut reps = fixture::REPRESENTATIVES;
    if let Some((r, c)) = args.flip_bit {
        reps[r - 1][c - 1] ^= 1;
    }
    let check = fixture::check(&reps).map_err(|e| CliError::from_error("fixture", e))?;
    let bits = |b: &[u8]| b.iter().map(|v| char::from(b'0' + v)).collect::<String>();

    let mut text = String::from("representatives:\n");
    for (id, r) in fixture::REPRESENTATIVE_IDS.iter().zip(&reps) {
        text.push_str(&format!("  {id}: {}\n", bits(r)));
    }
    text.push_str("connection matrix:\n");
    for line in check.weights.to_string().lines() {
        text.push_str(&format!("  {line}\n"));
    }
    text.push_str(&format!("fixed points ({}):\n", check.fixed_points.len()));
    for p in &check.fixed_points {
        text.push_str(&format!("  {}\n", p.to_bit_string()));
    }
    if check.weight_mismatches.is_empty() {
        text.push_str("matrix check: ok\n");
    } else {
        text.push_str(&format!(
            "matrix check: FAILED ({} entries differ)\n",
            check.weight_mismatches.len()
        ));
        for (i, j, want, got) in &check.weight_mismatches {
            text.push_str(&format!("  w[{i},{j}] expected {want}, learned {got}\n"));
        }
    }
    if !check.published_mismatches.is_empty() {
        let cells: Vec<String> = check
            .published_mismatches
            .iter()
            .map(|(i, j, want, got)| format!("w[{i},{j}] published {want}, learned {got}"))
            .collect();
        text.push_str(&format!(
            "note: published matrix differs: {}\n",
            cells.join("; ")
        ));
    }
    for p in fixture::FIXED_POINTS {
        let found = check.fixed_points.contains(&BipolarState::from_binary(&p));
        text.push_str(&format!(
            "fixed point {}: {}\n",
            bits(&p),
            if found { "ok" } else { "MISSING" }
        ));
    }
    let passed = check.passed();
    text.push_str(if passed {
        "fixture: ok\n"
    } else {
        "fixture: FAILED\n"
    });
    let _ = out.write_all(text.as_bytes());
    Ok(if passed { EXIT_OK } else { EXIT_FIXTURE })
}
