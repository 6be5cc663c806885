use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use leadership_core::coordination::{default_window_candidates, infer_window_with};
use leadership_core::eval::{flock_grid, flock_timeline, median_step_length, DatasetEval, EvalReport, FlockParams};
use leadership_core::factions::{detect_merge_split, write_size_ratio_trace, FactionTimeline, TimelineExport};
use leadership_core::network::{NetworkOptions, Preprocess, DEFAULT_SIGMA};
use leadership_core::pipeline::infer;
use leadership_core::sim::{simulate, CascadeParams, EventType, GroundTruth, Manifest, Model, SimConfig};
use leadership_core::Dataset;

#[derive(Parser)]
#[command(name = "leadership", version, about = "Leadership and faction inference from trajectories")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a scripted dataset with ground truth.
    Simulate(SimulateArgs),
    /// Infer factions and initiators from a trajectory CSV.
    Infer(InferArgs),
    /// Score timelines against ground truth.
    Evaluate(EvaluateArgs),
    /// Choose the window length by the coordination measure.
    SweepWindow(SweepArgs),
    /// Run the geometric FLOCK baseline through the faction pipeline.
    BaselineFlock(FlockArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// dm, hm, ic or cm.
    #[arg(long)]
    model: Model,
    /// linear or merge_split.
    #[arg(long)]
    event_type: EventType,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory for data.csv, truth.json and manifest.json.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 30)]
    n: usize,
    #[arg(long, default_value_t = 4000)]
    t_star: usize,
    #[arg(long, default_value_t = 5)]
    events: usize,
    /// Cascade fan-out (ic only).
    #[arg(long, default_value_t = 5)]
    ic_k: usize,
    /// Cascade activation probability (ic only).
    #[arg(long, default_value_t = 0.5)]
    ic_rho: f64,
    /// Informed individuals per faction (cm only).
    #[arg(long, default_value_t = 3)]
    cm_informed: usize,
    #[arg(long, default_value_t = 1.0)]
    speed: f64,
    /// Per-coordinate step noise; defaults to 0.05 * speed.
    #[arg(long)]
    noise: Option<f64>,
}

#[derive(Args)]
struct NetworkArgs {
    #[arg(long, default_value_t = DEFAULT_SIGMA)]
    sigma: f64,
    /// Warping band; defaults to the window shift.
    #[arg(long)]
    band: Option<usize>,
    /// Window shift; defaults to max(1, (omega + 5) / 10).
    #[arg(long)]
    delta: Option<usize>,
    /// Align raw coordinates instead of displacements.
    #[arg(long)]
    raw: bool,
}

impl NetworkArgs {
    fn options(&self) -> NetworkOptions {
        NetworkOptions {
            sigma: self.sigma,
            band: self.band,
            delta: self.delta,
            preprocess: if self.raw { Preprocess::Raw } else { Preprocess::Displacement },
        }
    }
}

#[derive(Args)]
struct InferArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[command(flatten)]
    network: NetworkArgs,
    #[arg(long, conflicts_with = "auto_omega", required_unless_present = "auto_omega")]
    omega: Option<usize>,
    /// Pick omega by the coordination sweep.
    #[arg(long)]
    auto_omega: bool,
    /// Comma-separated sweep candidates; defaults to t*/80, t*/40, t*/20, t*/10.
    #[arg(long, value_delimiter = ',', requires = "auto_omega")]
    candidates: Option<Vec<usize>>,
    /// Output directory for timeline.json and size_ratio.csv.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Timeline JSON; repeat together with --truth for several datasets.
    #[arg(long, required = true)]
    pred: Vec<PathBuf>,
    /// Ground-truth JSON matching each --pred.
    #[arg(long, required = true)]
    truth: Vec<PathBuf>,
    /// Label grouping the datasets in the report.
    #[arg(long, default_value = "all")]
    label: String,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_delimiter = ',')]
    candidates: Option<Vec<usize>>,
    #[command(flatten)]
    network: NetworkArgs,
    /// Write the result here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FlockArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Largest heading difference in radians; defaults to pi / 6.
    #[arg(long)]
    beta: Option<f64>,
    /// Largest distance; defaults to five median step lengths.
    #[arg(long)]
    gamma: Option<f64>,
    /// Sweep beta and gamma against --truth and keep the best F1.
    #[arg(long, requires = "truth")]
    grid: bool,
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Timeline JSON output.
    #[arg(long)]
    out: PathBuf,
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut w = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn load_dataset(path: &Path) -> Result<Dataset> {
    Dataset::load_csv(path).with_context(|| format!("reading {}", path.display()))
}

fn simulate_cmd(a: SimulateArgs) -> Result<()> {
    let mut cfg = SimConfig::new(a.model, a.event_type, a.seed);
    cfg.n = a.n;
    cfg.t_star = a.t_star;
    cfg.events = a.events;
    cfg.cm_informed = a.cm_informed;
    cfg.speed = a.speed;
    cfg.noise_std = a.noise;
    if a.model == Model::Ic {
        cfg.ic = Some(CascadeParams { k: a.ic_k, rho: a.ic_rho });
    }
    let (data, truth) = simulate(&cfg)?;
    fs::create_dir_all(&a.out)?;
    data.save_csv(a.out.join("data.csv"))?;
    truth.save_json(a.out.join("truth.json"))?;
    write_json(&a.out.join("manifest.json"), &Manifest::new(&cfg, data.ids()))
}

fn infer_cmd(a: InferArgs) -> Result<()> {
    let u = load_dataset(&a.input)?;
    let opts = a.network.options();
    fs::create_dir_all(&a.out)?;
    let omega = match a.omega {
        Some(w) => w,
        None => {
            let candidates = a.candidates.unwrap_or_else(|| default_window_candidates(u.len()));
            let sweep = infer_window_with(&u, &candidates, &opts)?;
            write_json(&a.out.join("sweep.json"), &sweep)?;
            sweep.chosen
        }
    };
    let run = infer(&u, omega, &opts)?;
    let ids = u.ids();
    write_json(&a.out.join("timeline.json"), &run.to_export(&ids))?;
    let trace = BufWriter::new(File::create(a.out.join("size_ratio.csv"))?);
    write_size_ratio_trace(&run.timeline, &ids, trace)?;
    Ok(())
}

/// Reorders a predicted timeline into the truth's node order.
fn align(export: &TimelineExport, truth: &GroundTruth) -> Result<FactionTimeline> {
    let timeline = export.to_timeline()?;
    if export.ids == truth.ids() {
        return Ok(timeline);
    }
    let perm = export
        .ids
        .iter()
        .map(|id| truth.ids().iter().position(|t| t == id))
        .collect::<Option<Vec<_>>>()
        .context("prediction and truth cover different ids")?;
    ensure!(perm.len() == truth.n(), "prediction and truth cover different ids");
    Ok(timeline.permuted(&perm))
}

fn evaluate_cmd(a: EvaluateArgs) -> Result<()> {
    if a.pred.len() != a.truth.len() {
        bail!("{} --pred files but {} --truth files", a.pred.len(), a.truth.len());
    }
    let mut datasets = Vec::new();
    for (p, t) in a.pred.iter().zip(&a.truth) {
        let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
        let export: TimelineExport = serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))?;
        let truth = GroundTruth::load_json(t).with_context(|| format!("reading {}", t.display()))?;
        datasets.push(DatasetEval::new(a.label.clone(), &align(&export, &truth)?, &truth)?);
    }
    write_json(&a.out, &EvalReport::new(datasets))
}

fn sweep_cmd(a: SweepArgs) -> Result<()> {
    let u = load_dataset(&a.input)?;
    let candidates = a.candidates.unwrap_or_else(|| default_window_candidates(u.len()));
    let sweep = infer_window_with(&u, &candidates, &a.network.options())?;
    match a.out {
        Some(path) => write_json(&path, &sweep),
        None => {
            serde_json::to_writer_pretty(io::stdout().lock(), &sweep)?;
            println!();
            Ok(())
        }
    }
}

fn flock_cmd(a: FlockArgs) -> Result<()> {
    let u = load_dataset(&a.input)?;
    let mut params = FlockParams::default_for(&u);
    if a.grid {
        let truth = GroundTruth::load_json(a.truth.as_ref().expect("clap enforces --truth"))?;
        let betas: Vec<f64> = [12.0, 6.0, 4.0, 3.0].iter().map(|d| std::f64::consts::PI / d).collect();
        let grid = flock_grid(&u, &truth, &betas, &[1.0, 2.5, 5.0, 10.0, 20.0])?;
        for g in &grid {
            eprintln!("beta {:.4} gamma {:.4} f1 {:.4}", g.params.beta, g.params.gamma, g.f1);
        }
        params = grid[0].params;
    }
    if let Some(b) = a.beta {
        params.beta = b;
    }
    if let Some(g) = a.gamma {
        params.gamma = g;
    }
    params.validate()?;
    eprintln!(
        "beta {:.4} gamma {:.4} (median step {:.4})",
        params.beta,
        params.gamma,
        median_step_length(&u)
    );
    let timeline = flock_timeline(&u, &params)?;
    let events = detect_merge_split(&timeline);
    write_json(&a.out, &TimelineExport::new(&timeline, &u.ids(), &events, None))
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Simulate(a) => simulate_cmd(a),
        Command::Infer(a) => infer_cmd(a),
        Command::Evaluate(a) => evaluate_cmd(a),
        Command::SweepWindow(a) => sweep_cmd(a),
        Command::BaselineFlock(a) => flock_cmd(a),
    }
}
