use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use tagstack::manifest::{sidecar_path, FileDigest, RunManifest};
use tagstack::{io, load_dataset, report, Runner};
use tagstack_core::corpus::OverlapAveraging;
use tagstack_core::synth::{self, SynthConfig};
use tagstack_core::{ClusterConfig, Dataset};

/// Cluster each user's tagged bookmarks and score the clusters against
/// the user's own stacks.
#[derive(Parser)]
#[command(name = "tagstack", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print dataset statistics as metric,value CSV.
    Stats(StatsArgs),
    /// Macroaveraged P/R/F1 of repeated bisections for each K.
    Sweep(SweepArgs),
    /// rbr against the random baseline, random-K and optimal-K.
    Bench(BenchArgs),
    /// Write a planted-topic corpus.
    Synth(SynthArgs),
}

#[derive(Args)]
struct Inputs {
    #[arg(long)]
    assignments: PathBuf,
    #[arg(long)]
    stacks: PathBuf,
}

#[derive(Args)]
struct StatsArgs {
    #[command(flatten)]
    inputs: Inputs,
    /// per-user or pooled
    #[arg(long, default_value_t = OverlapAveraging::PerUser)]
    overlap: OverlapAveraging,
    /// Write here (plus a manifest) instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    inputs: Inputs,
    #[arg(long, default_value_t = 2)]
    k_min: usize,
    #[arg(long, default_value_t = 10)]
    k_max: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    sweep: SweepArgs,
    #[arg(long, default_value_t = tagstack_core::eval::DEFAULT_RUNS)]
    runs: usize,
}

/// Unset flags take the standard benchmark's values.
#[derive(Args)]
struct SynthArgs {
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    users: Option<usize>,
    #[arg(long)]
    pages_min: Option<usize>,
    #[arg(long)]
    pages_max: Option<usize>,
    #[arg(long)]
    topics_min: Option<usize>,
    #[arg(long)]
    topics_max: Option<usize>,
    #[arg(long)]
    stacks_min: Option<usize>,
    #[arg(long)]
    stacks_max: Option<usize>,
    #[arg(long)]
    tags_per_topic: Option<usize>,
    #[arg(long)]
    tags_per_page: Option<usize>,
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long)]
    stack_noise: Option<f64>,
    #[arg(long)]
    noise_tags: Option<usize>,
    #[arg(long)]
    stack_share: Option<f64>,
    #[arg(long)]
    stacked_fraction: Option<f64>,
    #[arg(long)]
    common_tag_fraction: Option<f64>,
}

enum Failure {
    Usage(String),
    Data(String),
}

impl Failure {
    fn data(e: impl std::fmt::Display) -> Self {
        Self::Data(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    let result = match cli.cmd {
        Cmd::Stats(a) => stats(a),
        Cmd::Sweep(a) => sweep(a),
        Cmd::Bench(a) => bench(a),
        Cmd::Synth(a) => synth(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("tagstack: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Data(m)) => {
            eprintln!("tagstack: {m}");
            ExitCode::from(2)
        }
    }
}

fn load(inputs: &Inputs, m: &mut RunManifest) -> Result<Dataset, Failure> {
    let d = load_dataset(&inputs.assignments, &inputs.stacks).map_err(Failure::data)?;
    for p in [&inputs.assignments, &inputs.stacks] {
        m.inputs.push(FileDigest::of_file(p).map_err(Failure::data)?);
    }
    Ok(d)
}

/// Writes `text` to `out` with its manifest, or prints it.
fn emit(text: &str, out: Option<&Path>, mut m: RunManifest) -> Outcome {
    let Some(out) = out else {
        print!("{text}");
        return Ok(());
    };
    let io_err = |p: &Path, e: std::io::Error| Failure::Data(format!("{}: {e}", p.display()));
    io::write_file(out, text.as_bytes()).map_err(|e| io_err(out, e))?;
    m.outputs.push(FileDigest::of_bytes(out, text.as_bytes()));
    let side = sidecar_path(out);
    io::write_file(&side, m.to_json().as_bytes()).map_err(|e| io_err(&side, e))
}

fn stats(a: StatsArgs) -> Outcome {
    let mut m = RunManifest::new("stats");
    m.param("overlap", a.overlap.to_string());
    let d = load(&a.inputs, &mut m)?;
    emit(&report::stats_csv(&d, a.overlap), a.out.as_deref(), m)
}

fn check_sweep(a: &SweepArgs) -> Outcome {
    if a.k_min == 0 {
        return Err(Failure::Usage("--k-min must be at least 1".into()));
    }
    if a.k_min > a.k_max {
        return Err(Failure::Usage(format!(
            "--k-min ({}) exceeds --k-max ({})",
            a.k_min, a.k_max
        )));
    }
    if a.jobs == Some(0) {
        return Err(Failure::Usage("--jobs must be at least 1".into()));
    }
    Ok(())
}

fn prepare(a: &SweepArgs, command: &str) -> Result<(Runner, ClusterConfig, RunManifest), Failure> {
    let runner = Runner::new(a.jobs).map_err(Failure::data)?;
    let cfg = ClusterConfig {
        seed: a.seed,
        ..ClusterConfig::default()
    };
    let mut m = RunManifest::new(command);
    m.param("k_min", a.k_min)
        .param("k_max", a.k_max)
        .param("seed", a.seed)
        .param("jobs", runner.threads())
        .param("trials_per_bisection", cfg.trials_per_bisection)
        .param("max_2means_iterations", cfg.max_2means_iterations)
        .param("max_refinement_passes", cfg.max_refinement_passes)
        .param("tie_tolerance", cfg.tie_tolerance);
    Ok((runner, cfg, m))
}

fn sweep(a: SweepArgs) -> Outcome {
    check_sweep(&a)?;
    let (runner, cfg, mut m) = prepare(&a, "sweep")?;
    let d = load(&a.inputs, &mut m)?;
    let r = runner.sweep(&d, a.k_min, a.k_max, &cfg).map_err(Failure::data)?;
    emit(&report::sweep_csv(&r), a.out.as_deref(), m)
}

fn bench(a: BenchArgs) -> Outcome {
    check_sweep(&a.sweep)?;
    if a.runs == 0 {
        return Err(Failure::Usage("--runs must be at least 1".into()));
    }
    let s = &a.sweep;
    let (runner, cfg, mut m) = prepare(s, "bench")?;
    m.param("runs", a.runs);
    let d = load(&s.inputs, &mut m)?;
    let r = runner
        .bench(&d, s.k_min, s.k_max, a.runs, s.seed, &cfg)
        .map_err(Failure::data)?;
    emit(&report::bench_csv(&r), s.out.as_deref(), m)
}

fn synth_config(a: &SynthArgs) -> SynthConfig {
    let d = SynthConfig::default();
    let range = |lo: Option<usize>, hi: Option<usize>, def: &std::ops::RangeInclusive<usize>| {
        lo.unwrap_or(*def.start())..=hi.unwrap_or(*def.end())
    };
    SynthConfig {
        n_users: a.users.unwrap_or(d.n_users),
        pages_per_user: range(a.pages_min, a.pages_max, &d.pages_per_user),
        topics_per_user: range(a.topics_min, a.topics_max, &d.topics_per_user),
        stacks_per_user: range(a.stacks_min, a.stacks_max, &d.stacks_per_user),
        tags_per_topic: a.tags_per_topic.unwrap_or(d.tags_per_topic),
        tags_per_page: a.tags_per_page.unwrap_or(d.tags_per_page),
        noise: a.noise.unwrap_or(d.noise),
        stack_noise: a.stack_noise.unwrap_or(d.stack_noise),
        global_noise_tags: a.noise_tags.unwrap_or(d.global_noise_tags),
        stack_share: a.stack_share.unwrap_or(d.stack_share),
        stacked_fraction_target: a.stacked_fraction.unwrap_or(d.stacked_fraction_target),
        common_tag_fraction_target: a.common_tag_fraction.unwrap_or(d.common_tag_fraction_target),
        seed: a.seed.unwrap_or(d.seed),
    }
}

fn synth(a: SynthArgs) -> Outcome {
    let cfg = synth_config(&a);
    let (d, topics) = synth::generate(&cfg).map_err(Failure::data)?;
    std::fs::create_dir_all(&a.out).map_err(|e| Failure::Data(format!("{}: {e}", a.out.display())))?;

    let mut m = RunManifest::new("synth");
    m.param("users", cfg.n_users)
        .param(
            "pages_per_user",
            json!([cfg.pages_per_user.start(), cfg.pages_per_user.end()]),
        )
        .param(
            "topics_per_user",
            json!([cfg.topics_per_user.start(), cfg.topics_per_user.end()]),
        )
        .param(
            "stacks_per_user",
            json!([cfg.stacks_per_user.start(), cfg.stacks_per_user.end()]),
        )
        .param("tags_per_topic", cfg.tags_per_topic)
        .param("tags_per_page", cfg.tags_per_page)
        .param("noise", cfg.noise)
        .param("stack_noise", cfg.stack_noise)
        .param("noise_tags", cfg.global_noise_tags)
        .param("stack_share", cfg.stack_share)
        .param("stacked_fraction", cfg.stacked_fraction_target)
        .param("common_tag_fraction", cfg.common_tag_fraction_target)
        .param("seed", cfg.seed);
    for (name, bytes) in [
        ("assignments.jsonl", io::assignments_jsonl(&d)),
        ("stacks.jsonl", io::stacks_jsonl(&d)),
        ("topics.jsonl", io::topics_jsonl(&topics)),
    ] {
        let p = a.out.join(name);
        io::write_file(&p, &bytes).map_err(|e| Failure::Data(format!("{}: {e}", p.display())))?;
        m.outputs.push(FileDigest::of_bytes(&p, &bytes));
    }
    let p = a.out.join("manifest.json");
    io::write_file(&p, m.to_json().as_bytes()).map_err(|e| Failure::Data(format!("{}: {e}", p.display())))
}
