//! `maps`: runs policies against the game service, studies trajectory noise and
//! replays traces.

mod embedded;

use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use maps_client::{run_remote_episode, GameClient, OpenAiBackend, OpenAiConfig};
use maps_core::agents::react::{render_system_prompt, ChatBackend, LoggingBackend, ReactPolicy, ReplayBackend};
use maps_core::agents::{build_policy, Policy, POLICY_NAMES};
use maps_core::game::parse_trace;
use maps_core::harness::{emit_report, replay_trace, trace_actions, trajectory_cv, HumanReferenceTable, TrajectoryCv};
use maps_core::{Catalog, Difficulty, Layout};
use maps_server::{RateLimit, ServerConfig};

#[derive(Parser)]
#[command(name = "maps", version, about = "Mini Amusement Parks simulator client")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the game service.
    Serve(ServeArgs),
    /// Play evaluation episodes through the game service and write a report.
    Run(RunArgs),
    /// Replay a trace's actions on fresh seeds and report per-day coefficients of variation.
    Cv(CvArgs),
    /// Re-simulate a trace and check every observation byte for byte.
    Replay(ReplayArgs),
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1:8080")]
    addr: SocketAddr,
    #[arg(long, default_value = "maps-data")]
    data_dir: PathBuf,
    /// Requests a token may make in a burst.
    #[arg(long, default_value_t = RateLimit::default().burst)]
    rate_burst: u32,
    /// Sustained requests per second per token.
    #[arg(long, default_value_t = RateLimit::default().per_second)]
    rate_per_second: f64,
    /// TOML file overriding human reference values, `[layout] easy = 123`.
    #[arg(long)]
    references: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    layout: String,
    #[arg(long, default_value = "easy")]
    difficulty: Difficulty,
    /// Seed of the first episode; later episodes use the following seeds.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    episodes: u64,
    /// One of the scripted policies, or `react` for a chat-model policy.
    #[arg(long)]
    policy: String,
    #[arg(long)]
    out: PathBuf,
    /// Service to play on. Without it an embedded service is started with its data under `<out>/service`.
    #[arg(long, env = "MAPS_SERVER")]
    server: Option<String>,
    /// Submit each finished episode to the leaderboard under this name.
    #[arg(long)]
    player: Option<String>,
    #[arg(long)]
    references: Option<PathBuf>,
    #[command(flatten)]
    llm: LlmArgs,
}

#[derive(Args)]
struct LlmArgs {
    /// Chat-completions base URL for `--policy react`, e.g. `https://api.openai.com/v1`.
    #[arg(long, env = "MAPS_LLM_BASE_URL")]
    llm_base_url: Option<String>,
    #[arg(long, env = "MAPS_LLM_MODEL")]
    model: Option<String>,
    /// Environment variable holding the API key.
    #[arg(long, default_value = "OPENAI_API_KEY")]
    api_key_env: String,
    #[arg(long, default_value_t = 0.0)]
    temperature: f64,
    /// Play `react` from a recorded transcript instead of calling a model.
    #[arg(long)]
    replay_transcript: Option<PathBuf>,
}

#[derive(Args)]
struct CvArgs {
    #[arg(long)]
    trajectory: PathBuf,
    #[arg(long, default_value_t = 10)]
    n: usize,
    /// Seeds the stream the replay seeds are drawn from.
    #[arg(long, default_value_t = 1)]
    base_seed: u64,
    /// Also write `manifest.json` and `cv.csv` here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReplayArgs {
    trace: PathBuf,
}

fn references(path: Option<&Path>) -> Result<HumanReferenceTable> {
    let mut table = HumanReferenceTable::shipped();
    if let Some(p) = path {
        let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
        table.apply_overrides(&text)?;
    }
    Ok(table)
}

fn serve(args: ServeArgs) -> Result<()> {
    let config = ServerConfig {
        data_dir: args.data_dir,
        rate_limit: RateLimit { burst: args.rate_burst, per_second: args.rate_per_second },
        references: references(args.references.as_deref())?,
    };
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(maps_server::run(args.addr, config))?;
    Ok(())
}

fn chat_backend(llm: &LlmArgs) -> Result<Box<dyn ChatBackend>> {
    if let Some(path) = &llm.replay_transcript {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        return Ok(Box::new(ReplayBackend::from_transcript(&text)?));
    }
    let (Some(base), Some(model)) = (&llm.llm_base_url, &llm.model) else {
        bail!("--policy react needs --llm-base-url and --model, or --replay-transcript");
    };
    let mut config = OpenAiConfig::new(base.clone(), model.clone());
    config.api_key = std::env::var(&llm.api_key_env).ok();
    config.temperature = llm.temperature;
    Ok(Box::new(OpenAiBackend::new(config)?))
}

fn make_policy(args: &RunArgs, client: &GameClient, catalog: &Catalog, seed: u64) -> Result<Box<dyn Policy>> {
    if args.policy == "react" {
        let horizon = match args.difficulty {
            Difficulty::Easy => catalog.params.horizon_easy,
            Difficulty::Medium => catalog.params.horizon_medium,
        };
        let manual = client.manual(false)?;
        let transcripts = args.out.join("transcripts");
        fs::create_dir_all(&transcripts)?;
        let log = transcripts.join(format!("{}-{}-{seed}.jsonl", args.layout, args.difficulty));
        let backend = LoggingBackend::new(chat_backend(&args.llm)?, log);
        let prompt = render_system_prompt(horizon, args.difficulty, &manual);
        return Ok(Box::new(ReactPolicy::new(Box::new(backend), prompt)));
    }
    build_policy(&args.policy, seed).with_context(|| {
        format!("unknown policy {:?}; choose one of {} or react", args.policy, POLICY_NAMES.join(", "))
    })
}

fn run(args: RunArgs) -> Result<()> {
    let refs = references(args.references.as_deref())?;
    let base_url = match &args.server {
        Some(url) => url.clone(),
        None => embedded::start(ServerConfig { references: refs.clone(), ..ServerConfig::new(args.out.join("service")) })?,
    };
    let client = GameClient::new(&base_url)?;
    client.wait_until_ready(std::time::Duration::from_secs(10))?;
    let catalog = Arc::new(Catalog::shipped());
    let mut results = Vec::new();
    for seed in args.seed..args.seed + args.episodes {
        let mut policy = make_policy(&args, &client, &catalog, seed)?;
        let (result, game) =
            run_remote_episode(&client, catalog.clone(), policy.as_mut(), &args.layout, args.difficulty, seed, &refs)?;
        let score = result.normalized_score.map_or_else(|| "n/a".to_string(), |s| format!("{s:.2}"));
        println!(
            "{} {} seed {}: value {} score {} invalid {} game {}",
            result.layout,
            result.difficulty,
            seed,
            result.final_value,
            score,
            result.invalid_actions,
            game.id()
        );
        if let Some(player) = &args.player {
            let entry = client.submit_score(game.id(), game.token(), player)?;
            println!("  leaderboard: {} scored {:.2} (attempt {})", entry.player, entry.normalized_score, entry.attempt);
        }
        results.push(result);
    }
    emit_report(&args.out, &results, None)?;
    println!("report written to {}", args.out.display());
    Ok(())
}

fn print_cv(report: &TrajectoryCv) {
    println!("{} {}: {} runs kept, {} discarded{}", report.layout, report.difficulty, report.kept_runs, report.discarded_runs,
        if report.partial { " (partial)" } else { "" });
    println!("{:>4} {:>12} {:>12} {:>12} {:>14}", "day", "revenue_cv", "money_cv", "value_cv", "mean_value");
    for d in &report.days {
        println!("{:>4} {:>12.6} {:>12.6} {:>12.6} {:>14.2}", d.day, d.cv.revenue, d.cv.money, d.cv.value, d.mean_value);
    }
}

fn cv(args: CvArgs) -> Result<()> {
    if args.n < 2 {
        bail!("--n must be at least 2");
    }
    let text = fs::read_to_string(&args.trajectory).with_context(|| format!("reading {}", args.trajectory.display()))?;
    let (header, _) = parse_trace(&text).context("not a trace file")?;
    let actions = trace_actions(&text)?;
    let layout = Layout::shipped(&header.layout)?;
    let catalog = Catalog::shipped();
    let report = trajectory_cv(&actions, &catalog, &layout, header.difficulty, args.n, args.base_seed);
    print_cv(&report);
    if let Some(out) = &args.out {
        emit_report(out, &[], Some(&report))?;
    }
    Ok(())
}

fn replay(args: ReplayArgs) -> Result<bool> {
    let text = fs::read_to_string(&args.trace).with_context(|| format!("reading {}", args.trace.display()))?;
    let report = replay_trace(Arc::new(Catalog::shipped()), &text)?;
    println!("days replayed: {}", report.days);
    println!("initial observation matches: {}", report.header_matches);
    if report.mismatched_days.is_empty() {
        println!("every observation matches");
    } else {
        println!("mismatched days: {:?}", report.mismatched_days);
    }
    println!("final value: {}", report.final_value);
    Ok(report.faithful())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let default_level = if matches!(cli.command, Command::Serve(_)) { "info" } else { "warn" };
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env()
                .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new(default_level)),
        )
        .with_writer(std::io::stderr)
        .init();
    let outcome = match cli.command {
        Command::Serve(a) => serve(a).map(|_| true),
        Command::Run(a) => run(a).map(|_| true),
        Command::Cv(a) => cv(a).map(|_| true),
        Command::Replay(a) => replay(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
