//! `spatialui`: run a live session over the frame protocol, replay a
//! script into an event trace, or validate input files.
//!
//! Exit codes: 0 success, 2 malformed input file, 3 protocol error, 1 any
//! other failure.

use std::fs;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::mpsc;
use std::thread;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand};
use spatialui_core::geo::{load_chargers, load_point_cloud};
use spatialui_core::layout::{ContextRules, LayoutDocument};
use spatialui_core::runtime::{
    apply_directive, build_demo_world, parse_line, run_replay, Config, ReplayScript, RuntimeError, ScriptLine, World,
};

#[derive(Parser)]
#[command(name = "spatialui", version, about = "Spatial GUI toolkit driver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct WorldArgs {
    /// Charger CSV (`id,lat,lon,type,available,scan_path`).
    #[arg(long)]
    chargers: PathBuf,
    /// Saved layout to apply at start.
    #[arg(long)]
    layout: Option<PathBuf>,
    /// Context rules file; built-in rules otherwise.
    #[arg(long)]
    rules: Option<PathBuf>,
    /// TOML config with widget, input, snap and map settings.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Live session: frames in, event and snapshot records out, one JSON
    /// object per line. Uses stdin/stdout unless --serve is given.
    Run {
        #[command(flatten)]
        world: WorldArgs,
        /// Accept one TCP client on 127.0.0.1:<port> instead of stdin/stdout.
        #[arg(long)]
        serve: Option<u16>,
    },
    /// Feed a replay script through the demo world and write the event trace.
    Replay {
        #[arg(long)]
        script: PathBuf,
        #[command(flatten)]
        world: WorldArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check a charger CSV, layout or rules JSON, PLY point cloud, TOML
    /// config or JSONL replay script.
    Validate { file: PathBuf },
}

struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl Failure {
    fn format(error: impl Into<anyhow::Error>) -> Self {
        Self { code: 2, error: error.into() }
    }

    fn protocol(error: impl Into<anyhow::Error>) -> Self {
        Self { code: 3, error: error.into() }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        Self { code: 1, error }
    }
}

impl From<RuntimeError> for Failure {
    fn from(e: RuntimeError) -> Self {
        let code = e.exit_code() as u8;
        Self { code, error: e.into() }
    }
}

type CliResult<T> = Result<T, Failure>;

fn read_input(path: &Path) -> CliResult<String> {
    fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(Failure::format)
}

fn load_world(args: &WorldArgs) -> CliResult<World> {
    let config = match &args.config {
        Some(p) => Config::from_toml(&read_input(p)?).map_err(|e| Failure::format(anyhow!("{}: {e}", p.display())))?,
        None => Config::default(),
    };
    let rules = match &args.rules {
        Some(p) => Some(ContextRules::from_json(&read_input(p)?).map_err(|e| Failure::format(anyhow!("{}: {e}", p.display())))?),
        None => None,
    };
    let layout = match &args.layout {
        Some(p) => Some(LayoutDocument::from_json(&read_input(p)?).map_err(|e| Failure::format(anyhow!("{}: {e}", p.display())))?),
        None => None,
    };
    let csv = read_input(&args.chargers)?;
    let demo = build_demo_world(&config, &csv, rules, layout.as_ref())
        .map_err(|e| Failure::format(anyhow!("{}: {e}", args.chargers.display())))?;
    for row in &demo.row_errors {
        eprintln!("warning: {}: {row}", args.chargers.display());
    }
    let mut world = demo.world;
    attach_scans(&mut world, &args.chargers);
    for w in world.take_warnings() {
        eprintln!("warning: {w}");
    }
    Ok(world)
}

/// Loads each charger's scan, resolving paths against the CSV's directory.
/// Missing or unreadable scans only warn.
fn attach_scans(world: &mut World, csv_path: &Path) {
    let base = csv_path.parent().unwrap_or(Path::new("."));
    let wanted: Vec<(String, PathBuf)> = world
        .chargers()
        .iter()
        .filter_map(|r| Some((r.id.clone(), base.join(r.scan_path.as_ref()?))))
        .collect();
    for (id, path) in wanted {
        match fs::read_to_string(&path).map_err(anyhow::Error::from).and_then(|t| Ok(load_point_cloud(&t)?)) {
            Ok(cloud) => world.attach_scan(&id, cloud),
            Err(e) => eprintln!("warning: scan for {id} ({}): {e}", path.display()),
        }
    }
}

/// Ticks the world with each incoming line until the input ends.
///
/// Lines are read on a separate thread and handed over in order through a
/// channel, so a slow consumer never blocks the reader on a socket.
fn serve_session(world: &mut World, input: impl BufRead + Send + 'static, output: impl Write) -> CliResult<()> {
    let (tx, rx) = mpsc::channel::<io::Result<String>>();
    let reader = thread::spawn(move || {
        for line in input.lines() {
            let failed = line.is_err();
            if tx.send(line).is_err() || failed {
                break;
            }
        }
    });
    let mut out = BufWriter::new(output);
    let mut result = Ok(());
    for (index, line) in rx.iter().enumerate() {
        let line = match line {
            Ok(l) => l,
            Err(e) => {
                result = Err(Failure::from(anyhow::Error::from(e).context("reading frames")));
                break;
            }
        };
        if line.trim().is_empty() {
            continue;
        }
        let step = handle_line(world, &line, &mut out);
        if let Err(f) = step {
            result = Err(Failure {
                code: f.code,
                error: f.error.context(format!("input line {}", index + 1)),
            });
            break;
        }
    }
    drop(rx);
    let _ = reader.join();
    out.flush().context("writing output")?;
    result
}

fn handle_line(world: &mut World, line: &str, out: &mut impl Write) -> CliResult<()> {
    match parse_line(line).map_err(|e| Failure::protocol(anyhow!(e)))? {
        ScriptLine::Frame(frame) => {
            let tick = world.tick(&frame)?;
            for event in &tick.events {
                writeln!(out, "{}", event.to_json_line()).context("writing output")?;
            }
            writeln!(out, "{}", tick.snapshot.to_json_line()).context("writing output")?;
            out.flush().context("writing output")?;
        }
        ScriptLine::Directive { t, directive } => {
            apply_directive(world, t, &directive).map_err(|e| Failure::protocol(anyhow!(e)))?;
            for w in world.take_warnings() {
                eprintln!("warning: {w}");
            }
        }
    }
    Ok(())
}

fn run(args: WorldArgs, serve: Option<u16>) -> CliResult<()> {
    let mut world = load_world(&args)?;
    match serve {
        None => serve_session(&mut world, BufReader::new(io::stdin()), io::stdout()),
        Some(port) => {
            let listener = TcpListener::bind(("127.0.0.1", port)).with_context(|| format!("binding port {port}"))?;
            eprintln!("listening on {}", listener.local_addr().context("reading local address")?);
            let (stream, peer) = listener.accept().context("accepting a client")?;
            eprintln!("client connected from {peer}");
            let input = BufReader::new(stream.try_clone().context("cloning the client socket")?);
            serve_session(&mut world, input, stream)
        }
    }
}

fn replay(script: &Path, args: WorldArgs, out: &Path) -> CliResult<()> {
    let script = ReplayScript::parse(&read_input(script)?)
        .map_err(|e| Failure::format(anyhow!("{}: {e}", script.display())))?;
    let mut world = load_world(&args)?;
    let trace = run_replay(&mut world, &script)?;
    fs::write(out, trace).with_context(|| format!("writing {}", out.display()))?;
    for w in world.take_warnings() {
        eprintln!("warning: {w}");
    }
    Ok(())
}

fn validate(path: &Path) -> CliResult<()> {
    let text = read_input(path)?;
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("").to_ascii_lowercase();
    let bad = |e: &dyn std::fmt::Display| Failure::format(anyhow!("{}: {e}", path.display()));
    match ext.as_str() {
        "csv" => {
            let (records, errors) = load_chargers(&text).map_err(|e| bad(&e))?;
            for e in &errors {
                eprintln!("{}: {e}", path.display());
            }
            if !errors.is_empty() {
                return Err(bad(&format!("{} bad rows", errors.len())));
            }
            println!("ok: {} chargers", records.len());
        }
        "ply" => {
            let cloud = load_point_cloud(&text).map_err(|e| bad(&e))?;
            println!("ok: {} points", cloud.len());
        }
        "toml" => {
            Config::from_toml(&text).map_err(|e| bad(&e))?;
            println!("ok: config");
        }
        "jsonl" => {
            let script = ReplayScript::parse(&text).map_err(|e| bad(&e))?;
            println!("ok: {} script lines", script.len());
        }
        "json" => {
            let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| bad(&e))?;
            if value.get("rules").is_some() {
                let rules = ContextRules::from_json(&text).map_err(|e| bad(&e))?;
                println!("ok: {} context rules", rules.rules.len());
            } else if value.get("entries").is_some() {
                let doc = LayoutDocument::from_json(&text).map_err(|e| bad(&e))?;
                println!("ok: layout with {} entries", doc.entries.len());
            } else {
                return Err(bad(&"JSON is neither a layout (entries) nor context rules (rules)"));
            }
        }
        other => return Err(bad(&format!("unrecognized file type {other:?}"))),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { world, serve } => run(world, serve),
        Command::Replay { script, world, out } => replay(&script, world, &out),
        Command::Validate { file } => validate(&file),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
