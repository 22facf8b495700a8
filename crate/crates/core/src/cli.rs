//! Command-line entry points.
//!
//! Exit codes: 0 success, 1 usage error, 2 malformed input, 3 store error.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::capture::{
    collect_frames, generate, open_replay, scripts::preset_script, scripts::ScriptPreset,
    write_frame_file, CaptureError, MemorySource, MovementScript, NoiseModel,
};
use crate::config::{AppConfig, ConfigFileError};
use crate::engine::write_event_log;
use crate::model::NOMINAL_FPS;
use crate::persistence::{
    new_session_id, now_us, read_record_file, SessionRecord, Store, StoreError,
};
use crate::report::Report;
use crate::service::{serve, ServerOptions, ServiceError, DEFAULT_BIND};
use crate::session::{run_source, RunError, Session};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_STORE: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "tabletop",
    version,
    about = "Grab-move-drop rehabilitation game engine"
)]
pub struct Cli {
    /// TOML or JSON file overriding the built-in configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Session store directory.
    #[arg(long, global = true, default_value = "tabletop-store")]
    store: PathBuf,

    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Run the game over a recorded frame file.
    Replay {
        input: PathBuf,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Generate a synthetic player and run the game over it.
    Simulate {
        /// Preset name (perfect, miss, tremor, slow) or a movement-script JSON file.
        #[arg(long, default_value = "perfect")]
        script: String,
        /// Repetitions to generate for a preset.
        #[arg(long, default_value_t = 10)]
        drops: usize,
        /// `default`, `none`, or `NEAR:FAR` sigmas in meters. Defaults to the config's noise.
        #[arg(long)]
        noise: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = NOMINAL_FPS)]
        fps: f64,
        /// Also write the generated frames to this file.
        #[arg(long)]
        frames_out: Option<PathBuf>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Serve live sessions over WebSocket.
    Serve {
        #[arg(long, default_value = DEFAULT_BIND)]
        bind: String,
    },
    /// Print the report for a stored session id or a record file.
    Report { session: String },
    /// Manage stored sessions.
    Store {
        #[command(subcommand)]
        action: StoreCmd,
    },
}

#[derive(Debug, Subcommand)]
enum StoreCmd {
    List,
    Delete { id: String },
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Write the line-delimited metrics report here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the line-delimited event log here.
    #[arg(long)]
    events: Option<PathBuf>,
    /// Do not save the session to the store.
    #[arg(long)]
    no_save: bool,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Store(#[from] StoreError),
    #[error("{0}")]
    Output(#[from] io::Error),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Input(_) | CliError::Output(_) => EXIT_INPUT,
            CliError::Store(_) => EXIT_STORE,
        }
    }
}

impl From<ConfigFileError> for CliError {
    fn from(e: ConfigFileError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<RunError> for CliError {
    fn from(e: RunError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<CaptureError> for CliError {
    fn from(e: CaptureError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<ServiceError> for CliError {
    fn from(e: ServiceError) -> Self {
        match e {
            ServiceError::Store(s) => CliError::Store(s),
            other => CliError::Usage(other.to_string()),
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let config = AppConfig::load(cli.config.as_deref())?;
    match cli.command {
        Cmd::Replay { input, out } => {
            let mut source = open_replay(&input)?;
            let session = run_source(config.game(), &mut source)?;
            finish(session, &cli.store, &out)
        }
        Cmd::Simulate {
            script,
            drops,
            noise,
            seed,
            fps,
            frames_out,
            out,
        } => {
            let script = load_script(&script, &config, drops)?;
            let noise = match noise {
                Some(spec) => parse_noise(&spec)?,
                None => config.noise,
            };
            let mut gen = generate(script, noise, seed, fps)?;
            let frames = collect_frames(&mut gen)?;
            if let Some(path) = frames_out {
                write_frame_file(&path, &frames)?;
            }
            let session = run_source(config.game(), &mut MemorySource::from(frames))?;
            finish(session, &cli.store, &out)
        }
        Cmd::Serve { bind } => {
            serve(ServerOptions {
                bind,
                store_root: cli.store,
                defaults: config,
            })?;
            Ok(())
        }
        Cmd::Report { session } => {
            let path = Path::new(&session);
            let record = if path.is_file() {
                read_record_file(path)?
            } else {
                Store::open(&cli.store)?.load(&session)?
            };
            print_record(&record);
            Ok(())
        }
        Cmd::Store { action } => {
            let store = Store::open(&cli.store)?;
            match action {
                StoreCmd::List => {
                    let sessions = store.list()?;
                    if sessions.is_empty() {
                        println!("no saved sessions");
                    }
                    for s in sessions {
                        let rate = s
                            .hit_rate
                            .map_or_else(|| "n/a".into(), |r| format!("{:.1}%", r * 100.0));
                        println!("{}  drops {:>4}  hit rate {rate}", s.session_id, s.n_drops);
                    }
                }
                StoreCmd::Delete { id } => {
                    store.delete(&id)?;
                    println!("deleted {id}");
                }
            }
            Ok(())
        }
    }
}

fn load_script(spec: &str, config: &AppConfig, drops: usize) -> Result<MovementScript, CliError> {
    if let Ok(preset) = spec.parse::<ScriptPreset>() {
        return Ok(preset_script(
            preset,
            &config.scene,
            drops,
            config.dda.r_max,
        )?);
    }
    let text = std::fs::read_to_string(spec)
        .map_err(|e| CliError::Input(format!("script {spec}: {e}")))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("script {spec}: {e}")))
}

fn parse_noise(spec: &str) -> Result<NoiseModel, CliError> {
    let model = match spec {
        "default" => NoiseModel::default(),
        "none" => NoiseModel::NONE,
        other => {
            let bad = || {
                CliError::Usage(format!(
                    "bad --noise `{other}`; use default, none, or NEAR:FAR"
                ))
            };
            let (near, far) = other.split_once(':').ok_or_else(bad)?;
            NoiseModel {
                sigma_near: near.parse().map_err(|_| bad())?,
                sigma_far: far.parse().map_err(|_| bad())?,
            }
        }
    };
    model
        .validate()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(model)
}

fn finish(session: Session, store_root: &Path, out: &OutputArgs) -> Result<(), CliError> {
    let report = Report::build(&session.state().drops, session.config().scene.target_center);
    if let Some(path) = &out.events {
        write_event_log(BufWriter::new(File::create(path)?), session.events())?;
    }
    if let Some(path) = &out.out {
        report.write_jsonl(BufWriter::new(File::create(path)?))?;
    }
    print!("{}", report.render_table());
    if !out.no_save {
        let created = now_us();
        let record = session.into_record(new_session_id(created), created);
        let id = Store::open(store_root)?.save(&record)?;
        println!("\nsaved session {id}");
    }
    io::stdout().flush()?;
    Ok(())
}

fn print_record(record: &SessionRecord) {
    println!(
        "session {} ({} drops, {} events)\n",
        record.session_id,
        record.drops.len(),
        record.events.len()
    );
    let report = Report::build(&record.drops, record.scene.target_center);
    print!("{}", report.render_table());
}
