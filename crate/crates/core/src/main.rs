use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{error, info};

use lora_skg::attack::Averaging;
use lora_skg::channel_sim::{ingest_trace, write_trace, ColumnMap, ProbeTrace};
use lora_skg::dsp::negotiate_filter;
use lora_skg::keygen::{derive_key, KeyBits};
use lora_skg::randomness::run_suite;
use lora_skg::runner::{analyze_trace, emit_reports, run_sweep, simulate_cell, AnalysisParams, ExperimentConfig, ScenarioLabel};
use lora_skg::Error;

#[derive(Parser)]
#[command(name = "lora-skg", version, about = "RSSI secret key generation experiments with colluding eavesdroppers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one trace and write it as CSV.
    Simulate {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        seed: u64,
        /// Scenario label (Ia, Ib, Ic, Id, Ob, Od).
        #[arg(long, default_value = "Od")]
        scenario: ScenarioLabel,
        /// Eve-ring radius in wavelengths; defaults to the first configured radius.
        #[arg(long)]
        r: Option<f64>,
        /// Output CSV; stdout when absent.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Validate a measured trace and rewrite it in canonical layout.
    Ingest {
        trace: PathBuf,
        #[command(flatten)]
        columns: ColumnArgs,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Run the full analysis on one trace and print the result as JSON.
    Analyze {
        trace: PathBuf,
        #[command(flatten)]
        columns: ColumnArgs,
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Run a scenario × radius × seed sweep and write reports.
    Sweep {
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Run the randomness tests on ASCII keys, one per line.
    Randomness {
        keys: PathBuf,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Derive keys from a trace and print them.
    Export {
        trace: PathBuf,
        #[command(flatten)]
        columns: ColumnArgs,
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, value_enum, default_value = "hex")]
        format: KeyFormat,
        /// Apply the negotiated high-pass filter first.
        #[arg(long)]
        filtered: bool,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum KeyFormat {
    Hex,
    Ascii,
}

#[derive(Clone, Copy, ValueEnum)]
enum AveragingArg {
    Linear,
    Db,
}

#[derive(Args)]
struct ColumnArgs {
    #[arg(long, default_value = "alice_dbm")]
    alice_col: String,
    #[arg(long, default_value = "bob_dbm")]
    bob_col: String,
    /// Eve columns, comma separated; default picks up eve1_dbm, eve2_dbm, ...
    #[arg(long, value_delimiter = ',')]
    eve_cols: Option<Vec<String>>,
    /// Round column; pass an empty string to number rows in file order.
    #[arg(long, default_value = "round")]
    round_col: String,
    /// Timestamp column; pass an empty string if absent.
    #[arg(long, default_value = "timestamp_s")]
    timestamp_col: String,
}

impl ColumnArgs {
    fn map(&self) -> ColumnMap {
        let opt = |s: &str| (!s.is_empty()).then(|| s.to_string());
        ColumnMap {
            round: opt(&self.round_col),
            timestamp: opt(&self.timestamp_col),
            alice: self.alice_col.clone(),
            bob: self.bob_col.clone(),
            eves: self.eve_cols.clone(),
        }
    }
}

/// Overrides applied on top of the defaults and an optional TOML file.
#[derive(Args)]
struct ConfigArgs {
    #[arg(long, short)]
    config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    scenarios: Option<Vec<ScenarioLabel>>,
    #[arg(long, value_delimiter = ',')]
    r_wavelengths: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    mwa_windows: Option<Vec<usize>>,
    #[arg(long)]
    key_length: Option<usize>,
    #[arg(long)]
    z_max: Option<usize>,
    #[arg(long)]
    bin_db: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    n_rounds: Option<usize>,
    #[arg(long)]
    eves: Option<usize>,
    #[arg(long)]
    distance_m: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    carrier_hz: Option<f64>,
    #[arg(long, value_enum)]
    averaging: Option<AveragingArg>,
    #[arg(long)]
    feasibility_floor_bits: Option<f64>,
    #[arg(long)]
    curve_z_max: Option<usize>,
}

impl ConfigArgs {
    fn load(&self) -> lora_skg::Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(p) => ExperimentConfig::from_file(p)?,
            None => ExperimentConfig::default(),
        };
        macro_rules! set {
            ($($f:ident),*) => { $( if let Some(v) = &self.$f { c.$f = v.clone(); } )* };
        }
        set!(scenarios, r_wavelengths, mwa_windows, key_length, z_max, bin_db, seeds, output_dir);
        set!(n_rounds, eves, distance_m, alpha, carrier_hz, feasibility_floor_bits, curve_z_max);
        if let Some(a) = self.averaging {
            c.averaging = match a {
                AveragingArg::Linear => Averaging::LinearAverage,
                AveragingArg::Db => Averaging::DbAverage,
            };
        }
        c.validate()?;
        Ok(c)
    }
}

/// Input and configuration problems exit with 2, everything else with 1.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config { .. }
        | Error::Parameter(_)
        | Error::Parse { .. }
        | Error::Schema(_)
        | Error::Io { .. }
        | Error::Csv(_)
        | Error::Json(_) => 2,
        _ => 1,
    }
}

fn output(path: Option<&Path>) -> lora_skg::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(io::BufWriter::new(fs::File::create(p).map_err(|e| io_err(p, e))?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn io_err(path: &Path, source: io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn stdout_err(source: io::Error) -> Error {
    io_err(Path::new("<stdout>"), source)
}

fn write_text(path: Option<&Path>, text: &str) -> lora_skg::Result<()> {
    let mut w = output(path)?;
    w.write_all(text.as_bytes()).and_then(|_| w.flush()).map_err(stdout_err)
}

fn keys_of(trace: &ProbeTrace, cfg: &ExperimentConfig, filtered: bool) -> lora_skg::Result<Vec<KeyBits>> {
    let (a, b) = if filtered {
        let (a, b, choice) = negotiate_filter(trace.alice(), trace.bob(), cfg.z_max, cfg.bin_db)?;
        info!("filter size z0 = {}", choice.z0);
        (a, b)
    } else {
        (trace.alice().to_vec(), trace.bob().to_vec())
    };
    Ok(vec![derive_key(&a, cfg.key_length, "alice")?, derive_key(&b, cfg.key_length, "bob")?])
}

/// Returns `Ok(true)` when every sweep cell succeeded.
fn run(cmd: Command) -> lora_skg::Result<bool> {
    match cmd {
        Command::Simulate {
            cfg,
            seed,
            scenario,
            r,
            out,
        } => {
            let c = cfg.load()?;
            let r = r.unwrap_or(c.r_wavelengths[0]);
            let trace = simulate_cell(&c, scenario, r, seed)?;
            let w = output(out.as_deref())?;
            write_trace(&trace, w).map_err(stdout_err)?;
        }
        Command::Ingest { trace, columns, out } => {
            let t = ingest_trace(&trace, &columns.map())?;
            info!("{}: {} rounds, {} eavesdroppers", trace.display(), t.len(), t.eve_count());
            if let Some(out) = out {
                let w = output(Some(&out))?;
                write_trace(&t, w).map_err(|e| io_err(&out, e))?;
            }
        }
        Command::Analyze {
            trace,
            columns,
            cfg,
            out,
        } => {
            let c = cfg.load()?;
            let t = ingest_trace(&trace, &columns.map())?;
            let result = analyze_trace(&t, &AnalysisParams::from(&c))?;
            let mut json = serde_json::to_string_pretty(&result)?;
            json.push('\n');
            write_text(out.as_deref(), &json)?;
        }
        Command::Sweep { cfg } => {
            let c = cfg.load()?;
            let result = run_sweep(&c)?;
            let files = emit_reports(&result, &c.output_dir)?;
            info!("wrote {} file(s) to {}", files.len(), c.output_dir.display());
            let failed: Vec<_> = result.failed().collect();
            for cell in &failed {
                error!("cell {} failed: {}", cell.id(), cell.failure.as_deref().unwrap_or("unknown"));
            }
            return Ok(failed.is_empty());
        }
        Command::Randomness { keys, cfg } => {
            let c = cfg.load()?;
            let text = fs::read_to_string(&keys).map_err(|e| io_err(&keys, e))?;
            let mut reports = Vec::new();
            for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
                let key = KeyBits::parse_ascii(line, format!("line{}", i + 1)).map_err(|e| Error::Parse {
                    line: i as u64 + 1,
                    msg: e.to_string(),
                })?;
                reports.push(run_suite(key.bits(), &c.randomness)?.to_json());
            }
            let mut json = serde_json::to_string_pretty(&reports)?;
            json.push('\n');
            write_text(None, &json)?;
        }
        Command::Export {
            trace,
            columns,
            cfg,
            format,
            filtered,
            out,
        } => {
            let c = cfg.load()?;
            let t = ingest_trace(&trace, &columns.map())?;
            let text: String = keys_of(&t, &c, filtered)?
                .iter()
                .map(|k| match format {
                    KeyFormat::Hex => k.to_hex() + "\n",
                    KeyFormat::Ascii => k.to_ascii() + "\n",
                })
                .collect();
            write_text(out.as_deref(), &text)?;
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            error!("{e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
