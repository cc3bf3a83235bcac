//! Command-line front end: single runs, parameter sweeps, and the scripted
//! decoding walkthrough.
//!
//! Experiment parameters resolve in three layers: built-in defaults, then a
//! flat `key=value` config file (`--config`), then command-line flags, with
//! later layers winning. Output goes to stdout or `--out` as CSV (with the
//! resolved parameters echoed in leading `#` comment lines) or JSON (with
//! the full scenario embedded), so every result file records how it was
//! produced.
//!
//! Exit codes: 0 on success, 2 for usage and argument errors, 3 when a
//! schedule runs past the slot horizon, 1 for anything else.

use std::fs;
use std::io::Write as IoWrite;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::Error;
use crate::metrics::EnergyAccounting;
use crate::phy::PayloadModel;
use crate::replay;
use crate::sim::{self, GuessRule, Protocol, Scenario, SimReport};

const CSV_HEADER: &str = "protocol,sf,devices,replications,seed,mean_delay_s,std_delay_s,\
                          mean_energy_j,mean_energy_per_bit_j,mean_throughput_bps,\
                          mean_frame_tx,mean_bitmap_tx,loss_rate";

#[derive(Parser)]
#[command(
    name = "synclora",
    version,
    about = "Simulates recovery of synchronized LoRa collisions: collaborative \
             decoding with agreement bitmaps vs LoRaWAN retransmissions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one experiment cell (one protocol, one SF, one device count)
    Run(RunArgs),
    /// Simulate a grid of cells (defaults: both protocols, SF 7 and 12, 2..8 devices)
    Sweep(RunArgs),
    /// Print the scripted three-device decoding walkthrough
    #[command(name = "replay-example")]
    ReplayExample,
}

#[derive(Args, Default)]
struct RunArgs {
    /// proposed, lorawan, or both (sweep only)
    #[arg(long)]
    protocol: Option<String>,
    /// Spreading factor 7..=12; sweep accepts a comma list such as 7,12
    #[arg(long)]
    sf: Option<String>,
    /// Synchronized device count 2..=8; sweep accepts an inclusive range such as 2..8
    #[arg(long)]
    devices: Option<String>,
    /// Data frame payload size in bytes [default: 30]
    #[arg(long)]
    payload_bytes: Option<u32>,
    /// Payload-to-symbols model: paper or semtech [default: paper]
    #[arg(long)]
    payload_model: Option<PayloadModel>,
    /// Independent replications per cell [default: 1000]
    #[arg(long)]
    replications: Option<u32>,
    /// Base RNG seed; replication k uses stream k of this seed [default: 1]
    #[arg(long)]
    seed: Option<u64>,
    /// Guard gap between consecutive bitmaps in seconds [default: 30e-9]
    #[arg(long)]
    gap: Option<f64>,
    /// LoRaWAN retransmission window in slots [default: 2]
    #[arg(long)]
    window: Option<u32>,
    /// LoRaWAN retransmission budget [default: 8]
    #[arg(long)]
    max_retx: Option<u32>,
    /// Guess rule: random_unsent or first_unsent [default: random_unsent]
    #[arg(long)]
    guess: Option<GuessRule>,
    /// Bitmap energy accounting: with-preamble or payload-only [default: with-preamble]
    #[arg(long)]
    energy_accounting: Option<EnergyAccounting>,
    /// Write results here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Also write the per-transmission event log to <out>.events.jsonl (run only)
    #[arg(long)]
    emit_events: bool,
    /// Flat key=value file supplying any of the experiment flags above
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
enum Format {
    #[default]
    Csv,
    Json,
}

/// Why a command failed; decides the process exit code.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Sim(Error),
    Io(std::io::Error),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) | Failure::Sim(Error::InvalidArgument(_)) => 2,
            Failure::Sim(Error::HorizonExceeded { .. }) => 3,
            Failure::Sim(_) | Failure::Io(_) => 1,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Usage(m) => m.clone(),
            Failure::Sim(e) => e.to_string(),
            Failure::Io(e) => e.to_string(),
        }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

type CliResult<T> = std::result::Result<T, Failure>;

/// Parse arguments from the process environment and run the tool.
pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            ) {
                0
            } else {
                2
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}

fn dispatch(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Run(args) => run_cells(args, false),
        Command::Sweep(args) => run_cells(args, true),
        Command::ReplayExample => {
            print!("{}", replay::transcript());
            Ok(())
        }
    }
}

/// Experiment parameters after default/config/flag layering.
struct Resolved {
    protocols: Vec<Protocol>,
    sfs: Vec<u8>,
    devices: Vec<u32>,
    payload_bytes: u32,
    payload_model: PayloadModel,
    replications: u32,
    seed: u64,
    gap: f64,
    window: u32,
    max_retx: u32,
    guess: GuessRule,
    energy_accounting: EnergyAccounting,
}

impl Resolved {
    fn scenario(&self, protocol: Protocol, sf: u8, devices: u32) -> CliResult<Scenario> {
        let mut s = Scenario::new(protocol, devices, sf).map_err(Failure::Sim)?;
        s.payload_bytes = self.payload_bytes;
        s.payload_model = self.payload_model;
        s.replications = self.replications;
        s.seed = self.seed;
        s.gap = self.gap;
        s.lorawan_window = self.window;
        s.lorawan_max_retx = self.max_retx;
        s.guess = self.guess;
        s.energy_accounting = self.energy_accounting;
        s.validate().map_err(Failure::Sim)?;
        Ok(s)
    }

    /// `# key=value` comment lines prefixed to CSV output.
    fn provenance(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# synclora={}\n", env!("CARGO_PKG_VERSION")));
        out.push_str(&format!("# payload-bytes={}\n", self.payload_bytes));
        out.push_str(&format!("# payload-model={}\n", self.payload_model));
        out.push_str(&format!("# replications={}\n", self.replications));
        out.push_str(&format!("# seed={}\n", self.seed));
        out.push_str(&format!("# gap={}\n", self.gap));
        out.push_str(&format!("# window={}\n", self.window));
        out.push_str(&format!("# max-retx={}\n", self.max_retx));
        out.push_str(&format!("# guess={}\n", self.guess));
        out.push_str(&format!("# energy-accounting={}\n", self.energy_accounting));
        out
    }
}

fn run_cells(mut args: RunArgs, sweep: bool) -> CliResult<()> {
    if let Some(path) = args.config.clone() {
        apply_config_file(&path, &mut args)?;
    }
    let resolved = resolve(&args, sweep)?;
    if args.emit_events {
        if sweep {
            return Err(usage("--emit-events applies to run, not sweep"));
        }
        if args.out.is_none() {
            return Err(usage("--emit-events needs --out to name the event log"));
        }
    }

    let mut reports = Vec::new();
    for &protocol in &resolved.protocols {
        for &sf in &resolved.sfs {
            for &devices in &resolved.devices {
                let scenario = resolved.scenario(protocol, sf, devices)?;
                reports.push(sim::run_replications(&scenario).map_err(Failure::Sim)?);
            }
        }
    }

    let rendered = match args.format {
        Format::Csv => render_csv(&resolved, &reports),
        Format::Json => render_json(&resolved, &reports, sweep)?,
    };
    match &args.out {
        Some(path) => fs::write(path, rendered).map_err(Failure::Io)?,
        None => print!("{rendered}"),
    }

    if args.emit_events {
        let out = args.out.as_ref().expect("checked above");
        write_event_log(&events_path(out), &reports[0].scenario)?;
    }
    Ok(())
}

fn events_path(out: &Path) -> PathBuf {
    PathBuf::from(format!("{}.events.jsonl", out.display()))
}

/// One JSON object per transmission, tagged with its replication index.
fn write_event_log(path: &Path, scenario: &Scenario) -> CliResult<()> {
    let file = fs::File::create(path).map_err(Failure::Io)?;
    let mut w = std::io::BufWriter::new(file);
    for k in 0..scenario.replications {
        let (_, records) = sim::run_one(scenario, k).map_err(Failure::Sim)?;
        for record in &records {
            let mut v = serde_json::to_value(record).expect("records serialize");
            v.as_object_mut()
                .expect("a record is a JSON object")
                .insert("replication".into(), serde_json::json!(k));
            writeln!(w, "{v}").map_err(Failure::Io)?;
        }
    }
    w.flush().map_err(Failure::Io)
}

fn render_csv(resolved: &Resolved, reports: &[SimReport]) -> String {
    let mut out = resolved.provenance();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in reports {
        let a = &r.aggregate;
        let s = &r.scenario;
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            s.protocol,
            s.sf.sf,
            s.n_devices,
            s.replications,
            s.seed,
            a.mean_delay_s,
            a.std_delay_s,
            a.mean_energy_j,
            a.mean_energy_per_bit_j,
            a.mean_throughput_bps,
            a.mean_frame_tx,
            a.mean_bitmap_tx,
            a.loss_rate
        ));
    }
    out
}

fn render_json(resolved: &Resolved, reports: &[SimReport], sweep: bool) -> CliResult<String> {
    let value = if sweep {
        serde_json::json!({
            "config": {
                "protocols": resolved.protocols.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
                "sf": resolved.sfs,
                "devices": resolved.devices,
                "payload_bytes": resolved.payload_bytes,
                "payload_model": resolved.payload_model,
                "replications": resolved.replications,
                "seed": resolved.seed,
                "gap": resolved.gap,
                "lorawan_window": resolved.window,
                "lorawan_max_retx": resolved.max_retx,
                "guess": resolved.guess,
                "energy_accounting": resolved.energy_accounting,
            },
            "rows": reports,
        })
    } else {
        serde_json::to_value(&reports[0]).expect("reports serialize")
    };
    let mut text = serde_json::to_string_pretty(&value).expect("values render");
    text.push('\n');
    Ok(text)
}

fn resolve(args: &RunArgs, sweep: bool) -> CliResult<Resolved> {
    let protocols = match args.protocol.as_deref() {
        None => {
            if sweep {
                vec![Protocol::Proposed, Protocol::Lorawan]
            } else {
                vec![Protocol::Proposed]
            }
        }
        Some("both") if sweep => vec![Protocol::Proposed, Protocol::Lorawan],
        Some("both") => return Err(usage("run simulates one protocol at a time")),
        Some(p) => vec![p.parse().map_err(Failure::Sim)?],
    };
    let sfs = match args.sf.as_deref() {
        None if sweep => vec![7, 12],
        None => return Err(usage("run needs --sf (7..=12)")),
        Some(list) => parse_sf_list(list)?,
    };
    let devices = match args.devices.as_deref() {
        None if sweep => (2..=8).collect(),
        None => return Err(usage("run needs --devices (2..=8)")),
        Some(spec) => parse_device_spec(spec)?,
    };
    if !sweep && (sfs.len() != 1 || devices.len() != 1) {
        return Err(usage(
            "run takes a single --sf and a single --devices; use sweep for grids",
        ));
    }
    Ok(Resolved {
        protocols,
        sfs,
        devices,
        payload_bytes: args.payload_bytes.unwrap_or(sim::DEFAULT_PAYLOAD_BYTES),
        payload_model: args.payload_model.unwrap_or(PayloadModel::Linear),
        replications: args.replications.unwrap_or(sim::DEFAULT_REPLICATIONS),
        seed: args.seed.unwrap_or(sim::DEFAULT_SEED),
        gap: args.gap.unwrap_or(crate::timing::DEFAULT_GAP_S),
        window: args.window.unwrap_or(sim::DEFAULT_LORAWAN_WINDOW),
        max_retx: args.max_retx.unwrap_or(sim::DEFAULT_LORAWAN_MAX_RETX),
        guess: args.guess.unwrap_or(GuessRule::RandomUnsent),
        energy_accounting: args
            .energy_accounting
            .unwrap_or(EnergyAccounting::WithPreamble),
    })
}

fn parse_sf_list(list: &str) -> CliResult<Vec<u8>> {
    let mut sfs = Vec::new();
    for part in list.split(',') {
        let sf: u8 = part
            .trim()
            .parse()
            .map_err(|_| usage(format!("bad spreading factor `{part}`")))?;
        sfs.push(sf);
    }
    if sfs.is_empty() {
        return Err(usage("empty spreading factor list"));
    }
    Ok(sfs)
}

/// `N` for one count, `A..B` for the inclusive range A through B.
fn parse_device_spec(spec: &str) -> CliResult<Vec<u32>> {
    let devices: Vec<u32> = if let Some((lo, hi)) = spec.split_once("..") {
        let lo: u32 = lo
            .trim()
            .parse()
            .map_err(|_| usage(format!("bad device range start `{lo}`")))?;
        let hi: u32 = hi
            .trim()
            .parse()
            .map_err(|_| usage(format!("bad device range end `{hi}`")))?;
        (lo..=hi).collect()
    } else {
        vec![spec
            .trim()
            .parse()
            .map_err(|_| usage(format!("bad device count `{spec}`")))?]
    };
    if devices.is_empty() {
        return Err(usage(format!("device range `{spec}` is empty")));
    }
    Ok(devices)
}

/// Fill unset experiment flags from a flat key=value file. Flags given on
/// the command line keep priority; output routing (--out, --format,
/// --emit-events) is flags-only.
fn apply_config_file(path: &Path, args: &mut RunArgs) -> CliResult<()> {
    let text = fs::read_to_string(path).map_err(Failure::Io)?;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let lineno = idx + 1;
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| usage(format!("config line {lineno}: expected key=value")))?;
        let key = key.trim();
        let value = value.trim();
        let bad = |what: &str| usage(format!("config line {lineno}: bad {what} `{value}`"));
        match key {
            "protocol" => fill(&mut args.protocol, value.to_string()),
            "sf" => fill(&mut args.sf, value.to_string()),
            "devices" => fill(&mut args.devices, value.to_string()),
            "payload-bytes" => fill(
                &mut args.payload_bytes,
                value.parse().map_err(|_| bad("byte count"))?,
            ),
            "payload-model" => fill(
                &mut args.payload_model,
                value.parse().map_err(|_| bad("payload model"))?,
            ),
            "replications" => fill(
                &mut args.replications,
                value.parse().map_err(|_| bad("count"))?,
            ),
            "seed" => fill(&mut args.seed, value.parse().map_err(|_| bad("seed"))?),
            "gap" => fill(&mut args.gap, value.parse().map_err(|_| bad("gap"))?),
            "window" => fill(&mut args.window, value.parse().map_err(|_| bad("window"))?),
            "max-retx" => fill(
                &mut args.max_retx,
                value.parse().map_err(|_| bad("budget"))?,
            ),
            "guess" => fill(
                &mut args.guess,
                value.parse().map_err(|_| bad("guess rule"))?,
            ),
            "energy-accounting" => fill(
                &mut args.energy_accounting,
                value.parse().map_err(|_| bad("accounting mode"))?,
            ),
            other => {
                return Err(usage(format!(
                    "config line {lineno}: unknown key `{other}`"
                )));
            }
        }
    }
    Ok(())
}

fn fill<T>(slot: &mut Option<T>, value: T) {
    if slot.is_none() {
        *slot = Some(value);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn device_spec_forms() {
        assert_eq!(parse_device_spec("4").unwrap(), vec![4]);
        assert_eq!(parse_device_spec("2..5").unwrap(), vec![2, 3, 4, 5]);
        assert!(parse_device_spec("5..2").is_err());
        assert!(parse_device_spec("x").is_err());
    }

    #[test]
    fn sf_list_forms() {
        assert_eq!(parse_sf_list("12").unwrap(), vec![12]);
        assert_eq!(parse_sf_list("7,12").unwrap(), vec![7, 12]);
        assert!(parse_sf_list("7;12").is_err());
    }

    #[test]
    fn sweep_defaults_cover_the_grid() {
        let resolved = resolve(&RunArgs::default(), true).unwrap();
        assert_eq!(resolved.protocols.len(), 2);
        assert_eq!(resolved.sfs, vec![7, 12]);
        assert_eq!(resolved.devices, (2..=8).collect::<Vec<_>>());
    }

    #[test]
    fn run_requires_explicit_single_cell() {
        assert!(matches!(
            resolve(&RunArgs::default(), false),
            Err(Failure::Usage(_))
        ));
        let args = RunArgs {
            sf: Some("7,12".into()),
            devices: Some("4".into()),
            ..Default::default()
        };
        assert!(matches!(resolve(&args, false), Err(Failure::Usage(_))));
        let args = RunArgs {
            sf: Some("12".into()),
            devices: Some("4".into()),
            ..Default::default()
        };
        assert!(resolve(&args, false).is_ok());
    }

    #[test]
    fn flags_beat_config_which_beats_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("exp.conf");
        fs::write(&path, "# comment\nseed=99\nreplications=7\n\n").unwrap();
        let mut args = RunArgs {
            replications: Some(3),
            ..Default::default()
        };
        apply_config_file(&path, &mut args).unwrap();
        let resolved = resolve(&args, true).unwrap();
        assert_eq!(resolved.seed, 99, "config fills unset flags");
        assert_eq!(resolved.replications, 3, "flags win over config");
        assert_eq!(resolved.window, 2, "defaults fill the rest");
    }

    #[test]
    fn config_rejects_unknown_keys_and_bad_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("exp.conf");
        fs::write(&path, "bogus=1\n").unwrap();
        let mut args = RunArgs::default();
        assert!(matches!(
            apply_config_file(&path, &mut args),
            Err(Failure::Usage(_))
        ));
        fs::write(&path, "seed=notanumber\n").unwrap();
        assert!(matches!(
            apply_config_file(&path, &mut RunArgs::default()),
            Err(Failure::Usage(_))
        ));
    }

    #[test]
    fn exit_codes_by_failure_class() {
        assert_eq!(usage("x").exit_code(), 2);
        assert_eq!(Failure::Sim(Error::invalid_arg("x")).exit_code(), 2);
        assert_eq!(
            Failure::Sim(Error::HorizonExceeded {
                t: 1.0,
                horizon: 0.5
            })
            .exit_code(),
            3
        );
        assert_eq!(Failure::Sim(Error::Internal("x".into())).exit_code(), 1);
    }
}
