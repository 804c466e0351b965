use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result, anyhow, bail};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand_chacha::ChaCha20Rng;
use rand_core::SeedableRng;
use zeroize::Zeroizing;

use sgbcrypt::counter_store::{self, CounterStore};
use sgbcrypt::linkmodel::{self, LinkParams};
use sgbcrypt::replay::StateFile;
use sgbcrypt::sim::{self, Scenario, ScenarioConfig, ScenarioReport};
use sgbcrypt::vector::{self, VectorFile};
use sgbcrypt::{
    AcceptancePolicy, AssetId, Counter, Exec, FixedClock, Frame, PAYLOAD_LEN, ReplayState,
    SecretKey, SystemClock, Timestamp, Verdict, VerdictKind, receive, transmit,
};

#[derive(Parser)]
#[command(
    name = "sgbcrypt",
    version,
    about = "Authenticated encryption for SGB distress frames"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a fresh 256-bit key as 64 hex characters (mode 0600).
    Keygen {
        #[arg(long)]
        out: PathBuf,
    },
    /// Seal a 26-byte payload and print the 56-byte frame as hex.
    Encrypt(EncryptArgs),
    /// Check and open a frame; prints the verdict, and the plaintext on OK.
    Decrypt(DecryptArgs),
    #[command(subcommand)]
    Vector(VectorCommand),
    #[command(subcommand)]
    State(StateCommand),
    #[command(subcommand)]
    Journal(JournalCommand),
    /// Evaluate the link-budget model.
    Linkbudget {
        /// Override a parameter, e.g. `--set altitude_m=550000`.
        #[arg(long = "set", value_name = "NAME=VALUE")]
        overrides: Vec<String>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Run a scripted attack scenario (or `all`).
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct EncryptArgs {
    #[arg(long)]
    key: PathBuf,
    /// Beacon id as 4 hex digits.
    #[arg(long, value_parser = parse_asset)]
    asset: AssetId,
    #[arg(
        long,
        conflicts_with = "payload_file",
        required_unless_present = "payload_file"
    )]
    payload: Option<String>,
    /// Raw 26-byte payload file.
    #[arg(long)]
    payload_file: Option<PathBuf>,
    #[arg(long)]
    journal: PathBuf,
    /// Seconds since the epoch (decimal or 0x-prefixed hex); defaults to the system clock.
    #[arg(long, value_parser = parse_u64)]
    timestamp: Option<u64>,
}

#[derive(Args)]
struct DecryptArgs {
    #[arg(long)]
    key: PathBuf,
    /// Frame hex, or `-` to read it from stdin.
    #[arg(long)]
    frame: String,
    #[arg(long)]
    state: PathBuf,
    #[arg(long, value_enum, default_value_t = Mode::Normal)]
    mode: Mode,
    /// Freshness window in seconds (dtn mode only).
    #[arg(long)]
    window: Option<u64>,
    /// Receiver time; defaults to the system clock.
    #[arg(long, value_parser = parse_u64)]
    now: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Normal,
    Dtn,
    CounterOnly,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Kv,
}

#[derive(Subcommand)]
enum VectorCommand {
    /// Recompute each vector and compare it field by field.
    Verify {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Encrypt through the counter journal and record the result as a vector.
    Generate {
        #[command(flatten)]
        encrypt: EncryptArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write `count` random vectors into a directory.
    Random {
        #[arg(long, default_value_t = 100)]
        count: usize,
        /// Seed for a reproducible corpus; OS randomness otherwise.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

#[derive(Subcommand)]
enum StateCommand {
    /// Copy a station's replay state to a file.
    Export {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Merge an exported state into a station's replay state.
    Import {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        from: PathBuf,
    },
    /// Join several state files into one.
    Merge {
        #[arg(long)]
        out: PathBuf,
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
    Show {
        state: PathBuf,
    },
}

#[derive(Subcommand)]
enum JournalCommand {
    /// Report what recovery would find, without modifying the file.
    Inspect { journal: PathBuf },
    /// Rewrite the journal to its newest valid record.
    Compact { journal: PathBuf },
    /// Move the counter forward without issuing frames.
    Advance {
        journal: PathBuf,
        #[arg(long, value_parser = parse_u64)]
        to: u64,
    },
}

#[derive(Args)]
struct SimulateArgs {
    /// Scenario name, or `all`.
    scenario: String,
    #[arg(long, value_parser = parse_u64)]
    seed: Option<u64>,
    #[arg(long)]
    stations: Option<usize>,
    #[arg(long)]
    rollback: Option<u64>,
    #[arg(long)]
    dtn_delay: Option<u64>,
    #[arg(long)]
    dtn_window: Option<u64>,
    #[arg(long)]
    replays: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Run sweeps on the calling thread.
    #[arg(long)]
    sequential: bool,
}

fn verdict_exit(kind: VerdictKind) -> u8 {
    match kind {
        VerdictKind::Ok => 0,
        VerdictKind::Malformed => 10,
        VerdictKind::Stale => 11,
        VerdictKind::Replay => 12,
        VerdictKind::AuthFail => 13,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(command: Command) -> Result<u8> {
    match command {
        Command::Keygen { out } => keygen(&out).map(|()| 0),
        Command::Encrypt(args) => {
            let frame = encrypt(&args, &read_payload(&args)?)?;
            println!("{}", hex::encode(frame.to_bytes()));
            Ok(0)
        }
        Command::Decrypt(args) => decrypt(&args),
        Command::Vector(cmd) => vector_cmd(cmd),
        Command::State(cmd) => state_cmd(cmd).map(|()| 0),
        Command::Journal(cmd) => journal_cmd(cmd).map(|()| 0),
        Command::Linkbudget { overrides, format } => linkbudget(&overrides, format).map(|()| 0),
        Command::Simulate(args) => simulate(&args),
    }
}

fn parse_u64(s: &str) -> Result<u64, String> {
    let parsed = match s.strip_prefix("0x") {
        Some(h) => u64::from_str_radix(h, 16),
        None => s.parse(),
    };
    parsed.map_err(|e| format!("`{s}`: {e}"))
}

fn parse_asset(s: &str) -> Result<AssetId, String> {
    let bytes: [u8; 2] = decode_hex(s)
        .and_then(|b| b.try_into().ok())
        .ok_or_else(|| format!("`{s}` is not 4 lowercase hex digits"))?;
    Ok(AssetId::from_bytes(bytes))
}

fn decode_hex(s: &str) -> Option<Vec<u8>> {
    if s.bytes().any(|b| b.is_ascii_uppercase()) {
        return None;
    }
    hex::decode(s).ok()
}

/// Errors here deliberately never echo file contents.
fn read_key_bytes(path: &Path) -> Result<Zeroizing<[u8; 32]>> {
    let text = Zeroizing::new(
        fs::read_to_string(path).with_context(|| format!("reading key file {}", path.display()))?,
    );
    let digits = text.trim_end_matches(['\n', '\r']);
    let mut bytes = Zeroizing::new([0u8; 32]);
    if digits.len() != 64 || hex::decode_to_slice(digits, bytes.as_mut()).is_err() {
        bail!(
            "key file {} must hold exactly 64 hex characters",
            path.display()
        );
    }
    Ok(bytes)
}

fn read_key(path: &Path) -> Result<SecretKey> {
    Ok(SecretKey::from_bytes(&*read_key_bytes(path)?))
}

fn keygen(out: &Path) -> Result<()> {
    let bytes = SecretKey::generate_bytes();
    let mut text = Zeroizing::new(hex::encode(*bytes));
    text.push('\n');
    let mut opts = fs::OpenOptions::new();
    opts.write(true).create_new(true);
    #[cfg(unix)]
    std::os::unix::fs::OpenOptionsExt::mode(&mut opts, 0o600);
    let mut file = opts
        .open(out)
        .with_context(|| format!("creating key file {}", out.display()))?;
    file.write_all(text.as_bytes())?;
    file.sync_all()?;
    eprintln!("wrote key to {}", out.display());
    Ok(())
}

fn read_payload(args: &EncryptArgs) -> Result<[u8; PAYLOAD_LEN]> {
    let bytes = match (&args.payload, &args.payload_file) {
        (Some(h), _) => decode_hex(h).ok_or_else(|| anyhow!("payload is not lowercase hex"))?,
        (None, Some(p)) => fs::read(p).with_context(|| format!("reading {}", p.display()))?,
        (None, None) => bail!("one of --payload or --payload-file is required"),
    };
    let len = bytes.len();
    bytes
        .try_into()
        .map_err(|_| anyhow!("payload must be {PAYLOAD_LEN} bytes, got {len}"))
}

fn encrypt(args: &EncryptArgs, payload: &[u8; PAYLOAD_LEN]) -> Result<Frame> {
    let key = read_key(&args.key)?;
    let mut store = CounterStore::open(&args.journal)
        .with_context(|| format!("opening journal {}", args.journal.display()))?;
    let frame = match args.timestamp {
        Some(t) => transmit(
            &key,
            args.asset,
            payload,
            &FixedClock(Timestamp(t)),
            &mut store,
        ),
        None => transmit(&key, args.asset, payload, &SystemClock, &mut store),
    }?;
    Ok(frame)
}

fn policy(mode: Mode, window: Option<u64>) -> Result<AcceptancePolicy> {
    Ok(match (mode, window) {
        (Mode::Normal, None) => AcceptancePolicy::normal(),
        (Mode::Dtn, w) => AcceptancePolicy::dtn(w.unwrap_or(sgbcrypt::txrx::DTN_WINDOW_SECS)),
        (Mode::CounterOnly, None) => AcceptancePolicy::counter_only(),
        (_, Some(_)) => bail!("--window only applies to --mode dtn"),
    })
}

fn decrypt(args: &DecryptArgs) -> Result<u8> {
    let key = read_key(&args.key)?;
    let policy = policy(args.mode, args.window)?;
    let text = if args.frame == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s)?;
        s
    } else {
        args.frame.clone()
    };
    // Undecodable hex is an unparseable frame, same as a wrong length.
    let bytes = decode_hex(text.trim()).unwrap_or_default();

    let (file, mut state) = StateFile::open(&args.state)
        .with_context(|| format!("opening state {}", args.state.display()))?;
    let verdict = match args.now {
        Some(t) => receive(&key, &bytes, &FixedClock(Timestamp(t)), &mut state, &policy),
        None => receive(&key, &bytes, &SystemClock, &mut state, &policy),
    };
    println!("{}", verdict.kind());
    if let Verdict::Ok(plaintext) = &verdict {
        file.save(&state)?;
        println!("{}", hex::encode(plaintext));
    }
    Ok(verdict_exit(verdict.kind()))
}

fn vector_cmd(cmd: VectorCommand) -> Result<u8> {
    match cmd {
        VectorCommand::Verify { files } => {
            let vectors = files
                .iter()
                .map(|p| {
                    let text = fs::read_to_string(p)
                        .with_context(|| format!("reading {}", p.display()))?;
                    VectorFile::parse(&text).with_context(|| format!("parsing {}", p.display()))
                })
                .collect::<Result<Vec<_>>>()?;
            let reports = vector::verify_all(&vectors, Exec::default());
            let mut failed = 0;
            for (path, report) in files.iter().zip(&reports) {
                match report.first_failure() {
                    None => println!("PASS {}", path.display()),
                    Some(c) => {
                        failed += 1;
                        println!("FAIL {}: {} mismatch", path.display(), c.field);
                        println!("  expected {}", c.expected);
                        println!("  actual   {}", c.actual);
                    }
                }
            }
            Ok(u8::from(failed > 0))
        }
        VectorCommand::Generate { encrypt: args, out } => {
            let timestamp = args
                .timestamp
                .ok_or_else(|| anyhow!("vector generation needs an explicit --timestamp"))?;
            let payload = read_payload(&args)?;
            let frame = encrypt(&args, &payload)?;
            let key = read_key_bytes(&args.key)?;
            let v = VectorFile::generate(
                &key,
                args.asset,
                frame.iv.counter,
                Timestamp(timestamp),
                &payload,
            );
            fs::write(&out, v.render()).with_context(|| format!("writing {}", out.display()))?;
            println!("{}", hex::encode(frame.to_bytes()));
            Ok(0)
        }
        VectorCommand::Random {
            count,
            seed,
            out_dir,
        } => {
            let mut rng = match seed {
                Some(s) => ChaCha20Rng::seed_from_u64(s),
                None => ChaCha20Rng::from_entropy(),
            };
            fs::create_dir_all(&out_dir)?;
            for i in 0..count {
                let path = out_dir.join(format!("vector-{i:04}.txt"));
                fs::write(&path, VectorFile::random(&mut rng).render())
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            eprintln!("wrote {count} vectors to {}", out_dir.display());
            Ok(0)
        }
    }
}

/// A zero-length file is taken as the empty state.
fn load_state(path: &Path) -> Result<ReplayState> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    if bytes.is_empty() {
        return Ok(ReplayState::new());
    }
    ReplayState::import(&bytes).with_context(|| format!("loading {}", path.display()))
}

fn state_cmd(cmd: StateCommand) -> Result<()> {
    match cmd {
        StateCommand::Export { state, out } => {
            let (_file, current) = StateFile::open(&state)?;
            fs::write(&out, current.export())
                .with_context(|| format!("writing {}", out.display()))?;
        }
        StateCommand::Import { state, from } => {
            let remote = load_state(&from)?;
            let (file, mut current) = StateFile::open(&state)?;
            current.merge_in(&remote);
            file.save(&current)?;
            eprintln!("{} assets in {}", current.len(), state.display());
        }
        StateCommand::Merge { out, inputs } => {
            let mut merged = ReplayState::new();
            for path in &inputs {
                merged.merge_in(&load_state(path)?);
            }
            let (file, _) = StateFile::open(&out)?;
            file.save(&merged)?;
            eprintln!("{} assets in {}", merged.len(), out.display());
        }
        StateCommand::Show { state } => {
            for (asset, entry) in load_state(&state)?.iter() {
                println!(
                    "{} {} {}",
                    hex::encode(asset.to_bytes()),
                    hex::encode(entry.counter.to_bytes()),
                    entry.timestamp.0
                );
            }
        }
    }
    Ok(())
}

fn journal_cmd(cmd: JournalCommand) -> Result<()> {
    match cmd {
        JournalCommand::Inspect { journal } => {
            let bytes =
                fs::read(&journal).with_context(|| format!("reading {}", journal.display()))?;
            let r = counter_store::scan(&bytes);
            println!("records = {}", r.valid_records + r.invalid_records);
            println!("valid = {}", r.valid_records);
            println!("invalid = {}", r.invalid_records);
            println!("torn_tail_bytes = {}", r.torn_tail(bytes.len()));
            println!("version = {}", r.version());
            println!("counter = {}", hex::encode(r.current().to_bytes()));
        }
        JournalCommand::Compact { journal } => match counter_store::compact(&journal)? {
            Some(r) => eprintln!(
                "kept version {} counter {}",
                r.version,
                hex::encode(r.counter.to_bytes())
            ),
            None => eprintln!("no valid record; journal emptied"),
        },
        JournalCommand::Advance { journal, to } => {
            let to =
                u32::try_from(to).map_err(|_| anyhow!("counter {to} does not fit in 32 bits"))?;
            let mut store = CounterStore::open(&journal)?;
            store.advance_to(Counter(to))?;
        }
    }
    Ok(())
}

fn linkbudget(overrides: &[String], format: Format) -> Result<()> {
    let mut params = LinkParams::default();
    for o in overrides {
        let (name, value) = o
            .split_once('=')
            .ok_or_else(|| anyhow!("`{o}`: expected NAME=VALUE"))?;
        let value: f64 = value.trim().parse().with_context(|| format!("`{o}`"))?;
        params.set(name.trim(), value)?;
    }
    let report = linkmodel::run(&params)?;
    print!(
        "{}",
        match format {
            Format::Text => report.to_text(),
            Format::Kv => report.to_key_value(),
        }
    );
    Ok(())
}

fn simulate(args: &SimulateArgs) -> Result<u8> {
    let mut config = ScenarioConfig::default();
    if let Some(v) = args.seed {
        config.seed = v;
    }
    if let Some(v) = args.stations {
        config.stations = v;
    }
    if let Some(v) = args.rollback {
        config.rollback_s = v;
    }
    if let Some(v) = args.dtn_delay {
        config.dtn_delay_s = v;
    }
    if let Some(v) = args.dtn_window {
        config.dtn_window_s = v;
    }
    if let Some(v) = args.replays {
        config.replays = v;
    }
    let exec = if args.sequential {
        Exec::Sequential
    } else {
        Exec::Parallel
    };
    let reports: Vec<ScenarioReport> = if args.scenario == "all" {
        sim::run_all(&config, exec)?
    } else {
        vec![sim::run_scenario_with(
            &Scenario::parse(&args.scenario, config)?,
            exec,
        )?]
    };
    let mut out = io::stdout().lock();
    for report in &reports {
        match args.format {
            Format::Text => write!(out, "{}", report.to_text())?,
            Format::Kv => write!(out, "{}", report.to_key_value())?,
        }
    }
    Ok(u8::from(!reports.iter().all(|r| r.passed)))
}
