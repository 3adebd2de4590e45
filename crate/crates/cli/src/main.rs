//! `pufsim` command-line front end.
//!
//! Exit codes: 0 success, 1 failed report or rejected session, 2 usage
//! error, 3 I/O or protocol error.

use std::fs;
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::thread;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use pufsim::attacks::{
    arbiter_ml_experiment, brute_force_attack, insider_attack, quantum_guess_experiment, AttackBudget, AttackReport,
    InsiderKnowledge, MlConfig,
};
use pufsim::authproto::{
    authenticate, configure_tcp, enroll, pipe, serve, tcp_connect, CrpStore, SharedStore, Verdict, DEFAULT_TIMEOUT,
};
use pufsim::evaluator::{evaluate_device, EvaluationConfig, SecurityParams};
use pufsim::extractor::ExtractorParams;
use pufsim::families::{AnyPuf, FamilyParams};
use pufsim::stats::wilson_ci95;
use pufsim::{FamilyId, PufDevice, Rng};

#[derive(Parser, Debug)]
#[command(name = "pufsim", version, about = "Simulate, attack and evaluate physical unclonable functions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Seed for every random choice the command makes.
    #[arg(long)]
    seed: u64,
    /// Leave wall-clock timestamps out of the JSON output.
    #[arg(long)]
    deterministic: bool,
    /// Worker threads for Monte-Carlo runs (default: all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Write the JSON result here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a device parameter file.
    Gen(GenArgs),
    /// Enroll challenge/secret pairs from a device into a store file.
    Enroll(EnrollArgs),
    /// Run an attack and report its success rate.
    Attack(AttackArgs),
    /// Produce a security report.
    Evaluate(EvaluateArgs),
    /// Verifier endpoint.
    Serve(SessionArgs),
    /// Prover endpoint.
    Authenticate(SessionArgs),
}

#[derive(Args, Debug)]
struct GenArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_parser = parse_family)]
    family: FamilyId,
    #[arg(long = "N")]
    n: Option<usize>,
    #[arg(long)]
    l: Option<usize>,
    #[arg(long = "l_S")]
    l_s: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long = "noise-p")]
    noise_p: Option<f64>,
    /// Read-out repetition (odd).
    #[arg(long)]
    r: Option<usize>,
    #[arg(long = "index-bits")]
    index_bits: Option<usize>,
}

#[derive(Args, Debug)]
struct EnrollArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value = "device.json")]
    device: PathBuf,
    #[arg(long, default_value = "crp.txt")]
    store: PathBuf,
    /// Pairs to enroll.
    #[arg(long)]
    n: usize,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum Strategy {
    Brute,
    Insider,
    Guess,
    Ml,
}

#[derive(Args, Debug)]
struct AttackArgs {
    #[arg(value_enum)]
    strategy: Strategy,
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value = "device.json")]
    device: PathBuf,
    /// Access window Δt_a in seconds.
    #[arg(long = "dt-a", default_value_t = 1.0)]
    dt_a: f64,
    /// Time per read-out Δt_r in seconds.
    #[arg(long = "dt-r", default_value_t = 1.0)]
    dt_r: f64,
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    /// Training pairs for `ml`.
    #[arg(long = "n-train", default_value_t = 10_000)]
    n_train: usize,
}

#[derive(Args, Debug)]
struct EvaluateArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value = "device.json")]
    device: PathBuf,
    #[arg(long = "target-L", default_value_t = 1e-15)]
    target_l: f64,
    #[arg(long = "dt-a", default_value_t = 86_400.0)]
    dt_a: f64,
    #[arg(long = "dt-r", default_value_t = 1.0)]
    dt_r: f64,
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
}

#[derive(Args, Debug)]
struct SessionArgs {
    #[command(flatten)]
    common: Common,
    /// `host:port`, or `pipe:` to run verifier and prover in this process.
    #[arg(long, default_value = "pipe:")]
    addr: String,
    #[arg(long)]
    device: Option<PathBuf>,
    #[arg(long)]
    store: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    sessions: usize,
}

fn parse_family(s: &str) -> Result<FamilyId, String> {
    serde_json::from_value(Value::String(s.to_string()))
        .map_err(|_| "expected one of toy, table, arbiter, keyed-hash, quantum, constant".to_string())
}

/// A failure and the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: 2, message: message.into() }
}

fn io(message: impl Into<String>) -> Failure {
    Failure { code: 3, message: message.into() }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| io(format!("{}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| io(format!("{}: {e}", path.display())))
}

fn load_device(path: &Path) -> Result<(FamilyParams, AnyPuf), Failure> {
    let params = FamilyParams::from_json(&read_text(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let device = params.build().map_err(|e| usage(format!("{}: {e}", path.display())))?;
    Ok((params, device))
}

fn load_store(path: &Path) -> Result<CrpStore, Failure> {
    CrpStore::from_text(&read_text(path)?).map_err(|e| io(format!("{}: {e}", path.display())))
}

fn extractor_for(params: &FamilyParams, device: &AnyPuf) -> Result<ExtractorParams, Failure> {
    ExtractorParams::for_raw_len(device.raw_secret_len(), params.repetition(), params.device_id())
        .map_err(|e| usage(e.to_string()))
}

fn emit(common: &Common, command: &str, body: Value) -> Result<(), Failure> {
    let Some(path) = &common.out else { return Ok(()) };
    let mut doc = json!({ "command": command, "seed": common.seed });
    if !common.deterministic {
        let now = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        doc["generated_at"] = json!(now);
    }
    doc["result"] = body;
    let text = serde_json::to_string_pretty(&doc).expect("JSON value") + "\n";
    write_text(path, &text)
}

fn gen(a: GenArgs) -> Result<u8, Failure> {
    let params = FamilyParams {
        family: a.family,
        seed: Some(a.common.seed),
        n: a.n,
        l: a.l,
        l_s: a.l_s,
        k: a.k,
        noise_p: a.noise_p,
        index_bits: a.index_bits,
        r: a.r,
    };
    let device = params.build().map_err(|e| usage(e.to_string()))?;
    let text = params.to_json() + "\n";
    match &a.common.out {
        Some(path) => write_text(path, &text)?,
        None => print!("{text}"),
    }
    println!(
        "generated {} device {}: challenge {} bits, raw secret {} bits",
        params.family,
        hex_id(&params),
        device.challenge_len(),
        device.raw_secret_len()
    );
    Ok(0)
}

fn hex_id(params: &FamilyParams) -> String {
    params.device_id().iter().map(|b| format!("{b:02x}")).collect()
}

fn enroll_cmd(a: EnrollArgs) -> Result<u8, Failure> {
    let (params, mut device) = load_device(&a.device)?;
    let extractor = extractor_for(&params, &device)?;
    let mut rng = Rng::new(a.common.seed);
    let mut store =
        enroll(&mut device, &extractor, params.device_id(), a.n, &mut rng).map_err(|e| usage(e.to_string()))?;
    if !a.common.deterministic {
        store.created_at = SystemTime::now().duration_since(UNIX_EPOCH).ok().map(|d| d.as_secs());
    }
    write_text(&a.store, &store.to_text())?;
    println!("enrolled {} pairs into {} (S of {} bits)", store.len(), a.store.display(), store.secret_len);
    emit(
        &a.common,
        "enroll",
        json!({ "device_id": hex_id(&params), "pairs": store.len(), "secret_len": store.secret_len }),
    )?;
    Ok(0)
}

fn attack(a: AttackArgs) -> Result<u8, Failure> {
    let (params, device) = load_device(&a.device)?;
    let budget = AttackBudget::new(a.dt_a, a.dt_r).map_err(|e| usage(e.to_string()))?;
    let rng = Rng::new(a.common.seed);
    let params_json = serde_json::to_value(&params).expect("plain struct");
    let report: Value = match a.strategy {
        Strategy::Brute | Strategy::Insider => {
            let mut copy = device.clone();
            let mut r = rng.fork("attack");
            let transcript = match a.strategy {
                Strategy::Brute => brute_force_attack(&mut copy, &budget, a.trials, &mut r),
                _ => insider_attack(&mut copy, &InsiderKnowledge::from_params(&params), &budget, a.trials, &mut r),
            }
            .map_err(|e| usage(e.to_string()))?;
            serde_json::to_value(transcript.report(params.family, params_json, budget)).expect("plain struct")
        }
        Strategy::Guess => {
            let AnyPuf::Quantum(q) = &device else {
                return Err(usage("`attack guess` needs a quantum device"));
            };
            let stats = quantum_guess_experiment(q.qubits(), a.trials as u64, &rng.fork("attack"));
            let report = AttackReport {
                family: params.family,
                params: params_json,
                budget,
                strategy: "guess-bases".into(),
                reads_used: 1,
                n_trials: stats.trials,
                success_rate: stats.full_rate(),
                bit_accuracy: stats.per_bit_rate(),
                ci95: wilson_ci95(stats.full_hits, stats.trials),
            };
            serde_json::to_value(report).expect("plain struct")
        }
        Strategy::Ml => {
            let AnyPuf::Arbiter(arbiter) = &device else {
                return Err(usage("`attack ml` needs an arbiter device"));
            };
            let mut copy = arbiter.clone();
            let outcome =
                arbiter_ml_experiment(&mut copy, a.n_train, a.trials, &MlConfig::default(), &mut rng.fork("attack"))
                    .map_err(|e| usage(e.to_string()))?;
            json!({
                "family": params.family,
                "params": params_json,
                "strategy": "modeling",
                "n_train": a.n_train,
                "n_trials": a.trials,
                "epochs": outcome.epochs,
                "train_accuracy": outcome.train_accuracy,
                "held_out_accuracy": outcome.held_out_accuracy,
            })
        }
    };
    match a.strategy {
        Strategy::Ml => println!(
            "modeling attack: held-out accuracy {:.4} after {} epochs on {} pairs",
            report["held_out_accuracy"], report["epochs"], a.n_train
        ),
        _ => println!(
            "{} attack: success_rate {:.4} bit_accuracy {:.4} over {} trials, {} reads",
            report["strategy"].as_str().unwrap_or("?"),
            report["success_rate"].as_f64().unwrap_or(f64::NAN),
            report["bit_accuracy"].as_f64().unwrap_or(f64::NAN),
            report["n_trials"],
            report["reads_used"]
        ),
    }
    emit(&a.common, "attack", report)?;
    Ok(0)
}

fn evaluate(a: EvaluateArgs) -> Result<u8, Failure> {
    let (params, device) = load_device(&a.device)?;
    let budget = AttackBudget::new(a.dt_a, a.dt_r).map_err(|e| usage(e.to_string()))?;
    let security = SecurityParams::for_device(&params, &budget, a.target_l).map_err(|e| usage(e.to_string()))?;
    let mut config = EvaluationConfig::new(budget);
    config.n_trials = a.trials;
    let report = evaluate_device(&device, &params, &security, &config, &mut Rng::new(a.common.seed))
        .map_err(|e| usage(e.to_string()))?;
    print!("{}", report.render_text());
    emit(&a.common, "evaluate", serde_json::to_value(&report).expect("plain struct"))?;
    Ok(if report.pass { 0 } else { 1 })
}

fn verdict_code(verdicts: &[Verdict]) -> u8 {
    if verdicts.iter().all(|v| v.accepted()) {
        0
    } else {
        1
    }
}

/// Both endpoints in this process over an in-memory pipe.
fn loopback(a: &SessionArgs, command: &str) -> Result<u8, Failure> {
    let (Some(device_path), Some(store_path)) = (&a.device, &a.store) else {
        return Err(usage("`pipe:` needs both --device and --store"));
    };
    let (params, mut device) = load_device(device_path)?;
    let extractor = extractor_for(&params, &device)?;
    let store: SharedStore = load_store(store_path)?.shared();
    let rng = Rng::new(a.common.seed);
    let mut verdicts = Vec::new();
    let mut failure = None;
    for i in 0..a.sessions as u64 {
        let (mut v_end, mut p_end) = pipe(DEFAULT_TIMEOUT);
        let shared = Arc::clone(&store);
        let mut v_rng = rng.fork_index("verifier", i);
        let verifier = thread::spawn(move || serve(&shared, &mut v_end, &mut v_rng));
        let prover = authenticate(&mut device, &extractor, &mut p_end, &mut rng.fork_index("prover", i));
        let served = verifier.join().map_err(|_| io("verifier thread panicked"))?;
        match (served, prover) {
            (Ok(outcome), Ok(_)) => verdicts.push(outcome.verdict),
            (Err(e), _) | (_, Err(e)) => {
                failure = Some(e.to_string());
                break;
            }
        }
    }
    write_text(store_path, &store.lock().expect("store lock").to_text())?;
    finish_sessions(a, command, &verdicts, failure)
}

fn finish_sessions(
    a: &SessionArgs,
    command: &str,
    verdicts: &[Verdict],
    failure: Option<String>,
) -> Result<u8, Failure> {
    let accepted = verdicts.iter().filter(|v| v.accepted()).count();
    println!("{command}: {accepted} of {} sessions accepted", verdicts.len());
    emit(&a.common, command, json!({ "sessions": verdicts.len(), "accepted": accepted, "error": failure }))?;
    match failure {
        Some(message) => Err(io(message)),
        None => Ok(verdict_code(verdicts)),
    }
}

fn serve_cmd(a: SessionArgs) -> Result<u8, Failure> {
    if a.addr == "pipe:" {
        return loopback(&a, "serve");
    }
    let store_path = a.store.clone().ok_or_else(|| usage("serve needs --store"))?;
    let store = load_store(&store_path)?.shared();
    let listener = TcpListener::bind(&a.addr).map_err(|e| io(format!("{}: {e}", a.addr)))?;
    eprintln!("listening on {}", listener.local_addr().map_err(|e| io(e.to_string()))?);
    let rng = Rng::new(a.common.seed);
    let mut verdicts = Vec::new();
    let mut failure = None;
    for i in 0..a.sessions as u64 {
        let (mut stream, _) = listener.accept().map_err(|e| io(e.to_string()))?;
        configure_tcp(&stream, DEFAULT_TIMEOUT).map_err(|e| io(e.to_string()))?;
        let result = serve(&store, &mut stream, &mut rng.fork_index("verifier", i));
        write_text(&store_path, &store.lock().expect("store lock").to_text())?;
        match result {
            Ok(outcome) => verdicts.push(outcome.verdict),
            Err(e) => {
                failure = Some(e.to_string());
                break;
            }
        }
    }
    finish_sessions(&a, "serve", &verdicts, failure)
}

fn authenticate_cmd(a: SessionArgs) -> Result<u8, Failure> {
    if a.addr == "pipe:" {
        return loopback(&a, "authenticate");
    }
    let device_path = a.device.clone().ok_or_else(|| usage("authenticate needs --device"))?;
    let (params, mut device) = load_device(&device_path)?;
    let extractor = extractor_for(&params, &device)?;
    let rng = Rng::new(a.common.seed);
    let mut verdicts = Vec::new();
    let mut failure = None;
    for i in 0..a.sessions as u64 {
        let mut stream = tcp_connect(a.addr.as_str(), DEFAULT_TIMEOUT).map_err(|e| io(format!("{}: {e}", a.addr)))?;
        match authenticate(&mut device, &extractor, &mut stream, &mut rng.fork_index("prover", i)) {
            Ok(v) => verdicts.push(v),
            Err(e) => {
                failure = Some(e.to_string());
                break;
            }
        }
    }
    finish_sessions(&a, "authenticate", &verdicts, failure)
}

fn workers(command: &Command) -> Option<usize> {
    match command {
        Command::Gen(a) => a.common.workers,
        Command::Enroll(a) => a.common.workers,
        Command::Attack(a) => a.common.workers,
        Command::Evaluate(a) => a.common.workers,
        Command::Serve(a) | Command::Authenticate(a) => a.common.workers,
    }
}

fn run(cli: Cli) -> Result<u8, Failure> {
    if let Some(n) = workers(&cli.command) {
        if n == 0 {
            return Err(usage("--workers must be ≥ 1"));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| usage(e.to_string()))?;
    }
    match cli.command {
        Command::Gen(a) => gen(a),
        Command::Enroll(a) => enroll_cmd(a),
        Command::Attack(a) => attack(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Serve(a) => serve_cmd(a),
        Command::Authenticate(a) => authenticate_cmd(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scratch(name: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!("pufsim-cli-{}-{name}", std::process::id()));
        let _ = fs::remove_dir_all(&dir);
        fs::create_dir_all(&dir).unwrap();
        dir
    }

    fn exec(args: &[&str]) -> u8 {
        let cli = Cli::try_parse_from(std::iter::once("pufsim").chain(args.iter().copied())).unwrap();
        match run(cli) {
            Ok(code) => code,
            Err(f) => f.code,
        }
    }

    #[test]
    fn gen_enroll_attack_serve() {
        let dir = scratch("flow");
        let p = |f: &str| dir.join(f).to_str().unwrap().to_string();
        let (device, store) = (p("device.json"), p("crp.txt"));
        assert_eq!(
            exec(&[
                "gen", "--family", "table", "--N", "256", "--l", "16", "--l_S", "32", "--seed", "7", "--out", &device
            ]),
            0
        );
        assert_eq!(exec(&["enroll", "--device", &device, "--store", &store, "--n", "256", "--seed", "1"]), 0);
        let text = fs::read_to_string(&store).unwrap();
        assert_eq!(text.lines().count(), 257);

        let (a, b) = (p("a.json"), p("b.json"));
        for out in [&a, &b] {
            let args = ["attack", "brute", "--device", &device, "--dt-a", "25", "--trials", "2000", "--seed", "3"];
            let mut args = args.to_vec();
            args.extend(["--deterministic", "--out", out]);
            assert_eq!(exec(&args), 0);
        }
        assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
        let report: Value = serde_json::from_str(&fs::read_to_string(&a).unwrap()).unwrap();
        assert_eq!(report["result"]["reads_used"], 25);
        assert!(report.get("generated_at").is_none());

        assert_eq!(
            exec(&[
                "serve",
                "--addr",
                "pipe:",
                "--device",
                &device,
                "--store",
                &store,
                "--sessions",
                "5",
                "--seed",
                "4"
            ]),
            0
        );
        let used = fs::read_to_string(&store).unwrap().lines().filter(|l| l.ends_with(" 1")).count();
        assert_eq!(used, 5);
    }

    #[test]
    fn evaluate_exit_codes() {
        let dir = scratch("evaluate");
        let q = dir.join("q.json").to_str().unwrap().to_string();
        assert_eq!(exec(&["gen", "--family", "quantum", "--N", "4", "--l", "128", "--seed", "5", "--out", &q]), 0);
        assert_eq!(exec(&["evaluate", "--device", &q, "--target-L", "1e-15", "--trials", "500", "--seed", "1"]), 0);
        let toy = dir.join("toy.json").to_str().unwrap().to_string();
        assert_eq!(exec(&["gen", "--family", "toy", "--l", "10", "--seed", "0", "--out", &toy]), 0);
        assert_eq!(exec(&["evaluate", "--device", &toy, "--target-L", "1e-3", "--dt-a", "2", "--seed", "1"]), 1);
        assert_eq!(exec(&["evaluate", "--device", &dir.join("missing.json").to_string_lossy(), "--seed", "1"]), 3);
    }

    #[test]
    fn usage_errors() {
        assert!(Cli::try_parse_from(["pufsim", "gen", "--family", "table"]).is_err());
        assert!(Cli::try_parse_from(["pufsim", "gen", "--family", "nope", "--seed", "1"]).is_err());
        assert_eq!(exec(&["gen", "--family", "table", "--seed", "1"]), 2);
    }
}
