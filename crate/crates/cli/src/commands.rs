use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use std::io::{BufReader, BufWriter, Write};
use std::net::{TcpListener, TcpStream};
use std::path::{Path, PathBuf};
use std::process::{Child, Command as Process, Stdio};
use std::time::Instant;
use thiserror::Error;

use cvqc::compile::{
    bell_fidelity_estimate, eta_only_circuit, fidelity_for_counts, fidelity_product, lower, verification_circuit,
    CompileError, ErrorBudget,
};
use cvqc::curve::{write_csv, CurveError};
use cvqc::hamiltonian::HamiltonianError;
use cvqc::noise::{curve_point, NoiseError, NoiseModel};
use cvqc::protocol::{
    exact_round_stats, quantumness_demo, quantumness_exact_density, run_extended, serve, write_transcript,
    CaptureWriter, Claim, ExtendedRunStats, LineTransport, Loopback, Prover, ProverConfig, ProtocolError,
    QuantumnessProver, RoundKind, RoundPolicy, Transport, TwoToOneFunction, VerdictKind, VerifierSession,
    RESAMPLES,
};
use cvqc::rng::{mix, streams, substream};
use cvqc::DecisionProblem;

use crate::manifest::write_manifest;
use crate::{CompileArgs, ProverArgs, QuantumnessArgs, RoundsArgs, SweepArgs, VerifyArgs};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
            CliError::Transport(_) => 4,
            CliError::Failed(_) => 1,
        }
    }
}

impl From<HamiltonianError> for CliError {
    fn from(e: HamiltonianError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<ProtocolError> for CliError {
    fn from(e: ProtocolError) -> Self {
        match e {
            ProtocolError::Io(io) => CliError::Transport(io.to_string()),
            ProtocolError::Closed => CliError::Transport("peer closed the connection".into()),
            ProtocolError::Config(m) => CliError::Usage(m),
            other => CliError::Failed(other.to_string()),
        }
    }
}

impl From<NoiseError> for CliError {
    fn from(e: NoiseError) -> Self {
        match e {
            NoiseError::Protocol(p) => p.into(),
            NoiseError::LambdaOutOfRange(_) | NoiseError::TooFewPoints { .. } | NoiseError::Hamiltonian(_) => {
                CliError::Usage(e.to_string())
            }
            NoiseError::Sim(s) => CliError::Failed(s.to_string()),
        }
    }
}

impl From<CurveError> for CliError {
    fn from(e: CurveError) -> Self {
        match e {
            CurveError::Io(io) => CliError::Io(io),
            other => CliError::Io(std::io::Error::other(other.to_string())),
        }
    }
}

impl From<CompileError> for CliError {
    fn from(e: CompileError) -> Self {
        CliError::Failed(e.to_string())
    }
}

type Result<T> = std::result::Result<T, CliError>;

/// Parses `start:stop:count` into `count` evenly spaced values, endpoints included.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || CliError::Usage(format!("bad grid '{spec}' (expected start:stop:count)"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let start: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let stop: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let count: usize = parts[2].trim().parse().map_err(|_| bad())?;
    match count {
        0 => Err(bad()),
        1 => Ok(vec![start]),
        n => Ok((0..n).map(|i| start + (stop - start) * i as f64 / (n - 1) as f64).collect()),
    }
}

fn parse_claim(s: &str) -> Result<Option<Claim>> {
    match s {
        "auto" => Ok(None),
        other => other.parse().map(Some).map_err(|e: String| CliError::Usage(e)),
    }
}

/// Writes `body` to `out` (plus manifest) or to stdout.
fn emit<C: Serialize>(
    out: Option<&Path>,
    body: &[u8],
    subcommand: &str,
    config: &C,
    seed: u64,
    started: Instant,
    extra: &[PathBuf],
) -> Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, body)?;
            let mut outputs = vec![path.to_path_buf()];
            outputs.extend_from_slice(extra);
            write_manifest(path, subcommand, config, seed, started.elapsed().as_secs_f64(), &outputs)?;
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(body)?;
            stdout.flush()?;
        }
    }
    Ok(())
}

fn json_bytes<T: Serialize>(v: &T) -> Result<Vec<u8>> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| CliError::Failed(e.to_string()))?;
    s.push('\n');
    Ok(s.into_bytes())
}

pub fn sweep(args: &SweepArgs) -> Result<()> {
    let started = Instant::now();
    let alphas = parse_grid(&args.alphas)?;
    let model = NoiseModel::new(args.lambda)?;
    if args.mode.is_sampled() && args.shots == 0 {
        return Err(CliError::Usage("shots must be at least 1".into()));
    }
    let points = alphas
        .par_iter()
        .enumerate()
        .map(|(i, &a)| {
            let mut p = curve_point(args.variant, a, &model, args.mode, args.shots, mix(args.seed, i as u64))?;
            if args.mode.is_sampled() {
                p.seed = args.seed;
            }
            Ok::<_, NoiseError>(p)
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let mut buf = Vec::new();
    write_csv(&mut buf, &points)?;
    emit(args.out.as_deref(), &buf, "sweep", args, args.seed, started, &[])
}

fn basis_label(h: usize) -> String {
    format!("{}{}", h >> 1, h & 1)
}

fn per_basis(v: &[f64; 4]) -> serde_json::Value {
    let mut m = serde_json::Map::new();
    for (h, x) in v.iter().enumerate() {
        m.insert(basis_label(h), json!(x));
    }
    serde_json::Value::Object(m)
}

fn verify_json(stats: Option<&ExtendedRunStats>, verdict: &str, reason: Option<&str>, transcript: Option<&Path>) -> serde_json::Value {
    let transcript_path = transcript.map(|p| p.display().to_string());
    match stats {
        Some(s) => json!({
            "verdict": verdict,
            "reason": reason,
            "claim": s.claim,
            "original_alpha": s.original_alpha,
            "effective_alpha": s.effective_alpha,
            "n_terms": s.n_terms,
            "r_count": s.r_count,
            "r_est": s.r_est,
            "r_err": s.r_err,
            "T0": s.t0,
            "T1": s.t1,
            "c": s.c,
            "c_unmerged": s.c_unmerged,
            "v": per_basis(&s.v),
            "p_t": per_basis(&s.p_t),
            "p_m": per_basis(&s.p_m),
            "prob_below_T0": s.prob_below_t0,
            "p_accept": s.p_accept,
            "transcript_path": transcript_path,
        }),
        None => json!({
            "verdict": verdict,
            "reason": reason,
            "transcript_path": transcript_path,
        }),
    }
}

/// Runs the verifier half over `transport` and renders the verdict JSON.
fn verify_over<T: Transport>(args: &VerifyArgs, transport: T, transcript: Option<&Path>) -> Result<serde_json::Value> {
    let problem = DecisionProblem::new(args.alpha, args.variant)?;
    let mut session = match VerifierSession::open(transport, problem, args.seed) {
        Ok(s) => s,
        Err(e) if e.is_transport() => return Err(e.into()),
        Err(ProtocolError::Malformed(_) | ProtocolError::Unexpected(_)) => {
            return Ok(verify_json(None, "reject", Some("protocol_error"), None));
        }
        Err(e) => return Err(e.into()),
    };
    let outcome = run_extended(&mut session, args.n_terms, args.repetitions, args.round, args.seed);
    let body = match outcome {
        Ok(stats) => {
            let verdict = match stats.verdict {
                VerdictKind::Accept => "accept",
                _ => "reject",
            };
            let reason = stats.reason.map(|r| r.as_str());
            verify_json(Some(&stats), verdict, reason, transcript)
        }
        Err(e) if e.is_transport() => return Err(e.into()),
        Err(ProtocolError::Malformed(_) | ProtocolError::Unexpected(_)) => {
            session.abort_protocol_error();
            verify_json(None, "reject", Some("protocol_error"), transcript)
        }
        Err(e) => return Err(e.into()),
    };
    if let Some(path) = transcript {
        write_transcript(path, session.transcript(), &session.sidecar())?;
    }
    Ok(body)
}

fn spawn_prover(cmd: &str) -> Result<Child> {
    Process::new("sh")
        .arg("-c")
        .arg(cmd)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .map_err(|e| CliError::Transport(format!("cannot start prover '{cmd}': {e}")))
}

fn save_capture(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    if let Some(p) = path {
        std::fs::write(p, bytes)?;
    }
    Ok(())
}

pub fn verify(args: &VerifyArgs) -> Result<()> {
    let started = Instant::now();
    if args.n_terms == 0 || args.repetitions == 0 {
        return Err(CliError::Usage("n-terms and repetitions must be at least 1".into()));
    }
    NoiseModel::new(args.lambda)?;
    let claim = parse_claim(&args.claim)?;
    let transcript = args.transcript.clone().or_else(|| {
        args.out.as_ref().map(|o| {
            let mut p = o.as_os_str().to_owned();
            p.push(".transcript.json");
            PathBuf::from(p)
        })
    });
    let transcript = transcript.as_deref();

    let body = if args.prover == "inproc" {
        let config = ProverConfig { strategy: args.cheat, lambda: args.lambda, claim, seed: args.seed };
        let mut loopback = Loopback::new(Prover::new(config));
        let body = verify_over(args, &mut loopback, transcript)?;
        save_capture(args.capture.as_deref(), loopback.prover_bound_bytes())?;
        body
    } else if let Some(cmd) = args.prover.strip_prefix("exec:") {
        let mut child = spawn_prover(cmd)?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let writer = CaptureWriter::new(stdin);
        let captured = writer.captured();
        let result = verify_over(args, LineTransport::new(BufReader::new(stdout), writer), transcript);
        // Dropping the transport closed the prover's stdin; it exits on EOF.
        let _ = child.wait();
        let body = result?;
        save_capture(args.capture.as_deref(), &captured.lock().expect("capture lock"))?;
        body
    } else if let Some(addr) = args.prover.strip_prefix("tcp:") {
        let stream = TcpStream::connect(addr).map_err(|e| CliError::Transport(format!("connect {addr}: {e}")))?;
        let reader = BufReader::new(stream.try_clone()?);
        let writer = CaptureWriter::new(stream);
        let captured = writer.captured();
        let body = verify_over(args, LineTransport::new(reader, writer), transcript)?;
        save_capture(args.capture.as_deref(), &captured.lock().expect("capture lock"))?;
        body
    } else {
        return Err(CliError::Usage(format!("bad --prover '{}' (inproc, exec:CMD or tcp:HOST:PORT)", args.prover)));
    };

    let extra: Vec<PathBuf> = transcript.map(|p| p.to_path_buf()).into_iter().collect();
    emit(args.out.as_deref(), &json_bytes(&body)?, "verify", args, args.seed, started, &extra)
}

#[derive(Debug, Serialize)]
struct RoundsRow {
    k1: u8,
    k2: u8,
    round: RoundKind,
    rounds: u64,
    rejections: u64,
    p_reject: f64,
    p_err: f64,
    p_exact: f64,
}

pub fn rounds(args: &RoundsArgs) -> Result<()> {
    let started = Instant::now();
    if args.shots == 0 {
        return Err(CliError::Usage("shots must be at least 1".into()));
    }
    NoiseModel::new(args.lambda)?;
    let problem = DecisionProblem::new(args.alpha, args.variant)?;
    let rows = (0..4usize)
        .into_par_iter()
        .map(|h| -> Result<RoundsRow> {
            let keys = [(h >> 1) as u8, (h & 1) as u8];
            let seed = mix(args.seed, h as u64);
            let prover = Prover::new(ProverConfig { claim: Some(Claim::Yes), ..ProverConfig::honest(args.lambda, seed) });
            let mut session = VerifierSession::open(Loopback::new(prover), problem, seed)?;
            let mut counts = [0u64; 2];
            let mut rejects = [0u64; 2];
            for _ in 0..args.shots {
                let rec = session.round(keys, args.round)?;
                let i = usize::from(rec.round == RoundKind::Measure);
                counts[i] += 1;
                rejects[i] += u64::from(rec.verdict == VerdictKind::Reject);
            }
            session.finish(VerdictKind::Accept, None)?;
            // Auto policy reports measurement rounds.
            let (kind, i) = match args.round {
                RoundPolicy::ForceTest => (RoundKind::Test, 0),
                _ => (RoundKind::Measure, 1),
            };
            let n = counts[i];
            let p = if n > 0 { rejects[i] as f64 / n as f64 } else { 0.0 };
            let mut rng = substream(seed, streams::RESAMPLING);
            let resampled: Vec<f64> = (0..RESAMPLES)
                .map(|_| {
                    use rand_distr::Distribution;
                    if n == 0 {
                        return 0.0;
                    }
                    rand_distr::Binomial::new(n, p).expect("valid").sample(&mut rng) as f64 / n as f64
                })
                .collect();
            let mean = resampled.iter().sum::<f64>() / RESAMPLES as f64;
            let err = (resampled.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (RESAMPLES - 1) as f64).sqrt();
            let exact = exact_round_stats(problem.alpha, keys, args.lambda)?;
            let p_exact = if kind == RoundKind::Test { exact.test_reject } else { exact.measure_reject };
            Ok(RoundsRow { k1: keys[0], k2: keys[1], round: kind, rounds: n, rejections: rejects[i], p_reject: p, p_err: err, p_exact })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut buf = Vec::new();
    writeln!(buf, "{}", cvqc::curve::SCHEMA_LINE)?;
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        for r in &rows {
            w.serialize(r).map_err(|e| CliError::Io(std::io::Error::other(e.to_string())))?;
        }
        w.flush()?;
    }
    emit(args.out.as_deref(), &buf, "rounds", args, args.seed, started, &[])
}

/// Single-gate count of the reference eta-only budget.
pub const ETA_ONLY_REFERENCE_SINGLES: usize = 8;

pub fn compile_report(args: &CompileArgs) -> Result<()> {
    let started = Instant::now();
    let keys: Vec<[u8; 2]> = match args.keys.as_str() {
        "all" => vec![[0, 0], [0, 1], [1, 0], [1, 1]],
        s if s.len() == 2 && s.chars().all(|c| c == '0' || c == '1') => {
            let b = s.as_bytes();
            vec![[b[0] - b'0', b[1] - b'0']]
        }
        other => return Err(CliError::Usage(format!("bad --keys '{other}' (00, 01, 10, 11 or all)"))),
    };
    if !(0.0..=std::f64::consts::FRAC_PI_2 + 1e-9).contains(&args.alpha) {
        return Err(CliError::Usage(format!("alpha {} outside [0, pi/2]", args.alpha)));
    }
    let budget = ErrorBudget::default();
    let mut circuits = Vec::new();
    for k in &keys {
        let native = lower(&verification_circuit(args.alpha, *k)?)?;
        let c = native.counts();
        circuits.push(json!({
            "keys": format!("{}{}", k[0], k[1]),
            "ms_count": c.ms,
            "single_count": c.single,
            "rx": c.rx,
            "ry": c.ry,
            "rz": c.rz,
            "expected": {"ms_count": 5, "single_count": 19},
            "matches_expected": c.ms == 5 && c.single == 19,
            "ms_pairs": native.ms_pairs(),
            "fidelity_product": fidelity_product(&budget, &native)?,
            "gates": native.to_json(),
        }));
    }
    let mut eta_only = Vec::new();
    for k in &keys {
        let native = lower(&eta_only_circuit(args.alpha, *k)?)?;
        let c = native.counts();
        eta_only.push(json!({
            "keys": format!("{}{}", k[0], k[1]),
            "ms_count": c.ms,
            "single_count": c.single,
            "fidelity_product": fidelity_product(&budget, &native)?,
            "gates": native.to_json(),
        }));
    }
    let body = json!({
        "alpha": args.alpha,
        "budget": budget,
        "circuits": circuits,
        "full_circuit_budget": fidelity_for_counts(&budget, 19, 5)?,
        "eta_only": eta_only,
        "eta_only_budget": {
            "single_count": ETA_ONLY_REFERENCE_SINGLES,
            "ms_count": 1,
            "fidelity": fidelity_for_counts(&budget, ETA_ONLY_REFERENCE_SINGLES, 1)?,
        },
        "bell_fidelity": [
            {"zz": 0.891, "xx": 0.812, "estimate": bell_fidelity_estimate(0.891, 0.812)},
            {"zz": 0.955, "xx": 0.935, "estimate": bell_fidelity_estimate(0.955, 0.935)},
        ],
    });
    emit(args.out.as_deref(), &json_bytes(&body)?, "compile-report", args, 0, started, &[])
}

pub fn quantumness(args: &QuantumnessArgs) -> Result<()> {
    let started = Instant::now();
    let prover = match args.prover.as_str() {
        "honest" => QuantumnessProver::Honest { lambda: NoiseModel::new(args.lambda)?.lambda() },
        "classical-baseline" => QuantumnessProver::ClassicalBaseline,
        other => return Err(CliError::Usage(format!("unknown prover '{other}' (honest or classical-baseline)"))),
    };
    let mut rng = substream(args.seed, streams::SAMPLING);
    let f = TwoToOneFunction::random(args.m_bits, &mut rng)?;
    let result = quantumness_demo(&f, args.trials, prover, &mut rng)?;
    let exact = match prover {
        QuantumnessProver::Honest { lambda } if 2 * args.m_bits <= 8 => {
            let (a, b) = quantumness_exact_density(&f, lambda)?;
            json!({"p_A": a, "p_B": b})
        }
        _ => serde_json::Value::Null,
    };
    let note = match prover {
        QuantumnessProver::ClassicalBaseline => Some(
            "a prover that memorizes one preimage and answers d = 0 passes both branches; \
             at this scale the test does not separate classical from quantum provers",
        ),
        _ => None,
    };
    if let Some(n) = note {
        eprintln!("note: {n}");
    }
    let body = json!({
        "m_bits": args.m_bits,
        "trials": args.trials,
        "prover": args.prover,
        "lambda": args.lambda,
        "trials_A": result.trials_a,
        "trials_B": result.trials_b,
        "p_A": result.p_a,
        "p_A_err": result.p_a_err,
        "p_B": result.p_b,
        "p_B_err": result.p_b_err,
        "p_A_plus_2p_B": result.score,
        "exact": exact,
        "note": note,
    });
    emit(args.out.as_deref(), &json_bytes(&body)?, "quantumness", args, args.seed, started, &[])
}

pub fn prover(args: &ProverArgs) -> Result<()> {
    NoiseModel::new(args.lambda)?;
    let config = ProverConfig { strategy: args.cheat, lambda: args.lambda, claim: parse_claim(&args.claim)?, seed: args.seed };
    match &args.listen {
        None => {
            let stdin = std::io::stdin().lock();
            let stdout = BufWriter::new(std::io::stdout().lock());
            let mut p = Prover::new(config);
            serve(&mut p, stdin, stdout)?;
        }
        Some(addr) => {
            let listener = TcpListener::bind(addr).map_err(|e| CliError::Transport(format!("bind {addr}: {e}")))?;
            eprintln!("listening on {}", listener.local_addr()?);
            for stream in listener.incoming() {
                let stream = stream?;
                let mut p = Prover::new(config);
                let reader = BufReader::new(stream.try_clone()?);
                if let Err(e) = serve(&mut p, reader, BufWriter::new(stream)) {
                    eprintln!("session ended: {e}");
                }
                if args.once {
                    break;
                }
            }
        }
    }
    Ok(())
}
