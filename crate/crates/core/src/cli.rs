//! Command-line front end.
//!
//! Exit codes: 0 success, 2 configuration or input error, 3 desk-scale
//! refusal, 4 verification failure (with `--strict`).

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::adversary::{self, GameConfig, GameSystem, LeakageInstance};
use crate::analysis::{self, EstimatorConfig};
use crate::bitmat::BitMatrix;
use crate::crypt::LinkFrame;
use crate::error::{Error, Result};
use crate::is_codec::{CodeParams, Codebook, CodebookKind};
use crate::pipeline::{System, SystemParams};
use crate::polar::{self, IndexProfile, PolarParams, ProfileMethod};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_REFUSED: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "nuhuncc", version, about = "Seeded polar compression, random-binning coding and partial encryption experiments")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalOpts {
    /// JSON config file; missing fields take their defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed for every random choice of the run.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker thread cap.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Exit with code 4 when a verification check fails.
    #[arg(long, global = true)]
    pub strict: bool,
    /// Report path (stdout when absent).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Entropy profile and H/U/J partition.
    Profile,
    /// Encode, encrypt, decrypt and decode.
    Pipeline {
        /// Source matrix (`ℓ × n` bit-matrix file); sampled from the source law when absent.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Where to write the frame of the first run.
        #[arg(long)]
        frame: Option<PathBuf>,
        /// Decode this frame file instead of producing one.
        #[arg(long)]
        frame_in: Option<PathBuf>,
    },
    /// Exact leakage to a link-observing eavesdropper.
    Leak,
    /// Distinguishing game against a partially encrypted column.
    Game,
    /// Rate formula against measured frame sizes over a grid (CSV).
    Rate,
    /// Seed length against blocklength (CSV).
    Seed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProfileConfig {
    pub n: usize,
    pub p: f64,
    pub beta: f64,
    pub delta_override: Option<f64>,
    /// "exact" or "monte-carlo".
    pub method: String,
    pub samples: usize,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        Self {
            n: 8,
            p: 0.11,
            beta: 0.25,
            delta_override: None,
            method: "exact".into(),
            samples: 100_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub system: SystemParams,
    pub runs: usize,
}

pub fn default_system() -> SystemParams {
    SystemParams {
        n: 16,
        p: 0.11,
        beta: 0.25,
        delta_override: None,
        ell: 12,
        w: 0,
        k_s: 4,
        t: 1.0,
        c: 4,
        r: 16,
        scheme: "toy-stream".into(),
        codebook_kind: CodebookKind::Injective,
        codebook_seed: 0,
        mc_samples: 100_000,
        security_checks: false,
    }
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            system: default_system(),
            runs: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LeakConfig {
    pub n: usize,
    pub p: f64,
    pub beta: f64,
    pub delta_override: Option<f64>,
    pub ell: usize,
    pub w: usize,
    pub k_s: usize,
    pub t: f64,
    pub codebook_kind: CodebookKind,
    pub codebook_seed: u64,
    /// Conditioning rows; defaults to `0..k_s`.
    pub ks_set: Option<Vec<usize>>,
}

impl Default for LeakConfig {
    fn default() -> Self {
        Self {
            n: 2,
            p: 0.5,
            beta: 0.25,
            delta_override: None,
            ell: 4,
            w: 1,
            k_s: 1,
            t: 1.0,
            codebook_kind: CodebookKind::Independent,
            codebook_seed: 0,
            ks_set: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GameCliConfig {
    pub n: usize,
    pub p: f64,
    pub beta: f64,
    pub delta_override: Option<f64>,
    pub ell: usize,
    pub k_s: usize,
    pub c: usize,
    pub r: usize,
    pub t: f64,
    pub d: f64,
    pub trials: usize,
    pub i_star: usize,
    pub reveal_ks_minus_one: bool,
    /// Bit law of the column; the most biased high-entropy column when absent.
    pub column_bias: Option<f64>,
    pub codebook_kind: CodebookKind,
    pub codebook_seed: u64,
    /// Use the mirrored control codebook.
    pub mirrored: bool,
}

impl Default for GameCliConfig {
    fn default() -> Self {
        Self {
            n: 16,
            p: 0.11,
            beta: 0.25,
            delta_override: None,
            ell: 16,
            k_s: 4,
            c: 8,
            r: 16,
            t: 1.0,
            d: 2.0,
            trials: 100_000,
            i_star: 0,
            reveal_ks_minus_one: true,
            column_bias: None,
            codebook_kind: CodebookKind::Independent,
            codebook_seed: 0,
            mirrored: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RateConfig {
    pub n: Vec<usize>,
    pub ell: Vec<usize>,
    pub c: Vec<usize>,
    pub r: Vec<usize>,
    pub d_j: Vec<usize>,
    /// `|H|` per grid point; `n − d_J` when absent.
    pub h_size: Option<usize>,
}

impl Default for RateConfig {
    fn default() -> Self {
        Self {
            n: vec![8, 16],
            ell: vec![8, 16],
            c: vec![1, 2, 4],
            r: vec![0, 4, 8],
            d_j: vec![0, 2, 4],
            h_size: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SeedConfig {
    pub n_list: Vec<usize>,
    /// Source entropy `H(V)`; the bias is derived from it.
    pub entropy: f64,
    pub beta: f64,
    pub samples: usize,
    pub exact_up_to: usize,
}

impl Default for SeedConfig {
    fn default() -> Self {
        Self {
            n_list: (8..=14).map(|k| 1 << k).collect(),
            entropy: 0.9,
            beta: 0.2,
            samples: 100_000,
            exact_up_to: 16,
        }
    }
}

/// A report with its resolved config echoed.
#[derive(Serialize)]
struct Envelope<'a, C: Serialize, R: Serialize> {
    command: &'a str,
    seed: u64,
    config: &'a C,
    result: R,
}

fn load_config<C: DeserializeOwned + Default>(path: Option<&Path>) -> Result<C> {
    match path {
        None => Ok(C::default()),
        Some(p) => Ok(serde_json::from_str(&std::fs::read_to_string(p)?)?),
    }
}

fn emit(out: Option<&Path>, body: &[u8]) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, body)?,
        None => std::io::stdout().write_all(body)?,
    }
    Ok(())
}

fn emit_json<C: Serialize, R: Serialize>(g: &GlobalOpts, cmd: &str, seed: u64, config: &C, result: R) -> Result<()> {
    let env = Envelope {
        command: cmd,
        seed,
        config,
        result,
    };
    let mut text = serde_json::to_string_pretty(&env)?;
    text.push('\n');
    emit(g.out.as_deref(), text.as_bytes())
}

/// Outcome of a command: a verification flag for `--strict`.
struct Outcome {
    verified: bool,
    message: Option<String>,
}

impl Outcome {
    fn ok() -> Self {
        Self {
            verified: true,
            message: None,
        }
    }

    fn check(verified: bool, message: impl Into<String>) -> Self {
        Self {
            verified,
            message: (!verified).then(|| message.into()),
        }
    }
}

fn cmd_profile(g: &GlobalOpts, seed: u64) -> Result<Outcome> {
    let cfg: ProfileConfig = load_config(g.config.as_deref())?;
    let params = PolarParams {
        n: cfg.n,
        p: cfg.p,
        beta: cfg.beta,
        delta_override: cfg.delta_override,
    };
    let method = match cfg.method.as_str() {
        "exact" => ProfileMethod::Exact,
        "monte-carlo" => ProfileMethod::MonteCarlo {
            samples: cfg.samples,
            seed,
        },
        other => return Err(Error::InvalidParameter(format!("unknown profile method {other:?}"))),
    };
    let prof = polar::entropy_profile(&params, method)?;
    let mut text = prof.to_json()?;
    text.push('\n');
    emit(g.out.as_deref(), text.as_bytes())?;
    Ok(Outcome::ok())
}

#[derive(Serialize)]
struct PipelineReport {
    runs: usize,
    successes: usize,
    all_ok: bool,
    profile_id: String,
    n_tilde: usize,
    d_j: usize,
    u_size: usize,
    frame_bits: usize,
    failures: Vec<String>,
    input: Option<PathBuf>,
    frame: Option<PathBuf>,
}

fn cmd_pipeline(
    g: &GlobalOpts,
    seed: u64,
    input: Option<&Path>,
    frame_out: Option<&Path>,
    frame_in: Option<&Path>,
) -> Result<Outcome> {
    let cfg: PipelineConfig = load_config(g.config.as_deref())?;
    let sys = System::build(&cfg.system, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    if let Some(path) = frame_in {
        let frame = LinkFrame::load(path)?;
        let decoded = sys.decrypt(&frame)?;
        let ok = match input {
            Some(inp) => BitMatrix::load(inp)? == decoded,
            None => true,
        };
        let report = PipelineReport {
            runs: 1,
            successes: ok as usize,
            all_ok: ok,
            profile_id: sys.profile.id(),
            n_tilde: sys.profile.n_tilde(),
            d_j: sys.profile.d_j(),
            u_size: sys.profile.u_set.len(),
            frame_bits: frame.payload_bits(),
            failures: if ok { vec![] } else { vec!["decoded matrix differs from input".into()] },
            input: input.map(Path::to_path_buf),
            frame: Some(path.to_path_buf()),
        };
        emit_json(g, "pipeline", seed, &cfg, report)?;
        return Ok(Outcome::check(ok, "frame decode mismatch"));
    }
    let given = input.map(BitMatrix::load).transpose()?;
    if let Some(v) = &given {
        if v.rows() != cfg.system.ell || v.cols() != cfg.system.n {
            return Err(Error::Dimension(format!(
                "input is {}×{}, system expects {}×{}",
                v.rows(),
                v.cols(),
                cfg.system.ell,
                cfg.system.n
            )));
        }
    }
    let runs = cfg.runs.max(1);
    let mut successes = 0;
    let mut failures = Vec::new();
    let mut frame_bits = 0;
    for k in 0..runs {
        let v = match &given {
            Some(v) => v.clone(),
            None => sys.sample_source(&mut rng),
        };
        let rt = sys.roundtrip(&v, &mut rng)?;
        frame_bits = rt.frame.payload_bits();
        if k == 0 {
            if let Some(p) = frame_out {
                rt.frame.save(p)?;
            }
        }
        if rt.ok {
            successes += 1;
        } else {
            failures.push(format!(
                "run {k}: {}",
                rt.error.unwrap_or_else(|| "decoded matrix differs".into())
            ));
        }
    }
    let all_ok = successes == runs;
    let report = PipelineReport {
        runs,
        successes,
        all_ok,
        profile_id: sys.profile.id(),
        n_tilde: sys.profile.n_tilde(),
        d_j: sys.profile.d_j(),
        u_size: sys.profile.u_set.len(),
        frame_bits,
        failures,
        input: input.map(Path::to_path_buf),
        frame: frame_out.map(Path::to_path_buf),
    };
    emit_json(g, "pipeline", seed, &cfg, report)?;
    Ok(Outcome::check(all_ok, format!("{} of {runs} roundtrips failed", runs - successes)))
}

fn cmd_leak(g: &GlobalOpts, seed: u64) -> Result<Outcome> {
    let cfg: LeakConfig = load_config(g.config.as_deref())?;
    let params = PolarParams {
        n: cfg.n,
        p: cfg.p,
        beta: cfg.beta,
        delta_override: cfg.delta_override,
    };
    let prof = polar::entropy_profile(&params, ProfileMethod::Exact)?;
    let code = CodeParams::new(cfg.ell, cfg.w, cfg.k_s, cfg.t, cfg.codebook_seed ^ seed).with_kind(cfg.codebook_kind);
    let cb = Codebook::generate(&code)?;
    let ks: Vec<usize> = cfg.ks_set.clone().unwrap_or_else(|| (0..cfg.k_s).collect());
    let inst = LeakageInstance {
        profile: &prof,
        codebook: &cb,
        w: cfg.w,
        t: cfg.t,
    };
    let rep = adversary::leakage_exact(&inst, &ks)?;
    let ok = rep.max_distance <= rep.bound;
    emit_json(g, "leak", seed, &cfg, &rep)?;
    Ok(Outcome::check(ok, "leakage exceeds the bound"))
}

fn cmd_game(g: &GlobalOpts, seed: u64) -> Result<Outcome> {
    let cfg: GameCliConfig = load_config(g.config.as_deref())?;
    let params = PolarParams {
        n: cfg.n,
        p: cfg.p,
        beta: cfg.beta,
        delta_override: cfg.delta_override,
    };
    params.validate()?;
    let bias = match cfg.column_bias {
        Some(b) => b,
        None => most_biased_high_column(&params)?,
    };
    let cb = if cfg.mirrored {
        adversary::mirrored_codebook(cfg.ell, cfg.k_s, cfg.i_star, cfg.codebook_seed ^ seed)?
    } else {
        Codebook::generate(&CodeParams::new(cfg.ell, 0, cfg.k_s, cfg.t, cfg.codebook_seed ^ seed).with_kind(cfg.codebook_kind))?
    };
    let sys = GameSystem {
        n: cfg.n,
        beta: cfg.beta,
        delta: params.delta(),
        t: cfg.t,
        c: cfg.c,
        r: cfg.r,
    };
    let game = GameConfig {
        i_star: cfg.i_star,
        m1: false,
        m2: true,
        trials: cfg.trials,
        d: cfg.d,
        reveal_ks_minus_one: cfg.reveal_ks_minus_one,
        column_bias: bias,
        seed,
    };
    let rep = adversary::run_iss_cca1_game(&cb, &sys, &game)?;
    let ok = rep.within_bound(3.0);
    emit_json(g, "game", seed, &cfg, &rep)?;
    Ok(Outcome::check(ok, "empirical advantage exceeds bound + 3 SE"))
}

/// Bit law of the high-entropy column whose marginal is furthest from ½.
pub fn most_biased_high_column(params: &PolarParams) -> Result<f64> {
    let prof: IndexProfile = polar::entropy_profile(params, params_method(params))?;
    Ok(prof
        .h_set
        .iter()
        .map(|&j| adversary::column_marginal(params.n, params.p, j))
        .fold(0.5, |a, b| if (b - 0.5).abs() > (a - 0.5).abs() { b } else { a }))
}

fn params_method(params: &PolarParams) -> ProfileMethod {
    if params.n <= 16 {
        ProfileMethod::Exact
    } else {
        ProfileMethod::MonteCarlo {
            samples: polar::MC_MIN_SAMPLES,
            seed: 0,
        }
    }
}

fn cmd_rate(g: &GlobalOpts, seed: u64) -> Result<Outcome> {
    let cfg: RateConfig = load_config(g.config.as_deref())?;
    let mut rows = Vec::new();
    for &ell in &cfg.ell {
        let cb = Codebook::generate(&CodeParams::new(ell, 0, 1, 1.0, seed).with_kind(CodebookKind::Injective))?;
        for &n in &cfg.n {
            for &d_j in &cfg.d_j {
                let h = cfg.h_size.unwrap_or(n.saturating_sub(d_j));
                if h + d_j > n {
                    return Err(Error::InvalidParameter(format!("|H| + d_J = {} exceeds n = {n}", h + d_j)));
                }
                let prof = IndexProfile::from_sets(n, 0.5, (0..h).collect(), (h..h + d_j).collect())?;
                for &c in &cfg.c {
                    for &r in &cfg.r {
                        rows.push(analysis::rate_report(&prof, ell, c, r, Some(&cb))?);
                    }
                }
            }
        }
    }
    let ok = rows.iter().all(|r| r.exact_match);
    let mut buf = Vec::new();
    analysis::write_csv(&mut buf, &rows)?;
    emit(g.out.as_deref(), &buf)?;
    Ok(Outcome::check(ok, "formula and measured rate differ"))
}

fn cmd_seed(g: &GlobalOpts, seed: u64) -> Result<Outcome> {
    let cfg: SeedConfig = load_config(g.config.as_deref())?;
    let p = analysis::bias_for_entropy(cfg.entropy)?;
    let est = EstimatorConfig {
        samples: cfg.samples,
        seed,
        exact_up_to: cfg.exact_up_to,
    };
    let pts = analysis::seed_study(&cfg.n_list, p, cfg.beta, &est)?;
    let mut buf = Vec::new();
    analysis::write_csv(&mut buf, &pts)?;
    emit(g.out.as_deref(), &buf)?;
    let monotone = pts.windows(2).all(|w| w[1].seed_fraction <= w[0].seed_fraction);
    Ok(Outcome::check(monotone, "seed fraction increased with n"))
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::TooLarge { .. } => EXIT_REFUSED,
        Error::Ambiguous(_) | Error::NotACodeword | Error::Decryption(_) => EXIT_VERIFY,
        _ => EXIT_CONFIG,
    }
}

/// Parse `args` and run; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    if let Some(t) = cli.global.threads {
        // a pool may already exist when embedded; the cap is best effort then
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build_global();
    }
    let g = &cli.global;
    let seed = g.seed.unwrap_or(0);
    let result = match &cli.command {
        Command::Profile => cmd_profile(g, seed),
        Command::Pipeline { input, frame, frame_in } => {
            cmd_pipeline(g, seed, input.as_deref(), frame.as_deref(), frame_in.as_deref())
        }
        Command::Leak => cmd_leak(g, seed),
        Command::Game => cmd_game(g, seed),
        Command::Rate => cmd_rate(g, seed),
        Command::Seed => cmd_seed(g, seed),
    };
    match result {
        Ok(o) => {
            if let Some(msg) = &o.message {
                eprintln!("verification failed: {msg}");
            }
            if g.strict && !o.verified {
                EXIT_VERIFY
            } else {
                EXIT_OK
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
