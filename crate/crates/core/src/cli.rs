//! The `agdecode` command line.
//!
//! Exit codes: 0 success, 2 decode failure, 3 configuration or input error,
//! 4 internal invariant violation.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{format_word, parse_word, ConfigError, RunConfig, Setup};
use crate::decoder::{BranchIDivisor, DecoderError, DecoderPlan};
use crate::repro::{self, ReproError};
use crate::sim::{random_nonzero, simulate, Mode};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DECODE_FAILURE: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_INVARIANT: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "agdecode", version, about = "Majority-coset decoding of AG codes on plane curves")]
pub struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the config's branch (i) code divisor.
    #[arg(long, global = true, value_enum)]
    branch_i_divisor: Option<BranchArg>,
    /// Matrix size above which products switch to Strassen.
    #[arg(long, global = true)]
    strassen_crossover: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum BranchArg {
    #[value(name = "G")]
    G,
    #[value(name = "Gr")]
    Gr,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print code parameters.
    Info,
    /// Encode a message file (k symbols) into a codeword file.
    Encode {
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Add an error to a word: random of the given weight, or from a file.
    Corrupt {
        input: PathBuf,
        #[arg(long, conflicts_with = "error")]
        weight: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        error: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decode a received word; writes error.txt, codeword.txt and trace.json to --out.
    Decode {
        input: PathBuf,
        #[arg(long)]
        ke_only: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Seeded decoding simulation.
    Simulate {
        /// Error weights; repeatable. Defaults to the config, then 0..=t.
        #[arg(long)]
        weight: Vec<usize>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Also run the plain key equation.
        #[arg(long)]
        ke_only: bool,
        /// Include mean decode times (makes reports run-dependent).
        #[arg(long)]
        timing: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one of the bundled worked examples.
    ReproduceExample {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=2))]
        which: u8,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Decoder(#[from] DecoderError),
    #[error(transparent)]
    Repro(#[from] ReproError),
    #[error("decoding failed")]
    DecodeFailed,
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Input(_) => EXIT_CONFIG,
            CliError::DecodeFailed => EXIT_DECODE_FAILURE,
            CliError::Decoder(DecoderError::Code(_)) => EXIT_CONFIG,
            CliError::Decoder(
                DecoderError::NoExtraPoint
                | DecoderError::GenusZero
                | DecoderError::CapacityZero
                | DecoderError::BadF0 { .. },
            ) => EXIT_CONFIG,
            CliError::Decoder(_) => EXIT_INVARIANT,
            CliError::Repro(ReproError::Config(_)) => EXIT_CONFIG,
            CliError::Repro(_) => EXIT_INVARIANT,
        }
    }
}

/// Parses `args` and runs; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

struct Loaded {
    config: RunConfig,
    setup: Setup,
}

impl Cli {
    fn load(&self) -> Result<Loaded, CliError> {
        let path = self
            .config
            .as_ref()
            .ok_or_else(|| CliError::Input("--config is required for this command".into()))?;
        let mut config = RunConfig::load(path)?;
        if let Some(b) = self.branch_i_divisor {
            config.branch_i_divisor = Some(match b {
                BranchArg::G => BranchIDivisor::G,
                BranchArg::Gr => BranchIDivisor::Gr,
            });
        }
        if let Some(c) = self.strassen_crossover.or(config.strassen_crossover) {
            crate::linalg::set_default_crossover(c);
        }
        let setup = config.build()?;
        Ok(Loaded { config, setup })
    }
}

fn read_word(setup: &Setup, path: &Path, len: usize) -> Result<Vec<crate::gf::Fe>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let w = parse_word(&setup.field, &text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    if w.len() != len {
        return Err(CliError::Input(format!(
            "{}: expected {len} symbols, got {}",
            path.display(),
            w.len()
        )));
    }
    Ok(w)
}

fn write_out(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Input(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn pretty(v: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

fn plan(setup: &Setup) -> Result<DecoderPlan, CliError> {
    Ok(DecoderPlan::new(&setup.code, setup.p_inf, setup.options.clone())?)
}

fn execute(cli: Cli) -> Result<i32, CliError> {
    match &cli.command {
        Command::Info => {
            let l = cli.load()?;
            let code = &l.setup.code;
            let curve = &l.setup.curve;
            println!(
                "n={} k={} d*={} t={} g={}",
                code.n(),
                code.k(),
                code.d_star(),
                code.t(),
                curve.genus()
            );
            println!(
                "points={} affine={} G={} P_inf={}",
                curve.points().len(),
                curve.affine_points().len(),
                code.divisor().render(curve),
                curve.point(l.setup.p_inf).render(curve.field())
            );
            Ok(EXIT_OK)
        }
        Command::Encode { input, out } => {
            let l = cli.load()?;
            let msg = read_word(&l.setup, input, l.setup.code.k())?;
            let cw = l.setup.code.encode(&msg).map_err(DecoderError::from)?;
            write_out(out.as_deref(), &format_word(&l.setup.field, &cw))?;
            Ok(EXIT_OK)
        }
        Command::Corrupt {
            input,
            weight,
            seed,
            error,
            out,
        } => {
            let l = cli.load()?;
            let field = &l.setup.field;
            let n = l.setup.code.n();
            let mut y = read_word(&l.setup, input, n)?;
            let e = match (weight, error) {
                (_, Some(p)) => read_word(&l.setup, p, n)?,
                (Some(w), None) => {
                    if *w > n {
                        return Err(CliError::Input(format!("weight {w} exceeds n = {n}")));
                    }
                    let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                    let mut e = vec![crate::gf::Fe::ZERO; n];
                    for j in sample(&mut rng, n, *w) {
                        e[j] = random_nonzero(field, &mut rng);
                    }
                    e
                }
                (None, None) => return Err(CliError::Input("corrupt needs --weight or --error".into())),
            };
            for (a, &b) in y.iter_mut().zip(&e) {
                *a = field.add(*a, b);
            }
            write_out(out.as_deref(), &format_word(field, &y))?;
            Ok(EXIT_OK)
        }
        Command::Decode { input, ke_only, out } => {
            let l = cli.load()?;
            let y = read_word(&l.setup, input, l.setup.code.n())?;
            let p = plan(&l.setup)?;
            let res = if *ke_only { p.decode_ke_only(&y)? } else { p.decode(&y)? };
            let trace = pretty(&res.to_json(&l.setup.field));
            if let Some(dir) = out {
                std::fs::create_dir_all(dir).map_err(|e| CliError::Input(format!("{}: {e}", dir.display())))?;
                write_out(Some(&dir.join("trace.json")), &trace)?;
                if let (Some(e), Some(c)) = (&res.error, &res.codeword) {
                    write_out(Some(&dir.join("error.txt")), &format_word(&l.setup.field, e))?;
                    write_out(Some(&dir.join("codeword.txt")), &format_word(&l.setup.field, c))?;
                }
            }
            print!("{trace}");
            if res.is_decoded() {
                Ok(EXIT_OK)
            } else {
                Err(CliError::DecodeFailed)
            }
        }
        Command::Simulate {
            weight,
            trials,
            seed,
            ke_only,
            timing,
            out,
        } => {
            let l = cli.load()?;
            let sim = l.config.simulation.clone();
            let t = l.setup.code.t();
            let weights = if !weight.is_empty() {
                weight.clone()
            } else {
                sim.as_ref()
                    .and_then(|s| s.weights.clone())
                    .unwrap_or_else(|| (0..=t).collect())
            };
            let trials = trials.or(sim.as_ref().and_then(|s| s.trials)).unwrap_or(100);
            if trials == 0 {
                return Err(CliError::Input("--trials must be at least 1".into()));
            }
            let seed = seed.or(sim.as_ref().and_then(|s| s.seed)).unwrap_or(0);
            let modes: &[Mode] = if *ke_only { &[Mode::Full, Mode::KeOnly] } else { &[Mode::Full] };
            let p = plan(&l.setup)?;
            let report = simulate(&p, &weights, trials, seed, modes, *timing)?;
            match out {
                Some(path) => {
                    write_out(Some(path), &pretty(&report))?;
                    print!("{}", report.table());
                }
                None => {
                    print!("{}", pretty(&report));
                    eprint!("{}", report.table());
                }
            }
            Ok(EXIT_OK)
        }
        Command::ReproduceExample { which, out } => {
            let (json, ok) = if *which == 1 {
                let r = repro::example1()?;
                let ok = r.default_run.decoded && r.reference_run.decoded;
                (pretty(&r), ok)
            } else {
                let r = repro::example2()?;
                let ok = r.default_run.decoded && r.reference_run.decoded;
                (pretty(&r), ok)
            };
            write_out(out.as_deref(), &json)?;
            if out.is_some() {
                println!("wrote {}", out.as_ref().expect("checked").display());
            }
            Ok(if ok { EXIT_OK } else { EXIT_DECODE_FAILURE })
        }
    }
}
