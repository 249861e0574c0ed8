mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use newform_core::field::prime_power;
use newform_core::report::{Profile, RunConfig};

/// Depth-zero newforms for GL_n over F_q((t)), checked against brute force.
#[derive(Parser, Debug)]
#[command(name = "newform", version)]
struct Cli {
    /// TOML file with RunConfig fields; flags take precedence
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// prime l' used for character values
    #[arg(long, global = true)]
    ell: Option<u64>,
    /// also write <kind>.json (and <kind>.csv for tables) here
    #[arg(long, global = true)]
    output_dir: Option<String>,
    /// print the CSV table instead of the JSON report
    #[arg(long, global = true)]
    csv: bool,
    /// skip the on-disk cache ($NEWFORM_CACHE_DIR or ./.newform-cache)
    #[arg(long, global = true)]
    no_cache: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Character table of GL_n(F_q) with cuspidality flags
    Chartable { n: Option<usize>, q: Option<u64> },
    /// Cuspidal rows with degrees and central characters
    Cuspidals { n: Option<usize>, q: Option<u64> },
    /// dim pi^{K_n(m)} for m up to m_max, every cuspidal row
    Oldforms { n: Option<usize>, q: Option<u64>, m_max: Option<u32> },
    /// f_new at Sigma, the identity and seeded points, against the K(n)-integral
    NewformEval {
        #[command(flatten)]
        rep: RepArgs,
    },
    /// matrix coefficient: closed formula vs finite pairing
    Coeff {
        #[command(flatten)]
        rep: RepArgs,
    },
    /// Whittaker newform (n = 2) from both expressions
    Whittaker {
        #[command(flatten)]
        rep: RepArgs,
        #[arg(long, value_enum, default_value = "identity")]
        at: Point,
    },
    /// Lemma checks for random unramified minimax strata
    MinimaxVerify {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        q: Option<u64>,
        /// odd depth
        #[arg(long, default_value_t = 1)]
        m: u32,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value_t = 5)]
        polys: usize,
    },
    /// Full acceptance suite, run twice; exits nonzero on any failure
    Selftest {
        #[arg(long)]
        profile: Option<Profile>,
        /// comma separated criterion ids 1-9
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
    },
}

#[derive(clap::Args, Debug)]
struct RepArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    q: Option<u64>,
    #[arg(long)]
    samples: Option<usize>,
    /// character table row, default the first cuspidal one
    #[arg(long)]
    row: Option<usize>,
    /// omega_pi(t) as an element of F_l'
    #[arg(long, default_value_t = 2)]
    omega: u64,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Point {
    Identity,
    Support,
    OffSupport,
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            toml::from_str(&text).with_context(|| format!("parsing {}", p.display()))?
        }
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if cli.ell.is_some() {
        cfg.ell = cli.ell;
    }
    if cli.output_dir.is_some() {
        cfg.output_dir = cli.output_dir.clone();
    }
    Ok(cfg)
}

fn set_group(cfg: &mut RunConfig, n: Option<usize>, q: Option<u64>) -> Result<()> {
    if let Some(n) = n {
        cfg.n = n;
    }
    if let Some(q) = q {
        let Some((p, k)) = prime_power(q) else { bail!("q = {q} is not a prime power") };
        cfg.p = p;
        cfg.k = k;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    let mut cfg = load_config(&cli)?;
    let out = commands::Output { csv: cli.csv, use_cache: !cli.no_cache };
    match cli.cmd {
        Cmd::Chartable { n, q } => {
            set_group(&mut cfg, n, q)?;
            commands::chartable(&cfg, &out)
        }
        Cmd::Cuspidals { n, q } => {
            set_group(&mut cfg, n, q)?;
            commands::cuspidals(&cfg, &out)
        }
        Cmd::Oldforms { n, q, m_max } => {
            set_group(&mut cfg, n, q)?;
            if let Some(m) = m_max {
                cfg.m_max = m;
            }
            commands::oldforms(&cfg, &out)
        }
        Cmd::NewformEval { rep } => {
            set_group(&mut cfg, rep.n, rep.q)?;
            cfg.samples = rep.samples.unwrap_or(cfg.samples);
            commands::newform_eval(&cfg, &out, rep.row, rep.omega)
        }
        Cmd::Coeff { rep } => {
            set_group(&mut cfg, rep.n, rep.q)?;
            cfg.samples = rep.samples.unwrap_or(cfg.samples);
            commands::coeff(&cfg, &out, rep.row, rep.omega)
        }
        Cmd::Whittaker { rep, at } => {
            set_group(&mut cfg, rep.n, rep.q)?;
            cfg.samples = rep.samples.unwrap_or(cfg.samples);
            commands::whittaker(&cfg, &out, rep.row, rep.omega, at)
        }
        Cmd::MinimaxVerify { n, q, m, samples, polys } => {
            set_group(&mut cfg, n, q)?;
            cfg.m_min = m;
            cfg.m_max = m;
            cfg.samples = samples.unwrap_or(cfg.samples);
            commands::minimax_verify(&cfg, &out, polys)
        }
        Cmd::Selftest { profile, only } => {
            if let Some(p) = profile {
                cfg.profile = p;
            }
            commands::selftest(&cfg, &out, &only)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
