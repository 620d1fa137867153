//! Driver for `gpylab`: argument parsing, dispatch, and report output.

pub mod args;
pub mod commands;
pub mod report;
pub mod seq;

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::error::ErrorKind;
use clap::Parser;
use thiserror::Error;

use args::{Cli, Format};
use report::ExperimentReport;

pub const EXIT_OK: i32 = 0;
/// A completed run whose checks reported a failure (`verify`, check grids).
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_DOMAIN: i32 = 2;
pub const EXIT_CAPACITY: i32 = 3;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_IO: i32 = 74;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] gpy_core::Error),
    #[error("usage: {0}")]
    Usage(String),
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(gpy_core::Error::Domain(_)) => EXIT_DOMAIN,
            CliError::Core(gpy_core::Error::Capacity(_)) => EXIT_CAPACITY,
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

/// One leaf subcommand, the library operations it exposes, and an argument
/// list that exercises it cheaply.
pub struct Route {
    pub path: &'static str,
    pub ops: &'static [&'static str],
    pub example: &'static [&'static str],
}

pub const ROUTES: &[Route] = &[
    Route {
        path: "primes",
        ops: &["sieve_range", "theta_sum", "theta_progression", "ap_error", "ap_error_star"],
        example: &["primes", "--hi", "1e4", "--q", "7", "--a", "3"],
    },
    Route {
        path: "tuple check",
        ops: &["nu_p", "is_admissible", "nu_bar_p", "nu_star_p"],
        example: &["tuple", "check", "--shifts", "0,2,6", "--h2", "0,4", "--h0", "8"],
    },
    Route { path: "tuple discriminant", ops: &["discriminant"], example: &["tuple", "discriminant", "--shifts", "0,2,6"] },
    Route {
        path: "tuple regular",
        ops: &["regular_classes"],
        example: &["tuple", "regular", "--shifts", "0,2,6", "--v", "7", "--list"],
    },
    Route {
        path: "singular value",
        ops: &["singular_series", "singular_series_extended"],
        example: &["singular", "value", "--shifts", "0,2", "--h0", "6", "--cutoff", "1e4"],
    },
    Route {
        path: "singular average",
        ops: &["average_B", "s_star"],
        example: &["singular", "average", "--shifts", "1,2,3,4,5,6,7,8,9,10", "--k", "2", "--cutoff", "1e4"],
    },
    Route {
        path: "singular monotone",
        ops: &["check_monotone"],
        example: &["singular", "monotone", "--shifts", "1,2,3,4,5,6,7,8,9,10", "--k-max", "3", "--cutoff", "1e4"],
    },
    Route {
        path: "singular quasidensity",
        ops: &["quasiprime_density"],
        example: &["singular", "quasidensity", "--shifts", "0,2,6", "--z", "13"],
    },
    Route {
        path: "gpy lambda",
        ops: &["polynomial_value", "lambda_R"],
        example: &["gpy", "lambda", "--shifts", "0,2", "--n", "1e6", "--ell", "1", "--r", "100"],
    },
    Route {
        path: "gpy moment1",
        ops: &["pair_sum_direct", "pair_sum_divisor", "compare"],
        example: &["gpy", "moment1", "--h1", "0,2", "--h2", "0,6", "--ell", "1", "--n", "1e4", "--theta", "0.2", "--v", "5", "--strategy", "both"],
    },
    Route {
        path: "gpy moment2",
        ops: &["pair_sum_theta"],
        example: &["gpy", "moment2", "--h1", "0,2", "--h2", "0,6", "--ell", "1", "--n", "1e4", "--theta", "0.2", "--h0", "8"],
    },
    Route {
        path: "gpy detector",
        ops: &["detector_sum"],
        example: &["gpy", "detector", "--shifts", "2,4,6,8", "--k", "2", "--n", "1e3", "--r", "20"],
    },
    Route {
        path: "combi lemma2",
        ops: &["Z_sum", "Z_closed"],
        example: &["combi", "lemma2", "--d", "3", "--u", "4", "--y", "-2"],
    },
    Route {
        path: "combi coeffs",
        ops: &["coeff_A", "coeff_ratio_check"],
        example: &["combi", "coeffs", "--d", "2", "--u", "2", "--v", "3", "--j", "1", "--nu", "2"],
    },
    Route {
        path: "combi divisor-mean",
        ops: &["divisor_m", "divisor_mean_check"],
        example: &["combi", "divisor-mean", "--x", "1e3", "--m", "3"],
    },
    Route {
        path: "oracle t4",
        ops: &["main_term_t4"],
        example: &["oracle", "t4", "--h1", "0,2", "--h2", "0,6", "--ell1", "1", "--ell2", "1", "--n", "1e7", "--theta", "0.2"],
    },
    Route {
        path: "oracle t5",
        ops: &["main_term_t5"],
        example: &["oracle", "t5", "--h1", "0,2", "--h2", "0,6", "--n", "1e7", "--theta", "0.2", "--h0", "2"],
    },
    Route { path: "oracle g00", ops: &["g00"], example: &["oracle", "g00", "--shifts", "0,2", "--v", "5", "--cutoff", "1e4"] },
    Route {
        path: "oracle wscan",
        ops: &["w_function", "verify_w_bounds"],
        example: &["oracle", "wscan", "--t-max", "10", "--step", "0.5"],
    },
    Route { path: "oracle jprod", ops: &["j_product"], example: &["oracle", "jprod", "--t", "1", "--x", "1e3,1e4"] },
    Route { path: "bv classic", ops: &["bv_sum"], example: &["bv", "classic", "--n", "1e4", "--q", "10"] },
    Route {
        path: "bv restricted",
        ops: &["bv_sum_restricted"],
        example: &["bv", "restricted", "--n", "1e4", "--q", "10", "--m", "6"],
    },
    Route { path: "bv estar", ops: &["estar_aggregate"], example: &["bv", "estar", "--n", "1e4", "--q", "10", "--m", "2"] },
    Route {
        path: "seq generate",
        ops: &["generate_sequence"],
        example: &["seq", "generate", "--kind", "powers-k", "--k", "2", "--n", "1024"],
    },
    Route { path: "verify all", ops: &[], example: &["verify", "all"] },
    Route { path: "verify lemma2", ops: &[], example: &["verify", "lemma2", "--max", "8"] },
];

/// Worker count from GPY_JOBS (preferred) or `--jobs`.
fn configure_jobs(flag: Option<usize>) -> Result<(), CliError> {
    let env = match std::env::var("GPY_JOBS") {
        Ok(s) if !s.trim().is_empty() => Some(
            args::parse_usize(&s).map_err(|e| CliError::Usage(format!("GPY_JOBS: {e}")))?,
        ),
        _ => None,
    };
    match env.or(flag) {
        Some(0) => Err(CliError::Usage("job count must be >= 1".into())),
        Some(1) => {
            gpy_core::par::force_sequential(true);
            Ok(())
        }
        Some(n) => {
            gpy_core::par::force_sequential(false);
            std::env::set_var("RAYON_NUM_THREADS", n.to_string());
            Ok(())
        }
        None => Ok(()),
    }
}

fn series_path(out: &Path) -> PathBuf {
    let p = out.with_extension("csv");
    if p == out {
        let mut s = out.as_os_str().to_owned();
        s.push(".series.csv");
        PathBuf::from(s)
    } else {
        p
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn execute(cli: &Cli) -> Result<i32, CliError> {
    configure_jobs(cli.common.jobs)?;
    let start = Instant::now();
    let outcome = commands::execute(&cli.command, cli.common.seed)?;
    let mut report = ExperimentReport::new(outcome.experiment, outcome.params, outcome.result, cli.common.seed);
    if let Some((e, m, r)) = outcome.comparison {
        report = report.with_comparison(e, m, r);
    }
    if !cli.common.stable {
        report.runtime_seconds = Some(start.elapsed().as_secs_f64());
    }
    let out = cli.common.out.as_deref();
    match cli.common.format {
        Format::Json => {
            emit(out, &report.to_json())?;
            if let (Some(path), Some(series)) = (out, &outcome.series) {
                fs::write(series_path(path), series)?;
            }
        }
        Format::Csv => {
            let text = outcome.series.unwrap_or_else(|| report.to_flat_csv());
            emit(out, &text)?;
        }
    }
    Ok(if outcome.failed { EXIT_CHECK_FAILED } else { EXIT_OK })
}

/// Parse `argv` (program name first), run the command, and return the exit
/// status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("gpylab: {e}");
            e.exit_code()
        }
    }
}
