//! `voronoi`: builds the Voronoi complex for SL_N(Z), checks it, and
//! certifies cohomology dimensions with exact arithmetic.
//!
//! Exit codes: 0 success, 1 certification mismatch, 2 usage or input
//! error, 3 invariant failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;
use voronoi_core::complex::CellComplex;
use voronoi_core::engine::{CohomologyCertificate, Engine};
use voronoi_core::groupring::laplacian_prime;
use voronoi_core::reps::coefficient_rep;
use voronoi_core::Error;

const EXIT_MISMATCH: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_INVARIANT: u8 = 3;

/// Expected coranks checked by `reproduce`: (N, corank).
const HEADLINE: [(usize, usize); 1] = [(3, 4)];
const EXTENDED: [(usize, usize); 1] = [(4, 2)];

#[derive(Parser)]
#[command(name = "voronoi", version, about = "Exact cohomology of SL_N(Z) from the Voronoi complex")]
struct Cli {
    /// Worker threads for the parallel stages (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Directory for cached complexes and Laplacians.
    #[arg(long, global = true, env = "VORONOI_CACHE_DIR")]
    cache_dir: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the cell complex and write it as JSON.
    Build {
        #[arg(long, value_parser = clap::value_parser!(u8).range(2..=4))]
        n: u8,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run every structural check on the complex and the representation.
    Verify {
        #[arg(long, value_parser = clap::value_parser!(u8).range(2..=4))]
        n: u8,
    },
    /// Write the modified Laplacian of one degree as JSON.
    Laplacian {
        #[arg(long, value_parser = clap::value_parser!(u8).range(2..=4))]
        n: u8,
        #[arg(long)]
        degree: usize,
        /// Read the complex from this file instead of building it.
        #[arg(long)]
        complex: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the coefficient representation as JSON.
    Rep {
        #[arg(long, value_parser = clap::value_parser!(u8).range(2..=4))]
        n: u8,
        /// Only emit the first LIMIT group elements.
        #[arg(long)]
        limit: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute the certified corank of the Laplacian.
    Certify {
        #[arg(long, value_parser = clap::value_parser!(u8).range(2..=4))]
        n: u8,
        /// Degree of the Laplacian (default N(N-1)/2).
        #[arg(long)]
        degree: Option<usize>,
        /// Exit with status 1 unless the corank equals this value.
        #[arg(long)]
        expect: Option<usize>,
        /// Print the certificate as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Recompute the headline coranks and compare with the expected values.
    Reproduce {
        /// Include N = 4.
        #[arg(long)]
        extended: bool,
    },
}

enum Failure {
    Mismatch(String),
    Usage(String),
    Invariant(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Invariant { .. } | Error::Data(_) => Failure::Invariant(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if threads == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(EXIT_USAGE);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    }
    let engine = Engine::new(cli.cache_dir);
    match run(&engine, cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Mismatch(msg)) => {
            eprintln!("mismatch: {msg}");
            ExitCode::from(EXIT_MISMATCH)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Invariant(msg)) => {
            eprintln!("invariant failure: {msg}");
            ExitCode::from(EXIT_INVARIANT)
        }
    }
}

fn run(engine: &Engine, command: Command) -> Result<(), Failure> {
    match command {
        Command::Build { n, out } => {
            let c = engine.complex(n.into())?;
            write_json(&out, &c)?;
            let counts: Vec<String> = c.orbit_counts().iter().map(|(d, k)| format!("{d}:{k}")).collect();
            println!("N={n} orbits by degree {{{}}} -> {}", counts.join(", "), out.display());
        }
        Command::Verify { n } => {
            let report = engine.verify_all(n.into())?;
            for check in &report.checks {
                let status = if check.passed { "ok  " } else { "FAIL" };
                println!("{status} {}: {}", check.name, check.detail);
            }
            if let Some(failed) = report.first_failure() {
                return Err(Failure::Invariant(format!("check `{}` failed", failed.name)));
            }
        }
        Command::Laplacian { n, degree, complex, out } => {
            let matrix = match complex {
                Some(path) => {
                    let c = read_complex(&path)?;
                    if c.rank() != usize::from(n) {
                        return Err(Failure::Usage(format!("{} holds a complex for N={}", path.display(), c.rank())));
                    }
                    if c.orbits(degree).is_empty() {
                        return Err(Failure::Usage(format!("no interior cells in degree {degree} for N = {n}")));
                    }
                    laplacian_prime(&c, degree)?
                }
                None => engine.laplacian_prime(n.into(), degree)?,
            };
            emit(out.as_deref(), &matrix)?;
        }
        Command::Rep { n, limit, out } => {
            let (table, rep) = coefficient_rep(n.into())?;
            emit(out.as_deref(), &rep.to_record(&table, limit))?;
        }
        Command::Certify { n, degree, expect, json } => {
            let cert = match degree {
                Some(d) => engine.certify_degree(n.into(), d)?,
                None => engine.certify(n.into())?,
            };
            if json {
                println!("{}", serde_json::to_string_pretty(&cert)?);
            } else {
                print_certificate(&cert);
            }
            if let Some(expected) = expect {
                if cert.corank != expected {
                    return Err(Failure::Mismatch(format!("corank {} but expected {expected}", cert.corank)));
                }
            }
        }
        Command::Reproduce { extended } => {
            let targets: Vec<(usize, usize)> =
                HEADLINE.iter().chain(if extended { EXTENDED.iter() } else { [].iter() }).copied().collect();
            let mut mismatches = Vec::new();
            for (n, expected) in targets {
                let report = engine.verify_all(n)?;
                if let Some(failed) = report.first_failure() {
                    return Err(Failure::Invariant(format!("N={n}: check `{}` failed: {}", failed.name, failed.detail)));
                }
                println!("N={n}: {} structural checks passed", report.checks.len());
                let cert = engine.certify(n)?;
                print_certificate(&cert);
                let verdict = if cert.corank == expected { "PASS" } else { "FAIL" };
                println!("{verdict} N={n}: corank {} (expected {expected})", cert.corank);
                if cert.corank != expected {
                    mismatches.push(n);
                }
            }
            if !mismatches.is_empty() {
                return Err(Failure::Mismatch(format!("corank differs from the expected value for N in {mismatches:?}")));
            }
        }
    }
    Ok(())
}

fn print_certificate(cert: &CohomologyCertificate) {
    println!("{}", cert.statement());
    println!(
        "  {}x{} matrix, rank {}, corank {} ({:?}, p={}), stacked-operator corank {}, {} ms",
        cert.matrix_size,
        cert.matrix_size,
        cert.matrix_rank,
        cert.corank,
        cert.method,
        cert.prime,
        cert.cross_check_corank,
        cert.wall_clock_ms
    );
}

fn read_complex(path: &Path) -> Result<CellComplex, Failure> {
    let bytes = fs::read(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    Ok(serde_json::from_slice(&bytes)?)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Failure> {
    let bytes = serde_json::to_vec(value)?;
    fs::write(path, bytes).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn emit<T: Serialize>(out: Option<&Path>, value: &T) -> Result<(), Failure> {
    match out {
        Some(path) => write_json(path, value),
        None => {
            println!("{}", serde_json::to_string(value)?);
            Ok(())
        }
    }
}
