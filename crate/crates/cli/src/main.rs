mod descriptor;

use clap::{Parser, Subcommand, ValueEnum};
use descriptor::{parse_alpha, parse_object, parse_permuton, parse_real, Object};
use forcible::clique::{clique_union_density, planted_density_constant, constant_density, CliqueDensityVector, CliqueUnion};
use forcible::forcing::{reports_csv, verify_monotone_forcing, verify_square_forcing, VerifyConfig};
use forcible::graph::graphs_of_order;
use forcible::graphon::{density_mc as graph_density_mc, density_quadrature_refined};
use forcible::heatmap::{graphon_heatmap, permuton_heatmap};
use forcible::perm::all_patterns;
use forcible::permuton::{density_exact, pattern_profile_mc};
use forcible::witness::{certify_witness, solve_witness, CertifyConfig, WitnessProblem};
use forcible::{Error, Graph, Graphon, Permutation, Permuton};
use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "forcible", version, about = "Densities, forcing checks and witnesses for permutons and graphons")]
struct Cli {
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Monte Carlo budget.
    #[arg(long, global = true, default_value_t = 1_000_000, value_parser = clap::value_parser!(u64).range(1..))]
    samples: u64,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Pattern or subgraph densities as CSV.
    Density {
        /// Permuton or graphon descriptor.
        object: String,
        /// Permutation patterns, e.g. 231.
        #[arg(long = "pattern")]
        patterns: Vec<String>,
        /// Graphs, e.g. K3, 2+1 or "3; 1-2,2-3".
        #[arg(long = "graph")]
        graphs: Vec<String>,
        /// Tabulate all patterns or graphs of this order when none are named.
        #[arg(long, default_value_t = 3)]
        order: usize,
        /// Use closed forms where available.
        #[arg(long)]
        exact: bool,
        /// Quadrature grid for exact step-graphon densities.
        #[arg(long, default_value_t = 64)]
        grid: usize,
    },
    /// Check a permuton against a forcing constraint system.
    Verify {
        family: Family,
        #[arg(long)]
        alpha: String,
        /// Candidate permuton; defaults to the family member itself.
        #[arg(long)]
        candidate: Option<String>,
        /// Tolerance for exact and pointwise checks.
        #[arg(long)]
        tol: Option<f64>,
        /// Standard errors allowed for Monte Carlo checks.
        #[arg(long, default_value_t = 4.0)]
        z: f64,
    },
    /// Construct and certify a non-forcibility witness.
    Witness {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        alpha: String,
        #[arg(long, default_value = "0.01")]
        epsilon: String,
        /// Base edge density for the planted transfer check.
        #[arg(long, default_value = "0.5")]
        rho: String,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long, default_value_t = 100)]
        max_iter: usize,
    },
    /// Render a grayscale heatmap (plain PGM).
    Heatmap {
        object: String,
        #[arg(long, default_value_t = 256)]
        resolution: usize,
        /// Latent points for sampled renders.
        #[arg(long = "points", default_value_t = 2000)]
        points: usize,
    },
    /// Draw one random permutation or graph.
    Sample {
        object: String,
        #[arg(long)]
        n: usize,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Family {
    Monotone,
    Square,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Singular(_) => EXIT_NUMERIC,
            Error::CertificationFailed { .. } => EXIT_FAIL,
            _ => EXIT_USAGE,
        };
        Failure { code, message: e.to_string() }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_USAGE, message: message.into() }
}

type Outcome = std::result::Result<(String, u8), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = cli.out.clone();
    match run(cli) {
        Ok((text, code)) => {
            let written = match &out {
                Some(path) => std::fs::write(path, &text).map_err(|e| e.to_string()),
                None => {
                    print!("{text}");
                    Ok(())
                }
            };
            if let Err(e) = written {
                eprintln!("error: cannot write output: {e}");
                return ExitCode::from(EXIT_USAGE);
            }
            ExitCode::from(code)
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Density { ref object, ref patterns, ref graphs, order, exact, grid } => {
            match parse_object(object)? {
                Object::Permuton(mu) => permuton_density(&mu, patterns, order, exact, &cli),
                Object::Graphon(w) => graphon_density(&w, graphs, order, exact, grid, &cli),
            }
        }
        Command::Verify { family, ref alpha, ref candidate, tol, z } => {
            let a = parse_alpha(alpha)?;
            let mu = match (candidate, family) {
                (Some(c), _) => parse_permuton(c)?,
                (None, Family::Monotone) => Permuton::MonotoneGeometric { alpha: a },
                (None, Family::Square) => Permuton::SquareGeometric { alpha: a },
            };
            let mut cfg = VerifyConfig { samples: cli.samples, seed: cli.seed, ..VerifyConfig::default() };
            cfg.tolerances.z = z;
            if let Some(t) = tol {
                cfg.tolerances.exact = t;
                cfg.tolerances.residual = t;
            }
            let reports = match family {
                Family::Monotone => verify_monotone_forcing(&mu, a, &cfg)?,
                Family::Square => verify_square_forcing(&mu, a, &cfg)?,
            };
            let code = if reports.iter().all(|r| r.pass) { 0 } else { EXIT_FAIL };
            Ok((reports_csv(&reports), code))
        }
        Command::Witness { n, ref alpha, ref epsilon, ref rho, tol, max_iter } => {
            let eps = parse_real(epsilon)?;
            if eps == 0.0 {
                return Err(usage("epsilon = 0 gives the degenerate witness b = a"));
            }
            let p = WitnessProblem::new(n, parse_alpha(alpha)?, eps)?;
            let r = solve_witness(&p, max_iter, tol)?;
            let mut text = r.to_csv();
            writeln!(text).ok();
            writeln!(text, "# converged = {}", r.converged).ok();
            writeln!(text, "# iterations = {}", r.iterations).ok();
            writeln!(text, "# epsilon = {} (halvings = {})", r.epsilon, r.halvings).ok();
            writeln!(text, "# max_residual = {:.3e}", r.max_residual()).ok();
            if !r.converged {
                writeln!(text, "# certification = not attempted").ok();
                return Ok((text, EXIT_NUMERIC));
            }
            let cfg = CertifyConfig { rho: parse_real(rho)?, ..CertifyConfig::default() };
            match certify_witness(&r, &p, &cfg) {
                Ok(c) => {
                    writeln!(text, "# certification = pass").ok();
                    for line in c.to_text().lines() {
                        writeln!(text, "# {line}").ok();
                    }
                    Ok((text, 0))
                }
                Err(e @ Error::CertificationFailed { .. }) => {
                    writeln!(text, "# certification = fail: {e}").ok();
                    Ok((text, EXIT_FAIL))
                }
                Err(e) => Err(e.into()),
            }
        }
        Command::Heatmap { ref object, resolution, points } => {
            let comment = format!(
                "forcible heatmap object={object} resolution={resolution} points={points} seed={}",
                cli.seed
            );
            let map = match parse_object(object)? {
                Object::Permuton(mu) => permuton_heatmap(&mu, resolution)?,
                Object::Graphon(w) => graphon_heatmap(&w, resolution, points, cli.seed)?,
            };
            Ok((map.to_p2(&comment), 0))
        }
        Command::Sample { ref object, n } => match parse_object(object)? {
            Object::Permuton(mu) => Ok((format!("{}\n", mu.sample_permutation(n, cli.seed)?), 0)),
            Object::Graphon(w) => Ok((format!("{}\n", w.sample_graph(n, cli.seed)), 0)),
        },
    }
}

const EXACT_TAIL: f64 = 1e-15;

fn permuton_density(mu: &Permuton, patterns: &[String], order: usize, exact: bool, cli: &Cli) -> Outcome {
    let patterns: Vec<Permutation> = if patterns.is_empty() {
        all_patterns(order)?
    } else {
        patterns.iter().map(|p| p.parse()).collect::<forcible::Result<_>>()?
    };
    let mut text = String::from("pattern,value,std_error,mode\n");
    let mut profiles = std::collections::BTreeMap::new();
    for sigma in &patterns {
        if exact {
            if let Ok(v) = density_exact(mu, sigma, EXACT_TAIL) {
                writeln!(text, "{sigma},{v},0,exact").ok();
                continue;
            }
        }
        let k = sigma.len();
        let profile = match profiles.entry(k) {
            std::collections::btree_map::Entry::Occupied(e) => e.into_mut(),
            std::collections::btree_map::Entry::Vacant(e) => e.insert(pattern_profile_mc(mu, k, cli.samples, cli.seed)?),
        };
        let e = profile[sigma.rank() as usize];
        writeln!(text, "{sigma},{},{},mc", e.value, e.std_error).ok();
    }
    Ok((text, 0))
}

fn graphon_exact(h: &Graph, w: &Graphon, grid: usize) -> Option<f64> {
    match w {
        Graphon::Constant { rho } => Some(constant_density(h, rho.get())),
        Graphon::CliqueBlocks { blocks } => match CliqueUnion::from_graph(h) {
            Some(u) => {
                let v = CliqueDensityVector::from_blocks(blocks, u.order());
                clique_union_density(&u, &v).ok()
            }
            None => Some(0.0),
        },
        Graphon::Planted { base, blocks } => match **base {
            Graphon::Constant { rho } => planted_density_constant(h, rho.get(), blocks).ok(),
            _ => None,
        },
        Graphon::Step(_) => density_quadrature_refined(h, w, grid, 1e-9, grid * 16).ok().map(|q| q.value),
        Graphon::PermutonInduced { .. } => None,
    }
}

fn graphon_density(w: &Graphon, graphs: &[String], order: usize, exact: bool, grid: usize, cli: &Cli) -> Outcome {
    let graphs: Vec<Graph> = if graphs.is_empty() {
        graphs_of_order(order)?
    } else {
        graphs.iter().map(|g| g.parse()).collect::<forcible::Result<_>>()?
    };
    let mut text = String::from("graph,value,std_error,mode\n");
    for h in &graphs {
        if exact {
            if let Some(v) = graphon_exact(h, w, grid) {
                writeln!(text, "\"{h}\",{v},0,exact").ok();
                continue;
            }
        }
        let e = graph_density_mc(h, w, cli.samples, cli.seed)?;
        writeln!(text, "\"{h}\",{},{},mc", e.value, e.std_error).ok();
    }
    Ok((text, 0))
}
