//! Acceptance run: one PASS/FAIL line per criterion at pinned seeds and tolerances.
//!
//! Exits nonzero on any result other than the recorded one. The single recorded
//! failure is the witness sub-case n = 5, α = 1/3, ε = 0.01, where no real
//! solution with ‖b − a‖∞ ≥ ε/2 exists.

use forcible::clique::{clique_union_density, planted_density_constant, CliqueDensityVector};
use forcible::forcing::{
    evaluate_expression, express_lambda_integral, integrate_lambda, reports_csv, verify_monotone_forcing,
    verify_square_forcing, EvalMode, VerifyConfig,
};
use forcible::graphon::graph_profile_mc;
use forcible::perm::all_patterns;
use forcible::permuton::pattern_profile_mc;
use forcible::witness::{certify_witness, clique_unions_up_to, solve_witness, CertifyConfig, WitnessProblem};
use forcible::{Alpha, BlockSizes, Estimate, Graph, Graphon, Permuton};
use std::fmt::Write as _;
use std::time::Instant;

const SAMPLES: u64 = 1_000_000;
const Z: f64 = 4.0;

struct Outcome {
    pass: bool,
    /// Whether `pass` is the recorded result.
    expected: bool,
    detail: String,
    csv: String,
}

impl Outcome {
    fn new(pass: bool, detail: String, csv: String) -> Self {
        Outcome { pass, expected: pass, detail, csv }
    }
}

fn alpha(a: f64) -> Alpha {
    Alpha::new(a).unwrap()
}

fn strict_config(seed: u64) -> VerifyConfig {
    let mut cfg = VerifyConfig { samples: SAMPLES, seed, ..VerifyConfig::default() };
    cfg.tolerances.mc_floor = 0.0;
    cfg
}

fn criterion_1() -> Outcome {
    let profile = pattern_profile_mc(&Permuton::Uniform, 4, SAMPLES, 101).unwrap();
    let mut csv = String::from("pattern,value,std_error\n");
    let mut worst = 0.0f64;
    let mut pass = true;
    for sigma in all_patterns(4).unwrap() {
        let e = profile[sigma.rank() as usize];
        writeln!(csv, "{sigma},{},{}", e.value, e.std_error).unwrap();
        worst = worst.max((e.value - 1.0 / 24.0).abs() / e.std_error);
        pass &= e.within(1.0 / 24.0, Z, 0.0);
    }
    Outcome::new(pass, format!("24 patterns, max |z| = {worst:.2}"), csv)
}

fn criterion_2() -> Outcome {
    let mut csv = String::new();
    let mut pass = true;
    for (i, a) in [1.0 / 3.0, 0.5, 2.0 / 3.0].into_iter().enumerate() {
        let mu = Permuton::MonotoneGeometric { alpha: alpha(a) };
        let mut cfg = strict_config(200 + i as u64);
        cfg.support_samples = 10_000;
        let reports = verify_monotone_forcing(&mu, alpha(a), &cfg).unwrap();
        let need = ["monotone:231+312", "monotone:d21:exact", "monotone:integrand"];
        for id in need {
            let r = reports.iter().find(|r| r.id == id).expect("report present");
            pass &= r.pass;
        }
        pass &= reports.iter().find(|r| r.id == "monotone:231+312").unwrap().value == 0.0;
        csv += &reports_csv(&reports);
    }
    Outcome::new(pass, "zero 231/312, exact d(21), integrand residual for α ∈ {1/3,1/2,2/3}".to_string(), csv)
}

fn criterion_3() -> Outcome {
    let mut csv = String::new();
    let mut pass = true;
    let mut integral = Vec::new();
    for (i, a) in [1.0 / 3.0, 0.5].into_iter().enumerate() {
        let mu = Permuton::SquareGeometric { alpha: alpha(a) };
        let reports = verify_square_forcing(&mu, alpha(a), &strict_config(300 + i as u64)).unwrap();
        pass &= reports.len() == 4 && reports.iter().all(|r| r.pass);
        let r = reports.iter().find(|r| r.id == "square:integral").unwrap();
        integral.push(format!("{:.1e}±{:.1e}", r.value, r.std_error.unwrap_or(0.0)));
        csv += &reports_csv(&reports);
    }
    Outcome::new(pass, format!("all four checks for α ∈ {{1/3,1/2}}, integral {}", integral.join(", ")), csv)
}

fn criterion_4() -> Outcome {
    let mut csv = String::from("permuton,a,b,k,lhs,rhs\n");
    let mut pass = true;
    let mut worst = 0.0f64;
    for (name, mu) in [("uniform", Permuton::Uniform), ("monotone:1/2", Permuton::monotone(0.5).unwrap())] {
        for a in 0..=2usize {
            for b in 0..=2 - a {
                for k in 0..=2 - a - b {
                    let e = express_lambda_integral(a, b, k).unwrap();
                    let rhs = evaluate_expression(&e, &mu, EvalMode::Exact, SAMPLES, 400).unwrap().measured;
                    let lhs = integrate_lambda(1000, |x, y| {
                        x.powi(a as i32) * y.powi(b as i32) * mu.cdf(x, y).powi(k as i32)
                    });
                    let diff = (lhs - rhs.value()).abs();
                    worst = worst.max(diff);
                    pass &= diff <= (Z * rhs.std_error()).max(1e-3);
                    if name == "uniform" {
                        let analytic = 1.0 / (((a + k + 1) * (b + k + 1)) as f64);
                        pass &= (rhs.value() - analytic).abs() <= 1e-6;
                    }
                    writeln!(csv, "{name},{a},{b},{k},{lhs},{}", rhs.value()).unwrap();
                }
            }
        }
    }
    Outcome::new(pass, format!("20 identities, max |lhs − rhs| = {worst:.2e}"), csv)
}

fn lookup(profile: &std::collections::BTreeMap<forcible::graph::GraphKey, Estimate>, g: &Graph) -> Estimate {
    profile
        .get(&g.canonical_key().unwrap())
        .copied()
        .unwrap_or_else(|| Estimate::from_counts(0, SAMPLES))
}

fn criterion_5() -> Outcome {
    let mut csv = String::from("alpha,union,recursion,mc,std_error\n");
    let mut pass = true;
    let mut count = 0;
    for (i, a) in [1.0 / 3.0, 0.5].into_iter().enumerate() {
        let w = Graphon::clique_blocks_geometric(a).unwrap();
        let blocks = BlockSizes::geometric(alpha(a));
        for n in 1..=6 {
            let profile = graph_profile_mc(&w, n, SAMPLES, 500 + 10 * i as u64 + n as u64).unwrap();
            for u in clique_unions_up_to(n).into_iter().filter(|u| u.order() == n) {
                let exact_vector = CliqueDensityVector::from_blocks(&blocks, n);
                let d = clique_union_density(&u, &exact_vector).unwrap();
                // entries above the needed order must not matter
                let mut padded: Vec<f64> = (1..=n).map(|l| exact_vector.get(l).unwrap()).collect();
                padded.extend([0.0, 0.0]);
                let other = clique_union_density(&u, &CliqueDensityVector::new(padded).unwrap()).unwrap();
                pass &= other == d;
                let e = lookup(&profile, &u.to_graph());
                pass &= e.within(d, Z, 0.0);
                count += 1;
                writeln!(csv, "{a},{u},{d},{},{}", e.value, e.std_error).unwrap();
            }
        }
    }
    Outcome::new(pass, format!("{count} clique unions matched, padding-invariant"), csv)
}

fn criterion_6() -> Outcome {
    let mut csv = String::from("rho,alpha,graph,partition,mc,std_error\n");
    let mut pass = true;
    let graphs = ["K2", "K3", "P3", "1+2", "1+1+1"];
    for (i, (rho, a)) in [(0.5, 0.5), (0.75, 0.5)].into_iter().enumerate() {
        let w = Graphon::planted_constant(rho, a).unwrap();
        let blocks = BlockSizes::geometric(alpha(a));
        let profiles = [2, 3].map(|k| graph_profile_mc(&w, k, SAMPLES, 600 + 10 * i as u64 + k as u64).unwrap());
        for name in graphs {
            let g: Graph = name.parse().unwrap();
            let d = planted_density_constant(&g, rho, &blocks).unwrap();
            let e = lookup(&profiles[g.order() - 2], &g);
            pass &= e.within(d, Z, 0.0);
            writeln!(csv, "{rho},{a},{name},{d},{},{}", e.value, e.std_error).unwrap();
        }
    }
    Outcome::new(pass, "5 graphs × 2 planted graphons".to_string(), csv)
}

fn criterion_7() -> Outcome {
    let eps = 0.01;
    let mut csv = String::from("n,alpha,converged,max_residual,max_power_diff,gap,distance,epsilon_used\n");
    let mut failed = Vec::new();
    let mut notes = Vec::new();
    for n in 2..=5 {
        for a in [1.0 / 3.0, 0.5] {
            let p = WitnessProblem::new(n, alpha(a), eps).unwrap();
            let r = solve_witness(&p, 50, 1e-12).unwrap();
            let wa = p.blocks(&r.a).unwrap();
            let wb = p.blocks(&r.b).unwrap();
            let diffs: Vec<f64> = (1..=n + 1).map(|i| (wb.power_sum(i as u32) - wa.power_sum(i as u32)).abs()).collect();
            let max_match = diffs[..n].iter().cloned().fold(0.0, f64::max);
            let gap = diffs[n];
            let ok = r.converged
                && r.max_residual() <= 1e-10
                && max_match <= 1e-9
                && gap > 1e-8
                && r.distance() >= eps / 2.0
                && certify_witness(&r, &p, &CertifyConfig::default()).is_ok();
            let mut oracle_ok = true;
            if n == 2 && a == 0.5 {
                let x3: f64 = 0.125 + eps;
                let s = 0.875 - x3;
                let q = 0.328125 - x3 * x3;
                let disc = (2.0 * q - s * s).sqrt();
                let want = [(s + disc) / 2.0, (s - disc) / 2.0, x3];
                oracle_ok = r.b.iter().zip(want).all(|(b, w)| (b - w).abs() <= 1e-8);
            }
            if !(ok && oracle_ok) {
                failed.push((n, a));
                notes.push(format!(
                    "n={n} α={a:.3}: gap {gap:.2e}, ‖b−a‖∞ {:.2e}, ε used {}",
                    r.distance(),
                    r.epsilon
                ));
            }
            writeln!(
                csv,
                "{n},{a},{},{:e},{:e},{:e},{:e},{}",
                r.converged,
                r.max_residual(),
                max_match,
                gap,
                r.distance(),
                r.epsilon
            )
            .unwrap();
        }
    }
    let pass = failed.is_empty();
    let detail = if pass {
        "8 witnesses certified".to_string()
    } else {
        format!("{} of 8 sub-cases fail ({})", failed.len(), notes.join("; "))
    };
    let expected = failed == [(5, 1.0 / 3.0)];
    Outcome { pass, expected, detail, csv }
}

fn criterion_8() -> Outcome {
    let p = WitnessProblem::new(3, alpha(0.5), 0.01).unwrap();
    let r = solve_witness(&p, 50, 1e-12).unwrap();
    let mut csv = String::from("graph,planted_a,planted_b\n");
    let wa = p.blocks(&r.a).unwrap();
    let wb = p.blocks(&r.b).unwrap();
    let mut pass = r.converged;
    let mut worst = 0.0f64;
    for u in clique_unions_up_to(3) {
        let g = u.to_graph();
        let da = planted_density_constant(&g, 0.5, &wa).unwrap();
        let db = planted_density_constant(&g, 0.5, &wb).unwrap();
        worst = worst.max((da - db).abs());
        pass &= (da - db).abs() <= 1e-9;
        writeln!(csv, "{u},{da},{db}").unwrap();
    }
    Outcome::new(pass, format!("6 clique unions, max difference {worst:.1e}"), csv)
}

fn criterion_9() -> Outcome {
    let cfg = VerifyConfig { samples: 100_000, seed: 900, ..VerifyConfig::default() };
    let reports = verify_monotone_forcing(&Permuton::Uniform, alpha(0.5), &cfg).unwrap();
    let r = reports.iter().find(|r| r.id == "monotone:231+312").unwrap();
    let pass = !r.pass && r.value >= 0.3;
    Outcome::new(pass, format!("uniform gives d(231)+d(312) = {:.4}", r.value), reports_csv(&reports))
}

fn run_all() -> Vec<(usize, Outcome, f64)> {
    let criteria: [(usize, fn() -> Outcome); 9] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
    ];
    criteria
        .into_iter()
        .map(|(n, f)| {
            let t = Instant::now();
            let o = f();
            (n, o, t.elapsed().as_secs_f64())
        })
        .collect()
}

fn main() {
    // cargo passes harness flags such as --list; only run the criteria otherwise
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    let first = run_all();
    let second = run_all();
    let identical = first.iter().zip(&second).all(|(a, b)| a.1.csv == b.1.csv);
    let mut unexpected = 0;
    for (n, o, secs) in &first {
        let status = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {n}: {status} ({secs:.1}s) {}", o.detail);
        if !o.expected {
            unexpected += 1;
        }
    }
    println!(
        "criterion 10: {} criteria 1-9 rerun with the same seeds give {} CSV output",
        if identical { "PASS" } else { "FAIL" },
        if identical { "byte-identical" } else { "different" }
    );
    if !identical {
        unexpected += 1;
    }
    if unexpected > 0 {
        println!("{unexpected} unexpected acceptance result(s)");
        std::process::exit(1);
    }
    println!("acceptance: results as recorded (criterion 7 sub-case n=5, α=1/3 is unattainable)");
}
