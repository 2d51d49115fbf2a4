use approx::assert_abs_diff_eq;
use forcible::perm::all_patterns;
use forcible::permuton::{density_exact_diagonal, density_mc, pattern_profile_mc, StepMatrix};
use forcible::{Alpha, Permutation, Permuton};
use proptest::prelude::*;

fn family() -> Vec<Permuton> {
    vec![
        Permuton::Uniform,
        Permuton::increasing(),
        Permuton::decreasing(),
        Permuton::monotone(0.5).unwrap(),
        Permuton::monotone(1.0 / 3.0).unwrap(),
        Permuton::square(0.5).unwrap(),
        Permuton::square(2.0 / 3.0).unwrap(),
        Permuton::StepMatrix(StepMatrix::three_block_example()),
    ]
}

/// Finest direct-sum decomposition: block sizes of `sigma`.
fn sum_components(sigma: &Permutation) -> Vec<usize> {
    let v = sigma.zero_based();
    let mut sizes = Vec::new();
    let (mut max, mut start) = (0u32, 0usize);
    for (i, &x) in v.iter().enumerate() {
        max = max.max(x);
        if max as usize == i {
            sizes.push(i + 1 - start);
            start = i + 1;
        }
    }
    sizes
}

fn is_decreasing(v: &[u32]) -> bool {
    v.windows(2).all(|w| w[0] > w[1])
}

/// Σ over block indices j₁ < … < j_r of ∏ a_{j_l}^{m_l} for geometric sizes, summed in closed form.
fn ordered_block_sum(alpha: f64, m: &[usize]) -> f64 {
    let k: usize = m.iter().sum();
    let mut result = (1.0 - alpha).powi(k as i32);
    let mut t = k;
    for (l, &ml) in m.iter().enumerate() {
        let at = alpha.powi(t as i32);
        result *= if l == 0 { 1.0 } else { at } / (1.0 - at);
        t -= ml;
    }
    result
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// Exact diagonal density from the coarsenings of the finest direct-sum decomposition.
fn diagonal_oracle(sigma: &Permutation, alpha: f64, square: bool) -> f64 {
    let comps = sum_components(sigma);
    let v = sigma.zero_based();
    let r = comps.len();
    let k = sigma.len();
    let mut total = 0.0;
    for mask in 0u32..1 << (r - 1) {
        // bit i set: cut after component i
        let mut groups = Vec::new();
        let (mut size, mut start) = (0, 0);
        for (i, c) in comps.iter().enumerate() {
            size += c;
            if i == r - 1 || mask >> i & 1 == 1 {
                groups.push((start, size));
                start += size;
                size = 0;
            }
        }
        let within: f64 = if square {
            groups.iter().map(|&(_, m)| 1.0 / factorial(m)).product()
        } else if groups.iter().all(|&(s, m)| is_decreasing(&v[s..s + m])) {
            1.0
        } else {
            0.0
        };
        let sizes: Vec<usize> = groups.iter().map(|&(_, m)| m).collect();
        let multinomial = factorial(k) / sizes.iter().map(|&m| factorial(m)).product::<f64>();
        total += multinomial * within * ordered_block_sum(alpha, &sizes);
    }
    total
}

#[test]
fn exact_diagonal_matches_series_oracle() {
    for alpha in [1.0 / 3.0, 0.5, 2.0 / 3.0] {
        for k in 1..=5 {
            for sigma in all_patterns(k).unwrap() {
                for (mu, square) in [(Permuton::monotone(alpha).unwrap(), false), (Permuton::square(alpha).unwrap(), true)] {
                    let got = density_exact_diagonal(&mu, &sigma, 1e-15).unwrap();
                    let want = diagonal_oracle(&sigma, alpha, square);
                    assert_abs_diff_eq!(got, want, epsilon = 1e-12);
                }
            }
        }
    }
}

#[test]
fn exact_inversion_densities() {
    for alpha in [1.0 / 3.0, 0.5, 2.0 / 3.0] {
        let inv: Permutation = "21".parse().unwrap();
        let m = density_exact_diagonal(&Permuton::monotone(alpha).unwrap(), &inv, 1e-15).unwrap();
        let s = density_exact_diagonal(&Permuton::square(alpha).unwrap(), &inv, 1e-15).unwrap();
        assert_abs_diff_eq!(m, (1.0 - alpha) / (1.0 + alpha), epsilon = 1e-12);
        assert_abs_diff_eq!(s, (1.0 - alpha) / (2.0 * (1.0 + alpha)), epsilon = 1e-12);
    }
}

#[test]
fn monte_carlo_agrees_with_exact_on_s3() {
    for (i, alpha) in [1.0 / 3.0, 0.5, 2.0 / 3.0].into_iter().enumerate() {
        for mu in [Permuton::monotone(alpha).unwrap(), Permuton::square(alpha).unwrap()] {
            let profile = pattern_profile_mc(&mu, 3, 200_000, 11 + i as u64).unwrap();
            for sigma in all_patterns(3).unwrap() {
                let exact = density_exact_diagonal(&mu, &sigma, 1e-15).unwrap();
                let e = profile[sigma.rank() as usize];
                assert!(e.within(exact, 4.0, 1e-9), "{sigma} under {mu:?}: {} vs {exact}", e.value);
            }
        }
    }
}

#[test]
fn increasing_and_decreasing_are_deterministic() {
    let p = density_mc(&Permuton::increasing(), &"123".parse().unwrap(), 10_000, 0).unwrap();
    assert_eq!(p.value, 1.0);
    let p = density_mc(&Permuton::decreasing(), &"123".parse().unwrap(), 10_000, 0).unwrap();
    assert_eq!(p.value, 0.0);
}

#[test]
fn uniform_marginals() {
    for mu in family() {
        assert!(mu.marginal_defect(200) < 1e-9, "{mu:?}");
    }
}

#[test]
fn serde_round_trip() {
    for mu in family() {
        let s = serde_json::to_string(&mu).unwrap();
        assert_eq!(serde_json::from_str::<Permuton>(&s).unwrap(), mu);
    }
    let bad = r#"{"form": "monotone_geometric", "alpha": 1.5}"#;
    assert!(serde_json::from_str::<Permuton>(bad).is_err());
}

proptest! {
    #[test]
    fn cdf_is_a_distribution_function(
        idx in 0usize..8,
        x0 in 0.0f64..1.0, dx in 0.0f64..1.0,
        y0 in 0.0f64..1.0, dy in 0.0f64..1.0,
    ) {
        let mu = &family()[idx];
        let (x1, y1) = ((x0 + dx).min(1.0), (y0 + dy).min(1.0));
        prop_assert!(mu.rect_mass(x0, x1, y0, y1) >= -1e-12);
        prop_assert!((mu.cdf(x0, 1.0) - x0).abs() < 1e-9);
        prop_assert!((mu.cdf(1.0, y0) - y0).abs() < 1e-9);
        let f = mu.cdf(x0, y0);
        prop_assert!(f <= x0.min(y0) + 1e-12 && f >= (x0 + y0 - 1.0).max(0.0) - 1e-12);
    }

    #[test]
    fn quadrant_flags_partition_unity(idx in 0usize..8, x in 0.0f64..=1.0, y in 0.0f64..=1.0) {
        let q = family()[idx].quadrant_flags(x, y);
        prop_assert!((q.sw + q.nw + q.se + q.ne - 1.0).abs() < 1e-12);
        for v in [q.sw, q.nw, q.se, q.ne] {
            prop_assert!(v >= -1e-12);
        }
    }

    #[test]
    fn samples_lie_in_the_unit_square(idx in 0usize..8, seed in any::<u64>()) {
        for p in family()[idx].sample(50, seed) {
            prop_assert!((0.0..=1.0).contains(&p.x) && (0.0..=1.0).contains(&p.y));
        }
    }
}

#[test]
fn geometric_alpha_validation() {
    assert!(Alpha::new(0.0).is_err());
    assert!(Alpha::new(1.0).is_err());
    assert!(Permuton::square(f64::NAN).is_err());
}
