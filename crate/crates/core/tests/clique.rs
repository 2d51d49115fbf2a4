use approx::assert_abs_diff_eq;
use forcible::clique::{
    clique_union_density, clique_union_polynomial, planted_density, planted_density_constant, CliqueDensityVector,
    CliqueUnion,
};
use forcible::graph::graphs_of_order;
use forcible::graphon::density_mc;
use forcible::{Alpha, BlockSizes, Graph, Graphon};
use itertools::Itertools;
use proptest::prelude::*;

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// `P(W-random graph ≅ G)` for `Constant(ρ)` planted on finitely many blocks,
/// by summing over block assignments of labelled vertices and over labelled graphs.
fn planted_oracle(g: &Graph, rho: f64, blocks: &[f64]) -> f64 {
    let k = g.order();
    let pairs: Vec<(usize, usize)> = (0..k).tuple_combinations().collect();
    let mut total = 0.0;
    for assignment in (0..k).map(|_| 0..blocks.len()).multi_cartesian_product() {
        let weight: f64 = assignment.iter().map(|&j| blocks[j]).product();
        let same: Vec<(usize, usize)> = pairs.iter().copied().filter(|&(i, j)| assignment[i] == assignment[j]).collect();
        for mask in 0u32..1 << same.len() {
            let edges: Vec<(usize, usize)> = (0..same.len()).filter(|b| mask >> b & 1 == 1).map(|b| same[b]).collect();
            if Graph::new(k, &edges).unwrap().is_isomorphic(g) {
                let e = edges.len() as i32;
                total += weight * rho.powi(e) * (1.0 - rho).powi(same.len() as i32 - e);
            }
        }
    }
    total
}

/// `d(∪K_{s_i}, W^c_a)` for finitely many blocks: multinomial placement count
/// times the sum over distinct block tuples.
fn clique_blocks_oracle(sizes: &[usize], blocks: &[f64]) -> f64 {
    let k: usize = sizes.iter().sum();
    let mut repeats = std::collections::BTreeMap::new();
    for &s in sizes {
        *repeats.entry(s).or_insert(0usize) += 1;
    }
    let placements = factorial(k)
        / sizes.iter().map(|&s| factorial(s)).product::<f64>()
        / repeats.values().map(|&m| factorial(m)).product::<f64>();
    let tuples: f64 = (0..blocks.len())
        .permutations(sizes.len())
        .map(|js| js.iter().zip(sizes).map(|(&j, &s)| blocks[j].powi(s as i32)).product::<f64>())
        .sum();
    placements * tuples
}

fn partitions(n: usize, max_part: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    (1..=max_part.min(n))
        .flat_map(|p| {
            partitions(n - p, p).into_iter().map(move |mut rest| {
                rest.push(p);
                rest
            })
        })
        .collect()
}

fn clique_unions(max_order: usize) -> Vec<CliqueUnion> {
    (1..=max_order)
        .flat_map(|n| partitions(n, n))
        .map(|sizes| CliqueUnion::new(sizes).unwrap())
        .collect()
}

#[test]
fn recursion_matches_finite_block_oracle() {
    let blocks = [0.4, 0.3, 0.2, 0.1];
    let finite = BlockSizes::new(blocks.to_vec(), None).unwrap();
    let v = CliqueDensityVector::from_blocks(&finite, 7);
    for u in clique_unions(7).into_iter().filter(|u| u.sizes().len() <= blocks.len()) {
        let got = clique_union_density(&u, &v).unwrap();
        assert_abs_diff_eq!(got, clique_blocks_oracle(u.sizes(), &blocks), epsilon = 1e-13);
    }
}

#[test]
fn recursion_matches_monte_carlo() {
    for alpha in [1.0 / 3.0, 0.5] {
        let w = Graphon::clique_blocks_geometric(alpha).unwrap();
        let v = CliqueDensityVector::from_blocks(&BlockSizes::geometric(Alpha::new(alpha).unwrap()), 6);
        for (i, u) in ["2+3", "1+1+2", "1+1+1+1", "3+3"].iter().enumerate() {
            let u: CliqueUnion = u.parse().unwrap();
            let e = density_mc(&u.to_graph(), &w, 200_000, 40 + i as u64).unwrap();
            let d = clique_union_density(&u, &v).unwrap();
            assert!(e.within(d, 4.0, 1e-9), "{u} at α={alpha}: {} vs {d}", e.value);
        }
    }
}

fn density_vector() -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(0.0f64..1.0, 8).prop_map(|mut v| {
        v.sort_by(|a, b| b.partial_cmp(a).unwrap());
        v[0] = 1.0;
        v
    })
}

proptest! {
    #[test]
    fn output_ignores_densities_above_the_order(v in density_vector(), w in density_vector(), idx in 0usize..29) {
        let u = &clique_unions(6)[idx];
        prop_assert_eq!(clique_unions(6).len(), 29);
        let n = u.order();
        let mut mixed = v[..n].to_vec();
        mixed.extend(w[n..].iter().map(|x| x.min(v[n - 1])));
        let a = clique_union_density(u, &CliqueDensityVector::new(v).unwrap()).unwrap();
        let b = clique_union_density(u, &CliqueDensityVector::new(mixed).unwrap()).unwrap();
        prop_assert_eq!(a, b);
        prop_assert!(clique_union_polynomial(u).unwrap().max_order() <= n);
    }

    #[test]
    fn clique_union_densities_sum_to_one_over_p3_free_graphs(a in 0.05f64..0.95, n in 1usize..=6) {
        let blocks = BlockSizes::geometric(Alpha::new(a).unwrap());
        let v = CliqueDensityVector::from_blocks(&blocks, n);
        let total: f64 = clique_unions(n)
            .iter()
            .filter(|u| u.order() == n)
            .map(|u| clique_union_density(u, &v).unwrap())
            .sum();
        prop_assert!((total - 1.0).abs() < 1e-10);
    }
}

#[test]
fn planted_matches_block_assignment_oracle() {
    let blocks = [0.5, 0.3, 0.2];
    let finite = BlockSizes::new(blocks.to_vec(), None).unwrap();
    for rho in [0.5, 0.75, 0.2] {
        for k in 1..=4 {
            for g in graphs_of_order(k).unwrap() {
                let got = planted_density_constant(&g, rho, &finite).unwrap();
                assert_abs_diff_eq!(got, planted_oracle(&g, rho, &blocks), epsilon = 1e-13);
            }
        }
    }
}

#[test]
fn planted_matches_monte_carlo() {
    let w = Graphon::planted_constant(0.5, 0.5).unwrap();
    let blocks = BlockSizes::geometric(Alpha::new(0.5).unwrap());
    for (i, name) in ["2+1+1", "P3", "4; 1-2,2-3,3-4"].iter().enumerate() {
        let g: Graph = name.parse().unwrap();
        let d = planted_density_constant(&g, 0.5, &blocks).unwrap();
        let e = density_mc(&g, &w, 300_000, 70 + i as u64).unwrap();
        assert!(e.within(d, 4.0, 1e-9), "{g}: {} vs {d}", e.value);
    }
}

#[test]
fn planting_complete_graphon_reduces_to_clique_blocks() {
    let blocks = BlockSizes::geometric(Alpha::new(1.0 / 3.0).unwrap());
    let v = CliqueDensityVector::from_blocks(&blocks, 6);
    for u in clique_unions(6) {
        let planted = planted_density_constant(&u.to_graph(), 1.0, &blocks).unwrap();
        assert_abs_diff_eq!(planted, clique_union_density(&u, &v).unwrap(), epsilon = 1e-13);
    }
}

#[test]
fn planted_reports_missing_base_densities() {
    let blocks = BlockSizes::geometric(Alpha::new(0.5).unwrap());
    let mut base = forcible::clique::constant_base_densities(&Graph::complete(2), 0.5);
    base.clear();
    assert!(planted_density(&Graph::complete(2), &base, &blocks).is_err());
}

#[test]
fn density_vector_csv() {
    let v = CliqueDensityVector::new(vec![1.0, 0.5, 0.25]).unwrap();
    assert_eq!(v.to_csv(), "ell,value\n1,1\n2,0.5\n3,0.25\n");
    assert!(CliqueDensityVector::new(vec![0.9]).is_err());
    assert!(CliqueDensityVector::new(vec![1.0, 0.2, 0.3]).is_err());
}
