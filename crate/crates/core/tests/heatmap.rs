use forcible::heatmap::{graphon_heatmap, permuton_heatmap};
use forcible::{Graphon, Permuton};

#[test]
fn monotone_staircase() {
    // first block [0, 1/2]² carries an anti-diagonal segment
    let h = permuton_heatmap(&Permuton::monotone(0.5).unwrap(), 64).unwrap();
    assert!(h.get(0, 31) > 0.9 && h.get(31, 0) > 0.9);
    assert_eq!(h.get(0, 0), 0.0);
    assert_eq!(h.get(10, 50), 0.0);
    let total: f64 = (0..64).flat_map(|i| (0..64).map(move |j| (i, j))).map(|(i, j)| h.get(i, j)).sum();
    assert!(total > 0.0);
}

#[test]
fn planted_blocks_have_constant_gray() {
    let h = graphon_heatmap(&Graphon::planted_constant(0.5, 1.0 / 3.0).unwrap(), 60, 0, 0).unwrap();
    // first block is [0, 2/3)
    for (i, j) in [(0, 0), (10, 30), (39, 1)] {
        assert_eq!(h.get(i, j), 0.5);
    }
    assert_eq!(h.get(45, 10), 0.0);
    assert_eq!(h.get(41, 41), 0.5);
}

#[test]
fn output_is_reproducible() {
    let w = Graphon::PermutonInduced { permuton: Permuton::square(0.5).unwrap() };
    let a = graphon_heatmap(&w, 16, 300, 4).unwrap().to_p2("x");
    let b = graphon_heatmap(&w, 16, 300, 4).unwrap().to_p2("x");
    assert_eq!(a, b);
}
