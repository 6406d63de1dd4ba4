//! Fundamental-domain tiling and reduction-growth diagnostics.

use horoflow_core::cover::CoverLattice;
use horoflow_core::geometry::{geodesic_step, FuchsianGroup, Isometry};
use horoflow_core::rng;
use horoflow_core::stats;
use rand::RngExt;

#[test]
fn tiling_covers_the_domain() {
    // 1e5 points uniform in a large hyperbolic disk all reduce into the
    // domain, and their endpoints leave no interior cell of a 32x32
    // coverage grid empty
    let g = FuchsianGroup::validated();
    let mut r = rng::stream(3, 0x7111);
    let radius = 6.0f64;
    let n_grid = 32;
    let h = g.vertex_disk_radius() * 1.0001;
    let mut counts = vec![0u32; n_grid * n_grid];
    for _ in 0..100_000 {
        // uniform w.r.t. hyperbolic area: r from the area CDF, angle uniform
        let u: f64 = r.random();
        let rad = (1.0 + u * (radius.cosh() - 1.0)).acosh();
        let phi = r.random_range(0.0..2.0 * std::f64::consts::PI);
        let w = ((rad / 2.0).tanh() * phi.cos(), (rad / 2.0).tanh() * phi.sin());
        let (zx, zy) = FuchsianGroup::from_disk(w);
        let theta = r.random_range(0.0..2.0 * std::f64::consts::PI);
        let x = Isometry::from_base_angle(zx, zy, theta);
        let (red, _) = g.reduce_retrying(&x).expect("reduction terminates");
        assert!(g.contains_base(&red), "reduced point escaped the domain");
        let (dx, dy) = red.disk_point();
        let ix = (((dx + h) / (2.0 * h) * n_grid as f64).floor().max(0.0) as usize)
            .min(n_grid - 1);
        let iy = (((dy + h) / (2.0 * h) * n_grid as f64).floor().max(0.0) as usize)
            .min(n_grid - 1);
        counts[iy * n_grid + ix] += 1;
    }
    // cells whose center is comfortably inside the octagon must be hit
    let mut empty = 0;
    let mut interior = 0;
    for iy in 0..n_grid {
        for ix in 0..n_grid {
            let cx = -h + (ix as f64 + 0.5) * 2.0 * h / n_grid as f64;
            let cy = -h + (iy as f64 + 0.5) * 2.0 * h / n_grid as f64;
            if g.is_interior(FuchsianGroup::from_disk((cx, cy)), 1e-3) {
                interior += 1;
                if counts[iy * n_grid + ix] == 0 {
                    empty += 1;
                }
            }
        }
    }
    assert!(interior > 400, "grid classification is off: {interior} interior cells");
    assert_eq!(empty, 0, "{empty} of {interior} interior cells never hit");
}

#[test]
fn reduction_word_length_grows_linearly() {
    // letters per unit geodesic time: slope within [0.5, 4] / diameter
    let g = FuchsianGroup::validated();
    let lat = CoverLattice::rank_one(g);
    let mut r = rng::stream(5, 0x510e);
    let diam = lat.group.domain_diameter();
    for _ in 0..5 {
        let mut x = lat.group.sample_volume(&mut r);
        let mut letters = 0usize;
        let mut ts = Vec::new();
        let mut lens = Vec::new();
        for step in 1..=200 {
            let raw = geodesic_step(&x, 1.0);
            let (red, word) = lat.group.reduce_retrying(&raw).unwrap();
            letters += word.len();
            x = red;
            ts.push(step as f64);
            lens.push(letters as f64);
        }
        let (_, slope, _) = stats::linear_fit(&ts, &lens);
        assert!(
            slope >= 0.5 / diam && slope <= 4.0 / diam,
            "word-length slope {slope} outside [{}, {}]",
            0.5 / diam,
            4.0 / diam
        );
    }
}
