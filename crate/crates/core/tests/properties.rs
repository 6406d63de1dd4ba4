//! Property tests for the structural invariants: group actions, cocycles,
//! characters, and renormalization.

use horoflow_core::cover::{deck_character, xi_cocycle, CoverLattice, CoverPoint, Twist};
use horoflow_core::geometry::{geodesic_step, horocycle_step, FuchsianGroup, Isometry, Letter};
use horoflow_core::jacobi::{tau_at_phase, CurvatureModel};
use horoflow_core::C64;
use proptest::prelude::*;
use std::sync::OnceLock;

fn group() -> &'static FuchsianGroup {
    static G: OnceLock<FuchsianGroup> = OnceLock::new();
    G.get_or_init(FuchsianGroup::validated)
}

fn lattice() -> &'static CoverLattice {
    static L: OnceLock<CoverLattice> = OnceLock::new();
    L.get_or_init(|| CoverLattice::rank_two(group().clone()))
}

fn arb_point() -> impl Strategy<Value = Isometry> {
    (-0.5f64..0.5, 0.6f64..1.8, 0.0f64..std::f64::consts::TAU)
        .prop_map(|(x, y, th)| Isometry::from_base_angle(x, y, th))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn flows_commute_with_deck(x in arb_point(), t in -5.0f64..5.0, s in -5.0f64..5.0, k in 0u8..8) {
        let g = group();
        let d = *g.pairing(Letter(k));
        let a = d.mul(&geodesic_step(&x, t)).renormalized();
        let b = geodesic_step(&d.mul(&x).renormalized(), t);
        prop_assert!(a.dist_proj(&b) < 1e-12);
        let a = d.mul(&horocycle_step(&x, s)).renormalized();
        let b = horocycle_step(&d.mul(&x).renormalized(), s);
        prop_assert!(a.dist_proj(&b) < 1e-12);
    }

    #[test]
    fn renormalization_relation(x in arb_point(), s in -3.0f64..3.0, t in -3.0f64..3.0) {
        let lhs = geodesic_step(&horocycle_step(&x, s), t);
        let rhs = horocycle_step(&geodesic_step(&x, t), s * (-t).exp());
        prop_assert!(lhs.dist_proj(&rhs) < 1e-10);
    }

    #[test]
    fn winding_is_additive(x in arb_point(), t1 in 0.2f64..4.0, t2 in 0.2f64..4.0) {
        let lat = lattice();
        let p = lat.classify(&x).unwrap();
        let (mid, w1) = lat.geodesic_flow(&p, t1).unwrap();
        let (_, w2) = lat.geodesic_flow(&mid, t2).unwrap();
        let (_, w12) = lat.geodesic_flow(&p, t1 + t2).unwrap();
        let sum: Vec<i64> = w1.deck.iter().zip(&w2.deck).map(|(a, b)| a + b).collect();
        prop_assert_eq!(sum, w12.deck);
    }

    #[test]
    fn character_is_multiplicative(
        w1 in -0.5f64..0.5, w2 in -0.5f64..0.5,
        d1 in -9i64..9, d2 in -9i64..9, e1 in -9i64..9, e2 in -9i64..9,
    ) {
        let omega = Twist(vec![w1, w2]);
        let a = [d1, d2];
        let b = [e1, e2];
        let ab = [d1 + e1, d2 + e2];
        let lhs = deck_character(&omega, &ab);
        let rhs = deck_character(&omega, &a) * deck_character(&omega, &b);
        prop_assert!((lhs - rhs).abs() < 1e-13);
        prop_assert!((lhs.abs() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn xi_is_equivariant(
        w1 in -0.5f64..0.5, w2 in -0.5f64..0.5,
        n1 in -6i64..6, n2 in -6i64..6, d1 in -6i64..6, d2 in -6i64..6,
    ) {
        let omega = Twist(vec![w1, w2]);
        let x = CoverPoint { base: Isometry::IDENTITY, deck: vec![n1, n2] };
        let shift = [d1, d2];
        let moved = x.translated(&shift);
        let lhs = C64::unit_phase(xi_cocycle(&omega, &moved));
        let rhs = deck_character(&omega, &shift) * C64::unit_phase(xi_cocycle(&omega, &x));
        prop_assert!((lhs - rhs).abs() < 1e-13);
    }

    #[test]
    fn tau_constant_curvature_form(s in -4.0f64..4.0, t in -2.0f64..2.0) {
        let m = CurvatureModel::Constant;
        let r = tau_at_phase(&m, 0.0, s, t, 0.05).unwrap();
        prop_assert!((r.tau - (-t).exp() * s).abs() <= 1e-12 * (1.0 + r.tau.abs()));
        prop_assert!((r.tau_quadrature - r.tau).abs() <= 1e-10);
    }

    #[test]
    fn tau_sampler_monotone_and_positive(
        s in 0.3f64..3.0, t in -1.0f64..2.0, phase in 0.0f64..6.0,
    ) {
        let m = CurvatureModel::sinusoidal(2.0, 0.8, 1.1, 0.3);
        let r = tau_at_phase(&m, phase, s, t, 0.05).unwrap();
        prop_assert!(r.tau > 0.0);
        let r2 = tau_at_phase(&m, phase, s * 1.5, t, 0.05).unwrap();
        prop_assert!(r2.tau > r.tau);
    }

    #[test]
    fn reduction_roundtrip(x in arb_point(), letters in proptest::collection::vec(0u8..8, 0..6)) {
        let g = group();
        let mut moved = x;
        for &l in &letters {
            moved = g.pairing(Letter(l)).mul(&moved).renormalized();
        }
        let (r, w) = g.reduce(&moved).unwrap();
        prop_assert!(g.contains_base(&r));
        let mut back = r;
        for &l in w.iter().rev() {
            back = g.pairing(l.inverse()).mul(&back).renormalized();
        }
        let scale = 1.0 + moved.a.abs().max(moved.b.abs()).max(moved.c.abs()).max(moved.d.abs());
        prop_assert!(back.dist_proj(&moved) / scale < 1e-9);
    }
}
