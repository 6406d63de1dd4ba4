//! Z^d-cover bookkeeping over the octagon surface: abelianization of
//! reduction words, deck coordinates, the combinatorial winding cocycle, and
//! the unit-modulus deck characters.
//!
//! Homology classes are written in the symplectic basis (a1, b1, a2, b2);
//! the cover is selected by an integer projection matrix Z^4 -> Z^d whose
//! rows are the classes defining the cover.

use crate::complex::C64;
use crate::error::Result;
use crate::geometry::{geodesic_step, horocycle_step, FuchsianGroup, Isometry, Letter};

/// Image of each side-pairing letter in H_1 = Z^4 (symplectic basis).
///
/// Derived by inverting the word expansion of the symplectic generators; the
/// consistency with `FuchsianGroup::symplectic_word` is asserted in tests.
const LETTER_H1: [[i64; 4]; 8] = [
    [1, 0, -1, -1],  // p0
    [1, 0, -2, -1],  // p1
    [1, 0, -1, 0],   // p2
    [0, -1, 0, 0],   // p3
    [-1, 0, 1, 1],   // p0^-1
    [-1, 0, 2, 1],   // p1^-1
    [-1, 0, 1, 0],   // p2^-1
    [0, 1, 0, 0],    // p3^-1
];

/// A twist parameter omega, a point of the d-torus dual to the deck group.
#[derive(Clone, Debug, PartialEq)]
pub struct Twist(pub Vec<f64>);

impl Twist {
    pub fn zero(d: usize) -> Twist {
        Twist(vec![0.0; d])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn dot(&self, deck: &[i64]) -> f64 {
        self.0.iter().zip(deck).map(|(w, &n)| w * n as f64).sum()
    }

    pub fn dot_f(&self, v: &[f64]) -> f64 {
        self.0.iter().zip(v).map(|(w, &n)| w * n).sum()
    }

    pub fn neg(&self) -> Twist {
        Twist(self.0.iter().map(|w| -w).collect())
    }
}

/// A point of the unit tangent bundle of the Z^d cover: a domain-reduced base
/// matrix together with a deck coordinate.
#[derive(Clone, Debug, PartialEq)]
pub struct CoverPoint {
    pub base: Isometry,
    pub deck: Vec<i64>,
}

impl CoverPoint {
    pub fn translated(&self, shift: &[i64]) -> CoverPoint {
        CoverPoint {
            base: self.base,
            deck: self.deck.iter().zip(shift).map(|(a, b)| a + b).collect(),
        }
    }
}

/// Winding of a geodesic (or horocycle) arc: the deck displacement of the
/// arc, exact in Z^d, with the flow time it was collected over.
#[derive(Clone, Debug, PartialEq)]
pub struct Winding {
    pub deck: Vec<i64>,
    pub time: f64,
}

impl Winding {
    pub fn as_f64(&self) -> Vec<f64> {
        self.deck.iter().map(|&n| n as f64).collect()
    }
}

/// E_omega(D) = exp(2 pi i omega . D), the unit character of the deck group.
pub fn deck_character(omega: &Twist, deck: &[i64]) -> C64 {
    C64::unit_phase(omega.dot(deck))
}

/// xi_omega on the cover in the combinatorial model: omega . deck, locally
/// constant on each fundamental-domain copy. Satisfies
/// xi(D x) - xi(x) = omega . D exactly.
pub fn xi_cocycle(omega: &Twist, x: &CoverPoint) -> f64 {
    omega.dot(&x.deck)
}

/// The surface group together with the abelianization data selecting a
/// Z^d cover.
#[derive(Clone, Debug)]
pub struct CoverLattice {
    pub group: FuchsianGroup,
    /// d rows, each a homology class in the symplectic basis.
    projection: Vec<[i64; 4]>,
    /// projection applied to each letter image, precomputed.
    letter_deck: [Vec<i64>; 8],
}

impl CoverLattice {
    pub fn new(group: FuchsianGroup, projection: Vec<[i64; 4]>) -> CoverLattice {
        let letter_deck = std::array::from_fn(|l| {
            projection
                .iter()
                .map(|row| row.iter().zip(LETTER_H1[l]).map(|(a, b)| a * b).sum())
                .collect()
        });
        CoverLattice { group, projection, letter_deck }
    }

    /// The rank-1 cover cut out by the class a1.
    pub fn rank_one(group: FuchsianGroup) -> CoverLattice {
        CoverLattice::new(group, vec![[1, 0, 0, 0]])
    }

    /// The rank-2 cover cut out by (a1, b1).
    pub fn rank_two(group: FuchsianGroup) -> CoverLattice {
        CoverLattice::new(group, vec![[1, 0, 0, 0], [0, 1, 0, 0]])
    }

    pub fn d(&self) -> usize {
        self.projection.len()
    }

    pub fn projection(&self) -> &[[i64; 4]] {
        &self.projection
    }

    /// Homology class of a letter in the symplectic basis.
    pub fn letter_h1(l: Letter) -> [i64; 4] {
        LETTER_H1[l.0 as usize]
    }

    /// Deck-group image of one reduction letter.
    pub fn letter_deck(&self, l: Letter) -> &[i64] {
        &self.letter_deck[l.0 as usize]
    }

    /// Abelianize a word of reduction letters, projected to Z^d.
    pub fn word_deck(&self, word: &[Letter]) -> Vec<i64> {
        let mut acc = vec![0i64; self.d()];
        for &l in word {
            for (a, b) in acc.iter_mut().zip(self.letter_deck(l)) {
                *a += b;
            }
        }
        acc
    }

    /// Interpret a raw matrix as a point of the cover in the base copy and
    /// reduce it: the deck coordinate accounts for the reduction word.
    pub fn classify(&self, raw: &Isometry) -> Result<CoverPoint> {
        let (base, word) = self.group.reduce_retrying(raw)?;
        let mut deck = self.word_deck(&word);
        for v in deck.iter_mut() {
            *v = -*v;
        }
        Ok(CoverPoint { base, deck })
    }

    pub fn base_point_at_center(&self) -> CoverPoint {
        CoverPoint { base: Isometry::IDENTITY, deck: vec![0; self.d()] }
    }

    /// One bounded flow step (|dt| <= 1 recommended) with reduction; returns
    /// the new point. The deck displacement is -(word image).
    fn step_and_reduce(&self, x: &CoverPoint, raw_step: Isometry) -> Result<CoverPoint> {
        let (base, word) = self.group.reduce_retrying(&raw_step)?;
        let mut deck = x.deck.clone();
        for (v, w) in deck.iter_mut().zip(self.word_deck(&word)) {
            *v -= w;
        }
        Ok(CoverPoint { base, deck })
    }

    /// Geodesic flow on the cover for time `t`, chunked into unit steps with
    /// reduction after each. Returns the endpoint and the winding (deck
    /// displacement) of the arc.
    pub fn geodesic_flow(&self, x: &CoverPoint, t: f64) -> Result<(CoverPoint, Winding)> {
        let mut cur = x.clone();
        let mut remaining = t;
        loop {
            let dt = remaining.clamp(-1.0, 1.0);
            if dt == 0.0 {
                break;
            }
            cur = self.step_and_reduce(&cur, geodesic_step(&cur.base, dt))?;
            remaining -= dt;
        }
        let deck = cur.deck.iter().zip(&x.deck).map(|(a, b)| a - b).collect();
        Ok((cur, Winding { deck, time: t }))
    }

    /// Horocycle flow on the cover for time `s`, chunked, with winding.
    pub fn horocycle_flow(&self, x: &CoverPoint, s: f64) -> Result<(CoverPoint, Winding)> {
        let mut cur = x.clone();
        let mut remaining = s;
        loop {
            let ds = remaining.clamp(-1.0, 1.0);
            if ds == 0.0 {
                break;
            }
            cur = self.step_and_reduce(&cur, horocycle_step(&cur.base, ds))?;
            remaining -= ds;
        }
        let deck = cur.deck.iter().zip(&x.deck).map(|(a, b)| a - b).collect();
        Ok((cur, Winding { deck, time: s }))
    }

    /// Frobenius / winding vector of the geodesic arc from x of length t:
    /// component k is the omega_k-pairing of the arc, which in the
    /// combinatorial model is the k-th deck displacement.
    pub fn frobenius_vector(&self, x: &CoverPoint, t: f64) -> Result<Vec<f64>> {
        assert!(t >= 0.0, "frobenius_vector wants t >= 0");
        let (_, w) = self.geodesic_flow(x, t)?;
        Ok(w.as_f64())
    }

    /// A point on the axis of a symplectic generator (index 0..4), pointing
    /// along the axis, together with the generator's translation length.
    pub fn axis_point(&self, gen_index: usize) -> (CoverPoint, f64) {
        let m = *self.group.symplectic_generator(gen_index);
        let tr = m.a + m.d;
        // eigenvalues lambda, 1/lambda with lambda = e^{l/2}
        let lam = (tr.abs() + (tr * tr - 4.0).sqrt()) / 2.0;
        let length = 2.0 * lam.ln();
        let sgn = if tr < 0.0 { -1.0 } else { 1.0 };
        let (a, b, c, d) = (sgn * m.a, sgn * m.b, sgn * m.c, sgn * m.d);
        // eigenvector for lambda and for 1/lambda
        let v1 = eigvec(a, b, c, d, lam);
        let v2 = eigvec(a, b, c, d, 1.0 / lam);
        let det = v1.0 * v2.1 - v1.1 * v2.0;
        let (v2, det) = if det < 0.0 { ((-v2.0, -v2.1), -det) } else { (v2, det) };
        let s = det.sqrt();
        let v = Isometry { a: v1.0 / s, b: v2.0 / s, c: v1.1 / s, d: v2.1 / s };
        let pt = self
            .classify(&v.renormalized())
            .expect("axis point reduction cannot hit the step guard");
        (pt, length)
    }
}

fn eigvec(a: f64, b: f64, c: f64, d: f64, lam: f64) -> (f64, f64) {
    // (A - lam) v = 0; pick the better-conditioned row
    let r1 = (a - lam, b);
    let r2 = (c, d - lam);
    let (p, q) = if r1.0.abs().max(r1.1.abs()) > r2.0.abs().max(r2.1.abs()) {
        r1
    } else {
        r2
    };
    let v = (-q, p);
    let n = v.0.hypot(v.1);
    (v.0 / n, v.1 / n)
}
