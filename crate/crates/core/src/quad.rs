//! Composite Gauss-Legendre quadrature on uniform panels.

/// 4-point Gauss-Legendre nodes on [-1, 1].
pub const GL4_NODES: [f64; 4] = [
    -0.861_136_311_594_052_6,
    -0.339_981_043_584_856_26,
    0.339_981_043_584_856_26,
    0.861_136_311_594_052_6,
];

/// 4-point Gauss-Legendre weights on [-1, 1].
pub const GL4_WEIGHTS: [f64; 4] = [
    0.347_854_845_137_453_85,
    0.652_145_154_862_546_2,
    0.652_145_154_862_546_2,
    0.347_854_845_137_453_85,
];

/// Integrate `f` over [a, b] with composite 4-point Gauss-Legendre panels of
/// width at most `step`. Returns (value, error estimate), the estimate being
/// the difference against the embedded midpoint-refined pass.
pub fn integrate(a: f64, b: f64, step: f64, mut f: impl FnMut(f64) -> f64) -> (f64, f64) {
    if a == b {
        return (0.0, 0.0);
    }
    let coarse = panels(a, b, step, &mut f);
    let fine = panels(a, b, step / 2.0, &mut f);
    (fine, (fine - coarse).abs())
}

/// Single composite pass without the error estimate.
pub fn panels(a: f64, b: f64, step: f64, f: &mut impl FnMut(f64) -> f64) -> f64 {
    assert!(step > 0.0, "quadrature step must be positive");
    let len = b - a;
    let n = (len.abs() / step).ceil().max(1.0) as usize;
    let h = len / n as f64;
    let mut total = 0.0;
    for i in 0..n {
        let left = a + i as f64 * h;
        let mid = left + h / 2.0;
        let half = h / 2.0;
        let mut acc = 0.0;
        for (x, w) in GL4_NODES.iter().zip(GL4_WEIGHTS) {
            acc += w * f(mid + half * x);
        }
        total += acc * half;
    }
    total
}

/// Complex-valued variant, same panel layout.
pub fn panels_c(
    a: f64,
    b: f64,
    step: f64,
    f: &mut impl FnMut(f64) -> (f64, f64),
) -> (f64, f64) {
    assert!(step > 0.0, "quadrature step must be positive");
    let len = b - a;
    let n = (len.abs() / step).ceil().max(1.0) as usize;
    let h = len / n as f64;
    let (mut re, mut im) = (0.0, 0.0);
    for i in 0..n {
        let left = a + i as f64 * h;
        let mid = left + h / 2.0;
        let half = h / 2.0;
        for (x, w) in GL4_NODES.iter().zip(GL4_WEIGHTS) {
            let (r, m) = f(mid + half * x);
            re += w * r * half;
            im += w * m * half;
        }
    }
    (re, im)
}
