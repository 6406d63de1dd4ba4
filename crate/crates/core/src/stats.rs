//! Small statistics helpers: normal CDF, one-sample Kolmogorov-Smirnov
//! against the standard normal, Spearman rank correlation, least squares.

/// Standard normal CDF via erfc (Numerical-Recipes-style rational
/// approximation, |error| < 1.2e-7, ample for KS at n <= 1e6).
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

pub fn erfc(x: f64) -> f64 {
    let z = x.abs();
    let t = 1.0 / (1.0 + 0.5 * z);
    let poly = 1.00002368
        + t * (0.37409196
            + t * (0.09678418
                + t * (-0.18628806
                    + t * (0.27886807
                        + t * (-1.13520398
                            + t * (1.48851587 + t * (-0.82215223 + t * 0.17087277)))))));
    let ans = t * (-z * z - 1.26551223 + t * poly).exp();
    if x >= 0.0 {
        ans
    } else {
        2.0 - ans
    }
}

/// One-sample KS statistic of `data` against the standard normal, and the
/// asymptotic p-value with the Stephens small-sample correction.
pub fn ks_normal(data: &mut [f64]) -> (f64, f64) {
    data.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = data.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in data.iter().enumerate() {
        let cdf = normal_cdf(x);
        let lo = i as f64 / n;
        let hi = (i as f64 + 1.0) / n;
        d = d.max((cdf - lo).abs()).max((hi - cdf).abs());
    }
    let lambda = d * (n.sqrt() + 0.12 + 0.11 / n.sqrt());
    (d, kolmogorov_q(lambda))
}

/// Q(lambda) = 2 sum_{j>=1} (-1)^{j-1} e^{-2 j^2 lambda^2}.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..=100 {
        let term = (-2.0 * (j * j) as f64 * lambda * lambda).exp();
        sum += sign * term;
        sign = -sign;
        if term < 1e-12 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Spearman rank correlation; ties get average ranks.
pub fn spearman_rho(xs: &[f64], ys: &[f64]) -> f64 {
    let rx = ranks(xs);
    let ry = ranks(ys);
    pearson(&rx, &ry)
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].partial_cmp(&v[b]).unwrap());
    let mut out = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for k in i..=j {
            out[idx[k]] = avg;
        }
        i = j + 1;
    }
    out
}

fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
        sxy += (x - mx) * (y - my);
    }
    sxy / (sxx * syy).sqrt()
}

/// Ordinary least squares y = a + b x; returns (intercept, slope, r^2).
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    (intercept, slope, r2)
}

pub fn median(v: &mut [f64]) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_cdf_symmetry_and_values() {
        // the rational erfc approximation is good to ~1.2e-7
        assert!((normal_cdf(0.0) - 0.5).abs() < 2e-7);
        assert!((normal_cdf(1.959963985) - 0.975).abs() < 1e-6);
        for &x in &[-2.3, -0.7, 0.4, 1.9] {
            assert!((normal_cdf(x) + normal_cdf(-x) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn ks_accepts_normal_quantiles() {
        // deterministic normal-ish sample: inverse-CDF grid
        let n = 2000;
        let mut data: Vec<f64> = (0..n)
            .map(|i| {
                let u = (i as f64 + 0.5) / n as f64;
                inv_normal(u)
            })
            .collect();
        let (d, p) = ks_normal(&mut data);
        assert!(d < 0.01, "grid sample KS statistic {d}");
        assert!(p > 0.9);
    }

    #[test]
    fn ks_rejects_uniform() {
        let n = 2000;
        let mut data: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let (_, p) = ks_normal(&mut data);
        assert!(p < 1e-6);
    }

    fn inv_normal(p: f64) -> f64 {
        // bisection on the cdf; test-only
        let (mut lo, mut hi) = (-8.0, 8.0);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if normal_cdf(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn spearman_detects_monotone() {
        let xs = [1.0, 2.0, 3.0, 4.0, 5.0];
        let inc = [0.1, 0.5, 0.7, 2.0, 9.0];
        let dec = [5.0, 4.0, 3.0, 2.0, 1.0];
        assert!((spearman_rho(&xs, &inc) - 1.0).abs() < 1e-12);
        assert!((spearman_rho(&xs, &dec) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn linear_fit_recovers_line() {
        let xs: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 - 0.5 * x).collect();
        let (a, b, r2) = linear_fit(&xs, &ys);
        assert!((a - 3.0).abs() < 1e-12 && (b + 0.5).abs() < 1e-12 && (r2 - 1.0).abs() < 1e-12);
    }
}
