//! Quadrature rules whose nodes lie strictly inside the reference element.

/// Gauss–Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre_unit(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1, "Gauss rule needs at least one point");
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        // Newton iteration on P_n from the Chebyshev-like initial guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((0.5 * (1.0 - x), 0.5 * w));
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Conical-product (collapsed Gauss) rule on the reference triangle
/// `{(s, t) : s, t ≥ 0, s + t ≤ 1}`: `n × n` points, weights summing to `1/2`.
pub fn triangle_rule(n: usize) -> Vec<([f64; 2], f64)> {
    let g = gauss_legendre_unit(n);
    let mut out = Vec::with_capacity(n * n);
    for &(u, wu) in &g {
        for &(v, wv) in &g {
            out.push(([u, v * (1.0 - u)], wu * wv * (1.0 - u)));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_integrates_polynomials_exactly() {
        for n in 1..=12 {
            let g = gauss_legendre_unit(n);
            for p in 0..(2 * n) {
                let s: f64 = g.iter().map(|(x, w)| w * x.powi(p as i32)).sum();
                assert_relative_eq!(s, 1.0 / (p as f64 + 1.0), epsilon = 1e-14);
            }
            assert!(g.iter().all(|(x, w)| *x > 0.0 && *x < 1.0 && *w > 0.0));
        }
    }

    #[test]
    fn triangle_rule_moments() {
        // ∫_T s^a t^b = a! b! / (a + b + 2)!
        let fact = |k: u32| (1..=k).map(|v| v as f64).product::<f64>();
        for n in 2..=4 {
            let rule = triangle_rule(n);
            for a in 0..=(2 * n as u32 - 2) {
                for b in 0..=(2 * n as u32 - 2 - a) {
                    let s: f64 = rule.iter().map(|(p, w)| w * p[0].powi(a as i32) * p[1].powi(b as i32)).sum();
                    assert_relative_eq!(s, fact(a) * fact(b) / fact(a + b + 2), epsilon = 1e-14);
                }
            }
            assert!(rule.iter().all(|(p, _)| p[0] > 0.0 && p[1] > 0.0 && p[0] + p[1] < 1.0));
        }
    }
}
