//! Quadrature rules: Gauss–Legendre on intervals and the edge-midpoint rule
//! on triangles.
//!
//! The triangle rule integrates quadratics exactly with strictly positive
//! weights, which is what the entrywise sign analysis of the assembled
//! matrix needs: every bound used there holds pointwise at quadrature
//! nodes, so positivity of the weights carries the bounds through the sum.

use std::sync::OnceLock;

/// Edge-midpoint rule on the reference triangle in barycentric coordinates,
/// exact for polynomials of degree 2. Weights are fractions of the
/// physical-triangle area.
pub const TRI_MIDPOINT: [([f64; 3], f64); 3] = [
    ([0.5, 0.5, 0.0], 1.0 / 3.0),
    ([0.0, 0.5, 0.5], 1.0 / 3.0),
    ([0.5, 0.0, 0.5], 1.0 / 3.0),
];

/// Gauss–Legendre nodes and weights on [-1, 1], exact through degree 2n - 1.
///
/// Nodes are the roots of the degree-n Legendre polynomial, found by Newton
/// iteration from the Chebyshev-based initial guesses; weights follow from
/// the derivative values. For the small n used here the iteration converges
/// to machine precision in a handful of steps.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1, "quadrature order must be at least 1");
    let mut rule = Vec::with_capacity(n);
    let m = n.div_ceil(2);
    for k in 0..m {
        // Initial guess: Chebyshev angle, accurate enough for Newton.
        let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Evaluate P_n and P_n' by the three-term recurrence.
            let mut p0 = 1.0;
            let mut p1 = x;
            for j in 2..=n {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { x } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.push((x, w));
    }
    // Mirror to the negative half (the middle node of odd rules is x = 0).
    for k in (0..m).rev() {
        let (x, w) = rule[k];
        if x.abs() > 1e-14 {
            rule.push((-x, w));
        }
    }
    rule.sort_by(|a, b| a.0.total_cmp(&b.0));
    debug_assert_eq!(rule.len(), n);
    rule
}

/// Gauss–Legendre rule mapped to [0, 1].
pub fn gauss_legendre_01(n: usize) -> Vec<(f64, f64)> {
    gauss_legendre(n)
        .into_iter()
        .map(|(x, w)| (0.5 * (x + 1.0), 0.5 * w))
        .collect()
}

/// The 8-point rule on [0, 1] used for all state-averaged coefficients,
/// computed once and cached.
pub fn gl8_01() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre_01(8))
}
