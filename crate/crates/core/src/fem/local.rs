//! Per-triangle element quantities for piecewise-linear basis functions.

use crate::geom::{signed_area2, Point};

/// Constant gradients of the three barycentric basis functions on a
/// counterclockwise triangle, plus its area.
///
/// For vertices (a, b, c) the gradient of the function that is 1 at `a`
/// rotates the opposite edge: grad = (y_b - y_c, x_c - x_b) / (2 area).
pub fn basis_gradients(coords: [Point; 3]) -> ([[f64; 2]; 3], f64) {
    let two_a = signed_area2(coords[0], coords[1], coords[2]);
    debug_assert!(two_a > 0.0, "triangle must be counterclockwise");
    let mut grads = [[0.0; 2]; 3];
    for v in 0..3 {
        let b = coords[(v + 1) % 3];
        let c = coords[(v + 2) % 3];
        grads[v] = [(b[1] - c[1]) / two_a, (c[0] - b[0]) / two_a];
    }
    (grads, 0.5 * two_a)
}

/// The 3x3 table of grad phi_i . grad phi_j (constants on the triangle).
pub fn local_grad_dot(coords: [Point; 3]) -> ([[f64; 3]; 3], f64) {
    let (g, area) = basis_gradients(coords);
    let mut dots = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            dots[i][j] = g[i][0] * g[j][0] + g[i][1] * g[j][1];
        }
    }
    (dots, area)
}

/// Exact local mass matrix: area/6 on the diagonal, area/12 off it.
pub fn local_mass(area: f64) -> [[f64; 3]; 3] {
    let d = area / 6.0;
    let o = area / 12.0;
    [[d, o, o], [o, d, o], [o, o, d]]
}

/// Exact integral of one basis function over the triangle: area / 3.
pub fn local_basis_integral(area: f64) -> f64 {
    area / 3.0
}
