//! Small 2D vector helpers shared by mesh geometry and assembly.

/// A point (or vector) in the plane.
pub type Point = [f64; 2];

#[inline]
pub fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

#[inline]
pub fn norm(a: Point) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn dist(a: Point, b: Point) -> f64 {
    norm(sub(a, b))
}

/// Twice the signed area of the triangle (a, b, c); positive when the
/// vertices are in counterclockwise order.
#[inline]
pub fn signed_area2(a: Point, b: Point, c: Point) -> f64 {
    cross(sub(b, a), sub(c, a))
}

/// Interior angle at vertex `v` of the triangle (v, a, b), in (0, pi).
pub fn angle_at(v: Point, a: Point, b: Point) -> f64 {
    let u = sub(a, v);
    let w = sub(b, v);
    cross(u, w).abs().atan2(dot(u, w))
}

/// Cotangent of the angle at `v` between the rays to `a` and `b`.
///
/// Computed as dot/|cross| so right angles give exactly zero and no tangent
/// blow-up occurs near pi/2.
pub fn cot_at(v: Point, a: Point, b: Point) -> f64 {
    let u = sub(a, v);
    let w = sub(b, v);
    dot(u, w) / cross(u, w).abs()
}
