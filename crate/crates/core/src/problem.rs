//! Data of the unit-square benchmark: `eps = mu = 1` and a source for which
//! `E = (cos(pi x) sin(pi y), -sin(pi x) cos(pi y))` solves the linear problem
//! `eps E + curl(mu^-1 curl E) = f` with `n x E = 0` on the boundary.

use std::f64::consts::PI;

use crate::mesh::Point;
use crate::space::Vec2;

pub fn source(p: Point) -> Vec2 {
    let c = 1.0 + 2.0 * PI * PI;
    let e = exact_linear(p);
    [c * e[0], c * e[1]]
}

/// Exact solution when the nonsmooth term is switched off.
pub fn exact_linear(p: Point) -> Vec2 {
    let (x, y) = (PI * p[0], PI * p[1]);
    [x.cos() * y.sin(), -x.sin() * y.cos()]
}

pub fn exact_linear_curl(p: Point) -> f64 {
    -2.0 * PI * (PI * p[0]).cos() * (PI * p[1]).cos()
}
