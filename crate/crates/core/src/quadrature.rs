//! Quadrature on the reference triangle `{(s, t): s, t >= 0, s + t <= 1}` and
//! on the unit interval.

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule<const D: usize> {
    pub points: Vec<[f64; D]>,
    pub weights: Vec<f64>,
}

impl<const D: usize> QuadratureRule<D> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64; D], f64)> + '_ {
        self.points.iter().zip(self.weights.iter().copied())
    }
}

pub type TriangleRule = QuadratureRule<2>;
pub type EdgeRule = QuadratureRule<1>;

/// Six-point symmetric rule, exact for polynomials of degree 4. Weights sum
/// to the reference area 1/2.
pub fn triangle_degree4() -> TriangleRule {
    const A: f64 = 0.445_948_490_915_964_886_318_329_253_883;
    const B: f64 = 0.091_576_213_509_770_743_459_571_463_402_2;
    const WA: f64 = 0.223_381_589_678_011_465_944_827_736_437;
    const WB: f64 = 0.109_951_743_655_321_867_388_505_596_898;
    let points = vec![
        [A, A],
        [1.0 - 2.0 * A, A],
        [A, 1.0 - 2.0 * A],
        [B, B],
        [1.0 - 2.0 * B, B],
        [B, 1.0 - 2.0 * B],
    ];
    let weights = [WA, WA, WA, WB, WB, WB].map(|w| 0.5 * w).to_vec();
    QuadratureRule { points, weights }
}

/// Three-point Gauss-Legendre on `[0, 1]`, exact for degree 5.
pub fn gauss_edge3() -> EdgeRule {
    let d = 0.5 * (0.6f64).sqrt();
    QuadratureRule {
        points: vec![[0.5 - d], [0.5], [0.5 + d]],
        weights: vec![5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0],
    }
}
