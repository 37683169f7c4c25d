//! Radial potential `psi(xi) = int_0^{|xi|} omega(t) dt` with the decaying
//! weight `omega(t) = (a - b) exp(-beta t) + b`.
//!
//! `psi` is smooth away from the origin and has a kink there, where its Clarke
//! subdifferential is the closed ball of radius `omega(0) = a`.

use crate::error::{Error, Result};
use crate::space::{dot, norm, Vec2};

/// Magnitude below which `|xi|` is treated as the kink at the origin.
pub const DEFAULT_TOL_ZERO: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentialDecayPotential {
    pub a: f64,
    pub b: f64,
    pub beta: f64,
    pub tol_zero: f64,
}

impl ExponentialDecayPotential {
    /// Requires `a > b > 0` and `beta > 0`.
    pub fn new(a: f64, b: f64, beta: f64) -> Result<Self> {
        if !(a > b && b > 0.0 && a.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "need a > b > 0, got a = {a}, b = {b}"
            )));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "need beta > 0, got {beta}"
            )));
        }
        Ok(ExponentialDecayPotential {
            a,
            b,
            beta,
            tol_zero: DEFAULT_TOL_ZERO,
        })
    }

    /// `a = b = 0`: the nonsmooth term vanishes identically.
    pub fn linear() -> Self {
        ExponentialDecayPotential {
            a: 0.0,
            b: 0.0,
            beta: 1.0,
            tol_zero: DEFAULT_TOL_ZERO,
        }
    }

    pub fn is_linear(&self) -> bool {
        self.a == 0.0 && self.b == 0.0
    }

    /// Relaxed monotonicity constant `m = beta (a - b)`.
    pub fn m(&self) -> f64 {
        self.beta * (self.a - self.b)
    }

    /// Growth bound on subgradients: `|eta| <= c0 + c1 |xi|` with `c1 = 0`.
    pub fn growth_constant(&self) -> f64 {
        self.a
    }

    pub fn omega(&self, t: f64) -> Result<f64> {
        if t < 0.0 || t.is_nan() {
            return Err(Error::Domain(format!("omega needs t >= 0, got {t}")));
        }
        Ok(self.omega_unchecked(t))
    }

    #[inline]
    fn omega_unchecked(&self, t: f64) -> f64 {
        (self.a - self.b) * (-self.beta * t).exp() + self.b
    }

    pub fn psi(&self, xi: Vec2) -> f64 {
        let r = norm(xi);
        self.b * r - (self.a - self.b) * (-self.beta * r).exp_m1() / self.beta
    }

    /// Gradient where `psi` is smooth; the minimal-norm element `0` of the
    /// ball `a B` at the kink.
    pub fn subgradient(&self, xi: Vec2) -> Vec2 {
        let r = norm(xi);
        if r <= self.tol_zero {
            return [0.0, 0.0];
        }
        let s = self.omega_unchecked(r) / r;
        [s * xi[0], s * xi[1]]
    }

    /// Generalized directional derivative `psi0(xi; v) = max{<zeta, v>: zeta in d psi(xi)}`.
    pub fn psi0(&self, xi: Vec2, v: Vec2) -> f64 {
        let r = norm(xi);
        if r <= self.tol_zero {
            self.a * norm(v)
        } else {
            self.omega_unchecked(r) * dot(xi, v) / r
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn benchmark() -> ExponentialDecayPotential {
        ExponentialDecayPotential::new(0.004, 0.002, 100.0).unwrap()
    }

    /// Composite Simpson on [0, r]; independent of the closed form.
    fn integrate_omega(p: &ExponentialDecayPotential, r: f64) -> f64 {
        let n = 20_000;
        let h = r / n as f64;
        let f = |t: f64| (p.a - p.b) * (-p.beta * t).exp() + p.b;
        let mut s = f(0.0) + f(r);
        for i in 1..n {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn parameters_are_validated() {
        assert!(ExponentialDecayPotential::new(0.002, 0.004, 100.0).is_err());
        assert!(ExponentialDecayPotential::new(0.004, 0.0, 100.0).is_err());
        assert!(ExponentialDecayPotential::new(0.004, 0.002, 0.0).is_err());
        assert!((benchmark().m() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn omega_values() {
        let p = benchmark();
        assert_eq!(p.omega(0.0).unwrap(), 0.004);
        assert!((p.omega(100.0 / p.beta).unwrap() - p.b).abs() < 1e-12);
        assert!((p.omega(0.01).unwrap() - 0.002_735_758_882_342_885).abs() < 1e-15);
        assert!(matches!(p.omega(-1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn psi_matches_quadrature() {
        let p = benchmark();
        assert_eq!(p.psi([0.0, 0.0]), 0.0);
        assert_eq!(ExponentialDecayPotential::linear().psi([3.0, -1.0]), 0.0);
        let mut state = 12345u64;
        let mut next = || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..100 {
            let xi = [4.0 * next() - 2.0, 4.0 * next() - 2.0];
            let exact = integrate_omega(&p, norm(xi));
            assert!((p.psi(xi) - exact).abs() < 1e-10);
        }
    }

    #[test]
    fn subgradient_cases() {
        let p = benchmark();
        let g = p.subgradient([1.0, 0.0]);
        assert!((g[0] - p.omega(1.0).unwrap()).abs() < 1e-18 && g[1] == 0.0);
        assert_eq!(p.subgradient([0.0, 0.0]), [0.0, 0.0]);
        assert!((p.psi0([0.0, 0.0], [3.0, 4.0]) - 5.0 * p.a).abs() < 1e-18);
        let xi = [0.3, -0.2];
        assert!((p.psi0(xi, xi) - p.omega(norm(xi)).unwrap() * norm(xi)).abs() < 1e-18);
        assert!(p.psi0(xi, xi) >= 0.0);
    }

    fn vec2() -> impl Strategy<Value = Vec2> {
        // mix of tiny and order-one magnitudes so both regimes are sampled
        prop_oneof![
            [-2.0f64..2.0, -2.0f64..2.0],
            [-1e-2f64..1e-2, -1e-2f64..1e-2],
            Just([0.0, 0.0]),
        ]
    }

    proptest! {
        #[test]
        fn positively_homogeneous(xi in vec2(), v in vec2(), lambda in 0.0f64..10.0) {
            let p = benchmark();
            let lhs = p.psi0(xi, [lambda * v[0], lambda * v[1]]);
            prop_assert!((lhs - lambda * p.psi0(xi, v)).abs() <= 1e-15 * (1.0 + lhs.abs()));
        }

        #[test]
        fn subadditive(xi in vec2(), v1 in vec2(), v2 in vec2()) {
            let p = benchmark();
            let sum = [v1[0] + v2[0], v1[1] + v2[1]];
            prop_assert!(p.psi0(xi, sum) <= p.psi0(xi, v1) + p.psi0(xi, v2) + 1e-12);
        }

        #[test]
        fn relaxed_monotone(x1 in vec2(), x2 in vec2()) {
            let p = benchmark();
            let d = [x2[0] - x1[0], x2[1] - x1[1]];
            let lhs = p.psi0(x1, d) + p.psi0(x2, [-d[0], -d[1]]);
            prop_assert!(lhs <= p.m() * dot(d, d) + 1e-12);
        }

        #[test]
        fn bounded_growth(xi in vec2(), v in vec2()) {
            let p = benchmark();
            prop_assert!(norm(p.subgradient(xi)) <= p.a + 1e-15);
            prop_assert!(p.psi0(xi, v).abs() <= p.a * norm(v) + 1e-15);
        }
    }
}
