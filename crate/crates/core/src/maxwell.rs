//! Backward Euler time stepping for the eddy-current Maxwell system with a
//! nonmonotone current law.
//!
//! Each step solves the stationary inequality with `eps = eps~/k`,
//! `mu = mu~/k` and load `l~ = l^n + curl(mu~^-1 B^{n-1}) + eps E^{n-1}`,
//! then updates `B^n = B^{n-1} - k curl E^n`. In 2D `B` is the out-of-plane
//! component, stored in the broken scalar P1 space, and `curl B = (dB/dy, -dB/dx)`
//! is taken elementwise with no face terms.

use std::io::Write;

use crate::assembly::{
    assemble_bilinear, assemble_subgradient_load, LoadFunctional, ProblemCoefficients,
};
use crate::error::{Error, Result};
use crate::mesh::Point;
use crate::nonsmooth::ExponentialDecayPotential;
use crate::space::{DgSpace, DofVector, QuadratureField, ScalarDgField, Vec2};
use crate::uzawa::{HviSolver, UzawaConfig, UzawaResult};

#[derive(Debug, Clone, PartialEq)]
pub struct MaxwellState {
    pub e: DofVector,
    pub b: ScalarDgField,
    pub t: f64,
    pub k: f64,
    pub tilde_eps: f64,
    pub tilde_mu: f64,
}

impl MaxwellState {
    pub fn new(space: &DgSpace, k: f64, tilde_eps: f64, tilde_mu: f64) -> Result<Self> {
        for (name, v) in [
            ("time step", k),
            ("permittivity", tilde_eps),
            ("permeability", tilde_mu),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        Ok(MaxwellState {
            e: space.zeros(),
            b: ScalarDgField::zeros(space.num_elements()),
            t: 0.0,
            k,
            tilde_eps,
            tilde_mu,
        })
    }

    /// Scaled coefficients `eps = eps~/k`, `mu = mu~/k` of the per-step problem.
    pub fn coefficients(&self, eta: f64) -> Result<ProblemCoefficients> {
        ProblemCoefficients::new(self.tilde_eps / self.k, self.tilde_mu / self.k, eta)
    }

    fn check(&self, space: &DgSpace) -> Result<()> {
        space.check(&self.e)?;
        if self.b.values.len() != 3 * space.num_elements() {
            return Err(Error::DimensionMismatch {
                expected: 3 * space.num_elements(),
                actual: self.b.values.len(),
            });
        }
        Ok(())
    }
}

/// Elementwise `curl(B e_z) = (dB/dy, -dB/dx)` of a broken scalar field.
pub fn scalar_curl(space: &DgSpace, b: &ScalarDgField, element: usize) -> Vec2 {
    let g = space.geometry(element).grad_hat;
    let vals = b.element(element);
    let grad = (0..3).fold([0.0, 0.0], |acc, a| {
        [acc[0] + vals[a] * g[a][0], acc[1] + vals[a] * g[a][1]]
    });
    [grad[1], -grad[0]]
}

/// Load `<l~, v> = (l, v) + (curl_h(mu~^-1 B), v) + (eps E, v)` for the next step.
pub fn build_step_rhs<F>(space: &DgSpace, state: &MaxwellState, source: F) -> Result<LoadFunctional>
where
    F: Fn(Point) -> Vec2,
{
    state.check(space)?;
    let eps = state.tilde_eps / state.k;
    let nq = space.rule().len();
    let e_samples = space.sample(&state.e);
    let mut values = Vec::with_capacity(space.num_quad_points());
    for k in 0..space.num_elements() {
        let cb = scalar_curl(space, &state.b, k);
        for q in 0..nq {
            let (x, _) = space.quad_point(k, q);
            let l = source(x);
            let e = e_samples.values[k * nq + q];
            values.push([
                l[0] + cb[0] / state.tilde_mu + eps * e[0],
                l[1] + cb[1] / state.tilde_mu + eps * e[1],
            ]);
        }
    }
    assemble_subgradient_load(space, &QuadratureField { values })
}

/// `B^n = B^{n-1} - k curl_h E^n`; exact in the broken P1 space since `curl_h E^n`
/// is piecewise constant.
pub fn update_b(space: &DgSpace, state: &MaxwellState, e_new: &DofVector) -> Result<ScalarDgField> {
    state.check(space)?;
    space.check(e_new)?;
    let mut b = state.b.clone();
    for k in 0..space.num_elements() {
        let c = space.curl(e_new, k);
        for v in &mut b.values[3 * k..3 * k + 3] {
            *v -= state.k * c;
        }
    }
    Ok(b)
}

/// Factored per-step operator for a fixed time step.
#[derive(Debug)]
pub struct MaxwellStepper<'a> {
    space: &'a DgSpace,
    solver: HviSolver<'a>,
    k: f64,
    tilde_eps: f64,
    tilde_mu: f64,
}

impl<'a> MaxwellStepper<'a> {
    pub fn new(space: &'a DgSpace, state: &MaxwellState, eta: f64) -> Result<Self> {
        let coeffs = state.coefficients(eta)?;
        let matrix = assemble_bilinear(space, &coeffs);
        Ok(MaxwellStepper {
            space,
            solver: HviSolver::new(space, matrix, &coeffs)?,
            k: state.k,
            tilde_eps: state.tilde_eps,
            tilde_mu: state.tilde_mu,
        })
    }

    pub fn solver(&self) -> &HviSolver<'a> {
        &self.solver
    }

    /// One backward Euler step with source `l^n` evaluated at `t + k`.
    pub fn advance<F>(
        &self,
        state: &MaxwellState,
        source: F,
        pot: &ExponentialDecayPotential,
        config: &UzawaConfig,
    ) -> Result<(MaxwellState, UzawaResult)>
    where
        F: Fn(Point) -> Vec2,
    {
        if state.k != self.k || state.tilde_eps != self.tilde_eps || state.tilde_mu != self.tilde_mu
        {
            return Err(Error::Usage(
                "state parameters differ from the factored stepper".into(),
            ));
        }
        let rhs = build_step_rhs(self.space, state, source)?;
        let result = self.solver.solve(&rhs, pot, config)?;
        let b = update_b(self.space, state, &result.e)?;
        let next = MaxwellState {
            e: result.e.clone(),
            b,
            t: state.t + state.k,
            ..*state
        };
        Ok((next, result))
    }
}

/// Writes `elem_id,B` with the element mean of `B`.
pub fn write_b_csv<W: Write>(b: &ScalarDgField, mut out: W) -> std::io::Result<()> {
    writeln!(out, "elem_id,B")?;
    for (k, vals) in b.values.chunks_exact(3).enumerate() {
        writeln!(out, "{k},{:.12e}", (vals[0] + vals[1] + vals[2]) / 3.0)?;
    }
    Ok(())
}
