//! Uzawa iteration for the discrete hemivariational inequality
//!
//! ```text
//! a_h(E, v) + int psi0(E; v) >= <f, v>    for all v
//! ```
//!
//! Each sweep freezes the multiplier `lambda^l = omega(|E^{l-1}|) E^{l-1}/|E^{l-1}|`
//! at the triangle quadrature points and solves the linear system
//! `A E^l = f - L(lambda^l)` with one Cholesky factor of `A` shared by all sweeps.

use std::io::Write;

use crate::assembly::{assemble_subgradient_load, LoadFunctional, ProblemCoefficients};
use crate::error::{Error, Result};
use crate::linalg::CholeskyFactor;
use crate::nonsmooth::ExponentialDecayPotential;
use crate::space::{DgSpace, DofVector, QuadratureField};
use crate::sparse::CsrMatrix;

/// Denominators below this make a relative-change test vacuous.
const TINY: f64 = 1e-30;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UzawaConfig {
    pub eps_stop: f64,
    pub l_max: usize,
}

impl Default for UzawaConfig {
    fn default() -> Self {
        UzawaConfig {
            eps_stop: 1e-10,
            l_max: 200,
        }
    }
}

impl UzawaConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps_stop > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "eps_stop must be positive, got {}",
                self.eps_stop
            )));
        }
        if self.l_max == 0 {
            return Err(Error::InvalidParameter("l_max must be at least 1".into()));
        }
        Ok(())
    }
}

/// Starting field `E^0`.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialGuess {
    /// `A E^0 = f`
    LinearSolve,
    Zero,
    Given(DofVector),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub iter: usize,
    pub rel_change_e: f64,
    /// `None` while `||lambda^{l-1}||` is zero.
    pub rel_change_lambda: Option<f64>,
    pub energy: f64,
}

#[derive(Debug, Clone)]
pub struct UzawaResult {
    pub e: DofVector,
    pub lambda: QuadratureField,
    pub iterations: usize,
    pub converged: bool,
    pub history: Vec<IterationRecord>,
}

impl UzawaResult {
    /// Writes `iter,rel_dE,rel_dlambda,energy`; an untested lambda change is left empty.
    pub fn write_log_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "iter,rel_dE,rel_dlambda,energy")?;
        for r in &self.history {
            let dl = r
                .rel_change_lambda
                .map(|v| format!("{v:.6e}"))
                .unwrap_or_default();
            writeln!(
                out,
                "{},{:.6e},{},{:.12e}",
                r.iter, r.rel_change_e, dl, r.energy
            )?;
        }
        Ok(())
    }
}

/// Multiplier field `omega(|E|) E/|E|` (zero at the kink) at every quadrature point.
pub fn multiplier(pot: &ExponentialDecayPotential, samples: &QuadratureField) -> QuadratureField {
    QuadratureField {
        values: samples.values.iter().map(|&e| pot.subgradient(e)).collect(),
    }
}

/// `E(v) = 1/2 a_h(v, v) + int psi(v) - <f, v>`.
pub fn energy_functional(
    matrix: &CsrMatrix,
    f: &LoadFunctional,
    pot: &ExponentialDecayPotential,
    space: &DgSpace,
    v: &DofVector,
) -> f64 {
    let quad = 0.5 * matrix.bilinear(&v.values, &v.values);
    let samples = space.sample(v);
    let nq = space.rule().len();
    let mut nonsmooth = 0.0;
    for k in 0..space.num_elements() {
        let det = space.geometry(k).det;
        for q in 0..nq {
            nonsmooth += space.rule().weights[q] * det * pot.psi(samples.values[k * nq + q]);
        }
    }
    quad + nonsmooth - f.apply(v)
}

/// Factored operator plus the mesh it lives on.
#[derive(Debug)]
pub struct HviSolver<'a> {
    space: &'a DgSpace,
    matrix: CsrMatrix,
    factor: CholeskyFactor,
    coeffs: ProblemCoefficients,
}

impl<'a> HviSolver<'a> {
    /// Factors `matrix`; a failed factorization means the penalty is below the
    /// stability threshold and is reported as [`Error::PenaltyTooSmall`].
    pub fn new(
        space: &'a DgSpace,
        matrix: CsrMatrix,
        coeffs: &ProblemCoefficients,
    ) -> Result<Self> {
        if matrix.dim() != space.num_dofs() {
            return Err(Error::DimensionMismatch {
                expected: space.num_dofs(),
                actual: matrix.dim(),
            });
        }
        let factor = CholeskyFactor::new(&matrix).map_err(|e| match e {
            Error::NotPositiveDefinite(_) => Error::PenaltyTooSmall { eta: coeffs.eta },
            other => other,
        })?;
        Ok(HviSolver {
            space,
            matrix,
            factor,
            coeffs: *coeffs,
        })
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn coefficients(&self) -> &ProblemCoefficients {
        &self.coeffs
    }

    pub fn factor(&self) -> &CholeskyFactor {
        &self.factor
    }

    pub fn solve_linear(&self, rhs: &LoadFunctional) -> Result<DofVector> {
        Ok(DofVector {
            values: self.factor.solve(&rhs.values)?,
        })
    }

    pub fn solve(
        &self,
        f: &LoadFunctional,
        pot: &ExponentialDecayPotential,
        config: &UzawaConfig,
    ) -> Result<UzawaResult> {
        self.solve_from(f, pot, config, InitialGuess::LinearSolve)
    }

    pub fn solve_from(
        &self,
        f: &LoadFunctional,
        pot: &ExponentialDecayPotential,
        config: &UzawaConfig,
        initial: InitialGuess,
    ) -> Result<UzawaResult> {
        config.validate()?;
        let space = self.space;
        if f.values.len() != space.num_dofs() {
            return Err(Error::DimensionMismatch {
                expected: space.num_dofs(),
                actual: f.values.len(),
            });
        }
        if pot.m() >= self.coeffs.epsilon {
            log::warn!(
                "relaxed monotonicity constant m = {} is not below epsilon = {}; uniqueness is not guaranteed",
                pot.m(),
                self.coeffs.epsilon
            );
        }

        let mut e_prev = match initial {
            InitialGuess::LinearSolve => self.solve_linear(f)?,
            InitialGuess::Zero => space.zeros(),
            InitialGuess::Given(v) => {
                space.check(&v)?;
                v
            }
        };
        let mut lambda_prev = QuadratureField {
            values: vec![[0.0; 2]; space.num_quad_points()],
        };
        let mut history = Vec::new();

        for l in 1..=config.l_max {
            let lambda = multiplier(pot, &space.sample(&e_prev));
            let rhs = f.minus(&assemble_subgradient_load(space, &lambda)?);
            let e = self.solve_linear(&rhs)?;

            let de = space.l2_norm(&difference(&e, &e_prev));
            let e_den = space.l2_norm(&e_prev);
            let e_ok = de <= config.eps_stop * e_den;

            let l_den = space.quadrature_field_norm(&lambda_prev);
            let (dl, l_ok) = if l_den < TINY {
                (None, true)
            } else {
                let diff = QuadratureField {
                    values: lambda
                        .values
                        .iter()
                        .zip(&lambda_prev.values)
                        .map(|(a, b)| [a[0] - b[0], a[1] - b[1]])
                        .collect(),
                };
                let dl = space.quadrature_field_norm(&diff);
                (Some(dl / l_den), dl <= config.eps_stop * l_den)
            };

            history.push(IterationRecord {
                iter: l,
                rel_change_e: if e_den < TINY { de } else { de / e_den },
                rel_change_lambda: dl,
                energy: energy_functional(&self.matrix, f, pot, space, &e),
            });

            if e_ok && l_ok {
                return Ok(UzawaResult {
                    e,
                    lambda,
                    iterations: l,
                    converged: true,
                    history,
                });
            }
            e_prev = e;
            lambda_prev = lambda;
        }
        log::warn!(
            "Uzawa iteration stopped at l_max = {} without meeting the tolerance",
            config.l_max
        );
        Ok(UzawaResult {
            e: e_prev,
            lambda: lambda_prev,
            iterations: config.l_max,
            converged: false,
            history,
        })
    }
}

fn difference(a: &DofVector, b: &DofVector) -> DofVector {
    DofVector {
        values: a.values.iter().zip(&b.values).map(|(x, y)| x - y).collect(),
    }
}

/// Factors a copy of `matrix` and runs the iteration from the linear-solve start.
pub fn uzawa_solve(
    matrix: &CsrMatrix,
    f: &LoadFunctional,
    pot: &ExponentialDecayPotential,
    space: &DgSpace,
    coeffs: &ProblemCoefficients,
    config: &UzawaConfig,
) -> Result<UzawaResult> {
    HviSolver::new(space, matrix.clone(), coeffs)?.solve(f, pot, config)
}
