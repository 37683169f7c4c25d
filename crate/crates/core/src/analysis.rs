//! Error norms, convergence orders and the mesh-refinement study driver.
//!
//! A discrete reference must live on a structured mesh nested in the coarse
//! one (same diagonal convention, level at least as fine). Volume integrals of
//! the difference are then taken over the fine elements, each of which lies
//! inside exactly one coarse element, so the quadrature is exact for the
//! piecewise-linear difference. Jump terms are integrated over the coarse face
//! set, each coarse face split into the fine faces that cover it.

use std::io::Write;

use crate::assembly::{assemble_bilinear, assemble_load, ProblemCoefficients};
use crate::error::{Error, Result};
use crate::mesh::{build_structured, Point};
use crate::nonsmooth::ExponentialDecayPotential;
use crate::problem;
use crate::space::{cross, tangential_jump, DgSpace, DofVector, Vec2};
use crate::uzawa::{HviSolver, UzawaConfig, UzawaResult};

/// Field the computed solution is compared against.
#[derive(Clone, Copy)]
pub enum Reference<'a> {
    Analytic {
        field: &'a dyn Fn(Point) -> Vec2,
        curl: &'a dyn Fn(Point) -> f64,
    },
    Discrete {
        space: &'a DgSpace,
        dofs: &'a DofVector,
    },
}

impl<'a> Reference<'a> {
    /// The exact solution of the benchmark with the nonsmooth term switched off.
    pub fn exact_linear() -> Reference<'static> {
        Reference::Analytic {
            field: &problem::exact_linear,
            curl: &problem::exact_linear_curl,
        }
    }
}

fn check_nested(coarse: &DgSpace, fine: &DgSpace) -> Result<()> {
    match (coarse.mesh().level(), fine.mesh().level()) {
        (Some(c), Some(f)) if f >= c => Ok(()),
        (Some(c), Some(f)) => Err(Error::Usage(format!(
            "reference level {f} is coarser than the solution level {c}"
        ))),
        _ => Err(Error::Usage(
            "nested comparison needs two structured meshes".into(),
        )),
    }
}

fn centroid(space: &DgSpace, k: usize) -> Point {
    space.geometry(k).to_physical([1.0 / 3.0, 1.0 / 3.0])
}

/// Coarse element containing fine element `k`.
fn parent(coarse: &DgSpace, fine: &DgSpace, k: usize) -> Result<usize> {
    coarse.mesh().locate(centroid(fine, k))
}

/// Evaluates a coarse field at a physical point through structured location.
pub fn eval_located(space: &DgSpace, dofs: &DofVector, p: Point) -> Result<Vec2> {
    Ok(space.eval_at(dofs, space.mesh().locate(p)?, p))
}

struct Parts {
    l2: f64,
    curl: f64,
}

/// Squared L2 and broken-curl norms of `E - E_ref`.
fn volume_parts(space: &DgSpace, e: &DofVector, reference: &Reference<'_>) -> Result<Parts> {
    space.check(e)?;
    let nq = space.rule().len();
    let mut l2 = 0.0;
    let mut curl = 0.0;
    match reference {
        Reference::Analytic {
            field,
            curl: ref_curl,
        } => {
            let samples = space.sample(e);
            for k in 0..space.num_elements() {
                let ck = space.curl(e, k);
                for q in 0..nq {
                    let (x, w) = space.quad_point(k, q);
                    let r = field(x);
                    let v = samples.values[k * nq + q];
                    l2 += w * ((v[0] - r[0]).powi(2) + (v[1] - r[1]).powi(2));
                    curl += w * (ck - ref_curl(x)).powi(2);
                }
            }
        }
        Reference::Discrete { space: fine, dofs } => {
            check_nested(space, fine)?;
            fine.check(dofs)?;
            let samples = fine.sample(dofs);
            for k in 0..fine.num_elements() {
                let kc = parent(space, fine, k)?;
                let dc = space.curl(e, kc) - fine.curl(dofs, k);
                curl += fine.geometry(k).area() * dc * dc;
                for q in 0..nq {
                    let (x, w) = fine.quad_point(k, q);
                    let v = space.eval_at(e, kc, x);
                    let r = samples.values[k * nq + q];
                    l2 += w * ((v[0] - r[0]).powi(2) + (v[1] - r[1]).powi(2));
                }
            }
        }
    }
    Ok(Parts { l2, curl })
}

/// `sum_f alpha ||[[E - E_ref]]||^2_f` over the faces of the coarse mesh.
fn jump_part(space: &DgSpace, e: &DofVector, reference: &Reference<'_>, eta: f64) -> Result<f64> {
    let mesh = space.mesh();
    let (segments, fine) = match reference {
        Reference::Analytic { .. } => (1usize, None),
        Reference::Discrete { space: fine, dofs } => {
            let shift = fine.mesh().level().unwrap() - mesh.level().unwrap();
            (1usize << shift, Some((*fine, *dofs)))
        }
    };
    let delta = match fine {
        Some((fs, _)) => 1e-3 * fs.mesh().grid_spacing(),
        None => 0.0,
    };
    let mut total = 0.0;
    for face in space.faces() {
        let alpha = eta / face.h_f;
        let n = face.normal;
        let seg_len = face.length / segments as f64;
        for seg in 0..segments {
            for (s, w) in space.edge_rule().iter() {
                let t = (seg as f64 + s[0]) / segments as f64;
                let x = face.point(mesh, t);
                let left = space.eval_at(e, face.left, x);
                let right = face.right.map(|r| space.eval_at(e, r, x));
                let own = tangential_jump(face, left, right)?;
                let other = match (reference, fine) {
                    (Reference::Analytic { field, .. }, _) => {
                        if face.is_boundary() {
                            cross(n, field(x))
                        } else {
                            0.0
                        }
                    }
                    (Reference::Discrete { .. }, Some((fs, fd))) => {
                        let kl = fs
                            .mesh()
                            .locate([x[0] - delta * n[0], x[1] - delta * n[1]])?;
                        let fl = fs.eval_at(fd, kl, x);
                        if face.is_boundary() {
                            cross(n, fl)
                        } else {
                            let kr = fs
                                .mesh()
                                .locate([x[0] + delta * n[0], x[1] + delta * n[1]])?;
                            let fr = fs.eval_at(fd, kr, x);
                            cross(n, fl) - cross(n, fr)
                        }
                    }
                    _ => unreachable!(),
                };
                total += w * seg_len * alpha * (own - other).powi(2);
            }
        }
    }
    Ok(total)
}

/// `||E - E_ref||_{0, Omega}`.
pub fn l2_error(space: &DgSpace, e: &DofVector, reference: &Reference<'_>) -> Result<f64> {
    Ok(volume_parts(space, e, reference)?.l2.sqrt())
}

/// `||E - E_ref||_h` with penalty weight `eta / h_f` on the coarse faces.
pub fn energy_error(
    space: &DgSpace,
    e: &DofVector,
    reference: &Reference<'_>,
    eta: f64,
) -> Result<f64> {
    let parts = volume_parts(space, e, reference)?;
    let jumps = jump_part(space, e, reference, eta)?;
    Ok((parts.l2 + parts.curl + jumps).sqrt())
}

/// Orders `log2(e_{i-1} / e_i)` for errors under successive mesh halving.
/// Entries involving a non-positive or non-finite error are `None`.
pub fn eoc(errors: &[f64]) -> Result<Vec<Option<f64>>> {
    if errors.len() < 2 {
        return Err(Error::Usage(
            "convergence orders need at least two errors".into(),
        ));
    }
    Ok(errors
        .windows(2)
        .map(|w| {
            let ok = |e: f64| e > 0.0 && e.is_finite();
            (ok(w[0]) && ok(w[1])).then(|| (w[0] / w[1]).log2())
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Hvi,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceSpec {
    Analytic,
    Nested(u32),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub levels: Vec<u32>,
    pub reference: ReferenceSpec,
    pub eta: f64,
    pub a: f64,
    pub b: f64,
    pub beta: f64,
    pub eps_stop: f64,
    pub l_max: usize,
    pub mode: Mode,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            levels: vec![1, 2, 3, 4],
            reference: ReferenceSpec::Nested(6),
            eta: 1e3,
            a: 0.004,
            b: 0.002,
            beta: 100.0,
            eps_stop: 1e-10,
            l_max: 200,
            mode: Mode::Hvi,
        }
    }
}

impl StudyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.levels.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter(
                "levels must be strictly increasing".into(),
            ));
        }
        if let (ReferenceSpec::Nested(r), Some(&max)) = (self.reference, self.levels.last()) {
            if r <= max {
                return Err(Error::InvalidParameter(format!(
                    "nested reference level {r} must exceed the finest study level {max}"
                )));
            }
        }
        let max_level = match self.reference {
            ReferenceSpec::Nested(r) => r.max(self.levels.last().copied().unwrap_or(0)),
            ReferenceSpec::Analytic => self.levels.last().copied().unwrap_or(0),
        };
        if max_level > crate::mesh::MAX_LEVEL {
            return Err(Error::Capacity {
                level: max_level,
                max: crate::mesh::MAX_LEVEL,
            });
        }
        ProblemCoefficients::new(1.0, 1.0, self.eta)?;
        self.uzawa().validate()?;
        self.potential()?;
        Ok(())
    }

    pub fn potential(&self) -> Result<ExponentialDecayPotential> {
        match self.mode {
            Mode::Linear => Ok(ExponentialDecayPotential::linear()),
            Mode::Hvi => ExponentialDecayPotential::new(self.a, self.b, self.beta),
        }
    }

    pub fn coefficients(&self) -> Result<ProblemCoefficients> {
        ProblemCoefficients::new(1.0, 1.0, self.eta)
    }

    pub fn uzawa(&self) -> UzawaConfig {
        UzawaConfig {
            eps_stop: self.eps_stop,
            l_max: self.l_max,
        }
    }
}

/// Solution of the benchmark on one mesh level.
#[derive(Debug)]
pub struct LevelSolution {
    pub space: DgSpace,
    pub result: UzawaResult,
}

/// Assembles and solves the benchmark problem on `level`.
pub fn solve_level(level: u32, config: &StudyConfig) -> Result<LevelSolution> {
    let space = DgSpace::new(build_structured(level)?)?;
    let coeffs = config.coefficients()?;
    let pot = config.potential()?;
    let matrix = assemble_bilinear(&space, &coeffs);
    let f = assemble_load(&space, problem::source);
    let result = HviSolver::new(&space, matrix, &coeffs)?.solve(&f, &pot, &config.uzawa())?;
    Ok(LevelSolution { space, result })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub level: u32,
    pub h: f64,
    pub dofs: usize,
    pub l2_error: f64,
    pub l2_order: Option<f64>,
    pub energy_error: f64,
    pub energy_order: Option<f64>,
    pub uzawa_iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConvergenceReport {
    pub rows: Vec<ReportRow>,
    /// Iterations used by the nested reference solve, if any.
    pub reference_iterations: Option<usize>,
}

fn sig6(v: f64) -> String {
    format!("{v:.5e}")
}

impl ConvergenceReport {
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(
            out,
            "level,h,dofs,l2_error,l2_order,energy_error,energy_order,uzawa_iterations,converged"
        )?;
        let order = |o: Option<f64>| o.map(|v| format!("{v:.4}")).unwrap_or_else(|| "-".into());
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                r.level,
                sig6(r.h),
                r.dofs,
                sig6(r.l2_error),
                order(r.l2_order),
                sig6(r.energy_error),
                order(r.energy_order),
                r.uzawa_iterations,
                r.converged
            )?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }
}

/// Solves every study level, measures both errors against the configured
/// reference and fills in the orders. A level whose Uzawa loop hits `l_max`
/// is kept with `converged = false`.
pub fn run_study(config: &StudyConfig) -> Result<ConvergenceReport> {
    config.validate()?;
    if config.levels.is_empty() {
        return Ok(ConvergenceReport::default());
    }
    let reference_solution = match config.reference {
        ReferenceSpec::Nested(level) => {
            let sol = solve_level(level, config)?;
            if !sol.result.converged {
                log::warn!("reference solve on level {level} did not converge");
            }
            Some(sol)
        }
        ReferenceSpec::Analytic => None,
    };
    let exact = Reference::exact_linear();
    let reference = match &reference_solution {
        Some(sol) => Reference::Discrete {
            space: &sol.space,
            dofs: &sol.result.e,
        },
        None => exact,
    };

    let mut rows: Vec<ReportRow> = Vec::with_capacity(config.levels.len());
    for &level in &config.levels {
        let sol = solve_level(level, config)?;
        let l2 = l2_error(&sol.space, &sol.result.e, &reference)?;
        let en = energy_error(&sol.space, &sol.result.e, &reference, config.eta)?;
        log::info!(
            "level {level}: L2 {l2:.5e}, energy {en:.5e}, {} Uzawa iterations",
            sol.result.iterations
        );
        let h = sol.space.mesh().grid_spacing();
        let (l2_order, energy_order) = match rows.last() {
            Some(prev) => {
                let ratio = (prev.h / h).log2();
                let o = |a: f64, b: f64| eoc(&[a, b]).ok().and_then(|v| v[0]).map(|v| v / ratio);
                (o(prev.l2_error, l2), o(prev.energy_error, en))
            }
            None => (None, None),
        };
        rows.push(ReportRow {
            level,
            h,
            dofs: sol.space.num_dofs(),
            l2_error: l2,
            l2_order,
            energy_error: en,
            energy_order,
            uzawa_iterations: sol.result.iterations,
            converged: sol.result.converged,
        });
    }
    Ok(ConvergenceReport {
        rows,
        reference_iterations: reference_solution.map(|s| s.result.iterations),
    })
}
