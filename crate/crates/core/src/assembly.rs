//! Assembly of the symmetric interior penalty form
//!
//! ```text
//! a_h(u, v) = (eps u, v) + (mu^-1 curl_h u, curl_h v)
//!           - sum_f <[[u]], {mu^-1 curl_h v}>_f - sum_f <[[v]], {mu^-1 curl_h u}>_f
//!           + sum_f <alpha [[u]], [[v]]>_f,        alpha = eta / h_f
//! ```
//!
//! over all faces, with `{w} = w` and `[[v]] = n x v` on boundary faces.

use crate::error::{Error, Result};
use crate::mesh::Point;
use crate::space::{basis_values, cross, DgSpace, DofVector, QuadratureField, Vec2, LOCAL_DOFS};
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemCoefficients {
    pub epsilon: f64,
    pub mu: f64,
    pub eta: f64,
}

impl ProblemCoefficients {
    pub fn new(epsilon: f64, mu: f64, eta: f64) -> Result<Self> {
        for (name, v) in [("epsilon", epsilon), ("mu", mu), ("eta", eta)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        Ok(ProblemCoefficients { epsilon, mu, eta })
    }

    /// Penalty weight on a face of size `h_f`.
    pub fn alpha(&self, h_f: f64) -> f64 {
        self.eta / h_f
    }
}

impl Default for ProblemCoefficients {
    fn default() -> Self {
        ProblemCoefficients {
            epsilon: 1.0,
            mu: 1.0,
            eta: 1.0e3,
        }
    }
}

/// Right-hand side functional; `<f, v> = values . v`.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadFunctional {
    pub values: Vec<f64>,
}

impl LoadFunctional {
    pub fn zeros(len: usize) -> Self {
        LoadFunctional {
            values: vec![0.0; len],
        }
    }

    pub fn apply(&self, v: &DofVector) -> f64 {
        self.values.iter().zip(&v.values).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// `self - other`
    pub fn minus(&self, other: &LoadFunctional) -> LoadFunctional {
        LoadFunctional {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn plus(&self, other: &LoadFunctional) -> LoadFunctional {
        LoadFunctional {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

#[derive(Clone, Copy)]
enum Terms {
    Full,
    PenaltyOnly,
}

pub fn assemble_bilinear(space: &DgSpace, coeffs: &ProblemCoefficients) -> CsrMatrix {
    assemble(space, coeffs, Terms::Full)
}

/// Only the `sum_f <alpha [[u]], [[v]]>_f` part of the form.
pub fn assemble_penalty(space: &DgSpace, coeffs: &ProblemCoefficients) -> CsrMatrix {
    assemble(space, coeffs, Terms::PenaltyOnly)
}

fn assemble(space: &DgSpace, coeffs: &ProblemCoefficients, terms: Terms) -> CsrMatrix {
    let nel = space.num_elements();
    let nfaces = space.faces().len();
    let mut triplets = Vec::with_capacity(36 * nel + 4 * 36 * nfaces);
    let mu_inv = 1.0 / coeffs.mu;

    if let Terms::Full = terms {
        for k in 0..nel {
            let g = space.geometry(k);
            let off = space.offset(k);
            let curls = g.basis_curls();
            let mut block = [[0.0; LOCAL_DOFS]; LOCAL_DOFS];
            for (q, (_, w)) in space.rule().iter().enumerate() {
                let vals = basis_values(space.quad_hats(q));
                let wq = w * g.det * coeffs.epsilon;
                for i in 0..LOCAL_DOFS {
                    for j in 0..LOCAL_DOFS {
                        block[i][j] += wq * (vals[i][0] * vals[j][0] + vals[i][1] * vals[j][1]);
                    }
                }
            }
            for i in 0..LOCAL_DOFS {
                for j in 0..LOCAL_DOFS {
                    block[i][j] += mu_inv * g.area() * curls[i] * curls[j];
                    if block[i][j] != 0.0 {
                        triplets.push((off + i, off + j, block[i][j]));
                    }
                }
            }
        }
    }

    let mesh = space.mesh();
    for face in space.faces() {
        let alpha = coeffs.alpha(face.h_f);
        let n = face.normal;
        let mut sides = vec![(face.left, 1.0)];
        if let Some(r) = face.right {
            sides.push((r, -1.0));
        }
        let theta = if face.is_boundary() { 1.0 } else { 0.5 };
        let ns = sides.len();
        // blocks[s][t][i][j]: test side s, trial side t
        let mut blocks = vec![[[0.0; LOCAL_DOFS]; LOCAL_DOFS]; ns * ns];
        let curls: Vec<_> = sides
            .iter()
            .map(|&(k, _)| space.geometry(k).basis_curls().map(|c| theta * mu_inv * c))
            .collect();
        for (s, w) in space.edge_rule().iter() {
            let x = face.point(mesh, s[0]);
            let wf = w * face.length;
            let jumps: Vec<[f64; LOCAL_DOFS]> = sides
                .iter()
                .map(|&(k, sign)| {
                    let vals = basis_values(space.geometry(k).hats_at(x));
                    vals.map(|v| cross([sign * n[0], sign * n[1]], v))
                })
                .collect();
            for a in 0..ns {
                for b in 0..ns {
                    let blk = &mut blocks[a * ns + b];
                    for i in 0..LOCAL_DOFS {
                        for j in 0..LOCAL_DOFS {
                            let mut v = alpha * jumps[a][i] * jumps[b][j];
                            if let Terms::Full = terms {
                                v -= jumps[b][j] * curls[a][i] + jumps[a][i] * curls[b][j];
                            }
                            blk[i][j] += wf * v;
                        }
                    }
                }
            }
        }
        for a in 0..ns {
            for b in 0..ns {
                let ra = space.offset(sides[a].0);
                let cb = space.offset(sides[b].0);
                for i in 0..LOCAL_DOFS {
                    for j in 0..LOCAL_DOFS {
                        let v = blocks[a * ns + b][i][j];
                        if v != 0.0 {
                            triplets.push((ra + i, cb + j, v));
                        }
                    }
                }
            }
        }
    }
    CsrMatrix::from_triplets(space.num_dofs(), triplets).expect("indices come from the space")
}

/// `values_i = int_Omega source . phi_i`, by the triangle rule.
pub fn assemble_load<F>(space: &DgSpace, source: F) -> LoadFunctional
where
    F: Fn(Point) -> Vec2,
{
    let nq = space.rule().len();
    let mut samples = Vec::with_capacity(space.num_quad_points());
    for k in 0..space.num_elements() {
        for q in 0..nq {
            samples.push(source(space.quad_point(k, q).0));
        }
    }
    quadrature_load(space, &QuadratureField { values: samples })
}

/// `values_i = int_Omega lambda . phi_i` for `lambda` sampled on the triangle rule.
pub fn assemble_subgradient_load(
    space: &DgSpace,
    lambda: &QuadratureField,
) -> Result<LoadFunctional> {
    if lambda.values.len() != space.num_quad_points() {
        return Err(Error::DimensionMismatch {
            expected: space.num_quad_points(),
            actual: lambda.values.len(),
        });
    }
    Ok(quadrature_load(space, lambda))
}

fn quadrature_load(space: &DgSpace, samples: &QuadratureField) -> LoadFunctional {
    let nq = space.rule().len();
    let mut out = LoadFunctional::zeros(space.num_dofs());
    for k in 0..space.num_elements() {
        let det = space.geometry(k).det;
        let off = space.offset(k);
        for q in 0..nq {
            let w = space.rule().weights[q] * det;
            let v = samples.values[k * nq + q];
            let hat = space.quad_hats(q);
            for a in 0..3 {
                out.values[off + 2 * a] += w * v[0] * hat[a];
                out.values[off + 2 * a + 1] += w * v[1] * hat[a];
            }
        }
    }
    out
}
