//! Broken vector P1 space on a triangulation.
//!
//! Each element carries six coefficients ordered vertex-major, component-minor:
//! local dof `2 * a + c` is the hat function of local vertex `a` times the unit
//! vector `e_c`. In 2D the curl of a vector field is the scalar
//! `dE_y/dx - dE_x/dy` and the tangential trace `n x v` is `n_x v_y - n_y v_x`.

use std::io::Write;

use crate::error::{Error, Result};
use crate::mesh::{enumerate_faces, Face, Mesh2D, Point};
use crate::quadrature::{gauss_edge3, triangle_degree4, EdgeRule, TriangleRule};

pub type Vec2 = [f64; 2];

/// Local coefficients per element for the vector P1 space.
pub const LOCAL_DOFS: usize = 6;

/// 2D cross product `n x v` (out-of-plane component).
#[inline]
pub fn cross(n: Vec2, v: Vec2) -> f64 {
    n[0] * v[1] - n[1] * v[0]
}

#[inline]
pub fn dot(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub fn norm(a: Vec2) -> f64 {
    a[0].hypot(a[1])
}

/// Affine map from the reference triangle onto one element.
#[derive(Debug, Clone, Copy)]
pub struct ElementGeometry {
    pub origin: Point,
    /// Columns are `p1 - p0` and `p2 - p0`.
    pub jacobian: [[f64; 2]; 2],
    pub det: f64,
    inverse: [[f64; 2]; 2],
    /// Constant gradients of the three barycentric hat functions.
    pub grad_hat: [Vec2; 3],
}

impl ElementGeometry {
    fn new(corners: [Point; 3]) -> Self {
        let [p0, p1, p2] = corners;
        let j = [
            [p1[0] - p0[0], p2[0] - p0[0]],
            [p1[1] - p0[1], p2[1] - p0[1]],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        assert!(det > 0.0, "element with non-positive orientation");
        let inverse = [
            [j[1][1] / det, -j[0][1] / det],
            [-j[1][0] / det, j[0][0] / det],
        ];
        // d(s)/dx = inverse row 0, d(t)/dx = inverse row 1
        let g1 = inverse[0];
        let g2 = inverse[1];
        let g0 = [-g1[0] - g2[0], -g1[1] - g2[1]];
        ElementGeometry {
            origin: p0,
            jacobian: j,
            det,
            inverse,
            grad_hat: [g0, g1, g2],
        }
    }

    pub fn area(&self) -> f64 {
        0.5 * self.det
    }

    pub fn to_physical(&self, r: Vec2) -> Point {
        let j = &self.jacobian;
        [
            self.origin[0] + j[0][0] * r[0] + j[0][1] * r[1],
            self.origin[1] + j[1][0] * r[0] + j[1][1] * r[1],
        ]
    }

    pub fn to_reference(&self, p: Point) -> Vec2 {
        let d = [p[0] - self.origin[0], p[1] - self.origin[1]];
        let m = &self.inverse;
        [
            m[0][0] * d[0] + m[0][1] * d[1],
            m[1][0] * d[0] + m[1][1] * d[1],
        ]
    }

    /// Barycentric coordinates of a physical point.
    pub fn hats_at(&self, p: Point) -> [f64; 3] {
        hats(self.to_reference(p))
    }

    /// Curls of the six local basis functions (constant on the element).
    pub fn basis_curls(&self) -> [f64; LOCAL_DOFS] {
        let mut c = [0.0; LOCAL_DOFS];
        for (a, g) in self.grad_hat.iter().enumerate() {
            c[2 * a] = -g[1];
            c[2 * a + 1] = g[0];
        }
        c
    }
}

fn hats(r: Vec2) -> [f64; 3] {
    [1.0 - r[0] - r[1], r[0], r[1]]
}

/// Values of the six vector basis functions given hat-function values.
#[inline]
pub fn basis_values(hat: [f64; 3]) -> [Vec2; LOCAL_DOFS] {
    [
        [hat[0], 0.0],
        [0.0, hat[0]],
        [hat[1], 0.0],
        [0.0, hat[1]],
        [hat[2], 0.0],
        [0.0, hat[2]],
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasisEval {
    pub values: [Vec2; LOCAL_DOFS],
    pub curls: [f64; LOCAL_DOFS],
}

/// Coefficient vector of a field in a [`DgSpace`].
#[derive(Debug, Clone, PartialEq)]
pub struct DofVector {
    pub values: Vec<f64>,
}

impl DofVector {
    pub fn zeros(len: usize) -> Self {
        DofVector {
            values: vec![0.0; len],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn element(&self, k: usize) -> &[f64] {
        &self.values[LOCAL_DOFS * k..LOCAL_DOFS * (k + 1)]
    }
}

/// 2-vectors sampled at every triangle quadrature point, element-major.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureField {
    pub values: Vec<Vec2>,
}

/// Scalar broken P1 field stored as three vertex values per element.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarDgField {
    pub values: Vec<f64>,
}

impl ScalarDgField {
    pub fn zeros(num_elements: usize) -> Self {
        ScalarDgField {
            values: vec![0.0; 3 * num_elements],
        }
    }

    pub fn element(&self, k: usize) -> [f64; 3] {
        [
            self.values[3 * k],
            self.values[3 * k + 1],
            self.values[3 * k + 2],
        ]
    }
}

/// Broken vector P^l space over a mesh (only `l = 1` is implemented).
#[derive(Debug, Clone)]
pub struct DgSpace {
    mesh: Mesh2D,
    degree: usize,
    faces: Vec<Face>,
    element_faces: Vec<[usize; 3]>,
    geometry: Vec<ElementGeometry>,
    rule: TriangleRule,
    edge_rule: EdgeRule,
    /// Hat values at the reference quadrature points.
    quad_hats: Vec<[f64; 3]>,
}

impl DgSpace {
    pub fn new(mesh: Mesh2D) -> Result<Self> {
        Self::with_degree(mesh, 1)
    }

    pub fn with_degree(mesh: Mesh2D, degree: usize) -> Result<Self> {
        if degree != 1 {
            return Err(Error::Unsupported(format!(
                "polynomial degree {degree} (only linear elements are built)"
            )));
        }
        let faces = enumerate_faces(&mesh)?;
        let mut element_faces = vec![[usize::MAX; 3]; mesh.num_triangles()];
        for (f, face) in faces.iter().enumerate() {
            element_faces[face.left][face.left_local] = f;
            if let (Some(r), Some(e)) = (face.right, face.right_local) {
                element_faces[r][e] = f;
            }
        }
        let geometry = (0..mesh.num_triangles())
            .map(|k| mesh.corners(k).map(ElementGeometry::new))
            .collect::<Result<Vec<_>>>()?;
        let rule = triangle_degree4();
        let quad_hats = rule.points.iter().map(|r| hats(*r)).collect();
        Ok(DgSpace {
            mesh,
            degree,
            faces,
            element_faces,
            geometry,
            rule,
            edge_rule: gauss_edge3(),
            quad_hats,
        })
    }

    pub fn mesh(&self) -> &Mesh2D {
        &self.mesh
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn element_faces(&self, k: usize) -> [usize; 3] {
        self.element_faces[k]
    }

    pub fn num_elements(&self) -> usize {
        self.mesh.num_triangles()
    }

    pub fn dofs_per_element(&self) -> usize {
        LOCAL_DOFS
    }

    pub fn num_dofs(&self) -> usize {
        LOCAL_DOFS * self.num_elements()
    }

    /// First global dof of element `k`.
    pub fn offset(&self, k: usize) -> usize {
        LOCAL_DOFS * k
    }

    pub fn geometry(&self, k: usize) -> &ElementGeometry {
        &self.geometry[k]
    }

    pub fn rule(&self) -> &TriangleRule {
        &self.rule
    }

    pub fn edge_rule(&self) -> &EdgeRule {
        &self.edge_rule
    }

    /// Hat values at reference quadrature point `q` (identical on every element).
    pub fn quad_hats(&self, q: usize) -> [f64; 3] {
        self.quad_hats[q]
    }

    pub fn num_quad_points(&self) -> usize {
        self.num_elements() * self.rule.len()
    }

    /// Physical location and weight of quadrature point `q` on element `k`.
    pub fn quad_point(&self, k: usize, q: usize) -> (Point, f64) {
        let g = &self.geometry[k];
        (
            g.to_physical(self.rule.points[q]),
            self.rule.weights[q] * g.det,
        )
    }

    pub fn zeros(&self) -> DofVector {
        DofVector::zeros(self.num_dofs())
    }

    pub fn check(&self, v: &DofVector) -> Result<()> {
        if v.len() != self.num_dofs() {
            return Err(Error::DimensionMismatch {
                expected: self.num_dofs(),
                actual: v.len(),
            });
        }
        Ok(())
    }

    fn check_element(&self, k: usize) -> Result<()> {
        if k >= self.num_elements() {
            return Err(Error::InvalidIndex {
                index: k,
                len: self.num_elements(),
            });
        }
        Ok(())
    }

    pub fn eval_basis(&self, element: usize, ref_point: Vec2) -> Result<BasisEval> {
        self.check_element(element)?;
        let tol = 1e-12;
        let [s, t] = ref_point;
        if s < -tol || t < -tol || s + t > 1.0 + tol {
            return Err(Error::Domain(format!(
                "reference point ({s}, {t}) lies outside the reference triangle"
            )));
        }
        Ok(BasisEval {
            values: basis_values(hats(ref_point)),
            curls: self.geometry[element].basis_curls(),
        })
    }

    pub fn eval_field(&self, dofs: &DofVector, element: usize, ref_point: Vec2) -> Result<Vec2> {
        self.check(dofs)?;
        let basis = self.eval_basis(element, ref_point)?;
        Ok(combine(dofs.element(element), &basis.values))
    }

    /// Evaluates the element polynomial of `element` at a physical point
    /// (extrapolating if the point lies outside the element).
    pub fn eval_at(&self, dofs: &DofVector, element: usize, p: Point) -> Vec2 {
        let hat = self.geometry[element].hats_at(p);
        combine(dofs.element(element), &basis_values(hat))
    }

    /// Elementwise curl, constant on each element.
    pub fn curl(&self, dofs: &DofVector, element: usize) -> f64 {
        let c = self.geometry[element].basis_curls();
        dofs.element(element)
            .iter()
            .zip(c)
            .map(|(u, c)| u * c)
            .sum()
    }

    /// Samples a coefficient vector at all triangle quadrature points.
    pub fn sample(&self, dofs: &DofVector) -> QuadratureField {
        let nq = self.rule.len();
        let mut values = Vec::with_capacity(self.num_quad_points());
        for k in 0..self.num_elements() {
            let local = dofs.element(k);
            for q in 0..nq {
                values.push(combine(local, &basis_values(self.quad_hats[q])));
            }
        }
        QuadratureField { values }
    }

    /// Element-by-element L2 projection of an analytic vector field.
    pub fn l2_project<F>(&self, field: F) -> DofVector
    where
        F: Fn(Point) -> Vec2,
    {
        let mut out = self.zeros();
        for k in 0..self.num_elements() {
            let g = &self.geometry[k];
            let area = g.area();
            assert!(area > 0.0, "singular local mass matrix on element {k}");
            // rhs_a,c = int f_c * hat_a
            let mut rhs = [[0.0; 2]; 3];
            for (q, (r, w)) in self.rule.iter().enumerate() {
                let fx = field(g.to_physical(*r));
                let wq = w * g.det;
                for a in 0..3 {
                    for c in 0..2 {
                        rhs[a][c] += wq * fx[c] * self.quad_hats[q][a];
                    }
                }
            }
            // scalar P1 mass = |K|/12 (I + 1 1^T), inverse = 12/|K| (I - 1 1^T / 4)
            let local = &mut out.values[self.offset(k)..self.offset(k) + LOCAL_DOFS];
            for c in 0..2 {
                let sum: f64 = rhs.iter().map(|r| r[c]).sum();
                for a in 0..3 {
                    local[2 * a + c] = 12.0 / area * (rhs[a][c] - 0.25 * sum);
                }
            }
        }
        out
    }

    /// Interpolates a field at the vertices of each element. Exact for
    /// fields that are linear on every element.
    pub fn interpolate<F>(&self, field: F) -> DofVector
    where
        F: Fn(Point) -> Vec2,
    {
        let mut out = self.zeros();
        for (k, tri) in self.mesh.triangles.iter().enumerate() {
            for (a, &v) in tri.iter().enumerate() {
                let fx = field(self.mesh.vertices[v]);
                out.values[self.offset(k) + 2 * a] = fx[0];
                out.values[self.offset(k) + 2 * a + 1] = fx[1];
            }
        }
        out
    }

    /// `||v||_{0,Omega}` by quadrature.
    pub fn l2_norm(&self, dofs: &DofVector) -> f64 {
        self.quadrature_field_norm(&self.sample(dofs))
    }

    pub fn quadrature_field_norm(&self, field: &QuadratureField) -> f64 {
        let nq = self.rule.len();
        let mut sum = 0.0;
        for k in 0..self.num_elements() {
            let det = self.geometry[k].det;
            for q in 0..nq {
                let v = field.values[k * nq + q];
                sum += self.rule.weights[q] * det * dot(v, v);
            }
        }
        sum.sqrt()
    }

    /// Tangential jump of `dofs` at parameter `s` along face `f`.
    pub fn face_jump(&self, dofs: &DofVector, f: usize, s: f64) -> f64 {
        let face = &self.faces[f];
        let p = face.point(&self.mesh, s);
        let left = self.eval_at(dofs, face.left, p);
        let right = face.right.map(|r| self.eval_at(dofs, r, p));
        tangential_jump(face, left, right).expect("face kind and traces agree")
    }

    /// Broken energy norm `||v||_h` with penalty `alpha = eta / h_f`.
    pub fn energy_norm(&self, dofs: &DofVector, eta: f64) -> f64 {
        let l2 = self.l2_norm(dofs);
        let curl2: f64 = (0..self.num_elements())
            .map(|k| self.geometry[k].area() * self.curl(dofs, k).powi(2))
            .sum();
        let jump2: f64 = (0..self.faces.len())
            .map(|f| {
                let face = &self.faces[f];
                let alpha = eta / face.h_f;
                self.edge_rule
                    .iter()
                    .map(|(s, w)| w * face.length * alpha * self.face_jump(dofs, f, s[0]).powi(2))
                    .sum::<f64>()
            })
            .sum();
        (l2 * l2 + curl2 + jump2).sqrt()
    }

    /// Writes `elem_id,xq,yq,Ex,Ey` at every triangle quadrature point.
    pub fn write_field_csv<W: Write>(&self, dofs: &DofVector, mut out: W) -> std::io::Result<()> {
        writeln!(out, "elem_id,xq,yq,Ex,Ey")?;
        let nq = self.rule.len();
        let samples = self.sample(dofs);
        for k in 0..self.num_elements() {
            for q in 0..nq {
                let (p, _) = self.quad_point(k, q);
                let e = samples.values[k * nq + q];
                writeln!(
                    out,
                    "{k},{:.12e},{:.12e},{:.12e},{:.12e}",
                    p[0], p[1], e[0], e[1]
                )?;
            }
        }
        Ok(())
    }
}

#[inline]
fn combine(coeffs: &[f64], values: &[Vec2; LOCAL_DOFS]) -> Vec2 {
    let mut out = [0.0; 2];
    for (u, v) in coeffs.iter().zip(values) {
        out[0] += u * v[0];
        out[1] += u * v[1];
    }
    out
}

fn check_traces<T>(face: &Face, right: &Option<T>) -> Result<()> {
    match (face.is_boundary(), right.is_some()) {
        (true, true) => Err(Error::Usage(
            "right trace supplied on a boundary face".into(),
        )),
        (false, false) => Err(Error::Usage("interior face needs both traces".into())),
        _ => Ok(()),
    }
}

/// Tangential jump `n1 x v1 + n2 x v2` (with `n2 = -n1`), or `n x v` on the boundary.
pub fn tangential_jump(face: &Face, left: Vec2, right: Option<Vec2>) -> Result<f64> {
    check_traces(face, &right)?;
    let n = face.normal;
    Ok(match right {
        Some(r) => cross(n, left) + cross([-n[0], -n[1]], r),
        None => cross(n, left),
    })
}

/// Tangential jump of an out-of-plane scalar field `q e_z`; the result is an
/// in-plane vector since `n x (q e_z) = q (n_y, -n_x)`.
pub fn scalar_tangential_jump(face: &Face, left: f64, right: Option<f64>) -> Result<Vec2> {
    check_traces(face, &right)?;
    let n = face.normal;
    let q = left - right.unwrap_or(0.0);
    Ok([q * n[1], -q * n[0]])
}

/// Values that can be averaged across a face.
pub trait Mean: Copy {
    fn mean(a: Self, b: Self) -> Self;
}

impl Mean for f64 {
    fn mean(a: Self, b: Self) -> Self {
        0.5 * (a + b)
    }
}

impl Mean for Vec2 {
    fn mean(a: Self, b: Self) -> Self {
        [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]
    }
}

/// `{v} = (v1 + v2) / 2` on interior faces, `{v} = v` on the boundary.
pub fn average<T: Mean>(face: &Face, left: T, right: Option<T>) -> Result<T> {
    check_traces(face, &right)?;
    Ok(match right {
        Some(r) => T::mean(left, r),
        None => left,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_structured, FaceKind};
    use std::f64::consts::PI;

    fn space(level: u32) -> DgSpace {
        DgSpace::new(build_structured(level).unwrap()).unwrap()
    }

    fn face_with(normal: Vec2, kind: FaceKind) -> Face {
        Face {
            vertices: [0, 1],
            kind,
            left: 0,
            right: (kind == FaceKind::Interior).then_some(1),
            left_local: 0,
            right_local: (kind == FaceKind::Interior).then_some(0),
            normal,
            length: 1.0,
            h_f: 1.0,
        }
    }

    #[test]
    fn layout() {
        let s = space(2);
        assert_eq!(s.dofs_per_element(), 6);
        assert_eq!(s.num_dofs(), 6 * 32);
        assert!(DgSpace::with_degree(build_structured(1).unwrap(), 2).is_err());
    }

    #[test]
    fn hats_partition_unity() {
        let s = space(1);
        for r in [[0.2, 0.3], [0.0, 0.0], [1.0, 0.0], [0.1, 0.85]] {
            let b = s.eval_basis(3, r).unwrap();
            let sx: f64 = b.values.iter().map(|v| v[0]).sum();
            let sy: f64 = b.values.iter().map(|v| v[1]).sum();
            assert!((sx - 1.0).abs() < 1e-15 && (sy - 1.0).abs() < 1e-15);
        }
        assert!(matches!(s.eval_basis(0, [0.7, 0.7]), Err(Error::Domain(_))));
        assert!(matches!(
            s.eval_basis(8, [0.1, 0.1]),
            Err(Error::InvalidIndex { .. })
        ));
    }

    #[test]
    fn curl_of_constant_and_rotation() {
        let s = space(2);
        let c = s.interpolate(|_| [1.5, -0.5]);
        let rot = s.interpolate(|p| [-p[1], p[0]]);
        for k in 0..s.num_elements() {
            assert!(s.curl(&c, k).abs() < 1e-12);
            assert!((s.curl(&rot, k) - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn eval_field_cases() {
        let s = space(1);
        let z = s.zeros();
        assert_eq!(s.eval_field(&z, 2, [0.3, 0.3]).unwrap(), [0.0, 0.0]);
        let e = s.l2_project(|_| [1.0, 0.0]);
        for k in 0..s.num_elements() {
            let v = s.eval_field(&e, k, [0.25, 0.6]).unwrap();
            assert!((v[0] - 1.0).abs() < 1e-13 && v[1].abs() < 1e-13);
        }
        let bad = DofVector::zeros(5);
        assert!(matches!(
            s.eval_field(&bad, 0, [0.1, 0.1]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn projection_reproduces_linear_fields() {
        let s = space(3);
        let f = |p: Point| [2.0 * p[0] - p[1] + 0.5, 3.0 * p[1] + p[0]];
        let proj = s.l2_project(f);
        for k in 0..s.num_elements() {
            for r in [[1.0 / 3.0, 1.0 / 3.0], [0.1, 0.7], [0.0, 1.0]] {
                let p = s.geometry(k).to_physical(r);
                let v = s.eval_field(&proj, k, r).unwrap();
                let exact = f(p);
                assert!((v[0] - exact[0]).abs() < 1e-13 && (v[1] - exact[1]).abs() < 1e-13);
            }
        }
        assert_eq!(s.l2_project(|_| [0.0, 0.0]), s.zeros());
    }

    #[test]
    fn projected_norm_of_smooth_field() {
        let s = space(5);
        let e = s.l2_project(|p| {
            [
                (PI * p[0]).cos() * (PI * p[1]).sin(),
                -(PI * p[0]).sin() * (PI * p[1]).cos(),
            ]
        });
        assert!((s.l2_norm(&e) - 0.5f64.sqrt()).abs() < 2e-3);
    }

    #[test]
    fn jump_and_average_formulas() {
        let f = face_with([1.0, 0.0], FaceKind::Interior);
        assert_eq!(
            tangential_jump(&f, [0.0, 1.0], Some([0.0, 0.0])).unwrap(),
            1.0
        );
        assert_eq!(
            tangential_jump(&f, [0.3, 1.2], Some([0.3, 1.2])).unwrap(),
            0.0
        );
        let b = face_with([0.0, -1.0], FaceKind::Boundary);
        assert_eq!(tangential_jump(&b, [3.0, 0.0], None).unwrap(), 3.0);
        assert!(matches!(
            tangential_jump(&b, [3.0, 0.0], Some([0.0, 0.0])),
            Err(Error::Usage(_))
        ));
        assert!(tangential_jump(&f, [3.0, 0.0], None).is_err());

        let w = [0.4, -2.0];
        assert_eq!(average(&f, w, Some(w)).unwrap(), w);
        assert_eq!(average(&f, 2.0, Some(4.0)).unwrap(), 3.0);
        assert_eq!(average(&b, [1.0, 2.0], None).unwrap(), [1.0, 2.0]);
    }

    #[test]
    fn jump_is_orientation_symmetric() {
        let f = face_with([0.6, 0.8], FaceKind::Interior);
        let mut g = f.clone();
        g.normal = [-0.6, -0.8];
        let (v1, v2) = ([0.3, -1.1], [2.0, 0.5]);
        let a = tangential_jump(&f, v1, Some(v2)).unwrap();
        let b = tangential_jump(&g, v2, Some(v1)).unwrap();
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn continuous_fields_have_no_interior_jumps() {
        let s = space(3);
        let v = s.interpolate(|p| [p[0] * 2.0 - 1.0, 0.5 * p[1] + p[0]]);
        for (f, face) in s.faces().iter().enumerate() {
            if face.is_boundary() {
                continue;
            }
            for t in [0.1, 0.5, 0.9] {
                assert!(s.face_jump(&v, f, t).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn field_csv_rows() {
        let s = space(0);
        let mut buf = Vec::new();
        s.write_field_csv(&s.interpolate(|p| [p[0], p[1]]), &mut buf)
            .unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + 2 * 6);
        let row: Vec<f64> = text
            .lines()
            .nth(1)
            .unwrap()
            .split(',')
            .map(|x| x.parse().unwrap())
            .collect();
        assert!((row[1] - row[3]).abs() < 1e-11 && (row[2] - row[4]).abs() < 1e-11);
    }
}
