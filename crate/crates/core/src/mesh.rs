//! Structured triangulations of the unit square and their face topology.
//!
//! Cell `(i, j)` of the `n x n` grid is split along the diagonal from its
//! lower-left to its upper-right corner:
//!
//! ```text
//!  (i,j+1) +-----+ (i+1,j+1)
//!          |   / |
//!          | /   |
//!    (i,j) +-----+ (i+1,j)
//! ```
//!
//! Element `2 * (j * n + i)` is the lower triangle `[v(i,j), v(i+1,j), v(i+1,j+1)]`
//! and element `2 * (j * n + i) + 1` the upper triangle `[v(i,j), v(i+1,j+1), v(i,j+1)]`.
//! Both are counterclockwise. Local edge `e` of a triangle is the edge opposite
//! local vertex `e`.

use std::collections::HashMap;
use std::io::Write;

use crate::error::{Error, Result};

/// Largest refinement level accepted by [`build_structured`].
pub const MAX_LEVEL: u32 = 12;

pub type Point = [f64; 2];

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh2D {
    level: Option<u32>,
    n: usize,
    pub vertices: Vec<Point>,
    pub triangles: Vec<[usize; 3]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaceKind {
    Interior,
    Boundary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Face {
    /// Endpoints, ordered counterclockwise as seen from `left`.
    pub vertices: [usize; 2],
    pub kind: FaceKind,
    pub left: usize,
    pub right: Option<usize>,
    /// Local edge index of this face in `left` (and in `right`).
    pub left_local: usize,
    pub right_local: Option<usize>,
    /// Unit normal pointing from `left` to `right` (outward on the boundary).
    pub normal: [f64; 2],
    pub length: f64,
    pub h_f: f64,
}

impl Face {
    pub fn is_boundary(&self) -> bool {
        self.kind == FaceKind::Boundary
    }

    /// Point on the face at parameter `s` in `[0, 1]`.
    pub fn point(&self, mesh: &Mesh2D, s: f64) -> Point {
        let a = mesh.vertices[self.vertices[0]];
        let b = mesh.vertices[self.vertices[1]];
        [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])]
    }
}

/// Builds the structured mesh with `2^level` cells per side.
pub fn build_structured(level: u32) -> Result<Mesh2D> {
    if level > MAX_LEVEL {
        return Err(Error::Capacity {
            level,
            max: MAX_LEVEL,
        });
    }
    let n = 1usize << level;
    let h = 1.0 / n as f64;
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            vertices.push([i as f64 * h, j as f64 * h]);
        }
    }
    let v = |i: usize, j: usize| j * (n + 1) + i;
    let mut triangles = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            triangles.push([v(i, j), v(i + 1, j), v(i + 1, j + 1)]);
            triangles.push([v(i, j), v(i + 1, j + 1), v(i, j + 1)]);
        }
    }
    Ok(Mesh2D {
        level: Some(level),
        n,
        vertices,
        triangles,
    })
}

impl Mesh2D {
    /// Wraps an arbitrary triangle list. Such meshes carry no structured
    /// level, so point location is unavailable.
    pub fn from_raw(vertices: Vec<Point>, triangles: Vec<[usize; 3]>) -> Self {
        Mesh2D {
            level: None,
            n: 0,
            vertices,
            triangles,
        }
    }

    pub fn level(&self) -> Option<u32> {
        self.level
    }

    /// Cells per side; zero for meshes built with [`Mesh2D::from_raw`].
    pub fn n(&self) -> usize {
        self.n
    }

    /// Grid spacing `1/n` reported in convergence tables.
    pub fn grid_spacing(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn corners(&self, element: usize) -> Result<[Point; 3]> {
        let tri = self.triangles.get(element).ok_or(Error::InvalidIndex {
            index: element,
            len: self.triangles.len(),
        })?;
        Ok([
            self.vertices[tri[0]],
            self.vertices[tri[1]],
            self.vertices[tri[2]],
        ])
    }

    /// Signed area; positive for counterclockwise triangles.
    pub fn signed_area(&self, element: usize) -> Result<f64> {
        let [a, b, c] = self.corners(element)?;
        Ok(0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1])))
    }

    /// Element containing `p`, by index arithmetic on the structured grid.
    ///
    /// Points on shared edges resolve to the lower-left cell and, within a
    /// cell, to the lower triangle.
    pub fn locate(&self, p: Point) -> Result<usize> {
        if self.level.is_none() {
            return Err(Error::Usage(
                "point location needs a structured mesh".into(),
            ));
        }
        let tol = 1e-12;
        if !(-tol..=1.0 + tol).contains(&p[0]) || !(-tol..=1.0 + tol).contains(&p[1]) {
            return Err(Error::Domain(format!(
                "point ({}, {}) lies outside the unit square",
                p[0], p[1]
            )));
        }
        let n = self.n;
        let sx = p[0] * n as f64;
        let sy = p[1] * n as f64;
        let i = (sx.floor().max(0.0) as usize).min(n - 1);
        let j = (sy.floor().max(0.0) as usize).min(n - 1);
        let s = sx - i as f64;
        let t = sy - j as f64;
        let base = 2 * (j * n + i);
        Ok(if s >= t { base } else { base + 1 })
    }

    /// Writes `elem_id,x0,y0,x1,y1,x2,y2`, one triangle per row.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "elem_id,x0,y0,x1,y1,x2,y2")?;
        for (k, tri) in self.triangles.iter().enumerate() {
            let [a, b, c] = tri.map(|v| self.vertices[v]);
            writeln!(
                out,
                "{k},{},{},{},{},{},{}",
                a[0], a[1], b[0], b[1], c[0], c[1]
            )?;
        }
        Ok(())
    }
}

/// Longest edge of the triangle.
pub fn element_diameter(mesh: &Mesh2D, element: usize) -> Result<f64> {
    let [a, b, c] = mesh.corners(element)?;
    Ok(dist(a, b).max(dist(b, c)).max(dist(c, a)))
}

fn dist(a: Point, b: Point) -> f64 {
    (b[0] - a[0]).hypot(b[1] - a[1])
}

/// Enumerates every edge of the triangulation once, in order of first
/// appearance over elements and local edges.
pub fn enumerate_faces(mesh: &Mesh2D) -> Result<Vec<Face>> {
    let diameters = (0..mesh.num_triangles())
        .map(|k| element_diameter(mesh, k))
        .collect::<Result<Vec<_>>>()?;

    let mut index: HashMap<(usize, usize), usize> = HashMap::new();
    let mut faces: Vec<Face> = Vec::with_capacity(3 * mesh.num_triangles() / 2 + 2 * mesh.n());
    for (k, tri) in mesh.triangles.iter().enumerate() {
        for e in 0..3 {
            let a = tri[(e + 1) % 3];
            let b = tri[(e + 2) % 3];
            let key = (a.min(b), a.max(b));
            match index.get(&key) {
                None => {
                    let pa = mesh.vertices[a];
                    let pb = mesh.vertices[b];
                    let length = dist(pa, pb);
                    if length == 0.0 {
                        return Err(Error::Topology(format!("degenerate edge in element {k}")));
                    }
                    let normal = [(pb[1] - pa[1]) / length, -(pb[0] - pa[0]) / length];
                    index.insert(key, faces.len());
                    faces.push(Face {
                        vertices: [a, b],
                        kind: FaceKind::Boundary,
                        left: k,
                        right: None,
                        left_local: e,
                        right_local: None,
                        normal,
                        length,
                        h_f: diameters[k],
                    });
                }
                Some(&f) => {
                    let face = &mut faces[f];
                    if face.right.is_some() {
                        return Err(Error::Topology(format!(
                            "edge ({}, {}) is shared by more than two triangles",
                            key.0, key.1
                        )));
                    }
                    face.kind = FaceKind::Interior;
                    face.right = Some(k);
                    face.right_local = Some(e);
                    face.h_f = diameters[face.left].min(diameters[k]);
                }
            }
        }
    }
    Ok(faces)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::SQRT_2;

    #[test]
    fn level_zero_is_one_split_cell() {
        let mesh = build_structured(0).unwrap();
        assert_eq!(mesh.num_triangles(), 2);
        assert_eq!(mesh.vertices.len(), 4);
        let faces = enumerate_faces(&mesh).unwrap();
        assert_eq!(faces.len(), 5);
        let interior: Vec<_> = faces.iter().filter(|f| !f.is_boundary()).collect();
        assert_eq!(interior.len(), 1);
        assert!((interior[0].h_f - SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn level_one_counts() {
        let mesh = build_structured(1).unwrap();
        assert_eq!(mesh.num_triangles(), 8);
        assert_eq!(mesh.vertices.len(), 9);
        let faces = enumerate_faces(&mesh).unwrap();
        assert_eq!(faces.len(), 16);
        assert_eq!(faces.iter().filter(|f| !f.is_boundary()).count(), 8);
        assert_eq!(faces.iter().filter(|f| f.is_boundary()).count(), 8);
    }

    #[test]
    fn areas_tile_the_square() {
        for level in 0..=5 {
            let mesh = build_structured(level).unwrap();
            let n = mesh.n() as f64;
            let mut total = 0.0;
            for k in 0..mesh.num_triangles() {
                let area = mesh.signed_area(k).unwrap();
                assert!((area - 0.5 / (n * n)).abs() < 1e-15);
                total += area;
            }
            assert!((total - 1.0).abs() < 1e-14, "level {level}: {total}");
            assert_eq!(mesh.num_triangles(), 2 * mesh.n() * mesh.n());
        }
    }

    #[test]
    fn capacity_guard() {
        assert!(matches!(build_structured(13), Err(Error::Capacity { .. })));
    }

    #[test]
    fn diameters() {
        let mesh = build_structured(0).unwrap();
        for k in 0..2 {
            assert!((element_diameter(&mesh, k).unwrap() - SQRT_2).abs() < 1e-15);
        }
        let mesh = build_structured(2).unwrap();
        assert!((element_diameter(&mesh, 7).unwrap() - SQRT_2 / 4.0).abs() < 1e-15);
        let empty = Mesh2D::from_raw(vec![], vec![]);
        assert!(matches!(
            element_diameter(&empty, 0),
            Err(Error::InvalidIndex { .. })
        ));
    }

    #[test]
    fn face_geometry_invariants() {
        for level in 0..=5 {
            let mesh = build_structured(level).unwrap();
            let faces = enumerate_faces(&mesh).unwrap();
            let nb = faces.iter().filter(|f| f.is_boundary()).count();
            assert_eq!(faces.len(), (3 * mesh.num_triangles() + nb) / 2);
            let perimeter: f64 = faces
                .iter()
                .filter(|f| f.is_boundary())
                .map(|f| f.length)
                .sum();
            assert!((perimeter - 4.0).abs() < 1e-13);
            for f in &faces {
                let norm = f.normal[0].hypot(f.normal[1]);
                assert!((norm - 1.0).abs() < 1e-15);
                if let Some(r) = f.right {
                    // outward normal of the right element on this edge is -n
                    let tri = mesh.triangles[r];
                    let e = f.right_local.unwrap();
                    let pa = mesh.vertices[tri[(e + 1) % 3]];
                    let pb = mesh.vertices[tri[(e + 2) % 3]];
                    let len = dist(pa, pb);
                    let nr = [(pb[1] - pa[1]) / len, -(pb[0] - pa[0]) / len];
                    assert_eq!(nr[0], -f.normal[0]);
                    assert_eq!(nr[1], -f.normal[1]);
                } else {
                    let mid = f.point(&mesh, 0.5);
                    let on_boundary = [mid[0], mid[1], 1.0 - mid[0], 1.0 - mid[1]]
                        .iter()
                        .any(|c| c.abs() < 1e-15);
                    assert!(on_boundary);
                    // outward: stepping along the normal leaves the square
                    let out = [mid[0] + 1e-3 * f.normal[0], mid[1] + 1e-3 * f.normal[1]];
                    assert!(out.iter().any(|c| *c < 0.0 || *c > 1.0));
                }
            }
        }
    }

    #[test]
    fn h_f_halves_under_refinement() {
        for level in 0..5 {
            let coarse = enumerate_faces(&build_structured(level).unwrap()).unwrap();
            let fine = enumerate_faces(&build_structured(level + 1).unwrap()).unwrap();
            let hc = coarse[0].h_f;
            assert!(coarse.iter().all(|f| (f.h_f - hc).abs() < 1e-15));
            assert!(fine.iter().all(|f| (f.h_f - hc / 2.0).abs() < 1e-15));
        }
    }

    #[test]
    fn non_manifold_edge_is_rejected() {
        let vertices = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [-1.0, 0.5]];
        let triangles = vec![[0, 1, 2], [1, 3, 2], [0, 2, 4], [0, 2, 3]];
        let mesh = Mesh2D::from_raw(vertices, triangles);
        assert!(matches!(enumerate_faces(&mesh), Err(Error::Topology(_))));
    }

    #[test]
    fn locate_finds_containing_triangle() {
        let mesh = build_structured(3).unwrap();
        for k in 0..mesh.num_triangles() {
            let [a, b, c] = mesh.corners(k).unwrap();
            let centroid = [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0];
            assert_eq!(mesh.locate(centroid).unwrap(), k);
        }
        assert!(mesh.locate([1.5, 0.2]).is_err());
        assert_eq!(mesh.locate([1.0, 1.0]).unwrap(), mesh.num_triangles() - 2);
    }

    #[test]
    fn csv_dump_has_one_row_per_triangle() {
        let mesh = build_structured(1).unwrap();
        let mut buf = Vec::new();
        mesh.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 9);
        assert!(text.starts_with("elem_id,x0,y0,x1,y1,x2,y2\n0,0,0,0.5,0,0.5,0.5\n"));
    }
}
