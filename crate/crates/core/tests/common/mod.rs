//! Brute-force 3D assembly over triangle × interval prisms. Shape functions
//! are rebuilt here from their definitions (barycentric coordinates, Whitney
//! forms, integrated Legendre polynomials) so the library is only used for
//! the meshes themselves.
#![allow(dead_code)]

use nalgebra::{DMatrix, Matrix3, Vector3};
use q3d::fem2d::{Region, TriMesh2D};
use q3d::spectral1d::SpectralLineMesh;

fn legendre_table(n: usize, x: f64) -> Vec<f64> {
    let mut l = vec![1.0, x];
    for k in 1..n {
        let next = ((2 * k + 1) as f64 * x * l[k] - k as f64 * l[k - 1]) / (k + 1) as f64;
        l.push(next);
    }
    l.truncate(n + 1);
    l
}

/// Lobatto shape `q` and its derivative on [-1, 1].
pub fn lobatto(q: usize, x: f64) -> (f64, f64) {
    match q {
        0 => (0.5 * (1.0 - x), -0.5),
        1 => (0.5 * (1.0 + x), 0.5),
        _ => {
            let l = legendre_table(q, x);
            let s = (2.0 * (2 * q - 1) as f64).sqrt();
            ((l[q] - l[q - 2]) / s, (2 * q - 1) as f64 * l[q - 1] / s)
        }
    }
}

/// Gauss–Legendre nodes and weights by Newton iteration on `P_n`.
pub fn gauss(n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let deriv = |x: f64| {
                let l = legendre_table(n, x);
                (l[n], n as f64 * (x * l[n] - l[n - 1]) / (x * x - 1.0))
            };
            let mut x = -(std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = deriv(x);
                x -= p / dp;
                if (p / dp).abs() < 1e-16 {
                    break;
                }
            }
            let dp = deriv(x).1;
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

/// Collapsed-square rule on the reference triangle: `(λ1, λ2)` and weights
/// summing to 1/2.
pub fn triangle_points(n: usize) -> Vec<([f64; 2], f64)> {
    let g = gauss(n);
    let mut out = Vec::new();
    for &(u, wu) in &g {
        for &(v, wv) in &g {
            let s = 0.5 * (1.0 + u);
            let t = 0.5 * (1.0 + v);
            out.push(([s, t * (1.0 - s)], 0.25 * wu * wv * (1.0 - s)));
        }
    }
    out
}

/// Barycentric gradients and area of a triangle from its vertex coordinates.
pub fn barycentric(c: [[f64; 2]; 3]) -> ([[f64; 2]; 3], f64) {
    let m = Matrix3::new(1.0, 1.0, 1.0, c[0][0], c[1][0], c[2][0], c[0][1], c[1][1], c[2][1]);
    let inv = m.try_inverse().expect("non-degenerate triangle");
    let grads = [0, 1, 2].map(|i| [inv[(i, 1)], inv[(i, 2)]]);
    (grads, 0.5 * m.determinant().abs())
}

/// One 3D shape function at a point: value and curl for vector fields; value
/// in `value.x` and gradient in `deriv` for scalar fields.
#[derive(Clone, Copy)]
pub struct Shape {
    pub index: usize,
    pub value: Vector3<f64>,
    pub deriv: Vector3<f64>,
}

/// Tensor-product quadrature over every (triangle × SE element) prism.
pub struct PrismOracle<'a> {
    pub mesh: &'a TriMesh2D,
    pub zmesh: &'a SpectralLineMesh,
    pub xy_points: usize,
    pub z_points: usize,
}

impl<'a> PrismOracle<'a> {
    pub fn new(mesh: &'a TriMesh2D, zmesh: &'a SpectralLineMesh) -> Self {
        let p = zmesh.max_order();
        Self { mesh, zmesh, xy_points: 4, z_points: p + 3 }
    }

    fn z_offsets(&self) -> Vec<usize> {
        let mut off = vec![0];
        for &p in self.zmesh.orders() {
            off.push(off.last().unwrap() + p);
        }
        off
    }

    fn n_z(&self) -> usize {
        *self.z_offsets().last().unwrap() + 1
    }

    /// Global z-function index of local mode `q` on element `k`.
    fn z_global(&self, off: &[usize], k: usize, q: usize) -> usize {
        match q {
            0 => off[k],
            1 => off[k + 1],
            _ => off[k] + q - 1,
        }
    }

    /// Visits every quadrature point of every prism with the magnetic shape
    /// functions (value, curl) that live on it.
    pub fn for_each_magnetic(&self, mut visit: impl FnMut(usize, f64, [f64; 3], &[Shape])) {
        let off = self.z_offsets();
        let nz = self.n_z();
        let (ne, _nn) = (self.mesh.num_edges(), self.mesh.num_nodes());
        let edges = self.mesh.edges();
        let tri_pts = triangle_points(self.xy_points);
        let zg = gauss(self.z_points);
        for t in 0..self.mesh.num_triangles() {
            let nodes = self.mesh.triangle(t).nodes;
            let coords = nodes.map(|n| self.mesh.node(n));
            let (grads, area) = barycentric(coords);
            let local = |n: usize| nodes.iter().position(|&m| m == n).unwrap();
            let tri_edges: Vec<usize> = (0..ne)
                .filter(|&e| nodes.contains(&edges[e][0]) && nodes.contains(&edges[e][1]))
                .collect();
            assert_eq!(tri_edges.len(), 3);
            for k in 0..self.zmesh.num_elements() {
                let (z0, z1) = self.zmesh.element_bounds(k);
                let h = z1 - z0;
                let p = self.zmesh.order(k);
                for &(xi, wz) in &zg {
                    let z = z0 + 0.5 * h * (1.0 + xi);
                    for &(l12, wt) in &tri_pts {
                        let lam = [1.0 - l12[0] - l12[1], l12[0], l12[1]];
                        let x = (0..3).map(|i| lam[i] * coords[i][0]).sum::<f64>();
                        let y = (0..3).map(|i| lam[i] * coords[i][1]).sum::<f64>();
                        let weight = 2.0 * area * wt * 0.5 * h * wz;
                        let mut shapes = Vec::new();
                        for q in 0..=p {
                            let (phi, dphi) = lobatto(q, xi);
                            let dphi = dphi * 2.0 / h;
                            let w = self.z_global(&off, k, q);
                            for &e in &tri_edges {
                                let (a, b) = (local(edges[e][0]), local(edges[e][1]));
                                let we = [
                                    lam[a] * grads[b][0] - lam[b] * grads[a][0],
                                    lam[a] * grads[b][1] - lam[b] * grads[a][1],
                                ];
                                let curl = 2.0 * (grads[a][0] * grads[b][1] - grads[a][1] * grads[b][0]);
                                shapes.push(Shape {
                                    index: w * ne + e,
                                    value: Vector3::new(we[0] * phi, we[1] * phi, 0.0),
                                    deriv: Vector3::new(-we[1] * dphi, we[0] * dphi, curl * phi),
                                });
                            }
                            for (i, &n) in nodes.iter().enumerate() {
                                shapes.push(Shape {
                                    index: nz * ne + w * self.mesh.num_nodes() + n,
                                    value: Vector3::new(0.0, 0.0, lam[i] * phi),
                                    deriv: Vector3::new(grads[i][1] * phi, -grads[i][0] * phi, 0.0),
                                });
                            }
                        }
                        visit(t, weight, [x, y, z], &shapes);
                    }
                }
            }
        }
    }

    /// Same for the nodal × spectral scalar functions: value in `value.x`,
    /// gradient in `deriv`.
    pub fn for_each_nodal(&self, mut visit: impl FnMut(usize, f64, [f64; 3], &[Shape])) {
        let off = self.z_offsets();
        let nn = self.mesh.num_nodes();
        let tri_pts = triangle_points(self.xy_points);
        let zg = gauss(self.z_points);
        for t in 0..self.mesh.num_triangles() {
            let nodes = self.mesh.triangle(t).nodes;
            let coords = nodes.map(|n| self.mesh.node(n));
            let (grads, area) = barycentric(coords);
            for k in 0..self.zmesh.num_elements() {
                let (z0, z1) = self.zmesh.element_bounds(k);
                let h = z1 - z0;
                for &(xi, wz) in &zg {
                    let z = z0 + 0.5 * h * (1.0 + xi);
                    for &(l12, wt) in &tri_pts {
                        let lam = [1.0 - l12[0] - l12[1], l12[0], l12[1]];
                        let x = (0..3).map(|i| lam[i] * coords[i][0]).sum::<f64>();
                        let y = (0..3).map(|i| lam[i] * coords[i][1]).sum::<f64>();
                        let weight = 2.0 * area * wt * 0.5 * h * wz;
                        let mut shapes = Vec::new();
                        for q in 0..=self.zmesh.order(k) {
                            let (phi, dphi) = lobatto(q, xi);
                            let dphi = dphi * 2.0 / h;
                            let w = self.z_global(&off, k, q);
                            for (i, &n) in nodes.iter().enumerate() {
                                shapes.push(Shape {
                                    index: w * nn + n,
                                    value: Vector3::new(lam[i] * phi, 0.0, 0.0),
                                    deriv: Vector3::new(grads[i][0] * phi, grads[i][1] * phi, lam[i] * dphi),
                                });
                            }
                        }
                        visit(t, weight, [x, y, z], &shapes);
                    }
                }
            }
        }
    }

    pub fn magnetic_len(&self) -> usize {
        self.n_z() * (self.mesh.num_edges() + self.mesh.num_nodes())
    }

    pub fn nodal_len(&self) -> usize {
        self.n_z() * self.mesh.num_nodes()
    }

    /// `∫ α curl A_i · curl A_j`.
    pub fn curlcurl(&self, alpha: &[f64]) -> DMatrix<f64> {
        self.curlcurl_with(|t, _| alpha[t])
    }

    pub fn curlcurl_with(&self, alpha: impl Fn(usize, f64) -> f64) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.magnetic_len(), self.magnetic_len());
        self.for_each_magnetic(|t, w, x, s| pair(&mut m, s, w * alpha(t, x[2]), |a| a.deriv));
        m
    }

    /// `∫ α A_i · A_j`.
    pub fn vector_mass(&self, alpha: &[f64]) -> DMatrix<f64> {
        self.vector_mass_with(|t, _| alpha[t])
    }

    pub fn vector_mass_with(&self, alpha: impl Fn(usize, f64) -> f64) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.magnetic_len(), self.magnetic_len());
        self.for_each_magnetic(|t, w, x, s| pair(&mut m, s, w * alpha(t, x[2]), |a| a.value));
        m
    }

    /// `∫ λ ∇T_i · ∇T_j`.
    pub fn nodal_stiffness(&self, alpha: &[f64]) -> DMatrix<f64> {
        self.nodal_stiffness_with(|t, _| alpha[t])
    }

    pub fn nodal_stiffness_with(&self, alpha: impl Fn(usize, f64) -> f64) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.nodal_len(), self.nodal_len());
        self.for_each_nodal(|t, w, x, s| pair(&mut m, s, w * alpha(t, x[2]), |a| a.deriv));
        m
    }

    /// `∫ C T_i T_j`.
    pub fn nodal_mass(&self, alpha: &[f64]) -> DMatrix<f64> {
        self.nodal_mass_with(|t, _| alpha[t])
    }

    pub fn nodal_mass_with(&self, alpha: impl Fn(usize, f64) -> f64) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.nodal_len(), self.nodal_len());
        self.for_each_nodal(|t, w, x, s| pair(&mut m, s, w * alpha(t, x[2]), |a| a.value));
        m
    }

    /// `∫ J ẑ · A_i` for the current density `j_t` per triangle.
    pub fn source(&self, j_t: &[f64]) -> Vec<f64> {
        let mut v = vec![0.0; self.magnetic_len()];
        self.for_each_magnetic(|t, w, _, s| {
            for a in s {
                v[a.index] += w * j_t[t] * a.value.z;
            }
        });
        v
    }

    /// `A = Σ c_i A_i` and its curl at every quadrature point.
    pub fn magnetic_field_at_points(&self, c: &[f64]) -> Vec<(Vector3<f64>, Vector3<f64>)> {
        let mut out = Vec::new();
        self.for_each_magnetic(|_, _, _, s| {
            let mut a = Vector3::zeros();
            let mut b = Vector3::zeros();
            for sh in s {
                a += c[sh.index] * sh.value;
                b += c[sh.index] * sh.deriv;
            }
            out.push((a, b));
        });
        out
    }
}

fn pair(m: &mut DMatrix<f64>, s: &[Shape], w: f64, f: impl Fn(&Shape) -> Vector3<f64>) {
    for a in s {
        let fa = f(a);
        for b in s {
            m[(a.index, b.index)] += w * fa.dot(&f(b));
        }
    }
}

/// Largest entry-wise difference relative to the largest entry of `oracle`.
pub fn rel_diff(q3d: &DMatrix<f64>, oracle: &DMatrix<f64>) -> f64 {
    assert_eq!(q3d.shape(), oracle.shape());
    let scale = oracle.amax();
    (q3d - oracle).amax() / scale
}

/// Eight skewed triangles on two regions (conductor in the lower left); some
/// edges are stored against their natural orientation.
pub fn skewed_mesh() -> TriMesh2D {
    let nodes = vec![
        [0.0, 0.0],
        [0.45, 0.05],
        [1.1, 0.0],
        [0.05, 0.5],
        [0.55, 0.45],
        [1.0, 0.6],
        [0.0, 1.05],
        [0.5, 1.0],
        [1.15, 1.1],
    ];
    let tris = vec![
        ([0, 1, 4], 0),
        ([0, 4, 3], 0),
        ([1, 2, 5], 1),
        ([1, 5, 4], 1),
        ([3, 4, 7], 1),
        ([3, 7, 6], 1),
        ([4, 5, 8], 1),
        ([4, 8, 7], 1),
    ];
    let regions = vec![
        Region { id: 0, label: "wire".into(), conductor: true },
        Region { id: 1, label: "air".into(), conductor: false },
    ];
    let mut mesh = TriMesh2D::new(nodes, tris, regions).unwrap();
    for e in [1, 4, 7, 10] {
        if e < mesh.num_edges() {
            mesh.flip_edge(e);
        }
    }
    mesh
}

/// Per-triangle constants that differ between triangles.
pub fn piecewise(mesh: &TriMesh2D, base: f64) -> Vec<f64> {
    (0..mesh.num_triangles()).map(|t| base * (1.0 + 0.37 * t as f64)).collect()
}
