//! Element-level formulas for first-order triangles.

use super::mesh::LOCAL_EDGES;

/// Barycentric quadrature rule on a triangle. Weights sum to 1 and are scaled
/// by the element area on use.
#[derive(Debug, Clone)]
pub struct TriangleRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

impl TriangleRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Single point at the centroid, exact for linear integrands.
    pub fn centroid() -> Self {
        Self {
            points: vec![[1.0 / 3.0; 3]],
            weights: vec![1.0],
        }
    }

    /// Edge midpoints, exact for quadratics.
    pub fn edge_midpoints() -> Self {
        Self {
            points: vec![[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]],
            weights: vec![1.0 / 3.0; 3],
        }
    }

    /// Dunavant's 7-point rule, exact for degree 5.
    pub fn dunavant5() -> Self {
        let s = 15f64.sqrt();
        let a1 = (6.0 - s) / 21.0;
        let a2 = (6.0 + s) / 21.0;
        let w1 = (155.0 - s) / 1200.0;
        let w2 = (155.0 + s) / 1200.0;
        let b1 = 1.0 - 2.0 * a1;
        let b2 = 1.0 - 2.0 * a2;
        Self {
            points: vec![
                [1.0 / 3.0; 3],
                [b1, a1, a1],
                [a1, b1, a1],
                [a1, a1, b1],
                [b2, a2, a2],
                [a2, b2, a2],
                [a2, a2, b2],
            ],
            weights: vec![0.225, w1, w1, w1, w2, w2, w2],
        }
    }
}

/// Affine data of one triangle.
#[derive(Debug, Clone, Copy)]
pub struct TriangleGeometry {
    pub coords: [[f64; 2]; 3],
    pub area: f64,
    /// Constant gradients of the barycentric coordinates.
    pub grads: [[f64; 2]; 3],
}

impl TriangleGeometry {
    pub fn new(coords: [[f64; 2]; 3]) -> Self {
        let [a, b, c] = coords;
        let two_area = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
        let mut grads = [[0.0; 2]; 3];
        for i in 0..3 {
            let pj = coords[(i + 1) % 3];
            let pk = coords[(i + 2) % 3];
            grads[i] = [(pj[1] - pk[1]) / two_area, (pk[0] - pj[0]) / two_area];
        }
        Self {
            coords,
            area: 0.5 * two_area,
            grads,
        }
    }

    pub fn point(&self, bary: [f64; 3]) -> [f64; 2] {
        let mut p = [0.0; 2];
        for i in 0..3 {
            p[0] += bary[i] * self.coords[i][0];
            p[1] += bary[i] * self.coords[i][1];
        }
        p
    }

    /// Whitney function of local side `i` (oriented local node a → b) at a
    /// barycentric point: λ_a ∇λ_b − λ_b ∇λ_a.
    pub fn whitney(&self, i: usize, bary: [f64; 3]) -> [f64; 2] {
        let [a, b] = LOCAL_EDGES[i];
        let (ga, gb) = (self.grads[a], self.grads[b]);
        [bary[a] * gb[0] - bary[b] * ga[0], bary[a] * gb[1] - bary[b] * ga[1]]
    }

    /// Constant scalar curl of the Whitney function of local side `i`.
    pub fn whitney_curl(&self, i: usize) -> f64 {
        let [a, b] = LOCAL_EDGES[i];
        let (ga, gb) = (self.grads[a], self.grads[b]);
        2.0 * (ga[0] * gb[1] - ga[1] * gb[0])
    }

    /// ∫ ∇N_i · ∇N_j dA.
    pub fn nodal_stiffness(&self) -> [[f64; 3]; 3] {
        let mut k = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                k[i][j] = self.area * dot(self.grads[i], self.grads[j]);
            }
        }
        k
    }

    /// ∫ N_i N_j dA.
    pub fn nodal_mass(&self) -> [[f64; 3]; 3] {
        let mut m = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = self.area / 12.0 * if i == j { 2.0 } else { 1.0 };
            }
        }
        m
    }

    /// ∫ curl w_i curl w_j dA in local orientation.
    pub fn edge_curl_curl(&self) -> [[f64; 3]; 3] {
        let c = [0, 1, 2].map(|i| self.whitney_curl(i));
        let mut k = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                k[i][j] = self.area * c[i] * c[j];
            }
        }
        k
    }

    /// ∫ w_i · w_j dA in local orientation (edge-midpoint rule, exact).
    pub fn edge_mass(&self) -> [[f64; 3]; 3] {
        let rule = TriangleRule::edge_midpoints();
        let mut m = [[0.0; 3]; 3];
        for (bary, w) in rule.points.iter().zip(&rule.weights) {
            let vals = [0, 1, 2].map(|i| self.whitney(i, *bary));
            for i in 0..3 {
                for j in 0..3 {
                    m[i][j] += w * self.area * dot(vals[i], vals[j]);
                }
            }
        }
        m
    }

    /// ∫ w_i · ∇N_j dA in local orientation. Uses ∫ λ_a dA = area/3.
    pub fn edge_node_coupling(&self) -> [[f64; 3]; 3] {
        let mut c = [[0.0; 3]; 3];
        for (i, [a, b]) in LOCAL_EDGES.into_iter().enumerate() {
            let (ga, gb) = (self.grads[a], self.grads[b]);
            let mean_w = [(gb[0] - ga[0]) / 3.0, (gb[1] - ga[1]) / 3.0];
            for j in 0..3 {
                c[i][j] = self.area * dot(mean_w, self.grads[j]);
            }
        }
        c
    }
}

#[inline]
fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}
