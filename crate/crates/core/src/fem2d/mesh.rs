use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};

/// Relative area threshold below which a triangle counts as degenerate.
pub const DEGENERATE_AREA_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Region {
    pub id: usize,
    pub label: String,
    pub conductor: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Triangle {
    /// Counter-clockwise, smallest node index first.
    pub nodes: [usize; 3],
    pub region: usize,
}

/// Local side `i` of a triangle joins local nodes `LOCAL_EDGES[i]`.
pub const LOCAL_EDGES: [[usize; 2]; 3] = [[0, 1], [1, 2], [2, 0]];

/// Cross-section triangulation with globally oriented edges.
///
/// Edges are numbered by their sorted node pair and oriented from the lower to
/// the higher node index unless explicitly flipped with [`TriMesh2D::flip_edge`].
#[derive(Debug, Clone)]
pub struct TriMesh2D {
    nodes: Vec<[f64; 2]>,
    triangles: Vec<Triangle>,
    edges: Vec<[usize; 2]>,
    triangle_edges: Vec<[usize; 3]>,
    regions: Vec<Region>,
    boundary_edges: Vec<usize>,
}

impl TriMesh2D {
    pub fn new(nodes: Vec<[f64; 2]>, triangles: Vec<([usize; 3], usize)>, regions: Vec<Region>) -> Result<Self> {
        if nodes.iter().any(|p| !p[0].is_finite() || !p[1].is_finite()) {
            return Err(Error::InvalidInput("non-finite node coordinate".into()));
        }
        if triangles.is_empty() {
            return Err(Error::InvalidInput("mesh has no triangles".into()));
        }
        let region_ids: HashMap<usize, ()> = regions.iter().map(|r| (r.id, ())).collect();
        if region_ids.len() != regions.len() {
            return Err(Error::InvalidInput("duplicate region id".into()));
        }

        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for p in &nodes {
            for d in 0..2 {
                lo[d] = lo[d].min(p[d]);
                hi[d] = hi[d].max(p[d]);
            }
        }
        let scale = (hi[0] - lo[0]).max(hi[1] - lo[1]);
        let area_tol = DEGENERATE_AREA_TOL * scale * scale;

        let mut canon = Vec::with_capacity(triangles.len());
        for (index, (tri, region)) in triangles.into_iter().enumerate() {
            if tri.iter().any(|&n| n >= nodes.len()) {
                return Err(Error::InvalidInput(format!("triangle {index} references a missing node")));
            }
            if !region_ids.contains_key(&region) {
                return Err(Error::InvalidInput(format!("triangle {index} has unknown region {region}")));
            }
            let area = signed_area(&nodes, tri);
            if area.abs() <= area_tol {
                return Err(Error::DegenerateTriangle { index, area: area.abs() });
            }
            let mut t = if area > 0.0 { tri } else { [tri[0], tri[2], tri[1]] };
            let first = (0..3).min_by_key(|&i| t[i]).unwrap();
            t.rotate_left(first);
            canon.push(Triangle { nodes: t, region });
        }

        let mut side_count: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for t in &canon {
            for [a, b] in LOCAL_EDGES {
                let (u, v) = (t.nodes[a], t.nodes[b]);
                *side_count.entry((u.min(v), u.max(v))).or_default() += 1;
            }
        }
        if let Some((&(u, v), _)) = side_count.iter().find(|(_, &c)| c > 2) {
            return Err(Error::InvalidInput(format!("edge ({u},{v}) shared by more than two triangles")));
        }
        let edge_index: HashMap<(usize, usize), usize> =
            side_count.keys().enumerate().map(|(i, &k)| (k, i)).collect();
        let edges: Vec<[usize; 2]> = side_count.keys().map(|&(u, v)| [u, v]).collect();
        let boundary_edges = side_count
            .values()
            .enumerate()
            .filter(|(_, &c)| c == 1)
            .map(|(i, _)| i)
            .collect();
        let triangle_edges = canon
            .iter()
            .map(|t| {
                LOCAL_EDGES.map(|[a, b]| {
                    let (u, v) = (t.nodes[a], t.nodes[b]);
                    edge_index[&(u.min(v), u.max(v))]
                })
            })
            .collect();

        Ok(Self {
            nodes,
            triangles: canon,
            edges,
            triangle_edges,
            regions,
            boundary_edges,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> [f64; 2] {
        self.nodes[i]
    }

    pub fn triangles(&self) -> &[Triangle] {
        &self.triangles
    }

    pub fn triangle(&self, t: usize) -> &Triangle {
        &self.triangles[t]
    }

    /// Oriented edges as `[start, end]`.
    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn triangle_edges(&self, t: usize) -> [usize; 3] {
        self.triangle_edges[t]
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn region(&self, id: usize) -> Option<&Region> {
        self.regions.iter().find(|r| r.id == id)
    }

    /// Edges adjacent to exactly one triangle.
    pub fn boundary_edges(&self) -> &[usize] {
        &self.boundary_edges
    }

    pub fn boundary_nodes(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self.boundary_edges.iter().flat_map(|&e| self.edges[e]).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn triangle_coords(&self, t: usize) -> [[f64; 2]; 3] {
        self.triangles[t].nodes.map(|n| self.nodes[n])
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        signed_area(&self.nodes, self.triangles[t].nodes)
    }

    pub fn is_conductor(&self, t: usize) -> bool {
        self.region(self.triangles[t].region).is_some_and(|r| r.conductor)
    }

    pub fn conductor_mask(&self) -> Vec<bool> {
        (0..self.num_triangles()).map(|t| self.is_conductor(t)).collect()
    }

    /// Sign (+1/−1) of local side `i` of triangle `t` relative to the global
    /// orientation of the corresponding edge. Fails if the stored edge does
    /// not join the side's endpoints.
    pub fn edge_signs(&self, t: usize) -> Result<[f64; 3]> {
        let tri = &self.triangles[t];
        let mut signs = [0.0; 3];
        for (i, [a, b]) in LOCAL_EDGES.into_iter().enumerate() {
            let (u, v) = (tri.nodes[a], tri.nodes[b]);
            let e = self.edges[self.triangle_edges[t][i]];
            signs[i] = if e == [u, v] {
                1.0
            } else if e == [v, u] {
                -1.0
            } else {
                return Err(Error::EdgeOrientation { triangle: t });
            };
        }
        Ok(signs)
    }

    /// Reverses the global orientation of edge `e`.
    pub fn flip_edge(&mut self, e: usize) {
        self.edges[e].swap(0, 1);
    }

    pub fn edge_midpoint(&self, e: usize) -> [f64; 2] {
        let [a, b] = self.edges[e];
        [
            0.5 * (self.nodes[a][0] + self.nodes[b][0]),
            0.5 * (self.nodes[a][1] + self.nodes[b][1]),
        ]
    }

    /// Total area of the triangles satisfying `keep`.
    pub fn area_where(&self, keep: impl Fn(&Triangle) -> bool) -> f64 {
        (0..self.num_triangles())
            .filter(|&t| keep(&self.triangles[t]))
            .map(|t| self.triangle_area(t))
            .sum()
    }

    /// The sub-mesh of triangles satisfying `keep`, with compacted node
    /// numbering. Returns the mesh, the parent index of every sub-mesh node and
    /// the parent index of every sub-mesh triangle.
    pub fn submesh(&self, keep: impl Fn(&Triangle) -> bool) -> Result<(TriMesh2D, Vec<usize>, Vec<usize>)> {
        let tris: Vec<usize> = (0..self.num_triangles()).filter(|&t| keep(&self.triangles[t])).collect();
        let mut node_map = vec![usize::MAX; self.num_nodes()];
        let mut parent_nodes = Vec::new();
        for &t in &tris {
            for n in self.triangles[t].nodes {
                if node_map[n] == usize::MAX {
                    node_map[n] = parent_nodes.len();
                    parent_nodes.push(n);
                }
            }
        }
        // keep the parent's relative node order so edge orientation matches
        let mut order: Vec<usize> = (0..parent_nodes.len()).collect();
        order.sort_by_key(|&i| parent_nodes[i]);
        let mut renumber = vec![0; parent_nodes.len()];
        for (new, &old) in order.iter().enumerate() {
            renumber[old] = new;
        }
        parent_nodes.sort_unstable();
        let nodes = parent_nodes.iter().map(|&n| self.nodes[n]).collect();
        let triangles = tris
            .iter()
            .map(|&t| {
                let tri = &self.triangles[t];
                (tri.nodes.map(|n| renumber[node_map[n]]), tri.region)
            })
            .collect();
        let used: Vec<usize> = tris.iter().map(|&t| self.triangles[t].region).collect();
        let regions = self.regions.iter().filter(|r| used.contains(&r.id)).cloned().collect();
        let sub = TriMesh2D::new(nodes, triangles, regions)?;
        Ok((sub, parent_nodes, tris))
    }

    /// Same mesh with the triangles listed in `order` (a permutation).
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        let tris = order
            .iter()
            .map(|&t| (self.triangles[t].nodes, self.triangles[t].region))
            .collect();
        Self::new(self.nodes.clone(), tris, self.regions.clone())
    }

    /// Uniform refinement: each triangle splits into four via edge midpoints.
    /// Returns the refined mesh and, for every fine triangle, its parent.
    pub fn refined(&self) -> Result<(Self, Vec<usize>)> {
        let mut nodes = self.nodes.clone();
        let mids: Vec<usize> = (0..self.num_edges())
            .map(|e| {
                nodes.push(self.edge_midpoint(e));
                nodes.len() - 1
            })
            .collect();
        let mut tris = Vec::with_capacity(4 * self.num_triangles());
        let mut parent = Vec::with_capacity(4 * self.num_triangles());
        for (t, tri) in self.triangles.iter().enumerate() {
            let [a, b, c] = tri.nodes;
            let [e0, e1, e2] = self.triangle_edges[t].map(|e| mids[e]);
            for sub in [[a, e0, e2], [e0, b, e1], [e2, e1, c], [e0, e1, e2]] {
                tris.push((sub, tri.region));
                parent.push(t);
            }
        }
        Ok((Self::new(nodes, tris, self.regions.clone())?, parent))
    }
}

pub(crate) fn signed_area(nodes: &[[f64; 2]], t: [usize; 3]) -> f64 {
    let [a, b, c] = t.map(|n| nodes[n]);
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

/// Structured triangulation of the tensor grid `xs × ys`. Every cell is split
/// along its lower-left to upper-right diagonal; `region_of(xc, yc)` assigns
/// the region from the cell centre.
pub fn structured_grid(
    xs: &[f64],
    ys: &[f64],
    regions: Vec<Region>,
    region_of: impl Fn(f64, f64) -> usize,
) -> Result<TriMesh2D> {
    if xs.len() < 2 || ys.len() < 2 {
        return Err(Error::InvalidInput("grid needs at least two lines per direction".into()));
    }
    if xs.windows(2).any(|w| w[1] <= w[0]) || ys.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("grid lines must be strictly increasing".into()));
    }
    let nx = xs.len();
    let id = |i: usize, j: usize| j * nx + i;
    let mut nodes = Vec::with_capacity(nx * ys.len());
    for &y in ys {
        for &x in xs {
            nodes.push([x, y]);
        }
    }
    let mut tris = Vec::with_capacity(2 * (nx - 1) * (ys.len() - 1));
    for j in 0..ys.len() - 1 {
        for i in 0..nx - 1 {
            let r = region_of(0.5 * (xs[i] + xs[i + 1]), 0.5 * (ys[j] + ys[j + 1]));
            tris.push(([id(i, j), id(i + 1, j), id(i + 1, j + 1)], r));
            tris.push(([id(i, j), id(i + 1, j + 1), id(i, j + 1)], r));
        }
    }
    TriMesh2D::new(nodes, tris, regions)
}

/// Uniform rectangle `[x0,x1]×[y0,y1]` with `nx × ny` cells, single region 0.
pub fn structured_rect(x0: f64, x1: f64, y0: f64, y1: f64, nx: usize, ny: usize, conductor: bool) -> Result<TriMesh2D> {
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidInput("rectangle needs at least one cell per direction".into()));
    }
    let xs: Vec<f64> = (0..=nx).map(|i| x0 + (x1 - x0) * i as f64 / nx as f64).collect();
    let ys: Vec<f64> = (0..=ny).map(|j| y0 + (y1 - y0) * j as f64 / ny as f64).collect();
    let region = Region {
        id: 0,
        label: if conductor { "conductor" } else { "domain" }.into(),
        conductor,
    };
    structured_grid(&xs, &ys, vec![region], |_, _| 0)
}

/// `n` cells from `a` to `b` whose sizes grow geometrically, the first one
/// being `first` (clamped to the uniform size when that is larger).
pub fn graded_lines(a: f64, b: f64, n: usize, first: f64) -> Result<Vec<f64>> {
    if n == 0 || !(b > a) || !(first > 0.0) {
        return Err(Error::InvalidInput("graded_lines needs n ≥ 1, b > a, first > 0".into()));
    }
    let len = b - a;
    if first * n as f64 >= len {
        return Ok((0..=n).map(|i| a + len * i as f64 / n as f64).collect());
    }
    // solve first·(r^n − 1)/(r − 1) = len for r > 1 by bisection
    let total = |r: f64| first * (r.powi(n as i32) - 1.0) / (r - 1.0);
    let (mut lo, mut hi) = (1.0 + 1e-12, 2.0);
    while total(hi) < len {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if total(mid) < len {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let r = 0.5 * (lo + hi);
    let mut out = Vec::with_capacity(n + 1);
    let mut x = a;
    let mut h = first;
    out.push(a);
    for _ in 0..n - 1 {
        x += h;
        out.push(x);
        h *= r;
    }
    out.push(b);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> TriMesh2D {
        structured_rect(0.0, 1.0, 0.0, 1.0, 1, 1, true).unwrap()
    }

    #[test]
    fn canonical_ordering() {
        let m = TriMesh2D::new(
            vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
            vec![([2, 1, 0], 0)],
            vec![Region { id: 0, label: "a".into(), conductor: true }],
        )
        .unwrap();
        assert_eq!(m.triangle(0).nodes, [0, 1, 2]);
        assert!(m.triangle_area(0) > 0.0);
        assert_eq!(m.edges(), &[[0, 1], [0, 2], [1, 2]]);
    }

    #[test]
    fn edges_of_square() {
        let m = unit_square();
        assert_eq!(m.num_edges(), 5);
        assert_eq!(m.boundary_edges().len(), 4);
        assert_eq!(m.boundary_nodes(), vec![0, 1, 2, 3]);
        let mut shared = vec![0; m.num_edges()];
        for t in 0..m.num_triangles() {
            for e in m.triangle_edges(t) {
                shared[e] += 1;
            }
        }
        assert_eq!(shared.iter().filter(|&&c| c == 2).count(), 1);
    }

    #[test]
    fn degenerate_triangle_is_named() {
        let r = TriMesh2D::new(
            vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [0.0, 1.0]],
            vec![([0, 1, 3], 0), ([0, 1, 2], 0)],
            vec![Region { id: 0, label: "a".into(), conductor: false }],
        );
        assert!(matches!(r, Err(Error::DegenerateTriangle { index: 1, .. })));
    }

    #[test]
    fn flipped_edge_changes_sign() {
        let mut m = unit_square();
        let before = m.edge_signs(0).unwrap();
        let e = m.triangle_edges(0)[0];
        m.flip_edge(e);
        let after = m.edge_signs(0).unwrap();
        assert_eq!(after[0], -before[0]);
        assert_eq!(after[1], before[1]);
    }

    #[test]
    fn submesh_and_refinement() {
        let regions = vec![
            Region { id: 0, label: "wire".into(), conductor: true },
            Region { id: 1, label: "air".into(), conductor: false },
        ];
        let xs = [0.0, 0.5, 1.0, 2.0];
        let m = structured_grid(&xs, &xs, regions, |x, y| usize::from(x > 1.0 || y > 1.0)).unwrap();
        let (sub, parent_nodes, parent_tris) = m.submesh(|t| t.region == 0).unwrap();
        assert_eq!(sub.num_triangles(), 8);
        assert_eq!(sub.num_nodes(), 9);
        assert_eq!(parent_tris.len(), 8);
        for (i, &p) in parent_nodes.iter().enumerate() {
            assert_eq!(sub.node(i), m.node(p));
        }
        assert!((sub.area_where(|_| true) - 1.0).abs() < 1e-15);

        let (fine, parent) = m.refined().unwrap();
        assert_eq!(fine.num_triangles(), 4 * m.num_triangles());
        assert!((fine.area_where(|_| true) - 4.0).abs() < 1e-14);
        assert_eq!(parent.len(), fine.num_triangles());
    }

    #[test]
    fn graded_lines_first_cell_and_end() {
        let g = graded_lines(1.0, 10.0, 6, 0.25).unwrap();
        assert_eq!(g.len(), 7);
        assert!((g[1] - 1.25).abs() < 1e-12);
        assert_eq!(*g.last().unwrap(), 10.0);
        let steps: Vec<f64> = g.windows(2).map(|w| w[1] - w[0]).collect();
        assert!(steps.windows(2).all(|s| s[1] > s[0]));
    }
}
