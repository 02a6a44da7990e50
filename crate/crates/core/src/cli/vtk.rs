use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::fem2d::TriangleGeometry;
use crate::solver::Q3DModel;
use crate::spectral1d::lobatto_all;

/// Legacy-VTK structured grid with point scalars.
#[derive(Debug, Clone, PartialEq)]
pub struct VtkGrid {
    pub title: String,
    pub dims: [usize; 3],
    /// x varies fastest, then y, then z.
    pub points: Vec<[f64; 3]>,
    pub scalars: Vec<(String, Vec<f64>)>,
}

/// Nine significant digits.
pub fn format_value(v: f64) -> String {
    format!("{v:.8e}")
}

impl VtkGrid {
    pub fn to_ascii(&self) -> String {
        let n = self.points.len();
        let mut s = String::with_capacity(64 * n * (1 + self.scalars.len()));
        let title = self.title.replace('\n', " ");
        let _ = writeln!(s, "# vtk DataFile Version 3.0\n{title}\nASCII\nDATASET STRUCTURED_GRID");
        let _ = writeln!(s, "DIMENSIONS {} {} {}", self.dims[0], self.dims[1], self.dims[2]);
        let _ = writeln!(s, "POINTS {n} double");
        for p in &self.points {
            let _ = writeln!(s, "{} {} {}", format_value(p[0]), format_value(p[1]), format_value(p[2]));
        }
        let _ = writeln!(s, "POINT_DATA {n}");
        for (name, values) in &self.scalars {
            let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
            for v in values {
                let _ = writeln!(s, "{}", format_value(*v));
            }
        }
        s
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_ascii()).map_err(|e| Error::io(path, e))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let bad = |m: &str| Error::InvalidInput(format!("VTK: {m}"));
        let mut lines = text.lines();
        if !lines.next().is_some_and(|l| l.starts_with("# vtk DataFile")) {
            return Err(bad("missing header"));
        }
        let title = lines.next().ok_or_else(|| bad("missing title"))?.to_string();
        let mut tokens = lines.flat_map(str::split_whitespace);
        let mut next = |what: &str| -> Result<String> { tokens.next().map(str::to_string).ok_or_else(|| bad(what)) };
        for word in ["ASCII", "DATASET", "STRUCTURED_GRID", "DIMENSIONS"] {
            let t = next(word)?;
            if t != word {
                return Err(bad(&format!("expected {word}, found {t}")));
            }
        }
        let parse_usize = |s: String| s.parse::<usize>().map_err(|_| bad("bad integer"));
        let parse_f64 = |s: String| s.parse::<f64>().map_err(|_| bad("bad number"));
        let dims = [parse_usize(next("dims")?)?, parse_usize(next("dims")?)?, parse_usize(next("dims")?)?];
        if next("POINTS")? != "POINTS" {
            return Err(bad("expected POINTS"));
        }
        let n = parse_usize(next("count")?)?;
        if n != dims.iter().product::<usize>() {
            return Err(bad("point count does not match dimensions"));
        }
        next("type")?;
        let mut points = Vec::with_capacity(n);
        for _ in 0..n {
            points.push([parse_f64(next("x")?)?, parse_f64(next("y")?)?, parse_f64(next("z")?)?]);
        }
        if next("POINT_DATA")? != "POINT_DATA" || parse_usize(next("count")?)? != n {
            return Err(bad("expected POINT_DATA"));
        }
        let mut scalars = Vec::new();
        while let Ok(word) = next("SCALARS") {
            if word != "SCALARS" {
                return Err(bad(&format!("unexpected token {word}")));
            }
            let name = next("name")?;
            next("type")?;
            next("components")?;
            next("LOOKUP_TABLE")?;
            next("table")?;
            let values = (0..n).map(|_| parse_f64(next("value")?)).collect::<Result<Vec<_>>>()?;
            scalars.push((name, values));
        }
        Ok(Self { title, dims, points, scalars })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn scalar(&self, name: &str) -> Option<&[f64]> {
        self.scalars.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_slice())
    }
}

fn locate(mesh: &crate::fem2d::TriMesh2D, p: [f64; 2]) -> Option<(usize, TriangleGeometry, [f64; 3])> {
    (0..mesh.num_triangles()).find_map(|t| {
        let g = TriangleGeometry::new(mesh.triangle_coords(t));
        let c = g.point([1.0 / 3.0; 3]);
        let bary = [0, 1, 2].map(|i| 1.0 / 3.0 + g.grads[i][0] * (p[0] - c[0]) + g.grads[i][1] * (p[1] - c[1]));
        bary.iter().all(|&b| b >= -1e-10).then_some((t, g, bary))
    })
}

fn z_shapes(model: &Q3DModel, z: f64) -> Result<(Vec<usize>, Vec<f64>, Vec<f64>)> {
    let (k, xi) = model.zmesh.locate(z)?;
    let p = model.zmesh.order(k);
    let mut v = vec![0.0; p + 1];
    let mut d = vec![0.0; p + 1];
    lobatto_all(p, xi, &mut v, &mut d);
    let scale = 2.0 / model.zmesh.element_length(k);
    d.iter_mut().for_each(|x| *x *= scale);
    Ok((model.zmesh.local_to_global(k), v, d))
}

/// Temperature at `(x, y, z)`; `None` outside the conductor.
pub fn temperature_at(model: &Q3DModel, u: &[f64], x: f64, y: f64, z: f64) -> Result<Option<f64>> {
    let Some((t, _, bary)) = locate(&model.thermal_mesh, [x, y]) else {
        return Ok(None);
    };
    let dofs = model.thermal_dofs();
    let nodes = model.thermal_mesh.triangle(t).nodes;
    let (map, v, _) = z_shapes(model, z)?;
    let mut s = 0.0;
    for (a, &w) in map.iter().enumerate() {
        for i in 0..3 {
            s += v[a] * bary[i] * u[dofs.node_index(w, nodes[i])];
        }
    }
    Ok(Some(s))
}

/// `B = ∇×A` at `(x, y, z)`; `None` outside the magnetic cross-section.
pub fn flux_density_at(model: &Q3DModel, a: &[f64], x: f64, y: f64, z: f64) -> Result<Option<[f64; 3]>> {
    let Some((t, g, bary)) = locate(&model.mesh, [x, y]) else {
        return Ok(None);
    };
    let dofs = model.magnetic_dofs();
    let edges = model.mesh.triangle_edges(t);
    let signs = model.mesh.edge_signs(t)?;
    let nodes = model.mesh.triangle(t).nodes;
    let (map, v, d) = z_shapes(model, z)?;
    let (mut dz_at, mut grad_al, mut bz) = ([0.0; 2], [0.0; 2], 0.0);
    for (a_loc, &w) in map.iter().enumerate() {
        for i in 0..3 {
            let c = signs[i] * a[dofs.t_index(w, edges[i])];
            let wi = g.whitney(i, bary);
            dz_at[0] += c * d[a_loc] * wi[0];
            dz_at[1] += c * d[a_loc] * wi[1];
            bz += c * v[a_loc] * g.whitney_curl(i);
            let cl = a[dofs.node_index(w, nodes[i])] * v[a_loc];
            grad_al[0] += cl * g.grads[i][0];
            grad_al[1] += cl * g.grads[i][1];
        }
    }
    let (tx, ty) = (grad_al[0] - dz_at[0], grad_al[1] - dz_at[1]);
    Ok(Some([ty, -tx, bz]))
}

/// Temperature and `|B|` on a `dims` grid over the conductor box
/// `[0, lx] × [0, ly] × [z0, z1]`.
pub fn sample_fields(model: &Q3DModel, a: &[f64], u: &[f64], dims: [usize; 3], title: &str) -> Result<VtkGrid> {
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in model.thermal_mesh.nodes() {
        for c in 0..2 {
            lo[c] = lo[c].min(p[c]);
            hi[c] = hi[c].max(p[c]);
        }
    }
    let axis = |a: f64, b: f64, n: usize| -> Vec<f64> { (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect() };
    let xs = axis(lo[0], hi[0], dims[0]);
    let ys = axis(lo[1], hi[1], dims[1]);
    let zs = axis(model.zmesh.start(), model.zmesh.end(), dims[2]);
    let mut points = Vec::with_capacity(dims.iter().product());
    let mut theta = Vec::with_capacity(points.capacity());
    let mut babs = Vec::with_capacity(points.capacity());
    for &z in &zs {
        for &y in &ys {
            for &x in &xs {
                points.push([x, y, z]);
                theta.push(temperature_at(model, u, x, y, z)?.unwrap_or(f64::NAN));
                let b = flux_density_at(model, a, x, y, z)?.unwrap_or([f64::NAN; 3]);
                babs.push((b[0] * b[0] + b[1] * b[1] + b[2] * b[2]).sqrt());
            }
        }
    }
    Ok(VtkGrid {
        title: title.to_string(),
        dims,
        points,
        scalars: vec![("temperature_K".into(), theta), ("B_abs_T".into(), babs)],
    })
}
