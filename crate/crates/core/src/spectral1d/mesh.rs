use nalgebra::{DMatrix, DVector};

use super::chebyshev::chebyshev_points;
use super::lobatto::{lobatto_all, MAX_BASIS_ORDER};
use super::reference::ReferenceTensorSet;
use crate::error::{Error, Result};
use crate::sparse::{CsrMatrix, TripletBuilder};

/// Longitudinal spectral-element mesh: `K` subintervals with per-element orders.
///
/// Global numbering runs along `z`: vertex `k` sits at index `Σ_{i<k} p_i`, and the
/// `p_k − 1` interior modes of element `k` follow it. Element-local index 0 is
/// the left vertex mode, 1 the right vertex mode, `2..=p_k` the interior modes.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralLineMesh {
    breakpoints: Vec<f64>,
    orders: Vec<usize>,
    offsets: Vec<usize>,
}

impl SpectralLineMesh {
    pub fn new(breakpoints: Vec<f64>, orders: Vec<usize>) -> Result<Self> {
        if breakpoints.len() < 2 {
            return Err(Error::InvalidInput("spectral mesh needs at least one element".into()));
        }
        if orders.len() != breakpoints.len() - 1 {
            return Err(Error::InvalidInput(format!(
                "{} breakpoints need {} orders, got {}",
                breakpoints.len(),
                breakpoints.len() - 1,
                orders.len()
            )));
        }
        if breakpoints.iter().any(|z| !z.is_finite()) {
            return Err(Error::InvalidInput("non-finite breakpoint".into()));
        }
        if let Some(k) = breakpoints.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput(format!(
                "breakpoints not strictly increasing at element {k}"
            )));
        }
        if let Some(k) = orders.iter().position(|&p| p < 1 || p > MAX_BASIS_ORDER) {
            return Err(Error::InvalidInput(format!(
                "element {k} has order {} outside 1..={MAX_BASIS_ORDER}",
                orders[k]
            )));
        }
        let mut offsets = Vec::with_capacity(orders.len() + 1);
        offsets.push(0);
        for p in &orders {
            offsets.push(offsets.last().unwrap() + p);
        }
        Ok(Self {
            breakpoints,
            orders,
            offsets,
        })
    }

    pub fn uniform(z0: f64, z1: f64, elements: usize, order: usize) -> Result<Self> {
        if elements == 0 {
            return Err(Error::InvalidInput("spectral mesh needs at least one element".into()));
        }
        let h = (z1 - z0) / elements as f64;
        let mut bp: Vec<f64> = (0..=elements).map(|i| z0 + h * i as f64).collect();
        bp[elements] = z1;
        Self::new(bp, vec![order; elements])
    }

    pub fn num_elements(&self) -> usize {
        self.orders.len()
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn orders(&self) -> &[usize] {
        &self.orders
    }

    pub fn order(&self, k: usize) -> usize {
        self.orders[k]
    }

    pub fn max_order(&self) -> usize {
        *self.orders.iter().max().unwrap()
    }

    pub fn start(&self) -> f64 {
        self.breakpoints[0]
    }

    pub fn end(&self) -> f64 {
        *self.breakpoints.last().unwrap()
    }

    pub fn length(&self) -> f64 {
        self.end() - self.start()
    }

    pub fn element_bounds(&self, k: usize) -> (f64, f64) {
        (self.breakpoints[k], self.breakpoints[k + 1])
    }

    pub fn element_length(&self, k: usize) -> f64 {
        self.breakpoints[k + 1] - self.breakpoints[k]
    }

    /// Number of global longitudinal functions, `Σ p_k + 1`.
    pub fn num_functions(&self) -> usize {
        self.offsets[self.orders.len()] + 1
    }

    /// Global index of the vertex mode at breakpoint `k`.
    pub fn vertex_index(&self, k: usize) -> usize {
        self.offsets[k]
    }

    pub fn local_to_global(&self, k: usize) -> Vec<usize> {
        let p = self.orders[k];
        let off = self.offsets[k];
        let mut map = Vec::with_capacity(p + 1);
        map.push(off);
        map.push(off + p);
        map.extend((2..=p).map(|q| off + q - 1));
        map
    }

    pub fn to_physical(&self, k: usize, xi: f64) -> f64 {
        let (a, b) = self.element_bounds(k);
        0.5 * (a + b) + 0.5 * (b - a) * xi
    }

    pub fn to_reference(&self, k: usize, z: f64) -> f64 {
        let (a, b) = self.element_bounds(k);
        (2.0 * z - a - b) / (b - a)
    }

    /// Element containing `z` and the reference coordinate. Points on an
    /// interior breakpoint belong to the element on the right.
    pub fn locate(&self, z: f64) -> Result<(usize, f64)> {
        let tol = 1e-12 * self.length();
        if !(z >= self.start() - tol && z <= self.end() + tol) {
            return Err(Error::Domain(format!(
                "z = {z} outside [{}, {}]",
                self.start(),
                self.end()
            )));
        }
        let k = match self.breakpoints.partition_point(|&b| b <= z) {
            0 => 0,
            i => (i - 1).min(self.num_elements() - 1),
        };
        Ok((k, self.to_reference(k, z).clamp(-1.0, 1.0)))
    }

    /// Value of `Σ c_w φ_w(z)`.
    pub fn eval(&self, coeffs: &[f64], z: f64) -> Result<f64> {
        Ok(self.eval_with_derivative(coeffs, z)?.0)
    }

    /// Value and `d/dz` of `Σ c_w φ_w(z)`.
    pub fn eval_with_derivative(&self, coeffs: &[f64], z: f64) -> Result<(f64, f64)> {
        if coeffs.len() != self.num_functions() {
            return Err(Error::Dimension(format!(
                "{} coefficients for {} functions",
                coeffs.len(),
                self.num_functions()
            )));
        }
        let (k, xi) = self.locate(z)?;
        Ok(self.eval_local(coeffs, k, xi))
    }

    pub(crate) fn eval_local(&self, coeffs: &[f64], k: usize, xi: f64) -> (f64, f64) {
        let p = self.orders[k];
        let mut v = vec![0.0; p + 1];
        let mut d = vec![0.0; p + 1];
        lobatto_all(p, xi, &mut v, &mut d);
        let jac = 2.0 / self.element_length(k);
        let map = self.local_to_global(k);
        map.iter().enumerate().fold((0.0, 0.0), |(s, ds), (a, &g)| {
            (s + coeffs[g] * v[a], ds + coeffs[g] * d[a] * jac)
        })
    }

    /// Collocation interpolant of `f`: exact vertex values plus interior modes
    /// fitted at the interior Chebyshev–Gauss–Lobatto points of each element.
    /// Reproduces every polynomial of degree `≤ p_k` on element `k` exactly.
    pub fn interpolate(&self, f: impl Fn(f64) -> f64) -> Result<Vec<f64>> {
        let mut c = vec![0.0; self.num_functions()];
        for k in 0..=self.num_elements() {
            c[self.vertex_index(k)] = f(self.breakpoints[k]);
        }
        for k in 0..self.num_elements() {
            let p = self.orders[k];
            if p < 2 {
                continue;
            }
            let map = self.local_to_global(k);
            let (fa, fb) = (c[map[0]], c[map[1]]);
            let pts = chebyshev_points(p);
            let interior = &pts[1..p];
            let mut vand = DMatrix::zeros(p - 1, p - 1);
            let mut rhs = DVector::zeros(p - 1);
            let mut v = vec![0.0; p + 1];
            let mut d = vec![0.0; p + 1];
            for (i, &xi) in interior.iter().enumerate() {
                lobatto_all(p, xi, &mut v, &mut d);
                for q in 2..=p {
                    vand[(i, q - 2)] = v[q];
                }
                rhs[i] = f(self.to_physical(k, xi)) - fa * v[0] - fb * v[1];
            }
            let sol = vand
                .lu()
                .solve(&rhs)
                .ok_or_else(|| Error::InvalidInput("singular collocation system".into()))?;
            for q in 2..=p {
                c[map[q]] = sol[q - 2];
            }
        }
        Ok(c)
    }

    /// `∫ φ_w dz` for every global function: the load of a z-uniform unit source.
    pub fn uniform_load(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.num_functions()];
        for k in 0..self.num_elements() {
            let h = self.element_length(k);
            let map = self.local_to_global(k);
            out[map[0]] += 0.5 * h;
            out[map[1]] += 0.5 * h;
            // among the interior modes only φ_2 has a nonzero mean: ∫ φ_2 dξ = −2/sqrt(6)
            if self.orders[k] >= 2 {
                out[map[2]] += 0.5 * h * (-2.0 / 6.0f64.sqrt());
            }
        }
        out
    }

    /// Assembles a global `n × n` matrix from per-element dense blocks.
    pub fn assemble(&self, local: impl Fn(usize) -> DMatrix<f64>) -> CsrMatrix {
        let n = self.num_functions();
        let mut tb = TripletBuilder::new(n, n);
        for k in 0..self.num_elements() {
            let m = local(k);
            let map = self.local_to_global(k);
            for (a, &ga) in map.iter().enumerate() {
                for (b, &gb) in map.iter().enumerate() {
                    tb.push(ga, gb, m[(a, b)]);
                }
            }
        }
        tb.build()
    }

    /// Bisects every element listed in `elements`, keeping its order.
    pub fn bisect(&self, elements: &[usize]) -> Result<Self> {
        let mut bp = Vec::with_capacity(self.breakpoints.len() + elements.len());
        let mut orders = Vec::with_capacity(self.orders.len() + elements.len());
        for k in 0..self.num_elements() {
            let (a, b) = self.element_bounds(k);
            bp.push(a);
            orders.push(self.orders[k]);
            if elements.contains(&k) {
                bp.push(0.5 * (a + b));
                orders.push(self.orders[k]);
            }
        }
        bp.push(self.end());
        Self::new(bp, orders)
    }

    /// Values of `Σ c_w φ_w` at [`Self::chebyshev_samples`] of element `k`.
    pub fn chebyshev_trace(&self, coeffs: &[f64], k: usize, cheb_order: usize) -> Result<Vec<f64>> {
        if coeffs.len() != self.num_functions() {
            return Err(Error::Dimension(format!(
                "{} coefficients for {} functions",
                coeffs.len(),
                self.num_functions()
            )));
        }
        if k >= self.num_elements() {
            return Err(Error::InvalidInput(format!("element {k} out of range")));
        }
        Ok(chebyshev_points(cheb_order)
            .iter()
            .map(|&xi| self.eval_local(coeffs, k, xi).0)
            .collect())
    }

    /// Material sampling points of element `k`: the `M + 1` Chebyshev points in
    /// transform order (from the right end of the element to the left).
    pub fn chebyshev_samples(&self, k: usize, cheb_order: usize) -> Vec<f64> {
        chebyshev_points(cheb_order)
            .iter()
            .map(|&xi| self.to_physical(k, xi))
            .collect()
    }
}

/// Constant-coefficient element matrices `(K_k, M_k, D_k)` on element `k`:
/// `α(2/h)·refK[0]`, `α(h/2)·refM[0]`, `α·refD[0]`.
pub fn se_matrices_constant(
    mesh: &SpectralLineMesh,
    k: usize,
    alpha: f64,
    refs: &ReferenceTensorSet,
) -> Result<(DMatrix<f64>, DMatrix<f64>, DMatrix<f64>)> {
    if k >= mesh.num_elements() {
        return Err(Error::InvalidInput(format!("element {k} out of range")));
    }
    if !alpha.is_finite() {
        return Err(Error::InvalidInput("non-finite coefficient".into()));
    }
    let h = mesh.element_length(k);
    if !(h > 0.0) {
        return Err(Error::InvalidInput(format!("element {k} has length {h}")));
    }
    let p = mesh.order(k);
    let (rk, rm, rd) = refs.slices(0, p)?;
    Ok(((rk * alpha) * (2.0 / h), (rm * alpha) * (h / 2.0), rd * alpha))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral1d::gauss_legendre;

    #[test]
    fn rejects_invalid_meshes() {
        assert!(SpectralLineMesh::new(vec![0.0], vec![]).is_err());
        assert!(SpectralLineMesh::new(vec![0.0, 1.0, 1.0], vec![2, 2]).is_err());
        assert!(SpectralLineMesh::new(vec![0.0, 1.0], vec![0]).is_err());
        assert!(SpectralLineMesh::new(vec![0.0, 1.0], vec![2, 2]).is_err());
    }

    #[test]
    fn function_count_and_numbering() {
        let m = SpectralLineMesh::uniform(0.0, 1.0, 5, 6).unwrap();
        assert_eq!(m.num_functions(), 31);
        assert_eq!(m.local_to_global(0), vec![0, 6, 1, 2, 3, 4, 5]);
        assert_eq!(m.local_to_global(1)[0], 6);
        assert_eq!(m.vertex_index(5), 30);
    }

    #[test]
    fn interpolation_reproduces_polynomials() {
        let m = SpectralLineMesh::new(vec![0.0, 0.3, 1.0], vec![4, 5]).unwrap();
        let f = |z: f64| 1.0 - 2.0 * z + 3.0 * z.powi(3) - z.powi(4);
        let c = m.interpolate(f).unwrap();
        for i in 0..=50 {
            let z = i as f64 / 50.0;
            assert!((m.eval(&c, z).unwrap() - f(z)).abs() < 1e-13);
        }
    }

    #[test]
    fn uniform_load_integrates_basis() {
        let m = SpectralLineMesh::new(vec![0.0, 0.4, 1.0], vec![3, 4]).unwrap();
        let load = m.uniform_load();
        let rule = gauss_legendre(8).unwrap();
        for w in 0..m.num_functions() {
            let mut e = vec![0.0; m.num_functions()];
            e[w] = 1.0;
            let exact: f64 = (0..m.num_elements())
                .map(|k| {
                    let (a, b) = m.element_bounds(k);
                    rule.integrate_on(a, b, |z| m.eval(&e, z).unwrap())
                })
                .sum();
            assert!((load[w] - exact).abs() < 1e-14, "w={w}: {} vs {exact}", load[w]);
        }
        // the constant field (vertex modes 1, interior modes 0) integrates to the length
        let ones: f64 = (0..=m.num_elements()).map(|k| load[m.vertex_index(k)]).sum();
        assert!((ones - 1.0).abs() < 1e-15);
    }

    #[test]
    fn constant_matrices_scale_with_jacobian() {
        let refs = ReferenceTensorSet::build(4, 0).unwrap();
        let unit = SpectralLineMesh::uniform(-1.0, 1.0, 1, 4).unwrap();
        let (k, _, _) = se_matrices_constant(&unit, 0, 1.0, &refs).unwrap();
        let (rk, _, _) = refs.slices(0, 4).unwrap();
        assert_eq!(k, rk);

        let (z, _, _) = se_matrices_constant(&unit, 0, 0.0, &refs).unwrap();
        assert!(z.iter().all(|&v| v == 0.0));

        let short = SpectralLineMesh::uniform(0.0, 0.5, 1, 4).unwrap();
        let (k, _, _) = se_matrices_constant(&short, 0, 3.0, &refs).unwrap();
        assert!((k[(0, 0)] - 6.0).abs() < 1e-14);
    }

    #[test]
    fn locate_assigns_breakpoints_to_the_right() {
        let m = SpectralLineMesh::uniform(0.0, 1.0, 4, 2).unwrap();
        assert_eq!(m.locate(0.25).unwrap().0, 1);
        assert_eq!(m.locate(1.0).unwrap(), (3, 1.0));
        assert!(m.locate(1.1).is_err());
    }
}
