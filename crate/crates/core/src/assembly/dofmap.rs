use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    /// Transversal edge block followed by the longitudinal nodal block.
    Magnetic,
    /// Nodal temperature coefficients.
    Thermal,
}

/// Global numbering of Q3D coefficients. Within a block the index is
/// `w · (#2D entities) + (2D index)`, matching `A_SE ⊗ B_FE`.
#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    kind: FieldKind,
    n_z: usize,
    n_edges: usize,
    n_nodes: usize,
    constrained: Vec<bool>,
}

impl DofMap {
    pub fn magnetic(n_z: usize, n_edges: usize, n_nodes: usize) -> Self {
        Self {
            kind: FieldKind::Magnetic,
            n_z,
            n_edges,
            n_nodes,
            constrained: vec![false; n_z * (n_edges + n_nodes)],
        }
    }

    pub fn thermal(n_z: usize, n_nodes: usize) -> Self {
        Self {
            kind: FieldKind::Thermal,
            n_z,
            n_edges: 0,
            n_nodes,
            constrained: vec![false; n_z * n_nodes],
        }
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.constrained.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constrained.is_empty()
    }

    pub fn num_z(&self) -> usize {
        self.n_z
    }

    pub fn num_edges(&self) -> usize {
        self.n_edges
    }

    pub fn num_nodes(&self) -> usize {
        self.n_nodes
    }

    /// Size of the transversal block (zero for thermal maps).
    pub fn num_transversal(&self) -> usize {
        self.n_z * self.n_edges
    }

    #[inline]
    pub fn t_index(&self, w: usize, e: usize) -> usize {
        debug_assert!(self.kind == FieldKind::Magnetic && w < self.n_z && e < self.n_edges);
        w * self.n_edges + e
    }

    /// Longitudinal block for magnetic maps, the temperature for thermal maps.
    #[inline]
    pub fn node_index(&self, w: usize, j: usize) -> usize {
        debug_assert!(w < self.n_z && j < self.n_nodes);
        self.num_transversal() + w * self.n_nodes + j
    }

    pub fn constrain(&mut self, i: usize) {
        self.constrained[i] = true;
    }

    pub fn is_constrained(&self, i: usize) -> bool {
        self.constrained[i]
    }

    pub fn constrained_mask(&self) -> &[bool] {
        &self.constrained
    }

    pub fn free_dofs(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| !self.constrained[i]).collect()
    }

    pub fn num_free(&self) -> usize {
        self.constrained.iter().filter(|c| !**c).count()
    }
}

/// Prescribed values on the constrained DoFs of a [`DofMap`].
#[derive(Debug, Clone)]
pub struct DirichletData {
    mask: Vec<bool>,
    values: Vec<f64>,
}

impl DirichletData {
    /// Homogeneous values on every constrained DoF.
    pub fn new(dofs: &DofMap) -> Self {
        Self {
            mask: dofs.constrained.clone(),
            values: vec![0.0; dofs.len()],
        }
    }

    pub fn from_mask(mask: Vec<bool>) -> Self {
        let n = mask.len();
        Self {
            mask,
            values: vec![0.0; n],
        }
    }

    pub fn set(&mut self, i: usize, value: f64) -> Result<()> {
        if !self.mask.get(i).copied().unwrap_or(false) {
            return Err(Error::InvalidInput(format!(
                "value prescribed on unconstrained DoF {i}"
            )));
        }
        self.values[i] = value;
        Ok(())
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// System restricted to the free DoFs.
#[derive(Debug, Clone)]
pub struct ReducedSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    free: Vec<usize>,
    full_values: Vec<f64>,
}

impl ReducedSystem {
    pub fn free_dofs(&self) -> &[usize] {
        &self.free
    }

    /// Full vector from a solution on the free DoFs.
    pub fn expand(&self, x_free: &[f64]) -> Vec<f64> {
        let mut x = self.full_values.clone();
        for (&i, &v) in self.free.iter().zip(x_free) {
            x[i] = v;
        }
        x
    }

    /// Restriction of a full vector to the free DoFs.
    pub fn restrict(&self, x: &[f64]) -> Vec<f64> {
        self.free.iter().map(|&i| x[i]).collect()
    }
}

/// Eliminates constrained rows and columns, lifting the prescribed values into
/// the right-hand side. Symmetry of `a` is preserved.
pub fn apply_dirichlet(a: &CsrMatrix, b: &[f64], bc: &DirichletData) -> Result<ReducedSystem> {
    let n = a.nrows();
    if a.ncols() != n || b.len() != n || bc.mask.len() != n {
        return Err(Error::Dimension(format!(
            "system {}x{}, rhs {}, constraint mask {}",
            n,
            a.ncols(),
            b.len(),
            bc.mask.len()
        )));
    }
    let free: Vec<usize> = (0..n).filter(|&i| !bc.mask[i]).collect();
    let lift: Vec<f64> = if bc.values.iter().any(|&v| v != 0.0) {
        a.mul_vec(&bc.values)
    } else {
        vec![0.0; n]
    };
    let rhs = free.iter().map(|&i| b[i] - lift[i]).collect();
    Ok(ReducedSystem {
        matrix: a.submatrix(&free, &free),
        rhs,
        free,
        full_values: bc.values.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linsolve::solve_spd;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn layout_is_kronecker_compatible() {
        let d = DofMap::magnetic(3, 5, 4);
        assert_eq!(d.len(), 27);
        assert_eq!(d.t_index(2, 4), 14);
        assert_eq!(d.node_index(0, 0), 15);
        assert_eq!(d.node_index(2, 3), 26);
        let t = DofMap::thermal(31, 26);
        assert_eq!(t.len(), 806);
        assert_eq!(t.node_index(1, 0), 26);
    }

    #[test]
    fn prescribing_unconstrained_dof_fails() {
        let mut d = DofMap::thermal(2, 2);
        d.constrain(1);
        let mut bc = DirichletData::new(&d);
        assert!(bc.set(1, 3.0).is_ok());
        assert!(bc.set(0, 3.0).is_err());
    }

    #[test]
    fn constraining_everything_gives_empty_system() {
        let a = CsrMatrix::identity(3);
        let bc = DirichletData::from_mask(vec![true; 3]);
        let r = apply_dirichlet(&a, &[1.0, 2.0, 3.0], &bc).unwrap();
        assert_eq!(r.matrix.nrows(), 0);
        assert!(r.rhs.is_empty());
        assert_eq!(r.expand(&[]), vec![0.0; 3]);
    }

    #[test]
    fn matches_penalty_method() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 12;
        let g = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let spd = &g * g.transpose() + DMatrix::identity(n, n) * n as f64;
        let a = CsrMatrix::from_dense(&spd);
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut mask = vec![false; n];
        for i in [1, 4, 5, 9] {
            mask[i] = true;
        }
        let mut bc = DirichletData::from_mask(mask.clone());
        for i in [1, 4, 5, 9] {
            bc.set(i, rng.gen_range(-2.0..2.0)).unwrap();
        }
        let reduced = apply_dirichlet(&a, &b, &bc).unwrap();
        assert_eq!(reduced.matrix.max_asymmetry(), 0.0);
        let x = reduced.expand(&solve_spd(&reduced.matrix, &reduced.rhs).unwrap().solution);

        let penalty = 1e12;
        let mut pen = spd.clone();
        let mut pb = b.clone();
        for i in 0..n {
            if mask[i] {
                pen[(i, i)] += penalty;
                pb[i] += penalty * bc.values()[i];
            }
        }
        let xp = pen.lu().solve(&nalgebra::DVector::from_vec(pb)).unwrap();
        let scale = xp.norm();
        for i in 0..n {
            assert!((x[i] - xp[i]).abs() < 1e-6 * scale, "dof {i}");
        }
    }
}
