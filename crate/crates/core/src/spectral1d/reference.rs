//! Precomputed triple-product integrals on the reference interval:
//!
//! ```text
//! refK[m][p][q] = ∫ T_m φ_q' φ_p' dξ
//! refM[m][p][q] = ∫ T_m φ_q  φ_p  dξ
//! refD[m][p][q] = ∫ T_m φ_q' φ_p  dξ
//! ```
//!
//! Contracting them with the Chebyshev coefficients of a material along an
//! element gives the element's nonlinear stiffness, mass and damping matrices
//! without quadrature at assembly time. The tensors carry no geometry, so they
//! are cached on disk and reused across runs.

use std::fs;
use std::path::{Path, PathBuf};

use log::warn;
use nalgebra::DMatrix;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use super::lobatto::{lobatto_all, BASIS_ID, MAX_BASIS_ORDER};
use super::quadrature::gauss_legendre;
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"Q3DREFT1";
const ID_LEN: usize = 16;
const HEADER_LEN: usize = 8 + ID_LEN + 4 + 4 + 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CacheStatus {
    /// Read from a valid cache file.
    Loaded,
    /// No cache file existed; built and written.
    Built,
    /// The cache file was unreadable or failed its checksum; rebuilt.
    Rebuilt,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceTensorSet {
    max_basis_order: usize,
    max_cheb_order: usize,
    stiffness: Vec<f64>,
    mass: Vec<f64>,
    damping: Vec<f64>,
}

impl ReferenceTensorSet {
    /// Gauss points used for the build: exact for degree `M + 2P` plus a margin.
    pub fn quadrature_points(max_basis_order: usize, max_cheb_order: usize) -> usize {
        (max_cheb_order + 2 * max_basis_order + 1).div_ceil(2) + 2
    }

    pub fn build(max_basis_order: usize, max_cheb_order: usize) -> Result<Self> {
        if max_basis_order < 1 || max_basis_order > MAX_BASIS_ORDER {
            return Err(Error::InvalidInput(format!(
                "basis order {max_basis_order} outside 1..={MAX_BASIS_ORDER}"
            )));
        }
        let np = max_basis_order + 1;
        let rule = gauss_legendre(Self::quadrature_points(max_basis_order, max_cheb_order))?;

        // tabulate basis values and derivatives at the quadrature nodes once
        let mut vals = vec![vec![0.0; np]; rule.len()];
        let mut ders = vec![vec![0.0; np]; rule.len()];
        for (i, &x) in rule.nodes.iter().enumerate() {
            lobatto_all(max_basis_order, x, &mut vals[i], &mut ders[i]);
        }
        let cheb: Vec<Vec<f64>> = rule
            .nodes
            .iter()
            .map(|&x| {
                let mut t = vec![1.0; max_cheb_order + 1];
                if max_cheb_order >= 1 {
                    t[1] = x;
                }
                for m in 2..=max_cheb_order {
                    t[m] = 2.0 * x * t[m - 1] - t[m - 2];
                }
                t
            })
            .collect();

        let per_m: Vec<[Vec<f64>; 3]> = (0..=max_cheb_order)
            .into_par_iter()
            .map(|m| {
                let mut k = vec![0.0; np * np];
                let mut ms = vec![0.0; np * np];
                let mut d = vec![0.0; np * np];
                for p in 0..np {
                    for q in 0..np {
                        let (mut sk, mut sm, mut sd) = (0.0, 0.0, 0.0);
                        for i in 0..rule.len() {
                            let wt = rule.weights[i] * cheb[i][m];
                            sk += wt * ders[i][q] * ders[i][p];
                            sm += wt * vals[i][q] * vals[i][p];
                            sd += wt * ders[i][q] * vals[i][p];
                        }
                        d[p * np + q] = sd;
                        // K and M are symmetric; keep them bitwise so
                        if q >= p {
                            k[p * np + q] = sk;
                            ms[p * np + q] = sm;
                            k[q * np + p] = sk;
                            ms[q * np + p] = sm;
                        }
                    }
                }
                [k, ms, d]
            })
            .collect();

        let mut set = Self {
            max_basis_order,
            max_cheb_order,
            stiffness: Vec::with_capacity(per_m.len() * np * np),
            mass: Vec::with_capacity(per_m.len() * np * np),
            damping: Vec::with_capacity(per_m.len() * np * np),
        };
        for [k, m, d] in per_m {
            set.stiffness.extend(k);
            set.mass.extend(m);
            set.damping.extend(d);
        }
        Ok(set)
    }

    pub fn max_basis_order(&self) -> usize {
        self.max_basis_order
    }

    pub fn max_cheb_order(&self) -> usize {
        self.max_cheb_order
    }

    #[inline]
    fn index(&self, m: usize, p: usize, q: usize) -> usize {
        let np = self.max_basis_order + 1;
        (m * np + p) * np + q
    }

    pub fn stiffness(&self, m: usize, p: usize, q: usize) -> f64 {
        self.stiffness[self.index(m, p, q)]
    }

    pub fn mass(&self, m: usize, p: usize, q: usize) -> f64 {
        self.mass[self.index(m, p, q)]
    }

    pub fn damping(&self, m: usize, p: usize, q: usize) -> f64 {
        self.damping[self.index(m, p, q)]
    }

    /// The leading `(order + 1)²` blocks of tensor slice `m`.
    pub fn slices(&self, m: usize, order: usize) -> Result<(DMatrix<f64>, DMatrix<f64>, DMatrix<f64>)> {
        self.contract_with(&{
            let mut e = vec![0.0; m + 1];
            e[m] = 1.0;
            e
        }, order)
    }

    /// `Σ_m c_m ref*[m]` restricted to basis order `order`, on the reference
    /// interval (no Jacobian factors).
    pub fn contract_with(
        &self,
        coeffs: &[f64],
        order: usize,
    ) -> Result<(DMatrix<f64>, DMatrix<f64>, DMatrix<f64>)> {
        if coeffs.len() > self.max_cheb_order + 1 {
            return Err(Error::ChebyshevOrder {
                requested: coeffs.len() - 1,
                available: self.max_cheb_order,
            });
        }
        if order > self.max_basis_order {
            return Err(Error::InvalidInput(format!(
                "basis order {order} exceeds reference-tensor order {}",
                self.max_basis_order
            )));
        }
        let n = order + 1;
        let mut k = DMatrix::zeros(n, n);
        let mut ms = DMatrix::zeros(n, n);
        let mut d = DMatrix::zeros(n, n);
        for (m, &c) in coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            for p in 0..n {
                let base = self.index(m, p, 0);
                for q in 0..n {
                    k[(p, q)] += c * self.stiffness[base + q];
                    ms[(p, q)] += c * self.mass[base + q];
                    d[(p, q)] += c * self.damping[base + q];
                }
            }
        }
        Ok((k, ms, d))
    }

    fn payload(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(8 * 3 * self.stiffness.len());
        for t in [&self.stiffness, &self.mass, &self.damping] {
            for v in t.iter() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    /// SHA-256 of the tensor payload.
    pub fn checksum(&self) -> [u8; 32] {
        let digest = Sha256::digest(self.payload());
        let mut out = [0u8; 32];
        out.copy_from_slice(digest.as_slice());
        out
    }

    pub fn checksum_hex(&self) -> String {
        self.checksum().iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let payload = self.payload();
        let mut out = Vec::with_capacity(HEADER_LEN + payload.len());
        out.extend_from_slice(MAGIC);
        let mut id = [0u8; ID_LEN];
        id[..BASIS_ID.len()].copy_from_slice(BASIS_ID.as_bytes());
        out.extend_from_slice(&id);
        out.extend_from_slice(&(self.max_basis_order as u32).to_le_bytes());
        out.extend_from_slice(&(self.max_cheb_order as u32).to_le_bytes());
        out.extend_from_slice(&self.checksum());
        out.extend_from_slice(&payload);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> std::result::Result<Self, String> {
        if bytes.len() < HEADER_LEN || &bytes[..8] != MAGIC {
            return Err("missing header".into());
        }
        let id = &bytes[8..8 + ID_LEN];
        let id_str = std::str::from_utf8(id)
            .map_err(|_| "basis id is not UTF-8".to_string())?
            .trim_end_matches('\0');
        if id_str != BASIS_ID {
            return Err(format!("basis id {id_str:?}, expected {BASIS_ID:?}"));
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap()) as usize;
        let p = u32_at(8 + ID_LEN);
        let m = u32_at(12 + ID_LEN);
        let stored_sum = &bytes[16 + ID_LEN..HEADER_LEN];
        let payload = &bytes[HEADER_LEN..];
        let len = (m + 1) * (p + 1) * (p + 1);
        if payload.len() != 3 * 8 * len {
            return Err(format!("payload has {} bytes, expected {}", payload.len(), 24 * len));
        }
        if Sha256::digest(payload).as_slice() != stored_sum {
            return Err("checksum mismatch".into());
        }
        let floats: Vec<f64> = payload
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Ok(Self {
            max_basis_order: p,
            max_cheb_order: m,
            stiffness: floats[..len].to_vec(),
            mass: floats[len..2 * len].to_vec(),
            damping: floats[2 * len..].to_vec(),
        })
    }

    pub fn cache_path(dir: &Path, max_basis_order: usize, max_cheb_order: usize) -> PathBuf {
        dir.join(format!(
            "reftensors_{BASIS_ID}_p{max_basis_order}_m{max_cheb_order}.bin"
        ))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
            }
        }
        // write-then-rename so a crash never leaves a truncated cache
        let tmp = path.with_extension("bin.tmp");
        fs::write(&tmp, self.to_bytes()).map_err(|e| Error::io(&tmp, e))?;
        fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes).map_err(|reason| Error::Cache {
            path: path.to_path_buf(),
            reason,
        })
    }

    /// Loads the cache for `(P, M)` from `dir`, building and persisting it when
    /// it is missing or corrupt.
    pub fn load_or_build(
        dir: &Path,
        max_basis_order: usize,
        max_cheb_order: usize,
    ) -> Result<(Self, CacheStatus)> {
        let path = Self::cache_path(dir, max_basis_order, max_cheb_order);
        let status = if path.exists() {
            match Self::read(&path) {
                Ok(set)
                    if set.max_basis_order == max_basis_order
                        && set.max_cheb_order == max_cheb_order =>
                {
                    return Ok((set, CacheStatus::Loaded))
                }
                Ok(_) => {
                    warn!("{}: orders do not match the file name, rebuilding", path.display());
                    CacheStatus::Rebuilt
                }
                Err(e) => {
                    warn!("{e}; rebuilding");
                    CacheStatus::Rebuilt
                }
            }
        } else {
            CacheStatus::Built
        };
        let set = Self::build(max_basis_order, max_cheb_order)?;
        set.write(&path)?;
        Ok((set, status))
    }
}
