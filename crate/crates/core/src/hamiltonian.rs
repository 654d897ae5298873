//! Finite-difference discretization `M_h = -Δ_h + V_h` and its split into
//! `H1 = -Δ_h/(2d)` and `H2 = V_h/(2d)`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::potential::{Potential, PotentialSpec};

/// Fixed-point width of the potential oracle.
///
/// Each query returns `V` rounded toward zero to a multiple of `2^-bits`.
/// 52 bits leaves every value in `[0, 1]` unchanged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryConfig {
    pub bits: u32,
}

impl QueryConfig {
    pub const EXACT_BITS: u32 = 52;

    /// Default width `q + 4`.
    pub fn for_grid(grid: &GridSpec) -> Self {
        Self { bits: grid.q() + 4 }
    }

    pub fn exact() -> Self {
        Self { bits: Self::EXACT_BITS }
    }

    pub fn truncate(&self, value: f64) -> f64 {
        if self.bits >= Self::EXACT_BITS {
            return value;
        }
        let scale = (self.bits as f64).exp2();
        (value * scale).trunc() / scale
    }
}

/// `4 h^-2 sin^2(k pi h / 2)`, the k-th eigenvalue of the 1-D `-Δ_h`.
pub fn laplacian_eigenvalue_1d(grid: &GridSpec, k: usize) -> f64 {
    let h = grid.h();
    let s = (k as f64 * PI * h / 2.0).sin();
    4.0 * s * s / (h * h)
}

/// Unit sine vector `sqrt(2h) sin(j k pi h)`, `j = 1..=m`.
pub fn sine_vector(grid: &GridSpec, k: usize) -> Vec<f64> {
    let h = grid.h();
    let c = (2.0 * h).sqrt();
    (1..=grid.m()).map(|j| c * ((j * k) as f64 * PI * h).sin()).collect()
}

/// Eigenpair of the d-dimensional `-Δ_h` for multi-index `k` (1-based).
#[derive(Debug, Clone, PartialEq)]
pub struct LaplacianEigenpair {
    pub eigenvalue: f64,
    /// One unit sine vector per axis; the eigenvector is their tensor product.
    pub factors: Vec<Vec<f64>>,
}

impl LaplacianEigenpair {
    /// Expands the tensor product into a row-major vector of length `m^d`.
    pub fn to_vector(&self) -> Vec<f64> {
        tensor_product(&self.factors)
    }
}

pub fn laplacian_eigenpair(grid: &GridSpec, k: &[usize]) -> Result<LaplacianEigenpair> {
    if k.len() != grid.d() {
        return Err(Error::DimensionMismatch { expected: grid.d(), actual: k.len() });
    }
    if k.iter().any(|&kj| kj == 0 || kj > grid.m()) {
        return Err(Error::IndexOutOfRange { index: k.to_vec(), max: grid.m() });
    }
    Ok(LaplacianEigenpair {
        eigenvalue: k.iter().map(|&kj| laplacian_eigenvalue_1d(grid, kj)).sum(),
        factors: k.iter().map(|&kj| sine_vector(grid, kj)).collect(),
    })
}

/// Smallest eigenvalue of the d-dimensional `-Δ_h`, `4 d h^-2 sin^2(pi h/2)`.
pub fn laplacian_ground_eigenvalue(grid: &GridSpec) -> f64 {
    grid.d() as f64 * laplacian_eigenvalue_1d(grid, 1)
}

/// The sine state `psi_1^{⊗d}` on the compact grid.
pub fn sine_state(grid: &GridSpec) -> Vec<f64> {
    let psi = sine_vector(grid, 1);
    tensor_product(&vec![psi; grid.d()])
}

pub(crate) fn tensor_product(factors: &[Vec<f64>]) -> Vec<f64> {
    let mut out = vec![1.0];
    for f in factors {
        out = out.iter().flat_map(|&a| f.iter().map(move |&b| a * b)).collect();
    }
    out
}

#[derive(Debug, Clone)]
pub struct DiscretizedHamiltonian {
    grid: GridSpec,
    potential: PotentialSpec,
    query: QueryConfig,
    v: Vec<f64>,
    norm_h1: f64,
    norm_h2: f64,
}

/// Discretizes with the default query width `q + 4`.
pub fn discretize(potential: &Potential, grid: &GridSpec) -> Result<DiscretizedHamiltonian> {
    discretize_with(potential, grid, QueryConfig::for_grid(grid))
}

pub fn discretize_with(potential: &Potential, grid: &GridSpec, query: QueryConfig) -> Result<DiscretizedHamiltonian> {
    if potential.dim() != grid.d() {
        return Err(Error::DimensionMismatch { expected: grid.d(), actual: potential.dim() });
    }
    if query.bits == 0 || query.bits > QueryConfig::EXACT_BITS {
        return Err(Error::InvalidParameter(format!("query bits {} outside 1..=52", query.bits)));
    }
    let mut v = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let x = grid.point(i);
        let raw = potential.eval(&x);
        if !(0.0..=1.0).contains(&raw) {
            return Err(Error::Inadmissible(format!("V({x:?}) = {raw} outside [0, 1]")));
        }
        v.push(query.truncate(raw));
    }
    let d = grid.d() as f64;
    let norm_h2 = v.iter().copied().fold(0.0, f64::max) / (2.0 * d);
    Ok(DiscretizedHamiltonian {
        grid: *grid,
        potential: potential.spec().clone(),
        query,
        v,
        norm_h1: laplacian_eigenvalue_1d(grid, grid.m()) / 2.0,
        norm_h2,
    })
}

impl DiscretizedHamiltonian {
    /// Builds directly from potential values (already truncated).
    pub fn from_values(grid: &GridSpec, v: Vec<f64>) -> Result<Self> {
        if v.len() != grid.len() {
            return Err(Error::DimensionMismatch { expected: grid.len(), actual: v.len() });
        }
        if let Some(bad) = v.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(Error::Inadmissible(format!("potential value {bad} outside [0, 1]")));
        }
        let norm_h2 = v.iter().copied().fold(0.0, f64::max) / (2.0 * grid.d() as f64);
        Ok(Self {
            grid: *grid,
            potential: PotentialSpec::Zero,
            query: QueryConfig::exact(),
            v,
            norm_h1: laplacian_eigenvalue_1d(grid, grid.m()) / 2.0,
            norm_h2,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn potential(&self) -> &PotentialSpec {
        &self.potential
    }

    pub fn query(&self) -> QueryConfig {
        self.query
    }

    /// Potential values at the grid points, row-major.
    pub fn values(&self) -> &[f64] {
        &self.v
    }

    pub fn len(&self) -> usize {
        self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v.is_empty()
    }

    /// `||H1|| = 2 h^-2 sin^2(m pi h/2)`.
    pub fn norm_h1(&self) -> f64 {
        self.norm_h1
    }

    /// `||H2|| = max v / (2d)`.
    pub fn norm_h2(&self) -> f64 {
        self.norm_h2
    }

    /// Gershgorin-type bound on `||M_h||`.
    pub fn norm_bound(&self) -> f64 {
        2.0 * self.grid.d() as f64 * self.norm_h1 + 2.0 * self.grid.d() as f64 * self.norm_h2
    }

    /// `y = M_h x` via the (2d+1)-point stencil.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let m = self.grid.m();
        let d = self.grid.d();
        let h2 = self.grid.h() * self.grid.h();
        let diag = 2.0 * d as f64 / h2;
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = (diag + self.v[i]) * x[i];
        }
        let mut stride = 1;
        for _ in 0..d {
            for (i, yi) in y.iter_mut().enumerate() {
                let pos = (i / stride) % m;
                if pos > 0 {
                    *yi -= x[i - stride] / h2;
                }
                if pos + 1 < m {
                    *yi -= x[i + stride] / h2;
                }
            }
            stride *= m;
        }
    }

    /// Dense `M_h`; only sensible for small grids.
    pub fn dense(&self) -> DMatrix<f64> {
        let n = self.len();
        let mut a = DMatrix::zeros(n, n);
        let mut e = vec![0.0; n];
        let mut col = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            self.apply(&e, &mut col);
            e[j] = 0.0;
            a.column_mut(j).copy_from_slice(&col);
        }
        a
    }

    /// Eigenvalues of `H1` in the sine basis, row-major over multi-indices.
    pub fn h1_spectrum(&self) -> Vec<f64> {
        let per_axis: Vec<f64> = (1..=self.grid.m()).map(|k| laplacian_eigenvalue_1d(&self.grid, k)).collect();
        let d = self.grid.d();
        let mut out = vec![0.0];
        for _ in 0..d {
            out = out.iter().flat_map(|&a| per_axis.iter().map(move |&b| a + b)).collect();
        }
        let scale = 2.0 * d as f64;
        out.iter_mut().for_each(|x| *x /= scale);
        out
    }
}
