use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest number of interior grid points any grid may have.
pub const MAX_GRID_POINTS: usize = 1 << 22;

/// Uniform interior grid of the unit cube `(0,1)^d` with `m = 2^q - 1` points
/// per axis and mesh width `h = 2^-q`.
///
/// Each axis embeds into a `q`-qubit register of size `2^q`; grid index
/// `j = 1..=m` sits at register index `j - 1` and register index `2^q - 1`
/// is the unused state. Multi-indices are flattened row-major with axis 0
/// the slowest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    d: usize,
    q: u32,
}

impl GridSpec {
    pub fn new(d: usize, q: u32) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParameter("dimension d must be >= 1".into()));
        }
        if q == 0 {
            return Err(Error::InvalidParameter("qubits per axis q must be >= 1".into()));
        }
        let m = if q >= 64 { u128::MAX } else { (1u128 << q) - 1 };
        let size = m.checked_pow(d as u32).unwrap_or(u128::MAX);
        // The padded register (2^q)^d is what the simulator allocates.
        let padded = 1u128
            .checked_shl(q.saturating_mul(d as u32))
            .filter(|_| q.saturating_mul(d as u32) < 128)
            .unwrap_or(u128::MAX);
        if size > MAX_GRID_POINTS as u128 || padded > 2 * MAX_GRID_POINTS as u128 {
            return Err(Error::TooLarge {
                what: "grid points m^d",
                size,
                limit: MAX_GRID_POINTS as u128,
            });
        }
        Ok(Self { d, q })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    /// Interior points per axis.
    pub fn m(&self) -> usize {
        (1usize << self.q) - 1
    }

    /// Mesh width `1/(m+1)`, exact in binary floating point.
    pub fn h(&self) -> f64 {
        (-(self.q as f64)).exp2()
    }

    /// Number of interior grid points `m^d`.
    pub fn len(&self) -> usize {
        self.m().pow(self.d as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Register size per axis, `2^q`.
    pub fn axis_register(&self) -> usize {
        1usize << self.q
    }

    /// Size of the padded grid register `(2^q)^d`.
    pub fn register_len(&self) -> usize {
        1usize << (self.q as usize * self.d)
    }

    /// Qubits needed for the grid register.
    pub fn qubits(&self) -> usize {
        self.q as usize * self.d
    }

    /// 1-based multi-index `(j_1, ..., j_d)` of flat grid index `flat`.
    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let m = self.m();
        let mut idx = vec![0; self.d];
        for slot in idx.iter_mut().rev() {
            *slot = flat % m + 1;
            flat /= m;
        }
        idx
    }

    /// Coordinates `(j_1 h, ..., j_d h)` of flat grid index `flat`.
    pub fn point(&self, flat: usize) -> Vec<f64> {
        let h = self.h();
        self.multi_index(flat).into_iter().map(|j| j as f64 * h).collect()
    }

    /// Position of flat grid index `flat` inside the padded register.
    pub fn register_index(&self, mut flat: usize) -> usize {
        let m = self.m();
        let mut out = 0;
        let mut stride = 1;
        for _ in 0..self.d {
            out += (flat % m) * stride;
            flat /= m;
            stride <<= self.q;
        }
        out
    }

    /// Table mapping every flat grid index to its register index.
    pub fn register_map(&self) -> Vec<usize> {
        (0..self.len()).map(|i| self.register_index(i)).collect()
    }
}
