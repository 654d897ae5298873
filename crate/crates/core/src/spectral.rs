//! Classical reference values for `M_h`: ground state, full eigendecomposition,
//! exact propagators, overlap of the sine state and the first-order
//! perturbation identity.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::hamiltonian::{discretize_with, laplacian_ground_eigenvalue, sine_state, DiscretizedHamiltonian, QueryConfig};
use crate::potential::PotentialSpec;

/// Largest `m^d` for which dense eigendecompositions are offered.
pub const DENSE_THRESHOLD: usize = 4096;

/// Above this size `ground_state` switches to Lanczos.
pub const DENSE_AUTO_LIMIT: usize = 1024;

/// Relative residual (against `||M_h||`) a ground state must reach.
pub const RESIDUAL_TOLERANCE: f64 = 1e-8;

const LANCZOS_TOLERANCE: f64 = 1e-11;
const LANCZOS_MAX_DIM: usize = 160;
const LANCZOS_MAX_RESTARTS: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectralMethod {
    Dense,
    Iterative,
}

#[derive(Debug, Clone)]
pub struct SpectralResult {
    pub energy: f64,
    /// Unit ground eigenvector, largest-magnitude entry positive.
    pub vector: Vec<f64>,
    pub method: SpectralMethod,
    /// `||M_h z - E z||`.
    pub residual: f64,
}

impl SpectralResult {
    /// Phase `E_h1 / (4 pi d)` of the ground state under `e^{i M_h/(2d)}`.
    pub fn phase(&self, d: usize) -> f64 {
        self.energy / (4.0 * std::f64::consts::PI * d as f64)
    }
}

pub fn ground_state(h: &DiscretizedHamiltonian) -> Result<SpectralResult> {
    let method = if h.len() <= DENSE_AUTO_LIMIT { SpectralMethod::Dense } else { SpectralMethod::Iterative };
    ground_state_with(h, method)
}

pub fn ground_state_with(h: &DiscretizedHamiltonian, method: SpectralMethod) -> Result<SpectralResult> {
    let (energy, mut vector) = match method {
        SpectralMethod::Dense => {
            let eig = EigenDecomposition::new(h)?;
            (eig.values[0], eig.vectors.column(0).iter().copied().collect())
        }
        SpectralMethod::Iterative => lanczos_ground(h)?,
    };
    fix_sign(&mut vector);
    let residual = residual(h, energy, &vector);
    if residual > RESIDUAL_TOLERANCE * h.norm_bound() {
        return Err(Error::NoConvergence { iterations: 0, residual });
    }
    Ok(SpectralResult { energy, vector, method, residual })
}

fn fix_sign(v: &mut [f64]) {
    let pivot = v.iter().copied().fold(0.0f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
    if pivot < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

fn residual(h: &DiscretizedHamiltonian, energy: f64, z: &[f64]) -> f64 {
    let mut mz = vec![0.0; z.len()];
    h.apply(z, &mut mz);
    mz.iter().zip(z).map(|(a, b)| (a - energy * b).powi(2)).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = dot(v, v).sqrt();
    v.iter_mut().for_each(|x| *x /= n);
    n
}

// Restarted Lanczos with full reorthogonalization, started from the sine
// state. Each restart continues from the current Ritz vector.
fn lanczos_ground(h: &DiscretizedHamiltonian) -> Result<(f64, Vec<f64>)> {
    let n = h.len();
    let tol = LANCZOS_TOLERANCE * h.norm_bound();
    let mut x = sine_state(h.grid());
    normalize(&mut x);
    let mut best = (f64::INFINITY, x.clone(), f64::INFINITY);
    let mut iterations = 0;
    let mut w = vec![0.0; n];

    for _ in 0..LANCZOS_MAX_RESTARTS {
        let dim = LANCZOS_MAX_DIM.min(n);
        let mut basis: Vec<Vec<f64>> = vec![x.clone()];
        let mut alphas: Vec<f64> = Vec::with_capacity(dim);
        let mut betas: Vec<f64> = Vec::with_capacity(dim);
        for j in 0..dim {
            iterations += 1;
            h.apply(&basis[j], &mut w);
            let alpha = dot(&basis[j], &w);
            alphas.push(alpha);
            for _ in 0..2 {
                for v in &basis {
                    let c = dot(v, &w);
                    w.iter_mut().zip(v).for_each(|(a, b)| *a -= c * b);
                }
            }
            let beta = dot(&w, &w).sqrt();
            let exhausted = beta <= 1e-13 * h.norm_bound() || j + 1 == dim;
            if exhausted || (j + 1) % 10 == 0 {
                let (theta, s) = smallest_tridiagonal(&alphas, &betas);
                let estimate = beta * s[s.len() - 1].abs();
                if estimate <= tol || exhausted {
                    let mut y = vec![0.0; n];
                    for (c, v) in s.iter().zip(&basis) {
                        y.iter_mut().zip(v).for_each(|(a, b)| *a += c * b);
                    }
                    normalize(&mut y);
                    let r = residual(h, theta, &y);
                    if r < best.2 {
                        best = (theta, y.clone(), r);
                    }
                    if r <= tol {
                        return Ok((theta, y));
                    }
                    x = y;
                    break;
                }
            }
            betas.push(beta);
            let next: Vec<f64> = w.iter().map(|a| a / beta).collect();
            basis.push(next);
        }
    }
    if best.2 <= RESIDUAL_TOLERANCE * h.norm_bound() {
        return Ok((best.0, best.1));
    }
    Err(Error::NoConvergence { iterations, residual: best.2 })
}

fn smallest_tridiagonal(alphas: &[f64], betas: &[f64]) -> (f64, Vec<f64>) {
    let k = alphas.len();
    let mut t = DMatrix::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alphas[i];
        if i + 1 < k {
            t[(i, i + 1)] = betas[i];
            t[(i + 1, i)] = betas[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let (idx, theta) = eig
        .eigenvalues
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, x)| if x < acc.1 { (i, x) } else { acc });
    (theta, eig.eigenvectors.column(idx).iter().copied().collect())
}

/// Full eigendecomposition of `M_h`, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    /// Columns are unit eigenvectors matching `values`.
    pub vectors: DMatrix<f64>,
}

impl EigenDecomposition {
    pub fn new(h: &DiscretizedHamiltonian) -> Result<Self> {
        dense_guard(h.len())?;
        let eig = SymmetricEigen::new(h.dense());
        let mut order: Vec<usize> = (0..h.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let mut vectors = eig.eigenvectors.select_columns(&order);
        for mut col in vectors.column_iter_mut() {
            let pivot = col.iter().copied().fold(0.0f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
            if pivot < 0.0 {
                col.neg_mut();
            }
        }
        Ok(Self { values, vectors })
    }
}

fn dense_guard(n: usize) -> Result<()> {
    if n > DENSE_THRESHOLD {
        return Err(Error::TooLarge { what: "dense eigensolve m^d", size: n as u128, limit: DENSE_THRESHOLD as u128 });
    }
    Ok(())
}

/// `e^{i t M_h/(2d)}` through the eigendecomposition of `M_h`.
#[derive(Debug, Clone)]
pub struct ExactPropagator {
    eig: EigenDecomposition,
    d: usize,
}

impl ExactPropagator {
    pub fn new(h: &DiscretizedHamiltonian) -> Result<Self> {
        Ok(Self { eig: EigenDecomposition::new(h)?, d: h.grid().d() })
    }

    pub fn eigen(&self) -> &EigenDecomposition {
        &self.eig
    }

    pub fn len(&self) -> usize {
        self.eig.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eig.values.is_empty()
    }

    /// Overwrites `state` with `e^{i t M_h/(2d)} state`.
    pub fn apply(&self, t: f64, state: &mut [Complex64]) -> Result<()> {
        let n = self.len();
        if state.len() != n {
            return Err(Error::DimensionMismatch { expected: n, actual: state.len() });
        }
        let parts = DMatrix::from_fn(n, 2, |i, c| if c == 0 { state[i].re } else { state[i].im });
        let coeff = self.eig.vectors.tr_mul(&parts);
        let scale = t / (2.0 * self.d as f64);
        let mut rotated = DMatrix::zeros(n, 2);
        for k in 0..n {
            let c = Complex64::new(coeff[(k, 0)], coeff[(k, 1)]) * Complex64::from_polar(1.0, self.eig.values[k] * scale);
            rotated[(k, 0)] = c.re;
            rotated[(k, 1)] = c.im;
        }
        let back = &self.eig.vectors * rotated;
        for (i, s) in state.iter_mut().enumerate() {
            *s = Complex64::new(back[(i, 0)], back[(i, 1)]);
        }
        Ok(())
    }
}

/// One-shot `e^{i t M_h/(2d)} s`.
pub fn exact_propagator_apply(h: &DiscretizedHamiltonian, t: f64, s: &[Complex64]) -> Result<Vec<Complex64>> {
    let prop = ExactPropagator::new(h)?;
    let mut out = s.to_vec();
    prop.apply(t, &mut out)?;
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OverlapSpectrum {
    /// Lowest eigenvalues of `M_h`.
    pub energies: Vec<f64>,
    /// `d_k = <z_{h,k} | psi_1^{⊗d}>` for the same eigenvectors.
    pub coefficients: Vec<f64>,
    pub d1_squared: f64,
}

/// Default number of eigenpairs for `overlap_spectrum`.
pub fn default_overlap_count(h: &DiscretizedHamiltonian) -> usize {
    h.len().min(16)
}

pub fn overlap_spectrum(h: &DiscretizedHamiltonian, count: usize) -> Result<OverlapSpectrum> {
    if count == 0 || count > h.len() {
        return Err(Error::InvalidParameter(format!("count {count} outside 1..={}", h.len())));
    }
    let eig = EigenDecomposition::new(h)?;
    let psi = DVector::from_vec(sine_state(h.grid()));
    let coefficients: Vec<f64> = (0..count).map(|k| eig.vectors.column(k).dot(&psi)).collect();
    Ok(OverlapSpectrum {
        energies: eig.values[..count].to_vec(),
        d1_squared: coefficients[0] * coefficients[0],
        coefficients,
    })
}

/// `|<z_{h,1} | psi_1^{⊗d}>|^2` from the ground state alone (any size).
pub fn ground_overlap(h: &DiscretizedHamiltonian, ground: &SpectralResult) -> f64 {
    let c = dot(&ground.vector, &sine_state(h.grid()));
    c * c
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PerturbationReport {
    /// `E(V) - [E(Vbar) + sum_i (v_i - vbar_i) z_i(Vbar)^2]`.
    pub residual: f64,
    /// Same with the perturbation `V - Vbar` halved.
    pub residual_half: f64,
    /// `residual / residual_half`; `None` when both vanish.
    pub ratio: Option<f64>,
    pub max_perturbation: f64,
}

impl PerturbationReport {
    /// Second-order behaviour: the residual shrinks about 4x when the
    /// perturbation halves (within ±50%), or it is negligible.
    pub fn is_second_order(&self) -> bool {
        match self.ratio {
            Some(r) => (2.0..=6.0).contains(&r),
            None => true,
        }
    }
}

pub fn perturbation_check(
    v: &PotentialSpec,
    vbar: &PotentialSpec,
    grid: &GridSpec,
    query: QueryConfig,
) -> Result<PerturbationReport> {
    let hv = discretize_with(&v.build(grid.d())?, grid, query)?;
    let hbar = discretize_with(&vbar.build(grid.d())?, grid, query)?;
    perturbation_check_values(&hbar, hv.values())
}

/// Perturbation identity around `hbar` towards potential values `v`.
pub fn perturbation_check_values(hbar: &DiscretizedHamiltonian, v: &[f64]) -> Result<PerturbationReport> {
    let base = ground_state(hbar)?;
    let first_order = |target: &[f64]| -> Result<f64> {
        let ht = DiscretizedHamiltonian::from_values(hbar.grid(), target.to_vec())?;
        let e = ground_state(&ht)?.energy;
        let shift: f64 = target
            .iter()
            .zip(hbar.values())
            .zip(&base.vector)
            .map(|((a, b), z)| (a - b) * z * z)
            .sum();
        Ok(e - (base.energy + shift))
    };
    let half: Vec<f64> = v.iter().zip(hbar.values()).map(|(a, b)| b + 0.5 * (a - b)).collect();
    let residual = first_order(v)?;
    let residual_half = first_order(&half)?;
    let max_perturbation = v.iter().zip(hbar.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    // Below this the residual is rounding noise and the ratio is meaningless.
    let noise = 1e-12 * base.energy.abs().max(1.0);
    let ratio = (residual.abs() > noise).then(|| residual / residual_half);
    Ok(PerturbationReport { residual, residual_half, ratio, max_perturbation })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiscretizationRow {
    pub q: u32,
    pub h: f64,
    pub energy: f64,
    /// `|E_1 - E_h1| / (d h)`.
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiscretizationStudy {
    pub potential: PotentialSpec,
    pub d: usize,
    pub reference: f64,
    pub rows: Vec<DiscretizationRow>,
    /// Smallest constant bounding every ratio.
    pub fitted_c1: f64,
    /// Spearman rank correlation of the ratio against `q`.
    pub spearman: f64,
}

/// Tracks `|E_1 - E_h1|/(d h)` over mesh refinements. The continuum
/// reference is `d pi^2` for `V = 0` and otherwise the h^2-Richardson
/// extrapolation of the grids `q_fine - 1` and `q_fine`.
pub fn discretization_study(potential: &PotentialSpec, d: usize, qs: &[u32], q_fine: u32) -> Result<DiscretizationStudy> {
    let energy = |q: u32| -> Result<f64> {
        let g = GridSpec::new(d, q)?;
        let h = discretize_with(&potential.build(d)?, &g, QueryConfig::exact())?;
        Ok(ground_state(&h)?.energy)
    };
    let reference = if *potential == PotentialSpec::Zero {
        d as f64 * std::f64::consts::PI.powi(2)
    } else {
        let coarse = energy(q_fine - 1)?;
        let fine = energy(q_fine)?;
        (4.0 * fine - coarse) / 3.0
    };
    let mut rows = Vec::with_capacity(qs.len());
    for &q in qs {
        let e = energy(q)?;
        let h = (-(q as f64)).exp2();
        rows.push(DiscretizationRow { q, h, energy: e, ratio: (reference - e).abs() / (d as f64 * h) });
    }
    let fitted_c1 = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let xs: Vec<f64> = rows.iter().map(|r| r.q as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
    Ok(DiscretizationStudy { potential: potential.clone(), d, reference, rows, fitted_c1, spearman: spearman(&xs, &ys) })
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for &k in &idx[i..=j] {
                r[k] = avg;
            }
            i = j + 1;
        }
        r
    }
    let (rx, ry) = (ranks(xs), ranks(ys));
    let n = rx.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    if vx == 0.0 || vy == 0.0 {
        return 0.0;
    }
    cov / (vx * vy).sqrt()
}

/// Lower and upper bounds on `E_h1` for admissible potentials.
pub fn ground_energy_bounds(grid: &GridSpec) -> (f64, f64) {
    let lo = laplacian_ground_eigenvalue(grid);
    (lo, lo + 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::discretize;
    use approx::assert_relative_eq;

    fn ham(spec: PotentialSpec, d: usize, q: u32) -> DiscretizedHamiltonian {
        let g = GridSpec::new(d, q).unwrap();
        discretize(&spec.build(d).unwrap(), &g).unwrap()
    }

    // Sturm-sequence bisection for the k-th smallest eigenvalue of a symmetric
    // tridiagonal matrix. Independent of both solver paths.
    fn sturm_eigenvalue(diag: &[f64], off: &[f64], k: usize) -> f64 {
        let count_below = |x: f64| {
            let mut c = 0;
            let mut p = diag[0] - x;
            if p < 0.0 {
                c += 1;
            }
            for i in 1..diag.len() {
                let denom = if p == 0.0 { 1e-300 } else { p };
                p = diag[i] - x - off[i - 1] * off[i - 1] / denom;
                if p < 0.0 {
                    c += 1;
                }
            }
            c
        };
        let (mut lo, mut hi) = (-1e3, 1e6);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn zero_and_constant_potentials() {
        let r = ground_state(&ham(PotentialSpec::Zero, 1, 3)).unwrap();
        assert_relative_eq!(r.energy, 9.743419838555466, max_relative = 1e-12);
        let r = ground_state(&ham(PotentialSpec::Constant { value: 1.0 }, 1, 3)).unwrap();
        assert_relative_eq!(r.energy, 10.743419838555466, max_relative = 1e-12);
    }

    #[test]
    fn linear_potential_matches_sturm_and_fixture() {
        let h = ham(PotentialSpec::LinearMean, 1, 4);
        let r = ground_state(&h).unwrap();
        let diag: Vec<f64> = h.values().iter().map(|v| 2.0 * 256.0 + v).collect();
        let off = vec![-256.0; 14];
        let sturm = sturm_eigenvalue(&diag, &off, 0);
        assert_relative_eq!(r.energy, sturm, max_relative = 1e-12);
        // numpy eigh of the same 15x15 matrix
        assert_relative_eq!(r.energy, 10.336821448037025, max_relative = 1e-12);
        assert!(r.residual <= 1e-8 * h.norm_bound());
        let (lo, hi) = ground_energy_bounds(h.grid());
        assert!(lo <= r.energy && r.energy <= hi);
    }

    #[test]
    fn closed_form_for_zero_potential_in_higher_dimension() {
        for (d, q) in [(2, 3), (3, 3), (2, 6)] {
            let h = ham(PotentialSpec::Zero, d, q);
            let r = ground_state(&h).unwrap();
            assert_relative_eq!(r.energy, laplacian_ground_eigenvalue(h.grid()), max_relative = 1e-10);
        }
    }

    #[test]
    fn dense_and_iterative_agree() {
        for (spec, d, q) in [
            (PotentialSpec::LinearMean, 1, 6),
            (PotentialSpec::RandomTrig { seed: 3, terms: 4 }, 2, 4),
            (PotentialSpec::SeparableTrig { scale: 0.6 }, 3, 3),
        ] {
            let h = ham(spec, d, q);
            let a = ground_state_with(&h, SpectralMethod::Dense).unwrap();
            let b = ground_state_with(&h, SpectralMethod::Iterative).unwrap();
            assert_relative_eq!(a.energy, b.energy, max_relative = 1e-8);
            let overlap = dot(&a.vector, &b.vector);
            assert!((overlap - 1.0).abs() < 1e-8, "overlap {overlap}");
        }
    }

    #[test]
    fn eigenvector_sign_convention() {
        let r = ground_state(&ham(PotentialSpec::RandomTrig { seed: 9, terms: 3 }, 2, 3)).unwrap();
        let pivot = r.vector.iter().copied().fold(0.0f64, |a, x| if x.abs() > a.abs() { x } else { a });
        assert!(pivot > 0.0);
        assert!((dot(&r.vector, &r.vector) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn overlap_of_sine_state() {
        for spec in [PotentialSpec::Zero, PotentialSpec::Constant { value: 0.7 }] {
            let o = overlap_spectrum(&ham(spec, 2, 3), 5).unwrap();
            assert_relative_eq!(o.d1_squared, 1.0, epsilon = 1e-12);
        }
        let h = ham(PotentialSpec::LinearMean, 1, 4);
        let o = overlap_spectrum(&h, 15).unwrap();
        assert_relative_eq!(o.d1_squared, 0.9999617752975742, epsilon = 1e-12);
        assert!(o.d1_squared >= 1.0 - 1.0 / (3.0 * std::f64::consts::PI.powi(2) - 2.0).powi(2));
        let total: f64 = o.coefficients.iter().map(|c| c * c).sum();
        assert_relative_eq!(total, 1.0, epsilon = 1e-12);
        let partial = overlap_spectrum(&h, 4).unwrap();
        assert!(partial.coefficients.iter().map(|c| c * c).sum::<f64>() <= 1.0 + 1e-12);
        assert!(overlap_spectrum(&h, 0).is_err());
        assert!(overlap_spectrum(&h, 16).is_err());
        let g = ground_state(&h).unwrap();
        assert_relative_eq!(ground_overlap(&h, &g), o.d1_squared, epsilon = 1e-12);
    }

    #[test]
    fn exact_propagator_properties() {
        let h = ham(PotentialSpec::LinearMean, 1, 3);
        let s: Vec<Complex64> = (0..7).map(|i| Complex64::new((i as f64).cos(), (i as f64 * 1.3).sin())).collect();
        let same = exact_propagator_apply(&h, 0.0, &s).unwrap();
        for (a, b) in s.iter().zip(&same) {
            assert!((a - b).norm() < 1e-12);
        }
        let out = exact_propagator_apply(&h, 3.7, &s).unwrap();
        let n_in: f64 = s.iter().map(|c| c.norm_sqr()).sum();
        let n_out: f64 = out.iter().map(|c| c.norm_sqr()).sum();
        assert!((n_in - n_out).abs() < 1e-12);

        let g = ground_state(&h).unwrap();
        let z: Vec<Complex64> = g.vector.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        let t = 2.5;
        let out = exact_propagator_apply(&h, t, &z).unwrap();
        let phase = Complex64::from_polar(1.0, t * g.energy / 2.0);
        for (a, b) in out.iter().zip(&z) {
            assert!((a - b * phase).norm() < 1e-10);
        }
        assert!(exact_propagator_apply(&h, 1.0, &s[..3]).is_err());
    }

    #[test]
    fn dense_guard_applies() {
        let h = ham(PotentialSpec::Zero, 3, 5);
        assert!(matches!(ExactPropagator::new(&h), Err(Error::TooLarge { .. })));
        // the iterative path still works
        let r = ground_state(&h).unwrap();
        assert_eq!(r.method, SpectralMethod::Iterative);
    }

    #[test]
    fn perturbation_identity() {
        let g = GridSpec::new(1, 5).unwrap();
        let q = QueryConfig::exact();
        let same = perturbation_check(&PotentialSpec::LinearMean, &PotentialSpec::LinearMean, &g, q).unwrap();
        assert_eq!(same.residual, 0.0);
        assert!(same.ratio.is_none());
        let shift = perturbation_check(&PotentialSpec::Constant { value: 0.6 }, &PotentialSpec::Zero, &g, q).unwrap();
        assert!(shift.residual.abs() < 1e-11);

        // numpy: dense eigensolves of the 31x31 matrices
        let r = perturbation_check(&PotentialSpec::SineBump { amplitude: 0.1 }, &PotentialSpec::Zero, &g, q).unwrap();
        assert_relative_eq!(r.residual, -3.7074868686204354e-06, max_relative = 1e-4);
        let r2 = perturbation_check(&PotentialSpec::SineBump { amplitude: 0.05 }, &PotentialSpec::Zero, &g, q).unwrap();
        assert_relative_eq!(r2.residual, -9.267455585160178e-07, max_relative = 1e-4);
        assert_relative_eq!(r.residual_half, r2.residual, max_relative = 1e-6);
        assert!(r.is_second_order());
    }

    #[test]
    fn spearman_basics() {
        assert_relative_eq!(spearman(&[1.0, 2.0, 3.0], &[3.0, 5.0, 9.0]), 1.0);
        assert_relative_eq!(spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]), -1.0);
        assert_eq!(spearman(&[1.0, 2.0], &[1.0, 1.0]), 0.0);
    }

    #[test]
    fn discretization_error_is_bounded() {
        let s = discretization_study(&PotentialSpec::Zero, 1, &[3, 4, 5], 6).unwrap();
        assert_relative_eq!(s.reference, std::f64::consts::PI.powi(2));
        assert!(s.rows.windows(2).all(|w| w[1].ratio < w[0].ratio));
        assert!(s.spearman < 0.0);
    }
}
