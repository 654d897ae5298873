//! Symmetric Suzuki product formulas for `e^{i (H1 + H2) T}`, the per-power
//! error budget of phase estimation and the step-count bounds built on it.

use std::collections::HashMap;
use std::f64::consts::E;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cost::analytic_total;
use crate::error::{Error, Result};
use crate::hamiltonian::DiscretizedHamiltonian;
use crate::sine::SineTransform;
use crate::spectral::ExactPropagator;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Target {
    H1,
    H2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Factor {
    pub target: Target,
    pub z: f64,
}

/// Ordered product `prod_l e^{i A_l z_l}`, applied first factor first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplittingSchedule {
    pub k: u32,
    pub total_time: f64,
    pub steps: usize,
    pub factors: Vec<Factor>,
}

impl SplittingSchedule {
    pub fn count(&self, target: Target) -> usize {
        self.factors.iter().filter(|f| f.target == target).count()
    }

    pub fn coefficient_sum(&self, target: Target) -> f64 {
        self.factors.iter().filter(|f| f.target == target).map(|f| f.z).sum()
    }

    pub fn is_palindromic(&self) -> bool {
        let n = self.factors.len();
        (0..n / 2).all(|i| {
            let (a, b) = (self.factors[i], self.factors[n - 1 - i]);
            a.target == b.target && (a.z - b.z).abs() <= 1e-12 * a.z.abs().max(1.0)
        })
    }

    /// Schedule of the adjoint: reversed order, negated coefficients.
    pub fn adjoint(&self) -> Self {
        Self {
            factors: self.factors.iter().rev().map(|f| Factor { target: f.target, z: -f.z }).collect(),
            total_time: -self.total_time,
            ..self.clone()
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Suzuki's fractal weight `p_k = 1 / (4 - 4^{1/(2k-1)})`.
pub fn suzuki_weight(k: u32) -> f64 {
    1.0 / (4.0 - 4f64.powf(1.0 / (2.0 * k as f64 - 1.0)))
}

/// Factors of one step of order `2k` after merging: `2 * 5^{k-1} + 1`.
pub fn factors_per_step(k: u32) -> usize {
    2 * 5usize.pow(k - 1) + 1
}

fn push_merged(out: &mut Vec<Factor>, f: Factor) {
    match out.last_mut() {
        Some(last) if last.target == f.target => last.z += f.z,
        _ => out.push(f),
    }
}

fn suzuki_step(k: u32, lambda: f64, out: &mut Vec<Factor>) {
    if k == 1 {
        push_merged(out, Factor { target: Target::H1, z: lambda / 2.0 });
        push_merged(out, Factor { target: Target::H2, z: lambda });
        push_merged(out, Factor { target: Target::H1, z: lambda / 2.0 });
        return;
    }
    let p = suzuki_weight(k);
    suzuki_step(k - 1, p * lambda, out);
    suzuki_step(k - 1, p * lambda, out);
    suzuki_step(k - 1, (1.0 - 4.0 * p) * lambda, out);
    suzuki_step(k - 1, p * lambda, out);
    suzuki_step(k - 1, p * lambda, out);
}

/// `n` repetitions of the order-`2k` Suzuki step `S_2k(T/n)` with adjacent
/// exponentials of the same term merged.
pub fn suzuki_schedule(k: u32, total_time: f64, n: usize) -> Result<SplittingSchedule> {
    if k == 0 || k > 8 {
        return Err(Error::InvalidParameter(format!("order index k = {k} outside 1..=8")));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("step count n must be >= 1".into()));
    }
    if !total_time.is_finite() {
        return Err(Error::InvalidParameter("total time must be finite".into()));
    }
    let lambda = total_time / n as f64;
    let mut one = Vec::with_capacity(factors_per_step(k));
    suzuki_step(k, lambda, &mut one);
    let mut factors = Vec::with_capacity(n * (one.len() - 1) + 1);
    for _ in 0..n {
        for &f in &one {
            push_merged(&mut factors, f);
        }
    }
    Ok(SplittingSchedule { k, total_time, steps: n, factors })
}

/// Per-power error allowances `eps_t = 2^{t+1-b} / 40`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBudget {
    pub b: u32,
    pub epsilons: Vec<f64>,
}

impl ErrorBudget {
    pub fn total(&self) -> f64 {
        self.epsilons.iter().sum()
    }
}

pub fn error_budget(b: u32) -> Result<ErrorBudget> {
    if b == 0 || b > 62 {
        return Err(Error::InvalidParameter(format!("clock bits b = {b} outside 1..=62")));
    }
    let epsilons = (0..b).map(|t| (t as f64 + 1.0 - b as f64).exp2() / 40.0).collect();
    Ok(ErrorBudget { b, epsilons })
}

/// `16 e ||H1|| 2^t (25/3)^{k-1} (8 e 2^t ||H2|| / eps_t)^{1/(2k)}`.
pub fn power_exponential_bound(k: u32, t: u32, eps_t: f64, norm_h1: f64, norm_h2: f64) -> f64 {
    let two_t = (t as f64).exp2();
    16.0 * E * norm_h1 * two_t * (25.0f64 / 3.0).powi(k as i32 - 1)
        * (8.0 * E * two_t * norm_h2 / eps_t).powf(1.0 / (2.0 * k as f64))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostBound {
    pub k: u32,
    pub t: u32,
    pub eps_t: f64,
    pub norm_h1: f64,
    pub norm_h2: f64,
    /// Bound on the number of exponentials for this power.
    pub n_t: f64,
}

impl CostBound {
    /// Re-evaluates the closed form with the stored inputs.
    pub fn recompute(&self) -> f64 {
        power_exponential_bound(self.k, self.t, self.eps_t, self.norm_h1, self.norm_h2)
    }
}

/// Analytic step count: the exponential bound divided by factors per step.
pub fn min_steps_for_error(k: u32, t: u32, eps_t: f64, norm_h1: f64, norm_h2: f64) -> Result<(usize, CostBound)> {
    let positive = |x: f64| x > 0.0;
    if k == 0 || ![eps_t, norm_h1, norm_h2].into_iter().all(positive) {
        return Err(Error::InvalidParameter("step bound needs k >= 1 and positive eps, norms".into()));
    }
    let n_t = power_exponential_bound(k, t, eps_t, norm_h1, norm_h2);
    let n = (n_t / factors_per_step(k) as f64).ceil().max(1.0) as usize;
    Ok((n, CostBound { k, t, eps_t, norm_h1, norm_h2, n_t }))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderChoice {
    /// Real minimizer `sqrt(log_{25/3}(80 e 2^b / d) / 2)`.
    pub k_star: f64,
    /// Integer order minimizing the total-exponential bound.
    pub k: u32,
}

/// Optimal splitting order for `b` clock bits in dimension `d`, using the
/// worst case `||H2|| = 1/(2d)`.
pub fn optimal_k(b: u32, d: usize) -> Result<OrderChoice> {
    let arg = 80.0 * E * (b as f64).exp2() / d as f64;
    if arg.is_nan() || arg <= 1.0 {
        return Err(Error::Domain(format!("80e 2^b / d = {arg} must exceed 1")));
    }
    let k_star = (0.5 * arg.ln() / (25.0f64 / 3.0).ln()).sqrt();
    let lo = (k_star.floor() as u32).max(1);
    let hi = (k_star.ceil() as u32).max(1);
    let norm_h2 = 1.0 / (2.0 * d as f64);
    let k = if analytic_total(b, hi, 1.0, norm_h2) < analytic_total(b, lo, 1.0, norm_h2) { hi } else { lo };
    Ok(OrderChoice { k_star, k })
}

/// Applies splitting factors to compact grid vectors: `H2` factors as
/// diagonal phases, `H1` factors in the sine basis of every axis.
#[derive(Debug, Clone)]
pub struct SplitPropagator {
    d: usize,
    len: usize,
    h1: Vec<f64>,
    h2: Vec<f64>,
    dst: SineTransform,
}

/// A schedule with its phase tables precomputed for one Hamiltonian.
#[derive(Debug, Clone)]
pub struct CompiledSchedule {
    ops: Vec<(Target, usize)>,
    tables: Vec<Vec<Complex64>>,
}

impl SplitPropagator {
    pub fn new(h: &DiscretizedHamiltonian) -> Self {
        let scale = 2.0 * h.grid().d() as f64;
        Self {
            d: h.grid().d(),
            len: h.len(),
            h1: h.h1_spectrum(),
            h2: h.values().iter().map(|v| v / scale).collect(),
            dst: SineTransform::new(h.grid().m()),
        }
    }

    pub fn compile(&self, schedule: &SplittingSchedule) -> CompiledSchedule {
        let mut index: HashMap<(Target, u64), usize> = HashMap::new();
        let mut tables = Vec::new();
        let ops = schedule
            .factors
            .iter()
            .map(|f| {
                let id = *index.entry((f.target, f.z.to_bits())).or_insert_with(|| {
                    let diag = match f.target {
                        Target::H1 => &self.h1,
                        Target::H2 => &self.h2,
                    };
                    tables.push(diag.iter().map(|&e| Complex64::from_polar(1.0, e * f.z)).collect());
                    tables.len() - 1
                });
                (f.target, id)
            })
            .collect();
        CompiledSchedule { ops, tables }
    }

    pub fn run(&mut self, compiled: &CompiledSchedule, state: &mut [Complex64]) -> Result<()> {
        if state.len() != self.len {
            return Err(Error::DimensionMismatch { expected: self.len, actual: state.len() });
        }
        for &(target, id) in &compiled.ops {
            let table = &compiled.tables[id];
            match target {
                Target::H2 => state.iter_mut().zip(table).for_each(|(s, p)| *s *= p),
                Target::H1 => {
                    self.dst.transform_axes(state, self.d);
                    state.iter_mut().zip(table).for_each(|(s, p)| *s *= p);
                    self.dst.transform_axes(state, self.d);
                }
            }
        }
        Ok(())
    }

    pub fn apply(&mut self, schedule: &SplittingSchedule, state: &mut [Complex64]) -> Result<()> {
        let compiled = self.compile(schedule);
        self.run(&compiled, state)
    }
}

/// Applies `schedule` to a grid vector of `h` and returns the result.
pub fn apply_schedule(h: &DiscretizedHamiltonian, schedule: &SplittingSchedule, s: &[Complex64]) -> Result<Vec<Complex64>> {
    let mut out = s.to_vec();
    SplitPropagator::new(h).apply(schedule, &mut out)?;
    Ok(out)
}

const NORM_LANCZOS_STEPS: usize = 40;

/// Spectral-norm error `||S - e^{i T M_h/(2d)}||_2` of a schedule, estimated
/// by Lanczos on `D^H D` with `D` the difference operator.
pub fn schedule_error(
    split: &mut SplitPropagator,
    exact: &ExactPropagator,
    schedule: &SplittingSchedule,
    seed: u64,
) -> Result<f64> {
    let n = exact.len();
    let forward = split.compile(schedule);
    let backward = split.compile(&schedule.adjoint());
    let t = schedule.total_time;
    let mut apply_ddag_d = |x: &[Complex64]| -> Result<Vec<Complex64>> {
        let mut a = x.to_vec();
        let mut b = x.to_vec();
        split.run(&forward, &mut a)?;
        exact.apply(t, &mut b)?;
        let mut dx: Vec<Complex64> = a.iter().zip(&b).map(|(p, q)| p - q).collect();
        let mut c = dx.clone();
        split.run(&backward, &mut dx)?;
        exact.apply(-t, &mut c)?;
        Ok(dx.iter().zip(&c).map(|(p, q)| p - q).collect())
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<Complex64> = (0..n).map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
    let norm = |x: &[Complex64]| x.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let inner = |x: &[Complex64], y: &[Complex64]| x.iter().zip(y).map(|(a, b)| a.conj() * b).sum::<Complex64>();
    let nv = norm(&v);
    v.iter_mut().for_each(|c| *c /= nv);

    let steps = NORM_LANCZOS_STEPS.min(n);
    let mut basis = vec![v];
    let mut alphas = Vec::new();
    let mut betas = Vec::new();
    let mut last = 0.0;
    for j in 0..steps {
        let mut w = apply_ddag_d(&basis[j])?;
        alphas.push(inner(&basis[j], &w).re);
        for _ in 0..2 {
            for b in &basis {
                let c = inner(b, &w);
                w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
        }
        let beta = norm(&w);
        let top = largest_tridiagonal(&alphas, &betas);
        let converged = j >= 2 && (top - last).abs() <= 1e-10 * top.max(1e-300);
        last = top;
        if converged || beta <= 1e-14 || j + 1 == steps {
            break;
        }
        betas.push(beta);
        basis.push(w.iter().map(|c| c / beta).collect());
    }
    Ok(last.max(0.0).sqrt())
}

fn largest_tridiagonal(alphas: &[f64], betas: &[f64]) -> f64 {
    let k = alphas.len();
    let t = nalgebra::DMatrix::from_fn(k, k, |i, j| {
        if i == j {
            alphas[i]
        } else if i + 1 == j {
            betas[i]
        } else if j + 1 == i {
            betas[j]
        } else {
            0.0
        }
    });
    t.symmetric_eigenvalues().iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// Outcome of the empirical step search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalSteps {
    pub steps: usize,
    pub measured_error: f64,
}

const MAX_EMPIRICAL_STEPS: usize = 1 << 22;

/// Smallest step count (to within 1/16 relative) whose measured spectral-norm
/// error is at most `eps`: doubling from one step, then bisection.
pub fn min_steps_empirical(
    split: &mut SplitPropagator,
    exact: &ExactPropagator,
    k: u32,
    total_time: f64,
    eps: f64,
) -> Result<EmpiricalSteps> {
    let mut measure = |n: usize| -> Result<f64> {
        let s = suzuki_schedule(k, total_time, n)?;
        schedule_error(split, exact, &s, n as u64)
    };
    let mut hi = 1;
    let mut err_hi = measure(1)?;
    while err_hi > eps {
        hi *= 2;
        if hi > MAX_EMPIRICAL_STEPS {
            return Err(Error::TooLarge { what: "empirical step count", size: hi as u128, limit: MAX_EMPIRICAL_STEPS as u128 });
        }
        err_hi = measure(hi)?;
    }
    let mut lo = hi / 2;
    while hi - lo > (hi / 16).max(1) {
        let mid = lo + (hi - lo) / 2;
        let err = measure(mid)?;
        if err <= eps {
            hi = mid;
            err_hi = err;
        } else {
            lo = mid;
        }
    }
    Ok(EmpiricalSteps { steps: hi, measured_error: err_hi })
}

/// Empirical step search from a Hamiltonian; requires the dense oracle.
pub fn min_steps_for_error_empirical(h: &DiscretizedHamiltonian, k: u32, total_time: f64, eps: f64) -> Result<EmpiricalSteps> {
    let exact = ExactPropagator::new(h)?;
    let mut split = SplitPropagator::new(h);
    min_steps_empirical(&mut split, &exact, k, total_time, eps)
}
