//! Exponential, query and qubit accounting, and the analytic bounds they are
//! checked against.

use std::f64::consts::E;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::hamiltonian::laplacian_eigenvalue_1d;
use crate::splitting::{factors_per_step, optimal_k, SplittingSchedule, Target};

/// Bound on the exponentials over all powers `t < b` under the budget
/// `eps_t = 2^{t+1-b}/40`:
/// `16 e ||H1|| 2^b (25/3)^{k-1} (160 e 2^b ||H2||)^{1/(2k)}`.
pub fn analytic_total(b: u32, k: u32, norm_h1: f64, norm_h2: f64) -> f64 {
    let two_b = (b as f64).exp2();
    16.0 * E * norm_h1 * two_b * (25.0f64 / 3.0).powi(k as i32 - 1)
        * (160.0 * E * two_b * norm_h2).powf(1.0 / (2.0 * k as f64))
}

/// `b + d q`: clock register plus grid register.
pub fn qubit_count(b: u32, grid: &GridSpec) -> usize {
    b as usize + grid.qubits()
}

/// Leading-order model `eps^-3 exp(sqrt(ln(1/(d eps))))` for the optimal count.
pub fn nstar_model(d: usize, eps: f64) -> f64 {
    eps.powi(-3) * (1.0 / (d as f64 * eps)).ln().max(0.0).sqrt().exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PowerCount {
    pub t: u32,
    pub steps: usize,
    pub h1: usize,
    pub h2: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub per_power: Vec<PowerCount>,
    /// Two queries per `H2` exponential.
    pub queries: usize,
    /// Total exponentials actually used.
    pub empirical_n: usize,
    /// Closed-form total, floored at one full step per power.
    pub analytic_n: f64,
    pub k_used: u32,
    pub k_star: f64,
    pub qubits: usize,
    /// Non-query operations: state preparation and every `H1` exponential
    /// charged `d log2^2(1/h)` each.
    pub other_ops: f64,
}

impl CostReport {
    pub fn new(grid: &GridSpec, b: u32, k_used: u32, norm_h1: f64, norm_h2: f64, per_power: Vec<PowerCount>) -> Self {
        let h2: usize = per_power.iter().map(|p| p.h2).sum();
        let h1: usize = per_power.iter().map(|p| p.h1).sum();
        let k_star = optimal_k(b, grid.d()).map(|c| c.k_star).unwrap_or(f64::NAN);
        let log_eps = grid.q() as f64;
        Self {
            queries: 2 * h2,
            empirical_n: h1 + h2,
            analytic_n: analytic_total(b, k_used, norm_h1, norm_h2).max((b as usize * factors_per_step(k_used)) as f64),
            k_used,
            k_star,
            qubits: qubit_count(b, grid),
            other_ops: (h1 + 1) as f64 * grid.d() as f64 * log_eps * log_eps,
            per_power,
        }
    }

    pub fn power_count(t: u32, schedule: &SplittingSchedule) -> PowerCount {
        PowerCount { t, steps: schedule.steps, h1: schedule.count(Target::H1), h2: schedule.count(Target::H2) }
    }

    pub fn query_identity_holds(&self) -> bool {
        self.queries == 2 * self.per_power.iter().map(|p| p.h2).sum::<usize>()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlackReport {
    pub empirical_n: usize,
    pub analytic_n: f64,
    /// `empirical / analytic`.
    pub ratio: f64,
    pub within_bound: bool,
}

pub fn empirical_vs_analytic(report: &CostReport) -> SlackReport {
    let ratio = report.empirical_n as f64 / report.analytic_n;
    SlackReport { empirical_n: report.empirical_n, analytic_n: report.analytic_n, ratio, within_bound: ratio <= 1.0 }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub d: usize,
    pub epsilon: f64,
    pub b: u32,
    pub k: u32,
    pub k_star: f64,
    pub analytic_n: f64,
    pub nstar_model: f64,
    pub empirical_n: Option<usize>,
    pub queries: Option<usize>,
    pub qubits: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub d: usize,
    pub b_min: u32,
    pub b_max: u32,
    /// Least-squares slope of `ln analytic_n` against `ln(1/eps)`.
    pub exponent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingTable {
    pub rows: Vec<ScalingRow>,
    pub fits: Vec<ExponentFit>,
}

pub const CSV_HEADER: &str = "d,epsilon,b,k,analyticN,empiricalN,queries,qubits";

impl ScalingRow {
    pub fn csv_line(&self) -> String {
        let opt = |x: Option<usize>| x.map(|v| v.to_string()).unwrap_or_default();
        format!(
            "{},{:e},{},{},{:e},{},{},{}",
            self.d,
            self.epsilon,
            self.b,
            self.k,
            self.analytic_n,
            opt(self.empirical_n),
            opt(self.queries),
            self.qubits
        )
    }
}

impl ScalingTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            let _ = writeln!(out, "{}", row.csv_line());
        }
        out
    }
}

/// Analytic totals at the integer-optimal order for points `(d, b)` with
/// `eps = h = 2^-b` (grid with `q = b`), `||H1||` from the closed form and
/// `||H2|| = 1/(2d)`.
pub fn nstar_scaling(points: &[(usize, u32)]) -> Result<ScalingTable> {
    let mut rows = Vec::with_capacity(points.len());
    for &(d, b) in points {
        if d == 0 || b == 0 || b > 40 {
            return Err(Error::InvalidParameter(format!("scaling point (d={d}, b={b})")));
        }
        let choice = optimal_k(b, d)?;
        let h = (-(b as f64)).exp2();
        let m = (1usize << b) - 1;
        let s = (m as f64 * std::f64::consts::PI * h / 2.0).sin();
        let norm_h1 = 2.0 * s * s / (h * h);
        rows.push(ScalingRow {
            d,
            epsilon: h,
            b,
            k: choice.k,
            k_star: choice.k_star,
            analytic_n: analytic_total(b, choice.k, norm_h1, 1.0 / (2.0 * d as f64)),
            nstar_model: nstar_model(d, h),
            empirical_n: None,
            queries: None,
            qubits: b as usize + d * b as usize,
        });
    }
    let mut ds: Vec<usize> = rows.iter().map(|r| r.d).collect();
    ds.sort_unstable();
    ds.dedup();
    let fits = ds
        .into_iter()
        .filter_map(|d| {
            let pts: Vec<(f64, f64)> = rows
                .iter()
                .filter(|r| r.d == d)
                .map(|r| ((1.0 / r.epsilon).ln(), r.analytic_n.ln()))
                .collect();
            if pts.len() < 2 {
                return None;
            }
            let bs = rows.iter().filter(|r| r.d == d).map(|r| r.b);
            Some(ExponentFit { d, b_min: bs.clone().min()?, b_max: bs.max()?, exponent: slope(&pts) })
        })
        .collect();
    Ok(ScalingTable { rows, fits })
}

/// Least-squares slope through `(x, y)` pairs.
pub fn slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// `||H1||` of the grid, `2 h^-2 sin^2(m pi h/2)`.
pub fn norm_h1(grid: &GridSpec) -> f64 {
    laplacian_eigenvalue_1d(grid, grid.m()) / 2.0
}
