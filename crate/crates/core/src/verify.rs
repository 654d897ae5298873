//! Acceptance checks. Each check returns a [`CriterionResult`] with the
//! measured quantities in `detail`; thresholds are fixed constants here.

use std::f64::consts::PI;
use std::fmt;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cost::{analytic_total, nstar_scaling, qubit_count};
use crate::error::Result;
use crate::experiment::{OrderCurve, ProblemDescriptor};
use crate::grid::GridSpec;
use crate::hamiltonian::{discretize, QueryConfig};
use crate::potential::PotentialSpec;
use crate::qpe::{exact_mode_threshold, run_qpe, KPolicy, QpeConfig, StepPolicy, SPLITTING_MODE_THRESHOLD};
use crate::spectral::{
    discretization_study, ground_overlap, ground_state, perturbation_check, ExactPropagator, RESIDUAL_TOLERANCE,
};
use crate::splitting::{error_budget, optimal_k, schedule_error, suzuki_schedule, SplitPropagator};

/// `1 - 1/(3 pi^2 - 2)^2`.
pub fn overlap_bound() -> f64 {
    1.0 - 1.0 / (3.0 * PI * PI - 2.0).powi(2)
}

pub const C1_MAX_SECONDS: f64 = 30.0;
pub const C2_MAX_SECONDS: f64 = 120.0;
pub const C2_MIN_POTENTIALS: usize = 20;
pub const C3_MAX_GRID: usize = 1024;
pub const C3_CLOCK_BITS: u32 = 6;
pub const C4_MIN_SLOPE: [f64; 2] = [1.7, 3.7];
pub const C4_STEPS: [usize; 4] = [4, 8, 16, 32];
/// One-sided 5% critical value of Spearman's rho for five points.
pub const C6_SPEARMAN_CRITICAL: f64 = 0.9;
pub const C8_EXPONENT_RANGE: (f64, f64) = (3.0, 3.5);
pub const C9_RATIO_RANGE: (f64, f64) = (2.0, 6.0);

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u32,
    pub name: String,
    pub pass: bool,
    pub detail: String,
    pub seconds: f64,
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] criterion {}: {} ({:.1}s) {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.seconds,
            self.detail
        )
    }
}

fn finish(id: u32, name: &str, start: Instant, pass: bool, detail: String) -> CriterionResult {
    CriterionResult { id, name: name.into(), pass, detail, seconds: start.elapsed().as_secs_f64() }
}

fn failed(id: u32, name: &str, start: Instant, err: crate::error::Error) -> CriterionResult {
    finish(id, name, start, false, format!("error: {err}"))
}

/// One admissible potential on one grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteInstance {
    pub d: usize,
    pub q: u32,
    pub potential: PotentialSpec,
}

const SUITE_GRIDS: [(usize, u32); 8] = [(1, 3), (1, 6), (2, 3), (2, 4), (2, 6), (3, 2), (3, 3), (3, 4)];

/// 24 distinct potentials spread over grids with `d <= 3`, `m^d <= 4096`.
pub fn overlap_suite() -> Vec<SuiteInstance> {
    let mut potentials = vec![
        PotentialSpec::Zero,
        PotentialSpec::Constant { value: 0.3 },
        PotentialSpec::Constant { value: 1.0 },
        PotentialSpec::LinearMean,
        PotentialSpec::SeparableTrig { scale: 0.5 },
        PotentialSpec::SeparableTrig { scale: 0.63 },
        PotentialSpec::SineBump { amplitude: 0.2 },
        PotentialSpec::SineBump { amplitude: 0.315 },
    ];
    potentials.extend((1..=16).map(|seed| PotentialSpec::RandomTrig { seed, terms: 2 + (seed as usize % 5) }));
    potentials
        .into_iter()
        .enumerate()
        .map(|(i, potential)| {
            let (d, q) = SUITE_GRIDS[i % SUITE_GRIDS.len()];
            SuiteInstance { d, q, potential }
        })
        .collect()
}

/// Instances of the overlap suite small enough for the dense oracle with
/// `b = 6` clock bits.
pub fn chain_suite() -> Vec<SuiteInstance> {
    overlap_suite()
        .into_iter()
        .filter(|s| s.q <= C3_CLOCK_BITS && GridSpec::new(s.d, s.q).map(|g| g.len() <= C3_MAX_GRID).unwrap_or(false))
        .collect()
}

pub fn criterion_1() -> CriterionResult {
    let name = "zero-potential end-to-end (d=1, q=8, b=8, exact)";
    let start = Instant::now();
    let run = || -> Result<CriterionResult> {
        let cfg = QpeConfig::new(GridSpec::new(1, 8)?, PotentialSpec::Zero).with_clock_bits(8);
        let out = run_qpe(&cfg)?;
        let energy = 4.0 * 65536.0 * (PI / 512.0).sin().powi(2);
        let mass = out.distribution.success_mass(energy / (4.0 * PI));
        let est = crate::qpe::estimate_energy(&out.distribution, 1, Some(energy));
        let err = (est.energy - energy).abs();
        let radius = 4.0 * PI / 256.0;
        let secs = start.elapsed().as_secs_f64();
        let pass = mass >= 8.0 / (PI * PI) && err <= radius && secs <= C1_MAX_SECONDS;
        Ok(finish(
            1,
            name,
            start,
            pass,
            format!("success mass {mass:.6} >= {:.6}; |Ehat - E| = {err:.5} <= {radius:.5}; {secs:.2}s <= 30s", 8.0 / (PI * PI)),
        ))
    };
    run().unwrap_or_else(|e| failed(1, name, start, e))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OverlapRow {
    pub instance: SuiteInstance,
    pub energy: f64,
    pub residual: f64,
    pub residual_limit: f64,
    pub d1_squared: f64,
}

pub fn overlap_rows() -> Result<Vec<OverlapRow>> {
    overlap_suite()
        .into_par_iter()
        .map(|instance| {
            let g = GridSpec::new(instance.d, instance.q)?;
            let h = discretize(&instance.potential.build(instance.d)?, &g)?;
            let r = ground_state(&h)?;
            Ok(OverlapRow {
                d1_squared: ground_overlap(&h, &r),
                energy: r.energy,
                residual: r.residual,
                residual_limit: RESIDUAL_TOLERANCE * h.norm_bound(),
                instance,
            })
        })
        .collect()
}

pub fn criterion_2() -> CriterionResult {
    let name = "overlap bound |d1|^2 >= 1 - 1/(3pi^2-2)^2";
    let start = Instant::now();
    match overlap_rows() {
        Ok(rows) => {
            let bound = overlap_bound();
            let worst = rows.iter().map(|r| r.d1_squared).fold(f64::INFINITY, f64::min);
            let residual_ok = rows.iter().all(|r| r.residual <= r.residual_limit);
            let secs = start.elapsed().as_secs_f64();
            let pass = rows.len() >= C2_MIN_POTENTIALS && worst >= bound && residual_ok && secs <= C2_MAX_SECONDS;
            finish(
                2,
                name,
                start,
                pass,
                format!(
                    "{} potentials, min |d1|^2 = {worst:.8} >= {bound:.6}; residuals within 1e-8 ||M||: {residual_ok}; {secs:.1}s <= 120s",
                    rows.len()
                ),
            )
        }
        Err(e) => failed(2, name, start, e),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChainRow {
    pub instance: SuiteInstance,
    pub energy: f64,
    pub exact_mass: f64,
    pub split_mass: f64,
    pub k: u32,
    pub eps: Vec<f64>,
    pub measured: Vec<f64>,
    pub exponentials: usize,
    pub analytic_n: f64,
    pub queries: usize,
    pub h2_factors: usize,
    pub qubits: usize,
    pub b: u32,
}

impl ChainRow {
    pub fn measured_total(&self) -> f64 {
        self.measured.iter().sum()
    }
}

/// Exact- and splitting-mode runs over [`chain_suite`] with `b = 6`.
pub fn chain_rows() -> Result<Vec<ChainRow>> {
    chain_suite()
        .into_par_iter()
        .map(|instance| {
            let g = GridSpec::new(instance.d, instance.q)?;
            let exact_cfg = QpeConfig::new(g, instance.potential.clone()).with_clock_bits(C3_CLOCK_BITS);
            let h = exact_cfg.hamiltonian()?;
            let energy = ground_state(&h)?.energy;
            let phase = energy / (4.0 * PI * instance.d as f64);
            let exact = run_qpe(&exact_cfg)?;
            let split_cfg = exact_cfg.clone().splitting(KPolicy::Auto, StepPolicy::Empirical);
            let split = run_qpe(&split_cfg)?;
            Ok(ChainRow {
                energy,
                exact_mass: exact.distribution.success_mass(phase),
                split_mass: split.distribution.success_mass(phase),
                k: split.cost.k_used,
                eps: split.powers.iter().map(|p| p.eps_t).collect(),
                measured: split.powers.iter().map(|p| p.measured_error.unwrap_or(f64::INFINITY)).collect(),
                exponentials: split.cost.empirical_n,
                analytic_n: split.cost.analytic_n,
                queries: split.cost.queries,
                h2_factors: split.cost.per_power.iter().map(|p| p.h2).sum(),
                qubits: split.cost.qubits,
                b: split_cfg.b,
                instance,
            })
        })
        .collect()
}

pub fn criterion_3(rows: &[ChainRow]) -> CriterionResult {
    let name = "success-probability chain (b=6, exact >= 0.8095, splitting >= 2/3)";
    let start = Instant::now();
    let exact_min = rows.iter().map(|r| r.exact_mass).fold(f64::INFINITY, f64::min);
    let split_min = rows.iter().map(|r| r.split_mass).fold(f64::INFINITY, f64::min);
    let budget_ok = rows.iter().all(|r| r.measured.iter().zip(&r.eps).all(|(m, e)| m <= e));
    let pass = !rows.is_empty() && exact_min >= exact_mode_threshold() && split_min >= SPLITTING_MODE_THRESHOLD && budget_ok;
    finish(
        3,
        name,
        start,
        pass,
        format!(
            "{} instances; min exact mass {exact_min:.6} >= {:.6}; min splitting mass {split_min:.6} >= {:.6}; per-power errors within eps_t: {budget_ok}",
            rows.len(),
            exact_mode_threshold(),
            SPLITTING_MODE_THRESHOLD
        ),
    )
}

/// Spectral-norm error curves for `d = 1, q = 3, V = x, T = 1`.
pub fn order_curves() -> Result<(ProblemDescriptor, f64, Vec<OrderCurve>)> {
    let grid = GridSpec::new(1, 3)?;
    let potential = PotentialSpec::LinearMean;
    let h = discretize(&potential.build(1)?, &grid)?;
    let exact = ExactPropagator::new(&h)?;
    let mut split = SplitPropagator::new(&h);
    let total_time = 1.0;
    let mut curves = Vec::new();
    for k in [1, 2] {
        let mut error = Vec::new();
        for &n in &C4_STEPS {
            let s = suzuki_schedule(k, total_time, n)?;
            error.push(schedule_error(&mut split, &exact, &s, n as u64)?);
        }
        curves.push(OrderCurve {
            k,
            steps: C4_STEPS.to_vec(),
            lambda: C4_STEPS.iter().map(|&n| total_time / n as f64).collect(),
            error,
        });
    }
    let problem = ProblemDescriptor { d: 1, q: 3, potential, query_bits: h.query().bits };
    Ok((problem, total_time, curves))
}

pub fn criterion_4() -> CriterionResult {
    let name = "splitting order (log-log slope, k=1 >= 1.7, k=2 >= 3.7)";
    let start = Instant::now();
    match order_curves() {
        Ok((_, _, curves)) => {
            let mut pass = true;
            let mut parts = Vec::new();
            for (c, min) in curves.iter().zip(C4_MIN_SLOPE) {
                let pts: Vec<(f64, f64)> = c.lambda.iter().zip(&c.error).map(|(l, e)| (l.ln(), e.ln())).collect();
                let s = crate::cost::slope(&pts);
                pass &= s >= min;
                parts.push(format!("k={} slope {s:.3} >= {min}", c.k));
            }
            finish(4, name, start, pass, parts.join("; "))
        }
        Err(e) => failed(4, name, start, e),
    }
}

pub fn criterion_5(rows: &[ChainRow]) -> CriterionResult {
    let name = "budget arithmetic and measured degradation";
    let start = Instant::now();
    // sum_t 2^{t+1} / (40 * 2^b) <= 1/20  <=>  sum_t 2^{t+1} <= 2 * 2^b
    let exact_ok = (1..=12u32).all(|b| {
        let numer: u64 = (0..b).map(|t| 1u64 << (t + 1)).sum();
        numer <= 2 * (1u64 << b)
    });
    let float_ok = (1..=12).all(|b| error_budget(b).map(|e| e.total() <= 1.0 / 20.0).unwrap_or(false));
    let degradation_ok = rows.iter().all(|r| r.exact_mass - r.split_mass <= 2.0 * r.measured_total() + 1e-12);
    let worst = rows
        .iter()
        .map(|r| (r.exact_mass - r.split_mass) - 2.0 * r.measured_total())
        .fold(f64::NEG_INFINITY, f64::max);
    let pass = exact_ok && float_ok && degradation_ok && !rows.is_empty();
    finish(
        5,
        name,
        start,
        pass,
        format!(
            "sum eps_t <= 1/20 for b=1..12 (integer check {exact_ok}, float check {float_ok}); max (degradation - 2 sum measured) = {worst:.3e} <= 0 over {} runs",
            rows.len()
        ),
    )
}

pub fn criterion_6() -> CriterionResult {
    let name = "discretization error |E1 - Eh1|/(dh) bounded (d=1, q=3..7)";
    let start = Instant::now();
    let potentials = [PotentialSpec::Zero, PotentialSpec::LinearMean, PotentialSpec::SineBump { amplitude: 0.3 }];
    let mut pass = true;
    let mut parts = Vec::new();
    for p in &potentials {
        match discretization_study(p, 1, &[3, 4, 5, 6, 7], 9) {
            Ok(s) => {
                let ok = s.spearman < C6_SPEARMAN_CRITICAL && s.rows.iter().all(|r| r.ratio <= s.fitted_c1);
                pass &= ok;
                parts.push(format!("{}: c1 = {:.4}, spearman {:.2}", p.name(), s.fitted_c1, s.spearman));
            }
            Err(e) => return failed(6, name, start, e),
        }
    }
    finish(6, name, start, pass, parts.join("; "))
}

pub fn criterion_7(rows: &[ChainRow]) -> CriterionResult {
    let name = "cost bounds (exponentials <= analytic total, queries = 2 x H2, qubits = b + dq)";
    let start = Instant::now();
    let bound_ok = rows.iter().all(|r| (r.exponentials as f64) <= r.analytic_n);
    let query_ok = rows.iter().all(|r| r.queries == 2 * r.h2_factors);
    let qubit_ok = rows.iter().all(|r| r.qubits == r.b as usize + r.instance.d * r.instance.q as usize);
    let linear_ok = (1..=6u32).all(|q| {
        let counts: Vec<usize> = (1..=3).map(|d| GridSpec::new(d, q).map(|g| qubit_count(6, &g)).unwrap_or(0)).collect();
        counts.windows(2).all(|w| w[1] - w[0] == q as usize)
    });
    let max_ratio = rows.iter().map(|r| r.exponentials as f64 / r.analytic_n).fold(0.0, f64::max);
    let pass = bound_ok && query_ok && qubit_ok && linear_ok && !rows.is_empty();
    finish(
        7,
        name,
        start,
        pass,
        format!(
            "max empirical/analytic = {max_ratio:.2e}; query identity {query_ok}; qubit formula {qubit_ok}; linear in d {linear_ok}"
        ),
    )
}

pub fn criterion_8() -> CriterionResult {
    let name = "scaling fit (eps-exponent in (3, 3.5), optimal k = brute force)";
    let start = Instant::now();
    let points: Vec<(usize, u32)> = (6..=12).map(|b| (1, b)).collect();
    match nstar_scaling(&points) {
        Ok(table) => {
            let e = table.fits[0].exponent;
            let fit_ok = e > C8_EXPONENT_RANGE.0 && e < C8_EXPONENT_RANGE.1;
            let brute_ok = table.rows.iter().all(|r| {
                let h2 = 1.0 / (2.0 * r.d as f64);
                let best = (1..=6u32)
                    .min_by(|&a, &b| analytic_total(r.b, a, 1.0, h2).total_cmp(&analytic_total(r.b, b, 1.0, h2)))
                    .unwrap_or(0);
                optimal_k(r.b, r.d).map(|c| c.k == best).unwrap_or(false)
            });
            let ks: Vec<u32> = table.rows.iter().map(|r| r.k).collect();
            finish(
                8,
                name,
                start,
                fit_ok && brute_ok,
                format!("fitted exponent {e:.4} over b=6..12 (k = {ks:?}); brute-force match {brute_ok}"),
            )
        }
        Err(e) => failed(8, name, start, e),
    }
}

pub fn criterion_9() -> CriterionResult {
    let name = "perturbation identity (residual ratio 4 +- 50% as delta halves)";
    let start = Instant::now();
    let run = || -> Result<CriterionResult> {
        let g = GridSpec::new(1, 5)?;
        let q = QueryConfig::exact();
        let full = perturbation_check(&PotentialSpec::SineBump { amplitude: 0.1 }, &PotentialSpec::Zero, &g, q)?;
        let half = perturbation_check(&PotentialSpec::SineBump { amplitude: 0.05 }, &PotentialSpec::Zero, &g, q)?;
        let ratio = full.residual / half.residual;
        let pass = ratio >= C9_RATIO_RANGE.0 && ratio <= C9_RATIO_RANGE.1;
        Ok(finish(
            9,
            name,
            start,
            pass,
            format!("residual(0.1) = {:.4e}, residual(0.05) = {:.4e}, ratio {ratio:.3}", full.residual, half.residual),
        ))
    };
    run().unwrap_or_else(|e| failed(9, name, start, e))
}

/// Runs every criterion in order.
pub fn run_all() -> Vec<CriterionResult> {
    run_selected(&(1..=9).collect::<Vec<_>>())
}

/// Runs the listed criteria; the shared success-chain runs happen at most once.
pub fn run_selected(ids: &[u32]) -> Vec<CriterionResult> {
    let needs_chain = ids.iter().any(|id| matches!(id, 3 | 5 | 7));
    let start = Instant::now();
    let chain = if needs_chain { Some(chain_rows()) } else { None };
    let chain_secs = start.elapsed().as_secs_f64();
    let mut ids = ids.to_vec();
    ids.sort_unstable();
    ids.dedup();
    ids.into_iter()
        .filter_map(|id| {
            let with_rows = |f: fn(&[ChainRow]) -> CriterionResult, name: &str| match chain.as_ref() {
                Some(Ok(rows)) => f(rows),
                Some(Err(e)) => failed(id, name, start, crate::error::Error::Domain(e.to_string())),
                None => unreachable!(),
            };
            Some(match id {
                1 => criterion_1(),
                2 => criterion_2(),
                3 => {
                    let mut r = with_rows(criterion_3, "success-probability chain");
                    r.seconds += chain_secs;
                    r
                }
                4 => criterion_4(),
                5 => with_rows(criterion_5, "budget arithmetic"),
                6 => criterion_6(),
                7 => with_rows(criterion_7, "cost bounds"),
                8 => criterion_8(),
                9 => criterion_9(),
                _ => return None,
            })
        })
        .collect()
}

pub fn elapsed(results: &[CriterionResult]) -> Duration {
    Duration::from_secs_f64(results.iter().map(|r| r.seconds).sum())
}
