//! Statevector simulation of phase estimation for `W = e^{i M_h/(2d)}` with
//! the sine-state initial guess and exact or split powers of `W`.
//!
//! The state is a `2^b x (2^q)^d` amplitude array, clock index major. Clock
//! bit `t` controls `W^{2^t}`; after the inverse Fourier transform on the
//! clock, outcome `j` estimates the phase `E_h1/(4 pi d)` as `j 2^-b`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::cost::{CostReport, PowerCount};
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::hamiltonian::{discretize_with, sine_state, DiscretizedHamiltonian, QueryConfig};
use crate::potential::PotentialSpec;
use crate::splitting::{
    error_budget, min_steps_empirical, min_steps_for_error, optimal_k, suzuki_schedule, CompiledSchedule,
    SplitPropagator,
};
use crate::spectral::ExactPropagator;

/// Largest amplitude array the simulator allocates.
pub const MAX_STATE_LEN: usize = 1 << 24;

/// Norm drift tolerated at any pipeline stage.
pub const NORM_TOLERANCE: f64 = 1e-10;

/// `8/pi^2 (1 - 1/(3 pi^2 - 2)^2)`: success bound with the sine state.
pub fn exact_mode_threshold() -> f64 {
    8.0 / (PI * PI) * (1.0 - 1.0 / (3.0 * PI * PI - 2.0).powi(2))
}

/// Success bound once the splitting budget is spent.
pub const SPLITTING_MODE_THRESHOLD: f64 = 2.0 / 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PropagatorMode {
    Exact,
    Splitting,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KPolicy {
    /// Integer order from the optimal-k rule.
    Auto,
    Fixed(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepPolicy {
    /// Search for the fewest steps whose measured error meets `eps_t`.
    Empirical,
    /// Steps from the analytic exponential bound.
    Analytic,
    /// The same step count for every power.
    Fixed(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QpeConfig {
    pub b: u32,
    pub grid: GridSpec,
    pub potential: PotentialSpec,
    pub query: QueryConfig,
    pub mode: PropagatorMode,
    pub k: KPolicy,
    pub steps: StepPolicy,
}

impl QpeConfig {
    /// Exact-mode config with `b = q` and default query width.
    pub fn new(grid: GridSpec, potential: PotentialSpec) -> Self {
        Self {
            b: grid.q(),
            grid,
            query: QueryConfig::for_grid(&grid),
            potential,
            mode: PropagatorMode::Exact,
            k: KPolicy::Auto,
            steps: StepPolicy::Empirical,
        }
    }

    pub fn with_clock_bits(mut self, b: u32) -> Self {
        self.b = b;
        self
    }

    pub fn splitting(mut self, k: KPolicy, steps: StepPolicy) -> Self {
        self.mode = PropagatorMode::Splitting;
        self.k = k;
        self.steps = steps;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.b < self.grid.q() {
            return Err(Error::InvalidParameter(format!(
                "clock bits b = {} below mesh resolution q = {}",
                self.b,
                self.grid.q()
            )));
        }
        if self.b > 20 {
            return Err(Error::InvalidParameter(format!("clock bits b = {} above 20", self.b)));
        }
        let len = (1u128 << self.b) * self.grid.register_len() as u128;
        if len > MAX_STATE_LEN as u128 {
            return Err(Error::TooLarge { what: "statevector length", size: len, limit: MAX_STATE_LEN as u128 });
        }
        if let KPolicy::Fixed(0) = self.k {
            return Err(Error::InvalidParameter("splitting order k must be >= 1".into()));
        }
        if let StepPolicy::Fixed(0) = self.steps {
            return Err(Error::InvalidParameter("fixed step count must be >= 1".into()));
        }
        Ok(())
    }

    pub fn hamiltonian(&self) -> Result<DiscretizedHamiltonian> {
        discretize_with(&self.potential.build(self.grid.d())?, &self.grid, self.query)
    }

    pub fn resolve_k(&self) -> Result<u32> {
        match self.k {
            KPolicy::Fixed(k) => Ok(k),
            KPolicy::Auto => Ok(optimal_k(self.b, self.grid.d())?.k),
        }
    }
}

/// Amplitudes over `(clock x, register g)`, index `x * register_len + g`.
#[derive(Debug, Clone, PartialEq)]
pub struct QpeState {
    b: u32,
    register_len: usize,
    amplitudes: Vec<Complex64>,
}

impl QpeState {
    /// Clock all-zero, register holding `grid_state` (compact grid
    /// ordering) embedded through `map`.
    pub fn from_register(b: u32, register_len: usize, map: &[usize], grid_state: &[Complex64]) -> Result<Self> {
        if map.len() != grid_state.len() {
            return Err(Error::DimensionMismatch { expected: map.len(), actual: grid_state.len() });
        }
        let len = (1usize << b) * register_len;
        if len > MAX_STATE_LEN {
            return Err(Error::TooLarge { what: "statevector length", size: len as u128, limit: MAX_STATE_LEN as u128 });
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); len];
        for (&r, &a) in map.iter().zip(grid_state) {
            amplitudes[r] = a;
        }
        Ok(Self { b, register_len, amplitudes })
    }

    pub fn clock_bits(&self) -> u32 {
        self.b
    }

    pub fn register_len(&self) -> usize {
        self.register_len
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, clock: usize, register: usize) -> Complex64 {
        self.amplitudes[clock * self.register_len + register]
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Probability mass on register states outside `map`.
    pub fn mass_outside(&self, map: &[usize]) -> f64 {
        let mut inside = vec![false; self.register_len];
        map.iter().for_each(|&r| inside[r] = true);
        self.amplitudes
            .chunks(self.register_len)
            .flat_map(|row| row.iter().zip(&inside).filter(|(_, &i)| !i).map(|(a, _)| a.norm_sqr()))
            .sum()
    }

    /// Hadamard on every clock qubit.
    pub fn hadamard_clock(&mut self) {
        let g = self.register_len;
        let s = std::f64::consts::FRAC_1_SQRT_2;
        for bit in 0..self.b {
            let half = 1usize << bit;
            for block in self.amplitudes.chunks_mut(2 * half * g) {
                let (lo, hi) = block.split_at_mut(half * g);
                for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                    let (x, y) = (*a, *b);
                    *a = (x + y) * s;
                    *b = (x - y) * s;
                }
            }
        }
    }

    /// Applies `op` to the grid part of every clock row whose bit `t` is set.
    pub fn controlled<F, I>(&mut self, t: u32, map: &[usize], init: I, op: F) -> Result<()>
    where
        I: Fn() -> F::State + Sync + Send,
        F: ControlledOp,
    {
        let g = self.register_len;
        let n = map.len();
        self.amplitudes
            .par_chunks_mut(g)
            .enumerate()
            .filter(|(x, _)| (x >> t) & 1 == 1)
            .try_for_each_init(
                || (init(), vec![Complex64::new(0.0, 0.0); n]),
                |(state, buf), (_, row)| {
                    for (b, &r) in buf.iter_mut().zip(map) {
                        *b = row[r];
                    }
                    op.apply(state, t, buf)?;
                    for (b, &r) in buf.iter().zip(map) {
                        row[r] = *b;
                    }
                    Ok(())
                },
            )
    }

    /// Inverse quantum Fourier transform on the clock register:
    /// `a_j <- 2^{-b/2} sum_x e^{-2 pi i j x / 2^b} a_x`.
    pub fn inverse_qft_clock(&mut self) {
        let n = 1usize << self.b;
        let g = self.register_len;
        let fft = FftPlanner::new().plan_fft_forward(n);
        let mut cols = vec![Complex64::new(0.0, 0.0); n * g];
        for x in 0..n {
            for r in 0..g {
                cols[r * n + x] = self.amplitudes[x * g + r];
            }
        }
        fft.process(&mut cols);
        let scale = 1.0 / (n as f64).sqrt();
        for x in 0..n {
            for r in 0..g {
                self.amplitudes[x * g + r] = cols[r * n + x] * scale;
            }
        }
    }

    pub fn distribution(&self) -> OutcomeDistribution {
        OutcomeDistribution {
            b: self.b,
            probabilities: self.amplitudes.chunks(self.register_len).map(|row| row.iter().map(|a| a.norm_sqr()).sum()).collect(),
        }
    }
}

/// A family of unitaries `U_t` standing in for `W^{2^t}` on compact grid vectors.
pub trait ControlledOp: Sync {
    type State: Send;
    fn apply(&self, state: &mut Self::State, t: u32, v: &mut [Complex64]) -> Result<()>;
}

/// Exact powers through the eigendecomposition.
pub struct ExactPowers<'a>(pub &'a ExactPropagator);

impl ControlledOp for ExactPowers<'_> {
    type State = ();
    fn apply(&self, _: &mut (), t: u32, v: &mut [Complex64]) -> Result<()> {
        self.0.apply((t as f64).exp2(), v)
    }
}

/// Split powers: one compiled schedule per clock bit.
pub struct SplitPowers<'a> {
    pub schedules: &'a [CompiledSchedule],
}

impl ControlledOp for SplitPowers<'_> {
    type State = SplitPropagator;
    fn apply(&self, split: &mut SplitPropagator, t: u32, v: &mut [Complex64]) -> Result<()> {
        split.run(&self.schedules[t as usize], v)
    }
}

/// Diagonal unitary `e^{2 pi i phi_g}` per basis state; raised to `2^t`.
pub struct DiagonalPowers<'a>(pub &'a [f64]);

impl ControlledOp for DiagonalPowers<'_> {
    type State = ();
    fn apply(&self, _: &mut (), t: u32, v: &mut [Complex64]) -> Result<()> {
        let power = (t as f64).exp2();
        for (a, &phi) in v.iter_mut().zip(self.0) {
            *a *= Complex64::from_polar(1.0, 2.0 * PI * (phi * power).fract());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeDistribution {
    pub b: u32,
    pub probabilities: Vec<f64>,
}

impl OutcomeDistribution {
    pub fn total(&self) -> f64 {
        self.probabilities.iter().sum()
    }

    /// Most probable outcome; ties go to the smaller index.
    pub fn map_outcome(&self) -> usize {
        self.probabilities
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (j, &p)| if p > best.1 { (j, p) } else { best })
            .0
    }

    /// Outcomes within circular distance `2^-b` of `phase`.
    pub fn success_set(&self, phase: f64) -> Vec<usize> {
        let n = self.probabilities.len() as f64;
        (0..self.probabilities.len())
            .filter(|&j| {
                let diff = (phase - j as f64 / n).rem_euclid(1.0);
                diff.min(1.0 - diff) <= 1.0 / n + 1e-12
            })
            .collect()
    }

    pub fn success_mass(&self, phase: f64) -> f64 {
        self.success_set(phase).into_iter().map(|j| self.probabilities[j]).sum()
    }

    /// The `k` most probable outcomes, descending.
    pub fn top_k(&self, k: usize) -> Vec<(usize, f64)> {
        let mut idx: Vec<usize> = (0..self.probabilities.len()).collect();
        idx.sort_by(|&a, &b| self.probabilities[b].total_cmp(&self.probabilities[a]).then(a.cmp(&b)));
        idx.into_iter().take(k).map(|j| (j, self.probabilities[j])).collect()
    }
}

/// Per-power record of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerRecord {
    pub t: u32,
    pub eps_t: f64,
    pub steps: usize,
    /// Spectral-norm error of the split power, when measured.
    pub measured_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QpeOutcome {
    pub distribution: OutcomeDistribution,
    pub cost: CostReport,
    pub powers: Vec<PowerRecord>,
    /// State norm after preparation, the Hadamard layer, each controlled
    /// power and the inverse Fourier transform.
    pub stage_norms: Vec<f64>,
}

impl QpeOutcome {
    pub fn measured_error_total(&self) -> Option<f64> {
        self.powers.iter().map(|p| p.measured_error).sum()
    }
}

pub fn prepare_initial_state(cfg: &QpeConfig) -> Result<QpeState> {
    cfg.validate()?;
    let psi: Vec<Complex64> = sine_state(&cfg.grid).into_iter().map(|x| Complex64::new(x, 0.0)).collect();
    QpeState::from_register(cfg.b, cfg.grid.register_len(), &cfg.grid.register_map(), &psi)
}

/// Runs the full pipeline from `state` and records the norm after every stage.
pub fn simulate<F, I>(state: &mut QpeState, map: &[usize], init: I, op: &F) -> Result<Vec<f64>>
where
    I: Fn() -> F::State + Sync + Send,
    F: ControlledOp,
{
    let mut norms = vec![state.norm()];
    state.hadamard_clock();
    norms.push(state.norm());
    for t in 0..state.b {
        state.controlled(t, map, &init, ControlledRef(op))?;
        norms.push(state.norm());
    }
    state.inverse_qft_clock();
    norms.push(state.norm());
    Ok(norms)
}

struct ControlledRef<'a, F>(&'a F);

impl<F: ControlledOp> ControlledOp for ControlledRef<'_, F> {
    type State = F::State;
    fn apply(&self, state: &mut F::State, t: u32, v: &mut [Complex64]) -> Result<()> {
        self.0.apply(state, t, v)
    }
}

/// Phase estimation on a diagonal unitary with eigenphases `phases` and the
/// given initial register state.
pub fn run_diagonal(b: u32, phases: &[f64], initial: &[Complex64]) -> Result<(OutcomeDistribution, Vec<f64>)> {
    let map: Vec<usize> = (0..phases.len()).collect();
    let mut state = QpeState::from_register(b, phases.len(), &map, initial)?;
    let norms = simulate(&mut state, &map, || (), &DiagonalPowers(phases))?;
    Ok((state.distribution(), norms))
}

pub fn run_qpe(cfg: &QpeConfig) -> Result<QpeOutcome> {
    let h = cfg.hamiltonian()?;
    let initial: Vec<f64> = sine_state(&cfg.grid);
    run_qpe_with(cfg, &h, &initial)
}

/// Runs phase estimation for `h` from an arbitrary real grid state.
pub fn run_qpe_with(cfg: &QpeConfig, h: &DiscretizedHamiltonian, initial: &[f64]) -> Result<QpeOutcome> {
    cfg.validate()?;
    if h.grid() != &cfg.grid {
        return Err(Error::InvalidParameter("Hamiltonian grid differs from the config grid".into()));
    }
    let k = cfg.resolve_k()?;
    let map = cfg.grid.register_map();
    let psi: Vec<Complex64> = initial.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let mut state = QpeState::from_register(cfg.b, cfg.grid.register_len(), &map, &psi)?;
    let budget = error_budget(cfg.b)?;

    let (norms, powers, counts) = match cfg.mode {
        PropagatorMode::Exact => {
            let exact = ExactPropagator::new(h)?;
            let norms = simulate(&mut state, &map, || (), &ExactPowers(&exact))?;
            let powers = (0..cfg.b)
                .map(|t| PowerRecord { t, eps_t: budget.epsilons[t as usize], steps: 0, measured_error: Some(0.0) })
                .collect();
            (norms, powers, Vec::new())
        }
        PropagatorMode::Splitting => {
            let (powers, schedules) = plan_powers(cfg, h, k, &budget.epsilons)?;
            let split = SplitPropagator::new(h);
            let compiled: Vec<CompiledSchedule> = schedules.iter().map(|s| split.compile(s)).collect();
            let counts = schedules.iter().zip(0..).map(|(s, t)| CostReport::power_count(t, s)).collect::<Vec<PowerCount>>();
            let norms = simulate(&mut state, &map, || split.clone(), &SplitPowers { schedules: &compiled })?;
            (norms, powers, counts)
        }
    };
    for (stage, n) in norms.iter().enumerate() {
        if (n - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::Domain(format!("state norm {n} at stage {stage} drifted beyond {NORM_TOLERANCE}")));
        }
    }
    let cost = CostReport::new(&cfg.grid, cfg.b, k, h.norm_h1(), h.norm_h2().max(f64::MIN_POSITIVE), counts);
    Ok(QpeOutcome { distribution: state.distribution(), cost, powers, stage_norms: norms })
}

fn plan_powers(
    cfg: &QpeConfig,
    h: &DiscretizedHamiltonian,
    k: u32,
    eps: &[f64],
) -> Result<(Vec<PowerRecord>, Vec<crate::splitting::SplittingSchedule>)> {
    let plan: Vec<(usize, Option<f64>)> = match cfg.steps {
        StepPolicy::Fixed(n) => vec![(n, None); cfg.b as usize],
        StepPolicy::Analytic => (0..cfg.b)
            .map(|t| {
                // V = 0 has ||H2|| = 0, where a single step is already exact.
                if h.norm_h2() == 0.0 {
                    return Ok((1, None));
                }
                min_steps_for_error(k, t, eps[t as usize], h.norm_h1(), h.norm_h2()).map(|(n, _)| (n, None))
            })
            .collect::<Result<_>>()?,
        StepPolicy::Empirical => {
            let exact = ExactPropagator::new(h)?;
            let split = SplitPropagator::new(h);
            (0..cfg.b)
                .into_par_iter()
                .map(|t| {
                    let mut local = split.clone();
                    let r = min_steps_empirical(&mut local, &exact, k, (t as f64).exp2(), eps[t as usize])?;
                    Ok((r.steps, Some(r.measured_error)))
                })
                .collect::<Result<_>>()?
        }
    };
    let mut powers = Vec::with_capacity(plan.len());
    let mut schedules = Vec::with_capacity(plan.len());
    for (t, (steps, measured_error)) in (0..cfg.b).zip(plan) {
        schedules.push(suzuki_schedule(k, (t as f64).exp2(), steps)?);
        powers.push(PowerRecord { t, eps_t: eps[t as usize], steps, measured_error });
    }
    Ok((powers, schedules))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyEstimate {
    pub j: usize,
    /// `4 pi d j 2^-b`.
    pub energy: f64,
    pub success_probability: Option<f64>,
    pub reference: Option<f64>,
}

/// MAP estimate; with a reference `E_h1` also reports the success mass.
pub fn estimate_energy(dist: &OutcomeDistribution, d: usize, reference: Option<f64>) -> EnergyEstimate {
    let j = dist.map_outcome();
    let energy = 4.0 * PI * d as f64 * j as f64 * (-(dist.b as f64)).exp2();
    let success_probability = reference.map(|e| dist.success_mass(e / (4.0 * PI * d as f64)));
    EnergyEstimate { j, energy, success_probability, reference }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuccessReport {
    pub success_mass: f64,
    pub threshold: f64,
    pub pass: bool,
}

pub fn success_report(dist: &OutcomeDistribution, reference: f64, cfg: &QpeConfig) -> SuccessReport {
    let d = cfg.grid.d() as f64;
    let success_mass = dist.success_mass(reference / (4.0 * PI * d));
    let threshold = match cfg.mode {
        PropagatorMode::Exact => exact_mode_threshold(),
        PropagatorMode::Splitting => SPLITTING_MODE_THRESHOLD,
    };
    SuccessReport { success_mass, threshold, pass: success_mass >= threshold }
}
