//! Ground-state energy estimation for `-Δ + V` on the unit cube with
//! Dirichlet boundary conditions, by statevector simulation of phase
//! estimation with a sine-state initial guess and Suzuki product formulas.
//!
//! The crate is organised bottom-up:
//!
//! * [`grid`], [`potential`], [`hamiltonian`]: the finite-difference problem
//!   `M_h = -Δ_h + V_h` and its split into `H1 + H2`.
//! * [`spectral`]: classical reference values (dense and Lanczos ground
//!   states, exact propagators, overlaps).
//! * [`splitting`]: product formulas, the per-power error budget and the
//!   step-count bounds.
//! * [`qpe`]: the phase-estimation simulator and the energy estimator.
//! * [`cost`]: exponential, query and qubit accounting.
//! * [`experiment`] and [`verify`]: config-driven runs, fixtures and the
//!   acceptance checks.

pub mod cost;
pub mod error;
pub mod experiment;
pub mod grid;
pub mod hamiltonian;
pub mod potential;
pub mod qpe;
pub mod sine;
pub mod spectral;
pub mod splitting;
pub mod verify;

pub use cost::{analytic_total, empirical_vs_analytic, nstar_scaling, CostReport, ScalingTable};
pub use error::{Error, Result};
pub use grid::GridSpec;
pub use hamiltonian::{discretize, discretize_with, laplacian_eigenpair, DiscretizedHamiltonian, QueryConfig};
pub use potential::{Potential, PotentialSpec};
pub use qpe::{
    estimate_energy, prepare_initial_state, run_qpe, success_report, EnergyEstimate, KPolicy, OutcomeDistribution,
    PropagatorMode, QpeConfig, QpeOutcome, QpeState, StepPolicy,
};
pub use spectral::{
    exact_propagator_apply, ground_state, overlap_spectrum, perturbation_check, OverlapSpectrum, SpectralResult,
};
pub use splitting::{
    apply_schedule, error_budget, min_steps_for_error, optimal_k, suzuki_schedule, ErrorBudget, SplittingSchedule,
};
