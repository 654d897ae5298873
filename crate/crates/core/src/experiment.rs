//! Config-driven experiments: single runs, parameter sweeps and fixture
//! generation. Configs are TOML with a `schema` version field; reports are
//! JSON and carry the SHA-256 of the canonical config text.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs::{self, OpenOptions};
use std::io::Write as _;
use std::path::{Path, PathBuf};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cost::{empirical_vs_analytic, CostReport, ScalingRow, SlackReport, CSV_HEADER};
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::hamiltonian::QueryConfig;
use crate::potential::PotentialSpec;
use crate::qpe::{
    estimate_energy, run_qpe, success_report, EnergyEstimate, KPolicy, PowerRecord, PropagatorMode, QpeConfig,
    StepPolicy, SuccessReport,
};
use crate::spectral::{ground_overlap, ground_state, SpectralMethod};

pub const CONFIG_SCHEMA: u32 = 1;
pub const REPORT_SCHEMA: u32 = 1;
pub const FIXTURE_SCHEMA: u32 = 1;

pub const SUMMARY_HEADER: &str =
    "config_hash,d,q,b,mode,k,potential,j,energy_estimate,reference_energy,success_mass,threshold,pass,queries,exponentials,analytic_n,qubits";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub d: usize,
    pub q: u32,
    pub potential: PotentialSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmConfig {
    /// Clock bits; defaults to `q`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<u32>,
    pub mode: PropagatorMode,
    #[serde(default = "default_k")]
    pub k: KPolicy,
    #[serde(default = "default_steps")]
    pub steps: StepPolicy,
    /// Potential query width; defaults to `q + 4`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub query_bits: Option<u32>,
}

fn default_k() -> KPolicy {
    KPolicy::Auto
}

fn default_steps() -> StepPolicy {
    StepPolicy::Empirical
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_top_k")]
    pub top_k: usize,
    /// Demonstration shots sampled from the exact distribution.
    #[serde(default)]
    pub samples: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { top_k: default_top_k(), samples: 0 }
    }
}

fn default_top_k() -> usize {
    8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// `(d, q, b)` triples.
    pub points: Vec<(usize, u32, u32)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: u32,
    #[serde(default)]
    pub seed: u64,
    pub problem: ProblemConfig,
    pub algorithm: AlgorithmConfig,
    #[serde(default)]
    pub outputs: OutputConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.check_schema()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// SHA-256 of the canonical TOML serialization.
    pub fn hash(&self) -> Result<String> {
        Ok(hex::encode(Sha256::digest(self.to_toml()?.as_bytes())))
    }

    fn check_schema(&self) -> Result<()> {
        if self.schema != CONFIG_SCHEMA {
            return Err(Error::Config(format!("unsupported schema {} (expected {CONFIG_SCHEMA})", self.schema)));
        }
        Ok(())
    }

    pub fn qpe_config(&self) -> Result<QpeConfig> {
        self.check_schema()?;
        let grid = GridSpec::new(self.problem.d, self.problem.q)?;
        let query = match self.algorithm.query_bits {
            Some(bits) => QueryConfig { bits },
            None => QueryConfig::for_grid(&grid),
        };
        let cfg = QpeConfig {
            b: self.algorithm.b.unwrap_or(grid.q()),
            grid,
            potential: self.problem.potential.clone(),
            query,
            mode: self.algorithm.mode,
            k: self.algorithm.k,
            steps: self.algorithm.steps,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Copy for one sweep point.
    pub fn at_point(&self, d: usize, q: u32, b: u32) -> Self {
        let mut cfg = self.clone();
        cfg.problem.d = d;
        cfg.problem.q = q;
        cfg.algorithm.b = Some(b);
        cfg.algorithm.query_bits = None;
        cfg.sweep = None;
        cfg
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleComparison {
    pub energy: f64,
    pub phase: f64,
    pub method: SpectralMethod,
    pub residual: f64,
    pub d1_squared: f64,
    pub estimate_error: f64,
    /// `4 pi d 2^-b`.
    pub radius: f64,
    pub within_radius: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema: u32,
    pub config_hash: String,
    pub config: ExperimentConfig,
    pub estimate: EnergyEstimate,
    pub top_outcomes: Vec<(usize, f64)>,
    pub distribution_total: f64,
    pub oracle: OracleComparison,
    pub success: SuccessReport,
    pub cost: CostReport,
    pub slack: SlackReport,
    pub powers: Vec<PowerRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub samples: Vec<usize>,
    pub pass: bool,
}

impl ExperimentReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn summary_row(&self) -> String {
        let c = &self.config;
        let mode = match c.algorithm.mode {
            PropagatorMode::Exact => "exact",
            PropagatorMode::Splitting => "splitting",
        };
        format!(
            "{},{},{},{},{},{},\"{}\",{},{},{},{},{},{},{},{},{:e},{}",
            self.config_hash,
            c.problem.d,
            c.problem.q,
            c.algorithm.b.unwrap_or(c.problem.q),
            mode,
            self.cost.k_used,
            c.problem.potential.name(),
            self.estimate.j,
            self.estimate.energy,
            self.oracle.energy,
            self.success.success_mass,
            self.success.threshold,
            self.pass,
            self.cost.queries,
            self.cost.empirical_n,
            self.cost.analytic_n,
            self.cost.qubits
        )
    }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let qpe = cfg.qpe_config()?;
    let h = qpe.hamiltonian()?;
    let ground = ground_state(&h)?;
    let out = run_qpe(&qpe)?;
    let d = qpe.grid.d();
    let estimate = estimate_energy(&out.distribution, d, Some(ground.energy));
    let success = success_report(&out.distribution, ground.energy, &qpe);
    let radius = 4.0 * PI * d as f64 * (-(qpe.b as f64)).exp2();
    let estimate_error = (estimate.energy - ground.energy).abs();
    let oracle = OracleComparison {
        energy: ground.energy,
        phase: ground.phase(d),
        method: ground.method,
        residual: ground.residual,
        d1_squared: ground_overlap(&h, &ground),
        estimate_error,
        radius,
        within_radius: estimate_error <= radius,
    };
    let samples = if cfg.outputs.samples > 0 {
        let dist = WeightedIndex::new(&out.distribution.probabilities).map_err(|e| Error::Domain(e.to_string()))?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        (0..cfg.outputs.samples).map(|_| dist.sample(&mut rng)).collect()
    } else {
        Vec::new()
    };
    let slack = empirical_vs_analytic(&out.cost);
    let pass = success.pass && oracle.within_radius && out.cost.query_identity_holds() && slack.within_bound;
    Ok(ExperimentReport {
        schema: REPORT_SCHEMA,
        config_hash: cfg.hash()?,
        config: cfg.clone(),
        estimate,
        top_outcomes: out.distribution.top_k(cfg.outputs.top_k),
        distribution_total: out.distribution.total(),
        oracle,
        success,
        cost: out.cost,
        slack,
        powers: out.powers,
        samples,
        pass,
    })
}

/// Writes `report-<hash prefix>.json` and appends a row to `summary.csv`.
pub fn write_report(dir: &Path, report: &ExperimentReport) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(format!("report-{}.json", &report.config_hash[..16]));
    fs::write(&path, report.to_json()? + "\n")?;
    append_csv(&dir.join("summary.csv"), SUMMARY_HEADER, &report.summary_row())?;
    Ok(path)
}

fn append_csv(path: &Path, header: &str, row: &str) -> Result<()> {
    let fresh = !path.exists();
    let mut f = OpenOptions::new().create(true).append(true).open(path)?;
    if fresh {
        writeln!(f, "{header}")?;
    }
    writeln!(f, "{row}")?;
    Ok(())
}

/// Runs every sweep point (concurrently) and returns one scaling row each,
/// in the order the points were listed.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Vec<(ExperimentReport, ScalingRow)>> {
    let sweep = cfg.sweep.as_ref().ok_or_else(|| Error::Config("config has no [sweep] section".into()))?;
    if sweep.points.is_empty() {
        return Err(Error::Config("sweep has no points".into()));
    }
    sweep
        .points
        .par_iter()
        .map(|&(d, q, b)| {
            let point = cfg.at_point(d, q, b);
            let report = run_experiment(&point)?;
            let splitting = point.algorithm.mode == PropagatorMode::Splitting;
            let row = ScalingRow {
                d,
                epsilon: (-(q as f64)).exp2(),
                b,
                k: report.cost.k_used,
                k_star: report.cost.k_star,
                analytic_n: report.cost.analytic_n,
                nstar_model: crate::cost::nstar_model(d, (-(q as f64)).exp2()),
                empirical_n: splitting.then_some(report.cost.empirical_n),
                queries: splitting.then_some(report.cost.queries),
                qubits: report.cost.qubits,
            };
            Ok((report, row))
        })
        .collect()
}

pub fn sweep_csv(rows: &[ScalingRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(out, "{}", r.csv_line());
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemDescriptor {
    pub d: usize,
    pub q: u32,
    pub potential: PotentialSpec,
    pub query_bits: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleEntry {
    pub problem: ProblemDescriptor,
    pub energy: f64,
    pub d1_squared: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderCurve {
    pub k: u32,
    pub steps: Vec<usize>,
    pub lambda: Vec<f64>,
    pub error: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "suite", rename_all = "snake_case")]
pub enum Fixture {
    Oracle { schema: u32, entries: Vec<OracleEntry> },
    Overlap { schema: u32, entries: Vec<OracleEntry> },
    Order { schema: u32, problem: ProblemDescriptor, total_time: f64, curves: Vec<OrderCurve> },
}

pub const FIXTURE_SUITES: [&str; 3] = ["oracle", "overlap", "order"];

fn oracle_entry(d: usize, q: u32, potential: PotentialSpec) -> Result<OracleEntry> {
    let grid = GridSpec::new(d, q)?;
    let query = QueryConfig::for_grid(&grid);
    let h = crate::hamiltonian::discretize_with(&potential.build(d)?, &grid, query)?;
    let g = ground_state(&h)?;
    Ok(OracleEntry {
        problem: ProblemDescriptor { d, q, potential, query_bits: query.bits },
        energy: g.energy,
        d1_squared: ground_overlap(&h, &g),
    })
}

/// Computes the named fixture suite. Output is a pure function of the name.
pub fn make_fixture(suite: &str) -> Result<Fixture> {
    match suite {
        "oracle" => {
            let problems = vec![
                (1, 3, PotentialSpec::Zero),
                (1, 3, PotentialSpec::Constant { value: 1.0 }),
                (1, 4, PotentialSpec::LinearMean),
                (1, 3, PotentialSpec::LinearMean),
                (2, 2, PotentialSpec::LinearMean),
                (1, 8, PotentialSpec::Zero),
            ];
            let entries = problems.into_iter().map(|(d, q, p)| oracle_entry(d, q, p)).collect::<Result<_>>()?;
            Ok(Fixture::Oracle { schema: FIXTURE_SCHEMA, entries })
        }
        "overlap" => {
            let entries = crate::verify::overlap_suite()
                .into_par_iter()
                .map(|inst| oracle_entry(inst.d, inst.q, inst.potential))
                .collect::<Result<_>>()?;
            Ok(Fixture::Overlap { schema: FIXTURE_SCHEMA, entries })
        }
        "order" => {
            let (problem, total_time, curves) = crate::verify::order_curves()?;
            Ok(Fixture::Order { schema: FIXTURE_SCHEMA, problem, total_time, curves })
        }
        other => Err(Error::Config(format!("unknown fixture suite '{other}' (expected one of {FIXTURE_SUITES:?})"))),
    }
}

/// Writes `<suite>.json` into `dir`.
pub fn write_fixture(dir: &Path, suite: &str) -> Result<PathBuf> {
    let fixture = make_fixture(suite)?;
    fs::create_dir_all(dir)?;
    let path = dir.join(format!("{suite}.json"));
    fs::write(&path, serde_json::to_string_pretty(&fixture)? + "\n")?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    const DEMO: &str = r#"
schema = 1
seed = 11

[problem]
d = 1
q = 3
potential = { family = "zero" }

[algorithm]
b = 8
mode = "exact"
"#;

    #[test]
    fn parses_with_defaults() {
        let cfg = ExperimentConfig::parse(DEMO).unwrap();
        assert_eq!(cfg.algorithm.k, KPolicy::Auto);
        assert_eq!(cfg.algorithm.steps, StepPolicy::Empirical);
        assert_eq!(cfg.outputs.top_k, 8);
        let q = cfg.qpe_config().unwrap();
        assert_eq!((q.b, q.query.bits), (8, 7));
    }

    #[test]
    fn roundtrips_bit_exactly() {
        let mut cfg = ExperimentConfig::parse(DEMO).unwrap();
        cfg.problem.potential = PotentialSpec::SineBump { amplitude: 0.1 + 0.2 };
        cfg.algorithm.k = KPolicy::Fixed(2);
        cfg.algorithm.steps = StepPolicy::Fixed(17);
        cfg.sweep = Some(SweepConfig { points: vec![(1, 3, 3), (2, 2, 4)] });
        let text = cfg.to_toml().unwrap();
        let back = ExperimentConfig::parse(&text).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.to_toml().unwrap(), text);
        assert_eq!(back.hash().unwrap(), cfg.hash().unwrap());
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(matches!(ExperimentConfig::parse("schema = 1\n"), Err(Error::Config(_))));
        assert!(matches!(ExperimentConfig::parse(&DEMO.replace("schema = 1", "schema = 9")), Err(Error::Config(_))));
        assert!(ExperimentConfig::parse(&DEMO.replace("b = 8", "b = 8\nbogus = 1")).is_err());
        let cfg = ExperimentConfig::parse(&DEMO.replace("b = 8", "b = 2")).unwrap();
        assert!(cfg.qpe_config().is_err());
    }

    #[test]
    fn demo_run_passes_and_is_deterministic() {
        let mut cfg = ExperimentConfig::parse(DEMO).unwrap();
        cfg.outputs.samples = 5;
        let a = run_experiment(&cfg).unwrap();
        assert!(a.pass);
        assert!(a.success.success_mass >= 8.0 / (PI * PI));
        assert!(a.oracle.within_radius);
        assert_eq!(a.samples.len(), 5);
        let b = run_experiment(&cfg).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        assert_eq!(a.config_hash, cfg.hash().unwrap());
    }

    #[test]
    fn unknown_fixture_suite() {
        assert!(matches!(make_fixture("nope"), Err(Error::Config(_))));
    }
}
