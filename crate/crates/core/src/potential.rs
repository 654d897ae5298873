//! Admissible potentials: continuous on the unit cube with `0 <= V <= 1` and
//! every first partial derivative bounded by 1 in magnitude.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridSpec;

/// Slack allowed on the sampled derivative bound.
pub const DERIVATIVE_TOLERANCE: f64 = 1e-9;

/// A potential family together with its parameters, as written in configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum PotentialSpec {
    /// `V = 0`.
    Zero,
    /// `V = value`, admissible for `value` in `[0, 1]`.
    Constant { value: f64 },
    /// `V = (1/d) * sum_j x_j`; in one dimension this is `V(x) = x`.
    LinearMean,
    /// `V = scale * prod_j (1/2 + sin(pi x_j)/2)`, admissible for `scale <= 2/pi`.
    SeparableTrig { scale: f64 },
    /// `V = amplitude * prod_j sin(pi x_j)`, admissible for `amplitude <= 1/pi`.
    SineBump { amplitude: f64 },
    /// Seeded sum of `terms` low-frequency cosines, rescaled into the admissible class.
    RandomTrig { seed: u64, terms: usize },
}

impl PotentialSpec {
    pub fn build(&self, d: usize) -> Result<Potential> {
        let kind = match *self {
            PotentialSpec::Zero => Kind::Constant(0.0),
            PotentialSpec::Constant { value } => Kind::Constant(value),
            PotentialSpec::LinearMean => Kind::LinearMean,
            PotentialSpec::SeparableTrig { scale } => {
                if !(0.0..=2.0 / PI).contains(&scale) {
                    return Err(Error::InvalidParameter(format!(
                        "separable_trig scale {scale} outside [0, 2/pi]"
                    )));
                }
                Kind::SeparableTrig(scale)
            }
            PotentialSpec::SineBump { amplitude } => {
                if !(0.0..=1.0 / PI).contains(&amplitude) {
                    return Err(Error::InvalidParameter(format!(
                        "sine_bump amplitude {amplitude} outside [0, 1/pi]"
                    )));
                }
                Kind::SineBump(amplitude)
            }
            PotentialSpec::RandomTrig { seed, terms } => {
                if terms == 0 {
                    return Err(Error::InvalidParameter("random_trig needs terms >= 1".into()));
                }
                Kind::Trig(TrigSeries::random(seed, terms, d))
            }
        };
        Ok(Potential { spec: self.clone(), d, kind })
    }

    pub fn name(&self) -> String {
        match self {
            PotentialSpec::Zero => "zero".into(),
            PotentialSpec::Constant { value } => format!("constant({value})"),
            PotentialSpec::LinearMean => "linear_mean".into(),
            PotentialSpec::SeparableTrig { scale } => format!("separable_trig({scale})"),
            PotentialSpec::SineBump { amplitude } => format!("sine_bump({amplitude})"),
            PotentialSpec::RandomTrig { seed, terms } => format!("random_trig(seed={seed},terms={terms})"),
        }
    }
}

#[derive(Debug, Clone)]
enum Kind {
    Constant(f64),
    LinearMean,
    SeparableTrig(f64),
    SineBump(f64),
    Trig(TrigSeries),
}

/// `offset + sum_i amp_i cos(pi <freq_i, x> + phase_i)`.
#[derive(Debug, Clone)]
struct TrigSeries {
    offset: f64,
    amps: Vec<f64>,
    freqs: Vec<Vec<u32>>,
    phases: Vec<f64>,
}

impl TrigSeries {
    fn random(seed: u64, terms: usize, d: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut amps = Vec::with_capacity(terms);
        let mut freqs = Vec::with_capacity(terms);
        let mut phases = Vec::with_capacity(terms);
        for _ in 0..terms {
            let mut f: Vec<u32> = (0..d).map(|_| rng.random_range(0..=2)).collect();
            if f.iter().all(|&k| k == 0) {
                let axis = rng.random_range(0..d);
                f[axis] = 1;
            }
            freqs.push(f);
            amps.push(rng.random_range(-1.0..1.0));
            phases.push(rng.random_range(0.0..2.0 * PI));
        }
        let abs_sum: f64 = amps.iter().map(|a: &f64| a.abs()).sum();
        let grad_max = (0..d)
            .map(|j| {
                amps.iter()
                    .zip(&freqs)
                    .map(|(a, f)| a.abs() * PI * f[j] as f64)
                    .sum::<f64>()
            })
            .fold(0.0, f64::max);
        let scale = (0.5 / abs_sum).min(1.0 / grad_max);
        for a in &mut amps {
            *a *= scale;
        }
        let spread = abs_sum * scale;
        let offset = spread + rng.random::<f64>() * (1.0 - 2.0 * spread);
        Self { offset, amps, freqs, phases }
    }

    fn eval(&self, x: &[f64]) -> f64 {
        let mut v = self.offset;
        for ((a, f), p) in self.amps.iter().zip(&self.freqs).zip(&self.phases) {
            let arg: f64 = f.iter().zip(x).map(|(&k, &xj)| k as f64 * xj).sum();
            v += a * (PI * arg + p).cos();
        }
        v
    }

    fn grad_bound(&self, d: usize) -> f64 {
        (0..d)
            .map(|j| {
                self.amps
                    .iter()
                    .zip(&self.freqs)
                    .map(|(a, f)| a.abs() * PI * f[j] as f64)
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }
}

/// A potential instantiated for a fixed dimension.
#[derive(Debug, Clone)]
pub struct Potential {
    spec: PotentialSpec,
    d: usize,
    kind: Kind,
}

impl Potential {
    pub fn spec(&self) -> &PotentialSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.d);
        match &self.kind {
            Kind::Constant(c) => *c,
            Kind::LinearMean => x.iter().sum::<f64>() / self.d as f64,
            Kind::SeparableTrig(s) => s * x.iter().map(|&t| 0.5 + 0.5 * (PI * t).sin()).product::<f64>(),
            Kind::SineBump(a) => a * x.iter().map(|&t| (PI * t).sin()).product::<f64>(),
            Kind::Trig(series) => series.eval(x),
        }
    }

    /// Declared `(sup V, max_j sup |dV/dx_j|)`.
    pub fn declared_bounds(&self) -> (f64, f64) {
        match &self.kind {
            Kind::Constant(c) => (*c, 0.0),
            Kind::LinearMean => (1.0, 1.0 / self.d as f64),
            Kind::SeparableTrig(s) => (*s, s * PI / 2.0),
            Kind::SineBump(a) => (*a, a * PI),
            Kind::Trig(series) => {
                let spread: f64 = series.amps.iter().map(|a| a.abs()).sum();
                (series.offset + spread, series.grad_bound(self.d))
            }
        }
    }

    /// Samples `V` on the grid (including the boundary layer) and checks the
    /// range and the finite-difference derivative bound along every axis.
    pub fn check_admissible(&self, grid: &GridSpec) -> Result<()> {
        if grid.d() != self.d {
            return Err(Error::DimensionMismatch { expected: self.d, actual: grid.d() });
        }
        let n = grid.m() + 2;
        let h = grid.h();
        let total = n.checked_pow(self.d as u32).unwrap_or(usize::MAX);
        let stride = (total / 200_000).max(1);
        let mut x = vec![0.0; self.d];
        let mut y = vec![0.0; self.d];
        let mut flat = 0;
        while flat < total {
            let mut rest = flat;
            for slot in x.iter_mut().rev() {
                *slot = (rest % n) as f64 * h;
                rest /= n;
            }
            let v = self.eval(&x);
            if !(0.0..=1.0).contains(&v) || !v.is_finite() {
                return Err(Error::Inadmissible(format!("V({x:?}) = {v} outside [0, 1]")));
            }
            for j in 0..self.d {
                if x[j] + h > 1.0 + 1e-15 {
                    continue;
                }
                y.copy_from_slice(&x);
                y[j] += h;
                let slope = (self.eval(&y) - v).abs() / h;
                if slope > 1.0 + DERIVATIVE_TOLERANCE {
                    return Err(Error::Inadmissible(format!(
                        "|dV/dx_{j}| ~ {slope} > 1 near {x:?}"
                    )));
                }
            }
            flat += stride;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn families_evaluate() {
        let v = PotentialSpec::LinearMean.build(2).unwrap();
        assert_eq!(v.eval(&[0.25, 0.75]), 0.5);
        let v = PotentialSpec::SineBump { amplitude: 0.1 }.build(1).unwrap();
        assert!((v.eval(&[0.5]) - 0.1).abs() < 1e-15);
        let v = PotentialSpec::SeparableTrig { scale: 0.5 }.build(2).unwrap();
        assert!((v.eval(&[0.5, 0.5]) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn parameter_ranges() {
        assert!(PotentialSpec::SineBump { amplitude: 0.4 }.build(1).is_err());
        assert!(PotentialSpec::SeparableTrig { scale: 0.7 }.build(1).is_err());
        assert!(PotentialSpec::RandomTrig { seed: 1, terms: 0 }.build(1).is_err());
    }

    #[test]
    fn random_trig_is_admissible_and_seeded() {
        for d in 1..=3 {
            let g = GridSpec::new(d, 4).unwrap();
            for seed in 0..20 {
                let spec = PotentialSpec::RandomTrig { seed, terms: 4 };
                let v = spec.build(d).unwrap();
                v.check_admissible(&g).unwrap();
                let (sup, grad) = v.declared_bounds();
                assert!(sup <= 1.0 + 1e-12 && grad <= 1.0 + 1e-12);
                let again = spec.build(d).unwrap();
                assert_eq!(v.eval(&[0.3; 3][..d]), again.eval(&[0.3; 3][..d]));
            }
        }
    }

    #[test]
    fn out_of_range_constant_is_rejected() {
        let g = GridSpec::new(1, 3).unwrap();
        let v = PotentialSpec::Constant { value: 1.5 }.build(1).unwrap();
        assert!(matches!(v.check_admissible(&g), Err(Error::Inadmissible(_))));
    }

    #[test]
    fn serde_shape() {
        let spec: PotentialSpec = serde_json::from_str(r#"{"family":"constant","value":0.25}"#).unwrap();
        assert_eq!(spec, PotentialSpec::Constant { value: 0.25 });
        let back = serde_json::to_string(&PotentialSpec::LinearMean).unwrap();
        assert_eq!(back, r#"{"family":"linear_mean"}"#);
    }
}
