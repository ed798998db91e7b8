//! Alternating closed-form maximization over preparations and measurements.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{PMStrategy, QuantumError};
use crate::bloch::{BlochVector, Mat3};
use crate::channels::BlochMap;
use crate::mubs::FunctionSet;

/// Slack allowed when checking that a half-step did not lower the objective.
const MONOTONE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeesawConfig {
    pub restarts: usize,
    pub max_iters: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for SeesawConfig {
    fn default() -> Self {
        Self {
            restarts: 64,
            max_iters: 10_000,
            tol: 1e-10,
            seed: 0,
        }
    }
}

impl SeesawConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    fn check(&self) -> Result<(), QuantumError> {
        if self.restarts == 0 || self.tol.is_nan() || self.tol <= 0.0 {
            return Err(QuantumError::BadConfig);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeesawReport {
    pub value: f64,
    /// Full iterations used by the winning run.
    pub iterations: usize,
    pub restarts_used: usize,
    /// Whether the winning run stopped on `tol` rather than `max_iters`.
    pub converged: bool,
    /// Whether every half-step of every run was nondecreasing.
    pub monotone: bool,
    pub seed: u64,
    pub best_strategy: PMStrategy,
}

struct Problem {
    n: u8,
    k: usize,
    inputs: usize,
    /// `signs[x * k + y] = g_y(x)`.
    signs: Vec<f64>,
    d: Mat3,
    dt: Mat3,
}

impl Problem {
    fn new(set: &FunctionSet, channel: Option<&BlochMap>) -> Self {
        let k = set.len();
        let inputs = set.inputs() as usize;
        let signs = (0..inputs as u32)
            .flat_map(|x| set.iter().map(move |l| l.sign(x)))
            .collect();
        let d = channel.map_or(Mat3::IDENTITY, |c| c.matrix());
        Self {
            n: set.width(),
            k,
            inputs,
            signs,
            d,
            dt: d.transpose(),
        }
    }

    fn g(&self, x: usize, y: usize) -> f64 {
        self.signs[x * self.k + y]
    }

    fn value(&self, r: &[BlochVector], v: &[BlochVector]) -> f64 {
        let mut phi = 0.0;
        for (x, rx) in r.iter().enumerate() {
            let dr = self.d.apply(rx);
            for (y, vy) in v.iter().enumerate() {
                phi += self.g(x, y) * dr.dot(vy);
            }
        }
        0.5 * (1.0 + phi / (self.inputs * self.k) as f64)
    }

    fn update_preparations(&self, r: &mut [BlochVector], v: &[BlochVector]) {
        for (x, rx) in r.iter_mut().enumerate() {
            let vx = v
                .iter()
                .enumerate()
                .fold(BlochVector::ZERO, |acc, (y, vy)| acc + *vy * self.g(x, y));
            if let Some(u) = self.dt.apply(&vx).normalized() {
                *rx = u;
            }
        }
    }

    fn update_measurements(&self, r: &[BlochVector], v: &mut [BlochVector]) {
        let dr: Vec<BlochVector> = r.iter().map(|rx| self.d.apply(rx)).collect();
        for (y, vy) in v.iter_mut().enumerate() {
            let w = dr
                .iter()
                .enumerate()
                .fold(BlochVector::ZERO, |acc, (x, rx)| acc + *rx * self.g(x, y));
            if let Some(u) = w.normalized() {
                *vy = u;
            }
        }
    }

    fn strategy(&self, set: &FunctionSet, r: Vec<BlochVector>, v: &[BlochVector]) -> PMStrategy {
        let measurements = set.iter().copied().zip(v.iter().copied()).collect();
        PMStrategy::new(self.n, r, measurements).expect("consistent shapes")
    }
}

struct Run {
    value: f64,
    iterations: usize,
    converged: bool,
    monotone: bool,
    r: Vec<BlochVector>,
    v: Vec<BlochVector>,
}

fn run(
    problem: &Problem,
    mut r: Vec<BlochVector>,
    mut v: Vec<BlochVector>,
    config: &SeesawConfig,
) -> Run {
    let mut value = problem.value(&r, &v);
    let mut monotone = true;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < config.max_iters {
        iterations += 1;
        let start = value;
        problem.update_preparations(&mut r, &v);
        let half = problem.value(&r, &v);
        problem.update_measurements(&r, &mut v);
        value = problem.value(&r, &v);
        if half < start - MONOTONE_SLACK || value < half - MONOTONE_SLACK {
            monotone = false;
        }
        if value - start < config.tol {
            converged = true;
            break;
        }
    }
    Run {
        value,
        iterations,
        converged,
        monotone,
        r,
        v,
    }
}

fn cold_start(problem: &Problem, seed: u64, index: usize) -> (Vec<BlochVector>, Vec<BlochVector>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let r = (0..problem.inputs)
        .map(|_| BlochVector::random_unit(&mut rng))
        .collect();
    let v = (0..problem.k)
        .map(|_| BlochVector::random_unit(&mut rng))
        .collect();
    (r, v)
}

fn best_of(
    set: &FunctionSet,
    problem: &Problem,
    config: &SeesawConfig,
    warm: Option<(Vec<BlochVector>, Vec<BlochVector>)>,
) -> SeesawReport {
    let mut runs: Vec<Run> = (0..config.restarts)
        .into_par_iter()
        .map(|i| {
            let (r, v) = cold_start(problem, config.seed, i);
            run(problem, r, v, config)
        })
        .collect();
    if let Some((r, v)) = warm {
        runs.insert(0, run(problem, r, v, config));
    }
    let monotone = runs.iter().all(|r| r.monotone);
    let restarts_used = runs.len();
    // First run wins ties so the choice does not depend on scheduling.
    let best = runs
        .into_iter()
        .reduce(|a, b| if b.value > a.value { b } else { a })
        .expect("at least one run");
    let strategy = problem.strategy(set, best.r, &best.v);
    SeesawReport {
        value: best.value,
        iterations: best.iterations,
        restarts_used,
        converged: best.converged,
        monotone,
        seed: config.seed,
        best_strategy: strategy,
    }
}

/// Best see-saw value over `config.restarts` random starts.
///
/// With a channel, the objective scores the channel output `D r_x` against
/// `v_y`; the preparations themselves stay on the unit sphere.
pub fn seesaw(
    set: &FunctionSet,
    config: &SeesawConfig,
    channel: Option<&BlochMap>,
) -> Result<SeesawReport, QuantumError> {
    config.check()?;
    let problem = Problem::new(set, channel);
    Ok(best_of(set, &problem, config, None))
}

/// Like [`seesaw`], with `start` tried before the random restarts.
pub fn seesaw_warm(
    set: &FunctionSet,
    start: &PMStrategy,
    config: &SeesawConfig,
    channel: Option<&BlochMap>,
) -> Result<SeesawReport, QuantumError> {
    config.check()?;
    let v = start.measurements_for(set)?;
    let problem = Problem::new(set, channel);
    let warm = (start.preparations().to_vec(), v);
    Ok(best_of(set, &problem, config, Some(warm)))
}

/// One full iteration: preparations from the measurements, then
/// measurements from the new preparations.
pub fn seesaw_step(
    set: &FunctionSet,
    strategy: &PMStrategy,
    channel: Option<&BlochMap>,
) -> Result<PMStrategy, QuantumError> {
    let mut v = strategy.measurements_for(set)?;
    let problem = Problem::new(set, channel);
    let mut r = strategy.preparations().to_vec();
    problem.update_preparations(&mut r, &v);
    problem.update_measurements(&r, &mut v);
    Ok(problem.strategy(set, r, &v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{evaluate_pm, theorem2_bound};

    fn set(s: &str) -> FunctionSet {
        s.parse().unwrap()
    }

    #[test]
    fn full_set_reaches_bound() {
        let full = crate::mubs::full_mubs(3).unwrap();
        let rep = seesaw(&full, &SeesawConfig::default(), None).unwrap();
        assert!(
            (rep.value - theorem2_bound(7)).abs() < 1e-6,
            "{}",
            rep.value
        );
        assert!(rep.monotone);
        let direct = evaluate_pm(&rep.best_strategy, &full).unwrap();
        assert!((direct - rep.value).abs() < 1e-12);
    }

    #[test]
    fn singleton_is_perfect() {
        let s = set("101");
        let rep = seesaw(&s, &SeesawConfig::default(), None).unwrap();
        assert!((rep.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn open_quadruple_matches_closed_form() {
        let s = set("100,010,001,110");
        let rep = seesaw(&s, &SeesawConfig::default(), None).unwrap();
        let target = 0.5 * (1.0 + (2f64.sqrt() + 6f64.sqrt()) / 8.0);
        assert!((rep.value - target).abs() < 1e-6, "{}", rep.value);
    }

    #[test]
    fn same_seed_same_result() {
        let s = set("100,010,001,111,011");
        let cfg = SeesawConfig {
            restarts: 8,
            ..SeesawConfig::with_seed(5)
        };
        assert_eq!(
            seesaw(&s, &cfg, None).unwrap(),
            seesaw(&s, &cfg, None).unwrap()
        );
    }

    #[test]
    fn rejects_bad_config() {
        let cfg = SeesawConfig {
            restarts: 0,
            ..SeesawConfig::default()
        };
        assert_eq!(seesaw(&set("10"), &cfg, None), Err(QuantumError::BadConfig));
    }
}
