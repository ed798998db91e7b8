//! Unital qubit noise on Bloch vectors and noisy see-saw sweeps.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bloch::{BlochVector, Mat3};
use crate::classical::{classical_optimum, ClassicalError, Success};
use crate::mubs::FunctionSet;
use crate::quantum::{seesaw, seesaw_warm, PMStrategy, QuantumError, SeesawConfig, SeesawReport};

/// Values closer than this are treated as equal when comparing two curves.
pub const CURVE_TOL: f64 = 1e-9;

pub const DEFAULT_GRID_POINTS: usize = 101;
pub const DEFAULT_REFINE_TOL: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChannelError {
    #[error("noise parameter {lambda} outside [0, {max}]")]
    LambdaOutOfRange { lambda: f64, max: f64 },
    #[error("dephasing axis must be a unit vector")]
    AxisNotUnit,
    #[error("grid is empty")]
    EmptyGrid,
    #[error("refinement tolerance must be positive")]
    BadTolerance,
    #[error("no crossing: one curve dominates on the whole grid")]
    NoCrossing,
    #[error(transparent)]
    Quantum(#[from] QuantumError),
    #[error(transparent)]
    Classical(#[from] ClassicalError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelKind {
    Depolarizing,
    Dephasing,
}

impl ChannelKind {
    pub fn max_lambda(self) -> f64 {
        match self {
            ChannelKind::Depolarizing => 1.0,
            ChannelKind::Dephasing => 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochMap {
    kind: ChannelKind,
    lambda: f64,
    axis: Option<BlochVector>,
}

fn check_lambda(kind: ChannelKind, lambda: f64) -> Result<(), ChannelError> {
    let max = kind.max_lambda();
    if !(0.0..=max).contains(&lambda) {
        return Err(ChannelError::LambdaOutOfRange { lambda, max });
    }
    Ok(())
}

impl BlochMap {
    /// `ρ ↦ λ I/2 + (1-λ) ρ`.
    pub fn depolarizing(lambda: f64) -> Result<Self, ChannelError> {
        check_lambda(ChannelKind::Depolarizing, lambda)?;
        Ok(Self {
            kind: ChannelKind::Depolarizing,
            lambda,
            axis: None,
        })
    }

    /// `ρ ↦ λ (n·σ) ρ (n·σ) + (1-λ) ρ`.
    pub fn dephasing(lambda: f64, axis: BlochVector) -> Result<Self, ChannelError> {
        check_lambda(ChannelKind::Dephasing, lambda)?;
        if !axis.is_unit() {
            return Err(ChannelError::AxisNotUnit);
        }
        Ok(Self {
            kind: ChannelKind::Dephasing,
            lambda,
            axis: Some(axis),
        })
    }

    pub fn kind(&self) -> ChannelKind {
        self.kind
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn axis(&self) -> Option<BlochVector> {
        self.axis
    }

    /// The induced linear map on Bloch vectors.
    pub fn matrix(&self) -> Mat3 {
        match self.axis {
            None => {
                let s = 1.0 - self.lambda;
                Mat3(std::array::from_fn(|i| {
                    std::array::from_fn(|j| if i == j { s } else { 0.0 })
                }))
            }
            Some(n) => {
                // n nᵀ + (1 - 2λ)(I - n nᵀ)
                let s = 1.0 - 2.0 * self.lambda;
                Mat3(std::array::from_fn(|i| {
                    std::array::from_fn(|j| {
                        let p = n.0[i] * n.0[j];
                        let id = if i == j { 1.0 } else { 0.0 };
                        p + s * (id - p)
                    })
                }))
            }
        }
    }

    pub fn apply(&self, r: &BlochVector) -> BlochVector {
        match self.axis {
            None => *r * (1.0 - self.lambda),
            Some(n) => {
                let along = n * r.dot(&n);
                along + (*r - along) * (1.0 - 2.0 * self.lambda)
            }
        }
    }
}

/// `1 - (S_C - 1/2)/(S_Q - 1/2)`, or 0 without a quantum advantage.
pub fn critical_lambda(classical: f64, quantum: f64) -> f64 {
    if quantum <= classical {
        return 0.0;
    }
    1.0 - (classical - 0.5) / (quantum - 0.5)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalNoise {
    pub classical: Success,
    pub quantum: f64,
    pub lambda_crit: f64,
}

/// Depolarizing threshold from the exact classical optimum and an optimized
/// noiseless quantum value.
pub fn critical_depolarizing(
    set: &FunctionSet,
    config: &SeesawConfig,
) -> Result<CriticalNoise, ChannelError> {
    let classical = classical_optimum(set, 1)?.value;
    let quantum = seesaw(set, config, None)?.value;
    Ok(CriticalNoise {
        classical,
        quantum,
        lambda_crit: critical_lambda(classical.value(), quantum),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub classical: Success,
    pub ratio: Vec<f64>,
    pub strategies: Vec<PMStrategy>,
}

impl SweepResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("lambda,one_minus_lambda,quantum_value,classical_value,ratio\n");
        let c = self.classical.value();
        for ((l, q), r) in self.grid.iter().zip(&self.values).zip(&self.ratio) {
            writeln!(out, "{l:.6},{:.6},{q:.12},{c:.12},{r:.12}", 1.0 - l)
                .expect("write to string");
        }
        out
    }
}

/// `points` evenly spaced values on `[0, max]`.
pub fn uniform_grid(max: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..points)
            .map(|i| max * i as f64 / (points - 1) as f64)
            .collect(),
    }
}

fn point_config(config: &SeesawConfig, index: usize, restarts: usize) -> SeesawConfig {
    SeesawConfig {
        restarts,
        seed: config.seed.wrapping_add(index as u64),
        ..*config
    }
}

/// Optimized values along `grid` for the channel family `make`.
///
/// The first point gets `config.restarts` cold starts. Every later point is
/// warm-started from its predecessor with one cold restart, then a backward
/// pass warm-starts each point from its successor and keeps the better run.
pub fn sweep_with(
    set: &FunctionSet,
    grid: &[f64],
    config: &SeesawConfig,
    make: impl Fn(f64) -> Result<BlochMap, ChannelError>,
) -> Result<SweepResult, ChannelError> {
    if grid.is_empty() {
        return Err(ChannelError::EmptyGrid);
    }
    let maps: Vec<BlochMap> = grid.iter().map(|&l| make(l)).collect::<Result<_, _>>()?;
    let classical = classical_optimum(set, 1)?.value;

    let mut reports: Vec<SeesawReport> = Vec::with_capacity(grid.len());
    for (i, map) in maps.iter().enumerate() {
        let rep = match reports.last() {
            None => seesaw(set, &point_config(config, i, config.restarts), Some(map))?,
            Some(prev) => seesaw_warm(
                set,
                &prev.best_strategy,
                &point_config(config, i, 1),
                Some(map),
            )?,
        };
        reports.push(rep);
    }
    for i in (0..grid.len().saturating_sub(1)).rev() {
        let next = reports[i + 1].best_strategy.clone();
        let cfg = SeesawConfig {
            restarts: 1,
            seed: config.seed.wrapping_add((grid.len() + i) as u64),
            ..*config
        };
        let rep = seesaw_warm(set, &next, &cfg, Some(&maps[i]))?;
        if rep.value > reports[i].value {
            reports[i] = rep;
        }
    }

    let values: Vec<f64> = reports.iter().map(|r| r.value).collect();
    let ratio = values.iter().map(|v| v / classical.value()).collect();
    Ok(SweepResult {
        grid: grid.to_vec(),
        values,
        classical,
        ratio,
        strategies: reports.into_iter().map(|r| r.best_strategy).collect(),
    })
}

pub fn dephasing_sweep(
    set: &FunctionSet,
    axis: BlochVector,
    grid: &[f64],
    config: &SeesawConfig,
) -> Result<SweepResult, ChannelError> {
    sweep_with(set, grid, config, |l| BlochMap::dephasing(l, axis))
}

pub fn depolarizing_sweep(
    set: &FunctionSet,
    grid: &[f64],
    config: &SeesawConfig,
) -> Result<SweepResult, ChannelError> {
    sweep_with(set, grid, config, BlochMap::depolarizing)
}

/// An interval of `1 - λ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub low: f64,
    pub high: f64,
    pub tol: f64,
}

/// Longest run of consecutive `true` entries as `(first, last)` indices.
fn longest_run(mask: &[bool]) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    let mut start = None;
    for (i, &m) in mask.iter().chain(std::iter::once(&false)).enumerate() {
        match (m, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                if best.is_none_or(|(a, b)| i - s > b - a + 1) {
                    best = Some((s, i - 1));
                }
                start = None;
            }
            _ => {}
        }
    }
    best
}

/// Maximal interval of `1 - λ` on which `set_a` beats `set_b` under dephasing.
///
/// Grid endpoints of the interval are refined by bisection on `λ` until the
/// bracket is narrower than `refine_tol`; an interval that reaches the end of
/// the grid keeps the grid value there.
pub fn crossing_window(
    set_a: &FunctionSet,
    set_b: &FunctionSet,
    axis: BlochVector,
    grid: &[f64],
    refine_tol: f64,
    config: &SeesawConfig,
) -> Result<Window, ChannelError> {
    if refine_tol.is_nan() || refine_tol <= 0.0 {
        return Err(ChannelError::BadTolerance);
    }
    let a = dephasing_sweep(set_a, axis, grid, config)?;
    let b = dephasing_sweep(set_b, axis, grid, config)?;
    let wins: Vec<bool> = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(va, vb)| va - vb > CURVE_TOL)
        .collect();
    if wins.iter().all(|&w| w) {
        return Err(ChannelError::NoCrossing);
    }
    let (first, last) = longest_run(&wins).ok_or(ChannelError::NoCrossing)?;

    let gap = |lambda: f64, hint: usize| -> Result<f64, ChannelError> {
        let map = BlochMap::dephasing(lambda, axis)?;
        let cfg = point_config(config, 2 * grid.len() + hint, config.restarts);
        let va = seesaw_warm(set_a, &a.strategies[hint], &cfg, Some(&map))?.value;
        let vb = seesaw_warm(set_b, &b.strategies[hint], &cfg, Some(&map))?.value;
        Ok(va - vb)
    };
    // Bisect between a losing λ and a winning λ; returns the winning side.
    let refine = |mut lose: f64, mut win: f64, hint: usize| -> Result<f64, ChannelError> {
        while (win - lose).abs() > refine_tol {
            let mid = 0.5 * (lose + win);
            if gap(mid, hint)? > CURVE_TOL {
                win = mid;
            } else {
                lose = mid;
            }
        }
        Ok(0.5 * (lose + win))
    };

    let lambda_lo = if first == 0 {
        grid[0]
    } else {
        refine(grid[first - 1], grid[first], first)?
    };
    let lambda_hi = if last + 1 == grid.len() {
        grid[last]
    } else {
        refine(grid[last + 1], grid[last], last)?
    };
    let (low, high) = {
        let (x, y) = (1.0 - lambda_lo, 1.0 - lambda_hi);
        (x.min(y), x.max(y))
    };
    Ok(Window {
        low,
        high,
        tol: refine_tol,
    })
}
