//! Qubit prepare-and-measure strategies in Bloch-vector form.
//!
//! A preparation `r_x` is the state `(I + r_x·σ)/2`; a measurement `v_y`
//! answers `z = 0` on the `+1` outcome of `v_y·σ`. The win probability for
//! `(x, y)` is `(1 + g_y(x) r_x·v_y)/2` with `g_y(x) = (-1)^{f_y(x)}`.

mod appendix;
mod seesaw;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use appendix::{appendix_fixture, AppendixCase};
pub use seesaw::{seesaw, seesaw_step, seesaw_warm, SeesawConfig, SeesawReport};

use crate::bloch::BlochVector;
use crate::channels::BlochMap;
use crate::mubs::{input_bitstring, parse_input, FunctionSet, MubsError, ParityLabel};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuantumError {
    #[error("strategy width {strategy} does not match set width {set}")]
    WidthMismatch { strategy: u8, set: u8 },
    #[error("no measurement for label {0}")]
    MissingMeasurement(String),
    #[error("{0} is not a unit vector")]
    NotUnit(String),
    #[error("preparations must cover 2^n inputs, got {0}")]
    BadPreparationCount(usize),
    #[error("unknown protocol case {0:?}")]
    UnknownCase(String),
    #[error("restarts must be >= 1 and tol > 0")]
    BadConfig,
    #[error(transparent)]
    Mubs(#[from] MubsError),
}

/// Preparations indexed by input `x`, measurements keyed by question label.
#[derive(Debug, Clone, PartialEq)]
pub struct PMStrategy {
    n: u8,
    preparations: Vec<BlochVector>,
    measurements: BTreeMap<ParityLabel, BlochVector>,
}

impl PMStrategy {
    pub fn new(
        n: u8,
        preparations: Vec<BlochVector>,
        measurements: BTreeMap<ParityLabel, BlochVector>,
    ) -> Result<Self, QuantumError> {
        if preparations.len() != 1usize << n {
            return Err(QuantumError::BadPreparationCount(preparations.len()));
        }
        if let Some(l) = measurements.keys().find(|l| l.width() != n) {
            return Err(QuantumError::WidthMismatch {
                strategy: n,
                set: l.width(),
            });
        }
        Ok(Self {
            n,
            preparations,
            measurements,
        })
    }

    pub fn width(&self) -> u8 {
        self.n
    }

    pub fn preparations(&self) -> &[BlochVector] {
        &self.preparations
    }

    pub fn preparation(&self, x: u32) -> BlochVector {
        self.preparations[x as usize]
    }

    pub fn measurements(&self) -> &BTreeMap<ParityLabel, BlochVector> {
        &self.measurements
    }

    pub fn measurement(&self, label: &ParityLabel) -> Option<BlochVector> {
        self.measurements.get(label).copied()
    }

    /// Measurement vectors in the set's canonical order.
    pub fn measurements_for(&self, set: &FunctionSet) -> Result<Vec<BlochVector>, QuantumError> {
        if self.n != set.width() {
            return Err(QuantumError::WidthMismatch {
                strategy: self.n,
                set: set.width(),
            });
        }
        set.iter()
            .map(|l| {
                self.measurement(l)
                    .ok_or_else(|| QuantumError::MissingMeasurement(l.to_string()))
            })
            .collect()
    }

    /// Applies `f` to every preparation and measurement.
    pub fn map_vectors(&self, f: impl Fn(&BlochVector) -> BlochVector) -> Self {
        Self {
            n: self.n,
            preparations: self.preparations.iter().map(&f).collect(),
            measurements: self.measurements.iter().map(|(l, v)| (*l, f(v))).collect(),
        }
    }

    /// Applies `f` to the preparations only.
    pub fn map_preparations(&self, f: impl Fn(&BlochVector) -> BlochVector) -> Self {
        Self {
            n: self.n,
            preparations: self.preparations.iter().map(f).collect(),
            measurements: self.measurements.clone(),
        }
    }

    /// Totality over the set and unit norm of every vector.
    pub fn validate(&self, set: &FunctionSet) -> Result<(), QuantumError> {
        let meas = self.measurements_for(set)?;
        for (x, r) in self.preparations.iter().enumerate() {
            if !r.is_unit() {
                return Err(QuantumError::NotUnit(format!(
                    "preparation {}",
                    input_bitstring(self.n, x as u32)
                )));
            }
        }
        for (l, v) in set.iter().zip(&meas) {
            if !v.is_unit() {
                return Err(QuantumError::NotUnit(format!("measurement {l}")));
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct PMStrategyWire {
    preparations: BTreeMap<String, [f64; 3]>,
    measurements: BTreeMap<String, [f64; 3]>,
}

impl Serialize for PMStrategy {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        PMStrategyWire {
            preparations: self
                .preparations
                .iter()
                .enumerate()
                .map(|(x, r)| (input_bitstring(self.n, x as u32), r.0))
                .collect(),
            measurements: self
                .measurements
                .iter()
                .map(|(l, v)| (l.to_string(), v.0))
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PMStrategy {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let wire = PMStrategyWire::deserialize(deserializer)?;
        let n = wire
            .preparations
            .keys()
            .next()
            .map(|k| k.len())
            .ok_or_else(|| D::Error::custom("no preparations"))?;
        let n = u8::try_from(n)
            .ok()
            .filter(|n| (1..=crate::mubs::MAX_WIDTH).contains(n))
            .ok_or_else(|| D::Error::custom(format!("input width {n} out of range")))?;
        let mut preparations = vec![None; 1usize << n];
        for (key, r) in &wire.preparations {
            let x = parse_input(n, key).map_err(D::Error::custom)?;
            preparations[x as usize] = Some(BlochVector(*r));
        }
        let preparations = preparations
            .into_iter()
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| D::Error::custom("preparations are not total"))?;
        let measurements = wire
            .measurements
            .iter()
            .map(|(k, v)| {
                Ok((
                    k.parse::<ParityLabel>().map_err(D::Error::custom)?,
                    BlochVector(*v),
                ))
            })
            .collect::<Result<_, D::Error>>()?;
        PMStrategy::new(n, preparations, measurements).map_err(D::Error::custom)
    }
}

/// Average success of a qubit strategy with no channel.
pub fn evaluate_pm(strategy: &PMStrategy, set: &FunctionSet) -> Result<f64, QuantumError> {
    evaluate_pm_with(strategy, set, None)
}

/// Average success when each prepared state passes through `channel` first.
///
/// Vectors are not required to be unit length here, so shrunk or mixed
/// preparations evaluate with the same formula.
pub fn evaluate_pm_with(
    strategy: &PMStrategy,
    set: &FunctionSet,
    channel: Option<&BlochMap>,
) -> Result<f64, QuantumError> {
    let meas = strategy.measurements_for(set)?;
    let mut phi = 0.0;
    for x in 0..set.inputs() {
        let r = strategy.preparation(x);
        let r = channel.map_or(r, |c| c.apply(&r));
        for (label, v) in set.iter().zip(&meas) {
            phi += label.sign(x) * r.dot(v);
        }
    }
    Ok(0.5 * (1.0 + phi / (set.inputs() as f64 * set.len() as f64)))
}

/// `(1 + 1/√k)/2`, the largest qubit success for `k` mutually unbiased questions.
pub fn theorem2_bound(k: usize) -> f64 {
    assert!(k >= 1, "cardinality must be positive");
    0.5 * (1.0 + 1.0 / (k as f64).sqrt())
}

/// `Σ_x ‖Σ_y g_y(x) v_y‖²`, which equals `2^n |R_i|` for unit `v_y`.
pub fn norm_cancellation_check(
    set: &FunctionSet,
    measurements: &BTreeMap<ParityLabel, BlochVector>,
) -> Result<f64, QuantumError> {
    let v: Vec<BlochVector> = set
        .iter()
        .map(|l| {
            measurements
                .get(l)
                .copied()
                .ok_or_else(|| QuantumError::MissingMeasurement(l.to_string()))
        })
        .collect::<Result<_, _>>()?;
    Ok((0..set.inputs())
        .map(|x| {
            let s = set
                .iter()
                .zip(&v)
                .fold(BlochVector::ZERO, |acc, (l, v)| acc + *v * l.sign(x));
            s.dot(&s)
        })
        .sum())
}

/// Antipodal embedding of a deterministic classical strategy.
///
/// `r_x = ±e_z` by the encoded bit and `v_y = ±e_z` when the decoding is
/// `z = ω ⊕ c`. A constant decoding wins on exactly half the inputs of a
/// balanced question, which `v_y = e_x` (orthogonal to every `r_x`) reproduces.
pub fn embed_classical(
    strategy: &crate::classical::ClassicalStrategy,
    set: &FunctionSet,
) -> Result<PMStrategy, QuantumError> {
    let n = strategy.encoding.width();
    let up = BlochVector::new(0.0, 0.0, 1.0);
    let side = BlochVector::new(1.0, 0.0, 0.0);
    let preparations = (0..1u32 << n)
        .map(|x| if strategy.encode(x) { -up } else { up })
        .collect();
    let measurements = set
        .iter()
        .map(|l| {
            let missing = || QuantumError::MissingMeasurement(l.to_string());
            let z0 = strategy.decode(l, false).ok_or_else(missing)?;
            let z1 = strategy.decode(l, true).ok_or_else(missing)?;
            let v = match (z0, z1) {
                (false, true) => up,
                (true, false) => -up,
                _ => side,
            };
            Ok((*l, v))
        })
        .collect::<Result<_, QuantumError>>()?;
    PMStrategy::new(n, preparations, measurements)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mubs::full_mubs;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn set(s: &str) -> FunctionSet {
        s.parse().unwrap()
    }

    fn uniform(set: &FunctionSet, r: BlochVector, v: BlochVector) -> PMStrategy {
        PMStrategy::new(
            set.width(),
            vec![r; set.inputs() as usize],
            set.iter().map(|l| (*l, v)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn aligned_constant_strategy_is_a_coin_flip() {
        let s = set("011");
        let z = BlochVector::new(0.0, 0.0, 1.0);
        assert!((evaluate_pm(&uniform(&s, z, z), &s).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn bound_values() {
        assert_eq!(theorem2_bound(1), 1.0);
        assert!((theorem2_bound(5) - 0.723_606_797_749_979).abs() < 1e-12);
        assert!((theorem2_bound(4) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn norm_cancellation_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let full = full_mubs(3).unwrap();
        let v = full
            .iter()
            .map(|l| (*l, BlochVector::random_unit(&mut rng)))
            .collect();
        assert!((norm_cancellation_check(&full, &v).unwrap() - 56.0).abs() < 1e-9);

        let pair = set("10,01");
        let v = [
            ("10", BlochVector::new(1.0, 0.0, 0.0)),
            ("01", BlochVector::new(0.0, 1.0, 0.0)),
        ]
        .iter()
        .map(|(l, v)| (l.parse().unwrap(), *v))
        .collect();
        assert!((norm_cancellation_check(&pair, &v).unwrap() - 8.0).abs() < 1e-12);

        let five = set("100,010,001,110,101");
        let same = BlochVector::new(0.0, 0.6, 0.8);
        let v = five.iter().map(|l| (*l, same)).collect();
        assert!((norm_cancellation_check(&five, &v).unwrap() - 40.0).abs() < 1e-12);
    }

    #[test]
    fn missing_measurement_is_reported() {
        let s = set("100,010");
        let z = BlochVector::new(0.0, 0.0, 1.0);
        let strat = uniform(&set("100"), z, z);
        assert_eq!(
            evaluate_pm(&strat, &s),
            Err(QuantumError::MissingMeasurement("010".into()))
        );
        assert!(matches!(
            evaluate_pm(&strat, &set("10")),
            Err(QuantumError::WidthMismatch { .. })
        ));
    }

    #[test]
    fn validate_rejects_short_vectors() {
        let s = set("100");
        let z = BlochVector::new(0.0, 0.0, 1.0);
        let strat = uniform(&s, z * 0.5, z);
        assert!(matches!(strat.validate(&s), Err(QuantumError::NotUnit(_))));
        assert!(uniform(&s, z, z).validate(&s).is_ok());
    }

    #[test]
    fn classical_embedding_matches_exact_value() {
        let full = full_mubs(3).unwrap();
        let strat = crate::classical::and_not_strategy();
        let pm = embed_classical(&strat, &full).unwrap();
        assert!((evaluate_pm(&pm, &full).unwrap() - 37.0 / 56.0).abs() < 1e-15);
    }

    #[test]
    fn json_layout() {
        let s = set("10");
        let z = BlochVector::new(0.0, 0.0, 1.0);
        let strat = uniform(&s, z, z);
        let json = serde_json::to_string(&strat).unwrap();
        assert_eq!(
            json,
            r#"{"preparations":{"00":[0.0,0.0,1.0],"01":[0.0,0.0,1.0],"10":[0.0,0.0,1.0],"11":[0.0,0.0,1.0]},"measurements":{"10":[0.0,0.0,1.0]}}"#
        );
        let back: PMStrategy = serde_json::from_str(&json).unwrap();
        assert_eq!(back, strat);
        let partial = r#"{"preparations":{"00":[0,0,1]},"measurements":{}}"#;
        assert!(serde_json::from_str::<PMStrategy>(partial).is_err());
    }
}
