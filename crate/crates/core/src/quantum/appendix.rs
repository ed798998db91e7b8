//! Closed-form qubit protocols for small parity sets at `n = 3`.

use std::fmt;
use std::str::FromStr;

use super::{PMStrategy, QuantumError};
use crate::bloch::BlochVector;
use crate::mubs::{parse_input, FunctionSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AppendixCase {
    A,
    B1,
    B2,
    C,
    DBox,
    DPlanar,
    E,
}

impl AppendixCase {
    pub const ALL: [AppendixCase; 7] = [
        AppendixCase::A,
        AppendixCase::B1,
        AppendixCase::B2,
        AppendixCase::C,
        AppendixCase::DBox,
        AppendixCase::DPlanar,
        AppendixCase::E,
    ];

    /// The value the protocol is known to attain.
    pub fn expected_value(self) -> f64 {
        let s = |k: f64| 0.5 * (1.0 + 1.0 / k.sqrt());
        match self {
            AppendixCase::A => s(2.0),
            AppendixCase::B1 | AppendixCase::B2 => s(3.0),
            AppendixCase::C => 0.5 * (1.0 + (2f64.sqrt() + 6f64.sqrt()) / 8.0),
            AppendixCase::DBox | AppendixCase::DPlanar => s(5.0),
            AppendixCase::E => s(6.0),
        }
    }
}

impl fmt::Display for AppendixCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AppendixCase::A => "A",
            AppendixCase::B1 => "B1",
            AppendixCase::B2 => "B2",
            AppendixCase::C => "C",
            AppendixCase::DBox => "D_box",
            AppendixCase::DPlanar => "D_planar",
            AppendixCase::E => "E",
        })
    }
}

impl FromStr for AppendixCase {
    type Err = QuantumError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AppendixCase::ALL
            .into_iter()
            .find(|c| c.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| QuantumError::UnknownCase(s.to_string()))
    }
}

fn build(
    labels: &str,
    preps: &[(&str, [f64; 3])],
    meas: &[(&str, [f64; 3])],
) -> (FunctionSet, PMStrategy) {
    let set: FunctionSet = labels.parse().expect("fixture labels");
    let mut preparations = vec![BlochVector::ZERO; 8];
    for (x, r) in preps {
        preparations[parse_input(3, x).expect("fixture input") as usize] = BlochVector(*r);
    }
    let measurements = meas
        .iter()
        .map(|(l, v)| (l.parse().expect("fixture label"), BlochVector(*v)))
        .collect();
    let strategy = PMStrategy::new(3, preparations, measurements).expect("fixture shape");
    (set, strategy)
}

/// Sign of bit `i` (0 = most significant) of a 3-bit input string.
fn sgn(x: &str, i: usize) -> f64 {
    if x.as_bytes()[i] == b'1' {
        -1.0
    } else {
        1.0
    }
}

const INPUTS: [&str; 8] = ["000", "001", "010", "011", "100", "101", "110", "111"];

pub fn appendix_fixture(case: AppendixCase) -> (FunctionSet, PMStrategy) {
    let s2 = 2f64.sqrt();
    let s3 = 3f64.sqrt();
    let s5 = 5f64.sqrt();
    let s6 = 6f64.sqrt();
    let ex = [1.0, 0.0, 0.0];
    let ey = [0.0, 1.0, 0.0];
    let ez = [0.0, 0.0, 1.0];
    match case {
        AppendixCase::A => {
            let preps: Vec<_> = INPUTS
                .iter()
                .map(|x| (*x, [sgn(x, 0) / s2, sgn(x, 1) / s2, 0.0]))
                .collect();
            build("100,010", &preps, &[("100", ex), ("010", ey)])
        }
        AppendixCase::B1 => {
            let preps: Vec<_> = INPUTS
                .iter()
                .map(|x| (*x, [sgn(x, 0) / s3, sgn(x, 1) / s3, sgn(x, 2) / s3]))
                .collect();
            build(
                "100,010,001",
                &preps,
                &[("100", ex), ("010", ey), ("001", ez)],
            )
        }
        AppendixCase::B2 => {
            // Tetrahedron vertices indexed by (x_1, x_2).
            let preps: Vec<_> = INPUTS
                .iter()
                .map(|x| {
                    let (a, b) = (sgn(x, 0), sgn(x, 1));
                    (*x, [a / s3, b / s3, a * b / s3])
                })
                .collect();
            build(
                "100,010,110",
                &preps,
                &[("100", ex), ("010", ey), ("110", ez)],
            )
        }
        AppendixCase::C => {
            let a = (2.0f64 / 3.0).sqrt();
            let preps = [
                ("000", [a, 1.0 / s6, 1.0 / s6]),
                ("001", [a, -1.0 / s6, 1.0 / s6]),
                ("010", [0.0, 1.0 / s2, -1.0 / s2]),
                ("100", [0.0, 1.0 / s2, -1.0 / s2]),
                ("011", [0.0, -1.0 / s2, -1.0 / s2]),
                ("101", [0.0, -1.0 / s2, -1.0 / s2]),
                ("110", [-a, 1.0 / s6, 1.0 / s6]),
                ("111", [-a, -1.0 / s6, 1.0 / s6]),
            ];
            build(
                "100,010,001,110",
                &preps,
                &[("100", ex), ("010", ex), ("001", ey), ("110", ez)],
            )
        }
        AppendixCase::DBox => {
            let v = |a: f64, b: f64, c: f64| [a / s5, b / s5, c / s5];
            let preps = [
                ("000", v(1.0, 0.0, 2.0)),
                ("001", v(1.0, 2.0, 0.0)),
                ("010", v(1.0, -2.0, 0.0)),
                ("011", v(1.0, 0.0, -2.0)),
                ("100", v(-1.0, 2.0, 0.0)),
                ("101", v(-1.0, 0.0, -2.0)),
                ("110", v(-1.0, 0.0, 2.0)),
                ("111", v(-1.0, -2.0, 0.0)),
            ];
            build(
                "100,010,001,110,101",
                &preps,
                &[
                    ("100", ex),
                    ("010", ey),
                    ("001", ez),
                    ("110", ez),
                    ("101", [0.0, -1.0, 0.0]),
                ],
            )
        }
        AppendixCase::DPlanar => {
            let v = |a: f64, b: f64| [a / s5, b / s5, 0.0];
            let preps = [
                ("000", v(1.0, 2.0)),
                ("001", v(1.0, 2.0)),
                ("010", v(1.0, -2.0)),
                ("011", v(1.0, -2.0)),
                ("101", v(-1.0, 2.0)),
                ("111", v(-1.0, 2.0)),
                ("100", v(-1.0, -2.0)),
                ("110", v(-1.0, -2.0)),
            ];
            build(
                "100,010,001,110,101",
                &preps,
                &[
                    ("100", ex),
                    ("010", ey),
                    ("001", [0.0, -1.0, 0.0]),
                    ("110", ey),
                    ("101", ey),
                ],
            )
        }
        AppendixCase::E => {
            let a = (2.0f64 / 3.0).sqrt();
            let v = |p: f64, q: f64, r: f64| [p * a, q / s6, r / s6];
            let preps = [
                ("000", v(1.0, 1.0, 1.0)),
                ("001", v(-1.0, 1.0, -1.0)),
                ("010", v(1.0, -1.0, 1.0)),
                ("011", v(1.0, -1.0, -1.0)),
                ("100", v(-1.0, -1.0, 1.0)),
                ("101", v(-1.0, -1.0, -1.0)),
                ("110", v(-1.0, 1.0, 1.0)),
                ("111", v(1.0, 1.0, -1.0)),
            ];
            build(
                "100,010,001,110,101,011",
                &preps,
                &[
                    ("100", ex),
                    ("001", ez),
                    ("110", ey),
                    ("010", [-1.0, 0.0, 0.0]),
                    ("101", ex),
                    ("011", ex),
                ],
            )
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::evaluate_pm;

    #[test]
    fn fixtures_are_unit_and_hit_their_values() {
        for case in AppendixCase::ALL {
            let (set, strat) = appendix_fixture(case);
            strat.validate(&set).unwrap();
            let v = evaluate_pm(&strat, &set).unwrap();
            assert!((v - case.expected_value()).abs() < 1e-12, "{case}: {v}");
        }
    }

    #[test]
    fn case_names_round_trip() {
        for case in AppendixCase::ALL {
            assert_eq!(case.to_string().parse::<AppendixCase>().unwrap(), case);
        }
        assert!("F".parse::<AppendixCase>().is_err());
    }
}
