//! Shared entanglement plus one classical bit.
//!
//! Alice measures her half of `ρ_AB` with `{M^x_ω}` and sends `ω`; Bob measures
//! `{M^{ω,y}_z}` on his half and answers `z`. Operators act on
//! `C^{d_A} ⊗ C^{d_B}` with Alice's slot first.

pub mod linalg;

use std::collections::BTreeMap;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classical::ClassicalStrategy;
use crate::mubs::{input_bitstring, parse_input, FunctionSet, MubsError, ParityLabel};
use linalg::{
    identity, is_hermitian, kron, min_eigenvalue, nonnegative_projector, pure, random_effect,
    random_projector, random_state, top_eigenvector, trace_product, CMatrix,
};

/// Tolerance for Hermiticity, positivity, trace and completeness checks.
pub const OPERATOR_TOL: f64 = 1e-10;

pub const MAX_LOCAL_DIM: usize = 4;

const MONOTONE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EaccError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid effect: {0}")]
    InvalidEffect(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("local dimension {0} outside 2..={MAX_LOCAL_DIM}")]
    DimensionOutOfRange(usize),
    #[error("no measurement for {0}")]
    MissingMeasurement(String),
    #[error("restarts must be >= 1 and tol > 0")]
    BadConfig,
    #[error("bell value {bell} differs from protocol value {eacc}")]
    BellMismatch { bell: f64, eacc: f64 },
    #[error(transparent)]
    Mubs(#[from] MubsError),
}

/// A binary measurement `{E_0, E_1}`.
pub type Effects = [CMatrix; 2];

#[derive(Debug, Clone, PartialEq)]
pub struct EACCStrategy {
    n: u8,
    dim_a: usize,
    dim_b: usize,
    state: CMatrix,
    /// Indexed by input `x`.
    alice: Vec<Effects>,
    /// Keyed by question label, then indexed by message `ω`.
    bob: BTreeMap<ParityLabel, [Effects; 2]>,
}

fn complement(e: &CMatrix) -> CMatrix {
    identity(e.nrows()) - e
}

fn pair(e0: CMatrix) -> Effects {
    let e1 = complement(&e0);
    [e0, e1]
}

impl EACCStrategy {
    pub fn new(
        n: u8,
        (dim_a, dim_b): (usize, usize),
        state: CMatrix,
        alice: Vec<Effects>,
        bob: BTreeMap<ParityLabel, [Effects; 2]>,
    ) -> Result<Self, EaccError> {
        let mismatch = |what: String| Err(EaccError::DimensionMismatch(what));
        if state.nrows() != dim_a * dim_b || !state.is_square() {
            return mismatch(format!("state is {}x{}", state.nrows(), state.ncols()));
        }
        if alice.len() != 1usize << n {
            return mismatch(format!("{} Alice measurements for width {n}", alice.len()));
        }
        if alice.iter().flatten().any(|e| e.shape() != (dim_a, dim_a)) {
            return mismatch("Alice effect shape".into());
        }
        if let Some(l) = bob.keys().find(|l| l.width() != n) {
            return mismatch(format!("label {l} for width {n}"));
        }
        if bob
            .values()
            .flatten()
            .flatten()
            .any(|e| e.shape() != (dim_b, dim_b))
        {
            return mismatch("Bob effect shape".into());
        }
        Ok(Self {
            n,
            dim_a,
            dim_b,
            state,
            alice,
            bob,
        })
    }

    pub fn width(&self) -> u8 {
        self.n
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.dim_a, self.dim_b)
    }

    pub fn state(&self) -> &CMatrix {
        &self.state
    }

    pub fn alice(&self, x: u32) -> &Effects {
        &self.alice[x as usize]
    }

    pub fn bob(&self, label: &ParityLabel, omega: bool) -> Option<&Effects> {
        self.bob.get(label).map(|m| &m[omega as usize])
    }

    fn bob_for(&self, set: &FunctionSet) -> Result<Vec<&[Effects; 2]>, EaccError> {
        if set.width() != self.n {
            return Err(EaccError::DimensionMismatch(format!(
                "strategy width {} vs set width {}",
                self.n,
                set.width()
            )));
        }
        set.iter()
            .map(|l| {
                self.bob
                    .get(l)
                    .ok_or_else(|| EaccError::MissingMeasurement(l.to_string()))
            })
            .collect()
    }

    /// Checks the state and every effect pair used by `set`.
    pub fn validate(&self, set: &FunctionSet) -> Result<(), EaccError> {
        let rho = &self.state;
        if !is_hermitian(rho, OPERATOR_TOL) {
            return Err(EaccError::InvalidState("not Hermitian".into()));
        }
        if (rho.trace().re - 1.0).abs() > OPERATOR_TOL {
            return Err(EaccError::InvalidState(format!("trace {}", rho.trace().re)));
        }
        if min_eigenvalue(rho) < -OPERATOR_TOL {
            return Err(EaccError::InvalidState("not positive semidefinite".into()));
        }
        for (x, m) in self.alice.iter().enumerate() {
            check_effects(m, || {
                format!("Alice, input {}", input_bitstring(self.n, x as u32))
            })?;
        }
        for (l, per_omega) in set.iter().zip(self.bob_for(set)?) {
            for (omega, m) in per_omega.iter().enumerate() {
                check_effects(m, || format!("Bob, question {l}, message {omega}"))?;
            }
        }
        Ok(())
    }
}

fn check_effects(m: &Effects, whom: impl Fn() -> String) -> Result<(), EaccError> {
    for e in m {
        if !is_hermitian(e, OPERATOR_TOL) {
            return Err(EaccError::InvalidEffect(format!(
                "{}: not Hermitian",
                whom()
            )));
        }
        if min_eigenvalue(e) < -OPERATOR_TOL {
            return Err(EaccError::InvalidEffect(format!(
                "{}: not positive",
                whom()
            )));
        }
    }
    let sum = &m[0] + &m[1];
    if linalg::max_abs_diff(&sum, &identity(sum.nrows())) > OPERATOR_TOL {
        return Err(EaccError::InvalidEffect(format!(
            "{}: effects do not sum to I",
            whom()
        )));
    }
    Ok(())
}

type Rows = Vec<Vec<Complex64>>;

fn to_rows(m: &CMatrix) -> Rows {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn from_rows(rows: &Rows) -> Result<CMatrix, String> {
    let d = rows.len();
    if rows.iter().any(|r| r.len() != d) {
        return Err("operator is not square".into());
    }
    Ok(CMatrix::from_fn(d, d, |i, j| rows[i][j]))
}

#[derive(Serialize, Deserialize)]
struct StrategyWire {
    dim_a: usize,
    dim_b: usize,
    state: Rows,
    alice: BTreeMap<String, [Rows; 2]>,
    /// Keyed `label:ω`.
    bob: BTreeMap<String, [Rows; 2]>,
}

impl Serialize for EACCStrategy {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let effects = |m: &Effects| [to_rows(&m[0]), to_rows(&m[1])];
        StrategyWire {
            dim_a: self.dim_a,
            dim_b: self.dim_b,
            state: to_rows(&self.state),
            alice: self
                .alice
                .iter()
                .enumerate()
                .map(|(x, m)| (input_bitstring(self.n, x as u32), effects(m)))
                .collect(),
            bob: self
                .bob
                .iter()
                .flat_map(|(l, per)| {
                    per.iter()
                        .enumerate()
                        .map(move |(w, m)| (format!("{l}:{w}"), effects(m)))
                })
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for EACCStrategy {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let wire = StrategyWire::deserialize(deserializer)?;
        let effects = |m: &[Rows; 2]| -> Result<Effects, D::Error> {
            Ok([
                from_rows(&m[0]).map_err(D::Error::custom)?,
                from_rows(&m[1]).map_err(D::Error::custom)?,
            ])
        };
        let n = wire
            .alice
            .keys()
            .next()
            .map(|k| k.len())
            .ok_or_else(|| D::Error::custom("no Alice measurements"))?;
        let n = u8::try_from(n)
            .ok()
            .filter(|n| (1..=crate::mubs::MAX_WIDTH).contains(n))
            .ok_or_else(|| D::Error::custom(format!("input width {n} out of range")))?;
        let mut alice: Vec<Option<Effects>> = vec![None; 1usize << n];
        for (key, m) in &wire.alice {
            let x = parse_input(n, key).map_err(D::Error::custom)?;
            alice[x as usize] = Some(effects(m)?);
        }
        let alice = alice
            .into_iter()
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| D::Error::custom("Alice measurements are not total"))?;
        let mut partial: BTreeMap<ParityLabel, [Option<Effects>; 2]> = BTreeMap::new();
        for (key, m) in &wire.bob {
            let (l, w) = key
                .split_once(':')
                .ok_or_else(|| D::Error::custom(format!("bad Bob key {key:?}")))?;
            let l: ParityLabel = l.parse().map_err(D::Error::custom)?;
            let w = match w {
                "0" => 0,
                "1" => 1,
                _ => return Err(D::Error::custom(format!("bad message in {key:?}"))),
            };
            partial.entry(l).or_default()[w] = Some(effects(m)?);
        }
        let bob = partial
            .into_iter()
            .map(|(l, [a, b])| match (a, b) {
                (Some(a), Some(b)) => Ok((l, [a, b])),
                _ => Err(D::Error::custom(format!(
                    "Bob measurements for {l} are not total"
                ))),
            })
            .collect::<Result<_, _>>()?;
        let state = from_rows(&wire.state).map_err(D::Error::custom)?;
        EACCStrategy::new(n, (wire.dim_a, wire.dim_b), state, alice, bob).map_err(D::Error::custom)
    }
}

/// `Σ_y M^{ω,y}_{f_y(x)}` for every `(x, ω)`, indexed `[x][ω]`.
fn bob_winning(set: &FunctionSet, bob: &[&[Effects; 2]]) -> Vec<[CMatrix; 2]> {
    let d = bob[0][0][0].nrows();
    (0..set.inputs())
        .map(|x| {
            std::array::from_fn(|w| {
                set.iter()
                    .zip(bob)
                    .fold(CMatrix::zeros(d, d), |acc, (l, m)| {
                        acc + &m[w][l.eval(x) as usize]
                    })
            })
        })
        .collect()
}

/// Average success `(1/(2^n k)) Σ Tr(ρ M^x_ω ⊗ M^{ω,y}_{f_y(x)})`.
pub fn evaluate_eacc(strategy: &EACCStrategy, set: &FunctionSet) -> Result<f64, EaccError> {
    strategy.validate(set)?;
    raw_value(strategy, set)
}

fn raw_value(strategy: &EACCStrategy, set: &FunctionSet) -> Result<f64, EaccError> {
    let bob = strategy.bob_for(set)?;
    let q = bob_winning(set, &bob);
    let mut total = 0.0;
    for (x, qx) in q.iter().enumerate() {
        for (a, b) in strategy.alice[x].iter().zip(qx) {
            total += trace_product(&strategy.state, &kron(a, b));
        }
    }
    Ok(total / (set.inputs() as f64 * set.len() as f64))
}

/// `p(u, v | x, y_0, y) = Tr(ρ M^x_u ⊗ M^{y_0,y}_v)`.
pub fn correlation(
    strategy: &EACCStrategy,
    x: u32,
    y0: bool,
    label: &ParityLabel,
    u: bool,
    v: bool,
) -> Result<f64, EaccError> {
    let b = strategy
        .bob(label, y0)
        .ok_or_else(|| EaccError::MissingMeasurement(label.to_string()))?;
    let op = kron(&strategy.alice(x)[u as usize], &b[v as usize]);
    Ok(trace_product(&strategy.state, &op))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BellValueReport {
    pub bell_value: f64,
    pub eacc_value: f64,
}

/// Reads the protocol as a Bell experiment: Alice outputs `u = ω`, Bob gets a
/// uniform extra input `y_0` in place of the message and outputs `v = z`.
///
/// The Bell functional is `(1/(2^n k)) Σ_{x,y_0,y} p(u = y_0, v = f_y(x) | x, y_0, y)`.
pub fn eacc_to_bell(
    strategy: &EACCStrategy,
    set: &FunctionSet,
) -> Result<BellValueReport, EaccError> {
    let eacc_value = evaluate_eacc(strategy, set)?;
    let mut sum = 0.0;
    for x in 0..set.inputs() {
        for y0 in [false, true] {
            for l in set.iter() {
                sum += correlation(strategy, x, y0, l, y0, l.eval(x))?;
            }
        }
    }
    let bell_value = sum / (set.inputs() as f64 * set.len() as f64);
    if (bell_value - eacc_value).abs() > OPERATOR_TOL {
        return Err(EaccError::BellMismatch {
            bell: bell_value,
            eacc: eacc_value,
        });
    }
    Ok(BellValueReport {
        bell_value,
        eacc_value,
    })
}

/// A deterministic classical strategy run on `|00⟩` with trivial effects.
pub fn embed_classical(
    strategy: &ClassicalStrategy,
    set: &FunctionSet,
) -> Result<EACCStrategy, EaccError> {
    let n = strategy.encoding.width();
    let one = identity(2);
    let zero = CMatrix::zeros(2, 2);
    let sharp = |b: bool| -> Effects {
        if b {
            [zero.clone(), one.clone()]
        } else {
            [one.clone(), zero.clone()]
        }
    };
    let alice = (0..1u32 << n).map(|x| sharp(strategy.encode(x))).collect();
    let bob = set
        .iter()
        .map(|l| {
            let missing = || EaccError::MissingMeasurement(l.to_string());
            let z0 = strategy.decode(l, false).ok_or_else(missing)?;
            let z1 = strategy.decode(l, true).ok_or_else(missing)?;
            Ok((*l, [sharp(z0), sharp(z1)]))
        })
        .collect::<Result<_, EaccError>>()?;
    let mut state = CMatrix::zeros(4, 4);
    state[(0, 0)] = Complex64::new(1.0, 0.0);
    EACCStrategy::new(n, (2, 2), state, alice, bob)
}

/// Random mixed state with random (generally non-projective) effects.
pub fn random_strategy<R: Rng + ?Sized>(
    rng: &mut R,
    set: &FunctionSet,
    dim_a: usize,
    dim_b: usize,
) -> EACCStrategy {
    let state = random_state(rng, dim_a * dim_b);
    let alice = (0..set.inputs())
        .map(|_| pair(random_effect(rng, dim_a)))
        .collect();
    let bob = set
        .iter()
        .map(|l| {
            let w0 = pair(random_effect(rng, dim_b));
            let w1 = pair(random_effect(rng, dim_b));
            (*l, [w0, w1])
        })
        .collect();
    EACCStrategy::new(set.width(), (dim_a, dim_b), state, alice, bob).expect("consistent shapes")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EaccConfig {
    pub local_dim: usize,
    pub restarts: usize,
    pub max_iters: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for EaccConfig {
    fn default() -> Self {
        Self {
            local_dim: 2,
            restarts: 64,
            max_iters: 10_000,
            tol: 1e-10,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EaccReport {
    pub value: f64,
    pub iterations: usize,
    pub restarts_used: usize,
    pub converged: bool,
    /// Whether every step of every run was nondecreasing.
    pub monotone: bool,
    /// Largest deviation of `E_0 + E_1` from the identity seen after any step.
    pub completeness_error: f64,
    pub local_dim: usize,
    pub seed: u64,
    pub strategy: EACCStrategy,
}

struct Problem<'a> {
    set: &'a FunctionSet,
    d: usize,
    norm: f64,
}

/// See-saw iterate: Alice's `E_0` per input, Bob's `E_0` per `[y][ω]`.
struct Iterate {
    psi: DVector<Complex64>,
    alice: Vec<CMatrix>,
    bob: Vec<[CMatrix; 2]>,
}

impl Problem<'_> {
    fn effects_alice(&self, it: &Iterate) -> Vec<Effects> {
        it.alice.iter().map(|a| pair(a.clone())).collect()
    }

    fn effects_bob(&self, it: &Iterate) -> Vec<[Effects; 2]> {
        it.bob
            .iter()
            .map(|[b0, b1]| [pair(b0.clone()), pair(b1.clone())])
            .collect()
    }

    /// `Σ_{x,ω} M^x_ω ⊗ Σ_y M^{ω,y}_{f_y(x)}`.
    fn operator(&self, it: &Iterate) -> CMatrix {
        let alice = self.effects_alice(it);
        let bob = self.effects_bob(it);
        let refs: Vec<&[Effects; 2]> = bob.iter().collect();
        let q = bob_winning(self.set, &refs);
        let dd = self.d * self.d;
        let mut w = CMatrix::zeros(dd, dd);
        for (a, qx) in alice.iter().zip(&q) {
            for o in 0..2 {
                w += kron(&a[o], &qx[o]);
            }
        }
        w
    }

    fn value(&self, it: &Iterate) -> f64 {
        let w = self.operator(it);
        (it.psi.adjoint() * w * &it.psi)[(0, 0)].re / self.norm
    }

    /// `ψ` reshaped with Alice's index on rows.
    fn coefficients(&self, psi: &DVector<Complex64>) -> CMatrix {
        CMatrix::from_fn(self.d, self.d, |a, b| psi[a * self.d + b])
    }

    fn state_step(&self, it: &mut Iterate) {
        it.psi = top_eigenvector(&self.operator(it)).0;
    }

    fn alice_step(&self, it: &mut Iterate) {
        let c = self.coefficients(&it.psi);
        let c_adj = c.adjoint();
        let bob = self.effects_bob(it);
        let refs: Vec<&[Effects; 2]> = bob.iter().collect();
        let q = bob_winning(self.set, &refs);
        for (a, qx) in it.alice.iter_mut().zip(&q) {
            // ⟨ψ|A ⊗ Q|ψ⟩ = Tr(A · C Qᵀ C†)
            let k0 = &c * qx[0].transpose() * &c_adj;
            let k1 = &c * qx[1].transpose() * &c_adj;
            *a = nonnegative_projector(&(k0 - k1));
        }
    }

    fn bob_step(&self, it: &mut Iterate) {
        let c = self.coefficients(&it.psi);
        let c_t = c.transpose();
        let c_bar = c.conjugate();
        let alice = self.effects_alice(it);
        let d = self.d;
        for (l, per) in self.set.iter().zip(it.bob.iter_mut()) {
            for (w, b) in per.iter_mut().enumerate() {
                let mut s = [CMatrix::zeros(d, d), CMatrix::zeros(d, d)];
                for (x, a) in alice.iter().enumerate() {
                    s[l.eval(x as u32) as usize] += &a[w];
                }
                // ⟨ψ|A ⊗ B|ψ⟩ = Tr(B · Cᵀ Aᵀ C̄)
                let l0 = &c_t * s[0].transpose() * &c_bar;
                let l1 = &c_t * s[1].transpose() * &c_bar;
                *b = nonnegative_projector(&(l0 - l1));
            }
        }
    }

    fn start(&self, seed: u64, index: usize) -> Iterate {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index as u64);
        let d = self.d;
        let rank = |rng: &mut ChaCha8Rng| {
            if d.is_multiple_of(2) {
                d / 2
            } else {
                rng.random_range(1..d)
            }
        };
        let alice = (0..self.set.inputs())
            .map(|_| {
                let r = rank(&mut rng);
                random_projector(&mut rng, d, r)
            })
            .collect();
        let bob = (0..self.set.len())
            .map(|_| {
                std::array::from_fn(|_| {
                    let r = rank(&mut rng);
                    random_projector(&mut rng, d, r)
                })
            })
            .collect();
        let mut psi = DVector::zeros(d * d);
        psi[0] = Complex64::new(1.0, 0.0);
        Iterate { psi, alice, bob }
    }

    fn completeness_error(&self, it: &Iterate) -> f64 {
        let alice = self.effects_alice(it);
        let bob = self.effects_bob(it);
        alice
            .iter()
            .chain(bob.iter().flatten())
            .map(|m| linalg::max_abs_diff(&(&m[0] + &m[1]), &identity(self.d)))
            .fold(0.0, f64::max)
    }

    fn strategy(&self, it: &Iterate) -> EACCStrategy {
        let bob = self.set.iter().copied().zip(self.effects_bob(it)).collect();
        EACCStrategy::new(
            self.set.width(),
            (self.d, self.d),
            pure(&it.psi),
            self.effects_alice(it),
            bob,
        )
        .expect("consistent shapes")
    }
}

struct Run {
    value: f64,
    iterations: usize,
    converged: bool,
    monotone: bool,
    completeness_error: f64,
    it: Iterate,
}

fn run(problem: &Problem, mut it: Iterate, config: &EaccConfig) -> Run {
    let mut value = f64::NEG_INFINITY;
    let mut monotone = true;
    let mut completeness_error: f64 = 0.0;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < config.max_iters {
        iterations += 1;
        let start = value;
        problem.state_step(&mut it);
        let v1 = problem.value(&it);
        problem.alice_step(&mut it);
        let v2 = problem.value(&it);
        problem.bob_step(&mut it);
        value = problem.value(&it);
        completeness_error = completeness_error.max(problem.completeness_error(&it));
        if v1 < start - MONOTONE_SLACK || v2 < v1 - MONOTONE_SLACK || value < v2 - MONOTONE_SLACK {
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
        completeness_error,
        it,
    }
}

/// Best see-saw value over `config.restarts` random projective starts.
pub fn eacc_seesaw(set: &FunctionSet, config: &EaccConfig) -> Result<EaccReport, EaccError> {
    if !(2..=MAX_LOCAL_DIM).contains(&config.local_dim) {
        return Err(EaccError::DimensionOutOfRange(config.local_dim));
    }
    if config.restarts == 0 || config.tol.is_nan() || config.tol <= 0.0 {
        return Err(EaccError::BadConfig);
    }
    let problem = Problem {
        set,
        d: config.local_dim,
        norm: set.inputs() as f64 * set.len() as f64,
    };
    let runs: Vec<Run> = (0..config.restarts)
        .into_par_iter()
        .map(|i| run(&problem, problem.start(config.seed, i), config))
        .collect();
    let monotone = runs.iter().all(|r| r.monotone);
    let completeness_error = runs
        .iter()
        .map(|r| r.completeness_error)
        .fold(0.0, f64::max);
    let restarts_used = runs.len();
    let best = runs
        .into_iter()
        .reduce(|a, b| if b.value > a.value { b } else { a })
        .expect("at least one run");
    Ok(EaccReport {
        value: best.value,
        iterations: best.iterations,
        restarts_used,
        converged: best.converged,
        monotone,
        completeness_error,
        local_dim: config.local_dim,
        seed: config.seed,
        strategy: problem.strategy(&best.it),
    })
}
