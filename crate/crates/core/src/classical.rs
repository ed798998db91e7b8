//! Exact classical one-bit strategies.
//!
//! Deterministic strategies suffice for average success, so the optimum is
//! found by scanning every encoding `f_E: {0,1}^n -> {0,1}` and pairing it
//! with its majority-vote decoding, counting wins as integers.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use itertools::Itertools;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mubs::{parity_function, table_mask, BooleanFn, FunctionSet, MubsError, ParityLabel};

/// Largest width for which [`classical_optimum`] enumerates all encodings.
pub const MAX_OPTIMUM_WIDTH: u8 = 4;

/// Default number of optimal strategies returned by [`classical_optimum`].
pub const DEFAULT_STRATEGY_CAP: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassicalError {
    #[error("strategy width {strategy} does not match set width {set}")]
    WidthMismatch { strategy: u8, set: u8 },
    #[error("exhaustive search supports n <= {MAX_OPTIMUM_WIDTH}, got {0}")]
    WidthOutOfRange(u8),
    #[error("decoding has no entry for label {0}")]
    MissingDecoding(String),
    #[error("RAC over {rac} bits cannot serve a set of {set} questions")]
    CardinalityMismatch { rac: usize, set: usize },
    #[error("{0:?} is not a permutation of 0..{1}")]
    InvalidPermutation(Vec<usize>, usize),
    #[error(transparent)]
    Mubs(#[from] MubsError),
}

/// Average success as an unreduced fraction `wins / total`.
///
/// For a GRAC evaluation `total = 2^n · |R_i|`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Success {
    wins: u64,
    total: u64,
}

impl Success {
    pub fn new(wins: u64, total: u64) -> Self {
        assert!(total > 0, "success total must be positive");
        assert!(wins <= total, "wins exceed total");
        Self { wins, total }
    }

    pub fn wins(&self) -> u64 {
        self.wins
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn value(&self) -> f64 {
        self.wins as f64 / self.total as f64
    }

    pub fn reduced(&self) -> Ratio<u64> {
        Ratio::new(self.wins, self.total)
    }

    /// Exact comparison with `num / den`.
    pub fn equals(&self, num: u64, den: u64) -> bool {
        self.wins as u128 * den as u128 == num as u128 * self.total as u128
    }
}

impl PartialEq for Success {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Success {}

impl PartialOrd for Success {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Success {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.wins as u128 * other.total as u128).cmp(&(other.wins as u128 * self.total as u128))
    }
}

impl fmt::Display for Success {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.wins, self.total)
    }
}

/// Deterministic encoding `ω = f_E(x)` and decoding `z = f_D(y, ω)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassicalStrategy {
    pub encoding: BooleanFn,
    /// `decoding[y] = [z for ω = 0, z for ω = 1]`.
    pub decoding: BTreeMap<ParityLabel, [bool; 2]>,
}

impl ClassicalStrategy {
    pub fn new(encoding: BooleanFn, decoding: BTreeMap<ParityLabel, [bool; 2]>) -> Self {
        Self { encoding, decoding }
    }

    /// `z = ω` for every question.
    pub fn identity(encoding: BooleanFn, set: &FunctionSet) -> Self {
        let decoding = set.iter().map(|&l| (l, [false, true])).collect();
        Self { encoding, decoding }
    }

    /// Switches question `label` to inverse identity decoding `z = ω ⊕ 1`.
    pub fn with_inverse(mut self, label: ParityLabel) -> Self {
        self.decoding.insert(label, [true, false]);
        self
    }

    pub fn encode(&self, x: u32) -> bool {
        self.encoding.eval(x)
    }

    pub fn decode(&self, label: &ParityLabel, omega: bool) -> Option<bool> {
        self.decoding.get(label).map(|z| z[omega as usize])
    }

    fn check(&self, set: &FunctionSet) -> Result<(), ClassicalError> {
        if self.encoding.width() != set.width() {
            return Err(ClassicalError::WidthMismatch {
                strategy: self.encoding.width(),
                set: set.width(),
            });
        }
        match set.iter().find(|l| !self.decoding.contains_key(l)) {
            Some(l) => Err(ClassicalError::MissingDecoding(l.to_string())),
            None => Ok(()),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct StrategyWire {
    encoding: String,
    decoding: BTreeMap<String, u8>,
}

impl Serialize for ClassicalStrategy {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let decoding = self
            .decoding
            .iter()
            .flat_map(|(l, z)| (0..2).map(move |w| (format!("{l}:{w}"), z[w] as u8)))
            .collect();
        StrategyWire {
            encoding: self.encoding.to_bitstring(),
            decoding,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ClassicalStrategy {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let wire = StrategyWire::deserialize(deserializer)?;
        let encoding = BooleanFn::from_bitstring(&wire.encoding).map_err(D::Error::custom)?;
        let mut partial: BTreeMap<ParityLabel, [Option<bool>; 2]> = BTreeMap::new();
        for (key, z) in wire.decoding {
            let (label, omega) = key
                .split_once(':')
                .ok_or_else(|| D::Error::custom(format!("bad decoding key {key:?}")))?;
            let label: ParityLabel = label.parse().map_err(D::Error::custom)?;
            let omega: usize = match omega {
                "0" => 0,
                "1" => 1,
                _ => return Err(D::Error::custom(format!("bad message in {key:?}"))),
            };
            if z > 1 {
                return Err(D::Error::custom(format!("decoded bit {z} in {key:?}")));
            }
            partial.entry(label).or_default()[omega] = Some(z == 1);
        }
        let decoding = partial
            .into_iter()
            .map(|(l, z)| match z {
                [Some(a), Some(b)] => Ok((l, [a, b])),
                _ => Err(D::Error::custom(format!("decoding for {l} is not total"))),
            })
            .collect::<Result<_, _>>()?;
        Ok(Self { encoding, decoding })
    }
}

/// Wins for each question in the set, out of `2^n`.
pub fn per_question_wins(
    strategy: &ClassicalStrategy,
    set: &FunctionSet,
) -> Result<Vec<(ParityLabel, u64)>, ClassicalError> {
    strategy.check(set)?;
    let mask = table_mask(set.width());
    let enc = strategy.encoding.table();
    Ok(set
        .iter()
        .map(|label| {
            let f = parity_function(*label).table();
            let z = strategy.decoding[label];
            let wins: u32 = [false, true]
                .iter()
                .map(|&omega| {
                    let fiber = if omega { enc } else { !enc & mask };
                    let target = if z[omega as usize] { f } else { !f & mask };
                    (fiber & target).count_ones()
                })
                .sum();
            (*label, wins as u64)
        })
        .collect())
}

pub fn evaluate_classical(
    strategy: &ClassicalStrategy,
    set: &FunctionSet,
) -> Result<Success, ClassicalError> {
    let wins = per_question_wins(strategy, set)?
        .iter()
        .map(|(_, w)| w)
        .sum();
    Ok(Success::new(wins, set.inputs() as u64 * set.len() as u64))
}

/// Majority-vote decoding for a fixed encoding; ties and empty fibers decode to 0.
pub fn best_decoding(
    encoding: &BooleanFn,
    set: &FunctionSet,
) -> Result<(BTreeMap<ParityLabel, [bool; 2]>, Success), ClassicalError> {
    if encoding.width() != set.width() {
        return Err(ClassicalError::WidthMismatch {
            strategy: encoding.width(),
            set: set.width(),
        });
    }
    let mut decoding = BTreeMap::new();
    let wins = decode_tables(encoding.table(), set, |label, z| {
        decoding.insert(label, z);
    });
    Ok((
        decoding,
        Success::new(wins, set.inputs() as u64 * set.len() as u64),
    ))
}

fn decode_tables(enc: u64, set: &FunctionSet, mut emit: impl FnMut(ParityLabel, [bool; 2])) -> u64 {
    let mask = table_mask(set.width());
    let fibers = [!enc & mask, enc];
    let mut wins = 0u64;
    for label in set.iter() {
        let f = parity_function(*label).table();
        let mut z = [false; 2];
        for (omega, fiber) in fibers.iter().enumerate() {
            let ones = (fiber & f).count_ones();
            let zeros = fiber.count_ones() - ones;
            z[omega] = ones > zeros;
            wins += ones.max(zeros) as u64;
        }
        emit(*label, z);
    }
    wins
}

fn best_wins(enc: u64, masks: &[u64], mask: u64) -> u64 {
    let fibers = [!enc & mask, enc];
    masks
        .iter()
        .map(|f| {
            fibers
                .iter()
                .map(|fiber| {
                    let ones = (fiber & f).count_ones();
                    ones.max(fiber.count_ones() - ones) as u64
                })
                .sum::<u64>()
        })
        .sum()
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassicalOptimum {
    pub set: FunctionSet,
    pub value: Success,
    /// Number of encodings attaining the optimum (with majority decoding).
    pub optimal_encodings: u64,
    /// Up to the requested cap, in ascending order of encoding table.
    pub strategies: Vec<ClassicalStrategy>,
}

/// Exact optimum over all deterministic strategies for `n <= 4`.
pub fn classical_optimum(
    set: &FunctionSet,
    cap: usize,
) -> Result<ClassicalOptimum, ClassicalError> {
    let n = set.width();
    if n > MAX_OPTIMUM_WIDTH {
        return Err(ClassicalError::WidthOutOfRange(n));
    }
    let mask = table_mask(n);
    let masks: Vec<u64> = set.iter().map(|l| parity_function(*l).table()).collect();
    let mut best = 0u64;
    let mut hits: Vec<u64> = Vec::new();
    let mut count = 0u64;
    for enc in 0..=mask {
        let wins = best_wins(enc, &masks, mask);
        match wins.cmp(&best) {
            Ordering::Greater => {
                best = wins;
                count = 1;
                hits.clear();
                hits.push(enc);
            }
            Ordering::Equal => {
                count += 1;
                if hits.len() < cap {
                    hits.push(enc);
                }
            }
            Ordering::Less => {}
        }
    }
    hits.truncate(cap);
    let strategies = hits
        .into_iter()
        .map(|enc| {
            let encoding = BooleanFn::new(n, enc).expect("enc within mask");
            let (decoding, _) = best_decoding(&encoding, set).expect("widths agree");
            ClassicalStrategy::new(encoding, decoding)
        })
        .collect();
    Ok(ClassicalOptimum {
        set: set.clone(),
        value: Success::new(best, set.inputs() as u64 * set.len() as u64),
        optimal_encodings: count,
        strategies,
    })
}

/// `maj(x_1, ..., x_n)` with ties broken to 0.
pub fn majority(n: u8) -> Result<BooleanFn, MubsError> {
    BooleanFn::from_fn(n, |x| 2 * x.count_ones() > n as u32)
}

/// Majority encoding with identity decoding on the given set.
pub fn majority_identity(set: &FunctionSet) -> Result<ClassicalStrategy, ClassicalError> {
    Ok(ClassicalStrategy::identity(majority(set.width())?, set))
}

/// The strategy `ω = x_1 ∧ ¬(x_2 ∧ x_3)` with `z = ω ⊕ 1` on `x_2`, `x_3`
/// and `x_1 ⊕ x_2 ⊕ x_3`, `z = ω` otherwise, on the full `n = 3` set.
pub fn and_not_strategy() -> ClassicalStrategy {
    let encoding = BooleanFn::from_fn(3, |x| {
        let (x1, x2, x3) = (x & 4 != 0, x & 2 != 0, x & 1 != 0);
        x1 && !(x2 && x3)
    })
    .expect("width 3");
    let full = crate::mubs::full_mubs(3).expect("width 3");
    ["010", "001", "111"]
        .iter()
        .fold(ClassicalStrategy::identity(encoding, &full), |s, l| {
            s.with_inverse(l.parse().expect("valid label"))
        })
}

/// Success of majority encoding with identity decoding for the `(k -> 1)`
/// RAC, counted directly over the `2^k` inputs (valid beyond [`crate::mubs::MAX_WIDTH`]).
pub fn majority_rac_value(k: u32) -> Success {
    assert!((1..=24).contains(&k), "k out of range");
    let wins: u64 = (0u64..1 << k)
        .map(|x| {
            let w = x.count_ones();
            if 2 * w > k {
                w as u64
            } else {
                (k - w) as u64
            }
        })
        .sum();
    Success::new(wins, (1u64 << k) * k as u64)
}

/// Worst per-input success of a `(k -> 1)` RAC strategy, as `correct / k`.
pub fn rac_worst_case(rac: &ClassicalStrategy) -> Result<Success, ClassicalError> {
    let k = rac.encoding.width();
    let set = FunctionSet::rac(k)?;
    rac.check(&set)?;
    let worst = (0..1u32 << k)
        .map(|x| {
            let omega = rac.encode(x);
            set.iter()
                .filter(|l| rac.decode(l, omega) == Some(l.eval(x)))
                .count() as u64
        })
        .min()
        .expect("at least one input");
    Ok(Success::new(worst, k as u64))
}

/// Runs a `(|R_i| -> 1)` RAC on the derived string `(f_r(x))_{r ∈ R_i}`.
///
/// Bit `j` of the RAC input (counting from `x̃_1`) is `f_{labels[perm[j]]}(x)`,
/// and question `labels[perm[j]]` is answered with the RAC decoding of bit `j`.
pub fn lift_rac_strategy(
    rac: &ClassicalStrategy,
    set: &FunctionSet,
    perm: &[usize],
) -> Result<ClassicalStrategy, ClassicalError> {
    let k = set.len();
    let rac_width = rac.encoding.width() as usize;
    if rac_width != k {
        return Err(ClassicalError::CardinalityMismatch {
            rac: rac_width,
            set: k,
        });
    }
    let mut seen = vec![false; k];
    if perm.len() != k
        || perm
            .iter()
            .any(|&p| p >= k || std::mem::replace(&mut seen[p], true))
    {
        return Err(ClassicalError::InvalidPermutation(perm.to_vec(), k));
    }
    let rac_set = FunctionSet::rac(k as u8)?;
    rac.check(&rac_set)?;

    let labels = set.labels();
    let derive = |x: u32| -> u32 {
        perm.iter()
            .fold(0u32, |acc, &p| (acc << 1) | labels[p].eval(x) as u32)
    };
    let encoding = BooleanFn::from_fn(set.width(), |x| rac.encode(derive(x)))?;
    let decoding = perm
        .iter()
        .enumerate()
        .map(|(j, &p)| {
            let unit = rac_set.labels()[k - 1 - j];
            (labels[p], rac.decoding[&unit])
        })
        .collect();
    Ok(ClassicalStrategy::new(encoding, decoding))
}

/// Scans all `|R_i|!` orderings and keeps the first best lift.
pub fn best_rac_lift(
    rac: &ClassicalStrategy,
    set: &FunctionSet,
) -> Result<(Vec<usize>, ClassicalStrategy, Success), ClassicalError> {
    let mut best: Option<(Vec<usize>, ClassicalStrategy, Success)> = None;
    for perm in (0..set.len()).permutations(set.len()) {
        let lifted = lift_rac_strategy(rac, set, &perm)?;
        let value = evaluate_classical(&lifted, set)?;
        if best.as_ref().is_none_or(|(_, _, b)| value > *b) {
            best = Some((perm, lifted, value));
        }
    }
    Ok(best.expect("at least one permutation"))
}
