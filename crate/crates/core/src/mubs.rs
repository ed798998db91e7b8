//! Boolean functions on `{0,1}^n`, parity labels and mutually unbiased
//! balanced sets of parity functions.
//!
//! Inputs are read as integers with `x_1` in the most significant position,
//! so the truth table bit at position `x` holds `f(x)` and rows enumerate
//! `000, 001, ..., 111` in order. Parity labels use the same convention:
//! the label `"110"` is `r = 0b110` and selects `x_1 ⊕ x_2`.

use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest supported input width; a truth table of width `2^6` fits a `u64`.
pub const MAX_WIDTH: u8 = 6;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MubsError {
    #[error("input widths differ ({left} vs {right})")]
    WidthMismatch { left: u8, right: u8 },
    #[error("function is not balanced")]
    NotBalanced,
    #[error("input width {0} outside 1..={MAX_WIDTH}")]
    WidthOutOfRange(u8),
    #[error("expected {expected} labels, found {found}")]
    WrongCardinality { expected: usize, found: usize },
    #[error("the all-zero label is not a parity question")]
    ZeroLabel,
    #[error("label {r:#b} does not fit in {n} bits")]
    LabelOutOfRange { n: u8, r: u32 },
    #[error("duplicate label {0}")]
    DuplicateLabel(String),
    #[error("function set must not be empty")]
    EmptySet,
    #[error("truth table {table:#x} uses bits beyond 2^{n}")]
    TableOutOfRange { n: u8, table: u64 },
    #[error("cannot parse {0:?}")]
    Parse(String),
}

fn check_width(n: u8) -> Result<(), MubsError> {
    if (1..=MAX_WIDTH).contains(&n) {
        Ok(())
    } else {
        Err(MubsError::WidthOutOfRange(n))
    }
}

/// Mask covering the `2^n` rows of a truth table.
pub(crate) fn table_mask(n: u8) -> u64 {
    let rows = 1u32 << n;
    if rows >= 64 {
        u64::MAX
    } else {
        (1u64 << rows) - 1
    }
}

/// Truth table of a Boolean function `{0,1}^n -> {0,1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BooleanFn {
    n: u8,
    table: u64,
}

impl BooleanFn {
    pub fn new(n: u8, table: u64) -> Result<Self, MubsError> {
        check_width(n)?;
        if table & !table_mask(n) != 0 {
            return Err(MubsError::TableOutOfRange { n, table });
        }
        Ok(Self { n, table })
    }

    /// Tabulates `f` over all `2^n` inputs.
    pub fn from_fn(n: u8, f: impl Fn(u32) -> bool) -> Result<Self, MubsError> {
        check_width(n)?;
        let table = (0..1u32 << n)
            .filter(|&x| f(x))
            .fold(0u64, |acc, x| acc | (1u64 << x));
        Ok(Self { n, table })
    }

    pub fn constant(n: u8, value: bool) -> Result<Self, MubsError> {
        Self::new(n, if value { table_mask(n) } else { 0 })
    }

    pub fn width(&self) -> u8 {
        self.n
    }

    pub fn table(&self) -> u64 {
        self.table
    }

    pub fn inputs(&self) -> u32 {
        1 << self.n
    }

    pub fn eval(&self, x: u32) -> bool {
        debug_assert!(x < self.inputs());
        (self.table >> x) & 1 == 1
    }

    pub fn ones(&self) -> u32 {
        self.table.count_ones()
    }

    /// Bitmask of the preimage `X_{f = value}`.
    pub fn preimage_mask(&self, value: bool) -> u64 {
        if value {
            self.table
        } else {
            !self.table & table_mask(self.n)
        }
    }

    /// Inputs in `X_{f = value}`, ascending.
    pub fn preimage(&self, value: bool) -> impl Iterator<Item = u32> + '_ {
        (0..self.inputs()).filter(move |&x| self.eval(x) == value)
    }

    pub fn complement(&self) -> Self {
        Self {
            n: self.n,
            table: !self.table & table_mask(self.n),
        }
    }

    /// Truth table as a bitstring of length `2^n`, row `0` first.
    pub fn to_bitstring(&self) -> String {
        (0..self.inputs())
            .map(|x| if self.eval(x) { '1' } else { '0' })
            .collect()
    }

    pub fn from_bitstring(s: &str) -> Result<Self, MubsError> {
        let len = s.len();
        if !len.is_power_of_two() || len < 2 {
            return Err(MubsError::Parse(s.to_string()));
        }
        let n = len.trailing_zeros() as u8;
        check_width(n)?;
        let mut table = 0u64;
        for (x, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => table |= 1 << x,
                _ => return Err(MubsError::Parse(s.to_string())),
            }
        }
        Self::new(n, table)
    }
}

/// Nonzero vector `r ∈ {0,1}^n` naming the parity function `f_r(x) = ⊕ r_i x_i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParityLabel {
    n: u8,
    r: u32,
}

impl ParityLabel {
    pub fn new(n: u8, r: u32) -> Result<Self, MubsError> {
        check_width(n)?;
        if r == 0 {
            return Err(MubsError::ZeroLabel);
        }
        if r >= 1 << n {
            return Err(MubsError::LabelOutOfRange { n, r });
        }
        Ok(Self { n, r })
    }

    /// The label asking for the single bit `x_{i+1}` (zero-based `i`).
    pub fn unit(n: u8, i: u8) -> Result<Self, MubsError> {
        if i >= n {
            return Err(MubsError::LabelOutOfRange { n, r: 0 });
        }
        Self::new(n, 1 << (n - 1 - i))
    }

    pub fn width(&self) -> u8 {
        self.n
    }

    pub fn bits(&self) -> u32 {
        self.r
    }

    /// `f_r(x)` without materializing the truth table.
    pub fn eval(&self, x: u32) -> bool {
        (self.r & x).count_ones() & 1 == 1
    }

    /// `(-1)^{f_r(x)}`.
    pub fn sign(&self, x: u32) -> f64 {
        if self.eval(x) {
            -1.0
        } else {
            1.0
        }
    }
}

impl fmt::Display for ParityLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:0width$b}", self.r, width = self.n as usize)
    }
}

impl FromStr for ParityLabel {
    type Err = MubsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let n = u8::try_from(s.len()).map_err(|_| MubsError::Parse(s.to_string()))?;
        if n == 0 || !s.chars().all(|c| c == '0' || c == '1') {
            return Err(MubsError::Parse(s.to_string()));
        }
        check_width(n)?;
        let r = u32::from_str_radix(s, 2).map_err(|_| MubsError::Parse(s.to_string()))?;
        Self::new(n, r)
    }
}

impl Serialize for ParityLabel {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ParityLabel {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Formats an input `x` of width `n` as a bitstring, `x_1` first.
pub fn input_bitstring(n: u8, x: u32) -> String {
    format!("{:0width$b}", x, width = n as usize)
}

/// Parses an input bitstring of exactly `n` characters.
pub fn parse_input(n: u8, s: &str) -> Result<u32, MubsError> {
    if s.len() != n as usize || !s.chars().all(|c| c == '0' || c == '1') {
        return Err(MubsError::Parse(s.to_string()));
    }
    u32::from_str_radix(s, 2).map_err(|_| MubsError::Parse(s.to_string()))
}

/// The parity function `f_r`.
pub fn parity_function(label: ParityLabel) -> BooleanFn {
    BooleanFn::from_fn(label.n, |x| label.eval(x)).expect("label width already validated")
}

pub fn is_balanced(f: &BooleanFn) -> bool {
    f.ones() == 1 << (f.n - 1)
}

/// Whether every cell `X_{f1=i} ∩ X_{f2=j}` holds exactly `2^(n-2)` inputs.
pub fn are_mutually_unbiased(f1: &BooleanFn, f2: &BooleanFn) -> Result<bool, MubsError> {
    if f1.n != f2.n {
        return Err(MubsError::WidthMismatch {
            left: f1.n,
            right: f2.n,
        });
    }
    if !is_balanced(f1) || !is_balanced(f2) {
        return Err(MubsError::NotBalanced);
    }
    let n = f1.n;
    // For n = 1 two balanced functions can never split into cells of size 1/2.
    if n < 2 {
        return Ok(false);
    }
    let cell = 1u32 << (n - 2);
    let unbiased = [false, true].iter().all(|&i| {
        [false, true]
            .iter()
            .all(|&j| (f1.preimage_mask(i) & f2.preimage_mask(j)).count_ones() == cell)
    });
    Ok(unbiased)
}

/// Every member balanced and every pair mutually unbiased.
pub fn is_mubs_functions(fns: &[BooleanFn]) -> bool {
    fns.iter().all(is_balanced)
        && fns
            .iter()
            .tuple_combinations()
            .all(|(a, b)| are_mutually_unbiased(a, b).unwrap_or(false))
}

pub fn is_mubs(set: &FunctionSet) -> bool {
    is_mubs_functions(&set.functions())
}

/// An ordered, duplicate-free set of parity labels of a common width.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FunctionSet {
    n: u8,
    labels: Vec<ParityLabel>,
}

impl FunctionSet {
    /// Builds a set in canonical (ascending) order.
    pub fn new(n: u8, labels: impl IntoIterator<Item = ParityLabel>) -> Result<Self, MubsError> {
        check_width(n)?;
        let mut labels: Vec<ParityLabel> = labels.into_iter().collect();
        if labels.is_empty() {
            return Err(MubsError::EmptySet);
        }
        if let Some(bad) = labels.iter().find(|l| l.n != n) {
            return Err(MubsError::WidthMismatch {
                left: n,
                right: bad.n,
            });
        }
        labels.sort();
        if let Some((a, _)) = labels.iter().tuple_windows().find(|(a, b)| a == b) {
            return Err(MubsError::DuplicateLabel(a.to_string()));
        }
        Ok(Self { n, labels })
    }

    pub fn from_bits(n: u8, bits: &[u32]) -> Result<Self, MubsError> {
        let labels = bits
            .iter()
            .map(|&r| ParityLabel::new(n, r))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(n, labels)
    }

    /// The standard `(k -> 1)` random access code: every single-bit question.
    pub fn rac(k: u8) -> Result<Self, MubsError> {
        check_width(k)?;
        Self::new(k, (0..k).map(|i| ParityLabel::unit(k, i).expect("i < k")))
    }

    pub fn width(&self) -> u8 {
        self.n
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[ParityLabel] {
        &self.labels
    }

    pub fn iter(&self) -> std::slice::Iter<'_, ParityLabel> {
        self.labels.iter()
    }

    pub fn contains(&self, label: &ParityLabel) -> bool {
        self.labels.binary_search(label).is_ok()
    }

    pub fn index_of(&self, label: &ParityLabel) -> Option<usize> {
        self.labels.binary_search(label).ok()
    }

    pub fn functions(&self) -> Vec<BooleanFn> {
        self.labels.iter().copied().map(parity_function).collect()
    }

    /// Number of inputs `2^n`.
    pub fn inputs(&self) -> u32 {
        1 << self.n
    }

    /// Parses a comma-separated list of bitstrings such as `"100,010,110"`.
    pub fn parse(s: &str) -> Result<Self, MubsError> {
        let labels = s
            .split(',')
            .filter(|t| !t.trim().is_empty())
            .map(str::parse)
            .collect::<Result<Vec<ParityLabel>, _>>()?;
        let n = labels.first().ok_or(MubsError::EmptySet)?.n;
        Self::new(n, labels)
    }
}

impl fmt::Display for FunctionSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.labels.iter().join(","))
    }
}

impl FromStr for FunctionSet {
    type Err = MubsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

impl Serialize for FunctionSet {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for FunctionSet {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// All `2^n - 1` parity labels.
pub fn full_mubs(n: u8) -> Result<FunctionSet, MubsError> {
    check_width(n)?;
    FunctionSet::new(n, (1..1u32 << n).map(|r| ParityLabel { n, r }))
}

/// All subsets of `full_mubs(n)` with exactly `k` labels, in lexicographic order.
pub fn subsets(n: u8, k: usize) -> Result<impl Iterator<Item = FunctionSet>, MubsError> {
    let full = full_mubs(n)?;
    Ok(full
        .labels
        .into_iter()
        .combinations(k)
        .map(move |labels| FunctionSet { n, labels }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuadrupleClass {
    /// Some pairing satisfies `r_i ⊕ r_j = r_k ⊕ r_l`.
    XorClosed,
    NotXorClosed,
}

impl fmt::Display for QuadrupleClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            QuadrupleClass::XorClosed => "xor-closed",
            QuadrupleClass::NotXorClosed => "open",
        })
    }
}

impl FromStr for QuadrupleClass {
    type Err = MubsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "xor-closed" | "closed" => Ok(QuadrupleClass::XorClosed),
            "open" | "not-xor-closed" => Ok(QuadrupleClass::NotXorClosed),
            _ => Err(MubsError::Parse(s.to_string())),
        }
    }
}

pub fn classify_quadruple(set: &FunctionSet) -> Result<QuadrupleClass, MubsError> {
    if set.len() != 4 {
        return Err(MubsError::WrongCardinality {
            expected: 4,
            found: set.len(),
        });
    }
    let r: Vec<u32> = set.labels.iter().map(|l| l.r).collect();
    let pairings = [(0, 1, 2, 3), (0, 2, 1, 3), (0, 3, 1, 2)];
    let closed = pairings
        .iter()
        .any(|&(i, j, k, l)| r[i] ^ r[j] == r[k] ^ r[l]);
    Ok(if closed {
        QuadrupleClass::XorClosed
    } else {
        QuadrupleClass::NotXorClosed
    })
}

/// First `k`-subset of `full_mubs(n)` in lexicographic order, restricted to
/// the requested class when `k = 4`.
pub fn representative(
    n: u8,
    k: usize,
    class: Option<QuadrupleClass>,
) -> Result<FunctionSet, MubsError> {
    let max = (1usize << n) - 1;
    if k == 0 || k > max {
        return Err(MubsError::WrongCardinality {
            expected: max,
            found: k,
        });
    }
    if class.is_some() && k != 4 {
        return Err(MubsError::WrongCardinality {
            expected: 4,
            found: k,
        });
    }
    subsets(n, k)?
        .find(|s| class.is_none_or(|c| classify_quadruple(s).ok() == Some(c)))
        .ok_or(MubsError::WrongCardinality {
            expected: 4,
            found: k,
        })
}

/// Resolves a set selector at width `n`: `all`, `k=<m>[:class]`, or a
/// comma-separated list of labels.
pub fn select_set(n: u8, selector: &str) -> Result<FunctionSet, MubsError> {
    let selector = selector.trim();
    if selector == "all" {
        return full_mubs(n);
    }
    if let Some(rest) = selector.strip_prefix("k=") {
        let (m, class) = match rest.split_once(':') {
            Some((m, c)) => (m, Some(c.parse::<QuadrupleClass>()?)),
            None => (rest, None),
        };
        let m = m
            .parse::<usize>()
            .map_err(|_| MubsError::Parse(selector.to_string()))?;
        return representative(n, m, class);
    }
    let set = FunctionSet::parse(selector)?;
    if set.width() != n {
        return Err(MubsError::WidthMismatch {
            left: n,
            right: set.width(),
        });
    }
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn label(s: &str) -> ParityLabel {
        s.parse().unwrap()
    }

    fn set(s: &str) -> FunctionSet {
        s.parse().unwrap()
    }

    #[test]
    fn selectors() {
        assert_eq!(select_set(3, "all").unwrap().len(), 7);
        let open = select_set(3, "k=4:open").unwrap();
        assert_eq!(
            classify_quadruple(&open).unwrap(),
            QuadrupleClass::NotXorClosed
        );
        let closed = select_set(3, "k=4:xor-closed").unwrap();
        assert_eq!(
            classify_quadruple(&closed).unwrap(),
            QuadrupleClass::XorClosed
        );
        assert_eq!(select_set(3, "k=5").unwrap().len(), 5);
        assert_eq!(select_set(3, "110,001").unwrap(), set("001,110"));
        assert!(select_set(2, "110").is_err());
        assert!(select_set(3, "k=x").is_err());
        assert!(select_set(3, "k=3:open").is_err());
    }

    #[test]
    fn parity_of_single_bit() {
        let f = parity_function(label("100"));
        assert_eq!(f.ones(), 4);
        for x in 0..8 {
            assert_eq!(f.eval(x), x >= 4);
        }
    }

    #[test]
    fn parity_of_all_three_bits_matches_table_column() {
        let f = parity_function(label("111"));
        assert!(!f.eval(0b000));
        assert!(f.eval(0b001));
        assert!(!f.eval(0b011));
        assert!(f.eval(0b111));
    }

    #[test]
    fn two_bit_xor_table() {
        let f = parity_function(label("11"));
        assert_eq!(f.to_bitstring(), "0110");
    }

    #[test]
    fn balancedness() {
        assert!(is_balanced(&parity_function(label("010"))));
        assert!(!is_balanced(&BooleanFn::constant(2, false).unwrap()));
        let and = BooleanFn::from_fn(2, |x| x == 0b11).unwrap();
        assert_eq!(and.ones(), 1);
        assert!(!is_balanced(&and));
    }

    #[test]
    fn mutual_unbiasedness() {
        let f = |s| parity_function(label(s));
        assert!(are_mutually_unbiased(&f("100"), &f("010")).unwrap());
        assert!(!are_mutually_unbiased(&f("100"), &f("100")).unwrap());
        assert!(are_mutually_unbiased(&f("110"), &f("011")).unwrap());
    }

    #[test]
    fn mutual_unbiasedness_errors() {
        let a = parity_function(label("10"));
        let b = parity_function(label("100"));
        assert_eq!(
            are_mutually_unbiased(&a, &b),
            Err(MubsError::WidthMismatch { left: 2, right: 3 })
        );
        let c = BooleanFn::constant(2, true).unwrap();
        assert_eq!(are_mutually_unbiased(&a, &c), Err(MubsError::NotBalanced));
    }

    #[test]
    fn mubs_examples() {
        assert!(is_mubs(&full_mubs(3).unwrap()));
        assert!(is_mubs(&set("10,01,11")));
        assert!(is_mubs(&set("101")));
    }

    #[test]
    fn full_mubs_listing() {
        assert_eq!(full_mubs(2).unwrap().to_string(), "01,10,11");
        assert_eq!(full_mubs(3).unwrap().len(), 7);
        assert_eq!(full_mubs(1).unwrap().to_string(), "1");
        assert_eq!(full_mubs(7), Err(MubsError::WidthOutOfRange(7)));
        assert_eq!(full_mubs(0), Err(MubsError::WidthOutOfRange(0)));
    }

    #[test]
    fn quadruple_classes() {
        assert_eq!(
            classify_quadruple(&set("100,010,001,111")).unwrap(),
            QuadrupleClass::XorClosed
        );
        assert_eq!(
            classify_quadruple(&set("100,010,001,110")).unwrap(),
            QuadrupleClass::NotXorClosed
        );
        assert_eq!(
            classify_quadruple(&set("100,010,110,001")).unwrap(),
            classify_quadruple(&set("001,010,100,110")).unwrap()
        );
        assert_eq!(
            classify_quadruple(&set("100,010,001")),
            Err(MubsError::WrongCardinality {
                expected: 4,
                found: 3
            })
        );
    }

    #[test]
    fn label_validation() {
        assert_eq!(ParityLabel::new(3, 0), Err(MubsError::ZeroLabel));
        assert!(matches!(
            ParityLabel::new(3, 8),
            Err(MubsError::LabelOutOfRange { .. })
        ));
        assert!("10a".parse::<ParityLabel>().is_err());
        assert!("000".parse::<ParityLabel>().is_err());
        assert!(matches!(
            "100,100".parse::<FunctionSet>(),
            Err(MubsError::DuplicateLabel(_))
        ));
        assert!(matches!(
            "100,10".parse::<FunctionSet>(),
            Err(MubsError::WidthMismatch { .. })
        ));
    }

    #[test]
    fn sets_are_canonically_ordered() {
        assert_eq!(set("111,001,100").to_string(), "001,100,111");
        assert_eq!(set("111,001,100"), set("100,111,001"));
    }

    #[test]
    fn truth_table_bitstring_round_trip() {
        let f = BooleanFn::from_fn(3, |x| x == 5 || x == 1).unwrap();
        let s = f.to_bitstring();
        assert_eq!(s, "01000100");
        assert_eq!(BooleanFn::from_bitstring(&s).unwrap(), f);
        assert!(BooleanFn::new(2, 0x1f).is_err());
    }

    #[test]
    fn representatives() {
        let open = representative(3, 4, Some(QuadrupleClass::NotXorClosed)).unwrap();
        assert_eq!(
            classify_quadruple(&open).unwrap(),
            QuadrupleClass::NotXorClosed
        );
        let closed = representative(3, 4, Some(QuadrupleClass::XorClosed)).unwrap();
        assert_eq!(
            classify_quadruple(&closed).unwrap(),
            QuadrupleClass::XorClosed
        );
        assert_eq!(representative(3, 7, None).unwrap(), full_mubs(3).unwrap());
        assert!(representative(3, 8, None).is_err());
        assert!(representative(3, 3, Some(QuadrupleClass::XorClosed)).is_err());
    }

    #[test]
    fn subset_counts() {
        assert_eq!(subsets(3, 4).unwrap().count(), 35);
        assert_eq!(subsets(3, 7).unwrap().count(), 1);
    }
}
