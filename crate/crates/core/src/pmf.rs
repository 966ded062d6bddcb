//! Joint probability tables over the indicator outcomes (ζ_2, …, ζ_n).
//!
//! Outcome `o` is a bitmask with ζ_2 at bit 0, ζ_3 at bit 1, and so on, so a
//! table for path length `n` has `2^(n-1)` entries.

use std::fmt::Debug;

use num::{BigInt, BigRational, Num, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Largest path length for which dense outcome tables are built.
pub const MAX_TABLE_N: usize = 20;

/// Tolerance for the normalization of floating-point tables.
pub const FLOAT_NORMALIZATION_TOL: f64 = 1e-9;

/// Scalar used for probabilities: exact rationals or `f64`.
pub trait Probability: Clone + Debug + PartialOrd + Num + Signed + ToPrimitive {
    /// Whether a table total counts as 1.
    fn is_unit(total: &Self) -> bool;

    fn ratio(num: u64, den: u64) -> Self;

    fn half() -> Self {
        Self::ratio(1, 2)
    }
}

impl Probability for f64 {
    fn is_unit(total: &f64) -> bool {
        (total - 1.0).abs() <= FLOAT_NORMALIZATION_TOL
    }

    fn ratio(num: u64, den: u64) -> f64 {
        num as f64 / den as f64
    }
}

impl Probability for BigRational {
    fn is_unit(total: &BigRational) -> bool {
        total.is_one()
    }

    fn ratio(num: u64, den: u64) -> BigRational {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
}

/// Exact rational `num/den` with no whitespace, e.g. `1/6`, `0/1`.
pub fn format_rational(q: &BigRational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

/// Parses `num/den`, an integer, or a plain decimal into an exact rational.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = num.trim().parse().ok()?;
        let den: BigInt = den.trim().parse().ok()?;
        if den.is_zero() {
            return None;
        }
        return Some(BigRational::new(num, den));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    if body.is_empty() || !body.chars().all(|c| c.is_ascii_digit() || c == '.') {
        return None;
    }
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    let digits: BigInt = format!("{int}{frac}").parse().ok()?;
    let scale = num::pow(BigInt::from(10), frac.len());
    let q = BigRational::new(digits, scale);
    Some(if neg { -q } else { q })
}

/// Where a table came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PmfSource {
    Enumeration,
    Quadrature,
    Empirical,
    /// Read from a file or built by hand.
    Supplied,
}

impl PmfSource {
    pub fn as_str(self) -> &'static str {
        match self {
            PmfSource::Enumeration => "enumeration",
            PmfSource::Quadrature => "quadrature",
            PmfSource::Empirical => "empirical",
            PmfSource::Supplied => "supplied",
        }
    }
}

/// Probability table over the `2^(n-1)` indicator outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPmf<P> {
    n: usize,
    probs: Vec<P>,
    source: PmfSource,
}

pub type ExactPmf = JointPmf<BigRational>;
pub type FloatPmf = JointPmf<f64>;

/// Number of outcomes for path length `n`.
pub fn outcome_count(n: usize) -> usize {
    1usize << (n - 1)
}

/// Renders outcome `o` as the bit string ζ_2 ζ_3 … ζ_n.
pub fn outcome_label(n: usize, outcome: u64) -> String {
    (0..n - 1)
        .map(|i| if outcome >> i & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// Parses a bit string written as ζ_2 … ζ_n back into an outcome code.
pub fn parse_outcome_label(label: &str) -> Option<u64> {
    let label = label.trim();
    if label.len() > 64 {
        return None;
    }
    label.chars().enumerate().try_fold(0u64, |acc, (i, c)| match c {
        '0' => Some(acc),
        '1' => Some(acc | 1 << i),
        _ => None,
    })
}

pub(crate) fn check_table_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::EmptyPath);
    }
    if n > MAX_TABLE_N {
        return Err(Error::TooLarge {
            what: "path length n for a dense outcome table",
            requested: n as u128,
            cap: MAX_TABLE_N as u128,
        });
    }
    Ok(())
}

impl<P: Probability> JointPmf<P> {
    /// Validates length, non-negativity and normalization.
    pub fn new(n: usize, probs: Vec<P>, source: PmfSource) -> Result<Self> {
        check_table_n(n)?;
        if probs.len() != outcome_count(n) {
            return Err(Error::InvalidPmf(format!(
                "expected {} outcomes for n = {n}, got {}",
                outcome_count(n),
                probs.len()
            )));
        }
        if let Some(p) = probs.iter().find(|p| p.is_negative()) {
            return Err(Error::InvalidPmf(format!("negative probability {p:?}")));
        }
        let pmf = JointPmf { n, probs, source };
        pmf.check_normalized()?;
        Ok(pmf)
    }

    pub(crate) fn from_parts(n: usize, probs: Vec<P>, source: PmfSource) -> Self {
        debug_assert_eq!(probs.len(), outcome_count(n));
        JointPmf { n, probs, source }
    }

    /// Point mass on one outcome.
    pub fn point_mass(n: usize, outcome: u64) -> Result<Self> {
        check_table_n(n)?;
        let mut probs = vec![P::zero(); outcome_count(n)];
        let slot = probs
            .get_mut(outcome as usize)
            .ok_or_else(|| Error::InvalidPmf(format!("outcome {outcome} out of range")))?;
        *slot = P::one();
        Ok(JointPmf { n, probs, source: PmfSource::Supplied })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn source(&self) -> PmfSource {
        self.source
    }

    pub fn probs(&self) -> &[P] {
        &self.probs
    }

    pub fn prob(&self, outcome: u64) -> &P {
        &self.probs[outcome as usize]
    }

    pub fn total(&self) -> P {
        self.probs.iter().fold(P::zero(), |acc, p| acc + p.clone())
    }

    pub fn check_normalized(&self) -> Result<()> {
        let total = self.total();
        if P::is_unit(&total) {
            Ok(())
        } else {
            Err(Error::Unnormalized(format!("{total:?}")))
        }
    }

    /// P(ζ_j = 1) for `2 <= j <= n`.
    pub fn marginal(&self, j: usize) -> P {
        assert!(j >= 2 && j <= self.n, "marginal index {j} outside 2..={}", self.n);
        let bit = j - 2;
        self.probs
            .iter()
            .enumerate()
            .filter(|(o, _)| o >> bit & 1 == 1)
            .fold(P::zero(), |acc, (_, p)| acc + p.clone())
    }

    /// Marginals for j = 2..=n, in order.
    pub fn marginals(&self) -> Vec<P> {
        (2..=self.n).map(|j| self.marginal(j)).collect()
    }

    /// P(ζ_j = 1, ζ_k = 1).
    pub fn pair_marginal(&self, j: usize, k: usize) -> P {
        let (a, b) = (j - 2, k - 2);
        self.probs
            .iter()
            .enumerate()
            .filter(|(o, _)| o >> a & 1 == 1 && o >> b & 1 == 1)
            .fold(P::zero(), |acc, (_, p)| acc + p.clone())
    }

    pub fn to_f64(&self) -> FloatPmf {
        JointPmf {
            n: self.n,
            probs: self
                .probs
                .iter()
                .map(|p| p.to_f64().unwrap_or(f64::NAN))
                .collect(),
            source: self.source,
        }
    }

    pub fn with_source(mut self, source: PmfSource) -> Self {
        self.source = source;
        self
    }
}
