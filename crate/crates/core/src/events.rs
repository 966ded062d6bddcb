//! Record patterns, the events they index, and the piecewise-constant
//! decomposition of E ∏ h_j(ζ_j) over those events.
//!
//! A pattern `r = (r_1 < … < r_k) ⊆ {2..n}` names the event that the records
//! after index 1 occur exactly at `r`. The empty pattern is the event that
//! the first observation is the only record. Patterns are encoded as outcome
//! bitmasks with index 2 at bit 0.

use crate::error::{Error, Result};
use crate::observation::{strictly_below, Path};
use crate::pmf::{check_table_n, JointPmf, Probability, MAX_TABLE_N};
use crate::record::SemanticsMode;

/// Default cap on `n` for [`enumerate_patterns`].
pub const DEFAULT_PATTERN_CAP: usize = MAX_TABLE_N;

/// An ordered set of record times within `{2..n}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RecordPattern {
    n: usize,
    indices: Vec<usize>,
}

impl RecordPattern {
    pub fn new(n: usize, indices: Vec<usize>) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyPath);
        }
        let mut prev = 1;
        for &r in &indices {
            if r <= prev || r > n {
                return Err(Error::InvalidPattern(format!(
                    "indices must be strictly increasing within 2..={n}, got {indices:?}"
                )));
            }
            prev = r;
        }
        Ok(RecordPattern { n, indices })
    }

    /// The no-record event for length `n`.
    pub fn empty(n: usize) -> Result<Self> {
        RecordPattern::new(n, Vec::new())
    }

    pub fn from_mask(n: usize, mask: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyPath);
        }
        if n <= 64 && mask >> (n - 1) != 0 {
            return Err(Error::InvalidPattern(format!(
                "mask {mask:#b} has bits beyond index {n}"
            )));
        }
        let indices = (0..64usize.min(n - 1))
            .filter(|&i| mask >> i & 1 == 1)
            .map(|i| i + 2)
            .collect();
        Ok(RecordPattern { n, indices })
    }

    /// Outcome code of this pattern; requires `n <= 65`.
    pub fn mask(&self) -> u64 {
        assert!(self.n <= 65, "pattern of length {} has no u64 code", self.n);
        self.indices.iter().fold(0, |acc, &r| acc | 1 << (r - 2))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of records after index 1; the pattern lies in 𝒜_k for this k.
    pub fn k(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn contains(&self, j: usize) -> bool {
        self.indices.binary_search(&j).is_ok()
    }

    /// Indices in `{2..n}` that are not records under this pattern.
    pub fn complement(&self) -> Vec<usize> {
        (2..=self.n).filter(|&j| !self.contains(j)).collect()
    }
}

/// All `2^(n-1)` patterns for length `n`, in outcome-code order.
pub fn enumerate_patterns(n: usize) -> Result<Vec<RecordPattern>> {
    enumerate_patterns_with_cap(n, DEFAULT_PATTERN_CAP)
}

pub fn enumerate_patterns_with_cap(n: usize, cap: usize) -> Result<Vec<RecordPattern>> {
    if n == 0 {
        return Err(Error::EmptyPath);
    }
    if n > cap || n > 64 {
        return Err(Error::TooLarge {
            what: "pattern length n",
            requested: n as u128,
            cap: cap.min(64) as u128,
        });
    }
    (0..1u64 << (n - 1))
        .map(|mask| RecordPattern::from_mask(n, mask))
        .collect()
}

/// Evaluates the event named by `r` directly from its factors.
///
/// Chain mode, with `r_0 = 1`:
/// - `B_1`: no `j` in `2..r_1` dominates `X^(1)` (for the empty pattern, no
///   `j` in `2..=n`);
/// - `A(X^(r_{l-1}), X^(r_l))`: no `j` strictly between the two records
///   dominates `X^(r_{l-1})`, and `X^(r_l)` dominates `X^(r_{l-1})`;
/// - `B_k`: no `j > r_k` dominates `X^(r_k)`; vacuous when `r_k = n`.
///
/// Dominance mode evaluates the same factors with "dominates the reference"
/// replaced by "dominates every earlier observation".
pub fn pattern_event_holds(path: &Path, r: &RecordPattern, mode: SemanticsMode) -> Result<bool> {
    if r.n() != path.len() {
        return Err(Error::LengthMismatch {
            expected: r.n(),
            got: path.len(),
        });
    }
    let n = path.len();
    let x = |j: usize| path.observations()[j - 1].coords();
    // does j beat the reference under the mode's notion of "record"?
    let beats = |reference: usize, j: usize| -> bool {
        match mode {
            SemanticsMode::Chain => strictly_below(x(reference), x(j)),
            SemanticsMode::Dominance => (1..j).all(|i| strictly_below(x(i), x(j))),
        }
    };
    let none_beat = |reference: usize, from: usize, to: usize| (from..=to).all(|j| !beats(reference, j));

    let Some(&first) = r.indices().first() else {
        // B_1 over the whole horizon
        return Ok(none_beat(1, 2, n));
    };
    if !none_beat(1, 2, first - 1) {
        return Ok(false);
    }
    let mut prev = 1;
    for &next in r.indices() {
        if !(none_beat(prev, prev + 1, next - 1) && beats(prev, next)) {
            return Ok(false);
        }
        prev = next;
    }
    Ok(none_beat(prev, prev + 1, n))
}

/// Pairs `(h_j(0), h_j(1))` for `j = 2..=n`.
#[derive(Debug, Clone, PartialEq)]
pub struct HTable<P> {
    pairs: Vec<(P, P)>,
}

impl<P: Probability> HTable<P> {
    /// `pairs[0]` holds `h_2`, `pairs[n-2]` holds `h_n`.
    pub fn new(pairs: Vec<(P, P)>) -> Self {
        HTable { pairs }
    }

    pub fn constant_one(n: usize) -> Self {
        HTable::new(vec![(P::one(), P::one()); n.saturating_sub(1)])
    }

    /// Path length `n` this table covers.
    pub fn n(&self) -> usize {
        self.pairs.len() + 1
    }

    pub fn pairs(&self) -> &[(P, P)] {
        &self.pairs
    }

    pub fn h(&self, j: usize, bit: bool) -> &P {
        let (h0, h1) = &self.pairs[j - 2];
        if bit {
            h1
        } else {
            h0
        }
    }

    fn check_n(&self, n: usize) -> Result<()> {
        if self.n() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: self.n(),
            });
        }
        Ok(())
    }
}

impl HTable<f64> {
    pub fn check_finite(&self) -> Result<()> {
        match self.pairs.iter().flat_map(|(a, b)| [a, b]).find(|v| !v.is_finite()) {
            Some(&v) => Err(Error::NonFinite { index: 0, value: v }),
            None => Ok(()),
        }
    }
}

/// Segment products of `h` over the blocks cut out by a pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct VProducts<P> {
    /// `∏_{j<r_1} h_j(0) · h_{r_1}(1)`, or `∏_{j=2}^n h_j(0)` for the empty pattern.
    pub v0: P,
    /// `v_l = ∏_{r_{l-1}<j<r_l} h_j(0) · h_{r_l}(1)` for `l = 2..=k`.
    pub vmid: Vec<P>,
    /// `∏_{j>r_k} h_j(0)`; 1 when `r_k = n` or the pattern is empty.
    pub vend: P,
    /// `∏_{j∈r} h_j(1) · ∏_{j∉r} h_j(0)`, the value of ∏ h_j(ζ_j) on the event.
    pub z: P,
}

fn segment<P: Probability>(h: &HTable<P>, zeros: std::ops::Range<usize>, one: Option<usize>) -> P {
    let base = zeros.fold(P::one(), |acc, j| acc * h.h(j, false).clone());
    match one {
        Some(j) => base * h.h(j, true).clone(),
        None => base,
    }
}

pub fn v_products<P: Probability>(r: &RecordPattern, h: &HTable<P>) -> Result<VProducts<P>> {
    h.check_n(r.n())?;
    let n = r.n();
    let z = (2..=n).fold(P::one(), |acc, j| acc * h.h(j, r.contains(j)).clone());
    let idx = r.indices();
    let Some(&first) = idx.first() else {
        return Ok(VProducts {
            v0: segment(h, 2..n + 1, None),
            vmid: Vec::new(),
            vend: P::one(),
            z,
        });
    };
    let v0 = segment(h, 2..first, Some(first));
    let vmid = idx
        .windows(2)
        .map(|w| segment(h, w[0] + 1..w[1], Some(w[1])))
        .collect();
    let last = *idx.last().expect("nonempty");
    let vend = segment(h, last + 1..n + 1, None);
    Ok(VProducts { v0, vmid, vend, z })
}

fn check_pair<P: Probability>(h: &HTable<P>, pmf: &JointPmf<P>) -> Result<()> {
    check_table_n(pmf.n())?;
    h.check_n(pmf.n())?;
    pmf.check_normalized()
}

/// `E ∏_{j=2}^n h_j(ζ_j)` summed outcome by outcome.
pub fn expectation_direct<P: Probability>(h: &HTable<P>, pmf: &JointPmf<P>) -> Result<P> {
    check_pair(h, pmf)?;
    let n = pmf.n();
    Ok(pmf
        .probs()
        .iter()
        .enumerate()
        .fold(P::zero(), |acc, (o, p)| {
            let value = (2..=n).fold(P::one(), |v, j| v * h.h(j, o >> (j - 2) & 1 == 1).clone());
            acc + p.clone() * value
        }))
}

/// The same expectation as a sum over patterns of
/// `v_0 · ∏ v_l · v_{k+1} · P(A_r)`.
pub fn expectation_via_decomposition<P: Probability>(h: &HTable<P>, pmf: &JointPmf<P>) -> Result<P> {
    check_pair(h, pmf)?;
    let mut total = P::zero();
    for r in enumerate_patterns(pmf.n())? {
        let v = v_products(&r, h)?;
        let piece = v.vmid.into_iter().fold(v.v0, |acc, m| acc * m) * v.vend;
        total = total + piece * pmf.prob(r.mask()).clone();
    }
    Ok(total)
}

/// `∏_{j=2}^n E h_j(ζ_j)` from the table's marginals.
pub fn product_of_marginal_expectations<P: Probability>(h: &HTable<P>, pmf: &JointPmf<P>) -> Result<P> {
    check_pair(h, pmf)?;
    Ok((2..=pmf.n()).fold(P::one(), |acc, j| {
        let p1 = pmf.marginal(j);
        let p0 = P::one() - p1.clone();
        acc * (h.h(j, false).clone() * p0 + h.h(j, true).clone() * p1)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pmf::PmfSource;
    use crate::record::record_pattern;
    use num::BigRational;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn path(rows: &[&[f64]]) -> Path {
        Path::from_rows(rows.iter().map(|r| r.to_vec())).unwrap()
    }

    /// Exact joint law of (ζ_2, ζ_3) for three iid continuous values, from the
    /// six equally likely rank orders worked out by hand:
    /// 123 → 11, 132 → 10, 213 → 01, 231 → 10, 312 → 00, 321 → 00.
    fn iid3() -> JointPmf<BigRational> {
        JointPmf::new(3, vec![q(2, 6), q(2, 6), q(1, 6), q(1, 6)], PmfSource::Supplied).unwrap()
    }

    fn identity_h(n: usize) -> HTable<BigRational> {
        HTable::new(vec![(q(0, 1), q(1, 1)); n - 1])
    }

    #[test]
    fn enumeration_examples() {
        assert_eq!(enumerate_patterns(1).unwrap(), vec![RecordPattern::empty(1).unwrap()]);
        let three: Vec<Vec<usize>> = enumerate_patterns(3)
            .unwrap()
            .iter()
            .map(|r| r.indices().to_vec())
            .collect();
        assert_eq!(three, vec![vec![], vec![2], vec![3], vec![2, 3]]);
        assert_eq!(enumerate_patterns(8).unwrap().len(), 128);
        assert!(matches!(enumerate_patterns(21), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn pattern_validation_and_masks() {
        assert!(RecordPattern::new(4, vec![1]).is_err());
        assert!(RecordPattern::new(4, vec![3, 3]).is_err());
        assert!(RecordPattern::new(4, vec![5]).is_err());
        let r = RecordPattern::new(5, vec![2, 4]).unwrap();
        assert_eq!(r.mask(), 0b101);
        assert_eq!(r.complement(), vec![3, 5]);
        assert_eq!(RecordPattern::from_mask(5, 0b101).unwrap(), r);
        assert!(RecordPattern::from_mask(3, 0b100).is_err());
    }

    #[test]
    fn event_examples() {
        let p = path(&[&[1.], &[3.], &[2.], &[4.]]);
        let yes = RecordPattern::new(4, vec![2, 4]).unwrap();
        let no = RecordPattern::new(4, vec![2]).unwrap();
        assert!(pattern_event_holds(&p, &yes, SemanticsMode::Chain).unwrap());
        assert!(!pattern_event_holds(&p, &no, SemanticsMode::Chain).unwrap());
        let wrong_n = RecordPattern::empty(3).unwrap();
        assert!(pattern_event_holds(&p, &wrong_n, SemanticsMode::Chain).is_err());
    }

    #[test]
    fn exactly_one_pattern_holds_on_a_two_dimensional_path() {
        let p = path(&[&[0., 0.], &[10., -5.], &[1., 1.], &[11., 0.], &[12., 2.]]);
        for mode in SemanticsMode::ALL {
            let holding: Vec<_> = enumerate_patterns(5)
                .unwrap()
                .into_iter()
                .filter(|r| pattern_event_holds(&p, r, mode).unwrap())
                .collect();
            assert_eq!(holding, vec![record_pattern(&p, mode)]);
        }
    }

    #[test]
    fn v_product_examples() {
        let h = HTable::new(vec![(q(1, 2), q(2, 1)), (q(3, 1), q(7, 1))]);
        let v = v_products(&RecordPattern::new(3, vec![2]).unwrap(), &h).unwrap();
        assert_eq!(v.z, q(6, 1));
        assert_eq!(v.v0, q(2, 1));
        assert_eq!(v.vend, q(3, 1));

        let v = v_products(&RecordPattern::empty(3).unwrap(), &h).unwrap();
        assert_eq!(v.z, q(3, 2));
        assert_eq!(v.v0, q(3, 2));

        let ind = identity_h(3);
        let v = v_products(&RecordPattern::new(3, vec![2, 3]).unwrap(), &ind).unwrap();
        assert_eq!(v.z, q(1, 1));
        assert_eq!(v.vmid, vec![q(1, 1)]);
    }

    #[test]
    fn segment_products_multiply_to_z() {
        let h = HTable::new(vec![(2.0, 3.0), (5.0, 7.0), (11.0, 13.0), (17.0, 19.0)]);
        for r in enumerate_patterns(5).unwrap() {
            let v = v_products(&r, &h).unwrap();
            let prod = v.vmid.iter().product::<f64>() * v.v0 * v.vend;
            assert_eq!(prod, v.z, "pattern {:?}", r.indices());
        }
    }

    #[test]
    fn expectation_examples() {
        let pmf = iid3();
        let one = HTable::constant_one(3);
        assert_eq!(expectation_direct(&one, &pmf).unwrap(), q(1, 1));
        assert_eq!(expectation_via_decomposition(&one, &pmf).unwrap(), q(1, 1));

        let id = identity_h(3);
        assert_eq!(expectation_direct(&id, &pmf).unwrap(), q(1, 6));
        assert_eq!(expectation_via_decomposition(&id, &pmf).unwrap(), q(1, 6));
        assert_eq!(product_of_marginal_expectations(&id, &pmf).unwrap(), q(1, 6));

        let first_only = HTable::new(vec![(q(0, 1), q(1, 1)), (q(1, 1), q(1, 1))]);
        assert_eq!(expectation_direct(&first_only, &pmf).unwrap(), q(1, 2));

        let selects_empty = HTable::new(vec![(q(1, 1), q(0, 1)), (q(1, 1), q(0, 1))]);
        assert_eq!(expectation_via_decomposition(&selects_empty, &pmf).unwrap(), q(1, 3));
    }

    #[test]
    fn marginal_product_examples() {
        let pmf = iid3();
        let consts = HTable::new(vec![(q(3, 1), q(3, 1)), (q(5, 2), q(5, 2))]);
        assert_eq!(product_of_marginal_expectations(&consts, &pmf).unwrap(), q(15, 2));

        let degenerate = JointPmf::<BigRational>::point_mass(3, 0b01).unwrap();
        assert_eq!(product_of_marginal_expectations(&identity_h(3), &degenerate).unwrap(), q(0, 1));
    }

    #[test]
    fn mismatched_tables_are_rejected() {
        let pmf = iid3();
        let h = identity_h(4);
        assert!(matches!(expectation_direct(&h, &pmf), Err(Error::LengthMismatch { .. })));
    }
}
