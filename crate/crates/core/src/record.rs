//! Record semantics and batch/streaming indicator computation.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::events::RecordPattern;
use crate::observation::{check_coords, strictly_below, Observation, Path};

/// Which observations count as records once `d >= 2`.
///
/// For `d = 1` and tie-free data both modes produce identical indicators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SemanticsMode {
    /// A record strictly dominates the most recent record.
    Chain,
    /// A record strictly dominates every previous observation.
    Dominance,
}

impl SemanticsMode {
    pub const ALL: [SemanticsMode; 2] = [SemanticsMode::Chain, SemanticsMode::Dominance];

    pub fn as_str(self) -> &'static str {
        match self {
            SemanticsMode::Chain => "chain",
            SemanticsMode::Dominance => "dominance",
        }
    }
}

impl fmt::Display for SemanticsMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SemanticsMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "chain" => Ok(SemanticsMode::Chain),
            "dominance" => Ok(SemanticsMode::Dominance),
            other => Err(format!("unknown record semantics '{other}'")),
        }
    }
}

/// The indicator sequence ζ_1..ζ_n. The first entry is always 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IndicatorVector {
    bits: Vec<bool>,
}

impl IndicatorVector {
    pub fn from_bits(bits: Vec<bool>) -> Result<Self> {
        match bits.first() {
            None => Err(Error::EmptyPath),
            Some(false) => Err(Error::InvalidPattern(
                "the first observation is always a record".into(),
            )),
            Some(true) => Ok(IndicatorVector { bits }),
        }
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// ζ_j for 1-based `j`.
    pub fn get(&self, j: usize) -> Option<bool> {
        j.checked_sub(1).and_then(|i| self.bits.get(i).copied())
    }

    /// Outcome code of (ζ_2, …, ζ_n): bit 0 holds ζ_2. Requires `n <= 65`.
    pub fn outcome(&self) -> u64 {
        debug_assert!(self.bits.len() <= 65);
        self.bits[1..]
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, &b)| acc | ((b as u64) << i))
    }
}

/// Streaming record detector.
///
/// In chain mode only the most recent record is kept (for `d = 1` this is
/// the running maximum). In dominance mode the detector keeps the set of
/// maximal observations seen so far, a minimal antichain under the strict
/// order, with dominated members evicted immediately.
#[derive(Debug, Clone)]
pub struct Detector {
    mode: SemanticsMode,
    dim: usize,
    last_record: Vec<f64>,
    // flat storage, `dim` values per member
    front: Vec<f64>,
    count: u64,
    seen: u64,
}

impl Detector {
    pub fn new(mode: SemanticsMode) -> Self {
        Detector {
            mode,
            dim: 0,
            last_record: Vec::new(),
            front: Vec::new(),
            count: 0,
            seen: 0,
        }
    }

    pub fn mode(&self) -> SemanticsMode {
        self.mode
    }

    /// Number of records emitted so far, L(seen).
    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn seen(&self) -> u64 {
        self.seen
    }

    /// Most recent record (chain mode only).
    pub fn last_record(&self) -> Option<&[f64]> {
        match self.mode {
            SemanticsMode::Chain if self.seen > 0 => Some(&self.last_record),
            _ => None,
        }
    }

    /// Members of the maximal front (dominance mode only; empty otherwise).
    pub fn front(&self) -> impl Iterator<Item = &[f64]> {
        let dim = self.dim.max(1);
        self.front.chunks_exact(dim)
    }

    /// Size of the state the detector keeps: 1 in chain mode once started.
    pub fn front_len(&self) -> usize {
        match self.mode {
            SemanticsMode::Chain => usize::from(self.seen > 0),
            SemanticsMode::Dominance => self.front.len() / self.dim.max(1),
        }
    }

    pub fn step(&mut self, x: &Observation) -> Result<bool> {
        self.step_unchecked_finite(x.coords())
    }

    /// Same as [`Detector::step`] on a raw coordinate slice.
    pub fn step_coords(&mut self, x: &[f64]) -> Result<bool> {
        check_coords(x)?;
        self.step_unchecked_finite(x)
    }

    fn step_unchecked_finite(&mut self, x: &[f64]) -> Result<bool> {
        if self.seen == 0 {
            self.dim = x.len();
        } else if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        let bit = if self.seen == 0 {
            match self.mode {
                SemanticsMode::Chain => self.last_record.extend_from_slice(x),
                SemanticsMode::Dominance => self.front.extend_from_slice(x),
            }
            true
        } else {
            match self.mode {
                SemanticsMode::Chain => self.step_chain(x),
                SemanticsMode::Dominance => self.step_dominance(x),
            }
        };
        self.seen += 1;
        self.count += bit as u64;
        Ok(bit)
    }

    fn step_chain(&mut self, x: &[f64]) -> bool {
        if strictly_below(&self.last_record, x) {
            self.last_record.copy_from_slice(x);
            true
        } else {
            false
        }
    }

    fn step_dominance(&mut self, x: &[f64]) -> bool {
        let dim = self.dim;
        let mut below_all = true;
        let mut covered = false;
        for m in self.front.chunks_exact(dim) {
            if !strictly_below(m, x) {
                below_all = false;
                if strictly_below(x, m) {
                    covered = true;
                    break;
                }
            }
        }
        if below_all {
            self.front.clear();
            self.front.extend_from_slice(x);
            return true;
        }
        if !covered {
            // keep members x does not dominate, then append x
            let mut write = 0;
            for read in (0..self.front.len()).step_by(dim) {
                if !strictly_below(&self.front[read..read + dim], x) {
                    self.front.copy_within(read..read + dim, write);
                    write += dim;
                }
            }
            self.front.truncate(write);
            self.front.extend_from_slice(x);
        }
        false
    }
}

/// Indicator vector of `path` under `mode`: the fold of [`Detector::step`].
pub fn indicators(path: &Path, mode: SemanticsMode) -> IndicatorVector {
    let mut det = Detector::new(mode);
    let bits = path
        .iter()
        // a validated path cannot fail a step
        .map(|x| det.step(x).expect("path has uniform dimension"))
        .collect();
    IndicatorVector { bits }
}

/// Ordered record times `j >= 2`; the empty pattern is the no-record event.
pub fn record_pattern(path: &Path, mode: SemanticsMode) -> RecordPattern {
    let iv = indicators(path, mode);
    let indices = iv
        .bits
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, &b)| b)
        .map(|(i, _)| i + 1)
        .collect();
    RecordPattern::new(path.len(), indices).expect("indices are increasing within 2..=n")
}

/// L(n), the number of records.
pub fn count_records(iv: &IndicatorVector) -> usize {
    iv.bits.iter().filter(|&&b| b).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use SemanticsMode::*;

    fn path(rows: &[&[f64]]) -> Path {
        Path::from_rows(rows.iter().map(|r| r.to_vec())).unwrap()
    }

    fn bits(iv: &IndicatorVector) -> Vec<u8> {
        iv.bits().iter().map(|&b| b as u8).collect()
    }

    #[test]
    fn one_dimensional_examples() {
        for mode in SemanticsMode::ALL {
            assert_eq!(bits(&indicators(&path(&[&[3.], &[1.], &[2.]]), mode)), [1, 0, 0]);
            assert_eq!(bits(&indicators(&path(&[&[1.], &[2.], &[3.]]), mode)), [1, 1, 1]);
        }
    }

    #[test]
    fn chain_and_dominance_differ_in_two_dimensions() {
        let p = path(&[&[0., 0.], &[10., -5.], &[1., 1.]]);
        assert_eq!(bits(&indicators(&p, Chain)), [1, 0, 1]);
        assert_eq!(bits(&indicators(&p, Dominance)), [1, 0, 0]);
        assert_eq!(record_pattern(&p, Chain).indices(), &[3]);
        assert!(record_pattern(&p, Dominance).is_empty());
    }

    #[test]
    fn record_pattern_examples() {
        let p = path(&[&[1.], &[3.], &[2.], &[4.]]);
        assert_eq!(record_pattern(&p, Chain).indices(), &[2, 4]);
        let desc = path(&[&[5.], &[4.], &[3.], &[2.], &[1.]]);
        assert!(record_pattern(&desc, Chain).is_empty());
    }

    #[test]
    fn step_examples() {
        let mut det = Detector::new(Chain);
        assert!(det.step_coords(&[5.0]).unwrap());
        assert_eq!(det.last_record(), Some(&[5.0][..]));

        let mut det = Detector::new(Chain);
        det.step_coords(&[2.0, 2.0]).unwrap();
        assert!(!det.step_coords(&[3.0, 1.0]).unwrap());
        assert_eq!(det.last_record(), Some(&[2.0, 2.0][..]));
        assert_eq!(det.count(), 1);

        let mut det = Detector::new(Dominance);
        det.step_coords(&[0.0, 3.0]).unwrap();
        det.step_coords(&[3.0, 0.0]).unwrap();
        assert_eq!(det.front_len(), 2);
        assert!(det.step_coords(&[4.0, 4.0]).unwrap());
        assert_eq!(det.front().collect::<Vec<_>>(), vec![&[4.0, 4.0][..]]);
    }

    #[test]
    fn dominance_front_evicts_and_skips() {
        let mut det = Detector::new(Dominance);
        for x in [[5.0, 1.0], [1.0, 5.0], [6.0, 0.5], [0.0, 0.0], [2.0, 2.0]] {
            det.step_coords(&x).unwrap();
        }
        // (0,0) is dominated and never enters; (6,0.5) does not evict (5,1)
        let mut members: Vec<Vec<f64>> = det.front().map(|m| m.to_vec()).collect();
        members.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(members, vec![vec![1.0, 5.0], vec![2.0, 2.0], vec![5.0, 1.0], vec![6.0, 0.5]]);
        assert!(!det.step_coords(&[5.5, 1.5]).unwrap());
        let mut members: Vec<Vec<f64>> = det.front().map(|m| m.to_vec()).collect();
        members.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(members, vec![vec![1.0, 5.0], vec![2.0, 2.0], vec![5.5, 1.5], vec![6.0, 0.5]]);
    }

    #[test]
    fn ties_never_make_records() {
        let p = path(&[&[1., 1.], &[2., 1.], &[1., 2.], &[1., 1.]]);
        for mode in SemanticsMode::ALL {
            assert_eq!(bits(&indicators(&p, mode)), [1, 0, 0, 0]);
        }
    }

    #[test]
    fn step_rejects_bad_input() {
        let mut det = Detector::new(Dominance);
        det.step_coords(&[1.0, 2.0]).unwrap();
        assert!(matches!(det.step_coords(&[1.0]), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(det.step_coords(&[1.0, f64::NAN]), Err(Error::NonFinite { .. })));
        assert_eq!(det.seen(), 1);
    }

    #[test]
    fn count_examples() {
        let iv = IndicatorVector::from_bits(vec![true, false, false]).unwrap();
        assert_eq!(count_records(&iv), 1);
        let iv = IndicatorVector::from_bits(vec![true, true, true]).unwrap();
        assert_eq!(count_records(&iv), 3);
        assert!(IndicatorVector::from_bits(vec![false]).is_err());
    }

    #[test]
    fn outcome_code_puts_index_two_first() {
        let iv = IndicatorVector::from_bits(vec![true, true, false, true]).unwrap();
        assert_eq!(iv.outcome(), 0b101);
    }
}
