//! Exact joint laws of (ζ_2, …, ζ_n) for iid data by rank enumeration.
//!
//! Indicators only depend on coordinatewise comparisons, so applying each
//! coordinate's CDF leaves them unchanged. For iid continuous observations
//! with independent coordinates, every tuple of `d` rank permutations is
//! equally likely, which turns the joint law into a finite count over
//! `(n!)^d` tuples.

use num::{BigInt, BigRational, One};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::observation::Path;
use crate::pmf::{check_table_n, outcome_count, ExactPmf, JointPmf, PmfSource};
use crate::record::{Detector, SemanticsMode};

/// Default cap on the number of enumerated rank tuples, `(n!)^d`.
pub const DEFAULT_STATE_CAP: u128 = 2_000_000;

/// One permutation of `1..=n` per coordinate: entry `[i][j-1]` is the rank of
/// observation `j` in coordinate `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankTuple {
    perms: Vec<Vec<usize>>,
}

impl RankTuple {
    pub fn new(perms: Vec<Vec<usize>>) -> Result<Self> {
        let n = perms.first().map(Vec::len).ok_or(Error::EmptyObservation)?;
        for p in &perms {
            let mut seen = vec![false; n];
            let bijective = p.len() == n
                && p.iter().all(|&v| {
                    (1..=n).contains(&v) && !std::mem::replace(&mut seen[v - 1], true)
                });
            if !bijective {
                return Err(Error::InvalidPattern(format!("{p:?} is not a permutation of 1..={n}")));
            }
        }
        Ok(RankTuple { perms })
    }

    pub fn n(&self) -> usize {
        self.perms[0].len()
    }

    pub fn d(&self) -> usize {
        self.perms.len()
    }

    /// The path whose coordinate `i` of observation `j` is its rank.
    pub fn to_path(&self) -> Path {
        Path::from_rows((0..self.n()).map(|j| {
            self.perms.iter().map(|p| p[j] as f64).collect::<Vec<_>>()
        }))
        .expect("ranks are finite and uniform in dimension")
    }
}

fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

/// `(n!)^d`, or `None` past `u128`.
pub fn rank_tuple_count(n: usize, d: usize) -> Option<u128> {
    let f = factorial(n.min(34));
    if n > 34 {
        return None;
    }
    (0..d).try_fold(1u128, |acc, _| acc.checked_mul(f))
}

fn check_cap(n: usize, d: usize, cap: u128) -> Result<u64> {
    if n == 0 {
        return Err(Error::EmptyPath);
    }
    if d == 0 {
        return Err(Error::EmptyObservation);
    }
    let requested = rank_tuple_count(n, d).unwrap_or(u128::MAX);
    if requested > cap || requested > u64::MAX as u128 {
        return Err(Error::TooLarge {
            what: "rank tuples (n!)^d",
            requested,
            cap,
        });
    }
    check_table_n(n)?;
    Ok(requested as u64)
}

/// All permutations of `0..n` in lexicographic order.
fn permutations(n: usize) -> Vec<Vec<u8>> {
    let mut cur: Vec<u8> = (0..n as u8).collect();
    let mut out = vec![cur.clone()];
    loop {
        let Some(i) = (1..n).rev().find(|&i| cur[i - 1] < cur[i]) else {
            return out;
        };
        let k = (i..n).rev().find(|&k| cur[k] > cur[i - 1]).expect("successor exists");
        cur.swap(i - 1, k);
        cur[i..].reverse();
        out.push(cur.clone());
    }
}

/// Outcome counts over all `(n!)^d` rank tuples, plus that total.
pub fn rank_outcome_counts(n: usize, d: usize, mode: SemanticsMode, cap: u128) -> Result<(Vec<u64>, u64)> {
    let total = check_cap(n, d, cap)?;
    let perms = permutations(n);
    let per = perms.len() as u64;
    let outcomes = outcome_count(n);

    let counts = (0..total)
        .into_par_iter()
        .fold(
            || (vec![0u64; outcomes], vec![0.0f64; n * d]),
            |(mut counts, mut coords), t| {
                // mixed-radix decode: digit i picks the permutation for coordinate i
                let mut rest = t;
                for i in 0..d {
                    let p = &perms[(rest % per) as usize];
                    rest /= per;
                    for j in 0..n {
                        coords[j * d + i] = p[j] as f64;
                    }
                }
                let mut det = Detector::new(mode);
                let mut outcome = 0usize;
                for j in 0..n {
                    let bit = det
                        .step_coords(&coords[j * d..(j + 1) * d])
                        .expect("rank coordinates are valid");
                    if j > 0 && bit {
                        outcome |= 1 << (j - 1);
                    }
                }
                counts[outcome] += 1;
                (counts, coords)
            },
        )
        .map(|(counts, _)| counts)
        .reduce(
            || vec![0u64; outcomes],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    Ok((counts, total))
}

/// Exact joint law of the indicators for `n` iid continuous observations in
/// R^d with independent coordinates.
pub fn joint_pmf_iid(n: usize, d: usize, mode: SemanticsMode) -> Result<ExactPmf> {
    joint_pmf_iid_with_cap(n, d, mode, DEFAULT_STATE_CAP)
}

pub fn joint_pmf_iid_with_cap(n: usize, d: usize, mode: SemanticsMode, cap: u128) -> Result<ExactPmf> {
    let (counts, total) = rank_outcome_counts(n, d, mode, cap)?;
    let den = BigInt::from(total);
    let probs = counts
        .into_iter()
        .map(|c| BigRational::new(BigInt::from(c), den.clone()))
        .collect();
    Ok(JointPmf::from_parts(n, probs, PmfSource::Enumeration))
}

/// P(ζ_j = 1) for iid data.
///
/// Closed forms cover `d = 1` (`1/j`) and dominance mode (`1/j^d`); chain
/// mode with `d >= 2` enumerates the first `j` observations, subject to `cap`.
pub fn marginal_record_prob(n: usize, j: usize, d: usize, mode: SemanticsMode, cap: u128) -> Result<BigRational> {
    if j == 0 || j > n {
        return Err(Error::InvalidPattern(format!("index {j} outside 1..={n}")));
    }
    if d == 0 {
        return Err(Error::EmptyObservation);
    }
    if j == 1 {
        return Ok(BigRational::one());
    }
    if d == 1 || mode == SemanticsMode::Dominance {
        let den = num::pow(BigInt::from(j), d);
        return Ok(BigRational::new(BigInt::one(), den));
    }
    Ok(joint_pmf_iid_with_cap(j, d, mode, cap)?.marginal(j))
}
