//! How far a joint indicator law is from the product of its marginals.

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::pmf::{JointPmf, Probability};
use crate::simulator::EmpiricalJointPmf;

/// The law with the same marginals and independent coordinates.
pub fn product_of_marginals<P: Probability>(pmf: &JointPmf<P>) -> JointPmf<P> {
    let marginals = pmf.marginals();
    let probs = (0..pmf.probs().len())
        .map(|o| {
            marginals.iter().enumerate().fold(P::one(), |acc, (i, p)| {
                if o >> i & 1 == 1 {
                    acc * p.clone()
                } else {
                    acc * (P::one() - p.clone())
                }
            })
        })
        .collect();
    JointPmf::from_parts(pmf.n(), probs, pmf.source())
}

/// Half the L1 distance between two tables over the same outcomes.
pub fn tv_distance<P: Probability>(p: &JointPmf<P>, q: &JointPmf<P>) -> Result<P> {
    if p.n() != q.n() {
        return Err(Error::LengthMismatch {
            expected: p.n(),
            got: q.n(),
        });
    }
    let l1 = p
        .probs()
        .iter()
        .zip(q.probs())
        .fold(P::zero(), |acc, (a, b)| acc + (a.clone() - b.clone()).abs());
    Ok(l1 * P::half())
}

/// Covariance of one pair of indicators.
#[derive(Debug, Clone, PartialEq)]
pub struct PairCovariance<P> {
    pub j: usize,
    pub k: usize,
    pub cov: P,
}

/// `Cov(ζ_j, ζ_k)` for all `2 <= j < k <= n`.
pub fn pairwise_covariances<P: Probability>(pmf: &JointPmf<P>) -> Vec<PairCovariance<P>> {
    let n = pmf.n();
    let marginals = pmf.marginals();
    let mut out = Vec::new();
    for j in 2..=n {
        for k in j + 1..=n {
            let joint = pmf.pair_marginal(j, k);
            let cov = joint - marginals[j - 2].clone() * marginals[k - 2].clone();
            out.push(PairCovariance { j, k, cov });
        }
    }
    out
}

/// Largest |correlation| over pairs; pairs with a constant indicator count as 0.
pub fn max_abs_correlation(pmf: &JointPmf<f64>) -> f64 {
    let marginals = pmf.marginals();
    pairwise_covariances(pmf)
        .iter()
        .map(|c| {
            let (pj, pk) = (marginals[c.j - 2], marginals[c.k - 2]);
            let scale = (pj * (1.0 - pj) * pk * (1.0 - pk)).sqrt();
            if scale > 0.0 {
                (c.cov / scale).abs()
            } else {
                0.0
            }
        })
        .fold(0.0, f64::max)
}

/// G-test of mutual independence of the indicators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GTest {
    pub gstat: f64,
    /// `2^(n-1) - 1 - (n-1)`.
    pub dof: usize,
    /// `None` when `dof = 0` (a single indicator, nothing to test).
    pub pvalue: Option<f64>,
}

pub fn mutual_independence_dof(n: usize) -> usize {
    (1usize << (n - 1)) - 1 - (n - 1)
}

/// G = 2 Σ O ln(O / E) with E from the empirical marginals. Cells with no
/// observations contribute 0.
pub fn g_test(emp: &EmpiricalJointPmf) -> Result<GTest> {
    let r = emp.replicates();
    if r == 0 {
        return Err(Error::NoReplicates);
    }
    let r = r as f64;
    let expected = product_of_marginals(&emp.pmf());
    let gstat = emp
        .counts()
        .iter()
        .zip(expected.probs())
        .filter(|(&o, _)| o > 0)
        .map(|(&o, &e)| {
            let o = o as f64;
            o * (o / (e * r)).ln()
        })
        .sum::<f64>()
        * 2.0;
    // rounding can leave a tiny negative value when the table is exactly a product
    let gstat = gstat.max(0.0);
    let dof = mutual_independence_dof(emp.n());
    let pvalue = (dof > 0).then(|| {
        ChiSquared::new(dof as f64)
            .map(|chi| chi.sf(gstat))
            .unwrap_or(f64::NAN)
    });
    Ok(GTest { gstat, dof, pvalue })
}

/// Summary of the distance from mutual independence.
#[derive(Debug, Clone, PartialEq)]
pub struct IndependenceReport {
    /// TV distance between the table and the product of its marginals.
    pub tv: f64,
    /// Present for empirical tables only.
    pub g_test: Option<GTest>,
    pub covariances: Vec<PairCovariance<f64>>,
    pub max_abs_correlation: f64,
}

impl IndependenceReport {
    pub fn for_pmf<P: Probability>(pmf: &JointPmf<P>) -> Result<Self> {
        let f = pmf.to_f64();
        let tv = tv_distance(pmf, &product_of_marginals(pmf))?
            .to_f64()
            .unwrap_or(f64::NAN);
        Ok(IndependenceReport {
            tv,
            g_test: None,
            covariances: pairwise_covariances(pmf)
                .into_iter()
                .map(|c| PairCovariance {
                    j: c.j,
                    k: c.k,
                    cov: c.cov.to_f64().unwrap_or(f64::NAN),
                })
                .collect(),
            max_abs_correlation: max_abs_correlation(&f),
        })
    }

    pub fn for_empirical(emp: &EmpiricalJointPmf) -> Result<Self> {
        let mut report = IndependenceReport::for_pmf(&emp.pmf())?;
        report.g_test = Some(g_test(emp)?);
        Ok(report)
    }
}
