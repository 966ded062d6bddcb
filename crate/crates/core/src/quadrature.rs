//! Deterministic quadrature for the indicator law of independent, not
//! necessarily identically distributed, observations on the line.
//!
//! For `d = 1` a record is an observation above the running maximum, so the
//! probability of each outcome is an iterated integral over the running
//! maximum. Each axis uses a composite midpoint rule on a common grid; two
//! resolutions `G` and `2G` give a Richardson error estimate, and the grid is
//! doubled until the estimate falls below the requested tolerance.

use crate::distribution::{ContinuousLaw, DistributionSpec};
use crate::error::{Error, Result};
use crate::events::RecordPattern;
use crate::pmf::{outcome_count, FloatPmf, JointPmf, PmfSource};

/// Largest path length accepted by the quadrature routines.
pub const QUADRATURE_MAX_N: usize = 6;

const CDF_LIMIT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    /// Cells on the coarsest grid.
    pub gridpoints: usize,
    /// Target for the per-outcome error estimate.
    pub tolerance: f64,
    /// Refinement stops with an error past this many cells.
    pub max_gridpoints: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        QuadratureOptions {
            gridpoints: 1024,
            tolerance: 1e-6,
            max_gridpoints: 1 << 22,
        }
    }
}

impl QuadratureOptions {
    pub fn with_gridpoints(gridpoints: usize) -> Self {
        QuadratureOptions {
            gridpoints,
            ..Default::default()
        }
    }
}

/// A quadrature table with its error estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraturePmf {
    pub pmf: FloatPmf,
    /// Largest per-outcome Richardson estimate.
    pub error_estimate: f64,
    /// Cells on the finer of the two grids used.
    pub gridpoints: usize,
}

/// Result of comparing `P(A_r)` with its factored form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactorizationCheck {
    /// `P(A_r)` integrated over the full event.
    pub lhs: f64,
    /// Product of the block factors integrated against the record values.
    pub rhs: f64,
    /// Sum of both error estimates.
    pub tolerance: f64,
}

impl FactorizationCheck {
    pub fn discrepancy(&self) -> f64 {
        (self.lhs - self.rhs).abs()
    }
}

struct Grid {
    lo: f64,
    width: f64,
    cells: usize,
}

impl Grid {
    fn edge(&self, c: usize) -> f64 {
        self.lo + self.width * c as f64 / self.cells as f64
    }

    fn mid(&self, c: usize) -> f64 {
        self.lo + self.width * (c as f64 + 0.5) / self.cells as f64
    }
}

fn prepare(laws: &[&dyn ContinuousLaw]) -> Result<(f64, f64)> {
    let n = laws.len();
    if n == 0 {
        return Err(Error::EmptyPath);
    }
    if n > QUADRATURE_MAX_N {
        return Err(Error::TooLarge {
            what: "quadrature path length n",
            requested: n as u128,
            cap: QUADRATURE_MAX_N as u128,
        });
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (j, law) in laws.iter().enumerate() {
        let (a, b) = law.support();
        if !(a.is_finite() && b.is_finite() && b > a) {
            return Err(Error::InvalidSpec(format!("law {} has support [{a}, {b}]", j + 1)));
        }
        let (fa, fb) = (law.cdf(a), law.cdf(b));
        if !(fa.is_finite() && fb.is_finite()) || fa > CDF_LIMIT_TOL || fb < 1.0 - CDF_LIMIT_TOL {
            return Err(Error::InvalidSpec(format!(
                "law {} is not normalized on its support: F(lo) = {fa}, F(hi) = {fb}",
                j + 1
            )));
        }
        lo = lo.min(a);
        hi = hi.max(b);
    }
    Ok((lo, hi))
}

fn check_density(laws: &[&dyn ContinuousLaw], grid: &Grid) -> Result<()> {
    for (j, law) in laws.iter().enumerate() {
        for c in 0..grid.cells {
            let x = grid.mid(c);
            let v = law.pdf(x);
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Quadrature(format!("density of law {} is {v} at {x}", j + 1)));
            }
            let f = law.cdf(x);
            if !f.is_finite() {
                return Err(Error::Quadrature(format!("CDF of law {} is {f} at {x}", j + 1)));
            }
        }
    }
    Ok(())
}

/// CDF at the cell edges and the mass of each cell.
fn cell_masses(law: &dyn ContinuousLaw, grid: &Grid) -> (Vec<f64>, Vec<f64>) {
    let edges: Vec<f64> = (0..=grid.cells).map(|c| law.cdf(grid.edge(c)).clamp(0.0, 1.0)).collect();
    let masses = edges.windows(2).map(|w| (w[1] - w[0]).max(0.0)).collect();
    (edges, masses)
}

/// Exclusive prefix sums.
fn below(f: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    f.iter()
        .map(|&v| {
            let s = acc;
            acc += v;
            s
        })
        .collect()
}

struct RunningMax<'a> {
    cdf_edges: &'a [Vec<f64>],
    masses: &'a [Vec<f64>],
    out: Vec<f64>,
}

impl RunningMax<'_> {
    /// `f[c]` is the probability of the prefix event with the running maximum
    /// of the first `j` observations in cell `c`.
    fn descend(&mut self, j: usize, outcome: usize, f: &[f64]) {
        let n = self.masses.len();
        if j == n {
            self.out[outcome] = f.iter().sum();
            return;
        }
        let m = &self.masses[j];
        let edges = &self.cdf_edges[j];
        // inside a shared cell the new value exceeds the maximum half the time
        let s = below(f);
        let record: Vec<f64> = (0..f.len()).map(|c| m[c] * (s[c] + 0.5 * f[c])).collect();
        let stay: Vec<f64> = (0..f.len()).map(|c| f[c] * (edges[c] + 0.5 * m[c])).collect();
        self.descend(j + 1, outcome, &stay);
        self.descend(j + 1, outcome | 1 << (j - 1), &record);
    }
}

fn outcome_table(laws: &[&dyn ContinuousLaw], grid: &Grid) -> Vec<f64> {
    let (cdf_edges, masses): (Vec<_>, Vec<_>) = laws.iter().map(|l| cell_masses(*l, grid)).unzip();
    let mut walker = RunningMax {
        cdf_edges: &cdf_edges,
        masses: &masses,
        out: vec![0.0; outcome_count(laws.len())],
    };
    let start = masses[0].clone();
    walker.descend(1, 0, &start);
    walker.out
}

/// Runs `table` on grids `G, 2G, 4G, …` until successive results agree.
fn refine<F>(lo: f64, hi: f64, opts: &QuadratureOptions, mut table: F) -> Result<(Vec<f64>, f64, usize)>
where
    F: FnMut(&Grid) -> Result<Vec<f64>>,
{
    if opts.gridpoints == 0 {
        return Err(Error::Quadrature("gridpoints must be positive".into()));
    }
    let mut cells = opts.gridpoints;
    let mut coarse = table(&Grid { lo, width: hi - lo, cells })?;
    loop {
        if cells * 2 > opts.max_gridpoints {
            return Err(Error::Quadrature(format!(
                "error estimate above {} at {} cells",
                opts.tolerance, cells
            )));
        }
        cells *= 2;
        let fine = table(&Grid { lo, width: hi - lo, cells })?;
        // midpoint rules converge at second order
        let err = fine
            .iter()
            .zip(&coarse)
            .map(|(f, c)| (f - c).abs() / 3.0)
            .fold(0.0, f64::max);
        if err <= opts.tolerance {
            let extrapolated = fine
                .iter()
                .zip(&coarse)
                .map(|(f, c)| f + (f - c) / 3.0)
                .collect();
            return Ok((extrapolated, err, cells));
        }
        coarse = fine;
    }
}

/// Joint indicator law for independent observations with the given laws.
pub fn joint_pmf_quadrature_laws(laws: &[&dyn ContinuousLaw], opts: &QuadratureOptions) -> Result<QuadraturePmf> {
    let (lo, hi) = prepare(laws)?;
    let n = laws.len();
    check_density(laws, &Grid { lo, width: hi - lo, cells: opts.gridpoints.max(1) })?;
    if n == 1 {
        return Ok(QuadraturePmf {
            pmf: JointPmf::from_parts(1, vec![1.0], PmfSource::Quadrature),
            error_estimate: 0.0,
            gridpoints: 0,
        });
    }
    let (mut probs, err, cells) = refine(lo, hi, opts, |g| Ok(outcome_table(laws, g)))?;
    for p in &mut probs {
        // extrapolation can push empty cells a hair below zero
        *p = p.max(0.0);
    }
    let pmf = JointPmf::new(n, probs, PmfSource::Quadrature)?;
    Ok(QuadraturePmf {
        pmf,
        error_estimate: err,
        gridpoints: cells,
    })
}

fn laws_of(spec: &DistributionSpec) -> Result<Vec<&dyn ContinuousLaw>> {
    if spec.d() != 1 {
        return Err(Error::InvalidSpec(format!(
            "quadrature needs one-dimensional data, spec has d = {}",
            spec.d()
        )));
    }
    Ok(spec.laws().iter().map(|m| m as &dyn ContinuousLaw).collect())
}

/// Joint indicator law of a one-dimensional spec, starting from `gridpoints`
/// cells and refining to an estimated error of at most 1e-6 per outcome.
pub fn joint_pmf_quadrature_1d(spec: &DistributionSpec, gridpoints: usize) -> Result<QuadraturePmf> {
    joint_pmf_quadrature_laws(&laws_of(spec)?, &QuadratureOptions::with_gridpoints(gridpoints))
}

/// Integral of the factored event probability over the record values.
///
/// With record times `t_0 = 1 < t_1 < … < t_k`, each block of non-record
/// indices after `t_l` contributes `∏_{j in block} F_j(x_l)`, the chance
/// that none of them beats the record value `x_l`. These block factors are
/// independent given the record values, so `P(A_r)` is their product
/// integrated against the record values' laws over `x_0 < x_1 < … < x_k`.
fn factored_table(laws: &[&dyn ContinuousLaw], r: &RecordPattern, grid: &Grid) -> f64 {
    let n = laws.len();
    let mids: Vec<f64> = (0..grid.cells).map(|c| grid.mid(c)).collect();
    let masses: Vec<Vec<f64>> = laws.iter().map(|l| cell_masses(*l, grid).1).collect();
    let mut times = vec![1];
    times.extend_from_slice(r.indices());

    let block_factor = |l: usize, x: f64| -> f64 {
        let start = times[l] + 1;
        let end = times.get(l + 1).map_or(n, |&t| t - 1);
        (start..=end).map(|j| laws[j - 1].cdf(x)).product()
    };
    let mut g: Vec<f64> = mids
        .iter()
        .zip(&masses[0])
        .map(|(&x, w)| w * block_factor(0, x))
        .collect();
    for l in 1..times.len() {
        let s = below(&g);
        let w = &masses[times[l] - 1];
        g = mids
            .iter()
            .enumerate()
            .map(|(c, &x)| w[c] * block_factor(l, x) * (s[c] + 0.5 * g[c]))
            .collect();
    }
    g.iter().sum()
}

/// Compares `P(A_r)` from the full running-maximum integral with the
/// product-of-block-factors form. Both sides are refined independently.
pub fn factorization_check_laws(
    laws: &[&dyn ContinuousLaw],
    r: &RecordPattern,
    opts: &QuadratureOptions,
) -> Result<FactorizationCheck> {
    if r.n() != laws.len() {
        return Err(Error::LengthMismatch {
            expected: laws.len(),
            got: r.n(),
        });
    }
    let direct = joint_pmf_quadrature_laws(laws, opts)?;
    let lhs = *direct.pmf.prob(r.mask());
    if laws.len() == 1 {
        return Ok(FactorizationCheck { lhs, rhs: 1.0, tolerance: 0.0 });
    }
    let (lo, hi) = prepare(laws)?;
    let (rhs, rhs_err, _) = refine(lo, hi, opts, |g| Ok(vec![factored_table(laws, r, g)]))?;
    Ok(FactorizationCheck {
        lhs,
        rhs: rhs[0],
        tolerance: direct.error_estimate + rhs_err,
    })
}

pub fn factorization_check(spec: &DistributionSpec, r: &RecordPattern, gridpoints: usize) -> Result<FactorizationCheck> {
    factorization_check_laws(&laws_of(spec)?, r, &QuadratureOptions::with_gridpoints(gridpoints))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::Marginal;

    fn uniforms(bounds: &[f64]) -> DistributionSpec {
        DistributionSpec::from_fn(bounds.len(), 1, |j, _| Marginal::uniform(0.0, bounds[j - 1])).unwrap()
    }

    #[test]
    fn two_uniforms_closed_form() {
        // P(X_2 > X_1) = ∫_0^1 (2 - x)/2 dx = 3/4
        let q = joint_pmf_quadrature_1d(&uniforms(&[1.0, 2.0]), 256).unwrap();
        assert!((q.pmf.marginal(2) - 0.75).abs() < 1e-9);
        assert!(q.error_estimate <= 1e-6);
    }

    #[test]
    fn iid_uniforms_match_hand_enumeration() {
        let q = joint_pmf_quadrature_1d(&uniforms(&[1.0; 3]), 256).unwrap();
        let expected = [1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0];
        for (p, e) in q.pmf.probs().iter().zip(expected) {
            assert!((p - e).abs() < 1e-6, "{p} vs {e}");
        }
    }

    #[test]
    fn single_law_is_trivial() {
        let q = joint_pmf_quadrature_1d(&uniforms(&[1.0]), 64).unwrap();
        assert_eq!(q.pmf.probs(), &[1.0]);
    }

    #[test]
    fn gaussian_iid_gives_reciprocal_marginals() {
        let g = Marginal::gaussian(1.0, 2.0).unwrap();
        let spec = DistributionSpec::iid(4, 1, g).unwrap();
        let q = joint_pmf_quadrature_1d(&spec, 512).unwrap();
        for j in 2..=4 {
            assert!((q.pmf.marginal(j) - 1.0 / j as f64).abs() < 1e-6);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let g = Marginal::gaussian(0.0, 1.0).unwrap();
        let wide = DistributionSpec::iid(2, 2, g).unwrap();
        assert!(matches!(joint_pmf_quadrature_1d(&wide, 64), Err(Error::InvalidSpec(_))));
        let long = DistributionSpec::iid(7, 1, g).unwrap();
        assert!(matches!(joint_pmf_quadrature_1d(&long, 64), Err(Error::TooLarge { .. })));

        struct HalfMass;
        impl ContinuousLaw for HalfMass {
            fn cdf(&self, x: f64) -> f64 {
                (x / 2.0).clamp(0.0, 0.5)
            }
            fn pdf(&self, _: f64) -> f64 {
                0.5
            }
            fn support(&self) -> (f64, f64) {
                (0.0, 1.0)
            }
        }
        struct Spiky;
        impl ContinuousLaw for Spiky {
            fn cdf(&self, x: f64) -> f64 {
                x.clamp(0.0, 1.0)
            }
            fn pdf(&self, x: f64) -> f64 {
                if x < 0.5 { 1.0 } else { f64::INFINITY }
            }
            fn support(&self) -> (f64, f64) {
                (0.0, 1.0)
            }
        }
        let u = Marginal::uniform(0.0, 1.0).unwrap();
        let opts = QuadratureOptions::default();
        assert!(matches!(
            joint_pmf_quadrature_laws(&[&u, &HalfMass], &opts),
            Err(Error::InvalidSpec(_))
        ));
        assert!(matches!(
            joint_pmf_quadrature_laws(&[&u, &Spiky], &opts),
            Err(Error::Quadrature(_))
        ));
    }

    #[test]
    fn factorization_examples() {
        let iid3 = uniforms(&[1.0; 3]);
        let all = RecordPattern::new(3, vec![2, 3]).unwrap();
        let c = factorization_check(&iid3, &all, 256).unwrap();
        assert!((c.lhs - 1.0 / 6.0).abs() < 1e-6);
        assert!(c.discrepancy() < 1e-6);

        let iid2 = uniforms(&[1.0; 2]);
        let none = factorization_check(&iid2, &RecordPattern::empty(2).unwrap(), 256).unwrap();
        assert!((none.lhs - 0.5).abs() < 1e-6 && (none.rhs - 0.5).abs() < 1e-6);
        let one = factorization_check(&iid2, &RecordPattern::new(2, vec![2]).unwrap(), 256).unwrap();
        assert!((one.lhs + none.lhs - 1.0).abs() < 1e-9);
    }

    #[test]
    fn factorization_holds_for_non_identical_laws() {
        let spec = uniforms(&[1.0, 2.0, 3.0, 1.5]);
        for r in crate::events::enumerate_patterns(4).unwrap() {
            let c = factorization_check(&spec, &r, 512).unwrap();
            assert!(c.discrepancy() < 1e-5, "{:?}: {c:?}", r.indices());
        }
    }
}
