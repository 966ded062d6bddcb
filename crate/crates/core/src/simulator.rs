//! Reproducible Monte Carlo estimation of the indicator law and of L(n).
//!
//! Replicate `t` draws from a ChaCha8 stream keyed by `(seed, t)`, so every
//! replicate is a pure function of the config and counts merge by integer
//! addition. Results do not depend on scheduling or thread count.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;

use crate::distribution::DistributionSpec;
use crate::error::{Error, Result};
use crate::observation::Path;
use crate::pmf::{outcome_count, FloatPmf, JointPmf, PmfSource, MAX_TABLE_N};
use crate::record::{Detector, SemanticsMode};

/// Default bound on `n * d * R`, the number of sampled coordinates.
pub const DEFAULT_WORK_BUDGET: u128 = 100_000_000_000;

/// Random stream for replicate `t` under `seed`.
pub fn replicate_rng(seed: u64, t: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(t);
    rng
}

/// Uniform on the open interval (0, 1): the centre of one of 2^52 cells.
#[inline]
pub fn open_unit(rng: &mut impl RngCore) -> f64 {
    ((rng.next_u64() >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}

fn fill_path(spec: &DistributionSpec, rng: &mut ChaCha8Rng, buf: &mut [f64]) {
    for (x, law) in buf.iter_mut().zip(spec.laws()) {
        *x = law.quantile(open_unit(rng));
    }
}

/// Path for replicate `t`; identical for identical `(spec, seed, t)`.
pub fn sample_path(spec: &DistributionSpec, seed: u64, t: u64) -> Result<Path> {
    let mut rng = replicate_rng(seed, t);
    let mut buf = vec![0.0; spec.n() * spec.d()];
    fill_path(spec, &mut rng, &mut buf);
    Path::from_rows(buf.chunks(spec.d()).map(|c| c.to_vec()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub spec: DistributionSpec,
    pub modes: Vec<SemanticsMode>,
    pub replicates: u64,
    pub seed: u64,
    /// Upper bound on `n * d * replicates`.
    pub work_budget: u128,
}

impl ExperimentConfig {
    pub fn new(spec: DistributionSpec, modes: Vec<SemanticsMode>, replicates: u64, seed: u64) -> Self {
        ExperimentConfig {
            spec,
            modes,
            replicates,
            seed,
            work_budget: DEFAULT_WORK_BUDGET,
        }
    }

    pub fn n(&self) -> usize {
        self.spec.n()
    }

    pub fn d(&self) -> usize {
        self.spec.d()
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::NoReplicates);
        }
        if self.modes.is_empty() {
            return Err(Error::InvalidConfig("no record semantics requested".into()));
        }
        let work = (self.n() * self.d()) as u128 * self.replicates as u128;
        if work > self.work_budget {
            return Err(Error::TooLarge {
                what: "sampled coordinates n*d*R",
                requested: work,
                cap: self.work_budget,
            });
        }
        Ok(())
    }

    /// Whether a dense outcome table is kept (`n <= 20`).
    pub fn tracks_outcomes(&self) -> bool {
        self.n() <= MAX_TABLE_N
    }
}

/// Outcome counts with the replicate total.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmpiricalJointPmf {
    n: usize,
    counts: Vec<u64>,
    replicates: u64,
}

impl EmpiricalJointPmf {
    pub fn from_counts(n: usize, counts: Vec<u64>) -> Result<Self> {
        crate::pmf::check_table_n(n)?;
        if counts.len() != outcome_count(n) {
            return Err(Error::InvalidPmf(format!(
                "expected {} counts for n = {n}, got {}",
                outcome_count(n),
                counts.len()
            )));
        }
        let replicates = counts.iter().sum();
        if replicates == 0 {
            return Err(Error::NoReplicates);
        }
        Ok(EmpiricalJointPmf { n, counts, replicates })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn replicates(&self) -> u64 {
        self.replicates
    }

    pub fn pmf(&self) -> FloatPmf {
        let r = self.replicates as f64;
        JointPmf::from_parts(
            self.n,
            self.counts.iter().map(|&c| c as f64 / r).collect(),
            PmfSource::Empirical,
        )
    }

    /// `sqrt(p̂ (1 - p̂) / R)` per outcome.
    pub fn std_errors(&self) -> Vec<f64> {
        let r = self.replicates as f64;
        self.counts
            .iter()
            .map(|&c| {
                let p = c as f64 / r;
                (p * (1.0 - p) / r).sqrt()
            })
            .collect()
    }
}

/// Exact integer moments of L(n) across replicates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LSummary {
    pub replicates: u64,
    pub sum: u128,
    pub sum_sq: u128,
}

impl LSummary {
    pub fn push(&mut self, l: u64) {
        self.replicates += 1;
        self.sum += l as u128;
        self.sum_sq += (l as u128) * (l as u128);
    }

    pub fn merge(&mut self, other: &LSummary) {
        self.replicates += other.replicates;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
    }

    pub fn mean(&self) -> f64 {
        self.sum as f64 / self.replicates as f64
    }

    /// Unbiased sample variance; 0 for a single replicate.
    pub fn variance(&self) -> f64 {
        let r = self.replicates as f64;
        if self.replicates < 2 {
            return 0.0;
        }
        let mean = self.mean();
        ((self.sum_sq as f64 - r * mean * mean) / (r - 1.0)).max(0.0)
    }

    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        (self.variance() / self.replicates as f64).sqrt()
    }
}

/// Per-mode result of an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeResult {
    pub mode: SemanticsMode,
    /// Outcome counts; `None` when `n` is too large for a dense table.
    pub outcomes: Option<EmpiricalJointPmf>,
    /// `record_counts[j-1]` is the number of replicates with ζ_j = 1.
    pub record_counts: Vec<u64>,
    pub l_summary: LSummary,
}

impl ModeResult {
    /// Empirical P(ζ_j = 1), `j = 1..=n`.
    pub fn marginals(&self) -> Vec<f64> {
        let r = self.l_summary.replicates as f64;
        self.record_counts.iter().map(|&c| c as f64 / r).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub replicates: u64,
    pub modes: Vec<ModeResult>,
}

impl ExperimentResult {
    pub fn mode(&self, mode: SemanticsMode) -> Option<&ModeResult> {
        self.modes.iter().find(|m| m.mode == mode)
    }
}

#[derive(Clone)]
struct Tally {
    outcomes: Vec<Vec<u64>>,
    records: Vec<Vec<u64>>,
    l: Vec<LSummary>,
}

impl Tally {
    fn new(modes: usize, n: usize, track: bool) -> Self {
        let table = if track { outcome_count(n) } else { 0 };
        Tally {
            outcomes: vec![vec![0; table]; modes],
            records: vec![vec![0; n]; modes],
            l: vec![LSummary::default(); modes],
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        for m in 0..self.l.len() {
            add_into(&mut self.outcomes[m], &other.outcomes[m]);
            add_into(&mut self.records[m], &other.records[m]);
            self.l[m].merge(&other.l[m]);
        }
        self
    }
}

fn add_into(a: &mut [u64], b: &[u64]) {
    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
}

/// Samples `R` paths and tallies indicators under each requested mode.
///
/// Runs on the current rayon pool; the result is the same for any pool size.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let (n, d) = (cfg.n(), cfg.d());
    let track = cfg.tracks_outcomes();
    let modes = &cfg.modes;

    let tally = (0..cfg.replicates)
        .into_par_iter()
        .fold(
            || (Tally::new(modes.len(), n, track), vec![0.0; n * d]),
            |(mut tally, mut buf), t| {
                let mut rng = replicate_rng(cfg.seed, t);
                fill_path(&cfg.spec, &mut rng, &mut buf);
                for (m, &mode) in modes.iter().enumerate() {
                    let mut det = Detector::new(mode);
                    let mut outcome = 0usize;
                    for (j, x) in buf.chunks_exact(d).enumerate() {
                        let bit = det.step_coords(x).expect("sampled coordinates are finite");
                        if bit {
                            tally.records[m][j] += 1;
                            if j > 0 && track {
                                outcome |= 1 << (j - 1);
                            }
                        }
                    }
                    if track {
                        tally.outcomes[m][outcome] += 1;
                    }
                    tally.l[m].push(det.count());
                }
                (tally, buf)
            },
        )
        .map(|(tally, _)| tally)
        .reduce(|| Tally::new(modes.len(), n, track), Tally::merge);

    let results = modes
        .iter()
        .enumerate()
        .map(|(m, &mode)| ModeResult {
            mode,
            outcomes: track.then(|| EmpiricalJointPmf {
                n,
                counts: tally.outcomes[m].clone(),
                replicates: cfg.replicates,
            }),
            record_counts: tally.records[m].clone(),
            l_summary: tally.l[m],
        })
        .collect();
    Ok(ExperimentResult {
        replicates: cfg.replicates,
        modes: results,
    })
}

/// Agreement between an empirical table and a reference law.
#[derive(Debug, Clone, PartialEq)]
pub struct TvReport {
    pub tv: f64,
    /// `(p̂ - p) / sqrt(p (1 - p) / R)` per outcome; 0 where both agree on a
    /// degenerate cell, infinite where they disagree on one.
    pub z_scores: Vec<f64>,
    pub max_abs_z: f64,
}

pub fn empirical_tv_report(emp: &EmpiricalJointPmf, reference: &FloatPmf) -> Result<TvReport> {
    if emp.n() != reference.n() {
        return Err(Error::LengthMismatch {
            expected: reference.n(),
            got: emp.n(),
        });
    }
    let hat = emp.pmf();
    let tv = crate::stats::tv_distance(&hat, reference)?;
    let r = emp.replicates() as f64;
    let z_scores: Vec<f64> = hat
        .probs()
        .iter()
        .zip(reference.probs())
        .map(|(&ph, &p)| {
            let se = (p * (1.0 - p) / r).sqrt();
            let diff = ph - p;
            if se > 0.0 {
                diff / se
            } else if diff.abs() <= 1e-15 {
                0.0
            } else {
                f64::INFINITY.copysign(diff)
            }
        })
        .collect();
    let max_abs_z = z_scores.iter().fold(0.0, |m: f64, z| m.max(z.abs()));
    Ok(TvReport { tv, z_scores, max_abs_z })
}
