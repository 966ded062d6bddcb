//! Marginal laws and per-index, per-coordinate distribution specs.

use std::fmt;
use std::str::FromStr;

use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// A continuous law on the line, truncated to a finite support for quadrature.
pub trait ContinuousLaw {
    fn cdf(&self, x: f64) -> f64;
    fn pdf(&self, x: f64) -> f64;
    /// Interval carrying all but a negligible amount of mass.
    fn support(&self) -> (f64, f64);
}

// Tail cut-offs, both leave less than 1e-18 of mass outside.
const GAUSSIAN_SDS: f64 = 9.0;
const EXPONENTIAL_MEANS: f64 = 45.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Marginal {
    Uniform { a: f64, b: f64 },
    Gaussian { mean: f64, sd: f64 },
    Exponential { rate: f64 },
}

impl Marginal {
    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        Marginal::Uniform { a, b }.validated()
    }

    pub fn gaussian(mean: f64, sd: f64) -> Result<Self> {
        Marginal::Gaussian { mean, sd }.validated()
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        Marginal::Exponential { rate }.validated()
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Marginal::Uniform { a, b } => a.is_finite() && b.is_finite() && b > a,
            Marginal::Gaussian { mean, sd } => mean.is_finite() && sd.is_finite() && sd > 0.0,
            Marginal::Exponential { rate } => rate.is_finite() && rate > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidSpec(format!("bad parameters for {self}")))
        }
    }

    fn validated(self) -> Result<Self> {
        self.validate().map(|_| self)
    }

    /// Inverse CDF at `u ∈ (0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        match *self {
            Marginal::Uniform { a, b } => a + (b - a) * u,
            Marginal::Gaussian { mean, sd } => mean + sd * standard_normal().inverse_cdf(u),
            Marginal::Exponential { rate } => -(-u).ln_1p() / rate,
        }
    }
}

fn standard_normal() -> Normal {
    Normal::standard()
}

impl ContinuousLaw for Marginal {
    fn cdf(&self, x: f64) -> f64 {
        match *self {
            Marginal::Uniform { a, b } => ((x - a) / (b - a)).clamp(0.0, 1.0),
            Marginal::Gaussian { mean, sd } => standard_normal().cdf((x - mean) / sd),
            Marginal::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1()
                }
            }
        }
    }

    fn pdf(&self, x: f64) -> f64 {
        match *self {
            Marginal::Uniform { a, b } => {
                if (a..=b).contains(&x) {
                    1.0 / (b - a)
                } else {
                    0.0
                }
            }
            Marginal::Gaussian { mean, sd } => standard_normal().pdf((x - mean) / sd) / sd,
            Marginal::Exponential { rate } => {
                if x < 0.0 {
                    0.0
                } else {
                    rate * (-rate * x).exp()
                }
            }
        }
    }

    fn support(&self) -> (f64, f64) {
        match *self {
            Marginal::Uniform { a, b } => (a, b),
            Marginal::Gaussian { mean, sd } => (mean - GAUSSIAN_SDS * sd, mean + GAUSSIAN_SDS * sd),
            Marginal::Exponential { rate } => (0.0, EXPONENTIAL_MEANS / rate),
        }
    }
}

impl fmt::Display for Marginal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Marginal::Uniform { a, b } => write!(f, "uniform {a} {b}"),
            Marginal::Gaussian { mean, sd } => write!(f, "gaussian {mean} {sd}"),
            Marginal::Exponential { rate } => write!(f, "exponential {rate}"),
        }
    }
}

/// A law parameter as a function of the observation index `j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Param {
    Const(f64),
    /// `intercept + slope * j`
    Linear { intercept: f64, slope: f64 },
}

impl Param {
    pub fn at(&self, j: usize) -> f64 {
        match *self {
            Param::Const(v) => v,
            Param::Linear { intercept, slope } => intercept + slope * j as f64,
        }
    }
}

impl FromStr for Param {
    type Err = Error;

    /// `2.5` or `linear(a,b)` meaning `a + b*j`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidSpec(format!("cannot parse parameter '{s}'"));
        if let Some(inner) = s.strip_prefix("linear(").and_then(|r| r.strip_suffix(')')) {
            let (a, b) = inner.split_once(',').ok_or_else(bad)?;
            let intercept = a.trim().parse::<f64>().map_err(|_| bad())?;
            let slope = b.trim().parse::<f64>().map_err(|_| bad())?;
            if !(intercept.is_finite() && slope.is_finite()) {
                return Err(bad());
            }
            return Ok(Param::Linear { intercept, slope });
        }
        let v = s.parse::<f64>().map_err(|_| bad())?;
        if v.is_finite() {
            Ok(Param::Const(v))
        } else {
            Err(bad())
        }
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Param::Const(v) => write!(f, "{v}"),
            Param::Linear { intercept, slope } => write!(f, "linear({intercept},{slope})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Uniform,
    Gaussian,
    Exponential,
}

impl Family {
    fn arity(self) -> usize {
        match self {
            Family::Uniform | Family::Gaussian => 2,
            Family::Exponential => 1,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Family::Uniform => "uniform",
            Family::Gaussian => "gaussian",
            Family::Exponential => "exponential",
        }
    }
}

/// A law family with index-dependent parameters, e.g. `uniform 0 linear(0,1)`
/// for `X_j ~ U[0, j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LawTemplate {
    pub family: Family,
    pub params: Vec<Param>,
}

impl LawTemplate {
    pub fn constant(m: Marginal) -> Self {
        let (family, params) = match m {
            Marginal::Uniform { a, b } => (Family::Uniform, vec![a, b]),
            Marginal::Gaussian { mean, sd } => (Family::Gaussian, vec![mean, sd]),
            Marginal::Exponential { rate } => (Family::Exponential, vec![rate]),
        };
        LawTemplate {
            family,
            params: params.into_iter().map(Param::Const).collect(),
        }
    }

    /// The concrete law at index `j` (1-based).
    pub fn at(&self, j: usize) -> Result<Marginal> {
        let p: Vec<f64> = self.params.iter().map(|p| p.at(j)).collect();
        let m = match self.family {
            Family::Uniform => Marginal::Uniform { a: p[0], b: p[1] },
            Family::Gaussian => Marginal::Gaussian { mean: p[0], sd: p[1] },
            Family::Exponential => Marginal::Exponential { rate: p[0] },
        };
        m.validate()
            .map_err(|_| Error::InvalidSpec(format!("'{self}' gives invalid law {m} at j = {j}")))?;
        Ok(m)
    }
}

impl FromStr for LawTemplate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut words = s.split_whitespace();
        let family = match words.next().map(str::to_ascii_lowercase).as_deref() {
            Some("uniform") => Family::Uniform,
            Some("gaussian") | Some("normal") => Family::Gaussian,
            Some("exponential") => Family::Exponential,
            _ => return Err(Error::InvalidSpec(format!("unknown law '{}'", s.trim()))),
        };
        let params = words.map(str::parse).collect::<Result<Vec<Param>>>()?;
        if params.len() != family.arity() {
            return Err(Error::InvalidSpec(format!(
                "{} takes {} parameters, got {}",
                family.name(),
                family.arity(),
                params.len()
            )));
        }
        Ok(LawTemplate { family, params })
    }
}

impl fmt::Display for LawTemplate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.family.name())?;
        for p in &self.params {
            write!(f, " {p}")?;
        }
        Ok(())
    }
}

/// Independent marginal laws for every index `j` in `1..=n` and coordinate
/// `i` in `1..=d`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionSpec {
    n: usize,
    d: usize,
    laws: Vec<Marginal>,
}

impl DistributionSpec {
    pub fn iid(n: usize, d: usize, law: Marginal) -> Result<Self> {
        DistributionSpec::from_fn(n, d, |_, _| Ok(law))
    }

    /// Builds the spec from `f(j, i)` with 1-based indices.
    pub fn from_fn<F>(n: usize, d: usize, mut f: F) -> Result<Self>
    where
        F: FnMut(usize, usize) -> Result<Marginal>,
    {
        if n == 0 || d == 0 {
            return Err(Error::InvalidSpec(format!("need n >= 1 and d >= 1, got n = {n}, d = {d}")));
        }
        let mut laws = Vec::with_capacity(n * d);
        for j in 1..=n {
            for i in 1..=d {
                let m = f(j, i)?;
                m.validate()?;
                laws.push(m);
            }
        }
        Ok(DistributionSpec { n, d, laws })
    }

    /// One template per coordinate, applied across all indices.
    pub fn from_templates(n: usize, templates: &[LawTemplate]) -> Result<Self> {
        DistributionSpec::from_fn(n, templates.len(), |j, i| templates[i - 1].at(j))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn law(&self, j: usize, i: usize) -> &Marginal {
        &self.laws[(j - 1) * self.d + (i - 1)]
    }

    /// Laws in sampling order: index-major, coordinate-minor.
    pub fn laws(&self) -> &[Marginal] {
        &self.laws
    }

    /// True when each coordinate has the same law at every index, the case
    /// where indicators reduce to uniformly random rank orders.
    pub fn is_iid_per_coordinate(&self) -> bool {
        (1..=self.n).all(|j| (1..=self.d).all(|i| self.law(j, i) == self.law(1, i)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn templates_parse_and_schedule() {
        let t: LawTemplate = "uniform 0 linear(0,1)".parse().unwrap();
        assert_eq!(t.at(3).unwrap(), Marginal::Uniform { a: 0.0, b: 3.0 });
        assert_eq!(t.to_string(), "uniform 0 linear(0,1)");
        let e: LawTemplate = "exponential 2".parse().unwrap();
        assert_eq!(e.at(9).unwrap(), Marginal::Exponential { rate: 2.0 });
        assert!("uniform 1".parse::<LawTemplate>().is_err());
        assert!("cauchy 0 1".parse::<LawTemplate>().is_err());
        assert!("uniform 0 x".parse::<LawTemplate>().is_err());
        // b = 2 - j collapses onto a at j = 2
        let shrinking: LawTemplate = "uniform 0 linear(2,-1)".parse().unwrap();
        assert!(shrinking.at(1).is_ok());
        assert!(shrinking.at(2).is_err());
    }

    #[test]
    fn parameter_validation() {
        assert!(Marginal::uniform(1.0, 1.0).is_err());
        assert!(Marginal::gaussian(0.0, 0.0).is_err());
        assert!(Marginal::exponential(-1.0).is_err());
        assert!(Marginal::gaussian(0.0, f64::NAN).is_err());
    }

    #[test]
    fn quantiles_invert_cdfs() {
        let laws = [
            Marginal::uniform(-1.0, 3.0).unwrap(),
            Marginal::gaussian(2.0, 0.5).unwrap(),
            Marginal::exponential(1.5).unwrap(),
        ];
        for m in laws {
            for u in [0.001, 0.2, 0.5, 0.9, 0.999] {
                let x = m.quantile(u);
                assert!((m.cdf(x) - u).abs() < 1e-9, "{m} at {u}");
            }
            let (lo, hi) = m.support();
            assert!(m.cdf(lo) < 1e-15 && 1.0 - m.cdf(hi) < 1e-15);
        }
    }

    #[test]
    fn iid_detection() {
        let u = Marginal::uniform(0.0, 1.0).unwrap();
        let g = Marginal::gaussian(0.0, 1.0).unwrap();
        assert!(DistributionSpec::iid(4, 2, u).unwrap().is_iid_per_coordinate());
        let mixed = DistributionSpec::from_fn(3, 2, |_, i| Ok(if i == 1 { u } else { g })).unwrap();
        assert!(mixed.is_iid_per_coordinate());
        let t: LawTemplate = "uniform 0 linear(0,1)".parse().unwrap();
        let growing = DistributionSpec::from_templates(3, &[t]).unwrap();
        assert!(!growing.is_iid_per_coordinate());
        assert_eq!(*growing.law(2, 1), Marginal::Uniform { a: 0.0, b: 2.0 });
    }
}
