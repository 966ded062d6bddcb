//! Flat `key = value` experiment configs.
//!
//! Recognized keys:
//!
//! | key | meaning |
//! |---|---|
//! | `n`, `d` | path length and dimension (required) |
//! | `mode` | `chain`, `dominance` or `both` (default `both`) |
//! | `replicates` | Monte Carlo replicates (default 100000) |
//! | `seed` | master seed (default 0) |
//! | `spec.default` | law for every index and coordinate |
//! | `spec.coordI` | law for coordinate `I` at every index |
//! | `spec.jN` | law for every coordinate at index `N` |
//! | `spec.jN.coordI` | law for one cell |
//! | `reference` | `auto` or `none` (default `auto`) |
//! | `gridpoints` | coarse quadrature grid (default 1024) |
//! | `cap_states` | enumeration cap (default 2000000) |
//!
//! Laws are templates such as `uniform 0 2`, `gaussian 0 1`, `exponential 1`
//! or `uniform 0 linear(0,1)`. More specific `spec.*` keys win.

use std::collections::BTreeMap;
use std::str::FromStr;

use recind_core::{DistributionSpec, LawTemplate, Marginal, SemanticsMode, DEFAULT_STATE_CAP};

use crate::error::{CliError, CliResult};
use crate::ModeSelection;

pub const DEFAULT_REPLICATES: u64 = 100_000;
pub const DEFAULT_GRIDPOINTS: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceChoice {
    Auto,
    None,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum SpecKey {
    Default,
    Coord(usize),
    Index(usize),
    Cell(usize, usize),
}

impl SpecKey {
    fn parse(rest: &str) -> Option<Self> {
        let num = |s: &str, prefix: &str| s.strip_prefix(prefix).and_then(|v| v.parse::<usize>().ok()).filter(|&v| v >= 1);
        let parts: Vec<&str> = rest.split('.').collect();
        match parts.as_slice() {
            ["default"] => Some(SpecKey::Default),
            [c] if c.starts_with("coord") => num(c, "coord").map(SpecKey::Coord),
            [j] if j.starts_with('j') => num(j, "j").map(SpecKey::Index),
            [j, c] => Some(SpecKey::Cell(num(j, "j")?, num(c, "coord")?)),
            _ => None,
        }
    }

    fn key(&self) -> String {
        match self {
            SpecKey::Default => "spec.default".into(),
            SpecKey::Coord(i) => format!("spec.coord{i}"),
            SpecKey::Index(j) => format!("spec.j{j}"),
            SpecKey::Cell(j, i) => format!("spec.j{j}.coord{i}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulateConfig {
    pub n: usize,
    pub d: usize,
    pub mode: ModeSelection,
    pub replicates: u64,
    pub seed: u64,
    pub reference: ReferenceChoice,
    pub gridpoints: usize,
    pub cap_states: u128,
    laws: BTreeMap<SpecKey, LawTemplate>,
}

fn parse_value<T: FromStr>(line: usize, key: &str, value: &str) -> CliResult<T> {
    value
        .parse()
        .map_err(|_| CliError::input(format!("line {line}: invalid value '{value}' for '{key}'")))
}

impl FromStr for SimulateConfig {
    type Err = CliError;

    fn from_str(text: &str) -> CliResult<Self> {
        let mut seen = BTreeMap::new();
        let mut n = None;
        let mut d = None;
        let mut cfg = SimulateConfig {
            n: 0,
            d: 0,
            mode: ModeSelection::Both,
            replicates: DEFAULT_REPLICATES,
            seed: 0,
            reference: ReferenceChoice::Auto,
            gridpoints: DEFAULT_GRIDPOINTS,
            cap_states: DEFAULT_STATE_CAP,
            laws: BTreeMap::new(),
        };
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = body
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| CliError::input(format!("line {line}: expected 'key = value'")))?;
            if let Some(prev) = seen.insert(key.to_string(), line) {
                return Err(CliError::input(format!("line {line}: '{key}' already set on line {prev}")));
            }
            match key {
                "n" => n = Some(parse_value::<usize>(line, key, value)?),
                "d" => d = Some(parse_value::<usize>(line, key, value)?),
                "mode" => cfg.mode = parse_value(line, key, value)?,
                "replicates" => cfg.replicates = parse_value(line, key, value)?,
                "seed" => cfg.seed = parse_value(line, key, value)?,
                "gridpoints" => cfg.gridpoints = parse_value(line, key, value)?,
                "cap_states" => cfg.cap_states = parse_value(line, key, value)?,
                "reference" => {
                    cfg.reference = match value {
                        "auto" => ReferenceChoice::Auto,
                        "none" => ReferenceChoice::None,
                        _ => return Err(CliError::input(format!("line {line}: reference must be 'auto' or 'none'"))),
                    }
                }
                _ => {
                    let spec_key = key
                        .strip_prefix("spec.")
                        .and_then(SpecKey::parse)
                        .ok_or_else(|| CliError::input(format!("line {line}: unknown key '{key}'")))?;
                    let law: LawTemplate = value
                        .parse()
                        .map_err(|e| CliError::input(format!("line {line}: {e}")))?;
                    cfg.laws.insert(spec_key, law);
                }
            }
        }
        cfg.n = n.ok_or_else(|| CliError::input("missing required key 'n'"))?;
        cfg.d = d.ok_or_else(|| CliError::input("missing required key 'd'"))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

impl SimulateConfig {
    fn validate(&self) -> CliResult<()> {
        if self.n == 0 || self.d == 0 {
            return Err(CliError::input("n and d must be at least 1"));
        }
        if self.replicates == 0 {
            return Err(CliError::input("replicates must be at least 1"));
        }
        if self.gridpoints < 2 {
            return Err(CliError::input("gridpoints must be at least 2"));
        }
        for key in self.laws.keys() {
            let (j, i) = match *key {
                SpecKey::Default => (None, None),
                SpecKey::Coord(i) => (None, Some(i)),
                SpecKey::Index(j) => (Some(j), None),
                SpecKey::Cell(j, i) => (Some(j), Some(i)),
            };
            if j.is_some_and(|j| j > self.n) || i.is_some_and(|i| i > self.d) {
                return Err(CliError::input(format!("'{}' is outside n = {}, d = {}", key.key(), self.n, self.d)));
            }
        }
        Ok(())
    }

    pub fn modes(&self) -> Vec<SemanticsMode> {
        self.mode.modes()
    }

    fn template(&self, j: usize, i: usize) -> Option<&LawTemplate> {
        [SpecKey::Cell(j, i), SpecKey::Index(j), SpecKey::Coord(i), SpecKey::Default]
            .iter()
            .find_map(|k| self.laws.get(k))
    }

    /// Resolves every cell; cells without a law default to `uniform 0 1`.
    pub fn distribution(&self) -> CliResult<DistributionSpec> {
        let fallback = LawTemplate::constant(Marginal::Uniform { a: 0.0, b: 1.0 });
        Ok(DistributionSpec::from_fn(self.n, self.d, |j, i| {
            self.template(j, i).unwrap_or(&fallback).at(j)
        })?)
    }

    /// Effective settings as sorted `key = value` lines.
    pub fn echo(&self) -> Vec<String> {
        let mut lines = vec![
            format!("cap_states = {}", self.cap_states),
            format!("d = {}", self.d),
            format!("gridpoints = {}", self.gridpoints),
            format!("mode = {}", self.mode),
            format!("n = {}", self.n),
            format!(
                "reference = {}",
                match self.reference {
                    ReferenceChoice::Auto => "auto",
                    ReferenceChoice::None => "none",
                }
            ),
            format!("replicates = {}", self.replicates),
            format!("seed = {}", self.seed),
        ];
        lines.extend(self.laws.iter().map(|(k, v)| format!("{} = {v}", k.key())));
        lines.sort();
        lines
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_most_specific_wins() {
        let cfg: SimulateConfig = "n = 3\nd = 2\nspec.default = uniform 0 1\nspec.coord2 = gaussian 0 1\n\
                                   spec.j3 = exponential 2\nspec.j3.coord1 = uniform 0 5\n"
            .parse()
            .unwrap();
        let s = cfg.distribution().unwrap();
        assert_eq!(*s.law(1, 1), Marginal::Uniform { a: 0.0, b: 1.0 });
        assert_eq!(*s.law(1, 2), Marginal::Gaussian { mean: 0.0, sd: 1.0 });
        assert_eq!(*s.law(3, 2), Marginal::Exponential { rate: 2.0 });
        assert_eq!(*s.law(3, 1), Marginal::Uniform { a: 0.0, b: 5.0 });
    }

    #[test]
    fn linear_parameters() {
        let cfg: SimulateConfig = "n = 3\nd = 1\nspec.default = uniform 0 linear(0,1)\n".parse().unwrap();
        let s = cfg.distribution().unwrap();
        assert_eq!(*s.law(3, 1), Marginal::Uniform { a: 0.0, b: 3.0 });
    }

    #[test]
    fn rejects_bad_input() {
        for text in [
            "n = 3\n",
            "n = 3\nd = 1\nbogus = 1\n",
            "n = 3\nd = 1\nn = 4\n",
            "n = 3\nd = 1\nspec.j4 = uniform 0 1\n",
            "n = 3\nd = 1\nspec.default = cauchy 0 1\n",
            "n = 3\nd = 1\nreplicates = 0\n",
            "n = 3\nd = 1\nmode = sideways\n",
            "n = 3 d = 1\n",
        ] {
            let err = text.parse::<SimulateConfig>().unwrap_err();
            assert_eq!(err.exit_code(), 2, "{text:?}");
        }
    }

    #[test]
    fn echo_is_sorted_and_stable() {
        let cfg: SimulateConfig = "d = 1\nn = 2\nseed = 7\nspec.j2 = uniform 0 2\n".parse().unwrap();
        let echo = cfg.echo();
        let mut sorted = echo.clone();
        sorted.sort();
        assert_eq!(echo, sorted);
        assert!(echo.contains(&"spec.j2 = uniform 0 2".to_string()));
    }
}
