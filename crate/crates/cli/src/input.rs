//! Parsers for path files, h-tables and probability tables.

use num::BigRational;
use recind_core::pmf::{parse_outcome_label, parse_rational};
use recind_core::{Observation, Path};

use crate::error::{CliError, CliResult};

/// Non-blank lines with `#` comments stripped, paired with 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let body = line.split('#').next().unwrap_or("").trim();
        (!body.is_empty()).then_some((i + 1, body))
    })
}

/// One observation per line, coordinates separated by commas.
pub fn parse_path(text: &str) -> CliResult<Path> {
    let mut rows: Vec<Observation> = Vec::new();
    for (line, body) in content_lines(text) {
        let coords = body
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|_| CliError::input(format!("line {line}: cannot parse '{}' as a number", t.trim())))
            })
            .collect::<CliResult<Vec<f64>>>()?;
        let obs = Observation::new(coords).map_err(|e| CliError::input(format!("line {line}: {e}")))?;
        if let Some(first) = rows.first() {
            if first.dim() != obs.dim() {
                return Err(CliError::input(format!(
                    "line {line}: expected {} coordinates, found {}",
                    first.dim(),
                    obs.dim()
                )));
            }
        }
        rows.push(obs);
    }
    if rows.is_empty() {
        return Err(CliError::input("input contains no observations"));
    }
    Ok(Path::new(rows)?)
}

/// `j,h0,h1` rows for `j = 2..=n`, values as integers, decimals or `num/den`.
pub fn parse_htable(text: &str, n: usize) -> CliResult<Vec<(BigRational, BigRational)>> {
    let mut slots: Vec<Option<(BigRational, BigRational)>> = vec![None; n.saturating_sub(1)];
    for (line, body) in content_lines(text) {
        let fields: Vec<&str> = body.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(CliError::input(format!("line {line}: expected 'j,h0,h1'")));
        }
        let j: usize = fields[0]
            .parse()
            .map_err(|_| CliError::input(format!("line {line}: bad index '{}'", fields[0])))?;
        if !(2..=n).contains(&j) {
            return Err(CliError::input(format!("line {line}: index {j} outside 2..={n}")));
        }
        let value = |s: &str| {
            parse_rational(s).ok_or_else(|| CliError::input(format!("line {line}: cannot parse value '{s}'")))
        };
        let pair = (value(fields[1])?, value(fields[2])?);
        if slots[j - 2].replace(pair).is_some() {
            return Err(CliError::input(format!("line {line}: index {j} given twice")));
        }
    }
    slots
        .into_iter()
        .enumerate()
        .map(|(i, s)| s.ok_or_else(|| CliError::input(format!("h-table is missing index {}", i + 2))))
        .collect()
}

/// Outcome probabilities from `outcome,prob` rows; absent outcomes are 0.
/// Returns the path length implied by the labels.
pub fn parse_pmf_csv(text: &str) -> CliResult<(usize, Vec<BigRational>)> {
    let mut entries: Vec<(usize, u64, BigRational)> = Vec::new();
    for (line, body) in content_lines(text) {
        let (label, prob) = body
            .split_once(',')
            .ok_or_else(|| CliError::input(format!("line {line}: expected 'outcome,prob'")))?;
        if label.trim() == "outcome" {
            continue;
        }
        let code = parse_outcome_label(label)
            .ok_or_else(|| CliError::input(format!("line {line}: bad outcome '{}'", label.trim())))?;
        let p = parse_rational(prob)
            .ok_or_else(|| CliError::input(format!("line {line}: cannot parse probability '{}'", prob.trim())))?;
        entries.push((label.trim().len() + 1, code, p));
    }
    let n = entries
        .first()
        .map(|e| e.0)
        .ok_or_else(|| CliError::input("probability table is empty"))?;
    if n > recind_core::pmf::MAX_TABLE_N {
        return Err(CliError::Cap(format!("path length {n} exceeds the table cap")));
    }
    let mut probs = vec![None; 1 << (n - 1)];
    for (len, code, p) in entries {
        if len != n {
            return Err(CliError::input("outcome labels have different lengths"));
        }
        if probs[code as usize].replace(p).is_some() {
            return Err(CliError::input(format!("outcome {code} given twice")));
        }
    }
    Ok((n, probs.into_iter().map(|p| p.unwrap_or_default()).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_files() {
        let p = parse_path("# header\n0,0\n10, -5  # note\n\n1,1\n").unwrap();
        assert_eq!((p.len(), p.dim()), (3, 2));
        assert!(matches!(parse_path(""), Err(CliError::Input(_))));
        assert!(matches!(parse_path("# only a comment\n"), Err(CliError::Input(_))));
        let err = parse_path("1,2\n3\n").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        let err = parse_path("1\nx\n").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        assert!(parse_path("nan\n").is_err());
    }

    #[test]
    fn htables() {
        let h = parse_htable("3,1/2,2\n2,0,1\n", 3).unwrap();
        assert_eq!(h[0].1, BigRational::from_integer(1.into()));
        assert_eq!(h[1].0, BigRational::new(1.into(), 2.into()));
        assert!(parse_htable("2,0,1\n", 3).is_err());
        assert!(parse_htable("2,0,1\n2,0,1\n3,1,1\n", 3).is_err());
        assert!(parse_htable("4,0,1\n", 3).is_err());
    }

    #[test]
    fn pmf_csv() {
        let (n, p) = parse_pmf_csv("outcome,prob\n00,1/3\n10,1/3\n01,1/6\n11,1/6\n").unwrap();
        assert_eq!(n, 3);
        assert_eq!(p[2], BigRational::new(1.into(), 6.into()));
        let (n, p) = parse_pmf_csv("1,0.25\n").unwrap();
        assert_eq!((n, p.len()), (2, 2));
        assert!(parse_pmf_csv("1,0.5\n00,0.5\n").is_err());
    }
}
