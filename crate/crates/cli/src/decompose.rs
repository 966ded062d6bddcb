//! Checks `E ∏ h_j(ζ_j)` against its pattern decomposition.

use num::{BigRational, One, Signed, ToPrimitive};
use recind_core::pmf::{format_rational, parse_outcome_label, parse_rational, FLOAT_NORMALIZATION_TOL};
use recind_core::{
    expectation_direct, expectation_via_decomposition, product_of_marginal_expectations, HTable, JointPmf, PmfSource,
    SemanticsMode,
};
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::input::parse_pmf_csv;
use crate::output::{TOOL, VERSION};

/// Tolerance for the float identity check.
pub const FLOAT_IDENTITY_TOL: f64 = 1e-12;

#[derive(Debug, Serialize)]
pub struct Value {
    /// `num/den` in exact arithmetic, absent in float arithmetic.
    pub exact: Option<String>,
    pub decimal: f64,
}

#[derive(Debug, Serialize)]
pub struct DecomposeReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub n: usize,
    /// `exact` when the table sums to exactly 1, otherwise `float`.
    pub arithmetic: &'static str,
    pub direct: Value,
    pub decomposition: Value,
    pub marginal_product: Value,
    pub direct_minus_decomposition: Value,
    pub direct_minus_marginal_product: Value,
    pub identity_holds: bool,
}

fn exact_value(q: &BigRational) -> Value {
    Value {
        exact: Some(format_rational(q)),
        decimal: q.to_f64().unwrap_or(f64::NAN),
    }
}

fn float_value(x: f64) -> Value {
    Value { exact: None, decimal: x }
}

/// Outcome probabilities from an `exact` JSON report or an `outcome,prob` CSV.
/// A JSON report with several modes is narrowed by `mode`.
pub fn parse_pmf_input(text: &str, mode: Option<SemanticsMode>) -> CliResult<(usize, Vec<BigRational>)> {
    if !text.trim_start().starts_with('{') {
        return parse_pmf_csv(text);
    }
    let v: serde_json::Value = serde_json::from_str(text)?;
    let entry = match v.get("results").and_then(|r| r.as_array()) {
        Some(results) => {
            let mut candidates: Vec<&serde_json::Value> = results
                .iter()
                .filter(|r| mode.is_none_or(|m| r["mode"].as_str() == Some(m.as_str())))
                .collect();
            if candidates.len() != 1 {
                return Err(CliError::input(format!(
                    "pmf file holds {} matching results; select one with --mode",
                    candidates.len()
                )));
            }
            candidates.remove(0)
        }
        None => &v,
    };
    let outcomes = entry["outcomes"]
        .as_array()
        .ok_or_else(|| CliError::input("pmf JSON has no 'outcomes' list"))?;
    let mut csv = String::new();
    for o in outcomes {
        let label = o["outcome"].as_str().ok_or_else(|| CliError::input("outcome entry without 'outcome'"))?;
        let prob = o["prob"].as_str().ok_or_else(|| CliError::input("outcome entry without string 'prob'"))?;
        if parse_outcome_label(label).is_none() || parse_rational(prob).is_none() {
            return Err(CliError::input(format!("bad outcome entry '{label}': '{prob}'")));
        }
        csv.push_str(&format!("{label},{prob}\n"));
    }
    if outcomes.len() == 1 && outcomes[0]["outcome"].as_str() == Some("") {
        return Ok((1, vec![parse_rational(outcomes[0]["prob"].as_str().unwrap_or("")).unwrap_or_default()]));
    }
    parse_pmf_csv(&csv)
}

pub fn run_decompose(n: usize, h: Vec<(BigRational, BigRational)>, pmf_n: usize, probs: Vec<BigRational>) -> CliResult<DecomposeReport> {
    if pmf_n != n {
        return Err(CliError::input(format!("pmf is for n = {pmf_n}, but n = {n} was requested")));
    }
    if h.len() != n.saturating_sub(1) {
        return Err(CliError::input(format!("h-table has {} rows, expected {}", h.len(), n - 1)));
    }
    let total = probs.iter().fold(BigRational::from_integer(0.into()), |a, p| a + p);
    let (arithmetic, direct, decomposition, marginal_product, d1, d2, holds) = if total.is_one() {
        let pmf = JointPmf::new(n, probs, PmfSource::Supplied)?;
        let table = HTable::new(h);
        let direct = expectation_direct(&table, &pmf)?;
        let decomposition = expectation_via_decomposition(&table, &pmf)?;
        let product = product_of_marginal_expectations(&table, &pmf)?;
        let d1 = &direct - &decomposition;
        let d2 = &direct - &product;
        let holds = d1 == BigRational::from_integer(0.into());
        (
            "exact",
            exact_value(&direct),
            exact_value(&decomposition),
            exact_value(&product),
            exact_value(&d1),
            exact_value(&d2),
            holds,
        )
    } else {
        if !(total.clone() - BigRational::one()).abs().to_f64().is_some_and(|e| e <= FLOAT_NORMALIZATION_TOL) {
            return Err(CliError::input(format!(
                "pmf sums to {}, not 1",
                total.to_f64().unwrap_or(f64::NAN)
            )));
        }
        let f = |q: &BigRational| q.to_f64().unwrap_or(f64::NAN);
        let pmf = JointPmf::new(n, probs.iter().map(f).collect(), PmfSource::Supplied)?;
        let table = HTable::new(h.iter().map(|(a, b)| (f(a), f(b))).collect());
        table.check_finite()?;
        let direct = expectation_direct(&table, &pmf)?;
        let decomposition = expectation_via_decomposition(&table, &pmf)?;
        let product = product_of_marginal_expectations(&table, &pmf)?;
        let scale = direct.abs().max(1.0);
        let holds = (direct - decomposition).abs() <= FLOAT_IDENTITY_TOL * scale;
        (
            "float",
            float_value(direct),
            float_value(decomposition),
            float_value(product),
            float_value(direct - decomposition),
            float_value(direct - product),
            holds,
        )
    };
    Ok(DecomposeReport {
        tool: TOOL,
        version: VERSION,
        n,
        arithmetic,
        direct,
        decomposition,
        marginal_product,
        direct_minus_decomposition: d1,
        direct_minus_marginal_product: d2,
        identity_holds: holds,
    })
}
