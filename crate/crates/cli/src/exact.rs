//! Exact enumeration reports.

use num::{BigRational, ToPrimitive};
use recind_core::oracle::{joint_pmf_iid_with_cap, rank_tuple_count};
use recind_core::pmf::{format_rational, outcome_label};
use recind_core::stats::max_abs_correlation;
use recind_core::{pairwise_covariances, product_of_marginals, tv_distance, ExactPmf, SemanticsMode};
use serde::Serialize;

use crate::error::CliResult;
use crate::output::{TOOL, VERSION};

#[derive(Debug, Serialize)]
pub struct ExactReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub n: usize,
    pub d: usize,
    pub cap_states: u128,
    pub rank_tuples: u128,
    pub results: Vec<ExactModeReport>,
}

#[derive(Debug, Serialize)]
pub struct OutcomeEntry {
    /// ζ_2 … ζ_n as a bit string.
    pub outcome: String,
    pub prob: String,
    pub decimal: f64,
}

#[derive(Debug, Serialize)]
pub struct MarginalEntry {
    pub j: usize,
    pub prob: String,
    pub decimal: f64,
}

#[derive(Debug, Serialize)]
pub struct CovarianceEntry {
    pub j: usize,
    pub k: usize,
    pub cov: String,
}

#[derive(Debug, Serialize)]
pub struct ExactModeReport {
    pub mode: String,
    pub source: &'static str,
    pub outcomes: Vec<OutcomeEntry>,
    pub marginals: Vec<MarginalEntry>,
    pub tv_to_marginal_product: String,
    pub tv_to_marginal_product_decimal: f64,
    pub covariances: Vec<CovarianceEntry>,
    pub max_abs_correlation: f64,
}

fn decimal(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

fn mode_report(mode: SemanticsMode, pmf: &ExactPmf) -> CliResult<ExactModeReport> {
    let n = pmf.n();
    let tv = tv_distance(pmf, &product_of_marginals(pmf))?;
    Ok(ExactModeReport {
        mode: mode.to_string(),
        source: pmf.source().as_str(),
        outcomes: pmf
            .probs()
            .iter()
            .enumerate()
            .map(|(o, p)| OutcomeEntry {
                outcome: outcome_label(n, o as u64),
                prob: format_rational(p),
                decimal: decimal(p),
            })
            .collect(),
        marginals: (2..=n)
            .map(|j| {
                let p = pmf.marginal(j);
                MarginalEntry {
                    j,
                    prob: format_rational(&p),
                    decimal: decimal(&p),
                }
            })
            .collect(),
        tv_to_marginal_product: format_rational(&tv),
        tv_to_marginal_product_decimal: decimal(&tv),
        covariances: pairwise_covariances(pmf)
            .into_iter()
            .map(|c| CovarianceEntry {
                j: c.j,
                k: c.k,
                cov: format_rational(&c.cov),
            })
            .collect(),
        max_abs_correlation: max_abs_correlation(&pmf.to_f64()),
    })
}

/// Enumerates the exact joint law for each mode.
pub fn run_exact(n: usize, d: usize, modes: &[SemanticsMode], cap: u128) -> CliResult<ExactReport> {
    let mut results = Vec::new();
    for &mode in modes {
        let pmf = joint_pmf_iid_with_cap(n, d, mode, cap)?;
        results.push(mode_report(mode, &pmf)?);
    }
    Ok(ExactReport {
        tool: TOOL,
        version: VERSION,
        n,
        d,
        cap_states: cap,
        rank_tuples: rank_tuple_count(n, d).unwrap_or(u128::MAX),
        results,
    })
}

/// `mode,j,p_record,p_record_decimal` rows.
pub fn marginal_table_csv(report: &ExactReport) -> String {
    let mut out = String::from("mode,j,p_record,p_record_decimal\n");
    for r in &report.results {
        out.push_str(&format!("{},1,1/1,1\n", r.mode));
        for m in &r.marginals {
            out.push_str(&format!("{},{},{},{}\n", r.mode, m.j, m.prob, m.decimal));
        }
    }
    out
}

/// `mode,tv_to_marginal_product,tv_decimal,max_abs_correlation` rows.
pub fn tv_table_csv(report: &ExactReport) -> String {
    let mut out = String::from("mode,tv_to_marginal_product,tv_decimal,max_abs_correlation\n");
    for r in &report.results {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.mode, r.tv_to_marginal_product, r.tv_to_marginal_product_decimal, r.max_abs_correlation
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::CliError;
    use recind_core::DEFAULT_STATE_CAP;

    #[test]
    fn three_points_on_the_line() {
        let rep = run_exact(3, 1, &[SemanticsMode::Chain], DEFAULT_STATE_CAP).unwrap();
        let r = &rep.results[0];
        let probs: Vec<&str> = r.outcomes.iter().map(|o| o.prob.as_str()).collect();
        assert_eq!(probs, ["1/3", "1/3", "1/6", "1/6"]);
        assert_eq!(r.tv_to_marginal_product, "0/1");
        assert_eq!(r.covariances[0].cov, "0/1");
        let json = serde_json::to_string(&rep).unwrap();
        assert!(json.contains("\"tv_to_marginal_product\":\"0/1\""));
    }

    #[test]
    fn single_observation() {
        let rep = run_exact(1, 2, &SemanticsMode::ALL, DEFAULT_STATE_CAP).unwrap();
        assert_eq!(rep.results[0].outcomes[0].prob, "1/1");
        assert_eq!(rep.results[0].outcomes[0].outcome, "");
    }

    #[test]
    fn cap_error_maps_to_exit_three() {
        let err = run_exact(12, 1, &[SemanticsMode::Chain], DEFAULT_STATE_CAP).unwrap_err();
        assert!(matches!(err, CliError::Cap(_)));
        assert_eq!(err.exit_code(), 3);
    }
}
