//! Monte Carlo runs with reference comparisons.

use std::path::Path;

use num::ToPrimitive;
use recind_core::oracle::{joint_pmf_iid_with_cap, marginal_record_prob, rank_tuple_count};
use recind_core::pmf::{outcome_label, MAX_TABLE_N};
use recind_core::quadrature::{joint_pmf_quadrature_laws, QuadratureOptions, QUADRATURE_MAX_N};
use recind_core::{
    empirical_tv_report, run_experiment, ContinuousLaw, DistributionSpec, ExperimentConfig, FloatPmf, IndependenceReport,
    JointPmf, ModeResult, PmfSource, SemanticsMode,
};
use serde::Serialize;

use crate::config::{ReferenceChoice, SimulateConfig};
use crate::error::CliResult;
use crate::output::{to_json, OutputDir, RunManifest, Timestamps, TOOL, VERSION};

/// A reference law for one mode, with how it was obtained.
#[derive(Debug, Clone)]
pub struct Reference {
    pub kind: &'static str,
    pub pmf: FloatPmf,
    pub error_estimate: f64,
}

/// Dominance indicators are the AND of per-coordinate 1-D indicators when
/// coordinates are independent, so their law is the AND-convolution.
fn and_combine(parts: &[FloatPmf]) -> FloatPmf {
    let n = parts[0].n();
    let mut acc = parts[0].probs().to_vec();
    for part in &parts[1..] {
        let mut next = vec![0.0; acc.len()];
        for (a, pa) in acc.iter().enumerate() {
            for (b, pb) in part.probs().iter().enumerate() {
                next[a & b] += pa * pb;
            }
        }
        acc = next;
    }
    JointPmf::new(n, acc, PmfSource::Quadrature).expect("product of normalized laws is normalized")
}

fn quadrature_coordinate(spec: &DistributionSpec, i: usize, gridpoints: usize) -> CliResult<(FloatPmf, f64)> {
    let laws: Vec<&dyn ContinuousLaw> = (1..=spec.n()).map(|j| spec.law(j, i) as &dyn ContinuousLaw).collect();
    let q = joint_pmf_quadrature_laws(&laws, &QuadratureOptions::with_gridpoints(gridpoints))?;
    Ok((q.pmf, q.error_estimate))
}

/// Picks the strongest available reference:
/// exact enumeration for iid data within the cap, otherwise quadrature on the
/// line (and its AND-combination across coordinates in dominance mode).
pub fn reference_for(cfg: &SimulateConfig, spec: &DistributionSpec, mode: SemanticsMode) -> CliResult<Option<Reference>> {
    let (n, d) = (spec.n(), spec.d());
    if cfg.reference == ReferenceChoice::None || n > MAX_TABLE_N {
        return Ok(None);
    }
    let within_cap = rank_tuple_count(n, d).is_some_and(|c| c <= cfg.cap_states);
    if spec.is_iid_per_coordinate() && within_cap {
        let pmf = joint_pmf_iid_with_cap(n, d, mode, cfg.cap_states)?.to_f64();
        return Ok(Some(Reference {
            kind: "enumeration",
            pmf,
            error_estimate: 0.0,
        }));
    }
    if n > QUADRATURE_MAX_N || (d > 1 && mode == SemanticsMode::Chain) {
        return Ok(None);
    }
    let mut parts = Vec::with_capacity(d);
    let mut err = 0.0;
    for i in 1..=d {
        let (pmf, e) = quadrature_coordinate(spec, i, cfg.gridpoints)?;
        parts.push(pmf);
        err += e;
    }
    Ok(Some(Reference {
        kind: "quadrature",
        pmf: and_combine(&parts),
        error_estimate: err,
    }))
}

/// Reference P(ζ_j = 1) for `j = 1..=n`, when known.
fn reference_marginals(cfg: &SimulateConfig, spec: &DistributionSpec, mode: SemanticsMode, reference: Option<&Reference>) -> Option<Vec<f64>> {
    if let Some(r) = reference {
        let mut m = vec![1.0];
        m.extend(r.pmf.marginals());
        return Some(m);
    }
    if cfg.reference == ReferenceChoice::None || !spec.is_iid_per_coordinate() {
        return None;
    }
    (1..=spec.n())
        .map(|j| {
            marginal_record_prob(spec.n(), j, spec.d(), mode, cfg.cap_states)
                .ok()
                .and_then(|q| q.to_f64())
        })
        .collect()
}

#[derive(Debug, Serialize)]
pub struct LStatistics {
    pub mean: f64,
    pub variance: f64,
    pub std_error: f64,
    pub reference_mean: Option<f64>,
    /// `(mean - reference_mean) / std_error`.
    pub z: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct GTestReport {
    pub gstat: f64,
    pub dof: usize,
    pub pvalue: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct IndependenceSummary {
    pub tv_to_marginal_product: f64,
    pub g_test: Option<GTestReport>,
    pub max_abs_correlation: f64,
}

#[derive(Debug, Serialize)]
pub struct ReferenceSummary {
    pub kind: &'static str,
    pub error_estimate: f64,
    pub tv: f64,
    pub max_abs_z: f64,
    pub reference_tv_to_marginal_product: f64,
}

#[derive(Debug, Serialize)]
pub struct ModeReport {
    pub mode: String,
    pub l_statistics: LStatistics,
    /// Present when `n <= 20`.
    pub independence: Option<IndependenceSummary>,
    pub reference: Option<ReferenceSummary>,
}

#[derive(Debug, Serialize)]
pub struct SimulateReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub n: usize,
    pub d: usize,
    pub replicates: u64,
    pub seed: u64,
    pub modes: Vec<ModeReport>,
}

struct ModeArtifacts {
    report: ModeReport,
    counts_rows: String,
    marginal_rows: String,
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn mode_artifacts(cfg: &SimulateConfig, spec: &DistributionSpec, res: &ModeResult) -> CliResult<ModeArtifacts> {
    let mode = res.mode;
    let reference = reference_for(cfg, spec, mode)?;
    let ref_marginals = reference_marginals(cfg, spec, mode, reference.as_ref());
    let l = &res.l_summary;
    let reference_mean = ref_marginals.as_ref().map(|m| m.iter().sum::<f64>());
    let se = l.std_error();
    let l_statistics = LStatistics {
        mean: l.mean(),
        variance: l.variance(),
        std_error: se,
        reference_mean,
        z: reference_mean.filter(|_| se > 0.0).map(|m| (l.mean() - m) / se),
    };

    let r = res.l_summary.replicates as f64;
    let mut marginal_rows = String::new();
    for (idx, &count) in res.record_counts.iter().enumerate() {
        let p = count as f64 / r;
        let refp = ref_marginals.as_ref().map(|m| m[idx]);
        marginal_rows.push_str(&format!(
            "{mode},{},{count},{p},{},{}\n",
            idx + 1,
            (p * (1.0 - p) / r).sqrt(),
            fmt_opt(refp)
        ));
    }

    let mut counts_rows = String::new();
    let mut independence = None;
    let mut ref_summary = None;
    if let Some(emp) = &res.outcomes {
        let ind = IndependenceReport::for_empirical(emp)?;
        independence = Some(IndependenceSummary {
            tv_to_marginal_product: ind.tv,
            g_test: ind.g_test.map(|g| GTestReport {
                gstat: g.gstat,
                dof: g.dof,
                pvalue: g.pvalue,
            }),
            max_abs_correlation: ind.max_abs_correlation,
        });
        let tv_report = reference.as_ref().map(|rf| empirical_tv_report(emp, &rf.pmf)).transpose()?;
        let hat = emp.pmf();
        let ses = emp.std_errors();
        for (o, (&count, (&p_hat, &se))) in emp.counts().iter().zip(hat.probs().iter().zip(&ses)).enumerate() {
            let refp = reference.as_ref().map(|rf| rf.pmf.probs()[o]);
            let z = tv_report.as_ref().map(|t| t.z_scores[o]);
            counts_rows.push_str(&format!(
                "{mode},{},{count},{p_hat},{se},{},{}\n",
                outcome_label(emp.n(), o as u64),
                fmt_opt(refp),
                fmt_opt(z)
            ));
        }
        if let (Some(rf), Some(t)) = (&reference, tv_report) {
            ref_summary = Some(ReferenceSummary {
                kind: rf.kind,
                error_estimate: rf.error_estimate,
                tv: t.tv,
                max_abs_z: t.max_abs_z,
                reference_tv_to_marginal_product: IndependenceReport::for_pmf(&rf.pmf)?.tv,
            });
        }
    }

    Ok(ModeArtifacts {
        report: ModeReport {
            mode: mode.to_string(),
            l_statistics,
            independence,
            reference: ref_summary,
        },
        counts_rows,
        marginal_rows,
    })
}

/// Runs the experiment and writes `counts.csv`, `marginals.csv`,
/// `report.json` and `manifest.json` into `out`.
pub fn run_simulate(cfg: &SimulateConfig, out: &Path) -> CliResult<SimulateReport> {
    let spec = cfg.distribution()?;
    let exp = ExperimentConfig::new(spec.clone(), cfg.modes(), cfg.replicates, cfg.seed);
    exp.validate()?;
    let result = run_experiment(&exp)?;

    let mut counts = String::from("mode,outcome,count,p_hat,std_error,reference,z\n");
    let mut marginals = String::from("mode,j,count,p_hat,std_error,reference\n");
    let mut modes = Vec::new();
    for res in &result.modes {
        let a = mode_artifacts(cfg, &spec, res)?;
        counts.push_str(&a.counts_rows);
        marginals.push_str(&a.marginal_rows);
        modes.push(a.report);
    }
    let report = SimulateReport {
        tool: TOOL,
        version: VERSION,
        n: cfg.n,
        d: cfg.d,
        replicates: result.replicates,
        seed: cfg.seed,
        modes,
    };

    let mut dir = OutputDir::create(out)?;
    if exp.tracks_outcomes() {
        dir.write("counts.csv", &counts)?;
    }
    dir.write("marginals.csv", &marginals)?;
    dir.write("report.json", &to_json(&report)?)?;
    let manifest = RunManifest {
        tool: TOOL,
        version: VERSION,
        command: "simulate",
        config: cfg.echo(),
        seed: cfg.seed,
        timestamps: Timestamps::now(),
        outputs: dir.digests(),
    };
    dir.write("manifest.json", &to_json(&manifest)?)?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn and_combination_of_point_masses() {
        let a = JointPmf::point_mass(3, 0b11).unwrap();
        let b = JointPmf::point_mass(3, 0b01).unwrap();
        let c = and_combine(&[a, b]);
        assert_eq!(c.probs(), &[0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn quadrature_reference_for_growing_uniforms() {
        let cfg: SimulateConfig = "n = 2\nd = 1\nspec.default = uniform 0 linear(0,1)\n".parse().unwrap();
        let spec = cfg.distribution().unwrap();
        let r = reference_for(&cfg, &spec, SemanticsMode::Chain).unwrap().unwrap();
        assert_eq!(r.kind, "quadrature");
        assert!((r.pmf.marginal(2) - 0.75).abs() < 1e-6);
    }

    #[test]
    fn enumeration_reference_for_iid() {
        let cfg: SimulateConfig = "n = 3\nd = 2\nspec.coord2 = gaussian 0 1\n".parse().unwrap();
        let spec = cfg.distribution().unwrap();
        let r = reference_for(&cfg, &spec, SemanticsMode::Chain).unwrap().unwrap();
        assert_eq!(r.kind, "enumeration");
    }

    #[test]
    fn no_reference_for_large_n() {
        let cfg: SimulateConfig = "n = 30\nd = 1\n".parse().unwrap();
        let spec = cfg.distribution().unwrap();
        assert!(reference_for(&cfg, &spec, SemanticsMode::Chain).unwrap().is_none());
        let m = reference_marginals(&cfg, &spec, SemanticsMode::Chain, None).unwrap();
        assert!((m[29] - 1.0 / 30.0).abs() < 1e-15);
    }
}
