use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use erw_core::analytic::{lln_limit_law, mean_formula, variance_formula, FormulaResult};
use erw_core::engine::Record;
use erw_core::stats::{
    atom_cluster_test, ks_test, moment_check, AtomTestConfig, GofReport, Observed, Predicted, Verdict,
    DEFAULT_ALPHA, DEFAULT_MAX_UNCLASSIFIED,
};
use erw_core::Error;

use super::{ensemble, Run};
use crate::args::{params_json, SimArgs, StatChoice};
use crate::error::CliError;
use crate::output::to_json;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum TestChoice {
    /// Kolmogorov-Smirnov against a normal mixture (needs --stat clt:...)
    Ks,
    /// Cluster counts around point masses (needs --stat over-n)
    Atoms,
    /// Sample mean and variance against the catalog
    Moments,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct VerifyArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub sim: SimArgs,
    #[arg(long, value_enum)]
    pub test: TestChoice,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    pub alpha: f64,
    /// Half-width of the atom windows (derived from the atom spacing when absent)
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Largest unclassified fraction the atoms test accepts
    #[arg(long, default_value_t = DEFAULT_MAX_UNCLASSIFIED)]
    #[serde(default = "default_unclassified")]
    pub max_unclassified: f64,
    /// Relative tolerance of the moments test
    #[arg(long, default_value_t = 0.0)]
    #[serde(default)]
    pub rel_tol: f64,
    /// Absolute tolerance of the moments test
    #[arg(long, default_value_t = 0.0)]
    #[serde(default)]
    pub abs_tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn default_unclassified() -> f64 {
    DEFAULT_MAX_UNCLASSIFIED
}

fn scaled(f: FormulaResult, by: f64) -> f64 {
    f.value / by
}

/// Standard error of the unbiased sample variance.
fn variance_se(sample: &[f64], mean: f64, var: f64) -> f64 {
    let n = sample.len() as f64;
    let m4 = sample.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
    ((m4 - var * var).max(0.0) / n).sqrt()
}

pub fn run(args: &VerifyArgs, manifest_id: &str) -> Result<Run, CliError> {
    let plan = args.sim.plan()?;
    let (spec, params) = (plan.spec, &plan.params);
    let n = args.sim.n;
    let mut label = String::new();
    let law_text;

    let reports: Vec<GofReport> = match args.test {
        TestChoice::Ks => {
            let law = match plan.choice {
                StatChoice::Clt(_) => plan.law.clone().ok_or_else(|| {
                    Error::NoFormula(format!("no central limit theorem in the catalog for `{spec}`"))
                })?,
                StatChoice::OverN => {
                    let law = lln_limit_law(spec, params)?;
                    law_text = law.describe();
                    return Err(Error::InvalidParams(format!(
                        "the limit of T_n/n is {law_text}, which has point masses; use `--test atoms`"
                    ))
                    .into());
                }
                StatChoice::Raw => {
                    return Err(CliError::Usage("--test ks needs --stat clt:fixed|random|none".into()));
                }
            };
            label = law.label.clone();
            law_text = law.law.describe();
            let ens = ensemble(&plan, n, args.sim.paths, args.sim.seed, Record::None)?;
            vec![ks_test(&ens.sample, &law.law, args.alpha)?]
        }
        TestChoice::Atoms => {
            if plan.choice != StatChoice::OverN {
                return Err(CliError::Usage("--test atoms needs --stat over-n".into()));
            }
            let law = lln_limit_law(spec, params)?;
            label = format!("limit in distribution of T_n/n for {spec}");
            law_text = law.describe();
            let mut cfg = AtomTestConfig::for_law(&law, args.alpha);
            cfg.max_unclassified = args.max_unclassified;
            if let Some(e) = args.epsilon {
                cfg.epsilon = e;
            }
            let ens = ensemble(&plan, n, args.sim.paths, args.sim.seed, Record::None)?;
            vec![atom_cluster_test(&ens.sample, &law, &cfg)?]
        }
        TestChoice::Moments => {
            let (mean, var) = match plan.choice {
                StatChoice::Raw => (mean_formula(spec, params, n).map(|f| f.value), variance_formula(spec, params, n).map(|f| f.value)),
                StatChoice::OverN => {
                    let nf = n as f64;
                    (
                        mean_formula(spec, params, n).map(|f| scaled(f, nf)),
                        variance_formula(spec, params, n).map(|f| scaled(f, nf * nf)),
                    )
                }
                StatChoice::Clt(_) => match &plan.law {
                    Some(l) => {
                        label = l.label.clone();
                        (Ok(l.law.mean()), Ok(l.law.variance()))
                    }
                    None => {
                        let e = Error::NoFormula(format!("no central limit theorem in the catalog for `{spec}`"));
                        (Err(e.clone()), Err(e))
                    }
                },
            };
            if let (Err(e), Err(_)) = (&mean, &var) {
                return Err(e.clone().into());
            }
            law_text = match (&mean, &var) {
                (Ok(m), Ok(v)) => format!("mean {m}, variance {v}"),
                (Ok(m), _) => format!("mean {m}"),
                (_, Ok(v)) => format!("variance {v}"),
                _ => unreachable!(),
            };
            let ens = ensemble(&plan, n, args.sim.paths, args.sim.seed, Record::None)?;
            let s = &ens.summary;
            let mut out = Vec::new();
            if let Ok(m) = mean {
                let obs = Observed::MonteCarlo { value: s.mean, std_error: s.std_error(args.sim.paths) };
                out.push(moment_check("mean", obs, Predicted::Value(m), args.rel_tol, args.abs_tol));
            }
            if let Ok(v) = var {
                let obs = Observed::MonteCarlo { value: s.variance, std_error: variance_se(&ens.sample, s.mean, s.variance) };
                out.push(moment_check("variance", obs, Predicted::Value(v), args.rel_tol, args.abs_tol));
            }
            for r in &mut out {
                r.sample_size = args.sim.paths;
            }
            out
        }
    };
    let pass = reports.iter().all(|r| r.verdict.passed());
    let body = json!({
        "schema": "erw.verify/1",
        "manifest_id": manifest_id,
        "params": params_json(spec, params),
        "n": n,
        "paths": args.sim.paths,
        "seed": args.sim.seed,
        "statistic": args.sim.stat,
        "multiplier": args.sim.mult,
        "test": args.test,
        "law": law_text,
        "label": label,
        "verdict": if pass { Verdict::Pass } else { Verdict::Fail },
        "reports": reports,
    });
    Ok(Run { payload: to_json(&body), pass })
}
