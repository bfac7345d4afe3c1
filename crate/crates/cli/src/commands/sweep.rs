use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use erw_core::engine::{Record, Summary};

use super::{ensemble, Run};
use crate::args::{SimArgs, WalkArgs};
use crate::error::CliError;
use crate::output::{fmt_short, to_json, Format};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SweepParam {
    P,
    R,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct SweepArgs {
    /// Memory rule: full | first:M | last:K | first:M+last:K | skipfirst:K
    #[arg(long)]
    pub model: String,
    /// Parameter to vary
    #[arg(long, value_enum)]
    pub param: SweepParam,
    #[arg(long)]
    pub from: f64,
    #[arg(long)]
    pub to: f64,
    /// Number of grid points, including both ends
    #[arg(long)]
    pub steps: usize,
    /// Value of p when sweeping r
    #[arg(long)]
    pub p: Option<f64>,
    /// Value of r when sweeping p (defaults to the swept p)
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub start: Option<String>,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub paths: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// raw | over-n
    #[arg(long, default_value = "raw")]
    pub stat: String,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    #[serde(default)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

struct Row {
    value: f64,
    p: f64,
    r: f64,
    summary: Summary,
    /// Slope of log Var(T_j) against log j between n/16 and n.
    exponent: Option<f64>,
}

pub fn run(args: &SweepArgs, manifest_id: &str) -> Result<Run, CliError> {
    if args.steps == 0 {
        return Err(CliError::Usage("--steps must be at least 1".into()));
    }
    if args.from > args.to {
        return Err(CliError::Usage(format!("--from {} is larger than --to {}", args.from, args.to)));
    }
    if !matches!(args.stat.as_str(), "raw" | "over-n") {
        return Err(CliError::Usage(format!("--stat: sweep supports raw | over-n, got `{}`", args.stat)));
    }
    if args.param == SweepParam::R && args.p.is_none() {
        return Err(CliError::Usage("--p is required when sweeping r".into()));
    }
    let low = (args.n / 16).max(1);
    let mut rows = Vec::with_capacity(args.steps);
    for i in 0..args.steps {
        let value = if args.steps == 1 {
            args.from
        } else {
            args.from + (args.to - args.from) * i as f64 / (args.steps - 1) as f64
        };
        let (p, r) = match args.param {
            SweepParam::P => (value, args.r.unwrap_or(value)),
            SweepParam::R => (args.p.unwrap_or(0.5), value),
        };
        let sim = SimArgs {
            walk: WalkArgs { model: args.model.clone(), p, r: Some(r), start: args.start.clone() },
            n: args.n,
            paths: args.paths,
            seed: args.seed,
            stat: args.stat.clone(),
            mult: None,
            skip_variance: Default::default(),
        };
        let plan = sim.plan()?;
        let record = if low < args.n { Record::Checkpoints(vec![low, args.n]) } else { Record::None };
        let ens = ensemble(&plan, args.n, args.paths, args.seed, record)?;
        let exponent = ens.trajectories.as_ref().map(|ts| {
            let var_at = |k: usize| {
                let xs: Vec<f64> = ts.iter().map(|t| t.checkpoints[k].1 as f64).collect();
                Summary::of(&xs).variance
            };
            (var_at(1) / var_at(0)).ln() / (args.n as f64 / low as f64).ln()
        });
        rows.push(Row { value, p, r, summary: ens.summary, exponent });
    }
    let param = match args.param {
        SweepParam::P => "p",
        SweepParam::R => "r",
    };
    let payload = match args.format {
        Format::Csv => {
            let mut s = format!("# erw sweep manifest_id={manifest_id} model={} param={param} n={} paths={}\n", args.model, args.n, args.paths);
            s.push_str("p,r,mean,variance,var_exponent\n");
            for row in &rows {
                s.push_str(&format!(
                    "{},{},{},{},{}\n",
                    fmt_short(row.p),
                    fmt_short(row.r),
                    fmt_short(row.summary.mean),
                    fmt_short(row.summary.variance),
                    row.exponent.map(fmt_short).unwrap_or_default()
                ));
            }
            s.into_bytes()
        }
        Format::Json => to_json(&json!({
            "schema": "erw.sweep/1",
            "manifest_id": manifest_id,
            "model": args.model,
            "param": param,
            "n": args.n,
            "paths": args.paths,
            "note": "descriptive output only; no verdict",
            "rows": rows.iter().map(|r| json!({
                "value": r.value, "p": r.p, "r": r.r,
                "mean": r.summary.mean, "variance": r.summary.variance, "var_exponent": r.exponent,
            })).collect::<Vec<_>>(),
        })),
    };
    Ok(Run { payload, pass: true })
}
