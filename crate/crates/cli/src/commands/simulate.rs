use std::path::PathBuf;

use clap::Args;
use serde::{Deserialize, Serialize};
use serde_json::json;

use erw_core::engine::{default_checkpoints, Record};

use super::{ensemble, Run};
use crate::args::{params_json, SimArgs};
use crate::error::CliError;
use crate::output::{fmt_short, to_json, Format};

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub sim: SimArgs,
    /// Also store T_j at powers of two and at n for every path
    #[arg(long)]
    #[serde(default)]
    pub checkpoints: bool,
    #[arg(long, value_enum, default_value_t)]
    #[serde(default)]
    pub format: Format,
    /// Output file (stdout when absent); a manifest is written next to it
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(args: &SimulateArgs, manifest_id: &str) -> Result<Run, CliError> {
    let plan = args.sim.plan()?;
    let record = if args.checkpoints { Record::DefaultCheckpoints } else { Record::None };
    let ens = ensemble(&plan, args.sim.n, args.sim.paths, args.sim.seed, record)?;
    let payload = match args.format {
        Format::Json => {
            let mut body = json!({
                "schema": "erw.simulate/1",
                "manifest_id": manifest_id,
                "params": params_json(plan.spec, &plan.params),
                "n": args.sim.n,
                "paths": args.sim.paths,
                "seed": args.sim.seed,
                "statistic": args.sim.stat,
                "multiplier": args.sim.mult,
                "limit_law": plan.law.as_ref().map(|l| json!({ "law": l.law.describe(), "label": l.label })),
                "summary": {
                    "mean": ens.summary.mean,
                    "variance": ens.summary.variance,
                    "min": ens.summary.min,
                    "max": ens.summary.max,
                    "std_error": ens.summary.std_error(args.sim.paths),
                },
                "sample": ens.sample,
            });
            if let Some(ts) = &ens.trajectories {
                let sums: Vec<Vec<i64>> = ts.iter().map(|t| t.checkpoints.iter().map(|c| c.1).collect()).collect();
                body["checkpoints"] = json!({ "times": default_checkpoints(args.sim.n), "sums": sums });
            }
            to_json(&body)
        }
        Format::Csv => {
            let mut s = format!("# erw simulate manifest_id={manifest_id}\n");
            let times = default_checkpoints(args.sim.n);
            s.push_str("path,value");
            if ens.trajectories.is_some() {
                for t in &times {
                    s.push_str(&format!(",t{t}"));
                }
            }
            s.push('\n');
            for (i, v) in ens.sample.iter().enumerate() {
                s.push_str(&format!("{i},{}", fmt_short(*v)));
                if let Some(ts) = &ens.trajectories {
                    for c in &ts[i].checkpoints {
                        s.push_str(&format!(",{}", c.1));
                    }
                }
                s.push('\n');
            }
            s.into_bytes()
        }
    };
    Ok(Run { payload, pass: true })
}
