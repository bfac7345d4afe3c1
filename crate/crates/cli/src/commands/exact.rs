use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use erw_core::oracle::{
    dp_distribution, enumerate, exact_moments, unbounded_moments, Conditioning, ExactPMF, MomentOptions,
};

use super::Run;
use crate::args::{params_json, WalkArgs};
use crate::error::CliError;
use crate::output::{fmt_short, to_json, Format};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Sum over all 2^n paths (n <= 24)
    Enum,
    /// Forward dynamic program over window states (bounded memories)
    Dp,
    /// Joint moments of T_n and window steps (bounded memories)
    Moments,
    /// Power moments of T_n for full and skipfirst memories
    Power,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct ExactArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub walk: WalkArgs,
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_enum)]
    pub method: Method,
    /// Highest power of T_n (moments and power methods)
    #[arg(long, default_value_t = 4)]
    pub max_moment: usize,
    /// Also track the most recent steps outside the memory (moments method)
    #[arg(long, default_value_t = 0)]
    #[serde(default)]
    pub track_last: usize,
    #[arg(long, value_enum, default_value_t)]
    #[serde(default)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn conditioning(c: &Conditioning) -> Value {
    match c {
        Conditioning::RandomStart { r } => json!({ "random_start": { "r": r } }),
        Conditioning::Start(s) => json!({ "start": s }),
    }
}

fn pmf_payload(head: Value, pmf: &ExactPMF, format: Format, manifest_id: &str) -> Vec<u8> {
    match format {
        Format::Json => {
            let mut body = head;
            body["pmf"] = json!({
                "n": pmf.n,
                "conditioning": conditioning(&pmf.conditioning),
                "support": pmf.support,
                "probs": pmf.probs,
                "total_mass": pmf.total_mass(),
                "mean": pmf.mean(),
                "variance": pmf.variance(),
            });
            to_json(&body)
        }
        Format::Csv => {
            let mut s = format!("# erw exact manifest_id={manifest_id}\nt,prob\n");
            for (t, q) in pmf.support.iter().zip(&pmf.probs) {
                s.push_str(&format!("{t},{}\n", fmt_short(*q)));
            }
            s.into_bytes()
        }
    }
}

fn moments_payload(head: Value, moments: &[f64], mixed: Vec<Value>, format: Format, manifest_id: &str) -> Vec<u8> {
    match format {
        Format::Json => {
            let mut body = head;
            body["moments"] = json!(moments);
            if !mixed.is_empty() {
                body["mixed"] = Value::Array(mixed);
            }
            to_json(&body)
        }
        Format::Csv => {
            let mut s = format!("# erw exact manifest_id={manifest_id}\npower,moment\n");
            for (a, m) in moments.iter().enumerate() {
                s.push_str(&format!("{a},{}\n", fmt_short(*m)));
            }
            s.into_bytes()
        }
    }
}

pub fn run(args: &ExactArgs, manifest_id: &str) -> Result<Run, CliError> {
    let (spec, params) = args.walk.resolve()?;
    let head = json!({
        "schema": "erw.exact/1",
        "manifest_id": manifest_id,
        "params": params_json(spec, &params),
        "n": args.n,
        "method": args.method,
    });
    let payload = match args.method {
        Method::Enum => pmf_payload(head, &enumerate(spec, &params, args.n)?, args.format, manifest_id),
        Method::Dp => pmf_payload(head, &dp_distribution(spec, &params, args.n)?, args.format, manifest_id),
        Method::Moments => {
            let opts = MomentOptions { track_last: args.track_last, snapshots: Vec::new() };
            let t = exact_moments(spec, &params, args.n, args.max_moment, &opts)?;
            let moments: Vec<f64> = (0..=args.max_moment).map(|a| t.moment(a)).collect();
            let idx = &t.last.indices;
            let mut mixed = Vec::new();
            for a in 0..=args.max_moment {
                for mask in 1..1usize << idx.len() {
                    let steps: Vec<usize> = (0..idx.len()).filter(|b| mask >> b & 1 == 1).map(|b| idx[b]).collect();
                    let value = t.get(a, &steps).expect("tracked indices");
                    mixed.push(json!({ "power": a, "steps": steps, "value": value }));
                }
            }
            let mut head = head;
            head["memory"] = json!(t.memory);
            head["tracked"] = json!(idx);
            head["conditioning"] = conditioning(&t.conditioning);
            moments_payload(head, &moments, mixed, args.format, manifest_id)
        }
        Method::Power => {
            let moments = unbounded_moments(spec, &params, args.n, args.max_moment)?;
            moments_payload(head, &moments, Vec::new(), args.format, manifest_id)
        }
    };
    Ok(Run { payload, pass: true })
}
