use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use erw_core::analytic::{
    clt_limit_law_with, lln_limit_law, mean_formula, multiplier_clt_law, variance_formula, CenteringMode,
    FormulaResult, LimitLaw,
};
use erw_core::StepMultiplier;

use super::Run;
use crate::args::{params_json, SkipChoice, WalkArgs};
use crate::error::CliError;
use crate::output::to_json;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Quantity {
    /// E(T_n)
    Mean,
    /// Var(T_n)
    Variance,
    /// Limit law of T_n / n
    LlnLaw,
    /// Limit law of the centered and scaled T_n
    CltLaw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "lowercase")]
pub enum CenteringChoice {
    Fixed,
    #[default]
    Random,
    None,
}

impl From<CenteringChoice> for CenteringMode {
    fn from(c: CenteringChoice) -> Self {
        match c {
            CenteringChoice::Fixed => CenteringMode::Fixed,
            CenteringChoice::Random => CenteringMode::Random,
            CenteringChoice::None => CenteringMode::None,
        }
    }
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct PredictArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub walk: WalkArgs,
    #[arg(long, value_enum)]
    pub quantity: Quantity,
    /// Time for mean and variance
    #[arg(long)]
    pub n: Option<usize>,
    /// Centering of the central limit statistic
    #[arg(long, value_enum, default_value_t)]
    #[serde(default)]
    pub centering: CenteringChoice,
    #[arg(long, value_enum, default_value_t)]
    #[serde(default)]
    pub skip_variance: SkipChoice,
    /// Multiplier law `value:weight,...` for the scale-mixture limit (full memory)
    #[arg(long, allow_hyphen_values = true)]
    pub mult: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn law_json(law: &LimitLaw) -> Value {
    json!({
        "atoms": law.atoms.iter().map(|&(x, w)| json!({ "location": x, "weight": w })).collect::<Vec<_>>(),
        "gaussians": law
            .gaussians
            .iter()
            .map(|g| json!({ "mean": g.mean, "variance": g.variance, "weight": g.weight }))
            .collect::<Vec<_>>(),
        "description": law.describe(),
        "mean": law.mean(),
        "variance": law.variance(),
    })
}

fn formula_json(f: &FormulaResult) -> Value {
    json!({
        "value": f.value,
        "kind": f.kind,
        "leading": f.leading,
        "offset": f.offset,
        "validity": f.validity,
        "label": f.label,
    })
}

pub fn run(args: &PredictArgs, manifest_id: &str) -> Result<Run, CliError> {
    let (spec, params) = args.walk.resolve()?;
    let mut body = json!({
        "schema": "erw.predict/1",
        "manifest_id": manifest_id,
        "params": params_json(spec, &params),
        "quantity": args.quantity,
    });
    let need_n = || args.n.ok_or_else(|| CliError::Usage("--n is required for mean and variance".into()));
    match args.quantity {
        Quantity::Mean => {
            let n = need_n()?;
            body["n"] = json!(n);
            body["result"] = formula_json(&mean_formula(spec, &params, n)?);
        }
        Quantity::Variance => {
            let n = need_n()?;
            body["n"] = json!(n);
            body["result"] = formula_json(&variance_formula(spec, &params, n)?);
        }
        Quantity::LlnLaw => {
            let law = lln_limit_law(spec, &params)?;
            body["result"] = law_json(&law);
            body["label"] = json!(format!("limit in distribution of T_n/n for {spec}"));
        }
        Quantity::CltLaw => {
            let law = match &args.mult {
                Some(m) => multiplier_clt_law(params.p, &m.parse::<StepMultiplier>()?)?,
                None => clt_limit_law_with(spec, &params, args.centering.into(), &args.skip_variance.options())?,
            };
            body["result"] = law_json(&law.law);
            body["recipe"] = json!(law.recipe);
            body["label"] = json!(law.label);
        }
    }
    Ok(Run { payload: to_json(&body), pass: true })
}
