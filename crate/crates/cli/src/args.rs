//! Flags shared by several subcommands.

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use erw_core::analytic::{clt_limit_law_with, multiplier_clt_law, CenteringMode, CltLaw, CltOptions, SkipVariance};
use erw_core::engine::{CltRecipe, Statistic};
use erw_core::model::parse_start;
use erw_core::{Error, MemorySpec, StepMultiplier, WalkParams};

use crate::error::CliError;

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct WalkArgs {
    /// Memory rule: full | first:M | last:K | first:M+last:K | skipfirst:K
    #[arg(long)]
    pub model: String,
    /// Probability of copying a remembered step
    #[arg(long)]
    pub p: f64,
    /// Probability that a random first step is +1 (defaults to p)
    #[arg(long)]
    pub r: Option<f64>,
    /// Fixed leading steps, e.g. +1 or +1,-1
    #[arg(long, allow_hyphen_values = true)]
    pub start: Option<String>,
}

impl WalkArgs {
    pub fn resolve(&self) -> Result<(MemorySpec, WalkParams), CliError> {
        let spec: MemorySpec = self.model.parse()?;
        let mut params = WalkParams::new(self.p, self.r.unwrap_or(self.p));
        if let Some(s) = &self.start {
            params = params.with_start(&parse_start(s)?);
        }
        erw_core::model::validate(&params, spec, false)?;
        Ok((spec, params))
    }
}

pub fn params_json(spec: MemorySpec, params: &WalkParams) -> Value {
    json!({
        "model": spec.to_string(),
        "p": params.p,
        "r": params.r,
        "start": params.start,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SkipChoice {
    /// 1/(3-4p)
    #[default]
    FullMemory,
    /// 1/(3-4p_k) with p_k the up-probability of the first remembered step
    FirstRemembered,
    /// 1/(4-3p_k)
    Printed,
}

impl SkipChoice {
    pub fn options(self) -> CltOptions {
        let skip_variance = match self {
            SkipChoice::FullMemory => SkipVariance::FullMemory,
            SkipChoice::FirstRemembered => SkipVariance::FirstRemembered,
            SkipChoice::Printed => SkipVariance::Printed,
        };
        CltOptions { skip_variance }
    }
}

/// Per-path statistic named on the command line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StatChoice {
    Raw,
    OverN,
    Clt(CenteringMode),
}

impl std::str::FromStr for StatChoice {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Ok(match s {
            "raw" => StatChoice::Raw,
            "over-n" => StatChoice::OverN,
            "clt:fixed" => StatChoice::Clt(CenteringMode::Fixed),
            "clt:random" => StatChoice::Clt(CenteringMode::Random),
            "clt:none" => StatChoice::Clt(CenteringMode::None),
            other => {
                return Err(CliError::Usage(format!(
                    "--stat: `{other}` is not raw | over-n | clt:fixed | clt:random | clt:none"
                )))
            }
        })
    }
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct SimArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub walk: WalkArgs,
    /// Number of steps
    #[arg(long)]
    pub n: usize,
    /// Number of independent paths
    #[arg(long)]
    pub paths: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// raw | over-n | clt:fixed | clt:random | clt:none
    #[arg(long, default_value = "over-n")]
    pub stat: String,
    /// Law of an independent multiplier, `value:weight,...` (needs --start +1)
    #[arg(long, allow_hyphen_values = true)]
    pub mult: Option<String>,
    /// Limiting variance rule for skipfirst models
    #[arg(long, value_enum, default_value_t)]
    #[serde(default)]
    pub skip_variance: SkipChoice,
}

/// Everything needed to run an ensemble.
pub struct Plan {
    pub spec: MemorySpec,
    pub params: WalkParams,
    pub choice: StatChoice,
    pub statistic: Statistic,
    pub mult: Option<StepMultiplier>,
    /// The limit law whose centering and scaling the statistic uses.
    pub law: Option<CltLaw>,
}

impl SimArgs {
    pub fn plan(&self) -> Result<Plan, CliError> {
        let (spec, params) = self.walk.resolve()?;
        let choice: StatChoice = self.stat.parse()?;
        let mult = self.mult.as_deref().map(str::parse::<StepMultiplier>).transpose()?;
        if self.n == 0 || self.paths == 0 {
            return Err(CliError::Usage("--n and --paths must be at least 1".into()));
        }
        if mult.is_some() && params.start != [1] {
            return Err(CliError::Usage("--mult needs --start +1".into()));
        }
        let (statistic, law) = match choice {
            StatChoice::Raw => (Statistic::Raw, None),
            StatChoice::OverN => (Statistic::OverN, None),
            StatChoice::Clt(mode) => {
                let law = match &mult {
                    Some(m) if mode == CenteringMode::None => multiplier_clt_law(params.p, m),
                    Some(_) => {
                        return Err(CliError::Usage("--mult is only combined with --stat clt:none".into()));
                    }
                    None => clt_limit_law_with(spec, &params, mode, &self.skip_variance.options()),
                };
                match law {
                    Ok(l) => (Statistic::Clt(l.recipe), Some(l)),
                    Err(Error::NoFormula(_)) if mode == CenteringMode::None && mult.is_none() => {
                        (Statistic::Clt(CltRecipe::plain()), None)
                    }
                    Err(e) => return Err(e.into()),
                }
            }
        };
        Ok(Plan { spec, params, choice, statistic, mult, law })
    }
}

/// Worker count from `ERW_THREADS`, if set.
pub fn workers() -> Result<Option<usize>, CliError> {
    match std::env::var("ERW_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&w| w > 0)
            .map(Some)
            .ok_or_else(|| CliError::Usage(format!("ERW_THREADS: `{v}` is not a positive integer"))),
        Err(_) => Ok(None),
    }
}
