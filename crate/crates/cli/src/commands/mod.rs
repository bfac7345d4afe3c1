pub mod exact;
pub mod predict;
pub mod simulate;
pub mod sweep;
pub mod verify;

use erw_core::engine::{apply_multiplier, simulate_ensemble, EnsembleConfig, EnsemblePMF, Record};

use crate::args::{workers, Plan};
use crate::error::CliError;

/// A command's payload and whether its checks passed.
pub struct Run {
    pub payload: Vec<u8>,
    pub pass: bool,
}

pub fn ensemble(plan: &Plan, n: usize, paths: usize, seed: u64, record: Record) -> Result<EnsemblePMF, CliError> {
    let mut cfg = EnsembleConfig::new(n, paths, seed, plan.statistic).with_record(record);
    if let Some(w) = workers()? {
        cfg = cfg.with_workers(w);
    }
    let ens = simulate_ensemble(plan.spec, &plan.params, &cfg)?;
    Ok(match &plan.mult {
        Some(m) => apply_multiplier(&ens, m, seed)?,
        None => ens,
    })
}
