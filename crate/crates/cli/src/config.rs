use std::path::Path;

use anyhow::{Context, Result};
use sketchchain_core::index::load_index;
use sketchchain_core::retrieval::Retriever;
use sketchchain_core::Params;

/// Names a TOML parameter ledger that overrides the defaults.
pub const CONFIG_ENV: &str = "SKETCHCHAIN_CONFIG";

/// Parameters from the ledger named by [`CONFIG_ENV`], if it is set.
pub fn config_override() -> Result<Option<Params>> {
    match std::env::var_os(CONFIG_ENV) {
        Some(path) if !path.is_empty() => {
            let p = Params::from_file(&path).with_context(|| format!("reading {CONFIG_ENV}={}", path.to_string_lossy()))?;
            Ok(Some(p))
        }
        _ => Ok(None),
    }
}

/// Ledger file if one is configured, defaults otherwise.
pub fn active_params() -> Result<Params> {
    Ok(config_override()?.unwrap_or_default())
}

/// Loads an index. Queries use the parameters stored with it unless a
/// ledger is configured.
pub fn open_retriever(index: &Path) -> Result<Retriever> {
    let tree = load_index(index).with_context(|| format!("loading index {}", index.display()))?;
    Ok(match config_override()? {
        Some(p) => Retriever::with_params(tree, p),
        None => Retriever::new(tree),
    })
}
