//! Batch front end for `chainlab`: configuration files, experiment dispatch,
//! reproducible seeding and run manifests.

pub mod config;
pub mod error;
pub mod manifest;
pub mod runner;

pub use config::{emit_config, parse_config, ConfigError, ConfigErrors, ExperimentConfig, Kind};
pub use error::CliError;
pub use manifest::{RunManifest, Status, MANIFEST_FILE};
pub use runner::{run, Output};

/// Command-line values that take precedence over the configuration file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<String>,
    pub workers: Option<usize>,
}

/// Builds the run configuration from an optional config text and the kind
/// implied by the subcommand. Without a text the documented defaults are used.
pub fn load_config(
    text: Option<&str>,
    kind: Option<Kind>,
    overrides: &Overrides,
) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match (text, kind) {
        (Some(t), _) => parse_config(t)?,
        (None, Some(k)) => ExperimentConfig::defaults(k),
        (None, None) => return Err(CliError::Usage("`run` needs --config".into())),
    };
    if let Some(k) = kind {
        if k != cfg.kind {
            return Err(CliError::Usage(format!(
                "subcommand {k} does not match kind = {} in the config",
                cfg.kind
            )));
        }
    }
    if let Some(s) = overrides.seed {
        cfg.seed = s;
    }
    if let Some(o) = &overrides.out {
        cfg.out = o.clone();
    }
    if let Some(w) = overrides.workers {
        cfg.workers = w;
    }
    config::validate(&cfg)?;
    Ok(cfg)
}
