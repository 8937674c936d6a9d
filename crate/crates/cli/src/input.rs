use crate::CliError;
use me_kit::algebra::{standard_channel, EffectiveChannel};
use me_kit::bivariate::BivMeJson;
use me_kit::channel::ChannelSpec;
use serde::Deserialize;
use std::path::Path;

#[derive(Debug, Clone, Deserialize)]
pub struct PepBranch {
    pub channel: ChannelSpec,
    pub a: f64,
}

#[derive(Debug, Clone, Deserialize)]
pub struct NcbrSpec {
    pub l13: ChannelSpec,
    pub l32: ChannelSpec,
    pub l23: ChannelSpec,
    pub l31: ChannelSpec,
}

/// Everything a spec file may hold. A bare channel spec fills `channel`.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub channel: Option<ChannelSpec>,
    pub interferers: Option<Vec<ChannelSpec>>,
    pub bivariate: Option<BivMeJson>,
    pub ncbr: Option<NcbrSpec>,
    pub branches: Option<Vec<PepBranch>>,
    pub noise: Option<ChannelSpec>,
}

pub fn parse(text: &str, origin: &str) -> Result<Scenario, CliError> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| CliError::usage(format!("{origin}: {e}")))?;
    if value.get("kind").is_some() {
        let spec: ChannelSpec = serde_json::from_str(text).map_err(|e| CliError::usage(format!("{origin}: {e}")))?;
        Ok(Scenario { channel: Some(spec), ..Default::default() })
    } else {
        serde_json::from_str(text).map_err(|e| CliError::usage(format!("{origin}: {e}")))
    }
}

pub fn load(path: Option<&Path>) -> Result<Scenario, CliError> {
    match path {
        None => Ok(Scenario::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::usage(format!("{}: {e}", p.display())))?;
            parse(&text, &p.display().to_string())
        }
    }
}

/// Builds a channel, replacing its mean SNR when `s` is given.
pub fn build(spec: &ChannelSpec, s: Option<f64>) -> Result<EffectiveChannel, CliError> {
    let spec = match s {
        None => spec.clone(),
        Some(v) => spec
            .with_snr(v)
            .ok_or_else(|| CliError::usage("--S given but the channel kind has no S parameter"))?,
    };
    Ok(standard_channel(&spec)?)
}

pub fn kind_name(spec: &ChannelSpec) -> String {
    serde_json::to_value(spec)
        .ok()
        .and_then(|v| v.get("kind").and_then(|k| k.as_str().map(str::to_owned)))
        .unwrap_or_default()
}

impl Scenario {
    pub fn channel(&self) -> Result<&ChannelSpec, CliError> {
        self.channel.as_ref().ok_or_else(|| CliError::usage("spec file has no channel"))
    }

    pub fn has_interference(&self) -> bool {
        self.interferers.is_some() || self.bivariate.is_some()
    }
}
