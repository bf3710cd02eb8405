//! JSON run configuration. Field names carry their units.

use std::path::Path;

use copomo::context::{
    bundled_context, bundled_contexts, derive_theta, EnvironmentSpec, LinkBudget, MobilitySpec,
    DEFAULT_SAMPLES, DEFAULT_SEED, DEFAULT_TARGET_RX_POWER_DBM,
};
use copomo::device_lab::bundled_device;
use copomo::scenario::{SweepAxis, SweepSpec};
use copomo::{ContextProfile, DeviceBandProfile, TrafficScenario};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub device: DeviceSource,
    #[serde(default)]
    pub context: ContextSource,
    #[serde(default)]
    pub scenario: ScenarioConfig,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub output: Option<OutputConfig>,
}

/// Exactly one of `bundled` and `inline`.
#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceSource {
    pub bundled: Option<String>,
    pub inline: Option<DeviceBandProfile>,
    /// Replaces the profile's CA delta.
    pub delta_ca_mw: Option<f64>,
}

/// Exactly one of `bundled`, `inline` and `derive`.
#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ContextSource {
    pub bundled: Option<String>,
    pub inline: Option<ContextProfile>,
    pub derive: Option<DeriveConfig>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(untagged)]
pub enum Named<T> {
    Name(String),
    Inline(T),
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct DeriveConfig {
    pub environment: Named<EnvironmentSpec>,
    pub mobility: Named<MobilitySpec>,
    pub band_mhz: f64,
    pub target_rx_power_dbm: Option<f64>,
    pub antenna_gains_db: Option<f64>,
    /// Defaults to the device breakpoint.
    pub gamma_dbm: Option<f64>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub max_state_rate_factor: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub lambda_per_s: Option<f64>,
    pub d_dl_bit: Option<f64>,
    pub d_dlul: Option<f64>,
    pub r_dlul: Option<f64>,
    pub r_dl_nominal_bps: Option<f64>,
    pub a_ca: Option<f64>,
    /// Defaults to `a_ca > 1`.
    pub ca_enabled: Option<bool>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub axis: SweepAxis,
    pub values: Option<Vec<f64>>,
    pub range: Option<RangeConfig>,
    pub pairing: Option<Pairing>,
}

#[derive(Debug, Clone, Copy, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RangeConfig {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(untagged)]
pub enum Pairing {
    /// "environment" or "mobility".
    Kind(String),
    Labels(Vec<String>),
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub path: Option<String>,
    pub format: Option<String>,
}

/// Configuration after all names and defaults are resolved.
#[derive(Debug, Clone, Serialize)]
pub struct ResolvedRun {
    pub device_name: Option<String>,
    pub device: DeviceBandProfile,
    pub context: ContextProfile,
    pub scenario: TrafficScenario,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<ResolvedSweep>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResolvedSweep {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pairing: Option<Vec<ContextProfile>>,
}

impl ResolvedRun {
    pub fn sweep_spec(&self) -> Option<SweepSpec> {
        self.sweep.as_ref().map(|s| SweepSpec {
            axis: s.axis,
            values: s.values.clone(),
            device: self.device,
            context: self.context.clone(),
            scenario: self.scenario,
            pairing: s.pairing.clone(),
        })
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn resolve(&self, seed_override: Option<u64>) -> CliResult<ResolvedRun> {
        let (device_name, device) = self.resolve_device()?;
        let context = self.resolve_context(&device, seed_override)?;
        let scenario = self.resolve_scenario()?;
        let sweep = self
            .sweep
            .as_ref()
            .map(|s| resolve_sweep(s, &context))
            .transpose()?;
        Ok(ResolvedRun {
            device_name,
            device,
            context,
            scenario,
            sweep,
        })
    }

    fn resolve_device(&self) -> CliResult<(Option<String>, DeviceBandProfile)> {
        let src = &self.device;
        let (name, mut device) = match (&src.bundled, &src.inline) {
            (Some(name), None) => (
                Some(name.clone()),
                bundled_device(name)
                    .ok_or_else(|| CliError::Config(format!("unknown bundled device '{name}'")))?,
            ),
            (None, Some(inline)) => (None, *inline),
            _ => {
                return Err(CliError::Config(
                    "device needs exactly one of 'bundled' or 'inline'".into(),
                ))
            }
        };
        if let Some(delta) = src.delta_ca_mw {
            device.delta_ca_mw = delta;
        }
        device.validate()?;
        Ok((name, device))
    }

    fn resolve_context(
        &self,
        device: &DeviceBandProfile,
        seed_override: Option<u64>,
    ) -> CliResult<ContextProfile> {
        let src = &self.context;
        match (&src.bundled, &src.inline, &src.derive) {
            (Some(label), None, None) => bundled_context(label)
                .cloned()
                .ok_or_else(|| CliError::Config(format!("unknown bundled context '{label}'"))),
            (None, Some(inline), None) => {
                inline.validate()?;
                Ok(inline.clone())
            }
            (None, None, Some(d)) => derive_context(d, device.gamma_dbm, seed_override),
            _ => Err(CliError::Config(
                "context needs exactly one of 'bundled', 'inline' or 'derive'".into(),
            )),
        }
    }

    fn resolve_scenario(&self) -> CliResult<TrafficScenario> {
        let c = &self.scenario;
        let d = TrafficScenario::default();
        let a_ca = c.a_ca.unwrap_or(d.a_ca);
        let scenario = TrafficScenario {
            lambda_per_s: c.lambda_per_s.unwrap_or(d.lambda_per_s),
            d_dl_bit: c.d_dl_bit.unwrap_or(d.d_dl_bit),
            d_dlul: c.d_dlul.unwrap_or(d.d_dlul),
            r_dlul: c.r_dlul.unwrap_or(d.r_dlul),
            r_dl_nominal_bps: c.r_dl_nominal_bps.unwrap_or(d.r_dl_nominal_bps),
            a_ca,
            ca_enabled: c.ca_enabled.unwrap_or(a_ca > 1.0),
        };
        scenario.validate()?;
        Ok(scenario)
    }
}

pub fn derive_context(
    d: &DeriveConfig,
    device_gamma_dbm: f64,
    seed_override: Option<u64>,
) -> CliResult<ContextProfile> {
    let env = match &d.environment {
        Named::Name(n) => environment_by_name(n)?,
        Named::Inline(e) => e.clone(),
    };
    let mob = match &d.mobility {
        Named::Name(n) => mobility_by_name(n)?,
        Named::Inline(m) => m.clone(),
    };
    let mut budget = LinkBudget::new(d.band_mhz);
    budget.target_rx_power_dbm = d.target_rx_power_dbm.unwrap_or(DEFAULT_TARGET_RX_POWER_DBM);
    budget.antenna_gains_db = d.antenna_gains_db.unwrap_or(0.0);
    let seed = seed_override.or(d.seed).unwrap_or(DEFAULT_SEED);
    let mut ctx = derive_theta(
        &env,
        &mob,
        &budget,
        d.gamma_dbm.unwrap_or(device_gamma_dbm),
        d.samples.unwrap_or(DEFAULT_SAMPLES),
        seed,
    )?;
    if let Some(f) = d.max_state_rate_factor {
        ctx.max_state_rate_factor = f;
        ctx.validate()?;
    }
    Ok(ctx)
}

pub fn environment_by_name(name: &str) -> CliResult<EnvironmentSpec> {
    EnvironmentSpec::all()
        .into_iter()
        .find(|e| e.environment_name == name)
        .ok_or_else(|| CliError::Config(format!("unknown environment '{name}'")))
}

pub fn mobility_by_name(name: &str) -> CliResult<MobilitySpec> {
    MobilitySpec::all()
        .into_iter()
        .find(|m| m.name == name)
        .ok_or_else(|| CliError::Config(format!("unknown mobility '{name}'")))
}

/// Grid points `start + k * step` up to `stop` inclusive.
pub fn range_values(r: &RangeConfig) -> CliResult<Vec<f64>> {
    if !(r.step > 0.0 && r.stop >= r.start && r.start.is_finite() && r.stop.is_finite()) {
        return Err(CliError::Config(
            "range needs step > 0 and stop >= start".into(),
        ));
    }
    let n = ((r.stop - r.start) / r.step + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| r.start + r.step * k as f64).collect())
}

fn resolve_sweep(s: &SweepConfig, context: &ContextProfile) -> CliResult<ResolvedSweep> {
    let values = match (&s.values, &s.range) {
        (Some(v), None) => v.clone(),
        (None, Some(r)) => range_values(r)?,
        _ => {
            return Err(CliError::Config(
                "sweep needs exactly one of 'values' or 'range'".into(),
            ))
        }
    };
    let pairing = s
        .pairing
        .as_ref()
        .map(|p| resolve_pairing(p, context))
        .transpose()?;
    Ok(ResolvedSweep {
        axis: s.axis,
        values,
        pairing,
    })
}

/// Bundled labels are `<environment>-<mobility>-<band>`.
fn resolve_pairing(p: &Pairing, base: &ContextProfile) -> CliResult<Vec<ContextProfile>> {
    let labels: Vec<String> = match p {
        Pairing::Labels(l) => l.clone(),
        Pairing::Kind(kind) => {
            let parts: Vec<&str> = base.label.split('-').collect();
            let [env, mob, band] = parts.as_slice() else {
                return Err(CliError::Config(format!(
                    "pairing '{kind}' needs a bundled base context, got '{}'",
                    base.label
                )));
            };
            match kind.as_str() {
                "environment" => EnvironmentSpec::all()
                    .iter()
                    .map(|e| format!("{}-{mob}-{band}", e.environment_name))
                    .collect(),
                "mobility" => MobilitySpec::all()
                    .iter()
                    .map(|m| format!("{env}-{}-{band}", m.name))
                    .collect(),
                other => {
                    return Err(CliError::Config(format!(
                        "pairing must be 'environment', 'mobility' or a label list, got '{other}'"
                    )))
                }
            }
        }
    };
    labels
        .iter()
        .map(|l| {
            bundled_contexts()
                .iter()
                .find(|c| &c.label == l)
                .cloned()
                .ok_or_else(|| CliError::Config(format!("unknown bundled context '{l}'")))
        })
        .collect()
}
