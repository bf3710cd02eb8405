//! Parameter sweeps over file size and boost factor, and the CA breakeven
//! boost factor.
//!
//! The CA-vs-baseline difference of every active state's mixed power is
//! `delta_ca / a - (1 - 1/a) * (P_low - P_idle)`; it does not depend on the
//! state because the uplink share `d_dlul / r_dlul` is the same everywhere.
//! The breakeven therefore sits at `1 + delta_ca / (P_low - P_idle)` for any
//! context, arrival rate or file size. [`breakeven_boost`] finds it by
//! bisection on the full model and reports the closed form next to it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::{map_ordered, Execution};
use crate::power_model::{
    total_power, ContextProfile, DeviceBandProfile, PowerReport, TrafficScenario,
};

/// Boost factors above this are flagged as beyond practical CA gains.
pub const PRACTICAL_BOOST_LIMIT: f64 = 2.0;
pub const BISECTION_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    FileSize,
    BoostFactor,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::FileSize => "file_size",
            SweepAxis::BoostFactor => "boost_factor",
        }
    }

    fn apply(self, base: &TrafficScenario, value: f64) -> TrafficScenario {
        match self {
            SweepAxis::FileSize => TrafficScenario {
                d_dl_bit: value,
                ..*base
            },
            SweepAxis::BoostFactor => base.with_boost(value),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub device: DeviceBandProfile,
    pub context: ContextProfile,
    pub scenario: TrafficScenario,
    /// When present, one curve per context replaces `context`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairing: Option<Vec<ContextProfile>>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::invalid("sweep needs at least one value"));
        }
        if self.values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("sweep values must be strictly increasing"));
        }
        for &v in &self.values {
            let ok = match self.axis {
                SweepAxis::FileSize => v.is_finite() && v > 0.0,
                SweepAxis::BoostFactor => v.is_finite() && v >= 1.0,
            };
            if !ok {
                return Err(Error::invalid(format!(
                    "{} value {v} outside its valid range",
                    self.axis.name()
                )));
            }
        }
        self.device.validate()?;
        self.scenario.validate()?;
        for ctx in self.contexts() {
            ctx.validate()?;
        }
        if matches!(&self.pairing, Some(p) if p.is_empty()) {
            return Err(Error::invalid("pairing must list at least one context"));
        }
        Ok(())
    }

    pub fn contexts(&self) -> &[ContextProfile] {
        match &self.pairing {
            Some(list) => list,
            None => std::slice::from_ref(&self.context),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub axis: SweepAxis,
    pub axis_value: f64,
    pub context_label: String,
    /// Per-point failure (e.g. the classic regime) does not abort the sweep.
    pub outcome: Result<PowerReport>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    /// Fully resolved sweep specification.
    pub provenance: serde_json::Value,
}

impl SweepResult {
    /// Rows belonging to one context, in axis order.
    pub fn curve<'a>(&'a self, label: &'a str) -> impl Iterator<Item = &'a SweepRow> + 'a {
        self.rows.iter().filter(move |r| r.context_label == label)
    }
}

pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    run_sweep_with(spec, Execution::default())
}

pub fn run_sweep_with(spec: &SweepSpec, exec: Execution) -> Result<SweepResult> {
    spec.validate()?;
    let grid: Vec<(&ContextProfile, f64)> = spec
        .contexts()
        .iter()
        .flat_map(|ctx| spec.values.iter().map(move |&v| (ctx, v)))
        .collect();
    let rows = map_ordered(exec, &grid, |&(ctx, value)| SweepRow {
        axis: spec.axis,
        axis_value: value,
        context_label: ctx.label.clone(),
        outcome: total_power(&spec.device, ctx, &spec.axis.apply(&spec.scenario, value)),
    });
    let provenance = serde_json::to_value(spec).map_err(|e| Error::invalid(e.to_string()))?;
    Ok(SweepResult { rows, provenance })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Breakeven {
    /// Bisection result on the full model.
    pub boost: f64,
    pub closed_form: f64,
    pub difference: f64,
    pub iterations: u32,
    /// Set when the breakeven exceeds [`PRACTICAL_BOOST_LIMIT`].
    pub above_practical_range: bool,
}

/// `1 + delta_ca / (P_low - P_idle)`.
pub fn closed_form_breakeven(device: &DeviceBandProfile) -> f64 {
    1.0 + device.delta_ca_mw / (device.p_low_mw - device.p_idle_mw)
}

pub fn breakeven_boost(
    device: &DeviceBandProfile,
    ctx: &ContextProfile,
    scenario: &TrafficScenario,
) -> Result<Breakeven> {
    device.validate()?;
    let lower = 1.0;
    let upper = scenario.max_boost();
    if upper < lower {
        return Err(Error::ClassicRegime {
            uplink_fraction: scenario.uplink_fraction(),
            active_fraction: 1.0,
        });
    }
    // Positive while CA costs more than it saves.
    let excess = |a: f64| -> Result<f64> {
        let r = total_power(device, ctx, &scenario.with_boost(a))?;
        Ok(r.total_power_mw - r.baseline_total_power_mw)
    };

    let closed_form = closed_form_breakeven(device);
    let finish = |boost: f64, iterations: u32| Breakeven {
        boost,
        closed_form,
        difference: boost - closed_form,
        iterations,
        above_practical_range: boost > PRACTICAL_BOOST_LIMIT,
    };

    let f_lo = excess(lower)?;
    if f_lo <= 0.0 {
        return Ok(finish(lower, 0));
    }
    let f_hi = excess(upper)?;
    if f_hi > 0.0 {
        return Err(Error::NoBreakeven { lower, upper });
    }

    let (mut lo, mut hi) = (lower, upper);
    let mut iterations = 0;
    while hi - lo > BISECTION_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if excess(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    Ok(finish(0.5 * (lo + hi), iterations))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SavingsPoint {
    pub a_ca: f64,
    pub savings: Result<f64>,
    /// Savings gained per unit boost since the previous point.
    pub marginal: Option<f64>,
}

pub fn savings_curve(
    device: &DeviceBandProfile,
    ctx: &ContextProfile,
    scenario: &TrafficScenario,
    a_values: &[f64],
) -> Result<Vec<SavingsPoint>> {
    let spec = SweepSpec {
        axis: SweepAxis::BoostFactor,
        values: a_values.to_vec(),
        device: *device,
        context: ctx.clone(),
        scenario: *scenario,
        pairing: None,
    };
    let sweep = run_sweep(&spec)?;
    let mut out: Vec<SavingsPoint> = Vec::with_capacity(sweep.rows.len());
    for row in sweep.rows {
        let savings = row.outcome.map(|r| r.savings_fraction);
        let marginal = match (out.last(), &savings) {
            (Some(prev), Ok(s)) => prev
                .savings
                .as_ref()
                .ok()
                .map(|p| (s - p) / (row.axis_value - prev.a_ca)),
            _ => None,
        };
        out.push(SavingsPoint {
            a_ca: row.axis_value,
            savings,
            marginal,
        });
    }
    Ok(out)
}

/// Savings gained per unit boost between `from` and `to`.
pub fn marginal_savings(
    device: &DeviceBandProfile,
    ctx: &ContextProfile,
    scenario: &TrafficScenario,
    from: f64,
    to: f64,
) -> Result<f64> {
    let curve = savings_curve(device, ctx, scenario, &[from, to])?;
    let s0 = curve[0].savings.clone()?;
    let s1 = curve[1].savings.clone()?;
    Ok((s1 - s0) / (to - from))
}
