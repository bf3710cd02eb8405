//! Four-state Markov power model of an LTE UE (Idle, Low, High, Max) and its
//! downlink extension with carrier aggregation.
//!
//! The UE leaves Idle with rate `lambda`; a session lands in active state `i`
//! with probability `theta_i` and stays there for `1 / mu_i`. The stationary
//! distribution of this birth-death star weights per-state powers into the
//! long-term average. For downlink sessions each active period is split into
//! an uplink slice, a pure-downlink slice and, when CA boosts the downlink
//! rate by `a_ca`, an extra idle slice; the per-state "mixed" power is the
//! time-weighted average over those slices.

use serde::{Deserialize, Serialize};

use crate::context::Derivation;
use crate::error::{Error, Result};

/// Tolerance used for probability normalisation checks.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-12;

/// Maximum UE transmit power in dBm.
pub const TX_POWER_CAP_DBM: f64 = 23.0;

/// Lower end of the measured TX-power range in dBm.
pub const TX_POWER_FLOOR_DBM: f64 = -10.0;

/// Active power states, in Markov-chain order (states 2, 3 and 4).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActiveState {
    Low,
    High,
    Max,
}

impl ActiveState {
    pub const ALL: [ActiveState; 3] = [ActiveState::Low, ActiveState::High, ActiveState::Max];

    /// Index into the three-element active-state arrays.
    pub fn index(self) -> usize {
        match self {
            ActiveState::Low => 0,
            ActiveState::High => 1,
            ActiveState::Max => 2,
        }
    }
}

/// Power profile of one device on one carrier frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviceBandProfile {
    pub frequency_mhz: f64,
    pub p_idle_mw: f64,
    pub p_low_mw: f64,
    pub p_high_mw: f64,
    pub p_max_mw: f64,
    /// Transmit power at which the device switches from the low-power to the
    /// high-power amplifier.
    pub gamma_dbm: f64,
    /// Extra power in every active state while one secondary carrier is on.
    pub delta_ca_mw: f64,
    pub rb_slope_mw_per_rb: f64,
}

impl DeviceBandProfile {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.frequency_mhz,
            self.p_idle_mw,
            self.p_low_mw,
            self.p_high_mw,
            self.p_max_mw,
            self.gamma_dbm,
            self.delta_ca_mw,
            self.rb_slope_mw_per_rb,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("device profile contains non-finite values"));
        }
        if self.frequency_mhz <= 0.0 {
            return Err(Error::invalid("frequency_mhz must be > 0"));
        }
        if !(0.0 < self.p_idle_mw
            && self.p_idle_mw < self.p_low_mw
            && self.p_low_mw <= self.p_high_mw
            && self.p_high_mw <= self.p_max_mw)
        {
            return Err(Error::invalid(format!(
                "state powers must satisfy 0 < idle < low <= high <= max, got \
                 ({}, {}, {}, {}) mW",
                self.p_idle_mw, self.p_low_mw, self.p_high_mw, self.p_max_mw
            )));
        }
        if !(TX_POWER_FLOOR_DBM < self.gamma_dbm && self.gamma_dbm < TX_POWER_CAP_DBM) {
            return Err(Error::invalid(format!(
                "gamma_dbm {} outside ({TX_POWER_FLOOR_DBM}, {TX_POWER_CAP_DBM})",
                self.gamma_dbm
            )));
        }
        if self.delta_ca_mw < 0.0 {
            return Err(Error::invalid("delta_ca_mw must be >= 0"));
        }
        if self.rb_slope_mw_per_rb < 0.0 {
            return Err(Error::invalid("rb_slope_mw_per_rb must be >= 0"));
        }
        Ok(())
    }

    /// State powers P1..P4 in mW.
    pub fn state_powers(&self) -> [f64; 4] {
        [self.p_idle_mw, self.p_low_mw, self.p_high_mw, self.p_max_mw]
    }

    /// Uplink power of an active state.
    pub fn active_power(&self, state: ActiveState) -> f64 {
        match state {
            ActiveState::Low => self.p_low_mw,
            ActiveState::High => self.p_high_mw,
            ActiveState::Max => self.p_max_mw,
        }
    }

    pub fn with_delta_ca(mut self, delta_ca_mw: f64) -> Self {
        self.delta_ca_mw = delta_ca_mw;
        self
    }
}

/// Context-dependent probabilities of entering each active state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextProfile {
    /// (theta_low, theta_high, theta_max), summing to one.
    pub theta: [f64; 3],
    /// Throughput retained in the Max state relative to the nominal rate.
    pub max_state_rate_factor: f64,
    pub label: String,
    /// Parameters the probabilities were derived from, when derived.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub derivation: Option<Derivation>,
}

impl ContextProfile {
    pub const DEFAULT_MAX_STATE_RATE_FACTOR: f64 = 0.5;

    pub fn new(
        theta: [f64; 3],
        max_state_rate_factor: f64,
        label: impl Into<String>,
    ) -> Result<Self> {
        let ctx = ContextProfile {
            theta,
            max_state_rate_factor,
            label: label.into(),
            derivation: None,
        };
        ctx.validate()?;
        Ok(ctx)
    }

    pub fn validate(&self) -> Result<()> {
        validate_theta(&self.theta)?;
        let f = self.max_state_rate_factor;
        if !(f.is_finite() && f > 0.0 && f <= 1.0) {
            return Err(Error::invalid(format!(
                "max_state_rate_factor {f} outside (0, 1]"
            )));
        }
        Ok(())
    }
}

pub(crate) fn validate_theta(theta: &[f64; 3]) -> Result<()> {
    if theta
        .iter()
        .any(|t| !(t.is_finite() && (0.0..=1.0).contains(t)))
    {
        return Err(Error::invalid(format!(
            "theta {theta:?} has entries outside [0, 1]"
        )));
    }
    let sum: f64 = theta.iter().sum();
    if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
        return Err(Error::invalid(format!("theta sums to {sum}, expected 1")));
    }
    Ok(())
}

/// Traffic description of a downlink-dominated scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrafficScenario {
    /// Session arrival rate.
    pub lambda_per_s: f64,
    /// Mean downlink file size.
    pub d_dl_bit: f64,
    /// Uplink-to-downlink data size ratio D_UL / D_DL.
    pub d_dlul: f64,
    /// Uplink-to-downlink rate ratio R_UL / R_DL.
    pub r_dlul: f64,
    /// Nominal downlink rate without CA.
    pub r_dl_nominal_bps: f64,
    /// Downlink rate boost from carrier aggregation, >= 1.
    pub a_ca: f64,
    pub ca_enabled: bool,
}

impl Default for TrafficScenario {
    fn default() -> Self {
        TrafficScenario {
            lambda_per_s: 1.0 / 300.0,
            d_dl_bit: 1e9,
            d_dlul: 0.02,
            r_dlul: 0.5,
            r_dl_nominal_bps: 20e6,
            a_ca: 2.0,
            ca_enabled: true,
        }
    }
}

impl TrafficScenario {
    /// Checks the field ranges. The uplink-window guard is checked separately
    /// by [`time_partition`] so that sweeps can report it per point.
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("lambda_per_s", self.lambda_per_s),
            ("d_dl_bit", self.d_dl_bit),
            ("d_dlul", self.d_dlul),
            ("r_dlul", self.r_dlul),
            ("r_dl_nominal_bps", self.r_dl_nominal_bps),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(format!(
                    "{name} must be finite and > 0, got {v}"
                )));
            }
        }
        if !(self.a_ca.is_finite() && self.a_ca >= 1.0) {
            return Err(Error::invalid(format!(
                "a_ca must be >= 1, got {}",
                self.a_ca
            )));
        }
        if !self.ca_enabled && self.a_ca != 1.0 {
            return Err(Error::invalid("a_ca must be 1 when CA is disabled"));
        }
        Ok(())
    }

    /// The same scenario without carrier aggregation.
    pub fn baseline(&self) -> Self {
        TrafficScenario {
            a_ca: 1.0,
            ca_enabled: false,
            ..*self
        }
    }

    pub fn with_boost(&self, a_ca: f64) -> Self {
        TrafficScenario {
            a_ca,
            ca_enabled: true,
            ..*self
        }
    }

    /// Share of every active period spent transmitting uplink data.
    pub fn uplink_fraction(&self) -> f64 {
        self.d_dlul / self.r_dlul
    }

    /// Largest boost factor for which the uplink still fits into the
    /// shortened active window.
    pub fn max_boost(&self) -> f64 {
        self.r_dlul / self.d_dlul
    }
}

/// Stationary probabilities of (Idle, Low, High, Max).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StationaryDistribution {
    pub p: [f64; 4],
}

impl StationaryDistribution {
    pub fn idle(&self) -> f64 {
        self.p[0]
    }

    pub fn active(&self, state: ActiveState) -> f64 {
        self.p[state.index() + 1]
    }
}

/// Fractions of an active period t_i = 1 / mu_DL,i.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimePartition {
    pub uplink: f64,
    pub downlink: f64,
    pub idle: f64,
}

impl TimePartition {
    pub fn sum(&self) -> f64 {
        self.uplink + self.downlink + self.idle
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerReport {
    pub total_power_mw: f64,
    /// Mixed powers of Idle, Low, High and Max.
    pub mixed_state_power_mw: [f64; 4],
    /// Per active state (Low, High, Max).
    pub time_fractions: [TimePartition; 3],
    pub stationary: StationaryDistribution,
    /// Same scenario with CA off and a_ca = 1.
    pub baseline_total_power_mw: f64,
    /// (baseline - total) / baseline.
    pub savings_fraction: f64,
}

/// Downlink service rates mu_DL of the Low, High and Max states in 1/s.
pub fn service_rates(scenario: &TrafficScenario, ctx: &ContextProfile) -> Result<[f64; 3]> {
    scenario.validate()?;
    ctx.validate()?;
    Ok(downlink_rates(scenario, ctx).map(|r| r / scenario.d_dl_bit))
}

/// Downlink rates per active state in bit/s. Only the Max state is degraded.
fn downlink_rates(scenario: &TrafficScenario, ctx: &ContextProfile) -> [f64; 3] {
    let nominal = scenario.r_dl_nominal_bps;
    [nominal, nominal, nominal * ctx.max_state_rate_factor]
}

/// Uplink rates per active state in bit/s; uplink and downlink see the same
/// channel so the rate ratio is fixed.
pub fn uplink_rates(scenario: &TrafficScenario, ctx: &ContextProfile) -> [f64; 3] {
    downlink_rates(scenario, ctx).map(|r| r * scenario.r_dlul)
}

/// Closed-form stationary distribution of the star-shaped chain where Idle
/// feeds each active state `i` with rate `theta_i * lambda` and every active
/// state returns to Idle with rate `mu_i`.
pub fn stationary_distribution(
    lambda: f64,
    theta: &[f64; 3],
    mu: &[f64; 3],
) -> Result<StationaryDistribution> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::invalid(format!("lambda must be > 0, got {lambda}")));
    }
    validate_theta(theta)?;
    if let Some(i) = mu.iter().position(|m| !(m.is_finite() && *m > 0.0)) {
        return Err(Error::DegenerateRate { state: i + 2 });
    }
    let load: [f64; 3] = std::array::from_fn(|i| theta[i] * lambda / mu[i]);
    let p_idle = 1.0 / (1.0 + load.iter().sum::<f64>());
    Ok(StationaryDistribution {
        p: [p_idle, load[0] * p_idle, load[1] * p_idle, load[2] * p_idle],
    })
}

/// Splits the active period of one state into uplink, pure-downlink and
/// CA-gained idle fractions.
pub fn time_partition(
    scenario: &TrafficScenario,
    mu_dl_i: f64,
    r_ul_i: f64,
) -> Result<TimePartition> {
    if !(mu_dl_i.is_finite() && mu_dl_i > 0.0) || !(r_ul_i.is_finite() && r_ul_i > 0.0) {
        return Err(Error::invalid("service rate and uplink rate must be > 0"));
    }
    let t_state = 1.0 / mu_dl_i;
    let t_active = t_state / scenario.a_ca;
    let t_uplink = scenario.d_dlul * scenario.d_dl_bit / r_ul_i;

    let slack = t_active - t_uplink;
    // Equality is admissible; allow a few ulps of rounding on the boundary.
    if slack < -8.0 * f64::EPSILON * t_active {
        return Err(Error::ClassicRegime {
            uplink_fraction: t_uplink / t_state,
            active_fraction: t_active / t_state,
        });
    }
    let t_downlink = slack.max(0.0);
    let t_idle = t_state - t_active;
    Ok(TimePartition {
        uplink: t_uplink / t_state,
        downlink: t_downlink / t_state,
        idle: t_idle / t_state,
    })
}

/// Mixed powers of (Idle, Low, High, Max). Pure downlink draws the Low-state
/// power. With CA on, the secondary carrier adds `delta_ca_mw` to the whole
/// active window but not to idle time.
pub fn mixed_state_power(
    device: &DeviceBandProfile,
    partitions: &[TimePartition; 3],
    ca_enabled: bool,
) -> [f64; 4] {
    let extra = if ca_enabled { device.delta_ca_mw } else { 0.0 };
    let p_downlink = device.p_low_mw + extra;
    let mut mixed = [device.p_idle_mw; 4];
    for state in ActiveState::ALL {
        let part = &partitions[state.index()];
        mixed[state.index() + 1] = part.uplink * (device.active_power(state) + extra)
            + part.downlink * p_downlink
            + part.idle * device.p_idle_mw;
    }
    mixed
}

struct Evaluation {
    total: f64,
    mixed: [f64; 4],
    partitions: [TimePartition; 3],
    stationary: StationaryDistribution,
}

fn evaluate(
    device: &DeviceBandProfile,
    ctx: &ContextProfile,
    scenario: &TrafficScenario,
) -> Result<Evaluation> {
    let mu = service_rates(scenario, ctx)?;
    let stationary = stationary_distribution(scenario.lambda_per_s, &ctx.theta, &mu)?;
    let r_ul = uplink_rates(scenario, ctx);
    let mut partitions = [TimePartition {
        uplink: 0.0,
        downlink: 0.0,
        idle: 0.0,
    }; 3];
    for i in 0..3 {
        partitions[i] = time_partition(scenario, mu[i], r_ul[i])?;
    }
    let mixed = mixed_state_power(device, &partitions, scenario.ca_enabled);
    let total = stationary.p.iter().zip(&mixed).map(|(p, w)| p * w).sum();
    Ok(Evaluation {
        total,
        mixed,
        partitions,
        stationary,
    })
}

/// Long-term average power of the downlink scenario, together with the
/// non-CA baseline.
pub fn total_power(
    device: &DeviceBandProfile,
    ctx: &ContextProfile,
    scenario: &TrafficScenario,
) -> Result<PowerReport> {
    device.validate()?;
    let main = evaluate(device, ctx, scenario)?;
    let baseline = evaluate(device, ctx, &scenario.baseline())?;
    Ok(PowerReport {
        total_power_mw: main.total,
        mixed_state_power_mw: main.mixed,
        time_fractions: main.partitions,
        stationary: main.stationary,
        baseline_total_power_mw: baseline.total,
        savings_fraction: (baseline.total - main.total) / baseline.total,
    })
}

/// The unextended uplink model: residence times from uplink rates and raw
/// state powers without mixing.
pub fn classic_uplink_total_power(
    device: &DeviceBandProfile,
    ctx: &ContextProfile,
    lambda: f64,
    d_ul_bit: f64,
    r_ul_nominal_bps: f64,
) -> Result<f64> {
    device.validate()?;
    ctx.validate()?;
    if !(d_ul_bit.is_finite() && d_ul_bit > 0.0) {
        return Err(Error::invalid("d_ul_bit must be > 0"));
    }
    if !(r_ul_nominal_bps.is_finite() && r_ul_nominal_bps > 0.0) {
        return Err(Error::invalid("r_ul_nominal_bps must be > 0"));
    }
    let rates = [
        r_ul_nominal_bps,
        r_ul_nominal_bps,
        r_ul_nominal_bps * ctx.max_state_rate_factor,
    ];
    let mu = rates.map(|r| r / d_ul_bit);
    let stationary = stationary_distribution(lambda, &ctx.theta, &mu)?;
    Ok(stationary
        .p
        .iter()
        .zip(device.state_powers())
        .map(|(p, w)| p * w)
        .sum())
}
