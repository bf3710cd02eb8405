//! Derivation of active-state probabilities from cell geometry, carrier
//! frequency and mobility.
//!
//! Users are placed uniformly in a disc of radius ISD/2. Each draw gets a
//! log-distance path loss (free-space exponent with line-of-sight
//! probability `exp(-d / los_scale)`, the environment exponent otherwise),
//! log-normal shadowing and a mobility fading margin. The resulting required
//! transmit power is classified against the device PA breakpoint and the
//! 23 dBm cap. Sampling is split into fixed-size chunks with one ChaCha
//! stream per chunk, so results do not depend on the number of workers.

use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::{map_ordered, Execution};
use crate::power_model::{ContextProfile, TX_POWER_CAP_DBM};

/// Reference distance of the log-distance model in metres.
pub const REFERENCE_DISTANCE_M: f64 = 1.0;

pub const DEFAULT_TARGET_RX_POWER_DBM: f64 = -108.0;
pub const DEFAULT_SAMPLES: usize = 100_000;
pub const DEFAULT_SEED: u64 = 0x00C0_90C0;
/// Breakpoint used for the bundled contexts, which are not tied to a device.
pub const DEFAULT_GAMMA_DBM: f64 = 12.0;
pub const MIN_SAMPLES: usize = 1000;

const CHUNK: usize = 4096;
const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentSpec {
    pub environment_name: String,
    pub inter_site_distance_m: f64,
    pub path_loss_exponent: f64,
    pub shadowing_sigma_db: f64,
    /// Decay constant of the line-of-sight probability; 0 disables LOS.
    pub los_probability_scale_m: f64,
}

impl EnvironmentSpec {
    pub fn urban() -> Self {
        Self::named("urban", 500.0, 3.8, 8.0, 20.0)
    }

    pub fn suburban() -> Self {
        Self::named("suburban", 1732.0, 3.5, 8.0, 50.0)
    }

    pub fn rural() -> Self {
        Self::named("rural", 5000.0, 2.9, 6.0, 1000.0)
    }

    pub fn all() -> [Self; 3] {
        [Self::urban(), Self::suburban(), Self::rural()]
    }

    fn named(name: &str, isd: f64, exponent: f64, sigma: f64, los: f64) -> Self {
        EnvironmentSpec {
            environment_name: name.to_string(),
            inter_site_distance_m: isd,
            path_loss_exponent: exponent,
            shadowing_sigma_db: sigma,
            los_probability_scale_m: los,
        }
    }

    pub fn cell_radius_m(&self) -> f64 {
        self.inter_site_distance_m / 2.0
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.inter_site_distance_m.is_finite() && self.inter_site_distance_m > 0.0) {
            return Err(Error::invalid("inter_site_distance_m must be > 0"));
        }
        if !(2.0..=6.0).contains(&self.path_loss_exponent) {
            return Err(Error::invalid(format!(
                "path_loss_exponent {} outside [2, 6]",
                self.path_loss_exponent
            )));
        }
        if !(self.shadowing_sigma_db.is_finite() && self.shadowing_sigma_db >= 0.0) {
            return Err(Error::invalid("shadowing_sigma_db must be >= 0"));
        }
        if !(self.los_probability_scale_m.is_finite() && self.los_probability_scale_m >= 0.0) {
            return Err(Error::invalid("los_probability_scale_m must be >= 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MobilitySpec {
    pub name: String,
    pub speed_kmh: f64,
    pub fading_margin_db: f64,
}

impl MobilitySpec {
    pub fn awgn() -> Self {
        Self::named("awgn", 0.0, 0.0)
    }

    pub fn pedestrian() -> Self {
        Self::named("pedestrian", 3.0, 3.0)
    }

    pub fn vehicular() -> Self {
        Self::named("vehicular", 60.0, 4.0)
    }

    pub fn all() -> [Self; 3] {
        [Self::awgn(), Self::pedestrian(), Self::vehicular()]
    }

    fn named(name: &str, speed: f64, margin: f64) -> Self {
        MobilitySpec {
            name: name.to_string(),
            speed_kmh: speed,
            fading_margin_db: margin,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.speed_kmh.is_finite() && self.speed_kmh >= 0.0) {
            return Err(Error::invalid("speed_kmh must be >= 0"));
        }
        if !(self.fading_margin_db.is_finite() && self.fading_margin_db >= 0.0) {
            return Err(Error::invalid("fading_margin_db must be >= 0"));
        }
        if self.speed_kmh == 0.0 && self.fading_margin_db != 0.0 {
            return Err(Error::invalid(
                "a static (AWGN) channel has no fading margin",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    /// Receive power the base station needs.
    pub target_rx_power_dbm: f64,
    pub tx_power_cap_dbm: f64,
    pub frequency_mhz: f64,
    pub antenna_gains_db: f64,
}

impl LinkBudget {
    pub fn new(frequency_mhz: f64) -> Self {
        LinkBudget {
            target_rx_power_dbm: DEFAULT_TARGET_RX_POWER_DBM,
            tx_power_cap_dbm: TX_POWER_CAP_DBM,
            frequency_mhz,
            antenna_gains_db: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.tx_power_cap_dbm != TX_POWER_CAP_DBM {
            return Err(Error::invalid(format!(
                "tx_power_cap_dbm must be {TX_POWER_CAP_DBM}"
            )));
        }
        if !(self.frequency_mhz.is_finite() && self.frequency_mhz > 0.0) {
            return Err(Error::invalid("frequency_mhz must be > 0"));
        }
        if !self.target_rx_power_dbm.is_finite() || !self.antenna_gains_db.is_finite() {
            return Err(Error::invalid("link budget values must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Propagation {
    LineOfSight,
    Obstructed,
}

/// Provenance of a derived context profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Derivation {
    pub environment: EnvironmentSpec,
    pub mobility: MobilitySpec,
    pub budget: LinkBudget,
    pub device_gamma_dbm: f64,
    pub samples: usize,
    pub seed: u64,
}

/// Free-space loss at the reference distance.
pub fn reference_loss_db(frequency_mhz: f64) -> f64 {
    let wavelength_m = SPEED_OF_LIGHT / (frequency_mhz * 1e6);
    20.0 * (4.0 * std::f64::consts::PI * REFERENCE_DISTANCE_M / wavelength_m).log10()
}

/// Log-distance path loss. Distances inside the reference distance are
/// clamped to it.
pub fn path_loss_db(frequency_mhz: f64, exponent: f64, distance_m: f64) -> f64 {
    let d = distance_m.max(REFERENCE_DISTANCE_M);
    reference_loss_db(frequency_mhz) + 10.0 * exponent * (d / REFERENCE_DISTANCE_M).log10()
}

/// Transmit power needed to reach the base station at `distance_m`, for a
/// given shadowing deviate `shadowing_z` (in standard deviations).
pub fn required_tx_power(
    env: &EnvironmentSpec,
    mob: &MobilitySpec,
    budget: &LinkBudget,
    distance_m: f64,
    shadowing_z: f64,
    propagation: Propagation,
) -> Result<f64> {
    let radius = env.cell_radius_m();
    if !(distance_m > 0.0 && distance_m <= radius) {
        return Err(Error::OutOfCell {
            distance_m,
            radius_m: radius,
        });
    }
    Ok(tx_power_unchecked(
        env,
        mob,
        budget,
        distance_m,
        shadowing_z,
        propagation,
    ))
}

fn tx_power_unchecked(
    env: &EnvironmentSpec,
    mob: &MobilitySpec,
    budget: &LinkBudget,
    distance_m: f64,
    shadowing_z: f64,
    propagation: Propagation,
) -> f64 {
    let exponent = match propagation {
        Propagation::LineOfSight => 2.0,
        Propagation::Obstructed => env.path_loss_exponent,
    };
    budget.target_rx_power_dbm
        + path_loss_db(budget.frequency_mhz, exponent, distance_m)
        + env.shadowing_sigma_db * shadowing_z
        + mob.fading_margin_db
        - budget.antenna_gains_db
}

/// Index of the active state (0 = Low, 1 = High, 2 = Max) a transmit power
/// falls into.
pub fn classify_tx_power(tx_power_dbm: f64, gamma_dbm: f64) -> usize {
    if tx_power_dbm >= TX_POWER_CAP_DBM {
        2
    } else if tx_power_dbm <= gamma_dbm {
        0
    } else {
        1
    }
}

pub fn derive_theta(
    env: &EnvironmentSpec,
    mob: &MobilitySpec,
    budget: &LinkBudget,
    device_gamma_dbm: f64,
    samples: usize,
    seed: u64,
) -> Result<ContextProfile> {
    derive_theta_with(
        env,
        mob,
        budget,
        device_gamma_dbm,
        samples,
        seed,
        Execution::default(),
    )
}

pub fn derive_theta_with(
    env: &EnvironmentSpec,
    mob: &MobilitySpec,
    budget: &LinkBudget,
    device_gamma_dbm: f64,
    samples: usize,
    seed: u64,
    exec: Execution,
) -> Result<ContextProfile> {
    env.validate()?;
    mob.validate()?;
    budget.validate()?;
    if samples < MIN_SAMPLES {
        return Err(Error::invalid(format!("samples must be >= {MIN_SAMPLES}")));
    }
    if !device_gamma_dbm.is_finite() {
        return Err(Error::invalid("device_gamma_dbm must be finite"));
    }

    let chunks: Vec<usize> = (0..samples.div_ceil(CHUNK)).collect();
    let counts = map_ordered(exec, &chunks, |&chunk| {
        let len = CHUNK.min(samples - chunk * CHUNK);
        count_chunk(env, mob, budget, device_gamma_dbm, seed, chunk as u64, len)
    });
    let mut total = [0u64; 3];
    for c in counts {
        for i in 0..3 {
            total[i] += c[i];
        }
    }

    let n = samples as f64;
    let label = format!(
        "{}-{}-{}",
        env.environment_name, mob.name, budget.frequency_mhz
    );
    let mut ctx = ContextProfile::new(
        total.map(|c| c as f64 / n),
        ContextProfile::DEFAULT_MAX_STATE_RATE_FACTOR,
        label,
    )?;
    ctx.derivation = Some(Derivation {
        environment: env.clone(),
        mobility: mob.clone(),
        budget: *budget,
        device_gamma_dbm,
        samples,
        seed,
    });
    Ok(ctx)
}

fn count_chunk(
    env: &EnvironmentSpec,
    mob: &MobilitySpec,
    budget: &LinkBudget,
    gamma: f64,
    seed: u64,
    stream: u64,
    len: usize,
) -> [u64; 3] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let radius = env.cell_radius_m();
    let mut counts = [0u64; 3];
    for _ in 0..len {
        // (0, 1] so the distance is never zero.
        let u: f64 = 1.0 - rng.random::<f64>();
        let distance = radius * u.sqrt();
        let z: f64 = rng.sample(StandardNormal);
        let los_draw: f64 = rng.random();
        let los = env.los_probability_scale_m > 0.0
            && los_draw < (-distance / env.los_probability_scale_m).exp();
        let propagation = if los {
            Propagation::LineOfSight
        } else {
            Propagation::Obstructed
        };
        let tx = tx_power_unchecked(env, mob, budget, distance, z, propagation);
        counts[classify_tx_power(tx, gamma)] += 1;
    }
    counts
}

/// The 18 default contexts (3 environments x 3 mobilities x 2 bands),
/// classified against `gamma_dbm`.
pub fn contexts_for_gamma(gamma_dbm: f64) -> Result<Vec<ContextProfile>> {
    let mut out = Vec::with_capacity(18);
    for env in EnvironmentSpec::all() {
        for mob in MobilitySpec::all() {
            for freq in [800.0, 2600.0] {
                out.push(derive_theta(
                    &env,
                    &mob,
                    &LinkBudget::new(freq),
                    gamma_dbm,
                    DEFAULT_SAMPLES,
                    DEFAULT_SEED,
                )?);
            }
        }
    }
    Ok(out)
}

/// Default contexts with the generic breakpoint, computed once.
pub fn bundled_contexts() -> &'static [ContextProfile] {
    static BUNDLED: OnceLock<Vec<ContextProfile>> = OnceLock::new();
    BUNDLED.get_or_init(|| {
        contexts_for_gamma(DEFAULT_GAMMA_DBM).expect("default context parameters are valid")
    })
}

pub fn bundled_context(label: &str) -> Option<&'static ContextProfile> {
    bundled_contexts().iter().find(|c| c.label == label)
}
