//! Recovery of device power parameters from measurement traces.
//!
//! * TX-power sweeps are fitted with two independent affine segments split
//!   at a breakpoint chosen by exhaustive search on a 0.5 dB grid.
//! * RB sweeps are fitted with `base + slope * rbs + delta * [scc active]`.
//! * CA band tables map (PCC, SCC) frequency pairs to the extra CA power.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::power_model::{DeviceBandProfile, TX_POWER_CAP_DBM, TX_POWER_FLOOR_DBM};

pub const GAMMA_GRID_MIN_DBM: f64 = -5.0;
pub const GAMMA_GRID_MAX_DBM: f64 = 20.0;
pub const GAMMA_GRID_STEP_DB: f64 = 0.5;
const MIN_SEGMENT_POINTS: usize = 3;
/// Tolerance on the trace covering [-10, 23] dBm.
const RANGE_SLACK_DB: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TxPoint {
    pub tx_power_dbm: f64,
    pub consumption_mw: f64,
}

/// Power consumption over transmit power for one band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TxPowerTrace {
    pub points: Vec<TxPoint>,
    pub band_mhz: f64,
    pub device: String,
}

impl TxPowerTrace {
    pub fn new(points: Vec<TxPoint>, band_mhz: f64, device: impl Into<String>) -> Result<Self> {
        let trace = TxPowerTrace {
            points,
            band_mhz,
            device: device.into(),
        };
        trace.validate()?;
        Ok(trace)
    }

    pub fn validate(&self) -> Result<()> {
        if self.points.len() < 8 {
            return Err(Error::invalid(format!(
                "TX-power trace needs at least 8 points, got {}",
                self.points.len()
            )));
        }
        if self
            .points
            .iter()
            .any(|p| !p.tx_power_dbm.is_finite() || !p.consumption_mw.is_finite())
        {
            return Err(Error::invalid("TX-power trace contains non-finite values"));
        }
        if self
            .points
            .windows(2)
            .any(|w| w[1].tx_power_dbm <= w[0].tx_power_dbm)
        {
            return Err(Error::invalid("tx_power_dbm must be strictly increasing"));
        }
        let first = self.points[0].tx_power_dbm;
        let last = self.points[self.points.len() - 1].tx_power_dbm;
        if first > TX_POWER_FLOOR_DBM + RANGE_SLACK_DB || last < TX_POWER_CAP_DBM - RANGE_SLACK_DB {
            return Err(Error::invalid(format!(
                "trace covers [{first}, {last}] dBm, expected at least \
                 [{TX_POWER_FLOOR_DBM}, {TX_POWER_CAP_DBM}] within {RANGE_SLACK_DB} dB"
            )));
        }
        Ok(())
    }

    /// Parses `tx_power_dbm,consumption_mw` CSV.
    pub fn from_csv<R: Read>(reader: R, band_mhz: f64, device: impl Into<String>) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            tx_power_dbm: f64,
            consumption_mw: f64,
        }
        let rows: Vec<Row> = read_csv_rows(reader, &["tx_power_dbm", "consumption_mw"])?;
        let points = rows
            .into_iter()
            .map(|r| TxPoint {
                tx_power_dbm: r.tx_power_dbm,
                consumption_mw: r.consumption_mw,
            })
            .collect();
        TxPowerTrace::new(points, band_mhz, device)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(writer);
        w.write_record(["tx_power_dbm", "consumption_mw"])
            .map_err(io_err)?;
        for p in &self.points {
            w.write_record([p.tx_power_dbm.to_string(), p.consumption_mw.to_string()])
                .map_err(io_err)?;
        }
        w.flush().map_err(|e| Error::invalid(e.to_string()))
    }
}

/// `consumption = intercept + slope * tx_power`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineSegment {
    pub intercept_mw: f64,
    pub slope_mw_per_db: f64,
}

impl AffineSegment {
    pub fn eval(&self, tx_power_dbm: f64) -> f64 {
        self.intercept_mw + self.slope_mw_per_db * tx_power_dbm
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridCandidate {
    pub gamma_dbm: f64,
    /// Total squared residual, `None` when a side has fewer than 3 points.
    pub residual_ss: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaFit {
    pub gamma_dbm: f64,
    pub low_segment: AffineSegment,
    pub high_segment: AffineSegment,
    pub residual_ss: f64,
    /// Low-state power, read off at 0 dBm.
    pub p_low_mw: f64,
    /// High-state power, read off midway between the breakpoint and the cap.
    pub p_high_mw: f64,
    /// Max-state power, read off at the cap.
    pub p_max_mw: f64,
    pub grid: Vec<GridCandidate>,
}

impl PaFit {
    pub fn eval(&self, tx_power_dbm: f64) -> f64 {
        if tx_power_dbm <= self.gamma_dbm {
            self.low_segment.eval(tx_power_dbm)
        } else {
            self.high_segment.eval(tx_power_dbm)
        }
    }

    /// Completes a device profile with parameters that are not on the trace.
    pub fn device_profile(
        &self,
        frequency_mhz: f64,
        p_idle_mw: f64,
        delta_ca_mw: f64,
        rb_slope_mw_per_rb: f64,
    ) -> Result<DeviceBandProfile> {
        let profile = DeviceBandProfile {
            frequency_mhz,
            p_idle_mw,
            p_low_mw: self.p_low_mw,
            p_high_mw: self.p_high_mw,
            p_max_mw: self.p_max_mw,
            gamma_dbm: self.gamma_dbm,
            delta_ca_mw,
            rb_slope_mw_per_rb,
        };
        profile.validate()?;
        Ok(profile)
    }
}

/// Breakpoint candidates, ascending.
pub fn gamma_grid() -> Vec<f64> {
    let steps = ((GAMMA_GRID_MAX_DBM - GAMMA_GRID_MIN_DBM) / GAMMA_GRID_STEP_DB).round() as usize;
    (0..=steps)
        .map(|k| GAMMA_GRID_MIN_DBM + GAMMA_GRID_STEP_DB * k as f64)
        .collect()
}

/// Ordinary least squares line through `(x, y)`; returns the segment and its
/// squared residual.
fn fit_line(xs: &[f64], ys: &[f64]) -> (AffineSegment, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let slope = sxy / sxx;
    let seg = AffineSegment {
        intercept_mw: my - slope * mx,
        slope_mw_per_db: slope,
    };
    let rss = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - seg.eval(*x);
            r * r
        })
        .sum();
    (seg, rss)
}

pub fn fit_pa_model(trace: &TxPowerTrace) -> Result<PaFit> {
    trace.validate()?;
    let xs: Vec<f64> = trace.points.iter().map(|p| p.tx_power_dbm).collect();
    let ys: Vec<f64> = trace.points.iter().map(|p| p.consumption_mw).collect();

    let mut grid = Vec::new();
    let mut best: Option<(f64, AffineSegment, AffineSegment, f64)> = None;
    for gamma in gamma_grid() {
        // Points at the breakpoint belong to the low-power amplifier.
        let split = xs.partition_point(|&x| x <= gamma);
        if split < MIN_SEGMENT_POINTS || xs.len() - split < MIN_SEGMENT_POINTS {
            grid.push(GridCandidate {
                gamma_dbm: gamma,
                residual_ss: None,
            });
            continue;
        }
        let (low, rss_low) = fit_line(&xs[..split], &ys[..split]);
        let (high, rss_high) = fit_line(&xs[split..], &ys[split..]);
        let rss = rss_low + rss_high;
        grid.push(GridCandidate {
            gamma_dbm: gamma,
            residual_ss: Some(rss),
        });
        if best.as_ref().is_none_or(|b| rss < b.3) {
            best = Some((gamma, low, high, rss));
        }
    }

    let (gamma, low, high, rss) = best.ok_or_else(|| {
        Error::UnderdeterminedFit(format!(
            "no breakpoint in [{GAMMA_GRID_MIN_DBM}, {GAMMA_GRID_MAX_DBM}] dBm leaves \
             {MIN_SEGMENT_POINTS} points on both sides"
        ))
    })?;
    let mut fit = PaFit {
        gamma_dbm: gamma,
        low_segment: low,
        high_segment: high,
        residual_ss: rss,
        p_low_mw: 0.0,
        p_high_mw: 0.0,
        p_max_mw: 0.0,
        grid,
    };
    fit.p_low_mw = fit.eval(0.0);
    fit.p_high_mw = fit.eval((gamma + TX_POWER_CAP_DBM) / 2.0);
    fit.p_max_mw = fit.eval(TX_POWER_CAP_DBM);
    Ok(fit)
}

/// Noiseless two-segment TX-power trace on `[from, to]` in `step` dB
/// increments.
pub fn synthetic_tx_trace(
    low: AffineSegment,
    high: AffineSegment,
    gamma_dbm: f64,
    from_dbm: f64,
    to_dbm: f64,
    step_db: f64,
) -> Vec<TxPoint> {
    let n = ((to_dbm - from_dbm) / step_db).round() as usize;
    (0..=n)
        .map(|k| {
            let x = from_dbm + step_db * k as f64;
            let seg = if x <= gamma_dbm { low } else { high };
            TxPoint {
                tx_power_dbm: x,
                consumption_mw: seg.eval(x),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RbPoint {
    pub total_rbs: u32,
    pub scc_active: bool,
    pub consumption_mw: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RbSweepTrace {
    pub points: Vec<RbPoint>,
    pub bandwidth_per_cc_mhz: f64,
}

impl RbSweepTrace {
    pub fn new(points: Vec<RbPoint>, bandwidth_per_cc_mhz: f64) -> Result<Self> {
        let trace = RbSweepTrace {
            points,
            bandwidth_per_cc_mhz,
        };
        trace.validate()?;
        Ok(trace)
    }

    pub fn validate(&self) -> Result<()> {
        if self.points.len() < 6 {
            return Err(Error::invalid(format!(
                "RB sweep needs at least 6 points, got {}",
                self.points.len()
            )));
        }
        if self
            .points
            .iter()
            .any(|p| p.total_rbs < 1 || !p.consumption_mw.is_finite())
        {
            return Err(Error::invalid(
                "RB sweep points need rbs >= 1 and finite consumption",
            ));
        }
        let active = self.points.iter().filter(|p| p.scc_active).count();
        let inactive = self.points.len() - active;
        if active < 2 || inactive < 2 {
            return Err(Error::invalid(
                "RB sweep needs at least two points with and two without the SCC",
            ));
        }
        if !(self.bandwidth_per_cc_mhz.is_finite() && self.bandwidth_per_cc_mhz > 0.0) {
            return Err(Error::invalid("bandwidth_per_cc_mhz must be > 0"));
        }
        Ok(())
    }

    /// Parses `total_rbs,scc_active,consumption_mw` CSV.
    pub fn from_csv<R: Read>(reader: R, bandwidth_per_cc_mhz: f64) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            total_rbs: u32,
            scc_active: String,
            consumption_mw: f64,
        }
        let rows: Vec<Row> = read_csv_rows(reader, &["total_rbs", "scc_active", "consumption_mw"])?;
        let mut points = Vec::with_capacity(rows.len());
        for (i, r) in rows.into_iter().enumerate() {
            points.push(RbPoint {
                total_rbs: r.total_rbs,
                scc_active: parse_flag(&r.scc_active, "scc_active", i as u64 + 2)?,
                consumption_mw: r.consumption_mw,
            });
        }
        RbSweepTrace::new(points, bandwidth_per_cc_mhz)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RbFit {
    pub base_mw: f64,
    pub rb_slope_mw_per_rb: f64,
    pub delta_ca_mw: f64,
    pub residual_ss: f64,
}

impl RbFit {
    /// Depends only on the total RB count, not on how RBs are split over
    /// carriers.
    pub fn predict(&self, total_rbs: u32, scc_active: bool) -> f64 {
        self.base_mw
            + self.rb_slope_mw_per_rb * total_rbs as f64
            + if scc_active { self.delta_ca_mw } else { 0.0 }
    }
}

pub fn fit_rb_model(trace: &RbSweepTrace) -> Result<RbFit> {
    let first = trace.points.first().map(|p| p.scc_active);
    if trace.points.iter().all(|p| Some(p.scc_active) == first) {
        return Err(Error::UnderdeterminedFit(
            "SCC state never changes; the CA jump is not identifiable".into(),
        ));
    }
    trace.validate()?;

    let n = trace.points.len();
    let design = DMatrix::from_fn(n, 3, |r, c| {
        let p = &trace.points[r];
        match c {
            0 => 1.0,
            1 => p.total_rbs as f64,
            _ => f64::from(u8::from(p.scc_active)),
        }
    });
    let y = DVector::from_iterator(n, trace.points.iter().map(|p| p.consumption_mw));

    let svd = design.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smin <= smax * 1e-10 {
        return Err(Error::UnderdeterminedFit(
            "RB count and SCC state are collinear".into(),
        ));
    }
    let coef = svd
        .solve(&y, 1e-12)
        .map_err(|e| Error::UnderdeterminedFit(e.to_string()))?;
    let residual = &y - &design * &coef;
    Ok(RbFit {
        base_mw: coef[0],
        rb_slope_mw_per_rb: coef[1],
        delta_ca_mw: coef[2],
        residual_ss: residual.norm_squared(),
    })
}

/// Scales a CA power delta linearly with the component-carrier bandwidth.
pub fn bandwidth_scale_delta(
    delta_ca_at_ref_mw: f64,
    ref_bw_mhz: f64,
    target_bw_mhz: f64,
) -> Result<f64> {
    if !(ref_bw_mhz > 0.0 && target_bw_mhz > 0.0) {
        return Err(Error::invalid("bandwidths must be > 0"));
    }
    Ok(delta_ca_at_ref_mw * (target_bw_mhz / ref_bw_mhz))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CaEntry {
    pub pcc_band_mhz: u32,
    pub scc_band_mhz: u32,
    /// Absent for unsupported combinations.
    pub delta_mw: Option<f64>,
    pub supported: bool,
}

/// Extra CA power per (PCC, SCC) pair. Keys are ordered pairs: the PCC and
/// SCC roles are not interchangeable.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CaBandTable {
    entries: BTreeMap<(u32, u32), CaEntry>,
}

impl CaBandTable {
    pub fn insert(&mut self, entry: CaEntry) -> Result<()> {
        match entry.delta_mw {
            Some(d) if !(d.is_finite() && d >= 0.0) => {
                return Err(Error::invalid(format!(
                    "CA delta for ({}, {}) must be >= 0, got {d}",
                    entry.pcc_band_mhz, entry.scc_band_mhz
                )))
            }
            None if entry.supported => {
                return Err(Error::invalid(format!(
                    "supported combination ({}, {}) needs a delta",
                    entry.pcc_band_mhz, entry.scc_band_mhz
                )))
            }
            _ => {}
        }
        self.entries
            .insert((entry.pcc_band_mhz, entry.scc_band_mhz), entry);
        Ok(())
    }

    pub fn get(&self, pcc_band_mhz: u32, scc_band_mhz: u32) -> Option<&CaEntry> {
        self.entries.get(&(pcc_band_mhz, scc_band_mhz))
    }

    /// The delta of a supported combination.
    pub fn delta(&self, pcc_band_mhz: u32, scc_band_mhz: u32) -> Option<f64> {
        self.get(pcc_band_mhz, scc_band_mhz)
            .filter(|e| e.supported)
            .and_then(|e| e.delta_mw)
    }

    pub fn entries(&self) -> impl Iterator<Item = &CaEntry> {
        self.entries.values()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Parses `pcc_band_mhz,scc_band_mhz,delta_mw,supported` CSV. `delta_mw`
    /// may be empty for unsupported rows; `supported` is 0/1 or true/false.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            pcc_band_mhz: u32,
            scc_band_mhz: u32,
            delta_mw: Option<f64>,
            supported: String,
        }
        let rows: Vec<Row> = read_csv_rows(
            reader,
            &["pcc_band_mhz", "scc_band_mhz", "delta_mw", "supported"],
        )?;
        let mut table = CaBandTable::default();
        for (i, r) in rows.into_iter().enumerate() {
            let line = i as u64 + 2;
            let supported = parse_flag(&r.supported, "supported", line)?;
            table
                .insert(CaEntry {
                    pcc_band_mhz: r.pcc_band_mhz,
                    scc_band_mhz: r.scc_band_mhz,
                    delta_mw: r.delta_mw,
                    supported,
                })
                .map_err(|e| Error::Parse {
                    line,
                    message: e.to_string(),
                })?;
        }
        Ok(table)
    }
}

/// A device profile shipped with the crate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BundledDevice {
    pub name: &'static str,
    pub profile: DeviceBandProfile,
    pub note: &'static str,
}

const DELTA_NOTE: &str = "state powers and breakpoint measured; delta_ca_mw is a band-level \
                          intra-band default (10 MHz carriers), rb_slope from the 2600 MHz RB sweep";

/// Measured DUT-A / DUT-B profiles at 800 and 2600 MHz.
pub fn bundled_devices() -> Vec<BundledDevice> {
    let dev = |f, idle, low, high, max, gamma, delta| DeviceBandProfile {
        frequency_mhz: f,
        p_idle_mw: idle,
        p_low_mw: low,
        p_high_mw: high,
        p_max_mw: max,
        gamma_dbm: gamma,
        delta_ca_mw: delta,
        rb_slope_mw_per_rb: 0.8,
    };
    vec![
        BundledDevice {
            name: "dut-a-800",
            profile: dev(800.0, 97.0, 753.0, 1912.0, 3053.0, 15.0, 190.0),
            note: DELTA_NOTE,
        },
        BundledDevice {
            name: "dut-a-2600",
            profile: dev(2600.0, 97.0, 860.0, 1578.0, 2450.0, 10.0, 195.0),
            note: DELTA_NOTE,
        },
        BundledDevice {
            name: "dut-b-800",
            profile: dev(800.0, 30.0, 604.0, 1309.0, 1873.0, 12.0, 200.0),
            note: DELTA_NOTE,
        },
        BundledDevice {
            name: "dut-b-2600",
            profile: dev(2600.0, 30.0, 980.0, 1515.0, 1993.0, 12.0, 205.0),
            note: DELTA_NOTE,
        },
    ]
}

pub fn bundled_device(name: &str) -> Option<DeviceBandProfile> {
    bundled_devices()
        .into_iter()
        .find(|d| d.name == name)
        .map(|d| d.profile)
}

fn io_err(e: csv::Error) -> Error {
    Error::invalid(e.to_string())
}

fn parse_err(e: &csv::Error, fallback_line: u64) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(fallback_line);
    Error::Parse {
        line,
        message: match e.kind() {
            csv::ErrorKind::Deserialize { err, .. } => err.to_string(),
            _ => e.to_string(),
        },
    }
}

fn parse_flag(field: &str, name: &str, line: u64) -> Result<bool> {
    match field.trim() {
        "1" | "true" => Ok(true),
        "0" | "false" => Ok(false),
        other => Err(Error::Parse {
            line,
            message: format!("{name} must be 0/1 or true/false, got '{other}'"),
        }),
    }
}

fn read_csv_rows<R: Read, T: serde::de::DeserializeOwned>(
    reader: R,
    header: &[&str],
) -> Result<Vec<T>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let found = rdr.headers().map_err(|e| parse_err(&e, 1))?.clone();
    if found.is_empty() {
        return Err(Error::Parse {
            line: 1,
            message: format!("empty file, expected header '{}'", header.join(",")),
        });
    }
    if found.iter().ne(header.iter().copied()) {
        return Err(Error::Parse {
            line: 1,
            message: format!(
                "unexpected header '{}', expected '{}'",
                found.iter().collect::<Vec<_>>().join(","),
                header.join(",")
            ),
        });
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.deserialize::<T>().enumerate() {
        rows.push(rec.map_err(|e| parse_err(&e, i as u64 + 2))?);
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            line: 2,
            message: "header present but no data rows".into(),
        });
    }
    Ok(rows)
}
