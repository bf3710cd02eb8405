//! Generators, oracles and property checks shared by the property tests and
//! the acceptance binary.
#![allow(dead_code)]

use copomo::context::{derive_theta_with, EnvironmentSpec, LinkBudget, MobilitySpec, MIN_SAMPLES};
use copomo::device_lab::{
    fit_pa_model, fit_rb_model, synthetic_tx_trace, AffineSegment, CaBandTable, CaEntry, RbPoint,
    RbSweepTrace, TxPowerTrace,
};
use copomo::par::Execution;
use copomo::power_model::{
    service_rates, stationary_distribution, time_partition, total_power, uplink_rates,
    ContextProfile, DeviceBandProfile, TrafficScenario,
};
use copomo::scenario::{
    breakeven_boost, closed_form_breakeven, run_sweep_with, SweepAxis, SweepSpec,
};
use nalgebra::{Matrix4, Vector4};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

pub const MIN_CASES: u32 = 1000;

/// Deterministic runner with at least [`MIN_CASES`] cases; `PROPTEST_CASES`
/// can raise the count.
pub fn runner() -> TestRunner {
    let cases = Config::default().cases.max(MIN_CASES);
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

/// Stationary vector of the explicit 4-state generator, solved by LU with the
/// last balance equation replaced by normalization.
pub fn generator_stationary(lambda: f64, theta: &[f64; 3], mu: &[f64; 3]) -> [f64; 4] {
    let mut q = Matrix4::<f64>::zeros();
    for i in 0..3 {
        q[(0, i + 1)] = theta[i] * lambda;
        q[(i + 1, 0)] = mu[i];
    }
    for r in 0..4 {
        let out: f64 = (0..4).filter(|&c| c != r).map(|c| q[(r, c)]).sum();
        q[(r, r)] = -out;
    }
    let mut a = q.transpose();
    for c in 0..4 {
        a[(3, c)] = 1.0;
    }
    let b = Vector4::new(0.0, 0.0, 0.0, 1.0);
    let x = a.lu().solve(&b).expect("generator system is regular");
    [x[0], x[1], x[2], x[3]]
}

fn log_uniform(lo_exp: f64, hi_exp: f64) -> impl Strategy<Value = f64> {
    (lo_exp..hi_exp).prop_map(|e| 10f64.powf(e))
}

/// Normalized theta; a third of the draws put one entry at exactly zero.
pub fn theta() -> impl Strategy<Value = [f64; 3]> {
    (0.0..1.0f64, 0.0..1.0f64, 0.0..1.0f64, 0usize..9).prop_map(|(a, b, c, zero)| {
        let mut w = [a + 1e-3, b + 1e-3, c + 1e-3];
        if zero < 3 {
            w[zero] = 0.0;
        }
        let s: f64 = w.iter().sum();
        let t0 = w[0] / s;
        let t1 = w[1] / s;
        let t2 = if w[2] == 0.0 {
            0.0
        } else {
            (1.0 - t0 - t1).max(0.0)
        };
        [t0, t1, t2]
    })
}

pub fn context() -> impl Strategy<Value = ContextProfile> {
    (theta(), 0.05..=1.0f64)
        .prop_map(|(t, f)| ContextProfile::new(t, f, "random").expect("valid context"))
}

pub fn device() -> impl Strategy<Value = DeviceBandProfile> {
    (
        10.0..200.0f64,
        100.0..1500.0f64,
        0.0..2000.0f64,
        0.0..2000.0f64,
        -9.5..22.5f64,
        0.0..500.0f64,
    )
        .prop_map(|(idle, low, high, max, gamma, delta)| DeviceBandProfile {
            frequency_mhz: 800.0,
            p_idle_mw: idle,
            p_low_mw: idle + low,
            p_high_mw: idle + low + high,
            p_max_mw: idle + low + high + max,
            gamma_dbm: gamma,
            delta_ca_mw: delta,
            rb_slope_mw_per_rb: 0.8,
        })
}

/// Valid scenario with CA on and a boost inside the admissible range.
pub fn scenario() -> impl Strategy<Value = TrafficScenario> {
    (
        log_uniform(-4.0, 0.0),
        log_uniform(6.0, 10.0),
        0.05..1.0f64,
        0.01..0.9f64,
        log_uniform(6.0, 8.0),
        0.0..=1.0f64,
    )
        .prop_map(|(lambda, d, r_dlul, share, rate, u)| {
            let d_dlul = r_dlul * share;
            let max = r_dlul / d_dlul;
            TrafficScenario {
                lambda_per_s: lambda,
                d_dl_bit: d,
                d_dlul,
                r_dlul,
                r_dl_nominal_bps: rate,
                a_ca: 1.0 + u * (max - 1.0),
                ca_enabled: true,
            }
        })
}

/// Device and scenario whose breakeven lies inside the admissible boost range.
pub fn breakeven_case(
) -> impl Strategy<Value = (DeviceBandProfile, ContextProfile, TrafficScenario)> {
    (device(), context(), scenario()).prop_map(|(dev, ctx, mut sc)| {
        let a_star = closed_form_breakeven(&dev);
        // Shrink the uplink share until the bracket contains a*, with margin.
        let max = sc.max_boost();
        if max < 1.5 * a_star {
            sc.d_dlul = sc.r_dlul / (1.5 * a_star);
        }
        sc.a_ca = 1.0;
        (dev, ctx, sc)
    })
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

fn fail(e: impl std::fmt::Display) -> TestCaseError {
    TestCaseError::fail(e.to_string())
}

pub type Check = fn() -> Result<(), String>;

fn run<S: Strategy>(
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    runner().run(&strategy, test).map_err(|e| e.to_string())
}

// power-model

pub fn stationary_normalized() -> Result<(), String> {
    run(
        (
            log_uniform(-6.0, 1.0),
            theta(),
            [
                log_uniform(-5.0, 1.0),
                log_uniform(-5.0, 1.0),
                log_uniform(-5.0, 1.0),
            ],
        ),
        |(lambda, theta, mu)| {
            let s = stationary_distribution(lambda, &theta, &mu).map_err(fail)?;
            prop_assert!((s.p.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            prop_assert!(s.p.iter().all(|&p| p >= 0.0));
            prop_assert!(s.p[0] > 0.0);
            Ok(())
        },
    )
}

pub fn stationary_matches_generator() -> Result<(), String> {
    run(
        (
            log_uniform(-5.0, 1.0),
            theta(),
            [
                log_uniform(-4.0, 1.0),
                log_uniform(-4.0, 1.0),
                log_uniform(-4.0, 1.0),
            ],
        ),
        |(lambda, theta, mu)| {
            let s = stationary_distribution(lambda, &theta, &mu).map_err(fail)?;
            let o = generator_stationary(lambda, &theta, &mu);
            let err = (0..4).map(|i| (s.p[i] - o[i]).abs()).fold(0.0, f64::max);
            prop_assert!(err <= 1e-9, "max abs error {err}");
            Ok(())
        },
    )
}

pub fn partition_normalized() -> Result<(), String> {
    run((context(), scenario()), |(ctx, sc)| {
        let mu = service_rates(&sc, &ctx).map_err(fail)?;
        let r_ul = uplink_rates(&sc, &ctx);
        for i in 0..3 {
            let t = time_partition(&sc, mu[i], r_ul[i]).map_err(fail)?;
            prop_assert!((t.sum() - 1.0).abs() <= 1e-12, "sum {}", t.sum());
            prop_assert!(t.uplink >= 0.0 && t.downlink >= 0.0 && t.idle >= 0.0);
        }
        Ok(())
    })
}

pub fn uplink_share_state_independent() -> Result<(), String> {
    run((device(), context(), scenario()), |(dev, ctx, sc)| {
        let r = total_power(&dev, &ctx, &sc).map_err(fail)?;
        let f = r.time_fractions.map(|t| t.uplink);
        prop_assert!(
            (f[0] - f[1]).abs() <= 1e-12 && (f[0] - f[2]).abs() <= 1e-12,
            "{f:?}"
        );
        Ok(())
    })
}

pub fn total_power_bounded() -> Result<(), String> {
    run((device(), context(), scenario()), |(dev, ctx, sc)| {
        let r = total_power(&dev, &ctx, &sc).map_err(fail)?;
        let tol = 1e-9 * dev.p_max_mw;
        prop_assert!(r.total_power_mw >= dev.p_idle_mw - tol);
        prop_assert!(r.total_power_mw <= dev.p_max_mw + dev.delta_ca_mw + tol);
        prop_assert!(r.savings_fraction <= 1.0);
        Ok(())
    })
}

pub fn total_power_decreasing_in_boost() -> Result<(), String> {
    run(
        (device(), context(), scenario(), 0.0..1.0f64, 0.0..1.0f64),
        |(dev, ctx, sc, u, v)| {
            let max = sc.max_boost();
            let a1 = 1.0 + u * (max - 1.0);
            let a2 = a1 + (1e-3 + v) * (max - a1);
            prop_assume!(a2 > a1 + 1e-3 && a2 <= max);
            let p1 = total_power(&dev, &ctx, &sc.with_boost(a1)).map_err(fail)?;
            let p2 = total_power(&dev, &ctx, &sc.with_boost(a2)).map_err(fail)?;
            prop_assert!(
                p2.total_power_mw < p1.total_power_mw,
                "{} !< {}",
                p2.total_power_mw,
                p1.total_power_mw
            );
            Ok(())
        },
    )
}

pub fn unit_boost_without_delta_recovers_baseline() -> Result<(), String> {
    run((device(), context(), scenario()), |(dev, ctx, sc)| {
        let dev = dev.with_delta_ca(0.0);
        let on = total_power(&dev, &ctx, &sc.with_boost(1.0)).map_err(fail)?;
        let off = total_power(&dev, &ctx, &sc.baseline()).map_err(fail)?;
        prop_assert_eq!(on.total_power_mw, off.total_power_mw);
        prop_assert_eq!(on.savings_fraction, 0.0);
        Ok(())
    })
}

// context

fn env_spec() -> impl Strategy<Value = EnvironmentSpec> {
    (50.0..8000.0f64, 2.0..=6.0f64, 0.0..12.0f64, 0.0..2000.0f64).prop_map(
        |(isd, n, sigma, los)| EnvironmentSpec {
            environment_name: "random".into(),
            inter_site_distance_m: isd,
            path_loss_exponent: n,
            shadowing_sigma_db: sigma,
            los_probability_scale_m: los,
        },
    )
}

fn mobility_spec() -> impl Strategy<Value = MobilitySpec> {
    prop_oneof![
        Just(MobilitySpec::awgn()),
        Just(MobilitySpec::pedestrian()),
        Just(MobilitySpec::vehicular())
    ]
}

fn budget() -> impl Strategy<Value = LinkBudget> {
    (400.0..6000.0f64, -125.0..-85.0f64).prop_map(|(f, target)| LinkBudget {
        target_rx_power_dbm: target,
        ..LinkBudget::new(f)
    })
}

fn derive(
    env: &EnvironmentSpec,
    mob: &MobilitySpec,
    b: &LinkBudget,
    gamma: f64,
    seed: u64,
) -> Result<[f64; 3], TestCaseError> {
    derive_theta_with(env, mob, b, gamma, MIN_SAMPLES, seed, Execution::Sequential)
        .map(|c| c.theta)
        .map_err(fail)
}

pub fn theta_normalized() -> Result<(), String> {
    run(
        (
            env_spec(),
            mobility_spec(),
            budget(),
            -9.0..22.0f64,
            any::<u64>(),
        ),
        |(env, mob, b, g, seed)| {
            let t = derive(&env, &mob, &b, g, seed)?;
            prop_assert!((t.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            prop_assert!(t.iter().all(|x| (0.0..=1.0).contains(x)));
            Ok(())
        },
    )
}

pub fn larger_cells_never_lower_max_share() -> Result<(), String> {
    run(
        (
            env_spec(),
            mobility_spec(),
            budget(),
            -9.0..22.0f64,
            1.0..4.0f64,
            any::<u64>(),
        ),
        |(env, mob, b, g, factor, seed)| {
            let big = EnvironmentSpec {
                inter_site_distance_m: env.inter_site_distance_m * factor,
                ..env.clone()
            };
            let small = derive(&env, &mob, &b, g, seed)?;
            let large = derive(&big, &mob, &b, g, seed)?;
            prop_assert!(large[2] >= small[2], "{large:?} vs {small:?}");
            Ok(())
        },
    )
}

pub fn higher_frequency_never_lowers_high_share() -> Result<(), String> {
    run(
        (
            env_spec(),
            mobility_spec(),
            budget(),
            -9.0..22.0f64,
            1.0..6.0f64,
            any::<u64>(),
        ),
        |(env, mob, b, g, factor, seed)| {
            let hi = LinkBudget {
                frequency_mhz: b.frequency_mhz * factor,
                ..b
            };
            let lo = derive(&env, &mob, &b, g, seed)?;
            let up = derive(&env, &mob, &hi, g, seed)?;
            // High + Max share never shrinks, i.e. the Low share never grows;
            // compared on the Low share to avoid rounding in the sum.
            prop_assert!(up[0] <= lo[0], "{up:?} vs {lo:?}");
            Ok(())
        },
    )
}

pub fn fading_margin_never_lowers_high_share() -> Result<(), String> {
    run(
        (
            env_spec(),
            budget(),
            -9.0..22.0f64,
            0.1..10.0f64,
            any::<u64>(),
        ),
        |(env, b, g, margin, seed)| {
            let moving = MobilitySpec {
                name: "moving".into(),
                speed_kmh: 30.0,
                fading_margin_db: margin,
            };
            let stat = derive(&env, &MobilitySpec::awgn(), &b, g, seed)?;
            let mov = derive(&env, &moving, &b, g, seed)?;
            prop_assert!(mov[0] <= stat[0], "{mov:?} vs {stat:?}");
            Ok(())
        },
    )
}

pub fn derivation_deterministic() -> Result<(), String> {
    run(
        (
            env_spec(),
            mobility_spec(),
            budget(),
            -9.0..22.0f64,
            any::<u64>(),
            1000usize..10_000,
        ),
        |(env, mob, b, g, seed, n)| {
            let seq = derive_theta_with(&env, &mob, &b, g, n, seed, Execution::Sequential)
                .map_err(fail)?;
            let again = derive_theta_with(&env, &mob, &b, g, n, seed, Execution::Sequential)
                .map_err(fail)?;
            let par =
                derive_theta_with(&env, &mob, &b, g, n, seed, Execution::Parallel).map_err(fail)?;
            prop_assert_eq!(seq.theta.map(f64::to_bits), again.theta.map(f64::to_bits));
            prop_assert_eq!(seq.theta.map(f64::to_bits), par.theta.map(f64::to_bits));
            Ok(())
        },
    )
}

// device-lab

/// Trace grid used by the PA roundtrips: -10..23 dBm in 0.5 dB steps.
pub const TRACE_STEP_DB: f64 = 0.5;

pub fn pa_fit_roundtrip() -> Result<(), String> {
    run(
        (
            300.0..1500.0f64,
            0.0..20.0f64,
            30.0..300.0f64,
            20.0..400.0f64,
            0usize..=50,
        ),
        |(intercept, s_low, s_high, jump, k)| {
            let gamma = -5.0 + TRACE_STEP_DB * k as f64;
            let low = AffineSegment {
                intercept_mw: intercept,
                slope_mw_per_db: s_low,
            };
            let high_at_gamma = low.eval(gamma) + jump;
            let high = AffineSegment {
                intercept_mw: high_at_gamma - s_high * gamma,
                slope_mw_per_db: s_high,
            };
            let pts = synthetic_tx_trace(low, high, gamma, -10.0, 23.0, TRACE_STEP_DB);
            let trace = TxPowerTrace::new(pts, 800.0, "synthetic").map_err(fail)?;
            let fit = fit_pa_model(&trace).map_err(fail)?;
            prop_assert_eq!(fit.gamma_dbm, gamma);
            for (got, want) in [
                (fit.low_segment.intercept_mw, low.intercept_mw),
                (fit.low_segment.slope_mw_per_db, low.slope_mw_per_db),
                (fit.high_segment.intercept_mw, high.intercept_mw),
                (fit.high_segment.slope_mw_per_db, high.slope_mw_per_db),
                (fit.p_max_mw, high.eval(23.0)),
            ] {
                prop_assert!(close(got, want, 1e-6), "{got} vs {want}");
            }
            Ok(())
        },
    )
}

pub fn pa_fit_picks_grid_minimum() -> Result<(), String> {
    run(
        (
            300.0..1500.0f64,
            0.0..20.0f64,
            30.0..300.0f64,
            0.0..400.0f64,
            -5.0..20.0f64,
            any::<u64>(),
        ),
        |(intercept, s_low, s_high, jump, gamma, seed)| {
            use rand::SeedableRng;
            use rand_distr::{Distribution, Normal};
            let low = AffineSegment {
                intercept_mw: intercept,
                slope_mw_per_db: s_low,
            };
            let high = AffineSegment {
                intercept_mw: low.eval(gamma) + jump - s_high * gamma,
                slope_mw_per_db: s_high,
            };
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let noise = Normal::new(0.0, 20.0).unwrap();
            let mut pts = synthetic_tx_trace(low, high, gamma, -10.0, 23.0, 1.0);
            for p in &mut pts {
                p.consumption_mw += noise.sample(&mut rng);
            }
            let fit = fit_pa_model(&TxPowerTrace::new(pts, 800.0, "noisy").map_err(fail)?)
                .map_err(fail)?;
            for c in fit.grid.iter().filter_map(|c| c.residual_ss) {
                prop_assert!(fit.residual_ss <= c);
            }
            Ok(())
        },
    )
}

/// RB sweep laid out like a two-series measurement: PCC only up to 100 RBs,
/// then the SCC appended up to 200; and the SCC on from the start.
pub fn rb_design() -> Vec<(u32, bool)> {
    let mut d: Vec<(u32, bool)> = (8..=100).map(|r| (r, false)).collect();
    d.extend((101..=200).map(|r| (r, true)));
    d.extend((8..=200).map(|r| (r, true)));
    d
}

pub fn rb_trace(base: f64, slope: f64, jump: f64, noise: impl FnMut() -> f64) -> RbSweepTrace {
    let mut noise = noise;
    let pts = rb_design()
        .into_iter()
        .map(|(rbs, scc)| RbPoint {
            total_rbs: rbs,
            scc_active: scc,
            consumption_mw: base + slope * rbs as f64 + if scc { jump } else { 0.0 } + noise(),
        })
        .collect();
    RbSweepTrace::new(pts, 20.0).expect("valid design")
}

pub fn rb_fit_roundtrip() -> Result<(), String> {
    run(
        (500.0..3000.0f64, 0.0..5.0f64, 0.0..600.0f64),
        |(base, slope, jump)| {
            let fit = fit_rb_model(&rb_trace(base, slope, jump, || 0.0)).map_err(fail)?;
            prop_assert!(close(fit.base_mw, base, 1e-6));
            prop_assert!(close(fit.rb_slope_mw_per_rb, slope, 1e-6));
            prop_assert!(close(fit.delta_ca_mw, jump, 1e-6));
            Ok(())
        },
    )
}

pub fn ca_table_ingestion() -> Result<(), String> {
    run(
        (1u32..5000, 1u32..5000, -500.0..-1e-9f64, 0.0..500.0f64),
        |(pcc, scc, negative, positive)| {
            let mut table = CaBandTable::default();
            let bad = CaEntry {
                pcc_band_mhz: pcc,
                scc_band_mhz: scc,
                delta_mw: Some(negative),
                supported: true,
            };
            prop_assert!(table.insert(bad).is_err());
            prop_assert!(table.is_empty());
            let unsupported = CaEntry {
                pcc_band_mhz: pcc,
                scc_band_mhz: scc,
                delta_mw: None,
                supported: false,
            };
            table.insert(unsupported).map_err(fail)?;
            prop_assert_eq!(table.get(pcc, scc).map(|e| e.supported), Some(false));
            prop_assert_eq!(table.delta(pcc, scc), None);
            if pcc != scc {
                prop_assert!(table.get(scc, pcc).is_none());
            }
            let ok = CaEntry {
                pcc_band_mhz: scc,
                scc_band_mhz: pcc,
                delta_mw: Some(positive),
                supported: true,
            };
            table.insert(ok).map_err(fail)?;
            prop_assert_eq!(table.delta(scc, pcc), Some(positive));
            Ok(())
        },
    )
}

// scenario-engine

pub fn breakeven_independent_of_traffic_and_context() -> Result<(), String> {
    run(
        (
            breakeven_case(),
            context(),
            log_uniform(-4.0, 0.0),
            log_uniform(6.0, 10.0),
        ),
        |((dev, ctx, sc), ctx2, lambda, d)| {
            let b1 = breakeven_boost(&dev, &ctx, &sc).map_err(fail)?;
            let sc2 = TrafficScenario {
                lambda_per_s: lambda,
                d_dl_bit: d,
                ..sc
            };
            let b2 = breakeven_boost(&dev, &ctx2, &sc2).map_err(fail)?;
            prop_assert!(
                (b1.boost - b2.boost).abs() <= 1e-6,
                "{} vs {}",
                b1.boost,
                b2.boost
            );
            Ok(())
        },
    )
}

pub fn bisection_matches_closed_form() -> Result<(), String> {
    run(breakeven_case(), |(dev, ctx, sc)| {
        let b = breakeven_boost(&dev, &ctx, &sc).map_err(fail)?;
        prop_assert!(b.difference.abs() <= 1e-6, "{b:?}");
        prop_assert_eq!(b.above_practical_range, b.boost > 2.0);
        Ok(())
    })
}

pub fn savings_sign_around_breakeven() -> Result<(), String> {
    run(
        (breakeven_case(), 0.0..1.0f64, 0.0..1.0f64),
        |((dev, ctx, sc), u, v)| {
            let a_star = closed_form_breakeven(&dev);
            let max = sc.max_boost();
            let gap = 1e-3;
            if a_star - gap > 1.0 {
                let below = 1.0 + u * (a_star - gap - 1.0);
                let s = total_power(&dev, &ctx, &sc.with_boost(below))
                    .map_err(fail)?
                    .savings_fraction;
                prop_assert!(s < 0.0, "savings {s} at a = {below} < a* = {a_star}");
            }
            let above = a_star + gap + v * (max - a_star - gap);
            let s = total_power(&dev, &ctx, &sc.with_boost(above))
                .map_err(fail)?
                .savings_fraction;
            prop_assert!(s > 0.0, "savings {s} at a = {above} > a* = {a_star}");
            Ok(())
        },
    )
}

pub fn savings_increasing_in_boost() -> Result<(), String> {
    run(
        (device(), context(), scenario(), 0.0..1.0f64),
        |(dev, ctx, sc, u)| {
            let max = sc.max_boost();
            prop_assume!(max > 1.01);
            let a = 1.0 + u * (max - 1.0 - 1e-2);
            let s1 = total_power(&dev, &ctx, &sc.with_boost(a))
                .map_err(fail)?
                .savings_fraction;
            let s2 = total_power(&dev, &ctx, &sc.with_boost(a + 1e-2))
                .map_err(fail)?
                .savings_fraction;
            prop_assert!(s2 > s1, "{s2} !> {s1}");
            Ok(())
        },
    )
}

pub fn sweep_deterministic() -> Result<(), String> {
    run(
        (
            device(),
            context(),
            scenario(),
            prop::collection::vec(0.0..1.0f64, 1..12),
        ),
        |(dev, ctx, sc, mut us)| {
            us.sort_by(f64::total_cmp);
            us.dedup();
            let max = sc.max_boost();
            let values: Vec<f64> = us.iter().map(|u| 1.0 + u * (max - 1.0)).collect();
            prop_assume!(values.windows(2).all(|w| w[0] < w[1]));
            let spec = SweepSpec {
                axis: SweepAxis::BoostFactor,
                values,
                device: dev,
                context: ctx,
                scenario: sc,
                pairing: None,
            };
            let a = run_sweep_with(&spec, Execution::Sequential).map_err(fail)?;
            let b = run_sweep_with(&spec, Execution::Parallel).map_err(fail)?;
            prop_assert_eq!(a.rows.len(), spec.values.len());
            prop_assert_eq!(format!("{:?}", a.rows), format!("{:?}", b.rows));
            Ok(())
        },
    )
}

/// Every property, by module.
pub fn all_properties() -> Vec<(&'static str, Check)> {
    vec![
        (
            "stationary distribution normalized",
            stationary_normalized as Check,
        ),
        (
            "stationary distribution matches generator solve",
            stationary_matches_generator,
        ),
        ("time partitions normalized", partition_normalized),
        (
            "uplink share identical across states",
            uplink_share_state_independent,
        ),
        ("total power bounded", total_power_bounded),
        (
            "total power strictly decreasing in boost",
            total_power_decreasing_in_boost,
        ),
        (
            "unit boost without CA delta recovers baseline",
            unit_boost_without_delta_recovers_baseline,
        ),
        ("theta normalized", theta_normalized),
        (
            "larger cells never lower the max-state share",
            larger_cells_never_lower_max_share,
        ),
        (
            "higher bands never lower the high-state share",
            higher_frequency_never_lowers_high_share,
        ),
        (
            "fading margin never lowers the high-state share",
            fading_margin_never_lowers_high_share,
        ),
        ("theta derivation deterministic", derivation_deterministic),
        ("PA fit noiseless roundtrip", pa_fit_roundtrip),
        ("PA fit picks the grid minimum", pa_fit_picks_grid_minimum),
        ("RB fit noiseless roundtrip", rb_fit_roundtrip),
        ("CA table ingestion", ca_table_ingestion),
        (
            "breakeven independent of traffic and context",
            breakeven_independent_of_traffic_and_context,
        ),
        (
            "bisection matches closed form",
            bisection_matches_closed_form,
        ),
        (
            "savings sign around breakeven",
            savings_sign_around_breakeven,
        ),
        (
            "savings strictly increasing in boost",
            savings_increasing_in_boost,
        ),
        ("sweep deterministic", sweep_deterministic),
    ]
}
