//! Invariant suite behind the `validate` subcommand.

use rand::Rng;
use timris_core::rx::{jacobian_log_sum, llr_visit_count, ml_visit_count, DetectorKind};
use timris_core::txphy::{build_codebook, CodebookStrategy};

use crate::config::SimConfig;
use crate::stream::{substream, Domain};
use crate::sweep::{ber_sweep, power_budget, RunOptions};
use crate::trial::{SimError, SystemModel};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check {
        name,
        passed,
        detail,
    }
}

/// Runs every check on `cfg`, using at most `cfg.trials` blocks for the
/// Monte Carlo ones.
pub fn run_checks(cfg: &SimConfig, opts: RunOptions) -> Result<Vec<Check>, SimError> {
    let mut out = Vec::new();
    let model = SystemModel::new(cfg)?;

    let roundtrip = SimConfig::parse(&cfg.to_text())
        .map(|c| &c == cfg)
        .unwrap_or(false);
    out.push(check(
        "config-roundtrip",
        roundtrip,
        format!("hash {}", cfg.hash()),
    ));

    let b = power_budget(cfg)?;
    let controllers = cfg.ris_elements.div_ceil(cfg.cells_per_controller) as f64;
    let n = cfg.ris_elements as f64;
    let rf = (controllers * cfg.controller_power_uw + n * cfg.switch_power_uw) * 1e-6;
    let var = (controllers * cfg.controller_power_uw
        + n * (2.0 * cfg.drive_power_uw + cfg.varactor_power_uw))
        * 1e-6;
    out.push(check(
        "power-budget",
        (b.rf_switch_w - rf).abs() <= 1e-12 * rf && (b.varactor_w - var).abs() <= 1e-12 * var,
        format!(
            "rf-switch {:.3} mW, varactor {:.3} mW, ratio {:.2} dB",
            b.rf_switch_w * 1e3,
            b.varactor_w * 1e3,
            b.ratio_db
        ),
    ));

    let ml = ml_visit_count(&model.codebook, &model.constellation);
    let llr = llr_visit_count(cfg.slots, &model.constellation);
    let expected_ml =
        model.codebook.len() as u64 * 2 * (cfg.modulation_order as u64).pow(cfg.info_slots as u32);
    out.push(check(
        "visit-counts",
        ml == expected_ml && llr == (cfg.slots * (2 * cfg.modulation_order + 1)) as u64,
        format!(
            "ml {ml}, llr {llr}, reduction {:.1}%",
            100.0 * (1.0 - llr as f64 / ml as f64)
        ),
    ));

    let curated = build_codebook(4, 2, CodebookStrategy::Curated)?;
    let masks: Vec<Vec<usize>> = curated.codewords().to_vec();
    out.push(check(
        "curated-codebook",
        masks == [vec![0, 2], vec![0, 3], vec![1, 3], vec![1, 2]],
        format!("{masks:?}"),
    ));

    let mut rng = substream(cfg.seed, Domain::Noise, u64::MAX);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let xs: Vec<f64> = (0..9).map(|_| rng.random_range(-50.0..5.0)).collect();
        let rec = xs
            .iter()
            .fold(f64::NEG_INFINITY, |acc, &x| jacobian_log_sum(acc, x));
        let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let direct = m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln();
        worst = worst.max(((rec - direct) / direct).abs());
    }
    out.push(check(
        "log-sum-exp",
        worst <= 1e-9,
        format!("max relative error {worst:.2e}"),
    ));

    let blocks = cfg.trials.min(50);
    let cap = model.ris_rectenna.max_output_w();
    let rho = model.ris_rectenna.efficiency();
    let mut noiseless_errors = 0u32;
    let mut conservation = true;
    for t in 0..blocks {
        let draw = model.draw(t);
        let tx = model.transmit(&draw.channel, &draw)?;
        let h = model.harvest(&draw.channel, &tx)?;
        for &q in &h.ris_q {
            let dc = model.ris_rectenna.dc_power(q)?;
            conservation &= dc <= rho * q + 1e-18 && dc <= cap;
        }
        for d in [DetectorKind::Ml, DetectorKind::Llr] {
            let signal =
                model.power.low_w().min(model.power.high_w()) * model.channel.direct_path_gain();
            let e = model.detect(&draw.channel, &tx, &draw, 1e-12 * signal, d)?;
            noiseless_errors += e.ptx_bits + e.ris_bit as u32;
        }
    }
    out.push(check(
        "harvest-conservation",
        conservation,
        format!("{blocks} blocks, per-slot cap {:.4} mW", cap * 1e3),
    ));
    out.push(check(
        "noiseless-detection",
        noiseless_errors == 0,
        format!("{noiseless_errors} bit errors over {blocks} blocks, both detectors"),
    ));

    let small = SimConfig {
        trials: cfg.trials.min(64),
        snr_db: vec![0.0, 20.0],
        ..cfg.clone()
    };
    let a = ber_sweep(&small, &[DetectorKind::Llr], RunOptions { workers: 1 })?;
    let b = ber_sweep(
        &small,
        &[DetectorKind::Llr],
        RunOptions {
            workers: opts.workers.max(2),
        },
    )?;
    out.push(check(
        "determinism",
        a.csv_body().ok() == b.csv_body().ok(),
        format!(
            "{} trials, 1 vs {} workers",
            small.trials,
            opts.workers.max(2)
        ),
    ));
    let in_range = a.rows.iter().all(|r| {
        [r.ber_ptx, r.ber_index, r.ber_ris]
            .iter()
            .flatten()
            .all(|e| (0.0..=1.0).contains(&e.mean))
    });
    out.push(check(
        "ber-range",
        in_range,
        "all BERs within [0, 1]".into(),
    ));

    Ok(out)
}
