//! Monte Carlo sweeps.
//!
//! Trials fan out over a rayon pool and come back in trial order, so every
//! accumulation below runs sequentially over the same sequence regardless of
//! the worker count.

use rayon::prelude::*;
use timris_core::channel::GroupSizes;
use timris_core::linear_to_db;
use timris_core::ris::UnitCellTechnology;
use timris_core::rx::DetectorKind;

use crate::config::{Scheme, SimConfig};
use crate::table::{Accumulator, Estimate, ResultRow, ResultTable};
use crate::trial::{budget_for, BlockErrors, SimError, SystemModel};

/// Execution knobs that do not affect results.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunOptions {
    /// Worker threads; `0` lets rayon decide.
    pub workers: usize,
}

fn run_trials<T, F>(trials: u64, opts: RunOptions, f: F) -> Result<Vec<T>, SimError>
where
    T: Send,
    F: Fn(u64) -> Result<T, SimError> + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers)
        .build()
        .map_err(|e| SimError::Pool(e.to_string()))?;
    pool.install(|| (0..trials).into_par_iter().map(&f).collect())
}

const TECHNOLOGIES: [UnitCellTechnology; 2] =
    [UnitCellTechnology::RfSwitch, UnitCellTechnology::Varactor];

#[derive(Debug, Default, Clone, Copy)]
struct HarvestStats {
    dc_ris_uw: Accumulator,
    dc_eh_uw: Accumulator,
    ok: Accumulator,
}

impl HarvestStats {
    fn push(&mut self, dc_ris_w: f64, dc_eh_w: f64, ok: bool) {
        self.dc_ris_uw.push(dc_ris_w * 1e6);
        self.dc_eh_uw.push(dc_eh_w * 1e6);
        self.ok.push(ok as u8 as f64);
    }
}

#[derive(Debug, Default, Clone, Copy)]
struct ErrorStats {
    ptx: Accumulator,
    index: Accumulator,
    ris: Accumulator,
}

impl ErrorStats {
    fn push(&mut self, e: BlockErrors, eta: usize, eta_r: usize) {
        self.ptx.push(e.ptx_bits as f64 / eta as f64);
        if eta_r > 0 {
            self.index.push(e.index_bits as f64 / eta_r as f64);
        }
        self.ris.push(e.ris_bit as u8 as f64);
    }
}

fn base_row(cfg: &SimConfig, n2: usize, harvest: &HarvestStats) -> ResultRow {
    ResultRow {
        scheme: cfg.scheme.name(),
        k: cfg.slots,
        l: cfg.info_slots,
        m: cfg.modulation_order,
        detector: None,
        snr_db: None,
        n2,
        p_high_dbm: cfg.p_high_dbm,
        ber_ptx: None,
        ber_index: None,
        ber_ris: None,
        avg_dc_ris_uw: harvest.dc_ris_uw.estimate(),
        avg_dc_eh_uw: harvest.dc_eh_uw.estimate(),
        standalone_ok: harvest.ok.estimate().mean,
        trials: cfg.trials,
        seed: cfg.seed,
    }
}

/// BER versus SNR. One row per `(snr, detector)`, SNR-major. Every detector
/// and SNR point sees the same channels, bits and unit noise.
pub fn ber_sweep(
    cfg: &SimConfig,
    detectors: &[DetectorKind],
    opts: RunOptions,
) -> Result<ResultTable, SimError> {
    let model = SystemModel::new(cfg)?;
    let noise: Vec<f64> = cfg.snr_db.iter().map(|&g| model.noise_var(g)).collect();
    let outcomes = run_trials(cfg.trials, opts, |t| {
        let draw = model.draw(t);
        let tx = model.transmit(&draw.channel, &draw)?;
        let h = model.harvest(&draw.channel, &tx)?;
        let mut errors = Vec::with_capacity(noise.len() * detectors.len());
        for &nv in &noise {
            for &d in detectors {
                errors.push(model.detect(&draw.channel, &tx, &draw, nv, d)?);
            }
        }
        Ok(((h.avg_dc_ris_w, h.avg_dc_eh_w, h.standalone), errors))
    })?;

    let eta = model.bits_per_block();
    let eta_r = model.codebook.index_bits() as usize;
    let mut harvest = HarvestStats::default();
    let mut stats = vec![ErrorStats::default(); noise.len() * detectors.len()];
    for ((ris, eh, ok), errors) in &outcomes {
        harvest.push(*ris, *eh, *ok);
        for (s, e) in stats.iter_mut().zip(errors) {
            s.push(*e, eta, eta_r);
        }
    }

    let mut rows = Vec::with_capacity(stats.len());
    for (i, &snr) in cfg.snr_db.iter().enumerate() {
        for (j, d) in detectors.iter().enumerate() {
            let s = &stats[i * detectors.len() + j];
            rows.push(ResultRow {
                detector: Some(d.name()),
                snr_db: Some(snr),
                ber_ptx: Some(s.ptx.estimate()),
                ber_index: (eta_r > 0).then(|| s.index.estimate()),
                ber_ris: Some(s.ris.estimate()),
                ..base_row(cfg, cfg.absorb_cells, &harvest)
            });
        }
    }
    Ok(ResultTable {
        config_hash: cfg.hash(),
        seed: cfg.seed,
        rows,
    })
}

/// [`ber_sweep`] with the fixed first-`L`-slots layout in place of TIM.
pub fn benchmark_mode(
    cfg: &SimConfig,
    detectors: &[DetectorKind],
    opts: RunOptions,
) -> Result<ResultTable, SimError> {
    let cfg = SimConfig {
        scheme: Scheme::Benchmark,
        ..cfg.clone()
    };
    ber_sweep(&cfg, detectors, opts)
}

#[derive(Debug, Clone, PartialEq)]
pub struct HarvestPoint {
    pub n2: usize,
    pub avg_dc_ris_uw: Estimate,
    pub avg_dc_eh_uw: Estimate,
    /// Fraction of blocks meeting the standalone condition, per technology in
    /// `[rf-switch, varactor]` order.
    pub standalone_ok: [f64; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct HarvestReport {
    pub table: ResultTable,
    pub points: Vec<HarvestPoint>,
    /// `P_RIS` in watts, `[rf-switch, varactor]`.
    pub p_ris_w: [f64; 2],
    /// Smallest grid `N₂` whose mean harvested power covers `P_RIS`.
    pub min_n2: [Option<usize>; 2],
    /// Per-slot output cap `ρ(P_sat − P_on)` in watts.
    pub cap_w: f64,
    /// Smallest grid `N₂` whose mean is within 1% of the cap.
    pub saturation_n2: Option<usize>,
}

/// Harvested DC at the RIS and the EH versus `N₂`. Each trial draws one
/// channel and one block and regroups the same surface for every grid point.
pub fn harvest_sweep(cfg: &SimConfig, opts: RunOptions) -> Result<HarvestReport, SimError> {
    let model = SystemModel::new(cfg)?;
    let budgets = [
        budget_for(cfg, TECHNOLOGIES[0])?,
        budget_for(cfg, TECHNOLOGIES[1])?,
    ];
    let p_ris_w = budgets.map(|b| b.total_w());
    for &n2 in &cfg.n2_grid {
        GroupSizes::with_remainder(cfg.ris_elements, cfg.assist_cells, n2)?;
    }
    let outcomes = run_trials(cfg.trials, opts, |t| {
        let draw = model.draw(t);
        cfg.n2_grid
            .iter()
            .map(|&n2| {
                let ch = model.regroup(&draw.channel, n2)?;
                let tx = model.transmit(&ch, &draw)?;
                let h = model.harvest(&ch, &tx)?;
                Ok((h.avg_dc_ris_w, h.avg_dc_eh_w))
            })
            .collect::<Result<Vec<_>, SimError>>()
    })?;

    let mut stats = vec![HarvestStats::default(); cfg.n2_grid.len()];
    let mut ok = vec![[Accumulator::default(); 2]; cfg.n2_grid.len()];
    for per_n2 in &outcomes {
        for (i, &(ris, eh)) in per_n2.iter().enumerate() {
            stats[i].push(ris, eh, ris >= model.budget.total_w());
            for (a, p) in ok[i].iter_mut().zip(p_ris_w) {
                a.push((ris >= p) as u8 as f64);
            }
        }
    }

    let cap_w = model.ris_rectenna.max_output_w();
    let mut points = Vec::with_capacity(stats.len());
    let mut rows = Vec::with_capacity(stats.len());
    for ((&n2, s), o) in cfg.n2_grid.iter().zip(&stats).zip(&ok) {
        rows.push(base_row(cfg, n2, s));
        points.push(HarvestPoint {
            n2,
            avg_dc_ris_uw: s.dc_ris_uw.estimate(),
            avg_dc_eh_uw: s.dc_eh_uw.estimate(),
            standalone_ok: o.map(|a| a.estimate().mean),
        });
    }
    let min_n2 = p_ris_w.map(|p| {
        points
            .iter()
            .find(|pt| pt.avg_dc_ris_uw.mean * 1e-6 >= p)
            .map(|pt| pt.n2)
    });
    let saturation_n2 = points
        .iter()
        .find(|pt| pt.avg_dc_ris_uw.mean * 1e-6 >= 0.99 * cap_w)
        .map(|pt| pt.n2);
    Ok(HarvestReport {
        table: ResultTable {
            config_hash: cfg.hash(),
            seed: cfg.seed,
            rows,
        },
        points,
        p_ris_w,
        min_n2,
        cap_w,
        saturation_n2,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerBudget {
    pub rf_switch_w: f64,
    pub varactor_w: f64,
    /// `10·log₁₀(varactor / rf-switch)`.
    pub ratio_db: f64,
}

/// Closed-form `P_RIS` for both technologies.
pub fn power_budget(cfg: &SimConfig) -> Result<PowerBudget, SimError> {
    let rf_switch_w = budget_for(cfg, UnitCellTechnology::RfSwitch)?.total_w();
    let varactor_w = budget_for(cfg, UnitCellTechnology::Varactor)?.total_w();
    Ok(PowerBudget {
        rf_switch_w,
        varactor_w,
        ratio_db: linear_to_db(varactor_w / rf_switch_w),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerBudgetReport {
    pub budget: PowerBudget,
    pub n2: usize,
    /// Mean harvested DC at the configured `N₂`, microwatts.
    pub avg_dc_uw: Estimate,
    /// Mean harvested minus `P_RIS`, watts, `[rf-switch, varactor]`.
    pub margin_w: [f64; 2],
    pub standalone_ok: [f64; 2],
}

/// [`power_budget`] plus the standalone margin at the configured `N₂`.
pub fn power_budget_report(
    cfg: &SimConfig,
    opts: RunOptions,
) -> Result<PowerBudgetReport, SimError> {
    let budget = power_budget(cfg)?;
    let point_cfg = SimConfig {
        n2_grid: vec![cfg.absorb_cells],
        ..cfg.clone()
    };
    let h = harvest_sweep(&point_cfg, opts)?;
    let pt = &h.points[0];
    let mean_w = pt.avg_dc_ris_uw.mean * 1e-6;
    Ok(PowerBudgetReport {
        n2: cfg.absorb_cells,
        avg_dc_uw: pt.avg_dc_ris_uw,
        margin_w: [mean_w - budget.rf_switch_w, mean_w - budget.varactor_w],
        standalone_ok: pt.standalone_ok,
        budget,
    })
}
