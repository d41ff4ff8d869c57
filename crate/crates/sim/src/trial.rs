//! One block end to end: channels, bits, TIM frame, RIS reflection, harvesting
//! and detection.

use rand::Rng;
use thiserror::Error;
use timris_core::channel::{cn01, ChannelModel, ChannelRealization, GroupSizes};
use timris_core::ris::{
    align_group1, average_dc_power, eh_received, ris_rectenna_input, standalone_check, PhaseSet,
    RectennaModel, RisPowerBudget, RisState, UnitCellTechnology,
};
use timris_core::rx::{detect, observe_with_noise, DetectorKind, DetectorSetup};
use timris_core::txphy::{
    bits_per_block, build_codebook, build_constellation, encode_block, Constellation,
    IndexCodebook, TimFrame, TxPower,
};
use timris_core::{db_to_linear, Complex64};

use crate::config::{ConfigError, SimConfig};
use crate::stream::{substream, Domain};

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] timris_core::Error),
    #[error("worker pool: {0}")]
    Pool(String),
}

/// Everything fixed for a run: the channel model with its LoS phasors, the
/// codebook, constellation, RIS phases, transmit powers, rectennas and budgets.
#[derive(Debug, Clone)]
pub struct SystemModel {
    pub cfg: SimConfig,
    pub channel: ChannelModel,
    pub codebook: IndexCodebook,
    pub constellation: Constellation,
    pub phases: PhaseSet,
    pub power: TxPower,
    pub ris_rectenna: RectennaModel,
    pub eh_rectenna: RectennaModel,
    pub budget: RisPowerBudget,
}

/// Random inputs of one trial, independent of SNR, detector and `N₂`.
#[derive(Debug, Clone)]
pub struct BlockDraw {
    pub channel: ChannelRealization,
    pub bits: Vec<bool>,
    pub ris_bit: bool,
    /// `CN(0, 1)` samples, slot-major, `K·M_R` long.
    pub unit_noise: Vec<Complex64>,
}

/// Transmit side of one block.
#[derive(Debug, Clone)]
pub struct Transmission {
    pub frame: TimFrame,
    pub ris: RisState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Harvest {
    /// Per-slot rectenna input at the RIS absorbers, watts.
    pub ris_q: Vec<f64>,
    /// Per-slot incident power at the EH, watts.
    pub eh_q: Vec<f64>,
    pub avg_dc_ris_w: f64,
    pub avg_dc_eh_w: f64,
    pub standalone: bool,
}

/// Error counts of one detected block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BlockErrors {
    pub ptx_bits: u32,
    pub index_bits: u32,
    pub ris_bit: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockRecord {
    pub errors: BlockErrors,
    pub harvest: Harvest,
}

pub fn budget_for(
    cfg: &SimConfig,
    technology: UnitCellTechnology,
) -> Result<RisPowerBudget, SimError> {
    Ok(RisPowerBudget::new(
        cfg.ris_elements,
        cfg.cells_per_controller,
        cfg.controller_power_uw * 1e-6,
        cfg.drive_power_uw * 1e-6,
        cfg.switch_power_uw * 1e-6,
        cfg.varactor_power_uw * 1e-6,
        technology,
    )?)
}

impl SystemModel {
    pub fn new(cfg: &SimConfig) -> Result<Self, SimError> {
        cfg.validate()?;
        let mut los_rng = substream(cfg.seed, Domain::Los, 0);
        let channel = ChannelModel::new(cfg.channel_config()?, &mut los_rng)?;
        let codebook = build_codebook(cfg.slots, cfg.info_slots, cfg.codebook_strategy())?;
        let constellation = build_constellation(cfg.modulation_order, cfg.constellation)?;
        let phases = PhaseSet::two_bit(cfg.phase_assignment)?;
        let power =
            TxPower::from_dbm(cfg.p_low_dbm, cfg.p_high_dbm)?.with_omega_phase(cfg.omega_phase_rad);
        let ris_rectenna = RectennaModel::new(
            cfg.ris_efficiency,
            cfg.ris_turn_on_uw * 1e-6,
            cfg.ris_saturation_uw * 1e-6,
        )?;
        let eh_rectenna = RectennaModel::new(
            cfg.eh_efficiency,
            cfg.eh_turn_on_uw * 1e-6,
            cfg.eh_saturation_uw * 1e-6,
        )?;
        let budget = budget_for(cfg, cfg.cell_technology)?;
        Ok(Self {
            cfg: cfg.clone(),
            channel,
            codebook,
            constellation,
            phases,
            power,
            ris_rectenna,
            eh_rectenna,
            budget,
        })
    }

    /// `η`.
    pub fn bits_per_block(&self) -> usize {
        bits_per_block(&self.codebook, &self.constellation)
    }

    /// `σ² = ν_{h_d} / γ_DL`.
    pub fn noise_var(&self, snr_db: f64) -> f64 {
        self.channel.direct_path_gain() / db_to_linear(snr_db)
    }

    pub fn draw(&self, trial: u64) -> BlockDraw {
        let seed = self.cfg.seed;
        let channel = self
            .channel
            .realize(&mut substream(seed, Domain::Channel, trial));
        let mut rng = substream(seed, Domain::Bits, trial);
        let bits = (0..self.bits_per_block()).map(|_| rng.random()).collect();
        let ris_bit = rng.random();
        let mut rng = substream(seed, Domain::Noise, trial);
        let n = self.cfg.slots * self.cfg.rx_antennas;
        let unit_noise = (0..n).map(|_| cn01(&mut rng)).collect();
        BlockDraw {
            channel,
            bits,
            ris_bit,
            unit_noise,
        }
    }

    /// Same draw with the RIS regrouped to `absorb` absorbing cells.
    pub fn regroup(
        &self,
        channel: &ChannelRealization,
        absorb: usize,
    ) -> Result<ChannelRealization, SimError> {
        let groups =
            GroupSizes::with_remainder(self.cfg.ris_elements, self.cfg.assist_cells, absorb)?;
        Ok(channel.regroup(groups)?)
    }

    pub fn transmit(
        &self,
        channel: &ChannelRealization,
        draw: &BlockDraw,
    ) -> Result<Transmission, SimError> {
        let frame = encode_block(&draw.bits, &self.codebook, &self.constellation, &self.power)?;
        let psi1 = align_group1(channel, &self.phases.info_pair());
        let ris = RisState::new(self.phases.clone(), psi1, draw.ris_bit, self.cfg.info_slots);
        Ok(Transmission { frame, ris })
    }

    pub fn harvest(
        &self,
        channel: &ChannelRealization,
        tx: &Transmission,
    ) -> Result<Harvest, SimError> {
        let h_r2 = channel.h_r_group(1);
        let mut ris_q = Vec::with_capacity(tx.frame.samples.len());
        let mut eh_q = Vec::with_capacity(tx.frame.samples.len());
        for (&s, &info) in tx.frame.samples.iter().zip(&tx.frame.tau) {
            ris_q.push(ris_rectenna_input(h_r2, s));
            eh_q.push(eh_received(channel, &tx.ris.slot_vector(info), s).1);
        }
        let check = standalone_check(&ris_q, &self.ris_rectenna, &self.budget)?;
        let avg_dc_eh_w = average_dc_power(&eh_q, &self.eh_rectenna)?;
        Ok(Harvest {
            ris_q,
            eh_q,
            avg_dc_ris_w: check.average_dc_w,
            avg_dc_eh_w,
            standalone: check.satisfied,
        })
    }

    /// Adds noise at `noise_var`, runs `detector` and counts bit errors.
    pub fn detect(
        &self,
        channel: &ChannelRealization,
        tx: &Transmission,
        draw: &BlockDraw,
        noise_var: f64,
        detector: DetectorKind,
    ) -> Result<BlockErrors, SimError> {
        let obs = observe_with_noise(channel, &tx.frame, &tx.ris, noise_var, &draw.unit_noise)?;
        let setup = DetectorSetup {
            codebook: &self.codebook,
            constellation: &self.constellation,
            phases: &self.phases,
            power: self.power,
            psi1: tx.ris.psi1(),
            compat: self.cfg.compat_flags(),
        };
        let out = detect(detector, &obs, &setup)?;
        let eta_r = self.codebook.index_bits() as usize;
        let mut errors = BlockErrors {
            ris_bit: out.ris_bit != draw.ris_bit,
            ..BlockErrors::default()
        };
        for (i, (a, b)) in out.ptx_bits.iter().zip(&draw.bits).enumerate() {
            if a != b {
                errors.ptx_bits += 1;
                if i < eta_r {
                    errors.index_bits += 1;
                }
            }
        }
        Ok(errors)
    }
}

/// Runs trial `trial` at one SNR with the configured grouping.
pub fn run_block_trial(
    model: &SystemModel,
    trial: u64,
    snr_db: f64,
    detector: DetectorKind,
) -> Result<BlockRecord, SimError> {
    let draw = model.draw(trial);
    let tx = model.transmit(&draw.channel, &draw)?;
    let harvest = model.harvest(&draw.channel, &tx)?;
    let errors = model.detect(&draw.channel, &tx, &draw, model.noise_var(snr_db), detector)?;
    Ok(BlockRecord { errors, harvest })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn near_noiseless_ml_is_error_free() {
        let cfg = SimConfig {
            slots: 4,
            info_slots: 2,
            ..SimConfig::default()
        };
        let model = SystemModel::new(&cfg).unwrap();
        for t in 0..20 {
            let rec = run_block_trial(&model, t, 200.0, DetectorKind::Ml).unwrap();
            assert_eq!(rec.errors, BlockErrors::default());
        }
    }

    #[test]
    fn no_absorbers_harvest_nothing() {
        let cfg = SimConfig {
            absorb_cells: 0,
            ..SimConfig::default()
        };
        let model = SystemModel::new(&cfg).unwrap();
        let rec = run_block_trial(&model, 0, 10.0, DetectorKind::Llr).unwrap();
        assert_eq!(rec.harvest.avg_dc_ris_w, 0.0);
        assert!(!rec.harvest.standalone);
    }

    #[test]
    fn trials_are_reproducible() {
        let model = SystemModel::new(&SimConfig::default()).unwrap();
        let a = run_block_trial(&model, 5, 5.0, DetectorKind::Llr).unwrap();
        let b = run_block_trial(&model, 5, 5.0, DetectorKind::Llr).unwrap();
        assert_eq!(a, b);
    }
}
