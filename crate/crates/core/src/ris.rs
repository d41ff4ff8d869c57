//! The three-group RIS: phase sets and reflection vectors, absorber and EH
//! rectennas, and the controller power budget that decides whether the surface
//! can run on harvested energy alone.
//!
//! Group 1 (assist) is co-phased with the direct link, group 2 (absorb) feeds
//! the RF combiner of the on-board rectenna, group 3 (inform) holds one of two
//! phases for all information slots of a block to carry the RIS bit. In power
//! slots both reflecting groups use the designated power phase `φ_p`.

use alloc::vec::Vec;
use core::f64::consts::TAU;

use num_complex::Complex64;

use crate::channel::{ChannelRealization, GROUPS};
use crate::error::Error;
use crate::math;

/// Reflection vector `Ψ = [ψ₁, ψ₂, ψ₃]`.
pub type Reflection = [Complex64; GROUPS];

/// Quantized phase levels with the designated information pair `{φ₁, φ₂}`
/// and power phase `φ_p`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSet {
    resolution_bits: u32,
    levels: Vec<f64>,
    info: [f64; 2],
    power: f64,
}

impl PhaseSet {
    /// Uniform levels `2πm/B`, `m = 0..B`, with `B = 2^b − 1` (one switch port
    /// is taken by the absorber).
    pub fn uniform_levels(resolution_bits: u32) -> Vec<f64> {
        let count = (1usize << resolution_bits) - 1;
        (0..count).map(|m| TAU * m as f64 / count as f64).collect()
    }

    /// Phase set at `resolution_bits` where `assignment` gives the level
    /// indices of `[φ₁, φ₂, φ_p]`.
    pub fn new(resolution_bits: u32, assignment: [usize; 3]) -> Result<Self, Error> {
        if !(2..=8).contains(&resolution_bits) {
            return Err(Error::UnsupportedPhaseResolution(resolution_bits));
        }
        let levels = Self::uniform_levels(resolution_bits);
        let [a, b, p] = assignment;
        let distinct = a != b && a != p && b != p;
        if !distinct || assignment.iter().any(|&i| i >= levels.len()) {
            return Err(Error::InvalidPhaseAssignment(assignment));
        }
        Ok(Self {
            resolution_bits,
            info: [levels[a], levels[b]],
            power: levels[p],
            levels,
        })
    }

    /// 2-bit switch: three levels `{0, 2π/3, 4π/3}`.
    pub fn two_bit(assignment: [usize; 3]) -> Result<Self, Error> {
        Self::new(2, assignment)
    }

    pub fn resolution_bits(&self) -> u32 {
        self.resolution_bits
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    /// `𝒥′ = {φ₁, φ₂}` in enumeration order.
    pub fn info_pair(&self) -> [f64; 2] {
        self.info
    }

    /// `φ_p`.
    pub fn power_phase(&self) -> f64 {
        self.power
    }
}

impl Default for PhaseSet {
    fn default() -> Self {
        Self::two_bit([0, 1, 2]).expect("default assignment is valid")
    }
}

/// Circular mean of the per-element phases that would co-phase each group-1
/// cascaded path with the direct path at receive antenna 1. `None` when the
/// group is empty or the phasors cancel.
pub fn desired_group1_phase(channel: &ChannelRealization) -> Option<f64> {
    let reference = channel.h_d[0].arg();
    let row = channel.g_d.row(0);
    let sum = channel
        .groups()
        .range(0)
        .map(|n| math::cis((row[n] * channel.h_r[n]).arg() - reference))
        .fold(Complex64::new(0.0, 0.0), |acc, z| acc + z);
    if sum.norm_sqr() == 0.0 {
        None
    } else {
        Some(math::atan2(sum.im, sum.re))
    }
}

/// Index into `pair` of the phase closest to `mu` under the wrapped squared
/// difference; ties go to the first entry.
pub fn quantize_to_pair(mu: f64, pair: &[f64; 2]) -> usize {
    let d0 = math::wrap_angle(pair[0] - mu);
    let d1 = math::wrap_angle(pair[1] - mu);
    if d1 * d1 < d0 * d0 - 1e-12 {
        1
    } else {
        0
    }
}

/// Group-1 phase `ψ₁ ∈ 𝒥′` chosen by the PTx from perfect CSI.
pub fn align_group1(channel: &ChannelRealization, pair: &[f64; 2]) -> f64 {
    match desired_group1_phase(channel) {
        Some(mu) => pair[quantize_to_pair(mu, pair)],
        None => pair[0],
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Info,
    Power,
}

/// `Ω = [e^{−jφ_p}, 0, e^{−jφ_p}]` for power slots, `Λ_c = [e^{−jψ₁}, 0, e^{−jθ_c}]`
/// for information slots.
pub fn reflection_vector(stage: Stage, psi1: f64, theta_c: f64, phases: &PhaseSet) -> Reflection {
    let zero = Complex64::new(0.0, 0.0);
    match stage {
        Stage::Power => {
            let p = math::cis(-phases.power_phase());
            [p, zero, p]
        }
        Stage::Info => [math::cis(-psi1), zero, math::cis(-theta_c)],
    }
}

/// RIS configuration for one block.
#[derive(Debug, Clone, PartialEq)]
pub struct RisState {
    phases: PhaseSet,
    psi1: f64,
    ris_bit: bool,
    spreading_gain: usize,
}

impl RisState {
    /// `ris_bit` selects `θ_c = φ₁` (false) or `φ₂` (true); the bit is held over
    /// all `info_slots` information slots of the block.
    pub fn new(phases: PhaseSet, psi1: f64, ris_bit: bool, info_slots: usize) -> Self {
        Self {
            phases,
            psi1,
            ris_bit,
            spreading_gain: info_slots,
        }
    }

    pub fn phases(&self) -> &PhaseSet {
        &self.phases
    }

    pub fn psi1(&self) -> f64 {
        self.psi1
    }

    pub fn ris_bit(&self) -> bool {
        self.ris_bit
    }

    pub fn theta_c(&self) -> f64 {
        self.phases.info_pair()[self.ris_bit as usize]
    }

    /// `δ = L`.
    pub fn spreading_gain(&self) -> usize {
        self.spreading_gain
    }

    pub fn info_vector(&self) -> Reflection {
        reflection_vector(Stage::Info, self.psi1, self.theta_c(), &self.phases)
    }

    pub fn power_vector(&self) -> Reflection {
        reflection_vector(Stage::Power, self.psi1, self.theta_c(), &self.phases)
    }

    /// Reflection vector of slot `k` given `τ_k`.
    pub fn slot_vector(&self, info_slot: bool) -> Reflection {
        if info_slot {
            self.info_vector()
        } else {
            self.power_vector()
        }
    }
}

/// Rectenna input `|Σ h_{r,2} s_k|²` after coherent RF combining of the absorbers.
pub fn ris_rectenna_input(h_r2: &[Complex64], sample: Complex64) -> f64 {
    let combined = h_r2
        .iter()
        .fold(Complex64::new(0.0, 0.0), |acc, &h| acc + h * sample);
    combined.norm_sqr()
}

/// Constant-linear-constant rectenna.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RectennaModel {
    efficiency: f64,
    turn_on_w: f64,
    saturation_w: f64,
}

impl RectennaModel {
    pub fn new(efficiency: f64, turn_on_w: f64, saturation_w: f64) -> Result<Self, Error> {
        let ok =
            efficiency > 0.0 && efficiency <= 1.0 && turn_on_w > 0.0 && turn_on_w < saturation_w;
        if !ok || !saturation_w.is_finite() {
            return Err(Error::InvalidRectenna {
                efficiency,
                turn_on: turn_on_w,
                saturation: saturation_w,
            });
        }
        Ok(Self {
            efficiency,
            turn_on_w,
            saturation_w,
        })
    }

    /// RIS rectenna: ρ = 0.75, turn-on 150 μW, saturation 70 mW.
    pub fn ris_default() -> Self {
        Self::new(0.75, 150e-6, 70e-3).expect("valid constants")
    }

    /// EH rectenna: ρ = 0.75, turn-on 50 μW, saturation 0.1 mW.
    pub fn eh_default() -> Self {
        Self::new(0.75, 50e-6, 0.1e-3).expect("valid constants")
    }

    pub fn efficiency(&self) -> f64 {
        self.efficiency
    }

    pub fn turn_on_w(&self) -> f64 {
        self.turn_on_w
    }

    pub fn saturation_w(&self) -> f64 {
        self.saturation_w
    }

    /// `P_max = ρ(P_sat − P_on)`.
    pub fn max_output_w(&self) -> f64 {
        self.efficiency * (self.saturation_w - self.turn_on_w)
    }

    /// Harvested DC power for an RF input of `q` watts.
    pub fn dc_power(&self, q: f64) -> Result<f64, Error> {
        if !(q >= 0.0) {
            return Err(Error::NegativePower(q));
        }
        Ok(if q < self.turn_on_w {
            0.0
        } else if q < self.saturation_w {
            self.efficiency * (q - self.turn_on_w)
        } else {
            self.max_output_w()
        })
    }
}

/// Free-function form of [`RectennaModel::dc_power`].
pub fn clc_dc_power(q: f64, model: &RectennaModel) -> Result<f64, Error> {
    model.dc_power(q)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnitCellTechnology {
    RfSwitch,
    Varactor,
}

impl UnitCellTechnology {
    pub fn name(&self) -> &'static str {
        match self {
            Self::RfSwitch => "rf-switch",
            Self::Varactor => "varactor",
        }
    }
}

/// Power draw of an RIS with integrated controllers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RisPowerBudget {
    elements: usize,
    cells_per_controller: usize,
    controller_w: f64,
    drive_w: f64,
    switch_w: f64,
    varactor_w: f64,
    technology: UnitCellTechnology,
}

impl RisPowerBudget {
    pub fn new(
        elements: usize,
        cells_per_controller: usize,
        controller_w: f64,
        drive_w: f64,
        switch_w: f64,
        varactor_w: f64,
        technology: UnitCellTechnology,
    ) -> Result<Self, Error> {
        let powers_ok = [controller_w, drive_w, switch_w, varactor_w]
            .iter()
            .all(|p| *p >= 0.0 && p.is_finite());
        if elements == 0 || cells_per_controller == 0 || !powers_ok {
            return Err(Error::InvalidBudget);
        }
        Ok(Self {
            elements,
            cells_per_controller,
            controller_w,
            drive_w,
            switch_w,
            varactor_w,
            technology,
        })
    }

    /// N = 256, N_cb = 4, P_cb = 50 μW, P_drv = 40 μW, P_switch = 1 μW, P_varactor = 0.
    pub fn default_for(technology: UnitCellTechnology) -> Self {
        Self::new(256, 4, 50e-6, 40e-6, 1e-6, 0.0, technology).expect("valid constants")
    }

    pub fn with_technology(self, technology: UnitCellTechnology) -> Self {
        Self { technology, ..self }
    }

    pub fn with_elements(self, elements: usize) -> Result<Self, Error> {
        if elements == 0 {
            return Err(Error::InvalidBudget);
        }
        Ok(Self { elements, ..self })
    }

    pub fn technology(&self) -> UnitCellTechnology {
        self.technology
    }

    pub fn elements(&self) -> usize {
        self.elements
    }

    /// `⌈N / N_cb⌉`.
    pub fn controllers(&self) -> usize {
        self.elements.div_ceil(self.cells_per_controller)
    }

    /// Controller boards plus, for varactors, the DAC drive circuits.
    pub fn static_power_w(&self) -> f64 {
        let boards = self.controllers() as f64 * self.controller_w;
        match self.technology {
            UnitCellTechnology::RfSwitch => boards,
            UnitCellTechnology::Varactor => boards + self.elements as f64 * 2.0 * self.drive_w,
        }
    }

    pub fn dynamic_power_w(&self) -> f64 {
        let per_cell = match self.technology {
            UnitCellTechnology::RfSwitch => self.switch_w,
            UnitCellTechnology::Varactor => self.varactor_w,
        };
        self.elements as f64 * per_cell
    }

    /// `P_RIS = P_stc + P_dyn`.
    pub fn total_w(&self) -> f64 {
        self.static_power_w() + self.dynamic_power_w()
    }
}

/// Total RIS consumption in watts.
pub fn ris_power_consumption(budget: &RisPowerBudget) -> f64 {
    budget.total_w()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StandaloneCheck {
    pub satisfied: bool,
    /// Block-average harvested DC power in watts.
    pub average_dc_w: f64,
    /// `average_dc_w − P_RIS`.
    pub margin_w: f64,
}

/// Block-average harvested DC power of a sequence of per-slot rectenna inputs.
pub fn average_dc_power(per_slot_q: &[f64], model: &RectennaModel) -> Result<f64, Error> {
    if per_slot_q.is_empty() {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for &q in per_slot_q {
        total += model.dc_power(q)?;
    }
    Ok(total / per_slot_q.len() as f64)
}

/// Whether the block-average harvested power covers the RIS consumption.
pub fn standalone_check(
    per_slot_q: &[f64],
    model: &RectennaModel,
    budget: &RisPowerBudget,
) -> Result<StandaloneCheck, Error> {
    let average_dc_w = average_dc_power(per_slot_q, model)?;
    let need = budget.total_w();
    Ok(StandaloneCheck {
        satisfied: average_dc_w >= need,
        average_dc_w,
        margin_w: average_dc_w - need,
    })
}

/// EH sample `ε_k = (h_e + v·Ψ_k)s_k` and its power.
pub fn eh_received(
    channel: &ChannelRealization,
    psi: &Reflection,
    sample: Complex64,
) -> (Complex64, f64) {
    let eps = channel.eh_effective(psi) * sample;
    (eps, eps.norm_sqr())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{realize_block, CMatrix, ChannelConfig, GroupSizes};
    use alloc::vec;
    use core::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn two_bit_levels() {
        let p = PhaseSet::default();
        assert_eq!(p.levels().len(), 3);
        assert_eq!(p.info_pair()[0], 0.0);
        assert!((p.info_pair()[1] - 2.0 * PI / 3.0).abs() < 1e-15);
        assert!((p.power_phase() - 4.0 * PI / 3.0).abs() < 1e-15);
        assert!(!p.info_pair().contains(&p.power_phase()));
        assert_eq!(PhaseSet::uniform_levels(3).len(), 7);
    }

    #[test]
    fn phase_assignment_validation() {
        assert!(PhaseSet::two_bit([0, 0, 1]).is_err());
        assert!(PhaseSet::two_bit([0, 1, 3]).is_err());
        assert!(PhaseSet::new(1, [0, 1, 2]).is_err());
        let p = PhaseSet::two_bit([2, 0, 1]).unwrap();
        assert!((p.power_phase() - 2.0 * PI / 3.0).abs() < 1e-15);
    }

    #[test]
    fn quantizer_examples() {
        let pair = PhaseSet::default().info_pair();
        assert_eq!(quantize_to_pair(0.0, &pair), 0);
        assert_eq!(quantize_to_pair(FRAC_PI_2, &pair), 1);
        assert_eq!(quantize_to_pair(FRAC_PI_3, &pair), 0);
        // wrapping: −π/6 is closer to 0 than to 2π/3
        assert_eq!(quantize_to_pair(-PI / 6.0, &pair), 0);
        // 5π/6 wraps closer to 2π/3
        assert_eq!(quantize_to_pair(5.0 * PI / 6.0, &pair), 1);
    }

    fn tiny_channel(cascade_phase: f64) -> ChannelRealization {
        // one antenna, two assist elements, nothing else
        let h_d = vec![c(1.0, 0.0)];
        let h_r = vec![c(1.0, 0.0), c(1.0, 0.0)];
        let g = math::cis(cascade_phase);
        let g_d = CMatrix::from_row_major(1, 2, vec![g, g]);
        ChannelRealization::from_blocks(
            h_d,
            h_r,
            g_d,
            c(0.0, 0.0),
            vec![c(0.0, 0.0); 2],
            GroupSizes::new(2, 0, 0),
        )
        .unwrap()
    }

    #[test]
    fn group1_alignment() {
        let pair = PhaseSet::default().info_pair();
        assert_eq!(align_group1(&tiny_channel(0.0), &pair), 0.0);
        assert_eq!(align_group1(&tiny_channel(FRAC_PI_2), &pair), pair[1]);
        // the chosen ψ₁ must rotate the cascade towards the direct path
        let ch = tiny_channel(2.0 * PI / 3.0);
        let psi1 = align_group1(&ch, &pair);
        let aligned = ch.f_casc().get(0, 0) * math::cis(-psi1);
        assert!(aligned.arg().abs() < 1e-12);
    }

    #[test]
    fn reflection_structure() {
        let p = PhaseSet::default();
        let omega = reflection_vector(Stage::Power, 0.0, 0.0, &p);
        assert_eq!(omega[1], c(0.0, 0.0));
        assert!((omega[0] - math::cis(-4.0 * PI / 3.0)).norm() < 1e-15);
        assert_eq!(omega[0], omega[2]);
        let lambda = reflection_vector(Stage::Info, p.info_pair()[1], 0.0, &p);
        assert_eq!(lambda[2], c(1.0, 0.0));
        for v in [omega, lambda] {
            assert!((v[0].norm() - 1.0).abs() < 1e-15);
            assert!((v[2].norm() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn ris_state_holds_theta_over_info_slots() {
        let s = RisState::new(PhaseSet::default(), 0.0, true, 4);
        let tau = [true, false, true, true, false, true];
        let infos: Vec<_> = tau
            .iter()
            .filter(|&&t| t)
            .map(|&t| s.slot_vector(t))
            .collect();
        assert!(infos.windows(2).all(|w| w[0] == w[1]));
        assert_eq!(s.spreading_gain(), 4);
        assert!((s.theta_c() - 2.0 * PI / 3.0).abs() < 1e-15);
    }

    #[test]
    fn rectenna_input_examples() {
        assert_eq!(ris_rectenna_input(&[], c(3.0, 1.0)), 0.0);
        assert_eq!(
            ris_rectenna_input(&[c(1.0, 0.0), c(1.0, 0.0)], c(1.0, 0.0)),
            4.0
        );
        assert_eq!(
            ris_rectenna_input(&[c(1.0, 0.0), c(-1.0, 0.0)], c(0.3, -2.0)),
            0.0
        );
    }

    #[test]
    fn clc_examples() {
        let m = RectennaModel::ris_default();
        assert_eq!(m.dc_power(100e-6).unwrap(), 0.0);
        assert!((m.dc_power(1e-3).unwrap() - 637.5e-6).abs() < 1e-15);
        assert!((m.dc_power(100e-3).unwrap() - 52.3875e-3).abs() < 1e-15);
        assert_eq!(m.dc_power(100e-3).unwrap(), m.max_output_w());
        assert_eq!(m.dc_power(m.turn_on_w()).unwrap(), 0.0);
        assert!(m.dc_power(-1e-9).is_err());
        assert!(RectennaModel::new(0.5, 1e-3, 1e-4).is_err());
        assert!(RectennaModel::new(1.5, 1e-4, 1e-3).is_err());
    }

    #[test]
    fn power_budget_examples() {
        let rf = RisPowerBudget::default_for(UnitCellTechnology::RfSwitch);
        let var = RisPowerBudget::default_for(UnitCellTechnology::Varactor);
        assert_eq!(rf.controllers(), 64);
        assert!((ris_power_consumption(&rf) - 3.456e-3).abs() < 1e-15);
        assert!((ris_power_consumption(&var) - 23.680e-3).abs() < 1e-15);
        let ratio = crate::linear_to_db(var.total_w() / rf.total_w());
        assert!((ratio - 8.36).abs() < 0.01, "{ratio}");
        assert_eq!(rf.with_elements(5).unwrap().controllers(), 2);
        assert!(
            RisPowerBudget::new(0, 4, 0.0, 0.0, 0.0, 0.0, UnitCellTechnology::RfSwitch).is_err()
        );
    }

    #[test]
    fn standalone_examples() {
        let m = RectennaModel::ris_default();
        let b = RisPowerBudget::default_for(UnitCellTechnology::RfSwitch);
        let r = standalone_check(&[0.0; 8], &m, &b).unwrap();
        assert!(!r.satisfied);
        assert_eq!(r.margin_w, -b.total_w());
        let r = standalone_check(&[1.0; 8], &m, &b).unwrap();
        assert!(r.satisfied);
        assert!((r.average_dc_w / m.max_output_w() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eh_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let ch = realize_block(&ChannelConfig::default(), &mut rng).unwrap();
        let psi = reflection_vector(Stage::Power, 0.0, 0.0, &PhaseSet::default());
        assert_eq!(eh_received(&ch, &psi, c(0.0, 0.0)), (c(0.0, 0.0), 0.0));

        let direct_only = ChannelRealization::from_blocks(
            vec![c(1.0, 0.0)],
            vec![c(0.0, 0.0); 2],
            CMatrix::zeros(1, 2),
            c(1.0, 0.0),
            vec![c(0.0, 0.0); 2],
            GroupSizes::new(1, 0, 1),
        )
        .unwrap();
        let ph = 2.0f64;
        let (_, q) = eh_received(&direct_only, &psi, c(ph.sqrt(), 0.0));
        assert!((q - ph).abs() < 1e-15);
    }
}
