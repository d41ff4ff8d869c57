//! PRx side: noisy observations and the two detectors.
//!
//! The joint ML detector scores every `(codeword, RIS phase, symbol vector)`
//! hypothesis over the whole block. The LLR detector classifies each slot as
//! information or power with a per-slot log-likelihood ratio, projects the
//! result onto the legitimate codebook, and then runs a small ML search over
//! symbols and the RIS phase on the chosen slots.
//!
//! Enumeration orders are fixed: codebook order, then `𝒥′` order, then symbol
//! labels with the earliest slot most significant. The first minimum wins.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand::Rng;

use crate::channel::{cn01, ChannelRealization};
use crate::error::Error;
use crate::math;
use crate::ris::{reflection_vector, PhaseSet, RisState, Stage};
use crate::txphy::{bits_for, Constellation, IndexCodebook, TimFrame, TxPower};

/// RIS modulation order `J`.
pub const RIS_ORDER: usize = 2;

/// Received block.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation<'a> {
    pub channel: &'a ChannelRealization,
    /// One `M_R`-vector per slot.
    pub y: Vec<Vec<Complex64>>,
    pub noise_var: f64,
}

impl Observation<'_> {
    pub fn slots(&self) -> usize {
        self.y.len()
    }
}

/// `y_k = (h_d + f·Ψ_k)s_k + z_k` with `z_k ~ CN(0, σ²I)` in every slot.
pub fn observe<'a, R: Rng + ?Sized>(
    channel: &'a ChannelRealization,
    frame: &TimFrame,
    ris: &RisState,
    noise_var: f64,
    rng: &mut R,
) -> Result<Observation<'a>, Error> {
    let n = frame.samples.len() * channel.rx_antennas();
    let unit: Vec<Complex64> = (0..n).map(|_| cn01(rng)).collect();
    observe_with_noise(channel, frame, ris, noise_var, &unit)
}

/// Same as [`observe`] with caller-supplied `CN(0, 1)` noise, slot-major.
/// Reusing one noise draw across noise levels gives paired comparisons.
pub fn observe_with_noise<'a>(
    channel: &'a ChannelRealization,
    frame: &TimFrame,
    ris: &RisState,
    noise_var: f64,
    unit_noise: &[Complex64],
) -> Result<Observation<'a>, Error> {
    if !(noise_var >= 0.0) {
        return Err(Error::NegativeNoise(noise_var));
    }
    let m = channel.rx_antennas();
    assert_eq!(unit_noise.len(), frame.samples.len() * m, "noise length");
    let sigma = math::sqrt(noise_var);
    let info = channel.effective(&ris.info_vector());
    let power = channel.effective(&ris.power_vector());
    let y = frame
        .samples
        .iter()
        .zip(&frame.tau)
        .enumerate()
        .map(|(k, (&s, &is_info))| {
            let a = if is_info { &info } else { &power };
            (0..m)
                .map(|v| a[v] * s + unit_noise[k * m + v] * sigma)
                .collect()
        })
        .collect();
    Ok(Observation {
        channel,
        y,
        noise_var,
    })
}

/// Switches selecting the alternative detector variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CompatFlags {
    /// Drop the `1/σ²` factor from the power-slot likelihood `Δ_p`.
    pub unscaled_power_llr: bool,
    /// Score only the hypothesized information slots in joint ML.
    pub info_slots_only_ml: bool,
}

impl CompatFlags {
    pub fn literal() -> Self {
        Self {
            unscaled_power_llr: true,
            info_slots_only_ml: true,
        }
    }
}

/// Everything the PRx knows besides the observation.
#[derive(Debug, Clone, Copy)]
pub struct DetectorSetup<'a> {
    pub codebook: &'a IndexCodebook,
    pub constellation: &'a Constellation,
    pub phases: &'a PhaseSet,
    pub power: TxPower,
    /// Group-1 phase, known from the shared CSI.
    pub psi1: f64,
    pub compat: CompatFlags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectorKind {
    Ml,
    Llr,
}

impl DetectorKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Ml => "ml",
            Self::Llr => "llr",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionResult {
    /// Index of `τ̂` in the codebook.
    pub alpha: usize,
    pub tau: Vec<bool>,
    pub symbol_labels: Vec<usize>,
    /// Index of `ψ̂₃` in `𝒥′`.
    pub theta_index: usize,
    pub ptx_bits: Vec<bool>,
    pub ris_bit: bool,
    pub detector: DetectorKind,
    pub visited: u64,
}

/// Candidate effective channels for one block.
struct Hypotheses {
    /// `h_d + f·Λ_c` for each `θ_c ∈ 𝒥′`.
    info: [Vec<Complex64>; RIS_ORDER],
    /// `h_d + f·Ω`.
    power: Vec<Complex64>,
    /// `√P_L·x_i`.
    symbols: Vec<Complex64>,
    omega: Complex64,
}

impl Hypotheses {
    fn new(channel: &ChannelRealization, setup: &DetectorSetup<'_>) -> Self {
        let pair = setup.phases.info_pair();
        let info = pair.map(|theta| {
            channel.effective(&reflection_vector(
                Stage::Info,
                setup.psi1,
                theta,
                setup.phases,
            ))
        });
        let power = channel.effective(&reflection_vector(
            Stage::Power,
            setup.psi1,
            0.0,
            setup.phases,
        ));
        let amp = setup.power.info_amplitude();
        Self {
            info,
            power,
            symbols: setup
                .constellation
                .points()
                .iter()
                .map(|&x| x * amp)
                .collect(),
            omega: setup.power.omega(),
        }
    }
}

/// `‖y − a·s‖²`.
#[inline]
fn distance(y: &[Complex64], a: &[Complex64], s: Complex64) -> f64 {
    y.iter()
        .zip(a)
        .map(|(&yv, &av)| (yv - av * s).norm_sqr())
        .sum()
}

/// Per-slot squared distances for every information hypothesis `(c, i)` (stored
/// at `c·M + i`) and for the power hypothesis.
struct SlotMetrics {
    info: Vec<f64>,
    power: f64,
}

fn slot_metrics(y: &[Complex64], hyp: &Hypotheses) -> SlotMetrics {
    let mut info = Vec::with_capacity(RIS_ORDER * hyp.symbols.len());
    for a in &hyp.info {
        for &x in &hyp.symbols {
            info.push(distance(y, a, x));
        }
    }
    SlotMetrics {
        info,
        power: distance(y, &hyp.power, hyp.omega),
    }
}

/// `2^{η_r}·J·M^L`.
pub fn ml_visit_count(codebook: &IndexCodebook, constellation: &Constellation) -> u64 {
    let per_codeword = (constellation.order() as u64).pow(codebook.info_slots() as u32);
    codebook.len() as u64 * RIS_ORDER as u64 * per_codeword
}

/// `K·(J·M + 1)`.
pub fn llr_visit_count(slots: usize, constellation: &Constellation) -> u64 {
    slots as u64 * (RIS_ORDER * constellation.order() + 1) as u64
}

fn finish(
    alpha: usize,
    labels: Vec<usize>,
    theta_index: usize,
    setup: &DetectorSetup<'_>,
    detector: DetectorKind,
    visited: u64,
) -> DetectionResult {
    let ptx_bits = bits_for(alpha, &labels, setup.codebook, setup.constellation)
        .expect("detector labels are in range");
    DetectionResult {
        alpha,
        tau: setup.codebook.tau(alpha),
        symbol_labels: labels,
        theta_index,
        ptx_bits,
        ris_bit: theta_index == 1,
        detector,
        visited,
    }
}

/// Exhaustive joint ML over codewords, RIS phases and symbol vectors.
///
/// Every slot is scored: hypothesized information slots against `(Λ_c, √P_L x)`
/// and the rest against `(Ω, ω)`. With `info_slots_only_ml` the power slots are
/// left out of the metric.
pub fn ml_joint_detect(obs: &Observation<'_>, setup: &DetectorSetup<'_>) -> DetectionResult {
    let cb = setup.codebook;
    let hyp = Hypotheses::new(obs.channel, setup);
    let metrics: Vec<SlotMetrics> = obs.y.iter().map(|y| slot_metrics(y, &hyp)).collect();
    let m = setup.constellation.order();
    let l = cb.info_slots();
    let score_power = !setup.compat.info_slots_only_ml;

    let mut best = (f64::INFINITY, 0usize, 0usize, vec![0usize; l]);
    let mut labels = vec![0usize; l];
    let mut visited = 0u64;
    for alpha in 0..cb.len() {
        let tau = cb.tau(alpha);
        for c in 0..RIS_ORDER {
            labels.iter_mut().for_each(|x| *x = 0);
            loop {
                let mut total = 0.0;
                let mut j = 0;
                for (k, slot) in metrics.iter().enumerate() {
                    if tau[k] {
                        total += slot.info[c * m + labels[j]];
                        j += 1;
                    } else if score_power {
                        total += slot.power;
                    }
                }
                visited += 1;
                if total < best.0 {
                    best = (total, alpha, c, labels.clone());
                }
                // odometer with the last information slot fastest
                let mut pos = l;
                loop {
                    if pos == 0 {
                        break;
                    }
                    pos -= 1;
                    labels[pos] += 1;
                    if labels[pos] < m {
                        break;
                    }
                    labels[pos] = 0;
                    if pos == 0 {
                        pos = usize::MAX;
                        break;
                    }
                }
                if pos == usize::MAX {
                    break;
                }
            }
        }
    }
    let (_, alpha, c, labels) = best;
    finish(alpha, labels, c, setup, DetectorKind::Ml, visited)
}

/// `ln(e^a + e^b)` via `max(a, b) + ln(1 + e^{−|a−b|})`.
pub fn jacobian_log_sum(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    a.max(b) + math::ln_1p(math::exp(-(a - b).abs()))
}

/// Prior term `ln(L²) − ln((K − L)²)`.
pub fn prior_offset(slots: usize, info: usize) -> f64 {
    let l = info as f64;
    let p = (slots - info) as f64;
    math::ln(l * l) - math::ln(p * p)
}

/// Information and power log-likelihoods of one slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotEvidence {
    /// `Δ_i`: log-sum-exp of `−‖y − (h_d + fΛ_c)x_i‖²/σ²` over all `(c, i)`.
    pub info: f64,
    /// `Δ_p = −‖y − (h_d + fΩ)ω‖²/σ²`.
    pub power: f64,
}

/// Accumulates `Δ_i` with [`jacobian_log_sum`], starting from the first
/// hypothesis, and evaluates `Δ_p`.
///
/// `info_distances` are the squared distances `‖y − a_c x_i‖²` in `(c, i)` order.
pub fn slot_evidence(
    info_distances: &[f64],
    power_distance: f64,
    noise_var: f64,
    unscaled_power: bool,
) -> SlotEvidence {
    let inv = 1.0 / noise_var;
    let mut delta = -inv * info_distances[0];
    for &d in &info_distances[1..] {
        delta = jacobian_log_sum(delta, -inv * d);
    }
    let power = if unscaled_power {
        -power_distance
    } else {
        -inv * power_distance
    };
    SlotEvidence { info: delta, power }
}

/// Per-slot LLRs `ϑ = [ϑ_1, …, ϑ_K]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LlrVector(pub Vec<f64>);

impl LlrVector {
    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

fn llrs_from_metrics(
    metrics: &[SlotMetrics],
    noise_var: f64,
    slots: usize,
    info: usize,
    setup: &DetectorSetup<'_>,
) -> LlrVector {
    let offset = prior_offset(slots, info);
    LlrVector(
        metrics
            .iter()
            .map(|m| {
                let ev =
                    slot_evidence(&m.info, m.power, noise_var, setup.compat.unscaled_power_llr);
                offset + ev.info - ev.power
            })
            .collect(),
    )
}

/// LLR of each slot carrying information rather than the power waveform.
pub fn llr_per_slot(obs: &Observation<'_>, setup: &DetectorSetup<'_>) -> Result<LlrVector, Error> {
    if !(obs.noise_var > 0.0) {
        return Err(Error::NonPositiveNoise(obs.noise_var));
    }
    let cb = setup.codebook;
    if cb.info_slots() >= cb.slots() {
        return Err(Error::InvalidLayout {
            slots: cb.slots(),
            info: cb.info_slots(),
        });
    }
    let hyp = Hypotheses::new(obs.channel, setup);
    let metrics: Vec<SlotMetrics> = obs.y.iter().map(|y| slot_metrics(y, &hyp)).collect();
    Ok(llrs_from_metrics(
        &metrics,
        obs.noise_var,
        cb.slots(),
        cb.info_slots(),
        setup,
    ))
}

/// Legitimate codeword with the largest LLR sum; the first maximum wins.
pub fn select_info_slots(llr: &LlrVector, codebook: &IndexCodebook) -> usize {
    let mut best = (f64::NEG_INFINITY, 0usize);
    for (alpha, cw) in codebook.codewords().iter().enumerate() {
        let score = if cw.len() == 1 {
            llr.0[cw[0]]
        } else {
            cw.iter().map(|&s| llr.0[s]).sum()
        };
        if score > best.0 {
            best = (score, alpha);
        }
    }
    best.1
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymbolPhaseDecision {
    pub symbol_labels: Vec<usize>,
    pub theta_index: usize,
    pub visited: u64,
}

fn symbol_phase_from_metrics(
    metrics: &[SlotMetrics],
    slots: &[usize],
    m: usize,
) -> SymbolPhaseDecision {
    let mut best = (f64::INFINITY, 0usize, Vec::new());
    let mut visited = 0u64;
    for c in 0..RIS_ORDER {
        let mut total = 0.0;
        let mut labels = Vec::with_capacity(slots.len());
        for &k in slots {
            let row = &metrics[k].info[c * m..(c + 1) * m];
            let mut pick = 0;
            for i in 1..m {
                if row[i] < row[pick] {
                    pick = i;
                }
            }
            visited += m as u64;
            total += row[pick];
            labels.push(pick);
        }
        if total < best.0 {
            best = (total, c, labels);
        }
    }
    SymbolPhaseDecision {
        symbol_labels: best.2,
        theta_index: best.1,
        visited,
    }
}

/// ML over symbols and the RIS phase on a fixed set of information slots. The
/// symbol search factorizes per slot once `θ_c` is fixed.
pub fn ml_symbol_phase(
    obs: &Observation<'_>,
    slots: &[usize],
    setup: &DetectorSetup<'_>,
) -> SymbolPhaseDecision {
    let hyp = Hypotheses::new(obs.channel, setup);
    let metrics: Vec<SlotMetrics> = obs.y.iter().map(|y| slot_metrics(y, &hyp)).collect();
    symbol_phase_from_metrics(&metrics, slots, setup.constellation.order())
}

/// LLR slot classification, codebook projection, then symbol/phase ML.
pub fn llr_detect(
    obs: &Observation<'_>,
    setup: &DetectorSetup<'_>,
) -> Result<DetectionResult, Error> {
    if !(obs.noise_var > 0.0) {
        return Err(Error::NonPositiveNoise(obs.noise_var));
    }
    let cb = setup.codebook;
    let hyp = Hypotheses::new(obs.channel, setup);
    let metrics: Vec<SlotMetrics> = obs.y.iter().map(|y| slot_metrics(y, &hyp)).collect();
    // a single codeword leaves nothing to classify
    let (alpha, visited) = if cb.len() == 1 {
        (0, 0)
    } else {
        let llr = llrs_from_metrics(&metrics, obs.noise_var, cb.slots(), cb.info_slots(), setup);
        (
            select_info_slots(&llr, cb),
            llr_visit_count(cb.slots(), setup.constellation),
        )
    };
    let decision =
        symbol_phase_from_metrics(&metrics, cb.codeword(alpha), setup.constellation.order());
    Ok(finish(
        alpha,
        decision.symbol_labels,
        decision.theta_index,
        setup,
        DetectorKind::Llr,
        visited,
    ))
}

/// Runs the requested detector.
pub fn detect(
    kind: DetectorKind,
    obs: &Observation<'_>,
    setup: &DetectorSetup<'_>,
) -> Result<DetectionResult, Error> {
    match kind {
        DetectorKind::Ml => Ok(ml_joint_detect(obs, setup)),
        DetectorKind::Llr => llr_detect(obs, setup),
    }
}
