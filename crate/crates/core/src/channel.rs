//! Channel generation.
//!
//! Every link is Rician faded and scaled by the indoor-hotspot path gain. A
//! [`ChannelModel`] fixes the deterministic line-of-sight components for a
//! whole run; [`ChannelModel::realize`] then draws the diffuse parts for one
//! block of `K` slots and assembles the cascaded PTx-RIS-PRx and PTx-RIS-EH
//! channels per RIS group.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::Error;
use crate::math;

/// Number of RIS groups (assist, absorb, inform).
pub const GROUPS: usize = 3;

/// Indoor-hotspot path loss in dB for a distance in meters and a carrier in GHz.
pub fn path_loss_db(distance_m: f64, carrier_ghz: f64) -> Result<f64, Error> {
    if !(distance_m >= 1.0) {
        return Err(Error::DistanceTooShort(distance_m));
    }
    if !(carrier_ghz > 0.0) || !carrier_ghz.is_finite() {
        return Err(Error::InvalidFrequency(carrier_ghz));
    }
    Ok(32.8 + 16.9 * math::log10(distance_m) + 20.0 * math::log10(carrier_ghz))
}

/// Linear power gain `10^(-PL/10)` of a link.
pub fn path_gain(distance_m: f64, carrier_ghz: f64) -> Result<f64, Error> {
    path_loss_db(distance_m, carrier_ghz).map(|db| math::powf(10.0, -db / 10.0))
}

/// How the unit-modulus line-of-sight entries are generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LosPhasePolicy {
    /// Every LoS entry equals `1` (co-phased broadside arrival).
    #[default]
    Aligned,
    /// One uniform phase per entry, drawn once and kept for the whole run.
    RandomPerRun,
}

/// Rician factor, linear path gain and LoS policy of one link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RicianSpec {
    kappa: f64,
    path_gain: f64,
    los_policy: LosPhasePolicy,
}

impl RicianSpec {
    pub fn new(kappa: f64, path_gain: f64, los_policy: LosPhasePolicy) -> Result<Self, Error> {
        let ok = kappa >= 0.0 && kappa.is_finite() && path_gain > 0.0 && path_gain <= 1.0;
        if !ok {
            return Err(Error::InvalidRician { kappa, path_gain });
        }
        Ok(Self {
            kappa,
            path_gain,
            los_policy,
        })
    }

    /// Spec for a link at `distance_m` with the path gain taken from [`path_gain`].
    pub fn for_link(
        link: LinkSpec,
        carrier_ghz: f64,
        policy: LosPhasePolicy,
    ) -> Result<Self, Error> {
        Self::new(link.kappa, path_gain(link.distance_m, carrier_ghz)?, policy)
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn path_gain(&self) -> f64 {
        self.path_gain
    }

    pub fn los_policy(&self) -> LosPhasePolicy {
        self.los_policy
    }

    /// Amplitude weights `(√ν·√(κ/(κ+1)), √ν·√(1/(κ+1)))` of the LoS and NLoS parts.
    fn weights(&self) -> (f64, f64) {
        let amp = math::sqrt(self.path_gain);
        let denom = self.kappa + 1.0;
        (
            amp * math::sqrt(self.kappa / denom),
            amp * math::sqrt(1.0 / denom),
        )
    }

    /// Draws `n` LoS phasors according to the policy.
    pub fn draw_los<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<Complex64> {
        match self.los_policy {
            LosPhasePolicy::Aligned => vec![Complex64::new(1.0, 0.0); n],
            LosPhasePolicy::RandomPerRun => (0..n)
                .map(|_| math::cis(core::f64::consts::TAU * rng.random::<f64>()))
                .collect(),
        }
    }

    /// One faded entry around the given LoS phasor.
    #[inline]
    fn entry<R: Rng + ?Sized>(&self, los: Complex64, rng: &mut R) -> Complex64 {
        let (w_los, w_nlos) = self.weights();
        los * w_los + cn01(rng) * w_nlos
    }
}

/// Distance and Rician factor of one link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkSpec {
    pub distance_m: f64,
    pub kappa: f64,
}

impl LinkSpec {
    pub const fn new(distance_m: f64, kappa: f64) -> Self {
        Self { distance_m, kappa }
    }
}

/// Circularly symmetric `CN(0, 1)` sample.
#[inline]
pub fn cn01<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * core::f64::consts::FRAC_1_SQRT_2
}

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<Complex64>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length");
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.cols + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.data[row * self.cols + col] = value;
    }

    pub fn row(&self, row: usize) -> &[Complex64] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }
}

/// Draws a `rows × cols` Rician matrix. LoS phasors come from the spec's
/// policy and are drawn from `rng` first when the policy is random.
pub fn sample_rician<R: Rng + ?Sized>(
    spec: &RicianSpec,
    rows: usize,
    cols: usize,
    rng: &mut R,
) -> CMatrix {
    let los = spec.draw_los(rows * cols, rng);
    sample_rician_around(spec, &los, rows, cols, rng)
}

/// Draws a Rician matrix around a fixed set of LoS phasors (row-major).
pub fn sample_rician_around<R: Rng + ?Sized>(
    spec: &RicianSpec,
    los: &[Complex64],
    rows: usize,
    cols: usize,
    rng: &mut R,
) -> CMatrix {
    assert_eq!(los.len(), rows * cols, "LoS length");
    let data = los.iter().map(|&l| spec.entry(l, rng)).collect();
    CMatrix::from_row_major(rows, cols, data)
}

/// Sizes `(N₁, N₂, N₃)` of the assist, absorb and inform groups. Elements are
/// laid out contiguously in that order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroupSizes {
    pub assist: usize,
    pub absorb: usize,
    pub inform: usize,
}

impl GroupSizes {
    pub const fn new(assist: usize, absorb: usize, inform: usize) -> Self {
        Self {
            assist,
            absorb,
            inform,
        }
    }

    /// Group sizes for `total` elements where the inform group takes the rest.
    pub fn with_remainder(total: usize, assist: usize, absorb: usize) -> Result<Self, Error> {
        if assist + absorb > total {
            return Err(Error::GroupSizeMismatch {
                n1: assist,
                n2: absorb,
                n3: 0,
                total,
            });
        }
        Ok(Self::new(assist, absorb, total - assist - absorb))
    }

    pub fn total(&self) -> usize {
        self.assist + self.absorb + self.inform
    }

    pub fn check(&self, total: usize) -> Result<(), Error> {
        if self.total() != total {
            return Err(Error::GroupSizeMismatch {
                n1: self.assist,
                n2: self.absorb,
                n3: self.inform,
                total,
            });
        }
        Ok(())
    }

    pub fn sizes(&self) -> [usize; GROUPS] {
        [self.assist, self.absorb, self.inform]
    }

    /// Element index range of group `l` (0-based: 0 assist, 1 absorb, 2 inform).
    pub fn range(&self, l: usize) -> Range<usize> {
        match l {
            0 => 0..self.assist,
            1 => self.assist..self.assist + self.absorb,
            2 => self.assist + self.absorb..self.total(),
            _ => panic!("RIS group index {l} out of range"),
        }
    }
}

/// Geometry and fading parameters for all five links.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelConfig {
    pub rx_antennas: usize,
    pub elements: usize,
    pub groups: GroupSizes,
    pub carrier_ghz: f64,
    /// PTx → PRx.
    pub direct: LinkSpec,
    /// PTx → RIS.
    pub ptx_ris: LinkSpec,
    /// RIS → PRx.
    pub ris_prx: LinkSpec,
    /// PTx → EH.
    pub ptx_eh: LinkSpec,
    /// RIS → EH.
    pub ris_eh: LinkSpec,
    pub los_policy: LosPhasePolicy,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self {
            rx_antennas: 4,
            elements: 256,
            groups: GroupSizes::new(60, 35, 161),
            carrier_ghz: 2.0,
            direct: LinkSpec::new(14.0, 5.0),
            ptx_ris: LinkSpec::new(5.0, 5.0),
            ris_prx: LinkSpec::new(10.0, 5.0),
            ptx_eh: LinkSpec::new(14.0, 5.0),
            ris_eh: LinkSpec::new(10.0, 5.0),
            los_policy: LosPhasePolicy::Aligned,
        }
    }
}

/// All channel coefficients of one block, plus the per-group cascades.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// PTx → PRx, length `M_R`.
    pub h_d: Vec<Complex64>,
    /// PTx → RIS, length `N`.
    pub h_r: Vec<Complex64>,
    /// RIS → PRx, `M_R × N`.
    pub g_d: CMatrix,
    /// PTx → EH.
    pub h_e: Complex64,
    /// RIS → EH, length `N`.
    pub g_e: Vec<Complex64>,
    groups: GroupSizes,
    f_casc: CMatrix,
    v_casc: [Complex64; GROUPS],
}

impl ChannelRealization {
    /// Assembles a realization and computes its cascaded channels.
    pub fn from_blocks(
        h_d: Vec<Complex64>,
        h_r: Vec<Complex64>,
        g_d: CMatrix,
        h_e: Complex64,
        g_e: Vec<Complex64>,
        groups: GroupSizes,
    ) -> Result<Self, Error> {
        if h_d.is_empty() {
            return Err(Error::NoReceiveAntennas);
        }
        let n = h_r.len();
        groups.check(n)?;
        assert_eq!(g_d.rows(), h_d.len(), "G_d rows must match M_R");
        assert_eq!(g_d.cols(), n, "G_d columns must match N");
        assert_eq!(g_e.len(), n, "g_e length must match N");
        let mut out = Self {
            h_d,
            h_r,
            g_d,
            h_e,
            g_e,
            groups,
            f_casc: CMatrix::zeros(0, 0),
            v_casc: [Complex64::new(0.0, 0.0); GROUPS],
        };
        out.recompute_cascades();
        Ok(out)
    }

    fn recompute_cascades(&mut self) {
        let m = self.h_d.len();
        let mut f = CMatrix::zeros(m, GROUPS);
        for l in 0..GROUPS {
            for v in 0..m {
                f.set(v, l, self.cascade_entry(v, l));
            }
            self.v_casc[l] = self.eh_cascade_entry(l);
        }
        self.f_casc = f;
    }

    /// `(G_{d,l} h_{r,l})[v]` computed from the constituent blocks.
    pub fn cascade_entry(&self, v: usize, l: usize) -> Complex64 {
        let row = self.g_d.row(v);
        self.groups
            .range(l)
            .map(|n| row[n] * self.h_r[n])
            .fold(Complex64::new(0.0, 0.0), |acc, x| acc + x)
    }

    /// `g_{e,l}ᵀ h_{r,l}` computed from the constituent blocks.
    pub fn eh_cascade_entry(&self, l: usize) -> Complex64 {
        self.groups
            .range(l)
            .map(|n| self.g_e[n] * self.h_r[n])
            .fold(Complex64::new(0.0, 0.0), |acc, x| acc + x)
    }

    /// Same coefficients repartitioned into new group sizes.
    pub fn regroup(&self, groups: GroupSizes) -> Result<Self, Error> {
        groups.check(self.h_r.len())?;
        let mut out = self.clone();
        out.groups = groups;
        out.recompute_cascades();
        Ok(out)
    }

    pub fn rx_antennas(&self) -> usize {
        self.h_d.len()
    }

    pub fn elements(&self) -> usize {
        self.h_r.len()
    }

    pub fn groups(&self) -> GroupSizes {
        self.groups
    }

    /// PTx-RIS-PRx cascade, `M_R × 3`.
    pub fn f_casc(&self) -> &CMatrix {
        &self.f_casc
    }

    /// PTx-RIS-EH cascade, one entry per group.
    pub fn v_casc(&self) -> [Complex64; GROUPS] {
        self.v_casc
    }

    /// PTx → RIS coefficients of one group.
    pub fn h_r_group(&self, l: usize) -> &[Complex64] {
        &self.h_r[self.groups.range(l)]
    }

    /// Effective PRx channel `h_d + f·Ψ` for a reflection vector.
    pub fn effective(&self, psi: &[Complex64; GROUPS]) -> Vec<Complex64> {
        (0..self.rx_antennas())
            .map(|v| {
                let row = self.f_casc.row(v);
                self.h_d[v] + row[0] * psi[0] + row[1] * psi[1] + row[2] * psi[2]
            })
            .collect()
    }

    /// Effective EH gain `h_e + v·Ψ`.
    pub fn eh_effective(&self, psi: &[Complex64; GROUPS]) -> Complex64 {
        self.h_e + self.v_casc[0] * psi[0] + self.v_casc[1] * psi[1] + self.v_casc[2] * psi[2]
    }
}

/// Run-level channel model: link specs plus the LoS phasors held fixed across
/// blocks.
#[derive(Debug, Clone)]
pub struct ChannelModel {
    config: ChannelConfig,
    specs: [RicianSpec; 5],
    los_h_d: Vec<Complex64>,
    los_h_r: Vec<Complex64>,
    los_g_d: Vec<Complex64>,
    los_h_e: Complex64,
    los_g_e: Vec<Complex64>,
}

impl ChannelModel {
    /// Validates the configuration and fixes the LoS components. `rng` is only
    /// consumed under [`LosPhasePolicy::RandomPerRun`].
    pub fn new<R: Rng + ?Sized>(config: ChannelConfig, rng: &mut R) -> Result<Self, Error> {
        if config.rx_antennas == 0 {
            return Err(Error::NoReceiveAntennas);
        }
        config.groups.check(config.elements)?;
        let policy = config.los_policy;
        let f = config.carrier_ghz;
        let specs = [
            RicianSpec::for_link(config.direct, f, policy)?,
            RicianSpec::for_link(config.ptx_ris, f, policy)?,
            RicianSpec::for_link(config.ris_prx, f, policy)?,
            RicianSpec::for_link(config.ptx_eh, f, policy)?,
            RicianSpec::for_link(config.ris_eh, f, policy)?,
        ];
        let (m, n) = (config.rx_antennas, config.elements);
        let los_h_d = specs[0].draw_los(m, rng);
        let los_h_r = specs[1].draw_los(n, rng);
        let los_g_d = specs[2].draw_los(m * n, rng);
        let los_h_e = specs[3].draw_los(1, rng)[0];
        let los_g_e = specs[4].draw_los(n, rng);
        Ok(Self {
            config,
            specs,
            los_h_d,
            los_h_r,
            los_g_d,
            los_h_e,
            los_g_e,
        })
    }

    pub fn config(&self) -> &ChannelConfig {
        &self.config
    }

    /// Linear path gain of the direct PTx → PRx link.
    pub fn direct_path_gain(&self) -> f64 {
        self.specs[0].path_gain()
    }

    /// Draws one block realization. Draw order: `h_d`, `h_r`, `G_d` (row-major),
    /// `h_e`, `g_e`.
    pub fn realize<R: Rng + ?Sized>(&self, rng: &mut R) -> ChannelRealization {
        let (m, n) = (self.config.rx_antennas, self.config.elements);
        let h_d = sample_rician_around(&self.specs[0], &self.los_h_d, 1, m, rng).data;
        let h_r = sample_rician_around(&self.specs[1], &self.los_h_r, 1, n, rng).data;
        let g_d = sample_rician_around(&self.specs[2], &self.los_g_d, m, n, rng);
        let h_e = self.specs[3].entry(self.los_h_e, rng);
        let g_e = sample_rician_around(&self.specs[4], &self.los_g_e, 1, n, rng).data;
        ChannelRealization::from_blocks(h_d, h_r, g_d, h_e, g_e, self.config.groups)
            .expect("configuration validated at construction")
    }
}

/// Builds a model from `config` and draws one realization with the same stream.
pub fn realize_block<R: Rng + ?Sized>(
    config: &ChannelConfig,
    rng: &mut R,
) -> Result<ChannelRealization, Error> {
    let model = ChannelModel::new(config.clone(), rng)?;
    Ok(model.realize(rng))
}
