//! PTx physical layer: constellations, the time-index codebook and TIM framing.
//!
//! A block spans `K` slots. `L` of them carry constellation symbols scaled by
//! `√P_L`; the other `K − L` carry the deterministic power waveform `ω` with
//! `|ω|² = P_H`. The first `η_r` bits of a block pick which slots carry
//! information, the remaining `L·log₂M` bits pick the symbols.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::Error;
use crate::math;

/// Largest index-bit count a codebook may use.
pub const MAX_INDEX_BITS: u32 = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstellationKind {
    Psk,
    Qam,
}

/// Unit-average-power, Gray-labeled point set. `points()[label]` is the point
/// carrying the MSB-first bit label `label`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    kind: ConstellationKind,
    points: Vec<Complex64>,
    bits_per_symbol: u32,
}

fn gray_to_binary(mut g: usize) -> usize {
    let mut b = 0;
    while g != 0 {
        b ^= g;
        g >>= 1;
    }
    b
}

/// Builds an `order`-point PSK or square QAM constellation. `order = 2` yields
/// BPSK for both kinds.
pub fn build_constellation(order: usize, kind: ConstellationKind) -> Result<Constellation, Error> {
    if order < 2 || !order.is_power_of_two() {
        return Err(Error::UnsupportedConstellation(
            "order must be a power of two ≥ 2",
        ));
    }
    let bits = order.trailing_zeros();
    let mut points: Vec<Complex64> = match kind {
        _ if order == 2 => (0..2)
            .map(|label| Complex64::new(if label == 0 { 1.0 } else { -1.0 }, 0.0))
            .collect(),
        ConstellationKind::Psk => (0..order)
            .map(|label| {
                let pos = gray_to_binary(label) as f64;
                math::cis(core::f64::consts::TAU * pos / order as f64)
            })
            .collect(),
        ConstellationKind::Qam => {
            if !bits.is_multiple_of(2) {
                return Err(Error::UnsupportedConstellation(
                    "QAM order must be a square",
                ));
            }
            let half = bits / 2;
            let side = 1usize << half;
            let mask = side - 1;
            let level = |g: usize| 2.0 * gray_to_binary(g) as f64 - (side as f64 - 1.0);
            (0..order)
                .map(|label| Complex64::new(level(label >> half), level(label & mask)))
                .collect()
        }
    };
    let mean = points.iter().map(|p| p.norm_sqr()).sum::<f64>() / order as f64;
    let scale = 1.0 / math::sqrt(mean);
    for p in &mut points {
        *p *= scale;
    }
    Ok(Constellation {
        kind,
        points,
        bits_per_symbol: bits,
    })
}

impl Constellation {
    pub fn order(&self) -> usize {
        self.points.len()
    }

    pub fn kind(&self) -> ConstellationKind {
        self.kind
    }

    pub fn bits_per_symbol(&self) -> u32 {
        self.bits_per_symbol
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn point(&self, label: usize) -> Result<Complex64, Error> {
        self.points.get(label).copied().ok_or(Error::SymbolLabel {
            label,
            order: self.order(),
        })
    }
}

/// Rule selecting which `2^{η_r}` of the `C(K, L)` slot combinations are legitimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CodebookStrategy {
    /// First `2^{η_r}` combinations in lexicographic order.
    Lexicographic,
    /// The hand-picked `K = 4, L = 2` mapping: 00→{1,3}, 01→{1,4}, 10→{2,4}, 11→{2,3}.
    Curated,
    /// No index bits: the first `L` slots always carry information.
    Fixed,
}

/// Ordered legitimate set of information-slot tuples. Slots are stored 0-based.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexCodebook {
    slots: usize,
    info: usize,
    strategy: CodebookStrategy,
    index_bits: u32,
    codewords: Vec<Vec<usize>>,
    by_mask: BTreeMap<u64, usize>,
}

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc·(n−i)/(i+1) stays integral at every step
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// `⌊log₂ C(K, L)⌋`.
pub fn index_bits_for(slots: usize, info: usize) -> u32 {
    let r = binomial(slots, info);
    if r == 0 {
        0
    } else {
        127 - r.leading_zeros()
    }
}

fn next_combination(comb: &mut [usize], n: usize) -> bool {
    let k = comb.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if comb[i] < n - k + i {
            comb[i] += 1;
            for j in i + 1..k {
                comb[j] = comb[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Builds the index codebook for `K` slots with `L` information slots.
pub fn build_codebook(
    slots: usize,
    info: usize,
    strategy: CodebookStrategy,
) -> Result<IndexCodebook, Error> {
    let layout_err = Error::InvalidLayout { slots, info };
    if slots > 64 || info == 0 {
        return Err(layout_err);
    }
    let codewords: Vec<Vec<usize>> = match strategy {
        CodebookStrategy::Fixed => {
            if info > slots {
                return Err(layout_err);
            }
            alloc::vec![(0..info).collect()]
        }
        CodebookStrategy::Curated => {
            if (slots, info) != (4, 2) {
                return Err(Error::CuratedUnavailable { slots, info });
            }
            alloc::vec![
                alloc::vec![0, 2],
                alloc::vec![0, 3],
                alloc::vec![1, 3],
                alloc::vec![1, 2],
            ]
        }
        CodebookStrategy::Lexicographic => {
            if info >= slots {
                return Err(layout_err);
            }
            let bits = index_bits_for(slots, info);
            if bits > MAX_INDEX_BITS {
                return Err(Error::CodebookTooLarge(bits));
            }
            let count = 1usize << bits;
            let mut comb: Vec<usize> = (0..info).collect();
            let mut out = Vec::with_capacity(count);
            loop {
                out.push(comb.clone());
                if out.len() == count || !next_combination(&mut comb, slots) {
                    break;
                }
            }
            out
        }
    };
    let index_bits = codewords.len().trailing_zeros();
    let by_mask = codewords
        .iter()
        .enumerate()
        .map(|(alpha, cw)| (cw.iter().fold(0u64, |m, &s| m | (1 << s)), alpha))
        .collect();
    Ok(IndexCodebook {
        slots,
        info,
        strategy,
        index_bits,
        codewords,
        by_mask,
    })
}

impl IndexCodebook {
    /// `K`.
    pub fn slots(&self) -> usize {
        self.slots
    }

    /// `L`.
    pub fn info_slots(&self) -> usize {
        self.info
    }

    /// `η_r`.
    pub fn index_bits(&self) -> u32 {
        self.index_bits
    }

    pub fn strategy(&self) -> CodebookStrategy {
        self.strategy
    }

    pub fn len(&self) -> usize {
        self.codewords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codewords.is_empty()
    }

    /// Codeword `alpha` as 0-based slot indices in increasing order.
    pub fn codeword(&self, alpha: usize) -> &[usize] {
        &self.codewords[alpha]
    }

    pub fn codewords(&self) -> &[Vec<usize>] {
        &self.codewords
    }

    /// Time-index vector `τ` of codeword `alpha`.
    pub fn tau(&self, alpha: usize) -> Vec<bool> {
        let mut tau = alloc::vec![false; self.slots];
        for &s in &self.codewords[alpha] {
            tau[s] = true;
        }
        tau
    }

    /// Codeword index for a time-index vector, if legitimate.
    pub fn lookup(&self, tau: &[bool]) -> Option<usize> {
        if tau.len() != self.slots {
            return None;
        }
        let mask = tau
            .iter()
            .enumerate()
            .fold(0u64, |m, (i, &t)| if t { m | (1 << i) } else { m });
        self.by_mask.get(&mask).copied()
    }
}

/// Transmit power levels and the power waveform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TxPower {
    low_w: f64,
    high_w: f64,
    omega_phase: f64,
}

impl TxPower {
    pub fn new(low_w: f64, high_w: f64, omega_phase: f64) -> Result<Self, Error> {
        if !(low_w > 0.0) || !(high_w >= low_w) || !high_w.is_finite() {
            return Err(Error::PowerOrdering {
                low: low_w,
                high: high_w,
            });
        }
        Ok(Self {
            low_w,
            high_w,
            omega_phase,
        })
    }

    pub fn from_dbm(low_dbm: f64, high_dbm: f64) -> Result<Self, Error> {
        Self::new(
            crate::dbm_to_watts(low_dbm),
            crate::dbm_to_watts(high_dbm),
            0.0,
        )
    }

    pub fn with_omega_phase(self, phase: f64) -> Self {
        Self {
            omega_phase: phase,
            ..self
        }
    }

    /// `P_L` in watts.
    pub fn low_w(&self) -> f64 {
        self.low_w
    }

    /// `P_H` in watts.
    pub fn high_w(&self) -> f64 {
        self.high_w
    }

    /// `√P_L`.
    pub fn info_amplitude(&self) -> f64 {
        math::sqrt(self.low_w)
    }

    /// `ω = √P_H·e^{jφ_ω}`.
    pub fn omega(&self) -> Complex64 {
        math::cis(self.omega_phase) * math::sqrt(self.high_w)
    }
}

/// One transmitted block.
#[derive(Debug, Clone, PartialEq)]
pub struct TimFrame {
    pub tau: Vec<bool>,
    pub samples: Vec<Complex64>,
    pub alpha: usize,
    pub symbol_labels: Vec<usize>,
    pub index_bits: Vec<bool>,
    pub info_bits: Vec<bool>,
}

impl TimFrame {
    /// All `η` source bits, index bits first.
    pub fn bits(&self) -> Vec<bool> {
        let mut out = self.index_bits.clone();
        out.extend_from_slice(&self.info_bits);
        out
    }
}

/// `η = η_r + L·log₂M`.
pub fn bits_per_block(codebook: &IndexCodebook, constellation: &Constellation) -> usize {
    codebook.index_bits() as usize
        + codebook.info_slots() * constellation.bits_per_symbol() as usize
}

pub(crate) fn bits_to_uint(bits: &[bool]) -> usize {
    bits.iter().fold(0, |acc, &b| (acc << 1) | b as usize)
}

pub(crate) fn push_uint_bits(out: &mut Vec<bool>, value: usize, width: u32) {
    for i in (0..width).rev() {
        out.push((value >> i) & 1 == 1);
    }
}

/// Maps `η` bits to a block of `K` samples.
pub fn encode_block(
    bits: &[bool],
    codebook: &IndexCodebook,
    constellation: &Constellation,
    power: &TxPower,
) -> Result<TimFrame, Error> {
    let expected = bits_per_block(codebook, constellation);
    if bits.len() != expected {
        return Err(Error::BitLength {
            expected,
            actual: bits.len(),
        });
    }
    let eta_r = codebook.index_bits() as usize;
    let (index_bits, info_bits) = bits.split_at(eta_r);
    let alpha = bits_to_uint(index_bits);
    let per_symbol = constellation.bits_per_symbol() as usize;
    let symbol_labels: Vec<usize> = info_bits.chunks(per_symbol).map(bits_to_uint).collect();

    let amp = power.info_amplitude();
    let mut samples = alloc::vec![power.omega(); codebook.slots()];
    for (&slot, &label) in codebook.codeword(alpha).iter().zip(&symbol_labels) {
        samples[slot] = constellation.points()[label] * amp;
    }
    Ok(TimFrame {
        tau: codebook.tau(alpha),
        samples,
        alpha,
        symbol_labels,
        index_bits: index_bits.to_vec(),
        info_bits: info_bits.to_vec(),
    })
}

/// Bits carried by codeword `alpha` and the given symbol labels.
pub fn bits_for(
    alpha: usize,
    labels: &[usize],
    codebook: &IndexCodebook,
    constellation: &Constellation,
) -> Result<Vec<bool>, Error> {
    let mut out = Vec::with_capacity(bits_per_block(codebook, constellation));
    push_uint_bits(&mut out, alpha, codebook.index_bits());
    for &label in labels {
        constellation.point(label)?;
        push_uint_bits(&mut out, label, constellation.bits_per_symbol());
    }
    Ok(out)
}

/// Inverse of [`encode_block`]: recovers the bits from a time-index vector and
/// the symbol labels of its information slots (in slot order).
pub fn decode_frame(
    tau: &[bool],
    labels: &[usize],
    codebook: &IndexCodebook,
    constellation: &Constellation,
) -> Result<Vec<bool>, Error> {
    let alpha = codebook.lookup(tau).ok_or(Error::IllegitimateIndexSet)?;
    if labels.len() != codebook.info_slots() {
        return Err(Error::BitLength {
            expected: codebook.info_slots(),
            actual: labels.len(),
        });
    }
    bits_for(alpha, labels, codebook, constellation)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use core::f64::consts::FRAC_1_SQRT_2;

    fn one_based(cb: &IndexCodebook) -> Vec<Vec<usize>> {
        cb.codewords()
            .iter()
            .map(|c| c.iter().map(|s| s + 1).collect())
            .collect()
    }

    fn all_bits(n: usize) -> impl Iterator<Item = Vec<bool>> {
        (0..1usize << n).map(move |v| {
            let mut b = Vec::new();
            push_uint_bits(&mut b, v, n as u32);
            b
        })
    }

    #[test]
    fn bpsk_and_qpsk_points() {
        let bpsk = build_constellation(2, ConstellationKind::Psk).unwrap();
        assert_eq!(
            bpsk.points(),
            &[Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)]
        );
        let qam4 = build_constellation(4, ConstellationKind::Qam).unwrap();
        for p in qam4.points() {
            assert!((p.re.abs() - FRAC_1_SQRT_2).abs() < 1e-15);
            assert!((p.im.abs() - FRAC_1_SQRT_2).abs() < 1e-15);
        }
    }

    #[test]
    fn unit_average_power_and_distinct() {
        for (m, kind) in [
            (2, ConstellationKind::Qam),
            (4, ConstellationKind::Qam),
            (16, ConstellationKind::Qam),
            (64, ConstellationKind::Qam),
            (8, ConstellationKind::Psk),
            (16, ConstellationKind::Psk),
        ] {
            let c = build_constellation(m, kind).unwrap();
            let mean = c.points().iter().map(|p| p.norm_sqr()).sum::<f64>() / m as f64;
            assert!((mean - 1.0).abs() < 1e-12, "M={m}");
            for i in 0..m {
                for j in i + 1..m {
                    assert!((c.points()[i] - c.points()[j]).norm() > 1e-6);
                }
            }
        }
    }

    #[test]
    fn gray_neighbors_differ_in_one_bit() {
        let c = build_constellation(16, ConstellationKind::Qam).unwrap();
        let dmin = 2.0 / 10f64.sqrt();
        for i in 0..16 {
            for j in 0..16 {
                let d = (c.points()[i] - c.points()[j]).norm();
                if (d - dmin).abs() < 1e-9 {
                    assert_eq!((i ^ j).count_ones(), 1);
                }
            }
        }
    }

    #[test]
    fn unsupported_orders() {
        assert!(build_constellation(3, ConstellationKind::Psk).is_err());
        assert!(build_constellation(1, ConstellationKind::Psk).is_err());
        assert!(build_constellation(8, ConstellationKind::Qam).is_err());
    }

    #[test]
    fn curated_codebook() {
        let cb = build_codebook(4, 2, CodebookStrategy::Curated).unwrap();
        assert_eq!(
            one_based(&cb),
            vec![vec![1, 3], vec![1, 4], vec![2, 4], vec![2, 3]]
        );
        assert_eq!(cb.index_bits(), 2);
        assert_eq!(cb.lookup(&[true, true, false, false]), None);
        assert_eq!(cb.lookup(&[false, false, true, true]), None);
        assert!(build_codebook(8, 2, CodebookStrategy::Curated).is_err());
    }

    #[test]
    fn lexicographic_counts() {
        let cb = build_codebook(4, 2, CodebookStrategy::Lexicographic).unwrap();
        assert_eq!(cb.len(), 4);
        let cb = build_codebook(8, 2, CodebookStrategy::Lexicographic).unwrap();
        assert_eq!(binomial(8, 2), 28);
        assert_eq!(cb.index_bits(), 4);
        assert_eq!(cb.len(), 16);
        assert_eq!(cb.codeword(0), &[0, 1]);
        assert_eq!(cb.codeword(15), &[2, 5]);
        assert!(build_codebook(4, 4, CodebookStrategy::Lexicographic).is_err());
        assert!(build_codebook(4, 0, CodebookStrategy::Lexicographic).is_err());
    }

    #[test]
    fn codebook_too_large() {
        assert!(matches!(
            build_codebook(40, 20, CodebookStrategy::Lexicographic),
            Err(Error::CodebookTooLarge(37))
        ));
    }

    #[test]
    fn fixed_codebook_allows_full_block() {
        let cb = build_codebook(8, 8, CodebookStrategy::Fixed).unwrap();
        assert_eq!(cb.index_bits(), 0);
        assert_eq!(cb.codeword(0).len(), 8);
    }

    #[test]
    fn tau_for_slots_one_three_six() {
        // K = 6, L = 3, slots {1, 3, 6}
        let mut tau = vec![false; 6];
        for s in [0, 2, 5] {
            tau[s] = true;
        }
        assert_eq!(tau, vec![true, false, true, false, false, true]);
        let cb = build_codebook(6, 3, CodebookStrategy::Lexicographic).unwrap();
        let alpha = cb.codewords().iter().position(|c| c == &[0, 2, 5]).unwrap();
        assert_eq!(cb.tau(alpha), tau);
    }

    #[test]
    fn zero_bits_curated_qpsk() {
        let cb = build_codebook(4, 2, CodebookStrategy::Curated).unwrap();
        let c = build_constellation(4, ConstellationKind::Qam).unwrap();
        let p = TxPower::from_dbm(30.0, 34.0).unwrap();
        let frame = encode_block(&[false; 6], &cb, &c, &p).unwrap();
        assert_eq!(frame.tau, vec![true, false, true, false]);
        assert_eq!(frame.samples[0], c.points()[0] * p.info_amplitude());
        assert_eq!(frame.samples[2], c.points()[0] * p.info_amplitude());
        assert_eq!(frame.samples[1], p.omega());
        let back = decode_frame(&frame.tau, &frame.symbol_labels, &cb, &c).unwrap();
        assert_eq!(back, vec![false; 6]);
    }

    #[test]
    fn exhaustive_roundtrip_4_2_qpsk() {
        let cb = build_codebook(4, 2, CodebookStrategy::Curated).unwrap();
        let c = build_constellation(4, ConstellationKind::Qam).unwrap();
        let p = TxPower::from_dbm(30.0, 34.0).unwrap();
        let mut count = 0;
        for bits in all_bits(6) {
            let frame = encode_block(&bits, &cb, &c, &p).unwrap();
            assert_eq!(frame.tau.iter().filter(|&&t| t).count(), 2);
            assert!(cb.lookup(&frame.tau).is_some());
            for (k, s) in frame.samples.iter().enumerate() {
                if !frame.tau[k] {
                    assert!((s.norm_sqr() - p.high_w()).abs() < 1e-12);
                }
            }
            assert_eq!(
                decode_frame(&frame.tau, &frame.symbol_labels, &cb, &c).unwrap(),
                bits
            );
            count += 1;
        }
        assert_eq!(count, 64);
    }

    #[test]
    fn bit_budget_8_2() {
        let cb = build_codebook(8, 2, CodebookStrategy::Lexicographic).unwrap();
        let c = build_constellation(4, ConstellationKind::Qam).unwrap();
        assert_eq!(bits_per_block(&cb, &c), 8);
    }

    #[test]
    fn decode_errors() {
        let cb = build_codebook(4, 2, CodebookStrategy::Curated).unwrap();
        let c = build_constellation(4, ConstellationKind::Qam).unwrap();
        assert_eq!(
            decode_frame(&[true, false, false, true], &[0, 0], &cb, &c).unwrap()[..2],
            [false, true]
        );
        assert_eq!(
            decode_frame(&[true, true, false, false], &[0, 0], &cb, &c),
            Err(Error::IllegitimateIndexSet)
        );
        let p = TxPower::from_dbm(30.0, 34.0).unwrap();
        assert!(matches!(
            encode_block(&[false; 5], &cb, &c, &p),
            Err(Error::BitLength {
                expected: 6,
                actual: 5
            })
        ));
    }

    #[test]
    fn power_ordering_enforced() {
        assert!(TxPower::from_dbm(34.0, 30.0).is_err());
        let p = TxPower::from_dbm(30.0, 30.0).unwrap();
        assert_eq!(p.omega(), Complex64::new(1.0, 0.0));
    }
}
