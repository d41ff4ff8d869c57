use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use timris_core::channel::{cn01, realize_block, ChannelConfig, GroupSizes};
use timris_core::ris::{
    align_group1, reflection_vector, PhaseSet, RectennaModel, RisPowerBudget, RisState, Stage,
    UnitCellTechnology,
};
use timris_core::rx::{
    jacobian_log_sum, ml_joint_detect, observe_with_noise, CompatFlags, DetectorSetup,
};
use timris_core::txphy::{
    bits_per_block, build_codebook, build_constellation, decode_frame, encode_block,
    CodebookStrategy, ConstellationKind, TxPower,
};
use timris_core::Complex64;

fn layout() -> impl Strategy<Value = (usize, usize)> {
    (2usize..=10).prop_flat_map(|k| (Just(k), 1..k))
}

fn constellation_spec() -> impl Strategy<Value = (usize, ConstellationKind)> {
    prop_oneof![
        Just((2, ConstellationKind::Psk)),
        Just((4, ConstellationKind::Qam)),
        Just((8, ConstellationKind::Psk)),
        Just((16, ConstellationKind::Qam)),
    ]
}

proptest! {
    #[test]
    fn encode_then_decode_is_identity(
        (k, l) in layout(),
        (m, kind) in constellation_spec(),
        seed in any::<u64>(),
    ) {
        let cb = build_codebook(k, l, CodebookStrategy::Lexicographic).unwrap();
        let c = build_constellation(m, kind).unwrap();
        let power = TxPower::from_dbm(30.0, 34.0).unwrap();
        let eta = bits_per_block(&cb, &c);
        let bits: Vec<bool> = (0..eta).map(|i| (seed.rotate_left(i as u32 * 7) ^ i as u64) & 1 == 1).collect();
        let frame = encode_block(&bits, &cb, &c, &power).unwrap();

        prop_assert_eq!(frame.tau.iter().filter(|&&t| t).count(), l);
        for (s, &info) in frame.samples.iter().zip(&frame.tau) {
            if !info {
                prop_assert_eq!(*s, power.omega());
            }
        }
        prop_assert_eq!(decode_frame(&frame.tau, &frame.symbol_labels, &cb, &c).unwrap(), bits);
    }

    #[test]
    fn lexicographic_codebook_is_distinct_and_sorted((k, l) in layout()) {
        let cb = build_codebook(k, l, CodebookStrategy::Lexicographic).unwrap();
        prop_assert_eq!(cb.len(), 1usize << cb.index_bits());
        for w in cb.codewords() {
            prop_assert_eq!(w.len(), l);
            prop_assert!(w.windows(2).all(|p| p[0] < p[1]));
        }
        prop_assert!(cb.codewords().windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn reflection_vectors_have_the_three_group_structure(psi1 in -7.0f64..7.0, bit in any::<bool>()) {
        let phases = PhaseSet::default();
        let ris = RisState::new(phases.clone(), psi1, bit, 2);
        let info = ris.info_vector();
        let power = reflection_vector(Stage::Power, psi1, 0.0, &phases);
        prop_assert_eq!(info[1], Complex64::new(0.0, 0.0));
        prop_assert_eq!(power[1], Complex64::new(0.0, 0.0));
        prop_assert_eq!(power[0], power[2]);
        prop_assert!((info[0] - Complex64::from_polar(1.0, -psi1)).norm() < 1e-12);
        prop_assert!((info[2] - Complex64::from_polar(1.0, -ris.theta_c())).norm() < 1e-12);
        prop_assert!((power[0].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rectenna_is_monotone_and_capped(a in 0.0f64..0.2, b in 0.0f64..0.2) {
        let model = RectennaModel::ris_default();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let (p_lo, p_hi) = (model.dc_power(lo).unwrap(), model.dc_power(hi).unwrap());
        prop_assert!(p_lo <= p_hi);
        prop_assert!(p_hi <= model.max_output_w());
        prop_assert!(p_hi <= model.efficiency() * hi);
    }

    #[test]
    fn jacobian_recursion_matches_direct_log_sum_exp(xs in prop::collection::vec(-300.0f64..50.0, 1..40)) {
        let rec = xs[1..].iter().fold(xs[0], |acc, &x| jacobian_log_sum(acc, x));
        let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let direct = m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln();
        prop_assert!((rec - direct).abs() <= 1e-9 * direct.abs().max(1e-300));
    }

    #[test]
    fn budget_grows_with_surface_size(n in 1usize..2048, extra in 1usize..512) {
        for tech in [UnitCellTechnology::RfSwitch, UnitCellTechnology::Varactor] {
            let small = RisPowerBudget::default_for(tech).with_elements(n).unwrap();
            let large = RisPowerBudget::default_for(tech).with_elements(n + extra).unwrap();
            prop_assert!(large.total_w() > small.total_w());
        }
    }

    #[test]
    fn effective_channel_is_direct_plus_group_cascades(seed in any::<u64>(), assist in 1usize..20, absorb in 0usize..20) {
        let cfg = ChannelConfig {
            elements: 48,
            groups: GroupSizes::with_remainder(48, assist, absorb).unwrap(),
            ..ChannelConfig::default()
        };
        let ch = realize_block(&cfg, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let psi = [Complex64::from_polar(1.0, 0.3), Complex64::new(0.5, -0.2), Complex64::from_polar(1.0, -2.0)];
        let eff = ch.effective(&psi);
        let group_of = |n: usize| if n < assist { 0 } else if n < assist + absorb { 1 } else { 2 };
        for (v, e) in eff.iter().enumerate() {
            let naive = ch.h_d[v] + (0..48).map(|n| ch.g_d.get(v, n) * ch.h_r[n] * psi[group_of(n)]).sum::<Complex64>();
            prop_assert!((e - naive).norm() <= 1e-12 * naive.norm().max(1e-30));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Joint ML against a brute force that re-encodes every candidate block and
    /// scores its noiseless image.
    #[test]
    fn joint_ml_matches_forward_model_search(seed in any::<u64>(), snr_scale in 0.1f64..10.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ch = realize_block(&ChannelConfig::default(), &mut rng).unwrap();
        let cb = build_codebook(4, 2, CodebookStrategy::Lexicographic).unwrap();
        let c = build_constellation(4, ConstellationKind::Qam).unwrap();
        let power = TxPower::from_dbm(30.0, 34.0).unwrap();
        let phases = PhaseSet::default();
        let psi1 = align_group1(&ch, &phases.info_pair());
        let eta = bits_per_block(&cb, &c);
        let m_r = ch.rx_antennas();
        let noise_var = snr_scale * 1e-6;

        let bits: Vec<bool> = (0..eta).map(|i| (seed >> i) & 1 == 1).collect();
        let ris_bit = (seed >> 40) & 1 == 1;
        let frame = encode_block(&bits, &cb, &c, &power).unwrap();
        let ris = RisState::new(phases.clone(), psi1, ris_bit, 2);
        let noise: Vec<Complex64> = (0..4 * m_r).map(|_| cn01(&mut rng)).collect();
        let obs = observe_with_noise(&ch, &frame, &ris, noise_var, &noise).unwrap();

        let zeros = vec![Complex64::new(0.0, 0.0); 4 * m_r];
        let mut best = (f64::INFINITY, Vec::new(), false);
        for pattern in 0..1usize << eta {
            let cand: Vec<bool> = (0..eta).rev().map(|i| (pattern >> i) & 1 == 1).collect();
            let f = encode_block(&cand, &cb, &c, &power).unwrap();
            for cand_bit in [false, true] {
                let r = RisState::new(phases.clone(), psi1, cand_bit, 2);
                let clean = observe_with_noise(&ch, &f, &r, 0.0, &zeros).unwrap();
                let d: f64 = obs.y.iter().flatten().zip(clean.y.iter().flatten()).map(|(a, b)| (a - b).norm_sqr()).sum();
                if d < best.0 {
                    best = (d, cand.clone(), cand_bit);
                }
            }
        }

        let setup = DetectorSetup {
            codebook: &cb,
            constellation: &c,
            phases: &phases,
            power,
            psi1,
            compat: CompatFlags::default(),
        };
        let got = ml_joint_detect(&obs, &setup);
        prop_assert_eq!(got.ptx_bits, best.1);
        prop_assert_eq!(got.ris_bit, best.2);
    }
}
