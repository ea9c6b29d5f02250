use proptest::prelude::*;
use qsc_core::channels::{apply as apply_channel, is_channel, random_channel_with, Channel};
use qsc_core::divergences::diamond_distance;
use qsc_core::entropies::{ecme_value, h_min_ext, support_function_channels, BipartiteChannel};
use qsc_core::linalg::{is_psd, partial_trace, permute_systems, SystemShape};
use qsc_core::majorization::{entropy_pair, majorize_direct, ChannelFamily, Verdict, DEFAULT_TOL};
use qsc_core::random::{random_density, rng_from_seed};
use qsc_core::supermaps::{apply, apply_realization, dual, is_superchannel, random_superchannel, realize, DimSpec};
use rand::Rng;

fn feasible_instance(seed: u64) -> (ChannelFamily, ChannelFamily) {
    let mut rng = rng_from_seed(seed);
    let theta = random_superchannel(DimSpec::new(2, 2, 2, 2), rng.gen_range(1..=3), &mut rng).unwrap();
    let src: Vec<Channel> = (0..3).map(|_| random_channel_with(2, 2, rng.gen_range(1..=4), &mut rng).unwrap()).collect();
    let dst = src.iter().map(|c| apply(&theta, c).unwrap()).collect();
    (ChannelFamily::from_channels(src).unwrap(), ChannelFamily::from_channels(dst).unwrap())
}

#[test]
fn feasible_verdicts_come_with_a_valid_superchannel() {
    for seed in 0..5 {
        let (src, dst) = feasible_instance(seed);
        let c = majorize_direct(&src, &dst, DEFAULT_TOL).unwrap();
        assert_eq!(c.verdict, Verdict::Feasible);
        let theta = c.superchannel.unwrap();
        assert!(is_superchannel(&theta, 1e-6).holds);
        for (s, d) in src.channels.iter().zip(&dst.channels) {
            assert!(apply(&theta, s).unwrap().choi.distance(&d.choi) <= 1e-6);
        }
    }
}

#[test]
fn reachable_targets_are_no_more_distinguishable() {
    for seed in 10..13 {
        let (src, dst) = feasible_instance(seed);
        for i in 0..3 {
            for j in (i + 1)..3 {
                let before = diamond_distance(&src.channels[i], &src.channels[j]).unwrap().value;
                let after = diamond_distance(&dst.channels[i], &dst.channels[j]).unwrap().value;
                assert!(after <= before + 1e-6, "{} > {}", after, before);
            }
        }
    }
}

#[test]
fn entropy_condition_holds_for_random_test_channels() {
    let mut rng = rng_from_seed(99);
    for seed in 20..22 {
        let (src, dst) = feasible_instance(seed);
        for _ in 0..25 {
            let lambda: Vec<Channel> =
                (0..3).map(|_| random_channel_with(2, 2, rng.gen_range(1..=4), &mut rng).unwrap()).collect();
            let (h_src, h_dst) = entropy_pair(&src, &dst, &lambda).unwrap();
            assert!(h_src <= h_dst + 1e-6, "{} > {}", h_src, h_dst);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn channels_map_states_to_states(seed in 0u64..10_000, d_in in 1usize..4, d_out in 1usize..4, rank in 1usize..5) {
        let mut rng = rng_from_seed(seed);
        let c = random_channel_with(d_in, d_out, rank.min(d_in * d_out).max(d_in.div_ceil(d_out)), &mut rng).unwrap();
        prop_assert!(is_channel(&c, 1e-9).cptp());
        let rho = random_density(d_in, d_in, &mut rng);
        let out = apply_channel(&c, &rho).unwrap();
        prop_assert!((out.trace().re - 1.0).abs() < 1e-10);
        prop_assert!(is_psd(&out, 1e-10));
    }

    #[test]
    fn dual_is_an_involution(seed in 0u64..10_000) {
        let mut rng = rng_from_seed(seed);
        let s = random_superchannel(DimSpec::new(2, 3, 2, 2), 2, &mut rng).unwrap();
        prop_assert!(dual(&dual(&s)).choi.distance(&s.choi) < 1e-12);
    }

    #[test]
    fn realization_acts_like_the_choi_matrix(seed in 0u64..10_000) {
        let mut rng = rng_from_seed(seed);
        let s = random_superchannel(DimSpec::new(2, 2, 2, 2), 3, &mut rng).unwrap();
        let r = realize(&s).unwrap();
        let psi = random_channel_with(2, 2, 2, &mut rng).unwrap();
        let a = apply(&s, &psi).unwrap();
        let b = apply_realization(&r, &psi).unwrap();
        prop_assert!(a.choi.distance(&b.choi) < 1e-8);
    }

    #[test]
    fn support_function_matches_extended_min_entropy(seed in 0u64..10_000, rank in 1usize..5) {
        let mut rng = rng_from_seed(seed);
        let psi = random_channel_with(2, 2, rank, &mut rng).unwrap();
        let s = support_function_channels(&psi).unwrap().value;
        let h = h_min_ext(&psi).unwrap();
        prop_assert!((s - 2.0 * 2f64.powf(-h)).abs() < 1e-6, "{} vs {}", s, h);
        prop_assert!(h <= 1.0 + 1e-7 && h >= -1.0 - 1e-7);
    }

    #[test]
    fn ecme_lies_between_marginal_bounds(seed in 0u64..10_000, rank in 1usize..4) {
        let mut rng = rng_from_seed(seed);
        let d = DimSpec::new(2, 2, 2, 2);
        let c = random_channel_with(4, 4, rank, &mut rng).unwrap();
        let omega = BipartiteChannel::from_channel(&c, d).unwrap();
        let v = ecme_value(&omega).unwrap();
        let j = omega.choi.scale(0.25);
        let a1b1 = partial_trace(&j, &d.shape(), &[1, 3]).unwrap();
        let upper = qsc_core::entropies::h_min_cond(&a1b1, 2, 2).unwrap().value;
        prop_assert!(v <= upper + 1e-6);
        // H_min(A B1|B0) − log₂ d_A0 d_A1, with B0 moved in front
        let b0_first = permute_systems(&j, &SystemShape::new(&[4, 2, 2]), &[1, 0, 2]).unwrap();
        let lower = qsc_core::entropies::h_min_cond(&b0_first, 2, 8).unwrap().value - 2.0;
        prop_assert!(v >= lower - 1e-6);
    }

    #[test]
    fn diamond_distance_is_a_metric(seed in 0u64..10_000) {
        let mut rng = rng_from_seed(seed);
        let ch: Vec<Channel> = (0..3).map(|_| random_channel_with(2, 2, 2, &mut rng).unwrap()).collect();
        let d = |a: usize, b: usize| diamond_distance(&ch[a], &ch[b]).unwrap().value;
        let (ab, ba, bc, ac) = (d(0, 1), d(1, 0), d(1, 2), d(0, 2));
        prop_assert!((ab - ba).abs() < 1e-6);
        prop_assert!(ab >= -1e-7 && ab <= 2.0 + 1e-7);
        prop_assert!(ac <= ab + bc + 1e-6);
    }
}
