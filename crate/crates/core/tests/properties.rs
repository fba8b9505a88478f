use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use varbai_core::oracle::{rel_diff, RawInstance};
use varbai_core::valucb::{
    check_stop, empirical_best_feasible, partition_arms, potential_set, select_arms, select_uniform, SamplingDecision,
};
use varbai_core::{
    derive_ground_truth, hardness, ArmState, BanditInstance, ConfidenceBounds, DistributionSpec, Partition,
};

fn moments() -> impl Strategy<Value = (f64, f64)> {
    (0.01f64..0.99, 0.01f64..0.99).prop_map(|(m, frac)| (m, frac * m * (1.0 - m)))
}

fn instance(max_arms: usize) -> impl Strategy<Value = (Vec<(f64, f64)>, f64)> {
    (prop::collection::vec(moments(), 2..max_arms), 0.005f64..0.26)
}

fn build(pairs: &[(f64, f64)], s: f64) -> BanditInstance {
    let arms = pairs.iter().map(|&(m, v)| DistributionSpec::beta_from_moments(m, v).unwrap()).collect();
    BanditInstance::new(arms, s).unwrap()
}

fn bounds() -> impl Strategy<Value = ConfidenceBounds> {
    (0.0f64..1.0, 0.0f64..0.5, -0.1f64..0.4, 0.0f64..0.3).prop_map(|(m, r, v, rv)| ConfidenceBounds {
        l_mu: m - r,
        u_mu: m + r,
        l_var: v - rv,
        u_var: v + rv,
    })
}

proptest! {
    #[test]
    fn streaming_variance_matches_batch(xs in prop::collection::vec(0.0f64..1.0, 2..400)) {
        let mut s = ArmState::new();
        xs.iter().for_each(|&x| s.update(x));
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        prop_assert!((s.mean() - mean).abs() <= 1e-12);
        prop_assert!((s.sample_variance().unwrap() - var).abs() <= 1e-12 * var.max(1e-3));
    }

    #[test]
    fn beta_from_moments_round_trips((m, v) in moments()) {
        let d = DistributionSpec::beta_from_moments(m, v).unwrap();
        prop_assert!((d.mean() - m).abs() <= 1e-12);
        prop_assert!((d.variance() - v).abs() <= 1e-12);
    }

    #[test]
    fn beta_beyond_bernoulli_bound_is_rejected(m in 0.01f64..0.99, extra in 0.0f64..0.1) {
        prop_assert!(DistributionSpec::beta_from_moments(m, m * (1.0 - m) + extra).is_err());
    }

    #[test]
    fn partition_is_a_disjoint_cover(
        bs in prop::collection::vec(bounds(), 1..12),
        s in 0.0f64..0.3,
        slack in prop_oneof![Just(0.0), 0.0f64..0.05],
    ) {
        let active: Vec<usize> = (0..bs.len()).collect();
        let p = partition_arms(&bs, &active, s, slack);
        let mut all: Vec<usize> = p.possibly_feasible.iter().chain(&p.infeasible).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(&all, &active);
        let mut union: Vec<usize> = p.feasible.iter().chain(&p.almost_feasible).copied().collect();
        union.sort_unstable();
        prop_assert_eq!(&union, &p.possibly_feasible);
        for &i in &p.feasible {
            prop_assert!(bs[i].u_var <= s + slack);
        }
        for &i in &p.infeasible {
            prop_assert!(bs[i].l_var > s);
        }
        if slack == 0.0 {
            for &i in &p.almost_feasible {
                prop_assert!(bs[i].l_var <= s && s < bs[i].u_var);
            }
        }
    }

    #[test]
    fn stop_iff_no_candidate_in_potential_set(bs in prop::collection::vec(bounds(), 1..10), s in 0.0f64..0.3) {
        let active: Vec<usize> = (0..bs.len()).collect();
        let means: Vec<f64> = bs.iter().map(|b| (b.l_mu + b.u_mu) / 2.0).collect();
        let p = partition_arms(&bs, &active, s, 0.0);
        let best = empirical_best_feasible(&p, &means);
        let pot = potential_set(&bs, &p, best);
        let stop = check_stop(&p, &pot, &means);
        let competing = p.possibly_feasible.iter().any(|i| pot.contains(i));
        prop_assert_eq!(stop.is_some(), !competing);
        if let Some(rec) = stop {
            prop_assert_eq!(rec.feasible, !p.feasible.is_empty());
        }
        if !p.possibly_feasible.is_empty() {
            let d = select_arms(&p, &bs, &means);
            for a in d.arms() {
                prop_assert!(p.possibly_feasible.contains(&a));
            }
        }
    }

    #[test]
    fn ground_truth_is_permutation_equivariant(
        (pairs, s) in instance(9),
        seed in any::<u64>(),
    ) {
        let base = build(&pairs, s);
        let Ok(gt) = derive_ground_truth(&base) else { return Ok(()) };
        let mut order: Vec<usize> = (0..pairs.len()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rand::seq::SliceRandom::shuffle(order.as_mut_slice(), &mut rng);
        let permuted: Vec<(f64, f64)> = order.iter().map(|&k| pairs[k]).collect();
        let gt2 = derive_ground_truth(&build(&permuted, s)).unwrap();
        prop_assert_eq!(gt2.i_star.map(|i| order[i]), gt.i_star);
        prop_assert_eq!(gt2.feasible, gt.feasible);
        for (new, &old) in order.iter().enumerate() {
            prop_assert_eq!(gt2.mean_gaps[new], gt.mean_gaps[old]);
        }
        prop_assert!(rel_diff(hardness::h_va(&gt2), hardness::h_va(&gt)) <= 1e-12);
    }

    #[test]
    fn hardness_matches_oracle_on_random_instances((pairs, s) in instance(12)) {
        let Ok(gt) = derive_ground_truth(&build(&pairs, s)) else { return Ok(()) };
        let raw = RawInstance::new(&pairs, s);
        prop_assert_eq!(raw.best_arm(), gt.i_star);
        prop_assert!(rel_diff(hardness::h_va(&gt), raw.h_va()) <= 1e-12);
        prop_assert_eq!(hardness::h1(&gt).ok().is_some(), raw.h1().is_some());
        if let (Ok(a), Some(b)) = (hardness::h1(&gt), raw.h1()) {
            prop_assert!(rel_diff(a, b) <= 1e-12);
        }
        match (hardness::lower_bound(&gt, 0.05), raw.lower_bound(0.05)) {
            (Ok((c, v)), Some((oc, ov))) => {
                prop_assert!(rel_diff(c, oc) <= 1e-12 && rel_diff(v, ov) <= 1e-12);
            }
            (Err(_), None) => {}
            (a, b) => prop_assert!(false, "lower bound defined mismatch: {:?} vs {:?}", a, b),
        }
    }

    #[test]
    fn hardness_is_monotone_in_mean_gaps(gap in 0.02f64..0.3, shrink in 0.1f64..0.9) {
        let make = |g: f64| {
            let gt = derive_ground_truth(&build(&[(0.6, 0.05), (0.6 - g, 0.05), (0.2, 0.05)], 0.1)).unwrap();
            hardness::h_va(&gt)
        };
        prop_assert!(make(gap * shrink) > make(gap));
    }
}

#[test]
fn uniform_pairs_are_equally_likely() {
    let partition = Partition {
        feasible: vec![0, 2, 5],
        almost_feasible: vec![7],
        possibly_feasible: vec![0, 2, 5, 7],
        infeasible: vec![1],
    };
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let pool = &partition.possibly_feasible;
    let mut counts = std::collections::HashMap::new();
    let draws = 60_000;
    for _ in 0..draws {
        let SamplingDecision::Two(a, b) = select_uniform(&partition, &mut rng) else {
            panic!("pool of four yields two arms")
        };
        assert_ne!(a, b);
        assert!(pool.contains(&a) && pool.contains(&b));
        *counts.entry((a.min(b), a.max(b))).or_insert(0u32) += 1;
    }
    assert_eq!(counts.len(), 6);
    let p = 1.0 / 6.0;
    let sd = (draws as f64 * p * (1.0 - p)).sqrt();
    for (&pair, &c) in &counts {
        assert!((c as f64 - draws as f64 * p).abs() < 5.0 * sd, "{pair:?}: {c}");
    }
}

#[test]
fn uniform_singleton_pulls_one_arm() {
    let partition =
        Partition { feasible: vec![3], almost_feasible: vec![], possibly_feasible: vec![3], infeasible: vec![0, 1] };
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    assert_eq!(select_uniform(&partition, &mut rng), SamplingDecision::One(3));
}
