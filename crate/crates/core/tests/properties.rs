use std::ops::ControlFlow;

use groupnet::density::density_rank;
use groupnet::groups::{all_moduli_lists, Domain, FiniteAbelianGroup};
use groupnet::homs::{for_each_hom_matrix, hom_count, FamilySpec};
use groupnet::netlib::{build_dictionary, fit_coefficients, lp_error, Activation};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn moduli_upto(max: u64) -> impl Strategy<Value = Vec<u64>> {
    let lists = all_moduli_lists(max);
    (0..lists.len()).prop_map(move |i| lists[i].clone())
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 { a } else { gcd(b, a % b) }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn group_axioms(m in moduli_upto(64), a in any::<u64>(), b in any::<u64>(), c in any::<u64>()) {
        let g = FiniteAbelianGroup::from_moduli(&m).unwrap();
        let n = g.order();
        let [x, y, z] = [a, b, c].map(|v| g.element_at((v % n) as usize).unwrap());
        let e = g.identity();
        prop_assert_eq!(g.add(&g.add(&x, &y).unwrap(), &z).unwrap(), g.add(&x, &g.add(&y, &z).unwrap()).unwrap());
        prop_assert_eq!(g.add(&x, &y).unwrap(), g.add(&y, &x).unwrap());
        prop_assert_eq!(g.add(&x, &e).unwrap(), x.clone());
        prop_assert_eq!(g.add(&x, &g.neg(&x).unwrap()).unwrap(), e);
    }

    #[test]
    fn hom_count_is_gcd_product(a in moduli_upto(16), b in moduli_upto(16)) {
        let (ga, gb) = (FiniteAbelianGroup::from_moduli(&a).unwrap(), FiniteAbelianGroup::from_moduli(&b).unwrap());
        let expected: u64 = a.iter().flat_map(|&x| b.iter().map(move |&y| gcd(x, y))).product();
        let mut seen = 0u64;
        for_each_hom_matrix(&ga, &gb, |_| { seen += 1; ControlFlow::Continue(()) });
        prop_assert_eq!(seen, expected);
        prop_assert_eq!(hom_count(&ga, &gb), expected as u128);
    }

    #[test]
    fn sampled_family_members_are_additive(m in moduli_upto(32), fam in 0usize..4, seed in any::<u64>()) {
        let family: FamilySpec = ["aut", "end", "translations", "affine-end"][fam].parse().unwrap();
        let g = FiniteAbelianGroup::from_moduli(&m).unwrap();
        let domain = Domain::Finite(g.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let map = family.sample(&domain, &mut rng).unwrap();
        let at0 = map.apply(&g.identity()).unwrap();
        for x in g.elements() {
            for y in g.elements() {
                // f(x + y) - f(0) = (f(x) - f(0)) + (f(y) - f(0)) for affine f
                let lhs = g.sub(&map.apply(&g.add(&x, &y).unwrap()).unwrap(), &at0).unwrap();
                let rhs = g.sub(&g.add(&map.apply(&x).unwrap(), &map.apply(&y).unwrap()).unwrap(), &g.add(&at0, &at0).unwrap()).unwrap();
                prop_assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn rank_and_annihilator_fill_the_ambient_space(
        m in moduli_upto(12),
        fam in 0usize..3,
        values in proptest::collection::vec(-2i32..=2, 12),
    ) {
        let domain = Domain::Finite(FiniteAbelianGroup::from_moduli(&m).unwrap());
        let family: FamilySpec = ["aut", "translations", "affine-end"][fam].parse().unwrap();
        let act = Activation::table(values[..domain.len()].iter().map(|&v| v as f64).collect());
        let r = density_rank::<f64>(&domain, &family, &act, 1 << 16, 1e-9, 0).unwrap();
        prop_assert_eq!(r.rank + r.annihilator_basis.len(), r.ambient);
        prop_assert_eq!(r.dense, r.annihilator_basis.is_empty());
    }

    #[test]
    fn fit_is_no_worse_than_probes(n in 2u64..12, seed in any::<u64>()) {
        let domain: Domain = format!("Z{n}").parse().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dict = build_dictionary::<f64, _>(&domain, &"aut".parse().unwrap(), &Activation::logistic(), 64, &mut rng).unwrap();
        let target: Vec<f64> = (0..n).map(|i| ((i * 7 + seed % 5) % 3) as f64 - 1.0).collect();
        let (_, best) = fit_coefficients(&dict, &target, 2.0).unwrap();
        for k in 0..20 {
            let alpha: Vec<f64> = (0..dict.len()).map(|j| ((j + k) % 5) as f64 / 5.0 - 0.4).collect();
            let probe: Vec<f64> = (0..dict.ambient())
                .map(|r| (0..dict.len()).map(|c| dict.columns()[(r, c)] * alpha[c]).sum())
                .collect();
            prop_assert!(best.l2 <= lp_error(&domain, &probe, &target, 2.0).unwrap() + 1e-12);
        }
    }
}
