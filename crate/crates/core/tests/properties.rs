mod common;

use kcomp_core::adversary::indistinguishable_gaps;
use kcomp_core::comptron::{comptron, refinement_depth};
use kcomp_core::instance::{
    evaluate, excess_risk, population_utility, HypothesisClass, Point, TabularInstance, UtilityForm,
};
use kcomp_core::learner::{bound_report, erm, plugin, Provenance, Sample};
use kcomp_core::num::{dyadic, int, ratio, Rational};
use kcomp_core::oracle::{reduce_query, reduced_response, truth_bit, Oracle, OracleConfig, Phase, Query, QueryEntry};
use kcomp_core::robust::{payoff, ConsistentPolytope};
use num_traits::{One, Zero};
use proptest::prelude::*;

use common::{class_for, instance, power_of_two_order};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn sandwich_after_every_round(inst in instance(1..=8), k in power_of_two_order()) {
        let n = inst.len();
        let sample: Vec<usize> = (0..n).collect();
        let mut o = Oracle::new(&inst, OracleConfig::noiseless(k)).unwrap();
        let est = comptron(&mut o, &sample).unwrap();
        let gaps = inst.gaps();
        let u_max = gaps.max();
        prop_assert_eq!(&gaps[est.i_max], &u_max);
        prop_assert!(est.coeff(est.i_max).is_one());
        let depth = refinement_depth(k).unwrap();
        for (t, round) in est.rounds.iter().enumerate() {
            for i in 0..n {
                let c = dyadic(round[i], depth);
                let upper = &c * &u_max;
                let lower = &upper - &u_max * dyadic(1, t as u32);
                prop_assert!(lower <= gaps[i] && gaps[i] <= upper, "round {} point {}", t, i);
            }
        }
        for i in 0..n {
            prop_assert!(est.numerators[i] >= 1 && est.numerators[i] <= 1 << depth);
            prop_assert!(est.coeff(i) * &u_max >= gaps[i]);
        }
        prop_assert_eq!(o.ledger().count(Phase::Labels), n as u64);
        prop_assert_eq!(o.ledger().count(Phase::MaxGap), n as u64 - 1);
        prop_assert_eq!(o.ledger().count(Phase::Refinement), n as u64 * u64::from(depth));
        prop_assert_eq!(o.ledger().total(), (2 * n - 1) as u64 + n as u64 * u64::from(depth));
    }

    #[test]
    fn reduced_form_matches_raw(
        inst in instance(1..=6),
        raw in prop::collection::vec((0usize..6, 0u8..2, 0u8..2), 1..=12),
    ) {
        let n = inst.len();
        let entries: Vec<QueryEntry> =
            raw.iter().map(|&(p, a, b)| QueryEntry { point: p % n, first: a, second: b }).collect();
        let query = Query::new(entries);
        let c = reduce_query(&query, inst.labels());
        prop_assert_eq!(truth_bit(&inst, &query).unwrap(), reduced_response(&c, inst.gaps()));
        prop_assert!(c.iter().map(|v| v.unsigned_abs() as usize).sum::<usize>() <= query.len());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn scale_equivariance(inst in instance(1..=6), k in power_of_two_order(), num in 1u64..=16, exp in 0u32..=4) {
        let s = dyadic(num, 4 + exp).min(Rational::one());
        let scaled_table: Vec<[Rational; 2]> =
            inst.utility().iter().map(|[a, b]| [a * &s, b * &s]).collect();
        let scaled = inst.with_utility(scaled_table).unwrap();
        let sample: Vec<usize> = (0..inst.len()).collect();
        let mut a = Oracle::new(&inst, OracleConfig::noiseless(k)).unwrap().with_transcript();
        let mut b = Oracle::new(&scaled, OracleConfig::noiseless(k)).unwrap().with_transcript();
        let ea = comptron(&mut a, &sample).unwrap();
        let eb = comptron(&mut b, &sample).unwrap();
        prop_assert_eq!(ea.coeffs(), eb.coeffs());
        prop_assert_eq!(a.transcript().unwrap(), b.transcript().unwrap());
    }

    #[test]
    fn full_and_gap_forms_differ_by_constant(inst in instance(1..=6), picks in prop::collection::vec(any::<u32>(), 1..=6)) {
        let class = class_for(inst.len(), &picks);
        let constant: Rational = inst
            .weights()
            .iter()
            .zip(inst.labels())
            .enumerate()
            .map(|(i, (w, &y))| w * inst.utility_at(i, 1 - y))
            .sum();
        let mut full = Vec::new();
        let mut gap = Vec::new();
        for h in class.iter() {
            let f = population_utility(&inst, h, UtilityForm::Full).unwrap();
            let g = population_utility(&inst, h, UtilityForm::Gap).unwrap();
            prop_assert_eq!(&f - &g, constant.clone());
            full.push(f);
            gap.push(g);
        }
        let report = evaluate(&inst, &class).unwrap();
        prop_assert!(report.excess_risks.iter().all(|r| *r >= Rational::zero()));
        prop_assert!(report.excess_risks[report.maximizer].is_zero());
        let s = Sample::population(&inst);
        let by_gap = erm(&s, inst.labels(), inst.gaps(), &class).unwrap();
        prop_assert_eq!(by_gap, report.maximizer);
    }

    #[test]
    fn gap_scaling_keeps_argmax(inst in instance(1..=6), picks in prop::collection::vec(any::<u32>(), 1..=6), num in 1i64..=50) {
        let class = class_for(inst.len(), &picks);
        let s = Sample::population(&inst);
        let scaled: Vec<Rational> = inst.gaps().iter().map(|g| g * ratio(num, 7)).collect();
        let a = plugin(&s, inst.labels(), inst.gaps(), &class, Provenance::GroundTruth).unwrap();
        let b = plugin(&s, inst.labels(), &scaled, &class, Provenance::GroundTruth).unwrap();
        prop_assert_eq!(a.tie_set, b.tie_set);
    }

    #[test]
    fn well_specified_plugin_matches_erm(
        inst in instance(1..=6),
        picks in prop::collection::vec(any::<u32>(), 0..=5),
        k in power_of_two_order(),
    ) {
        let n = inst.len();
        let mut labelings: Vec<Vec<u8>> = vec![inst.labels().to_vec()];
        labelings.extend(class_for(n, &picks.iter().copied().chain([0]).collect::<Vec<_>>()).iter().map(<[u8]>::to_vec));
        let class = HypothesisClass::new(n, labelings).unwrap();
        let sample: Vec<usize> = (0..n).collect();
        let mut o = Oracle::new(&inst, OracleConfig::noiseless(k)).unwrap();
        let est = comptron(&mut o, &sample).unwrap();
        let s = Sample::uniform(sample).unwrap();
        let p = plugin(&s, &est.labels, est.coeffs(), &class, Provenance::Comptron).unwrap();
        let e = erm(&s, inst.labels(), inst.gaps(), &class).unwrap();
        prop_assert_eq!(class.get(p.chosen), class.get(e));
    }

    #[test]
    fn bounds_hold(
        inst in instance(1..=6),
        picks in prop::collection::vec(any::<u32>(), 1..=6),
        raw_sample in prop::collection::vec(0usize..6, 1..=8),
        k in power_of_two_order(),
    ) {
        let n = inst.len();
        let class = class_for(n, &picks);
        let positions: Vec<usize> = raw_sample.iter().map(|i| i % n).collect();
        let mut o = Oracle::new(&inst, OracleConfig::noiseless(k)).unwrap();
        let est = comptron(&mut o, &positions).unwrap();
        let s = Sample::uniform(positions).unwrap();
        let report = bound_report(&inst, &s, &est, &class).unwrap();
        prop_assert!(report.risk_bound_holds());
        prop_assert!(report.mismatch_bound_holds());
        prop_assert!(report.order_bound_holds());
        prop_assert!(report.gap_error <= &report.u_max * ratio(2, k as i64));
    }

    #[test]
    fn payoff_is_excess_risk(inst in instance(1..=5), picks in prop::collection::vec(any::<u32>(), 1..=6), which in any::<u32>()) {
        let n = inst.len();
        let class = class_for(n, &picks);
        let f = class.get(which as usize % class.len()).to_vec();
        let v = payoff(&f, inst.gaps(), inst.weights(), inst.labels(), &class).unwrap();
        prop_assert_eq!(v, excess_risk(&inst, &f, &class).unwrap());
    }

    #[test]
    fn ratio_window_is_indistinguishable(k in 2usize..=12, a in 0.0f64..=1.0, b in 0.0f64..=1.0, s1 in 0.01f64..=1.0, s2 in 0.01f64..=1.0) {
        let low = Rational::one() - ratio(1, k as i64);
        let width = ratio(1, k as i64);
        let r1 = &low + common::q(a) * &width;
        let r2 = &low + common::q(b) * &width;
        let g = [common::q(s1), common::q(s1) * r1];
        let h = [common::q(s2), common::q(s2) * r2];
        prop_assert!(indistinguishable_gaps(&g, &h, k).unwrap().indistinguishable);
    }

    #[test]
    fn true_gaps_are_members(inst in instance(1..=3), k in prop::sample::select(vec![1usize, 2, 4, 6])) {
        let poly = ConsistentPolytope::from_instance(&inst, k).unwrap();
        prop_assert!(poly.contains(inst.gaps()));
    }
}

#[test]
fn two_point_k2_full_form_utility() {
    let inst = TabularInstance::new(
        Point::on_line(&[1.0, -1.0]),
        vec![ratio(6, 13), ratio(7, 13)],
        vec![[int(0), int(1)], [int(0), ratio(13, 14)]],
    )
    .unwrap();
    assert_eq!(population_utility(&inst, &[1, 0], UtilityForm::Full).unwrap(), ratio(6, 13));
}
