//! Hard instances and the k-indistinguishability checker.
//!
//! Two utilities that share labels are indistinguishable at order `k` when
//! every reduced query `c` with `|c|_1 <= k` gets the same answer
//! `1[c . g >= 0]` under both gap vectors.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Zero};

use crate::comptron::ReferencePolicy;
use crate::error::{Error, Result};
use crate::instance::{excess_risk, induce_threshold_class, HypothesisClass, Point, TabularInstance};
use crate::num::{int, ratio, Rational};
use crate::oracle::{enumerate_reduced_queries_with_cap, reduced_response, DEFAULT_ENUMERATION_CAP};

/// Two utilities on a shared support and distribution that no order-`k`
/// query can tell apart.
#[derive(Debug, Clone, PartialEq)]
pub struct HardInstancePair {
    pub k: usize,
    pub first: TabularInstance,
    pub second: TabularInstance,
    pub class: HypothesisClass,
    /// `analytic_risks[h][u]`: excess risk of hypothesis `h` under utility `u`.
    pub analytic_risks: Vec<[Rational; 2]>,
}

impl HardInstancePair {
    pub fn utility(&self, which: usize) -> &TabularInstance {
        if which == 0 {
            &self.first
        } else {
            &self.second
        }
    }

    /// Risks recomputed from the utility tables, same layout as
    /// `analytic_risks`.
    pub fn computed_risks(&self) -> Result<Vec<[Rational; 2]>> {
        self.class
            .iter()
            .map(|h| Ok([excess_risk(&self.first, h, &self.class)?, excess_risk(&self.second, h, &self.class)?]))
            .collect()
    }
}

/// Two points `x+ = 1`, `x- = -1` whose gaps differ by a factor within
/// `[1 - 1/k, 1]`, with weights chosen so that each threshold hypothesis is
/// wrong for one of the utilities.
///
/// Hypothesis 0 is `f_{+1}` (labels `(1, 0)`), hypothesis 1 is `f_{-1}`.
pub fn theorem2_instance(k: usize) -> Result<HardInstancePair> {
    if k < 2 {
        return Err(Error::InvalidOrder { k, reason: "the construction needs k >= 2" });
    }
    let kk = k as i64;
    let gamma1 = ratio(1, 2 * (3 * kk + 1));
    let gamma2 = ratio(2, 3 * kk + 1);
    let weights = vec![ratio(3 * kk, 6 * kk + 1), ratio(3 * kk + 1, 6 * kk + 1)];
    let points = Point::on_line(&[1.0, -1.0]);
    let table = |gamma: Rational| vec![[int(0), int(1)], [int(0), Rational::one() - gamma]];
    let first = TabularInstance::new(points.clone(), weights.clone(), table(gamma1))?;
    let second = TabularInstance::new(points, weights, table(gamma2))?;
    let class = induce_threshold_class(first.points())?;
    let small = ratio(1, 2 * (6 * kk + 1));
    let large = ratio(1, 6 * kk + 1);
    let analytic_risks = vec![[small, Rational::zero()], [Rational::zero(), large]];
    Ok(HardInstancePair { k, first, second, class, analytic_risks })
}

/// The three-point instance on which plug-in Comptron is beaten by an
/// estimator that refines `x_3` against `x_2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Prop2Instance {
    pub k: usize,
    /// Mass on each of the first two points, `1 / (k + 8)`.
    pub p: Rational,
    pub instance: TabularInstance,
    /// Threshold class; index 0 is `f_{+1} = (1, 1, 0)`, index 1 is
    /// `f_{-1} = (0, 0, 1)`.
    pub class: HypothesisClass,
    /// Comptron schedule that refines `x_3` against `x_2`.
    pub alternate: ReferencePolicy,
    /// `2/(k+2)^2 < 8/((k+2)^2+12) < p < 2/(k+8)`.
    pub thresholds: [Rational; 4],
}

impl Prop2Instance {
    pub const F_PLUS: usize = 0;
    pub const F_MINUS: usize = 1;

    /// Exact population excess risk of `f_{-1}`:
    /// `(k^2 + 2k - 12) / (k^2 (k + 8))`.
    pub fn plugin_risk(k: usize) -> Rational {
        let k = k as i64;
        ratio(k * k + 2 * k - 12, k * k * (k + 8))
    }
}

pub fn prop2_instance(k: usize) -> Result<Prop2Instance> {
    if k <= 10 {
        return Err(Error::InvalidOrder { k, reason: "the construction needs k > 10" });
    }
    if !k.is_power_of_two() {
        return Err(Error::InvalidOrder { k, reason: "the construction needs a power of two" });
    }
    let kk = k as i64;
    let p = ratio(1, kk + 8);
    let weights = vec![p.clone(), p.clone(), Rational::one() - int(2) * &p];
    let utility = vec![[int(0), int(1)], [int(0), ratio(4, kk)], [int(0), ratio(2, kk * kk)]];
    let instance = TabularInstance::new(Point::on_line(&[1.0, 2.0, -1.0]), weights, utility)?;
    let class = induce_threshold_class(instance.points())?;
    let sq = (kk + 2) * (kk + 2);
    let thresholds = [ratio(2, sq), ratio(8, sq + 12), p.clone(), ratio(2, kk + 8)];
    let alternate = ReferencePolicy::PerPoint(vec![None, None, Some(1)]);
    Ok(Prop2Instance { k, p, instance, class, alternate, thresholds })
}

/// Outcome of an indistinguishability check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Indistinguishability {
    pub indistinguishable: bool,
    /// Lexicographically smallest canonical query with different answers.
    /// `None` when indistinguishable or when the labels already differ.
    pub witness: Option<Vec<i64>>,
}

/// Compares answers to every canonical reduced query of order `k`.
pub fn indistinguishable_gaps(first: &[Rational], second: &[Rational], k: usize) -> Result<Indistinguishability> {
    indistinguishable_gaps_with_cap(first, second, k, DEFAULT_ENUMERATION_CAP)
}

pub fn indistinguishable_gaps_with_cap(
    first: &[Rational],
    second: &[Rational],
    k: usize,
    cap: u128,
) -> Result<Indistinguishability> {
    if first.len() != second.len() {
        return Err(Error::DimensionMismatch { expected: first.len(), found: second.len() });
    }
    let witness = enumerate_reduced_queries_with_cap(first.len(), k, cap)?
        .into_iter()
        .find(|c| reduced_response(c, first) != reduced_response(c, second));
    Ok(Indistinguishability { indistinguishable: witness.is_none(), witness })
}

/// Instance-level check. Instances with different labels are told apart by
/// a single 1-comparison and are reported distinguishable without a
/// reduced-form witness.
pub fn indistinguishable(first: &TabularInstance, second: &TabularInstance, k: usize) -> Result<Indistinguishability> {
    if first.len() != second.len() {
        return Err(Error::DimensionMismatch { expected: first.len(), found: second.len() });
    }
    if first.labels() != second.labels() {
        return Ok(Indistinguishability { indistinguishable: false, witness: None });
    }
    indistinguishable_gaps(first.gaps(), second.gaps(), k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::comptron::{comptron, comptron_with_policy};
    use crate::instance::evaluate;
    use crate::learner::{plugin, Provenance, Sample};
    use crate::num::to_f64;
    use crate::oracle::{Oracle, OracleConfig};

    #[test]
    fn two_point_k2_constants() {
        let pair = theorem2_instance(2).unwrap();
        assert_eq!(pair.first.weights(), &[ratio(6, 13), ratio(7, 13)]);
        assert_eq!(pair.first.gaps()[1], ratio(13, 14));
        assert_eq!(pair.second.gaps()[1], ratio(5, 7));
        assert_eq!(pair.analytic_risks[0][0], ratio(1, 26));
        assert_eq!(pair.analytic_risks[1][1], ratio(1, 13));
        assert_eq!(pair.computed_risks().unwrap(), pair.analytic_risks);
        assert_eq!(pair.class.get(0), &[1, 0]);
    }

    #[test]
    fn two_point_k4_risks() {
        let pair = theorem2_instance(4).unwrap();
        assert_eq!(pair.analytic_risks[0][0], ratio(1, 50));
        assert_eq!(pair.analytic_risks[1][1], ratio(1, 25));
        assert!(ratio(1, 50) >= ratio(2, 25) / int(4));
        assert_eq!(pair.computed_risks().unwrap(), pair.analytic_risks);
    }

    #[test]
    fn two_point_gap_ratio_window() {
        for k in [2, 3, 4, 8, 16, 100] {
            let pair = theorem2_instance(k).unwrap();
            let low = Rational::one() - ratio(1, k as i64);
            for inst in [&pair.first, &pair.second] {
                let r = &inst.gaps()[1] / &inst.gaps()[0];
                assert!(r >= low && r <= Rational::one(), "k={k}");
            }
        }
        assert!(matches!(theorem2_instance(1), Err(Error::InvalidOrder { .. })));
    }

    #[test]
    fn two_point_indistinguishable_at_k() {
        for k in [2, 4, 8] {
            let pair = theorem2_instance(k).unwrap();
            assert!(indistinguishable(&pair.first, &pair.second, k).unwrap().indistinguishable);
            let far = indistinguishable(&pair.first, &pair.second, 6 * k + 1).unwrap();
            assert!(!far.indistinguishable);
            let kk = k as i64;
            let family = [3 * kk, -(3 * kk + 1)];
            assert_ne!(
                reduced_response(&family, pair.first.gaps()),
                reduced_response(&family, pair.second.gaps())
            );
        }
        let pair = theorem2_instance(2).unwrap();
        let first_sep = (2..=13)
            .find(|&o| !indistinguishable(&pair.first, &pair.second, o).unwrap().indistinguishable)
            .unwrap();
        assert_eq!(first_sep, 7);
        assert_eq!(indistinguishable(&pair.first, &pair.second, 7).unwrap().witness, Some(vec![3, -4]));
    }

    #[test]
    fn identical_utilities() {
        let pair = theorem2_instance(2).unwrap();
        for k in 1..6 {
            assert!(indistinguishable(&pair.first, &pair.first, k).unwrap().indistinguishable);
        }
    }

    #[test]
    fn small_gap_pair() {
        let a = [int(1), ratio(1, 2)];
        let b = [int(1), ratio(3, 5)];
        assert!(indistinguishable_gaps(&a, &b, 2).unwrap().indistinguishable);
        let r = indistinguishable_gaps(&a, &b, 3).unwrap();
        assert_eq!(r.witness, Some(vec![1, -2]));
    }

    #[test]
    fn label_mismatch_is_distinguishable() {
        let a = TabularInstance::from_f64(Point::anonymous(1), &[1.0], &[[0.0, 1.0]]).unwrap();
        let b = TabularInstance::from_f64(Point::anonymous(1), &[1.0], &[[1.0, 0.0]]).unwrap();
        let r = indistinguishable(&a, &b, 4).unwrap();
        assert!(!r.indistinguishable);
        assert_eq!(r.witness, None);
    }

    #[test]
    fn three_point_thresholds_k16() {
        let bundle = prop2_instance(16).unwrap();
        let t: Vec<f64> = bundle.thresholds.iter().map(to_f64).collect();
        assert!((t[0] - 0.00617).abs() < 1e-5);
        assert!((t[1] - 0.02381).abs() < 1e-5);
        assert!((t[2] - 0.04167).abs() < 1e-5);
        assert!((t[3] - 0.08333).abs() < 1e-5);
        assert!(bundle.thresholds.windows(2).all(|w| w[0] < w[1]));
        assert!(matches!(prop2_instance(8), Err(Error::InvalidOrder { .. })));
        assert!(matches!(prop2_instance(24), Err(Error::InvalidOrder { .. })));
    }

    #[test]
    fn three_point_choices_k16() {
        let bundle = prop2_instance(16).unwrap();
        let inst = &bundle.instance;
        let report = evaluate(inst, &bundle.class).unwrap();
        assert_eq!(report.maximizer, Prop2Instance::F_PLUS);
        assert_eq!(report.excess_risks[Prop2Instance::F_MINUS], Prop2Instance::plugin_risk(16));
        assert_eq!(Prop2Instance::plugin_risk(16), ratio(276, 6144));

        let s = Sample::population(inst);
        let mut o = Oracle::new(inst, OracleConfig::noiseless(16)).unwrap();
        let est = comptron(&mut o, &[0, 1, 2]).unwrap();
        let plug = plugin(&s, &est.labels, est.coeffs(), &bundle.class, Provenance::Comptron).unwrap();
        assert_eq!(plug.chosen, Prop2Instance::F_MINUS);

        let mut o = Oracle::new(inst, OracleConfig::noiseless(16)).unwrap();
        let alt = comptron_with_policy(&mut o, &[0, 1, 2], &bundle.alternate).unwrap();
        let tilde = plugin(&s, &alt.labels, alt.coeffs(), &bundle.class, Provenance::Comptron).unwrap();
        assert_eq!(tilde.chosen, Prop2Instance::F_PLUS);
    }

    #[test]
    fn three_point_alternate_is_safe_on_interval() {
        // f_{+1} stays optimal for every x_3 gap in [0, 8/k^2]
        let bundle = prop2_instance(16).unwrap();
        let w = bundle.instance.weights();
        let g = bundle.instance.gaps();
        for step in 0..=64 {
            let g3 = ratio(8, 256) * ratio(step, 64);
            let plus = &w[0] * &g[0] + &w[1] * &g[1];
            let minus = &w[2] * g3;
            assert!(plus >= minus);
        }
    }
}
