//! ERM and plug-in learners, the excess-risk bound audit, and a Monte Carlo
//! estimate of the empirical Rademacher complexity.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::{Signed, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::comptron::GapEstimate;
use crate::error::{Error, Result};
use crate::instance::{argmax_first, population_utility, HypothesisClass, TabularInstance, UtilityForm};
use crate::num::{int, ratio, to_f64, Rational};

/// Sample positions over the support, with a weight per position.
///
/// Positions may repeat (sampling with replacement).
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub indices: Vec<usize>,
    pub weights: Vec<Rational>,
}

impl Sample {
    /// Empirical weights `1/n` per position.
    pub fn uniform(indices: Vec<usize>) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::EmptySample);
        }
        let w = ratio(1, indices.len() as i64);
        let weights = vec![w; indices.len()];
        Ok(Self { indices, weights })
    }

    /// The whole support with the instance distribution as weights.
    pub fn population(instance: &TabularInstance) -> Self {
        Self { indices: (0..instance.len()).collect(), weights: instance.weights().to_vec() }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    fn check(&self, n: usize) -> Result<()> {
        if self.indices.is_empty() {
            return Err(Error::EmptySample);
        }
        if self.weights.len() != self.indices.len() {
            return Err(Error::DimensionMismatch { expected: self.indices.len(), found: self.weights.len() });
        }
        match self.indices.iter().find(|&&i| i >= n) {
            Some(&i) => Err(Error::InvalidSample(format!("index {i} outside support of size {n}"))),
            None => Ok(()),
        }
    }

    /// Hypothesis predictions at the sample positions.
    fn predictions<'a>(&'a self, hypothesis: &'a [u8]) -> impl Iterator<Item = u8> + 'a {
        self.indices.iter().map(move |&i| hypothesis[i])
    }
}

/// Where the gap values fed to the plug-in learner came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Comptron,
    RobComptron,
    GroundTruth,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PluginResult {
    /// Lowest index in `tie_set`.
    pub chosen: usize,
    /// Gap-form empirical utility of the choice, in the units of the scores.
    pub utility: Rational,
    pub tie_set: Vec<usize>,
    pub provenance: Provenance,
}

/// `sum_j w_j s_j 1[f(x_j) = y_j]` for every hypothesis.
pub fn gap_scores(sample: &Sample, labels: &[u8], scores: &[Rational], class: &HypothesisClass) -> Result<Vec<Rational>> {
    sample.check(class.support_size())?;
    for len in [labels.len(), scores.len()] {
        if len != sample.len() {
            return Err(Error::DimensionMismatch { expected: sample.len(), found: len });
        }
    }
    Ok(class
        .iter()
        .map(|h| {
            sample
                .predictions(h)
                .zip(labels)
                .zip(scores.iter().zip(&sample.weights))
                .filter(|((p, y), _)| p == *y)
                .fold(Rational::zero(), |acc, (_, (s, w))| acc + w * s)
        })
        .collect())
}

fn ties(values: &[Rational]) -> Result<Vec<usize>> {
    let best = argmax_first(values).ok_or(Error::EmptyClass)?;
    Ok((0..values.len()).filter(|&i| values[i] == values[best]).collect())
}

/// Empirical utility maximizer with known gaps; ties go to the lowest index.
pub fn erm(sample: &Sample, labels: &[u8], gaps: &[Rational], class: &HypothesisClass) -> Result<usize> {
    let values = gap_scores(sample, labels, gaps, class)?;
    argmax_first(&values).ok_or(Error::EmptyClass)
}

/// ERM against estimated gaps (coefficients of the unknown largest gap, or
/// any positive multiple of the gaps).
pub fn plugin(
    sample: &Sample,
    labels: &[u8],
    coeffs: &[Rational],
    class: &HypothesisClass,
    provenance: Provenance,
) -> Result<PluginResult> {
    let values = gap_scores(sample, labels, coeffs, class)?;
    let tie_set = ties(&values)?;
    let chosen = tie_set[0];
    Ok(PluginResult { chosen, utility: values[chosen].clone(), tie_set, provenance })
}

/// Every term of the excess-risk bounds for a plug-in run, exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub erm: usize,
    pub plugin: usize,
    /// Population excess risk of the plug-in choice.
    pub excess_risk: Rational,
    /// `sup_f |U(f) - U_S(f)|` between population and weighted empirical utility.
    pub uniform_term: Rational,
    /// `max_j max_y |u(x_j, y) - u_hat(x_j, y)|` with the full-form estimate.
    pub estimation_error: Rational,
    /// `max_j |g_j - g_hat_j|`.
    pub gap_error: Rational,
    /// `max_j (g_j - g_hat_j)`; nonpositive for upper estimates.
    pub gap_error_signed: Rational,
    /// Largest true gap on the sample, the unit of the coefficients.
    pub u_max: Rational,
    /// Weighted fraction of positions where ERM and plug-in disagree.
    pub mismatch: Rational,
    /// Weighted fraction of positions ERM labels wrongly.
    pub erm_error: Rational,
    /// `2 * uniform_term + 2 * estimation_error * mismatch`.
    pub risk_bound: Rational,
    /// Reported only: with upper estimates this form can be violated.
    pub mismatch_bound_signed: Rational,
    /// `2 * uniform_term + 2 * gap_error * erm_error`.
    pub mismatch_bound: Rational,
    /// Present when the estimate came from Comptron at a known order.
    pub order_bound: Option<Rational>,
}

impl BoundReport {
    pub fn risk_bound_holds(&self) -> bool {
        self.excess_risk <= self.risk_bound
    }

    pub fn mismatch_bound_holds(&self) -> bool {
        self.excess_risk <= self.mismatch_bound
    }

    pub fn order_bound_holds(&self) -> bool {
        self.order_bound.as_ref().is_none_or(|rhs| self.excess_risk <= *rhs)
    }

    /// All asserted bounds hold.
    pub fn holds(&self) -> bool {
        self.risk_bound_holds() && self.mismatch_bound_holds() && self.order_bound_holds()
    }
}

/// Audits a Comptron estimate on a sample against the ground truth.
pub fn bound_report(
    instance: &TabularInstance,
    sample: &Sample,
    estimate: &GapEstimate,
    class: &HypothesisClass,
) -> Result<BoundReport> {
    bound_report_from_coefficients(instance, sample, &estimate.labels, estimate.coeffs(), Some(estimate.k), class)
}

/// Bound audit for arbitrary nonnegative coefficients of the sample's
/// largest gap. `k` enables the order bound, whose estimation term is
/// `(2 u_max / k) * err(ERM)`.
pub fn bound_report_from_coefficients(
    instance: &TabularInstance,
    sample: &Sample,
    labels: &[u8],
    coeffs: &[Rational],
    k: Option<usize>,
    class: &HypothesisClass,
) -> Result<BoundReport> {
    if instance.len() != class.support_size() {
        return Err(Error::DimensionMismatch { expected: instance.len(), found: class.support_size() });
    }
    sample.check(instance.len())?;
    let true_labels: Vec<u8> = sample.indices.iter().map(|&i| instance.labels()[i]).collect();
    let true_gaps: Vec<Rational> = sample.indices.iter().map(|&i| instance.gaps()[i].clone()).collect();
    let u_max = true_gaps.iter().max().cloned().unwrap_or_else(Rational::zero);
    let est_gaps: Vec<Rational> = coeffs.iter().map(|c| c * &u_max).collect();

    let erm_idx = erm(sample, &true_labels, &true_gaps, class)?;
    let plug = plugin(sample, labels, coeffs, class, Provenance::Comptron)?.chosen;

    let population = class
        .iter()
        .map(|h| population_utility(instance, h, UtilityForm::Full))
        .collect::<Result<Vec<_>>>()?;
    let best = population.iter().max().cloned().ok_or(Error::EmptyClass)?;
    let excess_risk = &best - &population[plug];

    let empirical: Vec<Rational> = class
        .iter()
        .map(|h| {
            sample
                .indices
                .iter()
                .zip(&sample.weights)
                .fold(Rational::zero(), |acc, (&i, w)| acc + w * instance.utility_at(i, h[i]))
        })
        .collect();
    let uniform_term = population
        .iter()
        .zip(&empirical)
        .map(|(p, e)| (p - e).abs())
        .max()
        .unwrap_or_else(Rational::zero);

    // full-form estimate: u_hat(x, y_hat) = u(x, 1 - y_hat) + g_hat, u_hat(x, 1 - y_hat) = u(x, 1 - y_hat)
    let mut estimation_error = Rational::zero();
    for (j, &i) in sample.indices.iter().enumerate() {
        let y_hat = labels[j];
        let base = instance.utility_at(i, 1 - y_hat);
        let on_label = (instance.utility_at(i, y_hat) - (base + &est_gaps[j])).abs();
        estimation_error = estimation_error.max(on_label);
    }
    let diffs: Vec<Rational> = true_gaps.iter().zip(&est_gaps).map(|(g, e)| g - e).collect();
    let gap_error = diffs.iter().map(|d| d.abs()).max().unwrap_or_else(Rational::zero);
    let gap_error_signed = diffs.iter().max().cloned().unwrap_or_else(Rational::zero);

    let h_erm = class.get(erm_idx);
    let h_plug = class.get(plug);
    let mut mismatch = Rational::zero();
    let mut erm_error = Rational::zero();
    for (j, (&i, w)) in sample.indices.iter().zip(&sample.weights).enumerate() {
        if h_erm[i] != h_plug[i] {
            mismatch += w;
        }
        if h_erm[i] != true_labels[j] {
            erm_error += w;
        }
    }

    let two = int(2);
    let uc = &two * &uniform_term;
    let risk_bound = &uc + &two * &estimation_error * &mismatch;
    let mismatch_bound_signed = &uc + &two * &gap_error_signed * &erm_error;
    let mismatch_bound = &uc + &two * &gap_error * &erm_error;
    let order_bound = k.map(|k| &uc + &two * &u_max / int(k as i64) * &erm_error);

    Ok(BoundReport {
        erm: erm_idx,
        plugin: plug,
        excess_risk,
        uniform_term,
        estimation_error,
        gap_error,
        gap_error_signed,
        u_max,
        mismatch,
        erm_error,
        risk_bound,
        mismatch_bound_signed,
        mismatch_bound,
        order_bound,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RademacherEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub draws: usize,
}

/// Monte Carlo estimate of `E sup_f |(1/n) sum_j eps_j u(x_j, f(x_j))|`
/// over uniform random signs.
pub fn rademacher_mc(
    instance: &TabularInstance,
    sample: &[usize],
    class: &HypothesisClass,
    num_draws: usize,
    seed: u64,
) -> Result<RademacherEstimate> {
    if num_draws == 0 {
        return Err(Error::InvalidSample("num_draws must be positive".into()));
    }
    let sample = Sample::uniform(sample.to_vec())?;
    sample.check(class.support_size())?;
    if instance.len() != class.support_size() {
        return Err(Error::DimensionMismatch { expected: instance.len(), found: class.support_size() });
    }
    let table: Vec<Vec<f64>> = class
        .iter()
        .map(|h| sample.indices.iter().map(|&i| to_f64(instance.utility_at(i, h[i]))).collect())
        .collect();
    let n = sample.len() as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut signs = vec![0.0f64; sample.len()];
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..num_draws {
        for s in signs.iter_mut() {
            *s = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        }
        let sup = table
            .iter()
            .map(|row| (row.iter().zip(&signs).map(|(u, e)| u * e).sum::<f64>() / n).abs())
            .fold(0.0, f64::max);
        sum += sup;
        sum_sq += sup * sup;
    }
    let draws = num_draws as f64;
    let mean = sum / draws;
    let var = if num_draws > 1 { ((sum_sq - draws * mean * mean) / (draws - 1.0)).max(0.0) } else { 0.0 };
    Ok(RademacherEstimate { mean, std_error: libm::sqrt(var / draws), draws: num_draws })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::comptron::comptron;
    use crate::instance::{induce_threshold_class, Point};
    use crate::oracle::{Oracle, OracleConfig};

    fn two_point_k2() -> TabularInstance {
        TabularInstance::new(
            Point::on_line(&[1.0, -1.0]),
            vec![ratio(6, 13), ratio(7, 13)],
            vec![[int(0), int(1)], [int(0), ratio(13, 14)]],
        )
        .unwrap()
    }

    fn three_point(k: i64) -> TabularInstance {
        let p = ratio(1, k + 8);
        TabularInstance::new(
            Point::on_line(&[1.0, 2.0, -1.0]),
            vec![p.clone(), p.clone(), int(1) - int(2) * p],
            vec![[int(0), int(1)], [int(0), ratio(4, k)], [int(0), ratio(2, k * k)]],
        )
        .unwrap()
    }

    #[test]
    fn erm_on_two_point() {
        let inst = two_point_k2();
        let class = induce_threshold_class(inst.points()).unwrap();
        let s = Sample::population(&inst);
        let idx = erm(&s, inst.labels(), inst.gaps(), &class).unwrap();
        assert_eq!(class.get(idx), &[0, 1]);
    }

    #[test]
    fn erm_uniform_gaps_is_accuracy() {
        let inst = TabularInstance::from_f64(
            Point::anonymous(3),
            &[0.5, 0.25, 0.25],
            &[[0.0, 0.5], [0.5, 0.0], [0.5, 0.0]],
        )
        .unwrap();
        let class = HypothesisClass::new(3, [vec![1, 1, 1], vec![0, 0, 0], vec![1, 0, 1]]).unwrap();
        let s = Sample::population(&inst);
        assert_eq!(erm(&s, inst.labels(), inst.gaps(), &class).unwrap(), 2);
    }

    #[test]
    fn three_point_erm_and_plugin() {
        let inst = three_point(16);
        let class = induce_threshold_class(inst.points()).unwrap();
        let s = Sample::population(&inst);
        let idx = erm(&s, inst.labels(), inst.gaps(), &class).unwrap();
        assert_eq!(class.get(idx), &[1, 1, 0]);
        let coeffs = [int(1), ratio(6, 16), ratio(2, 16)];
        let r = plugin(&s, &[1, 1, 1], &coeffs, &class, Provenance::Comptron).unwrap();
        assert_eq!(class.get(r.chosen), &[0, 0, 1]);
        assert_eq!(r.tie_set, vec![r.chosen]);
    }

    #[test]
    fn plugin_with_truth_matches_erm() {
        let inst = three_point(32);
        let class = HypothesisClass::all_dichotomies(3).unwrap();
        let s = Sample::population(&inst);
        let idx = erm(&s, inst.labels(), inst.gaps(), &class).unwrap();
        let r = plugin(&s, inst.labels(), inst.gaps(), &class, Provenance::GroundTruth).unwrap();
        assert_eq!(r.chosen, idx);
    }

    #[test]
    fn plugin_tie_set_and_scale() {
        let class = HypothesisClass::new(2, [vec![1, 0], vec![0, 1], vec![0, 0]]).unwrap();
        let s = Sample::uniform(vec![0, 1]).unwrap();
        let r = plugin(&s, &[1, 1], &[ratio(1, 2), ratio(1, 2)], &class, Provenance::Comptron).unwrap();
        assert_eq!(r.tie_set, vec![0, 1]);
        assert_eq!(r.chosen, 0);
        let scaled = plugin(&s, &[1, 1], &[ratio(3, 2), ratio(3, 2)], &class, Provenance::Comptron).unwrap();
        assert_eq!(scaled.tie_set, r.tie_set);
    }

    #[test]
    fn plugin_errors() {
        let class = HypothesisClass::all_dichotomies(2).unwrap();
        let s = Sample::uniform(vec![0, 1]).unwrap();
        assert!(matches!(
            plugin(&s, &[1], &[int(1), int(1)], &class, Provenance::Comptron),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(Sample::uniform(vec![]), Err(Error::EmptySample)));
    }

    #[test]
    fn three_point_bound_report() {
        let inst = three_point(16);
        let class = induce_threshold_class(inst.points()).unwrap();
        let s = Sample::population(&inst);
        let mut o = Oracle::new(&inst, OracleConfig::noiseless(16)).unwrap();
        let est = comptron(&mut o, &[0, 1, 2]).unwrap();
        let r = bound_report(&inst, &s, &est, &class).unwrap();
        assert_eq!(r.excess_risk, ratio(276, 6144));
        assert!(r.uniform_term.is_zero());
        assert_eq!(r.erm_error, ratio(22, 24));
        assert_eq!(r.order_bound.clone().unwrap(), ratio(2, 16) * ratio(22, 24));
        assert!((to_f64(r.order_bound.as_ref().unwrap()) - 0.11458).abs() < 1e-5);
        assert!(r.holds());
        assert!(!(r.excess_risk <= r.mismatch_bound_signed));
    }

    #[test]
    fn population_sample_has_no_uniform_term() {
        let inst = two_point_k2();
        let class = induce_threshold_class(inst.points()).unwrap();
        let s = Sample::population(&inst);
        let r = bound_report_from_coefficients(&inst, &s, &[1, 1], &[int(1), int(1)], None, &class).unwrap();
        assert!(r.uniform_term.is_zero());
        assert_eq!(r.risk_bound, int(2) * &r.estimation_error * &r.mismatch);
        assert!(r.holds());
    }

    fn exact_rademacher(values: &[Vec<f64>]) -> f64 {
        let n = values[0].len();
        let mut total = 0.0;
        for mask in 0u32..(1 << n) {
            let sup = values
                .iter()
                .map(|row| {
                    let s: f64 = row
                        .iter()
                        .enumerate()
                        .map(|(i, u)| if mask >> i & 1 == 1 { *u } else { -*u })
                        .sum();
                    (s / n as f64).abs()
                })
                .fold(0.0, f64::max);
            total += sup;
        }
        total / f64::from(1u32 << n)
    }

    #[test]
    fn rademacher_singleton_class() {
        let utils = [[0.1, 0.9], [0.3, 0.2], [0.5, 0.6], [0.0, 1.0], [0.7, 0.4]];
        let inst = TabularInstance::from_f64(Point::anonymous(5), &[0.2; 5], &utils).unwrap();
        let class = HypothesisClass::new(5, [vec![1, 0, 1, 1, 0]]).unwrap();
        let exact = exact_rademacher(&[vec![0.9, 0.3, 0.6, 1.0, 0.7]]);
        let est = rademacher_mc(&inst, &[0, 1, 2, 3, 4], &class, 20_000, 7).unwrap();
        assert!((est.mean - exact).abs() <= 3.0 * est.std_error + 1e-12);
    }

    #[test]
    fn rademacher_zero_utility() {
        let inst = TabularInstance::from_f64(Point::anonymous(3), &[0.5, 0.25, 0.25], &[[0.0, 0.0]; 3]).unwrap();
        let class = HypothesisClass::all_dichotomies(3).unwrap();
        let est = rademacher_mc(&inst, &[0, 1, 2], &class, 100, 1).unwrap();
        assert_eq!(est.mean, 0.0);
        assert_eq!(est.std_error, 0.0);
    }

    #[test]
    fn rademacher_all_dichotomies() {
        let n = 6;
        let inst = TabularInstance::from_f64(Point::anonymous(n), &[1.0 / 6.0; 6], &[[0.0, 1.0]; 6]);
        let inst = inst.unwrap_or_else(|_| {
            TabularInstance::new(Point::anonymous(n), vec![ratio(1, 6); 6], vec![[int(0), int(1)]; 6]).unwrap()
        });
        let class = HypothesisClass::all_dichotomies(n).unwrap();
        let rows: Vec<Vec<f64>> = class.iter().map(|h| h.iter().map(|&b| f64::from(b)).collect()).collect();
        let exact = exact_rademacher(&rows);
        let est = rademacher_mc(&inst, &(0..n).collect::<Vec<_>>(), &class, 20_000, 11).unwrap();
        assert!((est.mean - exact).abs() <= 3.0 * est.std_error);
    }
}
