//! Finite-support problem instances, hypothesis classes and population
//! evaluation.

use alloc::string::String;
use alloc::vec::Vec;
use core::ops::Deref;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::num::{self, Rational};

/// Absolute tolerance on the total probability mass.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-12;

/// A support point. The coordinate is only needed to induce threshold classes.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub id: String,
    pub coord: Option<f64>,
}

impl Point {
    pub fn new(id: impl Into<String>, coord: Option<f64>) -> Self {
        Self { id: id.into(), coord }
    }

    /// Points named `x1..xn` carrying the given coordinates.
    pub fn on_line(coords: &[f64]) -> Vec<Point> {
        coords
            .iter()
            .enumerate()
            .map(|(i, &c)| Point::new(alloc::format!("x{}", i + 1), Some(c)))
            .collect()
    }

    pub fn anonymous(n: usize) -> Vec<Point> {
        (0..n)
            .map(|i| Point::new(alloc::format!("x{}", i + 1), None))
            .collect()
    }
}

/// Per-point utility gaps `u(x_i, y_i) - u(x_i, 1 - y_i)`, all nonnegative.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GapVector(Vec<Rational>);

impl GapVector {
    pub fn new(gaps: Vec<Rational>) -> Self {
        Self(gaps)
    }

    pub fn max(&self) -> Rational {
        num::max_of(&self.0).unwrap_or_else(Rational::zero)
    }

    pub fn into_inner(self) -> Vec<Rational> {
        self.0
    }
}

impl Deref for GapVector {
    type Target = [Rational];

    fn deref(&self) -> &[Rational] {
        &self.0
    }
}

/// A distribution over finitely many points together with the utility table
/// `u(x_i, y)` for `y in {0, 1}`. Labels and gaps are derived on construction;
/// a tie `u(x, 1) = u(x, 0)` is labelled 1.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularInstance {
    points: Vec<Point>,
    weights: Vec<Rational>,
    utility: Vec<[Rational; 2]>,
    labels: Vec<u8>,
    gaps: GapVector,
}

impl TabularInstance {
    pub fn new(
        points: Vec<Point>,
        weights: Vec<Rational>,
        utility: Vec<[Rational; 2]>,
    ) -> Result<Self> {
        let n = points.len();
        if weights.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: weights.len() });
        }
        if utility.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: utility.len() });
        }
        if n == 0 {
            return Err(Error::DimensionMismatch { expected: 1, found: 0 });
        }
        for (point, w) in weights.iter().enumerate() {
            if *w < Rational::zero() {
                return Err(Error::NegativeWeight { point });
            }
        }
        let total: Rational = weights.iter().sum();
        let deviation = num::to_f64(&(&total - Rational::one())).abs();
        if deviation.is_nan() || deviation > WEIGHT_SUM_TOLERANCE {
            return Err(Error::WeightNormalization { sum: num::to_f64(&total) });
        }
        for (point, row) in utility.iter().enumerate() {
            for u in row {
                if *u < Rational::zero() || *u > Rational::one() {
                    return Err(Error::UtilityOutOfRange { point, value: num::to_f64(u) });
                }
            }
        }
        let labels: Vec<u8> = utility.iter().map(|[u0, u1]| u8::from(u1 >= u0)).collect();
        let gaps = utility
            .iter()
            .zip(&labels)
            .map(|(row, &y)| &row[y as usize] - &row[1 - y as usize])
            .collect();
        Ok(Self { points, weights, utility, labels, gaps: GapVector(gaps) })
    }

    /// Builds an instance from floating-point data, converting every value
    /// exactly.
    pub fn from_f64(points: Vec<Point>, weights: &[f64], utility: &[[f64; 2]]) -> Result<Self> {
        let weights = weights
            .iter()
            .enumerate()
            .map(|(point, &w)| {
                num::exact(w).ok_or(Error::WeightNormalization { sum: f64::NAN }).and_then(|r| {
                    if w < 0.0 {
                        Err(Error::NegativeWeight { point })
                    } else {
                        Ok(r)
                    }
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let utility = utility
            .iter()
            .enumerate()
            .map(|(point, row)| {
                let conv = |value: f64| {
                    num::exact(value).ok_or(Error::UtilityOutOfRange { point, value })
                };
                Ok([conv(row[0])?, conv(row[1])?])
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(points, weights, utility)
    }

    /// Instance whose utility is `g_i` on the label `labels[i]` and 0 on the
    /// other decision.
    pub fn from_gaps(
        points: Vec<Point>,
        weights: Vec<Rational>,
        labels: &[u8],
        gaps: &[Rational],
    ) -> Result<Self> {
        if labels.len() != gaps.len() {
            return Err(Error::DimensionMismatch { expected: labels.len(), found: gaps.len() });
        }
        let utility = labels
            .iter()
            .zip(gaps)
            .map(|(&y, g)| {
                let mut row = [Rational::zero(), Rational::zero()];
                row[usize::from(y & 1)] = g.clone();
                row
            })
            .collect();
        Self::new(points, weights, utility)
    }

    /// Same support and distribution with a different utility table.
    pub fn with_utility(&self, utility: Vec<[Rational; 2]>) -> Result<Self> {
        Self::new(self.points.clone(), self.weights.clone(), utility)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn utility(&self) -> &[[Rational; 2]] {
        &self.utility
    }

    pub fn utility_at(&self, point: usize, decision: u8) -> &Rational {
        &self.utility[point][usize::from(decision & 1)]
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn gaps(&self) -> &GapVector {
        &self.gaps
    }
}

/// A finite set of labelings of the support, deduplicated in first-seen order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HypothesisClass {
    n: usize,
    hypotheses: Vec<Vec<u8>>,
}

impl HypothesisClass {
    pub fn new(n: usize, labelings: impl IntoIterator<Item = Vec<u8>>) -> Result<Self> {
        let mut hypotheses: Vec<Vec<u8>> = Vec::new();
        for h in labelings {
            if h.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: h.len() });
            }
            if h.iter().any(|&y| y > 1) {
                return Err(Error::InvalidLabeling);
            }
            if !hypotheses.contains(&h) {
                hypotheses.push(h);
            }
        }
        if hypotheses.is_empty() {
            return Err(Error::EmptyClass);
        }
        Ok(Self { n, hypotheses })
    }

    /// Every labeling of `n` points, in binary counting order.
    pub fn all_dichotomies(n: usize) -> Result<Self> {
        if n >= 24 {
            return Err(Error::Capacity { required: 1u128 << n, cap: 1 << 24 });
        }
        let labelings = (0..1usize << n).map(|mask| (0..n).map(|i| ((mask >> i) & 1) as u8).collect());
        Self::new(n, labelings)
    }

    pub fn support_size(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.hypotheses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hypotheses.is_empty()
    }

    pub fn get(&self, index: usize) -> &[u8] {
        &self.hypotheses[index]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[u8]> {
        self.hypotheses.iter().map(Vec::as_slice)
    }

    pub fn position(&self, labeling: &[u8]) -> Option<usize> {
        self.hypotheses.iter().position(|h| h == labeling)
    }

    /// Restriction of every hypothesis to the given support positions.
    pub fn restrict(&self, indices: &[usize]) -> Result<Self> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.n) {
            return Err(Error::PointOutOfRange { point: bad, n: self.n });
        }
        Self::new(
            indices.len(),
            self.hypotheses.iter().map(|h| indices.iter().map(|&i| h[i]).collect()),
        )
    }
}

/// One-dimensional linear class `f_a(x) = sign(a x)`, `a in {+1, -1}`,
/// realized as its dichotomies on the support. Positive sign maps to label
/// 1; zero and negative map to 0.
pub fn induce_threshold_class(points: &[Point]) -> Result<HypothesisClass> {
    let coords = points
        .iter()
        .enumerate()
        .map(|(point, p)| p.coord.ok_or(Error::MissingCoordinate { point }))
        .collect::<Result<Vec<f64>>>()?;
    let labeling = |a: f64| coords.iter().map(|&x| u8::from(a * x > 0.0)).collect::<Vec<u8>>();
    HypothesisClass::new(points.len(), [labeling(1.0), labeling(-1.0)])
}

/// How utilities are summed: the full table, or gaps on correctly labelled
/// points (equal to the full form up to a hypothesis-independent constant).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UtilityForm {
    Full,
    Gap,
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// `sum_i w_i g_i 1[h_i = y_i]`.
pub fn gap_utility(weights: &[Rational], labels: &[u8], gaps: &[Rational], hypothesis: &[u8]) -> Rational {
    weights
        .iter()
        .zip(labels)
        .zip(gaps)
        .zip(hypothesis)
        .filter(|(((_, y), _), h)| y == h)
        .fold(Rational::zero(), |acc, (((w, _), g), _)| acc + w * g)
}

/// Expected utility of a labeling under the instance distribution.
pub fn population_utility(
    instance: &TabularInstance,
    hypothesis: &[u8],
    form: UtilityForm,
) -> Result<Rational> {
    check_len(instance.len(), hypothesis.len())?;
    Ok(match form {
        UtilityForm::Full => instance
            .weights
            .iter()
            .zip(hypothesis)
            .enumerate()
            .fold(Rational::zero(), |acc, (i, (w, &h))| acc + w * instance.utility_at(i, h)),
        UtilityForm::Gap => gap_utility(&instance.weights, &instance.labels, &instance.gaps, hypothesis),
    })
}

/// Best utility in the class minus the utility of `hypothesis`.
pub fn excess_risk(
    instance: &TabularInstance,
    hypothesis: &[u8],
    class: &HypothesisClass,
) -> Result<Rational> {
    check_len(instance.len(), class.support_size())?;
    let own = population_utility(instance, hypothesis, UtilityForm::Full)?;
    let best = class
        .iter()
        .map(|h| population_utility(instance, h, UtilityForm::Full))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .max()
        .ok_or(Error::EmptyClass)?;
    Ok(best - own)
}

/// Population utilities and excess risks for every hypothesis in a class.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub utilities: Vec<Rational>,
    pub excess_risks: Vec<Rational>,
    /// Lowest index attaining the maximum utility.
    pub maximizer: usize,
}

pub fn evaluate(instance: &TabularInstance, class: &HypothesisClass) -> Result<EvaluationReport> {
    check_len(instance.len(), class.support_size())?;
    let utilities = class
        .iter()
        .map(|h| population_utility(instance, h, UtilityForm::Full))
        .collect::<Result<Vec<_>>>()?;
    let maximizer = argmax_first(&utilities).ok_or(Error::EmptyClass)?;
    let best = utilities[maximizer].clone();
    let excess_risks = utilities.iter().map(|u| &best - u).collect();
    Ok(EvaluationReport { utilities, excess_risks, maximizer })
}

/// Index of the first maximal element.
pub fn argmax_first(values: &[Rational]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, v) in values.iter().enumerate() {
        match best {
            Some(b) if values[b] >= *v => {}
            _ => best = Some(i),
        }
    }
    best
}
