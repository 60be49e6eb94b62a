#![allow(dead_code)]

use kcomp_core::instance::{HypothesisClass, Point, TabularInstance};
use kcomp_core::num::{exact, Rational};
use proptest::prelude::*;

/// Table rows `[u0, u1]` with the given gaps, labels and losing-side utility
/// fractions in `[0, 1]`.
pub fn table(gaps: &[f64], labels: &[bool], base: &[f64]) -> Vec<[f64; 2]> {
    gaps.iter()
        .zip(labels)
        .zip(base)
        .map(|((&g, &y), &b)| {
            let low = b * (1.0 - g);
            if y {
                [low, low + g]
            } else {
                [low + g, low]
            }
        })
        .collect()
}

pub fn normalized(raw: &[f64]) -> Vec<f64> {
    let total: f64 = raw.iter().sum();
    let mut w: Vec<f64> = raw.iter().map(|r| r / total).collect();
    // push the rounding residue into the largest entry
    let residue = 1.0 - w.iter().sum::<f64>();
    let big = (0..w.len()).max_by(|&a, &b| w[a].total_cmp(&w[b])).unwrap();
    w[big] += residue;
    w
}

/// Random instance with `n` points, gaps in `(0, 1]`.
pub fn instance(n: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = TabularInstance> {
    n.prop_flat_map(|n| {
        (
            prop::collection::vec(0.0f64..1.0, n),
            prop::collection::vec(any::<bool>(), n),
            prop::collection::vec(0.0f64..=1.0, n),
            prop::collection::vec(0.05f64..1.0, n),
        )
    })
    .prop_map(|(g, labels, base, raw_w)| {
        let gaps: Vec<f64> = g.iter().map(|v| 1.0 - v).collect();
        let n = gaps.len();
        TabularInstance::from_f64(Point::anonymous(n), &normalized(&raw_w), &table(&gaps, &labels, &base))
            .expect("valid instance")
    })
}

pub fn power_of_two_order() -> impl Strategy<Value = usize> {
    prop::sample::select(vec![2usize, 4, 8, 16, 32])
}

/// Nonempty class of distinct labelings drawn from all dichotomies.
pub fn class_for(n: usize, picks: &[u32]) -> HypothesisClass {
    let total = 1u32 << n;
    let labelings = picks.iter().map(|p| (0..n).map(|i| ((p % total) >> i & 1) as u8).collect::<Vec<u8>>());
    HypothesisClass::new(n, labelings).expect("nonempty class")
}

pub fn q(v: f64) -> Rational {
    exact(v).unwrap()
}
