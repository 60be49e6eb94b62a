//! The set of gap vectors consistent with every order-k answer, and the
//! minimax robust policy over it.
//!
//! The consistent set is kept as the list of answered canonical queries;
//! solvers work on the closed relaxation in which a strict `c . g < 0` is
//! replaced by `c . g <= -STRICT_MARGIN`.

use alloc::collections::BTreeSet;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::comptron::elicit_labels;
use crate::error::{Error, Result};
use crate::game::solve_matrix_game;
use crate::instance::{argmax_first, HypothesisClass, TabularInstance};
use crate::num::{ratio, to_f64, Rational};
use crate::oracle::{enumerate_reduced_queries_with_cap, Oracle, OracleConfig, Phase, Query, DEFAULT_ENUMERATION_CAP};
use crate::simplex::{maximize_via_dual, LinearProgram, Solution};

/// Relaxation of strict constraints, `1e-9`.
pub fn strict_margin() -> Rational {
    ratio(1, 1_000_000_000)
}

/// One answered canonical query: `c . g >= 0` when `response`, else `c . g < 0`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Constraint {
    pub coeffs: Vec<i64>,
    pub response: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsistentPolytope {
    k: usize,
    labels: Vec<u8>,
    constraints: Vec<Constraint>,
}

/// Closed linear system `rows . g <= rhs` (with `g >= 0` implicit), box included.
#[derive(Debug, Clone, PartialEq)]
pub struct PolytopeSystem {
    pub rows: Vec<Vec<Rational>>,
    pub rhs: Vec<Rational>,
}

impl PolytopeSystem {
    pub fn dimension(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    pub fn program(&self, objective: Vec<Rational>) -> LinearProgram {
        LinearProgram { objective, rows: self.rows.clone(), rhs: self.rhs.clone() }
    }

    /// `max objective . g` over the system.
    pub fn maximize(&self, objective: Vec<Rational>) -> Result<Solution> {
        maximize_via_dual(&self.program(objective))
    }

    pub fn satisfies(&self, g: &[Rational]) -> bool {
        g.iter().all(|v| !v.is_negative())
            && self.rows.iter().zip(&self.rhs).all(|(row, b)| dot(row, g) <= *b)
    }
}

fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}

fn int_dot(c: &[i64], g: &[Rational]) -> Rational {
    c.iter()
        .zip(g)
        .filter(|(c, _)| **c != 0)
        .fold(Rational::zero(), |acc, (&c, g)| acc + g * Rational::from_integer(c.into()))
}

fn primitive(c: &[i64]) -> Vec<i64> {
    let g = c.iter().fold(0i64, |acc, &v| acc.gcd(&v));
    if g <= 1 {
        c.to_vec()
    } else {
        c.iter().map(|v| v / g).collect()
    }
}

impl ConsistentPolytope {
    pub fn from_constraints(labels: Vec<u8>, k: usize, constraints: Vec<Constraint>) -> Result<Self> {
        let n = labels.len();
        if let Some(c) = constraints.iter().find(|c| c.coeffs.len() != n) {
            return Err(Error::DimensionMismatch { expected: n, found: c.coeffs.len() });
        }
        Ok(Self { k, labels, constraints })
    }

    /// Enumerates and answers every canonical reduced query on the full
    /// support, with an oracle of order `k` created for the purpose.
    pub fn from_instance(instance: &TabularInstance, k: usize) -> Result<Self> {
        let mut oracle = Oracle::new(instance, OracleConfig::noiseless(k))?;
        build_polytope(&mut oracle, DEFAULT_ENUMERATION_CAP)
    }

    pub fn dimension(&self) -> usize {
        self.labels.len()
    }

    pub fn order(&self) -> usize {
        self.k
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    /// Exact membership with strict inequalities.
    pub fn contains(&self, g: &[Rational]) -> bool {
        g.len() == self.dimension()
            && g.iter().all(|v| !v.is_negative() && *v <= Rational::one())
            && self.constraints.iter().all(|c| {
                let s = int_dot(&c.coeffs, g);
                if c.response {
                    !s.is_negative()
                } else {
                    s.is_negative()
                }
            })
    }

    /// Membership of the grid point `g = j / denominator`, in integers.
    pub fn contains_grid(&self, j: &[i64], denominator: i64) -> bool {
        j.len() == self.dimension()
            && j.iter().all(|&v| (0..=denominator).contains(&v))
            && self.constraints.iter().all(|c| {
                let s: i64 = c.coeffs.iter().zip(j).map(|(a, b)| a * b).sum();
                if c.response {
                    s >= 0
                } else {
                    s < 0
                }
            })
    }

    /// Primitive directions of the constraints, deduplicated. `c . g >= 0`
    /// constraints with `c >= 0` are dropped as implied by `g >= 0`.
    pub fn primitive_constraints(&self) -> Vec<Constraint> {
        let set: BTreeSet<Constraint> = self
            .constraints
            .iter()
            .map(|c| Constraint { coeffs: primitive(&c.coeffs), response: c.response })
            .filter(|c| !(c.response && c.coeffs.iter().all(|&v| v >= 0)))
            .collect();
        set.into_iter().collect()
    }

    /// The closed relaxation as `rows . g <= rhs`, including `g <= 1`.
    pub fn system(&self) -> PolytopeSystem {
        let n = self.dimension();
        let eps = strict_margin();
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        for c in self.primitive_constraints() {
            let as_rational = c.coeffs.iter().map(|&v| Rational::from_integer(v.into()));
            if c.response {
                rows.push(as_rational.map(|v| -v).collect());
                rhs.push(Rational::zero());
            } else {
                rows.push(as_rational.collect());
                rhs.push(-eps.clone());
            }
        }
        for i in 0..n {
            let mut row = vec![Rational::zero(); n];
            row[i] = Rational::one();
            rows.push(row);
            rhs.push(Rational::one());
        }
        PolytopeSystem { rows, rhs }
    }

    /// Vertices of the closed relaxation.
    pub fn vertices(&self) -> Result<Vec<Vec<Rational>>> {
        vertices(&self.system())
    }
}

/// Answers every canonical reduced query of the oracle's order on the full
/// support. Labels are elicited first with 1-comparisons; the enumeration
/// is charged to the robust-enumeration phase.
pub fn build_polytope(oracle: &mut Oracle<'_>, cap: u128) -> Result<ConsistentPolytope> {
    let instance = oracle.instance();
    let n = instance.len();
    if let Some(point) = instance.gaps().iter().position(|g| g.is_zero()) {
        return Err(Error::ZeroGap { point });
    }
    let k = oracle.k();
    let queries = enumerate_reduced_queries_with_cap(n, k, cap)?;
    let labels = elicit_labels(oracle, &(0..n).collect::<Vec<_>>())?;
    let mut constraints = Vec::with_capacity(queries.len());
    for coeffs in queries {
        let response = oracle.answer(&Query::from_reduced(&coeffs, &labels), Phase::RobustEnumeration)?;
        constraints.push(Constraint { coeffs, response });
    }
    ConsistentPolytope::from_constraints(labels, k, constraints)
}

/// Keeps the queries supported on `sample` (strictly increasing support
/// indices) and projects them onto those coordinates.
pub fn sample_polytope(polytope: &ConsistentPolytope, sample: &[usize]) -> Result<ConsistentPolytope> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let n = polytope.dimension();
    if sample.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidSample("sample indices must be strictly increasing".to_string()));
    }
    if let Some(&i) = sample.iter().find(|&&i| i >= n) {
        return Err(Error::PointOutOfRange { point: i, n });
    }
    let inside: Vec<bool> = (0..n).map(|i| sample.contains(&i)).collect();
    let constraints = polytope
        .constraints
        .iter()
        .filter(|c| c.coeffs.iter().zip(&inside).all(|(&v, &keep)| keep || v == 0))
        .map(|c| Constraint { coeffs: sample.iter().map(|&i| c.coeffs[i]).collect(), response: c.response })
        .collect();
    let labels = sample.iter().map(|&i| polytope.labels[i]).collect();
    ConsistentPolytope::from_constraints(labels, polytope.k, constraints)
}

/// Linear coefficients of the gap-form utility of each hypothesis:
/// `a_h[i] = w_i 1[h_i = y_i]`.
fn utility_vectors(weights: &[Rational], labels: &[u8], class: &HypothesisClass) -> Result<Vec<Vec<Rational>>> {
    let n = labels.len();
    if weights.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: weights.len() });
    }
    if class.support_size() != n {
        return Err(Error::DimensionMismatch { expected: n, found: class.support_size() });
    }
    Ok(class
        .iter()
        .map(|h| {
            weights
                .iter()
                .zip(labels)
                .zip(h)
                .map(|((w, y), f)| if f == y { w.clone() } else { Rational::zero() })
                .collect()
        })
        .collect())
}

fn utilities_at(vectors: &[Vec<Rational>], g: &[Rational]) -> Vec<Rational> {
    vectors.iter().map(|a| dot(a, g)).collect()
}

/// `max_f' U(f'; g) - U(f; g)` with `U(h; g) = sum_i w_i g_i 1[h_i = y_i]`.
pub fn payoff(
    hypothesis: &[u8],
    g: &[Rational],
    weights: &[Rational],
    labels: &[u8],
    class: &HypothesisClass,
) -> Result<Rational> {
    if hypothesis.len() != labels.len() || g.len() != labels.len() {
        return Err(Error::DimensionMismatch { expected: labels.len(), found: hypothesis.len().min(g.len()) });
    }
    let vectors = utility_vectors(weights, labels, class)?;
    let best = utilities_at(&vectors, g).into_iter().max().ok_or(Error::EmptyClass)?;
    let own = weights
        .iter()
        .zip(labels)
        .zip(hypothesis)
        .zip(g)
        .filter(|(((_, y), f), _)| y == f)
        .fold(Rational::zero(), |acc, (((w, _), _), g)| acc + w * g);
    Ok(best - own)
}

/// Lowest-index maximizer of the gap-form utility at `g`.
pub fn selector(weights: &[Rational], labels: &[u8], class: &HypothesisClass, g: &[Rational]) -> Result<usize> {
    let vectors = utility_vectors(weights, labels, class)?;
    argmax_first(&utilities_at(&vectors, g)).ok_or(Error::EmptyClass)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobustOptions {
    pub tolerance: Rational,
    pub max_iterations: usize,
}

impl Default for RobustOptions {
    fn default() -> Self {
        Self { tolerance: ratio(1, 1_000_000), max_iterations: 500 }
    }
}

/// A randomized policy over the class with its certified worst case.
#[derive(Debug, Clone, PartialEq)]
pub struct RobustPolicy {
    pub probabilities: Vec<Rational>,
    /// Value of the final restricted game; a lower bound on the minimax value.
    pub value: Rational,
    /// Worst-case expected excess risk of `probabilities` over the polytope.
    pub worst_case: Rational,
    /// Adversary columns: gap vector and its best-response hypothesis.
    pub support: Vec<(Vec<Rational>, usize)>,
    /// `worst_case - value`.
    pub convergence_gap: Rational,
    pub iterations: usize,
}

/// Double-oracle solution of `min_p max_{g in P} E_{f ~ p} [payoff(f, g)]`.
///
/// `anchor` must be a member of the polytope (normally the true gaps); it
/// and every feasible box corner seed the adversary's columns.
pub fn solve_probust(
    polytope: &ConsistentPolytope,
    weights: &[Rational],
    class: &HypothesisClass,
    anchor: &[Rational],
    options: &RobustOptions,
) -> Result<RobustPolicy> {
    if !options.tolerance.is_positive() {
        return Err(Error::InvalidSample("tolerance must be positive".to_string()));
    }
    let n = polytope.dimension();
    let vectors = utility_vectors(weights, polytope.labels(), class)?;
    if !polytope.contains(anchor) {
        return Err(Error::InfeasiblePolytope);
    }
    let system = polytope.system();

    let mut columns: Vec<(Vec<Rational>, usize)> = Vec::new();
    let add = |g: Vec<Rational>, columns: &mut Vec<(Vec<Rational>, usize)>| {
        let f = argmax_first(&utilities_at(&vectors, &g)).unwrap_or(0);
        if !columns.iter().any(|(h, b)| *b == f && *h == g) {
            columns.push((g, f));
        }
    };
    add(anchor.to_vec(), &mut columns);
    if n < 16 {
        for mask in 0u32..(1 << n) {
            let corner: Vec<Rational> = (0..n)
                .map(|i| if mask >> i & 1 == 1 { Rational::one() } else { Rational::zero() })
                .collect();
            if polytope.contains(&corner) {
                add(corner, &mut columns);
            }
        }
    }

    for iteration in 1..=options.max_iterations {
        let loss: Vec<Vec<Rational>> = vectors
            .iter()
            .map(|a| columns.iter().map(|(g, f)| dot(&vectors[*f], g) - dot(a, g)).collect())
            .collect();
        let game = solve_matrix_game(&loss)?;
        let p = game.rows;

        // E_p a_f, then the best response over the polytope for each rival f'
        let mut mixed = vec![Rational::zero(); n];
        for (pf, a) in p.iter().zip(&vectors) {
            if pf.is_zero() {
                continue;
            }
            for (m, ai) in mixed.iter_mut().zip(a) {
                *m += pf * ai;
            }
        }
        let mut best: Option<(Rational, Vec<Rational>, usize)> = None;
        for (f, a) in vectors.iter().enumerate() {
            let objective: Vec<Rational> = a.iter().zip(&mixed).map(|(x, y)| x - y).collect();
            let sol = system.maximize(objective)?;
            if best.as_ref().is_none_or(|(v, _, _)| sol.value > *v) {
                best = Some((sol.value, sol.x, f));
            }
        }
        let (worst_case, g, _) = best.ok_or(Error::EmptyClass)?;
        let gap = &worst_case - &game.value;
        if gap <= options.tolerance {
            return Ok(RobustPolicy {
                probabilities: p,
                value: game.value,
                worst_case,
                support: columns,
                convergence_gap: gap,
                iterations: iteration,
            });
        }
        let before = columns.len();
        add(g, &mut columns);
        if columns.len() == before {
            return Err(Error::NonConvergence { iterations: iteration });
        }
    }
    Err(Error::NonConvergence { iterations: options.max_iterations })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModulusMode {
    /// `sup U(f_{g1}; g1) - U(f_{(g1+g2)/2}; g1)`, before halving.
    Lower,
    /// `sup U(f_{g1}; g1) - U(f_{g2}; g1)`.
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ModulusMethod {
    /// Exact supremum from linear programs over selector regions.
    #[default]
    Exact,
    /// Polytope vertices plus the uniform grid with the given number of steps
    /// per coordinate. Pairs are enumerated for the lower mode, so this is
    /// only practical in low dimension.
    Search { grid: u32 },
}


/// Local modulus of continuity of the selector `g -> f_g` over the
/// polytope, with `f_g` the lowest-index gap-form maximizer.
pub fn local_modulus(
    polytope: &ConsistentPolytope,
    weights: &[Rational],
    class: &HypothesisClass,
    mode: ModulusMode,
    method: ModulusMethod,
) -> Result<Rational> {
    let vectors = utility_vectors(weights, polytope.labels(), class)?;
    let system = polytope.system();
    match (mode, method) {
        (ModulusMode::Upper, ModulusMethod::Exact) => upper_exact(&system, &vectors),
        (ModulusMode::Lower, ModulusMethod::Exact) => lower_exact(&system, &vectors),
        (_, ModulusMethod::Search { grid }) => search(polytope, &system, &vectors, mode, grid),
    }
}

fn diff(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Rows saying `h` is the lowest-index maximizer at the point given by
/// `embed`, which maps an n-vector of coefficients to the LP's variables.
/// Returns `(row, needs_margin)`.
fn region_rows(vectors: &[Vec<Rational>], h: usize) -> Vec<(Vec<Rational>, bool)> {
    vectors
        .iter()
        .enumerate()
        .filter(|&(f, _)| f != h)
        .map(|(f, a)| (diff(a, &vectors[h]), f < h))
        .collect()
}

fn positive_or_infeasible(result: Result<Solution>) -> Result<Option<Solution>> {
    match result {
        Ok(sol) => Ok(Some(sol)),
        Err(Error::InfeasiblePolytope) => Ok(None),
        Err(e) => Err(e),
    }
}

fn upper_exact(system: &PolytopeSystem, vectors: &[Vec<Rational>]) -> Result<Rational> {
    let n = system.dimension();
    let mut best = Rational::zero();
    for h in 0..vectors.len() {
        // reachability: maximize a margin t on the strict rows, t <= 1
        let mut lp = LinearProgram::new({
            let mut c = vec![Rational::zero(); n];
            c.push(Rational::one());
            c
        });
        for (row, b) in system.rows.iter().zip(&system.rhs) {
            let mut r = row.clone();
            r.push(Rational::zero());
            lp.push(r, b.clone());
        }
        for (mut row, margin) in region_rows(vectors, h) {
            row.push(if margin { Rational::one() } else { Rational::zero() });
            lp.push(row, Rational::zero());
        }
        let mut cap = vec![Rational::zero(); n];
        cap.push(Rational::one());
        lp.push(cap, Rational::one());
        let reachable = positive_or_infeasible(maximize_via_dual(&lp))?.is_some_and(|s| s.value.is_positive());
        if !reachable {
            continue;
        }
        for (f, a) in vectors.iter().enumerate() {
            if f == h {
                continue;
            }
            let sol = system.maximize(diff(a, &vectors[h]))?;
            if sol.value > best {
                best = sol.value;
            }
        }
    }
    Ok(best)
}

fn lower_exact(system: &PolytopeSystem, vectors: &[Vec<Rational>]) -> Result<Rational> {
    let n = system.dimension();
    let zero = || vec![Rational::zero(); 2 * n + 1];
    // variables (g1, m, t); g2 = 2m - g1
    let mut base = LinearProgram::new(zero());
    for (row, b) in system.rows.iter().zip(&system.rhs) {
        let mut r1 = zero();
        let mut r2 = zero();
        for i in 0..n {
            r1[i] = row[i].clone();
            r2[i] = -&row[i];
            r2[n + i] = &row[i] * Rational::from_integer(2.into());
        }
        base.push(r1, b.clone());
        base.push(r2, b.clone());
    }
    for i in 0..n {
        let mut r = zero();
        r[i] = Rational::one();
        r[n + i] = -Rational::from_integer(2.into());
        base.push(r, Rational::zero());
    }
    let mut t_cap = zero();
    t_cap[2 * n] = Rational::one();
    base.push(t_cap, Rational::one());

    let mut best = Rational::zero();
    for h in 0..vectors.len() {
        let mut lp = base.clone();
        for (row, margin) in region_rows(vectors, h) {
            let mut r = zero();
            r[n..2 * n].clone_from_slice(&row[..n]);
            if margin {
                r[2 * n] = Rational::one();
            }
            lp.push(r, Rational::zero());
        }
        let mut margin_obj = zero();
        margin_obj[2 * n] = Rational::one();
        lp.objective = margin_obj;
        let reachable = positive_or_infeasible(maximize_via_dual(&lp))?.is_some_and(|s| s.value.is_positive());
        if !reachable {
            continue;
        }
        for (f, a) in vectors.iter().enumerate() {
            if f == h {
                continue;
            }
            let mut obj = zero();
            for i in 0..n {
                obj[i] = &a[i] - &vectors[h][i];
            }
            lp.objective = obj;
            let sol = maximize_via_dual(&lp)?;
            if sol.value > best {
                best = sol.value;
            }
        }
    }
    Ok(best)
}

fn search(
    polytope: &ConsistentPolytope,
    system: &PolytopeSystem,
    vectors: &[Vec<Rational>],
    mode: ModulusMode,
    grid: u32,
) -> Result<Rational> {
    if grid == 0 {
        return Err(Error::InvalidSample("grid must have at least one step".to_string()));
    }
    let n = polytope.dimension();
    let mut candidates = vertices(system)?;
    let den = i64::from(grid);
    let mut j = vec![0i64; n];
    loop {
        if polytope.contains_grid(&j, den) {
            candidates.push(j.iter().map(|&v| ratio(v, den)).collect());
        }
        let mut pos = 0;
        while pos < n && j[pos] == den {
            j[pos] = 0;
            pos += 1;
        }
        if pos == n {
            break;
        }
        j[pos] += 1;
    }
    if candidates.is_empty() {
        return Err(Error::InfeasiblePolytope);
    }
    let utilities: Vec<Vec<Rational>> = candidates.iter().map(|g| utilities_at(vectors, g)).collect();
    let approx: Vec<Vec<f64>> = utilities.iter().map(|u| u.iter().map(to_f64).collect()).collect();
    let best: Vec<Rational> = utilities.iter().map(|u| u.iter().max().cloned().unwrap_or_default()).collect();

    match mode {
        ModulusMode::Upper => {
            let selectors: BTreeSet<usize> = utilities.iter().filter_map(|u| argmax_first(u)).collect();
            let mut out = Rational::zero();
            for (u, b) in utilities.iter().zip(&best) {
                for &h in &selectors {
                    let v = b - &u[h];
                    if v > out {
                        out = v;
                    }
                }
            }
            Ok(out)
        }
        ModulusMode::Lower => {
            // the midpoint's utilities are the average of the endpoints'
            let mut out = Rational::zero();
            let mut out_f = 0.0f64;
            let count = candidates.len();
            let mut sums = vec![0.0f64; vectors.len()];
            for a in 0..count {
                for b in 0..count {
                    for (s, (x, y)) in sums.iter_mut().zip(approx[a].iter().zip(&approx[b])) {
                        *s = x + y;
                    }
                    let top = sums.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    let near: Vec<usize> = (0..sums.len()).filter(|&h| sums[h] >= top - 1e-9).collect();
                    let h = if near.len() == 1 {
                        near[0]
                    } else {
                        let exact: Vec<Rational> =
                            near.iter().map(|&h| &utilities[a][h] + &utilities[b][h]).collect();
                        near[argmax_first(&exact).unwrap_or(0)]
                    };
                    let approx_value = to_f64(&best[a]) - approx[a][h];
                    if approx_value >= out_f - 1e-9 {
                        let v = &best[a] - &utilities[a][h];
                        if v > out {
                            out_f = to_f64(&v);
                            out = v;
                        }
                    }
                }
            }
            Ok(out)
        }
    }
}

/// Vertices of `{g >= 0 : rows . g <= rhs}`, exact. Redundant rows are
/// removed first, then every square subsystem of the remaining rows and the
/// nonnegativity constraints is solved.
pub fn vertices(system: &PolytopeSystem) -> Result<Vec<Vec<Rational>>> {
    let n = system.dimension();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut rows: Vec<(Vec<Rational>, Rational)> =
        system.rows.iter().cloned().zip(system.rhs.iter().cloned()).collect();
    let mut i = 0;
    while i < rows.len() {
        let (row, b) = rows[i].clone();
        let others: Vec<_> = rows.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, r)| r.clone()).collect();
        let lp = LinearProgram {
            objective: row,
            rows: others.iter().map(|(r, _)| r.clone()).collect(),
            rhs: others.iter().map(|(_, b)| b.clone()).collect(),
        };
        let redundant = match maximize_via_dual(&lp) {
            Ok(sol) => sol.value <= b,
            Err(Error::Unbounded) => false,
            Err(Error::InfeasiblePolytope) => return Err(Error::InfeasiblePolytope),
            Err(e) => return Err(e),
        };
        if redundant {
            rows.remove(i);
        } else {
            i += 1;
        }
    }
    for axis in 0..n {
        let mut r = vec![Rational::zero(); n];
        r[axis] = -Rational::one();
        rows.push((r, Rational::zero()));
    }

    let check = PolytopeSystem { rows: rows.iter().map(|r| r.0.clone()).collect(), rhs: rows.iter().map(|r| r.1.clone()).collect() };
    let mut found: BTreeSet<Vec<Rational>> = BTreeSet::new();
    let m = rows.len();
    let mut pick: Vec<usize> = (0..n).collect();
    if m < n {
        return Ok(Vec::new());
    }
    loop {
        let a: Vec<Vec<Rational>> = pick.iter().map(|&r| rows[r].0.clone()).collect();
        let b: Vec<Rational> = pick.iter().map(|&r| rows[r].1.clone()).collect();
        if let Some(x) = solve_square(a, b) {
            if check.satisfies(&x) {
                found.insert(x);
            }
        }
        // next n-subset in lexicographic order
        let mut pos = n;
        while pos > 0 && pick[pos - 1] == m - n + pos - 1 {
            pos -= 1;
        }
        if pos == 0 {
            break;
        }
        pick[pos - 1] += 1;
        for q in pos..n {
            pick[q] = pick[q - 1] + 1;
        }
    }
    Ok(found.into_iter().collect())
}

/// Gaussian elimination; `None` when singular.
fn solve_square(mut a: Vec<Vec<Rational>>, mut b: Vec<Rational>) -> Option<Vec<Rational>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        b.swap(col, pivot);
        let p = a[col][col].clone();
        for j in col..n {
            a[col][j] = &a[col][j] / &p;
        }
        b[col] = &b[col] / &p;
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for j in col..n {
                let v = &f * &a[col][j];
                a[r][j] -= v;
            }
            let v = &f * &b[col];
            b[r] -= v;
        }
    }
    Some(b)
}
