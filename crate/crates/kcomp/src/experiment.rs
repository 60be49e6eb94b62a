//! Named experiments. Each run is computed in memory and returned as a
//! [`RunOutput`]; [`crate::output`] writes it to disk.

use std::path::Path;
use std::time::Instant;

use kcomp_core::adversary::{indistinguishable, prop2_instance, theorem2_instance, Prop2Instance};
use kcomp_core::comptron::{comptron, comptron_with_policy, rob_comptron, GapEstimate};
use kcomp_core::instance::{excess_risk, HypothesisClass, TabularInstance};
use kcomp_core::learner::{bound_report, plugin, BoundReport, Provenance, Sample};
use kcomp_core::num::{abs, int, ratio, to_f64};
use kcomp_core::oracle::{Oracle, OracleConfig, QueryLedger, TranscriptRecord};
use kcomp_core::robust::{build_polytope, local_modulus, solve_probust, ModulusMethod, ModulusMode, RobustOptions};
use kcomp_core::{Error, Rational};
use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ExperimentConfig, ExperimentKind, Generator, ModulusSetting, RobustSection};
use crate::format::{transcript_jsonl, InstanceFile};
use crate::generate::generate;
use crate::seed::derive;
use crate::{default_class, CliError};

/// One row of the sweep CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub k: usize,
    pub trial: usize,
    pub excess_risk: Rational,
    /// `max_i |c_i * u_max - g_i|` over the sample.
    pub est_error: Rational,
    /// `2 u_max / k`; not written to the CSV.
    pub error_bound: Rational,
    pub queries: u64,
    pub wall_ms: u64,
}

/// A file produced by a run, relative to the output directory.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub contents: Vec<u8>,
}

#[derive(Debug, Clone, Default)]
pub struct RunOutput {
    pub records: Vec<SweepRecord>,
    pub ledger: QueryLedger,
    pub warnings: Vec<String>,
    pub artifacts: Vec<Artifact>,
    /// Human-readable lines for the terminal.
    pub summary: Vec<String>,
}

pub fn run(config: &ExperimentConfig) -> Result<RunOutput, CliError> {
    config.validate()?;
    let source = InstanceProvider::new(config)?;
    match config.experiment {
        ExperimentKind::SweepK => comptron_runs(config, &source, false, false),
        ExperimentKind::ComptronRun => comptron_runs(config, &source, true, false),
        ExperimentKind::BoundAudit => comptron_runs(config, &source, false, true),
        ExperimentKind::Lowerbound => lowerbound(config),
        ExperimentKind::Prop2 => three_point(config),
        ExperimentKind::Robust => robust_runs(config, &source),
    }
}

struct InstanceProvider {
    file: Option<TabularInstance>,
    generator: Generator,
    n: usize,
    seed: u64,
}

impl InstanceProvider {
    fn new(config: &ExperimentConfig) -> Result<Self, CliError> {
        let file = match &config.instance.path {
            Some(path) => Some(load_instance(path)?),
            None => None,
        };
        Ok(Self {
            file,
            generator: config.instance.generator.unwrap_or(Generator::Random),
            n: config.instance.n,
            seed: config.seed,
        })
    }

    fn get(&self, k: usize, trial: usize) -> Result<TabularInstance, CliError> {
        match &self.file {
            Some(inst) => Ok(inst.clone()),
            None => generate(self.generator, self.n, k, derive(self.seed, trial as u64, "instance")),
        }
    }
}

/// Reads an instance file; malformed contents are configuration errors.
pub fn load_instance(path: &Path) -> Result<TabularInstance, CliError> {
    InstanceFile::read(path)?
        .to_instance()
        .map_err(|e| CliError::Config(format!("instance {}: {e}", path.display())))
}

fn jobs(config: &ExperimentConfig) -> Vec<(usize, usize)> {
    config.k.iter().flat_map(|&k| (0..config.trials).map(move |t| (k, t))).collect()
}

fn oracle_seed(config: &ExperimentConfig, k: usize, trial: usize) -> u64 {
    derive(config.seed, trial as u64, &format!("oracle-k{k}"))
}

/// Outcome of one Comptron trial.
#[derive(Debug, Clone)]
pub struct ComptronTrial {
    pub record: SweepRecord,
    pub estimate: GapEstimate,
    pub ledger: QueryLedger,
    pub transcript: Option<Vec<TranscriptRecord>>,
    pub bounds: Option<BoundReport>,
}

/// Comptron (or Rob-Comptron when `eta > 0`) on `sample`, followed by the
/// plug-in learner.
#[allow(clippy::too_many_arguments)]
pub fn comptron_trial(
    instance: &TabularInstance,
    class: &HypothesisClass,
    sample: &Sample,
    k: usize,
    eta: f64,
    delta: f64,
    seed: u64,
    keep_transcript: bool,
    audit: bool,
) -> Result<ComptronTrial, CliError> {
    let mut oracle = Oracle::new(instance, OracleConfig::noisy(k, eta, seed))?;
    if keep_transcript {
        oracle = oracle.with_transcript();
    }
    let estimate = if eta > 0.0 {
        rob_comptron(&mut oracle, &sample.indices, eta, delta)?
    } else {
        comptron(&mut oracle, &sample.indices)?
    };
    let provenance = if eta > 0.0 { Provenance::RobComptron } else { Provenance::Comptron };
    let chosen = plugin(sample, &estimate.labels, estimate.coeffs(), class, provenance)?.chosen;
    let risk = excess_risk(instance, class.get(chosen), class)?;
    let true_gaps: Vec<&Rational> = sample.indices.iter().map(|&i| &instance.gaps()[i]).collect();
    let u_max = true_gaps.iter().copied().max().cloned().unwrap_or_else(|| int(0));
    let est_error = estimate
        .scaled(&u_max)
        .iter()
        .zip(&true_gaps)
        .map(|(e, g)| abs(&(e - *g)))
        .max()
        .unwrap_or_else(|| int(0));
    let bounds = if audit { Some(bound_report(instance, sample, &estimate, class)?) } else { None };
    let ledger = oracle.ledger().clone();
    let transcript = oracle.take_transcript();
    let record = SweepRecord {
        k,
        trial: 0,
        excess_risk: risk,
        est_error,
        error_bound: &u_max * ratio(2, k as i64),
        queries: ledger.total(),
        wall_ms: 0,
    };
    Ok(ComptronTrial { record, estimate, ledger, transcript, bounds })
}

fn draw_sample(instance: &TabularInstance, seed: u64) -> Result<Sample, CliError> {
    let weights: Vec<f64> = instance.weights().iter().map(to_f64).collect();
    let dist = WeightedIndex::new(&weights).map_err(|e| CliError::Config(format!("instance weights: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let indices: Vec<usize> = (0..instance.len()).map(|_| dist.sample(&mut rng)).collect();
    Ok(Sample::uniform(indices)?)
}

fn comptron_runs(
    config: &ExperimentConfig,
    source: &InstanceProvider,
    keep_transcript: bool,
    audit: bool,
) -> Result<RunOutput, CliError> {
    let results: Vec<Result<ComptronTrial, CliError>> = jobs(config)
        .into_par_iter()
        .map(|(k, trial)| {
            let start = Instant::now();
            let instance = source.get(k, trial)?;
            let class = default_class(&instance)?;
            let sample = if audit {
                draw_sample(&instance, derive(config.seed, trial as u64, "sample"))?
            } else {
                Sample::population(&instance)
            };
            let seed = oracle_seed(config, k, trial);
            let mut out =
                comptron_trial(&instance, &class, &sample, k, config.eta, config.delta, seed, keep_transcript, audit)?;
            out.record.trial = trial;
            if config.timing {
                out.record.wall_ms = start.elapsed().as_millis() as u64;
            }
            Ok(out)
        })
        .collect();
    let mut trials = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    trials.sort_by_key(|t| (t.record.k, t.record.trial));

    let mut output = RunOutput::default();
    let mut audit_rows = Vec::new();
    for t in &trials {
        output.ledger.merge(&t.ledger);
        if t.record.est_error > t.record.error_bound {
            output.warnings.push(format!(
                "k={} trial={}: estimation error {} exceeds 2 u_max / k = {}",
                t.record.k, t.record.trial, t.record.est_error, t.record.error_bound
            ));
        }
        if let Some(records) = &t.transcript {
            let path = format!("transcript_k{}_t{}.jsonl", t.record.k, t.record.trial);
            output.artifacts.push(Artifact { name: path, contents: transcript_jsonl(records) });
        }
        if let Some(b) = &t.bounds {
            if !b.holds() {
                output.warnings.push(format!("k={} trial={}: bound violated", t.record.k, t.record.trial));
            }
            audit_rows.push(AuditRow::new(&t.record, b));
        }
        output.records.push(t.record.clone());
    }
    if audit {
        output.artifacts.push(Artifact { name: "bounds.csv".into(), contents: audit_csv(&audit_rows)? });
        let violations = audit_rows.iter().filter(|r| !r.holds).count();
        output.summary.push(format!("bound audit: {} tuples, {violations} violations", audit_rows.len()));
    }
    for (k, mean) in mean_errors(&output.records) {
        output.summary.push(format!("k={k}: mean estimation error {mean:.6}"));
    }
    Ok(output)
}

fn mean_errors(records: &[SweepRecord]) -> Vec<(usize, f64)> {
    let pairs: Vec<(usize, f64)> = records.iter().map(|r| (r.k, to_f64(&r.est_error))).collect();
    kcomp_core::rate::mean_by_order(&pairs)
}

#[derive(Debug, Serialize)]
struct AuditRow {
    k: usize,
    trial: usize,
    excess_risk: f64,
    risk_bound: f64,
    mismatch_bound: f64,
    mismatch_bound_signed: f64,
    order_bound: Option<f64>,
    holds: bool,
}

impl AuditRow {
    fn new(record: &SweepRecord, b: &BoundReport) -> Self {
        Self {
            k: record.k,
            trial: record.trial,
            excess_risk: to_f64(&b.excess_risk),
            risk_bound: to_f64(&b.risk_bound),
            mismatch_bound: to_f64(&b.mismatch_bound),
            mismatch_bound_signed: to_f64(&b.mismatch_bound_signed),
            order_bound: b.order_bound.as_ref().map(to_f64),
            holds: b.holds(),
        }
    }
}

fn audit_csv(rows: &[AuditRow]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| CliError::Io(e.to_string()))?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.to_string()))
}

/// Risk table of the two-utility construction for each order.
fn lowerbound(config: &ExperimentConfig) -> Result<RunOutput, CliError> {
    let mut output = RunOutput::default();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["k", "hypothesis", "utility", "excess_risk"]).map_err(|e| CliError::Io(e.to_string()))?;
    for &k in &config.k {
        let pair = theorem2_instance(k)?;
        let check = indistinguishable(&pair.first, &pair.second, k)?;
        let computed = pair.computed_risks()?;
        if computed != pair.analytic_risks {
            output.warnings.push(format!("k={k}: computed risks differ from the analytic table"));
        }
        for (h, risks) in computed.iter().enumerate() {
            for (u, r) in risks.iter().enumerate() {
                w.write_record([k.to_string(), h.to_string(), (u + 1).to_string(), r.to_string()])
                    .map_err(|e| CliError::Io(e.to_string()))?;
            }
        }
        let worst: Vec<String> = computed.iter().map(|r| r.iter().max().expect("two utilities").to_string()).collect();
        output.summary.push(format!("k={k}: risks {} indistinguishable: {}", worst.join(" and "), check.indistinguishable));
    }
    let contents = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    output.artifacts.push(Artifact { name: "lowerbound.csv".into(), contents });
    Ok(output)
}

fn hypothesis_name(index: usize) -> &'static str {
    match index {
        Prop2Instance::F_PLUS => "f_{+1}",
        Prop2Instance::F_MINUS => "f_{-1}",
        _ => "other",
    }
}

/// Plug-in Comptron, the alternate schedule and the robust policy on the
/// three-point construction.
fn three_point(config: &ExperimentConfig) -> Result<RunOutput, CliError> {
    let mut output = RunOutput::default();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["k", "estimator", "choice", "excess_risk"]).map_err(|e| CliError::Io(e.to_string()))?;
    for &k in &config.k {
        let p2 = prop2_instance(k)?;
        let inst = &p2.instance;
        let class = &p2.class;
        let sample = Sample::population(inst);
        let mut oracle = Oracle::new(inst, OracleConfig::noiseless(k))?;
        let est = comptron(&mut oracle, &sample.indices)?;
        let plug = plugin(&sample, &est.labels, est.coeffs(), class, Provenance::Comptron)?.chosen;
        let alt = comptron_with_policy(&mut oracle, &sample.indices, &p2.alternate)?;
        let alt_choice = plugin(&sample, &alt.labels, alt.coeffs(), class, Provenance::Comptron)?.chosen;
        let optimal = kcomp_core::learner::erm(&sample, inst.labels(), inst.gaps(), class)?;
        let polytope = build_polytope(&mut oracle, u128::from(config.robust.query_cap))?;
        let policy = solve_probust(&polytope, inst.weights(), class, inst.gaps(), &robust_options(&config.robust)?)?;
        output.ledger.merge(oracle.ledger());

        let plug_risk = excess_risk(inst, class.get(plug), class)?;
        let alt_risk = excess_risk(inst, class.get(alt_choice), class)?;
        let robust_risk = policy
            .probabilities
            .iter()
            .enumerate()
            .map(|(h, p)| Ok(p * excess_risk(inst, class.get(h), class)?))
            .sum::<Result<Rational, Error>>()?;
        let robust_choice = policy
            .probabilities
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
            .map(|(h, _)| h)
            .unwrap_or(0);
        for (name, choice, risk) in [
            ("plugin", plug, &plug_risk),
            ("alternate", alt_choice, &alt_risk),
            ("robust", robust_choice, &robust_risk),
        ] {
            w.write_record([k.to_string(), name.to_string(), hypothesis_name(choice).to_string(), risk.to_string()])
                .map_err(|e| CliError::Io(e.to_string()))?;
        }
        output.summary.push(format!(
            "k={k}: plug-in choice {}, optimal {}, plug-in risk {:.5} ({}), robust risk {} (worst case {})",
            hypothesis_name(plug),
            hypothesis_name(optimal),
            to_f64(&plug_risk),
            plug_risk,
            robust_risk,
            policy.worst_case,
        ));
    }
    let contents = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    output.artifacts.push(Artifact { name: "prop2.csv".into(), contents });
    Ok(output)
}

fn robust_options(section: &RobustSection) -> Result<RobustOptions, CliError> {
    let tolerance = kcomp_core::num::exact(section.tolerance)
        .ok_or_else(|| CliError::Config(format!("robust.tolerance = {} is not finite", section.tolerance)))?;
    Ok(RobustOptions { tolerance, max_iterations: section.max_iterations })
}

fn modulus_method(section: &RobustSection) -> ModulusMethod {
    match section.modulus {
        ModulusSetting::Exact => ModulusMethod::Exact,
        ModulusSetting::Search => ModulusMethod::Search { grid: section.grid },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RobustExact {
    pub game_value: String,
    pub worst_case: String,
    pub policy: Vec<String>,
    pub lower_modulus: String,
    pub upper_modulus: String,
}

/// Result of the robust estimator on one instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RobustReport {
    pub game_value: f64,
    pub policy: Vec<f64>,
    pub lower_modulus: f64,
    pub upper_modulus: f64,
    pub queries_used: u64,
    pub worst_case: f64,
    pub iterations: usize,
    pub exact: RobustExact,
}

/// Builds the consistent polytope from a noiseless order-`k` oracle, solves
/// the game and computes both local moduli. The true gaps seed the
/// adversary's columns.
pub fn robust_report(
    instance: &TabularInstance,
    class: &HypothesisClass,
    k: usize,
    section: &RobustSection,
) -> Result<(RobustReport, QueryLedger), CliError> {
    let mut oracle = Oracle::new(instance, OracleConfig::noiseless(k))?;
    let polytope = build_polytope(&mut oracle, u128::from(section.query_cap))?;
    let weights = instance.weights();
    let policy = solve_probust(&polytope, weights, class, instance.gaps(), &robust_options(section)?)?;
    let method = modulus_method(section);
    let lower = local_modulus(&polytope, weights, class, ModulusMode::Lower, method)?;
    let upper = local_modulus(&polytope, weights, class, ModulusMode::Upper, method)?;
    let report = RobustReport {
        game_value: to_f64(&policy.value),
        policy: policy.probabilities.iter().map(to_f64).collect(),
        lower_modulus: to_f64(&lower),
        upper_modulus: to_f64(&upper),
        queries_used: oracle.ledger().total(),
        worst_case: to_f64(&policy.worst_case),
        iterations: policy.iterations,
        exact: RobustExact {
            game_value: policy.value.to_string(),
            worst_case: policy.worst_case.to_string(),
            policy: policy.probabilities.iter().map(|p| p.to_string()).collect(),
            lower_modulus: lower.to_string(),
            upper_modulus: upper.to_string(),
        },
    };
    Ok((report, oracle.ledger().clone()))
}

fn robust_runs(config: &ExperimentConfig, source: &InstanceProvider) -> Result<RunOutput, CliError> {
    let results: Vec<Result<(usize, usize, RobustReport, QueryLedger), CliError>> = jobs(config)
        .into_par_iter()
        .map(|(k, trial)| {
            let instance = source.get(k, trial)?;
            let class = default_class(&instance)?;
            let (report, ledger) = robust_report(&instance, &class, k, &config.robust)?;
            Ok((k, trial, report, ledger))
        })
        .collect();
    let mut runs = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    runs.sort_by_key(|r| (r.0, r.1));
    let mut output = RunOutput::default();
    for (k, trial, report, ledger) in runs {
        output.ledger.merge(&ledger);
        if report.lower_modulus / 2.0 > report.game_value + 1e-4 || report.worst_case > report.upper_modulus + 1e-4 {
            output.warnings.push(format!("k={k} trial={trial}: modulus sandwich violated"));
        }
        output.summary.push(format!(
            "k={k} trial={trial}: game value {:.6}, moduli [{:.6}, {:.6}], {} queries",
            report.game_value, report.lower_modulus, report.upper_modulus, report.queries_used
        ));
        let mut contents = serde_json::to_vec_pretty(&report).expect("report serializes");
        contents.push(b'\n');
        output.artifacts.push(Artifact { name: format!("robust_k{k}_t{trial}.json"), contents });
    }
    Ok(output)
}
