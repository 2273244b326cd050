//! Success probabilities in closed form and by simulation, recycling,
//! parameter sweeps and the signature-table verification report.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;

use crate::circuits::{self, CircuitPlan, DetectorMap, Protocol, ProtocolSpec};
use crate::detection::{self, tables, ClickPattern, DetectionError, Label, FIDELITY_TOLERANCE};

/// Success probability `2 alpha^2 (1 - alpha^2)` for real `alpha` in `[0, 1]`.
pub fn p_success(alpha: f64) -> f64 {
    let a2 = alpha * alpha;
    2.0 * a2 * (1.0 - a2)
}

/// Probability `alpha^4 + beta^4` of the recyclable outcome.
pub fn p_recyclable(alpha: f64) -> f64 {
    let a2 = alpha * alpha;
    let b2 = 1.0 - a2;
    a2 * a2 + b2 * b2
}

/// `alpha' = alpha^2 / sqrt(alpha^4 + beta^4)`, the parameter of the
/// recycled state.
pub fn recycled_alpha(alpha: f64) -> f64 {
    alpha * alpha / p_recyclable(alpha).sqrt()
}

/// Extra success probability from one recycling round:
/// `(alpha^4 + beta^4) * 2|alpha' beta'|^2 = 2|alpha beta|^4 / (alpha^4 + beta^4)`.
pub fn recycling_gain(alpha: f64) -> f64 {
    let a2 = alpha * alpha;
    let ab2 = a2 * (1.0 - a2);
    2.0 * ab2 * ab2 / p_recyclable(alpha)
}

/// Total success probability after `rounds` recycling rounds.
///
/// Round zero is the bare protocol. Each further round feeds the recyclable
/// output, with parameter [`recycled_alpha`], back into the protocol:
/// `T_k(alpha) = p(alpha) + (alpha^4 + beta^4) T_{k-1}(alpha')`. For one round
/// this is `p(alpha) + recycling_gain(alpha)`; more rounds are an extension
/// beyond the single recycling round the scheme describes.
pub fn total_probability(alpha: f64, rounds: u32) -> f64 {
    let mut total = 0.0;
    let mut weight = 1.0;
    let mut a = alpha;
    for round in 0..=rounds {
        total += weight * p_success(a);
        if round < rounds {
            weight *= p_recyclable(a);
            a = recycled_alpha(a);
        }
    }
    total
}

/// `n` uniform points strictly inside `(0, 1)`: `i / (n + 1)` for `i = 1..=n`.
pub fn uniform_grid(n: usize) -> Vec<f64> {
    (1..=n).map(|i| i as f64 / (n + 1) as f64).collect()
}

/// Simulated success and recyclable masses for one spec.
pub fn simulate_masses(spec: &ProtocolSpec) -> Result<(f64, f64), DetectionError> {
    let outcomes = detection::herald(spec)?;
    Ok((
        detection::success_mass(&outcomes),
        detection::recyclable_mass(&outcomes),
    ))
}

/// Total success probability obtained by actually running
/// `spec.recycle_rounds` recycling rounds through the simulator.
pub fn simulate_total_probability(spec: &ProtocolSpec) -> Result<f64, DetectionError> {
    Ok(simulate_rounds(spec)?.2)
}

/// First-round success and recyclable masses plus the total after all rounds.
fn simulate_rounds(spec: &ProtocolSpec) -> Result<(f64, f64, f64), DetectionError> {
    let mut first = None;
    let mut total = 0.0;
    let mut weight = 1.0;
    let mut current = *spec;
    for round in 0..=spec.recycle_rounds {
        let outcomes = detection::herald(&current)?;
        let success = detection::success_mass(&outcomes);
        let recyclable = detection::recyclable_mass(&outcomes);
        first.get_or_insert((success, recyclable));
        total += weight * success;
        if round == spec.recycle_rounds || recyclable == 0.0 {
            break;
        }
        weight *= recyclable;
        let residual = &outcomes
            .iter()
            .find(|o| o.label == Label::RecyclablePlus)
            .expect("herald reports every label")
            .residual;
        current = circuits::recyclable_to_input(residual, &current)?;
    }
    let (success, recyclable) = first.expect("at least one round runs");
    Ok((success, recyclable, total))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub alpha: f64,
    pub p_success: f64,
    pub p_recyclable: f64,
    pub p_total: f64,
    pub rounds: u32,
}

/// Simulates `protocol` on each grid point. Rows come back in grid order
/// whatever the thread schedule.
pub fn sweep(protocol: Protocol, grid: &[f64], rounds: u32) -> Result<Vec<SweepRow>, DetectionError> {
    grid.par_iter()
        .map(|&alpha| {
            let spec = ProtocolSpec::from_alpha(protocol, alpha)?.with_rounds(rounds);
            let (p_success, p_recyclable, p_total) = simulate_rounds(&spec)?;
            Ok(SweepRow {
                alpha,
                p_success,
                p_recyclable,
                p_total,
                rounds,
            })
        })
        .collect()
}

/// One line of a verification report.
#[derive(Debug, Clone, PartialEq)]
pub struct RowReport {
    pub pattern: String,
    /// Label from the reference table, if the protocol has one.
    pub expected: Option<Label>,
    pub passed: bool,
    pub min_fidelity: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub protocol: Protocol,
    pub alphas: Vec<f64>,
    pub rows: Vec<RowReport>,
}

impl VerificationReport {
    pub fn passed(&self) -> usize {
        self.rows.iter().filter(|r| r.passed).count()
    }

    pub fn all_passed(&self) -> bool {
        self.passed() == self.rows.len()
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} protocol, {} alpha values", self.protocol, self.alphas.len())?;
        for r in &self.rows {
            let expected = r.expected.map(|l| l.to_string()).unwrap_or_else(|| "-".into());
            writeln!(
                f,
                "  {} {:<18} {:<12} min fidelity {:.12}{}",
                if r.passed { "ok  " } else { "FAIL" },
                r.pattern,
                expected,
                r.min_fidelity,
                if r.detail.is_empty() {
                    String::new()
                } else {
                    format!("  ({})", r.detail)
                }
            )?;
        }
        write!(f, "  {}/{} rows pass", self.passed(), self.rows.len())
    }
}

#[derive(Default)]
struct RowAccumulator {
    seen: usize,
    min_fidelity: Option<f64>,
    problems: Vec<String>,
}

/// Checks every detection signature of `protocol` across `alphas`.
///
/// With a reference table (Bell, three-party GHZ) each row passes when, at
/// every alpha, its pattern occurs, the general rule agrees with the table,
/// and the post-feed-forward residual matches the row's target state to
/// within [`FIDELITY_TOLERANCE`]. Patterns missing from the table become
/// failing rows. Without a table, the rows are the observed patterns and
/// the rule's labels are checked against the residuals the same way.
pub fn verify_tables(protocol: Protocol, alphas: &[f64]) -> Result<VerificationReport, DetectionError> {
    verify_with_detectors(protocol, alphas, None)
}

/// [`verify_tables`] with the detector assignment replaced by `detectors`.
pub fn verify_with_detectors(
    protocol: Protocol,
    alphas: &[f64],
    detectors: Option<DetectorMap>,
) -> Result<VerificationReport, DetectionError> {
    let golden = tables::golden_table(protocol);
    let mut rows: BTreeMap<ClickPattern, RowAccumulator> = BTreeMap::new();
    let mut expected: BTreeMap<ClickPattern, Label> = BTreeMap::new();
    if let Some(table) = golden {
        for r in table {
            rows.insert(r.clicks(), RowAccumulator::default());
            expected.insert(r.clicks(), r.label);
        }
    }

    for &alpha in alphas {
        let spec = ProtocolSpec::from_alpha(protocol, alpha)?;
        let mut plan: CircuitPlan = circuits::build_plan(&spec);
        if let Some(map) = &detectors {
            plan = plan.with_detectors(map.clone())?;
        }
        let state = circuits::run_plan(&spec, &plan)?;
        let success = spec.success_target();
        let recyclable = spec.recyclable_target();
        for outcome in detection::enumerate_outcomes(&state, &plan) {
            let pattern = outcome.event.clicks.clone();
            let acc = rows.entry(pattern.clone()).or_default();
            acc.seen += 1;
            if golden.is_some() && !expected.contains_key(&pattern) {
                acc.problems.push(format!("unlisted pattern at alpha={alpha}"));
                continue;
            }
            let label = match detection::classify(&pattern, protocol) {
                Ok((label, _)) => label,
                Err(e) => {
                    acc.problems.push(e.to_string());
                    continue;
                }
            };
            match detection::classify_by_rule(&pattern, protocol.parties()) {
                Ok((rule, _)) if rule == label => {}
                Ok((rule, _)) => acc.problems.push(format!("rule gives {rule}")),
                Err(e) => acc.problems.push(e.to_string()),
            }
            let residual = detection::apply_feedforward(&outcome.residual, label.feedforward())?;
            let target = if label.is_success() { &success } else { &recyclable };
            let fidelity = residual.fidelity(target);
            acc.min_fidelity = Some(acc.min_fidelity.map_or(fidelity, |m: f64| m.min(fidelity)));
            if fidelity < 1.0 - FIDELITY_TOLERANCE {
                acc.problems.push(format!("fidelity {fidelity:.6} at alpha={alpha}"));
            }
        }
    }

    let report_rows = rows
        .into_iter()
        .map(|(pattern, mut acc)| {
            if acc.seen < alphas.len() {
                acc.problems
                    .push(format!("observed at {}/{} alpha values", acc.seen, alphas.len()));
            }
            acc.problems.dedup();
            RowReport {
                expected: expected.get(&pattern).copied(),
                pattern: pattern.to_string(),
                passed: acc.problems.is_empty(),
                min_fidelity: acc.min_fidelity.unwrap_or(0.0),
                detail: acc.problems.join("; "),
            }
        })
        .collect();

    Ok(VerificationReport {
        protocol,
        alphas: alphas.to_vec(),
        rows: report_rows,
    })
}
