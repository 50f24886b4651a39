//! The scenario pipeline: checks, simulation, certificates, output.

use std::path::PathBuf;
use std::time::Instant;

use super::config::{
    CertificateSpec, CheckSpec, CutScopeKind, Expect, ProbeKind, Scenario, StartRule, StartTime,
};
use super::csv_io::emit_trajectory_csv;
use super::report::{Outcome, PersistenceSummary, RunReport};
use super::ScenarioError;
use crate::analysis::{
    agreement_schedule, component_extremes, continuous_floor_certificate, continuous_rate_bound,
    discrete_rate_bound, hull_drift, sample_at_or_before, sigma_star_certificate,
    verify_contraction, verify_convexity_bounds, verify_exponential_bound, verify_influence_bound,
    window_violation_threshold, FloorKind, FloorStart, RateCertificate, StateSeries,
    CONTINUOUS_TOLERANCE,
};
use crate::dynamics::{integrate_with, simulate, BeliefVector, ContinuousTrajectory, Trajectory};
use crate::graph::NodeId;
use crate::weights::{
    check_arc_balance, check_cut_balance, check_self_confidence, check_stochasticity,
    check_window_bound, persistent_graph, theta_profile, BalanceProbe, CheckReport, CutScope,
    PersistenceReport, SubsetSelection, ThetaProfile, TimeMode, TimeVaryingNetwork, Verdict,
    Window,
};

/// Samples used by the assumption checks.
pub const CHECK_SAMPLES: usize = 1001;
/// Slack on the spread floors.
pub const FLOOR_TOLERANCE: f64 = 1e-9;
/// Slack on hull monotonicity in discrete mode.
pub const DISCRETE_HULL_TOLERANCE: f64 = 1e-14;
/// Slack on hull monotonicity in continuous mode.
pub const CONTINUOUS_HULL_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Where the CSV goes; nothing is written when unset.
    pub out_dir: Option<PathBuf>,
    /// Overrides the scenario's CSV stride.
    pub stride: Option<u64>,
    /// Overrides the scenario seed.
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Simulated {
    Discrete(Trajectory),
    Continuous(ContinuousTrajectory),
}

impl Simulated {
    pub fn series(&self) -> &dyn StateSeries {
        match self {
            Simulated::Discrete(t) => t,
            Simulated::Continuous(t) => t,
        }
    }
}

/// Report plus the trajectory it was computed from.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: RunReport,
    pub trajectory: Option<Simulated>,
}

struct Context {
    net: TimeVaryingNetwork,
    persistence: PersistenceReport,
    theta: ThetaProfile,
    start: f64,
    end: f64,
}

fn prepare(s: &Scenario) -> Result<Context, ScenarioError> {
    s.validate()?;
    let net = s.network()?;
    let persistence = persistent_graph(&net)?;
    let theta = theta_profile(&net, &persistence);
    let start = match s.start {
        StartTime::At(t) => t,
        StartTime::Rule(StartRule::Certified) => match s.mode {
            TimeMode::Discrete => sigma_star_certificate(&theta, 0)?.required_t0,
            TimeMode::Continuous => {
                continuous_floor_certificate(&theta, FloorStart::OneThird { not_before: 0.0 })?
                    .required_t0
            }
        },
    };
    Ok(Context {
        net,
        persistence,
        theta,
        start,
        end: start + s.horizon,
    })
}

fn summary(p: &PersistenceReport) -> PersistenceSummary {
    let g = &p.persistent_graph;
    PersistenceSummary {
        persistent_arcs: p.persistent_arcs.iter().copied().collect(),
        vanishing_arcs: p.vanishing_arcs.iter().copied().collect(),
        quasi_strongly_connected: g.is_quasi_strongly_connected(),
        centers: g.centers().into_iter().collect(),
        diameter: g.diameter(),
    }
}

/// Times at which the assumption checks sample the weights.
///
/// Discrete: every step if there are few enough, otherwise evenly spaced
/// steps. Continuous: a uniform grid, plus a geometric one when the
/// interval spans several orders of magnitude.
pub fn check_times(mode: TimeMode, start: f64, end: f64) -> Vec<f64> {
    let mut times: Vec<f64> = match mode {
        TimeMode::Discrete => {
            let steps = (end - start) as u64;
            if steps < CHECK_SAMPLES as u64 {
                (0..=steps).map(|k| start + k as f64).collect()
            } else {
                (0..CHECK_SAMPLES)
                    .map(|k| start + ((k as u64 * steps) / (CHECK_SAMPLES as u64 - 1)) as f64)
                    .collect()
            }
        }
        TimeMode::Continuous => {
            let mut t: Vec<f64> = (0..CHECK_SAMPLES)
                .map(|k| start + (end - start) * k as f64 / (CHECK_SAMPLES - 1) as f64)
                .collect();
            let lo = start.max(1.0);
            if end > 1e3 * lo {
                let ratio = (end / lo).ln();
                t.extend((0..CHECK_SAMPLES).map(|k| {
                    (lo.ln() + ratio * k as f64 / (CHECK_SAMPLES - 1) as f64).exp().min(end)
                }));
            }
            t
        }
    };
    times.sort_by(f64::total_cmp);
    times.dedup();
    times
}

fn from_check(spec: &CheckSpec, r: CheckReport) -> Outcome {
    let witness = r.witness.map(|w| match w.t {
        Some(t) => format!("{} at t = {t}: {}", w.location, w.value),
        None => format!("{} (analytic): {}", w.location, w.value),
    });
    let mut o = Outcome::new(spec.name(), spec.expect(), r.verdict, r.worst_value)
        .witness(witness)
        .detail("samples", r.samples as f64);
    o.note = r.note;
    o
}

fn run_check(s: &Scenario, ctx: &Context, spec: &CheckSpec) -> Result<Outcome, ScenarioError> {
    let times = check_times(s.mode, ctx.start, ctx.end);
    let steps: Vec<u64> = times.iter().map(|&t| t as u64).collect();
    let net = &ctx.net;
    let p = &ctx.persistence;
    let r = match *spec {
        CheckSpec::Stochasticity { .. } => check_stochasticity(net, &steps)?,
        CheckSpec::SelfConfidence { eta, .. } => check_self_confidence(net, eta, &steps)?,
        CheckSpec::ArcBalance {
            bound,
            probe,
            window,
            ..
        } => match probe {
            ProbeKind::Pointwise => check_arc_balance(net, p, bound, BalanceProbe::Pointwise(&times))?,
            ProbeKind::Integral => {
                let w = window.expect("validated");
                let intervals: Vec<(f64, f64)> = times.iter().map(|&t| (t, t + w)).collect();
                check_arc_balance(net, p, bound, BalanceProbe::Integral(&intervals))?
            }
        },
        CheckSpec::WindowBound { a_star, window, .. } => {
            let w = match s.mode {
                TimeMode::Discrete => Window::Steps(window as u64),
                TimeMode::Continuous => Window::Duration(window),
            };
            check_window_bound(net, p, a_star, w, &times)?
        }
        CheckSpec::CutBalance { k, scope, .. } => {
            let scope = match scope {
                CutScopeKind::All => CutScope::All,
                CutScopeKind::Persistent => CutScope::Persistent(p),
            };
            let selection = SubsetSelection::auto(net.node_count(), s.seed.unwrap_or(0), 4096);
            check_cut_balance(net, scope, k, &times, selection)?
        }
    };
    Ok(from_check(spec, r))
}

/// Assumption checks only, with the persistence summary.
pub fn run_checks(s: &Scenario) -> Result<(PersistenceSummary, Vec<Outcome>), ScenarioError> {
    let ctx = prepare(s).map_err(|e| e.in_scenario(&s.name))?;
    let outcomes = s
        .checks
        .iter()
        .map(|c| run_check(s, &ctx, c))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.in_scenario(&s.name))?;
    Ok((summary(&ctx.persistence), outcomes))
}

pub fn run_scenario(s: &Scenario, opts: &RunOptions) -> Result<RunReport, ScenarioError> {
    execute(s, opts).map(|o| o.report)
}

/// Runs the full pipeline and keeps the trajectory.
pub fn execute(s: &Scenario, opts: &RunOptions) -> Result<RunOutput, ScenarioError> {
    execute_inner(s, opts).map_err(|e| e.in_scenario(&s.name))
}

fn execute_inner(s: &Scenario, opts: &RunOptions) -> Result<RunOutput, ScenarioError> {
    let clock = Instant::now();
    let ctx = prepare(s)?;
    let mut report = RunReport {
        scenario: s.name.clone(),
        mode: s.mode,
        seed: opts.seed.or(s.seed),
        start: ctx.start,
        end: ctx.end,
        persistence: summary(&ctx.persistence),
        checks: Vec::new(),
        certificates: Vec::new(),
        aborted: None,
        samples: 0,
        trajectory_csv: None,
        wall_time_seconds: 0.0,
    };
    for spec in &s.checks {
        let o = run_check(s, &ctx, spec)?;
        let failed = !o.ok;
        let reason = format!(
            "check `{}` did not meet expectation ({:?}){}",
            o.name,
            o.verdict,
            o.witness.as_deref().map(|w| format!(": {w}")).unwrap_or_default()
        );
        report.checks.push(o);
        if failed {
            report.aborted = Some(reason);
            report.wall_time_seconds = clock.elapsed().as_secs_f64();
            return Ok(RunOutput {
                report,
                trajectory: None,
            });
        }
    }

    let x0 = s.initial_values(&ctx.persistence.persistent_graph, opts.seed)?;
    let sim = match s.mode {
        TimeMode::Discrete => Simulated::Discrete(simulate(
            &ctx.net,
            BeliefVector::new(ctx.start as u64, x0),
            s.horizon as u64,
        )?),
        TimeMode::Continuous => Simulated::Continuous(integrate_with(
            &ctx.net,
            &x0,
            ctx.start,
            ctx.end,
            &s.integrator_config().options(),
        )?),
    };
    report.samples = sim.series().len();
    for spec in &s.certificates {
        report.certificates.push(run_certificate(s, &ctx, spec, &sim)?);
    }
    if let Some(dir) = &opts.out_dir {
        let name = format!("{}.csv", s.name);
        emit_trajectory_csv(sim.series(), dir.join(&name), opts.stride.unwrap_or(s.output.stride))?;
        report.trajectory_csv = Some(name);
    }
    report.wall_time_seconds = clock.elapsed().as_secs_f64();
    Ok(RunOutput {
        report,
        trajectory: Some(sim),
    })
}

fn regime_failure(name: &str, why: impl Into<String>) -> Outcome {
    Outcome::new(name, Expect::Pass, Verdict::Fail, f64::NAN).note(why)
}

fn contraction_outcome(
    name: &str,
    series: &dyn StateSeries,
    cert: &RateCertificate,
) -> Result<Outcome, ScenarioError> {
    let r = verify_contraction(series, cert)?;
    Ok(Outcome::new(name, Expect::Pass, r.verdict, r.worst_margin)
        .detail("epsilon", cert.epsilon)
        .detail("T0", cert.horizon)
        .detail("windows", r.windows as f64)
        .detail("max_ratio", r.max_ratio)
        .witness(r.worst_time.map(|t| format!("worst window starts at t = {t}"))))
}

fn floor_outcome(
    s: &Scenario,
    ctx: &Context,
    series: &dyn StateSeries,
    name: &str,
    floor: f64,
) -> Result<Outcome, ScenarioError> {
    let spreads = series.spreads();
    let (k_min, h_min) = spreads
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (k, h)| if h < acc.1 { (k, h) } else { acc });
    let margin = h_min - floor;
    let verdict = if margin >= -FLOOR_TOLERANCE {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    let mut o = Outcome::new(name, Expect::Pass, verdict, margin)
        .detail("floor", floor)
        .detail("min_spread", h_min)
        .witness(Some(format!("minimum spread at t = {}", series.time(k_min))));
    if let Some((lo, hi)) = s.split_sets(&ctx.persistence.persistent_graph)? {
        let gap = component_extremes(series, &lo, &hi)?
            .iter()
            .map(|c| c.gap)
            .fold(f64::INFINITY, f64::min);
        o = o.detail("min_component_gap", gap);
    }
    Ok(o)
}

fn run_certificate(
    s: &Scenario,
    ctx: &Context,
    spec: &CertificateSpec,
    sim: &Simulated,
) -> Result<Outcome, ScenarioError> {
    let name = spec.name();
    let series = sim.series();
    let gp = &ctx.persistence.persistent_graph;
    let n = ctx.net.node_count();
    Ok(match *spec {
        CertificateSpec::DiscreteRate { eta, a_star, t_star } => {
            if n > 1 && !gp.is_quasi_strongly_connected() {
                return Ok(regime_failure(name, "persistent graph is not quasi-strongly connected"));
            }
            match discrete_rate_bound(eta, a_star, t_star, gp.diameter()) {
                Ok(cert) => contraction_outcome(name, series, &cert)?,
                Err(e) => regime_failure(name, e.to_string()),
            }
        }
        CertificateSpec::ContinuousRate {
            arc_balance,
            a_star,
            tau0,
            theta_integral,
        } => {
            if !gp.is_quasi_strongly_connected() {
                return Ok(regime_failure(name, "persistent graph is not quasi-strongly connected"));
            }
            let Some(theta) = theta_integral.or_else(|| ctx.theta.tail_integral(0.0).map(|b| b.value))
            else {
                return Ok(regime_failure(name, "vanishing-arc weights are not integrable"));
            };
            match continuous_rate_bound(arc_balance, n, theta, a_star, tau0, gp.diameter()) {
                Ok(cert) => contraction_outcome(name, series, &cert)?,
                Err(e) => regime_failure(name, e.to_string()),
            }
        }
        CertificateSpec::DiscreteFloor => {
            let cert = match sigma_star_certificate(&ctx.theta, 0) {
                Ok(c) => c,
                Err(e) => return Ok(regime_failure(name, e.to_string())),
            };
            if ctx.start < cert.required_t0 {
                return Ok(regime_failure(
                    name,
                    format!("start {} precedes the certified t0 = {}", ctx.start, cert.required_t0),
                ));
            }
            let FloorKind::DiscreteSigma {
                sigma_star,
                theta_tail_sum,
            } = cert.kind
            else {
                unreachable!()
            };
            floor_outcome(s, ctx, series, name, cert.floor)?
                .detail("sigma_star", sigma_star)
                .detail("theta_tail_sum", theta_tail_sum)
                .detail("certified_t0", cert.required_t0)
        }
        CertificateSpec::ContinuousFloor => {
            let cert = match continuous_floor_certificate(&ctx.theta, FloorStart::At(ctx.start)) {
                Ok(c) => c,
                Err(e) => return Ok(regime_failure(name, e.to_string())),
            };
            let FloorKind::ContinuousTheta {
                theta_tail_integral,
            } = cert.kind
            else {
                unreachable!()
            };
            floor_outcome(s, ctx, series, name, cert.floor)?
                .detail("theta_tail_integral", theta_tail_integral)
        }
        CertificateSpec::WindowViolation {
            epsilon,
            window,
            arc_balance,
        } => window_violation(ctx, series, epsilon, window, arc_balance)?,
        CertificateSpec::AgreementSchedule {
            arc_balance,
            target_ratio,
            theta_integral,
        } => {
            let Some(theta) = theta_integral.or_else(|| ctx.theta.tail_integral(0.0).map(|b| b.value))
            else {
                return Ok(regime_failure(name, "vanishing-arc weights are not integrable"));
            };
            let sched = match agreement_schedule(
                &ctx.net,
                &ctx.persistence,
                arc_balance,
                theta,
                ctx.start,
                target_ratio,
            ) {
                Ok(v) => v,
                Err(e) => return Ok(regime_failure(name, e.to_string())),
            };
            let t_last = *sched.times.last().expect("nonempty");
            if t_last > ctx.end {
                return Ok(regime_failure(
                    name,
                    format!("schedule ends at {t_last}, after the horizon end {}", ctx.end),
                ));
            }
            let times = series.times();
            let spreads = series.spreads();
            let h0 = spreads[0];
            let mut worst = f64::NEG_INFINITY;
            let mut witness = None;
            let mut final_spread = h0;
            for (k, &tk) in sched.times.iter().enumerate() {
                let j = sample_at_or_before(&times, tk).expect("schedule within horizon");
                let margin = spreads[j] - sched.bound_after(k) * h0;
                if margin > worst {
                    worst = margin;
                    witness = Some(format!("round {k} at t = {tk}"));
                }
                final_spread = spreads[j];
            }
            let ratio = if h0 > 0.0 { final_spread / h0 } else { 0.0 };
            let verdict = if worst <= CONTINUOUS_TOLERANCE && ratio < target_ratio {
                Verdict::Pass
            } else {
                Verdict::Fail
            };
            Outcome::new(name, Expect::Pass, verdict, worst)
                .detail("rounds", sched.rounds() as f64)
                .detail("factor", sched.factor)
                .detail("m0", sched.m0)
                .detail("t_final", t_last)
                .detail("final_ratio", ratio)
                .witness(witness)
        }
        CertificateSpec::LemmaBounds { max_len, starts } => {
            let r = match sim {
                Simulated::Discrete(traj) => verify_convexity_bounds(traj, &ctx.net, max_len)?,
                Simulated::Continuous(traj) => {
                    let last = traj.len() - 1;
                    let picks: Vec<usize> = (0..starts.max(1))
                        .map(|k| k * last / starts.max(1))
                        .filter(|&k| k < last)
                        .collect();
                    let mut r = verify_exponential_bound(traj, &ctx.net, picks.first().copied().unwrap_or(0))?;
                    for &k in picks.iter().skip(1) {
                        r = r.merge(verify_exponential_bound(traj, &ctx.net, k)?);
                    }
                    if last > 0 {
                        for &arc in ctx.net.graph().arcs() {
                            r = r.merge(verify_influence_bound(traj, &ctx.net, arc, 0, last)?);
                        }
                    }
                    r
                }
            };
            Outcome::new(name, Expect::Pass, r.verdict, r.worst_slack)
                .detail("checks", r.checks as f64)
                .witness(r.witness)
        }
        CertificateSpec::HullMonotonicity => {
            let tol = match s.mode {
                TimeMode::Discrete => DISCRETE_HULL_TOLERANCE,
                TimeMode::Continuous => CONTINUOUS_HULL_TOLERANCE,
            };
            let d = hull_drift(series);
            let verdict = if d.worst() <= tol {
                Verdict::Pass
            } else {
                Verdict::Fail
            };
            Outcome::new(name, Expect::Pass, verdict, d.worst())
                .detail("max_rise", d.max_rise)
                .detail("max_drop", d.max_drop)
                .witness(d.worst_index.map(|k| format!("t = {}", series.time(k))))
        }
    })
}

/// Looks for a window of `window` steps whose spread shrinks by less than
/// `epsilon`, and measures how much persistent weight that window carries.
fn window_violation(
    ctx: &Context,
    series: &dyn StateSeries,
    epsilon: f64,
    window: u64,
    arc_balance: f64,
) -> Result<Outcome, ScenarioError> {
    let name = "window-violation";
    let threshold = match window_violation_threshold(arc_balance, ctx.net.node_count(), epsilon) {
        Ok(v) => v,
        Err(e) => return Ok(regime_failure(name, e.to_string())),
    };
    let spreads = series.spreads();
    let w = window as usize;
    let mut best: Option<(usize, f64)> = None;
    for k in 0..spreads.len().saturating_sub(w) {
        let margin = spreads[k + w] - epsilon * spreads[k];
        if margin > 0.0 && best.map_or(true, |(_, m)| margin > m) {
            best = Some((k, margin));
        }
    }
    let Some((k, margin)) = best else {
        return Ok(Outcome::new(name, Expect::Pass, Verdict::Fail, 0.0)
            .detail("threshold", threshold)
            .note("every window contracts"));
    };
    let t = series.time(k) as u64;
    let window_sum = ctx
        .persistence
        .persistent_arcs
        .iter()
        .filter_map(|a| ctx.net.weight(*a))
        .map(|f| f.window_sum(t, window))
        .fold(0.0, f64::max);
    let max_xi = (t..t + window)
        .flat_map(|s| (0..ctx.net.node_count()).map(move |i| (s, i)))
        .map(|(s, i)| ctx.net.xi_plus(s as f64, NodeId(i)))
        .fold(0.0, f64::max);
    let verdict = if window_sum <= threshold && max_xi <= 0.5 {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(Outcome::new(name, Expect::Pass, verdict, margin)
        .detail("threshold", threshold)
        .detail("window_sum", window_sum)
        .detail("max_xi", max_xi)
        .detail("ratio", spreads[k + w] / spreads[k])
        .witness(Some(format!("t* = {t}"))))
}
