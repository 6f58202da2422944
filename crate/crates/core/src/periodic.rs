//! Periodic law enforcement: existence hypotheses and a periodic-orbit finder.
//!
//! Averaging the criminal equation over a period shows that a positive
//! `T`-periodic solution needs `gamma > eta + mean(l_e)`. Two sufficient
//! regimes are checked by [`ledger`]:
//!
//! * strong counteroffensive: `sigma > phi / nu` and
//!   `eta + mean(l_e) > gamma N_dag / (nu + N_dag)`;
//! * weak counteroffensive: `sigma < phi / (nu + K)` and `K < N_dag`, where
//!   `Lambda = (eta + mean(l_e)) / gamma` and `K = Lambda nu / (1 - Lambda)`.
//!
//! [`find_periodic`] locates an attracting orbit numerically: Newton on the
//! period map for `tau = 0`, plain iteration of the return map on history
//! segments for `tau > 0`. With a delay the attracting orbit may be
//! subharmonic; its period is then the smallest multiple `k T` (up to
//! [`PeriodicOptions::max_subharmonic`]) after which the segment repeats.

use std::collections::VecDeque;

use serde::Serialize;

use crate::equilibria;
use crate::error::{Error, Result};
use crate::integrator::{IntegratorConfig, MeshAlignment, Stepper, Trajectory};
use crate::model::{HistoryFunction, ModelParams, StateVec};
use crate::stability::Matrix2;

/// An inequality `lhs > rhs` with `margin = lhs - rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Condition {
    pub holds: bool,
    pub margin: f64,
}

impl Condition {
    fn greater(lhs: f64, rhs: f64) -> Self {
        Condition {
            holds: lhs > rhs,
            margin: lhs - rhs,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StrongCounteroffensive {
    /// `sigma > phi / nu`.
    pub sigma_large: Condition,
    /// `eta + mean(l_e) > gamma N_dag / (nu + N_dag)`.
    pub removal_above: Condition,
    /// `f(N) -> -inf` as declared by the growth function.
    pub f_unbounded_below: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeakCounteroffensive {
    /// `sigma < phi / (nu + K)`.
    pub sigma_small: Option<Condition>,
    /// `K < N_dag`.
    pub k_below: Option<Condition>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Applicable {
    Thm1,
    Thm2,
    Neither,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionLedger {
    pub mean_enforcement: f64,
    pub n_dag: f64,
    /// `gamma > eta + mean(l_e)`.
    pub gamma_gt: Condition,
    /// `(eta + mean(l_e)) / gamma`.
    pub lambda: f64,
    /// `Lambda nu / (1 - Lambda)`, defined when `Lambda < 1`.
    pub k: Option<f64>,
    pub thm1: StrongCounteroffensive,
    pub thm2: WeakCounteroffensive,
    pub applicable: Applicable,
}

/// Evaluates every hypothesis with its margin.
pub fn ledger(p: &ModelParams) -> Result<ConditionLedger> {
    let mean = p.enforcement.mean();
    let removal = p.eta + mean;
    let n_dag = equilibria::criminal_free_level(&p.growth)?;
    let gamma_gt = Condition::greater(p.gamma, removal);
    let lambda = removal / p.gamma;
    let k = (lambda < 1.0).then(|| lambda * p.nu / (1.0 - lambda));
    let thm1 = StrongCounteroffensive {
        sigma_large: Condition::greater(p.sigma, p.phi / p.nu),
        removal_above: Condition::greater(removal, p.gamma * n_dag / (p.nu + n_dag)),
        f_unbounded_below: p.growth.unbounded_below(),
    };
    let thm2 = WeakCounteroffensive {
        sigma_small: k.map(|k| Condition::greater(p.phi / (p.nu + k), p.sigma)),
        k_below: k.map(|k| Condition::greater(n_dag, k)),
    };
    let holds = |c: Option<Condition>| c.is_some_and(|c| c.holds);
    let applicable = if gamma_gt.holds && thm1.sigma_large.holds && thm1.removal_above.holds {
        Applicable::Thm1
    } else if gamma_gt.holds && holds(thm2.sigma_small) && holds(thm2.k_below) {
        Applicable::Thm2
    } else {
        Applicable::Neither
    };
    Ok(ConditionLedger {
        mean_enforcement: mean,
        n_dag,
        gamma_gt,
        lambda,
        k,
        thm1,
        thm2,
        applicable,
    })
}

/// The averaged vector field in logarithmic variables `u = ln N`, `v = ln C`.
pub fn phi_map(u: f64, v: f64, p: &ModelParams) -> [f64; 2] {
    let n = u.exp();
    let c = v.exp();
    [
        p.growth.value(n) + (p.sigma - p.phi / (p.nu + n)) * c,
        p.gamma * n / (p.nu + n) - p.mean_removal(),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegreeCertificate {
    /// `(u, v)` with `e^u = K`, `e^v = f(K) / (phi / (nu + K) - sigma)`.
    pub zero: [f64; 2],
    pub jacobian: Matrix2,
    pub det: f64,
    pub sign: i8,
}

/// Jacobian of [`phi_map`] at its unique zero in the weak-counteroffensive
/// regime, and the sign of its determinant.
pub fn degree_certificate(p: &ModelParams) -> Result<DegreeCertificate> {
    let l = ledger(p)?;
    let Some(k) = l.k.filter(|_| l.gamma_gt.holds) else {
        return Err(Error::NotApplicable("gamma <= eta + mean(l_e)".into()));
    };
    let off = p.sigma - p.phi / (p.nu + k);
    if off.abs() < 1e-12 {
        return Err(Error::DegenerateCertificate("sigma = phi / (nu + K)".into()));
    }
    if l.applicable != Applicable::Thm2 {
        return Err(Error::NotApplicable(
            "weak-counteroffensive hypotheses do not hold".into(),
        ));
    }
    let ev = p.growth.value(k) / -off;
    let s = p.nu + k;
    let m = p.growth.derivative(k) * k + p.phi * k * ev / (s * s);
    let jacobian = Matrix2::new(m, off * ev, p.gamma * p.nu * k / (s * s), 0.0);
    let det = jacobian.det();
    if det.abs() < 1e-12 {
        return Err(Error::DegenerateCertificate(format!("det = {det:e}")));
    }
    Ok(DegreeCertificate {
        zero: [k.ln(), ev.ln()],
        jacobian,
        det,
        sign: if det > 0.0 { 1 } else { -1 },
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicOptions {
    /// Periods integrated before the fixed-point search starts.
    pub transient_periods: usize,
    pub max_iter: usize,
    /// Requested step; fitted to divide the period.
    pub step: f64,
    pub tol: f64,
    /// Samples of the history segment compared between periods (`tau > 0`).
    pub section_samples: usize,
    /// Period to use with constant enforcement.
    pub period_override: Option<f64>,
    /// Largest multiple of the forcing period accepted as the orbit period
    /// (`tau > 0`); 1 restricts the search to `T`-periodic orbits.
    pub max_subharmonic: usize,
}

impl Default for PeriodicOptions {
    fn default() -> Self {
        PeriodicOptions {
            transient_periods: 50,
            max_iter: 500,
            step: 0.01,
            tol: 1e-8,
            section_samples: 64,
            period_override: None,
            max_subharmonic: 4,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PeriodicOrbitResult {
    /// State on the section `t = t_start`, a multiple of the period.
    pub fixed_point: StateVec,
    /// Two periods of the orbit, `[t_start, t_start + 2 period]`, evaluable
    /// back to `t_start - tau`.
    pub orbit: Trajectory,
    pub t_start: f64,
    /// Orbit period, `multiple * forcing_period`.
    pub period: f64,
    pub forcing_period: f64,
    /// 1 for a `T`-periodic orbit, `k > 1` for a subharmonic one.
    pub multiple: usize,
    /// Return-map defect: `|X(T) - X(0)|` for `tau = 0`, the largest defect
    /// over the sampled history segment otherwise.
    pub residual: f64,
    pub positive: bool,
    pub min_n: f64,
    pub max_n: f64,
    pub min_c: f64,
    /// Newton steps (`tau = 0`) or periods (`tau > 0`) after the transient.
    pub iterations: usize,
    pub converged: bool,
}

impl PeriodicOrbitResult {
    /// State at `t_start + s`, with `s` wrapped into one orbit period.
    pub fn state_at(&self, s: f64) -> Result<StateVec> {
        self.orbit.evaluate(self.t_start + s.rem_euclid(self.period))
    }

    /// Sup-distance between two orbits, sampled at `samples` points of the
    /// longer period relative to each orbit's section time.
    pub fn distance(&self, other: &PeriodicOrbitResult, samples: usize) -> Result<f64> {
        let span = self.period.max(other.period);
        let mut d: f64 = 0.0;
        for i in 0..samples {
            let s = span * i as f64 / samples as f64;
            let a = self.state_at(s)?;
            let b = other.state_at(s)?;
            d = d.max((a - b).norm_inf());
        }
        Ok(d)
    }
}

fn config(opts: &PeriodicOptions, period: f64) -> IntegratorConfig {
    let mut cfg = IntegratorConfig::new(opts.step, 0.0);
    cfg.alignment = MeshAlignment::Period(period);
    cfg
}

fn period_map(p: &ModelParams, x: StateVec, cfg: &IntegratorConfig, period: f64) -> Result<StateVec> {
    let mut s = Stepper::new(p, &HistoryFunction::Constant(x), cfg, 0.0)?;
    s.advance_to(period)?;
    Ok(s.trajectory().final_state())
}

/// Newton on `G(x) = P(x) - x` with a forward-difference Jacobian; `None`
/// when the step does not reduce the residual.
fn newton_step(
    p: &ModelParams,
    x: StateVec,
    px: StateVec,
    residual: f64,
    cfg: &IntegratorConfig,
    period: f64,
) -> Result<Option<(StateVec, StateVec, f64)>> {
    let g = px - x;
    let mut cols = [StateVec::ZERO; 2];
    for (j, col) in cols.iter_mut().enumerate() {
        let d = 1e-7 * if j == 0 { x.n.abs().max(1e-3) } else { x.c.abs().max(1e-3) };
        let dx = if j == 0 { StateVec::new(d, 0.0) } else { StateVec::new(0.0, d) };
        let gd = period_map(p, x + dx, cfg, period)? - (x + dx);
        *col = (gd - g) * (1.0 / d);
    }
    let jac = Matrix2::new(cols[0].n, cols[1].n, cols[0].c, cols[1].c);
    let det = jac.det();
    if det.abs() <= 1e-300 {
        return Ok(None);
    }
    let dn = (g.n * jac.a22 - jac.a12 * g.c) / det;
    let dc = (jac.a11 * g.c - jac.a21 * g.n) / det;
    let cand = StateVec::new(x.n - dn, x.c - dc);
    if !(cand.n > 0.0 && cand.c > 0.0) {
        return Ok(None);
    }
    let Ok(pc) = period_map(p, cand, cfg, period) else {
        return Ok(None);
    };
    let r = (pc - cand).norm_inf();
    Ok((r < residual).then_some((cand, pc, r)))
}

fn orbit_extrema(orbit: &Trajectory, from: f64) -> (f64, f64, f64) {
    let mut min_n = f64::INFINITY;
    let mut max_n = f64::NEG_INFINITY;
    let mut min_c = f64::INFINITY;
    for (t, x) in orbit.solution_nodes() {
        if t >= from {
            min_n = min_n.min(x.n);
            max_n = max_n.max(x.n);
            min_c = min_c.min(x.c);
        }
    }
    (min_n, max_n, min_c)
}

const EXTINCT: f64 = 1e-6;

/// Finds an attracting positive periodic orbit of the forced system.
pub fn find_periodic(p: &ModelParams, guess: &HistoryFunction, opts: &PeriodicOptions) -> Result<PeriodicOrbitResult> {
    p.validate()?;
    let period = match (p.enforcement.period(), opts.period_override) {
        (_, Some(t)) => t,
        (Some(t), None) => t,
        (None, None) => return Err(Error::RequiresPeriod),
    };
    if !(period > 0.0 && period.is_finite()) {
        return Err(Error::param("period", "must be positive"));
    }
    if p.tau == 0.0 {
        find_undelayed(p, guess, opts, period)
    } else {
        find_delayed(p, guess, opts, period)
    }
}

fn find_undelayed(p: &ModelParams, guess: &HistoryFunction, opts: &PeriodicOptions, period: f64) -> Result<PeriodicOrbitResult> {
    let cfg = config(opts, period);
    let mut s = Stepper::new(p, guess, &cfg, 0.0)?;
    s.advance_to(opts.transient_periods as f64 * period)?;
    let mut x = s.trajectory().final_state();
    if x.c < EXTINCT {
        return Err(Error::Extinction { min_c: x.c });
    }

    let mut px = period_map(p, x, &cfg, period)?;
    let mut residual = (px - x).norm_inf();
    let mut iterations = 0;
    while residual > opts.tol {
        if iterations >= opts.max_iter {
            return Err(Error::NoConvergence { iterations, residual });
        }
        iterations += 1;
        (x, px, residual) = match newton_step(p, x, px, residual, &cfg, period)? {
            Some(next) => next,
            None => {
                let ppx = period_map(p, px, &cfg, period)?;
                (px, ppx, (ppx - px).norm_inf())
            }
        };
    }
    // a couple of extra Newton steps push the fixed point well below `tol`
    for _ in 0..2 {
        match newton_step(p, x, px, residual, &cfg, period)? {
            Some(next) => (x, px, residual) = next,
            None => break,
        }
    }

    let mut s = Stepper::new(p, &HistoryFunction::Constant(x), &cfg, 0.0)?;
    s.advance_to(2.0 * period)?;
    let orbit = s.into_trajectory();
    let (min_n, max_n, min_c) = orbit_extrema(&orbit, 0.0);
    if min_c < EXTINCT {
        return Err(Error::Extinction { min_c });
    }
    let end = orbit.evaluate(period)?;
    Ok(PeriodicOrbitResult {
        fixed_point: x,
        t_start: 0.0,
        period,
        forcing_period: period,
        multiple: 1,
        residual: (end - x).norm_inf(),
        positive: min_n > 0.0 && min_c > 0.0,
        min_n,
        max_n,
        min_c,
        iterations,
        converged: true,
        orbit,
    })
}

fn segment(traj: &Trajectory, end: f64, tau: f64, samples: usize) -> Result<Vec<StateVec>> {
    (0..samples)
        .map(|i| traj.evaluate(end - tau + tau * i as f64 / (samples - 1) as f64))
        .collect()
}

fn find_delayed(p: &ModelParams, guess: &HistoryFunction, opts: &PeriodicOptions, period: f64) -> Result<PeriodicOrbitResult> {
    let tau = p.tau;
    let samples = opts.section_samples.max(2);
    let max_k = opts.max_subharmonic.max(1);
    let cfg = config(opts, period);
    let mut s = Stepper::new(p, guess, &cfg, 0.0)?;
    let mut k = 0usize;
    let advance = |s: &mut Stepper<'_, ModelParams>, k: &mut usize, discard: bool| -> Result<()> {
        *k += 1;
        let t = *k as f64 * period;
        s.advance_to(t)?;
        if discard {
            s.discard_before(t);
        }
        Ok(())
    };
    for _ in 0..opts.transient_periods {
        advance(&mut s, &mut k, true)?;
    }
    // most recent segment first; `recent[j]` was sampled `j` periods ago
    let mut recent = VecDeque::with_capacity(max_k + 1);
    recent.push_front(segment(s.trajectory(), k as f64 * period, tau, samples)?);
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    let multiple = loop {
        if iterations >= opts.max_iter {
            return Err(Error::NoConvergence { iterations, residual });
        }
        iterations += 1;
        advance(&mut s, &mut k, true)?;
        let seg = segment(s.trajectory(), k as f64 * period, tau, samples)?;
        let c_min = seg.iter().map(|x| x.c).fold(f64::INFINITY, f64::min);
        if c_min < EXTINCT {
            return Err(Error::Extinction { min_c: c_min });
        }
        recent.push_front(seg);
        recent.truncate(max_k + 1);
        let defect = |j: usize| {
            recent[0]
                .iter()
                .zip(&recent[j])
                .map(|(a, b)| (*a - *b).norm_inf())
                .fold(0.0, f64::max)
        };
        residual = defect(1);
        if let Some(m) = (1..recent.len()).find(|&j| defect(j) <= opts.tol) {
            residual = defect(m);
            break m;
        }
    };

    let orbit_period = multiple as f64 * period;
    let t_start = k as f64 * period;
    let fixed_point = s.trajectory().final_state();
    for _ in 0..2 * multiple {
        advance(&mut s, &mut k, false)?;
    }
    let orbit = s.trajectory().window(t_start, t_start + 2.0 * orbit_period)?;
    let (min_n, max_n, min_c) = orbit_extrema(&orbit, t_start);
    if min_c < EXTINCT {
        return Err(Error::Extinction { min_c });
    }
    Ok(PeriodicOrbitResult {
        fixed_point,
        orbit,
        t_start,
        period: orbit_period,
        forcing_period: period,
        multiple,
        residual,
        positive: min_n > 0.0 && min_c > 0.0,
        min_n,
        max_n,
        min_c,
        iterations,
        converged: true,
    })
}

/// `|(gamma / T) int_0^T N / (nu + N) dt - (eta + mean(l_e))|` along the orbit.
pub fn average_identity_check(orbit: &PeriodicOrbitResult, p: &ModelParams) -> Result<f64> {
    let a = orbit.t_start;
    let integral = orbit
        .orbit
        .integrate_over(&|t| {
            let x = orbit.orbit.evaluate(t).expect("inside orbit window");
            x.n / (p.nu + x.n)
        }, a, a + orbit.period)?;
    Ok((p.gamma * integral / orbit.period - p.mean_removal()).abs())
}

/// The same balance with the recruitment term taken at the delayed state,
/// `(1 / T) int_0^T gamma N_tau C_tau / ((nu + N_tau) C) dt = eta + mean(l_e)`,
/// which holds exactly for periodic solutions at any delay.
pub fn delayed_average_identity_check(orbit: &PeriodicOrbitResult, p: &ModelParams) -> Result<f64> {
    let a = orbit.t_start;
    let tau = p.tau;
    let integral = orbit.orbit.integrate_over(&|t| {
        let x = orbit.orbit.evaluate(t).expect("inside orbit window");
        let xd = orbit.orbit.evaluate(t - tau).expect("inside orbit window");
        p.gamma * xd.n * xd.c / ((p.nu + xd.n) * x.c)
    }, a, a + orbit.period)?;
    Ok((integral / orbit.period - p.mean_removal()).abs())
}
