//! Fixed-step method-of-steps integration for constant-delay systems.
//!
//! Each step is a classical four-stage Runge-Kutta step. Delayed values are
//! read from the already completed part of the solution through cubic Hermite
//! interpolation of stored nodes and slopes, so the step never exceeds the
//! delay. With the default [`MeshAlignment::Delay`] the step is `tau / m` and
//! every breaking point `t0 + k tau` is a mesh node.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{self, HistoryFunction, ModelParams, StateVec, CLAMP_TOLERANCE};
use crate::quadrature;

/// A two-component system `x'(t) = g(t, x(t), x(t - tau))`.
pub trait DelaySystem {
    fn delay(&self) -> f64;

    fn derivative(&self, t: f64, x: StateVec, delayed: StateVec) -> Result<StateVec>;

    /// Whether the positive quadrant is invariant and should be enforced.
    fn nonnegative(&self) -> bool {
        false
    }
}

impl DelaySystem for ModelParams {
    fn delay(&self) -> f64 {
        self.tau
    }

    fn derivative(&self, t: f64, x: StateVec, delayed: StateVec) -> Result<StateVec> {
        model::rhs(t, x, delayed, self)
    }

    fn nonnegative(&self) -> bool {
        true
    }
}

/// What to do with negative values produced by a step of a nonnegative system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PositivityMode {
    /// Zero out dust down to `-1e-12`; fail below that.
    #[default]
    Clamp,
    /// Fail on any negative value.
    Reject,
}

/// How the step size is fitted to the problem's natural time scales.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum MeshAlignment {
    /// `h = tau / m` with `m >= 4`, so breaking points are nodes.
    #[default]
    Delay,
    /// `h = T / n`, so every multiple of the forcing period is a node; `h` is
    /// additionally kept `<= tau`. Breaking points are generally not nodes.
    Period(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorConfig {
    /// Requested step; the effective step is derived from it.
    pub step: f64,
    pub t_end: f64,
    pub positivity: PositivityMode,
    pub max_norm: f64,
    pub alignment: MeshAlignment,
}

impl IntegratorConfig {
    pub fn new(step: f64, t_end: f64) -> Self {
        IntegratorConfig {
            step,
            t_end,
            positivity: PositivityMode::Clamp,
            max_norm: 1e12,
            alignment: MeshAlignment::Delay,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::InvalidConfig(format!("step {} must be positive", self.step)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidConfig(format!("t_end {} must be nonnegative", self.t_end)));
        }
        if !(self.max_norm > 0.0) {
            return Err(Error::InvalidConfig("max_norm must be positive".into()));
        }
        if let MeshAlignment::Period(t) = self.alignment {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::InvalidConfig(format!("period {t} must be positive")));
            }
        }
        Ok(())
    }

    /// Effective step, alignment block and steps per block for delay `tau`.
    pub fn mesh(&self, tau: f64) -> Result<MeshSpec> {
        self.validate()?;
        let spec = match self.alignment {
            MeshAlignment::Delay if tau > 0.0 => {
                let m = ((tau / self.step) - 1e-9).ceil().max(4.0) as usize;
                MeshSpec {
                    step: tau / m as f64,
                    block: tau,
                    per_block: m,
                }
            }
            MeshAlignment::Delay => MeshSpec {
                step: self.step,
                block: 0.0,
                per_block: 0,
            },
            MeshAlignment::Period(period) => {
                let mut n = ((period / self.step) - 1e-9).ceil().max(1.0) as usize;
                if tau > 0.0 && period / n as f64 > tau {
                    n = (period / tau).ceil() as usize;
                }
                MeshSpec {
                    step: period / n as f64,
                    block: period,
                    per_block: n,
                }
            }
        };
        Ok(spec)
    }
}

/// Resolved mesh: node `k = q * per_block + r` sits at `t0 + q * block + r * step`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshSpec {
    pub step: f64,
    pub block: f64,
    pub per_block: usize,
}

impl MeshSpec {
    fn node_time(&self, t0: f64, k: usize) -> f64 {
        if self.per_block == 0 {
            t0 + k as f64 * self.step
        } else {
            let q = k / self.per_block;
            let r = k % self.per_block;
            t0 + q as f64 * self.block + r as f64 * self.step
        }
    }
}

/// Dense solution on `[t0 - tau, t1]`.
///
/// Values before `t0` come from the history function; later values are cubic
/// Hermite interpolants of the stored nodes and right-derivatives.
#[derive(Debug, Clone)]
pub struct Trajectory {
    t0: f64,
    t1: f64,
    tau: f64,
    start: f64,
    step: f64,
    times: Vec<f64>,
    states: Vec<StateVec>,
    derivs: Vec<StateVec>,
    dense_from: usize,
    history: HistoryFunction,
    min_raw: f64,
}

impl Trajectory {
    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn t1(&self) -> f64 {
        self.t1
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Earliest time at which the trajectory can be evaluated.
    pub fn start(&self) -> f64 {
        self.start
    }

    /// Effective integration step.
    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[StateVec] {
        &self.states
    }

    pub fn derivs(&self) -> &[StateVec] {
        &self.derivs
    }

    pub fn history(&self) -> &HistoryFunction {
        &self.history
    }

    /// Smallest component produced by any step before clamping.
    pub fn min_raw(&self) -> f64 {
        self.min_raw
    }

    pub fn final_state(&self) -> StateVec {
        *self.states.last().expect("trajectory has at least one node")
    }

    /// Nodes at or after `t0`.
    pub fn solution_nodes(&self) -> impl Iterator<Item = (f64, StateVec)> + '_ {
        self.times[self.dense_from..]
            .iter()
            .copied()
            .zip(self.states[self.dense_from..].iter().copied())
    }

    pub fn evaluate(&self, t: f64) -> Result<StateVec> {
        let tol = 1e-12 * t.abs().max(1.0);
        if !(t >= self.start - tol && t <= self.t1 + tol) {
            return Err(Error::OutOfRange {
                t,
                start: self.start,
                end: self.t1,
            });
        }
        if t < self.t0 {
            return Ok(self.history.eval(t - self.t0));
        }
        let dense = &self.times[self.dense_from..];
        if dense.len() == 1 {
            return Ok(self.states[self.dense_from]);
        }
        let i = dense.partition_point(|&x| x <= t).clamp(1, dense.len() - 1) - 1;
        Ok(self.hermite(self.dense_from + i, t))
    }

    fn hermite(&self, i: usize, t: f64) -> StateVec {
        let (ta, tb) = (self.times[i], self.times[i + 1]);
        let dt = tb - ta;
        let s = (t - ta) / dt;
        let one = 1.0 - s;
        let h00 = (1.0 + 2.0 * s) * one * one;
        let h10 = s * one * one;
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        self.states[i] * h00
            + self.derivs[i] * (h10 * dt)
            + self.states[i + 1] * h01
            + self.derivs[i + 1] * (h11 * dt)
    }

    /// Integral of `f` over `[a, b]`, split at every node and history sample
    /// so each piece is smooth.
    pub fn integrate_over<F: Fn(f64) -> f64>(&self, f: &F, a: f64, b: f64) -> Result<f64> {
        if b < a {
            return Ok(-self.integrate_over(f, b, a)?);
        }
        self.evaluate(a)?;
        self.evaluate(b)?;
        let mut pts = vec![a];
        if a < self.t0 {
            let hist_end = b.min(self.t0);
            pts.extend(
                self.history
                    .breakpoints_within(a - self.t0, hist_end - self.t0)
                    .into_iter()
                    .map(|s| s + self.t0),
            );
            if b > self.t0 {
                pts.push(self.t0);
            }
        }
        let lo = a.max(self.t0);
        pts.extend(
            self.times[self.dense_from..]
                .iter()
                .copied()
                .filter(|&t| t > lo && t < b),
        );
        pts.push(b);
        Ok(quadrature::composite(f, &pts))
    }

    /// Restriction to `[a, b]` that keeps enough nodes before `a` to evaluate
    /// on `[a - tau, b]`.
    pub fn window(&self, a: f64, b: f64) -> Result<Trajectory> {
        let lo_t = a - self.tau;
        self.evaluate(lo_t)?;
        self.evaluate(b)?;
        let lo = if lo_t < self.t0 {
            0
        } else {
            let dense = &self.times[self.dense_from..];
            self.dense_from + dense.partition_point(|&x| x <= lo_t).saturating_sub(1)
        };
        let hi = (self.times.partition_point(|&x| x < b) + 1).min(self.times.len());
        Ok(Trajectory {
            t0: self.t0,
            t1: b,
            tau: self.tau,
            start: lo_t.max(self.start),
            step: self.step,
            times: self.times[lo..hi].to_vec(),
            states: self.states[lo..hi].to_vec(),
            derivs: self.derivs[lo..hi].to_vec(),
            dense_from: self.dense_from.saturating_sub(lo),
            history: self.history.clone(),
            min_raw: self.min_raw,
        })
    }

    /// Writes `t,N,C` (plus `E` when `exposed` is given) for every `stride`-th
    /// node in `[from, to]`, seventeen significant digits, LF endings.
    pub fn write_csv<W: Write>(
        &self,
        mut w: W,
        from: f64,
        to: f64,
        stride: usize,
        exposed: Option<&ModelParams>,
    ) -> io::Result<()> {
        let stride = stride.max(1);
        let e_series = match exposed {
            Some(p) => Some(
                model_exposed_series(self, p)
                    .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e.to_string()))?,
            ),
            None => None,
        };
        if e_series.is_some() {
            w.write_all(b"t,N,C,E\n")?;
        } else {
            w.write_all(b"t,N,C\n")?;
        }
        let rows = self
            .times
            .iter()
            .enumerate()
            .skip(self.dense_from)
            .filter(|(_, &t)| t >= from && t <= to);
        let last = self.times.len() - 1;
        for (count, (i, &t)) in rows.enumerate() {
            if count % stride != 0 && i != last {
                continue;
            }
            let x = self.states[i];
            match &e_series {
                Some(e) => writeln!(
                    w,
                    "{:.16e},{:.16e},{:.16e},{:.16e}",
                    t,
                    x.n,
                    x.c,
                    e[i - self.dense_from]
                )?,
                None => writeln!(w, "{:.16e},{:.16e},{:.16e}", t, x.n, x.c)?,
            }
        }
        Ok(())
    }
}

fn model_exposed_series(traj: &Trajectory, p: &ModelParams) -> Result<Vec<f64>> {
    exposed_series(traj, p)
}

/// `E` at every node from `t0` on, accumulated from `E' = phi h(t) - gamma h(t - tau)`
/// starting from the closed-form value at `t0`.
pub fn exposed_series(traj: &Trajectory, p: &ModelParams) -> Result<Vec<f64>> {
    let nodes: Vec<f64> = traj.solution_nodes().map(|(t, _)| t).collect();
    if traj.tau() == 0.0 {
        return Ok(vec![0.0; nodes.len()]);
    }
    let contact = |s: f64| -> f64 {
        let x = traj.evaluate(s).expect("inside window");
        x.n * x.c / (p.nu + x.n)
    };
    let rate = |s: f64| p.phi * contact(s) - p.gamma * contact(s - traj.tau());
    let mut out = Vec::with_capacity(nodes.len());
    let mut e = model::exposed_population(traj, p, nodes[0])?;
    out.push(e);
    for w in nodes.windows(2) {
        e += traj.integrate_over(&rate, w[0], w[1])?;
        out.push(e);
    }
    Ok(out)
}

/// Incremental integrator; [`integrate_system`] drives it to a fixed horizon,
/// the periodic-orbit search advances it one period at a time.
pub struct Stepper<'a, S: DelaySystem + ?Sized> {
    sys: &'a S,
    traj: Trajectory,
    mesh: MeshSpec,
    k: usize,
    positivity: PositivityMode,
    max_norm: f64,
}

impl<'a, S: DelaySystem + ?Sized> Stepper<'a, S> {
    /// Starts at `t0` with `x(t0 + s) = history(s)` for `s` in `[-tau, 0]`.
    pub fn new(sys: &'a S, history: &HistoryFunction, cfg: &IntegratorConfig, t0: f64) -> Result<Self> {
        let tau = sys.delay();
        if !(tau >= 0.0 && tau.is_finite()) {
            return Err(Error::InvalidConfig(format!("delay {tau} must be nonnegative")));
        }
        history.validate(tau, sys.nonnegative())?;
        let mesh = cfg.mesh(tau)?;
        let h = mesh.step;

        let mut times = Vec::new();
        let mut states = Vec::new();
        let mut derivs = Vec::new();
        if tau > 0.0 {
            // history nodes, for export and for the mesh-covers-window invariant
            let m = (tau / h - 1e-9).ceil() as usize;
            for j in 0..m {
                let s = -tau + j as f64 * h;
                times.push(t0 + s);
                states.push(history.eval(s));
                derivs.push(history.slope(s));
            }
        }
        let x0 = history.eval(0.0);
        let d0 = sys.derivative(t0, x0, history.eval(-tau))?;
        let dense_from = times.len();
        times.push(t0);
        states.push(x0);
        derivs.push(d0);

        Ok(Stepper {
            sys,
            traj: Trajectory {
                t0,
                t1: t0,
                tau,
                start: t0 - tau,
                step: h,
                times,
                states,
                derivs,
                dense_from,
                history: history.clone(),
                min_raw: x0.min_component(),
            },
            mesh,
            k: 0,
            positivity: cfg.positivity,
            max_norm: cfg.max_norm,
        })
    }

    pub fn trajectory(&self) -> &Trajectory {
        &self.traj
    }

    pub fn into_trajectory(self) -> Trajectory {
        self.traj
    }

    pub fn time(&self) -> f64 {
        self.traj.t1
    }

    pub fn mesh(&self) -> MeshSpec {
        self.mesh
    }

    fn delayed(&self, t: f64) -> Result<StateVec> {
        let tau = self.traj.tau;
        self.traj.evaluate(t - tau)
    }

    fn eval(&self, t: f64, x: StateVec, tau_zero: bool) -> Result<StateVec> {
        if tau_zero {
            self.sys.derivative(t, x, x)
        } else {
            self.sys.derivative(t, x, self.delayed(t)?)
        }
    }

    /// Integrates up to `t_end`; the final step is shortened to land on it.
    pub fn advance_to(&mut self, t_end: f64) -> Result<()> {
        let tol = 1e-12 * t_end.abs().max(1.0);
        let tau_zero = self.traj.tau == 0.0;
        while self.traj.t1 < t_end - tol {
            let t = self.traj.t1;
            let mut t_next = self.mesh.node_time(self.traj.t0, self.k + 1);
            if t_next > t_end - tol {
                t_next = t_end;
            }
            let dt = t_next - t;
            let x = self.traj.final_state();
            let k1 = *self.traj.derivs.last().unwrap();
            let t_mid = t + 0.5 * dt;
            let delayed_mid = if tau_zero { None } else { Some(self.delayed(t_mid)?) };
            let stage = |xs: StateVec, d: Option<StateVec>| -> Result<StateVec> {
                self.sys.derivative(t_mid, xs, d.unwrap_or(xs))
            };
            let k2 = stage(x + k1 * (0.5 * dt), delayed_mid)?;
            let k3 = stage(x + k2 * (0.5 * dt), delayed_mid)?;
            let k4 = self.eval(t_next, x + k3 * dt, tau_zero)?;
            let raw = x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);

            if !raw.is_finite() {
                return Err(Error::NonFinite { t: t_next });
            }
            let norm = raw.norm_inf();
            if norm > self.max_norm {
                return Err(Error::BlowUp {
                    t: t_next,
                    norm,
                    limit: self.max_norm,
                });
            }
            let x_new = if self.sys.nonnegative() {
                let low = raw.min_component();
                self.traj.min_raw = self.traj.min_raw.min(low);
                let limit = match self.positivity {
                    PositivityMode::Clamp => -CLAMP_TOLERANCE,
                    PositivityMode::Reject => 0.0,
                };
                if low < limit {
                    return Err(Error::NegativeState { t: t_next, value: low });
                }
                StateVec::new(raw.n.max(0.0), raw.c.max(0.0))
            } else {
                raw
            };

            self.traj.times.push(t_next);
            self.traj.states.push(x_new);
            self.traj.t1 = t_next;
            let d_new = self.eval(t_next, x_new, tau_zero)?;
            self.traj.derivs.push(d_new);
            self.k += 1;
        }
        Ok(())
    }

    /// Drops nodes no longer reachable by delayed lookups from `t` onwards.
    pub fn discard_before(&mut self, t: f64) {
        let keep_from = t - self.traj.tau - self.mesh.step;
        let cut = self.traj.times.partition_point(|&x| x < keep_from);
        // the last node must survive
        let cut = cut.min(self.traj.times.len() - 1);
        if cut == 0 {
            return;
        }
        self.traj.times.drain(..cut);
        self.traj.states.drain(..cut);
        self.traj.derivs.drain(..cut);
        self.traj.dense_from = self.traj.dense_from.saturating_sub(cut);
        self.traj.start = self.traj.start.max(self.traj.times[0]);
    }
}

/// Integrates any [`DelaySystem`] from `t = 0` to `cfg.t_end`.
pub fn integrate_system<S: DelaySystem + ?Sized>(
    sys: &S,
    history: &HistoryFunction,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    let mut stepper = Stepper::new(sys, history, cfg, 0.0)?;
    stepper.advance_to(cfg.t_end)?;
    Ok(stepper.into_trajectory())
}

/// Integrates the model and checks the a priori growth envelope
/// `C(t) <= 1.05 max(C on history) exp(gamma t)`.
pub fn integrate(p: &ModelParams, history: &HistoryFunction, cfg: &IntegratorConfig) -> Result<Trajectory> {
    p.validate()?;
    let traj = integrate_system(p, history, cfg)?;
    check_envelope(&traj, p)?;
    Ok(traj)
}

fn check_envelope(traj: &Trajectory, p: &ModelParams) -> Result<()> {
    let c_max = traj.history().max_c();
    for (t, x) in traj.solution_nodes() {
        let bound = 1.05 * c_max * (p.gamma * (t - traj.t0())).exp();
        if x.c > bound {
            return Err(Error::EnvelopeViolated {
                t,
                value: x.c,
                bound,
            });
        }
    }
    Ok(())
}

/// Free-function form of [`Trajectory::evaluate`].
pub fn evaluate(traj: &Trajectory, t: f64) -> Result<StateVec> {
    traj.evaluate(t)
}

/// Empirical convergence order measurement.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub steps: Vec<f64>,
    /// Error against the exact solution, or difference between consecutive
    /// refinements when no exact solution is supplied.
    pub errors: Vec<f64>,
    pub orders: Vec<f64>,
    /// Order from the finest pair; `None` when every error is at round-off.
    pub observed: Option<f64>,
    pub exact: bool,
    pub monotone: bool,
}

/// Measures the convergence order over a sequence of decreasing steps.
///
/// With `exact`, errors are measured against it on a 65-point grid of
/// `[0, t_end]`; otherwise successive solutions are differenced
/// (Richardson). Each step must divide the delay when it is positive.
pub fn convergence_order<S: DelaySystem + ?Sized>(
    sys: &S,
    history: &HistoryFunction,
    t_end: f64,
    steps: &[f64],
    exact: Option<&dyn Fn(f64) -> StateVec>,
) -> Result<ConvergenceReport> {
    if steps.len() < 3 {
        return Err(Error::InvalidConfig("need at least three step sizes".into()));
    }
    let tau = sys.delay();
    if tau > 0.0 {
        for &h in steps {
            let m = tau / h;
            if (m - m.round()).abs() > 1e-9 * m.max(1.0) {
                return Err(Error::InvalidConfig(format!("step {h} does not divide tau = {tau}")));
            }
        }
    }
    let grid: Vec<f64> = (0..=64).map(|i| t_end * i as f64 / 64.0).collect();
    let mut samples = Vec::with_capacity(steps.len());
    for &h in steps {
        let mut cfg = IntegratorConfig::new(h, t_end);
        cfg.max_norm = f64::MAX;
        let traj = integrate_system(sys, history, &cfg)?;
        let xs = grid
            .iter()
            .map(|&t| traj.evaluate(t))
            .collect::<Result<Vec<_>>>()?;
        samples.push(xs);
    }
    let max_diff = |a: &[StateVec], b: &[StateVec]| {
        a.iter()
            .zip(b)
            .map(|(x, y)| (*x - *y).norm_inf())
            .fold(0.0, f64::max)
    };
    let (errors, ratios_h): (Vec<f64>, Vec<f64>) = match exact {
        Some(f) => {
            let truth: Vec<StateVec> = grid.iter().map(|&t| f(t)).collect();
            (
                samples.iter().map(|s| max_diff(s, &truth)).collect(),
                steps.to_vec(),
            )
        }
        None => (
            samples.windows(2).map(|w| max_diff(&w[0], &w[1])).collect(),
            steps[..steps.len() - 1].to_vec(),
        ),
    };
    let scale = samples
        .iter()
        .flatten()
        .map(|x| x.norm_inf())
        .fold(1.0, f64::max);
    let exact_hit = errors.iter().all(|&e| e <= 1e-13 * scale);
    let orders: Vec<f64> = errors
        .windows(2)
        .zip(ratios_h.windows(2))
        .map(|(e, h)| (e[0] / e[1]).ln() / (h[0] / h[1]).ln())
        .collect();
    let monotone = errors.windows(2).all(|e| e[1] < e[0]);
    Ok(ConvergenceReport {
        steps: steps.to_vec(),
        errors,
        observed: if exact_hit { None } else { orders.last().copied() },
        orders,
        exact: exact_hit,
        monotone,
    })
}
