//! Model definition: parameters, growth and enforcement functions, the
//! delayed right-hand side and the exposed-population diagnostic.
//!
//! The system is
//!
//! ```text
//! N'(t) = N f(N) - phi N C / (nu + N) + sigma N C
//! C'(t) = -(eta + l_e(t)) C + gamma N(t - tau) C(t - tau) / (nu + N(t - tau))
//! ```
//!
//! where `N` is the non-criminal and `C` the criminal population.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrator::Trajectory;
use crate::quadrature;

/// Values within this distance below zero are treated as floating point dust.
pub const CLAMP_TOLERANCE: f64 = 1e-12;

/// Population pair `(N, C)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct StateVec {
    pub n: f64,
    pub c: f64,
}

impl StateVec {
    pub const ZERO: StateVec = StateVec { n: 0.0, c: 0.0 };

    pub const fn new(n: f64, c: f64) -> Self {
        Self { n, c }
    }

    pub fn norm_inf(self) -> f64 {
        self.n.abs().max(self.c.abs())
    }

    pub fn is_finite(self) -> bool {
        self.n.is_finite() && self.c.is_finite()
    }

    pub fn min_component(self) -> f64 {
        self.n.min(self.c)
    }

    /// Zeroes components in `[-CLAMP_TOLERANCE, 0)`; anything more negative is
    /// an error.
    pub fn clamp_dust(self) -> Result<Self> {
        let fix = |v: f64| -> Result<f64> {
            if v >= 0.0 {
                Ok(v)
            } else if v >= -CLAMP_TOLERANCE {
                Ok(0.0)
            } else {
                Err(Error::Domain(format!("negative population {v:e}")))
            }
        };
        Ok(StateVec::new(fix(self.n)?, fix(self.c)?))
    }
}

impl Add for StateVec {
    type Output = StateVec;
    fn add(self, rhs: StateVec) -> StateVec {
        StateVec::new(self.n + rhs.n, self.c + rhs.c)
    }
}

impl Sub for StateVec {
    type Output = StateVec;
    fn sub(self, rhs: StateVec) -> StateVec {
        StateVec::new(self.n - rhs.n, self.c - rhs.c)
    }
}

impl Mul<f64> for StateVec {
    type Output = StateVec;
    fn mul(self, k: f64) -> StateVec {
        StateVec::new(self.n * k, self.c * k)
    }
}

impl Mul<StateVec> for f64 {
    type Output = StateVec;
    fn mul(self, x: StateVec) -> StateVec {
        x * self
    }
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// User supplied relative growth rate together with its derivative.
#[derive(Clone)]
pub struct CustomGrowth {
    f: ScalarFn,
    df: ScalarFn,
    unbounded_below: bool,
}

/// Relative growth rate `f(N)` of the non-criminal population.
///
/// Admissible functions have `f(0) > 0`, are strictly decreasing on
/// `(0, inf)` and have exactly one positive zero.
#[derive(Clone)]
pub enum GrowthFunction {
    /// `f(N) = mu (m - N)`.
    Logistic { mu: f64, m: f64 },
    Custom(CustomGrowth),
}

impl fmt::Debug for GrowthFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GrowthFunction::Logistic { mu, m } => f
                .debug_struct("Logistic")
                .field("mu", mu)
                .field("m", m)
                .finish(),
            GrowthFunction::Custom(c) => f
                .debug_struct("Custom")
                .field("unbounded_below", &c.unbounded_below)
                .finish_non_exhaustive(),
        }
    }
}

impl GrowthFunction {
    pub fn logistic(mu: f64, m: f64) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::param("mu", "must be positive"));
        }
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::param("m", "must be positive"));
        }
        Ok(GrowthFunction::Logistic { mu, m })
    }

    /// `unbounded_below` records whether `f(N) -> -inf` as `N -> inf`; it is
    /// reported by the periodic-solution ledger and not checked numerically.
    pub fn custom<F, D>(f: F, df: D, unbounded_below: bool) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let g = GrowthFunction::Custom(CustomGrowth {
            f: Arc::new(f),
            df: Arc::new(df),
            unbounded_below,
        });
        g.validate()?;
        Ok(g)
    }

    pub fn value(&self, n: f64) -> f64 {
        match self {
            GrowthFunction::Logistic { mu, m } => mu * (m - n),
            GrowthFunction::Custom(c) => (c.f)(n),
        }
    }

    pub fn derivative(&self, n: f64) -> f64 {
        match self {
            GrowthFunction::Logistic { mu, .. } => -mu,
            GrowthFunction::Custom(c) => (c.df)(n),
        }
    }

    pub fn unbounded_below(&self) -> bool {
        match self {
            GrowthFunction::Logistic { .. } => true,
            GrowthFunction::Custom(c) => c.unbounded_below,
        }
    }

    /// Largest value on `[0, inf)`; equal to `f(0)` for a decreasing `f`.
    pub fn max_value(&self) -> f64 {
        self.value(0.0)
    }

    /// Checks `f(0) > 0`, `f' < 0` on a geometric test grid and the sign change
    /// that brackets the positive zero.
    pub fn validate(&self) -> Result<()> {
        let f0 = self.value(0.0);
        if !(f0 > 0.0 && f0.is_finite()) {
            return Err(Error::InvalidGrowth(format!("f(0) = {f0} must be positive")));
        }
        let mut s = 1e-6;
        while s < 1e4 {
            let d = self.derivative(s);
            if !(d < 0.0) {
                return Err(Error::InvalidGrowth(format!(
                    "f'({s:e}) = {d} is not negative"
                )));
            }
            s *= 1.5;
        }
        crate::equilibria::criminal_free_level(self).map(|_| ())
    }
}

type SignalFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Signal {
    Sinusoid { amplitude: f64, scale: f64, offset: f64 },
    Tabulated { times: Vec<f64>, values: Vec<f64> },
    Custom(SignalFn),
}

/// A nonnegative `T`-periodic law-enforcement signal with its cached mean.
#[derive(Clone)]
pub struct PeriodicEnforcement {
    signal: Signal,
    period: f64,
    mean: f64,
}

impl PeriodicEnforcement {
    fn build(signal: Signal, period: f64) -> Result<Self> {
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::param("period", "must be positive"));
        }
        let mut p = PeriodicEnforcement {
            signal,
            period,
            mean: 0.0,
        };
        p.mean = match &p.signal {
            Signal::Tabulated { times, values } => {
                // the trapezoid rule is exact for the piecewise linear interpolant
                let mut area = 0.0;
                for i in 0..times.len() {
                    let (t_next, v_next) = if i + 1 < times.len() {
                        (times[i + 1], values[i + 1])
                    } else {
                        (period, values[0])
                    };
                    area += 0.5 * (values[i] + v_next) * (t_next - times[i]);
                }
                area / period
            }
            _ => quadrature::periodic_mean(|t| p.value(t), period, 4096),
        };
        for k in 0..1024 {
            let t = period * k as f64 / 1024.0;
            let v = p.value(t);
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::param(
                    "enforcement",
                    format!("l_e({t}) = {v} is negative or not finite"),
                ));
            }
        }
        Ok(p)
    }

    pub fn value(&self, t: f64) -> f64 {
        match &self.signal {
            Signal::Sinusoid {
                amplitude,
                scale,
                offset,
            } => amplitude * (t / scale).sin() + offset,
            Signal::Tabulated { times, values } => {
                let s = t.rem_euclid(self.period);
                let i = times.partition_point(|&x| x <= s).saturating_sub(1);
                let (t1, v1) = if i + 1 < times.len() {
                    (times[i + 1], values[i + 1])
                } else {
                    (self.period, values[0])
                };
                let w = (s - times[i]) / (t1 - times[i]);
                values[i] + w * (v1 - values[i])
            }
            Signal::Custom(f) => f(t),
        }
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }
}

/// Law-enforcement removal rate `l_e(t)`.
#[derive(Clone)]
pub enum LawEnforcement {
    Constant(f64),
    Periodic(PeriodicEnforcement),
}

impl fmt::Debug for LawEnforcement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LawEnforcement::Constant(v) => f.debug_tuple("Constant").field(v).finish(),
            LawEnforcement::Periodic(p) => {
                let kind = match &p.signal {
                    Signal::Sinusoid { .. } => "sinusoid",
                    Signal::Tabulated { .. } => "tabulated",
                    Signal::Custom(_) => "custom",
                };
                f.debug_struct("Periodic")
                    .field("kind", &kind)
                    .field("period", &p.period)
                    .field("mean", &p.mean)
                    .finish()
            }
        }
    }
}

impl LawEnforcement {
    pub fn constant(value: f64) -> Result<Self> {
        if !(value >= 0.0 && value.is_finite()) {
            return Err(Error::param("l_e", "must be nonnegative"));
        }
        Ok(LawEnforcement::Constant(value))
    }

    /// `amplitude * sin(t / scale) + offset`, with period `2 pi scale`.
    pub fn sinusoid(amplitude: f64, scale: f64, offset: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::param("scale", "must be positive"));
        }
        if !(amplitude.is_finite() && offset.is_finite()) {
            return Err(Error::param("amplitude", "must be finite"));
        }
        let signal = Signal::Sinusoid {
            amplitude,
            scale,
            offset,
        };
        PeriodicEnforcement::build(signal, 2.0 * PI * scale).map(LawEnforcement::Periodic)
    }

    /// Piecewise linear signal through `(times[i], values[i])`, repeated with
    /// the given period. The last sample connects back to `values[0]` at
    /// `t = period`.
    pub fn tabulated(times: Vec<f64>, values: Vec<f64>, period: f64) -> Result<Self> {
        if times.is_empty() || times.len() != values.len() {
            return Err(Error::param(
                "enforcement",
                "table needs matching, non-empty time and value columns",
            ));
        }
        if times[0] != 0.0 {
            return Err(Error::param("enforcement", "table must start at t = 0"));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) || *times.last().unwrap() >= period {
            return Err(Error::param(
                "enforcement",
                "table times must increase strictly and stay below the period",
            ));
        }
        PeriodicEnforcement::build(Signal::Tabulated { times, values }, period)
            .map(LawEnforcement::Periodic)
    }

    pub fn periodic_fn<F>(f: F, period: f64) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        PeriodicEnforcement::build(Signal::Custom(Arc::new(f)), period)
            .map(LawEnforcement::Periodic)
    }

    pub fn value(&self, t: f64) -> f64 {
        match self {
            LawEnforcement::Constant(v) => *v,
            LawEnforcement::Periodic(p) => p.value(t),
        }
    }

    /// Average over one period (the value itself when constant).
    pub fn mean(&self) -> f64 {
        match self {
            LawEnforcement::Constant(v) => *v,
            LawEnforcement::Periodic(p) => p.mean,
        }
    }

    pub fn period(&self) -> Option<f64> {
        match self {
            LawEnforcement::Constant(_) => None,
            LawEnforcement::Periodic(p) => Some(p.period),
        }
    }
}

/// Scalar parameters of the model plus its growth and enforcement functions.
#[derive(Debug, Clone)]
pub struct ModelParams {
    /// Maximum victimization rate.
    pub phi: f64,
    /// Half-saturation constant of the Holling response.
    pub nu: f64,
    /// Counteroffensive rate.
    pub sigma: f64,
    /// Natural mortality of the criminal population.
    pub eta: f64,
    /// Criminalization rate.
    pub gamma: f64,
    /// Delay between exposure and recruitment.
    pub tau: f64,
    pub growth: GrowthFunction,
    pub enforcement: LawEnforcement,
}

impl ModelParams {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        phi: f64,
        nu: f64,
        sigma: f64,
        eta: f64,
        gamma: f64,
        tau: f64,
        growth: GrowthFunction,
        enforcement: LawEnforcement,
    ) -> Result<Self> {
        let p = ModelParams {
            phi,
            nu,
            sigma,
            eta,
            gamma,
            tau,
            growth,
            enforcement,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &'static str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::param(name, format!("must be positive, got {v}")))
            }
        };
        let nonneg = |name: &'static str, v: f64| {
            if v >= 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::param(name, format!("must be nonnegative, got {v}")))
            }
        };
        positive("phi", self.phi)?;
        positive("nu", self.nu)?;
        nonneg("sigma", self.sigma)?;
        positive("eta", self.eta)?;
        positive("gamma", self.gamma)?;
        nonneg("tau", self.tau)?;
        if let LawEnforcement::Constant(v) = self.enforcement {
            nonneg("l_e", v)?;
        }
        if let GrowthFunction::Logistic { mu, m } = self.growth {
            positive("mu", mu)?;
            positive("m", m)?;
        }
        Ok(())
    }

    /// The constant enforcement level, or an error when it varies in time.
    pub fn frozen_enforcement(&self) -> Result<f64> {
        match self.enforcement {
            LawEnforcement::Constant(v) => Ok(v),
            LawEnforcement::Periodic(_) => Err(Error::RequiresConstantEnforcement),
        }
    }

    /// `eta + mean(l_e)`: the averaged per-capita removal rate of criminals.
    pub fn mean_removal(&self) -> f64 {
        self.eta + self.enforcement.mean()
    }

    pub fn with_tau(&self, tau: f64) -> Self {
        ModelParams {
            tau,
            ..self.clone()
        }
    }
}

/// Initial data on `[-tau, 0]`.
#[derive(Debug, Clone, PartialEq)]
pub enum HistoryFunction {
    Constant(StateVec),
    /// Linearly interpolated samples; `times` increasing and covering `[-tau, 0]`.
    Sampled { times: Vec<f64>, states: Vec<StateVec> },
}

impl HistoryFunction {
    pub fn constant(n: f64, c: f64) -> Self {
        HistoryFunction::Constant(StateVec::new(n, c))
    }

    pub fn eval(&self, s: f64) -> StateVec {
        match self {
            HistoryFunction::Constant(x) => *x,
            HistoryFunction::Sampled { times, states } => {
                let i = times.partition_point(|&x| x <= s);
                if i == 0 {
                    return states[0];
                }
                if i >= times.len() {
                    return *states.last().unwrap();
                }
                let w = (s - times[i - 1]) / (times[i] - times[i - 1]);
                states[i - 1] + (states[i] - states[i - 1]) * w
            }
        }
    }

    pub fn slope(&self, s: f64) -> StateVec {
        match self {
            HistoryFunction::Constant(_) => StateVec::ZERO,
            HistoryFunction::Sampled { times, states } => {
                if times.len() < 2 {
                    return StateVec::ZERO;
                }
                let i = times.partition_point(|&x| x < s).clamp(1, times.len() - 1);
                (states[i] - states[i - 1]) * (1.0 / (times[i] - times[i - 1]))
            }
        }
    }

    /// Sample times strictly inside `(a, b)`, for piecewise quadrature.
    pub(crate) fn breakpoints_within(&self, a: f64, b: f64) -> Vec<f64> {
        match self {
            HistoryFunction::Constant(_) => Vec::new(),
            HistoryFunction::Sampled { times, .. } => {
                times.iter().copied().filter(|&t| t > a && t < b).collect()
            }
        }
    }

    pub fn validate(&self, tau: f64, nonnegative: bool) -> Result<()> {
        if let HistoryFunction::Sampled { times, states } = self {
            if times.is_empty() || times.len() != states.len() {
                return Err(Error::InvalidHistory(
                    "sampled history needs matching, non-empty columns".into(),
                ));
            }
            if times.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(Error::InvalidHistory("times must increase strictly".into()));
            }
            let tol = 1e-12 * tau.max(1.0);
            if times[0] > -tau + tol || *times.last().unwrap() < -tol {
                return Err(Error::InvalidHistory(format!(
                    "samples span [{}, {}], need [-{tau}, 0]",
                    times[0],
                    times.last().unwrap()
                )));
            }
        }
        let states: Vec<StateVec> = match self {
            HistoryFunction::Constant(x) => vec![*x],
            HistoryFunction::Sampled { states, .. } => states.clone(),
        };
        if states.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidHistory("non-finite sample".into()));
        }
        if nonnegative {
            if states.iter().any(|x| x.min_component() < 0.0) {
                return Err(Error::InvalidHistory("populations must be nonnegative".into()));
            }
            let x0 = self.eval(0.0);
            if !(x0.n > 0.0 && x0.c > 0.0) {
                return Err(Error::InvalidHistory(
                    "both populations must be positive at s = 0".into(),
                ));
            }
        }
        Ok(())
    }

    /// Largest criminal population over the history window.
    pub fn max_c(&self) -> f64 {
        match self {
            HistoryFunction::Constant(x) => x.c,
            HistoryFunction::Sampled { states, .. } => {
                states.iter().map(|x| x.c).fold(f64::NEG_INFINITY, f64::max)
            }
        }
    }
}

/// Holling type II rate `s / (nu + n)`.
pub fn holling(s: f64, nu: f64, n: f64) -> Result<f64> {
    let d = nu + n;
    if !(d > 0.0) {
        return Err(Error::Domain(format!("nu + n = {d} must be positive")));
    }
    Ok(s / d)
}

/// Derivative of [`holling`] with respect to `n`.
pub fn holling_derivative(s: f64, nu: f64, n: f64) -> Result<f64> {
    let d = nu + n;
    if !(d > 0.0) {
        return Err(Error::Domain(format!("nu + n = {d} must be positive")));
    }
    Ok(-s / (d * d))
}

/// Right-hand side of the delayed system.
pub fn rhs(t: f64, x: StateVec, x_delayed: StateVec, p: &ModelParams) -> Result<StateVec> {
    let x = x.clamp_dust()?;
    let xd = x_delayed.clamp_dust()?;
    let victimization = holling(p.phi, p.nu, x.n)?;
    let recruitment = holling(p.gamma, p.nu, xd.n)?;
    let dn = x.n * p.growth.value(x.n) - victimization * x.n * x.c + p.sigma * x.n * x.c;
    let dc = -(p.eta + p.enforcement.value(t)) * x.c + recruitment * xd.n * xd.c;
    let out = StateVec::new(dn, dc);
    if !out.is_finite() {
        return Err(Error::NonFinite { t });
    }
    Ok(out)
}

/// Exposed population `E(t)`: individuals who met the criminal population but
/// have not been recruited yet,
///
/// ```text
/// E(t) = int_{t0-tau}^{t-tau} (phi - gamma) h(s) ds + int_{t-tau}^{t} phi h(s) ds,
/// h(s) = N(s) C(s) / (nu + N(s)).
/// ```
///
/// Integrated piecewise over the trajectory mesh with Gauss-Legendre rules.
pub fn exposed_population(traj: &Trajectory, p: &ModelParams, t: f64) -> Result<f64> {
    let tau = traj.tau();
    if tau == 0.0 {
        return Ok(0.0);
    }
    let lo = traj.t0() - tau;
    if t < traj.t0() || t > traj.t1() || traj.start() > lo {
        return Err(Error::OutOfRange {
            t,
            start: traj.start() + tau,
            end: traj.t1(),
        });
    }
    let contact = |s: f64| -> f64 {
        let x = traj.evaluate(s).expect("quadrature node inside trajectory window");
        x.n * x.c / (p.nu + x.n)
    };
    let recruited = traj.integrate_over(&contact, lo, t - tau)?;
    let pending = traj.integrate_over(&contact, t - tau, t)?;
    Ok((p.phi - p.gamma) * recruited + p.phi * pending)
}
