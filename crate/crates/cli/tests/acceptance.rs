//! Acceptance checks on the reference scenarios, one PASS or FAIL line each.

use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use crimedde::equilibria;
use crimedde::integrator::{convergence_order, integrate, DelaySystem, IntegratorConfig};
use crimedde::model::{GrowthFunction, HistoryFunction, LawEnforcement, ModelParams, StateVec};
use crimedde::periodic::{self, find_periodic, Applicable, PeriodicOptions, PeriodicOrbitResult};
use crimedde::stability::{self, classify_hf, root_scan, EquilibriumId, Regime, ScanBox, EPS_CLS};
use crimedde_cli::config::{self, BUNDLED};
use crimedde_cli::sweep::{sweep, SweepPlan, SweepRows};
use crimedde_cli::{run_scenario, RunOptions};
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

struct Outcome {
    pass: bool,
    detail: String,
}

type Check = fn() -> Outcome;

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn figure(eta: f64, tau: f64, enforcement: LawEnforcement) -> ModelParams {
    ModelParams::new(
        1.0,
        0.9,
        0.4,
        eta,
        1.4,
        tau,
        GrowthFunction::logistic(1.0, 1.0).unwrap(),
        enforcement,
    )
    .unwrap()
}

fn constant_le(eta: f64) -> ModelParams {
    figure(eta, 2.0, LawEnforcement::constant(0.51).unwrap())
}

fn seasonal(tau: f64) -> ModelParams {
    figure(0.1, tau, LawEnforcement::sinusoid(0.2, 4.0, 0.5).unwrap())
}

fn secs(d: Duration) -> String {
    format!("{:.3} s", d.as_secs_f64())
}

fn coexistence_point() -> Outcome {
    let p = constant_le(0.1);
    let start = Instant::now();
    let point = equilibria::coexistence(&p).unwrap().point;
    let elapsed = start.elapsed();
    let Some(x) = point else {
        return outcome(false, "no coexistence equilibrium".into());
    };
    let ok = (x.n - 0.6949).abs() <= 1e-3 && (x.c - 1.344).abs() <= 1e-3;
    outcome(
        ok && elapsed < Duration::from_millis(1),
        format!("({:.6}, {:.6}) in {:?}", x.n, x.c, elapsed),
    )
}

fn stability_flip() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (eta, start_state, want) in [
        (0.4, (0.3, 1.0), Regime::StableAllTau),
        (0.1, (1.1, 0.1), Regime::UnstableAllTau),
    ] {
        let start = Instant::now();
        let p = constant_le(eta);
        let a = stability::analyze(EquilibriumId::CriminalFree, &p).unwrap();
        let traj = integrate(
            &p,
            &HistoryFunction::constant(start_state.0, start_state.1),
            &IntegratorConfig::new(0.01, 200.0),
        )
        .unwrap();
        let elapsed = start.elapsed();
        let target = StateVec::new(1.0, 0.0);
        let ok = if want == Regime::StableAllTau {
            (traj.final_state() - target).norm_inf() <= 1e-3
        } else {
            traj.solution_nodes().any(|(_, x)| (x.n - target.n).hypot(x.c - target.c) > 5e-2)
        };
        pass &= a.verdict.regime == want && ok && elapsed < Duration::from_secs(1);
        let end = traj.final_state();
        parts.push(format!(
            "eta {eta}: {} ends ({:.6}, {:.6}) in {}",
            a.verdict.regime.label(),
            end.n,
            end.c,
            secs(elapsed)
        ));
    }
    outcome(pass, parts.join("; "))
}

fn random_history(rng: &mut StdRng, tau: f64) -> HistoryFunction {
    if rng.gen_bool(0.5) {
        return HistoryFunction::constant(rng.gen_range(0.01..2.0), rng.gen_range(0.01..2.0));
    }
    let k = rng.gen_range(2..8);
    let times = (0..=k).map(|i| -tau + tau * i as f64 / k as f64).collect();
    let mut states: Vec<StateVec> = (0..=k)
        .map(|_| StateVec::new(rng.gen_range(0.0..2.0), rng.gen_range(0.0..2.0)))
        .collect();
    states[k] = StateVec::new(states[k].n.max(0.05), states[k].c.max(0.05));
    HistoryFunction::Sampled { times, states }
}

fn positivity() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let start = Instant::now();
    let mut worst = f64::INFINITY;
    let mut failures = 0;
    for _ in 0..1000 {
        let phi = rng.gen_range(0.1..2.0);
        let nu = rng.gen_range(0.2..2.0);
        let m = rng.gen_range(0.5..2.0);
        let sigma = rng.gen_range(0.0..1.0) * phi / (nu + 2.0);
        let tau = rng.gen_range(0.05..3.0);
        let le = if rng.gen_bool(0.5) {
            LawEnforcement::constant(rng.gen_range(0.0..1.0)).unwrap()
        } else {
            let offset = rng.gen_range(0.0..1.0);
            LawEnforcement::sinusoid(rng.gen_range(0.0..1.0) * offset, rng.gen_range(0.5..6.0), offset).unwrap()
        };
        let p = ModelParams::new(
            phi,
            nu,
            sigma,
            rng.gen_range(0.01..1.0),
            rng.gen_range(0.1..2.0),
            tau,
            GrowthFunction::logistic(rng.gen_range(0.2..2.0), m).unwrap(),
            le,
        )
        .unwrap();
        let h = random_history(&mut rng, tau);
        let mut cfg = IntegratorConfig::new(0.01, 20.0);
        cfg.max_norm = 1e30;
        match integrate(&p, &h, &cfg) {
            Ok(t) => worst = worst.min(t.min_raw()),
            Err(e) => {
                eprintln!("positivity draw failed: {e}");
                failures += 1
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        failures == 0 && worst >= -1e-10 && elapsed < Duration::from_secs(60),
        format!("min raw {worst:.3e}, {failures} failed runs, {}", secs(elapsed)),
    )
}

struct UnitDelayDecay;

impl DelaySystem for UnitDelayDecay {
    fn delay(&self) -> f64 {
        1.0
    }
    fn derivative(&self, _t: f64, _x: StateVec, d: StateVec) -> crimedde::Result<StateVec> {
        Ok(StateVec::new(-d.n, 0.0))
    }
}

/// `x' = -x(t - 1)`, `x = 1` for `t <= 0`, solved by steps.
fn unit_delay_exact(t: f64) -> f64 {
    if t <= 0.0 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut fact = 1.0;
    for j in 0..=(t.floor() as i32 + 1) {
        if j > 0 {
            fact *= j as f64;
        }
        let base = t - j as f64 + 1.0;
        if base > 0.0 {
            sum += (-1.0f64).powi(j) * base.powi(j) / fact;
        }
    }
    sum
}

fn integrator_order() -> Outcome {
    let start = Instant::now();
    let exact = |t: f64| StateVec::new(unit_delay_exact(t), 0.0);
    let report = convergence_order(
        &UnitDelayDecay,
        &HistoryFunction::constant(1.0, 0.0),
        8.0,
        &[1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0],
        Some(&exact),
    )
    .unwrap();
    let elapsed = start.elapsed();
    let order = report.observed.unwrap_or(f64::NAN);
    outcome(
        (order - 4.0).abs() <= 0.3 && elapsed < Duration::from_secs(1),
        format!("errors {:?}, order {order:.4}, {}", report.errors, secs(elapsed)),
    )
}

/// Roots of `s^4 + h s^2 + f0` by Durand-Kerner.
fn quartic_roots(h: f64, f0: f64) -> [Complex64; 4] {
    let p = |z: Complex64| z * z * z * z + h * z * z + f0;
    let seed = Complex64::new(0.4, 0.9);
    let scale = 1.0 + h.abs().max(f0.abs());
    let mut z = [seed; 4];
    for (k, zk) in z.iter_mut().enumerate() {
        *zk = seed.powu(k as u32) * scale;
    }
    for _ in 0..2000 {
        let mut moved: f64 = 0.0;
        for i in 0..4 {
            let mut den = Complex64::new(1.0, 0.0);
            for j in 0..4 {
                if j != i {
                    den *= z[i] - z[j];
                }
            }
            let step = p(z[i]) / den;
            z[i] -= step;
            moved = moved.max(step.norm());
        }
        if moved < 1e-14 * scale {
            break;
        }
    }
    z
}

fn oracle_positive_roots(h: f64, f0: f64) -> usize {
    quartic_roots(h, f0)
        .iter()
        .filter(|z| z.im.abs() <= 1e-6 * (1.0 + z.norm()) && z.re > 1e-6)
        .count()
}

fn classifier() -> Outcome {
    let mut rng = StdRng::seed_from_u64(42);
    let start = Instant::now();
    let mut mismatches = 0;
    let mut banded = 0;
    for i in 0..10_000 {
        let (h, f0) = if i % 4 == 3 {
            // near the double-root parabola
            let h: f64 = rng.gen_range(-4.0..0.0);
            (h, 0.25 * h * h + rng.gen_range(-1e-3..1e-3))
        } else {
            (rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0))
        };
        let in_band = f0.abs() <= EPS_CLS || (h < EPS_CLS && (0.25 * h * h - f0).abs() <= EPS_CLS);
        if in_band {
            banded += 1;
            continue;
        }
        if classify_hf(h, f0).label.positive_root_count() != oracle_positive_roots(h, f0) {
            mismatches += 1;
        }
    }
    let elapsed = start.elapsed();
    outcome(
        mismatches == 0 && elapsed < Duration::from_secs(10),
        format!("{mismatches} mismatches, {banded} in band, {}", secs(elapsed)),
    )
}

fn crossing() -> Outcome {
    let start = Instant::now();
    let a = stability::analyze(EquilibriumId::CriminalFree, &constant_le(0.1)).unwrap();
    // at (1, 0): omega^2 = (gamma / (nu + 1))^2 - (eta + l_e)^2 = (14/19)^2 - (61/100)^2
    let oracle = (616_719.0f64 / 3_610_000.0).sqrt();
    let Some(x) = a.crossings.get(2).copied() else {
        return outcome(false, "no crossing".into());
    };
    let residual = a.coefficients.p_eval(Complex64::new(0.0, x.lambda2k), x.tauk).norm();
    let w = x.lambda2k;
    let roots = root_scan(&a.coefficients, x.tauk, &ScanBox::new(-0.05, 0.05, w - 0.05, w + 0.05)).unwrap();
    let scanned = roots.len() == 1 && (roots[0] - Complex64::new(0.0, w)).norm() < 1e-6;
    let elapsed = start.elapsed();
    outcome(
        (w - 0.41333).abs() <= 1e-4
            && (w - oracle).abs() <= 1e-10
            && residual <= 1e-9
            && scanned
            && elapsed < Duration::from_secs(5),
        format!(
            "lambda {w:.8} (oracle {oracle:.8}), tau {:.6}, |P| {residual:.2e}, scan {roots:?}, {}",
            x.tauk,
            secs(elapsed)
        ),
    )
}

/// `(gamma / T) int N / (nu + N)` over one orbit period by composite Simpson.
fn recruitment_average(r: &PeriodicOrbitResult, p: &ModelParams) -> f64 {
    let n = 20_000;
    let h = r.period / n as f64;
    let g = |s: f64| {
        let x = r.state_at(s.min(r.period * (1.0 - 1e-15))).unwrap();
        x.n / (p.nu + x.n)
    };
    let mut sum = g(0.0) + g(r.period);
    for i in 1..n {
        sum += g(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    p.gamma * sum * h / 3.0 / r.period
}

fn periodic_orbits() -> Outcome {
    let start = Instant::now();
    let history = HistoryFunction::constant(1.5, 1.5);
    let mut pass = true;
    let mut parts = Vec::new();
    let mut orbits = Vec::new();
    for tau in [0.0, 2.0] {
        let p = seasonal(tau);
        match find_periodic(&p, &history, &PeriodicOptions::default()) {
            Ok(r) => {
                let defect = (recruitment_average(&r, &p) - 0.6).abs();
                pass &= r.residual <= 1e-8 && r.positive && r.min_n > 0.0 && r.min_c > 0.0 && defect <= 1e-6;
                parts.push(format!(
                    "tau {tau}: period {:.4} ({}T), residual {:.1e}, identity defect {defect:.2e}",
                    r.period, r.multiple, r.residual
                ));
                orbits.push(r);
            }
            Err(e) => {
                pass = false;
                parts.push(format!("tau {tau}: {e}"));
            }
        }
    }
    if let [a, b] = &orbits[..] {
        let d = a.distance(b, 4000).unwrap();
        pass &= d > 1e-3;
        parts.push(format!("sup distance {d:.4}"));
    }
    let elapsed = start.elapsed();
    pass &= elapsed < Duration::from_secs(60);
    parts.push(secs(elapsed));
    outcome(pass, parts.join("; "))
}

/// Exact fraction with `i128` parts.
#[derive(Clone, Copy)]
struct Q(i128, i128);

impl Q {
    fn norm(self) -> Q {
        fn gcd(a: i128, b: i128) -> i128 {
            if b == 0 { a.abs() } else { gcd(b, a % b) }
        }
        let g = gcd(self.0, self.1) * self.1.signum();
        Q(self.0 / g, self.1 / g)
    }
    fn add(self, o: Q) -> Q {
        Q(self.0 * o.1 + o.0 * self.1, self.1 * o.1).norm()
    }
    fn sub(self, o: Q) -> Q {
        self.add(Q(-o.0, o.1))
    }
    fn mul(self, o: Q) -> Q {
        Q(self.0 * o.0, self.1 * o.1).norm()
    }
    fn div(self, o: Q) -> Q {
        Q(self.0 * o.1, self.1 * o.0).norm()
    }
    fn f(self) -> f64 {
        self.0 as f64 / self.1 as f64
    }
}

fn ledger() -> Outcome {
    let p = seasonal(2.0);
    let start = Instant::now();
    let l = periodic::ledger(&p).unwrap();
    let elapsed = start.elapsed();
    let (phi, nu, sigma, eta, gamma, mean_le, one) =
        (Q(1, 1), Q(9, 10), Q(2, 5), Q(1, 10), Q(7, 5), Q(1, 2), Q(1, 1));
    let lambda = eta.add(mean_le).div(gamma);
    let k = lambda.mul(nu).div(one.sub(lambda));
    let sigma_margin = phi.div(nu.add(k)).sub(sigma);
    let k_margin = one.sub(k);
    let Some(lk) = l.k else {
        return outcome(false, "K undefined".into());
    };
    let close = |a: f64, b: Q| (a - b.f()).abs() <= 1e-12;
    let thm2 = l.applicable == Applicable::Thm2;
    let ok = close(l.lambda, lambda)
        && close(lk, k)
        && (l.lambda - 0.428571).abs() < 1e-6
        && (lk - 0.675).abs() < 1e-12
        && l.thm2.sigma_small.is_some_and(|c| close(c.margin, sigma_margin))
        && l.thm2.k_below.is_some_and(|c| close(c.margin, k_margin))
        && thm2;
    outcome(
        ok && elapsed < Duration::from_millis(1),
        format!(
            "Lambda {:.12} (= {}/{}), K {lk:.12} (= {}/{}), {:?}, {:?}",
            l.lambda, lambda.0, lambda.1, k.0, k.1, l.applicable, elapsed
        ),
    )
}

fn sweep_boundary() -> Outcome {
    let start = Instant::now();
    let loaded = config::load("stability_map").unwrap();
    let base = loaded.config.model_params(&loaded.base_dir).unwrap();
    let section = loaded.config.sweep.as_ref().unwrap();
    let plan = SweepPlan::from_config(section).unwrap();
    let table = sweep(&base, &plan, 0).unwrap();
    let elapsed = start.elapsed();
    let cell = |i: usize| {
        let a = &section.axes[i];
        (a.max.unwrap() - a.min.unwrap()) / (a.points.unwrap() - 1) as f64
    };
    let slack = cell(0) + cell(1);
    // N_dag (gamma - e) = nu e with N_dag = 1
    let e_star = base.gamma / (base.nu + 1.0);
    let (mut stable, mut unstable, mut far_misses) = (0, 0, 0);
    for point in &table.points {
        let SweepRows::Model(rows) = &point.rows else {
            return outcome(false, "unexpected plane rows".into());
        };
        let e = point.values[0] + point.values[1];
        let is_stable = match rows[0].verdict.as_deref() {
            Some("StableAllTau") => true,
            Some("UnstableAllTau") => false,
            _ => {
                if (e - e_star).abs() > slack {
                    far_misses += 1;
                }
                continue;
            }
        };
        if is_stable {
            stable += 1;
        } else {
            unstable += 1;
        }
        if is_stable != (e > e_star) && (e - e_star).abs() > slack {
            far_misses += 1;
        }
    }
    outcome(
        far_misses == 0 && stable > 0 && unstable > 0 && elapsed < Duration::from_secs(30),
        format!(
            "{} points, {stable} stable, {unstable} unstable, {far_misses} off-boundary disagreements, {}",
            table.points.len(),
            secs(elapsed)
        ),
    )
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    out.sort();
    out
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let mut differing = Vec::new();
    let mut count = 0;
    for (name, _) in BUNDLED {
        let runs: Vec<_> = ["first", "second"]
            .iter()
            .map(|run| {
                let dir = tmp.path().join(name).join(run);
                let opts = RunOptions {
                    out: Some(dir.clone()),
                    ..RunOptions::default()
                };
                run_scenario(name, None, &opts).map(|_| files(&dir))
            })
            .collect();
        match (&runs[0], &runs[1]) {
            (Ok(a), Ok(b)) if a == b => count += a.len(),
            (Ok(_), Ok(_)) => differing.push(name.to_string()),
            (Err(e), _) | (_, Err(e)) => differing.push(format!("{name}: {e}")),
        }
    }
    outcome(
        differing.is_empty(),
        format!("{} scenarios, {count} files compared, differing: {differing:?}", BUNDLED.len()),
    )
}

fn main() {
    let criteria: [(&str, Check); 10] = [
        ("coexistence equilibrium", coexistence_point),
        ("criminal-free stability flip", stability_flip),
        ("positivity", positivity),
        ("integrator order", integrator_order),
        ("root classifier", classifier),
        ("crossing frequency", crossing),
        ("seasonal periodic orbits", periodic_orbits),
        ("condition ledger", ledger),
        ("sweep boundary", sweep_boundary),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!(
            "{} {:>2} {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
