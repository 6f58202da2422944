//! Scenario execution: one function per command, all writing into an
//! [`OutputDir`] and finishing with a manifest.

use std::path::PathBuf;

use crimedde::equilibria::{self, Admissibility};
use crimedde::integrator::{exposed_series, integrate, IntegratorConfig, Trajectory};
use crimedde::model::{HistoryFunction, ModelParams, StateVec};
use crimedde::periodic::{
    self, average_identity_check, delayed_average_identity_check, degree_certificate, find_periodic,
    PeriodicOptions, PeriodicOrbitResult,
};
use crimedde::stability::{self, EquilibriumId};
use serde::Serialize;

use crate::config::{self, Command, Format, LoadedConfig};
use crate::error::{CliError, CliResult};
use crate::output::{field, gnuplot_stub, num, sha256_hex, Artifact, Manifest, OutputDir};
use crate::report::strategy_report;
use crate::sweep::{self, stability_rows, SweepPlan, STABILITY_HEADER};

/// Settings from the command line, overriding the scenario file.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    /// Sweep workers; 0 uses the available parallelism.
    pub threads: usize,
}

#[derive(Debug, Clone)]
pub enum RunSpec {
    Simulate,
    Equilibria,
    Stability,
    Periodic(PeriodicOptions),
    Sweep(SweepPlan),
    Report,
}

/// A validated scenario ready to run.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub command: Command,
    pub params: ModelParams,
    pub history: HistoryFunction,
    pub integrator: IntegratorConfig,
    pub stride: usize,
    pub run: RunSpec,
    pub dir: PathBuf,
    pub format: Format,
}

impl Scenario {
    pub fn build(loaded: &LoadedConfig, command: Command, opts: &RunOptions) -> CliResult<Scenario> {
        let c = &loaded.config;
        let params = c.model_params(&loaded.base_dir)?;
        let history = c.history(params.tau)?;
        let integrator = c.integrator()?;
        let run = match command {
            Command::Simulate => RunSpec::Simulate,
            Command::Equilibria => RunSpec::Equilibria,
            Command::Stability => RunSpec::Stability,
            Command::Periodic => RunSpec::Periodic(c.periodic_options()?),
            Command::Sweep => {
                let s = c
                    .sweep
                    .as_ref()
                    .ok_or_else(|| CliError::config("the sweep command needs a [sweep] section"))?;
                RunSpec::Sweep(SweepPlan::from_config(s)?)
            }
            Command::Report => RunSpec::Report,
        };
        let dir = opts
            .out
            .clone()
            .or_else(|| c.output.dir.clone())
            .unwrap_or_else(|| PathBuf::from("out").join(&c.name));
        Ok(Scenario {
            name: c.name.clone(),
            command,
            params,
            history,
            integrator,
            stride: c.integrator.stride,
            run,
            dir,
            format: opts.format.unwrap_or(c.output.format),
        })
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub command: Command,
    pub dir: PathBuf,
    pub artifacts: Vec<Artifact>,
    /// Human-readable lines for the terminal.
    pub summary: Vec<String>,
}

/// Loads `spec` (a path or bundled name), runs it and writes all artifacts.
/// Without an explicit command the scenario's `run` key decides.
pub fn run_scenario(spec: &str, command: Option<Command>, opts: &RunOptions) -> CliResult<RunOutcome> {
    let loaded = config::load(spec)?;
    let command = command
        .or(loaded.config.run)
        .ok_or_else(|| CliError::config(format!("{spec}: no command given and no `run` key in the scenario")))?;
    let scenario = Scenario::build(&loaded, command, opts)?;
    let config_sha = sha256_hex(loaded.source.as_bytes());
    let mut out = OutputDir::create(&scenario.dir, config_sha.clone())?;
    let summary = match &scenario.run {
        RunSpec::Simulate => simulate(&scenario, &mut out)?,
        RunSpec::Equilibria => write_equilibria(&scenario, &mut out)?,
        RunSpec::Stability => write_stability(&scenario, &mut out)?,
        RunSpec::Periodic(o) => write_periodic(&scenario, o, &mut out)?,
        RunSpec::Sweep(plan) => write_sweep(&scenario, plan, opts.threads, &mut out)?,
        RunSpec::Report => write_report(&scenario, &mut out)?,
    };
    let manifest = Manifest {
        tool: "crimedde",
        version: env!("CARGO_PKG_VERSION"),
        command: command.as_str().to_string(),
        scenario: scenario.name.clone(),
        config_origin: loaded.origin.clone(),
        config_sha256: config_sha,
        format: scenario.format.extension().to_string(),
        inputs: serde_json::to_value(&loaded.config)
            .map_err(|e| CliError::config(format!("cannot record inputs: {e}")))?,
        artifacts: Vec::new(),
    };
    let dir = out.path().to_path_buf();
    let artifacts = out.finish(manifest)?;
    Ok(RunOutcome {
        command,
        dir,
        artifacts,
        summary,
    })
}

#[derive(Serialize)]
struct Columns {
    t: Vec<f64>,
    #[serde(rename = "N")]
    n: Vec<f64>,
    #[serde(rename = "C")]
    c: Vec<f64>,
    #[serde(rename = "E", skip_serializing_if = "Option::is_none")]
    e: Option<Vec<f64>>,
}

fn columns(traj: &Trajectory, from: f64, to: f64, stride: usize, exposed: Option<&[f64]>) -> Columns {
    let nodes: Vec<(usize, (f64, StateVec))> = traj
        .solution_nodes()
        .enumerate()
        .filter(|(_, (t, _))| *t >= from && *t <= to)
        .collect();
    let last = nodes.len().saturating_sub(1);
    let picked: Vec<&(usize, (f64, StateVec))> = nodes
        .iter()
        .enumerate()
        .filter(|(k, _)| k % stride == 0 || *k == last)
        .map(|(_, x)| x)
        .collect();
    Columns {
        t: picked.iter().map(|(_, (t, _))| *t).collect(),
        n: picked.iter().map(|(_, (_, x))| x.n).collect(),
        c: picked.iter().map(|(_, (_, x))| x.c).collect(),
        e: exposed.map(|e| picked.iter().map(|(i, _)| e[*i]).collect()),
    }
}

fn csv_columns(cols: &Columns) -> String {
    let mut s = String::from(if cols.e.is_some() { "t,N,C,E\n" } else { "t,N,C\n" });
    for i in 0..cols.t.len() {
        s.push_str(&format!("{},{},{}", num(cols.t[i]), num(cols.n[i]), num(cols.c[i])));
        if let Some(e) = &cols.e {
            s.push(',');
            s.push_str(&num(e[i]));
        }
        s.push('\n');
    }
    s
}

#[derive(Serialize)]
struct SimulationSummary {
    t_end: f64,
    step: f64,
    final_state: StateVec,
    min_raw: f64,
}

fn simulate(s: &Scenario, out: &mut OutputDir) -> CliResult<Vec<String>> {
    let traj = integrate(&s.params, &s.history, &s.integrator)?;
    let exposed = exposed_series(&traj, &s.params)?;
    let cols = columns(&traj, 0.0, s.integrator.t_end, s.stride, Some(&exposed));
    let file = format!("trajectory.{}", s.format.extension());
    match s.format {
        Format::Csv => {
            out.write(&file, csv_columns(&cols).as_bytes())?;
            out.write("plot.gp", gnuplot_stub(&file, &s.name, &["N", "C", "E"]).as_bytes())?;
        }
        Format::Json => {
            out.write_json(&file, &cols)?;
        }
    }
    let x = traj.final_state();
    out.write_json(
        "summary.json",
        &SimulationSummary {
            t_end: s.integrator.t_end,
            step: traj.step(),
            final_state: x,
            min_raw: traj.min_raw(),
        },
    )?;
    Ok(vec![format!(
        "{}: t = {} reached, (N, C) = ({:.6}, {:.6})",
        s.name, s.integrator.t_end, x.n, x.c
    )])
}

fn write_equilibria(s: &Scenario, out: &mut OutputDir) -> CliResult<Vec<String>> {
    let set = equilibria::equilibria(&s.params)?;
    let co = &set.coexistence;
    let (class, reason) = match &co.class {
        Admissibility::CaseI => ("case_i", String::new()),
        Admissibility::CaseII => ("case_ii", String::new()),
        Admissibility::Inadmissible(r) => ("inadmissible", r.clone()),
    };
    match s.format {
        Format::Csv => {
            let mut text = String::from("equilibrium,n,c,admissibility,reason\n");
            text.push_str(&format!("trivial,{},{},admissible,\n", num(set.trivial.n), num(set.trivial.c)));
            text.push_str(&format!(
                "criminal_free,{},{},admissible,\n",
                num(set.criminal_free.n),
                num(set.criminal_free.c)
            ));
            let (n, c) = co.point.map(|x| (num(x.n), num(x.c))).unwrap_or_default();
            text.push_str(&format!("coexistence,{n},{c},{class},{}\n", field(&reason)));
            out.write("equilibria.csv", text.as_bytes())?;
        }
        Format::Json => {
            out.write_json("equilibria.json", &set)?;
        }
    }
    let co_line = match co.point {
        Some(x) => format!("coexistence ({:.6}, {:.6}) [{class}]", x.n, x.c),
        None => format!("no coexistence equilibrium ({reason})"),
    };
    Ok(vec![format!(
        "{}: criminal-free ({:.6}, 0); {co_line}",
        s.name, set.criminal_free.n
    )])
}

fn write_stability(s: &Scenario, out: &mut OutputDir) -> CliResult<Vec<String>> {
    let ids = [EquilibriumId::Trivial, EquilibriumId::CriminalFree, EquilibriumId::Coexistence];
    let mut analyses = Vec::new();
    for id in ids {
        match stability::analyze(id, &s.params) {
            Ok(a) => analyses.push(a),
            Err(e) if e.is_numeric_fault() => return Err(e.into()),
            Err(_) => {}
        }
    }
    let rows = stability_rows(&s.params, &ids);
    match s.format {
        Format::Csv => {
            let mut text = format!("{STABILITY_HEADER}\n");
            for r in &rows {
                text.push_str(&r.csv());
                text.push('\n');
            }
            out.write("stability.csv", text.as_bytes())?;
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Report<'a> {
                tau: f64,
                rows: &'a [sweep::StabilityRow],
                analyses: &'a [stability::CharacteristicAnalysis],
            }
            out.write_json(
                "stability.json",
                &Report {
                    tau: s.params.tau,
                    rows: &rows,
                    analyses: &analyses,
                },
            )?;
        }
    }
    Ok(analyses
        .iter()
        .map(|a| {
            let stable = match a.verdict.regime.stable_at(s.params.tau) {
                Some(true) => "stable",
                Some(false) => "unstable",
                None => "undetermined",
            };
            format!(
                "{}: {} {} ({}) at tau = {}",
                s.name,
                a.equilibrium.as_str(),
                a.verdict.regime.label(),
                stable,
                s.params.tau
            )
        })
        .collect())
}

#[derive(Serialize)]
struct OrbitSummary {
    period: f64,
    forcing_period: f64,
    multiple: usize,
    t_start: f64,
    fixed_point: StateVec,
    residual: f64,
    positive: bool,
    min_n: f64,
    max_n: f64,
    min_c: f64,
    iterations: usize,
    average_identity_defect: f64,
    delayed_average_identity_defect: f64,
}

#[derive(Serialize)]
#[serde(rename_all = "snake_case")]
enum Certificate {
    Certificate(periodic::DegreeCertificate),
    Unavailable(String),
}

#[derive(Serialize)]
struct PeriodicReport {
    ledger: periodic::ConditionLedger,
    degree: Certificate,
    orbit: OrbitSummary,
}

fn orbit_summary(r: &PeriodicOrbitResult, p: &ModelParams) -> CliResult<OrbitSummary> {
    Ok(OrbitSummary {
        period: r.period,
        forcing_period: r.forcing_period,
        multiple: r.multiple,
        t_start: r.t_start,
        fixed_point: r.fixed_point,
        residual: r.residual,
        positive: r.positive,
        min_n: r.min_n,
        max_n: r.max_n,
        min_c: r.min_c,
        iterations: r.iterations,
        average_identity_defect: average_identity_check(r, p)?,
        delayed_average_identity_defect: delayed_average_identity_check(r, p)?,
    })
}

fn write_periodic(s: &Scenario, opts: &PeriodicOptions, out: &mut OutputDir) -> CliResult<Vec<String>> {
    let ledger = periodic::ledger(&s.params)?;
    let degree = match degree_certificate(&s.params) {
        Ok(c) => Certificate::Certificate(c),
        Err(e) => Certificate::Unavailable(e.to_string()),
    };
    let r = find_periodic(&s.params, &s.history, opts)?;
    let cols = columns(&r.orbit, r.t_start, r.t_start + r.period, 1, None);
    let file = format!("orbit.{}", s.format.extension());
    match s.format {
        Format::Csv => {
            out.write(&file, csv_columns(&cols).as_bytes())?;
            out.write("plot.gp", gnuplot_stub(&file, &s.name, &["N", "C"]).as_bytes())?;
        }
        Format::Json => {
            out.write_json(&file, &cols)?;
        }
    }
    let report = PeriodicReport {
        orbit: orbit_summary(&r, &s.params)?,
        ledger,
        degree,
    };
    out.write_json("ledger.json", &report)?;
    Ok(vec![format!(
        "{}: periodic orbit of period {:.6} ({} x forcing period), residual {:.3e}, N in [{:.6}, {:.6}], min C {:.6}; hypotheses: {:?}",
        s.name, r.period, r.multiple, r.residual, r.min_n, r.max_n, r.min_c, report.ledger.applicable
    )])
}

fn write_sweep(s: &Scenario, plan: &SweepPlan, threads: usize, out: &mut OutputDir) -> CliResult<Vec<String>> {
    let table = sweep::sweep(&s.params, plan, threads)?;
    match s.format {
        Format::Csv => {
            out.write("sweep.csv", table.to_csv().as_bytes())?;
        }
        Format::Json => {
            out.write_json("sweep.json", &table)?;
        }
    }
    Ok(vec![format!(
        "{}: {} grid points over {}",
        s.name,
        table.points.len(),
        table.params.join(" x ")
    )])
}

fn write_report(s: &Scenario, out: &mut OutputDir) -> CliResult<Vec<String>> {
    let r = strategy_report(&s.params)?;
    match s.format {
        Format::Csv => {
            let mut text = String::from("threshold,lhs,rhs,margin,at_threshold,verdict\n");
            for (name, t) in [
                ("crime_control", &r.crime_control_threshold),
                ("persistence", &r.persistence_threshold),
            ] {
                text.push_str(&format!(
                    "{name},{},{},{},{},{}\n",
                    num(t.lhs),
                    num(t.rhs),
                    num(t.margin),
                    t.at_threshold,
                    field(&t.verdict)
                ));
            }
            out.write("strategy.csv", text.as_bytes())?;
        }
        Format::Json => {
            out.write_json("strategy.json", &r)?;
        }
    }
    let mut text = r.narrative.join("\n");
    text.push('\n');
    out.write("strategy.txt", text.as_bytes())?;
    Ok(r.narrative.clone())
}
