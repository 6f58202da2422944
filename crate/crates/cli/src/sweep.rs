//! Parameter sweeps over stability verdicts.
//!
//! Every grid point is re-solved from scratch: equilibria, characteristic
//! coefficients, root class, verdict and first crossing delays. Points run on
//! a worker pool and rows come back in grid order, first axis slowest.

use crimedde::equilibria::{self, Admissibility};
use crimedde::model::{GrowthFunction, LawEnforcement, ModelParams};
use crimedde::stability::{self, classify_hf, EquilibriumId};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{AxisConfig, SweepSection};
use crate::error::{CliError, CliResult};
use crate::output::{field, num, opt_num};

/// Model parameters a sweep axis can vary.
pub const MODEL_AXES: &[&str] = &["phi", "nu", "sigma", "eta", "gamma", "tau", "le", "mu", "m"];

/// Axes of the synthetic `(h, F(0))` plane; they must be swept together.
pub const PLANE_AXES: &[&str] = &["h", "f0"];

#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub param: String,
    pub values: Vec<f64>,
}

impl Axis {
    pub fn from_config(c: &AxisConfig) -> CliResult<Axis> {
        let values = match (&c.values, c.min, c.max, c.points) {
            (Some(v), None, None, None) => v.clone(),
            (None, Some(lo), Some(hi), Some(n)) => {
                if n == 1 {
                    if lo != hi {
                        return Err(CliError::config(format!(
                            "sweep axis `{}`: a single point needs min = max",
                            c.param
                        )));
                    }
                    vec![lo]
                } else {
                    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
                }
            }
            _ => {
                return Err(CliError::config(format!(
                    "sweep axis `{}`: give either `values` or `min`, `max` and `points`",
                    c.param
                )))
            }
        };
        if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
            return Err(CliError::config(format!(
                "sweep axis `{}` needs at least one finite value",
                c.param
            )));
        }
        Ok(Axis {
            param: c.param.clone(),
            values,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    pub axes: Vec<Axis>,
    pub equilibria: Vec<EquilibriumId>,
}

impl SweepPlan {
    pub fn from_config(s: &SweepSection) -> CliResult<SweepPlan> {
        if s.axes.is_empty() {
            return Err(CliError::config("sweep needs at least one axis"));
        }
        let axes = s.axes.iter().map(Axis::from_config).collect::<CliResult<Vec<_>>>()?;
        let names: Vec<&str> = axes.iter().map(|a| a.param.as_str()).collect();
        for (i, n) in names.iter().enumerate() {
            if !MODEL_AXES.contains(n) && !PLANE_AXES.contains(n) {
                return Err(CliError::config(format!(
                    "unknown sweep parameter `{n}` (expected one of {} or h, f0)",
                    MODEL_AXES.join(", ")
                )));
            }
            if names[..i].contains(n) {
                return Err(CliError::config(format!("sweep parameter `{n}` repeated")));
            }
        }
        let plane = names.iter().filter(|n| PLANE_AXES.contains(n)).count();
        if plane != 0 && (plane != 2 || names.len() != 2) {
            return Err(CliError::config("the synthetic axes `h` and `f0` must be swept together and alone"));
        }
        if s.equilibria.is_empty() {
            return Err(CliError::config("sweep.equilibria must not be empty"));
        }
        Ok(SweepPlan {
            axes,
            equilibria: s.equilibria.clone(),
        })
    }

    pub fn is_plane(&self) -> bool {
        PLANE_AXES.contains(&self.axes[0].param.as_str())
    }

    /// Grid points in row-major order.
    pub fn points(&self) -> Vec<Vec<f64>> {
        let mut out = vec![Vec::new()];
        for axis in &self.axes {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    axis.values.iter().map(move |&v| {
                        let mut p = prefix.clone();
                        p.push(v);
                        p
                    })
                })
                .collect();
        }
        out
    }
}

/// Sets one named parameter; `le` replaces the enforcement with a constant.
pub fn apply(p: &mut ModelParams, name: &str, value: f64) -> crimedde::Result<()> {
    match name {
        "phi" => p.phi = value,
        "nu" => p.nu = value,
        "sigma" => p.sigma = value,
        "eta" => p.eta = value,
        "gamma" => p.gamma = value,
        "tau" => p.tau = value,
        "le" => p.enforcement = LawEnforcement::constant(value)?,
        "mu" | "m" => {
            let (mu, m) = match p.growth {
                GrowthFunction::Logistic { mu, m } => (mu, m),
                _ => return Err(crimedde::Error::NotApplicable("growth is not logistic".into())),
            };
            p.growth = if name == "mu" {
                GrowthFunction::logistic(value, m)?
            } else {
                GrowthFunction::logistic(mu, value)?
            };
        }
        other => return Err(crimedde::Error::NotApplicable(format!("unknown parameter `{other}`"))),
    }
    p.validate()
}

/// One equilibrium at one parameter point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityRow {
    pub equilibrium: EquilibriumId,
    pub n: Option<f64>,
    pub c: Option<f64>,
    pub admissibility: String,
    pub class: Option<String>,
    pub verdict: Option<String>,
    pub tau_hat_1: Option<f64>,
    pub tau_hat_2: Option<f64>,
    pub error: Option<String>,
}

impl StabilityRow {
    fn failed(equilibrium: EquilibriumId, admissibility: String, error: String) -> Self {
        StabilityRow {
            equilibrium,
            n: None,
            c: None,
            admissibility,
            class: None,
            verdict: None,
            tau_hat_1: None,
            tau_hat_2: None,
            error: Some(error),
        }
    }
}

fn admissibility_label(a: &Admissibility) -> String {
    match a {
        Admissibility::CaseI => "case_i".into(),
        Admissibility::CaseII => "case_ii".into(),
        Admissibility::Inadmissible(_) => "inadmissible".into(),
    }
}

/// Stability rows for the requested equilibria; faults land in `error`.
pub fn stability_rows(p: &ModelParams, ids: &[EquilibriumId]) -> Vec<StabilityRow> {
    let set = equilibria::equilibria(p);
    ids.iter()
        .map(|&id| {
            let admissibility = match (&set, id) {
                (Ok(s), EquilibriumId::Coexistence) => admissibility_label(&s.coexistence.class),
                (Ok(_), _) => "admissible".into(),
                (Err(_), _) => String::new(),
            };
            if let (Ok(s), EquilibriumId::Coexistence) = (&set, id) {
                if s.coexistence.point.is_none() {
                    let reason = match &s.coexistence.class {
                        Admissibility::Inadmissible(r) => r.clone(),
                        other => format!("{other:?}"),
                    };
                    return StabilityRow::failed(id, admissibility, format!("no coexistence equilibrium: {reason}"));
                }
            }
            match stability::analyze(id, p) {
                Ok(a) => StabilityRow {
                    equilibrium: id,
                    n: Some(a.point.n),
                    c: Some(a.point.c),
                    admissibility,
                    class: Some(a.class.label.as_str().into()),
                    verdict: Some(a.verdict.regime.label().into()),
                    tau_hat_1: a.crossings.get(1).map(|c| c.tauk),
                    tau_hat_2: a.crossings.get(2).map(|c| c.tauk),
                    error: None,
                },
                Err(e) => StabilityRow::failed(id, admissibility, e.to_string()),
            }
        })
        .collect()
}

pub const STABILITY_HEADER: &str = "equilibrium,n,c,admissibility,class,verdict,tau_hat_1,tau_hat_2,error";

impl StabilityRow {
    pub fn csv(&self) -> String {
        [
            self.equilibrium.as_str().to_string(),
            opt_num(self.n),
            opt_num(self.c),
            field(&self.admissibility),
            self.class.clone().unwrap_or_default(),
            self.verdict.clone().unwrap_or_default(),
            opt_num(self.tau_hat_1),
            opt_num(self.tau_hat_2),
            field(self.error.as_deref().unwrap_or("")),
        ]
        .join(",")
    }
}

/// A point of the synthetic `(h, F(0))` plane.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlaneRow {
    pub class: String,
    pub positive_roots: usize,
    pub boundary: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum SweepRows {
    Model(Vec<StabilityRow>),
    Plane(PlaneRow),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub values: Vec<f64>,
    pub rows: SweepRows,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub params: Vec<String>,
    pub points: Vec<SweepPoint>,
}

fn run_point(base: &ModelParams, plan: &SweepPlan, values: &[f64]) -> SweepRows {
    if plan.is_plane() {
        let (h, f0) = if plan.axes[0].param == "h" {
            (values[0], values[1])
        } else {
            (values[1], values[0])
        };
        let c = classify_hf(h, f0);
        return SweepRows::Plane(PlaneRow {
            class: c.label.as_str().into(),
            positive_roots: c.label.positive_root_count(),
            boundary: c.boundary,
        });
    }
    let mut p = base.clone();
    for (axis, &v) in plan.axes.iter().zip(values) {
        if let Err(e) = apply(&mut p, &axis.param, v) {
            let rows = plan
                .equilibria
                .iter()
                .map(|&id| StabilityRow::failed(id, String::new(), e.to_string()))
                .collect();
            return SweepRows::Model(rows);
        }
    }
    SweepRows::Model(stability_rows(&p, &plan.equilibria))
}

/// Runs the sweep on `threads` workers (0 picks the available parallelism).
pub fn sweep(base: &ModelParams, plan: &SweepPlan, threads: usize) -> CliResult<SweepTable> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::config(format!("cannot start worker pool: {e}")))?;
    let grid = plan.points();
    let points = pool.install(|| {
        grid.into_par_iter()
            .map(|values| {
                let rows = run_point(base, plan, &values);
                SweepPoint { values, rows }
            })
            .collect()
    });
    Ok(SweepTable {
        params: plan.axes.iter().map(|a| a.param.clone()).collect(),
        points,
    })
}

impl SweepTable {
    /// Long format: one line per grid point and equilibrium.
    pub fn to_csv(&self) -> String {
        let mut out = self.params.join(",");
        let plane = matches!(self.points.first().map(|p| &p.rows), Some(SweepRows::Plane(_)));
        out.push(',');
        out.push_str(if plane { "class,positive_roots,boundary" } else { STABILITY_HEADER });
        out.push('\n');
        for point in &self.points {
            let prefix: Vec<String> = point.values.iter().map(|&v| num(v)).collect();
            let prefix = prefix.join(",");
            match &point.rows {
                SweepRows::Model(rows) => {
                    for r in rows {
                        out.push_str(&prefix);
                        out.push(',');
                        out.push_str(&r.csv());
                        out.push('\n');
                    }
                }
                SweepRows::Plane(r) => {
                    out.push_str(&format!("{prefix},{},{},{}\n", r.class, r.positive_roots, r.boundary));
                }
            }
        }
        out
    }
}
