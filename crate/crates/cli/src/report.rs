//! Plain-language thresholds for crime control.

use crimedde::equilibria;
use crimedde::model::ModelParams;
use crimedde::Result;
use serde::Serialize;

/// Margins at or below this size (relative to the compared values) count as
/// sitting on the threshold.
const AT_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Threshold {
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs - rhs`; positive means the favourable side.
    pub margin: f64,
    pub at_threshold: bool,
    pub verdict: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrategyReport {
    /// `nu (eta + l_e)` against `N_dag (gamma - (eta + l_e))`.
    pub crime_control_threshold: Threshold,
    /// `gamma` against `eta + mean(l_e)`.
    pub persistence_threshold: Threshold,
    pub narrative: Vec<String>,
}

fn near(a: f64, b: f64) -> bool {
    (a - b).abs() <= AT_THRESHOLD * (1.0 + a.abs().max(b.abs()))
}

/// Recomputes both thresholds from the parameters.
pub fn strategy_report(p: &ModelParams) -> Result<StrategyReport> {
    let n_dag = equilibria::criminal_free_level(&p.growth)?;
    let removal = p.mean_removal();
    let periodic = p.enforcement.period().is_some();

    let decrease = p.nu * removal;
    let growth = n_dag * (p.gamma - removal);
    let control_margin = decrease - growth;
    // zero net recruitment puts the control balance on its boundary too
    let control_at = near(decrease, growth) || near(growth, 0.0);
    let control_verdict = if control_at {
        "at threshold"
    } else if control_margin > 0.0 {
        "crime-free attainable"
    } else {
        "crime-free not attainable"
    };

    let persist_margin = p.gamma - removal;
    let persist_at = near(p.gamma, removal);
    let persist_verdict = if persist_at {
        "at threshold"
    } else if persist_margin > 0.0 {
        "periodic persistence likely"
    } else {
        "persistence ruled out"
    };

    let l_e = if periodic { "mean(l_e)" } else { "l_e" };
    let mut narrative = vec![
        format!(
            "Total removal of criminals (eta + {l_e} = {removal:.6}), weighted by nu = {}, is {decrease:.6}; \
             net recruitment at the largest possible non-criminal population (N_dag = {n_dag:.6}) is {growth:.6}.",
            p.nu
        ),
        match control_verdict {
            "crime-free attainable" => format!(
                "Removal exceeds recruitment by {control_margin:.6}: the crime-free state is stable for every delay."
            ),
            "crime-free not attainable" => format!(
                "Recruitment exceeds removal by {:.6}: the crime-free state is unstable for every delay.",
                -control_margin
            ),
            _ => "Removal and recruitment balance: the crime-free state is at its stability threshold.".to_string(),
        },
        format!(
            "The criminalization rate gamma = {} against total removal {removal:.6} leaves a margin of {persist_margin:.6}.",
            p.gamma
        ),
        match persist_verdict {
            "periodic persistence likely" if periodic => {
                "Criminals can persist; under periodic enforcement a positive periodic regime is likely.".to_string()
            }
            "periodic persistence likely" => "Criminals can persist at a positive level.".to_string(),
            "persistence ruled out" => {
                "Criminals cannot persist: removal outpaces even the largest recruitment rate.".to_string()
            }
            _ => "Criminalization exactly matches removal: persistence is at its threshold.".to_string(),
        },
    ];
    if periodic {
        narrative.push(
            "Enforcement is periodic: only its average enters both thresholds, so sustained effort matters more than its timing."
                .to_string(),
        );
    }

    Ok(StrategyReport {
        crime_control_threshold: Threshold {
            lhs: decrease,
            rhs: growth,
            margin: control_margin,
            at_threshold: control_at,
            verdict: control_verdict.to_string(),
        },
        persistence_threshold: Threshold {
            lhs: p.gamma,
            rhs: removal,
            margin: persist_margin,
            at_threshold: persist_at,
            verdict: persist_verdict.to_string(),
        },
        narrative,
    })
}
