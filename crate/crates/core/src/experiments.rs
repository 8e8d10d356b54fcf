//! Declarative parameter sweeps with CSV output.
//!
//! An [`ExperimentSpec`] fixes a base parameter set, sweeps one parameter
//! (optionally crossed with a second "series" parameter) and lists the
//! quantities to record. Scalar quantities go into one table
//! `<name>.csv` with header `[<series>,]<sweep>,<output>...`; trajectories
//! go into one file per sweep point with header `t,x,s,x_bar`.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{integrate, thin, Trajectory};
use crate::equilibrium::{cost_gain, mixed_ne, pure_ne, EquilibriumResult};
use crate::error::{Error, Result};
use crate::format::fmt_sig9;
use crate::params::{Integration, SystemParams};
use crate::risk::{cumulative_risk, infection_probability, instantaneous_risk, risk_profile, RiskTable};
use crate::threshold::ThresholdDistribution;

/// Trajectory files keep at most this many rows.
pub const MAX_TRAJECTORY_ROWS: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    NNodes,
    NSources,
    Beta,
    Gamma,
    Delta,
    DeltaS,
    LambdaInfluence,
    X0,
    S0,
    InfectionCost,
    UpdateCost,
    /// Update probability; protects `p N` nodes.
    P,
    /// Number of protected nodes.
    KProtected,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::NNodes => "n_nodes",
            SweepParam::NSources => "n_sources",
            SweepParam::Beta => "beta",
            SweepParam::Gamma => "gamma",
            SweepParam::Delta => "delta",
            SweepParam::DeltaS => "delta_s",
            SweepParam::LambdaInfluence => "lambda_influence",
            SweepParam::X0 => "x0",
            SweepParam::S0 => "s0",
            SweepParam::InfectionCost => "infection_cost",
            SweepParam::UpdateCost => "update_cost",
            SweepParam::P => "p",
            SweepParam::KProtected => "k_protected",
        }
    }

    fn apply(self, point: &mut Point, v: f64) -> Result<()> {
        let count = |v: f64| -> Result<usize> {
            if v >= 0.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(Error::InvalidParams(format!(
                    "{} must be a nonnegative integer, got {v}",
                    self.name()
                )))
            }
        };
        let p = &mut point.params;
        match self {
            SweepParam::NNodes => p.n_nodes = count(v)?,
            SweepParam::NSources => p.n_sources = count(v)?,
            SweepParam::Beta => p.beta = v,
            SweepParam::Gamma => p.gamma = v,
            SweepParam::Delta => p.delta = v,
            SweepParam::DeltaS => p.delta_s = v,
            SweepParam::LambdaInfluence => p.lambda_influence = v,
            SweepParam::X0 => p.x0 = v,
            SweepParam::S0 => p.s0 = v,
            SweepParam::InfectionCost => p.infection_cost = v,
            SweepParam::UpdateCost => p.update_cost = v,
            SweepParam::P => {
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::InvalidParams(format!("p = {v} outside [0, 1]")));
                }
                point.protection = Some(ProtectionAt::Fraction(v));
            }
            SweepParam::KProtected => point.protection = Some(ProtectionAt::Count(v)),
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Output {
    /// One `t,x,s,x_bar` file per sweep point.
    Trajectory,
    /// One `t,p_instant,p_cumulative` file per sweep point.
    RiskCurve,
    InfectionProbability,
    PStar,
    Psi,
    Gain,
    UCStar,
    TF,
}

impl Output {
    pub fn name(self) -> &'static str {
        match self {
            Output::Trajectory => "trajectory",
            Output::RiskCurve => "risk_curve",
            Output::InfectionProbability => "infection_probability",
            Output::PStar => "p_star",
            Output::Psi => "psi",
            Output::Gain => "gain",
            Output::UCStar => "u_c_star",
            Output::TF => "t_f",
        }
    }

    fn is_file(self) -> bool {
        matches!(self, Output::Trajectory | Output::RiskCurve)
    }

    fn needs_trajectory(self) -> bool {
        matches!(
            self,
            Output::Trajectory | Output::RiskCurve | Output::InfectionProbability | Output::TF
        )
    }

    fn needs_table(self) -> bool {
        matches!(self, Output::PStar | Output::Psi | Output::Gain)
    }
}

/// How many nodes are protected when integrating trajectories, unless the
/// sweep parameter is `p` or `k_protected`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protection {
    #[default]
    None,
    /// A fixed update probability.
    Fraction(f64),
    /// The fully mixed equilibrium probability `p*` of the point.
    Equilibrium,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub base: SystemParams,
    #[serde(default)]
    pub dist: ThresholdDistribution,
    pub sweep: Sweep,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series: Option<Sweep>,
    pub outputs: Vec<Output>,
    #[serde(default)]
    pub protection: Protection,
    #[serde(default)]
    pub integration: Integration,
    #[serde(default)]
    pub seed: u64,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty()
            || !self
                .name
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
        {
            return Err(Error::InvalidConfig(format!(
                "experiment name `{}` must be a nonempty [A-Za-z0-9_-] identifier",
                self.name
            )));
        }
        if self.sweep.values.is_empty() {
            return Err(Error::InvalidConfig("sweep value list is empty".into()));
        }
        if self.outputs.is_empty() {
            return Err(Error::InvalidConfig("no outputs requested".into()));
        }
        if let Some(series) = &self.series {
            if series.values.is_empty() {
                return Err(Error::InvalidConfig("series value list is empty".into()));
            }
            if series.param == self.sweep.param {
                return Err(Error::InvalidConfig(
                    "series and sweep name the same parameter".into(),
                ));
            }
        }
        if let Some(v) = self
            .sweep
            .values
            .iter()
            .chain(self.series.iter().flat_map(|s| &s.values))
            .find(|v| !v.is_finite())
        {
            return Err(Error::InvalidConfig(format!("non-finite sweep value {v}")));
        }
        self.dist.validate()?;
        self.integration.validate()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ExperimentSpec =
            serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    fn scalar_outputs(&self) -> impl Iterator<Item = Output> + '_ {
        self.outputs.iter().copied().filter(|o| !o.is_file())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum ProtectionAt {
    Fraction(f64),
    Count(f64),
}

#[derive(Debug, Clone)]
struct Point {
    series_value: Option<f64>,
    sweep_value: f64,
    params: SystemParams,
    protection: Option<ProtectionAt>,
}

/// A CSV file produced by an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputFile {
    pub name: String,
    pub contents: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub name: String,
    pub header: Vec<String>,
    /// Scalar rows in sweep order; empty when only file outputs were asked.
    pub rows: Vec<Vec<f64>>,
    pub files: Vec<OutputFile>,
}

impl ExperimentOutput {
    pub fn table_csv(&self) -> Option<String> {
        if self.rows.is_empty() {
            return None;
        }
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&v| fmt_sig9(v)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        Some(out)
    }

    /// Column by header name.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    /// All files, the scalar table first.
    pub fn all_files(&self) -> Vec<OutputFile> {
        let mut files = Vec::new();
        if let Some(contents) = self.table_csv() {
            files.push(OutputFile {
                name: format!("{}.csv", self.name),
                contents,
            });
        }
        files.extend(self.files.iter().cloned());
        files
    }

    pub fn write_to(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        self.all_files()
            .into_iter()
            .map(|f| {
                let path = dir.join(&f.name);
                std::fs::write(&path, f.contents)?;
                Ok(path)
            })
            .collect()
    }
}

/// Memo key: everything that shapes the dynamics, costs excluded.
fn dynamics_key(p: &SystemParams) -> [u64; 9] {
    [
        p.n_nodes as u64,
        p.n_sources as u64,
        p.beta.to_bits(),
        p.gamma.to_bits(),
        p.delta.to_bits(),
        p.delta_s.to_bits(),
        p.lambda_influence.to_bits(),
        p.x0.to_bits(),
        p.s0.to_bits(),
    ]
}

/// Trajectory CSV with header `t,x,s,x_bar`, down-sampled to at most
/// [`MAX_TRAJECTORY_ROWS`] rows.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut out = String::from("t,x,s,x_bar\n");
    for s in traj.downsampled(MAX_TRAJECTORY_ROWS) {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            fmt_sig9(s.t),
            fmt_sig9(s.x),
            fmt_sig9(s.s),
            fmt_sig9(s.x_bar)
        );
    }
    out
}

fn risk_curve_csv(traj: &Trajectory, params: &SystemParams) -> String {
    let inst = instantaneous_risk(traj, params);
    let cum = cumulative_risk(traj, params);
    let rows: Vec<_> = inst.iter().zip(&cum).collect();
    let mut out = String::from("t,p_instant,p_cumulative\n");
    for ((t, a), (_, b)) in thin(&rows, MAX_TRAJECTORY_ROWS) {
        let _ = writeln!(out, "{},{},{}", fmt_sig9(*t), fmt_sig9(*a), fmt_sig9(*b));
    }
    out
}

struct PointResult {
    row: Vec<f64>,
    files: Vec<OutputFile>,
}

/// Runs every sweep point (in parallel) and assembles rows in sweep order.
pub fn run(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    spec.validate()?;

    let mut sweep_values = spec.sweep.values.clone();
    sweep_values.sort_by(f64::total_cmp);
    let series_values: Vec<Option<f64>> = match &spec.series {
        Some(s) => {
            let mut v = s.values.clone();
            v.sort_by(f64::total_cmp);
            v.into_iter().map(Some).collect()
        }
        None => vec![None],
    };

    let fail = |param: SweepParam, value: f64| {
        let name = spec.name.clone();
        move |e: Error| Error::Experiment {
            experiment: name,
            param: param.name().to_string(),
            value,
            source: Box::new(e),
        }
    };

    let mut points = Vec::new();
    for &series_value in &series_values {
        for &sweep_value in &sweep_values {
            let mut point = Point {
                series_value,
                sweep_value,
                params: spec.base,
                protection: None,
            };
            if let (Some(series), Some(v)) = (&spec.series, series_value) {
                series.param.apply(&mut point, v).map_err(fail(series.param, v))?;
            }
            spec.sweep
                .param
                .apply(&mut point, sweep_value)
                .map_err(fail(spec.sweep.param, sweep_value))?;
            point
                .params
                .validate()
                .map_err(fail(spec.sweep.param, sweep_value))?;
            points.push(point);
        }
    }

    let needs_table = spec.outputs.iter().any(|o| o.needs_table())
        || (spec.protection == Protection::Equilibrium
            && spec.outputs.iter().any(|o| o.needs_trajectory()));
    let tables = if needs_table {
        let mut distinct: Vec<&Point> = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for p in &points {
            if seen.insert(dynamics_key(&p.params)) {
                distinct.push(p);
            }
        }
        distinct
            .into_par_iter()
            .map(|p| {
                risk_profile(&p.params, &spec.dist, &spec.integration)
                    .map(|t| (dynamics_key(&p.params), Arc::new(t)))
                    .map_err(fail(spec.sweep.param, p.sweep_value))
            })
            .collect::<Result<HashMap<_, _>>>()?
    } else {
        HashMap::new()
    };

    let results = points
        .par_iter()
        .map(|point| {
            let table = tables.get(&dynamics_key(&point.params)).cloned();
            evaluate_point(spec, point, table.as_deref())
                .map_err(fail(spec.sweep.param, point.sweep_value))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut header = Vec::new();
    if let Some(series) = &spec.series {
        header.push(series.param.name().to_string());
    }
    header.push(spec.sweep.param.name().to_string());
    header.extend(spec.scalar_outputs().map(|o| o.name().to_string()));
    let has_scalars = spec.scalar_outputs().next().is_some();

    let mut rows = Vec::new();
    let mut files = Vec::new();
    for (point, res) in points.iter().zip(results) {
        if has_scalars {
            let mut row = Vec::with_capacity(header.len());
            row.extend(point.series_value);
            row.push(point.sweep_value);
            row.extend(res.row);
            rows.push(row);
        }
        files.extend(res.files);
    }
    Ok(ExperimentOutput {
        name: spec.name.clone(),
        header,
        rows,
        files,
    })
}

fn evaluate_point(
    spec: &ExperimentSpec,
    point: &Point,
    table: Option<&RiskTable>,
) -> Result<PointResult> {
    let params = &point.params;
    let n = params.n_nodes as f64;

    let mut equilibrium: Option<EquilibriumResult> = None;
    let mut p_star = || -> Result<f64> {
        if equilibrium.is_none() {
            let t = table.expect("risk table computed for equilibrium outputs");
            equilibrium = Some(mixed_ne(t, params)?);
        }
        Ok(equilibrium.and_then(|e| e.p_star()).expect("mixed solver yields p"))
    };

    let k_protected = match point.protection {
        Some(ProtectionAt::Fraction(f)) => f * n,
        Some(ProtectionAt::Count(k)) => k,
        None => match spec.protection {
            Protection::None => 0.0,
            Protection::Fraction(f) => f * n,
            Protection::Equilibrium => {
                if spec.outputs.iter().any(|o| o.needs_trajectory()) {
                    p_star()? * n
                } else {
                    0.0
                }
            }
        },
    };

    let traj = if spec.outputs.iter().any(|o| o.needs_trajectory()) {
        Some(integrate(params, k_protected, &spec.dist, &spec.integration)?)
    } else {
        None
    };

    let mut stem = spec.name.clone();
    if let (Some(series), Some(v)) = (&spec.series, point.series_value) {
        let _ = write!(stem, "_{}_{}", series.param.name(), fmt_sig9(v));
    }
    let _ = write!(stem, "_{}_{}", spec.sweep.param.name(), fmt_sig9(point.sweep_value));

    let mut row = Vec::new();
    let mut files = Vec::new();
    for out in &spec.outputs {
        match out {
            Output::Trajectory => files.push(OutputFile {
                name: format!("{stem}.csv"),
                contents: trajectory_csv(traj.as_ref().expect("trajectory")),
            }),
            Output::RiskCurve => files.push(OutputFile {
                name: format!("{stem}_risk.csv"),
                contents: risk_curve_csv(traj.as_ref().expect("trajectory"), params),
            }),
            Output::InfectionProbability => {
                row.push(infection_probability(traj.as_ref().expect("trajectory"), params)?.p_infect)
            }
            Output::PStar => row.push(p_star()?),
            Output::Psi => {
                let t = table.expect("risk table computed for psi");
                match pure_ne(t, params)? {
                    EquilibriumResult::Pure { psi } => row.push(psi as f64),
                    other => unreachable!("pure solver returned {other:?}"),
                }
            }
            Output::Gain => row.push(cost_gain(p_star()?)),
            Output::UCStar => {
                let p0 = match table {
                    Some(t) => t.p(0)?,
                    None => {
                        let t0 = integrate(params, 0.0, &spec.dist, &spec.integration)?;
                        infection_probability(&t0, params)?.p_infect
                    }
                };
                row.push(params.infection_cost * p0);
            }
            Output::TF => row.push(
                traj.as_ref()
                    .expect("trajectory")
                    .extinction_time
                    .unwrap_or(f64::NAN),
            ),
        }
    }
    Ok(PointResult { row, files })
}

fn evenly(start: f64, step: f64, count: usize) -> Vec<f64> {
    // Rounded to 12 decimals so grid values print cleanly.
    (0..count)
        .map(|i| ((start + step * i as f64) * 1e12).round() / 1e12)
        .collect()
}

/// Thresholds for the transient figures: Weibull with shape 2 and scale
/// 1000 (mean about 886 infections). Unlike the exponential default the
/// hazard grows with cumulative infections, so the source population
/// responds to protection; the scale keeps the hazard far from saturation.
pub fn transient_threshold() -> ThresholdDistribution {
    ThresholdDistribution::Weibull {
        shape: 2.0,
        scale: 1000.0,
    }
}

/// Infected-node trajectories for update probabilities 0.01, 0.1 and 0.5.
pub fn fig3_infection() -> ExperimentSpec {
    ExperimentSpec {
        name: "fig3_infection".into(),
        description: "X(t) for update probabilities 0.01, 0.1, 0.5 on the 100-node network".into(),
        base: SystemParams::small_network(),
        dist: transient_threshold(),
        sweep: Sweep {
            param: SweepParam::P,
            values: vec![0.01, 0.1, 0.5],
        },
        series: None,
        outputs: vec![Output::Trajectory],
        protection: Protection::None,
        integration: Integration::default(),
        seed: 0,
    }
}

/// Same runs as [`fig3_infection`], read for the source column.
pub fn fig4_sources() -> ExperimentSpec {
    ExperimentSpec {
        name: "fig4_sources".into(),
        description: "S(t) for update probabilities 0.01, 0.1, 0.5 on the 100-node network".into(),
        ..fig3_infection()
    }
}

pub fn fig5_infection_prob() -> ExperimentSpec {
    ExperimentSpec {
        name: "fig5_infection_prob".into(),
        description: "Running infection probability for several update probabilities, \
                      lambda = 1e-4"
            .into(),
        base: SystemParams {
            lambda_influence: 1e-4,
            ..SystemParams::small_network()
        },
        dist: ThresholdDistribution::default(),
        sweep: Sweep {
            param: SweepParam::P,
            values: vec![0.01, 0.1, 0.3, 0.495, 0.7],
        },
        series: None,
        outputs: vec![Output::RiskCurve, Output::InfectionProbability, Output::TF],
        protection: Protection::None,
        integration: Integration::default(),
        seed: 0,
    }
}

/// Network sizes 100, 200, ..., 1000.
fn size_grid() -> Sweep {
    Sweep {
        param: SweepParam::NNodes,
        values: evenly(100.0, 100.0, 10),
    }
}

pub fn fig6_pstar_vs_n() -> ExperimentSpec {
    ExperimentSpec {
        name: "fig6_pstar_vs_n".into(),
        description: "Fully mixed equilibrium update probability against network size".into(),
        base: SystemParams::equilibrium_default(),
        dist: ThresholdDistribution::default(),
        sweep: size_grid(),
        series: None,
        outputs: vec![Output::PStar],
        protection: Protection::None,
        integration: Integration::default(),
        seed: 0,
    }
}

pub fn fig7_gain() -> ExperimentSpec {
    ExperimentSpec {
        name: "fig7_gain".into(),
        description: "Cost gain 1 - p* against network size".into(),
        outputs: vec![Output::Gain],
        ..fig6_pstar_vs_n()
    }
}

/// Update costs 0.05, 0.10, ..., 0.90 crossed with three contact rates
/// (beta / delta = 5e-4, 1e-3, 1.5e-3).
pub fn fig8_pstar_vs_cost() -> ExperimentSpec {
    ExperimentSpec {
        name: "fig8_pstar_vs_cost".into(),
        description: "p* against update cost for three beta/delta ratios".into(),
        base: SystemParams::equilibrium_default(),
        dist: ThresholdDistribution::default(),
        sweep: Sweep {
            param: SweepParam::UpdateCost,
            values: evenly(0.05, 0.05, 18),
        },
        series: Some(Sweep {
            param: SweepParam::Beta,
            values: vec![5e-5, 1e-4, 1.5e-4],
        }),
        outputs: vec![Output::PStar, Output::UCStar],
        protection: Protection::None,
        integration: Integration::default(),
        seed: 0,
    }
}

/// Infected-node trajectories at the mixed equilibrium for several update
/// costs, 100 nodes. The costs span the band `(P_i(N-1), P_i(0))` in which
/// the equilibrium is interior.
pub fn fig9_x_vs_cost() -> ExperimentSpec {
    ExperimentSpec {
        name: "fig9_x_vs_cost".into(),
        description: "X(t) at the fully mixed equilibrium for several update costs".into(),
        base: SystemParams {
            n_nodes: 100,
            ..SystemParams::equilibrium_default()
        },
        dist: ThresholdDistribution::default(),
        sweep: Sweep {
            param: SweepParam::UpdateCost,
            values: vec![0.096, 0.098, 0.1, 0.102, 0.104],
        },
        series: None,
        outputs: vec![Output::Trajectory, Output::PStar, Output::TF],
        protection: Protection::Equilibrium,
        integration: Integration::default(),
        seed: 0,
    }
}

/// The seven figure experiments.
pub fn builtin_suite() -> Vec<ExperimentSpec> {
    vec![
        fig3_infection(),
        fig4_sources(),
        fig5_infection_prob(),
        fig6_pstar_vs_n(),
        fig7_gain(),
        fig8_pstar_vs_cost(),
        fig9_x_vs_cost(),
    ]
}

pub fn builtin(name: &str) -> Option<ExperimentSpec> {
    builtin_suite().into_iter().find(|s| s.name == name)
}
