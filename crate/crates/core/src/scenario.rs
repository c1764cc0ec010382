//! Desk-scale experiment catalog, sweep execution and CSV output.

use std::fmt;
use std::io::Write;

use rayon::prelude::*;

use crate::an_precoder::AnKind;
use crate::analytics::{alpha_s, secrecy_lower_bound};
use crate::complexity::{flops_an, flops_data, Dimensions};
use crate::config::SystemConfig;
use crate::data_precoder::DataKind;
use crate::error::{Error, Result};
use crate::montecarlo::{ergodic_secrecy_rate, optimize_phi, Evaluator};

pub const DEFAULT_REALIZATIONS: usize = 500;
pub const DEFAULT_SEED: u64 = 1;
/// Largest antenna count used by the built-in scenarios.
pub const DESK_ANTENNAS: usize = 256;

pub const CSV_COLUMNS: [&str; 15] = [
    "scenario",
    "sweep_var",
    "sweep_value",
    "data_precoder",
    "an_precoder",
    "evaluator",
    "phi",
    "R_mt",
    "C_eve",
    "R_sec",
    "gamma_linear",
    "stderr_R_sec",
    "n_realizations",
    "singular_X_count",
    "status",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepVar {
    Antennas,
    DataFraction,
    Load,
    EveRatio,
    PilotEnergy,
    Users,
    /// A single point with nothing swept.
    Fixed,
}

impl fmt::Display for SweepVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepVar::Antennas => "N_T",
            SweepVar::DataFraction => "phi",
            SweepVar::Load => "beta",
            SweepVar::EveRatio => "alpha",
            SweepVar::PilotEnergy => "pilot_energy",
            SweepVar::Users => "K",
            SweepVar::Fixed => "none",
        })
    }
}

/// What a row measures.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Metric {
    Analytic,
    MonteCarlo,
    /// Eavesdropper-antenna frontier, reported in the R_sec column.
    AlphaS,
    /// FLOPs of the data precoder per coherence interval, reported in the R_sec column.
    FlopsData,
    /// FLOPs of the AN precoder per coherence interval, reported in the R_sec column.
    FlopsAn,
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::Analytic => "analytic",
            Metric::MonteCarlo => "monte_carlo",
            Metric::AlphaS => "alpha_s",
            Metric::FlopsData | Metric::FlopsAn => "flops",
        })
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "analytic" => Ok(Metric::Analytic),
            "monte_carlo" | "mc" => Ok(Metric::MonteCarlo),
            "alpha_s" => Ok(Metric::AlphaS),
            _ => Err(Error::config(None, format!("unknown evaluator `{s}` (analytic, monte_carlo, alpha_s)"))),
        }
    }
}

/// How the power split of each point is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PhiRule {
    Fixed,
    /// Maximize the closed-form secrecy rate of the nearest conventional pair.
    Optimal,
}

/// Simplified-model parameters from which sweep points are built.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Setting {
    pub cells: usize,
    pub antennas: usize,
    pub users: usize,
    pub eve_ratio: f64,
    pub total_power_db: f64,
    pub data_fraction: f64,
    pub rho: f64,
    /// Total pilot energy; `None` uses the total transmit power.
    pub pilot_energy: Option<f64>,
    pub data_symbols: usize,
}

impl Setting {
    fn base(cells: usize, antennas: usize, users: usize, rho: f64) -> Self {
        Setting {
            cells,
            antennas,
            users,
            eve_ratio: 0.1,
            total_power_db: 10.0,
            data_fraction: 0.75,
            rho,
            pilot_energy: None,
            data_symbols: 100,
        }
    }

    fn load(mut self, beta: f64) -> Self {
        self.users = ((beta * self.antennas as f64).round() as usize).max(1);
        self
    }

    fn apply(mut self, var: SweepVar, value: f64) -> Self {
        match var {
            SweepVar::Antennas => self.antennas = value as usize,
            SweepVar::DataFraction => self.data_fraction = value,
            SweepVar::Load => return self.load(value),
            SweepVar::EveRatio => self.eve_ratio = value,
            SweepVar::PilotEnergy => self.pilot_energy = Some(value),
            SweepVar::Users => self.users = value as usize,
            SweepVar::Fixed => {}
        }
        self
    }

    pub fn config(&self) -> SystemConfig {
        let ne = (self.eve_ratio * self.antennas as f64).round() as usize;
        let mut cfg = SystemConfig::simplified(
            self.cells,
            self.users,
            self.antennas,
            ne,
            self.total_power_db,
            self.data_fraction,
            self.rho,
        );
        cfg.coherence = cfg.pilot_len + self.data_symbols;
        match self.pilot_energy {
            Some(e) => cfg.with_pilot_energy(e),
            None => cfg,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Pair {
    pub data: DataKind,
    pub an: AnKind,
}

#[derive(Clone, Debug)]
pub struct Point {
    pub value: f64,
    pub config: SystemConfig,
}

/// One curve family of a scenario: shared points, several precoder pairs and metrics.
#[derive(Clone, Debug)]
pub struct Series {
    /// Written into the scenario column, e.g. `fig3:beta=0.1`.
    pub label: String,
    pub sweep: SweepVar,
    pub points: Vec<Point>,
    pub pairs: Vec<Pair>,
    pub metrics: Vec<Metric>,
    pub phi: PhiRule,
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: String,
    pub description: String,
    pub series: Vec<Series>,
    pub realizations: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Status {
    Ok,
    Skipped(String),
    Failed(String),
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Status::Ok => f.write_str("OK"),
            Status::Skipped(r) => write!(f, "SKIPPED: {r}"),
            Status::Failed(r) => write!(f, "FAILED: {r}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub scenario: String,
    pub sweep_var: SweepVar,
    pub sweep_value: f64,
    pub data: String,
    pub an: String,
    pub metric: Metric,
    pub phi: Option<f64>,
    pub rate: Option<f64>,
    pub eve_capacity: Option<f64>,
    pub secrecy: Option<f64>,
    pub gamma: Option<f64>,
    pub stderr_secrecy: Option<f64>,
    pub n_realizations: usize,
    pub singular_count: usize,
    pub status: Status,
}

fn pairs(data: &[DataKind], an: &[AnKind]) -> Vec<Pair> {
    data.iter().flat_map(|&d| an.iter().map(move |&a| Pair { data: d, an: a })).collect()
}

/// Applies the antenna override: fixed-size settings keep their load and eavesdropper
/// ratio at the new size, antenna sweeps drop values above it.
fn series(label: String, base: Setting, sweep: SweepVar, values: &[f64], nt: Option<usize>) -> Series {
    let mut base = base;
    let mut values: Vec<f64> = values.to_vec();
    if let Some(nt) = nt {
        if sweep == SweepVar::Antennas {
            values.retain(|&v| v as usize <= nt);
            if values.is_empty() {
                values.push(nt as f64);
            }
        } else if base.antennas != nt {
            let beta = base.users as f64 / base.antennas as f64;
            base.antennas = nt;
            base = base.load(beta);
        }
    }
    let points = values.iter().map(|&v| Point { value: v, config: base.apply(sweep, v).config() }).collect();
    Series { label, sweep, points, pairs: Vec::new(), metrics: Vec::new(), phi: PhiRule::Fixed }
}

impl Series {
    fn with(mut self, pairs: Vec<Pair>, metrics: &[Metric], phi: PhiRule) -> Self {
        self.pairs = pairs;
        self.metrics = metrics.to_vec();
        self.phi = phi;
        self
    }
}

fn phi_grid() -> Vec<f64> {
    (1..20).map(|i| i as f64 * 0.05).collect()
}

pub const SCENARIO_NAMES: [&str; 10] = ["fig0", "fig1", "fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9"];

/// The built-in scenarios at desk scale; `nt` overrides the antenna count.
pub fn catalog(nt: Option<usize>) -> Vec<Scenario> {
    SCENARIO_NAMES.iter().map(|n| scenario(n, nt).expect("catalog name")).collect()
}

pub fn scenario(name: &str, nt: Option<usize>) -> Result<Scenario> {
    use DataKind::*;
    let both = [Metric::Analytic, Metric::MonteCarlo];
    let mc = [Metric::MonteCarlo];
    let conventional_an = AnKind::CONVENTIONAL;
    let (description, series): (&str, Vec<Series>) = match name {
        "fig0" => (
            "eavesdropper capacity vs load for SZF with each conventional AN precoder",
            [0.1, 0.2, 0.3]
                .iter()
                .map(|&alpha| {
                    let mut s = Setting::base(2, 200, 20, 0.3);
                    s.eve_ratio = alpha;
                    series(format!("fig0:alpha={alpha}"), s, SweepVar::Load, &[0.1, 0.2, 0.3, 0.4, 0.5], nt)
                        .with(pairs(&[Szf], &conventional_an), &both, PhiRule::Fixed)
                })
                .collect(),
        ),
        "fig1" => (
            "secrecy rate vs antennas, lightly loaded two-cell network",
            vec![series("fig1".into(), Setting::base(2, 256, 10, 0.1), SweepVar::Antennas, &[32., 64., 96., 128., 160., 192., 224., 256.], nt)
                .with(pairs(&DataKind::CONVENTIONAL, &[AnKind::Sns]), &both, PhiRule::Fixed)],
        ),
        "fig2" => (
            "secrecy rate vs antennas, dense seven-cell network",
            vec![series("fig2".into(), Setting::base(7, 256, 20, 0.3), SweepVar::Antennas, &[64., 96., 128., 160., 192., 224., 256.], nt)
                .with(pairs(&DataKind::CONVENTIONAL, &[AnKind::Sns]), &both, PhiRule::Fixed)],
        ),
        "fig3" => (
            "secrecy rate vs power split for the selfish data precoders",
            [0.1, 0.5]
                .iter()
                .map(|&beta| {
                    series(format!("fig3:beta={beta}"), Setting::base(7, 100, 10, 0.1).load(beta), SweepVar::DataFraction, &phi_grid(), nt)
                        .with(pairs(&[Mf, Szf, Srci], &[AnKind::Sns]), &both, PhiRule::Fixed)
                })
                .collect(),
        ),
        "fig4" => {
            let mut v: Vec<Series> = [2usize, 7]
                .iter()
                .map(|&m| {
                    series(format!("fig4:M={m}"), Setting::base(m, 100, 10, 0.1), SweepVar::DataFraction, &phi_grid(), nt)
                        .with(pairs(&[Szf, Czf, Crci], &[AnKind::Sns]), &both, PhiRule::Fixed)
                })
                .collect();
            v.extend([0.2, 0.4].iter().map(|&beta| {
                series(format!("fig4:an:beta={beta}"), Setting::base(2, 100, 10, 0.1).load(beta), SweepVar::DataFraction, &phi_grid(), nt)
                    .with(pairs(&[Szf], &conventional_an), &both, PhiRule::Fixed)
            }));
            ("secrecy rate vs power split for selfish and collaborative precoders, and for each AN precoder", v)
        }
        "fig5" => {
            let loads: Vec<f64> = (1..10).map(|i| i as f64 * 0.05).collect();
            let base = Setting::base(2, 100, 10, 0.3);
            (
                "eavesdropper-antenna frontier vs load",
                vec![
                    series("fig5:data".into(), base, SweepVar::Load, &loads, nt)
                        .with(pairs(&[Mf, Szf, Czf], &[AnKind::Sns]), &[Metric::AlphaS], PhiRule::Fixed),
                    series("fig5:an".into(), base, SweepVar::Load, &loads, nt)
                        .with(pairs(&[Szf], &conventional_an), &[Metric::AlphaS], PhiRule::Fixed),
                ],
            )
        }
        "fig6" | "fig7" => {
            let energies = [0.1, 0.3, 1.0, 3.0, 10.0, 30.0];
            let networks = [(2usize, 0.1, 0.1), (7, 0.15, 0.3)];
            let chosen = if name == "fig6" {
                pairs(&[Poly(1), Poly(2), Poly(3), Poly(4), Srci, Szf, Mf], &[AnKind::Sns])
            } else {
                pairs(&[Szf], &[AnKind::Poly(1), AnKind::Poly(2), AnKind::Poly(3), AnKind::Poly(5), AnKind::Sns, AnKind::Random])
            };
            (
                if name == "fig6" {
                    "polynomial vs conventional data precoders vs pilot energy at the best power split"
                } else {
                    "polynomial vs conventional AN precoders vs pilot energy at the best power split"
                },
                networks
                    .iter()
                    .map(|&(m, beta, rho)| {
                        series(format!("{name}:M={m}"), Setting::base(m, 200, 20, rho).load(beta), SweepVar::PilotEnergy, &energies, nt)
                            .with(chosen.clone(), &mc, PhiRule::Optimal)
                    })
                    .collect(),
            )
        }
        "fig8" => (
            "secrecy rate and FLOPs of data precoders vs users",
            vec![series("fig8".into(), Setting::base(2, DESK_ANTENNAS, 8, 0.1), SweepVar::Users, &[4., 8., 16., 24., 32., 48., 64.], nt)
                .with(
                    pairs(&[Mf, Poly(1), Poly(3), Szf, Srci, Czf, Crci], &[AnKind::Sns]),
                    &[Metric::MonteCarlo, Metric::FlopsData],
                    PhiRule::Optimal,
                )],
        ),
        "fig9" => (
            "secrecy rate and FLOPs of AN precoders vs users",
            vec![series("fig9".into(), Setting::base(2, DESK_ANTENNAS, 8, 0.1), SweepVar::Users, &[4., 8., 16., 24., 32., 48., 64.], nt)
                .with(
                    pairs(&[Szf], &[AnKind::Random, AnKind::Poly(1), AnKind::Poly(5), AnKind::Sns, AnKind::Cns]),
                    &[Metric::MonteCarlo, Metric::FlopsAn],
                    PhiRule::Optimal,
                )],
        ),
        other => {
            return Err(Error::config(None, format!("unknown scenario `{other}`; known: {}, custom", SCENARIO_NAMES.join(", "))))
        }
    };
    Ok(Scenario {
        name: name.to_string(),
        description: description.to_string(),
        series,
        realizations: DEFAULT_REALIZATIONS,
        seed: DEFAULT_SEED,
    })
}

/// A single-point scenario around a user-supplied configuration.
pub fn custom(config: SystemConfig, pairs: Vec<Pair>, metrics: Vec<Metric>) -> Scenario {
    let value = config.data_fraction;
    Scenario {
        name: "custom".into(),
        description: "single point from a configuration file".into(),
        series: vec![Series {
            label: "custom".into(),
            sweep: SweepVar::Fixed,
            points: vec![Point { value, config }],
            pairs,
            metrics,
            phi: PhiRule::Fixed,
        }],
        realizations: DEFAULT_REALIZATIONS,
        seed: DEFAULT_SEED,
    }
}

/// Seed of sweep point `index`; shared by every pair at that point so curves use common draws.
pub fn point_seed(master: u64, index: usize) -> u64 {
    let mut z = master ^ (index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn status_of(e: &Error) -> Status {
    match e {
        Error::Infeasible(_) | Error::InvalidAnRank | Error::Unsupported(_) | Error::Config { .. } | Error::DimensionMismatch { .. } => {
            Status::Skipped(e.to_string())
        }
        _ => Status::Failed(e.to_string()),
    }
}

/// Closed-form stand-ins for the polynomial precoders when choosing the power split.
fn closed_form_pair(p: Pair) -> Pair {
    Pair {
        data: if let DataKind::Poly(_) = p.data { DataKind::Srci } else { p.data },
        an: if let AnKind::Poly(_) = p.an { AnKind::Sns } else { p.an },
    }
}

struct Task<'a> {
    series: &'a Series,
    point: &'a Point,
    index: usize,
    pair: Pair,
    metric: Metric,
}

fn evaluate(task: &Task, realizations: usize, master: u64) -> Row {
    let s = task.series;
    let mut cfg = task.point.config.clone();
    let (data_name, an_name) = match task.metric {
        Metric::FlopsData => (task.pair.data.to_string(), "-".to_string()),
        Metric::FlopsAn => ("-".to_string(), task.pair.an.to_string()),
        _ => (task.pair.data.to_string(), task.pair.an.to_string()),
    };
    let mut row = Row {
        scenario: s.label.clone(),
        sweep_var: s.sweep,
        sweep_value: task.point.value,
        data: data_name,
        an: an_name,
        metric: task.metric,
        phi: None,
        rate: None,
        eve_capacity: None,
        secrecy: None,
        gamma: None,
        stderr_secrecy: None,
        n_realizations: 0,
        singular_count: 0,
        status: Status::Ok,
    };
    let counts_only = matches!(task.metric, Metric::FlopsData | Metric::FlopsAn | Metric::AlphaS);
    if s.phi == PhiRule::Optimal && !counts_only {
        let proxy = closed_form_pair(task.pair);
        match optimize_phi(&cfg, proxy.data, proxy.an, Evaluator::Analytic, 32) {
            Ok(best) => cfg = cfg.with_data_fraction(best.phi),
            Err(e) => {
                row.status = status_of(&e);
                return row;
            }
        }
    }
    if !matches!(task.metric, Metric::FlopsData | Metric::FlopsAn) {
        row.phi = Some(cfg.data_fraction);
    }
    let outcome: Result<()> = (|| {
        match task.metric {
            Metric::Analytic => {
                let a = secrecy_lower_bound(task.pair.data, task.pair.an, &cfg)?;
                row.rate = Some(a.rate);
                row.eve_capacity = Some(a.eve.value());
                row.secrecy = Some(a.secrecy);
                row.gamma = Some(a.sinr.gamma);
            }
            Metric::MonteCarlo => {
                let r = ergodic_secrecy_rate(&cfg, task.pair.data, task.pair.an, realizations, point_seed(master, task.index))?;
                row.rate = Some(r.rate);
                row.eve_capacity = Some(r.eve_capacity);
                row.secrecy = Some(r.secrecy);
                row.gamma = Some(r.gamma);
                row.stderr_secrecy = Some(r.stderr_secrecy);
                row.n_realizations = r.n_realizations;
                row.singular_count = r.singular_count;
            }
            Metric::AlphaS => row.secrecy = Some(alpha_s(task.pair.data, task.pair.an, &cfg)?),
            Metric::FlopsData | Metric::FlopsAn => {
                let d = Dimensions {
                    cells: cfg.cells,
                    users: cfg.users,
                    antennas: cfg.antennas,
                    coherence: cfg.coherence,
                    pilot_len: cfg.pilot_len,
                };
                let f = if task.metric == Metric::FlopsData { flops_data(task.pair.data, d)? } else { flops_an(task.pair.an, d)? };
                row.secrecy = Some(f as f64);
            }
        }
        Ok(())
    })();
    if let Err(e) = outcome {
        row.status = status_of(&e);
    }
    row
}

/// Runs every (point, pair, metric) of the scenario. Points run in parallel on the
/// current rayon pool; rows come back in catalog order.
pub fn run_scenario(sc: &Scenario) -> Vec<Row> {
    let mut tasks = Vec::new();
    for s in &sc.series {
        for (index, point) in s.points.iter().enumerate() {
            for &pair in &s.pairs {
                for &metric in &s.metrics {
                    // FLOP rows depend on one precoder only; emit each once.
                    let duplicate = match metric {
                        Metric::FlopsData => s.pairs.iter().take_while(|p| **p != pair).any(|p| p.data == pair.data),
                        Metric::FlopsAn => s.pairs.iter().take_while(|p| **p != pair).any(|p| p.an == pair.an),
                        _ => false,
                    };
                    if !duplicate {
                        tasks.push(Task { series: s, point, index, pair, metric });
                    }
                }
            }
        }
    }
    tasks.par_iter().map(|t| evaluate(t, sc.realizations, sc.seed)).collect()
}

/// 0 when every row is fine, 2 when nothing could be evaluated, 3 when a numerical failure occurred.
pub fn exit_code(rows: &[Row]) -> i32 {
    if rows.iter().any(|r| matches!(r.status, Status::Failed(_))) {
        3
    } else if !rows.iter().any(|r| r.status == Status::Ok) {
        2
    } else {
        0
    }
}

fn num(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes the rows as CSV, optionally preceded by a `# generated <unix time>` line.
pub fn write_csv<W: Write>(out: W, rows: &[Row], timestamp: Option<u64>) -> Result<()> {
    let mut out = out;
    let io = |e: std::io::Error| Error::Io { path: "<csv output>".into(), source: e };
    if let Some(t) = timestamp {
        writeln!(out, "# generated {t}").map_err(io)?;
    }
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::Io { path: "<csv output>".into(), source: std::io::Error::other(e) };
    w.write_record(CSV_COLUMNS).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.scenario.clone(),
            r.sweep_var.to_string(),
            r.sweep_value.to_string(),
            r.data.clone(),
            r.an.clone(),
            r.metric.to_string(),
            num(r.phi),
            num(r.rate),
            num(r.eve_capacity),
            num(r.secrecy),
            num(r.gamma),
            num(r.stderr_secrecy),
            r.n_realizations.to_string(),
            r.singular_count.to_string(),
            r.status.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(io)?;
    Ok(())
}
