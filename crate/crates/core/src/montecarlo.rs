//! Ergodic rates by averaging over channel realizations, and the power-split optimizer.
//!
//! Each realization re-draws fading, pilot noise and (for random AN) the AN matrix
//! from its own counter-based stream, so realizations run in parallel and are summed
//! in index order. Reports are therefore bit-identical for a given seed at any thread
//! count.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::an_precoder::{cns_precoder, poly_an_precoder, random_an_precoder, sns_precoder, AnKind, AnPrecoder};
use crate::analytics::{an_leakage_power, secrecy_lower_bound, sinr_analytic, Regularization};
use crate::asymptotics::{an_poly_coefficients, data_poly_coefficients, DataPolyInputs};
use crate::channel::{estimate_channels, realization_rng, sample_realization, ChannelEstimate, STREAM_RANDOM_AN};
use crate::config::SystemConfig;
use crate::data_precoder::{
    crci_precoder, czf_precoder, mf_precoder, poly_data_precoder, srci_precoder, szf_precoder, DataKind, DataPrecoder,
};
use crate::error::{Error, Result};
use crate::linalg::{frob_sq, gram, hermitian_eigen, mul, CMat, CONDITION_LIMIT};

/// Target of the legitimate-link estimates, which the eavesdropper also listens to.
const CELL: usize = 0;
const USER: usize = 0;

/// Sample means of the terms that make up the SINR of the target user.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SinrComponents {
    /// |E[g]|^2 for the effective gain g of the intended stream.
    pub signal: f64,
    /// Var[g]: the self-interference from imperfect CSI.
    pub signal_variance: f64,
    /// Interference from the other streams of the serving base station.
    pub intra_cell: f64,
    /// Data interference from the other base stations.
    pub inter_cell: f64,
    /// AN leakage summed over all base stations.
    pub an_leakage: f64,
    /// Unweighted ||h A||^2 of the serving base station, divided by nothing; the
    /// per-dimension leakage times the AN rank.
    pub own_an_gain: f64,
    pub noise: f64,
}

impl SinrComponents {
    pub fn gamma(&self) -> f64 {
        self.signal / (self.signal_variance + self.intra_cell + self.inter_cell + self.an_leakage + self.noise)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SinrEstimate {
    pub gamma: f64,
    pub stderr_gamma: f64,
    pub components: SinrComponents,
    pub n_realizations: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EveEstimate {
    /// Mean capacity; infinite when any realization had a singular AN covariance or no AN power.
    pub capacity: f64,
    pub stderr: f64,
    pub singular_count: usize,
    pub n_realizations: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SecrecyReport {
    pub data: DataKind,
    pub an: AnKind,
    pub gamma: f64,
    pub rate: f64,
    pub eve_capacity: f64,
    pub secrecy: f64,
    pub stderr_gamma: f64,
    pub stderr_rate: f64,
    pub stderr_eve: f64,
    pub stderr_secrecy: f64,
    pub n_realizations: usize,
    pub singular_count: usize,
    pub components: SinrComponents,
    /// Closed-form SINR for the same configuration, where one exists.
    pub analytic_gamma: Option<f64>,
}

/// Everything fixed across realizations: powers, regularization and polynomial coefficients.
struct Plan<'a> {
    cfg: &'a SystemConfig,
    data: DataKind,
    an: AnKind,
    kappa: Option<f64>,
    data_coefficients: Vec<Vec<f64>>,
    an_coefficients: Vec<f64>,
    p: f64,
    q: f64,
}

/// Conventional AN kind used wherever a closed form is needed for a polynomial AN.
fn closed_form_an(an: AnKind) -> AnKind {
    match an {
        AnKind::Poly(_) => AnKind::Sns,
        other => other,
    }
}

impl<'a> Plan<'a> {
    fn new(cfg: &'a SystemConfig, data: DataKind, an: AnKind) -> Result<Self> {
        cfg.validate()?;
        let (m, k, nt) = (cfg.cells, cfg.users, cfg.antennas);
        let rank = an.rank(m, k, nt)?;
        match data {
            DataKind::Szf | DataKind::Srci | DataKind::Poly(_) if k >= nt => {
                return Err(Error::Infeasible(format!("{data} needs K < N_T (K = {k}, N_T = {nt})")))
            }
            DataKind::Czf if m * k >= nt => {
                return Err(Error::Infeasible(format!("CZF needs M K < N_T (M K = {}, N_T = {nt})", m * k)))
            }
            _ => {}
        }
        let (p, q) = cfg.derived_powers(rank)?;
        let kappa = if data.is_regularized() {
            sinr_analytic(data, closed_form_an(an), cfg, Regularization::Optimal)?.kappa
        } else {
            None
        };
        let data_coefficients = match data {
            DataKind::Poly(degree) => {
                let leak = an_leakage_power(closed_form_an(an), cfg);
                (0..m)
                    .map(|cell| {
                        let inputs =
                            DataPolyInputs { an_leakage: leak, interference: DataPolyInputs::interference_for(cfg, cell) };
                        data_poly_coefficients(cfg, cell, degree, inputs).map(|c| c.coefficients)
                    })
                    .collect::<Result<_>>()?
            }
            _ => Vec::new(),
        };
        let an_coefficients = match an {
            AnKind::Poly(degree) => an_poly_coefficients(cfg.load(), degree)?.coefficients,
            _ => Vec::new(),
        };
        Ok(Plan { cfg, data, an, kappa, data_coefficients, an_coefficients, p, q })
    }

    fn data_precoder(&self, est: &ChannelEstimate, bs: usize) -> Result<DataPrecoder> {
        let own = est.in_cell(bs);
        let k = self.cfg.users;
        match self.data {
            DataKind::Mf => mf_precoder(own),
            DataKind::Szf => szf_precoder(own),
            DataKind::Srci => srci_precoder(own, self.kappa.unwrap_or(0.0)),
            DataKind::Czf => czf_precoder(&est.stacked(bs), bs, k),
            DataKind::Crci => crci_precoder(&est.stacked(bs), bs, k, self.kappa.unwrap_or(0.0)),
            DataKind::Poly(_) => poly_data_precoder(own, &self.data_coefficients[bs]),
        }
    }

    fn an_precoders(&self, est: &ChannelEstimate, index: u64, seed: u64) -> Result<Vec<AnPrecoder>> {
        let m = self.cfg.cells;
        match self.an {
            AnKind::Sns => (0..m).map(|bs| sns_precoder(est.in_cell(bs))).collect(),
            AnKind::Cns => (0..m).map(|bs| cns_precoder(&est.stacked(bs))).collect(),
            AnKind::Poly(_) => (0..m).map(|bs| poly_an_precoder(est.in_cell(bs), &self.an_coefficients)).collect(),
            AnKind::Random => {
                let mut rng = realization_rng(seed, index, STREAM_RANDOM_AN);
                Ok((0..m).map(|_| random_an_precoder(&mut rng, self.cfg.antennas)).collect())
            }
        }
    }
}

#[derive(Clone, Copy, Debug)]
enum EveSample {
    Capacity(f64),
    Singular,
}

#[derive(Clone, Copy, Debug)]
struct Sample {
    gain: Complex64,
    intra: f64,
    inter: f64,
    an: f64,
    own_an_gain: f64,
    eve: Option<EveSample>,
}

fn with_weight(h: &CMat, w: f64) -> CMat {
    h * Complex64::new(w, 0.0)
}

fn draw(plan: &Plan, seed: u64, index: u64, with_eve: bool) -> Result<Sample> {
    let cfg = plan.cfg;
    let m = cfg.cells;
    let real = sample_realization(cfg, seed, index);
    let est = estimate_channels(&real, cfg);
    let (p, q) = (plan.p, plan.q);

    if est.no_pilot {
        // Zero estimates: nothing is beamformed, only AN of an uninformed design remains.
        let eve = with_eve.then_some(EveSample::Capacity(0.0));
        return Ok(Sample { gain: Complex64::new(0.0, 0.0), intra: 0.0, inter: 0.0, an: 0.0, own_an_gain: 0.0, eve });
    }

    let data: Vec<DataPrecoder> = (0..m).map(|bs| plan.data_precoder(&est, bs)).collect::<Result<_>>()?;
    let an = plan.an_precoders(&est, index, seed)?;

    // Target user's true channel from every base station, as a 1 x N_T row.
    let links: Vec<CMat> = (0..m)
        .map(|bs| real.user_links[bs][CELL].rows(USER, 1).into_owned())
        .collect();

    let own = mul(&links[CELL], &data[CELL].matrix);
    let w0 = cfg.gain(CELL, CELL, USER);
    let gain = own[(0, USER)] * (p * w0).sqrt();
    let intra = p * w0 * (0..cfg.users).filter(|&u| u != USER).map(|u| own[(0, u)].norm_sqr()).sum::<f64>();
    let inter = (0..m)
        .filter(|&bs| bs != CELL)
        .map(|bs| p * cfg.gain(bs, CELL, USER) * frob_sq(&mul(&links[bs], &data[bs].matrix)))
        .sum();
    let mut an_total = 0.0;
    let mut own_an_gain = 0.0;
    if q > 0.0 {
        for bs in 0..m {
            let leak = frob_sq(&an[bs].right_apply(&links[bs]));
            if bs == CELL {
                own_an_gain = leak;
            }
            an_total += q * cfg.gain(bs, CELL, USER) * leak;
        }
    } else {
        own_an_gain = frob_sq(&an[CELL].right_apply(&links[CELL]));
    }

    let eve = if with_eve { Some(eve_sample(plan, &real.eve_links, &data[CELL], &an)) } else { None };
    Ok(Sample { gain, intra, inter, an: an_total, own_an_gain, eve })
}

/// Capacity of the noise-free eavesdropper for one realization.
fn eve_sample(plan: &Plan, eve_links: &[CMat], data: &DataPrecoder, an: &[AnPrecoder]) -> EveSample {
    let cfg = plan.cfg;
    let ne = cfg.eve_antennas;
    if ne == 0 {
        return EveSample::Capacity(0.0);
    }
    if plan.q <= 0.0 {
        return EveSample::Singular;
    }
    let mut cov = CMat::zeros(ne, ne);
    for (bs, a) in an.iter().enumerate() {
        let seen = a.right_apply(&eve_links[bs]);
        cov += gram(&seen) * Complex64::new(plan.q * cfg.eve_gain(bs), 0.0);
    }
    let target = with_weight(&eve_links[CELL], cfg.eve_gain(CELL).sqrt()) * data.matrix.column(USER);
    let eig = hermitian_eigen(&cov);
    let (lo, hi) = eig.eigenvalues.iter().fold((f64::INFINITY, 0f64), |(lo, hi), &v| (lo.min(v), hi.max(v.abs())));
    if !(lo > 0.0) || hi / lo > CONDITION_LIMIT {
        return EveSample::Singular;
    }
    let proj = eig.eigenvectors.ad_mul(&target);
    let quad: f64 = proj.iter().zip(eig.eigenvalues.iter()).map(|(z, l)| z.norm_sqr() / l).sum();
    EveSample::Capacity((1.0 + plan.p * quad).log2())
}

fn run(plan: &Plan, n: usize, seed: u64, with_eve: bool) -> Result<Vec<Sample>> {
    if n < 2 {
        return Err(Error::Numerical(format!("at least 2 realizations are needed, got {n}")));
    }
    (0..n as u64).into_par_iter().map(|i| draw(plan, seed, i, with_eve)).collect()
}

fn mean(xs: impl Iterator<Item = f64>, n: usize) -> f64 {
    xs.sum::<f64>() / n as f64
}

/// Sample std of the influence values divided by sqrt(n).
fn stderr_of(influence: &[f64]) -> f64 {
    let n = influence.len() as f64;
    let mu = influence.iter().sum::<f64>() / n;
    (influence.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt()
}

struct SinrStats {
    estimate: SinrEstimate,
    /// Per-realization first-order influence on gamma.
    influence: Vec<f64>,
}

fn sinr_stats(samples: &[Sample]) -> SinrStats {
    let n = samples.len();
    let g_bar = samples.iter().fold(Complex64::new(0.0, 0.0), |acc, s| acc + s.gain) / n as f64;
    let power = mean(samples.iter().map(|s| s.gain.norm_sqr()), n);
    let other = |s: &Sample| s.intra + s.inter + s.an;
    let u_bar = mean(samples.iter().map(other), n);
    let signal = g_bar.norm_sqr();
    let components = SinrComponents {
        signal,
        signal_variance: (power - signal).max(0.0),
        intra_cell: mean(samples.iter().map(|s| s.intra), n),
        inter_cell: mean(samples.iter().map(|s| s.inter), n),
        an_leakage: mean(samples.iter().map(|s| s.an), n),
        own_an_gain: mean(samples.iter().map(|s| s.own_an_gain), n),
        noise: 1.0,
    };
    let gamma = components.gamma();
    let den = components.signal_variance + u_bar + 1.0;
    let influence: Vec<f64> = samples
        .iter()
        .map(|s| {
            let d_signal = 2.0 * (g_bar.conj() * (s.gain - g_bar)).re;
            (d_signal * (den + signal) - signal * ((s.gain.norm_sqr() - power) + (other(s) - u_bar))) / (den * den)
        })
        .collect();
    SinrStats {
        estimate: SinrEstimate { gamma, stderr_gamma: stderr_of(&influence), components, n_realizations: n },
        influence,
    }
}

fn eve_stats(samples: &[Sample]) -> (EveEstimate, Vec<f64>) {
    let n = samples.len();
    let caps: Vec<Option<f64>> = samples
        .iter()
        .map(|s| match s.eve {
            Some(EveSample::Capacity(c)) => Some(c),
            _ => None,
        })
        .collect();
    let singular_count = caps.iter().filter(|c| c.is_none()).count();
    if singular_count > 0 {
        let est = EveEstimate { capacity: f64::INFINITY, stderr: 0.0, singular_count, n_realizations: n };
        return (est, vec![0.0; n]);
    }
    let values: Vec<f64> = caps.into_iter().flatten().collect();
    let c_bar = mean(values.iter().copied(), n);
    let centered: Vec<f64> = values.iter().map(|c| c - c_bar).collect();
    (EveEstimate { capacity: c_bar, stderr: stderr_of(&values), singular_count, n_realizations: n }, centered)
}

/// SINR of the target user with each term averaged over `n` realizations.
pub fn estimate_mt_sinr(cfg: &SystemConfig, data: DataKind, an: AnKind, n: usize, seed: u64) -> Result<SinrEstimate> {
    let plan = Plan::new(cfg, data, an)?;
    Ok(sinr_stats(&run(&plan, n, seed, false)?).estimate)
}

/// Ergodic capacity of the eavesdropper. Singular AN covariances are tallied, not fatal.
pub fn estimate_eve_capacity(cfg: &SystemConfig, data: DataKind, an: AnKind, n: usize, seed: u64) -> Result<EveEstimate> {
    let plan = Plan::new(cfg, data, an)?;
    Ok(eve_stats(&run(&plan, n, seed, true)?).0)
}

/// Ergodic secrecy rate [R_mt - C_eve]^+ from one shared set of realizations.
pub fn ergodic_secrecy_rate(cfg: &SystemConfig, data: DataKind, an: AnKind, n: usize, seed: u64) -> Result<SecrecyReport> {
    let plan = Plan::new(cfg, data, an)?;
    let samples = run(&plan, n, seed, true)?;
    let sinr = sinr_stats(&samples);
    let (eve, eve_centered) = eve_stats(&samples);
    let gamma = sinr.estimate.gamma;
    let rate = (1.0 + gamma).log2();
    let to_rate = 1.0 / ((1.0 + gamma) * std::f64::consts::LN_2);
    let rate_influence: Vec<f64> = sinr.influence.iter().map(|x| x * to_rate).collect();
    let secrecy = (rate - eve.capacity).max(0.0);
    let stderr_secrecy = if eve.capacity.is_finite() {
        let combined: Vec<f64> = rate_influence.iter().zip(&eve_centered).map(|(r, c)| r - c).collect();
        stderr_of(&combined)
    } else {
        0.0
    };
    let analytic_gamma = sinr_analytic(data, an, cfg, Regularization::Optimal).ok().map(|s| s.gamma);
    Ok(SecrecyReport {
        data,
        an,
        gamma,
        rate,
        eve_capacity: eve.capacity,
        secrecy,
        stderr_gamma: sinr.estimate.stderr_gamma,
        stderr_rate: stderr_of(&rate_influence),
        stderr_eve: eve.stderr,
        stderr_secrecy,
        n_realizations: n,
        singular_count: eve.singular_count,
        components: sinr.estimate.components,
        analytic_gamma,
    })
}

/// How a secrecy rate is produced for a given configuration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Evaluator {
    Analytic,
    MonteCarlo { realizations: usize, seed: u64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhiOptimum {
    pub phi: f64,
    pub secrecy: f64,
    /// Grid samples (phi, secrecy), ascending in phi.
    pub curve: Vec<(f64, f64)>,
    /// False when the grid shows two separated local maxima.
    pub unimodal: bool,
    /// The whole grid evaluated to zero; `phi` is then only the grid midpoint.
    pub all_zero: bool,
}

pub fn secrecy_at(cfg: &SystemConfig, data: DataKind, an: AnKind, evaluator: Evaluator) -> Result<f64> {
    match evaluator {
        Evaluator::Analytic => secrecy_lower_bound(data, an, cfg).map(|s| s.secrecy),
        Evaluator::MonteCarlo { realizations, seed } => {
            ergodic_secrecy_rate(cfg, data, an, realizations, seed).map(|r| r.secrecy)
        }
    }
}

/// Maximizes the secrecy rate over the power split: a uniform grid on (0, 1) followed by a
/// golden-section search between the neighbours of the best grid point.
pub fn optimize_phi(
    cfg: &SystemConfig,
    data: DataKind,
    an: AnKind,
    evaluator: Evaluator,
    grid_size: usize,
) -> Result<PhiOptimum> {
    if grid_size < 8 {
        return Err(Error::Numerical(format!("grid size must be at least 8, got {grid_size}")));
    }
    let eval = |phi: f64| secrecy_at(&cfg.clone().with_data_fraction(phi), data, an, evaluator);
    let step = 1.0 / (grid_size + 1) as f64;
    let curve: Vec<(f64, f64)> =
        (1..=grid_size).map(|i| i as f64 * step).map(|phi| eval(phi).map(|r| (phi, r))).collect::<Result<_>>()?;

    let peak = curve.iter().map(|c| c.1).fold(0.0, f64::max);
    if peak <= 0.0 {
        return Ok(PhiOptimum { phi: 0.5, secrecy: 0.0, curve, unimodal: true, all_zero: true });
    }
    let tol = 1e-9 * peak;
    let local_maxima = (0..curve.len())
        .filter(|&i| {
            let v = curve[i].1;
            let left = if i == 0 { 0.0 } else { curve[i - 1].1 };
            let right = if i + 1 == curve.len() { 0.0 } else { curve[i + 1].1 };
            v > tol && v > left + tol && v >= right - tol
        })
        .count();
    let best = curve.iter().enumerate().fold(0, |b, (i, c)| if c.1 > curve[b].1 { i } else { b });

    let (mut lo, mut hi) = ((best as f64) * step, (best as f64 + 2.0) * step);
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let iterations = match evaluator {
        Evaluator::Analytic => 60,
        Evaluator::MonteCarlo { .. } => 12,
    };
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let (mut f1, mut f2) = (eval(x1)?, eval(x2)?);
    for _ in 0..iterations {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = eval(x2)?;
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = eval(x1)?;
        }
    }
    let (mut phi, mut secrecy) = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
    if curve[best].1 > secrecy {
        (phi, secrecy) = curve[best];
    }
    Ok(PhiOptimum { phi, secrecy, curve, unimodal: local_maxima <= 1, all_zero: false })
}
