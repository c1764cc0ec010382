//! Closed-form large-system performance: AN leakage, SINR of every conventional
//! data precoder, the eavesdropper capacity bound, secrecy lower bounds, the
//! eavesdropper-antenna frontier and precoder crossover thresholds.
//!
//! Two evaluation routes exist. The general route works on arbitrary path-loss
//! gains; the simplified route uses the closed forms that hold when every in-cell
//! gain is one and every cross-cell gain is rho. On simplified inputs both routes
//! agree to rounding.

use crate::an_precoder::AnKind;
use crate::asymptotics::g_function;
use crate::channel::estimation_stats;
use crate::config::SystemConfig;
use crate::data_precoder::DataKind;
use crate::error::{Error, Result};

/// The analytics describe user 0 of cell 0, which is also where the eavesdropper sits.
const CELL: usize = 0;
const USER: usize = 0;

/// Per-link quantities of the target user that every closed form draws from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinkSummary {
    pub own_gain: f64,
    /// Sum of the gains from the other base stations to the target user.
    pub other_gain: f64,
    /// Coherent estimate power of the serving base station.
    pub coherent: f64,
    /// Gain-weighted estimation error of the serving base station.
    pub error: f64,
    /// Gain-weighted estimation error summed over all base stations.
    pub error_all: f64,
    /// Coherent interference from pilot contamination, relative to the useful signal.
    pub contamination: f64,
    /// In-cell error variance in unit-gain units.
    pub error_variance: f64,
}

pub fn link_summary(cfg: &SystemConfig) -> LinkSummary {
    let s = estimation_stats(cfg, CELL);
    let m = cfg.cells;
    let coherent = s.coherent[CELL][USER];
    LinkSummary {
        own_gain: cfg.gain(CELL, CELL, USER),
        other_gain: (0..m).filter(|&b| b != CELL).map(|b| cfg.gain(b, CELL, USER)).sum(),
        coherent,
        error: s.error[CELL][USER],
        error_all: (0..m).map(|b| s.error[b][USER]).sum(),
        contamination: if coherent > 0.0 {
            (0..m).filter(|&b| b != CELL).map(|b| s.coherent[b][USER]).sum::<f64>() / coherent
        } else {
            f64::INFINITY
        },
        error_variance: s.error_variance[USER],
    }
}

/// Simplified-model estimation constants: coherent fraction, error fraction, a and c.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimplifiedConstants {
    pub rho: f64,
    pub coherent: f64,
    pub error: f64,
    pub a: f64,
    pub c: f64,
}

pub fn simplified_constants(cfg: &SystemConfig) -> Result<SimplifiedConstants> {
    let rho = cfg
        .rho()
        .ok_or_else(|| Error::Unsupported("closed form requires the simplified path-loss model".into()))?;
    let m = cfg.cells as f64;
    let a = 1.0 + (m - 1.0) * rho;
    let c = 1.0 + (m - 1.0) * rho * rho;
    let e = cfg.pilot_energy();
    Ok(SimplifiedConstants {
        rho,
        coherent: e / (1.0 + a * e),
        error: (1.0 + (m - 1.0) * rho * e) / (1.0 + a * e),
        a,
        c,
    })
}

/// AN leakage to the target user: total, per AN dimension, and the AN rank.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Leakage {
    pub total: f64,
    pub per_dimension: f64,
    pub rank: usize,
}

fn check_an(an: AnKind, cfg: &SystemConfig) -> Result<usize> {
    if let AnKind::Poly(_) = an {
        return Err(Error::Unsupported("no closed-form leakage for the polynomial AN precoder".into()));
    }
    an.rank(cfg.cells, cfg.users, cfg.antennas).map_err(|_| {
        Error::Infeasible(format!(
            "{an} is infeasible for M = {}, K = {}, N_T = {}",
            cfg.cells, cfg.users, cfg.antennas
        ))
    })
}

pub fn an_leakage(an: AnKind, cfg: &SystemConfig) -> Result<Leakage> {
    let rank = check_an(an, cfg)?;
    let l = link_summary(cfg);
    let per_dimension = match an {
        AnKind::Sns => l.other_gain + l.own_gain * l.error_variance,
        AnKind::Cns => l.error_all,
        AnKind::Random => l.other_gain + l.own_gain,
        AnKind::Poly(_) => unreachable!(),
    };
    Ok(Leakage { total: per_dimension * rank as f64, per_dimension, rank })
}

/// Simplified-model normalized leakage, straight from the closed forms.
pub fn an_leakage_simplified(an: AnKind, cfg: &SystemConfig) -> Result<f64> {
    check_an(an, cfg)?;
    let s = simplified_constants(cfg)?;
    Ok(match an {
        AnKind::Sns => s.a - s.coherent,
        AnKind::Cns => s.a * (1.0 - s.coherent),
        AnKind::Random => s.a,
        AnKind::Poly(_) => unreachable!(),
    })
}

/// Average in-cell AN leakage power seen by the polynomial data-precoder design.
/// The polynomial AN precoder approximates the in-cell null space, so it uses the
/// null-space value.
pub fn an_leakage_power(an: AnKind, cfg: &SystemConfig) -> f64 {
    let s = estimation_stats(cfg, CELL);
    let k = cfg.users as f64;
    let budget = (1.0 - cfg.data_fraction) * cfg.total_power;
    let avg = |f: &dyn Fn(usize) -> f64| (0..cfg.users).map(f).sum::<f64>() / k;
    match an {
        AnKind::Random => budget * avg(&|u| cfg.gain(CELL, CELL, u)),
        _ => budget * avg(&|u| cfg.gain(CELL, CELL, u) * s.error_variance[u]),
    }
}

/// How the regularization of an RCI precoder is chosen.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Regularization {
    Optimal,
    Fixed(f64),
}

/// Inverse-SINR decomposition for the MF and ZF precoders: 1/gamma is the sum of the fields.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InverseSinrTerms {
    pub an_leakage: f64,
    /// Non-coherent interference from other cells plus coherent pilot contamination.
    pub inter_cell: f64,
    pub estimation_loss: f64,
    /// Residual multi-user interference of the matched filter (zero for ZF).
    pub multiuser: f64,
    pub noise: f64,
}

impl InverseSinrTerms {
    pub fn total(&self) -> f64 {
        self.an_leakage + self.inter_cell + self.estimation_loss + self.multiuser + self.noise
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnalyticSinr {
    pub data: DataKind,
    pub an: AnKind,
    pub gamma: f64,
    /// Relative regularization used by RCI precoders.
    pub kappa: Option<f64>,
    /// Effective estimation-aware SNR of RCI precoders.
    pub effective_snr: Option<f64>,
    pub terms: Option<InverseSinrTerms>,
}

/// Inverse SINR of an RCI precoder at a given load, regularization and effective SNR.
pub fn rci_inverse_term(load: f64, kappa: f64, snr: f64) -> Result<f64> {
    let g = g_function(load, kappa)?;
    let s = (1.0 + g).powi(2);
    Ok((snr + s) / (g * (snr + snr * kappa / load * s)))
}

fn check_data(data: DataKind, cfg: &SystemConfig) -> Result<()> {
    let (m, k, nt) = (cfg.cells, cfg.users, cfg.antennas);
    match data {
        DataKind::Szf if k >= nt => Err(Error::Infeasible(format!("SZF needs K < N_T (K = {k}, N_T = {nt})"))),
        DataKind::Czf if m * k >= nt => Err(Error::Infeasible(format!("CZF needs M K < N_T (M K = {}, N_T = {nt})", m * k))),
        DataKind::Poly(_) => Err(Error::Unsupported("no closed-form SINR for the polynomial data precoder".into())),
        _ => Ok(()),
    }
}

fn regularization(data: DataKind, reg: Regularization, optimal: f64) -> Result<Option<f64>> {
    if !data.is_regularized() {
        return Ok(None);
    }
    match reg {
        Regularization::Optimal => Ok(Some(optimal)),
        Regularization::Fixed(k) if k > 0.0 && k.is_finite() => Ok(Some(k)),
        Regularization::Fixed(k) => Err(Error::Numerical(format!(
            "{data} regularization must be positive, got {k}; use the ZF precoder for the limit"
        ))),
    }
}

/// SINR of the target user from the general path-loss formulas.
pub fn sinr_analytic(data: DataKind, an: AnKind, cfg: &SystemConfig, reg: Regularization) -> Result<AnalyticSinr> {
    check_data(data, cfg)?;
    let leak = an_leakage(an, cfg)?;
    let l = link_summary(cfg);
    let (p, q) = cfg.derived_powers(leak.rank)?;
    let k = cfg.users as f64;
    let m = cfg.cells as f64;
    let load = cfg.load();
    let phi_p = cfg.data_fraction * cfg.total_power;
    let an_term = q / p * leak.total;
    let noise_term = k / phi_p;

    let base = |interference: f64, error: f64| {
        let snr = l.own_gain * k / (interference + an_term + noise_term);
        snr * l.coherent / (snr * error + 1.0)
    };
    // Split of 1/snr-hat into its sources, each scaled by `w`.
    let split = |w: f64, error: f64, interference: f64, multiuser: f64| InverseSinrTerms {
        an_leakage: w * an_term / (l.own_gain * k),
        inter_cell: w * interference / (l.own_gain * k) + l.contamination,
        estimation_loss: w * error,
        multiuser,
        noise: w * noise_term / (l.own_gain * k),
    };

    let selfish_interference = k * l.other_gain;
    let out = match data {
        DataKind::Mf | DataKind::Szf => {
            let w = if data == DataKind::Mf { load / l.coherent } else { load / ((1.0 - load) * l.coherent) };
            let terms = split(w, l.error, selfish_interference, if data == DataKind::Mf { load } else { 0.0 });
            AnalyticSinr { data, an, gamma: 1.0 / terms.total(), kappa: None, effective_snr: None, terms: Some(terms) }
        }
        DataKind::Czf => {
            let w = load / ((1.0 - m * load) * l.coherent);
            let terms = split(w, l.error_all, 0.0, 0.0);
            AnalyticSinr { data, an, gamma: 1.0 / terms.total(), kappa: None, effective_snr: None, terms: Some(terms) }
        }
        DataKind::Srci => {
            let snr = base(selfish_interference, l.error);
            let kappa = regularization(data, reg, load / snr)?.unwrap();
            let gamma = 1.0 / (rci_inverse_term(load, kappa, snr)? + l.contamination);
            AnalyticSinr { data, an, gamma, kappa: Some(kappa), effective_snr: Some(snr), terms: None }
        }
        DataKind::Crci => {
            // The stacked system has load M beta; the per-cell effective SNR is scaled by M
            // so that the optimum regularization stays beta over the per-cell SNR.
            let snr = m * base(0.0, l.error_all);
            let kappa = regularization(data, reg, m * load / snr)?.unwrap();
            let gamma = 1.0 / (rci_inverse_term(m * load, kappa, snr)? + l.contamination);
            AnalyticSinr { data, an, gamma, kappa: Some(kappa), effective_snr: Some(snr), terms: None }
        }
        DataKind::Poly(_) => unreachable!(),
    };
    Ok(out)
}

/// SINR from the simplified-model closed forms.
pub fn sinr_simplified(data: DataKind, an: AnKind, cfg: &SystemConfig, reg: Regularization) -> Result<AnalyticSinr> {
    check_data(data, cfg)?;
    let qt = an_leakage_simplified(an, cfg)?;
    let s = simplified_constants(cfg)?;
    let (th, vt, a) = (s.coherent, s.error, s.a);
    let phi = cfg.data_fraction;
    let pt = cfg.total_power;
    let b = cfg.load();
    let m = cfg.cells as f64;
    let contam = (m - 1.0) * s.rho * s.rho;
    let plain = |gamma: f64| AnalyticSinr { data, an, gamma, kappa: None, effective_snr: None, terms: None };
    Ok(match data {
        DataKind::Szf => plain(
            th * phi * (1.0 - b)
                / ((1.0 - phi) * b * qt + b * phi * (a - th) + contam * th * phi * (1.0 - b) + b / pt),
        ),
        DataKind::Czf => plain(
            th * phi * (1.0 - m * b)
                / ((1.0 - phi) * b * qt + b * phi * a * (1.0 - th) + contam * th * phi * (1.0 - m * b) + b / pt),
        ),
        DataKind::Mf => plain(th * phi / ((1.0 - phi) * b * qt + b * phi * a + contam * th * phi + b / pt)),
        DataKind::Srci => {
            let big = phi / (phi * s.rho * (m - 1.0) + (1.0 - phi) * qt + 1.0 / pt);
            let snr = big * th / (big * vt + 1.0);
            let kappa = regularization(data, reg, b / snr)?.unwrap();
            let inv = if reg == Regularization::Optimal { 1.0 / g_function(b, kappa)? } else { rci_inverse_term(b, kappa, snr)? };
            AnalyticSinr { data, an, gamma: 1.0 / (inv + contam), kappa: Some(kappa), effective_snr: Some(snr), terms: None }
        }
        DataKind::Crci => {
            let big = phi / ((1.0 - phi) * qt + 1.0 / pt);
            let snr = m * big * th / (big * a * vt + 1.0);
            let kappa = regularization(data, reg, m * b / snr)?.unwrap();
            let inv = if reg == Regularization::Optimal {
                1.0 / g_function(m * b, kappa)?
            } else {
                rci_inverse_term(m * b, kappa, snr)?
            };
            AnalyticSinr { data, an, gamma: 1.0 / (inv + contam), kappa: Some(kappa), effective_snr: Some(snr), terms: None }
        }
        DataKind::Poly(_) => unreachable!(),
    })
}

/// Residuals of the two exact relations linking the SZF, MF and CZF closed forms.
pub fn sinr_relations(an: AnKind, cfg: &SystemConfig) -> Result<(f64, f64)> {
    let s = simplified_constants(cfg)?;
    let b = cfg.load();
    let m = cfg.cells as f64;
    let g = |d| sinr_simplified(d, an, cfg, Regularization::Optimal).map(|x| x.gamma);
    let (szf, mf) = (g(DataKind::Szf)?, g(DataKind::Mf)?);
    let first = szf / mf - (1.0 + b * (s.c * szf - 1.0));
    let second = match g(DataKind::Czf) {
        Ok(czf) => czf / szf - ((1.0 - m * b) / (1.0 - b) + s.a * (s.a - 1.0) * b / (1.0 - b) * czf),
        Err(Error::Infeasible(_)) => 0.0,
        Err(e) => return Err(e),
    };
    Ok((first, second))
}

/// Upper bound on the eavesdropper's ergodic capacity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EveBound {
    Finite(f64),
    /// Too many eavesdropper antennas for the bound to apply; secrecy is reported as zero.
    OutOfValidity,
    /// No AN power: the noise-free eavesdropper decodes everything.
    Unbounded,
}

impl EveBound {
    pub fn value(self) -> f64 {
        match self {
            EveBound::Finite(v) => v,
            _ => f64::INFINITY,
        }
    }
}

/// Capacity bound for an AN precoder of rank `rank`.
pub fn eve_capacity_bound(cfg: &SystemConfig, rank: usize) -> EveBound {
    let phi = cfg.data_fraction;
    if phi >= 1.0 {
        return EveBound::Unbounded;
    }
    let alpha = cfg.eve_ratio();
    if alpha == 0.0 {
        return EveBound::Finite(0.0);
    }
    let (a, c) = cfg.interference_factors();
    let den = a - c * alpha * cfg.antennas as f64 / (rank as f64 * a);
    if den <= 0.0 {
        return EveBound::OutOfValidity;
    }
    EveBound::Finite((1.0 + alpha * phi / (cfg.load() * (1.0 - phi) * den)).log2())
}

/// Necessary condition for the eavesdropper's AN covariance to be invertible.
pub fn eve_covariance_invertible(cfg: &SystemConfig, rank: usize) -> bool {
    cfg.eve_antennas <= cfg.cells * rank
}

#[derive(Clone, Debug, PartialEq)]
pub struct SecrecyAnalytics {
    pub sinr: AnalyticSinr,
    pub rate: f64,
    pub eve: EveBound,
    pub secrecy: f64,
    /// Eavesdropper auxiliary of the closed form, when the simplified model applies.
    pub chi: Option<f64>,
    /// Largest eavesdropper-antenna ratio with non-zero secrecy (MF, SZF and CZF only).
    pub alpha_s: Option<f64>,
}

/// Secrecy lower bound [log2(1 + gamma) - C_eve]^+ on the general path.
pub fn secrecy_lower_bound(data: DataKind, an: AnKind, cfg: &SystemConfig) -> Result<SecrecyAnalytics> {
    let sinr = sinr_analytic(data, an, cfg, Regularization::Optimal)?;
    let rank = an.rank(cfg.cells, cfg.users, cfg.antennas)?;
    let rate = (1.0 + sinr.gamma).log2();
    let eve = eve_capacity_bound(cfg, rank);
    let secrecy = match eve {
        EveBound::Finite(c) => (rate - c).max(0.0),
        _ => 0.0,
    };
    let chi = cfg.rho().map(|_| chi(cfg, rank));
    let alpha_s = match data {
        DataKind::Mf | DataKind::Szf | DataKind::Czf if cfg.rho().is_some() => Some(alpha_s(data, an, cfg)?),
        _ => None,
    };
    Ok(SecrecyAnalytics { sinr, rate, eve, secrecy, chi, alpha_s })
}

fn chi(cfg: &SystemConfig, rank: usize) -> f64 {
    let (a, c) = cfg.interference_factors();
    let b = cfg.load();
    let alpha = cfg.eve_ratio();
    if alpha == 0.0 {
        return f64::INFINITY;
    }
    a * b / alpha - b * c * cfg.antennas as f64 / (a * rank as f64)
}

/// Secrecy lower bound from the single closed-form expression of the simplified model.
pub fn secrecy_closed_form(data: DataKind, an: AnKind, cfg: &SystemConfig) -> Result<f64> {
    check_data(data, cfg)?;
    let qt = an_leakage_simplified(an, cfg)?;
    let rank = an.rank(cfg.cells, cfg.users, cfg.antennas)?;
    let s = simplified_constants(cfg)?;
    let (th, a, c) = (s.coherent, s.a, s.c);
    let (b, phi, pt) = (cfg.load(), cfg.data_fraction, cfg.total_power);
    let m = cfg.cells as f64;
    let (shift, useful) = match data {
        DataKind::Mf => (a - qt, th),
        DataKind::Szf => (a - th - qt, th * (1.0 - b)),
        DataKind::Czf => (a - a * th - qt, th * (1.0 - m * b)),
        _ => return Err(Error::Unsupported(format!("no single closed form for {data}"))),
    };
    let base = (qt + 1.0 / pt) * b + shift * b * phi;
    let rate_ratio = (base + c * useful * phi) / (base + (c - 1.0) * useful * phi);
    let x = chi(cfg, rank);
    let eve_factor = if x.is_infinite() {
        1.0
    } else if x <= 0.0 {
        return Ok(0.0);
    } else {
        (x - x * phi) / ((1.0 - x) * phi + x)
    };
    let v = rate_ratio * eve_factor;
    Ok(if v > 1.0 { v.log2() } else { 0.0 })
}

/// Largest eavesdropper-antenna ratio admitting non-zero secrecy.
pub fn alpha_s(data: DataKind, an: AnKind, cfg: &SystemConfig) -> Result<f64> {
    check_data(data, cfg)?;
    let qt = an_leakage_simplified(an, cfg)?;
    let rank = an.rank(cfg.cells, cfg.users, cfg.antennas)?;
    let s = simplified_constants(cfg)?;
    let (th, a, c) = (s.coherent, s.a, s.c);
    let b = cfg.load();
    let m = cfg.cells as f64;
    let ratio = cfg.antennas as f64 / rank as f64;
    let f = match data {
        DataKind::Mf => 1.0,
        DataKind::Szf => 1.0 - b,
        DataKind::Czf => 1.0 - m * b,
        _ => return Err(Error::Unsupported(format!("no eavesdropper frontier for {data}"))),
    };
    Ok(f * a * a * th / (qt * a + c * th * f * ratio + a / cfg.total_power))
}

/// A pilot-energy threshold that may not exist.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Threshold {
    Energy(f64),
    Never(&'static str),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Crossovers {
    /// SZF beats MF for fewer users than this.
    pub users_szf_over_mf: f64,
    /// CZF beats SZF for fewer users than this.
    pub users_czf_over_szf: f64,
    /// SZF beats MF above this pilot energy (null-space AN assumed).
    pub pilot_szf_over_mf: Threshold,
    /// CZF beats SZF above this pilot energy (null-space AN assumed).
    pub pilot_czf_over_szf: Threshold,
    /// Above this load MF wins for every pilot energy.
    pub load_mf: f64,
    /// Above this load SZF beats CZF for every pilot energy.
    pub load_szf: f64,
}

pub fn crossover_thresholds(an: AnKind, cfg: &SystemConfig) -> Result<Crossovers> {
    let qt = an_leakage_simplified(an, cfg)?;
    let s = simplified_constants(cfg)?;
    let (th, a, rho) = (s.coherent, s.a, s.rho);
    let (phi, pt, b) = (cfg.data_fraction, cfg.total_power, cfg.load());
    let (m, nt) = (cfg.cells as f64, cfg.antennas as f64);
    let users_szf_over_mf = th * phi * nt / ((1.0 - phi) * qt + a * phi + 1.0 / pt);
    let users_czf_over_szf =
        rho * phi * th * nt / ((1.0 - phi) * qt + (a * (1.0 - th) + rho * th * m) * phi + 1.0 / pt);
    let pilot = |gain: f64| {
        let den = (gain * phi * (1.0 - b) / b + 1.0) / (a + 1.0 / pt) - a;
        if den > 0.0 {
            Threshold::Energy(1.0 / den)
        } else {
            Threshold::Never("load too high: the better-estimated precoder never wins")
        }
    };
    let load = |gain: f64| {
        let den = a * a + a / pt + gain * phi - 1.0;
        if den > 0.0 {
            gain * phi / den
        } else {
            f64::INFINITY
        }
    };
    Ok(Crossovers {
        users_szf_over_mf,
        users_czf_over_szf,
        pilot_szf_over_mf: pilot(1.0),
        pilot_czf_over_szf: pilot(rho),
        load_mf: load(1.0),
        load_szf: load(rho),
    })
}
