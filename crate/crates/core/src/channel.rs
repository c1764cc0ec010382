//! Small-scale fading draws and pilot-contaminated MMSE channel estimates.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{CrossCellCsi, SystemConfig};
use crate::linalg::{complex_gaussian, CMat};

/// Stream tags keep independent randomness for the same realization index apart.
pub const STREAM_CHANNEL: u64 = 0;
pub const STREAM_RANDOM_AN: u64 = 1;
const STREAM_TAGS: u64 = 4;

/// Deterministic generator for realization `index` of a run seeded with `seed`.
pub fn realization_rng(seed: u64, index: u64, tag: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index * STREAM_TAGS + tag);
    rng
}

/// Everything random about one channel draw, including the pilot-phase noise,
/// so that estimation is a pure function of the realization.
#[derive(Clone, Debug)]
pub struct ChannelRealization {
    /// `user_links[bs][cell]`: K x N_T unit-variance gains from `bs` to the users of `cell`.
    pub user_links: Vec<Vec<CMat>>,
    /// `eve_links[bs]`: N_E x N_T unit-variance gains from `bs` to the eavesdropper.
    pub eve_links: Vec<CMat>,
    /// Pilot noise seen at each BS, K x N_T, unit variance.
    pub pilot_noise: Vec<CMat>,
    /// Extra unit-variance noise for decoupled cross-cell observations, `[bs][cell]`, empty on the diagonal.
    pub cross_noise: Vec<Vec<CMat>>,
    /// (seed, index) when drawn through [`sample_realization`].
    pub origin: Option<(u64, u64)>,
}

pub fn sample_small_scale<R: Rng + ?Sized>(rng: &mut R, cfg: &SystemConfig) -> ChannelRealization {
    let (m, k, nt) = (cfg.cells, cfg.users, cfg.antennas);
    let user_links = (0..m).map(|_| (0..m).map(|_| complex_gaussian(rng, k, nt, 1.0)).collect()).collect();
    let eve_links = (0..m).map(|_| complex_gaussian(rng, cfg.eve_antennas, nt, 1.0)).collect();
    let pilot_noise = (0..m).map(|_| complex_gaussian(rng, k, nt, 1.0)).collect();
    let cross_noise = (0..m)
        .map(|bs| {
            (0..m)
                .map(|cell| {
                    if cell == bs || cfg.cross_csi == CrossCellCsi::SharedPilot {
                        CMat::zeros(0, 0)
                    } else {
                        complex_gaussian(rng, k, nt, 1.0)
                    }
                })
                .collect()
        })
        .collect();
    ChannelRealization { user_links, eve_links, pilot_noise, cross_noise, origin: None }
}

pub fn sample_realization(cfg: &SystemConfig, seed: u64, index: u64) -> ChannelRealization {
    let mut rng = realization_rng(seed, index, STREAM_CHANNEL);
    let mut r = sample_small_scale(&mut rng, cfg);
    r.origin = Some((seed, index));
    r
}

/// Closed-form estimation statistics for the users of one cell.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimationStats {
    /// `coherent[bs][user]`: pilot energy times squared gain over the BS's pilot SNR denominator.
    /// The in-cell entry scales the useful signal; out-of-cell entries drive pilot contamination.
    pub coherent: Vec<Vec<f64>>,
    /// `error[bs][user]`: gain-weighted estimation error power of BS `bs`.
    pub error: Vec<Vec<f64>>,
    /// Per-user in-cell estimation error variance (unit-gain units).
    pub error_variance: Vec<f64>,
    /// Per-user in-cell estimate variance (unit-gain units).
    pub estimate_variance: Vec<f64>,
}

pub fn estimation_stats(cfg: &SystemConfig, cell: usize) -> EstimationStats {
    let e = cfg.pilot_energy();
    let (m, k) = (cfg.cells, cfg.users);
    let mut coherent = vec![vec![0.0; k]; m];
    let mut error = vec![vec![0.0; k]; m];
    for bs in 0..m {
        for u in 0..k {
            let total: f64 = (0..m).map(|l| cfg.gain(bs, l, u)).sum();
            let own = cfg.gain(bs, bs, u);
            let link = cfg.gain(bs, cell, u);
            let denom = 1.0 + e * total;
            coherent[bs][u] = e * link * link / denom;
            error[bs][u] = link * (1.0 + e * (total - own)) / denom;
        }
    }
    let mut error_variance = vec![0.0; k];
    let mut estimate_variance = vec![0.0; k];
    for u in 0..k {
        let total: f64 = (0..m).map(|l| cfg.gain(cell, l, u)).sum();
        let denom = 1.0 + e * total;
        estimate_variance[u] = e * cfg.gain(cell, cell, u) / denom;
        error_variance[u] = (1.0 + e * (total - cfg.gain(cell, cell, u))) / denom;
    }
    EstimationStats { coherent, error, error_variance, estimate_variance }
}

/// MMSE estimates held by every base station.
#[derive(Clone, Debug)]
pub struct ChannelEstimate {
    /// `shared[bs][cell]`: estimate at `bs` of its channel to the users of `cell`, all
    /// built from one pilot observation per user index and hence collinear across `cell`.
    pub shared: Vec<Vec<CMat>>,
    /// Decoupled cross-cell estimates, `[bs][cell]`; empty matrices on the diagonal and
    /// when the configuration asks for shared-pilot collaborative CSI.
    pub decoupled: Vec<Vec<CMat>>,
    pub stats: Vec<EstimationStats>,
    /// True when the pilot energy is zero and every estimate is identically zero.
    pub no_pilot: bool,
}

impl ChannelEstimate {
    pub fn in_cell(&self, bs: usize) -> &CMat {
        &self.shared[bs][bs]
    }

    /// Estimate of the link from `bs` to `cell` used for collaborative precoding.
    pub fn collaborative(&self, bs: usize, cell: usize) -> &CMat {
        let d = &self.decoupled[bs][cell];
        if cell == bs || d.nrows() == 0 {
            &self.shared[bs][cell]
        } else {
            d
        }
    }

    /// All-cell stack (M*K x N_T) used by collaborative precoders at `bs`, cells in index order.
    pub fn stacked(&self, bs: usize) -> CMat {
        let m = self.shared.len();
        let first = &self.shared[bs][bs];
        let (k, nt) = (first.nrows(), first.ncols());
        let mut out = CMat::zeros(m * k, nt);
        for cell in 0..m {
            out.rows_mut(cell * k, k).copy_from(self.collaborative(bs, cell));
        }
        out
    }
}

pub fn estimate_channels(real: &ChannelRealization, cfg: &SystemConfig) -> ChannelEstimate {
    let (m, k, nt) = (cfg.cells, cfg.users, cfg.antennas);
    let e = cfg.pilot_energy();
    let no_pilot = e <= 0.0;
    let mut shared = vec![vec![CMat::zeros(k, nt); m]; m];
    let mut decoupled = vec![vec![CMat::zeros(0, 0); m]; m];
    if !no_pilot {
        for bs in 0..m {
            let mut obs = real.pilot_noise[bs].clone();
            for u in 0..k {
                for l in 0..m {
                    let w = (e * cfg.gain(bs, l, u)).sqrt();
                    let src = real.user_links[bs][l].row(u);
                    let mut dst = obs.row_mut(u);
                    dst.zip_apply(&src, |d, s| *d += s * w);
                }
            }
            for u in 0..k {
                let total: f64 = (0..m).map(|l| cfg.gain(bs, l, u)).sum();
                let denom = 1.0 + e * total;
                for cell in 0..m {
                    let g = cfg.gain(bs, cell, u);
                    let scale = (e * g).sqrt() / denom;
                    let row = obs.row(u) * Complex64::new(scale, 0.0);
                    shared[bs][cell].row_mut(u).copy_from(&row);
                }
            }
            if cfg.cross_csi == CrossCellCsi::Decoupled {
                for cell in (0..m).filter(|&c| c != bs) {
                    let mut est = CMat::zeros(k, nt);
                    for u in 0..k {
                        let total: f64 = (0..m).map(|l| cfg.gain(bs, l, u)).sum();
                        let g = cfg.gain(bs, cell, u);
                        let denom = 1.0 + e * total;
                        let sig = (e * g).sqrt();
                        let noise = (1.0 + e * (total - g)).sqrt();
                        let scale = sig / denom;
                        let row = (real.user_links[bs][cell].row(u) * Complex64::new(sig, 0.0)
                            + real.cross_noise[bs][cell].row(u) * Complex64::new(noise, 0.0))
                            * Complex64::new(scale, 0.0);
                        est.row_mut(u).copy_from(&row);
                    }
                    decoupled[bs][cell] = est;
                }
            }
        }
    }
    let stats = (0..m).map(|c| estimation_stats(cfg, c)).collect();
    ChannelEstimate { shared, decoupled, stats, no_pilot }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::frob_sq;

    fn cfg(m: usize, rho: f64, energy: f64) -> SystemConfig {
        SystemConfig::simplified(m, 8, 64, 4, 10.0, 0.75, rho).with_pilot_energy(energy)
    }

    #[test]
    fn draws_have_unit_variance_and_are_deterministic() {
        let c = cfg(2, 0.3, 10.0);
        let a = sample_realization(&c, 7, 3);
        let b = sample_realization(&c, 7, 3);
        assert_eq!(a.user_links[1][0], b.user_links[1][0]);
        assert_eq!(a.pilot_noise[0], b.pilot_noise[0]);
        let v = frob_sq(&a.user_links[0][0]) / (8.0 * 64.0);
        assert!((0.8..1.2).contains(&v));

        let mean: f64 = (0..100)
            .map(|i| frob_sq(&sample_realization(&c, 11, i).user_links[0][1]) / (8.0 * 64.0))
            .sum::<f64>()
            / 100.0;
        assert!((mean - 1.0).abs() < 0.02, "{mean}");
    }

    #[test]
    fn statistics_match_worked_examples() {
        let s = estimation_stats(&cfg(2, 0.5, 10.0), 0);
        assert!((s.estimate_variance[0] - 0.625).abs() < 1e-12);
        assert!((s.error_variance[0] - 0.375).abs() < 1e-12);

        let s = estimation_stats(&cfg(2, 0.3, 10.0), 0);
        assert!((s.coherent[0][0] - 10.0 / 14.0).abs() < 1e-12);
        assert!((s.error[0][0] - 4.0 / 14.0).abs() < 1e-12);

        let s = estimation_stats(&cfg(1, 0.0, 10.0), 0);
        assert!((s.error[0][0] - 1.0 / 11.0).abs() < 1e-12);
        assert!((s.coherent[0][0] + s.error[0][0] - 1.0).abs() < 1e-12);
        let s = estimation_stats(&cfg(1, 0.0, 1e12), 0);
        assert!(s.error[0][0] < 1e-11 && (s.estimate_variance[0] - 1.0).abs() < 1e-11);
    }

    #[test]
    fn contaminated_estimates_are_collinear() {
        let c = cfg(3, 0.4, 10.0);
        let est = estimate_channels(&sample_realization(&c, 1, 0), &c);
        let (a, b) = (&est.shared[0][1], &est.shared[0][2]);
        let ratio = (c.gain(0, 1, 0) / c.gain(0, 2, 0)).sqrt();
        for (x, y) in a.iter().zip(b.iter()) {
            assert!((x - y * ratio).norm() <= 1e-12 * x.norm().max(1e-300));
        }
    }

    #[test]
    fn zero_pilot_energy_yields_zero_estimates() {
        let c = cfg(2, 0.3, 0.0);
        let est = estimate_channels(&sample_realization(&c, 1, 0), &c);
        assert!(est.no_pilot);
        assert_eq!(frob_sq(&est.shared[0][0]), 0.0);
    }

    #[test]
    fn empirical_variances_and_orthogonality() {
        // 10^4+ samples per statistic: 20 draws x 8 users x 64 antennas.
        let c = cfg(2, 0.3, 10.0);
        let s = estimation_stats(&c, 0);
        for (bs, cell) in [(0usize, 0usize), (0, 1), (1, 0)] {
            let mut n = 0usize;
            let (mut est_pow, mut err_pow, mut cross) = (0.0, 0.0, Complex64::new(0.0, 0.0));
            let mut est_sq = 0.0;
            for i in 0..20 {
                let r = sample_realization(&c, 5, i);
                let e = estimate_channels(&r, &c);
                for (hh, h) in e.collaborative(bs, cell).iter().zip(r.user_links[bs][cell].iter()) {
                    let err = h - hh;
                    est_pow += hh.norm_sqr();
                    est_sq += hh.norm_sqr().powi(2);
                    err_pow += err.norm_sqr();
                    cross += hh * err.conj();
                    n += 1;
                }
            }
            let nf = n as f64;
            let est_var = est_pow / nf;
            let err_var = err_pow / nf;
            let total = 1.0 + 10.0 * 1.3;
            let expect_est = 10.0 * c.gain(bs, cell, 0) / total;
            let sd = ((est_sq / nf - est_var * est_var) / nf).sqrt();
            assert!((est_var - expect_est).abs() < 3.0 * sd + 1e-3, "{bs}{cell}: {est_var} vs {expect_est}");
            assert!((est_var + err_var - 1.0).abs() < 0.03);
            let corr = cross.norm() / nf / (est_var * err_var).sqrt();
            assert!(corr < 0.02, "correlation {corr}");
        }
        assert!((s.estimate_variance[0] + s.error_variance[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn shared_pilot_stack_is_rank_deficient() {
        let c = cfg(2, 0.3, 10.0).with_cross_csi(CrossCellCsi::SharedPilot);
        let est = estimate_channels(&sample_realization(&c, 1, 0), &c);
        let s = est.stacked(0);
        assert_eq!(s.nrows(), 16);
        assert_eq!(s.rows(8, 8).into_owned(), est.shared[0][1]);
        let sv = s.singular_values();
        assert!(sv.iter().filter(|v| **v > 1e-8 * sv.max()).count() == 8);
    }
}
