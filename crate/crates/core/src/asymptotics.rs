//! Large-system quantities: spectral moments of the normalized Gram matrix, the
//! RCI resolvent function and the offline coefficient solvers for the polynomial
//! data and AN precoders.

use nalgebra::{DMatrix, DVector};

use crate::channel::estimation_stats;
use crate::config::SystemConfig;
use crate::error::{Error, Result};

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Limit of (1/K) tr{W^order} for W the K x K Gram matrix of a K x N_T matrix with
/// i.i.d. entries of variance 1/N_T, K/N_T = `load`. Order 0 is 1 by convention.
pub fn mp_moment(order: usize, load: f64) -> f64 {
    if order == 0 {
        return 1.0;
    }
    (0..order)
        .map(|i| binomial(order, i) * binomial(order, i + 1) * load.powi(i as i32))
        .sum::<f64>()
        / order as f64
}

#[derive(Clone, Debug, PartialEq)]
pub struct MomentTable {
    pub load: f64,
    moments: Vec<f64>,
}

impl MomentTable {
    pub fn new(load: f64, max_order: usize) -> Self {
        MomentTable { load, moments: (0..=max_order).map(|l| mp_moment(l, load)).collect() }
    }

    pub fn get(&self, order: usize) -> f64 {
        self.moments.get(order).copied().unwrap_or_else(|| mp_moment(order, self.load))
    }

    pub fn max_order(&self) -> usize {
        self.moments.len() - 1
    }

    /// Hankel matrix with entries moment(i + j + offset), i, j in 0..n.
    fn hankel(&self, n: usize, offset: usize) -> DMatrix<f64> {
        DMatrix::from_fn(n, n, |i, j| self.get(i + j + offset))
    }

    fn vector(&self, n: usize, offset: usize) -> DVector<f64> {
        DVector::from_fn(n, |j, _| self.get(j + offset))
    }
}

/// Asymptotic resolvent trace of the RCI precoder at the given load and regularization.
pub fn g_function(load: f64, kappa: f64) -> Result<f64> {
    if kappa < 0.0 || !kappa.is_finite() && kappa != f64::INFINITY {
        return Err(Error::Numerical(format!("regularization must be non-negative, got {kappa}")));
    }
    if kappa == 0.0 {
        // Below full load the Gram matrix of the precoder has a null space and the
        // resolvent grows like (1 - beta)/kappa; above it the limit is finite.
        return if load > 1.0 { Ok(1.0 / (load - 1.0)) } else { Ok(f64::INFINITY) };
    }
    if kappa == f64::INFINITY {
        return Ok(0.0);
    }
    let b = load;
    let r = ((1.0 - b).powi(2) / (kappa * kappa) + 2.0 * (1.0 + b) / kappa + 1.0).sqrt();
    let naive = 0.5 * (r + (1.0 - b) / kappa - 1.0);
    // The two leading terms cancel for large kappa; use the conjugate form there.
    if naive < 1e-4 * r {
        let num = r * r - ((1.0 - b) / kappa - 1.0).powi(2);
        Ok(0.5 * num / (r - (1.0 - b) / kappa + 1.0))
    } else {
        Ok(naive)
    }
}

/// Derivative of [`g_function`] with respect to the regularization.
pub fn g_slope(load: f64, kappa: f64) -> Result<f64> {
    let g = g_function(load, kappa)?;
    let s = (1.0 + g).powi(2);
    Ok(-g * s / (load + kappa * s))
}

/// Squared large-system normalization of the RCI precoder, 1/(G + kappa dG/dkappa).
pub fn rci_power_scaling(load: f64, kappa: f64) -> Result<f64> {
    Ok(1.0 / (g_function(load, kappa)? + kappa * g_slope(load, kappa)?))
}

/// Offline polynomial data-precoder coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct DataPolyCoefficients {
    pub coefficients: Vec<f64>,
    /// Factor applied to the unscaled solve so the large-system trace constraint holds.
    pub scale: f64,
}

/// Inputs of the MSE-optimal polynomial data precoder that depend on the surrounding system.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DataPolyInputs {
    /// Average in-cell AN leakage power of the paired AN precoder.
    pub an_leakage: f64,
    /// Average out-of-cell interference-plus-noise power.
    pub interference: f64,
}

impl DataPolyInputs {
    /// Interference-plus-noise from the path-loss pattern: sum over other cells of the
    /// gain times P_T, plus unit noise, averaged over the cell's users.
    pub fn interference_for(cfg: &SystemConfig, cell: usize) -> f64 {
        let k = cfg.users;
        (0..k)
            .map(|u| (0..cfg.cells).filter(|&m| m != cell).map(|m| cfg.gain(m, cell, u)).sum::<f64>())
            .sum::<f64>()
            / k as f64
            * cfg.total_power
            + 1.0
    }
}

/// MSE-optimal coefficients of the degree-`degree` polynomial data precoder for `cell`.
pub fn data_poly_coefficients(
    cfg: &SystemConfig,
    cell: usize,
    degree: usize,
    inputs: DataPolyInputs,
) -> Result<DataPolyCoefficients> {
    if inputs.an_leakage < 0.0 || inputs.interference < 0.0 {
        return Err(Error::Numerical("leakage and interference powers must be non-negative".into()));
    }
    let (p, _) = cfg.derived_powers(1)?;
    if p <= 0.0 {
        return Err(Error::Numerical("data power must be positive".into()));
    }
    let n = degree + 1;
    let load = cfg.load();
    let table = MomentTable::new(load, 2 * n + 2);
    let stats = estimation_stats(cfg, cell);
    let k = cfg.users as f64;
    let own: Vec<f64> = (0..cfg.users).map(|u| cfg.gain(cell, cell, u)).collect();
    let coherent = own.iter().zip(&stats.estimate_variance).map(|(b, v)| b * v).sum::<f64>() / k;
    let residual = own.iter().zip(&stats.error_variance).map(|(b, d)| b * d).sum::<f64>() / k;
    let floor = load * residual + (inputs.interference + inputs.an_leakage) / (cfg.antennas as f64 * p);

    let system = table.hankel(n, 2) * coherent + table.hankel(n, 1) * floor;
    let rhs = table.vector(n, 1);
    let chol = system.clone().cholesky().ok_or_else(|| {
        Error::Numerical(format!("polynomial data system of degree {degree} is not positive definite; use a smaller degree"))
    })?;
    let diag = chol.l_dirty().diagonal();
    let cond = (diag.max() / diag.min()).powi(2);
    if !(cond.is_finite() && cond < 1e14) {
        return Err(Error::Numerical(format!(
            "polynomial data system of degree {degree} is ill-conditioned ({cond:.2e}); use a smaller degree"
        )));
    }
    let raw = chol.solve(&rhs);
    let energy = (raw.transpose() * table.hankel(n, 1) * &raw)[(0, 0)];
    let scale = (cfg.antennas as f64 / energy).sqrt();
    Ok(DataPolyCoefficients { coefficients: raw.iter().map(|c| c * scale).collect(), scale })
}

/// How the AN trace multiplier was settled.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MultiplierSolution {
    /// A root of the trace equation inside the searched bracket.
    Root(f64),
    /// No root exists; the coefficients minimize the trace instead, which is the
    /// unbounded-multiplier limit of the constrained problem.
    TraceMinimizing,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnPolyCoefficients {
    pub coefficients: Vec<f64>,
    pub multiplier: MultiplierSolution,
    /// Trace-equation residual at the returned coefficients (zero at an exact root).
    pub residual: f64,
    /// Large-system (1/K) tr{A^H A} implied by the coefficients.
    pub normalized_trace: f64,
}

struct AnSystem {
    table: MomentTable,
    n: usize,
}

impl AnSystem {
    fn coefficients(&self, eps: f64) -> Option<DVector<f64>> {
        let s = self.table.hankel(self.n, 3) + self.table.hankel(self.n, 2) * eps;
        let w = self.table.vector(self.n, 2) + self.table.vector(self.n, 1) * eps;
        s.lu().solve(&w)
    }

    /// Reduction of (1/K) tr{A^H A} below N_T/K: 2 sum nu_j m_{j+1} - sum nu_i nu_j m_{i+j+2}.
    fn trace_reduction(&self, nu: &DVector<f64>) -> f64 {
        2.0 * nu.dot(&self.table.vector(self.n, 1)) - (nu.transpose() * self.table.hankel(self.n, 2) * nu)[(0, 0)]
    }

    fn residual(&self, eps: f64) -> Option<f64> {
        self.coefficients(eps).map(|nu| self.trace_reduction(&nu) - 1.0)
    }
}

/// Leakage-minimizing polynomial AN coefficients of degree `degree` under the trace
/// constraint (1/K) tr{A^H A} = 1/beta - 1.
pub fn an_poly_coefficients(load: f64, degree: usize) -> Result<AnPolyCoefficients> {
    if !(load > 0.0 && load < 1.0) {
        return Err(Error::Infeasible(format!("polynomial AN needs 0 < K/N_T < 1, got {load}")));
    }
    let n = degree + 1;
    let sys = AnSystem { table: MomentTable::new(load, 2 * n + 3), n };

    // Scan a log-spaced grid on both sides of zero for a sign change, then bisect.
    let mut grid: Vec<f64> = (0..=180).map(|i| -(10f64.powf(3.0 - i as f64 * 0.05))).collect();
    grid.extend((0..=180).map(|i| 10f64.powf(-6.0 + i as f64 * 0.05)));
    let mut prev: Option<(f64, f64)> = None;
    for &e in &grid {
        let Some(r) = sys.residual(e) else {
            prev = None;
            continue;
        };
        if let Some((pe, pr)) = prev {
            if pr.signum() != r.signum() && pr.abs() < 1e3 && r.abs() < 1e3 {
                let root = bisect(|x| sys.residual(x).unwrap_or(f64::NAN), pe, e, pr);
                let nu = sys.coefficients(root).expect("solvable at bracketed root");
                let residual = sys.trace_reduction(&nu) - 1.0;
                return Ok(AnPolyCoefficients {
                    normalized_trace: 1.0 / load - 1.0 - residual,
                    coefficients: nu.iter().copied().collect(),
                    multiplier: MultiplierSolution::Root(root),
                    residual,
                });
            }
        }
        prev = Some((e, r));
    }

    // The attainable reduction never reaches 1 for a finite degree; take the limit.
    let z2 = sys.table.hankel(n, 2);
    let z1 = sys.table.vector(n, 1);
    let nu = z2
        .cholesky()
        .ok_or_else(|| Error::Numerical(format!("moment matrix of degree {degree} is not positive definite")))?
        .solve(&z1);
    let residual = sys.trace_reduction(&nu) - 1.0;
    Ok(AnPolyCoefficients {
        normalized_trace: 1.0 / load - 1.0 - residual,
        coefficients: nu.iter().copied().collect(),
        multiplier: MultiplierSolution::TraceMinimizing,
        residual,
    })
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, f_lo: f64) -> f64 {
    let lo_sign = f_lo.signum();
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm.abs() < 1e-12 || (hi - lo).abs() < 1e-14 * mid.abs().max(1.0) {
            return mid;
        }
        if fm.signum() == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{complex_gaussian, gram, mul};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn moment_values() {
        assert_eq!(mp_moment(0, 0.3), 1.0);
        assert!((mp_moment(1, 0.7) - 1.0).abs() < 1e-15);
        assert!((mp_moment(2, 0.25) - 1.25).abs() < 1e-15);
        assert!((mp_moment(3, 0.5) - 2.75).abs() < 1e-15);
        // Independent route: Catalan-type Narayana sum at load 1 gives Catalan numbers.
        let catalan = [1.0, 1.0, 2.0, 5.0, 14.0, 42.0, 132.0];
        for (l, c) in catalan.iter().enumerate() {
            assert!((mp_moment(l, 1.0) - c).abs() < 1e-9, "order {l}");
        }
    }

    #[test]
    fn moments_match_sampled_gram() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (k, nt) = (32, 128);
        let mut acc = [0.0; 5];
        let draws = 20;
        for _ in 0..draws {
            let h = complex_gaussian(&mut rng, k, nt, 1.0 / nt as f64);
            let w = gram(&h);
            let mut pw = w.clone();
            for a in acc.iter_mut() {
                *a += pw.trace().re / k as f64;
                pw = mul(&pw, &w);
            }
        }
        for (l, a) in acc.iter().enumerate() {
            let z = mp_moment(l + 1, 0.25);
            assert!(((a / draws as f64) - z).abs() / z < 0.03, "order {}", l + 1);
        }
    }

    #[test]
    fn resolvent_values_and_limits() {
        assert!((g_function(1.0, 1.0).unwrap() - (5f64.sqrt() - 1.0) / 2.0).abs() < 1e-12);
        assert!((g_function(1e-9, 0.5).unwrap() - 2.0).abs() < 1e-6);
        assert!(g_function(0.3, 1e12).unwrap() < 1e-11);
        assert_eq!(g_function(0.25, 0.0).unwrap(), f64::INFINITY);
        assert!((g_function(0.25, 1e-9).unwrap() * 1e-9 - 0.75).abs() < 1e-6);
        assert!((g_function(2.0, 0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((g_function(2.0, 1e-9).unwrap() - 1.0).abs() < 1e-6);
        assert!(g_function(0.5, -1.0).is_err());
    }

    #[test]
    fn slope_matches_finite_difference() {
        for &(b, k) in &[(0.1, 0.3), (0.5, 1.0), (0.9, 4.0)] {
            let h = 1e-6 * k;
            let fd = (g_function(b, k + h).unwrap() - g_function(b, k - h).unwrap()) / (2.0 * h);
            assert!((g_slope(b, k).unwrap() - fd).abs() < 1e-6 * fd.abs().max(1.0));
        }
    }

    #[test]
    fn data_poly_degree_zero_is_scalar() {
        let cfg = SystemConfig::simplified(2, 26, 256, 26, 10.0, 0.75, 0.1).with_pilot_energy(10.0);
        let inputs = DataPolyInputs { an_leakage: 0.5, interference: 2.0 };
        let c = data_poly_coefficients(&cfg, 0, 0, inputs).unwrap();
        assert_eq!(c.coefficients.len(), 1);
        assert!((c.coefficients[0] - 256f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn an_poly_degree_zero_matches_scalar_algebra() {
        let load = 0.1;
        let c = an_poly_coefficients(load, 0).unwrap();
        let (z1, z2) = (mp_moment(1, load), mp_moment(2, load));
        // Without a root the scalar optimum is m1/m2 and the reduction is m1^2/m2 < 1.
        assert_eq!(c.multiplier, MultiplierSolution::TraceMinimizing);
        assert!((c.coefficients[0] - z1 / z2).abs() < 1e-12);
        assert!((c.residual - (z1 * z1 / z2 - 1.0)).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn higher_moments_grow_with_load(l in 2usize..9, b in 0.01f64..0.98) {
            prop_assert!(mp_moment(l, b + 0.01) > mp_moment(l, b));
        }

        #[test]
        fn resolvent_is_positive_and_decreasing(b in 0.01f64..1.0, k in 1e-3f64..1e3) {
            let g = g_function(b, k).unwrap();
            prop_assert!(g > 0.0);
            prop_assert!(g_function(b, k * 1.1).unwrap() < g);
            prop_assert!(g_slope(b, k).unwrap() < 0.0);
        }

        #[test]
        fn an_trace_reduction_never_exceeds_target(b in 0.05f64..0.6, j in 0usize..6) {
            let c = an_poly_coefficients(b, j).unwrap();
            prop_assert!(c.residual <= 1e-9);
            prop_assert!(c.coefficients.iter().all(|v| v.is_finite()));
        }
    }
}
