//! Linear data precoders. Every constructor returns a matrix rescaled so that
//! tr{F^H F} = K; the polynomial precoder additionally keeps its factors so it can be
//! applied by Horner's rule without forming F.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{frob_sq, gram, hermitian_solve, mul, mul_adj, CMat, CVec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DataKind {
    Mf,
    Szf,
    Srci,
    Czf,
    Crci,
    /// Polynomial precoder of the given degree.
    Poly(usize),
}

impl DataKind {
    pub const CONVENTIONAL: [DataKind; 5] = [DataKind::Mf, DataKind::Szf, DataKind::Srci, DataKind::Czf, DataKind::Crci];

    pub fn is_collaborative(self) -> bool {
        matches!(self, DataKind::Czf | DataKind::Crci)
    }

    pub fn is_regularized(self) -> bool {
        matches!(self, DataKind::Srci | DataKind::Crci)
    }
}

impl fmt::Display for DataKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DataKind::Mf => f.write_str("MF"),
            DataKind::Szf => f.write_str("SZF"),
            DataKind::Srci => f.write_str("SRCI"),
            DataKind::Czf => f.write_str("CZF"),
            DataKind::Crci => f.write_str("CRCI"),
            DataKind::Poly(d) => write!(f, "POLY-{d}"),
        }
    }
}

impl FromStr for DataKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let u = s.trim().to_ascii_uppercase();
        Ok(match u.as_str() {
            "MF" => DataKind::Mf,
            "SZF" => DataKind::Szf,
            "SRCI" => DataKind::Srci,
            "CZF" => DataKind::Czf,
            "CRCI" => DataKind::Crci,
            _ => {
                let deg = u
                    .strip_prefix("POLY")
                    .map(|d| d.trim_start_matches(['-', '_']))
                    .and_then(|d| d.parse::<usize>().ok())
                    .ok_or_else(|| Error::config(None, format!("unknown data precoder `{s}`")))?;
                DataKind::Poly(deg)
            }
        })
    }
}

#[derive(Clone, Debug)]
struct PolyFactors {
    /// Estimate normalized to unit average row energy, K x N_T.
    rows: CMat,
    coefficients: Vec<f64>,
    /// Total output scale: 1/sqrt(N_T) times the trace-normalizing factor.
    out_scale: f64,
}

#[derive(Clone, Debug)]
pub struct DataPrecoder {
    pub kind: DataKind,
    /// N_T x K precoding matrix with tr{F^H F} = K.
    pub matrix: CMat,
    /// Factor applied to the unnormalized construction to meet the trace constraint.
    pub scale: f64,
    /// Regularization relative to the average row energy of the estimate (RCI kinds).
    pub kappa: Option<f64>,
    /// (1/K) tr{F^H F} before the per-realization rescale.
    pub raw_trace_ratio: f64,
    poly: Option<PolyFactors>,
}

impl DataPrecoder {
    fn finish(kind: DataKind, mut matrix: CMat, kappa: Option<f64>) -> Result<Self> {
        let k = matrix.ncols() as f64;
        let raw_trace_ratio = frob_sq(&matrix) / k;
        let scale = crate::linalg::normalize_frob(&mut matrix, k)
            .map_err(|_| Error::Degenerate(format!("{kind} precoder from an all-zero estimate")))?;
        Ok(DataPrecoder { kind, matrix, scale, kappa, raw_trace_ratio, poly: None })
    }

    pub fn users(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn antennas(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn coefficients(&self) -> Option<&[f64]> {
        self.poly.as_ref().map(|p| p.coefficients.as_slice())
    }

    pub fn apply(&self, symbols: &CVec) -> Result<CVec> {
        self.apply_counted(symbols).map(|(v, _)| v)
    }

    /// Precodes one symbol vector and reports the complex FLOPs spent
    /// (an m x n matrix-vector product costs (2n - 1) m).
    pub fn apply_counted(&self, symbols: &CVec) -> Result<(CVec, u128)> {
        let (nt, k) = (self.antennas(), self.users());
        if symbols.len() != k {
            return Err(Error::DimensionMismatch { expected: k, got: symbols.len() });
        }
        let matvec = |rows: usize, cols: usize| ((2 * cols - 1) * rows) as u128;
        match &self.poly {
            None => Ok((&self.matrix * symbols, matvec(nt, k))),
            Some(p) => {
                let c = &p.coefficients;
                let to_complex = |x: f64| Complex64::new(x, 0.0);
                let mut v = symbols * to_complex(c[c.len() - 1]);
                let mut flops = 0u128;
                for &mu in c.iter().rev().skip(1) {
                    let up = p.rows.ad_mul(&v);
                    v = &p.rows * up + symbols * to_complex(mu);
                    flops += matvec(nt, k) + matvec(k, nt);
                }
                let out = p.rows.ad_mul(&v) * to_complex(p.out_scale);
                flops += matvec(nt, k);
                Ok((out, flops))
            }
        }
    }
}

fn require_nonzero(h: &CMat, what: &str) -> Result<()> {
    if frob_sq(h) > 0.0 {
        Ok(())
    } else {
        Err(Error::Degenerate(format!("{what}: channel estimate is identically zero")))
    }
}

/// Average row energy, the scale on which relative regularization is expressed.
pub fn row_energy(h: &CMat) -> f64 {
    frob_sq(h) / h.nrows() as f64
}

pub fn mf_precoder(hhat: &CMat) -> Result<DataPrecoder> {
    require_nonzero(hhat, "MF")?;
    DataPrecoder::finish(DataKind::Mf, hhat.adjoint(), None)
}

pub fn szf_precoder(hhat: &CMat) -> Result<DataPrecoder> {
    require_nonzero(hhat, "SZF")?;
    let (k, nt) = hhat.shape();
    if k >= nt {
        return Err(Error::Infeasible(format!("SZF needs K < N_T (K = {k}, N_T = {nt})")));
    }
    let x = hermitian_solve(&gram(hhat), &CMat::identity(k, k), "SZF")?;
    DataPrecoder::finish(DataKind::Szf, mul_adj(hhat, &x), None)
}

/// Selfish RCI with regularization `kappa` times the average row energy of `hhat`.
pub fn srci_precoder(hhat: &CMat, kappa: f64) -> Result<DataPrecoder> {
    require_nonzero(hhat, "SRCI")?;
    if !(kappa >= 0.0 && kappa.is_finite()) {
        return Err(Error::Numerical(format!("SRCI regularization must be finite and >= 0, got {kappa}")));
    }
    if kappa == 0.0 {
        let mut p = szf_precoder(hhat).map_err(|e| Error::Infeasible(format!("SRCI at zero regularization reduces to SZF: {e}")))?;
        p.kind = DataKind::Srci;
        p.kappa = Some(0.0);
        return Ok(p);
    }
    let k = hhat.nrows();
    let mut g = gram(hhat);
    let reg = kappa * row_energy(hhat);
    for i in 0..k {
        g[(i, i)] += reg;
    }
    let x = hermitian_solve(&g, &CMat::identity(k, k), "SRCI")?;
    DataPrecoder::finish(DataKind::Srci, mul_adj(hhat, &x), Some(kappa))
}

/// Collaborative precoder columns for `cell` from the all-cell stack (cells in order,
/// `users` rows each). Zero `kappa` gives CZF.
fn collaborative(stacked: &CMat, cell: usize, users: usize, kappa: f64, kind: DataKind) -> Result<DataPrecoder> {
    let (rows, nt) = stacked.shape();
    if users == 0 || rows % users != 0 || (cell + 1) * users > rows {
        return Err(Error::DimensionMismatch { expected: (cell + 1) * users, got: rows });
    }
    let own = stacked.rows(cell * users, users).into_owned();
    require_nonzero(&own, &kind.to_string())?;
    if kappa == 0.0 && rows >= nt {
        return Err(Error::Infeasible(format!("CZF needs M K < N_T (M K = {rows}, N_T = {nt})")));
    }
    let mut g = gram(stacked);
    let reg = kappa * row_energy(&own);
    for i in 0..rows {
        g[(i, i)] += reg;
    }
    let mut sel = CMat::zeros(rows, users);
    for u in 0..users {
        sel[(cell * users + u, u)] = Complex64::new(1.0, 0.0);
    }
    let x = hermitian_solve(&g, &sel, &kind.to_string())?;
    DataPrecoder::finish(kind, mul_adj(stacked, &x), if kind == DataKind::Crci { Some(kappa) } else { None })
}

pub fn czf_precoder(stacked: &CMat, cell: usize, users: usize) -> Result<DataPrecoder> {
    collaborative(stacked, cell, users, 0.0, DataKind::Czf)
}

pub fn crci_precoder(stacked: &CMat, cell: usize, users: usize, kappa: f64) -> Result<DataPrecoder> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::Numerical(format!("CRCI regularization must be positive, got {kappa}; use CZF for the limit")));
    }
    collaborative(stacked, cell, users, kappa, DataKind::Crci)
}

/// Polynomial precoder sum_i mu_i on powers of the normalized Gram matrix. The
/// estimate is normalized by its average row energy so the spectral moments of the
/// Gram matrix match their large-system values.
pub fn poly_data_precoder(hhat: &CMat, coefficients: &[f64]) -> Result<DataPrecoder> {
    if coefficients.is_empty() {
        return Err(Error::Numerical("polynomial precoder needs at least one coefficient".into()));
    }
    require_nonzero(hhat, "POLY")?;
    let (k, nt) = hhat.shape();
    let rows = hhat / Complex64::new(row_energy(hhat).sqrt(), 0.0);
    let w = gram(&rows);
    // Matrix Horner: P = mu_I I; P = W P + mu_i I.
    let last = coefficients.len() - 1;
    let mut poly = CMat::identity(k, k) * Complex64::new(coefficients[last], 0.0);
    for &mu in coefficients[..last].iter().rev() {
        poly = mul(&w, &poly);
        for i in 0..k {
            poly[(i, i)] += mu;
        }
    }
    let unscaled = mul_adj(&rows, &poly) / Complex64::new((nt as f64).sqrt(), 0.0);
    let mut p = DataPrecoder::finish(DataKind::Poly(last), unscaled, None)?;
    p.poly = Some(PolyFactors {
        rows,
        coefficients: coefficients.to_vec(),
        out_scale: p.scale / (nt as f64).sqrt(),
    });
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::complex_gaussian;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn draw(seed: u64, k: usize, nt: usize) -> CMat {
        complex_gaussian(&mut ChaCha8Rng::seed_from_u64(seed), k, nt, 1.0)
    }

    fn trace_ok(p: &DataPrecoder) {
        let k = p.users() as f64;
        assert!((frob_sq(&p.matrix) - k).abs() < 1e-10 * k, "{} trace", p.kind);
    }

    fn column_cosine_distance(a: &CMat, b: &CMat) -> f64 {
        (0..a.ncols())
            .map(|j| {
                let (x, y) = (a.column(j), b.column(j));
                1.0 - x.dotc(&y).norm() / (x.norm() * y.norm())
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn matched_filter_single_user_and_orthogonal_rows() {
        let h = draw(1, 1, 16);
        let p = mf_precoder(&h).unwrap();
        let expect = h.adjoint() / Complex64::new(h.norm(), 0.0);
        assert!((&p.matrix - expect).norm() < 1e-12);

        let mut q = CMat::zeros(3, 6);
        for i in 0..3 {
            q[(i, 2 * i)] = Complex64::new(1.0 + i as f64, 0.0);
        }
        let hf = &q * mf_precoder(&q).unwrap().matrix;
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert!(hf[(i, j)].norm() < 1e-14);
                }
            }
        }
        trace_ok(&mf_precoder(&draw(2, 8, 64)).unwrap());
    }

    #[test]
    fn zero_forcing_properties() {
        let h = draw(3, 8, 64);
        let p = szf_precoder(&h).unwrap();
        trace_ok(&p);
        let hf = &h * &p.matrix;
        let diag = hf[(0, 0)].norm();
        for i in 0..8 {
            assert!((hf[(i, i)].norm() - diag).abs() < 1e-8 * diag);
            for j in (0..8).filter(|&j| j != i) {
                assert!(hf[(i, j)].norm() < 1e-8 * diag);
            }
        }
        let h1 = draw(4, 1, 32);
        assert!(column_cosine_distance(&szf_precoder(&h1).unwrap().matrix, &mf_precoder(&h1).unwrap().matrix) < 1e-12);
        assert!(matches!(szf_precoder(&draw(5, 8, 8)), Err(Error::Infeasible(_))));
    }

    #[test]
    fn rci_limits() {
        let h = draw(6, 8, 64);
        let mf = mf_precoder(&h).unwrap();
        let szf = szf_precoder(&h).unwrap();
        let heavy = srci_precoder(&h, 1e6).unwrap();
        assert!(column_cosine_distance(&heavy.matrix, &mf.matrix) < 1e-4);
        let light = srci_precoder(&h, 1e-8).unwrap();
        assert!((&light.matrix - &szf.matrix).norm() / szf.matrix.norm() < 1e-4);
        let hf = &h * &light.matrix;
        assert!(hf[(0, 1)].norm() < 1e-5 * hf[(0, 0)].norm());
        trace_ok(&srci_precoder(&h, 0.3).unwrap());
        assert!(srci_precoder(&draw(7, 8, 8), 0.0).is_err());
    }

    #[test]
    fn collaborative_reduces_to_selfish_for_one_cell() {
        let h = draw(8, 8, 64);
        let czf = czf_precoder(&h, 0, 8).unwrap();
        let szf = szf_precoder(&h).unwrap();
        assert!((&czf.matrix - &szf.matrix).norm() < 1e-12 * szf.matrix.norm());
        let crci = crci_precoder(&h, 0, 8, 0.4).unwrap();
        let srci = srci_precoder(&h, 0.4).unwrap();
        assert!((&crci.matrix - &srci.matrix).norm() < 1e-12 * srci.matrix.norm());
    }

    #[test]
    fn czf_nulls_other_cells() {
        let stacked = draw(9, 16, 64);
        let p = czf_precoder(&stacked, 1, 8).unwrap();
        trace_ok(&p);
        let hf = &stacked * &p.matrix;
        let scale = hf[(8, 0)].norm();
        for r in 0..16 {
            for c in 0..8 {
                if r != 8 + c {
                    assert!(hf[(r, c)].norm() < 1e-8 * scale, "({r},{c})");
                }
            }
        }
        assert!(matches!(czf_precoder(&draw(10, 64, 64), 0, 32), Err(Error::Infeasible(_))));
    }

    #[test]
    fn poly_degree_zero_is_matched_filter() {
        let h = draw(11, 8, 64);
        let p = poly_data_precoder(&h, &[1.0]).unwrap();
        assert!((&p.matrix - mf_precoder(&h).unwrap().matrix).norm() < 1e-12);
        trace_ok(&p);
    }

    #[test]
    fn poly_neumann_series_approaches_rci() {
        // (W + kI)^{-1} = (1/c) sum (I - (W + kI)/c)^i for c above the spectrum.
        let (k, nt) = (8usize, 256usize);
        let h = draw(12, k, nt);
        let kappa = 0.5;
        let c = 1.0 + kappa + 1.5 * (1.0 + (k as f64 / nt as f64).sqrt()).powi(2);
        let degree = 8;
        // Expand sum_i (1/c)(1 - (w + kappa)/c)^i as a polynomial in w.
        let mut coeffs = vec![0.0; degree + 1];
        let base = 1.0 - kappa / c;
        for i in 0..=degree {
            for j in 0..=i {
                let binom = (0..j).fold(1.0, |a, t| a * (i - t) as f64 / (t + 1) as f64);
                coeffs[j] += binom * base.powi((i - j) as i32) * (-1.0 / c).powi(j as i32) / c;
            }
        }
        let p = poly_data_precoder(&h, &coeffs).unwrap();
        let srci = srci_precoder(&h, kappa).unwrap();
        assert!(column_cosine_distance(&p.matrix, &srci.matrix) < 1e-2);
    }

    #[test]
    fn horner_matches_materialized() {
        let h = draw(13, 8, 64);
        let p = poly_data_precoder(&h, &[0.7, -0.2, 0.05, 0.01]).unwrap();
        let s = draw(14, 8, 1).column(0).into_owned();
        let (fast, flops) = p.apply_counted(&s).unwrap();
        let slow = &p.matrix * &s;
        assert!((&fast - &slow).norm() < 1e-10 * slow.norm());
        assert_eq!(flops, 4 * 15 * 64 + 3 * 127 * 8);
        for kidx in 0..8 {
            let mut e = CVec::zeros(8);
            e[kidx] = Complex64::new(1.0, 0.0);
            let col = p.apply(&e).unwrap();
            assert!((col - p.matrix.column(kidx)).norm() < 1e-10);
        }
        assert_eq!(p.apply(&CVec::zeros(8)).unwrap().norm(), 0.0);
        assert!(matches!(p.apply(&CVec::zeros(7)), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn zero_estimate_is_degenerate() {
        assert!(matches!(mf_precoder(&CMat::zeros(4, 16)), Err(Error::Degenerate(_))));
    }

    #[test]
    fn kind_names_round_trip() {
        for k in DataKind::CONVENTIONAL.into_iter().chain([DataKind::Poly(3)]) {
            assert_eq!(k.to_string().parse::<DataKind>().unwrap(), k);
        }
        assert!("ZF".parse::<DataKind>().is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn every_precoder_meets_the_trace(seed in 0u64..1000, k in 1usize..10, extra in 4usize..40, kappa in 1e-3f64..10.0) {
            let nt = 2 * k + extra;
            let h = draw(seed, k, nt);
            let stacked = draw(seed + 1, 2 * k, nt);
            let all = [
                mf_precoder(&h).unwrap(),
                szf_precoder(&h).unwrap(),
                srci_precoder(&h, kappa).unwrap(),
                czf_precoder(&stacked, 0, k).unwrap(),
                crci_precoder(&stacked, 1, k, kappa).unwrap(),
                poly_data_precoder(&h, &[1.0, -0.3, 0.02]).unwrap(),
            ];
            for p in &all {
                prop_assert!((frob_sq(&p.matrix) - k as f64).abs() < 1e-10 * k as f64);
            }
        }
    }
}
