//! Artificial-noise precoders. Null-space precoders are stored in factored form
//! (rows and the Gram-solved rows) so that applying them costs O(K N_T) per vector;
//! [`AnPrecoder::matrix`] materializes the N_T x N_T matrix when needed.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;

use crate::data_precoder::row_energy;
use crate::error::{Error, Result};
use crate::linalg::{complex_gaussian, frob_sq, gram, hermitian_solve, mul, mul_by_adj, normalize_frob, CMat, CVec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AnKind {
    Sns,
    Cns,
    Random,
    /// Polynomial AN precoder of the given degree.
    Poly(usize),
}

impl AnKind {
    pub const CONVENTIONAL: [AnKind; 3] = [AnKind::Sns, AnKind::Cns, AnKind::Random];

    /// Rank of the precoder for the given dimensions.
    pub fn rank(self, cells: usize, users: usize, antennas: usize) -> Result<usize> {
        let r = match self {
            AnKind::Sns | AnKind::Poly(_) => antennas.checked_sub(users),
            AnKind::Cns => antennas.checked_sub(cells * users),
            AnKind::Random => Some(antennas),
        };
        match r {
            Some(r) if r > 0 => Ok(r),
            _ => Err(Error::InvalidAnRank),
        }
    }
}

impl fmt::Display for AnKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnKind::Sns => f.write_str("SNS"),
            AnKind::Cns => f.write_str("CNS"),
            AnKind::Random => f.write_str("RANDOM"),
            AnKind::Poly(d) => write!(f, "POLY-{d}"),
        }
    }
}

impl FromStr for AnKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let u = s.trim().to_ascii_uppercase();
        Ok(match u.as_str() {
            "SNS" => AnKind::Sns,
            "CNS" => AnKind::Cns,
            "RANDOM" => AnKind::Random,
            _ => {
                let deg = u
                    .strip_prefix("POLY")
                    .map(|d| d.trim_start_matches(['-', '_']))
                    .and_then(|d| d.parse::<usize>().ok())
                    .ok_or_else(|| Error::config(None, format!("unknown AN precoder `{s}`")))?;
                AnKind::Poly(deg)
            }
        })
    }
}

#[derive(Clone, Debug)]
enum Form {
    /// I - B^H (B B^H)^{-1} B, with `solved` = (B B^H)^{-1} B.
    Projection { rows: CMat, solved: CMat },
    Dense(CMat),
    /// I - R^H P(R R^H) R for rows R normalized to unit average energy.
    Polynomial { rows: CMat, coefficients: Vec<f64> },
}

#[derive(Clone, Debug)]
pub struct AnPrecoder {
    pub kind: AnKind,
    /// Number of dimensions the AN power is spread over.
    pub rank: usize,
    antennas: usize,
    form: Form,
}

fn matvec_flops(rows: usize, cols: usize) -> u128 {
    ((2 * cols - 1) * rows) as u128
}

impl AnPrecoder {
    pub fn antennas(&self) -> usize {
        self.antennas
    }

    pub fn coefficients(&self) -> Option<&[f64]> {
        match &self.form {
            Form::Polynomial { coefficients, .. } => Some(coefficients),
            _ => None,
        }
    }

    /// Materialized N_T x N_T matrix.
    pub fn matrix(&self) -> CMat {
        match &self.form {
            Form::Dense(a) => a.clone(),
            _ => self.right_apply(&CMat::identity(self.antennas, self.antennas)),
        }
    }

    /// X A for any X with N_T columns.
    pub fn right_apply(&self, x: &CMat) -> CMat {
        match &self.form {
            Form::Dense(a) => mul(x, a),
            Form::Projection { rows, solved } => x - mul(&mul_by_adj(x, rows), solved),
            Form::Polynomial { rows, coefficients } => {
                let y = mul_by_adj(x, rows);
                let w = gram(rows);
                let last = coefficients.len() - 1;
                let mut acc = &y * Complex64::new(coefficients[last], 0.0);
                for &nu in coefficients[..last].iter().rev() {
                    acc = mul(&acc, &w) + &y * Complex64::new(nu, 0.0);
                }
                x - mul(&acc, rows)
            }
        }
    }

    /// tr{A^H A}.
    pub fn trace_gram(&self) -> f64 {
        match &self.form {
            Form::Dense(a) => frob_sq(a),
            Form::Projection { rows, .. } => (self.antennas - rows.nrows()) as f64,
            Form::Polynomial { rows, coefficients } => {
                // N_T - 2 tr{P W} + tr{P W P W} with P W computed on the K x K side.
                let w = gram(rows);
                let k = w.nrows();
                let last = coefficients.len() - 1;
                let mut p = CMat::identity(k, k) * Complex64::new(coefficients[last], 0.0);
                for &nu in coefficients[..last].iter().rev() {
                    p = mul(&w, &p);
                    for i in 0..k {
                        p[(i, i)] += nu;
                    }
                }
                let pw = mul(&p, &w);
                self.antennas as f64 - 2.0 * pw.trace().re + mul(&pw, &pw).trace().re
            }
        }
    }

    pub fn apply(&self, noise: &CVec) -> Result<CVec> {
        self.apply_counted(noise).map(|(v, _)| v)
    }

    /// A z together with the complex FLOPs spent.
    pub fn apply_counted(&self, noise: &CVec) -> Result<(CVec, u128)> {
        let nt = self.antennas;
        if noise.len() != nt {
            return Err(Error::DimensionMismatch { expected: nt, got: noise.len() });
        }
        match &self.form {
            Form::Dense(a) => Ok((a * noise, matvec_flops(nt, nt))),
            Form::Projection { rows, solved } => {
                let r = rows.nrows();
                let t = solved * noise;
                Ok((noise - rows.ad_mul(&t), matvec_flops(r, nt) + matvec_flops(nt, r)))
            }
            Form::Polynomial { rows, coefficients } => {
                // Nested evaluation written without dividing by the constant coefficient:
                // u = R z, v = nu_J u, v = R R^H v + nu_j u, output z - R^H v.
                let k = rows.nrows();
                let u = rows * noise;
                let mut flops = matvec_flops(k, nt);
                let last = coefficients.len() - 1;
                let mut v = &u * Complex64::new(coefficients[last], 0.0);
                for &nu in coefficients[..last].iter().rev() {
                    v = rows * rows.ad_mul(&v) + &u * Complex64::new(nu, 0.0);
                    flops += matvec_flops(nt, k) + matvec_flops(k, nt);
                }
                flops += matvec_flops(nt, k);
                Ok((noise - rows.ad_mul(&v), flops))
            }
        }
    }
}

fn projection(kind: AnKind, rows: &CMat) -> Result<AnPrecoder> {
    let (r, nt) = rows.shape();
    if r >= nt {
        return Err(Error::Infeasible(format!("{kind} needs fewer nulled rows than antennas ({r} >= {nt})")));
    }
    if frob_sq(rows) == 0.0 {
        return Err(Error::Degenerate(format!("{kind}: channel estimate is identically zero")));
    }
    let solved = hermitian_solve(&gram(rows), rows, &kind.to_string())?;
    Ok(AnPrecoder { kind, rank: nt - r, antennas: nt, form: Form::Projection { rows: rows.clone(), solved } })
}

/// Projection onto the complement of the in-cell estimated channel rows.
pub fn sns_precoder(hhat: &CMat) -> Result<AnPrecoder> {
    projection(AnKind::Sns, hhat)
}

/// Projection onto the complement of all cells' estimated channel rows.
pub fn cns_precoder(stacked: &CMat) -> Result<AnPrecoder> {
    projection(AnKind::Cns, stacked)
}

/// I.i.d. Gaussian AN matrix rescaled to tr{A^H A} = N_T.
pub fn random_an_precoder<R: Rng + ?Sized>(rng: &mut R, antennas: usize) -> AnPrecoder {
    let mut a = complex_gaussian(rng, antennas, antennas, 1.0);
    normalize_frob(&mut a, antennas as f64).expect("Gaussian draw has positive energy");
    AnPrecoder { kind: AnKind::Random, rank: antennas, antennas, form: Form::Dense(a) }
}

/// Polynomial approximation of the in-cell null-space projection.
pub fn poly_an_precoder(hhat: &CMat, coefficients: &[f64]) -> Result<AnPrecoder> {
    if coefficients.is_empty() {
        return Err(Error::Numerical("polynomial AN precoder needs at least one coefficient".into()));
    }
    let (k, nt) = hhat.shape();
    if k >= nt {
        return Err(Error::Infeasible(format!("polynomial AN needs K < N_T (K = {k}, N_T = {nt})")));
    }
    let energy = row_energy(hhat);
    if energy == 0.0 {
        return Err(Error::Degenerate("POLY AN: channel estimate is identically zero".into()));
    }
    let rows = hhat / Complex64::new(energy.sqrt(), 0.0);
    Ok(AnPrecoder {
        kind: AnKind::Poly(coefficients.len() - 1),
        rank: nt - k,
        antennas: nt,
        form: Form::Polynomial { rows, coefficients: coefficients.to_vec() },
    })
}

/// Solve-free reference: the SNS projection built through an explicit inverse, used in tests.
#[cfg(test)]
pub(crate) fn projection_reference(rows: &CMat) -> CMat {
    let n = rows.ncols();
    let inv = gram(rows).try_inverse().expect("invertible");
    CMat::identity(n, n) - crate::linalg::mul_adj(rows, &mul(&inv, rows))
}
