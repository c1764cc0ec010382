//! Complex FLOP counts per coherence interval.

use crate::an_precoder::AnKind;
use crate::data_precoder::DataKind;
use crate::error::{Error, Result};

/// Block dimensions that set the cost of every precoder.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Dimensions {
    pub cells: usize,
    pub users: usize,
    pub antennas: usize,
    pub coherence: usize,
    pub pilot_len: usize,
}

impl Dimensions {
    fn data_symbols(&self) -> Result<u128> {
        if self.coherence <= self.pilot_len {
            return Err(Error::Numerical(format!(
                "coherence interval {} leaves no data symbols after {} pilot symbols",
                self.coherence, self.pilot_len
            )));
        }
        Ok((self.coherence - self.pilot_len) as u128)
    }
}

/// Gram matrix, its Cholesky-based inverse and the product back onto the channel.
fn inversion(k: u128, nt: u128) -> u128 {
    (k * k + k) * (2 * nt - 1) / 2 + k * k * k + k * k + k
}

pub fn flops_data(kind: DataKind, d: Dimensions) -> Result<u128> {
    let t = d.data_symbols()?;
    let (k, nt, m) = (d.users as u128, d.antennas as u128, d.cells as u128);
    let precode = (2 * k - 1) * nt * t;
    Ok(match kind {
        DataKind::Mf => precode,
        DataKind::Szf | DataKind::Srci => inversion(k, nt) + nt * k * (2 * k - 1) + precode,
        DataKind::Czf | DataKind::Crci => inversion(m * k, nt) + nt * m * k * (2 * m * k - 1) + precode,
        DataKind::Poly(i) => {
            let i = i as u128;
            t * ((i + 1) * (2 * k - 1) * nt + i * (2 * nt - 1) * k)
        }
    })
}

pub fn flops_an(kind: AnKind, d: Dimensions) -> Result<u128> {
    let t = d.data_symbols()?;
    let (k, nt, m) = (d.users as u128, d.antennas as u128, d.cells as u128);
    let project = |r: u128| inversion(r, nt) + nt * (nt + r) * (2 * r - 1) + (2 * nt - 1) * nt * t;
    Ok(match kind {
        AnKind::Sns => project(k),
        AnKind::Cns => project(m * k),
        AnKind::Random => (2 * nt - 1) * nt * t,
        AnKind::Poly(j) => (j as u128 + 1) * ((2 * k - 1) * nt + (2 * nt - 1) * k) * t,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dims(m: usize, k: usize, nt: usize) -> Dimensions {
        Dimensions { cells: m, users: k, antennas: nt, coherence: k + 100, pilot_len: k }
    }

    #[test]
    fn hand_counts() {
        let d = Dimensions { cells: 1, users: 2, antennas: 4, coherence: 5, pilot_len: 2 };
        assert_eq!(flops_data(DataKind::Mf, d).unwrap(), 36);
        // Gram 3*7 = 21, inverse 8+4+2 = 14, product 4*2*3 = 24, precoding 36.
        assert_eq!(flops_data(DataKind::Szf, d).unwrap(), 21 + 14 + 24 + 36);
        assert_eq!(flops_data(DataKind::Poly(1), d).unwrap(), 3 * (2 * 3 * 4 + 7 * 2));
        assert_eq!(flops_an(AnKind::Random, d).unwrap(), 7 * 4 * 3);
        assert_eq!(flops_an(AnKind::Poly(0), d).unwrap(), (12 + 14) * 3);
    }

    #[test]
    fn collaborative_equals_selfish_for_one_cell() {
        let d = dims(1, 8, 64);
        assert_eq!(flops_data(DataKind::Czf, d).unwrap(), flops_data(DataKind::Szf, d).unwrap());
        assert_eq!(flops_an(AnKind::Cns, d).unwrap(), flops_an(AnKind::Sns, d).unwrap());
    }

    #[test]
    fn cost_order() {
        for k in [4usize, 8, 16, 32] {
            let d = dims(2, k, 256);
            let f = |x| flops_data(x, d).unwrap();
            assert!(f(DataKind::Mf) < f(DataKind::Szf) && f(DataKind::Szf) < f(DataKind::Czf));
            let a = |x| flops_an(x, d).unwrap();
            assert!(a(AnKind::Poly(1)) < a(AnKind::Random) && a(AnKind::Random) < a(AnKind::Sns));
        }
    }

    #[test]
    fn no_data_symbols_is_an_error() {
        let d = Dimensions { cells: 1, users: 2, antennas: 4, coherence: 2, pilot_len: 2 };
        assert!(flops_data(DataKind::Mf, d).is_err());
        assert!(flops_an(AnKind::Sns, d).is_err());
    }
}
