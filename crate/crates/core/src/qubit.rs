//! Dense N-qubit vectors and density operators.
//!
//! Party 1 (index 0) is the most significant bit of the `2^N` basis index, so
//! the basis order follows the left-to-right tensor order `|b_1 b_2 ... b_N>`.

use nalgebra::{DMatrix, DVector, Matrix2};
use num_complex::Complex64;
use serde::{Serialize, Serializer};

use crate::error::{MecsError, Result};

/// Largest register held as a dense vector.
pub const MAX_DENSE_PARTIES: usize = 20;

pub const NORM_TOL: f64 = 1e-12;
pub const DENSITY_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Bit of `party` in basis index `idx` of an `n`-party register.
#[inline]
pub fn bit(idx: usize, party: usize, n: usize) -> usize {
    (idx >> (n - 1 - party)) & 1
}

fn check_parties(n: usize) -> Result<()> {
    if n == 0 {
        Err(MecsError::TooFewParties { got: 0, min: 1 })
    } else if n > MAX_DENSE_PARTIES {
        Err(MecsError::TooManyParties(n))
    } else {
        Ok(())
    }
}

/// Normalized pure state of `parties` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct QubitState {
    parties: usize,
    amps: DVector<Complex64>,
}

impl QubitState {
    pub fn new(parties: usize, amps: Vec<Complex64>) -> Result<Self> {
        check_parties(parties)?;
        if amps.len() != 1 << parties {
            return Err(MecsError::InvalidOutcome(format!(
                "expected {} amplitudes, got {}",
                1usize << parties,
                amps.len()
            )));
        }
        if amps.iter().any(|a| !(a.re.is_finite() && a.im.is_finite())) {
            return Err(MecsError::NonFinite("qubit amplitude"));
        }
        let amps = DVector::from_vec(amps);
        let n2 = amps.norm_squared();
        if (n2 - 1.0).abs() > NORM_TOL {
            return Err(MecsError::NotNormalized(n2));
        }
        Ok(Self { parties, amps })
    }

    /// Normalizes `amps` before wrapping.
    pub fn from_unnormalized(parties: usize, amps: Vec<Complex64>) -> Result<Self> {
        let n = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !n.is_finite() || n <= 0.0 {
            return Err(MecsError::ZeroNorm);
        }
        Self::new(parties, amps.into_iter().map(|a| a / n).collect())
    }

    pub fn basis(parties: usize, index: usize) -> Result<Self> {
        check_parties(parties)?;
        let mut v = vec![ZERO; 1 << parties];
        *v.get_mut(index).ok_or_else(|| {
            MecsError::InvalidOutcome(format!("basis index {index} out of range"))
        })? = ONE;
        Self::new(parties, v)
    }

    pub fn parties(&self) -> usize {
        self.parties
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amps
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amps[index]
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.amps.dotc(&other.amps)
    }

    pub fn fidelity(&self, other: &Self) -> f64 {
        self.inner(other).norm_sqr()
    }

    pub fn distance(&self, other: &Self) -> f64 {
        (&self.amps - &other.amps).norm()
    }

    /// Applies a single-qubit unitary to `party`.
    pub fn apply_local(&self, party: usize, u: &Matrix2<Complex64>) -> Self {
        let n = self.parties;
        let shift = n - 1 - party;
        let mut out = self.amps.clone();
        for idx in 0..self.dim() {
            if (idx >> shift) & 1 == 0 {
                let j = idx | (1 << shift);
                let (a0, a1) = (self.amps[idx], self.amps[j]);
                out[idx] = u[(0, 0)] * a0 + u[(0, 1)] * a1;
                out[j] = u[(1, 0)] * a0 + u[(1, 1)] * a1;
            }
        }
        Self {
            parties: n,
            amps: out,
        }
    }

    /// Applies a full `2^N x 2^N` operator; the result is renormalized only
    /// if `op` is unitary.
    pub fn apply(&self, op: &DMatrix<Complex64>) -> Result<Self> {
        Self::new(self.parties, (op * &self.amps).iter().copied().collect())
    }

    pub fn projector(&self) -> DensityOperator {
        DensityOperator {
            parties: self.parties,
            matrix: &self.amps * self.amps.adjoint(),
        }
    }

    /// Reduced density operator of the listed parties (in the given order)
    /// computed directly from the amplitudes.
    pub fn reduced(&self, keep: &[usize]) -> Result<DensityOperator> {
        let (n, dk) = (self.parties, keep.len());
        check_keep(keep, n)?;
        let rest: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
        let mut m = DMatrix::from_element(1 << dk, 1 << dk, ZERO);
        for e in 0..(1usize << rest.len()) {
            let base = scatter(e, &rest, n);
            for a in 0..(1usize << dk) {
                let ia = base | scatter(a, keep, n);
                let va = self.amps[ia];
                if va == ZERO {
                    continue;
                }
                for b in 0..(1usize << dk) {
                    let ib = base | scatter(b, keep, n);
                    m[(a, b)] += va * self.amps[ib].conj();
                }
            }
        }
        Ok(DensityOperator {
            parties: dk,
            matrix: m,
        })
    }
}

impl Serialize for QubitState {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = self.amps.iter().map(|a| [a.re, a.im]).collect();
        pairs.serialize(s)
    }
}

fn check_keep(keep: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    for &q in keep {
        if q >= n || seen[q] {
            return Err(MecsError::InvalidOutcome(format!(
                "invalid party list {keep:?} for {n} parties"
            )));
        }
        seen[q] = true;
    }
    if keep.is_empty() {
        return Err(MecsError::InvalidOutcome("empty party list".into()));
    }
    Ok(())
}

/// Places the bits of `local` (MSB first) at the register positions `parties`.
fn scatter(local: usize, parties: &[usize], n: usize) -> usize {
    let k = parties.len();
    parties.iter().enumerate().fold(0, |acc, (i, &q)| {
        acc | (((local >> (k - 1 - i)) & 1) << (n - 1 - q))
    })
}

/// Hermitian, unit-trace, positive semidefinite operator on `parties` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    parties: usize,
    matrix: DMatrix<Complex64>,
}

impl DensityOperator {
    /// Validates Hermiticity, trace and positivity to [`DENSITY_TOL`].
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        let dim = matrix.nrows();
        if dim != matrix.ncols() || dim < 2 || !dim.is_power_of_two() {
            return Err(MecsError::InvalidDensity(format!(
                "shape {}x{} is not a square power of two",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix
            .iter()
            .any(|a| !(a.re.is_finite() && a.im.is_finite()))
        {
            return Err(MecsError::NonFinite("density matrix"));
        }
        let herm = (&matrix - matrix.adjoint()).camax();
        if herm > DENSITY_TOL {
            return Err(MecsError::InvalidDensity(format!(
                "not Hermitian (deviation {herm:e})"
            )));
        }
        let tr = matrix.trace();
        if (tr - ONE).norm() > DENSITY_TOL {
            return Err(MecsError::InvalidDensity(format!("trace {tr} != 1")));
        }
        let sym = (&matrix + matrix.adjoint()) * Complex64::new(0.5, 0.0);
        let min_eig = sym.symmetric_eigenvalues().min();
        if min_eig < -DENSITY_TOL {
            return Err(MecsError::InvalidDensity(format!(
                "negative eigenvalue {min_eig:e}"
            )));
        }
        Ok(Self {
            parties: dim.trailing_zeros() as usize,
            matrix,
        })
    }

    pub fn maximally_mixed(parties: usize) -> Result<Self> {
        check_parties(parties)?;
        let d = 1usize << parties;
        Self::new(DMatrix::identity(d, d) * Complex64::new(1.0 / d as f64, 0.0))
    }

    pub fn parties(&self) -> usize {
        self.parties
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    /// Partial trace keeping the listed parties, in the given order.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        let (n, dk) = (self.parties, keep.len());
        check_keep(keep, n)?;
        let rest: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
        let mut m = DMatrix::from_element(1 << dk, 1 << dk, ZERO);
        for e in 0..(1usize << rest.len()) {
            let base = scatter(e, &rest, n);
            for a in 0..(1usize << dk) {
                let ia = base | scatter(a, keep, n);
                for b in 0..(1usize << dk) {
                    let ib = base | scatter(b, keep, n);
                    m[(a, b)] += self.matrix[(ia, ib)];
                }
            }
        }
        Ok(Self {
            parties: dk,
            matrix: m,
        })
    }

    /// `U rho U^dagger` for a single-qubit `u` on `party`.
    pub fn conjugate_local(&self, party: usize, u: &Matrix2<Complex64>) -> Self {
        let full = local_operator(self.parties, party, u);
        Self {
            parties: self.parties,
            matrix: &full * &self.matrix * full.adjoint(),
        }
    }
}

/// `I (x) ... (x) u (x) ... (x) I` with `u` acting on `party`.
pub fn local_operator(n: usize, party: usize, u: &Matrix2<Complex64>) -> DMatrix<Complex64> {
    let d = 1usize << n;
    let shift = n - 1 - party;
    DMatrix::from_fn(d, d, |r, c| {
        if (r ^ c) & !(1 << shift) != 0 {
            ZERO
        } else {
            u[((r >> shift) & 1, (c >> shift) & 1)]
        }
    })
}

pub fn pauli_x() -> Matrix2<Complex64> {
    Matrix2::new(ZERO, ONE, ONE, ZERO)
}

pub fn pauli_y() -> Matrix2<Complex64> {
    let i = Complex64::new(0.0, 1.0);
    Matrix2::new(ZERO, -i, i, ZERO)
}

pub fn pauli_z() -> Matrix2<Complex64> {
    Matrix2::new(ONE, ZERO, ZERO, -ONE)
}

pub fn hadamard() -> Matrix2<Complex64> {
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    Matrix2::new(h, h, h, -h)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn rejects_unnormalized_and_wrong_length() {
        assert!(matches!(
            QubitState::new(1, vec![c(1.0), c(1.0)]),
            Err(MecsError::NotNormalized(_))
        ));
        assert!(QubitState::new(2, vec![c(1.0), c(0.0)]).is_err());
        assert!(QubitState::new(0, vec![c(1.0)]).is_err());
    }

    #[test]
    fn reduced_of_product_state() {
        // |0> (x) |+> (x) |1>
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut v = vec![c(0.0); 8];
        v[0b001] = c(h);
        v[0b011] = c(h);
        let s = QubitState::new(3, v).unwrap();
        let r = s.reduced(&[1]).unwrap();
        for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            assert!((r.matrix()[(i, j)] - c(0.5)).norm() < 1e-15);
        }
        let r = s.reduced(&[2, 0]).unwrap();
        // party 2 is |1>, party 0 is |0>: local index 0b10
        assert!((r.matrix()[(2, 2)] - c(1.0)).norm() < 1e-15);
    }

    #[test]
    fn reduced_matches_projector_partial_trace() {
        let amps: Vec<Complex64> = (0..16)
            .map(|k| Complex64::new((k as f64 * 0.37).sin(), (k as f64 * 0.91).cos()))
            .collect();
        let s = QubitState::from_unnormalized(4, amps).unwrap();
        let a = s.reduced(&[0, 2]).unwrap();
        let b = s.projector().partial_trace(&[0, 2]).unwrap();
        assert!((a.matrix() - b.matrix()).camax() < 1e-15);
    }

    #[test]
    fn local_operator_matches_apply_local() {
        let amps: Vec<Complex64> = (0..8).map(|k| Complex64::new(k as f64, 1.0)).collect();
        let s = QubitState::from_unnormalized(3, amps).unwrap();
        let u = hadamard();
        let a = s.apply_local(1, &u);
        let b = local_operator(3, 1, &u) * s.amplitudes();
        assert!((a.amplitudes() - b).camax() < 1e-14);
    }

    #[test]
    fn density_validation() {
        assert!(DensityOperator::maximally_mixed(2).is_ok());
        let mut m = DMatrix::from_element(4, 4, c(0.0));
        m[(0, 0)] = c(1.2);
        m[(1, 1)] = c(-0.2);
        assert!(DensityOperator::new(m).is_err());
        let mut m = DMatrix::from_element(4, 4, c(0.0));
        m[(0, 0)] = c(1.0);
        m[(0, 1)] = c(0.3);
        assert!(DensityOperator::new(m).is_err());
        assert!(DensityOperator::new(DMatrix::identity(3, 3)).is_err());
    }
}
