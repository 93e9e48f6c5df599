//! Conditional-displacement CNOT on two ions sharing one phonon mode,
//! checked in a truncated Fock space.
//!
//! With `X = (a + a^dagger)/sqrt(2)`, `P = (a - a^dagger)/(i sqrt(2))`,
//! `Zc = (1 - sigma_cz)/2` and `Xt = (1 - sigma_tx)/2`, the product
//!
//! ```text
//! exp(i kx X Zc) exp(i kp P Xt) exp(-i kx X Zc) exp(-i kp P Xt)
//!     = exp(-i kx kp Zc Xt)
//! ```
//!
//! holds exactly in the untruncated space, and for `kx kp = pi` the right
//! side is `CN_ct` acting trivially on the mode. The `P Xt` factors are
//! built from `P Zt` by conjugating the target with a Hadamard.

use nalgebra::{DMatrix, DVector, Matrix2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{MecsError, Result};
use crate::qubit::{hadamard, local_operator};

pub const MIN_CUTOFF: usize = 16;

/// Tail weight of a coherent input above `cutoff / 2` that is still accepted.
pub const SUPPORT_TOL: f64 = 1e-8;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CnotParams {
    pub kx: f64,
    pub kp: f64,
    /// Fock-space dimension of the mode.
    pub cutoff: usize,
}

impl CnotParams {
    pub fn new(kx: f64, kp: f64, cutoff: usize) -> Result<Self> {
        if !kx.is_finite() || !kp.is_finite() {
            return Err(MecsError::NonFinite("displacement strengths"));
        }
        if cutoff < MIN_CUTOFF {
            return Err(MecsError::Truncation(format!(
                "cutoff {cutoff} is below the minimum {MIN_CUTOFF}"
            )));
        }
        Ok(Self { kx, kp, cutoff })
    }

    /// `kx = kp = sqrt(pi)`, the symmetric CNOT choice.
    pub fn symmetric_cnot(cutoff: usize) -> Result<Self> {
        let k = std::f64::consts::PI.sqrt();
        Self::new(k, k, cutoff)
    }

    /// Phase `kx kp` of the two-qubit gate.
    pub fn kappa(&self) -> f64 {
        self.kx * self.kp
    }

    /// Largest Fock number in the subspace the identity is checked on.
    pub fn low_energy_max(&self) -> usize {
        self.cutoff / 4
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CnotReport {
    pub cutoff: usize,
    pub low_energy_max: usize,
    /// Spectral norm of `(U - T) Pi` with `Pi` the projector onto the
    /// qubits times Fock states `0..=low_energy_max`.
    pub residual: f64,
}

fn annihilation(d: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(d, d, |r, c| {
        if c == r + 1 {
            Complex64::new((c as f64).sqrt(), 0.0)
        } else {
            ZERO
        }
    })
}

fn quadratures(d: usize) -> (DMatrix<Complex64>, DMatrix<Complex64>) {
    let a = annihilation(d);
    let ad = a.adjoint();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let x = (&a + &ad) * Complex64::new(s, 0.0);
    // (a - a^dagger) / (i sqrt 2) = -i (a - a^dagger) / sqrt 2
    let p = (&a - &ad) * Complex64::new(0.0, -s);
    (x, p)
}

/// `(I - Pi) (x) I + Pi (x) e` on two qubits times the mode.
fn controlled(proj: &DMatrix<Complex64>, e: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let d = e.nrows();
    let id4 = DMatrix::<Complex64>::identity(4, 4);
    (&id4 - proj).kronecker(&DMatrix::identity(d, d)) + proj.kronecker(e)
}

fn projector_one() -> Matrix2<Complex64> {
    Matrix2::new(ZERO, ZERO, ZERO, ONE)
}

fn check_pair(control: usize, target: usize) -> Result<()> {
    if control > 1 || target > 1 || control == target {
        return Err(MecsError::InvalidOutcome(format!(
            "control/target must be distinct ions 0 and 1, got {control}/{target}"
        )));
    }
    Ok(())
}

/// The four-factor product on `C^2 (x) C^2 (x) C^cutoff`, ions ordered
/// `0, 1`, mode last.
pub fn conditional_displacement_product(
    params: &CnotParams,
    control: usize,
    target: usize,
) -> Result<DMatrix<Complex64>> {
    check_pair(control, target)?;
    let d = params.cutoff;
    let (x, p) = quadratures(d);
    let zc = local_operator(2, control, &projector_one());
    let zt = local_operator(2, target, &projector_one());

    let ex = |sign: f64| (x.clone() * Complex64::new(0.0, sign * params.kx)).exp();
    let ep = |sign: f64| (p.clone() * Complex64::new(0.0, sign * params.kp)).exp();

    // conjugation by H on the target turns Zt into Xt
    let h = local_operator(2, target, &hadamard()).kronecker(&DMatrix::<Complex64>::identity(d, d));
    let xp = |sign: f64| &h * controlled(&zt, &ep(sign)) * &h;

    Ok(controlled(&zc, &ex(1.0)) * xp(1.0) * controlled(&zc, &ex(-1.0)) * xp(-1.0))
}

/// `exp(-i kappa Zc Xt)` on the two ions.
pub fn target_gate(kappa: f64, control: usize, target: usize) -> Result<DMatrix<Complex64>> {
    check_pair(control, target)?;
    let zc = local_operator(2, control, &projector_one());
    let h = local_operator(2, target, &hadamard());
    let xt = &h * local_operator(2, target, &projector_one()) * &h;
    let phase = ONE - Complex64::from_polar(1.0, -kappa);
    Ok(DMatrix::identity(4, 4) - (zc * xt) * phase)
}

/// Residual of the conditional-displacement identity on the low-energy
/// subspace.
pub fn verify_cnot_identity(
    params: &CnotParams,
    control: usize,
    target: usize,
) -> Result<CnotReport> {
    let d = params.cutoff;
    if d < MIN_CUTOFF {
        return Err(MecsError::Truncation(format!("cutoff {d} < {MIN_CUTOFF}")));
    }
    let u = conditional_displacement_product(params, control, target)?;
    let t = target_gate(params.kappa(), control, target)?
        .kronecker(&DMatrix::<Complex64>::identity(d, d));
    let diff = u - t;
    let lmax = params.low_energy_max();
    let cols: Vec<usize> = (0..4)
        .flat_map(|q| (0..=lmax).map(move |n| q * d + n))
        .collect();
    let restricted = diff.select_columns(cols.iter());
    let residual = restricted
        .singular_values()
        .iter()
        .copied()
        .fold(0.0, f64::max);
    Ok(CnotReport {
        cutoff: d,
        low_energy_max: lmax,
        residual,
    })
}

/// Fock amplitudes of `|alpha>` truncated to `cutoff` levels.
pub fn coherent_fock(alpha: Complex64, cutoff: usize) -> DVector<Complex64> {
    let mut v = DVector::from_element(cutoff, ZERO);
    let mut c = Complex64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    for n in 0..cutoff {
        v[n] = c;
        c = c * alpha / ((n + 1) as f64).sqrt();
    }
    v
}

/// `1 - |<T psi (x) alpha | U (psi (x) alpha)>|^2`: how far the mode is from
/// returning to its input coherent state after the gate.
pub fn databus_infidelity(
    params: &CnotParams,
    control: usize,
    target: usize,
    alpha: Complex64,
    qubits: [Complex64; 4],
) -> Result<f64> {
    let d = params.cutoff;
    let mode = coherent_fock(alpha, d);
    let tail: f64 = mode
        .iter()
        .skip(d / 2 + 1)
        .map(|c| c.norm_sqr())
        .sum::<f64>()
        + (1.0 - mode.norm_squared()).max(0.0);
    if tail > SUPPORT_TOL {
        return Err(MecsError::Truncation(format!(
            "coherent input |{alpha}> has weight {tail:e} above Fock level {}",
            d / 2
        )));
    }
    let q = DVector::from_column_slice(&qubits);
    let qn = q.norm();
    if qn.is_nan() || qn <= 0.0 {
        return Err(MecsError::ZeroNorm);
    }
    let q = q / Complex64::new(qn, 0.0);
    let input = q.kronecker(&mode);
    let output = conditional_displacement_product(params, control, target)? * &input;
    let expected = (target_gate(params.kappa(), control, target)? * &q).kronecker(&mode);
    let overlap = expected.dotc(&output) / Complex64::new(expected.norm_squared(), 0.0);
    Ok((1.0 - overlap.norm_sqr()).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::cnot;

    #[test]
    fn quadrature_commutator_is_i_in_low_block() {
        let (x, p) = quadratures(20);
        let c = &x * &p - &p * &x;
        for n in 0..19 {
            assert!((c[(n, n)] - Complex64::new(0.0, 1.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn target_at_pi_is_cnot() {
        for (c, t) in [(0, 1), (1, 0)] {
            let g = target_gate(std::f64::consts::PI, c, t).unwrap();
            assert!((g - cnot(2, c, t)).camax() < 1e-15);
        }
    }

    #[test]
    fn zero_momentum_kick_is_identity() {
        let params = CnotParams::new(1.3, 0.0, 16).unwrap();
        let r = verify_cnot_identity(&params, 0, 1).unwrap();
        assert!(r.residual < 1e-13, "{}", r.residual);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(CnotParams::new(1.0, 1.0, 8).is_err());
        assert!(CnotParams::new(f64::NAN, 1.0, 32).is_err());
        let p = CnotParams::symmetric_cnot(16).unwrap();
        assert!(verify_cnot_identity(&p, 0, 0).is_err());
        let big = Complex64::new(3.0, 0.0);
        assert!(matches!(
            databus_infidelity(&p, 0, 1, big, [ONE, ZERO, ZERO, ZERO]),
            Err(MecsError::Truncation(_))
        ));
    }

    #[test]
    fn coherent_fock_is_normalized() {
        let v = coherent_fock(Complex64::new(0.5, 0.2), 32);
        assert!((v.norm_squared() - 1.0).abs() < 1e-14);
    }
}
