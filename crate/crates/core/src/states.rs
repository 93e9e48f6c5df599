//! Balanced multipartite entangled coherent states and their limits.
//!
//! `|alpha, theta, N> = Nrm (|alpha>^N + e^{i theta} |-alpha>^N)` with
//! `Nrm = [2 + 2 p^N cos(theta)]^{-1/2}` and `p = exp(-2|alpha|^2)`.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{CoherentLabel, MultimodeSuperposition, Term};
use crate::error::{MecsError, Result};
use crate::qubit::QubitState;

/// Below this, `2 + 2 p^N cos(theta)` is treated as the null state. Covers
/// `theta = fl(pi)`, where `cos(theta/2)^2` is about `4e-33` instead of 0.
pub const NULL_STATE_TOL: f64 = 1e-30;

/// How the coherent amplitude is specified.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Amplitude {
    Alpha(CoherentLabel),
    Overlap(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MecsSpec {
    parties: usize,
    theta: f64,
    amplitude: Amplitude,
}

impl MecsSpec {
    pub fn from_alpha(alpha: CoherentLabel, theta: f64, parties: usize) -> Result<Self> {
        Self::new(Amplitude::Alpha(alpha), theta, parties)
    }

    pub fn from_overlap(p: f64, theta: f64, parties: usize) -> Result<Self> {
        Self::new(Amplitude::Overlap(p), theta, parties)
    }

    pub fn new(amplitude: Amplitude, theta: f64, parties: usize) -> Result<Self> {
        if parties < 2 {
            return Err(MecsError::TooFewParties {
                got: parties,
                min: 2,
            });
        }
        if !theta.is_finite() {
            return Err(MecsError::NonFinite("theta"));
        }
        if let Amplitude::Overlap(p) = amplitude {
            if !p.is_finite() {
                return Err(MecsError::NonFinite("overlap p"));
            }
            if !(0.0..=1.0).contains(&p) {
                return Err(MecsError::OverlapOutOfRange(p));
            }
        }
        Ok(Self {
            parties,
            theta,
            amplitude,
        })
    }

    pub fn parties(&self) -> usize {
        self.parties
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn amplitude(&self) -> Amplitude {
        self.amplitude
    }

    /// `p = <-alpha|alpha>`.
    pub fn p(&self) -> f64 {
        match self.amplitude {
            Amplitude::Alpha(a) => a.parity_overlap(),
            Amplitude::Overlap(p) => p,
        }
    }

    /// `ln p`, exact (`-2|alpha|^2`) when the amplitude is given.
    pub fn ln_p(&self) -> f64 {
        match self.amplitude {
            Amplitude::Alpha(a) => -2.0 * a.value().norm_sqr(),
            Amplitude::Overlap(p) => p.ln(),
        }
    }

    /// Coherent amplitude; for an overlap-specified state the real positive
    /// root of `exp(-2 alpha^2) = p`. `None` at `p = 0`.
    pub fn alpha(&self) -> Option<CoherentLabel> {
        match self.amplitude {
            Amplitude::Alpha(a) => Some(a),
            Amplitude::Overlap(p) if p > 0.0 => CoherentLabel::real((-p.ln() / 2.0).sqrt()).ok(),
            Amplitude::Overlap(_) => None,
        }
    }

    pub fn with_parties(&self, parties: usize) -> Result<Self> {
        Self::new(self.amplitude, self.theta, parties)
    }

    /// `1 + p^N cos(theta)`, evaluated without cancellation near the null
    /// state `p = 1, theta = pi`.
    pub fn norm_base(&self) -> f64 {
        norm_base(self.ln_p(), self.theta, self.parties)
    }

    /// `Nrm^2 = 1 / (2 + 2 p^N cos(theta))`.
    pub fn norm_factor_sq(&self) -> Result<f64> {
        let d = 2.0 * self.norm_base();
        if d <= NULL_STATE_TOL {
            Err(MecsError::NullState(d))
        } else {
            Ok(d.recip())
        }
    }
}

/// `1 - p^k` from `ln p`, accurate for `p` near 1.
pub(crate) fn one_minus_pow(ln_p: f64, k: usize) -> f64 {
    if k == 0 {
        0.0
    } else {
        -(k as f64 * ln_p).exp_m1()
    }
}

/// `p^k` from `ln p`; `p^0 = 1` also at `p = 0`.
pub(crate) fn pow_p(ln_p: f64, k: usize) -> f64 {
    if k == 0 {
        1.0
    } else {
        (k as f64 * ln_p).exp()
    }
}

/// `1 + p^N cos(theta) = (1 - p^N) + p^N (1 + cos(theta))`.
pub(crate) fn norm_base(ln_p: f64, theta: f64, n: usize) -> f64 {
    let half = (theta / 2.0).cos();
    one_minus_pow(ln_p, n) + pow_p(ln_p, n) * 2.0 * half * half
}

/// The MECS in its exact coherent-state representation.
pub fn build_mecs(spec: &MecsSpec) -> Result<MultimodeSuperposition> {
    let nrm = spec.norm_factor_sq()?.sqrt();
    let alpha = spec
        .alpha()
        .ok_or_else(|| MecsError::Unsupported("p = 0 has no finite coherent amplitude".into()))?;
    let n = spec.parties();
    MultimodeSuperposition::new(
        n,
        vec![
            Term::new(Complex64::new(nrm, 0.0), vec![alpha; n]),
            Term::new(
                Complex64::from_polar(nrm, spec.theta()),
                vec![alpha.negated(); n],
            ),
        ],
    )
}

/// Amplitudes of the MECS in the orthonormal basis `|0> = |alpha>`,
/// `|1> = (|-alpha> - p|alpha>)/M` on every mode:
/// `Nrm (delta_{b,0} + e^{i theta} p^{zeros(b)} M^{ones(b)})`.
pub fn embed_as_qubits(spec: &MecsSpec) -> Result<QubitState> {
    let p = spec.p();
    if p >= 1.0 {
        return Err(MecsError::DegenerateBasis(p));
    }
    let n = spec.parties();
    if n > crate::qubit::MAX_DENSE_PARTIES {
        return Err(MecsError::TooManyParties(n));
    }
    let nrm = spec.norm_factor_sq()?.sqrt();
    let m = one_minus_pow(spec.ln_p(), 2).sqrt();
    let phase = Complex64::from_polar(1.0, spec.theta());
    let amps = (0..1usize << n)
        .map(|b| {
            let ones = b.count_ones() as i32;
            let branch = phase * p.powi(n as i32 - ones) * m.powi(ones);
            let direct = if b == 0 { 1.0 } else { 0.0 };
            (branch + direct) * nrm
        })
        .collect();
    QubitState::new(n, amps)
}

/// `(|0...0> + e^{i theta} |1...1>)/sqrt(2)`.
pub fn ghz_state(parties: usize, theta: f64) -> Result<QubitState> {
    if parties < 2 {
        return Err(MecsError::TooFewParties {
            got: parties,
            min: 2,
        });
    }
    let d = 1usize << parties;
    let mut v = vec![Complex64::new(0.0, 0.0); d];
    v[0] = Complex64::new(FRAC_1_SQRT_2, 0.0);
    v[d - 1] = Complex64::from_polar(FRAC_1_SQRT_2, theta);
    QubitState::new(parties, v)
}

/// Uniform superposition of the `N` single-excitation basis states.
pub fn w_state(parties: usize) -> Result<QubitState> {
    if parties < 2 {
        return Err(MecsError::TooFewParties {
            got: parties,
            min: 2,
        });
    }
    let amp = (parties as f64).sqrt().recip();
    let v = (0..1usize << parties)
        .map(|b| {
            if b.count_ones() == 1 {
                Complex64::new(amp, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    QubitState::new(parties, v)
}
