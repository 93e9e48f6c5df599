//! Entanglement of the MECS: numeric two-qubit concurrence, closed-form
//! split and pair concurrences, 3-tangle and N-tangle, the maximization of
//! the pair concurrence over `p`, and the substitution rule for general
//! two-state superpositions with real overlap.

use nalgebra::{DMatrix, Matrix2, Matrix4, Schur};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{MecsError, Result};
use crate::qubit::{pauli_y, DensityOperator, QubitState};
use crate::report::MeasureReport;
use crate::states::{norm_base, one_minus_pow, pow_p, MecsSpec, NULL_STATE_TOL};

/// Imaginary parts of `rho rho~` eigenvalues below this are discarded.
pub const EIGEN_IMAG_TOL: f64 = 1e-9;

const SCHUR_MAX_ITER: usize = 10_000;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcurrenceDiagnostics {
    /// Square roots of the eigenvalues of `rho (sy sy) rho* (sy sy)`,
    /// descending.
    pub lambdas: [f64; 4],
    pub concurrence: f64,
}

impl ConcurrenceDiagnostics {
    fn from_lambdas(mut lambdas: [f64; 4]) -> Self {
        lambdas.sort_by(|a, b| b.total_cmp(a));
        let concurrence = (lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).max(0.0);
        Self {
            lambdas,
            concurrence,
        }
    }
}

/// Size `k` of the first block in a `k | N-k` bipartition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    k: usize,
}

impl SplitSpec {
    pub fn new(k: usize, n: usize) -> Result<Self> {
        if k == 0 || k >= n {
            Err(MecsError::InvalidSplit { k, n })
        } else {
            Ok(Self { k })
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    fn check(&self, n: usize) -> Result<()> {
        Self::new(self.k, n).map(|_| ())
    }
}

/// Two linearly independent states with real overlap `p'` and relative
/// phase `theta'`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneralPairSpec {
    pub p_prime: f64,
    pub theta_prime: f64,
}

impl GeneralPairSpec {
    pub fn new(p_prime: f64, theta_prime: f64) -> Result<Self> {
        if !p_prime.is_finite() || !theta_prime.is_finite() {
            return Err(MecsError::NonFinite("general pair spec"));
        }
        if !(0.0..=1.0).contains(&p_prime) {
            return Err(MecsError::OverlapOutOfRange(p_prime));
        }
        Ok(Self {
            p_prime,
            theta_prime,
        })
    }
}

fn is_null(spec: &MecsSpec) -> bool {
    2.0 * spec.norm_base() <= NULL_STATE_TOL
}

/// Local parity `(-1)^{a^dagger a}` in the `{|0>, |1>}` basis of one mode:
/// it exchanges `|alpha>` and `|-alpha>`, which there is the real
/// reflection `[[p, M], [M, -p]]`.
pub fn parity_reflection(p: f64) -> Result<Matrix2<Complex64>> {
    let b = crate::algebra::ortho_basis(p)?;
    let (p, m) = (Complex64::new(b.p(), 0.0), Complex64::new(b.m(), 0.0));
    Ok(Matrix2::new(p, m, m, -p))
}

/// Two-party marginal `rho_12` after the parity flip on mode 2, in the basis
/// `{|00>, |01>, |10>, |11>}`:
///
/// ```text
/// Nrm^2 [ 2p^2(1+q cos)   pM(1+q e^{i t})  pM(1+q e^{-i t})  0 ]
///       [ pM(1+q e^{-it})  M^2             M^2 q e^{-i t}    0 ]
///       [ pM(1+q e^{it})   M^2 q e^{i t}   M^2               0 ]
///       [ 0                0               0                 0 ]
/// ```
///
/// with `q = p^{N-2}`. For `N = 2` this is the pure projector.
pub fn reduced_pair_density(spec: &MecsSpec) -> Result<DensityOperator> {
    let nrm2 = spec.norm_factor_sq()?;
    let n = spec.parties();
    let ln_p = spec.ln_p();
    let (p, theta) = (spec.p(), spec.theta());
    let m2 = one_minus_pow(ln_p, 2);
    let m = m2.sqrt();
    let q = pow_p(ln_p, n - 2);
    // 1 + q cos(theta), computed like the normalization
    let one_q_cos = if n == 2 {
        let h = (theta / 2.0).cos();
        2.0 * h * h
    } else {
        norm_base(ln_p, theta, n - 2)
    };
    let e = Complex64::from_polar(1.0, theta);
    let c = |x: f64| Complex64::new(x, 0.0);
    let pm = c(p * m);
    let one = c(1.0);
    let mut r = DMatrix::from_element(4, 4, ZERO);
    r[(0, 0)] = c(2.0 * p * p * one_q_cos);
    r[(0, 1)] = pm * (one + e * q);
    r[(0, 2)] = pm * (one + e.conj() * q);
    r[(1, 0)] = pm * (one + e.conj() * q);
    r[(2, 0)] = pm * (one + e * q);
    r[(1, 1)] = c(m2);
    r[(2, 2)] = c(m2);
    r[(1, 2)] = e.conj() * (m2 * q);
    r[(2, 1)] = e * (m2 * q);
    DensityOperator::new(r * c(nrm2))
}

/// Wootters concurrence of a two-qubit density operator, from a general
/// complex eigensolve of `rho (sy (x) sy) rho* (sy (x) sy)`.
pub fn wootters_concurrence(rho: &DensityOperator) -> Result<ConcurrenceDiagnostics> {
    if rho.parties() != 2 {
        return Err(MecsError::InvalidDensity(format!(
            "concurrence needs two qubits, got {}",
            rho.parties()
        )));
    }
    let r: Matrix4<Complex64> = rho.matrix().fixed_view::<4, 4>(0, 0).into_owned();
    let sy = pauli_y();
    let yy = sy.kronecker(&sy);
    let tilde = yy * r.conjugate() * yy;
    let product = r * tilde;
    if product.iter().all(|z| z.norm() <= f64::MIN_POSITIVE) {
        return Ok(ConcurrenceDiagnostics::from_lambdas([0.0; 4]));
    }
    let (_, t) = Schur::try_new(product, f64::EPSILON, SCHUR_MAX_ITER)
        .ok_or_else(|| MecsError::InvalidDensity("eigensolver did not converge".into()))?
        .unpack();
    let mut lambdas = [0.0; 4];
    for (i, l) in lambdas.iter_mut().enumerate() {
        let ev = t[(i, i)];
        if ev.im.abs() > EIGEN_IMAG_TOL {
            return Err(MecsError::InvalidDensity(format!(
                "spin-flipped product has complex eigenvalue {ev}"
            )));
        }
        *l = ev.re.max(0.0).sqrt();
    }
    Ok(ConcurrenceDiagnostics::from_lambdas(lambdas))
}

/// `C_12 = (p^{N-2} - p^N) / (1 + p^N cos(theta))`.
///
/// At the null point `p = 1, theta = pi` the limit is returned: `2/N` for
/// `N > 2` (the W state) and `1` for `N = 2`.
pub fn pair_concurrence_closed(spec: &MecsSpec) -> Result<f64> {
    let n = spec.parties();
    if is_null(spec) {
        return Ok(if n == 2 { 1.0 } else { 2.0 / n as f64 });
    }
    let ln_p = spec.ln_p();
    Ok(one_minus_pow(ln_p, 2) * pow_p(ln_p, n - 2) / spec.norm_base())
}

/// `C_(k,N-k) = sqrt((1 - p^{2k})(1 - p^{2(N-k)})) / (1 + p^N cos(theta))`;
/// at the null point the limit `2 sqrt(k(N-k)) / N`.
pub fn split_concurrence_closed(spec: &MecsSpec, split: SplitSpec) -> Result<f64> {
    let n = spec.parties();
    split.check(n)?;
    let k = split.k();
    if is_null(spec) {
        return Ok(2.0 * ((k * (n - k)) as f64).sqrt() / n as f64);
    }
    let ln_p = spec.ln_p();
    let num = if 2 * k == n {
        one_minus_pow(ln_p, n)
    } else {
        (one_minus_pow(ln_p, 2 * k) * one_minus_pow(ln_p, 2 * (n - k))).sqrt()
    };
    Ok(num / spec.norm_base())
}

/// Closed-form square roots of the `rho_12 rho~_12` eigenvalues:
/// `Nrm^2 M^2 (1 + q)`, `Nrm^2 M^2 (1 - q)`, `0`, `0`.
pub fn pair_lambdas_closed(spec: &MecsSpec) -> [f64; 4] {
    let n = spec.parties();
    let ln_p = spec.ln_p();
    let nm2 = if is_null(spec) {
        // (1 - p^2) / (2 (1 - p^N)) -> 1/N
        1.0 / n as f64
    } else {
        one_minus_pow(ln_p, 2) / (2.0 * spec.norm_base())
    };
    let q = pow_p(ln_p, n - 2);
    [nm2 * (1.0 + q), nm2 * (1.0 - q), 0.0, 0.0]
}

/// 3-tangle `(1 - p^2)^3 / (1 + p^3 cos(theta))^2`.
pub fn three_tangle(spec: &MecsSpec) -> Result<f64> {
    if spec.parties() != 3 {
        return Err(MecsError::Unsupported(format!(
            "3-tangle needs N = 3, got {}",
            spec.parties()
        )));
    }
    n_tangle_closed(spec)
}

/// 3-tangle from the residual-tangle identity
/// `tau = C_1(23)^2 - C_12^2 - C_13^2`, with `C_12 = C_13` by symmetry.
pub fn three_tangle_composed(spec: &MecsSpec) -> Result<f64> {
    if spec.parties() != 3 {
        return Err(MecsError::Unsupported(format!(
            "3-tangle needs N = 3, got {}",
            spec.parties()
        )));
    }
    let split = split_concurrence_closed(spec, SplitSpec::new(1, 3)?)?;
    let pair = pair_concurrence_closed(spec)?;
    Ok(split * split - 2.0 * pair * pair)
}

/// `N`-tangle `(1 - p^2)^N / (1 + p^N cos(theta))^2` for even `N` and
/// `N = 3`. Odd `N > 3` has no such measure and is rejected.
pub fn n_tangle_closed(spec: &MecsSpec) -> Result<f64> {
    let n = spec.parties();
    if n % 2 == 1 && n != 3 {
        return Err(MecsError::Unsupported(format!(
            "no N-tangle for odd N = {n} > 3"
        )));
    }
    if is_null(spec) {
        // (2e)^N / (N e)^2 as p = 1 - e -> 1
        return Ok(if n == 2 { 1.0 } else { 0.0 });
    }
    let base = spec.norm_base();
    let m2 = one_minus_pow(spec.ln_p(), 2);
    Ok(m2.powi(n as i32) / (base * base))
}

/// `|<psi| sy^{(x)N} |psi*>|^2`. Vanishes identically for odd `N`.
pub fn n_tangle_numeric(psi: &QubitState) -> Result<f64> {
    let n2 = psi.amplitudes().norm_squared();
    if (n2 - 1.0).abs() > crate::qubit::NORM_TOL {
        return Err(MecsError::NotNormalized(n2));
    }
    // <psi| sy^N |psi*> = sum_b conj(psi_{~b}) phase(b) conj(psi_b), where
    // sy^N |b> = phase(b) |~b>
    let acc = recontract(psi, psi.parties());
    debug_assert!(acc.is_finite());
    Ok(acc.norm_sqr())
}

fn recontract(psi: &QubitState, n: usize) -> Complex64 {
    let d = psi.dim();
    let mask = d - 1;
    let i = Complex64::new(0.0, 1.0);
    (0..d)
        .map(|b| {
            let ones = b.count_ones() as i32;
            let phase = i.powi(n as i32 - ones) * (-i).powi(ones);
            psi.amplitude(b ^ mask).conj() * phase * psi.amplitude(b).conj()
        })
        .sum()
}

/// Three-qubit tangle `4 |Det|` from Cayley's hyperdeterminant, used as the
/// numeric counterpart of the `N = 3` closed form.
pub fn three_tangle_numeric(psi: &QubitState) -> Result<f64> {
    if psi.parties() != 3 {
        return Err(MecsError::Unsupported(format!(
            "hyperdeterminant needs 3 qubits, got {}",
            psi.parties()
        )));
    }
    let a = |i: usize| psi.amplitude(i);
    let d1 = a(0) * a(0) * a(7) * a(7)
        + a(1) * a(1) * a(6) * a(6)
        + a(2) * a(2) * a(5) * a(5)
        + a(4) * a(4) * a(3) * a(3);
    let d2 = a(0) * a(7) * a(3) * a(4)
        + a(0) * a(7) * a(5) * a(2)
        + a(0) * a(7) * a(6) * a(1)
        + a(3) * a(4) * a(5) * a(2)
        + a(3) * a(4) * a(6) * a(1)
        + a(5) * a(2) * a(6) * a(1);
    let d3 = a(0) * a(6) * a(5) * a(3) + a(7) * a(1) * a(2) * a(4);
    Ok(4.0 * (d1 - d2 * 2.0 + d3 * 4.0).norm())
}

/// Pure-state concurrence across the `k | N-k` cut, `sqrt(2 (1 - Tr rho_k^2))`,
/// from the brute-force marginal of the first `k` parties.
pub fn split_concurrence_numeric(psi: &QubitState, split: SplitSpec) -> Result<f64> {
    split.check(psi.parties())?;
    let keep: Vec<usize> = (0..split.k()).collect();
    let purity = psi.reduced(&keep)?.purity();
    Ok((2.0 * (1.0 - purity)).max(0.0).sqrt())
}

/// Location of the maximum of `C_12` over `p` at fixed `N` and `theta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaxConcurrence {
    pub n: usize,
    pub theta: f64,
    pub p_star: f64,
    pub c_star: f64,
    /// `true` when `2 p^N cos(theta) + N p^2 - (N - 2)` has no sign change
    /// in `(0, 1)` and the maximum was taken from a scan.
    pub boundary: bool,
}

const BISECT_LO: f64 = 1e-9;
const BISECT_HI: f64 = 1.0 - 1e-9;
const BISECT_TOL: f64 = 1e-12;
const SCAN_POINTS: usize = 10_000;
/// `|f|` below this at a bracket end carries no sign information.
const STATIONARITY_TOL: f64 = 1e-12;

/// Stationarity condition of `C_12` in `p`.
pub fn stationarity(p: f64, n: usize, theta: f64) -> f64 {
    2.0 * p.powi(n as i32) * theta.cos() + n as f64 * p * p - (n as f64 - 2.0)
}

pub fn solve_max_p(n: usize, theta: f64) -> Result<MaxConcurrence> {
    if n < 3 {
        return Err(MecsError::TooFewParties { got: n, min: 3 });
    }
    if !theta.is_finite() {
        return Err(MecsError::NonFinite("theta"));
    }
    let f = |p: f64| stationarity(p, n, theta);
    let c_at =
        |p: f64| -> Result<f64> { pair_concurrence_closed(&MecsSpec::from_overlap(p, theta, n)?) };

    let (mut lo, mut hi) = (BISECT_LO, BISECT_HI);
    let (flo, fhi) = (f(lo), f(hi));
    if flo.signum() != fhi.signum() && flo.abs() > STATIONARITY_TOL && fhi.abs() > STATIONARITY_TOL
    {
        let mut flo = flo;
        while hi - lo > BISECT_TOL {
            let mid = 0.5 * (lo + hi);
            let fm = f(mid);
            if fm == 0.0 {
                lo = mid;
                hi = mid;
                break;
            }
            if fm.signum() == flo.signum() {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        let p_star = 0.5 * (lo + hi);
        return Ok(MaxConcurrence {
            n,
            theta,
            p_star,
            c_star: c_at(p_star)?,
            boundary: false,
        });
    }

    let mut best = (BISECT_LO, f64::NEG_INFINITY);
    for i in 0..SCAN_POINTS {
        let p = BISECT_LO + (BISECT_HI - BISECT_LO) * i as f64 / (SCAN_POINTS - 1) as f64;
        let c = c_at(p)?;
        if c > best.1 {
            best = (p, c);
        }
    }
    Ok(MaxConcurrence {
        n,
        theta,
        p_star: best.0,
        c_star: best.1,
        boundary: true,
    })
}

/// Split concurrence, pair concurrence and N-tangle of
/// `Nrm (|Psi>^N + e^{i theta'} |Phi>^N)` with `<Psi|Phi> = p'` real: the MECS
/// closed forms with `(p, theta)` replaced by `(p', theta')`.
pub fn general_pair_measures(
    spec: &GeneralPairSpec,
    n: usize,
    split: SplitSpec,
) -> Result<MeasureReport> {
    let mecs = MecsSpec::from_overlap(spec.p_prime, spec.theta_prime, n)?;
    MeasureReport::closed_form(&mecs, split)
}

/// One row of the special-state summary for `C_12`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub state: String,
    pub p: String,
    pub n: String,
    pub theta: String,
    pub expected: String,
    pub points: Vec<TablePoint>,
    pub passed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TablePoint {
    pub p: f64,
    pub n: usize,
    pub theta: f64,
    pub expected: f64,
    pub computed: f64,
}

/// Points of the `N -> infinity` row are evaluated here.
pub const LARGE_N: usize = 400;
pub const TABLE_TOL: f64 = 1e-12;

/// Regenerates the special-state concurrence table from the closed forms,
/// with the limits evaluated as documented on [`pair_concurrence_closed`].
pub fn special_state_table() -> Result<Vec<TableRow>> {
    use std::f64::consts::{FRAC_PI_2, PI};
    let eval = |p: f64, theta: f64, n: usize, expected: f64| -> Result<TablePoint> {
        let computed = pair_concurrence_closed(&MecsSpec::from_overlap(p, theta, n)?)?;
        Ok(TablePoint {
            p,
            n,
            theta,
            expected,
            computed,
        })
    };
    let thetas = [0.0, 1.0, FRAC_PI_2, PI];
    let row =
        |state: &str, p: &str, n: &str, theta: &str, expected: &str, points: Vec<TablePoint>| {
            let passed = points
                .iter()
                .all(|pt| (pt.computed - pt.expected).abs() <= TABLE_TOL);
            TableRow {
                state: state.into(),
                p: p.into(),
                n: n.into(),
                theta: theta.into(),
                expected: expected.into(),
                points,
                passed,
            }
        };

    let w: Vec<_> = (3..=10)
        .map(|n| eval(1.0, PI, n, 2.0 / n as f64))
        .collect::<Result<_>>()?;
    let psi_minus = vec![eval(1.0, PI, 2, 1.0)?];
    let phi: Vec<_> = thetas
        .iter()
        .map(|&t| eval(0.0, t, 2, 1.0))
        .collect::<Result<_>>()?;
    let ghz: Vec<_> = (3..=10)
        .flat_map(|n| thetas.iter().map(move |&t| (n, t)))
        .map(|(n, t)| eval(0.0, t, n, 0.0))
        .collect::<Result<_>>()?;
    let vacuum: Vec<_> = (2..=10)
        .flat_map(|n| [0.0, 1.0, FRAC_PI_2, 3.0].into_iter().map(move |t| (n, t)))
        .map(|(n, t)| eval(1.0, t, n, 0.0))
        .collect::<Result<_>>()?;
    let infinite: Vec<_> = [0.1, 0.5, 0.9]
        .into_iter()
        .flat_map(|p| thetas.iter().map(move |&t| (p, t)))
        .map(|(p, t)| eval(p, t, LARGE_N, 0.0))
        .collect::<Result<_>>()?;

    Ok(vec![
        row("|W>_N", "1", ">2", "pi", "2/N", w),
        row("|Psi->", "1", "2", "pi", "1", psi_minus),
        row("|Phi>", "0", "2", "any", "1", phi),
        row("|GHZ>_N", "0", ">2", "any", "0", ghz),
        row("|0>^N", "1", ">=2", "!=pi", "0", vacuum),
        row(
            "|alpha,theta,inf>",
            "0<p<1",
            "inf (400)",
            "any",
            "0",
            infinite,
        ),
    ])
}
