//! Generation of the MECS by entanglement swapping from ion electronic
//! states to phonon modes.
//!
//! Each ion `k` is coupled to its own mode by `g a_k^dagger a_k sigma_kz`.
//! In the interaction picture the evolution is exact: the coherent label of
//! mode `k` rotates by `e^{+i tau}` on the `|0>_k` branch and by `e^{-i tau}`
//! on the `|1>_k` branch, with `tau = g t`. A projective measurement of the
//! ions onto the generalized Bell basis
//! `(|i_1 ... i_N> +- |~i_1 ... ~i_N>)/sqrt(2)` leaves the modes in a
//! two-branch coherent superposition, which at `tau = pi/2` and the all-zeros
//! pattern is the even (`+`) or odd (`-`) MECS with amplitude `i alpha`.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{inner_product, CoherentLabel, MultimodeSuperposition, Term};
use crate::error::{MecsError, Result};
use crate::qubit::{bit, hadamard, local_operator, QubitState, MAX_DENSE_PARTIES};
use crate::states::{build_mecs, MecsSpec};

/// Outcomes whose projected norm falls below this are reported as having
/// zero probability.
pub const ZERO_PROBABILITY_TOL: f64 = 1e-14;

/// Distance from `pi/2` within which `tau` counts as the quarter period.
pub const QUARTER_PERIOD_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolParams {
    pub alpha: CoherentLabel,
    /// Normalized interaction time `g t`.
    pub tau: f64,
    pub parties: usize,
}

impl ProtocolParams {
    pub fn new(alpha: CoherentLabel, tau: f64, parties: usize) -> Result<Self> {
        if !tau.is_finite() {
            return Err(MecsError::NonFinite("tau"));
        }
        if parties == 0 {
            return Err(MecsError::TooFewParties { got: 0, min: 1 });
        }
        if parties > MAX_DENSE_PARTIES {
            return Err(MecsError::TooManyParties(parties));
        }
        Ok(Self {
            alpha,
            tau,
            parties,
        })
    }

    /// Mode label on the electronic branch `bit`.
    fn label(&self, bit: usize) -> CoherentLabel {
        let sign = if bit == 0 { 1.0 } else { -1.0 };
        self.alpha.rotated(sign * self.tau)
    }
}

/// Joint ion-phonon state: electronic basis index (party 1 most significant)
/// paired with the unnormalized vibrational branch it carries.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridState {
    qubits: usize,
    branches: Vec<(usize, MultimodeSuperposition)>,
}

impl HybridState {
    pub fn new(qubits: usize, branches: Vec<(usize, MultimodeSuperposition)>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for (idx, _) in &branches {
            if *idx >= 1 << qubits || !seen.insert(*idx) {
                return Err(MecsError::InvalidOutcome(format!(
                    "electronic index {idx} repeated or out of range"
                )));
            }
        }
        if let Some((_, first)) = branches.first() {
            if branches.iter().any(|(_, b)| b.modes() != first.modes()) {
                return Err(MecsError::ModeMismatch {
                    left: first.modes(),
                    right: branches.iter().map(|(_, b)| b.modes()).max().unwrap_or(0),
                });
            }
        }
        Ok(Self { qubits, branches })
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn branches(&self) -> &[(usize, MultimodeSuperposition)] {
        &self.branches
    }

    pub fn branch(&self, index: usize) -> Option<&MultimodeSuperposition> {
        self.branches
            .iter()
            .find(|(i, _)| *i == index)
            .map(|(_, b)| b)
    }

    /// Electronic basis states are orthonormal, so the squared norm is the
    /// sum of the branch norms.
    pub fn norm_sqr(&self) -> f64 {
        self.branches.iter().map(|(_, b)| b.norm_sqr()).sum()
    }

    /// `self (x) other`, electronic and vibrational factors ordered
    /// `self` first.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let mut branches = Vec::with_capacity(self.branches.len() * other.branches.len());
        for (i, a) in &self.branches {
            for (j, b) in &other.branches {
                let mut terms = Vec::with_capacity(a.terms().len() * b.terms().len());
                for s in a.terms() {
                    for t in b.terms() {
                        let mut labels = s.labels.clone();
                        labels.extend_from_slice(&t.labels);
                        terms.push(Term::new(s.coeff * t.coeff, labels));
                    }
                }
                let sup = MultimodeSuperposition::new(a.modes() + b.modes(), terms)?;
                branches.push(((i << other.qubits) | j, sup));
            }
        }
        Self::new(self.qubits + other.qubits, branches)
    }
}

/// One ion and its mode after time `tau`:
/// `2^{-1/2} (|alpha e^{i tau}>|0> + |alpha e^{-i tau}>|1>)`.
pub fn evolve_single(params: &ProtocolParams) -> Result<HybridState> {
    let w = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let branch =
        |b: usize| MultimodeSuperposition::new(1, vec![Term::new(w, vec![params.label(b)])]);
    HybridState::new(1, vec![(0, branch(0)?), (1, branch(1)?)])
}

/// `N` independently evolved ion-mode pairs. Branch `b` carries the labels
/// `alpha e^{i tau (-1)^{b_k}}` with weight `2^{-N/2}`.
pub fn product_state(params: &ProtocolParams) -> Result<HybridState> {
    let n = params.parties;
    if n < 2 {
        return Err(MecsError::TooFewParties { got: n, min: 2 });
    }
    let w = Complex64::new(2f64.powf(-(n as f64) / 2.0), 0.0);
    let branches = (0..1usize << n)
        .map(|b| {
            let labels = (0..n).map(|k| params.label(bit(b, k, n))).collect();
            Ok((
                b,
                MultimodeSuperposition::new(n, vec![Term::new(w, labels)])?,
            ))
        })
        .collect::<Result<_>>()?;
    HybridState::new(n, branches)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    /// Relative phase of the MECS the `+`/`-` outcome prepares.
    pub fn theta(self) -> f64 {
        match self {
            Sign::Plus => 0.0,
            Sign::Minus => std::f64::consts::PI,
        }
    }
}

impl FromStr for Sign {
    type Err = MecsError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "+" | "plus" => Ok(Sign::Plus),
            "-" | "minus" => Ok(Sign::Minus),
            _ => Err(MecsError::InvalidOutcome(format!(
                "sign must be + or -, got {s:?}"
            ))),
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

/// Element of the generalized Bell basis. The first bit of `pattern` is
/// always 0: a pattern and its complement label the same pair of states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GeneralizedBellOutcome {
    parties: usize,
    pattern: usize,
    sign: Sign,
}

impl GeneralizedBellOutcome {
    pub fn new(parties: usize, pattern: usize, sign: Sign) -> Result<Self> {
        if !(2..=MAX_DENSE_PARTIES).contains(&parties) {
            return Err(MecsError::InvalidOutcome(format!(
                "unsupported party count {parties}"
            )));
        }
        if pattern >= 1 << parties {
            return Err(MecsError::InvalidOutcome(format!(
                "pattern {pattern:b} has more than {parties} bits"
            )));
        }
        if bit(pattern, 0, parties) != 0 {
            return Err(MecsError::InvalidOutcome(
                "first bit of the pattern must be 0 (use the complement)".into(),
            ));
        }
        Ok(Self {
            parties,
            pattern,
            sign,
        })
    }

    /// Parses a bit string such as `"0110"`, party 1 first.
    pub fn parse(pattern: &str, sign: Sign) -> Result<Self> {
        if pattern.is_empty() || !pattern.chars().all(|c| c == '0' || c == '1') {
            return Err(MecsError::InvalidOutcome(format!(
                "bad pattern {pattern:?}"
            )));
        }
        if pattern.len() > MAX_DENSE_PARTIES {
            return Err(MecsError::TooManyParties(pattern.len()));
        }
        let bits = usize::from_str_radix(pattern, 2)
            .map_err(|e| MecsError::InvalidOutcome(e.to_string()))?;
        Self::new(pattern.len(), bits, sign)
    }

    /// All `2^N` outcomes: `2^{N-1}` canonical patterns times two signs.
    pub fn all(parties: usize) -> Result<Vec<Self>> {
        let mut out = Vec::with_capacity(1 << parties);
        for pattern in 0..(1usize << (parties - 1)) {
            for sign in [Sign::Plus, Sign::Minus] {
                out.push(Self::new(parties, pattern, sign)?);
            }
        }
        Ok(out)
    }

    pub fn parties(&self) -> usize {
        self.parties
    }

    pub fn pattern(&self) -> usize {
        self.pattern
    }

    pub fn complement(&self) -> usize {
        self.pattern ^ ((1 << self.parties) - 1)
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    pub fn pattern_string(&self) -> String {
        format!("{:0width$b}", self.pattern, width = self.parties)
    }

    /// `(|i> +- |~i>)/sqrt(2)` as a qubit vector.
    pub fn electronic_state(&self) -> Result<QubitState> {
        let mut v = vec![Complex64::new(0.0, 0.0); 1 << self.parties];
        v[self.pattern] = Complex64::new(FRAC_1_SQRT_2, 0.0);
        v[self.complement()] = Complex64::new(self.sign.value() * FRAC_1_SQRT_2, 0.0);
        QubitState::new(self.parties, v)
    }
}

/// Probability of an outcome and the normalized vibrational state it leaves.
#[derive(Debug, Clone, PartialEq)]
pub struct BellResult {
    pub probability: f64,
    /// `None` when the outcome has zero probability.
    pub collapsed: Option<MultimodeSuperposition>,
}

/// Projects the electronic register of `state` onto `outcome`.
pub fn bell_measure(state: &HybridState, outcome: &GeneralizedBellOutcome) -> Result<BellResult> {
    let projected = project(state, outcome)?;
    let Some(v) = projected.and_then(|v| v.canonicalize()) else {
        return Ok(BellResult {
            probability: 0.0,
            collapsed: None,
        });
    };
    let probability = v.norm_sqr();
    if probability < ZERO_PROBABILITY_TOL {
        return Ok(BellResult {
            probability,
            collapsed: None,
        });
    }
    Ok(BellResult {
        probability,
        collapsed: Some(v.normalized()?),
    })
}

/// Unnormalized vibrational component `<e|state>`.
fn project(
    state: &HybridState,
    outcome: &GeneralizedBellOutcome,
) -> Result<Option<MultimodeSuperposition>> {
    if state.qubits() != outcome.parties() {
        return Err(MecsError::ModeMismatch {
            left: state.qubits(),
            right: outcome.parties(),
        });
    }
    let n2 = state.norm_sqr();
    if (n2 - 1.0).abs() > 1e-12 {
        return Err(MecsError::NotNormalized(n2));
    }
    let w = FRAC_1_SQRT_2;
    let mut acc: Option<MultimodeSuperposition> = None;
    for (idx, branch) in state.branches() {
        let amp = if *idx == outcome.pattern() {
            w
        } else if *idx == outcome.complement() {
            outcome.sign().value() * w
        } else {
            continue;
        };
        let scaled = branch.scaled(Complex64::new(amp, 0.0));
        acc = Some(match acc {
            None => scaled,
            Some(a) => a.plus_scaled(Complex64::new(1.0, 0.0), &scaled)?,
        });
    }
    Ok(acc)
}

/// Draws an outcome with the Born probabilities of `state`.
pub fn sample_outcome<R: Rng + ?Sized>(
    state: &HybridState,
    rng: &mut R,
) -> Result<(GeneralizedBellOutcome, BellResult)> {
    let results = GeneralizedBellOutcome::all(state.qubits())?
        .into_iter()
        .map(|o| bell_measure(state, &o).map(|r| (o, r)))
        .collect::<Result<Vec<_>>>()?;
    let total: f64 = results.iter().map(|(_, r)| r.probability).sum();
    let mut u = rng.gen::<f64>() * total;
    for (o, r) in &results {
        if u < r.probability && r.collapsed.is_some() {
            return Ok((*o, r.clone()));
        }
        u -= r.probability;
    }
    // rounding can leave u just past the end
    results
        .into_iter()
        .rev()
        .find(|(_, r)| r.collapsed.is_some())
        .ok_or_else(|| MecsError::InvalidOutcome("no outcome has nonzero probability".into()))
}

/// Normalized two-branch state
/// `|alpha e^{i tau_1} ...> +- |alpha e^{-i tau_1} ...>`, `tau_k = tau (-1)^{i_k}`,
/// that the outcome is expected to leave behind.
pub fn analytic_collapse(
    params: &ProtocolParams,
    outcome: &GeneralizedBellOutcome,
) -> Result<MultimodeSuperposition> {
    let n = params.parties;
    if outcome.parties() != n {
        return Err(MecsError::ModeMismatch {
            left: n,
            right: outcome.parties(),
        });
    }
    let labels = |sign: f64| -> Vec<CoherentLabel> {
        (0..n)
            .map(|k| {
                let tk = if bit(outcome.pattern(), k, n) == 0 {
                    params.tau
                } else {
                    -params.tau
                };
                params.alpha.rotated(sign * tk)
            })
            .collect()
    };
    MultimodeSuperposition::new(
        n,
        vec![
            Term::new(Complex64::new(1.0, 0.0), labels(1.0)),
            Term::new(Complex64::new(outcome.sign().value(), 0.0), labels(-1.0)),
        ],
    )?
    .normalized()
}

/// `|<a|b>|^2` for normalized superpositions.
pub fn fidelity(a: &MultimodeSuperposition, b: &MultimodeSuperposition) -> Result<f64> {
    Ok(inner_product(a, b)?.norm_sqr())
}

/// Full pipeline at `tau = pi/2` with the all-zeros pattern: fidelity of the
/// collapsed modes with the MECS of amplitude `i alpha` and phase 0 (`+`) or
/// pi (`-`).
pub fn swap_end_to_end(params: &ProtocolParams, outcome: &GeneralizedBellOutcome) -> Result<f64> {
    if (params.tau - FRAC_PI_2).abs() > QUARTER_PERIOD_TOL {
        return Err(MecsError::Unsupported(format!(
            "end-to-end check needs tau = pi/2, got {}",
            params.tau
        )));
    }
    if outcome.pattern() != 0 {
        return Err(MecsError::Unsupported(
            "end-to-end check needs the all-zeros pattern".into(),
        ));
    }
    let target = mecs_target(params, outcome.sign())?;
    let result = bell_measure(&product_state(params)?, outcome)?;
    let collapsed = result
        .collapsed
        .ok_or_else(|| MecsError::InvalidOutcome("zero-probability outcome".into()))?;
    fidelity(&target, &collapsed)
}

/// The MECS an all-zeros outcome prepares at `tau = pi/2`.
pub fn mecs_target(params: &ProtocolParams, sign: Sign) -> Result<MultimodeSuperposition> {
    let spec = MecsSpec::from_alpha(
        params.alpha.rotated(FRAC_PI_2),
        sign.theta(),
        params.parties,
    )?;
    build_mecs(&spec)
}

/// Permutation matrix of `CN_{control, target}` on `n` qubits.
pub fn cnot(n: usize, control: usize, target: usize) -> DMatrix<Complex64> {
    let d = 1usize << n;
    let tmask = 1usize << (n - 1 - target);
    DMatrix::from_fn(d, d, |r, c| {
        let image = if bit(c, control, n) == 1 {
            c ^ tmask
        } else {
            c
        };
        if r == image {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// `G = H_1 CN_{1N} ... CN_{13} CN_{12}`: maps each generalized Bell state to
/// a computational basis state.
pub fn gate_g(n: usize) -> Result<DMatrix<Complex64>> {
    if n < 2 {
        return Err(MecsError::TooFewParties { got: n, min: 2 });
    }
    if n > MAX_DENSE_PARTIES {
        return Err(MecsError::TooManyParties(n));
    }
    let d = 1usize << n;
    let mut g = DMatrix::<Complex64>::identity(d, d);
    for target in 1..n {
        g = cnot(n, 0, target) * g;
    }
    Ok(local_operator(n, 0, &hadamard()) * g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn params(alpha: f64, tau: f64, n: usize) -> ProtocolParams {
        ProtocolParams::new(CoherentLabel::real(alpha).unwrap(), tau, n).unwrap()
    }

    #[test]
    fn no_evolution_is_unentangled() {
        let s = evolve_single(&params(0.8, 0.0, 1)).unwrap();
        assert_eq!(
            s.branch(0).unwrap().terms()[0].labels,
            s.branch(1).unwrap().terms()[0].labels
        );
        assert!((s.norm_sqr() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn quarter_period_labels() {
        let s = evolve_single(&params(1.3, FRAC_PI_2, 1)).unwrap();
        let l0 = s.branch(0).unwrap().terms()[0].labels[0].value();
        let l1 = s.branch(1).unwrap().terms()[0].labels[0].value();
        assert!((l0 - Complex64::new(0.0, 1.3)).norm() < 1e-15);
        assert!((l1 - Complex64::new(0.0, -1.3)).norm() < 1e-15);
    }

    #[test]
    fn product_state_equals_tensor_power() {
        let p = params(0.7, 0.4, 3);
        let one = evolve_single(&p).unwrap();
        let folded = one.tensor(&one).unwrap().tensor(&one).unwrap();
        let direct = product_state(&p).unwrap();
        for (idx, b) in direct.branches() {
            let f = folded.branch(*idx).unwrap();
            assert_eq!(f.terms()[0].labels, b.terms()[0].labels);
            assert!((f.terms()[0].coeff - b.terms()[0].coeff).norm() < 1e-15);
        }
    }

    #[test]
    fn product_state_without_evolution_is_factorized() {
        let s = product_state(&params(0.9, 0.0, 3)).unwrap();
        let a = CoherentLabel::real(0.9).unwrap();
        for (_, b) in s.branches() {
            assert_eq!(b.terms()[0].labels, vec![a; 3]);
        }
    }

    #[test]
    fn outcome_parsing_and_canonical_form() {
        let o = GeneralizedBellOutcome::parse("010", Sign::Minus).unwrap();
        assert_eq!(o.pattern(), 0b010);
        assert_eq!(o.complement(), 0b101);
        assert_eq!(o.pattern_string(), "010");
        assert!(GeneralizedBellOutcome::parse("100", Sign::Plus).is_err());
        assert!(GeneralizedBellOutcome::parse("0a1", Sign::Plus).is_err());
        assert_eq!(GeneralizedBellOutcome::all(4).unwrap().len(), 16);
        assert_eq!("-".parse::<Sign>().unwrap(), Sign::Minus);
        assert!("x".parse::<Sign>().is_err());
    }

    #[test]
    fn vacuum_odd_outcome_has_zero_probability() {
        let p = params(0.0, 0.7, 2);
        let o = GeneralizedBellOutcome::parse("00", Sign::Minus).unwrap();
        let r = bell_measure(&product_state(&p).unwrap(), &o).unwrap();
        assert_eq!(r.probability, 0.0);
        assert!(r.collapsed.is_none());
        assert!(swap_end_to_end(&params(0.0, FRAC_PI_2, 2), &o).is_err());
    }

    #[test]
    fn vacuum_even_outcome_is_vacuum() {
        let p = params(0.0, FRAC_PI_2, 3);
        let o = GeneralizedBellOutcome::parse("000", Sign::Plus).unwrap();
        let f = swap_end_to_end(&p, &o).unwrap();
        assert!((f - 1.0).abs() < 1e-12);
    }

    #[test]
    fn end_to_end_requires_quarter_period() {
        let o = GeneralizedBellOutcome::parse("000", Sign::Plus).unwrap();
        assert!(swap_end_to_end(&params(1.0, 1.0, 3), &o).is_err());
        let o = GeneralizedBellOutcome::parse("001", Sign::Plus).unwrap();
        assert!(swap_end_to_end(&params(1.0, FRAC_PI_2, 3), &o).is_err());
    }

    #[test]
    fn collapse_matches_analytic_form() {
        let p = params(0.8, 0.9, 3);
        let state = product_state(&p).unwrap();
        for o in GeneralizedBellOutcome::all(3).unwrap() {
            let r = bell_measure(&state, &o).unwrap();
            let want = analytic_collapse(&p, &o).unwrap();
            let f = fidelity(&want, r.collapsed.as_ref().unwrap()).unwrap();
            assert!((f - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sampling_is_seeded() {
        use rand::SeedableRng;
        let state = product_state(&params(0.6, 1.0, 3)).unwrap();
        let mut a = rand::rngs::StdRng::seed_from_u64(7);
        let mut b = rand::rngs::StdRng::seed_from_u64(7);
        for _ in 0..5 {
            let (oa, _) = sample_outcome(&state, &mut a).unwrap();
            let (ob, _) = sample_outcome(&state, &mut b).unwrap();
            assert_eq!(oa, ob);
        }
    }

    #[test]
    fn sampling_frequencies_follow_probabilities() {
        use rand::SeedableRng;
        let state = product_state(&params(0.5, 0.6, 2)).unwrap();
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        let o = GeneralizedBellOutcome::parse("00", Sign::Minus).unwrap();
        let prob = bell_measure(&state, &o).unwrap().probability;
        let draws = 20_000;
        let hits = (0..draws)
            .filter(|_| sample_outcome(&state, &mut rng).unwrap().0 == o)
            .count();
        let freq = hits as f64 / draws as f64;
        let sigma = (prob * (1.0 - prob) / draws as f64).sqrt();
        assert!((freq - prob).abs() < 5.0 * sigma, "freq {freq} vs {prob}");
    }

    #[test]
    fn gate_g_two_qubits_maps_bell_states() {
        let g = gate_g(2).unwrap();
        let mut images = Vec::new();
        for o in GeneralizedBellOutcome::all(2).unwrap() {
            let out = o.electronic_state().unwrap().apply(&g).unwrap();
            let hits: Vec<usize> = (0..4)
                .filter(|&i| out.amplitude(i).norm() > 1e-12)
                .collect();
            assert_eq!(hits.len(), 1);
            assert!((out.amplitude(hits[0]).norm() - 1.0).abs() < 1e-12);
            images.push(hits[0]);
        }
        images.sort();
        assert_eq!(images, vec![0, 1, 2, 3]);
    }

    #[test]
    fn gate_g_is_unitary() {
        for n in 2..=4 {
            let g = gate_g(n).unwrap();
            let d = 1 << n;
            let err = (g.adjoint() * &g - DMatrix::<Complex64>::identity(d, d)).camax();
            assert!(err < 1e-12);
        }
        assert!(gate_g(1).is_err());
    }

    #[test]
    fn minus_sign_theta_is_pi() {
        assert_eq!(Sign::Minus.theta(), PI);
    }
}
