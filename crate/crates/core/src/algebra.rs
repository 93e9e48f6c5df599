//! Exact arithmetic on finite superpositions of multimode coherent states.
//!
//! States are never expanded in a Fock basis. Every inner product reduces to
//! products of the single-mode coherent overlap
//!
//! ```text
//! <a|b> = exp(-|a|^2/2 - |b|^2/2 + conj(a) b)
//! ```
//!
//! which gives `<-alpha|alpha> = exp(-2|alpha|^2)`, the overlap `p` used
//! throughout the crate.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{MecsError, Result};

/// Componentwise tolerance under which two labels are treated as the same
/// coherent state when merging terms.
pub const LABEL_MERGE_TOL: f64 = 1e-12;

/// Complex amplitude labelling a single-mode coherent state `|alpha>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CoherentLabel(Complex64);

impl CoherentLabel {
    pub fn new(value: Complex64) -> Result<Self> {
        if value.re.is_finite() && value.im.is_finite() {
            Ok(Self(value))
        } else {
            Err(MecsError::NonFinite("coherent label"))
        }
    }

    pub fn real(x: f64) -> Result<Self> {
        Self::new(Complex64::new(x, 0.0))
    }

    pub fn value(self) -> Complex64 {
        self.0
    }

    /// Label of `exp(i phi) alpha`. Finite inputs stay finite.
    pub fn rotated(self, phi: f64) -> Self {
        Self(self.0 * Complex64::from_polar(1.0, phi))
    }

    pub fn negated(self) -> Self {
        Self(-self.0)
    }

    /// `p = <-alpha|alpha> = exp(-2|alpha|^2)`; underflows to 0 for
    /// `|alpha|^2` above roughly 355, which is the orthogonal limit.
    pub fn parity_overlap(self) -> f64 {
        (-2.0 * self.0.norm_sqr()).exp()
    }

    fn approx_eq(self, other: Self) -> bool {
        (self.0.re - other.0.re).abs() <= LABEL_MERGE_TOL
            && (self.0.im - other.0.im).abs() <= LABEL_MERGE_TOL
    }
}

impl From<CoherentLabel> for Complex64 {
    fn from(l: CoherentLabel) -> Self {
        l.0
    }
}

/// Coherent-state overlap `<a|b>`.
pub fn overlap(a: CoherentLabel, b: CoherentLabel) -> Complex64 {
    let (a, b) = (a.0, b.0);
    (-0.5 * a.norm_sqr() - 0.5 * b.norm_sqr() + a.conj() * b).exp()
}

/// One product term `coeff * |l_1> (x) ... (x) |l_N>`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coeff: Complex64,
    pub labels: Vec<CoherentLabel>,
}

impl Term {
    pub fn new(coeff: Complex64, labels: Vec<CoherentLabel>) -> Self {
        Self { coeff, labels }
    }

    fn product_overlap(&self, other: &Term) -> Complex64 {
        self.labels
            .iter()
            .zip(&other.labels)
            .map(|(&a, &b)| overlap(a, b))
            .product()
    }

    fn same_labels(&self, other: &Term) -> bool {
        self.labels
            .iter()
            .zip(&other.labels)
            .all(|(&a, &b)| a.approx_eq(b))
    }
}

/// Finite linear combination of N-mode coherent product states.
///
/// Terms are kept exactly as constructed; call [`canonicalize`] to merge
/// repeated label tuples.
///
/// [`canonicalize`]: MultimodeSuperposition::canonicalize
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultimodeSuperposition {
    modes: usize,
    terms: Vec<Term>,
}

impl MultimodeSuperposition {
    pub fn new(modes: usize, terms: Vec<Term>) -> Result<Self> {
        if modes == 0 {
            return Err(MecsError::TooFewParties { got: 0, min: 1 });
        }
        for (index, t) in terms.iter().enumerate() {
            if t.labels.len() != modes {
                return Err(MecsError::LabelCount {
                    index,
                    got: t.labels.len(),
                    expected: modes,
                });
            }
            if !(t.coeff.re.is_finite() && t.coeff.im.is_finite()) {
                return Err(MecsError::NonFinite("term coefficient"));
            }
        }
        if terms.iter().all(|t| t.coeff == Complex64::new(0.0, 0.0)) {
            return Err(MecsError::ZeroNorm);
        }
        Ok(Self { modes, terms })
    }

    /// Single product state with unit coefficient.
    pub fn product(labels: Vec<CoherentLabel>) -> Result<Self> {
        let modes = labels.len();
        Self::new(modes, vec![Term::new(Complex64::new(1.0, 0.0), labels)])
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn norm_sqr(&self) -> f64 {
        inner_product_unchecked(self, self).re.max(0.0)
    }

    pub fn normalized(&self) -> Result<Self> {
        let n2 = self.norm_sqr();
        if !n2.is_finite() || n2 <= 0.0 {
            return Err(MecsError::ZeroNorm);
        }
        Ok(self.scaled(Complex64::new(n2.sqrt().recip(), 0.0)))
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            modes: self.modes,
            terms: self
                .terms
                .iter()
                .map(|t| Term::new(t.coeff * factor, t.labels.clone()))
                .collect(),
        }
    }

    /// `self + factor * other`, without merging.
    pub fn plus_scaled(&self, factor: Complex64, other: &Self) -> Result<Self> {
        check_modes(self, other)?;
        let mut terms = self.terms.clone();
        terms.extend(
            other
                .terms
                .iter()
                .map(|t| Term::new(t.coeff * factor, t.labels.clone())),
        );
        Ok(Self {
            modes: self.modes,
            terms,
        })
    }

    /// Merge terms whose label tuples agree within [`LABEL_MERGE_TOL`] and
    /// drop terms whose merged coefficient is zero. Returns `None` when
    /// every term cancels.
    pub fn canonicalize(&self) -> Option<Self> {
        let mut merged: Vec<Term> = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            match merged.iter_mut().find(|m| m.same_labels(t)) {
                Some(m) => m.coeff += t.coeff,
                None => merged.push(t.clone()),
            }
        }
        merged.retain(|t| t.coeff.norm() > 1e-15);
        if merged.is_empty() {
            None
        } else {
            Some(Self {
                modes: self.modes,
                terms: merged,
            })
        }
    }
}

fn check_modes(x: &MultimodeSuperposition, y: &MultimodeSuperposition) -> Result<()> {
    if x.modes != y.modes {
        Err(MecsError::ModeMismatch {
            left: x.modes,
            right: y.modes,
        })
    } else {
        Ok(())
    }
}

fn inner_product_unchecked(x: &MultimodeSuperposition, y: &MultimodeSuperposition) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for s in &x.terms {
        for t in &y.terms {
            acc += s.coeff.conj() * t.coeff * s.product_overlap(t);
        }
    }
    acc
}

/// `<x|y>`, conjugate-linear in `x` and linear in `y`.
pub fn inner_product(x: &MultimodeSuperposition, y: &MultimodeSuperposition) -> Result<Complex64> {
    check_modes(x, y)?;
    Ok(inner_product_unchecked(x, y))
}

/// Action of `a_1 a_2 ... a_N`: each term's coefficient picks up the product
/// of its labels.
pub fn apply_annihilation_all(x: &MultimodeSuperposition) -> MultimodeSuperposition {
    MultimodeSuperposition {
        modes: x.modes,
        terms: x
            .terms
            .iter()
            .map(|t| {
                let eig: Complex64 = t.labels.iter().map(|l| l.0).product();
                Term::new(t.coeff * eig, t.labels.clone())
            })
            .collect(),
    }
}

/// Orthonormal basis `{|0>, |1>}` spanned by `|alpha>` and `|-alpha>`:
///
/// ```text
/// |0> = |alpha>,  |1> = (|-alpha> - p|0>) / M,  M = sqrt(1 - p^2)
/// ```
///
/// so that `|-alpha> = M|1> + p|0>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrthoBasisPair {
    p: f64,
    m: f64,
}

impl OrthoBasisPair {
    pub fn p(&self) -> f64 {
        self.p
    }

    /// `M = sqrt(1 - p^2)`.
    pub fn m(&self) -> f64 {
        self.m
    }

    /// Coordinates of `|-alpha>` in the `{|0>, |1>}` basis.
    pub fn minus_alpha(&self) -> [f64; 2] {
        [self.p, self.m]
    }

    /// Real amplitude `alpha > 0` with `exp(-2 alpha^2) = p`. `None` at
    /// `p = 0`, where the amplitude is infinite.
    pub fn alpha(&self) -> Option<CoherentLabel> {
        if self.p > 0.0 {
            CoherentLabel::real((-self.p.ln() / 2.0).sqrt()).ok()
        } else {
            None
        }
    }

    /// The two basis vectors as single-mode coherent superpositions.
    pub fn basis_states(&self) -> Option<(MultimodeSuperposition, MultimodeSuperposition)> {
        let a = self.alpha()?;
        let zero = MultimodeSuperposition::product(vec![a]).ok()?;
        let minus = MultimodeSuperposition::product(vec![a.negated()]).ok()?;
        let one = minus
            .plus_scaled(Complex64::new(-self.p, 0.0), &zero)
            .ok()?
            .scaled(Complex64::new(self.m.recip(), 0.0));
        Some((zero, one))
    }
}

pub fn ortho_basis(p: f64) -> Result<OrthoBasisPair> {
    if !p.is_finite() {
        return Err(MecsError::NonFinite("overlap p"));
    }
    if p < 0.0 {
        return Err(MecsError::OverlapOutOfRange(p));
    }
    if p >= 1.0 {
        return Err(MecsError::DegenerateBasis(p));
    }
    // (1 - p)(1 + p) keeps M accurate as p -> 1
    let m = ((1.0 - p) * (1.0 + p)).sqrt();
    Ok(OrthoBasisPair { p, m })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, FRAC_PI_2, FRAC_PI_4};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn label(re: f64, im: f64) -> CoherentLabel {
        CoherentLabel::new(c(re, im)).unwrap()
    }

    #[test]
    fn overlap_identity() {
        let a = label(0.3, -1.2);
        assert!((overlap(a, a) - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn overlap_of_opposite_labels_is_p() {
        let a = label(0.5f64.sqrt(), 0.0);
        let o = overlap(a.negated(), a);
        assert!((o.re - E.recip()).abs() < 1e-15);
        assert!(o.im.abs() < 1e-15);
        assert!((a.parity_overlap() - E.recip()).abs() < 1e-15);
    }

    #[test]
    fn overlap_of_counter_rotated_labels() {
        let a = label(1.0, 0.0);
        let o = overlap(a.rotated(FRAC_PI_4), a.rotated(-FRAC_PI_4));
        // exp(-1 - i)
        assert!((o.norm() - E.recip()).abs() < 1e-15);
        assert!((o.arg() + 1.0).abs() < 1e-14);
    }

    #[test]
    fn non_finite_label_rejected() {
        assert!(CoherentLabel::new(c(f64::NAN, 0.0)).is_err());
        assert!(CoherentLabel::new(c(0.0, f64::INFINITY)).is_err());
    }

    #[test]
    fn two_mode_cat_norm() {
        let a = label(0.5f64.sqrt(), 0.0);
        let s = MultimodeSuperposition::new(
            2,
            vec![
                Term::new(c(1.0, 0.0), vec![a, a]),
                Term::new(c(1.0, 0.0), vec![a.negated(), a.negated()]),
            ],
        )
        .unwrap();
        let n = inner_product(&s, &s).unwrap();
        assert!((n.re - (2.0 + 2.0 * (-2.0f64).exp())).abs() < 1e-14);
        assert!(n.im.abs() < 1e-15);
    }

    #[test]
    fn even_odd_cat_norms() {
        let a = label(1.0, 0.0);
        for sign in [1.0, -1.0] {
            let s = MultimodeSuperposition::new(
                2,
                vec![
                    Term::new(c(1.0, 0.0), vec![a.rotated(FRAC_PI_2); 2]),
                    Term::new(c(sign, 0.0), vec![a.rotated(-FRAC_PI_2); 2]),
                ],
            )
            .unwrap();
            let n = inner_product(&s, &s).unwrap().re;
            assert!((n - (2.0 + sign * 2.0 * (-4.0f64).exp())).abs() < 1e-14);
        }
    }

    #[test]
    fn mode_mismatch_is_an_error() {
        let x = MultimodeSuperposition::product(vec![label(0.1, 0.0)]).unwrap();
        let y = MultimodeSuperposition::product(vec![label(0.1, 0.0); 2]).unwrap();
        assert_eq!(
            inner_product(&x, &y),
            Err(MecsError::ModeMismatch { left: 1, right: 2 })
        );
    }

    #[test]
    fn wrong_label_count_rejected() {
        let err =
            MultimodeSuperposition::new(2, vec![Term::new(c(1.0, 0.0), vec![label(0.0, 0.0)])]);
        assert!(matches!(err, Err(MecsError::LabelCount { .. })));
    }

    #[test]
    fn annihilation_on_product_and_vacuum() {
        let s = MultimodeSuperposition::product(vec![label(0.5, 0.1), label(-0.2, 0.7)]).unwrap();
        let out = apply_annihilation_all(&s);
        let expect = c(0.5, 0.1) * c(-0.2, 0.7);
        assert!((out.terms()[0].coeff - expect).norm() < 1e-15);
        assert_eq!(out.terms()[0].labels, s.terms()[0].labels);

        let vac = MultimodeSuperposition::product(vec![label(0.0, 0.0); 3]).unwrap();
        assert_eq!(apply_annihilation_all(&vac).terms()[0].coeff, c(0.0, 0.0));
    }

    #[test]
    fn canonicalize_merges_and_cancels() {
        let a = label(0.4, 0.0);
        let s = MultimodeSuperposition::new(
            1,
            vec![
                Term::new(c(1.0, 0.0), vec![a]),
                Term::new(c(2.0, 0.0), vec![a.negated()]),
                Term::new(c(0.5, 0.0), vec![label(0.4 + 1e-14, 0.0)]),
            ],
        )
        .unwrap();
        let m = s.canonicalize().unwrap();
        assert_eq!(m.terms().len(), 2);
        assert!((m.terms()[0].coeff - c(1.5, 0.0)).norm() < 1e-15);

        let z = MultimodeSuperposition::new(
            1,
            vec![
                Term::new(c(1.0, 0.0), vec![a]),
                Term::new(c(-1.0, 0.0), vec![a]),
            ],
        )
        .unwrap();
        assert!(z.canonicalize().is_none());
    }

    #[test]
    fn ortho_basis_orthogonal_limit() {
        let b = ortho_basis(0.0).unwrap();
        assert_eq!(b.m(), 1.0);
        assert_eq!(b.minus_alpha(), [0.0, 1.0]);
        assert!(b.basis_states().is_none());
    }

    #[test]
    fn ortho_basis_rejects_out_of_domain() {
        assert_eq!(ortho_basis(1.0), Err(MecsError::DegenerateBasis(1.0)));
        assert_eq!(ortho_basis(1.5), Err(MecsError::DegenerateBasis(1.5)));
        assert_eq!(ortho_basis(-0.1), Err(MecsError::OverlapOutOfRange(-0.1)));
        assert!(ortho_basis(f64::NAN).is_err());
    }

    fn gram_residual(p: f64) -> f64 {
        let (zero, one) = ortho_basis(p).unwrap().basis_states().unwrap();
        let g00 = inner_product(&zero, &zero).unwrap();
        let g01 = inner_product(&zero, &one).unwrap();
        let g11 = inner_product(&one, &one).unwrap();
        (g00 - c(1.0, 0.0))
            .norm()
            .max(g01.norm())
            .max((g11 - c(1.0, 0.0)).norm())
    }

    #[test]
    fn ortho_basis_at_inverse_e() {
        let p = E.recip();
        let b = ortho_basis(p).unwrap();
        assert!((b.m() - 0.929_873_495_032_193_7).abs() < 1e-15);
        assert!((b.m() * b.m() + p * p - 1.0).abs() < 1e-12);
        assert!(gram_residual(p) < 1e-12);
    }

    #[test]
    fn ortho_basis_near_degenerate() {
        let b = ortho_basis(0.999_999).unwrap();
        assert!((b.m() - 1.414_213e-3).abs() < 1e-8);
        assert!(gram_residual(0.999_999) < 1e-9);
    }
}
