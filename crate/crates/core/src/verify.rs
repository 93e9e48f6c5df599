//! Self-check suites comparing closed forms with their numeric counterparts.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::algebra::CoherentLabel;
use crate::error::{MecsError, Result};
use crate::fock::{databus_infidelity, verify_cnot_identity, CnotParams};
use crate::measures::{
    n_tangle_closed, n_tangle_numeric, pair_concurrence_closed, reduced_pair_density,
    special_state_table, three_tangle, three_tangle_composed, three_tangle_numeric,
    wootters_concurrence, TABLE_TOL,
};
use crate::protocol::{
    bell_measure, gate_g, product_state, swap_end_to_end, GeneralizedBellOutcome, ProtocolParams,
    Sign,
};
use crate::qubit::QubitState;
use crate::states::{embed_as_qubits, MecsSpec};

pub const ORACLE_TOL: f64 = 1e-9;
pub const LAMBDA_TOL: f64 = 1e-10;
pub const NULLITY_TOL: f64 = 1e-12;
pub const COMPOSITION_TOL: f64 = 1e-12;
pub const COMPLETENESS_TOL: f64 = 1e-10;
pub const DENOMINATOR_REL_TOL: f64 = 1e-12;
pub const FIDELITY_TOL: f64 = 1e-10;
pub const CNOT_TOL: f64 = 1e-6;
pub const DATABUS_TOL: f64 = 1e-6;

pub const CNOT_CUTOFFS: [usize; 3] = [32, 48, 64];
pub const SEED: u64 = 0x6d65_6373;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Wootters,
    Tangle,
    Protocol,
    Cnot,
    Table1,
    All,
}

impl Suite {
    pub const EACH: [Suite; 5] = [
        Suite::Wootters,
        Suite::Tangle,
        Suite::Protocol,
        Suite::Cnot,
        Suite::Table1,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Wootters => "wootters",
            Suite::Tangle => "tangle",
            Suite::Protocol => "protocol",
            Suite::Cnot => "cnot",
            Suite::Table1 => "table1",
            Suite::All => "all",
        }
    }
}

impl FromStr for Suite {
    type Err = MecsError;

    fn from_str(s: &str) -> Result<Self> {
        Suite::EACH
            .into_iter()
            .chain([Suite::All])
            .find(|x| x.name() == s)
            .ok_or_else(|| MecsError::Unsupported(format!("unknown suite {s:?}")))
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// Worst deviation found; what it measures depends on the check.
    pub value: f64,
    pub tolerance: f64,
    pub points: usize,
    pub passed: bool,
}

impl Check {
    /// Passes when `value < tolerance`.
    fn below(name: &str, value: f64, tolerance: f64, points: usize) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance,
            points,
            passed: value < tolerance,
        }
    }

    fn flag(name: &str, ok: bool, points: usize) -> Self {
        Self {
            name: name.into(),
            value: if ok { 0.0 } else { 1.0 },
            tolerance: 0.5,
            points,
            passed: ok,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl SuiteReport {
    fn new(suite: Suite, checks: Vec<Check>) -> Self {
        let passed = checks.iter().all(|c| c.passed);
        Self {
            suite,
            checks,
            passed,
        }
    }
}

/// `p in {0, 0.05, ..., 0.95}`.
pub fn standard_ps() -> Vec<f64> {
    (0..20).map(|i| i as f64 / 20.0).collect()
}

/// `theta in {0, pi/6, ..., 2 pi}`.
pub fn standard_thetas() -> Vec<f64> {
    (0..=12).map(|j| PI * j as f64 / 6.0).collect()
}

fn grid(ns: &[usize]) -> impl Iterator<Item = (f64, f64, usize)> + '_ {
    ns.iter().flat_map(|&n| {
        standard_ps()
            .into_iter()
            .flat_map(move |p| standard_thetas().into_iter().map(move |t| (p, t, n)))
    })
}

pub fn run(suite: Suite) -> Result<Vec<SuiteReport>> {
    match suite {
        Suite::All => Suite::EACH.into_iter().map(run_one).collect(),
        s => Ok(vec![run_one(s)?]),
    }
}

fn run_one(suite: Suite) -> Result<SuiteReport> {
    let checks = match suite {
        Suite::Wootters => wootters_checks()?,
        Suite::Tangle => tangle_checks()?,
        Suite::Protocol => protocol_checks()?,
        Suite::Cnot => cnot_checks()?,
        Suite::Table1 => table_checks()?,
        Suite::All => unreachable!("expanded by run"),
    };
    Ok(SuiteReport::new(suite, checks))
}

pub fn wootters_checks() -> Result<Vec<Check>> {
    let (mut delta, mut lambda, mut count) = (0.0f64, 0.0f64, 0);
    for (p, t, n) in grid(&[3, 4, 5, 6, 7, 8]) {
        let spec = MecsSpec::from_overlap(p, t, n)?;
        let d = wootters_concurrence(&reduced_pair_density(&spec)?)?;
        delta = delta.max((d.concurrence - pair_concurrence_closed(&spec)?).abs());
        lambda = lambda.max(d.lambdas[2]).max(d.lambdas[3]);
        count += 1;
    }
    Ok(vec![
        Check::below("wootters_vs_closed_form", delta, ORACLE_TOL, count),
        Check::below("lambda3_lambda4_vanish", lambda, LAMBDA_TOL, count),
    ])
}

fn random_state(rng: &mut StdRng, n: usize) -> Result<QubitState> {
    let amps = (0..1usize << n)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    QubitState::from_unnormalized(n, amps)
}

pub fn tangle_checks() -> Result<Vec<Check>> {
    let (mut delta, mut count) = (0.0f64, 0);
    for (p, t, n) in grid(&[2, 3, 4, 6, 8]) {
        let spec = MecsSpec::from_overlap(p, t, n)?;
        let psi = embed_as_qubits(&spec)?;
        let numeric = if n == 3 {
            three_tangle_numeric(&psi)?
        } else {
            n_tangle_numeric(&psi)?
        };
        delta = delta.max((numeric - n_tangle_closed(&spec)?).abs());
        count += 1;
    }

    let mut rng = StdRng::seed_from_u64(SEED);
    let mut odd = 0.0f64;
    for n in [3, 5] {
        for _ in 0..100 {
            odd = odd.max(n_tangle_numeric(&random_state(&mut rng, n)?)?);
        }
    }

    let (mut comp, mut comp_count) = (0.0f64, 0);
    for (p, t, n) in grid(&[3]) {
        let spec = MecsSpec::from_overlap(p, t, n)?;
        comp = comp.max((three_tangle_composed(&spec)? - three_tangle(&spec)?).abs());
        comp_count += 1;
    }

    Ok(vec![
        Check::below("n_tangle_numeric_vs_closed", delta, ORACLE_TOL, count),
        Check::below("odd_n_nullity", odd, NULLITY_TOL, 200),
        Check::below(
            "three_tangle_composition",
            comp,
            COMPOSITION_TOL,
            comp_count,
        ),
    ])
}

fn random_params(rng: &mut StdRng, n: usize) -> Result<ProtocolParams> {
    let alpha = CoherentLabel::new(Complex64::new(
        rng.gen_range(-1.5..1.5),
        rng.gen_range(-1.5..1.5),
    ))?;
    ProtocolParams::new(alpha, rng.gen_range(0.0..2.0 * PI), n)
}

/// `D^2` of the two-party collapsed states: `2 +- 2 e^{-4|a|^2 sin^2 tau}`
/// times `cos(2|a|^2 sin 2tau)` for the `00` pattern.
pub fn two_party_denominator_sq(alpha: CoherentLabel, tau: f64, pattern: usize, sign: Sign) -> f64 {
    let a2 = alpha.value().norm_sqr();
    let decay = (-4.0 * a2 * tau.sin().powi(2)).exp();
    let phase = if pattern == 0 {
        (2.0 * a2 * (2.0 * tau).sin()).cos()
    } else {
        1.0
    };
    2.0 + 2.0 * sign.value() * decay * phase
}

pub fn protocol_checks() -> Result<Vec<Check>> {
    let mut rng = StdRng::seed_from_u64(SEED);

    let (mut completeness, mut trials) = (0.0f64, 0);
    for n in [2, 3, 4] {
        for _ in 0..10 {
            let state = product_state(&random_params(&mut rng, n)?)?;
            let total: f64 = GeneralizedBellOutcome::all(n)?
                .iter()
                .map(|o| bell_measure(&state, o).map(|r| r.probability))
                .sum::<Result<f64>>()?;
            completeness = completeness.max((total - 1.0).abs());
            trials += 1;
        }
    }

    // the projected component is (|L_i> +- |L_~i>) / (2 sqrt 2), so its
    // squared norm is D^2 / 8
    let (mut denom, mut denom_points) = (0.0f64, 0);
    for _ in 0..20 {
        let params = random_params(&mut rng, 2)?;
        let state = product_state(&params)?;
        for outcome in GeneralizedBellOutcome::all(2)? {
            let want = two_party_denominator_sq(
                params.alpha,
                params.tau,
                outcome.pattern(),
                outcome.sign(),
            );
            if want < 1e-6 {
                continue;
            }
            let got = 8.0 * bell_measure(&state, &outcome)?.probability;
            denom = denom.max((got.sqrt() - want.sqrt()).abs() / want.sqrt());
            denom_points += 1;
        }
    }

    let (mut fid, mut fid_points) = (0.0f64, 0);
    for n in [2, 3, 4] {
        for alpha in [0.5, 1.0, 1.7] {
            for sign in [Sign::Plus, Sign::Minus] {
                let params = ProtocolParams::new(CoherentLabel::real(alpha)?, FRAC_PI_2, n)?;
                let outcome = GeneralizedBellOutcome::new(n, 0, sign)?;
                fid = fid.max((1.0 - swap_end_to_end(&params, &outcome)?).abs());
                fid_points += 1;
            }
        }
    }

    let mut bijective = true;
    for n in 2..=5 {
        bijective &= gate_maps_basis_to_products(n)?;
    }

    Ok(vec![
        Check::below(
            "outcome_completeness",
            completeness,
            COMPLETENESS_TOL,
            trials,
        ),
        Check::below(
            "two_party_denominators",
            denom,
            DENOMINATOR_REL_TOL,
            denom_points,
        ),
        Check::below("end_to_end_fidelity", fid, FIDELITY_TOL, fid_points),
        Check::flag("gate_g_bijective", bijective, 4),
    ])
}

/// Every generalized Bell state goes to a distinct computational basis state
/// under `G`, exactly up to sign.
pub fn gate_maps_basis_to_products(n: usize) -> Result<bool> {
    let g = gate_g(n)?;
    let mut seen = vec![false; 1 << n];
    for outcome in GeneralizedBellOutcome::all(n)? {
        let out = outcome.electronic_state()?.apply(&g)?;
        let hits: Vec<usize> = (0..out.dim())
            .filter(|&i| out.amplitude(i).norm() > 1e-12)
            .collect();
        let [i] = hits[..] else {
            return Ok(false);
        };
        if (out.amplitude(i).norm() - 1.0).abs() > 1e-12 || seen[i] {
            return Ok(false);
        }
        seen[i] = true;
    }
    Ok(seen.iter().all(|&s| s))
}

pub fn cnot_checks() -> Result<Vec<Check>> {
    let residuals = CNOT_CUTOFFS
        .iter()
        .map(|&c| Ok(verify_cnot_identity(&CnotParams::symmetric_cnot(c)?, 0, 1)?.residual))
        .collect::<Result<Vec<f64>>>()?;
    let monotone = residuals.windows(2).all(|w| w[1] < w[0]);
    let last = *residuals.last().expect("non-empty cutoffs");

    let trivial = verify_cnot_identity(&CnotParams::new(PI.sqrt(), 0.0, 32)?, 0, 1)?.residual;

    let params = CnotParams::symmetric_cnot(64)?;
    let h = Complex64::new(0.5, 0.0);
    let mut databus = 0.0f64;
    for qubits in [
        [h, h, h, h],
        [
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 1.0),
        ],
    ] {
        for alpha in [Complex64::new(0.0, 0.0), Complex64::new(0.5, 0.0)] {
            for (c, t) in [(0, 1), (1, 0)] {
                databus = databus.max(databus_infidelity(&params, c, t, alpha, qubits)?);
            }
        }
    }

    Ok(vec![
        Check::below("cnot_residual_cutoff_64", last, CNOT_TOL, 1),
        Check::flag("cnot_residual_monotone", monotone, residuals.len()),
        Check::below("zero_kick_identity", trivial, 1e-12, 1),
        Check::below("databus_infidelity", databus, DATABUS_TOL, 8),
    ])
}

pub fn table_checks() -> Result<Vec<Check>> {
    Ok(special_state_table()?
        .into_iter()
        .map(|row| {
            let worst = row
                .points
                .iter()
                .map(|pt| (pt.computed - pt.expected).abs())
                .fold(0.0, f64::max);
            Check {
                name: format!("table_row {}", row.state),
                value: worst,
                tolerance: TABLE_TOL,
                points: row.points.len(),
                passed: row.passed,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_parse() {
        for s in Suite::EACH.into_iter().chain([Suite::All]) {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("bogus".parse::<Suite>().is_err());
    }

    #[test]
    fn standard_grid_size() {
        assert_eq!(standard_ps().len(), 20);
        assert_eq!(standard_thetas().len(), 13);
        assert_eq!(*standard_thetas().last().unwrap(), 2.0 * PI);
        assert_eq!(grid(&[3, 4, 5, 6, 7, 8]).count(), 1560);
    }

    #[test]
    fn gate_g_small() {
        assert!(gate_maps_basis_to_products(2).unwrap());
        assert!(gate_maps_basis_to_products(3).unwrap());
    }

    #[test]
    fn table_suite_passes() {
        let r = run(Suite::Table1).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].checks.len(), 6);
        assert!(r[0].passed, "{r:?}");
    }
}
