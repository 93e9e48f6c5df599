//! Aggregated measure report shared by the library and the command line.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::measures::{
    n_tangle_closed, n_tangle_numeric, pair_concurrence_closed, pair_lambdas_closed,
    reduced_pair_density, split_concurrence_closed, split_concurrence_numeric,
    three_tangle_numeric, wootters_concurrence, SplitSpec,
};
use crate::states::{embed_as_qubits, MecsSpec};

/// Numeric oracles that expand the state into `2^N` amplitudes are skipped
/// above this size.
pub const ORACLE_MAX_PARTIES: usize = 16;

/// Bound on every oracle delta for a report to count as consistent.
pub const ORACLE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureInputs {
    pub p: f64,
    pub theta: f64,
    pub n: usize,
    pub k: usize,
}

/// `|closed - numeric|` for each measure; `None` where the oracle does not
/// apply (degenerate basis at `p = 1`, null state, or too many parties).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct OracleDeltas {
    pub split_concurrence: Option<f64>,
    pub pair_concurrence: Option<f64>,
    pub n_tangle: Option<f64>,
    pub lambdas: Option<f64>,
}

impl OracleDeltas {
    pub fn max(&self) -> f64 {
        [
            self.split_concurrence,
            self.pair_concurrence,
            self.n_tangle,
            self.lambdas,
        ]
        .into_iter()
        .flatten()
        .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureReport {
    pub inputs: MeasureInputs,
    pub split_concurrence: f64,
    pub pair_concurrence: f64,
    /// `None` for odd `N > 3`.
    pub n_tangle: Option<f64>,
    pub lambdas: [f64; 4],
    pub oracle_deltas: Option<OracleDeltas>,
}

impl MeasureReport {
    /// Closed forms only.
    pub fn closed_form(spec: &MecsSpec, split: SplitSpec) -> Result<Self> {
        let n = spec.parties();
        let n_tangle = if n.is_multiple_of(2) || n == 3 {
            Some(n_tangle_closed(spec)?)
        } else {
            None
        };
        Ok(Self {
            inputs: MeasureInputs {
                p: spec.p(),
                theta: spec.theta(),
                n,
                k: split.k(),
            },
            split_concurrence: split_concurrence_closed(spec, split)?,
            pair_concurrence: pair_concurrence_closed(spec)?,
            n_tangle,
            lambdas: pair_lambdas_closed(spec),
            oracle_deltas: None,
        })
    }

    /// Closed forms plus every applicable numeric cross-check.
    pub fn with_oracles(spec: &MecsSpec, split: SplitSpec) -> Result<Self> {
        let mut report = Self::closed_form(spec, split)?;
        let mut deltas = OracleDeltas::default();
        if spec.norm_factor_sq().is_ok() {
            let diag = wootters_concurrence(&reduced_pair_density(spec)?)?;
            deltas.pair_concurrence = Some((diag.concurrence - report.pair_concurrence).abs());
            deltas.lambdas = Some(
                diag.lambdas
                    .iter()
                    .zip(&report.lambdas)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max),
            );
            if spec.p() < 1.0 && spec.parties() <= ORACLE_MAX_PARTIES {
                let psi = embed_as_qubits(spec)?;
                let split_num = split_concurrence_numeric(&psi, split)?;
                deltas.split_concurrence = Some((split_num - report.split_concurrence).abs());
                if let Some(closed) = report.n_tangle {
                    let numeric = if spec.parties() == 3 {
                        three_tangle_numeric(&psi)?
                    } else {
                        n_tangle_numeric(&psi)?
                    };
                    deltas.n_tangle = Some((numeric - closed).abs());
                }
            }
        }
        report.oracle_deltas = Some(deltas);
        Ok(report)
    }

    pub fn oracles_consistent(&self) -> bool {
        self.oracle_deltas.is_none_or(|d| d.max() < ORACLE_TOL)
    }
}
