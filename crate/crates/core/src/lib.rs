//! Multipartite entangled coherent states (MECS).
//!
//! The crate builds the balanced N-mode state
//! `Nrm (|alpha>^N + e^{i theta} |-alpha>^N)`, simulates its preparation by
//! entanglement swapping from trapped-ion electronic states, and computes its
//! entanglement: bipartite-split and pairwise concurrence, the 3-tangle and
//! the N-tangle. Each closed form has a numeric counterpart (Wootters
//! concurrence, partial traces, sigma_y contractions, hyperdeterminant) so
//! the two can be checked against each other.

pub mod algebra;
pub mod error;
pub mod fock;
pub mod measures;
pub mod protocol;
pub mod qubit;
pub mod report;
pub mod states;
pub mod sweep;
pub mod verify;

pub use algebra::{
    apply_annihilation_all, inner_product, ortho_basis, overlap, CoherentLabel,
    MultimodeSuperposition, OrthoBasisPair, Term,
};
pub use error::{MecsError, Result};
pub use fock::{databus_infidelity, verify_cnot_identity, CnotParams, CnotReport};
pub use measures::{
    general_pair_measures, n_tangle_closed, n_tangle_numeric, pair_concurrence_closed,
    reduced_pair_density, solve_max_p, special_state_table, split_concurrence_closed, three_tangle,
    wootters_concurrence, ConcurrenceDiagnostics, GeneralPairSpec, MaxConcurrence, SplitSpec,
};
pub use protocol::{
    bell_measure, evolve_single, gate_g, product_state, swap_end_to_end, GeneralizedBellOutcome,
    HybridState, ProtocolParams, Sign,
};
pub use qubit::{DensityOperator, QubitState};
pub use report::{MeasureInputs, MeasureReport, OracleDeltas};
pub use states::{build_mecs, embed_as_qubits, ghz_state, w_state, Amplitude, MecsSpec};
pub use sweep::{evaluate, write_csv, SweepGrid, SweepRow};
pub use verify::{Suite, SuiteReport};
