//! Exact analysis and simulation of pretty good state transfer (PGST) of
//! single-excitation states on paths.
//!
//! The path `P_n` has simple eigenvalues `2 cos(j pi / (n + 1))`. A state `v`
//! has PGST to its mirror image when the evolution `exp(itA) v` comes
//! arbitrarily close to it (up to a phase). That question reduces to integer
//! relations among the eigenvalues in the support of `v`, which this crate
//! computes exactly in cyclotomic fields.

pub mod cli;
pub mod cyclo;
pub mod decider;
pub mod dynamics;
pub mod error;
pub mod lattice;
pub mod report;
pub mod serde_int;
pub mod spectrum;
pub mod state;
pub mod statespec;

pub use decider::{
    cross_validate, decide_pgst_general, decide_pgst_parity_r, decide_pgst_parity_s, relation_lattice,
    verify_certificate, Answer, Certificate, Method, PgstVerdict, RelationLattice, RelationVector,
};
pub use error::{Error, Result};
pub use state::{PureState, SupportSet};
