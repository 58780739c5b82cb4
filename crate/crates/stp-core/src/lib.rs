//! Numerical laboratory for St. Petersburg sums.
//!
//! The crate computes exact finite-`n` distributions of the total gain
//! `S_n` of `n` St. Petersburg games (`P{X = 2^k} = 2^{-k}`), both
//! unconditionally and conditioned on the maximal payout, evaluates the
//! semistable limit laws by characteristic-function inversion, and turns
//! every merging/tail claim about these objects into a checkable
//! computation.
//!
//! Module map:
//! * [`dist`] — closed-form primitives of the single-game law, its
//!   truncation, the maximum, and the two-fold convolution tail.
//! * [`lattice`] — exact lattice convolutions with overflow aggregation
//!   (`LatticeLaw`), in `f64` or exact rational arithmetic.
//! * [`semistable`] — the limit laws `W_γ` and `W_{j,γ}` as Lévy atom
//!   series, their characteristic functions, and Gil–Pelaez inversion.
//! * [`asym`] — merging distances, conditional CLT, Chernoff/Cantelli
//!   bounds, and the tail-ratio scans.
//! * [`mc`] — seeded Monte Carlo cross-validation.
//! * [`export`] — CSV emission with deterministic bytes.
//! * [`verify`] — the acceptance-check suite used by the CLI and tests.

pub mod asym;
pub mod dist;
pub mod export;
pub mod figures;
pub mod lattice;
pub mod mc;
pub mod normal;
pub mod quad;
pub mod semistable;
pub mod threads;
pub mod verify;
pub mod weight;

pub use dist::{ProbValue, StpParams};
pub use lattice::LatticeLaw;
pub use quad::InversionResult;
pub use semistable::LevyAtomSeries;
pub use asym::ScanReport;
