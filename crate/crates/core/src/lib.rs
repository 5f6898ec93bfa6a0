//! Certified upper bounds on α-affinity indicators of multilevel coherence and
//! multipartite correlation.
//!
//! The α-affinity `A_α(ρ, σ) = Tr(ρ^α σ^{1-α})` induces six indicators, each of the
//! form `1 - max A` or `1 - (max A)^{1/α}` where the maximum runs over a restricted
//! convex set of states:
//!
//! | label   | restricted set                                   |
//! |---------|--------------------------------------------------|
//! | `C`, `Cfrak` (order k) | `I_{k-1}`: mixtures of pure states with coherent rank ≤ k-1 |
//! | `S`, `Sfrak` (order k) | `S_k`: mixtures of k-separable pure states |
//! | `E`, `Efrak` (order k) | `P_{k-1}`: mixtures of (k-1)-producible pure states |
//!
//! Every computed value is backed by an explicit feasible witness, so each reported
//! number is an upper bound on the true indicator. Theorem checks are phrased
//! constructively: witnesses are mapped (through channels, local unitaries or the
//! coherence-to-correlation embedding) and injected into the optimizer.
//!
//! Module map:
//!
//! - [`state`]: density matrices, pure states, spectral calculus, partial trace.
//! - [`random`]: seeded Haar/Ginibre generators.
//! - [`affinity`]: the α-affinity and the inequality certificates behind it.
//! - [`channels`]: Kraus channels and the structured classes the theorems use.
//! - [`partitions`], [`structure`], [`family`]: the restricted state sets.
//! - [`optimize`]: multi-start Nelder–Mead.
//! - [`indicators`]: the six indicators and the k=2 closed form.
//! - [`embedding`]: the permutation unitary mapping coherence to correlations.
//! - [`verify`]: batch verification suites with CSV reports.

#![forbid(unsafe_code)]

pub mod affinity;
pub mod channels;
pub mod embedding;
pub mod error;
pub mod family;
pub mod indicators;
pub mod io;
pub mod linalg;
pub mod optimize;
pub mod partitions;
pub mod random;
pub mod state;
pub mod structure;
pub mod verify;

pub use affinity::{alpha_affinity, AffinityValue, InequalityCertificate};
pub use channels::{ChannelTag, KrausChannel};
pub use embedding::EmbeddingMap;
pub use error::{Error, Result};
pub use family::{FamilyKind, FeasibleFamily};
pub use indicators::{IndicatorKind, IndicatorResult, OptimizerOptions};
pub use linalg::{CMatrix, CVector, C64};
pub use partitions::{Partition, PartitionFilter, PartitionSet};
pub use state::{DensityMatrix, Ensemble, PureState, Spectrum};
pub use structure::Factorization;
