//! Exact census of shortest cycles and distances in Kautz digraphs.
//!
//! For `K(d, D)` the crate computes `ρ_k` (edges whose shortest cycle has
//! length `k + 1`), `σ_k` (ordered vertex pairs at distance `k`) and the row
//! difference `Δ_k = ρ_k(d, D) - ρ_k(d, D - 1)` along independent routes:
//!
//! * [`oracle`]: brute-force censuses over all edges and vertex pairs,
//! * [`transfer`]: the masked terminal-pair transfer-matrix product,
//! * [`tables`]: row-by-row recursion, checked against [`necklace`] counts.
//!
//! Counts are generic over [`num::Count`]; the aliases below fix them to
//! arbitrary-precision integers or to `u64`.

pub mod error;
pub mod necklace;
pub mod num;
pub mod oracle;
pub mod tables;
pub mod transfer;
pub mod words;

pub use error::{Error, Result};
pub use num::Count;
pub use words::{EdgeRef, EnumerationCap, GraphParams, KautzWord};

/// Arbitrary-precision count used by the default surface.
pub type BigCount = num_bigint::BigUint;

pub type Spectrum = oracle::Spectrum<BigCount>;
pub type DeltaRow = oracle::DeltaRow<BigCount>;
pub type TableSet = tables::TableSet<BigCount>;
pub type TransferSystem = transfer::TransferSystem<BigCount>;

pub type Spectrum64 = oracle::Spectrum<u64>;
pub type TableSet64 = tables::TableSet<u64>;
pub type TransferSystem64 = transfer::TransferSystem<u64>;
