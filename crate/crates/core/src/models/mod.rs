//! Builders for the named models: state-transfer chain, Kagome chiral magnet,
//! gauge-encoded SU(n) magnets and the Sachdev–Ye protocol.

pub mod gauge;
pub mod ggm;
pub mod kagome;
pub mod qst;
pub mod sy;

pub use gauge::{effective_sun_heisenberg, gauge_blocks, GaugeBlocks, GaugeEncoding, SunModel};
pub use ggm::{ggm_basis, GgmBasis, GgmKind};
pub use kagome::{kagome_csl, KagomeLattice};
pub use qst::{locate_transfer_time, qst_chain, TransferOptimum};
pub use sy::{sy_sample, sy_split, sy_strobe_step, Strobe, SyModel};
