//! Spin and spin–phonon dynamics: Hamiltonian construction, unitary
//! evolution, Lindblad master equations and quantum trajectories.

pub mod channels;
pub mod dense;
pub mod evolve;
pub mod hamiltonian;
pub mod krylov;
pub mod master;
pub mod observables;
pub mod ode;
pub mod space;
pub mod sparse;
pub mod trajectories;

pub use channels::{fort_channels, phonon_loss_channels, phonon_loss_rates};
pub use evolve::{evolve_unitary, evolve_unitary_with, Schedule};
pub use hamiltonian::{build_effective_spin_hamiltonian, build_full_hamiltonian, FullModelOptions, TdHamiltonian};
pub use master::{diagonalize_rate_matrix, evolve_master, evolve_master_with, Channel, OpenSystemModel};
pub use ode::OdeOptions;
pub use space::HilbertSpace;
pub use sparse::{Factor, OpSum, SparseOp};
pub use trajectories::{sample_trajectories, TrajectoryResult};
