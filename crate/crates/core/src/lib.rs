//! Eigenstate typicality of nearest-neighbour spin chains.
//!
//! The crate enumerates the degenerate sectors of a non-interacting chain,
//! projects a nearest-neighbour interaction onto each sector, diagonalizes the
//! resulting block exactly and measures how far the single-site populations of
//! every eigenstate sit from the micro-canonical value of the sector.
//!
//! * [`basis`]: fixed-charge sector enumeration with O(N) rank/unrank.
//! * [`hamiltonian`]: sector blocks, the full-space oracle and GOE sampling.
//! * [`spectra`]: dense symmetric eigendecomposition and gap statistics.
//! * [`typicality`]: reduced populations, micro-canonical reference, atypicality.
//! * [`experiments`]: sweeps, ensembles, power-law fits and aggregation.
//! * [`cli`]: the `typicality` command-line front end.

pub mod basis;
pub mod cli;
pub mod experiments;
pub mod hamiltonian;
pub mod rng;
pub mod spectra;
pub mod typicality;

pub use basis::{
    enumerate_sector, BasisError, Configuration, LocalDimension, SectorBasis, SectorInfo, SiteLevel,
};
pub use hamiltonian::{
    build_full_hamiltonian_oracle, build_sector_hamiltonian, sample_goe,
    sample_spin_one_interaction, ChainSpec, DenseMatrix, HamiltonianError, InteractionSpec,
    SectorHamiltonian, DEFAULT_THETA,
};
pub use spectra::{
    degeneracy_fraction, eig_symmetric, export_gaps, EigenDecomposition, GapStatistics,
    SpectraError,
};
pub use typicality::{
    atypicality, atypicality_with_deviations, microcanonical_reference, reduced_populations,
    MicrocanonicalReference, SitePopulations, TypicalityError, TypicalityReport,
};
