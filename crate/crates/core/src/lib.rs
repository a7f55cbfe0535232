//! Mixed-state analysis of hidden Markov processes, with a focus on
//! classical processes obtained by measuring qubit sources.
//!
//! The pipeline: build or load a [`LabeledHmm`] (optionally a [`QubitHmm`]
//! measured with a [`ProjectiveMeasurement`]), then estimate its entropy rate
//! from the mixed-state orbit, enumerate the mixed-state presentation when it
//! is finite, and bound the dimension of the mixed-state attractor.

pub mod block_entropy;
pub mod box_count;
pub mod dimension;
pub mod error;
pub mod fixtures;
pub mod hmm;
pub mod info;
pub mod lce;
pub mod machine_file;
pub mod mixed_state;
pub mod msp;
pub mod quantum;
pub mod sampling;

pub use block_entropy::{block_entropy_estimate, BlockEntropyEstimate};
pub use box_count::{box_counting_dimension, default_eps_grid, BoxCountFit};
pub use dimension::{
    analyze_orbit, d_lce, dimension_report, DimensionConfig, DimensionReport, OrbitAnalysis,
    OrbitConfig,
};
pub use error::{Error, Result, UnifilarWitness};
pub use hmm::{LabeledHmm, RawMachine, StationaryDistribution, UnifilarCheck};
pub use info::{binary_entropy, shannon_entropy};
pub use lce::{ifs_jacobian, lce_spectrum, LceConfig, LceEstimate};
pub use machine_file::{load_machine, machine_to_json, parse_machine, LoadedMachine, MachineFile};
pub use mixed_state::{
    iterate_trajectory, mixed_state_of_word, propagate, symbol_distribution, MixedState,
    PointCloud, TrajectoryConfig, TrajectoryEstimate,
};
pub use msp::{enumerate_msp, merge_tolerance_sweep, MsPresentation, MspConfig, MspOutcome};
pub use quantum::{measure_machine, ProjectiveMeasurement, PureQubit, QubitHmm};
pub use sampling::{derive_seed, sample_sequence, SampledSequence};
