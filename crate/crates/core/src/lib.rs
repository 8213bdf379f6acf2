//! Quantum volume benchmarking: model-circuit generation, device compilation,
//! noisy simulation and heavy-output statistics.

pub mod circuit;
pub mod compile;
pub mod error;
pub mod gates;
pub mod math;
pub mod protocol;
pub mod qvgen;
pub mod rng;
pub mod sim;
pub mod state;
pub mod topology;

pub use circuit::{gate_census, unitary_of, validate, Circuit, CircuitMeta, CircuitSource, GateCensus, Operation};
pub use error::{Error, Result};
pub use gates::{GateKind, VendorFamily};
pub use math::{UnitaryMatrix, C64};
pub use qvgen::{generate_qv_circuit, generate_suite, QvSpec};
pub use sim::{heavy_set, ideal_distribution, ideal_hop, sample_counts, Counts, Distribution, HeavySet, NoiseModel, ShotKey};
pub use topology::{connected_subsets, load_profile, subset_count, CouplingGraph, DeviceProfile};
pub use compile::{compile_to_device, CompileRequest, CompiledCircuit};
pub use protocol::{
    cumulative_stats, hop_of, quantum_volume, run_protocol, verdict, CircuitResult, CumulativePoint,
    QuantumVolume, SuiteConfig, SuiteResult, Verdict,
};
