//! Discrete-event simulation of a four-layer detection mesh: each node
//! scores incoming feature vectors with a trained model, raises alerts,
//! shares them over an unreliable acknowledged bus, and escalates a local
//! mitigation ladder. Logical integer time and explicit seeds make every
//! run replayable byte for byte.

mod bus;
mod node;
mod sim;

pub use bus::{broadcast, BusConfig, Event, EventKind};
pub use node::{
    handle_alert, severity_for, Alert, Layer, Mitigation, NodeId, NodeState, Severity,
};
pub use sim::{
    parse_scenario, run_mesh_sim, transcript_to_csv, Injection, Mesh, MeshConfig, MeshTranscript,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("feature vector has {got} values, expected {expected}")]
    VectorWidth { got: usize, expected: usize },
    #[error("feature {index} is {value}, outside the unit interval; vectors must be scaled")]
    UnscaledValue { index: usize, value: f64 },
    #[error("unknown node '{0}'")]
    UnknownNode(String),
    #[error("scenario line {line}: {message}")]
    MalformedScenario { line: usize, message: String },
    #[error("invalid mesh configuration: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Model(#[from] evcs_nn::NnError),
}
