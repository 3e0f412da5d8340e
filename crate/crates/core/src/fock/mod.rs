//! Truncated multimode Fock spaces, ladder operators and states.

pub mod beam_splitter;
pub mod operator;
pub mod space;
pub mod state;

pub use beam_splitter::beam_splitter;
pub use operator::{
    annihilation, creation, momentum, number_operator, parity, position, quadrature, rotation,
    set_sparse_threshold, sparse_threshold, FieldOperator, Storage,
};
pub use space::{make_space, SpaceDescriptor};
pub use state::{coherent_state, coherent_state_with_tolerance, fock_state, QuantumState, StateData};
