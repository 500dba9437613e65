//! Temporal relations of measurement-based quantum computation over GF(2).
//!
//! Given a stabilizer resource state and per-qubit measurement planes, this
//! crate computes the classical processing relations `q = T s + H g`,
//! `o = Z s + R g` for every extremal pair of gauge inputs and computational
//! outputs, classifies the temporal relation generated by `T`, transforms
//! relations under plane flips, reconstructs the state from its relations,
//! and checks everything against an exact statevector simulator.

pub mod formats;
pub mod gf2;
pub mod oracle;
pub mod processing;
pub mod stabilizer;
pub mod temporal;
pub mod transforms;
pub mod wave;

pub use gf2::{BitMat, Bits, Gf2Error};
pub use processing::{ExtremalPair, NormalForm, ProcessingError, ProcessingRelations};
pub use stabilizer::{Axis, Frame, GraphSpec, StabilizerError, Tableau};
pub use temporal::{OrderKind, TemporalRelation};
