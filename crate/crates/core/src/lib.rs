//! Classical, qubit and entanglement-assisted strategies for generalized
//! random access codes whose questions are parity functions.

pub mod bloch;
pub mod channels;
pub mod classical;
pub mod eacc;
pub mod mubs;
pub mod quantum;
pub mod report;
