pub mod branches;
pub mod cli;
pub mod error;
pub mod gates;
pub mod network;
pub mod primitives;
pub mod protocols;
pub mod qft;
pub mod qstate;
