//! Choi-matrix calculus for quantum channels and superchannels, min-entropy
//! type quantities computed by semidefinite programming, and decision
//! procedures for transforming one family of channels into another by a
//! single superchannel.

pub mod channels;
pub mod divergences;
pub mod entropies;
pub mod linalg;
pub mod majorization;
pub mod random;
pub mod sdp;
pub mod supermaps;
