//! Self-contained dense LP and SDP solvers.

pub mod lp;
pub mod sdp;
