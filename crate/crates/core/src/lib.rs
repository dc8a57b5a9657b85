//! Traction-power isolation engine.
//!
//! Models an electrified railway's catenary and feeder network, computes
//! which conductors are live, dead or grounded, plans and executes
//! interlocked switching sequences for power outages, coordinates plate-order
//! protection with train dispatching, schedules weekly maintenance under
//! five-craft resource limits, and simulates nightly work windows.

pub mod energization;
pub mod ids;
pub mod plate_orders;
mod records;
pub mod room;
pub mod scheduler;
pub mod state;
pub mod switching;
pub mod timeline;
pub mod topology;

pub use records::DocumentError;
