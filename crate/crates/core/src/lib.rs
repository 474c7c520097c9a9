//! Inhomogeneous discrete-time quantum walks with coin angle `2παn`.

pub mod analysis;
pub mod duality;
pub mod eigen;
pub mod error;
pub mod number_theory;
pub mod precise;
pub mod spectral;
pub mod trig;
pub mod walk;

pub use error::{Error, Result};
pub use precise::{Enclosure, PreciseReal};
pub use trig::{quarter_turn_trig, trig_pair_exact, QuarterFraction};
pub use walk::{evolve, CoinMatrix, CoinSchedule, InversePeriod, Order, Spinor, WalkerState};
