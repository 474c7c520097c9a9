//! Coin schedules and the two-chirality walker on the integer line.

pub mod coin;
pub mod state;

pub use coin::{haar_coin, CoinMatrix, CoinSchedule, CoinSource, CoinTable, CustomCoins, InversePeriod};
pub use state::{evolve, evolve_with, MomentStats, Order, SiteProbability, Spinor, WalkerState};
