//! CRC-aided polar codes with three erasure decoding strategies, and a
//! saddlepoint-accelerated engine for finite-blocklength achievability
//! bounds on the total and undetected error probabilities.
//!
//! The crate has two halves:
//!
//! * a link-level simulator — polar construction ([`polar`]), systematic
//!   CRC outer codes and their pruning/detection split ([`crc`]),
//!   biAWGN and block-memoryless phase-noise channels ([`channel`]),
//!   the erasure decoders ([`detect`]), and a reproducible Monte Carlo
//!   campaign engine with SNR-threshold search ([`sim`]);
//! * a numerical bound evaluator ([`bounds`]) covering the error-exponent
//!   bound of the optimum erasure decoder, the CRC-outer-code bound, the
//!   generalized-information-density threshold bound, and the saddlepoint
//!   approximation of the pairwise error probabilities inside them.

pub mod bits;
pub mod bounds;
pub mod channel;
pub mod crc;
pub mod detect;
pub mod error;
pub mod polar;
pub mod sim;
pub mod special;

pub use error::{Error, Result};
