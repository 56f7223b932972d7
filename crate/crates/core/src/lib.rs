// SPDX-License-Identifier: Apache-2.0

//! High-independence tabulation hashing.

pub mod bounds;
pub mod budget;
pub mod error;
pub mod keyspace;
pub mod prng;
pub mod schemes;
pub mod tabulation;
pub mod verify;
mod wire;

pub use bounds::{BoundOptions, BoundParams, BoundReport, Convention, Epsilon, Exponent};
pub use budget::MemoryBudget;
pub use error::{Error, ParseError, Result};
pub use keyspace::{KeyCodec, PositionChar, PositionCharSet};
pub use schemes::{
    DoubleTabulation, PolynomialHash, Preset, RecursivePlan, RecursiveTabulation, Scheme, SchemeTag,
    TripleTabulation,
};
pub use tabulation::{LazyTabulation, LookupCounter, SimpleTabulation, TableSource, TabulationParams};
