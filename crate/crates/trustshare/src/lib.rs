//! Trust-based information sharing between cooperating agencies.
//!
//! The crate models a pair of agencies exchanging classified records over an
//! untrusted channel. A source agency builds an encrypted, signed request; the
//! target authenticates the sender, filters its repository by the trust level
//! it holds for the requesting pair, and replies with an encrypted response
//! that the source verifies for integrity, target authenticity and session
//! freshness.
//!
//! Layering, bottom up:
//!
//! - [`crypto`]: MD5 digests, schoolbook RSA, and the hybrid envelope that
//!   wraps bulk payloads.
//! - [`wire`]: canonical byte encodings for every protocol message, so both
//!   sides hash identical bytes.
//! - [`mapping`], [`filter`], [`table1`]: the pair mapping function, the
//!   trust-level disclosure filter, and the reference disclosure table.
//! - [`store`]: the persistent trust/repository store and its text format.
//! - [`source`], [`target`]: the two protocol endpoints.
//! - [`sim`]: deterministic multi-exchange scenarios, in process or over a
//!   loopback socket, with an adversarial mutation hook.
//! - [`gateway`]: a line-oriented Unix-socket service exposing user accounts
//!   and queries on top of a store.

pub mod crypto;
pub mod error;
pub mod filter;
pub mod fixture;
pub mod gateway;
pub mod mapping;
pub mod sim;
pub mod source;
pub mod store;
pub mod table1;
pub mod target;
pub mod types;
pub mod wire;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::{CryptoError, GatewayError, ProtocolError, StoreError, WireError};
pub use types::{AgencyId, AgencyIdentity, AgencyRole, RandomSet};
