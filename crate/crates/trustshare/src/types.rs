//! Core domain types shared by both halves of the handshake.

use rand::Rng;
use rand::RngCore;

use crate::crypto::{KeyPair, PublicKey};
use crate::error::WireError;

pub const MAX_RANDOM_SET_LEN: usize = 64;
pub const MAX_RANDOM_VALUE: u64 = 1_000_000;

/// Short identifier of an agency, e.g. `"CIA"`. 1..=32 visible characters.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct AgencyId(String);

impl AgencyId {
    pub fn new(id: impl Into<String>) -> Result<AgencyId, String> {
        let id = id.into();
        let ok = !id.is_empty()
            && id.chars().count() <= 32
            && id.chars().all(|c| !c.is_whitespace() && !c.is_control());
        if ok {
            Ok(AgencyId(id))
        } else {
            Err(format!("invalid agency id {id:?}"))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl std::fmt::Display for AgencyId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::str::FromStr for AgencyId {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AgencyId::new(s)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum AgencyRole {
    IntelligenceAgency,
    GeneralUser,
}

impl AgencyRole {
    pub fn as_str(&self) -> &'static str {
        match self {
            AgencyRole::IntelligenceAgency => "intelligence",
            AgencyRole::GeneralUser => "general",
        }
    }

    pub fn parse(s: &str) -> Option<AgencyRole> {
        match s {
            "intelligence" => Some(AgencyRole::IntelligenceAgency),
            "general" => Some(AgencyRole::GeneralUser),
            _ => None,
        }
    }
}

/// An agency together with its keypair; what one party of the protocol holds.
#[derive(Clone, Debug)]
pub struct AgencyIdentity {
    pub id: AgencyId,
    pub keypair: KeyPair,
    pub role: AgencyRole,
}

impl AgencyIdentity {
    pub fn public_key(&self) -> &PublicKey {
        &self.keypair.public_part
    }
}

/// The request's set of random values `S_R = {r_1 .. r_n}`, used to
/// authenticate the target via the pair's mapping function.
///
/// Every value is at least 1, which keeps division in the mapping fold safe.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RandomSet(Vec<u64>);

impl RandomSet {
    pub fn new(values: Vec<u64>) -> Result<RandomSet, WireError> {
        if values.is_empty() || values.len() > MAX_RANDOM_SET_LEN {
            return Err(WireError::BadSetSize(values.len()));
        }
        if values.iter().any(|&v| v < 1 || v > MAX_RANDOM_VALUE) {
            return Err(WireError::Malformed("random value outside 1..=10^6"));
        }
        Ok(RandomSet(values))
    }

    pub fn generate(n: usize, rng: &mut dyn RngCore) -> Result<RandomSet, WireError> {
        if n == 0 || n > MAX_RANDOM_SET_LEN {
            return Err(WireError::BadSetSize(n));
        }
        let values = (0..n).map(|_| rng.gen_range(1..=MAX_RANDOM_VALUE)).collect();
        Ok(RandomSet(values))
    }

    pub fn values(&self) -> &[u64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction forbids empty sets
    }
}
