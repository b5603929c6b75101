//! Error types shared across the protocol stack.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CryptoError {
    #[error("modulus of {bits} bits is below the 1024-bit floor")]
    WeakModulus { bits: u32 },
    #[error("decryption failed: session secret check mismatch")]
    Decrypt,
    #[error("malformed envelope: {0}")]
    MalformedEnvelope(&'static str),
    #[error("malformed key file: {0}")]
    MalformedKeyFile(&'static str),
    #[error("key file i/o: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error)]
pub enum WireError {
    #[error("field of {len} bytes exceeds length-prefix capacity")]
    FieldTooLong { len: usize },
    #[error("random set size {0} outside 1..=64")]
    BadSetSize(usize),
    #[error("mapping value is not finite")]
    NonFiniteMapping,
    #[error("malformed message: {0}")]
    Malformed(&'static str),
}

/// Failure taxonomy of a protocol exchange. Every rejection path of the
/// handshake lands on exactly one of these.
#[derive(Debug, Error)]
pub enum ProtocolError {
    /// Ciphertext did not open under the expected key.
    #[error("decrypt error")]
    Decrypt,
    /// Plaintext failed to parse back into protocol fields.
    #[error("malformed message: {0}")]
    Malformed(&'static str),
    /// Signed blob did not open under the claimed source's public part.
    #[error("source authentication failed")]
    Auth,
    /// Embedded digest disagrees with the recomputed one.
    #[error("integrity check failed")]
    Integrity,
    /// Mapping value disagrees with the pair's shared mapping function.
    #[error("target authentication failed")]
    TargetAuth,
    /// Echoed nonce does not belong to this session.
    #[error("session mismatch")]
    SessionMismatch,
    #[error("unknown agency {0:?}")]
    UnknownAgency(String),
    #[error("unknown category for code {0:?}")]
    UnknownCategory(String),
    #[error("invalid random set size {0}")]
    BadSetSize(usize),
    #[error("crypto: {0}")]
    Crypto(CryptoError),
}

impl From<CryptoError> for ProtocolError {
    fn from(e: CryptoError) -> Self {
        match e {
            CryptoError::Decrypt => ProtocolError::Decrypt,
            CryptoError::MalformedEnvelope(msg) => ProtocolError::Malformed(msg),
            other => ProtocolError::Crypto(other),
        }
    }
}

impl From<WireError> for ProtocolError {
    fn from(e: WireError) -> Self {
        match e {
            WireError::Malformed(msg) => ProtocolError::Malformed(msg),
            WireError::FieldTooLong { .. } => ProtocolError::Malformed("field too long"),
            WireError::BadSetSize(n) => ProtocolError::BadSetSize(n),
            WireError::NonFiniteMapping => ProtocolError::Malformed("non-finite mapping value"),
        }
    }
}

impl ProtocolError {
    /// Stable machine-readable tag, used by transcripts and the CLI.
    pub fn kind(&self) -> &'static str {
        match self {
            ProtocolError::Decrypt => "DecryptError",
            ProtocolError::Malformed(_) => "MalformedMessage",
            ProtocolError::Auth => "AuthError",
            ProtocolError::Integrity => "IntegrityError",
            ProtocolError::TargetAuth => "TargetAuthError",
            ProtocolError::SessionMismatch => "SessionMismatch",
            ProtocolError::UnknownAgency(_) => "UnknownAgency",
            ProtocolError::UnknownCategory(_) => "UnknownCategory",
            ProtocolError::BadSetSize(_) => "BadSetSize",
            ProtocolError::Crypto(_) => "CryptoError",
        }
    }
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("agency {0:?} already registered")]
    DuplicateAgency(String),
    #[error("unknown agency {0:?}")]
    UnknownAgency(String),
    #[error("trust level {0} outside 0..=10")]
    BadTrustLevel(u8),
    #[error("invalid terrorist code {0:?}")]
    BadCode(String),
    #[error("invalid mapping operators {0:?}")]
    BadOperators(String),
    #[error("invalid selection order: {0}")]
    BadOrder(String),
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error)]
pub enum GatewayError {
    #[error("not authenticated")]
    NotAuthenticated,
    #[error("not authorized")]
    NotAuthorized,
    #[error("duplicate user {0:?}")]
    DuplicateUser(String),
    #[error("unknown user {0:?}")]
    UnknownUser(String),
    #[error("user {0:?} is not active")]
    NotActive(String),
    #[error("unknown code {0:?}")]
    UnknownCode(String),
    #[error("bad request: {0}")]
    BadRequest(String),
    #[error("store: {0}")]
    Store(#[from] StoreError),
}

impl GatewayError {
    pub fn kind(&self) -> &'static str {
        match self {
            GatewayError::NotAuthenticated => "NotAuthenticated",
            GatewayError::NotAuthorized => "NotAuthorized",
            GatewayError::DuplicateUser(_) => "DuplicateUser",
            GatewayError::UnknownUser(_) => "UnknownUser",
            GatewayError::NotActive(_) => "NotActive",
            GatewayError::UnknownCode(_) => "UnknownCode",
            GatewayError::BadRequest(_) => "BadRequest",
            GatewayError::Store(_) => "StoreError",
        }
    }
}
