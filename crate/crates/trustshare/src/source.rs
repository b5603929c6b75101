//! The source agency's half of the handshake: structure the request, then
//! validate the target's response (integrity, target authenticity, session
//! binding).

use rand::{Rng, RngCore};

use crate::crypto::{md5_digest, private_decrypt, private_encrypt, public_encrypt};
use crate::error::ProtocolError;
use crate::mapping::{compute_mapping, MappingFunctionSpec};
use crate::store::TrustStore;
use crate::types::{AgencyId, AgencyIdentity, RandomSet};
use crate::wire;

/// Both sides recompute `M'_val` with the identical left-fold code path, so
/// this tolerance only absorbs cross-platform sine variance.
pub const MAPPING_TOLERANCE: f64 = 1e-12;

/// What the source must remember between sending `S_Req` and validating
/// `T_Res`. Owned by exactly one logical session.
#[derive(Clone, Debug)]
pub struct SessionState {
    pub nonce: u64,
    pub nonce_cipher: Vec<u8>,
    pub random_set: RandomSet,
    pub target: AgencyId,
    pub request_text: Vec<u8>,
}

/// Outcome of the three response checks.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Verdicts {
    pub integrity: bool,
    pub target_authentic: bool,
    pub session_match: bool,
}

/// A response that passed all three checks; cannot be built otherwise.
#[derive(Clone, Debug)]
pub struct ValidatedResponse {
    pub items: Vec<Vec<u8>>,
    pub verdicts: Verdicts,
}

/// Structures `S_Req` for `target` and retains the session state needed to
/// validate the eventual response.
///
/// `S_Req = Enc[R_V + src id + SA_Data]` under the target's public key, where
/// `SA_Data = Enc[S_R + Request + H_val]` under the source's private key and
/// `H_val = MD5[R_V + src id + S_R + Request]`.
pub fn build_request(
    identity: &AgencyIdentity,
    store: &TrustStore,
    target: &AgencyId,
    request_text: &[u8],
    set_size: usize,
    rng: &mut dyn RngCore,
) -> Result<(Vec<u8>, SessionState), ProtocolError> {
    let target_key = store
        .public_key(target)
        .map_err(|_| ProtocolError::UnknownAgency(target.as_str().into()))?;

    // The nonce is encrypted under the source's *own* public key, so only the
    // source can later check the echoed value.
    let nonce: u64 = rng.gen();
    let nonce_cipher = public_encrypt(&nonce.to_be_bytes(), identity.public_key(), rng);

    let random_set = RandomSet::generate(set_size, rng)?;
    let preimage =
        wire::encode_preimage_request(&nonce_cipher, &identity.id, &random_set, request_text)?;
    let digest = md5_digest(&preimage);

    let signed_payload = wire::encode_signed_payload(&wire::SignedPayload {
        random_set: random_set.clone(),
        request_text: request_text.to_vec(),
        digest,
    })?;
    let signed_blob = private_encrypt(&signed_payload, &identity.keypair.private_part, rng);

    let outer = wire::encode_request(&wire::RequestOuter {
        nonce_cipher: nonce_cipher.clone(),
        src: identity.id.clone(),
        signed_blob,
    })?;
    let envelope = public_encrypt(&outer, target_key, rng);

    Ok((
        envelope,
        SessionState {
            nonce,
            nonce_cipher,
            random_set,
            target: target.clone(),
            request_text: request_text.to_vec(),
        },
    ))
}

/// Validates `T_Res` against the session: decrypts with the source's private
/// part, checks the digest over `TE_Data`, recomputes the mapping value from
/// the session's random set, and requires the echoed nonce to decrypt back to
/// the session's `R`.
pub fn validate_response(
    session: &SessionState,
    identity: &AgencyIdentity,
    peer_mapping: &MappingFunctionSpec,
    response_envelope: &[u8],
) -> Result<ValidatedResponse, ProtocolError> {
    let plaintext = private_decrypt(response_envelope, &identity.keypair.private_part)?;
    let plain = wire::decode_response(&plaintext)?;

    let preimage =
        wire::encode_preimage_response(&plain.nonce_cipher, plain.mapping_value, &plain.items)?;
    if md5_digest(&preimage) != plain.digest {
        return Err(ProtocolError::Integrity);
    }

    let expected = compute_mapping(peer_mapping, &session.random_set);
    if (plain.mapping_value - expected).abs() > MAPPING_TOLERANCE {
        return Err(ProtocolError::TargetAuth);
    }

    let nonce_bytes = private_decrypt(&plain.nonce_cipher, &identity.keypair.private_part)?;
    let nonce_arr: [u8; 8] = nonce_bytes
        .as_slice()
        .try_into()
        .map_err(|_| ProtocolError::Malformed("echoed nonce is not 8 bytes"))?;
    if u64::from_be_bytes(nonce_arr) != session.nonce {
        return Err(ProtocolError::SessionMismatch);
    }

    Ok(ValidatedResponse {
        items: plain.items,
        verdicts: Verdicts {
            integrity: true,
            target_authentic: true,
            session_match: true,
        },
    })
}
