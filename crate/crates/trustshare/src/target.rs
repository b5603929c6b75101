//! The target agency's half of the handshake: authenticate and
//! integrity-check the request, then build the trust-scored response.

use rand::RngCore;

use crate::crypto::{md5_digest, private_decrypt, public_decrypt, public_encrypt};
use crate::error::ProtocolError;
use crate::filter::select_shared;
use crate::mapping::compute_mapping;
use crate::store::{code_category, TrustStore};
use crate::types::{AgencyId, AgencyIdentity, RandomSet};
use crate::wire;

/// A request that survived decryption, source authentication and the digest
/// check; only such requests reach response building.
#[derive(Clone, Debug)]
pub struct DecodedRequest {
    pub src: AgencyId,
    pub nonce_cipher: Vec<u8>,
    pub random_set: RandomSet,
    pub request_text: Vec<u8>,
    pub integrity_ok: bool,
    pub auth_ok: bool,
}

/// Validates `S_Req`: decrypts with the target's private part, opens
/// `SA_Data` with the claimed source's public part, rebuilds `SE_Data` and
/// requires MD5 equality with the embedded `H_val`.
pub fn validate_request(
    identity: &AgencyIdentity,
    store: &TrustStore,
    request_envelope: &[u8],
) -> Result<DecodedRequest, ProtocolError> {
    let plaintext = private_decrypt(request_envelope, &identity.keypair.private_part)?;
    let outer = wire::decode_request(&plaintext)?;

    let source_key = store
        .public_key(&outer.src)
        .map_err(|_| ProtocolError::UnknownAgency(outer.src.as_str().into()))?;

    // Opening under the claimed source's public part is what authenticates
    // the sender; any failure here is an authentication failure.
    let payload = public_decrypt(&outer.signed_blob, source_key)
        .ok()
        .and_then(|bytes| wire::decode_signed_payload(&bytes).ok())
        .ok_or(ProtocolError::Auth)?;

    let preimage = wire::encode_preimage_request(
        &outer.nonce_cipher,
        &outer.src,
        &payload.random_set,
        &payload.request_text,
    )?;
    if md5_digest(&preimage) != payload.digest {
        return Err(ProtocolError::Integrity);
    }

    Ok(DecodedRequest {
        src: outer.src,
        nonce_cipher: outer.nonce_cipher,
        random_set: payload.random_set,
        request_text: payload.request_text,
        integrity_ok: true,
        auth_ok: true,
    })
}

/// Request syntax understood by the target: `QUERY <terrorist-code>`.
pub fn query_text(code: &str) -> Vec<u8> {
    format!("QUERY {code}").into_bytes()
}

fn parse_query(request_text: &[u8]) -> Option<&str> {
    let text = std::str::from_utf8(request_text).ok()?;
    let code = text.strip_prefix("QUERY ")?;
    code_category(code).map(|_| code)
}

/// Builds `T_Res` for a validated request: looks up trust level and mapping
/// function by source id, computes `M'_val = sin(M_fn(S_R))`, selects items
/// through the disclosure filter, and encrypts `TE_Data + H_val` under the
/// source's public key.
///
/// Trust level 0 (including the deny-by-default case of a missing trust
/// record) yields a valid response with zero items, not an error. A code the
/// repository does not hold behaves the same way.
pub fn build_response(
    identity: &AgencyIdentity,
    store: &TrustStore,
    request: &DecodedRequest,
    rng: &mut dyn RngCore,
) -> Result<Vec<u8>, ProtocolError> {
    let code = parse_query(&request.request_text).ok_or_else(|| {
        ProtocolError::UnknownCategory(String::from_utf8_lossy(&request.request_text).into_owned())
    })?;
    let category = code_category(code).expect("parse_query checked the pattern");
    let order = store
        .get_order(category)
        .ok_or_else(|| ProtocolError::UnknownCategory(code.into()))?;

    let source_key = store
        .public_key(&request.src)
        .map_err(|_| ProtocolError::UnknownAgency(request.src.as_str().into()))?;
    let level = store
        .get_trust(&request.src, &identity.id, category)
        .map_err(|_| ProtocolError::UnknownAgency(request.src.as_str().into()))?;
    let mapping = store
        .get_mapping(&request.src, &identity.id)
        .ok_or_else(|| ProtocolError::UnknownAgency(request.src.as_str().into()))?;

    let mapping_value = compute_mapping(mapping, &request.random_set);
    let available = store.get_info(&identity.id, code).unwrap_or(&[]);
    let items = select_shared(available, level, order);

    let preimage =
        wire::encode_preimage_response(&request.nonce_cipher, mapping_value, &items)?;
    let plain = wire::ResponsePlain {
        nonce_cipher: request.nonce_cipher.clone(),
        mapping_value,
        items,
        digest: md5_digest(&preimage),
    };
    let bytes = wire::encode_response(&plain)?;
    Ok(public_encrypt(&bytes, source_key, rng))
}
