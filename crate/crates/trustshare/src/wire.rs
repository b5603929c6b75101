//! Canonical byte layout for every protocol symbol.
//!
//! The same framing serves as the wire format (inside the hybrid envelope)
//! and as the MD5 digest preimage, so no digest is ever computed over an
//! ad-hoc concatenation. All multi-byte integers are big-endian:
//!
//! * variable fields carry a 4-byte length prefix,
//! * the random set is a 2-byte count followed by 8-byte values,
//! * item lists are a 2-byte count of 4-byte-length-prefixed items,
//! * the mapping value is a raw binary64.
//!
//! The full layout is documented in `docs/wire-format.md`.

use crate::crypto::Digest;
use crate::error::WireError;
use crate::types::{AgencyId, RandomSet};

/// Decrypted outer request: what `S_Req` encrypts (fields `R_V`, `src id`,
/// `SA_Data`).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RequestOuter {
    pub nonce_cipher: Vec<u8>,
    pub src: AgencyId,
    pub signed_blob: Vec<u8>,
}

/// What the source signs with its private part (`S_Data`).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SignedPayload {
    pub random_set: RandomSet,
    pub request_text: Vec<u8>,
    pub digest: Digest,
}

/// Decrypted target response (`ST_Res`): `TE_Data` fields plus digest.
#[derive(Clone, PartialEq, Debug)]
pub struct ResponsePlain {
    pub nonce_cipher: Vec<u8>,
    pub mapping_value: f64,
    pub items: Vec<Vec<u8>>,
    pub digest: Digest,
}

struct Writer(Vec<u8>);

impl Writer {
    fn new() -> Writer {
        Writer(Vec::new())
    }

    fn field(&mut self, bytes: &[u8]) -> Result<(), WireError> {
        let len = u32::try_from(bytes.len())
            .map_err(|_| WireError::FieldTooLong { len: bytes.len() })?;
        self.0.extend_from_slice(&len.to_be_bytes());
        self.0.extend_from_slice(bytes);
        Ok(())
    }

    fn random_set(&mut self, set: &RandomSet) -> Result<(), WireError> {
        let mut block = Vec::with_capacity(2 + 8 * set.len());
        block.extend_from_slice(&(set.len() as u16).to_be_bytes());
        for &v in set.values() {
            block.extend_from_slice(&v.to_be_bytes());
        }
        self.field(&block)
    }
}

struct Reader<'a>(&'a [u8]);

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], WireError> {
        if self.0.len() < n {
            return Err(WireError::Malformed("truncated message"));
        }
        let (head, rest) = self.0.split_at(n);
        self.0 = rest;
        Ok(head)
    }

    fn field(&mut self) -> Result<&'a [u8], WireError> {
        let len = u32::from_be_bytes(self.take(4)?.try_into().unwrap()) as usize;
        self.take(len)
    }

    fn random_set(&mut self) -> Result<RandomSet, WireError> {
        let block = self.field()?;
        if block.len() < 2 {
            return Err(WireError::Malformed("truncated random set"));
        }
        let count = u16::from_be_bytes(block[..2].try_into().unwrap()) as usize;
        if block.len() != 2 + 8 * count {
            return Err(WireError::Malformed("random set length mismatch"));
        }
        let values = block[2..]
            .chunks_exact(8)
            .map(|c| u64::from_be_bytes(c.try_into().unwrap()))
            .collect();
        RandomSet::new(values)
    }

    fn finish(self) -> Result<(), WireError> {
        if self.0.is_empty() {
            Ok(())
        } else {
            Err(WireError::Malformed("trailing bytes"))
        }
    }
}

/// `SE_Data = R_V + src id + [S_R] + Request`: the request digest
/// preimage.
pub fn encode_preimage_request(
    nonce_cipher: &[u8],
    src: &AgencyId,
    random_set: &RandomSet,
    request_text: &[u8],
) -> Result<Vec<u8>, WireError> {
    let mut w = Writer::new();
    w.field(nonce_cipher)?;
    w.field(src.as_str().as_bytes())?;
    w.random_set(random_set)?;
    w.field(request_text)?;
    Ok(w.0)
}

/// `TE_Data = [R_V + M'_val + Response]`: the response digest preimage.
pub fn encode_preimage_response(
    nonce_cipher: &[u8],
    mapping_value: f64,
    items: &[Vec<u8>],
) -> Result<Vec<u8>, WireError> {
    if !mapping_value.is_finite() {
        return Err(WireError::NonFiniteMapping);
    }
    let mut w = Writer::new();
    w.field(nonce_cipher)?;
    w.0.extend_from_slice(&mapping_value.to_bits().to_be_bytes());
    let count = u16::try_from(items.len())
        .map_err(|_| WireError::FieldTooLong { len: items.len() })?;
    w.0.extend_from_slice(&count.to_be_bytes());
    for item in items {
        w.field(item)?;
    }
    Ok(w.0)
}

/// `R_V + src id + SA_Data`: what the outer request envelope encrypts.
pub fn encode_request(outer: &RequestOuter) -> Result<Vec<u8>, WireError> {
    let mut w = Writer::new();
    w.field(&outer.nonce_cipher)?;
    w.field(outer.src.as_str().as_bytes())?;
    w.field(&outer.signed_blob)?;
    Ok(w.0)
}

pub fn decode_request(bytes: &[u8]) -> Result<RequestOuter, WireError> {
    let mut r = Reader(bytes);
    let nonce_cipher = r.field()?.to_vec();
    let src_bytes = r.field()?;
    let src = std::str::from_utf8(src_bytes)
        .ok()
        .and_then(|s| AgencyId::new(s).ok())
        .ok_or(WireError::Malformed("invalid source id"))?;
    let signed_blob = r.field()?.to_vec();
    r.finish()?;
    Ok(RequestOuter {
        nonce_cipher,
        src,
        signed_blob,
    })
}

/// `S_Data = S_R + Request + H_val`: what `SA_Data` signs.
pub fn encode_signed_payload(payload: &SignedPayload) -> Result<Vec<u8>, WireError> {
    let mut w = Writer::new();
    w.random_set(&payload.random_set)?;
    w.field(&payload.request_text)?;
    w.field(payload.digest.as_bytes())?;
    Ok(w.0)
}

pub fn decode_signed_payload(bytes: &[u8]) -> Result<SignedPayload, WireError> {
    let mut r = Reader(bytes);
    let random_set = r.random_set()?;
    let request_text = r.field()?.to_vec();
    let digest = Digest::from_slice(r.field()?)
        .ok_or(WireError::Malformed("digest must be 16 bytes"))?;
    r.finish()?;
    Ok(SignedPayload {
        random_set,
        request_text,
        digest,
    })
}

/// `TE_Data + H_val`: what the response envelope encrypts.
pub fn encode_response(plain: &ResponsePlain) -> Result<Vec<u8>, WireError> {
    let mut out = encode_preimage_response(&plain.nonce_cipher, plain.mapping_value, &plain.items)?;
    out.extend_from_slice(&(plain.digest.as_bytes().len() as u32).to_be_bytes());
    out.extend_from_slice(plain.digest.as_bytes());
    Ok(out)
}

pub fn decode_response(bytes: &[u8]) -> Result<ResponsePlain, WireError> {
    let mut r = Reader(bytes);
    let nonce_cipher = r.field()?.to_vec();
    let mapping_value = f64::from_bits(u64::from_be_bytes(r.take(8)?.try_into().unwrap()));
    if !mapping_value.is_finite() {
        return Err(WireError::Malformed("non-finite mapping value"));
    }
    let count = u16::from_be_bytes(r.take(2)?.try_into().unwrap()) as usize;
    let mut items = Vec::with_capacity(count.min(1024));
    for _ in 0..count {
        items.push(r.field()?.to_vec());
    }
    let digest = Digest::from_slice(r.field()?)
        .ok_or(WireError::Malformed("digest must be 16 bytes"))?;
    r.finish()?;
    Ok(ResponsePlain {
        nonce_cipher,
        mapping_value,
        items,
        digest,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crypto::md5_digest;

    fn agency(id: &str) -> AgencyId {
        AgencyId::new(id).unwrap()
    }

    #[test]
    fn smallest_request_preimage_by_hand() {
        let set = RandomSet::new(vec![1]).unwrap();
        let bytes = encode_preimage_request(&[0x00], &agency("A"), &set, b"").unwrap();
        let expected = [
            0x00, 0x00, 0x00, 0x01, 0x00, // R_V
            0x00, 0x00, 0x00, 0x01, 0x41, // "A"
            0x00, 0x00, 0x00, 0x0A, 0x00, 0x01, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00,
            0x01, // S_R = {1}
            0x00, 0x00, 0x00, 0x00, // empty request
        ];
        assert_eq!(bytes, expected);
        assert_eq!(bytes, encode_preimage_request(&[0x00], &agency("A"), &set, b"").unwrap());
    }

    #[test]
    fn smallest_response_preimage_by_hand() {
        let bytes = encode_preimage_response(&[0x00], 0.0, &[]).unwrap();
        let expected = [
            0x00, 0x00, 0x00, 0x01, 0x00, // R_V
            0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, // binary64 +0.0
            0x00, 0x00, // zero items
        ];
        assert_eq!(bytes, expected);
    }

    // Golden digests produced by an independent Python serializer + hashlib
    // (tools/wire_oracle.py); frozen here.
    #[test]
    fn golden_request_preimage_digest() {
        let set = RandomSet::new(vec![1, 2, 3]).unwrap();
        let bytes = encode_preimage_request(
            &[0xDE, 0xAD, 0xBE, 0xEF],
            &agency("CIA"),
            &set,
            b"QUERY 98LetT1",
        )
        .unwrap();
        assert_eq!(md5_digest(&bytes).to_hex(), "977983fdcdb820ff1eecce292616852e");
    }

    #[test]
    fn golden_response_preimage_digest() {
        let bytes = encode_preimage_response(
            &[0xDE, 0xAD, 0xBE, 0xEF],
            (9.0f64).sin(),
            &[b"16".to_vec(), b"13".to_vec()],
        )
        .unwrap();
        assert_eq!(md5_digest(&bytes).to_hex(), "ca698d03cfffc092cc2f1eec6b451318");
    }

    #[test]
    fn non_finite_mapping_rejected() {
        assert!(matches!(
            encode_preimage_response(&[0x00], f64::NAN, &[]),
            Err(WireError::NonFiniteMapping)
        ));
        assert!(matches!(
            encode_preimage_response(&[0x00], f64::INFINITY, &[]),
            Err(WireError::NonFiniteMapping)
        ));
    }

    #[test]
    fn truncation_is_malformed() {
        let outer = RequestOuter {
            nonce_cipher: vec![1, 2, 3],
            src: agency("CIA"),
            signed_blob: vec![9; 40],
        };
        let bytes = encode_request(&outer).unwrap();
        assert_eq!(decode_request(&bytes).unwrap(), outer);
        assert!(decode_request(&bytes[..bytes.len() - 1]).is_err());
        let mut extended = bytes.clone();
        extended.push(0);
        assert!(decode_request(&extended).is_err());
    }

    #[test]
    fn seeded_round_trip_sweep() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(0x0C0DEC);
        for _ in 0..1000 {
            let n = rng.gen_range(1..=64);
            let set = RandomSet::generate(n, &mut rng).unwrap();
            let text: Vec<u8> = (0..rng.gen_range(0..100)).map(|_| rng.gen()).collect();
            let payload = SignedPayload {
                random_set: set,
                request_text: text,
                digest: md5_digest(b"fixed"),
            };
            let bytes = encode_signed_payload(&payload).unwrap();
            assert_eq!(decode_signed_payload(&bytes).unwrap(), payload);

            let items: Vec<Vec<u8>> = (0..rng.gen_range(0..10))
                .map(|_| (0..rng.gen_range(0..30)).map(|_| rng.gen()).collect())
                .collect();
            let plain = ResponsePlain {
                nonce_cipher: (0..rng.gen_range(1..50)).map(|_| rng.gen()).collect(),
                mapping_value: rng.gen_range(-1.0..1.0),
                items,
                digest: md5_digest(b"fixed"),
            };
            let bytes = encode_response(&plain).unwrap();
            assert_eq!(decode_response(&bytes).unwrap(), plain);
        }
    }

    proptest::proptest! {
        // Injectivity of the request preimage over distinct field tuples.
        #[test]
        fn preimage_injective(
            rv1 in proptest::collection::vec(proptest::prelude::any::<u8>(), 0..20),
            rv2 in proptest::collection::vec(proptest::prelude::any::<u8>(), 0..20),
            t1 in proptest::collection::vec(proptest::prelude::any::<u8>(), 0..20),
            t2 in proptest::collection::vec(proptest::prelude::any::<u8>(), 0..20),
            s1 in proptest::collection::vec(1u64..=1000, 1..5),
            s2 in proptest::collection::vec(1u64..=1000, 1..5),
        ) {
            let set1 = RandomSet::new(s1.clone()).unwrap();
            let set2 = RandomSet::new(s2.clone()).unwrap();
            let a = encode_preimage_request(&rv1, &agency("A"), &set1, &t1).unwrap();
            let b = encode_preimage_request(&rv2, &agency("A"), &set2, &t2).unwrap();
            let same_inputs = rv1 == rv2 && s1 == s2 && t1 == t2;
            proptest::prop_assert_eq!(a == b, same_inputs);
        }
    }
}
