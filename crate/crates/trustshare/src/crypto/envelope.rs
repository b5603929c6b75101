//! Hybrid envelope: a fresh 32-byte session secret is wrapped with one raw
//! asymmetric block, and the payload is XORed with a stream keystream derived
//! from that secret. This keeps the "encrypt the whole message with the peer's
//! key" semantics at any payload size.
//!
//! Layout (lengths 4-byte big-endian):
//!
//! ```text
//! u32 len | wrapped secret block (one raw asymmetric block)
//! u32 len | body (payload XOR keystream(secret))
//! ```
//!
//! The wrapped value is `secret(32) || md5(secret)(16)`; the trailing digest
//! lets decryption detect a wrong key before touching the body.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::md5::md5_digest;
use super::rsa::{
    checked_private_transform, checked_public_transform, private_transform, public_transform,
    PrivateKey, PublicKey,
};
use crate::error::CryptoError;

const SECRET_LEN: usize = 32;
const WRAP_LEN: usize = SECRET_LEN + 16;

fn keystream_xor(secret: &[u8; SECRET_LEN], data: &[u8]) -> Vec<u8> {
    let mut rng = ChaCha20Rng::from_seed(*secret);
    let mut stream = vec![0u8; data.len()];
    rng.fill_bytes(&mut stream);
    stream.iter_mut().zip(data).for_each(|(s, d)| *s ^= d);
    stream
}

fn fresh_secret(rng: &mut dyn RngCore) -> [u8; SECRET_LEN] {
    let mut secret = [0u8; SECRET_LEN];
    rng.fill_bytes(&mut secret);
    secret
}

fn wrap_value(secret: &[u8; SECRET_LEN]) -> Vec<u8> {
    let mut v = secret.to_vec();
    v.extend_from_slice(md5_digest(secret).as_bytes());
    v
}

fn assemble(wrapped: Vec<u8>, body: Vec<u8>) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + wrapped.len() + body.len());
    out.extend_from_slice(&(wrapped.len() as u32).to_be_bytes());
    out.extend_from_slice(&wrapped);
    out.extend_from_slice(&(body.len() as u32).to_be_bytes());
    out.extend_from_slice(&body);
    out
}

fn split(cipher: &[u8]) -> Result<(&[u8], &[u8]), CryptoError> {
    let take = |buf: &mut &[u8]| -> Result<usize, CryptoError> {
        if buf.len() < 4 {
            return Err(CryptoError::MalformedEnvelope("truncated length prefix"));
        }
        let len = u32::from_be_bytes(buf[..4].try_into().unwrap()) as usize;
        *buf = &buf[4..];
        if buf.len() < len {
            return Err(CryptoError::MalformedEnvelope("truncated field"));
        }
        Ok(len)
    };
    let mut rest = cipher;
    let wlen = take(&mut rest)?;
    let (wrapped, mut rest) = rest.split_at(wlen);
    let blen = take(&mut rest)?;
    let (body, rest) = rest.split_at(blen);
    if !rest.is_empty() {
        return Err(CryptoError::MalformedEnvelope("trailing bytes"));
    }
    Ok((wrapped, body))
}

fn unwrap_secret(unwrapped_block: &[u8]) -> Result<[u8; SECRET_LEN], CryptoError> {
    if unwrapped_block.len() < WRAP_LEN {
        return Err(CryptoError::Decrypt);
    }
    let (padding, value) = unwrapped_block.split_at(unwrapped_block.len() - WRAP_LEN);
    if padding.iter().any(|&b| b != 0) {
        return Err(CryptoError::Decrypt);
    }
    let (secret, check) = value.split_at(SECRET_LEN);
    if md5_digest(secret).as_bytes() != check {
        return Err(CryptoError::Decrypt);
    }
    Ok(secret.try_into().unwrap())
}

/// Encrypts `payload` so that only the matching private part can open it.
pub fn public_encrypt(payload: &[u8], key: &PublicKey, rng: &mut dyn RngCore) -> Vec<u8> {
    let secret = fresh_secret(rng);
    let wrapped = public_transform(key, &wrap_value(&secret));
    assemble(wrapped, keystream_xor(&secret, payload))
}

/// Encrypts `payload` under the private part; opening it with the public part
/// authenticates the holder of the private key.
pub fn private_encrypt(payload: &[u8], key: &PrivateKey, rng: &mut dyn RngCore) -> Vec<u8> {
    let secret = fresh_secret(rng);
    let wrapped = private_transform(key, &wrap_value(&secret));
    assemble(wrapped, keystream_xor(&secret, payload))
}

/// Opens an envelope produced by [`private_encrypt`] under the matching key.
pub fn public_decrypt(cipher: &[u8], key: &PublicKey) -> Result<Vec<u8>, CryptoError> {
    let (wrapped, body) = split(cipher)?;
    let secret = unwrap_secret(&checked_public_transform(key, wrapped)?)?;
    Ok(keystream_xor(&secret, body))
}

/// Opens an envelope produced by [`public_encrypt`] under the matching key.
pub fn private_decrypt(cipher: &[u8], key: &PrivateKey) -> Result<Vec<u8>, CryptoError> {
    let (wrapped, body) = split(cipher)?;
    let secret = unwrap_secret(&checked_private_transform(key, wrapped)?)?;
    Ok(keystream_xor(&secret, body))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crypto::generate_keypair;
    use rand::SeedableRng;

    fn keypair(seed: u64) -> crate::crypto::KeyPair {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        generate_keypair(1024, &mut rng).unwrap()
    }

    #[test]
    fn round_trips_both_key_orders() {
        let kp = keypair(10);
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        let boundary = kp.public_part.block_len();
        for len in [0usize, 1, boundary, 1 << 20] {
            let payload = vec![0xA5u8; len];
            let c = public_encrypt(&payload, &kp.public_part, &mut rng);
            assert_eq!(private_decrypt(&c, &kp.private_part).unwrap(), payload);
            let c = private_encrypt(&payload, &kp.private_part, &mut rng);
            assert_eq!(public_decrypt(&c, &kp.public_part).unwrap(), payload);
        }
    }

    #[test]
    fn fresh_secret_randomizes_ciphertext() {
        let kp = keypair(12);
        let mut rng = ChaCha20Rng::seed_from_u64(13);
        let m = b"Request";
        let c1 = public_encrypt(m, &kp.public_part, &mut rng);
        let c2 = public_encrypt(m, &kp.public_part, &mut rng);
        assert_ne!(c1, c2);
    }

    #[test]
    fn wrong_key_is_a_decrypt_error() {
        let kp1 = keypair(14);
        let kp2 = keypair(15);
        let mut rng = ChaCha20Rng::seed_from_u64(16);
        let c = public_encrypt(b"Request", &kp1.public_part, &mut rng);
        assert!(matches!(
            private_decrypt(&c, &kp2.private_part),
            Err(CryptoError::Decrypt)
        ));
        let c = private_encrypt(b"Request", &kp1.private_part, &mut rng);
        assert!(matches!(
            public_decrypt(&c, &kp2.public_part),
            Err(CryptoError::Decrypt)
        ));
    }

    #[test]
    fn ciphertext_grows_linearly_past_one_block() {
        let kp = keypair(17);
        let mut rng = ChaCha20Rng::seed_from_u64(18);
        let base = public_encrypt(&vec![0u8; 1000], &kp.public_part, &mut rng).len();
        let bigger = public_encrypt(&vec![0u8; 2000], &kp.public_part, &mut rng).len();
        assert_eq!(bigger - base, 1000);
    }

    #[test]
    fn truncation_is_malformed() {
        let kp = keypair(19);
        let mut rng = ChaCha20Rng::seed_from_u64(20);
        let c = public_encrypt(b"Request", &kp.public_part, &mut rng);
        for cut in [0, 3, c.len() - 1] {
            assert!(matches!(
                private_decrypt(&c[..cut], &kp.private_part),
                Err(CryptoError::MalformedEnvelope(_))
            ));
        }
    }
}
