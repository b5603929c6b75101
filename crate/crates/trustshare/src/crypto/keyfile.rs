//! Length-prefixed binary key files, written by the CA stub.
//!
//! Public file:  `TSPB` | u32 len | modulus | u32 len | exponent
//! Private file: `TSPV` | u32 len | modulus | u32 len | exponent
//!
//! All lengths big-endian, integers as minimal big-endian bytes.

use std::fs;
use std::path::{Path, PathBuf};

use num_bigint::BigUint;
use rand::RngCore;

use super::rsa::{generate_keypair, KeyPair, PrivateKey, PublicKey};
use crate::error::CryptoError;

const PUBLIC_MAGIC: &[u8; 4] = b"TSPB";
const PRIVATE_MAGIC: &[u8; 4] = b"TSPV";

fn encode(magic: &[u8; 4], modulus: &BigUint, exponent: &BigUint) -> Vec<u8> {
    let mut out = magic.to_vec();
    for part in [modulus, exponent] {
        let bytes = part.to_bytes_be();
        out.extend_from_slice(&(bytes.len() as u32).to_be_bytes());
        out.extend_from_slice(&bytes);
    }
    out
}

fn decode(magic: &[u8; 4], data: &[u8]) -> Result<(BigUint, BigUint), CryptoError> {
    let rest = data
        .strip_prefix(magic.as_slice())
        .ok_or(CryptoError::MalformedKeyFile("bad magic"))?;
    let mut rest = rest;
    let mut take = || -> Result<BigUint, CryptoError> {
        if rest.len() < 4 {
            return Err(CryptoError::MalformedKeyFile("truncated length"));
        }
        let len = u32::from_be_bytes(rest[..4].try_into().unwrap()) as usize;
        rest = &rest[4..];
        if rest.len() < len {
            return Err(CryptoError::MalformedKeyFile("truncated integer"));
        }
        let (bytes, tail) = rest.split_at(len);
        rest = tail;
        Ok(BigUint::from_bytes_be(bytes))
    };
    let modulus = take()?;
    let exponent = take()?;
    if !rest.is_empty() {
        return Err(CryptoError::MalformedKeyFile("trailing bytes"));
    }
    Ok((modulus, exponent))
}

pub fn public_key_bytes(key: &PublicKey) -> Vec<u8> {
    encode(PUBLIC_MAGIC, &key.modulus, &key.exponent)
}

pub fn public_key_from_bytes(data: &[u8]) -> Result<PublicKey, CryptoError> {
    let (modulus, exponent) = decode(PUBLIC_MAGIC, data)?;
    Ok(PublicKey { modulus, exponent })
}

pub fn save_public_key(key: &PublicKey, path: &Path) -> Result<(), CryptoError> {
    fs::write(path, public_key_bytes(key))?;
    Ok(())
}

pub fn load_public_key(path: &Path) -> Result<PublicKey, CryptoError> {
    public_key_from_bytes(&fs::read(path)?)
}

pub fn save_private_key(key: &PrivateKey, path: &Path) -> Result<(), CryptoError> {
    fs::write(path, encode(PRIVATE_MAGIC, &key.modulus, &key.exponent))?;
    Ok(())
}

pub fn load_private_key(path: &Path) -> Result<PrivateKey, CryptoError> {
    let (modulus, exponent) = decode(PRIVATE_MAGIC, &fs::read(path)?)?;
    Ok(PrivateKey { modulus, exponent })
}

/// CA stub: provisions a fresh keypair for `agency_id` and writes
/// `<id>.pub` / `<id>.key` under `dir`.
pub fn provision_keypair(
    dir: &Path,
    agency_id: &str,
    bits: u32,
    rng: &mut dyn RngCore,
) -> Result<(KeyPair, PathBuf, PathBuf), CryptoError> {
    let keypair = generate_keypair(bits, rng)?;
    fs::create_dir_all(dir)?;
    let pub_path = dir.join(format!("{agency_id}.pub"));
    let key_path = dir.join(format!("{agency_id}.key"));
    save_public_key(&keypair.public_part, &pub_path)?;
    save_private_key(&keypair.private_part, &key_path)?;
    Ok((keypair, pub_path, key_path))
}
