//! Raw RSA transforms with the textbook two-way property: a block encrypted
//! with either half of the keypair decrypts with the other half.
//!
//! Only [`super::envelope`] applies these to whole messages; raw blocks carry
//! nothing but freshly generated session secrets.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::RngCore;

use crate::error::CryptoError;

pub const MIN_MODULUS_BITS: u32 = 1024;

const PUBLIC_EXPONENT: u32 = 65537;

/// Public half of a keypair: modulus and public exponent.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PublicKey {
    pub(crate) modulus: BigUint,
    pub(crate) exponent: BigUint,
}

/// Private half of a keypair: modulus and private exponent.
#[derive(Clone, PartialEq, Eq)]
pub struct PrivateKey {
    pub(crate) modulus: BigUint,
    pub(crate) exponent: BigUint,
}

impl std::fmt::Debug for PrivateKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        // The private exponent never appears in debug output.
        f.debug_struct("PrivateKey")
            .field("modulus_bits", &self.modulus.bits())
            .finish_non_exhaustive()
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct KeyPair {
    pub public_part: PublicKey,
    pub private_part: PrivateKey,
}

impl PublicKey {
    pub fn modulus_bits(&self) -> u64 {
        self.modulus.bits()
    }

    /// Byte length of one raw block under this modulus.
    pub fn block_len(&self) -> usize {
        ((self.modulus.bits() + 7) / 8) as usize
    }
}

impl PrivateKey {
    pub fn block_len(&self) -> usize {
        ((self.modulus.bits() + 7) / 8) as usize
    }
}

/// One direction of the raw transform; `transform_block` is its own inverse
/// under the complementary key half.
fn transform_block(value: &[u8], modulus: &BigUint, exponent: &BigUint, block_len: usize) -> Vec<u8> {
    let m = BigUint::from_bytes_be(value);
    debug_assert!(m < *modulus);
    let c = m.modpow(exponent, modulus);
    let mut out = c.to_bytes_be();
    // Left-pad to the fixed block length.
    while out.len() < block_len {
        out.insert(0, 0);
    }
    out
}

pub fn public_transform(key: &PublicKey, block: &[u8]) -> Vec<u8> {
    transform_block(block, &key.modulus, &key.exponent, key.block_len())
}

pub fn private_transform(key: &PrivateKey, block: &[u8]) -> Vec<u8> {
    transform_block(block, &key.modulus, &key.exponent, key.block_len())
}

/// Decryption-side transform: a block from the wire may not represent a value
/// below the modulus, which is a decryption failure rather than a panic.
fn checked_transform(
    block: &[u8],
    modulus: &BigUint,
    exponent: &BigUint,
    block_len: usize,
) -> Result<Vec<u8>, CryptoError> {
    if block.len() != block_len || BigUint::from_bytes_be(block) >= *modulus {
        return Err(CryptoError::Decrypt);
    }
    Ok(transform_block(block, modulus, exponent, block_len))
}

pub fn checked_public_transform(key: &PublicKey, block: &[u8]) -> Result<Vec<u8>, CryptoError> {
    checked_transform(block, &key.modulus, &key.exponent, key.block_len())
}

pub fn checked_private_transform(key: &PrivateKey, block: &[u8]) -> Result<Vec<u8>, CryptoError> {
    checked_transform(block, &key.modulus, &key.exponent, key.block_len())
}

/// Generates a keypair with a modulus of exactly `bits` bits.
///
/// Rejects `bits < 1024`: anything smaller cannot safely hold the wrapped
/// session secret of the hybrid envelope.
pub fn generate_keypair(bits: u32, rng: &mut dyn RngCore) -> Result<KeyPair, CryptoError> {
    if bits < MIN_MODULUS_BITS {
        return Err(CryptoError::WeakModulus { bits });
    }
    let e = BigUint::from(PUBLIC_EXPONENT);
    loop {
        let p = random_prime(bits / 2, rng);
        let q = random_prime(bits - bits / 2, rng);
        if p == q {
            continue;
        }
        let n = &p * &q;
        if n.bits() != u64::from(bits) {
            continue;
        }
        let phi = (&p - 1u32) * (&q - 1u32);
        let Some(d) = mod_inverse(&e, &phi) else {
            continue;
        };
        return Ok(KeyPair {
            public_part: PublicKey {
                modulus: n.clone(),
                exponent: e,
            },
            private_part: PrivateKey {
                modulus: n,
                exponent: d,
            },
        });
    }
}

fn mod_inverse(a: &BigUint, m: &BigUint) -> Option<BigUint> {
    let a = BigInt::from(a.clone());
    let m = BigInt::from(m.clone());
    let ext = a.extended_gcd(&m);
    if !ext.gcd.is_one() {
        return None;
    }
    let mut x = ext.x % &m;
    if x.is_negative() {
        x += &m;
    }
    Some(x.to_biguint().expect("reduced inverse is non-negative"))
}

/// Draws random odd candidates with the top two bits set until one passes
/// Miller-Rabin. Setting the top two bits keeps p*q at full width.
fn random_prime(bits: u32, rng: &mut dyn RngCore) -> BigUint {
    let byte_len = ((bits + 7) / 8) as usize;
    loop {
        let mut bytes = vec![0u8; byte_len];
        rng.fill_bytes(&mut bytes);
        let mut candidate = BigUint::from_bytes_be(&bytes);
        let top = BigUint::one() << (bits - 1);
        let second = BigUint::one() << (bits - 2);
        candidate = (candidate >> (byte_len as u32 * 8 - bits)) | top | second;
        candidate |= BigUint::one();
        if is_probable_prime(&candidate, rng) {
            return candidate;
        }
    }
}

const SMALL_PRIMES: [u32; 30] = [
    3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
    101, 103, 107, 109, 113, 127,
];

fn is_probable_prime(n: &BigUint, rng: &mut dyn RngCore) -> bool {
    for p in SMALL_PRIMES {
        let p = BigUint::from(p);
        if n == &p {
            return true;
        }
        if (n % &p).is_zero() {
            return false;
        }
    }
    miller_rabin(n, 24, rng)
}

fn miller_rabin(n: &BigUint, rounds: usize, rng: &mut dyn RngCore) -> bool {
    let one = BigUint::one();
    let n_minus_1 = n - &one;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;

    let byte_len = ((n.bits() + 7) / 8) as usize;
    'witness: for _ in 0..rounds {
        let mut bytes = vec![0u8; byte_len];
        rng.fill_bytes(&mut bytes);
        let a = BigUint::from_bytes_be(&bytes) % &n_minus_1;
        if a < BigUint::from(2u32) {
            continue;
        }
        let mut x = a.modpow(&d, n);
        if x == one || x == n_minus_1 {
            continue;
        }
        for _ in 0..s.saturating_sub(1) {
            x = (&x * &x) % n;
            if x == n_minus_1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}
