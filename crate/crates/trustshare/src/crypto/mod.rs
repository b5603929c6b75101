//! Asymmetric transforms with the textbook two-way property, the hybrid
//! message envelope, MD5 digests, and the CA stub that provisions keypairs.

mod envelope;
mod keyfile;
mod md5;
mod rsa;

pub use envelope::{private_decrypt, private_encrypt, public_decrypt, public_encrypt};
pub use keyfile::{
    load_private_key, load_public_key, provision_keypair, public_key_bytes,
    public_key_from_bytes, save_private_key, save_public_key,
};
pub use md5::{md5_digest, Digest};
pub use rsa::{generate_keypair, KeyPair, PrivateKey, PublicKey, MIN_MODULUS_BITS};
