//! The crypto layer on its own: keypair provisioning, the two-way hybrid
//! envelope, and MD5 digests.
//!
//! Run with: cargo run --example crypto_envelope

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use trustshare::crypto::{
    generate_keypair, md5_digest, private_decrypt, private_encrypt, public_decrypt, public_encrypt,
};

fn main() {
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    let kp = generate_keypair(1024, &mut rng).unwrap();
    println!("modulus: {} bits", kp.public_part.modulus_bits());

    let message = b"Request for information on terrorist code 98LetT1";
    println!("md5(message) = {}", md5_digest(message).to_hex());

    // Confidentiality: public in, private out.
    let cipher = public_encrypt(message, &kp.public_part, &mut rng);
    println!("public_encrypt: {} -> {} bytes", message.len(), cipher.len());
    assert_eq!(private_decrypt(&cipher, &kp.private_part).unwrap(), message);

    // Authenticity: private in, public out.
    let signed = private_encrypt(message, &kp.private_part, &mut rng);
    assert_eq!(public_decrypt(&signed, &kp.public_part).unwrap(), message);
    println!("both key orders round-trip");

    // A fresh session secret randomizes every encryption.
    let again = public_encrypt(message, &kp.public_part, &mut rng);
    assert_ne!(cipher, again);

    // The wrong key fails loudly, not with garbage output.
    let other = generate_keypair(1024, &mut rng).unwrap();
    let err = private_decrypt(&cipher, &other.private_part).unwrap_err();
    println!("wrong key: {err}");
}
