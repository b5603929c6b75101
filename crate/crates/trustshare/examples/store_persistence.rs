//! Builds the reference store, saves it as tagged text, reloads it and
//! verifies the round trip is exact. Pass a path to keep the file.
//!
//! Run with: cargo run --example store_persistence [-- <path>]

use trustshare::fixture::table1_store;
use trustshare::store::TrustStore;

fn main() {
    let store = table1_store();
    let text = store.serialize();
    println!("{text}");

    let reloaded = TrustStore::parse(&text).unwrap();
    assert!(reloaded.value_equal(&store));
    assert_eq!(reloaded.serialize(), text, "serialization is canonical");
    eprintln!("round trip exact: {} lines", text.lines().count());

    if let Some(path) = std::env::args().nth(1) {
        store.save(std::path::Path::new(&path)).unwrap();
        eprintln!("written to {path}");
    }
}
