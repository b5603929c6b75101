//! Flips single bytes of an honest request and response and shows which
//! error each mutation lands on. No mutation is ever silently accepted.
//!
//! Run with: cargo run --example tamper_rejection

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use trustshare::crypto::generate_keypair;
use trustshare::filter::SelectionOrder;
use trustshare::mapping::MappingFunctionSpec;
use trustshare::sim::mutate;
use trustshare::source::{build_request, validate_response};
use trustshare::store::{TrustRecord, TrustStore};
use trustshare::target::{build_response, query_text, validate_request};
use trustshare::types::{AgencyId, AgencyIdentity, AgencyRole};

fn main() {
    let mut rng = ChaCha20Rng::seed_from_u64(99);
    let mut store = TrustStore::new();
    let mut enroll = |name: &str| {
        let id = AgencyId::new(name).unwrap();
        let keypair = generate_keypair(1024, &mut rng).unwrap();
        store
            .register_agency(
                id.clone(),
                AgencyRole::IntelligenceAgency,
                Some(keypair.public_part.clone()),
            )
            .unwrap();
        AgencyIdentity { id, keypair, role: AgencyRole::IntelligenceAgency }
    };
    let cia = enroll("CIA");
    let fbi = enroll("FBI");
    store
        .set_trust(TrustRecord {
            source: cia.id.clone(),
            target: fbi.id.clone(),
            category: "98Let".into(),
            level: 9,
        })
        .unwrap();
    let spec = MappingFunctionSpec::parse("+*").unwrap();
    store.set_mapping(&cia.id, &fbi.id, spec.clone()).unwrap();
    store
        .set_info(&fbi.id, "98LetT1", (11..=20u32).map(|v| v.to_string().into_bytes()).collect())
        .unwrap();
    store.set_order("98Let", SelectionOrder::new(vec![5, 2, 4, 7, 1, 0, 8, 9, 3, 6]).unwrap());

    let (request, session) =
        build_request(&cia, &store, &fbi.id, &query_text("98LetT1"), 4, &mut rng).unwrap();
    let decoded = validate_request(&fbi, &store, &request).unwrap();
    let response = build_response(&fbi, &store, &decoded, &mut rng).unwrap();

    let mut request_kinds: BTreeMap<&'static str, usize> = BTreeMap::new();
    let mut response_kinds: BTreeMap<&'static str, usize> = BTreeMap::new();
    let trials = 200;
    for _ in 0..trials {
        let offset = rng.gen_range(0..request.len());
        let mask = rng.gen_range(1..=255u8);
        let mutated = mutate(&request, offset, mask).unwrap();
        match validate_request(&fbi, &store, &mutated)
            .and_then(|d| build_response(&fbi, &store, &d, &mut rng))
            .and_then(|r| validate_response(&session, &cia, &spec, &r))
        {
            Err(e) => *request_kinds.entry(e.kind()).or_default() += 1,
            Ok(_) => println!("SILENT ACCEPTANCE at request offset {offset}"),
        }

        let offset = rng.gen_range(0..response.len());
        let mutated = mutate(&response, offset, mask).unwrap();
        match validate_response(&session, &cia, &spec, &mutated) {
            Err(e) => *response_kinds.entry(e.kind()).or_default() += 1,
            Ok(_) => println!("SILENT ACCEPTANCE at response offset {offset}"),
        }
    }

    println!("{trials} single-byte request mutations:");
    for (kind, count) in &request_kinds {
        println!("  {kind:<18} {count}");
    }
    println!("{trials} single-byte response mutations:");
    for (kind, count) in &response_kinds {
        println!("  {kind:<18} {count}");
    }
}
