//! One honest exchange, stage by stage: CIA asks FBI for the items filed
//! under terrorist code 98LetT1.
//!
//! Run with: cargo run --example handshake

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use trustshare::crypto::generate_keypair;
use trustshare::filter::SelectionOrder;
use trustshare::mapping::MappingFunctionSpec;
use trustshare::source::{build_request, validate_response};
use trustshare::store::{TrustRecord, TrustStore};
use trustshare::target::{build_response, query_text, validate_request};
use trustshare::types::{AgencyId, AgencyIdentity, AgencyRole};

fn main() {
    let mut rng = ChaCha20Rng::seed_from_u64(42);
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

    // FBI trusts CIA at level 9 for the 98Let category; the pair shares the
    // mapping function "+*".
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

    // Source side: structure S_Req and keep the session state.
    let (request, session) =
        build_request(&cia, &store, &fbi.id, &query_text("98LetT1"), 4, &mut rng).unwrap();
    println!("S_Req: {} bytes, random set {:?}", request.len(), session.random_set.values());

    // Target side: authenticate, integrity-check, build T_Res.
    let decoded = validate_request(&fbi, &store, &request).unwrap();
    println!(
        "request from {} accepted (auth={}, integrity={})",
        decoded.src, decoded.auth_ok, decoded.integrity_ok
    );
    let response = build_response(&fbi, &store, &decoded, &mut rng).unwrap();
    println!("T_Res: {} bytes", response.len());

    // Source side: all three verdicts must hold.
    let validated = validate_response(&session, &cia, &spec, &response).unwrap();
    println!(
        "verdicts: integrity={}, target={}, session={}",
        validated.verdicts.integrity,
        validated.verdicts.target_authentic,
        validated.verdicts.session_match
    );
    let items: Vec<String> =
        validated.items.iter().map(|i| String::from_utf8_lossy(i).into_owned()).collect();
    println!("shared items ({}): {}", items.len(), items.join(", "));
}
