//! Shared fixtures for the unit tests.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::crypto::generate_keypair;
use crate::filter::SelectionOrder;
use crate::mapping::MappingFunctionSpec;
use crate::store::{TrustRecord, TrustStore};
use crate::types::{AgencyId, AgencyIdentity, AgencyRole};

pub struct TwoAgencyFixture {
    pub store: TrustStore,
    pub source: AgencyIdentity,
    pub target: AgencyIdentity,
}

/// CIA asking FBI about `98LetT1` with trust level 9, mapping `+*`.
pub fn two_agency_fixture(seed: u64) -> TwoAgencyFixture {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut store = TrustStore::new();
    let mut identity = |name: &str| {
        let id = AgencyId::new(name).unwrap();
        let keypair = generate_keypair(1024, &mut rng).unwrap();
        store
            .register_agency(id.clone(), AgencyRole::IntelligenceAgency, Some(keypair.public_part.clone()))
            .unwrap();
        AgencyIdentity { id, keypair, role: AgencyRole::IntelligenceAgency }
    };
    let source = identity("CIA");
    let target = identity("FBI");

    store
        .set_trust(TrustRecord {
            source: source.id.clone(),
            target: target.id.clone(),
            category: "98Let".into(),
            level: 9,
        })
        .unwrap();
    store
        .set_mapping(&source.id, &target.id, MappingFunctionSpec::parse("+*").unwrap())
        .unwrap();
    store
        .set_info(
            &target.id,
            "98LetT1",
            (11..=20u32).map(|v| v.to_string().into_bytes()).collect(),
        )
        .unwrap();
    store.set_order("98Let", SelectionOrder::new(vec![5, 2, 4, 7, 1, 0, 8, 9, 3, 6]).unwrap());

    TwoAgencyFixture { store, source, target }
}
