//! Builders for the reference sharing-table deployment: four agencies, ten
//! trust records, one mapping function per communicating pair, derived
//! selection orders and the per-target repositories.

use rand::RngCore;

use crate::crypto::generate_keypair;
use crate::error::CryptoError;
use crate::filter::{derive_orders, ObservedRow};
use crate::mapping::MappingFunctionSpec;
use crate::store::{TrustRecord, TrustStore};
use crate::table1;
use crate::types::{AgencyId, AgencyIdentity, AgencyRole};

/// Distinct operator lists per communicating pair, normalized order.
const PAIR_MAPPINGS: [(&str, &str, &str); 5] = [
    ("CIA", "FBI", "+*"),
    ("CIA", "ISI", "+-"),
    ("CIA", "RAW", "*+"),
    ("FBI", "ISI", "+/"),
    ("FBI", "RAW", "/+"),
];

/// Builds the sharing-table store without any public keys provisioned.
pub fn table1_store() -> TrustStore {
    let mut store = TrustStore::new();
    for id in ["CIA", "FBI", "ISI", "RAW"] {
        store
            .register_agency(
                AgencyId::new(id).unwrap(),
                AgencyRole::IntelligenceAgency,
                None,
            )
            .unwrap();
    }

    for row in table1::rows() {
        store
            .set_trust(TrustRecord {
                source: AgencyId::new(row.source).unwrap(),
                target: AgencyId::new(row.target).unwrap(),
                category: row.category().to_string(),
                level: row.trust_level(),
            })
            .unwrap();
        store
            .set_info(
                &AgencyId::new(row.target).unwrap(),
                row.code,
                row.available_items(),
            )
            .unwrap();
    }

    for (a, b, ops) in PAIR_MAPPINGS {
        store
            .set_mapping(
                &AgencyId::new(a).unwrap(),
                &AgencyId::new(b).unwrap(),
                MappingFunctionSpec::parse(ops).unwrap(),
            )
            .unwrap();
    }

    let observed: Vec<ObservedRow> = table1::rows()
        .iter()
        .map(|r| ObservedRow {
            category: r.category().to_string(),
            available: r.available_items(),
            shared: r.shared_items(),
        })
        .collect();
    for (category, order) in derive_orders(&observed).expect("table rows are consistent") {
        store.set_order(&category, order);
    }

    store
}

/// Provisions a keypair for every registered agency, writes the public parts
/// into the store, and returns the full identities.
pub fn provision_identities(
    store: &mut TrustStore,
    bits: u32,
    rng: &mut dyn RngCore,
) -> Result<Vec<AgencyIdentity>, CryptoError> {
    let ids: Vec<AgencyId> = store.agency_ids().cloned().collect();
    let mut identities = Vec::with_capacity(ids.len());
    for id in ids {
        let keypair = generate_keypair(bits, rng)?;
        store
            .set_public_key(&id, keypair.public_part.clone())
            .expect("id came from this store");
        let role = store.agency_role(&id).expect("id came from this store");
        identities.push(AgencyIdentity { id, keypair, role });
    }
    Ok(identities)
}
