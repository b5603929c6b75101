//! Simulator invariants: determinism, transport equivalence, adversarial
//! fault isolation.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use trustshare::fixture::{provision_identities, table1_store};
use trustshare::sim::{
    run_scenario, ExchangeSpec, MutationRule, Scenario, ScenarioScript, Transport,
};
use trustshare::table1;
use trustshare::types::AgencyId;

fn table1_scenario(seed: u64) -> (trustshare::store::TrustStore, Scenario) {
    let mut store = table1_store();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let agencies = provision_identities(&mut store, 1024, &mut rng).unwrap();
    let script = ScenarioScript {
        exchanges: table1::rows()
            .iter()
            .map(|row| ExchangeSpec {
                source: AgencyId::new(row.source).unwrap(),
                target: AgencyId::new(row.target).unwrap(),
                code: row.code.to_string(),
            })
            .collect(),
        adversary: None,
    };
    (store, Scenario { agencies, script })
}

#[test]
fn fixed_seed_is_deterministic() {
    let (store, scenario) = table1_scenario(400);
    let a = run_scenario(&store, &scenario, Transport::InProcess, 7);
    let b = run_scenario(&store, &scenario, Transport::InProcess, 7);
    assert_eq!(a.fingerprint(), b.fingerprint());
    let c = run_scenario(&store, &scenario, Transport::InProcess, 8);
    assert_ne!(a.fingerprint(), c.fingerprint());
}

#[test]
fn transports_are_equivalent() {
    let (store, scenario) = table1_scenario(401);
    let inproc = run_scenario(&store, &scenario, Transport::InProcess, 9);
    let loopback = run_scenario(&store, &scenario, Transport::LoopbackSocket, 9);
    assert_eq!(inproc.fingerprint(), loopback.fingerprint());
    for (a, b) in inproc.entries.iter().zip(&loopback.entries) {
        assert_eq!(a.verdicts, b.verdicts);
        assert_eq!(a.items, b.items);
        assert_eq!(a.error, b.error);
    }
}

#[test]
fn adversary_faults_are_isolated_to_their_exchange() {
    let (store, scenario) = table1_scenario(402);
    let clean = run_scenario(&store, &scenario, Transport::InProcess, 11);
    assert!(clean.entries.iter().all(|e| e.error.is_none()));

    for victim in [0usize, 4, 9] {
        // Corrupt the request of one exchange (message 2k).
        let mut attacked = scenario.clone();
        attacked.script.adversary = Some(MutationRule {
            message_index: 2 * victim,
            offset: 10,
            mask: 0x41,
        });
        let transcript = run_scenario(&store, &attacked, Transport::InProcess, 11);
        for (i, (entry, clean_entry)) in transcript.entries.iter().zip(&clean.entries).enumerate() {
            if i == victim {
                assert!(entry.error.is_some(), "exchange {i} should fail");
            } else {
                assert_eq!(entry.error, None, "exchange {i} must be unaffected");
                assert_eq!(entry.items, clean_entry.items, "exchange {i} items changed");
            }
        }
    }
}

#[test]
fn response_mutation_fails_at_the_source() {
    let (store, mut scenario) = table1_scenario(403);
    scenario.script.adversary = Some(MutationRule { message_index: 1, offset: 20, mask: 0xFF });
    let transcript = run_scenario(&store, &scenario, Transport::InProcess, 12);
    let entry = &transcript.entries[0];
    // Request digest is recorded; the failure is on the response side.
    assert!(entry.request_digest.is_some());
    let error = entry.error.as_deref().unwrap();
    assert!(
        ["DecryptError", "MalformedMessage", "IntegrityError"].contains(&error),
        "got {error}"
    );
    assert!(transcript.entries[1..].iter().all(|e| e.error.is_none()));
}

#[test]
fn tsv_transcript_is_well_formed() {
    let (store, scenario) = table1_scenario(404);
    let transcript = run_scenario(&store, &scenario, Transport::InProcess, 13);
    let tsv = transcript.to_tsv();
    let lines: Vec<&str> = tsv.lines().collect();
    assert_eq!(lines.len(), 11); // header + ten rows
    assert!(lines[0].starts_with("index\tsource\ttarget"));
    for line in &lines[1..] {
        assert_eq!(line.split('\t').count(), 10);
    }
}
