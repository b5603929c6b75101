//! Replays the built-in ten-exchange reference deployment and compares each
//! exchange's shared items against the expected table.
//!
//! Run with: cargo run --example sharing_table

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use trustshare::fixture::{provision_identities, table1_store};
use trustshare::sim::{run_scenario, ExchangeSpec, Scenario, ScenarioScript, Transport};
use trustshare::table1;
use trustshare::types::AgencyId;

fn main() {
    let mut store = table1_store();
    let mut rng = ChaCha20Rng::seed_from_u64(1);
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
    let scenario = Scenario { agencies, script };
    let transcript = run_scenario(&store, &scenario, Transport::InProcess, 1);

    let mut all_match = true;
    for (row, entry) in table1::rows().iter().zip(&transcript.entries) {
        let got: Vec<String> =
            entry.items.iter().map(|i| String::from_utf8_lossy(i).into_owned()).collect();
        let expected: Vec<String> = row.shared.iter().map(|v| v.to_string()).collect();
        let ok = got == expected && entry.error.is_none();
        all_match &= ok;
        println!(
            "{:>2}. {}->{} {} level {} shared [{}] {}",
            entry.index + 1,
            row.source,
            row.target,
            row.code,
            row.trust_level(),
            got.join(", "),
            if ok { "ok" } else { "MISMATCH" },
        );
    }
    println!("transcript fingerprint: {}", transcript.fingerprint().to_hex());
    println!("{}", if all_match { "all rows match" } else { "MISMATCH" });
}
