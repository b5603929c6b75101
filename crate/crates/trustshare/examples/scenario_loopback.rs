//! Runs a scripted scenario twice, in process and over a loopback TCP
//! socket, and shows that the transcripts agree byte for byte (wall time
//! aside). The script also stations an adversary on one message.
//!
//! Run with: cargo run --example scenario_loopback

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use trustshare::fixture::{provision_identities, table1_store};
use trustshare::sim::{run_scenario, Scenario, ScenarioScript, Transport};

const SCRIPT: &str = "\
EXCHANGE\tCIA\tFBI\t98LetT1
EXCHANGE\tRAW\tCIA\t03AlqT3
EXCHANGE\tISI\tFBI\t98LetT8
# Corrupt byte 25 of the second exchange's request (message index 2).
ADVERSARY\t2\t25\tFF
";

fn main() {
    let script = ScenarioScript::parse(SCRIPT).unwrap();
    let mut store = table1_store();
    let mut rng = ChaCha20Rng::seed_from_u64(2);
    let agencies = provision_identities(&mut store, 1024, &mut rng).unwrap();
    let scenario = Scenario { agencies, script };

    let inproc = run_scenario(&store, &scenario, Transport::InProcess, 2);
    let loopback = run_scenario(&store, &scenario, Transport::LoopbackSocket, 2);

    print!("{}", loopback.to_tsv());
    println!("in-process fingerprint: {}", inproc.fingerprint().to_hex());
    println!("loopback   fingerprint: {}", loopback.fingerprint().to_hex());
    assert_eq!(inproc.fingerprint(), loopback.fingerprint());
    println!("transports agree; exchange 1 failed ({}), the rest were untouched",
        loopback.entries[1].error.as_deref().unwrap_or("-"));
}
