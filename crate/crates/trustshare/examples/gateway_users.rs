//! Starts the operator gateway on a temporary Unix socket and walks the two
//! access levels: a general user registers, gets approved, and queries; the
//! admin mutates the repository.
//!
//! Run with: cargo run --example gateway_users

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use trustshare::fixture::table1_store;
use trustshare::gateway::{call, serve, GatewayService};

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let socket = dir.path().join("gateway.sock");
    let server_socket = socket.clone();
    let server = std::thread::spawn(move || {
        let mut service = GatewayService::new(table1_store(), None, "hunter2");
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        serve(&mut service, &server_socket, &mut rng).unwrap();
    });
    while !socket.exists() {
        std::thread::sleep(std::time::Duration::from_millis(5));
    }

    let send = |request: &str| {
        let (status, payload) = call(&socket, request).unwrap();
        println!("> {request}\n< {status} {}", payload.join(" | "));
        payload
    };

    send("REGISTER eve");
    let password = send("APPROVE admin hunter2 eve")[0].clone();
    send(&format!("QUERY eve {password} 98LetT1"));
    // A general user bounces off mutating verbs.
    send(&format!("TERRORIST-ADD eve {password} FBI 12NewT1 -"));
    // The admin does not.
    send("TERRORIST-ADD admin hunter2 FBI 12NewT1 301,302");
    send(&format!("QUERY eve {password} 12NewT1"));
    send("SHUTDOWN");
    server.join().unwrap();
}
