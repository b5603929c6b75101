//! Multi-agency simulator: wires the source and target engines over an
//! in-process call path or a loopback TCP socket, runs scripted exchanges,
//! records a transcript, and optionally injects a single-byte adversary.

use std::io::{Read, Write};
use std::net::{TcpListener, TcpStream};
use std::time::Instant;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::crypto::{md5_digest, Digest};
use crate::error::{ProtocolError, StoreError};
use crate::source::{build_request, validate_response, Verdicts};
use crate::store::{encode_item, StoreSnapshot, TrustStore};
use crate::target::{build_response, query_text, validate_request};
use crate::types::{AgencyId, AgencyIdentity};

/// One scripted exchange: `source` asks `target` about `code`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ExchangeSpec {
    pub source: AgencyId,
    pub target: AgencyId,
    pub code: String,
}

/// Single-message adversary: XOR `mask` into the byte at `offset` of the
/// `message_index`-th transmitted message (requests and responses count
/// alternately: exchange k sends messages 2k and 2k+1).
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct MutationRule {
    pub message_index: usize,
    pub offset: usize,
    pub mask: u8,
}

/// The script half of a scenario, loadable from a tagged-text file.
#[derive(Clone, Default, Debug)]
pub struct ScenarioScript {
    pub exchanges: Vec<ExchangeSpec>,
    pub adversary: Option<MutationRule>,
}

/// A runnable scenario: script plus the identities taking part.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub agencies: Vec<AgencyIdentity>,
    pub script: ScenarioScript,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Transport {
    InProcess,
    LoopbackSocket,
}

/// One transcript row; `wall_micros` is excluded from determinism claims.
#[derive(Clone, Debug)]
pub struct TranscriptEntry {
    pub index: usize,
    pub source: AgencyId,
    pub target: AgencyId,
    pub code: String,
    pub request_digest: Option<Digest>,
    pub response_digest: Option<Digest>,
    pub verdicts: Option<Verdicts>,
    pub items: Vec<Vec<u8>>,
    pub error: Option<String>,
    pub wall_micros: u128,
}

#[derive(Clone, Default, Debug)]
pub struct Transcript {
    pub entries: Vec<TranscriptEntry>,
}

impl Transcript {
    /// Tab-separated rows, one per exchange.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from(
            "index\tsource\ttarget\tcode\trequest_md5\tresponse_md5\tverdicts\titems\terror\twall_us\n",
        );
        for e in &self.entries {
            let digest = |d: &Option<Digest>| d.as_ref().map(Digest::to_hex).unwrap_or_else(|| "-".into());
            let verdicts = match &e.verdicts {
                Some(v) => format!(
                    "integrity={},target={},session={}",
                    v.integrity, v.target_authentic, v.session_match
                ),
                None => "-".into(),
            };
            let items: Vec<String> = e.items.iter().map(|i| encode_item(i)).collect();
            let items = if items.is_empty() { "-".into() } else { items.join(",") };
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                e.index,
                e.source,
                e.target,
                e.code,
                digest(&e.request_digest),
                digest(&e.response_digest),
                verdicts,
                items,
                e.error.as_deref().unwrap_or("-"),
                e.wall_micros,
            ));
        }
        out
    }

    /// Digest over every deterministic field (wall time excluded); two runs
    /// of the same (scenario, seed) must agree on this.
    pub fn fingerprint(&self) -> Digest {
        let mut buf = Vec::new();
        for e in &self.entries {
            buf.extend_from_slice(e.source.as_str().as_bytes());
            buf.extend_from_slice(e.target.as_str().as_bytes());
            buf.extend_from_slice(e.code.as_bytes());
            for d in [&e.request_digest, &e.response_digest] {
                match d {
                    Some(d) => buf.extend_from_slice(d.as_bytes()),
                    None => buf.push(0),
                }
            }
            for item in &e.items {
                buf.extend_from_slice(&(item.len() as u32).to_be_bytes());
                buf.extend_from_slice(item);
            }
            buf.extend_from_slice(e.error.as_deref().unwrap_or("-").as_bytes());
            buf.push(b'\n');
        }
        md5_digest(&buf)
    }
}

/// XORs `mask` into the byte at `offset`; mask 0 is the identity, applying
/// the same rule twice restores the original.
pub fn mutate(message: &[u8], offset: usize, mask: u8) -> Result<Vec<u8>, String> {
    if offset >= message.len() {
        return Err(format!("offset {offset} out of range for {} bytes", message.len()));
    }
    let mut out = message.to_vec();
    out[offset] ^= mask;
    Ok(out)
}

impl ScenarioScript {
    pub fn parse(text: &str) -> Result<ScenarioScript, StoreError> {
        let mut script = ScenarioScript::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let fail = |reason: String| StoreError::Parse { line, reason };
            let trimmed = raw.trim_end_matches('\r');
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = trimmed.split('\t').collect();
            match fields[0] {
                "EXCHANGE" => {
                    if fields.len() != 4 {
                        return Err(fail(format!("expected 4 fields, got {}", fields.len())));
                    }
                    script.exchanges.push(ExchangeSpec {
                        source: AgencyId::new(fields[1]).map_err(&fail)?,
                        target: AgencyId::new(fields[2]).map_err(&fail)?,
                        code: fields[3].to_string(),
                    });
                }
                "ADVERSARY" => {
                    if fields.len() != 4 {
                        return Err(fail(format!("expected 4 fields, got {}", fields.len())));
                    }
                    let parse_usize = |s: &str| {
                        s.parse::<usize>().map_err(|_| fail(format!("bad number {s:?}")))
                    };
                    script.adversary = Some(MutationRule {
                        message_index: parse_usize(fields[1])?,
                        offset: parse_usize(fields[2])?,
                        mask: u8::from_str_radix(fields[3], 16)
                            .map_err(|_| fail(format!("bad hex mask {:?}", fields[3])))?,
                    });
                }
                other => return Err(fail(format!("unknown record kind {other:?}"))),
            }
        }
        Ok(script)
    }

    pub fn load(path: &std::path::Path) -> Result<ScenarioScript, StoreError> {
        ScenarioScript::parse(&std::fs::read_to_string(path)?)
    }
}

fn derive_rng(seed: u64, index: u64, lane: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(
        seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ lane.wrapping_mul(0xD1B5_4A32_D192_ED03),
    )
}

fn target_process(
    identity: &AgencyIdentity,
    store: &TrustStore,
    request: &[u8],
    rng: &mut dyn RngCore,
) -> Result<Vec<u8>, ProtocolError> {
    let decoded = validate_request(identity, store, request)?;
    build_response(identity, store, &decoded, rng)
}

/// Runs every scripted exchange over the chosen transport against a duplicate
/// snapshot of `store`. Per-exchange failures land in the transcript; the run
/// itself does not abort.
pub fn run_scenario(
    store: &TrustStore,
    scenario: &Scenario,
    transport: Transport,
    seed: u64,
) -> Transcript {
    let snapshot = store.snapshot_duplicate();
    match transport {
        Transport::InProcess => run_with(scenario, seed, &snapshot, |index, target_id, request| {
            let identity = scenario
                .agencies
                .iter()
                .find(|a| &a.id == target_id)
                .ok_or_else(|| "UnknownAgency".to_string())?;
            let mut rng = derive_rng(seed, index as u64, 1);
            target_process(identity, &snapshot, request, &mut rng)
                .map_err(|e| e.kind().to_string())
        }),
        Transport::LoopbackSocket => {
            let listener = TcpListener::bind("127.0.0.1:0").expect("bind loopback");
            let addr = listener.local_addr().expect("local addr");
            let agencies = scenario.agencies.clone();
            let server_snapshot = snapshot.clone();
            let server = std::thread::spawn(move || loopback_server(listener, agencies, server_snapshot, seed));
            let transcript = run_with(scenario, seed, &snapshot, |index, target_id, request| {
                loopback_exchange(addr, index, target_id, request)
            });
            // Shutdown frame, then join.
            if let Ok(mut stream) = TcpStream::connect(addr) {
                let _ = write_frame(&mut stream, u64::MAX, "", &[]);
            }
            let _ = server.join();
            transcript
        }
    }
}

fn run_with(
    scenario: &Scenario,
    seed: u64,
    snapshot: &StoreSnapshot,
    mut deliver: impl FnMut(usize, &AgencyId, &[u8]) -> Result<Vec<u8>, String>,
) -> Transcript {
    let mut transcript = Transcript::default();
    for (index, exchange) in scenario.script.exchanges.iter().enumerate() {
        let start = Instant::now();
        let mut entry = TranscriptEntry {
            index,
            source: exchange.source.clone(),
            target: exchange.target.clone(),
            code: exchange.code.clone(),
            request_digest: None,
            response_digest: None,
            verdicts: None,
            items: Vec::new(),
            error: None,
            wall_micros: 0,
        };

        entry.error = run_exchange(scenario, seed, snapshot, index, exchange, &mut deliver, &mut entry)
            .err();
        entry.wall_micros = start.elapsed().as_micros();
        transcript.entries.push(entry);
    }
    transcript
}

fn run_exchange(
    scenario: &Scenario,
    seed: u64,
    snapshot: &StoreSnapshot,
    index: usize,
    exchange: &ExchangeSpec,
    deliver: &mut impl FnMut(usize, &AgencyId, &[u8]) -> Result<Vec<u8>, String>,
    entry: &mut TranscriptEntry,
) -> Result<(), String> {
    let source = scenario
        .agencies
        .iter()
        .find(|a| a.id == exchange.source)
        .ok_or("UnknownAgency")?;

    let mut rng = derive_rng(seed, index as u64, 0);
    let set_size = rng.gen_range(1..=8);
    let request_text = query_text(&exchange.code);
    let (mut request, session) = build_request(
        source,
        snapshot,
        &exchange.target,
        &request_text,
        set_size,
        &mut rng,
    )
    .map_err(|e| e.kind().to_string())?;

    if let Some(rule) = &scenario.script.adversary {
        if rule.message_index == 2 * index {
            request = mutate(&request, rule.offset, rule.mask).map_err(|_| "MutationError")?;
        }
    }
    entry.request_digest = Some(md5_digest(&request));

    let mut response = deliver(index, &exchange.target, &request)?;

    if let Some(rule) = &scenario.script.adversary {
        if rule.message_index == 2 * index + 1 {
            response = mutate(&response, rule.offset, rule.mask).map_err(|_| "MutationError")?;
        }
    }
    entry.response_digest = Some(md5_digest(&response));

    let mapping = snapshot
        .get_mapping(&exchange.source, &exchange.target)
        .ok_or("UnknownAgency")?;
    let validated = validate_response(&session, source, mapping, &response)
        .map_err(|e| e.kind().to_string())?;
    entry.verdicts = Some(validated.verdicts);
    entry.items = validated.items;
    Ok(())
}

// Loopback frame: u64 exchange index | u32 len target id | u32 len payload.
// Reply: u8 tag (0 ok, 1 err) | u32 len payload.

fn write_frame(stream: &mut TcpStream, index: u64, target: &str, payload: &[u8]) -> std::io::Result<()> {
    stream.write_all(&index.to_be_bytes())?;
    stream.write_all(&(target.len() as u32).to_be_bytes())?;
    stream.write_all(target.as_bytes())?;
    stream.write_all(&(payload.len() as u32).to_be_bytes())?;
    stream.write_all(payload)
}

fn read_exact_vec(stream: &mut TcpStream, len: usize) -> std::io::Result<Vec<u8>> {
    let mut buf = vec![0u8; len];
    stream.read_exact(&mut buf)?;
    Ok(buf)
}

fn loopback_exchange(
    addr: std::net::SocketAddr,
    index: usize,
    target: &AgencyId,
    request: &[u8],
) -> Result<Vec<u8>, String> {
    let run = || -> std::io::Result<Result<Vec<u8>, String>> {
        let mut stream = TcpStream::connect(addr)?;
        write_frame(&mut stream, index as u64, target.as_str(), request)?;
        let tag = read_exact_vec(&mut stream, 1)?[0];
        let len = u32::from_be_bytes(read_exact_vec(&mut stream, 4)?.try_into().unwrap()) as usize;
        let payload = read_exact_vec(&mut stream, len)?;
        Ok(match tag {
            0 => Ok(payload),
            _ => Err(String::from_utf8_lossy(&payload).into_owned()),
        })
    };
    run().map_err(|e| format!("TransportError: {e}"))?
}

fn loopback_server(
    listener: TcpListener,
    agencies: Vec<AgencyIdentity>,
    snapshot: StoreSnapshot,
    seed: u64,
) {
    for stream in listener.incoming() {
        let Ok(mut stream) = stream else { continue };
        let mut handle = || -> std::io::Result<bool> {
            let index = u64::from_be_bytes(read_exact_vec(&mut stream, 8)?.try_into().unwrap());
            if index == u64::MAX {
                return Ok(true);
            }
            let len = u32::from_be_bytes(read_exact_vec(&mut stream, 4)?.try_into().unwrap()) as usize;
            let target_id = String::from_utf8_lossy(&read_exact_vec(&mut stream, len)?).into_owned();
            let len = u32::from_be_bytes(read_exact_vec(&mut stream, 4)?.try_into().unwrap()) as usize;
            let request = read_exact_vec(&mut stream, len)?;

            let result = agencies
                .iter()
                .find(|a| a.id.as_str() == target_id)
                .ok_or_else(|| "UnknownAgency".to_string())
                .and_then(|identity| {
                    let mut rng = derive_rng(seed, index, 1);
                    target_process(identity, &snapshot, &request, &mut rng)
                        .map_err(|e| e.kind().to_string())
                });
            let (tag, payload): (u8, Vec<u8>) = match result {
                Ok(bytes) => (0, bytes),
                Err(kind) => (1, kind.into_bytes()),
            };
            stream.write_all(&[tag])?;
            stream.write_all(&(payload.len() as u32).to_be_bytes())?;
            stream.write_all(&payload)?;
            Ok(false)
        };
        match handle() {
            Ok(true) => break,
            _ => continue,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mutate_is_a_single_byte_involution() {
        let msg = vec![1u8, 2, 3, 4];
        assert_eq!(mutate(&msg, 0, 0).unwrap(), msg);
        let once = mutate(&msg, 0, 0xFF).unwrap();
        assert_ne!(once[0], msg[0]);
        assert_eq!(once[1..], msg[1..]);
        assert_eq!(mutate(&once, 0, 0xFF).unwrap(), msg);
        assert!(mutate(&msg, 4, 1).is_err());
    }

    #[test]
    fn script_parses_and_rejects() {
        let script = ScenarioScript::parse(
            "# demo\nEXCHANGE\tCIA\tFBI\t98LetT1\nADVERSARY\t1\t12\tff\n",
        )
        .unwrap();
        assert_eq!(script.exchanges.len(), 1);
        assert_eq!(
            script.adversary,
            Some(MutationRule { message_index: 1, offset: 12, mask: 0xFF })
        );

        match ScenarioScript::parse("EXCHANGE\tCIA\tFBI\n") {
            Err(StoreError::Parse { line: 1, .. }) => {}
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn empty_scenario_empty_transcript() {
        let store = TrustStore::new();
        let scenario = Scenario { agencies: Vec::new(), script: ScenarioScript::default() };
        let transcript = run_scenario(&store, &scenario, Transport::InProcess, 1);
        assert!(transcript.entries.is_empty());
    }
}
