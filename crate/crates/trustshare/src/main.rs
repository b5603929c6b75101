//! Thin command-line front end over the `trustshare` library. Every verb
//! prints its result to stdout and exits nonzero with a single
//! `ERR <Kind> <message>` line on stderr when something fails.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use trustshare::crypto::provision_keypair;
use trustshare::fixture::{provision_identities, table1_store};
use trustshare::gateway::{call, serve, GatewayService};
use trustshare::mapping::MappingFunctionSpec;
use trustshare::sim::{run_scenario, ExchangeSpec, Scenario, ScenarioScript, Transport};
use trustshare::store::{encode_item, TrustRecord, TrustStore};
use trustshare::table1;
use trustshare::types::{AgencyId, AgencyRole};

#[derive(Parser)]
#[command(name = "trustshare", about = "Trust-based information sharing between agencies", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Provision a keypair for an agency and write <id>.pub / <id>.key.
    Keygen {
        agency: AgencyId,
        #[arg(long, default_value = "keys")]
        dir: PathBuf,
        #[arg(long, default_value_t = 1024)]
        bits: u32,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Manage the agency registry of a store file.
    Agency {
        #[command(subcommand)]
        action: AgencyAction,
    },
    /// Manage trust records.
    Trust {
        #[command(subcommand)]
        action: TrustAction,
    },
    /// Manage pair mapping functions.
    Mapfn {
        #[command(subcommand)]
        action: MapfnAction,
    },
    /// Operate on a store file as a whole.
    Repo {
        #[command(subcommand)]
        action: RepoAction,
    },
    /// Run a scenario script and print the transcript.
    Scenario {
        #[command(subcommand)]
        action: ScenarioAction,
    },
    /// Run the built-in ten-exchange sharing table and print the comparison.
    Table1 {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value = "in-process")]
        transport: TransportArg,
    },
    /// Serve the operator gateway on a Unix socket until SHUTDOWN.
    Serve {
        #[arg(long, default_value = "trustshare.sock")]
        socket: PathBuf,
        #[arg(long)]
        store: Option<PathBuf>,
        #[arg(long, default_value = "admin")]
        admin_password: String,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Talk to a running gateway as a user.
    User {
        #[command(subcommand)]
        action: UserAction,
    },
}

#[derive(Subcommand)]
enum AgencyAction {
    /// Register an agency in the store file (created if missing).
    Add {
        store: PathBuf,
        id: AgencyId,
        #[arg(long, default_value = "intelligence")]
        role: String,
        /// Public key file (as written by keygen) to record for the agency.
        #[arg(long)]
        key: Option<PathBuf>,
    },
    /// List registered agencies.
    List { store: PathBuf },
}

#[derive(Subcommand)]
enum TrustAction {
    /// Set the trust level for (source, target, category).
    Set {
        store: PathBuf,
        source: AgencyId,
        target: AgencyId,
        category: String,
        level: u8,
    },
}

#[derive(Subcommand)]
enum MapfnAction {
    /// Set the mapping operator list shared by an agency pair, e.g. "+*".
    Set {
        store: PathBuf,
        a: AgencyId,
        b: AgencyId,
        ops: String,
    },
}

#[derive(Subcommand)]
enum RepoAction {
    /// Parse and validate a store file, then print a summary.
    Load { file: PathBuf },
}

#[derive(Subcommand)]
enum ScenarioAction {
    Run {
        file: PathBuf,
        /// Store file; defaults to the built-in sharing-table fixture.
        #[arg(long)]
        store: Option<PathBuf>,
        #[arg(long, default_value = "in-process")]
        transport: TransportArg,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum UserAction {
    Register {
        username: String,
        #[arg(long, default_value = "trustshare.sock")]
        socket: PathBuf,
    },
    Approve {
        admin: String,
        password: String,
        username: String,
        #[arg(long, default_value = "trustshare.sock")]
        socket: PathBuf,
    },
    Query {
        username: String,
        password: String,
        code: String,
        #[arg(long, default_value = "trustshare.sock")]
        socket: PathBuf,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum TransportArg {
    InProcess,
    Loopback,
}

impl From<TransportArg> for Transport {
    fn from(t: TransportArg) -> Transport {
        match t {
            TransportArg::InProcess => Transport::InProcess,
            TransportArg::Loopback => Transport::LoopbackSocket,
        }
    }
}

struct CliError {
    kind: &'static str,
    message: String,
}

impl CliError {
    fn new(kind: &'static str, message: impl ToString) -> CliError {
        CliError { kind, message: message.to_string() }
    }
}

impl From<trustshare::StoreError> for CliError {
    fn from(e: trustshare::StoreError) -> CliError {
        CliError::new("StoreError", e)
    }
}

impl From<trustshare::CryptoError> for CliError {
    fn from(e: trustshare::CryptoError) -> CliError {
        CliError::new("CryptoError", e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> CliError {
        CliError::new("IoError", e)
    }
}

fn rng_from(seed: Option<u64>) -> ChaCha20Rng {
    match seed {
        Some(seed) => ChaCha20Rng::seed_from_u64(seed),
        None => ChaCha20Rng::from_entropy(),
    }
}

fn load_or_empty(path: &Path) -> Result<TrustStore, CliError> {
    if path.exists() {
        Ok(TrustStore::load(path)?)
    } else {
        Ok(TrustStore::new())
    }
}

fn gateway_call(socket: &Path, request: &str) -> Result<(), CliError> {
    let (status, payload) = call(socket, request)?;
    for line in &payload {
        println!("{line}");
    }
    if status == "OK" {
        Ok(())
    } else {
        let detail = status.strip_prefix("ERR ").unwrap_or(&status).to_string();
        Err(CliError::new("GatewayError", detail))
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Keygen { agency, dir, bits, seed } => {
            let mut rng = rng_from(seed);
            let (_, pub_path, key_path) = provision_keypair(&dir, agency.as_str(), bits, &mut rng)?;
            println!("{}", pub_path.display());
            println!("{}", key_path.display());
            Ok(())
        }
        Command::Agency { action } => match action {
            AgencyAction::Add { store, id, role, key } => {
                let role = AgencyRole::parse(&role)
                    .ok_or_else(|| CliError::new("BadRole", format!("unknown role {role:?}")))?;
                let key = match key {
                    Some(path) => Some(trustshare::crypto::load_public_key(&path)?),
                    None => None,
                };
                let mut db = load_or_empty(&store)?;
                db.register_agency(id, role, key)?;
                db.save(&store)?;
                Ok(())
            }
            AgencyAction::List { store } => {
                let db = TrustStore::load(&store)?;
                for id in db.agency_ids() {
                    let role = db.agency_role(id).expect("listed id");
                    let keyed = if db.public_key(id).is_ok() { "keyed" } else { "no-key" };
                    println!("{id}\t{}\t{keyed}", role.as_str());
                }
                Ok(())
            }
        },
        Command::Trust { action } => match action {
            TrustAction::Set { store, source, target, category, level } => {
                let mut db = TrustStore::load(&store)?;
                db.set_trust(TrustRecord { source, target, category, level })?;
                db.save(&store)?;
                Ok(())
            }
        },
        Command::Mapfn { action } => match action {
            MapfnAction::Set { store, a, b, ops } => {
                let spec = MappingFunctionSpec::parse(&ops)
                    .map_err(|e| CliError::new("BadMapping", e))?;
                let mut db = TrustStore::load(&store)?;
                db.set_mapping(&a, &b, spec)?;
                db.save(&store)?;
                Ok(())
            }
        },
        Command::Repo { action } => match action {
            RepoAction::Load { file } => {
                let db = TrustStore::load(&file)?;
                println!(
                    "agencies={} trust={} mapfns={}",
                    db.agency_ids().count(),
                    db.trust_records().count(),
                    db.mapping_count(),
                );
                Ok(())
            }
        },
        Command::Scenario { action } => match action {
            ScenarioAction::Run { file, store, transport, seed } => {
                let script = ScenarioScript::load(&file)?;
                let mut db = match store {
                    Some(path) => TrustStore::load(&path)?,
                    None => table1_store(),
                };
                let mut rng = ChaCha20Rng::seed_from_u64(seed ^ 0x6B65_7967_656E);
                let agencies = provision_identities(&mut db, 1024, &mut rng)?;
                let scenario = Scenario { agencies, script };
                let transcript = run_scenario(&db, &scenario, transport.into(), seed);
                print!("{}", transcript.to_tsv());
                println!("# fingerprint {}", transcript.fingerprint().to_hex());
                Ok(())
            }
        },
        Command::Table1 { seed, transport } => {
            let mut db = table1_store();
            let mut rng = ChaCha20Rng::seed_from_u64(seed ^ 0x6B65_7967_656E);
            let agencies = provision_identities(&mut db, 1024, &mut rng)?;
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
            let transcript = run_scenario(&db, &scenario, transport.into(), seed);

            let mut mismatches = 0;
            for (row, entry) in table1::rows().iter().zip(&transcript.entries) {
                let expected = row.shared_items();
                let matched = entry.error.is_none() && entry.items == expected;
                if !matched {
                    mismatches += 1;
                }
                let render = |items: &[Vec<u8>]| {
                    items.iter().map(|i| encode_item(i)).collect::<Vec<_>>().join(",")
                };
                println!(
                    "{}\t{}->{}\t{}\texpected={}\tgot={}\t{}",
                    entry.index + 1,
                    row.source,
                    row.target,
                    row.code,
                    render(&expected),
                    render(&entry.items),
                    if matched { "MATCH" } else { "MISMATCH" },
                );
            }
            if mismatches == 0 {
                println!("all 10 rows match");
                Ok(())
            } else {
                Err(CliError::new("Table1Mismatch", format!("{mismatches} rows differ")))
            }
        }
        Command::Serve { socket, store, admin_password, seed } => {
            let db = match &store {
                Some(path) => load_or_empty(path)?,
                None => table1_store(),
            };
            let mut service = GatewayService::new(db, store, &admin_password);
            let mut rng = rng_from(seed);
            serve(&mut service, &socket, &mut rng)?;
            Ok(())
        }
        Command::User { action } => match action {
            UserAction::Register { username, socket } => {
                gateway_call(&socket, &format!("REGISTER {username}"))
            }
            UserAction::Approve { admin, password, username, socket } => {
                gateway_call(&socket, &format!("APPROVE {admin} {password} {username}"))
            }
            UserAction::Query { username, password, code, socket } => {
                gateway_call(&socket, &format!("QUERY {username} {password} {code}"))
            }
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ERR {} {}", e.kind, e.message);
            ExitCode::FAILURE
        }
    }
}
