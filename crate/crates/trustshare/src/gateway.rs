//! Operator gateway: the two access levels of the deployment. Administrators
//! hold full database control; general users register, get issued a password
//! on approval, and run read-only terrorist queries.
//!
//! The service speaks a one-request-line / one-response-block text protocol
//! over a local Unix socket, so the CLI and the tests share one code path.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Write};
use std::os::unix::net::{UnixListener, UnixStream};
use std::path::{Path, PathBuf};

use rand::{Rng, RngCore};

use crate::crypto::{md5_digest, Digest};
use crate::error::{GatewayError, StoreError};
use crate::store::{code_category, decode_item, encode_item, TrustStore};
use crate::types::{AgencyId, AgencyRole};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum UserStatus {
    Pending,
    Active,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum UserRole {
    Admin,
    General,
}

/// Passwords exist here only as MD5 digests, and accounts are never written
/// to the persisted store file.
#[derive(Clone, Debug)]
pub struct UserAccount {
    pub username: String,
    pub password_digest: Option<Digest>,
    pub status: UserStatus,
    pub role: UserRole,
}

/// The gateway state: the agency's trust store plus the in-memory user
/// directory. Mutations persist the store back to `store_path` when set.
pub struct GatewayService {
    store: TrustStore,
    store_path: Option<PathBuf>,
    users: BTreeMap<String, UserAccount>,
}

fn generate_password(rng: &mut dyn RngCore) -> String {
    const ALPHABET: &[u8] = b"ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789";
    (0..16)
        .map(|_| ALPHABET[rng.gen_range(0..ALPHABET.len())] as char)
        .collect()
}

impl GatewayService {
    pub fn new(store: TrustStore, store_path: Option<PathBuf>, admin_password: &str) -> GatewayService {
        let mut users = BTreeMap::new();
        users.insert(
            "admin".to_string(),
            UserAccount {
                username: "admin".into(),
                password_digest: Some(md5_digest(admin_password.as_bytes())),
                status: UserStatus::Active,
                role: UserRole::Admin,
            },
        );
        GatewayService { store, store_path, users }
    }

    pub fn store(&self) -> &TrustStore {
        &self.store
    }

    fn persist(&self) -> Result<(), GatewayError> {
        if let Some(path) = &self.store_path {
            self.store.save(path).map_err(GatewayError::Store)?;
        }
        Ok(())
    }

    /// Checks credentials; wrong password or pending account means the caller
    /// is not authenticated.
    pub fn authenticate(&self, username: &str, password: &str) -> Result<&UserAccount, GatewayError> {
        let account = self
            .users
            .get(username)
            .ok_or(GatewayError::NotAuthenticated)?;
        if account.status != UserStatus::Active {
            return Err(GatewayError::NotActive(username.into()));
        }
        let digest = md5_digest(password.as_bytes());
        if account.password_digest.as_ref() != Some(&digest) {
            return Err(GatewayError::NotAuthenticated);
        }
        Ok(account)
    }

    fn authorize_admin(&self, username: &str, password: &str) -> Result<(), GatewayError> {
        let account = self.authenticate(username, password)?;
        if account.role != UserRole::Admin {
            return Err(GatewayError::NotAuthorized);
        }
        Ok(())
    }

    /// Creates a pending account; a password is only issued on approval.
    pub fn register_user(&mut self, username: &str) -> Result<(), GatewayError> {
        if username.is_empty() || self.users.contains_key(username) {
            return Err(GatewayError::DuplicateUser(username.into()));
        }
        self.users.insert(
            username.to_string(),
            UserAccount {
                username: username.to_string(),
                password_digest: None,
                status: UserStatus::Pending,
                role: UserRole::General,
            },
        );
        Ok(())
    }

    /// Admin approval: activates the account, generates a random password,
    /// stores its digest and returns the plaintext exactly once.
    pub fn approve_user(
        &mut self,
        admin: &str,
        admin_password: &str,
        username: &str,
        rng: &mut dyn RngCore,
    ) -> Result<String, GatewayError> {
        self.authorize_admin(admin, admin_password)?;
        let account = self
            .users
            .get_mut(username)
            .ok_or_else(|| GatewayError::UnknownUser(username.into()))?;
        let password = generate_password(rng);
        account.password_digest = Some(md5_digest(password.as_bytes()));
        account.status = UserStatus::Active;
        Ok(password)
    }

    /// Read-only query of the local repository; the store is never touched.
    pub fn query_terrorist(
        &self,
        username: &str,
        password: &str,
        code: &str,
    ) -> Result<Vec<Vec<u8>>, GatewayError> {
        self.authenticate(username, password)?;
        let (_, items) = self
            .store
            .find_info(code)
            .ok_or_else(|| GatewayError::UnknownCode(code.into()))?;
        Ok(items.to_vec())
    }

    pub fn upsert_agency(
        &mut self,
        admin: &str,
        password: &str,
        id: &AgencyId,
        role: AgencyRole,
    ) -> Result<(), GatewayError> {
        self.authorize_admin(admin, password)?;
        match self.store.register_agency(id.clone(), role, None) {
            Ok(()) | Err(StoreError::DuplicateAgency(_)) => {}
            Err(e) => return Err(GatewayError::Store(e)),
        }
        self.persist()
    }

    pub fn upsert_terrorist(
        &mut self,
        admin: &str,
        password: &str,
        owner: &AgencyId,
        code: &str,
        items: Vec<Vec<u8>>,
    ) -> Result<(), GatewayError> {
        self.authorize_admin(admin, password)?;
        self.store
            .set_info(owner, code, items)
            .map_err(GatewayError::Store)?;
        self.persist()
    }

    /// Appends one recorded activity item to an existing code.
    pub fn upsert_activity(
        &mut self,
        admin: &str,
        password: &str,
        owner: &AgencyId,
        code: &str,
        item: Vec<u8>,
    ) -> Result<(), GatewayError> {
        self.authorize_admin(admin, password)?;
        self.store
            .append_info_item(owner, code, item)
            .map_err(GatewayError::Store)?;
        self.persist()
    }

    /// Dispatches one protocol request line; the response is a status line,
    /// payload lines, and a terminating `.` line.
    pub fn handle_line(&mut self, line: &str, rng: &mut dyn RngCore) -> String {
        match self.dispatch(line, rng) {
            Ok(payload) => {
                let mut out = String::from("OK\n");
                for p in payload {
                    out.push_str(&p);
                    out.push('\n');
                }
                out.push_str(".\n");
                out
            }
            Err(e) => format!("ERR {} {}\n.\n", e.kind(), e),
        }
    }

    fn dispatch(&mut self, line: &str, rng: &mut dyn RngCore) -> Result<Vec<String>, GatewayError> {
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let arity = |n: usize| {
            if tokens.len() == n {
                Ok(())
            } else {
                Err(GatewayError::BadRequest(line.to_string()))
            }
        };
        let agency = |s: &str| {
            AgencyId::new(s).map_err(|_| GatewayError::Store(StoreError::UnknownAgency(s.into())))
        };
        match tokens.first().copied() {
            Some("PING") => Ok(vec!["PONG".into()]),
            Some("REGISTER") => {
                arity(2)?;
                self.register_user(tokens[1])?;
                Ok(vec![format!("pending {}", tokens[1])])
            }
            Some("APPROVE") => {
                arity(4)?;
                let password = self.approve_user(tokens[1], tokens[2], tokens[3], rng)?;
                Ok(vec![password])
            }
            Some("QUERY") => {
                arity(4)?;
                let items = self.query_terrorist(tokens[1], tokens[2], tokens[3])?;
                Ok(items.iter().map(|i| encode_item(i)).collect())
            }
            Some("AGENCY-ADD") => {
                arity(5)?;
                let role = AgencyRole::parse(tokens[4])
                    .ok_or_else(|| GatewayError::Store(StoreError::UnknownAgency(tokens[4].into())))?;
                self.upsert_agency(tokens[1], tokens[2], &agency(tokens[3])?, role)?;
                Ok(vec![])
            }
            Some("TERRORIST-ADD") => {
                arity(6)?;
                if code_category(tokens[4]).is_none() {
                    return Err(GatewayError::Store(StoreError::BadCode(tokens[4].into())));
                }
                let items = if tokens[5] == "-" {
                    Vec::new()
                } else {
                    tokens[5]
                        .split(',')
                        .map(decode_item)
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(|e| GatewayError::Store(StoreError::BadCode(e)))?
                };
                self.upsert_terrorist(tokens[1], tokens[2], &agency(tokens[3])?, tokens[4], items)?;
                Ok(vec![])
            }
            Some("ACTIVITY-ADD") => {
                arity(6)?;
                let item = decode_item(tokens[5])
                    .map_err(|e| GatewayError::Store(StoreError::BadCode(e)))?;
                self.upsert_activity(tokens[1], tokens[2], &agency(tokens[3])?, tokens[4], item)?;
                Ok(vec![])
            }
            _ => Err(GatewayError::BadRequest(line.to_string())),
        }
    }
}

/// Serves requests sequentially on a Unix socket until `SHUTDOWN` arrives.
pub fn serve(service: &mut GatewayService, socket_path: &Path, rng: &mut dyn RngCore) -> std::io::Result<()> {
    let _ = std::fs::remove_file(socket_path);
    let listener = UnixListener::bind(socket_path)?;
    for stream in listener.incoming() {
        let mut stream = stream?;
        let mut line = String::new();
        let mut reader = BufReader::new(stream.try_clone()?);
        if reader.read_line(&mut line).is_err() {
            continue;
        }
        let line = line.trim_end();
        if line == "SHUTDOWN" {
            stream.write_all(b"OK\n.\n")?;
            break;
        }
        let response = service.handle_line(line, rng);
        let _ = stream.write_all(response.as_bytes());
    }
    let _ = std::fs::remove_file(socket_path);
    Ok(())
}

/// One round trip against a running gateway socket. Returns the status line
/// and the payload lines.
pub fn call(socket_path: &Path, request: &str) -> std::io::Result<(String, Vec<String>)> {
    let mut stream = UnixStream::connect(socket_path)?;
    stream.write_all(request.as_bytes())?;
    stream.write_all(b"\n")?;
    let reader = BufReader::new(stream);
    let mut lines = reader.lines();
    let status = lines.next().transpose()?.unwrap_or_default();
    let mut payload = Vec::new();
    for line in lines {
        let line = line?;
        if line == "." {
            break;
        }
        payload.push(line);
    }
    Ok((status, payload))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixture::table1_store;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn service() -> GatewayService {
        GatewayService::new(table1_store(), None, "hunter2")
    }

    #[test]
    fn register_approve_authenticate() {
        let mut svc = service();
        let mut rng = ChaCha20Rng::seed_from_u64(200);
        svc.register_user("alice").unwrap();
        assert!(matches!(
            svc.authenticate("alice", "whatever"),
            Err(GatewayError::NotActive(_))
        ));
        let password = svc.approve_user("admin", "hunter2", "alice", &mut rng).unwrap();
        assert_eq!(password.len(), 16);
        assert!(svc.authenticate("alice", &password).is_ok());
        assert!(matches!(
            svc.authenticate("alice", "wrong"),
            Err(GatewayError::NotAuthenticated)
        ));
    }

    #[test]
    fn duplicate_registration_rejected() {
        let mut svc = service();
        svc.register_user("alice").unwrap();
        assert!(matches!(
            svc.register_user("alice"),
            Err(GatewayError::DuplicateUser(_))
        ));
    }

    #[test]
    fn general_user_cannot_approve_or_mutate() {
        let mut svc = service();
        let mut rng = ChaCha20Rng::seed_from_u64(201);
        svc.register_user("alice").unwrap();
        svc.register_user("bob").unwrap();
        let password = svc.approve_user("admin", "hunter2", "alice", &mut rng).unwrap();
        assert!(matches!(
            svc.approve_user("alice", &password, "bob", &mut rng),
            Err(GatewayError::NotAuthorized)
        ));
        let fbi = AgencyId::new("FBI").unwrap();
        assert!(matches!(
            svc.upsert_terrorist("alice", &password, &fbi, "98LetT9", vec![]),
            Err(GatewayError::NotAuthorized)
        ));
        assert!(matches!(
            svc.upsert_activity("alice", &password, &fbi, "98LetT1", b"item".to_vec()),
            Err(GatewayError::NotAuthorized)
        ));
        assert!(matches!(
            svc.upsert_agency("alice", &password, &fbi, AgencyRole::GeneralUser),
            Err(GatewayError::NotAuthorized)
        ));
    }

    #[test]
    fn query_is_read_only_and_finds_table_rows() {
        let mut svc = service();
        let mut rng = ChaCha20Rng::seed_from_u64(202);
        svc.register_user("alice").unwrap();
        let password = svc.approve_user("admin", "hunter2", "alice", &mut rng).unwrap();

        let before = svc.store().serialize();
        let items = svc.query_terrorist("alice", &password, "98LetT1").unwrap();
        let expected: Vec<Vec<u8>> = (11..=20).map(|v: u32| v.to_string().into_bytes()).collect();
        assert_eq!(items, expected);
        assert!(matches!(
            svc.query_terrorist("alice", &password, "00NopT0"),
            Err(GatewayError::UnknownCode(_))
        ));
        assert_eq!(svc.store().serialize(), before);
    }

    #[test]
    fn admin_crud_round_trips() {
        let mut svc = service();
        let fbi = AgencyId::new("FBI").unwrap();
        svc.upsert_terrorist("admin", "hunter2", &fbi, "11NewT1", vec![b"101".to_vec()])
            .unwrap();
        svc.upsert_activity("admin", "hunter2", &fbi, "11NewT1", b"102".to_vec())
            .unwrap();
        assert_eq!(
            svc.store().get_info(&fbi, "11NewT1").unwrap(),
            &[b"101".to_vec(), b"102".to_vec()]
        );
        assert!(matches!(
            svc.upsert_terrorist("admin", "hunter2", &fbi, "badcode", vec![]),
            Err(GatewayError::Store(StoreError::BadCode(_)))
        ));
    }

    #[test]
    fn password_digests_never_persisted() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("store.tsv");
        let mut svc = GatewayService::new(table1_store(), Some(path.clone()), "hunter2");
        let mut rng = ChaCha20Rng::seed_from_u64(203);
        svc.register_user("alice").unwrap();
        let password = svc.approve_user("admin", "hunter2", "alice", &mut rng).unwrap();
        let fbi = AgencyId::new("FBI").unwrap();
        svc.upsert_activity("admin", "hunter2", &fbi, "98LetT1", b"21".to_vec())
            .unwrap();

        let persisted = std::fs::read_to_string(&path).unwrap();
        let digest_hex = md5_digest(password.as_bytes()).to_hex();
        assert!(!persisted.contains(&password));
        assert!(!persisted.contains(&digest_hex));
        assert!(!persisted.contains(&md5_digest(b"hunter2").to_hex()));
        // And the digest is never the plaintext itself.
        assert_ne!(digest_hex, password);
    }
}
