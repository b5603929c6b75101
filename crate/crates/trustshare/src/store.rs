//! Registry of agencies, per-pair-per-category trust levels, per-pair mapping
//! functions, information repositories and selection orders, plus the
//! read-only duplicate snapshot the software agent works on.
//!
//! Persisted as line-oriented tagged text (one record per line, tab-separated,
//! leading record-kind tag); see `docs/store-format.md`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::ops::Deref;
use std::path::Path;

use crate::crypto::{public_key_bytes, public_key_from_bytes, PublicKey};
use crate::error::StoreError;
use crate::filter::SelectionOrder;
use crate::mapping::MappingFunctionSpec;
use crate::types::{AgencyId, AgencyRole};

pub const MAX_TRUST_LEVEL: u8 = 10;

/// Per (source, target, category) trust level in 0..=10.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TrustRecord {
    pub source: AgencyId,
    pub target: AgencyId,
    pub category: String,
    pub level: u8,
}

/// Splits a terrorist code into its category prefix (two digits followed by
/// three letters, e.g. `"98Let"`) and a non-empty suffix.
pub fn code_category(code: &str) -> Option<&str> {
    let bytes = code.as_bytes();
    if bytes.len() < 6 {
        return None;
    }
    let digits = bytes[..2].iter().all(|b| b.is_ascii_digit());
    let letters = bytes[2..5].iter().all(|b| b.is_ascii_alphabetic());
    let suffix_ok = code[5..].chars().all(|c| c.is_ascii_alphanumeric());
    (digits && letters && suffix_ok).then(|| &code[..5])
}

#[derive(Clone, Debug)]
struct AgencyRecord {
    role: AgencyRole,
    public_key: Option<PublicKey>,
}

/// The mutable master database of one deployment.
#[derive(Clone, Default, Debug)]
pub struct TrustStore {
    agencies: BTreeMap<AgencyId, AgencyRecord>,
    trust: BTreeMap<(AgencyId, AgencyId, String), u8>,
    mapfns: BTreeMap<(AgencyId, AgencyId), MappingFunctionSpec>,
    info: BTreeMap<AgencyId, BTreeMap<String, Vec<Vec<u8>>>>,
    orders: BTreeMap<String, SelectionOrder>,
}

/// Read-only duplicate of a [`TrustStore`] taken at a point in time; later
/// writes to the original do not show through.
#[derive(Clone, Debug)]
pub struct StoreSnapshot(TrustStore);

impl Deref for StoreSnapshot {
    type Target = TrustStore;
    fn deref(&self) -> &TrustStore {
        &self.0
    }
}

fn normalize_pair(a: &AgencyId, b: &AgencyId) -> (AgencyId, AgencyId) {
    if a <= b {
        (a.clone(), b.clone())
    } else {
        (b.clone(), a.clone())
    }
}

impl TrustStore {
    pub fn new() -> TrustStore {
        TrustStore::default()
    }

    pub fn register_agency(
        &mut self,
        id: AgencyId,
        role: AgencyRole,
        public_key: Option<PublicKey>,
    ) -> Result<(), StoreError> {
        if self.agencies.contains_key(&id) {
            return Err(StoreError::DuplicateAgency(id.as_str().into()));
        }
        self.agencies.insert(id, AgencyRecord { role, public_key });
        Ok(())
    }

    pub fn set_public_key(&mut self, id: &AgencyId, key: PublicKey) -> Result<(), StoreError> {
        let record = self
            .agencies
            .get_mut(id)
            .ok_or_else(|| StoreError::UnknownAgency(id.as_str().into()))?;
        record.public_key = Some(key);
        Ok(())
    }

    pub fn agency_ids(&self) -> impl Iterator<Item = &AgencyId> {
        self.agencies.keys()
    }

    pub fn agency_role(&self, id: &AgencyId) -> Result<AgencyRole, StoreError> {
        self.agencies
            .get(id)
            .map(|r| r.role)
            .ok_or_else(|| StoreError::UnknownAgency(id.as_str().into()))
    }

    pub fn public_key(&self, id: &AgencyId) -> Result<&PublicKey, StoreError> {
        self.agencies
            .get(id)
            .and_then(|r| r.public_key.as_ref())
            .ok_or_else(|| StoreError::UnknownAgency(id.as_str().into()))
    }

    fn require_agency(&self, id: &AgencyId) -> Result<(), StoreError> {
        if self.agencies.contains_key(id) {
            Ok(())
        } else {
            Err(StoreError::UnknownAgency(id.as_str().into()))
        }
    }

    pub fn set_trust(&mut self, record: TrustRecord) -> Result<(), StoreError> {
        self.require_agency(&record.source)?;
        self.require_agency(&record.target)?;
        if record.level > MAX_TRUST_LEVEL {
            return Err(StoreError::BadTrustLevel(record.level));
        }
        self.trust
            .insert((record.source, record.target, record.category), record.level);
        Ok(())
    }

    /// Missing records read as level 0: deny by default.
    pub fn get_trust(
        &self,
        source: &AgencyId,
        target: &AgencyId,
        category: &str,
    ) -> Result<u8, StoreError> {
        self.require_agency(source)?;
        self.require_agency(target)?;
        Ok(self
            .trust
            .get(&(source.clone(), target.clone(), category.to_string()))
            .copied()
            .unwrap_or(0))
    }

    pub fn trust_records(&self) -> impl Iterator<Item = TrustRecord> + '_ {
        self.trust.iter().map(|((s, t, c), &level)| TrustRecord {
            source: s.clone(),
            target: t.clone(),
            category: c.clone(),
            level,
        })
    }

    /// The mapping function is shared by the unordered pair.
    pub fn set_mapping(
        &mut self,
        a: &AgencyId,
        b: &AgencyId,
        spec: MappingFunctionSpec,
    ) -> Result<(), StoreError> {
        self.require_agency(a)?;
        self.require_agency(b)?;
        self.mapfns.insert(normalize_pair(a, b), spec);
        Ok(())
    }

    pub fn get_mapping(&self, a: &AgencyId, b: &AgencyId) -> Option<&MappingFunctionSpec> {
        self.mapfns.get(&normalize_pair(a, b))
    }

    pub fn mapping_count(&self) -> usize {
        self.mapfns.len()
    }

    pub fn set_info(
        &mut self,
        owner: &AgencyId,
        code: &str,
        items: Vec<Vec<u8>>,
    ) -> Result<(), StoreError> {
        self.require_agency(owner)?;
        if code_category(code).is_none() {
            return Err(StoreError::BadCode(code.into()));
        }
        self.info
            .entry(owner.clone())
            .or_default()
            .insert(code.to_string(), items);
        Ok(())
    }

    pub fn append_info_item(
        &mut self,
        owner: &AgencyId,
        code: &str,
        item: Vec<u8>,
    ) -> Result<(), StoreError> {
        self.require_agency(owner)?;
        if code_category(code).is_none() {
            return Err(StoreError::BadCode(code.into()));
        }
        self.info
            .entry(owner.clone())
            .or_default()
            .entry(code.to_string())
            .or_default()
            .push(item);
        Ok(())
    }

    pub fn get_info(&self, owner: &AgencyId, code: &str) -> Option<&[Vec<u8>]> {
        self.info.get(owner)?.get(code).map(Vec::as_slice)
    }

    /// Looks a code up across every repository in this store; used by the
    /// gateway's read-only query path.
    pub fn find_info(&self, code: &str) -> Option<(&AgencyId, &[Vec<u8>])> {
        self.info
            .iter()
            .find_map(|(owner, entries)| entries.get(code).map(|items| (owner, items.as_slice())))
    }

    pub fn set_order(&mut self, category: &str, order: SelectionOrder) {
        self.orders.insert(category.to_string(), order);
    }

    pub fn get_order(&self, category: &str) -> Option<&SelectionOrder> {
        self.orders.get(category)
    }

    /// The duplicate database the software agent operates on.
    pub fn snapshot_duplicate(&self) -> StoreSnapshot {
        StoreSnapshot(self.clone())
    }

    pub fn value_equal(&self, other: &TrustStore) -> bool {
        self.agencies.keys().eq(other.agencies.keys())
            && self
                .agencies
                .iter()
                .zip(&other.agencies)
                .all(|((_, a), (_, b))| {
                    a.role == b.role && a.public_key == b.public_key
                })
            && self.trust == other.trust
            && self.mapfns == other.mapfns
            && self.info == other.info
            && self.orders == other.orders
    }

    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for (id, record) in &self.agencies {
            let key = record
                .public_key
                .as_ref()
                .map(|k| hex::encode(public_key_bytes(k)))
                .unwrap_or_else(|| "-".into());
            writeln!(out, "AGENCY\t{id}\t{}\t{key}", record.role.as_str()).unwrap();
        }
        for ((src, tgt, category), level) in &self.trust {
            writeln!(out, "TRUST\t{src}\t{tgt}\t{category}\t{level}").unwrap();
        }
        for ((a, b), spec) in &self.mapfns {
            writeln!(out, "MAPFN\t{a}\t{b}\t{spec}").unwrap();
        }
        for (category, order) in &self.orders {
            let indices: Vec<String> = order.indices().iter().map(|i| i.to_string()).collect();
            writeln!(out, "MAPORDER\t{category}\t{}", indices.join(",")).unwrap();
        }
        for (owner, entries) in &self.info {
            for (code, items) in entries {
                let rendered: Vec<String> = items.iter().map(|i| encode_item(i)).collect();
                let joined = if rendered.is_empty() { "-".into() } else { rendered.join(",") };
                writeln!(out, "INFO\t{owner}\t{code}\t{joined}").unwrap();
            }
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<(), StoreError> {
        std::fs::write(path, self.serialize())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<TrustStore, StoreError> {
        TrustStore::parse(&std::fs::read_to_string(path)?)
    }

    pub fn parse(text: &str) -> Result<TrustStore, StoreError> {
        let mut store = TrustStore::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let fail = |reason: String| StoreError::Parse { line, reason };
            let trimmed = raw.trim_end_matches('\r');
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = trimmed.split('\t').collect();
            let record = |n: usize| -> Result<(), StoreError> {
                if fields.len() == n {
                    Ok(())
                } else {
                    Err(fail(format!("expected {n} fields, got {}", fields.len())))
                }
            };
            let agency = |s: &str| AgencyId::new(s).map_err(|e| fail(e));
            match fields[0] {
                "AGENCY" => {
                    record(4)?;
                    let id = agency(fields[1])?;
                    let role = AgencyRole::parse(fields[2])
                        .ok_or_else(|| fail(format!("bad role {:?}", fields[2])))?;
                    let key = if fields[3] == "-" {
                        None
                    } else {
                        let bytes = hex::decode(fields[3])
                            .map_err(|e| fail(format!("bad key hex: {e}")))?;
                        Some(
                            public_key_from_bytes(&bytes)
                                .map_err(|e| fail(format!("bad public key: {e}")))?,
                        )
                    };
                    store
                        .register_agency(id, role, key)
                        .map_err(|e| fail(e.to_string()))?;
                }
                "TRUST" => {
                    record(5)?;
                    let level: u8 = fields[4]
                        .parse()
                        .map_err(|_| fail(format!("bad trust level {:?}", fields[4])))?;
                    store
                        .set_trust(TrustRecord {
                            source: agency(fields[1])?,
                            target: agency(fields[2])?,
                            category: fields[3].to_string(),
                            level,
                        })
                        .map_err(|e| fail(e.to_string()))?;
                }
                "MAPFN" => {
                    record(4)?;
                    let spec = MappingFunctionSpec::parse(fields[3]).map_err(|e| fail(e))?;
                    let (a, b) = (agency(fields[1])?, agency(fields[2])?);
                    store.set_mapping(&a, &b, spec).map_err(|e| fail(e.to_string()))?;
                }
                "MAPORDER" => {
                    record(3)?;
                    let indices = fields[2]
                        .split(',')
                        .map(|s| s.parse::<usize>().map_err(|_| fail(format!("bad index {s:?}"))))
                        .collect::<Result<Vec<_>, _>>()?;
                    let order = SelectionOrder::new(indices).map_err(|e| fail(e))?;
                    store.set_order(fields[1], order);
                }
                "INFO" => {
                    record(4)?;
                    let owner = agency(fields[1])?;
                    let items = if fields[3] == "-" {
                        Vec::new()
                    } else {
                        fields[3]
                            .split(',')
                            .map(|tok| decode_item(tok).map_err(|e| fail(e)))
                            .collect::<Result<Vec<_>, _>>()?
                    };
                    store
                        .set_info(&owner, fields[2], items)
                        .map_err(|e| fail(e.to_string()))?;
                }
                other => return Err(fail(format!("unknown record kind {other:?}"))),
            }
        }
        Ok(store)
    }
}

/// Items are arbitrary bytes; plain `[A-Za-z0-9._-]` bytes pass through and
/// everything else is `%XX` percent-encoded so fixtures stay hand-editable.
pub fn encode_item(item: &[u8]) -> String {
    let mut out = String::new();
    for &b in item {
        let plain = b.is_ascii_alphanumeric() || matches!(b, b'.' | b'_');
        if plain {
            out.push(b as char);
        } else {
            write!(out, "%{b:02X}").unwrap();
        }
    }
    out
}

pub fn decode_item(token: &str) -> Result<Vec<u8>, String> {
    let mut out = Vec::new();
    let mut chars = token.bytes();
    while let Some(b) = chars.next() {
        if b == b'%' {
            let hi = chars.next().ok_or("truncated escape")?;
            let lo = chars.next().ok_or("truncated escape")?;
            let hex = [hi, lo];
            let s = std::str::from_utf8(&hex).map_err(|_| "bad escape")?;
            out.push(u8::from_str_radix(s, 16).map_err(|e| e.to_string())?);
        } else {
            out.push(b);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crypto::generate_keypair;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn id(s: &str) -> AgencyId {
        AgencyId::new(s).unwrap()
    }

    fn sample_store() -> TrustStore {
        let mut rng = ChaCha20Rng::seed_from_u64(60);
        let kp = generate_keypair(1024, &mut rng).unwrap();
        let mut store = TrustStore::new();
        store
            .register_agency(id("CIA"), AgencyRole::IntelligenceAgency, Some(kp.public_part))
            .unwrap();
        store
            .register_agency(id("FBI"), AgencyRole::IntelligenceAgency, None)
            .unwrap();
        store
            .set_trust(TrustRecord {
                source: id("CIA"),
                target: id("FBI"),
                category: "98Let".into(),
                level: 9,
            })
            .unwrap();
        store
            .set_mapping(&id("CIA"), &id("FBI"), MappingFunctionSpec::parse("+*").unwrap())
            .unwrap();
        store
            .set_info(&id("FBI"), "98LetT1", vec![b"16".to_vec(), b"odd item\t,%".to_vec()])
            .unwrap();
        store.set_order("98Let", SelectionOrder::new(vec![5, 2, 4, 7, 1, 0, 8, 9, 3, 6]).unwrap());
        store
    }

    #[test]
    fn register_and_lookup() {
        let store = sample_store();
        assert!(store.public_key(&id("CIA")).is_ok());
        assert!(matches!(store.public_key(&id("RAW")), Err(StoreError::UnknownAgency(_))));
        let mut store = store;
        assert!(matches!(
            store.register_agency(id("CIA"), AgencyRole::IntelligenceAgency, None),
            Err(StoreError::DuplicateAgency(_))
        ));
    }

    #[test]
    fn trust_is_deny_by_default() {
        let store = sample_store();
        assert_eq!(store.get_trust(&id("CIA"), &id("FBI"), "98Let").unwrap(), 9);
        assert_eq!(store.get_trust(&id("FBI"), &id("CIA"), "98Let").unwrap(), 0);
        assert_eq!(store.get_trust(&id("CIA"), &id("FBI"), "03Alq").unwrap(), 0);
    }

    #[test]
    fn trust_level_range_checked() {
        let mut store = sample_store();
        let record = TrustRecord {
            source: id("CIA"),
            target: id("FBI"),
            category: "98Let".into(),
            level: 11,
        };
        assert!(matches!(store.set_trust(record), Err(StoreError::BadTrustLevel(11))));
    }

    #[test]
    fn mapping_is_unordered() {
        let store = sample_store();
        assert_eq!(
            store.get_mapping(&id("CIA"), &id("FBI")),
            store.get_mapping(&id("FBI"), &id("CIA"))
        );
    }

    #[test]
    fn code_category_pattern() {
        assert_eq!(code_category("98LetT1"), Some("98Let"));
        assert_eq!(code_category("03AlqT3"), Some("03Alq"));
        assert_eq!(code_category("98Let"), None); // no suffix
        assert_eq!(code_category("9XLetT1"), None);
        assert_eq!(code_category("98Le1T1"), None);
    }

    #[test]
    fn snapshot_is_isolated() {
        let mut store = sample_store();
        let snapshot = store.snapshot_duplicate();
        assert!(snapshot.value_equal(&store));
        store
            .set_trust(TrustRecord {
                source: id("CIA"),
                target: id("FBI"),
                category: "98Let".into(),
                level: 2,
            })
            .unwrap();
        assert_eq!(snapshot.get_trust(&id("CIA"), &id("FBI"), "98Let").unwrap(), 9);
        assert!(!snapshot.value_equal(&store));

        let empty = TrustStore::new();
        assert!(empty.snapshot_duplicate().value_equal(&empty));
    }

    #[test]
    fn persistence_round_trip() {
        let store = sample_store();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("store.tsv");
        store.save(&path).unwrap();
        let loaded = TrustStore::load(&path).unwrap();
        assert!(loaded.value_equal(&store));
        // Canonical serialization: a second save is byte-identical.
        assert_eq!(store.serialize(), loaded.serialize());
    }

    #[test]
    fn corrupt_line_names_the_line() {
        let store = sample_store();
        let mut text = store.serialize();
        text.push_str("TRUST\tCIA\tFBI\t98Let\televen\n");
        let lines = text.lines().count();
        match TrustStore::parse(&text) {
            Err(StoreError::Parse { line, .. }) => assert_eq!(line, lines),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn item_escaping_round_trips() {
        for item in [&b""[..], b"16", b"odd item\t,%", b"\x00\xFF%41"] {
            assert_eq!(decode_item(&encode_item(item)).unwrap(), item);
        }
    }
}
