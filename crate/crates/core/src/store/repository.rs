use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::documents::{canonical_json, profile_hash, ProfileDocument};
use crate::catalog::Catalog;
use crate::error::{Error, Result};
use crate::profile::LibraryProfile;

/// One stored revision of a library profile.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileRecord {
    pub library_id: String,
    pub revision: u64,
    pub content_hash: String,
    pub previous_hash: Option<String>,
    pub profile: ProfileDocument,
}

impl ProfileRecord {
    pub fn library_profile(&self) -> LibraryProfile {
        self.profile.clone().into()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileSummary {
    pub library_id: String,
    pub name: String,
    pub version: String,
    pub latest_revision: u64,
    pub content_hash: String,
    pub assessment_count: usize,
}

/// Directory-backed profile store.
///
/// Layout: `profiles/<library_id>/<revision>.json` (append-only, hash chained)
/// plus `index.json` listing the latest revision of each library. Writes go
/// through one writer lock and land via temp-file rename; readers never see a
/// partial file.
#[derive(Debug)]
pub struct ProfileStore {
    root: PathBuf,
    writer: Mutex<()>,
}

const INDEX_FILE: &str = "index.json";
const PROFILES_DIR: &str = "profiles";

impl ProfileStore {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        let profiles = root.join(PROFILES_DIR);
        fs::create_dir_all(&profiles).map_err(|e| Error::io(&profiles, e))?;
        Ok(ProfileStore {
            root,
            writer: Mutex::new(()),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn library_dir(&self, library_id: &str) -> PathBuf {
        self.root.join(PROFILES_DIR).join(library_id)
    }

    fn record_path(&self, library_id: &str, revision: u64) -> PathBuf {
        self.library_dir(library_id).join(format!("{revision:08}.json"))
    }

    /// Validates and stores `profile`. An unchanged profile returns the latest
    /// record unless `force` is set.
    pub fn save_profile(&self, catalog: &Catalog, profile: &LibraryProfile, force: bool) -> Result<ProfileRecord> {
        profile.validate(catalog)?;
        let _guard = self.writer.lock().unwrap_or_else(|p| p.into_inner());
        let library_id = profile.library_id();
        let hash = profile_hash(profile);
        let latest = self.latest_revision(&library_id)?;
        let previous = match latest {
            Some(rev) => Some(self.read_record(&library_id, rev)?),
            None => None,
        };
        if let Some(prev) = &previous {
            if prev.content_hash == hash && !force {
                return Ok(prev.clone());
            }
        }
        let record = ProfileRecord {
            library_id: library_id.clone(),
            revision: latest.map_or(1, |r| r + 1),
            content_hash: hash,
            previous_hash: previous.map(|p| p.content_hash),
            profile: profile.into(),
        };
        let dir = self.library_dir(&library_id);
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        let path = self.record_path(&library_id, record.revision);
        write_new(&path, &canonical_json(&record)).map_err(|e| match e {
            WriteError::Exists => Error::WriteConflict {
                library: library_id.clone(),
                revision: record.revision,
            },
            WriteError::Io(err) => Error::io(&path, err),
        })?;
        self.update_index(&record)?;
        Ok(record)
    }

    /// Latest revision when `revision` is `None`.
    pub fn get_profile(&self, library_id: &str, revision: Option<u64>) -> Result<ProfileRecord> {
        let revision = match revision {
            Some(r) => r,
            None => self
                .latest_revision(library_id)?
                .ok_or_else(|| Error::UnknownLibrary(library_id.to_string()))?,
        };
        self.read_record(library_id, revision)
    }

    pub fn revisions(&self, library_id: &str) -> Result<Vec<u64>> {
        let dir = self.library_dir(library_id);
        if !dir.is_dir() {
            return Err(Error::UnknownLibrary(library_id.to_string()));
        }
        let mut out = Vec::new();
        for entry in fs::read_dir(&dir).map_err(|e| Error::io(&dir, e))? {
            let entry = entry.map_err(|e| Error::io(&dir, e))?;
            let name = entry.file_name();
            let name = name.to_string_lossy();
            if let Some(rev) = name.strip_suffix(".json").and_then(|s| s.parse::<u64>().ok()) {
                out.push(rev);
            }
        }
        out.sort_unstable();
        Ok(out)
    }

    /// Summaries of the latest revisions, sorted by library name.
    pub fn list_profiles(&self) -> Result<Vec<ProfileSummary>> {
        let mut out: Vec<ProfileSummary> = self.read_index()?.into_values().collect();
        out.sort_by(|a, b| a.name.cmp(&b.name).then_with(|| a.library_id.cmp(&b.library_id)));
        Ok(out)
    }

    fn latest_revision(&self, library_id: &str) -> Result<Option<u64>> {
        match self.revisions(library_id) {
            Ok(revs) => Ok(revs.last().copied()),
            Err(Error::UnknownLibrary(_)) => Ok(None),
            Err(e) => Err(e),
        }
    }

    fn read_record(&self, library_id: &str, revision: u64) -> Result<ProfileRecord> {
        let path = self.record_path(library_id, revision);
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                if self.library_dir(library_id).is_dir() {
                    return Err(Error::UnknownRevision {
                        library: library_id.to_string(),
                        revision,
                    });
                }
                return Err(Error::UnknownLibrary(library_id.to_string()));
            }
            Err(e) => return Err(Error::io(&path, e)),
        };
        let record: ProfileRecord =
            serde_json::from_slice(&bytes).map_err(|e| Error::parse(path.display().to_string(), e))?;
        if profile_hash(&record.library_profile()) != record.content_hash {
            return Err(Error::HashMismatch { path });
        }
        Ok(record)
    }

    fn read_index(&self) -> Result<BTreeMap<String, ProfileSummary>> {
        let path = self.root.join(INDEX_FILE);
        match fs::read(&path) {
            Ok(bytes) => serde_json::from_slice(&bytes).map_err(|e| Error::parse(path.display().to_string(), e)),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => self.rebuild_index(),
            Err(e) => Err(Error::io(&path, e)),
        }
    }

    /// Index contents recomputed from the revision files.
    fn rebuild_index(&self) -> Result<BTreeMap<String, ProfileSummary>> {
        let dir = self.root.join(PROFILES_DIR);
        let mut out = BTreeMap::new();
        for entry in fs::read_dir(&dir).map_err(|e| Error::io(&dir, e))? {
            let entry = entry.map_err(|e| Error::io(&dir, e))?;
            let id = entry.file_name().to_string_lossy().to_string();
            if let Some(rev) = self.latest_revision(&id)? {
                let record = self.read_record(&id, rev)?;
                out.insert(id, summary(&record));
            }
        }
        Ok(out)
    }

    fn update_index(&self, record: &ProfileRecord) -> Result<()> {
        let mut index = self.read_index()?;
        index.insert(record.library_id.clone(), summary(record));
        let path = self.root.join(INDEX_FILE);
        replace(&path, &canonical_json(&index)).map_err(|e| Error::io(&path, e))
    }
}

fn summary(record: &ProfileRecord) -> ProfileSummary {
    ProfileSummary {
        library_id: record.library_id.clone(),
        name: record.profile.library.name.clone(),
        version: record.profile.library.version.clone(),
        latest_revision: record.revision,
        content_hash: record.content_hash.clone(),
        assessment_count: record.profile.assessments.len(),
    }
}

enum WriteError {
    Exists,
    Io(std::io::Error),
}

fn temp_in(path: &Path, bytes: &[u8]) -> std::io::Result<tempfile::NamedTempFile> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    Ok(tmp)
}

/// Atomically creates `path`; fails if it already exists.
fn write_new(path: &Path, bytes: &[u8]) -> std::result::Result<(), WriteError> {
    let tmp = temp_in(path, bytes).map_err(WriteError::Io)?;
    tmp.persist_noclobber(path).map(|_| ()).map_err(|e| {
        if e.error.kind() == std::io::ErrorKind::AlreadyExists {
            WriteError::Exists
        } else {
            WriteError::Io(e.error)
        }
    })
}

/// Atomically replaces `path`.
fn replace(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    temp_in(path, bytes)?.persist(path).map(|_| ()).map_err(|e| e.error)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{builtin_catalog, Rating};
    use crate::profile::{Assessment, LibraryInfo};

    fn profile(name: &str, rating: i64) -> LibraryProfile {
        let mut p = LibraryProfile::new(LibraryInfo::named(name), builtin_catalog().version);
        p.assessments.push(Assessment::new("2a", Rating::from_int(rating).unwrap()));
        p
    }

    #[test]
    fn revisions_chain_and_dedupe() {
        let dir = tempfile::tempdir().unwrap();
        let store = ProfileStore::open(dir.path()).unwrap();
        let c = builtin_catalog();

        let r1 = store.save_profile(&c, &profile("Tink", 0), false).unwrap();
        assert_eq!(r1.revision, 1);
        assert_eq!(r1.previous_hash, None);

        let again = store.save_profile(&c, &profile("Tink", 0), false).unwrap();
        assert_eq!(again, r1);

        let forced = store.save_profile(&c, &profile("Tink", 0), true).unwrap();
        assert_eq!(forced.revision, 2);
        assert_eq!(forced.content_hash, r1.content_hash);

        let r3 = store.save_profile(&c, &profile("Tink", 1), false).unwrap();
        assert_eq!(r3.revision, 3);
        assert_eq!(r3.previous_hash.as_deref(), Some(r1.content_hash.as_str()));
        assert_ne!(r3.content_hash, r1.content_hash);

        assert_eq!(store.get_profile("tink", None).unwrap(), r3);
        assert_eq!(store.get_profile("tink", Some(1)).unwrap(), r1);
        assert_eq!(store.revisions("tink").unwrap(), vec![1, 2, 3]);
    }

    #[test]
    fn unknown_ids_and_revisions() {
        let dir = tempfile::tempdir().unwrap();
        let store = ProfileStore::open(dir.path()).unwrap();
        assert_eq!(store.get_profile("nope", None).unwrap_err().code(), "UNKNOWN_LIBRARY");
        store.save_profile(&builtin_catalog(), &profile("Tink", 0), false).unwrap();
        assert_eq!(store.get_profile("tink", Some(9)).unwrap_err().code(), "UNKNOWN_REVISION");
    }

    #[test]
    fn tampering_is_detected() {
        let dir = tempfile::tempdir().unwrap();
        let store = ProfileStore::open(dir.path()).unwrap();
        store.save_profile(&builtin_catalog(), &profile("Tink", 0), false).unwrap();
        let path = store.record_path("tink", 1);
        let text = fs::read_to_string(&path).unwrap().replace("\"rating\":0", "\"rating\":2");
        fs::write(&path, text).unwrap();
        assert_eq!(store.get_profile("tink", None).unwrap_err().code(), "HASH_MISMATCH");
    }

    #[test]
    fn existing_revision_file_is_a_conflict() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("00000001.json");
        assert!(write_new(&path, b"a").is_ok());
        assert!(matches!(write_new(&path, b"b"), Err(WriteError::Exists)));
        assert_eq!(fs::read(&path).unwrap(), b"a");
    }

    #[test]
    fn invalid_profiles_are_not_stored() {
        let dir = tempfile::tempdir().unwrap();
        let store = ProfileStore::open(dir.path()).unwrap();
        let mut p = profile("Tink", 0);
        p.catalog_version = "other".into();
        assert!(store.save_profile(&builtin_catalog(), &p, false).is_err());
        assert!(store.list_profiles().unwrap().is_empty());
    }

    #[test]
    fn index_is_rebuilt_when_missing() {
        let dir = tempfile::tempdir().unwrap();
        let store = ProfileStore::open(dir.path()).unwrap();
        let c = builtin_catalog();
        store.save_profile(&c, &profile("Tink", 0), false).unwrap();
        store.save_profile(&c, &profile("Bouncy Castle", 1), false).unwrap();
        fs::remove_file(dir.path().join(INDEX_FILE)).unwrap();
        let names: Vec<_> = store.list_profiles().unwrap().into_iter().map(|s| s.name).collect();
        assert_eq!(names, ["Bouncy Castle", "Tink"]);
    }
}
