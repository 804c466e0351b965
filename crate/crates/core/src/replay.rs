//! Per-asset replay protection.
//!
//! A frame from asset `A` carrying `(R, T)` is a replay when `A` has been seen
//! before and either `R <= R_last` or `T <= T_last`. State is only committed
//! after the frame authenticates.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::{Mutex, MutexGuard};

use thiserror::Error;

use crate::frame::{AssetId, Counter, Timestamp};

/// Leading bytes of an exported state blob.
pub const MAGIC: &[u8; 4] = b"SGBS";
pub const FORMAT_VERSION: u16 = 1;
const HEADER_LEN: usize = 4 + 2 + 4;
const ENTRY_LEN: usize = 2 + 4 + 8;
const CRC_LEN: usize = 4;

#[derive(Debug, Error)]
pub enum StateError {
    #[error("malformed state: {0}")]
    Malformed(&'static str),
    #[error("state file i/o: {0}")]
    Io(#[from] io::Error),
}

/// Last accepted `(counter, timestamp)` for one asset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ReplayEntry {
    pub counter: Counter,
    pub timestamp: Timestamp,
}

impl ReplayEntry {
    pub fn new(counter: Counter, timestamp: Timestamp) -> Self {
        Self { counter, timestamp }
    }

    /// Component-wise maximum.
    pub fn join(self, other: ReplayEntry) -> ReplayEntry {
        ReplayEntry {
            counter: self.counter.max(other.counter),
            timestamp: self.timestamp.max(other.timestamp),
        }
    }

    /// True when `(counter, timestamp)` is strictly newer on both components.
    pub fn admits(&self, counter: Counter, timestamp: Timestamp) -> bool {
        counter > self.counter && timestamp > self.timestamp
    }
}

/// Outcome of [`ReplayState::check`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReplayCheck {
    Pass,
    Replay,
}

/// Stateless form of the rule, shared by every state container.
pub fn check_entry(
    entry: Option<&ReplayEntry>,
    counter: Counter,
    timestamp: Timestamp,
) -> ReplayCheck {
    match entry {
        Some(e) if !e.admits(counter, timestamp) => ReplayCheck::Replay,
        _ => ReplayCheck::Pass,
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ReplayState {
    entries: BTreeMap<AssetId, ReplayEntry>,
}

impl ReplayState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, asset: AssetId) -> Option<&ReplayEntry> {
        self.entries.get(&asset)
    }

    pub fn iter(&self) -> impl Iterator<Item = (AssetId, ReplayEntry)> + '_ {
        self.entries.iter().map(|(a, e)| (*a, *e))
    }

    pub fn check(&self, asset: AssetId, counter: Counter, timestamp: Timestamp) -> ReplayCheck {
        check_entry(self.entries.get(&asset), counter, timestamp)
    }

    /// Record a verified frame. Callers must have passed [`Self::check`] and
    /// authenticated the frame first.
    pub fn commit(&mut self, asset: AssetId, counter: Counter, timestamp: Timestamp) {
        self.entries
            .insert(asset, ReplayEntry::new(counter, timestamp));
    }

    /// Atomic check-then-commit: `verify` runs only when the replay check
    /// passes, and the entry is committed only if `verify` returns `Some`.
    pub fn check_and_commit<T>(
        &mut self,
        asset: AssetId,
        counter: Counter,
        timestamp: Timestamp,
        verify: impl FnOnce() -> Option<T>,
    ) -> Result<Option<T>, ReplayCheck> {
        if self.check(asset, counter, timestamp) == ReplayCheck::Replay {
            return Err(ReplayCheck::Replay);
        }
        let out = verify();
        if out.is_some() {
            self.commit(asset, counter, timestamp);
        }
        Ok(out)
    }

    /// Join of two states: per asset, the component-wise maximum.
    pub fn merge(&self, remote: &ReplayState) -> ReplayState {
        let mut out = self.clone();
        out.merge_in(remote);
        out
    }

    pub fn merge_in(&mut self, remote: &ReplayState) {
        for (asset, entry) in &remote.entries {
            self.entries
                .entry(*asset)
                .and_modify(|e| *e = e.join(*entry))
                .or_insert(*entry);
        }
    }

    pub fn export(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + self.entries.len() * ENTRY_LEN + CRC_LEN);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_be_bytes());
        out.extend_from_slice(&(self.entries.len() as u32).to_be_bytes());
        for (asset, entry) in &self.entries {
            out.extend_from_slice(&asset.to_bytes());
            out.extend_from_slice(&entry.counter.to_bytes());
            out.extend_from_slice(&entry.timestamp.to_bytes());
        }
        let crc = crc32fast::hash(&out);
        out.extend_from_slice(&crc.to_be_bytes());
        out
    }

    pub fn import(bytes: &[u8]) -> Result<Self, StateError> {
        if bytes.len() < HEADER_LEN + CRC_LEN {
            return Err(StateError::Malformed("truncated header"));
        }
        if &bytes[..4] != MAGIC {
            return Err(StateError::Malformed("bad magic"));
        }
        if u16::from_be_bytes([bytes[4], bytes[5]]) != FORMAT_VERSION {
            return Err(StateError::Malformed("unsupported format version"));
        }
        let count = u32::from_be_bytes(bytes[6..10].try_into().unwrap()) as usize;
        let expected = count
            .checked_mul(ENTRY_LEN)
            .and_then(|n| n.checked_add(HEADER_LEN + CRC_LEN));
        if expected != Some(bytes.len()) {
            return Err(StateError::Malformed("length does not match entry count"));
        }
        let (body, crc) = bytes.split_at(bytes.len() - CRC_LEN);
        if crc32fast::hash(body).to_be_bytes() != crc {
            return Err(StateError::Malformed("checksum mismatch"));
        }
        let mut entries = BTreeMap::new();
        for chunk in body[HEADER_LEN..].chunks_exact(ENTRY_LEN) {
            let asset = AssetId::from_bytes([chunk[0], chunk[1]]);
            let entry = ReplayEntry::new(
                Counter::from_bytes(chunk[2..6].try_into().unwrap()),
                Timestamp::from_bytes(chunk[6..14].try_into().unwrap()),
            );
            if entries.insert(asset, entry).is_some() {
                return Err(StateError::Malformed("duplicate asset"));
            }
        }
        Ok(Self { entries })
    }
}

impl FromIterator<(AssetId, ReplayEntry)> for ReplayState {
    fn from_iter<I: IntoIterator<Item = (AssetId, ReplayEntry)>>(iter: I) -> Self {
        Self {
            entries: iter.into_iter().collect(),
        }
    }
}

const SHARDS: usize = 64;

/// Replay state shared between receiver threads.
///
/// Assets are spread over independently locked shards, so frames from
/// different assets verify concurrently while check-and-commit for one asset
/// is serialized.
#[derive(Debug)]
pub struct SharedReplayState {
    shards: Vec<Mutex<BTreeMap<AssetId, ReplayEntry>>>,
}

impl Default for SharedReplayState {
    fn default() -> Self {
        Self {
            shards: (0..SHARDS).map(|_| Mutex::new(BTreeMap::new())).collect(),
        }
    }
}

impl SharedReplayState {
    pub fn new() -> Self {
        Self::default()
    }

    fn shard(&self, asset: AssetId) -> MutexGuard<'_, BTreeMap<AssetId, ReplayEntry>> {
        // A panic inside `verify` leaves the map untouched, so poison is benign.
        self.shards[asset.0 as usize % SHARDS]
            .lock()
            .unwrap_or_else(|p| p.into_inner())
    }

    pub fn get(&self, asset: AssetId) -> Option<ReplayEntry> {
        self.shard(asset).get(&asset).copied()
    }

    /// Same contract as [`ReplayState::check_and_commit`], holding the asset's
    /// shard lock for the whole sequence.
    pub fn check_and_commit<T>(
        &self,
        asset: AssetId,
        verify: impl FnOnce(Option<&ReplayEntry>) -> (Option<T>, Option<ReplayEntry>),
    ) -> Option<T> {
        let mut shard = self.shard(asset);
        let (out, commit) = verify(shard.get(&asset));
        if let Some(entry) = commit {
            shard.insert(asset, entry);
        }
        out
    }

    pub fn snapshot(&self) -> ReplayState {
        self.shards
            .iter()
            .flat_map(|s| {
                s.lock()
                    .unwrap_or_else(|p| p.into_inner())
                    .iter()
                    .map(|(a, e)| (*a, *e))
                    .collect::<Vec<_>>()
            })
            .collect()
    }

    pub fn merge_in(&self, remote: &ReplayState) {
        for (asset, entry) in remote.iter() {
            let mut shard = self.shard(asset);
            shard
                .entry(asset)
                .and_modify(|e| *e = e.join(entry))
                .or_insert(entry);
        }
    }
}

impl From<ReplayState> for SharedReplayState {
    fn from(state: ReplayState) -> Self {
        let shared = SharedReplayState::new();
        shared.merge_in(&state);
        shared
    }
}

/// A replay-state file on disk, locked for exclusive use while open.
///
/// Saves write a sibling temporary, sync it and rename it into place, so the
/// file always holds a complete, checksummed snapshot.
#[derive(Debug)]
pub struct StateFile {
    path: PathBuf,
    _lock: File,
}

impl StateFile {
    pub fn open(path: impl AsRef<Path>) -> Result<(Self, ReplayState), StateError> {
        let path = path.as_ref().to_path_buf();
        let lock = OpenOptions::new()
            .write(true)
            .create(true)
            .truncate(false)
            .open(lock_path(&path))?;
        lock.lock()?;
        let state = match fs::read(&path) {
            Ok(bytes) => ReplayState::import(&bytes)?,
            Err(e) if e.kind() == io::ErrorKind::NotFound => ReplayState::new(),
            Err(e) => return Err(e.into()),
        };
        Ok((Self { path, _lock: lock }, state))
    }

    pub fn save(&self, state: &ReplayState) -> Result<(), StateError> {
        let tmp = self.path.with_extension("tmp");
        {
            let mut f = File::create(&tmp)?;
            f.write_all(&state.export())?;
            f.sync_all()?;
        }
        fs::rename(&tmp, &self.path)?;
        if let Some(dir) = self.path.parent().filter(|d| !d.as_os_str().is_empty()) {
            File::open(dir)?.sync_all()?;
        }
        Ok(())
    }
}

fn lock_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".lock");
    path.with_file_name(name)
}

#[cfg(test)]
mod tests {
    use super::*;

    const A: AssetId = AssetId(0xe802);

    fn state(entries: &[(u16, u32, u64)]) -> ReplayState {
        entries
            .iter()
            .map(|&(a, c, t)| (AssetId(a), ReplayEntry::new(Counter(c), Timestamp(t))))
            .collect()
    }

    #[test]
    fn unknown_asset_passes() {
        assert_eq!(
            ReplayState::new().check(A, Counter(0), Timestamp(0)),
            ReplayCheck::Pass
        );
    }

    #[test]
    fn strict_on_both_components() {
        let s = state(&[(0xe802, 42, 1000)]);
        assert_eq!(s.check(A, Counter(43), Timestamp(1001)), ReplayCheck::Pass);
        assert_eq!(
            s.check(A, Counter(43), Timestamp(1000)),
            ReplayCheck::Replay
        );
        assert_eq!(
            s.check(A, Counter(42), Timestamp(1001)),
            ReplayCheck::Replay
        );
        assert_eq!(
            s.check(A, Counter(41), Timestamp(2000)),
            ReplayCheck::Replay
        );
        assert_eq!(
            s.check(AssetId(1), Counter(0), Timestamp(0)),
            ReplayCheck::Pass
        );
    }

    #[test]
    fn commit_records_latest() {
        let mut s = ReplayState::new();
        s.commit(A, Counter(0x7e08_1a3d), Timestamp(0x0eb8_94a9_5380_3d93));
        assert_eq!(
            s.get(A),
            Some(&ReplayEntry::new(
                Counter(0x7e08_1a3d),
                Timestamp(0x0eb8_94a9_5380_3d93)
            ))
        );
        s.commit(A, Counter(0x7e08_1a3e), Timestamp(0x0eb8_94a9_5380_3d94));
        assert_eq!(s.get(A).unwrap().counter, Counter(0x7e08_1a3e));
        assert_eq!(s.len(), 1);
    }

    #[test]
    fn check_and_commit_only_on_success() {
        let mut s = ReplayState::new();
        assert_eq!(
            s.check_and_commit(A, Counter(1), Timestamp(1), || None::<()>),
            Ok(None)
        );
        assert!(s.is_empty());
        assert_eq!(
            s.check_and_commit(A, Counter(1), Timestamp(1), || Some(7)),
            Ok(Some(7))
        );
        assert_eq!(
            s.check_and_commit(A, Counter(1), Timestamp(1), || -> Option<()> {
                panic!("verify must not run on replay")
            }),
            Err(ReplayCheck::Replay)
        );
    }

    #[test]
    fn merge_takes_componentwise_max() {
        let a = state(&[(0xe802, 5, 100)]);
        let b = state(&[(0xe802, 7, 90)]);
        assert_eq!(a.merge(&b), state(&[(0xe802, 7, 100)]));
        assert_eq!(a.merge(&ReplayState::new()), a);
    }

    #[test]
    fn export_empty_is_header_only() {
        let blob = ReplayState::new().export();
        assert_eq!(blob.len(), HEADER_LEN + CRC_LEN);
        assert_eq!(&blob[..10], b"SGBS\x00\x01\x00\x00\x00\x00");
        assert!(ReplayState::import(&blob).unwrap().is_empty());
    }

    #[test]
    fn export_layout() {
        let blob = state(&[(0xe802, 0x7e08_1a3d, 0x0eb8_94a9_5380_3d93)]).export();
        assert_eq!(
            hex::encode(&blob[..HEADER_LEN + ENTRY_LEN]),
            "53474253000100000001e8027e081a3d0eb894a953803d93"
        );
    }

    #[test]
    fn import_rejects_corruption() {
        let blob = state(&[(1, 2, 3), (4, 5, 6)]).export();
        let mut bad_crc = blob.clone();
        *bad_crc.last_mut().unwrap() ^= 1;
        let mut bad_magic = blob.clone();
        bad_magic[0] = b'X';
        let mut bad_version = blob.clone();
        bad_version[5] = 2;
        let mut bad_count = blob.clone();
        bad_count[9] = 3;
        for (bytes, why) in [
            (bad_crc, "checksum mismatch"),
            (bad_magic, "bad magic"),
            (bad_version, "unsupported format version"),
            (bad_count, "length does not match entry count"),
            (
                blob[..blob.len() - 1].to_vec(),
                "length does not match entry count",
            ),
            (blob[..5].to_vec(), "truncated header"),
        ] {
            match ReplayState::import(&bytes) {
                Err(StateError::Malformed(m)) => assert_eq!(m, why),
                other => panic!("expected Malformed({why}), got {other:?}"),
            }
        }
    }

    #[test]
    fn import_rejects_duplicate_assets() {
        let mut blob = Vec::new();
        blob.extend_from_slice(b"SGBS\x00\x01\x00\x00\x00\x02");
        for _ in 0..2 {
            blob.extend_from_slice(&[0, 1, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 1]);
        }
        let crc = crc32fast::hash(&blob);
        blob.extend_from_slice(&crc.to_be_bytes());
        assert!(matches!(
            ReplayState::import(&blob),
            Err(StateError::Malformed("duplicate asset"))
        ));
    }

    #[test]
    fn shared_state_matches_plain() {
        let shared = SharedReplayState::new();
        let committed = shared.check_and_commit(A, |e| {
            assert!(e.is_none());
            (Some(()), Some(ReplayEntry::new(Counter(3), Timestamp(9))))
        });
        assert_eq!(committed, Some(()));
        shared.merge_in(&state(&[(0xe802, 1, 20), (7, 1, 1)]));
        assert_eq!(shared.snapshot(), state(&[(0xe802, 3, 20), (7, 1, 1)]));
        let plain: SharedReplayState = state(&[(9, 9, 9)]).into();
        assert_eq!(
            plain.get(AssetId(9)),
            Some(ReplayEntry::new(Counter(9), Timestamp(9)))
        );
    }

    #[test]
    fn state_file_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rx.sgbs");
        let s = state(&[(1, 2, 3)]);
        {
            let (file, loaded) = StateFile::open(&path).unwrap();
            assert!(loaded.is_empty());
            file.save(&s).unwrap();
        }
        let (_file, loaded) = StateFile::open(&path).unwrap();
        assert_eq!(loaded, s);
    }
}
