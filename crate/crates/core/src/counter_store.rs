//! Durable monotonic frame counter.
//!
//! The journal is a flat, append-only sequence of 16-byte records:
//!
//! ```text
//! version: u64 BE | counter: u32 BE | crc32(version || counter): u32 BE
//! ```
//!
//! Recovery adopts the valid record with the highest version. Torn tails and
//! records whose checksum does not match are skipped, so an interrupted append
//! can at worst lose the value that was being written, which was never handed
//! out because [`CounterStore::next`] returns only after the append is flushed.

use std::fs::{File, OpenOptions};
use std::io::{self, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::frame::Counter;

pub const RECORD_LEN: usize = 16;

#[derive(Debug, Error)]
pub enum CounterError {
    #[error("frame counter exhausted; refusing to wrap")]
    Exhausted,
    #[error("counter may not move backwards (current {current}, requested {requested})")]
    Backwards {
        current: Counter,
        requested: Counter,
    },
    #[error("counter journal i/o: {0}")]
    Storage(#[from] io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct JournalRecord {
    pub version: u64,
    pub counter: Counter,
}

impl JournalRecord {
    pub fn to_bytes(self) -> [u8; RECORD_LEN] {
        let mut out = [0u8; RECORD_LEN];
        out[..8].copy_from_slice(&self.version.to_be_bytes());
        out[8..12].copy_from_slice(&self.counter.to_bytes());
        let crc = crc32fast::hash(&out[..12]);
        out[12..].copy_from_slice(&crc.to_be_bytes());
        out
    }

    /// Returns `None` when the stored checksum does not match.
    pub fn from_bytes(bytes: &[u8; RECORD_LEN]) -> Option<Self> {
        let stored = u32::from_be_bytes(bytes[12..].try_into().unwrap());
        if crc32fast::hash(&bytes[..12]) != stored {
            return None;
        }
        Some(Self {
            version: u64::from_be_bytes(bytes[..8].try_into().unwrap()),
            counter: Counter::from_bytes(bytes[8..12].try_into().unwrap()),
        })
    }
}

/// Outcome of scanning a journal image.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Recovery {
    /// Highest-version valid record, if any.
    pub latest: Option<JournalRecord>,
    /// Byte length covered by whole records; anything past it is a torn tail.
    pub aligned_len: usize,
    pub valid_records: usize,
    pub invalid_records: usize,
}

impl Recovery {
    pub fn current(&self) -> Counter {
        self.latest.map(|r| r.counter).unwrap_or_default()
    }

    pub fn version(&self) -> u64 {
        self.latest.map(|r| r.version).unwrap_or(0)
    }

    pub fn torn_tail(&self, total_len: usize) -> usize {
        total_len - self.aligned_len
    }
}

/// Scan a journal image and pick the record to resume from.
pub fn scan(journal: &[u8]) -> Recovery {
    let mut recovery = Recovery {
        aligned_len: journal.len() - journal.len() % RECORD_LEN,
        ..Recovery::default()
    };
    for chunk in journal.chunks_exact(RECORD_LEN) {
        match JournalRecord::from_bytes(chunk.try_into().unwrap()) {
            Some(record) => {
                recovery.valid_records += 1;
                if recovery.latest.is_none_or(|l| record.version > l.version) {
                    recovery.latest = Some(record);
                }
            }
            None => recovery.invalid_records += 1,
        }
    }
    recovery
}

/// Where journal records go. `append` must not return until the record is durable.
pub trait JournalSink {
    fn append(&mut self, record: &[u8; RECORD_LEN]) -> io::Result<()>;
}

/// In-memory journal, used by tests and the simulator.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MemoryJournal {
    pub bytes: Vec<u8>,
    /// When set, the next append writes only this many bytes of the record and
    /// then fails, emulating power loss part-way through the write.
    pub fail_after: Option<usize>,
}

impl MemoryJournal {
    pub fn new(bytes: Vec<u8>) -> Self {
        Self {
            bytes,
            fail_after: None,
        }
    }
}

impl JournalSink for MemoryJournal {
    fn append(&mut self, record: &[u8; RECORD_LEN]) -> io::Result<()> {
        match self.fail_after.take() {
            Some(n) => {
                self.bytes.extend_from_slice(&record[..n.min(RECORD_LEN)]);
                Err(io::Error::other("simulated power loss during append"))
            }
            None => {
                self.bytes.extend_from_slice(record);
                Ok(())
            }
        }
    }
}

/// Journal file held under an exclusive advisory lock for the store's lifetime.
#[derive(Debug)]
pub struct FileJournal {
    file: File,
    path: PathBuf,
}

impl FileJournal {
    pub fn path(&self) -> &Path {
        &self.path
    }
}

impl JournalSink for FileJournal {
    fn append(&mut self, record: &[u8; RECORD_LEN]) -> io::Result<()> {
        self.file.seek(SeekFrom::End(0))?;
        self.file.write_all(record)?;
        self.file.sync_data()
    }
}

/// Monotonic counter backed by a journal.
///
/// `next` needs `&mut self`, so a store has exactly one writer.
#[derive(Debug)]
pub struct CounterStore<S> {
    sink: S,
    current: Counter,
    version: u64,
    recovery: Recovery,
}

impl CounterStore<MemoryJournal> {
    /// Recover from a journal image and keep appending in memory. A torn tail
    /// is dropped so later records stay aligned.
    pub fn recover(journal: &[u8]) -> Self {
        let recovery = scan(journal);
        let sink = MemoryJournal::new(journal[..recovery.aligned_len].to_vec());
        Self::with_sink(recovery, sink)
    }

    pub fn journal_bytes(&self) -> &[u8] {
        &self.sink.bytes
    }
}

impl CounterStore<FileJournal> {
    /// Open (creating if needed) a journal file, lock it, truncate any torn
    /// tail and recover.
    pub fn open(path: impl AsRef<Path>) -> Result<Self, CounterError> {
        let path = path.as_ref();
        let mut file = OpenOptions::new()
            .read(true)
            .write(true)
            .create(true)
            .truncate(false)
            .open(path)?;
        file.lock()?;
        let mut bytes = Vec::new();
        file.read_to_end(&mut bytes)?;
        let recovery = scan(&bytes);
        if recovery.aligned_len != bytes.len() {
            file.set_len(recovery.aligned_len as u64)?;
            file.sync_all()?;
        }
        let sink = FileJournal {
            file,
            path: path.to_path_buf(),
        };
        Ok(Self::with_sink(recovery, sink))
    }
}

impl<S: JournalSink> CounterStore<S> {
    pub fn with_sink(recovery: Recovery, sink: S) -> Self {
        Self {
            sink,
            current: recovery.current(),
            version: recovery.version(),
            recovery,
        }
    }

    /// Last counter value persisted (0 on a cold start).
    pub fn current(&self) -> Counter {
        self.current
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    /// What the scan found when this store was recovered.
    pub fn recovery(&self) -> &Recovery {
        &self.recovery
    }

    pub fn sink(&self) -> &S {
        &self.sink
    }

    pub fn sink_mut(&mut self) -> &mut S {
        &mut self.sink
    }

    /// Increment, persist, then hand out the new value.
    #[allow(clippy::should_implement_trait)]
    pub fn next(&mut self) -> Result<Counter, CounterError> {
        let next = self.current.checked_next().ok_or(CounterError::Exhausted)?;
        self.persist(next)?;
        Ok(next)
    }

    /// Move the counter forward to `target` without issuing it, e.g. when
    /// provisioning an asset to continue from a known counter.
    pub fn advance_to(&mut self, target: Counter) -> Result<(), CounterError> {
        if target < self.current {
            return Err(CounterError::Backwards {
                current: self.current,
                requested: target,
            });
        }
        self.persist(target)
    }

    fn persist(&mut self, counter: Counter) -> Result<(), CounterError> {
        let record = JournalRecord {
            version: self.version + 1,
            counter,
        };
        self.sink.append(&record.to_bytes())?;
        self.version = record.version;
        self.current = counter;
        Ok(())
    }
}

/// Rewrite a journal file so it holds only its newest valid record.
///
/// The replacement is written to a sibling file, synced, and renamed over the
/// original. Returns the record kept, if any.
pub fn compact(path: impl AsRef<Path>) -> Result<Option<JournalRecord>, CounterError> {
    let path = path.as_ref();
    let mut file = OpenOptions::new().read(true).write(true).open(path)?;
    file.lock()?;
    let mut bytes = Vec::new();
    file.read_to_end(&mut bytes)?;
    let latest = scan(&bytes).latest;
    let tmp = path.with_extension("compact.tmp");
    {
        let mut out = File::create(&tmp)?;
        if let Some(record) = latest {
            out.write_all(&record.to_bytes())?;
        }
        out.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        File::open(dir)?.sync_all()?;
    }
    Ok(latest)
}
