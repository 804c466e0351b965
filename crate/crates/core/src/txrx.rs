//! Transmitter and receiver pipelines.
//!
//! Receive evaluates, in order: length, replay state, acceptance window,
//! authenticated decryption. The first failing stage decides the verdict and
//! replay state changes only when every stage passes.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{SystemTime, UNIX_EPOCH};

use thiserror::Error;

use crate::aead::{self, SealedPayload, SecretKey};
use crate::counter_store::{CounterError, CounterStore, JournalSink};
use crate::frame::{AssetId, Frame, Iv, PAYLOAD_LEN, Timestamp};
use crate::replay::{ReplayCheck, ReplayEntry, ReplayState, SharedReplayState, check_entry};

/// Source of whole-second timestamps.
pub trait Clock {
    fn now(&self) -> Timestamp;
}

impl<C: Clock + ?Sized> Clock for &C {
    fn now(&self) -> Timestamp {
        (**self).now()
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> Timestamp {
        // Sub-second precision is truncated.
        let secs = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Timestamp(secs)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FixedClock(pub Timestamp);

impl Clock for FixedClock {
    fn now(&self) -> Timestamp {
        self.0
    }
}

/// Settable clock for scripted scenarios; may be moved backwards.
#[derive(Debug, Default)]
pub struct ManualClock(AtomicU64);

impl ManualClock {
    pub fn new(start: Timestamp) -> Self {
        Self(AtomicU64::new(start.0))
    }

    pub fn set(&self, t: Timestamp) {
        self.0.store(t.0, Ordering::SeqCst);
    }

    pub fn advance(&self, secs: u64) {
        self.0.fetch_add(secs, Ordering::SeqCst);
    }

    pub fn rewind(&self, secs: u64) {
        let _ = self
            .0
            .fetch_update(Ordering::SeqCst, Ordering::SeqCst, |t| {
                Some(t.saturating_sub(secs))
            });
    }
}

impl Clock for ManualClock {
    fn now(&self) -> Timestamp {
        Timestamp(self.0.load(Ordering::SeqCst))
    }
}

/// Default acceptance window in seconds.
pub const NORMAL_WINDOW_SECS: u64 = 2;
/// Default window for store-and-forward delivery.
pub const DTN_WINDOW_SECS: u64 = 86_400;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolicyMode {
    Normal,
    DtnRelaxed,
    /// Timestamp window disabled (receiver time untrusted); replay state
    /// still applies to both components.
    CounterOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AcceptancePolicy {
    pub window_seconds: u64,
    pub mode: PolicyMode,
}

impl AcceptancePolicy {
    pub const fn normal() -> Self {
        Self {
            window_seconds: NORMAL_WINDOW_SECS,
            mode: PolicyMode::Normal,
        }
    }

    pub const fn dtn(window_seconds: u64) -> Self {
        Self {
            window_seconds,
            mode: PolicyMode::DtnRelaxed,
        }
    }

    pub const fn counter_only() -> Self {
        Self {
            window_seconds: 0,
            mode: PolicyMode::CounterOnly,
        }
    }

    fn within_window(&self, receiver: Timestamp, sender: Timestamp) -> bool {
        match self.mode {
            PolicyMode::CounterOnly => true,
            PolicyMode::Normal | PolicyMode::DtnRelaxed => {
                receiver.abs_diff(sender) <= self.window_seconds
            }
        }
    }
}

impl Default for AcceptancePolicy {
    fn default() -> Self {
        Self::normal()
    }
}

/// The receiver's single outcome for a frame.
#[derive(Clone, PartialEq, Eq)]
pub enum Verdict {
    Ok([u8; PAYLOAD_LEN]),
    Malformed,
    Stale,
    Replay,
    AuthFail,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VerdictKind {
    Ok,
    Malformed,
    Stale,
    Replay,
    AuthFail,
}

impl VerdictKind {
    pub const ALL: [VerdictKind; 5] = [
        VerdictKind::Ok,
        VerdictKind::Malformed,
        VerdictKind::Stale,
        VerdictKind::Replay,
        VerdictKind::AuthFail,
    ];

    pub fn name(self) -> &'static str {
        match self {
            VerdictKind::Ok => "OK",
            VerdictKind::Malformed => "MALFORMED",
            VerdictKind::Stale => "STALE",
            VerdictKind::Replay => "REPLAY",
            VerdictKind::AuthFail => "AUTHFAIL",
        }
    }
}

impl fmt::Display for VerdictKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Verdict {
    pub fn kind(&self) -> VerdictKind {
        match self {
            Verdict::Ok(_) => VerdictKind::Ok,
            Verdict::Malformed => VerdictKind::Malformed,
            Verdict::Stale => VerdictKind::Stale,
            Verdict::Replay => VerdictKind::Replay,
            Verdict::AuthFail => VerdictKind::AuthFail,
        }
    }

    pub fn is_ok(&self) -> bool {
        matches!(self, Verdict::Ok(_))
    }

    pub fn plaintext(&self) -> Option<&[u8; PAYLOAD_LEN]> {
        match self {
            Verdict::Ok(p) => Some(p),
            _ => None,
        }
    }
}

// Plaintext stays out of logs.
impl fmt::Debug for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Verdict::{}", self.kind())
    }
}

#[derive(Debug, Error)]
pub enum TransmitError {
    #[error(transparent)]
    Counter(#[from] CounterError),
}

/// Build the next frame for `asset`. The counter is persisted before the
/// frame exists; on any counter error nothing is emitted.
pub fn transmit<S: JournalSink>(
    key: &SecretKey,
    asset: AssetId,
    payload: &[u8; PAYLOAD_LEN],
    clock: &impl Clock,
    store: &mut CounterStore<S>,
) -> Result<Frame, TransmitError> {
    let counter = store.next()?;
    let iv = Iv::new(counter, clock.now());
    let sealed = aead::seal(key, iv, payload, asset);
    Ok(Frame {
        aad: asset,
        iv,
        ciphertext: sealed.to_bytes(),
    })
}

/// Stages 2-4 for an already decoded frame. Returns the verdict and the entry
/// to commit on success.
fn evaluate(
    key: &SecretKey,
    frame: &Frame,
    clock: &impl Clock,
    last: Option<&ReplayEntry>,
    policy: &AcceptancePolicy,
) -> (Verdict, Option<ReplayEntry>) {
    let Iv { counter, timestamp } = frame.iv;
    if check_entry(last, counter, timestamp) == ReplayCheck::Replay {
        return (Verdict::Replay, None);
    }
    if !policy.within_window(clock.now(), timestamp) {
        return (Verdict::Stale, None);
    }
    let sealed = SealedPayload::from_bytes(&frame.ciphertext);
    match aead::open(key, frame.iv, &sealed, frame.aad) {
        Ok(plaintext) => (
            Verdict::Ok(*plaintext),
            Some(ReplayEntry::new(counter, timestamp)),
        ),
        Err(_) => (Verdict::AuthFail, None),
    }
}

pub fn receive(
    key: &SecretKey,
    frame_bytes: &[u8],
    clock: &impl Clock,
    state: &mut ReplayState,
    policy: &AcceptancePolicy,
) -> Verdict {
    let Ok(frame) = Frame::from_bytes(frame_bytes) else {
        return Verdict::Malformed;
    };
    let (verdict, commit) = evaluate(key, &frame, clock, state.get(frame.aad), policy);
    if let Some(entry) = commit {
        state.commit(frame.aad, entry.counter, entry.timestamp);
    }
    verdict
}

/// [`receive`] against state shared between threads.
pub fn receive_shared(
    key: &SecretKey,
    frame_bytes: &[u8],
    clock: &impl Clock,
    state: &SharedReplayState,
    policy: &AcceptancePolicy,
) -> Verdict {
    let Ok(frame) = Frame::from_bytes(frame_bytes) else {
        return Verdict::Malformed;
    };
    state
        .check_and_commit(frame.aad, |last| {
            let (verdict, commit) = evaluate(key, &frame, clock, last, policy);
            (Some(verdict), commit)
        })
        .expect("evaluate always yields a verdict")
}
