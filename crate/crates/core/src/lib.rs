//! Authenticated framing for fixed-size emergency beacon telemetry.
//!
//! A 202-bit beacon message is padded to 26 bytes and sealed with
//! AES-256-GCM under a per-asset key. The 96-bit nonce is the asset's
//! monotonic counter followed by the sender's timestamp, and the 16-bit asset
//! identifier rides in the clear as associated data, giving a 56-byte frame:
//!
//! ```text
//! asset id (2) | counter (4) | timestamp (8) | ciphertext (26) | tag (16)
//! ```
//!
//! Receivers reject frames outside an acceptance window, frames whose counter
//! or timestamp does not advance past the last accepted frame of that asset,
//! and anything that fails authentication.
//!
//! ```
//! use sgbcrypt::{AcceptancePolicy, AssetId, CounterStore, FixedClock, ReplayState, SecretKey, Timestamp};
//!
//! let key = SecretKey::from_bytes(&[0x11; 32]);
//! let mut counter = CounterStore::recover(&[]);
//! let clock = FixedClock(Timestamp(1_700_000_000));
//!
//! let frame = sgbcrypt::transmit(&key, AssetId(0x0102), &[0u8; 26], &clock, &mut counter).unwrap();
//! let mut state = ReplayState::new();
//! let verdict = sgbcrypt::receive(&key, &frame.to_bytes(), &clock, &mut state, &AcceptancePolicy::normal());
//! assert!(verdict.is_ok());
//! ```

pub mod aead;
pub mod counter_store;
pub mod frame;
pub mod linkmodel;
pub mod replay;
pub mod sim;
pub mod sweep;
pub mod txrx;
pub mod vector;

pub use aead::{AeadError, SealedPayload, SecretKey, open, seal};
pub use counter_store::{CounterError, CounterStore, FileJournal, JournalRecord, MemoryJournal};
pub use frame::{
    AssetId, Counter, FRAME_LEN, Frame, FrameError, Iv, PAYLOAD_LEN, Timestamp, build_iv,
    decode_frame, encode_frame, pack_sgb, split_iv, unpack_sgb,
};
pub use replay::{ReplayCheck, ReplayEntry, ReplayState, SharedReplayState, StateError};
pub use sweep::Exec;
pub use txrx::{
    AcceptancePolicy, Clock, FixedClock, ManualClock, PolicyMode, SystemClock, TransmitError,
    Verdict, VerdictKind, receive, receive_shared, transmit,
};
