//! Known-answer vector files: one `name = hexvalue` pair per line.
//!
//! ```text
//! key = 1c195d64...
//! aad = e802
//! counter = 7e081a3d
//! timestamp = 0eb894a953803d93
//! plaintext = e9c53409...
//! ciphertext = 62ab5d2d...
//! tag = 27d94586...
//! frame = e8027e08...
//! ```

use std::fmt::Write as _;

use thiserror::Error;
use zeroize::Zeroizing;

use crate::aead::{self, KEY_LEN, SealedPayload, SecretKey};
use crate::frame::{AssetId, Counter, FRAME_LEN, Frame, Iv, PAYLOAD_LEN, TAG_LEN, Timestamp};
use crate::sweep::{Exec, map_indices};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VectorError {
    #[error("line {0}: expected `name = hexvalue`")]
    Syntax(usize),
    #[error("unknown field `{0}`")]
    UnknownField(String),
    #[error("duplicate field `{0}`")]
    Duplicate(&'static str),
    #[error("missing field `{0}`")]
    Missing(&'static str),
    #[error("field `{0}` is not lowercase hex")]
    Hex(&'static str),
    #[error("field `{field}` must be {expected} bytes, got {actual}")]
    Length {
        field: &'static str,
        expected: usize,
        actual: usize,
    },
}

pub const FIELDS: [(&str, usize); 8] = [
    ("key", KEY_LEN),
    ("aad", 2),
    ("counter", 4),
    ("timestamp", 8),
    ("plaintext", PAYLOAD_LEN),
    ("ciphertext", PAYLOAD_LEN),
    ("tag", TAG_LEN),
    ("frame", FRAME_LEN),
];

#[derive(Clone, PartialEq, Eq)]
pub struct VectorFile {
    pub key: Zeroizing<[u8; KEY_LEN]>,
    pub aad: AssetId,
    pub counter: Counter,
    pub timestamp: Timestamp,
    pub plaintext: [u8; PAYLOAD_LEN],
    pub ciphertext: [u8; PAYLOAD_LEN],
    pub tag: [u8; TAG_LEN],
    pub frame: [u8; FRAME_LEN],
}

impl std::fmt::Debug for VectorFile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("VectorFile")
            .field("aad", &self.aad)
            .field("counter", &self.counter)
            .field("timestamp", &self.timestamp)
            .finish_non_exhaustive()
    }
}

impl VectorFile {
    /// Seal the given inputs and record every derived field.
    pub fn generate(
        key: &[u8; KEY_LEN],
        aad: AssetId,
        counter: Counter,
        timestamp: Timestamp,
        plaintext: &[u8; PAYLOAD_LEN],
    ) -> Self {
        let iv = Iv::new(counter, timestamp);
        let sealed = aead::seal(&SecretKey::from_bytes(key), iv, plaintext, aad);
        let frame = Frame {
            aad,
            iv,
            ciphertext: sealed.to_bytes(),
        };
        Self {
            key: Zeroizing::new(*key),
            aad,
            counter,
            timestamp,
            plaintext: *plaintext,
            ciphertext: sealed.body,
            tag: sealed.tag,
            frame: frame.to_bytes(),
        }
    }

    /// Random key, asset, IV and plaintext drawn from `rng`.
    pub fn random<R: rand_core::RngCore>(rng: &mut R) -> Self {
        let mut key = Zeroizing::new([0u8; KEY_LEN]);
        rng.fill_bytes(key.as_mut());
        let mut plaintext = [0u8; PAYLOAD_LEN];
        rng.fill_bytes(&mut plaintext);
        let aad = AssetId(rng.next_u32() as u16);
        let counter = Counter(rng.next_u32());
        let timestamp = Timestamp(rng.next_u64());
        Self::generate(&key, aad, counter, timestamp, &plaintext)
    }

    pub fn parse(text: &str) -> Result<Self, VectorError> {
        let mut values: [Option<Vec<u8>>; 8] = Default::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (name, value) = line
                .split_once('=')
                .ok_or(VectorError::Syntax(lineno + 1))?;
            let (name, value) = (name.trim(), value.trim());
            let idx = FIELDS
                .iter()
                .position(|(n, _)| *n == name)
                .ok_or_else(|| VectorError::UnknownField(name.to_string()))?;
            let (field, len) = FIELDS[idx];
            if values[idx].is_some() {
                return Err(VectorError::Duplicate(field));
            }
            if value.bytes().any(|b| b.is_ascii_uppercase()) {
                return Err(VectorError::Hex(field));
            }
            let bytes = hex::decode(value).map_err(|_| VectorError::Hex(field))?;
            if bytes.len() != len {
                return Err(VectorError::Length {
                    field,
                    expected: len,
                    actual: bytes.len(),
                });
            }
            values[idx] = Some(bytes);
        }
        let mut take = |i: usize| values[i].take().ok_or(VectorError::Missing(FIELDS[i].0));
        // Lengths were checked above, so the conversions cannot fail.
        let key: [u8; KEY_LEN] = take(0)?.try_into().unwrap();
        let aad: [u8; 2] = take(1)?.try_into().unwrap();
        let counter: [u8; 4] = take(2)?.try_into().unwrap();
        let timestamp: [u8; 8] = take(3)?.try_into().unwrap();
        Ok(Self {
            key: Zeroizing::new(key),
            aad: AssetId::from_bytes(aad),
            counter: Counter::from_bytes(counter),
            timestamp: Timestamp::from_bytes(timestamp),
            plaintext: take(4)?.try_into().unwrap(),
            ciphertext: take(5)?.try_into().unwrap(),
            tag: take(6)?.try_into().unwrap(),
            frame: take(7)?.try_into().unwrap(),
        })
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let fields: [(&str, &[u8]); 8] = [
            ("key", self.key.as_ref()),
            ("aad", &self.aad.to_bytes()),
            ("counter", &self.counter.to_bytes()),
            ("timestamp", &self.timestamp.to_bytes()),
            ("plaintext", &self.plaintext),
            ("ciphertext", &self.ciphertext),
            ("tag", &self.tag),
            ("frame", &self.frame),
        ];
        for (name, value) in fields {
            let _ = writeln!(out, "{name} = {}", hex::encode(value));
        }
        out
    }

    pub fn iv(&self) -> Iv {
        Iv::new(self.counter, self.timestamp)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub field: &'static str,
    pub passed: bool,
    pub expected: String,
    pub actual: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.passed)
    }
}

/// Encrypt and compare ciphertext, tag and frame; then decrypt the recorded
/// ciphertext and tag and compare the plaintext.
pub fn verify(vector: &VectorFile) -> VerifyReport {
    let key = SecretKey::from_bytes(&vector.key);
    let iv = vector.iv();
    let sealed = aead::seal(&key, iv, &vector.plaintext, vector.aad);
    let frame = Frame {
        aad: vector.aad,
        iv,
        ciphertext: sealed.to_bytes(),
    }
    .to_bytes();
    let recorded = SealedPayload {
        body: vector.ciphertext,
        tag: vector.tag,
    };
    let opened = aead::open(&key, iv, &recorded, vector.aad)
        .map(|p| hex::encode(*p))
        .unwrap_or_else(|_| "<authentication failed>".to_string());

    let check = |field, expected: &[u8], actual: String| {
        let expected = hex::encode(expected);
        Check {
            field,
            passed: expected == actual,
            expected,
            actual,
        }
    };
    VerifyReport {
        checks: vec![
            check("ciphertext", &vector.ciphertext, hex::encode(sealed.body)),
            check("tag", &vector.tag, hex::encode(sealed.tag)),
            check("frame", &vector.frame, hex::encode(frame)),
            check("plaintext", &vector.plaintext, opened),
        ],
    }
}

pub fn verify_all(vectors: &[VectorFile], exec: Exec) -> Vec<VerifyReport> {
    map_indices(exec, vectors.len(), |i| verify(&vectors[i]))
}

/// The reference vector shipped with the crate.
pub const REFERENCE: &str = include_str!("../vectors/reference.txt");

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_vector_passes() {
        let v = VectorFile::parse(REFERENCE).unwrap();
        assert_eq!(v.aad, AssetId(0xe802));
        let report = verify(&v);
        assert!(report.passed(), "{report:?}");
        assert_eq!(VectorFile::parse(&v.render()).unwrap(), v);
    }

    #[test]
    fn altered_plaintext_fails_at_ciphertext() {
        let text = REFERENCE.replace("plaintext = e9c5", "plaintext = e8c5");
        let report = verify(&VectorFile::parse(&text).unwrap());
        assert_eq!(report.first_failure().unwrap().field, "ciphertext");
    }

    #[test]
    fn altered_tag_fails_at_tag() {
        let text = REFERENCE.replace("tag = 27d9", "tag = 27d8");
        let report = verify(&VectorFile::parse(&text).unwrap());
        assert_eq!(report.first_failure().unwrap().field, "tag");
        assert!(!report.checks[3].passed);
    }

    #[test]
    fn generated_matches_reference() {
        let r = VectorFile::parse(REFERENCE).unwrap();
        let g = VectorFile::generate(&r.key, r.aad, r.counter, r.timestamp, &r.plaintext);
        assert_eq!(g, r);
    }

    #[test]
    fn parse_errors() {
        assert_eq!(VectorFile::parse("key 00"), Err(VectorError::Syntax(1)));
        assert_eq!(
            VectorFile::parse("nonce = 00"),
            Err(VectorError::UnknownField("nonce".into()))
        );
        assert_eq!(VectorFile::parse("aad = zz"), Err(VectorError::Hex("aad")));
        assert_eq!(
            VectorFile::parse("aad = E802"),
            Err(VectorError::Hex("aad"))
        );
        assert_eq!(
            VectorFile::parse("aad = e80211"),
            Err(VectorError::Length {
                field: "aad",
                expected: 2,
                actual: 3
            })
        );
        assert_eq!(
            VectorFile::parse("aad = e802\naad = e802"),
            Err(VectorError::Duplicate("aad"))
        );
        assert_eq!(
            VectorFile::parse("aad = e802"),
            Err(VectorError::Missing("key"))
        );
    }

    #[test]
    fn debug_omits_key() {
        let v = VectorFile::parse(REFERENCE).unwrap();
        assert!(!format!("{v:?}").contains("1c195d"));
    }
}
