//! Wire layout of the 448-bit authenticated beacon frame.
//!
//! ```text
//!  0      2                 14                                 40           56
//!  +------+-----------------+----------------------------------+------------+
//!  | AAD  | IV = R || T     | encrypted payload (26 bytes)     | tag (16)   |
//!  +------+-----------------+----------------------------------+------------+
//! ```
//!
//! Every multibyte integer is big-endian. The asset identifier travels in the
//! clear and is authenticated as associated data.

use std::fmt;

use thiserror::Error;

/// Length of the serialized asset identifier.
pub const AAD_LEN: usize = 2;
/// Length of the composed nonce.
pub const IV_LEN: usize = 12;
/// Length of the encrypted payload (202 SGB bits rounded up to whole bytes).
pub const PAYLOAD_LEN: usize = 26;
/// Length of the GCM authentication tag.
pub const TAG_LEN: usize = 16;
/// Encrypted payload followed by its tag.
pub const CIPHERTEXT_LEN: usize = PAYLOAD_LEN + TAG_LEN;
/// Total frame length on the wire.
pub const FRAME_LEN: usize = AAD_LEN + IV_LEN + CIPHERTEXT_LEN;
/// Number of meaningful bits in an SGB message.
pub const SGB_BITS: usize = 202;

const IV_START: usize = AAD_LEN;
const CT_START: usize = AAD_LEN + IV_LEN;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum FrameError {
    #[error("{what}: expected {expected} bytes, got {actual}")]
    Length {
        what: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("sgb payload: expected {SGB_BITS} bits, got {0}")]
    BitLength(usize),
}

/// 16-bit identifier of a transmitting asset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct AssetId(pub u16);

impl AssetId {
    pub fn to_bytes(self) -> [u8; AAD_LEN] {
        self.0.to_be_bytes()
    }

    pub fn from_bytes(bytes: [u8; AAD_LEN]) -> Self {
        Self(u16::from_be_bytes(bytes))
    }
}

impl fmt::Display for AssetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04x}", self.0)
    }
}

/// Monotonic per-asset frame counter `R`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Counter(pub u32);

impl Counter {
    pub const MAX: Counter = Counter(u32::MAX);

    pub fn to_bytes(self) -> [u8; 4] {
        self.0.to_be_bytes()
    }

    pub fn from_bytes(bytes: [u8; 4]) -> Self {
        Self(u32::from_be_bytes(bytes))
    }

    pub fn checked_next(self) -> Option<Counter> {
        self.0.checked_add(1).map(Counter)
    }
}

impl fmt::Display for Counter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Whole seconds since the Unix epoch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Timestamp(pub u64);

impl Timestamp {
    pub fn to_bytes(self) -> [u8; 8] {
        self.0.to_be_bytes()
    }

    pub fn from_bytes(bytes: [u8; 8]) -> Self {
        Self(u64::from_be_bytes(bytes))
    }

    /// Absolute distance in seconds between two readings.
    pub fn abs_diff(self, other: Timestamp) -> u64 {
        self.0.abs_diff(other.0)
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// 96-bit nonce: counter followed by sender timestamp.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Iv {
    pub counter: Counter,
    pub timestamp: Timestamp,
}

impl Iv {
    pub fn new(counter: Counter, timestamp: Timestamp) -> Self {
        Self { counter, timestamp }
    }

    pub fn to_bytes(self) -> [u8; IV_LEN] {
        build_iv(self.counter, self.timestamp)
    }

    pub fn from_bytes(bytes: [u8; IV_LEN]) -> Self {
        let (counter, timestamp) = split_iv_array(&bytes);
        Self { counter, timestamp }
    }
}

/// Compose the nonce bytes `R || T`.
pub fn build_iv(counter: Counter, timestamp: Timestamp) -> [u8; IV_LEN] {
    let mut iv = [0u8; IV_LEN];
    iv[..4].copy_from_slice(&counter.to_bytes());
    iv[4..].copy_from_slice(&timestamp.to_bytes());
    iv
}

/// Inverse of [`build_iv`] for arbitrary-length input.
pub fn split_iv(iv: &[u8]) -> Result<(Counter, Timestamp), FrameError> {
    let iv: &[u8; IV_LEN] = iv.try_into().map_err(|_| FrameError::Length {
        what: "iv",
        expected: IV_LEN,
        actual: iv.len(),
    })?;
    Ok(split_iv_array(iv))
}

fn split_iv_array(iv: &[u8; IV_LEN]) -> (Counter, Timestamp) {
    let mut counter = [0u8; 4];
    let mut timestamp = [0u8; 8];
    counter.copy_from_slice(&iv[..4]);
    timestamp.copy_from_slice(&iv[4..]);
    (
        Counter::from_bytes(counter),
        Timestamp::from_bytes(timestamp),
    )
}

/// A decoded frame. The ciphertext is opaque here; see [`crate::aead`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Frame {
    pub aad: AssetId,
    pub iv: Iv,
    pub ciphertext: [u8; CIPHERTEXT_LEN],
}

impl Frame {
    pub fn to_bytes(&self) -> [u8; FRAME_LEN] {
        let mut out = [0u8; FRAME_LEN];
        out[..IV_START].copy_from_slice(&self.aad.to_bytes());
        out[IV_START..CT_START].copy_from_slice(&self.iv.to_bytes());
        out[CT_START..].copy_from_slice(&self.ciphertext);
        out
    }

    /// Decodes a frame, rejecting anything that is not exactly 56 bytes.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self, FrameError> {
        let bytes: &[u8; FRAME_LEN] = bytes.try_into().map_err(|_| FrameError::Length {
            what: "frame",
            expected: FRAME_LEN,
            actual: bytes.len(),
        })?;
        let mut aad = [0u8; AAD_LEN];
        let mut iv = [0u8; IV_LEN];
        let mut ciphertext = [0u8; CIPHERTEXT_LEN];
        aad.copy_from_slice(&bytes[..IV_START]);
        iv.copy_from_slice(&bytes[IV_START..CT_START]);
        ciphertext.copy_from_slice(&bytes[CT_START..]);
        Ok(Self {
            aad: AssetId::from_bytes(aad),
            iv: Iv::from_bytes(iv),
            ciphertext,
        })
    }
}

/// Concatenate `AAD || IV || ciphertext`.
pub fn encode_frame(
    aad: AssetId,
    iv: Iv,
    ciphertext: &[u8],
) -> Result<[u8; FRAME_LEN], FrameError> {
    let ciphertext: [u8; CIPHERTEXT_LEN] =
        ciphertext.try_into().map_err(|_| FrameError::Length {
            what: "ciphertext",
            expected: CIPHERTEXT_LEN,
            actual: ciphertext.len(),
        })?;
    Ok(Frame {
        aad,
        iv,
        ciphertext,
    }
    .to_bytes())
}

pub fn decode_frame(bytes: &[u8]) -> Result<Frame, FrameError> {
    Frame::from_bytes(bytes)
}

/// Packs 202 bits (one `bool` per bit, most significant first) into 26 bytes.
///
/// Bits occupy the high end of the buffer; the low 6 bits of the last byte are zero.
pub fn pack_sgb(bits: &[bool]) -> Result<[u8; PAYLOAD_LEN], FrameError> {
    if bits.len() != SGB_BITS {
        return Err(FrameError::BitLength(bits.len()));
    }
    let mut out = [0u8; PAYLOAD_LEN];
    for (i, _) in bits.iter().enumerate().filter(|(_, b)| **b) {
        out[i / 8] |= 0x80 >> (i % 8);
    }
    Ok(out)
}

/// Inverse of [`pack_sgb`]. Padding bits are ignored.
pub fn unpack_sgb(bytes: &[u8; PAYLOAD_LEN]) -> Vec<bool> {
    (0..SGB_BITS)
        .map(|i| bytes[i / 8] & (0x80 >> (i % 8)) != 0)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const TABLE1_IV: &str = "7e081a3d0eb894a953803d93";
    const TABLE1_CT: &str =
        "62ab5d2df4687b43755b53792f9f6c6ee27169e8f89b52128cb327d94586306bec73c04157efb2640c63";
    const TABLE1_FRAME: &str = "e8027e081a3d0eb894a953803d9362ab5d2df4687b43755b53792f9f6c6ee27169e8f89b52128cb327d94586306bec73c04157efb2640c63";

    #[test]
    fn build_iv_reference() {
        let iv = build_iv(Counter(0x7e08_1a3d), Timestamp(0x0eb8_94a9_5380_3d93));
        assert_eq!(hex::encode(iv), TABLE1_IV);
        assert_eq!(build_iv(Counter(0), Timestamp(0)), [0u8; 12]);
        assert_eq!(
            build_iv(Counter(u32::MAX), Timestamp(u64::MAX)),
            [0xffu8; 12]
        );
    }

    #[test]
    fn counter_is_big_endian() {
        let iv = build_iv(Counter(1), Timestamp(0));
        assert_eq!(&iv[..4], &[0, 0, 0, 1]);
    }

    #[test]
    fn split_iv_reference_and_errors() {
        let iv = hex::decode(TABLE1_IV).unwrap();
        assert_eq!(
            split_iv(&iv).unwrap(),
            (Counter(0x7e08_1a3d), Timestamp(0x0eb8_94a9_5380_3d93))
        );
        assert_eq!(split_iv(&[0u8; 12]).unwrap(), (Counter(0), Timestamp(0)));
        assert!(matches!(
            split_iv(&[0u8; 11]),
            Err(FrameError::Length {
                expected: 12,
                actual: 11,
                ..
            })
        ));
        assert!(split_iv(&[0u8; 13]).is_err());
    }

    #[test]
    fn encode_reference_frame() {
        let iv = Iv::from_bytes(hex::decode(TABLE1_IV).unwrap().try_into().unwrap());
        let ct = hex::decode(TABLE1_CT).unwrap();
        let frame = encode_frame(AssetId(0xe802), iv, &ct).unwrap();
        assert_eq!(hex::encode(frame), TABLE1_FRAME);

        let zero = encode_frame(AssetId(0), Iv::new(Counter(0), Timestamp(0)), &[0u8; 42]).unwrap();
        assert_eq!(zero, [0u8; FRAME_LEN]);
        assert!(encode_frame(AssetId(0), iv, &ct[..41]).is_err());
    }

    #[test]
    fn decode_reference_frame() {
        let frame = decode_frame(&hex::decode(TABLE1_FRAME).unwrap()).unwrap();
        assert_eq!(frame.aad, AssetId(0xe802));
        assert_eq!(hex::encode(frame.iv.to_bytes()), TABLE1_IV);
        assert_eq!(hex::encode(frame.ciphertext), TABLE1_CT);
    }

    #[test]
    fn decode_rejects_wrong_lengths() {
        for len in [0, 1, 55, 57, 112] {
            assert_eq!(
                decode_frame(&vec![0u8; len]),
                Err(FrameError::Length {
                    what: "frame",
                    expected: 56,
                    actual: len
                })
            );
        }
    }

    #[test]
    fn asset_id_exhaustive_roundtrip() {
        for v in 0..=u16::MAX {
            let id = AssetId(v);
            assert_eq!(AssetId::from_bytes(id.to_bytes()), id);
        }
    }

    #[test]
    fn sgb_padding() {
        assert_eq!(pack_sgb(&[false; SGB_BITS]).unwrap(), [0u8; PAYLOAD_LEN]);
        let ones = pack_sgb(&[true; SGB_BITS]).unwrap();
        assert!(ones[..25].iter().all(|b| *b == 0xff));
        // 202 = 25 * 8 + 2: two payload bits, six zero padding bits.
        assert_eq!(ones[25], 0xc0);
        assert_eq!(pack_sgb(&[true; 201]), Err(FrameError::BitLength(201)));
        assert_eq!(pack_sgb(&[true; 208]), Err(FrameError::BitLength(208)));
    }

    #[test]
    fn sgb_msb_first() {
        let mut bits = [false; SGB_BITS];
        bits[0] = true;
        bits[201] = true;
        let packed = pack_sgb(&bits).unwrap();
        assert_eq!(packed[0], 0x80);
        assert_eq!(packed[25], 0x40);
    }
}
