//! AES-256-GCM boundary. All block-cipher and GHASH arithmetic lives in the
//! RustCrypto `aes-gcm` crate (constant-time, hardware-accelerated where the
//! target allows); this module fixes the sizes used by the frame format.

use std::fmt;

use aes_gcm::aead::rand_core::RngCore;
use aes_gcm::aead::{AeadInPlace, KeyInit, OsRng};
use aes_gcm::{Aes256Gcm, Nonce, Tag};
use thiserror::Error;
use zeroize::Zeroizing;

use crate::frame::{AssetId, CIPHERTEXT_LEN, Iv, PAYLOAD_LEN, TAG_LEN};

pub const KEY_LEN: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum AeadError {
    /// Tag did not verify. Deliberately carries no detail.
    #[error("authentication failed")]
    AuthFail,
    #[error("invalid key length {0}, expected {KEY_LEN}")]
    KeyLength(usize),
}

/// Per-asset 256-bit shared secret.
///
/// Only the expanded cipher state is retained; it is zeroized on drop. `Debug`
/// never prints key material.
#[derive(Clone)]
pub struct SecretKey {
    cipher: Aes256Gcm,
}

impl SecretKey {
    pub fn from_bytes(bytes: &[u8; KEY_LEN]) -> Self {
        Self {
            cipher: Aes256Gcm::new(bytes.into()),
        }
    }

    pub fn from_slice(bytes: &[u8]) -> Result<Self, AeadError> {
        let bytes: &[u8; KEY_LEN] = bytes
            .try_into()
            .map_err(|_| AeadError::KeyLength(bytes.len()))?;
        Ok(Self::from_bytes(bytes))
    }

    /// Draws fresh key material from the operating system CSPRNG.
    pub fn generate_bytes() -> Zeroizing<[u8; KEY_LEN]> {
        let mut bytes = Zeroizing::new([0u8; KEY_LEN]);
        OsRng.fill_bytes(bytes.as_mut());
        bytes
    }
}

impl fmt::Debug for SecretKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("SecretKey(<redacted>)")
    }
}

/// Encrypted payload plus its 128-bit tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SealedPayload {
    pub body: [u8; PAYLOAD_LEN],
    pub tag: [u8; TAG_LEN],
}

impl SealedPayload {
    pub fn to_bytes(&self) -> [u8; CIPHERTEXT_LEN] {
        let mut out = [0u8; CIPHERTEXT_LEN];
        out[..PAYLOAD_LEN].copy_from_slice(&self.body);
        out[PAYLOAD_LEN..].copy_from_slice(&self.tag);
        out
    }

    pub fn from_bytes(bytes: &[u8; CIPHERTEXT_LEN]) -> Self {
        let mut body = [0u8; PAYLOAD_LEN];
        let mut tag = [0u8; TAG_LEN];
        body.copy_from_slice(&bytes[..PAYLOAD_LEN]);
        tag.copy_from_slice(&bytes[PAYLOAD_LEN..]);
        Self { body, tag }
    }
}

pub fn seal(key: &SecretKey, iv: Iv, plaintext: &[u8; PAYLOAD_LEN], aad: AssetId) -> SealedPayload {
    let nonce_bytes = iv.to_bytes();
    let mut body = *plaintext;
    let tag = key
        .cipher
        .encrypt_in_place_detached(Nonce::from_slice(&nonce_bytes), &aad.to_bytes(), &mut body)
        // Only fails for buffers beyond the GCM length limit.
        .expect("26-byte payload is within GCM limits");
    SealedPayload {
        body,
        tag: tag.into(),
    }
}

pub fn open(
    key: &SecretKey,
    iv: Iv,
    sealed: &SealedPayload,
    aad: AssetId,
) -> Result<Zeroizing<[u8; PAYLOAD_LEN]>, AeadError> {
    let nonce_bytes = iv.to_bytes();
    let mut body = Zeroizing::new(sealed.body);
    key.cipher
        .decrypt_in_place_detached(
            Nonce::from_slice(&nonce_bytes),
            &aad.to_bytes(),
            body.as_mut(),
            Tag::from_slice(&sealed.tag),
        )
        .map_err(|_| AeadError::AuthFail)?;
    Ok(body)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::{Counter, Timestamp};

    fn table1() -> (SecretKey, Iv, [u8; PAYLOAD_LEN], AssetId) {
        let key = hex::decode("1c195d64578ad0af88addd2fa452f37ee1d390728cf0258e316f1b732d2f5756")
            .unwrap();
        let pt = hex::decode("e9c534097001dd986abc34454aad50bb48376c3c0de7fe3fa5ab").unwrap();
        (
            SecretKey::from_slice(&key).unwrap(),
            Iv::new(Counter(0x7e08_1a3d), Timestamp(0x0eb8_94a9_5380_3d93)),
            pt.try_into().unwrap(),
            AssetId(0xe802),
        )
    }

    #[test]
    fn known_answer() {
        let (key, iv, pt, aad) = table1();
        let sealed = seal(&key, iv, &pt, aad);
        assert_eq!(
            hex::encode(sealed.body),
            "62ab5d2df4687b43755b53792f9f6c6ee27169e8f89b52128cb3"
        );
        assert_eq!(hex::encode(sealed.tag), "27d94586306bec73c04157efb2640c63");
        assert_eq!(seal(&key, iv, &pt, aad), sealed);
        assert_eq!(*open(&key, iv, &sealed, aad).unwrap(), pt);
    }

    #[test]
    fn forged_tag_and_aad_rejected() {
        let (key, iv, pt, aad) = table1();
        let mut sealed = seal(&key, iv, &pt, aad);
        assert_eq!(
            open(&key, iv, &sealed, AssetId(0xe803)),
            Err(AeadError::AuthFail)
        );
        sealed.tag[15] ^= 0x01;
        assert_eq!(open(&key, iv, &sealed, aad), Err(AeadError::AuthFail));
    }

    #[test]
    fn wrong_iv_rejected() {
        let (key, iv, pt, aad) = table1();
        let sealed = seal(&key, iv, &pt, aad);
        let other = Iv::new(Counter(iv.counter.0 + 1), iv.timestamp);
        assert_eq!(open(&key, other, &sealed, aad), Err(AeadError::AuthFail));
    }

    #[test]
    fn key_length_checked() {
        assert_eq!(
            SecretKey::from_slice(&[0u8; 31]).unwrap_err(),
            AeadError::KeyLength(31)
        );
        assert_eq!(format!("{:?}", table1().0), "SecretKey(<redacted>)");
    }

    #[test]
    fn generated_keys_differ() {
        assert_ne!(*SecretKey::generate_bytes(), *SecretKey::generate_bytes());
    }
}
