use crate::{Error, Result};

/// Secret-sharing composition `s = p_1 ⊕ p_2 ⊕ … ⊕ p_N` over equal-length
/// bit strings (one bit per byte, values 0 or 1).
pub fn combine_secret(private_keys: &[Vec<u8>]) -> Result<Vec<u8>> {
    let Some(first) = private_keys.first() else {
        return Err(Error::InvalidInput("no key shares".into()));
    };
    let len = first.len();
    if let Some(bad) = private_keys.iter().find(|k| k.len() != len) {
        return Err(Error::InvalidInput(format!(
            "key shares differ in length ({} vs {len})",
            bad.len()
        )));
    }
    let mut secret = vec![0u8; len];
    for key in private_keys {
        for (s, &b) in secret.iter_mut().zip(key) {
            *s ^= b & 1;
        }
    }
    Ok(secret)
}
