//! Character accounting over raw bytes.
//!
//! A "character" is a Unicode scalar value when the bytes are valid UTF-8.
//! For arbitrary bytes we count every byte that is not a UTF-8 continuation
//! byte (`0b10xx_xxxx`), which agrees with scalar counting on valid input and
//! never splits a well-formed multi-byte sequence when truncating.

#[inline]
pub fn is_continuation(b: u8) -> bool {
    b & 0xC0 == 0x80
}

pub fn char_len(bytes: &[u8]) -> usize {
    bytes.iter().filter(|&&b| !is_continuation(b)).count()
}

/// Byte offset at which the first `n_chars` characters end.
pub fn char_boundary(bytes: &[u8], n_chars: usize) -> usize {
    let mut seen = 0usize;
    for (i, &b) in bytes.iter().enumerate() {
        if !is_continuation(b) {
            if seen == n_chars {
                return i;
            }
            seen += 1;
        }
    }
    bytes.len()
}

pub fn truncate_chars(bytes: &[u8], n_chars: usize) -> &[u8] {
    &bytes[..char_boundary(bytes, n_chars)]
}
