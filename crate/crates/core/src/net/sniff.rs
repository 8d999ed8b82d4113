use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum SniffError {
    #[error("unsupported image format")]
    UnsupportedFormat,
    #[error("image header is truncated")]
    TruncatedHeader,
}

const PNG_SIGNATURE: &[u8] = b"\x89PNG\r\n\x1a\n";

fn be16(b: &[u8], at: usize) -> u32 {
    u32::from(u16::from_be_bytes([b[at], b[at + 1]]))
}

/// Reads `(width, height)` from the first bytes of a PNG, GIF or JPEG
/// file without decoding the image.
pub fn sniff_dimensions(bytes: &[u8]) -> Result<(u32, u32), SniffError> {
    if bytes.starts_with(PNG_SIGNATURE) {
        if bytes.len() < 24 {
            return Err(SniffError::TruncatedHeader);
        }
        if &bytes[12..16] != b"IHDR" {
            return Err(SniffError::UnsupportedFormat);
        }
        let w = u32::from_be_bytes(bytes[16..20].try_into().unwrap());
        let h = u32::from_be_bytes(bytes[20..24].try_into().unwrap());
        return Ok((w, h));
    }
    if bytes.starts_with(b"GIF87a") || bytes.starts_with(b"GIF89a") {
        if bytes.len() < 10 {
            return Err(SniffError::TruncatedHeader);
        }
        let w = u16::from_le_bytes([bytes[6], bytes[7]]);
        let h = u16::from_le_bytes([bytes[8], bytes[9]]);
        return Ok((w.into(), h.into()));
    }
    if bytes.starts_with(&[0xFF, 0xD8]) {
        return jpeg(bytes);
    }
    if !bytes.is_empty()
        && bytes.len() < 8
        && (PNG_SIGNATURE.starts_with(bytes) || b"GIF8".starts_with(&bytes[..bytes.len().min(4)]))
    {
        return Err(SniffError::TruncatedHeader);
    }
    Err(SniffError::UnsupportedFormat)
}

/// Walks marker segments up to the first SOF0 or SOF2 frame header.
fn jpeg(b: &[u8]) -> Result<(u32, u32), SniffError> {
    let mut i = 2;
    loop {
        if i >= b.len() {
            return Err(SniffError::TruncatedHeader);
        }
        if b[i] != 0xFF {
            return Err(SniffError::UnsupportedFormat);
        }
        while i < b.len() && b[i] == 0xFF {
            i += 1;
        }
        let Some(&marker) = b.get(i) else {
            return Err(SniffError::TruncatedHeader);
        };
        i += 1;
        match marker {
            0x01 | 0xD0..=0xD7 => continue,
            0xD8..=0xDA => return Err(SniffError::UnsupportedFormat),
            _ => {}
        }
        if i + 2 > b.len() {
            return Err(SniffError::TruncatedHeader);
        }
        let len = be16(b, i) as usize;
        if len < 2 {
            return Err(SniffError::UnsupportedFormat);
        }
        match marker {
            0xC0 | 0xC2 => {
                if i + 7 > b.len() {
                    return Err(SniffError::TruncatedHeader);
                }
                let h = be16(b, i + 3);
                let w = be16(b, i + 5);
                return Ok((w, h));
            }
            0xC1 | 0xC3 | 0xC5..=0xC7 | 0xC9..=0xCB | 0xCD..=0xCF => return Err(SniffError::UnsupportedFormat),
            _ => i += len,
        }
    }
}
