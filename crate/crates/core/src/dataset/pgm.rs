//! Binary (P5) portable graymap encoding with maxval 255.

use crate::geometry::Bitmap;

pub fn encode(bitmap: &Bitmap) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", bitmap.width, bitmap.height).into_bytes();
    out.extend_from_slice(&bitmap.pixels);
    out
}

fn token<'a>(bytes: &'a [u8], pos: &mut usize) -> Result<&'a [u8], String> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    if start == *pos {
        return Err("truncated header".into());
    }
    Ok(&bytes[start..*pos])
}

fn number(bytes: &[u8], pos: &mut usize, what: &str) -> Result<u32, String> {
    let t = token(bytes, pos)?;
    std::str::from_utf8(t)
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| format!("bad {what} in header"))
}

/// Decode a P5 image. Errors are plain messages; the caller attaches the
/// file name.
pub fn decode(bytes: &[u8]) -> Result<Bitmap, String> {
    let mut pos = 0;
    if token(bytes, &mut pos)? != b"P5" {
        return Err("not a binary PGM (missing P5 magic)".into());
    }
    let width = number(bytes, &mut pos, "width")?;
    let height = number(bytes, &mut pos, "height")?;
    let maxval = number(bytes, &mut pos, "maxval")?;
    if maxval != 255 {
        return Err(format!("unsupported maxval {maxval}"));
    }
    if width == 0 || height == 0 {
        return Err("empty image".into());
    }
    // Exactly one whitespace byte separates the header from the raster.
    pos += 1;
    let n = width as usize * height as usize;
    let raster = bytes.get(pos..).unwrap_or_default();
    if raster.len() != n {
        return Err(format!("expected {n} pixel bytes, found {}", raster.len()));
    }
    Bitmap::from_pixels(width, height, raster.to_vec()).map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let mut b = Bitmap::blank(5, 3);
        b.pixels[7] = 0;
        let bytes = encode(&b);
        assert!(bytes.starts_with(b"P5\n5 3\n255\n"));
        assert_eq!(decode(&bytes).unwrap(), b);
    }

    #[test]
    fn header_comments_are_skipped() {
        let mut bytes = b"P5\n# made by hand\n2 2\n255\n".to_vec();
        bytes.extend_from_slice(&[0, 255, 255, 0]);
        assert_eq!(decode(&bytes).unwrap().pixels, vec![0, 255, 255, 0]);
    }

    #[test]
    fn truncated_raster_is_rejected() {
        let mut bytes = encode(&Bitmap::blank(4, 4));
        bytes.pop();
        assert!(decode(&bytes).unwrap_err().contains("pixel bytes"));
        assert!(decode(b"P2\n1 1\n255\n0").is_err());
        assert!(decode(b"P5\n1").is_err());
    }
}
