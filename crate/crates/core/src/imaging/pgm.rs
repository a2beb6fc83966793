//! Netpbm grayscale (P2 ASCII / P5 binary) reader and writer, maxval ≤ 255.

use std::fs;
use std::io::Write;
use std::path::Path;

use super::ImageBuffer;
use crate::error::{Error, Result};

pub fn load_grayscale(path: impl AsRef<Path>) -> Result<ImageBuffer> {
    let bytes = fs::read(path)?;
    decode(&bytes)
}

/// Writes a binary P5 file. Intensities are rounded and clamped to 0..=255.
pub fn save_grayscale(path: impl AsRef<Path>, img: &ImageBuffer) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(&encode_p5(img))?;
    Ok(())
}

pub fn encode_p5(img: &ImageBuffer) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend(img.data().iter().map(|v| v.round().clamp(0.0, 255.0) as u8));
    out
}

pub fn encode_p2(img: &ImageBuffer) -> String {
    let mut out = format!("P2\n{} {}\n255\n", img.width(), img.height());
    for row in img.data().chunks(img.width()) {
        let line: Vec<String> = row.iter().map(|v| (v.round().clamp(0.0, 255.0) as u8).to_string()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

struct Header {
    binary: bool,
    width: usize,
    height: usize,
    maxval: u32,
    /// Offset of the first payload byte.
    offset: usize,
}

pub fn decode(bytes: &[u8]) -> Result<ImageBuffer> {
    let header = parse_header(bytes)?;
    let n = header.width * header.height;
    let payload = &bytes[header.offset..];
    let data: Vec<f64> = if header.binary {
        if payload.len() < n {
            return Err(Error::UnexpectedEof);
        }
        payload[..n].iter().map(|&b| b as f64).collect()
    } else {
        let text =
            std::str::from_utf8(payload).map_err(|_| Error::MalformedHeader("non-ASCII data in P2 payload".into()))?;
        let mut values = Vec::with_capacity(n);
        for tok in Tokens::new(text.as_bytes()).take(n) {
            let v: u32 = std::str::from_utf8(tok)
                .ok()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::MalformedHeader("invalid P2 sample".into()))?;
            if v > header.maxval {
                return Err(Error::MalformedHeader(format!("sample {v} exceeds maxval {}", header.maxval)));
            }
            values.push(v as f64);
        }
        if values.len() < n {
            return Err(Error::UnexpectedEof);
        }
        values
    };
    let scale = 255.0 / header.maxval as f64;
    let data = if header.maxval == 255 { data } else { data.into_iter().map(|v| v * scale).collect() };
    ImageBuffer::new(header.width, header.height, data)
}

fn parse_header(bytes: &[u8]) -> Result<Header> {
    let binary = match bytes.get(..2) {
        Some(b"P2") => false,
        Some(b"P5") => true,
        _ => return Err(Error::MalformedHeader("expected P2 or P5 magic".into())),
    };
    let mut toks = Tokens::new(bytes);
    toks.pos = 2;
    let mut field = |name: &str| -> Result<u32> {
        let tok = toks.next().ok_or(Error::UnexpectedEof)?;
        std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::MalformedHeader(format!("invalid {name}")))
    };
    let width = field("width")? as usize;
    let height = field("height")? as usize;
    let maxval = field("maxval")?;
    if width == 0 || height == 0 {
        return Err(Error::MalformedHeader("zero image dimension".into()));
    }
    if maxval == 0 {
        return Err(Error::MalformedHeader("zero maxval".into()));
    }
    if maxval > 255 {
        return Err(Error::UnsupportedMaxval(maxval));
    }
    // Exactly one whitespace byte separates maxval from the payload.
    let offset = toks.pos + 1;
    if offset > bytes.len() {
        return Err(Error::UnexpectedEof);
    }
    Ok(Header { binary, width, height, maxval, offset })
}

/// Whitespace-separated tokens with `#` comments skipped.
struct Tokens<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Tokens<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }
}

impl<'a> Iterator for Tokens<'a> {
    type Item = &'a [u8];

    fn next(&mut self) -> Option<&'a [u8]> {
        let b = self.bytes;
        loop {
            while self.pos < b.len() && b[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            }
            if self.pos < b.len() && b[self.pos] == b'#' {
                while self.pos < b.len() && b[self.pos] != b'\n' {
                    self.pos += 1;
                }
                continue;
            }
            break;
        }
        if self.pos >= b.len() {
            return None;
        }
        let start = self.pos;
        while self.pos < b.len() && !b[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        Some(&b[start..self.pos])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_ascii_2x2() {
        let img = decode(b"P2\n2 2\n255\n0 10\n20 30\n").unwrap();
        assert_eq!((img.width(), img.height()), (2, 2));
        assert_eq!(img.data(), &[0.0, 10.0, 20.0, 30.0]);
    }

    #[test]
    fn binary_matches_ascii() {
        let mut p5 = b"P5\n2 2\n255\n".to_vec();
        p5.extend_from_slice(&[0, 10, 20, 30]);
        let a = decode(b"P2\n2 2\n255\n0 10\n20 30\n").unwrap();
        let b = decode(&p5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn comments_are_skipped() {
        let img = decode(b"P2\n# made by hand\n2 1\n# max\n255\n7 9\n").unwrap();
        assert_eq!(img.data(), &[7.0, 9.0]);
    }

    #[test]
    fn truncated_payload() {
        let mut p5 = b"P5\n2 2\n255\n".to_vec();
        p5.extend_from_slice(&[0, 10, 20]);
        let err = decode(&p5).unwrap_err();
        assert!(matches!(err, Error::UnexpectedEof));
        assert_eq!(err.to_string(), "unexpected end of data");

        let err = decode(b"P2\n2 2\n255\n0 10 20").unwrap_err();
        assert!(matches!(err, Error::UnexpectedEof));
    }

    #[test]
    fn rejects_wide_maxval() {
        let err = decode(b"P2\n1 1\n65535\n7\n").unwrap_err();
        assert!(matches!(err, Error::UnsupportedMaxval(65535)));
    }

    #[test]
    fn rejects_bad_magic() {
        assert!(matches!(decode(b"P6\n1 1\n255\n\0\0\0"), Err(Error::MalformedHeader(_))));
        assert!(matches!(decode(b"P2\nx 1\n255\n0"), Err(Error::MalformedHeader(_))));
    }

    #[test]
    fn small_maxval_is_rescaled() {
        let img = decode(b"P2\n2 1\n15\n0 15\n").unwrap();
        assert_eq!(img.data(), &[0.0, 255.0]);
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = load_grayscale("/definitely/not/here.pgm").unwrap_err();
        assert!(matches!(err, Error::Io(_)));
    }

    #[test]
    fn write_then_read() {
        let img = ImageBuffer::new(3, 2, vec![0.0, 127.6, 255.0, 12.2, 300.0, -4.0]).unwrap();
        let back = decode(&encode_p5(&img)).unwrap();
        assert_eq!(back.data(), &[0.0, 128.0, 255.0, 12.0, 255.0, 0.0]);
        let back = decode(encode_p2(&img).as_bytes()).unwrap();
        assert_eq!(back.data(), &[0.0, 128.0, 255.0, 12.0, 255.0, 0.0]);
    }
}
