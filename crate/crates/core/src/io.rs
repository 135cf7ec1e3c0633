//! PGM/PPM/PFM rasters and the correspondence CSV.

use std::fmt::Write as _;
use std::path::Path;

use crate::geom::{PixelPoint, Side};
use crate::image::{FloatImage, GrayImage, Mask, RgbImage};
use crate::solver::Correspondence;
use crate::{Error, Result};

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path, e))
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    write_bytes(path, text.as_bytes())
}

/// Splits a netpbm-style header into `count` whitespace-separated tokens,
/// skipping `#` comments, and returns them with the offset of the first data
/// byte (after the single whitespace that ends the header).
fn header_tokens(bytes: &[u8], count: usize) -> std::result::Result<(Vec<String>, usize), String> {
    let mut tokens = Vec::new();
    let mut i = 0;
    while tokens.len() < count {
        while i < bytes.len() && (bytes[i].is_ascii_whitespace() || bytes[i] == b'#') {
            if bytes[i] == b'#' {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            } else {
                i += 1;
            }
        }
        let start = i;
        while i < bytes.len() && !bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        if start == i {
            return Err("truncated header".into());
        }
        tokens.push(String::from_utf8_lossy(&bytes[start..i]).into_owned());
    }
    if i >= bytes.len() {
        return Err("missing pixel data".into());
    }
    Ok((tokens, i + 1))
}

fn parse_dim(s: &str, what: &str) -> std::result::Result<usize, String> {
    s.parse::<usize>().ok().filter(|&d| d > 0).ok_or_else(|| format!("bad {what} `{s}`"))
}

fn parse_err(path: &Path, message: String) -> Error {
    Error::Parse { path: path.to_path_buf(), line: 1, message }
}

/// Binary 8-bit PGM (`P5`).
pub fn decode_pgm(bytes: &[u8]) -> std::result::Result<GrayImage, String> {
    let (t, offset) = header_tokens(bytes, 4)?;
    if t[0] != "P5" {
        return Err(format!("expected P5 magic, found `{}`", t[0]));
    }
    let (w, h) = (parse_dim(&t[1], "width")?, parse_dim(&t[2], "height")?);
    let maxval: usize = t[3].parse().map_err(|_| format!("bad maxval `{}`", t[3]))?;
    if maxval == 0 || maxval > 255 {
        return Err(format!("only 8-bit PGM is supported (maxval {maxval})"));
    }
    let data = bytes.get(offset..offset + w * h).ok_or("pixel data shorter than header promises")?;
    GrayImage::from_vec(w, h, data.to_vec()).map_err(|e| e.to_string())
}

pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.data());
    out
}

pub fn read_pgm(path: &Path) -> Result<GrayImage> {
    decode_pgm(&read_bytes(path)?).map_err(|m| parse_err(path, m))
}

pub fn write_pgm(path: &Path, img: &GrayImage) -> Result<()> {
    write_bytes(path, &encode_pgm(img))
}

/// Mask as a `{0, 255}` PGM.
pub fn write_mask(path: &Path, mask: &Mask) -> Result<()> {
    write_pgm(path, &mask.map(|m| if m { 255 } else { 0 }))
}

pub fn encode_ppm(img: &RgbImage) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend(img.data().iter().flatten());
    out
}

pub fn write_ppm(path: &Path, img: &RgbImage) -> Result<()> {
    write_bytes(path, &encode_ppm(img))
}

/// Grayscale PFM, little-endian (negative scale), rows stored bottom to top.
pub fn encode_pfm(img: &FloatImage) -> Vec<u8> {
    let mut out = format!("Pf\n{} {}\n-1.0\n", img.width(), img.height()).into_bytes();
    for u in (0..img.height()).rev() {
        for &x in img.row(u) {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    out
}

pub fn decode_pfm(bytes: &[u8]) -> std::result::Result<FloatImage, String> {
    let (t, offset) = header_tokens(bytes, 4)?;
    if t[0] != "Pf" {
        return Err(format!("expected grayscale PFM (Pf), found `{}`", t[0]));
    }
    let (w, h) = (parse_dim(&t[1], "width")?, parse_dim(&t[2], "height")?);
    let scale: f32 = t[3].parse().map_err(|_| format!("bad scale `{}`", t[3]))?;
    if scale == 0.0 || !scale.is_finite() {
        return Err(format!("bad scale `{}`", t[3]));
    }
    let data = bytes.get(offset..offset + 4 * w * h).ok_or("pixel data shorter than header promises")?;
    let mut img = FloatImage::new(w, h, 0.0);
    for (i, chunk) in data.chunks_exact(4).enumerate() {
        let raw = [chunk[0], chunk[1], chunk[2], chunk[3]];
        let x = if scale < 0.0 { f32::from_le_bytes(raw) } else { f32::from_be_bytes(raw) };
        let (row_from_bottom, v) = (i / w, i % w);
        img.set(h - 1 - row_from_bottom, v, x);
    }
    Ok(img)
}

pub fn read_pfm(path: &Path) -> Result<FloatImage> {
    decode_pfm(&read_bytes(path)?).map_err(|m| parse_err(path, m))
}

pub fn write_pfm(path: &Path, img: &FloatImage) -> Result<()> {
    write_bytes(path, &encode_pfm(img))
}

pub const CORRESPONDENCE_HEADER: &str = "side,u_a,v_a,u_b,v_b";

/// Parses the `side,u_a,v_a,u_b,v_b` CSV into left and right matches.
pub fn parse_correspondences(text: &str, path: &Path) -> Result<(Vec<Correspondence>, Vec<Correspondence>)> {
    let err = |line: usize, message: String| Error::Parse { path: path.to_path_buf(), line, message };
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim().replace(' ', "") == CORRESPONDENCE_HEADER => {}
        Some((i, h)) => return Err(err(i + 1, format!("expected header `{CORRESPONDENCE_HEADER}`, found `{h}`"))),
        None => return Err(err(1, "empty correspondence file".into())),
    }
    let (mut left, mut right) = (Vec::new(), Vec::new());
    for (i, line) in lines {
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != 5 {
            return Err(err(i + 1, format!("expected 5 fields, found {}", f.len())));
        }
        let side = match f[0] {
            "L" => Side::Left,
            "R" => Side::Right,
            s => return Err(err(i + 1, format!("side must be L or R, found `{s}`"))),
        };
        let mut v = [0.0; 4];
        for (slot, s) in v.iter_mut().zip(&f[1..]) {
            *slot = s.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| err(i + 1, format!("bad number `{s}`")))?;
        }
        let c = Correspondence::new(side, PixelPoint::new(v[0], v[1]), PixelPoint::new(v[2], v[3]));
        match side {
            Side::Left => left.push(c),
            Side::Right => right.push(c),
        }
    }
    Ok((left, right))
}

pub fn format_correspondences(left: &[Correspondence], right: &[Correspondence]) -> String {
    let mut out = String::from(CORRESPONDENCE_HEADER);
    out.push('\n');
    for c in left.iter().chain(right) {
        let side = match c.side {
            Side::Left => "L",
            Side::Right => "R",
        };
        let _ = writeln!(out, "{side},{},{},{},{}", c.a.u, c.a.v, c.b.u, c.b.v);
    }
    out
}

pub fn read_correspondences(path: &Path) -> Result<(Vec<Correspondence>, Vec<Correspondence>)> {
    parse_correspondences(&read_text(path)?, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::Image;

    #[test]
    fn pgm_round_trip() {
        let img = Image::from_fn(5, 3, |u, v| (u * 50 + v) as u8);
        assert_eq!(decode_pgm(&encode_pgm(&img)).unwrap(), img);
        let with_comment = b"P5\n# made by hand\n2 1\n255\n\x07\x08";
        assert_eq!(decode_pgm(with_comment).unwrap().data(), &[7, 8]);
        assert!(decode_pgm(b"P5\n2 2\n255\n\x01").is_err());
        assert!(decode_pgm(b"P2\n1 1\n255\n1").is_err());
        assert!(decode_pgm(b"P5\n1 1\n65535\n\x00\x01").is_err());
    }

    #[test]
    fn pfm_layout_and_round_trip() {
        let img = Image::from_fn(3, 2, |u, v| if u == 0 { v as f32 } else { -1.0 });
        let bytes = encode_pfm(&img);
        let header = b"Pf\n3 2\n-1.0\n";
        assert_eq!(&bytes[..header.len()], header);
        // The bottom row comes first.
        assert_eq!(&bytes[header.len()..header.len() + 4], &(-1.0f32).to_le_bytes());
        assert_eq!(&bytes[bytes.len() - 4..], &2.0f32.to_le_bytes());
        assert_eq!(decode_pfm(&bytes).unwrap(), img);
    }

    #[test]
    fn ppm_header() {
        let img = RgbImage::new(2, 1, [1, 2, 3]);
        assert_eq!(encode_ppm(&img), b"P6\n2 1\n255\n\x01\x02\x03\x01\x02\x03");
    }

    #[test]
    fn correspondence_csv() {
        let l = vec![Correspondence::new(Side::Left, PixelPoint::new(1.5, 2.0), PixelPoint::new(3.0, 4.25))];
        let r = vec![Correspondence::new(Side::Right, PixelPoint::new(0.1, 0.2), PixelPoint::new(0.3, 0.4))];
        let text = format_correspondences(&l, &r);
        assert_eq!(parse_correspondences(&text, Path::new("x.csv")).unwrap(), (l, r));
        let bad = "side,u_a,v_a,u_b,v_b\nL,1,2,3\n";
        match parse_correspondences(bad, Path::new("x.csv")) {
            Err(Error::Parse { line: 2, .. }) => {}
            other => panic!("{other:?}"),
        }
        assert!(parse_correspondences("side,u_a,v_a,u_b,v_b\nX,1,2,3,4\n", Path::new("x")).is_err());
        assert!(parse_correspondences("a,b\n", Path::new("x")).is_err());
    }
}
