//! Binary PPM (`P6`, maxval 255) reader and writer.

use super::{ImageRgb, Rgb};
use crate::error::{Error, Result};

/// Reads whitespace/comment separated header tokens.
struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> HeaderCursor<'a> {
    fn skip_separators(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn token(&mut self, what: &str) -> Result<&'a str> {
        self.skip_separators();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(|b| !b.is_ascii_whitespace() && *b != b'#') {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::Header(format!("missing {what}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .map_err(|_| Error::Header(format!("{what} is not ASCII")))
    }

    fn number(&mut self, what: &str) -> Result<i64> {
        let tok = self.token(what)?;
        tok.parse::<i64>().map_err(|_| Error::Header(format!("{what} {tok:?} is not an integer")))
    }
}

pub fn load_ppm(bytes: &[u8]) -> Result<ImageRgb> {
    if bytes.len() < 2 || &bytes[..2] != b"P6" {
        let found = String::from_utf8_lossy(&bytes[..bytes.len().min(2)]).into_owned();
        return Err(Error::BadMagic { expected: "P6", found });
    }
    let mut cur = HeaderCursor { bytes, pos: 2 };
    if !cur.bytes.get(cur.pos).is_some_and(|b| b.is_ascii_whitespace() || *b == b'#') {
        return Err(Error::Header("magic must be followed by whitespace".into()));
    }
    let width = cur.number("width")?;
    let height = cur.number("height")?;
    if width <= 0 || height <= 0 {
        return Err(Error::Dimensions { width: width.max(0) as usize, height: height.max(0) as usize });
    }
    let maxval = cur.number("maxval")?;
    if maxval != 255 {
        return Err(Error::MaxVal(maxval.clamp(0, u32::MAX as i64) as u32));
    }
    // Exactly one whitespace byte separates the header from the raster.
    match bytes.get(cur.pos) {
        Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
        _ => return Err(Error::Truncated { expected: 1, found: 0 }),
    }
    let (width, height) = (width as usize, height as usize);
    let expected = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(3))
        .ok_or(Error::Dimensions { width, height })?;
    let raster = &bytes[cur.pos..];
    if raster.len() < expected {
        return Err(Error::Truncated { expected, found: raster.len() });
    }
    let pixels = raster[..expected].chunks_exact(3).map(|c| Rgb::new(c[0], c[1], c[2])).collect();
    ImageRgb::new(width, height, pixels)
}

pub fn save_ppm(img: &ImageRgb) -> Vec<u8> {
    let header = format!("P6\n{} {}\n255\n", img.width(), img.height());
    let mut out = Vec::with_capacity(header.len() + img.len() * 3);
    out.extend_from_slice(header.as_bytes());
    for px in img.pixels() {
        out.extend_from_slice(&px.channels());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::PixelCoord;

    fn ppm(header: &str, raster: &[u8]) -> Vec<u8> {
        let mut v = header.as_bytes().to_vec();
        v.extend_from_slice(raster);
        v
    }

    #[test]
    fn minimal_file() {
        let img = load_ppm(&ppm("P6\n1 1\n255\n", &[10, 20, 30])).unwrap();
        assert_eq!((img.width(), img.height()), (1, 1));
        assert_eq!(img.pixels()[0], Rgb::new(10, 20, 30));
    }

    #[test]
    fn row_major_layout() {
        let raster: Vec<u8> = (0..12).collect();
        let img = load_ppm(&ppm("P6\n2 2\n255\n", &raster)).unwrap();
        assert_eq!(img.get(PixelCoord::new(1, 0)), Rgb::new(3, 4, 5));
        assert_eq!(img.get(PixelCoord::new(0, 1)), Rgb::new(6, 7, 8));
    }

    #[test]
    fn header_comments_are_skipped() {
        let img = load_ppm(&ppm("P6 # made by hand\n1 # w\n1\n255\n", &[1, 2, 3])).unwrap();
        assert_eq!(img.pixels()[0], Rgb::new(1, 2, 3));
    }

    #[test]
    fn rejects_p5() {
        let err = load_ppm(&ppm("P5\n1 1\n255\n", &[0])).unwrap_err();
        assert!(matches!(err, Error::BadMagic { .. }));
    }

    #[test]
    fn rejects_other_maxval() {
        assert_eq!(load_ppm(&ppm("P6\n1 1\n65535\n", &[0; 6])).unwrap_err(), Error::MaxVal(65535));
        assert_eq!(load_ppm(&ppm("P6\n1 1\n15\n", &[0; 3])).unwrap_err(), Error::MaxVal(15));
    }

    #[test]
    fn rejects_truncated_raster() {
        let err = load_ppm(&ppm("P6\n2 1\n255\n", &[0; 5])).unwrap_err();
        assert_eq!(err, Error::Truncated { expected: 6, found: 5 });
    }

    #[test]
    fn rejects_non_positive_dimensions() {
        assert!(matches!(load_ppm(&ppm("P6\n0 1\n255\n", &[])), Err(Error::Dimensions { .. })));
        assert!(matches!(load_ppm(&ppm("P6\n-2 1\n255\n", &[])), Err(Error::Dimensions { .. })));
    }

    #[test]
    fn rejects_garbage_header() {
        assert!(matches!(load_ppm(b"P6\nab 1\n255\n"), Err(Error::Header(_))));
        assert!(matches!(load_ppm(b"P6"), Err(Error::Header(_))));
    }

    #[test]
    fn save_black_pixel() {
        let img = ImageRgb::filled(1, 1, Rgb::new(0, 0, 0)).unwrap();
        assert_eq!(save_ppm(&img), ppm("P6\n1 1\n255\n", &[0, 0, 0]));
    }

    #[test]
    fn save_two_pixels() {
        let img = ImageRgb::new(2, 1, vec![Rgb::new(255, 0, 0), Rgb::new(0, 255, 0)]).unwrap();
        assert_eq!(save_ppm(&img), ppm("P6\n2 1\n255\n", &[255, 0, 0, 0, 255, 0]));
    }
}
