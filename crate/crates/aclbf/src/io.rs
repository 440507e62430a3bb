//! Raster files: binary PGM (P5) in and out, PPM (P6) and PNG overlays, and
//! 8-bit grayscale PNG input.
//!
//! Samples are kept column-major in memory like every other field; only the
//! file encoders walk them row by row.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use aclbf_core::{Dims, GrayImage, LabelMask, PhaseField};

use crate::error::{Error, Result};

/// An 8-bit grayscale raster, column-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gray8 {
    pub dims: Dims,
    pub samples: Vec<u8>,
}

impl Gray8 {
    pub fn new(dims: Dims, samples: Vec<u8>) -> Self {
        assert_eq!(
            samples.len(),
            dims.len(),
            "sample count must match the grid"
        );
        Self { dims, samples }
    }

    pub fn from_fn(dims: Dims, mut f: impl FnMut(usize, usize) -> u8) -> Self {
        let mut samples = Vec::with_capacity(dims.len());
        for j in 0..dims.cols {
            for i in 0..dims.rows {
                samples.push(f(i, j));
            }
        }
        Self { dims, samples }
    }

    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.samples[self.dims.index(i, j)]
    }

    pub fn to_image(&self) -> Result<GrayImage> {
        Ok(GrayImage::from_u8(self.dims, &self.samples)?)
    }

    /// Object where the sample is at least 128.
    pub fn threshold(&self) -> LabelMask {
        LabelMask::from_fn(self.dims, |i, j| self.get(i, j) >= 128)
    }

    fn row_major(&self) -> Vec<u8> {
        let d = self.dims;
        let mut out = Vec::with_capacity(d.len());
        for i in 0..d.rows {
            for j in 0..d.cols {
                out.push(self.get(i, j));
            }
        }
        out
    }
}

/// Maps `[0, 1]` back to 8-bit samples.
pub fn quantize(v: f64) -> u8 {
    (v * 255.0).round().clamp(0.0, 255.0) as u8
}

pub fn mask_to_gray(mask: &LabelMask) -> Gray8 {
    Gray8::from_fn(mask.dims(), |i, j| if mask.get(i, j) { 255 } else { 0 })
}

/// `u > 0` as 255, everything else as 0.
pub fn field_sign_to_gray(u: &PhaseField) -> Gray8 {
    Gray8::from_fn(u.dims(), |i, j| if u.get(i, j) > 0.0 { 255 } else { 0 })
}

struct Header {
    magic: [u8; 2],
    width: usize,
    height: usize,
    maxval: usize,
    data_start: usize,
}

fn parse_header(bytes: &[u8], path: &Path) -> Result<Header> {
    if bytes.len() < 2 || bytes[0] != b'P' {
        return Err(Error::format(path, "not a PNM file"));
    }
    let magic = [bytes[0], bytes[1]];
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for (n, slot) in fields.iter_mut().enumerate() {
        // whitespace and comments between tokens
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                _ => break,
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        if start == pos {
            return Err(Error::format(
                path,
                format!("malformed header field {}", n + 1),
            ));
        }
        let text = std::str::from_utf8(&bytes[start..pos]).expect("ascii digits");
        *slot = text
            .parse()
            .map_err(|_| Error::format(path, "header value out of range"))?;
    }
    // exactly one whitespace byte before the raster
    if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(Error::format(path, "missing whitespace after header"));
    }
    Ok(Header {
        magic,
        width: fields[0],
        height: fields[1],
        maxval: fields[2],
        data_start: pos + 1,
    })
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

/// Reads a binary PGM without normalizing.
pub fn read_pgm(path: &Path) -> Result<Gray8> {
    let bytes = read_bytes(path)?;
    decode_pgm(&bytes, path)
}

fn decode_pgm(bytes: &[u8], path: &Path) -> Result<Gray8> {
    let h = parse_header(bytes, path)?;
    match &h.magic {
        b"P5" => {}
        b"P6" | b"P3" => return Err(Error::format(path, "color images are not supported")),
        _ => return Err(Error::format(path, "only binary PGM (P5) is supported")),
    }
    if h.maxval != 255 {
        return Err(Error::format(
            path,
            format!("unsupported bit depth (maxval {}, expected 255)", h.maxval),
        ));
    }
    let n = h.width * h.height;
    let raster = &bytes[h.data_start..];
    if raster.len() < n {
        return Err(Error::format(
            path,
            format!("truncated raster: {} of {n} bytes", raster.len()),
        ));
    }
    let dims = Dims::new(h.height, h.width);
    Ok(Gray8::from_fn(dims, |i, j| raster[i * h.width + j]))
}

/// Reads an 8-bit grayscale PNG.
pub fn read_png(path: &Path) -> Result<Gray8> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let decoder = png::Decoder::new(std::io::BufReader::new(file));
    let mut reader = decoder
        .read_info()
        .map_err(|e| Error::format(path, e.to_string()))?;
    let info = reader.info();
    match info.color_type {
        png::ColorType::Grayscale => {}
        png::ColorType::GrayscaleAlpha
        | png::ColorType::Rgb
        | png::ColorType::Rgba
        | png::ColorType::Indexed => {
            return Err(Error::format(path, "color images are not supported"))
        }
    }
    if info.bit_depth != png::BitDepth::Eight {
        return Err(Error::format(
            path,
            "unsupported bit depth (expected 8-bit)",
        ));
    }
    let (width, height) = (info.width as usize, info.height as usize);
    let mut buf = vec![
        0;
        reader
            .output_buffer_size()
            .expect("8-bit gray fits in memory")
    ];
    let frame = reader
        .next_frame(&mut buf)
        .map_err(|e| Error::format(path, e.to_string()))?;
    let stride = frame.line_size;
    Ok(Gray8::from_fn(Dims::new(height, width), |i, j| {
        buf[i * stride + j]
    }))
}

fn has_extension(path: &Path, ext: &str) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case(ext))
}

/// Loads a grayscale image, dispatching on the `.png` extension, and
/// normalizes it to `[0, 1]`.
pub fn load_gray(path: &Path) -> Result<GrayImage> {
    let raw = if has_extension(path, "png") {
        read_png(path)?
    } else {
        read_pgm(path)?
    };
    raw.to_image().map_err(|e| match e {
        Error::Core(c) => Error::format(path, c.to_string()),
        other => other,
    })
}

fn write_file(path: &Path, header: &[u8], body: &[u8]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(header)
        .and_then(|_| w.write_all(body))
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

pub fn write_pgm(gray: &Gray8, path: &Path) -> Result<()> {
    let header = format!("P5\n{} {}\n255\n", gray.dims.cols, gray.dims.rows);
    write_file(path, header.as_bytes(), &gray.row_major())
}

/// Object as 255, background as 0.
pub fn write_mask(mask: &LabelMask, path: &Path) -> Result<()> {
    write_pgm(&mask_to_gray(mask), path)
}

/// Reads a mask written by [`write_mask`] (or any PGM, thresholded at 128).
pub fn read_mask(path: &Path) -> Result<LabelMask> {
    Ok(read_pgm(path)?.threshold())
}

/// An RGB raster, row-major, three bytes per pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rgb8 {
    pub dims: Dims,
    pub pixels: Vec<u8>,
}

impl Rgb8 {
    pub fn get(&self, i: usize, j: usize) -> [u8; 3] {
        let k = 3 * (i * self.dims.cols + j);
        [self.pixels[k], self.pixels[k + 1], self.pixels[k + 2]]
    }
}

const RED: [u8; 3] = [255, 0, 0];

/// Gray image with the mask contour painted red.
pub fn overlay(image: &GrayImage, mask: &LabelMask) -> Result<Rgb8> {
    let d = image.dims();
    if mask.dims() != d {
        return Err(aclbf_core::Error::DimensionMismatch(format!(
            "overlay: image {}x{}, mask {}x{}",
            d.rows,
            d.cols,
            mask.dims().rows,
            mask.dims().cols
        ))
        .into());
    }
    let contour = mask.contour();
    let mut pixels = Vec::with_capacity(3 * d.len());
    for i in 0..d.rows {
        for j in 0..d.cols {
            if contour.get(i, j) {
                pixels.extend_from_slice(&RED);
            } else {
                let g = quantize(image.get(i, j));
                pixels.extend_from_slice(&[g, g, g]);
            }
        }
    }
    Ok(Rgb8 { dims: d, pixels })
}

pub fn write_ppm(rgb: &Rgb8, path: &Path) -> Result<()> {
    let header = format!("P6\n{} {}\n255\n", rgb.dims.cols, rgb.dims.rows);
    write_file(path, header.as_bytes(), &rgb.pixels)
}

pub fn read_ppm(path: &Path) -> Result<Rgb8> {
    let bytes = read_bytes(path)?;
    let h = parse_header(&bytes, path)?;
    if &h.magic != b"P6" || h.maxval != 255 {
        return Err(Error::format(path, "expected an 8-bit binary PPM (P6)"));
    }
    let n = 3 * h.width * h.height;
    let raster = &bytes[h.data_start..];
    if raster.len() < n {
        return Err(Error::format(path, "truncated raster"));
    }
    Ok(Rgb8 {
        dims: Dims::new(h.height, h.width),
        pixels: raster[..n].to_vec(),
    })
}

fn png_encoder(
    w: BufWriter<File>,
    dims: Dims,
    color: png::ColorType,
    path: &Path,
    body: &[u8],
) -> Result<()> {
    let mut enc = png::Encoder::new(w, dims.cols as u32, dims.rows as u32);
    enc.set_color(color);
    enc.set_depth(png::BitDepth::Eight);
    let mut writer = enc
        .write_header()
        .map_err(|e| Error::format(path, e.to_string()))?;
    writer
        .write_image_data(body)
        .and_then(|_| writer.finish())
        .map_err(|e| Error::format(path, e.to_string()))
}

pub fn write_png_rgb(rgb: &Rgb8, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    png_encoder(
        BufWriter::new(file),
        rgb.dims,
        png::ColorType::Rgb,
        path,
        &rgb.pixels,
    )
}

pub fn write_png_gray(gray: &Gray8, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    png_encoder(
        BufWriter::new(file),
        gray.dims,
        png::ColorType::Grayscale,
        path,
        &gray.row_major(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_with_comments() {
        let bytes = b"P5\n# made by hand\n3 2\n# depth\n255\n\x00\x01\x02\x03\x04\x05";
        let g = decode_pgm(bytes, Path::new("t.pgm")).unwrap();
        assert_eq!(g.dims, Dims::new(2, 3));
        // row-major file order, column-major memory
        assert_eq!(g.get(0, 2), 2);
        assert_eq!(g.get(1, 0), 3);
        assert_eq!(g.samples, vec![0, 3, 1, 4, 2, 5]);
    }

    #[test]
    fn rejects_color_depth_and_truncation() {
        let p = Path::new("t");
        assert!(decode_pgm(b"P6\n3 3\n255\n", p)
            .unwrap_err()
            .to_string()
            .contains("color"));
        assert!(decode_pgm(b"P5\n1 1\n65535\n\x00\x00", p)
            .unwrap_err()
            .to_string()
            .contains("bit depth"));
        assert!(decode_pgm(b"P5\n4 4\n255\n\x00", p)
            .unwrap_err()
            .to_string()
            .contains("truncated"));
        assert!(decode_pgm(b"P2\n1 1\n255\n0", p).is_err());
        assert!(decode_pgm(b"GIF89a", p).is_err());
    }

    #[test]
    fn quantize_round_trips_samples() {
        for s in 0..=255u8 {
            assert_eq!(quantize(f64::from(s) / 255.0), s);
        }
        assert_eq!(quantize(-0.2), 0);
        assert_eq!(quantize(1.7), 255);
    }
}
