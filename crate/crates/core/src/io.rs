//! File formats: PFM for HDR data, Radiance RGBE (read only) and 8-bit PNG.

use std::fs::File;
use std::io::{BufReader, BufWriter, Cursor, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::image::Image;
use crate::tonemap::quantize8_value;

/// PNG `tEXt` keyword recording which curve produced an LDR image.
pub const TONEMAP_KEYWORD: &str = "Tonemap";

/// Encodes `img` as a color PFM: `PF\n<w> <h>\n-1.0\n`, then little-endian
/// f32 RGB triples with the bottom row first.
pub fn encode_pfm(img: &Image) -> Vec<u8> {
    let header = format!("PF\n{} {}\n-1.0\n", img.width(), img.height());
    let mut out = Vec::with_capacity(header.len() + img.pixels().len() * 12);
    out.extend_from_slice(header.as_bytes());
    for row in (0..img.height()).rev() {
        for p in img.row(row) {
            for v in p {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
    }
    out
}

pub fn write_pfm(path: impl AsRef<Path>, img: &Image) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&encode_pfm(img))?;
    w.flush()?;
    Ok(())
}

/// Decodes color (`PF`) or grayscale (`Pf`) PFM in either byte order.
pub fn decode_pfm(bytes: &[u8]) -> Result<Image> {
    let mut pos = 0usize;
    let mut token = || -> Result<String> {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::format("PFM", "truncated header"));
        }
        Ok(String::from_utf8_lossy(&bytes[start..pos]).into_owned())
    };
    let channels = match token()?.as_str() {
        "PF" => 3,
        "Pf" => 1,
        other => return Err(Error::format("PFM", format!("bad magic '{other}'"))),
    };
    let width: usize = parse_field(&token()?, "width")?;
    let height: usize = parse_field(&token()?, "height")?;
    let scale: f32 = parse_field(&token()?, "scale")?;
    if scale == 0.0 || !scale.is_finite() {
        return Err(Error::format("PFM", "scale must be non-zero"));
    }
    // exactly one whitespace byte separates the header from the raster
    let data = bytes
        .get(pos + 1..)
        .ok_or_else(|| Error::format("PFM", "missing raster"))?;
    let expected = width * height * channels * 4;
    if data.len() < expected {
        return Err(Error::format(
            "PFM",
            format!("raster holds {} bytes, expected {expected}", data.len()),
        ));
    }
    let little = scale < 0.0;
    let read = |i: usize| -> f32 {
        let b: [u8; 4] = data[i * 4..i * 4 + 4].try_into().unwrap();
        if little {
            f32::from_le_bytes(b)
        } else {
            f32::from_be_bytes(b)
        }
    };
    let mut pixels = vec![[0.0f32; 3]; width * height];
    for file_row in 0..height {
        let row = height - 1 - file_row;
        for col in 0..width {
            let base = (file_row * width + col) * channels;
            pixels[row * width + col] = if channels == 3 {
                [read(base), read(base + 1), read(base + 2)]
            } else {
                [read(base); 3]
            };
        }
    }
    Image::new(width, height, pixels)
}

fn parse_field<T: std::str::FromStr>(s: &str, what: &str) -> Result<T> {
    s.parse()
        .map_err(|_| Error::format("PFM", format!("bad {what} '{s}'")))
}

pub fn read_pfm(path: impl AsRef<Path>) -> Result<Image> {
    decode_pfm(&std::fs::read(path)?)
}

/// Decodes a Radiance `.hdr` (RGBE) file.
pub fn read_rgbe(path: impl AsRef<Path>) -> Result<Image> {
    decode_rgbe(BufReader::new(File::open(path)?))
}

pub fn decode_rgbe(reader: impl std::io::BufRead) -> Result<Image> {
    use image::ImageDecoder;
    let decoder = image::codecs::hdr::HdrDecoder::new(reader)
        .map_err(|e| Error::format("RGBE", e.to_string()))?;
    let (w, h) = decoder.dimensions();
    let mut buf = vec![0u8; decoder.total_bytes() as usize];
    decoder
        .read_image(&mut buf)
        .map_err(|e| Error::format("RGBE", e.to_string()))?;
    let pixels = buf
        .chunks_exact(12)
        .map(|c| {
            let f = |i: usize| f32::from_ne_bytes(c[i * 4..i * 4 + 4].try_into().unwrap());
            [f(0), f(1), f(2)]
        })
        .collect();
    Image::new(w as usize, h as usize, pixels)
}

/// Encodes a `[0, 1]` image as an sRGB-tagged 8-bit RGB PNG.
///
/// `curve` is stored in a `tEXt` chunk under [`TONEMAP_KEYWORD`].
pub fn encode_png(img: &Image, curve: Option<&str>) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    {
        let mut encoder = png::Encoder::new(&mut out, img.width() as u32, img.height() as u32);
        encoder.set_color(png::ColorType::Rgb);
        encoder.set_depth(png::BitDepth::Eight);
        encoder.set_source_srgb(png::SrgbRenderingIntent::Perceptual);
        if let Some(curve) = curve {
            encoder
                .add_text_chunk(TONEMAP_KEYWORD.to_string(), curve.to_string())
                .map_err(png_error)?;
        }
        let mut writer = encoder.write_header().map_err(png_error)?;
        let data: Vec<u8> = img.pixels().iter().flatten().map(|v| to_u8(*v)).collect();
        writer.write_image_data(&data).map_err(png_error)?;
        writer.finish().map_err(png_error)?;
    }
    Ok(out)
}

#[inline]
pub fn to_u8(v: f32) -> u8 {
    (quantize8_value(v) * 255.0).round() as u8
}

fn png_error(e: impl std::fmt::Display) -> Error {
    Error::format("PNG", e.to_string())
}

pub fn write_png(path: impl AsRef<Path>, img: &Image, curve: Option<&str>) -> Result<()> {
    std::fs::write(path, encode_png(img, curve)?)?;
    Ok(())
}

/// An 8-bit image read back into `[0, 1]`, with its tone-curve tag if present.
#[derive(Debug, Clone)]
pub struct LdrImage {
    pub image: Image,
    pub curve: Option<String>,
}

pub fn decode_png(bytes: &[u8]) -> Result<LdrImage> {
    let mut decoder = png::Decoder::new(Cursor::new(bytes));
    decoder.set_transformations(png::Transformations::normalize_to_color8());
    let mut reader = decoder.read_info().map_err(png_error)?;
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| Error::format("PNG", "image too large"))?;
    let mut buf = vec![0u8; size];
    let frame = reader.next_frame(&mut buf).map_err(png_error)?;
    let (w, h) = (frame.width as usize, frame.height as usize);
    let stride = frame.line_size;
    let channels = match frame.color_type {
        png::ColorType::Grayscale => 1,
        png::ColorType::GrayscaleAlpha => 2,
        png::ColorType::Rgb => 3,
        png::ColorType::Rgba => 4,
        png::ColorType::Indexed => {
            return Err(Error::format("PNG", "unexpanded palette image"));
        }
    };
    let mut pixels = Vec::with_capacity(w * h);
    for row in 0..h {
        let line = &buf[row * stride..row * stride + w * channels];
        for px in line.chunks_exact(channels) {
            let f = |b: u8| b as f32 / 255.0;
            pixels.push(if channels < 3 {
                [f(px[0]); 3]
            } else {
                [f(px[0]), f(px[1]), f(px[2])]
            });
        }
    }
    let curve = reader
        .info()
        .uncompressed_latin1_text
        .iter()
        .find(|t| t.keyword == TONEMAP_KEYWORD)
        .map(|t| t.text.clone());
    Ok(LdrImage {
        image: Image::new(w, h, pixels)?,
        curve,
    })
}

pub fn read_png(path: impl AsRef<Path>) -> Result<LdrImage> {
    let mut bytes = Vec::new();
    File::open(path)?.read_to_end(&mut bytes)?;
    decode_png(&bytes)
}

/// Lower-cased extension of `path`, if any.
pub fn extension(path: &Path) -> Option<String> {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
}

/// Whether `path` names a format [`decode_image`] understands.
pub fn is_image_path(path: &Path) -> bool {
    matches!(
        extension(path).as_deref(),
        Some("pfm" | "hdr" | "rgbe" | "png")
    )
}

/// Decodes image bytes using the format implied by `path`'s extension
/// (`.pfm`, `.hdr`/`.rgbe`, or `.png` for 8-bit data).
pub fn decode_image(path: &Path, bytes: &[u8]) -> Result<Image> {
    match extension(path).as_deref() {
        Some("pfm") => decode_pfm(bytes),
        Some("hdr" | "rgbe") => decode_rgbe(Cursor::new(bytes)),
        Some("png") => Ok(decode_png(bytes)?.image),
        _ => Err(Error::format(
            "image",
            format!("unsupported extension for {}", path.display()),
        )),
    }
}

pub fn read_image(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    decode_image(path, &std::fs::read(path)?)
}
