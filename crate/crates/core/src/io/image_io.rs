//! PNG (8/16-bit read, 8-bit write) and binary PNM (P5/P6) image files.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::resampler::Image;

fn format_err(path: &Path, msg: impl std::fmt::Display) -> Error {
    Error::Format(format!("{}: {msg}", path.display()))
}

fn to_u8(v: f32) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Read a PNG as values in `[0, 1]`. Palettes are expanded and alpha is
/// dropped, giving 1 or 3 channels.
pub fn read_png(path: &Path) -> Result<Image> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut decoder = png::Decoder::new(BufReader::new(file));
    decoder.set_transformations(png::Transformations::EXPAND);
    let mut reader = decoder.read_info().map_err(|e| format_err(path, e))?;
    let size = reader.output_buffer_size().ok_or_else(|| format_err(path, "image too large"))?;
    let mut buf = vec![0; size];
    let info = reader.next_frame(&mut buf).map_err(|e| format_err(path, e))?;
    let samples: Vec<f32> = match info.bit_depth {
        png::BitDepth::Eight => buf[..info.line_size * info.height as usize].iter().map(|&b| b as f32 / 255.0).collect(),
        png::BitDepth::Sixteen => buf[..info.line_size * info.height as usize]
            .chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]) as f32 / 65535.0)
            .collect(),
        d => return Err(format_err(path, format!("unsupported bit depth {d:?}"))),
    };
    let (src_c, keep) = match info.color_type {
        png::ColorType::Grayscale => (1, 1),
        png::ColorType::GrayscaleAlpha => (2, 1),
        png::ColorType::Rgb => (3, 3),
        png::ColorType::Rgba => (4, 3),
        c => return Err(format_err(path, format!("unsupported color type {c:?}"))),
    };
    let (w, h) = (info.width as usize, info.height as usize);
    let per_line = w * src_c;
    let line_samples = samples.len() / h;
    let data = (0..h)
        .flat_map(|row| {
            let line = &samples[row * line_samples..row * line_samples + per_line];
            line.chunks_exact(src_c).flat_map(|px| px[..keep].to_vec()).collect::<Vec<_>>()
        })
        .collect();
    Image::new(w, h, keep, data)
}

/// Write an 8-bit PNG. Values are clamped to `[0, 1]`; 1, 2, 3 or 4 channels.
pub fn write_png(path: &Path, image: &Image) -> Result<()> {
    let color = match image.channels {
        1 => png::ColorType::Grayscale,
        2 => png::ColorType::GrayscaleAlpha,
        3 => png::ColorType::Rgb,
        4 => png::ColorType::Rgba,
        c => return Err(Error::shape(format!("cannot write a {c}-channel PNG"))),
    };
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut enc = png::Encoder::new(BufWriter::new(file), image.width as u32, image.height as u32);
    enc.set_color(color);
    enc.set_depth(png::BitDepth::Eight);
    let bytes: Vec<u8> = image.data.iter().map(|&v| to_u8(v)).collect();
    let mut writer = enc.write_header().map_err(|e| format_err(path, e))?;
    writer.write_image_data(&bytes).map_err(|e| format_err(path, e))?;
    writer.finish().map_err(|e| format_err(path, e))
}

/// Read a binary PGM (`P5`) or PPM (`P6`) with maxval up to 65535.
pub fn read_pnm(path: &Path) -> Result<Image> {
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    let mut pos = 0;
    let mut token = || -> Option<String> {
        loop {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
                continue;
            }
            break;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        (pos > start).then(|| String::from_utf8_lossy(&bytes[start..pos]).into_owned())
    };
    let magic = token().ok_or_else(|| format_err(path, "empty file"))?;
    let channels = match magic.as_str() {
        "P5" => 1,
        "P6" => 3,
        m => return Err(format_err(path, format!("unsupported magic {m:?}"))),
    };
    let mut num = || -> Result<usize> {
        token()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| format_err(path, "bad header"))
    };
    let (w, h, maxval) = (num()?, num()?, num()?);
    if maxval == 0 || maxval > 65535 {
        return Err(format_err(path, format!("maxval {maxval} out of range")));
    }
    // exactly one whitespace byte separates the header from the raster
    pos += 1;
    let n = w * h * channels;
    let width = if maxval < 256 { 1 } else { 2 };
    let raster = bytes.get(pos..pos + n * width).ok_or_else(|| format_err(path, "truncated raster"))?;
    let scale = maxval as f32;
    let data = if width == 1 {
        raster.iter().map(|&b| b as f32 / scale).collect()
    } else {
        raster.chunks_exact(2).map(|c| u16::from_be_bytes([c[0], c[1]]) as f32 / scale).collect()
    };
    Image::new(w, h, channels, data)
}

/// Write an 8-bit `P5` (1 channel) or `P6` (3 channels).
pub fn write_pnm(path: &Path, image: &Image) -> Result<()> {
    let magic = match image.channels {
        1 => "P5",
        3 => "P6",
        c => return Err(Error::shape(format!("cannot write a {c}-channel PNM"))),
    };
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let bytes: Vec<u8> = image.data.iter().map(|&v| to_u8(v)).collect();
    write!(out, "{magic}\n{} {}\n255\n", image.width, image.height)
        .and_then(|_| out.write_all(&bytes))
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(path, e))
}

fn extension(path: &Path) -> String {
    path.extension().and_then(|e| e.to_str()).unwrap_or("").to_ascii_lowercase()
}

/// Read by extension: `.png`, or `.ppm` / `.pgm` / `.pnm`.
pub fn read_image(path: &Path) -> Result<Image> {
    match extension(path).as_str() {
        "png" => read_png(path),
        "ppm" | "pgm" | "pnm" => read_pnm(path),
        e => Err(format_err(path, format!("unknown image extension {e:?}"))),
    }
}

pub fn write_image(path: &Path, image: &Image) -> Result<()> {
    match extension(path).as_str() {
        "png" => write_png(path, image),
        "ppm" | "pgm" | "pnm" => write_pnm(path, image),
        e => Err(format_err(path, format!("unknown image extension {e:?}"))),
    }
}
