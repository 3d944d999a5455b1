use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use thiserror::Error;

use super::{DepthImage, GrayImage, RgbImage, DEPTH_PNG_SCALE};

#[derive(Debug, Error)]
pub enum ImageIoError {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("png error on {path}: {message}")]
    Png { path: String, message: String },
    #[error("unsupported png layout in {0} (expected {1})")]
    Unsupported(String, &'static str),
}

fn io_err(path: &Path, source: std::io::Error) -> ImageIoError {
    ImageIoError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn png_err(path: &Path, source: impl std::fmt::Display) -> ImageIoError {
    ImageIoError::Png {
        path: path.display().to_string(),
        message: source.to_string(),
    }
}

fn quantize8(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

pub fn save_rgb_png(img: &RgbImage, path: &Path) -> Result<(), ImageIoError> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut enc = png::Encoder::new(BufWriter::new(file), img.width as u32, img.height as u32);
    enc.set_color(png::ColorType::Rgb);
    enc.set_depth(png::BitDepth::Eight);
    let mut writer = enc.write_header().map_err(|e| png_err(path, e))?;
    let mut bytes = Vec::with_capacity(img.data.len() * 3);
    for px in &img.data {
        bytes.push(quantize8(px[0]));
        bytes.push(quantize8(px[1]));
        bytes.push(quantize8(px[2]));
    }
    writer
        .write_image_data(&bytes)
        .map_err(|e| png_err(path, e))
}

pub fn save_gray_png(img: &GrayImage, path: &Path) -> Result<(), ImageIoError> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut enc = png::Encoder::new(BufWriter::new(file), img.width as u32, img.height as u32);
    enc.set_color(png::ColorType::Grayscale);
    enc.set_depth(png::BitDepth::Eight);
    let mut writer = enc.write_header().map_err(|e| png_err(path, e))?;
    let bytes: Vec<u8> = img.data.iter().map(|&v| quantize8(v)).collect();
    writer
        .write_image_data(&bytes)
        .map_err(|e| png_err(path, e))
}

/// 16-bit grayscale, 5000 units per meter. Invalid depth stores zero.
pub fn save_depth_png(img: &DepthImage, path: &Path) -> Result<(), ImageIoError> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut enc = png::Encoder::new(BufWriter::new(file), img.width as u32, img.height as u32);
    enc.set_color(png::ColorType::Grayscale);
    enc.set_depth(png::BitDepth::Sixteen);
    let mut writer = enc.write_header().map_err(|e| png_err(path, e))?;
    let mut bytes = Vec::with_capacity(img.data.len() * 2);
    for &d in &img.data {
        let units = if d.is_finite() && d > 0.0 {
            (d * DEPTH_PNG_SCALE).round().clamp(0.0, 65535.0) as u16
        } else {
            0
        };
        bytes.extend_from_slice(&units.to_be_bytes()); // PNG is big-endian
    }
    writer
        .write_image_data(&bytes)
        .map_err(|e| png_err(path, e))
}

pub fn load_rgb_png(path: &Path) -> Result<RgbImage, ImageIoError> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let decoder = png::Decoder::new(BufReader::new(file));
    let mut reader = decoder.read_info().map_err(|e| png_err(path, e))?;
    let mut buf = vec![0u8; reader.output_buffer_size().unwrap_or(0)];
    let info = reader.next_frame(&mut buf).map_err(|e| png_err(path, e))?;
    if info.color_type != png::ColorType::Rgb || info.bit_depth != png::BitDepth::Eight {
        return Err(ImageIoError::Unsupported(
            path.display().to_string(),
            "8-bit RGB",
        ));
    }
    let (w, h) = (info.width as usize, info.height as usize);
    let mut img = RgbImage::new(w, h);
    for i in 0..w * h {
        img.data[i] = [
            buf[i * 3] as f64 / 255.0,
            buf[i * 3 + 1] as f64 / 255.0,
            buf[i * 3 + 2] as f64 / 255.0,
        ];
    }
    Ok(img)
}

pub fn load_depth_png(path: &Path) -> Result<DepthImage, ImageIoError> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let decoder = png::Decoder::new(BufReader::new(file));
    let mut reader = decoder.read_info().map_err(|e| png_err(path, e))?;
    let mut buf = vec![0u8; reader.output_buffer_size().unwrap_or(0)];
    let info = reader.next_frame(&mut buf).map_err(|e| png_err(path, e))?;
    if info.color_type != png::ColorType::Grayscale || info.bit_depth != png::BitDepth::Sixteen {
        return Err(ImageIoError::Unsupported(
            path.display().to_string(),
            "16-bit grayscale",
        ));
    }
    let (w, h) = (info.width as usize, info.height as usize);
    let mut img = DepthImage::new(w, h);
    for i in 0..w * h {
        let units = u16::from_be_bytes([buf[i * 2], buf[i * 2 + 1]]);
        img.data[i] = units as f64 / DEPTH_PNG_SCALE;
    }
    Ok(img)
}
