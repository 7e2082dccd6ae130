//! Screenshot → input tensor.
//!
//! Landscape screens are rotated to portrait, everything is bilinearly
//! resized to the configured input size, and pixel values are mapped to
//! `[-1, 1]` via `(v/255 - 0.5) / 0.5`.

use super::ModelConfig;
use crate::error::{Error, Result};
use crate::raster::bilinear_resize;
use crate::tensor::{Scalar, Tensor4};
use image::RgbImage;

pub fn preprocess_image<T: Scalar>(img: &RgbImage, config: &ModelConfig) -> Result<Tensor4<T>> {
    if img.width() == 0 || img.height() == 0 {
        return Err(Error::Argument("preprocess_image: zero-dimension image".into()));
    }
    let oriented = if img.width() > img.height() {
        image::imageops::rotate90(img) // clockwise, landscape → portrait
    } else {
        img.clone()
    };
    let resized = bilinear_resize(
        &oriented,
        config.input_width as u32,
        config.input_height as u32,
    )?;
    let (h, w) = (config.input_height, config.input_width);
    let mut t = Tensor4::zeros(1, 3, h, w);
    for y in 0..h {
        for x in 0..w {
            let px = resized.get_pixel(x as u32, y as u32).0;
            for (ch, &byte) in px.iter().enumerate() {
                let v = (byte as f64 / 255.0 - 0.5) / 0.5;
                t.set(0, ch, y, x, T::from_f64(v));
            }
        }
    }
    Ok(t)
}
