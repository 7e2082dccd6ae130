//! Model architecture configuration and the two named profiles.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Architecture description: 12 conv layers (3×3, stride 1, pad 1) with
/// batchnorm and ReLU, 6 max-pools placed after the listed conv indices, and
/// 4 fully connected layers ending in 2 outputs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub input_channels: usize,
    pub input_height: usize,
    pub input_width: usize,
    /// Output channels of each conv layer, in order.
    pub conv_channels: Vec<usize>,
    /// 0-based conv indices that are followed by a 2×2 max-pool.
    pub pool_after: Vec<usize>,
    /// Output widths of the fully connected layers; the last must be 2.
    pub fc_widths: Vec<usize>,
}

impl ModelConfig {
    /// Full-size profile: 3×768×448 input, channels 16/16/16/16/32/32/64/64/
    /// 128/128/128/128, FC widths 4096/1024/128/2.
    pub fn canonical() -> Self {
        ModelConfig {
            input_channels: 3,
            input_height: 768,
            input_width: 448,
            conv_channels: vec![16, 16, 16, 16, 32, 32, 64, 64, 128, 128, 128, 128],
            pool_after: vec![1, 3, 5, 7, 9, 11],
            fc_widths: vec![4096, 1024, 128, 2],
        }
    }

    /// Same topology at laptop scale: 3×192×128 input, channels
    /// 8/8/8/8/16/16/24/24/32/32/32/32, FC widths 256/64/16/2.
    pub fn desk() -> Self {
        ModelConfig {
            input_channels: 3,
            input_height: 192,
            input_width: 128,
            conv_channels: vec![8, 8, 8, 8, 16, 16, 24, 24, 32, 32, 32, 32],
            pool_after: vec![1, 3, 5, 7, 9, 11],
            fc_widths: vec![256, 64, 16, 2],
        }
    }

    pub fn profile(name: &str) -> Option<Self> {
        match name {
            "canonical" => Some(Self::canonical()),
            "desk" => Some(Self::desk()),
            _ => None,
        }
    }

    pub fn pool_count(&self) -> usize {
        self.pool_after.len()
    }

    /// Spatial dims after all pools.
    pub fn final_spatial(&self) -> (usize, usize) {
        let div = 1 << self.pool_count();
        (self.input_height / div, self.input_width / div)
    }

    /// Length of the flattened final conv activation, the first FC input.
    pub fn flatten_len(&self) -> usize {
        let (h, w) = self.final_spatial();
        self.conv_channels.last().copied().unwrap_or(0) * h * w
    }

    pub fn validate(&self) -> Result<()> {
        if self.conv_channels.len() != 12 {
            return Err(Error::Validation(format!(
                "expected 12 conv layers, got {}",
                self.conv_channels.len()
            )));
        }
        if self.pool_after.len() != 6 {
            return Err(Error::Validation(format!(
                "expected 6 pool positions, got {}",
                self.pool_after.len()
            )));
        }
        if self.fc_widths.len() != 4 {
            return Err(Error::Validation(format!(
                "expected 4 fully connected layers, got {}",
                self.fc_widths.len()
            )));
        }
        if self.fc_widths.last() != Some(&2) {
            return Err(Error::Validation("final FC width must be 2".into()));
        }
        if self.input_channels == 0 || self.conv_channels.contains(&0) {
            return Err(Error::Validation("channel counts must be positive".into()));
        }
        if self.fc_widths.contains(&0) {
            return Err(Error::Validation("FC widths must be positive".into()));
        }
        let mut prev = None;
        for &idx in &self.pool_after {
            if idx >= self.conv_channels.len() {
                return Err(Error::Validation(format!(
                    "pool position {idx} out of range for {} conv layers",
                    self.conv_channels.len()
                )));
            }
            if let Some(p) = prev {
                if idx <= p {
                    return Err(Error::Validation("pool positions must be strictly increasing".into()));
                }
            }
            prev = Some(idx);
        }
        let div = 1usize << self.pool_count();
        if !self.input_height.is_multiple_of(div) || !self.input_width.is_multiple_of(div) {
            return Err(Error::Validation(format!(
                "input {}x{} is not divisible by 2^{} pools",
                self.input_height,
                self.input_width,
                self.pool_count()
            )));
        }
        Ok(())
    }
}
