use std::fs;
use std::path::Path;

use crate::alignment::AlignedSet;
use crate::dcc::Symbol;
use crate::error::{Error, Result};

/// Trials as rows, grammar positions as columns, one brightness level per symbol.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColorMap {
    pub width: usize,
    pub height: usize,
    pub levels: usize,
    pub pixels: Vec<u8>,
}

impl ColorMap {
    pub fn from_aligned(aligned: &AlignedSet) -> Result<Self> {
        if aligned.grammars.is_empty() || aligned.length() == 0 {
            return Err(Error::EmptyInput("nothing to draw".into()));
        }
        let levels = aligned.alphabet_size();
        let step = brightness_step(levels);
        let pixels = aligned
            .grammars
            .iter()
            .flat_map(|g| g.symbols.iter().map(move |&s| brightness(s, step)))
            .collect();
        Ok(ColorMap {
            width: aligned.length(),
            height: aligned.grammars.len(),
            levels,
            pixels,
        })
    }

    pub fn row(&self, r: usize) -> &[u8] {
        &self.pixels[r * self.width..(r + 1) * self.width]
    }

    /// Binary PGM (P5), maxval 255.
    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }
}

/// `floor(255 / levels)`, so the brightest symbol never exceeds 255.
pub fn brightness_step(levels: usize) -> u8 {
    (255 / levels.max(1)) as u8
}

fn brightness(symbol: Symbol, step: u8) -> u8 {
    // symbols past 255 / step only occur for alphabets too large to quantize
    (usize::from(symbol) * usize::from(step)).min(255) as u8
}

pub fn emit_colormap(aligned: &AlignedSet, path: &Path) -> Result<ColorMap> {
    let map = ColorMap::from_aligned(aligned)?;
    fs::write(path, map.to_pgm()).map_err(|e| Error::io(path, e))?;
    Ok(map)
}
