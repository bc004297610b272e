use crate::error::{Error, Result};
use crate::imgbuf::Image;
use crate::scalar::Real;

pub const STACK_CHANNELS: usize = 6;
pub const CHANNEL_NAMES: [&str; STACK_CHANNELS] = ["normal_x", "normal_y", "normal_z", "texture_r", "texture_g", "texture_b"];

/// Smallest pyramid level side.
pub const MIN_LEVEL: usize = 4;

/// One pyramid level, row-major `res × res × 6`.
#[derive(Debug, Clone, PartialEq)]
pub struct StackLevel<T> {
    pub res: usize,
    pub data: Vec<T>,
}

impl<T: Real> StackLevel<T> {
    #[inline]
    pub fn get(&self, row: usize, col: usize, ch: usize) -> T {
        self.data[(row * self.res + col) * STACK_CHANNELS + ch]
    }
}

/// Normal rendering (channels 0-2) concatenated with the textured rendering
/// (channels 3-5), plus 2×2 mean-pooled copies down to [`MIN_LEVEL`].
#[derive(Debug, Clone, PartialEq)]
pub struct ConditioningStack<T> {
    pub levels: Vec<StackLevel<T>>,
}

impl<T: Real> ConditioningStack<T> {
    pub fn resolution(&self) -> usize {
        self.levels[0].res
    }

    pub fn channels(&self) -> &StackLevel<T> {
        &self.levels[0]
    }

    /// Number of levels from `resolution` down to [`MIN_LEVEL`].
    pub fn max_levels(resolution: usize) -> usize {
        if resolution < MIN_LEVEL || !resolution.is_power_of_two() {
            return 0;
        }
        (resolution / MIN_LEVEL).trailing_zeros() as usize + 1
    }
}

/// 2×2 box-filter downsampling.
pub fn pool_2x2<T: Real>(level: &StackLevel<T>) -> StackLevel<T> {
    let res = level.res / 2;
    let quarter = T::lit(0.25);
    let mut data = Vec::with_capacity(res * res * STACK_CHANNELS);
    for row in 0..res {
        for col in 0..res {
            for ch in 0..STACK_CHANNELS {
                let s = level.get(2 * row, 2 * col, ch)
                    + level.get(2 * row, 2 * col + 1, ch)
                    + level.get(2 * row + 1, 2 * col, ch)
                    + level.get(2 * row + 1, 2 * col + 1, ch);
                data.push(s * quarter);
            }
        }
    }
    StackLevel { res, data }
}

pub fn conditioning_stack<T: Real>(
    normal_img: &Image<T>,
    color_img: &Image<T>,
    levels: usize,
) -> Result<ConditioningStack<T>> {
    let res = normal_img.resolution;
    if color_img.resolution != res {
        return Err(Error::ResolutionMismatch(format!(
            "normal rendering is {res}px, textured rendering is {}px",
            color_img.resolution
        )));
    }
    let max = ConditioningStack::<T>::max_levels(res);
    if levels == 0 || levels > max {
        return Err(Error::invalid(
            "levels",
            format!("{levels} requested, {res}px supports 1..={max}"),
        ));
    }
    let data = normal_img
        .pixels
        .iter()
        .zip(&color_img.pixels)
        .flat_map(|(n, c)| [n[0], n[1], n[2], c[0], c[1], c[2]])
        .collect();
    let mut out = vec![StackLevel { res, data }];
    while out.len() < levels {
        let next = pool_2x2(out.last().expect("nonempty"));
        out.push(next);
    }
    Ok(ConditioningStack { levels: out })
}
