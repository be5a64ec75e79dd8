//! Causal gradient-adjusted prediction (GAP).
//!
//! Predictions only ever look at reconstructed pixels, so the encoder and the
//! decoder walk through identical windows even when `τ > 0`.

use crate::error::ShapeError;

/// Value substituted for every neighbour of the very first pixel.
pub const ORIGIN_FILL: u8 = 128;

const SHARP_EDGE: i32 = 80;
const EDGE: i32 = 32;
const WEAK_EDGE: i32 = 8;

/// Reconstructed causal neighbours of the pixel being coded.
///
/// ```text
///          nn  nne
///      nw  n   ne
///  ww  w   x
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CausalWindow {
    pub w: u8,
    pub ww: u8,
    pub n: u8,
    pub nn: u8,
    pub ne: u8,
    pub nw: u8,
    pub nne: u8,
}

impl CausalWindow {
    pub const fn uniform(v: u8) -> Self {
        Self { w: v, ww: v, n: v, nn: v, ne: v, nw: v, nne: v }
    }

    /// Horizontal and vertical gradient estimates `(dh, dv)`.
    #[inline]
    pub fn gradients(&self) -> (i32, i32) {
        let [w, ww, n, nn, ne, nw, nne] =
            [self.w, self.ww, self.n, self.nn, self.ne, self.nw, self.nne].map(i32::from);
        let dh = (w - ww).abs() + (n - nw).abs() + (n - ne).abs();
        let dv = (w - nw).abs() + (n - nn).abs() + (ne - nne).abs();
        (dh, dv)
    }

    /// Local activity `dh + dv`, used for entropy-coding contexts.
    #[inline]
    pub fn activity(&self) -> i32 {
        let (dh, dv) = self.gradients();
        dh + dv
    }
}

/// GAP prediction in `[0, 255]`. Divisions truncate toward zero.
pub fn predict(win: &CausalWindow) -> u8 {
    let (dh, dv) = win.gradients();
    let w = i32::from(win.w);
    let n = i32::from(win.n);
    let diff = dv - dh;

    let pred = if diff > SHARP_EDGE {
        w
    } else if -diff > SHARP_EDGE {
        n
    } else {
        let p = (w + n) / 2 + (i32::from(win.ne) - i32::from(win.nw)) / 4;
        if diff > EDGE {
            (p + w) / 2
        } else if diff > WEAK_EDGE {
            (3 * p + w) / 4
        } else if -diff > EDGE {
            (p + n) / 2
        } else if -diff > WEAK_EDGE {
            (3 * p + n) / 4
        } else {
            p
        }
    };
    pred.clamp(0, 255) as u8
}

/// Gathers the causal window of `(row, col)` from a partially reconstructed
/// raster plane, substituting missing neighbours at the borders.
///
/// Only pixels strictly before `(row, col)` in raster order are read.
pub fn boundary_window(
    plane: &[u8],
    width: usize,
    height: usize,
    row: usize,
    col: usize,
) -> Result<CausalWindow, ShapeError> {
    if row >= height || col >= width || plane.len() < width * height {
        return Err(ShapeError::OutOfRange { row, col, width, height });
    }
    Ok(window_unchecked(plane, width, row, col))
}

#[inline]
pub(crate) fn window_unchecked(plane: &[u8], width: usize, row: usize, col: usize) -> CausalWindow {
    let at = |r: usize, c: usize| plane[r * width + c];
    let last_col = col + 1 == width;

    if row == 0 {
        if col == 0 {
            return CausalWindow::uniform(ORIGIN_FILL);
        }
        let w = at(0, col - 1);
        let ww = if col >= 2 { at(0, col - 2) } else { w };
        return CausalWindow { w, ww, n: w, nn: w, ne: w, nw: w, nne: w };
    }

    let n = at(row - 1, col);
    let nw = if col > 0 { at(row - 1, col - 1) } else { n };
    let ne = if last_col { n } else { at(row - 1, col + 1) };
    let w = if col > 0 { at(row, col - 1) } else { n };
    let ww = if col >= 2 { at(row, col - 2) } else { w };
    let (nn, nne) = if row == 1 {
        (n, ne)
    } else if last_col {
        (at(row - 2, col), n)
    } else {
        (at(row - 2, col), at(row - 2, col + 1))
    };
    CausalWindow { w, ww, n, nn, ne, nw, nne }
}
