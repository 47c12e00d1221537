//! COCO uncompressed run-length encoding.
//!
//! Masks are handled row-major in memory; runs are counted in column-major
//! scan order, starting with a (possibly empty) run of zeros.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rle {
    /// `[height, width]`.
    pub size: [u32; 2],
    pub counts: Vec<u32>,
}

impl Rle {
    #[inline]
    pub fn height(&self) -> u32 {
        self.size[0]
    }

    #[inline]
    pub fn width(&self) -> u32 {
        self.size[1]
    }

    pub fn validate(&self) -> Result<()> {
        let total: u64 = self.counts.iter().map(|&c| c as u64).sum();
        let expected = self.size[0] as u64 * self.size[1] as u64;
        if total != expected {
            return Err(Error::Format(format!(
                "RLE counts sum to {total}, expected {expected} for size {:?}",
                self.size
            )));
        }
        Ok(())
    }

    /// Foreground runs as `(start, length)` in column-major linear indices.
    pub fn runs(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        let mut pos = 0u64;
        self.counts.iter().enumerate().filter_map(move |(k, &c)| {
            let start = pos;
            pos += c as u64;
            (k % 2 == 1 && c > 0).then_some((start, c as u64))
        })
    }

    pub fn area(&self) -> u64 {
        self.counts.iter().skip(1).step_by(2).map(|&c| c as u64).sum()
    }

    /// Tight `[x, y, w, h]` bounds of the foreground, in pixels.
    pub fn bbox(&self) -> Option<[u32; 4]> {
        let h = self.height() as u64;
        if h == 0 {
            return None;
        }
        let (mut x0, mut y0, mut x1, mut y1) = (u64::MAX, u64::MAX, 0u64, 0u64);
        let mut any = false;
        for (start, len) in self.runs() {
            any = true;
            let end = start + len - 1;
            let (c0, c1) = (start / h, end / h);
            x0 = x0.min(c0);
            x1 = x1.max(c1);
            if c0 == c1 {
                y0 = y0.min(start % h);
                y1 = y1.max(end % h);
            } else {
                // spans a column boundary: reaches row h-1 of c0 and row 0 of c1
                y0 = 0;
                y1 = h - 1;
            }
        }
        any.then(|| [x0 as u32, y0 as u32, (x1 - x0 + 1) as u32, (y1 - y0 + 1) as u32])
    }
}

/// Encodes a row-major mask of `height * width` pixels.
pub fn mask_to_rle(mask: &[bool], height: usize, width: usize) -> Rle {
    assert_eq!(mask.len(), height * width, "mask size mismatch");
    rle_from_fn(height, width, |r, c| mask[r * width + c])
}

/// Encodes the mask defined by `inside(row, col)`.
pub fn rle_from_fn(height: usize, width: usize, mut inside: impl FnMut(usize, usize) -> bool) -> Rle {
    let mut counts = Vec::new();
    let mut current = false;
    let mut run = 0u32;
    for c in 0..width {
        for r in 0..height {
            let v = inside(r, c);
            if v != current {
                counts.push(run);
                run = 0;
                current = v;
            }
            run += 1;
        }
    }
    counts.push(run);
    Rle {
        size: [height as u32, width as u32],
        counts,
    }
}

/// Decodes to a row-major mask.
pub fn rle_decode(rle: &Rle) -> Result<Vec<bool>> {
    rle.validate()?;
    let (h, w) = (rle.height() as usize, rle.width() as usize);
    let mut mask = vec![false; h * w];
    for (start, len) in rle.runs() {
        for p in start..start + len {
            let (c, r) = (p as usize / h, p as usize % h);
            mask[r * w + c] = true;
        }
    }
    Ok(mask)
}

/// Foreground pixels common to both masks, computed by merging runs.
pub fn rle_intersection(a: &Rle, b: &Rle) -> u64 {
    let mut ra = a.runs().peekable();
    let mut rb = b.runs().peekable();
    let mut inter = 0u64;
    while let (Some(&(sa, la)), Some(&(sb, lb))) = (ra.peek(), rb.peek()) {
        let (ea, eb) = (sa + la, sb + lb);
        let lo = sa.max(sb);
        let hi = ea.min(eb);
        if hi > lo {
            inter += hi - lo;
        }
        if ea <= eb {
            ra.next();
        } else {
            rb.next();
        }
    }
    inter
}
