//! Seeded heightfields and ground texture classes.
//!
//! Heights are stored one sample per lattice node at `(i * cell_size, j * cell_size)`,
//! row-major with `j` running north. Everything downstream (spawning, camera placement,
//! rendering) queries the grid through [`TerrainGrid::sample_height`] and
//! [`TerrainGrid::slope_at`].

use image::{ImageBuffer, Luma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::{hash_keys, unit_f64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum TextureClass {
    Moss,
    Roots,
    Mud,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HeightmapParams {
    pub size_m: f64,
    pub cell_size: f64,
    pub amplitude: f64,
    pub octaves: u32,
    /// Lattice frequency of the first octave, 1/m.
    pub base_frequency: f64,
}

impl Default for HeightmapParams {
    fn default() -> Self {
        HeightmapParams {
            size_m: 128.0,
            cell_size: 0.5,
            amplitude: 6.0,
            octaves: 4,
            base_frequency: 1.0 / 40.0,
        }
    }
}

impl HeightmapParams {
    fn validate(&self) -> Result<()> {
        if !(self.size_m > 0.0 && self.size_m.is_finite()) {
            return Err(Error::Parameter(format!("size_m must be positive, got {}", self.size_m)));
        }
        if !(self.cell_size > 0.0 && self.cell_size.is_finite()) {
            return Err(Error::Parameter(format!(
                "cell_size must be positive, got {}",
                self.cell_size
            )));
        }
        if self.cell_size > self.size_m {
            return Err(Error::Parameter("cell_size exceeds size_m".into()));
        }
        if self.octaves == 0 {
            return Err(Error::Parameter("octaves must be at least 1".into()));
        }
        if !(self.amplitude >= 0.0 && self.amplitude.is_finite()) {
            return Err(Error::Parameter(format!(
                "amplitude must be finite and non-negative, got {}",
                self.amplitude
            )));
        }
        if !(self.base_frequency > 0.0 && self.base_frequency.is_finite()) {
            return Err(Error::Parameter(format!(
                "base_frequency must be positive, got {}",
                self.base_frequency
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TextureRules {
    pub mud_below: f64,
    pub roots_slope_above: f64,
}

impl TextureRules {
    pub const DEFAULT_ROOTS_SLOPE: f64 = 0.35;

    /// Mud below the 25th height percentile, roots on slopes of 0.35 rad or more.
    pub fn default_for(grid: &TerrainGrid) -> Self {
        TextureRules {
            mud_below: grid.height_percentile(0.25),
            roots_slope_above: Self::DEFAULT_ROOTS_SLOPE,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TerrainGrid {
    /// Lattice nodes along x.
    pub width_cells: usize,
    /// Lattice nodes along y.
    pub height_cells: usize,
    pub cell_size: f64,
    pub heights: Vec<f64>,
    pub texture_class: Vec<TextureClass>,
    pub seed: u64,
}

impl TerrainGrid {
    /// Wraps an explicit height array; every node starts as moss.
    pub fn from_heights(
        width_cells: usize,
        height_cells: usize,
        cell_size: f64,
        heights: Vec<f64>,
        seed: u64,
    ) -> Result<Self> {
        if width_cells < 2 || height_cells < 2 {
            return Err(Error::Parameter("grid needs at least 2x2 nodes".into()));
        }
        if !(cell_size > 0.0 && cell_size.is_finite()) {
            return Err(Error::Parameter(format!("cell_size must be positive, got {cell_size}")));
        }
        if heights.len() != width_cells * height_cells {
            return Err(Error::Parameter(format!(
                "expected {} heights, got {}",
                width_cells * height_cells,
                heights.len()
            )));
        }
        if heights.iter().any(|h| !h.is_finite()) {
            return Err(Error::Parameter("heights must be finite".into()));
        }
        Ok(TerrainGrid {
            width_cells,
            height_cells,
            cell_size,
            texture_class: vec![TextureClass::Moss; heights.len()],
            heights,
            seed,
        })
    }

    /// Constant-height grid covering `size_m` x `size_m`.
    pub fn flat(size_m: f64, cell_size: f64, height: f64) -> Result<Self> {
        let n = node_count(size_m, cell_size);
        Self::from_heights(n, n, cell_size, vec![height; n * n], 0)
    }

    #[inline]
    pub fn extent_x(&self) -> f64 {
        (self.width_cells - 1) as f64 * self.cell_size
    }

    #[inline]
    pub fn extent_y(&self) -> f64 {
        (self.height_cells - 1) as f64 * self.cell_size
    }

    pub fn area_m2(&self) -> f64 {
        self.extent_x() * self.extent_y()
    }

    #[inline]
    pub fn node_height(&self, i: usize, j: usize) -> f64 {
        self.heights[j * self.width_cells + i]
    }

    #[inline]
    pub fn node_texture(&self, i: usize, j: usize) -> TextureClass {
        self.texture_class[j * self.width_cells + i]
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        (0.0..=self.extent_x()).contains(&x) && (0.0..=self.extent_y()).contains(&y)
    }

    /// Bilinear interpolation of the four nodes around `(x, y)`.
    pub fn sample_height(&self, x: f64, y: f64) -> Result<f64> {
        if !self.contains(x, y) {
            return Err(Error::Domain(format!(
                "({x}, {y}) outside terrain extent {}x{}",
                self.extent_x(),
                self.extent_y()
            )));
        }
        let (i, fx) = lattice_coord(x / self.cell_size, self.width_cells);
        let (j, fy) = lattice_coord(y / self.cell_size, self.height_cells);
        let h00 = self.node_height(i, j);
        let h10 = self.node_height(i + 1, j);
        let h01 = self.node_height(i, j + 1);
        let h11 = self.node_height(i + 1, j + 1);
        Ok((1.0 - fy) * ((1.0 - fx) * h00 + fx * h10) + fy * ((1.0 - fx) * h01 + fx * h11))
    }

    /// Slope angle from central differences with step `cell_size`.
    pub fn slope_at(&self, x: f64, y: f64) -> Result<f64> {
        let c = self.cell_size;
        if !(x - c >= 0.0 && x + c <= self.extent_x() && y - c >= 0.0 && y + c <= self.extent_y())
        {
            return Err(Error::Domain(format!(
                "slope query ({x}, {y}) within one cell of the boundary"
            )));
        }
        let gx = (self.sample_height(x + c, y)? - self.sample_height(x - c, y)?) / (2.0 * c);
        let gy = (self.sample_height(x, y + c)? - self.sample_height(x, y - c)?) / (2.0 * c);
        Ok(gx.hypot(gy).atan())
    }

    /// Slope at a lattice node; boundary nodes take the slope of the nearest
    /// interior node.
    pub fn node_slope(&self, i: usize, j: usize) -> f64 {
        if self.width_cells < 3 || self.height_cells < 3 {
            return 0.0;
        }
        let i = i.clamp(1, self.width_cells - 2);
        let j = j.clamp(1, self.height_cells - 2);
        let c = self.cell_size;
        let gx = (self.node_height(i + 1, j) - self.node_height(i - 1, j)) / (2.0 * c);
        let gy = (self.node_height(i, j + 1) - self.node_height(i, j - 1)) / (2.0 * c);
        gx.hypot(gy).atan()
    }

    /// Upward unit normal at a node from central differences.
    pub fn node_normal(&self, i: usize, j: usize) -> [f64; 3] {
        let c = self.cell_size;
        let il = i.saturating_sub(1);
        let ir = (i + 1).min(self.width_cells - 1);
        let jd = j.saturating_sub(1);
        let ju = (j + 1).min(self.height_cells - 1);
        let gx = (self.node_height(ir, j) - self.node_height(il, j)) / ((ir - il) as f64 * c);
        let gy = (self.node_height(i, ju) - self.node_height(i, jd)) / ((ju - jd) as f64 * c);
        let len = (gx * gx + gy * gy + 1.0).sqrt();
        [-gx / len, -gy / len, 1.0 / len]
    }

    pub fn height_range(&self) -> (f64, f64) {
        self.heights
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &h| (lo.min(h), hi.max(h)))
    }

    /// Nearest-rank percentile of node heights, `p` in `[0, 1]`.
    pub fn height_percentile(&self, p: f64) -> f64 {
        let mut sorted = self.heights.clone();
        sorted.sort_by(f64::total_cmp);
        let rank = ((p.clamp(0.0, 1.0) * sorted.len() as f64).ceil() as usize).max(1);
        sorted[rank - 1]
    }

    /// 16-bit grayscale dump of the heights, north-up, min..max stretched to 0..65535.
    pub fn heightmap_png16(&self) -> ImageBuffer<Luma<u16>, Vec<u16>> {
        let (lo, hi) = self.height_range();
        let span = hi - lo;
        let (w, h) = (self.width_cells as u32, self.height_cells as u32);
        ImageBuffer::from_fn(w, h, |px, py| {
            let j = self.height_cells - 1 - py as usize;
            let v = if span > 0.0 {
                ((self.node_height(px as usize, j) - lo) / span * 65535.0).round()
            } else {
                0.0
            };
            Luma([v as u16])
        })
    }
}

fn node_count(size_m: f64, cell_size: f64) -> usize {
    (size_m / cell_size - 1e-9).ceil().max(1.0) as usize + 1
}

/// Splits a continuous lattice coordinate into a cell index and fraction.
/// Coordinates within 1e-9 of a node snap onto it so node queries are exact.
#[inline]
fn lattice_coord(t: f64, nodes: usize) -> (usize, f64) {
    let snapped = if (t - t.round()).abs() < 1e-9 { t.round() } else { t };
    let i = (snapped.floor().max(0.0) as usize).min(nodes - 2);
    (i, snapped - i as f64)
}

#[inline]
fn lattice_value(seed: u64, octave: u32, ix: i64, iy: i64) -> f64 {
    unit_f64(hash_keys(seed, &[octave as i64, ix, iy])) * 2.0 - 1.0
}

#[inline]
fn smoothstep(t: f64) -> f64 {
    t * t * (3.0 - 2.0 * t)
}

/// One octave of value noise in `[-1, 1]`.
fn value_noise(seed: u64, octave: u32, x: f64, y: f64) -> f64 {
    let (x0, y0) = (x.floor(), y.floor());
    let (ix, iy) = (x0 as i64, y0 as i64);
    let (sx, sy) = (smoothstep(x - x0), smoothstep(y - y0));
    let v00 = lattice_value(seed, octave, ix, iy);
    let v10 = lattice_value(seed, octave, ix + 1, iy);
    let v01 = lattice_value(seed, octave, ix, iy + 1);
    let v11 = lattice_value(seed, octave, ix + 1, iy + 1);
    let a = v00 + (v10 - v00) * sx;
    let b = v01 + (v11 - v01) * sx;
    a + (b - a) * sy
}

/// Fractal value noise normalised to `[-1, 1]`: each octave doubles the
/// frequency and halves the weight.
pub fn fractal_noise(seed: u64, x: f64, y: f64, octaves: u32, base_frequency: f64) -> f64 {
    let mut sum = 0.0;
    let mut norm = 0.0;
    let mut freq = base_frequency;
    let mut weight = 1.0;
    for octave in 0..octaves {
        sum += weight * value_noise(seed, octave, x * freq, y * freq);
        norm += weight;
        freq *= 2.0;
        weight *= 0.5;
    }
    sum / norm
}

pub fn generate_heightmap(seed: u64, params: &HeightmapParams) -> Result<TerrainGrid> {
    params.validate()?;
    let n = node_count(params.size_m, params.cell_size);
    let mut heights = Vec::with_capacity(n * n);
    for j in 0..n {
        let y = j as f64 * params.cell_size;
        for i in 0..n {
            let x = i as f64 * params.cell_size;
            let h = params.amplitude
                * fractal_noise(seed, x, y, params.octaves, params.base_frequency);
            // normalises -0.0
            heights.push(h + 0.0);
        }
    }
    let grid = TerrainGrid::from_heights(n, n, params.cell_size, heights, seed)?;
    let rules = TextureRules::default_for(&grid);
    Ok(assign_textures(grid, &rules))
}

pub fn assign_textures(mut grid: TerrainGrid, rules: &TextureRules) -> TerrainGrid {
    for j in 0..grid.height_cells {
        for i in 0..grid.width_cells {
            let idx = j * grid.width_cells + i;
            grid.texture_class[idx] = if grid.heights[idx] < rules.mud_below {
                TextureClass::Mud
            } else if grid.node_slope(i, j) >= rules.roots_slope_above {
                TextureClass::Roots
            } else {
                TextureClass::Moss
            };
        }
    }
    grid
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(size: f64, cell: f64, amplitude: f64) -> HeightmapParams {
        HeightmapParams {
            size_m: size,
            cell_size: cell,
            amplitude,
            octaves: 4,
            base_frequency: 1.0 / 16.0,
        }
    }

    fn plane(slope: f64, offset: f64) -> TerrainGrid {
        let n = 21;
        let heights = (0..n * n)
            .map(|k| offset + slope * (k % n) as f64 * 0.5)
            .collect();
        TerrainGrid::from_heights(n, n, 0.5, heights, 0).unwrap()
    }

    #[test]
    fn zero_amplitude_is_flat() {
        let g = generate_heightmap(3, &params(32.0, 1.0, 0.0)).unwrap();
        assert!(g.heights.iter().all(|&h| h == 0.0 && h.is_sign_positive()));
        assert!(g.texture_class.iter().all(|&t| t == TextureClass::Moss));
    }

    #[test]
    fn deterministic() {
        let a = generate_heightmap(11, &params(32.0, 0.5, 4.0)).unwrap();
        let b = generate_heightmap(11, &params(32.0, 0.5, 4.0)).unwrap();
        let bits = |g: &TerrainGrid| g.heights.iter().map(|h| h.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
        assert_eq!(a.texture_class, b.texture_class);
        let c = generate_heightmap(12, &params(32.0, 0.5, 4.0)).unwrap();
        assert_ne!(bits(&a), bits(&c));
    }

    #[test]
    fn height_span_bounded_by_twice_amplitude() {
        let g = generate_heightmap(1, &params(64.0, 1.0, 5.0)).unwrap();
        assert_eq!(g.width_cells, 65);
        let (lo, hi) = g.height_range();
        assert!(hi - lo <= 10.0, "span {}", hi - lo);
        assert!(hi - lo > 0.5);
        assert!(g.heights.iter().all(|h| h.abs() <= 5.0));
    }

    #[test]
    fn invalid_params_rejected() {
        for p in [params(0.0, 1.0, 1.0), params(10.0, 0.0, 1.0), params(10.0, -1.0, 1.0)] {
            assert!(matches!(generate_heightmap(1, &p), Err(Error::Parameter(_))));
        }
        let mut p = params(10.0, 1.0, 1.0);
        p.octaves = 0;
        assert!(matches!(generate_heightmap(1, &p), Err(Error::Parameter(_))));
    }

    #[test]
    fn node_queries_are_exact() {
        let g = generate_heightmap(5, &params(16.0, 0.1, 3.0)).unwrap();
        for j in (0..g.height_cells).step_by(7) {
            for i in (0..g.width_cells).step_by(5) {
                let h = g.sample_height(i as f64 * 0.1, j as f64 * 0.1).unwrap();
                assert_eq!(h.to_bits(), g.node_height(i, j).to_bits(), "node ({i},{j})");
            }
        }
    }

    #[test]
    fn midpoint_interpolation() {
        let mut heights = vec![0.0; 9];
        heights[0] = 2.0;
        heights[1] = 4.0;
        let g = TerrainGrid::from_heights(3, 3, 1.0, heights, 0).unwrap();
        assert_eq!(g.sample_height(0.5, 0.0).unwrap(), 3.0);
    }

    #[test]
    fn out_of_extent_is_domain_error() {
        let g = TerrainGrid::flat(10.0, 1.0, 0.0).unwrap();
        assert!(matches!(g.sample_height(-0.1, 1.0), Err(Error::Domain(_))));
        assert!(matches!(g.sample_height(1.0, 10.01), Err(Error::Domain(_))));
        assert!(matches!(g.slope_at(0.5, 5.0), Err(Error::Domain(_))));
        assert!(g.slope_at(1.0, 9.0).is_ok());
    }

    #[test]
    fn plane_slope() {
        let g = plane(0.5, 0.0);
        for &(x, y) in &[(2.0, 3.0), (4.3, 7.7), (1.0, 1.0)] {
            let s = g.slope_at(x, y).unwrap();
            assert!((s - 0.5f64.atan()).abs() < 1e-9, "{s}");
        }
    }

    #[test]
    fn slope_ignores_constant_offset() {
        let a = generate_heightmap(9, &params(16.0, 0.5, 3.0)).unwrap();
        let mut b = a.clone();
        b.heights.iter_mut().for_each(|h| *h += 17.0);
        for &(x, y) in &[(3.0, 3.0), (8.25, 5.5), (12.1, 9.9)] {
            let (sa, sb) = (a.slope_at(x, y).unwrap(), b.slope_at(x, y).unwrap());
            assert!((sa - sb).abs() < 1e-9);
        }
    }

    #[test]
    fn flat_slope_zero() {
        let g = generate_heightmap(2, &params(16.0, 0.5, 0.0)).unwrap();
        assert_eq!(g.slope_at(5.0, 5.0).unwrap(), 0.0);
    }

    #[test]
    fn textures_on_flat_grids() {
        let g = TerrainGrid::flat(10.0, 1.0, 2.0).unwrap();
        let rules = TextureRules {
            mud_below: 1.0,
            roots_slope_above: 0.35,
        };
        let moss = assign_textures(g.clone(), &rules);
        assert!(moss.texture_class.iter().all(|&t| t == TextureClass::Moss));
        let rules = TextureRules {
            mud_below: 3.0,
            roots_slope_above: 0.35,
        };
        let mud = assign_textures(g, &rules);
        assert!(mud.texture_class.iter().all(|&t| t == TextureClass::Mud));
    }

    #[test]
    fn heightmap_png_dimensions() {
        let g = generate_heightmap(2, &params(8.0, 1.0, 2.0)).unwrap();
        let img = g.heightmap_png16();
        assert_eq!(img.dimensions(), (9, 9));
        assert!(img.pixels().any(|p| p.0[0] == 65535));
        assert!(img.pixels().any(|p| p.0[0] == 0));
    }
}
