//! Post-pass weather effects: distance fog and precipitation overlays.

use rand::Rng;

use super::conditions::{Conditions, Lighting, Weather};
use crate::seed::{self, derive_seed};

/// Fog blend factor `1 - exp(-density * depth)`; 0 for sky.
#[inline]
pub fn fog_factor(fog_density: f64, depth_m: f64) -> f64 {
    if !depth_m.is_finite() || fog_density <= 0.0 {
        return 0.0;
    }
    if fog_density.is_infinite() {
        return 1.0;
    }
    1.0 - (-fog_density * depth_m).exp()
}

#[inline]
fn blend(c: u8, target: u8, t: f64) -> u8 {
    let c = c as f64;
    (c + (target as f64 - c) * t).round().clamp(0.0, 255.0) as u8
}

/// Applies fog, then rain streaks or snowflakes seeded by `frame_seed`.
/// Returns the input unchanged when there is no fog and no precipitation.
pub fn apply_weather(
    rgb: &[u8],
    depth_m: &[f64],
    width: usize,
    conditions: &Conditions,
    frame_seed: u64,
) -> Vec<u8> {
    assert_eq!(rgb.len(), depth_m.len() * 3, "rgb/depth size mismatch");
    let mut out = rgb.to_vec();
    let fog = Lighting::preset(conditions.time_of_day).fog_color_u8();
    if conditions.fog_density > 0.0 {
        for (px, &d) in out.chunks_exact_mut(3).zip(depth_m) {
            let t = fog_factor(conditions.fog_density, d);
            if t > 0.0 {
                for k in 0..3 {
                    px[k] = blend(px[k], fog[k], t);
                }
            }
        }
    }
    let height = depth_m.len().checked_div(width).unwrap_or(0);
    let intensity = conditions.precipitation_intensity.clamp(0.0, 1.0);
    if intensity > 0.0 && width > 0 && height > 0 {
        let mut rng = seed::rng(derive_seed(frame_seed, 0x5EA7));
        let area = (width * height) as f64;
        let scale = height as f64 / 800.0;
        match conditions.weather {
            Weather::Rain => {
                let count = (intensity * area / 500.0).round() as usize;
                for _ in 0..count {
                    let x0 = rng.gen_range(0.0..width as f64);
                    let y0 = rng.gen_range(0.0..height as f64);
                    let len = rng.gen_range(6.0..18.0) * scale;
                    let steps = len.ceil().max(1.0) as usize;
                    for s in 0..steps {
                        let (x, y) = (x0 + 0.2 * s as f64, y0 + s as f64);
                        if x < width as f64 && y < height as f64 {
                            let p = (y as usize * width + x as usize) * 3;
                            for (k, c) in [200u8, 205, 215].into_iter().enumerate() {
                                out[p + k] = blend(out[p + k], c, 0.35);
                            }
                        }
                    }
                }
            }
            Weather::Snow => {
                let count = (intensity * area / 300.0).round() as usize;
                for _ in 0..count {
                    let cx = rng.gen_range(0..width) as i64;
                    let cy = rng.gen_range(0..height) as i64;
                    let r: i64 = if rng.gen_bool(0.3) { 1 } else { 0 };
                    for dy in -r..=r {
                        for dx in -r..=r {
                            let (x, y) = (cx + dx, cy + dy);
                            if x >= 0 && y >= 0 && (x as usize) < width && (y as usize) < height {
                                let p = (y as usize * width + x as usize) * 3;
                                for (k, c) in [245u8, 245, 250].into_iter().enumerate() {
                                    out[p + k] = blend(out[p + k], c, 0.85);
                                }
                            }
                        }
                    }
                }
            }
            Weather::Clear | Weather::Fog => {}
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::render::conditions::TimeOfDay;

    fn buffers() -> (Vec<u8>, Vec<f64>) {
        let rgb: Vec<u8> = (0..16 * 16 * 3).map(|k| (k * 37 % 256) as u8).collect();
        let mut depth: Vec<f64> = (0..256).map(|k| 0.5 + k as f64 * 0.3).collect();
        depth[7] = f64::INFINITY;
        (rgb, depth)
    }

    #[test]
    fn identity_without_weather() {
        let (rgb, depth) = buffers();
        let c = Conditions::clear(TimeOfDay::Daylight);
        assert_eq!(apply_weather(&rgb, &depth, 16, &c, 3), rgb);
    }

    #[test]
    fn infinite_fog_saturates_finite_depths() {
        let (rgb, depth) = buffers();
        let mut c = Conditions::clear(TimeOfDay::Evening);
        c.weather = Weather::Fog;
        c.fog_density = f64::INFINITY;
        let out = apply_weather(&rgb, &depth, 16, &c, 3);
        let fog = Lighting::preset(TimeOfDay::Evening).fog_color_u8();
        for (k, px) in out.chunks_exact(3).enumerate() {
            if k == 7 {
                assert_eq!(px, &rgb[21..24]);
            } else {
                assert_eq!(px, &fog);
            }
        }
    }

    #[test]
    fn fog_factor_value() {
        let t = fog_factor(0.05, 10.0);
        assert!((t - (1.0 - (-0.5f64).exp())).abs() < 1e-15);
        assert!((t - 0.3935).abs() < 1e-4);
        assert_eq!(fog_factor(0.05, f64::INFINITY), 0.0);
    }

    #[test]
    fn precipitation_is_seeded() {
        let (rgb, depth) = buffers();
        let mut c = Conditions::clear(TimeOfDay::Morning);
        c.weather = Weather::Snow;
        c.precipitation_intensity = 1.0;
        let a = apply_weather(&rgb, &depth, 16, &c, 11);
        assert_ne!(a, rgb);
        assert_eq!(a, apply_weather(&rgb, &depth, 16, &c, 11));
        assert_ne!(a, apply_weather(&rgb, &depth, 16, &c, 12));
    }
}
