/// Default far clip for depth encoding, meters.
pub const DEFAULT_D_MAX: f64 = 30.0;

/// 8-bit gray depth: `round(255 * (1 - clamp(d / d_max, 0, 1)))`, near bright,
/// sky black. Rounding is half away from zero.
pub fn encode_depth(depth_m: &[f64], d_max: f64) -> Vec<u8> {
    assert!(d_max > 0.0, "d_max must be positive");
    depth_m
        .iter()
        .map(|&d| {
            if d.is_nan() {
                return 0;
            }
            (255.0 * (1.0 - (d / d_max).clamp(0.0, 1.0))).round() as u8
        })
        .collect()
}
