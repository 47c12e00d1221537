//! Half-space triangle rasterization with a top-left fill rule.

/// Screen-space vertex. `q` must be affine in screen space (1/z for
/// perspective views, depth itself for orthographic ones).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScreenVertex {
    pub x: f64,
    pub y: f64,
    pub q: f64,
}

#[inline]
fn edge(a: ScreenVertex, b: ScreenVertex, px: f64, py: f64) -> f64 {
    (b.x - a.x) * (py - a.y) - (b.y - a.y) * (px - a.x)
}

/// Edges owning their boundary pixels, for the winding produced in
/// [`rasterize`] (positive area, y down).
#[inline]
fn is_top_left(a: ScreenVertex, b: ScreenVertex) -> bool {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    (dy == 0.0 && dx > 0.0) || dy < 0.0
}

/// Calls `visit(x, y, q)` for every pixel whose center lies inside the
/// triangle, with `q` interpolated at the center. Pixels on an edge shared by
/// two triangles are visited exactly once.
pub fn rasterize(
    tri: [ScreenVertex; 3],
    width: usize,
    height: usize,
    mut visit: impl FnMut(usize, usize, f64),
) {
    let [v0, mut v1, mut v2] = tri;
    let mut area = edge(v0, v1, v2.x, v2.y);
    if area == 0.0 || !area.is_finite() {
        return;
    }
    if area < 0.0 {
        std::mem::swap(&mut v1, &mut v2);
        area = -area;
    }
    let min_x = v0.x.min(v1.x).min(v2.x);
    let max_x = v0.x.max(v1.x).max(v2.x);
    let min_y = v0.y.min(v1.y).min(v2.y);
    let max_y = v0.y.max(v1.y).max(v2.y);
    if max_x < 0.0 || max_y < 0.0 || min_x > width as f64 || min_y > height as f64 {
        return;
    }
    let x0 = (min_x - 0.5).ceil().max(0.0) as usize;
    let y0 = (min_y - 0.5).ceil().max(0.0) as usize;
    let x1 = ((max_x - 0.5).floor().min(width as f64 - 1.0)).max(-1.0);
    let y1 = ((max_y - 0.5).floor().min(height as f64 - 1.0)).max(-1.0);
    if x1 < 0.0 || y1 < 0.0 {
        return;
    }
    let (x1, y1) = (x1 as usize, y1 as usize);

    let tl0 = is_top_left(v1, v2);
    let tl1 = is_top_left(v2, v0);
    let tl2 = is_top_left(v0, v1);
    let inv_area = 1.0 / area;
    for y in y0..=y1 {
        let py = y as f64 + 0.5;
        for x in x0..=x1 {
            let px = x as f64 + 0.5;
            let w0 = edge(v1, v2, px, py);
            let w1 = edge(v2, v0, px, py);
            let w2 = edge(v0, v1, px, py);
            let inside = (w0 > 0.0 || (w0 == 0.0 && tl0))
                && (w1 > 0.0 || (w1 == 0.0 && tl1))
                && (w2 > 0.0 || (w2 == 0.0 && tl2));
            if inside {
                let q = (w0 * v0.q + w1 * v1.q + w2 * v2.q) * inv_area;
                visit(x, y, q);
            }
        }
    }
}
