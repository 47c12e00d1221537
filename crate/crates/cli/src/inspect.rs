use std::path::Path;

use anyhow::{anyhow, Context, Result};
use image::{Rgb, RgbImage};
use sylvangen_core::annotate::{rle_decode, Annotation};
use sylvangen_core::dataset::{tree_category, CocoDocument};

/// Marker colors in canonical keypoint order.
const KEYPOINT_COLORS: [[u8; 3]; 5] = [
    [255, 0, 0],
    [0, 255, 255],
    [255, 0, 255],
    [255, 255, 0],
    [0, 0, 255],
];
const SKELETON_COLOR: [u8; 3] = [255, 255, 255];

/// Box color of the `k`-th annotation of an image; distinct per index.
pub fn annotation_color(k: usize) -> Rgb<u8> {
    let hue = (k as f64 * 0.618_033_988_749_895).fract() * 6.0;
    let x = 1.0 - (hue % 2.0 - 1.0).abs();
    let (r, g, b) = match hue as u32 {
        0 => (1.0, x, 0.0),
        1 => (x, 1.0, 0.0),
        2 => (0.0, 1.0, x),
        3 => (0.0, x, 1.0),
        4 => (x, 0.0, 1.0),
        _ => (1.0, 0.0, x),
    };
    // the low bits carry the index so colors never collide
    let tag = (k & 0x3f) as u8;
    Rgb([
        ((r * 192.0) as u8 & 0xfc) | (tag >> 4 & 3),
        ((g * 192.0) as u8 & 0xfc) | (tag >> 2 & 3),
        ((b * 192.0) as u8 & 0xfc) | (tag & 3),
    ])
}

fn put(img: &mut RgbImage, x: i64, y: i64, c: Rgb<u8>) {
    if x >= 0 && y >= 0 && (x as u32) < img.width() && (y as u32) < img.height() {
        img.put_pixel(x as u32, y as u32, c);
    }
}

fn line(img: &mut RgbImage, (x0, y0): (i64, i64), (x1, y1): (i64, i64), c: Rgb<u8>) {
    let (dx, dy) = ((x1 - x0).abs(), -(y1 - y0).abs());
    let (sx, sy) = ((x1 - x0).signum(), (y1 - y0).signum());
    let (mut x, mut y, mut err) = (x0, y0, dx + dy);
    loop {
        put(img, x, y, c);
        if x == x1 && y == y1 {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
    }
}

/// Draws mask contours, box outlines, skeleton edges and keypoints. Each
/// labeled keypoint's own pixel gets its marker color.
pub fn draw_overlay(img: &mut RgbImage, annotations: &[&Annotation]) -> Result<()> {
    let (w, h) = (img.width() as usize, img.height() as usize);
    for (k, a) in annotations.iter().enumerate() {
        let mask = rle_decode(&a.segmentation)?;
        if a.segmentation.size != [h as u32, w as u32] {
            return Err(anyhow!("annotation {} mask size differs from image", a.annotation_id));
        }
        let c = annotation_color(k);
        let inside = |x: i64, y: i64| x >= 0 && y >= 0 && (x as usize) < w && (y as usize) < h && mask[y as usize * w + x as usize];
        for y in 0..h as i64 {
            for x in 0..w as i64 {
                if inside(x, y) && !(inside(x - 1, y) && inside(x + 1, y) && inside(x, y - 1) && inside(x, y + 1)) {
                    let p = img.get_pixel_mut(x as u32, y as u32);
                    for ch in 0..3 {
                        p.0[ch] = ((p.0[ch] as u16 + c.0[ch] as u16) / 2) as u8;
                    }
                }
            }
        }
    }
    for (k, a) in annotations.iter().enumerate() {
        let c = annotation_color(k);
        let [x, y, bw, bh] = a.bbox.map(|v| v.round() as i64);
        if bw <= 0 || bh <= 0 {
            continue;
        }
        let (x1, y1) = (x + bw - 1, y + bh - 1);
        line(img, (x, y), (x1, y), c);
        line(img, (x, y1), (x1, y1), c);
        line(img, (x, y), (x, y1), c);
        line(img, (x1, y), (x1, y1), c);
    }
    let skeleton = tree_category().skeleton;
    for a in annotations {
        let kp = &a.keypoints.0;
        for [i, j] in &skeleton {
            let (p, q) = (kp[*i as usize - 1], kp[*j as usize - 1]);
            if p.v > 0 && q.v > 0 {
                line(img, (p.x as i64, p.y as i64), (q.x as i64, q.y as i64), Rgb(SKELETON_COLOR));
            }
        }
    }
    for a in annotations {
        for (p, color) in a.keypoints.0.iter().zip(KEYPOINT_COLORS) {
            if p.v == 0 {
                continue;
            }
            let (x, y) = (p.x.floor() as i64, p.y.floor() as i64);
            let c = Rgb(color);
            for (ox, oy) in [(0, 0), (-1, 0), (1, 0), (0, -1), (0, 1)] {
                put(img, x + ox, y + oy, c);
            }
        }
    }
    Ok(())
}

/// Writes the overlay for `image_id` to `out` and returns how many
/// annotations were drawn.
pub fn inspect(doc: &CocoDocument, root: &Path, image_id: u64, out: &Path) -> Result<usize> {
    let info = doc
        .image(image_id)
        .ok_or_else(|| anyhow!("image id {image_id} not in annotation file"))?;
    let path = root.join(&info.file_name);
    let mut img = image::open(&path)
        .with_context(|| format!("reading {}", path.display()))?
        .to_rgb8();
    let anns: Vec<&Annotation> = doc.annotations_for(image_id).collect();
    draw_overlay(&mut img, &anns)?;
    img.save(out).with_context(|| format!("writing {}", out.display()))?;
    Ok(anns.len())
}

#[cfg(test)]
mod tests {
    use std::collections::HashSet;

    use super::*;
    use sylvangen_core::annotate::{rle_from_fn, Keypoint, Keypoints};

    fn ann(id: u64, x: usize, y: usize) -> Annotation {
        let rle = rle_from_fn(32, 32, |r, c| (y..y + 10).contains(&r) && (x..x + 4).contains(&c));
        let mut kps = Keypoints::default();
        kps.0[0] = Keypoint { x: x as f64 + 2.5, y: y as f64 + 9.5, v: 2 };
        kps.0[4] = Keypoint { x: x as f64 + 2.5, y: y as f64 + 0.5, v: 1 };
        Annotation {
            annotation_id: id,
            image_id: 1,
            category_id: 1,
            instance_id: id as u32,
            bbox: [x as f64, y as f64, 4.0, 10.0],
            area: 40,
            segmentation: rle,
            iscrowd: 0,
            keypoints: kps,
            num_keypoints: 2,
            distance_m: 4.0,
        }
    }

    #[test]
    fn colors_are_distinct() {
        let colors: HashSet<_> = (0..64).map(annotation_color).collect();
        assert_eq!(colors.len(), 64);
    }

    #[test]
    fn no_annotations_leaves_image_unchanged() {
        let mut img = RgbImage::from_pixel(8, 8, Rgb([10, 20, 30]));
        let before = img.clone();
        draw_overlay(&mut img, &[]).unwrap();
        assert_eq!(img, before);
    }

    #[test]
    fn boxes_and_keypoints_land_where_expected() {
        let anns = [ann(1, 2, 3), ann(2, 20, 15)];
        let refs: Vec<&Annotation> = anns.iter().collect();
        let mut img = RgbImage::from_pixel(32, 32, Rgb([0, 0, 0]));
        draw_overlay(&mut img, &refs).unwrap();
        for (k, a) in anns.iter().enumerate() {
            let c = annotation_color(k);
            let [x, y, w, h] = a.bbox.map(|v| v as u32);
            assert_eq!(*img.get_pixel(x, y), c);
            assert_eq!(*img.get_pixel(x, y + h / 2), c);
            assert_eq!(*img.get_pixel(x + w - 1, y + h / 2), c);
            assert_eq!(*img.get_pixel(x, y + h - 1), c);
            let top = a.keypoints.0[4];
            assert_eq!(*img.get_pixel(top.x as u32, top.y as u32), Rgb(KEYPOINT_COLORS[4]));
        }
        let box_colors: HashSet<_> = img.pixels().filter(|p| (0..2).any(|k| **p == annotation_color(k))).collect();
        assert_eq!(box_colors.len(), 2);
    }
}
