//! Layered synthetic stereo scenes with exact ground truth.
//!
//! A scene is a stack of fronto-parallel rectangles, each with an integer
//! disparity and a texture attached to the surface. The layer with the
//! largest disparity is in front. Rectangles are given in left-image
//! coordinates and may extend past the image so the right view stays covered.

use crate::types::{DisparityMap, ImageBuffer};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Texture {
    Constant(u8),
    /// Independent uniform levels in `[lo, hi]` per surface pixel.
    Random { seed: u64, lo: u8, hi: u8 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Layer {
    pub x0: i64,
    pub y0: i64,
    pub x1: i64,
    pub y1: i64,
    pub disparity: u32,
    pub texture: Texture,
}

impl Layer {
    fn covers(&self, u: i64, y: i64) -> bool {
        u >= self.x0 && u < self.x1 && y >= self.y0 && y < self.y1
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn hash3(seed: u64, a: i64, b: i64) -> u64 {
    splitmix(splitmix(seed ^ splitmix(a as u64)) ^ b as u64)
}

impl Texture {
    fn sample(&self, u: i64, y: i64) -> u8 {
        match *self {
            Texture::Constant(v) => v,
            Texture::Random { seed, lo, hi } => {
                let span = hi as u64 - lo as u64 + 1;
                (lo as u64 + hash3(seed, u, y) % span) as u8
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct Scene {
    pub left: ImageBuffer,
    pub right: ImageBuffer,
    pub gt_left: DisparityMap,
    pub gt_right: DisparityMap,
}

impl Scene {
    /// Left pixels whose correspondence is covered by a nearer surface in the
    /// right view (left-right inconsistency of the ground truth). Pixels that
    /// map outside the right image are not counted as occluded.
    pub fn occlusion_mask(&self) -> Vec<bool> {
        occlusion_from_gt(&self.gt_left, &self.gt_right)
    }
}

/// Ground-truth occlusion by left-right consistency of two dense maps.
pub fn occlusion_from_gt(gt_left: &DisparityMap, gt_right: &DisparityMap) -> Vec<bool> {
    let (w, h) = (gt_left.width(), gt_left.height());
    let mut out = vec![false; w * h];
    for y in 0..h {
        for x in 0..w {
            let Some(dl) = gt_left.get(x, y) else { continue };
            let xr = x as i64 - dl.round() as i64;
            if xr < 0 {
                continue;
            }
            if let Some(dr) = gt_right.get(xr as usize, y) {
                out[y * w + x] = dr > dl + 0.5;
            }
        }
    }
    out
}

/// Additive per-pixel noise in `[-amp, amp]`, independent for each view.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Noise {
    pub seed: u64,
    pub amplitude: u8,
}

/// Renders both views and both ground-truth maps. Pixels not covered by any
/// layer are black with disparity 0.
pub fn render(width: usize, height: usize, layers: &[Layer], noise: Option<Noise>) -> Scene {
    let top = |u_of: &dyn Fn(u32) -> i64, y: i64| -> Option<(&Layer, i64)> {
        layers
            .iter()
            .filter(|l| l.covers(u_of(l.disparity), y))
            .max_by_key(|l| l.disparity)
            .map(|l| (l, u_of(l.disparity)))
    };
    let perturb = |v: u8, view: u64, x: usize, y: usize| -> u8 {
        match noise {
            None => v,
            Some(n) if n.amplitude == 0 => v,
            Some(n) => {
                let span = 2 * n.amplitude as i64 + 1;
                let delta = (hash3(n.seed ^ view.wrapping_mul(0x51_7CC1), x as i64, y as i64) % span as u64) as i64
                    - n.amplitude as i64;
                (v as i64 + delta).clamp(0, 255) as u8
            }
        }
    };

    let mut left = ImageBuffer::new(width, height, 1).expect("gray");
    let mut right = ImageBuffer::new(width, height, 1).expect("gray");
    let mut gt_left = DisparityMap::new_invalid(width, height);
    let mut gt_right = DisparityMap::new_invalid(width, height);
    for y in 0..height {
        let yi = y as i64;
        for x in 0..width {
            let xi = x as i64;
            let (vl, dl) = match top(&|_| xi, yi) {
                Some((l, u)) => (l.texture.sample(u, yi), l.disparity),
                None => (0, 0),
            };
            left.set(x, y, 0, perturb(vl, 1, x, y));
            gt_left.set(x, y, dl as f32);

            let (vr, dr) = match top(&|d| xi + d as i64, yi) {
                Some((l, u)) => (l.texture.sample(u, yi), l.disparity),
                None => (0, 0),
            };
            right.set(x, y, 0, perturb(vr, 2, x, y));
            gt_right.set(x, y, dr as f32);
        }
    }
    Scene {
        left,
        right,
        gt_left,
        gt_right,
    }
}

/// Full-frame random-dot pair with one constant disparity.
pub fn random_dot_stereogram(width: usize, height: usize, disparity: u32, seed: u64) -> Scene {
    render(
        width,
        height,
        &[Layer {
            x0: 0,
            y0: 0,
            x1: (width + disparity as usize) as i64,
            y1: height as i64,
            disparity,
            texture: Texture::Random { seed, lo: 0, hi: 255 },
        }],
        None,
    )
}

/// Two uniformly colored planes: a background and a centered foreground box.
pub fn textureless_two_plane(width: usize, height: usize) -> Scene {
    let (w, h) = (width as i64, height as i64);
    render(
        width,
        height,
        &[
            Layer {
                x0: 0,
                y0: 0,
                x1: w + 64,
                y1: h,
                disparity: 12,
                texture: Texture::Constant(100),
            },
            Layer {
                x0: w * 3 / 8,
                y0: h / 4,
                x1: w * 3 / 4,
                y1: h * 3 / 4,
                disparity: 36,
                texture: Texture::Constant(150),
            },
        ],
        None,
    )
}

/// Textured background with two textured boxes at distinct depths.
pub fn two_rectangles(width: usize, height: usize, seed: u64) -> Scene {
    let (w, h) = (width as i64, height as i64);
    render(
        width,
        height,
        &[
            Layer {
                x0: 0,
                y0: 0,
                x1: w + 64,
                y1: h,
                disparity: 8,
                texture: Texture::Random { seed, lo: 0, hi: 255 },
            },
            Layer {
                x0: w / 8,
                y0: h / 6,
                x1: w * 3 / 8,
                y1: h * 2 / 3,
                disparity: 24,
                texture: Texture::Random { seed: seed + 1, lo: 0, hi: 255 },
            },
            Layer {
                x0: w / 2,
                y0: h / 3,
                x1: w * 7 / 8,
                y1: h * 5 / 6,
                disparity: 44,
                texture: Texture::Random { seed: seed + 2, lo: 0, hi: 255 },
            },
        ],
        None,
    )
}

/// Low-contrast textured planes with sensor noise: matching costs are never
/// flat, but weak enough that the matcher makes sizeable errors.
pub fn weak_texture_scene(width: usize, height: usize, seed: u64) -> Scene {
    let (w, h) = (width as i64, height as i64);
    let weak = |seed: u64, base: u8| Texture::Random { seed, lo: base, hi: base + 40 };
    render(
        width,
        height,
        &[
            Layer { x0: 0, y0: 0, x1: w + 64, y1: h, disparity: 12, texture: weak(seed, 80) },
            Layer {
                x0: w / 8,
                y0: h / 6,
                x1: w * 3 / 8,
                y1: h * 2 / 3,
                disparity: 30,
                texture: weak(seed + 10, 100),
            },
            Layer {
                x0: w / 2,
                y0: h / 3,
                x1: w * 7 / 8,
                y1: h * 5 / 6,
                disparity: 48,
                texture: weak(seed + 20, 120),
            },
        ],
        Some(Noise { seed: seed + 99, amplitude: 6 }),
    )
}
