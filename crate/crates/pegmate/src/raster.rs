//! Row-major raster buffers and the small set of image operations the
//! pipeline needs: crops, exact 90-degree rotations, arbitrary-angle rotation
//! onto a padded canvas, and binary erosion.
//!
//! Pixel coordinates are `(u, v)` with `v` increasing downward. Rotation
//! angles are given in the screen sense: positive angles rotate the displayed
//! content counter-clockwise as seen on screen.

use serde::{Deserialize, Serialize};

/// 8-bit grayscale image.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrayImage {
    pub width: u32,
    pub height: u32,
    pub data: Vec<u8>,
}

/// 16-bit depth image, values in millimeters, 0 = invalid.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DepthImage {
    pub width: u32,
    pub height: u32,
    pub data: Vec<u16>,
}

/// Inclusive-exclusive pixel rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PixelRect {
    pub x0: u32,
    pub y0: u32,
    pub x1: u32,
    pub y1: u32,
}

impl PixelRect {
    pub fn width(&self) -> u32 {
        self.x1 - self.x0
    }
    pub fn height(&self) -> u32 {
        self.y1 - self.y0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interp {
    Nearest,
    Bilinear,
}

/// Scanline fill at pixel centers with the even-odd rule; `set` is called
/// for every covered pixel inside the `width` x `height` canvas.
pub fn fill_polygon(pts: &[[f64; 2]], width: u32, height: u32, mut set: impl FnMut(u32, u32)) {
    if pts.len() < 3 {
        return;
    }
    let mut min_y = f64::INFINITY;
    let mut max_y = f64::NEG_INFINITY;
    for p in pts {
        min_y = min_y.min(p[1]);
        max_y = max_y.max(p[1]);
    }
    let v0 = (min_y - 0.5).floor().max(0.0) as i64;
    let v1 = (max_y + 0.5).ceil().min(height as f64) as i64;
    let n = pts.len();
    let mut crossings: Vec<f64> = Vec::with_capacity(8);
    for v in v0..v1 {
        let yc = v as f64 + 0.5;
        crossings.clear();
        for i in 0..n {
            let a = pts[i];
            let b = pts[(i + 1) % n];
            if (a[1] > yc) != (b[1] > yc) {
                crossings.push(a[0] + (yc - a[1]) / (b[1] - a[1]) * (b[0] - a[0]));
            }
        }
        crossings.sort_by(|a, b| a.total_cmp(b));
        for pair in crossings.chunks_exact(2) {
            let u0 = (pair[0] - 0.5).ceil().max(0.0) as i64;
            let u1 = (pair[1] - 0.5).floor().min(width as f64 - 1.0) as i64;
            for u in u0..=u1 {
                if (u as f64 + 0.5) < pair[1] {
                    set(u as u32, v as u32);
                }
            }
        }
    }
}

impl GrayImage {
    pub fn new(width: u32, height: u32, fill: u8) -> Self {
        Self {
            width,
            height,
            data: vec![fill; (width as usize) * (height as usize)],
        }
    }

    #[inline]
    pub fn get(&self, u: u32, v: u32) -> u8 {
        self.data[v as usize * self.width as usize + u as usize]
    }

    #[inline]
    pub fn set(&mut self, u: u32, v: u32, value: u8) {
        self.data[v as usize * self.width as usize + u as usize] = value;
    }

    /// Pixel coordinates (u, v) of all pixels with value >= 128.
    pub fn on_pixels(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::new();
        for v in 0..self.height {
            for u in 0..self.width {
                if self.get(u, v) >= 128 {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// Bounding box of on-pixels, or `None` for an empty mask.
    pub fn mask_bbox(&self) -> Option<PixelRect> {
        let mut r: Option<PixelRect> = None;
        for v in 0..self.height {
            for u in 0..self.width {
                if self.get(u, v) >= 128 {
                    r = Some(match r {
                        None => PixelRect {
                            x0: u,
                            y0: v,
                            x1: u + 1,
                            y1: v + 1,
                        },
                        Some(b) => PixelRect {
                            x0: b.x0.min(u),
                            y0: b.y0.min(v),
                            x1: b.x1.max(u + 1),
                            y1: b.y1.max(v + 1),
                        },
                    });
                }
            }
        }
        r
    }

    pub fn crop(&self, rect: PixelRect) -> GrayImage {
        let mut out = GrayImage::new(rect.width(), rect.height(), 0);
        for v in 0..rect.height() {
            for u in 0..rect.width() {
                out.set(u, v, self.get(rect.x0 + u, rect.y0 + v));
            }
        }
        out
    }

    /// Exact lossless rotation by `k * 90` degrees clockwise on screen
    /// (a pure pixel permutation; the canvas dimensions swap for odd `k`).
    pub fn rot90_screen_cw(&self, k: u32) -> GrayImage {
        let k = k % 4;
        match k {
            0 => self.clone(),
            1 => {
                // (u, v) -> (H-1-v, u)
                let mut out = GrayImage::new(self.height, self.width, 0);
                for v in 0..self.height {
                    for u in 0..self.width {
                        out.set(self.height - 1 - v, u, self.get(u, v));
                    }
                }
                out
            }
            2 => {
                let mut out = GrayImage::new(self.width, self.height, 0);
                for v in 0..self.height {
                    for u in 0..self.width {
                        out.set(self.width - 1 - u, self.height - 1 - v, self.get(u, v));
                    }
                }
                out
            }
            _ => {
                // (u, v) -> (v, W-1-u)
                let mut out = GrayImage::new(self.height, self.width, 0);
                for v in 0..self.height {
                    for u in 0..self.width {
                        out.set(v, self.width - 1 - u, self.get(u, v));
                    }
                }
                out
            }
        }
    }

    /// Rotates the content by `angle_deg` (screen counter-clockwise) about
    /// `center` (pixel coordinates), onto a canvas padded to the rotated
    /// bounding box so nothing clips. Out-of-source samples are zero.
    pub fn rotate_about(&self, center: (f64, f64), angle_deg: f64, interp: Interp) -> GrayImage {
        // Screen CCW on a v-down raster is a clockwise rotation of (u, v)
        // coordinates; fold the flip into the angle.
        let rad = -angle_deg.to_radians();
        let (c, s) = (rad.cos(), rad.sin());

        let (w, h) = (self.width as f64, self.height as f64);
        let corners = [[0.0, 0.0], [w, 0.0], [w, h], [0.0, h]];
        let mut min = [f64::INFINITY; 2];
        let mut max = [f64::NEG_INFINITY; 2];
        for [u, v] in corners {
            let (du, dv) = (u - center.0, v - center.1);
            let ru = c * du - s * dv + center.0;
            let rv = s * du + c * dv + center.1;
            min[0] = min[0].min(ru);
            min[1] = min[1].min(rv);
            max[0] = max[0].max(ru);
            max[1] = max[1].max(rv);
        }
        let out_w = (max[0] - min[0]).ceil() as u32;
        let out_h = (max[1] - min[1]).ceil() as u32;
        let mut out = GrayImage::new(out_w.max(1), out_h.max(1), 0);

        // Inverse map: output pixel center -> source coordinates.
        let (ic, is) = (c, -s);
        for ov in 0..out.height {
            for ou in 0..out.width {
                let gu = ou as f64 + 0.5 + min[0];
                let gv = ov as f64 + 0.5 + min[1];
                let (du, dv) = (gu - center.0, gv - center.1);
                let su = ic * du - is * dv + center.0 - 0.5;
                let sv = is * du + ic * dv + center.1 - 0.5;
                let value = match interp {
                    Interp::Nearest => {
                        let (ru, rv) = (su.round(), sv.round());
                        if ru < 0.0 || rv < 0.0 || ru >= w || rv >= h {
                            0
                        } else {
                            self.get(ru as u32, rv as u32)
                        }
                    }
                    Interp::Bilinear => {
                        let u0 = su.floor();
                        let v0 = sv.floor();
                        let fu = su - u0;
                        let fv = sv - v0;
                        let sample = |uu: f64, vv: f64| -> f64 {
                            if uu < 0.0 || vv < 0.0 || uu >= w || vv >= h {
                                0.0
                            } else {
                                self.get(uu as u32, vv as u32) as f64
                            }
                        };
                        let top = sample(u0, v0) * (1.0 - fu) + sample(u0 + 1.0, v0) * fu;
                        let bot =
                            sample(u0, v0 + 1.0) * (1.0 - fu) + sample(u0 + 1.0, v0 + 1.0) * fu;
                        (top * (1.0 - fv) + bot * fv).round().clamp(0.0, 255.0) as u8
                    }
                };
                out.set(ou, ov, value);
            }
        }
        out
    }

    /// Binary erosion with a square structuring element of the given radius.
    pub fn eroded(&self, radius_px: u32) -> GrayImage {
        if radius_px == 0 {
            return self.clone();
        }
        let r = radius_px as i64;
        let mut out = GrayImage::new(self.width, self.height, 0);
        for v in 0..self.height as i64 {
            for u in 0..self.width as i64 {
                let mut keep = self.get(u as u32, v as u32) >= 128;
                'probe: for dv in -r..=r {
                    for du in -r..=r {
                        let (nu, nv) = (u + du, v + dv);
                        if nu < 0
                            || nv < 0
                            || nu >= self.width as i64
                            || nv >= self.height as i64
                            || self.get(nu as u32, nv as u32) < 128
                        {
                            keep = false;
                            break 'probe;
                        }
                    }
                }
                if keep {
                    out.set(u as u32, v as u32, 255);
                }
            }
        }
        out
    }

    pub fn histogram(&self) -> [u64; 256] {
        let mut h = [0u64; 256];
        for &p in &self.data {
            h[p as usize] += 1;
        }
        h
    }

    /// Encodes as an 8-bit grayscale PNG (the wire-contract image payload).
    pub fn to_png(&self) -> Vec<u8> {
        let buf: image::GrayImage =
            image::ImageBuffer::from_raw(self.width, self.height, self.data.clone())
                .expect("buffer matches dimensions");
        let mut out = std::io::Cursor::new(Vec::new());
        buf.write_to(&mut out, image::ImageFormat::Png)
            .expect("in-memory png encode");
        out.into_inner()
    }
}

impl DepthImage {
    pub fn new(width: u32, height: u32, fill: u16) -> Self {
        Self {
            width,
            height,
            data: vec![fill; (width as usize) * (height as usize)],
        }
    }

    #[inline]
    pub fn get(&self, u: u32, v: u32) -> u16 {
        self.data[v as usize * self.width as usize + u as usize]
    }

    #[inline]
    pub fn set(&mut self, u: u32, v: u32, value: u16) {
        self.data[v as usize * self.width as usize + u as usize] = value;
    }
}
