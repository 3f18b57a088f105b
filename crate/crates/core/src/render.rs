//! Deterministic CPU rasterizer for polycubes and two-view pose sampling.
//!
//! World axes: `z` is up. A camera at azimuth `a` and elevation `e` sits in
//! direction `d = (sin a cos e, -cos a cos e, sin e)` from the object center
//! and looks back along `-d`; screen right is `(cos a, sin a, 0)`. At
//! azimuth 0 and elevation 0 the camera looks along `+y` with `+x` to the
//! right.
//!
//! Hidden surfaces are resolved per sample with a depth buffer. Each visible
//! cube face is drawn in one of three gray levels chosen by the axis of its
//! world normal (via `|n . light|`) and outlined in a dark color.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::geomgen::{Cell, Polycube};
use crate::image::RasterImage;
use crate::rng::Rng;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Projection {
    Orthographic,
    /// Pinhole camera `distance` scene units from the object center.
    Perspective { distance: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CameraPose {
    /// Degrees in `[-90, 90]`.
    pub elevation: f64,
    /// Degrees in `[0, 360)`.
    pub azimuth: f64,
    pub projection: Projection,
}

impl CameraPose {
    pub fn orthographic(elevation: f64, azimuth: f64) -> Self {
        Self {
            elevation,
            azimuth,
            projection: Projection::Orthographic,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shading {
    #[default]
    FlatWithOutlines,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ViewSpec {
    pub pose: CameraPose,
    /// Reflect the shape across `x = 0` before viewing.
    pub mirrored: bool,
    #[serde(default)]
    pub shading: Shading,
}

impl ViewSpec {
    pub fn new(pose: CameraPose) -> Self {
        Self {
            pose,
            mirrored: false,
            shading: Shading::FlatWithOutlines,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RenderConfig {
    pub size: u32,
    /// Samples per pixel along each axis.
    pub supersample: u32,
    /// Fraction of the frame covered by the larger side of the projected
    /// bounding box.
    pub fill: f64,
    pub light: [f64; 3],
    /// Outline half-width in output pixels.
    pub outline_px: f64,
    pub background: u8,
    pub outline: u8,
    pub ambient: f64,
    pub diffuse: f64,
}

impl Default for RenderConfig {
    fn default() -> Self {
        Self {
            size: 224,
            supersample: 2,
            fill: 0.8,
            light: [1.0, 2.0, 3.0],
            outline_px: 1.0,
            background: 255,
            outline: 24,
            ambient: 0.35,
            diffuse: 0.55,
        }
    }
}

impl RenderConfig {
    pub fn with_size(size: u32) -> Self {
        Self {
            size,
            ..Self::default()
        }
    }

    /// Gray level of faces whose normal lies along `x`, `y`, `z`.
    pub fn face_levels(&self) -> [u8; 3] {
        let n = norm(self.light);
        let l = [self.light[0] / n, self.light[1] / n, self.light[2] / n];
        let level = |c: f64| {
            let v = 255.0 * (self.ambient + self.diffuse * c.abs());
            v.round().clamp(0.0, 255.0) as u8
        };
        [level(l[0]), level(l[1]), level(l[2])]
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum RenderError {
    #[error("image size {0} is below the 64 pixel minimum")]
    SizeTooSmall(u32),
    #[error("camera pose out of range: elevation {elevation}, azimuth {azimuth}")]
    InvalidPose { elevation: f64, azimuth: f64 },
    #[error("shape has no cells")]
    EmptyShape,
    #[error("projected bounding box collapses below one pixel")]
    DegenerateView,
}

#[inline]
fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

/// Orthonormal camera frame `(right, up, toward_camera)`.
pub fn camera_basis(pose: &CameraPose) -> ([f64; 3], [f64; 3], [f64; 3]) {
    let (sa, ca) = libm::sincos(pose.azimuth.to_radians());
    let (se, ce) = libm::sincos(pose.elevation.to_radians());
    let d = [sa * ce, -ca * ce, se];
    let r = [ca, sa, 0.0];
    let u = cross(d, r);
    (r, u, d)
}

struct Face {
    axis: usize,
    /// Plane coordinate along `axis` (object centered).
    plane: f64,
    corners: [[f64; 3]; 4],
}

fn visible_faces(cells: &[Cell], mirrored: bool) -> Vec<Face> {
    // Mirroring x maps the cube [x, x+1] onto [-x-1, -x].
    let cells: Vec<Cell> = if mirrored {
        cells.iter().map(|c| Cell::new(-c.x - 1, c.y, c.z)).collect()
    } else {
        cells.to_vec()
    };
    let set: BTreeSet<Cell> = cells.iter().copied().collect();
    let (mut lo, mut hi) = ([i32::MAX; 3], [i32::MIN; 3]);
    for c in &cells {
        for (k, v) in [c.x, c.y, c.z].into_iter().enumerate() {
            lo[k] = lo[k].min(v);
            hi[k] = hi[k].max(v + 1);
        }
    }
    let center = [
        (lo[0] + hi[0]) as f64 / 2.0,
        (lo[1] + hi[1]) as f64 / 2.0,
        (lo[2] + hi[2]) as f64 / 2.0,
    ];

    let mut faces = Vec::new();
    for c in &cells {
        let base = [c.x, c.y, c.z];
        for axis in 0..3 {
            for sign in [1i32, -1] {
                let mut nb = base;
                nb[axis] += sign;
                if set.contains(&Cell::new(nb[0], nb[1], nb[2])) {
                    continue;
                }
                let plane = (base[axis] + i32::from(sign > 0)) as f64 - center[axis];
                let (u, v) = ((axis + 1) % 3, (axis + 2) % 3);
                let u0 = base[u] as f64 - center[u];
                let v0 = base[v] as f64 - center[v];
                let mut corners = [[0.0; 3]; 4];
                for (k, (du, dv)) in [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)].into_iter().enumerate() {
                    corners[k][axis] = plane;
                    corners[k][u] = u0 + du;
                    corners[k][v] = v0 + dv;
                }
                faces.push(Face {
                    axis: axis * 2 + usize::from(sign < 0),
                    plane,
                    corners,
                });
            }
        }
    }
    faces
}

struct Camera {
    r: [f64; 3],
    u: [f64; 3],
    d: [f64; 3],
    distance: Option<f64>,
}

impl Camera {
    /// Screen coordinates, or `None` behind a perspective camera.
    fn project(&self, p: [f64; 3]) -> Option<[f64; 2]> {
        let (x, y) = (dot(p, self.r), dot(p, self.u));
        match self.distance {
            None => Some([x, y]),
            Some(dist) => {
                let depth = dist - dot(p, self.d);
                (depth > 1e-9).then(|| [x * dist / depth, y * dist / depth])
            }
        }
    }

    fn faces_camera(&self, f: &Face) -> bool {
        let axis = f.axis / 2;
        let sign = if f.axis % 2 == 0 { 1.0 } else { -1.0 };
        match self.distance {
            None => sign * self.d[axis] > 0.0,
            Some(dist) => {
                let mid = [
                    (f.corners[0][0] + f.corners[2][0]) / 2.0,
                    (f.corners[0][1] + f.corners[2][1]) / 2.0,
                    (f.corners[0][2] + f.corners[2][2]) / 2.0,
                ];
                sign * (dist * self.d[axis] - mid[axis]) > 0.0
            }
        }
    }

    /// Closeness of the face plane along the ray through screen point
    /// `(x, y)`; larger is nearer.
    fn closeness(&self, axis: usize, plane: f64, x: f64, y: f64) -> f64 {
        match self.distance {
            None => (plane - x * self.r[axis] - y * self.u[axis]) / self.d[axis],
            Some(dist) => {
                let c = dist * self.d[axis];
                let dir = x * self.r[axis] + y * self.u[axis] - dist * self.d[axis];
                -((plane - c) / dir)
            }
        }
    }
}

#[inline]
fn edge(a: [f64; 2], b: [f64; 2], p: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])
}

/// Renders an arbitrary nonempty cell set.
pub fn render_cells(cells: &[Cell], view: &ViewSpec, cfg: &RenderConfig) -> Result<RasterImage, RenderError> {
    if cfg.size < 64 {
        return Err(RenderError::SizeTooSmall(cfg.size));
    }
    let pose = &view.pose;
    let pose_ok = (-90.0..=90.0).contains(&pose.elevation) && (0.0..360.0).contains(&pose.azimuth);
    if !pose_ok {
        return Err(RenderError::InvalidPose {
            elevation: pose.elevation,
            azimuth: pose.azimuth,
        });
    }
    if cells.is_empty() {
        return Err(RenderError::EmptyShape);
    }
    let (r, u, d) = camera_basis(pose);
    let cam = Camera {
        r,
        u,
        d,
        distance: match pose.projection {
            Projection::Orthographic => None,
            Projection::Perspective { distance } => Some(distance),
        },
    };

    let faces: Vec<Face> = visible_faces(cells, view.mirrored)
        .into_iter()
        .filter(|f| cam.faces_camera(f))
        .collect();
    let mut projected = Vec::with_capacity(faces.len());
    for f in &faces {
        let mut q = [[0.0; 2]; 4];
        for (k, c) in f.corners.iter().enumerate() {
            q[k] = cam.project(*c).ok_or(RenderError::DegenerateView)?;
        }
        projected.push(q);
    }
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for q in &projected {
        for p in q {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
    }
    let ext = [hi[0] - lo[0], hi[1] - lo[1]];
    let big = ext[0].max(ext[1]);
    if !(big.is_finite() && big > 0.0) {
        return Err(RenderError::DegenerateView);
    }
    let ss = cfg.supersample.max(1);
    let n = (cfg.size * ss) as usize;
    let half = n as f64 / 2.0;
    let scale = cfg.fill * n as f64 / big;
    if ext[0].min(ext[1]) * scale / (ss as f64) < 1.0 {
        return Err(RenderError::DegenerateView);
    }
    let center = [(lo[0] + hi[0]) / 2.0, (lo[1] + hi[1]) / 2.0];
    let to_screen = |i: usize, j: usize| -> [f64; 2] {
        [
            (i as f64 + 0.5 - half) / scale + center[0],
            (half - (j as f64 + 0.5)) / scale + center[1],
        ]
    };
    let to_sample = |p: [f64; 2]| -> (f64, f64) { ((p[0] - center[0]) * scale + half, half - (p[1] - center[1]) * scale) };

    let levels = cfg.face_levels();
    let band = cfg.outline_px * ss as f64 / scale;
    let mut depth = vec![f64::NEG_INFINITY; n * n];
    let mut color = vec![cfg.background; n * n];
    for (f, q) in faces.iter().zip(&projected) {
        let (mut smin, mut smax) = ((f64::INFINITY, f64::INFINITY), (f64::NEG_INFINITY, f64::NEG_INFINITY));
        for p in q {
            let (sx, sy) = to_sample(*p);
            smin = (smin.0.min(sx), smin.1.min(sy));
            smax = (smax.0.max(sx), smax.1.max(sy));
        }
        let i0 = smin.0.floor().max(0.0) as usize;
        let j0 = smin.1.floor().max(0.0) as usize;
        let i1 = (smax.0.ceil().max(0.0) as usize).min(n);
        let j1 = (smax.1.ceil().max(0.0) as usize).min(n);
        let lens: [f64; 4] = core::array::from_fn(|k| {
            let (a, b) = (q[k], q[(k + 1) % 4]);
            ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt()
        });
        if lens.iter().any(|&l| l <= 0.0) {
            continue;
        }
        let shade = levels[f.axis / 2];
        for j in j0..j1 {
            for i in i0..i1 {
                let p = to_screen(i, j);
                let e: [f64; 4] = core::array::from_fn(|k| edge(q[k], q[(k + 1) % 4], p));
                let inside = e.iter().all(|&v| v >= 0.0) || e.iter().all(|&v| v <= 0.0);
                if !inside {
                    continue;
                }
                let z = cam.closeness(f.axis / 2, f.plane, p[0], p[1]);
                let idx = j * n + i;
                if z > depth[idx] {
                    depth[idx] = z;
                    let near_edge = (0..4).any(|k| e[k].abs() / lens[k] < band);
                    color[idx] = if near_edge { cfg.outline } else { shade };
                }
            }
        }
    }

    let size = cfg.size as usize;
    let ssu = ss as usize;
    let count = (ssu * ssu) as u32;
    let mut gray = vec![0u8; size * size];
    for y in 0..size {
        for x in 0..size {
            let mut acc = 0u32;
            for sy in 0..ssu {
                let row = (y * ssu + sy) * n;
                for sx in 0..ssu {
                    acc += color[row + x * ssu + sx] as u32;
                }
            }
            gray[y * size + x] = ((acc + count / 2) / count) as u8;
        }
    }
    Ok(RasterImage::gray_to_rgb(&gray, cfg.size, cfg.size))
}

pub fn render_polycube(p: &Polycube, view: &ViewSpec, cfg: &RenderConfig) -> Result<RasterImage, RenderError> {
    render_cells(p.cells(), view, cfg)
}

/// How far the second view's elevation may stray from the first.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ElevationTolerance {
    /// `elevation_b = elevation_a + U(-deg, deg)`; exactly equal for 0.
    Degrees(f64),
    /// Independent uniform elevation.
    Free,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ViewSampling {
    pub elevation_min: f64,
    pub elevation_max: f64,
    pub projection: Projection,
}

impl Default for ViewSampling {
    fn default() -> Self {
        Self {
            elevation_min: -90.0,
            elevation_max: 90.0,
            projection: Projection::Orthographic,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ViewPair {
    pub a: ViewSpec,
    pub b: ViewSpec,
    /// 1 when both views show the same shape, 0 when `b` is mirrored.
    pub label: u8,
}

/// Folds `x` back into `[lo, hi]` by reflection at the bounds.
fn reflect_into(mut x: f64, lo: f64, hi: f64) -> f64 {
    for _ in 0..4 {
        if x > hi {
            x = 2.0 * hi - x;
        } else if x < lo {
            x = 2.0 * lo - x;
        } else {
            break;
        }
    }
    x.clamp(lo, hi)
}

fn azimuth(rng: &mut Rng) -> f64 {
    // uniform() < 1 keeps the value strictly below 360.
    360.0 * rng.uniform()
}

/// Draws a view pair. Draw order: elevation A, azimuth A, elevation B,
/// azimuth B, mirror coin. `force_mirrored` overrides the coin after it is
/// drawn, so label-balanced datasets consume the same stream.
pub fn sample_view_pair_with(
    rng: &mut Rng,
    tolerance: ElevationTolerance,
    sampling: &ViewSampling,
    force_mirrored: Option<bool>,
) -> ViewPair {
    let (lo, hi) = (sampling.elevation_min, sampling.elevation_max);
    let elev_a = rng.uniform_range(lo, hi);
    let az_a = azimuth(rng);
    let elev_b = match tolerance {
        ElevationTolerance::Degrees(t) if t == 0.0 => {
            let _ = rng.uniform();
            elev_a
        }
        ElevationTolerance::Degrees(t) => reflect_into(elev_a + rng.uniform_range(-t, t), lo, hi),
        ElevationTolerance::Free => rng.uniform_range(lo, hi),
    };
    let az_b = azimuth(rng);
    let coin = rng.coin();
    let mirrored = force_mirrored.unwrap_or(coin);
    let pose = |elevation, azimuth| CameraPose {
        elevation,
        azimuth,
        projection: sampling.projection,
    };
    ViewPair {
        a: ViewSpec::new(pose(elev_a, az_a)),
        b: ViewSpec {
            mirrored,
            ..ViewSpec::new(pose(elev_b, az_b))
        },
        label: u8::from(!mirrored),
    }
}

pub fn sample_view_pair(rng: &mut Rng, tolerance: ElevationTolerance) -> ViewPair {
    sample_view_pair_with(rng, tolerance, &ViewSampling::default(), None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geomgen::{generate, Axis, GenConfig};

    fn unit_cube() -> [Cell; 1] {
        [Cell::ORIGIN]
    }

    /// 4-connected components of pixels with exactly `value`.
    fn components(img: &RasterImage, value: u8) -> Vec<usize> {
        let (w, h) = (img.width as usize, img.height as usize);
        let mut label = vec![usize::MAX; w * h];
        let mut sizes = Vec::new();
        for start in 0..w * h {
            if label[start] != usize::MAX || img.data[start * 3] != value {
                continue;
            }
            let id = sizes.len();
            let mut stack = vec![start];
            label[start] = id;
            let mut size = 0;
            while let Some(p) = stack.pop() {
                size += 1;
                let (x, y) = (p % w, p / w);
                let mut nb = Vec::new();
                if x > 0 {
                    nb.push(p - 1);
                }
                if x + 1 < w {
                    nb.push(p + 1);
                }
                if y > 0 {
                    nb.push(p - w);
                }
                if y + 1 < h {
                    nb.push(p + w);
                }
                for q in nb {
                    if label[q] == usize::MAX && img.data[q * 3] == value {
                        label[q] = id;
                        stack.push(q);
                    }
                }
            }
            sizes.push(size);
        }
        sizes
    }

    #[test]
    fn deterministic() {
        let p = generate(&GenConfig::with_seed(1)).unwrap();
        let v = ViewSpec::new(CameraPose::orthographic(20.0, 35.0));
        let cfg = RenderConfig::default();
        assert_eq!(render_polycube(&p, &v, &cfg).unwrap(), render_polycube(&p, &v, &cfg).unwrap());
    }

    #[test]
    fn single_cube_front_view_shows_one_square_face() {
        let cfg = RenderConfig::default();
        let img = render_cells(&unit_cube(), &ViewSpec::new(CameraPose::orthographic(0.0, 0.0)), &cfg).unwrap();
        let levels = cfg.face_levels();
        let y_face = components(&img, levels[1]);
        assert_eq!(y_face.len(), 1, "{y_face:?}");
        assert!(components(&img, levels[0]).is_empty());
        assert!(components(&img, levels[2]).is_empty());
        // Square: the region fills the central 80% box minus the outline.
        let side = (0.8 * 224.0) as usize - 4;
        assert!(y_face[0] > side * side * 9 / 10, "{}", y_face[0]);
    }

    #[test]
    fn mirror_equals_horizontal_flip_for_the_front_view() {
        let p = generate(&GenConfig::with_seed(8)).unwrap();
        let cfg = RenderConfig::default();
        let v = ViewSpec::new(CameraPose::orthographic(0.0, 0.0));
        let m = ViewSpec { mirrored: true, ..v };
        let plain = render_polycube(&p, &v, &cfg).unwrap();
        let mirrored = render_polycube(&p, &m, &cfg).unwrap();
        assert_eq!(mirrored, plain.flipped_horizontal());
    }

    #[test]
    fn mirror_differs_from_flip_for_oblique_views() {
        let p = generate(&GenConfig::with_seed(8)).unwrap();
        let cfg = RenderConfig::default();
        let v = ViewSpec::new(CameraPose::orthographic(30.0, 40.0));
        let m = ViewSpec { mirrored: true, ..v };
        let plain = render_polycube(&p, &v, &cfg).unwrap();
        assert_ne!(render_polycube(&p, &m, &cfg).unwrap(), plain.flipped_horizontal());
    }

    #[test]
    fn mirrored_achiral_bar_renders_identically() {
        let cfg = RenderConfig::default();
        for axis in Axis::ALL {
            let bar: Vec<Cell> = (0..4).map(|k| Cell::ORIGIN.step(axis, k)).collect();
            let v = ViewSpec::new(CameraPose::orthographic(25.0, 70.0));
            let m = ViewSpec { mirrored: true, ..v };
            assert_eq!(render_cells(&bar, &v, &cfg).unwrap(), render_cells(&bar, &m, &cfg).unwrap());
        }
    }

    #[test]
    fn perspective_renders() {
        let p = generate(&GenConfig::with_seed(2)).unwrap();
        let v = ViewSpec::new(CameraPose {
            elevation: 30.0,
            azimuth: 10.0,
            projection: Projection::Perspective { distance: 15.0 },
        });
        let img = render_polycube(&p, &v, &RenderConfig::default()).unwrap();
        let bg = img.fraction_equal(255);
        assert!(bg > 0.2 && bg < 0.95, "{bg}");
        let inside = ViewSpec::new(CameraPose {
            projection: Projection::Perspective { distance: 0.5 },
            ..v.pose
        });
        assert_eq!(render_polycube(&p, &inside, &RenderConfig::default()), Err(RenderError::DegenerateView));
    }

    #[test]
    fn rejects_bad_inputs() {
        let v = ViewSpec::new(CameraPose::orthographic(0.0, 0.0));
        assert_eq!(render_cells(&unit_cube(), &v, &RenderConfig::with_size(32)), Err(RenderError::SizeTooSmall(32)));
        let bad = ViewSpec::new(CameraPose::orthographic(91.0, 0.0));
        assert!(matches!(render_cells(&unit_cube(), &bad, &RenderConfig::default()), Err(RenderError::InvalidPose { .. })));
        let bad = ViewSpec::new(CameraPose::orthographic(0.0, 360.0));
        assert!(matches!(render_cells(&unit_cube(), &bad, &RenderConfig::default()), Err(RenderError::InvalidPose { .. })));
        assert_eq!(render_cells(&[], &v, &RenderConfig::default()), Err(RenderError::EmptyShape));
    }

    #[test]
    fn zero_tolerance_keeps_elevation() {
        let mut rng = Rng::new(5);
        for _ in 0..2000 {
            let pair = sample_view_pair(&mut rng, ElevationTolerance::Degrees(0.0));
            assert_eq!(pair.a.pose.elevation, pair.b.pose.elevation);
            assert_eq!(pair.label == 1, !pair.b.mirrored);
            assert!(!pair.a.mirrored);
        }
    }

    #[test]
    fn tolerance_bounds_elevation_gap() {
        let mut rng = Rng::new(6);
        for _ in 0..2000 {
            let pair = sample_view_pair(&mut rng, ElevationTolerance::Degrees(15.0));
            assert!((pair.a.pose.elevation - pair.b.pose.elevation).abs() <= 15.0 + 1e-9);
            assert!((-90.0..=90.0).contains(&pair.b.pose.elevation));
        }
    }

    #[test]
    fn forced_label_consumes_the_same_stream() {
        let mut a = Rng::new(11);
        let mut b = Rng::new(11);
        let free = sample_view_pair(&mut a, ElevationTolerance::Free);
        let forced = sample_view_pair_with(&mut b, ElevationTolerance::Free, &ViewSampling::default(), Some(true));
        assert_eq!(free.a, forced.a);
        assert_eq!(free.b.pose, forced.b.pose);
        assert!(forced.b.mirrored);
        assert_eq!(a.next_u64(), b.next_u64());
    }
}
