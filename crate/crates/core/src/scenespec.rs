//! Tabletop scene specifications for an external renderer.
//!
//! Table coordinates are meters in the table plane with the origin at the
//! table center; orientations are degrees about the vertical axis. Camera
//! azimuths follow the convention of [`crate::render`]. Mirroring reflects
//! only the items, across the vertical plane through the table center that
//! contains camera A's viewing axis.

use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::rng::Rng;

/// The fruit pool: asset id and footprint radius in meters.
pub const FRUIT_POOL: [(&str, f64); 20] = [
    ("apple", 0.045),
    ("apricot", 0.030),
    ("avocado", 0.045),
    ("banana", 0.080),
    ("lemon", 0.040),
    ("lime", 0.035),
    ("mango", 0.060),
    ("nectarine", 0.040),
    ("orange", 0.045),
    ("papaya", 0.075),
    ("peach", 0.042),
    ("pear", 0.050),
    ("persimmon", 0.040),
    ("plum", 0.030),
    ("pomegranate", 0.050),
    ("kiwi", 0.030),
    ("grapefruit", 0.060),
    ("fig", 0.028),
    ("quince", 0.050),
    ("tangerine", 0.038),
];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AzimuthMode {
    /// `azimuth_b = azimuth_a + deg (mod 360)`.
    Relative(f64),
    /// Both azimuths independent and uniform.
    Free,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SceneConfig {
    /// Items are placed inside this disc around the table center, which the
    /// mirror maps onto itself.
    pub placement_radius: f64,
    pub min_items: u32,
    pub max_items: u32,
    /// Fixed camera elevation in degrees for both views.
    pub elevation: f64,
    pub azimuth: AzimuthMode,
    /// Defaults to twice the largest footprint radius in the pool.
    pub min_separation: Option<f64>,
    pub placement_attempts: u32,
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            placement_radius: 0.35,
            min_items: 3,
            max_items: 6,
            elevation: 45.0,
            azimuth: AzimuthMode::Relative(90.0),
            min_separation: None,
            placement_attempts: 1000,
        }
    }
}

impl SceneConfig {
    pub fn separation(&self) -> f64 {
        self.min_separation
            .unwrap_or_else(|| 2.0 * FRUIT_POOL.iter().map(|(_, r)| *r).fold(0.0, f64::max))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneItem {
    pub asset_id: String,
    pub position: [f64; 2],
    pub orientation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub items: Vec<SceneItem>,
    pub camera_elevation: f64,
    pub azimuth_a: f64,
    pub azimuth_b: f64,
    /// View B shows the mirrored arrangement.
    pub mirrored: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SceneError {
    #[error("could not place item {item} with the required separation")]
    PlacementExhausted { item: usize },
    #[error("invalid scene config: {0}")]
    InvalidConfig(&'static str),
}

fn rem_euclid(x: f64, m: f64) -> f64 {
    let r = libm::fmod(x, m);
    if r < 0.0 {
        r + m
    } else {
        r
    }
}

fn wrap_degrees(x: f64) -> f64 {
    let r = rem_euclid(x, 360.0);
    if r >= 360.0 {
        0.0
    } else {
        r
    }
}

impl SceneSpec {
    /// Direction (degrees, table frame) of the mirror line: camera A's
    /// horizontal viewing direction.
    pub fn mirror_line_angle(&self) -> f64 {
        self.azimuth_a + 90.0
    }

    /// Item arrangement seen by camera B.
    pub fn items_b(&self) -> Vec<SceneItem> {
        if self.mirrored {
            apply_mirror(self).items
        } else {
            self.items.clone()
        }
    }
}

/// Reflects item positions across the mirror line and maps orientations
/// `theta -> 2*phi - theta`, which is negation in camera A's frame. Table
/// and cameras are untouched.
pub fn apply_mirror(s: &SceneSpec) -> SceneSpec {
    let phi = s.mirror_line_angle();
    let (sn, cs) = libm::sincos(phi.to_radians());
    let items = s
        .items
        .iter()
        .map(|it| {
            let [x, y] = it.position;
            let along = x * cs + y * sn;
            SceneItem {
                asset_id: it.asset_id.clone(),
                position: [2.0 * along * cs - x, 2.0 * along * sn - y],
                orientation: wrap_degrees(2.0 * phi - it.orientation),
            }
        })
        .collect();
    SceneSpec { items, ..s.clone() }
}

/// Draw order: item count, then per item asset, position (rejection within
/// the disc under the separation constraint) and orientation, then azimuth
/// A, azimuth B (if free) and the mirror coin.
pub fn sample_scene_with(rng: &mut Rng, cfg: &SceneConfig, force_mirrored: Option<bool>) -> Result<SceneSpec, SceneError> {
    if cfg.min_items == 0 || cfg.min_items > cfg.max_items {
        return Err(SceneError::InvalidConfig("item range must satisfy 1 <= min <= max"));
    }
    if cfg.placement_radius <= 0.0 {
        return Err(SceneError::InvalidConfig("placement radius must be positive"));
    }
    let count = rng.range_inclusive(cfg.min_items, cfg.max_items) as usize;
    let sep = cfg.separation();
    let rad = cfg.placement_radius;
    let mut items: Vec<SceneItem> = Vec::with_capacity(count);
    for item in 0..count {
        let (asset, _) = FRUIT_POOL[rng.index(FRUIT_POOL.len())];
        let mut placed = None;
        for _ in 0..cfg.placement_attempts {
            let p = [rng.uniform_range(-rad, rad), rng.uniform_range(-rad, rad)];
            if p[0] * p[0] + p[1] * p[1] > rad * rad {
                continue;
            }
            let clear = items.iter().all(|o| {
                let (dx, dy) = (o.position[0] - p[0], o.position[1] - p[1]);
                dx * dx + dy * dy >= sep * sep
            });
            if clear {
                placed = Some(p);
                break;
            }
        }
        let position = placed.ok_or(SceneError::PlacementExhausted { item })?;
        items.push(SceneItem {
            asset_id: String::from(asset),
            position,
            orientation: 360.0 * rng.uniform(),
        });
    }
    let azimuth_a = 360.0 * rng.uniform();
    let azimuth_b = match cfg.azimuth {
        AzimuthMode::Relative(deg) => wrap_degrees(azimuth_a + deg),
        AzimuthMode::Free => 360.0 * rng.uniform(),
    };
    let coin = rng.coin();
    Ok(SceneSpec {
        items,
        camera_elevation: cfg.elevation,
        azimuth_a,
        azimuth_b,
        mirrored: force_mirrored.unwrap_or(coin),
    })
}

pub fn sample_scene(rng: &mut Rng, cfg: &SceneConfig) -> Result<SceneSpec, SceneError> {
    sample_scene_with(rng, cfg, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn spec(items: Vec<SceneItem>, azimuth_a: f64) -> SceneSpec {
        SceneSpec {
            items,
            camera_elevation: 45.0,
            azimuth_a,
            azimuth_b: azimuth_a + 90.0,
            mirrored: true,
        }
    }

    fn item(x: f64, y: f64, o: f64) -> SceneItem {
        SceneItem {
            asset_id: String::from("apple"),
            position: [x, y],
            orientation: o,
        }
    }

    #[test]
    fn mirror_twice_is_identity() {
        let mut rng = Rng::new(3);
        for _ in 0..200 {
            let s = sample_scene(&mut rng, &SceneConfig::default()).unwrap();
            let back = apply_mirror(&apply_mirror(&s));
            for (a, b) in s.items.iter().zip(&back.items) {
                assert!((a.position[0] - b.position[0]).abs() < 1e-12);
                assert!((a.position[1] - b.position[1]).abs() < 1e-12);
                let d = rem_euclid(a.orientation - b.orientation, 360.0);
                assert!(d.min(360.0 - d) < 1e-9);
            }
        }
    }

    #[test]
    fn item_on_the_mirror_line_keeps_its_position() {
        // Camera A at azimuth 270 looks along +x, so the mirror line is the x axis.
        let s = spec(vec![item(0.0, 0.0, 30.0), item(0.2, 0.0, 0.0)], 270.0);
        let m = apply_mirror(&s);
        assert!(m.items[0].position[0].abs() < 1e-15 && m.items[0].position[1].abs() < 1e-15);
        assert!((m.items[0].orientation - 330.0).abs() < 1e-9);
        assert!((m.items[1].position[0] - 0.2).abs() < 1e-12 && m.items[1].position[1].abs() < 1e-12);
    }

    #[test]
    fn mirror_reflects_the_position_set() {
        let s = spec(vec![item(0.1, 0.2, 0.0), item(-0.15, 0.05, 0.0), item(0.0, -0.3, 0.0)], 270.0);
        let m = apply_mirror(&s);
        let mut want: Vec<[f64; 2]> = s.items.iter().map(|i| [i.position[0], -i.position[1]]).collect();
        let mut got: Vec<[f64; 2]> = m.items.iter().map(|i| i.position).collect();
        let key = |p: &[f64; 2]| (p[0] * 1e6).round() as i64;
        want.sort_by_key(key);
        got.sort_by_key(key);
        for (a, b) in want.iter().zip(&got) {
            assert!((a[0] - b[0]).abs() < 1e-12 && (a[1] - b[1]).abs() < 1e-12);
        }
        assert_eq!(m.camera_elevation, s.camera_elevation);
        assert_eq!((m.azimuth_a, m.azimuth_b), (s.azimuth_a, s.azimuth_b));
    }

    #[test]
    fn sampled_scenes_respect_constraints() {
        let cfg = SceneConfig::default();
        let mut rng = Rng::new(4);
        for _ in 0..500 {
            let s = sample_scene(&mut rng, &cfg).unwrap();
            assert!((3..=6).contains(&s.items.len()));
            for pass in [s.items.clone(), s.items_b()] {
                for (i, a) in pass.iter().enumerate() {
                    let r = (a.position[0].powi(2) + a.position[1].powi(2)).sqrt();
                    assert!(r <= cfg.placement_radius + 1e-12);
                    for b in &pass[i + 1..] {
                        let d = ((a.position[0] - b.position[0]).powi(2) + (a.position[1] - b.position[1]).powi(2)).sqrt();
                        assert!(d >= cfg.separation() - 1e-12);
                    }
                }
            }
            let mut ids: Vec<_> = s.items.iter().map(|i| i.asset_id.clone()).collect();
            let mut ids_b: Vec<_> = s.items_b().iter().map(|i| i.asset_id.clone()).collect();
            ids.sort();
            ids_b.sort();
            assert_eq!(ids, ids_b);
        }
    }

    #[test]
    fn impossible_separation_exhausts() {
        let cfg = SceneConfig {
            min_separation: Some(1.0),
            min_items: 6,
            placement_attempts: 50,
            ..SceneConfig::default()
        };
        assert!(matches!(sample_scene(&mut Rng::new(0), &cfg), Err(SceneError::PlacementExhausted { .. })));
    }
}
