//! Balanced pair planning for the seven dataset variants.
//!
//! Labels are fixed up front: exactly `n/2` ones and `n/2` zeros, shuffled
//! by the master seed. Each pair is then planned from its own stream,
//! `derive_seed(master, pair_id, tag)`, so pairs can be built in any order
//! or in parallel. The mirror coin of each generator is still drawn but
//! overridden by the planned label.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::geomgen::{generate, Cell, GenConfig, GenError};
use crate::image::RasterImage;
use crate::render::{render_cells, sample_view_pair_with, ElevationTolerance, RenderConfig, RenderError, ViewSampling, ViewSpec};
use crate::rng::{self, derive_seed, Rng};
use crate::scenespec::{sample_scene_with, AzimuthMode, SceneConfig, SceneError, SceneSpec};
use crate::textgen::{
    render_text_view, sample_unambiguous_string, GlyphAtlas, TextCondition, TextConfig, TextError, Wordlist,
};

const SHAPE_TAG: u64 = 0x5348_4150;
const VIEW_TAG: u64 = 0x5649_4557;
const TEXT_TAG: u64 = 0x5445_5854;
const SCENE_TAG: u64 = 0x5343_4e45;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Variant {
    /// Second elevation within `±deg` of the first.
    ShepardMetzler(f64),
    ShepardMetzlerFree,
    Text(TextCondition),
    /// Relative camera azimuth in degrees.
    Photo(f64),
}

impl Variant {
    /// The seven variants used in the experiments.
    pub const STANDARD: [Variant; 7] = [
        Variant::ShepardMetzler(0.0),
        Variant::ShepardMetzlerFree,
        Variant::Text(TextCondition::Normal),
        Variant::Text(TextCondition::Random),
        Variant::Text(TextCondition::Pseudo),
        Variant::Photo(30.0),
        Variant::Photo(90.0),
    ];

    pub fn has_images(&self) -> bool {
        !matches!(self, Variant::Photo(_))
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variant::ShepardMetzler(d) => write!(f, "sm-{d}"),
            Variant::ShepardMetzlerFree => f.write_str("sm-free"),
            Variant::Text(TextCondition::Normal) => f.write_str("text-normal"),
            Variant::Text(TextCondition::Random) => f.write_str("text-random"),
            Variant::Text(TextCondition::Pseudo) => f.write_str("text-pseudo"),
            Variant::Photo(d) => write!(f, "photo-{d}"),
        }
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let angle = |rest: &str| -> Result<f64, String> {
            rest.parse::<f64>()
                .ok()
                .filter(|d| d.is_finite() && *d >= 0.0)
                .ok_or_else(|| format!("bad angle in variant {s:?}"))
        };
        match s {
            "sm-free" => Ok(Variant::ShepardMetzlerFree),
            "text-normal" => Ok(Variant::Text(TextCondition::Normal)),
            "text-random" => Ok(Variant::Text(TextCondition::Random)),
            "text-pseudo" => Ok(Variant::Text(TextCondition::Pseudo)),
            _ => {
                if let Some(rest) = s.strip_prefix("sm-") {
                    Ok(Variant::ShepardMetzler(angle(rest)?))
                } else if let Some(rest) = s.strip_prefix("photo-") {
                    Ok(Variant::Photo(angle(rest)?))
                } else {
                    Err(format!(
                        "unknown variant {s:?} (expected sm-<deg>, sm-free, text-normal, text-random, text-pseudo, photo-<deg>)"
                    ))
                }
            }
        }
    }
}

impl Serialize for Variant {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Variant {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Condition-specific generation parameters of one pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Shape {
        shape_seed: u64,
        cells: Vec<Cell>,
        view_a: ViewSpec,
        view_b: ViewSpec,
    },
    Text {
        text: String,
        condition: TextCondition,
        rotation_a: f64,
        rotation_b: f64,
        flipped: bool,
        /// Label-ambiguous strings skipped before this one.
        skipped: u32,
    },
    Scene {
        scene_seed: u64,
        scene: SceneSpec,
    },
}

impl Provenance {
    /// Whether the provenance kind fits the variant.
    pub fn matches(&self, v: &Variant) -> bool {
        match (self, v) {
            (Provenance::Shape { .. }, Variant::ShepardMetzler(_) | Variant::ShepardMetzlerFree) => true,
            (Provenance::Text { condition, .. }, Variant::Text(c)) => condition == c,
            (Provenance::Scene { .. }, Variant::Photo(_)) => true,
            _ => false,
        }
    }

    /// Label implied by the generation parameters.
    pub fn implied_label(&self) -> u8 {
        let mirrored = match self {
            Provenance::Shape { view_b, .. } => view_b.mirrored,
            Provenance::Text { flipped, .. } => *flipped,
            Provenance::Scene { scene, .. } => scene.mirrored,
        };
        u8::from(!mirrored)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairPlan {
    pub pair_id: u64,
    pub label: u8,
    pub provenance: Provenance,
}

/// Everything pair planning and rendering depend on besides the seed.
#[derive(Clone, Debug)]
pub struct DatasetContext {
    pub gen: GenConfig,
    pub views: ViewSampling,
    pub render: RenderConfig,
    pub text: TextConfig,
    pub wordlist: Option<Wordlist>,
    pub latin: GlyphAtlas,
    pub pseudo: GlyphAtlas,
    pub scene: SceneConfig,
}

impl Default for DatasetContext {
    fn default() -> Self {
        Self {
            gen: GenConfig::default(),
            views: ViewSampling::default(),
            render: RenderConfig::default(),
            text: TextConfig::default(),
            wordlist: None,
            latin: GlyphAtlas::builtin_latin(),
            pseudo: GlyphAtlas::builtin_pseudo(),
            scene: SceneConfig::default(),
        }
    }
}

impl DatasetContext {
    pub fn atlas_for(&self, condition: TextCondition) -> &GlyphAtlas {
        match condition {
            TextCondition::Pseudo => &self.pseudo,
            _ => &self.latin,
        }
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum DatasetError {
    #[error("pair count {0} must be even and positive")]
    OddPairCount(u64),
    #[error("pair {pair_id}: {source}")]
    Shape { pair_id: u64, source: GenError },
    #[error("pair {pair_id}: {source}")]
    Text { pair_id: u64, source: TextError },
    #[error("pair {pair_id}: {source}")]
    Scene { pair_id: u64, source: SceneError },
    #[error("pair {pair_id}: {source}")]
    Render { pair_id: u64, source: RenderError },
}

pub fn check_pair_count(n_pairs: u64) -> Result<(), DatasetError> {
    if n_pairs == 0 || n_pairs % 2 == 1 {
        Err(DatasetError::OddPairCount(n_pairs))
    } else {
        Ok(())
    }
}

/// Exactly `n/2` ones and `n/2` zeros in seeded random order.
pub fn balanced_labels(n_pairs: u64, master_seed: u64) -> Result<Vec<u8>, DatasetError> {
    check_pair_count(n_pairs)?;
    let half = (n_pairs / 2) as usize;
    let mut labels: Vec<u8> = core::iter::repeat_n(1u8, half).chain(core::iter::repeat_n(0u8, half)).collect();
    Rng::derived(master_seed, 0, rng::stream::LABELS).shuffle(&mut labels);
    Ok(labels)
}

/// Plans one pair with the given label.
pub fn plan_pair(
    variant: &Variant,
    master_seed: u64,
    pair_id: u64,
    label: u8,
    ctx: &DatasetContext,
) -> Result<PairPlan, DatasetError> {
    let mirrored = label == 0;
    let provenance = match variant {
        Variant::ShepardMetzler(_) | Variant::ShepardMetzlerFree => {
            let tolerance = match variant {
                Variant::ShepardMetzler(d) => ElevationTolerance::Degrees(*d),
                _ => ElevationTolerance::Free,
            };
            let shape_seed = derive_seed(master_seed, pair_id, SHAPE_TAG);
            let gen = GenConfig {
                rng_seed: shape_seed,
                ..ctx.gen.clone()
            };
            let shape = generate(&gen).map_err(|source| DatasetError::Shape { pair_id, source })?;
            let mut vr = Rng::derived(master_seed, pair_id, VIEW_TAG);
            let views = sample_view_pair_with(&mut vr, tolerance, &ctx.views, Some(mirrored));
            Provenance::Shape {
                shape_seed,
                cells: shape.cells().to_vec(),
                view_a: views.a,
                view_b: views.b,
            }
        }
        Variant::Text(condition) => {
            let mut tr = Rng::derived(master_seed, pair_id, TEXT_TAG);
            let atlas = ctx.atlas_for(*condition);
            let (text, skipped) = sample_unambiguous_string(*condition, &mut tr, ctx.wordlist.as_ref(), atlas, &ctx.text)
                .map_err(|source| DatasetError::Text { pair_id, source })?;
            let rot_a = tr.uniform_range(ctx.text.rotation_min, ctx.text.rotation_max);
            let rotation_a = if ctx.text.upright_a { 0.0 } else { rot_a };
            let rotation_b = tr.uniform_range(ctx.text.rotation_min, ctx.text.rotation_max);
            let _coin = tr.coin();
            Provenance::Text {
                text,
                condition: *condition,
                rotation_a,
                rotation_b,
                flipped: mirrored,
                skipped,
            }
        }
        Variant::Photo(rel) => {
            let scene_seed = derive_seed(master_seed, pair_id, SCENE_TAG);
            let cfg = SceneConfig {
                azimuth: AzimuthMode::Relative(*rel),
                ..ctx.scene.clone()
            };
            let scene = sample_scene_with(&mut Rng::new(scene_seed), &cfg, Some(mirrored))
                .map_err(|source| DatasetError::Scene { pair_id, source })?;
            Provenance::Scene { scene_seed, scene }
        }
    };
    Ok(PairPlan {
        pair_id,
        label,
        provenance,
    })
}

/// Plans every pair of a dataset in id order.
pub fn plan_dataset(
    variant: &Variant,
    master_seed: u64,
    n_pairs: u64,
    ctx: &DatasetContext,
) -> Result<Vec<PairPlan>, DatasetError> {
    let labels = balanced_labels(n_pairs, master_seed)?;
    labels
        .iter()
        .enumerate()
        .map(|(id, &label)| plan_pair(variant, master_seed, id as u64, label, ctx))
        .collect()
}

/// Renders both views of a planned pair; `None` for scene pairs, which an
/// external renderer produces.
pub fn render_pair(plan: &PairPlan, ctx: &DatasetContext) -> Result<Option<(RasterImage, RasterImage)>, DatasetError> {
    let pair_id = plan.pair_id;
    match &plan.provenance {
        Provenance::Shape { cells, view_a, view_b, .. } => {
            let err = |source| DatasetError::Render { pair_id, source };
            let a = render_cells(cells, view_a, &ctx.render).map_err(err)?;
            let b = render_cells(cells, view_b, &ctx.render).map_err(err)?;
            Ok(Some((a, b)))
        }
        Provenance::Text {
            text,
            condition,
            rotation_a,
            rotation_b,
            flipped,
            ..
        } => {
            let canvas = ctx
                .atlas_for(*condition)
                .compose(text)
                .map_err(|source| DatasetError::Text { pair_id, source })?;
            let a = render_text_view(&canvas, *rotation_a, false, ctx.text.size, ctx.text.fill);
            let b = render_text_view(&canvas, *rotation_b, *flipped, ctx.text.size, ctx.text.fill);
            Ok(Some((a, b)))
        }
        Provenance::Scene { .. } => Ok(None),
    }
}
