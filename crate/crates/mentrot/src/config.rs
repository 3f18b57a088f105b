//! Run configuration: defaults, then a TOML or JSON file, then flags.

use std::fs;
use std::path::{Path, PathBuf};

use mentrot_core::dataset::{DatasetContext, Variant};
use mentrot_core::geomgen::GenConfig;
use mentrot_core::probe::{CVPlan, TrainConfig};
use mentrot_core::render::{RenderConfig, ViewSampling};
use mentrot_core::scenespec::SceneConfig;
use mentrot_core::textgen::{TextConfig, Wordlist};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::atlas::load_atlas;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Master seed for datasets and probe runs.
    pub seed: u64,
    pub dataset: DatasetSection,
    pub probe: ProbeSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetSection {
    pub variant: Option<Variant>,
    pub pairs: u64,
    /// Newline-separated words for the Normal text condition.
    pub wordlist: Option<PathBuf>,
    /// Atlas sheets (`.png` next to `.atlas.json`); builtin bitmaps otherwise.
    pub latin_atlas: Option<PathBuf>,
    pub pseudo_atlas: Option<PathBuf>,
    pub shapes: GenConfig,
    pub views: ViewSampling,
    pub render: RenderConfig,
    pub text: TextConfig,
    pub scene: SceneConfig,
}

impl Default for DatasetSection {
    fn default() -> Self {
        Self {
            variant: None,
            pairs: 20_000,
            wordlist: None,
            latin_atlas: None,
            pseudo_atlas: None,
            shapes: GenConfig::default(),
            views: ViewSampling::default(),
            render: RenderConfig::default(),
            text: TextConfig::default(),
            scene: SceneConfig::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    F32,
    #[default]
    F64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeSection {
    pub cv: CVPlan,
    /// `train.seed` is ignored; the master seed is used.
    pub train: TrainConfig,
    pub precision: Precision,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            dataset: DatasetSection::default(),
            probe: ProbeSection::default(),
        }
    }
}

impl RunConfig {
    /// Reads a config file; `.json` is parsed as JSON, anything else as TOML.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(Error::io(path))?;
        let parsed = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
            serde_json::from_str(&text).map_err(|e| e.to_string())
        } else {
            toml::from_str(&text).map_err(|e| e.to_string())
        };
        parsed.map_err(|e| Error::Usage(format!("{}: {e}", path.display())))
    }

    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            Some(p) => Self::from_file(p),
            None => Ok(Self::default()),
        }
    }

    /// Validates and copies the master seed into the sub-configs.
    pub fn resolve(mut self) -> Result<Self> {
        self.probe.train.seed = self.seed;
        self.probe.train.validate().map_err(|e| Error::Usage(format!("probe.train: {e}")))?;
        self.probe.cv.validate().map_err(|e| Error::Usage(format!("probe.cv: {e}")))?;
        Ok(self)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }

    /// SHA-256 of the compact JSON form, hex encoded.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn context(&self) -> Result<DatasetContext> {
        let d = &self.dataset;
        let mut ctx = DatasetContext {
            gen: d.shapes.clone(),
            views: d.views.clone(),
            render: d.render.clone(),
            text: d.text.clone(),
            scene: d.scene.clone(),
            ..DatasetContext::default()
        };
        if let Some(p) = &d.wordlist {
            let text = fs::read_to_string(p).map_err(Error::io(p))?;
            ctx.wordlist = Some(Wordlist::parse(&text));
        }
        if let Some(p) = &d.latin_atlas {
            ctx.latin = load_atlas(p)?;
        }
        if let Some(p) = &d.pseudo_atlas {
            ctx.pseudo = load_atlas(p)?;
        }
        Ok(ctx)
    }
}
