//! Line-oriented JSON records for shapes and scenes.

use mentrot_core::geomgen::Cell;
use mentrot_core::scenespec::SceneSpec;
use serde::{Deserialize, Serialize};

/// `{"cells": [[x,y,z], ...], "seed": u64}` with cells in lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolycubeRecord {
    pub cells: Vec<[i32; 3]>,
    pub seed: u64,
}

impl PolycubeRecord {
    pub fn new(cells: &[Cell], seed: u64) -> Self {
        let mut cells: Vec<[i32; 3]> = cells.iter().map(|c| [c.x, c.y, c.z]).collect();
        cells.sort_unstable();
        Self { cells, seed }
    }

    pub fn to_cells(&self) -> Vec<Cell> {
        self.cells.iter().map(|&[x, y, z]| Cell::new(x, y, z)).collect()
    }
}

/// One line of `scenes.jsonl`: the scene spec plus where the external
/// renderer should put the two views.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneRecord {
    pub pair_id: u64,
    pub scene_seed: u64,
    pub image_a: String,
    pub image_b: String,
    #[serde(flatten)]
    pub scene: SceneSpec,
}

/// Serializes each item on its own line.
pub fn to_jsonl<T: Serialize>(items: impl IntoIterator<Item = T>) -> String {
    let mut out = String::new();
    for item in items {
        out.push_str(&serde_json::to_string(&item).expect("record serializes"));
        out.push('\n');
    }
    out
}

/// Parses non-empty lines; errors carry the 1-based line number.
pub fn from_jsonl<T: for<'de> Deserialize<'de>>(text: &str) -> Result<Vec<T>, (usize, serde_json::Error)> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| (i + 1, e)))
        .collect()
}
