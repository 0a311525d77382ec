use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_CANVAS_PX: u32 = 2000;
pub const DEFAULT_THUMB_PX: u32 = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ItemKind {
    Photo,
    Word,
}

/// Top-left pixel of one item's thumbnail and whether it was drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Placement {
    pub index: usize,
    pub x: u32,
    pub y: u32,
    pub kept: bool,
}

fn normalize(values: impl Iterator<Item = f64> + Clone, max: u32) -> Vec<u32> {
    let lo = values.clone().fold(f64::INFINITY, f64::min);
    let hi = values.clone().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    values
        .map(|v| {
            if span > 0.0 {
                ((v - lo) / span * max as f64).round() as u32
            } else {
                0
            }
        })
        .collect()
}

/// Places square thumbnails at min-max normalised 2-D coordinates.
///
/// Word items are placed before photos, each group in input order. An item
/// whose square would share a pixel with an already placed square is
/// omitted. The result has one placement per input item, in input order.
pub fn canvas_layout(coords: &[[f64; 2]], kinds: &[ItemKind], canvas_px: u32, thumb_px: u32) -> Result<Vec<Placement>> {
    if coords.len() != kinds.len() {
        return Err(Error::CountMismatch {
            ids: kinds.len(),
            vectors: coords.len(),
        });
    }
    if thumb_px == 0 || thumb_px > canvas_px {
        return Err(Error::param("thumbnail size must lie in 1..=canvas size"));
    }
    if coords.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("layout coordinates"));
    }
    let room = canvas_px - thumb_px;
    let xs = normalize(coords.iter().map(|c| c[0]), room);
    let ys = normalize(coords.iter().map(|c| c[1]), room);

    let mut out: Vec<Placement> = (0..coords.len())
        .map(|i| Placement {
            index: i,
            x: xs[i],
            y: ys[i],
            kept: false,
        })
        .collect();
    let order = (0..coords.len())
        .filter(|&i| kinds[i] == ItemKind::Word)
        .chain((0..coords.len()).filter(|&i| kinds[i] == ItemKind::Photo));

    // Grid cells of thumbnail size; a square can only collide with squares
    // registered in its own or the eight surrounding cells.
    let cell = |v: u32| (v / thumb_px) as i64;
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for i in order {
        let (x, y) = (out[i].x, out[i].y);
        let (cx, cy) = (cell(x), cell(y));
        let collides = (-1..=1).any(|dx| {
            (-1..=1).any(|dy| {
                grid.get(&(cx + dx, cy + dy)).is_some_and(|placed| {
                    placed
                        .iter()
                        .any(|&j| x.abs_diff(out[j].x) < thumb_px && y.abs_diff(out[j].y) < thumb_px)
                })
            })
        });
        if !collides {
            out[i].kept = true;
            grid.entry((cx, cy)).or_default().push(i);
        }
    }
    Ok(out)
}

/// `id<TAB>x<TAB>y<TAB>kept` rows.
pub fn placements_tsv(placements: &[Placement], ids: &[String]) -> String {
    let mut out = String::from("id\tx\ty\tkept\n");
    for p in placements {
        out.push_str(&format!("{}\t{}\t{}\t{}\n", ids[p.index], p.x, p.y, p.kept as u8));
    }
    out
}
