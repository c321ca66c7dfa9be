//! Nested `(l, d)`-grids, windows, forks and the indexed rectangle catalog.
//!
//! An `(l, d)`-grid has period `l + d` along each axis: columns `x` with
//! `(x - ox) mod (l + d) < l` are strip columns, the rest are square columns.
//! The strips of grid `i + 1` are square-columns (and square-rows) of grid
//! `i`, so a square of grid `i + 1` is cut by the strips of grid `i` into
//! `L_{i+1}` vertical and `L_{i+1}` horizontal frames: that square is a
//! window of level `i + 1`.
//!
//! The fork of a window is every vertical frame except the leftmost, trimmed
//! to `d_{i+1} - l_i` rows, together with one horizontal frame extended
//! rightward by `d_i` columns into the adjacent strip of grid `i + 1`.
//! Odd window levels use the bottom frame and keep the bottom rows of the
//! verticals; even levels use the top frame and keep the top rows. The
//! alternation keeps the fold detours of consecutive levels apart.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{classify_pair, Block, Coord, Orientation, PairClass, PlanarRect};
use crate::rng::{stream, Purpose};

/// Seed parameters of the construction: `(l0, d0)`, the frame counts
/// `L_1..L_K` and the RNG seed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamSeed {
    pub l0: Coord,
    pub d0: Coord,
    pub frames: Vec<Coord>,
    pub seed: u64,
}

impl ParamSeed {
    pub fn new(l0: Coord, d0: Coord, frames: Vec<Coord>, seed: u64) -> Self {
        Self {
            l0,
            d0,
            frames,
            seed,
        }
    }

    /// Truncation level `K`.
    pub fn depth(&self) -> usize {
        self.frames.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.l0 < 1 || self.d0 < 1 {
            return Err(Error::InvalidParams(format!(
                "l0 and d0 must be positive, got ({}, {})",
                self.l0, self.d0
            )));
        }
        if self.frames.is_empty() {
            return Err(Error::InvalidParams(
                "need at least one frame count L_1".into(),
            ));
        }
        if let Some((k, &l)) = self.frames.iter().enumerate().find(|(_, &l)| l < 2) {
            return Err(Error::InvalidParams(format!(
                "L_{} = {l} must be at least 2",
                k + 1
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridParams {
    /// Strip width.
    pub l: Coord,
    /// Square side.
    pub d: Coord,
}

impl GridParams {
    pub fn period(&self) -> Coord {
        self.l + self.d
    }
}

/// `(l_i, d_i)` for `i = 0..=K` via `l_{i+1} = d_i`,
/// `d_{i+1} = L_{i+1} l_i + (L_{i+1} - 1) d_i`.
pub fn derive_params(seed: &ParamSeed) -> Result<Vec<GridParams>> {
    seed.validate()?;
    let mut out = vec![GridParams {
        l: seed.l0,
        d: seed.d0,
    }];
    for (k, &frames) in seed.frames.iter().enumerate() {
        let prev = out[k];
        let d = frames
            .checked_mul(prev.l)
            .and_then(|a| {
                (frames - 1)
                    .checked_mul(prev.d)
                    .and_then(|b| a.checked_add(b))
            })
            .filter(|d| d.checked_add(prev.d).is_some())
            .ok_or(Error::Overflow { level: k + 1 })?;
        out.push(GridParams { l: prev.d, d });
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridInstance {
    pub level: usize,
    pub l: Coord,
    pub d: Coord,
    /// Offsets modulo the period; column `ox` is the first column of a strip.
    pub offset: (Coord, Coord),
}

impl GridInstance {
    pub fn period(&self) -> Coord {
        self.l + self.d
    }

    fn phase(&self, x: Coord, o: Coord) -> Coord {
        (x - o).rem_euclid(self.period())
    }

    pub fn is_strip_column(&self, x: Coord) -> bool {
        self.phase(x, self.offset.0) < self.l
    }

    pub fn is_strip_row(&self, y: Coord) -> bool {
        self.phase(y, self.offset.1) < self.l
    }

    fn block_in_squares(&self, b: &Block, o: Coord) -> bool {
        let r = self.phase(b.lo, o);
        r >= self.l && r + b.len() <= self.period()
    }

    /// Whether `rect` lies inside a single square of this grid.
    pub fn rect_in_square(&self, rect: &PlanarRect) -> bool {
        self.block_in_squares(&rect.h, self.offset.0)
            && self.block_in_squares(&rect.v, self.offset.1)
    }

    /// Whether `b` is exactly one vertical strip segment of this grid.
    pub fn is_vertical_strip(&self, b: &Block) -> bool {
        self.phase(b.lo, self.offset.0) == 0 && b.len() == self.l
    }

    /// Starting coordinates of the squares whose span fits inside `range`.
    fn square_starts(&self, range: &Block, o: Coord) -> Vec<Coord> {
        let first = range.lo + (o + self.l - range.lo).rem_euclid(self.period());
        (0..)
            .map(|k| first + k * self.period())
            .take_while(|s| s + self.d - 1 <= range.hi)
            .collect()
    }
}

/// Levels `0..=K`. Level 0 is uniform over the `(l0 + d0)²` translates;
/// level `i + 1` is uniform over the `L_{i+1}` translates per axis whose
/// strips fall on square-columns of level `i`.
pub fn sample_nested_grids(seed: &ParamSeed) -> Result<Vec<GridInstance>> {
    let params = derive_params(seed)?;
    let mut rng = stream(seed.seed, Purpose::Grids, 0);
    let p0 = params[0].period();
    let mut grids = vec![GridInstance {
        level: 0,
        l: params[0].l,
        d: params[0].d,
        offset: (rng.random_range(0..p0), rng.random_range(0..p0)),
    }];
    for (k, &frames) in seed.frames.iter().enumerate() {
        let prev = grids[k];
        let next = params[k + 1];
        let mut axis = |o: Coord| {
            let t = rng.random_range(0..frames);
            (o + prev.l + t * prev.period()).rem_euclid(next.period())
        };
        let offset = (axis(prev.offset.0), axis(prev.offset.1));
        grids.push(GridInstance {
            level: k + 1,
            l: next.l,
            d: next.d,
            offset,
        });
    }
    Ok(grids)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FrameSide {
    Bottom,
    Top,
}

impl FrameSide {
    pub fn for_level(level: usize) -> Self {
        if level % 2 == 1 {
            FrameSide::Bottom
        } else {
            FrameSide::Top
        }
    }
}

/// A square of grid `level` cut into frames by the strips of grid `level - 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub level: usize,
    pub square: PlanarRect,
    pub vframes: Vec<PlanarRect>,
    pub hframes: Vec<PlanarRect>,
    pub side: FrameSide,
}

impl Window {
    /// Window of `level` whose square has lower-left corner `(x, y)`.
    /// `params` must hold at least `level + 1` entries.
    pub fn at(level: usize, x: Coord, y: Coord, params: &[GridParams]) -> Self {
        assert!(
            level >= 1 && level < params.len(),
            "window level out of range"
        );
        let inner = params[level - 1];
        let side = params[level].d;
        let count = (side + inner.d) / inner.period();
        let square = PlanarRect::from_bounds(x, x + side - 1, y, y + side - 1);
        let vframes = (0..count)
            .map(|k| PlanarRect::new(Block::with_len(x + k * inner.period(), inner.l), square.v))
            .collect();
        let hframes = (0..count)
            .map(|k| PlanarRect::new(square.h, Block::with_len(y + k * inner.period(), inner.l)))
            .collect();
        Self {
            level,
            square,
            vframes,
            hframes,
            side: FrameSide::for_level(level),
        }
    }

    pub fn index(&self) -> usize {
        self.level - 1
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ForkRects {
    pub verticals: Vec<PlanarRect>,
    pub extended_horizontal: PlanarRect,
}

/// Fork verticals and the extended horizontal of a window.
pub fn fork_rects(w: &Window, params: &[GridParams]) -> ForkRects {
    let inner = params[w.level - 1];
    let side = w.square.width();
    let (x, y) = (w.square.h.lo, w.square.v.lo);
    let keep = side - inner.l;
    let (vrows, hrows) = match w.side {
        FrameSide::Bottom => (Block::with_len(y, keep), Block::with_len(y, inner.l)),
        FrameSide::Top => (
            Block::new(y + inner.l, y + side - 1),
            Block::new(y + side - inner.l, y + side - 1),
        ),
    };
    let verticals = w.vframes[1..]
        .iter()
        .map(|f| PlanarRect::new(f.h, vrows).tagged(Orientation::Vertical))
        .collect();
    let extended_horizontal =
        PlanarRect::new(Block::new(x + inner.l, x + side - 1 + inner.d), hrows)
            .tagged(Orientation::Horizontal);
    ForkRects {
        verticals,
        extended_horizontal,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub id: usize,
    pub rect: PlanarRect,
    /// Window level; `i = level - 1`.
    pub level: usize,
    pub i: usize,
    pub j: usize,
    pub window: usize,
    /// The rectangle leaves the viewport.
    pub clipped: bool,
}

impl CatalogEntry {
    pub fn orientation(&self) -> Orientation {
        self.rect.orientation
    }

    pub fn is_vertical(&self) -> bool {
        self.rect.orientation == Orientation::Vertical
    }

    /// One line: `level orientation i j h.lo h.hi v.lo v.hi flags`.
    pub fn record(&self) -> String {
        format!(
            "{} {} {} {} {} {} {} {} {}",
            self.level,
            self.rect.orientation.letter(),
            self.i,
            self.j,
            self.rect.h.lo,
            self.rect.h.hi,
            self.rect.v.lo,
            self.rect.v.hi,
            if self.clipped { "clipped" } else { "-" }
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RectCatalog {
    pub entries: Vec<CatalogEntry>,
    pub windows: Vec<Window>,
    pub viewport: PlanarRect,
    pub grids: Vec<GridInstance>,
    pub params: Vec<GridParams>,
}

impl RectCatalog {
    /// Truncation level `K`.
    pub fn depth(&self) -> usize {
        self.params.len() - 1
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn records(&self) -> String {
        let mut out = String::from("# level orientation i j h.lo h.hi v.lo v.hi flags\n");
        for e in &self.entries {
            out.push_str(&e.record());
            out.push('\n');
        }
        out
    }

    /// Columns of the extension of horizontal entry `id` past its window.
    pub fn extension_block(&self, id: usize) -> Option<Block> {
        let e = &self.entries[id];
        if e.is_vertical() {
            return None;
        }
        let w = &self.windows[e.window];
        Some(Block::new(w.square.h.hi + 1, e.rect.h.hi))
    }

    /// Fork hull of the first top-level window whose horizontal is not
    /// clipped: from the end of its leftmost frame to the right edge of its
    /// square, over the rows its verticals keep.
    pub fn default_span_box(&self) -> Option<PlanarRect> {
        let depth = self.depth();
        let e = self
            .entries
            .iter()
            .find(|e| e.level == depth && !e.is_vertical() && !e.clipped)?;
        let w = &self.windows[e.window];
        let rows = self
            .entries
            .iter()
            .find(|v| v.window == e.window && v.is_vertical())
            .map_or(w.square.v, |v| v.rect.v);
        Some(PlanarRect::new(
            Block::new(e.rect.h.lo, w.square.h.hi),
            rows,
        ))
    }

    /// Catalog with a single window and no grid context; used by tests and
    /// renderers. The extension is never clipped.
    pub fn single_window(w: &Window, params: &[GridParams]) -> Self {
        let fork = fork_rects(w, params);
        let mut entries = Vec::new();
        push_fork(&mut entries, w, 0, &fork, false);
        let viewport = fork.verticals.iter().fold(w.square, |acc, r| hull(&acc, r));
        let viewport = hull(&viewport, &fork.extended_horizontal);
        Self {
            entries,
            windows: vec![w.clone()],
            viewport,
            grids: Vec::new(),
            params: params[..=w.level].to_vec(),
        }
    }
}

fn hull(a: &PlanarRect, b: &PlanarRect) -> PlanarRect {
    PlanarRect::from_bounds(
        a.h.lo.min(b.h.lo),
        a.h.hi.max(b.h.hi),
        a.v.lo.min(b.v.lo),
        a.v.hi.max(b.v.hi),
    )
}

fn push_fork(
    entries: &mut Vec<CatalogEntry>,
    w: &Window,
    window: usize,
    fork: &ForkRects,
    h_clipped: bool,
) {
    let i = w.index();
    for v in &fork.verticals {
        entries.push(CatalogEntry {
            id: entries.len(),
            rect: *v,
            level: w.level,
            i,
            j: 2 * i,
            window,
            clipped: false,
        });
    }
    entries.push(CatalogEntry {
        id: entries.len(),
        rect: fork.extended_horizontal,
        level: w.level,
        i,
        j: 2 * i + 1,
        window,
        clipped: h_clipped,
    });
}

/// Samples the grids and collects the fork rectangles of every window that
/// lies in the viewport and inside a square of every higher grid.
pub fn build_catalog(seed: &ParamSeed, viewport: PlanarRect) -> Result<RectCatalog> {
    let params = derive_params(seed)?;
    let grids = sample_nested_grids(seed)?;
    let depth = seed.depth();
    let mut entries = Vec::new();
    let mut windows = Vec::new();
    for level in 1..=depth {
        let g = &grids[level];
        let ys = g.square_starts(&viewport.v, g.offset.1);
        let xs = g.square_starts(&viewport.h, g.offset.0);
        for &y in &ys {
            for &x in &xs {
                let w = Window::at(level, x, y, &params);
                if !grids[level + 1..]
                    .iter()
                    .all(|h| h.rect_in_square(&w.square))
                {
                    continue;
                }
                let fork = fork_rects(&w, &params);
                let clipped = !viewport.contains_rect(&fork.extended_horizontal);
                push_fork(&mut entries, &w, windows.len(), &fork, clipped);
                windows.push(w);
            }
        }
    }
    if !windows.iter().any(|w| w.level == depth) {
        return Err(Error::NoCompleteWindow(viewport.to_string()));
    }
    Ok(RectCatalog {
        entries,
        windows,
        viewport,
        grids,
        params,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuditViolation {
    pub a: usize,
    pub b: usize,
    pub reason: String,
}

/// Pairwise catalog audit: same-orientation entries disjoint, every
/// vertical/horizontal intersection well-joined in the right direction.
pub fn audit_catalog(catalog: &RectCatalog) -> Vec<AuditViolation> {
    let mut order: Vec<usize> = (0..catalog.entries.len()).collect();
    order.sort_by_key(|&k| catalog.entries[k].rect.h.lo);
    let mut out = Vec::new();
    for (pos, &a) in order.iter().enumerate() {
        let ra = &catalog.entries[a].rect;
        for &b in &order[pos + 1..] {
            let rb = &catalog.entries[b].rect;
            if rb.h.lo > ra.h.hi {
                break;
            }
            if ra.is_disjoint(rb) {
                continue;
            }
            let reason = match (ra.orientation, rb.orientation) {
                (x, y) if x == y => Some("same orientation entries intersect".to_string()),
                (Orientation::Vertical, _) => (classify_pair(ra, rb) != PairClass::V2H)
                    .then(|| "V-H pair not well-joined".to_string()),
                _ => (classify_pair(rb, ra) != PairClass::V2H)
                    .then(|| "V-H pair not well-joined".to_string()),
            };
            if let Some(reason) = reason {
                out.push(AuditViolation {
                    a: a.min(b),
                    b: a.max(b),
                    reason,
                });
            }
        }
    }
    out
}
