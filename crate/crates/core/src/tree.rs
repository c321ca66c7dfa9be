//! The overlap tree on catalog rectangles, rays along `next`, and the
//! bag-and-injection forest built on top of any `next` map.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Orientation;
use crate::gridgen::RectCatalog;
use crate::rng::{stream, Purpose};
use crate::unionfind::DisjointSet;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RectTree {
    /// Overlap neighbours of each catalog entry, sorted.
    pub adjacency: Vec<Vec<usize>>,
    /// `next(·)`; `None` at the truncation frontier.
    pub next: Vec<Option<usize>>,
}

impl RectTree {
    pub fn len(&self) -> usize {
        self.next.len()
    }

    pub fn is_empty(&self) -> bool {
        self.next.is_empty()
    }

    pub fn is_frontier(&self, node: usize) -> bool {
        self.next[node].is_none()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Entries whose `next` is `node`.
    pub fn children(&self, node: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&c| self.next[c] == Some(node))
    }
}

/// Intersection graph of the catalog with `next` derived from the index
/// rules: a vertical's parent is the horizontal neighbour with equal `i`, a
/// horizontal's parent the vertical neighbour with `i + 1`.
pub fn build_overlap_tree(catalog: &RectCatalog) -> Result<RectTree> {
    let n = catalog.entries.len();
    let mut adjacency = vec![Vec::new(); n];
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&k| catalog.entries[k].rect.h.lo);
    for (pos, &a) in order.iter().enumerate() {
        let ra = &catalog.entries[a].rect;
        for &b in &order[pos + 1..] {
            let rb = &catalog.entries[b].rect;
            if rb.h.lo > ra.h.hi {
                break;
            }
            if !ra.is_disjoint(rb) {
                adjacency[a].push(b);
                adjacency[b].push(a);
            }
        }
    }
    for list in &mut adjacency {
        list.sort_unstable();
    }

    let mut next = vec![None; n];
    for (id, e) in catalog.entries.iter().enumerate() {
        let (want, want_i) = match e.orientation() {
            Orientation::Vertical => (Orientation::Horizontal, e.i),
            Orientation::Horizontal => (Orientation::Vertical, e.i + 1),
            Orientation::Untagged => {
                return Err(Error::StructuralAudit {
                    entry: id,
                    reason: "untagged rectangle".into(),
                })
            }
        };
        let candidates: Vec<usize> = adjacency[id]
            .iter()
            .copied()
            .filter(|&c| catalog.entries[c].orientation() == want && catalog.entries[c].i == want_i)
            .collect();
        match candidates.as_slice() {
            [] if e.is_vertical() => {
                return Err(Error::StructuralAudit {
                    entry: id,
                    reason: "vertical without its horizontal".into(),
                })
            }
            [] => {}
            [p] => next[id] = Some(*p),
            _ => {
                return Err(Error::StructuralAudit {
                    entry: id,
                    reason: format!("{} candidate parents", candidates.len()),
                })
            }
        }
    }

    // every overlap must be a parent link, otherwise the graph has a cycle
    for (a, list) in adjacency.iter().enumerate() {
        for &b in list {
            if next[a] != Some(b) && next[b] != Some(a) {
                return Err(Error::StructuralAudit {
                    entry: a,
                    reason: format!("overlap with {b} is not a parent link"),
                });
            }
        }
    }
    Ok(RectTree { adjacency, next })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ray {
    pub entries: Vec<usize>,
    /// The frontier (or a clipped rectangle) was reached before `maxlen`.
    pub truncated: bool,
}

/// Follows `next` from `start` for at most `maxlen` entries.
pub fn ray(tree: &RectTree, catalog: &RectCatalog, start: usize, maxlen: usize) -> Result<Ray> {
    if catalog.entries[start].clipped {
        return Err(Error::Clipped(start));
    }
    let mut entries = vec![start];
    let mut cur = start;
    while entries.len() < maxlen {
        match tree.next[cur] {
            Some(p) if !catalog.entries[p].clipped => {
                entries.push(p);
                cur = p;
            }
            _ => {
                return Ok(Ray {
                    entries,
                    truncated: true,
                })
            }
        }
    }
    Ok(Ray {
        entries,
        truncated: false,
    })
}

/// Whether the forward chain of `node` stays unclipped and ends at a
/// horizontal of the top truncation level.
pub fn has_full_chain(tree: &RectTree, catalog: &RectCatalog, node: usize) -> bool {
    let depth = catalog.depth();
    let mut cur = node;
    loop {
        let e = &catalog.entries[cur];
        if e.clipped {
            return false;
        }
        match tree.next[cur] {
            Some(p) => cur = p,
            None => return !e.is_vertical() && e.level == depth,
        }
    }
}

/// Bags of slots with injections `β_v: B_v → B_next(v)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbstractForest {
    /// Bag of node `v` is `offsets[v]..offsets[v + 1]`.
    pub offsets: Vec<usize>,
    /// Owner node of each slot.
    pub owner: Vec<usize>,
    /// `β` of each slot; `None` for slots of frontier nodes.
    pub beta: Vec<Option<usize>>,
    pub labels: Vec<u32>,
    pub component_count: usize,
}

impl AbstractForest {
    pub fn bag(&self, node: usize) -> std::ops::Range<usize> {
        self.offsets[node]..self.offsets[node + 1]
    }

    pub fn slot_count(&self) -> usize {
        self.owner.len()
    }

    /// Position of a slot within its owner's bag.
    pub fn position(&self, slot: usize) -> usize {
        slot - self.offsets[self.owner[slot]]
    }

    /// Number of components among the given slots.
    pub fn components_among(&self, slots: impl IntoIterator<Item = usize>) -> usize {
        let mut seen: Vec<u32> = slots.into_iter().map(|s| self.labels[s]).collect();
        seen.sort_unstable();
        seen.dedup();
        seen.len()
    }
}

/// Builds `F_β` for the forest given by `next` with `|B_v| = bag_sizes[v]`.
/// Each `β_v` is uniform among injections, drawn slot by slot without
/// replacement from stream `(seed, v)`.
pub fn build_abstract_forest(
    next: &[Option<usize>],
    bag_sizes: &[usize],
    seed: u64,
) -> Result<AbstractForest> {
    assert_eq!(next.len(), bag_sizes.len(), "one bag size per node");
    for (v, p) in next.iter().enumerate() {
        if let Some(p) = *p {
            if bag_sizes[v] > bag_sizes[p] {
                return Err(Error::BagMonotonicity {
                    node: v,
                    m: bag_sizes[v],
                    m_next: bag_sizes[p],
                });
            }
        }
    }
    let mut offsets = Vec::with_capacity(next.len() + 1);
    offsets.push(0);
    for &m in bag_sizes {
        offsets.push(offsets.last().unwrap() + m);
    }
    let total = *offsets.last().unwrap();
    let mut owner = Vec::with_capacity(total);
    for (v, &m) in bag_sizes.iter().enumerate() {
        owner.extend(std::iter::repeat_n(v, m));
    }
    let mut beta = vec![None; total];
    let mut ds = DisjointSet::new(total);
    for (v, p) in next.iter().enumerate() {
        let Some(p) = *p else { continue };
        let mut rng = stream(seed, Purpose::Beta, v as u64);
        let mut pool: Vec<usize> = (offsets[p]..offsets[p + 1]).collect();
        for (k, s) in (offsets[v]..offsets[v + 1]).enumerate() {
            let pick = rng.random_range(k..pool.len());
            pool.swap(k, pick);
            beta[s] = Some(pool[k]);
            ds.union(s, pool[k]);
        }
    }
    let (labels, component_count) = ds.labels();
    Ok(AbstractForest {
        offsets,
        owner,
        beta,
        labels,
        component_count,
    })
}
