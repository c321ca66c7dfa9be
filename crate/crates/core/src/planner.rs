//! Parameter bookkeeping for the robustness bound: rectangle dimensions
//! `(n_j, Λ_j)`, the tail-sum sequence `k`, slice counts `m` and plan
//! validation.
//!
//! Index `j = 2i` is the vertical rectangle of windows of level `i + 1` and
//! `j = 2i + 1` the horizontal one; both have shorter side `l_i`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Coord;
use crate::gridgen::{derive_params, GridParams, ParamSeed};

/// Default ceiling for `k` when the tails vanish.
pub const DEFAULT_K_CAP: u64 = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RectDims {
    /// `(width, height)` of the vertical rectangle.
    pub vertical: (Coord, Coord),
    pub horizontal: (Coord, Coord),
    /// Shorter sides for `j = 2i, 2i + 1`.
    pub n: [Coord; 2],
    /// `⌈longer / shorter⌉` for `j = 2i, 2i + 1`.
    pub lambda: [Coord; 2],
}

fn ceil_div(a: Coord, b: Coord) -> Coord {
    (a + b - 1) / b
}

/// Dimensions of the two rectangles of index `i`; needs `params[i + 1]`.
pub fn rect_dimensions(params: &[GridParams], i: usize) -> RectDims {
    assert!(i + 1 < params.len(), "index {i} beyond the truncation");
    let (li, di, dn) = (params[i].l, params[i].d, params[i + 1].d);
    let vertical = (li, dn - li);
    let horizontal = (dn + di - li, li);
    let shape = |(w, h): (Coord, Coord)| (w.min(h), ceil_div(w.max(h), w.min(h)));
    let (nv, lv) = shape(vertical);
    let (nh, lh) = shape(horizontal);
    RectDims {
        vertical,
        horizontal,
        n: [nv, nh],
        lambda: [lv, lh],
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KSequence {
    pub k: Vec<u64>,
    /// `j_s` for `s = 0, 1, …` while it exists on the prefix.
    pub thresholds: Vec<usize>,
    /// Tail sums including the remainder estimate.
    pub tails: Vec<f64>,
    /// `Σ a_i k_i` on the prefix.
    pub weighted_sum: f64,
}

/// `k_i = s` for `j_s ≤ i < j_{s+1}`, where `j_s` is the least index whose
/// tail is below `2^{-s}`. The tail beyond the prefix is estimated by the
/// last term; `k` never exceeds `cap`.
pub fn construct_k(a: &[f64], cap: u64) -> KSequence {
    assert!(
        a.iter().all(|&x| x >= 0.0 && x.is_finite()),
        "weights must be finite and nonnegative"
    );
    let mut tails = vec![0.0; a.len()];
    let mut acc = a.last().copied().unwrap_or(0.0);
    for j in (0..a.len()).rev() {
        acc += a[j];
        tails[j] = acc;
    }
    let level = |t: f64| -> Option<u64> {
        // largest s ≤ cap with t < 2^{-s}
        (0..=cap).take_while(|&s| t < (-(s as f64)).exp2()).last()
    };
    let k: Vec<u64> = tails.iter().map(|&t| level(t).unwrap_or(0)).collect();
    let top = tails.iter().filter_map(|&t| level(t)).max();
    let thresholds = match top {
        Some(top) => (0..=top)
            .map(|s| {
                tails
                    .iter()
                    .position(|&t| level(t).is_some_and(|l| l >= s))
                    .unwrap()
            })
            .collect(),
        None => Vec::new(),
    };
    let weighted_sum = a.iter().zip(&k).map(|(&x, &k)| x * k as f64).sum();
    KSequence {
        k,
        thresholds,
        tails,
        weighted_sum,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Binding {
    /// Held at the previous value.
    Monotone,
    K,
    Margin,
    SliceSide,
    ShorterSide,
    /// Pinned to 1 by the layout.
    Pinned,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MChoice {
    pub m: Vec<usize>,
    /// The constraint that stopped each `m_j` from growing.
    pub binding: Vec<Binding>,
    /// Indices where `m` increases.
    pub increases: Vec<usize>,
    /// Growth is limited only by `k`, which is unbounded without truncation.
    pub unbounded: bool,
}

fn k_root(k: u64, gamma: f64) -> usize {
    let r = (k as f64).powf(1.0 / gamma);
    // guard against 2.9999999 for exact powers
    (r + 1e-9).floor().max(1.0) as usize
}

/// Whether `m` slices of a rectangle with shorter side `n` respect the
/// margin and the slice-width floor (only checked for an actual cut).
fn cut_ok(n: Coord, m: usize, nu0: u64) -> (bool, bool) {
    if m < 2 {
        return (true, true);
    }
    let m = m as Coord;
    (n > 2 * m * nu0 as Coord, n / m >= 3)
}

/// Largest admissible `m_j` index by index. `pinned[j]` forces `m_j = 1`,
/// and with it every earlier `m`.
pub fn choose_m(n: &[Coord], k: &[u64], gamma: f64, nu0: u64, pinned: &[bool]) -> Result<MChoice> {
    assert!(n.len() == k.len() && n.len() == pinned.len());
    assert!(gamma > 0.0 && nu0 >= 1);
    if !n.is_empty() && n.iter().all(|&nj| nj <= 2 * nu0 as Coord) {
        return Err(Error::Infeasible {
            j: 0,
            reason: format!("n_j / 2 > {nu0} fails at every index"),
        });
    }
    let mut m = Vec::with_capacity(n.len());
    let mut binding = Vec::with_capacity(n.len());
    // a pinned index caps every earlier index too, since m is nondecreasing
    let held: Vec<bool> = (0..n.len())
        .map(|j| pinned[j..].iter().any(|&p| p))
        .collect();
    let mut prev = 1usize;
    for j in 0..n.len() {
        let kmax = k_root(k[j], gamma);
        let top = if held[j] { 1 } else { kmax.min(n[j] as usize) };
        let admissible = |c: usize| c <= n[j] as usize && cut_ok(n[j], c, nu0) == (true, true);
        if !admissible(prev) {
            return Err(Error::Infeasible {
                j,
                reason: format!(
                    "m_j >= {prev} is required but a cut into {prev} does not fit n_j = {}",
                    n[j]
                ),
            });
        }
        let mut mj = prev;
        while mj < top && admissible(mj + 1) {
            mj += 1;
        }
        let next = mj + 1;
        let why = if held[j] {
            Binding::Pinned
        } else if kmax < prev {
            Binding::Monotone
        } else if next > kmax {
            Binding::K
        } else if next > n[j] as usize {
            Binding::ShorterSide
        } else if !cut_ok(n[j], next, nu0).0 {
            Binding::Margin
        } else {
            Binding::SliceSide
        };
        m.push(mj);
        binding.push(why);
        prev = mj;
    }
    let increases = (1..m.len()).filter(|&j| m[j] > m[j - 1]).collect();
    let unbounded = binding.last().is_some_and(|b| *b == Binding::K);
    Ok(MChoice {
        m,
        binding,
        increases,
        unbounded,
    })
}

/// Horizontal indices whose rectangle has a `next` inside the truncation
/// (`j = 2i + 1` with `i ≤ K - 2`) are kept whole: a cut there would put the
/// fold detour of a child horizontal inside a vertical that itself folds.
pub fn pinned_indices(depth: usize) -> Vec<bool> {
    (0..2 * depth)
        .map(|j| j % 2 == 1 && j / 2 + 2 <= depth)
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamPlan {
    pub seed: ParamSeed,
    pub gamma: f64,
    pub nu0: u64,
    pub c: f64,
    pub params: Vec<GridParams>,
    pub dims: Vec<RectDims>,
    pub n: Vec<Coord>,
    pub lambda: Vec<Coord>,
    pub a: Vec<f64>,
    pub k: KSequence,
    pub m: Vec<usize>,
    /// `m` was supplied rather than chosen.
    pub explicit_m: bool,
    pub choice: Option<MChoice>,
}

impl ParamPlan {
    /// Derives dimensions, weights and `k`; takes `m` from `m_override` or
    /// from [`choose_m`].
    pub fn new(
        seed: ParamSeed,
        gamma: f64,
        nu0: u64,
        c: f64,
        m_override: Option<Vec<usize>>,
        k_cap: u64,
    ) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "gamma = {gamma} must be positive"
            )));
        }
        if nu0 < 1 {
            return Err(Error::InvalidParams(
                "nu0 must be a positive integer".into(),
            ));
        }
        if !(c > 0.0 && c < 1.0) {
            return Err(Error::InvalidParams(format!("c = {c} must lie in (0, 1)")));
        }
        let params = derive_params(&seed)?;
        let depth = seed.depth();
        let dims: Vec<RectDims> = (0..depth).map(|i| rect_dimensions(&params, i)).collect();
        let n: Vec<Coord> = dims.iter().flat_map(|d| d.n).collect();
        let lambda: Vec<Coord> = dims.iter().flat_map(|d| d.lambda).collect();
        let a: Vec<f64> = n
            .iter()
            .zip(&lambda)
            .map(|(&n, &l)| l as f64 / (n as f64).powf(gamma))
            .collect();
        let k = construct_k(&a, k_cap);
        let (m, choice, explicit_m) = match m_override {
            Some(m) => {
                if m.len() != n.len() {
                    return Err(Error::InvalidParams(format!(
                        "m has {} entries, the plan has {} indices",
                        m.len(),
                        n.len()
                    )));
                }
                (m, None, true)
            }
            None => {
                let choice = choose_m(&n, &k.k, gamma, nu0, &pinned_indices(depth))?;
                (choice.m.clone(), Some(choice), false)
            }
        };
        Ok(Self {
            seed,
            gamma,
            nu0,
            c,
            params,
            dims,
            n,
            lambda,
            a,
            k,
            m,
            explicit_m,
            choice,
        })
    }

    pub fn depth(&self) -> usize {
        self.seed.depth()
    }

    /// Exponent `m^γ Λ / n^γ` of the crossing bound for index `j`.
    pub fn exponent(&self, j: usize) -> f64 {
        (self.m[j] as f64).powf(self.gamma) * self.lambda[j] as f64
            / (self.n[j] as f64).powf(self.gamma)
    }

    /// The same exponent computed per slice: `Λ / (n/m)^γ`.
    pub fn slice_exponent(&self, j: usize) -> f64 {
        self.lambda[j] as f64 / (self.n[j] as f64 / self.m[j] as f64).powf(self.gamma)
    }

    /// `c^{m^γ Λ / n^γ}`.
    pub fn crossing_bound(&self, j: usize) -> f64 {
        self.c.powf(self.exponent(j))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanReport {
    pub pass: bool,
    /// `Σ 1/L_i` over the frame counts of the plan.
    pub inverse_frame_sum: f64,
    /// `Σ m_j^γ Λ_j / n_j^γ` over the plan.
    pub target_series: f64,
    pub weighted_k_sum: f64,
    pub bounds: Vec<f64>,
    /// Largest `|c^{Λ/(n/m)^γ} - c^{m^γΛ/n^γ}|` over the plan.
    pub scaling_error: f64,
    pub warnings: Vec<String>,
}

fn violation(j: usize, reason: impl Into<String>) -> Error {
    Error::PlanInvariant {
        j,
        reason: reason.into(),
    }
}

/// Checks every hard invariant of the plan and collects the series values.
/// `strict` requires the shorter sides `l_i` to increase strictly with `i`.
#[allow(clippy::needless_range_loop)]
pub fn validate_plan(plan: &ParamPlan, strict: bool) -> Result<PlanReport> {
    let depth = plan.depth();
    let pinned = pinned_indices(depth);
    let mut warnings = Vec::new();
    for j in 0..plan.n.len() {
        let (n, m) = (plan.n[j], plan.m[j]);
        if m == 0 {
            return Err(violation(j, "m_j must be at least 1"));
        }
        if j > 0 && m < plan.m[j - 1] {
            return Err(violation(
                j,
                format!("m decreases from {} to {m}", plan.m[j - 1]),
            ));
        }
        if m as Coord > n {
            return Err(violation(j, format!("m_j = {m} exceeds n_j = {n}")));
        }
        let (margin, side) = cut_ok(n, m, plan.nu0);
        if !margin {
            return Err(violation(
                j,
                format!("n_j / (2 m_j) = {n}/{} is not above {}", 2 * m, plan.nu0),
            ));
        }
        if !side {
            return Err(violation(
                j,
                format!("slices of {n} / {m} are thinner than 3"),
            ));
        }
        if pinned[j] && m != 1 {
            return Err(violation(
                j,
                format!("m_j = {m} but horizontal index {j} must stay uncut"),
            ));
        }
        if j > 0 && n < plan.n[j - 1] {
            return Err(violation(
                j,
                format!("n decreases from {} to {n}", plan.n[j - 1]),
            ));
        }
        if strict && j % 2 == 0 && j > 0 && n <= plan.n[j - 2] {
            return Err(violation(
                j,
                format!(
                    "strict mode: n_{j} = {n} does not exceed n_{} = {}",
                    j - 2,
                    plan.n[j - 2]
                ),
            ));
        }
        let kmax = k_root(plan.k.k[j], plan.gamma);
        if m > kmax {
            let msg = format!("m_{j} = {m} exceeds k_j^(1/gamma) = {kmax}");
            if plan.explicit_m {
                warnings.push(msg);
            } else {
                return Err(violation(j, msg));
            }
        }
    }
    let frames = &plan.seed.frames;
    let inverse_frame_sum: f64 = frames.iter().map(|&l| 1.0 / l as f64).sum();
    if let Some(i) = (1..frames.len()).find(|&i| frames[i] < frames[i - 1]) {
        warnings.push(format!(
            "frame counts decrease at L_{} (sum of 1/L_i over the plan is {inverse_frame_sum:.3})",
            i + 1
        ));
    }
    warnings.push(format!(
        "sum of 1/L_i = {inverse_frame_sum:.4} on {} terms; finiteness is a tail property",
        frames.len()
    ));
    let bounds: Vec<f64> = (0..plan.n.len()).map(|j| plan.crossing_bound(j)).collect();
    let scaling_error = (0..plan.n.len())
        .map(|j| (plan.c.powf(plan.slice_exponent(j)) - bounds[j]).abs())
        .fold(0.0, f64::max);
    Ok(PlanReport {
        pass: true,
        inverse_frame_sum,
        target_series: (0..plan.n.len()).map(|j| plan.exponent(j)).sum(),
        weighted_k_sum: plan.k.weighted_sum,
        bounds,
        scaling_error,
        warnings,
    })
}
