//! Independent oracles shared by the integration tests.

/// Brute-force crossing probability: enumerate all configurations of the
/// rectangle's edges and flood-fill from the source side.
pub fn oracle_crossing(w: i64, h: i64, horizontal: bool, p: f64) -> f64 {
    let idx = |x: i64, y: i64| (y * (w + 1) + x) as usize;
    let mut edges = Vec::new();
    for y in 0..=h {
        for x in 0..=w {
            if x < w {
                edges.push((idx(x, y), idx(x + 1, y)));
            }
            if y < h {
                edges.push((idx(x, y), idx(x, y + 1)));
            }
        }
    }
    let n = ((w + 1) * (h + 1)) as usize;
    let m = edges.len();
    assert!(m <= 20);
    // Crossing configurations tallied by open-edge count.
    let mut hits = vec![0u64; m + 1];
    for mask in 0u32..1 << m {
        let mut seen = vec![false; n];
        let mut stack: Vec<usize> = if horizontal {
            (0..=h).map(|y| idx(0, y)).collect()
        } else {
            (0..=w).map(|x| idx(x, 0)).collect()
        };
        for &s in &stack {
            seen[s] = true;
        }
        while let Some(v) = stack.pop() {
            for (k, &(a, b)) in edges.iter().enumerate() {
                if mask >> k & 1 == 1 && (a == v || b == v) {
                    let u = if a == v { b } else { a };
                    if !seen[u] {
                        seen[u] = true;
                        stack.push(u);
                    }
                }
            }
        }
        let hit = if horizontal {
            (0..=h).any(|y| seen[idx(w, y)])
        } else {
            (0..=w).any(|x| seen[idx(x, h)])
        };
        if hit {
            hits[mask.count_ones() as usize] += 1;
        }
    }
    hits.iter()
        .enumerate()
        .map(|(k, &c)| c as f64 * p.powi(k as i32) * (1.0 - p).powi((m - k) as i32))
        .sum()
}
