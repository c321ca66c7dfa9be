//! Disjoint-set forest with path compression and union by rank.

#[derive(Clone, Debug)]
pub struct DisjointSet {
    parent: Vec<u32>,
    rank: Vec<u8>,
}

impl DisjointSet {
    pub fn new(n: usize) -> Self {
        assert!(n <= u32::MAX as usize, "disjoint set too large");
        Self {
            parent: (0..n as u32).collect(),
            rank: vec![0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn find(&mut self, node: usize) -> usize {
        let mut root = node as u32;
        while self.parent[root as usize] != root {
            root = self.parent[root as usize];
        }
        let mut node = node as u32;
        while self.parent[node as usize] != root {
            let next = self.parent[node as usize];
            self.parent[node as usize] = root;
            node = next;
        }
        root as usize
    }

    /// Merges the sets of `a` and `b`; returns true if they were distinct.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let mut ra = self.find(a);
        let mut rb = self.find(b);
        if ra == rb {
            return false;
        }
        if self.rank[ra] < self.rank[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra as u32;
        if self.rank[ra] == self.rank[rb] {
            self.rank[ra] = self.rank[ra].saturating_add(1);
        }
        true
    }

    pub fn same(&mut self, a: usize, b: usize) -> bool {
        self.find(a) == self.find(b)
    }

    /// Dense component labels `0..k` in order of first appearance, plus `k`.
    pub fn labels(&mut self) -> (Vec<u32>, usize) {
        let n = self.len();
        let mut map = vec![u32::MAX; n];
        let mut labels = Vec::with_capacity(n);
        let mut next = 0u32;
        for v in 0..n {
            let r = self.find(v);
            if map[r] == u32::MAX {
                map[r] = next;
                next += 1;
            }
            labels.push(map[r]);
        }
        (labels, next as usize)
    }

    pub fn count_sets(&mut self) -> usize {
        (0..self.len()).filter(|&v| self.find(v) == v).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unions_merge_and_labels_are_dense() {
        let mut ds = DisjointSet::new(5);
        assert!(ds.union(0, 3));
        assert!(!ds.union(3, 0));
        assert!(ds.union(4, 1));
        assert!(ds.same(0, 3));
        assert!(!ds.same(0, 1));
        let (labels, k) = ds.labels();
        assert_eq!(k, 3);
        assert_eq!(labels, vec![0, 1, 2, 0, 1]);
        assert_eq!(ds.count_sets(), 3);
    }
}
