//! Dynamic interval indexes answering "which stored intervals intersect
//! `[lo, hi]`". Intervals are inclusive and identified by a caller-chosen id.

use std::collections::{BTreeSet, HashMap};

pub trait IntervalIndex: Default {
    /// Stores `[lo, hi]` under `id`. The id must not already be present.
    fn insert(&mut self, id: usize, lo: usize, hi: usize);
    /// Removes `id`; returns false if it was not present.
    fn remove(&mut self, id: usize) -> bool;
    /// Ids of all stored intervals intersecting `[lo, hi]`, ascending.
    fn query(&self, lo: usize, hi: usize) -> Vec<usize>;
    fn len(&self) -> usize;
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Intervals kept sorted by lower bound; queries scan the prefix whose
/// lower bound is at most `hi`.
#[derive(Debug, Clone, Default)]
pub struct SortedList {
    items: Vec<(usize, usize, usize)>,
}

impl IntervalIndex for SortedList {
    fn insert(&mut self, id: usize, lo: usize, hi: usize) {
        let pos = self.items.partition_point(|&(l, _, i)| (l, i) < (lo, id));
        self.items.insert(pos, (lo, id, hi));
    }

    fn remove(&mut self, id: usize) -> bool {
        match self.items.iter().position(|&(_, i, _)| i == id) {
            Some(pos) => {
                self.items.remove(pos);
                true
            }
            None => false,
        }
    }

    fn query(&self, lo: usize, hi: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .items
            .iter()
            .take_while(|&&(l, _, _)| l <= hi)
            .filter(|&&(_, _, h)| h >= lo)
            .map(|&(_, id, _)| id)
            .collect();
        out.sort_unstable();
        out
    }

    fn len(&self) -> usize {
        self.items.len()
    }
}

#[derive(Debug, Clone, Default)]
struct Node {
    ids: Vec<usize>,
    children: Option<(u32, u32)>,
}

/// Segment tree over a power-of-two coordinate span that doubles on demand.
///
/// Each interval is stored in the O(log n) canonical nodes covering it, so
/// a point stab walks one root-to-leaf path. An interval query `[lo, hi]` is
/// the stab at `lo` plus every interval starting in `(lo, hi]`, found in a
/// sorted set of lower bounds. Both updates are O(log n), queries
/// O(log n + k).
#[derive(Debug, Clone)]
pub struct SegmentTree {
    nodes: Vec<Node>,
    root: u32,
    span: usize,
    starts: BTreeSet<(usize, usize)>,
    intervals: HashMap<usize, (usize, usize)>,
}

impl Default for SegmentTree {
    fn default() -> Self {
        SegmentTree {
            nodes: vec![Node::default()],
            root: 0,
            span: 1,
            starts: BTreeSet::new(),
            intervals: HashMap::new(),
        }
    }
}

impl SegmentTree {
    fn alloc(&mut self) -> u32 {
        self.nodes.push(Node::default());
        (self.nodes.len() - 1) as u32
    }

    fn children(&mut self, node: u32) -> (u32, u32) {
        if let Some(c) = self.nodes[node as usize].children {
            return c;
        }
        let c = (self.alloc(), self.alloc());
        self.nodes[node as usize].children = Some(c);
        c
    }

    fn grow_to(&mut self, hi: usize) {
        while hi >= self.span {
            let right = self.alloc();
            let root = self.alloc();
            self.nodes[root as usize].children = Some((self.root, right));
            self.root = root;
            self.span *= 2;
        }
    }

    /// Visits the canonical cover of `[lo, hi]` under `node` spanning
    /// `[nlo, nhi]`.
    fn cover(
        &mut self,
        node: u32,
        nlo: usize,
        nhi: usize,
        lo: usize,
        hi: usize,
        f: &mut impl FnMut(&mut Vec<usize>),
    ) {
        if hi < nlo || nhi < lo {
            return;
        }
        if lo <= nlo && nhi <= hi {
            f(&mut self.nodes[node as usize].ids);
            return;
        }
        let mid = nlo + (nhi - nlo) / 2;
        let (l, r) = self.children(node);
        self.cover(l, nlo, mid, lo, hi, f);
        self.cover(r, mid + 1, nhi, lo, hi, f);
    }

    fn stab(&self, point: usize, out: &mut Vec<usize>) {
        if point >= self.span {
            return;
        }
        let (mut node, mut nlo, mut nhi) = (self.root, 0, self.span - 1);
        loop {
            let n = &self.nodes[node as usize];
            out.extend_from_slice(&n.ids);
            let Some((l, r)) = n.children else { return };
            let mid = nlo + (nhi - nlo) / 2;
            if point <= mid {
                node = l;
                nhi = mid;
            } else {
                node = r;
                nlo = mid + 1;
            }
        }
    }
}

impl IntervalIndex for SegmentTree {
    fn insert(&mut self, id: usize, lo: usize, hi: usize) {
        debug_assert!(lo <= hi);
        self.grow_to(hi);
        let (root, span) = (self.root, self.span);
        self.cover(root, 0, span - 1, lo, hi, &mut |ids| ids.push(id));
        self.starts.insert((lo, id));
        self.intervals.insert(id, (lo, hi));
    }

    fn remove(&mut self, id: usize) -> bool {
        let Some((lo, hi)) = self.intervals.remove(&id) else {
            return false;
        };
        let (root, span) = (self.root, self.span);
        self.cover(root, 0, span - 1, lo, hi, &mut |ids| {
            if let Some(p) = ids.iter().position(|&i| i == id) {
                ids.swap_remove(p);
            }
        });
        self.starts.remove(&(lo, id));
        true
    }

    fn query(&self, lo: usize, hi: usize) -> Vec<usize> {
        let mut out = Vec::new();
        self.stab(lo, &mut out);
        if hi > lo {
            out.extend(
                self.starts
                    .range((lo + 1, 0)..=(hi, usize::MAX))
                    .map(|&(_, id)| id),
            );
        }
        out.sort_unstable();
        out
    }

    fn len(&self) -> usize {
        self.intervals.len()
    }
}
