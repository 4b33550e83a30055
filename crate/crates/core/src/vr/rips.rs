//! Vietoris–Rips persistence without materialising the filtration.
//!
//! Simplices are encoded by the combinatorial number system and coboundaries
//! are enumerated on the fly. Persistent cohomology is reduced in reverse
//! filtration order with clearing and the emergent-pair shortcut; the
//! resulting barcode equals that of the explicit homology reduction in
//! [`compute_persistence`](super::compute_persistence).

use std::cmp::Ordering;
use std::collections::hash_map::Entry as MapEntry;
use std::collections::{BinaryHeap, HashMap};
use std::hash::{BuildHasherDefault, Hasher};

use super::PersistenceDiagram;
use crate::error::{arg, Result};
use crate::pointcloud::{Dataset, FiniteMetricSpace, PointCloud};

/// Dense symmetric distance storage.
#[derive(Debug, Clone)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    pub fn from_fn(n: usize, dist: impl Fn(usize, usize) -> f64) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 1..n {
            for j in 0..i {
                let d = dist(i, j);
                data[i * n + j] = d;
                data[j * n + i] = d;
            }
        }
        Self { n, data }
    }

    pub fn from_cloud(cloud: &PointCloud) -> Self {
        Self::from_fn(cloud.len(), |i, j| cloud.distance(i, j))
    }

    pub fn from_metric(space: &FiniteMetricSpace) -> Self {
        Self::from_fn(space.len(), |i, j| space.distance(i, j))
    }

    pub fn from_dataset(data: &Dataset) -> Self {
        match data {
            Dataset::Points(c) => Self::from_cloud(c),
            Dataset::Metric(m) => Self::from_metric(m),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn enclosing_radius(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row(i).iter().copied().fold(0.0, f64::max))
            .fold(f64::INFINITY, f64::min)
    }
}

struct Binomial {
    table: Vec<Vec<u64>>,
}

impl Binomial {
    fn new(n: usize, max_k: usize) -> Result<Self> {
        let mut table = vec![vec![0u64; n + 1]; max_k + 1];
        for v in 0..=n {
            table[0][v] = 1;
            for k in 1..=max_k.min(v) {
                let above = if k < v { table[k][v - 1] } else { 0 };
                let Some(c) = table[k - 1][v - 1].checked_add(above) else {
                    return arg(format!("{n} points are too many to index simplices of dimension {}", max_k - 1));
                };
                table[k][v] = c;
            }
        }
        Ok(Self { table })
    }

    #[inline]
    fn get(&self, v: usize, k: usize) -> u64 {
        self.table[k][v]
    }
}

/// A simplex index with its diameter.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Entry {
    diam: f64,
    index: u64,
}

/// Heap order: the greatest entry is the earliest in the filtration
/// (smallest diameter, then largest index).
impl Eq for Entry {}
impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.diam.total_cmp(&self.diam).then(self.index.cmp(&other.index))
    }
}
impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct Rips<'a> {
    dist: &'a DistanceMatrix,
    binom: Binomial,
    threshold: f64,
    /// Row `i` lists every other vertex by increasing distance from `i`.
    neighbors: Vec<u32>,
}

impl Rips<'_> {
    /// Vertices of the `dim`-simplex `index`, in decreasing order.
    /// Appends after truncating `out` to `start`.
    fn vertices(&self, mut index: u64, dim: usize, out: &mut Vec<usize>, start: usize) {
        out.truncate(start);
        let mut hi = self.dist.len();
        for k in (1..=dim + 1).rev() {
            // largest v < hi with C(v, k) <= index
            let (mut lo, mut top) = (k - 1, hi);
            while top - lo > 1 {
                let mid = (lo + top) / 2;
                if self.binom.get(mid, k) <= index {
                    lo = mid;
                } else {
                    top = mid;
                }
            }
            out.push(lo);
            index -= self.binom.get(lo, k);
            hi = lo;
        }
    }

    /// Cofaces of a simplex in decreasing index order, filtered by threshold.
    /// With `all == false` only cofaces whose new vertex exceeds every
    /// existing vertex are produced (each coface once across all facets).
    fn for_each_coface(&self, s: Entry, verts: &[usize], all: bool, mut f: impl FnMut(Entry) -> bool) {
        let dim = verts.len() - 1;
        let mut idx_below = s.index;
        let mut idx_above = 0u64;
        let mut k = dim + 1;
        let mut v = self.dist.len() as isize - 1;
        while v >= k as isize {
            let vu = v as usize;
            if self.binom.get(vu, k) <= idx_below {
                if !all {
                    break;
                }
                idx_below -= self.binom.get(vu, k);
                idx_above += self.binom.get(vu, k + 1);
                v -= 1;
                k -= 1;
                continue;
            }
            let mut diam = s.diam;
            for &w in verts {
                diam = diam.max(self.dist.get(w, vu));
            }
            if diam <= self.threshold {
                let index = idx_above + self.binom.get(vu, k + 1) + idx_below;
                if !f(Entry { diam, index }) {
                    return;
                }
            }
            v -= 1;
        }
    }

    fn neighbor_row(&self, v: usize) -> &[u32] {
        let m = self.dist.len() - 1;
        &self.neighbors[v * m..(v + 1) * m]
    }

    /// Number of neighbours of `v` within distance `r`.
    fn ball_size(&self, v: usize, r: f64) -> usize {
        self.neighbor_row(v).partition_point(|&k| self.dist.get(v, k as usize) <= r)
    }

    /// Position in the neighbour row of `v` just past distance `r`, scanning
    /// forward from `from`.
    fn advance(&self, v: usize, from: usize, r: f64) -> usize {
        let row = self.neighbor_row(v);
        let mut at = from;
        while at < row.len() && self.dist.get(v, row[at] as usize) <= r {
            at += 1;
        }
        at
    }

    /// Cofaces with diameter in `(lo, hi]`, in no particular order. For each
    /// vertex `verts[t]`, `inner[t]` and `outer[t]` are its ball sizes at
    /// `lo` and `hi`.
    fn for_each_coface_in(
        &self,
        s: Entry,
        verts: &[usize],
        inner: &[usize],
        outer: &[usize],
        lo: f64,
        hi: f64,
        mut f: impl FnMut(Entry),
    ) {
        let mut emit = |k: usize, diam: f64| {
            // index of verts ∪ {k}; verts are in decreasing order
            let mut index = 0;
            let mut rank = verts.len() + 1;
            let mut placed = false;
            for &w in verts {
                if !placed && k > w {
                    index += self.binom.get(k, rank);
                    rank -= 1;
                    placed = true;
                }
                index += self.binom.get(w, rank);
                rank -= 1;
            }
            if !placed {
                index += self.binom.get(k, 1);
            }
            f(Entry { diam, index });
        };

        if s.diam > lo {
            // every coface within `hi` is in range; scan the smallest ball
            let t = (0..verts.len()).min_by_key(|&t| outer[t]).expect("simplex has vertices");
            'ball: for &k in &self.neighbor_row(verts[t])[..outer[t]] {
                let k = k as usize;
                let mut diam = s.diam;
                for &w in verts {
                    if w == k {
                        continue 'ball;
                    }
                    diam = diam.max(self.dist.get(w, k));
                }
                if diam <= hi {
                    emit(k, diam);
                }
            }
            return;
        }

        // otherwise the coface diameter is attained at some vertex; split by
        // the first vertex whose distance to the new one exceeds `lo`
        for (t, &wt) in verts.iter().enumerate() {
            'annulus: for &k in &self.neighbor_row(wt)[inner[t]..outer[t]] {
                let k = k as usize;
                let mut diam = self.dist.get(wt, k);
                for (u, &w) in verts.iter().enumerate() {
                    if u == t {
                        continue;
                    }
                    let d = self.dist.get(w, k);
                    if d > if u < t { lo } else { hi } {
                        continue 'annulus;
                    }
                    diam = diam.max(d);
                }
                emit(k, diam);
            }
        }
    }
}

/// Multiplicative hash for simplex indices, which are already well spread.
#[derive(Default)]
struct IndexHasher(u64);

impl Hasher for IndexHasher {
    fn finish(&self) -> u64 {
        self.0
    }

    fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 = (self.0.rotate_left(8) ^ b as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15);
        }
    }

    fn write_u64(&mut self, i: u64) {
        self.0 = (i ^ (i >> 29)).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    }
}

type IndexMap<V> = HashMap<u64, V, BuildHasherDefault<IndexHasher>>;

/// A coboundary sum over Z/2 whose entries are materialised only up to
/// `bound`. `support` holds the entries with odd multiplicity; `heap` orders
/// them and may contain stale copies, which are skipped.
struct WorkingColumn {
    support: IndexMap<()>,
    heap: BinaryHeap<Entry>,
    bound: f64,
    added: Vec<Entry>,
    /// Vertices of the added simplices, `dim + 1` per simplex.
    vertices: Vec<usize>,
    /// Ball size of each of those vertices at `bound`.
    balls: Vec<usize>,
}

impl WorkingColumn {
    fn new(rips: &Rips, col: Entry, verts: &[usize], initial: &[Entry]) -> Self {
        let mut w = Self {
            support: IndexMap::default(),
            heap: BinaryHeap::new(),
            bound: col.diam,
            added: vec![col],
            vertices: verts.to_vec(),
            balls: verts.iter().map(|&v| rips.ball_size(v, col.diam)).collect(),
        };
        for &c in initial {
            w.toggle(c);
        }
        w
    }

    fn toggle(&mut self, e: Entry) {
        match self.support.entry(e.index) {
            MapEntry::Occupied(o) => {
                o.remove();
            }
            MapEntry::Vacant(v) => {
                v.insert(());
                self.heap.push(e);
            }
        }
    }

    fn add(&mut self, rips: &Rips, s: Entry, dim: usize) {
        let start = self.vertices.len();
        rips.vertices(s.index, dim, &mut self.vertices, start);
        for t in start..self.vertices.len() {
            self.balls.push(rips.ball_size(self.vertices[t], self.bound));
        }
        self.added.push(s);
        let verts = std::mem::take(&mut self.vertices);
        let balls = std::mem::take(&mut self.balls);
        let zeros = [0usize; 8];
        let range = start..verts.len();
        rips.for_each_coface_in(
            s,
            &verts[range.clone()],
            &zeros[..dim + 1],
            &balls[range],
            f64::NEG_INFINITY,
            self.bound,
            |c| self.toggle(c),
        );
        self.vertices = verts;
        self.balls = balls;
    }

    /// Earliest entry of the full sum, growing the bound until one appears.
    fn pivot(&mut self, rips: &Rips, dim: usize) -> Option<Entry> {
        let mut outer = Vec::with_capacity(dim + 1);
        loop {
            while let Some(&top) = self.heap.peek() {
                if self.support.contains_key(&top.index) {
                    return Some(top);
                }
                self.heap.pop();
            }
            if self.bound >= rips.threshold {
                return None;
            }
            // small steps keep the band of live entries above the pivot thin
            let next = if self.bound > 0.0 { self.bound * 1.005 } else { rips.threshold / 1024.0 };
            let next = next.min(rips.threshold);
            let added = std::mem::take(&mut self.added);
            let verts = std::mem::take(&mut self.vertices);
            let mut balls = std::mem::take(&mut self.balls);
            for (i, &s) in added.iter().enumerate() {
                let range = i * (dim + 1)..(i + 1) * (dim + 1);
                outer.clear();
                outer.extend(range.clone().map(|t| rips.advance(verts[t], balls[t], next)));
                rips.for_each_coface_in(s, &verts[range.clone()], &balls[range.clone()], &outer, self.bound, next, |c| {
                    self.toggle(c)
                });
                balls[range].copy_from_slice(&outer);
            }
            self.added = added;
            self.vertices = verts;
            self.balls = balls;
            self.bound = next;
        }
    }
}

struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (a, b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        match self.rank[a].cmp(&self.rank[b]) {
            Ordering::Less => self.parent[a] = b,
            Ordering::Greater => self.parent[b] = a,
            Ordering::Equal => {
                self.parent[b] = a;
                self.rank[a] += 1;
            }
        }
        true
    }
}

/// Vietoris–Rips persistence diagrams in dimensions `0..=max_hom_dim`.
///
/// `max_scale = None` truncates at the enclosing radius, which leaves the
/// diagrams unchanged.
pub fn rips_persistence(
    dist: &DistanceMatrix,
    max_hom_dim: usize,
    max_scale: Option<f64>,
) -> Result<Vec<PersistenceDiagram>> {
    let n = dist.len();
    if n == 0 {
        return arg("cannot compute persistence of an empty space");
    }
    let threshold = match max_scale {
        Some(s) if s.is_nan() || s <= 0.0 => return arg("max_scale must be positive"),
        Some(s) => s,
        None => dist.enclosing_radius(),
    };
    let diameter = (0..n).map(|i| dist.row(i).iter().copied().fold(0.0, f64::max)).fold(0.0, f64::max);
    let mut rips = Rips {
        dist,
        binom: Binomial::new(n, max_hom_dim + 2)?,
        threshold: threshold.min(diameter),
        neighbors: Vec::new(),
    };

    let mut diagrams = Vec::with_capacity(max_hom_dim + 1);

    // dimension 0: Kruskal over edges in filtration order
    let mut edges: Vec<Entry> = Vec::new();
    for i in 1..n {
        for j in 0..i {
            let d = dist.get(i, j);
            if d <= rips.threshold {
                edges.push(Entry {
                    diam: d,
                    index: rips.binom.get(i, 2) + j as u64,
                });
            }
        }
    }
    edges.sort_unstable_by(|a, b| b.cmp(a));
    let mut uf = UnionFind::new(n);
    let mut h0 = Vec::new();
    let mut columns: Vec<Entry> = Vec::new();
    let mut verts = Vec::with_capacity(max_hom_dim + 3);
    for &e in &edges {
        rips.vertices(e.index, 1, &mut verts, 0);
        if uf.union(verts[0], verts[1]) {
            h0.push((0.0, e.diam));
        } else {
            columns.push(e);
        }
    }
    let components = (0..n).filter(|&v| uf.find(v) == v).count();
    diagrams.push(PersistenceDiagram::from_pairs(0, h0, vec![0.0; components])?);
    if max_hom_dim == 0 {
        return Ok(diagrams);
    }
    // reverse filtration order
    columns.reverse();
    let mut simplices = if max_hom_dim > 1 { edges } else { Vec::new() };

    rips.neighbors = Vec::with_capacity(n * (n - 1));
    for v in 0..n {
        let start = rips.neighbors.len();
        rips.neighbors.extend((0..n as u32).filter(|&k| k as usize != v));
        let row = dist.row(v);
        rips.neighbors[start..].sort_unstable_by(|&a, &b| row[a as usize].total_cmp(&row[b as usize]));
    }

    for dim in 1..=max_hom_dim {
        // pivot -> reducing column; `None` marks an emergent pair whose
        // reduction is the column simplex alone
        let mut pivots: IndexMap<(Entry, Option<u32>)> = IndexMap::with_capacity_and_hasher(columns.len(), Default::default());
        let mut reductions: Vec<Vec<Entry>> = Vec::new();
        let mut pairs = Vec::new();
        let mut essential = Vec::new();
        let mut buffer = Vec::new();

        for &col in &columns {
            buffer.clear();
            rips.vertices(col.index, dim, &mut verts, 0);

            // emergent pair: the first zero-persistence coface, if unclaimed,
            // is the pivot and no reduction is needed
            let mut emergent = None;
            let mut check = true;
            rips.for_each_coface(col, &verts, true, |c| {
                if c.diam == col.diam {
                    buffer.push(c);
                    if check {
                        if !pivots.contains_key(&c.index) {
                            emergent = Some(c);
                            return false;
                        }
                        check = false;
                    }
                }
                true
            });
            if let Some(p) = emergent {
                pivots.insert(p.index, (col, None));
                continue;
            }

            let mut working = WorkingColumn::new(&rips, col, &verts, &buffer);
            let mut pivot = working.pivot(&rips, dim);
            loop {
                let Some(p) = pivot else {
                    essential.push(col.diam);
                    break;
                };
                let Some(&(owner, slot)) = pivots.get(&p.index) else {
                    if p.diam > col.diam {
                        pairs.push((col.diam, p.diam));
                    }
                    let mut added = working.added;
                    added.sort_unstable_by_key(|e| e.index);
                    let mut reduced: Vec<Entry> = Vec::with_capacity(added.len());
                    for e in added {
                        if reduced.last().is_some_and(|l| l.index == e.index) {
                            reduced.pop();
                        } else {
                            reduced.push(e);
                        }
                    }
                    let slot = u32::try_from(reductions.len()).expect("column count fits in u32");
                    pivots.insert(p.index, (col, Some(slot)));
                    reductions.push(reduced);
                    break;
                };
                match slot {
                    None => working.add(&rips, owner, dim),
                    Some(j) => {
                        for &s in &reductions[j as usize] {
                            working.add(&rips, s, dim);
                        }
                    }
                }
                pivot = working.pivot(&rips, dim);
            }
        }
        diagrams.push(PersistenceDiagram::from_pairs(dim, pairs, essential)?);

        if dim < max_hom_dim {
            let mut next = Vec::new();
            for &s in &simplices {
                rips.vertices(s.index, dim, &mut verts, 0);
                rips.for_each_coface(s, &verts, false, |c| {
                    next.push(c);
                    true
                });
            }
            next.sort_unstable_by(|a, b| b.cmp(a));
            columns = next.iter().rev().copied().filter(|c| !pivots.contains_key(&c.index)).collect();
            simplices = next;
        }
    }
    Ok(diagrams)
}

/// Rips persistence of any dataset.
pub fn dataset_persistence(data: &Dataset, max_hom_dim: usize, max_scale: Option<f64>) -> Result<Vec<PersistenceDiagram>> {
    rips_persistence(&DistanceMatrix::from_dataset(data), max_hom_dim, max_scale)
}
