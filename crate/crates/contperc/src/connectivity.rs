//! The enhancement: segments that cross merge components. Union-find over
//! segments/pieces, a spatial-hash intersection search, and region-restricted
//! connectivity for event detection.

use crate::geometry::{
    clip_params, point_at, segments_intersect, segments_intersect_decision, Annulus, Box2, Point,
    Segment, Side,
};
use crate::models::Realization;
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, HashSet};

/// Union-find with path compression and union by size. Canonical
/// representatives are the smallest ids, fixed by [`UnionFind::canonicalize`].
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect(), size: vec![1; n] }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns true if the two classes were distinct before the union.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (big, small) = if self.size[ra] >= self.size[rb] { (ra, rb) } else { (rb, ra) };
        self.parent[small] = big;
        self.size[big] += self.size[small];
        true
    }

    pub fn same(&mut self, a: usize, b: usize) -> bool {
        self.find(a) == self.find(b)
    }

    /// Deterministic representative map: each element maps to the smallest
    /// id in its class.
    pub fn canonicalize(&mut self) -> Vec<usize> {
        let n = self.len();
        let mut min_of_root: HashMap<usize, usize> = HashMap::new();
        for x in 0..n {
            let r = self.find(x);
            let e = min_of_root.entry(r).or_insert(x);
            if x < *e {
                *e = x;
            }
        }
        // path halving may leave parents one hop above the root, so resolve
        // each element again
        let mut out = Vec::with_capacity(n);
        for x in 0..n {
            let r = self.find(x);
            out.push(min_of_root[&r]);
        }
        out
    }
}

fn bbox_overlap(a: &Segment, b: &Segment) -> bool {
    let (ax0, ay0, ax1, ay1) = seg_bbox(a);
    let (bx0, by0, bx1, by1) = seg_bbox(b);
    ax1 >= bx0 && bx1 >= ax0 && ay1 >= by0 && by1 >= ay0
}

fn seg_bbox(s: &Segment) -> (f64, f64, f64, f64) {
    (
        s.a.x.min(s.b.x),
        s.a.y.min(s.b.y),
        s.a.x.max(s.b.x),
        s.a.y.max(s.b.y),
    )
}

/// All unordered pairs of closed segments that share a point. Spatial-hash
/// broad phase, exact narrow phase; identical to the quadratic scan.
pub fn segment_intersections_sweep(segments: &[Segment]) -> Vec<(usize, usize)> {
    let n = segments.len();
    if n < 2 {
        return Vec::new();
    }
    if n <= 48 {
        return brute_force_pairs(segments);
    }
    // cell size from the typical bounding-box extent; oversized segments are
    // handled separately so one long edge cannot blow up the grid
    let mut extents: Vec<f64> = segments
        .iter()
        .map(|s| {
            let (x0, y0, x1, y1) = seg_bbox(s);
            (x1 - x0).max(y1 - y0)
        })
        .collect();
    extents.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let cell = (extents[n / 2] + extents[(9 * n) / 10]).max(1e-9) / 2.0 + 1e-12;
    let max_cells = 64usize;
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    let mut oversize: Vec<usize> = Vec::new();
    for (i, s) in segments.iter().enumerate() {
        let (x0, y0, x1, y1) = seg_bbox(s);
        let cx0 = (x0 / cell).floor() as i64;
        let cx1 = (x1 / cell).floor() as i64;
        let cy0 = (y0 / cell).floor() as i64;
        let cy1 = (y1 / cell).floor() as i64;
        let span = ((cx1 - cx0 + 1) as usize).saturating_mul((cy1 - cy0 + 1) as usize);
        if span > max_cells {
            oversize.push(i);
            continue;
        }
        for cx in cx0..=cx1 {
            for cy in cy0..=cy1 {
                grid.entry((cx, cy)).or_default().push(i);
            }
        }
    }
    let mut seen: HashSet<(usize, usize)> = HashSet::new();
    let mut out: Vec<(usize, usize)> = Vec::new();
    let check = |i: usize, j: usize, seen: &mut HashSet<(usize, usize)>, out: &mut Vec<(usize, usize)>| {
        let key = if i < j { (i, j) } else { (j, i) };
        if seen.insert(key)
            && bbox_overlap(&segments[key.0], &segments[key.1])
            && segments_intersect_decision(&segments[key.0], &segments[key.1])
        {
            out.push(key);
        }
    };
    for bucket in grid.values() {
        for (a, &i) in bucket.iter().enumerate() {
            for &j in &bucket[a + 1..] {
                check(i, j, &mut seen, &mut out);
            }
        }
    }
    for (a, &i) in oversize.iter().enumerate() {
        for j in 0..n {
            if j != i && !oversize[..a].contains(&j) {
                check(i, j, &mut seen, &mut out);
            }
        }
    }
    out.sort_unstable();
    out
}

fn brute_force_pairs(segments: &[Segment]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..segments.len() {
        for j in (i + 1)..segments.len() {
            if bbox_overlap(&segments[i], &segments[j])
                && segments_intersect_decision(&segments[i], &segments[j])
            {
                out.push((i, j));
            }
        }
    }
    out
}

/// Vertex partition of the enhanced model: direct edges connect their
/// endpoints, and whenever two segments share a point their owner vertices
/// merge. Returns the smallest-id representative of every vertex.
pub fn enhanced_components(r: &Realization) -> Vec<usize> {
    let n = r.points.len();
    let mut uf = UnionFind::new(n);
    // owners[k] = a vertex carried by segment k (segments() order)
    let segs: Vec<Segment> = r.segments().copied().collect();
    let mut owners: Vec<usize> = Vec::with_capacity(segs.len());
    for e in &r.edges {
        uf.union(e.i, e.j);
        owners.push(e.i);
    }
    for k in 0..r.sticks.len() {
        owners.push(k);
    }
    for (a, b) in segment_intersections_sweep(&segs) {
        uf.union(owners[a], owners[b]);
    }
    uf.canonicalize()
}

/// Direct-edge-only partition (no enhancement); for dominance comparisons.
pub fn direct_components(r: &Realization) -> Vec<usize> {
    let mut uf = UnionFind::new(r.points.len());
    for e in &r.edges {
        uf.union(e.i, e.j);
    }
    uf.canonicalize()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Region {
    Box(Box2),
    Annulus(Annulus),
}

impl Region {
    pub fn outer_box(&self) -> Box2 {
        match self {
            Region::Box(b) => *b,
            Region::Annulus(a) => a.outer,
        }
    }
}

/// A boundary element of the region: one of the four outer sides, or for an
/// annulus also one of the four sides of the inner hole.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoundaryElement {
    Outer(Side),
    Inner(Side),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    /// Index into the realization's unified segment order (edges, then sticks).
    pub source: usize,
    pub seg: Segment,
}

#[derive(Debug, Clone)]
pub struct ClippedArrangement {
    pub region: Region,
    pub pieces: Vec<Piece>,
    pub intersections: Vec<(usize, usize, Point)>,
    /// Smallest-piece-id representative per piece.
    pub components: Vec<usize>,
    pub boundary_contacts: Vec<Vec<BoundaryElement>>,
}

impl ClippedArrangement {
    /// Piece ids of one component, in increasing order.
    pub fn component_members(&self, rep: usize) -> Vec<usize> {
        (0..self.pieces.len()).filter(|&i| self.components[i] == rep).collect()
    }

    pub fn component_reps(&self) -> Vec<usize> {
        let mut reps: Vec<usize> = self.components.clone();
        reps.sort_unstable();
        reps.dedup();
        reps
    }

    /// Does some component touch every one of the given boundary elements?
    pub fn component_spanning(&self, required: &[BoundaryElement]) -> Option<usize> {
        let mut touched: HashMap<usize, HashSet<BoundaryElement>> = HashMap::new();
        for (i, contacts) in self.boundary_contacts.iter().enumerate() {
            let set = touched.entry(self.components[i]).or_default();
            for c in contacts {
                set.insert(*c);
            }
        }
        let mut reps: Vec<usize> = touched.keys().copied().collect();
        reps.sort_unstable();
        reps.into_iter()
            .find(|rep| required.iter().all(|el| touched[rep].contains(el)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComponentSummary {
    pub component: usize,
    pub piece_count: usize,
    /// Vertex ids of the source segments (edge endpoints or stick owners).
    pub source_vertices: Vec<usize>,
    pub bounding_box: Box2,
}

/// Clip every segment to the region and connect the clipped pieces by their
/// pairwise intersections. Pieces lie in the closed region; for an annulus
/// the part strictly inside the hole is removed.
pub fn clip_and_connect(r: &Realization, region: Region) -> ClippedArrangement {
    let mut pieces: Vec<Piece> = Vec::new();
    for (source, seg) in r.segments().enumerate() {
        for piece in clip_to_region(seg, &region) {
            pieces.push(Piece { source, seg: piece });
        }
    }
    connect_pieces(region, pieces)
}

pub(crate) fn connect_pieces(region: Region, pieces: Vec<Piece>) -> ClippedArrangement {
    let segs: Vec<Segment> = pieces.iter().map(|p| p.seg).collect();
    let pairs = segment_intersections_sweep(&segs);
    let mut uf = UnionFind::new(pieces.len());
    let mut intersections = Vec::with_capacity(pairs.len());
    for (a, b) in pairs {
        let pt = segments_intersect(&segs[a], &segs[b]).expect("pair reported by sweep");
        intersections.push((a, b, pt));
        uf.union(a, b);
    }
    // pieces cut from the same source segment stay connected through the
    // removed middle only if they share a point; they usually do not, so no
    // implicit same-source union is performed
    let components = uf.canonicalize();
    let boundary_contacts = pieces
        .iter()
        .map(|p| boundary_contacts(&p.seg, &region))
        .collect();
    ClippedArrangement { region, pieces, intersections, components, boundary_contacts }
}

/// Clipped portions of `s` inside the region: at most one piece for a box,
/// at most two for an annulus. Zero-length pieces are kept only when the
/// original segment is degenerate.
pub fn clip_to_region(s: &Segment, region: &Region) -> Vec<Segment> {
    match region {
        Region::Box(b) => match clip_params(s, b) {
            Some((t0, t1)) if t1 > t0 || s.is_degenerate() => {
                vec![Segment::new(point_at(s, t0), point_at(s, t1))]
            }
            _ => Vec::new(),
        },
        Region::Annulus(a) => {
            let (t0, t1) = match clip_params(s, &a.outer) {
                Some(iv) => iv,
                None => return Vec::new(),
            };
            if s.is_degenerate() {
                return if a.inner.contains(&s.a) { Vec::new() } else { vec![*s] };
            }
            let mut out = Vec::new();
            match clip_params(s, &a.inner) {
                None => {
                    if t1 > t0 {
                        out.push(Segment::new(point_at(s, t0), point_at(s, t1)));
                    }
                }
                Some((u0, u1)) => {
                    let lo_hi = u0.max(t0);
                    if lo_hi > t0 {
                        out.push(Segment::new(point_at(s, t0), point_at(s, lo_hi)));
                    }
                    let hi_lo = u1.min(t1);
                    if t1 > hi_lo {
                        out.push(Segment::new(point_at(s, hi_lo), point_at(s, t1)));
                    }
                }
            }
            out
        }
    }
}

fn boundary_contacts(piece: &Segment, region: &Region) -> Vec<BoundaryElement> {
    let mut out = Vec::new();
    let outer = region.outer_box();
    for side in [Side::Left, Side::Right, Side::Bottom, Side::Top] {
        if segments_intersect_decision(piece, &outer.side_segment(side)) {
            out.push(BoundaryElement::Outer(side));
        }
    }
    if let Region::Annulus(a) = region {
        for side in [Side::Left, Side::Right, Side::Bottom, Side::Top] {
            if segments_intersect_decision(piece, &a.inner.side_segment(side)) {
                out.push(BoundaryElement::Inner(side));
            }
        }
    }
    out
}

/// Per-component summaries of a clipped arrangement, ordered by component id.
pub fn component_summaries(arr: &ClippedArrangement, r: &Realization) -> Vec<ComponentSummary> {
    let mut by_rep: HashMap<usize, Vec<usize>> = HashMap::new();
    for (i, &rep) in arr.components.iter().enumerate() {
        by_rep.entry(rep).or_default().push(i);
    }
    let n_edges = r.edges.len();
    let mut out: Vec<ComponentSummary> = by_rep
        .into_iter()
        .map(|(component, members)| {
            let mut vs: HashSet<usize> = HashSet::new();
            let mut lo = Point::new(f64::MAX, f64::MAX);
            let mut hi = Point::new(f64::MIN, f64::MIN);
            for &m in &members {
                let src = arr.pieces[m].source;
                if src < n_edges {
                    vs.insert(r.edges[src].i);
                    vs.insert(r.edges[src].j);
                } else {
                    vs.insert(src - n_edges);
                }
                let s = arr.pieces[m].seg;
                for p in [s.a, s.b] {
                    lo.x = lo.x.min(p.x);
                    lo.y = lo.y.min(p.y);
                    hi.x = hi.x.max(p.x);
                    hi.y = hi.y.max(p.y);
                }
            }
            let mut source_vertices: Vec<usize> = vs.into_iter().collect();
            source_vertices.sort_unstable();
            let bounding_box = Box2::new(
                Point::new(lo.x - 1e-12, lo.y - 1e-12),
                Point::new(hi.x + 1e-12, hi.y + 1e-12),
            );
            ComponentSummary { component, piece_count: members.len(), source_vertices, bounding_box }
        })
        .collect();
    out.sort_by_key(|s| s.component);
    out
}
