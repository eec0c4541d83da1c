//! Exact geometric event detection on one realization: box crossings,
//! annulus circuits, one-arm connections, longest-edge statistics, and the
//! glued multi-rectangle crossing event.

use crate::connectivity::{clip_and_connect, BoundaryElement, ClippedArrangement, Region};
use crate::geometry::{
    clip_segment_to_box, segments_intersect_decision, Annulus, Box2, Point, Segment, Side,
};
use crate::models::{Mark, Realization};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum EventError {
    #[error("event region {region} is not inside the sampled core window")]
    RegionOutsideWindow { region: String },
    #[error("arm source and target must be disjoint")]
    SourceTargetOverlap,
    #[error("arm source/target must lie inside the confinement box")]
    EndpointOutsideConfinement,
    #[error("invalid event parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    LeftRight,
    TopDown,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossingSpec {
    pub rect: Box2,
    pub direction: Direction,
}

/// Endpoint region of a one-arm event.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArmRegion {
    /// Touch the closed box anywhere.
    Box(Box2),
    /// Touch a boundary interval (a segment, typically on a box side).
    Interval(Segment),
    /// Touch the boundary (any of the four sides) of the box.
    BoxBoundary(Box2),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArmSpec {
    pub source: ArmRegion,
    pub target: ArmRegion,
    pub confinement: Box2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventOutcome {
    pub occurred: bool,
    /// Piece ids (within the event's clipped arrangement) of a connected set
    /// realizing the event, when one was extracted.
    pub witness: Option<Vec<usize>>,
}

impl EventOutcome {
    fn no() -> Self {
        EventOutcome { occurred: false, witness: None }
    }
}

fn require_region_inside(r: &Realization, outer: &Box2, what: &str) -> Result<(), EventError> {
    if r.window.contains_box(outer) {
        Ok(())
    } else {
        Err(EventError::RegionOutsideWindow { region: what.to_string() })
    }
}

fn piece_adjacency(arr: &ClippedArrangement) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); arr.pieces.len()];
    for &(a, b, _) in &arr.intersections {
        adj[a].push(b);
        adj[b].push(a);
    }
    adj
}

/// Shortest piece path from any source piece to any piece satisfying
/// `is_target`, by BFS; `None` if unreachable.
fn bfs_path(
    adj: &[Vec<usize>],
    sources: &[usize],
    is_target: impl Fn(usize) -> bool,
) -> Option<Vec<usize>> {
    let n = adj.len();
    let mut prev = vec![usize::MAX; n];
    let mut visited = vec![false; n];
    let mut queue = std::collections::VecDeque::new();
    for &s in sources {
        if !visited[s] {
            visited[s] = true;
            prev[s] = s;
            if is_target(s) {
                return Some(vec![s]);
            }
            queue.push_back(s);
        }
    }
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if !visited[w] {
                visited[w] = true;
                prev[w] = v;
                if is_target(w) {
                    let mut path = vec![w];
                    let mut cur = w;
                    while prev[cur] != cur {
                        cur = prev[cur];
                        path.push(cur);
                    }
                    path.reverse();
                    return Some(path);
                }
                queue.push_back(w);
            }
        }
    }
    None
}

fn spanning_witness(
    arr: &ClippedArrangement,
    from: BoundaryElement,
    to: BoundaryElement,
) -> Option<Vec<usize>> {
    let adj = piece_adjacency(arr);
    let sources: Vec<usize> = (0..arr.pieces.len())
        .filter(|&i| arr.boundary_contacts[i].contains(&from))
        .collect();
    bfs_path(&adj, &sources, |i| arr.boundary_contacts[i].contains(&to))
}

/// Does a connected set of clipped pieces join the two required opposite
/// sides of the rectangle?
pub fn detect_crossing(r: &Realization, spec: &CrossingSpec) -> Result<EventOutcome, EventError> {
    require_region_inside(r, &spec.rect, "crossing rectangle")?;
    let arr = clip_and_connect(r, Region::Box(spec.rect));
    let (from, to) = match spec.direction {
        Direction::LeftRight => (BoundaryElement::Outer(Side::Left), BoundaryElement::Outer(Side::Right)),
        Direction::TopDown => (BoundaryElement::Outer(Side::Top), BoundaryElement::Outer(Side::Bottom)),
    };
    Ok(match spanning_witness(&arr, from, to) {
        Some(w) => EventOutcome { occurred: true, witness: Some(w) },
        None => EventOutcome::no(),
    })
}

fn angle_about(center: &Point, p: &Point) -> f64 {
    (p.y - center.y).atan2(p.x - center.x)
}

fn normalized_angle_diff(a: f64, b: f64) -> f64 {
    let mut d = b - a;
    while d > std::f64::consts::PI {
        d -= 2.0 * std::f64::consts::PI;
    }
    while d < -std::f64::consts::PI {
        d += 2.0 * std::f64::consts::PI;
    }
    d
}

/// Net winding of a closed polyline around `center`. Each leg must avoid
/// `center` and subtend less than a half turn, which holds here because legs
/// lie on clipped pieces that avoid the annulus hole.
fn polyline_winding(center: &Point, pts: &[Point]) -> f64 {
    let mut total = 0.0;
    for k in 0..pts.len() {
        let a = angle_about(center, &pts[k]);
        let b = angle_about(center, &pts[(k + 1) % pts.len()]);
        total += normalized_angle_diff(a, b);
    }
    total
}

/// Is there a cycle of intersecting pieces that separates the inner box from
/// the outer boundary? Detected by the winding number of fundamental cycles:
/// winding is additive over the cycle space, so a non-contractible cycle
/// exists iff some fundamental cycle of the intersection graph winds.
pub fn detect_circuit(r: &Realization, ann: &Annulus) -> Result<EventOutcome, EventError> {
    require_region_inside(r, &ann.outer, "annulus")?;
    let arr = clip_and_connect(r, Region::Annulus(*ann));
    let center = ann.center();
    let n = arr.pieces.len();
    // adjacency with the intersection point carried on each graph edge
    let mut adj: Vec<Vec<(usize, Point)>> = vec![Vec::new(); n];
    for &(a, b, p) in &arr.intersections {
        adj[a].push((b, p));
        adj[b].push((a, p));
    }
    let mut parent = vec![usize::MAX; n]; // parent node in BFS forest
    let mut parent_pt = vec![Point::new(0.0, 0.0); n];
    let mut depth = vec![0usize; n];
    let mut order: Vec<usize> = Vec::with_capacity(n);
    let mut visited = vec![false; n];
    let mut nontree: Vec<(usize, usize, Point)> = Vec::new();
    for root in 0..n {
        if visited[root] {
            continue;
        }
        visited[root] = true;
        parent[root] = root;
        let mut queue = std::collections::VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &(w, p) in &adj[v] {
                if !visited[w] {
                    visited[w] = true;
                    parent[w] = v;
                    parent_pt[w] = p;
                    depth[w] = depth[v] + 1;
                    queue.push_back(w);
                } else if w != parent[v] || parent_pt[v] != p {
                    if v < w {
                        nontree.push((v, w, p));
                    }
                }
            }
        }
    }
    for (u, v, q) in nontree {
        // fundamental cycle: u -(q)- v, then v up to the meeting node, then
        // down to u; consecutive polyline points share a piece
        let (mut a, mut b) = (u, v);
        let mut pts_u: Vec<Point> = Vec::new();
        let mut pts_v: Vec<Point> = Vec::new();
        let mut cyc_u = vec![u];
        let mut cyc_v = vec![v];
        while depth[a] > depth[b] {
            pts_u.push(parent_pt[a]);
            a = parent[a];
            cyc_u.push(a);
        }
        while depth[b] > depth[a] {
            pts_v.push(parent_pt[b]);
            b = parent[b];
            cyc_v.push(b);
        }
        while a != b {
            pts_u.push(parent_pt[a]);
            a = parent[a];
            cyc_u.push(a);
            pts_v.push(parent_pt[b]);
            b = parent[b];
            cyc_v.push(b);
        }
        // polyline: q, ascent from v to lca, then descent from lca to u
        let mut pts = vec![q];
        pts.extend(&pts_v);
        pts.extend(pts_u.iter().rev());
        let w = polyline_winding(&center, &pts);
        if w.abs() > std::f64::consts::PI {
            cyc_v.pop(); // lca appears in both halves
            cyc_v.extend(cyc_u.into_iter().rev());
            return Ok(EventOutcome { occurred: true, witness: Some(cyc_v) });
        }
    }
    Ok(EventOutcome::no())
}

fn region_outer(region: &ArmRegion) -> Box2 {
    match region {
        ArmRegion::Box(b) | ArmRegion::BoxBoundary(b) => *b,
        ArmRegion::Interval(s) => {
            let eps = 1e-12;
            Box2::new(
                Point::new(s.a.x.min(s.b.x) - eps, s.a.y.min(s.b.y) - eps),
                Point::new(s.a.x.max(s.b.x) + eps, s.a.y.max(s.b.y) + eps),
            )
        }
    }
}

fn piece_touches(seg: &Segment, region: &ArmRegion) -> bool {
    match region {
        ArmRegion::Box(b) => clip_segment_to_box(seg, b).is_some(),
        ArmRegion::Interval(t) => segments_intersect_decision(seg, t),
        ArmRegion::BoxBoundary(b) => [Side::Left, Side::Right, Side::Bottom, Side::Top]
            .iter()
            .any(|&side| segments_intersect_decision(seg, &b.side_segment(side))),
    }
}

fn regions_overlap(a: &ArmRegion, b: &ArmRegion) -> bool {
    // conservative: compare bounding boxes for box-box, exact otherwise
    match (a, b) {
        (ArmRegion::Box(x), ArmRegion::Box(y)) => {
            x.lo.x <= y.hi.x && y.lo.x <= x.hi.x && x.lo.y <= y.hi.y && y.lo.y <= x.hi.y
        }
        (ArmRegion::Interval(s), other) | (other, ArmRegion::Interval(s)) => piece_touches(s, other),
        (ArmRegion::BoxBoundary(x), ArmRegion::Box(y)) | (ArmRegion::Box(y), ArmRegion::BoxBoundary(x)) => {
            [Side::Left, Side::Right, Side::Bottom, Side::Top]
                .iter()
                .any(|&side| clip_segment_to_box(&x.side_segment(side), y).is_some())
        }
        (ArmRegion::BoxBoundary(x), ArmRegion::BoxBoundary(y)) => {
            [Side::Left, Side::Right, Side::Bottom, Side::Top].iter().any(|&sa| {
                [Side::Left, Side::Right, Side::Bottom, Side::Top].iter().any(|&sb| {
                    segments_intersect_decision(&x.side_segment(sa), &y.side_segment(sb))
                })
            })
        }
    }
}

/// One-arm event: a connected set of pieces inside the confinement box that
/// touches both the source and the target region.
pub fn detect_arm(r: &Realization, spec: &ArmSpec) -> Result<EventOutcome, EventError> {
    require_region_inside(r, &spec.confinement, "arm confinement")?;
    for reg in [&spec.source, &spec.target] {
        if !spec.confinement.contains_box(&region_outer(reg)) {
            return Err(EventError::EndpointOutsideConfinement);
        }
    }
    if regions_overlap(&spec.source, &spec.target) {
        return Err(EventError::SourceTargetOverlap);
    }
    let arr = clip_and_connect(r, Region::Box(spec.confinement));
    let adj = piece_adjacency(&arr);
    let sources: Vec<usize> = (0..arr.pieces.len())
        .filter(|&i| piece_touches(&arr.pieces[i].seg, &spec.source))
        .collect();
    Ok(
        match bfs_path(&adj, &sources, |i| piece_touches(&arr.pieces[i].seg, &spec.target)) {
            Some(w) => EventOutcome { occurred: true, witness: Some(w) },
            None => EventOutcome::no(),
        },
    )
}

/// Length of the longest segment intersecting `b` (0 if none). For the stick
/// model the returned statistic is the longest *half-length* among sticks
/// intersecting `b`.
pub fn longest_edge_in_box(r: &Realization, b: &Box2) -> f64 {
    let mut best = 0.0f64;
    for e in &r.edges {
        if b.intersects_segment(&e.seg) {
            best = best.max(e.seg.length());
        }
    }
    for (k, s) in r.sticks.iter().enumerate() {
        if b.intersects_segment(s) {
            if let Mark::Stick { half_length, .. } = r.marks[k] {
                best = best.max(half_length);
            } else {
                best = best.max(s.length() / 2.0);
            }
        }
    }
    best
}

/// True iff some segment intersecting the annulus is longer than `threshold`
/// (half-length convention for sticks, as above).
pub fn long_edge_in_annulus(r: &Realization, ann: &Annulus, threshold: f64) -> bool {
    let region = Region::Annulus(*ann);
    let hits_ann = |s: &Segment| !crate::connectivity::clip_to_region(s, &region).is_empty();
    for e in &r.edges {
        if e.seg.length() > threshold && hits_ann(&e.seg) {
            return true;
        }
    }
    for (k, s) in r.sticks.iter().enumerate() {
        let len = if let Mark::Stick { half_length, .. } = r.marks[k] {
            half_length
        } else {
            s.length() / 2.0
        };
        if len > threshold && hits_ann(s) {
            return true;
        }
    }
    false
}

/// Number of shifted rectangles minus one in the glued crossing event at
/// aspect `rho`: the union of `(js,0)+[0,2s]x[0,s]`, `j=0..n`, must cover
/// `[0,rho*s]x[0,s]`, so `n = max(0, ceil(rho)-2)`.
pub fn composite_shift_count(rho: f64) -> usize {
    (rho.ceil() as isize - 2).max(0) as usize
}

/// The glued event: left-right crossings of every shifted 2s-by-s rectangle
/// and top-down crossings of every interior s-by-s square. Implies a
/// left-right crossing of `[0,rho*s]x[0,s]` whenever the shifted rectangles
/// stay inside that strip.
pub fn detect_composite_f(r: &Realization, s: f64, rho: f64) -> Result<EventOutcome, EventError> {
    if s < 1.0 || rho < 1.0 {
        return Err(EventError::InvalidParameter(format!(
            "composite crossing needs s >= 1 and rho >= 1, got s={s}, rho={rho}"
        )));
    }
    let n = composite_shift_count(rho);
    for j in 0..=n {
        let rect = Box2::from_coords(j as f64 * s, 0.0, j as f64 * s + 2.0 * s, s);
        let out = detect_crossing(r, &CrossingSpec { rect, direction: Direction::LeftRight })?;
        if !out.occurred {
            return Ok(EventOutcome::no());
        }
    }
    for j in 1..=n {
        let sq = Box2::from_coords(j as f64 * s, 0.0, (j + 1) as f64 * s, s);
        let out = detect_crossing(r, &CrossingSpec { rect: sq, direction: Direction::TopDown })?;
        if !out.occurred {
            return Ok(EventOutcome::no());
        }
    }
    Ok(EventOutcome { occurred: true, witness: None })
}

/// Vertex components of the graph restricted to edges accepted by `keep`,
/// returned as (kept edge ids, component root per vertex).
fn direct_components_filtered(
    r: &Realization,
    keep: impl Fn(&Segment) -> bool,
) -> (Vec<usize>, crate::connectivity::UnionFind) {
    let mut uf = crate::connectivity::UnionFind::new(r.points.len());
    let mut kept = Vec::new();
    for (k, e) in r.edges.iter().enumerate() {
        if keep(&e.seg) {
            uf.union(e.i, e.j);
            kept.push(k);
        }
    }
    (kept, uf)
}

/// Crossing under plain graph connectivity: edges lying entirely inside the
/// rectangle link their vertices, and a component spans when the clipped
/// pieces of edges anchored at its vertices touch both required sides (a
/// single edge whose piece spans the rectangle also counts). Sticks are
/// ignored; the enhancement-free reading only applies to point-pair models.
/// Every piece used here appears in the enhanced clipped arrangement and
/// consecutive ones share an interior vertex, so any crossing found here is
/// also found by `detect_crossing` and the enhanced model dominates
/// trialwise.
pub fn detect_crossing_direct(r: &Realization, spec: &CrossingSpec) -> Result<EventOutcome, EventError> {
    require_region_inside(r, &spec.rect, "crossing rectangle")?;
    let rect = spec.rect;
    let (kept, mut uf) = direct_components_filtered(r, |s| rect.contains(&s.a) && rect.contains(&s.b));
    let (from, to) = match spec.direction {
        Direction::LeftRight => (Side::Left, Side::Right),
        Direction::TopDown => (Side::Top, Side::Bottom),
    };
    let (sf, st) = (rect.side_segment(from), rect.side_segment(to));
    let mut touch: std::collections::HashMap<usize, (bool, bool)> = std::collections::HashMap::new();
    for (k, e) in r.edges.iter().enumerate() {
        let piece = match clip_segment_to_box(&e.seg, &rect) {
            Some(p) => p,
            None => continue,
        };
        let hits_from = segments_intersect_decision(&piece, &sf);
        let hits_to = segments_intersect_decision(&piece, &st);
        if hits_from && hits_to {
            return Ok(EventOutcome { occurred: true, witness: Some(vec![k]) });
        }
        if !hits_from && !hits_to {
            continue;
        }
        // boundary contact is credited to the component of each interior
        // endpoint; the edge itself may leave the rectangle
        for (v, p) in [(e.i, &e.seg.a), (e.j, &e.seg.b)] {
            if !rect.contains(p) {
                continue;
            }
            let root = uf.find(v);
            let flags = touch.entry(root).or_insert((false, false));
            flags.0 |= hits_from;
            flags.1 |= hits_to;
            if flags.0 && flags.1 {
                let witness = kept
                    .iter()
                    .copied()
                    .filter(|&k2| uf.find(r.edges[k2].i) == root)
                    .collect();
                return Ok(EventOutcome { occurred: true, witness: Some(witness) });
            }
        }
    }
    Ok(EventOutcome::no())
}

/// One-arm event under plain graph connectivity, analogous to
/// `detect_crossing_direct`: edges entirely inside the confinement box link
/// vertices, and clipped pieces of edges anchored at a component's vertices
/// provide the source and target contacts.
pub fn detect_arm_direct(r: &Realization, spec: &ArmSpec) -> Result<EventOutcome, EventError> {
    require_region_inside(r, &spec.confinement, "arm confinement")?;
    for reg in [&spec.source, &spec.target] {
        if !spec.confinement.contains_box(&region_outer(reg)) {
            return Err(EventError::EndpointOutsideConfinement);
        }
    }
    if regions_overlap(&spec.source, &spec.target) {
        return Err(EventError::SourceTargetOverlap);
    }
    let conf = spec.confinement;
    let (kept, mut uf) = direct_components_filtered(r, |s| conf.contains(&s.a) && conf.contains(&s.b));
    let mut touch: std::collections::HashMap<usize, (bool, bool)> = std::collections::HashMap::new();
    for (k, e) in r.edges.iter().enumerate() {
        let piece = match clip_segment_to_box(&e.seg, &conf) {
            Some(p) => p,
            None => continue,
        };
        let hits_source = piece_touches(&piece, &spec.source);
        let hits_target = piece_touches(&piece, &spec.target);
        if hits_source && hits_target {
            return Ok(EventOutcome { occurred: true, witness: Some(vec![k]) });
        }
        if !hits_source && !hits_target {
            continue;
        }
        for (v, p) in [(e.i, &e.seg.a), (e.j, &e.seg.b)] {
            if !conf.contains(p) {
                continue;
            }
            let root = uf.find(v);
            let flags = touch.entry(root).or_insert((false, false));
            flags.0 |= hits_source;
            flags.1 |= hits_target;
            if flags.0 && flags.1 {
                let witness = kept
                    .iter()
                    .copied()
                    .filter(|&k2| uf.find(r.edges[k2].i) == root)
                    .collect();
                return Ok(EventOutcome { occurred: true, witness: Some(witness) });
            }
        }
    }
    Ok(EventOutcome::no())
}

/// Circuit under plain graph connectivity: a vertex cycle whose edges stay in
/// the annulus (endpoints in the outer box, segments avoiding the closed
/// hole) and whose polygon winds around the hole. Same fundamental-cycle
/// winding argument as `detect_circuit`; each straight leg avoids the center,
/// so it subtends less than a half turn.
pub fn detect_circuit_direct(r: &Realization, ann: &Annulus) -> Result<EventOutcome, EventError> {
    require_region_inside(r, &ann.outer, "annulus")?;
    let center = ann.center();
    let usable = |s: &Segment| {
        ann.outer.contains(&s.a) && ann.outer.contains(&s.b) && !ann.inner.intersects_segment(s)
    };
    let n = r.points.len();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for e in &r.edges {
        if usable(&e.seg) {
            adj[e.i].push(e.j);
            adj[e.j].push(e.i);
        }
    }
    let mut parent = vec![usize::MAX; n];
    let mut depth = vec![0usize; n];
    let mut visited = vec![false; n];
    let mut nontree: Vec<(usize, usize)> = Vec::new();
    for root in 0..n {
        if visited[root] {
            continue;
        }
        visited[root] = true;
        parent[root] = root;
        let mut queue = std::collections::VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v] {
                if !visited[w] {
                    visited[w] = true;
                    parent[w] = v;
                    depth[w] = depth[v] + 1;
                    queue.push_back(w);
                } else if w != parent[v] && v < w {
                    nontree.push((v, w));
                }
            }
        }
    }
    for (u, v) in nontree {
        let (mut a, mut b) = (u, v);
        let mut half_u = vec![u];
        let mut half_v = vec![v];
        while depth[a] > depth[b] {
            a = parent[a];
            half_u.push(a);
        }
        while depth[b] > depth[a] {
            b = parent[b];
            half_v.push(b);
        }
        while a != b {
            a = parent[a];
            half_u.push(a);
            b = parent[b];
            half_v.push(b);
        }
        // cycle: u .. lca .. v, closed by the nontree edge (v, u)
        half_v.pop();
        half_u.extend(half_v.into_iter().rev());
        let pts: Vec<Point> = half_u.iter().map(|&i| r.points[i]).collect();
        if polyline_winding(&center, &pts).abs() > std::f64::consts::PI {
            return Ok(EventOutcome { occurred: true, witness: Some(half_u) });
        }
    }
    Ok(EventOutcome::no())
}

/// `detect_composite_f` with plain graph connectivity in every rectangle.
pub fn detect_composite_f_direct(r: &Realization, s: f64, rho: f64) -> Result<EventOutcome, EventError> {
    if s < 1.0 || rho < 1.0 {
        return Err(EventError::InvalidParameter(format!(
            "composite crossing needs s >= 1 and rho >= 1, got s={s}, rho={rho}"
        )));
    }
    let n = composite_shift_count(rho);
    for j in 0..=n {
        let rect = Box2::from_coords(j as f64 * s, 0.0, j as f64 * s + 2.0 * s, s);
        if !detect_crossing_direct(r, &CrossingSpec { rect, direction: Direction::LeftRight })?.occurred {
            return Ok(EventOutcome::no());
        }
    }
    for j in 1..=n {
        let sq = Box2::from_coords(j as f64 * s, 0.0, (j + 1) as f64 * s, s);
        if !detect_crossing_direct(r, &CrossingSpec { rect: sq, direction: Direction::TopDown })?.occurred {
            return Ok(EventOutcome::no());
        }
    }
    Ok(EventOutcome { occurred: true, witness: None })
}
