//! Domains bounded by closed polylines, with exact nearest-segment queries.

use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{DomainOracle, Invert};
use crate::error::{Error, Result};

/// Segments per leaf of the nearest-segment hierarchy.
const LEAF_SIZE: usize = 8;
/// Relative slack of the pruned search used for walk jumps.
pub const JUMP_SLACK: f64 = 0.05;

/// A closed polyline; the last vertex repeats the first.
pub type Loop = Vec<Complex64>;

/// Winding number of a closed polyline around `z`.
pub fn winding_number(lp: &[Complex64], z: Complex64) -> i32 {
    let mut w = 0;
    for s in lp.windows(2) {
        let (a, b) = (s[0] - z, s[1] - z);
        if a.im <= 0.0 {
            if b.im > 0.0 && cross(a, b) > 0.0 {
                w += 1;
            }
        } else if b.im <= 0.0 && cross(a, b) < 0.0 {
            w -= 1;
        }
    }
    w
}

fn cross(a: Complex64, b: Complex64) -> f64 {
    a.re * b.im - a.im * b.re
}

/// Closest point of the segment `[a, b]` to `z`.
pub fn closest_on_segment(z: Complex64, a: Complex64, b: Complex64) -> Complex64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return a;
    }
    let t = (((z - a) * ab.conj()).re / len2).clamp(0.0, 1.0);
    a + ab * t
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: Complex64,
    b: Complex64,
}

/// Face of a set of nested closed polylines: inside `outer` (when present)
/// and outside every hole.
#[derive(Debug, Serialize, Deserialize)]
pub struct PolylineDomain {
    pub outer: Option<Loop>,
    pub holes: Vec<Loop>,
    #[serde(skip)]
    index: OnceLock<SegmentIndex>,
}

impl Clone for PolylineDomain {
    // the index is rebuilt on demand
    fn clone(&self) -> Self {
        PolylineDomain {
            outer: self.outer.clone(),
            holes: self.holes.clone(),
            index: OnceLock::new(),
        }
    }
}

impl PartialEq for PolylineDomain {
    fn eq(&self, other: &Self) -> bool {
        self.outer == other.outer && self.holes == other.holes
    }
}

impl PolylineDomain {
    pub fn new(outer: Option<Loop>, holes: Vec<Loop>) -> Result<Self> {
        for lp in outer.iter().chain(holes.iter()) {
            if lp.len() < 4 {
                return Err(Error::Geometry(
                    "a boundary loop needs at least 3 distinct vertices".into(),
                ));
            }
            let gap = (lp[0] - lp[lp.len() - 1]).norm();
            if gap > 1e-9 {
                return Err(Error::Geometry(format!(
                    "boundary loop is not closed (gap {gap})"
                )));
            }
        }
        if outer.is_none() && holes.is_empty() {
            return Err(Error::Geometry(
                "a polyline domain needs at least one loop".into(),
            ));
        }
        Ok(PolylineDomain {
            outer,
            holes,
            index: OnceLock::new(),
        })
    }

    /// Bounded face inside a single loop.
    pub fn interior_of(lp: Loop) -> Result<Self> {
        Self::new(Some(lp), Vec::new())
    }

    pub fn loops(&self) -> impl Iterator<Item = &Loop> {
        self.outer.iter().chain(self.holes.iter())
    }

    pub fn segment_count(&self) -> usize {
        self.loops().map(|l| l.len() - 1).sum()
    }

    fn index(&self) -> &SegmentIndex {
        self.index.get_or_init(|| {
            let segs = self
                .loops()
                .flat_map(|l| l.windows(2).map(|w| Segment { a: w[0], b: w[1] }))
                .collect();
            SegmentIndex::build(segs)
        })
    }
}

impl DomainOracle for PolylineDomain {
    fn nearest_boundary(&self, z: Complex64) -> (f64, Complex64) {
        self.index().nearest(z, 0.0)
    }

    fn jump_radius(&self, z: Complex64) -> (f64, Complex64) {
        let (d, p) = self.index().nearest(z, JUMP_SLACK);
        (d / (1.0 + JUMP_SLACK), p)
    }

    fn contains(&self, z: Complex64) -> bool {
        let inside_outer = self
            .outer
            .as_ref()
            .is_none_or(|o| winding_number(o, z) != 0);
        inside_outer && self.holes.iter().all(|h| winding_number(h, z) == 0)
    }

    fn bounding_radius(&self) -> f64 {
        match &self.outer {
            Some(o) => o.iter().map(|v| v.norm()).fold(0.0, f64::max),
            None => f64::INFINITY,
        }
    }
}

impl Invert for PolylineDomain {
    type Image = PolylineDomain;

    /// Vertex-wise image under `w -> 1/w`. The domain must contain infinity,
    /// so it has no outer loop; the hole around 0 becomes the outer loop.
    fn invert(&self) -> Result<PolylineDomain> {
        let zero = Complex64::new(0.0, 0.0);
        if self.outer.is_some() {
            return Err(Error::Domain(
                "a bounded polyline domain does not contain infinity".into(),
            ));
        }
        if self.contains(zero) {
            return Err(Error::Domain(
                "0 lies inside the domain; inversion would send it to infinity".into(),
            ));
        }
        let invert_loop = |l: &Loop| -> Loop { l.iter().map(|&v| v.inv()).collect() };
        let mut outer = None;
        let mut holes = Vec::new();
        for h in &self.holes {
            if winding_number(h, zero) != 0 {
                if outer.is_some() {
                    return Err(Error::Geometry("several holes enclose 0".into()));
                }
                outer = Some(invert_loop(h));
            } else {
                holes.push(invert_loop(h));
            }
        }
        if outer.is_none() {
            return Err(Error::Geometry(
                "no boundary loop separates 0 from infinity".into(),
            ));
        }
        PolylineDomain::new(outer, holes)
    }
}

/// Exact nearest-segment search through a bounding-volume hierarchy,
/// pruned by box distance.
#[derive(Debug)]
struct SegmentIndex {
    segs: Vec<Segment>,
    nodes: Vec<Node>,
}

#[derive(Debug)]
struct Node {
    lo: Complex64,
    hi: Complex64,
    // leaf when count > 0: segs[first..first + count]; otherwise the left
    // child follows this node and `right` indexes the right child
    first: u32,
    count: u32,
    right: u32,
}

impl Node {
    fn box_distance(&self, z: Complex64) -> f64 {
        let dx = (self.lo.re - z.re).max(z.re - self.hi.re).max(0.0);
        let dy = (self.lo.im - z.im).max(z.im - self.hi.im).max(0.0);
        dx.hypot(dy)
    }
}

impl SegmentIndex {
    fn build(mut segs: Vec<Segment>) -> Self {
        let mut nodes = Vec::with_capacity(2 * segs.len() / LEAF_SIZE + 1);
        if !segs.is_empty() {
            let n = segs.len();
            Self::build_node(&mut segs, 0, n, &mut nodes);
        }
        SegmentIndex { segs, nodes }
    }

    // Pushes the node for segs[start..end] and returns its index. Inner nodes
    // keep their left child at index + 1 and store the right child's index.
    fn build_node(segs: &mut [Segment], start: usize, end: usize, nodes: &mut Vec<Node>) -> u32 {
        let (mut lo, mut hi) = (segs[start].a, segs[start].a);
        for s in &segs[start..end] {
            for p in [s.a, s.b] {
                lo = Complex64::new(lo.re.min(p.re), lo.im.min(p.im));
                hi = Complex64::new(hi.re.max(p.re), hi.im.max(p.im));
            }
        }
        let id = nodes.len() as u32;
        nodes.push(Node {
            lo,
            hi,
            first: start as u32,
            count: (end - start) as u32,
            right: 0,
        });
        if end - start <= LEAF_SIZE {
            return id;
        }
        let split_x = hi.re - lo.re >= hi.im - lo.im;
        let key = |s: &Segment| {
            let m = s.a + s.b;
            if split_x {
                m.re
            } else {
                m.im
            }
        };
        let mid = start + (end - start) / 2;
        segs[start..end].select_nth_unstable_by(mid - start, |a, b| key(a).total_cmp(&key(b)));
        Self::build_node(segs, start, mid, nodes);
        let right = Self::build_node(segs, mid, end, nodes);
        let node = &mut nodes[id as usize];
        node.count = 0;
        node.right = right;
        id
    }

    /// Nearest boundary point, or with `slack > 0` a point within `1 + slack`
    /// of the true distance (subtrees that cannot improve by that factor are
    /// skipped).
    fn nearest(&self, z: Complex64, slack: f64) -> (f64, Complex64) {
        let mut best = (f64::INFINITY, z);
        if self.nodes.is_empty() {
            return best;
        }
        let shrink = 1.0 / (1.0 + slack);
        let mut stack = [0u32; 128];
        let mut top = 1;
        while top > 0 {
            top -= 1;
            let i = stack[top];
            let node = &self.nodes[i as usize];
            if node.box_distance(z) >= best.0 * shrink {
                continue;
            }
            if node.count > 0 {
                let range = node.first as usize..(node.first + node.count) as usize;
                for s in &self.segs[range] {
                    let p = closest_on_segment(z, s.a, s.b);
                    let d = (z - p).norm();
                    if d < best.0 {
                        best = (d, p);
                    }
                }
                continue;
            }
            let (l, r) = (i + 1, node.right);
            let dl = self.nodes[l as usize].box_distance(z);
            let dr = self.nodes[r as usize].box_distance(z);
            // nearer child on top
            let (far, near) = if dl <= dr { (r, l) } else { (l, r) };
            stack[top] = far;
            stack[top + 1] = near;
            top += 2;
        }
        best
    }
}
