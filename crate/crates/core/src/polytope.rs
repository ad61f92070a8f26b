//! Exact rational convex geometry in dimensions 1..=3: half-space
//! clipping of bounded cells and volumes of convex hulls.
//!
//! All predicates are exact rational comparisons, so cell volumes,
//! dual-polytope volumes and the mass identity built on them are exact.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::rat::{self, Rat};

/// The closed half-space `{ x : normal . x <= offset }`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HalfSpace {
    pub normal: Vec<Rat>,
    pub offset: Rat,
}

impl HalfSpace {
    pub fn new(normal: Vec<Rat>, offset: Rat) -> Self {
        HalfSpace { normal, offset }
    }

    /// `offset - normal . x`; nonnegative inside.
    pub fn slack(&self, x: &[Rat]) -> Rat {
        &self.offset - rat::dot(&self.normal, x)
    }

    /// The same half-space translated by `t` (so that it bounds the
    /// translated cell).
    pub fn translated(&self, t: &[Rat]) -> HalfSpace {
        let offset = &self.offset + rat::dot(&self.normal, t);
        HalfSpace {
            normal: self.normal.clone(),
            offset,
        }
    }
}

/// A bounded full-dimensional convex cell produced by clipping.
///
/// Representation by dimension: `d = 1` two endpoints, `d = 2` a vertex
/// loop in order, `d = 3` a vertex set plus ordered face loops.
#[derive(Debug, Clone)]
pub struct ConvexCell {
    dim: usize,
    verts: Vec<Vec<Rat>>,
    faces: Vec<Vec<usize>>,
}

impl ConvexCell {
    /// Axis-aligned box `center +- half_width` in every coordinate.
    pub fn bounding_box(dim: usize, center: &[Rat], half_width: &Rat) -> Self {
        assert!((1..=3).contains(&dim), "exact cells support d <= 3");
        let corner = |mask: usize| -> Vec<Rat> {
            (0..dim)
                .map(|i| {
                    if mask >> i & 1 == 1 {
                        &center[i] + half_width
                    } else {
                        &center[i] - half_width
                    }
                })
                .collect()
        };
        match dim {
            1 => ConvexCell {
                dim,
                verts: vec![corner(0), corner(1)],
                faces: vec![],
            },
            2 => ConvexCell {
                dim,
                // counter-clockwise loop
                verts: vec![corner(0b00), corner(0b01), corner(0b11), corner(0b10)],
                faces: vec![],
            },
            _ => {
                let verts: Vec<Vec<Rat>> = (0..8).map(corner).collect();
                // each face is a loop of vertex indices
                let faces = vec![
                    vec![0, 1, 3, 2], // z = lo
                    vec![4, 6, 7, 5], // z = hi
                    vec![0, 4, 5, 1], // y = lo
                    vec![2, 3, 7, 6], // y = hi
                    vec![0, 2, 6, 4], // x = lo
                    vec![1, 5, 7, 3], // x = hi
                ];
                ConvexCell { dim, verts, faces }
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Vec<Rat>] {
        &self.verts
    }

    /// Face loops (meaningful for `d = 3`; for `d = 2` the single loop is
    /// the vertex order itself).
    pub fn face_loops(&self) -> Vec<Vec<usize>> {
        match self.dim {
            3 => self.faces.clone(),
            2 => vec![(0..self.verts.len()).collect()],
            _ => vec![vec![0], vec![1]],
        }
    }

    /// Edges as index pairs.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        match self.dim {
            1 => vec![(0, 1)],
            2 => {
                let n = self.verts.len();
                (0..n).map(|i| (i, (i + 1) % n)).collect()
            }
            _ => {
                let mut set: alloc::collections::BTreeSet<(usize, usize)> =
                    alloc::collections::BTreeSet::new();
                for loop_ in &self.faces {
                    let n = loop_.len();
                    for i in 0..n {
                        let a = loop_[i];
                        let b = loop_[(i + 1) % n];
                        set.insert((a.min(b), a.max(b)));
                    }
                }
                set.into_iter().collect()
            }
        }
    }

    /// Intersect with a half-space. Returns `false` when the result is
    /// empty or no longer full-dimensional; the cell contents are then
    /// unspecified. A half-space that only touches the boundary leaves
    /// the cell unchanged.
    pub fn clip(&mut self, hs: &HalfSpace) -> bool {
        let slacks: Vec<Rat> = self.verts.iter().map(|v| hs.slack(v)).collect();
        if slacks.iter().all(|s| !s.is_negative()) {
            return true; // nothing cut away
        }
        if slacks.iter().all(|s| !s.is_positive()) {
            return false; // nothing strictly inside
        }
        match self.dim {
            1 => self.clip1(hs, &slacks),
            2 => self.clip2(&slacks),
            _ => self.clip3(hs, &slacks),
        }
    }

    fn clip1(&mut self, hs: &HalfSpace, slacks: &[Rat]) -> bool {
        // Exactly one endpoint is strictly outside here.
        let n = &hs.normal[0];
        debug_assert!(!n.is_zero());
        let cut = vec![&hs.offset / n];
        let keep = if slacks[0].is_negative() { 1 } else { 0 };
        let kept = self.verts[keep].clone();
        if kept[0] == cut[0] {
            return false;
        }
        self.verts = if kept[0] < cut[0] {
            vec![kept, cut]
        } else {
            vec![cut, kept]
        };
        true
    }

    fn clip2(&mut self, slacks: &[Rat]) -> bool {
        let n = self.verts.len();
        let mut out: Vec<Vec<Rat>> = Vec::with_capacity(n + 2);
        for i in 0..n {
            let j = (i + 1) % n;
            if !slacks[i].is_negative() {
                out.push(self.verts[i].clone());
            }
            let opposite = (slacks[i].is_positive() && slacks[j].is_negative())
                || (slacks[i].is_negative() && slacks[j].is_positive());
            if opposite {
                out.push(edge_cut(&self.verts[i], &self.verts[j], &slacks[i], &slacks[j]));
            }
        }
        dedup_loop(&mut out);
        if out.len() < 3 || loop_area_twice(&out).is_zero() {
            return false;
        }
        self.verts = out;
        true
    }

    fn clip3(&mut self, hs: &HalfSpace, slacks: &[Rat]) -> bool {
        let mut new_faces: Vec<Vec<Vec<Rat>>> = Vec::new();
        let mut cap: Vec<Vec<Rat>> = Vec::new();
        for loop_ in &self.faces {
            let m = loop_.len();
            let mut out: Vec<Vec<Rat>> = Vec::new();
            for i in 0..m {
                let a = loop_[i];
                let b = loop_[(i + 1) % m];
                if !slacks[a].is_negative() {
                    out.push(self.verts[a].clone());
                }
                let opposite = (slacks[a].is_positive() && slacks[b].is_negative())
                    || (slacks[a].is_negative() && slacks[b].is_positive());
                if opposite {
                    out.push(edge_cut(&self.verts[a], &self.verts[b], &slacks[a], &slacks[b]));
                }
            }
            dedup_loop(&mut out);
            if out.len() >= 3 {
                for p in &out {
                    if hs.slack(p).is_zero() {
                        cap.push(p.clone());
                    }
                }
                new_faces.push(out);
            }
        }
        dedup_points(&mut cap);
        if cap.len() >= 3 {
            if let Some(ordered) = order_coplanar(&cap, &hs.normal) {
                new_faces.push(ordered);
            }
        }
        // Re-index distinct vertices.
        let mut index: BTreeMap<Vec<Rat>, usize> = BTreeMap::new();
        let mut verts: Vec<Vec<Rat>> = Vec::new();
        let mut faces: Vec<Vec<usize>> = Vec::new();
        for face in new_faces {
            let mut loop_idx = Vec::with_capacity(face.len());
            for p in face {
                let next = verts.len();
                let id = *index.entry(p.clone()).or_insert_with(|| {
                    verts.push(p);
                    next
                });
                loop_idx.push(id);
            }
            loop_idx.dedup();
            if loop_idx.len() >= 3 {
                faces.push(loop_idx);
            }
        }
        if verts.len() < 4 || faces.len() < 4 || rat::affine_rank(&verts) < 3 {
            return false;
        }
        self.verts = verts;
        self.faces = faces;
        true
    }

    pub fn volume(&self) -> Rat {
        convex_hull_volume(self.dim, &self.verts)
    }

    pub fn diameter_sq(&self) -> Rat {
        diameter_sq(&self.verts)
    }

    pub fn centroid(&self) -> Vec<Rat> {
        centroid(&self.verts)
    }
}

fn edge_cut(a: &[Rat], b: &[Rat], sa: &Rat, sb: &Rat) -> Vec<Rat> {
    // slack is affine along the edge; zero at t = sa / (sa - sb)
    let t = sa / (sa - sb);
    a.iter()
        .zip(b)
        .map(|(x, y)| x + (y - x) * &t)
        .collect()
}

fn dedup_loop(pts: &mut Vec<Vec<Rat>>) {
    pts.dedup();
    while pts.len() > 1 && pts.first() == pts.last() {
        pts.pop();
    }
}

fn dedup_points(pts: &mut Vec<Vec<Rat>>) {
    pts.sort();
    pts.dedup();
}

pub fn centroid(pts: &[Vec<Rat>]) -> Vec<Rat> {
    let dim = pts[0].len();
    let n = Rat::from_integer(BigInt::from(pts.len()));
    (0..dim)
        .map(|i| pts.iter().map(|p| p[i].clone()).sum::<Rat>() / &n)
        .collect()
}

pub fn diameter_sq(pts: &[Vec<Rat>]) -> Rat {
    let mut best = Rat::zero();
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let d = rat::norm_sq(&rat::sub(&pts[i], &pts[j]));
            if d > best {
                best = d;
            }
        }
    }
    best
}

/// Twice the signed area of a polygon loop.
fn loop_area_twice(loop_: &[Vec<Rat>]) -> Rat {
    let n = loop_.len();
    let mut acc = Rat::zero();
    for i in 0..n {
        let j = (i + 1) % n;
        acc += &loop_[i][0] * &loop_[j][1] - &loop_[j][0] * &loop_[i][1];
    }
    acc
}

fn cross2(o: &[Rat], a: &[Rat], b: &[Rat]) -> Rat {
    (&a[0] - &o[0]) * (&b[1] - &o[1]) - (&a[1] - &o[1]) * (&b[0] - &o[0])
}

fn cross3(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    vec![
        &a[1] * &b[2] - &a[2] * &b[1],
        &a[2] * &b[0] - &a[0] * &b[2],
        &a[0] * &b[1] - &a[1] * &b[0],
    ]
}

/// Order coplanar points (with the given plane normal) into a convex
/// loop around their centroid. Returns `None` when fewer than 3 points
/// remain or the points are collinear.
fn order_coplanar(pts: &[Vec<Rat>], normal: &[Rat]) -> Option<Vec<Vec<Rat>>> {
    if pts.len() < 3 {
        return None;
    }
    // Drop the axis with the largest |normal| component.
    let axis = (0..3)
        .max_by(|&i, &j| normal[i].abs().cmp(&normal[j].abs()))
        .unwrap();
    let proj = |p: &Vec<Rat>| -> Vec<Rat> {
        (0..3).filter(|&i| i != axis).map(|i| p[i].clone()).collect()
    };
    let pts2: Vec<Vec<Rat>> = pts.iter().map(proj).collect();
    if rat::affine_rank(&pts2) < 2 {
        return None;
    }
    let c = centroid(&pts2);
    let mut order: Vec<usize> = (0..pts.len()).collect();
    let half = |p: &Vec<Rat>| -> u8 {
        let dy = &p[1] - &c[1];
        if dy.is_positive() || (dy.is_zero() && &p[0] >= &c[0]) {
            0
        } else {
            1
        }
    };
    order.sort_by(|&i, &j| {
        let (hi, hj) = (half(&pts2[i]), half(&pts2[j]));
        if hi != hj {
            return hi.cmp(&hj);
        }
        let cr = cross2(&c, &pts2[i], &pts2[j]);
        // clockwise-vs-counterclockwise around the centroid
        if cr.is_positive() {
            core::cmp::Ordering::Less
        } else if cr.is_negative() {
            core::cmp::Ordering::Greater
        } else {
            // collinear with centroid: order by distance
            rat::norm_sq(&rat::sub(&pts2[i], &c)).cmp(&rat::norm_sq(&rat::sub(&pts2[j], &c)))
        }
    });
    Some(order.into_iter().map(|i| pts[i].clone()).collect())
}

/// Convex hull of a set of points in `d = 2`, counter-clockwise, via
/// monotone chain with exact predicates.
pub fn convex_hull_2d(points: &[Vec<Rat>]) -> Vec<Vec<Rat>> {
    let mut pts: Vec<Vec<Rat>> = points.to_vec();
    dedup_points(&mut pts);
    let n = pts.len();
    if n <= 2 {
        return pts;
    }
    let mut lower: Vec<Vec<Rat>> = Vec::with_capacity(n);
    for p in &pts {
        while lower.len() >= 2
            && !cross2(&lower[lower.len() - 2], &lower[lower.len() - 1], p).is_positive()
        {
            lower.pop();
        }
        lower.push(p.clone());
    }
    let mut upper: Vec<Vec<Rat>> = Vec::with_capacity(n);
    for p in pts.iter().rev() {
        while upper.len() >= 2
            && !cross2(&upper[upper.len() - 2], &upper[upper.len() - 1], p).is_positive()
        {
            upper.pop();
        }
        upper.push(p.clone());
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Exact volume of the convex hull of a point set (`d <= 3`).
/// Degenerate (lower-dimensional) hulls have volume zero.
pub fn convex_hull_volume(dim: usize, points: &[Vec<Rat>]) -> Rat {
    let mut pts = points.to_vec();
    dedup_points(&mut pts);
    if pts.is_empty() || rat::affine_rank(&pts) < dim {
        return Rat::zero();
    }
    match dim {
        1 => {
            let lo = pts.iter().map(|p| p[0].clone()).min().unwrap();
            let hi = pts.iter().map(|p| p[0].clone()).max().unwrap();
            hi - lo
        }
        2 => {
            let hull = convex_hull_2d(&pts);
            loop_area_twice(&hull).abs() / rat::rat_i(2)
        }
        3 => hull_volume_3d(&pts),
        _ => panic!("exact hull volume supports d <= 3"),
    }
}

fn hull_volume_3d(pts: &[Vec<Rat>]) -> Rat {
    let n = pts.len();
    let interior = centroid(pts);
    let mut seen: alloc::collections::BTreeSet<(Vec<Rat>, Rat)> =
        alloc::collections::BTreeSet::new();
    let mut volume = Rat::zero();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let u = rat::sub(&pts[j], &pts[i]);
                let v = rat::sub(&pts[k], &pts[i]);
                let normal = cross3(&u, &v);
                if normal.iter().all(|c| c.is_zero()) {
                    continue;
                }
                let (normal, offset) = canonical_plane(&normal, rat::dot(&normal, &pts[i]));
                if seen.contains(&(normal.clone(), offset.clone())) {
                    continue;
                }
                let mut above = false;
                let mut below = false;
                for p in pts {
                    let s = rat::dot(&normal, p) - &offset;
                    if s.is_positive() {
                        above = true;
                    } else if s.is_negative() {
                        below = true;
                    }
                    if above && below {
                        break;
                    }
                }
                if above && below {
                    continue; // not a supporting plane
                }
                seen.insert((normal.clone(), offset.clone()));
                let incident: Vec<Vec<Rat>> = pts
                    .iter()
                    .filter(|p| rat::dot(&normal, p) == offset)
                    .cloned()
                    .collect();
                let loop_ = match order_coplanar(&incident, &normal) {
                    Some(l) => l,
                    None => continue,
                };
                // fan of tetrahedra against the interior point
                for t in 1..loop_.len() - 1 {
                    let a = rat::sub(&loop_[0], &interior);
                    let b = rat::sub(&loop_[t], &interior);
                    let c = rat::sub(&loop_[t + 1], &interior);
                    volume += rat::dot(&a, &cross3(&b, &c)).abs();
                }
            }
        }
    }
    volume / rat::rat_i(6)
}

/// Scale a plane `(normal, offset)` to a canonical representative:
/// primitive integer normal with positive leading entry.
fn canonical_plane(normal: &[Rat], offset: Rat) -> (Vec<Rat>, Rat) {
    let mut denom = BigInt::one();
    for c in normal {
        denom = num_integer::lcm(denom, c.denom().clone());
    }
    let ints: Vec<BigInt> = normal
        .iter()
        .map(|c| c.numer() * (&denom / c.denom()))
        .collect();
    let mut g = BigInt::zero();
    for v in &ints {
        g = num_integer::gcd(g, v.clone());
    }
    let mut sign = BigInt::one();
    if let Some(first) = ints.iter().find(|v| !v.is_zero()) {
        if first.is_negative() {
            sign = -sign;
        }
    }
    let scale = Rat::new(&sign * &denom, g * sign.clone() * sign);
    // scale = denom / (g * sign); applying it to normal gives primitive ints
    let new_normal: Vec<Rat> = normal.iter().map(|c| c * &scale).collect();
    let new_offset = offset * &scale;
    (new_normal, new_offset)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{rat, rat_i};

    fn hs(normal: &[i64], offset: Rat) -> HalfSpace {
        HalfSpace::new(normal.iter().map(|&n| rat_i(n)).collect(), offset)
    }

    #[test]
    fn interval_clipping() {
        let mut c = ConvexCell::bounding_box(1, &[rat_i(0)], &rat_i(10));
        assert!(c.clip(&hs(&[1], rat(1, 2))));
        assert!(c.clip(&hs(&[-1], rat(1, 4))));
        assert_eq!(c.volume(), rat(3, 4));
        assert!(!c.clip(&hs(&[1], rat_i(-1))));
    }

    #[test]
    fn square_from_box() {
        let mut c = ConvexCell::bounding_box(2, &[rat_i(0), rat_i(0)], &rat_i(5));
        for (n, o) in [
            ([1, 0], rat(1, 2)),
            ([-1, 0], rat(1, 2)),
            ([0, 1], rat(1, 2)),
            ([0, -1], rat(1, 2)),
        ] {
            assert!(c.clip(&hs(&n, o)));
        }
        assert_eq!(c.volume(), rat_i(1));
        assert_eq!(c.vertices().len(), 4);
        assert_eq!(c.diameter_sq(), rat_i(2));
        // touching half-plane through a corner changes nothing
        assert!(c.clip(&hs(&[1, 1], rat_i(1))));
        assert_eq!(c.volume(), rat_i(1));
    }

    #[test]
    fn hexagon_clip() {
        // Voronoi-like cell of the form b=[[2,1],[1,2]] at the origin.
        let mut c = ConvexCell::bounding_box(2, &[rat_i(0), rat_i(0)], &rat_i(4));
        let b = [[rat_i(2), rat_i(1)], [rat_i(1), rat_i(2)]];
        for kx in -2i64..=2 {
            for ky in -2i64..=2 {
                if kx == 0 && ky == 0 {
                    continue;
                }
                // b(x, k) <= q(k)
                let normal = alloc::vec![
                    &b[0][0] * rat_i(kx) + &b[0][1] * rat_i(ky),
                    &b[1][0] * rat_i(kx) + &b[1][1] * rat_i(ky),
                ];
                let q = (rat_i(kx) * &normal[0] + rat_i(ky) * &normal[1]) / rat_i(2);
                assert!(c.clip(&HalfSpace::new(normal, q)));
            }
        }
        assert_eq!(c.vertices().len(), 6);
        assert_eq!(c.volume(), rat_i(1)); // covolume of Z^2
    }

    #[test]
    fn cube_clipping_and_volume() {
        let mut c = ConvexCell::bounding_box(3, &[rat_i(0), rat_i(0), rat_i(0)], &rat_i(3));
        for axis in 0..3 {
            for sign in [1i64, -1] {
                let mut n = [0i64; 3];
                n[axis] = sign;
                assert!(c.clip(&hs(&n, rat(1, 2))));
            }
        }
        assert_eq!(c.volume(), rat_i(1));
        assert_eq!(c.vertices().len(), 8);
        assert_eq!(c.edges().len(), 12);
        // cut a corner: x+y+z <= 1 slices a tetrahedron of volume 1/48... compute:
        // corner at (1/2,1/2,1/2), cut plane x+y+z=1 -> tetra edge 1/2, vol (1/2)^3/6
        assert!(c.clip(&hs(&[1, 1, 1], rat_i(1))));
        assert_eq!(c.volume(), rat_i(1) - rat(1, 48));
    }

    #[test]
    fn tetrahedron_from_halfspaces() {
        let mut c = ConvexCell::bounding_box(3, &[rat_i(0), rat_i(0), rat_i(0)], &rat_i(9));
        assert!(c.clip(&hs(&[-1, 0, 0], rat_i(0))));
        assert!(c.clip(&hs(&[0, -1, 0], rat_i(0))));
        assert!(c.clip(&hs(&[0, 0, -1], rat_i(0))));
        assert!(c.clip(&hs(&[1, 1, 1], rat_i(1))));
        assert_eq!(c.volume(), rat(1, 6));
        assert_eq!(c.vertices().len(), 4);
    }

    #[test]
    fn hull_volumes() {
        // unit square
        let sq = alloc::vec![
            alloc::vec![rat_i(0), rat_i(0)],
            alloc::vec![rat_i(1), rat_i(0)],
            alloc::vec![rat_i(1), rat_i(1)],
            alloc::vec![rat_i(0), rat_i(1)],
            alloc::vec![rat(1, 2), rat(1, 2)], // interior point ignored
        ];
        assert_eq!(convex_hull_volume(2, &sq), rat_i(1));
        // degenerate
        let line = alloc::vec![
            alloc::vec![rat_i(0), rat_i(0)],
            alloc::vec![rat_i(2), rat_i(2)],
        ];
        assert_eq!(convex_hull_volume(2, &line), rat_i(0));
        // octahedron |x|+|y|+|z| <= 1 has volume 4/3
        let mut oct = alloc::vec::Vec::new();
        for axis in 0..3usize {
            for sign in [1i64, -1] {
                let mut p = alloc::vec![rat_i(0), rat_i(0), rat_i(0)];
                p[axis] = rat_i(sign);
                oct.push(p);
            }
        }
        assert_eq!(convex_hull_volume(3, &oct), rat(4, 3));
    }

    #[test]
    fn hull_2d_collinear_input() {
        let pts = alloc::vec![
            alloc::vec![rat_i(0), rat_i(0)],
            alloc::vec![rat_i(1), rat_i(0)],
            alloc::vec![rat_i(2), rat_i(0)],
            alloc::vec![rat_i(1), rat_i(1)],
        ];
        let hull = convex_hull_2d(&pts);
        assert_eq!(hull.len(), 3);
    }
}
