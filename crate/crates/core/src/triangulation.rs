//! Triangulations of the labelled convex `n`-gon.
//!
//! Vertices are `0..n` in counterclockwise order. A triangulation is stored
//! as its sorted diagonal list; triangles, the plane dual tree and the
//! horoball fans are derived from it. A Farey labelling embeds the polygon
//! in the Farey tessellation so that counterclockwise order on the polygon
//! matches increasing order on `R ∪ {∞}`.

use std::collections::{HashMap, VecDeque};

use num_bigint::BigUint;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::farey::{continuant, farey_apexes, iota, Slope, TurnSequence};

/// Largest polygon accepted by [`enumerate`].
pub const ENUMERATE_MAX_N: usize = 24;

pub type Diagonal = (usize, usize);

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "TriangulationRecord", into = "TriangulationRecord")]
pub struct Triangulation {
    n: usize,
    diagonals: Vec<Diagonal>,
    #[serde(skip)]
    triangles: Vec<[usize; 3]>,
}

/// Wire form: `{"n": 6, "diagonals": [[0,2],[0,3],[0,4]]}`.
#[derive(Serialize, Deserialize)]
struct TriangulationRecord {
    n: usize,
    diagonals: Vec<[usize; 2]>,
}

impl TryFrom<TriangulationRecord> for Triangulation {
    type Error = Error;

    fn try_from(r: TriangulationRecord) -> Result<Self> {
        Triangulation::new(r.n, r.diagonals.iter().map(|d| (d[0], d[1])).collect())
    }
}

impl From<Triangulation> for TriangulationRecord {
    fn from(t: Triangulation) -> Self {
        TriangulationRecord {
            n: t.n,
            diagonals: t.diagonals.iter().map(|&(a, b)| [a, b]).collect(),
        }
    }
}

impl Triangulation {
    /// Validates and normalises a diagonal list (endpoints are reordered and
    /// the list sorted).
    pub fn new(n: usize, diagonals: Vec<Diagonal>) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidTriangulation(msg));
        if n < 3 {
            return bad(format!("polygon needs at least 3 vertices, got {n}"));
        }
        let mut diags: Vec<Diagonal> = diagonals
            .into_iter()
            .map(|(a, b)| if a < b { (a, b) } else { (b, a) })
            .collect();
        diags.sort_unstable();
        if diags.len() != n - 3 {
            return bad(format!(
                "{n}-gon needs {} diagonals, got {}",
                n - 3,
                diags.len()
            ));
        }
        for w in diags.windows(2) {
            if w[0] == w[1] {
                return bad(format!("repeated diagonal {:?}", w[0]));
            }
        }
        for &(a, b) in &diags {
            if b >= n {
                return bad(format!("diagonal ({a}, {b}) leaves the {n}-gon"));
            }
            if b - a < 2 || (a == 0 && b == n - 1) {
                return bad(format!("({a}, {b}) is a polygon side"));
            }
        }
        for (i, &(a, b)) in diags.iter().enumerate() {
            for &(c, d) in &diags[i + 1..] {
                if (a < c && c < b && b < d) || (c < a && a < d && d < b) {
                    return bad(format!("diagonals ({a}, {b}) and ({c}, {d}) cross"));
                }
            }
        }
        let triangles = compute_triangles(n, &diags);
        if triangles.len() != n - 2 {
            return Err(Error::Invariant(format!(
                "{n}-gon produced {} triangles",
                triangles.len()
            )));
        }
        Ok(Triangulation {
            n,
            diagonals: diags,
            triangles,
        })
    }

    /// The fan with every diagonal at `apex`.
    pub fn fan(n: usize, apex: usize) -> Result<Self> {
        if apex >= n {
            return Err(Error::VertexOutOfRange { vertex: apex, n });
        }
        let diags = (2..n.saturating_sub(1))
            .map(|o| {
                let w = (apex + o) % n;
                (apex.min(w), apex.max(w))
            })
            .collect();
        Triangulation::new(n, diags)
    }

    /// The triangulated polygon spanned by a set of slopes that pairwise
    /// bound a Farey polygon. Vertices follow increasing slope order with
    /// `1/0` last; returns the triangulation and the slope of each vertex.
    pub fn from_slopes(slopes: &[Slope]) -> Result<(Self, FareyLabelling)> {
        let mut sorted = slopes.to_vec();
        sorted.sort();
        sorted.dedup();
        let n = sorted.len();
        if n < 3 {
            return Err(Error::InvalidTriangulation(format!(
                "{n} slopes cannot span a polygon"
            )));
        }
        for i in 0..n {
            let j = (i + 1) % n;
            if !crate::farey::is_farey_edge(&sorted[i], &sorted[j]) {
                return Err(Error::InvalidTriangulation(format!(
                    "consecutive slopes {} and {} are not Farey neighbours",
                    sorted[i], sorted[j]
                )));
            }
        }
        let mut diags = Vec::new();
        for i in 0..n {
            for j in (i + 2)..n {
                if !(i == 0 && j == n - 1) && crate::farey::is_farey_edge(&sorted[i], &sorted[j]) {
                    diags.push((i, j));
                }
            }
        }
        let t = Triangulation::new(n, diags)?;
        let labels = FareyLabelling { labels: sorted };
        labels.check_against(&t)?;
        Ok((t, labels))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn diagonals(&self) -> &[Diagonal] {
        &self.diagonals
    }

    /// Triangles as ascending (hence counterclockwise) vertex triples, sorted.
    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn check_vertex(&self, v: usize) -> Result<()> {
        if v >= self.n {
            Err(Error::VertexOutOfRange {
                vertex: v,
                n: self.n,
            })
        } else {
            Ok(())
        }
    }

    /// True when `u` and `v` span a side or a diagonal.
    pub fn adjacent(&self, u: usize, v: usize) -> bool {
        let (a, b) = (u.min(v), u.max(v));
        if a == b {
            return false;
        }
        b - a == 1 || (a == 0 && b == self.n - 1) || self.diagonals.binary_search(&(a, b)).is_ok()
    }

    /// Number of diagonals at `v`.
    pub fn degree(&self, v: usize) -> usize {
        self.diagonals
            .iter()
            .filter(|&&(a, b)| a == v || b == v)
            .count()
    }

    /// Indices (into [`Self::triangles`]) of the triangles at `v`, ordered from
    /// the side `{v−1, v}` around to the side `{v, v+1}`.
    pub fn fan_at(&self, v: usize) -> Vec<usize> {
        let n = self.n;
        let offset = |x: usize| (x + n - v) % n;
        let mut fan: Vec<(usize, usize)> = self
            .triangles
            .iter()
            .enumerate()
            .filter(|(_, t)| t.contains(&v))
            .map(|(i, t)| {
                let far = t
                    .iter()
                    .filter(|&&x| x != v)
                    .map(|&x| offset(x))
                    .max()
                    .unwrap();
                (far, i)
            })
            .collect();
        fan.sort_unstable_by_key(|&(far, _)| std::cmp::Reverse(far));
        fan.into_iter().map(|(_, i)| i).collect()
    }

    /// Neighbours of `v` in the triangulation from `v−1` around to `v+1`.
    pub fn fan_neighbours(&self, v: usize) -> Vec<usize> {
        let n = self.n;
        let mut nb: Vec<usize> = (0..n).filter(|&u| self.adjacent(u, v)).collect();
        nb.sort_unstable_by_key(|&u| std::cmp::Reverse((u + n - v) % n));
        nb
    }

    /// Image under the rotation `v ↦ v + r` (and then the reflection
    /// `v ↦ −v` when `reflect` is set), all mod `n`.
    pub fn dihedral_image(&self, r: usize, reflect: bool) -> Triangulation {
        let n = self.n;
        let map = |v: usize| {
            let w = (v + r) % n;
            if reflect {
                (n - w) % n
            } else {
                w
            }
        };
        let diags = self
            .diagonals
            .iter()
            .map(|&(a, b)| (map(a), map(b)))
            .collect();
        Triangulation::new(n, diags).expect("dihedral image of a triangulation")
    }

    fn dihedral_images(&self) -> impl Iterator<Item = Triangulation> + '_ {
        (0..self.n).flat_map(move |r| [false, true].map(|f| self.dihedral_image(r, f)))
    }

    /// True when this diagonal list is lexicographically least in its
    /// dihedral orbit.
    pub fn is_canonical(&self) -> bool {
        self.dihedral_images()
            .all(|img| self.diagonals <= img.diagonals)
    }

    /// Least member of the dihedral orbit.
    pub fn canonical(&self) -> Triangulation {
        self.dihedral_images().min().unwrap()
    }

    /// Size of the dihedral orbit, `2n / |stabiliser|`.
    pub fn orbit_size(&self) -> usize {
        let stab = self.dihedral_images().filter(|img| img == self).count();
        2 * self.n / stab
    }
}

fn compute_triangles(n: usize, diags: &[Diagonal]) -> Vec<[usize; 3]> {
    let mut adj = vec![false; n * n];
    let mut set = |a: usize, b: usize| {
        adj[a * n + b] = true;
        adj[b * n + a] = true;
    };
    for i in 0..n {
        set(i, (i + 1) % n);
    }
    for &(a, b) in diags {
        set(a, b);
    }
    // Each triangle i < k < j is found once, from its outer side (i, j).
    let mut tris = Vec::with_capacity(n - 2);
    for i in 0..n {
        for j in (i + 2)..n {
            if !adj[i * n + j] {
                continue;
            }
            for k in (i + 1)..j {
                if adj[i * n + k] && adj[k * n + j] {
                    tris.push([i, k, j]);
                }
            }
        }
    }
    tris.sort_unstable();
    tris
}

/// Plane dual tree: one node per triangle, sides in counterclockwise order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualTree {
    /// `nodes[i]` is the triangle `[a, b, c]` with `a < b < c`.
    pub nodes: Vec<[usize; 3]>,
    /// `rotation[i][s]` is the node across side `s` of node `i`, where side
    /// `s` joins `nodes[i][s]` to `nodes[i][(s+1) % 3]`; `None` is a leaf
    /// (polygon side).
    pub rotation: Vec<[Option<usize>; 3]>,
    /// Tree edges `(i, j)` with `i < j`, one per diagonal.
    pub edges: Vec<(usize, usize)>,
}

impl DualTree {
    pub fn side_towards(&self, node: usize, other: usize) -> Option<usize> {
        self.rotation[node].iter().position(|&x| x == Some(other))
    }

    pub fn degree(&self, node: usize) -> usize {
        self.rotation[node].iter().filter(|x| x.is_some()).count()
    }
}

pub fn dual_tree(t: &Triangulation) -> DualTree {
    let nodes = t.triangles().to_vec();
    let mut owners: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for (i, tri) in nodes.iter().enumerate() {
        for s in 0..3 {
            let (a, b) = (tri[s], tri[(s + 1) % 3]);
            owners.entry((a.min(b), a.max(b))).or_default().push(i);
        }
    }
    let mut rotation = vec![[None; 3]; nodes.len()];
    let mut edges = Vec::new();
    for (i, tri) in nodes.iter().enumerate() {
        for s in 0..3 {
            let (a, b) = (tri[s], tri[(s + 1) % 3]);
            let own = &owners[&(a.min(b), a.max(b))];
            if let Some(&j) = own.iter().find(|&&j| j != i) {
                rotation[i][s] = Some(j);
                if i < j {
                    edges.push((i, j));
                }
            }
        }
    }
    edges.sort_unstable();
    DualTree {
        nodes,
        rotation,
        edges,
    }
}

/// The horoball region of a polygon vertex: the fan of triangles at the
/// vertex, which the dual tree traverses with turns in a single direction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HoroballRef {
    pub vertex: usize,
    /// Dual nodes `p_1, …, p_w` from the `v−1` side to the `v+1` side.
    pub nodes: Vec<usize>,
    /// Dual edges between consecutive nodes; empty for an ear.
    pub spine: Vec<(usize, usize)>,
}

pub fn horoball(t: &Triangulation, v: usize) -> Result<HoroballRef> {
    t.check_vertex(v)?;
    let nodes = t.fan_at(v);
    let spine = nodes.windows(2).map(|w| (w[0], w[1])).collect();
    Ok(HoroballRef {
        vertex: v,
        nodes,
        spine,
    })
}

pub fn horoballs(t: &Triangulation) -> Vec<HoroballRef> {
    (0..t.n()).map(|v| horoball(t, v).unwrap()).collect()
}

/// Left/right run lengths along the non-backtracking dual path from the
/// horoball of `u` to the horoball of `v`.
///
/// The path runs through triangles `T_0, …, T_m` with `T_0` at `u` and
/// `T_m` at `v`. Turns at the interior nodes are grouped into runs; the
/// origin and terminal nodes each count as one more turn in the direction
/// of the adjacent run, so a path with no interior turn gives `(2)`.
/// Adjacent horoballs give the empty sequence.
pub fn turn_sequence(t: &Triangulation, u: usize, v: usize) -> Result<TurnSequence> {
    t.check_vertex(u)?;
    t.check_vertex(v)?;
    if u == v {
        return Err(Error::DegeneratePath(u));
    }
    if t.adjacent(u, v) {
        return Ok(TurnSequence::empty());
    }
    let tree = dual_tree(t);
    let path = region_path(&tree, u, v);
    let m = path.len() - 1;
    let mut turns = Vec::with_capacity(m.saturating_sub(1));
    for i in 1..m {
        let s_in = tree.side_towards(path[i], path[i - 1]).unwrap();
        let s_out = tree.side_towards(path[i], path[i + 1]).unwrap();
        turns.push(s_out == (s_in + 1) % 3);
    }
    let mut runs: Vec<u64> = Vec::new();
    let mut last = None;
    for left in turns {
        if last == Some(left) {
            *runs.last_mut().unwrap() += 1;
        } else {
            runs.push(1);
            last = Some(left);
        }
    }
    if runs.is_empty() {
        runs.push(0);
    }
    runs[0] += 1;
    *runs.last_mut().unwrap() += 1;
    TurnSequence::new(runs)
}

/// Shortest dual path from the fan at `u` to the fan at `v` (disjoint fans).
fn region_path(tree: &DualTree, u: usize, v: usize) -> Vec<usize> {
    let k = tree.nodes.len();
    let mut prev = vec![usize::MAX; k];
    let mut seen = vec![false; k];
    let mut queue = VecDeque::new();
    for (i, tri) in tree.nodes.iter().enumerate() {
        if tri.contains(&u) {
            seen[i] = true;
            queue.push_back(i);
        }
    }
    while let Some(x) = queue.pop_front() {
        if tree.nodes[x].contains(&v) {
            let mut path = vec![x];
            let mut cur = x;
            while prev[cur] != usize::MAX {
                cur = prev[cur];
                path.push(cur);
            }
            path.reverse();
            return path;
        }
        for y in tree.rotation[x].iter().flatten().copied() {
            if !seen[y] {
                seen[y] = true;
                prev[y] = x;
                queue.push_back(y);
            }
        }
    }
    unreachable!("dual tree is connected")
}

/// `ι(H_u, H_v)` from the dual tree alone.
pub fn intersection_via_tree(t: &Triangulation, u: usize, v: usize) -> Result<BigUint> {
    if u == v {
        t.check_vertex(u)?;
        return Ok(BigUint::ZERO);
    }
    Ok(continuant(&turn_sequence(t, u, v)?))
}

/// Slopes for every polygon vertex, indexed by vertex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FareyLabelling {
    pub labels: Vec<Slope>,
}

impl FareyLabelling {
    pub fn label(&self, v: usize) -> &Slope {
        &self.labels[v]
    }

    pub fn vertex_of(&self, s: &Slope) -> Option<usize> {
        self.labels.iter().position(|x| x == s)
    }

    /// Every triangle is a Farey triangle and labels are distinct.
    pub fn check_against(&self, t: &Triangulation) -> Result<()> {
        if self.labels.len() != t.n() {
            return Err(Error::Invariant(format!(
                "{} labels for a {}-gon",
                self.labels.len(),
                t.n()
            )));
        }
        for tri in t.triangles() {
            for s in 0..3 {
                let (a, b) = (tri[s], tri[(s + 1) % 3]);
                if !crate::farey::is_farey_edge(&self.labels[a], &self.labels[b]) {
                    return Err(Error::Invariant(format!(
                        "labels {} and {} on side ({a}, {b}) are not Farey neighbours",
                        self.labels[a], self.labels[b]
                    )));
                }
            }
        }
        let mut sorted = self.labels.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != self.labels.len() {
            return Err(Error::Invariant("repeated label".into()));
        }
        Ok(())
    }
}

/// True when `(x, y, z)` is a cyclic rotation of an increasing triple.
pub fn cyclically_increasing(x: &Slope, y: &Slope, z: &Slope) -> bool {
    (x < y && y < z) || (y < z && z < x) || (z < x && x < y)
}

/// Propagates Farey addition outward from `base`, whose vertices
/// `a < b < c` receive `assignment` in that order.
pub fn farey_labelling(
    t: &Triangulation,
    base: usize,
    assignment: [Slope; 3],
) -> Result<FareyLabelling> {
    let tree = dual_tree(t);
    if base >= tree.nodes.len() {
        return Err(Error::InconsistentAssignment(format!(
            "triangle index {base} out of range"
        )));
    }
    let [x, y, z] = &assignment;
    for (p, q) in [(x, y), (y, z), (z, x)] {
        if !crate::farey::is_farey_edge(p, q) {
            return Err(Error::InconsistentAssignment(format!(
                "{p} and {q} intersect {} times",
                iota(p, q)
            )));
        }
    }
    if !cyclically_increasing(x, y, z) {
        return Err(Error::InconsistentAssignment(format!(
            "({x}, {y}, {z}) reverses the polygon orientation"
        )));
    }
    let mut labels: Vec<Option<Slope>> = vec![None; t.n()];
    for (v, s) in tree.nodes[base].iter().zip(assignment) {
        labels[*v] = Some(s);
    }
    let mut seen = vec![false; tree.nodes.len()];
    seen[base] = true;
    let mut queue = VecDeque::from([base]);
    while let Some(i) = queue.pop_front() {
        let tri = tree.nodes[i];
        for s in 0..3 {
            let Some(j) = tree.rotation[i][s] else {
                continue;
            };
            if seen[j] {
                continue;
            }
            seen[j] = true;
            let (a, b) = (tri[s], tri[(s + 1) % 3]);
            let old = tri[(s + 2) % 3];
            let new = *tree.nodes[j].iter().find(|&&w| w != a && w != b).unwrap();
            let (la, lb) = (labels[a].as_ref().unwrap(), labels[b].as_ref().unwrap());
            let (plus, minus) = farey_apexes(la, lb)?;
            let lold = labels[old].as_ref().unwrap();
            labels[new] = Some(if &plus == lold { minus } else { plus });
            queue.push_back(j);
        }
    }
    let labelling = FareyLabelling {
        labels: labels.into_iter().map(Option::unwrap).collect(),
    };
    labelling.check_against(t)?;
    Ok(labelling)
}

/// Labelling with `(1/0, 0/1, 1/1)` on triangle 0.
pub fn default_labelling(t: &Triangulation) -> FareyLabelling {
    // (0/1, 1/1, 1/0) is the cyclically increasing rotation of (1/0, 0/1, 1/1).
    farey_labelling(
        t,
        0,
        [Slope::integer(0), Slope::integer(1), Slope::infinity()],
    )
    .expect("standard base triangle is consistent")
}

pub fn intersection_via_labels(l: &FareyLabelling, u: usize, v: usize) -> BigUint {
    iota(&l.labels[u], &l.labels[v])
}

/// Replaces diagonal `d` by the other diagonal of its quadrilateral.
pub fn flip(t: &Triangulation, d: Diagonal) -> Result<Triangulation> {
    let (a, b) = (d.0.min(d.1), d.0.max(d.1));
    if t.diagonals().binary_search(&(a, b)).is_err() {
        return Err(Error::MissingDiagonal(a, b));
    }
    let apexes: Vec<usize> = t
        .triangles()
        .iter()
        .filter(|tri| tri.contains(&a) && tri.contains(&b))
        .map(|tri| *tri.iter().find(|&&x| x != a && x != b).unwrap())
        .collect();
    let (c, e) = (apexes[0].min(apexes[1]), apexes[0].max(apexes[1]));
    let diags = t
        .diagonals()
        .iter()
        .copied()
        .filter(|&x| x != (a, b))
        .chain([(c, e)])
        .collect();
    Triangulation::new(t.n(), diags)
}

/// `Catalan(m) = binom(2m, m)/(m+1)`.
pub fn catalan(m: usize) -> BigUint {
    let mut c = BigUint::from(1u32);
    for i in 0..m {
        c = c * (2 * (2 * i + 1)) / (i + 2);
    }
    c
}

/// Decodes a Dyck word (false = open, true = close) into the diagonals of
/// the polygon `i..=j`: the word `( A ) B` puts the apex of the triangle on
/// side `(i, j)` at `i + 1 + |A|/2`.
fn decode_dyck(word: &[bool], i: usize, j: usize, out: &mut Vec<Diagonal>) {
    if j - i < 2 {
        debug_assert!(word.is_empty());
        return;
    }
    let mut depth = 0i32;
    let mut close = 0;
    for (p, &c) in word.iter().enumerate() {
        depth += if c { -1 } else { 1 };
        if depth == 0 {
            close = p;
            break;
        }
    }
    let (a, b) = (&word[1..close], &word[close + 1..]);
    let k = i + 1 + a.len() / 2;
    if k - i >= 2 {
        out.push((i, k));
    }
    if j - k >= 2 {
        out.push((k, j));
    }
    decode_dyck(a, i, k, out);
    decode_dyck(b, k, j, out);
}

/// Dyck words with `m` pairs in lexicographic order (open < close).
#[derive(Clone, Debug)]
pub struct DyckWords {
    word: Vec<bool>,
    fresh: bool,
    done: bool,
}

impl DyckWords {
    pub fn new(m: usize) -> Self {
        let mut word = vec![false; m];
        word.extend(std::iter::repeat_n(true, m));
        DyckWords {
            word,
            fresh: true,
            done: false,
        }
    }

    fn advance(&mut self) -> bool {
        let len = self.word.len();
        let m = len / 2;
        let mut opens = self.word.iter().filter(|c| !**c).count();
        let mut balance: i64 = self.word.iter().map(|&c| if c { -1 } else { 1 }).sum();
        // Walk right-to-left keeping the prefix balance and open count of word[..i].
        for i in (0..len).rev() {
            let c = self.word[i];
            balance -= if c { -1 } else { 1 };
            if !c {
                opens -= 1;
            }
            if !c && balance >= 1 {
                self.word[i] = true;
                let remaining_opens = m - opens;
                for (p, slot) in self.word[i + 1..].iter_mut().enumerate() {
                    *slot = p >= remaining_opens;
                }
                return true;
            }
        }
        false
    }
}

impl Iterator for DyckWords {
    type Item = Vec<bool>;

    fn next(&mut self) -> Option<Vec<bool>> {
        if self.done {
            return None;
        }
        if self.fresh {
            self.fresh = false;
        } else if !self.advance() {
            self.done = true;
            return None;
        }
        Some(self.word.clone())
    }
}

/// All triangulations whose triangle on side `(0, n−1)` has the given apex.
#[derive(Clone, Debug)]
pub struct Shard {
    n: usize,
    apex: usize,
    left: DyckWords,
    right: DyckWords,
    current_left: Option<Vec<bool>>,
}

impl Shard {
    pub fn new(n: usize, apex: usize) -> Self {
        assert!(apex >= 1 && apex + 1 < n, "apex {apex} invalid for n = {n}");
        let mut left = DyckWords::new(apex - 1);
        let current_left = left.next();
        Shard {
            n,
            apex,
            left,
            right: DyckWords::new(n - 2 - apex),
            current_left,
        }
    }

    pub fn apex(&self) -> usize {
        self.apex
    }
}

impl Iterator for Shard {
    type Item = Triangulation;

    fn next(&mut self) -> Option<Triangulation> {
        loop {
            let left = self.current_left.as_ref()?;
            if let Some(right) = self.right.next() {
                let (n, k) = (self.n, self.apex);
                let mut diags = Vec::with_capacity(n - 3);
                if k >= 2 {
                    diags.push((0, k));
                }
                if n - 1 - k >= 2 {
                    diags.push((k, n - 1));
                }
                decode_dyck(left, 0, k, &mut diags);
                decode_dyck(&right, k, n - 1, &mut diags);
                return Some(Triangulation::new(n, diags).expect("decoded Dyck word"));
            }
            self.current_left = self.left.next();
            self.right = DyckWords::new(self.n - 2 - self.apex);
        }
    }
}

/// Stream over the associahedron vertex set, shard by shard.
#[derive(Clone, Debug)]
pub struct Enumeration {
    shards: std::vec::IntoIter<Shard>,
    current: Option<Shard>,
    modulo_symmetry: bool,
}

impl Iterator for Enumeration {
    type Item = Triangulation;

    fn next(&mut self) -> Option<Triangulation> {
        loop {
            let shard = self.current.as_mut()?;
            match shard.next() {
                Some(t) if !self.modulo_symmetry || t.is_canonical() => return Some(t),
                Some(_) => {}
                None => self.current = self.shards.next(),
            }
        }
    }
}

/// Every triangulation of the `n`-gon once, or one representative (the
/// lexicographically least diagonal list) per dihedral orbit.
pub fn enumerate(n: usize, modulo_symmetry: bool) -> Result<Enumeration> {
    let mut shards = shards(n)?.into_iter();
    let current = shards.next();
    Ok(Enumeration {
        shards,
        current,
        modulo_symmetry,
    })
}

/// Independent sub-streams, one per apex of the triangle on side `(0, n−1)`.
pub fn shards(n: usize) -> Result<Vec<Shard>> {
    if !(3..=ENUMERATE_MAX_N).contains(&n) {
        return Err(Error::SizeOutOfRange {
            n,
            min: 3,
            max: ENUMERATE_MAX_N,
        });
    }
    Ok((1..n - 1).map(|k| Shard::new(n, k)).collect())
}

/// Uniformly random triangulation (cycle lemma on a shuffled bracket word).
pub fn random_triangulation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Triangulation {
    assert!(n >= 3);
    let m = n - 2;
    let mut seq: Vec<bool> = std::iter::repeat_n(false, m)
        .chain(std::iter::repeat_n(true, m + 1))
        .collect();
    seq.shuffle(rng);
    // Rotate to start just after the first minimum of the prefix sums.
    let (mut bal, mut min, mut at) = (0i64, 0i64, 0usize);
    for (i, &c) in seq.iter().enumerate() {
        bal += if c { -1 } else { 1 };
        if bal < min {
            min = bal;
            at = i + 1;
        }
    }
    let len = seq.len();
    seq.rotate_left(at % len);
    seq.pop();
    let mut diags = Vec::with_capacity(n - 3);
    decode_dyck(&seq, 0, n - 1, &mut diags);
    Triangulation::new(n, diags).expect("decoded Dyck word")
}
