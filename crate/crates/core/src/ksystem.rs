//! Maximal intersection numbers of triangulations, branch accounting
//! relative to a horoball, and exact computation of `κ_T(n)` and `η_T(k)`.

use std::collections::BTreeSet;
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Instant;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::farey_series;
use crate::farey::{farey_apexes, iota, is_farey_edge, Slope, UnimodularMap};
use crate::hyperbolic::{cutting_sequence, Geodesic};
use crate::numtheory::{coprime_count, gamma_graph, totient};
use crate::triangulation::{
    cyclically_increasing, default_labelling, enumerate, farey_labelling, Diagonal, FareyLabelling,
    Triangulation, ENUMERATE_MAX_N,
};

/// Best `(κ, diagonals)` of a shard and the leaves it evaluated.
type ShardResult = (Option<(u64, Vec<Diagonal>)>, u64);

/// Default upper limit for `κ_T(n)` searches.
pub const DEFAULT_MAX_N: usize = 14;

pub fn kappa(t: &Triangulation) -> BigUint {
    kappa_labelled(&default_labelling(t))
}

pub fn kappa_labelled(l: &FareyLabelling) -> BigUint {
    kappa_with_pair(l).0
}

/// `κ` together with the lexicographically first vertex pair realising it.
pub fn kappa_with_pair(l: &FareyLabelling) -> (BigUint, (usize, usize)) {
    let n = l.labels.len();
    let mut best = (BigUint::zero(), (0, 1));
    for u in 0..n {
        for v in (u + 1)..n {
            let i = iota(&l.labels[u], &l.labels[v]);
            if i > best.0 {
                best = (i, (u, v));
            }
        }
    }
    best
}

/// `ι` between the horoballs at the two extreme edges of the fan at `v`,
/// which is the number of triangles at `v`.
pub fn width(t: &Triangulation, v: usize) -> Result<BigUint> {
    t.check_vertex(v)?;
    Ok(width_labelled(&default_labelling(t), v))
}

pub fn width_labelled(l: &FareyLabelling, v: usize) -> BigUint {
    let n = l.labels.len();
    iota(&l.labels[(v + n - 1) % n], &l.labels[(v + 1) % n])
}

/// Largest `ι` between `v` and any other horoball.
pub fn height(t: &Triangulation, v: usize) -> Result<BigUint> {
    t.check_vertex(v)?;
    Ok(height_labelled(&default_labelling(t), v))
}

pub fn height_labelled(l: &FareyLabelling, v: usize) -> BigUint {
    let me = &l.labels[v];
    l.labels
        .iter()
        .map(|s| iota(me, s))
        .max()
        .unwrap_or_default()
}

fn small(x: &BigInt) -> Result<u64> {
    x.to_u64()
        .ok_or_else(|| Error::Invariant(format!("{x} does not fit the profile's integer range")))
}

/// A horoball counted in a branch: local label `numer/denom`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BranchHoroball {
    pub vertex: usize,
    pub numer: u64,
    pub denom: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Branch {
    /// Polygon vertices of the branch closure, counterclockwise.
    pub vertices: Vec<usize>,
    /// Horoballs attributed to this branch: local labels `a/k` with
    /// `1 ≤ a ≤ k`, i.e. everything except the `0/1` endpoint.
    pub horoballs: Vec<BranchHoroball>,
    /// Largest denominator in the branch.
    pub height: u64,
}

impl Branch {
    fn numerators_at(&self, k: u64) -> impl Iterator<Item = &BranchHoroball> {
        self.horoballs.iter().filter(move |h| h.denom == k)
    }
}

/// Height class `k`: the branches of height at least `k`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Level {
    pub k: u64,
    /// `X(k)`, 1-based branch indices.
    pub members: Vec<usize>,
    pub j_minus: usize,
    pub j_plus: usize,
    /// Largest numerator of `B(j_k^−)` at height exactly `k`, if any.
    pub ell: Option<u64>,
    /// Smallest numerator of `B(j_k^+)` at height exactly `k`, if any.
    pub r: Option<u64>,
}

impl Level {
    pub fn x(&self) -> usize {
        self.members.len()
    }
}

/// Branch data of a triangulation relative to the horoball at `vertex`.
///
/// With `u_0 = v−1, …, u_w = v+1` the fan neighbours of `v` and
/// `p_j = (v, u_{j−1}, u_j)`, branch `j` is everything beyond the side
/// `(u_{j−1}, u_j)`, labelled with `v = 1/0`, `u_j = 0/1`, `u_{j−1} = 1/1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BranchProfile {
    pub n: usize,
    pub vertex: usize,
    /// `p_1, …, p_w` as triangle indices.
    pub spine_nodes: Vec<usize>,
    pub branches: Vec<Branch>,
    /// Largest branch height, equal to the height of the triangulation at `vertex`.
    pub height: u64,
    /// Classes `k = 1..=height`.
    pub levels: Vec<Level>,
}

impl BranchProfile {
    pub fn width(&self) -> usize {
        self.branches.len()
    }

    pub fn level(&self, k: u64) -> Result<&Level> {
        if k == 0 || k > self.height {
            return Err(Error::EmptyHeightClass(k));
        }
        Ok(&self.levels[(k - 1) as usize])
    }

    /// Number of horoballs at height exactly `k`.
    pub fn count_at(&self, k: u64) -> usize {
        self.branches
            .iter()
            .map(|b| b.numerators_at(k).count())
            .sum()
    }

    fn global_label(&self, j: usize, numer: u64, denom: u64) -> (BigInt, BigInt) {
        // Branch j is translated by t − j relative to the global labelling.
        let shift = (self.width() - j) as u64;
        (
            BigInt::from(numer) + BigInt::from(shift) * BigInt::from(denom),
            BigInt::from(denom),
        )
    }
}

pub fn branch_profile(t: &Triangulation, v: usize) -> Result<BranchProfile> {
    t.check_vertex(v)?;
    let n = t.n();
    let fan = t.fan_at(v);
    let nb = t.fan_neighbours(v);
    let w = fan.len();
    // Global labelling: v = 1/0, u_i = (w − i)/1, fixed on p_1 = (v, u_0, u_1).
    let base = fan[0];
    let tri = t.triangles()[base];
    let label_of = |x: usize| {
        if x == v {
            Slope::infinity()
        } else {
            let i = nb.iter().position(|&u| u == x).unwrap();
            Slope::integer((w - i) as i64)
        }
    };
    let labelling = farey_labelling(t, base, tri.map(label_of))?;
    let offset = |x: usize| (x + n - v) % n;
    let mut branches = Vec::with_capacity(w);
    for j in 1..=w {
        let (hi, lo) = (offset(nb[j - 1]), offset(nb[j]));
        let vertices: Vec<usize> = (lo..=hi).map(|o| (v + o) % n).collect();
        let shift = BigInt::from((w - j) as u64);
        let mut horoballs = Vec::new();
        let mut height = 0;
        for &x in &vertices {
            let s = labelling.label(x);
            let denom = small(s.denom())?;
            let numer = s.numer() - &shift * s.denom();
            height = height.max(denom);
            if numer.is_zero() {
                continue;
            }
            horoballs.push(BranchHoroball {
                vertex: x,
                numer: small(&numer)?,
                denom,
            });
        }
        branches.push(Branch {
            vertices,
            horoballs,
            height,
        });
    }
    let h = branches.iter().map(|b| b.height).max().unwrap_or(1);
    let levels = (1..=h)
        .map(|k| {
            let members: Vec<usize> = (1..=w).filter(|&j| branches[j - 1].height >= k).collect();
            let (jm, jp) = (members[0], *members.last().unwrap());
            let ell = branches[jm - 1].numerators_at(k).map(|x| x.numer).max();
            let r = branches[jp - 1].numerators_at(k).map(|x| x.numer).min();
            Level {
                k,
                members,
                j_minus: jm,
                j_plus: jp,
                ell,
                r,
            }
        })
        .collect();
    let profile = BranchProfile {
        n,
        vertex: v,
        spine_nodes: fan,
        branches,
        height: h,
        levels,
    };
    let total: usize = (1..=h).map(|k| profile.count_at(k)).sum();
    if total != n - 2 {
        return Err(Error::Invariant(format!(
            "branches hold {total} horoballs, expected {}",
            n - 2
        )));
    }
    Ok(profile)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AccountingReport {
    /// Per-height bounds `φ(k)x_k − (φ(k) − #[ℓ_k]_k) − #[r_k − 1]_k`.
    pub terms: Vec<i64>,
    /// Actual number of horoballs at each height.
    pub counts: Vec<usize>,
    pub lhs: i64,
    pub rhs: i64,
    pub slack: i64,
    pub holds: bool,
}

/// Evaluates the per-height counting bound exactly. A branch with no
/// horoball at height `k` contributes `ℓ_k = 0` or `r_k = 1`, which makes
/// its bound zero.
pub fn accounting_check(p: &BranchProfile) -> AccountingReport {
    let mut terms = Vec::with_capacity(p.levels.len());
    let mut counts = Vec::with_capacity(p.levels.len());
    for lv in &p.levels {
        let k = lv.k;
        let phi = totient(k) as i64;
        let ell = lv.ell.unwrap_or(0);
        let r = lv.r.unwrap_or(1);
        let term = phi * lv.x() as i64
            - (phi - coprime_count(ell, k) as i64)
            - coprime_count(r - 1, k) as i64;
        terms.push(term);
        counts.push(p.count_at(k));
    }
    let lhs: i64 = terms.iter().sum();
    let rhs = p.n as i64 - 2;
    AccountingReport {
        terms,
        counts,
        lhs,
        rhs,
        slack: lhs - rhs,
        holds: lhs >= rhs,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CrossIntersection {
    pub k: u64,
    pub k2: u64,
    /// `kk'(j_{k'}^+ − j_k^−) + k'ℓ_k − k r_{k'}`, signed.
    pub formula: i64,
    /// `ι` of the two horoballs, from their labels.
    pub direct: u64,
}

impl CrossIntersection {
    pub fn agrees(&self) -> bool {
        self.formula >= 0 && self.formula as u64 == self.direct
    }
}

/// `I_{kk'}`: intersection of the largest-numerator horoball of
/// `B(j_k^−)` at height `k` with the smallest-numerator horoball of
/// `B(j_{k'}^+)` at height `k'`.
pub fn cross_intersection(p: &BranchProfile, k: u64, k2: u64) -> Result<CrossIntersection> {
    let (a, b) = (p.level(k)?, p.level(k2)?);
    let ell = a.ell.ok_or(Error::EmptyHeightClass(k))?;
    let r = b.r.ok_or(Error::EmptyHeightClass(k2))?;
    let (j, j2) = (a.j_minus as i64, b.j_plus as i64);
    let (ki, k2i) = (k as i64, k2 as i64);
    let formula = ki * k2i * (j2 - j).abs() + k2i * ell as i64 - ki * r as i64;
    let (p1, q1) = p.global_label(a.j_minus, ell, k);
    let (p2, q2) = p.global_label(b.j_plus, r, k2);
    let direct = (p1 * q2 - q1 * p2).magnitude().to_u64().unwrap();
    Ok(CrossIntersection {
        k,
        k2,
        formula,
        direct,
    })
}

/// Both sides of `(I_{kk'} + I_{k'k})/(kk') ≥ x_k + x_{k'} − 2 + (ℓ_k − r_k)/k + (ℓ_{k'} − r_{k'})/k'`
/// with the directly computed intersections.
pub fn pair_inequality(p: &BranchProfile, k: u64, k2: u64) -> Result<(BigRational, BigRational)> {
    let (a, b) = (p.level(k)?, p.level(k2)?);
    let i1 = cross_intersection(p, k, k2)?.direct;
    let i2 = cross_intersection(p, k2, k)?.direct;
    let frac = |x: i64, y: u64| BigRational::new(BigInt::from(x), BigInt::from(y));
    let lhs = frac((i1 + i2) as i64, k * k2);
    let edge = |lv: &Level| -> Result<BigRational> {
        let ell = lv.ell.ok_or(Error::EmptyHeightClass(lv.k))? as i64;
        let r = lv.r.ok_or(Error::EmptyHeightClass(lv.k))? as i64;
        Ok(frac(ell - r, lv.k))
    };
    let rhs = frac(a.x() as i64 + b.x() as i64 - 2, 1) + edge(a)? + edge(b)?;
    Ok((lhs, rhs))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConvexEstimate {
    /// `Σ_E (1/kk')(I_{kk'} + I_{k'k})` over the edges of `Γ_h`.
    #[serde(serialize_with = "ratio_text")]
    pub value: BigRational,
    /// `Σ_E 2/(kk')`; exactly 1 when `h ≥ 2`.
    #[serde(serialize_with = "ratio_text")]
    pub weight_sum: BigRational,
    /// Edges touching a height class without data; they contribute 0.
    pub skipped_edges: usize,
    /// `n − value`.
    #[serde(serialize_with = "ratio_text")]
    pub slack: BigRational,
}

fn ratio_text<S: serde::Serializer>(r: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(r)
}

impl ConvexEstimate {
    /// `⌈value⌉`: some pair of horoballs intersects at least this often.
    pub fn certified(&self) -> BigInt {
        self.value.ceil().to_integer()
    }
}

pub fn convex_estimate(p: &BranchProfile) -> Result<ConvexEstimate> {
    let mut value = BigRational::zero();
    let mut weight_sum = BigRational::zero();
    let mut skipped_edges = 0;
    if p.height >= 2 {
        let g = gamma_graph(p.height)?;
        for &(k, k2) in &g.edges {
            weight_sum += BigRational::new(BigInt::from(2), BigInt::from(k * k2));
            match (cross_intersection(p, k, k2), cross_intersection(p, k2, k)) {
                (Ok(a), Ok(b)) => {
                    value +=
                        BigRational::new(BigInt::from(a.direct + b.direct), BigInt::from(k * k2));
                }
                _ => skipped_edges += 1,
            }
        }
        if weight_sum != BigRational::from_integer(1.into()) {
            return Err(Error::Invariant(format!(
                "Γ_{} weights sum to {weight_sum}",
                p.height
            )));
        }
    }
    let slack = BigRational::from_integer(BigInt::from(p.n)) - &value;
    Ok(ConvexEstimate {
        value,
        weight_sum,
        skipped_edges,
        slack,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchMode {
    Full,
    SymmetryReduced,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchRecord {
    pub n: usize,
    pub kappa_min: u64,
    pub witness: Triangulation,
    /// Complete triangulations evaluated (after pruning and, in reduced
    /// mode, the canonical-representative filter).
    pub enumerated: u64,
    /// Wall-clock seconds.
    pub elapsed: f64,
    pub mode: SearchMode,
}

impl SearchRecord {
    /// Recomputes `κ(witness)`.
    pub fn verify(&self) -> Result<()> {
        let k = kappa(&self.witness);
        if self.witness.n() != self.n || k != BigUint::from(self.kappa_min) {
            return Err(Error::Invariant(format!(
                "cached witness for n = {} has κ = {k}, record says {}",
                self.n, self.kappa_min
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchOptions {
    pub max_n: usize,
    pub symmetry: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            max_n: DEFAULT_MAX_N,
            symmetry: true,
        }
    }
}

/// Upper bound for `κ_T(n)` from the fan and from a trimmed Farey series.
pub fn incumbent_bound(n: usize) -> u64 {
    let fan = (n as u64).saturating_sub(2).max(1);
    let mut h = 1;
    let mut slopes = loop {
        h += 1;
        let s = farey_series(h);
        if s.len() >= n {
            break s;
        }
    };
    // Drop ears of largest denominator until n slopes remain.
    while slopes.len() > n {
        let m = slopes.len();
        let ear = (0..m)
            .filter(|&i| is_farey_edge(&slopes[(i + m - 1) % m], &slopes[(i + 1) % m]))
            .max_by(|&a, &b| slopes[a].denom().cmp(slopes[b].denom()).then(b.cmp(&a)))
            .expect("a triangulated polygon has ears");
        slopes.remove(ear);
    }
    let mut far = 0u64;
    for (i, a) in slopes.iter().enumerate() {
        for b in &slopes[i + 1..] {
            far = far.max(iota(a, b).to_u64().unwrap_or(u64::MAX));
        }
    }
    fan.min(far)
}

type Vec2 = (i64, i64);

struct Dfs<'a> {
    n: usize,
    labels: Vec<Vec2>,
    assigned: Vec<usize>,
    diagonals: Vec<Diagonal>,
    pending: Vec<(usize, usize)>,
    bound: &'a AtomicU64,
    symmetry: bool,
    best: Option<(u64, Vec<Diagonal>)>,
    leaves: u64,
}

impl Dfs<'_> {
    fn new(n: usize, bound: &AtomicU64, symmetry: bool) -> Dfs<'_> {
        let mut labels = vec![(0, 0); n];
        labels[0] = (1, 0);
        labels[n - 1] = (0, 1);
        Dfs {
            n,
            labels,
            assigned: vec![0, n - 1],
            diagonals: Vec::with_capacity(n - 3),
            pending: Vec::with_capacity(n),
            bound,
            symmetry,
            best: None,
            leaves: 0,
        }
    }

    /// Places apex `k` over `(i, j)`; returns the new running maximum or
    /// `None` when it already exceeds the shared bound.
    fn place(&mut self, i: usize, j: usize, k: usize, current: u64) -> Option<u64> {
        let (a, b) = (self.labels[i], self.labels[j]);
        let label = (a.0 + b.0, a.1 + b.1);
        let limit = self.bound.load(Ordering::Relaxed);
        let mut m = current;
        for &x in &self.assigned {
            let y = self.labels[x];
            let i = (label.0 * y.1 - label.1 * y.0).unsigned_abs();
            if i > m {
                if i > limit {
                    return None;
                }
                m = i;
            }
        }
        self.labels[k] = label;
        self.assigned.push(k);
        if k - i >= 2 {
            self.diagonals.push((i, k));
            self.pending.push((i, k));
        }
        if j - k >= 2 {
            self.diagonals.push((k, j));
            self.pending.push((k, j));
        }
        Some(m)
    }

    fn unplace(&mut self, i: usize, j: usize, k: usize) {
        self.assigned.pop();
        for _ in 0..((k - i >= 2) as usize + (j - k >= 2) as usize) {
            self.diagonals.pop();
            self.pending.pop();
        }
    }

    fn run(&mut self, current: u64) {
        let Some((i, j)) = self.pending.pop() else {
            self.leaf(current);
            return;
        };
        for k in (i + 1)..j {
            if let Some(m) = self.place(i, j, k, current) {
                self.run(m);
                self.unplace(i, j, k);
            }
        }
        self.pending.push((i, j));
    }

    fn leaf(&mut self, value: u64) {
        let mut diags = self.diagonals.clone();
        diags.sort_unstable();
        if self.symmetry {
            let t =
                Triangulation::new(self.n, diags.clone()).expect("search builds triangulations");
            if !t.is_canonical() {
                return;
            }
        }
        self.leaves += 1;
        self.bound.fetch_min(value, Ordering::Relaxed);
        let better = match &self.best {
            None => true,
            Some((v, d)) => (value, &diags) < (*v, d),
        };
        if better {
            self.best = Some((value, diags));
        }
    }
}

/// Exact `κ_T(n)` by depth-first labelling with pruning, one shard per apex
/// of the triangle on side `(0, n−1)`. The witness is the lexicographically
/// least optimal diagonal list, which is canonical in its dihedral orbit.
pub fn kappa_min(n: usize, opts: &SearchOptions) -> Result<SearchRecord> {
    let max = opts.max_n.min(ENUMERATE_MAX_N);
    if !(3..=max).contains(&n) {
        return Err(Error::SizeOutOfRange { n, min: 3, max });
    }
    let start = Instant::now();
    let bound = AtomicU64::new(incumbent_bound(n));
    let results: Vec<ShardResult> = (1..n - 1)
        .into_par_iter()
        .map(|k| {
            let mut dfs = Dfs::new(n, &bound, opts.symmetry);
            if let Some(m) = dfs.place(0, n - 1, k, 1) {
                dfs.run(m);
            }
            (dfs.best, dfs.leaves)
        })
        .collect();
    let enumerated = results.iter().map(|r| r.1).sum();
    let (kappa_min, diags) = results
        .into_iter()
        .filter_map(|r| r.0)
        .min()
        .ok_or_else(|| Error::Invariant(format!("search for n = {n} found no triangulation")))?;
    Ok(SearchRecord {
        n,
        kappa_min,
        witness: Triangulation::new(n, diags)?,
        enumerated,
        elapsed: start.elapsed().as_secs_f64(),
        mode: if opts.symmetry {
            SearchMode::SymmetryReduced
        } else {
            SearchMode::Full
        },
    })
}

/// `κ_T(n)` by evaluating every triangulation: `(value, lexicographically
/// least witness, count)`.
pub fn kappa_min_naive(n: usize) -> Result<(u64, Triangulation, u64)> {
    let mut count = 0;
    let mut best: Option<(BigUint, Triangulation)> = None;
    for t in enumerate(n, false)? {
        count += 1;
        let k = kappa(&t);
        if best.as_ref().is_none_or(|(bk, bt)| (&k, &t) < (bk, bt)) {
            best = Some((k, t));
        }
    }
    let (k, t) = best.unwrap();
    Ok((k.to_u64().unwrap(), t, count))
}

/// Records for `n = 3..=max_n`, checking that `κ_T` never decreases.
pub fn kappa_table(opts: &SearchOptions) -> Result<Vec<SearchRecord>> {
    let mut out: Vec<SearchRecord> = Vec::new();
    for n in 3..=opts.max_n {
        let r = kappa_min(n, opts)?;
        if let Some(prev) = out.last() {
            if r.kappa_min < prev.kappa_min {
                return Err(Error::Invariant(format!(
                    "κ_T({n}) = {} < κ_T({}) = {}",
                    r.kappa_min,
                    n - 1,
                    prev.kappa_min
                )));
            }
        }
        out.push(r);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EtaResult {
    pub k: u64,
    pub value: usize,
    /// `None` for `k = 0`, where the only system is a single curve.
    pub witness: Option<Triangulation>,
}

/// `η_T(k)` read off consecutive records starting at `n = 3`.
pub fn eta_from_table(k: u64, records: &[SearchRecord]) -> Result<EtaResult> {
    if k == 0 {
        return Ok(EtaResult {
            k,
            value: 1,
            witness: None,
        });
    }
    let mut last: Option<&SearchRecord> = None;
    for r in records {
        if r.kappa_min > k {
            let w = last.expect("κ_T(3) = 1 ≤ k");
            return Ok(EtaResult {
                k,
                value: w.n,
                witness: Some(w.witness.clone()),
            });
        }
        last = Some(r);
    }
    let last = records.last().ok_or(Error::FrontierExceeded {
        k,
        max_n: 2,
        kappa: 0,
    })?;
    Err(Error::FrontierExceeded {
        k,
        max_n: last.n,
        kappa: last.kappa_min,
    })
}

/// `η_T(k)`: computes `κ_T(n)` for increasing `n` until it exceeds `k`.
pub fn eta(k: u64, opts: &SearchOptions) -> Result<EtaResult> {
    let mut records = Vec::new();
    if k == 0 {
        return eta_from_table(0, &records);
    }
    for n in 3..=opts.max_n.min(ENUMERATE_MAX_N) {
        let r = kappa_min(n, opts)?;
        let done = r.kappa_min > k;
        records.push(r);
        if done {
            break;
        }
    }
    eta_from_table(k, &records)
}

/// `1 + nextprime(k)`.
pub fn agol_bound(k: u64) -> u64 {
    1 + crate::numtheory::nextprime(k)
}

fn inversion_gap(n: u64, c: f64) -> f64 {
    let x = n as f64;
    x - c * x.sqrt() * x.ln()
}

/// Least `n ≥ 1` from which `n − c√n ln n` is increasing: the derivative
/// is positive once `2√n > c(ln n + 2)`, and stays so.
fn monotone_start(c: f64) -> u64 {
    let mut n = 1u64;
    while 2.0 * (n as f64).sqrt() <= c * ((n as f64).ln() + 2.0) {
        n += 1;
    }
    n
}

/// `max{n ≥ 1 : n − c√n ln n ≤ k}`.
pub fn invert_bound(k: u64, c: f64) -> Result<u64> {
    if k == 0 || c.is_nan() || c < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "need k ≥ 1 and c ≥ 0, got k = {k}, c = {c}"
        )));
    }
    let start = monotone_start(c);
    let mut best = (1..start)
        .filter(|&n| inversion_gap(n, c) <= k as f64)
        .max()
        .unwrap_or(1);
    if inversion_gap(start, c) <= k as f64 {
        // Gallop then bisect on the increasing part.
        let mut lo = start;
        let mut step = 1u64;
        while inversion_gap(lo + step, c) <= k as f64 {
            lo += step;
            step *= 2;
        }
        let mut hi = lo + step;
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if inversion_gap(mid, c) <= k as f64 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        best = best.max(lo);
    }
    Ok(best)
}

/// `F(k) = invert_bound(k, c)` for `k = 1..=kmax` (index 0 unused).
pub fn inversion_table(kmax: u64, c: f64) -> Result<Vec<u64>> {
    if kmax == 0 {
        return Ok(vec![0]);
    }
    let start = monotone_start(c);
    let small: Vec<(u64, f64)> = (1..start).map(|n| (n, inversion_gap(n, c))).collect();
    let mut out = vec![0; kmax as usize + 1];
    let mut p = start - 1;
    for k in 1..=kmax {
        while inversion_gap(p + 1, c) <= k as f64 {
            p += 1;
        }
        let low = small
            .iter()
            .filter(|&&(_, g)| g <= k as f64)
            .map(|&(n, _)| n)
            .max()
            .unwrap_or(1);
        out[k as usize] = if p >= start { p.max(low) } else { low };
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InversionFit {
    /// Smallest `D` with `F(k) ≤ k + D√k ln k` for all `2 ≤ k ≤ kmax`.
    pub d: f64,
    pub argmax: u64,
    pub kmax: u64,
}

pub fn fit_inversion_constant(table: &[u64]) -> InversionFit {
    let mut fit = InversionFit {
        d: 0.0,
        argmax: 2,
        kmax: table.len().saturating_sub(1) as u64,
    };
    for (k, &f) in table.iter().enumerate().skip(2) {
        let kf = k as f64;
        let ratio = (f as f64 - kf) / (kf.sqrt() * kf.ln());
        if ratio > fit.d {
            fit.d = ratio;
            fit.argmax = k as u64;
        }
    }
    fit
}

/// Result of closing a `k`-system to an inclusion-maximal one.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Saturation {
    pub slopes: Vec<Slope>,
    pub triangulation: Triangulation,
    pub labelling: FareyLabelling,
}

fn max_iota(s: &Slope, set: &BTreeSet<Slope>) -> BigUint {
    set.iter().map(|x| iota(s, x)).max().unwrap_or_default()
}

fn check_member(s: &Slope, set: &BTreeSet<Slope>, k: u64) -> Result<()> {
    for x in set {
        let i = iota(s, x);
        if i > BigUint::from(k) {
            return Err(Error::NotAKSystem {
                k,
                a: s.to_string(),
                b: x.to_string(),
                iota: i.to_string(),
            });
        }
    }
    Ok(())
}

/// Adds vertices of Farey triangles crossed by geodesics between
/// cyclically consecutive members until consecutive members are Farey
/// neighbours.
fn convex_closure(set: &mut BTreeSet<Slope>, k: u64) -> Result<()> {
    loop {
        let sorted: Vec<Slope> = set.iter().cloned().collect();
        let m = sorted.len();
        let mut added = false;
        for i in 0..m {
            let (a, b) = (&sorted[i], &sorted[(i + 1) % m]);
            if m < 2 || a == b || is_farey_edge(a, b) {
                continue;
            }
            for tri in cutting_sequence(&Geodesic::new(a.clone(), b.clone())?, usize::MAX) {
                for d in tri {
                    if !set.contains(&d) {
                        check_member(&d, set, k).map_err(|e| {
                            Error::Invariant(format!("closure left the {k}-system: {e}"))
                        })?;
                        set.insert(d);
                        added = true;
                    }
                }
            }
        }
        if !added {
            return Ok(());
        }
    }
}

/// Apexes of Farey triangles just outside the hull of `set`.
fn boundary_candidates(set: &BTreeSet<Slope>) -> Result<Vec<Slope>> {
    let sorted: Vec<Slope> = set.iter().cloned().collect();
    let m = sorted.len();
    if m == 1 {
        let back = UnimodularMap::normalizing(&sorted[0]).inverse();
        return Ok(vec![back.apply(&Slope::integer(0))]);
    }
    let mut out = Vec::new();
    for i in 0..m {
        let (a, b) = (&sorted[i], &sorted[(i + 1) % m]);
        let (x, y) = farey_apexes(a, b)?;
        for c in [x, y] {
            let outside = m == 2 || cyclically_increasing(a, &c, b);
            if outside && !set.contains(&c) {
                out.push(c);
            }
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

/// Closes a `k`-system under convex hulls in the Farey complex, then keeps
/// adding compatible slopes across hull edges (lowest maximal `ι` first,
/// then smallest denominator, then smallest `|p|`, positive before
/// negative) until none fits.
pub fn saturate(slopes: &[Slope], k: u64) -> Result<Saturation> {
    if k == 0 {
        return Err(Error::InvalidParameter("saturation needs k ≥ 1".into()));
    }
    if slopes.is_empty() {
        return Err(Error::InvalidParameter(
            "saturation needs at least one slope".into(),
        ));
    }
    let mut set = BTreeSet::new();
    for s in slopes {
        check_member(s, &set, k)?;
        set.insert(s.clone());
    }
    loop {
        convex_closure(&mut set, k)?;
        let kk = BigUint::from(k);
        let pick = boundary_candidates(&set)?
            .into_iter()
            .map(|c| (max_iota(&c, &set), c))
            .filter(|(i, _)| *i <= kk)
            .min_by(|(i1, c1), (i2, c2)| {
                let key = |c: &Slope| {
                    (
                        c.denom().clone(),
                        c.numer().magnitude().clone(),
                        c.numer() < &BigInt::zero(),
                    )
                };
                i1.cmp(i2).then_with(|| key(c1).cmp(&key(c2)))
            });
        match pick {
            Some((_, c)) => {
                set.insert(c);
            }
            None => break,
        }
    }
    let slopes: Vec<Slope> = set.into_iter().collect();
    let (triangulation, labelling) = Triangulation::from_slopes(&slopes)?;
    Ok(Saturation {
        slopes,
        triangulation,
        labelling,
    })
}

/// True when no slope across a hull edge can join the system.
pub fn is_inclusion_maximal(slopes: &[Slope], k: u64) -> Result<bool> {
    let set: BTreeSet<Slope> = slopes.iter().cloned().collect();
    let kk = BigUint::from(k);
    Ok(boundary_candidates(&set)?
        .iter()
        .all(|c| max_iota(c, &set) > kk))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{generate, FamilyKind, FamilySpec};
    use crate::triangulation::random_triangulation;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn s(p: i64, q: i64) -> Slope {
        Slope::new(p, q).unwrap()
    }

    fn tri(n: usize, d: &[(usize, usize)]) -> Triangulation {
        Triangulation::new(n, d.to_vec()).unwrap()
    }

    fn family(kind: FamilyKind, p: u64) -> (Triangulation, FareyLabelling) {
        generate(&FamilySpec::new(kind, p).unwrap()).unwrap()
    }

    fn big(x: u64) -> BigUint {
        BigUint::from(x)
    }

    #[test]
    fn kappa_examples() {
        assert_eq!(kappa(&tri(3, &[])), big(1));
        assert_eq!(kappa(&family(FamilyKind::Farey, 3).0), big(3));
        assert_eq!(kappa(&Triangulation::fan(7, 0).unwrap()), big(5));
    }

    #[test]
    fn width_and_height_examples() {
        let fan = Triangulation::fan(8, 0).unwrap();
        assert_eq!(width(&fan, 0).unwrap(), big(6));
        assert_eq!(height(&fan, 0).unwrap(), big(1));
        // Ears have width 1.
        assert_eq!(width(&fan, 1).unwrap(), big(1));
        assert_eq!(height(&tri(3, &[]), 2).unwrap(), big(1));
        for h in 3..=7 {
            let (_, l) = family(FamilyKind::Farey, h);
            assert_eq!(width_labelled(&l, 0), big(h));
            assert_eq!(height_labelled(&l, 0), big(h - 1));
        }
        assert!(width(&fan, 8).is_err());
    }

    #[test]
    fn width_counts_triangles() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let t = random_triangulation(rng.random_range(3..14), &mut rng);
            let l = default_labelling(&t);
            for v in 0..t.n() {
                assert_eq!(width_labelled(&l, v), big(t.fan_at(v).len() as u64));
                assert!(kappa_labelled(&l) >= height_labelled(&l, v));
            }
        }
    }

    #[test]
    fn fan_profile() {
        let n = 8;
        let p = branch_profile(&Triangulation::fan(n, 0).unwrap(), 0).unwrap();
        assert_eq!(p.height, 1);
        assert_eq!(p.levels[0].x(), n - 2);
        assert!(p.branches.iter().all(|b| b.horoballs.len() == 1));
        let acc = accounting_check(&p);
        assert_eq!((acc.lhs, acc.slack), (n as i64 - 2, 0));
        let c = cross_intersection(&p, 1, 1).unwrap();
        assert_eq!(c.formula, n as i64 - 3);
        assert!(c.agrees());
        let est = convex_estimate(&p).unwrap();
        assert!(est.value.is_zero());
    }

    #[test]
    fn farey_profile_at_infinity() {
        for h in 3..=8 {
            let (t, l) = family(FamilyKind::Farey, h);
            let v = l.vertex_of(&Slope::infinity()).unwrap();
            let p = branch_profile(&t, v).unwrap();
            // 1/0 is an ear of Far(h) and sees every denominator up to h.
            assert_eq!(p.height, h);
            assert_eq!(p.width(), 1);
            assert_eq!(branch_profile(&t, 0).unwrap().height, h - 1);
            // Oracle: branch heights are the largest denominators at ι-distance from 1/0.
            for lv in &p.levels {
                let oracle = p.branches.iter().filter(|b| {
                    b.vertices
                        .iter()
                        .map(|&x| iota(l.label(x), l.label(v)))
                        .max()
                        .unwrap()
                        >= big(lv.k)
                });
                assert_eq!(oracle.count(), lv.x());
            }
            let acc = accounting_check(&p);
            assert!(acc.holds, "{acc:?}");
        }
    }

    #[test]
    fn farey_cross_intersection() {
        let (t, _) = family(FamilyKind::Farey, 5);
        let p = branch_profile(&t, 0).unwrap();
        let c = cross_intersection(&p, 2, 3).unwrap();
        assert!(c.agrees(), "{c:?}");
        assert!(matches!(
            cross_intersection(&p, 2, 9),
            Err(Error::EmptyHeightClass(9))
        ));
    }

    #[test]
    fn convex_estimate_examples() {
        let (t, l) = family(FamilyKind::Farey, 6);
        assert_eq!(kappa_labelled(&l), big(24));
        for v in 0..t.n() {
            let p = branch_profile(&t, v).unwrap();
            let est = convex_estimate(&p).unwrap();
            assert!(est.certified() <= BigInt::from(24));
        }
        // An h = 2 profile: a single Γ edge 1 ∼ 2.
        let sq = tri(4, &[(0, 2)]);
        let p = branch_profile(&sq, 1).unwrap();
        assert_eq!(p.height, 2);
        let est = convex_estimate(&p).unwrap();
        let i12 = cross_intersection(&p, 1, 2).unwrap().direct;
        let i21 = cross_intersection(&p, 2, 1).unwrap().direct;
        assert_eq!(
            est.value,
            BigRational::new(BigInt::from(i12 + i21), BigInt::from(2))
        );
        assert_eq!(est.weight_sum, BigRational::from_integer(1.into()));
    }

    #[test]
    fn random_profiles() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..300 {
            let n = rng.random_range(3..=12);
            let t = random_triangulation(n, &mut rng);
            let l = default_labelling(&t);
            let v = rng.random_range(0..n);
            let p = branch_profile(&t, v).unwrap();
            assert_eq!(p.levels[0].x(), p.width());
            assert_eq!(BigUint::from(p.height), height_labelled(&l, v));
            for w in p.levels.windows(2) {
                assert!(w[0].x() >= w[1].x());
            }
            for lv in p.levels.iter().filter(|lv| lv.k >= 2) {
                for x in [lv.ell, lv.r].into_iter().flatten() {
                    assert!(1 <= x && x <= lv.k);
                    assert_eq!(num_integer::gcd(x, lv.k), 1);
                }
            }
            let acc = accounting_check(&p);
            assert!(acc.holds);
            for (term, count) in acc.terms.iter().zip(&acc.counts) {
                assert!(*count as i64 <= *term);
            }
            let est = convex_estimate(&p).unwrap();
            assert!(BigUint::try_from(est.certified()).unwrap() <= kappa_labelled(&l));
            for k in 1..=p.height {
                for k2 in 1..=p.height {
                    if let Ok(c) = cross_intersection(&p, k, k2) {
                        assert_eq!(c.formula.unsigned_abs(), c.direct, "{c:?}");
                        if k != k2 {
                            if let Ok((lhs, rhs)) = pair_inequality(&p, k, k2) {
                                assert!(lhs >= rhs);
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn small_kappa_min() {
        let opts = SearchOptions::default();
        let vals: Vec<u64> = (3..=6)
            .map(|n| kappa_min(n, &opts).unwrap().kappa_min)
            .collect();
        assert_eq!(vals, vec![1, 2, 3, 3]);
        assert!(kappa_min(2, &opts).is_err());
        assert!(kappa_min(15, &opts).is_err());
    }

    #[test]
    fn branch_and_bound_matches_naive() {
        for n in 3..=8 {
            let (value, witness, count) = kappa_min_naive(n).unwrap();
            assert_eq!(BigUint::from(count), crate::triangulation::catalan(n - 2));
            for symmetry in [false, true] {
                let r = kappa_min(
                    n,
                    &SearchOptions {
                        max_n: 14,
                        symmetry,
                    },
                )
                .unwrap();
                assert_eq!(r.kappa_min, value, "n = {n}");
                assert_eq!(r.witness, witness, "n = {n}");
                r.verify().unwrap();
            }
        }
    }

    #[test]
    fn incumbent_is_an_upper_bound() {
        for n in 3..=9 {
            assert!(incumbent_bound(n) >= kappa_min_naive(n).unwrap().0);
        }
    }

    #[test]
    fn record_json_round_trip() {
        let r = kappa_min(6, &SearchOptions::default()).unwrap();
        let line = serde_json::to_string(&r).unwrap();
        assert!(line.contains("\"mode\":\"symmetry-reduced\""));
        let back: SearchRecord = serde_json::from_str(&line).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn eta_examples() {
        let opts = SearchOptions::default();
        assert_eq!(eta(0, &opts).unwrap().value, 1);
        assert_eq!(eta(1, &opts).unwrap().value, 3);
        let e = eta(2, &opts).unwrap();
        assert_eq!(e.value, 4);
        assert_eq!(kappa(e.witness.as_ref().unwrap()), big(2));
        let tight = SearchOptions {
            max_n: 5,
            symmetry: true,
        };
        assert!(matches!(
            eta(3, &tight),
            Err(Error::FrontierExceeded { .. })
        ));
    }

    #[test]
    fn agol_examples() {
        assert_eq!(agol_bound(1), 3);
        assert_eq!(agol_bound(10), 12);
        assert_eq!(agol_bound(13), 18);
    }

    #[test]
    fn inversion_examples() {
        assert_eq!(invert_bound(100, 0.0).unwrap(), 100);
        assert_eq!(invert_bound(7, 1e-12).unwrap(), 7);
        // Upward scan oracle.
        for (k, c) in [(100, 1.0), (1, 1.0), (50, 2.5), (1000, 0.3), (10, 5.0)] {
            let mut n = 1u64;
            let mut last_ok = 0;
            while n < 100_000 {
                if inversion_gap(n, c) <= k as f64 {
                    last_ok = n;
                }
                n += 1;
            }
            assert_eq!(invert_bound(k, c).unwrap(), last_ok, "k = {k}, c = {c}");
        }
        assert!(invert_bound(0, 1.0).is_err());
        let table = inversion_table(2000, 1.0).unwrap();
        for k in [1, 2, 3, 10, 100, 999, 2000] {
            assert_eq!(table[k as usize], invert_bound(k, 1.0).unwrap());
        }
        let fit = fit_inversion_constant(&table);
        for (k, &f) in table.iter().enumerate().skip(2) {
            let kf = k as f64;
            assert!(f as f64 <= kf + fit.d * kf.sqrt() * kf.ln() + 1e-9);
        }
    }

    #[test]
    fn saturate_examples() {
        let tri3 = [Slope::infinity(), s(0, 1), s(1, 1)];
        let sat = saturate(&tri3, 1).unwrap();
        assert_eq!(sat.slopes.len(), 3);
        let sat = saturate(&[Slope::infinity(), s(0, 1)], 2).unwrap();
        assert_eq!(sat.slopes.len(), 4);
        assert!(sat.slopes.contains(&s(1, 1)));
        assert!(kappa_labelled(&sat.labelling) <= big(2));
        assert!(is_inclusion_maximal(&sat.slopes, 2).unwrap());
        // Brute force over denominators ≤ 2 in [−2, 2]: no further slope fits.
        for q in 1..=2 {
            for p in -4..=4 {
                let c = s(p, q);
                if !sat.slopes.contains(&c) {
                    assert!(sat.slopes.iter().any(|x| iota(x, &c) > big(2)));
                }
            }
        }
        assert!(matches!(
            saturate(&[Slope::infinity(), s(1, 3)], 2),
            Err(Error::NotAKSystem { .. })
        ));
        assert!(saturate(&[s(0, 1)], 0).is_err());
    }

    #[test]
    fn saturate_random_systems() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..40 {
            let k = rng.random_range(1..=6);
            let mut seed = vec![Slope::infinity()];
            let c = s(rng.random_range(-(k as i64)..=(k as i64)), 1);
            if c != seed[0] {
                seed.push(c);
            }
            let sat = saturate(&seed, k).unwrap();
            assert!(kappa_labelled(&sat.labelling) <= big(k));
            assert!(is_inclusion_maximal(&sat.slopes, k).unwrap());
            for x in &seed {
                assert!(sat.slopes.contains(x));
            }
        }
    }
}
