//! The four example families: fans, zig-zags, balanced trees and Farey
//! series hulls.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::farey::{farey_apexes, Slope};
use crate::ksystem::{height_labelled, kappa_labelled, width_labelled};
use crate::numtheory::totient;
use crate::triangulation::{default_labelling, FareyLabelling, Triangulation};

pub const CHAIN_MAX_N: u64 = 4096;
pub const REGULAR_MAX_R: u64 = 12;
pub const FAREY_MAX_H: u64 = 120;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyKind {
    /// `ch(n)`: the fan.
    Chain,
    /// `ach(n)`: the zig-zag.
    Achain,
    /// `reg(r)`: the balanced trivalent tree of radius `r`.
    Regular,
    /// `Far(h)`: slopes in `[0, 1]` with denominator at most `h`, and `1/0`.
    Farey,
}

impl FamilyKind {
    pub const ALL: [FamilyKind; 4] = [
        FamilyKind::Chain,
        FamilyKind::Achain,
        FamilyKind::Regular,
        FamilyKind::Farey,
    ];

    pub fn short_name(self) -> &'static str {
        match self {
            FamilyKind::Chain => "ch",
            FamilyKind::Achain => "ach",
            FamilyKind::Regular => "reg",
            FamilyKind::Farey => "Far",
        }
    }
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FamilyKind::Chain => "chain",
            FamilyKind::Achain => "achain",
            FamilyKind::Regular => "regular",
            FamilyKind::Farey => "farey",
        })
    }
}

impl FromStr for FamilyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "chain" | "ch" => Ok(FamilyKind::Chain),
            "achain" | "ach" => Ok(FamilyKind::Achain),
            "regular" | "reg" => Ok(FamilyKind::Regular),
            "farey" | "far" => Ok(FamilyKind::Farey),
            _ => Err(Error::InvalidFamily(format!("unknown family {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FamilySpec {
    pub kind: FamilyKind,
    /// `n` for chain and achain, `r` for regular, `h` for farey.
    pub param: u64,
}

impl FamilySpec {
    pub fn new(kind: FamilyKind, param: u64) -> Result<Self> {
        let (lo, hi) = match kind {
            FamilyKind::Chain | FamilyKind::Achain => (3, CHAIN_MAX_N),
            FamilyKind::Regular => (1, REGULAR_MAX_R),
            FamilyKind::Farey => (2, FAREY_MAX_H),
        };
        if !(lo..=hi).contains(&param) {
            return Err(Error::InvalidFamily(format!(
                "{kind} parameter must lie in {lo}..={hi}, got {param}"
            )));
        }
        Ok(FamilySpec { kind, param })
    }

    /// Number of polygon vertices.
    pub fn size(&self) -> usize {
        match self.kind {
            FamilyKind::Chain | FamilyKind::Achain => self.param as usize,
            FamilyKind::Regular => 3 << (self.param - 1),
            FamilyKind::Farey => 2 + (1..=self.param).map(totient).sum::<u64>() as usize,
        }
    }
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.kind.short_name(), self.param)
    }
}

/// Slopes of `Far(h)` in increasing order, `1/0` last.
pub fn farey_series(h: u64) -> Vec<Slope> {
    let mut out = Vec::new();
    for q in 1..=h {
        for p in 0..=q {
            if num_integer::gcd(p, q) == 1 {
                out.push(Slope::new(p as i64, q as i64).unwrap());
            }
        }
    }
    out.sort();
    out.push(Slope::infinity());
    out
}

fn zigzag(n: usize) -> Result<Triangulation> {
    let mut diags = Vec::with_capacity(n.saturating_sub(3));
    let (mut l, mut r) = (1, n - 1);
    let mut move_right = true;
    while diags.len() < n - 3 {
        diags.push((l, r));
        if move_right {
            r -= 1;
        } else {
            l += 1;
        }
        move_right = !move_right;
    }
    Triangulation::new(n, diags)
}

/// Slopes of `reg(r)`: the triangle `(1/0, 0/1, 1/1)` with each edge
/// refined by Farey addition `r − 1` times, away from the centre.
fn regular_slopes(r: u64) -> Vec<Slope> {
    fn refine(a: &Slope, b: &Slope, opposite: &Slope, depth: u64, out: &mut Vec<Slope>) {
        if depth == 0 {
            return;
        }
        let (x, y) = farey_apexes(a, b).unwrap();
        let c = if &x == opposite { y } else { x };
        refine(a, &c, b, depth - 1, out);
        refine(&c, b, a, depth - 1, out);
        out.push(c);
    }
    let tri = [Slope::infinity(), Slope::integer(0), Slope::integer(1)];
    let mut out = tri.to_vec();
    for i in 0..3 {
        let (a, b, c) = (&tri[i], &tri[(i + 1) % 3], &tri[(i + 2) % 3]);
        refine(a, b, c, r - 1, &mut out);
    }
    out
}

/// The family member with a Farey labelling. Chain and achain use the
/// standard labelling; regular and farey keep the slopes they were built
/// from, with vertices in increasing slope order.
pub fn generate(spec: &FamilySpec) -> Result<(Triangulation, FareyLabelling)> {
    let spec = FamilySpec::new(spec.kind, spec.param)?;
    let n = spec.size();
    match spec.kind {
        FamilyKind::Chain => {
            let t = Triangulation::fan(n, 0)?;
            let l = default_labelling(&t);
            Ok((t, l))
        }
        FamilyKind::Achain => {
            let t = zigzag(n)?;
            let l = default_labelling(&t);
            Ok((t, l))
        }
        FamilyKind::Regular => Triangulation::from_slopes(&regular_slopes(spec.param)),
        FamilyKind::Farey => Triangulation::from_slopes(&farey_series(spec.param)),
    }
}

/// `F_i` with `F_1 = F_2 = 1`.
pub fn fibonacci(i: u64) -> BigUint {
    let (mut a, mut b) = (BigUint::ZERO, BigUint::one());
    for _ in 0..i {
        let c = &a + &b;
        a = b;
        b = c;
    }
    a
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TableRow {
    pub spec: FamilySpec,
    pub n: usize,
    pub kappa: BigUint,
    pub max_width: BigUint,
    /// Lowest-index vertex of maximal width.
    pub widest_vertex: usize,
    pub height_at_max_width: BigUint,
}

pub fn table_row(spec: &FamilySpec) -> Result<TableRow> {
    let (t, l) = generate(spec)?;
    Ok(table_row_of(*spec, &t, &l))
}

fn table_row_of(spec: FamilySpec, t: &Triangulation, l: &FareyLabelling) -> TableRow {
    let mut widest = 0;
    let mut max_width = width_labelled(l, 0);
    for v in 1..t.n() {
        let w = width_labelled(l, v);
        if w > max_width {
            max_width = w;
            widest = v;
        }
    }
    TableRow {
        spec,
        n: t.n(),
        kappa: kappa_labelled(l),
        height_at_max_width: height_labelled(l, widest),
        max_width,
        widest_vertex: widest,
    }
}

/// The leading-order entries of the reference table for this member,
/// evaluated at its size (multiplicative constants ignored there).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LeadingOrder {
    pub kappa: &'static str,
    pub width: &'static str,
    pub height: &'static str,
    pub kappa_value: f64,
    pub width_value: f64,
    pub height_value: f64,
}

pub fn leading_order(spec: &FamilySpec) -> LeadingOrder {
    let n = spec.size() as f64;
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    match spec.kind {
        FamilyKind::Chain => LeadingOrder {
            kappa: "n",
            width: "n-2",
            height: "1",
            kappa_value: n,
            width_value: n - 2.0,
            height_value: 1.0,
        },
        FamilyKind::Achain => LeadingOrder {
            kappa: "Phi^n",
            width: "3",
            height: ">= Phi^(n/2)",
            kappa_value: phi.powf(n),
            width_value: 3.0,
            height_value: phi.powf(n / 2.0),
        },
        FamilyKind::Regular => LeadingOrder {
            kappa: "n^(2 log2 Phi)",
            width: "2 log2 n",
            height: "n^(log2 Phi)",
            kappa_value: n.powf(2.0 * phi.log2()),
            width_value: 2.0 * n.log2(),
            height_value: n.powf(phi.log2()),
        },
        FamilyKind::Farey => LeadingOrder {
            kappa: "(pi^2/3) n",
            width: "sqrt(n)",
            height: "sqrt(n)",
            kappa_value: std::f64::consts::PI.powi(2) / 3.0 * n,
            width_value: n.sqrt(),
            height_value: n.sqrt(),
        },
    }
}

/// `κ` of the family member as `u64`, when it fits.
pub fn kappa_u64(spec: &FamilySpec) -> Result<u64> {
    let row = table_row(spec)?;
    row.kappa
        .to_u64()
        .ok_or_else(|| Error::Invariant(format!("κ({spec}) = {} exceeds u64", row.kappa)))
}
