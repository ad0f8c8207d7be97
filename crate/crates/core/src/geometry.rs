//! The eigenspace model of the Vogan variety for GL(n): type-A chains of
//! linear maps over exact rationals, orbits as rank triangles, closure
//! order, Hasse diagrams, and orbit dimensions.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{q_int, QMat};
use crate::param::{CuspidalLabel, Exponent, InfinitesimalParameter, Multisegment, Segment};

#[derive(Debug, Error)]
pub enum GeomError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("multisegment not supported on the chain: {0}")]
    SupportMismatch(String),
    #[error("orbit enumeration bound exceeded ({0} orbits)")]
    BoundExceeded(usize),
    #[error("rank triangle is not realizable: N[{i}][{j}] < 0")]
    NotRealizable { i: usize, j: usize },
    #[error("dual-orbit sampling did not stabilize after {0} draws")]
    Unstable(usize),
}

/// One connected chain of eigenspaces: consecutive descending exponents on
/// a single cuspidal line with positive multiplicities.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct ChainVariety {
    pub label: CuspidalLabel,
    /// Descending, consecutive: exponents[i] - exponents[i+1] = 1.
    pub exponents: Vec<Exponent>,
    pub dims: Vec<usize>,
}

impl ChainVariety {
    pub fn new(label: CuspidalLabel, exponents: Vec<Exponent>, dims: Vec<usize>) -> Self {
        assert_eq!(exponents.len(), dims.len());
        assert!(!exponents.is_empty());
        for w in exponents.windows(2) {
            assert_eq!(w[0].twice() - w[1].twice(), 2, "exponents must descend by 1");
        }
        assert!(dims.iter().all(|&m| m > 0));
        ChainVariety {
            label,
            exponents,
            dims,
        }
    }

    /// Convenience: trivial label, exponents (r-1)/2 down to -(r-1)/2.
    pub fn standard(dims: Vec<usize>) -> Self {
        let r = dims.len() as i64;
        let exps = (0..r).map(|i| Exponent::from_twice(r - 1 - 2 * i)).collect();
        ChainVariety::new(CuspidalLabel::trivial(), exps, dims)
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn dim_v(&self) -> usize {
        self.dims.windows(2).map(|w| w[0] * w[1]).sum()
    }

    pub fn dim_h(&self) -> usize {
        self.dims.iter().map(|m| m * m).sum()
    }

    pub fn slot_of(&self, e: Exponent) -> Option<usize> {
        self.exponents.iter().position(|&x| x == e)
    }

    pub fn is_multiplicity_free(&self) -> bool {
        self.dims.iter().all(|&m| m == 1)
    }
}

/// Split the support of an infinitesimal parameter into independent chains:
/// one per (label, exponent coset), cut at missing exponents.
pub fn varieties_of(lambda: &InfinitesimalParameter) -> Vec<ChainVariety> {
    let mut chains = Vec::new();
    for (label, line) in &lambda.support {
        // Exponents ascending in twice-units; walk maximal consecutive runs
        // within each coset.
        let mut by_coset: std::collections::BTreeMap<i64, Vec<(i64, usize)>> = Default::default();
        for (&tw, &mult) in line {
            by_coset.entry(tw.rem_euclid(2)).or_default().push((tw, mult));
        }
        for (_, entries) in by_coset {
            let mut run: Vec<(i64, usize)> = Vec::new();
            for &(tw, mult) in &entries {
                if let Some(&(last, _)) = run.last() {
                    if tw - last != 2 {
                        chains.push(chain_from_run(label, &run));
                        run.clear();
                    }
                }
                run.push((tw, mult));
            }
            if !run.is_empty() {
                chains.push(chain_from_run(label, &run));
            }
        }
    }
    chains
}

fn chain_from_run(label: &CuspidalLabel, run: &[(i64, usize)]) -> ChainVariety {
    // Runs arrive ascending; chains store descending exponents.
    let exps = run.iter().rev().map(|&(tw, _)| Exponent::from_twice(tw)).collect();
    let dims = run.iter().rev().map(|&(_, m)| m).collect();
    ChainVariety::new(label.clone(), exps, dims)
}

/// A point of the chain variety: maps x_i of shape dims[i+1] x dims[i].
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Point {
    pub maps: Vec<QMat>,
}

/// A covector: maps y_i of shape dims[i] x dims[i+1].
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DualPoint {
    pub maps: Vec<QMat>,
}

impl Point {
    pub fn zero(dims: &[usize]) -> Self {
        Point {
            maps: dims.windows(2).map(|w| QMat::zeros(w[1], w[0])).collect(),
        }
    }

    pub fn shapes_match(&self, dims: &[usize]) -> bool {
        self.maps.len() + 1 == dims.len()
            && self
                .maps
                .iter()
                .zip(dims.windows(2))
                .all(|(m, w)| m.rows == w[1] && m.cols == w[0])
    }
}

impl DualPoint {
    pub fn zero(dims: &[usize]) -> Self {
        DualPoint {
            maps: dims.windows(2).map(|w| QMat::zeros(w[0], w[1])).collect(),
        }
    }

    pub fn shapes_match(&self, dims: &[usize]) -> bool {
        self.maps.len() + 1 == dims.len()
            && self
                .maps
                .iter()
                .zip(dims.windows(2))
                .all(|(m, w)| m.rows == w[0] && m.cols == w[1])
    }
}

/// The complete orbit invariant: R[i][j] = rank(x_{j-1} o ... o x_i) for
/// i < j, R[i][i] = dims[i]; stored as a full square with junk-free zeros
/// below the diagonal.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct RankTriangle {
    pub dims: Vec<usize>,
    pub entries: Vec<Vec<usize>>,
}

impl RankTriangle {
    pub fn r(&self, i: usize, j: usize) -> usize {
        // Out-of-range entries read as 0.
        if i > j || j >= self.dims.len() {
            0
        } else {
            self.entries[i][j]
        }
    }

    fn r_signed(&self, i: isize, j: isize) -> isize {
        if i < 0 || j < 0 || i > j || j >= self.dims.len() as isize {
            0
        } else {
            self.entries[i as usize][j as usize] as isize
        }
    }

    /// Number of segments spanning exactly slots i..j (inclusive).
    pub fn n(&self, i: usize, j: usize) -> Result<usize, GeomError> {
        let (si, sj) = (i as isize, j as isize);
        let v = self.r_signed(si, sj) - self.r_signed(si - 1, sj) - self.r_signed(si, sj + 1)
            + self.r_signed(si - 1, sj + 1);
        if v < 0 {
            return Err(GeomError::NotRealizable { i, j });
        }
        Ok(v as usize)
    }

    pub fn to_multisegment(&self, chain: &ChainVariety) -> Result<Multisegment, GeomError> {
        let r = self.dims.len();
        let mut segs = Vec::new();
        for i in 0..r {
            for j in i..r {
                let count = self.n(i, j)?;
                for _ in 0..count {
                    let end = chain.exponents[i];
                    let begin = chain.exponents[j];
                    segs.push(Segment::new(
                        chain.label.clone(),
                        Exponent::from_twice((end.twice() + begin.twice()) / 2),
                        (j - i + 1) as u32,
                    ));
                }
            }
        }
        Ok(Multisegment::new(segs))
    }

    pub fn is_open(&self) -> bool {
        let r = self.dims.len();
        (0..r).all(|i| {
            (i..r).all(|j| self.r(i, j) == *self.dims[i..=j].iter().min().unwrap())
        })
    }

    pub fn is_zero_orbit(&self) -> bool {
        let r = self.dims.len();
        (0..r).all(|i| ((i + 1)..r).all(|j| self.r(i, j) == 0))
    }
}

/// Rank triangle of a multisegment supported on slot capacities `caps`
/// (zeros allowed; used for embedded sub-structures).
pub fn triangle_from_multisegment(
    chain: &ChainVariety,
    caps: &[usize],
    m: &Multisegment,
) -> Result<RankTriangle, GeomError> {
    let r = caps.len();
    let mut spans: Vec<(usize, usize)> = Vec::new();
    let mut used = vec![0usize; r];
    for seg in m.segments() {
        if seg.label != chain.label {
            return Err(GeomError::SupportMismatch(format!(
                "label {} not on chain line {}",
                seg.label, chain.label
            )));
        }
        let i = chain
            .slot_of(seg.end())
            .ok_or_else(|| GeomError::SupportMismatch(format!("exponent {} off-chain", seg.end())))?;
        let j = chain
            .slot_of(seg.begin())
            .ok_or_else(|| GeomError::SupportMismatch(format!("exponent {} off-chain", seg.begin())))?;
        for s in i..=j {
            used[s] += 1;
        }
        spans.push((i, j));
    }
    if used != caps {
        return Err(GeomError::SupportMismatch(format!(
            "slot multiplicities {used:?} differ from capacities {caps:?}"
        )));
    }
    let mut entries = vec![vec![0usize; r]; r];
    for i in 0..r {
        entries[i][i] = caps[i];
        for j in (i + 1)..r {
            entries[i][j] = spans.iter().filter(|&&(a, b)| a <= i && j <= b).count();
        }
    }
    Ok(RankTriangle {
        dims: caps.to_vec(),
        entries,
    })
}

/// Exact rank triangle of a point.
pub fn orbit_of_point(chain: &ChainVariety, x: &Point) -> Result<RankTriangle, GeomError> {
    triangle_of_maps(&chain.dims, &x.maps)
}

/// Rank triangle of a sequence of maps between spaces of the given dims
/// (maps[i]: dims[i] -> dims[i+1]).
pub fn triangle_of_maps(dims: &[usize], maps: &[QMat]) -> Result<RankTriangle, GeomError> {
    let r = dims.len();
    if maps.len() + 1 != r
        || maps
            .iter()
            .zip(dims.windows(2))
            .any(|(m, w)| m.rows != w[1] || m.cols != w[0])
    {
        return Err(GeomError::ShapeMismatch("point does not fit the chain".into()));
    }
    let mut entries = vec![vec![0usize; r]; r];
    for i in 0..r {
        entries[i][i] = dims[i];
        let mut comp: Option<QMat> = None;
        for j in (i + 1)..r {
            let next = match comp {
                None => maps[j - 1].clone(),
                Some(prev) => maps[j - 1].mul(&prev),
            };
            entries[i][j] = next.rank();
            comp = Some(next);
        }
    }
    Ok(RankTriangle {
        dims: dims.to_vec(),
        entries,
    })
}

/// Closure order: a <= b iff every rank of a is dominated by b.
pub fn closure_leq(a: &RankTriangle, b: &RankTriangle) -> Result<bool, GeomError> {
    if a.dims != b.dims {
        return Err(GeomError::ShapeMismatch("triangles on different chains".into()));
    }
    let r = a.dims.len();
    Ok((0..r).all(|i| (i..r).all(|j| a.r(i, j) <= b.r(i, j))))
}

/// All multisegments with slot multiplicities equal to `caps` (zeros allowed).
pub fn enumerate_orbits_with_caps(
    chain: &ChainVariety,
    caps: &[usize],
    bound: usize,
) -> Result<Vec<Multisegment>, GeomError> {
    let r = caps.len();
    // Multi-slot intervals in a fixed order; singletons are forced remainders.
    let mut intervals = Vec::new();
    for i in 0..r {
        for j in (i + 1)..r {
            if (i..=j).all(|s| caps[s] > 0) {
                intervals.push((i, j));
            }
        }
    }
    let mut out = Vec::new();
    let mut remaining = caps.to_vec();
    let mut counts = vec![0usize; intervals.len()];
    dfs_orbits(chain, caps, &intervals, 0, &mut remaining, &mut counts, &mut out, bound)?;
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn dfs_orbits(
    chain: &ChainVariety,
    caps: &[usize],
    intervals: &[(usize, usize)],
    k: usize,
    remaining: &mut Vec<usize>,
    counts: &mut Vec<usize>,
    out: &mut Vec<Multisegment>,
    bound: usize,
) -> Result<(), GeomError> {
    if k == intervals.len() {
        if out.len() >= bound {
            return Err(GeomError::BoundExceeded(out.len() + 1));
        }
        let mut segs = Vec::new();
        for (idx, &(i, j)) in intervals.iter().enumerate() {
            for _ in 0..counts[idx] {
                let end = chain.exponents[i];
                let begin = chain.exponents[j];
                segs.push(Segment::new(
                    chain.label.clone(),
                    Exponent::from_twice((end.twice() + begin.twice()) / 2),
                    (j - i + 1) as u32,
                ));
            }
        }
        for (s, &rem) in remaining.iter().enumerate() {
            for _ in 0..rem {
                segs.push(Segment::new(chain.label.clone(), chain.exponents[s], 1));
            }
        }
        out.push(Multisegment::new(segs));
        return Ok(());
    }
    let (i, j) = intervals[k];
    let max_here = (i..=j).map(|s| remaining[s]).min().unwrap_or(0);
    for c in 0..=max_here {
        counts[k] = c;
        for s in i..=j {
            remaining[s] -= c;
        }
        dfs_orbits(chain, caps, intervals, k + 1, remaining, counts, out, bound)?;
        for s in i..=j {
            remaining[s] += c;
        }
    }
    counts[k] = 0;
    Ok(())
}

/// All orbits of the chain variety as multisegments, in canonical order.
pub fn enumerate_orbits(chain: &ChainVariety, bound: usize) -> Result<Vec<Multisegment>, GeomError> {
    let mut orbits = enumerate_orbits_with_caps(chain, &chain.dims, bound)?;
    orbits.sort_by_key(|m| m.canonical_string());
    orbits.dedup();
    Ok(orbits)
}

/// 0/1 basis-chaining maps realizing a multisegment on slot capacities
/// `caps`; segments are placed longest first into the earliest free basis
/// index of each slot.
pub fn canonical_point_with_caps(
    chain: &ChainVariety,
    caps: &[usize],
    m: &Multisegment,
) -> Result<Vec<QMat>, GeomError> {
    // Validates support along the way.
    triangle_from_multisegment(chain, caps, m)?;
    let r = caps.len();
    let mut maps: Vec<QMat> = (0..r.saturating_sub(1))
        .map(|i| QMat::zeros(caps[i + 1], caps[i]))
        .collect();
    let mut next_free = vec![0usize; r];
    let mut segs: Vec<&Segment> = m.segments().iter().collect();
    segs.sort_by_key(|s| std::cmp::Reverse(s.length));
    for seg in segs {
        let i = chain.slot_of(seg.end()).unwrap();
        let j = chain.slot_of(seg.begin()).unwrap();
        let idx: Vec<usize> = (i..=j)
            .map(|s| {
                let k = next_free[s];
                next_free[s] += 1;
                k
            })
            .collect();
        // Map from slot s+1 to slot s is not what x encodes: x_s goes from
        // slot s to slot s+1 in storage order, i.e. toward smaller exponents.
        for (off, s) in (i..j).enumerate() {
            let row = idx[off + 1];
            let col = idx[off];
            maps[s][(row, col)] = q_int(1);
        }
    }
    Ok(maps)
}

pub fn canonical_representative(chain: &ChainVariety, m: &Multisegment) -> Result<Point, GeomError> {
    Ok(Point {
        maps: canonical_point_with_caps(chain, &chain.dims, m)?,
    })
}

/// dim C = dim H - dim of the stabilizer Lie algebra at the canonical
/// representative, computed as the nullity of the exact intertwining system
/// h_{i+1} x_i = x_i h_i.
pub fn orbit_dim(chain: &ChainVariety, m: &Multisegment) -> Result<usize, GeomError> {
    let x = canonical_representative(chain, m)?;
    let dims = &chain.dims;
    let r = dims.len();
    let n_unknowns: usize = dims.iter().map(|d| d * d).sum();
    let n_equations: usize = dims.windows(2).map(|w| w[0] * w[1]).sum();
    let mut a = QMat::zeros(n_equations, n_unknowns);
    // Unknown offsets per h_i.
    let mut offs = vec![0usize; r];
    for i in 1..r {
        offs[i] = offs[i - 1] + dims[i - 1] * dims[i - 1];
    }
    let mut eq = 0;
    for i in 0..r - 1 {
        let x_i = &x.maps[i];
        // Equation block: h_{i+1} x_i - x_i h_i = 0, entries (p, q) with
        // p < dims[i+1], q < dims[i].
        for p in 0..dims[i + 1] {
            for q in 0..dims[i] {
                // sum_k h_{i+1}[p][k] x_i[k][q]
                for k in 0..dims[i + 1] {
                    let coeff = x_i[(k, q)].clone();
                    let col = offs[i + 1] + p * dims[i + 1] + k;
                    a[(eq, col)] = &a[(eq, col)] + &coeff;
                }
                // - sum_k x_i[p][k] h_i[k][q]
                for k in 0..dims[i] {
                    let coeff = x_i[(p, k)].clone();
                    let col = offs[i] + k * dims[i] + q;
                    a[(eq, col)] = &a[(eq, col)] - &coeff;
                }
                eq += 1;
            }
        }
    }
    let nullity = n_unknowns - a.rank();
    Ok(chain.dim_h() - nullity)
}

/// Orbit poset with covering-relation edges and deterministic DOT export.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HasseDiagram {
    pub nodes: Vec<Multisegment>,
    pub dims: Vec<usize>,
    /// Edges (a, b) meaning nodes[a] is covered by nodes[b].
    pub edges: Vec<(usize, usize)>,
}

pub fn hasse_diagram(chain: &ChainVariety, bound: usize) -> Result<HasseDiagram, GeomError> {
    let nodes = enumerate_orbits(chain, bound)?;
    let triangles: Vec<RankTriangle> = nodes
        .iter()
        .map(|m| triangle_from_multisegment(chain, &chain.dims, m))
        .collect::<Result<_, _>>()?;
    let n = nodes.len();
    let mut less = vec![vec![false; n]; n];
    for a in 0..n {
        for b in 0..n {
            if a != b
                && closure_leq(&triangles[a], &triangles[b])?
                && triangles[a] != triangles[b]
            {
                less[a][b] = true;
            }
        }
    }
    let mut edges = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if less[a][b] && !(0..n).any(|c| less[a][c] && less[c][b]) {
                edges.push((a, b));
            }
        }
    }
    edges.sort_unstable();
    Ok(HasseDiagram {
        nodes,
        dims: chain.dims.clone(),
        edges,
    })
}

impl HasseDiagram {
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph closure_order {\n  rankdir=BT;\n");
        for (i, node) in self.nodes.iter().enumerate() {
            out.push_str(&format!("  n{} [label=\"{}\"];\n", i, node));
        }
        for &(a, b) in &self.edges {
            out.push_str(&format!("  n{} -> n{};\n", a, b));
        }
        out.push_str("}\n");
        out
    }
}
