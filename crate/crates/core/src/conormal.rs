//! Conormal bundles: exact fibers {y : [x,y] = 0}, seeded generic sampling
//! of dual orbits, the block embedding fixed by the involution s, and the
//! regularity / central-triviality certificates.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::duality::zelevinsky_dual;
use crate::geometry::{
    canonical_point_with_caps, closure_leq, enumerate_orbits_with_caps, orbit_of_point,
    triangle_from_multisegment, triangle_of_maps, ChainVariety, DualPoint, GeomError, Point,
    RankTriangle,
};
use crate::linalg::{q_int, Q, QMat};
use crate::param::Multisegment;
use num_traits::Zero;

/// Blocks of [x, y]: block i is x_{i-1} y_{i-1} - y_i x_i on the i-th
/// eigenspace (out-of-range maps read as 0).
pub fn bracket_blocks(chain: &ChainVariety, x: &Point, y: &DualPoint) -> Result<Vec<QMat>, GeomError> {
    let dims = &chain.dims;
    if !x.shapes_match(dims) || !y.shapes_match(dims) {
        return Err(GeomError::ShapeMismatch("bracket operands off-chain".into()));
    }
    let r = dims.len();
    let mut blocks = Vec::with_capacity(r);
    for i in 0..r {
        let mut b = QMat::zeros(dims[i], dims[i]);
        if i > 0 {
            b = x.maps[i - 1].mul(&y.maps[i - 1]);
        }
        if i + 1 < r {
            b = b.sub(&y.maps[i].mul(&x.maps[i]));
        }
        blocks.push(b);
    }
    Ok(blocks)
}

pub fn bracket_is_zero(chain: &ChainVariety, x: &Point, y: &DualPoint) -> Result<bool, GeomError> {
    Ok(bracket_blocks(chain, x, y)?.iter().all(|b| b.is_zero()))
}

fn y_offsets(dims: &[usize]) -> (Vec<usize>, usize) {
    let mut offs = Vec::with_capacity(dims.len());
    let mut total = 0;
    for w in dims.windows(2) {
        offs.push(total);
        total += w[0] * w[1];
    }
    (offs, total)
}

/// Exact nullspace of the bracket equations in y for fixed maps x, on an
/// arbitrary capacity vector (zero slots allowed).
fn fiber_on_dims(dims: &[usize], x_maps: &[QMat]) -> Vec<DualPoint> {
    let r = dims.len();
    let (offs, n_unknowns) = y_offsets(dims);
    let n_equations: usize = dims.iter().map(|m| m * m).sum();
    let mut a = QMat::zeros(n_equations, n_unknowns);
    let mut eq = 0;
    for i in 0..r {
        // Block i, entry (p, q):
        //   sum_k x_{i-1}[p][k] y_{i-1}[k][q] - sum_k y_i[p][k] x_i[k][q] = 0.
        for p in 0..dims[i] {
            for q in 0..dims[i] {
                if i > 0 {
                    for k in 0..dims[i - 1] {
                        let coeff = x_maps[i - 1][(p, k)].clone();
                        if !coeff.is_zero() {
                            let col = offs[i - 1] + k * dims[i] + q;
                            a[(eq, col)] = &a[(eq, col)] + &coeff;
                        }
                    }
                }
                if i + 1 < r {
                    for k in 0..dims[i + 1] {
                        let coeff = x_maps[i][(k, q)].clone();
                        if !coeff.is_zero() {
                            let col = offs[i] + p * dims[i + 1] + k;
                            a[(eq, col)] = &a[(eq, col)] - &coeff;
                        }
                    }
                }
                eq += 1;
            }
        }
    }
    a.nullspace()
        .into_iter()
        .map(|v| vec_to_dual_point(dims, &offs, &v))
        .collect()
}

fn vec_to_dual_point(dims: &[usize], offs: &[usize], v: &[Q]) -> DualPoint {
    let mut maps = Vec::new();
    for (i, w) in dims.windows(2).enumerate() {
        let mut m = QMat::zeros(w[0], w[1]);
        for p in 0..w[0] {
            for q in 0..w[1] {
                m[(p, q)] = v[offs[i] + p * w[1] + q].clone();
            }
        }
        maps.push(m);
    }
    DualPoint { maps }
}

/// Exact basis of the conormal fiber {y : [x, y] = 0} at x.
pub fn conormal_fiber(chain: &ChainVariety, x: &Point) -> Result<Vec<DualPoint>, GeomError> {
    if !x.shapes_match(&chain.dims) {
        return Err(GeomError::ShapeMismatch("point off-chain".into()));
    }
    Ok(fiber_on_dims(&chain.dims, &x.maps))
}

/// Random integer-coefficient combination of a fiber basis.
pub fn sample_fiber(
    dims: &[usize],
    basis: &[DualPoint],
    rng: &mut impl Rng,
    height_bound: i64,
) -> DualPoint {
    let mut y = DualPoint::zero(dims);
    for b in basis {
        let c = rng.gen_range(-height_bound..=height_bound);
        if c == 0 {
            continue;
        }
        for (i, m) in b.maps.iter().enumerate() {
            for p in 0..m.rows {
                for q in 0..m.cols {
                    let v = &y.maps[i][(p, q)] + &m[(p, q)] * q_int(c);
                    y.maps[i][(p, q)] = v;
                }
            }
        }
    }
    y
}

/// The reversed chain carries the contragredient line and the negated
/// exponents, still descending; covectors of the original chain are its
/// points.
pub fn reversed_chain(chain: &ChainVariety) -> ChainVariety {
    ChainVariety::new(
        chain.label.dual(),
        chain.exponents.iter().rev().map(|e| e.neg()).collect(),
        chain.dims.iter().rev().copied().collect(),
    )
}

/// Rank triangle of a covector, read as a point of the reversed chain
/// (slot s of the reversed chain is slot r-1-s of the original).
pub fn dual_rank_triangle(chain: &ChainVariety, y: &DualPoint) -> Result<RankTriangle, GeomError> {
    let dims = &chain.dims;
    if !y.shapes_match(dims) {
        return Err(GeomError::ShapeMismatch("covector off-chain".into()));
    }
    let r = dims.len();
    let rev_dims: Vec<usize> = dims.iter().rev().copied().collect();
    let rev_maps: Vec<QMat> = (0..r.saturating_sub(1)).map(|s| y.maps[r - 2 - s].clone()).collect();
    triangle_of_maps(&rev_dims, &rev_maps)
}

/// Multisegment of a covector orbit, expressed back on the original chain
/// exponents (the dual variety shares the infinitesimal parameter).
pub fn dual_orbit_to_multisegment(
    chain: &ChainVariety,
    tri_rev: &RankTriangle,
) -> Result<Multisegment, GeomError> {
    let reversed = reversed_chain(chain);
    let m_rev = tri_rev.to_multisegment(&reversed)?;
    Ok(m_rev.contragredient())
}

/// Dual orbit of `m` computed geometrically: random covectors in the
/// conormal fiber at the canonical representative, until 3 consecutive
/// draws produce the same rank triangle (in the reversed chain).
pub fn geometric_dual_orbit(
    chain: &ChainVariety,
    m: &Multisegment,
    seed: u64,
    height_bound: i64,
    max_draws: usize,
) -> Result<RankTriangle, GeomError> {
    let x = Point {
        maps: canonical_point_with_caps(chain, &chain.dims, m)?,
    };
    let basis = conormal_fiber(chain, &x)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut window: Vec<RankTriangle> = Vec::new();
    for _ in 0..max_draws {
        let y = sample_fiber(&chain.dims, &basis, &mut rng, height_bound);
        let tri = dual_rank_triangle(chain, &y)?;
        window.push(tri);
        if window.len() >= 3 {
            let k = window.len();
            if window[k - 1] == window[k - 2] && window[k - 2] == window[k - 3] {
                return Ok(window[k - 1].clone());
            }
        }
    }
    Err(GeomError::Unstable(max_draws))
}

/// Same as geometric_dual_orbit, returned as a multisegment on the
/// original exponents (directly comparable with the combinatorial dual).
pub fn geometric_dual_multisegment(
    chain: &ChainVariety,
    m: &Multisegment,
    seed: u64,
    height_bound: i64,
    max_draws: usize,
) -> Result<Multisegment, GeomError> {
    let tri = geometric_dual_orbit(chain, m, seed, height_bound, max_draws)?;
    dual_orbit_to_multisegment(chain, &tri)
}

/// Block split of a chain: each slot is a ∨-block of size vee_dims[i] plus
/// an optional 1-dimensional α-line; the involution s acts by +1 on the
/// ∨-block and -1 on the α-line.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct SplitDescriptor {
    pub vee_dims: Vec<usize>,
    pub alpha_slot: Vec<bool>,
}

impl SplitDescriptor {
    pub fn matches(&self, chain: &ChainVariety) -> bool {
        self.vee_dims.len() == chain.dims.len()
            && self.alpha_slot.len() == chain.dims.len()
            && self
                .vee_dims
                .iter()
                .zip(&self.alpha_slot)
                .zip(&chain.dims)
                .all(|((&v, &a), &m)| v + usize::from(a) == m)
    }

    pub fn alpha_dims(&self) -> Vec<usize> {
        self.alpha_slot.iter().map(|&a| usize::from(a)).collect()
    }

    /// Sign of coordinate k in slot i under s (α-line is the last index).
    fn sign(&self, i: usize, k: usize) -> i64 {
        if self.alpha_slot[i] && k == self.vee_dims[i] {
            -1
        } else {
            1
        }
    }

    pub fn has_alpha(&self) -> bool {
        self.alpha_slot.iter().any(|&a| a)
    }
}

/// Block-diagonal embedding ε of a ∨-point and an α-point.
pub fn embed_split(
    chain: &ChainVariety,
    split: &SplitDescriptor,
    xv: &[QMat],
    xa: &[QMat],
) -> Result<Point, GeomError> {
    check_split_shapes(chain, split, xv, xa, false)?;
    let r = chain.dims.len();
    let mut maps = Vec::new();
    for i in 0..r - 1 {
        let mut m = QMat::zeros(chain.dims[i + 1], chain.dims[i]);
        for p in 0..split.vee_dims[i + 1] {
            for q in 0..split.vee_dims[i] {
                m[(p, q)] = xv[i][(p, q)].clone();
            }
        }
        if split.alpha_slot[i] && split.alpha_slot[i + 1] {
            m[(split.vee_dims[i + 1], split.vee_dims[i])] = xa[i][(0, 0)].clone();
        }
        maps.push(m);
    }
    Ok(Point { maps })
}

/// Transpose analogue ᵗε for covectors.
pub fn embed_split_dual(
    chain: &ChainVariety,
    split: &SplitDescriptor,
    yv: &[QMat],
    ya: &[QMat],
) -> Result<DualPoint, GeomError> {
    check_split_shapes(chain, split, yv, ya, true)?;
    let r = chain.dims.len();
    let mut maps = Vec::new();
    for i in 0..r - 1 {
        let mut m = QMat::zeros(chain.dims[i], chain.dims[i + 1]);
        for p in 0..split.vee_dims[i] {
            for q in 0..split.vee_dims[i + 1] {
                m[(p, q)] = yv[i][(p, q)].clone();
            }
        }
        if split.alpha_slot[i] && split.alpha_slot[i + 1] {
            m[(split.vee_dims[i], split.vee_dims[i + 1])] = ya[i][(0, 0)].clone();
        }
        maps.push(m);
    }
    Ok(DualPoint { maps })
}

fn check_split_shapes(
    chain: &ChainVariety,
    split: &SplitDescriptor,
    v: &[QMat],
    a: &[QMat],
    dual: bool,
) -> Result<(), GeomError> {
    if !split.matches(chain) {
        return Err(GeomError::ShapeMismatch("split does not match the chain".into()));
    }
    let r = chain.dims.len();
    if v.len() + 1 != r || a.len() + 1 != r {
        return Err(GeomError::ShapeMismatch("wrong number of maps for the chain".into()));
    }
    let ad = split.alpha_dims();
    for i in 0..r - 1 {
        let (vr, vc) = if dual {
            (split.vee_dims[i], split.vee_dims[i + 1])
        } else {
            (split.vee_dims[i + 1], split.vee_dims[i])
        };
        if v[i].rows != vr || v[i].cols != vc {
            return Err(GeomError::ShapeMismatch(format!("∨-block {i} has wrong shape")));
        }
        let (ar, ac) = if dual { (ad[i], ad[i + 1]) } else { (ad[i + 1], ad[i]) };
        if a[i].rows != ar || a[i].cols != ac {
            return Err(GeomError::ShapeMismatch(format!("α-block {i} has wrong shape")));
        }
    }
    Ok(())
}

/// Ad(s) applied to a point: entry (p, q) of map i picks up the sign
/// s_{i+1}[p] s_i[q].
pub fn ad_s_point(split: &SplitDescriptor, x: &Point) -> Point {
    let maps = x
        .maps
        .iter()
        .enumerate()
        .map(|(i, m)| {
            QMat::from_fn(m.rows, m.cols, |p, q| {
                &m[(p, q)] * q_int(split.sign(i + 1, p) * split.sign(i, q))
            })
        })
        .collect();
    Point { maps }
}

pub fn ad_s_dual(split: &SplitDescriptor, y: &DualPoint) -> DualPoint {
    let maps = y
        .maps
        .iter()
        .enumerate()
        .map(|(i, m)| {
            QMat::from_fn(m.rows, m.cols, |p, q| {
                &m[(p, q)] * q_int(split.sign(i, p) * split.sign(i + 1, q))
            })
        })
        .collect();
    DualPoint { maps }
}

pub fn is_ad_s_fixed_point(split: &SplitDescriptor, x: &Point) -> bool {
    ad_s_point(split, x) == *x
}

pub fn is_ad_s_fixed_dual(split: &SplitDescriptor, y: &DualPoint) -> bool {
    ad_s_dual(split, y) == *y
}

/// True when x is block diagonal with vanishing α-component, i.e. factors
/// as ε(x', 0).
pub fn factors_through_vee(split: &SplitDescriptor, x: &Point) -> bool {
    x.maps.iter().enumerate().all(|(i, m)| {
        (0..m.rows).all(|p| {
            (0..m.cols).all(|q| {
                let in_vee = split.sign(i + 1, p) == 1 && split.sign(i, q) == 1;
                in_vee || m[(p, q)].is_zero()
            })
        })
    })
}

/// True when y is block diagonal (no ∨↔α coupling).
pub fn dual_is_block_diagonal(split: &SplitDescriptor, y: &DualPoint) -> bool {
    y.maps.iter().enumerate().all(|(i, m)| {
        (0..m.rows).all(|p| {
            (0..m.cols).all(|q| {
                split.sign(i, p) == split.sign(i + 1, q) || m[(p, q)].is_zero()
            })
        })
    })
}

/// Basis of the commutant {x : [x, y] = 0} of a fixed covector y. By
/// transposition this is a conormal fiber in the reversed chain.
pub fn commutant_points(chain: &ChainVariety, y: &DualPoint) -> Result<Vec<Point>, GeomError> {
    if !y.shapes_match(&chain.dims) {
        return Err(GeomError::ShapeMismatch("covector off-chain".into()));
    }
    let r = chain.dims.len();
    let rev_dims: Vec<usize> = chain.dims.iter().rev().copied().collect();
    let rev_maps: Vec<QMat> = (0..r.saturating_sub(1)).map(|s| y.maps[r - 2 - s].clone()).collect();
    Ok(fiber_on_dims(&rev_dims, &rev_maps)
        .into_iter()
        .map(|d| Point {
            maps: (0..r.saturating_sub(1)).map(|s| d.maps[r - 2 - s].clone()).collect(),
        })
        .collect())
}

/// The four regularity verdicts for a conormal pair at a split chain.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RegularCertificate {
    pub bracket_zero: bool,
    pub x_in_expected_orbit: bool,
    pub y_in_dual_orbit: bool,
    pub commutant_factors: bool,
    pub expected_orbit: Multisegment,
    pub expected_dual: Multisegment,
    pub observed_orbit: Multisegment,
    pub observed_dual: Multisegment,
}

impl RegularCertificate {
    pub fn pass(&self) -> bool {
        self.bracket_zero && self.x_in_expected_orbit && self.y_in_dual_orbit && self.commutant_factors
    }

    pub fn failing_clause(&self) -> Option<&'static str> {
        if !self.bracket_zero {
            Some("bracket")
        } else if !self.x_in_expected_orbit {
            Some("orbit-of-x")
        } else if !self.y_in_dual_orbit {
            Some("dual-orbit-of-y")
        } else if !self.commutant_factors {
            Some("commutant-factorization")
        } else {
            None
        }
    }
}

/// Certify regularity of (x, y) against an expected orbit: bracket
/// vanishing, x lying in the expected orbit, y lying in its
/// Zelevinsky-dual orbit, and the commutant {x' : [x', y] = 0} factoring
/// through the embedded ∨-block.
pub fn regular_certificate(
    chain: &ChainVariety,
    split: &SplitDescriptor,
    x: &Point,
    y: &DualPoint,
    expected_orbit: &Multisegment,
) -> Result<RegularCertificate, GeomError> {
    let expected_dual = zelevinsky_dual(expected_orbit).dual;
    let bracket_zero = bracket_is_zero(chain, x, y)?;
    let observed_orbit = orbit_of_point(chain, x)?.to_multisegment(chain)?;
    let observed_dual = dual_orbit_to_multisegment(chain, &dual_rank_triangle(chain, y)?)?;
    let commutant_factors = commutant_points(chain, y)?
        .iter()
        .all(|b| factors_through_vee(split, b));
    Ok(RegularCertificate {
        bracket_zero,
        x_in_expected_orbit: observed_orbit == *expected_orbit,
        y_in_dual_orbit: observed_dual == expected_dual,
        commutant_factors,
        expected_orbit: expected_orbit.clone(),
        expected_dual,
        observed_orbit,
        observed_dual,
    })
}

/// Witness that s acts trivially on the microlocal data at (x, y):
/// Ad(s) fixes the pair, x factors as ε(x', 0), y is block diagonal, and
/// the connected family of central block scalars (a on ∨, b on α) fixes
/// both; s itself is the member (a, b) = (1, -1). Returns Err(reason) when
/// some condition fails.
pub fn s_central_triviality(
    chain: &ChainVariety,
    split: &SplitDescriptor,
    x: &Point,
    y: &DualPoint,
) -> Result<Result<(), String>, GeomError> {
    if !split.matches(chain) {
        return Err(GeomError::ShapeMismatch("split does not match the chain".into()));
    }
    if !bracket_is_zero(chain, x, y)? {
        return Ok(Err("bracket [x,y] does not vanish".into()));
    }
    if !is_ad_s_fixed_point(split, x) {
        return Ok(Err("Ad(s) does not fix x".into()));
    }
    if !is_ad_s_fixed_dual(split, y) {
        return Ok(Err("Ad(s) does not fix y".into()));
    }
    if !factors_through_vee(split, x) {
        return Ok(Err("x does not factor as eps(x',0)".into()));
    }
    if !dual_is_block_diagonal(split, y) {
        return Ok(Err("y couples the ∨ and α blocks".into()));
    }
    // Generic central witness: h_i = diag(a on ∨, b on α) with (a, b) =
    // (2, 3) must conjugate x and y to themselves exactly.
    let scal = |i: usize, k: usize| -> Q {
        if split.sign(i, k) == 1 {
            q_int(2)
        } else {
            q_int(3)
        }
    };
    for (i, m) in x.maps.iter().enumerate() {
        for p in 0..m.rows {
            for q in 0..m.cols {
                if !m[(p, q)].is_zero() && &m[(p, q)] * scal(i + 1, p) / scal(i, q) != m[(p, q)] {
                    return Ok(Err(format!("central scalars move x at map {i} ({p},{q})")));
                }
            }
        }
    }
    for (i, m) in y.maps.iter().enumerate() {
        for p in 0..m.rows {
            for q in 0..m.cols {
                if !m[(p, q)].is_zero() && &m[(p, q)] * scal(i, p) / scal(i + 1, q) != m[(p, q)] {
                    return Ok(Err(format!("central scalars move y at map {i} ({p},{q})")));
                }
            }
        }
    }
    Ok(Ok(()))
}

/// Canonical representative and conormal-fiber basis of an orbit on a
/// capacity vector (zero slots allowed; used for the ∨/α substructures).
pub fn fiber_basis_with_caps(
    chain: &ChainVariety,
    caps: &[usize],
    m: &Multisegment,
) -> Result<(Vec<QMat>, Vec<DualPoint>), GeomError> {
    let x_maps = canonical_point_with_caps(chain, caps, m)?;
    let basis = fiber_on_dims(caps, &x_maps);
    Ok((x_maps, basis))
}

/// Covector with entry 1 wherever two consecutive α-lines exist: the open
/// dual orbit of the zero α-point.
pub fn full_rank_alpha_dual(split: &SplitDescriptor) -> Vec<QMat> {
    let ad = split.alpha_dims();
    ad.windows(2)
        .map(|w| {
            let mut m = QMat::zeros(w[0], w[1]);
            if w[0] == 1 && w[1] == 1 {
                m[(0, 0)] = q_int(1);
            }
            m
        })
        .collect()
}

/// Report of the conormal-decomposition verification at one orbit.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecompositionReport {
    pub orbit: Multisegment,
    /// Pairs (∨-part, α-part) of product orbits whose union is the orbit.
    pub pairs: Vec<(Multisegment, Multisegment)>,
    pub forward_samples: usize,
    pub closure_samples: usize,
}

/// Verify the conormal decomposition over the embedded product: every
/// product orbit pair with union C gives embedded conormal pairs landing
/// in Λ_C, and pairs with union strictly below C give embedded conormal
/// points obeying the rank bounds of C (closure spot-check). Any
/// counterexample aborts with a witness message.
pub fn verify_conormal_decomposition(
    chain: &ChainVariety,
    split: &SplitDescriptor,
    c: &Multisegment,
    samples: usize,
    seed: u64,
    height_bound: i64,
) -> Result<DecompositionReport, GeomError> {
    if !split.matches(chain) {
        return Err(GeomError::ShapeMismatch("split does not match the chain".into()));
    }
    let c_tri = triangle_from_multisegment(chain, &chain.dims, c)?;
    let vee_orbits = enumerate_orbits_with_caps(chain, &split.vee_dims, 100_000)?;
    let alpha_orbits = enumerate_orbits_with_caps(chain, &split.alpha_dims(), 100_000)?;
    let mut pairs = Vec::new();
    let mut closure_pairs = Vec::new();
    for mv in &vee_orbits {
        for ma in &alpha_orbits {
            let union = mv.union(ma);
            if union == *c {
                pairs.push((mv.clone(), ma.clone()));
            } else {
                let u_tri = triangle_from_multisegment(chain, &chain.dims, &union)?;
                if closure_leq(&u_tri, &c_tri)? {
                    closure_pairs.push((mv.clone(), ma.clone()));
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut forward_samples = 0;
    for (mv, ma) in &pairs {
        let (xv, vb) = fiber_basis_with_caps(chain, &split.vee_dims, mv)?;
        let (xa, ab) = fiber_basis_with_caps(chain, &split.alpha_dims(), ma)?;
        let x = embed_split(chain, split, &xv, &xa)?;
        if orbit_of_point(chain, &x)? != c_tri {
            return Err(GeomError::SupportMismatch(format!(
                "embedded product orbit ({mv}; {ma}) does not land in {c}"
            )));
        }
        for _ in 0..samples {
            let yv = sample_fiber(&split.vee_dims, &vb, &mut rng, height_bound);
            let ya = sample_fiber(&split.alpha_dims(), &ab, &mut rng, height_bound);
            let y = embed_split_dual(chain, split, &yv.maps, &ya.maps)?;
            if !bracket_is_zero(chain, &x, &y)? {
                return Err(GeomError::SupportMismatch(format!(
                    "embedded conormal pair for ({mv}; {ma}) leaves the conormal of {c}"
                )));
            }
            forward_samples += 1;
        }
    }
    let mut closure_samples = 0;
    for (mv, ma) in &closure_pairs {
        let (xv, vb) = fiber_basis_with_caps(chain, &split.vee_dims, mv)?;
        let (xa, ab) = fiber_basis_with_caps(chain, &split.alpha_dims(), ma)?;
        let x = embed_split(chain, split, &xv, &xa)?;
        if !closure_leq(&orbit_of_point(chain, &x)?, &c_tri)? {
            return Err(GeomError::SupportMismatch(format!(
                "closure pair ({mv}; {ma}) violates the rank bounds of {c}"
            )));
        }
        for _ in 0..samples.min(3) {
            let yv = sample_fiber(&split.vee_dims, &vb, &mut rng, height_bound);
            let ya = sample_fiber(&split.alpha_dims(), &ab, &mut rng, height_bound);
            let y = embed_split_dual(chain, split, &yv.maps, &ya.maps)?;
            if !bracket_is_zero(chain, &x, &y)? {
                return Err(GeomError::SupportMismatch(
                    "closure sample leaves the conormal variety".into(),
                ));
            }
            closure_samples += 1;
        }
    }
    Ok(DecompositionReport {
        orbit: c.clone(),
        pairs,
        forward_samples,
        closure_samples,
    })
}
