//! Grothendieck-group arithmetic: orbit-indexed bases, the unitriangular
//! change-of-basis matrices m (standards → irreducibles) and c = ᵗm
//! (IC sheaves → standard sheaves), the signed perfect pairing, endoscopic
//! lift as concatenation, and the fixed-point consistency check.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::certify::restrict_to_chain;
use crate::geometry::{
    closure_leq, enumerate_orbits_with_caps, orbit_dim, triangle_from_multisegment, ChainVariety,
    GeomError, RankTriangle,
};
use crate::param::{InfinitesimalParameter, Multisegment};

#[derive(Debug, Error)]
pub enum KError {
    #[error("index mismatch: {0}")]
    IndexMismatch(String),
    #[error("matrix is not unitriangular: {0}")]
    NotUnitriangular(String),
    #[error("matrix entry outside the closure order: row {row}, col {col}")]
    OutsideClosure { row: usize, col: usize },
    #[error("orbit not found in the target basis: {0}")]
    OrbitNotFound(String),
    #[error("basis requires multiplicity one everywhere")]
    NotMultiplicityFree,
    #[error("bad matrix file: {0}")]
    BadFile(String),
    #[error(transparent)]
    Geometry(#[from] GeomError),
}

/// Orbit dimension on a capacity vector with possible zero slots: zero
/// slots cut the chain into independent positive runs.
pub fn orbit_dim_with_caps(
    chain: &ChainVariety,
    caps: &[usize],
    m: &Multisegment,
) -> Result<usize, GeomError> {
    let mut total = 0;
    let mut i = 0;
    while i < caps.len() {
        if caps[i] == 0 {
            i += 1;
            continue;
        }
        let mut j = i;
        while j + 1 < caps.len() && caps[j + 1] > 0 {
            j += 1;
        }
        let sub = ChainVariety::new(
            chain.label.clone(),
            chain.exponents[i..=j].to_vec(),
            caps[i..=j].to_vec(),
        );
        total += orbit_dim(&sub, &restrict_to_chain(m, &sub))?;
        i = j + 1;
    }
    Ok(total)
}

/// Orbit-indexed basis of the Grothendieck groups attached to a variety
/// (a list of chain components with slot capacities). Orbits are sorted
/// ascending by (dimension, canonical string), a linear extension of the
/// closure order.
#[derive(Clone, Debug)]
pub struct OrbitBasis {
    pub components: Vec<(ChainVariety, Vec<usize>)>,
    pub orbits: Vec<Multisegment>,
    /// d(C) per orbit.
    pub dims: Vec<usize>,
    triangles: Vec<Vec<RankTriangle>>,
}

impl OrbitBasis {
    pub fn for_components(
        components: Vec<(ChainVariety, Vec<usize>)>,
        bound: usize,
    ) -> Result<OrbitBasis, KError> {
        let per_component: Vec<Vec<Multisegment>> = components
            .iter()
            .map(|(chain, caps)| enumerate_orbits_with_caps(chain, caps, bound))
            .collect::<Result<_, _>>()?;
        let mut entries: Vec<(Multisegment, usize, Vec<RankTriangle>)> = vec![(
            Multisegment::empty(),
            0,
            Vec::new(),
        )];
        for (k, orbits) in per_component.iter().enumerate() {
            let (chain, caps) = &components[k];
            let mut next = Vec::with_capacity(entries.len() * orbits.len());
            if entries.len() * orbits.len() > bound {
                return Err(GeomError::BoundExceeded(entries.len() * orbits.len()).into());
            }
            for (m, d, tris) in &entries {
                for o in orbits {
                    let mut tris = tris.clone();
                    tris.push(triangle_from_multisegment(chain, caps, o)?);
                    next.push((
                        m.union(o),
                        d + orbit_dim_with_caps(chain, caps, o)?,
                        tris,
                    ));
                }
            }
            entries = next;
        }
        entries.sort_by(|a, b| (a.1, a.0.canonical_string()).cmp(&(b.1, b.0.canonical_string())));
        for w in entries.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(KError::IndexMismatch(format!(
                    "components overlap: orbit {} is ambiguous",
                    w[0].0
                )));
            }
        }
        let orbits = entries.iter().map(|e| e.0.clone()).collect();
        let dims = entries.iter().map(|e| e.1).collect();
        let triangles = entries.iter().map(|e| e.2.clone()).collect();
        Ok(OrbitBasis {
            components,
            orbits,
            dims,
            triangles,
        })
    }

    pub fn for_lambda(lambda: &InfinitesimalParameter, bound: usize) -> Result<OrbitBasis, KError> {
        let components = crate::geometry::varieties_of(lambda)
            .into_iter()
            .map(|c| {
                let caps = c.dims.clone();
                (c, caps)
            })
            .collect();
        OrbitBasis::for_components(components, bound)
    }

    pub fn len(&self) -> usize {
        self.orbits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orbits.is_empty()
    }

    pub fn index_of(&self, m: &Multisegment) -> Option<usize> {
        self.orbits.iter().position(|o| o == m)
    }

    /// Closure order between two basis orbits (componentwise dominance).
    pub fn closure_leq(&self, i: usize, j: usize) -> bool {
        self.triangles[i]
            .iter()
            .zip(&self.triangles[j])
            .all(|(a, b)| closure_leq(a, b).unwrap_or(false))
    }

    pub fn is_multiplicity_free(&self) -> bool {
        self.components.iter().all(|(_, caps)| caps.iter().all(|&m| m <= 1))
    }
}

/// Unitriangular change-of-basis data: column j lists the coefficients of
/// the j-th standard object in the irreducible basis.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisMatrix {
    pub orbits: Vec<Multisegment>,
    pub rows: Vec<Vec<i64>>,
}

impl BasisMatrix {
    pub fn identity(orbits: Vec<Multisegment>) -> BasisMatrix {
        let n = orbits.len();
        let rows = (0..n)
            .map(|i| (0..n).map(|j| i64::from(i == j)).collect())
            .collect();
        BasisMatrix { orbits, rows }
    }

    pub fn from_json(text: &str) -> Result<BasisMatrix, KError> {
        let mut m: BasisMatrix =
            serde_json::from_str(text).map_err(|e| KError::BadFile(e.to_string()))?;
        // Re-canonicalize the segment order inside each orbit.
        for o in &mut m.orbits {
            *o = Multisegment::new(o.segments().to_vec());
        }
        Ok(m)
    }

    pub fn n(&self) -> usize {
        self.orbits.len()
    }

    /// Check shape, unitriangularity, and (against a basis) that the orbit
    /// order matches and every nonzero entry respects the closure order.
    pub fn validate(&self, basis: Option<&OrbitBasis>) -> Result<(), KError> {
        let n = self.n();
        if self.rows.len() != n || self.rows.iter().any(|r| r.len() != n) {
            return Err(KError::IndexMismatch(format!(
                "{}x{} rows for {} orbits",
                self.rows.len(),
                self.rows.first().map_or(0, |r| r.len()),
                n
            )));
        }
        for i in 0..n {
            if self.rows[i][i] != 1 {
                return Err(KError::NotUnitriangular(format!("diagonal entry {i} is not 1")));
            }
            for j in 0..i {
                if self.rows[i][j] != 0 {
                    return Err(KError::NotUnitriangular(format!(
                        "entry ({i},{j}) below the diagonal is nonzero"
                    )));
                }
            }
        }
        if let Some(basis) = basis {
            if self.orbits != basis.orbits {
                return Err(KError::IndexMismatch(
                    "orbit list does not match the basis order".into(),
                ));
            }
            for i in 0..n {
                for j in (i + 1)..n {
                    if self.rows[i][j] != 0 && !basis.closure_leq(i, j) {
                        return Err(KError::OutsideClosure { row: i, col: j });
                    }
                }
            }
        }
        Ok(())
    }

    /// m^{-1} v by back substitution (m upper unitriangular, exact).
    pub fn solve(&self, v: &[i64]) -> Result<Vec<i64>, KError> {
        solve_upper_unitriangular(&self.rows, v)
    }

    /// m v.
    pub fn apply(&self, v: &[i64]) -> Result<Vec<i64>, KError> {
        mat_vec(&self.rows, v)
    }

    /// ᵗm v.
    pub fn apply_transpose(&self, v: &[i64]) -> Result<Vec<i64>, KError> {
        let n = self.n();
        if v.len() != n {
            return Err(KError::IndexMismatch("vector length".into()));
        }
        Ok((0..n).map(|j| (0..n).map(|i| self.rows[i][j] * v[i]).sum()).collect())
    }
}

fn mat_vec(rows: &[Vec<i64>], v: &[i64]) -> Result<Vec<i64>, KError> {
    let n = rows.len();
    if v.len() != n {
        return Err(KError::IndexMismatch("vector length".into()));
    }
    Ok(rows.iter().map(|r| r.iter().zip(v).map(|(a, b)| a * b).sum()).collect())
}

fn solve_upper_unitriangular(rows: &[Vec<i64>], v: &[i64]) -> Result<Vec<i64>, KError> {
    let n = rows.len();
    if v.len() != n {
        return Err(KError::IndexMismatch("vector length".into()));
    }
    let mut x = vec![0i64; n];
    for i in (0..n).rev() {
        let tail: i64 = ((i + 1)..n).map(|k| rows[i][k] * x[k]).sum();
        x[i] = v[i] - tail;
    }
    Ok(x)
}

/// Incidence (zeta) matrix of the closure order: valid as m exactly when
/// every orbit closure is smooth, which holds when all multiplicities are
/// one (coordinate-subspace closures).
pub fn builtin_m_for_multiplicity_free(basis: &OrbitBasis) -> Result<BasisMatrix, KError> {
    if !basis.is_multiplicity_free() {
        return Err(KError::NotMultiplicityFree);
    }
    let n = basis.len();
    let rows = (0..n)
        .map(|i| (0..n).map(|j| i64::from(basis.closure_leq(i, j))).collect())
        .collect();
    Ok(BasisMatrix {
        orbits: basis.orbits.clone(),
        rows,
    })
}

/// The perfect pairing ⟨v, F⟩ = Σ_C (−1)^{d(C)} v[C] F[C] between
/// irreducible coordinates and IC coordinates.
pub fn pairing(v: &[i64], f: &[i64], dims: &[usize]) -> Result<i64, KError> {
    if v.len() != f.len() || v.len() != dims.len() {
        return Err(KError::IndexMismatch("pairing operands".into()));
    }
    Ok(v
        .iter()
        .zip(f)
        .zip(dims)
        .map(|((a, b), d)| if d % 2 == 0 { a * b } else { -(a * b) })
        .sum())
}

fn signed(v: &[i64], dims: &[usize]) -> Vec<i64> {
    v.iter()
        .zip(dims)
        .map(|(a, d)| if d % 2 == 0 { *a } else { -*a })
        .collect()
}

/// Natural coordinates of a sheaf class given in IC coordinates:
/// F♮ = ᵗm · diag((−1)^{d(C)}) · F, using c = ᵗm.
pub fn to_natural(m: &BasisMatrix, dims: &[usize], f: &[i64]) -> Result<Vec<i64>, KError> {
    m.apply_transpose(&signed(f, dims))
}

/// Verify ⟨η, F⟩ = ⟨M(η), F♮⟩: the signed pairing in the irreducible/IC
/// coordinates equals the plain dot product in the standard/natural
/// coordinates.
pub fn kl_translate_check(
    m: &BasisMatrix,
    dims: &[usize],
    eta: &[i64],
    f: &[i64],
) -> Result<bool, KError> {
    let lhs = pairing(eta, f, dims)?;
    let m_eta = m.solve(eta)?;
    let f_nat = to_natural(m, dims, f)?;
    let rhs: i64 = m_eta.iter().zip(&f_nat).map(|(a, b)| a * b).sum();
    Ok(lhs == rhs)
}

/// Verify the dual-basis pairing ⟨M(π_j), 1♮_{C_k}⟩ = δ_{jk}, computed
/// through the signed pairing in irreducible/IC coordinates.
pub fn pairing_on_standards_ok(m: &BasisMatrix, dims: &[usize]) -> Result<bool, KError> {
    let n = m.n();
    if dims.len() != n {
        return Err(KError::IndexMismatch("dims length".into()));
    }
    for j in 0..n {
        // Irreducible coordinates of the j-th standard object: column j.
        let std_j: Vec<i64> = (0..n).map(|i| m.rows[i][j]).collect();
        for k in 0..n {
            // IC coordinates of 1♮_{C_k}: diag(±) c^{-1} e_k with c = ᵗm,
            // i.e. solve ᵗm x = e_k (lower unitriangular, forward subst).
            let mut x = vec![0i64; n];
            for i in 0..n {
                let head: i64 = (0..i).map(|t| m.rows[t][i] * x[t]).sum();
                x[i] = i64::from(i == k) - head;
            }
            let nat_k = signed(&x, dims);
            let got = pairing(&std_j, &nat_k, dims)?;
            if got != i64::from(j == k) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Product of orbit bases (the K-group of a product variety): indices run
/// in mixed radix over the factors, last factor fastest.
#[derive(Clone, Debug)]
pub struct ProductBasis {
    pub parts: Vec<OrbitBasis>,
}

impl ProductBasis {
    pub fn len(&self) -> usize {
        self.parts.iter().map(|p| p.len()).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn tuple(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0usize; self.parts.len()];
        for k in (0..self.parts.len()).rev() {
            let n = self.parts[k].len();
            out[k] = idx % n;
            idx /= n;
        }
        out
    }

    pub fn index(&self, tuple: &[usize]) -> usize {
        let mut idx = 0;
        for (k, &t) in tuple.iter().enumerate() {
            idx = idx * self.parts[k].len() + t;
        }
        idx
    }

    pub fn index_of(&self, orbits: &[Multisegment]) -> Option<usize> {
        if orbits.len() != self.parts.len() {
            return None;
        }
        let mut tuple = Vec::with_capacity(orbits.len());
        for (part, o) in self.parts.iter().zip(orbits) {
            tuple.push(part.index_of(o)?);
        }
        Some(self.index(&tuple))
    }

    /// Union of the factor orbits at a product index.
    pub fn union_orbit(&self, idx: usize) -> Multisegment {
        let tuple = self.tuple(idx);
        let mut m = Multisegment::empty();
        for (k, &t) in tuple.iter().enumerate() {
            m = m.union(&self.parts[k].orbits[t]);
        }
        m
    }

    /// Kronecker product of per-factor m-matrices: upper unitriangular in
    /// the mixed-radix index order.
    pub fn kronecker_m(&self, parts: &[BasisMatrix]) -> Result<Vec<Vec<i64>>, KError> {
        if parts.len() != self.parts.len()
            || parts.iter().zip(&self.parts).any(|(m, b)| m.n() != b.len())
        {
            return Err(KError::IndexMismatch("factor matrices do not match the parts".into()));
        }
        let n = self.len();
        let mut rows = vec![vec![0i64; n]; n];
        for (i, row) in rows.iter_mut().enumerate() {
            let ti = self.tuple(i);
            for (j, cell) in row.iter_mut().enumerate() {
                let tj = self.tuple(j);
                *cell = ti
                    .iter()
                    .zip(&tj)
                    .zip(parts)
                    .map(|((&a, &b), m)| m.rows[a][b])
                    .product();
            }
        }
        Ok(rows)
    }
}

/// Endoscopic lift of a standard-basis vector on a product: each product
/// orbit maps to the multiset union, extended linearly.
pub fn lift_concatenate(
    prod: &ProductBasis,
    v_std: &[i64],
    total: &OrbitBasis,
) -> Result<Vec<i64>, KError> {
    if v_std.len() != prod.len() {
        return Err(KError::IndexMismatch("standard vector length".into()));
    }
    let mut out = vec![0i64; total.len()];
    for (idx, &coeff) in v_std.iter().enumerate() {
        if coeff == 0 {
            continue;
        }
        let union = prod.union_orbit(idx);
        let t = total
            .index_of(&union)
            .ok_or_else(|| KError::OrbitNotFound(union.to_string()))?;
        out[t] += coeff;
    }
    Ok(out)
}

/// Outcome of the fixed-point consistency check.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FixedPointOutcome {
    pub holds: bool,
    /// First differing orbit with (lifted, total) standard coefficients.
    pub witness: Option<(Multisegment, i64, i64)>,
}

/// Verify Lift(M(η_prod)) = M(η_total) in the standard basis: the
/// coefficient-level form of ⟨η_total, F⟩ = ⟨η_prod, F restricted⟩ for
/// all F.
pub fn fixed_point_check(
    prod: &ProductBasis,
    m_parts: &[BasisMatrix],
    eta_prod: &[i64],
    total: &OrbitBasis,
    m_total: &BasisMatrix,
    eta_total: &[i64],
) -> Result<FixedPointOutcome, KError> {
    m_total.validate(Some(total))?;
    let kron = prod.kronecker_m(m_parts)?;
    let m_prod_std = solve_upper_unitriangular(&kron, eta_prod)?;
    let lifted = lift_concatenate(prod, &m_prod_std, total)?;
    let total_std = m_total.solve(eta_total)?;
    for i in 0..total.len() {
        if lifted[i] != total_std[i] {
            return Ok(FixedPointOutcome {
                holds: false,
                witness: Some((total.orbits[i].clone(), lifted[i], total_std[i])),
            });
        }
    }
    Ok(FixedPointOutcome {
        holds: true,
        witness: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certify::split_for_alpha;
    use crate::geometry::varieties_of;
    use crate::param::{infinitesimal, theta_lift_param};
    use crate::parse::parse_parameter;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const BOUND: usize = 100_000;

    fn basis_for(text: &str) -> OrbitBasis {
        let lam = infinitesimal(&parse_parameter(text).unwrap());
        OrbitBasis::for_lambda(&lam, BOUND).unwrap()
    }

    #[test]
    fn basis_order_is_a_linear_extension() {
        let basis = basis_for("nu^{3/2}+nu^{1/2}+nu^{-1/2}+nu^{-3/2}");
        assert_eq!(basis.len(), 8);
        for i in 0..basis.len() {
            for j in 0..basis.len() {
                if basis.closure_leq(i, j) && i != j {
                    assert!(i < j, "closure order violated at ({i},{j})");
                }
            }
        }
        assert!(basis.is_multiplicity_free());
    }

    #[test]
    fn builtin_zeta_matrices() {
        let b2 = basis_for("nu^{1/2}+nu^{-1/2}");
        let m = builtin_m_for_multiplicity_free(&b2).unwrap();
        assert_eq!(m.rows, vec![vec![1, 1], vec![0, 1]]);
        m.validate(Some(&b2)).unwrap();

        let b1 = basis_for("nu^{0}");
        let m1 = builtin_m_for_multiplicity_free(&b1).unwrap();
        assert_eq!(m1.rows, vec![vec![1]]);

        let b4 = basis_for("nu^{3/2}+nu^{1/2}+nu^{-1/2}+nu^{-3/2}");
        let m4 = builtin_m_for_multiplicity_free(&b4).unwrap();
        m4.validate(Some(&b4)).unwrap();
        // 8 coordinate-subspace orbits; zeta row sums count the
        // upper sets.
        assert_eq!(m4.rows[0].iter().sum::<i64>(), 8);

        let b22 = basis_for("S_2 + S_2");
        assert!(matches!(
            builtin_m_for_multiplicity_free(&b22),
            Err(KError::NotMultiplicityFree)
        ));
    }

    #[test]
    fn pairing_diagonal_and_orthogonal() {
        let dims = vec![0usize, 3, 4];
        assert_eq!(pairing(&[1, 0, 0], &[1, 0, 0], &dims).unwrap(), 1);
        assert_eq!(pairing(&[1, 0, 0], &[0, 1, 0], &dims).unwrap(), 0);
        assert_eq!(pairing(&[0, 1, 0], &[0, 1, 0], &dims).unwrap(), -1);
    }

    fn random_unitriangular(n: usize, rng: &mut ChaCha8Rng) -> BasisMatrix {
        let orbits = vec![Multisegment::empty(); n];
        let rows = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        if j < i {
                            0
                        } else if j == i {
                            1
                        } else {
                            rng.gen_range(-5..=5)
                        }
                    })
                    .collect()
            })
            .collect();
        BasisMatrix { orbits, rows }
    }

    #[test]
    fn kl_translate_holds_on_random_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..50 {
            let n = rng.gen_range(1..=12);
            let m = random_unitriangular(n, &mut rng);
            let dims: Vec<usize> = (0..n).map(|_| rng.gen_range(0..9)).collect();
            let eta: Vec<i64> = (0..n).map(|_| rng.gen_range(-9..=9)).collect();
            let f: Vec<i64> = (0..n).map(|_| rng.gen_range(-9..=9)).collect();
            assert!(kl_translate_check(&m, &dims, &eta, &f).unwrap());
            assert!(pairing_on_standards_ok(&m, &dims).unwrap());
        }
    }

    #[test]
    fn solve_inverts_apply() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let n = rng.gen_range(1..=10);
            let m = random_unitriangular(n, &mut rng);
            let v: Vec<i64> = (0..n).map(|_| rng.gen_range(-9..=9)).collect();
            assert_eq!(m.solve(&m.apply(&v).unwrap()).unwrap(), v);
            assert_eq!(m.apply(&m.solve(&v).unwrap()).unwrap(), v);
        }
    }

    /// Build the total and product bases for a lifted parameter.
    fn theta_bases(phi_text: &str, alpha: u32) -> (OrbitBasis, ProductBasis) {
        let phi = parse_parameter(phi_text).unwrap();
        let lifted = theta_lift_param(&phi, alpha);
        let chains = varieties_of(&infinitesimal(&lifted));
        let total = OrbitBasis::for_components(
            chains.iter().map(|c| (c.clone(), c.dims.clone())).collect(),
            BOUND,
        )
        .unwrap();
        let mut vee_parts = Vec::new();
        let mut alpha_parts = Vec::new();
        for c in &chains {
            let split = split_for_alpha(c, alpha);
            vee_parts.push((c.clone(), split.vee_dims.clone()));
            alpha_parts.push((c.clone(), split.alpha_dims()));
        }
        let prod = ProductBasis {
            parts: vec![
                OrbitBasis::for_components(vee_parts, BOUND).unwrap(),
                OrbitBasis::for_components(alpha_parts, BOUND).unwrap(),
            ],
        };
        (total, prod)
    }

    #[test]
    fn fixed_point_on_the_2_2_chain() {
        // Lift of ν^{±1/2} at α = 2: λ = 2·(±1/2) on the (2,2) chain;
        // the m-matrix is not multiplicity free, so it is ingested.
        let (total, prod) = theta_bases("nu^{1/2} + nu^{-1/2}", 2);
        assert_eq!(total.len(), 3);
        assert_eq!(total.dims, vec![0, 3, 4]);
        assert_eq!(prod.len(), 4);
        let m_total =
            BasisMatrix::from_json(include_str!("../tests/data/m_2x2.json")).unwrap();
        m_total.validate(Some(&total)).unwrap();
        let m_parts: Vec<BasisMatrix> = prod
            .parts
            .iter()
            .map(|p| builtin_m_for_multiplicity_free(p).unwrap())
            .collect();
        // η's are the singleton L-packet vectors: the zero orbit on both
        // sides (the lifted parameter is 4 singletons).
        let zero_pair = prod
            .index_of(&[prod.parts[0].orbits[0].clone(), prod.parts[1].orbits[0].clone()])
            .unwrap();
        let mut eta_prod = vec![0i64; prod.len()];
        eta_prod[zero_pair] = 1;
        let mut eta_total = vec![0i64; total.len()];
        eta_total[0] = 1;
        let out = fixed_point_check(&prod, &m_parts, &eta_prod, &total, &m_total, &eta_total)
            .unwrap();
        assert!(out.holds);
        // Negative control: corrupted total-side vector fails with a
        // witness orbit.
        let mut bad = eta_total.clone();
        bad[1] = 1;
        let out = fixed_point_check(&prod, &m_parts, &eta_prod, &total, &m_total, &bad).unwrap();
        assert!(!out.holds);
        assert!(out.witness.is_some());
    }

    #[test]
    fn lift_is_associative_across_a_three_way_split() {
        let chain = ChainVariety::standard(vec![1, 1, 1]);
        let caps = [vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]];
        let parts: Vec<OrbitBasis> = caps
            .iter()
            .map(|c| OrbitBasis::for_components(vec![(chain.clone(), c.clone())], BOUND).unwrap())
            .collect();
        let total = OrbitBasis::for_components(vec![(chain.clone(), chain.dims.clone())], BOUND)
            .unwrap();
        // Each factor has exactly one orbit; the 3-way product lifts to the
        // zero orbit no matter how the factors are grouped.
        let prod3 = ProductBasis { parts: parts.clone() };
        let lifted = lift_concatenate(&prod3, &[1], &total).unwrap();
        let pair01 = OrbitBasis::for_components(
            vec![(chain.clone(), vec![1, 1, 0])],
            BOUND,
        )
        .unwrap();
        let prod2 = ProductBasis {
            parts: vec![pair01, parts[2].clone()],
        };
        let idx = prod2
            .index_of(&[
                prod2.parts[0].orbits[0].clone(),
                prod2.parts[1].orbits[0].clone(),
            ])
            .unwrap();
        let mut v = vec![0i64; prod2.len()];
        v[idx] = 1;
        let lifted2 = lift_concatenate(&prod2, &v, &total).unwrap();
        assert_eq!(lifted, lifted2);
    }

    #[test]
    fn json_matrix_validation_rejects_bad_shapes() {
        let m = BasisMatrix::from_json(r#"{"orbits": [[]], "rows": [[1, 0]]}"#).unwrap();
        assert!(m.validate(None).is_err());
        let m = BasisMatrix::from_json(r#"{"orbits": [[]], "rows": [[2]]}"#).unwrap();
        assert!(matches!(m.validate(None), Err(KError::NotUnitriangular(_))));
    }
}
