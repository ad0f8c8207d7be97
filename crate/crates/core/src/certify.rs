//! Assembly of fixed-point certificates for a theta lift: split every
//! chain of the lifted parameter into its ∨- and α-blocks, construct the
//! distinguished conormal pair, and run the regularity and
//! central-triviality checks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::conormal::{
    embed_split, embed_split_dual, fiber_basis_with_caps, full_rank_alpha_dual,
    regular_certificate, s_central_triviality, RegularCertificate, SplitDescriptor,
};
use crate::duality::{check_dual_sum_identity, DualSumIdentity};
use crate::geometry::{
    triangle_of_maps, varieties_of, ChainVariety, DualPoint, GeomError, RankTriangle,
};
use crate::linalg::QMat;
use crate::param::{
    adams_threshold_ok, infinitesimal, theta_lift_param, Exponent, Multisegment, Segment,
};

/// Exponents of the α-part: (α-1)/2, (α-1)/2 - 1, ..., -(α-1)/2.
pub fn alpha_exponents(alpha: u32) -> Vec<Exponent> {
    let a = alpha as i64;
    (0..a).map(|i| Exponent::from_twice(a - 1 - 2 * i)).collect()
}

/// Segments of `m` living on the chain (same line, every exponent a slot).
pub fn restrict_to_chain(m: &Multisegment, chain: &ChainVariety) -> Multisegment {
    let segs: Vec<Segment> = m
        .segments()
        .iter()
        .filter(|s| {
            s.label == chain.label
                && chain.slot_of(s.end()).is_some()
                && chain.slot_of(s.begin()).is_some()
        })
        .cloned()
        .collect();
    Multisegment::new(segs)
}

/// Split of a chain of the lifted parameter: the α-line occupies the slots
/// whose exponent belongs to the trivial-label α-part.
pub fn split_for_alpha(chain: &ChainVariety, alpha: u32) -> SplitDescriptor {
    let alpha_exps = alpha_exponents(alpha);
    let alpha_slot: Vec<bool> = chain
        .exponents
        .iter()
        .map(|e| chain.label.is_trivial() && alpha_exps.contains(e))
        .collect();
    let vee_dims = chain
        .dims
        .iter()
        .zip(&alpha_slot)
        .map(|(&m, &a)| m - usize::from(a))
        .collect();
    SplitDescriptor { vee_dims, alpha_slot }
}

/// Sample fiber covectors until 3 consecutive draws share a rank triangle;
/// returns the stabilized covector.
fn stabilized_fiber_sample(
    caps: &[usize],
    basis: &[DualPoint],
    rng: &mut ChaCha8Rng,
    height_bound: i64,
    max_draws: usize,
) -> Result<DualPoint, GeomError> {
    let r = caps.len();
    let rev_caps: Vec<usize> = caps.iter().rev().copied().collect();
    let mut window: Vec<(RankTriangle, DualPoint)> = Vec::new();
    for _ in 0..max_draws {
        let y = crate::conormal::sample_fiber(caps, basis, rng, height_bound);
        let rev_maps: Vec<QMat> = (0..r.saturating_sub(1)).map(|s| y.maps[r - 2 - s].clone()).collect();
        let tri = triangle_of_maps(&rev_caps, &rev_maps)?;
        window.push((tri, y));
        if window.len() >= 3 {
            let k = window.len();
            if window[k - 1].0 == window[k - 2].0 && window[k - 2].0 == window[k - 3].0 {
                return Ok(window.pop().unwrap().1);
            }
        }
    }
    Err(GeomError::Unstable(max_draws))
}

/// Certificates for one chain of the lifted parameter.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChainCertificate {
    pub chain: ChainVariety,
    pub split: SplitDescriptor,
    pub expected_orbit: Multisegment,
    pub regular: RegularCertificate,
    /// None = central-triviality passed; Some(reason) otherwise.
    pub central_failure: Option<String>,
}

impl ChainCertificate {
    pub fn pass(&self) -> bool {
        self.regular.pass() && self.central_failure.is_none()
    }
}

/// Full verification report for a pair (φ, α).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FixedPointReport {
    pub phi: Multisegment,
    pub alpha: u32,
    pub lifted: Multisegment,
    pub threshold_ok: bool,
    pub identity: DualSumIdentity,
    pub chains: Vec<ChainCertificate>,
    pub seed: u64,
}

impl FixedPointReport {
    pub fn pass(&self) -> bool {
        self.threshold_ok && self.identity.holds && self.chains.iter().all(|c| c.pass())
    }
}

/// Run the whole fixed-point verification: transport threshold, dual-sum
/// identity, and per-chain regularity + central-triviality certificates
/// for the distinguished conormal pair
/// (x, y) = (ε(x^∨, 0), ᵗε(generic fiber covector, full-rank α-chain)).
pub fn verify_fixed_point(
    phi: &Multisegment,
    alpha: u32,
    seed: u64,
    height_bound: i64,
) -> Result<FixedPointReport, GeomError> {
    let threshold_ok = adams_threshold_ok(phi, alpha);
    let identity = check_dual_sum_identity(phi, alpha);
    let lifted = theta_lift_param(phi, alpha);
    let phi_vee = phi.contragredient();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chains = Vec::new();
    for chain in varieties_of(&infinitesimal(&lifted)) {
        let split = split_for_alpha(&chain, alpha);
        let expected_orbit = restrict_to_chain(&lifted, &chain);
        let vee_part = restrict_to_chain(&phi_vee, &chain);
        let (xv, vee_fiber) = fiber_basis_with_caps(&chain, &split.vee_dims, &vee_part)?;
        let xa: Vec<QMat> = {
            let ad = split.alpha_dims();
            ad.windows(2).map(|w| QMat::zeros(w[1], w[0])).collect()
        };
        let x = embed_split(&chain, &split, &xv, &xa)?;
        let yv = stabilized_fiber_sample(&split.vee_dims, &vee_fiber, &mut rng, height_bound, 30)?;
        let ya = full_rank_alpha_dual(&split);
        let y = embed_split_dual(&chain, &split, &yv.maps, &ya)?;
        let regular = regular_certificate(&chain, &split, &x, &y, &expected_orbit)?;
        let central_failure = s_central_triviality(&chain, &split, &x, &y)?.err();
        chains.push(ChainCertificate {
            chain,
            split,
            expected_orbit,
            regular,
            central_failure,
        });
    }
    Ok(FixedPointReport {
        phi: phi.clone(),
        alpha,
        lifted,
        threshold_ok,
        identity,
        chains,
        seed,
    })
}
