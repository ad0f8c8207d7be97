//! Multisegments: exact half-integer exponents, cuspidal labels, segments,
//! L-parameter arithmetic (contragredient, theta lift, Arthur decompositions)
//! and the trivial-exponent threshold.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A half-integer stored exactly as twice its value.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Exponent(i64);

impl Exponent {
    pub fn from_twice(twice: i64) -> Self {
        Exponent(twice)
    }

    pub fn from_int(n: i64) -> Self {
        Exponent(2 * n)
    }

    pub fn twice(self) -> i64 {
        self.0
    }

    pub fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }

    pub fn abs(self) -> Self {
        Exponent(self.0.abs())
    }

    pub fn neg(self) -> Self {
        Exponent(-self.0)
    }

    /// x + n for an integer n.
    pub fn plus_int(self, n: i64) -> Self {
        Exponent(self.0 + 2 * n)
    }

    /// True when `self` and `other` differ by an integer.
    pub fn same_coset(self, other: Exponent) -> bool {
        (self.0 - other.0) % 2 == 0
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

impl std::str::FromStr for Exponent {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (num, den) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s, "1"),
        };
        let p: i64 = num.parse().map_err(|_| format!("bad numerator {num:?}"))?;
        let q: i64 = den.parse().map_err(|_| format!("bad denominator {den:?}"))?;
        match q {
            1 => Ok(Exponent::from_int(p)),
            2 => Ok(Exponent::from_twice(p)),
            _ => Err(format!("exponent {s:?} is not a half-integer")),
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(D::Error::custom)
    }
}

/// The cuspidal support of a line; `"1"` is the trivial character and the
/// only label that affects thresholds. A label carries its contragredient.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct CuspidalLabel {
    pub name: String,
    pub dual_name: String,
}

pub const TRIVIAL_LABEL: &str = "1";

impl CuspidalLabel {
    pub fn trivial() -> Self {
        CuspidalLabel {
            name: TRIVIAL_LABEL.to_string(),
            dual_name: TRIVIAL_LABEL.to_string(),
        }
    }

    pub fn named(name: &str) -> Self {
        CuspidalLabel {
            name: name.to_string(),
            dual_name: name.to_string(),
        }
    }

    pub fn with_dual(name: &str, dual: &str) -> Self {
        CuspidalLabel {
            name: name.to_string(),
            dual_name: dual.to_string(),
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.name == TRIVIAL_LABEL
    }

    pub fn dual(&self) -> Self {
        CuspidalLabel {
            name: self.dual_name.clone(),
            dual_name: self.name.clone(),
        }
    }
}

impl fmt::Display for CuspidalLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.dual_name == self.name {
            write!(f, "{}", self.name)
        } else {
            write!(f, "{}:{}", self.name, self.dual_name)
        }
    }
}

impl Serialize for CuspidalLabel {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for CuspidalLabel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        Ok(match text.split_once(':') {
            Some((name, dual)) => CuspidalLabel::with_dual(name, dual),
            None => CuspidalLabel::named(&text),
        })
    }
}

/// An interval of consecutive exponents on a cuspidal line; corresponds to
/// the essentially square-integrable summand rho|.|^x (x) S_a.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct Segment {
    pub label: CuspidalLabel,
    pub center: Exponent,
    pub length: u32,
}

impl Segment {
    pub fn new(label: CuspidalLabel, center: Exponent, length: u32) -> Self {
        assert!(length >= 1, "segment length must be positive");
        Segment {
            label,
            center,
            length,
        }
    }

    /// Trivial-label singleton at the given exponent.
    pub fn singleton(center: Exponent) -> Self {
        Segment::new(CuspidalLabel::trivial(), center, 1)
    }

    pub fn begin(&self) -> Exponent {
        Exponent(self.center.0 - (self.length as i64 - 1))
    }

    pub fn end(&self) -> Exponent {
        Exponent(self.center.0 + (self.length as i64 - 1))
    }

    /// Exponents of the segment, descending from end to begin.
    pub fn exponents(&self) -> impl Iterator<Item = Exponent> + '_ {
        (0..self.length as i64).map(|k| Exponent(self.center.0 + (self.length as i64 - 1) - 2 * k))
    }

    pub fn contragredient(&self) -> Segment {
        Segment {
            label: self.label.dual(),
            center: self.center.neg(),
            length: self.length,
        }
    }

    fn sort_key(&self) -> (String, String, i64, u32) {
        (
            self.label.name.clone(),
            self.label.dual_name.clone(),
            self.begin().twice(),
            self.length,
        )
    }
}

impl fmt::Display for Segment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        if !self.label.is_trivial() {
            parts.push(self.label.to_string());
        }
        if self.center.twice() != 0 {
            parts.push(format!("nu^{{{}}}", self.center));
        }
        if self.length != 1 {
            parts.push(format!("S_{}", self.length));
        }
        if parts.is_empty() {
            parts.push("S_1".to_string());
        }
        write!(f, "{}", parts.join(" "))
    }
}

/// A multiset of segments in canonical order; encodes an L-parameter of
/// GL_n and an orbit of the Vogan variety of its infinitesimal parameter.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Multisegment {
    segments: Vec<Segment>,
}

impl Multisegment {
    pub fn new(mut segments: Vec<Segment>) -> Self {
        segments.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
        Multisegment { segments }
    }

    pub fn empty() -> Self {
        Multisegment::default()
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    /// Total dimension: sum of segment lengths (dim rho treated as 1).
    pub fn dimension(&self) -> u64 {
        self.segments.iter().map(|s| s.length as u64).sum()
    }

    /// Multiset union.
    pub fn union(&self, other: &Multisegment) -> Multisegment {
        let mut segs = self.segments.clone();
        segs.extend(other.segments.iter().cloned());
        Multisegment::new(segs)
    }

    pub fn contragredient(&self) -> Multisegment {
        Multisegment::new(self.segments.iter().map(|s| s.contragredient()).collect())
    }

    /// Canonical text form; round-trips through the parser.
    pub fn canonical_string(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Multisegment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.segments.is_empty() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self.segments.iter().map(|s| s.to_string()).collect();
        write!(f, "{}", terms.join(" + "))
    }
}

/// The multiset of (label, exponent) pairs obtained by expanding every
/// segment; fixes the Vogan variety.
#[derive(Clone, PartialEq, Eq, Debug, Default, Serialize, Deserialize)]
pub struct InfinitesimalParameter {
    /// label -> (twice exponent -> multiplicity)
    pub support: BTreeMap<CuspidalLabel, BTreeMap<i64, usize>>,
}

impl InfinitesimalParameter {
    pub fn total_multiplicity(&self) -> usize {
        self.support
            .values()
            .flat_map(|line| line.values())
            .sum()
    }

    pub fn contragredient(&self) -> InfinitesimalParameter {
        let mut support: BTreeMap<CuspidalLabel, BTreeMap<i64, usize>> = BTreeMap::new();
        for (label, line) in &self.support {
            let entry = support.entry(label.dual()).or_default();
            for (&tw, &mult) in line {
                *entry.entry(-tw).or_insert(0) += mult;
            }
        }
        InfinitesimalParameter { support }
    }
}

/// Infinitesimal parameter of a multisegment.
pub fn infinitesimal(phi: &Multisegment) -> InfinitesimalParameter {
    let mut support: BTreeMap<CuspidalLabel, BTreeMap<i64, usize>> = BTreeMap::new();
    for seg in phi.segments() {
        let line = support.entry(seg.label.clone()).or_default();
        for e in seg.exponents() {
            *line.entry(e.twice()).or_insert(0) += 1;
        }
    }
    InfinitesimalParameter { support }
}

/// Contragredient parameter: (label, x, a) -> (dual label, -x, a).
pub fn contragredient(phi: &Multisegment) -> Multisegment {
    phi.contragredient()
}

/// Trivial-label singletons at (alpha-1)/2 - i for i = 0..alpha-1.
pub fn alpha_singletons(alpha: u32) -> Multisegment {
    let segs = (0..alpha as i64)
        .map(|i| Segment::singleton(Exponent(alpha as i64 - 1 - 2 * i)))
        .collect();
    Multisegment::new(segs)
}

/// L-parameter of the theta lift: phi^vee plus alpha character singletons.
pub fn theta_lift_param(phi: &Multisegment, alpha: u32) -> Multisegment {
    phi.contragredient().union(&alpha_singletons(alpha))
}

/// Langlands data of the theta lift of the representation with the given
/// Langlands data (same multiset formula; reordering is display-only).
pub fn theta_lift_rep(langlands_data: &Multisegment, alpha: u32) -> Multisegment {
    theta_lift_param(langlands_data, alpha)
}

/// The set of exponents of trivial-label segments of `phi_dual`.
pub fn trivial_exponents(phi_dual: &Multisegment) -> BTreeSet<Exponent> {
    let mut set = BTreeSet::new();
    for seg in phi_dual.segments() {
        if seg.label.is_trivial() {
            set.extend(seg.exponents());
        }
    }
    set
}

/// Max |x| over trivial exponents of `phi_dual` congruent to `beta` mod 1;
/// `None` when that set is empty (treated as "threshold satisfied").
pub fn m_beta(phi_dual: &Multisegment, beta: Exponent) -> Option<Exponent> {
    trivial_exponents(phi_dual)
        .into_iter()
        .filter(|x| x.same_coset(beta))
        .map(|x| x.abs())
        .max()
}

/// Threshold gating the theta-transport theorem:
/// beta = (alpha-1)/2 >= m^beta(phi^vee), with the empty set passing.
pub fn adams_threshold_ok(phi: &Multisegment, alpha: u32) -> bool {
    assert!(alpha >= 1);
    let beta = Exponent(alpha as i64 - 1);
    match m_beta(&phi.contragredient(), beta) {
        None => true,
        Some(m) => m <= beta,
    }
}

/// A rectangle rho|.|^x (x) S_a (x) S_b with |x| < 1/2; expands to b
/// segments of length a at centers x + (b-1)/2 - k.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Rectangle {
    pub label: CuspidalLabel,
    pub a: u32,
    pub b: u32,
    pub x: Exponent,
}

#[derive(Clone, PartialEq, Eq, Debug, Default, Serialize, Deserialize)]
pub struct ArthurDecomposition {
    pub rectangles: Vec<Rectangle>,
}

impl ArthurDecomposition {
    pub fn expand(&self) -> Multisegment {
        let mut segs = Vec::new();
        for r in &self.rectangles {
            for k in 0..r.b as i64 {
                let center = Exponent(r.x.twice() + (r.b as i64 - 1) - 2 * k);
                segs.push(Segment::new(r.label.clone(), center, r.a));
            }
        }
        Multisegment::new(segs)
    }
}

/// Decompose `phi` into rectangles with |x| < 1/2, or `None`.
///
/// On the exact half-integer grid, |x| < 1/2 forces x = 0, so every
/// rectangle expands to a run of centers symmetric about 0 with step 1;
/// the run containing the maximal remaining center is forced, so the
/// search is a deterministic greedy pass per (label, length) group.
pub fn is_arthur_type(phi: &Multisegment) -> Option<ArthurDecomposition> {
    let mut groups: BTreeMap<(CuspidalLabel, u32), Vec<i64>> = BTreeMap::new();
    for seg in phi.segments() {
        groups
            .entry((seg.label.clone(), seg.length))
            .or_default()
            .push(seg.center.twice());
    }
    let mut rectangles = Vec::new();
    for ((label, a), mut centers) in groups {
        centers.sort_unstable();
        while let Some(&top) = centers.last() {
            if top < 0 {
                return None;
            }
            // The rectangle containing the maximal center `top` must expand
            // to the symmetric run top, top-1, ..., -top.
            let b = top + 1; // run length in twice-units steps of 2
            let mut want = top;
            while want >= -top {
                match centers.binary_search(&want) {
                    Ok(idx) => {
                        centers.remove(idx);
                    }
                    Err(_) => return None,
                }
                want -= 2;
            }
            rectangles.push(Rectangle {
                label: label.clone(),
                a,
                b: b as u32,
                x: Exponent(0),
            });
        }
    }
    let dec = ArthurDecomposition { rectangles };
    debug_assert_eq!(dec.expand(), *phi);
    Some(dec)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seg(center_twice: i64, len: u32) -> Segment {
        Segment::new(CuspidalLabel::trivial(), Exponent::from_twice(center_twice), len)
    }

    #[test]
    fn exponent_display_and_parse() {
        for (tw, text) in [(3, "3/2"), (-1, "-1/2"), (4, "2"), (0, "0")] {
            let e = Exponent::from_twice(tw);
            assert_eq!(e.to_string(), text);
            assert_eq!(text.parse::<Exponent>().unwrap(), e);
        }
        assert!("1/3".parse::<Exponent>().is_err());
        assert_eq!("4/2".parse::<Exponent>().unwrap(), Exponent::from_int(2));
    }

    #[test]
    fn segment_endpoints() {
        let s = seg(0, 4);
        assert_eq!(s.begin(), Exponent::from_twice(-3));
        assert_eq!(s.end(), Exponent::from_twice(3));
        let exps: Vec<i64> = s.exponents().map(|e| e.twice()).collect();
        assert_eq!(exps, vec![3, 1, -1, -3]);
    }

    #[test]
    fn infinitesimal_of_s4_matches_four_singletons() {
        let s4 = Multisegment::new(vec![seg(0, 4)]);
        let singles = Multisegment::new(vec![seg(3, 1), seg(1, 1), seg(-1, 1), seg(-3, 1)]);
        assert_eq!(infinitesimal(&s4), infinitesimal(&singles));
    }

    #[test]
    fn infinitesimal_mixed_example() {
        // |.|^3 + |.|^-3 + S_1 + S_3 + S_5 at center 0.
        let phi = Multisegment::new(vec![seg(6, 1), seg(-6, 1), seg(0, 1), seg(0, 3), seg(0, 5)]);
        let inf = infinitesimal(&phi);
        let line = &inf.support[&CuspidalLabel::trivial()];
        let got: Vec<(i64, usize)> = line.iter().map(|(&k, &v)| (k, v)).collect();
        assert_eq!(
            got,
            vec![(-6, 1), (-4, 1), (-2, 2), (0, 3), (2, 2), (4, 1), (6, 1)]
        );
    }

    #[test]
    fn contragredient_is_involution() {
        let phi = Multisegment::new(vec![
            Segment::new(CuspidalLabel::with_dual("rho", "rho'"), Exponent::from_twice(1), 2),
            seg(-3, 4),
        ]);
        assert_eq!(contragredient(&contragredient(&phi)), phi);
        let single = Multisegment::new(vec![seg(1, 2)]);
        assert_eq!(
            contragredient(&single),
            Multisegment::new(vec![seg(-1, 2)])
        );
    }

    #[test]
    fn theta_lift_works_example() {
        // phi = |.|^{1/2} + |.|^{-1/2}, alpha = 2 -> 2 phi.
        let phi = Multisegment::new(vec![seg(1, 1), seg(-1, 1)]);
        let lifted = theta_lift_param(&phi, 2);
        assert_eq!(lifted, phi.union(&phi));
        // alpha = 0 is the contragredient.
        assert_eq!(theta_lift_param(&phi, 0), contragredient(&phi));
        // fails-3 example: |.|^{3/2} + |.|^{-3/2}, alpha = 2.
        let phi2 = Multisegment::new(vec![seg(3, 1), seg(-3, 1)]);
        let lifted2 = theta_lift_param(&phi2, 2);
        assert_eq!(
            lifted2,
            Multisegment::new(vec![seg(3, 1), seg(1, 1), seg(-1, 1), seg(-3, 1)])
        );
    }

    #[test]
    fn trivial_exponent_thresholds() {
        let works = Multisegment::new(vec![seg(1, 1), seg(-1, 1)]);
        assert_eq!(
            m_beta(&contragredient(&works), Exponent::from_twice(1)),
            Some(Exponent::from_twice(1))
        );
        assert!(adams_threshold_ok(&works, 2));

        let fails = Multisegment::new(vec![seg(3, 1), seg(-3, 1)]);
        assert_eq!(
            m_beta(&contragredient(&fails), Exponent::from_twice(1)),
            Some(Exponent::from_twice(3))
        );
        assert!(!adams_threshold_ok(&fails, 2));

        let rho = Multisegment::new(vec![Segment::new(
            CuspidalLabel::named("rho"),
            Exponent::from_twice(0),
            2,
        )]);
        assert_eq!(m_beta(&rho, Exponent::from_twice(0)), None);
        assert!(adams_threshold_ok(&rho, 1));
    }

    #[test]
    fn arthur_detection() {
        // alpha singletons form a single rectangle (a=1, b=alpha, x=0).
        for alpha in 1..=8u32 {
            let dec = is_arthur_type(&alpha_singletons(alpha)).unwrap();
            assert_eq!(dec.rectangles.len(), 1);
            assert_eq!(dec.rectangles[0].a, 1);
            assert_eq!(dec.rectangles[0].b, alpha);
        }
        // Singleton at 3 admits no rectangle with |x| < 1/2.
        assert!(is_arthur_type(&Multisegment::new(vec![seg(6, 1)])).is_none());
        // Singletons at +-3/2, +-1/2 form (a=1, b=4, x=0).
        let m = Multisegment::new(vec![seg(3, 1), seg(1, 1), seg(-1, 1), seg(-3, 1)]);
        let dec = is_arthur_type(&m).unwrap();
        assert_eq!(dec.rectangles.len(), 1);
        assert_eq!(dec.rectangles[0].b, 4);
        assert_eq!(dec.expand(), m);
    }

    #[test]
    fn threshold_monotone_in_alpha() {
        let phi = Multisegment::new(vec![seg(3, 1), seg(-3, 1)]);
        for alpha in 1..=8u32 {
            if adams_threshold_ok(&phi, alpha) {
                assert!(adams_threshold_ok(&phi, alpha + 2));
            }
        }
    }
}
