//! The Moeglin-Waldspurger algorithm for the Zelevinsky/Pyatetskii dual
//! multisegment, with an audit trace and the dual-sum identity check.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::param::{
    alpha_singletons, theta_lift_param, CuspidalLabel, Exponent, Multisegment, Segment,
};

/// One extraction step: the produced dual segment and the segments whose
/// ends were consumed, in chaining order.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DualStep {
    pub produced: Segment,
    pub chosen: Vec<Segment>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DualResult {
    pub dual: Multisegment,
    pub trace: Vec<DualStep>,
}

/// Intervals as (begin, end) in twice-units on a single line.
fn line_dual(label: &CuspidalLabel, mut items: Vec<(i64, i64)>, trace: &mut Vec<DualStep>) -> Vec<Segment> {
    let mut out = Vec::new();
    let as_segment = |b: i64, e: i64| {
        Segment::new(
            label.clone(),
            Exponent::from_twice((b + e) / 2),
            ((e - b) / 2 + 1) as u32,
        )
    };
    while !items.is_empty() {
        // Maximal end, then maximal begin among those.
        let mut idx = 0;
        for (i, &(b, e)) in items.iter().enumerate() {
            let (bb, be) = items[idx];
            if (e, b) > (be, bb) {
                idx = i;
            }
        }
        let mut chosen_idx = vec![idx];
        let (mut cur_b, top_e) = items[idx];
        let mut bottom_e = top_e;
        loop {
            // A segment ending one lower with strictly smaller begin,
            // maximal begin among candidates.
            let mut next: Option<usize> = None;
            for (i, &(b, e)) in items.iter().enumerate() {
                if e == bottom_e - 2 && b < cur_b {
                    if next.map_or(true, |j| b > items[j].0) {
                        next = Some(i);
                    }
                }
            }
            match next {
                Some(i) => {
                    chosen_idx.push(i);
                    cur_b = items[i].0;
                    bottom_e -= 2;
                }
                None => break,
            }
        }
        let produced = as_segment(bottom_e, top_e);
        let chosen: Vec<Segment> = chosen_idx.iter().map(|&i| as_segment(items[i].0, items[i].1)).collect();
        trace.push(DualStep {
            produced: produced.clone(),
            chosen,
        });
        out.push(produced);
        // Truncate every chosen segment by its end; drop emptied ones.
        chosen_idx.sort_unstable();
        for &i in chosen_idx.iter().rev() {
            items[i].1 -= 2;
            if items[i].1 < items[i].0 {
                items.remove(i);
            }
        }
    }
    out
}

/// Dual multisegment via the Moeglin-Waldspurger algorithm. Lines with
/// distinct labels or distinct exponent-cosets are processed independently.
pub fn zelevinsky_dual(m: &Multisegment) -> DualResult {
    let mut lines: BTreeMap<(CuspidalLabel, i64), Vec<(i64, i64)>> = BTreeMap::new();
    for seg in m.segments() {
        let key = (seg.label.clone(), seg.begin().twice().rem_euclid(2));
        lines
            .entry(key)
            .or_default()
            .push((seg.begin().twice(), seg.end().twice()));
    }
    let mut trace = Vec::new();
    let mut segs = Vec::new();
    for ((label, _), items) in lines {
        segs.extend(line_dual(&label, items, &mut trace));
    }
    DualResult {
        dual: Multisegment::new(segs),
        trace,
    }
}

/// Verdict and both sides of the identity dual(phi_alpha) =
/// dual(phi^vee) + dual(phi^alpha); expected to fail exactly when the
/// transport threshold fails.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DualSumIdentity {
    pub holds: bool,
    pub lhs: Multisegment,
    pub rhs: Multisegment,
}

pub fn check_dual_sum_identity(phi: &Multisegment, alpha: u32) -> DualSumIdentity {
    let lhs = zelevinsky_dual(&theta_lift_param(phi, alpha)).dual;
    let rhs = zelevinsky_dual(&phi.contragredient())
        .dual
        .union(&zelevinsky_dual(&alpha_singletons(alpha)).dual);
    DualSumIdentity {
        holds: lhs == rhs,
        lhs,
        rhs,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::param::Exponent;

    fn seg(center_twice: i64, len: u32) -> Segment {
        Segment::new(
            CuspidalLabel::trivial(),
            Exponent::from_twice(center_twice),
            len,
        )
    }

    fn ms(segs: Vec<Segment>) -> Multisegment {
        Multisegment::new(segs)
    }

    #[test]
    fn four_singletons_dualize_to_s4() {
        let m = ms(vec![seg(3, 1), seg(1, 1), seg(-1, 1), seg(-3, 1)]);
        assert_eq!(zelevinsky_dual(&m).dual, ms(vec![seg(0, 4)]));
        assert_eq!(zelevinsky_dual(&ms(vec![seg(0, 4)])).dual, m);
    }

    #[test]
    fn alpha_singletons_dualize_to_s_alpha() {
        for alpha in 1..=8 {
            let dual = zelevinsky_dual(&alpha_singletons(alpha)).dual;
            assert_eq!(dual, ms(vec![seg(0, alpha)]));
        }
    }

    #[test]
    fn two_segment_example_and_involution() {
        // {[0,1],[0]} -> {[1],[0],[0]} (integer exponents).
        let m = ms(vec![
            Segment::new(CuspidalLabel::trivial(), Exponent::from_twice(1), 2),
            Segment::new(CuspidalLabel::trivial(), Exponent::from_int(0), 1),
        ]);
        let expected = ms(vec![
            Segment::new(CuspidalLabel::trivial(), Exponent::from_int(1), 1),
            Segment::new(CuspidalLabel::trivial(), Exponent::from_int(0), 1),
            Segment::new(CuspidalLabel::trivial(), Exponent::from_int(0), 1),
        ]);
        let dual = zelevinsky_dual(&m).dual;
        assert_eq!(dual, expected);
        assert_eq!(zelevinsky_dual(&dual).dual, m);
    }

    #[test]
    fn preserves_support_and_commutes_with_contragredient() {
        let m = ms(vec![seg(1, 2), seg(0, 3), seg(-1, 1), seg(4, 2)]);
        let dual = zelevinsky_dual(&m).dual;
        assert_eq!(crate::param::infinitesimal(&dual), crate::param::infinitesimal(&m));
        assert_eq!(dual.dimension(), m.dimension());
        assert_eq!(
            zelevinsky_dual(&m.contragredient()).dual,
            dual.contragredient()
        );
    }

    #[test]
    fn dual_sum_identity_matches_threshold() {
        let works = ms(vec![seg(1, 1), seg(-1, 1)]);
        assert!(check_dual_sum_identity(&works, 2).holds);

        let fails = ms(vec![seg(3, 1), seg(-3, 1)]);
        let verdict = check_dual_sum_identity(&fails, 2);
        assert!(!verdict.holds);
        // Witness: lhs collapses to S_4.
        assert_eq!(verdict.lhs, ms(vec![seg(0, 4)]));
        assert_eq!(verdict.rhs, ms(vec![seg(0, 2), seg(3, 1), seg(-3, 1)]));
    }

    #[test]
    fn distinct_lines_are_independent() {
        let rho = CuspidalLabel::named("rho");
        let m = Multisegment::new(vec![
            Segment::new(rho.clone(), Exponent::from_twice(1), 2),
            seg(0, 2), // half-integer coset
            seg(0, 1), // integer coset
        ]);
        let dual = zelevinsky_dual(&m).dual;
        // Each line holds a single segment: a lone length-2 segment
        // dualizes to two singletons, a singleton is self-dual.
        let expected = Multisegment::new(vec![
            Segment::new(rho.clone(), Exponent::from_twice(2), 1),
            Segment::new(rho, Exponent::from_twice(0), 1),
            seg(1, 1),
            seg(-1, 1),
            seg(0, 1),
        ]);
        assert_eq!(dual, expected);
    }
}
