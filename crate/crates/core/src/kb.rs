//! A persistent, append-only knowledge base of ABV-packet membership for
//! GL(n). Facts are seeded by unconditional packet computations (open
//! orbits, Arthur-type parameters, the Kashiwara–Saito singularity) and
//! extended by contragredient symmetry and theta transport; every stored
//! fact carries provenance and can be replayed from the recorded actions.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::certify::restrict_to_chain;
use crate::geometry::{
    closure_leq, triangle_from_multisegment, varieties_of, ChainVariety, GeomError, RankTriangle,
};
use crate::param::{
    adams_threshold_ok, infinitesimal, is_arthur_type, theta_lift_param, theta_lift_rep,
    Multisegment,
};

pub const JOURNAL_FORMAT: &str = "abv-kb";
pub const JOURNAL_VERSION: u32 = 1;

/// Embedded two-member packet witness: the Kashiwara–Saito parameter in
/// GL(16) together with the second orbit carried by its packet.
const KS_DATA: &str = include_str!("../data/kashiwara_saito_gl16.json");

#[derive(Debug, Error)]
pub enum KbError {
    #[error("orbit of {0} is not open in its variety")]
    NotOpenOrbit(String),
    #[error("{0} is not of Arthur type")]
    NotArthurType(String),
    #[error("no eta vector stored for {0}")]
    NoEta(String),
    #[error("conflicting derivation: {0}")]
    Conflict(String),
    #[error("malformed journal: {0}")]
    BadJournal(String),
    #[error("replay mismatch: {0}")]
    ReplayMismatch(String),
    #[error("bad packet data: {0}")]
    BadData(String),
    #[error(transparent)]
    Geometry(#[from] GeomError),
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    In,
    Out,
    Unknown,
}

/// A derivation command; replaying the recorded actions in order rebuilds
/// the entire fact base.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Action {
    SeedOpenOrbit { phi: Multisegment },
    SeedArthur { phi: Multisegment },
    SeedKashiwaraSaito,
    DeriveContragredient { phi: Multisegment },
    DeriveThetaTransport { phi: Multisegment, alpha: u32 },
}

/// How an eta vector (or a fact derived from it) came to be known.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum Provenance {
    OpenOrbitSeed,
    ArthurSeed,
    KashiwaraSaitoSeed,
    Contragredient { source: Multisegment },
    ThetaTransport { source: Multisegment, alpha: u32 },
}

/// Integer coefficients of a virtual-representation functional attached to
/// a parameter, indexed by the orbits where it is nonzero. `exact` marks
/// vectors known on the whole packet (seeds); transported vectors only
/// certify their listed members.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct EtaVector {
    pub phi: Multisegment,
    pub entries: Vec<(Multisegment, i64)>,
    pub exact: bool,
    pub provenance: Provenance,
}

impl EtaVector {
    pub fn coefficient(&self, pi: &Multisegment) -> i64 {
        self.entries
            .iter()
            .find(|(c, _)| c == pi)
            .map_or(0, |&(_, v)| v)
    }
}

/// One membership fact: the representation with Langlands data `pi`
/// belongs (or not) to the packet of `phi`, by the recorded rule.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct PacketFact {
    pub phi: Multisegment,
    pub pi: Multisegment,
    pub status: Status,
    pub rule: Provenance,
    pub coefficient: i64,
    pub inputs: Vec<String>,
}

/// An explicit record that a transport was requested but declined because
/// the threshold hypothesis fails.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Refusal {
    pub phi: Multisegment,
    pub alpha: u32,
    pub reason: String,
}

/// Rule tag attached to an on-demand membership answer.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QueryRule {
    LambdaMismatch,
    LPacket,
    ClosureFailure,
    StoredCoefficient,
    ExactPacketExhausted,
    ArthurSingleton,
    NoInformation,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QueryAnswer {
    pub status: Status,
    pub rule: QueryRule,
    pub trace: Vec<String>,
}

#[derive(Clone, Default, Debug)]
pub struct KnowledgeBase {
    actions: Vec<Action>,
    etas: BTreeMap<String, EtaVector>,
    facts: Vec<PacketFact>,
    refusals: Vec<Refusal>,
}

/// Per-chain rank triangles of a multisegment over its own variety.
fn chain_triangles(m: &Multisegment) -> Result<Vec<(ChainVariety, RankTriangle)>, GeomError> {
    varieties_of(&infinitesimal(m))
        .into_iter()
        .map(|chain| {
            let tri = triangle_from_multisegment(&chain, &chain.dims, &restrict_to_chain(m, &chain))?;
            Ok((chain, tri))
        })
        .collect()
}

/// Whether the orbit of `pi` lies above the orbit of `phi` (same variety;
/// the orbit of `phi` is contained in the closure of the orbit of `pi` on
/// every chain). Callers must have checked the varieties agree.
fn closure_up(phi: &Multisegment, pi: &Multisegment) -> Result<bool, GeomError> {
    let a = chain_triangles(phi)?;
    let b = chain_triangles(pi)?;
    for ((_, ta), (_, tb)) in a.iter().zip(&b) {
        if !closure_leq(ta, tb)? {
            return Ok(false);
        }
    }
    Ok(true)
}

fn is_open_orbit(phi: &Multisegment) -> Result<bool, GeomError> {
    Ok(chain_triangles(phi)?.iter().all(|(_, t)| t.is_open()))
}

#[derive(Deserialize)]
struct KsFile {
    phi: Vec<crate::param::Segment>,
    second_member: Vec<crate::param::Segment>,
}

/// The embedded Kashiwara–Saito packet: (parameter, second member).
pub fn kashiwara_saito_packet() -> Result<(Multisegment, Multisegment), KbError> {
    let file: KsFile =
        serde_json::from_str(KS_DATA).map_err(|e| KbError::BadData(e.to_string()))?;
    let phi = Multisegment::new(file.phi);
    let second = Multisegment::new(file.second_member);
    if phi.contragredient() != phi || second.contragredient() != second {
        return Err(KbError::BadData("packet members must be self-dual".into()));
    }
    if infinitesimal(&phi) != infinitesimal(&second) {
        return Err(KbError::BadData("members live on different varieties".into()));
    }
    if phi == second || !closure_up(&phi, &second)? {
        return Err(KbError::BadData(
            "second member must lie strictly above the parameter orbit".into(),
        ));
    }
    Ok((phi, second))
}

impl KnowledgeBase {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn facts(&self) -> &[PacketFact] {
        &self.facts
    }

    pub fn refusals(&self) -> &[Refusal] {
        &self.refusals
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    pub fn eta(&self, phi: &Multisegment) -> Option<&EtaVector> {
        self.etas.get(&phi.canonical_string())
    }

    /// Known members (orbit, coefficient) of the packet of `phi`, plus
    /// whether the list is exhaustive.
    pub fn packet_members(&self, phi: &Multisegment) -> Option<(Vec<(Multisegment, i64)>, bool)> {
        self.eta(phi).map(|e| (e.entries.clone(), e.exact))
    }

    fn check_eta(&self, eta: &EtaVector) -> Result<(), KbError> {
        let lambda = infinitesimal(&eta.phi);
        for (orbit, v) in &eta.entries {
            if *v == 0 {
                return Err(KbError::Conflict("zero coefficient stored".into()));
            }
            if infinitesimal(orbit) != lambda {
                return Err(KbError::Conflict(format!(
                    "orbit {orbit} lies on a different variety than {}",
                    eta.phi
                )));
            }
            if !closure_up(&eta.phi, orbit)? {
                return Err(KbError::Conflict(format!(
                    "orbit {orbit} is not above the parameter orbit of {}",
                    eta.phi
                )));
            }
        }
        Ok(())
    }

    /// Store an eta vector (validated) and emit one membership fact per
    /// nonzero entry. A bit-identical vector already present is a no-op;
    /// a different vector for the same parameter is a conflict.
    fn insert_eta(&mut self, eta: EtaVector, inputs: Vec<String>) -> Result<bool, KbError> {
        self.check_eta(&eta)?;
        let key = eta.phi.canonical_string();
        if let Some(existing) = self.etas.get(&key) {
            // Re-deriving identical content (e.g. mirroring a self-dual
            // parameter) is a no-op; the original provenance stands.
            if existing.entries == eta.entries && existing.exact == eta.exact {
                return Ok(false);
            }
            return Err(KbError::Conflict(format!(
                "a different eta vector is already stored for {}",
                eta.phi
            )));
        }
        for (orbit, v) in &eta.entries {
            self.facts.push(PacketFact {
                phi: eta.phi.clone(),
                pi: orbit.clone(),
                status: Status::In,
                rule: eta.provenance.clone(),
                coefficient: *v,
                inputs: inputs.clone(),
            });
        }
        self.etas.insert(key, eta);
        Ok(true)
    }

    fn apply(&mut self, action: Action) -> Result<(), KbError> {
        let recorded = match &action {
            Action::SeedOpenOrbit { phi } => {
                if !is_open_orbit(phi)? {
                    return Err(KbError::NotOpenOrbit(phi.to_string()));
                }
                self.insert_eta(
                    EtaVector {
                        phi: phi.clone(),
                        entries: vec![(phi.clone(), 1)],
                        exact: true,
                        provenance: Provenance::OpenOrbitSeed,
                    },
                    vec![],
                )?
            }
            Action::SeedArthur { phi } => {
                if is_arthur_type(phi).is_none() {
                    return Err(KbError::NotArthurType(phi.to_string()));
                }
                self.insert_eta(
                    EtaVector {
                        phi: phi.clone(),
                        entries: vec![(phi.clone(), 1)],
                        exact: true,
                        provenance: Provenance::ArthurSeed,
                    },
                    vec![],
                )?
            }
            Action::SeedKashiwaraSaito => {
                let (phi, second) = kashiwara_saito_packet()?;
                let mut entries = vec![(phi.clone(), 1), (second, 1)];
                entries.sort_by(|a, b| a.0.canonical_string().cmp(&b.0.canonical_string()));
                self.insert_eta(
                    EtaVector {
                        phi,
                        entries,
                        exact: true,
                        provenance: Provenance::KashiwaraSaitoSeed,
                    },
                    vec![],
                )?
            }
            Action::DeriveContragredient { phi } => {
                let source = self
                    .eta(phi)
                    .ok_or_else(|| KbError::NoEta(phi.to_string()))?
                    .clone();
                let mut entries: Vec<(Multisegment, i64)> = source
                    .entries
                    .iter()
                    .map(|(c, v)| (c.contragredient(), *v))
                    .collect();
                entries.sort_by(|a, b| a.0.canonical_string().cmp(&b.0.canonical_string()));
                self.insert_eta(
                    EtaVector {
                        phi: phi.contragredient(),
                        entries,
                        exact: source.exact,
                        provenance: Provenance::Contragredient { source: phi.clone() },
                    },
                    vec![phi.canonical_string()],
                )?
            }
            Action::DeriveThetaTransport { phi, alpha } => {
                let alpha = *alpha;
                let source = self
                    .eta(phi)
                    .ok_or_else(|| KbError::NoEta(phi.to_string()))?
                    .clone();
                if !adams_threshold_ok(phi, alpha) {
                    self.refusals.push(Refusal {
                        phi: phi.clone(),
                        alpha,
                        reason: format!(
                            "transport threshold fails for alpha = {alpha}: a trivial-label \
                             exponent of the contragredient on the relevant coset exceeds \
                             ({alpha} - 1)/2"
                        ),
                    });
                    self.actions.push(action);
                    return Ok(());
                }
                let lifted = theta_lift_param(phi, alpha);
                let mut entries: Vec<(Multisegment, i64)> = source
                    .entries
                    .iter()
                    .map(|(c, v)| (theta_lift_rep(c, alpha), *v))
                    .collect();
                entries.sort_by(|a, b| a.0.canonical_string().cmp(&b.0.canonical_string()));
                for w in entries.windows(2) {
                    if w[0].0 == w[1].0 {
                        return Err(KbError::Conflict(
                            "theta transport produced a repeated orbit".into(),
                        ));
                    }
                }
                self.insert_eta(
                    EtaVector {
                        phi: lifted,
                        entries,
                        exact: false,
                        provenance: Provenance::ThetaTransport {
                            source: phi.clone(),
                            alpha,
                        },
                    },
                    vec![phi.canonical_string()],
                )?
            }
        };
        if recorded {
            self.actions.push(action);
        }
        Ok(())
    }

    /// Seed the singleton packet of a parameter whose orbit is open.
    pub fn seed_open_orbit(&mut self, phi: &Multisegment) -> Result<(), KbError> {
        self.apply(Action::SeedOpenOrbit { phi: phi.clone() })
    }

    /// Seed the singleton packet of an Arthur-type parameter.
    pub fn seed_arthur(&mut self, phi: &Multisegment) -> Result<(), KbError> {
        self.apply(Action::SeedArthur { phi: phi.clone() })
    }

    /// Seed the embedded two-member Kashiwara–Saito packet in GL(16).
    pub fn seed_kashiwara_saito(&mut self) -> Result<Multisegment, KbError> {
        let (phi, _) = kashiwara_saito_packet()?;
        self.apply(Action::SeedKashiwaraSaito)?;
        Ok(phi)
    }

    /// Mirror a stored eta vector to the contragredient parameter.
    pub fn derive_contragredient(&mut self, phi: &Multisegment) -> Result<(), KbError> {
        self.apply(Action::DeriveContragredient { phi: phi.clone() })
    }

    /// Transport a stored eta vector along the theta lift of degree
    /// `alpha`. If the threshold hypothesis fails, a refusal record is
    /// appended and no facts are produced.
    pub fn derive_theta_transport(
        &mut self,
        phi: &Multisegment,
        alpha: u32,
    ) -> Result<(), KbError> {
        self.apply(Action::DeriveThetaTransport {
            phi: phi.clone(),
            alpha,
        })
    }

    /// The derivation chain behind the eta vector of `phi`, seed first.
    fn provenance_trace(&self, phi: &Multisegment, out: &mut Vec<String>) {
        if let Some(eta) = self.eta(phi) {
            match &eta.provenance {
                Provenance::OpenOrbitSeed => out.push(format!("{phi}: open-orbit seed")),
                Provenance::ArthurSeed => out.push(format!("{phi}: Arthur-type seed")),
                Provenance::KashiwaraSaitoSeed => {
                    out.push(format!("{phi}: Kashiwara-Saito seed"))
                }
                Provenance::Contragredient { source } => {
                    self.provenance_trace(source, out);
                    out.push(format!("{phi}: contragredient of {source}"));
                }
                Provenance::ThetaTransport { source, alpha } => {
                    self.provenance_trace(source, out);
                    out.push(format!("{phi}: theta transport of {source} at alpha = {alpha}"));
                }
            }
        }
    }

    /// Answer a membership question, replaying the derivation behind any
    /// stored evidence. The answer is Unknown whenever the base cannot
    /// certify either direction; it never guesses.
    pub fn query_membership(
        &self,
        phi: &Multisegment,
        pi: &Multisegment,
    ) -> Result<QueryAnswer, KbError> {
        if infinitesimal(phi) != infinitesimal(pi) {
            return Ok(QueryAnswer {
                status: Status::Out,
                rule: QueryRule::LambdaMismatch,
                trace: vec!["infinitesimal parameters differ".into()],
            });
        }
        if phi == pi {
            return Ok(QueryAnswer {
                status: Status::In,
                rule: QueryRule::LPacket,
                trace: vec!["the parameter's own representation always belongs".into()],
            });
        }
        if !closure_up(phi, pi)? {
            return Ok(QueryAnswer {
                status: Status::Out,
                rule: QueryRule::ClosureFailure,
                trace: vec![
                    "the parameter orbit is not in the closure of the candidate orbit".into(),
                ],
            });
        }
        // Stored evidence, directly or through the contragredient mirror.
        let direct = self.eta(phi).map(|e| (e.coefficient(pi), e.exact, false));
        let mirrored = if direct.is_none() {
            let pv = phi.contragredient();
            self.eta(&pv)
                .map(|e| (e.coefficient(&pi.contragredient()), e.exact, true))
        } else {
            None
        };
        if let Some((coeff, exact, via_mirror)) = direct.or(mirrored) {
            let mut trace = Vec::new();
            if via_mirror {
                self.provenance_trace(&phi.contragredient(), &mut trace);
                trace.push("read through the contragredient mirror".into());
            } else {
                self.provenance_trace(phi, &mut trace);
            }
            if coeff != 0 {
                trace.push(format!("stored coefficient {coeff} at the candidate orbit"));
                return Ok(QueryAnswer {
                    status: Status::In,
                    rule: QueryRule::StoredCoefficient,
                    trace,
                });
            }
            if exact {
                trace.push("exhaustive packet does not list the candidate".into());
                return Ok(QueryAnswer {
                    status: Status::Out,
                    rule: QueryRule::ExactPacketExhausted,
                    trace,
                });
            }
            trace.push("transported packet only certifies its listed members".into());
            return Ok(QueryAnswer {
                status: Status::Unknown,
                rule: QueryRule::NoInformation,
                trace,
            });
        }
        // Unseeded but unconditionally singleton packets.
        if is_arthur_type(phi).is_some() {
            return Ok(QueryAnswer {
                status: Status::Out,
                rule: QueryRule::ArthurSingleton,
                trace: vec!["Arthur-type packets contain only the parameter itself".into()],
            });
        }
        Ok(QueryAnswer {
            status: Status::Unknown,
            rule: QueryRule::NoInformation,
            trace: vec!["no stored evidence for this parameter".into()],
        })
    }

    /// Rebuild the base from its recorded actions and confirm every
    /// stored eta vector, fact, and refusal is reproduced bit-for-bit.
    /// Returns the number of replayed facts.
    pub fn replay_verify(&self) -> Result<usize, KbError> {
        let mut fresh = KnowledgeBase::new();
        for action in &self.actions {
            fresh.apply(action.clone())?;
        }
        if fresh.etas != self.etas {
            return Err(KbError::ReplayMismatch("eta vectors differ".into()));
        }
        if fresh.facts != self.facts {
            return Err(KbError::ReplayMismatch("facts differ".into()));
        }
        if fresh.refusals != self.refusals {
            return Err(KbError::ReplayMismatch("refusals differ".into()));
        }
        Ok(self.facts.len())
    }

    /// Write the journal: a version header followed by one JSON record
    /// per line (actions, then derived state for auditability).
    pub fn save<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let header = serde_json::json!({ "format": JOURNAL_FORMAT, "version": JOURNAL_VERSION });
        writeln!(w, "{header}")?;
        for a in &self.actions {
            writeln!(w, "{}", serde_json::to_string(&Record::Action { action: a.clone() })?)?;
        }
        for e in self.etas.values() {
            writeln!(w, "{}", serde_json::to_string(&Record::Eta { eta: e.clone() })?)?;
        }
        for f in &self.facts {
            writeln!(w, "{}", serde_json::to_string(&Record::Fact { fact: f.clone() })?)?;
        }
        for r in &self.refusals {
            writeln!(
                w,
                "{}",
                serde_json::to_string(&Record::Refusal { refusal: r.clone() })?
            )?;
        }
        Ok(())
    }

    /// Read a journal, replay its actions, and verify the recorded state
    /// matches the replayed state.
    pub fn load<R: BufRead>(r: R) -> Result<Self, KbError> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| KbError::BadJournal("empty journal".into()))?
            .map_err(|e| KbError::BadJournal(e.to_string()))?;
        let header: serde_json::Value =
            serde_json::from_str(&header).map_err(|e| KbError::BadJournal(e.to_string()))?;
        if header["format"] != JOURNAL_FORMAT || header["version"] != JOURNAL_VERSION {
            return Err(KbError::BadJournal(format!(
                "unsupported journal header {header}"
            )));
        }
        let mut kb = KnowledgeBase::new();
        let mut recorded_etas: Vec<EtaVector> = Vec::new();
        let mut recorded_facts: Vec<PacketFact> = Vec::new();
        let mut recorded_refusals: Vec<Refusal> = Vec::new();
        for line in lines {
            let line = line.map_err(|e| KbError::BadJournal(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let record: Record =
                serde_json::from_str(&line).map_err(|e| KbError::BadJournal(e.to_string()))?;
            match record {
                Record::Action { action } => kb.apply(action)?,
                Record::Eta { eta } => recorded_etas.push(eta),
                Record::Fact { fact } => recorded_facts.push(fact),
                Record::Refusal { refusal } => recorded_refusals.push(refusal),
            }
        }
        let replayed: Vec<EtaVector> = kb.etas.values().cloned().collect();
        if replayed != recorded_etas {
            return Err(KbError::ReplayMismatch(
                "recorded eta vectors do not replay".into(),
            ));
        }
        if kb.facts != recorded_facts {
            return Err(KbError::ReplayMismatch("recorded facts do not replay".into()));
        }
        if kb.refusals != recorded_refusals {
            return Err(KbError::ReplayMismatch(
                "recorded refusals do not replay".into(),
            ));
        }
        Ok(kb)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
enum Record {
    Action { action: Action },
    Eta { eta: EtaVector },
    Fact { fact: PacketFact },
    Refusal { refusal: Refusal },
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_parameter;

    #[test]
    fn embedded_packet_is_well_formed() {
        let (phi, second) = kashiwara_saito_packet().unwrap();
        assert_eq!(phi.dimension(), 16);
        assert_eq!(second.dimension(), 16);
        assert_eq!(phi.contragredient(), phi);
        assert_eq!(second.contragredient(), second);
        assert!(closure_up(&phi, &second).unwrap());
        assert!(!closure_up(&second, &phi).unwrap());
    }

    #[test]
    fn embedded_parameter_threshold_pattern() {
        let (phi, _) = kashiwara_saito_packet().unwrap();
        for alpha in 1..=9 {
            let expect = alpha == 2 || alpha == 4 || alpha >= 5;
            assert_eq!(adams_threshold_ok(&phi, alpha), expect, "alpha {alpha}");
        }
    }

    #[test]
    fn transport_produces_two_member_packets() {
        let mut kb = KnowledgeBase::new();
        let phi = kb.seed_kashiwara_saito().unwrap();
        assert_eq!(kb.facts().len(), 2);
        for alpha in [2, 4, 5, 6] {
            kb.derive_theta_transport(&phi, alpha).unwrap();
            let lifted = theta_lift_param(&phi, alpha);
            let (members, exact) = kb.packet_members(&lifted).unwrap();
            assert_eq!(members.len(), 2, "alpha {alpha}");
            assert!(!exact);
            assert!(members.iter().all(|(_, v)| v.abs() == 1));
            assert_ne!(members[0].0, members[1].0);
        }
        // 2 seed facts + 2 per transported degree.
        assert_eq!(kb.facts().len(), 2 + 4 * 2);
        assert!(kb.refusals().is_empty());
    }

    #[test]
    fn transport_refuses_below_threshold() {
        let mut kb = KnowledgeBase::new();
        let phi = kb.seed_kashiwara_saito().unwrap();
        kb.derive_theta_transport(&phi, 3).unwrap();
        assert_eq!(kb.refusals().len(), 1);
        assert_eq!(kb.refusals()[0].alpha, 3);
        assert_eq!(kb.facts().len(), 2);
        assert!(kb.eta(&theta_lift_param(&phi, 3)).is_none());
        assert_eq!(kb.replay_verify().unwrap(), 2);
    }

    #[test]
    fn contragredient_is_idempotent_on_self_dual() {
        let mut kb = KnowledgeBase::new();
        let phi = kb.seed_kashiwara_saito().unwrap();
        let before = kb.facts().len();
        kb.derive_contragredient(&phi).unwrap();
        assert_eq!(kb.facts().len(), before);
        assert_eq!(kb.actions().len(), 1);
    }

    #[test]
    fn contragredient_mirrors_a_seeded_packet() {
        let mut kb = KnowledgeBase::new();
        let phi = parse_parameter("nu^{1/2} S_2").unwrap();
        kb.seed_open_orbit(&phi).unwrap();
        kb.derive_contragredient(&phi).unwrap();
        let mirror = phi.contragredient();
        assert_ne!(mirror, phi);
        let (members, exact) = kb.packet_members(&mirror).unwrap();
        assert!(exact);
        assert_eq!(members, vec![(mirror.clone(), 1)]);
        assert_eq!(kb.replay_verify().unwrap(), 2);
    }

    #[test]
    fn seeds_reject_unqualified_parameters() {
        let mut kb = KnowledgeBase::new();
        // Zero orbit on a two-slot chain is not open.
        let phi = parse_parameter("nu^{1/2} + nu^{-1/2}").unwrap();
        assert!(matches!(
            kb.seed_open_orbit(&phi),
            Err(KbError::NotOpenOrbit(_))
        ));
        // But it is Arthur type (two singleton rectangles stacked).
        kb.seed_arthur(&phi).unwrap();
        // A shifted segment is neither Arthur type nor usable here.
        let shifted = parse_parameter("nu^{1} S_2").unwrap();
        assert!(matches!(
            kb.seed_arthur(&shifted),
            Err(KbError::NotArthurType(_))
        ));
    }

    #[test]
    fn query_honesty() {
        let mut kb = KnowledgeBase::new();
        let phi = parse_parameter("nu^{1/2} + nu^{-1/2}").unwrap();
        let s2 = parse_parameter("S_2").unwrap();

        // L-packet rule: the parameter's own representation is always in.
        let ans = kb.query_membership(&phi, &phi).unwrap();
        assert_eq!((ans.status, ans.rule), (Status::In, QueryRule::LPacket));

        // Variety mismatch is a definitive Out with its own tag.
        let other = parse_parameter("nu^{1/2} + nu^{1/2}").unwrap();
        let ans = kb.query_membership(&phi, &other).unwrap();
        assert_eq!((ans.status, ans.rule), (Status::Out, QueryRule::LambdaMismatch));

        // Closure pruning: the open orbit's packet cannot contain lower orbits.
        let ans = kb.query_membership(&s2, &phi).unwrap();
        assert_eq!((ans.status, ans.rule), (Status::Out, QueryRule::ClosureFailure));

        // Unseeded Arthur-type parameter: singleton packet, others are out.
        let ans = kb.query_membership(&phi, &s2).unwrap();
        assert_eq!((ans.status, ans.rule), (Status::Out, QueryRule::ArthurSingleton));

        // After seeding, the same answer comes from the exact eta vector.
        kb.seed_arthur(&phi).unwrap();
        let ans = kb.query_membership(&phi, &s2).unwrap();
        assert_eq!(
            (ans.status, ans.rule),
            (Status::Out, QueryRule::ExactPacketExhausted)
        );

        // Non-Arthur, non-open, unseeded: honestly unknown.
        let shifted = parse_parameter("nu^{1} S_2 + nu^{1} + nu^{2}").unwrap();
        let cand = parse_parameter("nu^{1} S_2 + nu^{3/2} S_2").unwrap();
        assert_eq!(infinitesimal(&shifted), infinitesimal(&cand));
        let ans = kb.query_membership(&shifted, &cand).unwrap();
        assert_eq!((ans.status, ans.rule), (Status::Unknown, QueryRule::NoInformation));
    }

    #[test]
    fn transported_packets_answer_queries_with_provenance() {
        let mut kb = KnowledgeBase::new();
        let phi = kb.seed_kashiwara_saito().unwrap();
        kb.derive_theta_transport(&phi, 5).unwrap();
        let lifted = theta_lift_param(&phi, 5);
        let (members, _) = kb.packet_members(&lifted).unwrap();
        for (pi, _) in &members {
            let ans = kb.query_membership(&lifted, pi).unwrap();
            assert_eq!(ans.status, Status::In);
            if *pi != lifted {
                assert_eq!(ans.rule, QueryRule::StoredCoefficient);
                assert!(ans.trace.iter().any(|l| l.contains("Kashiwara-Saito seed")));
                assert!(ans.trace.iter().any(|l| l.contains("theta transport")));
            }
        }
    }

    #[test]
    fn journal_round_trip_and_replay() {
        let mut kb = KnowledgeBase::new();
        let phi = kb.seed_kashiwara_saito().unwrap();
        kb.derive_theta_transport(&phi, 4).unwrap();
        kb.derive_theta_transport(&phi, 3).unwrap(); // refusal
        let open = parse_parameter("nu^{1/2} S_2").unwrap();
        kb.seed_open_orbit(&open).unwrap();
        kb.derive_contragredient(&open).unwrap();

        let mut buf = Vec::new();
        kb.save(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        let first = text.lines().next().unwrap();
        assert!(first.contains("\"abv-kb\"") && first.contains("\"version\":1"));

        let loaded = KnowledgeBase::load(std::io::BufReader::new(buf.as_slice())).unwrap();
        assert_eq!(loaded.facts(), kb.facts());
        assert_eq!(loaded.refusals(), kb.refusals());
        assert_eq!(loaded.replay_verify().unwrap(), kb.facts().len());

        // Tampering with a recorded fact is detected on load.
        let tampered = text.replace("\"coefficient\":1", "\"coefficient\":2");
        assert_ne!(tampered, text);
        let err = KnowledgeBase::load(std::io::BufReader::new(tampered.as_bytes()));
        assert!(matches!(err, Err(KbError::ReplayMismatch(_))));
    }
}
