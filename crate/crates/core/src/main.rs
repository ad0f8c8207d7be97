//! Command-line surface for the multisegment calculus: duality, theta
//! lifts, orbit geometry, fixed-point verification, and the packet
//! knowledge base. Exit codes: 0 success, 1 verification failure,
//! 2 usage/parse error, 3 resource bound exceeded.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use multiseg::certify::{restrict_to_chain, split_for_alpha, verify_fixed_point};
use multiseg::conormal::{geometric_dual_multisegment, verify_conormal_decomposition};
use multiseg::duality::{check_dual_sum_identity, zelevinsky_dual};
use multiseg::geometry::{hasse_diagram, varieties_of, GeomError};
use multiseg::kb::{KbError, KnowledgeBase, Status};
use multiseg::kgroup::{
    builtin_m_for_multiplicity_free, fixed_point_check, BasisMatrix, FixedPointOutcome, KError,
    OrbitBasis, ProductBasis,
};
use multiseg::param::{
    adams_threshold_ok, alpha_singletons, infinitesimal, theta_lift_param, Multisegment,
};
use multiseg::parse::{parse_lambda, parse_parameter, ParseError};

#[derive(Parser)]
#[command(name = "multiseg", version, about = "Multisegment calculus for GL(n)")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Moeglin-Waldspurger dual of a multisegment
    Dual {
        /// Multisegment, e.g. "nu^{1/2} S_2 + S_3" ("0" for empty)
        phi: String,
        /// Emit the dual and the extraction trace as JSON
        #[arg(long)]
        json: bool,
    },
    /// Geometric dual via conormal-fiber sampling, checked against the
    /// combinatorial dual
    GeomDual {
        phi: String,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Maximum random draws per stabilization
        #[arg(long, default_value_t = 24)]
        samples: usize,
        /// Entries are drawn from [-height-bound, height-bound]
        #[arg(long, default_value_t = 7)]
        height_bound: i64,
        #[arg(long)]
        json: bool,
    },
    /// Theta lift of an L-parameter with threshold and dual-sum verdicts
    Theta {
        #[arg(long)]
        phi: String,
        #[arg(long)]
        alpha: u32,
        #[arg(long)]
        json: bool,
    },
    /// Orbit poset of a Vogan variety as a Hasse diagram
    Hasse {
        /// Exponent multiset like "{3/2,1/2,-1/2,-3/2}" or a multisegment
        #[arg(long)]
        lambda: String,
        /// Emit DOT instead of text
        #[arg(long)]
        dot: bool,
        #[arg(long)]
        json: bool,
        /// Maximum number of orbits to enumerate
        #[arg(long, default_value_t = 100_000)]
        bound: usize,
    },
    /// List the orbits of a Vogan variety with their dimensions
    Orbits {
        #[arg(long)]
        lambda: String,
        #[arg(long)]
        json: bool,
        #[arg(long, default_value_t = 100_000)]
        bound: usize,
    },
    /// Verify the fixed-point certificates for a theta lift
    VerifyFpf {
        #[arg(long)]
        phi: String,
        #[arg(long)]
        alpha: u32,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 7)]
        height_bound: i64,
        /// Random conormal samples per decomposition check (0 to skip)
        #[arg(long, default_value_t = 4)]
        samples: usize,
        /// JSON file with a standard-to-irreducible basis matrix for the
        /// lifted variety (needed for the K-group check when the variety
        /// is not multiplicity free)
        #[arg(long)]
        m_file: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Packet knowledge base backed by an append-only journal
    Kb {
        #[command(subcommand)]
        cmd: KbCmd,
    },
}

#[derive(Subcommand)]
enum KbCmd {
    /// Record an unconditional packet
    Seed {
        #[arg(long, env = "MULTISEG_JOURNAL")]
        journal: PathBuf,
        /// Seed the singleton packet of an open-orbit parameter
        #[arg(long, group = "what")]
        open: Option<String>,
        /// Seed the singleton packet of an Arthur-type parameter
        #[arg(long, group = "what")]
        arthur: Option<String>,
        /// Seed a named built-in packet (currently only "KS")
        #[arg(long, group = "what")]
        from: Option<String>,
    },
    /// Extend the base by contragredient symmetry or theta transport
    Derive {
        #[arg(long, env = "MULTISEG_JOURNAL")]
        journal: PathBuf,
        /// Source parameter: a multisegment or the built-in name "KS"
        #[arg(long)]
        from: String,
        /// Transport along the theta lift of this degree
        #[arg(long, group = "how")]
        alpha: Option<u32>,
        /// Mirror to the contragredient parameter
        #[arg(long, group = "how")]
        contragredient: bool,
    },
    /// Ask whether a representation belongs to a packet
    Query {
        #[arg(long, env = "MULTISEG_JOURNAL")]
        journal: Option<PathBuf>,
        #[arg(long)]
        phi: String,
        #[arg(long)]
        pi: String,
        #[arg(long)]
        json: bool,
    },
    /// Print the stored facts
    Export {
        #[arg(long, env = "MULTISEG_JOURNAL")]
        journal: PathBuf,
        #[arg(long)]
        json: bool,
    },
}

enum CliError {
    Usage(String),
    Bound(String),
}

impl From<ParseError> for CliError {
    fn from(e: ParseError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<GeomError> for CliError {
    fn from(e: GeomError) -> Self {
        match e {
            GeomError::BoundExceeded(_) | GeomError::Unstable(_) => {
                CliError::Bound(e.to_string())
            }
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<KError> for CliError {
    fn from(e: KError) -> Self {
        match e {
            KError::Geometry(g) => g.into(),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<KbError> for CliError {
    fn from(e: KbError) -> Self {
        match e {
            KbError::Geometry(g) => g.into(),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Bound(msg)) => {
            eprintln!("error: resource bound exceeded: {msg}");
            ExitCode::from(3)
        }
    }
}

fn run(cli: Cli) -> Result<u8, CliError> {
    match cli.cmd {
        Cmd::Dual { phi, json } => cmd_dual(&phi, json),
        Cmd::GeomDual {
            phi,
            seed,
            samples,
            height_bound,
            json,
        } => cmd_geom_dual(&phi, seed, samples, height_bound, json),
        Cmd::Theta { phi, alpha, json } => cmd_theta(&phi, alpha, json),
        Cmd::Hasse {
            lambda,
            dot,
            json,
            bound,
        } => cmd_hasse(&lambda, dot, json, bound),
        Cmd::Orbits { lambda, json, bound } => cmd_orbits(&lambda, json, bound),
        Cmd::VerifyFpf {
            phi,
            alpha,
            seed,
            height_bound,
            samples,
            m_file,
            json,
        } => cmd_verify_fpf(&phi, alpha, seed, height_bound, samples, m_file.as_deref(), json),
        Cmd::Kb { cmd } => cmd_kb(cmd),
    }
}

fn cmd_dual(phi_text: &str, json: bool) -> Result<u8, CliError> {
    let phi = parse_parameter(phi_text)?;
    let result = zelevinsky_dual(&phi);
    if json {
        println!("{}", serde_json::to_string_pretty(&result)?);
    } else {
        println!("{}", result.dual);
    }
    Ok(0)
}

fn cmd_geom_dual(
    phi_text: &str,
    seed: u64,
    samples: usize,
    height_bound: i64,
    json: bool,
) -> Result<u8, CliError> {
    let phi = parse_parameter(phi_text)?;
    let mut geometric = Multisegment::empty();
    for chain in varieties_of(&infinitesimal(&phi)) {
        let part = restrict_to_chain(&phi, &chain);
        geometric =
            geometric.union(&geometric_dual_multisegment(&chain, &part, seed, height_bound, samples)?);
    }
    let combinatorial = zelevinsky_dual(&phi).dual;
    let agree = geometric == combinatorial;
    if json {
        println!(
            "{}",
            serde_json::to_string_pretty(&serde_json::json!({
                "seed": seed,
                "samples": samples,
                "height_bound": height_bound,
                "geometric": geometric,
                "combinatorial": combinatorial,
                "agree": agree,
            }))?
        );
    } else {
        println!("seed: {seed}  samples: {samples}  height-bound: {height_bound}");
        println!("geometric dual:     {geometric}");
        println!("combinatorial dual: {combinatorial}");
        println!("agreement: {}", if agree { "PASS" } else { "FAIL" });
    }
    Ok(u8::from(!agree))
}

fn cmd_theta(phi_text: &str, alpha: u32, json: bool) -> Result<u8, CliError> {
    let phi = parse_parameter(phi_text)?;
    let lifted = theta_lift_param(&phi, alpha);
    let threshold = adams_threshold_ok(&phi, alpha);
    let identity = check_dual_sum_identity(&phi, alpha);
    if json {
        println!(
            "{}",
            serde_json::to_string_pretty(&serde_json::json!({
                "phi": phi,
                "alpha": alpha,
                "lifted": lifted,
                "threshold_ok": threshold,
                "dual_sum_identity": identity,
            }))?
        );
    } else {
        println!("phi_alpha = {lifted}");
        println!("threshold: {}", if threshold { "OK" } else { "FAIL" });
        if identity.holds {
            println!("dual-sum-identity: OK ({})", identity.lhs);
        } else {
            println!(
                "dual-sum-identity: FAIL ({} vs {})",
                identity.lhs, identity.rhs
            );
        }
    }
    Ok(0)
}

fn cmd_hasse(lambda_text: &str, dot: bool, json: bool, bound: usize) -> Result<u8, CliError> {
    let lambda = parse_lambda(lambda_text)?;
    let diagrams: Vec<_> = varieties_of(&lambda)
        .into_iter()
        .map(|chain| hasse_diagram(&chain, bound))
        .collect::<Result<_, _>>()?;
    if json {
        println!("{}", serde_json::to_string_pretty(&diagrams)?);
    } else if dot {
        for d in &diagrams {
            println!("{}", d.to_dot());
        }
    } else {
        for d in &diagrams {
            println!("{} orbits", d.nodes.len());
            for (i, node) in d.nodes.iter().enumerate() {
                println!("  [{i}] dim {}  {node}", d.dims[i]);
            }
            for &(a, b) in &d.edges {
                println!("  {a} < {b}");
            }
        }
    }
    Ok(0)
}

fn cmd_orbits(lambda_text: &str, json: bool, bound: usize) -> Result<u8, CliError> {
    let lambda = parse_lambda(lambda_text)?;
    let basis = OrbitBasis::for_lambda(&lambda, bound)?;
    if json {
        let items: Vec<_> = basis
            .orbits
            .iter()
            .zip(&basis.dims)
            .map(|(o, d)| serde_json::json!({ "orbit": o, "dim": d }))
            .collect();
        println!("{}", serde_json::to_string_pretty(&items)?);
    } else {
        for (o, d) in basis.orbits.iter().zip(&basis.dims) {
            println!("dim {d:>3}  {o}");
        }
    }
    Ok(0)
}

/// K-group consistency of the lift: Lift(M(eta_prod)) = M(eta_total) in
/// standard coordinates. Returns None when no basis matrix is available
/// for a non-multiplicity-free variety.
fn kgroup_lift_check(
    phi: &Multisegment,
    alpha: u32,
    m_file: Option<&Path>,
    bound: usize,
) -> Result<Option<FixedPointOutcome>, CliError> {
    let lifted = theta_lift_param(phi, alpha);
    let chains = varieties_of(&infinitesimal(&lifted));
    let total = OrbitBasis::for_components(
        chains.iter().map(|c| (c.clone(), c.dims.clone())).collect(),
        bound,
    )?;
    let mut vee_parts = Vec::new();
    let mut alpha_parts = Vec::new();
    for c in &chains {
        let split = split_for_alpha(c, alpha);
        vee_parts.push((c.clone(), split.vee_dims.clone()));
        alpha_parts.push((c.clone(), split.alpha_dims()));
    }
    let prod = ProductBasis {
        parts: vec![
            OrbitBasis::for_components(vee_parts, bound)?,
            OrbitBasis::for_components(alpha_parts, bound)?,
        ],
    };
    if !prod.parts.iter().all(OrbitBasis::is_multiplicity_free) {
        return Ok(None);
    }
    let m_total = if total.is_multiplicity_free() {
        builtin_m_for_multiplicity_free(&total)?
    } else if let Some(path) = m_file {
        let mut text = String::new();
        File::open(path)?.read_to_string(&mut text)?;
        let m = BasisMatrix::from_json(&text)?;
        m.validate(Some(&total))?;
        m
    } else {
        return Ok(None);
    };
    let m_parts: Vec<BasisMatrix> = prod
        .parts
        .iter()
        .map(builtin_m_for_multiplicity_free)
        .collect::<Result<_, _>>()?;
    let pair = [phi.contragredient(), alpha_singletons(alpha)];
    let pair_idx = prod
        .index_of(&pair)
        .ok_or_else(|| CliError::Usage("product orbit of the lift not found".into()))?;
    let mut eta_prod = vec![0i64; prod.len()];
    eta_prod[pair_idx] = 1;
    let total_idx = total
        .index_of(&lifted)
        .ok_or_else(|| CliError::Usage("orbit of the lifted parameter not found".into()))?;
    let mut eta_total = vec![0i64; total.len()];
    eta_total[total_idx] = 1;
    Ok(Some(fixed_point_check(
        &prod, &m_parts, &eta_prod, &total, &m_total, &eta_total,
    )?))
}

fn cmd_verify_fpf(
    phi_text: &str,
    alpha: u32,
    seed: u64,
    height_bound: i64,
    samples: usize,
    m_file: Option<&Path>,
    json: bool,
) -> Result<u8, CliError> {
    let phi = parse_parameter(phi_text)?;
    let report = verify_fixed_point(&phi, alpha, seed, height_bound)?;
    let mut decompositions = Vec::new();
    if samples > 0 {
        for cert in &report.chains {
            decompositions.push(verify_conormal_decomposition(
                &cert.chain,
                &cert.split,
                &cert.expected_orbit,
                samples,
                seed,
                height_bound,
            )?);
        }
    }
    let kgroup = if alpha > 0 && report.threshold_ok {
        kgroup_lift_check(&phi, alpha, m_file, 100_000)?
    } else {
        None
    };
    let pass = report.pass() && kgroup.as_ref().map_or(true, |o| o.holds);
    if json {
        println!(
            "{}",
            serde_json::to_string_pretty(&serde_json::json!({
                "report": report,
                "decompositions": decompositions,
                "kgroup": kgroup,
                "pass": pass,
            }))?
        );
    } else {
        println!("seed: {seed}  height-bound: {height_bound}  samples: {samples}");
        println!("lifted parameter: {}", report.lifted);
        println!(
            "threshold: {}",
            if report.threshold_ok { "PASS" } else { "FAIL" }
        );
        if report.identity.holds {
            println!("dual-sum-identity: PASS ({})", report.identity.lhs);
        } else {
            println!(
                "dual-sum-identity: FAIL ({} vs {})",
                report.identity.lhs, report.identity.rhs
            );
        }
        for cert in &report.chains {
            let tag = format!("chain {}", cert.chain.label);
            match cert.regular.failing_clause() {
                None => println!("{tag}: regular-certificate PASS"),
                Some(clause) => println!("{tag}: regular-certificate FAIL ({clause})"),
            }
            match &cert.central_failure {
                None => println!("{tag}: central-witness PASS"),
                Some(reason) => println!("{tag}: central-witness FAIL ({reason})"),
            }
        }
        for d in &decompositions {
            println!(
                "conormal-decomposition of {}: {} product pair(s), {} forward / {} closure samples",
                d.orbit,
                d.pairs.len(),
                d.forward_samples,
                d.closure_samples
            );
        }
        match &kgroup {
            Some(o) if o.holds => println!("k-group-lift: PASS"),
            Some(o) => println!("k-group-lift: FAIL (witness {:?})", o.witness),
            None => println!(
                "k-group-lift: skipped (no basis matrix available; supply --m-file)"
            ),
        }
        println!("overall: {}", if pass { "PASS" } else { "FAIL" });
    }
    Ok(u8::from(!pass))
}

fn load_kb(path: &Path) -> Result<KnowledgeBase, CliError> {
    if path.exists() {
        Ok(KnowledgeBase::load(BufReader::new(File::open(path)?))?)
    } else {
        Ok(KnowledgeBase::new())
    }
}

fn save_kb(kb: &KnowledgeBase, path: &Path) -> Result<(), CliError> {
    let mut w = BufWriter::new(File::create(path)?);
    kb.save(&mut w)?;
    Ok(())
}

fn resolve_source(kb: &mut KnowledgeBase, from: &str) -> Result<Multisegment, CliError> {
    if from.eq_ignore_ascii_case("ks") {
        Ok(kb.seed_kashiwara_saito()?)
    } else {
        Ok(parse_parameter(from)?)
    }
}

fn cmd_kb(cmd: KbCmd) -> Result<u8, CliError> {
    match cmd {
        KbCmd::Seed {
            journal,
            open,
            arthur,
            from,
        } => {
            let mut kb = load_kb(&journal)?;
            let before = kb.facts().len();
            if let Some(text) = open {
                kb.seed_open_orbit(&parse_parameter(&text)?)?;
            } else if let Some(text) = arthur {
                kb.seed_arthur(&parse_parameter(&text)?)?;
            } else if let Some(name) = from {
                if !name.eq_ignore_ascii_case("ks") {
                    return Err(CliError::Usage(format!("unknown built-in packet {name:?}")));
                }
                kb.seed_kashiwara_saito()?;
            } else {
                return Err(CliError::Usage(
                    "one of --open, --arthur, --from is required".into(),
                ));
            }
            for fact in &kb.facts()[before..] {
                println!("IN  {}  in packet of  {}  (coefficient {})", fact.pi, fact.phi, fact.coefficient);
            }
            println!("{} new fact(s)", kb.facts().len() - before);
            save_kb(&kb, &journal)?;
            Ok(0)
        }
        KbCmd::Derive {
            journal,
            from,
            alpha,
            contragredient,
        } => {
            let mut kb = load_kb(&journal)?;
            let phi = resolve_source(&mut kb, &from)?;
            let before_facts = kb.facts().len();
            let before_refusals = kb.refusals().len();
            if contragredient {
                kb.derive_contragredient(&phi)?;
            } else if let Some(alpha) = alpha {
                kb.derive_theta_transport(&phi, alpha)?;
            } else {
                return Err(CliError::Usage(
                    "one of --alpha, --contragredient is required".into(),
                ));
            }
            for fact in &kb.facts()[before_facts..] {
                println!("IN  {}  in packet of  {}  (coefficient {})", fact.pi, fact.phi, fact.coefficient);
            }
            for refusal in &kb.refusals()[before_refusals..] {
                println!(
                    "REFUSED transport of {} at alpha = {}: {}",
                    refusal.phi, refusal.alpha, refusal.reason
                );
            }
            println!("{} new fact(s)", kb.facts().len() - before_facts);
            save_kb(&kb, &journal)?;
            Ok(0)
        }
        KbCmd::Query {
            journal,
            phi,
            pi,
            json,
        } => {
            let kb = match journal {
                Some(path) => load_kb(&path)?,
                None => KnowledgeBase::new(),
            };
            let answer = kb.query_membership(&parse_parameter(&phi)?, &parse_parameter(&pi)?)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&answer)?);
            } else {
                let word = match answer.status {
                    Status::In => "IN",
                    Status::Out => "OUT",
                    Status::Unknown => "UNKNOWN",
                };
                println!("status: {word}");
                println!("rule: {}", serde_json::to_string(&answer.rule)?);
                for line in &answer.trace {
                    println!("  {line}");
                }
            }
            Ok(0)
        }
        KbCmd::Export { journal, json } => {
            let kb = load_kb(&journal)?;
            if json {
                println!("{}", serde_json::to_string_pretty(kb.facts())?);
            } else {
                let mut buf = Vec::new();
                kb.save(&mut buf).map_err(CliError::from)?;
                print!("{}", String::from_utf8_lossy(&buf));
            }
            Ok(0)
        }
    }
}
