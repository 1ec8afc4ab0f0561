use std::path::Path;

use serde_json::{json, Value};
use sepkit::actions::{orbit, Action, Orbit};
use sepkit::amenability::{
    bs_nonseparability_witness, check_invariants, folner_check, folner_search_with, format_ratio, free_product_combine,
    parse_ratio, CertificateJson, CombineCase, CombineRequest, FolnerCertificate, SearchOptions,
};
use sepkit::chabauty::{approx_by_finite_index, approx_by_joint_separation, canonical_window};
use sepkit::error::{Error, Result};
use sepkit::genericity::{run_fusion, ScheduleFile, Transcript};
use sepkit::group::{ball, Element};
use sepkit::stallings::{self, graph_from_generators, graph_to_dot, table_to_dot, GraphJson};

use crate::input::{free_rank, free_words, parse_group, parse_points, parse_words, read_json};
use crate::schema::Kind;

/// A command's result: the JSON document, plus a Graphviz rendering when
/// the result is a graph.
pub struct Artifact {
    pub json: Value,
    pub dot: Option<String>,
}

impl Artifact {
    fn json(json: Value) -> Self {
        Artifact { json, dot: None }
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("plain data serializes")
}

/// Turns a failed self-check into a precondition error naming what failed.
fn ensure(ok: bool, what: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::precondition(format!("self-check failed: {what}"), None))
    }
}

pub fn separate(group: &str, subgroup: &str, elements: &[String]) -> Result<Artifact> {
    let group = parse_group(group)?;
    let rank = free_rank(&group)?;
    let gens = free_words(&group, subgroup)?;
    let mut outside = Vec::new();
    for e in elements {
        outside.extend(free_words(&group, e)?);
    }
    if outside.is_empty() {
        return Err(Error::Parse("at least one --element is required".into()));
    }
    let h = graph_from_generators(rank, &gens)?;
    let k = stallings::separate_many(&h, &outside)?;
    // The construction promises all three; they are rechecked on the output.
    let contains = gens.iter().all(|g| k.contains(g));
    let excludes = outside.iter().all(|g| !k.contains(g));
    ensure(contains, "H ≤ K")?;
    ensure(excludes, "g ∉ K")?;
    let bound = h.vertex_count() + outside.iter().map(|g| g.len()).sum::<usize>();
    ensure(k.degree() <= bound.max(1), "degree bound")?;
    Ok(Artifact {
        json: json!({
            "group": group.describe(),
            "subgroup": gens.iter().map(|g| g.to_string()).collect::<Vec<_>>(),
            "elements": outside.iter().map(|g| g.to_string()).collect::<Vec<_>>(),
            "subgroup_graph": to_value(&GraphJson::from(&h)),
            "table": to_value(&GraphJson::from(&k)),
            "degree": k.degree(),
            "checks": {
                "subgroup_contained": contains,
                "elements_excluded": excludes,
                "degree_bound": bound.max(1),
            },
        }),
        dot: Some(table_to_dot(&k)),
    })
}

pub fn chabauty_approx(group: &str, subgroup: &str, radius: usize, method: &str) -> Result<Artifact> {
    let group = parse_group(group)?;
    let rank = free_rank(&group)?;
    let gens = free_words(&group, subgroup)?;
    let l = graph_from_generators(rank, &gens)?;
    let omega = ball(&group, radius)?;
    let k = match method {
        "finite-index" => approx_by_finite_index(&l, &omega)?,
        "joint-separation" => approx_by_joint_separation(&l, &omega)?,
        other => return Err(Error::Parse(format!("unknown method {other:?}"))),
    };
    let mut inside = Vec::new();
    for g in canonical_window(&omega) {
        let w = g.as_free().expect("free group window");
        let in_l = stallings::member(w, &l);
        ensure(in_l == k.contains(w), &format!("K and L disagree on {w}"))?;
        if in_l {
            inside.push(w.to_string());
        }
    }
    ensure(gens.iter().all(|g| k.contains(g)), "L ≤ K")?;
    Ok(Artifact {
        json: json!({
            "group": group.describe(),
            "subgroup": gens.iter().map(|g| g.to_string()).collect::<Vec<_>>(),
            "radius": radius,
            "method": method,
            "window_size": omega.len(),
            "window_intersection": inside,
            "table": to_value(&GraphJson::from(&k)),
            "degree": k.degree(),
        }),
        dot: Some(graph_to_dot(&l).replace("digraph subgroup", "digraph core")
            + &table_to_dot(&k).replace("digraph subgroup", "digraph approximation")),
    })
}

pub fn orbit_cmd(action: &Path, point: u64, budget: usize) -> Result<Artifact> {
    let act: Action = read_json(action, Kind::Action)?;
    match orbit(&act, point, budget)? {
        Orbit::Finite { points } => Ok(Artifact::json(json!({ "orbit": points }))),
        Orbit::Exceeded { explored, .. } => Err(Error::refusal(format!(
            "orbit of {point} has more than {budget} points ({} explored)",
            explored.len()
        ))),
    }
}

fn certificate_value(act: &Action, cert: &FolnerCertificate) -> Value {
    to_value(&cert.to_json(act.group()))
}

pub fn folner_check_cmd(action: &Path, set: &str, omega: &str, epsilon: &str, verify: bool) -> Result<Artifact> {
    let act: Action = read_json(action, Kind::Action)?;
    let f = parse_points(set)?;
    let omega = parse_words(act.group(), omega)?;
    let cert = folner_check(&act, &f, &omega, parse_ratio(epsilon)?)?;
    if verify {
        cert.verify(&act)?;
    }
    Ok(Artifact::json(json!({
        "max_ratio": format_ratio(&cert.max_ratio()),
        "certificate": certificate_value(&act, &cert),
    })))
}

pub struct SearchArgs<'a> {
    pub action: &'a Path,
    pub point: u64,
    pub omega: &'a str,
    pub epsilon: &'a str,
    pub min_size: usize,
    pub budget: usize,
    pub verify: bool,
}

pub fn folner_search_cmd(args: &SearchArgs<'_>) -> Result<Artifact> {
    let act: Action = read_json(args.action, Kind::Action)?;
    let omega = parse_words(act.group(), args.omega)?;
    let mut opts = SearchOptions::new(args.budget);
    opts.min_size = args.min_size.max(1);
    let cert = folner_search_with(&act, args.point, &omega, parse_ratio(args.epsilon)?, &opts)?;
    if args.verify {
        cert.verify(&act)?;
    }
    Ok(Artifact::json(json!({
        "point": args.point,
        "size": cert.f.len(),
        "max_ratio": format_ratio(&cert.max_ratio()),
        "certificate": certificate_value(&act, &cert),
    })))
}

pub fn folner_verify(action: &Path, certificate: &Path) -> Result<Artifact> {
    let act: Action = read_json(action, Kind::Action)?;
    let raw: Value = read_json(certificate, Kind::Certificate)?;
    // accept either a bare certificate or a command output wrapping one
    let inner = raw.get("certificate").cloned().unwrap_or(raw);
    let json: CertificateJson = serde_json::from_value(inner).map_err(|e| Error::Parse(e.to_string()))?;
    let cert = FolnerCertificate::from_json(act.group(), &json)?;
    cert.verify(&act)?;
    Ok(Artifact::json(json!({
        "valid": true,
        "size": cert.f.len(),
        "max_ratio": format_ratio(&cert.max_ratio()),
    })))
}

pub struct CombineArgs<'a> {
    pub sigma: &'a Path,
    pub tau: &'a Path,
    pub point: u64,
    pub epsilon: &'a str,
    pub s: &'a str,
    pub t: &'a str,
    pub a: &'a str,
    pub budget: usize,
    pub verify: bool,
}

pub fn combine_cmd(args: &CombineArgs<'_>) -> Result<Artifact> {
    let sigma: Action = read_json(args.sigma, Kind::Action)?;
    let tau: Action = read_json(args.tau, Kind::Action)?;
    let req = CombineRequest {
        s: parse_words(sigma.group(), args.s)?,
        t: parse_words(tau.group(), args.t)?,
        sigma,
        tau,
        x: args.point,
        epsilon: parse_ratio(args.epsilon)?,
        a: parse_points(args.a)?,
        budget: args.budget,
    };
    let out = free_product_combine(&req)?;
    let joint = out.product()?;
    if args.verify {
        out.certificate.verify(&joint)?;
        if let Some(w) = &out.witness {
            check_invariants(w, &joint, req.x)?;
        }
    }
    let group = joint.group();
    let witness = out.witness.as_ref().map(|w| {
        json!({
            "modified": format!("{:?}", w.modified).to_lowercase(),
            "B": w.b,
            "F": w.f,
            "z": group.format(&Element::Product(w.z.clone())),
            "y": w.y,
            "trace": w.trace,
            "C": w.c,
            "D": w.d,
            "xi": to_value(&w.xi),
            "cutoff": w.cutoff,
        })
    });
    Ok(Artifact::json(json!({
        "case": match out.case {
            CombineCase::FiniteOrbits => "finite_orbits",
            CombineCase::Surgery => "surgery",
        },
        "action": to_value(&joint),
        "certificate": certificate_value(&joint, &out.certificate),
        "surgery": witness,
    })))
}

pub fn bs_witness(n: u32, d_max: usize) -> Result<Artifact> {
    let report = bs_nonseparability_witness(n, d_max)?;
    Ok(Artifact::json(to_value(&report)))
}

pub fn generic_run(schedule: &Path, stages: Option<usize>, budget: usize, verify: bool) -> Result<Artifact> {
    let file: ScheduleFile = read_json(schedule, Kind::Schedule)?;
    let (initial, providers) = file.load(stages)?;
    let run = run_fusion(&providers, initial, budget)?;
    let transcript = Transcript::from_run(&run)?;
    if verify {
        transcript.verify(budget)?;
    }
    Ok(Artifact::json(to_value(&transcript)))
}

pub fn generic_verify(transcript: &Path, budget: usize) -> Result<Artifact> {
    let t: Transcript = read_json(transcript, Kind::Transcript)?;
    t.verify(budget)?;
    Ok(Artifact::json(json!({ "valid": true, "stages": t.stages.len() })))
}
