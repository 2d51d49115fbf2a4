//! Inline object descriptors and schema files.

use forcible::{Alpha, Error, Graphon, Permuton, Result};
use std::path::Path;

/// A permuton or a graphon named on the command line.
#[derive(Debug, Clone)]
pub enum Object {
    Permuton(Permuton),
    Graphon(Graphon),
}

pub const SCHEMA_HINT: &str = "inline forms: uniform, increasing, decreasing, monotone:<a>, square:<a>, step3, \
constant:<rho>, cliqueblocks:<a>, planted:rho=<rho>,alpha=<a>, induced:<permuton>; \
or a path to a JSON object (see docs/schema.md)";

/// Parses `0.5` or `1/3`.
pub fn parse_real(s: &str) -> Result<f64> {
    let bad = || Error::Parse(format!("bad number {s:?}"));
    match s.split_once('/') {
        Some((p, q)) => {
            let p: f64 = p.trim().parse().map_err(|_| bad())?;
            let q: f64 = q.trim().parse().map_err(|_| bad())?;
            Ok(p / q)
        }
        None => s.trim().parse().map_err(|_| bad()),
    }
}

pub fn parse_alpha(s: &str) -> Result<Alpha> {
    Alpha::new(parse_real(s)?)
}

fn inline_permuton(s: &str) -> Option<Result<Permuton>> {
    let (head, arg) = match s.split_once(':') {
        Some((h, a)) => (h, Some(a)),
        None => (s, None),
    };
    Some(match (head, arg) {
        ("uniform", None) => Ok(Permuton::Uniform),
        ("increasing", None) => Ok(Permuton::increasing()),
        ("decreasing", None) => Ok(Permuton::decreasing()),
        ("step3", None) => Ok(Permuton::StepMatrix(forcible::permuton::StepMatrix::three_block_example())),
        ("monotone", Some(a)) => parse_real(a).and_then(Permuton::monotone),
        ("square", Some(a)) => parse_real(a).and_then(Permuton::square),
        _ => return None,
    })
}

fn inline_graphon(s: &str) -> Option<Result<Graphon>> {
    let (head, arg) = s.split_once(':')?;
    Some(match head {
        "constant" => parse_real(arg).and_then(Graphon::constant),
        "cliqueblocks" => parse_real(arg).and_then(Graphon::clique_blocks_geometric),
        "planted" => planted(arg),
        "induced" => match inline_permuton(arg) {
            Some(mu) => mu.map(|permuton| Graphon::PermutonInduced { permuton }),
            None => load(arg).and_then(|o| match o {
                Object::Permuton(permuton) => Ok(Graphon::PermutonInduced { permuton }),
                Object::Graphon(_) => Err(Error::Parse("induced: expects a permuton".into())),
            }),
        },
        _ => return None,
    })
}

fn planted(arg: &str) -> Result<Graphon> {
    let (mut rho, mut alpha) = (None, None);
    for kv in arg.split(',') {
        match kv.split_once('=') {
            Some(("rho", v)) => rho = Some(parse_real(v)?),
            Some(("alpha", v)) => alpha = Some(parse_real(v)?),
            _ => return Err(Error::Parse(format!("bad planted parameter {kv:?}"))),
        }
    }
    match (rho, alpha) {
        (Some(r), Some(a)) => Graphon::planted_constant(r, a),
        _ => Err(Error::Parse("planted needs rho=<rho>,alpha=<a>".into())),
    }
}

fn load(path: &str) -> Result<Object> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("cannot read {path}: {e}")))?;
    if let Ok(mu) = serde_json::from_str::<Permuton>(&text) {
        return Ok(Object::Permuton(mu));
    }
    serde_json::from_str::<Graphon>(&text)
        .map(Object::Graphon)
        .map_err(|e| Error::Parse(format!("{path} is neither a permuton nor a graphon: {e}")))
}

pub fn parse_object(s: &str) -> Result<Object> {
    if let Some(mu) = inline_permuton(s) {
        return mu.map(Object::Permuton);
    }
    if let Some(w) = inline_graphon(s) {
        return w.map(Object::Graphon);
    }
    if Path::new(s).exists() {
        return load(s);
    }
    Err(Error::Parse(format!("unknown descriptor {s:?}; {SCHEMA_HINT}")))
}

pub fn parse_permuton(s: &str) -> Result<Permuton> {
    match parse_object(s)? {
        Object::Permuton(mu) => Ok(mu),
        Object::Graphon(_) => Err(Error::Parse(format!("{s:?} describes a graphon, expected a permuton"))),
    }
}
