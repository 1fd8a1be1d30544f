//! Text formats for CLI inputs: surfaces, group actions, contractions,
//! blow-up/blow-down step lists, collections and atom profiles.
//!
//! All files are `key = value` lines grouped under optional `[section]`
//! headers; `#` starts a comment.

use crate::arithmetic::{AtomProfile, ProfileAtom, Restriction, SmallAtom};
use crate::catalog::expr::{parse_divisor, Scope};
use crate::catalog::script::{build_script, parse_surface_spec, Stanza};
use crate::catalog::MoriFibreSpace;
use crate::equivariant::{
    BirationalStep, Contraction, ContractionTarget, GroupAction, TransitiveGSet, DEFAULT_CLOSURE_CAP,
};
use crate::error::{Error, Result};
use crate::lattice::{Base, DivisorClass, SurfaceModel};
use crate::linalg::IntMatrix;
use crate::mutation::Collection;

#[derive(Clone, Debug)]
pub struct Entry {
    pub line: usize,
    pub key: String,
    pub value: String,
}

#[derive(Clone, Debug)]
pub struct Section {
    /// Empty for lines before the first header.
    pub name: String,
    pub line: usize,
    pub entries: Vec<Entry>,
}

fn perr<T>(line: usize, msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse { line, msg: msg.into() })
}

fn at(line: usize) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::Parse { .. } => e,
        other => Error::Parse { line, msg: other.to_string() },
    }
}

pub fn sections(text: &str) -> Result<Vec<Section>> {
    let mut out = vec![Section { name: String::new(), line: 0, entries: Vec::new() }];
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let l = raw.split('#').next().unwrap_or("").trim();
        if l.is_empty() {
            continue;
        }
        if let Some(h) = l.strip_prefix('[') {
            let Some(name) = h.strip_suffix(']') else { return perr(line, format!("malformed header `{l}`")) };
            out.push(Section { name: name.trim().to_string(), line, entries: Vec::new() });
            continue;
        }
        let Some((k, v)) = l.split_once('=') else { return perr(line, format!("expected `key = value`, got `{l}`")) };
        out.last_mut().expect("nonempty").entries.push(Entry {
            line,
            key: k.trim().to_string(),
            value: v.trim().to_string(),
        });
    }
    Ok(out)
}

fn entries_in<'a>(secs: &'a [Section], names: &[&str]) -> impl Iterator<Item = &'a Entry> {
    let names: Vec<String> = names.iter().map(|s| s.to_string()).collect();
    secs.iter().filter(move |s| names.contains(&s.name)).flat_map(|s| s.entries.iter())
}

fn parse_int<T: std::str::FromStr>(e: &Entry) -> Result<T> {
    e.value.parse().map_err(|_| Error::Parse { line: e.line, msg: format!("`{}` expects an integer, got `{}`", e.key, e.value) })
}

/// A surface model plus an optional conic bundle fibre class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SurfaceSpec {
    pub surface: SurfaceModel,
    pub fibre: Option<DivisorClass>,
}

impl SurfaceSpec {
    pub fn mori_fibre_space(&self) -> MoriFibreSpace {
        match &self.fibre {
            Some(h) => MoriFibreSpace::over_p1(self.surface.clone(), h.clone()),
            None => MoriFibreSpace::over_point(self.surface.clone()),
        }
    }
}

/// `base = P2 | F<d>`, `blowups = [k1, k2, ...]`, optional `fibre = <divisor>`.
pub fn parse_surface(text: &str) -> Result<SurfaceSpec> {
    parse_surface_sections(&sections(text)?)?
        .ok_or(Error::Parse { line: 1, msg: "no `base` entry found".into() })
}

fn parse_surface_sections(secs: &[Section]) -> Result<Option<SurfaceSpec>> {
    let mut base: Option<(usize, String)> = None;
    let mut blowups = "[]".to_string();
    let mut fibre: Option<(usize, String)> = None;
    for e in entries_in(secs, &["", "surface"]) {
        match e.key.as_str() {
            "base" => base = Some((e.line, e.value.clone())),
            "blowups" => blowups = e.value.clone(),
            "fibre" | "fiber" => fibre = Some((e.line, e.value.clone())),
            _ => {}
        }
    }
    let Some((line, b)) = base else { return Ok(None) };
    let surface = parse_surface_spec(&format!("{b} {blowups}")).map_err(at(line))?;
    let fibre = match fibre {
        Some((l, f)) => Some(parse_divisor(&surface, &Scope::default(), &f).map_err(at(l))?),
        None => None,
    };
    Ok(Some(SurfaceSpec { surface, fibre }))
}

/// `[[a, b], [c, d]]` as a row-major matrix.
pub fn parse_matrix(text: &str) -> Result<IntMatrix> {
    let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let inner = t
        .strip_prefix("[[")
        .and_then(|x| x.strip_suffix("]]"))
        .ok_or_else(|| Error::Input(format!("matrix must look like [[..],[..]], got `{text}`")))?;
    let rows = inner
        .split("],[")
        .map(|r| {
            r.split(',')
                .map(|x| x.parse::<i64>().map_err(|_| Error::Input(format!("bad matrix entry `{x}`"))))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    if rows.iter().any(|r| r.len() != rows[0].len()) {
        return Err(Error::Input("matrix rows have different lengths".into()));
    }
    Ok(IntMatrix::from_rows(&rows))
}

fn parse_list(text: &str) -> Result<Vec<i64>> {
    let t = text.trim();
    let inner = t
        .strip_prefix('[')
        .and_then(|x| x.strip_suffix(']'))
        .ok_or_else(|| Error::Input(format!("expected a list `[..]`, got `{text}`")))?;
    inner
        .split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| x.parse::<i64>().map_err(|_| Error::Input(format!("bad list entry `{x}`"))))
        .collect()
}

/// `[group]` entries: `gen = [[..]]` matrices acting on column vectors in
/// the surface basis, `perm = [j1, ..]` sending E_i to E_{j_i} (1-based),
/// and an optional closure `cap = n`.
pub fn parse_group(text: &str, surface: &SurfaceModel) -> Result<GroupAction> {
    let secs = sections(text)?;
    let n = surface.picard_rank();
    let base = n - surface.blown_points();
    let mut gens = Vec::new();
    let mut cap = DEFAULT_CLOSURE_CAP;
    for e in entries_in(&secs, &["group"]) {
        match e.key.as_str() {
            "gen" => gens.push(parse_matrix(&e.value).map_err(at(e.line))?),
            "perm" => {
                let p = parse_list(&e.value).map_err(at(e.line))?;
                if p.len() != surface.blown_points() || p.iter().any(|&j| j < 1 || j as usize > p.len()) {
                    return perr(e.line, format!("`perm` must list images of E1..E{}", surface.blown_points()));
                }
                let mut g = IntMatrix::zeros(n, n);
                for i in 0..base {
                    g[(i, i)] = 1;
                }
                for (i, &j) in p.iter().enumerate() {
                    g[(base + j as usize - 1, base + i)] = 1;
                }
                gens.push(g);
            }
            "cap" => cap = parse_int(e)?,
            k => return perr(e.line, format!("unknown group key `{k}`")),
        }
    }
    let line = secs.iter().find(|s| s.name == "group").map_or(1, |s| s.line);
    GroupAction::with_cap(surface.clone(), gens, cap).map_err(at(line))
}

/// Surface stanza and group of a single action file.
pub fn parse_action_file(text: &str) -> Result<(SurfaceSpec, GroupAction)> {
    let spec = parse_surface(text)?;
    let a = parse_group(text, &spec.surface)?;
    Ok((spec, a))
}

/// `[contraction]` entries: `contract = k` trailing orbits, `target = point
/// | knef | conic <fibre divisor on the minimal model>`, `twist = <atom
/// position> <label>`.
pub fn parse_contraction(text: &str, surface: &SurfaceModel) -> Result<Contraction> {
    let secs = sections(text)?;
    let mut orbits = 0usize;
    let mut target: Option<(usize, String)> = None;
    let mut twists = Vec::new();
    for e in entries_in(&secs, &["", "contraction"]) {
        match e.key.as_str() {
            "contract" => orbits = parse_int(e)?,
            "target" => target = Some((e.line, e.value.clone())),
            "twist" => {
                let (pos, label) = e
                    .value
                    .split_once(char::is_whitespace)
                    .ok_or(Error::Parse { line: e.line, msg: "expected `twist = <position> <label>`".into() })?;
                let pos = pos.parse().map_err(|_| Error::Parse { line: e.line, msg: format!("bad atom position `{pos}`") })?;
                twists.push((pos, label.trim().to_string()));
            }
            k => return perr(e.line, format!("unknown contraction key `{k}`")),
        }
    }
    let minimal = surface.contract_last_orbits(orbits).map_err(at(1))?;
    let target = match target {
        None => ContractionTarget::Point,
        Some((_, t)) if t == "point" => ContractionTarget::Point,
        Some((_, t)) if t == "knef" => ContractionTarget::KNef,
        Some((line, t)) => match t.strip_prefix("conic") {
            Some(d) => ContractionTarget::ConicBundle(parse_divisor(&minimal, &Scope::default(), d).map_err(at(line))?),
            None => return perr(line, format!("unknown target `{t}`")),
        },
    };
    Ok(Contraction { orbits, target, twists })
}

/// `blowup = <size> [label]` and `blowdown = <size> [label]` lines in order.
pub fn parse_steps(text: &str) -> Result<Vec<BirationalStep>> {
    let secs = sections(text)?;
    let mut out = Vec::new();
    for e in entries_in(&secs, &["", "steps"]) {
        let mut words = e.value.split_whitespace();
        let size: usize = words
            .next()
            .and_then(|w| w.parse().ok())
            .filter(|&s| s > 0)
            .ok_or(Error::Parse { line: e.line, msg: format!("`{}` expects a positive orbit size", e.key) })?;
        let label: Vec<&str> = words.collect();
        let z = TransitiveGSet::labelled(size, label.join(" "));
        match e.key.as_str() {
            "blowup" => out.push(BirationalStep::BlowUp(z)),
            "blowdown" => out.push(BirationalStep::BlowDown(z)),
            k => return perr(e.line, format!("unknown step `{k}`")),
        }
    }
    Ok(out)
}

/// A collection in link-file syntax: `surface = P2 [3]`, optional `dict`,
/// `obj` and `opaque` bindings, and `collection = A | B, C | O`.
pub fn parse_collection(text: &str) -> Result<Collection> {
    let secs = sections(text)?;
    let mut entries = Vec::new();
    let mut coll: Option<(usize, String)> = None;
    let mut line0 = 1;
    for e in entries_in(&secs, &["", "collection"]) {
        match e.key.as_str() {
            "surface" => entries.push((e.line, "roof".to_string(), e.value.clone())),
            "collection" => coll = Some((e.line, e.value.clone())),
            k if k.starts_with("dict ") || k.starts_with("obj ") || k.starts_with("opaque ") => {
                entries.push((e.line, e.key.clone(), e.value.clone()))
            }
            k => return perr(e.line, format!("unknown collection key `{k}`")),
        }
        line0 = line0.max(e.line);
    }
    let Some((cl, c)) = coll else { return perr(line0, "no `collection` entry") };
    entries.push((cl, "side1".into(), c.clone()));
    entries.push((cl, "side2".into(), c));
    let st = Stanza { id: "collection".into(), line: 1, entries };
    Ok(build_script(&st)?.side1)
}

fn tuple_items(text: &str) -> Option<Vec<String>> {
    let inner = text.trim().strip_prefix('(')?.strip_suffix(')')?;
    Some(inner.split(',').map(|x| x.trim().trim_matches('"').to_string()).collect())
}

/// `[atoms]` sections, one profile each: `a = (d1, d2, "label")`,
/// `opaque = ("shape", degree)`, `am = n`, `ind = n`, `name = ...`,
/// `restrict = ("label", extension degree, index)`.
pub fn parse_profiles(text: &str) -> Result<Vec<AtomProfile>> {
    let secs = sections(text)?;
    let mut out = Vec::new();
    for (k, s) in secs.iter().filter(|s| s.name == "atoms").enumerate() {
        let mut p = AtomProfile { name: format!("profile {}", k + 1), ..Default::default() };
        for e in &s.entries {
            let bad = || Error::Parse { line: e.line, msg: format!("malformed `{}` entry `{}`", e.key, e.value) };
            match e.key.as_str() {
                "name" => p.name = e.value.clone(),
                "am" => p.amitsur_order = Some(parse_int(e)?),
                "ind" => p.surface_index = Some(parse_int(e)?),
                "a" => {
                    let t = tuple_items(&e.value).filter(|t| t.len() == 3).ok_or_else(bad)?;
                    let d1 = t[0].parse().map_err(|_| bad())?;
                    let d2 = t[1].parse().map_err(|_| bad())?;
                    p.atoms.push(ProfileAtom::Small(SmallAtom::new(d1, d2, &t[2]).map_err(at(e.line))?));
                }
                "opaque" => {
                    let t = tuple_items(&e.value).filter(|t| t.len() == 2).ok_or_else(bad)?;
                    p.atoms.push(ProfileAtom::Opaque { shape: t[0].clone(), degree: t[1].parse().map_err(|_| bad())? });
                }
                "restrict" => {
                    let t = tuple_items(&e.value).filter(|t| t.len() == 3).ok_or_else(bad)?;
                    p.restrictions.push(Restriction {
                        label: t[0].clone(),
                        extension_degree: t[1].parse().map_err(|_| bad())?,
                        index: t[2].parse().map_err(|_| bad())?,
                    });
                }
                key => return perr(e.line, format!("unknown profile key `{key}`")),
            }
        }
        out.push(p);
    }
    if out.is_empty() {
        return perr(1, "no [atoms] section");
    }
    Ok(out)
}

/// Convenience for tests and examples: a surface stanza as text.
pub fn surface_text(s: &SurfaceModel) -> String {
    let base = match s.base() {
        Base::ProjectivePlane => "P2".to_string(),
        Base::Hirzebruch(d) => format!("F{d}"),
    };
    let orbits: Vec<String> = s.blowup_orbits().iter().map(usize::to_string).collect();
    format!("base = {base}\nblowups = [{}]\n", orbits.join(", "))
}
