//! Link script stanzas: roof surface, dictionary, both side collections and
//! the move script connecting them.
//!
//! ```text
//! [link "I-9-8"]
//! type = I
//! degrees = 9, 8
//! roof = P2 [1]
//! dict h = H - E1
//! side1 = O_E1(-1) | O(-2H) | O(-H) | O
//! side2 = O(-h-E1) | O(-E1) | O(-h) | O
//! moves = helix -K; L 4; helix -K; L 4
//! ```
//!
//! Further keys: `obj NAME = <object sum>`, `opaque NAME = span <objs>` or
//! `opaque NAME = perp <objs> [; c1 . <divs>]`, `rclass <r> = <names>`,
//! `relation <div> = <div>`, `involution = bertini | geiser`,
//! `serre_identity = a..b ^k`, `sigma_maps = <div> -> <div>`.
//! Moves accept `{ ... } xN` / `<move> xN` repetition and `serre a..b ^?`,
//! which searches for the Serre power matching the target side.

use crate::catalog::expr::{parse_divisor, parse_object, split_top, Scope};
use crate::error::{Error, Result};
use crate::ktheory::{euler_pairing, KClass};
use crate::lattice::{Base, DivisorClass, SurfaceModel};
use crate::linalg::{integer_kernel, IntMatrix};
use crate::mutation::{describe_class, Block, Collection, ExcObject, Move};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ScriptStep {
    Apply(Move),
    /// Serre power on blocks `start..=end` found by search against side 2.
    SerreSearch { start: usize, end: usize, nmax: u32 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Involution {
    Bertini,
    Geiser,
}

#[derive(Clone, Debug)]
pub struct LinkScript {
    pub id: String,
    pub title: String,
    pub link_type: String,
    pub degrees: Vec<i64>,
    pub roof: SurfaceModel,
    pub dictionary: Vec<(String, DivisorClass)>,
    pub objects: Vec<(String, KClass)>,
    pub side1: Collection,
    pub side2: Collection,
    pub steps: Vec<ScriptStep>,
    pub rclass_checks: Vec<(i64, String, DivisorClass)>,
    pub relations: Vec<(String, DivisorClass, DivisorClass)>,
    pub involution: Option<(Involution, IntMatrix)>,
    pub serre_identity: Option<(usize, usize, u32)>,
    pub sigma_maps: Vec<(String, DivisorClass, DivisorClass)>,
}

/// Raw stanza: id plus (line number, key, value) entries in file order.
#[derive(Clone, Debug)]
pub struct Stanza {
    pub id: String,
    pub line: usize,
    pub entries: Vec<(usize, String, String)>,
}

/// Splits a data file into `[link "id"]` stanzas. Comment lines start with `#`.
pub fn parse_stanzas(text: &str) -> Result<Vec<Stanza>> {
    let mut out: Vec<Stanza> = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let l = raw.trim();
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        if let Some(h) = l.strip_prefix("[link") {
            let id = h
                .trim()
                .strip_suffix(']')
                .map(str::trim)
                .and_then(|x| x.strip_prefix('"'))
                .and_then(|x| x.strip_suffix('"'))
                .ok_or(Error::Parse { line, msg: "malformed stanza header".into() })?;
            out.push(Stanza { id: id.to_string(), line, entries: Vec::new() });
            continue;
        }
        let Some(st) = out.last_mut() else {
            return Err(Error::Parse { line, msg: "entry outside of a stanza".into() });
        };
        // A leading keyword followed by a name binds that name (`dict H' = ...`).
        let (key, value) = l.split_once('=').ok_or(Error::Parse { line, msg: format!("expected `key = value`, got `{l}`") })?;
        st.entries.push((line, key.trim().to_string(), value.trim().to_string()));
    }
    Ok(out)
}

pub fn parse_surface_spec(text: &str) -> Result<SurfaceModel> {
    let t = text.trim();
    let (base, rest) = match t.find('[') {
        Some(i) => (t[..i].trim(), t[i..].trim()),
        None => (t, "[]"),
    };
    let base = match base {
        "P2" => Base::ProjectivePlane,
        b if b.starts_with('F') => {
            Base::Hirzebruch(b[1..].parse().map_err(|_| Error::Input(format!("bad Hirzebruch index in `{b}`")))?)
        }
        b => return Err(Error::Input(format!("unknown base `{b}`"))),
    };
    let inner = rest
        .strip_prefix('[')
        .and_then(|x| x.strip_suffix(']'))
        .ok_or_else(|| Error::Input(format!("bad blow-up list `{rest}`")))?;
    let orbits = inner
        .split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| x.parse::<usize>().map_err(|_| Error::Input(format!("bad orbit size `{x}`"))))
        .collect::<Result<Vec<_>>>()?;
    SurfaceModel::new(base, orbits)
}

/// Z-basis of { x in K0 : chi(o, x) = 0 for all o, c1(x)·D = 0 for all D }.
pub fn perp_span(surface: &SurfaceModel, objs: &[KClass], divs: &[DivisorClass]) -> Vec<KClass> {
    let n = surface.picard_rank() + 2;
    let unit = |i: usize| {
        let mut v = vec![0; n];
        v[i] = 1;
        KClass::from_vec(&v)
    };
    let mut rows = Vec::new();
    for o in objs {
        rows.push((0..n).map(|i| euler_pairing(surface, o, &unit(i))).collect::<Vec<_>>());
    }
    for d in divs {
        let mut r = vec![0; n];
        for i in 0..surface.picard_rank() {
            r[i + 1] = surface.dot(d, &surface.basis_vector(i));
        }
        rows.push(r);
    }
    let a = IntMatrix::from_rows(&rows);
    integer_kernel(&a).iter().map(|v| KClass::from_vec(v)).collect()
}

fn parse_steps(text: &str, line: usize) -> Result<Vec<ScriptStep>> {
    let perr = |msg: String| Error::Parse { line, msg };
    let mut out = Vec::new();
    for item in split_top(text, ';') {
        let item = item.trim();
        if item.is_empty() {
            continue;
        }
        let (body, reps) = match item.rsplit_once(" x") {
            Some((b, n)) if n.trim().parse::<usize>().is_ok() => (b.trim(), n.trim().parse::<usize>().unwrap()),
            _ => (item, 1),
        };
        let inner: Vec<ScriptStep> = if let Some(g) = body.strip_prefix('{').and_then(|x| x.strip_suffix('}')) {
            parse_steps(g, line)?
        } else if let Some(rest) = body.strip_prefix("serre ").filter(|r| r.trim_end().ends_with("^?")) {
            let range = rest.trim_end().trim_end_matches("^?").trim();
            let (a, b) = range.split_once("..").ok_or_else(|| perr(format!("bad range in `{body}`")))?;
            vec![ScriptStep::SerreSearch {
                start: a.trim().parse().map_err(|_| perr(format!("bad range in `{body}`")))?,
                end: b.trim().parse().map_err(|_| perr(format!("bad range in `{body}`")))?,
                nmax: 12,
            }]
        } else {
            vec![ScriptStep::Apply(body.parse().map_err(|e: Error| perr(e.to_string()))?)]
        };
        for _ in 0..reps {
            out.extend(inner.iter().cloned());
        }
    }
    Ok(out)
}

struct Builder {
    surface: SurfaceModel,
    scope: Scope,
    opaque: Vec<(String, Vec<KClass>)>,
}

impl Builder {
    fn collection(&self, text: &str) -> Result<Collection> {
        let mut blocks = Vec::new();
        for part in split_top(text, '|') {
            if let Some((name, span)) = self.opaque.iter().find(|(n, _)| *n == part) {
                blocks.push(Block::opaque(name.clone(), span.clone()));
                continue;
            }
            let mut objs = Vec::new();
            for o in split_top(&part, ',') {
                let cls = parse_object(&self.surface, &self.scope, &o)?;
                let label = if self.scope.objects.contains_key(&o) {
                    o.clone()
                } else {
                    describe_class(&self.surface, &cls)
                };
                objs.push(ExcObject::new(cls, label));
            }
            blocks.push(Block::exceptional(objs));
        }
        Ok(Collection::new(self.surface.clone(), blocks, true))
    }

    fn objects(&self, text: &str) -> Result<Vec<KClass>> {
        split_top(text, ',').iter().map(|o| parse_object(&self.surface, &self.scope, o)).collect()
    }
}

fn at(line: usize) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::Parse { .. } => e,
        other => Error::Parse { line, msg: other.to_string() },
    }
}

pub fn build_script(st: &Stanza) -> Result<LinkScript> {
    let get = |k: &str| st.entries.iter().find(|(_, key, _)| key == k);
    let (rl, _, roof_text) = get("roof").ok_or(Error::Parse { line: st.line, msg: format!("link {} has no roof", st.id) })?;
    let roof = parse_surface_spec(roof_text).map_err(at(*rl))?;
    let mut b = Builder { surface: roof.clone(), scope: Scope::default(), opaque: Vec::new() };
    let mut script = LinkScript {
        id: st.id.clone(),
        title: String::new(),
        link_type: String::new(),
        degrees: Vec::new(),
        roof: roof.clone(),
        dictionary: Vec::new(),
        objects: Vec::new(),
        side1: Collection::new(roof.clone(), Vec::new(), true),
        side2: Collection::new(roof.clone(), Vec::new(), true),
        steps: Vec::new(),
        rclass_checks: Vec::new(),
        relations: Vec::new(),
        involution: None,
        serre_identity: None,
        sigma_maps: Vec::new(),
    };
    let mut have = (false, false);
    for (line, key, value) in &st.entries {
        let line = *line;
        let e = at(line);
        let mut words = key.split_whitespace();
        let kw = words.next().unwrap_or("");
        let name = words.next().map(str::to_string);
        match (kw, name) {
            ("title", None) => script.title = value.clone(),
            ("type", None) => script.link_type = value.clone(),
            ("degrees", None) => {
                script.degrees = value
                    .split(',')
                    .map(|x| x.trim().parse::<i64>().map_err(|_| Error::Parse { line, msg: format!("bad degree `{x}`") }))
                    .collect::<Result<_>>()?
            }
            ("roof", None) => {}
            ("dict", Some(n)) => {
                if roof.basis_labels().contains(&n) || n == "K" {
                    return Err(Error::Parse { line, msg: format!("`{n}` is a reserved basis label") });
                }
                let d = parse_divisor(&roof, &b.scope, value).map_err(&e)?;
                b.scope.divisors.insert(n.clone(), d.clone());
                script.dictionary.push((n, d));
            }
            ("obj", Some(n)) => {
                let k = parse_object(&roof, &b.scope, value).map_err(&e)?;
                b.scope.objects.insert(n.clone(), k.clone());
                script.objects.push((n, k));
            }
            ("opaque", Some(n)) => {
                let span = if let Some(rest) = value.strip_prefix("span ") {
                    b.objects(rest).map_err(&e)?
                } else if let Some(rest) = value.strip_prefix("perp ") {
                    let (objs, divs) = match rest.split_once(';') {
                        Some((o, d)) => (o, Some(d)),
                        None => (rest, None),
                    };
                    let objs = b.objects(objs).map_err(&e)?;
                    let divs = match divs {
                        Some(d) => {
                            let d = d.trim().strip_prefix("c1 .").ok_or(Error::Parse {
                                line,
                                msg: "expected `c1 . <divisors>` after `;`".into(),
                            })?;
                            split_top(d, ',')
                                .iter()
                                .map(|x| parse_divisor(&roof, &b.scope, x))
                                .collect::<Result<Vec<_>>>()
                                .map_err(&e)?
                        }
                        None => Vec::new(),
                    };
                    perp_span(&roof, &objs, &divs)
                } else {
                    return Err(Error::Parse { line, msg: "opaque spans use `span` or `perp`".into() });
                };
                b.opaque.push((n, span));
            }
            ("side1", None) => {
                script.side1 = b.collection(value).map_err(&e)?;
                have.0 = true;
            }
            ("side2", None) => {
                script.side2 = b.collection(value).map_err(&e)?;
                have.1 = true;
            }
            ("moves", None) => script.steps.extend(parse_steps(value, line)?),
            ("rclass", Some(r)) => {
                let r: i64 = r.parse().map_err(|_| Error::Parse { line, msg: format!("bad r `{r}`") })?;
                for n in split_top(value, ',') {
                    let d = parse_divisor(&roof, &b.scope, &n).map_err(&e)?;
                    script.rclass_checks.push((r, n, d));
                }
            }
            ("relation", None) => {
                let (l, r) = value
                    .split_once("==")
                    .ok_or(Error::Parse { line, msg: "relations are written `lhs == rhs`".into() })?;
                let lhs = parse_divisor(&roof, &b.scope, l).map_err(&e)?;
                let rhs = parse_divisor(&roof, &b.scope, r).map_err(&e)?;
                script.relations.push((value.clone(), lhs, rhs));
            }
            ("involution", None) => {
                let kind = match value.as_str() {
                    "bertini" => Involution::Bertini,
                    "geiser" => Involution::Geiser,
                    v => return Err(Error::Parse { line, msg: format!("unknown involution `{v}`") }),
                };
                let deg = if kind == Involution::Bertini { 1 } else { 2 };
                let m = crate::catalog::geiser_bertini_involution(deg, &roof).map_err(&e)?;
                script.involution = Some((kind, m));
            }
            ("serre_identity", None) => {
                let bad = || Error::Parse { line, msg: format!("bad serre identity `{value}`") };
                let (range, pow) = value.split_once('^').ok_or_else(bad)?;
                let (a, c) = range.trim().split_once("..").ok_or_else(bad)?;
                script.serre_identity = Some((
                    a.trim().parse().map_err(|_| bad())?,
                    c.trim().parse().map_err(|_| bad())?,
                    pow.trim().parse().map_err(|_| bad())?,
                ));
            }
            ("sigma_maps", None) => {
                let (l, r) = value
                    .split_once("->")
                    .ok_or(Error::Parse { line, msg: "expected `a -> b`".into() })?;
                let lhs = parse_divisor(&roof, &b.scope, l).map_err(&e)?;
                let rhs = parse_divisor(&roof, &b.scope, r).map_err(&e)?;
                script.sigma_maps.push((value.clone(), lhs, rhs));
            }
            (k, _) => return Err(Error::Parse { line, msg: format!("unknown key `{k}`") }),
        }
    }
    if !(have.0 && have.1) {
        return Err(Error::Parse { line: st.line, msg: format!("link {} needs side1 and side2", st.id) });
    }
    Ok(script)
}
