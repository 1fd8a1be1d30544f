//! Divisor and object expressions used in link data files.
//!
//! Divisors: integer combinations of basis labels, `K`, and names bound in a
//! dictionary, with parentheses (`-(h1+h2-E1) - K`, `2H - E`).
//! Objects: `O`, `O(<div>)`, `O_{<div>}(<k>)`, `O_<name>(<k>)`, a bound
//! object name, or a sum/difference of those.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::ktheory::{line_bundle_class, torsion_class, KClass};
use crate::lattice::{DivisorClass, SurfaceModel};

#[derive(Clone, Debug, Default)]
pub struct Scope {
    pub divisors: BTreeMap<String, DivisorClass>,
    pub objects: BTreeMap<String, KClass>,
}

fn err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}

fn is_name_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '\'' || c == '_'
}

struct DivParser<'a> {
    s: &'a [u8],
    pos: usize,
    surface: &'a SurfaceModel,
    scope: &'a Scope,
}

impl<'a> DivParser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && (self.s[self.pos] as char).is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.s.get(self.pos).map(|&b| b as char)
    }

    fn sum(&mut self) -> Result<DivisorClass> {
        let mut acc = self.surface.zero();
        let mut first = true;
        loop {
            let sign = match self.peek() {
                Some('+') => {
                    self.pos += 1;
                    1
                }
                Some('-') => {
                    self.pos += 1;
                    -1
                }
                _ if first => 1,
                _ => break,
            };
            first = false;
            let t = self.term()?;
            acc = &acc + &(sign * &t);
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<DivisorClass> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len() && (self.s[self.pos] as char).is_ascii_digit() {
            self.pos += 1;
        }
        let coef: i64 = if self.pos > start {
            std::str::from_utf8(&self.s[start..self.pos]).unwrap().parse().unwrap()
        } else {
            1
        };
        if self.peek() == Some('*') {
            self.pos += 1;
        }
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let inner = self.sum()?;
                if self.peek() != Some(')') {
                    return err("unbalanced parentheses in divisor expression");
                }
                self.pos += 1;
                Ok(coef * &inner)
            }
            Some(c) if is_name_char(c) && !c.is_ascii_digit() => {
                let s = self.pos;
                while self.pos < self.s.len() && is_name_char(self.s[self.pos] as char) {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.s[s..self.pos]).unwrap();
                Ok(coef * &lookup_divisor(self.surface, self.scope, name)?)
            }
            _ if self.pos > start => {
                if coef == 0 {
                    Ok(self.surface.zero())
                } else {
                    err("a bare nonzero integer is not a divisor class")
                }
            }
            other => err(format!("unexpected {other:?} in divisor expression")),
        }
    }
}

pub fn lookup_divisor(surface: &SurfaceModel, scope: &Scope, name: &str) -> Result<DivisorClass> {
    if let Some(d) = scope.divisors.get(name) {
        return Ok(d.clone());
    }
    if name == "K" {
        return Ok(surface.canonical_class());
    }
    if let Some(i) = surface.basis_labels().iter().position(|l| l == name) {
        return Ok(surface.basis_vector(i));
    }
    err(format!("unknown divisor name `{name}`"))
}

pub fn parse_divisor(surface: &SurfaceModel, scope: &Scope, text: &str) -> Result<DivisorClass> {
    let mut p = DivParser { s: text.as_bytes(), pos: 0, surface, scope };
    let d = p.sum()?;
    if p.peek().is_some() {
        return err(format!("trailing input in divisor expression `{text}`"));
    }
    Ok(d)
}

/// Splits on `sep` at parenthesis/brace depth zero.
pub fn split_top(text: &str, sep: char) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for c in text.chars() {
        match c {
            '(' | '{' | '[' => depth += 1,
            ')' | '}' | ']' => depth -= 1,
            _ => {}
        }
        if c == sep && depth == 0 {
            out.push(cur.trim().to_string());
            cur.clear();
        } else {
            cur.push(c);
        }
    }
    if !cur.trim().is_empty() || !out.is_empty() {
        out.push(cur.trim().to_string());
    }
    out
}

/// Splits an object sum `a + b - c` into signed summands at depth zero.
fn split_signed(text: &str) -> Vec<(i64, String)> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    let mut sign = 1;
    for c in text.chars() {
        match c {
            '(' | '{' => depth += 1,
            ')' | '}' => depth -= 1,
            _ => {}
        }
        if (c == '+' || c == '-') && depth == 0 {
            if !cur.trim().is_empty() {
                out.push((sign, cur.trim().to_string()));
            }
            cur.clear();
            sign = if c == '-' { -1 } else { 1 };
        } else {
            cur.push(c);
        }
    }
    if !cur.trim().is_empty() {
        out.push((sign, cur.trim().to_string()));
    }
    out
}

fn parse_atom(surface: &SurfaceModel, scope: &Scope, t: &str) -> Result<KClass> {
    if t == "O" {
        return Ok(line_bundle_class(surface, &surface.zero()));
    }
    if let Some(rest) = t.strip_prefix("O_") {
        // O_{div}(k) or O_name(k)
        let (div, tail) = if let Some(r) = rest.strip_prefix('{') {
            let close = r.find('}').ok_or_else(|| Error::Input(format!("missing `}}` in `{t}`")))?;
            (&r[..close], &r[close + 1..])
        } else {
            let open = rest.find('(').ok_or_else(|| Error::Input(format!("missing twist in `{t}`")))?;
            (&rest[..open], &rest[open..])
        };
        let k = tail
            .trim()
            .strip_prefix('(')
            .and_then(|x| x.strip_suffix(')'))
            .and_then(|x| x.trim().parse::<i64>().ok())
            .ok_or_else(|| Error::Input(format!("bad twist in `{t}`")))?;
        let e = parse_divisor(surface, scope, div)?;
        return torsion_class(surface, &e, k);
    }
    if let Some(rest) = t.strip_prefix("O(") {
        let inner = rest.strip_suffix(')').ok_or_else(|| Error::Input(format!("unbalanced `{t}`")))?;
        return Ok(line_bundle_class(surface, &parse_divisor(surface, scope, inner)?));
    }
    if let Some(k) = scope.objects.get(t) {
        return Ok(k.clone());
    }
    err(format!("unknown object `{t}`"))
}

pub fn parse_object(surface: &SurfaceModel, scope: &Scope, text: &str) -> Result<KClass> {
    let parts = split_signed(text);
    if parts.is_empty() {
        return err("empty object expression");
    }
    let mut acc = KClass::zero(surface);
    for (sign, t) in parts {
        let k = parse_atom(surface, scope, &t)?;
        acc = acc.add(&k.scale(sign));
    }
    Ok(acc)
}
