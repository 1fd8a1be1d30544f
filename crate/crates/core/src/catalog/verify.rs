//! Replay of link scripts into certificates.

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::catalog::script::{LinkScript, ScriptStep};
use crate::catalog::{catalog_ids, link_script};
use crate::error::Result;
use crate::ktheory::KClass;
use crate::lattice::r_class_value;
use crate::linalg::IntMatrix;
use crate::mutation::{
    apply_move, check_collection, collections_equal, matrix_in_basis, serre_matrix, serre_power_match, Collection,
    EqualityMode, Move,
};

pub const LEVEL: &str = "verified at K-theory level";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Clone, Debug, Serialize)]
pub struct StepRecord {
    pub step: usize,
    #[serde(rename = "move")]
    pub mv: String,
    pub collection: String,
    pub classes: Vec<Vec<String>>,
    pub gram: Vec<Vec<i64>>,
    pub ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckRecord {
    pub check: String,
    pub ok: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Certificate {
    pub case: String,
    pub title: String,
    pub steps: Vec<StepRecord>,
    pub checks: Vec<CheckRecord>,
    /// Gram matrix of the final collection.
    pub gram: Vec<Vec<i64>>,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
    pub level: String,
}

impl Certificate {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("certificate serializes")
    }

    /// One record per step, one per side check, then the verdict.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for s in &self.steps {
            let mut v = serde_json::to_value(s).expect("step serializes");
            v["case"] = json!(self.case);
            v["kind"] = json!("step");
            out.push_str(&v.to_string());
            out.push('\n');
        }
        for c in &self.checks {
            let mut v = serde_json::to_value(c).expect("check serializes");
            v["case"] = json!(self.case);
            v["kind"] = json!("check");
            out.push_str(&v.to_string());
            out.push('\n');
        }
        let v = json!({
            "case": self.case,
            "kind": "verdict",
            "verdict": self.verdict,
            "failure": self.failure,
            "gram": self.gram,
            "level": self.level,
        });
        out.push_str(&v.to_string());
        out.push('\n');
        out
    }

    fn fail(&mut self, msg: String) {
        if self.failure.is_none() {
            self.failure = Some(msg);
        }
        self.verdict = Verdict::Fail;
    }

    fn check(&mut self, name: &str, ok: bool, detail: impl Into<String>) {
        let detail = detail.into();
        if !ok {
            self.fail(format!("{name}: {detail}"));
        }
        self.checks.push(CheckRecord { check: name.to_string(), ok, detail });
    }
}

fn record(step: usize, mv: String, c: &Collection, ok: bool, note: Option<String>) -> StepRecord {
    StepRecord {
        step,
        mv,
        collection: c.render(),
        classes: c.render_classes(),
        gram: c.gram().to_rows(),
        ok,
        note,
    }
}

fn involution_on_k0(m: &IntMatrix, k: &KClass) -> KClass {
    KClass::new(k.rank, crate::lattice::DivisorClass(m.mul_vec(&k.c1.0)), k.chi)
}

fn static_checks(cert: &mut Certificate, s: &LinkScript) {
    let roof = &s.roof;
    for (r, name, d) in &s.rclass_checks {
        let got = r_class_value(roof, d);
        cert.check("rclass", got == Some(*r), format!("{name} = {} has r = {got:?}, expected {r}", roof.format_class(d)));
    }
    for (text, l, r) in &s.relations {
        cert.check("relation", l == r, text.clone());
    }
    for (label, side) in [("side1", &s.side1), ("side2", &s.side2)] {
        let rep = check_collection(side);
        cert.check(label, rep.ok, if rep.ok { side.render() } else { rep.violations.join("; ") });
        let want = roof.picard_rank() + 2;
        cert.check(
            "rank law",
            side.object_count() == want,
            format!("{label} has {} objects, rank of K0 is {want}", side.object_count()),
        );
    }
    if let Some((kind, m)) = &s.involution {
        let k = roof.canonical_class();
        let iso = m.transpose().mul(&roof.gram()).mul(m) == roof.gram();
        let fixes = m.mul_vec(&k.0) == k.0;
        let inv = m.mul(m) == IntMatrix::identity(roof.picard_rank());
        cert.check("involution", iso && fixes && inv, format!("{kind:?}: isometry {iso}, fixes K {fixes}, square one {inv}"));
        for (text, l, r) in &s.sigma_maps {
            cert.check("sigma", m.mul_vec(&l.0) == r.0, text.clone());
        }
    }
}

fn serre_identity_check(cert: &mut Certificate, s: &LinkScript) {
    let Some((a, b, k)) = s.serre_identity else { return };
    let Some((_, m)) = &s.involution else {
        cert.check("serre identity", false, "no involution recorded");
        return;
    };
    let res = (|| -> Result<bool> {
        let classes = s.side1.range_classes(a, b)?;
        let sm = serre_matrix(&s.roof, &classes)?.pow(k);
        let sig = matrix_in_basis(&s.roof, &classes, |x| involution_on_k0(m, x))?;
        Ok(sm == sig.neg())
    })();
    match res {
        Ok(ok) => cert.check("serre identity", ok, format!("(M^-1 M^T)^{k} = -sigma* on blocks {a}..{b}")),
        Err(e) => cert.check("serre identity", false, e.to_string()),
    }
}

/// Replays a parsed script. Never panics on bad data; failures land in the
/// certificate.
pub fn verify_script(s: &LinkScript) -> Certificate {
    let mut cert = Certificate {
        case: s.id.clone(),
        title: s.title.clone(),
        steps: Vec::new(),
        checks: Vec::new(),
        gram: Vec::new(),
        verdict: Verdict::Pass,
        failure: None,
        level: LEVEL.to_string(),
    };
    static_checks(&mut cert, s);
    serre_identity_check(&mut cert, s);

    let mut cur = s.side1.clone();
    cert.steps.push(record(0, "start".into(), &cur, check_collection(&cur).ok, None));
    for (i, st) in s.steps.iter().enumerate() {
        let n = i + 1;
        let (mv, note) = match st {
            ScriptStep::Apply(m) => (m.clone(), None),
            ScriptStep::SerreSearch { start, end, nmax } => {
                let (Some(a), Some(b)) = (cur.blocks().get(start - 1..*end), s.side2.blocks().get(start - 1..*end))
                else {
                    cert.fail(format!("step {n}: serre range {start}..{end} out of bounds"));
                    break;
                };
                match serre_power_match(cur.surface(), a, b, *nmax) {
                    Some(p) => (
                        Move::SerrePower { start: *start, end: *end, power: p },
                        Some(format!("serre power found by search, |N| <= {nmax}")),
                    ),
                    None => {
                        cert.steps.push(record(n, format!("serre {start}..{end} ^?"), &cur, false, None));
                        cert.fail(format!("step {n}: no Serre power with |N| <= {nmax} matches side 2"));
                        break;
                    }
                }
            }
        };
        match apply_move(&cur, &mv) {
            Ok(next) => {
                cur = next;
                cert.steps.push(record(n, mv.to_string(), &cur, true, note));
            }
            Err(e) => {
                cert.steps.push(record(n, mv.to_string(), &cur, false, Some(e.to_string())));
                cert.fail(format!("step {n} ({mv}): {e}"));
                break;
            }
        }
    }
    if cert.failure.as_deref().is_none_or(|f| !f.starts_with("step")) {
        let eq = collections_equal(&cur, &s.side2, EqualityMode::UpToSignAndBlockPerm);
        cert.check(
            "final",
            eq,
            if eq { format!("reached side 2: {}", s.side2.render()) } else { format!("ended at {}", cur.render()) },
        );
    }
    cert.gram = cur.gram().to_rows();
    cert
}

pub fn verify_link(id: &str) -> Result<Certificate> {
    Ok(verify_script(&link_script(id)?))
}

/// Every catalog case, computed in parallel, returned in catalog order.
pub fn verify_all() -> Vec<Result<Certificate>> {
    catalog_ids().par_iter().map(|id| verify_link(id)).collect()
}

/// Verifies every stanza of a link data file that is not part of the
/// embedded catalog.
pub fn verify_text(text: &str) -> Result<Vec<Certificate>> {
    crate::catalog::script::parse_stanzas(text)?
        .iter()
        .map(|st| Ok(verify_script(&crate::catalog::script::build_script(st)?)))
        .collect()
}
