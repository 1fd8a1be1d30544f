//! Standard decompositions of Mori fibre spaces, the numerical classification
//! of Sarkisov links, and the stored link replay scripts.

pub mod expr;
pub mod script;
pub mod verify;

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ktheory::{line_bundle_class, structure_sheaf, KClass};
use crate::lattice::{enumerate_r_classes, r_class_value, Base, DivisorClass, SurfaceModel};
use crate::linalg::IntMatrix;
use crate::mutation::{describe_class, Block, Collection, ExcObject};

pub use script::{LinkScript, ScriptStep};
pub use verify::{verify_all, verify_link, verify_text, Certificate, Verdict};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum MfsBase {
    Point,
    RationalCurve,
    Curve(u32),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MoriFibreSpace {
    /// Lattice model; absent for conic bundles over irrational curves,
    /// which only carry their degree.
    pub surface: Option<SurfaceModel>,
    pub degree: i64,
    pub base: MfsBase,
    pub fibration_class: Option<DivisorClass>,
}

impl MoriFibreSpace {
    pub fn over_point(surface: SurfaceModel) -> Self {
        let degree = surface.degree();
        MoriFibreSpace { surface: Some(surface), degree, base: MfsBase::Point, fibration_class: None }
    }

    pub fn over_p1(surface: SurfaceModel, fibration: DivisorClass) -> Self {
        let degree = surface.degree();
        MoriFibreSpace { surface: Some(surface), degree, base: MfsBase::RationalCurve, fibration_class: Some(fibration) }
    }

    pub fn over_curve(genus: u32, degree: i64) -> Self {
        MoriFibreSpace { surface: None, degree, base: MfsBase::Curve(genus), fibration_class: None }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Input(m));
        match self.base {
            MfsBase::Point => {
                let Some(s) = &self.surface else { return bad("del Pezzo model needs a lattice".into()) };
                if !(1..=9).contains(&self.degree) || self.degree == 7 {
                    return bad(format!("no minimal del Pezzo surface of degree {} over a point", self.degree));
                }
                if self.degree == 8 && !enumerate_r_classes(s, -1)?.is_empty() {
                    return bad("degree-8 model over a point must be F0, not F1".into());
                }
            }
            MfsBase::RationalCurve => {
                let Some(s) = &self.surface else { return bad("conic bundle model needs a lattice".into()) };
                if self.degree > 8 {
                    return bad(format!("conic bundle of degree {} exceeds 8", self.degree));
                }
                let Some(h) = &self.fibration_class else { return bad("conic bundle needs its fibre class".into()) };
                s.check(h)?;
                if r_class_value(s, h) != Some(0) {
                    return bad(format!("fibre class {} is not a 0-class", s.format_class(h)));
                }
            }
            MfsBase::Curve(g) => {
                if g == 0 {
                    return bad("use RationalCurve for genus 0".into());
                }
                let bound = 8 * (1 - i64::from(g));
                if self.degree > bound {
                    return bad(format!("conic bundle over a genus-{g} curve has degree <= {bound}"));
                }
            }
        }
        Ok(())
    }
}

pub fn birationally_rich(mfs: &MoriFibreSpace) -> bool {
    match mfs.base {
        MfsBase::Point => matches!(mfs.degree, 9 | 8 | 6 | 5),
        MfsBase::RationalCurve => matches!(mfs.degree, 8 | 6 | 5),
        MfsBase::Curve(_) => false,
    }
}

fn line(s: &SurfaceModel, d: &DivisorClass) -> ExcObject {
    let k = line_bundle_class(s, d);
    ExcObject::new(k.clone(), describe_class(s, &k))
}

fn line_block(s: &SurfaceModel, ds: &[DivisorClass]) -> Block {
    Block::exceptional(ds.iter().map(|d| line(s, &-d)).collect())
}

/// Rank-2 class [O(-H_i)] + [O(-h_i)] on a degree-5 model, checked to be the
/// same for all five pairs h_i + H_i = -K.
pub fn e_bundle_class(surface: &SurfaceModel) -> Result<KClass> {
    if surface.degree() != 5 {
        return Err(Error::Input(format!("E-bundle lives on degree 5, model has degree {}", surface.degree())));
    }
    let mk = -&surface.canonical_class();
    let zero = enumerate_r_classes(surface, 0)?;
    let mut out: Option<KClass> = None;
    for h in &zero {
        let big = &mk - h;
        debug_assert_eq!(r_class_value(surface, &big), Some(1));
        let k = line_bundle_class(surface, &-&big).add(&line_bundle_class(surface, &-h));
        match &out {
            None => out = Some(k),
            Some(prev) if *prev == k => {}
            Some(_) => return Err(Error::Verification("E-bundle class depends on the chosen pair".into())),
        }
    }
    out.ok_or_else(|| Error::Verification("degree-5 model has no 0-classes".into()))
}

fn e_bundle_object(s: &SurfaceModel) -> Result<ExcObject> {
    Ok(ExcObject::new(e_bundle_class(s)?, "E-bundle"))
}

fn hirzebruch_section(s: &SurfaceModel, h: &DivisorClass) -> Result<DivisorClass> {
    match s.base() {
        Base::Hirzebruch(d) if s.blown_points() == 0 => {
            if *h == s.basis_vector(1) {
                Ok(s.basis_vector(0))
            } else if d == 0 && *h == s.basis_vector(0) {
                Ok(s.basis_vector(1))
            } else {
                Err(Error::Input("fibre class must be a ruling of the Hirzebruch surface".into()))
            }
        }
        Base::ProjectivePlane if s.blown_points() == 1 => {
            if *h == DivisorClass(vec![1, -1]) {
                Ok(s.basis_vector(1))
            } else {
                Err(Error::Input("fibre class of Bl1P2 must be H-E1".into()))
            }
        }
        _ => Err(Error::Input("degree-8 conic bundle must be a Hirzebruch model".into())),
    }
}

/// Standard decomposition of a Mori fibre space: explicit exceptional blocks
/// in the birationally rich cases, an opaque piece followed by the pulled
/// back base otherwise.
pub fn standard_sod(mfs: &MoriFibreSpace) -> Result<Collection> {
    mfs.validate()?;
    let Some(s) = &mfs.surface else {
        return Err(Error::Unsupported("standard decomposition over an irrational base curve".into()));
    };
    let o = line(s, &s.zero());
    let mut blocks = Vec::new();
    match (mfs.base, mfs.degree) {
        (MfsBase::Point, 9) => {
            let big = enumerate_r_classes(s, 1)?;
            let h = &big[0];
            blocks.push(line_block(s, &[2 * h]));
            blocks.push(line_block(s, std::slice::from_ref(h)));
        }
        (MfsBase::Point, 8) => {
            let z = enumerate_r_classes(s, 0)?;
            blocks.push(line_block(s, &[&z[0] + &z[1]]));
            blocks.push(line_block(s, &z));
        }
        (MfsBase::Point, 6) => {
            blocks.push(line_block(s, &enumerate_r_classes(s, 1)?));
            blocks.push(line_block(s, &enumerate_r_classes(s, 0)?));
        }
        (MfsBase::Point, 5) => {
            blocks.push(Block::single(e_bundle_object(s)?));
            blocks.push(line_block(s, &enumerate_r_classes(s, 0)?));
        }
        (MfsBase::Point, _) => {
            let span = script::perp_span(s, &[structure_sheaf(s)], &[]);
            blocks.push(Block::opaque("O^perp", span));
        }
        (MfsBase::RationalCurve, d) => {
            let h = mfs.fibration_class.clone().expect("validated");
            match d {
                8 => {
                    let sec = hirzebruch_section(s, &h)?;
                    blocks.push(line_block(s, &[&sec + &h]));
                    blocks.push(line_block(s, &[sec]));
                }
                6 => {
                    blocks.push(line_block(s, &enumerate_r_classes(s, 1)?));
                    let rest: Vec<_> = enumerate_r_classes(s, 0)?.into_iter().filter(|x| *x != h).collect();
                    blocks.push(line_block(s, &rest));
                }
                5 => {
                    blocks.push(Block::single(e_bundle_object(s)?));
                    let rest: Vec<_> = enumerate_r_classes(s, 0)?.into_iter().filter(|x| *x != h).collect();
                    blocks.push(line_block(s, &rest));
                }
                d if d <= 4 => {
                    let oh = line_bundle_class(s, &-&h);
                    let span = script::perp_span(s, &[structure_sheaf(s), oh], &[]);
                    blocks.push(Block::opaque("ker pi_*", span));
                }
                d => return Err(Error::Input(format!("no standard decomposition for a degree-{d} conic bundle"))),
            }
            blocks.push(line_block(s, &[h]));
        }
        (MfsBase::Curve(_), _) => unreachable!("handled above"),
    }
    blocks.push(Block::single(o));
    Ok(Collection::new(s.clone(), blocks, true))
}

/// σ*(D) = (2 D·K / d) K - D on a degree-1 or degree-2 model.
pub fn geiser_bertini_involution(degree: i64, surface: &SurfaceModel) -> Result<IntMatrix> {
    if degree != 1 && degree != 2 {
        return Err(Error::Input(format!("covering involutions exist in degrees 1 and 2, not {degree}")));
    }
    if surface.degree() != degree {
        return Err(Error::Input(format!("model has degree {}, expected {degree}", surface.degree())));
    }
    let k = surface.canonical_class();
    let cols: Vec<Vec<i64>> = (0..surface.picard_rank())
        .map(|i| {
            let e = surface.basis_vector(i);
            let c = 2 * surface.dot(&e, &k) / degree;
            (&(c * &k) - &e).0
        })
        .collect();
    Ok(IntMatrix::from_cols(&cols))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum LinkType {
    I,
    II,
    III,
    IV,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum LinkBase {
    Point,
    Curve,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct LinkDescriptor {
    pub link_type: LinkType,
    /// (K² of X1, K² of the roof if recorded, K² of X2).
    pub degrees: (i64, Option<i64>, i64),
    pub base: LinkBase,
}

impl fmt::Display for LinkDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, z, b) = self.degrees;
        match z {
            Some(z) => write!(f, "{:?} ({a},{z},{b}) over {:?}", self.link_type, self.base),
            None => write!(f, "{:?} ({a},{b}) over {:?}", self.link_type, self.base),
        }
    }
}

const TYPE_I: [(i64, i64); 4] = [(9, 8), (9, 5), (8, 6), (4, 3)];
const TYPE_II_SYMMETRIC: [(i64, i64); 5] = [(9, 6), (9, 3), (8, 4), (6, 4), (6, 3)];
const TYPE_II_ASYMMETRIC: [(i64, i64, i64); 4] = [(9, 7, 8), (9, 4, 5), (8, 5, 6), (8, 3, 5)];

/// Membership in the numerical classification of Sarkisov links between
/// rational surfaces.
pub fn validate_link(d: &LinkDescriptor) -> bool {
    let (a, z, b) = d.degrees;
    match (d.link_type, d.base) {
        (LinkType::I, LinkBase::Point) => TYPE_I.contains(&(a, b)) && z.is_none_or(|z| z == b),
        (LinkType::III, LinkBase::Point) => TYPE_I.contains(&(b, a)) && z.is_none_or(|z| z == a),
        (LinkType::II, LinkBase::Curve) => a == b && a <= 8 && z.is_none_or(|z| z < a),
        (LinkType::II, LinkBase::Point) => {
            let Some(z) = z else { return false };
            if a == b {
                (z == 1 && [9, 8, 6, 5, 4, 3, 2].contains(&a))
                    || (z == 2 && [9, 8, 6, 5, 4, 3].contains(&a))
                    || TYPE_II_SYMMETRIC.contains(&(a, z))
            } else {
                TYPE_II_ASYMMETRIC.contains(&(a, z, b)) || TYPE_II_ASYMMETRIC.contains(&(b, z, a))
            }
        }
        (LinkType::IV, LinkBase::Point) => a == b && [1, 2, 4, 8].contains(&a) && z.is_none_or(|z| z == a),
        _ => false,
    }
}

/// Every descriptor of the classification, roof degree included.
pub fn classification_list() -> Vec<LinkDescriptor> {
    let mut out = Vec::new();
    let mk = |t, a, z, b, base| LinkDescriptor { link_type: t, degrees: (a, z, b), base };
    for (a, b) in TYPE_I {
        out.push(mk(LinkType::I, a, Some(b), b, LinkBase::Point));
        out.push(mk(LinkType::III, b, Some(b), a, LinkBase::Point));
    }
    for d in [9, 8, 6, 5, 4, 3, 2] {
        out.push(mk(LinkType::II, d, Some(1), d, LinkBase::Point));
    }
    for d in [9, 8, 6, 5, 4, 3] {
        out.push(mk(LinkType::II, d, Some(2), d, LinkBase::Point));
    }
    for (d, z) in TYPE_II_SYMMETRIC {
        out.push(mk(LinkType::II, d, Some(z), d, LinkBase::Point));
    }
    for (a, z, b) in TYPE_II_ASYMMETRIC {
        out.push(mk(LinkType::II, a, Some(z), b, LinkBase::Point));
        out.push(mk(LinkType::II, b, Some(z), a, LinkBase::Point));
    }
    for d in [1, 2, 4, 8] {
        out.push(mk(LinkType::IV, d, Some(d), d, LinkBase::Point));
    }
    out
}

const LINK_FILES: [&str; 6] = [
    include_str!("../../data/links/type_i.links"),
    include_str!("../../data/links/type_ii_point.links"),
    include_str!("../../data/links/type_ii_serre.links"),
    include_str!("../../data/links/type_ii_curve.links"),
    include_str!("../../data/links/type_iv.links"),
    include_str!("../../data/links/refinements.links"),
];

fn all_stanzas() -> Result<Vec<script::Stanza>> {
    let mut out = Vec::new();
    for f in LINK_FILES {
        out.extend(script::parse_stanzas(f)?);
    }
    Ok(out)
}

/// Catalog ids in file order.
pub fn catalog_ids() -> Vec<String> {
    all_stanzas().expect("embedded link data parses").into_iter().map(|s| s.id).collect()
}

pub fn link_script(id: &str) -> Result<LinkScript> {
    let st = all_stanzas()?
        .into_iter()
        .find(|s| s.id == id)
        .ok_or_else(|| Error::Input(format!("no link `{id}` in the catalog")))?;
    script::build_script(&st)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_shapes() {
        let sizes = |c: &Collection| c.blocks().iter().map(Block::len).collect::<Vec<_>>();
        let x6 = standard_sod(&MoriFibreSpace::over_point(SurfaceModel::p2_blown_up(3))).unwrap();
        assert_eq!(sizes(&x6), vec![2, 3, 1]);
        let x5 = SurfaceModel::p2_blown_up(4);
        let h5 = DivisorClass(vec![2, -1, -1, -1, -1]);
        let c = standard_sod(&MoriFibreSpace::over_p1(x5.clone(), h5)).unwrap();
        assert_eq!(sizes(&c), vec![1, 4, 1, 1]);
        assert_eq!(c.blocks()[0].objects[0].cls, e_bundle_class(&x5).unwrap());
        let x4 = standard_sod(&MoriFibreSpace::over_point(SurfaceModel::p2_blown_up(5))).unwrap();
        assert_eq!(sizes(&x4), vec![7, 1]);
        assert!(x4.blocks()[0].is_opaque());
        for c in [x6, c, x4] {
            assert!(crate::mutation::check_collection(&c).ok);
        }
    }

    #[test]
    fn malformed_spaces() {
        assert!(standard_sod(&MoriFibreSpace::over_point(SurfaceModel::p2_blown_up(2))).is_err());
        assert!(standard_sod(&MoriFibreSpace::over_point(SurfaceModel::p2_blown_up(1))).is_err());
        assert!(MoriFibreSpace::over_curve(1, 1).validate().is_err());
        assert!(MoriFibreSpace::over_curve(1, 0).validate().is_ok());
        assert!(MoriFibreSpace::over_curve(2, -7).validate().is_err());
        assert!(matches!(standard_sod(&MoriFibreSpace::over_curve(2, -8)), Err(Error::Unsupported(_))));
    }

    #[test]
    fn e_bundle() {
        let x5 = SurfaceModel::p2_blown_up(4);
        let e = e_bundle_class(&x5).unwrap();
        assert_eq!(e.rank, 2);
        assert_eq!(e.c1, x5.canonical_class());
        assert_eq!(crate::ktheory::euler_pairing(&x5, &e, &e), 1);
    }

    #[test]
    fn richness() {
        assert!(birationally_rich(&MoriFibreSpace::over_point(SurfaceModel::p2_blown_up(4))));
        let x5 = SurfaceModel::p2_blown_up(5);
        assert!(!birationally_rich(&MoriFibreSpace::over_p1(x5, DivisorClass(vec![1, -1, 0, 0, 0, 0]))));
        assert!(!birationally_rich(&MoriFibreSpace::over_curve(2, -8)));
    }

    #[test]
    fn involution_matrices() {
        for (deg, n) in [(1, 8), (2, 7)] {
            let s = SurfaceModel::p2_blown_up(n);
            let m = geiser_bertini_involution(deg, &s).unwrap();
            let k = s.canonical_class();
            assert_eq!(m.mul_vec(&k.0), k.0);
            assert_eq!(m.mul(&m), IntMatrix::identity(s.picard_rank()));
            assert_eq!(m.transpose().mul(&s.gram()).mul(&m), s.gram());
        }
        assert!(geiser_bertini_involution(3, &SurfaceModel::p2_blown_up(6)).is_err());
    }

    #[test]
    fn classification_examples() {
        let d = |t, a, z, b, base| LinkDescriptor { link_type: t, degrees: (a, z, b), base };
        assert!(validate_link(&d(LinkType::II, 9, Some(7), 8, LinkBase::Point)));
        assert!(!validate_link(&d(LinkType::IV, 6, None, 6, LinkBase::Point)));
        assert!(!validate_link(&d(LinkType::I, 7, None, 6, LinkBase::Point)));
        assert!(classification_list().iter().all(validate_link));
    }
}
