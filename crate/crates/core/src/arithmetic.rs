//! Atom bookkeeping over non-closed fields: small atoms (L, a) recorded by
//! the field degree [L:k], the index of a and a symbolic Brauer label, the
//! index formula ind(X)·|Am(X)| = |DAm(X)|, and comparison of atom lists.
//!
//! Brauer classes are labels only. Indices, Am(X) and ind(X) are inputs.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct SmallAtom {
    pub field_degree: u32,
    pub brauer_index: u32,
    pub brauer_label: String,
}

impl SmallAtom {
    pub fn new(field_degree: u32, brauer_index: u32, brauer_label: &str) -> Result<Self> {
        if field_degree == 0 || brauer_index == 0 {
            return Err(Error::Input("field degree and Brauer index are positive".into()));
        }
        let label = normalize_label(brauer_label);
        if (brauer_index == 1) != (label == "0") {
            return Err(Error::Input(format!(
                "atom ({field_degree}, {brauer_index}, \"{label}\"): index 1 goes with label \"0\" and only with it"
            )));
        }
        Ok(SmallAtom { field_degree, brauer_index, brauer_label: label })
    }

    pub fn trivial(field_degree: u32) -> Self {
        SmallAtom { field_degree, brauer_index: 1, brauer_label: "0".into() }
    }

    pub fn is_trivial(&self) -> bool {
        self.brauer_index == 1
    }
}

/// Labels compare after dropping whitespace, so `a2 + b2` equals `a2+b2`.
pub fn normalize_label(label: &str) -> String {
    label.chars().filter(|c| !c.is_whitespace()).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum ProfileAtom {
    Small(SmallAtom),
    Opaque { shape: String, degree: i64 },
}

impl ProfileAtom {
    pub fn is_trivial(&self) -> bool {
        matches!(self, ProfileAtom::Small(a) if a.is_trivial())
    }
}

impl fmt::Display for ProfileAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProfileAtom::Small(a) => write!(f, "({}, {}, \"{}\")", a.field_degree, a.brauer_index, a.brauer_label),
            ProfileAtom::Opaque { shape, degree } => write!(f, "opaque({shape}, {degree})"),
        }
    }
}

/// Index of the class of an atom after base change to an extension of the
/// given degree, as supplied by the user.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Restriction {
    pub label: String,
    pub extension_degree: u32,
    pub index: u32,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct AtomProfile {
    pub name: String,
    pub atoms: Vec<ProfileAtom>,
    pub amitsur_order: Option<u64>,
    pub surface_index: Option<u64>,
    pub restrictions: Vec<Restriction>,
}

impl AtomProfile {
    pub fn small(name: &str, atoms: &[(u32, u32, &str)]) -> Result<Self> {
        let atoms = atoms
            .iter()
            .map(|&(d1, d2, l)| SmallAtom::new(d1, d2, l).map(ProfileAtom::Small))
            .collect::<Result<Vec<_>>>()?;
        Ok(AtomProfile { name: name.into(), atoms, ..Default::default() })
    }

    pub fn with_am_ind(mut self, am: u64, ind: u64) -> Self {
        self.amitsur_order = Some(am);
        self.surface_index = Some(ind);
        self
    }

    pub fn concat(&self, other: &AtomProfile) -> AtomProfile {
        let mut atoms = self.atoms.clone();
        atoms.extend(other.atoms.iter().cloned());
        AtomProfile { name: format!("{}+{}", self.name, other.name), atoms, ..Default::default() }
    }
}

/// |DAm| as the product of the atom indices.
pub fn dam_order(p: &AtomProfile) -> Result<u64> {
    p.atoms.iter().try_fold(1u64, |acc, a| match a {
        ProfileAtom::Small(s) => Ok(acc * u64::from(s.brauer_index)),
        ProfileAtom::Opaque { .. } => Err(Error::Precondition(format!("profile `{}` has an opaque atom {a}", p.name))),
    })
}

/// ind(X)·|Am(X)| = |DAm(X)|.
pub fn index_formula_check(p: &AtomProfile) -> Result<bool> {
    let (Some(am), Some(ind)) = (p.amitsur_order, p.surface_index) else {
        return Err(Error::Precondition(format!("profile `{}` needs both am and ind", p.name)));
    };
    Ok(am * ind == dam_order(p)?)
}

pub fn is_rational_profile(p: &AtomProfile) -> bool {
    p.atoms.iter().all(ProfileAtom::is_trivial)
}

pub fn is_rich_profile(p: &AtomProfile) -> bool {
    p.atoms.iter().all(|a| matches!(a, ProfileAtom::Small(_)))
}

fn nontrivial(p: &AtomProfile) -> Vec<ProfileAtom> {
    let mut v: Vec<ProfileAtom> = p.atoms.iter().filter(|a| !a.is_trivial()).cloned().collect();
    v.sort();
    v
}

/// Equality of atom multisets after deleting trivial atoms. For profiles with
/// opaque atoms this is a comparison only, with no birationality verdict.
pub fn same_nontrivial_atoms(p: &AtomProfile, q: &AtomProfile) -> bool {
    nontrivial(p) == nontrivial(q)
}

/// Consistency warnings for a minimal degree-6 profile
/// {(2, ≤3), (3, ≤2), (1, 1)}.
pub fn dp6_consistency(p: &AtomProfile) -> Result<Vec<String>> {
    let mut small: Vec<&SmallAtom> = Vec::new();
    for a in &p.atoms {
        match a {
            ProfileAtom::Small(s) => small.push(s),
            ProfileAtom::Opaque { .. } => return Err(Error::Precondition("degree-6 profile has no opaque atoms".into())),
        }
    }
    let find = |d: u32| {
        let v: Vec<&&SmallAtom> = small.iter().filter(|s| s.field_degree == d).collect();
        (v.len() == 1).then(|| *v[0])
    };
    let (Some(quad), Some(cubic), Some(base)) = (find(2), find(3), find(1)) else {
        return Err(Error::Precondition(format!("profile `{}` is not of shape (2,*),(3,*),(1,1)", p.name)));
    };
    if small.len() != 3 || quad.brauer_index > 3 || cubic.brauer_index > 2 || !base.is_trivial() {
        return Err(Error::Precondition(format!("profile `{}` is not of shape (2,<=3),(3,<=2),(1,1)", p.name)));
    }
    let mut warnings = Vec::new();
    if 3 % quad.brauer_index != 0 {
        warnings.push(format!("index {} of the quadratic atom does not divide 3", quad.brauer_index));
    }
    if 2 % cubic.brauer_index != 0 {
        warnings.push(format!("index {} of the cubic atom does not divide 2", cubic.brauer_index));
    }
    let product = u64::from(quad.brauer_index * cubic.brauer_index);
    if let Some(ind) = p.surface_index {
        if ![1, 2, 3, 6].contains(&ind) {
            warnings.push(format!("ind(X) = {ind} is not in {{1, 2, 3, 6}}"));
        }
        if ind != product {
            warnings.push(format!("ind(X) = {ind} differs from the product of atom indices {product}"));
        }
    }
    for r in &p.restrictions {
        let Some(atom) = [quad, cubic, base].into_iter().find(|a| a.brauer_label == normalize_label(&r.label)) else {
            warnings.push(format!("restriction refers to unknown label \"{}\"", r.label));
            continue;
        };
        if atom.brauer_index % r.index != 0 {
            warnings.push(format!(
                "restriction of \"{}\" has index {} not dividing {}",
                atom.brauer_label, r.index, atom.brauer_index
            ));
        }
        // The quadratic field splits the cubic atom and vice versa.
        let splits = (atom.field_degree == 3 && r.extension_degree % 2 == 0)
            || (atom.field_degree == 2 && r.extension_degree % 3 == 0);
        if splits && r.index != 1 {
            warnings.push(format!(
                "\"{}\" must split over an extension of degree {}, got index {}",
                atom.brauer_label, r.extension_degree, r.index
            ));
        }
    }
    Ok(warnings)
}

/// Example profiles of the toric minimal models. Am and ind are data: the
/// Severi-Brauer values are the standard ones for a division algebra of
/// degree 3, the other two are the values for which the index formula is
/// expected to hold with the listed indices.
pub fn catalog_profiles() -> Vec<AtomProfile> {
    let mk = |name: &str, atoms: &[(u32, u32, &str)]| AtomProfile::small(name, atoms).expect("catalog profile");
    let mut out = vec![
        mk("severi-brauer", &[(1, 1, "0"), (1, 3, "a3"), (1, 3, "2a3")]).with_am_ind(3, 3),
        mk("dp8-minimal", &[(1, 1, "0"), (2, 2, "a2"), (1, 4, "a4")]).with_am_ind(4, 2),
        mk("dp6-minimal", &[(2, 3, "a3"), (3, 2, "a2"), (1, 1, "0")]).with_am_ind(1, 6),
        mk("conic-product", &[(1, 1, "0"), (1, 2, "a2"), (1, 2, "b2"), (1, 2, "a2+b2")]).with_am_ind(4, 2),
        mk("p2", &[(1, 1, "0"), (1, 1, "0"), (1, 1, "0")]).with_am_ind(1, 1),
        mk("p1xp1", &[(1, 1, "0"), (1, 1, "0"), (1, 1, "0"), (1, 1, "0")]).with_am_ind(1, 1),
        mk("dp6-split", &[(2, 1, "0"), (3, 1, "0"), (1, 1, "0")]).with_am_ind(1, 1),
    ];
    out.push(AtomProfile {
        name: "dp4-minimal".into(),
        atoms: vec![ProfileAtom::Opaque { shape: "O^perp".into(), degree: 4 }, ProfileAtom::Small(SmallAtom::trivial(1))],
        ..Default::default()
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(atoms: &[(u32, u32, &str)]) -> AtomProfile {
        AtomProfile::small("t", atoms).unwrap()
    }

    #[test]
    fn small_atom_invariant() {
        assert!(SmallAtom::new(1, 1, "0").is_ok());
        assert!(SmallAtom::new(1, 1, "a").is_err());
        assert!(SmallAtom::new(1, 3, "0").is_err());
        assert!(SmallAtom::new(0, 1, "0").is_err());
    }

    #[test]
    fn dam_examples() {
        assert_eq!(dam_order(&p(&[(1, 1, "0"), (2, 1, "0")])).unwrap(), 1);
        assert_eq!(dam_order(&p(&[(1, 1, "0"), (1, 3, "a3"), (1, 3, "2a3")])).unwrap(), 9);
        assert_eq!(dam_order(&p(&[(1, 1, "0"), (2, 2, "a2"), (1, 4, "a4")])).unwrap(), 8);
        let dp4 = &catalog_profiles()[7];
        assert!(dam_order(dp4).is_err());
    }

    #[test]
    fn index_formula() {
        let sb = p(&[(1, 1, "0"), (1, 3, "a3"), (1, 3, "2a3")]).with_am_ind(3, 3);
        assert!(index_formula_check(&sb).unwrap());
        assert!(index_formula_check(&p(&[(1, 1, "0")]).with_am_ind(1, 1)).unwrap());
        assert!(!index_formula_check(&p(&[(1, 1, "0"), (1, 1, "0")]).with_am_ind(1, 2)).unwrap());
        assert!(index_formula_check(&p(&[(1, 1, "0")])).is_err());
        for prof in catalog_profiles().iter().filter(|x| is_rich_profile(x)) {
            assert!(index_formula_check(prof).unwrap(), "{}", prof.name);
        }
    }

    #[test]
    fn predicates() {
        let cat = catalog_profiles();
        let by = |n: &str| cat.iter().find(|x| x.name == n).unwrap();
        assert!(is_rational_profile(by("p2")) && is_rich_profile(by("p2")));
        assert!(!is_rational_profile(by("severi-brauer")) && is_rich_profile(by("severi-brauer")));
        assert!(!is_rich_profile(by("dp4-minimal")) && !is_rational_profile(by("dp4-minimal")));
        assert!(is_rational_profile(by("dp6-split")));
    }

    #[test]
    fn nontrivial_comparison() {
        assert!(same_nontrivial_atoms(&p(&[(1, 3, "a3")]), &p(&[(1, 3, "a3"), (1, 1, "0")])));
        assert!(same_nontrivial_atoms(&p(&[(2, 3, "b"), (3, 1, "0")]), &p(&[(2, 3, " b "), (3, 1, "0")])));
        assert!(!same_nontrivial_atoms(&p(&[(1, 2, "a")]), &p(&[(1, 2, "a'")])));
    }

    #[test]
    fn dp6_warnings() {
        let shape = p(&[(2, 3, "a3"), (3, 2, "a2"), (1, 1, "0")]);
        assert!(dp6_consistency(&shape.clone().with_am_ind(1, 6)).unwrap().is_empty());
        assert!(!dp6_consistency(&shape.clone().with_am_ind(1, 5)).unwrap().is_empty());
        let split = p(&[(2, 1, "0"), (3, 1, "0"), (1, 1, "0")]).with_am_ind(1, 1);
        assert!(dp6_consistency(&split).unwrap().is_empty());
        assert!(dp6_consistency(&p(&[(1, 3, "a3")])).is_err());

        let mut r = shape.with_am_ind(1, 6);
        r.restrictions.push(Restriction { label: "a2".into(), extension_degree: 2, index: 2 });
        assert_eq!(dp6_consistency(&r).unwrap().len(), 1);
        r.restrictions[0].index = 1;
        assert!(dp6_consistency(&r).unwrap().is_empty());
    }
}
