//! Finite groups acting on Picard lattices: fixed ranks, orbits, invariant
//! collections, atoms of a G-surface, H¹(G, Pic) and the Burnside-group
//! class of a sequence of orbit blow-ups and blow-downs.
//!
//! A group is given by integer matrices acting on column vectors of divisor
//! coordinates. On K₀ an element acts by (r, c1, χ) ↦ (r, g·c1, χ).

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;

use serde::Serialize;

use crate::catalog::{standard_sod, MoriFibreSpace};
use crate::error::{Error, Result};
use crate::ktheory::{torsion_class, KClass};
use crate::lattice::{enumerate_r_classes, DivisorClass, SurfaceModel};
use crate::linalg::{integer_kernel, smith_invariants, solve_in_basis, IntMatrix};
use crate::mutation::Collection;

pub const DEFAULT_CLOSURE_CAP: usize = 10_000;
pub const DEFAULT_H1_CAP: usize = 48;
pub const MINIMALITY_LABEL: &str = "numerical proxy";

/// Enumerated closure of a finite set of invertible integer matrices.
#[derive(Clone, Debug)]
pub struct MatrixGroup {
    dim: usize,
    generators: Vec<IntMatrix>,
    elements: Vec<IntMatrix>,
    index: HashMap<IntMatrix, usize>,
}

impl MatrixGroup {
    pub fn generate(dim: usize, generators: Vec<IntMatrix>, cap: usize) -> Result<Self> {
        for g in &generators {
            if g.rows() != dim || g.cols() != dim {
                return Err(Error::Input(format!("generator is {}x{}, lattice has rank {dim}", g.rows(), g.cols())));
            }
            if g.det().abs() != 1 {
                return Err(Error::Input(format!("generator is not invertible over Z:\n{g}")));
            }
        }
        let id = IntMatrix::identity(dim);
        let mut elements = vec![id.clone()];
        let mut index = HashMap::from([(id, 0)]);
        let mut queue = VecDeque::from([0]);
        while let Some(i) = queue.pop_front() {
            for g in &generators {
                let p = g.mul(&elements[i]);
                if index.contains_key(&p) {
                    continue;
                }
                if elements.len() >= cap {
                    return Err(Error::Precondition(format!("group closure exceeds {cap} elements")));
                }
                index.insert(p.clone(), elements.len());
                queue.push_back(elements.len());
                elements.push(p);
            }
        }
        Ok(MatrixGroup { dim, generators, elements, index })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[IntMatrix] {
        &self.generators
    }

    /// All elements; index 0 is the identity.
    pub fn elements(&self) -> &[IntMatrix] {
        &self.elements
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn index_of(&self, m: &IntMatrix) -> Option<usize> {
        self.index.get(m).copied()
    }

    pub fn mul_index(&self, i: usize, j: usize) -> usize {
        self.index[&self.elements[i].mul(&self.elements[j])]
    }

    pub fn inverse_index(&self, i: usize) -> usize {
        (0..self.order()).find(|&j| self.mul_index(i, j) == 0).expect("finite group element has an inverse")
    }

    pub fn element_order(&self, i: usize) -> usize {
        let mut k = 1;
        let mut p = i;
        while p != 0 {
            p = self.mul_index(p, i);
            k += 1;
        }
        k
    }

    pub fn element_orders(&self) -> Vec<usize> {
        (0..self.order()).map(|i| self.element_order(i)).collect()
    }

    /// Index of an element generating the whole group, if it is cyclic.
    pub fn cyclic_generator(&self) -> Option<usize> {
        (0..self.order()).find(|&i| self.element_order(i) == self.order())
    }
}

/// A finite group acting on the Picard lattice of a surface model by
/// isometries fixing K.
#[derive(Clone, Debug)]
pub struct GroupAction {
    surface: SurfaceModel,
    group: MatrixGroup,
}

impl GroupAction {
    pub fn new(surface: SurfaceModel, generators: Vec<IntMatrix>) -> Result<Self> {
        Self::with_cap(surface, generators, DEFAULT_CLOSURE_CAP)
    }

    pub fn with_cap(surface: SurfaceModel, generators: Vec<IntMatrix>, cap: usize) -> Result<Self> {
        let n = surface.picard_rank();
        let m = surface.gram();
        let k = surface.canonical_class();
        for (i, g) in generators.iter().enumerate() {
            if g.rows() != n || g.cols() != n {
                return Err(Error::Input(format!("generator {} is {}x{}, Picard rank is {n}", i + 1, g.rows(), g.cols())));
            }
            if g.transpose().mul(&m).mul(g) != m {
                return Err(Error::Input(format!("generator {} does not preserve the intersection form", i + 1)));
            }
            if g.mul_vec(&k.0) != k.0 {
                return Err(Error::Input(format!("generator {} does not fix K", i + 1)));
            }
        }
        let group = MatrixGroup::generate(n, generators, cap)?;
        Ok(GroupAction { surface, group })
    }

    pub fn trivial(surface: SurfaceModel) -> Self {
        Self::new(surface, Vec::new()).expect("trivial group is valid")
    }

    /// Permutation of exceptional classes, `perm[i] = j` sending E_{i+1} to
    /// E_{j+1}, extended by the identity on the base part.
    pub fn permuting_exceptionals(surface: SurfaceModel, perms: &[Vec<usize>]) -> Result<Self> {
        let n = surface.picard_rank();
        let base = n - surface.blown_points();
        let mut gens = Vec::new();
        for p in perms {
            let mut g = IntMatrix::zeros(n, n);
            for i in 0..base {
                g[(i, i)] = 1;
            }
            if p.len() != surface.blown_points() {
                return Err(Error::Input(format!("permutation has {} entries, model has {} exceptionals", p.len(), surface.blown_points())));
            }
            for (i, &j) in p.iter().enumerate() {
                if j >= p.len() {
                    return Err(Error::Input(format!("permutation entry {j} out of range")));
                }
                g[(base + j, base + i)] = 1;
            }
            gens.push(g);
        }
        Self::new(surface, gens)
    }

    pub fn surface(&self) -> &SurfaceModel {
        &self.surface
    }

    pub fn group(&self) -> &MatrixGroup {
        &self.group
    }

    pub fn generators(&self) -> &[IntMatrix] {
        self.group.generators()
    }

    pub fn order(&self) -> usize {
        self.group.order()
    }

    pub fn act_divisor(&self, g: &IntMatrix, d: &DivisorClass) -> DivisorClass {
        DivisorClass(g.mul_vec(&d.0))
    }

    pub fn act_class(&self, g: &IntMatrix, k: &KClass) -> KClass {
        KClass::new(k.rank, self.act_divisor(g, &k.c1), k.chi)
    }

    /// Matrix of g on K₀ in the coordinates (r, c1, χ).
    pub fn k0_matrix(g: &IntMatrix) -> IntMatrix {
        let n = g.rows();
        let mut m = IntMatrix::zeros(n + 2, n + 2);
        m[(0, 0)] = 1;
        m[(n + 1, n + 1)] = 1;
        for i in 0..n {
            for j in 0..n {
                m[(i + 1, j + 1)] = g[(i, j)];
            }
        }
        m
    }

    fn stabilizer_of(&self, fixed: impl Fn(&IntMatrix) -> bool) -> Vec<usize> {
        (0..self.order()).filter(|&i| fixed(&self.group.elements()[i])).collect()
    }
}

/// Rank of the sublattice fixed by every element.
pub fn invariant_rank(a: &GroupAction) -> usize {
    let n = a.surface.picard_rank();
    if a.generators().is_empty() {
        return n;
    }
    let id = IntMatrix::identity(n);
    let stacked = IntMatrix::vstack(&a.generators().iter().map(|g| g.sub(&id)).collect::<Vec<_>>());
    integer_kernel(&stacked).len()
}

/// Orbit partition of a stable set of classes, in order of first appearance.
pub fn orbits(a: &GroupAction, classes: &[DivisorClass]) -> Result<Vec<Vec<DivisorClass>>> {
    let pos: HashMap<&DivisorClass, usize> = classes.iter().enumerate().map(|(i, c)| (c, i)).collect();
    let mut seen = vec![false; classes.len()];
    let mut out = Vec::new();
    for start in 0..classes.len() {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut members = vec![start];
        let mut queue = VecDeque::from([start]);
        while let Some(i) = queue.pop_front() {
            for g in a.generators() {
                let img = a.act_divisor(g, &classes[i]);
                let Some(&j) = pos.get(&img) else {
                    return Err(Error::Precondition(format!(
                        "class set is not stable: {} maps to {}",
                        a.surface.format_class(&classes[i]),
                        a.surface.format_class(&img)
                    )));
                };
                if !seen[j] {
                    seen[j] = true;
                    members.push(j);
                    queue.push_back(j);
                }
            }
        }
        members.sort_unstable();
        out.push(members.into_iter().map(|i| classes[i].clone()).collect());
    }
    Ok(out)
}

fn span_key(classes: &[KClass]) -> Vec<Vec<i64>> {
    crate::linalg::hermite_basis(&classes.iter().map(KClass::to_vec).collect::<Vec<_>>())
}

/// Every block is carried to itself by every generator: setwise up to sign
/// for exceptional blocks, as a K-span for opaque blocks.
pub fn is_invariant_collection(c: &Collection, a: &GroupAction) -> bool {
    if c.surface() != a.surface() {
        return false;
    }
    c.blocks().iter().all(|b| {
        let cls = b.classes();
        a.generators().iter().all(|g| {
            let img: Vec<KClass> = cls.iter().map(|k| a.act_class(g, k)).collect();
            if b.is_opaque() {
                span_key(&img) == span_key(&cls)
            } else {
                let mut x: Vec<_> = img.iter().map(KClass::sign_normalized).collect();
                let mut y: Vec<_> = cls.iter().map(KClass::sign_normalized).collect();
                x.sort_by_key(KClass::to_vec);
                y.sort_by_key(KClass::to_vec);
                x == y
            }
        })
    })
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Stabilizer {
    /// Sorted element indices of the lexicographically least conjugate.
    Subgroup(Vec<usize>),
    /// A stabilizer named by the user when no group is enumerated.
    Label(String),
}

/// Transitive G-set G/H, recorded by its size and the conjugacy class of H.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct TransitiveGSet {
    pub size: usize,
    pub stabilizer: Stabilizer,
}

impl TransitiveGSet {
    pub fn labelled(size: usize, label: impl Into<String>) -> Self {
        TransitiveGSet { size, stabilizer: Stabilizer::Label(label.into()) }
    }

    pub fn from_stabilizer(a: &GroupAction, subgroup: &[usize]) -> Result<Self> {
        let g = a.group();
        let mut h: Vec<usize> = subgroup.to_vec();
        h.sort_unstable();
        h.dedup();
        if h.first() != Some(&0) || h.iter().any(|&x| x >= g.order()) {
            return Err(Error::Input("stabilizer must contain the identity and only group elements".into()));
        }
        for &x in &h {
            for &y in &h {
                if h.binary_search(&g.mul_index(x, y)).is_err() {
                    return Err(Error::Input("stabilizer is not closed under multiplication".into()));
                }
            }
        }
        if !g.order().is_multiple_of(h.len()) {
            return Err(Error::Input("stabilizer order does not divide the group order".into()));
        }
        let mut best = h.clone();
        for x in 0..g.order() {
            let xi = g.inverse_index(x);
            let mut conj: Vec<usize> = h.iter().map(|&y| g.mul_index(g.mul_index(x, y), xi)).collect();
            conj.sort_unstable();
            if conj < best {
                best = conj;
            }
        }
        Ok(TransitiveGSet { size: g.order() / h.len(), stabilizer: Stabilizer::Subgroup(best) })
    }

    /// The G-set of an orbit of divisor classes.
    pub fn of_orbit(a: &GroupAction, orbit: &[DivisorClass]) -> Result<Self> {
        let Some(first) = orbit.first() else { return Err(Error::Input("empty orbit".into())) };
        let stab = a.stabilizer_of(|g| a.act_divisor(g, first) == *first);
        let t = Self::from_stabilizer(a, &stab)?;
        if t.size != orbit.len() {
            return Err(Error::Precondition(format!("orbit of size {} is not a single G-orbit", orbit.len())));
        }
        Ok(t)
    }

    fn of_class_orbit(a: &GroupAction, orbit: &[KClass]) -> Result<Self> {
        let first = &orbit[0];
        let stab = a.stabilizer_of(|g| a.act_class(g, first) == *first);
        let t = Self::from_stabilizer(a, &stab)?;
        if t.size != orbit.len() {
            return Err(Error::Precondition(format!("block orbit of size {} is not transitive", orbit.len())));
        }
        Ok(t)
    }
}

impl fmt::Display for TransitiveGSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.stabilizer {
            Stabilizer::Label(l) if l.is_empty() => write!(f, "[{}]", self.size),
            Stabilizer::Label(l) => write!(f, "[{}:{l}]", self.size),
            Stabilizer::Subgroup(h) if h.len() == 1 || self.size == 1 => write!(f, "[{}]", self.size),
            Stabilizer::Subgroup(h) => {
                let s: Vec<String> = h.iter().map(usize::to_string).collect();
                write!(f, "[{}:<{}>]", self.size, s.join(","))
            }
        }
    }
}

/// Element of the Burnside group: a signed multiset of transitive G-sets.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct BurnsideElement {
    terms: BTreeMap<TransitiveGSet, i64>,
}

impl BurnsideElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn of(gset: TransitiveGSet, coeff: i64) -> Self {
        let mut e = Self::zero();
        e.add_term(gset, coeff);
        e
    }

    pub fn add_term(&mut self, gset: TransitiveGSet, coeff: i64) {
        let c = self.terms.entry(gset.clone()).or_insert(0);
        *c += coeff;
        if *c == 0 {
            self.terms.remove(&gset);
        }
    }

    pub fn add(&self, other: &BurnsideElement) -> BurnsideElement {
        let mut out = self.clone();
        for (g, c) in &other.terms {
            out.add_term(g.clone(), *c);
        }
        out
    }

    pub fn neg(&self) -> BurnsideElement {
        BurnsideElement { terms: self.terms.iter().map(|(g, c)| (g.clone(), -c)).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&TransitiveGSet, i64)> {
        self.terms.iter().map(|(g, c)| (g, *c))
    }
}

impl fmt::Display for BurnsideElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (g, c)) in self.terms.iter().enumerate() {
            let sign = if *c < 0 { "-" } else if i > 0 { "+" } else { "" };
            if i > 0 {
                f.write_str(" ")?;
            }
            let m = c.abs();
            if m == 1 {
                write!(f, "{sign}{g}")?;
            } else {
                write!(f, "{sign}{m}{g}")?;
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum BirationalStep {
    BlowUp(TransitiveGSet),
    BlowDown(TransitiveGSet),
}

/// Sum of the contracted orbits minus the sum of the blown-up orbits.
pub fn burnside_invariant(steps: &[BirationalStep]) -> BurnsideElement {
    let mut out = BurnsideElement::zero();
    for s in steps {
        match s {
            BirationalStep::BlowUp(z) => out.add_term(z.clone(), -1),
            BirationalStep::BlowDown(z) => out.add_term(z.clone(), 1),
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum OpaqueShape {
    /// O^⊥ on a minimal del Pezzo surface of degree at most 4.
    DelPezzoPerp,
    /// Kernel of the pushforward on a conic bundle of degree at most 4.
    ConicKernel,
    /// Marker for a minimal model with nef canonical class.
    KNef,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum AtomKind {
    PermutationType { gset: TransitiveGSet, twist: Option<String> },
    Opaque { shape: OpaqueShape, degree: i64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Atom {
    pub kind: AtomKind,
    /// K-classes of the generating block (or a span basis for opaque atoms).
    pub objects: Vec<KClass>,
}

impl Atom {
    pub fn is_untwisted_permutation(&self) -> bool {
        matches!(self.kind, AtomKind::PermutationType { twist: None, .. })
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            AtomKind::PermutationType { gset, twist: None } => write!(f, "perm{gset}"),
            AtomKind::PermutationType { gset, twist: Some(t) } => write!(f, "perm{gset}^{t}"),
            AtomKind::Opaque { shape, degree } => {
                let s = match shape {
                    OpaqueShape::DelPezzoPerp => "O^perp",
                    OpaqueShape::ConicKernel => "ker pi_*",
                    OpaqueShape::KNef => "K-nef",
                };
                write!(f, "opaque({s}, degree {degree})")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ContractionTarget {
    Point,
    /// Conic bundle with the given fibre class on the minimal model.
    ConicBundle(DivisorClass),
    KNef,
}

/// Contraction of the trailing `orbits` blow-up orbits onto a minimal model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Contraction {
    pub orbits: usize,
    pub target: ContractionTarget,
    /// (1-based position among the minimal model's atoms, twist label).
    pub twists: Vec<(usize, String)>,
}

fn pad(k: &KClass, len: usize) -> KClass {
    let mut c = k.c1.0.clone();
    c.resize(len, 0);
    KClass::new(k.rank, DivisorClass(c), k.chi)
}

/// Atoms of a G-surface read off a contraction: one untwisted permutation
/// atom per contracted orbit (last blown up first), then the atoms of the
/// standard decomposition of the minimal model.
pub fn atom_multiset(surface: &SurfaceModel, a: &GroupAction, contraction: &Contraction) -> Result<Vec<Atom>> {
    if a.surface() != surface {
        return Err(Error::Input("action is defined on a different surface".into()));
    }
    let minimal = surface.contract_last_orbits(contraction.orbits)?;
    let orbit_sizes = surface.blowup_orbits();
    let kept = orbit_sizes.len() - contraction.orbits;
    let mut first = minimal.blown_points();
    let mut ranges = Vec::new();
    for &m in &orbit_sizes[kept..] {
        ranges.push(first..first + m);
        first += m;
    }
    let contracted: Vec<DivisorClass> =
        ranges.iter().flat_map(|r| r.clone()).map(|i| surface.basis_vector(surface.exceptional_index(i + 1))).collect();

    let mut atoms = Vec::new();
    for r in ranges.iter().rev() {
        let es: Vec<DivisorClass> = r.clone().map(|i| surface.basis_vector(surface.exceptional_index(i + 1))).collect();
        for g in a.generators() {
            for e in &es {
                let img = a.act_divisor(g, e);
                if !contracted.contains(&img) {
                    return Err(Error::Input(format!(
                        "contraction inconsistent with the action: {} maps to {}",
                        surface.format_class(e),
                        surface.format_class(&img)
                    )));
                }
            }
        }
        let parts = orbits(a, &es).map_err(|e| Error::Input(format!("contraction inconsistent with the action: {e}")))?;
        if parts.len() != 1 {
            return Err(Error::Input(format!("blown-up orbit of size {} splits into {} G-orbits", es.len(), parts.len())));
        }
        let gset = TransitiveGSet::of_orbit(a, &es)?;
        let objects = es.iter().map(|e| torsion_class(surface, e, -1)).collect::<Result<Vec<_>>>()?;
        atoms.push(Atom { kind: AtomKind::PermutationType { gset, twist: None }, objects });
    }

    let n = surface.picard_rank();
    let mut std_atoms = Vec::new();
    match &contraction.target {
        ContractionTarget::KNef => {
            let objects = (0..minimal.picard_rank() + 2)
                .map(|i| {
                    let mut v = vec![0; minimal.picard_rank() + 2];
                    v[i] = 1;
                    pad(&KClass::from_vec(&v), n)
                })
                .collect();
            std_atoms.push(Atom { kind: AtomKind::Opaque { shape: OpaqueShape::KNef, degree: minimal.degree() }, objects });
        }
        target => {
            let mfs = match target {
                ContractionTarget::Point => MoriFibreSpace::over_point(minimal.clone()),
                ContractionTarget::ConicBundle(h) => MoriFibreSpace::over_p1(minimal.clone(), h.clone()),
                ContractionTarget::KNef => unreachable!(),
            };
            let shape = match target {
                ContractionTarget::Point => OpaqueShape::DelPezzoPerp,
                _ => OpaqueShape::ConicKernel,
            };
            let sod = standard_sod(&mfs)?;
            for b in sod.blocks() {
                let cls: Vec<KClass> = b.classes().iter().map(|k| pad(k, n)).collect();
                if b.is_opaque() {
                    std_atoms.push(Atom { kind: AtomKind::Opaque { shape, degree: minimal.degree() }, objects: cls });
                    continue;
                }
                for orbit in class_orbits(a, &cls)? {
                    let gset = TransitiveGSet::of_class_orbit(a, &orbit)?;
                    std_atoms.push(Atom { kind: AtomKind::PermutationType { gset, twist: None }, objects: orbit });
                }
            }
        }
    }
    for (pos, label) in &contraction.twists {
        let Some(atom) = std_atoms.get_mut(pos.wrapping_sub(1)) else {
            return Err(Error::Input(format!("twist refers to atom {pos}, minimal model has {}", std_atoms.len())));
        };
        match &mut atom.kind {
            AtomKind::PermutationType { twist, .. } => *twist = Some(label.clone()),
            AtomKind::Opaque { .. } => return Err(Error::Input(format!("atom {pos} is opaque and carries no twist"))),
        }
    }
    atoms.extend(std_atoms);
    Ok(atoms)
}

fn class_orbits(a: &GroupAction, cls: &[KClass]) -> Result<Vec<Vec<KClass>>> {
    let mut seen = vec![false; cls.len()];
    let mut out = Vec::new();
    for s in 0..cls.len() {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut members = vec![s];
        let mut queue = VecDeque::from([s]);
        while let Some(i) = queue.pop_front() {
            for g in a.generators() {
                let img = a.act_class(g, &cls[i]);
                let Some(j) = cls.iter().position(|c| *c == img) else {
                    return Err(Error::Input(format!("standard block is not stable under the action: {img} is missing")));
                };
                if !seen[j] {
                    seen[j] = true;
                    members.push(j);
                    queue.push_back(j);
                }
            }
        }
        members.sort_unstable();
        out.push(members.into_iter().map(|i| cls[i].clone()).collect());
    }
    Ok(out)
}

/// H¹(G, L) for a finite matrix group acting on Z^n, as its invariant
/// factors (empty for the trivial group).
///
/// Cocycles are cut out of C¹ = Map(G, L) by f(sh) = s f(h) + f(s) for s
/// ranging over the generators and the identity; by induction on word
/// length these rows imply the condition for every pair.
pub fn h1_module(group: &MatrixGroup) -> Result<Vec<i64>> {
    h1_with_rows(group, true)
}

fn h1_with_rows(group: &MatrixGroup, generators_only: bool) -> Result<Vec<i64>> {
    let n = group.dim();
    let ord = group.order();
    let els = group.elements();
    let row_elems: Vec<usize> = if generators_only {
        let mut v = vec![0];
        v.extend(group.generators().iter().map(|g| group.index_of(g).expect("generator in closure")));
        v
    } else {
        (0..ord).collect()
    };
    let mut d1 = IntMatrix::zeros(row_elems.len() * ord * n, ord * n);
    for (ri, &s) in row_elems.iter().enumerate() {
        for h in 0..ord {
            let sh = group.mul_index(s, h);
            let base = (ri * ord + h) * n;
            for i in 0..n {
                for j in 0..n {
                    d1[(base + i, h * n + j)] += els[s][(i, j)];
                }
                d1[(base + i, sh * n + i)] -= 1;
                d1[(base + i, s * n + i)] += 1;
            }
        }
    }
    let z1 = integer_kernel(&d1);
    let id = IntMatrix::identity(n);
    let mut b = IntMatrix::zeros(z1.len(), n);
    for j in 0..n {
        let mut col = vec![0; ord * n];
        for (g, m) in els.iter().enumerate() {
            let d = m.sub(&id);
            for i in 0..n {
                col[g * n + i] = d[(i, j)];
            }
        }
        let coords = solve_in_basis(&z1, &col)
            .ok_or_else(|| Error::Verification("coboundary is not a cocycle".into()))?;
        for (i, c) in coords.into_iter().enumerate() {
            b[(i, j)] = c;
        }
    }
    let inv = smith_invariants(&b);
    if inv.len() != z1.len() {
        return Err(Error::Verification("H¹ of a finite group came out infinite".into()));
    }
    Ok(inv.into_iter().filter(|&d| d > 1).collect())
}

/// H¹(G, Pic X) through the bar complex.
pub fn h1_picard(a: &GroupAction) -> Result<Vec<i64>> {
    h1_picard_capped(a, DEFAULT_H1_CAP)
}

pub fn h1_picard_capped(a: &GroupAction, cap: usize) -> Result<Vec<i64>> {
    if a.order() > cap {
        return Err(Error::Precondition(format!("group of order {} exceeds the H¹ cap {cap}", a.order())));
    }
    h1_module(a.group())
}

/// H¹ of a cyclic group as ker(Norm) / image(g - 1).
pub fn h1_cyclic(group: &MatrixGroup) -> Result<Vec<i64>> {
    let Some(gi) = group.cyclic_generator() else {
        return Err(Error::Precondition(format!("group of order {} is not cyclic", group.order())));
    };
    let n = group.dim();
    let g = &group.elements()[gi];
    let mut norm = IntMatrix::zeros(n, n);
    let mut p = IntMatrix::identity(n);
    for _ in 0..group.order() {
        norm = norm.sub(&p.neg());
        p = g.mul(&p);
    }
    let ker = integer_kernel(&norm);
    let gm1 = g.sub(&IntMatrix::identity(n));
    let mut b = IntMatrix::zeros(ker.len(), n);
    for j in 0..n {
        let coords = solve_in_basis(&ker, &gm1.col(j))
            .ok_or_else(|| Error::Verification("image of g - 1 escapes ker(Norm)".into()))?;
        for (i, c) in coords.into_iter().enumerate() {
            b[(i, j)] = c;
        }
    }
    let inv = smith_invariants(&b);
    if inv.len() != ker.len() {
        return Err(Error::Verification("cyclic H¹ came out infinite".into()));
    }
    Ok(inv.into_iter().filter(|&d| d > 1).collect())
}

/// Renders invariant factors as `0` or `Z/2 + Z/6`.
pub fn format_abelian(factors: &[i64]) -> String {
    if factors.is_empty() {
        "0".into()
    } else {
        factors.iter().map(|d| format!("Z/{d}")).collect::<Vec<_>>().join(" + ")
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PermutationCertificate {
    pub basis: Vec<KClass>,
    /// `permutations[g][i] = j`: generator g sends basis element i to j.
    pub permutations: Vec<Vec<usize>>,
    pub cycle_types: Vec<Vec<usize>>,
    pub matrices: Vec<IntMatrix>,
}

/// Assembles a K₀ basis from untwisted permutation atoms and checks that
/// every generator permutes it within each atom.
pub fn permutation_basis_certificate(
    surface: &SurfaceModel,
    atoms: &[Atom],
    a: &GroupAction,
) -> Result<PermutationCertificate> {
    if let Some(bad) = atoms.iter().find(|x| !x.is_untwisted_permutation()) {
        return Err(Error::Precondition(format!("atom {bad} is not an untwisted permutation atom")));
    }
    let basis: Vec<KClass> = atoms.iter().flat_map(|x| x.objects.clone()).collect();
    let owner: Vec<usize> = atoms.iter().enumerate().flat_map(|(i, x)| vec![i; x.objects.len()]).collect();
    let n = surface.picard_rank() + 2;
    if basis.len() != n {
        return Err(Error::Verification(format!("{} basis vectors for K0 of rank {n}", basis.len())));
    }
    let m = IntMatrix::from_rows(&basis.iter().map(KClass::to_vec).collect::<Vec<_>>());
    if m.det().abs() != 1 {
        return Err(Error::Verification(format!("atom objects span a sublattice of index {}", m.det().abs())));
    }
    let mut permutations = Vec::new();
    let mut matrices = Vec::new();
    let mut cycle_types = Vec::new();
    for (gi, g) in a.generators().iter().enumerate() {
        let mut perm = Vec::with_capacity(n);
        for (i, b) in basis.iter().enumerate() {
            let img = a.act_class(g, b);
            let j = basis
                .iter()
                .position(|x| *x == img)
                .filter(|&j| owner[j] == owner[i])
                .ok_or_else(|| Error::Verification(format!("generator {} does not permute atom {}", gi + 1, owner[i] + 1)))?;
            perm.push(j);
        }
        let mut pm = IntMatrix::zeros(n, n);
        for (i, &j) in perm.iter().enumerate() {
            pm[(j, i)] = 1;
        }
        cycle_types.push(cycle_type(&perm));
        matrices.push(pm);
        permutations.push(perm);
    }
    Ok(PermutationCertificate { basis, permutations, cycle_types, matrices })
}

fn cycle_type(perm: &[usize]) -> Vec<usize> {
    let mut seen = vec![false; perm.len()];
    let mut out = Vec::new();
    for s in 0..perm.len() {
        if seen[s] {
            continue;
        }
        let mut len = 0;
        let mut i = s;
        while !seen[i] {
            seen[i] = true;
            i = perm[i];
            len += 1;
        }
        out.push(len);
    }
    out.sort_unstable_by(|a, b| b.cmp(a));
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct MinimalityProxy {
    pub minimal: bool,
    /// Orbits of pairwise disjoint (-1)-classes.
    pub contractible_orbits: Vec<Vec<DivisorClass>>,
    pub label: &'static str,
}

/// G-minimality read off the lattice: no orbit of (-1)-classes is pairwise
/// disjoint. Curve geometry is not consulted.
pub fn minimality_proxy(a: &GroupAction) -> Result<MinimalityProxy> {
    let s = a.surface();
    let minus_one = enumerate_r_classes(s, -1)?;
    let contractible_orbits: Vec<_> = orbits(a, &minus_one)?
        .into_iter()
        .filter(|o| o.iter().enumerate().all(|(i, x)| o[i + 1..].iter().all(|y| s.dot(x, y) == 0)))
        .collect();
    Ok(MinimalityProxy { minimal: contractible_orbits.is_empty(), contractible_orbits, label: MINIMALITY_LABEL })
}

/// Matrix of the reflection D ↦ D + (D·α)α in a (-2)-class α.
pub fn reflection(surface: &SurfaceModel, alpha: &DivisorClass) -> Result<IntMatrix> {
    surface.check(alpha)?;
    if surface.dot(alpha, alpha) != -2 {
        return Err(Error::Input(format!("{} is not a (-2)-class", surface.format_class(alpha))));
    }
    let n = surface.picard_rank();
    let cols: Vec<Vec<i64>> = (0..n)
        .map(|j| {
            let e = surface.basis_vector(j);
            let c = surface.dot(&e, alpha);
            (&e + &(c * alpha)).0
        })
        .collect();
    Ok(IntMatrix::from_cols(&cols))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::standard_sod;
    use crate::lattice::Base;

    fn dp6() -> SurfaceModel {
        SurfaceModel::p2_blown_up(3)
    }

    /// S3 on the exceptionals together with the standard quadratic
    /// transformation: the dihedral group of order 12 of the hexagon.
    pub(crate) fn hexagon(s: &SurfaceModel) -> GroupAction {
        let cremona = IntMatrix::from_rows(&[
            vec![2, 1, 1, 1],
            vec![-1, 0, -1, -1],
            vec![-1, -1, 0, -1],
            vec![-1, -1, -1, 0],
        ]);
        let a = GroupAction::permuting_exceptionals(s.clone(), &[vec![1, 2, 0], vec![1, 0, 2]]).unwrap();
        let mut gens = a.generators().to_vec();
        gens.push(cremona);
        GroupAction::new(s.clone(), gens).unwrap()
    }

    fn s5_on_dp5() -> GroupAction {
        let s = SurfaceModel::p2_blown_up(4);
        let roots = [
            vec![0, 1, -1, 0, 0],
            vec![0, 0, 1, -1, 0],
            vec![0, 0, 0, 1, -1],
            vec![1, -1, -1, -1, 0],
        ];
        let gens = roots.iter().map(|r| reflection(&s, &DivisorClass(r.clone())).unwrap()).collect();
        GroupAction::new(s, gens).unwrap()
    }

    #[test]
    fn rejects_non_isometries() {
        let s = SurfaceModel::p2_blown_up(2);
        let bad = IntMatrix::from_rows(&[vec![1, 1, 0], vec![0, 1, 0], vec![0, 0, 1]]);
        assert!(GroupAction::new(s.clone(), vec![bad]).is_err());
        let neg = IntMatrix::identity(3).neg();
        assert!(GroupAction::new(s, vec![neg]).is_err());
    }

    #[test]
    fn closure_orders() {
        assert_eq!(hexagon(&dp6()).order(), 12);
        assert_eq!(s5_on_dp5().order(), 120);
        let s = dp6();
        let c3 = GroupAction::permuting_exceptionals(s, &[vec![1, 2, 0]]).unwrap();
        assert_eq!(c3.group().element_orders().iter().filter(|&&o| o == 3).count(), 2);
        assert!(c3.group().cyclic_generator().is_some());
        let capped = GroupAction::with_cap(SurfaceModel::p2_blown_up(4), s5_on_dp5().generators().to_vec(), 50);
        assert!(matches!(capped, Err(Error::Precondition(_))));
    }

    #[test]
    fn invariant_ranks() {
        assert_eq!(invariant_rank(&GroupAction::trivial(dp6())), 4);
        let swap = GroupAction::permuting_exceptionals(SurfaceModel::p2_blown_up(2), &[vec![1, 0]]).unwrap();
        // H and E1 + E2: the permutation of the basis has two cycles.
        assert_eq!(invariant_rank(&swap), 2);
        assert_eq!(invariant_rank(&hexagon(&dp6())), 1);
        assert_eq!(invariant_rank(&s5_on_dp5()), 1);
    }

    #[test]
    fn orbit_examples() {
        let s = SurfaceModel::p2_blown_up(2);
        let es = vec![s.basis_vector(1), s.basis_vector(2)];
        let triv = orbits(&GroupAction::trivial(s.clone()), &es).unwrap();
        assert_eq!(triv.len(), 2);
        let swap = GroupAction::permuting_exceptionals(s.clone(), &[vec![1, 0]]).unwrap();
        assert_eq!(orbits(&swap, &es).unwrap(), vec![es.clone()]);
        assert!(orbits(&swap, &es[..1]).is_err());

        let a = s5_on_dp5();
        let m1 = enumerate_r_classes(a.surface(), -1).unwrap();
        let o = orbits(&a, &m1).unwrap();
        assert_eq!(o.len(), 1);
        assert_eq!(o[0].len(), 10);
    }

    #[test]
    fn invariant_collections() {
        let s = dp6();
        let a = hexagon(&s);
        let c = standard_sod(&MoriFibreSpace::over_point(s.clone())).unwrap();
        assert!(is_invariant_collection(&c, &a));

        let p2 = SurfaceModel::p2();
        let b = standard_sod(&MoriFibreSpace::over_point(p2.clone())).unwrap();
        assert!(is_invariant_collection(&b, &GroupAction::trivial(p2)));

        // F0 with the two rulings swapped; O(-h1) alone is not stable.
        let f0 = SurfaceModel::hirzebruch(0);
        let swap = GroupAction::new(f0.clone(), vec![IntMatrix::from_rows(&[vec![0, 1], vec![1, 0]])]).unwrap();
        let h1 = crate::ktheory::line_bundle_class(&f0, &DivisorClass(vec![0, -1]));
        let lonely = Collection::new(
            f0.clone(),
            vec![crate::mutation::Block::single(crate::mutation::ExcObject::new(h1, "O(-h1)"))],
            false,
        );
        assert!(!is_invariant_collection(&lonely, &swap));
        let std8 = standard_sod(&MoriFibreSpace::over_point(f0)).unwrap();
        assert!(is_invariant_collection(&std8, &swap));
    }

    #[test]
    fn burnside_examples() {
        let z = TransitiveGSet::labelled(3, "");
        assert_eq!(burnside_invariant(&[]), BurnsideElement::zero());
        let one = burnside_invariant(&[BirationalStep::BlowUp(z.clone())]);
        assert_eq!(one, BurnsideElement::of(z.clone(), -1));
        assert_eq!(one.to_string(), "-[3]");
        let round = burnside_invariant(&[BirationalStep::BlowUp(z.clone()), BirationalStep::BlowDown(z.clone())]);
        assert!(round.is_zero());
        assert_eq!(round.to_string(), "0");
    }

    #[test]
    fn conjugate_stabilizers_agree() {
        // S3 on three exceptionals: the stabilizers of E1 and E2 are
        // conjugate, so both orbits give the same G-set.
        let s = dp6();
        let a = GroupAction::permuting_exceptionals(s.clone(), &[vec![1, 2, 0], vec![1, 0, 2]]).unwrap();
        let st = |i: usize| {
            let e = s.basis_vector(i);
            a.stabilizer_of(|g| a.act_divisor(g, &e) == e)
        };
        let x = TransitiveGSet::from_stabilizer(&a, &st(1)).unwrap();
        let y = TransitiveGSet::from_stabilizer(&a, &st(2)).unwrap();
        assert_ne!(st(1), st(2));
        assert_eq!(x, y);
        assert_eq!(x.size, 3);
    }

    #[test]
    fn h1_examples() {
        let triv = MatrixGroup::generate(3, vec![], 10).unwrap();
        assert!(h1_module(&triv).unwrap().is_empty());
        let minus = MatrixGroup::generate(1, vec![IntMatrix::from_rows(&[vec![-1]])], 10).unwrap();
        assert_eq!(h1_module(&minus).unwrap(), vec![2]);
        assert_eq!(h1_cyclic(&minus).unwrap(), vec![2]);
        let swap = MatrixGroup::generate(2, vec![IntMatrix::from_rows(&[vec![0, 1], vec![1, 0]])], 10).unwrap();
        assert!(h1_module(&swap).unwrap().is_empty());
        assert!(h1_cyclic(&swap).unwrap().is_empty());
        // Sign representation of C2 on Z³: (Z/2)³.
        let m3 = MatrixGroup::generate(3, vec![IntMatrix::identity(3).neg()], 10).unwrap();
        assert_eq!(h1_module(&m3).unwrap(), vec![2, 2, 2]);
    }

    #[test]
    fn generator_rows_match_full_bar_complex() {
        let groups = vec![
            MatrixGroup::generate(1, vec![IntMatrix::from_rows(&[vec![-1]])], 10).unwrap(),
            MatrixGroup::generate(2, vec![IntMatrix::from_rows(&[vec![0, -1], vec![1, -1]])], 10).unwrap(),
            MatrixGroup::generate(2, vec![IntMatrix::from_rows(&[vec![0, 1], vec![1, 0]]), IntMatrix::identity(2).neg()], 10)
                .unwrap(),
            hexagon(&dp6()).group().clone(),
        ];
        for g in &groups {
            assert_eq!(h1_with_rows(g, true).unwrap(), h1_with_rows(g, false).unwrap());
        }
    }

    #[test]
    fn h1_of_surfaces() {
        assert!(h1_picard(&hexagon(&dp6())).unwrap().is_empty());
        assert!(matches!(h1_picard(&s5_on_dp5()), Err(Error::Precondition(_))));
        // The rotation of order 6 of the hexagon is cyclic: both routes agree.
        let h = hexagon(&dp6());
        let g = h.group().elements().iter().find(|m| {
            let i = h.group().index_of(m).unwrap();
            h.group().element_order(i) == 6
        });
        let c6 = MatrixGroup::generate(4, vec![g.unwrap().clone()], 100).unwrap();
        assert_eq!(h1_module(&c6).unwrap(), h1_cyclic(&c6).unwrap());
    }

    #[test]
    fn atoms_of_examples() {
        let p2_3 = SurfaceModel::p2_blown_up(3);
        let c3 = GroupAction::permuting_exceptionals(p2_3.clone(), &[vec![1, 2, 0]]).unwrap();
        let con = Contraction { orbits: 1, target: ContractionTarget::Point, twists: vec![] };
        let atoms = atom_multiset(&p2_3, &c3, &con).unwrap();
        let names: Vec<String> = atoms.iter().map(|x| x.to_string()).collect();
        assert_eq!(names, ["perm[3]", "perm[1]", "perm[1]", "perm[1]"]);
        let cert = permutation_basis_certificate(&p2_3, &atoms, &c3).unwrap();
        assert_eq!(cert.cycle_types, vec![vec![3, 1, 1, 1]]);

        let dp4 = SurfaceModel::p2_blown_up(5);
        let t = GroupAction::trivial(dp4.clone());
        let atoms = atom_multiset(&dp4, &t, &Contraction { orbits: 0, target: ContractionTarget::Point, twists: vec![] })
            .unwrap();
        let names: Vec<String> = atoms.iter().map(|x| x.to_string()).collect();
        assert_eq!(names, ["opaque(O^perp, degree 4)", "perm[1]"]);
        assert!(permutation_basis_certificate(&dp4, &atoms, &t).is_err());

        let a = s5_on_dp5();
        let s = a.surface().clone();
        let atoms = atom_multiset(&s, &a, &Contraction { orbits: 0, target: ContractionTarget::Point, twists: vec![] })
            .unwrap();
        let names: Vec<String> = atoms.iter().map(|x| x.to_string()).collect();
        assert_eq!(names.len(), 3);
        assert_eq!(names[0], "perm[1]");
        assert!(names[1].starts_with("perm[5"));
        assert_eq!(names[2], "perm[1]");
        assert!(atoms.iter().all(Atom::is_untwisted_permutation));
    }

    #[test]
    fn twists_and_inconsistent_contractions() {
        let p2 = SurfaceModel::p2();
        let t = GroupAction::trivial(p2.clone());
        let con = Contraction { orbits: 0, target: ContractionTarget::Point, twists: vec![(2, "a3".into())] };
        let atoms = atom_multiset(&p2, &t, &con).unwrap();
        assert_eq!(atoms[1].to_string(), "perm[1]^a3");
        assert!(permutation_basis_certificate(&p2, &atoms, &t).is_err());

        // Swap of E1, E2 while contracting only E2.
        let s = SurfaceModel::new(Base::ProjectivePlane, vec![1, 1]).unwrap();
        let swap = GroupAction::permuting_exceptionals(s.clone(), &[vec![1, 0]]).unwrap();
        let con = Contraction { orbits: 1, target: ContractionTarget::ConicBundle(DivisorClass(vec![1, -1])), twists: vec![] };
        assert!(atom_multiset(&s, &swap, &con).is_err());
    }

    #[test]
    fn permutation_certificates() {
        let p2 = SurfaceModel::p2();
        let t = GroupAction::trivial(p2.clone());
        let con = Contraction { orbits: 0, target: ContractionTarget::Point, twists: vec![] };
        let cert = permutation_basis_certificate(&p2, &atom_multiset(&p2, &t, &con).unwrap(), &t).unwrap();
        assert_eq!(cert.basis.len(), 3);
        assert!(cert.permutations.is_empty());

        let s = SurfaceModel::p2_blown_up(2);
        let swap = GroupAction::permuting_exceptionals(s.clone(), &[vec![1, 0]]).unwrap();
        let con = Contraction { orbits: 1, target: ContractionTarget::Point, twists: vec![] };
        let cert = permutation_basis_certificate(&s, &atom_multiset(&s, &swap, &con).unwrap(), &swap).unwrap();
        assert_eq!(cert.basis.len(), 5);
        assert_eq!(cert.cycle_types, vec![vec![2, 1, 1, 1]]);
        let g = MatrixGroup::generate(5, cert.matrices.clone(), 100).unwrap();
        assert!(h1_module(&g).unwrap().is_empty());

        let s = dp6();
        let h = hexagon(&s);
        let atoms = atom_multiset(&s, &h, &con_point()).unwrap();
        let cert = permutation_basis_certificate(&s, &atoms, &h).unwrap();
        assert_eq!(cert.basis.len(), 6);
        let g = MatrixGroup::generate(6, cert.matrices.clone(), 100).unwrap();
        assert_eq!(g.order(), 12);
        assert!(h1_module(&g).unwrap().is_empty());
    }

    fn con_point() -> Contraction {
        Contraction { orbits: 0, target: ContractionTarget::Point, twists: vec![] }
    }

    #[test]
    fn minimality() {
        let s = dp6();
        assert!(minimality_proxy(&hexagon(&s)).unwrap().minimal);
        let s3 = GroupAction::permuting_exceptionals(s, &[vec![1, 2, 0], vec![1, 0, 2]]).unwrap();
        let p = minimality_proxy(&s3).unwrap();
        assert!(!p.minimal);
        assert_eq!(p.contractible_orbits.len(), 2);
        assert_eq!(p.label, "numerical proxy");
        assert!(minimality_proxy(&GroupAction::trivial(SurfaceModel::p2())).unwrap().minimal);
    }
}
