//! Block-structured exceptional collections and the move language acting on
//! them: block mutations, helix moves, orthogonal swaps, merge/split and
//! Serre powers on a contiguous range of blocks.
//!
//! Everything is checked on classes in K₀ only. Objects are compared up to
//! sign (odd shifts), and a block flagged opaque stands for an admissible
//! subcategory given by a basis of its K-span.

use std::collections::{HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ktheory::{euler_pairing, twist, KClass};
use crate::lattice::{r_class_value, SurfaceModel};
use crate::linalg::{hermite_basis, IntMatrix};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExcObject {
    pub cls: KClass,
    pub label: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Block {
    pub objects: Vec<ExcObject>,
    /// `Some(name)` for an unsplit subcategory recorded by a span basis.
    pub opaque: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Collection {
    #[serde(skip)]
    surface: SurfaceModel,
    blocks: Vec<Block>,
    full: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Move {
    LeftBlock(usize),
    RightBlock(usize),
    HelixMinusK,
    HelixPlusK,
    OrthoSwap(usize),
    Merge(usize),
    /// Splits block `i` into consecutive blocks; each part lists 1-based
    /// object positions inside the block.
    Split(usize, Vec<Vec<usize>>),
    /// Applies the Serre operator of blocks `start..=end` `power` times.
    SerrePower { start: usize, end: usize, power: i64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EqualityMode {
    Strict,
    UpToSignAndBlockPerm,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MoveKind {
    Left,
    Right,
    Helix,
    Swap,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckReport {
    pub ok: bool,
    pub gram: IntMatrix,
    pub violations: Vec<String>,
}

impl ExcObject {
    pub fn new(cls: KClass, label: impl Into<String>) -> Self {
        ExcObject { cls, label: label.into() }
    }
}

impl Block {
    pub fn exceptional(objects: Vec<ExcObject>) -> Self {
        Block { objects, opaque: None }
    }

    pub fn single(obj: ExcObject) -> Self {
        Block { objects: vec![obj], opaque: None }
    }

    pub fn opaque(name: impl Into<String>, span: Vec<KClass>) -> Self {
        let name = name.into();
        let objects = span.into_iter().map(|c| ExcObject::new(c, name.clone())).collect();
        Block { objects, opaque: Some(name) }
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn classes(&self) -> Vec<KClass> {
        self.objects.iter().map(|o| o.cls.clone()).collect()
    }

    pub fn is_opaque(&self) -> bool {
        self.opaque.is_some()
    }
}

impl Collection {
    pub fn new(surface: SurfaceModel, blocks: Vec<Block>, full: bool) -> Self {
        Collection { surface, blocks, full }
    }

    pub fn surface(&self) -> &SurfaceModel {
        &self.surface
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn is_full(&self) -> bool {
        self.full
    }

    pub fn object_count(&self) -> usize {
        self.blocks.iter().map(Block::len).sum()
    }

    pub fn classes(&self) -> Vec<KClass> {
        self.blocks.iter().flat_map(Block::classes).collect()
    }

    /// Flattened classes of blocks `start..=end` (1-based).
    pub fn range_classes(&self, start: usize, end: usize) -> Result<Vec<KClass>> {
        self.check_range(start, end)?;
        Ok(self.blocks[start - 1..end].iter().flat_map(Block::classes).collect())
    }

    /// Sub-collection consisting of blocks `start..=end` (1-based).
    pub fn sub_collection(&self, start: usize, end: usize) -> Result<Collection> {
        self.check_range(start, end)?;
        Ok(Collection::new(self.surface.clone(), self.blocks[start - 1..end].to_vec(), false))
    }

    fn check_range(&self, start: usize, end: usize) -> Result<()> {
        if start == 0 || start > end || end > self.blocks.len() {
            return Err(Error::Precondition(format!(
                "block range {start}..{end} outside 1..{}",
                self.blocks.len()
            )));
        }
        Ok(())
    }

    pub fn gram(&self) -> IntMatrix {
        gram_of(&self.surface, &self.classes())
    }

    /// One line per block: `<a, b> | <c> | ...` with sign-normalized labels.
    pub fn render(&self) -> String {
        self.blocks
            .iter()
            .map(|b| match &b.opaque {
                Some(name) => format!("<{name}: span of {}>", b.len()),
                None => {
                    let objs: Vec<&str> = b.objects.iter().map(|o| o.label.as_str()).collect();
                    format!("<{}>", objs.join(", "))
                }
            })
            .collect::<Vec<_>>()
            .join(" | ")
    }

    /// Same, listing raw classes.
    pub fn render_classes(&self) -> Vec<Vec<String>> {
        self.blocks
            .iter()
            .map(|b| b.objects.iter().map(|o| o.cls.sign_normalized().render()).collect())
            .collect()
    }
}

impl fmt::Display for Collection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

pub fn gram_of(surface: &SurfaceModel, classes: &[KClass]) -> IntMatrix {
    let n = classes.len();
    let mut g = IntMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            g[(i, j)] = euler_pairing(surface, &classes[i], &classes[j]);
        }
    }
    g
}

/// Human-readable name for a class: line bundles, torsion sheaves on
/// (-1)-classes, or raw coordinates. Shifts show as a leading minus.
pub fn describe_class(surface: &SurfaceModel, k: &KClass) -> String {
    let n = k.sign_normalized();
    let sign = if &n == k { "" } else { "-" };
    if n.rank == 1 {
        let d = surface.format_class(&n.c1);
        if n.c1.is_zero() {
            return format!("{sign}O");
        }
        return format!("{sign}O({d})");
    }
    if n.rank == 0 && r_class_value(surface, &n.c1) == Some(-1) {
        return format!("{sign}O_{{{}}}({})", surface.format_class(&n.c1), n.chi - 1);
    }
    format!("{sign}{}", n.render())
}

pub fn check_collection(c: &Collection) -> CheckReport {
    let s = &c.surface;
    let mut violations = Vec::new();
    let mut owner = Vec::new();
    for (bi, b) in c.blocks.iter().enumerate() {
        for o in &b.objects {
            if s.check(&o.cls.c1).is_err() {
                violations.push(format!("object {} has the wrong lattice rank", o.label));
            }
            owner.push(bi);
        }
    }
    if !violations.is_empty() {
        return CheckReport { ok: false, gram: IntMatrix::zeros(0, 0), violations };
    }
    let gram = c.gram();
    let n = owner.len();
    for i in 0..n {
        for j in 0..n {
            let (bi, bj) = (owner[i], owner[j]);
            let v = gram[(i, j)];
            if bi > bj && v != 0 {
                violations.push(format!(
                    "chi(object {}, object {}) = {v}: block {} is not left-orthogonal to block {}",
                    i + 1,
                    j + 1,
                    bi + 1,
                    bj + 1
                ));
            }
            if bi == bj && c.blocks[bi].opaque.is_none() {
                let want = i64::from(i == j);
                if v != want {
                    violations.push(format!(
                        "chi(object {}, object {}) = {v} inside block {}, expected {want}",
                        i + 1,
                        j + 1,
                        bi + 1
                    ));
                }
            }
        }
    }
    let mut start = 0;
    for (bi, b) in c.blocks.iter().enumerate() {
        if b.opaque.is_some() {
            let idx: Vec<usize> = (start..start + b.len()).collect();
            let sub = submatrix(&gram, &idx);
            if sub.det().abs() != 1 {
                violations.push(format!("opaque block {} has a non-unimodular Euler form", bi + 1));
            }
        }
        start += b.len();
    }
    if c.full {
        let want = s.picard_rank() + 2;
        if n != want {
            violations.push(format!("full collection has {n} objects, K0 has rank {want}"));
        } else {
            let m = IntMatrix::from_rows(&c.classes().iter().map(KClass::to_vec).collect::<Vec<_>>());
            if m.det().abs() != 1 {
                violations.push("classes do not form a basis of K0".into());
            }
        }
    }
    CheckReport { ok: violations.is_empty(), gram, violations }
}

fn submatrix(m: &IntMatrix, idx: &[usize]) -> IntMatrix {
    let rows: Vec<Vec<i64>> = idx.iter().map(|&i| idx.iter().map(|&j| m[(i, j)]).collect()).collect();
    IntMatrix::from_rows(&rows)
}

/// Left or right projection of `t` onto the span of `block`: the class of
/// the adjoint image, computed from the block's Euler form.
fn project(surface: &SurfaceModel, block: &Block, t: &KClass, left: bool) -> Result<KClass> {
    let u = block.classes();
    let mut g = gram_of(surface, &u);
    let b: Vec<i64> = u
        .iter()
        .map(|x| if left { euler_pairing(surface, x, t) } else { euler_pairing(surface, t, x) })
        .collect();
    if !left {
        g = g.transpose();
    }
    let coeffs = if block.opaque.is_none() {
        // Orthogonal exceptional block: the Gram matrix is the identity.
        b
    } else {
        let inv = g.inverse().ok_or_else(|| {
            Error::Precondition("opaque block with non-unimodular Euler form".into())
        })?;
        inv.mul_vec(&b)
    };
    let mut out = KClass::zero(surface);
    for (c, x) in coeffs.iter().zip(&u) {
        out = out.add(&x.scale(*c));
    }
    Ok(out)
}

fn relabel(surface: &SurfaceModel, block: &mut Block) {
    if block.opaque.is_none() {
        for o in &mut block.objects {
            o.label = describe_class(surface, &o.cls);
        }
    }
}

pub fn apply_move(c: &Collection, m: &Move) -> Result<Collection> {
    let out = apply_move_unchecked(c, m)?;
    let report = check_collection(&out);
    if !report.ok {
        return Err(Error::Verification(format!(
            "after move `{m}`: {}",
            report.violations.join("; ")
        )));
    }
    Ok(out)
}

/// Applies a move checking only its own preconditions, not the result.
pub fn apply_move_unchecked(c: &Collection, m: &Move) -> Result<Collection> {
    let s = &c.surface;
    let nb = c.blocks.len();
    let bad_index = |i: usize| Error::Precondition(format!("move `{m}`: block index {i} out of range 1..{nb}"));
    let mut blocks = c.blocks.clone();
    match m {
        Move::LeftBlock(i) => {
            let i = *i;
            if i < 2 || i > nb {
                return Err(bad_index(i));
            }
            let through = blocks[i - 2].clone();
            let mut moving = blocks[i - 1].clone();
            for o in &mut moving.objects {
                o.cls = o.cls.sub(&project(s, &through, &o.cls, true)?);
            }
            relabel(s, &mut moving);
            blocks[i - 2] = moving;
            blocks[i - 1] = through;
        }
        Move::RightBlock(i) => {
            let i = *i;
            if i < 1 || i >= nb {
                return Err(bad_index(i));
            }
            let through = blocks[i].clone();
            let mut moving = blocks[i - 1].clone();
            for o in &mut moving.objects {
                o.cls = o.cls.sub(&project(s, &through, &o.cls, false)?);
            }
            relabel(s, &mut moving);
            blocks[i] = moving;
            blocks[i - 1] = through;
        }
        Move::HelixMinusK => {
            if nb == 0 {
                return Err(bad_index(1));
            }
            let mk = -&s.canonical_class();
            let mut first = blocks.remove(0);
            for o in &mut first.objects {
                o.cls = twist(s, &o.cls, &mk);
            }
            relabel(s, &mut first);
            blocks.push(first);
        }
        Move::HelixPlusK => {
            let Some(mut last) = blocks.pop() else { return Err(bad_index(1)) };
            let k = s.canonical_class();
            for o in &mut last.objects {
                o.cls = twist(s, &o.cls, &k);
            }
            relabel(s, &mut last);
            blocks.insert(0, last);
        }
        Move::OrthoSwap(i) | Move::Merge(i) => {
            let i = *i;
            if i < 1 || i >= nb {
                return Err(bad_index(i));
            }
            let (a, b) = (&blocks[i - 1], &blocks[i]);
            for x in &a.objects {
                for y in &b.objects {
                    if euler_pairing(s, &x.cls, &y.cls) != 0 || euler_pairing(s, &y.cls, &x.cls) != 0 {
                        return Err(Error::Precondition(format!(
                            "move `{m}`: blocks {i} and {} are not completely orthogonal",
                            i + 1
                        )));
                    }
                }
            }
            if let Move::OrthoSwap(_) = m {
                blocks.swap(i - 1, i);
            } else {
                if a.is_opaque() || b.is_opaque() {
                    return Err(Error::Precondition(format!("move `{m}`: opaque blocks are never merged")));
                }
                let b = blocks.remove(i);
                blocks[i - 1].objects.extend(b.objects);
            }
        }
        Move::Split(i, parts) => {
            let i = *i;
            if i < 1 || i > nb {
                return Err(bad_index(i));
            }
            let block = blocks[i - 1].clone();
            if block.is_opaque() {
                return Err(Error::Precondition(format!("move `{m}`: opaque blocks are never split")));
            }
            let mut seen: Vec<usize> = parts.iter().flatten().copied().collect();
            seen.sort_unstable();
            if seen != (1..=block.len()).collect::<Vec<_>>() || parts.iter().any(Vec::is_empty) {
                return Err(Error::Precondition(format!(
                    "move `{m}`: parts must partition 1..{}",
                    block.len()
                )));
            }
            let new: Vec<Block> = parts
                .iter()
                .map(|p| Block::exceptional(p.iter().map(|&k| block.objects[k - 1].clone()).collect()))
                .collect();
            blocks.splice(i - 1..i, new);
        }
        Move::SerrePower { start, end, power } => {
            c.check_range(*start, *end)?;
            let classes = c.range_classes(*start, *end)?;
            let sm = serre_matrix_power(s, &classes, *power)?;
            let mut k = 0;
            for b in &mut blocks[start - 1..*end] {
                for o in &mut b.objects {
                    let col = sm.col(k);
                    let mut v = KClass::zero(s);
                    for (coef, x) in col.iter().zip(&classes) {
                        v = v.add(&x.scale(*coef));
                    }
                    o.cls = v;
                    k += 1;
                }
                relabel(s, b);
            }
        }
    }
    Ok(Collection { surface: c.surface.clone(), blocks, full: c.full })
}

/// M⁻¹Mᵀ for the Gram matrix M of `classes`.
pub fn serre_matrix(surface: &SurfaceModel, classes: &[KClass]) -> Result<IntMatrix> {
    let m = gram_of(surface, classes);
    let inv = m
        .inverse()
        .ok_or_else(|| Error::Precondition("Gram matrix of the range is not invertible over Z".into()))?;
    Ok(inv.mul(&m.transpose()))
}

fn serre_matrix_power(surface: &SurfaceModel, classes: &[KClass], power: i64) -> Result<IntMatrix> {
    let m = gram_of(surface, classes);
    let inv = m
        .inverse()
        .ok_or_else(|| Error::Precondition("Gram matrix of the range is not invertible over Z".into()))?;
    let mt = m.transpose();
    let step = if power >= 0 {
        inv.mul(&mt)
    } else {
        mt.inverse().expect("transpose of a unimodular matrix").mul(&m)
    };
    Ok(step.pow(power.unsigned_abs() as u32))
}

/// Serre operator of the span of blocks `start..=end` in the object basis.
pub fn subcategory_serre_matrix(c: &Collection, start: usize, end: usize) -> Result<IntMatrix> {
    serre_matrix(&c.surface, &c.range_classes(start, end)?)
}

/// Matrix of a linear map `f` on the span of `classes`, in that basis.
/// Fails if some image leaves the span.
pub fn matrix_in_basis(
    surface: &SurfaceModel,
    classes: &[KClass],
    f: impl Fn(&KClass) -> KClass,
) -> Result<IntMatrix> {
    let m = gram_of(surface, classes);
    let inv = m
        .inverse()
        .ok_or_else(|| Error::Precondition("basis Gram matrix is not unimodular".into()))?;
    let mut cols = Vec::with_capacity(classes.len());
    for x in classes {
        let w = f(x);
        let b: Vec<i64> = classes.iter().map(|u| euler_pairing(surface, u, &w)).collect();
        let coeffs = inv.mul_vec(&b);
        let mut back = KClass::zero(surface);
        for (c, u) in coeffs.iter().zip(classes) {
            back = back.add(&u.scale(*c));
        }
        if back != w {
            return Err(Error::Verification("image is not in the span of the basis".into()));
        }
        cols.push(coeffs);
    }
    Ok(IntMatrix::from_cols(&cols))
}

fn span_key(classes: &[KClass]) -> Vec<Vec<i64>> {
    hermite_basis(&classes.iter().map(KClass::to_vec).collect::<Vec<_>>())
}

fn block_key(b: &Block) -> Vec<Vec<i64>> {
    match b.opaque {
        Some(_) => span_key(&b.classes()),
        None => {
            let mut v: Vec<Vec<i64>> = b.objects.iter().map(|o| o.cls.sign_normalized().to_vec()).collect();
            v.sort();
            v
        }
    }
}

fn collection_key(c: &Collection) -> Vec<(bool, Vec<Vec<i64>>)> {
    c.blocks.iter().map(|b| (b.is_opaque(), block_key(b))).collect()
}

pub fn collections_equal(a: &Collection, b: &Collection, mode: EqualityMode) -> bool {
    if a.surface != b.surface || a.blocks.len() != b.blocks.len() {
        return false;
    }
    match mode {
        EqualityMode::Strict => a
            .blocks
            .iter()
            .zip(&b.blocks)
            .all(|(x, y)| x.opaque.is_some() == y.opaque.is_some() && x.classes() == y.classes()),
        EqualityMode::UpToSignAndBlockPerm => {
            a.blocks.iter().zip(&b.blocks).all(|(x, y)| x.len() == y.len())
                && collection_key(a) == collection_key(b)
        }
    }
}

/// Blocks-level comparison of two block lists over the same surface.
pub fn blocks_equal(surface: &SurfaceModel, a: &[Block], b: &[Block]) -> bool {
    let ca = Collection::new(surface.clone(), a.to_vec(), false);
    let cb = Collection::new(surface.clone(), b.to_vec(), false);
    collections_equal(&ca, &cb, EqualityMode::UpToSignAndBlockPerm)
}

pub const DEFAULT_SEARCH_DEPTH: usize = 8;

/// Search depth from `SODATLAS_DEPTH`, falling back to the default.
pub fn search_depth_from_env() -> usize {
    std::env::var("SODATLAS_DEPTH")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_SEARCH_DEPTH)
}

fn candidate_moves(c: &Collection, allowed: &[MoveKind]) -> Vec<Move> {
    let nb = c.blocks.len();
    let mut out = Vec::new();
    for kind in allowed {
        match kind {
            MoveKind::Left => out.extend((2..=nb).map(Move::LeftBlock)),
            MoveKind::Right => out.extend((1..nb).map(Move::RightBlock)),
            MoveKind::Helix => out.extend([Move::HelixMinusK, Move::HelixPlusK]),
            MoveKind::Swap => out.extend((1..nb).map(Move::OrthoSwap)),
        }
    }
    out
}

/// Shortest move sequence (breadth-first, at most `max_depth` moves) taking
/// `a` to `b` up to sign and permutation inside blocks.
pub fn search_path(a: &Collection, b: &Collection, max_depth: usize, allowed: &[MoveKind]) -> Option<Vec<Move>> {
    if a.surface != b.surface || a.object_count() != b.object_count() {
        return None;
    }
    let target = collection_key(b);
    let target_sizes: Vec<usize> = b.blocks.iter().map(Block::len).collect();
    let hit = |c: &Collection| {
        c.blocks.iter().map(Block::len).collect::<Vec<_>>() == target_sizes && collection_key(c) == target
    };
    if hit(a) {
        return Some(Vec::new());
    }
    let mut seen = HashSet::new();
    seen.insert(collection_key(a));
    let mut queue = VecDeque::new();
    queue.push_back((a.clone(), Vec::new()));
    while let Some((c, path)) = queue.pop_front() {
        if path.len() >= max_depth {
            continue;
        }
        for m in candidate_moves(&c, allowed) {
            let Ok(next) = apply_move(&c, &m) else { continue };
            let key = collection_key(&next);
            if !seen.insert(key) {
                continue;
            }
            let mut p: Vec<Move> = path.clone();
            p.push(m);
            if hit(&next) {
                return Some(p);
            }
            queue.push_back((next, p));
        }
    }
    None
}

/// Smallest |N| <= `nmax` (positive N first on ties) such that the Serre
/// operator of the span of `a`, applied N times, carries `a` onto `b` up to
/// sign and permutation inside blocks.
pub fn serre_power_match(surface: &SurfaceModel, a: &[Block], b: &[Block], nmax: u32) -> Option<i64> {
    if a.len() != b.len() || a.iter().zip(b).any(|(x, y)| x.len() != y.len()) {
        return None;
    }
    let classes: Vec<KClass> = a.iter().flat_map(Block::classes).collect();
    let other: Vec<KClass> = b.iter().flat_map(Block::classes).collect();
    if span_key(&classes) != span_key(&other) {
        return None;
    }
    let base = Collection::new(surface.clone(), a.to_vec(), false);
    let last = a.len();
    for k in 0..=i64::from(nmax) {
        for n in if k == 0 { vec![0] } else { vec![k, -k] } {
            let Ok(moved) = apply_move_unchecked(&base, &Move::SerrePower { start: 1, end: last, power: n }) else {
                return None;
            };
            if blocks_equal(surface, &moved.blocks, b) {
                return Some(n);
            }
        }
    }
    None
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Move::LeftBlock(i) => write!(f, "L {i}"),
            Move::RightBlock(i) => write!(f, "R {i}"),
            Move::HelixMinusK => write!(f, "helix -K"),
            Move::HelixPlusK => write!(f, "helix +K"),
            Move::OrthoSwap(i) => write!(f, "swap {i}"),
            Move::Merge(i) => write!(f, "merge {i}"),
            Move::Split(i, parts) => {
                let p: Vec<String> = parts
                    .iter()
                    .map(|p| p.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","))
                    .collect();
                write!(f, "split {i} {}", p.join("|"))
            }
            Move::SerrePower { start, end, power } => write!(f, "serre {start}..{end} ^{power}"),
        }
    }
}

impl FromStr for Move {
    type Err = Error;

    fn from_str(text: &str) -> Result<Move> {
        let bad = || Error::Input(format!("unrecognized move `{text}`"));
        let mut parts = text.split_whitespace();
        let head = parts.next().ok_or_else(bad)?;
        let rest: Vec<&str> = parts.collect();
        let index = |s: Option<&&str>| -> Result<usize> {
            s.and_then(|x| x.parse().ok()).ok_or_else(bad)
        };
        let m = match head {
            "L" if rest.len() == 1 => Move::LeftBlock(index(rest.first())?),
            "R" if rest.len() == 1 => Move::RightBlock(index(rest.first())?),
            "swap" if rest.len() == 1 => Move::OrthoSwap(index(rest.first())?),
            "merge" if rest.len() == 1 => Move::Merge(index(rest.first())?),
            "helix" if rest.len() == 1 => match rest[0] {
                "-K" => Move::HelixMinusK,
                "+K" | "K" => Move::HelixPlusK,
                _ => return Err(bad()),
            },
            "split" if rest.len() == 2 => {
                let i = index(rest.first())?;
                let parts = rest[1]
                    .split('|')
                    .map(|p| p.split(',').map(|x| x.trim().parse::<usize>().map_err(|_| bad())).collect())
                    .collect::<Result<Vec<Vec<usize>>>>()?;
                Move::Split(i, parts)
            }
            "serre" if rest.len() == 2 => {
                let (a, b) = rest[0].split_once("..").ok_or_else(bad)?;
                let power = rest[1].strip_prefix('^').ok_or_else(bad)?;
                Move::SerrePower {
                    start: a.parse().map_err(|_| bad())?,
                    end: b.parse().map_err(|_| bad())?,
                    power: power.parse().map_err(|_| bad())?,
                }
            }
            _ => return Err(bad()),
        };
        Ok(m)
    }
}

/// Parses a move script: moves separated by newlines or `;`, `#` comments.
pub fn parse_script(text: &str) -> Result<Vec<Move>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("");
        for part in line.split(';') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            out.push(part.parse().map_err(|e: Error| Error::Parse { line: n + 1, msg: e.to_string() })?);
        }
    }
    Ok(out)
}
