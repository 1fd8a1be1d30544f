//! Picard lattices of iterated blow-ups of P² and Hirzebruch surfaces.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::Serialize;

use crate::error::{input, Error, Result};
use crate::linalg::{signature, IntMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Base {
    ProjectivePlane,
    Hirzebruch(u32),
}

/// Numerical model of a rational surface: a minimal base blown up in a
/// sequence of point orbits. The basis is `H, E1..En` over P² and
/// `s, h, E1..En` over F_d (s² = -d, s·h = 1, h² = 0).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct SurfaceModel {
    base: Base,
    blowup_orbits: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct DivisorClass(pub Vec<i64>);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DualMode {
    AntiCanonical,
    TwiceAntiCanonical,
}

impl SurfaceModel {
    pub fn new(base: Base, blowup_orbits: Vec<usize>) -> Result<Self> {
        if blowup_orbits.contains(&0) {
            return input("blow-up orbit sizes must be positive");
        }
        Ok(SurfaceModel { base, blowup_orbits })
    }

    pub fn p2() -> Self {
        SurfaceModel { base: Base::ProjectivePlane, blowup_orbits: Vec::new() }
    }

    pub fn hirzebruch(d: u32) -> Self {
        SurfaceModel { base: Base::Hirzebruch(d), blowup_orbits: Vec::new() }
    }

    /// P² blown up in `n` points, recorded as one orbit (or none if `n = 0`).
    pub fn p2_blown_up(n: usize) -> Self {
        let orbits = if n == 0 { Vec::new() } else { vec![n] };
        SurfaceModel { base: Base::ProjectivePlane, blowup_orbits: orbits }
    }

    pub fn base(&self) -> Base {
        self.base
    }

    pub fn blowup_orbits(&self) -> &[usize] {
        &self.blowup_orbits
    }

    pub fn blown_points(&self) -> usize {
        self.blowup_orbits.iter().sum()
    }

    fn base_rank(&self) -> usize {
        match self.base {
            Base::ProjectivePlane => 1,
            Base::Hirzebruch(_) => 2,
        }
    }

    pub fn picard_rank(&self) -> usize {
        self.base_rank() + self.blown_points()
    }

    /// Index of the basis vector E_i (1-based i).
    pub fn exceptional_index(&self, i: usize) -> usize {
        self.base_rank() + i - 1
    }

    pub fn basis_labels(&self) -> Vec<String> {
        let mut out: Vec<String> = match self.base {
            Base::ProjectivePlane => vec!["H".into()],
            Base::Hirzebruch(_) => vec!["s".into(), "h".into()],
        };
        out.extend((1..=self.blown_points()).map(|i| format!("E{i}")));
        out
    }

    pub fn gram(&self) -> IntMatrix {
        let n = self.picard_rank();
        let mut m = IntMatrix::zeros(n, n);
        let b = self.base_rank();
        match self.base {
            Base::ProjectivePlane => m[(0, 0)] = 1,
            Base::Hirzebruch(d) => {
                m[(0, 0)] = -(d as i64);
                m[(0, 1)] = 1;
                m[(1, 0)] = 1;
            }
        }
        for i in b..n {
            m[(i, i)] = -1;
        }
        m
    }

    pub fn signature(&self) -> (usize, usize) {
        signature(&self.gram())
    }

    pub fn degree(&self) -> i64 {
        let n = self.blown_points() as i64;
        match self.base {
            Base::ProjectivePlane => 9 - n,
            Base::Hirzebruch(_) => 8 - n,
        }
    }

    pub fn zero(&self) -> DivisorClass {
        DivisorClass(vec![0; self.picard_rank()])
    }

    pub fn basis_vector(&self, i: usize) -> DivisorClass {
        let mut v = self.zero();
        v.0[i] = 1;
        v
    }

    pub fn check(&self, d: &DivisorClass) -> Result<()> {
        if d.0.len() != self.picard_rank() {
            return Err(Error::Input(format!(
                "class has {} coordinates, lattice rank is {}",
                d.0.len(),
                self.picard_rank()
            )));
        }
        Ok(())
    }

    /// Intersection pairing; panics on a length mismatch (use [`intersect`]
    /// for the checked version).
    pub fn dot(&self, a: &DivisorClass, b: &DivisorClass) -> i64 {
        assert_eq!(a.0.len(), self.picard_rank(), "class/lattice rank mismatch");
        assert_eq!(b.0.len(), self.picard_rank(), "class/lattice rank mismatch");
        let br = self.base_rank();
        let mut s = match self.base {
            Base::ProjectivePlane => a.0[0] * b.0[0],
            Base::Hirzebruch(d) => -(d as i64) * a.0[0] * b.0[0] + a.0[0] * b.0[1] + a.0[1] * b.0[0],
        };
        for i in br..a.0.len() {
            s -= a.0[i] * b.0[i];
        }
        s
    }

    pub fn canonical_class(&self) -> DivisorClass {
        let mut k = self.zero();
        match self.base {
            Base::ProjectivePlane => k.0[0] = -3,
            Base::Hirzebruch(d) => {
                k.0[0] = -2;
                k.0[1] = -2 - d as i64;
            }
        }
        for i in self.base_rank()..k.0.len() {
            k.0[i] = 1;
        }
        k
    }

    /// Blow-up of a further orbit of `orbit_size` points.
    pub fn blow_up(&self, orbit_size: usize) -> Result<SurfaceModel> {
        let mut orbits = self.blowup_orbits.clone();
        orbits.push(orbit_size);
        SurfaceModel::new(self.base, orbits)
    }

    /// The model with the trailing `k` orbits contracted.
    pub fn contract_last_orbits(&self, k: usize) -> Result<SurfaceModel> {
        if k > self.blowup_orbits.len() {
            return input("cannot contract more orbits than were blown up");
        }
        let keep = self.blowup_orbits.len() - k;
        SurfaceModel::new(self.base, self.blowup_orbits[..keep].to_vec())
    }

    /// Renders a class as an integer combination of basis labels.
    pub fn format_class(&self, d: &DivisorClass) -> String {
        let labels = self.basis_labels();
        let mut out = String::new();
        for (c, l) in d.0.iter().zip(&labels) {
            if *c == 0 {
                continue;
            }
            let sign = if *c < 0 { "-" } else if out.is_empty() { "" } else { "+" };
            let mag = c.abs();
            if mag == 1 {
                out.push_str(&format!("{sign}{l}"));
            } else {
                out.push_str(&format!("{sign}{mag}{l}"));
            }
        }
        if out.is_empty() {
            out.push('0');
        }
        out
    }
}

impl fmt::Display for SurfaceModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let base = match self.base {
            Base::ProjectivePlane => "P2".to_string(),
            Base::Hirzebruch(d) => format!("F{d}"),
        };
        let orbits: Vec<String> = self.blowup_orbits.iter().map(|k| k.to_string()).collect();
        write!(f, "{base} [{}] (degree {})", orbits.join(", "), self.degree())
    }
}

impl Add for &DivisorClass {
    type Output = DivisorClass;
    fn add(self, o: &DivisorClass) -> DivisorClass {
        assert_eq!(self.0.len(), o.0.len());
        DivisorClass(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &DivisorClass {
    type Output = DivisorClass;
    fn sub(self, o: &DivisorClass) -> DivisorClass {
        assert_eq!(self.0.len(), o.0.len());
        DivisorClass(self.0.iter().zip(&o.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &DivisorClass {
    type Output = DivisorClass;
    fn neg(self) -> DivisorClass {
        DivisorClass(self.0.iter().map(|a| -a).collect())
    }
}

impl Mul<&DivisorClass> for i64 {
    type Output = DivisorClass;
    fn mul(self, d: &DivisorClass) -> DivisorClass {
        DivisorClass(d.0.iter().map(|a| self * a).collect())
    }
}

impl DivisorClass {
    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }
}

pub fn intersect(surface: &SurfaceModel, a: &DivisorClass, b: &DivisorClass) -> Result<i64> {
    surface.check(a)?;
    surface.check(b)?;
    Ok(surface.dot(a, b))
}

pub fn canonical_class(surface: &SurfaceModel) -> DivisorClass {
    surface.canonical_class()
}

/// `Some(D²)` when D² + D·K = -2, otherwise `None`.
pub fn r_class_value(surface: &SurfaceModel, d: &DivisorClass) -> Option<i64> {
    let k = surface.canonical_class();
    let dd = surface.dot(d, d);
    (dd + surface.dot(d, &k) == -2).then_some(dd)
}

pub fn dual_class(surface: &SurfaceModel, d: &DivisorClass, mode: DualMode) -> DivisorClass {
    let k = surface.canonical_class();
    let m = match mode {
        DualMode::AntiCanonical => 1,
        DualMode::TwiceAntiCanonical => 2,
    };
    &(-m * &k) - d
}

fn isqrt(n: i128) -> i128 {
    if n <= 0 {
        return 0;
    }
    // Newton iteration from above.
    let mut x = n;
    let mut y = (x + 1) / 2;
    while y < x {
        x = y;
        y = (x + n / x) / 2;
    }
    x
}

/// Interval of integers t with (d·t - a)² <= b, for d > 0 and b >= 0.
fn coordinate_range(d: i128, a: i128, b: i128) -> (i64, i64) {
    let s = isqrt(b);
    let lo = (a - s).div_euclid(d) + i128::from((a - s).rem_euclid(d) != 0);
    let hi = (a + s).div_euclid(d);
    (lo as i64, hi as i64)
}

/// All r-classes of the model.
///
/// Writing D = (c/K²)K + D₀ with c = D·K = -2-r, the part D₀ lies in the
/// negative-definite lattice K^⊥ and has fixed norm r - c²/K². Each
/// coordinate of D is D·v for a dual basis vector v, so Cauchy–Schwarz on
/// K^⊥ bounds it. The base coordinates are boxed this way; the exceptional
/// coordinates are searched with a running bound on their sum of squares,
/// and the last one is fixed by the linear constraint.
pub fn enumerate_r_classes(surface: &SurfaceModel, r: i64) -> Result<Vec<DivisorClass>> {
    if !(-2..=1).contains(&r) {
        return input(format!("r must lie in {{-2,-1,0,1}}, got {r}"));
    }
    let deg = surface.degree();
    if deg < 1 || (deg < 3 && r >= 0) {
        return Err(Error::Unsupported(format!(
            "r-class enumeration for r = {r} needs degree >= {}, model has degree {deg}",
            if r >= 0 { 3 } else { 1 }
        )));
    }
    let k = surface.canonical_class();
    let c = -2 - r;
    let d = deg as i128;
    let radius = i128::from(r) * d - i128::from(c) * i128::from(c);
    if radius > 0 {
        return Ok(Vec::new());
    }
    let gram_inv = surface.gram().inverse().expect("Picard lattice is unimodular");
    let n = surface.picard_rank();
    let mut ranges = Vec::with_capacity(n);
    for i in 0..n {
        let v = DivisorClass(gram_inv.col(i));
        let vk = i128::from(surface.dot(&v, &k));
        let vv = i128::from(surface.dot(&v, &v));
        let a = vk * i128::from(c);
        let b = radius * (d * vv - vk * vk);
        ranges.push(coordinate_range(d, a, b));
    }
    let base = n - surface.blown_points();
    let m = surface.blown_points();
    let mut out = Vec::new();
    let mut head = vec![0i64; base];
    let mut stack: Vec<i64> = Vec::new();
    enumerate_head(0, &ranges, &mut head, &mut |head| {
        let mut d = surface.zero();
        d.0[..base].copy_from_slice(head);
        let q = surface.dot(&d, &d);
        let hk = surface.dot(&d, &k);
        // Exceptional coefficients e_i contribute -Σe_i² to D² and -Σe_i to D·K.
        let sum_sq = q - r;
        let sum = hk - c;
        if sum_sq < 0 {
            return;
        }
        if m == 0 {
            if sum_sq == 0 && sum == 0 {
                out.push(d);
            }
            return;
        }
        stack.clear();
        tail(&ranges[base..], sum, sum_sq, &mut stack, &mut |tail| {
            let mut full = d.clone();
            full.0[base..].copy_from_slice(tail);
            out.push(full);
        });
    });
    out.sort();
    debug_assert!(out.iter().all(|d| r_class_value(surface, d) == Some(r)));
    Ok(out)
}

fn enumerate_head(i: usize, ranges: &[(i64, i64)], head: &mut Vec<i64>, f: &mut dyn FnMut(&[i64])) {
    if i == head.len() {
        f(head);
        return;
    }
    for x in ranges[i].0..=ranges[i].1 {
        head[i] = x;
        enumerate_head(i + 1, ranges, head, f);
    }
}

fn tail(ranges: &[(i64, i64)], sum: i64, sum_sq: i64, acc: &mut Vec<i64>, f: &mut dyn FnMut(&[i64])) {
    let i = acc.len();
    if i + 1 == ranges.len() {
        let last = sum;
        if last >= ranges[i].0 && last <= ranges[i].1 && last * last == sum_sq {
            acc.push(last);
            f(acc);
            acc.pop();
        }
        return;
    }
    for x in ranges[i].0..=ranges[i].1 {
        if x * x > sum_sq {
            continue;
        }
        acc.push(x);
        tail(ranges, sum - x, sum_sq - x * x, acc, f);
        acc.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cls(v: &[i64]) -> DivisorClass {
        DivisorClass(v.to_vec())
    }

    #[test]
    fn intersection_examples() {
        let p2 = SurfaceModel::p2();
        assert_eq!(intersect(&p2, &cls(&[1]), &cls(&[1])).unwrap(), 1);
        let s2 = SurfaceModel::p2_blown_up(2);
        assert_eq!(intersect(&s2, &cls(&[0, 1, 0]), &cls(&[0, 0, 1])).unwrap(), 0);
        let s3 = SurfaceModel::p2_blown_up(3);
        let k = s3.canonical_class();
        assert_eq!(k, cls(&[-3, 1, 1, 1]));
        assert_eq!(intersect(&s3, &k, &k).unwrap(), 6);
        assert!(matches!(intersect(&s3, &cls(&[1]), &k), Err(Error::Input(_))));
    }

    #[test]
    fn canonical_classes() {
        assert_eq!(SurfaceModel::p2().canonical_class(), cls(&[-3]));
        assert_eq!(SurfaceModel::hirzebruch(0).canonical_class(), cls(&[-2, -2]));
        assert_eq!(SurfaceModel::p2_blown_up(1).canonical_class(), cls(&[-3, 1]));
        for d in 0..5 {
            let f = SurfaceModel::hirzebruch(d);
            let k = f.canonical_class();
            assert_eq!(f.dot(&k, &k), 8);
        }
    }

    #[test]
    fn r_class_values() {
        assert_eq!(r_class_value(&SurfaceModel::p2(), &cls(&[1])), Some(1));
        let b1 = SurfaceModel::p2_blown_up(1);
        assert_eq!(r_class_value(&b1, &cls(&[0, 1])), Some(-1));
        assert_eq!(r_class_value(&b1, &cls(&[1, -1])), Some(0));
        assert_eq!(r_class_value(&b1, &cls(&[1, 1])), None);
    }

    #[test]
    fn small_enumerations() {
        let x6 = SurfaceModel::p2_blown_up(3);
        let zero = enumerate_r_classes(&x6, 0).unwrap();
        assert_eq!(zero, vec![cls(&[1, -1, 0, 0]), cls(&[1, 0, -1, 0]), cls(&[1, 0, 0, -1])]);
        let f0 = SurfaceModel::hirzebruch(0);
        assert_eq!(enumerate_r_classes(&f0, 0).unwrap(), vec![cls(&[0, 1]), cls(&[1, 0])]);
        assert_eq!(enumerate_r_classes(&SurfaceModel::p2_blown_up(1), -1).unwrap().len(), 1);
        assert_eq!(enumerate_r_classes(&SurfaceModel::hirzebruch(1), -1).unwrap().len(), 1);
        assert_eq!(enumerate_r_classes(&SurfaceModel::p2_blown_up(4), -1).unwrap().len(), 10);
    }

    #[test]
    fn enumeration_range_errors() {
        let x2 = SurfaceModel::p2_blown_up(7);
        assert!(matches!(enumerate_r_classes(&x2, 0), Err(Error::Unsupported(_))));
        assert_eq!(enumerate_r_classes(&x2, -1).unwrap().len(), 56);
        assert_eq!(enumerate_r_classes(&SurfaceModel::p2_blown_up(8), -1).unwrap().len(), 240);
        assert!(matches!(enumerate_r_classes(&x2, 3), Err(Error::Input(_))));
    }

    #[test]
    fn dual_examples() {
        let x3 = SurfaceModel::p2_blown_up(6);
        let e = x3.basis_vector(1);
        let d = dual_class(&x3, &e, DualMode::AntiCanonical);
        assert_eq!(r_class_value(&x3, &d), Some(0));
        let x5 = SurfaceModel::p2_blown_up(4);
        let h1 = cls(&[1, -1, 0, 0, 0]);
        assert_eq!(r_class_value(&x5, &dual_class(&x5, &h1, DualMode::AntiCanonical)), Some(1));
        let f0 = SurfaceModel::hirzebruch(0);
        let h = cls(&[0, 1]);
        let dual = dual_class(&f0, &h, DualMode::AntiCanonical);
        assert_eq!(dual, cls(&[2, 1]));
        assert_eq!(r_class_value(&f0, &dual), Some(4));
    }

    #[test]
    fn blow_up_bookkeeping() {
        let x6 = SurfaceModel::p2().blow_up(3).unwrap();
        assert_eq!((x6.picard_rank(), x6.degree()), (4, 6));
        assert_eq!(x6.blow_up(1).unwrap().degree(), 5);
        let f = SurfaceModel::hirzebruch(0).blow_up(2).unwrap();
        assert_eq!((f.picard_rank(), f.degree()), (4, 6));
        assert_eq!(f.signature(), (1, 3));
    }

    #[test]
    fn formatting() {
        let x = SurfaceModel::p2_blown_up(2);
        assert_eq!(x.format_class(&cls(&[2, -1, -1])), "2H-E1-E2");
        assert_eq!(x.format_class(&x.zero()), "0");
    }
}
