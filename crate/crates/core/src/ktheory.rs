//! K₀ of a rational surface in (rank, c₁, χ) coordinates.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{r_class_value, DivisorClass, SurfaceModel};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct KClass {
    pub rank: i64,
    pub c1: DivisorClass,
    pub chi: i64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Side {
    Left,
    Right,
}

impl KClass {
    pub fn new(rank: i64, c1: DivisorClass, chi: i64) -> Self {
        KClass { rank, c1, chi }
    }

    pub fn zero(surface: &SurfaceModel) -> Self {
        KClass { rank: 0, c1: surface.zero(), chi: 0 }
    }

    pub fn is_zero(&self) -> bool {
        self.rank == 0 && self.chi == 0 && self.c1.is_zero()
    }

    pub fn add(&self, o: &KClass) -> KClass {
        KClass { rank: self.rank + o.rank, c1: &self.c1 + &o.c1, chi: self.chi + o.chi }
    }

    pub fn sub(&self, o: &KClass) -> KClass {
        KClass { rank: self.rank - o.rank, c1: &self.c1 - &o.c1, chi: self.chi - o.chi }
    }

    pub fn neg(&self) -> KClass {
        KClass { rank: -self.rank, c1: -&self.c1, chi: -self.chi }
    }

    pub fn scale(&self, k: i64) -> KClass {
        KClass { rank: k * self.rank, c1: k * &self.c1, chi: k * self.chi }
    }

    /// Coordinates (rank, c1..., chi) as a flat integer vector.
    pub fn to_vec(&self) -> Vec<i64> {
        let mut v = Vec::with_capacity(self.c1.0.len() + 2);
        v.push(self.rank);
        v.extend_from_slice(&self.c1.0);
        v.push(self.chi);
        v
    }

    pub fn from_vec(v: &[i64]) -> KClass {
        assert!(v.len() >= 2);
        KClass { rank: v[0], c1: DivisorClass(v[1..v.len() - 1].to_vec()), chi: v[v.len() - 1] }
    }

    /// The representative of ±self whose leading nonzero coordinate
    /// (rank, then c1, then χ) is positive.
    pub fn sign_normalized(&self) -> KClass {
        match self.to_vec().into_iter().find(|&x| x != 0) {
            Some(x) if x < 0 => self.neg(),
            _ => self.clone(),
        }
    }

    /// Certificate rendering `(r; c1-coeffs; chi)`.
    pub fn render(&self) -> String {
        let c: Vec<String> = self.c1.0.iter().map(|x| x.to_string()).collect();
        format!("({}; {}; {})", self.rank, c.join(","), self.chi)
    }
}

impl fmt::Display for KClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Riemann–Roch with χ(O) = 1.
pub fn chi_line_bundle(surface: &SurfaceModel, d: &DivisorClass) -> i64 {
    let k = surface.canonical_class();
    let num = surface.dot(d, d) - surface.dot(d, &k);
    debug_assert_eq!(num % 2, 0);
    1 + num / 2
}

pub fn line_bundle_class(surface: &SurfaceModel, d: &DivisorClass) -> KClass {
    KClass { rank: 1, c1: d.clone(), chi: chi_line_bundle(surface, d) }
}

pub fn structure_sheaf(surface: &SurfaceModel) -> KClass {
    line_bundle_class(surface, &surface.zero())
}

/// Class of O_E(k) for a (-1)-class E.
pub fn torsion_class(surface: &SurfaceModel, e: &DivisorClass, k: i64) -> Result<KClass> {
    surface.check(e)?;
    if r_class_value(surface, e) != Some(-1) {
        return Err(Error::Input(format!("{} is not a (-1)-class", surface.format_class(e))));
    }
    Ok(KClass { rank: 0, c1: e.clone(), chi: k + 1 })
}

/// χ(a, b) = r_a χ_b + r_b χ_a - r_a r_b + r_b (c1_a·K) - c1_a·c1_b.
pub fn euler_pairing(surface: &SurfaceModel, a: &KClass, b: &KClass) -> i64 {
    let k = surface.canonical_class();
    a.rank * b.chi + b.rank * a.chi - a.rank * b.rank + b.rank * surface.dot(&a.c1, &k)
        - surface.dot(&a.c1, &b.c1)
}

/// Checked variant of [`euler_pairing`] for classes of unknown provenance.
pub fn try_euler_pairing(surface: &SurfaceModel, a: &KClass, b: &KClass) -> Result<i64> {
    surface.check(&a.c1)?;
    surface.check(&b.c1)?;
    Ok(euler_pairing(surface, a, b))
}

/// Tensor product with O(L).
pub fn twist(surface: &SurfaceModel, a: &KClass, l: &DivisorClass) -> KClass {
    let k = surface.canonical_class();
    let ll = surface.dot(l, l) - surface.dot(l, &k);
    debug_assert_eq!(ll % 2, 0);
    KClass {
        rank: a.rank,
        c1: &a.c1 + &(a.rank * l),
        chi: a.chi + surface.dot(&a.c1, l) + a.rank * ll / 2,
    }
}

/// Serre operator S = ⊗ω[2]; the even shift leaves the sign unchanged.
pub fn serre_class(surface: &SurfaceModel, a: &KClass) -> KClass {
    twist(surface, a, &surface.canonical_class())
}

pub fn inverse_serre_class(surface: &SurfaceModel, a: &KClass) -> KClass {
    twist(surface, a, &-&surface.canonical_class())
}

/// Left: t - χ(e,t) e. Right: t - χ(t,e) e.
pub fn mutate_class(surface: &SurfaceModel, e: &KClass, t: &KClass, side: Side) -> KClass {
    let c = match side {
        Side::Left => euler_pairing(surface, e, t),
        Side::Right => euler_pairing(surface, t, e),
    };
    t.sub(&e.scale(c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::enumerate_r_classes;

    fn cls(v: &[i64]) -> DivisorClass {
        DivisorClass(v.to_vec())
    }

    #[test]
    fn riemann_roch_examples() {
        let p2 = SurfaceModel::p2();
        assert_eq!(chi_line_bundle(&p2, &p2.zero()), 1);
        assert_eq!(line_bundle_class(&p2, &cls(&[-1])), KClass::new(1, cls(&[-1]), 0));
        assert_eq!(line_bundle_class(&p2, &cls(&[1])), KClass::new(1, cls(&[1]), 3));
        for n in 0..=8 {
            let x = SurfaceModel::p2_blown_up(n);
            let mk = -&x.canonical_class();
            assert_eq!(chi_line_bundle(&x, &mk), 1 + x.degree());
        }
        let b1 = SurfaceModel::p2_blown_up(1);
        assert_eq!(chi_line_bundle(&b1, &cls(&[0, 1])), 1);
    }

    #[test]
    fn torsion_examples() {
        let b1 = SurfaceModel::p2_blown_up(1);
        let e = cls(&[0, 1]);
        let t = torsion_class(&b1, &e, -1).unwrap();
        assert_eq!(t, KClass::new(0, e.clone(), 0));
        assert_eq!(torsion_class(&b1, &e, 0).unwrap().chi, 1);
        assert_eq!(euler_pairing(&b1, &t, &t), 1);
        assert!(torsion_class(&b1, &cls(&[1, 0]), 0).is_err());
        let o = structure_sheaf(&b1);
        assert_eq!(euler_pairing(&b1, &o, &t), 0);
        assert_eq!(euler_pairing(&b1, &t, &o), -1);
    }

    #[test]
    fn twist_examples() {
        let x = SurfaceModel::p2_blown_up(2);
        let d = cls(&[1, -1, 0]);
        assert_eq!(twist(&x, &structure_sheaf(&x), &d), line_bundle_class(&x, &d));
        let e = cls(&[0, 1, 0]);
        let t = torsion_class(&x, &e, 2).unwrap();
        assert_eq!(twist(&x, &t, &x.zero()), t);
        for l in [cls(&[1, 0, 0]), cls(&[2, -1, 3]), cls(&[0, 1, 0])] {
            let expect = torsion_class(&x, &e, 2 + x.dot(&e, &l)).unwrap();
            assert_eq!(twist(&x, &t, &l), expect);
        }
        let so = serre_class(&x, &structure_sheaf(&x));
        assert_eq!(so, KClass::new(1, x.canonical_class(), 1));
        assert_eq!(inverse_serre_class(&x, &so), structure_sheaf(&x));
    }

    #[test]
    fn mutation_examples() {
        let x = SurfaceModel::p2_blown_up(2);
        let e = cls(&[0, 1, 0]);
        for d in [cls(&[1, 0, 0]), cls(&[-2, 1, 1]), cls(&[3, -2, 0])] {
            let a = x.dot(&d, &e);
            let oe = torsion_class(&x, &e, a).unwrap();
            let got = mutate_class(&x, &oe, &line_bundle_class(&x, &d), Side::Right);
            assert_eq!(got, line_bundle_class(&x, &(&d - &e)));
        }
        // Mutating O(D+h) through O(D) gives O(D-h) up to shift.
        let x6 = SurfaceModel::p2_blown_up(3);
        for h in enumerate_r_classes(&x6, 0).unwrap() {
            let d = cls(&[-1, 1, 0, 0]);
            let got = mutate_class(
                &x6,
                &line_bundle_class(&x6, &d),
                &line_bundle_class(&x6, &(&d + &h)),
                Side::Left,
            );
            assert_eq!(got.neg(), line_bundle_class(&x6, &(&d - &h)));
        }
        let o = structure_sheaf(&x);
        assert!(mutate_class(&x, &o, &o, Side::Left).is_zero());
    }

    #[test]
    fn euler_pairing_on_enumerated_classes() {
        for n in 0..=4 {
            let x = SurfaceModel::p2_blown_up(n);
            let mut classes = Vec::new();
            for r in -1..=1 {
                classes.extend(enumerate_r_classes(&x, r).unwrap());
            }
            for a in &classes {
                assert_eq!(euler_pairing(&x, &line_bundle_class(&x, a), &line_bundle_class(&x, a)), 1);
                for b in &classes {
                    let lhs = euler_pairing(&x, &line_bundle_class(&x, a), &line_bundle_class(&x, b));
                    assert_eq!(lhs, chi_line_bundle(&x, &(b - a)));
                }
            }
        }
    }

    #[test]
    fn sign_normalization() {
        let k = KClass::new(-1, cls(&[2]), 3);
        assert_eq!(k.sign_normalized(), KClass::new(1, cls(&[-2]), -3));
        let t = KClass::new(0, cls(&[0, -1]), 0);
        assert_eq!(t.sign_normalized().c1, cls(&[0, 1]));
        assert_eq!(k.render(), "(-1; 2; 3)");
    }
}
