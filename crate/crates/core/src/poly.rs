//! Minimal multivariate polynomial arithmetic, used to expand the row-pair
//! essential matrix into monomials of the unknown motion.
//!
//! Variables are fixed: `d1, d2, d3, w1, w2, w3` (unknowns) followed by the
//! knowns `a`, `k` and `b` (row-pair time difference, first-row timing and
//! signed half baseline).

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

pub const N_VARS: usize = 9;
pub const N_UNKNOWNS: usize = 6;

pub const D1: usize = 0;
pub const D2: usize = 1;
pub const D3: usize = 2;
pub const W1: usize = 3;
pub const W2: usize = 4;
pub const W3: usize = 5;
pub const A: usize = 6;
pub const K: usize = 7;
pub const B: usize = 8;

pub type Exponents = [u8; N_VARS];

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly {
    terms: BTreeMap<Exponents, f64>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn constant(c: f64) -> Self {
        let mut p = Poly::zero();
        p.add_term([0; N_VARS], c);
        p
    }

    pub fn var(i: usize) -> Self {
        let mut e = [0; N_VARS];
        e[i] = 1;
        let mut p = Poly::zero();
        p.add_term(e, 1.0);
        p
    }

    fn add_term(&mut self, e: Exponents, c: f64) {
        if c == 0.0 {
            return;
        }
        let entry = self.terms.entry(e).or_insert(0.0);
        *entry += c;
        if *entry == 0.0 {
            self.terms.remove(&e);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &f64)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scale(&self, c: f64) -> Poly {
        let mut out = Poly::zero();
        for (e, v) in &self.terms {
            out.add_term(*e, v * c);
        }
        out
    }

    pub fn eval(&self, x: &[f64; N_VARS]) -> f64 {
        self.terms.iter().map(|(e, c)| c * e.iter().zip(x).map(|(&p, &xi)| xi.powi(p as i32)).product::<f64>()).sum()
    }
}

/// Total degree of the unknown part of a monomial.
pub fn unknown_degree(e: &Exponents) -> u32 {
    e[..N_UNKNOWNS].iter().map(|&p| p as u32).sum()
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, *c);
        }
        out
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self + &(-rhs)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(-1.0)
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let mut e = *ea;
                for (x, y) in e.iter_mut().zip(eb) {
                    *x += *y;
                }
                out.add_term(e, ca * cb);
            }
        }
        out
    }
}

pub type PolyVec3 = [Poly; 3];
pub type PolyMat3 = [[Poly; 3]; 3];

pub fn vec3(x: usize, y: usize, z: usize) -> PolyVec3 {
    [Poly::var(x), Poly::var(y), Poly::var(z)]
}

pub fn scale_vec(s: &Poly, v: &PolyVec3) -> PolyVec3 {
    [s * &v[0], s * &v[1], s * &v[2]]
}

pub fn add_vec(a: &PolyVec3, b: &PolyVec3) -> PolyVec3 {
    [&a[0] + &b[0], &a[1] + &b[1], &a[2] + &b[2]]
}

pub fn sub_vec(a: &PolyVec3, b: &PolyVec3) -> PolyVec3 {
    [&a[0] - &b[0], &a[1] - &b[1], &a[2] - &b[2]]
}

pub fn cross(a: &PolyVec3, b: &PolyVec3) -> PolyVec3 {
    [&(&a[1] * &b[2]) - &(&a[2] * &b[1]), &(&a[2] * &b[0]) - &(&a[0] * &b[2]), &(&a[0] * &b[1]) - &(&a[1] * &b[0])]
}

pub fn skew(v: &PolyVec3) -> PolyMat3 {
    let z = Poly::zero;
    [[z(), -&v[2], v[1].clone()], [v[2].clone(), z(), -&v[0]], [-&v[1], v[0].clone(), z()]]
}

pub fn identity() -> PolyMat3 {
    let mut m: PolyMat3 = Default::default();
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = Poly::constant(1.0);
    }
    m
}

pub fn add_mat(a: &PolyMat3, b: &PolyMat3) -> PolyMat3 {
    let mut m: PolyMat3 = Default::default();
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = &a[i][j] + &b[i][j];
        }
    }
    m
}

pub fn scale_mat(s: &Poly, a: &PolyMat3) -> PolyMat3 {
    let mut m: PolyMat3 = Default::default();
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = s * &a[i][j];
        }
    }
    m
}

pub fn mul_mat(a: &PolyMat3, b: &PolyMat3) -> PolyMat3 {
    let mut m: PolyMat3 = Default::default();
    for i in 0..3 {
        for j in 0..3 {
            let mut acc = Poly::zero();
            for l in 0..3 {
                acc = &acc + &(&a[i][l] * &b[l][j]);
            }
            m[i][j] = acc;
        }
    }
    m
}
