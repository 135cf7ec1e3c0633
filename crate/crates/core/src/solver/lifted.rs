//! The lifted unknown vector and the per-correspondence design rows.
//!
//! Expanding `x_b^T E x_a` over the unknowns `d` and `w` gives monomials of
//! degree one (`d1 d2 d3 w1 w3`), two (`d_i w_j` and five `w_i w_j`) and
//! three. Treating every monomial of degree <= 2 as an independent unknown
//! yields 19 columns; the degree-3 monomials (the cubic term of the
//! regrouped essential matrix) are dropped. With the baseline along the
//! second camera axis, `w2` never appears linearly and `w2 w2` never appears
//! at all.
//!
//! The dropped monomials are exactly those of `w q^T` with `q = w x d`,
//! i.e. `w_i w_j d_l` with `l` different from at least one of `i, j`; there
//! are 15 of them (see [`dropped_monomials`]).

use std::sync::OnceLock;

use nalgebra::SVector;

use crate::essential::{symbolic_essential, RowPairCoefficients};
use crate::geom::{Mat3, MotionVelocity, StereoRigConfig, Vec3};
use crate::poly::{self, unknown_degree};

pub const LIFTED_DIM: usize = 19;

/// Unknown-variable exponents `[d1, d2, d3, w1, w2, w3]`.
pub type Monomial = [u8; 6];

pub const COLUMN_NAMES: [&str; LIFTED_DIM] =
    ["d1", "d2", "d3", "w1", "w3", "E11", "E12", "E13", "E21", "E22", "E23", "E31", "E32", "E33", "w1w1", "w1w2", "w1w3", "w2w3", "w3w3"];

/// Column monomials in [`COLUMN_NAMES`] order; `Eij` is `d_i w_j`.
pub const COLUMN_MONOMIALS: [Monomial; LIFTED_DIM] = [
    [1, 0, 0, 0, 0, 0],
    [0, 1, 0, 0, 0, 0],
    [0, 0, 1, 0, 0, 0],
    [0, 0, 0, 1, 0, 0],
    [0, 0, 0, 0, 0, 1],
    [1, 0, 0, 1, 0, 0],
    [1, 0, 0, 0, 1, 0],
    [1, 0, 0, 0, 0, 1],
    [0, 1, 0, 1, 0, 0],
    [0, 1, 0, 0, 1, 0],
    [0, 1, 0, 0, 0, 1],
    [0, 0, 1, 1, 0, 0],
    [0, 0, 1, 0, 1, 0],
    [0, 0, 1, 0, 0, 1],
    [0, 0, 0, 2, 0, 0],
    [0, 0, 0, 1, 1, 0],
    [0, 0, 0, 1, 0, 1],
    [0, 0, 0, 0, 1, 1],
    [0, 0, 0, 0, 0, 2],
];

pub const COL_D1: usize = 0;
pub const COL_W1: usize = 3;
pub const COL_W3: usize = 4;
pub const COL_E11: usize = 5;
pub const COL_W1W1: usize = 14;
pub const COL_W3W3: usize = 18;

pub fn column_of(m: &Monomial) -> Option<usize> {
    COLUMN_MONOMIALS.iter().position(|c| c == m)
}

pub fn monomial_value(m: &Monomial, motion: &MotionVelocity) -> f64 {
    let vars = [motion.d[0], motion.d[1], motion.d[2], motion.w[0], motion.w[1], motion.w[2]];
    m.iter().zip(vars).map(|(&p, x)| x.powi(p as i32)).product()
}

/// The 19 retained monomials of the epipolar system, as one vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LiftedVector(pub SVector<f64, LIFTED_DIM>);

impl LiftedVector {
    /// Evaluates every column monomial at `motion`.
    pub fn lift(motion: &MotionVelocity) -> Self {
        LiftedVector(SVector::from_fn(|i, _| monomial_value(&COLUMN_MONOMIALS[i], motion)))
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        COLUMN_NAMES.iter().position(|n| *n == name).map(|i| self.0[i])
    }

    pub fn d_block(&self) -> Vec3 {
        Vec3::new(self.0[0], self.0[1], self.0[2])
    }

    pub fn scaled(&self, s: f64) -> Self {
        LiftedVector(self.0 * s)
    }
}

#[derive(Debug, Clone, Copy)]
enum Target {
    Retained(usize),
    Dropped(usize),
}

#[derive(Debug, Clone, Copy)]
struct Term {
    i: usize,
    j: usize,
    target: Target,
    coeff: f64,
    pow_a: i32,
    pow_k: i32,
    pow_b: i32,
}

impl Term {
    fn known_factor(&self, a: f64, k: f64, b: f64) -> f64 {
        self.coeff * a.powi(self.pow_a) * k.powi(self.pow_k) * b.powi(self.pow_b)
    }
}

struct Compiled {
    terms: Vec<Term>,
    dropped: Vec<Monomial>,
}

fn compiled() -> &'static Compiled {
    static C: OnceLock<Compiled> = OnceLock::new();
    C.get_or_init(|| {
        let e = symbolic_essential();
        let mut terms = Vec::new();
        let mut dropped: Vec<Monomial> = Vec::new();
        for (i, row) in e.iter().enumerate() {
            for (j, entry) in row.iter().enumerate() {
                for (exp, &coeff) in entry.terms() {
                    let mono: Monomial = exp[..poly::N_UNKNOWNS].try_into().unwrap();
                    let target = if unknown_degree(exp) <= 2 {
                        Target::Retained(column_of(&mono).unwrap_or_else(|| panic!("monomial {mono:?} missing from the lifted basis")))
                    } else {
                        let idx = dropped.iter().position(|m| *m == mono).unwrap_or_else(|| {
                            dropped.push(mono);
                            dropped.len() - 1
                        });
                        Target::Dropped(idx)
                    };
                    terms.push(Term {
                        i,
                        j,
                        target,
                        coeff,
                        pow_a: exp[poly::A] as i32,
                        pow_k: exp[poly::K] as i32,
                        pow_b: exp[poly::B] as i32,
                    });
                }
            }
        }
        Compiled { terms, dropped }
    })
}

/// Degree-3 monomials of the expansion, omitted from the lifted system.
pub fn dropped_monomials() -> &'static [Monomial] {
    &compiled().dropped
}

/// Known quantities of one normalized temporal match.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RowPairData {
    pub x_a: Vec3,
    pub x_b: Vec3,
    pub coeffs: RowPairCoefficients,
    /// Signed half baseline (`+b` left, `-b` right).
    pub signed_baseline: f64,
}

/// Coefficients `r` with `r . lift(m) = x_b^T E_truncated(m) x_a` for every
/// motion `m`, followed by the coefficients of the dropped monomials.
pub fn design_row_full(data: &RowPairData) -> (SVector<f64, LIFTED_DIM>, Vec<f64>) {
    let c = compiled();
    let mut row = SVector::<f64, LIFTED_DIM>::zeros();
    let mut extra = vec![0.0; c.dropped.len()];
    let (a, k, b) = (data.coeffs.a, data.coeffs.k_a, data.signed_baseline);
    for t in &c.terms {
        let v = t.known_factor(a, k, b) * data.x_b[t.i] * data.x_a[t.j];
        match t.target {
            Target::Retained(col) => row[col] += v,
            Target::Dropped(col) => extra[col] += v,
        }
    }
    (row, extra)
}

pub fn design_row(data: &RowPairData) -> SVector<f64, LIFTED_DIM> {
    let c = compiled();
    let mut row = SVector::<f64, LIFTED_DIM>::zeros();
    let (a, k, b) = (data.coeffs.a, data.coeffs.k_a, data.signed_baseline);
    for t in &c.terms {
        if let Target::Retained(col) = t.target {
            row[col] += t.known_factor(a, k, b) * data.x_b[t.i] * data.x_a[t.j];
        }
    }
    row
}

/// Truncated essential matrix of a row pair with the lifted entries taken
/// from `x` rather than from a motion. Linear in `x`.
pub fn essential_from_lifted(x: &LiftedVector, coeffs: &RowPairCoefficients, signed_baseline: f64) -> Mat3 {
    let mut e = Mat3::zeros();
    for t in &compiled().terms {
        if let Target::Retained(col) = t.target {
            e[(t.i, t.j)] += t.known_factor(coeffs.a, coeffs.k_a, signed_baseline) * x.0[col];
        }
    }
    e
}

pub(crate) fn row_pair_data(rig: &StereoRigConfig, side_sign: f64, x_a: Vec3, x_b: Vec3, u_a: f64, u_b: f64) -> RowPairData {
    RowPairData { x_a, x_b, coeffs: RowPairCoefficients::new(rig, u_a, u_b), signed_baseline: side_sign * rig.half_baseline() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::essential::{epipolar_residual, essential_expanded};
    use crate::geom::Side;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_motion(rng: &mut ChaCha8Rng) -> MotionVelocity {
        let mut v = || Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        MotionVelocity::new(v() * 0.02, v() * 0.5)
    }

    #[test]
    fn basis_is_exactly_the_expansion() {
        let c = compiled();
        let mut used = [false; LIFTED_DIM];
        for t in &c.terms {
            if let Target::Retained(col) = t.target {
                used[col] = true;
            }
        }
        assert!(used.iter().all(|&u| u), "unused columns: {used:?}");
        // No standalone w2 and no w2^2.
        assert!(column_of(&[0, 0, 0, 0, 1, 0]).is_none());
        assert!(column_of(&[0, 0, 0, 0, 2, 0]).is_none());
        assert_eq!(dropped_monomials().len(), 15);
        for m in dropped_monomials() {
            let d_deg: u8 = m[..3].iter().sum();
            let w_deg: u8 = m[3..].iter().sum();
            assert_eq!((d_deg, w_deg), (1, 2));
        }
    }

    #[test]
    fn lifting_consistency() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for i in 0..500 {
            let rig = StereoRigConfig::new(rng.random_range(0.05..1.0), rng.random_range(0.1..=1.0), 900).unwrap();
            let m = random_motion(&mut rng);
            let side = if i % 2 == 0 { Side::Left } else { Side::Right };
            let (u_a, u_b) = (rng.random_range(0.0..900.0), rng.random_range(0.0..900.0));
            let x_a = Vec3::new(rng.random_range(-0.6..0.6), rng.random_range(-0.6..0.6), 1.0);
            let x_b = Vec3::new(rng.random_range(-0.6..0.6), rng.random_range(-0.6..0.6), 1.0);
            let data = row_pair_data(&rig, side.sign(), x_a, x_b, u_a, u_b);
            let row = design_row(&data);
            let lifted = LiftedVector::lift(&m);
            let e = essential_expanded(&rig, &m, side, u_a, u_b, false).unwrap().matrix;
            assert!((row.dot(&lifted.0) - epipolar_residual(&e, &x_a, &x_b)).abs() <= 1e-12);

            let (full_row, extra) = design_row_full(&data);
            let cubic: f64 = extra.iter().zip(dropped_monomials()).map(|(c, mono)| c * monomial_value(mono, &m)).sum();
            let e_full = essential_expanded(&rig, &m, side, u_a, u_b, true).unwrap().matrix;
            assert!((full_row.dot(&lifted.0) + cubic - epipolar_residual(&e_full, &x_a, &x_b)).abs() <= 1e-12);

            let e_lifted = essential_from_lifted(&lifted, &data.coeffs, data.signed_baseline);
            assert!((e_lifted - e).norm() <= 1e-12);
        }
    }

    #[test]
    fn pure_translation_rows() {
        // With w = 0 only the d columns contribute to the residual.
        let rig = StereoRigConfig::new(0.5, 0.8, 900).unwrap();
        let m = MotionVelocity::new(Vec3::zeros(), Vec3::new(0.1, 0.2, 0.3));
        let data = row_pair_data(&rig, 1.0, Vec3::new(0.1, -0.2, 1.0), Vec3::new(0.12, -0.18, 1.0), 300.0, 320.0);
        let row = design_row(&data);
        let lifted = LiftedVector::lift(&m);
        let d_only: f64 = (0..3).map(|i| row[i] * lifted.0[i]).sum();
        assert!((row.dot(&lifted.0) - d_only).abs() < 1e-15);
        assert!(lifted.0.iter().skip(3).all(|&x| x == 0.0));
    }

    #[test]
    fn optical_axis_row_structure() {
        // x_a = x_b = (0, 0, 1) and u = 0: a = 1, k = 0.
        let rig = StereoRigConfig::new(0.5, 0.8, 900).unwrap();
        let o = Vec3::new(0.0, 0.0, 1.0);
        let data = row_pair_data(&rig, 1.0, o, o, 0.0, 0.0);
        let row = design_row(&data);
        // The residual is E33 = -(T1 w1 + T2 w2) with T = (d1 + b w3, d2, d3 - b w1).
        let nonzero: Vec<_> = row.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(i, _)| COLUMN_NAMES[i]).collect();
        assert_eq!(nonzero, vec!["E11", "E22", "w1w3"]);
        assert_eq!(row[16], -0.5);
    }

    #[test]
    fn lift_names() {
        let m = MotionVelocity::new(Vec3::new(1.0, 2.0, 3.0), Vec3::new(4.0, 5.0, 6.0));
        let l = LiftedVector::lift(&m);
        assert_eq!(l.get("E23"), Some(5.0 * 3.0));
        assert_eq!(l.get("w1w3"), Some(3.0));
        assert_eq!(l.get("w3"), Some(3.0));
        assert_eq!(l.get("S1"), None);
    }
}
