//! Two-point Hermite bases on the unit interval.
//!
//! Basis function `h^{2d+e}` matches the `d`-th derivative at endpoint `e`
//! (`e = 0` for τ = 0, `e = 1` for τ = 1) and vanishes in every other
//! matched quantity. Coefficients are solved exactly over the rationals.

use num_rational::Ratio;

use crate::error::{domain, HnsError, Result};

pub type Rational = Ratio<i64>;

/// Interpolation degree `p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Degree {
    Linear = 1,
    Cubic = 3,
    Quintic = 5,
}

impl Degree {
    pub const ALL: [Degree; 3] = [Degree::Linear, Degree::Cubic, Degree::Quintic];

    pub fn p(self) -> usize {
        self as usize
    }

    /// Number of matched derivative orders per endpoint, `(p + 1) / 2`.
    pub fn orders(self) -> usize {
        self.p().div_ceil(2)
    }
}

impl TryFrom<usize> for Degree {
    type Error = HnsError;
    fn try_from(p: usize) -> Result<Self> {
        match p {
            1 => Ok(Degree::Linear),
            3 => Ok(Degree::Cubic),
            5 => Ok(Degree::Quintic),
            _ => domain(format!("Hermite degree must be 1, 3 or 5, got {p}")),
        }
    }
}

/// Polynomial in τ with rational coefficients, lowest power first.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly(pub Vec<Rational>);

impl Poly {
    pub fn derivative(&self) -> Poly {
        Poly(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(j, c)| c * Rational::from_integer(j as i64))
                .collect(),
        )
    }

    /// Exact `k`-th derivative at a rational point.
    pub fn eval_derivative(&self, k: usize, tau: Rational) -> Rational {
        let mut p = self.clone();
        for _ in 0..k {
            p = p.derivative();
        }
        p.0.iter().rev().fold(Rational::from_integer(0), |acc, c| acc * tau + c)
    }

    pub fn eval(&self, tau: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, c| acc * tau + to_f64(*c))
    }

    pub fn coeffs_f64(&self) -> Vec<f64> {
        self.0.iter().map(|c| to_f64(*c)).collect()
    }
}

fn to_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// The `p + 1` Hermite basis polynomials for one degree.
#[derive(Clone, Debug)]
pub struct HermiteBasis {
    degree: Degree,
    funcs: Vec<Poly>,
}

impl HermiteBasis {
    pub fn degree(&self) -> Degree {
        self.degree
    }

    /// Basis function matching derivative order `d` at endpoint `side`.
    pub fn function(&self, d: usize, side: usize) -> &Poly {
        &self.funcs[2 * d + side]
    }

    /// All functions in the order `h^0 … h^p`.
    pub fn functions(&self) -> &[Poly] {
        &self.funcs
    }
}

/// Build the Hermite basis of degree `p ∈ {1, 3, 5}`.
pub fn hermite_basis(p: usize) -> Result<HermiteBasis> {
    let degree = Degree::try_from(p)?;
    let m = degree.orders();
    let n = p + 1;
    let zero = Rational::from_integer(0);
    let one = Rational::from_integer(1);

    // Row (side, r) holds the r-th derivative of τ^j at τ = side.
    let mut rows = vec![vec![zero; n]; n];
    for side in 0..2 {
        for r in 0..m {
            let row = &mut rows[2 * r + side];
            for (j, cell) in row.iter_mut().enumerate() {
                if j < r {
                    continue;
                }
                let falling: i64 = ((j - r + 1)..=j).map(|v| v as i64).product();
                *cell = if side == 0 {
                    if j == r { Rational::from_integer(falling) } else { zero }
                } else {
                    Rational::from_integer(falling)
                };
            }
        }
    }

    let funcs = (0..n)
        .map(|target| {
            let mut rhs = vec![zero; n];
            rhs[target] = one;
            Poly(solve_exact(rows.clone(), rhs))
        })
        .collect();
    Ok(HermiteBasis { degree, funcs })
}

/// Gauss–Jordan elimination over the rationals. The systems here are the
/// nonsingular Hermite confluent-Vandermonde matrices.
fn solve_exact(mut a: Vec<Vec<Rational>>, mut b: Vec<Rational>) -> Vec<Rational> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| a[r][col] != Rational::from_integer(0))
            .expect("Hermite system is nonsingular");
        a.swap(col, pivot);
        b.swap(col, pivot);
        let inv = a[col][col].recip();
        for c in col..n {
            a[col][c] *= inv;
        }
        b[col] *= inv;
        for r in 0..n {
            if r != col && a[r][col] != Rational::from_integer(0) {
                let f = a[r][col];
                for c in col..n {
                    let v = a[col][c];
                    a[r][c] -= f * v;
                }
                let v = b[col];
                b[r] -= f * v;
            }
        }
    }
    b
}
