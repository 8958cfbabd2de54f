use num_rational::Ratio;

use super::MrError;
use crate::mesh::{Index, MAX_DIM};

/// Exact rational used for prediction coefficients.
pub type Rational = Ratio<i128>;

/// Largest supported prediction stencil half-width.
pub const MAX_GAMMA: u32 = 3;

/// Tabulated coefficients `c_1..c_γ` of the centered interpolating prediction.
pub fn tabulated_coefficients(gamma: u32) -> Result<Vec<Rational>, MrError> {
    let r = |n: i128, d: i128| Rational::new(n, d);
    match gamma {
        1 => Ok(vec![r(-1, 8)]),
        2 => Ok(vec![r(-22, 128), r(3, 128)]),
        3 => Ok(vec![r(-201, 1024), r(11, 256), r(-5, 1024)]),
        g => Err(MrError::InvalidGamma(g)),
    }
}

/// Derive `c_1..c_γ` from scratch: fit the polynomial of degree `2γ` whose cell means match
/// `2γ+1` consecutive data, then average it over the left half of the central cell.
pub fn derive_prediction_weights(gamma: u32) -> Result<Vec<Rational>, MrError> {
    if gamma == 0 || gamma > 6 {
        return Err(MrError::InvalidGamma(gamma));
    }
    let g = gamma as i128;
    let n = (2 * gamma + 1) as usize;
    let half = Rational::new(1, 2);
    let pow = |x: Rational, e: usize| -> Rational {
        let mut acc = Rational::from_integer(1);
        for _ in 0..e {
            acc *= x;
        }
        acc
    };
    // T[δ][m] = ∫_{δ-1/2}^{δ+1/2} x^m dx
    let mut t = vec![vec![Rational::from_integer(0); n]; n];
    for (row, delta) in (-g..=g).enumerate() {
        let a = Rational::from_integer(delta) - half;
        let b = Rational::from_integer(delta) + half;
        for (m, entry) in t[row].iter_mut().enumerate() {
            *entry = (pow(b, m + 1) - pow(a, m + 1)) / Rational::from_integer(m as i128 + 1);
        }
    }
    // left-child mean of x^m: 2 ∫_{-1/2}^{0} x^m dx
    let left: Vec<Rational> = (0..n)
        .map(|m| {
            Rational::from_integer(-2) * pow(-half, m + 1) / Rational::from_integer(m as i128 + 1)
        })
        .collect();
    // Solve T^T y = left; then the left-child prediction is Σ_δ y_δ f_δ.
    let mut a: Vec<Vec<Rational>> = (0..n)
        .map(|i| {
            let mut row: Vec<Rational> = (0..n).map(|j| t[j][i]).collect();
            row.push(left[i]);
            row
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| a[r][col] != Rational::from_integer(0))
            .ok_or(MrError::SingularSystem)?;
        a.swap(col, pivot);
        let p = a[col][col];
        for j in col..=n {
            a[col][j] /= p;
        }
        for r in 0..n {
            if r != col && a[r][col] != Rational::from_integer(0) {
                let f = a[r][col];
                for j in col..=n {
                    let v = a[col][j];
                    a[r][j] -= f * v;
                }
            }
        }
    }
    let w: Vec<Rational> = a.iter().map(|row| row[n]).collect();
    let center = gamma as usize;
    if w[center] != Rational::from_integer(1) {
        return Err(MrError::SingularSystem);
    }
    let mut coeffs = Vec::with_capacity(gamma as usize);
    for alpha in 1..=gamma as usize {
        let plus = w[center + alpha];
        let minus = w[center - alpha];
        if plus != -minus {
            return Err(MrError::SingularSystem);
        }
        coeffs.push(plus);
    }
    Ok(coeffs)
}

/// Tensor-product prediction operator of order `2γ+1` in dimension `d`.
///
/// Children are numbered with the first axis fastest; stencil offsets span `[-γ, γ]^d` around
/// the parent, also first axis fastest.
#[derive(Debug, Clone)]
pub struct Prediction {
    dim: usize,
    gamma: u32,
    coeffs: Vec<Rational>,
    offsets: Vec<Index>,
    weights: Vec<Vec<f64>>,
}

impl Prediction {
    pub fn new(dim: usize, gamma: u32) -> Result<Self, MrError> {
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(MrError::InvalidDimension(dim));
        }
        let coeffs = tabulated_coefficients(gamma)?;
        let g = gamma as i32;
        let mut offsets = Vec::new();
        let rz = if dim > 2 { g } else { 0 };
        let ry = if dim > 1 { g } else { 0 };
        for z in -rz..=rz {
            for y in -ry..=ry {
                for x in -g..=g {
                    offsets.push([x, y, z]);
                }
            }
        }
        let mut p = Self {
            dim,
            gamma,
            coeffs,
            offsets,
            weights: Vec::new(),
        };
        p.weights = (0..1usize << dim)
            .map(|c| {
                let delta = child_delta(dim, c);
                p.offsets
                    .iter()
                    .map(|o| (0..dim).map(|i| p.weight_1d(delta[i], o[i])).product())
                    .collect()
            })
            .collect();
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn gamma(&self) -> u32 {
        self.gamma
    }
    pub fn coefficients(&self) -> &[Rational] {
        &self.coeffs
    }
    pub fn coefficients_f64(&self) -> Vec<f64> {
        self.coeffs.iter().map(to_f64).collect()
    }
    /// Stencil offsets around the parent.
    pub fn offsets(&self) -> &[Index] {
        &self.offsets
    }
    /// Weights of child `c` aligned with [`Prediction::offsets`].
    pub fn weights(&self, child: usize) -> &[f64] {
        &self.weights[child]
    }

    /// One-dimensional weight of offset `o` for the child on side `delta ∈ {0, 1}`.
    pub fn weight_1d(&self, delta: i32, o: i32) -> f64 {
        to_f64(&self.weight_1d_exact(delta, o))
    }

    pub fn weight_1d_exact(&self, delta: i32, o: i32) -> Rational {
        if o == 0 {
            return Rational::from_integer(1);
        }
        let a = o.unsigned_abs() as usize;
        if a > self.gamma as usize {
            return Rational::from_integer(0);
        }
        let c = self.coeffs[a - 1];
        let sign_delta = if delta == 0 { 1 } else { -1 };
        let sign_o = if o > 0 { 1 } else { -1 };
        c * Rational::from_integer(sign_delta * sign_o)
    }

    /// Predict child `c` from parent-level stencil values aligned with the offsets.
    pub fn predict(&self, stencil: &[f64], child: usize) -> f64 {
        self.weights[child]
            .iter()
            .zip(stencil)
            .map(|(w, v)| w * v)
            .sum()
    }

    /// Predict every child from the same stencil.
    pub fn predict_all(&self, stencil: &[f64]) -> Vec<f64> {
        (0..1usize << self.dim)
            .map(|c| self.predict(stencil, c))
            .collect()
    }
}

/// Offset `δ ∈ {0,1}^d` of child number `c` (first axis fastest).
pub fn child_delta(dim: usize, c: usize) -> Index {
    let mut d = [0; MAX_DIM];
    for (i, v) in d.iter_mut().enumerate().take(dim) {
        *v = ((c >> i) & 1) as i32;
    }
    d
}

/// Projection: mean of the children values.
pub fn project(children: &[f64]) -> f64 {
    children.iter().sum::<f64>() / children.len() as f64
}

pub(crate) fn to_f64(r: &Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}
