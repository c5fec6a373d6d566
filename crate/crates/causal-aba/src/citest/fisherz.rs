//! Fisher-z conditional-independence test for (approximately) Gaussian
//! data.
//!
//! The partial correlation of `x, y` given `z` is read off the inverse of
//! the correlation submatrix over `{x, y} ∪ z`; the z-transform
//! `√(n − |z| − 3) · atanh(r)` is standard-normal under independence, and
//! the two-sided p-value comes from the normal tail.

use super::{CitError, CitResult, CiTester, Dataset};
use crate::graph::{CondSet, GraphError, Node};
use statrs::function::erf::erfc;

/// Pivots smaller than this (in absolute value) mark the correlation
/// submatrix as numerically singular.
const PIVOT_TOL: f64 = 1e-10;

/// Keeps `atanh` finite when the estimated correlation saturates.
const CORR_CLAMP: f64 = 1.0 - 1e-12;

/// Fisher-z tester. The full correlation matrix is computed once at
/// construction; each query inverts only the `(|z| + 2)`-sized submatrix.
#[derive(Debug, Clone)]
pub struct FisherZ {
    corr: Vec<Vec<f64>>,
    n: usize,
}

impl FisherZ {
    /// Computes the correlation matrix. Errors on a constant column, where
    /// correlations are undefined.
    pub fn new(ds: &Dataset) -> Result<Self, CitError> {
        let d = ds.d();
        let n = ds.n();
        let mut centered: Vec<Vec<f64>> = Vec::with_capacity(d);
        let mut norms: Vec<f64> = Vec::with_capacity(d);
        for j in 0..d {
            let col = ds.column(j);
            let mean = col.iter().sum::<f64>() / n as f64;
            let c: Vec<f64> = col.iter().map(|v| v - mean).collect();
            let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm == 0.0 {
                return Err(CitError::ConstantColumn(ds.names()[j].clone()));
            }
            centered.push(c);
            norms.push(norm);
        }
        let mut corr = vec![vec![0.0; d]; d];
        for i in 0..d {
            corr[i][i] = 1.0;
            for j in i + 1..d {
                let dot: f64 = centered[i].iter().zip(&centered[j]).map(|(a, b)| a * b).sum();
                let r = (dot / (norms[i] * norms[j])).clamp(-1.0, 1.0);
                corr[i][j] = r;
                corr[j][i] = r;
            }
        }
        Ok(FisherZ { corr, n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn correlation(&self, i: Node, j: Node) -> f64 {
        self.corr[i][j]
    }
}

impl CiTester for FisherZ {
    fn d(&self) -> usize {
        self.corr.len()
    }

    fn test(&self, x: Node, y: Node, z: &CondSet) -> Result<CitResult, CitError> {
        validate_query(self.d(), x, y, z)?;
        let dof = self.n as isize - z.len() as isize - 3;
        if dof <= 0 {
            return Err(CitError::TooFewSamples { n: self.n, z: z.len() });
        }
        // Canonicalize the pair so both query orders share one float path.
        let r = partial_correlation(&self.corr, x.min(y), x.max(y), z)?;
        let r = r.clamp(-CORR_CLAMP, CORR_CLAMP);
        let statistic = (dof as f64).sqrt() * r.atanh();
        let p = erfc(statistic.abs() / std::f64::consts::SQRT_2);
        Ok(CitResult { p, statistic })
    }
}

/// Partial correlation of `x` and `y` given `z`, from a full correlation
/// matrix: `-P₀₁ / √(P₀₀ P₁₁)` where `P` inverts the submatrix over
/// `[x, y, z...]`.
pub fn partial_correlation(
    corr: &[Vec<f64>],
    x: Node,
    y: Node,
    z: &CondSet,
) -> Result<f64, CitError> {
    validate_query(corr.len(), x, y, z)?;
    let vars: Vec<Node> = [x, y].into_iter().chain(z.iter().copied()).collect();
    let sub: Vec<Vec<f64>> = vars
        .iter()
        .map(|&i| vars.iter().map(|&j| corr[i][j]).collect())
        .collect();
    let p = invert(sub)?;
    let denom = p[0][0] * p[1][1];
    if denom <= 0.0 {
        return Err(CitError::SingularMatrix);
    }
    Ok((-p[0][1] / denom.sqrt()).clamp(-1.0, 1.0))
}

/// Gauss-Jordan inversion with partial pivoting.
fn invert(mut a: Vec<Vec<f64>>) -> Result<Vec<Vec<f64>>, CitError> {
    let k = a.len();
    let mut inv = vec![vec![0.0; k]; k];
    for (i, row) in inv.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for col in 0..k {
        let pivot_row = (col..k)
            .max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs()))
            .expect("nonempty range");
        if a[pivot_row][col].abs() < PIVOT_TOL {
            return Err(CitError::SingularMatrix);
        }
        a.swap(col, pivot_row);
        inv.swap(col, pivot_row);
        let pivot = a[col][col];
        for j in 0..k {
            a[col][j] /= pivot;
            inv[col][j] /= pivot;
        }
        for r in 0..k {
            if r == col {
                continue;
            }
            let f = a[r][col];
            if f == 0.0 {
                continue;
            }
            for j in 0..k {
                a[r][j] -= f * a[col][j];
                inv[r][j] -= f * inv[col][j];
            }
        }
    }
    Ok(inv)
}

fn validate_query(d: usize, x: Node, y: Node, z: &CondSet) -> Result<(), CitError> {
    for &v in [x, y].iter().chain(z.iter()) {
        if v >= d {
            return Err(GraphError::NodeOutOfRange { node: v, d }.into());
        }
    }
    if x == y {
        return Err(GraphError::IdenticalQueryNodes.into());
    }
    if z.contains(&x) {
        return Err(GraphError::QueryInConditioningSet(x).into());
    }
    if z.contains(&y) {
        return Err(GraphError::QueryInConditioningSet(y).into());
    }
    Ok(())
}
