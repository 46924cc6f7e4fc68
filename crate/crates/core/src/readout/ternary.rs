use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::par;

/// Rows at most this wide are solved by enumerating all `3^width` candidates;
/// wider rows use coordinate descent.
pub const EXHAUSTIVE_MAX_WIDTH: usize = 8;

/// Entries in {-1, 0, +1}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TernaryMatrix {
    pub entries: DMatrix<i8>,
}

impl TernaryMatrix {
    pub fn new(entries: DMatrix<i8>) -> Result<Self> {
        if entries.iter().any(|v| !(-1..=1).contains(v)) {
            return Err(Error::invalid("ternary entries must be -1, 0 or 1"));
        }
        Ok(Self { entries })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            entries: DMatrix::zeros(rows, cols),
        }
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        self.entries.map(f64::from)
    }

    pub fn nnz(&self) -> usize {
        self.entries.iter().filter(|v| **v != 0).count()
    }
}

/// `‖w r - x_row‖²` evaluated directly on the samples.
pub fn ternary_row_objective(w: &[i8], r: &DMatrix<f64>, x_row: &[f64]) -> f64 {
    (0..r.ncols())
        .map(|k| {
            let pred: f64 = w
                .iter()
                .enumerate()
                .filter(|(_, &wi)| wi != 0)
                .map(|(i, &wi)| f64::from(wi) * r[(i, k)])
                .sum();
            (pred - x_row[k]).powi(2)
        })
        .sum()
}

/// `‖W r - x‖²_F`.
pub fn ternary_objective(w: &TernaryMatrix, r: &DMatrix<f64>, x: &DMatrix<f64>) -> f64 {
    (0..w.entries.nrows())
        .map(|i| {
            let row: Vec<i8> = w.entries.row(i).iter().copied().collect();
            let xr: Vec<f64> = x.row(i).iter().copied().collect();
            ternary_row_objective(&row, r, &xr)
        })
        .sum()
}

/// Quadratic form of one row problem: `w G wᵀ - 2 w·b + c`.
struct RowProblem<'a> {
    gram: &'a DMatrix<f64>,
    b: DVector<f64>,
}

impl RowProblem<'_> {
    fn objective(&self, w: &[i8]) -> f64 {
        let n = w.len();
        let mut q = 0.0;
        for i in 0..n {
            if w[i] == 0 {
                continue;
            }
            let wi = f64::from(w[i]);
            q -= 2.0 * wi * self.b[i];
            for j in 0..n {
                if w[j] != 0 {
                    q += wi * f64::from(w[j]) * self.gram[(i, j)];
                }
            }
        }
        q
    }

    fn exhaustive(&self, n: usize) -> Vec<i8> {
        let total = 3usize.pow(n as u32);
        let mut best = vec![0i8; n];
        let mut best_obj = 0.0;
        let mut w = vec![0i8; n];
        for code in 1..total {
            let mut c = code;
            for wi in w.iter_mut() {
                *wi = (c % 3) as i8 - 1;
                c /= 3;
            }
            let obj = self.objective(&w);
            if obj < best_obj {
                best_obj = obj;
                best.copy_from_slice(&w);
            }
        }
        // code 0 is the all -1 vector, not covered by the zero start
        let all_neg = vec![-1i8; n];
        if n > 0 && self.objective(&all_neg) < best_obj {
            best = all_neg;
        }
        best
    }

    /// Single-entry moves until none strictly improves.
    fn descend(&self, mut w: Vec<i8>) -> Vec<i8> {
        let n = w.len();
        // g = G w - b
        let mut g: Vec<f64> = (0..n)
            .map(|i| {
                (0..n)
                    .filter(|&j| w[j] != 0)
                    .map(|j| self.gram[(i, j)] * f64::from(w[j]))
                    .sum::<f64>()
                    - self.b[i]
            })
            .collect();
        let scale = self.gram.diagonal().amax().max(self.b.amax()).max(f64::MIN_POSITIVE);
        let tol = 1e-12 * scale;
        let mut improved = true;
        let mut sweeps = 0;
        while improved && sweeps < 1000 {
            improved = false;
            sweeps += 1;
            for j in 0..n {
                let a = f64::from(w[j]);
                let gjj = self.gram[(j, j)];
                let mut best = (0.0, w[j]);
                for cand in [-1i8, 0, 1] {
                    if cand == w[j] {
                        continue;
                    }
                    let d = f64::from(cand) - a;
                    let delta = d * d * gjj + 2.0 * d * g[j];
                    if delta < best.0 - tol {
                        best = (delta, cand);
                    }
                }
                if best.1 != w[j] {
                    let d = f64::from(best.1) - a;
                    for i in 0..n {
                        g[i] += d * self.gram[(i, j)];
                    }
                    w[j] = best.1;
                    improved = true;
                }
            }
        }
        w
    }
}

/// Row-wise ternary least squares: each row of the result minimizes
/// `‖w r - x_row‖²` over `w ∈ {-1,0,1}^N`. Narrow rows are solved exactly;
/// wider rows start from the full-precision solution thresholded at half its
/// largest magnitude and descend to a single-move local minimum, never ending
/// above the starting objective. A second descent from the zero vector is
/// kept if it ends lower, so a wide row never scores worse than `w = 0`.
pub fn ternary_fit(r: &DMatrix<f64>, x: &DMatrix<f64>) -> Result<TernaryMatrix> {
    let (n, k) = r.shape();
    if x.ncols() != k {
        return Err(Error::Dimension {
            context: "ternary target samples",
            expected: k,
            actual: x.ncols(),
        });
    }
    let rows = x.nrows();
    if n == 0 || rows == 0 || r.iter().all(|v| *v == 0.0) {
        return Ok(TernaryMatrix::zeros(rows, n));
    }
    let gram = r * r.transpose();
    let bmat = r * x.transpose();
    let full = if n > EXHAUSTIVE_MAX_WIDTH {
        Some(
            gram.clone()
                .svd(true, true)
                .solve(&bmat, 1e-12 * gram.diagonal().amax())
                .map_err(|e| Error::invalid(e.to_string()))?,
        )
    } else {
        None
    };

    let solved: Vec<Vec<i8>> = par::map_range(rows, |i| {
        let problem = RowProblem {
            gram: &gram,
            b: bmat.column(i).into_owned(),
        };
        match &full {
            None => problem.exhaustive(n),
            Some(full) => {
                let col = full.column(i);
                let cut = 0.5 * col.amax();
                let init: Vec<i8> = col
                    .iter()
                    .map(|&v| {
                        if cut > 0.0 && v.abs() >= cut {
                            v.signum() as i8
                        } else {
                            0
                        }
                    })
                    .collect();
                let from_init = problem.descend(init);
                let from_zero = problem.descend(vec![0; n]);
                if problem.objective(&from_zero) < problem.objective(&from_init) {
                    from_zero
                } else {
                    from_init
                }
            }
        }
    });
    let entries = DMatrix::from_fn(rows, n, |i, j| solved[i][j]);
    Ok(TernaryMatrix { entries })
}

/// Thresholded full-precision start used for wide rows, exposed for tests.
#[doc(hidden)]
pub fn ternary_initialization(r: &DMatrix<f64>, x: &DMatrix<f64>) -> Result<TernaryMatrix> {
    let gram = r * r.transpose();
    let bmat = r * x.transpose();
    let full = gram
        .clone()
        .svd(true, true)
        .solve(&bmat, 1e-12 * gram.diagonal().amax())
        .map_err(|e| Error::invalid(e.to_string()))?;
    let entries = DMatrix::from_fn(x.nrows(), r.nrows(), |i, j| {
        let col = full.column(i);
        let cut = 0.5 * col.amax();
        let v = col[j];
        if cut > 0.0 && v.abs() >= cut {
            v.signum() as i8
        } else {
            0
        }
    });
    Ok(TernaryMatrix { entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rows: usize, cols: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DMatrix::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..1.0))
    }

    #[test]
    fn zero_target_gives_zero() {
        let r = random(5, 40, 1);
        let x = DMatrix::zeros(3, 40);
        assert_eq!(ternary_fit(&r, &x).unwrap().nnz(), 0);
        let r12 = random(12, 40, 1);
        assert_eq!(ternary_fit(&r12, &DMatrix::zeros(2, 40)).unwrap().nnz(), 0);
    }

    #[test]
    fn zero_states_give_zero() {
        let w = ternary_fit(&DMatrix::zeros(4, 10), &random(2, 10, 3)).unwrap();
        assert_eq!(w.entries.shape(), (2, 4));
        assert_eq!(w.nnz(), 0);
    }

    #[test]
    fn recovers_exact_ternary_weights() {
        let r = random(12, 200, 5);
        let truth = TernaryMatrix::new(DMatrix::from_fn(3, 12, |i, j| ((i + 2 * j) % 3) as i8 - 1))
            .unwrap();
        let x = truth.to_f64() * &r;
        assert_eq!(ternary_fit(&r, &x).unwrap(), truth);
    }

    #[test]
    fn descent_beats_initialization() {
        let r = random(16, 80, 9);
        let x = random(4, 80, 10) * 3.0;
        let w = ternary_fit(&r, &x).unwrap();
        let w0 = ternary_initialization(&r, &x).unwrap();
        assert!(ternary_objective(&w, &r, &x) <= ternary_objective(&w0, &r, &x) + 1e-9);
        assert!(ternary_objective(&w, &r, &x) <= ternary_objective(&TernaryMatrix::zeros(4, 16), &r, &x));
    }

    #[test]
    fn rejects_bad_entries() {
        assert!(TernaryMatrix::new(DMatrix::from_element(1, 1, 2)).is_err());
    }
}
