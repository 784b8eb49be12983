//! Min-max allocation over the unit simplex:
//!
//! ```text
//! minimize z  subject to  Σ_k A[i][k] x_k ≤ z  for every row i,
//!                         Σ_k x_k = 1,  x ≥ 0
//! ```
//!
//! with a non-negative matrix `A`. Solved with a dense-tableau primal simplex
//! (Bland's rule) started from the best single-column vertex, followed by a
//! re-solve of the final basis to clean up accumulated round-off.

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-12;
const REDUCED_COST_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct MinMax {
    /// Point on the simplex, one entry per column.
    pub x: Vec<f64>,
    /// `max_i A[i]·x`.
    pub z: f64,
    /// Simplex iterations after the starting vertex.
    pub pivots: usize,
    /// A column with no cost anywhere absorbed everything.
    pub free_column: bool,
}

/// Solves the min-max problem for `a` (rows × columns, all entries
/// non-negative and finite).
pub fn min_max(a: &[Vec<f64>]) -> Result<MinMax> {
    let m = a.len();
    let n = a.first().map_or(0, Vec::len);
    if n == 0 {
        return Err(Error::Infeasible("no column may carry workload".into()));
    }
    if a.iter().any(|r| r.len() != n) {
        return Err(Error::Contract("ragged coefficient matrix".into()));
    }
    if a.iter().flatten().any(|v| !(*v >= 0.0 && v.is_finite())) {
        return Err(Error::Contract("coefficients must be finite and non-negative".into()));
    }

    if let Some(k) = (0..n).find(|&k| a.iter().all(|r| r[k] == 0.0)) {
        let mut x = vec![0.0; n];
        x[k] = 1.0;
        return Ok(MinMax {
            x,
            z: 0.0,
            pivots: 0,
            free_column: true,
        });
    }
    if m == 0 {
        // Nothing costs anything; the free-column branch caught this.
        unreachable!("a matrix without rows has only free columns");
    }

    let scale = a.iter().flatten().fold(0.0f64, |s, v| s.max(*v));
    let s: Vec<Vec<f64>> = a
        .iter()
        .map(|r| r.iter().map(|v| v / scale).collect())
        .collect();

    let mut t = Tableau::new(&s);
    let pivots = t.optimize()?;
    let mut x = t.basic_solution(&s);

    for v in x.iter_mut() {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    let sum: f64 = x.iter().sum();
    for v in x.iter_mut() {
        *v /= sum;
    }
    let z = a
        .iter()
        .map(|r| r.iter().zip(&x).map(|(c, x)| c * x).sum::<f64>())
        .fold(0.0f64, f64::max);
    Ok(MinMax {
        x,
        z,
        pivots,
        free_column: false,
    })
}

/// Columns: `x_0..x_{n-1}`, `z`, slacks `s_0..s_{m-1}`. Rows `0..m` are
/// `A_i x − z + s_i = 0`, row `m` is `Σ x = 1`.
struct Tableau {
    m: usize,
    n: usize,
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    /// Reduced costs of the objective `min z`.
    obj: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    fn new(a: &[Vec<f64>]) -> Self {
        let m = a.len();
        let n = a[0].len();
        let width = n + 1 + m;
        let mut rows = vec![vec![0.0; width]; m + 1];
        for i in 0..m {
            rows[i][..n].copy_from_slice(&a[i]);
            rows[i][n] = -1.0;
            rows[i][n + 1 + i] = 1.0;
        }
        for v in rows[m][..n].iter_mut() {
            *v = 1.0;
        }
        let mut rhs = vec![0.0; m + 1];
        rhs[m] = 1.0;
        let mut obj = vec![0.0; width];
        obj[n] = 1.0;
        let basis = (0..m).map(|i| n + 1 + i).chain([usize::MAX]).collect();
        let mut t = Self {
            m,
            n,
            rows,
            rhs,
            obj,
            basis,
        };

        // Start at the vertex putting everything on the column with the
        // smallest worst-row cost; z is basic in that column's worst row.
        let col_max = |k: usize| (0..m).map(|i| a[i][k]).fold(0.0f64, f64::max);
        let k_star = (0..n)
            .min_by(|&p, &q| col_max(p).total_cmp(&col_max(q)))
            .unwrap();
        let r_star = (0..m)
            .max_by(|&p, &q| a[p][k_star].total_cmp(&a[q][k_star]).then(q.cmp(&p)))
            .unwrap();
        t.pivot(m, k_star);
        t.pivot(r_star, n);
        for r in t.rhs.iter_mut() {
            if *r < 0.0 && *r > -1e-14 {
                *r = 0.0;
            }
        }
        t
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        self.rhs[r] /= p;
        let prow = self.rows[r].clone();
        let prhs = self.rhs[r];
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            let f = self.rows[i][c];
            if f != 0.0 {
                for (v, pv) in self.rows[i].iter_mut().zip(&prow) {
                    *v -= f * pv;
                }
                self.rows[i][c] = 0.0;
                self.rhs[i] -= f * prhs;
            }
        }
        let f = self.obj[c];
        if f != 0.0 {
            for (v, pv) in self.obj.iter_mut().zip(&prow) {
                *v -= f * pv;
            }
            self.obj[c] = 0.0;
        }
        self.basis[r] = c;
    }

    fn optimize(&mut self) -> Result<usize> {
        let width = self.n + 1 + self.m;
        let max_iter = 50 * (width + self.m + 1);
        for it in 0..max_iter {
            let Some(c) = (0..width).find(|&c| self.obj[c] < -REDUCED_COST_TOL) else {
                return Ok(it);
            };
            let mut best: Option<(usize, f64)> = None;
            for r in 0..=self.m {
                let v = self.rows[r][c];
                if v > PIVOT_TOL {
                    let ratio = self.rhs[r].max(0.0) / v;
                    let better = match best {
                        None => true,
                        Some((br, bratio)) => {
                            ratio < bratio || (ratio == bratio && self.basis[r] < self.basis[br])
                        }
                    };
                    if better {
                        best = Some((r, ratio));
                    }
                }
            }
            let Some((r, _)) = best else {
                return Err(Error::Contract("min-max program reported unbounded".into()));
            };
            self.pivot(r, c);
        }
        Err(Error::Contract("simplex iteration limit reached".into()))
    }

    /// Recomputes the basic variables from the original constraints.
    fn basic_solution(&self, a: &[Vec<f64>]) -> Vec<f64> {
        let (m, n) = (self.m, self.n);
        let dim = m + 1;
        let column = |c: usize, row: usize| -> f64 {
            if row == m {
                if c < n {
                    1.0
                } else {
                    0.0
                }
            } else if c < n {
                a[row][c]
            } else if c == n {
                -1.0
            } else if c - n - 1 == row {
                1.0
            } else {
                0.0
            }
        };
        let mut mat: Vec<Vec<f64>> = (0..dim)
            .map(|row| self.basis.iter().map(|&c| column(c, row)).collect())
            .collect();
        let mut b: Vec<f64> = (0..dim).map(|row| if row == m { 1.0 } else { 0.0 }).collect();
        let Some(sol) = gauss_solve(&mut mat, &mut b) else {
            return self.tableau_solution();
        };
        let mut x = vec![0.0; n];
        for (k, &c) in self.basis.iter().enumerate() {
            if c < n {
                x[c] = sol[k];
            }
        }
        x
    }

    fn tableau_solution(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.n];
        for (r, &c) in self.basis.iter().enumerate() {
            if c < self.n {
                x[c] = self.rhs[r];
            }
        }
        x
    }
}

/// Gaussian elimination with partial pivoting; `None` if singular.
fn gauss_solve(mat: &mut [Vec<f64>], b: &mut [f64]) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let p = (col..n).max_by(|&i, &j| mat[i][col].abs().total_cmp(&mat[j][col].abs()))?;
        if mat[p][col].abs() < 1e-300 {
            return None;
        }
        mat.swap(col, p);
        b.swap(col, p);
        for r in col + 1..n {
            let f = mat[r][col] / mat[col][col];
            if f != 0.0 {
                for c in col..n {
                    mat[r][c] -= f * mat[col][c];
                }
                b[r] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| mat[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / mat[r][r];
    }
    Some(x)
}
