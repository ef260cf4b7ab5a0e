//! Log-space special functions for the collapsed Pitman-Yor likelihood.
//!
//! Generalized Stirling numbers `S^n_{m,a}` follow the recurrence
//!
//! ```text
//! S^{n+1}_{m,a} = S^n_{m-1,a} + (n - m a) S^n_{m,a},   S^0_{0,a} = 1
//! ```
//!
//! and are zero for `m > n` and for `m = 0 < n`. They grow super-exponentially,
//! so only logarithms are stored; the Gibbs conditionals need nothing but the
//! ratios `S^{n+1}_{m+1} / S^n_m` and `S^{n+1}_m / S^n_m`, which are
//! precomputed in linear space.

use std::sync::{Arc, RwLock};

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Immutable table of `log S^n_{m,a}` for `0 <= m <= n <= n_max`.
#[derive(Debug, Clone)]
pub struct StirlingTable {
    discount: f64,
    // rows[n][m], m in 0..=n
    rows: Vec<Vec<f64>>,
    // new_table[n][m] = S^{n+1}_{m+1} / S^n_m, same_table[n][m] = S^{n+1}_m / S^n_m
    new_table: Vec<Vec<f64>>,
    same_table: Vec<Vec<f64>>,
}

fn log_add(x: f64, y: f64) -> f64 {
    if x == f64::NEG_INFINITY {
        return y;
    }
    if y == f64::NEG_INFINITY {
        return x;
    }
    let (hi, lo) = if x > y { (x, y) } else { (y, x) };
    hi + (lo - hi).exp().ln_1p()
}

impl StirlingTable {
    fn with_rows(discount: f64, rows: Vec<Vec<f64>>) -> Self {
        let n_max = rows.len() - 1;
        let mut new_table = Vec::with_capacity(n_max);
        let mut same_table = Vec::with_capacity(n_max);
        for n in 0..n_max {
            let cur = &rows[n];
            let next = &rows[n + 1];
            new_table.push((0..=n).map(|m| (next[m + 1] - cur[m]).exp()).collect());
            same_table.push((0..=n).map(|m| (next[m] - cur[m]).exp()).collect());
        }
        Self {
            discount,
            rows,
            new_table,
            same_table,
        }
    }

    fn extend_rows(discount: f64, rows: &mut Vec<Vec<f64>>, n_max: usize) {
        if rows.is_empty() {
            rows.push(vec![0.0]);
        }
        while rows.len() <= n_max {
            let n = rows.len() - 1;
            let prev = &rows[n];
            let mut row = vec![f64::NEG_INFINITY; n + 2];
            for (m, slot) in row.iter_mut().enumerate() {
                let from_new = if m >= 1 { prev[m - 1] } else { f64::NEG_INFINITY };
                let from_same = if m <= n {
                    let w = n as f64 - m as f64 * discount;
                    if w > 0.0 && prev[m] > f64::NEG_INFINITY {
                        w.ln() + prev[m]
                    } else {
                        f64::NEG_INFINITY
                    }
                } else {
                    f64::NEG_INFINITY
                };
                *slot = log_add(from_new, from_same);
            }
            rows.push(row);
        }
    }

    pub fn discount(&self) -> f64 {
        self.discount
    }

    pub fn n_max(&self) -> usize {
        self.rows.len() - 1
    }

    /// `log S^n_{m,a}`; `-inf` encodes zero, including `m > n`.
    pub fn log(&self, n: usize, m: usize) -> f64 {
        assert!(n <= self.n_max(), "n = {n} beyond cached n_max = {}", self.n_max());
        self.rows[n].get(m).copied().unwrap_or(f64::NEG_INFINITY)
    }

    /// `S^{n+1}_{m+1} / S^n_m`: one more customer opening a table.
    #[inline]
    pub fn new_table_ratio(&self, n: usize, m: usize) -> f64 {
        self.new_table[n][m]
    }

    /// `S^{n+1}_m / S^n_m`: one more customer joining an occupied table.
    #[inline]
    pub fn same_table_ratio(&self, n: usize, m: usize) -> f64 {
        self.same_table[n][m]
    }
}

/// Thread-safe, grow-on-demand cache of generalized Stirling numbers.
///
/// Readers take a cheap [`Arc`] snapshot; growth doubles `n_max` under the
/// write lock. Since the recurrence is deterministic, extending the table
/// never changes entries that were already handed out.
#[derive(Debug)]
pub struct StirlingCache {
    discount: f64,
    table: RwLock<Arc<StirlingTable>>,
}

impl StirlingCache {
    pub fn new(discount: f64, n_max: usize) -> Result<Self> {
        if !(0.0..1.0).contains(&discount) {
            return Err(Error::InvalidArgument(format!(
                "discount must lie in [0, 1), got {discount}"
            )));
        }
        let mut rows = Vec::new();
        StirlingTable::extend_rows(discount, &mut rows, n_max.max(1));
        Ok(Self {
            discount,
            table: RwLock::new(Arc::new(StirlingTable::with_rows(discount, rows))),
        })
    }

    pub fn discount(&self) -> f64 {
        self.discount
    }

    /// Returns a snapshot covering at least `n` customers, growing if needed.
    pub fn snapshot(&self, n: usize) -> Arc<StirlingTable> {
        {
            let t = self.table.read().expect("stirling cache poisoned");
            if t.n_max() >= n {
                return Arc::clone(&t);
            }
        }
        let mut guard = self.table.write().expect("stirling cache poisoned");
        if guard.n_max() < n {
            let target = n.max(2 * guard.n_max());
            let mut rows = guard.rows.clone();
            StirlingTable::extend_rows(self.discount, &mut rows, target);
            *guard = Arc::new(StirlingTable::with_rows(self.discount, rows));
        }
        Arc::clone(&guard)
    }

    pub fn n_max(&self) -> usize {
        self.table.read().expect("stirling cache poisoned").n_max()
    }

    pub fn log_stirling(&self, n: usize, m: usize) -> f64 {
        if m > n {
            return f64::NEG_INFINITY;
        }
        self.snapshot(n).log(n, m)
    }
}

/// `log (b|a)_n = sum_{i<n} log(b + i a)`. Plain rising factorial when `a = 1`.
pub fn log_pochhammer(b: f64, a: f64, n: usize) -> Result<f64> {
    let mut acc = 0.0;
    for i in 0..n {
        let f = b + i as f64 * a;
        if !(f > 0.0) {
            return Err(Error::Domain(format!(
                "Pochhammer factor b + {i}a = {f} is not positive (b = {b}, a = {a})"
            )));
        }
        acc += f.ln();
    }
    Ok(acc)
}

/// Multidimensional log-Beta: `sum log Γ(x_i) - log Γ(sum x_i)`.
pub fn log_beta_vec(params: &[f64]) -> Result<f64> {
    if params.is_empty() {
        return Err(Error::Domain("log-Beta of an empty vector".into()));
    }
    let mut total = 0.0;
    let mut acc = 0.0;
    for &x in params {
        if !(x > 0.0) {
            return Err(Error::Domain(format!("log-Beta component {x} is not positive")));
        }
        acc += ln_gamma(x);
        total += x;
    }
    Ok(acc - ln_gamma(total))
}
