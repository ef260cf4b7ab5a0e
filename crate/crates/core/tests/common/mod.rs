//! Independent oracles shared by the integration and acceptance tests.
//!
//! Nothing here calls into the sampler or the special-function module; the
//! joint probability and the Stirling numbers are recomputed from scratch.
#![allow(dead_code)]

pub mod desk;

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use statrs::function::gamma::ln_gamma;

/// Exact generalized Stirling numbers `S^n_{m,a}` for rational `a = num / den`.
pub fn exact_stirling(n_max: usize, num: i64, den: i64) -> Vec<Vec<BigRational>> {
    let a = BigRational::new(BigInt::from(num), BigInt::from(den));
    let mut rows = vec![vec![BigRational::one()]];
    for n in 0..n_max {
        let prev = &rows[n];
        let mut row = vec![BigRational::zero(); n + 2];
        for (m, slot) in row.iter_mut().enumerate() {
            let mut v = BigRational::zero();
            if m >= 1 {
                v += prev[m - 1].clone();
            }
            if m <= n {
                let w = BigRational::from_integer(BigInt::from(n as i64)) - a.clone() * BigInt::from(m as i64);
                v += w * prev[m].clone();
            }
            *slot = v;
        }
        rows.push(row);
    }
    rows
}

pub fn ratio_ln(x: &BigRational) -> f64 {
    // numerator and denominator can overflow f64 individually
    let n = x.numer().to_string();
    let d = x.denom().to_string();
    big_ln(&n) - big_ln(&d)
}

fn big_ln(digits: &str) -> f64 {
    let lead: String = digits.chars().take(17).collect();
    let mantissa: f64 = lead.parse().unwrap();
    mantissa.ln() + (digits.len() - lead.len()) as f64 * std::f64::consts::LN_10
}

pub fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap()
}

/// Enumerable instance: one store, baskets of products, `K` topics.
pub struct Tiny {
    pub baskets: Vec<Vec<u32>>,
    pub k: usize,
    pub v: usize,
    pub alpha: f64,
    pub beta: f64,
    pub a: f64,
    pub b: f64,
}

/// State key: topics of every token, then table counts `t[p][k]` row-major.
pub type StateKey = Vec<u32>;

fn stirling_small(n: usize, m: usize, a: f64) -> f64 {
    // direct recurrence, small n only
    let mut rows: Vec<Vec<f64>> = vec![vec![1.0]];
    for i in 0..n {
        let mut row = vec![0.0; i + 2];
        for j in 0..=i + 1 {
            let mut v = 0.0;
            if j >= 1 {
                v += rows[i][j - 1];
            }
            if j <= i {
                v += (i as f64 - j as f64 * a) * rows[i][j];
            }
            row[j] = v;
        }
        rows.push(row);
    }
    rows[n].get(m).copied().unwrap_or(0.0)
}

fn rising(b: f64, step: f64, n: usize) -> f64 {
    (0..n).map(|i| b + i as f64 * step).product()
}

fn ln_beta(x: &[f64]) -> f64 {
    x.iter().map(|&v| ln_gamma(v)).sum::<f64>() - ln_gamma(x.iter().sum())
}

fn fact(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

impl Tiny {
    /// Unnormalized joint probability of `(z, u)` including the
    /// arrangement factor; zero for states violating the table constraint.
    pub fn joint(&self, z: &[u32], u: &[bool]) -> f64 {
        let k = self.k;
        let mut store_t = vec![0usize; k];
        let mut topic_word = vec![vec![0usize; self.v]; k];
        let mut lp = 0.0;
        let mut pos = 0;
        for basket in &self.baskets {
            let mut n = vec![0usize; k];
            let mut t = vec![0usize; k];
            for &w in basket {
                let topic = z[pos] as usize;
                n[topic] += 1;
                if u[pos] {
                    t[topic] += 1;
                }
                topic_word[topic][w as usize] += 1;
                pos += 1;
            }
            for j in 0..k {
                if (n[j] == 0 && t[j] > 0) || (n[j] > 0 && (t[j] == 0 || t[j] > n[j])) {
                    return 0.0;
                }
                store_t[j] += t[j];
                if n[j] > 0 {
                    lp += (stirling_small(n[j], t[j], self.a) * fact(t[j]) * fact(n[j] - t[j]) / fact(n[j])).ln();
                }
            }
            let total_t: usize = t.iter().sum();
            lp += rising(self.b, self.a, total_t).ln() - rising(self.b, 1.0, basket.len()).ln();
        }
        let alpha = vec![self.alpha; k];
        let post: Vec<f64> = store_t.iter().map(|&t| self.alpha + t as f64).collect();
        lp += ln_beta(&post) - ln_beta(&alpha);
        let beta = vec![self.beta; self.v];
        for row in &topic_word {
            let post: Vec<f64> = row.iter().map(|&c| self.beta + c as f64).collect();
            lp += ln_beta(&post) - ln_beta(&beta);
        }
        lp.exp()
    }

    pub fn key(&self, z: &[u32], u: &[bool]) -> StateKey {
        let mut key = z.to_vec();
        let mut pos = 0;
        for basket in &self.baskets {
            let mut t = vec![0u32; self.k];
            for _ in basket {
                if u[pos] {
                    t[z[pos] as usize] += 1;
                }
                pos += 1;
            }
            key.extend(t);
        }
        key
    }

    /// Exact posterior over `(z, t)` and the total unnormalized mass over
    /// `(z, u)`.
    pub fn posterior(&self) -> (BTreeMap<StateKey, f64>, f64) {
        let n: usize = self.baskets.iter().map(Vec::len).sum();
        let mut mass: BTreeMap<StateKey, f64> = BTreeMap::new();
        let mut total = 0.0;
        let zs = (self.k as u64).pow(n as u32);
        for zi in 0..zs {
            let mut z = vec![0u32; n];
            let mut r = zi;
            for slot in z.iter_mut() {
                *slot = (r % self.k as u64) as u32;
                r /= self.k as u64;
            }
            for ui in 0..(1u32 << n) {
                let u: Vec<bool> = (0..n).map(|i| ui >> i & 1 == 1).collect();
                let p = self.joint(&z, &u);
                if p > 0.0 {
                    *mass.entry(self.key(&z, &u)).or_default() += p;
                    total += p;
                }
            }
        }
        for v in mass.values_mut() {
            *v /= total;
        }
        (mass, total)
    }
}

/// Distribution of the number of occupied tables after `n` customers of a
/// Pitman-Yor restaurant, by walking every seating sequence.
pub fn crp_tables_by_enumeration(n: usize, a: f64, b: f64) -> Vec<f64> {
    fn walk(sizes: &mut Vec<usize>, seated: usize, n: usize, a: f64, b: f64, p: f64, out: &mut [f64]) {
        if seated == n {
            out[sizes.len()] += p;
            return;
        }
        let denom = b + seated as f64;
        for i in 0..sizes.len() {
            let w = (sizes[i] as f64 - a) / denom;
            sizes[i] += 1;
            walk(sizes, seated + 1, n, a, b, p * w, out);
            sizes[i] -= 1;
        }
        let w = (b + a * sizes.len() as f64) / denom;
        sizes.push(1);
        walk(sizes, seated + 1, n, a, b, p * w, out);
        sizes.pop();
    }
    let mut out = vec![0.0; n + 1];
    walk(&mut Vec::new(), 0, n, a, b, 1.0, &mut out);
    out
}

/// Inverse and determinant by Gauss-Jordan elimination with partial pivoting.
pub fn dense_inverse(m: &[Vec<f64>]) -> (Vec<Vec<f64>>, f64) {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m.to_vec();
    let mut inv: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect()).collect();
    let mut det = 1.0;
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs())).unwrap();
        if piv != col {
            a.swap(piv, col);
            inv.swap(piv, col);
            det = -det;
        }
        let p = a[col][col];
        det *= p;
        for j in 0..n {
            a[col][j] /= p;
            inv[col][j] /= p;
        }
        for r in 0..n {
            if r != col {
                let f = a[r][col];
                for j in 0..n {
                    a[r][j] -= f * a[col][j];
                    inv[r][j] -= f * inv[col][j];
                }
            }
        }
    }
    (inv, det)
}

/// `log N(y; mu, S)` written out with an explicit inverse.
pub fn dense_mvn_log_density(y: &[f64], mu: &[f64], s: &[Vec<f64>]) -> f64 {
    let n = y.len();
    let (inv, det) = dense_inverse(s);
    let r: Vec<f64> = y.iter().zip(mu).map(|(a, b)| a - b).collect();
    let mut quad = 0.0;
    for i in 0..n {
        for j in 0..n {
            quad += r[i] * inv[i][j] * r[j];
        }
    }
    -0.5 * (n as f64 * (2.0 * std::f64::consts::PI).ln() + det.ln() + quad)
}
