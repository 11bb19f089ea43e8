//! Banded LU factorization with partial pivoting and a Hager–Higham
//! estimate of the reciprocal condition number.
//!
//! Storage keeps, for each row `r`, the columns `r - kl ..= r + kl + ku`,
//! which is exactly the fill pattern produced by row interchanges.

#[derive(Clone, Debug)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let kl = kl.min(n.saturating_sub(1));
        let ku = ku.min(n.saturating_sub(1));
        let width = 2 * kl + ku + 1;
        Self { n, kl, ku, width, data: vec![0.0; n * width] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    fn slot(&self, r: usize, c: usize) -> Option<usize> {
        let off = c as isize - r as isize + self.kl as isize;
        if off < 0 || off as usize >= self.width {
            None
        } else {
            Some(r * self.width + off as usize)
        }
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.slot(r, c).map_or(0.0, |s| self.data[s])
    }

    /// Accumulates into entry `(r, c)`.
    ///
    /// Panics if the entry lies outside the declared bandwidth.
    pub fn add(&mut self, r: usize, c: usize, value: f64) {
        let in_band = c + self.kl >= r && c <= r + self.ku;
        assert!(in_band, "entry ({r},{c}) outside band kl={} ku={}", self.kl, self.ku);
        let s = self.slot(r, c).expect("in band");
        self.data[s] += value;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|r| {
                let lo = r.saturating_sub(self.kl);
                let hi = (r + self.ku).min(self.n - 1);
                (lo..=hi).map(|c| self.get(r, c) * x[c]).sum()
            })
            .collect()
    }

    /// Max absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|r| {
                let lo = r.saturating_sub(self.kl);
                let hi = (r + self.ku).min(self.n - 1);
                (lo..=hi).map(|c| self.get(r, c).abs()).sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// Factorizes in place. Exactly zero pivots are recorded, not rejected;
    /// callers inspect [`BandLu::rcond_inf`].
    pub fn factor(mut self) -> BandLu {
        let n = self.n;
        let kl = self.kl;
        let reach = kl + self.ku;
        let mut pivots = vec![0usize; n];
        let mut lower = vec![0.0; n * kl.max(1)];
        let mut zero_pivot = false;
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let last_col = (k + reach).min(n - 1);
            let mut p = k;
            let mut best = self.get(k, k).abs();
            for r in k + 1..=last_row {
                let v = self.get(r, k).abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            pivots[k] = p;
            if p != k {
                for c in k..=last_col {
                    let a = self.slot(k, c).expect("pivot row in band");
                    let b = self.slot(p, c).expect("swap row in band");
                    self.data.swap(a, b);
                }
            }
            let piv = self.get(k, k);
            if piv == 0.0 {
                zero_pivot = true;
                continue;
            }
            for r in k + 1..=last_row {
                let s = self.slot(r, k).expect("in band");
                let m = self.data[s] / piv;
                self.data[s] = 0.0;
                lower[k * kl.max(1) + (r - k - 1)] = m;
                if m != 0.0 {
                    for c in k + 1..=last_col {
                        let u = self.get(k, c);
                        if u != 0.0 {
                            let t = self.slot(r, c).expect("fill in band");
                            self.data[t] -= m * u;
                        }
                    }
                }
            }
        }
        BandLu { factors: self, lower, pivots, zero_pivot }
    }
}

#[derive(Clone, Debug)]
pub struct BandLu {
    factors: BandMatrix,
    lower: Vec<f64>,
    pivots: Vec<usize>,
    zero_pivot: bool,
}

impl BandLu {
    pub fn dim(&self) -> usize {
        self.factors.n
    }

    fn l(&self, k: usize, j: usize) -> f64 {
        self.lower[k * self.factors.kl.max(1) + j]
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let kl = self.factors.kl;
        let reach = kl + self.factors.ku;
        let mut x = b.to_vec();
        for k in 0..n {
            x.swap(k, self.pivots[k]);
            let xk = x[k];
            for j in 0..(kl.min(n - 1 - k)) {
                x[k + 1 + j] -= self.l(k, j) * xk;
            }
        }
        for k in (0..n).rev() {
            let last = (k + reach).min(n - 1);
            let mut s = x[k];
            for c in k + 1..=last {
                s -= self.factors.get(k, c) * x[c];
            }
            x[k] = s / self.factors.get(k, k);
        }
        x
    }

    /// Solves `Aᵀ x = b`.
    pub fn solve_transpose(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let kl = self.factors.kl;
        let reach = kl + self.factors.ku;
        let mut x = b.to_vec();
        for k in 0..n {
            let lo = k.saturating_sub(reach);
            let mut s = x[k];
            for r in lo..k {
                s -= self.factors.get(r, k) * x[r];
            }
            x[k] = s / self.factors.get(k, k);
        }
        for k in (0..n).rev() {
            let mut s = x[k];
            for j in 0..(kl.min(n - 1 - k)) {
                s -= self.l(k, j) * x[k + 1 + j];
            }
            x[k] = s;
            x.swap(k, self.pivots[k]);
        }
        x
    }

    /// Hager–Higham estimate of `‖A⁻¹‖∞` (computed as `‖A⁻ᵀ‖₁`).
    pub fn inverse_norm_inf_estimate(&self) -> f64 {
        let n = self.dim();
        if self.zero_pivot {
            return f64::INFINITY;
        }
        let mut x = vec![1.0 / n as f64; n];
        let mut estimate = 0.0;
        for iter in 0..6 {
            let y = self.solve_transpose(&x);
            let norm_y: f64 = y.iter().map(|v| v.abs()).sum();
            if !norm_y.is_finite() {
                return f64::INFINITY;
            }
            if iter > 0 && norm_y <= estimate {
                break;
            }
            estimate = norm_y;
            let sign: Vec<f64> = y.iter().map(|v| if *v >= 0.0 { 1.0 } else { -1.0 }).collect();
            let z = self.solve(&sign);
            let (j, zmax) =
                z.iter()
                    .enumerate()
                    .map(|(i, v)| (i, v.abs()))
                    .fold((0, -1.0), |acc, it| if it.1 > acc.1 { it } else { acc });
            let ztx: f64 = z.iter().zip(&x).map(|(a, b)| a * b).sum();
            if zmax <= ztx {
                break;
            }
            x = vec![0.0; n];
            x[j] = 1.0;
        }
        // Higham's alternating-sign safeguard.
        let alt: Vec<f64> = (0..n)
            .map(|i| {
                let s = if i % 2 == 0 { 1.0 } else { -1.0 };
                s * (1.0 + i as f64 / (n.max(2) - 1) as f64)
            })
            .collect();
        let y = self.solve_transpose(&alt);
        let alt_est = 2.0 * y.iter().map(|v| v.abs()).sum::<f64>() / (3.0 * n as f64);
        estimate.max(alt_est)
    }

    /// Reciprocal condition estimate `1 / (scale · ‖A⁻¹‖∞)`, where `scale`
    /// is the infinity norm of the operator the system was extracted from.
    pub fn rcond_inf(&self, scale: f64) -> f64 {
        let inv = self.inverse_norm_inf_estimate();
        if !inv.is_finite() || scale == 0.0 {
            0.0
        } else {
            1.0 / (scale * inv)
        }
    }
}
