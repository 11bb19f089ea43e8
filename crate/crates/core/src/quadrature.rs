//! Quadrature rules: Gauss–Legendre, Gauss–Lobatto–Legendre (with the
//! matching spectral differentiation matrix) and adaptive Gauss–Kronrod.

use std::f64::consts::PI;

/// Legendre polynomial `P_n(x)` and its derivative.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = if (1.0 - x * x).abs() < 1e-300 {
        let s = if x > 0.0 { 1.0 } else { (-1.0f64).powi(n as i32 + 1) };
        s * (n * (n + 1)) as f64 / 2.0
    } else {
        n as f64 * (p0 - x * p1) / (1.0 - x * x)
    };
    (p1, dp)
}

/// An n-point rule on [-1, 1].
#[derive(Clone, Debug)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    /// Integrates `f` over `[a, b]` with the rule mapped affinely.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(mid + half * x)).sum::<f64>() * half
    }
}

/// Gauss–Legendre rule with `n` points.
pub fn gauss_legendre(n: usize) -> Rule {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for k in 0..n.div_ceil(2) {
        let mut x = (PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[k] = -x;
        nodes[n - 1 - k] = x;
        weights[k] = w;
        weights[n - 1 - k] = w;
    }
    Rule { nodes, weights }
}

/// Gauss–Lobatto–Legendre rule with `n ≥ 2` points (endpoints included).
pub fn gauss_lobatto(n: usize) -> Rule {
    assert!(n >= 2);
    let m = n - 1;
    let mut nodes = vec![0.0; n];
    nodes[0] = -1.0;
    nodes[m] = 1.0;
    // Interior nodes are the roots of P'_m; iterate on (1 - x^2) P'_m.
    for k in 1..m {
        let mut x = -(PI * k as f64 / m as f64).cos();
        for _ in 0..100 {
            let (p, _) = legendre(m, x);
            // q = (1-x^2) P'_m = m (P_{m-1} - x P_m); q' = -m(m+1) P_m
            let (pm1, _) = legendre(m - 1, x);
            let q = m as f64 * (pm1 - x * p);
            let dq = -((m * (m + 1)) as f64) * p;
            let dx = q / dq;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[k] = x;
    }
    let weights = nodes
        .iter()
        .map(|&x| {
            let (p, _) = legendre(m, x);
            2.0 / ((m * (m + 1)) as f64 * p * p)
        })
        .collect();
    Rule { nodes, weights }
}

/// Spectral differentiation matrix on the nodes of a Lobatto rule
/// (reference interval [-1, 1]).
pub fn lobatto_differentiation(rule: &Rule) -> Vec<Vec<f64>> {
    let n = rule.nodes.len();
    let m = n - 1;
    let x = &rule.nodes;
    let pm: Vec<f64> = x.iter().map(|&xi| legendre(m, xi).0).collect();
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            d[i][j] = if i != j {
                pm[i] / (pm[j] * (x[i] - x[j]))
            } else if i == 0 {
                -((m * (m + 1)) as f64) / 4.0
            } else if i == m {
                (m * (m + 1)) as f64 / 4.0
            } else {
                0.0
            };
        }
    }
    d
}

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WEIGHTS_K: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_0,
];
const GK_WEIGHTS_G: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let fc = f(mid);
    let mut kron = fc * GK_WEIGHTS_K[7];
    let mut gauss = fc * GK_WEIGHTS_G[3];
    for j in 0..7 {
        let dx = half * GK_NODES[j];
        let s = f(mid - dx) + f(mid + dx);
        kron += GK_WEIGHTS_K[j] * s;
        if j % 2 == 1 {
            gauss += GK_WEIGHTS_G[j / 2] * s;
        }
    }
    (kron * half, ((kron - gauss) * half).abs())
}

/// Adaptive 7/15-point Gauss–Kronrod integration to absolute tolerance
/// `tol`, bisecting the worst interval first.
pub fn adaptive_gauss_kronrod<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let mut intervals = vec![{
        let (v, e) = gk15(&mut f, a, b);
        (a, b, v, e)
    }];
    for _ in 0..2000 {
        let total_err: f64 = intervals.iter().map(|s| s.3).sum();
        if total_err <= tol {
            break;
        }
        let (worst, _) = intervals.iter().enumerate().max_by(|x, y| x.1 .3.total_cmp(&y.1 .3)).expect("non-empty");
        let (lo, hi, _, _) = intervals.swap_remove(worst);
        let m = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&mut f, lo, m);
        let (v2, e2) = gk15(&mut f, m, hi);
        intervals.push((lo, m, v1, e1));
        intervals.push((m, hi, v2, e2));
    }
    intervals.iter().map(|s| s.2).sum()
}

/// Adaptive integration over `[a, b]` split at the given interior
/// breakpoints (kinks of the integrand).
pub fn adaptive_with_breaks<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, breaks: &[f64], tol: f64) -> f64 {
    let mut pts = vec![a];
    pts.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
    pts.push(b);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let share = tol / (pts.len() - 1) as f64;
    pts.windows(2).map(|w| adaptive_gauss_kronrod(&mut f, w[0], w[1], share)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_is_exact_to_degree_2n_minus_1() {
        let rule = gauss_legendre(5);
        for deg in 0..10 {
            let q = rule.integrate(0.0, 1.0, |x| x.powi(deg));
            assert!((q - 1.0 / (deg as f64 + 1.0)).abs() < 1e-14, "deg {deg}");
        }
        let w: f64 = gauss_legendre(32).weights.iter().sum();
        assert!((w - 2.0).abs() < 1e-13);
    }

    #[test]
    fn lobatto_is_exact_to_degree_2n_minus_3() {
        let rule = gauss_lobatto(8);
        assert_eq!(rule.nodes[0], -1.0);
        assert_eq!(rule.nodes[7], 1.0);
        for deg in 0..=13 {
            let q = rule.integrate(-1.0, 1.0, |x| x.powi(deg));
            let exact = if deg % 2 == 0 { 2.0 / (deg as f64 + 1.0) } else { 0.0 };
            assert!((q - exact).abs() < 1e-13, "deg {deg}: {q} vs {exact}");
        }
    }

    #[test]
    fn lobatto_differentiation_is_exact_on_polynomials() {
        let rule = gauss_lobatto(8);
        let d = lobatto_differentiation(&rule);
        let f: Vec<f64> = rule.nodes.iter().map(|x| x.powi(7) - 2.0 * x).collect();
        for (i, row) in d.iter().enumerate() {
            let df: f64 = row.iter().zip(&f).map(|(a, b)| a * b).sum();
            let exact = 7.0 * rule.nodes[i].powi(6) - 2.0;
            assert!((df - exact).abs() < 1e-11, "{df} vs {exact}");
        }
    }

    #[test]
    fn adaptive_handles_kinks() {
        let q = adaptive_with_breaks(|x: f64| (x - 0.3).abs(), 0.0, 1.0, &[0.3], 1e-12);
        assert!((q - (0.045 + 0.245)).abs() < 1e-12);
        let q = adaptive_gauss_kronrod(|x: f64| x.sin(), 0.0, PI, 1e-12);
        assert!((q - 2.0).abs() < 1e-12);
    }
}
