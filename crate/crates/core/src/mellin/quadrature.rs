//! Quadrature on the real line for vector-valued complex integrands.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7]
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Integrand writing `dim` values at `u` into the buffer.
pub trait Integrand: Sync {
    fn dim(&self) -> usize;
    fn eval(&self, u: f64, out: &mut [Complex64]);
}

impl<F: Fn(f64, &mut [Complex64]) + Sync> Integrand for (usize, F) {
    fn dim(&self) -> usize {
        self.0
    }
    fn eval(&self, u: f64, out: &mut [Complex64]) {
        (self.1)(u, out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    pub a: f64,
    pub b: f64,
    pub value: Vec<Complex64>,
    pub error: f64,
}

impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// One 15-point Kronrod panel. The error estimate is the QUADPACK one built
/// from the embedded 7-point Gauss rule, maximized over components.
pub fn gk15(f: &dyn Integrand, a: f64, b: f64) -> Panel {
    let d = f.dim();
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut vals = vec![Complex64::new(0.0, 0.0); 15 * d];
    let mut weights = [(0.0, 0.0); 15];
    let mut slot = 0;
    for j in 0..7 {
        let wg = if j % 2 == 1 { WG[j / 2] } else { 0.0 };
        for u in [c - h * XGK[j], c + h * XGK[j]] {
            f.eval(u, &mut vals[slot * d..(slot + 1) * d]);
            weights[slot] = (WGK[j], wg);
            slot += 1;
        }
    }
    f.eval(c, &mut vals[14 * d..]);
    weights[14] = (WGK[7], WG[3]);

    let mut value = Vec::with_capacity(d);
    let mut error: f64 = 0.0;
    for i in 0..d {
        let (mut k, mut g, mut abs) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), 0.0);
        for (s, &(wk, wg)) in weights.iter().enumerate() {
            let v = vals[s * d + i];
            k += v * wk;
            g += v * wg;
            abs += wk * v.norm();
        }
        let mean = k * 0.5;
        let asc: f64 = weights.iter().enumerate().map(|(s, &(wk, _))| wk * (vals[s * d + i] - mean).norm()).sum::<f64>() * h;
        let mut err = (k - g).norm() * h;
        if asc != 0.0 && err != 0.0 {
            err = asc * (200.0 * err / asc).powf(1.5).min(1.0);
        }
        err = err.max(50.0 * f64::EPSILON * abs * h);
        error = error.max(err);
        value.push(k * h);
    }
    Panel { a, b, value, error }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoConvergence {
    pub error: f64,
}

/// Globally adaptive Gauss–Kronrod on `[a, b]` starting from `panels`
/// equal pieces. Returns the integral and its error estimate.
pub fn adaptive(
    f: &dyn Integrand,
    a: f64,
    b: f64,
    panels: usize,
    tol: f64,
    max_panels: usize,
) -> Result<(Vec<Complex64>, f64), NoConvergence> {
    let n = panels.max(1);
    let w = (b - a) / n as f64;
    let mut heap: BinaryHeap<Panel> = (0..n).map(|i| gk15(f, a + w * i as f64, a + w * (i + 1) as f64)).collect();
    let mut total: f64 = heap.iter().map(|p| p.error).sum();
    while total > tol {
        if heap.len() >= max_panels {
            return Err(NoConvergence { error: total });
        }
        let p = heap.pop().expect("non-empty");
        let m = 0.5 * (p.a + p.b);
        let (l, r) = (gk15(f, p.a, m), gk15(f, m, p.b));
        total += l.error + r.error - p.error;
        heap.push(l);
        heap.push(r);
    }
    let mut value = vec![Complex64::new(0.0, 0.0); f.dim()];
    // recompute the total to avoid drift from the running update
    let mut err = 0.0;
    for p in heap.iter() {
        for (v, x) in value.iter_mut().zip(&p.value) {
            *v += x;
        }
        err += p.error;
    }
    Ok((value, err))
}

/// Trapezoid rule with step `h` on the grid `h·ℤ ∩ [a, b]`.
pub fn trapezoid(f: &dyn Integrand, a: f64, b: f64, h: f64) -> Vec<Complex64> {
    let d = f.dim();
    let mut sum = vec![Complex64::new(0.0, 0.0); d];
    let mut buf = vec![Complex64::new(0.0, 0.0); d];
    let (lo, hi) = ((a / h).ceil() as i64, (b / h).floor() as i64);
    for j in lo..=hi {
        f.eval(j as f64 * h, &mut buf);
        for (s, x) in sum.iter_mut().zip(&buf) {
            *s += x;
        }
    }
    sum.into_iter().map(|x| x * h).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_integral() {
        let f = (1, |u: f64, out: &mut [Complex64]| out[0] = Complex64::new((-u * u).exp(), 0.0));
        let (v, e) = adaptive(&f, -10.0, 10.0, 4, 1e-13, 1000).unwrap();
        assert!((v[0].re - std::f64::consts::PI.sqrt()).abs() < 1e-13);
        assert!(e < 1e-13);
        let t = trapezoid(&f, -10.0, 10.0, 0.25);
        assert!((t[0].re - std::f64::consts::PI.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn oscillatory() {
        // ∫ e^{-u²} e^{-iλu} du = √π e^{-λ²/4}
        let lam = 6.0;
        let f = (1, move |u: f64, out: &mut [Complex64]| {
            out[0] = Complex64::new(0.0, -lam * u).exp() * (-u * u).exp()
        });
        let (v, _) = adaptive(&f, -10.0, 10.0, 8, 1e-12, 1000).unwrap();
        let exact = std::f64::consts::PI.sqrt() * (-lam * lam / 4.0).exp();
        assert!((v[0] - exact).norm() < 1e-13);
    }
}
