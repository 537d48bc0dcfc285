//! Quadrature building blocks: Gauss-Legendre rules and an adaptive
//! Gauss-Kronrod integrator with an embedded error estimate.

use crate::error::{Error, Result};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
///
/// Newton iteration on the Legendre recurrence; nodes are strictly interior,
/// so integrands may be singular at the endpoints.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi-style initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // evaluate P_n and P_n' by recurrence
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

// 15-point Kronrod extension of the 7-point Gauss rule (positive abscissae).
const XGK: [f64; 8] = [
    0.991_455_371_120_813,
    0.949_107_912_342_759,
    0.864_864_423_359_769,
    0.741_531_185_599_394,
    0.586_087_235_467_691,
    0.405_845_151_377_397,
    0.207_784_955_007_898,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529,
    0.063_092_092_629_979,
    0.104_790_010_322_250,
    0.140_653_259_715_525,
    0.169_004_726_639_267,
    0.190_350_578_064_785,
    0.204_432_940_075_298,
    0.209_482_141_084_728,
];
const WG: [f64; 4] = [
    0.129_484_966_168_870,
    0.279_705_391_489_277,
    0.381_830_050_505_119,
    0.417_959_183_673_469,
];

/// One G7-K15 panel: returns (kronrod value, error estimate).
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let half = 0.5 * (b - a);
    let center = 0.5 * (a + b);
    let fc = f(center);
    let mut result_kronrod = fc * WGK[7];
    let mut result_gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        result_kronrod += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            result_gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let value = result_kronrod * half;
    let err = ((result_kronrod - result_gauss) * half).abs();
    (value, err)
}

#[derive(Debug)]
struct Panel {
    err: f64,
    a: f64,
    b: f64,
    value: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err && self.a == other.a
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        // max-heap on error; tie-break on position for determinism
        self.err
            .total_cmp(&other.err)
            .then(self.a.total_cmp(&other.a))
    }
}

/// Adaptive Gauss-Kronrod integration of `f` over [a, b] to a relative
/// tolerance, refining the worst panel first.
///
/// Errors with `NoConvergence` when the subdivision budget is exhausted
/// before the summed error estimate drops below `rel_tol * |integral|`.
pub fn adaptive_gk<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    rel_tol: f64,
    max_panels: usize,
) -> Result<f64> {
    let (v, e) = gk15(f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Panel {
        err: e,
        a,
        b,
        value: v,
    });
    let mut panels = 1usize;
    loop {
        let total: f64 = super::kahan::CompensatedSum::sum_iter(heap.iter().map(|p| p.value));
        let total_err: f64 = heap.iter().map(|p| p.err).sum();
        let floor = 1e-305; // all-zero integrands are converged, not stuck
        if total_err <= rel_tol * total.abs() || total_err <= floor {
            return Ok(total);
        }
        if panels >= max_panels {
            return Err(Error::NoConvergence(format!(
                "adaptive quadrature: {panels} panels, residual error {total_err:e} \
                 on integral {total:e}"
            )));
        }
        let worst = heap.pop().expect("heap nonempty");
        let mid = 0.5 * (worst.a + worst.b);
        let (v1, e1) = gk15(f, worst.a, mid);
        let (v2, e2) = gk15(f, mid, worst.b);
        heap.push(Panel {
            err: e1,
            a: worst.a,
            b: mid,
            value: v1,
        });
        heap.push(Panel {
            err: e2,
            a: mid,
            b: worst.b,
            value: v2,
        });
        panels += 1;
    }
}
