use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::Serialize;

use super::MeasureError;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureResult {
    pub value: f64,
    pub abs_error_estimate: f64,
    /// Bound on the mass left out by truncating an infinite range.
    pub truncation_bound: f64,
    pub evaluations: u64,
}

impl QuadratureResult {
    pub fn exact(value: f64) -> Self {
        QuadratureResult {
            value,
            abs_error_estimate: 0.0,
            truncation_bound: 0.0,
            evaluations: 0,
        }
    }

    /// Total error: quadrature estimate plus truncation.
    pub fn error(&self) -> f64 {
        self.abs_error_estimate + self.truncation_bound
    }

    pub fn scaled(self, c: f64) -> Self {
        QuadratureResult {
            value: self.value * c,
            abs_error_estimate: self.abs_error_estimate * c.abs(),
            truncation_bound: self.truncation_bound * c.abs(),
            evaluations: self.evaluations,
        }
    }

    pub fn plus(self, other: QuadratureResult) -> Self {
        QuadratureResult {
            value: self.value + other.value,
            abs_error_estimate: self.abs_error_estimate + other.abs_error_estimate,
            truncation_bound: self.truncation_bound + other.truncation_bound,
            evaluations: self.evaluations + other.evaluations,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_evals: u64,
}

impl QuadOptions {
    pub fn relative(rel_tol: f64) -> Self {
        QuadOptions {
            rel_tol,
            abs_tol: 0.0,
            max_evals: 2_000_000,
        }
    }
}

/// Compensated (Neumaier) summation.
#[derive(Debug, Default, Clone, Copy)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    order: u64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
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
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.order.cmp(&self.order))
    }
}

fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = f(c - dx) + f(c + dx);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Globally adaptive Gauss–Kronrod (7/15) quadrature on `[a, b]`, starting
/// from the panels cut at `knots`. The result is independent of evaluation
/// order: panels are bisected by largest error (ties by creation order) and
/// summed left to right with compensation.
pub fn integrate(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    knots: &[f64],
    opts: &QuadOptions,
) -> Result<QuadratureResult, MeasureError> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(MeasureError::InvalidArgument(format!("range [{a}, {b}]")));
    }
    if a == b {
        return Ok(QuadratureResult::exact(0.0));
    }
    if a > b {
        return integrate(f, b, a, knots, opts).map(|r| r.scaled(-1.0));
    }
    let mut cuts: Vec<f64> = knots.iter().copied().filter(|&x| x > a && x < b).collect();
    cuts.push(a);
    cuts.push(b);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let mut heap = BinaryHeap::new();
    let mut order = 0u64;
    let mut evals = 0u64;
    let mut total_err = 0.0;
    for w in cuts.windows(2) {
        let (value, error) = gk15(f, w[0], w[1]);
        evals += 15;
        total_err += error;
        heap.push(Panel {
            a: w[0],
            b: w[1],
            value,
            error,
            order,
        });
        order += 1;
    }
    let estimate = |heap: &BinaryHeap<Panel>| heap.iter().map(|p| p.value).sum::<f64>();
    let mut value = estimate(&heap);
    loop {
        let tol = opts.abs_tol.max(opts.rel_tol * value.abs());
        if total_err <= tol {
            break;
        }
        if evals >= opts.max_evals {
            return Err(MeasureError::Accuracy {
                achieved: total_err,
                requested: tol,
            });
        }
        let worst = heap.pop().expect("at least one panel");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            return Err(MeasureError::Accuracy {
                achieved: total_err,
                requested: tol,
            });
        }
        total_err -= worst.error;
        value -= worst.value;
        for (lo, hi) in [(worst.a, mid), (mid, worst.b)] {
            let (v, e) = gk15(f, lo, hi);
            evals += 15;
            total_err += e;
            value += v;
            heap.push(Panel {
                a: lo,
                b: hi,
                value: v,
                error: e,
                order,
            });
            order += 1;
        }
        if order.is_multiple_of(64) {
            // refresh the running sums against drift
            value = estimate(&heap);
            total_err = heap.iter().map(|p| p.error).sum();
        }
    }
    let mut panels = heap.into_vec();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let mut sum = Neumaier::default();
    let mut err = Neumaier::default();
    for p in &panels {
        sum.add(p.value);
        err.add(p.error);
    }
    Ok(QuadratureResult {
        value: sum.value(),
        abs_error_estimate: err.value(),
        truncation_bound: 0.0,
        evaluations: evals,
    })
}

/// `∫_{-X}^{X} f` for even `f`, computed as `2∫_0^X f`.
pub fn integrate_even(
    f: &dyn Fn(f64) -> f64,
    x: f64,
    knots: &[f64],
    opts: &QuadOptions,
) -> Result<QuadratureResult, MeasureError> {
    integrate(f, 0.0, x, knots, opts).map(|r| r.scaled(2.0))
}
