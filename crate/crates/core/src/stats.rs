//! One-tailed Welch t-test, Holm-Bonferroni step-down correction and the
//! summary statistics used by reports and plots.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Per-seed final scores of one method.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    pub label: String,
    pub values: Vec<f64>,
}

impl SampleSet {
    pub fn new(label: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        let label = label.into();
        if values.len() < 2 {
            return Err(Error::InsufficientData {
                requested: 2,
                available: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Degenerate(format!("sample set `{label}` has non-finite values")));
        }
        Ok(Self { label, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        mean(&self.values)
    }

    pub fn variance(&self) -> f64 {
        sample_variance(&self.values)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub t: f64,
    pub p: f64,
    pub dof: f64,
    pub reject: bool,
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Unbiased (`n - 1`) variance.
pub fn sample_variance(v: &[f64]) -> f64 {
    let m = mean(v);
    v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() as f64 - 1.0)
}

/// Population (`n`) standard deviation; zero for a single value.
pub fn population_std(v: &[f64]) -> f64 {
    let m = mean(v);
    (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / v.len() as f64).sqrt()
}

/// Standard error of the mean; zero for fewer than two values.
pub fn sem(v: &[f64]) -> f64 {
    if v.len() < 2 {
        0.0
    } else {
        (sample_variance(v) / v.len() as f64).sqrt()
    }
}

/// Normal-approximation 95% interval `mean +- 1.96 sem`.
pub fn ci95(v: &[f64]) -> (f64, f64) {
    let (m, h) = (mean(v), 1.96 * sem(v));
    (m - h, m + h)
}

/// `ln Gamma(x)` for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    const C: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = C[0];
    let t = x + 7.5;
    for (i, c) in C.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Continued fraction for the incomplete beta (modified Lentz).
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let (qab, qap, qam) = (a + b, a + 1.0, a - 1.0);
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=10_000 {
        let m = f64::from(m);
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h
}

/// Regularised incomplete beta `I_x(a, b)`.
pub fn reg_inc_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(a, b, x) / a
    } else {
        1.0 - front * beta_cf(b, a, 1.0 - x) / b
    }
}

/// `P(T > t)` for Student's t with `dof` degrees of freedom.
pub fn student_t_sf(t: f64, dof: f64) -> f64 {
    if t.is_infinite() {
        return if t > 0.0 { 0.0 } else { 1.0 };
    }
    let tail = 0.5 * reg_inc_beta(0.5 * dof, 0.5, dof / (dof + t * t));
    if t >= 0.0 {
        tail
    } else {
        1.0 - tail
    }
}

pub fn student_t_cdf(t: f64, dof: f64) -> f64 {
    1.0 - student_t_sf(t, dof)
}

/// One-tailed Welch test of `mean(a) > mean(b)`. `reject` compares `p`
/// against `alpha`.
pub fn welch_one_tailed_at(a: &SampleSet, b: &SampleSet, alpha: f64) -> Result<TestResult> {
    for s in [a, b] {
        if s.len() < 2 {
            return Err(Error::InsufficientData {
                requested: 2,
                available: s.len(),
            });
        }
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (va, vb) = (a.variance() / na, b.variance() / nb);
    let diff = a.mean() - b.mean();
    let se2 = va + vb;
    if se2 == 0.0 {
        if diff == 0.0 {
            return Err(Error::Degenerate(format!(
                "`{}` and `{}` are constant with equal means",
                a.label, b.label
            )));
        }
        let t = diff.signum() * f64::INFINITY;
        let p = student_t_sf(t, na + nb - 2.0);
        return Ok(TestResult {
            t,
            p,
            dof: na + nb - 2.0,
            reject: p <= alpha,
        });
    }
    let t = diff / se2.sqrt();
    let dof = se2 * se2 / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
    let p = student_t_sf(t, dof);
    Ok(TestResult {
        t,
        p,
        dof,
        reject: p <= alpha,
    })
}

/// [`welch_one_tailed_at`] with `alpha = 0.05`.
pub fn welch_one_tailed(a: &SampleSet, b: &SampleSet) -> Result<TestResult> {
    welch_one_tailed_at(a, b, 0.05)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolmEntry {
    pub p: f64,
    pub adjusted_alpha: f64,
    pub reject: bool,
}

/// Holm-Bonferroni step-down procedure. Results are in input order; the
/// `i`-th smallest p-value is compared with `alpha / (m - i + 1)`.
pub fn holm_bonferroni(p_values: &[f64], alpha: f64) -> Result<Vec<HolmEntry>> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Range(format!("alpha = {alpha} must lie in (0, 1)")));
    }
    if let Some(p) = p_values.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::Range(format!("p-value {p} outside [0, 1]")));
    }
    let m = p_values.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| p_values[i].total_cmp(&p_values[j]));
    let mut out = vec![
        HolmEntry {
            p: 0.0,
            adjusted_alpha: 0.0,
            reject: false,
        };
        m
    ];
    let mut still = true;
    for (rank, &i) in order.iter().enumerate() {
        let adjusted_alpha = alpha / (m - rank) as f64;
        still = still && p_values[i] <= adjusted_alpha;
        out[i] = HolmEntry {
            p: p_values[i],
            adjusted_alpha,
            reject: still,
        };
    }
    Ok(out)
}
