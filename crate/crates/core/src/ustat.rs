//! The four U-statistics and four V-statistics behind every κ estimator.
//!
//! With `a_i = Σ_j |x_i − x_j|`, `b_i = Σ_j |y_i − y_j|` and
//! `S = Σ_{i<j} |x_i − x_j||y_i − y_j|`, the triple statistic collapses to
//! `U₃ = (Σ a_i b_i − 2S) / (n(n−1)(n−2))`, so the whole bundle costs O(n²).

use serde::{Deserialize, Serialize};

use crate::error::{KappaError, Result};
use crate::sample::PairedSample;
use crate::sum::CompensatedSum;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UStatBundle {
    pub u1: f64,
    pub u2: f64,
    pub u12: f64,
    pub u3: f64,
    pub v1: f64,
    pub v2: f64,
    pub v12: f64,
    pub v3: f64,
    pub n: usize,
}

/// Raw sums from which every statistic is a closed-form rescaling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct PairSums {
    /// Σ_{i<j} |x_i − x_j|
    pub sx: f64,
    /// Σ_{i<j} |y_i − y_j|
    pub sy: f64,
    /// Σ_{i<j} |x_i − x_j||y_i − y_j|
    pub sxy: f64,
    /// Σ_i a_i b_i
    pub sab: f64,
}

impl PairSums {
    pub(crate) fn bundle(&self, n: usize) -> UStatBundle {
        let nf = n as f64;
        let pairs = nf * (nf - 1.0) / 2.0;
        let ordered_triples = nf * (nf - 1.0) * (nf - 2.0);
        let u3 = ((self.sab - 2.0 * self.sxy) / ordered_triples).max(0.0);
        UStatBundle {
            u1: self.sx / pairs,
            u2: self.sy / pairs,
            u12: self.sxy / pairs,
            u3,
            v1: 2.0 * self.sx / (nf * nf),
            v2: 2.0 * self.sy / (nf * nf),
            v12: 2.0 * self.sxy / (nf * nf),
            v3: self.sab / (nf * nf * nf),
            n,
        }
    }
}

/// Row sums `a_i = Σ_j |v_i − v_j|`, accumulated in index order.
pub(crate) fn abs_row_sums(v: &[f64]) -> Vec<f64> {
    v.iter()
        .map(|&vi| v.iter().map(|&vj| (vi - vj).abs()).collect::<CompensatedSum>().total())
        .collect()
}

pub(crate) fn pair_sums(sample: &PairedSample) -> PairSums {
    let xs = sample.xs();
    let ys = sample.ys();
    let n = xs.len();
    let mut sx = CompensatedSum::new();
    let mut sy = CompensatedSum::new();
    let mut sxy = CompensatedSum::new();
    let mut a = vec![CompensatedSum::new(); n];
    let mut b = vec![CompensatedSum::new(); n];
    for i in 0..n {
        for j in (i + 1)..n {
            let dx = (xs[i] - xs[j]).abs();
            let dy = (ys[i] - ys[j]).abs();
            sx.add(dx);
            sy.add(dy);
            sxy.add(dx * dy);
            a[i].add(dx);
            a[j].add(dx);
            b[i].add(dy);
            b[j].add(dy);
        }
    }
    let sab = a
        .iter()
        .zip(&b)
        .map(|(ai, bi)| ai.total() * bi.total())
        .collect::<CompensatedSum>()
        .total();
    PairSums {
        sx: sx.total(),
        sy: sy.total(),
        sxy: sxy.total(),
        sab,
    }
}

fn require_triples(sample: &PairedSample) -> Result<usize> {
    let n = sample.len();
    if n < 3 {
        return Err(KappaError::SampleTooSmall { n, min: 3 });
    }
    Ok(n)
}

/// All eight statistics in O(n²).
pub fn compute_ustats(sample: &PairedSample) -> Result<UStatBundle> {
    let n = require_triples(sample)?;
    Ok(pair_sums(sample).bundle(n))
}

/// Direct evaluation over index tuples, including every triple for U₃.
/// O(n³); meant as a test oracle for small samples.
pub fn compute_ustats_bruteforce(sample: &PairedSample) -> Result<UStatBundle> {
    let n = require_triples(sample)?;
    let xs = sample.xs();
    let ys = sample.ys();
    let dx = |i: usize, j: usize| (xs[i] - xs[j]).abs();
    let dy = |i: usize, j: usize| (ys[i] - ys[j]).abs();

    // symmetrised kernel over the six orderings of (i, j, k)
    let h = |i: usize, j: usize, k: usize| {
        (dx(i, j) * dy(i, k)
            + dx(j, i) * dy(j, k)
            + dx(i, k) * dy(i, j)
            + dx(j, k) * dy(j, i)
            + dx(k, i) * dy(k, j)
            + dx(k, j) * dy(k, i))
            / 6.0
    };

    let mut s1 = CompensatedSum::new();
    let mut s2 = CompensatedSum::new();
    let mut s12 = CompensatedSum::new();
    for i in 0..n {
        for j in (i + 1)..n {
            s1.add(dx(i, j));
            s2.add(dy(i, j));
            s12.add(dx(i, j) * dy(i, j));
        }
    }
    let mut s3 = CompensatedSum::new();
    for i in 0..n {
        for j in (i + 1)..n {
            for k in (j + 1)..n {
                s3.add(h(i, j, k));
            }
        }
    }

    let mut w1 = CompensatedSum::new();
    let mut w2 = CompensatedSum::new();
    let mut w12 = CompensatedSum::new();
    let mut w3 = CompensatedSum::new();
    for i in 0..n {
        for j in 0..n {
            w1.add(dx(i, j));
            w2.add(dy(i, j));
            w12.add(dx(i, j) * dy(i, j));
            for k in 0..n {
                w3.add(h(i, j, k));
            }
        }
    }

    let nf = n as f64;
    let pairs = nf * (nf - 1.0) / 2.0;
    let triples = nf * (nf - 1.0) * (nf - 2.0) / 6.0;
    Ok(UStatBundle {
        u1: s1.total() / pairs,
        u2: s2.total() / pairs,
        u12: s12.total() / pairs,
        u3: s3.total() / triples,
        v1: w1.total() / (nf * nf),
        v2: w2.total() / (nf * nf),
        v12: w12.total() / (nf * nf),
        v3: w3.total() / (nf * nf * nf),
        n,
    })
}
