use super::linalg::weighted_least_squares;
use super::{class_value, Attribution, Baseline, Method, SuperpixelMap};
use crate::error::{Error, Result};
use crate::imaging::Image;
use crate::rng::Rng;

/// Largest player count [`exact_shapley`] accepts.
pub const MAX_EXACT_PLAYERS: usize = 12;

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Exact Shapley values from a table of `2^M` coalition values indexed by
/// bitmask (bit `i` set ⇔ player `i` present).
pub fn exact_shapley(m: usize, table: &[f64]) -> Result<Vec<f64>> {
    if m > MAX_EXACT_PLAYERS {
        return Err(Error::Parameter(format!(
            "exact Shapley values are limited to {MAX_EXACT_PLAYERS} players, got {m}"
        )));
    }
    if table.len() != 1 << m {
        return Err(Error::Dimension(format!(
            "value table has {} entries, expected 2^{m}",
            table.len()
        )));
    }
    // |S|!(M−|S|−1)!/M! per coalition size
    let factor: Vec<f64> = (0..m)
        .map(|s| 1.0 / (m as f64 * binomial(m - 1, s)))
        .collect();
    let mut phi = vec![0.0; m];
    for (i, p) in phi.iter_mut().enumerate() {
        let bit = 1usize << i;
        *p = (0..table.len())
            .filter(|s| s & bit == 0)
            .map(|s| factor[s.count_ones() as usize] * (table[s | bit] - table[s]))
            .sum();
    }
    Ok(phi)
}

/// Shapley kernel `(M−1)/(C(M,s)·s·(M−s))`; infinite for the empty and full
/// coalitions.
pub fn shapley_kernel_weight(m: usize, s: usize) -> f64 {
    if s == 0 || s >= m {
        return f64::INFINITY;
    }
    (m - 1) as f64 / (binomial(m, s) * s as f64 * (m - s) as f64)
}

/// Coalitions and their regression weights: all of them when affordable,
/// otherwise paired samples drawn in proportion to the kernel.
fn coalitions(m: usize, n_samples: usize, rng: &mut Rng) -> Vec<(Vec<bool>, f64)> {
    let enumerable = m < usize::BITS as usize - 1 && (1usize << m) - 2 <= n_samples;
    if enumerable {
        return (1..(1usize << m) - 1)
            .map(|bits| {
                let z: Vec<bool> = (0..m).map(|i| bits >> i & 1 == 1).collect();
                (z, shapley_kernel_weight(m, bits.count_ones() as usize))
            })
            .collect();
    }
    // total kernel mass of size s is (M−1)/(s(M−s))
    let size_mass: Vec<f64> = (1..m).map(|s| 1.0 / (s * (m - s)) as f64).collect();
    let total: f64 = size_mass.iter().sum();
    let pairs = (n_samples / 2).max(1);
    let mut out = Vec::with_capacity(2 * pairs);
    let mut players: Vec<usize> = (0..m).collect();
    for _ in 0..pairs {
        let mut u = rng.uniform() * total;
        let mut size = m - 1;
        for (idx, &w) in size_mass.iter().enumerate() {
            if u < w {
                size = idx + 1;
                break;
            }
            u -= w;
        }
        rng.shuffle(&mut players);
        let mut z = vec![false; m];
        for &p in &players[..size] {
            z[p] = true;
        }
        let complement = z.iter().map(|b| !b).collect();
        out.push((z, 1.0));
        out.push((complement, 1.0));
    }
    out
}

/// KernelSHAP for an abstract value function over coalitions. The efficiency
/// constraint `Σφ = v(full) − v(∅)` is imposed by eliminating the last
/// player's value.
pub fn kernel_shap_values(
    m: usize,
    value: &mut dyn FnMut(&[bool]) -> Result<f64>,
    n_samples: usize,
    rng: &mut Rng,
) -> Result<Vec<f64>> {
    if m == 0 {
        return Err(Error::Parameter("KernelSHAP needs at least one player".into()));
    }
    let v_empty = value(&vec![false; m])?;
    let v_full = value(&vec![true; m])?;
    let gap = v_full - v_empty;
    if m == 1 {
        return Ok(vec![gap]);
    }
    let samples = coalitions(m, n_samples, rng);
    let last = m - 1;
    let mut rows = Vec::with_capacity(samples.len());
    let mut targets = Vec::with_capacity(samples.len());
    let mut weights = Vec::with_capacity(samples.len());
    for (z, w) in &samples {
        let zl = if z[last] { 1.0 } else { 0.0 };
        rows.push(
            z[..last]
                .iter()
                .map(|&b| if b { 1.0 } else { 0.0 } - zl)
                .collect::<Vec<f64>>(),
        );
        targets.push(value(z)? - v_empty - zl * gap);
        weights.push(*w);
    }
    let mut phi = match weighted_least_squares(&rows, &targets, &weights, &vec![0.0; last]) {
        Ok(phi) => phi,
        // too few distinct coalitions to pin every player down
        Err(Error::SingularSystem) => {
            weighted_least_squares(&rows, &targets, &weights, &vec![1e-8; last])?
        }
        Err(e) => return Err(e),
    };
    phi.push(gap - phi.iter().sum::<f64>());
    Ok(phi)
}

pub fn kernel_shap(
    model: &dyn Fn(&Image) -> Result<Vec<f64>>,
    image: &Image,
    superpixels: &SuperpixelMap,
    class: usize,
    baseline: &Baseline,
    n_samples: usize,
    seed: u64,
) -> Result<Attribution> {
    let color = baseline.color(image);
    let mut value = |z: &[bool]| class_value(model, image, superpixels, z, &color, class);
    let weights = kernel_shap_values(superpixels.count, &mut value, n_samples, &mut Rng::new(seed))?;
    Ok(Attribution {
        weights,
        class,
        method: Method::KernelShap,
        baseline: baseline.describe(),
    })
}
