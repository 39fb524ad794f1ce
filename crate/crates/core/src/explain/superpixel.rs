use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::Image;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlicParams {
    /// Target number of superpixels.
    pub segments: usize,
    pub compactness: f64,
    pub iterations: usize,
}

impl Default for SlicParams {
    fn default() -> Self {
        Self {
            segments: 40,
            compactness: 10.0,
            iterations: 10,
        }
    }
}

/// Segment id per pixel; ids are `0..count`, each segment 4-connected.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuperpixelMap {
    pub width: usize,
    pub height: usize,
    pub labels: Vec<usize>,
    pub count: usize,
}

impl SuperpixelMap {
    pub fn label(&self, x: usize, y: usize) -> usize {
        self.labels[y * self.width + x]
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.count];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }
}

struct Center {
    color: [f64; 3],
    x: f64,
    y: f64,
}

/// Colour features: channels scaled to a 0..100 range as a cheap stand-in
/// for CIELAB lightness units.
fn features(image: &Image) -> Vec<[f64; 3]> {
    let scale = 100.0 / 255.0;
    image
        .pixels()
        .chunks_exact(image.channels())
        .map(|p| {
            if p.len() == 3 {
                [f64::from(p[0]) * scale, f64::from(p[1]) * scale, f64::from(p[2]) * scale]
            } else {
                let v = f64::from(p[0]) * scale;
                [v, v, v]
            }
        })
        .collect()
}

/// SLIC-style superpixels: k-means over colour and position from a regular
/// grid of seeds, followed by connectivity repair.
pub fn slic_superpixels(image: &Image, params: &SlicParams) -> Result<SuperpixelMap> {
    let (w, h) = (image.width(), image.height());
    let n = w * h;
    let m = params.segments;
    if m == 0 || m > n {
        return Err(Error::Parameter(format!(
            "superpixel count {m} must be in 1..={n}"
        )));
    }
    if params.iterations == 0 {
        return Err(Error::Parameter("SLIC needs at least one iteration".into()));
    }
    if !(params.compactness >= 0.0 && params.compactness.is_finite()) {
        return Err(Error::Parameter(format!(
            "compactness must be ≥ 0, got {}",
            params.compactness
        )));
    }
    let feats = features(image);
    let nx = ((m as f64 * w as f64 / h as f64).sqrt().round() as usize).clamp(1, w);
    let ny = ((m as f64 / nx as f64).round() as usize).clamp(1, h);
    let spacing = (n as f64 / m as f64).sqrt();
    let mut centers: Vec<Center> = (0..ny)
        .flat_map(|j| (0..nx).map(move |i| (i, j)))
        .map(|(i, j)| {
            let x = (i as f64 + 0.5) * w as f64 / nx as f64;
            let y = (j as f64 + 0.5) * h as f64 / ny as f64;
            let px = (x.floor() as usize).min(w - 1);
            let py = (y.floor() as usize).min(h - 1);
            Center {
                color: feats[py * w + px],
                x,
                y,
            }
        })
        .collect();

    let spatial_weight = params.compactness / spacing;
    let mut labels = vec![0usize; n];
    for _ in 0..params.iterations {
        for (idx, f) in feats.iter().enumerate() {
            let (px, py) = ((idx % w) as f64 + 0.5, (idx / w) as f64 + 0.5);
            let mut best = (f64::INFINITY, 0);
            for (k, c) in centers.iter().enumerate() {
                let dc = ((f[0] - c.color[0]).powi(2)
                    + (f[1] - c.color[1]).powi(2)
                    + (f[2] - c.color[2]).powi(2))
                .sqrt();
                let ds = ((px - c.x).powi(2) + (py - c.y).powi(2)).sqrt();
                let d = dc + spatial_weight * ds;
                if d < best.0 {
                    best = (d, k);
                }
            }
            labels[idx] = best.1;
        }
        let mut sums = vec![[0.0f64; 6]; centers.len()];
        for (idx, &l) in labels.iter().enumerate() {
            let s = &mut sums[l];
            s[0] += feats[idx][0];
            s[1] += feats[idx][1];
            s[2] += feats[idx][2];
            s[3] += (idx % w) as f64 + 0.5;
            s[4] += (idx / w) as f64 + 0.5;
            s[5] += 1.0;
        }
        for (c, s) in centers.iter_mut().zip(&sums) {
            if s[5] > 0.0 {
                c.color = [s[0] / s[5], s[1] / s[5], s[2] / s[5]];
                c.x = s[3] / s[5];
                c.y = s[4] / s[5];
            }
        }
    }
    enforce_connectivity(w, h, &mut labels, centers.len());
    let count = relabel(&mut labels);
    Ok(SuperpixelMap {
        width: w,
        height: h,
        labels,
        count,
    })
}

/// 4-connected components: component id per pixel and component sizes.
fn components(w: usize, h: usize, labels: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let mut comp = vec![usize::MAX; labels.len()];
    let mut sizes = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..labels.len() {
        if comp[start] != usize::MAX {
            continue;
        }
        let id = sizes.len();
        comp[start] = id;
        queue.push_back(start);
        let mut size = 0;
        while let Some(i) = queue.pop_front() {
            size += 1;
            let (x, y) = (i % w, i / w);
            let neighbours = [
                (x > 0).then(|| i - 1),
                (x + 1 < w).then(|| i + 1),
                (y > 0).then(|| i - w),
                (y + 1 < h).then(|| i + w),
            ];
            for j in neighbours.into_iter().flatten() {
                if comp[j] == usize::MAX && labels[j] == labels[start] {
                    comp[j] = id;
                    queue.push_back(j);
                }
            }
        }
        sizes.push(size);
    }
    (comp, sizes)
}

/// Keeps the largest component of every label and folds the other fragments
/// into the largest neighbouring segment until each label is one component.
fn enforce_connectivity(w: usize, h: usize, labels: &mut [usize], label_count: usize) {
    loop {
        let (comp, comp_sizes) = components(w, h, labels);
        let mut comp_label = vec![0; comp_sizes.len()];
        let mut first_pixel = vec![usize::MAX; comp_sizes.len()];
        for (i, &c) in comp.iter().enumerate() {
            if first_pixel[c] == usize::MAX {
                first_pixel[c] = i;
                comp_label[c] = labels[i];
            }
        }
        let mut kept = vec![usize::MAX; label_count];
        for (c, &size) in comp_sizes.iter().enumerate() {
            let l = comp_label[c];
            if kept[l] == usize::MAX || size > comp_sizes[kept[l]] {
                kept[l] = c;
            }
        }
        let orphans: Vec<usize> = (0..comp_sizes.len())
            .filter(|&c| kept[comp_label[c]] != c)
            .collect();
        if orphans.is_empty() {
            return;
        }
        let mut segment_size = vec![0usize; label_count];
        for &l in labels.iter() {
            segment_size[l] += 1;
        }
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); comp_sizes.len()];
        for (i, &c) in comp.iter().enumerate() {
            if kept[comp_label[c]] != c {
                members[c].push(i);
            }
        }
        for c in orphans {
            let own = labels[members[c][0]];
            let mut target: Option<usize> = None;
            for &i in &members[c] {
                let (x, y) = (i % w, i / w);
                let neighbours = [
                    (x > 0).then(|| i - 1),
                    (x + 1 < w).then(|| i + 1),
                    (y > 0).then(|| i - w),
                    (y + 1 < h).then(|| i + w),
                ];
                for j in neighbours.into_iter().flatten() {
                    let l = labels[j];
                    if l == own {
                        continue;
                    }
                    let better = match target {
                        None => true,
                        Some(t) => segment_size[l] > segment_size[t]
                            || (segment_size[l] == segment_size[t] && l < t),
                    };
                    if better {
                        target = Some(l);
                    }
                }
            }
            if let Some(t) = target {
                for &i in &members[c] {
                    labels[i] = t;
                }
                segment_size[t] += members[c].len();
                segment_size[own] -= members[c].len();
            }
        }
    }
}

/// Renumbers labels by first appearance in raster order; returns the count.
fn relabel(labels: &mut [usize]) -> usize {
    let max = labels.iter().copied().max().unwrap_or(0);
    let mut map = vec![usize::MAX; max + 1];
    let mut next = 0;
    for l in labels.iter_mut() {
        if map[*l] == usize::MAX {
            map[*l] = next;
            next += 1;
        }
        *l = map[*l];
    }
    next
}
