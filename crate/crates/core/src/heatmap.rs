//! Grayscale rasters of permutons and graphons as plain (P2) graymaps.
//!
//! Pixel `(i, j)` covers `[i/r, (i+1)/r] × [j/r, (j+1)/r]`; rows are written from
//! the top so the origin sits in the lower-left corner of the image.

use crate::error::{Error, Result};
use crate::graphon::Graphon;
use crate::mc;
use crate::permuton::Permuton;
use rayon::prelude::*;

pub const MIN_RESOLUTION: usize = 16;
pub const MAX_RESOLUTION: usize = 4096;
pub const MAX_GRAY: u32 = 255;

/// Cell values in `[0, 1]`, `values[j * resolution + i]` for column `i`, row `j` (from the bottom).
#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap {
    resolution: usize,
    values: Vec<f64>,
    /// How the values were obtained.
    pub method: &'static str,
}

fn check_resolution(r: usize) -> Result<()> {
    if !(MIN_RESOLUTION..=MAX_RESOLUTION).contains(&r) {
        return Err(Error::invalid(format!(
            "resolution must lie in [{MIN_RESOLUTION}, {MAX_RESOLUTION}], got {r}"
        )));
    }
    Ok(())
}

impl Heatmap {
    pub fn resolution(&self) -> usize {
        self.resolution
    }

    /// Value of column `i`, row `j` counted from the bottom.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.resolution + i]
    }

    /// Plain graymap with one comment line.
    pub fn to_p2(&self, comment: &str) -> String {
        let r = self.resolution;
        let mut out = String::with_capacity(r * r * 4 + 128);
        out += "P2\n";
        out += &format!("# {} method={}\n", comment.replace('\n', " "), self.method);
        out += &format!("{r} {r}\n{MAX_GRAY}\n");
        for j in (0..r).rev() {
            let row: Vec<String> = (0..r)
                .map(|i| ((self.get(i, j).clamp(0.0, 1.0) * MAX_GRAY as f64).round() as u32).to_string())
                .collect();
            out += &row.join(" ");
            out.push('\n');
        }
        out
    }
}

/// Exact cell masses of `mu`, scaled so the heaviest cell is white.
pub fn permuton_heatmap(mu: &Permuton, resolution: usize) -> Result<Heatmap> {
    check_resolution(resolution)?;
    let r = resolution as f64;
    let edges: Vec<f64> = (0..=resolution).map(|i| i as f64 / r).collect();
    let cdf: Vec<Vec<f64>> = edges
        .par_iter()
        .map(|&y| edges.iter().map(|&x| mu.cdf(x, y)).collect())
        .collect();
    let mut values = vec![0.0; resolution * resolution];
    for j in 0..resolution {
        for i in 0..resolution {
            let m = cdf[j + 1][i + 1] - cdf[j][i + 1] - cdf[j + 1][i] + cdf[j][i];
            values[j * resolution + i] = m.max(0.0);
        }
    }
    normalize(&mut values);
    Ok(Heatmap { resolution, values, method: "exact-cell-mass" })
}

fn normalize(values: &mut [f64]) {
    let max = values.iter().cloned().fold(0.0, f64::max);
    if max > 0.0 {
        values.iter_mut().for_each(|v| *v /= max);
    }
}

/// Kernel values at cell centers; graphons without a pointwise kernel fall back
/// to a sampled render from `samples` latent points.
pub fn graphon_heatmap(w: &Graphon, resolution: usize, samples: usize, seed: u64) -> Result<Heatmap> {
    check_resolution(resolution)?;
    if w.has_kernel() {
        let r = resolution as f64;
        let values = (0..resolution * resolution)
            .into_par_iter()
            .map(|idx| {
                let (i, j) = (idx % resolution, idx / resolution);
                w.kernel((i as f64 + 0.5) / r, (j as f64 + 0.5) / r)
            })
            .collect::<Result<Vec<f64>>>()?;
        return Ok(Heatmap { resolution, values, method: "kernel" });
    }
    match w {
        Graphon::PermutonInduced { permuton } => Ok(sampled_inversion_heatmap(permuton, resolution, samples, seed)),
        _ => Err(Error::UnsupportedForm("no kernel and no sampler-based render for this graphon".into())),
    }
}

/// Empirical edge frequency between latent points grouped by their x-coordinate.
fn sampled_inversion_heatmap(mu: &Permuton, resolution: usize, samples: usize, seed: u64) -> Heatmap {
    let mut rng = mc::rng(seed);
    let pts: Vec<_> = (0..samples.max(2)).map(|_| mu.sample_point(&mut rng)).collect();
    let cell = |t: f64| ((t * resolution as f64) as usize).min(resolution - 1);
    let mut edges = vec![0u64; resolution * resolution];
    let mut pairs = vec![0u64; resolution * resolution];
    for (a, p) in pts.iter().enumerate() {
        for q in &pts[a + 1..] {
            let (i, j) = (cell(p.x), cell(q.x));
            let inv = ((p.x - q.x) * (p.y - q.y) < 0.0) as u64;
            for idx in [j * resolution + i, i * resolution + j] {
                pairs[idx] += 1;
                edges[idx] += inv;
            }
        }
    }
    let values = edges
        .iter()
        .zip(&pairs)
        .map(|(&e, &n)| if n == 0 { 0.0 } else { e as f64 / n as f64 })
        .collect();
    Heatmap { resolution, values, method: "sampled" }
}
