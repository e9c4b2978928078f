//! Correspondence metrics between ground-truth parameters, observations, and
//! learned latents.

use std::f64::consts::{PI, TAU};

use tvae_core::euclidean;

use crate::TrainError;

/// Parameter values where the figure-eight observation curve passes through
/// its self-intersection; they split the parameter circle into the two lobes.
pub const ORBIT_NODE_LOW: f64 = PI / 6.0;
pub const ORBIT_NODE_HIGH: f64 = 5.0 * PI / 6.0;

fn wrap_angle(mut d: f64) -> f64 {
    while d > PI {
        d -= TAU;
    }
    while d <= -PI {
        d += TAU;
    }
    d
}

/// Signed number of turns the latent points make around the origin as the
/// true phase sweeps its cycle once. Samples are sorted by phase, angle
/// increments are wrapped to (-pi, pi], and the closing edge back to the
/// first sample is included, so any full traversal gives an integer.
///
/// A one-to-one latent embedding of a loop gives +1 or -1; a double cover
/// gives +-2; collapsed latents (radius <= 0.1) are rejected because their
/// angles are meaningless.
pub fn winding_number(phases: &[f64], latents: &[[f64; 2]]) -> Result<i64, TrainError> {
    if phases.len() != latents.len() {
        return Err(TrainError::DataMismatch(format!(
            "{} phases vs {} latent points",
            phases.len(),
            latents.len()
        )));
    }
    if phases.len() < 10 {
        return Err(TrainError::TooFewSamples {
            need: 10,
            got: phases.len(),
        });
    }
    if let Some(bad) = phases.iter().find(|p| !p.is_finite()) {
        return Err(TrainError::DataMismatch(format!("non-finite phase {bad}")));
    }
    for (i, z) in latents.iter().enumerate() {
        let radius = (z[0] * z[0] + z[1] * z[1]).sqrt();
        if !(radius > 0.1) {
            return Err(TrainError::CollapsedLatents(format!(
                "sample {i} has latent radius {radius:.4}"
            )));
        }
    }

    let mut order: Vec<usize> = (0..phases.len()).collect();
    order.sort_by(|&a, &b| phases[a].partial_cmp(&phases[b]).unwrap().then(a.cmp(&b)));
    let angles: Vec<f64> = order
        .iter()
        .map(|&i| latents[i][1].atan2(latents[i][0]))
        .collect();

    let mut total = 0.0;
    for i in 0..angles.len() {
        let next = angles[(i + 1) % angles.len()];
        total += wrap_angle(next - angles[i]);
    }
    Ok((total / TAU).round() as i64)
}

/// Winding numbers of the two figure-eight lobes, computed separately since
/// a single winding is ill-defined at the self-intersection. Samples are
/// assigned to a lobe by their time parameter; each lobe's latents are
/// recentered on their centroid and rescaled by the mean radius before the
/// winding count, because the lobes circle their own centers, not the origin.
pub fn orbit_lobe_windings(
    times: &[f64],
    latents: &[[f64; 2]],
) -> Result<[i64; 2], TrainError> {
    if times.len() != latents.len() {
        return Err(TrainError::DataMismatch(format!(
            "{} times vs {} latent points",
            times.len(),
            latents.len()
        )));
    }
    let mut lobes = [(Vec::new(), Vec::new()), (Vec::new(), Vec::new())];
    for (&t, &z) in times.iter().zip(latents) {
        if !t.is_finite() {
            return Err(TrainError::DataMismatch(format!("non-finite time {t}")));
        }
        let t = t.rem_euclid(TAU);
        if (ORBIT_NODE_LOW..=ORBIT_NODE_HIGH).contains(&t) {
            lobes[0].0.push(t);
            lobes[0].1.push(z);
        } else {
            // Reparameterize so this lobe's traversal is monotone too.
            lobes[1].0.push((t - ORBIT_NODE_HIGH).rem_euclid(TAU));
            lobes[1].1.push(z);
        }
    }
    let first = lobe_winding(&lobes[0].0, &lobes[0].1)?;
    let second = lobe_winding(&lobes[1].0, &lobes[1].1)?;
    Ok([first, second])
}

fn lobe_winding(params: &[f64], latents: &[[f64; 2]]) -> Result<i64, TrainError> {
    if latents.len() < 10 {
        return Err(TrainError::TooFewSamples {
            need: 10,
            got: latents.len(),
        });
    }
    let n = latents.len() as f64;
    let cx = latents.iter().map(|z| z[0]).sum::<f64>() / n;
    let cy = latents.iter().map(|z| z[1]).sum::<f64>() / n;
    let mut centered: Vec<[f64; 2]> =
        latents.iter().map(|z| [z[0] - cx, z[1] - cy]).collect();
    let mean_radius = centered
        .iter()
        .map(|z| (z[0] * z[0] + z[1] * z[1]).sqrt())
        .sum::<f64>()
        / n;
    if mean_radius <= 0.0 {
        return Err(TrainError::CollapsedLatents(
            "lobe latents are a single point".into(),
        ));
    }
    for z in &mut centered {
        z[0] /= mean_radius;
        z[1] /= mean_radius;
    }
    winding_number(params, &centered)
}

/// Spherical angles of a latent point that should lie on the unit sphere:
/// theta = arccos(z3/r) in [0, pi], phi = atan2(z2, z1) shifted into
/// [0, 2pi). Rejects points whose norm strays outside [0.8, 1.2].
pub fn polar_transform(z: &[f64]) -> Result<(f64, f64), TrainError> {
    if z.len() != 3 {
        return Err(TrainError::DataMismatch(format!(
            "polar transform expects 3 coordinates, got {}",
            z.len()
        )));
    }
    let norm = (z[0] * z[0] + z[1] * z[1] + z[2] * z[2]).sqrt();
    if !norm.is_finite() || !(0.8..=1.2).contains(&norm) {
        return Err(TrainError::NotSpherical(norm));
    }
    let theta = (z[2] / norm).clamp(-1.0, 1.0).acos();
    let mut phi = z[1].atan2(z[0]);
    if phi < 0.0 {
        phi += TAU;
    }
    if phi >= TAU {
        phi = 0.0;
    }
    Ok((theta, phi))
}

/// Mean fraction of each sample's k nearest neighbors (by Euclidean
/// distance, self excluded, ties broken by index) that are shared between
/// the two point sets. 1.0 means the neighborhood structure is identical.
pub fn knn_overlap(
    first: &[Vec<f64>],
    second: &[Vec<f64>],
    k: usize,
) -> Result<f64, TrainError> {
    if first.len() != second.len() {
        return Err(TrainError::DataMismatch(format!(
            "{} vs {} points",
            first.len(),
            second.len()
        )));
    }
    if k == 0 || first.len() <= k {
        return Err(TrainError::TooFewSamples {
            need: k + 1,
            got: first.len(),
        });
    }
    let n = first.len();
    let mut total = 0.0;
    for i in 0..n {
        let a = neighbors(first, i, k);
        let b = neighbors(second, i, k);
        let shared = a.iter().filter(|j| b.contains(j)).count();
        total += shared as f64 / k as f64;
    }
    Ok(total / n as f64)
}

fn neighbors(points: &[Vec<f64>], i: usize, k: usize) -> Vec<usize> {
    let mut dists: Vec<(f64, usize)> = points
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != i)
        .map(|(j, p)| (euclidean(&points[i], p), j))
        .collect();
    dists.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    dists.truncate(k);
    dists.into_iter().map(|(_, j)| j).collect()
}
