//! Post-training evaluation: encode the whole dataset and measure how well
//! the latent space matches the intended structure.

use serde::Serialize;
use tvae_core::{PointCloud, System};
use tvae_vae::{topo_term, TvaeModel};

use crate::metrics::{knn_overlap, orbit_lobe_windings, winding_number};
use crate::TrainError;

pub const KNN_K: usize = 10;

/// Quantitative pass bars. The underlying claims are qualitative ("the
/// general coordinates collapse to zero", "latents trace the manifold
/// one-to-one"); these numbers make them checkable and were calibrated on
/// converged training runs.
pub const GPV_MAX_ABS_LIMIT: f64 = 0.05;
pub const RESIDUAL_MEAN_LIMIT: f64 = 0.05;
pub const RECON_MSE_LIMIT: f64 = 1e-2;
pub const KNN_OVERLAP_MIN: f64 = 0.6;

/// Everything evaluate() measures. `winding_number` is for single-loop
/// latents (oscillator), `lobe_windings` for the figure-eight; each is None
/// when labels are missing, the system has no loop to wind, or the latents
/// are too collapsed for angles to mean anything (which `failures` then
/// reports). The latent table is written separately as CSV, not serialized
/// into the report.
#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    pub gpv_max_abs: f64,
    pub gpv_mean_abs: f64,
    pub manifold_residual_mean: f64,
    pub recon_mse: f64,
    pub winding_number: Option<i64>,
    pub lobe_windings: Option<[i64; 2]>,
    pub knn_overlap: f64,
    pub labels_used: bool,
    #[serde(skip)]
    pub latents: Vec<Vec<f64>>,
}

impl EvalReport {
    /// Threshold violations for this system, empty when the run passes.
    pub fn failures(&self, system: System) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.gpv_max_abs < GPV_MAX_ABS_LIMIT) {
            out.push(format!(
                "gpv_max_abs {} is not below {GPV_MAX_ABS_LIMIT}",
                self.gpv_max_abs
            ));
        }
        if !(self.manifold_residual_mean < RESIDUAL_MEAN_LIMIT) {
            out.push(format!(
                "manifold_residual_mean {} is not below {RESIDUAL_MEAN_LIMIT}",
                self.manifold_residual_mean
            ));
        }
        if !(self.recon_mse < RECON_MSE_LIMIT) {
            out.push(format!(
                "recon_mse {} is not below {RECON_MSE_LIMIT}",
                self.recon_mse
            ));
        }
        match system {
            System::Oscillator if self.labels_used => match self.winding_number {
                Some(w) if w.abs() == 1 => {}
                Some(w) => out.push(format!("winding number {w}, expected +-1")),
                None => out.push("latent loop collapsed, no winding number".into()),
            },
            System::Orbit if self.labels_used => match self.lobe_windings {
                Some(ws) if ws.iter().all(|w| w.abs() == 1) => {}
                Some(ws) => out.push(format!(
                    "lobe windings {ws:?}, expected +-1 on both lobes"
                )),
                None => out.push("latent lobes collapsed, no winding numbers".into()),
            },
            System::Qubit if !(self.knn_overlap >= KNN_OVERLAP_MIN) => {
                out.push(format!(
                    "knn_overlap {} is below {KNN_OVERLAP_MIN}",
                    self.knn_overlap
                ));
            }
            _ => {}
        }
        out
    }
}

/// Encode every sample and compute the full metric set. `labels` carries the
/// ground-truth hidden parameters when available; without it the winding
/// checks are skipped and `labels_used` records that.
pub fn evaluate(
    model: &TvaeModel,
    data: &PointCloud,
    labels: Option<&PointCloud>,
) -> Result<EvalReport, TrainError> {
    let system = model.system();
    if data.dim() != system.observation_dim() {
        return Err(TrainError::DataMismatch(format!(
            "data dimension {} but {} observations have {}",
            data.dim(),
            system,
            system.observation_dim()
        )));
    }
    if let Some(l) = labels {
        if l.len() != data.len() {
            return Err(TrainError::DataMismatch(format!(
                "{} labels for {} samples",
                l.len(),
                data.len()
            )));
        }
        if l.dim() != system.hidden_dim() {
            return Err(TrainError::DataMismatch(format!(
                "label dimension {} but {} has {} hidden parameters",
                l.dim(),
                system,
                system.hidden_dim()
            )));
        }
    }

    let layout = *model.layout();
    let n = data.len();
    let mut latents = Vec::with_capacity(n);
    let mut sq_err_sum = 0.0;
    let mut residual_sum = 0.0;
    let mut gpv_max: f64 = 0.0;
    let mut gpv_abs_sum = 0.0;
    for x in data.points() {
        let (z, x_hat) = model.reconstruct(x)?;
        sq_err_sum += x
            .iter()
            .zip(&x_hat)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>();
        let (z_t, z_g) = z.split_at(layout.n_tpv);
        residual_sum += topo_term(layout.term, z_t)?.0;
        for &g in z_g {
            gpv_max = gpv_max.max(g.abs());
            gpv_abs_sum += g.abs();
        }
        latents.push(z);
    }

    let recon_mse = sq_err_sum / (n * data.dim()) as f64;
    let manifold_residual_mean = residual_sum / n as f64;
    let gpv_entries = (n * layout.n_gpv).max(1);
    let gpv_mean_abs = gpv_abs_sum / gpv_entries as f64;

    let tpv_points: Vec<Vec<f64>> = latents.iter().map(|z| z[..layout.n_tpv].to_vec()).collect();
    let obs_points: Vec<Vec<f64>> = data.points().map(|p| p.to_vec()).collect();
    let knn = knn_overlap(&obs_points, &tpv_points, KNN_K)?;

    let mut winding = None;
    let mut lobes = None;
    if let Some(l) = labels {
        let phases = l.column(0);
        let plane: Vec<[f64; 2]> = latents.iter().map(|z| [z[0], z[1]]).collect();
        match system {
            System::Oscillator => match winding_number(&phases, &plane) {
                Ok(w) => winding = Some(w),
                Err(TrainError::CollapsedLatents(_)) => {}
                Err(e) => return Err(e),
            },
            System::Orbit => match orbit_lobe_windings(&phases, &plane) {
                Ok(ws) => lobes = Some(ws),
                Err(TrainError::CollapsedLatents(_)) => {}
                Err(e) => return Err(e),
            },
            System::Qubit => {}
        }
    }

    let report = EvalReport {
        gpv_max_abs: gpv_max,
        gpv_mean_abs,
        manifold_residual_mean,
        recon_mse,
        winding_number: winding,
        lobe_windings: lobes,
        knn_overlap: knn,
        labels_used: labels.is_some(),
        latents,
    };
    for (name, value) in [
        ("gpv_max_abs", report.gpv_max_abs),
        ("gpv_mean_abs", report.gpv_mean_abs),
        ("manifold_residual_mean", report.manifold_residual_mean),
        ("recon_mse", report.recon_mse),
        ("knn_overlap", report.knn_overlap),
    ] {
        if !value.is_finite() {
            return Err(TrainError::NonFiniteMetric(name));
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use tvae_core::{LatentLayout, Rng, TermKind};
    use tvae_physics::generate;

    fn untrained(system: System, seed: u64) -> TvaeModel {
        let mut rng = Rng::stream(seed, "eval-test");
        let layout = match system {
            System::Oscillator => LatentLayout::new(TermKind::Circle, 2, 1),
            System::Orbit => LatentLayout::new(TermKind::Lemniscate, 2, 1),
            System::Qubit => LatentLayout::new(TermKind::Sphere, 3, 1),
        };
        TvaeModel::new(system, layout, 1.0, &mut rng).unwrap()
    }

    #[test]
    fn untrained_model_yields_finite_metrics_and_fails_thresholds() {
        let ds = generate(System::Oscillator, 300, 42).unwrap();
        let model = untrained(System::Oscillator, 1);
        let report = evaluate(&model, &ds.observations, Some(&ds.labels)).unwrap();
        assert_eq!(report.latents.len(), 300);
        assert_eq!(report.latents[0].len(), 3);
        assert!(report.manifold_residual_mean > RESIDUAL_MEAN_LIMIT);
        assert!((0.0..=1.0).contains(&report.knn_overlap));
        assert!(report.recon_mse > 0.0);
        assert!(!report.failures(System::Oscillator).is_empty());
        let json = serde_json::to_string(&report).unwrap();
        assert!(json.contains("gpv_max_abs"));
        assert!(!json.contains("latents"));
    }

    #[test]
    fn missing_labels_skip_winding_metrics() {
        let ds = generate(System::Orbit, 200, 7).unwrap();
        let model = untrained(System::Orbit, 2);
        let report = evaluate(&model, &ds.observations, None).unwrap();
        assert!(!report.labels_used);
        assert!(report.winding_number.is_none());
        assert!(report.lobe_windings.is_none());
        let failures = report.failures(System::Orbit);
        assert!(failures.iter().all(|f| !f.contains("winding")));
    }

    #[test]
    fn label_shape_mismatches_are_rejected() {
        let ds = generate(System::Oscillator, 100, 3).unwrap();
        let other = generate(System::Oscillator, 50, 3).unwrap();
        let model = untrained(System::Oscillator, 3);
        assert!(evaluate(&model, &ds.observations, Some(&other.labels)).is_err());
        let qubit = generate(System::Qubit, 100, 3).unwrap();
        assert!(evaluate(&model, &qubit.observations, Some(&qubit.labels)).is_err());
    }

    #[test]
    fn qubit_threshold_is_judged_on_knn_overlap() {
        let report = EvalReport {
            gpv_max_abs: 0.01,
            gpv_mean_abs: 0.001,
            manifold_residual_mean: 0.01,
            recon_mse: 1e-3,
            winding_number: None,
            lobe_windings: None,
            knn_overlap: 0.4,
            labels_used: true,
            latents: Vec::new(),
        };
        let failures = report.failures(System::Qubit);
        assert_eq!(failures.len(), 1);
        assert!(failures[0].contains("knn_overlap"));
        assert!(report.failures(System::Oscillator).len() == 1);
    }
}
