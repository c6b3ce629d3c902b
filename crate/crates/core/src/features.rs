//! Explicit per-vertex, per-phase network input features.
//!
//! Three channel groups, concatenated in fixed order:
//!
//! - position (3): vertex coordinates, centered on the ED endocardial
//!   centroid and divided by the ED endocardial bounding-sphere radius;
//! - motion (3): first-order inter-phase differences, cyclic over the
//!   cardiac cycle (the last phase wraps to the first), same scaling;
//! - thickness (1): distance from each endocardial vertex to its nearest
//!   epicardial point, recomputed per phase so thickening dynamics are
//!   visible, same scaling.
//!
//! Disabled channels (ablations) are absent from the tensor, not zero-filled.

use std::fs;
use std::path::Path;

use ndarray::{s, Array2, Array3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kdtree::KdTree3;
use crate::mesh::{HybridInput, MeshSequence};
use crate::vec3;

/// Channel groups feeding the network. Position is always enabled; motion
/// and thickness can be dropped for ablation runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelFlags {
    pub motion: bool,
    pub thickness: bool,
}

impl Default for ChannelFlags {
    fn default() -> Self {
        ChannelFlags {
            motion: true,
            thickness: true,
        }
    }
}

impl ChannelFlags {
    pub fn channel_count(&self) -> usize {
        3 + if self.motion { 3 } else { 0 } + if self.thickness { 1 } else { 0 }
    }

    pub fn channel_layout(&self) -> Vec<String> {
        let mut names = vec![
            "position_x".to_string(),
            "position_y".to_string(),
            "position_z".to_string(),
        ];
        if self.motion {
            names.extend(["motion_x".into(), "motion_y".into(), "motion_z".into()]);
        }
        if self.thickness {
            names.push("thickness".into());
        }
        names
    }
}

/// Centering and scaling applied during feature assembly, kept so outputs
/// can be mapped back to world coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormRecord {
    pub centroid: [f64; 3],
    pub radius: f64,
}

/// Per-vertex, per-phase feature values, shaped `[phase][vertex][channel]`.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureTensor {
    pub values: Array3<f64>,
    pub channel_layout: Vec<String>,
    pub normalization: NormRecord,
}

impl FeatureTensor {
    pub fn n_phases(&self) -> usize {
        self.values.shape()[0]
    }

    pub fn vertex_count(&self) -> usize {
        self.values.shape()[1]
    }

    pub fn channel_count(&self) -> usize {
        self.values.shape()[2]
    }
}

/// First-order inter-phase differences of endocardial vertex positions,
/// in millimeters: `motion[t][v] = pos[(t+1) mod N][v] - pos[t][v]`.
pub fn compute_motion(mesh: &MeshSequence, hybrid: &HybridInput) -> Array3<f64> {
    let n = mesh.n_phases();
    let v = hybrid.endo_count();
    let mut motion = Array3::zeros((n, v, 3));
    for t in 0..n {
        let cur = mesh.phase(t);
        let next = mesh.phase((t + 1) % n);
        for (vi, &gi) in hybrid.endo_vertices.iter().enumerate() {
            let d = vec3::sub(next.positions[gi as usize], cur.positions[gi as usize]);
            motion[[t, vi, 0]] = d[0];
            motion[[t, vi, 1]] = d[1];
            motion[[t, vi, 2]] = d[2];
        }
    }
    motion
}

/// Distance from each endocardial vertex to its nearest epicardial point,
/// per phase, in millimeters.
pub fn compute_thickness(mesh: &MeshSequence, hybrid: &HybridInput) -> Array2<f64> {
    let n = mesh.n_phases();
    let v = hybrid.endo_count();
    let mut thickness = Array2::zeros((n, v));
    for t in 0..n {
        let epi = hybrid.epi_positions(mesh, t);
        let tree = KdTree3::new(&epi);
        let surf = mesh.phase(t);
        for (vi, &gi) in hybrid.endo_vertices.iter().enumerate() {
            let (_, d2) = tree
                .nearest(surf.positions[gi as usize])
                .expect("epi_points nonempty");
            thickness[[t, vi]] = d2.sqrt();
        }
    }
    thickness
}

/// Assembles the normalized input tensor for the enabled channels.
///
/// All phases share one normalization: the centroid and bounding-sphere
/// radius of the ED endocardium. Motion and thickness are divided by the
/// same radius so every channel is dimensionless and translation of the
/// whole sequence leaves the tensor unchanged.
pub fn assemble_features(
    mesh: &MeshSequence,
    hybrid: &HybridInput,
    flags: ChannelFlags,
) -> Result<FeatureTensor> {
    let n = mesh.n_phases();
    let v = hybrid.endo_count();
    let ed = hybrid.endo_positions(mesh, mesh.ed_phase());
    let mut centroid = [0.0f64; 3];
    for p in &ed {
        centroid = vec3::add(centroid, *p);
    }
    centroid = vec3::scale(centroid, 1.0 / v as f64);
    let radius = ed
        .iter()
        .map(|&p| vec3::dist(p, centroid))
        .fold(0.0f64, f64::max);
    if radius <= 0.0 {
        return Err(Error::validation(
            "degenerate ED endocardium: bounding-sphere radius is zero",
        ));
    }

    let c = flags.channel_count();
    let mut values = Array3::zeros((n, v, c));
    for t in 0..n {
        let surf = mesh.phase(t);
        for (vi, &gi) in hybrid.endo_vertices.iter().enumerate() {
            let p = vec3::scale(
                vec3::sub(surf.positions[gi as usize], centroid),
                1.0 / radius,
            );
            values[[t, vi, 0]] = p[0];
            values[[t, vi, 1]] = p[1];
            values[[t, vi, 2]] = p[2];
        }
    }
    let mut ch = 3;
    if flags.motion {
        let motion = compute_motion(mesh, hybrid);
        values
            .slice_mut(s![.., .., ch..ch + 3])
            .assign(&motion.mapv(|x| x / radius));
        ch += 3;
    }
    if flags.thickness {
        let thickness = compute_thickness(mesh, hybrid);
        values
            .slice_mut(s![.., .., ch])
            .assign(&thickness.mapv(|x| x / radius));
    }
    if values.iter().any(|x| !x.is_finite()) {
        return Err(Error::non_finite("assembled feature tensor"));
    }
    Ok(FeatureTensor {
        values,
        channel_layout: flags.channel_layout(),
        normalization: NormRecord { centroid, radius },
    })
}

#[derive(Serialize, Deserialize)]
struct FeatureSidecar {
    shape: [usize; 3],
    channels: Vec<String>,
    normalization: NormRecord,
}

/// Writes the tensor as a flat little-endian f64 blob plus a JSON sidecar
/// (`<path>.json`) describing shape, channel layout and normalization.
pub fn dump_feature_tensor(tensor: &FeatureTensor, path: &Path) -> Result<()> {
    let mut bytes = Vec::with_capacity(tensor.values.len() * 8);
    for x in tensor.values.iter() {
        bytes.extend_from_slice(&x.to_le_bytes());
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))?;
    let shape = tensor.values.shape();
    let sidecar = FeatureSidecar {
        shape: [shape[0], shape[1], shape[2]],
        channels: tensor.channel_layout.clone(),
        normalization: tensor.normalization,
    };
    let sidecar_path = sidecar_path(path);
    let json = serde_json::to_string_pretty(&sidecar)
        .map_err(|e| Error::validation(format!("sidecar serialization failed: {e}")))?;
    fs::write(&sidecar_path, json).map_err(|e| Error::io(&sidecar_path, e))
}

pub fn load_feature_tensor(path: &Path) -> Result<FeatureTensor> {
    let sidecar_path = sidecar_path(path);
    let text = fs::read_to_string(&sidecar_path).map_err(|e| Error::io(&sidecar_path, e))?;
    let sidecar: FeatureSidecar =
        serde_json::from_str(&text).map_err(|e| Error::format(&sidecar_path, e.to_string()))?;
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let expected = sidecar.shape.iter().product::<usize>() * 8;
    if bytes.len() != expected {
        return Err(Error::format(
            path,
            format!("expected {expected} bytes, found {}", bytes.len()),
        ));
    }
    let data: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let values =
        Array3::from_shape_vec((sidecar.shape[0], sidecar.shape[1], sidecar.shape[2]), data)
            .map_err(|e| Error::format(path, e.to_string()))?;
    Ok(FeatureTensor {
        values,
        channel_layout: sidecar.channels,
        normalization: sidecar.normalization,
    })
}

fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut os = path.as_os_str().to_owned();
    os.push(".json");
    os.into()
}
