//! Ground-truth infarct labels from sparse scar annotations.
//!
//! Scar voxels identified on 2D slices arrive as world-coordinate points
//! that are sparse along the slice axis. [`densify`] synthesizes extra
//! points per voxel by Gaussian sampling of the Z coordinate (N(z, sigma^2),
//! sigma defaulting to 3 mm), and [`project_to_vertices`] maps every
//! densified point onto its k nearest LV endocardial vertices at the ED
//! phase (k defaulting to 5), labeling those vertices as scarred.
//!
//! The whole pipeline is deterministic for a fixed seed; nearest-neighbor
//! ties are broken by the lower vertex index.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kdtree::KdTree3;
use crate::mesh::{HybridInput, MeshSequence, VertexLabels};

/// Annotated scar sample points in world coordinates (mm), already
/// registered to the ED cine frame.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ScarPointSet {
    pub points: Vec<[f64; 3]>,
    /// Optional per-point slice identifier, aligned with `points`.
    pub source_slice: Option<Vec<String>>,
}

impl ScarPointSet {
    pub fn new(points: Vec<[f64; 3]>) -> Result<Self> {
        let set = ScarPointSet {
            points,
            source_slice: None,
        };
        set.validate()?;
        Ok(set)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(bad) = self
            .points
            .iter()
            .position(|p| !p.iter().all(|c| c.is_finite()))
        {
            return Err(Error::validation(format!(
                "scar point {bad} has a non-finite coordinate"
            )));
        }
        if let Some(slices) = &self.source_slice {
            if slices.len() != self.points.len() {
                return Err(Error::validation(format!(
                    "{} slice ids for {} points",
                    slices.len(),
                    self.points.len()
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Parameters of the densify-and-project pipeline.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectionConfig {
    /// Standard deviation of the Z-sampling Gaussian, mm.
    pub sigma_z: f64,
    /// Synthesized points per original scar voxel.
    pub samples_per_voxel: usize,
    /// Nearest vertices labeled per densified point.
    pub k_vertices: usize,
    pub rng_seed: u64,
}

impl Default for ProjectionConfig {
    fn default() -> Self {
        ProjectionConfig {
            sigma_z: 3.0,
            samples_per_voxel: 10,
            k_vertices: 5,
            rng_seed: 0,
        }
    }
}

impl ProjectionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_z > 0.0) {
            return Err(Error::validation(format!(
                "sigma_z must be > 0, got {}",
                self.sigma_z
            )));
        }
        if self.k_vertices < 1 {
            return Err(Error::validation("k_vertices must be >= 1"));
        }
        Ok(())
    }
}

/// Densifies scar points along Z: the output keeps every original point and
/// appends, per original, `samples_per_voxel` copies whose Z coordinate is
/// redrawn from N(z, sigma_z^2). Deterministic given `rng_seed`.
pub fn densify(points: &ScarPointSet, cfg: &ProjectionConfig) -> Result<ScarPointSet> {
    cfg.validate()?;
    points.validate()?;
    let mut out = points.points.clone();
    let mut slices = points.source_slice.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    for (i, &p) in points.points.iter().enumerate() {
        let normal = Normal::new(p[2], cfg.sigma_z).expect("sigma_z validated");
        for _ in 0..cfg.samples_per_voxel {
            let z = normal.sample(&mut rng);
            out.push([p[0], p[1], z]);
            if let Some(s) = slices.as_mut() {
                let id = s[i].clone();
                s.push(id);
            }
        }
    }
    Ok(ScarPointSet {
        points: out,
        source_slice: slices,
    })
}

/// Labels, for each densified scar point, its `k_vertices` nearest
/// endocardial vertices at the ED phase. Densification happens internally
/// using `cfg`; pass `samples_per_voxel: 0` to project the raw points.
pub fn project_to_vertices(
    points: &ScarPointSet,
    mesh: &MeshSequence,
    hybrid: &HybridInput,
    cfg: &ProjectionConfig,
) -> Result<VertexLabels> {
    cfg.validate()?;
    if hybrid.endo_count() == 0 {
        return Err(Error::validation("empty endocardium"));
    }
    let dense = densify(points, cfg)?;
    let candidates = hybrid.endo_positions(mesh, mesh.ed_phase());
    Ok(project_points_knn(&dense.points, &candidates, cfg.k_vertices))
}

/// Core k-nearest-vertex labeling over explicit candidate positions. The
/// label set is the union over per-point neighbor sets; ties on distance are
/// broken by the lower vertex index.
pub fn project_points_knn(
    points: &[[f64; 3]],
    candidates: &[[f64; 3]],
    k: usize,
) -> VertexLabels {
    let mut labels = vec![0u8; candidates.len()];
    if points.is_empty() || candidates.is_empty() || k == 0 {
        return VertexLabels::new(labels).expect("zeros are valid labels");
    }
    let tree = KdTree3::new(candidates);
    for &p in points {
        for (idx, _) in tree.k_nearest(p, k) {
            labels[idx] = 1;
        }
    }
    VertexLabels::new(labels).expect("binary by construction")
}

/// Fraction of labeled vertices, `count_positive / domain_size` (0 for an
/// empty domain).
pub fn label_fraction(labels: &VertexLabels) -> f64 {
    if labels.domain_size() == 0 {
        return 0.0;
    }
    labels.count_positive() as f64 / labels.domain_size() as f64
}

/// Reads scar points from a CSV file with header `x_mm,y_mm,z_mm` and an
/// optional trailing `slice_id` column.
pub fn read_scar_csv(path: &Path) -> Result<ScarPointSet> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::format(path, e.to_string()))?;
    let headers = reader
        .headers()
        .map_err(|e| Error::format(path, e.to_string()))?
        .clone();
    let cols: Vec<&str> = headers.iter().collect();
    let has_slice = match cols.as_slice() {
        ["x_mm", "y_mm", "z_mm"] => false,
        ["x_mm", "y_mm", "z_mm", "slice_id"] => true,
        _ => {
            return Err(Error::format(
                path,
                format!(
                    "expected header 'x_mm,y_mm,z_mm[,slice_id]', found '{}'",
                    cols.join(",")
                ),
            ))
        }
    };
    let mut points = Vec::new();
    let mut slices = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::format(path, e.to_string()))?;
        let mut p = [0.0f64; 3];
        for (j, c) in p.iter_mut().enumerate() {
            let field = record.get(j).ok_or_else(|| {
                Error::format(path, format!("record {}: missing column {j}", i + 1))
            })?;
            *c = field.parse().map_err(|_| {
                Error::format(
                    path,
                    format!("record {}: invalid coordinate '{field}'", i + 1),
                )
            })?;
        }
        if has_slice {
            slices.push(record.get(3).unwrap_or("").to_string());
        }
        points.push(p);
    }
    let set = ScarPointSet {
        points,
        source_slice: if has_slice { Some(slices) } else { None },
    };
    set.validate()?;
    Ok(set)
}

/// Writes scar points in the CSV exchange format.
pub fn write_scar_csv(points: &ScarPointSet, path: &Path) -> Result<()> {
    let mut writer = csv::WriterBuilder::new()
        .from_path(path)
        .map_err(|e| Error::format(path, e.to_string()))?;
    let has_slice = points.source_slice.is_some();
    let header: &[&str] = if has_slice {
        &["x_mm", "y_mm", "z_mm", "slice_id"]
    } else {
        &["x_mm", "y_mm", "z_mm"]
    };
    writer
        .write_record(header)
        .map_err(|e| Error::format(path, e.to_string()))?;
    for (i, p) in points.points.iter().enumerate() {
        let coords = [p[0].to_string(), p[1].to_string(), p[2].to_string()];
        if let Some(slices) = &points.source_slice {
            writer.write_record([&coords[0], &coords[1], &coords[2], &slices[i]])
        } else {
            writer.write_record(&coords)
        }
        .map_err(|e| Error::format(path, e.to_string()))?;
    }
    writer.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::extract_hybrid_input;
    use crate::vec3::dist2;

    #[test]
    fn densify_counts_and_xy_preserved() {
        let set = ScarPointSet::new(vec![[1.0, 2.0, 3.0]]).unwrap();
        let cfg = ProjectionConfig::default();
        let dense = densify(&set, &cfg).unwrap();
        assert_eq!(dense.len(), 11);
        assert_eq!(dense.points[0], [1.0, 2.0, 3.0]);
        for p in &dense.points[1..] {
            assert_eq!(p[0], 1.0);
            assert_eq!(p[1], 2.0);
            assert_ne!(p[2], 3.0);
        }
    }

    #[test]
    fn densify_zero_samples_is_identity() {
        let set = ScarPointSet::new(vec![[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]]).unwrap();
        let cfg = ProjectionConfig {
            samples_per_voxel: 0,
            ..Default::default()
        };
        assert_eq!(densify(&set, &cfg).unwrap(), set);
    }

    #[test]
    fn densify_is_deterministic() {
        let set = ScarPointSet::new(vec![[0.0, 0.0, 0.0]; 5]).unwrap();
        let cfg = ProjectionConfig {
            rng_seed: 42,
            ..Default::default()
        };
        assert_eq!(densify(&set, &cfg).unwrap(), densify(&set, &cfg).unwrap());
    }

    #[test]
    fn densify_sampling_statistics() {
        // Law-of-large-numbers check on this crate's RNG: 1000 points x 10
        // samples with sigma 3 mm.
        let set = ScarPointSet::new(vec![[0.0, 0.0, 10.0]; 1000]).unwrap();
        let cfg = ProjectionConfig {
            rng_seed: 7,
            ..Default::default()
        };
        let dense = densify(&set, &cfg).unwrap();
        let deltas: Vec<f64> = dense.points[1000..].iter().map(|p| p[2] - 10.0).collect();
        assert_eq!(deltas.len(), 10_000);
        let mean = deltas.iter().sum::<f64>() / deltas.len() as f64;
        let var =
            deltas.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / (deltas.len() - 1) as f64;
        assert!(mean.abs() < 0.3, "sample mean {mean}");
        let std = var.sqrt();
        assert!((2.7..=3.3).contains(&std), "sample std {std}");
    }

    #[test]
    fn empty_point_set_gives_all_zero_labels() {
        let mesh = crate::mesh::tests::tiny_mesh(2);
        let hybrid = extract_hybrid_input(&mesh).unwrap();
        let labels = project_to_vertices(
            &ScarPointSet::default(),
            &mesh,
            &hybrid,
            &ProjectionConfig::default(),
        )
        .unwrap();
        assert_eq!(labels.count_positive(), 0);
        assert_eq!(labels.domain_size(), 4);
    }

    #[test]
    fn single_point_labels_k_vertices() {
        // 1 point, k = 5, no densification: exactly min(5, V) vertices labeled.
        let candidates: Vec<[f64; 3]> = (0..100).map(|i| [i as f64, 0.0, 0.0]).collect();
        let labels = project_points_knn(&[[0.2, 0.0, 0.0]], &candidates, 5);
        assert_eq!(labels.count_positive(), 5);
        assert_eq!(labels.positive_indices(), vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn projection_matches_brute_force_oracle() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let candidates: Vec<[f64; 3]> = (0..500)
            .map(|_| {
                [
                    rng.gen_range(-30.0..30.0),
                    rng.gen_range(-30.0..30.0),
                    rng.gen_range(-30.0..30.0),
                ]
            })
            .collect();
        let points: Vec<[f64; 3]> = (0..50)
            .map(|_| {
                [
                    rng.gen_range(-30.0..30.0),
                    rng.gen_range(-30.0..30.0),
                    rng.gen_range(-30.0..30.0),
                ]
            })
            .collect();
        let got = project_points_knn(&points, &candidates, 5);

        // Oracle: exhaustive distance sort with the same (dist, index) tie rule.
        let mut expected = vec![0u8; candidates.len()];
        for &p in &points {
            let mut order: Vec<(f64, usize)> = candidates
                .iter()
                .enumerate()
                .map(|(i, &c)| (dist2(p, c), i))
                .collect();
            order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            for &(_, i) in order.iter().take(5) {
                expected[i] = 1;
            }
        }
        assert_eq!(got.as_slice(), expected.as_slice());
    }

    #[test]
    fn adding_points_never_unlabels() {
        let candidates: Vec<[f64; 3]> = (0..50).map(|i| [i as f64, 0.0, 0.0]).collect();
        let base = vec![[3.0, 1.0, 0.0], [40.0, -2.0, 0.0]];
        let small = project_points_knn(&base, &candidates, 3);
        let mut more = base.clone();
        more.push([20.0, 0.5, 0.0]);
        let big = project_points_knn(&more, &candidates, 3);
        for i in 0..candidates.len() {
            assert!(big.get(i) >= small.get(i));
        }
    }

    #[test]
    fn projection_uses_only_ed_geometry() {
        let mesh = crate::mesh::tests::tiny_mesh(3);
        let hybrid = extract_hybrid_input(&mesh).unwrap();
        let points = ScarPointSet::new(vec![[0.1, 0.1, 0.0]]).unwrap();
        let cfg = ProjectionConfig {
            k_vertices: 2,
            samples_per_voxel: 0,
            ..Default::default()
        };
        let labels = project_to_vertices(&points, &mesh, &hybrid, &cfg).unwrap();

        // Permute the non-ED phases: labels must be unchanged.
        let permuted = crate::mesh::MeshSequence::new(
            vec![
                mesh.phase(0).clone(),
                mesh.phase(2).clone(),
                mesh.phase(1).clone(),
            ],
            mesh.faces().to_vec(),
            mesh.classes().to_vec(),
            0,
        )
        .unwrap();
        let labels2 = project_to_vertices(&points, &permuted, &hybrid, &cfg).unwrap();
        assert_eq!(labels, labels2);
    }

    #[test]
    fn label_fraction_bounds() {
        assert_eq!(label_fraction(&VertexLabels::zeros(10)), 0.0);
        let all = VertexLabels::new(vec![1; 10]).unwrap();
        assert_eq!(label_fraction(&all), 1.0);
    }

    #[test]
    fn csv_round_trip_with_slice_ids() {
        let set = ScarPointSet {
            points: vec![[1.5, -2.25, 3.125], [0.0, 4.0, -1.0]],
            source_slice: Some(vec!["sax_03".into(), "sax_04".into()]),
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scar.csv");
        write_scar_csv(&set, &path).unwrap();
        assert_eq!(read_scar_csv(&path).unwrap(), set);
    }

    #[test]
    fn csv_rejects_bad_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scar.csv");
        std::fs::write(&path, "a,b,c\n1,2,3\n").unwrap();
        let err = read_scar_csv(&path).unwrap_err();
        assert!(err.to_string().contains("x_mm"), "{err}");
    }
}
