//! Data model and I/O for 4D point-correspondent biventricular surface meshes.
//!
//! A [`MeshSequence`] holds one [`Surface`] per cardiac phase over a shared
//! triangulation: vertex `i` denotes the same material point in every phase.
//! Vertices carry a [`VertexClass`] tag separating the LV endocardium (the
//! segmentation domain), the LV epicardium (used as a point cloud for wall
//! thickness) and everything else.
//!
//! On-disk format: a JSON manifest listing per-phase plain-text vertex files
//! plus one shared face file and one class file. Coordinates are in
//! millimeters throughout; no unit conversion happens inside the library.

use std::collections::VecDeque;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Anatomical class of a mesh vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum VertexClass {
    LvEndo,
    LvEpi,
    Rv,
    Other,
}

impl VertexClass {
    pub fn tag(self) -> &'static str {
        match self {
            VertexClass::LvEndo => "LV_ENDO",
            VertexClass::LvEpi => "LV_EPI",
            VertexClass::Rv => "RV",
            VertexClass::Other => "OTHER",
        }
    }

    pub fn parse_tag(s: &str) -> Option<Self> {
        match s {
            "LV_ENDO" => Some(VertexClass::LvEndo),
            "LV_EPI" => Some(VertexClass::LvEpi),
            "RV" => Some(VertexClass::Rv),
            "OTHER" => Some(VertexClass::Other),
            _ => None,
        }
    }
}

impl fmt::Display for VertexClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Vertex positions of one cardiac phase, in millimeters.
#[derive(Clone, Debug, PartialEq)]
pub struct Surface {
    pub positions: Vec<[f64; 3]>,
}

/// Point-correspondent surface meshes over the cardiac cycle.
#[derive(Clone, Debug, PartialEq)]
pub struct MeshSequence {
    phases: Vec<Surface>,
    face_list: Vec<[u32; 3]>,
    vertex_class: Vec<VertexClass>,
    phase_index_ed: usize,
}

impl MeshSequence {
    /// Builds a sequence and checks every invariant: N >= 2, identical vertex
    /// counts across phases, finite coordinates, in-range non-degenerate
    /// faces, and an endocardium in which every LV_ENDO vertex sits in at
    /// least one all-endo face of a single connected patch.
    pub fn new(
        phases: Vec<Surface>,
        face_list: Vec<[u32; 3]>,
        vertex_class: Vec<VertexClass>,
        phase_index_ed: usize,
    ) -> Result<Self> {
        if phases.len() < 2 {
            return Err(Error::validation(format!(
                "N >= 2 required: got {} phase(s)",
                phases.len()
            )));
        }
        let vertex_count = vertex_class.len();
        for (i, phase) in phases.iter().enumerate() {
            if phase.positions.len() != vertex_count {
                return Err(Error::validation(format!(
                    "phase {} has {} vertices, expected {}",
                    i,
                    phase.positions.len(),
                    vertex_count
                )));
            }
            for (v, p) in phase.positions.iter().enumerate() {
                if !p.iter().all(|c| c.is_finite()) {
                    return Err(Error::validation(format!(
                        "non-finite coordinate at phase {i}, vertex {v}"
                    )));
                }
            }
        }
        for (fi, face) in face_list.iter().enumerate() {
            for &v in face {
                if v as usize >= vertex_count {
                    return Err(Error::validation(format!(
                        "face {fi} references vertex {v}, but vertex count is {vertex_count}"
                    )));
                }
            }
            if face[0] == face[1] || face[1] == face[2] || face[0] == face[2] {
                return Err(Error::validation(format!(
                    "face {fi} is degenerate: [{}, {}, {}]",
                    face[0], face[1], face[2]
                )));
            }
        }
        if phase_index_ed >= phases.len() {
            return Err(Error::validation(format!(
                "ed_phase {} out of range for {} phases",
                phase_index_ed,
                phases.len()
            )));
        }
        let mesh = MeshSequence {
            phases,
            face_list,
            vertex_class,
            phase_index_ed,
        };
        mesh.check_endocardium()?;
        Ok(mesh)
    }

    /// Every LV_ENDO vertex must sit in at least one face whose three vertices
    /// are all LV_ENDO, and those faces must form one connected patch.
    fn check_endocardium(&self) -> Result<()> {
        let endo: Vec<usize> = self
            .vertex_class
            .iter()
            .enumerate()
            .filter(|(_, c)| **c == VertexClass::LvEndo)
            .map(|(i, _)| i)
            .collect();
        if endo.is_empty() {
            return Ok(());
        }
        let n = self.vertex_class.len();
        let mut in_endo_face = vec![false; n];
        let mut adjacency: Vec<Vec<u32>> = vec![Vec::new(); n];
        for face in &self.face_list {
            if face
                .iter()
                .all(|&v| self.vertex_class[v as usize] == VertexClass::LvEndo)
            {
                for &v in face {
                    in_endo_face[v as usize] = true;
                }
                for (a, b) in [(0, 1), (1, 2), (2, 0)] {
                    adjacency[face[a] as usize].push(face[b]);
                    adjacency[face[b] as usize].push(face[a]);
                }
            }
        }
        if let Some(&v) = endo.iter().find(|&&v| !in_endo_face[v]) {
            return Err(Error::validation(format!(
                "LV_ENDO vertex {v} is not part of any all-endocardial face"
            )));
        }
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([endo[0]]);
        seen[endo[0]] = true;
        let mut reached = 0usize;
        while let Some(v) = queue.pop_front() {
            reached += 1;
            for &u in &adjacency[v] {
                if !seen[u as usize] {
                    seen[u as usize] = true;
                    queue.push_back(u as usize);
                }
            }
        }
        if reached != endo.len() {
            return Err(Error::validation(format!(
                "endocardial surface is not connected: reached {reached} of {} vertices",
                endo.len()
            )));
        }
        Ok(())
    }

    pub fn n_phases(&self) -> usize {
        self.phases.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_class.len()
    }

    pub fn phase(&self, i: usize) -> &Surface {
        &self.phases[i]
    }

    pub fn faces(&self) -> &[[u32; 3]] {
        &self.face_list
    }

    pub fn classes(&self) -> &[VertexClass] {
        &self.vertex_class
    }

    pub fn ed_phase(&self) -> usize {
        self.phase_index_ed
    }

    pub fn ed_surface(&self) -> &Surface {
        &self.phases[self.phase_index_ed]
    }
}

/// LV endocardial mesh plus epicardial point cloud, extracted from a
/// [`MeshSequence`] as the hybrid network input.
#[derive(Clone, Debug, PartialEq)]
pub struct HybridInput {
    /// Global indices of LV endocardial vertices, ascending.
    pub endo_vertices: Vec<u32>,
    /// Faces whose three vertices are all endocardial, reindexed into
    /// `endo_vertices` positions.
    pub endo_faces: Vec<[u32; 3]>,
    /// Global indices of LV epicardial vertices, ascending.
    pub epi_points: Vec<u32>,
}

impl HybridInput {
    pub fn endo_count(&self) -> usize {
        self.endo_vertices.len()
    }

    pub fn epi_count(&self) -> usize {
        self.epi_points.len()
    }

    /// Positions of the endocardial vertices at `phase`, in local order.
    pub fn endo_positions(&self, mesh: &MeshSequence, phase: usize) -> Vec<[f64; 3]> {
        let surf = mesh.phase(phase);
        self.endo_vertices
            .iter()
            .map(|&v| surf.positions[v as usize])
            .collect()
    }

    /// Positions of the epicardial points at `phase`, in local order.
    pub fn epi_positions(&self, mesh: &MeshSequence, phase: usize) -> Vec<[f64; 3]> {
        let surf = mesh.phase(phase);
        self.epi_points
            .iter()
            .map(|&v| surf.positions[v as usize])
            .collect()
    }
}

/// Splits a mesh into the LV endocardial submesh and the epicardial point
/// cloud. Faces straddling classes are dropped from `endo_faces`; RV and
/// OTHER vertices are excluded entirely.
pub fn extract_hybrid_input(mesh: &MeshSequence) -> Result<HybridInput> {
    let mut endo_vertices = Vec::new();
    let mut epi_points = Vec::new();
    for (i, class) in mesh.classes().iter().enumerate() {
        match class {
            VertexClass::LvEndo => endo_vertices.push(i as u32),
            VertexClass::LvEpi => epi_points.push(i as u32),
            _ => {}
        }
    }
    if endo_vertices.is_empty() {
        return Err(Error::validation("mesh contains no LV_ENDO vertices"));
    }
    if epi_points.is_empty() {
        return Err(Error::validation("mesh contains no LV_EPI vertices"));
    }
    let mut local = vec![u32::MAX; mesh.vertex_count()];
    for (li, &gi) in endo_vertices.iter().enumerate() {
        local[gi as usize] = li as u32;
    }
    let endo_faces = mesh
        .faces()
        .iter()
        .filter(|f| f.iter().all(|&v| local[v as usize] != u32::MAX))
        .map(|f| [local[f[0] as usize], local[f[1] as usize], local[f[2] as usize]])
        .collect();
    Ok(HybridInput {
        endo_vertices,
        endo_faces,
        epi_points,
    })
}

/// Binary infarct label per endocardial vertex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexLabels {
    domain_size: usize,
    labels: Vec<u8>,
}

impl VertexLabels {
    pub fn new(labels: Vec<u8>) -> Result<Self> {
        if let Some(bad) = labels.iter().position(|&l| l > 1) {
            return Err(Error::validation(format!(
                "label at vertex {bad} is {}, expected 0 or 1",
                labels[bad]
            )));
        }
        Ok(VertexLabels {
            domain_size: labels.len(),
            labels,
        })
    }

    pub fn zeros(domain_size: usize) -> Self {
        VertexLabels {
            domain_size,
            labels: vec![0; domain_size],
        }
    }

    pub fn from_indices(domain_size: usize, indices: &[usize]) -> Result<Self> {
        let mut labels = vec![0u8; domain_size];
        for &i in indices {
            if i >= domain_size {
                return Err(Error::validation(format!(
                    "label index {i} out of range for domain size {domain_size}"
                )));
            }
            labels[i] = 1;
        }
        Ok(VertexLabels {
            domain_size,
            labels,
        })
    }

    /// Re-checks invariants after deserialization.
    pub fn validate(&self) -> Result<()> {
        if self.labels.len() != self.domain_size {
            return Err(Error::validation(format!(
                "labels length {} does not match domain_size {}",
                self.labels.len(),
                self.domain_size
            )));
        }
        if self.labels.iter().any(|&l| l > 1) {
            return Err(Error::validation("labels must be 0 or 1"));
        }
        Ok(())
    }

    pub fn domain_size(&self) -> usize {
        self.domain_size
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.labels
    }

    pub fn get(&self, i: usize) -> u8 {
        self.labels[i]
    }

    pub fn count_positive(&self) -> usize {
        self.labels.iter().filter(|&&l| l == 1).count()
    }

    pub fn positive_indices(&self) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == 1)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn as_f64_vec(&self) -> Vec<f64> {
        self.labels.iter().map(|&l| l as f64).collect()
    }
}

pub fn save_labels(labels: &VertexLabels, path: &Path) -> Result<()> {
    let json = serde_json::to_string_pretty(labels)
        .map_err(|e| Error::validation(format!("label serialization failed: {e}")))?;
    fs::write(path, json).map_err(|e| Error::io(path, e))
}

pub fn load_labels(path: &Path) -> Result<VertexLabels> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let labels: VertexLabels =
        serde_json::from_str(&text).map_err(|e| Error::format(path, e.to_string()))?;
    labels.validate()?;
    Ok(labels)
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    n_phases: usize,
    #[serde(default)]
    ed_phase: usize,
    vertex_files: Vec<String>,
    face_file: String,
    class_file: String,
}

/// Loads a mesh sequence from a JSON manifest. Paths inside the manifest are
/// resolved relative to the manifest's directory.
pub fn load_mesh_sequence(manifest_path: &Path) -> Result<MeshSequence> {
    let text = fs::read_to_string(manifest_path).map_err(|e| Error::io(manifest_path, e))?;
    let manifest: Manifest =
        serde_json::from_str(&text).map_err(|e| Error::format(manifest_path, e.to_string()))?;
    if manifest.vertex_files.len() != manifest.n_phases {
        return Err(Error::format(
            manifest_path,
            format!(
                "n_phases is {} but {} vertex files are listed",
                manifest.n_phases,
                manifest.vertex_files.len()
            ),
        ));
    }
    let base = manifest_path.parent().unwrap_or_else(|| Path::new("."));
    let mut phases = Vec::with_capacity(manifest.n_phases);
    for file in &manifest.vertex_files {
        phases.push(read_vertex_file(&base.join(file))?);
    }
    let face_list = read_face_file(&base.join(&manifest.face_file))?;
    let vertex_class = read_class_file(&base.join(&manifest.class_file))?;
    MeshSequence::new(phases, face_list, vertex_class, manifest.ed_phase)
}

/// Writes a mesh sequence into `dir` in the manifest format and returns the
/// manifest path. Coordinates are serialized with 6 decimal places.
pub fn write_mesh_sequence(mesh: &MeshSequence, dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut vertex_files = Vec::with_capacity(mesh.n_phases());
    for (i, phase) in mesh.phases.iter().enumerate() {
        let name = format!("phase_{i:03}.txt");
        let mut out = String::with_capacity(phase.positions.len() * 40);
        for p in &phase.positions {
            out.push_str(&format!("{:.6} {:.6} {:.6}\n", p[0], p[1], p[2]));
        }
        let path = dir.join(&name);
        fs::write(&path, out).map_err(|e| Error::io(&path, e))?;
        vertex_files.push(name);
    }
    let mut faces_out = String::new();
    for f in mesh.faces() {
        faces_out.push_str(&format!("{} {} {}\n", f[0], f[1], f[2]));
    }
    let faces_path = dir.join("faces.txt");
    fs::write(&faces_path, faces_out).map_err(|e| Error::io(&faces_path, e))?;
    let mut classes_out = String::new();
    for c in mesh.classes() {
        classes_out.push_str(c.tag());
        classes_out.push('\n');
    }
    let classes_path = dir.join("classes.txt");
    fs::write(&classes_path, classes_out).map_err(|e| Error::io(&classes_path, e))?;
    let manifest = Manifest {
        n_phases: mesh.n_phases(),
        ed_phase: mesh.ed_phase(),
        vertex_files,
        face_file: "faces.txt".into(),
        class_file: "classes.txt".into(),
    };
    let manifest_path = dir.join("manifest.json");
    let json = serde_json::to_string_pretty(&manifest)
        .map_err(|e| Error::validation(format!("manifest serialization failed: {e}")))?;
    fs::write(&manifest_path, json).map_err(|e| Error::io(&manifest_path, e))?;
    Ok(manifest_path)
}

fn read_vertex_file(path: &Path) -> Result<Surface> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut positions = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut coords = [0.0f64; 3];
        let mut parts = line.split_whitespace();
        for c in &mut coords {
            let tok = parts.next().ok_or_else(|| {
                Error::format(path, format!("line {}: expected 3 coordinates", ln + 1))
            })?;
            *c = tok.parse().map_err(|_| {
                Error::format(path, format!("line {}: invalid coordinate '{tok}'", ln + 1))
            })?;
            if !c.is_finite() {
                return Err(Error::format(
                    path,
                    format!("line {}: non-finite coordinate", ln + 1),
                ));
            }
        }
        if parts.next().is_some() {
            return Err(Error::format(
                path,
                format!("line {}: expected exactly 3 coordinates", ln + 1),
            ));
        }
        positions.push(coords);
    }
    Ok(Surface { positions })
}

fn read_face_file(path: &Path) -> Result<Vec<[u32; 3]>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut faces = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut idx = [0u32; 3];
        let mut parts = line.split_whitespace();
        for v in &mut idx {
            let tok = parts.next().ok_or_else(|| {
                Error::format(path, format!("line {}: expected 3 vertex indices", ln + 1))
            })?;
            *v = tok.parse().map_err(|_| {
                Error::format(path, format!("line {}: invalid vertex index '{tok}'", ln + 1))
            })?;
        }
        if parts.next().is_some() {
            return Err(Error::format(
                path,
                format!("line {}: expected exactly 3 vertex indices", ln + 1),
            ));
        }
        faces.push(idx);
    }
    Ok(faces)
}

fn read_class_file(path: &Path) -> Result<Vec<VertexClass>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut classes = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let class = VertexClass::parse_tag(line).ok_or_else(|| {
            Error::format(
                path,
                format!("line {}: unknown vertex class tag '{line}'", ln + 1),
            )
        })?;
        classes.push(class);
    }
    Ok(classes)
}

/// Exports the endocardial submesh at `phase` as an ASCII VTK polydata file
/// with a per-vertex integer attribute named `infarct`. Coordinates are
/// written with 6 decimal places; the file round-trips losslessly through
/// [`load_labeled_surface`].
pub fn save_labeled_surface(
    mesh: &MeshSequence,
    phase: usize,
    labels: &VertexLabels,
    out_path: &Path,
) -> Result<()> {
    if phase >= mesh.n_phases() {
        return Err(Error::validation(format!(
            "phase {phase} out of range for {} phases",
            mesh.n_phases()
        )));
    }
    let endo: Vec<u32> = mesh
        .classes()
        .iter()
        .enumerate()
        .filter(|(_, c)| **c == VertexClass::LvEndo)
        .map(|(i, _)| i as u32)
        .collect();
    if labels.domain_size() != endo.len() {
        return Err(Error::shape(
            "save_labeled_surface",
            format!("{} labels (endocardial vertex count)", endo.len()),
            format!("{}", labels.domain_size()),
        ));
    }
    let mut local = vec![u32::MAX; mesh.vertex_count()];
    for (li, &gi) in endo.iter().enumerate() {
        local[gi as usize] = li as u32;
    }
    let faces: Vec<[u32; 3]> = mesh
        .faces()
        .iter()
        .filter(|f| f.iter().all(|&v| local[v as usize] != u32::MAX))
        .map(|f| [local[f[0] as usize], local[f[1] as usize], local[f[2] as usize]])
        .collect();
    let surf = mesh.phase(phase);
    let mut out = String::new();
    out.push_str("# vtk DataFile Version 3.0\n");
    out.push_str("LV endocardium with infarct labels\n");
    out.push_str("ASCII\nDATASET POLYDATA\n");
    out.push_str(&format!("POINTS {} double\n", endo.len()));
    for &gi in &endo {
        let p = surf.positions[gi as usize];
        out.push_str(&format!("{:.6} {:.6} {:.6}\n", p[0], p[1], p[2]));
    }
    out.push_str(&format!("POLYGONS {} {}\n", faces.len(), faces.len() * 4));
    for f in &faces {
        out.push_str(&format!("3 {} {} {}\n", f[0], f[1], f[2]));
    }
    out.push_str(&format!("POINT_DATA {}\n", endo.len()));
    out.push_str("SCALARS infarct int 1\nLOOKUP_TABLE default\n");
    for i in 0..endo.len() {
        out.push_str(&format!("{}\n", labels.get(i)));
    }
    let mut file = fs::File::create(out_path).map_err(|e| Error::io(out_path, e))?;
    file.write_all(out.as_bytes())
        .map_err(|e| Error::io(out_path, e))
}

/// Reads back a file written by [`save_labeled_surface`]: positions, faces
/// and the `infarct` labels.
pub fn load_labeled_surface(path: &Path) -> Result<(Vec<[f64; 3]>, Vec<[u32; 3]>, VertexLabels)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    let bad = |detail: &str| Error::format(path, detail.to_string());
    for expect in ["# vtk DataFile Version 3.0", "", "ASCII", "DATASET POLYDATA"] {
        let line = lines.next().ok_or_else(|| bad("truncated header"))?;
        if !expect.is_empty() && line != expect {
            return Err(bad(&format!("unexpected header line '{line}'")));
        }
    }
    let points_line = lines.next().ok_or_else(|| bad("missing POINTS"))?;
    let n: usize = points_line
        .strip_prefix("POINTS ")
        .and_then(|s| s.strip_suffix(" double"))
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| bad("invalid POINTS line"))?;
    let mut positions = Vec::with_capacity(n);
    for _ in 0..n {
        let line = lines.next().ok_or_else(|| bad("truncated POINTS"))?;
        let mut it = line.split_whitespace();
        let mut p = [0.0f64; 3];
        for c in &mut p {
            *c = it
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| bad("invalid point record"))?;
        }
        positions.push(p);
    }
    let poly_line = lines.next().ok_or_else(|| bad("missing POLYGONS"))?;
    let m: usize = poly_line
        .strip_prefix("POLYGONS ")
        .and_then(|s| s.split_whitespace().next())
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| bad("invalid POLYGONS line"))?;
    let mut faces = Vec::with_capacity(m);
    for _ in 0..m {
        let line = lines.next().ok_or_else(|| bad("truncated POLYGONS"))?;
        let mut it = line.split_whitespace();
        if it.next() != Some("3") {
            return Err(bad("only triangle polygons are supported"));
        }
        let mut f = [0u32; 3];
        for v in &mut f {
            *v = it
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| bad("invalid polygon record"))?;
        }
        faces.push(f);
    }
    for expect in [
        format!("POINT_DATA {n}"),
        "SCALARS infarct int 1".to_string(),
        "LOOKUP_TABLE default".to_string(),
    ] {
        let line = lines.next().ok_or_else(|| bad("truncated attributes"))?;
        if line != expect {
            return Err(bad(&format!(
                "unexpected attribute line '{line}', expected '{expect}'"
            )));
        }
    }
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let line = lines.next().ok_or_else(|| bad("truncated labels"))?;
        let l: u8 = line
            .trim()
            .parse()
            .map_err(|_| bad("invalid label record"))?;
        labels.push(l);
    }
    Ok((positions, faces, VertexLabels::new(labels)?))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use tempfile::tempdir;

    /// Two stacked triangles sharing an edge: 4 endo vertices, plus one epi
    /// vertex and one RV vertex. Valid for every mesh invariant.
    pub(crate) fn tiny_mesh(n_phases: usize) -> MeshSequence {
        let base = vec![
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [1.0, 1.0, 0.0],
            [0.5, 0.5, 5.0],  // epi
            [3.0, 0.0, 0.0],  // rv
        ];
        let phases = (0..n_phases)
            .map(|t| Surface {
                positions: base
                    .iter()
                    .map(|p| [p[0], p[1], p[2] + t as f64])
                    .collect(),
            })
            .collect();
        let faces = vec![[0, 1, 2], [1, 3, 2], [1, 4, 3], [1, 5, 4]];
        let classes = vec![
            VertexClass::LvEndo,
            VertexClass::LvEndo,
            VertexClass::LvEndo,
            VertexClass::LvEndo,
            VertexClass::LvEpi,
            VertexClass::Rv,
        ];
        MeshSequence::new(phases, faces, classes, 0).unwrap()
    }

    #[test]
    fn rejects_single_phase() {
        let mesh = tiny_mesh(2);
        let err = MeshSequence::new(
            vec![mesh.phase(0).clone()],
            mesh.faces().to_vec(),
            mesh.classes().to_vec(),
            0,
        )
        .unwrap_err();
        assert!(err.to_string().contains("N >= 2"), "{err}");
    }

    #[test]
    fn rejects_vertex_count_mismatch() {
        let mesh = tiny_mesh(2);
        let mut short = mesh.phase(1).clone();
        short.positions.pop();
        let err = MeshSequence::new(
            vec![mesh.phase(0).clone(), short],
            mesh.faces().to_vec(),
            mesh.classes().to_vec(),
            0,
        )
        .unwrap_err();
        assert!(err.to_string().contains("phase 1"), "{err}");
    }

    #[test]
    fn rejects_out_of_range_face() {
        let mesh = tiny_mesh(2);
        let mut faces = mesh.faces().to_vec();
        faces.push([0, 1, mesh.vertex_count() as u32]);
        let err = MeshSequence::new(
            vec![mesh.phase(0).clone(), mesh.phase(1).clone()],
            faces,
            mesh.classes().to_vec(),
            0,
        )
        .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("face 4") && msg.contains("vertex 6"), "{msg}");
    }

    #[test]
    fn extract_hybrid_partitions_lv_classes() {
        let mesh = tiny_mesh(3);
        let hybrid = extract_hybrid_input(&mesh).unwrap();
        assert_eq!(hybrid.endo_vertices, vec![0, 1, 2, 3]);
        assert_eq!(hybrid.epi_points, vec![4]);
        // Faces touching the epi or RV vertex are dropped; survivors reindexed.
        assert_eq!(hybrid.endo_faces, vec![[0, 1, 2], [1, 3, 2]]);
    }

    #[test]
    fn extract_hybrid_requires_epicardium() {
        let mesh = tiny_mesh(2);
        let mut classes = mesh.classes().to_vec();
        classes[4] = VertexClass::Other;
        let mesh = MeshSequence::new(
            vec![mesh.phase(0).clone(), mesh.phase(1).clone()],
            mesh.faces().to_vec(),
            classes,
            0,
        )
        .unwrap();
        assert!(extract_hybrid_input(&mesh).is_err());
    }

    #[test]
    fn extract_hybrid_is_idempotent() {
        let mesh = tiny_mesh(2);
        let a = extract_hybrid_input(&mesh).unwrap();
        let b = extract_hybrid_input(&mesh).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn manifest_round_trip() {
        let mesh = tiny_mesh(3);
        let dir = tempdir().unwrap();
        let manifest = write_mesh_sequence(&mesh, dir.path()).unwrap();
        let loaded = load_mesh_sequence(&manifest).unwrap();
        assert_eq!(loaded, mesh); // coordinates here are exact at 6 decimals
    }

    #[test]
    fn manifest_rejects_unknown_class_tag() {
        let mesh = tiny_mesh(2);
        let dir = tempdir().unwrap();
        let manifest = write_mesh_sequence(&mesh, dir.path()).unwrap();
        fs::write(dir.path().join("classes.txt"), "LV_ENDO\nBOGUS\n").unwrap();
        let err = load_mesh_sequence(&manifest).unwrap_err();
        assert!(err.to_string().contains("BOGUS"), "{err}");
    }

    #[test]
    fn labeled_surface_round_trip_is_bit_exact() {
        let mesh = tiny_mesh(2);
        let labels = VertexLabels::new(vec![0, 1, 1, 0]).unwrap();
        let dir = tempdir().unwrap();
        let path = dir.path().join("surface.vtk");
        save_labeled_surface(&mesh, 0, &labels, &path).unwrap();
        let (positions, faces, loaded) = load_labeled_surface(&path).unwrap();
        assert_eq!(loaded, labels);
        assert_eq!(faces, vec![[0, 1, 2], [1, 3, 2]]);
        assert_eq!(positions.len(), 4);

        // Writing the parsed data again must reproduce the file byte for byte.
        let first = fs::read(&path).unwrap();
        let phases = vec![
            Surface {
                positions: positions.clone(),
            },
            Surface {
                positions: positions.clone(),
            },
        ];
        let classes = vec![VertexClass::LvEndo; 4];
        let remesh = MeshSequence::new(phases, faces, classes, 0).unwrap();
        let path2 = dir.path().join("surface2.vtk");
        save_labeled_surface(&remesh, 0, &loaded, &path2).unwrap();
        assert_eq!(first, fs::read(&path2).unwrap());
    }

    #[test]
    fn labeled_surface_size_mismatch() {
        let mesh = tiny_mesh(2);
        let labels = VertexLabels::new(vec![0, 1]).unwrap();
        let dir = tempdir().unwrap();
        let err = save_labeled_surface(&mesh, 0, &labels, &dir.path().join("s.vtk")).unwrap_err();
        assert!(matches!(err, Error::Shape { .. }));
    }

    #[test]
    fn all_zero_labels_export() {
        let mesh = tiny_mesh(2);
        let labels = VertexLabels::zeros(4);
        let dir = tempdir().unwrap();
        let path = dir.path().join("zero.vtk");
        save_labeled_surface(&mesh, 0, &labels, &path).unwrap();
        let (_, _, loaded) = load_labeled_surface(&path).unwrap();
        assert_eq!(loaded.count_positive(), 0);
    }

    #[test]
    fn labels_reject_non_binary() {
        assert!(VertexLabels::new(vec![0, 2]).is_err());
    }
}
