//! Three-dimensional displacement ansatz
//! `u(h, y, h zeta) = h^{-3/2} sum_{p <= 2} h^p W^p(zeta, grad) w(y)` and its export.

use crate::error::{Error, Result};
use crate::extension::{ModelSolution, RegularSolution};
use crate::fem2d::Mesh;
use crate::jet::Jet;
use crate::material::ReducedModel;
use crate::par;
use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;
use std::sync::Arc;

/// Highest order of the ansatz that is reconstructed.
pub const P_MAX: usize = 2;

/// Plate field whose derivatives up to order two can be evaluated.
pub trait AnsatzSource: Sync {
    fn jet(&self, y: [f64; 2]) -> Result<Jet>;
    fn tag(&self) -> &str;
    fn is_singular(&self) -> bool {
        false
    }
}

impl AnsatzSource for RegularSolution {
    fn jet(&self, y: [f64; 2]) -> Result<Jet> {
        RegularSolution::jet(self, y)
    }
    fn tag(&self) -> &str {
        "regular"
    }
}

impl AnsatzSource for ModelSolution {
    fn jet(&self, y: [f64; 2]) -> Result<Jet> {
        ModelSolution::jet(self, y)
    }
    fn tag(&self) -> &str {
        "singular"
    }
    fn is_singular(&self) -> bool {
        true
    }
}

/// Field given by a closure; used for synthetic inputs.
pub struct FnSource<F: Fn([f64; 2]) -> Jet + Sync> {
    pub f: F,
    pub tag: String,
}

impl<F: Fn([f64; 2]) -> Jet + Sync> AnsatzSource for FnSource<F> {
    fn jet(&self, y: [f64; 2]) -> Result<Jet> {
        Ok((self.f)(y))
    }
    fn tag(&self) -> &str {
        &self.tag
    }
}

/// In-plane points times scaled transverse coordinates `zeta` in `(-1/2, 1/2)`.
#[derive(Debug, Clone)]
pub struct SampleGrid {
    pub points: Vec<[f64; 2]>,
    pub zetas: Vec<f64>,
}

impl SampleGrid {
    /// Regular `n x n` grid on a box, with `nz` transverse levels.
    pub fn boxed(lo: [f64; 2], hi: [f64; 2], n: usize, nz: usize) -> Self {
        let lin = |a: f64, b: f64, k: usize, m: usize| if m == 1 { 0.5 * (a + b) } else { a + (b - a) * k as f64 / (m - 1) as f64 };
        let mut points = Vec::with_capacity(n * n);
        for j in 0..n {
            for i in 0..n {
                points.push([lin(lo[0], hi[0], i, n), lin(lo[1], hi[1], j, n)]);
            }
        }
        let zetas = (0..nz).map(|k| (k as f64 + 0.5) / nz as f64 - 0.5).collect();
        Self { points, zetas }
    }
}

/// Regions where the outer ansatz is not sampled.
#[derive(Debug, Clone)]
pub struct Exclusions {
    pub origin: [f64; 2],
    pub origin_radius: f64,
    /// Mesh whose boundary edges define the boundary layer, and its width.
    pub boundary: Option<(Arc<Mesh>, f64)>,
}

impl Exclusions {
    /// `5h` around the support point for singular fields and one mesh cell at the edge.
    pub fn defaults(mesh: &Arc<Mesh>, h: f64, singular: bool) -> Self {
        Self {
            origin: mesh.origin(),
            origin_radius: if singular { 5.0 * h } else { 0.0 },
            boundary: Some((mesh.clone(), mesh.max_edge_length())),
        }
    }

    pub fn none() -> Self {
        Self { origin: [0.0, 0.0], origin_radius: 0.0, boundary: None }
    }

    fn excludes(&self, y: [f64; 2]) -> bool {
        let d = ((y[0] - self.origin[0]).powi(2) + (y[1] - self.origin[1]).powi(2)).sqrt();
        if d < self.origin_radius {
            return true;
        }
        match &self.boundary {
            Some((mesh, width)) => boundary_distance(mesh, y) < *width,
            None => false,
        }
    }
}

fn boundary_distance(mesh: &Mesh, y: [f64; 2]) -> f64 {
    let mut best = f64::INFINITY;
    for (e, &b) in mesh.boundary_edge.iter().enumerate() {
        if !b {
            continue;
        }
        let [i, j] = mesh.edges[e];
        let (p, q) = (mesh.vertices[i], mesh.vertices[j]);
        let d = [q[0] - p[0], q[1] - p[1]];
        let len2 = d[0] * d[0] + d[1] * d[1];
        let t = (((y[0] - p[0]) * d[0] + (y[1] - p[1]) * d[1]) / len2).clamp(0.0, 1.0);
        let c = [p[0] + t * d[0] - y[0], p[1] + t * d[1] - y[1]];
        best = best.min((c[0] * c[0] + c[1] * c[1]).sqrt());
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub y: [f64; 2],
    pub z: f64,
    pub u: [f64; 3],
}

#[derive(Debug, Clone)]
pub struct AnsatzField {
    pub samples: Vec<Sample>,
    pub generator: String,
    pub p_max: usize,
    pub h: f64,
    pub origin_radius: f64,
    pub boundary_width: f64,
    /// Grid points dropped by the exclusions.
    pub skipped: usize,
}

pub fn displacement_ansatz(
    source: &dyn AnsatzSource,
    reduced: &ReducedModel,
    h: f64,
    grid: &SampleGrid,
    exclusions: &Exclusions,
) -> Result<AnsatzField> {
    if !(h > 0.0 && h < 1.0) {
        return Err(Error::InvalidInput(format!("thickness parameter h = {h} must lie in (0, 1)")));
    }
    if grid.zetas.iter().any(|z| !(z.abs() < 0.5)) {
        return Err(Error::InvalidInput("transverse samples must satisfy |zeta| < 1/2".into()));
    }
    let kept: Vec<[f64; 2]> = grid.points.iter().copied().filter(|&y| !exclusions.excludes(y)).collect();
    let skipped = grid.points.len() - kept.len();
    let scale = h.powf(-1.5);
    let per_point = par::map(&kept, |&y| -> Result<Vec<Sample>> {
        let jet = source.jet(y)?;
        Ok(grid
            .zetas
            .iter()
            .map(|&zeta| {
                let mut u = nalgebra::Vector3::zeros();
                for (p, op) in reduced.w_ops.iter().enumerate().take(P_MAX + 1) {
                    u += op.apply(zeta, &jet) * h.powi(p as i32);
                }
                u *= scale;
                Sample { y, z: h * zeta, u: [u[0], u[1], u[2]] }
            })
            .collect())
    });
    let mut samples = Vec::with_capacity(kept.len() * grid.zetas.len());
    for s in per_point {
        samples.extend(s?);
    }
    Ok(AnsatzField {
        samples,
        generator: source.tag().to_string(),
        p_max: P_MAX,
        h,
        origin_radius: exclusions.origin_radius,
        boundary_width: exclusions.boundary.as_ref().map_or(0.0, |b| b.1),
        skipped,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Csv,
    Vtk,
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes the field as CSV (`y1,y2,z,u1,u2,u3,generator_tag`) or legacy ASCII VTK polydata.
pub fn export(field: &AnsatzField, format: ExportFormat, path: &Path) -> Result<()> {
    let text = render(field, format)?;
    let mut f = std::fs::File::create(path)?;
    f.write_all(text.as_bytes())?;
    Ok(())
}

pub fn render(field: &AnsatzField, format: ExportFormat) -> Result<String> {
    if field.samples.is_empty() {
        return Err(Error::InvalidInput("cannot export an empty field".into()));
    }
    let mut out = String::new();
    match format {
        ExportFormat::Csv => {
            out.push_str("y1,y2,z,u1,u2,u3,generator_tag\n");
            for s in &field.samples {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    num(s.y[0]),
                    num(s.y[1]),
                    num(s.z),
                    num(s.u[0]),
                    num(s.u[1]),
                    num(s.u[2]),
                    field.generator
                );
            }
        }
        ExportFormat::Vtk => {
            let n = field.samples.len();
            out.push_str("# vtk DataFile Version 3.0\n");
            let _ = writeln!(out, "thinplate displacement ansatz ({}, h = {})", field.generator, num(field.h));
            out.push_str("ASCII\nDATASET POLYDATA\n");
            let _ = writeln!(out, "POINTS {n} double");
            for s in &field.samples {
                let _ = writeln!(out, "{} {} {}", num(s.y[0]), num(s.y[1]), num(s.z));
            }
            let _ = writeln!(out, "VERTICES {n} {}", 2 * n);
            for i in 0..n {
                let _ = writeln!(out, "1 {i}");
            }
            let _ = writeln!(out, "POINT_DATA {n}");
            out.push_str("VECTORS displacement double\n");
            for s in &field.samples {
                let _ = writeln!(out, "{} {} {}", num(s.u[0]), num(s.u[1]), num(s.u[2]));
            }
        }
    }
    Ok(out)
}

/// Reads samples back from the CSV export.
pub fn read_csv<R: std::io::Read>(r: R) -> Result<Vec<(Sample, String)>> {
    let mut rdr = csv::Reader::from_reader(r);
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Format(e.to_string()))?;
        if rec.len() != 7 {
            return Err(Error::Format(format!("expected 7 columns, found {}", rec.len())));
        }
        let v: Vec<f64> = (0..6)
            .map(|i| rec[i].parse::<f64>().map_err(|e| Error::Format(format!("column {i}: {e}"))))
            .collect::<Result<_>>()?;
        out.push((Sample { y: [v[0], v[1]], z: v[2], u: [v[3], v[4], v[5]] }, rec[6].to_string()));
    }
    Ok(out)
}

/// Reads points and displacement vectors from a legacy ASCII VTK polydata file.
pub fn read_vtk<R: BufRead>(r: R) -> Result<Vec<Sample>> {
    let lines: Vec<String> = r.lines().collect::<std::io::Result<_>>()?;
    let bad = |m: &str| Error::Format(format!("vtk: {m}"));
    if !lines.first().is_some_and(|l| l.starts_with("# vtk DataFile")) {
        return Err(bad("missing header"));
    }
    if lines.get(2).map(|l| l.trim()) != Some("ASCII") || lines.get(3).map(|l| l.trim()) != Some("DATASET POLYDATA") {
        return Err(bad("expected ASCII POLYDATA"));
    }
    let find = |key: &str| lines.iter().position(|l| l.starts_with(key)).ok_or_else(|| bad(&format!("missing {key}")));
    let pi = find("POINTS")?;
    let n: usize = lines[pi].split_whitespace().nth(1).and_then(|s| s.parse().ok()).ok_or_else(|| bad("POINTS count"))?;
    let vi = find("VECTORS")?;
    let parse3 = |l: &str| -> Result<[f64; 3]> {
        let v: Vec<f64> = l.split_whitespace().map(|s| s.parse::<f64>()).collect::<std::result::Result<_, _>>().map_err(|e| bad(&e.to_string()))?;
        if v.len() != 3 {
            return Err(bad("expected 3 values per line"));
        }
        Ok([v[0], v[1], v[2]])
    };
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let p = parse3(lines.get(pi + 1 + k).ok_or_else(|| bad("truncated POINTS"))?)?;
        let u = parse3(lines.get(vi + 1 + k).ok_or_else(|| bad("truncated VECTORS"))?)?;
        out.push(Sample { y: [p[0], p[1]], z: p[2], u });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::make_isotropic;

    fn model() -> ReducedModel {
        ReducedModel::new(&make_isotropic(1.0, 0.7).unwrap()).unwrap()
    }

    fn constant_jet(c: [f64; 3]) -> impl Fn([f64; 2]) -> Jet + Sync {
        move |_| Jet { val: c, ..Jet::default() }
    }

    #[test]
    fn constant_deflection_gives_rigid_translation() {
        let src = FnSource { f: constant_jet([0.0, 0.0, 2.5]), tag: "synthetic".into() };
        let h = 0.01;
        let grid = SampleGrid::boxed([-0.5, -0.5], [0.5, 0.5], 3, 3);
        let f = displacement_ansatz(&src, &model(), h, &grid, &Exclusions::none()).unwrap();
        assert_eq!(f.samples.len(), 27);
        for s in &f.samples {
            assert!((s.u[2] - h.powf(-1.5) * 2.5).abs() < 1e-9 * h.powf(-1.5));
            assert_eq!(s.u[0], 0.0);
            assert_eq!(s.u[1], 0.0);
        }
    }

    #[test]
    fn constant_membrane_field_is_in_plane_translation() {
        let src = FnSource { f: constant_jet([0.3, -0.4, 0.0]), tag: "synthetic".into() };
        let h = 0.02;
        let grid = SampleGrid::boxed([-0.5, -0.5], [0.5, 0.5], 2, 3);
        let f = displacement_ansatz(&src, &model(), h, &grid, &Exclusions::none()).unwrap();
        for s in &f.samples {
            assert!((s.u[0] - 0.3 / h.sqrt()).abs() < 1e-12 / h.sqrt());
            assert!((s.u[1] + 0.4 / h.sqrt()).abs() < 1e-12 / h.sqrt());
            assert_eq!(s.u[2], 0.0);
        }
    }

    #[test]
    fn quadratic_deflection_matches_symbolic_ansatz() {
        let m = model();
        // w3 = y1^2: the second-order term is X(zeta) D(grad) w with X from the transverse profile.
        let src = FnSource {
            f: |y: [f64; 2]| {
                let mut j = Jet::default();
                j.val[2] = y[0] * y[0];
                j.grad[2] = [2.0 * y[0], 0.0];
                j.hess[2] = [[2.0, 0.0], [0.0, 0.0]];
                j
            },
            tag: "synthetic".into(),
        };
        let h = 0.05;
        let y = [0.3, -0.2];
        let grid = SampleGrid { points: vec![y], zetas: vec![-0.3, 0.0, 0.25] };
        let f = displacement_ansatz(&src, &m, h, &grid, &Exclusions::none()).unwrap();
        for s in &f.samples {
            let zeta = s.z / h;
            // D(grad)w = (0, 0, 0, sqrt2, 0, 0) for w3 = y1^2.
            let d = nalgebra::Vector6::new(0.0, 0.0, 0.0, std::f64::consts::SQRT_2, 0.0, 0.0);
            let x = m.profile.eval(zeta) * d;
            let expected = [
                h.powf(-0.5) * (-zeta * 2.0 * y[0]) + h.sqrt() * x[0],
                h.sqrt() * x[1],
                h.powf(-1.5) * y[0] * y[0] + h.sqrt() * x[2],
            ];
            for c in 0..3 {
                assert!((s.u[c] - expected[c]).abs() < 1e-10 * (1.0 + expected[c].abs()), "{c} {} {}", s.u[c], expected[c]);
            }
        }
        // At the mid-plane the in-plane displacement is the W2 term alone.
        let mid = f.samples.iter().find(|s| s.z == 0.0).unwrap();
        let x = m.profile.eval(0.0) * nalgebra::Vector6::new(0.0, 0.0, 0.0, std::f64::consts::SQRT_2, 0.0, 0.0);
        assert!((mid.u[0] - h.sqrt() * x[0]).abs() < 1e-12);
    }

    #[test]
    fn exclusions_skip_points() {
        let src = FnSource { f: constant_jet([0.0, 0.0, 1.0]), tag: "synthetic".into() };
        let grid = SampleGrid { points: vec![[0.0, 0.0], [0.01, 0.0], [0.5, 0.5]], zetas: vec![0.0] };
        let ex = Exclusions { origin: [0.0, 0.0], origin_radius: 0.05, boundary: None };
        let f = displacement_ansatz(&src, &model(), 0.01, &grid, &ex).unwrap();
        assert_eq!(f.skipped, 2);
        assert_eq!(f.samples.len(), 1);
    }

    #[test]
    fn exports_round_trip() {
        let src = FnSource { f: |y: [f64; 2]| Jet { val: [y[0], 0.1 * y[1], y[0] * y[1]], ..Jet::default() }, tag: "synthetic".into() };
        let grid = SampleGrid::boxed([-0.3, -0.3], [0.3, 0.3], 4, 2);
        let f = displacement_ansatz(&src, &model(), 0.01, &grid, &Exclusions::none()).unwrap();
        let csv = render(&f, ExportFormat::Csv).unwrap();
        let back = read_csv(csv.as_bytes()).unwrap();
        assert_eq!(back.len(), f.samples.len());
        for ((s, tag), orig) in back.iter().zip(&f.samples) {
            assert_eq!(s, orig);
            assert_eq!(tag, "synthetic");
        }
        let vtk = render(&f, ExportFormat::Vtk).unwrap();
        let back = read_vtk(vtk.as_bytes()).unwrap();
        assert_eq!(back, f.samples);
        let one = AnsatzField { samples: vec![f.samples[0]], ..f.clone() };
        assert_eq!(render(&one, ExportFormat::Csv).unwrap().lines().count(), 2);
        let empty = AnsatzField { samples: vec![], ..f };
        assert!(render(&empty, ExportFormat::Csv).is_err());
        assert!(render(&empty, ExportFormat::Vtk).is_err());
    }
}
