use crate::config::{FieldFormat, HValue, RunConfig};
use nalgebra::{Matrix2, Matrix4, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use std::path::Path;
use std::sync::Arc;
use thinplate::error::{Error, Result};
use thinplate::extension::{
    green_form_check, model_solution, q_rhs, solve_regular, stationarity_check, sweep, CapacityInput, DiscreteFunctional,
    GreenFormSample, ModelSolution, Perturbation, PolyField, RegularSolution,
};
use thinplate::fem2d::{Domain, PlateSystem};
use thinplate::fundsol::SingularBasis;
use thinplate::green::{decay_diagnostic, green_bundle, GreenAnalysis, GreenBundle, IsotropicDiskGreen};
use thinplate::material::{ReducedLoad, ReducedModel};
use thinplate::poly::Poly2;
use thinplate::reconstruct::{displacement_ansatz, export, Exclusions, ExportFormat, SampleGrid};
use thinplate::report::{fmt_f64, rows, to_json};
use thinplate::tolerances;

/// Accumulates accuracy flags raised while a command runs.
#[derive(Debug, Default)]
pub struct Flags(pub Vec<String>);

impl Flags {
    fn check(&mut self, ok: bool, msg: impl FnOnce() -> String) -> &'static str {
        if ok {
            "ok"
        } else {
            let m = msg();
            log::warn!("{m}");
            self.0.push(m);
            "flagged"
        }
    }
}

fn vec4(v: &Vector4<f64>) -> [f64; 4] {
    [v[0], v[1], v[2], v[3]]
}

fn poly_terms(p: &Poly2) -> Value {
    json!(p.terms().iter().map(|&(i, j, c)| json!([i, j, c])).collect::<Vec<_>>())
}

pub fn write_json(dir: &Path, name: &str, value: &Value) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(name), to_json(value)?)?;
    Ok(())
}

pub fn reduce(cfg: &RunConfig, flags: &mut Flags) -> Result<(ReducedModel, Value)> {
    let a = cfg.stiffness()?;
    let reduced = ReducedModel::new(&a)?;
    let deviation = reduced.block_deviation();
    let residual = reduced.profile.residual(&a, &[-0.5, -0.25, 0.0, 0.25, 0.5]);
    let status = flags.check(deviation <= tolerances::PLATE_COEFFS_REL && residual <= tolerances::PROFILE_RESIDUAL, || {
        format!("material: block deviation {deviation:.3e}, profile residual {residual:.3e}")
    });
    let load = cfg.plate_load()?;
    let value = json!({
        "a0": rows(&reduced.a0),
        "plate_coefficients": rows(&reduced.cal_a),
        "profile_k": rows(reduced.profile.k()),
        "block_deviation": deviation,
        "profile_residual": residual,
        "load": {
            "g1": poly_terms(&load.g[0]),
            "g2": poly_terms(&load.g[1]),
            "g3": poly_terms(&load.g[2]),
            "g3_grad": [poly_terms(&load.g3_grad[0]), poly_terms(&load.g3_grad[1])],
        },
        "status": status,
    });
    Ok((reduced, value))
}

pub fn fundamental(reduced: &ReducedModel, flags: &mut Flags) -> Result<(Arc<SingularBasis>, Value)> {
    let basis = SingularBasis::new(&reduced.a0)?;
    let radii = [0.5, 1.0, 2.0];
    let mut err: f64 = 0.0;
    for &r in &radii {
        err = err.max((basis.inplane_flux(r, 256) - Matrix2::identity()).amax());
        err = err.max((basis.bending_flux(r, 256) - 1.0).abs());
    }
    let status = flags.check(err <= tolerances::FLUX, || format!("fundamental: flux identity error {err:.3e}"));
    let value = json!({
        "summary": basis.summary(),
        "flux_radii": radii,
        "flux_error": err,
        "status": status,
    });
    Ok((Arc::new(basis), value))
}

/// Everything computed up to and including the regular solution.
pub struct Solved {
    pub reduced: ReducedModel,
    pub load: ReducedLoad,
    pub capacity: CapacityInput,
    pub systems: Vec<PlateSystem>,
    pub bundle: Arc<GreenBundle>,
    pub cal_g: Matrix4<f64>,
    pub regular: Arc<RegularSolution>,
    pub h_values: Vec<HValue>,
    pub report: serde_json::Map<String, Value>,
}

impl Solved {
    pub fn finest_system(&self) -> &PlateSystem {
        self.systems.last().expect("at least one mesh level")
    }

    pub fn model(&self, ln_h_abs: f64) -> Result<ModelSolution> {
        model_solution(
            self.regular.clone(),
            &self.load,
            self.bundle.clone(),
            &self.bundle.basis.psi4,
            &self.capacity,
            &self.cal_g,
            ln_h_abs,
        )
    }
}

fn decay_radii(finest_h: f64) -> Vec<f64> {
    [8.0, 4.0, 2.0, 1.0].iter().map(|k| k * finest_h).collect()
}

/// Runs material, fundamental solutions, meshes, Green functions and the regular solve.
pub fn solve_stages(cfg: &RunConfig, flags: &mut Flags) -> Result<Solved> {
    let capacity = cfg.capacity()?;
    let load = cfg.plate_load()?;
    let h_values = cfg.h_values()?;
    let (reduced, material) = reduce(cfg, flags)?;
    let (basis, fund) = fundamental(&reduced, flags)?;

    let sizes = cfg.mesh_sizes();
    let systems: Vec<PlateSystem> = sizes.iter().map(|&h| PlateSystem::build(&cfg.domain, h, &reduced.a0)).collect::<Result<_>>()?;
    let mesh_report: Vec<Value> = systems
        .iter()
        .zip(&sizes)
        .map(|(s, h)| {
            json!({
                "target_h": h,
                "vertices": s.mesh.num_vertices(),
                "triangles": s.mesh.num_triangles(),
                "max_edge_length": s.mesh.max_edge_length(),
                "min_angle_degrees": s.mesh.min_angle_degrees(),
            })
        })
        .collect();
    let mut bundles: Vec<GreenBundle> = systems.iter().map(|s| green_bundle(s, &basis)).collect::<Result<_>>()?;

    let regulars: Vec<RegularSolution> =
        systems.iter().zip(&bundles).map(|(s, b)| solve_regular(s, &load, b)).collect::<Result<_>>()?;
    let gaps: Vec<f64> = regulars.iter().map(RegularSolution::route_gap).collect();
    let finest_gap = *gaps.last().expect("at least one level");
    let decreasing = gaps.windows(2).all(|w| w[1] <= w[0]);
    let route_status = flags.check(finest_gap <= tolerances::F_ROUTE_MAX && decreasing, || {
        format!("regular: data-column route gaps {gaps:?} are not small and decreasing")
    });
    let regular = Arc::new(regulars.into_iter().last().expect("at least one level"));

    let (green_value, bundle, cal_g) = if bundles.len() >= 3 {
        let finest3 = bundles.split_off(bundles.len() - 3);
        let an = GreenAnalysis::new(finest3)?;
        flags.check(!an.flagged, || format!("green: calG asymmetry {:.3e} on the finest mesh", an.asymmetry[2]));
        (serde_json::to_value(an.summary()).map_err(|e| Error::Format(e.to_string()))?, Arc::new(an.finest().clone()), an.cal_g_symmetric())
    } else {
        flags.check(false, || format!("green: {} mesh level(s); Richardson extrapolation needs three", bundles.len()));
        let b = bundles.pop().expect("at least one level");
        let v = json!({
            "cal_g": rows(&b.cal_g),
            "asymmetry": [b.asymmetry()],
            "g3_center": b.g3_center,
            "status": "flagged",
        });
        let cal_g = (b.cal_g + b.cal_g.transpose()) * 0.5;
        (v, Arc::new(b), cal_g)
    };

    let mut green = serde_json::Map::new();
    green.insert("analysis".into(), green_value);
    if cfg.verify.decay {
        let finest_h = *sizes.last().expect("at least one level");
        match decay_diagnostic(&bundle, &decay_radii(finest_h)) {
            Ok(rep) => {
                // The rates are upper bounds on the remainder; symmetric configurations decay faster.
                let ok = rep.membrane_rate >= 0.7 && rep.bending_rate >= 1.7 && !rep.resolution_warning;
                let st = flags.check(ok, || {
                    format!("green: remainder decay rates {:.3} (membrane), {:.3} (bending)", rep.membrane_rate, rep.bending_rate)
                });
                green.insert("decay".into(), json!({ "report": rep, "status": st }));
            }
            Err(e) => {
                flags.check(false, || format!("green: decay diagnostic failed: {e}"));
                green.insert("decay".into(), json!({ "error": e.to_string(), "status": "flagged" }));
            }
        }
    }

    let mut report = serde_json::Map::new();
    report.insert("material".into(), material);
    report.insert("fundamental".into(), fund);
    report.insert("mesh".into(), json!(mesh_report));
    report.insert("green".into(), Value::Object(green));
    report.insert(
        "regular".into(),
        json!({
            "f_point": vec4(&regular.f_point),
            "f_green": vec4(&regular.f_green),
            "f_scale": vec4(&regular.f_scale),
            "route_gap_levels": gaps,
            "energy": regular.energy,
            "strain_energy": regular.strain_energy,
            "load_work": regular.load_work,
            "status": route_status,
        }),
    );
    Ok(Solved { reduced, load, capacity, systems, bundle, cal_g, regular, h_values, report })
}

/// Model solutions for every configured `h`; `None` when the list is empty.
pub fn extension_stage(s: &Solved, flags: &mut Flags) -> Result<Option<(Vec<ModelSolution>, Value)>> {
    if s.h_values.is_empty() {
        return Ok(None);
    }
    let mut sols = Vec::new();
    let mut entries = Vec::new();
    for hv in &s.h_values {
        let sol = s.model(hv.ln_h_abs)?;
        let gap = sol.energy_identity_gap();
        let e = sol.energies;
        let positive = e.correction > 0.0 || (sol.f.amax() == 0.0 && e.correction == 0.0);
        let status = flags.check(gap <= tolerances::ENERGY_IDENTITY && positive, || {
            format!("extension: |ln h| = {}: identity gap {gap:.3e}, correction {:.3e}", hv.ln_h_abs, e.correction)
        });
        entries.push(json!({
            "h": hv.h,
            "ln_h_abs": hv.ln_h_abs,
            "f": vec4(&sol.f),
            "a": vec4(&sol.a),
            "m_sharp": rows(&sol.m_sharp),
            "condition": sol.condition,
            "energies": e,
            "energy_identity_gap": gap,
            "capacity_default": sol.capacity_default,
            "status": status,
        }));
        sols.push(sol);
    }
    Ok(Some((sols, json!(entries))))
}

fn domain_box(d: &Domain) -> ([f64; 2], [f64; 2]) {
    match d {
        Domain::Disk { radius } => ([-radius, -radius], [*radius, *radius]),
        Domain::Polygon { vertices } => {
            let mut lo = [f64::INFINITY; 2];
            let mut hi = [f64::NEG_INFINITY; 2];
            for v in vertices {
                for k in 0..2 {
                    lo[k] = lo[k].min(v[k]);
                    hi[k] = hi[k].max(v[k]);
                }
            }
            (lo, hi)
        }
    }
}

/// Samples the displacement ansatz of the first model solution and writes the configured formats.
pub fn reconstruction_stage(cfg: &RunConfig, s: &Solved, sols: &[ModelSolution], out: &Path) -> Result<Value> {
    let Some((hv, sol)) = s.h_values.iter().zip(sols).find(|(hv, _)| hv.h.is_some()) else {
        return Ok(json!({ "skipped": "no representable value of h" }));
    };
    let h = hv.h.expect("checked above");
    let mesh = &s.finest_system().mesh;
    let (lo, hi) = domain_box(&cfg.domain);
    let mut grid = SampleGrid::boxed(lo, hi, cfg.output.grid, cfg.output.zeta_levels);
    let total = grid.points.len();
    grid.points.retain(|&p| mesh.locate(p).is_ok());
    let outside = total - grid.points.len();
    let ex = Exclusions::defaults(mesh, h, true);
    let field = displacement_ansatz(sol, &s.reduced, h, &grid, &ex)?;
    std::fs::create_dir_all(out)?;
    let mut files = Vec::new();
    for f in &cfg.output.fields {
        let (fmt, name) = match f {
            FieldFormat::Csv => (ExportFormat::Csv, "field.csv"),
            FieldFormat::Vtk => (ExportFormat::Vtk, "field.vtk"),
        };
        export(&field, fmt, &out.join(name))?;
        files.push(name);
    }
    Ok(json!({
        "h": h,
        "generator": field.generator,
        "p_max": field.p_max,
        "samples": field.samples.len(),
        "skipped": field.skipped,
        "outside_domain": outside,
        "origin_exclusion_radius": field.origin_radius,
        "boundary_exclusion_width": field.boundary_width,
        "files": files,
    }))
}

pub fn finish(mut report: serde_json::Map<String, Value>, flags: &Flags) -> Value {
    report.insert("flags".into(), json!(flags.0));
    report.insert("status".into(), json!(if flags.0.is_empty() { "ok" } else { "flagged" }));
    Value::Object(report)
}

pub fn sweep_stage(s: &Solved, flags: &mut Flags, out: &Path) -> Result<Value> {
    let logs: Vec<f64> = s.h_values.iter().map(|h| h.ln_h_abs).collect();
    let rep = sweep(&s.bundle.basis.psi4, &s.capacity, &s.cal_g, &s.regular.f_point, s.regular.energy, &logs)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["h", "ln_h_abs", "a1", "a2", "a3", "a4", "correction", "total", "bound", "condition"])
        .map_err(|e| Error::Format(e.to_string()))?;
    for r in &rep.rows {
        let mut rec = vec![fmt_f64(r.h), fmt_f64(r.ln_h_abs)];
        rec.extend(r.a.iter().map(|&v| fmt_f64(v)));
        rec.extend([r.correction, r.total, r.bound, r.condition].map(fmt_f64));
        w.write_record(&rec).map_err(|e| Error::Format(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
    std::fs::create_dir_all(out)?;
    std::fs::write(out.join("sweep.csv"), bytes)?;
    let bounded = rep.bound_max.is_finite() && rep.bound_max <= 2.0 * rep.bound_min;
    let bound_status = flags.check(bounded, || {
        format!("sweep: |ln h|^2 |a - Psi^-1 F / |ln h|| varies from {:.3e} to {:.3e}", rep.bound_min, rep.bound_max)
    });
    let law = rep.correction_positive && rep.correction_scaled_spread <= 0.1;
    let law_status = flags.check(law, || {
        format!("sweep: correction |ln h| spread {:.3e} around its median", rep.correction_scaled_spread)
    });
    Ok(json!({ "report": rep, "bound_status": bound_status, "correction_law_status": law_status, "capacity_default": s.capacity.default_zero }))
}

fn random_poly(rng: &mut ChaCha8Rng, degree: u32) -> Poly2 {
    let mut t = Vec::new();
    for i in 0..=degree {
        for j in 0..=(degree - i) {
            t.push((i, j, rng.random_range(-1.0..1.0)));
        }
    }
    Poly2::from_terms(t)
}

/// Stationarity, the Green-formula mechanism and, on the isotropic unit disk, the closed-form Green formula.
pub fn verify_stage(cfg: &RunConfig, s: &Solved, seed: u64, flags: &mut Flags) -> Result<Value> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = serde_json::Map::new();

    let mut worst: f64 = 0.0;
    for _ in 0..cfg.verify.q_pairs {
        let mut sym = || {
            let b = Matrix4::from_fn(|_, _| rng.random_range(-1.0..1.0));
            (b + b.transpose()) * 0.5
        };
        let (m, g) = (sym(), sym());
        let aw = Vector4::from_fn(|_, _| rng.random_range(-1.0..1.0));
        let av = Vector4::from_fn(|_, _| rng.random_range(-1.0..1.0));
        let (bw, bv) = (m * aw, m * av);
        let scale = (bw.norm() + g.norm() * aw.norm()) * av.norm() + (bv.norm() + g.norm() * av.norm()) * aw.norm();
        worst = worst.max(q_rhs(&bw, &aw, &bv, &av, &g).abs() / scale);
    }
    let st = flags.check(worst <= 1e-14, || format!("verify: q_rhs reached {worst:.3e}"));
    out.insert("q_rhs".into(), json!({ "pairs": cfg.verify.q_pairs, "max_relative": worst, "status": st }));

    let ln_h = s.h_values.first().map_or(-(1e-3f64).ln(), |h| h.ln_h_abs);
    if cfg.verify.stationarity {
        let sys = s.finest_system();
        let sol = s.model(ln_h)?;
        let fun = DiscreteFunctional::new(sys, &s.load, sol.f, sol.m_sharp);
        let nin = 2 * sys.inplane.num_nodes();
        let nb = sys.bending.num_dofs();
        let perts: Vec<Perturbation> = (0..cfg.verify.perturbations)
            .map(|_| {
                let mut dofs = vec![0.0; nin + nb];
                for (i, d) in dofs.iter_mut().enumerate().take(nin) {
                    if !sys.inplane.is_boundary_node(i / 2) {
                        *d = rng.random_range(-1.0..1.0);
                    }
                }
                for i in 0..nb {
                    if !sys.bending.is_boundary_dof(i) && i != sys.mesh.origin_vertex {
                        dofs[nin + i] = rng.random_range(-1.0..1.0);
                    }
                }
                Perturbation { dofs, a: Vector4::from_fn(|_, _| rng.random_range(-1.0..1.0)) }
            })
            .collect();
        let d = stationarity_check(&fun, &sol, &perts)?;
        let st = flags.check(d <= tolerances::STATIONARITY, || format!("verify: directional derivative {d:.3e}"));
        out.insert(
            "stationarity".into(),
            json!({ "ln_h_abs": ln_h, "perturbations": perts.len(), "max_directional_derivative": d, "status": st }),
        );
    }

    if cfg.verify.green_formula {
        if cfg.is_isotropic() && cfg.domain == Domain::unit_disk() {
            let disk = IsotropicDiskGreen::new(&s.reduced.a0)?;
            let wreg = PolyField::clamped_on_unit_disk(&random_poly(&mut rng, 1), &random_poly(&mut rng, 1), &random_poly(&mut rng, 2));
            let vreg = PolyField::clamped_on_unit_disk(&random_poly(&mut rng, 1), &random_poly(&mut rng, 1), &random_poly(&mut rng, 2));
            let w = GreenFormSample { regular: &wreg, a: Vector4::from_fn(|_, _| rng.random_range(-1.0..1.0)) };
            let v = GreenFormSample { regular: &vreg, a: Vector4::from_fn(|_, _| rng.random_range(-1.0..1.0)) };
            let rep = green_form_check(&disk, &w, &v, &[0.2, 0.1, 0.05]);
            let last = *rep.errors.last().expect("three radii");
            let ok = !rep.inconclusive && last <= 0.05 * rep.q_rhs.abs().max(1e-12);
            let st = flags.check(ok, || format!("verify: Green formula error {last:.3e} against {:.3e}", rep.q_rhs));
            out.insert("green_formula".into(), json!({ "report": rep, "status": st }));
        } else {
            out.insert("green_formula".into(), json!({ "skipped": "needs an isotropic material on the unit disk" }));
        }
    }
    Ok(Value::Object(out))
}
