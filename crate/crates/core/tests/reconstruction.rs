use std::sync::Arc;
use thinplate::extension::{model_solution, solve_regular, CapacityInput};
use thinplate::fem2d::{Domain, PlateSystem};
use thinplate::fundsol::SingularBasis;
use thinplate::green::green_bundle;
use thinplate::material::{make_isotropic, ReducedLoad, ReducedModel};
use thinplate::poly::Poly2;
use thinplate::reconstruct::{displacement_ansatz, read_csv, render, Exclusions, ExportFormat, SampleGrid};

#[test]
fn kirchhoff_kinematics_hold_on_a_discrete_solution() {
    let reduced = ReducedModel::new(&make_isotropic(1.0, 1.0).unwrap()).unwrap();
    let basis = Arc::new(SingularBasis::new(&reduced.a0).unwrap());
    let system = PlateSystem::build(&Domain::unit_disk(), 0.1, &reduced.a0).unwrap();
    let bundle = Arc::new(green_bundle(&system, &basis).unwrap());
    let load = ReducedLoad::direct(Poly2::constant(0.2), Poly2::zero(), Poly2::monomial(1.0, 1, 0));
    let reg = Arc::new(solve_regular(&system, &load, &bundle).unwrap());

    let h = 1e-2;
    let grid = SampleGrid::boxed([-0.6, -0.6], [0.6, 0.6], 7, 3);
    let ex = Exclusions::defaults(&system.mesh, h, false);
    let field = displacement_ansatz(reg.as_ref(), &reduced, h, &grid, &ex).unwrap();
    assert_eq!(field.skipped, 0);
    assert_eq!(field.samples.len(), 49 * 3);
    assert_eq!(field.generator, "regular");

    for chunk in field.samples.chunks(3) {
        let y = chunk[0].y;
        let jet = reg.jet(y).unwrap();
        let mut shifted = Vec::new();
        for s in chunk {
            assert_eq!(s.y, y);
            let zeta = s.z / h;
            let w2 = reduced.w_ops[2].apply(zeta, &jet) * h.sqrt();
            // p = 0 carries no z-dependence.
            assert!((s.u[2] - h.powf(-1.5) * jet.val[2] - w2[2]).abs() < 1e-9 * h.powf(-1.5));
            shifted.push([0, 1].map(|i| s.u[i] + s.z * h.powf(-1.5) * jet.grad[2][i] - w2[i]));
        }
        for i in 0..2 {
            let base = shifted[0][i];
            for v in &shifted {
                assert!((v[i] - base).abs() < 1e-9 * (1.0 + base.abs()));
            }
            assert!((base - jet.val[i] / h.sqrt()).abs() < 1e-9 * (1.0 + base.abs()));
        }
    }

    let csv = render(&field, ExportFormat::Csv).unwrap();
    assert_eq!(render(&field, ExportFormat::Csv).unwrap(), csv);
    let back = read_csv(csv.as_bytes()).unwrap();
    assert!(back.iter().zip(&field.samples).all(|((s, _), o)| s == o));

    // The singular field excludes a 5h disk around the support point.
    let cap = CapacityInput::default_zero();
    let sol = model_solution(reg.clone(), &load, bundle.clone(), &basis.psi4, &cap, &bundle.cal_g, 6.9).unwrap();
    let h = 0.02;
    let grid = SampleGrid { points: vec![[0.0, 0.0], [0.05, 0.05], [0.3, 0.1], [0.99, 0.0]], zetas: vec![0.0] };
    let ex = Exclusions::defaults(&system.mesh, h, true);
    let field = displacement_ansatz(&sol, &reduced, h, &grid, &ex).unwrap();
    assert_eq!(field.skipped, 3);
    assert_eq!(field.generator, "singular");
    assert!(field.samples[0].u.iter().all(|v| v.is_finite()));
}
