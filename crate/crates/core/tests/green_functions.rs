use nalgebra::{Matrix2, Matrix3};
use std::f64::consts::PI;
use std::sync::Arc;
use thinplate::fem2d::{Domain, PlateSystem};
use thinplate::fundsol::SingularBasis;
use thinplate::green::{decay_diagnostic, green_bundle, GreenAnalysis};
use thinplate::material::{make_isotropic, reduce_stiffness};
use thinplate::poly::Poly2;

fn generic_a0() -> Matrix3<f64> {
    Matrix3::new(2.0, 0.5, 0.2, 0.5, 1.5, -0.1, 0.2, -0.1, 0.8)
}

fn generic_domain() -> Domain {
    Domain::Polygon { vertices: vec![[-0.9, -0.7], [1.1, -0.8], [1.0, 0.6], [0.2, 1.2], [-0.8, 0.9]] }
}

fn analysis(domain: &Domain, a0: &Matrix3<f64>, hs: [f64; 3]) -> GreenAnalysis {
    let basis = Arc::new(SingularBasis::new(a0).unwrap());
    let levels = hs
        .iter()
        .map(|&h| green_bundle(&PlateSystem::build(domain, h, a0).unwrap(), &basis).unwrap())
        .collect();
    GreenAnalysis::new(levels).unwrap()
}

#[test]
fn disk_center_values_converge() {
    let a0 = reduce_stiffness(&make_isotropic(1.0, 1.0).unwrap()).unwrap();
    let an = analysis(&Domain::unit_disk(), &a0, [0.1, 0.05, 0.025]);
    // Clamped disk with flexural rigidity D: G3(O, O) = 1 / (16 pi D).
    let d = thinplate::plate::bending_symbol(&a0)[0];
    let exact = 1.0 / (16.0 * PI * d);
    let fine = an.finest();
    assert!((fine.g3_center - exact).abs() < 1e-2 * exact, "{} {}", fine.g3_center, exact);
    assert!((an.g3_center.value - exact).abs() < 2e-3 * exact, "{:?} {}", an.g3_center, exact);
    assert!((an.g3_center_energy.value - exact).abs() < 1e-2 * exact, "{:?}", an.g3_center_energy);
    assert!(fine.g3_deriv_center.iter().all(|v| v.abs() < 1e-3));
    let alpha = fine.basis.phi3([1.0, 0.0], 0, 0);
    let block = an.cal_g.fixed_view::<2, 2>(2, 2).into_owned();
    assert!((block - Matrix2::identity() * (2.0 * alpha)).amax() < 2e-3 * alpha, "{block}");
}

#[test]
fn generic_calg_is_symmetric_and_routes_agree() {
    let a0 = generic_a0();
    let an = analysis(&generic_domain(), &a0, [0.1, 0.05, 0.025]);
    eprintln!("asym {:?}", an.asymmetry);
    assert!(an.asymmetry[2] <= 1e-3);
    assert!(an.asymmetry[2] < an.asymmetry[0]);
    let f = an.finest();
    for i in 0..2 {
        let scale = f.g3_deriv_center[i].abs().max(f.g3_center);
        assert!((f.g3_deriv_center[i] - f.g3_grad_center[i]).abs() < 1e-2 * scale, "{:?} {:?}", f.g3_deriv_center, f.g3_grad_center);
    }
    assert!(!an.flagged);
}

#[test]
fn remainder_decays_at_expected_rates() {
    let a0 = generic_a0();
    let basis = Arc::new(SingularBasis::new(&a0).unwrap());
    let g = green_bundle(&PlateSystem::build(&generic_domain(), 0.025, &a0).unwrap(), &basis).unwrap();
    let rep = decay_diagnostic(&g, &[0.2, 0.1, 0.05, 0.025]).unwrap();
    eprintln!("{rep:?}");
    assert!((rep.membrane_rate - 1.0).abs() < 0.3, "{}", rep.membrane_rate);
    assert!((rep.bending_rate - 2.0).abs() < 0.3, "{}", rep.bending_rate);
}

#[test]
fn gauge_leaves_physical_green_functions_unchanged() {
    let a0 = generic_a0();
    let sys = PlateSystem::build(&generic_domain(), 0.1, &a0).unwrap();
    let b0 = Arc::new(SingularBasis::new(&a0).unwrap());
    let q = Poly2::from_terms(vec![(0, 0, 0.3), (1, 0, -0.2), (0, 1, 0.1), (2, 0, 0.5), (1, 1, -0.25), (0, 2, 0.05)]);
    let b1 = Arc::new(SingularBasis::new(&a0).unwrap().with_gauge(q).unwrap());
    let g0 = green_bundle(&sys, &b0).unwrap();
    let g1 = green_bundle(&sys, &b1).unwrap();
    assert!((g0.g3_center - g1.g3_center).abs() < 1e-8);
    assert!((g0.c[0] - g1.c[0]).abs() < 1e-8 && (g0.c[1] - g1.c[1]).abs() < 1e-8);
    for y in [[0.3, 0.1], [-0.5, 0.4], [0.05, -0.02], [0.7, 0.3]] {
        let d = (g0.gsharp(y).unwrap() - g1.gsharp(y).unwrap()).amax();
        assert!(d < 1e-8, "{y:?} {d}");
    }
    assert!((g0.cal_g - g1.cal_g).fixed_view::<2, 2>(2, 2).amax() > 1e-3);
}
