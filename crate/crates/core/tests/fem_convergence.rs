use std::f64::consts::PI;
use std::sync::Arc;
use thinplate::fem2d::{build_mesh, BendingLoad, BendingSystem, Domain, InplaneSystem, PointField};
use thinplate::material::isotropic_a0;
use thinplate::plate;
use thinplate::poly::Poly2;
use nalgebra::Matrix3;

fn slope(hs: &[f64], errs: &[f64]) -> f64 {
    let n = hs.len() as f64;
    let xs: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

fn square() -> Domain {
    Domain::Polygon { vertices: vec![[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]] }
}

#[test]
fn membrane_manufactured_rates() {
    let (l, m) = (1.0, 1.0);
    let a0 = isotropic_a0(l, m);
    let lp = thinplate::material::lambda_prime(l, m);
    let s = |x: [f64; 2]| (PI * x[0]).sin() * (PI * x[1]).sin();
    let exact = move |x: [f64; 2]| [s(x), s(x)];
    let grad = move |x: [f64; 2]| {
        let g = [PI * (PI * x[0]).cos() * (PI * x[1]).sin(), PI * (PI * x[0]).sin() * (PI * x[1]).cos()];
        [g, g]
    };
    // L'u = -mu Lap u - (lambda' + mu) grad div u.
    let load = move |x: [f64; 2]| {
        let lap = -2.0 * PI * PI * s(x);
        let cxy = PI * PI * (PI * x[0]).cos() * (PI * x[1]).cos();
        let sxx = -PI * PI * s(x);
        // div u = d1 u1 + d2 u2; grad div = (d11 u1 + d12 u2, d12 u1 + d22 u2).
        let gd = [sxx + cxy, cxy + sxx];
        [-m * lap - (lp + m) * gd[0], -m * lap - (lp + m) * gd[1]]
    };
    let mut hs = Vec::new();
    let mut l2 = Vec::new();
    let mut h1 = Vec::new();
    for h in [0.2, 0.1, 0.05] {
        let mesh = Arc::new(build_mesh(&square(), h).unwrap());
        hs.push(mesh.max_edge_length());
        let sys = InplaneSystem::new(mesh, &a0).unwrap();
        let f = sys.solve(Some(&load), None).unwrap();
        let (a, b) = f.errors(&exact, &grad);
        l2.push(a);
        h1.push(b);
    }
    let (sl2, sh1) = (slope(&hs, &l2), slope(&hs, &h1));
    println!("membrane L2 errors {l2:?} slope {sl2:.3}; H1 errors {h1:?} slope {sh1:.3}");
    assert!((sl2 - 3.0).abs() <= 0.3);
    assert!((sh1 - 2.0).abs() <= 0.3);
}

fn bending_load(a0: &Matrix3<f64>, w: &Poly2) -> Poly2 {
    let sym = plate::bending_symbol(a0);
    let mut out = Poly2::zero();
    for (a, c) in sym.iter().enumerate() {
        out = out.add(&w.derivative((4 - a) as u32, a as u32).scale(*c));
    }
    out
}

#[test]
fn bending_manufactured_rates() {
    let a0 = isotropic_a0(1.0, 1.0);
    let w = Poly2::from_terms(vec![(0, 0, 1.0), (2, 0, -2.0), (0, 2, -2.0), (4, 0, 1.0), (2, 2, 2.0), (0, 4, 1.0)]);
    let g = bending_load(&a0, &w);
    let mut hs = Vec::new();
    let mut l2 = Vec::new();
    let mut h2 = Vec::new();
    for h in [0.1, 0.05, 0.025] {
        let mesh = Arc::new(build_mesh(&Domain::unit_disk(), h).unwrap());
        hs.push(mesh.max_edge_length());
        let sys = BendingSystem::new(mesh, &a0).unwrap();
        let gv = |x: [f64; 2]| g.eval(x);
        let data = |x: [f64; 2]| (w.eval(x), w.grad(x));
        let f = sys.solve(BendingLoad::value(&gv), Some(&data), false).unwrap();
        let ex = |x: [f64; 2]| w.eval(x);
        let hess = |x: [f64; 2]| {
            let h12 = w.derivative(1, 1).eval(x);
            [[w.derivative(2, 0).eval(x), h12], [h12, w.derivative(0, 2).eval(x)]]
        };
        let (a, b) = f.errors(&ex, &hess);
        l2.push(a);
        h2.push(b);
    }
    let (sl2, sh2) = (slope(&hs, &l2), slope(&hs, &h2));
    println!("bending L2 errors {l2:?} slope {sl2:.3}; broken H2 errors {h2:?} slope {sh2:.3}");
    assert!((sh2 - 1.0).abs() <= 0.3);
    assert!((sl2 - 2.0).abs() <= 0.3);
}

#[test]
fn clamped_disk_uniform_load() {
    // w(r) = (1 - r^2)^2 / (64 c) for c Lap^2 w = 1; a0 = I gives c = 1/12.
    let a0 = Matrix3::identity();
    let one = |_: [f64; 2]| 1.0;
    let mut centers = Vec::new();
    for h in [0.2, 0.1, 0.05] {
        let mesh = Arc::new(build_mesh(&Domain::unit_disk(), h).unwrap());
        let origin = mesh.origin_vertex;
        let sys = BendingSystem::new(mesh, &a0).unwrap();
        let f = sys.solve(BendingLoad::value(&one), None, false).unwrap();
        centers.push(f.vertex_value(origin));
    }
    println!("center deflections {centers:?}");
    assert!((centers[2] - 0.1875).abs() < 0.01 * 0.1875);
}

#[test]
fn recovered_gradient_of_cubic() {
    let a0 = isotropic_a0(1.0, 1.0);
    let w = Poly2::monomial(1.0, 3, 0);
    let g = bending_load(&a0, &w);
    let mut errs = Vec::new();
    for h in [0.1, 0.05, 0.025] {
        let mesh = Arc::new(build_mesh(&Domain::unit_disk(), h).unwrap());
        let sys = BendingSystem::new(mesh, &a0).unwrap();
        let gv = |x: [f64; 2]| g.eval(x);
        let data = |x: [f64; 2]| (w.eval(x), w.grad(x));
        let f = sys.solve(BendingLoad::value(&gv), Some(&data), false).unwrap();
        let j = f.jet([0.3, 0.2]).unwrap();
        errs.push((j.grad[2][0] - 0.27).abs());
    }
    println!("gradient errors {errs:?}");
    assert!(errs[0] > errs[1] && errs[1] > errs[2]);
    assert!(errs[2] < 0.02 * 0.27);
}

#[test]
fn symmetric_interpolant_has_zero_gradient_at_origin() {
    let mesh = Arc::new(build_mesh(&Domain::unit_disk(), 0.1).unwrap());
    let sys = BendingSystem::new(mesh, &Matrix3::identity()).unwrap();
    let w = |x: [f64; 2]| {
        let s = 1.0 - x[0] * x[0] - x[1] * x[1];
        (s * s, [-4.0 * x[0] * s, -4.0 * x[1] * s])
    };
    let f = sys.interpolate(&w);
    let j = f.jet([0.0, 0.0]).unwrap();
    assert!(j.grad[2][0].abs() < 1e-8 && j.grad[2][1].abs() < 1e-8, "{:?}", j.grad[2]);
    assert_eq!(j.val[2], 1.0);
}

#[test]
fn affine_fields_recover_exact_gradients() {
    let mesh = Arc::new(build_mesh(&Domain::unit_disk(), 0.2).unwrap());
    let sys = BendingSystem::new(mesh, &Matrix3::identity()).unwrap();
    let w = |x: [f64; 2]| (0.5 + 2.0 * x[0] - 3.0 * x[1], [2.0, -3.0]);
    let f = sys.interpolate(&w);
    for p in [[0.0, 0.0], [0.41, -0.17], [-0.7, 0.2]] {
        let (v, g) = thinplate::fem2d::evaluate_point(&f, p).unwrap();
        assert!((v[2] - w(p).0).abs() < 1e-12);
        assert!((g[2][0] - 2.0).abs() < 1e-10 && (g[2][1] + 3.0).abs() < 1e-10);
    }
}
