//! Native checks of the demo bindings (the same code runs in the browser).

use fracharm_web::Demo;

#[test]
fn gasket_demo_exposes_geometry_and_spectrum() {
    let demo = Demo::new("gasket", 2).unwrap();
    assert_eq!(demo.vertex_count(), 15);
    assert_eq!(demo.positions().len(), 30);
    assert_eq!(demo.edges().len(), 54);
    let ev = demo.eigenvalues();
    assert_eq!(ev[0], 0.0);
    assert!(ev.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn heat_kernel_is_a_probability_density() {
    let demo = Demo::new("interval", 4).unwrap();
    let x0 = demo.nearest_vertex(0.5, 0.0);
    let p = demo.heat_kernel(0.01, x0).unwrap();
    // p is a density against the vertex masses 1/16 (halved at the ends)
    let n = p.len();
    let mass: f64 = p
        .iter()
        .enumerate()
        .map(|(i, v)| {
            v * if i == 0 || i == n - 1 {
                1.0 / 32.0
            } else {
                1.0 / 16.0
            }
        })
        .sum();
    assert!((mass - 1.0).abs() < 1e-10);
    assert!(p.iter().all(|&v| v > 0.0));
}

#[test]
fn harmonic_function_lies_between_exterior_values() {
    let demo = Demo::new("gasket", 3).unwrap();
    let x0 = demo.nearest_vertex(0.6, 0.2);
    let u = demo.harmonic_in_ball(0.5, x0, 0.3).unwrap();
    assert!(u.iter().all(|&v| (-1e-10..=1.0 + 1e-10).contains(&v)));
}
