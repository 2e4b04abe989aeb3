use std::f64::consts::PI;

use vnag_core::{bessel_j1, bessel_y1};

const TABLE: &str = include_str!("data/bessel_j1_y1.csv");

fn table() -> Vec<(f64, f64, f64)> {
    TABLE
        .lines()
        .skip(1)
        .map(|line| {
            let v: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
            (v[0], v[1], v[2])
        })
        .collect()
}

#[test]
fn table_covers_log_grid() {
    let t = table();
    assert_eq!(t.len(), 1000);
    assert_eq!(t[0].0, 1e-3);
    assert!((t[999].0 - 1e3).abs() < 1e-9);
}

#[test]
fn j1_and_y1_match_reference_to_1e10_relative() {
    let mut worst = (0.0f64, 0.0f64);
    for (x, j, y) in table() {
        let ej = (bessel_j1(x).unwrap() - j).abs() / j.abs();
        let ey = (bessel_y1(x).unwrap() - y).abs() / y.abs();
        assert!(ej <= 1e-10, "j1({x}): rel err {ej:e}");
        assert!(ey <= 1e-10, "y1({x}): rel err {ey:e}");
        worst = (worst.0.max(ej), worst.1.max(ey));
    }
    eprintln!("worst relative error: j1 {:e}, y1 {:e}", worst.0, worst.1);
}

#[test]
fn leading_asymptotics_within_envelope() {
    for (x, _, _) in table().into_iter().filter(|r| r.0 >= 50.0) {
        let amp = (2.0 / (PI * x)).sqrt();
        let chi = x - 0.75 * PI;
        let dj = (bessel_j1(x).unwrap() - amp * chi.cos()).abs();
        let dy = (bessel_y1(x).unwrap() - amp * chi.sin()).abs();
        assert!(dj <= 0.5 * amp / x, "x={x}");
        assert!(dy <= 0.5 * amp / x, "x={x}");
    }
    let x: f64 = 50.0;
    let lead = (2.0 / (PI * x)).sqrt() * (x - 0.75 * PI).sin();
    assert!((bessel_y1(x).unwrap() - lead).abs() <= 2e-2);
}
