use bec_lz_web::{density_values, grid_points, level_scan};

#[test]
fn coarse_scan_shows_the_crossing() {
    let (points, levels) = (41, 3);
    let flat = level_scan(6.4, 0.5, -5.0, 0.0, points, levels, 256).unwrap();
    assert_eq!(flat.len(), points * levels);
    let gaps: Vec<f64> = flat.chunks(levels).map(|row| row[1] - row[0]).collect();
    let (imin, gmin) = gaps
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |b, (i, g)| if *g < b.1 { (i, *g) } else { b });
    let x0 = -5.0 + 5.0 * imin as f64 / (points - 1) as f64;
    assert!((x0 + 3.6).abs() < 0.3, "minimum at {x0}");
    assert!(gmin < 0.25);
    let last = &flat[(points - 1) * levels..];
    for (k, e) in last.iter().enumerate() {
        assert!((e - (k as f64 + 0.5)).abs() < 1e-3, "level {k}: {e}");
    }
}

#[test]
fn density_is_normalized_and_mirrors() {
    let n = 256;
    let dx = 24.0 / n as f64;
    let a = density_values(0.97, 0.0, n).unwrap();
    let b = density_values(0.97, std::f64::consts::PI, n).unwrap();
    assert!((a.iter().sum::<f64>() * dx - 1.0).abs() < 1e-8);
    let xs = grid_points(n).unwrap();
    for j in 1..n {
        assert!((xs[j] + xs[n - j]).abs() < 1e-12);
        assert!((a[j] - b[n - j]).abs() < 1e-12);
    }
    assert!(density_values(1.5, 0.0, n).is_err());
}
