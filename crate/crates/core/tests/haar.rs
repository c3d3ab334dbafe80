use clustersim::logical::{haar_random_rotation, HaarRotations};

const DRAWS: usize = 100_000;

#[test]
fn polar_angle_has_sine_density() {
    let mut theta2: Vec<f64> = HaarRotations::new(2024).take(DRAWS).map(|r| r.theta2).collect();
    let mean_cos = theta2.iter().map(|t| t.cos()).sum::<f64>() / DRAWS as f64;
    assert!(mean_cos.abs() < 0.01, "mean cos = {mean_cos}");

    theta2.sort_by(f64::total_cmp);
    let n = DRAWS as f64;
    let ks = theta2
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let cdf = (1.0 - t.cos()) / 2.0;
            (cdf - i as f64 / n).abs().max(((i + 1) as f64 / n - cdf).abs())
        })
        .fold(0.0, f64::max);
    assert!(ks < 0.01, "KS = {ks}");
}

#[test]
fn azimuthal_angles_are_uniform() {
    let rs: Vec<_> = HaarRotations::new(99).take(DRAWS).collect();
    for pick in [|r: &clustersim::RotationSpec| r.theta1, |r: &clustersim::RotationSpec| r.theta3] {
        let mut v: Vec<f64> = rs.iter().map(pick).collect();
        v.sort_by(f64::total_cmp);
        let n = DRAWS as f64;
        let ks = v
            .iter()
            .enumerate()
            .map(|(i, t)| (t / std::f64::consts::TAU - i as f64 / n).abs())
            .fold(0.0, f64::max);
        assert!(ks < 0.01);
    }
}

#[test]
fn seeds_are_reproducible() {
    assert_eq!(haar_random_rotation(5), haar_random_rotation(5));
    let a: Vec<_> = HaarRotations::new(5).take(3).collect();
    let b: Vec<_> = HaarRotations::new(5).take(3).collect();
    assert_eq!(a, b);
}
