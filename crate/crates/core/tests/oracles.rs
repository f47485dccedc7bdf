//! Reference values computed independently at 40 significant digits
//! (image sums, Weyl-integration quadrature, brute-force word enumeration).

use heatlab_core::fock::hermite_degree_norms;
use heatlab_core::stochastic::{su2_step_mean_minus_one, wrapped_gaussian_cdf};
use heatlab_core::transforms::{
    norm_in_position, phase_constant_measured, phase_constant_oracle, segal_bargmann_b,
};
use heatlab_core::{CompactGroup, FourierCoefficients, HeatKernel, IrrepLabel, C64};

fn close(a: f64, b: f64, rel: f64) {
    assert!((a - b).abs() <= rel * b.abs().max(1e-300), "{a} vs {b}");
}

#[test]
fn su2_heat_kernel_values() {
    let g = CompactGroup::su2();
    let h = HeatKernel::new(&g, 0.5).unwrap();
    close(
        h.rho(&g.exp_map(&[1.0, 0.0, 0.0])),
        4.549_425_364_399_506,
        1e-12,
    );
    let h = HeatKernel::new(&g, 0.25).unwrap();
    close(
        h.rho(&g.exp_map(&[0.0, 2.5, 0.0])),
        2.027_972_737_246_373e-4,
        1e-9,
    );
}

#[test]
fn circle_heat_kernel_matches_image_sum() {
    // Image sums are densities against d(theta); Haar measure has mass one.
    let two_pi = 2.0 * std::f64::consts::PI;
    let g = CompactGroup::torus(1);
    let h = HeatKernel::new(&g, 1.3).unwrap();
    close(
        h.rho(&g.exp_map(&[-0.4])),
        two_pi * 0.329_013_225_123_813_2,
        1e-12,
    );
    let h = HeatKernel::new(&g, 0.1).unwrap();
    assert!((h.rho(&g.exp_map(&[2.0])) - two_pi * 2.600_281_868_827_194e-9).abs() < 1e-13);
}

#[test]
fn spin_half_character() {
    let g = CompactGroup::su2();
    let chi = FourierCoefficients::character(&g, IrrepLabel::spin(1)).unwrap();
    close(
        norm_in_position(&chi, 0.5).unwrap(),
        2.103_638_323_514_327,
        1e-12,
    );
    let at = g.exp_complex(&[C64::from(0.0), C64::from(0.0), C64::new(0.0, 0.5)]);
    let v = segal_bargmann_b(&chi, 0.5, &at).unwrap();
    assert!((v - C64::from(1.461_388_362_463_635)).norm() < 1e-13);
    let want = [
        1.889_466_210_964_059,
        0.0,
        1.417_099_658_223_043_7,
        1.417_099_658_223_043_5,
        2.479_924_401_890_327,
        3.542_749_145_557_610_6,
        5.402_692_446_975_335,
    ];
    for (n, (got, w)) in hermite_degree_norms(&chi, 0.5, 6)
        .iter()
        .zip(want)
        .enumerate()
    {
        assert!(
            (got - w).abs() < 1e-12 * (1.0 + w),
            "degree {n}: {got} vs {w}"
        );
    }
}

#[test]
fn one_step_character_mean() {
    close(
        su2_step_mean_minus_one(1, 0.5, 10),
        -0.037_111_644_518_465_61,
        1e-12,
    );
}

#[test]
fn wrapped_gaussian_distribution() {
    close(wrapped_gaussian_cdf(0.7, 1.0), 0.884_001_138_321_051, 1e-13);
}

#[test]
fn phase_space_constants() {
    close(
        phase_constant_oracle(1, 1.0),
        1.000_103_446_372_407_6,
        1e-14,
    );
    close(phase_constant_oracle(2, 0.5), 1.000_000_010_701_152, 1e-14);
    close(
        phase_constant_measured(1, 1.0, 256),
        1.000_103_446_372_407_6,
        1e-12,
    );
}
