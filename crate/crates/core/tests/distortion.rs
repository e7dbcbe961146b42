//! Distortion-engine tests: closed forms against an independent quadrature
//! oracle, finite-difference consistency of gradient and Hessian, the
//! tridiagonal solver, Dirac components, and the safeguarded Newton driver.

use proptest::prelude::*;
use rmq_core::distortion::{
    distortion, evaluate, gradient, hessian, midpoints, newton_solve, newton_step,
    solve_tridiagonal, Component, GaussianMixture, Grid, NewtonOptions, Tridiagonal,
};
use rmq_core::gaussian::std_normal_inv_cdf;

fn two_component_law() -> GaussianMixture {
    GaussianMixture::new(vec![
        Component { mean: -0.5, std: 0.8, prob: 0.3 },
        Component { mean: 1.2, std: 0.4, prob: 0.7 },
    ])
    .unwrap()
}

#[test]
fn midpoints_are_cell_boundaries_with_infinite_ends() {
    let grid = Grid::new(vec![0.0, 1.0, 3.0]).unwrap();
    let mids = midpoints(&grid);
    assert_eq!(mids.len(), 4);
    assert_eq!(mids[0], f64::NEG_INFINITY);
    assert_eq!(mids[1], 0.5);
    assert_eq!(mids[2], 2.0);
    assert_eq!(mids[3], f64::INFINITY);
}

#[test]
fn grid_rejects_malformed_input() {
    assert!(Grid::new(vec![]).is_err());
    assert!(Grid::new(vec![0.0, 0.0]).is_err());
    assert!(Grid::new(vec![1.0, 0.0]).is_err());
    assert!(Grid::new(vec![0.0, f64::NAN]).is_err());
    assert!(Grid::new(vec![0.0, f64::INFINITY]).is_err());
}

#[test]
fn mixture_rejects_malformed_components() {
    let c = |mean, std, prob| Component { mean, std, prob };
    assert!(GaussianMixture::new(vec![]).is_err());
    assert!(GaussianMixture::new(vec![c(0.0, 1.0, 0.5)]).is_err()); // sums to 0.5
    assert!(GaussianMixture::new(vec![c(0.0, -1.0, 1.0)]).is_err());
    assert!(GaussianMixture::new(vec![c(0.0, 1.0, -0.2), c(0.0, 1.0, 1.2)]).is_err());
    assert!(GaussianMixture::new(vec![c(f64::NAN, 1.0, 1.0)]).is_err());
    assert!(GaussianMixture::new(vec![c(0.0, 1.0, 1.0)]).is_ok());
}

#[test]
fn distortion_matches_quadrature_oracle() {
    // Independent adaptive-quadrature value for this mixture and grid.
    let law = two_component_law();
    let grid = Grid::new(vec![-1.0, 0.3, 1.5]).unwrap();
    let d = distortion(&law, &grid);
    assert!((d - 0.14972763154708094).abs() < 1e-10, "got {d}");
}

#[test]
fn gradient_matches_quadrature_fd_oracle() {
    // Frozen central differences (step 1e-6) of the quadrature distortion,
    // halved to match the half-gradient convention.
    let law = two_component_law();
    let grid = Grid::new(vec![-1.0, 0.3, 1.5]).unwrap();
    let g = gradient(&law, &grid);
    let oracle = [0.00790216219543, -0.0393176869395, 0.0814187125914];
    for (gi, oi) in g.iter().zip(oracle) {
        assert!((gi - oi).abs() < 1e-6, "gradient {gi} vs oracle {oi}");
    }
}

#[test]
fn gradient_is_half_the_distortion_derivative() {
    let law = two_component_law();
    let pts = vec![-1.3, -0.2, 0.6, 1.4, 2.2];
    let g = gradient(&law, &Grid::new(pts.clone()).unwrap());
    for j in 0..pts.len() {
        let h = 1e-6 * (1.0 + pts[j].abs());
        let mut up = pts.clone();
        up[j] += h;
        let mut dn = pts.clone();
        dn[j] -= h;
        let fd = (distortion(&law, &Grid::new(up).unwrap())
            - distortion(&law, &Grid::new(dn).unwrap()))
            / (4.0 * h);
        let denom = g[j].abs().max(1e-8);
        assert!(
            ((g[j] - fd) / denom).abs() < 1e-5,
            "entry {j}: closed {} vs fd {}",
            g[j],
            fd
        );
    }
}

#[test]
fn hessian_matches_gradient_finite_differences() {
    let law = two_component_law();
    let pts = vec![-1.3, -0.2, 0.6, 1.4, 2.2];
    let n = pts.len();
    let h_mat = hessian(&law, &Grid::new(pts.clone()).unwrap());
    assert_eq!(h_mat.sub, h_mat.sup, "analytic Hessian must be symmetric");
    for j in 0..n {
        let h = 1e-6 * (1.0 + pts[j].abs());
        let mut up = pts.clone();
        up[j] += h;
        let mut dn = pts.clone();
        dn[j] -= h;
        let gu = gradient(&law, &Grid::new(up).unwrap());
        let gd = gradient(&law, &Grid::new(dn).unwrap());
        for i in 0..n {
            let fd = (gu[i] - gd[i]) / (2.0 * h);
            let closed = if i == j {
                h_mat.diag[j]
            } else if i + 1 == j {
                h_mat.sup[i]
            } else if j + 1 == i {
                h_mat.sub[j]
            } else {
                0.0
            };
            let denom = closed.abs().max(1e-6);
            assert!(
                ((closed - fd) / denom).abs() < 1e-4,
                "H[{i}][{j}]: closed {closed} vs fd {fd}"
            );
        }
    }
}

#[test]
fn dirac_component_uses_owning_cell() {
    let law = GaussianMixture::new(vec![Component { mean: 0.0, std: 0.0, prob: 1.0 }]).unwrap();
    let grid = Grid::new(vec![-1.0, 0.3, 2.0]).unwrap();
    let eval = evaluate(&law, &grid);
    // Mass at 0 lies in the cell of 0.3 (boundaries −0.35 and 1.15).
    assert!((eval.distortion - 0.09).abs() < 1e-15);
    assert_eq!(eval.gradient[0], 0.0);
    assert!((eval.gradient[1] - 0.3).abs() < 1e-15);
    assert_eq!(eval.gradient[2], 0.0);
    assert_eq!(eval.hessian.diag[1], 1.0);
}

#[test]
fn dirac_on_boundary_goes_to_lower_cell() {
    let law = GaussianMixture::new(vec![Component { mean: 0.5, std: 0.0, prob: 1.0 }]).unwrap();
    // Midpoint between 0 and 1 is exactly 0.5.
    let grid = Grid::new(vec![0.0, 1.0]).unwrap();
    let eval = evaluate(&law, &grid);
    assert!((eval.gradient[0] - (-0.5)).abs() < 1e-15);
    assert_eq!(eval.gradient[1], 0.0);
}

#[test]
fn mixed_dirac_and_gaussian_components_combine() {
    let law = GaussianMixture::new(vec![
        Component { mean: 0.0, std: 0.0, prob: 0.4 },
        Component { mean: 0.0, std: 1.0, prob: 0.6 },
    ])
    .unwrap();
    let grid = Grid::new(vec![-0.7, 0.1, 0.9]).unwrap();
    let pure_gauss = GaussianMixture::new(vec![Component { mean: 0.0, std: 1.0, prob: 1.0 }]).unwrap();
    let d_mixed = distortion(&law, &grid);
    let d_gauss = distortion(&pure_gauss, &grid);
    // Dirac at 0 owned by the cell of 0.1: contributes 0.4·0.01.
    assert!((d_mixed - (0.4 * 0.01 + 0.6 * d_gauss)).abs() < 1e-14);
}

#[test]
fn tridiagonal_solver_matches_hand_solution() {
    // [2 1 0; 1 2 1; 0 1 2]·x = (4, 8, 8) has solution (1, 2, 3).
    let t = Tridiagonal {
        sub: vec![1.0, 1.0],
        diag: vec![2.0, 2.0, 2.0],
        sup: vec![1.0, 1.0],
    };
    let x = solve_tridiagonal(&t, &[4.0, 8.0, 8.0]).unwrap();
    for (xi, ei) in x.iter().zip([1.0, 2.0, 3.0]) {
        assert!((xi - ei).abs() < 1e-12);
    }
}

#[test]
fn tridiagonal_solver_reports_singularity() {
    let t = Tridiagonal {
        sub: vec![0.0],
        diag: vec![0.0, 1.0],
        sup: vec![0.0],
    };
    let err = solve_tridiagonal(&t, &[1.0, 1.0]).unwrap_err();
    assert!(matches!(err, rmq_core::Error::SingularSystem { row: 0, .. }));
}

#[test]
fn tridiagonal_solver_checks_dimensions() {
    let t = Tridiagonal {
        sub: vec![1.0],
        diag: vec![2.0, 2.0],
        sup: vec![1.0],
    };
    assert!(solve_tridiagonal(&t, &[1.0]).is_err());
}

#[test]
fn newton_converges_on_single_gaussian_from_quantile_seed() {
    let law = GaussianMixture::new(vec![Component { mean: 0.0, std: 1.0, prob: 1.0 }]).unwrap();
    let n = 7;
    let seed: Vec<f64> = (1..=n)
        .map(|i| std_normal_inv_cdf((2 * i - 1) as f64 / (2 * n) as f64))
        .collect();
    let start = Grid::new(seed).unwrap();
    let d0 = distortion(&law, &start);
    let out = newton_solve(&law, start, &NewtonOptions { nr_iters: 8, grad_tol: 1e-12 }).unwrap();
    assert!(out.residual <= 1e-12, "residual {}", out.residual);
    assert!(out.distortion <= d0);
    assert!(out.grid.points().windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn newton_affine_equivariance() {
    // The optimal grid of N(m, v²) is m + v·(optimal grid of N(0,1)).
    let (m, v) = (3.0, 2.0);
    let std_law = GaussianMixture::new(vec![Component { mean: 0.0, std: 1.0, prob: 1.0 }]).unwrap();
    let law = GaussianMixture::new(vec![Component { mean: m, std: v, prob: 1.0 }]).unwrap();
    let n = 9;
    let seed: Vec<f64> = (1..=n)
        .map(|i| std_normal_inv_cdf((2 * i - 1) as f64 / (2 * n) as f64))
        .collect();
    let opts = NewtonOptions { nr_iters: 40, grad_tol: 1e-14 };
    let z = newton_solve(&std_law, Grid::new(seed.clone()).unwrap(), &opts).unwrap();
    let mapped: Vec<f64> = seed.iter().map(|&s| m + v * s).collect();
    let g = newton_solve(&law, Grid::new(mapped).unwrap(), &opts).unwrap();
    for (zi, gi) in z.grid.points().iter().zip(g.grid.points()) {
        assert!((m + v * zi - gi).abs() < 1e-12, "affine image mismatch");
    }
    // Distortion scales by v².
    assert!((g.distortion - v * v * z.distortion).abs() < 1e-12);
}

#[test]
fn newton_never_worsens_distortion() {
    let law = two_component_law();
    let start = Grid::new(vec![-2.0, -0.5, 0.1, 0.4, 3.0]).unwrap();
    let d0 = distortion(&law, &start);
    let out = newton_solve(&law, start, &NewtonOptions::default()).unwrap();
    assert!(out.distortion <= d0);
}

#[test]
fn newton_step_preserves_ordering() {
    let law = two_component_law();
    let grid = Grid::new(vec![-2.0, 0.0, 0.1, 2.5]).unwrap();
    let next = newton_step(&law, &grid).unwrap();
    assert!(next.points().windows(2).all(|w| w[0] < w[1]));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn newton_outcome_invariants(
        means in proptest::collection::vec(-2.0f64..2.0, 2..4),
        seed_spread in 0.5f64..3.0,
    ) {
        let k = means.len();
        let comps: Vec<Component> = means
            .iter()
            .map(|&m| Component { mean: m, std: 0.3 + m.abs() * 0.1, prob: 1.0 / k as f64 })
            .collect();
        let law = GaussianMixture::new(comps).unwrap();
        let n = 6usize;
        let pts: Vec<f64> = (0..n).map(|i| -seed_spread + 2.0 * seed_spread * i as f64 / (n - 1) as f64).collect();
        let start = Grid::new(pts).unwrap();
        let d0 = distortion(&law, &start);
        let out = newton_solve(&law, start, &NewtonOptions { nr_iters: 12, grad_tol: 1e-11 }).unwrap();
        prop_assert!(out.grid.points().windows(2).all(|w| w[0] < w[1]));
        prop_assert!(out.distortion <= d0 + 1e-15);
        prop_assert!(out.distortion >= 0.0);
        // Residual reported must match a fresh evaluation.
        let eval = evaluate(&law, &out.grid);
        prop_assert!((eval.residual() - out.residual).abs() < 1e-15);
    }
}
