use hvi_core::analysis::{run_study, solve_level, Mode, ReferenceSpec, StudyConfig};
use hvi_core::assembly::{assemble_bilinear, assemble_load, assemble_penalty, ProblemCoefficients};
use hvi_core::maxwell::{MaxwellState, MaxwellStepper};
use hvi_core::mesh::build_structured;
use hvi_core::space::basis_values;
use hvi_core::{cg_solve, problem, CholeskyFactor, CsrMatrix, DgSpace};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn space(level: u32) -> DgSpace {
    DgSpace::new(build_structured(level).unwrap()).unwrap()
}

/// `sum_k c_k A_k` for matrices on the same pattern family.
fn combine(parts: &[(f64, &CsrMatrix)]) -> CsrMatrix {
    let n = parts[0].1.dim();
    let mut triplets = Vec::new();
    for (c, m) in parts {
        for i in 0..n {
            for (j, v) in m.row(i) {
                triplets.push((i, j, c * v));
            }
        }
    }
    CsrMatrix::from_triplets(n, triplets).unwrap()
}

#[test]
fn time_step_operator_is_rescaled_stationary_operator() {
    let s = space(2);
    let eta = 1e3;
    let base = assemble_bilinear(&s, &ProblemCoefficients::new(1.0, 1.0, eta).unwrap());
    let mass = combine(&[
        (
            1.0,
            &assemble_bilinear(&s, &ProblemCoefficients::new(2.0, 1.0, eta).unwrap()),
        ),
        (-1.0, &base),
    ]);
    let curl = combine(&[
        (
            1.0,
            &assemble_bilinear(&s, &ProblemCoefficients::new(1.0, 0.5, eta).unwrap()),
        ),
        (-1.0, &base),
    ]);
    for (k, te, tm) in [(0.1, 1.0, 1.0), (0.02, 3.0, 0.5)] {
        let state = MaxwellState::new(&s, k, te, tm).unwrap();
        let stepper = MaxwellStepper::new(&s, &state, eta).unwrap();
        let got = stepper.solver().matrix();
        let direct = assemble_bilinear(&s, &ProblemCoefficients::new(te / k, tm / k, eta).unwrap());
        assert!(got.max_abs_diff(&direct) <= 1e-14 * got.max_abs());
        // the combination amplifies rounding by up to te/k
        let expect = combine(&[(1.0, &base), (te / k - 1.0, &mass), (k / tm - 1.0, &curl)]);
        let rel = got.max_abs_diff(&expect) / got.max_abs();
        assert!(rel < 1e-13, "k = {k}: {rel:e}");
    }
}

#[test]
fn projected_solution_jumps_shrink_under_refinement() {
    let coeffs = ProblemCoefficients::default();
    let jump_energy = |level| {
        let s = space(level);
        let p = assemble_penalty(&s, &coeffs);
        let e = s.l2_project(problem::exact_linear);
        p.bilinear(&e.values, &e.values)
    };
    let energies: Vec<f64> = (1..=5).map(jump_energy).collect();
    for w in energies.windows(2) {
        assert!(w[0] / w[1] >= 1.8, "{energies:?}");
    }
}

#[test]
fn discrete_solutions_are_uniformly_bounded() {
    let cfg = StudyConfig::default();
    let norms: Vec<f64> = (1..=5)
        .map(|l| {
            let sol = solve_level(l, &cfg).unwrap();
            sol.space.energy_norm(&sol.result.e, cfg.eta)
        })
        .collect();
    for w in norms.windows(2) {
        assert!((w[0] - w[1]).abs() / w[1] < 0.1, "{norms:?}");
    }
}

#[test]
fn hemivariational_residual_is_nonnegative_on_basis_directions() {
    let cfg = StudyConfig::default();
    let sol = solve_level(3, &cfg).unwrap();
    let s = &sol.space;
    let a = assemble_bilinear(s, &cfg.coefficients().unwrap());
    let f = assemble_load(s, problem::source);
    let pot = cfg.potential().unwrap();
    let ae = a.mul_vec(&sol.result.e.values);
    let samples = s.sample(&sol.result.e);
    let nq = s.rule().len();
    let floor = -10.0 * cfg.eps_stop * f.norm();
    for i in 0..s.num_dofs() {
        let (k, local) = (i / 6, i % 6);
        let det = s.geometry(k).det;
        for sign in [1.0, -1.0] {
            let mut r = sign * (ae[i] - f.values[i]);
            for q in 0..nq {
                let phi = basis_values(s.quad_hats(q))[local];
                let v = [sign * phi[0], sign * phi[1]];
                r += s.rule().weights[q] * det * pot.psi0(samples.values[k * nq + q], v);
            }
            assert!(r >= floor, "dof {i}, sign {sign}: {r:e}");
        }
    }
}

#[test]
fn cg_agrees_with_cholesky() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let n = 50;
    for _ in 0..20 {
        let b: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let dense: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        (0..n).map(|l| b[i][l] * b[j][l]).sum::<f64>()
                            + if i == j { 1.0 } else { 0.0 }
                    })
                    .collect()
            })
            .collect();
        let a = CsrMatrix::from_dense(&dense).unwrap();
        let rhs: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        check_agreement(&a, &rhs);
    }
    for level in 0..=2 {
        let s = space(level);
        let a = assemble_bilinear(&s, &ProblemCoefficients::default());
        let rhs = assemble_load(&s, problem::source).values;
        check_agreement(&a, &rhs);
    }
}

fn check_agreement(a: &CsrMatrix, rhs: &[f64]) {
    let direct = CholeskyFactor::new(a).unwrap().solve(rhs).unwrap();
    let (iter, stats) = cg_solve(a, rhs, &vec![0.0; rhs.len()], 1e-12, 10 * rhs.len()).unwrap();
    assert!(stats.converged);
    let scale = direct.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let gap = direct
        .iter()
        .zip(&iter)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    assert!(gap <= 1e-8 * scale, "gap {gap:e}");
}

#[test]
fn study_report_is_deterministic() {
    let cfg = StudyConfig {
        levels: vec![1, 2, 3],
        reference: ReferenceSpec::Nested(4),
        ..Default::default()
    };
    let first = run_study(&cfg).unwrap().to_csv_string();
    let second = run_study(&cfg).unwrap().to_csv_string();
    assert_eq!(first, second);
}

#[test]
fn linear_study_against_exact_solution() {
    let cfg = StudyConfig {
        levels: vec![1, 2, 3, 4],
        reference: ReferenceSpec::Analytic,
        mode: Mode::Linear,
        ..Default::default()
    };
    let report = run_study(&cfg).unwrap();
    for row in &report.rows[1..] {
        assert!(row.l2_order.unwrap() > 1.8, "{row:?}");
        assert!((0.85..1.15).contains(&row.energy_order.unwrap()), "{row:?}");
        assert_eq!(row.uzawa_iterations, 1);
    }
}
