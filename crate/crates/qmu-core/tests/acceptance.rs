//! Acceptance criteria, one line each: `criterion N PASS|FAIL <summary> (<runtime>)`.
//!
//! Runs without the libtest harness so the lines always reach the console.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, SQRT_2};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::Rng;

use qmu_core::errmetrics::{
    calibration_error, default_schedule, eps_no_from_moments, eps_no_from_scheme, moment_bounds,
    three_state_eps, w2, w2_lp_oracle, w2_observables_worst, w2_quantile, Distribution, StateSearchPolicy,
};
use qmu_core::observables::{spectral_measure, BlochObservable, QubitTriple};
use qmu_core::opalg::{
    norm3, pauli, random_density, random_hermitian, random_unit3, scale3, sub3,
    ComplexMatrix,
};
use qmu_core::relations::{phase_space_relation_check, qubit_error_bound, qubit_joint_feasible};
use qmu_core::rng;
use qmu_core::scenarios::{run_all, run_scenario, run_suite, sweep, RunConfig};
use qmu_core::schemes::grid::{phase_space_marginals, von_neumann_scheme, GridState, GridSystem, ProbeState};
use qmu_core::schemes::induced_observable;
use qmu_core::schemes::library::random_qubit_scheme;

const Z: [f64; 3] = [0.0, 0.0, 1.0];
const X: [f64; 3] = [1.0, 0.0, 0.0];

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

type Check = fn() -> Outcome;

fn criterion_1() -> Outcome {
    let t = QubitTriple::default();
    let g = t.gamma;
    let c = t.observable();
    let id = ComplexMatrix::identity(2);
    let mean_defect = (c.first_moment().matrix() - &pauli::dot([0.5 * g, -0.5 * g, 0.0])).frobenius_norm();
    let v_expected = (&id + &pauli::dot([FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0])).scale(2.0 * (1.0 - g) * 0.5);
    let v_defect = (c.intrinsic_noise().matrix() - &v_expected).frobenius_norm();
    let a = spectral_measure(&t.first_moment());
    let rho0 = t.null_noise_state();
    let eps = eps_no_from_moments(&a.operator(), &c, &rho0).unwrap();
    let w = w2(&a.observable().distribution_of(&rho0).unwrap(), &c.distribution_of(&rho0).unwrap());
    outcome(
        (g - (2.0 - SQRT_2)).abs() < 1e-15 && mean_defect < 1e-12 && v_defect < 1e-12 && eps <= 1e-10 && w > 0.1,
        format!("ε_NO(ρ₀) = {eps:.2e} (≤ 1e-10), w2 = {w:.6} (> 0.1), moment defects {mean_defect:.1e}/{v_defect:.1e}"),
    )
}

fn criterion_2() -> Outcome {
    let mut worst = 0.0f64;
    for k in 0..1000u64 {
        let mut r = rng::stream(2, k);
        let m = random_qubit_scheme(&mut r);
        let a = random_hermitian(2, &mut r);
        let rho = random_density(2, &mut r);
        let c = induced_observable(&m);
        let s = eps_no_from_scheme(&m, &a, &rho).unwrap();
        let mo = eps_no_from_moments(&a, &c, &rho).unwrap();
        let th = three_state_eps(&a, &c, &rho).unwrap();
        worst = worst.max((s - mo).abs()).max((th - mo).abs());
    }
    let grid = GridSystem::new(1024, 12.0).unwrap();
    let vn = von_neumann_scheme(grid, 2.0, ProbeState::Gaussian { center: 0.0, width: 0.8 }).unwrap();
    let mut grid_worst = 0.0f64;
    for (q, w, p) in [(0.5, FRAC_1_SQRT_2, 0.3), (-1.0, 1.2, 0.0), (0.0, 0.5, -1.0)] {
        let psi = GridState::gaussian(grid, q, w, p).unwrap();
        let mo = vn.eps_no_moments(&psi);
        grid_worst = grid_worst
            .max((vn.eps_no_scheme(&psi).unwrap() - mo).abs())
            .max((vn.eps_no_three_state(&psi) - mo).abs());
    }
    outcome(
        worst <= 1e-9 && grid_worst <= 1e-9,
        format!("max form disagreement: qubit {worst:.2e} over 1000 draws, grid {grid_worst:.2e} (≤ 1e-9)"),
    )
}

fn criterion_3() -> Outcome {
    let none = BTreeMap::new();
    let cfg = RunConfig::default();
    let mut bundled_ok = true;
    let mut bundled_min = f64::INFINITY;
    for name in ["identity-scheme", "swap-scheme"] {
        let r = run_scenario(name, &none, &cfg).unwrap();
        let get = |rel: &str| r.verdicts.iter().find(|v| v.relation == rel).unwrap().clone();
        let (naive, oz, br) = (get("naive-heisenberg"), get("ozawa"), get("branciard"));
        bundled_ok &= r.passed && naive.lhs < naive.rhs && oz.slack >= -1e-9 && br.slack >= -1e-9;
        bundled_min = bundled_min.min(oz.slack).min(br.slack);
    }
    let oz = run_suite("ozawa", &cfg).unwrap();
    let br = run_suite("branciard", &cfg).unwrap();
    let naive = run_suite("naive-heisenberg", &cfg).unwrap();
    let found = naive.searches.iter().all(|s| s.search.found);
    outcome(
        bundled_ok && oz.draws >= 10_000 && br.draws >= 10_000 && oz.min_slack >= -1e-9 && br.min_slack >= -1e-9 && found,
        format!(
            "naive violated on identity and swap; Ozawa/Branciard min slack bundled {bundled_min:.3e}, random {:.3e}/{:.3e} over {} draws each",
            oz.min_slack, br.min_slack, oz.draws
        ),
    )
}

fn random_distribution<R: Rng + ?Sized>(r: &mut R) -> Distribution {
    let n = r.gen_range(1..=10);
    let pairs: Vec<(f64, f64)> = (0..n).map(|_| (r.gen_range(-3.0..3.0), r.gen_range(0.01..1.0))).collect();
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    Distribution::from_pairs(pairs.into_iter().map(|(x, w)| (x, w / total))).unwrap()
}

fn criterion_4() -> Outcome {
    let mut lp_gap = 0.0f64;
    let mut axioms = true;
    for k in 0..1000u64 {
        let mut r = rng::stream(4, k);
        let (a, b, c) = (random_distribution(&mut r), random_distribution(&mut r), random_distribution(&mut r));
        let q = w2_quantile(&a, &b).value;
        lp_gap = lp_gap.max((w2_lp_oracle(&a, &b).unwrap().value - q).abs());
        let (ab, ba, ac, bc) = (q, w2(&b, &a), w2(&a, &c), w2(&b, &c));
        axioms &= w2(&a, &a) <= 1e-12
            && (ab - ba).abs() <= 1e-12
            && ac <= ab + bc + 1e-9
            && moment_bounds(&a, &b).contains(ab, 1e-9);
    }
    // smeared sharp observables: qubit by search, grid by the von Neumann model
    let mu = Distribution::new(vec![-0.7, 0.1, 0.9], vec![0.3, 0.5, 0.2]).unwrap();
    let a = spectral_measure(&pauli::hermitian(Z));
    let smeared = a.observable().smear(&mu);
    let policy = StateSearchPolicy {
        closed_form: false,
        ..StateSearchPolicy::default()
    };
    let qubit = w2_observables_worst(a.observable(), &smeared, &policy).unwrap().evaluated;
    let qubit_gap = (qubit - mu.second_moment().sqrt()).abs();
    let grid = GridSystem::new(1024, 12.0).unwrap();
    let vn = von_neumann_scheme(grid, 2.0, ProbeState::Gaussian { center: 0.3, width: 0.8 }).unwrap();
    let noise = vn.noise_distribution();
    let psi = GridState::ground_state(grid).unwrap();
    let grid_gap = (vn.worst_case(&[psi]).unwrap() - noise.second_moment().sqrt()).abs();
    outcome(
        lp_gap <= 1e-9 && axioms && qubit_gap <= 1e-6 && grid_gap <= 1e-6,
        format!(
            "quantile vs LP max gap {lp_gap:.2e} over 1000 pairs; axioms and moment sandwich {}; w2(A, μ*A) gap qubit {qubit_gap:.2e}, grid {grid_gap:.2e}",
            if axioms { "hold" } else { "FAIL" }
        ),
    )
}

fn criterion_5() -> Outcome {
    let a = spectral_measure(&pauli::hermitian(Z));
    let aop = a.operator();
    let mut sup_gap = 0.0f64;
    let mut eps_excess = f64::NEG_INFINITY;
    let mut parallel_gap = 0.0f64;
    let mut identity_gap = 0.0f64;
    for k in 0..100u64 {
        let mut r = rng::stream(5, k);
        let c0 = r.gen_range(0.2..1.8);
        let cap = f64::min(c0, 2.0 - c0);
        let cv = scale3(random_unit3(&mut r), cap * r.gen::<f64>());
        let cobs = BlochObservable::new(c0, cv).unwrap().observable();
        let closed = (2.0 * (1.0 - c0).abs() + 2.0 * norm3(sub3(Z, cv))).sqrt();
        let policy = StateSearchPolicy {
            seed: k,
            closed_form: false,
            samples: 64,
            ..StateSearchPolicy::default()
        };
        let found = w2_observables_worst(a.observable(), &cobs, &policy).unwrap().evaluated;
        sup_gap = sup_gap.max((found - closed).abs());

        // covariant c: ε_NO never exceeds Δ(A,C); equality for c ∥ a
        let cov = scale3(random_unit3(&mut r), r.gen::<f64>());
        let cov_obs = BlochObservable::covariant(cov).unwrap().observable();
        let delta = (2.0 * norm3(sub3(Z, cov))).sqrt();
        let t = r.gen::<f64>();
        let par_obs = BlochObservable::covariant(scale3(Z, t)).unwrap().observable();
        let par_delta = (2.0 * (1.0 - t)).sqrt();
        for _ in 0..10 {
            let rho = random_density(2, &mut r);
            let e = eps_no_from_moments(&aop, &cov_obs, &rho).unwrap();
            eps_excess = eps_excess.max(e - delta);
            let v = cov_obs.intrinsic_noise().expectation(&rho);
            identity_gap = identity_gap.max((e * e - (v + 0.25 * delta.powi(4))).abs());
            parallel_gap = parallel_gap.max((eps_no_from_moments(&aop, &par_obs, &rho).unwrap() - par_delta).abs());
        }
    }
    outcome(
        sup_gap <= 1e-6 && eps_excess <= 1e-12 && parallel_gap <= 1e-9 && identity_gap <= 1e-9,
        format!(
            "sampled sup vs closed form max gap {sup_gap:.2e} over 100 (c₀, c); max ε_NO − Δ {eps_excess:.2e}; c ∥ a gap {parallel_gap:.2e}; ε² identity gap {identity_gap:.2e}"
        ),
    )
}

fn criterion_6() -> Outcome {
    let target = 4.0 - 2.0 * SQRT_2;
    let res = qubit_error_bound(Z, X).unwrap();
    let opt = qubit_joint_feasible(Z, X, scale3(Z, FRAC_1_SQRT_2), scale3(X, FRAC_1_SQRT_2))
        .unwrap()
        .expect("c = a/√2, d = b/√2 is feasible");
    let min_eig = opt.min_effect_eigenvalue();
    let rows = sweep("theorem3", 0.0, FRAC_PI_2, 50, &RunConfig::default()).unwrap();
    let min_slack = rows.iter().map(|r| r.slack).fold(f64::INFINITY, f64::min);
    outcome(
        (res.objective - target).abs() <= 1e-4 && (res.bound - target).abs() < 1e-12 && min_eig >= -1e-12 && min_slack >= -1e-9,
        format!(
            "minimum {:.8} vs 4−2√2 = {target:.8}; optimal joint effects min eigenvalue {min_eig:.3e}; sweep min slack {min_slack:.2e} over 50 angles",
            res.objective
        ),
    )
}

fn criterion_7() -> Outcome {
    let grid = GridSystem::new(1024, 12.0).unwrap();
    let tau = GridState::ground_state(grid).unwrap();
    let (mu, nu) = phase_space_marginals(&tau).unwrap();
    let std_product = mu.std_dev() * nu.std_dev();
    let moment_product = mu.second_moment() * nu.second_moment();
    let mut others = true;
    for t in [
        GridState::squeezed(grid, 2.0).unwrap(),
        GridState::squeezed(grid, 0.5).unwrap(),
        GridState::coherent(grid, 1.0, 0.5).unwrap(),
        GridState::gaussian(grid, -0.8, 1.1, 0.7).unwrap(),
    ] {
        others &= phase_space_relation_check(&t).unwrap().iter().all(|v| v.holds);
    }
    outcome(
        (std_product - 0.5).abs() <= 1e-4 && (moment_product - 0.25).abs() <= 1e-3 && others,
        format!(
            "ground state Δμ·Δν = {std_product:.8}, μ[x²]ν[x²] = {moment_product:.8}; squeezed and displaced {}",
            if others { "satisfy both" } else { "VIOLATE" }
        ),
    )
}

fn criterion_8() -> Outcome {
    let a = spectral_measure(&pauli::hermitian(Z));
    let mut qubit_gap = 0.0f64;
    for gp in [0.0, 0.25, 0.5, 0.8, 0.95, 1.0] {
        let c = BlochObservable::covariant(scale3(Z, gp)).unwrap().observable();
        let cal = calibration_error(&a, &c, &default_schedule(), 0).unwrap();
        let expected = (2.0 * (1.0 - gp)).sqrt();
        qubit_gap = qubit_gap
            .max((cal.extrapolated - expected).abs())
            .max((cal.limit - expected).abs());
    }
    let grid = GridSystem::new(1024, 12.0).unwrap();
    let vn = von_neumann_scheme(grid, 2.0, ProbeState::Gaussian { center: 0.0, width: 0.8 }).unwrap();
    let rms = vn.noise_distribution().second_moment().sqrt();
    let cal = vn.calibration(&default_schedule()).unwrap();
    let grid_gap = (cal.schedule.last().unwrap().value - rms)
        .abs()
        .max((cal.extrapolated - rms).abs());
    outcome(
        qubit_gap <= 1e-6 && grid_gap <= 1e-3,
        format!("qubit Δ_c (schedule extrapolation and exact limit) vs √(2(1−γ′)) max gap {qubit_gap:.2e}; grid Δ_c vs √μ[x²] gap {grid_gap:.2e}"),
    )
}

fn criterion_9() -> Outcome {
    let cfg = RunConfig::default();
    let first = serde_json::to_vec(&run_all(&cfg).unwrap()).unwrap();
    let second = serde_json::to_vec(&run_all(&cfg).unwrap()).unwrap();
    outcome(
        first == second,
        format!("two full-suite runs at seed 0: {} bytes, identical = {}", first.len(), first == second),
    )
}

fn main() -> ExitCode {
    let criteria: [(Check, Duration); 9] = [
        (criterion_1, Duration::from_secs(1)),
        (criterion_2, Duration::from_secs(30)),
        (criterion_3, Duration::from_secs(120)),
        (criterion_4, Duration::from_secs(60)),
        (criterion_5, Duration::from_secs(60)),
        (criterion_6, Duration::from_secs(120)),
        (criterion_7, Duration::from_secs(30)),
        (criterion_8, Duration::from_secs(60)),
        (criterion_9, Duration::from_secs(600)),
    ];
    let mut failed = 0;
    for (k, (check, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = check();
        let elapsed = start.elapsed();
        let in_time = elapsed <= *budget;
        let ok = o.passed && in_time;
        if !ok {
            failed += 1;
        }
        println!(
            "criterion {} {} {} ({:.3} s, budget {} s{})",
            k + 1,
            if ok { "PASS" } else { "FAIL" },
            o.detail,
            elapsed.as_secs_f64(),
            budget.as_secs(),
            if in_time { "" } else { ", over budget" }
        );
    }
    println!("{} of 9 criteria passed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
