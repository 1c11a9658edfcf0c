use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, SQRT_2};

use num_complex::Complex64;

use super::{Ctx, Runner, ScenarioKind};
use crate::errmetrics::distance::{calibration_error, default_schedule, w2_observables_worst};
use crate::errmetrics::noise::{
    eps_no_from_moments, eps_no_from_scheme, error_report, eta_no_from_instrument,
    eta_no_from_scheme, noise_terms, three_state_eps, value_comparison_eps,
};
use crate::errmetrics::wasserstein::w2;
use crate::error::Result;
use crate::observables::{spectral_measure, BlochObservable, Observable, QubitTriple, SharpObservable};
use crate::opalg::{norm3, pauli, scale3, sub3, ComplexMatrix, DensityOperator, HermitianOperator};
use crate::relations::{
    branciard_verdict, check_branciard, check_branciard_joint, check_naive_heisenberg,
    check_ozawa, check_unbiased_tradeoffs, error_disturbance, phase_space_relation_check,
    qubit_epsno_sum_check, qubit_error_bound, qubit_joint_feasible, ErrorDisturbance,
};
use crate::schemes::grid::{
    grid_norm_sqr, max_probability_gap, operator_matrix, phase_space_marginals, shifted_oscillator,
    spectral_distribution, von_neumann_scheme, GridState, GridSystem, ProbeState,
};
use crate::schemes::library::{identity_scheme, lueders_scheme, swap_scheme};
use crate::schemes::{
    distorted_observable, induced_instrument, induced_observable, lueders_instrument,
    sequential_biobservable, three_step_comparison,
};

const ANALYTIC: &str = "analytic";
const IDENTITY: &str = "identity";
const ORACLE: &str = "numerical-oracle";

pub(super) type Spec = (
    &'static str,
    ScenarioKind,
    &'static str,
    &'static [(&'static str, f64)],
    Runner,
);

const STATE_Y: [(&str, f64); 2] = [("theta", FRAC_PI_2), ("phi", FRAC_PI_2)];

pub(super) fn entries() -> Vec<Spec> {
    vec![
        (
            "example8-unbiased-zero",
            ScenarioKind::QubitApprox,
            "three-outcome unbiased approximator with vanishing noise-operator error at one state",
            &[],
            example8,
        ),
        (
            "identity-scheme",
            ScenarioKind::Scheme,
            "U = 1, pointer σ₃ on a probe copy: trivial approximator, no disturbance",
            &[
                ("theta", FRAC_PI_2),
                ("phi", FRAC_PI_2),
                ("sigma_theta", FRAC_PI_2),
                ("sigma_phi", FRAC_PI_2),
            ],
            identity,
        ),
        (
            "swap-scheme",
            ScenarioKind::Scheme,
            "U = swap, pointer σ₃: exact measurement, object left in the probe state",
            &[
                ("theta", FRAC_PI_2),
                ("phi", FRAC_PI_2),
                ("sigma_theta", FRAC_PI_2),
                ("sigma_phi", FRAC_PI_2),
            ],
            swap,
        ),
        (
            "trivial-approximator",
            ScenarioKind::QubitApprox,
            "C = A_ρ·1 reproduces the target distribution at ρ",
            &[("theta", 1.0), ("phi", 0.4)],
            trivial,
        ),
        (
            "covariant-qubit",
            ScenarioKind::QubitApprox,
            "σ₃ approximated by a covariant Bloch observable",
            &[("gamma", 0.8), ("tilt", 0.3), ("theta", 1.1), ("phi", 0.7)],
            covariant,
        ),
        (
            "theorem3-orthogonal",
            ScenarioKind::QubitJoint,
            "optimal covariant joint approximation of two spin components",
            &[("angle", FRAC_PI_2), ("theta", FRAC_PI_2), ("phi", FRAC_PI_2)],
            theorem3,
        ),
        (
            "lueders-sequential",
            ScenarioKind::Scheme,
            "Lüders measurement of σ₃ followed by σ₁",
            &STATE_Y,
            lueders_sequential,
        ),
        (
            "husimi-saturation",
            ScenarioKind::Grid,
            "phase-space measurement generated by the oscillator ground state",
            &[],
            husimi,
        ),
        (
            "squeezed-phase-space",
            ScenarioKind::Grid,
            "phase-space measurement generated by a squeezed Gaussian",
            &[("s", 2.0)],
            squeezed,
        ),
        (
            "displaced-phase-space",
            ScenarioKind::Grid,
            "phase-space measurement generated by a displaced ground state",
            &[("q", 1.0), ("p", 0.5)],
            displaced,
        ),
        (
            "von-neumann-position",
            ScenarioKind::Grid,
            "unbiased von Neumann position measurement with a Gaussian probe",
            &[
                ("lambda", 2.0),
                ("probe_width", 0.8),
                ("q0", 0.5),
                ("p0", 0.3),
                ("state_width", FRAC_1_SQRT_2),
            ],
            von_neumann,
        ),
        (
            "q-vs-minus-q",
            ScenarioKind::Grid,
            "position approximated by the sharp observable -Q",
            &[("s", 1.0)],
            q_vs_minus_q,
        ),
        (
            "oscillator-shift-double-zero",
            ScenarioKind::Grid,
            "C[x] = Q + αH' approximating Q and Q + βH': both errors vanish on the ground state",
            &[("alpha", 0.5), ("beta", 1.0)],
            double_zero,
        ),
        (
            "rank-one-shift",
            ScenarioKind::Grid,
            "sharp approximator Q + |φ⟩⟨φ| with φ = κψ₀",
            &[("kappa", 0.5)],
            rank_one_shift,
        ),
    ]
}

fn bloch_angles(theta: f64, phi: f64) -> [f64; 3] {
    [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()]
}

fn state(theta: f64, phi: f64) -> Result<DensityOperator> {
    DensityOperator::bloch(bloch_angles(theta, phi))
}

fn sharp(v: [f64; 3]) -> SharpObservable {
    spectral_measure(&pauli::hermitian(v))
}

const Z: [f64; 3] = [0.0, 0.0, 1.0];
const X: [f64; 3] = [1.0, 0.0, 0.0];

fn std_dev(op: &HermitianOperator, rho: &DensityOperator) -> f64 {
    op.variance(rho).max(0.0).sqrt()
}

/// `√(Δ(X_ρ)² + Δ(X_σ)² + (⟨X⟩_ρ - ⟨X⟩_σ)²)`: `X` measured on two
/// independent systems.
fn independent_copies(op: &HermitianOperator, rho: &DensityOperator, sigma: &DensityOperator) -> f64 {
    let d = op.expectation(rho) - op.expectation(sigma);
    (op.variance(rho) + op.variance(sigma) + d * d).max(0.0).sqrt()
}

fn example8(ctx: &mut Ctx) -> Result<()> {
    let t = QubitTriple::default();
    let g = t.gamma;
    let c = t.observable();
    let aop = t.first_moment();
    let a = spectral_measure(&aop);
    let rho0 = t.null_noise_state();

    let expected_c1 = pauli::hermitian([0.5 * g, -0.5 * g, 0.0]);
    ctx.expect_eq(
        "first_moment_defect",
        (c.first_moment().matrix() - expected_c1.matrix()).frobenius_norm(),
        0.0,
        1e-12,
        ANALYTIC,
    );
    let s = FRAC_1_SQRT_2;
    let expected_v = (&ComplexMatrix::identity(2) + &pauli::dot([s, s, 0.0])).scale(1.0 - g);
    ctx.expect_eq(
        "intrinsic_noise_defect",
        (c.intrinsic_noise().matrix() - &expected_v).frobenius_norm(),
        0.0,
        1e-12,
        ANALYTIC,
    );
    let report = error_report(&a, &c, &rho0, &ctx.config.search_policy())?;
    ctx.expect_eq("eps_no", report.eps_no, 0.0, 1e-10, ANALYTIC);
    let ts = three_state_eps(&aop, &c, &rho0)?;
    ctx.expect_eq("three_state_eps_squared", ts * ts, 0.0, 1e-12, ANALYTIC);
    ctx.expect_gt("w2_state", report.w2_state, 0.1, ANALYTIC);
    ctx.quantity("gamma", g);
    ctx.quantity("three_state_eps", ts);
    ctx.quantity("error_report", &report);
    Ok(())
}

fn scheme_states(ctx: &Ctx) -> Result<(DensityOperator, DensityOperator)> {
    Ok((
        state(ctx.p("theta"), ctx.p("phi"))?,
        state(ctx.p("sigma_theta"), ctx.p("sigma_phi"))?,
    ))
}

fn record_ed(ctx: &mut Ctx, q: &ErrorDisturbance, rho: &DensityOperator) -> Result<()> {
    let naive = check_naive_heisenberg(q);
    if q.commutator > 1e-9 && q.eps * q.eta < 1e-12 {
        ctx.expect_holds(&naive, false, ANALYTIC);
    }
    let oz = check_ozawa(q);
    ctx.expect_holds(&oz, true, ANALYTIC);
    let br = check_branciard(q, rho)?;
    ctx.expect_holds(&br, true, ANALYTIC);
    ctx.quantity("error_disturbance", q);
    ctx.verdict(naive);
    ctx.verdict(oz);
    ctx.verdict(br);
    Ok(())
}

fn identity(ctx: &mut Ctx) -> Result<()> {
    let (rho, sigma) = scheme_states(ctx)?;
    let a = sharp(Z);
    let (aop, bop) = (a.operator(), pauli::hermitian(X));
    let m = identity_scheme(&a, &sigma)?;
    let c = induced_observable(&m);
    let q = error_disturbance(&m, &aop, &bop, &rho)?;
    ctx.expect_eq("eps_no", q.eps, independent_copies(&aop, &rho, &sigma), 1e-10, ANALYTIC);
    ctx.expect_eq("eta_no", q.eta, 0.0, 1e-10, ANALYTIC);
    ctx.expect_eq("eps_no_moments", eps_no_from_moments(&aop, &c, &rho)?, q.eps, 1e-9, IDENTITY);
    let vc = value_comparison_eps(&a, &c, &rho)?;
    ctx.expect_eq("eps_value_comparison", vc.value, q.eps, 1e-9, IDENTITY);
    let w = w2(&a.observable().distribution_of(&rho)?, &c.distribution_of(&rho)?);
    let direct = w2(&a.observable().distribution_of(&rho)?, &a.observable().distribution_of(&sigma)?);
    ctx.expect_eq("w2_state", w, direct, 1e-7, IDENTITY);
    if (rho.matrix() - sigma.matrix()).frobenius_norm() < 1e-12 {
        ctx.expect_eq("w2_state_at_sigma", w, 0.0, 1e-7, ANALYTIC);
        ctx.expect_eq("eps_over_delta_a", q.eps / std_dev(&aop, &rho).max(1e-300), SQRT_2, 1e-9, ANALYTIC);
    }
    ctx.quantity("error_report", error_report(&a, &c, &rho, &ctx.config.search_policy())?);
    record_ed(ctx, &q, &rho)
}

fn swap(ctx: &mut Ctx) -> Result<()> {
    let (rho, sigma) = scheme_states(ctx)?;
    let a = sharp(Z);
    let b = sharp(X);
    let (aop, bop) = (a.operator(), b.operator());
    let m = swap_scheme(&a, &sigma)?;
    let q = error_disturbance(&m, &aop, &bop, &rho)?;
    ctx.expect_eq("eps_no", q.eps, 0.0, 1e-10, ANALYTIC);
    ctx.expect_eq("eta_no", q.eta, independent_copies(&bop, &rho, &sigma), 1e-10, ANALYTIC);
    let inst = induced_instrument(&m);
    ctx.expect_eq("eta_no_instrument", eta_no_from_instrument(&inst, &bop, &rho)?, q.eta, 1e-9, IDENTITY);
    let distorted = distorted_observable(&inst, b.observable())?;
    let wd = w2(&b.observable().distribution_of(&rho)?, &distorted.distribution_of(&rho)?);
    let direct = w2(&b.observable().distribution_of(&rho)?, &b.observable().distribution_of(&sigma)?);
    ctx.expect_eq("w2_disturbance", wd, direct, 1e-7, IDENTITY);
    if (rho.matrix() - sigma.matrix()).frobenius_norm() < 1e-12 {
        ctx.expect_eq("eta_over_delta_b", q.eta / std_dev(&bop, &rho).max(1e-300), SQRT_2, 1e-9, ANALYTIC);
    }
    ctx.quantity("w2_disturbance", wd);
    record_ed(ctx, &q, &rho)
}

fn trivial(ctx: &mut Ctx) -> Result<()> {
    let rho = state(ctx.p("theta"), ctx.p("phi"))?;
    let a = sharp(Z);
    let aop = a.operator();
    let c = Observable::trivial(&a.observable().distribution_of(&rho)?, 2);
    let report = error_report(&a, &c, &rho, &ctx.config.search_policy())?;
    ctx.expect_eq("eps_no", report.eps_no, SQRT_2 * std_dev(&aop, &rho), 1e-10, ANALYTIC);
    ctx.expect_eq("w2_state", report.w2_state, 0.0, 1e-7, ANALYTIC);
    let vc = value_comparison_eps(&a, &c, &rho)?;
    ctx.expect_eq("eps_value_comparison", vc.value, report.eps_no, 1e-9, IDENTITY);
    ctx.quantity("error_report", &report);
    Ok(())
}

fn covariant(ctx: &mut Ctx) -> Result<()> {
    let (g, tilt) = (ctx.p("gamma"), ctx.p("tilt"));
    let cv = [g * tilt.sin(), 0.0, g * tilt.cos()];
    let rho = state(ctx.p("theta"), ctx.p("phi"))?;
    let a = sharp(Z);
    let aop = a.operator();
    let c = BlochObservable::covariant(cv)?.observable();
    let policy = ctx.config.search_policy();
    let report = error_report(&a, &c, &rho, &policy)?;
    let closed = (2.0 * norm3(sub3(Z, cv))).sqrt();
    let searched = w2_observables_worst(
        a.observable(),
        &c,
        &crate::errmetrics::distance::StateSearchPolicy {
            closed_form: false,
            ..policy
        },
    )?;
    ctx.expect_eq("w2_worst_closed_form", report.w2_worst.finite().unwrap_or(f64::NAN), closed, 1e-12, ANALYTIC);
    ctx.expect_eq("w2_worst_search", searched.evaluated, closed, 1e-6, ORACLE);
    let eps2 = 1.0 - g * g + norm3(sub3(Z, cv)).powi(2);
    ctx.expect_eq("eps_no", report.eps_no, eps2.sqrt(), 1e-10, ANALYTIC);
    ctx.expect_eq(
        "eps_squared_decomposition",
        report.eps_no.powi(2),
        report.intrinsic_noise_expectation + 0.25 * closed.powi(4),
        1e-9,
        IDENTITY,
    );
    ctx.expect_le("eps_minus_worst", report.eps_no - closed, 0.0, 1e-9, ANALYTIC);
    let cal = calibration_error(&a, &c, &default_schedule(), policy.seed)?;
    let expected = (2.0 * (1.0 - cv[2])).sqrt();
    ctx.expect_eq("calibration_limit", cal.limit, expected, 1e-6, ANALYTIC);
    let last = cal.schedule.last().map(|p| p.value).unwrap_or(f64::NAN);
    ctx.expect_eq("calibration_last_schedule_point", last, expected, 1e-2, ANALYTIC);
    ctx.quantity("calibration", &cal);
    ctx.quantity("noise_terms", noise_terms(&aop, &c, &rho)?);
    ctx.quantity("error_report", &report);
    ctx.quantity("w2_worst_search", &searched);
    Ok(())
}

fn theorem3(ctx: &mut Ctx) -> Result<()> {
    let angle = ctx.p("angle");
    let a = Z;
    let b = [angle.sin(), 0.0, angle.cos()];
    let rho = state(ctx.p("theta"), ctx.p("phi"))?;
    let res = qubit_error_bound(a, b)?;
    let bound = SQRT_2 * (norm3(sub3(a, b)) + norm3(crate::opalg::add3(a, b)) - 2.0);
    ctx.expect_eq("bound", res.bound, bound, 1e-12, ANALYTIC);
    ctx.expect_eq("objective_minus_bound", res.objective - res.bound, 0.0, 1e-4, ORACLE);
    ctx.expect_le("bound_minus_objective", res.bound - res.objective, 0.0, 1e-9, ANALYTIC);
    ctx.expect_le("optimizer_negativity", -res.model.min_effect_eigenvalue(), 0.0, 1e-10, ANALYTIC);
    if (angle - FRAC_PI_2).abs() < 1e-12 {
        let off = norm3(sub3(res.model.c, scale3(a, FRAC_1_SQRT_2)))
            .max(norm3(sub3(res.model.d, scale3(b, FRAC_1_SQRT_2))));
        ctx.expect_le("optimizer_distance", off, 0.0, 1e-3, ANALYTIC);
    }
    ctx.quantity("search", &res);

    let sum = qubit_epsno_sum_check(&res.model, &rho)?;
    ctx.expect_holds(&sum, true, ANALYTIC);
    ctx.verdict(sum);
    let br = check_branciard_joint(&res.model, &rho)?;
    ctx.expect_holds(&br, true, ANALYTIC);
    ctx.verdict(br);

    // unbiased pair c = t a, d = t b on the feasibility boundary
    let t = 2.0 / (norm3(crate::opalg::add3(a, b)) + norm3(sub3(a, b)));
    let t = t.min(1.0);
    if let Some(model) = qubit_joint_feasible(a, b, scale3(a, t), scale3(b, t))? {
        let joint = model.unbiased_joint()?;
        let verdicts = check_unbiased_tradeoffs(&joint, &pauli::hermitian(a), &pauli::hermitian(b), &rho)?;
        let vc = verdicts[0].witnesses["intrinsic_c"].as_f64().unwrap_or(f64::NAN);
        ctx.expect_eq("unbiased_intrinsic_noise", vc, 1.0 / (t * t) - 1.0, 1e-10, ANALYTIC);
        for v in verdicts {
            ctx.expect_holds(&v, true, ANALYTIC);
            ctx.verdict(v);
        }
        ctx.quantity("unbiased_scale", t);
    }
    Ok(())
}

fn lueders_sequential(ctx: &mut Ctx) -> Result<()> {
    let rho = state(ctx.p("theta"), ctx.p("phi"))?;
    let a = sharp(Z);
    let b = sharp(X);
    let (aop, bop) = (a.operator(), b.operator());
    let m = lueders_scheme(&a)?;
    let inst = lueders_instrument(&a);
    ctx.expect_eq("eps_no", eps_no_from_scheme(&m, &aop, &rho)?, 0.0, 1e-10, ANALYTIC);
    let eta = eta_no_from_scheme(&m, &bop, &rho)?;
    ctx.expect_eq("eta_no", eta, SQRT_2, 1e-10, ANALYTIC);
    ctx.expect_eq("eta_no_instrument", eta_no_from_instrument(&inst, &bop, &rho)?, eta, 1e-9, IDENTITY);
    let three = three_step_comparison(&b, &inst, &rho)?;
    ctx.expect_eq("eta_three_step", three.value, eta, 1e-9, IDENTITY);
    ctx.expect_eq("distorted_commutes", f64::from(u8::from(three.commuting)), 1.0, 0.0, ANALYTIC);
    let joint = sequential_biobservable(&inst, b.observable())?;
    ctx.quantity("sequential_table", joint.table(&rho));
    ctx.quantity("three_step", three);
    Ok(())
}

fn phase_space(ctx: &mut Ctx, tau: &GridState, expected_second: f64) -> Result<()> {
    let (mu, nu) = phase_space_marginals(tau)?;
    ctx.expect_eq("std_product", mu.std_dev() * nu.std_dev(), 0.5, 1e-4, ANALYTIC);
    ctx.expect_eq(
        "second_moment_product",
        mu.second_moment() * nu.second_moment(),
        expected_second,
        1e-3,
        ANALYTIC,
    );
    for v in phase_space_relation_check(tau)? {
        ctx.expect_holds(&v, true, ANALYTIC);
        ctx.verdict(v);
    }
    ctx.quantity("mu_mean", mu.mean());
    ctx.quantity("mu_std", mu.std_dev());
    ctx.quantity("nu_mean", nu.mean());
    ctx.quantity("nu_std", nu.std_dev());
    ctx.quantity("grid", ctx.config.grid()?);
    Ok(())
}

fn husimi(ctx: &mut Ctx) -> Result<()> {
    let tau = GridState::ground_state(ctx.config.grid()?)?;
    phase_space(ctx, &tau, 0.25)
}

fn squeezed(ctx: &mut Ctx) -> Result<()> {
    let s = ctx.p("s");
    let tau = GridState::squeezed(ctx.config.grid()?, s)?;
    ctx.note("a centered Gaussian has μ[x²]ν[x²] = Δ(μ)²Δ(ν)² = ¼ for every squeezing");
    phase_space(ctx, &tau, 0.25)
}

fn displaced(ctx: &mut Ctx) -> Result<()> {
    let (q, p) = (ctx.p("q"), ctx.p("p"));
    let tau = GridState::coherent(ctx.config.grid()?, q, p)?;
    phase_space(ctx, &tau, (0.5 + q * q) * (0.5 + p * p))
}

fn von_neumann(ctx: &mut Ctx) -> Result<()> {
    let grid = ctx.config.grid()?;
    let (lambda, width) = (ctx.p("lambda"), ctx.p("probe_width"));
    let vn = von_neumann_scheme(grid, lambda, ProbeState::Gaussian { center: 0.0, width })?;
    let psi = GridState::gaussian(grid, ctx.p("q0"), ctx.p("state_width"), ctx.p("p0"))?;
    let mu = vn.noise_distribution();
    let rms = width / lambda;
    ctx.expect_eq("noise_mean", mu.mean(), 0.0, 1e-10, ANALYTIC);
    ctx.expect_eq("noise_std", mu.std_dev(), rms, 1e-6, ANALYTIC);

    let out = vn.output_distribution(&psi)?;
    let oracle = psi.position_distribution().convolve(&mu);
    ctx.expect_le("output_vs_convolution", max_probability_gap(&out, &oracle), 0.0, 1e-6, ORACLE);

    let scheme = vn.eps_no_scheme(&psi)?;
    let moments = vn.eps_no_moments(&psi);
    ctx.expect_eq("eps_no_scheme", scheme, moments, 1e-9, IDENTITY);
    ctx.expect_eq("eps_no_three_state", vn.eps_no_three_state(&psi), moments, 1e-9, IDENTITY);
    ctx.expect_eq("eps_no_value_comparison", vn.eps_no_value_comparison(&psi), moments, 1e-9, IDENTITY);
    ctx.expect_eq("eps_no", moments, mu.second_moment().sqrt(), 1e-12, ANALYTIC);
    ctx.expect_eq("eps_no_gaussian", moments, rms, 1e-6, ANALYTIC);

    let worst = vn.worst_case(std::slice::from_ref(&psi))?;
    ctx.expect_eq("w2_worst", worst, mu.second_moment().sqrt(), 1e-6, ANALYTIC);
    let w_state = w2(&psi.position_distribution(), &out);
    ctx.expect_le("w2_state_below_worst", w_state, worst, 1e-9, ANALYTIC);

    let cal = vn.calibration(&default_schedule())?;
    let last = cal.schedule.last().map(|p| p.value).unwrap_or(f64::NAN);
    ctx.expect_eq("calibration_limit", cal.limit, mu.second_moment().sqrt(), 1e-12, ANALYTIC);
    ctx.expect_eq("calibration_last_schedule_point", last, mu.second_moment().sqrt(), 1e-3, ANALYTIC);

    ctx.quantity("eps_no", moments);
    ctx.quantity("w2_state", w_state);
    ctx.quantity("w2_worst", worst);
    ctx.quantity("calibration_schedule", &cal.schedule);
    ctx.quantity("calibration_limit", cal.limit);
    ctx.quantity("noise_second_moment", mu.second_moment());
    Ok(())
}

fn q_vs_minus_q(ctx: &mut Ctx) -> Result<()> {
    let psi = GridState::squeezed(ctx.config.grid()?, ctx.p("s"))?;
    let q = psi.position_distribution();
    // C = spectral measure of -Q: ε² = ⟨(-Q - Q)²⟩ = 4 Q_ρ[x²]
    let eps = 2.0 * q.second_moment().sqrt();
    let w = w2(&q, &q.reflect());
    ctx.expect_eq("eps_no", eps, 2.0 * q.std_dev(), 1e-9, ANALYTIC);
    ctx.expect_eq("eps_no_gaussian", eps, SQRT_2 * ctx.p("s"), 1e-8, ANALYTIC);
    ctx.expect_eq("w2_state", w, 0.0, 1e-9, ANALYTIC);
    ctx.quantity("eps_no", eps);
    ctx.quantity("w2_state", w);
    Ok(())
}

/// Expectation `⟨ψ|X|ψ⟩` and `‖Xψ‖²` for `X` given by its action.
fn apply_q(grid: GridSystem, v: &[Complex64]) -> Vec<Complex64> {
    grid.positions().into_iter().zip(v).map(|(x, a)| a * x).collect()
}

fn combine(u: &[Complex64], v: &[Complex64], s: f64) -> Vec<Complex64> {
    u.iter().zip(v).map(|(a, b)| a + b * s).collect()
}

fn double_zero(ctx: &mut Ctx) -> Result<()> {
    let (alpha, beta) = (ctx.p("alpha"), ctx.p("beta"));
    let grid = ctx.config.grid()?;
    let psi = GridState::ground_state(grid)?;
    let amp = psi.amplitudes();
    let h = shifted_oscillator(grid, amp);
    let qpsi = apply_q(grid, amp);
    // C sharp, so ε² = ‖(C[x] - T)ψ‖² with C[x] - Q = αH', C[x] - B = (α - β)H'
    let eps_a = (alpha * alpha * grid_norm_sqr(grid, &h)).sqrt();
    let eps_b = ((alpha - beta).powi(2) * grid_norm_sqr(grid, &h)).sqrt();
    let bpsi = combine(&qpsi, &h, beta);
    let mean_a = psi.expectation_of(&qpsi);
    let mean_b = psi.expectation_of(&bpsi);
    let delta_a = (grid_norm_sqr(grid, &qpsi) - mean_a * mean_a).max(0.0).sqrt();
    let delta_b = (grid_norm_sqr(grid, &bpsi) - mean_b * mean_b).max(0.0).sqrt();
    // ⟨[A,B]⟩ = 2i Im⟨Aψ|Bψ⟩
    let inner: Complex64 = qpsi.iter().zip(&bpsi).map(|(x, y)| x.conj() * y).sum::<Complex64>() * grid.dx();
    let comm = 2.0 * inner.im.abs();
    ctx.expect_eq("eps_no_a", eps_a, 0.0, 1e-9, ANALYTIC);
    ctx.expect_eq("eps_no_b", eps_b, 0.0, 1e-9, ANALYTIC);
    ctx.expect_eq("commutator", comm, 0.0, 1e-9, ANALYTIC);
    let br = branciard_verdict(eps_a, eps_b, delta_a, delta_b, comm);
    ctx.expect_eq("branciard_lhs", br.lhs, 0.0, 1e-9, ANALYTIC);
    ctx.expect_eq("branciard_rhs", br.rhs, 0.0, 1e-9, ANALYTIC);
    let oz = check_ozawa(&ErrorDisturbance {
        eps: eps_a,
        eta: eps_b,
        delta_a,
        delta_b,
        commutator: comm,
    });
    ctx.expect_eq("ozawa_lhs", oz.lhs, 0.0, 1e-9, ANALYTIC);
    ctx.verdict(br);
    ctx.verdict(oz);

    // the distribution of C in ψ₀, on a coarse grid where dense
    // diagonalization is cheap
    let small = GridSystem::new(128, 8.0)?;
    let psi_small = GridState::ground_state(small)?;
    let c_op = operator_matrix(small, |v| combine(&apply_q(small, v), &shifted_oscillator(small, v), alpha));
    let c_dist = spectral_distribution(&c_op, &psi_small)?;
    ctx.quantity("w2_state_coarse_grid", w2(&psi_small.position_distribution(), &c_dist));
    ctx.quantity("c_distribution_support_size", c_dist.len());
    ctx.quantity("delta_a", delta_a);
    ctx.quantity("delta_b", delta_b);
    Ok(())
}

fn rank_one_shift(ctx: &mut Ctx) -> Result<()> {
    let kappa = ctx.p("kappa");
    let grid = ctx.config.grid()?;
    let psi0 = GridState::ground_state(grid)?;
    let phi: Vec<Complex64> = psi0.amplitudes().iter().map(|a| a * kappa).collect();
    let odd = grid
        .positions()
        .into_iter()
        .map(|x| Complex64::new(x * (-x * x / 2.0).exp(), 0.0))
        .collect();
    let psi1 = GridState::from_samples(grid, odd)?;
    let phi_norm = grid_norm_sqr(grid, &phi).sqrt();
    // (Q' - Q)ψ = φ⟨φ|ψ⟩
    let eps = |psi: &GridState| psi.inner(&phi).norm() * phi_norm;
    ctx.expect_eq("eps_no_ground", eps(&psi0), kappa * kappa, 1e-10, ANALYTIC);
    ctx.expect_eq("eps_no_odd", eps(&psi1), 0.0, 1e-12, ANALYTIC);
    ctx.quantity("phi_norm", phi_norm);
    Ok(())
}
