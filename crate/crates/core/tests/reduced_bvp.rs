use stefan_lab::exact::solve_parameters;
use stefan_lab::params::PhysicalParameters;
use stefan_lab::reduced::{compare_with_exact, solve_reduced_bvp, BvpOptions, Diffusivity, StepControl, Table};

// E1 by its power series below 1 and a Lentz continued fraction above.
fn e1(x: f64) -> f64 {
    if x < 1.0 {
        let mut term = 1.0;
        let mut sum = 0.0;
        for k in 1..60 {
            term *= -x / k as f64;
            sum += term / k as f64;
        }
        -0.577_215_664_901_532_9 - x.ln() - sum
    } else {
        let tiny = 1e-300;
        let mut b = x + 1.0;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..300 {
            let a = -((i * i) as f64);
            b += 2.0;
            d = 1.0 / (a * d + b);
            c = b + a / c;
            let delta = c * d;
            h *= delta;
            if (delta - 1.0).abs() < 1e-16 {
                break;
            }
        }
        h * (-x).exp()
    }
}

fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let flo = f(lo);
    assert!(flo * f(hi) < 0.0, "bracket [{lo}, {hi}]");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) < 0.0) == (flo < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Two-phase constant-diffusivity closed form: for given μ the liquid
/// condition fixes ω₂, then the melting balance fixes μ.
fn constant_oracle(p: &PhysicalParameters, a1: f64, a2: f64) -> (f64, f64) {
    let amp = |mu: f64| (mu * p.h_v - p.q) / (2.0 * a1) * p.r * (mu * p.r / (2.0 * a1)).exp();
    let u_at = |w: f64, mu: f64| p.u_v + amp(mu) * (e1(mu * p.r / (2.0 * a1)) - e1(mu * w / (2.0 * a1)));
    let front = |mu: f64| bisect(p.r * (1.0 + 1e-12), 1e4, |w| u_at(w, mu) - p.u_m);
    let balance = |mu: f64| {
        let w = front(mu);
        let du = amp(mu) * (-mu * w / (2.0 * a1)).exp() / w;
        let c3 = (p.v_m - p.v_inf) / e1(mu * w / (2.0 * a2));
        let dv = -c3 * (-mu * w / (2.0 * a2)).exp() / w;
        -2.0 * a2 * dv - (2.0 * a1 * du + mu * p.h_m)
    };
    let mu = bisect(0.02, 0.2, balance);
    (front(mu), mu)
}

#[test]
fn oracle_e1_spot_values() {
    assert!((e1(1.0) - 0.219_383_934_395_520_27).abs() < 1e-15);
    assert!((e1(0.1) - 1.822_923_958_419_390_7).abs() < 1e-14);
}

#[test]
fn constant_diffusivities_match_closed_form() {
    let p = PhysicalParameters::reference();
    let (w2, mu) = constant_oracle(&p, 1.0, 1.0);
    // 30-digit reference for the same closed form
    assert!((w2 / 7.483_929_889_300_593 - 1.0).abs() < 1e-10);
    assert!((mu / 0.055_333_709_474_924_46 - 1.0).abs() < 1e-10);
    let d = Diffusivity::constant(1.0);
    let sol = solve_reduced_bvp(&p, &d, &d, (7.0, 0.06), &BvpOptions::default()).unwrap();
    assert!((sol.omega2 / w2 - 1.0).abs() < 1e-8, "{} vs {w2}", sol.omega2);
    assert!((sol.mu / mu - 1.0).abs() < 1e-8, "{} vs {mu}", sol.mu);
}

#[test]
fn tabulated_constant_matches_constant() {
    let p = PhysicalParameters::reference();
    let flat = Diffusivity::Tabulated(Table::new(vec![(-1.0, 1.0), (0.5, 1.0), (1.5, 1.0), (5.0, 1.0)]).unwrap());
    let d = Diffusivity::constant(1.0);
    let a = solve_reduced_bvp(&p, &d, &d, (7.0, 0.06), &BvpOptions::default()).unwrap();
    let b = solve_reduced_bvp(&p, &flat, &flat, (7.0, 0.06), &BvpOptions::default()).unwrap();
    assert!((a.omega2 - b.omega2).abs() < 1e-12 * a.omega2);
    assert!((a.mu - b.mu).abs() < 1e-12 * a.mu);
}

#[test]
fn exact_class_agrees_with_exact_solver() {
    let p = PhysicalParameters::reference();
    let exact = solve_parameters(&p, (4.0, 0.1)).unwrap();
    let num = solve_reduced_bvp(
        &p,
        &Diffusivity::inverse(),
        &Diffusivity::constant(1.0),
        (4.0, 0.1),
        &BvpOptions::default(),
    )
    .unwrap();
    assert!((num.omega2 / exact.omega2() - 1.0).abs() < 1e-6);
    assert!((num.mu / exact.mu() - 1.0).abs() < 1e-6);
    assert!(num.mismatch.0.abs() <= 1e-8 && num.mismatch.1.abs() <= 1e-8);
    let diff = compare_with_exact(&num, &exact).unwrap();
    assert!(diff.max() <= 1e-4, "{diff:?}");
    assert_eq!(num.liquid[0].value, p.u_v);
    assert_eq!(num.solid[0].value, p.v_m);
}

#[test]
fn compare_rejects_other_classes() {
    let p = PhysicalParameters::reference();
    let exact = solve_parameters(&p, (4.0, 0.1)).unwrap();
    let d = Diffusivity::constant(1.0);
    let num = solve_reduced_bvp(&p, &d, &d, (7.0, 0.06), &BvpOptions::default()).unwrap();
    assert!(compare_with_exact(&num, &exact).is_err());
}

#[test]
fn tolerance_halving_is_stable() {
    let p = PhysicalParameters::reference();
    let (d1, d2) = (Diffusivity::inverse(), Diffusivity::constant(1.0));
    let loose = solve_reduced_bvp(&p, &d1, &d2, (4.0, 0.1), &BvpOptions::default()).unwrap();
    let opts = BvpOptions {
        control: StepControl::Adaptive {
            rtol: 5e-11,
            atol: 5e-11,
        },
        ..BvpOptions::default()
    };
    let tight = solve_reduced_bvp(&p, &d1, &d2, (4.0, 0.1), &opts).unwrap();
    assert!((loose.omega2 / tight.omega2 - 1.0).abs() < 1e-8);
    assert!((loose.mu / tight.mu - 1.0).abs() < 1e-8);
}

#[test]
fn fixed_step_error_shrinks_at_fifth_order() {
    let p = PhysicalParameters::reference();
    let exact = solve_parameters(&p, (4.0, 0.1)).unwrap();
    let err = |h: f64| {
        let opts = BvpOptions {
            control: StepControl::Fixed { h },
            ..BvpOptions::default()
        };
        let num = solve_reduced_bvp(&p, &Diffusivity::inverse(), &Diffusivity::constant(1.0), (4.0, 0.1), &opts)
            .unwrap();
        (num.omega2 - exact.omega2()).abs()
    };
    let ratio = err(0.4) / err(0.2);
    assert!(ratio > 16.0 && ratio < 64.0, "ratio {ratio}");
}

#[test]
fn equivalence_scaling_covariance() {
    // x → βx, t → αt, u → δ1 u + γ4, v → δ2 v + γ5
    let p = PhysicalParameters::reference();
    let (d1, d2) = (Diffusivity::inverse(), Diffusivity::constant(1.0));
    let base = solve_reduced_bvp(&p, &d1, &d2, (4.0, 0.1), &BvpOptions::default()).unwrap();
    let iface = stefan_lab::reduced::resolve_interface(&p, &d1, &d2).unwrap();
    for &(beta, alpha, dl1, g4, dl2, g5) in &[
        (2.0, 3.0, 1.0, 0.0, 1.0, 0.0),
        (0.5, 0.7, 2.0, 0.3, -1.5, 0.4),
        (1.3, 4.0, -0.8, 5.0, 3.0, -2.0),
    ] {
        let q = PhysicalParameters {
            u_v: dl1 * p.u_v + g4,
            u_m: dl1 * p.u_m + g4,
            v_m: dl2 * p.v_m + g5,
            v_inf: dl2 * p.v_inf + g5,
            h_v: alpha * p.h_v,
            h_m: alpha * p.h_m,
            q: beta * p.q,
            r: beta * p.r,
            interface: Some(stefan_lab::params::InterfaceDiffusivities {
                d1_v: beta * beta / dl1 * iface.d1_v,
                d1_m: beta * beta / dl1 * iface.d1_m,
                d2_m: beta * beta / dl2 * iface.d2_m,
            }),
        };
        let td1 = d1.transformed(beta * beta / alpha, dl1, g4).unwrap();
        let td2 = d2.transformed(beta * beta / alpha, dl2, g5).unwrap();
        let guess = (beta * 4.0, beta / alpha * 0.1);
        let t = solve_reduced_bvp(&q, &td1, &td2, guess, &BvpOptions::default()).unwrap();
        assert!((t.omega2 / (beta * base.omega2) - 1.0).abs() < 1e-8, "{beta} {alpha}");
        assert!((t.mu / (beta / alpha * base.mu) - 1.0).abs() < 1e-8, "{beta} {alpha}");
    }
}
