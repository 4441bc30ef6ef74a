//! One function per scenario. Each writes its data files and returns the
//! checks that decide the exit code.

use bohm_core::bohm::{
    bohm_force_and_acceleration, bohm_potential, continuity_residual, fit_quadratic, integrate_trajectory,
    qhj_residual, BohmOptions, BohmPotentialField, Trajectory,
};
use bohm_core::catalog::{self, AnalyticSolution, CatalogSample};
use bohm_core::evolve::{self, PropagatorConfig};
use bohm_core::family::{
    check_family, external_potential_from_f, family_to_fields, force_from_f, random_families, vb_zero_check,
    vb_zero_check_family, FFamily,
};
use bohm_core::field::{polar_decompose, recompose, write_polar_csv, Scheme};
use bohm_core::{AmplitudeMode, Grid1D, PhysicalParams, PolarField};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::config::{Config, ScenarioName};
use crate::error::Result;
use crate::report::{Check, Outcome, Outputs};

pub fn run(name: ScenarioName, cfg: &Config, out: &mut Outputs) -> Result<Outcome> {
    log::info!("running {name}");
    match name {
        ScenarioName::AiryAnalytic => airy_analytic(cfg, out),
        ScenarioName::AiryDynamic => airy_dynamic(cfg, out),
        ScenarioName::HoShell => ho_shell(cfg, out),
        ScenarioName::PlaneDispersion => plane_dispersion(cfg, out),
        ScenarioName::VbZeroFamily => vb_zero_family(cfg, out),
        ScenarioName::MorseCheck => morse_check(cfg, out),
        ScenarioName::Custom => custom(cfg, out),
    }
}

fn masked_nan(vb: &BohmPotentialField) -> Vec<f64> {
    vb.values
        .iter()
        .zip(&vb.mask)
        .map(|(v, m)| if *m { f64::NAN } else { *v })
        .collect()
}

/// Three slices `t - dt, t, t + dt` of a catalog solution.
fn slices(
    sol: &AnalyticSolution,
    grid: &Grid1D,
    t: f64,
    dt: f64,
    params: &PhysicalParams,
) -> Result<Vec<CatalogSample>> {
    Ok([t - dt, t, t + dt]
        .iter()
        .map(|s| sol.sample(grid, *s, params))
        .collect::<bohm_core::Result<Vec<_>>>()?)
}

fn polar_of(samples: &[CatalogSample]) -> Vec<PolarField> {
    samples.iter().map(|s| s.polar.clone()).collect()
}

fn trajectory_table(out: &mut Outputs, name: &str, trajectories: &[Trajectory]) -> Result<()> {
    let mut index = Vec::new();
    let mut t = Vec::new();
    let mut x = Vec::new();
    let mut v = Vec::new();
    for (i, tr) in trajectories.iter().enumerate() {
        index.extend(std::iter::repeat(i as f64).take(tr.times.len()));
        t.extend(&tr.times);
        x.extend(&tr.positions);
        v.extend(&tr.velocities);
    }
    out.table(name, &[("particle", &index), ("t", &t), ("x", &x), ("v", &v)])
}

fn airy_analytic(cfg: &Config, out: &mut Outputs) -> Result<Outcome> {
    let a = &cfg.airy;
    let params = cfg.params();
    let expected = cfg.expected_airy_acceleration();
    let grid = Grid1D::with_spacing(a.x_min, a.x_max, a.dx)?;
    let mut checks = Vec::new();

    // Closed-form V_B is linear in x; its slope gives the acceleration and
    // its differentiated values give the acceleration field.
    let mut worst_field = 0.0_f64;
    let mut fitted = Vec::new();
    for &t in &a.times {
        let vb = catalog::airy_bohm_closed_form(a.beta, &grid, t, &params)?;
        let f = bohm_force_and_acceleration(&vb, &params, Scheme::FD2)?;
        for (acc, m) in f.acceleration.iter().zip(&f.mask) {
            if !m {
                worst_field = worst_field.max(((acc - expected) / expected).abs());
            }
        }
        fitted.push(-line_slope(&grid.points(), &vb.values) / params.mass);
    }
    let fitted_acceleration = fitted[0];
    let fit_spread = fitted
        .iter()
        .map(|f| (f - fitted_acceleration).abs())
        .fold(0.0, f64::max);
    checks.push(Check::near("fitted_acceleration", fitted_acceleration, expected, 1e-9));
    checks.push(Check::below("fitted_acceleration_time_spread", fit_spread, 1e-9));
    checks.push(Check::below("acceleration_field_relative_error", worst_field, 1e-9));

    // Numeric V_B from the Airy amplitude, second-order differences, on a
    // node-free window padded so one-sided boundary stencils stay outside.
    let compare = |dx: f64| -> Result<(f64, Grid1D, Vec<f64>, Vec<f64>)> {
        let pad = 10.0 * dx;
        let g = Grid1D::with_spacing(a.compare_min - pad, a.compare_max + pad, dx)?;
        let s = catalog::airy_solution(a.beta, &g, a.times[0], &params)?;
        let vb = bohm_potential(&s.polar, &params, &BohmOptions::second_order())?;
        let exact = catalog::airy_bohm_closed_form(a.beta, &g, a.times[0], &params)?;
        let err = vb
            .unmasked()
            .filter(|(i, _)| (a.compare_min..=a.compare_max).contains(&g.x(*i)))
            .fold(0.0_f64, |m, (i, v)| m.max((v - exact.values[i]).abs()));
        Ok((err, g, masked_nan(&vb), exact.values))
    };
    let (err_coarse, g, numeric, exact) = compare(a.dx)?;
    let (err_fine, ..) = compare(0.5 * a.dx)?;
    let ratio = err_coarse / err_fine;
    checks.push(Check::below("numeric_vs_closed_form_vb_l_inf", err_coarse, 1e-4));
    checks.push(Check::within("numeric_vb_error_ratio_dx_halving", ratio, 3.5, 4.5));
    out.table(
        "airy_vb_compare.csv",
        &[("x", &g.points()), ("vb_numeric", &numeric), ("vb_closed_form", &exact)],
    )?;

    // A Bohmian particle in the closed-form velocity field.
    let steps = (a.trajectory_t_max / a.trajectory_dt).round() as usize;
    let series = (0..=steps)
        .map(|i| catalog::airy_solution(a.beta, &grid, i as f64 * a.trajectory_dt, &params).map(|s| s.polar))
        .collect::<bohm_core::Result<Vec<_>>>()?;
    let opts = cfg.bohm_options();
    let traj = integrate_trajectory(&series, a.trajectory_start, &params, &opts)?;
    let c = fit_quadratic(&traj.times, &traj.positions)?;
    let traj_accel = 2.0 * c[2];
    checks.push(Check::near(
        "velocity_field_trajectory_acceleration",
        traj_accel,
        expected,
        1e-6 * expected.abs(),
    ));
    checks.push(Check::holds("velocity_field_trajectory_stays_on_grid", !traj.truncated));
    trajectory_table(out, "trajectory.csv", std::slice::from_ref(&traj))?;

    let t0 = a.times[0];
    let vb0 = catalog::airy_bohm_closed_form(a.beta, &grid, t0, &params)?;
    let force = bohm_force_and_acceleration(&vb0, &params, Scheme::FD2)?;
    let acc: Vec<f64> = force
        .acceleration
        .iter()
        .zip(&force.mask)
        .map(|(v, m)| if *m { f64::NAN } else { *v })
        .collect();
    out.table(
        "airy_bohm.csv",
        &[("x", &grid.points()), ("vb", &vb0.values), ("acceleration", &acc)],
    )?;
    let s0 = catalog::airy_solution(a.beta, &grid, t0, &params)?;
    out.write("airy_fields.csv", |w| write_polar_csv(w, &s0.polar))?;

    Ok(Outcome {
        checks,
        results: json!({
            "beta": a.beta,
            "expected_acceleration": expected,
            "closed_form": {
                "fitted_acceleration": fitted_acceleration,
                "fitted_acceleration_by_time": a.times.iter().zip(&fitted)
                    .map(|(t, f)| json!({"t": t, "acceleration": f})).collect::<Vec<_>>(),
                "acceleration_field_max_relative_error": worst_field,
            },
            "numeric_vb": {
                "scheme": "fd2",
                "window": [a.compare_min, a.compare_max],
                "l_inf": err_coarse,
                "l_inf_half_dx": err_fine,
                "ratio": ratio,
            },
            "velocity_field_trajectory": {
                "start": a.trajectory_start,
                "acceleration": traj_accel,
                "fit": c,
                "truncated": traj.truncated,
            },
        }),
    })
}

/// Least-squares slope of `y` against `x`.
fn line_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

fn airy_dynamic(cfg: &Config, out: &mut Outputs) -> Result<Outcome> {
    let d = &cfg.airy_dynamic;
    let params = cfg.params();
    let expected = catalog::airy_acceleration(d.beta, &params);
    let grid = Grid1D::periodic(-0.5 * d.length, 0.5 * d.length, d.n)?;
    let psi0 = recompose(&catalog::airy_solution(d.beta, &grid, 0.0, &params)?.polar, &params)?;
    let psi0 = evolve::apodize(&psi0, d.apodize)?;
    let steps = (d.t_max / d.dt).round() as usize;
    let prop = PropagatorConfig::free(&grid, d.dt, steps, d.record_every);
    let series = evolve::evolve(&psi0, &prop, &params)?;
    let obs = evolve::observables_series(&series, &prop.potential, &params)?;
    log::info!("evolved {steps} steps, {} snapshots", series.len());

    let times: Vec<f64> = obs.iter().map(|o| o.t).collect();
    let peaks: Vec<f64> = obs.iter().map(|o| o.x_peak).collect();
    let peak_fit = fit_quadratic(&times, &peaks)?;
    let peak_accel = 2.0 * peak_fit[2];
    let norm_drift = obs.iter().map(|o| (o.norm - obs[0].norm).abs()).fold(0.0, f64::max) / obs[0].norm;

    let polar = series
        .iter()
        .map(|psi| polar_decompose(psi, &params, AmplitudeMode::NonNegative))
        .collect::<bohm_core::Result<Vec<_>>>()?;
    let traj = integrate_trajectory(&polar, d.trajectory_start, &params, &cfg.bohm_options())?;
    let traj_fit = fit_quadratic(&traj.times, &traj.positions)?;
    let traj_accel = 2.0 * traj_fit[2];

    let checks = vec![
        Check::near(
            "peak_tracking_acceleration",
            peak_accel,
            expected,
            d.tolerance * expected.abs(),
        ),
        Check::near(
            "velocity_field_trajectory_acceleration",
            traj_accel,
            expected,
            d.tolerance * expected.abs(),
        ),
        Check::holds("velocity_field_trajectory_stays_on_grid", !traj.truncated),
        Check::below("norm_drift", norm_drift, 1e-10),
    ];

    out.write("observables.json", |w| evolve::write_observables_json(w, &obs))?;
    let stride = (series.len() - 1).div_ceil(d.snapshots - 1).max(1);
    let picked: Vec<_> = series.iter().step_by(stride).cloned().collect();
    out.write("snapshots.csv", |w| evolve::write_snapshots_csv(w, &picked))?;
    let fitted: Vec<f64> = times
        .iter()
        .map(|t| peak_fit[0] + peak_fit[1] * t + peak_fit[2] * t * t)
        .collect();
    out.table(
        "peak_track.csv",
        &[("t", &times), ("x_peak", &peaks), ("x_fit", &fitted)],
    )?;
    trajectory_table(out, "trajectory.csv", std::slice::from_ref(&traj))?;

    Ok(Outcome {
        checks,
        results: json!({
            "beta": d.beta,
            "expected_acceleration": expected,
            "grid": {"n": d.n, "length": d.length, "dx": grid.dx()},
            "dt": d.dt,
            "steps": steps,
            "peak_tracking": {
                "acceleration": peak_accel,
                "fit": peak_fit,
                "relative_error": (peak_accel - expected).abs() / expected.abs(),
            },
            "velocity_field_trajectory": {
                "start": d.trajectory_start,
                "acceleration": traj_accel,
                "fit": traj_fit,
                "relative_error": (traj_accel - expected).abs() / expected.abs(),
                "truncated": traj.truncated,
            },
            "norm_drift": norm_drift,
        }),
    })
}

fn ho_shell(cfg: &Config, out: &mut Outputs) -> Result<Outcome> {
    let h = &cfg.ho_shell;
    let params = cfg.params();
    let opts = cfg.bohm_options();
    let grid = Grid1D::with_spacing(h.x_min, h.x_max, h.dx)?;
    let mut checks = Vec::new();
    let mut levels = Vec::new();
    let mut columns: Vec<(String, Vec<f64>)> = vec![("x".into(), grid.points())];
    for n in 0..=h.n_max {
        let sol = AnalyticSolution::HoEigenstate { n, omega: h.omega };
        let samples = slices(&sol, &grid, 0.0, h.dt, &params)?;
        let vb = bohm_potential(&samples[1].polar, &params, &opts)?;
        let energy = (n as f64 + 0.5) * params.hbar * h.omega;
        let v = &samples[1].potential;
        let gap = vb
            .unmasked()
            .map(|(i, b)| (b + v[i] - energy).abs())
            .fold(0.0_f64, f64::max);
        let q = qhj_residual(&polar_of(&samples), v, &params, &opts)?;
        let c = continuity_residual(&polar_of(&samples), &params, &opts)?;
        checks.push(Check::below(format!("shell_identity_n{n}"), gap, h.tolerance));
        checks.push(Check::above(format!("max_abs_vb_n{n}"), vb.max_abs(), h.min_bohm));
        checks.push(Check::below(format!("qhj_residual_n{n}"), q.report.l_inf, h.tolerance));
        checks.push(Check::below(
            format!("continuity_residual_n{n}"),
            c.report.l_inf,
            h.tolerance,
        ));
        levels.push(json!({
            "n": n,
            "energy": energy,
            "shell_gap": gap,
            "max_abs_vb": vb.max_abs(),
            "masked_fraction": vb.masked_fraction(),
            "qhj": q.report,
            "continuity": c.report,
        }));
        columns.push((format!("vb_{n}"), masked_nan(&vb)));
    }
    let cols: Vec<(&str, &[f64])> = columns.iter().map(|(n, v)| (n.as_str(), v.as_slice())).collect();
    out.table("ho_shell.csv", &cols)?;
    Ok(Outcome {
        checks,
        results: json!({ "omega": h.omega, "levels": levels }),
    })
}

fn plane_dispersion(cfg: &Config, out: &mut Outputs) -> Result<Outcome> {
    let p = &cfg.plane;
    let params = cfg.params();
    let grid = Grid1D::periodic(0.0, p.length, p.n)?;
    let sol = AnalyticSolution::PlaneWave { k: p.k, omega: p.omega };
    let samples = slices(&sol, &grid, p.t, p.dt, &params)?;
    let q = qhj_residual(&polar_of(&samples), &samples[1].potential, &params, &cfg.bohm_options())?;
    let expected = params.hbar * params.hbar * p.k * p.k / (2.0 * params.mass) - params.hbar * p.omega;
    let values: Vec<f64> = q.unmasked().collect();
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let spread = values.iter().map(|v| (v - expected).abs()).fold(0.0_f64, f64::max);
    let on_shell_omega = params.hbar * p.k * p.k / (2.0 * params.mass);
    let checks = vec![
        Check::below("residual_deviation_from_gap", spread, p.tolerance),
        Check::near("mean_residual", mean, expected, p.tolerance),
        Check::below("masked_fraction", q.report.masked_fraction, 1e-12),
    ];
    let residual: Vec<f64> = q
        .values
        .iter()
        .zip(&q.mask)
        .map(|(v, m)| if *m { f64::NAN } else { *v })
        .collect();
    out.table("plane_residual.csv", &[("x", &grid.points()), ("residual", &residual)])?;
    Ok(Outcome {
        checks,
        results: json!({
            "k": p.k,
            "omega": p.omega,
            "on_shell_omega": on_shell_omega,
            "expected_gap": expected,
            "mean_residual": mean,
            "max_deviation": spread,
            "qhj": q.report,
        }),
    })
}

fn vb_zero_family(cfg: &Config, out: &mut Outputs) -> Result<Outcome> {
    let f = &cfg.family;
    let params = cfg.params();
    let opts = cfg.bohm_options();
    let grid = Grid1D::with_spacing(f.x_min, f.x_max, f.dx)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut families: Vec<(&str, FFamily)> = f.members.iter().map(|m| ("member", m.clone())).collect();
    families.extend(
        random_families(&mut rng, f.count, f.degree, &grid, f.t, f.dt)
            .into_iter()
            .map(|m| ("random", m)),
    );

    let mut checks = Vec::new();
    let mut rows = Vec::new();
    let mut vanishing = 0;
    let (mut c_vb, mut c_cont, mut c_qhj, mut c_force) = (vec![], vec![], vec![], vec![]);
    for (i, (source, fam)) in families.iter().enumerate() {
        let verdict = vb_zero_check_family(fam, &grid, f.t, &params, f.vb_tolerance)?;
        let c = check_family(fam, &grid, f.t, f.dt, &params, &opts)?;
        if verdict.vanishing {
            vanishing += 1;
        }
        checks.push(Check::below(
            format!("family_{i}_max_abs_vb"),
            c.max_abs_vb,
            f.vb_tolerance,
        ));
        checks.push(Check::below(
            format!("family_{i}_continuity"),
            c.continuity_l_inf,
            f.continuity_tolerance,
        ));
        checks.push(Check::below(format!("family_{i}_qhj"), c.qhj_l_inf, f.qhj_tolerance));
        checks.push(Check::below(
            format!("family_{i}_force_gap"),
            c.force_gap,
            f.force_tolerance,
        ));
        c_vb.push(c.max_abs_vb);
        c_cont.push(c.continuity_l_inf);
        c_qhj.push(c.qhj_l_inf);
        c_force.push(c.force_gap);
        rows.push(json!({
            "index": i,
            "source": source,
            "family": fam,
            "node": fam.node(f.t),
            "vanishing": verdict.vanishing,
            "check": c,
        }));
    }
    let total = families.len();
    checks.push(Check::equals("vanishing_verdicts", vanishing, total));

    // A Gaussian density is not of the form (a x + b)^2 and must be rejected.
    let control: Vec<f64> = grid.points().iter().map(|x| (-x * x).exp()).collect();
    let control = vb_zero_check(&control, &grid, &params, f.vb_tolerance)?;
    checks.push(Check::above(
        "gaussian_control_max_abs_vb",
        control.max_abs_vb,
        f.vb_tolerance,
    ));

    let index: Vec<f64> = (0..total).map(|i| i as f64).collect();
    out.table(
        "families.csv",
        &[
            ("family", &index),
            ("max_abs_vb", &c_vb),
            ("continuity", &c_cont),
            ("qhj", &c_qhj),
            ("force_gap", &c_force),
        ],
    )?;
    let first = &families[0].1;
    let polar = family_to_fields(first, &grid, f.t, &params)?;
    let v = external_potential_from_f(first, &grid, f.t, &params)?;
    let force = force_from_f(first, &grid, f.t, &params)?;
    out.table(
        "family_0_fields.csv",
        &[
            ("x", &grid.points()),
            ("A", &polar.amplitude),
            ("S", &polar.phase),
            ("V", &v),
            ("F", &force),
        ],
    )?;

    Ok(Outcome {
        checks,
        results: json!({
            "seed": cfg.seed,
            "t": f.t,
            "families": total,
            "vanishing_verdicts": vanishing,
            "gaussian_control": control,
            "checks": rows,
        }),
    })
}

fn morse_check(cfg: &Config, out: &mut Outputs) -> Result<Outcome> {
    let m = &cfg.morse;
    let params = cfg.params();
    let opts = cfg.bohm_options();
    let grid = Grid1D::with_spacing(m.x_min, m.x_max, m.dx)?;
    let sol = AnalyticSolution::MorseGround {
        depth: m.depth,
        alpha: m.alpha,
    };
    let samples = slices(&sol, &grid, 0.0, m.dt, &params)?;
    let q = qhj_residual(&polar_of(&samples), &samples[1].potential, &params, &opts)?;
    let c = continuity_residual(&polar_of(&samples), &params, &opts)?;
    let vb = bohm_potential(&samples[1].polar, &params, &opts)?;
    let energy = catalog::morse_ground_energy(m.depth, m.alpha, &params)?;
    let checks = vec![
        Check::below("qhj_residual", q.report.l_inf, m.tolerance),
        Check::below("continuity_residual", c.report.l_inf, m.tolerance),
        Check::above("max_abs_vb", vb.max_abs(), m.min_bohm),
    ];
    out.table(
        "morse.csv",
        &[
            ("x", &grid.points()),
            ("A", &samples[1].polar.amplitude),
            ("V", &samples[1].potential),
            ("vb", &masked_nan(&vb)),
        ],
    )?;
    Ok(Outcome {
        checks,
        results: json!({
            "depth": m.depth,
            "alpha": m.alpha,
            "ground_energy": energy,
            "max_abs_vb": vb.max_abs(),
            "qhj": q.report,
            "continuity": c.report,
        }),
    })
}

fn custom(cfg: &Config, out: &mut Outputs) -> Result<Outcome> {
    let c = &cfg.custom;
    let params = cfg.params();
    let opts = cfg.bohm_options();
    let sol = cfg.custom_solution()?;
    let grid = Grid1D::with_spacing(c.x_min, c.x_max, c.dx)?;
    let samples = slices(&sol, &grid, c.t, c.dt, &params)?;
    let q = qhj_residual(&polar_of(&samples), &samples[1].potential, &params, &opts)?;
    let cont = continuity_residual(&polar_of(&samples), &params, &opts)?;
    let vb = bohm_potential(&samples[1].polar, &params, &opts)?;
    let checks = vec![
        Check::below("qhj_residual", q.report.l_inf, c.tolerance),
        Check::below("continuity_residual", cont.report.l_inf, c.tolerance),
    ];

    let steps = (c.trajectory_duration / c.trajectory_dt).round() as usize;
    let series = (0..=steps)
        .map(|i| {
            sol.sample(&grid, c.t + i as f64 * c.trajectory_dt, &params)
                .map(|s| s.polar)
        })
        .collect::<bohm_core::Result<Vec<_>>>()?;
    let trajectories = c
        .trajectory_starts
        .iter()
        .map(|x0| integrate_trajectory(&series, *x0, &params, &opts))
        .collect::<bohm_core::Result<Vec<_>>>()?;
    if !trajectories.is_empty() {
        trajectory_table(out, "trajectories.csv", &trajectories)?;
    }
    out.write("fields.csv", |w| write_polar_csv(w, &samples[1].polar))?;
    out.table(
        "bohm.csv",
        &[
            ("x", &grid.points()),
            ("V", &samples[1].potential),
            ("vb", &masked_nan(&vb)),
        ],
    )?;
    Ok(Outcome {
        checks,
        results: json!({
            "solution": sol.to_string(),
            "kind": sol.kind(),
            "t": c.t,
            "max_abs_vb": vb.max_abs(),
            "qhj": q.report,
            "continuity": cont.report,
            "trajectories": c.trajectory_starts.iter().zip(&trajectories).map(|(x0, tr)| json!({
                "start": x0,
                "end": tr.positions.last(),
                "truncated": tr.truncated,
            })).collect::<Vec<_>>(),
        }),
    })
}
