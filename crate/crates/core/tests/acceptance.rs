//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Runtime limits are part of each criterion.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nrswarm::analysis::{classify, drift_order, strictly_inside_hull, ClassifierThresholds, PatternKind};
use nrswarm::dynamics::{net_velocity, run, step, IntegratorConfig, Method, SwarmState};
use nrswarm::hardware::{motor_outputs, motor_to_velocity, run_hardware, HardwareConfig, SensorLayout};
use nrswarm::io::{execute_run, parse_config, run_sweep, Config};
use nrswarm::scenario::{build_general_matrix, ScenarioSpec};
use nrswarm::trajectory::TrajectoryRecord;
use nrswarm::Vec2;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn pair_run(k12: f64, k21: f64, duration: f64) -> TrajectoryRecord {
    let k = build_general_matrix(&[vec![0.0, k12], vec![k21, 0.0]]).unwrap();
    let s = SwarmState::new(vec![Vec2::ZERO, Vec2::new(1.0, 0.0)], 0.0).unwrap();
    run(&s, &k, &IntegratorConfig::default(), duration, 10).unwrap()
}

fn final_separation(t: &TrajectoryRecord) -> f64 {
    let p = &t.last().unwrap().positions;
    p[0].distance(p[1])
}

fn two_particle_equilibrium() -> Outcome {
    let t = pair_run(2.0, 2.0, 50.0);
    let err = (final_separation(&t) - 0.5).abs();
    outcome(err < 1e-4, format!("|d - 0.5| = {err:.2e} (tol 1e-4)"))
}

fn two_particle_chase() -> Outcome {
    let t = pair_run(3.0, 1.0, 50.0);
    let d_err = (final_separation(&t) - 0.5).abs();
    let n = t.samples().len();
    let (a, b) = (&t.samples()[n - 11], &t.samples()[n - 1]);
    let speed = b.centroid().distance(a.centroid()) / (b.time - a.time);
    let v_err = (speed - 2.0).abs();
    outcome(
        d_err < 1e-4 && v_err < 1e-3,
        format!("|d - 0.5| = {d_err:.2e} (tol 1e-4), |v - 2| = {v_err:.2e} (tol 1e-3)"),
    )
}

fn ideal(name: &str) -> (TrajectoryRecord, nrswarm::analysis::PatternLabel) {
    let spec = ScenarioSpec::named(name, 0).unwrap();
    let t = run(&spec.initial, &spec.matrix, &IntegratorConfig::default(), 200.0, 10).unwrap();
    let label = classify(&t, &ClassifierThresholds::default()).unwrap();
    (t, label)
}

fn stationary_regime() -> Outcome {
    let (t, label) = ideal("fig6");
    let last = t.last().unwrap();
    let inside = strictly_inside_hull(last.positions[0], &last.positions[1..]);
    outcome(
        label.kind == PatternKind::Stationary && inside,
        format!("label {}, red strictly inside blue hull: {inside}", label.kind),
    )
}

fn chase_regime() -> Outcome {
    let (t, label) = ideal("fig7");
    let drift = label.diagnostics.shape_drift;
    let leader = drift_order(&t, t.span() * 0.5).map(|(order, _)| order[0]);
    outcome(
        label.kind == PatternKind::Translational && drift < 1e-2 && leader == Some(0),
        format!(
            "label {}, shape_drift {drift:.2e} (tol 1e-2), leading agent {leader:?} (want Some(0)), com_speed {:.2e}",
            label.kind, label.diagnostics.com_speed
        ),
    )
}

fn periodic_regime() -> Outcome {
    let (_, label) = ideal("fig8");
    let d = label.diagnostics;
    let ok = label.kind == PatternKind::Oscillatory && d.period.is_some() && d.period_cv.is_some_and(|cv| cv < 0.05);
    outcome(
        ok,
        format!("label {}, period {:?}, cv {:?} (tol 0.05)", label.kind, d.period, d.period_cv),
    )
}

fn hardware_degradation() -> Outcome {
    let (_, ideal_label) = ideal("fig8");
    let Some(ideal_cv) = ideal_label.diagnostics.period_cv else {
        return outcome(false, "ideal run has no period");
    };
    let spec = ScenarioSpec::named("fig8", 0).unwrap();
    let mut lines = Vec::new();
    let mut all = true;
    for seed in 0..10u64 {
        let hw = HardwareConfig {
            sensors: SensorLayout::default(),
            noise_sigma: 0.02,
            seed,
            ..HardwareConfig::default()
        };
        let t = run_hardware(&spec, &hw, &IntegratorConfig::default(), 200.0, 10).unwrap();
        let label = classify(&t, &ClassifierThresholds::default()).unwrap();
        let moving = matches!(label.kind, PatternKind::Oscillatory | PatternKind::Irregular);
        let cv = label.diagnostics.period_cv;
        let rougher = cv.is_some_and(|cv| cv > ideal_cv);
        all &= moving && rougher;
        lines.push(format!(
            "{seed}:{}/{}",
            label.kind,
            cv.map_or("no period".to_string(), |c| format!("{c:.3}"))
        ));
    }
    outcome(all, format!("ideal cv {ideal_cv:.2e}; per seed label/cv: {}", lines.join(" ")))
}

#[allow(clippy::needless_range_loop)]
fn invariant_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst_drift = 0.0f64;
    let mut worst_equiv = 0.0f64;
    for _ in 0..200 {
        let n = rng.random_range(2..=8);
        let pos: Vec<Vec2> = (0..n)
            .map(|i| {
                Vec2::new(
                    (i % 3) as f64 + rng.random_range(-0.35..0.35),
                    (i / 3) as f64 + rng.random_range(-0.35..0.35),
                )
            })
            .collect();
        let mut k = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..i {
                let v = rng.random_range(-3.0..3.0);
                k[i][j] = v;
                k[j][i] = v;
            }
        }
        let sym = build_general_matrix(&k).unwrap();
        let mut state = SwarmState::new(pos.clone(), 0.0).unwrap();
        let cfg = IntegratorConfig::new(Method::Rk4, 1e-3);
        for _ in 0..10 {
            let v = net_velocity(&state, &sym, 1e-6).unwrap();
            worst_drift = worst_drift.max(v.iter().copied().sum::<Vec2>().norm());
            state = step(&state, &sym, &cfg).unwrap();
        }

        for i in 0..n {
            for j in 0..n {
                if i != j {
                    k[i][j] = rng.random_range(-3.0..3.0);
                }
            }
        }
        let km = build_general_matrix(&k).unwrap();
        let s = SwarmState::new(pos, 0.0).unwrap();
        let v = net_velocity(&s, &km, 1e-6).unwrap();
        let scale = v.iter().map(|p| p.norm()).fold(1.0, f64::max);
        let offset = Vec2::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
        let angle = rng.random_range(-3.2..3.2);
        let mut perm: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            perm.swap(i, rng.random_range(0..=i));
        }
        let vt = net_velocity(&s.translated(offset).unwrap(), &km, 1e-6).unwrap();
        let vr = net_velocity(&s.rotated(angle).unwrap(), &km, 1e-6).unwrap();
        let vp = net_velocity(&s.permuted(&perm).unwrap(), &km.permuted(&perm).unwrap(), 1e-6).unwrap();
        for i in 0..n {
            worst_equiv = worst_equiv
                .max((vt[i] - v[i]).norm() / scale)
                .max((vr[i] - v[i].rotated(angle)).norm() / scale)
                .max((vp[perm[i]] - v[i]).norm() / scale);
        }
    }

    let mut worst_motor = 0.0f64;
    for _ in 0..1000 {
        let v = rng.random_range(1e-3..10.0);
        let theta = rng.random_range(-PI..PI);
        let c = rng.random_range(0.01..10.0);
        let cmd = motor_outputs(v, theta, c);
        let mag = cmd.p.iter().map(|p| p.abs()).fold(1.0, f64::max);
        let (v2, t2) = motor_to_velocity(&cmd, c).unwrap();
        worst_motor = worst_motor
            .max(cmd.sum().abs() / mag)
            .max((v2 - v).abs() / v)
            .max((t2 - theta).abs() / theta.abs().max(1.0));
    }

    let spec = ScenarioSpec::named("fig8", 1).unwrap();
    let end = |dt: f64| {
        let t = run(&spec.initial, &spec.matrix, &IntegratorConfig::new(Method::Rk4, dt), 1.0, usize::MAX).unwrap();
        t.last().unwrap().positions.clone()
    };
    let gap = |a: &[Vec2], b: &[Vec2]| a.iter().zip(b).map(|(p, q)| p.distance(*q)).fold(0.0, f64::max);
    let (a, b, c) = (end(0.02), end(0.01), end(0.005));
    let order = (gap(&a, &b) / gap(&b, &c)).log2();

    outcome(
        worst_drift < 1e-12 && worst_equiv < 1e-12 && worst_motor < 1e-12 && order >= 3.5,
        format!(
            "max |sum v| {worst_drift:.1e}, equivariance {worst_equiv:.1e}, motors {worst_motor:.1e} (tol 1e-12), RK4 order {order:.2} (min 3.5)"
        ),
    )
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let mut same = true;
    for (name, doc) in [
        ("ideal", "scenario = \"fig8\"\nduration = 100.0\nseed = 3\n"),
        (
            "hardware",
            "scenario = \"fig8\"\nmode = \"hardware\"\nduration = 100.0\nseed = 3\n[hardware]\nnoise_sigma = 0.02\ndropout_prob = 0.05\n",
        ),
    ] {
        let Config::Run(cfg) = parse_config(doc).unwrap() else { unreachable!() };
        let a = tmp.path().join(format!("{name}-a"));
        let b = tmp.path().join(format!("{name}-b"));
        execute_run(&cfg, Some(&a)).unwrap();
        execute_run(&cfg, Some(&b)).unwrap();
        for f in ["trajectory.csv", "report.toml"] {
            same &= std::fs::read(a.join(f)).unwrap() == std::fs::read(b.join(f)).unwrap();
        }
    }

    let sweep = "duration = 100.0\nseed = 9\n[params]\nk_p = 2.0\nk_m = 0.5\nk_a = 2.0\n[sweep]\n[[sweep.axes]]\nname = \"k_m\"\nmin = -1.0\nmax = 2.4\nsteps = 8\n[[sweep.axes]]\nname = \"k_a\"\nvalues = [1.6, 2.0]\n";
    let Config::Sweep(mut cfg) = parse_config(sweep).unwrap() else { unreachable!() };
    let mut outputs = Vec::new();
    for (tag, jobs) in [("j1", 1), ("j8", 8), ("j8b", 8)] {
        cfg.jobs = jobs;
        let dir = tmp.path().join(tag);
        let (_, summary) = run_sweep(&cfg, &dir).unwrap();
        outputs.push(std::fs::read(summary).unwrap());
    }
    let sweep_same = outputs.windows(2).all(|w| w[0] == w[1]);
    outcome(
        same && sweep_same,
        format!("repeat runs identical: {same}; sweep identical across jobs 1/8/8: {sweep_same}"),
    )
}

fn main() {
    type Check = fn() -> Outcome;
    let criteria: [(&str, Duration, Check); 8] = [
        ("two-particle equilibrium", Duration::from_secs(1), two_particle_equilibrium),
        ("two-particle chase", Duration::from_secs(1), two_particle_chase),
        ("stationary regime with red enclosed", Duration::from_secs(5), stationary_regime),
        ("translational regime led by red", Duration::from_secs(5), chase_regime),
        ("periodic regime", Duration::from_secs(10), periodic_regime),
        ("hardware degradation of the periodic regime", Duration::from_secs(60), hardware_degradation),
        ("invariant suite", Duration::from_secs(10), invariant_suite),
        ("determinism", Duration::from_secs(30), determinism),
    ];
    let mut failed = 0;
    for (i, (name, limit, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = check();
        let took = start.elapsed();
        let pass = out.pass && took <= *limit;
        failed += usize::from(!pass);
        println!(
            "{} criterion {}: {name}: {} [{:.2} s, limit {} s]",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            out.detail,
            took.as_secs_f64(),
            limit.as_secs()
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
