use std::path::Path;

use nrswarm::dynamics::{run, IntegratorConfig};
use nrswarm::io::trajfile::{read_trajectory_from, write_trajectory_to};
use nrswarm::io::{cell_seed, parse_config, read_trajectory, render_svg_string, simulate, sweep_cells, write_trajectory};
use nrswarm::io::{Config, RenderMode, RenderOptions};
use nrswarm::scenario::{RoleParams, ScenarioSpec};
use nrswarm::trajectory::{Mode, Sample, TrajectoryMeta, TrajectoryRecord};
use nrswarm::{Error, Vec2};

fn to_text(t: &TrajectoryRecord) -> String {
    let mut buf = Vec::new();
    write_trajectory_to(t, &mut buf).unwrap();
    String::from_utf8(buf).unwrap()
}

#[test]
fn one_sample_two_agents_gives_two_rows() {
    let t = TrajectoryRecord::new(
        vec![Sample::new(0, 0.0, vec![Vec2::new(0.1, 0.2), Vec2::new(-1.0, 3.5)])],
        TrajectoryMeta::default(),
    )
    .unwrap();
    let text = to_text(&t);
    let data: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(data[0], "step,time,agent_id,is_red,x,y");
    assert_eq!(&data[1..], ["0,0.0,0,1,0.1,0.2", "0,0.0,1,0,-1.0,3.5"]);
}

#[test]
fn files_round_trip_exactly() {
    let spec = ScenarioSpec::named("fig8", 3).unwrap();
    let mut t = run(&spec.initial, &spec.matrix, &IntegratorConfig::default(), 20.0, 7).unwrap();
    t.meta.scenario = "fig8".into();
    t.meta.params = spec.params;
    t.meta.seed = Some(3);
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("t.csv");
    write_trajectory(&t, &p).unwrap();
    let back = read_trajectory(&p).unwrap();
    assert_eq!(back, t);
    assert_eq!(to_text(&back), std::fs::read_to_string(&p).unwrap());
}

#[test]
fn malformed_files_are_format_errors() {
    let bad = [
        "step,time,agent_id,is_red,x,y\n0,0.0,0,1,0.0\n",
        "# nrswarm trajectory\nstep,time,agent_id,is_red,x,y\n0,0.0,0,1,0.0,zero\n",
        "# nrswarm trajectory\n# colour: 1\nstep,time,agent_id,is_red,x,y\n",
        "# nrswarm trajectory\nstep,time,agent_id,is_red,x,y\n0,0.0,1,0,0.0,0.0\n",
    ];
    for text in bad {
        let e = read_trajectory_from(text.as_bytes(), Path::new("mem")).unwrap_err();
        assert!(matches!(e, Error::Format { .. }), "{text:?}: {e}");
    }
    assert!(matches!(read_trajectory(Path::new("/no/such/file")), Err(Error::Io { .. })));
}

#[test]
fn svg_counts_and_determinism() {
    let spec = ScenarioSpec::named("fig8", 0).unwrap();
    let t = run(&spec.initial, &spec.matrix, &IntegratorConfig::default(), 50.0, 10).unwrap();
    let snap = RenderOptions::default();
    let a = render_svg_string(&t, &snap).unwrap();
    assert_eq!(a, render_svg_string(&t, &snap).unwrap());
    assert_eq!(a.matches("<circle").count(), 5);
    assert_eq!(a.matches("fill=\"#d62728\"/>").count(), 1);

    let strip = RenderOptions {
        mode: RenderMode::Filmstrip { panels: 6 },
        ..RenderOptions::default()
    };
    let b = render_svg_string(&t, &strip).unwrap();
    assert_eq!(b.matches("class=\"panel\"").count(), 6);
    assert_eq!(b.matches("<circle").count(), 30);
}

#[test]
fn hardware_meta_is_recorded() {
    let Config::Run(cfg) = parse_config("scenario = \"fig6\"\nmode = \"hardware\"\nduration = 2.0\nseed = 4\n").unwrap() else {
        panic!()
    };
    let t = simulate(&cfg).unwrap();
    assert_eq!(t.meta.mode, Mode::Hardware);
    assert_eq!(t.meta.seed, Some(4));
    assert_eq!(t.meta.params, Some(RoleParams::new(2.0, 0.5, 2.0)));
    assert_eq!(t.meta.integrator.method.to_string(), "euler");
}

#[test]
fn sweep_grid_is_lexicographic_and_seeds_are_stable() {
    let doc = "seed = 1\n[params]\nk_p = 1.0\nk_m = 0.0\nk_a = 1.0\n[sweep]\n[[sweep.axes]]\nname = \"k_p\"\nvalues = [1.0, 2.0]\n[[sweep.axes]]\nname = \"k_a\"\nmin = 0.5\nmax = 1.5\nsteps = 3\n";
    let Config::Sweep(cfg) = parse_config(doc).unwrap() else { panic!() };
    let cells = sweep_cells(&cfg);
    let got: Vec<(f64, f64)> = cells.iter().map(|p| (p.k_p, p.k_a)).collect();
    assert_eq!(got, [(1.0, 0.5), (1.0, 1.0), (1.0, 1.5), (2.0, 0.5), (2.0, 1.0), (2.0, 1.5)]);

    let seeds: Vec<u64> = (0..6).map(|i| cell_seed(1, i)).collect();
    assert_eq!(seeds, (0..6).map(|i| cell_seed(1, i)).collect::<Vec<_>>());
    let mut uniq = seeds.clone();
    uniq.sort();
    uniq.dedup();
    assert_eq!(uniq.len(), 6);
    assert!(seeds.iter().all(|&s| s <= i64::MAX as u64));
    assert_ne!(cell_seed(2, 0), cell_seed(1, 0));
}
