//! Acceptance criteria 1–10. Each test writes one `PASS`/`FAIL` line to
//! stderr (uncaptured) and then asserts.

mod common;

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;
use std::time::{Duration, Instant};

use bubble_core::catalogue::delaunay::capillary_band;
use bubble_core::catalogue::{build, icosphere, ConfigurationKind as Kind, ConfigurationSpec, LinedUpBranch};
use bubble_core::cli::{execute, run_sweep, verify_cluster, ExitCode, ManifestCommand, RunManifest, SweepEntry, SweepGrid};
use bubble_core::flow::{classify, evolve, project_volume_preserving, Configuration, FlowParams};
use bubble_core::geometry::measure::total_area;
use bubble_core::io::{parse_off, write_off_string};
use bubble_core::par::Exec;
use bubble_core::variation::{area_gradient, fit_multipliers, heintze_karcher_check, volume_gradient, volume_gradients, y_cone_stationarity};
use bubble_core::{Cluster, ToleranceProfile, Vec3};
use common::*;
use nalgebra::Rotation3;

struct Checks {
    criterion: u32,
    title: &'static str,
    start: Instant,
    limit: Duration,
    items: Vec<(String, bool)>,
}

impl Checks {
    fn new(criterion: u32, title: &'static str, limit_secs: u64) -> Self {
        Checks {
            criterion,
            title,
            start: Instant::now(),
            limit: Duration::from_secs(limit_secs),
            items: Vec::new(),
        }
    }

    fn check(&mut self, what: impl Into<String>, ok: bool) {
        self.items.push((what.into(), ok));
    }

    fn finish(mut self) {
        let t = self.start.elapsed();
        self.check(format!("runtime {:.2}s ≤ {}s", t.as_secs_f64(), self.limit.as_secs()), t <= self.limit);
        let failed: Vec<&str> = self.items.iter().filter(|(_, ok)| !ok).map(|(s, _)| s.as_str()).collect();
        let pass = failed.is_empty();
        let detail = if pass {
            self.items.iter().map(|(s, _)| s.as_str()).collect::<Vec<_>>().join("; ")
        } else {
            failed.join("; ")
        };
        let _ = writeln!(
            std::io::stderr(),
            "criterion {:>2} {} {}: {detail}",
            self.criterion,
            if pass { "PASS" } else { "FAIL" },
            self.title
        );
        assert!(pass, "criterion {} failed: {detail}", self.criterion);
    }
}

fn spread(xs: &[f64]) -> f64 {
    let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    (hi - lo) / hi.abs()
}

fn medians(report: &bubble_core::variation::VariationReport) -> Vec<f64> {
    report.junctions.values().flat_map(|j| j.pairs.iter().map(|p| p.median_deg)).collect()
}

#[test]
fn criterion_01_gradient_exactness() {
    let mut c = Checks::new(1, "gradient exactness", 10);
    let mut worst_area: f64 = 0.0;
    let mut worst_volume: f64 = 0.0;
    for seed in 0..100 {
        let mesh = random_mesh(seed);
        let h = 1e-5 * mesh.mean_edge_length();
        let ga = area_gradient(&mesh).unwrap();
        worst_area = worst_area.max(max_rel_error(&ga.0, &finite_difference(&mesh, h, area_term)));
        for region in 1..=mesh.num_regions() as u32 {
            let gv = volume_gradient(&mesh, region).unwrap();
            let fd = finite_difference(&mesh, h, |m, f| face_volume(m, f, region));
            worst_volume = worst_volume.max(max_rel_error(&gv.0, &fd));
        }
    }
    c.check(format!("area gradient rel err {worst_area:.2e} ≤ 1e-6"), worst_area <= 1e-6);
    c.check(format!("volume gradient rel err {worst_volume:.2e} ≤ 1e-6"), worst_volume <= 1e-6);
    c.finish();
}

#[test]
fn criterion_02_sphere_stationarity() {
    let mut c = Checks::new(2, "sphere stationarity", 1);
    let mesh = icosphere(Vec3::zeros(), 1.0, 16, &Rotation3::identity(), 1);
    let cluster = Cluster::from_mesh(mesh);
    let report = fit_multipliers(&cluster).unwrap();
    let lambda = report.lambdas[0];
    c.check(format!("λ {lambda:.5} within 2% of 2"), (lambda - 2.0).abs() <= 0.04);
    c.check(format!("residual_rel {:.2e} ≤ 2%", report.residual_rel), report.residual_rel <= 0.02);
    let ga = area_gradient(&cluster.mesh).unwrap();
    let gvs = volume_gradients(&cluster.mesh, 1, Exec::default());
    let ratio = project_volume_preserving(&ga, &gvs).field.norm() / ga.norm();
    c.check(format!("projection ratio {ratio:.2e} ≤ 2%"), ratio <= 0.02);
    c.finish();
}

#[test]
fn criterion_03_double_bubble() {
    let mut c = Checks::new(3, "standard double bubble", 30);
    let spec = ConfigurationSpec::new(Kind::StandardDoubleBubble, vec![1.0, 1.0], relative(0.05));
    let cluster = build(&spec).unwrap();
    let volumes = cluster.volumes();
    let vol_err = volumes.iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
    c.check(format!("volume error {vol_err:.2e} ≤ 0.5%"), vol_err <= 0.005);
    let mc = mc_region_volumes(&cluster.mesh, 2, 10_000_000, 3);
    for (i, (est, sigma)) in mc.iter().enumerate() {
        let z = (est - volumes[i]).abs() / sigma;
        c.check(format!("Monte-Carlo V{} {est:.5} ± {sigma:.1e} ({z:.2}σ)", i + 1), z <= 3.0);
    }
    let report = fit_multipliers(&cluster).unwrap();
    let m = medians(&report);
    let worst = m.iter().map(|a| (a - 120.0).abs()).fold(0.0, f64::max);
    c.check(format!("{} dihedral medians within {worst:.3}° of 120°", m.len()), !m.is_empty() && worst <= 1.0);
    let s = spread(&report.lambdas);
    c.check(format!("λ spread {s:.2e} ≤ 1%"), s <= 0.01);
    c.check(format!("residual_rel {:.2e} ≤ 2%", report.residual_rel), report.residual_rel <= 0.02);
    let fine = build(&ConfigurationSpec::new(Kind::StandardDoubleBubble, vec![1.0, 1.0], relative(0.025))).unwrap();
    let fine_report = fit_multipliers(&fine).unwrap();
    let gain = report.residual_rel / fine_report.residual_rel;
    c.check(format!("refinement gain {gain:.2}× ≥ 1.5×"), gain >= 1.5);
    c.finish();
}

#[test]
fn criterion_04_standard_triple() {
    let mut c = Checks::new(4, "standard triple bubble", 60);
    let cluster = build(&ConfigurationSpec::new(Kind::StandardTriple, vec![1.0; 3], relative(0.05))).unwrap();
    let report = fit_multipliers(&cluster).unwrap();
    let s = spread(&report.lambdas);
    c.check(format!("λ spread {s:.2e} ≤ 1%"), s <= 0.01);
    let cl = classify(&cluster).unwrap();
    let worst = cl.wedge_angles_deg.iter().map(|a| (a - 120.0).abs()).fold(0.0, f64::max);
    c.check(
        format!("wedges {:?} within {worst:.3}° of 120°", cl.wedge_angles_deg.iter().map(|a| format!("{a:.3}")).collect::<Vec<_>>()),
        cl.wedge_angles_deg.len() == 3 && worst <= 0.5,
    );
    c.check(
        format!("classified ({}, {:?})", cl.case_label, cl.configuration),
        cl.case_number == Some(4) && cl.configuration == Configuration::StandardTriple && cl.pairing_holds(),
    );
    c.finish();
}

#[test]
fn criterion_05_lined_up_triple() {
    let mut c = Checks::new(5, "lined-up triple bubble", 60);
    let lobe = 9.0 * PI / 8.0;
    let base = [11.0 * PI / 12.0, lobe, lobe];
    let mut specs = Vec::new();
    for scale in [0.5, 1.0, 2.0] {
        for b in LinedUpBranch::ALL {
            specs.push(ConfigurationSpec::new(Kind::LinedUpTriple, base.iter().map(|v| v * scale).collect(), relative(0.05)).with_branch(b));
        }
    }
    for w in [15.0, 45.0] {
        let mut s = ConfigurationSpec::new(Kind::LinedUpTriple, base.to_vec(), relative(0.05)).with_branch(LinedUpBranch::NonParallel);
        s.wedge_angle_deg = Some(w);
        specs.push(s);
    }
    let mut classified = 0;
    for spec in &specs {
        let branch = spec.branch.unwrap();
        let cluster = match build(spec) {
            Ok(cl) => cl,
            Err(e) => {
                c.check(format!("{} build: {e}", branch.as_str()), false);
                continue;
            }
        };
        let cl = classify(&cluster).unwrap();
        let ok = cl.case_number == Some(3)
            && cl.configuration == Configuration::LinedUpTriple
            && cl.branch.as_deref() == Some(branch.as_str())
            && cl.pairing_holds();
        if ok {
            classified += 1;
        } else {
            c.check(format!("{} classified {:?} {:?}: {:?}", branch.as_str(), cl.configuration, cl.branch, cl.failed), false);
        }
        match branch {
            LinedUpBranch::PointContact => {
                let opening = cl.wedge_angles_deg[0];
                c.check(format!("point-contact opening {opening:.3}°"), (opening - 60.0).abs() <= 0.5);
            }
            LinedUpBranch::Parallel if spec.volumes[1] == lobe => {
                let r = cluster.construction.as_ref().unwrap().radii[0];
                let band = capillary_band(2.0 / r, r * 3f64.sqrt() / 2.0, PI / 6.0).unwrap();
                let worst = band.samples.iter().map(|p| band.cmc_residual(p).abs()).fold(0.0, f64::max);
                c.check(format!("parallel CMC residual {worst:.1e} ≤ 1e-8 at {} samples", band.samples.len()), worst <= 1e-8);
                let m = medians(&fit_multipliers(&cluster).unwrap());
                let dev = m.iter().map(|a| (a - 120.0).abs()).fold(0.0, f64::max);
                c.check(format!("parallel contact within {dev:.3}° of 120°"), dev <= 0.5);
            }
            _ => {}
        }
    }
    c.check(format!("{classified}/{} classified as lined-up with their branch", specs.len()), classified == specs.len());
    c.finish();
}

#[test]
fn criterion_06_y_cone_law() {
    let mut c = Checks::new(6, "Y-cone law", 1);
    let mut r = rng(6);
    let mut worst_stationary: f64 = 0.0;
    for _ in 0..100 {
        let n = unit(&mut r);
        let e = unit(&mut r).cross(&n).normalize();
        let f = n.cross(&e);
        let v = [0.0f64, 120.0, 240.0].map(|a| e * a.to_radians().cos() + f * a.to_radians().sin());
        worst_stationary = worst_stationary.max(y_cone_stationarity(v).1);
    }
    c.check(format!("defect at mutual 120° ≤ {worst_stationary:.1e}"), worst_stationary <= 1e-12);
    let mut min_defect = f64::INFINITY;
    let step = 0.5;
    let mut a = 0.0;
    while a <= 360.0 {
        let mut b = 0.0;
        while a + b <= 360.0 {
            let g = 360.0 - a - b;
            if g <= 180.0 && a <= 180.0 && b <= 180.0 && [a, b, g].iter().all(|t: &f64| (t - 120.0).abs() >= 10.0) {
                let v = [0.0, a, a + b].map(|t: f64| Vec3::new(t.to_radians().cos(), t.to_radians().sin(), 0.0));
                min_defect = min_defect.min(y_cone_stationarity(v).1);
            }
            b += step;
        }
        a += step;
    }
    c.check(format!("min defect {min_defect:.3} > 0.25 when every gap is ≥ 10° off"), min_defect > 0.25);
    let mut agree = 0;
    for _ in 0..1000 {
        let v = [unit(&mut r), unit(&mut r), unit(&mut r)];
        let (flag, d) = y_cone_stationarity(v);
        let oracle = y_cone_brute_force(v);
        if (d - oracle).abs() <= 1e-12 && flag == (oracle <= 1e-9) {
            agree += 1;
        }
    }
    c.check(format!("brute-force oracle agrees on {agree}/1000"), agree == 1000);
    c.finish();
}

#[test]
fn criterion_07_heintze_karcher() {
    let mut c = Checks::new(7, "Heintze–Karcher", 5);
    let sphere = icosphere(Vec3::zeros(), 1.0, 16, &Rotation3::identity(), 1);
    let hk = heintze_karcher_check(&sphere, 1).unwrap();
    c.check(format!("icosphere gap_rel {:.2e} ≤ 2%", hk.gap_rel), hk.gap_rel.abs() <= 0.02);
    let mut ellipsoid = sphere.clone();
    ellipsoid.vertices.iter_mut().for_each(|v| v.z *= 2.0);
    let hk = heintze_karcher_check(&ellipsoid, 1).unwrap();
    let (rhs, vol) = spheroid_hk(1.0, 2.0);
    let oracle = (rhs - vol) / vol;
    c.check(format!("ellipsoid gap_rel {:.4} > 5%", hk.gap_rel), hk.gap_rel > 0.05);
    let agreement = (hk.gap_rel - oracle).abs() / oracle;
    c.check(format!("quadrature oracle {oracle:.4}, disagreement {:.1}% ≤ 10%", 100.0 * agreement), agreement <= 0.1);
    c.finish();
}

#[test]
fn criterion_08_flow_recovery() {
    let mut c = Checks::new(8, "flow recovery", 300);
    let params = FlowParams {
        jitter: 0.05,
        seed: 7,
        ..Default::default()
    };
    let db = build(&ConfigurationSpec::new(Kind::StandardDoubleBubble, vec![1.0, 1.0], freq(6))).unwrap();
    let out = evolve(&db, &params).unwrap();
    let steps = out.trace.len() - 1;
    let gain = out.initial_residual() / out.final_residual();
    c.check(format!("{steps} steps ≤ 2000"), steps <= 2000);
    c.check(
        format!("residual {:.2e} → {:.2e} ({gain:.0}×)", out.initial_residual(), out.final_residual()),
        gain >= 10.0,
    );
    let vol_err = out
        .cluster
        .volumes()
        .iter()
        .zip(&out.cluster.target_volumes)
        .map(|(v, t)| ((v - t) / t).abs())
        .fold(0.0, f64::max);
    c.check(format!("volume error {vol_err:.1e} ≤ 0.5%"), vol_err <= 0.005);
    match classify(&out.cluster) {
        Ok(cl) => c.check(format!("classified {:?}", cl.configuration), cl.configuration == Configuration::StandardDoubleBubble),
        Err(e) => c.check(format!("classify: {e}"), false),
    }
    let ball = build(&ConfigurationSpec::new(Kind::DisjointBalls, vec![1.0], freq(6))).unwrap();
    let out = evolve(&ball, &params).unwrap();
    let area = total_area(&out.cluster.mesh, Exec::default());
    let bound = (36.0 * PI).cbrt();
    c.check(format!("sphere area {area:.5} vs bound {bound:.5}"), (area / bound - 1.0).abs() <= 0.01);
    c.finish();
}

#[test]
fn criterion_09_classification_totality() {
    let mut c = Checks::new(9, "classification totality", 600);
    let rows = run_sweep(&SweepGrid::default_grid().expand(), &ToleranceProfile::default());
    let failed: Vec<String> = rows.iter().filter(|r| !r.passed).map(|r| format!("row {} {}: {}", r.index, r.kind, r.message)).collect();
    c.check(format!("{}/{} default-grid rows pass {failed:?}", rows.len() - failed.len(), rows.len()), failed.is_empty());
    for vols in [vec![1.0, 2.0], vec![0.5, 1.0, 2.0]] {
        let cluster = build(&ConfigurationSpec::new(Kind::DisjointBalls, vols.clone(), relative(0.05))).unwrap();
        let (report, code) = verify_cluster(&cluster).unwrap();
        c.check(
            format!("unequal balls {vols:?} verify (residual {:.1e})", report.report.residual_rel),
            code == ExitCode::Success,
        );
    }
    c.finish();
}

fn run_twice(m: &RunManifest, files: &[&str]) -> Vec<(String, bool)> {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [a.path(), b.path()] {
        let mut m = m.clone();
        m.out = dir.to_path_buf();
        execute(&m).unwrap();
    }
    let read = |d: &Path, f: &str| std::fs::read(d.join(f)).unwrap_or_default();
    files
        .iter()
        .map(|f| {
            let x = read(a.path(), f);
            (format!("{f} identical ({} bytes)", x.len()), !x.is_empty() && x == read(b.path(), f))
        })
        .collect()
}

#[test]
fn criterion_10_determinism_and_formats() {
    let mut c = Checks::new(10, "determinism and formats", 120);
    let spec = ConfigurationSpec::new(Kind::StandardTriple, vec![1.0; 3], freq(6));
    let mut build_m = RunManifest::new(ManifestCommand::Build, None, None);
    build_m.spec = Some(serde_json::to_value(&spec).unwrap());
    for (what, ok) in run_twice(&build_m, &["mesh.off"]) {
        c.check(what, ok);
    }
    let mut evolve_m = RunManifest::new(ManifestCommand::Evolve, None, None);
    evolve_m.spec = Some(serde_json::to_value(ConfigurationSpec::new(Kind::StandardDoubleBubble, vec![1.0, 1.0], freq(6))).unwrap());
    evolve_m.flow = Some(FlowParams {
        jitter: 0.05,
        max_steps: 300,
        ..Default::default()
    });
    evolve_m.seed = Some(11);
    for (what, ok) in run_twice(&evolve_m, &["cluster.final.off", "cluster.trace.csv"]) {
        c.check(what, ok);
    }
    let grid = SweepGrid {
        entries: vec![SweepEntry {
            kind: Kind::StandardDoubleBubble,
            volumes: vec![vec![1.0, 1.0], vec![2.0, 2.0]],
            branches: vec![],
            placement: None,
        }],
        resolutions: vec![freq(8)],
    };
    let dir = tempfile::tempdir().unwrap();
    let grid_path = dir.path().join("grid.json");
    std::fs::write(&grid_path, serde_json::to_string(&grid).unwrap()).unwrap();
    let sweep_m = RunManifest::new(ManifestCommand::CatalogueSweep, Some(grid_path), None);
    for (what, ok) in run_twice(&sweep_m, &["sweep.csv"]) {
        c.check(what, ok);
    }
    let mut identical = 0;
    let meshes = [
        build(&spec).unwrap().mesh,
        build(&ConfigurationSpec::new(Kind::LinedUpTriple, vec![11.0 * PI / 12.0, 9.0 * PI / 8.0, 9.0 * PI / 8.0], freq(6)).with_branch(LinedUpBranch::Parallel)).unwrap().mesh,
        random_mesh(5),
    ];
    for mesh in &meshes {
        let s = write_off_string(mesh);
        if write_off_string(&parse_off(&s).unwrap()) == s {
            identical += 1;
        }
    }
    c.check(format!("OFF round-trip byte-identical {identical}/{}", meshes.len()), identical == meshes.len());
    c.finish();
}
