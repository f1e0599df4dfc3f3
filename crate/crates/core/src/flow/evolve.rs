use std::collections::VecDeque;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::project::project_weighted;
use super::remesh::remesh;
use crate::error::{Error, Result};
use crate::geometry::measure::{all_volumes, total_area};
use crate::geometry::{Cluster, LabeledMesh, Vec3};
use crate::par::{map_collect, Exec};
use crate::variation::fit::{fit_gradients, solve_gram};
use crate::variation::{area_gradient_with, volume_gradients, GradientField};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, schemars::JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum StepRule {
    Fixed,
    #[default]
    Backtracking,
}

/// Parameters of [`evolve`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, schemars::JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct FlowParams {
    pub max_steps: usize,
    pub step_rule: StepRule,
    /// Initial time step in units of the squared mean edge length.
    pub initial_step: f64,
    /// Relative volume error tolerated after each step.
    pub volume_projection_tol: f64,
    /// Stop once the stationarity residual falls to this value.
    pub convergence_residual_rel: f64,
    /// Remesh every this many accepted steps; 0 disables remeshing.
    pub remesh_interval: usize,
    pub seed: u64,
    /// Uniform vertex perturbation applied before the flow, as a fraction
    /// of the smallest region radius.
    pub jitter: f64,
    /// Number of L-BFGS correction pairs kept with backtracking; 0 gives
    /// plain preconditioned descent.
    pub memory: usize,
}

impl Default for FlowParams {
    fn default() -> Self {
        FlowParams {
            max_steps: 2000,
            step_rule: StepRule::Backtracking,
            initial_step: 0.1,
            volume_projection_tol: 1e-10,
            convergence_residual_rel: 1e-6,
            remesh_interval: 50,
            seed: 0,
            jitter: 0.0,
            memory: 8,
        }
    }
}

impl FlowParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.initial_step > 0.0) {
            return Err(Error::InvalidSpec(format!("initial_step must be positive, got {}", self.initial_step)));
        }
        if !(self.convergence_residual_rel > 0.0) {
            return Err(Error::InvalidSpec(format!(
                "convergence_residual_rel must be positive, got {}",
                self.convergence_residual_rel
            )));
        }
        if !(self.volume_projection_tol > 0.0) {
            return Err(Error::InvalidSpec("volume_projection_tol must be positive".into()));
        }
        if !(self.jitter >= 0.0) {
            return Err(Error::InvalidSpec("jitter must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceRow {
    pub step: usize,
    pub area: f64,
    pub residual_rel: f64,
    /// `(V_i - target_i) / target_i` per region.
    pub vol_err: Vec<f64>,
    pub step_size: f64,
}

/// Writes the trace as CSV: `step, area, residual_rel, vol_err_1..k, step_size`.
pub fn write_trace_csv<W: Write>(rows: &[TraceRow], k: usize, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["step".to_string(), "area".into(), "residual_rel".into()];
    header.extend((1..=k).map(|i| format!("vol_err_{i}")));
    header.push("step_size".into());
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![r.step.to_string(), r.area.to_string(), r.residual_rel.to_string()];
        rec.extend(r.vol_err.iter().map(f64::to_string));
        rec.push(r.step_size.to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvolveOutcome {
    pub cluster: Cluster,
    pub trace: Vec<TraceRow>,
    pub converged: bool,
    pub stop_reason: String,
}

impl EvolveOutcome {
    pub fn initial_residual(&self) -> f64 {
        self.trace[0].residual_rel
    }

    pub fn final_residual(&self) -> f64 {
        self.trace.last().map_or(f64::NAN, |r| r.residual_rel)
    }
}

/// Uniform perturbation of every vertex by up to `amplitude` per coordinate.
pub fn jitter(mesh: &mut LabeledMesh, amplitude: f64, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for v in &mut mesh.vertices {
        *v += Vec3::from_fn(|_, _| rng.random_range(-amplitude..=amplitude));
    }
}

/// Radius of the ball with the smallest region volume, or the smallest
/// constructed sphere radius when available.
fn reference_radius(cluster: &Cluster) -> f64 {
    if let Some(c) = &cluster.construction {
        if let Some(r) = c.radii.iter().cloned().reduce(f64::min) {
            return r;
        }
    }
    let v = cluster.target_volumes.iter().cloned().fold(f64::INFINITY, f64::min);
    (3.0 * v / (4.0 * std::f64::consts::PI)).cbrt()
}

/// Lumped (barycentric dual) vertex areas.
fn vertex_mass(mesh: &LabeledMesh) -> Vec<f64> {
    let mut m = vec![0.0; mesh.num_vertices()];
    for (f, face) in mesh.faces.iter().enumerate() {
        let a = mesh.face_area(f) / 3.0;
        for &v in face {
            m[v as usize] += a;
        }
    }
    m
}

fn face_normals(mesh: &LabeledMesh, exec: Exec) -> Vec<Vec3> {
    map_collect(exec, mesh.num_faces(), |f| mesh.face_cross(f))
}

/// True when some face turned over relative to `before`.
fn folded(before: &[Vec3], mesh: &LabeledMesh, exec: Exec) -> bool {
    let after = face_normals(mesh, exec);
    before.iter().zip(&after).any(|(a, b)| a.dot(b) <= 0.0)
}

/// Rejects inputs with inconsistent orientation, degenerate faces, or
/// neighbouring faces of one interface folded onto each other.
fn check_input(cluster: &Cluster) -> Result<()> {
    let mesh = &cluster.mesh;
    match mesh.validate() {
        Ok(()) => {}
        Err(e @ (Error::OrientationError { .. } | Error::DegenerateTriangle { .. })) => {
            return Err(Error::MeshDegeneracy(e.to_string()));
        }
        Err(e) => return Err(e),
    }
    let topo = mesh.edge_topology();
    let mut edges: Vec<_> = topo.edges.iter().filter(|(_, fs)| fs.len() == 2).collect();
    edges.sort_unstable_by_key(|(e, _)| **e);
    for (e, fs) in edges {
        let (f1, f2) = (fs[0] as usize, fs[1] as usize);
        if mesh.labels[f1] == mesh.labels[f2] && mesh.face_normal(f1).dot(&mesh.face_normal(f2)) < -0.5 {
            return Err(Error::MeshDegeneracy(format!(
                "faces {f1} and {f2} fold over edge {}-{}",
                e.0, e.1
            )));
        }
    }
    Ok(())
}

struct Eval {
    area: f64,
    ga: GradientField,
    gvs: Vec<GradientField>,
    residual_rel: f64,
    vol_err: Vec<f64>,
}

fn evaluate(mesh: &LabeledMesh, targets: &[f64], exec: Exec) -> Result<Eval> {
    let k = targets.len();
    let ga = area_gradient_with(mesh, exec).map_err(|e| Error::MeshDegeneracy(e.to_string()))?;
    let gvs = volume_gradients(mesh, k, exec);
    let residual_rel = fit_gradients(&ga, &gvs).residual_rel;
    let vols = all_volumes(mesh, k, exec);
    Ok(Eval {
        area: total_area(mesh, exec),
        ga,
        gvs,
        residual_rel,
        vol_err: vols.iter().zip(targets).map(|(v, t)| (v - t) / t).collect(),
    })
}

/// Newton iteration on the volume constraints along `M⁻¹ ∇V_i`.
fn correct_volumes(mesh: &mut LabeledMesh, targets: &[f64], tol: f64, exec: Exec) -> bool {
    let k = targets.len();
    for _ in 0..20 {
        let vols = all_volumes(mesh, k, exec);
        let err: Vec<f64> = targets.iter().zip(&vols).map(|(t, v)| t - v).collect();
        if err.iter().zip(targets).all(|(e, t)| (e / t).abs() <= tol) {
            return true;
        }
        let inv_mass: Vec<f64> = vertex_mass(mesh).iter().map(|m| if *m > 0.0 { 1.0 / m } else { 0.0 }).collect();
        let gvs = volume_gradients(mesh, k, exec);
        let gram = nalgebra::DMatrix::from_fn(k, k, |i, j| gvs[i].dot_weighted(&gvs[j], &inv_mass));
        let rhs = nalgebra::DVector::from_column_slice(&err);
        let (mu, _) = solve_gram(&gram, &rhs);
        for (v, p) in mesh.vertices.iter_mut().enumerate() {
            let mut d = Vec3::zeros();
            for (m, g) in mu.iter().zip(&gvs) {
                d += g[v] * *m;
            }
            *p += d * inv_mass[v];
        }
    }
    false
}

fn dot_m(a: &[Vec3], b: &[Vec3], mass: &[f64]) -> f64 {
    let terms: Vec<f64> = a.iter().zip(b).zip(mass).map(|((x, y), m)| m * x.dot(y)).collect();
    crate::par::pairwise_sum(&terms)
}

fn diff(a: &[Vec3], b: &[Vec3]) -> Vec<Vec3> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Curvature pairs `(s, y, 1/⟨s, y⟩)` in the lumped-mass metric.
struct History {
    pairs: VecDeque<(Vec<Vec3>, Vec<Vec3>, f64)>,
    cap: usize,
}

impl History {
    fn push(&mut self, s: Vec<Vec3>, y: Vec<Vec3>, mass: &[f64]) {
        let sy = dot_m(&s, &y, mass);
        let scale = (dot_m(&s, &s, mass) * dot_m(&y, &y, mass)).sqrt();
        if self.cap == 0 || !(sy > 1e-10 * scale) {
            return;
        }
        if self.pairs.len() == self.cap {
            self.pairs.pop_front();
        }
        self.pairs.push_back((s, y, 1.0 / sy));
    }

    /// Two-loop recursion: approximate inverse Hessian applied to `g`.
    fn apply(&self, g: &[Vec3], mass: &[f64], gamma0: f64) -> Vec<Vec3> {
        let mut q = g.to_vec();
        let mut alphas = Vec::with_capacity(self.pairs.len());
        for (s, y, rho) in self.pairs.iter().rev() {
            let a = rho * dot_m(s, &q, mass);
            q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= yi * a);
            alphas.push(a);
        }
        let gamma = self
            .pairs
            .back()
            .map_or(gamma0, |(s, y, _)| dot_m(s, y, mass) / dot_m(y, y, mass));
        let mut r: Vec<Vec3> = q.iter().map(|x| x * gamma).collect();
        for ((s, y, rho), a) in self.pairs.iter().zip(alphas.iter().rev()) {
            let b = rho * dot_m(y, &r, mass);
            r.iter_mut().zip(s).for_each(|(ri, si)| *ri += si * (a - b));
        }
        r
    }
}

/// Removes from `d` its first-order change of every region volume.
fn tangent_to_volumes(d: &mut [Vec3], gvs: &[GradientField], inv_mass: &[f64]) {
    let k = gvs.len();
    let gram = nalgebra::DMatrix::from_fn(k, k, |i, j| gvs[i].dot_weighted(&gvs[j], inv_mass));
    let rhs = nalgebra::DVector::from_fn(k, |i, _| gvs[i].0.iter().zip(d.iter()).map(|(g, x)| g.dot(x)).sum());
    let (mu, _) = solve_gram(&gram, &rhs);
    for (v, x) in d.iter_mut().enumerate() {
        for (m, g) in mu.iter().zip(gvs) {
            *x -= g[v] * (*m * inv_mass[v]);
        }
    }
}

fn row(step: usize, e: &Eval, tau: f64) -> TraceRow {
    TraceRow {
        step,
        area: e.area,
        residual_rel: e.residual_rel,
        vol_err: e.vol_err.clone(),
        step_size: tau,
    }
}

/// Volume-constrained area descent.
///
/// Each step moves vertices along `-M⁻¹ P`, with `M` the lumped vertex areas
/// and `P` the area gradient projected off the volume gradients in the
/// `M⁻¹` inner product, then restores the volumes. With backtracking, a step
/// is halved until total area does not increase and no face turns over.
pub fn evolve(cluster: &Cluster, params: &FlowParams) -> Result<EvolveOutcome> {
    evolve_with(cluster, params, Exec::default())
}

pub fn evolve_with(cluster: &Cluster, params: &FlowParams, exec: Exec) -> Result<EvolveOutcome> {
    params.validate()?;
    check_input(cluster)?;
    let targets = cluster.target_volumes.clone();
    let mut mesh = cluster.mesh.clone();
    if params.jitter > 0.0 {
        jitter(&mut mesh, params.jitter * reference_radius(cluster), params.seed);
    }
    if params.max_steps > 0 && !correct_volumes(&mut mesh, &targets, params.volume_projection_tol, exec) {
        return Err(Error::MeshDegeneracy("volume constraints cannot be restored".into()));
    }
    let h0 = mesh.mean_edge_length();
    let base = params.initial_step * h0 * h0;
    let (tau_min, tau_max) = (1e-8 * base, 8.0 * base);
    let mut tau = base;
    let mut current = evaluate(&mesh, &targets, exec)?;
    let mut trace = vec![row(0, &current, 0.0)];
    let mut converged = current.residual_rel <= params.convergence_residual_rel;
    let mut stop_reason = if converged { "converged" } else { "max_steps" }.to_string();

    let quasi_newton = params.memory > 0 && params.step_rule == StepRule::Backtracking;
    let mut history = History {
        pairs: VecDeque::new(),
        cap: params.memory,
    };
    let mut previous: Option<(Vec<Vec3>, Vec<Vec3>)> = None;

    for step in 1..=params.max_steps {
        if converged {
            break;
        }
        let mass = vertex_mass(&mesh);
        let inv_mass: Vec<f64> = mass.iter().map(|m| if *m > 0.0 { 1.0 / m } else { 0.0 }).collect();
        let p = project_weighted(&current.ga, &current.gvs, Some(&inv_mass)).field;
        let g: Vec<Vec3> = p.0.iter().zip(&inv_mass).map(|(g, w)| g * *w).collect();
        let (dir, mut alpha, alpha_min) = if quasi_newton {
            if let Some((x0, g0)) = previous.take() {
                history.push(diff(&mesh.vertices, &x0), diff(&g, &g0), &mass);
            }
            let mut d: Vec<Vec3> = history.apply(&g, &mass, base).iter().map(|x| -x).collect();
            tangent_to_volumes(&mut d, &current.gvs, &inv_mass);
            let slope: f64 = current.ga.0.iter().zip(&d).map(|(a, b)| a.dot(b)).sum();
            if !(slope < 0.0) {
                history.pairs.clear();
                d = g.iter().map(|x| -x * base).collect();
            }
            let longest = d.iter().map(|x| x.norm()).fold(0.0, f64::max);
            if longest > 0.25 * h0 {
                let s = 0.25 * h0 / longest;
                d.iter_mut().for_each(|x| *x *= s);
            }
            (d, 1.0, 1e-8)
        } else {
            (g.iter().map(|x| -x).collect::<Vec<Vec3>>(), tau, tau_min)
        };
        let normals = face_normals(&mesh, exec);

        let mut accepted = None;
        let mut fold_seen = false;
        while alpha >= alpha_min {
            let mut trial = mesh.clone();
            for (x, d) in trial.vertices.iter_mut().zip(&dir) {
                *x += d * alpha;
            }
            let fold = folded(&normals, &trial, exec);
            fold_seen |= fold;
            let ok = !fold
                && correct_volumes(&mut trial, &targets, params.volume_projection_tol, exec)
                && !folded(&normals, &trial, exec);
            if ok {
                let e = evaluate(&trial, &targets, exec)?;
                if params.step_rule == StepRule::Fixed || e.area <= current.area {
                    accepted = Some((trial, e));
                    break;
                }
            } else if params.step_rule == StepRule::Fixed {
                return Err(Error::MeshDegeneracy(format!("face turned over at step {step}")));
            }
            alpha *= 0.5;
        }
        let Some((next, e)) = accepted else {
            if fold_seen && trace.len() == 1 {
                return Err(Error::MeshDegeneracy("no step avoids turning a face over".into()));
            }
            stop_reason = "stalled".into();
            break;
        };
        // effective time step: displacement per unit preconditioned gradient
        let step_tau = if quasi_newton {
            let gmax = g.iter().map(|x| x.norm()).fold(0.0, f64::max);
            let dmax = dir.iter().map(|x| x.norm()).fold(0.0, f64::max);
            if gmax > 0.0 {
                alpha * dmax / gmax
            } else {
                0.0
            }
        } else {
            alpha
        };
        if quasi_newton {
            previous = Some((mesh.vertices.clone(), g));
        } else if params.step_rule == StepRule::Backtracking {
            tau = (alpha * 1.25).min(tau_max);
        }
        mesh = next;
        current = e;
        if params.remesh_interval > 0 && step % params.remesh_interval == 0 {
            let mut candidate = mesh.clone();
            let stats = remesh(&mut candidate, 2.0 * h0);
            if stats.flips + stats.splits > 0
                && correct_volumes(&mut candidate, &targets, params.volume_projection_tol, exec)
            {
                let e = evaluate(&candidate, &targets, exec)?;
                if e.area <= current.area {
                    log::debug!("step {step}: remesh {} flips, {} splits", stats.flips, stats.splits);
                    mesh = candidate;
                    current = e;
                    history.pairs.clear();
                    previous = None;
                }
            }
        }
        trace.push(row(step, &current, step_tau));
        if current.residual_rel <= params.convergence_residual_rel {
            converged = true;
            stop_reason = "converged".into();
        }
    }
    log::info!(
        "flow: {} steps, residual {:.3e} -> {:.3e} ({stop_reason})",
        trace.len() - 1,
        trace[0].residual_rel,
        current.residual_rel
    );
    let out = Cluster {
        k: cluster.k,
        target_volumes: targets,
        mesh,
        tolerance: cluster.tolerance.clone(),
        construction: cluster.construction.clone(),
    };
    Ok(EvolveOutcome {
        cluster: out,
        trace,
        converged,
        stop_reason,
    })
}
