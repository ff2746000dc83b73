//! Acceptance gate: prints one PASS/FAIL line per criterion and exits non-zero if any fails.

use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use nalgebra::{DMatrix, Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vsds::batch;
use vsds::io::{build_nominal, compile_policy, load_scenario, ScenarioConfig};
use vsds::mat;
use vsds::nominal::make_tangent_linear_ds;
use vsds::quaternion::{distance, exp_map, log_map, UnitQuaternion};
use vsds::sim::{
    critical_damping, dynamics_step, half_step_discrepancy, joint_torque_map, simulate,
    DisturbanceKind, InertiaTensor, RigidBodyState, SimSettings, TimeIndexedPd, Trajectory,
    VsdsController,
};
use vsds::stiffness::{StiffnessProfile, TabulatedNode};
use vsds::{build_springs, sample_via_points, Error, VsdsPolicy};

type Outcome = (bool, String);

fn scenario(name: &str) -> ScenarioConfig {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(name);
    load_scenario(path).expect("bundled scenario")
}

struct Loaded {
    cfg: ScenarioConfig,
    policy: VsdsPolicy,
    plant: InertiaTensor,
    damping: Matrix3<f64>,
}

impl Loaded {
    fn new(name: &str) -> Self {
        let cfg = scenario(name);
        let policy = compile_policy(&cfg).unwrap();
        let plant = InertiaTensor::new(mat::from_rows(&cfg.inertia)).unwrap();
        let damping = critical_damping(&policy, &plant);
        Self {
            cfg,
            policy,
            plant,
            damping,
        }
    }

    fn settings(&self) -> SimSettings {
        SimSettings {
            dt: self.cfg.dt,
            t_max: self.cfg.t_max,
            eps_stop: self.cfg.eps_stop,
            omega_stop: self.cfg.omega_stop,
            early_stop: true,
        }
    }

    fn controller(&self) -> VsdsController<'_> {
        VsdsController {
            policy: &self.policy,
            damping: self.damping,
        }
    }

    fn starts(&self) -> Vec<(UnitQuaternion, Vector3<f64>)> {
        self.cfg.initial_states(self.cfg.seed).unwrap()
    }

    fn run_all(&self) -> Vec<Trajectory> {
        let c = self.controller();
        batch::map(&self.starts(), |(q, w)| {
            simulate(
                &c,
                &self.plant,
                q,
                w,
                &self.settings(),
                &self.cfg.disturbances,
            )
            .unwrap()
        })
    }

    /// Largest half-step discrepancy over all starts.
    fn half_step(&self, runs: &[Trajectory]) -> f64 {
        let c = self.controller();
        self.starts()
            .iter()
            .zip(runs)
            .map(|((q, w), tr)| {
                half_step_discrepancy(
                    &c,
                    &self.plant,
                    q,
                    w,
                    &self.settings(),
                    &self.cfg.disturbances,
                    tr,
                )
                .unwrap()
            })
            .fold(0.0, f64::max)
    }
}

fn random_quaternion(rng: &mut impl Rng) -> UnitQuaternion {
    loop {
        let a: [f64; 4] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let n2: f64 = a.iter().map(|x| x * x).sum();
        if n2 > 1e-4 && n2 <= 1.0 {
            return UnitQuaternion::new_normalize(a[0], a[1], a[2], a[3]).unwrap();
        }
    }
}

fn random_unit_vector(rng: &mut impl Rng) -> Vector3<f64> {
    loop {
        let v = Vector3::from_fn(|_, _| rng.random_range(-1.0..1.0));
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v / n;
        }
    }
}

fn ac1() -> Outcome {
    let wall = Instant::now();
    let s = Loaded::new("multistart.json");
    let starts = s.starts();
    let runs = s.run_all();
    let elapsed = wall.elapsed().as_secs_f64();
    let goal = s.policy.goal();
    let via = s.policy.via_points();

    let mut ok = starts.len() == 8 && elapsed < 30.0;
    let mut worst_final: f64 = 0.0;
    let mut worst_entry: f64 = 0.0;
    for ((q0, w0), tr) in starts.iter().zip(&runs) {
        let d0 = distance(q0, &goal);
        ok &= (0.3..=2.5).contains(&d0) && *w0 == Vector3::zeros();
        let last = tr.last().unwrap();
        ok &= tr.converged
            && last.dist_goal < 0.02
            && Vector3::from(last.omega).norm() < 0.05
            && tr.duration() <= 30.0;
        worst_final = worst_final.max(last.dist_goal);
        let entry = tr
            .samples
            .iter()
            .find(|r| via.chain_distance(&r.q) < 0.05)
            .map_or(f64::INFINITY, |r| {
                r.t / tr.duration().max(f64::MIN_POSITIVE)
            });
        ok &= entry < 0.8;
        worst_entry = worst_entry.max(entry);
    }
    (
        ok,
        format!(
            "{} starts, worst final d = {worst_final:.4} rad, chain entry by {:.0}% of duration, wall {elapsed:.2} s",
            starts.len(),
            100.0 * worst_entry
        ),
    )
}

fn ac2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let base = random_quaternion(&mut rng);
        let zeta = random_unit_vector(&mut rng) * rng.random_range(0.0..PI - 0.01);
        let q = exp_map(&base, &zeta).unwrap();
        let back = log_map(&base, &q).unwrap();
        worst = worst.max((back - zeta).norm());
    }
    let mut branch_ok = true;
    for _ in 0..1000 {
        let b = random_quaternion(&mut rng);
        branch_ok &= matches!(log_map(&b, &-b), Err(Error::Antipodal));
        branch_ok &= log_map(&b, &b).is_ok();
        let near = exp_map(&b, &(random_unit_vector(&mut rng) * (PI - 1e-6))).unwrap();
        branch_ok &= log_map(&b, &near).is_ok();
    }
    (
        worst < 1e-9 && branch_ok,
        format!("max round-trip error {worst:.2e}; antipodal branch exact: {branch_ok}"),
    )
}

fn ac3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut antipodal = true;
    for _ in 0..1000 {
        let q = random_quaternion(&mut rng);
        antipodal &= distance(&q, &-q) == 2.0 * PI;
    }
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let theta = rng.random_range(1e-9..PI);
        let q = UnitQuaternion::from_axis_angle(&random_unit_vector(&mut rng), theta);
        worst = worst.max((distance(&UnitQuaternion::identity(), &q) - theta).abs());
    }
    (
        antipodal && worst < 1e-9,
        format!("d(q,-q) = 2π exactly: {antipodal}; max |d - θ| = {worst:.2e}"),
    )
}

fn ac4() -> Outcome {
    let goal = UnitQuaternion::from_rotation_vector(&Vector3::new(0.2, -0.1, 0.25));
    let q0 = UnitQuaternion::from_rotation_vector(&Vector3::new(1.6, 1.2, 0.5)) * goal;
    let geodesic = make_tangent_linear_ds(-Matrix3::identity(), goal).unwrap();
    let curved = make_tangent_linear_ds(
        Matrix3::new(-1.0, -0.8, 0.0, 0.8, -1.0, 0.0, 0.0, 0.0, -1.5),
        goal,
    )
    .unwrap();
    let mut ok = true;
    let mut cvs = Vec::new();
    for ds in [&geodesic, &curved] {
        let via = sample_via_points(ds, &q0, &goal, 30, 0.002, 0.05).unwrap();
        let cv = via.spacing_cv();
        ok &= cv < 0.05 && *via.points.last().unwrap() == goal;
        cvs.push(cv);
    }
    (
        ok,
        format!(
            "spacing stdev/mean: geodesic {:.4}, curved {:.4}; final via-point == goal",
            cvs[0], cvs[1]
        ),
    )
}

fn ac5() -> Outcome {
    let goal = UnitQuaternion::identity();
    let q0 = UnitQuaternion::from_rotation_vector(&Vector3::new(1.2, -0.9, 0.7));
    let ds = make_tangent_linear_ds(
        Matrix3::new(-1.0, -0.8, 0.0, 0.8, -1.0, 0.0, 0.0, 0.0, -1.5),
        goal,
    )
    .unwrap();
    let via = sample_via_points(&ds, &q0, &goal, 30, 0.002, 0.05).unwrap();
    let profiles = [
        StiffnessProfile::piecewise(vec![(0.0, 180.0), (0.5, 250.0), (1.0, 180.0)]),
        StiffnessProfile::Tabulated {
            nodes: vec![
                TabulatedNode {
                    s: 0.0,
                    k: Matrix3::from_diagonal(&Vector3::new(300.0, 150.0, 80.0)),
                },
                TabulatedNode {
                    s: 1.0,
                    k: Matrix3::from_diagonal(&Vector3::new(120.0, 200.0, 60.0)),
                },
            ],
        },
    ];
    let mut eig_err: f64 = 0.0;
    let mut dir_err: f64 = 0.0;
    for profile in &profiles {
        let policy = build_springs(&via, profile, 0.25).unwrap();
        for s in policy.springs() {
            let ea = mat::sym_eigenvalues(&s.stiffness);
            let ek = mat::sym_eigenvalues(&s.profile_stiffness);
            eig_err = eig_err.max((ea - ek).amax() / ek.amax());
            let d = if s.index < policy.n() {
                via.zetas[s.index].normalize()
            } else {
                s.frame.column(0).into_owned()
            };
            dir_err =
                dir_err.max((s.stiffness * d - d * s.profile_stiffness[(0, 0)]).norm() / ek.amax());
        }
    }
    (
        eig_err < 1e-9 && dir_err < 1e-9,
        format!("max relative eigenvalue mismatch {eig_err:.2e}; motion-direction eigen-residual {dir_err:.2e}"),
    )
}

/// Independent plain-array evaluation of the blended spring torque.
mod oracle {
    use std::f64::consts::PI;

    pub type Q = [f64; 4];

    pub fn mul(a: Q, b: Q) -> Q {
        [
            a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
            a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
            a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
            a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0],
        ]
    }

    pub fn conj(a: Q) -> Q {
        [a[0], -a[1], -a[2], -a[3]]
    }

    /// `log(q * conj(base))`.
    pub fn log(base: Q, q: Q) -> [f64; 3] {
        let r = mul(q, conj(base));
        let n = (r[1] * r[1] + r[2] * r[2] + r[3] * r[3]).sqrt();
        if n == 0.0 {
            return [0.0; 3];
        }
        let a = n.atan2(r[0]) / n;
        [a * r[1], a * r[2], a * r[3]]
    }

    fn norm3(v: [f64; 3]) -> f64 {
        (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
    }

    pub fn dist(a: Q, b: Q) -> f64 {
        let r = mul(a, conj(b));
        if r[0] == -1.0 && r[1] == 0.0 && r[2] == 0.0 && r[3] == 0.0 {
            return 2.0 * PI;
        }
        2.0 * norm3(log(b, a))
    }

    pub fn midpoint(a: Q, b: Q) -> Q {
        let s = if a.iter().zip(&b).map(|(x, y)| x * y).sum::<f64>() < 0.0 {
            -1.0
        } else {
            1.0
        };
        let m: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + s * y).collect();
        let n = m.iter().map(|x| x * x).sum::<f64>().sqrt();
        [m[0] / n, m[1] / n, m[2] / n, m[3] / n]
    }

    pub struct Spring {
        pub attractor: Q,
        pub a: [[f64; 3]; 3],
        pub center: Q,
        pub sigma: f64,
    }

    pub fn torque(springs: &[Spring], q: Q) -> ([f64; 3], f64) {
        let e: Vec<f64> = springs
            .iter()
            .map(|s| {
                let r = norm3(log(s.center, q));
                -r * r / (2.0 * s.sigma * s.sigma)
            })
            .collect();
        let m = e.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = e.iter().map(|x| (x - m).exp()).collect();
        let total: f64 = w.iter().sum();
        let mut tau = [0.0; 3];
        for (s, wi) in springs.iter().zip(&w) {
            let err = log(q, s.attractor);
            for (t, row) in tau.iter_mut().zip(&s.a) {
                *t += wi / total * (row[0] * err[0] + row[1] * err[1] + row[2] * err[2]);
            }
        }
        (tau, w.iter().map(|x| x / total).sum())
    }
}

fn ac6() -> Outcome {
    let s = Loaded::new("multistart.json");
    let policy = &s.policy;
    let pts: Vec<oracle::Q> = policy
        .via_points()
        .points
        .iter()
        .map(|q| q.to_array())
        .collect();
    let springs: Vec<oracle::Spring> = policy
        .springs()
        .iter()
        .map(|sp| oracle::Spring {
            attractor: pts[sp.index],
            a: mat::to_rows(&sp.stiffness),
            center: oracle::midpoint(pts[sp.index - 1], pts[sp.index]),
            sigma: policy.delta() * oracle::dist(pts[sp.index], pts[sp.index - 1]),
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let states: Vec<UnitQuaternion> = (0..100_000).map(|_| random_quaternion(&mut rng)).collect();
    let sum_err = batch::max_weight_sum_error(policy, &states);

    let mut abs_err: f64 = 0.0;
    let mut rel_err: f64 = 0.0;
    for q in states.iter().take(1000) {
        let tau = policy.torque(q).unwrap();
        let (reference, _) = oracle::torque(&springs, q.to_array());
        let diff = (tau - Vector3::from(reference)).norm();
        abs_err = abs_err.max(diff);
        rel_err = rel_err.max(diff / Vector3::from(reference).norm().max(1.0));
    }
    (
        sum_err < 1e-12 && rel_err < 1e-12,
        format!(
            "max |Σw̃ - 1| = {sum_err:.2e} over 1e5 states; τ_vs vs brute force on 1000 states: max ‖Δτ‖/max(1,‖τ‖) = {rel_err:.2e} (absolute {abs_err:.2e} N·m)"
        ),
    )
}

fn ac7() -> Outcome {
    let s = Loaded::new("hold.json");
    let hold = s
        .cfg
        .disturbances
        .iter()
        .find(|d| d.kind == DisturbanceKind::Hold)
        .cloned()
        .unwrap();
    let ratio_range = |tr: &Trajectory, field: fn(&vsds::sim::TrajectorySample) -> [f64; 3]| {
        let inside: Vec<f64> = tr
            .samples
            .iter()
            .filter(|r| hold.active(r.t))
            .map(|r| Vector3::from(field(r)).norm())
            .collect();
        let start = inside[0];
        let (lo, hi) = inside
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
                (lo.min(x / start), hi.max(x / start))
            });
        (lo, hi, inside.len() as f64 * s.cfg.dt, start)
    };

    let (q0, w0) = s.starts()[0];
    let vsds = s.run_all().remove(0);
    let (lo, hi, span, _) = ratio_range(&vsds, |r| r.tau_vs);

    let ds = build_nominal(&s.cfg).unwrap();
    let k = s.policy.mean_longitudinal_stiffness();
    let pd = TimeIndexedPd::from_nominal(
        ds.as_ref(),
        &q0,
        s.cfg.dt,
        s.cfg.t_max,
        Matrix3::identity() * k,
        s.damping,
    )
    .unwrap();
    let pd_run = simulate(&pd, &s.plant, &q0, &w0, &s.settings(), &s.cfg.disturbances).unwrap();
    let (_, pd_hi, _, pd_start) = ratio_range(&pd_run, |r| r.tau_vs);

    (
        span >= 2.0 - 1e-9 && lo >= 0.9 && hi <= 1.1 && vsds.converged && pd_start > 0.0 && pd_hi > 2.0,
        format!(
            "{span:.2} s hold: VSDS ‖τ_vs‖ ratio in [{lo:.4}, {hi:.4}], run converged: {}; time-indexed PD peaks at {:.1}x",
            vsds.converged, pd_hi
        ),
    )
}

fn ac8() -> Outcome {
    let s = Loaded::new("push.json");
    let tr = s.run_all().remove(0);
    let via = s.policy.via_points();
    let mut kicks: Vec<f64> = s
        .cfg
        .disturbances
        .iter()
        .filter(|d| d.kind == DisturbanceKind::Impulse)
        .map(|d| d.t_start)
        .collect();
    kicks.sort_by(f64::total_cmp);
    let mut ok = kicks.len() == 3 && tr.converged;
    let mut notes = Vec::new();
    for (j, &t0) in kicks.iter().enumerate() {
        let t1 = kicks.get(j + 1).copied().unwrap_or(f64::INFINITY);
        let window: Vec<(f64, f64)> = tr
            .samples
            .iter()
            .filter(|r| r.t >= t0 && r.t < t1)
            .map(|r| (r.t, via.chain_distance(&r.q)))
            .collect();
        let (k_peak, peak) =
            window.iter().enumerate().fold(
                (0, 0.0),
                |acc, (k, (_, d))| if *d > acc.1 { (k, *d) } else { acc },
            );
        let back = window[k_peak..]
            .iter()
            .find(|(_, d)| *d < 0.05)
            .map(|(t, _)| t - t0);
        ok &= peak >= 0.3 && back.is_some();
        notes.push(format!(
            "kick {}: peak {peak:.3} rad, back in tube after {}",
            j + 1,
            back.map_or("never".into(), |b| format!("{b:.3} s"))
        ));
    }
    (
        ok,
        format!("{}; converged: {}", notes.join("; "), tr.converged),
    )
}

fn ac9() -> Outcome {
    let plant = InertiaTensor::new(Matrix3::new(
        0.03, 0.002, 0.0, 0.002, 0.01, -0.001, 0.0, -0.001, 0.005,
    ))
    .unwrap();
    let mut state = RigidBodyState {
        q: UnitQuaternion::from_rotation_vector(&Vector3::new(0.3, -0.2, 0.1)),
        omega: Vector3::new(1.0, 2.0, -0.5),
        t: 0.0,
    };
    let h0 = (plant.matrix() * state.omega).norm();
    let mut drift: f64 = 0.0;
    for _ in 0..100_000 {
        state = dynamics_step(&state, &Vector3::zeros(), &plant, 1e-4).unwrap();
        drift = drift.max(((plant.matrix() * state.omega).norm() - h0).abs());
    }

    let mut worst: f64 = 0.0;
    let mut count = 0;
    for name in [
        "multistart.json",
        "hold.json",
        "push.json",
        "cutting_130.json",
        "cutting_200.json",
    ] {
        let s = Loaded::new(name);
        let runs = s.run_all();
        count += runs.len();
        worst = worst.max(s.half_step(&runs));
    }
    (
        drift < 1e-6 && worst < 1e-3,
        format!("‖I ω‖ drift {drift:.2e} over 10 s at dt = 1e-4; half-step discrepancy ≤ {worst:.2e} rad over {count} runs"),
    )
}

fn ac10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let j = DMatrix::from_fn(6, 7, |_, _| rng.random_range(-2.0..2.0));
        let f = Vector3::from_fn(|_, _| rng.random_range(-50.0..50.0));
        let t = Vector3::from_fn(|_, _| rng.random_range(-20.0..20.0));
        let u = joint_torque_map(&j, &f, &t).unwrap();
        let w = [f.x, f.y, f.z, t.x, t.y, t.z];
        for c in 0..7 {
            let mut acc = 0.0;
            for r in 0..6 {
                acc += j[(r, c)] * w[r];
            }
            worst = worst.max((u[c] - acc).abs());
        }
    }
    let f = Vector3::new(1.5, -2.0, 0.25);
    let t = Vector3::new(-3.0, 0.5, 4.0);
    let u = joint_torque_map(&DMatrix::identity(6, 6), &f, &t).unwrap();
    let identity_ok = u.as_slice() == [1.5, -2.0, 0.25, -3.0, 0.5, 4.0];
    (
        worst < 1e-12 && identity_ok,
        format!("max element-wise error {worst:.2e} on 1000 random 6x7 Jacobians; identity returns the wrench: {identity_ok}"),
    )
}

fn main() -> ExitCode {
    type Check = (&'static str, fn() -> Outcome);
    let criteria: [Check; 10] = [
        ("AC-1", ac1),
        ("AC-2", ac2),
        ("AC-3", ac3),
        ("AC-4", ac4),
        ("AC-5", ac5),
        ("AC-6", ac6),
        ("AC-7", ac7),
        ("AC-8", ac8),
        ("AC-9", ac9),
        ("AC-10", ac10),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let (ok, detail) = check();
        println!("{name:<5} {} {detail}", if ok { "PASS" } else { "FAIL" });
        failed += usize::from(!ok);
    }
    if failed == 0 {
        println!("acceptance: all {} criteria passed", criteria.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} of {} criteria failed", criteria.len());
        ExitCode::FAILURE
    }
}
