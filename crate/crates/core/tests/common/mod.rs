//! Generators and property checks shared by the proptest suite and the acceptance runner.
#![allow(dead_code)]

use std::f64::consts::PI;

use formation_core::controller::{
    agent_control, conventional_control, maneuver_control, neighbor_measurements, ppc_control,
    robust_conventional_rates, ConventionalParams, NeighborMeasurement,
};
use formation_core::performance::{
    bounds_to_b, e_bounds_at, select_initial_bounds, transform, transform_inverse, xi,
    EdgeGeometry, EdgeSpec, PerformanceFunction,
};
use formation_core::rigidity::{
    edge_function, grammian_min_eigenvalue, incidence_matrix, is_minimally_rigid, rigidity_matrix,
    Framework, RigidGraph, DEFAULT_RANK_TOL,
};
use formation_core::signal::VelocityCommand;
use formation_core::simulation::{Integrator, Plant};
use formation_core::DisturbanceSignal;
use nalgebra::{DMatrix, DVector, Matrix3, Rotation2, Rotation3, Unit, Vector3};
use rand::Rng;

pub type Check = Result<(), String>;

pub fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Check {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Henneberg construction: a simplex, then vertices attached to `dim` earlier ones.
/// Positions are uniform in a cube of half-width `spread`; generic, so the result is
/// minimally and infinitesimally rigid (checked, with retries).
pub fn random_rigid<R: Rng>(rng: &mut R, n: usize, dim: usize, spread: f64) -> Framework {
    assert!(n > dim);
    loop {
        let mut edges = Vec::new();
        for j in 0..=dim {
            for i in 0..j {
                edges.push((i, j));
            }
        }
        for v in dim + 1..n {
            let mut picks: Vec<usize> = (0..v).collect();
            for s in 0..dim {
                let r = rng.random_range(s..v);
                picks.swap(s, r);
            }
            for &u in &picks[..dim] {
                edges.push((u, v));
            }
        }
        let graph = RigidGraph::new(n, edges).expect("valid construction");
        let q = DVector::from_fn(n * dim, |_, _| rng.random_range(-spread..spread));
        let fw = Framework::new(graph, dim, q).expect("valid framework");
        let min_len = fw.edge_lengths().into_iter().fold(f64::INFINITY, f64::min);
        if is_minimally_rigid(&fw, DEFAULT_RANK_TOL)
            && grammian_min_eigenvalue(&fw) > 1e-3
            && min_len > 0.3
        {
            return fw;
        }
    }
}

/// Same graph as a random rigid framework, all agents on one line.
pub fn collinear<R: Rng>(rng: &mut R, n: usize, dim: usize) -> Framework {
    let fw = random_rigid(rng, n, dim, 3.0);
    let dir = DVector::from_fn(dim, |_, _| rng.random_range(-1.0..1.0)).normalize();
    let origin = DVector::from_fn(dim, |_, _| rng.random_range(-1.0..1.0));
    let mut q = DVector::zeros(n * dim);
    for i in 0..n {
        let s = rng.random_range(-3.0..3.0);
        q.rows_mut(i * dim, dim).copy_from(&(&origin + &dir * s));
    }
    fw.with_positions(q).unwrap()
}

pub fn random_rotation<R: Rng>(rng: &mut R, dim: usize) -> DMatrix<f64> {
    match dim {
        2 => {
            let r = Rotation2::new(rng.random_range(-PI..PI));
            DMatrix::from_column_slice(2, 2, r.matrix().as_slice())
        }
        3 => {
            let axis = Vector3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            let r =
                Rotation3::from_axis_angle(&Unit::new_normalize(axis), rng.random_range(-PI..PI));
            DMatrix::from_column_slice(3, 3, r.matrix().as_slice())
        }
        _ => unreachable!(),
    }
}

/// A proper rotation that only permutes axes and flips signs.
pub fn random_signed_permutation<R: Rng>(rng: &mut R, dim: usize) -> DMatrix<f64> {
    loop {
        let mut perm: Vec<usize> = (0..dim).collect();
        for s in 0..dim {
            let r = rng.random_range(s..dim);
            perm.swap(s, r);
        }
        let mut m = DMatrix::zeros(dim, dim);
        for (row, &col) in perm.iter().enumerate() {
            m[(row, col)] = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        }
        let det = if dim == 2 {
            m.fixed_view::<2, 2>(0, 0).determinant()
        } else {
            Matrix3::from_iterator(m.iter().copied()).determinant()
        };
        if det > 0.0 {
            return m;
        }
    }
}

/// Applies `x -> Q x + b` to every agent.
pub fn transform_positions(
    q: &DVector<f64>,
    dim: usize,
    rot: &DMatrix<f64>,
    shift: &DVector<f64>,
) -> DVector<f64> {
    let mut out = q.clone();
    for i in 0..q.len() / dim {
        let p = rot * q.rows(i * dim, dim) + shift;
        out.rows_mut(i * dim, dim).copy_from(&p);
    }
    out
}

pub fn rotate_blocks(u: &DVector<f64>, dim: usize, rot: &DMatrix<f64>) -> DVector<f64> {
    transform_positions(u, dim, rot, &DVector::zeros(dim))
}

/// A perturbed copy of `desired` and per-edge specs built from it, so that
/// the perturbed state is strictly inside its bounds at `t = 0`.
pub struct Instance {
    pub desired: Framework,
    pub actual: Framework,
    pub d: Vec<f64>,
    pub specs: Vec<EdgeSpec>,
}

pub fn random_instance<R: Rng>(rng: &mut R, n: usize, dim: usize, noise: f64) -> Instance {
    let desired = random_rigid(rng, n, dim, 3.0);
    let d = desired.edge_lengths();
    let min_d = d.iter().cloned().fold(f64::INFINITY, f64::min);
    let max_d = d.iter().cloned().fold(0.0, f64::max);
    loop {
        let q =
            desired.positions() + DVector::from_fn(n * dim, |_, _| rng.random_range(-noise..noise));
        let actual = desired.with_positions(q).unwrap();
        let perf =
            PerformanceFunction::new(1.0, rng.random_range(0.01..0.1), rng.random_range(0.3..1.5))
                .unwrap();
        let specs: Result<Vec<_>, _> = d
            .iter()
            .enumerate()
            .map(|(k, &dk)| {
                let geom = EdgeGeometry {
                    d: dk,
                    r_s: 0.25 * min_d,
                    r_c: 2.0 * max_d,
                    mu_bar: 0.3 * min_d,
                    mu_underbar: 0.3 * min_d,
                };
                EdgeSpec::build(k, geom, perf, actual.edge_length(k) - dk, 0.12)
            })
            .collect();
        if let Ok(specs) = specs {
            return Instance {
                desired,
                actual,
                d,
                specs,
            };
        }
    }
}

impl Instance {
    /// A perturbation of the desired framework with every modulated error
    /// within 90% of its envelope at time `t`.
    pub fn state_at<R: Rng>(&self, rng: &mut R, t: f64) -> Framework {
        let dim = self.desired.dim();
        let noise = DVector::from_fn(self.desired.positions().len(), |_, _| {
            rng.random_range(-0.2..0.2)
        });
        let mut scale = 1.0;
        loop {
            let fw = self
                .desired
                .with_positions(self.desired.positions() + &noise * scale)
                .unwrap();
            let inside = self.specs.iter().enumerate().all(|(k, spec)| {
                let (lo, hi) = spec.eta_bounds_at(t);
                let e = fw.edge_length(k) - spec.d;
                let eta = e * (e + 2.0 * spec.d);
                eta > -0.9 * lo && eta < 0.9 * hi
            });
            if inside {
                return fw;
            }
            scale *= 0.5;
            assert!(scale > 1e-12, "no in-bounds state found in {dim}-D");
        }
    }
}

// (a) -----------------------------------------------------------------------

/// `R = P^T Hbar` with `P = blockdiag(Hbar p)` and a central-difference Jacobian of
/// the edge function against `2R`.
pub fn check_rigidity_matrix(fw: &Framework) -> Check {
    let dim = fw.dim();
    let n = fw.agent_count();
    let l = fw.graph().edge_count();
    let h = incidence_matrix(fw.graph());
    let hbar = h.kronecker(&DMatrix::<f64>::identity(dim, dim));
    let z = &hbar * fw.positions();
    let mut p = DMatrix::zeros(l * dim, l);
    for k in 0..l {
        p.view_mut((k * dim, k), (dim, 1))
            .copy_from(&z.rows(k * dim, dim));
    }
    let r = rigidity_matrix(fw);
    let factored = p.transpose() * &hbar;
    let err = (&r - &factored).amax();
    ensure(err < 1e-12, || {
        format!("R differs from P^T Hbar by {err:e}")
    })?;

    let step = 1e-6;
    let mut fd = DMatrix::zeros(l, n * dim);
    for c in 0..n * dim {
        let mut qp = fw.positions().clone();
        let mut qm = fw.positions().clone();
        qp[c] += step;
        qm[c] -= step;
        let col = (edge_function(&fw.with_positions(qp).unwrap())
            - edge_function(&fw.with_positions(qm).unwrap()))
            / (2.0 * step);
        fd.set_column(c, &col);
    }
    let err = (fd - r * 2.0).amax();
    ensure(err < 1e-5, || {
        format!("finite-difference Jacobian off by {err:e}")
    })
}

// (b) -----------------------------------------------------------------------

pub fn check_column_sums(fw: &Framework) -> Check {
    let dim = fw.dim();
    let n = fw.agent_count();
    let ones = DMatrix::from_element(1, n, 1.0).kronecker(&DMatrix::<f64>::identity(dim, dim));
    let prod = ones * rigidity_matrix(fw).transpose();
    let scale = fw.positions().amax().max(1.0);
    ensure(prod.amax() <= 1e-12 * scale, || {
        format!("(1^T x I) R^T has entry {:e}", prod.amax())
    })
}

// (c) -----------------------------------------------------------------------

/// Round trip through the transform and its inverse, and `xi = (2/rho) dT/d eta_hat`.
/// `frac` in (-1, 1) places `eta_hat` between the bounds.
pub fn check_transform(b_bar: f64, b_underbar: f64, frac: f64, rho: f64) -> Check {
    let eta_hat = if frac >= 0.0 {
        frac * b_bar
    } else {
        frac * b_underbar
    };
    let sigma = transform(eta_hat, b_bar, b_underbar).map_err(|v| v.to_string())?;
    let back = transform_inverse(sigma, b_bar, b_underbar);
    let scale = b_bar.max(b_underbar);
    ensure((back - eta_hat).abs() <= 1e-12 * scale, || {
        format!(
            "round trip {eta_hat} -> {sigma} -> {back} (b_bar={b_bar}, b_underbar={b_underbar})"
        )
    })?;

    let h = 1e-6 * b_bar.min(b_underbar);
    let slope = (transform(eta_hat + h, b_bar, b_underbar).unwrap()
        - transform(eta_hat - h, b_bar, b_underbar).unwrap())
        / (2.0 * h);
    let expected = 2.0 * slope / rho;
    let got = xi(eta_hat, rho, b_bar, b_underbar).map_err(|v| v.to_string())?;
    ensure((got - expected).abs() <= 1e-6 * expected.abs(), || {
        format!("xi={got}, finite difference gives {expected} at eta_hat={eta_hat}")
    })
}

// (d) -----------------------------------------------------------------------

/// Initial bounds -> `(b_bar, b_underbar)` -> distance-error envelope at `t = 0`.
pub fn check_bound_round_trip(geom: EdgeGeometry, e0: f64, mu: f64, rho0: f64) -> Check {
    let Ok((upper, lower)) = select_initial_bounds(e0, &geom, mu) else {
        return Ok(());
    };
    ensure(-lower < e0 && e0 < upper, || {
        format!("e0={e0} outside ({}, {upper})", -lower)
    })?;
    let (b_bar, b_underbar) = bounds_to_b(geom.d, rho0, upper, lower).map_err(|e| e.to_string())?;
    let perf = PerformanceFunction::new(rho0, rho0 * 0.03, 0.7).unwrap();
    let spec = EdgeSpec {
        d: geom.d,
        r_s: geom.r_s,
        r_c: geom.r_c,
        mu_bar: geom.mu_bar,
        mu_underbar: geom.mu_underbar,
        perf,
        b_bar,
        b_underbar,
        e0_bar: upper,
        e0_underbar: lower,
    };
    let (u0, l0) = e_bounds_at(&spec, 0.0).map_err(|e| e.to_string())?;
    ensure(
        (u0 - upper).abs() <= 1e-12 * upper.max(1.0)
            && (l0 - lower).abs() <= 1e-12 * lower.max(1.0),
        || {
            format!(
                "bounds ({upper}, {lower}) came back as ({u0}, {l0}), d={}",
                geom.d
            )
        },
    )
}

// (e) -----------------------------------------------------------------------

fn close(a: &DVector<f64>, b: &DVector<f64>, tol: f64, what: &str) -> Check {
    let err = (a - b).amax();
    let scale = a.amax().max(b.amax()).max(1.0);
    ensure(err <= tol * scale, || {
        format!("{what}: equivariance error {err:e} (scale {scale:e})")
    })
}

/// Every control law commutes with rigid motions of the whole formation.
/// The robust baseline compensates per coordinate, so it is tested with
/// axis-permuting rotations (and arbitrary translations).
pub fn check_equivariance<R: Rng>(rng: &mut R, inst: &Instance, t: f64) -> Check {
    let fw = &inst.state_at(rng, t);
    let dim = fw.dim();
    let n = fw.agent_count();
    let l = inst.d.len();
    let gains: Vec<f64> = (0..l).map(|_| rng.random_range(0.05..1.0)).collect();
    let rot = random_rotation(rng, dim);
    let shift = DVector::from_fn(dim, |_, _| rng.random_range(-10.0..10.0));
    let moved = fw
        .with_positions(transform_positions(fw.positions(), dim, &rot, &shift))
        .unwrap();

    let u = ppc_control(fw, &inst.specs, &gains, t).map_err(|v| v.to_string())?;
    let u_moved = ppc_control(&moved, &inst.specs, &gains, t).map_err(|v| v.to_string())?;
    close(&u_moved, &rotate_blocks(&u, dim, &rot), 1e-10, "ppc")?;

    // each agent working in its own, arbitrarily rotated frame
    for i in 0..n {
        let local = random_rotation(rng, dim);
        let measured: Vec<NeighborMeasurement> = neighbor_measurements(&moved, i)
            .into_iter()
            .map(|m| NeighborMeasurement {
                edge: m.edge,
                relative: local.transpose() * m.relative,
            })
            .collect();
        let ui =
            &local * agent_control(&measured, &inst.specs, &gains, t).map_err(|v| v.to_string())?;
        close(
            &ui,
            &u_moved.rows(i * dim, dim).into_owned(),
            1e-10,
            "local-frame ppc",
        )?;
    }

    let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect();
    let v_rot: Vec<f64> = (&rot * DVector::from_vec(v.clone()))
        .iter()
        .copied()
        .collect();
    let leader = rng.random_range(0..n);
    let um = maneuver_control(
        fw,
        &inst.specs,
        &gains,
        leader,
        &VelocityCommand::constant(&v),
        t,
    )
    .map_err(|e| e.to_string())?;
    let um_moved = maneuver_control(
        &moved,
        &inst.specs,
        &gains,
        leader,
        &VelocityCommand::constant(&v_rot),
        t,
    )
    .map_err(|e| e.to_string())?;
    close(&um_moved, &rotate_blocks(&um, dim, &rot), 1e-10, "maneuver")?;

    let k = rng.random_range(0.1..1.0);
    let uc = conventional_control(fw, &inst.d, k);
    close(
        &conventional_control(&moved, &inst.d, k),
        &rotate_blocks(&uc, dim, &rot),
        1e-10,
        "conventional",
    )?;

    let params = ConventionalParams {
        k,
        epsilon: 0.01,
        theta: 0.01,
        w: vec![1.5; l],
    };
    let per_agent: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..2.0)).collect();
    let dhat = DVector::from_fn(n * dim, |r, _| per_agent[r / dim]);
    let perm = random_signed_permutation(rng, dim);
    let permuted = fw
        .with_positions(transform_positions(fw.positions(), dim, &perm, &shift))
        .unwrap();
    let (ur, rate) = robust_conventional_rates(fw, &inst.d, &params, &dhat);
    let (ur_moved, rate_moved) = robust_conventional_rates(&permuted, &inst.d, &params, &dhat);
    close(
        &ur_moved,
        &rotate_blocks(&ur, dim, &perm),
        1e-10,
        "robust conventional",
    )?;
    // the estimator rate is a magnitude: it permutes without sign changes
    close(
        &rate_moved,
        &rotate_blocks(&rate, dim, &perm.abs()),
        1e-10,
        "robust estimator rate",
    )
}

// (f) -----------------------------------------------------------------------

pub fn check_grammian<R: Rng>(rng: &mut R, dim: usize) -> Check {
    let n = rng.random_range(dim + 1..=8);
    let fw = random_rigid(rng, n, dim, 3.0);
    let lam = grammian_min_eigenvalue(&fw);
    ensure(lam > 0.0, || {
        format!("rigid framework with lambda_min = {lam:e}")
    })?;
    let line = collinear(rng, n.max(dim + 2).clamp(3, 8), dim);
    let lam_line = grammian_min_eigenvalue(&line);
    let scale = rigidity_matrix(&line).norm_squared();
    ensure(lam_line.abs() <= 1e-10 * scale.max(1.0), || {
        format!("collinear framework with lambda_min = {lam_line:e}")
    })
}

// (g) -----------------------------------------------------------------------

/// Distance of the end state from a fine reference, for steps `h` and `h/2`.
/// The ratio should be close to 16 for a fourth-order method.
pub fn richardson_ratio(
    plant: &Plant,
    q0: &DVector<f64>,
    horizon: f64,
    h: f64,
) -> Result<f64, String> {
    let run = |dt: f64| -> Result<DVector<f64>, String> {
        let steps = (horizon / dt).round() as usize;
        let mut x = plant.initial_state(q0);
        for s in 0..steps {
            x = plant
                .step(&x, s as f64 * dt, dt, Integrator::Rk4)
                .map_err(|e| e.to_string())?;
        }
        Ok(x)
    };
    let reference = run(h / 8.0)?;
    let coarse = (run(h)? - &reference).norm();
    let fine = (run(h / 2.0)? - &reference).norm();
    Ok(coarse / fine)
}

/// A smooth, mildly stiff closed loop for order checks: random rigid formation
/// under the prescribed-performance law with wide bounds and a sinusoidal
/// disturbance on every agent.
pub fn richardson_plant<R: Rng>(rng: &mut R, dim: usize) -> (Plant, DVector<f64>) {
    let n = dim + 2;
    let desired = random_rigid(rng, n, dim, 3.0);
    let d = desired.edge_lengths();
    let min_d = d.iter().cloned().fold(f64::INFINITY, f64::min);
    let max_d = d.iter().cloned().fold(0.0, f64::max);
    let q0 = desired.positions() + DVector::from_fn(n * dim, |_, _| rng.random_range(-0.1..0.1));
    let actual = desired.with_positions(q0.clone()).unwrap();
    let perf = PerformanceFunction::new(1.0, 0.2, 0.5).unwrap();
    let specs = d
        .iter()
        .enumerate()
        .map(|(k, &dk)| {
            let geom = EdgeGeometry {
                d: dk,
                r_s: 0.25 * min_d,
                r_c: 2.0 * max_d,
                mu_bar: 0.5 * min_d,
                mu_underbar: 0.5 * min_d,
            };
            EdgeSpec::build(k, geom, perf, actual.edge_length(k) - dk, 0.5 * min_d).unwrap()
        })
        .collect();
    let channels = (0..n)
        .map(|_| {
            (0..dim)
                .map(|_| {
                    vec![formation_core::SinusoidTerm::sin(
                        rng.random_range(0.1..0.5),
                        rng.random_range(0.5..3.0),
                    )]
                })
                .collect()
        })
        .collect();
    let controller = formation_core::ControllerConfig::ppc(vec![0.05; d.len()]);
    let plant = Plant::new(
        desired.graph().clone(),
        dim,
        specs,
        controller,
        DisturbanceSignal::new(channels),
    )
    .unwrap();
    (plant, q0)
}
