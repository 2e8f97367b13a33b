//! Brute-force cross-checks of the closed-form probabilities.
//!
//! Each check builds the whole universe explicitly: object (and environment
//! or device position), then for every receptor array `N` two-level
//! receptors and `N` two-level displays. Absorption of a photon in block `j`
//! excites receptor `j` and display `j`. Probabilities and conditional states
//! are then read off with the generic assignment rules and compared with the
//! formulas used everywhere else. Dimensions grow as `4^N` per device, so this
//! is for tiny grids only.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::deloc::{deloc_joint_prob, relative_state, JointObjectDeviceState};
use crate::dynamics::{third_conditional, two_time_joint, Propagator};
use crate::error::{ModalError, Result};
use crate::hilbert::{CompositeSpace, PureState, Subsystem, DEFAULT_DEGENERACY_TOL};
use crate::linalg::{c, max_abs_diff, CMatrix, CVector, C64};
use crate::observers::two_device_joint;
use crate::photon::{
    build_transfer_functions, display_probabilities, display_probabilities_recoil, object_state_after_light,
    relational_object_state, ImageMap, ObjectDensity, ObjectGrid, RecoilKernel, TransferFunctions,
};
use crate::relational::{conditional_state, joint_assignment_probability, self_state_candidates, Assignment};

/// Outcome of one oracle comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleCase {
    pub name: &'static str,
    pub max_deviation: f64,
}

/// Sizes used by the battery.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleParams {
    pub m: usize,
    pub n: usize,
    pub env_dim: usize,
    pub sigma: f64,
    pub mass: f64,
    pub t: f64,
    pub t_prime: f64,
    pub hbar: f64,
    pub recoil_width: f64,
}

impl Default for OracleParams {
    fn default() -> Self {
        Self {
            m: 8,
            n: 3,
            env_dim: 2,
            sigma: 1.6,
            mass: 1.0,
            t: 0.9,
            t_prime: 0.6,
            hbar: 1.0,
            recoil_width: 1.5,
        }
    }
}

fn names(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

fn qubits(prefix: &str, n: usize) -> Result<Vec<Subsystem>> {
    names(prefix, n).into_iter().map(|s| Subsystem::new(s, 2)).collect()
}

/// Index of the one-hot pattern with bit `j` set, first qubit most significant.
fn one_hot(n: usize, j: usize) -> usize {
    1 << (n - 1 - j)
}

fn one_hot_projector(n: usize, j: usize) -> CMatrix {
    let d = 1 << n;
    let mut p = CMatrix::zeros(d, d);
    p[(one_hot(n, j), one_hot(n, j))] = c(1.0, 0.0);
    p
}

/// Sparse operator on `carrier ⊗ receptors ⊗ displays` sending
/// `|a, 0..0, 0..0>` to `Σ_j amp(a, j) |a', 1_j, 1_j>`, as `(row, col, value)`
/// triples. Other inputs map to 0; the state it acts on never populates them.
type Sparse = Vec<(usize, usize, C64)>;

fn absorption_operator(carrier_dim: usize, n: usize, amp: impl Fn(usize, usize) -> C64) -> Sparse {
    let reg = 1usize << n;
    let mut v = Vec::with_capacity(carrier_dim * n);
    for a in 0..carrier_dim {
        for j in 0..n {
            let row = a * reg * reg + one_hot(n, j) * reg + one_hot(n, j);
            v.push((row, a * reg * reg, amp(a, j)));
        }
    }
    v
}

fn apply_sparse<S: AsRef<str>>(state: &PureState, on: &[S], op: &Sparse) -> Result<CVector> {
    let space = state.space();
    let split = space.split(&space.positions(on)?);
    let amps = state.amplitudes();
    let mut out = CVector::zeros(amps.len());
    for r in 0..split.rest_dim {
        for &(row, col, val) in op {
            out[split.full(row, r)] += val * amps[split.full(col, r)];
        }
    }
    Ok(out)
}

fn absorb(
    state: &PureState,
    carrier: &[String],
    receptors: &[String],
    displays: &[String],
    op: &Sparse,
) -> Result<PureState> {
    let on: Vec<&String> = carrier.iter().chain(receptors).chain(displays).collect();
    let v = apply_sparse(state, &on, op)?;
    // column normalisation makes the absorption norm-preserving
    PureState::new(state.space().clone(), v)
}

fn random_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        c(StandardNormal.sample(rng), StandardNormal.sample(rng))
    })
}

fn random_unit(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let m = random_matrix(rows, cols, rng);
    let n = m.norm();
    m.unscale(n)
}

/// Receptor and display factor names, one pair of lists per device.
type Registers = Vec<(Vec<String>, Vec<String>)>;

/// Universe `Ψ(x, e) |x>|e>|0..>` with receptors and displays for `devices`
/// arrays. Factor order: object, env, then `r{d}_*`, `q{d}_*` per device.
fn photon_universe(psi: &CMatrix, n: usize, devices: usize) -> Result<(PureState, Registers)> {
    let (m, e) = (psi.nrows(), psi.ncols());
    let mut parts = vec![Subsystem::new("object", m)?, Subsystem::new("env", e)?];
    let mut regs = Vec::new();
    for d in 0..devices {
        let r = format!("r{d}_");
        let q = format!("q{d}_");
        parts.extend(qubits(&r, n)?);
        parts.extend(qubits(&q, n)?);
        regs.push((names(&r, n), names(&q, n)));
    }
    let space = CompositeSpace::new(parts)?;
    let reg = 1usize << (2 * n * devices);
    let mut amps = CVector::zeros(space.dim());
    for x in 0..m {
        for k in 0..e {
            amps[(x * e + k) * reg] = psi[(x, k)];
        }
    }
    Ok((PureState::new(space, amps)?, regs))
}

fn object_density(grid: &ObjectGrid, psi: &CMatrix) -> Result<ObjectDensity> {
    ObjectDensity::new(grid.clone(), psi * psi.adjoint())
}

/// Display probabilities read from the candidates of the display register.
pub fn check_display_probabilities(grid: &ObjectGrid, c: &TransferFunctions, psi: &CMatrix) -> Result<f64> {
    let n = c.n_blocks();
    let (u0, regs) = photon_universe(psi, n, 1)?;
    let (r, q) = &regs[0];
    let op = absorption_operator(grid.len(), n, |x, j| c.c[(j, x)]);
    let u = absorb(&u0, &["object".to_string()], r, q, &op)?;
    let closed = display_probabilities(&object_density(grid, psi)?, c)?;
    let cands = self_state_candidates(&u, q, DEFAULT_DEGENERACY_TOL)?;
    let mut worst = 0.0_f64;
    let mut matched = vec![false; n];
    for cand in cands.iter().filter(|cd| cd.probability > 1e-14) {
        let j = (0..n)
            .find(|&j| (cand.projector[(one_hot(n, j), one_hot(n, j))].re - 1.0).abs() < 1e-8)
            .ok_or_else(|| ModalError::Invariant("display candidate is not a definite reading".into()))?;
        matched[j] = true;
        worst = worst.max((cand.probability - closed[j]).abs());
    }
    for (j, p) in closed.iter().enumerate() {
        let g6 = joint_assignment_probability(&u, &[Assignment::new(q, one_hot_projector(n, j))])?;
        worst = worst.max((g6 - p).abs());
        if !matched[j] && *p > 1e-12 {
            return Err(ModalError::Invariant(format!("reading {j} has no candidate")));
        }
    }
    Ok(worst)
}

/// Object state as seen from everything but the displays, per reading; and
/// the object state with the displays traced out.
pub fn check_object_states(grid: &ObjectGrid, c: &TransferFunctions, psi: &CMatrix) -> Result<(f64, f64)> {
    let n = c.n_blocks();
    let (u0, regs) = photon_universe(psi, n, 1)?;
    let (r, q) = &regs[0];
    let op = absorption_operator(grid.len(), n, |x, j| c.c[(j, x)]);
    let u = absorb(&u0, &["object".to_string()], r, q, &op)?;
    let rho = object_density(grid, psi)?;
    let mut worst_rel = 0.0_f64;
    for j in 0..n {
        let obj = conditional_state(&u, q, &one_hot_projector(n, j), &["object"])?;
        let closed = relational_object_state(&rho, c, j)?;
        worst_rel = worst_rel.max(max_abs_diff(obj.matrix(), &closed.rho));
    }
    let traced = u.partial_trace(&["object"])?;
    let closed = object_state_after_light(&rho, c)?;
    Ok((worst_rel, max_abs_diff(traced.matrix(), &closed.rho)))
}

/// Recoil: the object factor is replaced by explicit recoiled states
/// `|ξ_m>` whose Gram matrix is the kernel.
pub fn check_recoil(grid: &ObjectGrid, c: &TransferFunctions, psi: &CMatrix, kernel: &RecoilKernel) -> Result<f64> {
    let n = c.n_blocks();
    let m = grid.len();
    // ξ_m = Λ^{1/2} V† e_m, so <ξ_a|ξ_b> = K[a][b]
    let (vals, vecs) = crate::linalg::hermitian_eigen(&kernel.kernel);
    let xi = CMatrix::from_fn(m, m, |i, col| vecs[(col, i)].conj() * vals[i].max(0.0).sqrt());
    let (u0, regs) = photon_universe(psi, n, 1)?;
    let (r, q) = &regs[0];
    let reg = 1usize << n;
    // |x,0,0> → Σ_j c_j(x) |ξ_x, 1_j, 1_j>
    let mut op = Sparse::new();
    for x in 0..m {
        for j in 0..n {
            for a in 0..m {
                op.push((
                    a * reg * reg + one_hot(n, j) * reg + one_hot(n, j),
                    x * reg * reg,
                    c.c[(j, x)] * xi[(a, x)],
                ));
            }
        }
    }
    let on: Vec<String> = std::iter::once("object".to_string())
        .chain(r.iter().cloned())
        .chain(q.iter().cloned())
        .collect();
    let raw = apply_sparse(&u0, &on, &op)?;
    let norm = raw.norm_squared();
    let u = PureState::new(u0.space().clone(), raw.unscale(norm.sqrt()))?;
    let closed = display_probabilities_recoil(&object_density(grid, psi)?, c, kernel)?;
    let mut worst = (norm - closed.norm).abs();
    for (j, p) in closed.probabilities.iter().enumerate() {
        let g6 = joint_assignment_probability(&u, &[Assignment::new(q, one_hot_projector(n, j))])?;
        worst = worst.max((g6 - p).abs());
    }
    Ok(worst)
}

/// Two arrays looking at the same object at the same time.
pub fn check_two_devices(
    grid: &ObjectGrid,
    c1: &TransferFunctions,
    c2: &TransferFunctions,
    psi: &CMatrix,
) -> Result<f64> {
    let n = c1.n_blocks();
    let (u0, regs) = photon_universe(psi, n, 2)?;
    let obj = vec!["object".to_string()];
    let u1 = absorb(
        &u0,
        &obj,
        &regs[0].0,
        &regs[0].1,
        &absorption_operator(grid.len(), n, |x, j| c1.c[(j, x)]),
    )?;
    let u = absorb(
        &u1,
        &obj,
        &regs[1].0,
        &regs[1].1,
        &absorption_operator(grid.len(), n, |x, k| c2.c[(k, x)]),
    )?;
    let closed = two_device_joint(&object_density(grid, psi)?, c1, c2)?;
    let mut worst = 0.0_f64;
    for j in 0..n {
        for k in 0..n {
            let g6 = joint_assignment_probability(
                &u,
                &[
                    Assignment::new(&regs[0].1, one_hot_projector(n, j)),
                    Assignment::new(&regs[1].1, one_hot_projector(n, k)),
                ],
            )?;
            worst = worst.max((g6 - closed.p[(j, k)]).abs());
        }
    }
    Ok(worst)
}

/// Measurement, free evolution, measurement, free evolution, measurement.
/// Returns deviations of the two-time table and of the third conditional.
pub fn check_sequential(
    grid: &ObjectGrid,
    c: &TransferFunctions,
    psi0: &CVector,
    g_t: &Propagator,
    g_tp: &Propagator,
) -> Result<(f64, f64)> {
    let n = c.n_blocks();
    let psi = CMatrix::from_column_slice(psi0.len(), 1, psi0.as_slice());
    let (u0, regs) = photon_universe(&psi, n, 3)?;
    let obj = vec!["object".to_string()];
    let op = absorption_operator(grid.len(), n, |x, j| c.c[(j, x)]);
    let u1 = absorb(&u0, &obj, &regs[0].0, &regs[0].1, &op)?;
    let u1 = u1.apply_unitary(&g_t.matrix(), &obj)?;
    let u2 = absorb(&u1, &obj, &regs[1].0, &regs[1].1, &op)?;
    let u2 = u2.apply_unitary(&g_tp.matrix(), &obj)?;
    let u3 = absorb(&u2, &obj, &regs[2].0, &regs[2].1, &op)?;

    let closed = two_time_joint(psi0, c, g_t)?;
    let mut worst_pair = 0.0_f64;
    let mut worst_third = 0.0_f64;
    for j in 0..n {
        for k in 0..n {
            let pjk = joint_assignment_probability(
                &u3,
                &[
                    Assignment::new(&regs[0].1, one_hot_projector(n, j)),
                    Assignment::new(&regs[1].1, one_hot_projector(n, k)),
                ],
            )?;
            worst_pair = worst_pair.max((pjk - closed.p[(j, k)]).abs());
            if closed.p[(j, k)] < 1e-6 {
                continue;
            }
            let q = third_conditional(psi0, c, g_t, g_tp, j, k)?;
            for (l, ql) in q.iter().enumerate() {
                let pjkl = joint_assignment_probability(
                    &u3,
                    &[
                        Assignment::new(&regs[0].1, one_hot_projector(n, j)),
                        Assignment::new(&regs[1].1, one_hot_projector(n, k)),
                        Assignment::new(&regs[2].1, one_hot_projector(n, l)),
                    ],
                )?;
                worst_third = worst_third.max((pjkl / pjk - ql).abs());
            }
        }
    }
    Ok((worst_pair, worst_third))
}

/// Object and device positions both quantum; transfer functions act on the
/// relative coordinate.
pub fn check_deloc(
    state: &JointObjectDeviceState,
    c1: &TransferFunctions,
    c2: &TransferFunctions,
) -> Result<(f64, f64)> {
    let n = c1.n_blocks();
    let (mx, my) = (state.x_grid.len(), state.y_grid.len());
    let mut parts = vec![Subsystem::new("object", mx)?, Subsystem::new("device", my)?];
    let regs: Vec<(Vec<String>, Vec<String>)> = (0..2)
        .map(|d| (names(&format!("r{d}_"), n), names(&format!("q{d}_"), n)))
        .collect();
    for d in 0..2 {
        parts.extend(qubits(&format!("r{d}_"), n)?);
        parts.extend(qubits(&format!("q{d}_"), n)?);
    }
    let space = CompositeSpace::new(parts)?;
    let reg = 1usize << (4 * n);
    let mut amps = CVector::zeros(space.dim());
    for x in 0..mx {
        for y in 0..my {
            amps[(x * my + y) * reg] = state.psi[(x, y)];
        }
    }
    let u0 = PureState::new(space, amps)?;
    let rel = &c1.grid;
    let rel_index = |x: usize, y: usize| -> Option<usize> {
        let r = state.x_grid.x(x) - state.y_grid.x(y);
        rel.cell_of(r)
    };
    let carrier = vec!["object".to_string(), "device".to_string()];
    let amp = |cc: &TransferFunctions| {
        let cc = cc.clone();
        move |a: usize, j: usize| match rel_index(a / my, a % my) {
            Some(r) => cc.c[(j, r)],
            None => c(0.0, 0.0),
        }
    };
    let u1 = absorb(
        &u0,
        &carrier,
        &regs[0].0,
        &regs[0].1,
        &absorption_operator(mx * my, n, amp(c1)),
    )?;
    let u = absorb(
        &u1,
        &carrier,
        &regs[1].0,
        &regs[1].1,
        &absorption_operator(mx * my, n, amp(c2)),
    )?;
    let closed = deloc_joint_prob(state, c1, c2)?;
    let mut worst_p = 0.0_f64;
    let mut worst_rel = 0.0_f64;
    for j in 0..n {
        for k in 0..n {
            let g6 = joint_assignment_probability(
                &u,
                &[
                    Assignment::new(&regs[0].1, one_hot_projector(n, j)),
                    Assignment::new(&regs[1].1, one_hot_projector(n, k)),
                ],
            )?;
            worst_p = worst_p.max((g6 - closed.p[(j, k)]).abs());
            if closed.p[(j, k)] < 1e-6 {
                continue;
            }
            // condition on both displays, keep object and device
            let both: Vec<String> = regs[0].1.iter().chain(&regs[1].1).cloned().collect();
            let proj = one_hot_projector(n, j).kronecker(&one_hot_projector(n, k));
            let od = conditional_state(&u, &both, &proj, &["object", "device"])?;
            let rs = relative_state(state, c1, c2, j, k)?;
            // fold the (x, y) density onto x - y by summing over matching pairs
            let nd = mx + my - 1;
            let mut folded = CMatrix::zeros(nd, nd);
            for x in 0..mx {
                for y in 0..my {
                    for x2 in 0..mx {
                        for y2 in 0..my {
                            if x + y != x2 + y2 {
                                continue;
                            }
                            let d = x + my - 1 - y;
                            let d2 = x2 + my - 1 - y2;
                            folded[(d, d2)] += od.matrix()[(x * my + y, x2 * my + y2)];
                        }
                    }
                }
            }
            worst_rel = worst_rel.max(max_abs_diff(&folded, &rs.rho));
        }
    }
    Ok((worst_p, worst_rel))
}

/// Runs every comparison at the given sizes with random inputs from `seed`.
pub fn run_battery(p: &OracleParams, seed: u64) -> Result<Vec<OracleCase>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = ObjectGrid::new(0.0, p.m as f64, p.m)?;
    let image = ImageMap::IDENTITY;
    let c1 = build_transfer_functions(&grid, p.n, p.sigma, image)?;
    let c2 = build_transfer_functions(&grid, p.n, 0.8 * p.sigma, image)?;
    let psi = random_unit(p.m, p.env_dim, &mut rng);
    let kernel = RecoilKernel::gaussian(&grid, p.recoil_width)?;

    let mut out = Vec::new();
    out.push(OracleCase {
        name: "display probabilities",
        max_deviation: check_display_probabilities(&grid, &c1, &psi)?,
    });
    let (rel, after) = check_object_states(&grid, &c1, &psi)?;
    out.push(OracleCase {
        name: "object state seen from outside the displays",
        max_deviation: rel,
    });
    out.push(OracleCase {
        name: "object state after the light",
        max_deviation: after,
    });
    out.push(OracleCase {
        name: "display probabilities with recoil",
        max_deviation: check_recoil(&grid, &c1, &psi, &kernel)?,
    });
    out.push(OracleCase {
        name: "two simultaneous devices",
        max_deviation: check_two_devices(&grid, &c1, &c2, &psi)?,
    });

    let psi0 = random_unit(p.m, 1, &mut rng).column(0).into_owned();
    let g_t = Propagator::free(&grid, p.mass, p.t, p.hbar)?;
    let g_tp = Propagator::free(&grid, p.mass, p.t_prime, p.hbar)?;
    let (pair, third) = check_sequential(&grid, &c1, &psi0, &g_t, &g_tp)?;
    out.push(OracleCase {
        name: "two-time joint probabilities",
        max_deviation: pair,
    });
    out.push(OracleCase {
        name: "third-measurement conditional",
        max_deviation: third,
    });

    let yg = ObjectGrid::new(0.0, p.m as f64, p.m)?;
    let rel_grid = ObjectGrid::new(-(p.m as f64) + 0.5, p.m as f64 - 0.5, 2 * p.m - 1)?;
    let rc1 = build_transfer_functions(&rel_grid, p.n, 2.0 * p.sigma, image)?;
    let rc2 = build_transfer_functions(&rel_grid, p.n, 1.6 * p.sigma, image)?;
    let joint = JointObjectDeviceState::normalized(grid.clone(), yg, random_matrix(p.m, p.m, &mut rng))?;
    let (dp, drel) = check_deloc(&joint, &rc1, &rc2)?;
    out.push(OracleCase {
        name: "delocalized device joint probabilities",
        max_deviation: dp,
    });
    out.push(OracleCase {
        name: "relative-coordinate state",
        max_deviation: drel,
    });
    Ok(out)
}
