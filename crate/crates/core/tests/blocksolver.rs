use nalgebra::{DMatrix, DVector};
use structural::blocksolver::{
    init_block, integrate, pe_update, se_update, solve_block, BlockState, IntegrateOptions, IterStats, Node,
    NoObserver, Observer, SolverConfig, SolverError,
};
use structural::numerics::BodySpace;
use structural::problems::{
    EmParticle, EmVariant, Hamiltonian, Kepler, MassSpring, Pendulum, ProblemError, TwoSpring,
};
use structural::secoeff::{assemble_tables, kernel_basis, table, CoeffTable, Formulation, RawBasis};

const BOTH: [Formulation; 2] = [Formulation::Zd, Formulation::Zds];

fn scalar(v: f64) -> BodySpace<f64> {
    BodySpace::from_vec(vec![v])
}

fn unit_spring() -> MassSpring<f64> {
    MassSpring::new(1.0, 1.0, 1.0, 0.0).unwrap()
}

fn anchor(problem: &dyn Hamiltonian<f64>, f: Formulation) -> Node<f64> {
    let (x, p) = problem.initial_state();
    Node::at(problem, f, x, p).unwrap()
}

#[test]
fn predictor_on_the_mass_spring() {
    let ms = unit_spring();
    let t: CoeffTable<f64> = table(1, Formulation::Zd, 0.1).unwrap();
    let (state, stats) = init_block(&anchor(&ms, Formulation::Zd), &ms, &t).unwrap();
    let n = &state.nodes[0];
    assert_eq!((n.zx[(0, 0)], n.zp[(0, 0)]), (1.0, -0.1));
    assert_eq!((n.dx[(0, 0)], n.dp[(0, 0)]), (-0.1, -1.0));
    assert_eq!((stats.iterations, stats.pe1_calls, stats.pe2_calls), (0, 1, 0));
}

#[test]
fn predictor_on_kepler_uses_second_derivatives() {
    let k = Kepler::<f64>::paper();
    let t: CoeffTable<f64> = table(1, Formulation::Zds, 0.01).unwrap();
    let a = anchor(&k, Formulation::Zds);
    assert!((a.sx[(0, 0)] + 6.25).abs() < 1e-14 && a.sx[(1, 0)] == 0.0);
    let (state, stats) = init_block(&a, &k, &t).unwrap();
    let zx = &state.nodes[0].zx;
    assert!((zx[(0, 0)] - (0.4 - 3.125e-4)).abs() < 1e-15);
    assert!((zx[(1, 0)] - 0.02).abs() < 1e-15);
    assert_eq!((stats.pe1_calls, stats.pe2_calls), (1, 1));
}

#[test]
fn predictor_keeps_an_equilibrium() {
    let pend = Pendulum::new(1.0, 1.0, 1.0, 0.0, 0.0).unwrap();
    let t: CoeffTable<f64> = table(3, Formulation::Zds, 0.5).unwrap();
    let (state, _) = init_block(&anchor(&pend, Formulation::Zds), &pend, &t).unwrap();
    for n in &state.nodes {
        assert_eq!((n.zx[(0, 0)], n.zp[(0, 0)]), (0.0, 0.0));
    }
}

fn node(z: f64, d: f64, s: f64) -> Node<f64> {
    Node { zx: scalar(z), zp: scalar(-z), dx: scalar(d), dp: scalar(-d), sx: scalar(s), sp: scalar(-s) }
}

#[test]
fn structural_update_examples() {
    // zero in, zero out
    let t: CoeffTable<f64> = table(3, Formulation::Zds, 0.3).unwrap();
    let zero = BlockState { anchor: node(0.0, 0.0, 0.0), nodes: vec![node(0.0, 0.0, 0.0); 3] };
    let (zx, zp) = se_update(&t, &zero);
    assert!(zx.iter().chain(&zp).all(|b| b[(0, 0)] == 0.0));

    // x = t^2 on the unit grid, with a wrong guess for Z1 that the update ignores
    let t: CoeffTable<f64> = table(1, Formulation::Zds, 1.0).unwrap();
    let state = BlockState { anchor: node(0.0, 0.0, 2.0), nodes: vec![node(7.0, 2.0, 2.0)] };
    let (zx, zp) = se_update(&t, &state);
    assert!((zx[0][(0, 0)] - 1.0).abs() < 1e-15);
    assert!((zp[0][(0, 0)] + 1.0).abs() < 1e-15);

    // x = t^3 under ZD R=2
    let t: CoeffTable<f64> = table(2, Formulation::Zd, 1.0).unwrap();
    let state = BlockState { anchor: node(0.0, 0.0, 0.0), nodes: vec![node(0.0, 3.0, 0.0), node(0.0, 12.0, 0.0)] };
    let (zx, _) = se_update(&t, &state);
    assert!((zx[0][(0, 0)] - 1.0).abs() < 1e-13 && (zx[1][(0, 0)] - 8.0).abs() < 1e-13);
}

#[test]
fn physical_update_examples() {
    let ms = unit_spring();
    let mut state = BlockState { anchor: node(0.0, 0.0, 0.0), nodes: vec![node(0.0, 9.0, 9.0)] };
    state.nodes[0].zx = scalar(1.0);
    state.nodes[0].zp = scalar(0.0);
    assert_eq!(pe_update(&ms, Formulation::Zds, &mut state).unwrap(), 1);
    let n = &state.nodes[0];
    assert_eq!([n.dx[(0, 0)], n.dp[(0, 0)], n.sx[(0, 0)], n.sp[(0, 0)]], [0.0, -1.0, -1.0, 0.0]);

    let pend = Pendulum::new(1.0, 1.0, 1.0, std::f64::consts::FRAC_PI_4, 0.0).unwrap();
    let mut state = BlockState { anchor: node(0.0, 0.0, 0.0), nodes: vec![node(0.0, 0.0, 0.0); 2] };
    for n in state.nodes.iter_mut() {
        n.zx = scalar(std::f64::consts::FRAC_PI_4);
    }
    assert_eq!(pe_update(&pend, Formulation::Zds, &mut state).unwrap(), 2);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    for n in &state.nodes {
        assert_eq!(n.dx[(0, 0)], 0.0);
        assert!((n.dp[(0, 0)] + h).abs() < 1e-15 && (n.sx[(0, 0)] + h).abs() < 1e-15);
        assert_eq!(n.sp[(0, 0)], 0.0);
    }

    let free = EmParticle::<f64>::paper(EmVariant::Free);
    let (x, p) = free.initial_state();
    let mut state = BlockState {
        anchor: Node::zeros(3, 1),
        nodes: vec![Node { zx: x, zp: p.clone(), ..Node::zeros(3, 1) }],
    };
    pe_update(&free, Formulation::Zds, &mut state).unwrap();
    let n = &state.nodes[0];
    assert_eq!(n.dx, p);
    assert!([&n.dp, &n.sx, &n.sp].iter().all(|b| b.max_norm() == 0.0));
}

#[test]
fn physical_update_reports_the_failing_node() {
    let k = Kepler::<f64>::paper();
    let mut state = BlockState { anchor: Node::zeros(2, 1), nodes: vec![Node::zeros(2, 1); 3] };
    for n in state.nodes.iter_mut().take(2) {
        n.zx[(0, 0)] = 1.0;
    }
    let err = pe_update(&k, Formulation::Zd, &mut state).unwrap_err();
    assert!(matches!(err, SolverError::Problem { step: 3, source: ProblemError::Singularity(_) }), "{err}");
}

/// The linear map `v -> first_rhs(v)` of a linear problem, as a matrix on `(x, p)`.
fn linear_map(problem: &dyn Hamiltonian<f64>) -> DMatrix<f64> {
    let (dim, k) = problem.shape();
    let n = dim * k;
    let mut j = DMatrix::zeros(2 * n, 2 * n);
    for c in 0..2 * n {
        let mut x = BodySpace::zeros(dim, k);
        let mut p = BodySpace::zeros(dim, k);
        if c < n {
            x.as_mut_slice()[c] = 1.0;
        } else {
            p.as_mut_slice()[c - n] = 1.0;
        }
        let (mut dx, mut dp) = (BodySpace::zeros(dim, k), BodySpace::zeros(dim, k));
        problem.first_rhs(&x, &p, &mut dx, &mut dp).unwrap();
        for i in 0..n {
            j[(i, c)] = dx.as_slice()[i];
            j[(n + i, c)] = dp.as_slice()[i];
        }
    }
    j
}

/// Block values from one dense solve of the structural equations with the physical
/// equations `D = J z`, `S = J^2 z` substituted.
fn dense_block(problem: &dyn Hamiltonian<f64>, t: &CoeffTable<f64>) -> Vec<DVector<f64>> {
    let j = linear_map(problem);
    let j2 = &j * &j;
    let n = j.nrows();
    let r = t.r;
    let zds = t.formulation == Formulation::Zds;
    let (x0, p0) = problem.initial_state();
    let z0 = DVector::from_iterator(n, x0.as_slice().iter().chain(p0.as_slice()).copied());
    let mut a = DMatrix::zeros(r * n, r * n);
    let mut b = DVector::zeros(r * n);
    for m in 0..r {
        let mut known = &z0 * t.b_z[m] + &j * &z0 * t.b_d[m];
        if zds {
            known += &j2 * &z0 * t.b_s[m];
        }
        b.rows_mut(m * n, n).copy_from(&(-known));
        for c in 0..r {
            let mut blk = &j * t.bd(m, c);
            if zds {
                blk += &j2 * t.bs(m, c);
            }
            if m == c {
                blk += DMatrix::identity(n, n);
            }
            a.view_mut((m * n, c * n), (n, n)).copy_from(&blk);
        }
    }
    let z = a.lu().solve(&b).expect("nonsingular block system");
    (0..r).map(|m| z.rows(m * n, n).into_owned()).collect()
}

#[test]
fn converged_blocks_match_the_dense_linear_solve() {
    let config = SolverConfig::default();
    let problems: Vec<Box<dyn Hamiltonian<f64>>> =
        vec![Box::new(unit_spring()), Box::new(TwoSpring::<f64>::paper().unwrap())];
    for problem in &problems {
        for f in BOTH {
            for r in 1..=4 {
                let t: CoeffTable<f64> = table(r, f, 0.1).unwrap();
                let (state, stats) = solve_block(&anchor(problem.as_ref(), f), problem.as_ref(), &t, &config).unwrap();
                assert!(stats.converged);
                let want = dense_block(problem.as_ref(), &t);
                for (node, w) in state.nodes.iter().zip(&want) {
                    let got: Vec<f64> = node.zx.as_slice().iter().chain(node.zp.as_slice()).copied().collect();
                    let dev = got.iter().zip(w.iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                    assert!(dev <= 10.0 * config.tol, "{} {f} R={r}: {dev:e} got {got:?} want {w:?} it {}", problem.name(), stats.iterations);
                }
            }
        }
    }
}

/// `H = p1 + p2 q'(x1)`: `x1` is time and `x2 = q(x1)` for a polynomial `q`.
struct Graft {
    c: Vec<f64>,
}

impl Graft {
    fn deriv(&self, k: usize, t: f64) -> f64 {
        let mut acc = 0.0;
        for (i, &c) in self.c.iter().enumerate().skip(k) {
            let f: f64 = (i - k + 1..=i).map(|v| v as f64).product();
            acc += c * f * t.powi((i - k) as i32);
        }
        acc
    }
}

impl Hamiltonian<f64> for Graft {
    fn name(&self) -> &str {
        "graft"
    }
    fn shape(&self) -> (usize, usize) {
        (2, 1)
    }
    fn initial_state(&self) -> (BodySpace<f64>, BodySpace<f64>) {
        (BodySpace::from_vec(vec![0.0, self.c[0]]), BodySpace::from_vec(vec![0.0, 1.0]))
    }
    fn is_separable(&self) -> bool {
        false
    }
    fn energy(&self, x: &BodySpace<f64>, p: &BodySpace<f64>) -> Result<f64, ProblemError> {
        Ok(p[(0, 0)] + p[(1, 0)] * self.deriv(1, x[(0, 0)]))
    }
    fn first_rhs(
        &self,
        x: &BodySpace<f64>,
        p: &BodySpace<f64>,
        dx: &mut BodySpace<f64>,
        dp: &mut BodySpace<f64>,
    ) -> Result<(), ProblemError> {
        let t = x[(0, 0)];
        dx[(0, 0)] = 1.0;
        dx[(1, 0)] = self.deriv(1, t);
        dp[(0, 0)] = -p[(1, 0)] * self.deriv(2, t);
        dp[(1, 0)] = 0.0;
        Ok(())
    }
    fn second_rhs(
        &self,
        x: &BodySpace<f64>,
        p: &BodySpace<f64>,
        vx: &BodySpace<f64>,
        vp: &BodySpace<f64>,
        sx: &mut BodySpace<f64>,
        sp: &mut BodySpace<f64>,
    ) -> Result<(), ProblemError> {
        let t = x[(0, 0)];
        sx[(0, 0)] = 0.0;
        sx[(1, 0)] = self.deriv(2, t) * vx[(0, 0)];
        sp[(0, 0)] = -vp[(1, 0)] * self.deriv(2, t) - p[(1, 0)] * self.deriv(3, t) * vx[(0, 0)];
        sp[(1, 0)] = 0.0;
        Ok(())
    }
}

#[test]
fn polynomials_of_the_exactness_degree_are_reproduced() {
    for f in BOTH {
        for r in 1..=4 {
            let deg = f.exactness_degree(r);
            let c: Vec<f64> = (0..=deg).map(|i| if i % 2 == 0 { 1.0 } else { -0.5 } / (i + 1) as f64).collect();
            let q = Graft { c };
            let n = 4 * r;
            let tr = integrate(&q, f, r, n, 2.0, &IntegrateOptions::new(SolverConfig::default()), &mut NoObserver)
                .unwrap();
            assert_eq!(tr.nodes.len(), n + 1);
            for node in &tr.nodes {
                let t = node.t;
                let want = q.deriv(0, t);
                assert!((node.x[(0, 0)] - t).abs() <= 1e-12);
                assert!((node.x[(1, 0)] - want).abs() <= 1e-10 * want.abs().max(1.0), "{f} R={r} t={t}");
            }
        }
    }
}

/// `H~(x, p) = H(p, -x)`; solutions map as `(x~, p~) = (-p, x)`.
struct Swapped<P>(P);

impl<P: Hamiltonian<f64>> Hamiltonian<f64> for Swapped<P> {
    fn name(&self) -> &str {
        "swapped"
    }
    fn shape(&self) -> (usize, usize) {
        self.0.shape()
    }
    fn initial_state(&self) -> (BodySpace<f64>, BodySpace<f64>) {
        let (x, mut p) = self.0.initial_state();
        p.scale(-1.0);
        (p, x)
    }
    fn is_separable(&self) -> bool {
        self.0.is_separable()
    }
    fn energy(&self, x: &BodySpace<f64>, p: &BodySpace<f64>) -> Result<f64, ProblemError> {
        let mut mx = x.clone();
        mx.scale(-1.0);
        self.0.energy(p, &mx)
    }
    fn first_rhs(
        &self,
        x: &BodySpace<f64>,
        p: &BodySpace<f64>,
        dx: &mut BodySpace<f64>,
        dp: &mut BodySpace<f64>,
    ) -> Result<(), ProblemError> {
        let mut mx = x.clone();
        mx.scale(-1.0);
        let (mut ox, mut op) = (dx.clone(), dp.clone());
        self.0.first_rhs(p, &mx, &mut ox, &mut op)?;
        op.scale(-1.0);
        *dx = op;
        *dp = ox;
        Ok(())
    }
    fn second_rhs(
        &self,
        x: &BodySpace<f64>,
        p: &BodySpace<f64>,
        vx: &BodySpace<f64>,
        vp: &BodySpace<f64>,
        sx: &mut BodySpace<f64>,
        sp: &mut BodySpace<f64>,
    ) -> Result<(), ProblemError> {
        let (mut mx, mut mvx) = (x.clone(), vx.clone());
        mx.scale(-1.0);
        mvx.scale(-1.0);
        let (mut ox, mut op) = (sx.clone(), sp.clone());
        self.0.second_rhs(p, &mx, vp, &mvx, &mut ox, &mut op)?;
        op.scale(-1.0);
        *sx = op;
        *sp = ox;
        Ok(())
    }
}

#[test]
fn swapping_position_and_momentum_commutes_with_the_solver() {
    let pend = Pendulum::<f64>::paper();
    let swapped = Swapped(Pendulum::<f64>::paper());
    for f in BOTH {
        let opts = IntegrateOptions::new(SolverConfig::default());
        let a = integrate(&pend, f, 2, 200, 20.0, &opts, &mut NoObserver).unwrap();
        let b = integrate(&swapped, f, 2, 200, 20.0, &opts, &mut NoObserver).unwrap();
        let mut worst = 0.0f64;
        for (u, v) in a.nodes.iter().zip(&b.nodes) {
            worst = worst.max((v.x[(0, 0)] + u.p[(0, 0)]).abs()).max((v.p[(0, 0)] - u.x[(0, 0)]).abs());
        }
        assert!(worst <= 1e-11, "{f}: {worst:e}");
    }
}

#[test]
fn converged_blocks_do_not_depend_on_the_kernel_basis() {
    let ms = unit_spring();
    let config = SolverConfig::default();
    for f in BOTH {
        let basis = kernel_basis(3, f).unwrap();
        let (s, c) = (0.6f64.sin(), 0.6f64.cos());
        let (s, c) = (structural::numerics::DoubleDouble::from_f64(s), structural::numerics::DoubleDouble::from_f64(c));
        // a rotation built from rounded sin/cos is orthogonal only to double precision;
        // the A_z solve absorbs any residual scaling
        let mut vectors = basis.vectors.clone();
        let (v0, v2) = (vectors[0].clone(), vectors[2].clone());
        vectors[0] = v0.iter().zip(&v2).map(|(&a, &b)| c * a - s * b).collect();
        vectors[2] = v0.iter().zip(&v2).map(|(&a, &b)| s * a + c * b).collect();
        let mixed = RawBasis { vectors, ..basis.clone() };
        let ta: CoeffTable<f64> = assemble_tables(&basis, 0.1).unwrap();
        let tb: CoeffTable<f64> = assemble_tables(&mixed, 0.1).unwrap();
        let a0 = anchor(&ms, f);
        let (sa, _) = solve_block(&a0, &ms, &ta, &config).unwrap();
        let (sb, _) = solve_block(&a0, &ms, &tb, &config).unwrap();
        for (u, v) in sa.nodes.iter().zip(&sb.nodes) {
            assert!(u.zx.max_diff(&v.zx) <= 100.0 * config.tol && u.zp.max_diff(&v.zp) <= 100.0 * config.tol);
        }
    }
}

struct Blocks(Vec<IterStats>);

impl Observer<f64> for Blocks {
    fn on_block(&mut self, s: &IterStats) {
        self.0.push(*s);
    }
}

#[test]
fn call_accounting() {
    let pend = Pendulum::<f64>::paper();
    for f in BOTH {
        for r in [1, 2, 3] {
            let mut obs = Blocks(Vec::new());
            let tr = integrate(&pend, f, r, 30, 10.0, &IntegrateOptions::new(SolverConfig::default()), &mut obs)
                .unwrap();
            assert_eq!(obs.0.len(), 30 / r);
            for s in &obs.0 {
                assert!(s.converged);
                assert_eq!(s.pe1_calls, r * (s.iterations + 1));
                assert_eq!(s.pe2_calls, if f == Formulation::Zds { s.pe1_calls } else { 0 });
            }
            let iters: usize = obs.0.iter().map(|s| s.iterations).sum();
            assert_eq!(tr.stats.total_iter, iters);
            // plus the anchor evaluation at t = 0
            assert_eq!(tr.stats.pe1_calls, 1 + obs.0.iter().map(|s| s.pe1_calls).sum::<usize>());
        }
    }
}

#[test]
fn equilibrium_converges_in_one_sweep() {
    let pend = Pendulum::new(1.0, 1.0, 1.0, 0.0, 0.0).unwrap();
    for f in BOTH {
        let t: CoeffTable<f64> = table(4, f, 0.5).unwrap();
        let (state, stats) = solve_block(&anchor(&pend, f), &pend, &t, &SolverConfig::default()).unwrap();
        assert_eq!(stats.iterations, 1);
        assert!(state.nodes.iter().all(|n| n.zx[(0, 0)] == 0.0 && n.zp[(0, 0)] == 0.0));
    }
}

#[test]
fn single_block_and_partial_final_block() {
    let ms = unit_spring();
    let opts = IntegrateOptions::new(SolverConfig::default());
    let tr = integrate(&ms, Formulation::Zds, 4, 4, 1.0, &opts, &mut NoObserver).unwrap();
    assert_eq!(tr.nodes.len(), 5);
    assert_eq!(tr.nodes[0].t, 0.0);
    assert_eq!(tr.stats.blocks, 1);

    let tr = integrate(&ms, Formulation::Zd, 3, 7, 0.7, &opts, &mut NoObserver).unwrap();
    assert_eq!(tr.nodes.len(), 8);
    assert_eq!(tr.stats.blocks, 3);
    let last = tr.nodes.last().unwrap();
    assert_eq!(last.step, 7);
    // the one-node tail block falls back to the trapezoidal rule
    assert!((last.x[(0, 0)] - 0.7f64.cos()).abs() < 1e-3);
}

#[test]
fn observer_sees_nodes_in_order() {
    struct Steps(Vec<(usize, f64)>);
    impl Observer<f64> for Steps {
        fn on_node(&mut self, step: usize, t: f64, _: &BodySpace<f64>, _: &BodySpace<f64>) {
            self.0.push((step, t));
        }
    }
    let mut obs = Steps(Vec::new());
    let opts = IntegrateOptions { decimation: Some(4), ..IntegrateOptions::new(SolverConfig::default()) };
    let tr = integrate(&unit_spring(), Formulation::Zds, 2, 10, 1.0, &opts, &mut obs).unwrap();
    assert_eq!(obs.0.len(), 11);
    assert!(obs.0.iter().enumerate().all(|(i, &(s, t))| s == i && (t - 0.1 * i as f64).abs() < 1e-15));
    let stored: Vec<usize> = tr.nodes.iter().map(|n| n.step).collect();
    assert_eq!(stored, [0, 4, 8, 10]);
}

#[test]
fn configuration_errors() {
    let ms = unit_spring();
    let ok = IntegrateOptions::new(SolverConfig::default());
    let cfg = |e: Result<_, SolverError>| matches!(e, Err(SolverError::Config(_)));
    assert!(cfg(integrate(&ms, Formulation::Zd, 2, 0, 1.0, &ok, &mut NoObserver)));
    assert!(cfg(integrate(&ms, Formulation::Zd, 4, 3, 1.0, &ok, &mut NoObserver)));
    assert!(cfg(integrate(&ms, Formulation::Zd, 2, 4, -1.0, &ok, &mut NoObserver)));
    let bad = IntegrateOptions::new(SolverConfig { tol: 0.0, ..SolverConfig::default() });
    assert!(cfg(integrate(&ms, Formulation::Zd, 2, 4, 1.0, &bad, &mut NoObserver)));
    assert!(matches!(
        integrate(&ms, Formulation::Zd, 13, 26, 1.0, &ok, &mut NoObserver),
        Err(SolverError::Coeff(_))
    ));
}

#[test]
fn non_convergence_and_acceptance() {
    let ms = unit_spring();
    let tight = SolverConfig { max_iter: 2, ..SolverConfig::default() };
    let err = integrate(&ms, Formulation::Zds, 2, 40, 10.0, &IntegrateOptions::new(tight), &mut NoObserver).unwrap_err();
    assert!(matches!(err, SolverError::NonConvergence { step: 2, iterations: 2, .. }), "{err}");
    let lenient = SolverConfig { accept_unconverged: true, ..tight };
    let tr = integrate(&ms, Formulation::Zds, 2, 40, 10.0, &IntegrateOptions::new(lenient), &mut NoObserver).unwrap();
    assert_eq!(tr.stats.unconverged, 20);
}

#[test]
fn divergence_is_detected() {
    // a stiff spring at a huge step makes the plain iteration blow up
    let ms = MassSpring::new(1.0, 1e4, 1.0, 0.0).unwrap();
    let err = integrate(&ms, Formulation::Zds, 4, 4, 40.0, &IntegrateOptions::new(SolverConfig::default()), &mut NoObserver)
        .unwrap_err();
    assert!(matches!(err, SolverError::Divergence { .. }), "{err}");
}

fn max_position_error(f: Formulation, r: usize, n: usize) -> f64 {
    let tr = integrate(&unit_spring(), f, r, n, 100.0, &IntegrateOptions::new(SolverConfig::default()), &mut NoObserver)
        .unwrap();
    tr.nodes.iter().map(|nd| (nd.x[(0, 0)] - nd.t.cos()).abs()).fold(0.0, f64::max)
}

#[test]
fn mass_spring_orders() {
    // ZD reaches R+2 for even R; odd R stop at R+1
    let cases = [
        (Formulation::Zd, 1, 2.0),
        (Formulation::Zd, 2, 4.0),
        (Formulation::Zd, 3, 4.0),
        (Formulation::Zd, 4, 6.0),
        (Formulation::Zds, 1, 4.0),
        (Formulation::Zds, 2, 6.0),
    ];
    for (f, r, nominal) in cases {
        let errs: Vec<f64> = [240, 480, 960].iter().map(|&n| max_position_error(f, r, n)).collect();
        for w in errs.windows(2).filter(|w| w[1] > 100.0 * f64::EPSILON) {
            let order = (w[0] / w[1]).log2();
            assert!((order - nominal).abs() <= 0.4, "{f} R={r}: errors {errs:?}");
        }
    }
    assert!((max_position_error(Formulation::Zd, 2, 960) / 2.25e-4).log10().abs() < 3f64.log10());
    assert!((max_position_error(Formulation::Zds, 1, 960) / 1.41e-5).log10().abs() < 3f64.log10());
}
