//! Random instances and invariant checks shared by the property suite and the
//! acceptance harness.

#![allow(dead_code)]

use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

use socialcause::causal::{dose_independent_matrix, CausalModel};
use socialcause::dynamics::{run, Intervention, LearningParams, RunSpec};
use socialcause::linalg::Matrix;
use socialcause::network::CombinationMatrix;
use socialcause::world::WorldModel;

/// A strongly connected network with self-loops, a world model in which
/// every wrong hypothesis is distinguishable, and learning parameters.
#[derive(Debug, Clone)]
pub struct Instance {
    pub combination: CombinationMatrix,
    pub world: WorldModel,
    pub params: LearningParams,
    pub seed: u64,
}

impl Instance {
    pub fn agents(&self) -> usize {
        self.combination.agents()
    }

    pub fn hypotheses(&self) -> usize {
        self.world.hypotheses()
    }
}

/// Column-normalizes positive weights on a ring plus self-loops plus the
/// extra edges selected by `extra`.
pub fn build_combination(k: usize, weights: &[f64], extra: &[bool]) -> CombinationMatrix {
    let mut w = Matrix::zeros(k, k);
    for from in 0..k {
        for to in 0..k {
            let on = from == to || (from + 1) % k == to || extra[from * k + to];
            if on {
                w[(from, to)] = weights[from * k + to];
            }
        }
    }
    for mut col in w.column_iter_mut() {
        let s = col.sum();
        col /= s;
    }
    CombinationMatrix::new(w).expect("column-normalized positive ring is valid")
}

fn params_strategy() -> impl Strategy<Value = LearningParams> {
    prop_oneof![
        Just(LearningParams::nbsl()),
        (0.01f64..0.9, 0.2f64..3.0).prop_map(|(d, b)| LearningParams::new(d, b).unwrap()),
    ]
}

pub fn instance() -> impl Strategy<Value = Instance> {
    (2usize..=6, 2usize..=4)
        .prop_flat_map(|(k, h)| {
            (
                Just(k),
                Just(h),
                prop::collection::vec(0.05f64..1.0, k * k),
                prop::collection::vec(prop::bool::weighted(0.3), k * k),
                prop::collection::vec(-1.0f64..1.0, k * h),
                0..h,
                params_strategy(),
                any::<u64>(),
            )
        })
        .prop_map(|(k, h, weights, extra, means, true_state, params, seed)| {
            let mut means = Matrix::from_vec(k, h, means);
            // Agent 0 separates every pair of hypotheses.
            for c in 0..h {
                means[(0, c)] = 0.6 * c as f64 - 0.9;
            }
            Instance {
                combination: build_combination(k, &weights, &extra),
                world: WorldModel::new(means, true_state).unwrap(),
                params,
                seed,
            }
        })
}

/// An instance together with a valid intervention dose.
pub fn intervened_instance() -> impl Strategy<Value = (Instance, Intervention)> {
    instance().prop_flat_map(|inst| {
        let (k, h) = (inst.agents(), inst.hypotheses());
        (Just(inst), 0..k, prop::collection::vec(0.05f64..1.0, h)).prop_map(|(inst, m, raw)| {
            let s: f64 = raw.iter().sum();
            let dose = Intervention::new(m, raw.iter().map(|x| x / s).collect()).unwrap();
            (inst, dose)
        })
    })
}

const STEPS: usize = 25;

fn fail(msg: String) -> Result<(), TestCaseError> {
    Err(TestCaseError::fail(msg))
}

pub fn check_row_stochastic(inst: &Instance) -> Result<(), TestCaseError> {
    let trace = run(
        &inst.world,
        &inst.combination,
        inst.params,
        &RunSpec::sampled(STEPS, inst.seed, 0),
        None,
    )
    .unwrap();
    for (t, state) in trace.psi.iter().chain(&trace.mu).enumerate() {
        let b = state.beliefs();
        for (k, row) in b.row_iter().enumerate() {
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-12 || row.iter().any(|&x| !(0.0..=1.0).contains(&x)) {
                return fail(format!("state {t}, agent {k}: row sums to {sum}"));
            }
        }
    }
    Ok(())
}

/// Stored log-ratios agree with the beliefs and with the linear recursion
/// driven by the same observations.
pub fn check_log_ratio_recursion(inst: &Instance) -> Result<(), TestCaseError> {
    let trace = run(
        &inst.world,
        &inst.combination,
        inst.params,
        &RunSpec::sampled(STEPS, inst.seed, 0),
        None,
    )
    .unwrap();
    let t0 = inst.world.true_state();
    let (k, h) = (inst.agents(), inst.hypotheses());
    let a = inst.combination.matrix();
    let keep = 1.0 - inst.params.delta;
    for i in 1..=STEPS {
        let mu = trace.mu[i].beliefs();
        for ag in 0..k {
            for hy in 0..h {
                let direct = (mu[(ag, t0)] / mu[(ag, hy)]).ln();
                let stored = trace.lambda[i][(ag, hy)];
                if (direct - stored).abs() > 1e-8 * (1.0 + stored.abs()) {
                    return fail(format!("t={i} agent {ag} hyp {hy}: {direct} vs {stored}"));
                }
            }
        }
        let x = inst.world.llr(&inst.world.sample(inst.seed, 0, i as u64)).0;
        let expected = a.tr_mul(&(&trace.lambda[i - 1] * keep + x * inst.params.beta));
        let err = (&expected - &trace.lambda[i]).amax();
        if err > 1e-9 * (1.0 + expected.amax()) {
            return fail(format!("recursion breaks at t={i}: error {err}"));
        }
    }
    Ok(())
}

pub fn check_pinning(inst: &Instance, dose: &Intervention) -> Result<(), TestCaseError> {
    let trace = run(
        &inst.world,
        &inst.combination,
        inst.params,
        &RunSpec::sampled(STEPS, inst.seed, 1),
        Some(dose),
    )
    .unwrap();
    let m = dose.agent;
    for (t, state) in trace.psi.iter().chain(&trace.mu).enumerate() {
        for (hy, &p) in dose.belief().iter().enumerate() {
            let got = state.belief(m, hy);
            if (got - p).abs() > 1e-14 {
                return fail(format!("state {t}: agent {m} holds {got} on {hy}, dose {p}"));
            }
        }
    }
    Ok(())
}

pub fn check_perron(inst: &Instance) -> Result<(), TestCaseError> {
    let v = inst.combination.perron_vector().unwrap();
    let residual = (inst.combination.matrix() * &v - &v).amax();
    if residual > 1e-10 {
        return fail(format!("Perron residual {residual}"));
    }
    if (v.sum() - 1.0).abs() > 1e-12 || v.iter().any(|&x| x <= 0.0) {
        return fail(format!("Perron vector not a positive pmf: {v}"));
    }
    Ok(())
}

pub fn check_influence_matrix(inst: &Instance) -> Result<(), TestCaseError> {
    let info = inst.world.informativeness();
    let model = CausalModel::new(&inst.combination, &info, inst.params).unwrap();
    let c = dose_independent_matrix(&model).unwrap();
    let k = inst.agents();
    let diag = 1.0 - 1.0 / inst.hypotheses() as f64;
    for m in 0..k {
        for j in 0..k {
            let x = c.get(m, j);
            if m == j && (x - diag).abs() > 1e-15 {
                return fail(format!("diagonal {m}: {x}, expected {diag}"));
            }
            if x.is_nan() || x <= 0.0 {
                return fail(format!("entry ({m},{j}) = {x} is not positive"));
            }
        }
    }
    Ok(())
}
