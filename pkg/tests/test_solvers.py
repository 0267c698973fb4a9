import math

import numpy as np
import pytest

from mero.errors import ConfigurationError, InvalidArgumentError
from mero.geometry import PrimalGeometry, ProductGeometry, SimplexGeometry, mirror_step_primal, mirror_step_simplex
from mero.problems import ConstantOverrides, LogisticLoss, Purpose, derive_constants
from mero.problems.base_oracle import stream_seed
from mero.problems.loss import Sample
from mero.problems.sources.finite_support import FiniteSupportDistribution, FiniteSupportOracle, build_finite_task
from mero.problems.sources.synthetic import SyntheticTaskSpec, build_synthetic_task
from mero.problems.task import Task
from mero.solvers import (
    AnytimeMeroState,
    RiskMinimizerState,
    StepSchedule,
    TwoStageState,
    anytime_mero_round,
    checkpoint_grid,
    mero_gradients,
    mirror_prox_mu,
    risk_bound_anytime,
    risk_bound_fixed,
    run_anytime_mero,
    run_gdro_smd,
    run_multistage_mero,
    run_reference_mero,
    run_two_stage_weighted_mero,
    run_weighted_gdro,
    saddle_bound_anytime,
    saddle_gradients,
    smd_risk_step,
    smpa_round,
    smpa_rounds,
    weighted_gradients,
    weights_from_budgets,
)
from mero.solvers.anytime import Anchoring, run_saddle_rounds
from mero.solvers.smd import run_risk_minimizer

from .conftest import random_distribution


def _geometry(d, m, radius=5.0):
    return ProductGeometry(primal=PrimalGeometry(dimension=d, radius=radius), simplex=SimplexGeometry(m=m))


def _synthetic(m=3, d=5, seed=0, **kwargs):
    task = build_synthetic_task(SyntheticTaskSpec(m=m, dimension=d, seed=seed, **kwargs))
    geom = _geometry(d, m)
    loss = LogisticLoss()
    return task, geom, loss, derive_constants(geom, loss, task)


def test_anytime_schedule_values():
    _, geom, _, constants = _synthetic()
    schedule = StepSchedule.anytime(constants, 3)
    d, g, big_m = constants.big_d, constants.big_g, constants.m_const
    assert schedule.risk_step(2, 4) == pytest.approx(d / (2 * g))
    assert schedule.primal_step(9) == pytest.approx(2 * d ** 2 / (3 * big_m))
    assert schedule.simplex_step(1) == pytest.approx(2 * math.log(3) / big_m)
    with pytest.raises(InvalidArgumentError):
        schedule.primal_step(0)


def test_horizon_schedule_values():
    _, _, _, constants = _synthetic()
    schedule = StepSchedule.horizon(constants, 3, 500)
    eta = 2.0 / (constants.m_const * math.sqrt(5 * 500))
    assert schedule.primal_step(1) == schedule.primal_step(400) == pytest.approx(2 * eta * constants.big_d ** 2)
    assert schedule.simplex_step(7) == pytest.approx(2 * eta * math.log(3))
    assert schedule.risk_step(0, 3) == pytest.approx(math.sqrt(2) * constants.big_d / (constants.big_g * math.sqrt(500)))


def test_weighted_schedule_values():
    _, geom, loss, _ = _synthetic()
    budgets = [4000, 1000, 250]
    p = weights_from_budgets(budgets)
    constants = derive_constants(geom, loss, overrides=ConstantOverrides(big_g=2.0, smoothness_l=0.5), budgets=budgets, p=p)
    schedule = StepSchedule.weighted(constants, budgets)
    mu = mirror_prox_mu(constants, 250)
    assert schedule.primal_step(5) == pytest.approx(2 * constants.big_d ** 2 * mu)
    assert schedule.risk_step(1, 5) == pytest.approx(2 * constants.big_d / (2.0 * math.sqrt(1000)))


def test_schedule_rejects_missing_simplex_step():
    with pytest.raises(ConfigurationError):
        StepSchedule.constant(2, 0.1, 0.1, 0.0)
    assert StepSchedule.constant(1, 0.1, 0.1, 0.0).m == 1


def test_weights_from_budgets():
    np.testing.assert_array_equal(weights_from_budgets([500, 500, 500]), [1.0, 1.0, 1.0])
    budgets = [30000, 25000, 20000, 15000, 10000, 5000]
    n_m = 5000.0
    direct = [(1 / math.sqrt(n_m) + 1) / (1 / math.sqrt(n_m) + math.sqrt(n_m / n)) for n in budgets]
    np.testing.assert_allclose(weights_from_budgets(budgets), direct, rtol=1e-12)
    assert weights_from_budgets(budgets)[-1] == pytest.approx(1.0)


def test_weights_from_budgets_rejects_bad_input():
    with pytest.raises(InvalidArgumentError):
        weights_from_budgets([])
    with pytest.raises(InvalidArgumentError):
        weights_from_budgets([10, 0])


def test_weighted_average_recurrence_matches_direct_sum():
    rng = np.random.default_rng(0)
    geom = PrimalGeometry(dimension=3, radius=2.0)
    schedule = StepSchedule.single_risk(geom.d_bound, 3.0)
    state = RiskMinimizerState.start(geom)
    weighted_sum, eta_sum = np.zeros(3), 0.0
    for t in range(1, 10_001):
        eta = schedule.risk_step(0, t)
        weighted_sum += eta * state.w
        eta_sum += eta
        smd_risk_step(state, rng.standard_normal(3), schedule, geom)
    np.testing.assert_allclose(state.w_bar, weighted_sum / eta_sum, atol=1e-10)
    assert state.t == 10_000


def test_saddle_gradients_by_hand(loss):
    w, q = np.array([0.5]), np.array([0.25, 0.75])
    samples = [Sample(x=np.array([1.0]), y=1.0), Sample(x=np.array([-2.0]), y=1.0)]
    anchors = np.array([[1.0], [0.0]])
    g_w, g_q = mero_gradients(w, q, samples, anchors, loss)

    def value(v, x):
        return math.log1p(math.exp(-v * x))

    def slope(v, x):
        return -x / (1.0 + math.exp(v * x))

    assert g_w[0] == pytest.approx(0.25 * slope(0.5, 1.0) + 0.75 * slope(0.5, -2.0))
    assert g_q[0] == pytest.approx(value(0.5, 1.0) - value(1.0, 1.0))
    assert g_q[1] == pytest.approx(value(0.5, -2.0) - value(0.0, -2.0))


def test_saddle_gradients_offsets_weights_and_shared_anchor(loss):
    w, q = np.array([0.2]), np.array([0.5, 0.5])
    batches = [(np.array([[1.0], [2.0]]), np.array([1.0, -1.0])), (np.array([[0.5]]), np.array([1.0]))]
    _, raw = saddle_gradients(w, q, batches, loss)
    _, shifted = saddle_gradients(w, q, batches, loss, offsets=np.array([0.1, 0.2]), p=np.array([2.0, 1.0]))
    np.testing.assert_allclose(shifted, [2.0 * (raw[0] - 0.1), raw[1] - 0.2])
    _, shared = saddle_gradients(w, q, batches, loss, anchors=w)
    np.testing.assert_allclose(shared, 0.0, atol=1e-15)


def test_saddle_gradients_reject_missing_samples(loss):
    with pytest.raises(InvalidArgumentError):
        saddle_gradients(np.zeros(1), np.array([0.5, 0.5]), [(np.ones((1, 1)), np.ones(1))], loss)
    with pytest.raises(InvalidArgumentError):
        saddle_gradients(np.zeros(1), np.array([1.0]), [(np.zeros((0, 1)), np.zeros(0))], loss)


def test_weighted_gradients_check_batch_sizes(loss):
    batches = [(np.ones((2, 1)), np.ones(2)), (np.ones((1, 1)), np.ones(1))]
    with pytest.raises(InvalidArgumentError):
        weighted_gradients(np.zeros(1), np.array([0.5, 0.5]), batches, None, np.ones(2), loss, batch_sizes=[2, 2])


def test_first_round_averages_start_point():
    task, geom, loss, constants = _synthetic()
    state = AnytimeMeroState.start(geom)
    schedule = StepSchedule.anytime(constants, 3)
    anytime_mero_round(state, task.oracles(Purpose.STAGE1), loss, schedule, geom)
    np.testing.assert_array_equal(state.w_bar, np.zeros(5))
    np.testing.assert_allclose(state.q_bar, np.full(3, 1 / 3))
    assert state.t == 1 and task.samples_drawn() == [1, 1, 1]
    assert state.q.sum() == pytest.approx(1.0)
    assert np.linalg.norm(state.w) <= geom.primal.radius + 1e-12


def test_single_distribution_keeps_unit_weight():
    task, geom, loss, constants = _synthetic(m=1)
    result = run_anytime_mero(task, loss, geom, StepSchedule.anytime(constants, 1), 50)
    np.testing.assert_array_equal(result.q, [1.0])


def test_anytime_checkpoints_and_replay():
    records = []
    task, geom, loss, constants = _synthetic()
    schedule = StepSchedule.anytime(constants, 3)
    result = run_anytime_mero(
        task, loss, geom, schedule, 1000, checkpoints=checkpoint_grid(1000, 100), on_checkpoint=records.append,
    )
    assert [c.t for c in records] == list(range(100, 1001, 100))
    assert records[-1].samples_per_dist == [1000, 1000, 1000]
    np.testing.assert_array_equal(records[-1].w, result.w)
    assert result.extras["risk_minimizers"].shape == (3, 5)

    again, *_ = _synthetic()
    replay = run_anytime_mero(again, loss, geom, schedule, 1000)
    np.testing.assert_array_equal(replay.w, result.w)
    np.testing.assert_array_equal(replay.q, result.q)


def test_checkpoint_grid():
    assert checkpoint_grid(1000, 100) == set(range(100, 1001, 100))
    assert checkpoint_grid(1050, 100) == set(range(100, 1001, 100)) | {1050}
    assert checkpoint_grid(7, None) == {7}
    with pytest.raises(InvalidArgumentError):
        checkpoint_grid(0, 10)


def test_gdro_favours_the_noisiest_distribution():
    task, geom, loss, constants = _synthetic(m=3, d=5, flip_probs=[0.0, 0.1, 0.4])
    result = run_gdro_smd(task, loss, geom, StepSchedule.anytime(constants, 3), 3000)
    assert int(np.argmax(result.q)) == 2
    assert "risk_minimizers" not in result.extras


def test_multistage_stages_and_sample_use():
    task, geom, loss, constants = _synthetic(m=2)
    schedule = StepSchedule.horizon(constants, 2, 200)
    result = run_multistage_mero(task, loss, geom, schedule, 200)
    assert result.rounds == 200
    assert result.samples_per_dist == [600, 600]
    assert result.extras["stage1_solutions"].shape == (2, 5)
    assert result.extras["offsets"].shape == (2,)


def test_multistage_continues_past_horizon_without_stage_two():
    task, geom, loss, constants = _synthetic(m=2)
    schedule = StepSchedule.horizon(constants, 2, 100)
    result = run_multistage_mero(task, loss, geom, schedule, 100, include_stage2=False, continue_past_t=True)
    assert result.rounds == 300
    assert result.samples_per_dist == [400, 400]
    assert "offsets" not in result.extras


def test_reference_mero_needs_a_reference():
    task, geom, loss, constants = _synthetic(m=2)
    schedule = StepSchedule.anytime(constants, 2)
    with pytest.raises(ConfigurationError):
        run_reference_mero(task, loss, geom, schedule, 10)
    result = run_reference_mero(task, loss, geom, schedule, 50, pretrain_iters=40)
    assert result.extras["reference_model"].shape == (5,)
    assert result.samples_per_dist == [90, 90]


def test_smpa_round_steps_from_anchor_point():
    geom = _geometry(2, 2, radius=10.0)
    state = TwoStageState.start(geom, None, np.ones(2))
    state.w_prime = np.array([1.0, -1.0])
    schedule = StepSchedule.constant(2, 0.1, 0.5, 0.2)
    g_first, g_second = (np.array([1.0, 0.0]), np.array([1.0, -1.0])), (np.array([0.0, 2.0]), np.array([-1.0, 1.0]))

    def oracle(w, q, half):
        return g_first if half is Purpose.SMPA_FIRST else g_second

    anchor_w, anchor_q = state.w_prime.copy(), state.q_prime.copy()
    smpa_round(state, oracle, schedule, geom)
    np.testing.assert_allclose(state.w, mirror_step_primal(geom.primal, anchor_w, g_first[0], 0.5))
    np.testing.assert_allclose(state.q, mirror_step_simplex(geom.simplex, anchor_q, g_first[1], 0.2))
    np.testing.assert_allclose(state.w_prime, mirror_step_primal(geom.primal, anchor_w, g_second[0], 0.5))
    np.testing.assert_allclose(state.q_prime, mirror_step_simplex(geom.simplex, anchor_q, g_second[1], 0.2))
    np.testing.assert_allclose(state.w_bar, state.w)
    assert state.round == 1


def test_weighted_mero_spends_budgets_exactly():
    task, geom, loss, _ = _synthetic(m=3)
    budgets = [64, 32, 16]
    constants = derive_constants(geom, loss, task, budgets=budgets, p=weights_from_budgets(budgets))
    records = []
    result = run_two_stage_weighted_mero(
        task, loss, geom, StepSchedule.weighted(constants, budgets), budgets, on_checkpoint=records.append,
        checkpoints=checkpoint_grid(smpa_rounds(budgets), 1),
    )
    assert result.rounds == smpa_rounds(budgets) == 4
    assert result.samples_per_dist == budgets
    assert result.extras["batch_sizes"] == [4, 2, 1]
    assert [c.t for c in records] == [1, 2, 3, 4]


def test_weighted_gdro_uses_half_the_smallest_budget():
    task, geom, loss, _ = _synthetic(m=2)
    budgets = [16, 8]
    constants = derive_constants(geom, loss, task, budgets=budgets, p=weights_from_budgets(budgets))
    result = run_weighted_gdro(task, loss, geom, StepSchedule.weighted(constants, budgets), budgets)
    assert result.rounds == 4
    assert result.samples_per_dist == budgets
    assert "stage1_solutions" not in result.extras


def test_weighted_mero_rejects_small_budgets():
    task, geom, loss, constants = _synthetic(m=2)
    schedule = StepSchedule.anytime(constants, 2)
    with pytest.raises(ConfigurationError):
        run_two_stage_weighted_mero(task, loss, geom, schedule, [16, 4])
    with pytest.raises(ConfigurationError):
        run_two_stage_weighted_mero(task, loss, geom, schedule, [16])


def test_bound_helpers():
    assert risk_bound_anytime(1.0, 1.0, 1) == pytest.approx(3.0 / (4.0 * (math.sqrt(2.0) - 1.0)))
    assert risk_bound_anytime(1.0, 1.0, 10_000) < risk_bound_anytime(1.0, 1.0, 100)
    assert risk_bound_fixed(2.0, 3.0, 100) == pytest.approx(1.2)
    assert saddle_bound_anytime(1.0, 1.0, 3, 10_000) < saddle_bound_anytime(1.0, 1.0, 3, 100)
    with pytest.raises(InvalidArgumentError):
        risk_bound_fixed(1.0, 1.0, 0)


def _bilinear_gradients(w, q, half):
    # φ(w, q) = q₁·w + q₂·(½ − w); saddle at w = ¼, q = (½, ½)
    return np.array([q[0] - q[1]]), np.array([w[0], 0.5 - w[0]])


@pytest.mark.parametrize("eta", [0.25, 0.5])
def test_smpa_reaches_bilinear_saddle(eta):
    geom = _geometry(1, 2, radius=1.0)
    state = TwoStageState.start(geom, None, np.ones(2))
    schedule = StepSchedule.constant(2, eta, eta, eta)
    for _ in range(10_000):
        smpa_round(state, _bilinear_gradients, schedule, geom)

    w, q = state.w_bar[0], state.q_bar
    gap = max(w, 0.5 - w) - (0.5 * q[1] - abs(q[0] - q[1]))
    assert -1e-12 <= gap <= 1e-3
    assert abs(w - 0.25) <= 1e-3


def test_weighted_gdro_reaches_saddle_of_point_masses(loss):
    # R₁(w) = ln(1 + e^{−w}), R₂(w) = ln(1 + e^{2w}): saddle at w = 0, q = (⅔, ⅓)
    masses = [
        FiniteSupportDistribution(atoms=np.array([[1.0]]), labels=np.array([1.0]), probs=np.array([1.0])),
        FiniteSupportDistribution(atoms=np.array([[2.0]]), labels=np.array([-1.0]), probs=np.array([1.0])),
    ]
    task = build_finite_task(masses, seed=3)
    geom = _geometry(1, 2, radius=1.0)
    result = run_weighted_gdro(task, loss, geom, StepSchedule.constant(2, 0.1, 0.15, 0.15), [20_000, 20_000])
    assert result.rounds == 10_000

    grid = np.linspace(-1.0, 1.0, 200_001)
    curves = np.stack([np.logaddexp(0.0, -grid), np.logaddexp(0.0, 2.0 * grid)])
    worst = max(d.risk(loss, result.w) for d in masses)
    gap = worst - float(np.min(result.q @ curves))
    assert gap <= 1e-3
    np.testing.assert_allclose(result.q, [2 / 3, 1 / 3], atol=0.05)


def _twin_task(seed=5):
    dist = random_distribution(np.random.default_rng(2), atoms=10, dimension=3)

    # both distributions read one and the same sample stream
    def factory(index, purpose):
        return FiniteSupportOracle(dist, stream_seed(seed, 0, purpose), index=index)

    return Task(name="twins", m=2, dimension=3, factory=factory)


@pytest.mark.parametrize("algorithm", ["anytime", "weighted"])
def test_identical_twins_keep_uniform_weights(loss, algorithm):
    task, geom = _twin_task(), _geometry(3, 2, radius=2.0)
    schedule = StepSchedule.constant(2, 0.1, 0.1, 0.1)
    records = []
    if algorithm == "anytime":
        result = run_anytime_mero(task, loss, geom, schedule, 300, checkpoints=range(1, 301),
                                  on_checkpoint=records.append)
    else:
        result = run_two_stage_weighted_mero(task, loss, geom, schedule, [400, 400], checkpoints=range(1, 101),
                                             on_checkpoint=records.append)
    assert len(records) == (300 if algorithm == "anytime" else 100)
    for record in records:
        np.testing.assert_allclose(record.q, [0.5, 0.5], atol=1e-14)
    np.testing.assert_allclose(result.q, [0.5, 0.5], atol=1e-14)


@pytest.mark.parametrize("shift", [-0.7, 2.5])
def test_stage_three_ignores_common_offset_shift(shift):
    offsets = np.array([0.3, 0.1, 0.2])
    runs = []
    for applied in (offsets, offsets + shift):
        task, geom, loss, constants = _synthetic(m=3)
        records = []
        result = run_saddle_rounds(
            "mero-multistage", task, loss, geom, StepSchedule.horizon(constants, 3, 300), 300, Anchoring.NONE,
            offsets=applied, checkpoints=checkpoint_grid(300, 50), on_checkpoint=records.append,
            purpose=Purpose.STAGE3,
        )
        runs.append((result, records))

    (base, base_records), (moved, moved_records) = runs
    assert [r.t for r in base_records] == [r.t for r in moved_records]
    for a, b in zip(base_records, moved_records):
        np.testing.assert_allclose(b.w, a.w, atol=1e-10)
        np.testing.assert_allclose(b.q, a.q, atol=1e-10)
    np.testing.assert_allclose(moved.w, base.w, atol=1e-10)
    np.testing.assert_allclose(moved.q, base.q, atol=1e-10)


def test_risk_minimizer_average_windows(loss):
    geom = PrimalGeometry(dimension=2, radius=1.0)
    mass = FiniteSupportDistribution(atoms=np.array([[1.0, -0.5]]), labels=np.array([1.0]), probs=np.array([1.0]))
    schedule = StepSchedule.single_risk(geom.d_bound, 1.0)
    X, y = mass.atoms, mass.labels

    iterates = [geom.origin()]
    for t in range(1, 51):
        w = iterates[-1]
        iterates.append(mirror_step_primal(geom, w, loss.mean_gradient(w, X, y), schedule.risk_step(0, t)))
    iterates = np.array(iterates)

    def run(**kwargs):
        oracle = FiniteSupportOracle(mass, stream_seed(0, 0, Purpose.STAGE1))
        return run_risk_minimizer(oracle, loss, schedule, geom, 50, plain_average=True, **kwargs).w_bar

    before, after = run(), run(average_after_step=True)
    np.testing.assert_allclose(before, iterates[:50].mean(axis=0), atol=1e-12)
    np.testing.assert_allclose(after, iterates[1:].mean(axis=0), atol=1e-12)
    assert not np.allclose(before, after)
