import numpy as np
import pytest

from src.data_pipeline import EMPTY_CONTEXT
from src.diffusion import build_schedule
from src.errors import ConfigError, EmptyDatasetError, TrainingDivergedError
from src.models import build_model, load_checkpoint, resolve_model_config
from src.tensor import Adam
from src.training import assemble_batch, batch_loss, train_loop, train_step
from tests.conftest import build_straight_line_dataset

TINY = resolve_model_config("tiny", {"t_train": 10})
SCHEDULE = build_schedule("cosine", 10)


def test_endpoints_are_clean_and_their_targets_zero(straight_line_dataset):
    batch = assemble_batch(straight_line_dataset.records, SCHEDULE, 0.2, np.random.default_rng(0))
    np.testing.assert_array_equal(batch.tau_t[:, 0], batch.tau_0[:, 0])
    np.testing.assert_array_equal(batch.tau_t[:, -1], batch.tau_0[:, -1])
    assert not batch.target[:, 0].any() and not batch.target[:, -1].any()
    assert batch.target[:, 1:-1].any()
    assert batch.t.min() >= 1 and batch.t.max() <= SCHEDULE.T


def test_context_dropout_rate_matches_probability(straight_line_dataset):
    records = straight_line_dataset.records[:1] * 10_000
    batch = assemble_batch(records, SCHEDULE, 0.33, np.random.default_rng(1))
    sigma = np.sqrt(0.33 * 0.67 / len(records))
    assert abs(batch.dropped.mean() - 0.33) < 3 * sigma
    assert all(c == EMPTY_CONTEXT for c, d in zip(batch.contexts, batch.dropped) if d)
    assert all(c == records[0].context for c, d in zip(batch.contexts, batch.dropped) if not d)


def test_assemble_batch_rejects_bad_input(straight_line_dataset):
    with pytest.raises(EmptyDatasetError):
        assemble_batch([], SCHEDULE, 0.1, np.random.default_rng(0))
    with pytest.raises(ConfigError):
        assemble_batch(straight_line_dataset.records, SCHEDULE, 1.5, np.random.default_rng(0))


def test_first_loss_of_zero_headed_model_is_target_energy(straight_line_dataset):
    model = build_model(TINY, seed=3)
    batch = assemble_batch(straight_line_dataset.records, SCHEDULE, 0.0, np.random.default_rng(2))
    result = train_step(model, Adam(model.named_parameters(), lr=1e-3), batch)
    assert result.loss == pytest.approx(float(np.mean(batch.target**2)), rel=1e-12)
    assert result.grad_norm > 0
    assert model.head.weight.data.any()


def test_non_finite_loss_is_reported(straight_line_dataset):
    model = build_model(TINY)
    model.head.bias.data[...] = np.nan
    batch = assemble_batch(straight_line_dataset.records, SCHEDULE, 0.0, np.random.default_rng(0))
    with pytest.raises(TrainingDivergedError, match="non-finite loss"):
        train_step(model, Adam(model.named_parameters(), lr=1e-3), batch, step=4)


def _train(dataset, out_dir, steps=3, **kwargs):
    return train_loop(
        dataset,
        build_model(TINY, seed=0),
        SCHEDULE,
        steps=steps,
        batch_size=4,
        lr=1e-3,
        p_d=0.1,
        seed=11,
        out_dir=out_dir,
        progress=False,
        **kwargs,
    )


def test_train_loop_rejects_an_empty_step_budget(tmp_path, straight_line_dataset):
    with pytest.raises(ConfigError, match="steps must be >= 1"):
        _train(straight_line_dataset, tmp_path, steps=0)
    assert not (tmp_path / "model.campd").exists()


def test_training_is_deterministic_for_a_seed(tmp_path, straight_line_dataset):
    first = _train(straight_line_dataset, tmp_path / "a")
    second = _train(straight_line_dataset, tmp_path / "b")
    assert first.losses == second.losses
    assert first.loss_log.read_bytes() == second.loss_log.read_bytes()
    assert first.final_checkpoint.read_bytes() == second.final_checkpoint.read_bytes()


def test_loss_log_and_checkpoint_cadence(tmp_path, straight_line_dataset):
    result = _train(straight_line_dataset, tmp_path, steps=4, checkpoint_every=2)
    lines = result.loss_log.read_text().splitlines()
    assert lines[0] == "step,loss"
    assert [line.split(",")[0] for line in lines[1:]] == ["1", "2", "3", "4"]
    assert [p.name for p in result.checkpoints] == ["step_000002.campd", "step_000004.campd"]
    assert result.final_checkpoint == tmp_path / "model.campd"
    assert (tmp_path / "events.jsonl").exists()

    restored = load_checkpoint(result.final_checkpoint)
    record = straight_line_dataset.records[0]
    tau = np.random.default_rng(0).standard_normal((1, TINY.horizon, TINY.d_q))
    reloaded = restored(tau, [record.context], [5]).data
    again = load_checkpoint(result.checkpoints[-1])(tau, [record.context], [5]).data
    np.testing.assert_array_equal(reloaded, again)


@pytest.mark.slow
def test_small_dataset_is_overfit(tmp_path):
    dataset = build_straight_line_dataset(n_envs=2, records_per_env=4)
    result = train_loop(
        dataset,
        build_model(TINY, seed=0),
        SCHEDULE,
        steps=2000,
        batch_size=8,
        lr=1e-3,
        p_d=0.0,
        seed=0,
        out_dir=tmp_path,
        progress=False,
    )
    head = float(np.mean(result.losses[:10]))
    tail = float(np.mean(result.losses[-100:]))
    assert tail < 0.5 * head


def test_batch_loss_is_mean_squared_error(straight_line_dataset):
    model = build_model(TINY, seed=1)
    model.head.bias.data[...] = 0.25
    batch = assemble_batch(straight_line_dataset.records, SCHEDULE, 0.0, np.random.default_rng(5))
    expected = np.mean((0.25 - batch.target) ** 2)
    assert batch_loss(model, batch).item() == pytest.approx(expected, rel=1e-12)
