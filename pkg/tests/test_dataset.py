import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.data_pipeline import (
    SPHERE_2D,
    ContextInstance,
    Dataset,
    Normalizer,
    check_context,
    dumps_dataset,
    load_split,
    loads_dataset,
    read_dataset,
    registry_dims,
    sample_batch,
    save_split,
    split_by_environment,
)
from src.errors import ContextTypeError, EmptyDatasetError, NormalizationRangeError, SerializationError, SplitError
from src.geometry import planar_arm, point_robot

from tests.conftest import build_straight_line_dataset

unit = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(unit, unit), min_size=2, max_size=16))
def test_trajectory_normalization_round_trips(points):
    normalizer = Normalizer.fit(point_robot())
    trajectory = np.array(points)
    normalized = normalizer.normalize_trajectory(trajectory)
    assert np.all(np.abs(normalized) <= 1.0)
    np.testing.assert_allclose(normalizer.denormalize_trajectory(normalized), trajectory, atol=1e-12)


@settings(max_examples=100, deadline=None)
@given(unit, unit, st.floats(min_value=0.01, max_value=0.15))
def test_context_normalization_round_trips(x, y, r):
    normalizer = Normalizer.fit(point_robot(), radius_max=0.15)
    context = (ContextInstance(SPHERE_2D, (x, y, r)),)
    restored = normalizer.denormalize_context(normalizer.normalize_context(context))
    np.testing.assert_allclose(restored[0].params, (x, y, r), atol=1e-12)


def test_arm_configurations_normalize_from_joint_limits():
    normalizer = Normalizer.fit(planar_arm())
    np.testing.assert_allclose(normalizer.normalize_trajectory(np.array([[-np.pi, 0.0], [np.pi, np.pi / 2]])), [[-1, 0], [1, 0.5]], atol=1e-12)


def test_out_of_range_values_are_rejected():
    normalizer = Normalizer.fit(point_robot())
    with pytest.raises(NormalizationRangeError):
        normalizer.normalize_trajectory(np.array([[0.5, 1.2]]))
    with pytest.raises(ContextTypeError):
        normalizer.normalize_context((ContextInstance(7, (0.1, 0.2, 0.3)),))


def test_context_registry_checks_type_and_dimension():
    registry = registry_dims()
    check_context((ContextInstance(SPHERE_2D, (0.1, 0.2, 0.05)),), registry)
    with pytest.raises(ContextTypeError, match="not registered"):
        check_context((ContextInstance(4, (0.1,)),), registry)
    with pytest.raises(ContextTypeError, match="expected 3 params"):
        check_context((ContextInstance(SPHERE_2D, (0.1, 0.2)),), registry)


def test_dataset_file_preserves_records(tmp_path, dataset_file):
    original = build_straight_line_dataset()
    restored = read_dataset(dataset_file())
    assert len(restored) == len(original)
    assert restored.header == original.header
    for a, b in zip(original.records, restored.records):
        np.testing.assert_array_equal(a.trajectory, b.trajectory)
        assert (a.context, a.env_id, a.problem_id, a.seed) == (b.context, b.env_id, b.problem_id, b.seed)
    assert dumps_dataset(restored) == dumps_dataset(original)


def test_corrupt_dataset_files_are_rejected(straight_line_dataset):
    blob = dumps_dataset(straight_line_dataset)
    with pytest.raises(SerializationError, match="magic"):
        loads_dataset(b"NOTDATA" + blob[7:])
    with pytest.raises(SerializationError, match="truncated"):
        loads_dataset(blob[:-5])
    with pytest.raises(SerializationError, match="trailing"):
        loads_dataset(blob + b"\x00")
    with pytest.raises(SerializationError, match="not found"):
        read_dataset("does/not/exist.campd")


def test_dataset_exposes_environments_and_problems(straight_line_dataset):
    dataset = straight_line_dataset
    assert dataset.env_ids() == [0, 1, 2]
    problems = dataset.problems()
    assert [p.problem_id for p in problems] == [0, 0, 0]
    assert problems[1].environment == dataset.environment(1)
    subset = dataset.subset([2])
    assert subset.env_ids() == [2]
    assert {r.env_id for r in subset.records} == {2}


def test_batches_are_seeded_draws_with_replacement(straight_line_dataset):
    first = sample_batch(straight_line_dataset, 32, seed=4)
    second = sample_batch(straight_line_dataset, 32, seed=4)
    assert len(first) == 32
    assert [r.seed for r in first] == [r.seed for r in second]
    empty = Dataset(straight_line_dataset.header, [])
    with pytest.raises(EmptyDatasetError):
        sample_batch(empty, 4, seed=0)


def test_batch_draws_are_uniform_over_records():
    dataset = build_straight_line_dataset(n_envs=2, records_per_env=5)
    position = {id(record): i for i, record in enumerate(dataset.records)}
    draws = 100_000
    counts = np.bincount([position[id(r)] for r in sample_batch(dataset, draws, seed=0)], minlength=10)
    p = 1 / len(dataset)
    sigma = np.sqrt(draws * p * (1 - p))
    assert counts.sum() == draws
    assert np.all(np.abs(counts - draws * p) < 3 * sigma), counts


def test_environment_split_is_disjoint_and_complete(tmp_path):
    dataset = build_straight_line_dataset(n_envs=10, records_per_env=1)
    train, test = split_by_environment(dataset, 0.2, seed=1)
    assert len(test.env_ids()) == 2
    assert set(train.env_ids()).isdisjoint(test.env_ids())
    assert sorted(train.env_ids() + test.env_ids()) == dataset.env_ids()
    path = save_split(tmp_path / "split.json", train, test, seed=1, test_fraction=0.2)
    assert load_split(path) == {"train_env_ids": train.env_ids(), "test_env_ids": test.env_ids()}


def test_split_errors(tmp_path):
    with pytest.raises(SplitError):
        split_by_environment(build_straight_line_dataset(n_envs=1), 0.5, seed=0)
    with pytest.raises(SplitError):
        split_by_environment(build_straight_line_dataset(n_envs=3), 1.0, seed=0)
    overlapping = tmp_path / "split.json"
    overlapping.write_text(json.dumps({"train_env_ids": [0, 1], "test_env_ids": [1]}))
    with pytest.raises(SplitError, match="both splits"):
        load_split(overlapping)
