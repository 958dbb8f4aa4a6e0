import numpy as np
import pytest

from sadf.models import KNearestNeighbors


def brute_force_prediction(X_train, y_train, query, k):
    """Distance-enumeration oracle with the same tie rules: stable order by
    (distance, training index), tied votes resolve to class 0."""
    d2 = ((X_train - query) ** 2).sum(axis=1)
    order = np.argsort(d2, kind="stable")[:k]
    attack = int(y_train[order].sum())
    return 1 if 2 * attack > k else 0


class TestSmallSets:
    def test_k1_returns_stored_label(self):
        X = np.array([[0.0, 0.0], [5.0, 5.0], [9.0, 0.0]])
        y = np.array([0, 1, 0])
        model = KNearestNeighbors(k=1).fit(X, y)
        for row, label in zip(X, y):
            assert model.predict([row])[0] == label

    def test_k3_hand_counted_vote(self):
        X = np.array([[0.0], [1.0], [2.0], [10.0], [11.0]])
        y = np.array([0, 0, 1, 1, 1])
        model = KNearestNeighbors(k=3).fit(X, y)
        # neighbors of 1.5 are {1.0, 2.0, 0.0} -> votes {0, 1, 0} -> 0
        assert model.predict([[1.5]])[0] == 0
        # neighbors of 9 are {10, 11, 2} -> votes {1, 1, 1} -> 1
        assert model.predict([[9.0]])[0] == 1

    def test_k_equals_n_gives_global_majority(self):
        X = np.arange(10, dtype=np.float64).reshape(-1, 1)
        y = np.array([1, 1, 1, 1, 1, 1, 0, 0, 0, 0])
        model = KNearestNeighbors(k=10).fit(X, y)
        assert model.predict([[0.0], [9.0], [100.0]]).tolist() == [1, 1, 1]

    def test_tied_vote_resolves_to_normal(self):
        X = np.array([[0.0], [10.0]])
        y = np.array([0, 1])
        model = KNearestNeighbors(k=2).fit(X, y)
        assert model.predict([[5.0]])[0] == 0

    def test_equal_distances_break_by_training_index(self):
        X = np.array([[-1.0], [1.0], [3.0]])
        y = np.array([1, 0, 0])
        model = KNearestNeighbors(k=1).fit(X, y)
        # query 0 is equidistant from -1 and 1; index 0 wins
        assert model.predict([[0.0]])[0] == 1


class TestOracle:
    @pytest.mark.parametrize("seed", [0, 1, 2])
    @pytest.mark.parametrize("k", [1, 3, 5])
    def test_matches_brute_force_enumeration(self, seed, k):
        rng = np.random.default_rng(seed)
        X_train = rng.normal(size=(20, 3))
        y_train = rng.integers(0, 2, size=20).astype(np.int64)
        model = KNearestNeighbors(k=k).fit(X_train, y_train)
        queries = rng.normal(size=(30, 3))
        predictions = model.predict(queries)
        for query, predicted in zip(queries, predictions):
            assert predicted == brute_force_prediction(X_train, y_train, query, k)

    def test_blockwise_prediction_matches_single_block(self):
        rng = np.random.default_rng(4)
        X_train = rng.normal(size=(50, 4))
        y_train = rng.integers(0, 2, size=50).astype(np.int64)
        queries = rng.normal(size=(97, 4))
        small = KNearestNeighbors(k=5, block_size=8).fit(X_train, y_train)
        large = KNearestNeighbors(k=5, block_size=4096).fit(X_train, y_train)
        assert np.array_equal(small.predict(queries), large.predict(queries))


class TestProperties:
    def test_k1_training_accuracy_on_duplicate_free_data(self):
        rng = np.random.default_rng(6)
        X = rng.normal(size=(40, 3))
        assert len(np.unique(X, axis=0)) == len(X)
        y = rng.integers(0, 2, size=40).astype(np.int64)
        model = KNearestNeighbors(k=1).fit(X, y)
        assert (model.predict(X) == y).all()

    def test_k_validated_against_training_size(self):
        X = np.zeros((3, 2))
        y = np.array([0, 1, 0])
        with pytest.raises(ValueError):
            KNearestNeighbors(k=4).fit(X, y)
        with pytest.raises(ValueError):
            KNearestNeighbors(k=0).fit(X, y)
