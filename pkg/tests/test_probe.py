import numpy as np
import pytest

from eafd.dataset.folds import split_folds
from eafd.probe import (
    BoostedTreesClassifier,
    BoostedTreesRegressor,
    GbtConfig,
    GbtModel,
    cross_val_loss,
    fit,
    metric_accuracy,
    metric_auc,
    metric_logloss,
    metric_r2,
)


def test_fits_a_line_to_high_r2():
    rng = np.random.default_rng(0)
    X = rng.uniform(-2, 2, size=(500, 1))
    y = 3.0 * X[:, 0]
    model = fit(GbtConfig(), X, y)
    assert metric_r2(y, model.predict(X)) >= 0.99


def test_constant_target_predicts_exactly():
    X = np.arange(80, dtype=float).reshape(-1, 2)
    y = np.full(40, 2.75)
    model = fit(GbtConfig(), X, y)
    np.testing.assert_array_equal(model.predict(X), np.full(40, 2.75))


def test_deterministic_tree_dumps():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(200, 4))
    y = X[:, 0] + rng.normal(scale=0.1, size=200)
    a = fit(GbtConfig(n_trees=20), X, y)
    b = fit(GbtConfig(n_trees=20), X, y)
    assert a.dumps() == b.dumps()


def test_too_few_rows_is_an_error():
    X = np.zeros((30, 1))
    y = np.zeros(30)
    with pytest.raises(ValueError, match="at least 40"):
        fit(GbtConfig(min_samples_leaf=20), X, y)


def test_logistic_needs_binary_targets():
    X = np.random.default_rng(0).normal(size=(100, 2))
    with pytest.raises(ValueError, match="0, 1"):
        fit(GbtConfig(loss="logistic"), X, np.linspace(0, 2, 100))


def test_train_loss_curve_non_increasing():
    rng = np.random.default_rng(2)
    X = rng.normal(size=(300, 3))
    y = (X[:, 0] + 0.3 * rng.normal(size=300) > 0).astype(float)
    model = fit(GbtConfig(loss="logistic", n_trees=60), X, y)
    curve = model.train_loss_curve
    assert curve.size == 61
    assert np.all(np.diff(curve) <= 1e-12)


def test_row_permutation_leaves_predictions_unchanged():
    rng = np.random.default_rng(3)
    X = rng.normal(size=(250, 3))
    X[rng.random(X.shape) < 0.1] = np.nan
    y = np.where(np.isnan(X[:, 0]), 0.5, X[:, 0]) + rng.normal(scale=0.2, size=250)
    perm = rng.permutation(250)
    a = fit(GbtConfig(n_trees=25), X, y)
    b = fit(GbtConfig(n_trees=25), X[perm], y[perm])
    queries = rng.normal(size=(50, 3))
    np.testing.assert_array_equal(a.predict(queries), b.predict(queries))
    assert a.dumps() == b.dumps()


def test_duplicated_column_is_inert():
    rng = np.random.default_rng(4)
    X = rng.normal(size=(300, 3))
    y = X[:, 1] - 0.5 * X[:, 2] + rng.normal(scale=0.1, size=300)
    Xdup = np.column_stack([X, X[:, 1]])
    a = fit(GbtConfig(n_trees=30), X, y)
    b = fit(GbtConfig(n_trees=30), Xdup, y)
    queries = rng.normal(size=(40, 3))
    np.testing.assert_array_equal(a.predict(queries), b.predict(np.column_stack([queries, queries[:, 1]])))
    assert b.split_gain_totals()[3] == 0.0


def test_missing_values_route_by_learned_flag():
    rng = np.random.default_rng(5)
    n = 400
    x = rng.normal(size=n)
    x[rng.random(n) < 0.3] = np.nan
    # missing rows behave like large x: the model must learn to route them right
    y = np.where(np.isnan(x), 2.0, np.where(x > 0, 1.0, -1.0))
    model = fit(GbtConfig(n_trees=40), x.reshape(-1, 1), y)
    pred_missing = model.predict(np.array([[np.nan]]))[0]
    assert pred_missing > 1.5


def test_model_json_roundtrip():
    rng = np.random.default_rng(6)
    X = rng.normal(size=(120, 2))
    y = (X[:, 0] > 0).astype(float)
    model = fit(GbtConfig(loss="logistic", n_trees=10), X, y)
    back = GbtModel.loads(model.dumps())
    np.testing.assert_array_equal(model.predict(X), back.predict(X))
    assert back.dumps() == model.dumps()


def test_zero_feature_matrix_gives_base_score():
    y = np.linspace(0, 1, 60)
    model = fit(GbtConfig(n_trees=5), np.empty((60, 0)), y)
    np.testing.assert_allclose(model.predict(np.empty((60, 0))), y.mean())


# --- metrics ------------------------------------------------------------------


def test_r2_examples():
    assert metric_r2([1, 2, 3], [1, 2, 3]) == 1.0
    y = np.array([1.0, 2.0, 3.0])
    assert metric_r2(y, np.full(3, y.mean())) == 0.0
    assert metric_r2([1, 2, 3], [1, 2, 2]) == pytest.approx(0.5)


def test_r2_zero_variance_rules():
    assert metric_r2([2, 2, 2], [2, 2, 2]) == 1.0
    assert metric_r2([2, 2, 2], [2, 2, 3]) == 0.0


def test_auc_examples():
    assert metric_auc([0, 0, 1, 1], [0.1, 0.2, 0.8, 0.9]) == 1.0
    assert metric_auc([0, 1, 0, 1], [0.5, 0.5, 0.5, 0.5]) == 0.5
    assert metric_auc([0, 1, 1, 0], [0.1, 0.9, 0.8, 0.4]) == 1.0


def test_auc_invariant_under_monotone_transform():
    rng = np.random.default_rng(7)
    y = rng.integers(0, 2, 200).astype(float)
    s = rng.normal(size=200)
    a = metric_auc(y, s)
    b = metric_auc(y, np.exp(s) * 3 + 1)
    assert a == pytest.approx(b, abs=1e-12)


def test_auc_single_class_errors():
    with pytest.raises(ValueError, match="both classes"):
        metric_auc([1, 1, 1], [0.1, 0.5, 0.9])


# --- cross validation ---------------------------------------------------------


def test_null_logloss_near_ln2():
    losses = []
    for seed in range(20):
        rng = np.random.default_rng(seed)
        n = 400
        X = rng.normal(size=(n, 4))
        y = rng.integers(0, 2, n).astype(float)
        plan = split_folds(y, "binary", k=5, seed=seed)
        mean_loss, per_fold = cross_val_loss(GbtConfig(), X, y, plan, kind="binary")
        assert per_fold.shape == (5,)
        losses.append(mean_loss)
    assert abs(np.mean(losses) - np.log(2)) < 0.1


def test_duplicate_column_gives_identical_cv_losses():
    rng = np.random.default_rng(8)
    n = 300
    X = rng.normal(size=(n, 3))
    y = X[:, 0] + rng.normal(scale=0.3, size=n)
    plan = split_folds(y, None, k=5, seed=0)
    _, base = cross_val_loss(GbtConfig(n_trees=20), X, y, plan)
    _, dup = cross_val_loss(GbtConfig(n_trees=20), np.column_stack([X, X[:, 0]]), y, plan)
    np.testing.assert_array_equal(base, dup)


def test_regression_zero_target_gives_zero_mae():
    rng = np.random.default_rng(9)
    X = rng.normal(size=(200, 2))
    y = np.zeros(200)
    plan = split_folds(y, None, k=4, seed=1)
    mean_loss, _ = cross_val_loss(GbtConfig(n_trees=10), X, y, plan)
    assert mean_loss == 0.0


def test_cv_workers_do_not_change_result():
    rng = np.random.default_rng(10)
    n = 240
    X = rng.normal(size=(n, 3))
    y = (X[:, 0] > 0).astype(float)
    plan = split_folds(y, "binary", k=4, seed=2)
    a, pa = cross_val_loss(GbtConfig(n_trees=15), X, y, plan, kind="binary", workers=1)
    b, pb = cross_val_loss(GbtConfig(n_trees=15), X, y, plan, kind="binary", workers=8)
    assert a == b
    np.testing.assert_array_equal(pa, pb)


def test_multiclass_cv_runs():
    rng = np.random.default_rng(11)
    n = 300
    X = rng.normal(size=(n, 3))
    y = np.argmax(X, axis=1).astype(float)
    plan = split_folds(y, "multiclass", k=4, seed=3)
    loss, _ = cross_val_loss(GbtConfig(n_trees=20), X, y, plan, kind="multiclass")
    assert loss < np.log(3)  # beats the uniform predictor


# --- sklearn surface -----------------------------------------------------------


def test_estimator_get_set_params_clone():
    from sklearn.base import clone

    est = BoostedTreesRegressor(n_trees=7, max_depth=2)
    params = est.get_params()
    assert params["n_trees"] == 7 and params["max_depth"] == 2
    est2 = clone(est).set_params(n_trees=9)
    assert est2.get_params()["n_trees"] == 9

    rng = np.random.default_rng(12)
    X = rng.normal(size=(100, 2))
    y = X[:, 0]
    est.fit(X, y)
    assert est.model_.n_features == 2
    assert metric_r2(y, est.predict(X)) > 0.5


def test_classifier_proba_shape():
    rng = np.random.default_rng(13)
    X = rng.normal(size=(150, 2))
    y = (X.sum(axis=1) > 0).astype(float)
    clf = BoostedTreesClassifier(n_trees=20).fit(X, y)
    proba = clf.predict_proba(X)
    assert proba.shape == (150, 2)
    np.testing.assert_allclose(proba.sum(axis=1), 1.0)
    assert metric_accuracy(y, clf.predict(X)) > 0.9
