import json
import warnings

import numpy as np
import pytest

from eafd.dataset import (
    DataError,
    Dataset,
    EventSchema,
    EventSequence,
    FieldSpec,
    IngestError,
    MISSING_CATEGORY,
    import_embeddings,
    import_labels,
    ingest_events,
    load_store,
    save_store,
    split_folds,
    write_embeddings_csv,
)

SCHEMA_DOC = {
    "timestamp_field": "ts",
    "fields": [
        {"name": "mcc", "kind": "categorical"},
        {"name": "amount", "kind": "numeric"},
    ],
    "vocabularies": {"mcc": ["5411"]},
}


@pytest.fixture
def schema_path(tmp_path):
    p = tmp_path / "schema.json"
    p.write_text(json.dumps(SCHEMA_DOC))
    return p


def write_events(tmp_path, lines):
    p = tmp_path / "events.jsonl"
    p.write_text("\n".join(json.dumps(e) for e in lines) + "\n")
    return p


def test_ingest_groups_and_sorts_by_id(tmp_path, schema_path):
    events = [
        {"sequence_id": "b", "ts": 5.0, "mcc": "5411", "amount": 1.0},
        {"sequence_id": "a", "ts": 2.0, "mcc": "7832", "amount": 2.0},
        {"sequence_id": "a", "ts": 1.0, "mcc": "5411", "amount": 3.0},
    ]
    ds = ingest_events(write_events(tmp_path, events), schema_path)
    assert ds.sequence_ids == ["a", "b"]
    assert len(ds.sequences[0]) == 2 and len(ds.sequences[1]) == 1
    # unseen category appended in first-seen order
    assert ds.schema.vocabulary("mcc") == ("5411", "7832")
    # a's events sorted by timestamp
    np.testing.assert_array_equal(ds.sequences[0].timestamps, [1.0, 2.0])


def test_ingest_stable_tie_break(tmp_path, schema_path):
    events = [
        {"sequence_id": "a", "ts": 7.0, "amount": 5.0},
        {"sequence_id": "a", "ts": 7.0, "amount": 7.0},
    ]
    ds = ingest_events(write_events(tmp_path, events), schema_path)
    np.testing.assert_array_equal(ds.sequences[0].numeric["amount"], [5.0, 7.0])


def test_ingest_rejects_nan_timestamp_with_line_number(tmp_path, schema_path):
    events_path = tmp_path / "events.jsonl"
    events_path.write_text(
        json.dumps({"sequence_id": "a", "ts": 1.0, "amount": 1.0})
        + "\n"
        + '{"sequence_id": "a", "ts": NaN, "amount": 2.0}\n'
    )
    with pytest.raises(IngestError, match="line 2"):
        ingest_events(events_path, schema_path)


def test_ingest_rejects_unknown_field(tmp_path, schema_path):
    events = [{"sequence_id": "a", "ts": 1.0, "amout": 3.0}]
    with pytest.raises(IngestError, match="unknown field"):
        ingest_events(write_events(tmp_path, events), schema_path)


def test_ingest_rejects_malformed_line(tmp_path, schema_path):
    p = tmp_path / "events.jsonl"
    p.write_text('{"sequence_id": "a", "ts": 1.0}\nnot json at all\n')
    with pytest.raises(IngestError, match="line 2"):
        ingest_events(p, schema_path)


def test_ingest_missing_values_roundtrip(tmp_path, schema_path):
    events = [
        {"sequence_id": "a", "ts": 1.0, "amount": None},
        {"sequence_id": "a", "ts": 2.0, "mcc": "5411"},
    ]
    ds = ingest_events(write_events(tmp_path, events), schema_path)
    seq = ds.sequences[0]
    assert np.isnan(seq.numeric["amount"][0]) and np.isnan(seq.numeric["amount"][1])
    assert seq.categorical["mcc"][0] == MISSING_CATEGORY
    assert seq.categorical["mcc"][1] == 0


def test_ingest_idempotent(tmp_path, schema_path):
    events = [
        {"sequence_id": "u2", "ts": 3.0, "mcc": "x", "amount": 1.5},
        {"sequence_id": "u1", "ts": 1.0, "mcc": "y", "amount": 2.5},
        {"sequence_id": "u1", "ts": 1.0, "mcc": "x", "amount": 3.5},
    ]
    ds1 = ingest_events(write_events(tmp_path, events), schema_path)

    # re-serialize ds1 and ingest again
    lines = []
    for seq in ds1.sequences:
        vocab = ds1.schema.vocabulary("mcc")
        for i in range(len(seq)):
            rec = {"sequence_id": seq.sequence_id, "ts": seq.timestamps[i]}
            if seq.categorical["mcc"][i] != MISSING_CATEGORY:
                rec["mcc"] = vocab[seq.categorical["mcc"][i]]
            if not np.isnan(seq.numeric["amount"][i]):
                rec["amount"] = seq.numeric["amount"][i]
            lines.append(rec)
    p2 = tmp_path / "events2.jsonl"
    p2.write_text("\n".join(json.dumps(e) for e in lines) + "\n")
    schema2 = tmp_path / "schema2.json"
    schema2.write_text(json.dumps(ds1.schema.to_json()))
    ds2 = ingest_events(p2, schema2)

    assert ds1.sequence_ids == ds2.sequence_ids
    assert ds1.schema == ds2.schema
    for s1, s2 in zip(ds1.sequences, ds2.sequences):
        np.testing.assert_array_equal(s1.timestamps, s2.timestamps)
        np.testing.assert_array_equal(s1.categorical["mcc"], s2.categorical["mcc"])
        np.testing.assert_array_equal(s1.numeric["amount"], s2.numeric["amount"])


def _tiny_dataset(tmp_path, schema_path, ids=("a", "b")):
    events = [
        {"sequence_id": i, "ts": float(k), "mcc": "5411", "amount": float(k)}
        for i in ids
        for k in range(3)
    ]
    return ingest_events(write_events(tmp_path, events), schema_path)


def test_import_embeddings_aligns_rows(tmp_path, schema_path):
    ds = _tiny_dataset(tmp_path, schema_path)
    csv_path = tmp_path / "emb.csv"
    csv_path.write_text("id,e0,e1,e2\nb,4.0,5.0,6.0\na,1.0,2.0,3.0\n")
    ds2 = import_embeddings(ds, csv_path)
    np.testing.assert_array_equal(ds2.embeddings.rows, [[1, 2, 3], [4, 5, 6]])
    assert ds2.embeddings.dim == 3


def test_import_embeddings_duplicate_id(tmp_path, schema_path):
    ds = _tiny_dataset(tmp_path, schema_path)
    csv_path = tmp_path / "emb.csv"
    csv_path.write_text("id,e0\na,1.0\na,2.0\nb,3.0\n")
    with pytest.raises(IngestError, match="duplicate embedding id"):
        import_embeddings(ds, csv_path)


def test_import_embeddings_rejects_inf(tmp_path, schema_path):
    ds = _tiny_dataset(tmp_path, schema_path)
    csv_path = tmp_path / "emb.csv"
    csv_path.write_text("id,e0\na,inf\nb,3.0\n")
    with pytest.raises(IngestError, match="non-finite"):
        import_embeddings(ds, csv_path)


def test_import_embeddings_drops_extra_ids_with_warning(tmp_path, schema_path):
    ds = _tiny_dataset(tmp_path, schema_path)
    csv_path = tmp_path / "emb.csv"
    csv_path.write_text("id,e0\na,1.0\nb,2.0\nzz,3.0\n")
    with pytest.warns(UserWarning, match="dropped 1 extra"):
        ds2 = import_embeddings(ds, csv_path)
    assert ds2.embeddings.n == 2


def test_embedding_export_roundtrip_bit_exact(tmp_path, schema_path):
    ds = _tiny_dataset(tmp_path, schema_path)
    rng = np.random.default_rng(0)
    rows = rng.standard_normal((2, 5)) * 1e-3
    csv_path = tmp_path / "emb.csv"
    write_embeddings_csv(ds.sequence_ids, rows, csv_path)
    ds2 = import_embeddings(ds, csv_path)
    out_path = tmp_path / "emb_out.csv"
    write_embeddings_csv(ds2.sequence_ids, ds2.embeddings.rows, out_path)
    assert out_path.read_bytes() == csv_path.read_bytes()
    np.testing.assert_array_equal(ds2.embeddings.rows, rows)


def test_import_labels_kinds(tmp_path, schema_path):
    ds = _tiny_dataset(tmp_path, schema_path)
    csv_path = tmp_path / "labels.csv"
    csv_path.write_text("id,churn,spend\na,1,10.5\nb,0,-3.25\n")
    ds2 = import_labels(ds, csv_path)
    assert ds2.labels["churn"].kind == "binary"
    assert ds2.labels["spend"].kind == "regression"


def test_store_roundtrip(tmp_path, schema_path):
    ds = _tiny_dataset(tmp_path, schema_path, ids=("a", "b", "c"))
    labels = tmp_path / "labels.csv"
    labels.write_text("id,churn\na,1\nb,0\nc,1\n")
    emb = tmp_path / "emb.csv"
    emb.write_text("id,e0,e1\na,0.25,1.5\nb,-2.0,0.125\nc,3.5,-0.75\n")
    ds = import_labels(ds, labels)
    ds = import_embeddings(ds, emb)

    store = tmp_path / "store"
    save_store(ds, store)
    back = load_store(store)
    assert back.sequence_ids == ds.sequence_ids
    assert back.schema == ds.schema
    for s1, s2 in zip(ds.sequences, back.sequences):
        np.testing.assert_array_equal(s1.timestamps, s2.timestamps)
        np.testing.assert_array_equal(s1.categorical["mcc"], s2.categorical["mcc"])
        np.testing.assert_array_equal(s1.numeric["amount"], s2.numeric["amount"])
    np.testing.assert_array_equal(back.embeddings.rows, ds.embeddings.rows)
    assert back.labels["churn"].kind == "binary"
    np.testing.assert_array_equal(back.labels["churn"].values, ds.labels["churn"].values)


def test_sequence_rejects_unsorted_timestamps():
    with pytest.raises(DataError, match="not sorted"):
        EventSequence("x", np.array([2.0, 1.0]), {}, {})


def test_dataset_is_immutable():
    schema = EventSchema("ts", (FieldSpec("v", "numeric"),))
    seq = EventSequence("a", np.array([1.0]), {}, {"v": np.array([2.0])})
    ds = Dataset(schema, (seq,))
    with pytest.raises(ValueError):
        ds.sequences[0].timestamps[0] = 99.0


# --- folds -------------------------------------------------------------------


def _label_dataset(n, values, kind="binary"):
    from eafd.dataset import TargetLabels

    schema = EventSchema("ts", (FieldSpec("v", "numeric"),))
    seqs = tuple(
        EventSequence(f"u{i:04d}", np.array([0.0]), {}, {"v": np.array([0.0])}) for i in range(n)
    )
    return Dataset(schema, seqs, {"y": TargetLabels(kind, np.asarray(values, float))})


def test_folds_exact_stratification():
    ds = _label_dataset(100, [0, 1] * 50)
    plan = split_folds(ds, "y", k=5, seed=3)
    for f in range(5):
        rows = plan.test_rows(f)
        y = ds.labels["y"].values[rows]
        assert rows.size == 20
        assert (y == 1).sum() == 10 and (y == 0).sum() == 10
    assert plan.stratified


def test_folds_deterministic():
    ds = _label_dataset(60, [0, 1, 2] * 20, kind="multiclass")
    a = split_folds(ds, "y", k=4, seed=9)
    b = split_folds(ds, "y", k=4, seed=9)
    np.testing.assert_array_equal(a.assignments, b.assignments)
    assert a.digest() == b.digest()
    c = split_folds(ds, "y", k=4, seed=10)
    assert not np.array_equal(a.assignments, c.assignments)


def test_folds_degenerate_class_falls_back_unstratified():
    ds = _label_dataset(10, [0] * 9 + [1])
    with pytest.warns(UserWarning, match="unstratified"):
        plan = split_folds(ds, "y", k=5, seed=0)
    assert not plan.stratified
    assert np.bincount(plan.assignments, minlength=5).min() == 2


def test_folds_require_enough_rows():
    ds = _label_dataset(8, [0, 1] * 4)
    with pytest.raises(DataError):
        split_folds(ds, "y", k=5, seed=0)
