"""Wire-format round trips, validation errors, and matrix assembly."""

from __future__ import annotations

import json

import numpy as np
import pytest

from polyvote.corpus import DatasetSplit, Example, Label
from polyvote.errors import (
    CompletenessError,
    ConsistencyError,
    DuplicateRecordError,
    EmptyInputError,
    ParseError,
    ReferentialError,
    SchemaError,
)
from polyvote.predictions import (
    PredictionMatrix,
    PredictionRecord,
    assemble_matrix,
    derive_label,
    export_predictions,
    import_predictions,
)


def make_split(n, prefix="ex"):
    return DatasetSplit(
        "dev", tuple(Example(f"{prefix}{i}", f"text {i}", Label(i % 3)) for i in range(n))
    )


def random_records(split, model_ids, seed=0, with_logits=True):
    rng = np.random.default_rng(seed)
    records = []
    for model_id in model_ids:
        for ex in split.examples:
            logits = rng.normal(size=3)
            if with_logits:
                records.append(PredictionRecord.from_logits(ex.id, model_id, logits))
            else:
                records.append(
                    PredictionRecord(ex.id, model_id, Label(int(np.argmax(logits))))
                )
    return records


class TestPredictionRecord:
    def test_derive_label_argmax(self):
        assert derive_label([0.1, 2.0, -1.0]) is Label.PASSIVE_VIOLENCE
        assert derive_label([5.0, 1.0, 5.0]) is Label.NON_VIOLENCE  # tie: lowest index

    def test_from_logits(self):
        record = PredictionRecord.from_logits("e1", "m1", [0.1, 2.0, -1.0])
        assert record.label is Label.PASSIVE_VIOLENCE

    def test_inconsistent_label_rejected(self):
        with pytest.raises(ConsistencyError):
            PredictionRecord("e1", "m1", Label(0), logits=(0.1, 2.0, -1.0))

    def test_non_finite_logits_rejected(self):
        with pytest.raises(ValueError):
            PredictionRecord("e1", "m1", Label(0), logits=(float("inf"), 0.0, 0.0))

    def test_label_only_allowed(self):
        record = PredictionRecord("e1", "m1", Label(2))
        assert record.logits is None


class TestImport:
    def test_round_trip_lossless(self, tmp_path):
        split = make_split(25)
        records = random_records(split, ["m1", "m2"], seed=1)
        path = tmp_path / "preds.jsonl"
        export_predictions(records, path)
        assert import_predictions(path, split) == set(records)

    def test_label_derived_from_logits(self, tmp_path):
        split = make_split(1)
        path = tmp_path / "p.jsonl"
        path.write_text(
            '{"example_id": "ex0", "model_id": "m", "logits": [0.1, 2.0, -1.0]}\n',
            encoding="utf-8",
        )
        (record,) = import_predictions(path, split)
        assert record.label is Label.PASSIVE_VIOLENCE

    def test_label_logits_mismatch(self, tmp_path):
        split = make_split(1)
        path = tmp_path / "p.jsonl"
        path.write_text(
            '{"example_id": "ex0", "model_id": "m", "logits": [0.1, 2.0, -1.0], "label": 0}\n',
            encoding="utf-8",
        )
        with pytest.raises(ConsistencyError):
            import_predictions(path, split)

    def test_unknown_example_id(self, tmp_path):
        split = make_split(2)
        path = tmp_path / "p.jsonl"
        path.write_text(
            '{"example_id": "ex0", "model_id": "m", "label": 1}\n'
            '{"example_id": "ghost", "model_id": "m", "label": 0}\n',
            encoding="utf-8",
        )
        with pytest.raises(ReferentialError, match="ghost"):
            import_predictions(path, split)

    def test_duplicate_cell(self, tmp_path):
        split = make_split(2)
        path = tmp_path / "p.jsonl"
        path.write_text(
            '{"example_id": "ex0", "model_id": "m", "label": 1}\n'
            '{"example_id": "ex0", "model_id": "m", "label": 1}\n',
            encoding="utf-8",
        )
        with pytest.raises(DuplicateRecordError, match="ex0"):
            import_predictions(path, split)

    def test_requires_label_or_logits(self, tmp_path):
        split = make_split(1)
        path = tmp_path / "p.jsonl"
        path.write_text('{"example_id": "ex0", "model_id": "m"}\n', encoding="utf-8")
        with pytest.raises(SchemaError, match="at least one"):
            import_predictions(path, split)

    def test_bad_json_line(self, tmp_path):
        split = make_split(1)
        path = tmp_path / "p.jsonl"
        path.write_text('{"example_id": "ex0", "model_id": "m", "label": 1}\nnot json\n',
                        encoding="utf-8")
        with pytest.raises(ParseError, match="line 2"):
            import_predictions(path, split)

    def test_empty_file(self, tmp_path):
        split = make_split(1)
        path = tmp_path / "p.jsonl"
        path.write_text("", encoding="utf-8")
        with pytest.raises(EmptyInputError):
            import_predictions(path, split)

    def test_bad_label_value(self, tmp_path):
        split = make_split(1)
        path = tmp_path / "p.jsonl"
        path.write_text('{"example_id": "ex0", "model_id": "m", "label": 5}\n', encoding="utf-8")
        with pytest.raises(SchemaError):
            import_predictions(path, split)

    def test_wrong_logit_arity(self, tmp_path):
        split = make_split(1)
        path = tmp_path / "p.jsonl"
        path.write_text(
            '{"example_id": "ex0", "model_id": "m", "logits": [1.0, 2.0]}\n', encoding="utf-8"
        )
        with pytest.raises(SchemaError, match="three"):
            import_predictions(path, split)

    def test_wire_format_is_lf_utf8(self, tmp_path):
        split = make_split(3)
        records = random_records(split, ["m"], seed=2)
        path = tmp_path / "p.jsonl"
        export_predictions(records, path)
        raw = path.read_bytes()
        assert b"\r" not in raw
        assert raw.endswith(b"\n")
        for line in raw.decode("utf-8").splitlines():
            obj = json.loads(line)
            assert set(obj) <= {"example_id", "model_id", "logits", "label"}

    def test_float_precision_survives_round_trip(self, tmp_path):
        split = make_split(1)
        logits = (0.1 + 0.2, -1.0000000000000002e10, 3.141592653589793)
        record = PredictionRecord.from_logits("ex0", "m", logits)
        path = tmp_path / "p.jsonl"
        export_predictions([record], path)
        (loaded,) = import_predictions(path, split)
        assert loaded.logits == record.logits


class TestAssemble:
    def test_full_grid(self):
        split = make_split(2016)
        model_ids = [f"m{i}" for i in range(5)]
        records = random_records(split, model_ids, seed=3)
        matrix = assemble_matrix(records, model_ids, split)
        assert matrix.num_models == 5
        assert matrix.num_examples == 2016
        assert matrix.logits is not None
        assert matrix.labels.shape == (5, 2016)

    def test_missing_cell(self):
        split = make_split(4)
        records = random_records(split, ["m1", "m2"], seed=4)
        removed = records[5]
        remaining = [r for r in records if r is not removed]
        with pytest.raises(CompletenessError, match=removed.model_id):
            assemble_matrix(remaining, ["m1", "m2"], split)

    def test_single_cell(self):
        split = make_split(1)
        records = random_records(split, ["solo"], seed=5)
        matrix = assemble_matrix(records, ["solo"], split)
        assert matrix.labels.shape == (1, 1)

    def test_round_trip_via_records(self):
        split = make_split(30)
        model_ids = ["a", "b", "c"]
        matrix = assemble_matrix(random_records(split, model_ids, seed=6), model_ids, split)
        rebuilt = assemble_matrix(matrix.to_records(), model_ids, split)
        assert rebuilt.model_ids == matrix.model_ids
        assert rebuilt.example_ids == matrix.example_ids
        assert np.array_equal(rebuilt.labels, matrix.labels)
        assert np.array_equal(rebuilt.logits, matrix.logits)

    def test_label_only_records_have_no_logit_grid(self):
        split = make_split(5)
        records = random_records(split, ["m"], seed=7, with_logits=False)
        matrix = assemble_matrix(records, ["m"], split)
        assert matrix.logits is None

    def test_mixed_logit_presence_drops_grid(self):
        split = make_split(3)
        with_logits = random_records(split, ["m"], seed=8)
        no_logits = PredictionRecord("ex0", "m2", Label(1))
        rest = [PredictionRecord(f"ex{i}", "m2", Label(0)) for i in (1, 2)]
        matrix = assemble_matrix(with_logits + [no_logits] + rest, ["m", "m2"], split)
        assert matrix.logits is None

    def test_extra_models_ignored(self):
        split = make_split(3)
        records = random_records(split, ["keep", "drop"], seed=9)
        matrix = assemble_matrix(records, ["keep"], split)
        assert matrix.model_ids == ("keep",)

    def test_duplicate_records_rejected(self):
        split = make_split(2)
        records = random_records(split, ["m"], seed=10)
        with pytest.raises(DuplicateRecordError):
            assemble_matrix(records + [records[0]], ["m"], split)

    def test_matrix_rows_accessible_by_model(self):
        split = make_split(4)
        records = random_records(split, ["x", "y"], seed=11)
        matrix = assemble_matrix(records, ["x", "y"], split)
        np.testing.assert_array_equal(matrix.row("y"), matrix.labels[1])

    def test_matrix_grids_are_read_only(self):
        split = make_split(2)
        matrix = assemble_matrix(random_records(split, ["m"], seed=12), ["m"], split)
        with pytest.raises(ValueError):
            matrix.labels[0, 0] = 2
