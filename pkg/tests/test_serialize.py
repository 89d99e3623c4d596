import json

import numpy as np
import pytest

from loewner.errors import SchemaError
from loewner.linalg import GradedSpace
from loewner.certify import sampled_function
from loewner.realize import (
    discrete_measure,
    reduce_to_cauchy,
    synthesize_selfadjoint,
    transfer_realization,
)
from loewner.serialize import (
    canonical_dumps,
    doc_to_measure,
    doc_to_realization,
    doc_to_sampled_function,
    load_realization,
    load_sampled_function,
    measure_to_doc,
    realization_to_doc,
    sampled_function_to_doc,
    save_realization,
    save_sampled_function,
    write_json,
)


def _product_transfer():
    g = GradedSpace((1, 1))
    return transfer_realization(
        0.0, np.array([0.0, 1.0]), np.array([1.0, 0.0]),
        np.array([[0.0, 0.0], [1.0, 0.0]]), g, unitary_flag=True)


class TestCanonicalEmitter:
    def test_sorted_keys_and_compact_layout(self):
        assert canonical_dumps({"b": 1, "a": 2}) == '{"a":2,"b":1}'

    def test_seventeen_digit_floats_round_trip(self):
        x = 0.1 + 0.2
        text = canonical_dumps(x)
        assert float(text) == x

    def test_negative_zero_normalized(self):
        assert canonical_dumps(-0.0) == "0"
        assert canonical_dumps([-0.0, 0.0]) == "[0,0]"

    def test_complex_becomes_pair(self):
        assert canonical_dumps(1 + 2j) == "[1,2]"

    def test_numpy_scalars_and_arrays(self):
        assert canonical_dumps(np.float64(1.5)) == "1.5"
        assert canonical_dumps(np.int64(3)) == "3"
        assert canonical_dumps(np.array([1.0, 2.0])) == "[1,2]"

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            canonical_dumps(float("inf"))
        with pytest.raises(ValueError):
            canonical_dumps({"x": float("nan")})

    def test_output_is_valid_json(self):
        doc = {"a": [1.5, -2.0], "b": {"c": True, "d": None}, "e": "text"}
        assert json.loads(canonical_dumps(doc)) == doc


class TestSampledFunctionDocs:
    def test_minimal_single_node_round_trip(self, tmp_path):
        sf = sampled_function([[0.5]], [1.0], [[2.0]])
        path = tmp_path / "f.json"
        save_sampled_function(path, sf)
        sf2 = load_sampled_function(path)
        assert sf2.n == 1 and sf2.d == 1
        save_sampled_function(tmp_path / "g.json", sf2)
        assert (tmp_path / "f.json").read_bytes() == (tmp_path / "g.json").read_bytes()

    def test_missing_key_pointer(self):
        with pytest.raises(SchemaError) as err:
            doc_to_sampled_function({"d": 1, "nodes": [{"x": [1.0], "f": 2.0}]})
        assert err.value.pointer == "/nodes/0"

    def test_wrong_gradient_length_pointer(self):
        with pytest.raises(SchemaError) as err:
            doc_to_sampled_function(
                {"d": 2, "nodes": [{"x": [1.0, 2.0], "f": 2.0, "grad": [1.0]}]})
        assert err.value.pointer == "/nodes/0/grad"

    def test_unknown_key_rejected(self):
        with pytest.raises(SchemaError) as err:
            doc_to_sampled_function({"d": 1, "nodes": [], "extra": 1})
        assert err.value.pointer == "/extra"

    def test_coincident_nodes_surface_as_schema_error(self):
        doc = {"d": 1, "nodes": [
            {"x": [1.0], "f": 0.0, "grad": [1.0]},
            {"x": [1.0], "f": 0.0, "grad": [1.0]},
        ]}
        with pytest.raises(SchemaError):
            doc_to_sampled_function(doc)


class TestRealizationDocs:
    def test_transfer_round_trip_with_unitary_validation(self, tmp_path):
        tr = _product_transfer()
        path = tmp_path / "tr.json"
        save_realization(path, tr)
        tr2 = load_realization(path)
        assert tr2.unitary_flag
        save_realization(tmp_path / "tr2.json", tr2)
        assert (tmp_path / "tr.json").read_bytes() == (tmp_path / "tr2.json").read_bytes()

    def test_false_unitary_flag_rejected(self):
        doc = realization_to_doc(_product_transfer())
        doc["D"][1][0] = [0.5, 0.0]  # no longer the cyclic block
        with pytest.raises(SchemaError):
            doc_to_realization(doc)

    def test_corrupt_complex_entry_pointer(self):
        doc = realization_to_doc(_product_transfer())
        doc["gamma"][1] = [1]
        with pytest.raises(SchemaError) as err:
            doc_to_realization(doc)
        assert err.value.pointer == "/gamma/1"

    def test_selfadjoint_and_cauchy_round_trip(self, tmp_path):
        tr = _product_transfer()
        sr = synthesize_selfadjoint(tr, np.array([1j, 1j]), tau=1j)
        cr = reduce_to_cauchy(sr)
        for name, r in (("sr", sr), ("cr", cr)):
            p1 = tmp_path / f"{name}1.json"
            p2 = tmp_path / f"{name}2.json"
            save_realization(p1, r)
            save_realization(p2, load_realization(p1))
            assert p1.read_bytes() == p2.read_bytes()

    def test_non_hermitian_generator_rejected(self):
        tr = _product_transfer()
        sr = synthesize_selfadjoint(tr, np.array([1j, 1j]), tau=1j)
        doc = realization_to_doc(sr)
        doc["X"][0][1] = [5.0, 0.0]
        with pytest.raises(SchemaError) as err:
            doc_to_realization(doc)
        assert err.value.pointer == "/X"

    def test_unknown_kind(self):
        with pytest.raises(SchemaError) as err:
            doc_to_realization({"kind": "other", "grading": [1]})
        assert err.value.pointer == "/kind"

    def test_semantically_equal_docs_serialize_identically(self):
        # build the same realization twice through different dtypes
        g = GradedSpace((1, 1))
        tr1 = transfer_realization(0, [0, 1], [1, 0],
                                   [[0, 0], [1, 0]], g, unitary_flag=True)
        tr2 = _product_transfer()
        assert canonical_dumps(realization_to_doc(tr1)) == \
            canonical_dumps(realization_to_doc(tr2))


class TestMeasureDocs:
    def test_round_trip(self, tmp_path):
        dm = discrete_measure("line", [0.5, -1.5], [1.0, 0.125])
        d1 = measure_to_doc(dm)
        dm2 = doc_to_measure(d1)
        assert canonical_dumps(measure_to_doc(dm2)) == canonical_dumps(d1)

    def test_circle_uses_theta_key(self):
        dm = discrete_measure("circle", [0.5], [1.0])
        doc = measure_to_doc(dm)
        assert "theta" in doc["atoms"][0]
        with pytest.raises(SchemaError) as err:
            doc_to_measure({"support": "circle",
                            "atoms": [{"loc": 0.5, "mass": 1.0}]})
        assert err.value.pointer == "/atoms/0"

    def test_nonpositive_mass_pointer(self):
        with pytest.raises(SchemaError) as err:
            doc_to_measure({"support": "line",
                            "atoms": [{"loc": 0.0, "mass": 0.0}]})
        assert err.value.pointer == "/atoms/0/mass"


def test_write_json_appends_newline(tmp_path):
    path = tmp_path / "x.json"
    write_json(path, {"a": 1})
    assert path.read_text() == '{"a":1}\n'
