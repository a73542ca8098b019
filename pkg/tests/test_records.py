"""
Unit tests for tensor files and record emission
"""

import io
import json
import os
import tempfile
import unittest

import numpy as np
import pandas as pd

from errors import UsageError
from records import (
    RunContext,
    document_from_dict,
    dump_tensor,
    emit,
    load_tensor,
    tensor_from_document,
    tensor_to_dict,
    to_json,
)
from tensor import CoeffTensor, Distribution, Field, littlewood_matrix, random_tensor


class TestTensorDocument(unittest.TestCase):
    """Test cases for the tensor JSON schema"""

    def test_littlewood_document(self):
        """Test a hand-written real document"""
        doc = document_from_dict({"m": 2, "dims": [2, 2], "field": "real", "coeffs": [1, 1, 1, -1]})
        self.assertTrue(tensor_from_document(doc).same_as(littlewood_matrix()))

    def test_complex_pairs(self):
        """Test [re, im] pairs and bare reals in a complex document"""
        doc = document_from_dict({"m": 1, "dims": [2], "field": "complex", "coeffs": [[1, 2], 3]})
        T = tensor_from_document(doc)
        self.assertIs(T.field, Field.COMPLEX)
        np.testing.assert_array_equal(T.coeffs, [1 + 2j, 3 + 0j])

    def test_missing_coeffs(self):
        """Test that a missing field is named in the error"""
        with self.assertRaises(UsageError) as ctx:
            document_from_dict({"m": 2, "dims": [2, 2], "field": "real"})
        self.assertIn("'coeffs'", str(ctx.exception))

    def test_wrong_length(self):
        """Test coeffs length against dims"""
        with self.assertRaises(UsageError) as ctx:
            document_from_dict({"m": 2, "dims": [2, 2], "field": "real", "coeffs": [1, 2, 3]})
        self.assertIn("'coeffs'", str(ctx.exception))

    def test_complex_value_in_real_field(self):
        """Test that a pair in a real document is rejected"""
        with self.assertRaises(UsageError) as ctx:
            document_from_dict({"m": 1, "dims": [2], "field": "real", "coeffs": [[1, 2], 3]})
        self.assertIn("'coeffs'", str(ctx.exception))

    def test_unknown_key(self):
        """Test that extra keys are rejected"""
        with self.assertRaises(UsageError):
            document_from_dict({"m": 1, "dims": [1], "field": "real", "coeffs": [1], "note": "x"})

    def test_unknown_field(self):
        """Test the field literal"""
        with self.assertRaises(UsageError) as ctx:
            document_from_dict({"m": 1, "dims": [1], "field": "quaternion", "coeffs": [1]})
        self.assertIn("'field'", str(ctx.exception))


class TestTensorFiles(unittest.TestCase):
    """Test cases for load_tensor and dump_tensor"""

    def test_bit_exact_files(self):
        """Test that written tensors read back bit-identically"""
        with tempfile.TemporaryDirectory() as directory:
            for field in Field:
                T = random_tensor((2, 3, 2), field, Distribution.GAUSSIAN, seed=12)
                path = dump_tensor(T, os.path.join(directory, f"{field.value}.json"))
                self.assertTrue(load_tensor(path).same_as(T))

    def test_dict_layout(self):
        """Test row-major flattening"""
        data = tensor_to_dict(CoeffTensor(np.array([[1.0, 2.0], [3.0, 4.0]])))
        self.assertEqual(data, {"m": 2, "dims": [2, 2], "field": "real", "coeffs": [1.0, 2.0, 3.0, 4.0]})

    def test_missing_file(self):
        """Test an unreadable path"""
        with self.assertRaises(UsageError):
            load_tensor("/nonexistent/tensor.json")

    def test_malformed_json(self):
        """Test a file that is not JSON"""
        with tempfile.TemporaryDirectory() as directory:
            path = os.path.join(directory, "bad.json")
            with open(path, "w") as f:
                f.write("{not json")
            with self.assertRaises(UsageError):
                load_tensor(path)


class TestEmit(unittest.TestCase):
    """Test cases for record emission"""

    def test_json_lines_sorted(self):
        """Test one sorted-key object per line"""
        stream = io.StringIO()
        emit([{"b": 1, "a": 2}, {"c": None}], "json", stream)
        lines = stream.getvalue().splitlines()
        self.assertEqual(lines, ['{"a": 2, "b": 1}', '{"c": null}'])

    def test_csv_header_and_columns(self):
        """Test the CSV header follows the requested columns"""
        stream = io.StringIO()
        emit([{"n": 2, "ratio": 1.5, "extra": {"k": 1}}], "csv", stream, columns=["n", "ratio"])
        frame = pd.read_csv(io.StringIO(stream.getvalue()))
        self.assertEqual(list(frame.columns), ["n", "ratio"])
        self.assertEqual(frame["ratio"][0], 1.5)

    def test_unknown_format(self):
        """Test an unsupported format"""
        with self.assertRaises(UsageError):
            emit([], "xml", io.StringIO())

    def test_enum_and_numpy_values(self):
        """Test serialization of enums and numpy scalars"""
        self.assertEqual(json.loads(to_json({"f": Field.REAL, "x": np.float64(0.5)})), {"f": "real", "x": 0.5})

    def test_non_finite_values_become_null(self):
        """Test that nan and inf are written as null at any depth"""
        text = to_json({"slope": float("nan"), "rows": [{"best": np.float64("inf")}], "q": (1.5, -np.inf)})
        self.assertNotIn("NaN", text)
        self.assertNotIn("Infinity", text)
        self.assertEqual(json.loads(text), {"slope": None, "rows": [{"best": None}], "q": [1.5, None]})

    def test_run_context(self):
        """Test that records are stamped with config, version and seed"""
        ctx = RunContext({"starts": 16}, seed=4, version="9.9")
        stamped = ctx.stamp({"ratio": 1.0, "seed": None})
        self.assertEqual(stamped, {"ratio": 1.0, "seed": 4, "config": {"starts": 16}, "version": "9.9"})
        self.assertEqual(ctx.stamp({"seed": 7})["seed"], 7)


if __name__ == "__main__":
    unittest.main()
