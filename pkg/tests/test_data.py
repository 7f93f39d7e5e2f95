import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from esncausal.data import (
    MaskedSeries,
    Standardization,
    contaminate,
    load_csv,
    read_removed,
    standardize,
    write_csv,
    write_removed,
)
from esncausal.errors import ArgumentError, DegenerateColumnError, FormatError


def _write(tmp_path, text, name="in.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


class TestLoadCsv:
    def test_missing_trailing_field(self, tmp_path):
        s = load_csv(_write(tmp_path, "a,b\n1.0,2.0\n3.0,\n"))
        assert s.shape == (2, 2)
        assert s.names == ("a", "b")
        assert s.mask.tolist() == [[True, True], [True, False]]
        assert s.values[1, 0] == 3.0

    @pytest.mark.parametrize("tok", ["NaN", "nan", "NAN", " nan "])
    def test_nan_spellings_are_missing(self, tmp_path, tok):
        s = load_csv(_write(tmp_path, f"a\n1\n{tok}\n"))
        assert s.mask[:, 0].tolist() == [True, False]

    def test_custom_missing_token(self, tmp_path):
        s = load_csv(_write(tmp_path, "a,b\n1,-999\n2,3\n"), missing_token="-999")
        assert not s.mask[0, 1]
        with pytest.raises(FormatError):
            load_csv(_write(tmp_path, "a,b\n1,NA\n2,3\n"))

    def test_unparseable_field_reports_position(self, tmp_path):
        with pytest.raises(FormatError) as exc:
            load_csv(_write(tmp_path, "a,b\n1.0,xyz\n2,3\n"))
        assert exc.value.row == 1 and exc.value.column == 2
        assert "row 1" in str(exc.value) and "column 2" in str(exc.value)

    def test_ragged_row(self, tmp_path):
        with pytest.raises(FormatError) as exc:
            load_csv(_write(tmp_path, "a,b\n1,2\n3\n"))
        assert exc.value.row == 2

    def test_duplicate_header(self, tmp_path):
        with pytest.raises(FormatError, match="duplicate"):
            load_csv(_write(tmp_path, "a,a\n1,2\n3,4\n"))

    def test_te_shaped_file(self, tmp_path):
        names = ["xmeas_5", "xmeas_6", "xmeas_7", "xmeas_8", "xmeas_9", "xmeas_12", "xmeas_20", "xmeas_21"]
        rng = np.random.default_rng(0)
        s = MaskedSeries.from_array(rng.normal(size=(200, 8)), names)
        write_csv(s, tmp_path / "te.csv")
        back = load_csv(tmp_path / "te.csv")
        assert back.n_vars == 8 and back.n_rows == 200
        assert back.names == tuple(names)


class TestMaskedSeries:
    def test_masked_cells_hold_no_value(self):
        s = MaskedSeries(np.array([[1.0, 2.0], [3.0, 4.0]]), np.array([[True, False], [True, True]]), ["a", "b"])
        assert math.isnan(s.values[0, 1])

    def test_immutable(self):
        s = MaskedSeries.from_array(np.ones((3, 2)))
        with pytest.raises(ValueError):
            s.values[0, 0] = 5.0

    @pytest.mark.parametrize(
        "values,mask,names",
        [
            (np.ones((1, 2)), np.ones((1, 2), bool), ["a", "b"]),
            (np.ones((3, 2)), np.ones((3, 3), bool), ["a", "b"]),
            (np.ones((3, 2)), np.ones((3, 2), bool), ["a", "a"]),
        ],
    )
    def test_invalid(self, values, mask, names):
        with pytest.raises(ArgumentError):
            MaskedSeries(values, mask, names)


finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)


@settings(max_examples=40, deadline=None)
@given(arrays(float, st.tuples(st.integers(2, 12), st.integers(1, 4)), elements=finite),
       arrays(bool, (12, 4)))
def test_csv_round_trip_is_exact(tmp_path_factory, values, mask_src):
    mask = mask_src[: values.shape[0], : values.shape[1]]
    s = MaskedSeries(values, mask, [f"v{k}" for k in range(values.shape[1])])
    path = tmp_path_factory.mktemp("rt") / "s.csv"
    write_csv(s, path)
    back = load_csv(path)
    assert back.names == s.names
    np.testing.assert_array_equal(back.mask, s.mask)
    np.testing.assert_array_equal(back.values[s.mask], s.values[s.mask])


class TestContaminate:
    def test_zero_fraction_is_identity(self):
        s = MaskedSeries.from_array(np.arange(20.0).reshape(10, 2))
        out, removed = contaminate(s, 0.0, seed=3)
        assert removed == []
        np.testing.assert_array_equal(out.mask, s.mask)
        np.testing.assert_array_equal(out.values, s.values)

    def test_ten_percent_of_100x8(self):
        s = MaskedSeries.from_array(np.random.default_rng(0).normal(size=(100, 8)))
        out, removed = contaminate(s, 0.10, seed=1)
        assert len(removed) == 80
        assert (~out.mask).sum() == 80
        for cell in removed:
            assert not out.mask[cell.row, cell.col]
            assert cell.value == s.values[cell.row, cell.col]

    def test_same_seed_same_cells(self):
        s = MaskedSeries.from_array(np.random.default_rng(0).normal(size=(50, 3)))
        assert contaminate(s, 0.3, 11)[1] == contaminate(s, 0.3, 11)[1]
        assert contaminate(s, 0.3, 11)[1] != contaminate(s, 0.3, 12)[1]

    def test_decimal_fraction_count(self):
        s = MaskedSeries.from_array(np.ones((100, 1)))
        # 0.29 * 100 is 28.999999999999996 in binary floating point
        assert len(contaminate(s, 0.29, 0)[1]) == 29

    @pytest.mark.parametrize("fraction", [-0.1, 1.0, 1.5])
    def test_fraction_out_of_range(self, fraction):
        s = MaskedSeries.from_array(np.ones((4, 1)))
        with pytest.raises(ArgumentError):
            contaminate(s, fraction, 0)

    @settings(max_examples=50, deadline=None)
    @given(st.floats(0, 0.99), st.integers(0, 2**31), arrays(bool, (15, 3)))
    def test_never_unmasks(self, fraction, seed, mask):
        s = MaskedSeries(np.zeros((15, 3)), mask, ["a", "b", "c"])
        out, removed = contaminate(s, fraction, seed)
        assert not np.any(out.mask & ~s.mask)
        expected = math.floor(Fraction(repr(fraction)) * s.observed_count())
        assert len(removed) == expected
        assert (~out.mask).sum() == (~s.mask).sum() + expected

    def test_removed_csv_round_trip(self, tmp_path):
        s = MaskedSeries.from_array(np.random.default_rng(2).normal(size=(30, 2)))
        _, removed = contaminate(s, 0.2, 0)
        write_removed(removed, tmp_path / "r.csv")
        assert read_removed(tmp_path / "r.csv") == removed
        assert (tmp_path / "r.csv").read_text().splitlines()[0] == "row,col,value"


class TestStandardize:
    def test_two_points(self):
        z, st_ = standardize(MaskedSeries.from_array(np.array([[2.0], [4.0]])))
        np.testing.assert_allclose(z.values[:, 0], [-1.0, 1.0])
        assert st_.mean[0] == 3.0 and st_.std[0] == 1.0

    def test_constant_column_named(self):
        s = MaskedSeries.from_array(np.array([[1.0, 5.0], [2.0, 5.0], [3.0, 5.0]]), ["ok", "flat"])
        with pytest.raises(DegenerateColumnError) as exc:
            standardize(s)
        assert exc.value.columns == ["flat"]
        assert "flat" in str(exc.value)

    def test_column_with_one_observation(self):
        s = MaskedSeries(np.array([[1.0], [2.0]]), np.array([[True], [False]]), ["a"])
        with pytest.raises(DegenerateColumnError):
            standardize(s)

    def test_nonpositive_std_rejected(self):
        with pytest.raises(DegenerateColumnError):
            Standardization(np.zeros(2), np.array([1.0, 0.0]))

    @settings(max_examples=40, deadline=None)
    @given(arrays(float, (20, 3), elements=st.floats(-100, 100)), arrays(bool, (20, 3)))
    def test_moments_and_round_trip(self, values, mask):
        mask[:3] = True
        values[:3] += np.array([[0.0], [1.0], [2.0]])  # three distinct observed values per column
        s = MaskedSeries(values, mask, ["a", "b", "c"])
        if np.any([np.std(values[mask[:, j], j]) < 0.1 for j in range(3)]):
            return
        z, st_ = standardize(s)
        for j in range(3):
            col = z.values[mask[:, j], j]
            assert abs(col.mean()) < 1e-12
            assert abs(col.std() - 1.0) < 1e-12
        back = st_.invert(z)
        obs = s.mask
        np.testing.assert_allclose(back.values[obs], s.values[obs], rtol=1e-10, atol=1e-10 * np.abs(s.values[obs]).max())
        np.testing.assert_array_equal(z.mask, s.mask)
