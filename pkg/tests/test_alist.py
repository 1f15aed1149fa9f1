import numpy as np
import pytest

from fbgnn.alist import AlistParseError, load_alist, save_alist


def test_round_trip(tmp_path):
    rng = np.random.default_rng(12)
    m = rng.integers(0, 2, (20, 40)).astype(np.uint8)
    path = tmp_path / "m.alist"
    save_alist(m, path)
    assert np.array_equal(load_alist(path), m)


def test_round_trip_irregular(tmp_path):
    m = np.array([[1, 1, 1, 0], [0, 0, 0, 1], [0, 0, 0, 0]], dtype=np.uint8)
    path = tmp_path / "m.alist"
    save_alist(m, path)
    assert np.array_equal(load_alist(path), m)


def test_zero_padded_lists_accepted(tmp_path):
    # many writers pad index lists with zeros up to the max degree
    path = tmp_path / "p.alist"
    path.write_text(
        "3 2\n2 2\n1 2 1\n2 2\n1 0\n1 2\n2 0\n1 2\n2 3\n"
    )
    m = load_alist(path)
    assert np.array_equal(m, np.array([[1, 1, 0], [0, 1, 1]], dtype=np.uint8))


def test_index_zero_only_entry_is_padding_not_index(tmp_path):
    # an explicit 0 index conflicts with the declared degree -> parse error
    path = tmp_path / "z.alist"
    path.write_text("2 1\n1 1\n1 1\n2\n0\n1\n1 2\n")
    with pytest.raises(AlistParseError):
        load_alist(path)


def test_out_of_range_index(tmp_path):
    path = tmp_path / "r.alist"
    path.write_text("2 1\n1 2\n1 1\n2\n3\n1\n1 2\n")
    with pytest.raises(AlistParseError) as err:
        load_alist(path)
    assert err.value.line > 0


def test_empty_file(tmp_path):
    path = tmp_path / "e.alist"
    path.write_text("")
    with pytest.raises(AlistParseError):
        load_alist(path)


def test_malformed_header(tmp_path):
    path = tmp_path / "h.alist"
    path.write_text("3\n")
    with pytest.raises(AlistParseError):
        load_alist(path)


def test_row_and_column_lists_must_agree(tmp_path):
    path = tmp_path / "d.alist"
    path.write_text("2 2\n1 1\n1 1\n1 1\n1\n2\n2\n1\n")
    with pytest.raises(AlistParseError):
        load_alist(path)


def test_wrong_degree_count(tmp_path):
    path = tmp_path / "c.alist"
    path.write_text("3 1\n1 1\n1 1\n1\n1\n1\n1\n1 2 3\n")
    with pytest.raises(AlistParseError):
        load_alist(path)
