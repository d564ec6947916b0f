import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from boxes_sim.core import ComplexField, GridSpec
from boxes_sim.fieldio import (
    FieldFileError,
    decode_field,
    encode_field,
    heatmap_bytes,
    read_field,
    read_pgm,
    time_label,
    write_field,
    write_heatmap,
)


def _field(values, t=3000.0):
    nx, ny = values.shape
    return ComplexField(GridSpec(nx, ny, 5.125976324197765, 0.1 + 0.2, (-512.2499389946279, 1 / 3)), values, t)


@settings(max_examples=30, deadline=None)
@given(
    values=arrays(np.float64, (16, 32), elements=st.floats(0, 1e300, allow_subnormal=True)),
    t=st.floats(0, 1e6),
)
def test_round_trip_is_bit_exact(values, t):
    f = _field(values, t)
    data = encode_field(f, "transition_density")
    g, q = decode_field(data)
    assert q == "transition_density"
    assert g.spec == f.spec and g.t == f.t
    assert g.values.real.tobytes() == f.values.real.tobytes()
    assert encode_field(g, q) == data


def test_payload_layout(tmp_path):
    v = np.arange(16 * 32, dtype=float).reshape(16, 32)
    path = write_field(tmp_path / "a.grid", _field(v), "psi_density")
    data = path.read_bytes()
    head, payload = data.split(b"END\n", 1)
    assert head.decode().splitlines()[1:3] == ["nx 16", "ny 32"]
    assert len(payload) == 16 * 32 * 8
    assert np.frombuffer(payload, "<f8")[33] == v[1, 1]
    g, _ = read_field(path)
    np.testing.assert_array_equal(g.values.real, v)


def test_rejects_negative_and_bad_quantity():
    with pytest.raises(ValueError):
        encode_field(_field(-np.ones((16, 16))), "psi_density")
    with pytest.raises(ValueError):
        encode_field(_field(np.ones((16, 16))), "density")


def test_truncated_payload():
    data = encode_field(_field(np.ones((16, 16))), "psi_density")
    with pytest.raises(FieldFileError):
        decode_field(data[:-8])
    with pytest.raises(FieldFileError):
        decode_field(b"nonsense")


def test_heatmap_orientation(tmp_path):
    v = np.zeros((16, 32))
    v[3, 31] = 2.0  # high y
    v[0, 0] = 1.0
    path = write_heatmap(tmp_path / "a.pgm", _field(v))
    assert path.read_bytes().startswith(b"P5\n16 32\n255\n")
    img = read_pgm(path)
    assert img.shape == (32, 16)
    assert img[0, 3] == 255  # top row is the largest y
    assert img[31, 0] == 128
    assert img.sum() == 255 + 128


def test_heatmap_of_zero_field():
    assert set(heatmap_bytes(np.zeros((16, 16)))[-256:]) == {0}


def test_time_label():
    assert time_label(3000.0) == "3000"
    assert time_label(0.0) == "0"
    assert time_label(12.5) == "12p5"
