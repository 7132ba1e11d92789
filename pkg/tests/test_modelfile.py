"""JSON model files."""

import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from krein_topo.errors import BadParams
from krein_topo.modelfile import dumps_model, load_model, loads_model, model_from_dict, model_to_dict, save_model
from krein_topo.models import d_id, harper, kane_mele, p_ip
from krein_topo.tight_binding import HoppingModel

MODELS = {
    "harper": lambda: harper(3, 7),
    "kanemele": kane_mele,
    "pip": lambda: p_ip(0.2, 0.2, 1, 3, -1),
    "did": lambda: d_id(0.3, 0.1, 1, 3),
}


def _same(a, b):
    keys = ("W1", "W2", "W3", "W4", "V", "charge")
    return all(np.array_equal(getattr(a, k), getattr(b, k)) for k in keys) and (a.q, a.p, a.name) == (b.q, b.p, b.name)


@pytest.mark.parametrize("name", sorted(MODELS))
def test_round_trip_is_bit_exact(name, tmp_path):
    model, meta = MODELS[name]()
    path = tmp_path / "model.json"
    save_model(path, model, meta)
    back, back_meta = load_model(path)
    assert _same(model, back)
    assert back_meta.as_dict().keys() == meta.as_dict().keys()
    for key, entry in meta.as_dict().items():
        assert np.array_equal(entry["matrix"], back_meta.as_dict()[key]["matrix"])
        assert entry["parity"] == back_meta.as_dict()[key]["parity"]
    assert dumps_model(back, back_meta) == path.read_text()


@given(st.integers(0, 2**32 - 1), st.integers(1, 3))
def test_random_model_round_trip(seed, L):
    rng = np.random.default_rng(seed)
    mats = {k: rng.standard_normal((L, L)) + 1j * rng.standard_normal((L, L)) for k in ("W1", "W2", "W3", "W4")}
    V = rng.standard_normal((L, L))
    model = HoppingModel(V=V + V.T, q=int(rng.integers(-5, 6)), p=int(rng.integers(1, 8)), **mats)
    back, _ = loads_model(dumps_model(model))
    assert _same(model, back)


def test_optional_fields_default():
    data = model_to_dict(harper(1, 2)[0])
    for key in ("W3", "W4", "charge", "symmetries", "name"):
        data.pop(key, None)
    model, meta = model_from_dict(data)
    assert np.array_equal(model.W3, np.zeros((1, 1)))
    assert meta.real is None and model.name == "model"


@pytest.mark.parametrize(
    "mutate, match",
    [
        (lambda d: d.pop("W1"), "lacks field"),
        (lambda d: d.update(schema=2), "schema"),
        (lambda d: d.update(V=[[1.0]]), "expected shape"),
        (lambda d: d.update(W2="x"), "malformed"),
        (lambda d: d.update(symmetries={"mirror": {"matrix": [[1.0]]}}), "unknown symmetry"),
        (lambda d: d.update(charge=[2]), "charge"),
    ],
)
def test_bad_files(mutate, match):
    data = model_to_dict(harper(1, 2)[0])
    mutate(data)
    with pytest.raises(BadParams, match=match):
        model_from_dict(data)


def test_not_json():
    with pytest.raises(BadParams, match="not valid JSON"):
        loads_model("{")
    with pytest.raises(BadParams, match="JSON object"):
        loads_model(json.dumps([1, 2]))
