import json
from fractions import Fraction

import numpy as np
import pytest

from biext import exact as ex
from biext.chen import iterated_integral, Path
from biext.hodge import PeriodValue, RealHodgeStructure, biextension_period, split_biextension, twist
from biext.io import (FormatError, biextension_to_json, form_registry, load_biextension, load_expr, load_path,
                      load_phi, load_series, load_surface, parse_complex, parse_point, parse_region,
                      period_to_json, surface_to_json)
from biext.surfaces import INF, Surface
from biext.verify import random_pure_structure, random_rational


def test_parse_complex_forms():
    assert parse_complex([1, 2]) == 1 + 2j
    assert parse_complex(["1/2", "-3/4"]) == 0.5 - 0.75j
    assert parse_complex(3) == 3
    assert parse_complex("inf") == INF
    assert parse_complex("1.5,-2") == 1.5 - 2j
    assert parse_complex("1+2i") == 1 + 2j
    with pytest.raises(FormatError):
        parse_complex([1, 2, 3])
    with pytest.raises(FormatError):
        parse_complex(None)


def test_parse_point_and_region():
    assert parse_point("0.25,-0.5") == 0.25 - 0.5j
    for bad in ("x,y", "inf"):
        with pytest.raises(FormatError):
            parse_point(bad)
    assert parse_region("-2,2,-1,1") == (-2, 2, -1, 1)
    for bad in ("0,1,0", "1,0,0,1", "a,b,c,d"):
        with pytest.raises(FormatError):
            parse_region(bad)


@pytest.mark.parametrize("s", [Surface.sphere("inf", 0, 1), Surface.torus(0.3 + 1.1j, 0, 0.5), Surface.torus(1j)])
def test_surface_round_trip(s, tmp_path):
    f = tmp_path / "s.json"
    f.write_text(json.dumps(surface_to_json(s)))
    assert load_surface(f) == s


def test_surface_errors(tmp_path):
    with pytest.raises(FormatError):
        load_surface(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(FormatError):
        load_surface(bad)
    with pytest.raises(FormatError):
        load_surface({"punctures": []})
    with pytest.raises(FormatError):
        load_surface({"kind": "torus", "tau": [0, -1], "punctures": []})
    with pytest.raises(FormatError):
        load_surface({"kind": "sphere", "punctures": [0, 0]})


def test_path_loading():
    s = Surface.sphere("inf", 0)
    p = load_path({"vertices": [[1, 0], [0, 1], [-1, 0]]}, s)
    assert p.vertices == (1, 1j, -1)
    with pytest.raises(FormatError):
        load_path({"vertices": [[1, 0]]})
    with pytest.raises(FormatError):
        load_path({"vertices": [[-1, 0], [1, 0]]}, s)
    with pytest.raises(FormatError):
        load_path({"verts": []})


def test_registry_keys():
    s = Surface.torus(1j, 0, 0.5)
    reg = form_registry(s)
    assert {"dz", "dzbar", "zeta:1", "omega:1", "omegabar:1", "xi:a0", "phi:a0"} <= set(reg)
    sphere = form_registry(Surface.sphere("inf", 0, 1))
    assert {"zeta:1", "zeta:2"} <= set(sphere) and "omega:1" not in sphere


def test_expression_loading():
    s = Surface.sphere("inf", 0)
    expr = load_expr({"constant": 1, "length1": [{"form": "zeta:1", "coef": [2, 0]}],
                      "length2": [{"forms": ["dz", "dz"]}]}, s)
    v = iterated_integral(expr, Path([1, 2]))
    want = 1 + 2 * np.log(2) / (2j * np.pi) + 0.5
    assert abs(v - want) < 1e-12
    with pytest.raises(FormatError):
        load_expr({"length1": [{"form": "nope"}]}, s)
    with pytest.raises(FormatError):
        load_expr({"length2": [{"forms": ["dz"]}]}, s)


def test_phi_loading():
    s = Surface.torus(1j, 0, 0.5)
    phi, base = load_phi({"e_dim": 1, "kappa_dim": 1, "rows": [[1, 0], [0, 2]], "base_period": [0.5, 0]}, s)
    assert phi.matrix.shape == (2, 2) and base.coords == (0.5, 0.0)
    phi, base = load_phi({"e_dim": 1, "kappa_dim": 1, "rows": [[1, 1]], "labels": ["c"]}, s)
    assert base.coords == (0.0,) and phi.target_labels == ("c",)
    with pytest.raises(FormatError):
        load_phi({"e_dim": 2, "kappa_dim": 1, "rows": [[1, 0, 0]]}, s)
    with pytest.raises(FormatError):
        load_phi({"rows": [[1, 0]]}, s)


def test_series_loading():
    fs, hs = load_series({"fs": [[0, 1, 0], [1, 0, 0]], "hs": [[1, 0, 0], [[0, 0], [1, 0], 0]]})
    assert fs[0].coeffs == (0, 1, 0) and hs[1].coeffs == (0, 1, 0)
    with pytest.raises(FormatError):
        load_series({"hs": []})
    with pytest.raises(FormatError):
        load_series({"fs": [[]]})


def _tate(rank):
    return RealHodgeStructure(-2, ex.eye(rank, True), {(-1, -1): ex.eye(rank, True)})


def test_biextension_round_trip_exact(rng, tmp_path):
    for _ in range(5):
        B = random_pure_structure(rng, -1, 2)
        C = random_pure_structure(rng, -2, int(rng.integers(1, 4)))
        k = C.real_basis(-1).shape[1]
        t = PeriodValue(tuple(random_rational(rng) for _ in range(k)))
        v = twist(split_biextension(B, C), t)
        f = tmp_path / "v.json"
        f.write_text(json.dumps(biextension_to_json(v)))
        w = load_biextension(f)
        assert w.exact
        assert biextension_period(w).coords == biextension_period(v).coords == t.coords


def test_biextension_float_file():
    v = twist(split_biextension(RealHodgeStructure(-1, ex.eye(0, True), {}), _tate(1)),
              PeriodValue((Fraction(3, 7),)))
    data = biextension_to_json(v)
    data["exact"] = False
    w = load_biextension(json.loads(json.dumps(data)))
    assert not w.exact
    assert abs(float(biextension_period(w).coords[0]) - 3 / 7) < 1e-12


def test_biextension_errors():
    v = split_biextension(RealHodgeStructure(-1, ex.eye(0, True), {}), _tate(1))
    data = biextension_to_json(v)
    broken = dict(data)
    del broken["unit"]
    with pytest.raises(FormatError, match="unit"):
        load_biextension(broken)
    assert load_biextension(json.loads(json.dumps(data))).dim == 2
    wrong_w = json.loads(json.dumps(data))
    wrong_w["W"]["-2"] = wrong_w["W"]["0"]
    with pytest.raises(FormatError, match="disagrees"):
        load_biextension(wrong_w)


def test_period_json():
    out = period_to_json(PeriodValue((Fraction(1, 3), 0.5), ("a", "b")))
    assert out == {"labels": ["a", "b"], "period": ["1/3", 0.5], "period_float": [1 / 3, 0.5]}
