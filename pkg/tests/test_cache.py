import json
import warnings
from fractions import Fraction

import pytest
from mpmath import mp, mpf

from ellbloch.analytic import PrecisionCtx, periods
from ellbloch.cache import CacheCorruptionWarning, DiskCache, cache_roundtrip, default_cache_dir, ENV_VAR
from ellbloch.curve import curve_by_label
from ellbloch.heights import LocalHeightTable
from ellbloch.numfmt import mp_exact, mp_from_exact, mpc_exact, mpc_from_exact

from conftest import pt


def _entries(root):
    return sorted(p for p in root.rglob("*.json"))


def test_mpf_exact_roundtrip_keeps_every_bit():
    with mp.workprec(300):
        x = mp.pi / 7
        y = mp_from_exact(json.loads(json.dumps(mp_exact(x))))
        assert x._mpf_ == y._mpf_
        z = mp.mpc(-mp.e, mp.sqrt(2))
        w = mpc_from_exact(mpc_exact(z))
        assert (z.real._mpf_, z.imag._mpf_) == (w.real._mpf_, w.imag._mpf_)


def test_exact_roundtrip_independent_of_global_precision():
    with mp.workprec(256):
        x = mp.pi
    enc = mp_exact(x)
    with mp.workprec(53):
        y = mp_from_exact(enc)
    assert y._mpf_ == x._mpf_


def test_negative_and_zero_values():
    for v in (mpf(0), mpf(-3) / 8, mpf("-1e-40")):
        assert mp_from_exact(mp_exact(v))._mpf_ == v._mpf_


def test_default_dir_follows_env(monkeypatch, tmp_path):
    monkeypatch.delenv(ENV_VAR, raising=False)
    assert default_cache_dir() is None
    monkeypatch.setenv(ENV_VAR, str(tmp_path))
    assert default_cache_dir() == tmp_path


def test_generic_roundtrip_and_stats(tmp_path):
    c = DiskCache(tmp_path)
    assert c.get({"a": 1}) is None
    assert cache_roundtrip(c, {"a": 1}, {"v": [1, 2]}) == {"v": [1, 2]}
    assert c.stats() == {"hits": 1, "misses": 1, "corrupt": 0}


def test_periods_hit_is_bit_identical(tmp_path):
    C = curve_by_label("37a1")
    ctx = PrecisionCtx(160)
    c = DiskCache(tmp_path)
    L = periods(C, ctx)
    c.put_periods(C, ctx, L)
    M = DiskCache(tmp_path).get_periods(C, ctx)
    for a, b in ((L.omega1, M.omega1), (L.omega2, M.omega2), (L.red1, M.red1), (L.red2, M.red2)):
        assert a.real._mpf_ == b.real._mpf_ and a.imag._mpf_ == b.imag._mpf_


def test_periods_keyed_by_precision(tmp_path):
    C = curve_by_label("11a1")
    c = DiskCache(tmp_path)
    c.put_periods(C, PrecisionCtx(128), periods(C, PrecisionCtx(128)))
    assert c.get_periods(C, PrecisionCtx(192)) is None


def test_heights_stored_per_place(tmp_path):
    C = curve_by_label("37a1")
    P = pt(Fraction(1, 4), Fraction(-5, 8))
    ctx = PrecisionCtx(128)
    with mp.workprec(128):
        tab = LocalHeightTable(mp.pi / 3, {2: Fraction(1)}, 128)
    c = DiskCache(tmp_path)
    c.put_heights(C, P, ctx, tab)
    # inf, one prime, index
    assert len(_entries(tmp_path)) == 3
    got = c.get_heights(C, P, ctx)
    assert got.archimedean._mpf_ == tab.archimedean._mpf_
    assert got.nonarch == {2: Fraction(1)}


@pytest.mark.parametrize("damage", ["truncate", "flip_payload", "garbage"])
def test_corruption_is_detected_and_recomputed(tmp_path, damage):
    c = DiskCache(tmp_path)
    c.put({"k": 1}, {"v": 42})
    (path,) = _entries(tmp_path)
    raw = path.read_bytes()
    if damage == "truncate":
        path.write_bytes(raw[: len(raw) // 2])
    elif damage == "flip_payload":
        path.write_bytes(raw.replace(b'"v":42', b'"v":43'))
    else:
        path.write_bytes(b"\x00\x01not json")
    with pytest.warns(CacheCorruptionWarning):
        assert c.get({"k": 1}) is None
    assert not path.exists()
    assert c.stats()["corrupt"] == 1
    c.put({"k": 1}, {"v": 42})
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert c.get({"k": 1}) == {"v": 42}


def test_key_collision_guard(tmp_path):
    # an entry whose stored key differs from the requested one is rejected
    c = DiskCache(tmp_path)
    c.put({"k": 1}, {"v": 1})
    (path,) = _entries(tmp_path)
    rec = json.loads(path.read_bytes())
    rec["key"] = {"k": 2}
    path.write_text(json.dumps(rec))
    with pytest.warns(CacheCorruptionWarning):
        assert c.get({"k": 1}) is None
