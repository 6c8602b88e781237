"""On-disk cache for periods and local heights.

Entries are JSON files named by the sha256 of their canonical key.  Each
file stores the payload next to a sha256 of the payload's canonical
serialization; a mismatch is treated as corruption, the entry is dropped
and the caller recomputes.  Multi-precision numbers are stored as exact
``(mantissa, exponent)`` pairs so a hit is bit-identical to the miss that
created it.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import warnings
from fractions import Fraction
from pathlib import Path

from filelock import FileLock

from .analytic import PeriodLattice, PrecisionCtx
from .curve import CurvePoint, RationalCurve
from .heights import LocalHeightTable
from .numfmt import mp_exact, mp_from_exact, mpc_exact, mpc_from_exact

ENV_VAR = "ELLBLOCH_CACHE_DIR"
FORMAT = 1

log = logging.getLogger(__name__)


class CacheCorruptionWarning(UserWarning):
    pass


def canonical(obj) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()


def default_cache_dir():
    v = os.environ.get(ENV_VAR)
    return Path(v) if v else None


class DiskCache:
    def __init__(self, root):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.hits = 0
        self.misses = 0
        self.corrupt = 0

    def _path(self, key) -> Path:
        h = hashlib.sha256(canonical(key)).hexdigest()
        return self.root / h[:2] / f"{h}.json"

    def get(self, key):
        path = self._path(key)
        if not path.exists():
            self.misses += 1
            return None
        with FileLock(str(path) + ".lock"):
            try:
                rec = json.loads(path.read_bytes())
                payload = rec["payload"]
                ok = rec.get("key") == key and rec.get("sha256") == hashlib.sha256(canonical(payload)).hexdigest()
            except (ValueError, KeyError, TypeError):
                ok = False
            if not ok:
                self.corrupt += 1
                self.misses += 1
                msg = f"cache entry {path.name} failed its checksum; recomputing"
                log.debug(msg)
                warnings.warn(msg, CacheCorruptionWarning, stacklevel=2)
                path.unlink(missing_ok=True)
                return None
        self.hits += 1
        return payload

    def put(self, key, payload):
        path = self._path(key)
        path.parent.mkdir(parents=True, exist_ok=True)
        rec = {"format": FORMAT, "key": key, "payload": payload, "sha256": hashlib.sha256(canonical(payload)).hexdigest()}
        tmp = path.with_suffix(f".{os.getpid()}.tmp")
        with FileLock(str(path) + ".lock"):
            tmp.write_bytes(canonical(rec))
            os.replace(tmp, path)

    def stats(self):
        return {"hits": self.hits, "misses": self.misses, "corrupt": self.corrupt}

    # -- typed helpers ------------------------------------------------

    def get_periods(self, C: RationalCurve, ctx: PrecisionCtx):
        obj = self.get({"kind": "periods", "curve": C.key(), "prec_bits": ctx.prec_bits})
        if obj is None:
            return None
        return PeriodLattice(
            mpc_from_exact(obj["omega1"]),
            mpc_from_exact(obj["omega2"]),
            obj["prec_bits"],
            mpc_from_exact(obj["red1"]),
            mpc_from_exact(obj["red2"]),
        )

    def put_periods(self, C: RationalCurve, ctx: PrecisionCtx, L: PeriodLattice):
        payload = {
            "omega1": mpc_exact(L.omega1),
            "omega2": mpc_exact(L.omega2),
            "red1": mpc_exact(L.red1),
            "red2": mpc_exact(L.red2),
            "prec_bits": L.prec_bits,
        }
        self.put({"kind": "periods", "curve": C.key(), "prec_bits": ctx.prec_bits}, payload)

    def _hkey(self, C, P, ctx, place):
        return {"kind": "height", "curve": C.key(), "point": P.to_json(), "place": place, "prec_bits": ctx.prec_bits}

    def get_heights(self, C: RationalCurve, P: CurvePoint, ctx: PrecisionCtx):
        # the place list is stored under "index"; one entry per place
        idx = self.get(self._hkey(C, P, ctx, "index"))
        if idx is None:
            return None
        arch = self.get(self._hkey(C, P, ctx, "inf"))
        if arch is None:
            return None
        nonarch = {}
        for p in idx["primes"]:
            e = self.get(self._hkey(C, P, ctx, p))
            if e is None:
                return None
            nonarch[p] = Fraction(e["r"])
        return LocalHeightTable(mp_from_exact(arch["value"]), nonarch, arch["prec_bits"])

    def put_heights(self, C: RationalCurve, P: CurvePoint, ctx: PrecisionCtx, tab: LocalHeightTable):
        for p, r in sorted(tab.nonarch.items()):
            self.put(self._hkey(C, P, ctx, p), {"r": str(r)})
        self.put(self._hkey(C, P, ctx, "inf"), {"value": mp_exact(tab.archimedean), "prec_bits": tab.prec_bits})
        self.put(self._hkey(C, P, ctx, "index"), {"primes": sorted(tab.nonarch)})


def cache_roundtrip(cache: DiskCache, key, value):
    """Write ``value`` under ``key`` and read it back."""
    cache.put(key, value)
    return cache.get(key)
