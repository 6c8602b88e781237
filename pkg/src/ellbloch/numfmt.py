"""Decimal string round-tripping for mpmath numbers."""

import math

from mpmath import mp, mpf


def mp_to_str(x, prec_bits: int) -> str:
    """Decimal string with enough digits to recover ``x`` at ``prec_bits``."""
    digits = int(math.ceil(prec_bits * math.log10(2))) + 2
    with mp.workprec(prec_bits + 8):
        return mp.nstr(mpf(x), digits, strip_zeros=False, min_fixed=-5, max_fixed=5)


def str_to_mp(s: str, prec_bits: int):
    with mp.workprec(prec_bits + 8):
        return mpf(s)


def mp_exact(x) -> dict:
    """Bit-exact encoding of an mpf: ``{"man": hex, "exp": int}``."""
    if not isinstance(x, mpf):
        x = mpf(x)
    if not x:
        return {"man": "0", "exp": 0}
    sign, man, exp, _ = x._mpf_
    return {"man": hex(-int(man) if sign else int(man)), "exp": int(exp)}


def mp_from_exact(obj) -> mpf:
    man = int(obj["man"], 16)
    bits = max(abs(man).bit_length(), 53)
    with mp.workprec(bits):
        return mpf((man, int(obj["exp"])))


def mpc_exact(z) -> dict:
    from mpmath import mpc

    if not isinstance(z, mpc):
        z = mpc(z)
    return {"re": mp_exact(z.real), "im": mp_exact(z.imag)}


def mpc_from_exact(obj):
    re, im = mp_from_exact(obj["re"]), mp_from_exact(obj["im"])
    return mp.make_mpc((re._mpf_, im._mpf_))
