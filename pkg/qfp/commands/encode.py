"""
Encoding inspection and classical arithmetic examples.
"""
import logging
import math
from typing import Dict, List

import pandas as pd

from qfp.formats import FixedFormat, FloatFormat
from qfp.oracle import EncodingError, o_add, o_encode, o_fixed_decode, o_fixed_encode, o_mul, o_neg

logger = logging.getLogger(__name__)


def cmd_encode(x: float, e: int, m: int) -> Dict[str, object]:
    """
    Codes of x in an (e, m) format under both rounding modes.

    Raises:
        EncodingError: If x is out of range
    """
    fmt = FloatFormat(e, m)
    result: Dict[str, object] = {"input": x, "e": e, "m": m}
    for mode in ("nearest", "truncate"):
        code = o_encode(x, fmt, mode)
        result[mode] = {
            "expCode": code.exp_code,
            "mantCode": code.mant_code,
            "value": code.value,
        }
    return result


def format_encoding(result: Dict[str, object]) -> str:
    lines = [f"x = {result['input']!r} in (e={result['e']}, m={result['m']})"]
    for mode in ("nearest", "truncate"):
        code = result[mode]
        lines.append(
            f"  {mode:<8} exp_code={code['expCode']} mant_code={code['mantCode']} value={code['value']!r}"
        )
    return "\n".join(lines)


def _rel_err(approx: float, exact: float) -> float:
    return abs(approx - exact) / abs(exact)


def cmd_arith_examples(fixed_bits: int = 16, fixed_frac: int = 8, e: int = 5, m: int = 11) -> pd.DataFrame:
    """
    Fixed-point versus float on a subtraction and a product of small numbers.

    The subtraction is pi/100 - pi/128 and the product pi * 0.01; values are
    rounded to nearest on load and fixed-point products truncate.
    """
    fixed = FixedFormat(fixed_bits, fixed_frac, True)
    fmt = FloatFormat(e, m)
    rows: List[dict] = []

    a, b = math.pi / 100, math.pi / 128
    exact = a - b
    try:
        fa, fb = o_fixed_encode(a, fixed), o_fixed_encode(b, fixed)
        fixed_result = o_fixed_decode(fa - fb, fixed)
        rows.append(dict(op="sub", repr=f"fixed({fixed_bits},{fixed_frac})", a=o_fixed_decode(fa, fixed),
                         b=o_fixed_decode(fb, fixed), result=fixed_result, rel_err=_rel_err(fixed_result, exact)))
    except EncodingError as err:
        logger.warning(f"Fixed-point subtraction example not representable: {err}")
    qa, qb = o_encode(a, fmt), o_encode(b, fmt)
    float_result = o_add(qa, o_neg(qb)).value
    rows.append(dict(op="sub", repr=f"float{fmt}", a=qa.value, b=qb.value,
                     result=float_result, rel_err=_rel_err(float_result, exact)))
    rows.append(dict(op="sub", repr="double", a=a, b=b, result=exact, rel_err=0.0))

    a, b = math.pi, 0.01
    exact = a * b
    try:
        fa, fb = o_fixed_encode(a, fixed), o_fixed_encode(b, fixed)
        fixed_result = o_fixed_decode((fa * fb) >> fixed_frac, fixed)
        rows.append(dict(op="mul", repr=f"fixed({fixed_bits},{fixed_frac})", a=o_fixed_decode(fa, fixed),
                         b=o_fixed_decode(fb, fixed), result=fixed_result, rel_err=_rel_err(fixed_result, exact)))
    except EncodingError as err:
        logger.warning(f"Fixed-point product example not representable: {err}")
    qa, qb = o_encode(a, fmt), o_encode(b, fmt)
    float_result = o_mul(qa, qb).value
    rows.append(dict(op="mul", repr=f"float{fmt}", a=qa.value, b=qb.value,
                     result=float_result, rel_err=_rel_err(float_result, exact)))
    rows.append(dict(op="mul", repr="double", a=a, b=b, result=exact, rel_err=0.0))

    return pd.DataFrame(rows, columns=["op", "repr", "a", "b", "result", "rel_err"])
