"""JSON encode/decode for all artifact types plus a deterministic dumper.

Complex numbers travel as [re, im] pairs; reports are emitted with sorted keys
and floats printed at 17 significant digits so identical configurations yield
byte-identical output.
"""

from __future__ import annotations

import json
import math

from .cocycles import Cocycle, Representation
from .monodromy import SphereData, build_potential
from .sl2 import MoebiusMap, QuadPoly
from .words import Signature


def complex_out(z: complex) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def complex_in(v) -> complex:
    if isinstance(v, (int, float)):
        return complex(v)
    return complex(float(v[0]), float(v[1]))


def poly_out(p: QuadPoly) -> list[list[float]]:
    return [complex_out(c) for c in p.coeffs()]


def poly_in(v) -> QuadPoly:
    return QuadPoly(*(complex_in(c) for c in v))


def moebius_out(m: MoebiusMap) -> list[list[float]]:
    return [complex_out(c) for c in m.tuple()]


def moebius_in(v) -> MoebiusMap:
    return MoebiusMap(*(complex_in(c) for c in v))


def signature_out(sig: Signature) -> dict:
    out = {"g": sig.g, "elliptic": list(sig.elliptic_orders), "cusps": sig.cusps}
    canonical = tuple(sig.elliptic_orders) + (None,) * sig.cusps
    if sig.order_sequence() != canonical:
        out["orders"] = list(sig.order_sequence())
    return out


def signature_in(d: dict) -> Signature:
    marked = tuple(d["orders"]) if "orders" in d else None
    return Signature(int(d["g"]), tuple(d.get("elliptic", ())), int(d.get("cusps", 0)),
                     marked_orders=marked)


def representation_out(rho: Representation) -> dict:
    return {"signature": signature_out(rho.signature),
            "images": {g: moebius_out(m) for g, m in rho.images.items()}}


def representation_in(d: dict) -> Representation:
    sig = signature_in(d["signature"])
    return Representation(sig, {g: moebius_in(v) for g, v in d["images"].items()})


def cocycle_out(chi: Cocycle) -> dict:
    return {"values": {g: poly_out(p) for g, p in chi.values.items()}}


def cocycle_in(d: dict, rho: Representation) -> Cocycle:
    values = d.get("values", d)  # accept the bare generator -> poly map too
    return Cocycle(rho, {g: poly_in(v) for g, v in values.items()})


def _order_in(o):
    return None if o in (None, "inf", "cusp") else int(o)


def sphere_out(data: SphereData) -> dict:
    return {
        "points": [complex_out(p) for p in data.points],
        "orders": [o for o in data.orders],
        "order_infinity": data.order_infinity,
        "residues": [complex_out(m) for m in data.residues],
        "base_point": complex_out(data.base_point),
    }


def sphere_in(d: dict) -> SphereData:
    points = [complex_in(p) for p in d["points"]]
    orders = [_order_in(o) for o in d["orders"]]
    o_inf = _order_in(d.get("order_infinity"))
    base = complex_in(d["base_point"]) if "base_point" in d else None
    if "residues" in d:
        from .monodromy import default_base_point
        residues = tuple(complex_in(m) for m in d["residues"])
        zb = base if base is not None else default_base_point(points)
        return SphereData(tuple(points), tuple(orders), o_inf, residues, zb)
    accessory = [complex_in(a) for a in d.get("accessory", [])]
    return build_potential(points, orders, o_inf, accessory, base)


# ---------------------------------------------------------------------------
# deterministic dumper
# ---------------------------------------------------------------------------

def _fmt_float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    if x == int(x) and abs(x) < 1e16:
        return f"{int(x)}.0"
    return format(x, ".17g")


def _emit(obj, out: list[str]) -> None:
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(_fmt_float(obj))
    elif isinstance(obj, complex):
        _emit([obj.real, obj.imag], out)
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, dict):
        out.append("{")
        for i, k in enumerate(sorted(obj, key=str)):
            if i:
                out.append(",")
            out.append(json.dumps(str(k)))
            out.append(":")
            _emit(obj[k], out)
        out.append("}")
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for i, v in enumerate(obj):
            if i:
                out.append(",")
            _emit(v, out)
        out.append("]")
    else:
        raise TypeError(f"cannot serialize {type(obj)}")


def dumps_deterministic(obj) -> str:
    """JSON text with sorted keys and 17-significant-digit floats; identical
    inputs produce identical bytes."""
    out: list[str] = []
    _emit(obj, out)
    return "".join(out)
