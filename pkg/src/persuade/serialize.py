"""Canonical JSON encoding of instances, schemes, and auction data.

Floats go through Python's shortest round-trip repr, so every dump parses
back to bit-identical doubles; dumps are key-sorted so equal objects
serialize to equal bytes.
"""

from __future__ import annotations

import json
from typing import Any

import numpy as np

from .auction import AuctionInstance, AuctionType
from .cce import ReductionSpec
from .errors import ValidationError
from .model import PersuasionInstance, PublicScheme
from .profiles import ActionProfile
from .setfuncs import (
    Additive,
    Anonymous,
    Coverage,
    CutFunction,
    ExplicitTable,
    SetFunction,
    StructureFlags,
)


def dumps(payload: Any) -> str:
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def objective_to_dict(f: SetFunction) -> dict:
    if isinstance(f, ExplicitTable):
        flags = {
            name: getattr(f.declared, name)
            for name in ("monotone", "submodular", "supermodular")
            if getattr(f.declared, name) is not None
        }
        out: dict = {"kind": "explicit", "values": list(f.values)}
        if flags:
            out["flags"] = flags
        return out
    if isinstance(f, Additive):
        return {"kind": "additive", "weights": list(f.weights)}
    if isinstance(f, Anonymous):
        return {"kind": "anonymous", "by_size": list(f.by_size)}
    if isinstance(f, Coverage):
        return {
            "kind": "coverage",
            "element_weights": list(f.element_weights),
            "covers": [sorted(c) for c in f.covers],
        }
    if isinstance(f, CutFunction):
        return {
            "kind": "cut",
            "n": f.num_receivers,
            "edges": [[i, j, w] for i, j, w in f.edges],
        }
    raise ValidationError(f"cannot serialize objective kind {f.kind!r}")


def objective_from_dict(data: dict) -> SetFunction:
    kind = data.get("kind")
    if kind == "explicit":
        flags = data.get("flags", {})
        return ExplicitTable(
            tuple(float(v) for v in data["values"]),
            declared=StructureFlags(
                monotone=flags.get("monotone"),
                submodular=flags.get("submodular"),
                supermodular=flags.get("supermodular"),
            ),
        )
    if kind == "additive":
        return Additive(tuple(float(w) for w in data["weights"]))
    if kind == "anonymous":
        return Anonymous(tuple(float(v) for v in data["by_size"]))
    if kind == "coverage":
        return Coverage(
            tuple(float(w) for w in data["element_weights"]),
            tuple(frozenset(int(e) for e in c) for c in data["covers"]),
        )
    if kind == "cut":
        return CutFunction(
            int(data["n"]),
            tuple((int(i), int(j), float(w)) for i, j, w in data["edges"]),
        )
    raise ValidationError(f"unknown objective kind {kind!r}")


def instance_to_dict(inst: PersuasionInstance) -> dict:
    if isinstance(inst.objective, SetFunction):
        obj = objective_to_dict(inst.objective)
    else:
        obj = [objective_to_dict(f) for f in inst.objective]
    return {
        "n": inst.n,
        "states": list(inst.states),
        "prior": [float(p) for p in inst.prior],
        "payoff": [[float(v) for v in row] for row in inst.payoff],
        "objective": obj,
    }


def instance_from_dict(data: dict) -> PersuasionInstance:
    obj_data = data["objective"]
    objective: SetFunction | tuple[SetFunction, ...]
    if isinstance(obj_data, list):
        objective = tuple(objective_from_dict(o) for o in obj_data)
    else:
        objective = objective_from_dict(obj_data)
    inst = PersuasionInstance(
        states=tuple(str(s) for s in data["states"]),
        prior=tuple(float(p) for p in data["prior"]),
        payoff=np.array(data["payoff"], dtype=float),
        objective=objective,
    )
    if inst.n != int(data["n"]):
        raise ValidationError(
            f"payoff has {inst.n} receiver rows but n={data['n']} declared"
        )
    return inst


def scheme_to_dict(scheme: PublicScheme) -> dict:
    return {
        "signals": [list(s.bits) for s in scheme.signals],
        "probs": [[float(v) for v in row] for row in scheme.probs],
    }


def scheme_from_dict(data: dict, allow_duplicate_signals: bool = False) -> PublicScheme:
    return PublicScheme(
        signals=tuple(ActionProfile.from_bits(b) for b in data["signals"]),
        probs=np.array(data["probs"], dtype=float),
        allow_duplicate_signals=allow_duplicate_signals,
    )


def auction_to_dict(inst: AuctionInstance) -> dict:
    return {
        "n": inst.n,
        "states": list(inst.states),
        "prior": [float(p) for p in inst.prior],
        "types": [
            {"q": float(t.q), "V": [[float(v) for v in row] for row in t.values]}
            for t in inst.types
        ],
    }


def auction_from_dict(data: dict) -> AuctionInstance:
    inst = AuctionInstance(
        states=tuple(str(s) for s in data["states"]),
        prior=tuple(float(p) for p in data["prior"]),
        types=tuple(
            AuctionType(float(t["q"]), np.array(t["V"], dtype=float))
            for t in data["types"]
        ),
    )
    if inst.n != int(data["n"]):
        raise ValidationError(f"value rows disagree with declared n={data['n']}")
    return inst


def reduction_to_dict(spec: ReductionSpec) -> dict:
    return {
        "objective": objective_to_dict(spec.objective),
        "beta": [float(b) for b in spec.beta],
        "upper": sorted(spec.upper),
        "lower": sorted(spec.lower),
    }


def reduction_from_dict(data: dict) -> ReductionSpec:
    return ReductionSpec(
        objective=objective_from_dict(data["objective"]),
        beta=tuple(float(b) for b in data["beta"]),
        upper=frozenset(int(i) for i in data["upper"]),
        lower=frozenset(int(i) for i in data["lower"]),
    )
