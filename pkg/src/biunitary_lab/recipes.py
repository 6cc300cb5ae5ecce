"""JSON serialization of gates and construction recipes.

Gate documents: {"kind", "dims", "entries": [[re, im], ...]} with the
entries of the matrix (or tensor) in row-major order. Floats are written
with repr precision, so a round trip is exact.

Recipe documents: {"construction": name, "params": {...},
"component_refs": {slot: ref}}. A ref is a catalog name ("swap"), a dict
{"catalog": name, ...arguments}, or an inline gate document. Random
components draw from a generator seeded by (seed, slot index) unless the
ref carries its own seed.
"""
from __future__ import annotations

import json

import jsonschema
import numpy as np

from . import catalog as cat
from . import compose as comp

GATE_KINDS = ("gate2", "trigate", "tuirf", "matrix", "controlled", "tensor")

GATE_SCHEMA = {
    "type": "object",
    "required": ["kind", "dims", "entries"],
    "properties": {
        "kind": {"enum": list(GATE_KINDS)},
        "dims": {"type": "array", "items": {"type": "integer", "minimum": 1}},
        "entries": {"type": "array",
                    "items": {"type": "array", "minItems": 2, "maxItems": 2,
                              "items": {"type": "number"}}},
    },
}

RECIPE_SCHEMA = {
    "type": "object",
    "required": ["construction"],
    "properties": {
        "construction": {"type": "string"},
        "params": {"type": "object"},
        "component_refs": {"type": "object"},
        "seed": {"type": "integer"},
    },
}


class RecipeError(ValueError):
    """Schema or content problem in a recipe; ``path`` names the offending field."""

    def __init__(self, msg, path=""):
        super().__init__(f"{path}: {msg}" if path else msg)
        self.path = path


# ---------------------------------------------------------------- gates

def gate_to_json(obj) -> dict:
    if isinstance(obj, cat.Gate2):
        kind, dims, data = "gate2", [obj.d_left, obj.d_right], obj.matrix
    elif isinstance(obj, comp.NestedKagome):
        g = obj.dense()
        kind, dims, data = "gate2", [g.d_left, g.d_right], g.matrix
    elif isinstance(obj, comp.TriGate):
        kind, dims, data = "trigate", [obj.q] * 3, obj.matrix
    elif isinstance(obj, comp.TuirfGate):
        kind, dims, data = "tuirf", list(obj.tensor.shape), obj.tensor
    elif isinstance(obj, comp.ControlledFamily):
        kind, dims, data = "controlled", list(obj.tensor.shape), obj.tensor
    else:
        a = np.asarray(obj, dtype=complex)
        kind = "matrix" if a.ndim == 2 else "tensor"
        dims, data = list(a.shape), a
    flat = np.asarray(data, dtype=complex).reshape(-1)
    return {"kind": kind, "dims": [int(x) for x in dims],
            "entries": [[float(z.real), float(z.imag)] for z in flat]}


def gate_from_json(doc):
    try:
        jsonschema.validate(doc, GATE_SCHEMA)
    except jsonschema.ValidationError as e:
        raise RecipeError(e.message, "/".join(str(p) for p in e.absolute_path)) from None
    z = np.array([complex(r, i) for r, i in doc["entries"]])
    dims = doc["dims"]
    kind = doc["kind"]
    if kind == "gate2":
        dl, dr = dims
        n = dl * dr
        if z.size != n * n:
            raise RecipeError(f"expected {n * n} entries, got {z.size}", "entries")
        return cat.Gate2.from_matrix(z.reshape(n, n), dl, dr)
    if z.size != int(np.prod(dims)) * (int(np.prod(dims)) if kind == "trigate" else 1):
        raise RecipeError(f"entry count {z.size} does not match dims {dims}", "entries")
    if kind == "trigate":
        q = dims[0]
        return comp.TriGate(q, z.reshape([q] * 6))
    if kind == "tuirf":
        return comp.TuirfGate(dims[0], z.reshape(dims))
    if kind == "controlled":
        return comp.ControlledFamily(dims[1], z.reshape(dims))
    return z.reshape(dims)


def dump_gate(obj, path):
    with open(path, "w") as fh:
        json.dump(gate_to_json(obj), fh)


def load_gate(path):
    with open(path) as fh:
        return gate_from_json(json.load(fh))


# ---------------------------------------------------------------- components

def _rng(ref, seed, slot):
    s = ref.get("seed") if isinstance(ref, dict) else None
    return np.random.default_rng(s if s is not None else [seed, slot])


def _catalog_component(name, args, rng):
    q = args.get("q", 2)
    table = {
        "swap": lambda: cat.swap_gate(q),
        "identity": lambda: cat.identity_gate(q),
        "cnot": cat.cnot_gate,
        "cz": cat.cz_gate,
        "haar": lambda: cat.haar_gate(q, args.get("q_right", q), rng),
        "random_du": lambda: cat.random_du_gate(q, rng),
        "phased_swap": lambda: cat.phased_swap_gate(q, rng),
        "swap_like_du": lambda: comp.swap_like_du(args["qa"], args["qb"], rng),
        "fourier": lambda: cat.fourier_chm(q),
        "h0": lambda: cat.qubit_chm_pair(0.0)[0],
        "h1": lambda: cat.qubit_chm_pair(args.get("phi", 0.0))[1],
        "random_chm": lambda: cat.random_chm(q, rng),
        "weyl_ueb": lambda: cat.weyl_ueb(q),
        "cyclic_qls": lambda: cat.cyclic_qls(q),
        "rotated_qls": lambda: cat.rotated_qubit_qls(args["theta"]),
        "phased_cross": lambda: cat.random_phased_cross(q, rng),
        "shift_cross": lambda: cat.phased_shift_cross(q),
        "random_hs": lambda: comp.random_hs_chm(args.get("q1", 2), args.get("q2", 2), rng),
    }
    if name == "multilayer":
        j = _resolve(args["J"], rng, 0, "J")
        k = _resolve(args["K"], rng, 1, "K")
        return comp.multilayer_chm(args["kind"], j, k)
    if name not in table:
        raise RecipeError(f"unknown catalog component {name!r}")
    return table[name]()


def _resolve(ref, seed_or_rng, slot, path):
    if isinstance(ref, list):
        return [_resolve(r, seed_or_rng, (slot, i), f"{path}/{i}") for i, r in enumerate(ref)]
    if isinstance(seed_or_rng, np.random.Generator):
        rng = seed_or_rng
    else:
        rng = _rng(ref, seed_or_rng, slot if isinstance(slot, int) else hash(slot) % 2 ** 31)
    try:
        if isinstance(ref, str):
            return _catalog_component(ref, {}, rng)
        if isinstance(ref, dict) and "entries" in ref:
            return gate_from_json(ref)
        if isinstance(ref, dict) and "catalog" in ref:
            return _catalog_component(ref["catalog"], ref, rng)
    except KeyError as e:
        raise RecipeError(f"missing argument {e}", path) from None
    except RecipeError as e:
        raise RecipeError(str(e), path) from None
    raise RecipeError("component must be a catalog reference (name or dict) or a gate document", path)


def _normalize(recipe):
    """Fold shorthand keys ({"construction", "base", "q"}) into params/component_refs."""
    r = dict(recipe)
    params = dict(r.pop("params", {}) or {})
    refs = dict(r.pop("component_refs", {}) or {})
    name = r.pop("construction")
    seed = r.pop("seed", None)
    for k, v in r.items():
        params.setdefault(k, v)
    return name, params, refs, seed


def _slots(refs, names, base, path="component_refs"):
    out = []
    for i, n in enumerate(names):
        if n in refs:
            out.append((refs[n], i, f"{path}/{n}"))
        elif base is not None:
            out.append((base, i, "params/base"))
        else:
            raise RecipeError(f"missing component {n!r}", path)
    return out


def build_from_recipe(recipe, seed=0):
    """Rebuild the object a recipe describes. Same recipe and seed give identical bits."""
    try:
        jsonschema.validate(recipe, RECIPE_SCHEMA)
    except jsonschema.ValidationError as e:
        raise RecipeError(e.message, "/".join(str(p) for p in e.absolute_path) or "construction") from None
    name, params, refs, rseed = _normalize(recipe)
    seed = rseed if rseed is not None else seed
    base = params.get("base")
    q = params.get("q", 2)
    if isinstance(base, str):
        base = {"catalog": base, "q": q}

    def get(names, default_base=base):
        return [_resolve(r, seed, i, p) for r, i, p in _slots(refs, names, default_base)]

    def mat(x):
        return x.matrix if hasattr(x, "matrix") and not isinstance(x, np.ndarray) else x

    if name == "kagome_du2_unshaded":
        q1 = params.get("q1", q)
        q2 = params.get("q2", q)
        if q1 * q2 > 64:
            # avoid forming huge components before the guard triggers
            raise comp.GuardError(f"site dimension q1*q2 = {q1 * q2} gives a gate matrix beyond "
                                  f"the guard {comp.MAX_MATRIX_DIM}")
        u1, u2, u3 = get(["U1", "U2", "U3"])
        return comp.kagome_du2_unshaded(mat(u1), mat(u2), mat(u3), q1, q2)
    if name == "kagome_triunitary":
        return comp.kagome_triunitary(*get(["U1", "U2", "U3"]))
    if name == "chm_honeycomb_gate":
        return comp.chm_honeycomb_gate(*get(["H1", "H2", "H3"]))
    if name == "chm_triangular_gate":
        return comp.chm_triangular_gate(*get(["H1", "H2", "H3", "H4"]))
    if name == "ueb_du2_gate":
        return comp.ueb_du2_gate(*get(["V1", "V2", "V3"]))
    if name == "ueb_trigate":
        return comp.ueb_trigate(*get(["V1", "V2", "V3"]))
    if name == "qls_controlled_gate":
        return comp.qls_controlled_gate(*get(["Q"]))
    if name == "qls_du2_block":
        qls, h = get(["Q", "H"])
        return comp.qls_du2_block(qls, h)
    if name == "tuirf_from_crosses":
        return comp.tuirf_from_crosses(*get(["F1", "F2", "F3"]))
    if name == "du_from_chm":
        return cat.du_from_chm(*get(["K1", "K2", "K3", "K4"]))
    if name == "nested_kagome":
        signs = params.get("signs", "+")
        nk = comp.nested_kagome(signs, None, q, seed)
        return nk.dense()
    if name == "multilayer_du_gate":
        return comp.multilayer_du_gate(*get(["H1", "H2", "H3", "H4"]))
    if name == "multilayer_du2_gate":
        v = params.get("variant", 1)
        slots = ["H", "K", "Kt"] if v == 1 else ["H", "K", "H2"]
        comps = get(slots, None)
        if v == 1:
            return comp.multilayer_du2_gate(1, comps[0], comps[1], kt=comps[2])
        return comp.multilayer_du2_gate(v, comps[0], comps[1], h2=comps[2])
    if name == "multilayer_du3_gate":
        h, k = get(["H", "K"], None)
        return comp.multilayer_du3_gate(params.get("variant", "DUxDiag"), h, k)
    if name == "catalog":
        item = params.get("item")
        if item is None:
            raise RecipeError("missing catalog item", "params/item")
        return _resolve({"catalog": item, **params}, seed, 0, "params")
    raise RecipeError(f"unknown construction {name!r}", "construction")
