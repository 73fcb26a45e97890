"""JSON encoding of grids, fields, link fields and transform pairs.

Complex numbers are [re, im] pairs; SU(2) matrices are 4 complex entries
row-major.  Documents round-trip bit-exactly through float repr.
"""
from __future__ import annotations

import json

import numpy as np

from .errors import ConfigError
from .lattice import SU2, U1, FormField, Grid, LinkField
from .transform import GaugeGroupConnection, HiggsFieldMap, ProductConnection


def _encode_array(arr: np.ndarray, group: str):
    if group in (U1, "scalar"):
        stacked = np.stack([arr.real, arr.imag], axis=-1)
        return stacked.tolist()
    flat = arr.reshape(arr.shape[:-2] + (4,))
    stacked = np.stack([flat.real, flat.imag], axis=-1)
    return stacked.tolist()


def _decode_array(data, group: str) -> np.ndarray:
    raw = np.asarray(data, dtype=float)
    cplx = raw[..., 0] + 1j * raw[..., 1]
    if group in (U1, "scalar"):
        return cplx
    return cplx.reshape(cplx.shape[:-1] + (2, 2))


def grid_to_doc(grid: Grid) -> dict:
    return {
        "dim": grid.dim,
        "sizes": list(grid.sizes),
        "lengths": list(grid.lengths),
        "base_axes": list(grid.base_axes),
    }


def grid_from_doc(doc: dict) -> Grid:
    return Grid(sizes=tuple(doc["sizes"]), lengths=tuple(doc["lengths"]),
                base_axes=tuple(doc.get("base_axes", ())))


def form_to_doc(f: FormField) -> dict:
    return {
        "grid": grid_to_doc(f.grid),
        "group": f.group,
        "degree": f.degree,
        "components": {",".join(map(str, k)): _encode_array(v, f.group)
                       for k, v in f.comps.items()},
    }


def form_from_doc(doc: dict) -> FormField:
    grid = grid_from_doc(doc["grid"])
    group = doc["group"]
    comps = {}
    for key, data in doc["components"].items():
        axes = tuple(int(x) for x in key.split(",")) if key else ()
        comps[axes] = _decode_array(data, group)
    return FormField(grid, group, int(doc["degree"]), comps)


def links_to_doc(u: LinkField) -> dict:
    return {
        "grid": grid_to_doc(u.grid),
        "group": u.group,
        "links": {str(a): _encode_array(v, u.group) for a, v in u.links.items()},
    }


def links_from_doc(doc: dict) -> LinkField:
    grid = grid_from_doc(doc["grid"])
    group = doc["group"]
    links = {int(a): _decode_array(v, group) for a, v in doc["links"].items()}
    return LinkField(grid, group, links)


def connection_to_doc(w: ProductConnection) -> dict:
    return {
        "kind": "product_connection",
        "grid": grid_to_doc(w.grid),
        "group": w.group,
        "twist": w.twist,
        "components": {str(a): _encode_array(v, w.group) for a, v in w.comps.items()},
    }


def connection_from_doc(doc: dict) -> ProductConnection:
    grid = grid_from_doc(doc["grid"])
    group = doc["group"]
    comps = {int(a): _decode_array(v, group) for a, v in doc["components"].items()}
    return ProductConnection(grid, group, comps, twist=int(doc.get("twist", 0)))


def pair_to_doc(a: GaugeGroupConnection, phi: HiggsFieldMap) -> dict:
    return {
        "kind": "transform_pair",
        "grid": grid_to_doc(a.grid),
        "group": a.group,
        "twist": phi.twist,
        "A": {str(ax): _encode_array(v, a.group) for ax, v in a.comps.items()},
        "Phi": {str(ax): _encode_array(v, phi.group) for ax, v in phi.comps.items()},
    }


def pair_from_doc(doc: dict):
    grid = grid_from_doc(doc["grid"])
    group = doc["group"]
    a = GaugeGroupConnection(grid, group,
                             {int(ax): _decode_array(v, group)
                              for ax, v in doc["A"].items()})
    phi = HiggsFieldMap(grid, group,
                        {int(ax): _decode_array(v, group)
                         for ax, v in doc["Phi"].items()},
                        twist=int(doc.get("twist", 0)))
    return a, phi


def load_document(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)


def save_document(doc: dict, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(doc, fh)


def document_kind(doc: dict) -> str:
    kind = doc.get("kind")
    if kind in ("product_connection", "transform_pair"):
        return kind
    raise ConfigError(f"unknown document kind {kind!r}")
