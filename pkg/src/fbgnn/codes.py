"""Built-in test codes and loading of user-supplied ones.

The named codes are constructible from first principles: the Steane code and
hypergraph products of small classical codes.  User codes come either from a
pair of alist files or from a manifest (a plain-text file with two lines: the
hx alist path, then the hz alist path, relative to the manifest).
"""

from __future__ import annotations

import os

import numpy as np

from .alist import load_alist
from .css import CssCode, hypergraph_product


def hamming_7_4() -> np.ndarray:
    """3x7 check matrix whose columns are the binary numbers 1..7."""
    h = np.zeros((3, 7), dtype=np.uint8)
    for col in range(7):
        for row in range(3):
            h[row, col] = ((col + 1) >> row) & 1
    return h


def steane() -> CssCode:
    h = hamming_7_4()
    return CssCode(h, h)


def hgp_rep2() -> CssCode:
    """[[5,1]] hypergraph product of the length-2 repetition check [1 1] with itself."""
    h = np.array([[1, 1]], dtype=np.uint8)
    return hypergraph_product(h, h)


def hgp_hamming() -> CssCode:
    """[[58,16]] hypergraph product of the Hamming(7,4) check matrix with itself."""
    h = hamming_7_4()
    return hypergraph_product(h, h)


NAMED_CODES = {
    "steane": steane,
    "hgp-rep2": hgp_rep2,
    "hgp-hamming": hgp_hamming,
}


def load_manifest(path) -> CssCode:
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip() and not ln.startswith("#")]
    if len(lines) != 2:
        raise ValueError("manifest must list exactly two alist paths (hx, hz)")
    base = os.path.dirname(os.path.abspath(path))
    hx = load_alist(os.path.join(base, lines[0]))
    hz = load_alist(os.path.join(base, lines[1]))
    return CssCode(hx, hz)


def resolve_code(name_or_path: str) -> CssCode:
    """Named code, manifest path, or 'HX.alist:HZ.alist' pair."""
    if name_or_path in NAMED_CODES:
        return NAMED_CODES[name_or_path]()
    if ":" in name_or_path and not os.path.exists(name_or_path):
        hx_path, hz_path = name_or_path.split(":", 1)
        return CssCode(load_alist(hx_path), load_alist(hz_path))
    if os.path.exists(name_or_path):
        return load_manifest(name_or_path)
    raise ValueError(
        "unknown code %r (named codes: %s)" % (name_or_path, ", ".join(sorted(NAMED_CODES)))
    )
