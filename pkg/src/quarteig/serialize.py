"""JSON and CSV emission for specs, samples, and reports.

Reals are serialized as decimal strings with 17 significant digits, enough
for a float64 to round-trip bit-exactly, and documents are dumped with
sorted keys so identical inputs produce identical bytes.  Readers rebuild
the value types; derived fields present in a document (the piece table of a
potential spec) are informational and re-derived on load.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .construct import (
    EigenfunctionSample,
    EmbeddedPotentialSpec,
    PointInteraction,
    SingularExample,
)
from .verify import SpectralReport

REAL_FORMAT = ".17g"


def real_str(x: float) -> str:
    return format(float(x), REAL_FORMAT)


# ---------------------------------------------------------------------------
# JSON documents


def singular_document(example: SingularExample) -> dict:
    return {
        "amplitude": real_str(example.amplitude),
        "interfaces": [
            {"c": real_str(pi.c), "beta": real_str(pi.beta), "gamma": real_str(pi.gamma)}
            for pi in example.interfaces
        ],
        "lambda": real_str(example.lam),
        "parity": example.parity,
    }


def singular_from_document(doc: dict) -> SingularExample:
    parity = str(doc["parity"])
    if parity not in ("odd", "even"):
        raise ValueError(f"parity must be 'odd' or 'even', got {parity!r}")
    raw = doc["interfaces"]
    if len(raw) != 2:
        raise ValueError("exactly two interfaces expected")
    interfaces = tuple(
        PointInteraction(c=float(d["c"]), beta=float(d["beta"]), gamma=float(d["gamma"]))
        for d in raw
    )
    return SingularExample(
        amplitude=float(doc["amplitude"]),
        interfaces=interfaces,
        lam=float(doc["lambda"]),
        parity=parity,
    )


def piecewise_document(spec: EmbeddedPotentialSpec) -> dict:
    return {
        "k0": real_str(spec.k0),
        "a": real_str(spec.a),
        "b": real_str(spec.b),
        "A": real_str(spec.A),
        "B": real_str(spec.B),
        "zeta": real_str(spec.zeta),
        "pieces": [
            [real_str(lo), real_str(hi), real_str(value)]
            for lo, hi, value in spec.pieces.pieces
        ],
        "even_extension": bool(spec.even_extension),
    }


def piecewise_from_document(doc: dict) -> EmbeddedPotentialSpec:
    return EmbeddedPotentialSpec(
        k0=float(doc["k0"]),
        a=float(doc["a"]),
        b=float(doc["b"]),
        A=float(doc["A"]),
        B=float(doc["B"]),
        zeta=float(doc["zeta"]),
        even_extension=bool(doc["even_extension"]),
    )


SECH_WELL_TOKEN = "-2*sech(x)^2"


def hsquare_document(X: float, n: int, bound_energies) -> dict:
    return {
        "potential": SECH_WELL_TOKEN,
        "bound_energies": [real_str(e) for e in bound_energies],
        "X": real_str(X),
        "n": int(n),
    }


def report_document(report: SpectralReport) -> dict:
    return {
        "target": real_str(report.target),
        "nearest": real_str(report.nearest),
        "gap": real_str(report.gap),
        "ipr": real_str(report.ipr),
        "decay_fit": real_str(report.decay_fit),
        "verdict": report.verdict.value,
        "crowded": bool(report.crowded),
        "non_localized_below": int(report.non_localized_below),
        "non_localized_above": int(report.non_localized_above),
        "eigenvalues": [real_str(w) for w in report.eigenvalues],
    }


def dump_json(doc: dict, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n")
    return path


def load_json(path) -> dict:
    return json.loads(Path(path).read_text())


# ---------------------------------------------------------------------------
# CSV


def write_eigenfunction_csv(path, sample: EigenfunctionSample) -> Path:
    path = Path(path)
    lines = [f"# lambda={real_str(sample.lam)}"]
    lines.extend(
        f"{real_str(x)},{real_str(v)}" for x, v in zip(sample.grid, sample.values)
    )
    path.write_text("\n".join(lines) + "\n")
    return path


def read_eigenfunction_csv(path) -> tuple[np.ndarray, np.ndarray, float]:
    lines = Path(path).read_text().splitlines()
    if not lines or not lines[0].startswith("# lambda="):
        raise ValueError("missing '# lambda=' header")
    lam = float(lines[0].split("=", 1)[1])
    pairs = [line.split(",") for line in lines[1:] if line]
    grid = np.array([float(a) for a, _ in pairs])
    values = np.array([float(b) for _, b in pairs])
    return grid, values, lam


def write_eigenvalue_csv(path, values) -> Path:
    path = Path(path)
    path.write_text("\n".join(real_str(v) for v in values) + "\n")
    return path


def write_scan_csv(path, lams, mismatches) -> Path:
    path = Path(path)
    lines = ["# lambda,mismatch"]
    lines.extend(f"{real_str(l)},{real_str(m)}" for l, m in zip(lams, mismatches))
    path.write_text("\n".join(lines) + "\n")
    return path


def write_race_csv(path, bs, z1s, z3s) -> Path:
    """B,z1,z3 rows; a zero that does not exist at that B is an empty field."""
    path = Path(path)
    lines = ["# B,z1,z3"]
    for b, z1, z3 in zip(bs, z1s, z3s):
        f1 = real_str(z1) if math.isfinite(z1) else ""
        f3 = real_str(z3) if math.isfinite(z3) else ""
        lines.append(f"{real_str(b)},{f1},{f3}")
    path.write_text("\n".join(lines) + "\n")
    return path


def read_race_csv(path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    lines = Path(path).read_text().splitlines()
    bs, z1s, z3s = [], [], []
    for line in lines:
        if not line or line.startswith("#"):
            continue
        b, z1, z3 = line.split(",")
        bs.append(float(b))
        z1s.append(float(z1) if z1 else math.inf)
        z3s.append(float(z3) if z3 else math.inf)
    return np.array(bs), np.array(z1s), np.array(z3s)
