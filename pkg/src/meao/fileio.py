"""File formats: state JSON, RDM text, partition/overlaps JSON, CSV tables.

All writers are atomic (temp file in the target directory, then rename) and
deterministic; all readers validate invariants and report the offending
line or entry.  JSON carries full float precision; CSV tables round to 6
significant digits.
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from typing import Mapping, Sequence

import numpy as np

from .errors import ValidationError
from .fockspace import WaveFunction, format_config
from .indices import AtomicOverlaps
from .optimize import AtomicPartition, MeaoResult
from .rdm import OneRDM, TwoRDM

__all__ = [
    "write_text_atomic",
    "write_state",
    "read_state",
    "write_rdm1",
    "write_rdm2",
    "read_rdm",
    "write_partition",
    "read_partition",
    "write_meao_result",
    "write_energies_csv",
    "read_energies_csv",
    "write_overlaps",
    "read_overlaps",
    "write_delta_csv",
    "read_delta_csv",
    "write_scan_csv",
]

ORDERING_TAG = "orbital-major-up-down"
ENTRY_TOL = 1e-14


def write_text_atomic(path: str, text: str) -> None:
    """Write text via a temp file and rename, so readers never see partials."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_state(wf: WaveFunction, path: str) -> None:
    entries = [
        {
            "config": format_config(c, wf.n_orbitals),
            "re": float(a.real),
            "im": float(a.imag),
        }
        for c, a in wf.items()
    ]
    doc = {
        "n_orbitals": wf.n_orbitals,
        "ordering": ORDERING_TAG,
        "amplitudes": entries,
    }
    write_text_atomic(path, json.dumps(doc, indent=1) + "\n")


def read_state(path: str) -> WaveFunction:
    doc = _load_json(path)
    for key in ("n_orbitals", "ordering", "amplitudes"):
        if key not in doc:
            raise ValidationError(f"{path}: missing key {key!r}")
    if doc["ordering"] != ORDERING_TAG:
        raise ValidationError(
            f"{path}: ordering {doc['ordering']!r}, expected {ORDERING_TAG!r}"
        )
    n = doc["n_orbitals"]
    if not isinstance(n, int) or n < 1:
        raise ValidationError(f"{path}: bad n_orbitals {n!r}")
    table = {}
    for idx, entry in enumerate(doc["amplitudes"]):
        try:
            cfg = entry["config"]
            amp = complex(float(entry["re"]), float(entry.get("im", 0.0)))
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"{path}: amplitude entry {idx}: {exc}") from exc
        if len(cfg) != 2 * n or set(cfg) - {"0", "1"}:
            raise ValidationError(
                f"{path}: amplitude entry {idx}: bad config {cfg!r}"
            )
        if cfg in table:
            raise ValidationError(
                f"{path}: amplitude entry {idx}: duplicate config {cfg!r}"
            )
        table[cfg] = amp
    try:
        return WaveFunction(n, table)
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}") from exc


def _load_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ValidationError(f"{path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON: {exc}") from exc


def _fmt_val(x: float) -> str:
    return f"{x:.17g}"


def write_rdm2(gamma: TwoRDM, path: str) -> None:
    t = gamma.tensor
    if float(np.max(np.abs(t.imag))) > 1e-12:
        raise ValidationError("text RDM format stores real values only")
    n = gamma.n_orbitals
    lines = [f"RDM2 n={n} sector=ud"]
    for i in range(n):
        for j in range(n):
            for k in range(n):
                for l in range(n):
                    v = float(t[i, j, k, l].real)
                    if abs(v) > ENTRY_TOL:
                        lines.append(f"{i} {j} {k} {l} {_fmt_val(v)}")
    write_text_atomic(path, "\n".join(lines) + "\n")


def write_rdm1(one: OneRDM, path: str) -> None:
    if max(
        float(np.max(np.abs(one.up.imag))), float(np.max(np.abs(one.dn.imag)))
    ) > 1e-12:
        raise ValidationError("text RDM format stores real values only")
    n = one.n_orbitals
    lines = []
    for tag, g in (("u", one.up), ("d", one.dn)):
        lines.append(f"RDM1 n={n} spin={tag}")
        for i in range(n):
            for k in range(n):
                v = float(g[i, k].real)
                if abs(v) > ENTRY_TOL:
                    lines.append(f"{i} {k} {_fmt_val(v)}")
    write_text_atomic(path, "\n".join(lines) + "\n")


def _parse_rdm_header(path: str, lineno: int, line: str) -> dict:
    parts = line.split()
    out = {"kind": parts[0]}
    for tok in parts[1:]:
        if "=" not in tok:
            raise ValidationError(f"{path}:{lineno}: malformed header token {tok!r}")
        key, val = tok.split("=", 1)
        out[key] = val
    if "n" not in out:
        raise ValidationError(f"{path}:{lineno}: header missing n=<count>")
    try:
        out["n"] = int(out["n"])
    except ValueError as exc:
        raise ValidationError(f"{path}:{lineno}: bad orbital count") from exc
    return out


def read_rdm(path: str) -> OneRDM | TwoRDM:
    """Read an RDM text file; the header distinguishes RDM1 from RDM2.

    An RDM1 file may carry one or two spin sections; with a single section
    the same block is used for both spins (closed-shell convention).
    """
    try:
        with open(path) as fh:
            raw = fh.read()
    except OSError as exc:
        raise ValidationError(f"{path}: {exc}") from exc
    lines = raw.splitlines()
    if not lines:
        raise ValidationError(f"{path}: empty file")
    first = lines[0].split()
    if not first or first[0] not in ("RDM1", "RDM2"):
        raise ValidationError(f"{path}:1: expected RDM1 or RDM2 header")
    if first[0] == "RDM2":
        return _read_rdm2(path, lines)
    return _read_rdm1(path, lines)


def _read_rdm2(path: str, lines: Sequence[str]) -> TwoRDM:
    header = _parse_rdm_header(path, 1, lines[0])
    if header.get("sector") != "ud":
        raise ValidationError(f"{path}:1: RDM2 sector must be 'ud'")
    n = header["n"]
    t = np.zeros((n, n, n, n))
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 5:
            raise ValidationError(
                f"{path}:{lineno}: expected 'i j k l value', got {line!r}"
            )
        try:
            i, j, k, l = (int(x) for x in parts[:4])
            v = float(parts[4])
        except ValueError as exc:
            raise ValidationError(f"{path}:{lineno}: {exc}") from exc
        if not all(0 <= x < n for x in (i, j, k, l)):
            raise ValidationError(
                f"{path}:{lineno}: index out of range for n={n}"
            )
        t[i, j, k, l] = v
    dev = np.abs(t - np.transpose(t, (2, 3, 0, 1)))
    if dev.max() > 1e-12:
        i, j, k, l = np.unravel_index(int(np.argmax(dev)), dev.shape)
        raise ValidationError(
            f"{path}: non-Hermitian pair ({i},{j},{k},{l})/"
            f"({k},{l},{i},{j}): deviation {dev.max():.3e}"
        )
    return TwoRDM(t)


def _read_rdm1(path: str, lines: Sequence[str]) -> OneRDM:
    sections: dict[str, np.ndarray] = {}
    n = None
    current = None
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        if line.startswith("RDM1"):
            header = _parse_rdm_header(path, lineno, line)
            spin = header.get("spin")
            if spin not in ("u", "d"):
                raise ValidationError(f"{path}:{lineno}: RDM1 spin must be u or d")
            if spin in sections:
                raise ValidationError(f"{path}:{lineno}: duplicate spin section")
            if n is None:
                n = header["n"]
            elif n != header["n"]:
                raise ValidationError(f"{path}:{lineno}: inconsistent n")
            current = np.zeros((n, n))
            sections[spin] = current
            continue
        if current is None:
            raise ValidationError(f"{path}:{lineno}: data before header")
        parts = line.split()
        if len(parts) != 3:
            raise ValidationError(
                f"{path}:{lineno}: expected 'i k value', got {line!r}"
            )
        try:
            i, k = int(parts[0]), int(parts[1])
            v = float(parts[2])
        except ValueError as exc:
            raise ValidationError(f"{path}:{lineno}: {exc}") from exc
        if not (0 <= i < n and 0 <= k < n):
            raise ValidationError(f"{path}:{lineno}: index out of range for n={n}")
        current[i, k] = v
    up = sections.get("u", sections.get("d"))
    dn = sections.get("d", sections.get("u"))
    one = OneRDM(up=up, dn=dn)
    try:
        one.validate()
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}") from exc
    return one


def write_partition(partition: AtomicPartition, path: str) -> None:
    doc = {
        "n_orbitals": partition.n_orbitals,
        "atoms": [
            {"label": label, "orbitals": list(orbs)}
            for label, orbs in partition.atoms
        ],
    }
    write_text_atomic(path, json.dumps(doc, indent=1) + "\n")


def read_partition(path: str) -> AtomicPartition:
    doc = _load_json(path)
    for key in ("n_orbitals", "atoms"):
        if key not in doc:
            raise ValidationError(f"{path}: missing key {key!r}")
    try:
        atoms = tuple(
            (entry["label"], tuple(entry["orbitals"])) for entry in doc["atoms"]
        )
        return AtomicPartition(int(doc["n_orbitals"]), atoms)
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"{path}: malformed atoms entry: {exc}") from exc
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}") from exc


def write_meao_result(result: MeaoResult, path: str) -> None:
    doc = {
        "n_orbitals": result.schedule.n_orbitals,
        "converged": result.converged,
        "f_initial": result.f_initial,
        "f_final": result.f_final,
        "sweeps": result.sweeps,
        "accepted_steps": result.accepted_steps,
        "history": list(result.history),
        "steps": [[k, l, theta] for k, l, theta in result.schedule.steps],
        "u": [list(row) for row in result.u_matrix],
    }
    write_text_atomic(path, json.dumps(doc, indent=1) + "\n")


def write_energies_csv(energies: Sequence[float], path: str) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["index", "energy"])
    for i, e in enumerate(energies):
        writer.writerow([i, f"{float(e):.6g}"])
    write_text_atomic(path, buf.getvalue())


def read_energies_csv(path: str) -> np.ndarray:
    rows = _read_csv(path, ("index", "energy"))
    try:
        return np.array([float(r["energy"]) for r in rows])
    except ValueError as exc:
        raise ValidationError(f"{path}: {exc}") from exc


def write_overlaps(overlaps: AtomicOverlaps, path: str) -> None:
    doc = {
        "occupations": [float(x) for x in overlaps.occupations],
        "atoms": [
            {"label": label, "S": [[float(x) for x in row] for row in s]}
            for label, s in overlaps.atoms
        ],
    }
    write_text_atomic(path, json.dumps(doc, indent=1) + "\n")


def read_overlaps(path: str, resolution_tol: float = 1e-8) -> AtomicOverlaps:
    """Read overlaps JSON; the atomic matrices must resolve the identity."""
    doc = _load_json(path)
    for key in ("occupations", "atoms"):
        if key not in doc:
            raise ValidationError(f"{path}: missing key {key!r}")
    try:
        overlaps = AtomicOverlaps(
            np.array(doc["occupations"], dtype=float),
            tuple(
                (entry["label"], np.array(entry["S"], dtype=float))
                for entry in doc["atoms"]
            ),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"{path}: malformed overlaps: {exc}") from exc
    defect = overlaps.resolution_defect()
    if defect > resolution_tol:
        raise ValidationError(
            f"{path}: atomic overlaps do not resolve the identity "
            f"(defect {defect:.3e} > {resolution_tol})"
        )
    return overlaps


def write_delta_csv(table: Mapping[tuple[str, str], float], path: str) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["atom_a", "atom_b", "delta"])
    for (a, b), v in table.items():
        writer.writerow([a, b, f"{float(v):.6g}"])
    write_text_atomic(path, buf.getvalue())


def read_delta_csv(path: str) -> dict[tuple[str, str], float]:
    rows = _read_csv(path, ("atom_a", "atom_b", "delta"))
    table: dict[tuple[str, str], float] = {}
    for r in rows:
        key = (r["atom_a"], r["atom_b"])
        if key in table or key[::-1] in table:
            raise ValidationError(f"{path}: duplicate pair {key}")
        try:
            table[key] = float(r["delta"])
        except ValueError as exc:
            raise ValidationError(f"{path}: {exc}") from exc
    return table


def _read_csv(path: str, expected_header: tuple[str, ...]) -> list[dict]:
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or tuple(reader.fieldnames) != expected_header:
                raise ValidationError(
                    f"{path}: expected header {','.join(expected_header)}"
                )
            return list(reader)
    except OSError as exc:
        raise ValidationError(f"{path}: {exc}") from exc


def write_scan_csv(rows: Sequence[Mapping[str, float]], path: str) -> None:
    """Scan table CSV; the header names the parameter and analysis columns."""
    if not rows:
        raise ValidationError("scan produced no rows")
    header = list(rows[0].keys())
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([f"{float(row[k]):.6g}" for k in header])
    write_text_atomic(path, buf.getvalue())
