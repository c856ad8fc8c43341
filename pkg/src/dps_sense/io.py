"""File output and interchange formats.

All writers are deterministic (fixed float formats, no timestamps) and
atomic (write to a temp file in the same directory, then rename), so that
identical inputs give byte-identical files.  Timestamps belong in the
sidecar run log only.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

import numpy as np

from .dps import Sweep
from .errors import InvalidInputError
from .twoport import SParams

__all__ = [
    "atomic_write_text",
    "write_json",
    "write_sweep_csv",
    "write_touchstone",
    "read_touchstone",
    "write_waveform_csv",
    "write_matrix_csv",
    "write_sensitivity_map_csv",
]

_FLOAT_FMT = "{:.12e}"


def _fmt(x: float) -> str:
    return _FLOAT_FMT.format(float(x))


def atomic_write_text(path, text: str) -> None:
    """Write text via a temp file + rename in the destination directory."""
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    tmp = p.with_name(p.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, p)


def write_json(path, obj) -> None:
    """Deterministic JSON: sorted keys, two-space indent, trailing newline."""
    atomic_write_text(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def write_sweep_csv(path, sweep: Sweep) -> None:
    """Sweep as CSV; masked (pole-proximate) rows keep their frequency and
    flag but carry nan data."""
    phase = sweep.s21_phase_deg_unwrapped()
    db = sweep.s21_db()
    lines = [
        "freq_hz,s11_re,s11_im,s21_re,s21_im,s21_db,s21_phase_deg_unwrapped,masked_flag"
    ]
    s = sweep.s
    for i, f in enumerate(sweep.frequency_hz):
        lines.append(
            ",".join(
                [
                    _fmt(f),
                    _fmt(np.real(s.s11[i])),
                    _fmt(np.imag(s.s11[i])),
                    _fmt(np.real(s.s21[i])),
                    _fmt(np.imag(s.s21[i])),
                    _fmt(db[i]),
                    _fmt(phase[i]),
                    str(int(sweep.masked[i])),
                ]
            )
        )
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_touchstone(path, sweep: Sweep) -> None:
    """Two-port Touchstone v1.1 (`# HZ S RI R <z0>`), one line per frequency.

    The format has no mask concept, so pole-proximate rows are omitted here;
    the CSV writer carries them with an explicit flag.
    """
    z0 = sweep.reference_impedance
    lines = ["! two-port sweep written by dps-sense", f"# HZ S RI R {z0:g}"]
    s = sweep.s
    for i, f in enumerate(sweep.frequency_hz):
        if sweep.masked[i]:
            continue
        row = [
            _fmt(f),
            _fmt(np.real(s.s11[i])), _fmt(np.imag(s.s11[i])),
            _fmt(np.real(s.s21[i])), _fmt(np.imag(s.s21[i])),
            _fmt(np.real(s.s12[i])), _fmt(np.imag(s.s12[i])),
            _fmt(np.real(s.s22[i])), _fmt(np.imag(s.s22[i])),
        ]
        lines.append(" ".join(row))
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_touchstone(path) -> Sweep:
    """Read a two-port Touchstone file written in HZ S RI format."""
    z0 = 50.0
    freqs: list[float] = []
    data: list[list[float]] = []
    saw_option = False
    for raw in Path(path).read_text().splitlines():
        line = raw.split("!", 1)[0].strip()
        if not line:
            continue
        if line.startswith("#"):
            tokens = line[1:].split()
            if [t.upper() for t in tokens[:3]] != ["HZ", "S", "RI"]:
                raise InvalidInputError(
                    f"{path}: unsupported Touchstone option line {line!r}"
                )
            if len(tokens) >= 5 and tokens[3].upper() == "R":
                z0 = float(tokens[4])
            saw_option = True
            continue
        values = [float(tok) for tok in line.split()]
        if len(values) != 9:
            raise InvalidInputError(
                f"{path}: expected 9 columns per data line, got {len(values)}"
            )
        freqs.append(values[0])
        data.append(values[1:])
    if not saw_option or not freqs:
        raise InvalidInputError(f"{path}: not a usable Touchstone file")
    arr = np.asarray(data)
    f = np.asarray(freqs)
    sp = SParams(
        s11=arr[:, 0] + 1j * arr[:, 1],
        s21=arr[:, 2] + 1j * arr[:, 3],
        s12=arr[:, 4] + 1j * arr[:, 5],
        s22=arr[:, 6] + 1j * arr[:, 7],
        reference_impedance=z0,
    )
    return Sweep(
        frequency_hz=f, s=sp, masked=np.zeros(f.shape, dtype=bool), n_cells=1
    )


def write_waveform_csv(path, waveform) -> None:
    """Two-column CSV: time_s, amplitude."""
    lines = ["time_s,amplitude"]
    t = waveform.times()
    for i in range(waveform.samples.size):
        lines.append(f"{_fmt(t[i])},{_fmt(waveform.samples[i])}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_matrix_csv(path, row_label: str, row_values, col_labels, matrix) -> None:
    """Matrix CSV with a labeled header row and label column."""
    lines = [",".join([row_label] + [str(c) for c in col_labels])]
    m = np.asarray(matrix)
    for label, row in zip(row_values, m):
        lines.append(",".join([str(label)] + [_fmt(v) for v in row]))
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_sensitivity_map_csv(path, smap) -> None:
    """Sensitivity map as CSV: rows = frequencies, columns = permittivities."""
    cols = [f"eps_{e:g}" for e in smap.eps_grid]
    lines = [",".join(["freq_hz"] + cols)]
    for i, f in enumerate(smap.frequencies):
        lines.append(",".join([_fmt(f)] + [_fmt(v) for v in smap.s_dps[i]]))
    atomic_write_text(path, "\n".join(lines) + "\n")
