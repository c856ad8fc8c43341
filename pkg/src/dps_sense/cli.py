"""Command-line pipeline: `dps-sense <command> --config <file> [options]`.

Commands
--------
extract   lumped-element values for a given MUT, with reference comparison
sweep     S-parameter sweeps per water content (Touchstone + CSV)
band      closed-form vs numeric band edges and the discrepancy report
sense     sensitivity map, optimal excitation frequency, VWC-referred value
invert    batch inversion of detector readings (CSV in, JSON out)
pulse     pulse-vs-sine propagation study over the buried line

Every command is deterministic: identical configs give byte-identical data
files.  Wall-clock information goes only to the `run.log` sidecar.  Exit
codes: 0 success, 1 model-domain failure, 2 I/O or configuration failure.
"""

from __future__ import annotations

import argparse
import datetime
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import io as dio
from .configfile import (
    bundled_data_path,
    geometry_from_entries,
    load_geometry,
    parse_config_file,
    parse_value,
)
from .constants import Z0_DEFAULT
from .dps import (
    DEFAULT_INDUCTORS,
    REFERENCE_CIRCUIT,
    band_edges_numeric,
    dual_band_report,
    s_parameters,
)
from .dispersion import PULSE_WIDTHS_S, SINE_HZ, pulse_distortion_study
from .errors import ConfigError, DpsSenseError
from .geometry import GeometrySpec, MutPermittivity, extract_circuit, geometry_hash
from .sensitivity import dps_sensitivity, sensitivity_map, vwc_referred_sensitivity
from .soilcal import (
    DEFAULT_SAND_CURVE,
    DetectorReading,
    SoilCalibrationCurve,
    estimation_error,
    invert_permittivity,
    permittivity_from_vwc,
)

__all__ = ["RunConfig", "main", "console_entry"]


@dataclass
class RunConfig:
    """Resolved run settings for one CLI invocation."""

    geometry: GeometrySpec
    out_dir: Path
    inductors: dict = field(default_factory=lambda: dict(DEFAULT_INDUCTORS))
    f_exc: float = 114e6
    n_cells: int = 1
    quantize: bool = False
    eps_m: MutPermittivity = field(default_factory=lambda: MutPermittivity(1.0, 0.0))
    vwc_list: tuple = (0.0, 10.0, 20.0, 30.0)
    sweep_f_start: float = 10e6
    sweep_f_stop: float = 5e9
    sweep_points: int = 2001
    sense_eps: tuple = (5.0, 10.0, 15.0, 20.0)
    sense_f_start: float | None = None
    sense_f_stop: float | None = None
    sense_points: int = 61
    line_length: float = 0.6
    pulse_window: float = 25e-9
    curve: SoilCalibrationCurve = field(default_factory=lambda: DEFAULT_SAND_CURVE)
    readings: Path | None = None
    config_path: Path | None = None

    @classmethod
    def load(cls, config_path, *, out=None, fexc=None, cells=None,
             quantize=None, readings=None) -> "RunConfig":
        path = Path(config_path)
        entries = parse_config_file(path)
        base = path.parent

        def num(key, default=None):
            if key not in entries:
                return default
            return parse_value(entries[key], field=key)

        if "geometry" in entries:
            geometry = load_geometry(base / entries["geometry"])
        else:
            geometry = geometry_from_entries(entries, source=str(path))

        inductors = dict(DEFAULT_INDUCTORS)
        if "L" in entries:
            inductors["L"] = num("L")
        if "L_c" in entries:
            inductors["L_c"] = num("L_c")

        curve = DEFAULT_SAND_CURVE
        if "calibration" in entries:
            curve = SoilCalibrationCurve.from_csv(base / entries["calibration"])

        def num_list(key, default):
            if key not in entries:
                return default
            return tuple(
                parse_value(tok.strip(), field=key)
                for tok in entries[key].split(",") if tok.strip()
            )

        cfg = cls(
            geometry=geometry,
            out_dir=Path(entries.get("out", "out")),
            inductors=inductors,
            f_exc=num("f_exc", 114e6),
            n_cells=int(num("n_cells", 1)),
            quantize=entries.get("quantize", "false").lower() in ("1", "true", "yes"),
            eps_m=MutPermittivity(num("eps_m_real", 1.0), num("eps_m_imag", 0.0)),
            vwc_list=num_list("vwc_list", (0.0, 10.0, 20.0, 30.0)),
            sweep_f_start=num("sweep_f_start", 10e6),
            sweep_f_stop=num("sweep_f_stop", 5e9),
            sweep_points=int(num("sweep_points", 2001)),
            sense_eps=num_list("sense_eps", (5.0, 10.0, 15.0, 20.0)),
            sense_f_start=num("sense_f_start", None),
            sense_f_stop=num("sense_f_stop", None),
            sense_points=int(num("sense_points", 61)),
            line_length=num("line_length", 0.6),
            pulse_window=num("pulse_window", 25e-9),
            curve=curve,
            config_path=path,
        )
        if out is not None:
            cfg.out_dir = Path(out)
        if fexc is not None:
            cfg.f_exc = float(fexc)
        if cells is not None:
            cfg.n_cells = int(cells)
        if quantize:
            cfg.quantize = True
        if readings is not None:
            cfg.readings = Path(readings)
        return cfg

    def log(self, command: str, notes: list) -> None:
        stamp = datetime.datetime.now().isoformat(timespec="seconds")
        lines = [f"[{stamp}] dps-sense {command}", f"config: {self.config_path}"]
        lines += [f"  {n}" for n in notes]
        log_path = self.out_dir / "run.log"
        log_path.parent.mkdir(parents=True, exist_ok=True)
        with open(log_path, "a") as fh:
            fh.write("\n".join(lines) + "\n")


def _complex_dict(value) -> dict:
    v = complex(value)
    return {"re": v.real, "im": v.imag}


def cmd_extract(cfg: RunConfig) -> int:
    circuit = extract_circuit(cfg.geometry, cfg.eps_m, cfg.inductors)
    ref = REFERENCE_CIRCUIT
    comparison = {
        name: {
            "extracted": _complex_dict(getattr(circuit, name)),
            "reference": _complex_dict(getattr(ref, name)),
            "ratio_re": complex(getattr(circuit, name)).real
            / complex(getattr(ref, name)).real,
        }
        for name in ("L", "C_i", "C_u", "C_d", "C_c", "L_c")
    }
    report = {
        "geometry_hash": geometry_hash(cfg.geometry),
        "mut": {"eps_real": cfg.eps_m.eps_real, "eps_imag": cfg.eps_m.eps_imag},
        "circuit": {
            name: _complex_dict(getattr(circuit, name))
            for name in ("L", "C_i", "C_u", "C_d", "C_c", "L_c")
        },
        "reference_comparison": comparison,
    }
    dio.write_json(cfg.out_dir / "extract.json", report)
    cfg.log("extract", [f"wrote {cfg.out_dir / 'extract.json'}"])
    return 0


def _sweep_grid(cfg: RunConfig) -> np.ndarray:
    return np.linspace(cfg.sweep_f_start, cfg.sweep_f_stop, cfg.sweep_points)


def cmd_sweep(cfg: RunConfig) -> int:
    grid = _sweep_grid(cfg)
    notes = []
    for vwc in cfg.vwc_list:
        mut = permittivity_from_vwc(cfg.curve, vwc)
        circuit = extract_circuit(cfg.geometry, mut, cfg.inductors)
        sweep = s_parameters(circuit, grid, z0=Z0_DEFAULT, n_cells=cfg.n_cells)
        stem = f"sweep_vwc{int(round(vwc)):03d}"
        dio.write_touchstone(cfg.out_dir / f"{stem}.s2p", sweep)
        dio.write_sweep_csv(cfg.out_dir / f"{stem}.csv", sweep)
        notes.append(f"vwc={vwc:g}% -> {stem}.s2p/.csv ({int(sweep.masked.sum())} masked)")
    cfg.log("sweep", notes)
    return 0


def cmd_band(cfg: RunConfig) -> int:
    circuit = extract_circuit(cfg.geometry, cfg.eps_m, cfg.inductors)
    report = dual_band_report(circuit)
    report["geometry_hash"] = geometry_hash(cfg.geometry)
    report["circuit"] = {
        name: _complex_dict(getattr(circuit, name))
        for name in ("L", "C_i", "C_u", "C_d", "C_c", "L_c")
    }
    dio.write_json(cfg.out_dir / "band.json", report)
    cfg.log("band", [f"wrote {cfg.out_dir / 'band.json'}"])
    return 0


def _sense_grid(cfg: RunConfig) -> np.ndarray:
    lo, hi = cfg.sense_f_start, cfg.sense_f_stop
    if lo is None or hi is None:
        # span the common propagating band of the extreme grid permittivities
        edges = []
        for e in (min(cfg.sense_eps), max(cfg.sense_eps)):
            c = extract_circuit(cfg.geometry, MutPermittivity(e, 0.0), cfg.inductors)
            b = band_edges_numeric(c)
            if b.empty:
                raise DpsSenseError(
                    f"no propagating band at eps = {e}; set sense_f_start/stop"
                )
            edges.append((b.f_cl, b.f_cu))
        lo_band = max(e[0] for e in edges)
        hi_band = min(e[1] for e in edges)
        if lo is None:
            lo = lo_band * 1.001
        if hi is None:
            hi = min(hi_band * 0.999, lo * 3.0)
    return np.linspace(lo, hi, cfg.sense_points)


def cmd_sense(cfg: RunConfig) -> int:
    grid = _sense_grid(cfg)
    smap = sensitivity_map(
        cfg.geometry, cfg.inductors, grid, cfg.sense_eps, n_cells=cfg.n_cells
    )
    dio.write_sensitivity_map_csv(cfg.out_dir / "sense_map.csv", smap)
    top_vwc, top_eps_real = cfg.curve.points[-1][0], cfg.curve.points[-1][1]
    s_at_fexc = dps_sensitivity(
        cfg.geometry, cfg.inductors, top_eps_real, cfg.f_exc,
        n_cells=cfg.n_cells, check_convergence=False,
    )
    slope = cfg.curve.slope_eps_real(top_vwc)
    report = smap.report()
    report.update(
        {
            "f_exc_hz": cfg.f_exc,
            "s_dps_at_f_exc_deg_per_eps": s_at_fexc,
            "curve_slope_eps_per_pct_at_top_knot": slope,
            "vwc_referred_deg_per_pct": vwc_referred_sensitivity(s_at_fexc, slope),
        }
    )
    dio.write_json(cfg.out_dir / "sense.json", report)
    cfg.log("sense", [f"f_optimal = {smap.f_optimal:.6e} Hz"])
    return 0


def _read_readings_csv(path: Path) -> list:
    lines = path.read_text().strip().splitlines()
    if not lines:
        raise ConfigError(f"{path}: empty readings file")
    header = [h.strip().lower() for h in lines[0].split(",")]
    if header[:2] != ["v_p", "v_m"]:
        raise ConfigError(f"{path}: expected header v_p,v_m[,nominal_vwc]")
    has_nominal = len(header) > 2 and header[2] == "nominal_vwc"
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        fields = [f.strip() for f in line.split(",")]
        try:
            v_p, v_m = float(fields[0]), float(fields[1])
            nominal = float(fields[2]) if has_nominal and len(fields) > 2 else None
        except (ValueError, IndexError) as exc:
            raise ConfigError(f"{path}:{lineno}: malformed row: {exc}") from exc
        rows.append((v_p, v_m, nominal))
    return rows


def cmd_invert(cfg: RunConfig) -> int:
    if cfg.readings is None:
        raise ConfigError("invert requires --readings <csv>")
    rows = _read_readings_csv(cfg.readings)
    results = []
    records = []
    for i, (v_p, v_m, nominal) in enumerate(rows):
        record: dict = {"row": i}
        try:
            reading = DetectorReading(v_p=v_p, v_m=v_m)
            res = invert_permittivity(
                reading, cfg.geometry, cfg.inductors, cfg.f_exc, cfg.curve,
                n_cells=cfg.n_cells,
            )
            record.update(res.to_dict())
            record["error"] = None
            results.append((res, nominal))
        except DpsSenseError as exc:
            record["error"] = str(exc)
        record["nominal_vwc"] = nominal
        records.append(record)

    jsonl = "\n".join(
        dio.json.dumps(r, sort_keys=True) for r in records
    )
    dio.atomic_write_text(cfg.out_dir / "invert_results.jsonl", jsonl + "\n")

    summary: dict = {
        "n_rows": len(rows),
        "n_failed": sum(1 for r in records if r.get("error")),
    }
    with_nominal = [(res, nom) for res, nom in results if nom is not None]
    if with_nominal:
        eps_re_errors, eps_im_errors, vwc_errors = [], [], []
        for res, nom in with_nominal:
            nominal_eps = permittivity_from_vwc(cfg.curve, nom)
            eps_re_errors.append(
                estimation_error(res.eps.eps_real, nominal_eps.eps_real)
            )
            eps_im_errors.append(
                estimation_error(res.eps.eps_imag, nominal_eps.eps_imag)
            )
            if res.vwc_percent is not None:
                vwc_errors.append(abs(res.vwc_percent - nom))
        summary.update(
            {
                "mean_eps_real_error_pct": float(np.mean(eps_re_errors)),
                "mean_eps_imag_error_pct": float(np.mean(eps_im_errors)),
                "max_vwc_abs_error_pct": float(max(vwc_errors)) if vwc_errors else None,
            }
        )
    dio.write_json(cfg.out_dir / "invert_summary.json", summary)
    cfg.log("invert", [f"{len(rows)} rows, {summary['n_failed']} failed"])
    return 0


def cmd_pulse(cfg: RunConfig) -> int:
    study = pulse_distortion_study(
        cfg.geometry,
        vwc_values=tuple(v for v in (10.0, 20.0, 30.0)),
        line_length=cfg.line_length,
        window_s=cfg.pulse_window,
        keep_waveforms=True,
    )
    vwc_values = sorted(study["purity_db"])
    pulse_widths = sorted({pw for pw, _ in study["nrmse"]})

    def _decimate(w, max_points=4096):
        step = max(1, w.samples.size // max_points)
        from .dispersion import Waveform

        return Waveform(
            sample_rate=w.sample_rate / step, samples=w.samples[::step], t0=w.t0
        )

    for (key, vwc), (_inp, out) in sorted(
        study["waveforms"].items(), key=lambda kv: (str(kv[0][0]), kv[0][1])
    ):
        name = (
            f"sine_vwc{int(vwc):02d}.csv"
            if key == "sine"
            else f"pulse_pw{int(round(float(key) * 1e12)):04d}ps_vwc{int(vwc):02d}.csv"
        )
        dio.write_waveform_csv(cfg.out_dir / name, _decimate(out))

    matrix = [
        [study["nrmse"][(pw, vwc)] for vwc in vwc_values] for pw in pulse_widths
    ]
    dio.write_matrix_csv(
        cfg.out_dir / "distortion_matrix.csv",
        "pulse_width_s",
        [f"{pw:.3e}" for pw in pulse_widths],
        [f"vwc_{int(v)}" for v in vwc_values],
        matrix,
    )
    dio.write_matrix_csv(
        cfg.out_dir / "sine_purity.csv",
        "tone_hz",
        [f"{SINE_HZ:.3e}"],
        [f"vwc_{int(v)}" for v in vwc_values],
        [[study["purity_db"][v] for v in vwc_values]],
    )
    report = {
        "line_length_m": cfg.line_length,
        "aligned_delays_s": {
            f"{key}_vwc_{int(v)}": d for (key, v), d in sorted(
                study["delays_s"].items(), key=lambda kv: (str(kv[0][0]), kv[0][1])
            )
        },
        "debye_im_mismatch": {
            f"vwc_{int(v)}": study["models"][v]["im_mismatch"] for v in vwc_values
        },
        "sine_purity_db": {f"vwc_{int(v)}": study["purity_db"][v] for v in vwc_values},
    }
    dio.write_json(cfg.out_dir / "pulse.json", report)
    cfg.log("pulse", [f"{len(study['waveforms'])} waveforms written"])
    return 0


_COMMANDS = {
    "extract": cmd_extract,
    "sweep": cmd_sweep,
    "band": cmd_band,
    "sense": cmd_sense,
    "invert": cmd_invert,
    "pulse": cmd_pulse,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dps-sense",
        description="Phase-shifter soil-moisture sensor modeling pipeline",
    )
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", required=True, help="flat key=value config file")
    parser.add_argument("--out", help="output directory (default from config)")
    parser.add_argument("--quantize", action="store_true",
                        help="apply detector quantization where applicable")
    parser.add_argument("--fexc", type=float, help="excitation frequency, Hz")
    parser.add_argument("--cells", type=int, help="number of cascaded cells")
    parser.add_argument("--readings", help="detector readings CSV (invert)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig.load(
            args.config,
            out=args.out,
            fexc=args.fexc,
            cells=args.cells,
            quantize=args.quantize,
            readings=args.readings,
        )
    except ConfigError as exc:
        print(f"dps-sense: config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"dps-sense: {exc}", file=sys.stderr)
        return 2
    try:
        return _COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"dps-sense: config error: {exc}", file=sys.stderr)
        return 2
    except DpsSenseError as exc:
        print(f"dps-sense: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"dps-sense: {exc}", file=sys.stderr)
        return 2


def console_entry() -> None:
    sys.exit(main())
