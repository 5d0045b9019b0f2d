"""Command line driver: JSON config in, CSV/JSON artifacts out.

Exit codes: 0 success, 2 invalid configuration, 3 domain error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .channel import DEFAULT_KAPPA, apply_ideal_channel, make_ideal_channel, sample_readouts
from .detectors import build_momentum_grid, make_detector_bank
from .errors import ConfigInvalid, DomainError
from .finite_time import (
    FiniteTimeConfig,
    convergence_sweep,
    geometric_durations,
    suppression_bound,
    time_averaged_offdiagonals,
)
from .io import decode_matrix, decode_vector, fmt, write_csv
from .qubit import (
    BRANCH_LABELS,
    BlochState,
    FieldConfig,
    estimate_axis,
    make_field_hamiltonian,
    make_qubit_channel,
    make_qubit_state,
    pauli_observables,
    run_qubit_campaign,
)
from .quantum import HermitianOperator, SystemState, spectral_decompose

MODES = ("resolve-check", "ideal-run", "finite-t-sweep", "qubit-demo", "estimate-axis")
SAMPLING_MODES = ("qubit-demo",)
U64 = 2**64


@dataclass
class SweepConfig:
    t_min: float
    t_max: float
    points_per_decade: int = 10
    grid_points: int = 64
    coverage_sigmas: float = 6.0
    steps: Optional[int] = None


@dataclass
class RunConfig:
    mode: str
    system: dict
    detectors: Optional[list] = None
    kappa: float = DEFAULT_KAPPA
    seed: Optional[int] = None
    n_samples: int = 0
    T_sweep: Optional[SweepConfig] = None
    output_dir: str = "out"
    test_mode: bool = False
    samples_csv: Optional[str] = None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["detectors"] = None if self.detectors is None else {"deltas": list(self.detectors)}
        return d

    @classmethod
    def from_dict(cls, doc: dict) -> RunConfig:
        if not isinstance(doc, dict):
            raise ConfigInvalid("<root>", "config must be a JSON object")
        known = {f for f in cls.__dataclass_fields__}
        extra = set(doc) - known
        if extra:
            raise ConfigInvalid(sorted(extra)[0], "unknown field")
        if "mode" not in doc:
            raise ConfigInvalid("mode", "missing")
        if doc["mode"] not in MODES:
            raise ConfigInvalid("mode", f"must be one of {', '.join(MODES)}")
        system = doc.get("system")
        if not isinstance(system, dict):
            raise ConfigInvalid("system", "missing or not an object")
        det = doc.get("detectors")
        deltas = None
        if det is not None:
            if not isinstance(det, dict) or not isinstance(det.get("deltas"), list):
                raise ConfigInvalid("detectors.deltas", "expected a list of dispersions")
            deltas = [_number(det["deltas"][k], f"detectors.deltas[{k}]") for k in range(len(det["deltas"]))]
        sweep = doc.get("T_sweep")
        if sweep is not None:
            try:
                sweep = SweepConfig(**sweep)
            except TypeError as exc:
                raise ConfigInvalid("T_sweep", str(exc)) from None
        cfg = cls(
            mode=doc["mode"],
            system=system,
            detectors=deltas,
            kappa=_number(doc.get("kappa", DEFAULT_KAPPA), "kappa"),
            seed=doc.get("seed"),
            n_samples=doc.get("n_samples", 0),
            T_sweep=sweep,
            output_dir=doc.get("output_dir", "out"),
            test_mode=bool(doc.get("test_mode", False)),
            samples_csv=doc.get("samples_csv"),
        )
        cfg.validate()
        return cfg

    def validate(self):
        if not self.kappa > 0:
            raise ConfigInvalid("kappa", "must be > 0")
        if self.seed is not None and (
            not isinstance(self.seed, int) or isinstance(self.seed, bool) or not 0 <= self.seed < U64
        ):
            raise ConfigInvalid("seed", "must be an unsigned 64-bit integer")
        if not isinstance(self.n_samples, int) or self.n_samples < 0:
            raise ConfigInvalid("n_samples", "must be a non-negative integer")
        if self.detectors is not None:
            for k, dx in enumerate(self.detectors):
                if not dx > 0:
                    raise ConfigInvalid(f"detectors.deltas[{k}]", f"NonPositiveDispersion: {dx}")
        needs_seed = self.mode in SAMPLING_MODES or (
            self.mode in ("ideal-run", "estimate-axis") and self.n_samples > 0 and not self.samples_csv
        )
        if needs_seed and self.seed is None:
            raise ConfigInvalid("seed", f"required for mode {self.mode}")
        if self.mode == "qubit-demo" and self.n_samples < 1:
            raise ConfigInvalid("n_samples", "qubit-demo needs at least one run")
        if self.mode == "estimate-axis" and not self.samples_csv and self.n_samples < 2:
            raise ConfigInvalid("n_samples", "estimate-axis needs samples_csv or n_samples >= 2")
        if self.mode == "finite-t-sweep":
            if self.T_sweep is None:
                raise ConfigInvalid("T_sweep", "required for finite-t-sweep")
            s = self.T_sweep
            if not 0 < s.t_min < s.t_max:
                raise ConfigInvalid("T_sweep.t_min", "need 0 < t_min < t_max")
            if s.points_per_decade < 1:
                raise ConfigInvalid("T_sweep.points_per_decade", "must be >= 1")
            if s.grid_points < 8:
                raise ConfigInvalid("T_sweep.grid_points", "must be >= 8")
            if s.coverage_sigmas < 3:
                raise ConfigInvalid("T_sweep.coverage_sigmas", "must be >= 3")
        self.build_system()

    def build_system(self) -> System:
        return System.from_config(self)


def _number(v, name):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigInvalid(name, "expected a number")
    return float(v)


@dataclass
class System:
    """Domain objects decoded from the ``system`` block."""

    hamiltonian: HermitianOperator
    observables: list
    deltas: list
    state: Optional[SystemState] = None
    bloch: Optional[BlochState] = None
    field: Optional[FieldConfig] = None

    @property
    def is_qubit(self) -> bool:
        return self.field is not None

    @classmethod
    def from_config(cls, cfg: RunConfig) -> System:
        sysdoc = cfg.system
        if "field" in sysdoc:
            return cls._qubit(cfg, sysdoc)
        if cfg.mode in ("qubit-demo",):
            raise ConfigInvalid("system.field", f"required for mode {cfg.mode}")
        if cfg.mode == "estimate-axis" and not cfg.samples_csv:
            raise ConfigInvalid("system.field", "needed to generate samples")
        if cfg.mode == "estimate-axis":
            return None
        h = _operator(sysdoc.get("hamiltonian"), "system.hamiltonian")
        obs_doc = sysdoc.get("observables")
        if not isinstance(obs_doc, list) or not obs_doc:
            raise ConfigInvalid("system.observables", "expected a non-empty list of matrices")
        obs = [_operator(m, f"system.observables[{k}]") for k, m in enumerate(obs_doc)]
        for k, a in enumerate(obs):
            if a.dimension != h.dimension:
                raise ConfigInvalid(f"system.observables[{k}]", "DimensionMismatch with hamiltonian")
        if cfg.detectors is None:
            raise ConfigInvalid("detectors.deltas", "required for a general system")
        if len(cfg.detectors) != len(obs):
            raise ConfigInvalid("detectors.deltas", "one dispersion per observable")
        state = None
        if "state" in sysdoc:
            state = _state(sysdoc["state"], h.dimension)
        if cfg.mode == "ideal-run" and state is None:
            raise ConfigInvalid("system.state", "required for ideal-run")
        return cls(h, obs, list(cfg.detectors), state)

    @classmethod
    def _qubit(cls, cfg, sysdoc):
        fdoc = sysdoc["field"]
        if not isinstance(fdoc, dict):
            raise ConfigInvalid("system.field", "expected {omega, axis}")
        try:
            f = FieldConfig(fdoc.get("omega", 1.0), tuple(fdoc.get("axis", ())))
        except DomainError as exc:
            raise ConfigInvalid("system.field", f"{type(exc).__name__}: {exc}") from None
        b = None
        if "bloch" in sysdoc:
            try:
                b = BlochState(tuple(sysdoc["bloch"]))
            except (DomainError, TypeError, ValueError) as exc:
                raise ConfigInvalid("system.bloch", f"{type(exc).__name__}: {exc}") from None
        elif cfg.mode in ("qubit-demo", "ideal-run") or (
            cfg.mode == "estimate-axis" and not cfg.samples_csv
        ):
            raise ConfigInvalid("system.bloch", f"required for mode {cfg.mode}")
        deltas = list(cfg.detectors) if cfg.detectors is not None else [0.05] * 3
        if len(deltas) != 3:
            raise ConfigInvalid("detectors.deltas", "qubit experiment uses three detectors")
        state = None if b is None else make_qubit_state(b)
        return cls(make_field_hamiltonian(f), pauli_observables(), deltas, state, b, f)


def _operator(doc, name):
    if doc is None:
        raise ConfigInvalid(name, "missing")
    try:
        return HermitianOperator(decode_matrix(doc))
    except (DomainError, ValueError, TypeError) as exc:
        raise ConfigInvalid(name, f"{type(exc).__name__}: {exc}") from None


def _state(doc, d):
    try:
        if "vector" in doc:
            st = SystemState.pure(decode_vector(doc["vector"]))
        elif "density" in doc:
            st = SystemState.mixed(decode_matrix(doc["density"]))
        else:
            raise ConfigInvalid("system.state", "expected 'vector' or 'density'")
    except (DomainError, ValueError, TypeError) as exc:
        raise ConfigInvalid("system.state", f"{type(exc).__name__}: {exc}") from None
    if st.dimension != d:
        raise ConfigInvalid("system.state", "DimensionMismatch with hamiltonian")
    return st


@dataclass
class RunReport:
    config: dict
    resolvability: Optional[dict]
    files: list
    wall_time: float
    version: str = __version__
    summary: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)


def run_seeds(seed: int, n: int) -> list[int]:
    return [(seed + i) % U64 for i in range(n)]


def _write_json(path: Path, doc) -> Path:
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def _channel(system: System):
    if system.is_qubit:
        return make_qubit_channel(system.field, system.deltas)
    return make_ideal_channel(system.hamiltonian, system.observables, make_detector_bank(system.deltas))


def _resolve_check(cfg, system, out):
    report = _channel(system).resolvability(cfg.kappa)
    return [_write_json(out / "resolvability.json", report.to_dict())], report.to_dict(), {}


def _ideal_run(cfg, system, out):
    channel = _channel(system)
    report = channel.resolvability(cfg.kappa)
    dist, weights = apply_ideal_channel(channel, system.state)
    files = [_write_json(out / "pointer_distribution.json", dist.to_dict())]
    n_det = len(channel.bank)
    if cfg.n_samples > 0:
        samples = sample_readouts(channel, system.state, run_seeds(cfg.seed, cfg.n_samples), cfg.kappa)
        header = ["sample_id", "seed"] + [f"x_{k + 1}" for k in range(n_det)] + ["classified"]
        if cfg.test_mode:
            header.append("collapsed_index")
        rows = []
        for i, s in enumerate(samples):
            row = [i, s.seed, *map(float, s.x), "ambiguous" if s.classified is None else s.classified]
            if cfg.test_mode:
                row.append(s.collapsed_index)
            rows.append(row)
        files.append(write_csv(out / "readouts.csv", header, rows))
    summary = {
        "branch_weights": [float(w) for w in weights],
        "shifts": channel.shifts.tolist(),
        "kappa": cfg.kappa,
        "resolvability": report.to_dict(),
    }
    files.append(_write_json(out / "summary.json", summary))
    return files, report.to_dict(), summary


def _finite_t_sweep(cfg, system, out):
    sw = cfg.T_sweep
    basis = spectral_decompose(system.hamiltonian)
    bank = make_detector_bank(system.deltas)
    grid = build_momentum_grid(bank, sw.grid_points, sw.coverage_sigmas)
    durations = geometric_durations(sw.t_min, sw.t_max, sw.points_per_decade)
    ft = FiniteTimeConfig(float(durations[0]), system.observables, basis, sw.steps)
    curve = convergence_sweep(ft, grid, durations)
    files = [
        write_csv(
            out / "convergence.csv",
            ["T", "D", "D_envelope"],
            curve.to_rows(),
            trailer=f"# envelope_fit_slope={fmt(curve.envelope_slope)}",
        )
    ]
    bound_ok = all(
        np.all(np.abs(time_averaged_offdiagonals(ft.with_duration(t)))
               <= suppression_bound(ft.with_duration(t)) + 1e-12)
        for t in durations
    )
    report = make_ideal_channel(basis, system.observables, bank).resolvability(cfg.kappa)
    summary = {
        "envelope_fit_slope": curve.envelope_slope,
        "n_durations": len(durations),
        "grid_nodes": grid.size,
        "offdiagonal_bound_holds": bool(bound_ok),
        "kappa": cfg.kappa,
        "resolvability": report.to_dict(),
    }
    files.append(_write_json(out / "summary.json", summary))
    return files, report.to_dict(), summary


def _qubit_demo(cfg, system, out):
    channel = make_qubit_channel(system.field, system.deltas)
    report = channel.resolvability(cfg.kappa)
    seeds = run_seeds(cfg.seed, cfg.n_samples)
    samples = run_qubit_campaign(system.bloch, system.field, system.deltas, seeds, cfg.kappa)
    header = ["run_id", "seed", "x1", "x2", "x3", "classified_branch"]
    if cfg.test_mode:
        header.append("collapsed_branch")
    rows = []
    for i, s in enumerate(samples):
        label = "ambiguous" if s.classified is None else BRANCH_LABELS[s.classified]
        row = [i, s.seed, *map(float, s.x), label]
        if cfg.test_mode:
            row.append(BRANCH_LABELS[s.collapsed_index])
        rows.append(row)
    files = [write_csv(out / "campaign.csv", header, rows)]
    labels = [r[5] for r in rows]
    n = len(labels)
    summary = {
        "n_samples": n,
        "branch_frequency": {k: labels.count(k) / n for k in ("+", "-", "ambiguous")},
        "one_shot_e": (samples[0].x / np.linalg.norm(samples[0].x)).tolist(),
        "kappa": cfg.kappa,
        "resolvability": report.to_dict(),
    }
    if n >= 2:
        est = estimate_axis([s.x for s in samples], system.field.axis if cfg.test_mode else None)
        summary["e_est"] = est.e_hat.tolist()
        if cfg.test_mode:
            summary["angular_error_deg"] = est.angular_error_deg
    files.append(_write_json(out / "summary.json", summary))
    return files, report.to_dict(), summary


def read_campaign_samples(path) -> np.ndarray:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as exc:
        raise ConfigInvalid("samples_csv", str(exc)) from None
    try:
        return np.array([[float(r["x1"]), float(r["x2"]), float(r["x3"])] for r in rows])
    except (KeyError, ValueError) as exc:
        raise ConfigInvalid("samples_csv", f"cannot read x1, x2, x3 columns: {exc}") from None


def _estimate_axis(cfg, system, out):
    report = None
    truth = None
    if cfg.samples_csv:
        x = read_campaign_samples(cfg.samples_csv)
        if system is not None and system.field is not None:
            truth = system.field.axis
    else:
        samples = run_qubit_campaign(
            system.bloch, system.field, system.deltas, run_seeds(cfg.seed, cfg.n_samples), cfg.kappa
        )
        x = np.array([s.x for s in samples])
        truth = system.field.axis
        report = make_qubit_channel(system.field, system.deltas).resolvability(cfg.kappa).to_dict()
    est = estimate_axis(x, truth if cfg.test_mode else None)
    summary = {"e_est": est.e_hat.tolist(), "n_samples": est.n_samples}
    if cfg.test_mode and est.angular_error is not None:
        summary["angular_error_deg"] = est.angular_error_deg
    if report is not None:
        summary["resolvability"] = report
    return [_write_json(out / "summary.json", summary)], report, summary


RUNNERS = {
    "resolve-check": _resolve_check,
    "ideal-run": _ideal_run,
    "finite-t-sweep": _finite_t_sweep,
    "qubit-demo": _qubit_demo,
    "estimate-axis": _estimate_axis,
}


def run(config: RunConfig) -> RunReport:
    start = time.perf_counter()
    system = config.build_system()
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    files, resolvability, summary = RUNNERS[config.mode](config, system, out)
    report = RunReport(
        config=config.to_dict(),
        resolvability=resolvability,
        files=[str(p) for p in files],
        wall_time=time.perf_counter() - start,
        summary=summary,
    )
    (out / "report.json").write_text(report.to_json() + "\n", encoding="utf-8")
    return report


def load_config(path, overrides: dict) -> RunConfig:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigInvalid("--config", str(exc)) from None
    except json.JSONDecodeError as exc:
        raise ConfigInvalid("--config", f"invalid JSON: {exc}") from None
    if isinstance(doc, dict):
        doc.update({k: v for k, v in overrides.items() if v is not None})
    return RunConfig.from_dict(doc)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="protmeas", description=__doc__.splitlines()[0])
    p.add_argument("--config", required=True, help="JSON run configuration")
    p.add_argument("--seed", type=int, help="override config seed (unsigned 64-bit)")
    p.add_argument("--out", help="override output directory")
    p.add_argument("--mode", choices=MODES, help="override config mode")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, {"seed": args.seed, "output_dir": args.out, "mode": args.mode})
        report = run(cfg)
    except ConfigInvalid as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DomainError as exc:
        print(f"domain error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    for f in report.files:
        print(f)
    return 0


if __name__ == "__main__":
    sys.exit(main())
