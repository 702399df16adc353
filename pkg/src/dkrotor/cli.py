"""Batch front-end for the kicked-rotor pipelines.

One experiment per INI config file, two sections:

    [system]            pulse-train parameters (K, alpha, delta, hbar, sigma_p)
    [run]               mode, kicks, ensemble, realizations, eta,
                        decoherence, seed, basis_size, out

Verbs: ``run`` executes one config, ``sweep`` expands comma-separated
values into a Cartesian product of runs (failures isolated per run),
``validate`` checks a config without running.  Every run writes its
CSV/JSON outputs plus a manifest.json with sha256 checksums; identical
spec and seed reproduce byte-identical data files.
"""

from __future__ import annotations

import argparse
import configparser
import hashlib
import json
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, replace
from itertools import product
from pathlib import Path

import numpy as np

from .classical import propagate_ensemble, sample_initial
from .decoherence import (ANTI_ZENO, EmissionModel, mc_wavefunction_run,
                          run_decohered)
from .diffusion import fit_flux
from .floquet import asymptotic_matrix, decompose
from .pulses import KickConfig
from .quantum import (MomentumBasis, build_period_operator, edge_population,
                      evolve_density, initial_density, unitarity_defect)
from .wigner import strangeness, wigner_transform

MODES = ("classical", "quantum", "floquet", "wigner", "mc-wavefunction",
         "compare")
DECOHERENCE_CHOICES = ("none", "emission", "anti-zeno")
MATRIX_LOG_FLOOR = 1e-30


class SpecError(ValueError):
    """Invalid experiment spec, carrying the offending field name."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field
        self.message = message

    def report(self) -> dict:
        return {"error": "invalid-spec", "field": self.field,
                "message": self.message}


@dataclass
class ExperimentSpec:
    """Everything one run needs; deterministic given (spec, seed)."""

    mode: str = "classical"
    K: float = 280.0
    alpha: float = 0.1
    delta: float = 0.1
    hbar: float = 2.6
    sigma_p: float = 3.6 * np.pi
    kicks: int = 70
    ensemble: int = 100_000
    realizations: int = 2000
    eta: float = 0.0
    decoherence: str = "none"
    seed: int = 0
    basis_size: int = 128
    out: str = "out"

    def kick_config(self) -> KickConfig:
        return KickConfig(K=self.K, alpha=self.alpha, delta=self.delta,
                          hbar=self.hbar, sigma_p=self.sigma_p)

    def basis(self) -> MomentumBasis:
        return MomentumBasis(size=self.basis_size, hbar=self.hbar)


@dataclass
class RunManifest:
    spec: dict
    version: str
    wall_time: float
    seeds: list
    files: dict

    def to_dict(self) -> dict:
        return {"spec": self.spec, "version": self.version,
                "wall_time": self.wall_time, "seeds": self.seeds,
                "files": self.files}


# (section, key, type); also the canonical serialization order
CONFIG_FIELDS = (
    ("system", "K", float),
    ("system", "alpha", float),
    ("system", "delta", float),
    ("system", "hbar", float),
    ("system", "sigma_p", float),
    ("run", "mode", str),
    ("run", "kicks", int),
    ("run", "ensemble", int),
    ("run", "realizations", int),
    ("run", "eta", float),
    ("run", "decoherence", str),
    ("run", "seed", int),
    ("run", "basis_size", int),
    ("run", "out", str),
)
_FIELD_TYPES = {key: typ for _, key, typ in CONFIG_FIELDS}
_FIELD_SECTION = {key: section for section, key, _ in CONFIG_FIELDS}


def _fmt(x) -> str:
    """Shortest decimal that round-trips; integers and strings pass through."""
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def _coerce(key: str, text: str):
    typ = _FIELD_TYPES[key]
    if typ is str:
        return text
    try:
        return typ(text)
    except ValueError:
        kind = "an integer" if typ is int else "a number"
        raise SpecError(f"{_FIELD_SECTION[key]}.{key}",
                        f"expected {kind}, got {text!r}") from None


def _read_raw(path) -> dict:
    """INI file -> {key: raw string}, rejecting unknown sections/keys."""
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        loaded = parser.read(path)
    except configparser.Error as exc:
        raise SpecError("config", str(exc)) from None
    if not loaded:
        raise SpecError("config", f"cannot read {path}")
    raw = {}
    for section in parser.sections():
        if section not in ("system", "run"):
            raise SpecError(section, "unknown section")
        for key, value in parser.items(section):
            if _FIELD_SECTION.get(key) != section:
                raise SpecError(f"{section}.{key}", "unknown key")
            raw[key] = value.strip()
    return raw


def spec_from_values(values: dict) -> ExperimentSpec:
    spec = ExperimentSpec()
    return replace(spec, **{k: _coerce(k, v) for k, v in values.items()})


def load_spec(path) -> ExperimentSpec:
    raw = _read_raw(path)
    for key, value in raw.items():
        if "," in value:
            raise SpecError(f"{_FIELD_SECTION[key]}.{key}",
                            "list values are only valid in sweep configs")
    return spec_from_values(raw)


def load_sweep(path) -> list:
    """Expand comma-separated values into named (name, spec) pairs."""
    raw = _read_raw(path)
    lists = {}
    for key, value in raw.items():
        tokens = [tok.strip() for tok in value.split(",")]
        if any(not tok for tok in tokens):
            raise SpecError(f"{_FIELD_SECTION[key]}.{key}",
                            "empty list entry")
        lists[key] = tokens
    order = [key for _, key, _ in CONFIG_FIELDS if key in lists]
    varied = [key for key in order if len(lists[key]) > 1]
    pairs = []
    for combo in product(*(lists[key] for key in order)):
        values = dict(zip(order, combo))
        name = "_".join(f"{key}={values[key]}" for key in varied) or "run"
        pairs.append((name, spec_from_values(values)))
    return pairs


def spec_to_config(spec: ExperimentSpec) -> str:
    """Serialize back to INI; load_spec(spec_to_config(s)) == s."""
    lines = []
    for section in ("system", "run"):
        lines.append(f"[{section}]")
        for sec, key, _ in CONFIG_FIELDS:
            if sec == section:
                lines.append(f"{key} = {_fmt(getattr(spec, key))}")
        lines.append("")
    return "\n".join(lines)


def validate(spec: ExperimentSpec) -> None:
    """Raise SpecError naming the first offending field."""
    if spec.mode not in MODES:
        raise SpecError("run.mode", f"must be one of {', '.join(MODES)}")
    if spec.K < 0:
        raise SpecError("system.K", "must be >= 0")
    if spec.alpha <= 0:
        raise SpecError("system.alpha", "must be > 0")
    if spec.delta < spec.alpha / 2:
        raise SpecError("system.delta", "must be >= alpha/2")
    if spec.delta + spec.alpha / 2 > 1:
        raise SpecError("system.delta", "delta + alpha/2 must be <= 1")
    if spec.hbar <= 0:
        raise SpecError("system.hbar", "must be > 0")
    if spec.sigma_p <= 0:
        raise SpecError("system.sigma_p", "must be > 0")
    if spec.kicks < 1:
        raise SpecError("run.kicks", "must be >= 1")
    if spec.ensemble < 1:
        raise SpecError("run.ensemble", "must be >= 1")
    if spec.realizations < 2:
        raise SpecError("run.realizations", "must be >= 2")
    if not 0.0 <= spec.eta <= 1.0:
        raise SpecError("run.eta", "must be in [0, 1]")
    if spec.decoherence not in DECOHERENCE_CHOICES:
        raise SpecError("run.decoherence",
                        f"must be one of {', '.join(DECOHERENCE_CHOICES)}")
    if spec.seed < 0:
        raise SpecError("run.seed", "must be >= 0")
    if spec.basis_size < 2 or spec.basis_size % 2:
        raise SpecError("run.basis_size", "must be an even integer >= 2")


def _json_safe(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, (np.floating, np.integer, np.bool_)):
        return _json_safe(value.item())
    return value


def _write_csv(path: Path, header, rows, written: list) -> None:
    lines = [",".join(str(h) for h in header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")
    written.append(path)


def _write_json(path: Path, payload: dict, written: list) -> None:
    path.write_text(json.dumps(_json_safe(payload), indent=2,
                               sort_keys=True) + "\n")
    written.append(path)


def _write_outside(path, outside, written, stderr=None, realizations=None):
    if stderr is None:
        header = ("kick", "outside_fraction")
        rows = list(enumerate(outside))
    else:
        header = ("kick", "outside_fraction", "stderr", "realizations")
        rows = [(t, frac, err, realizations)
                for t, (frac, err) in enumerate(zip(outside, stderr))]
    _write_csv(path, header, rows, written)


def _kick_header(prefix, kicks):
    return [prefix] + [f"kick_{t}" for t in range(kicks + 1)]


def _run_classical(spec, out, written, workers):
    cfg = spec.kick_config()
    ensemble = sample_initial(cfg, spec.ensemble, spec.seed)
    result = propagate_ensemble(ensemble, cfg, spec.kicks)
    hist = result.histogram
    rows = [[center, *hist.counts[:, b]]
            for b, center in enumerate(hist.bin_centers)]
    _write_csv(out / "momentum_histogram.csv", _kick_header("p", spec.kicks),
               rows, written)
    _write_outside(out / "outside_fraction.csv", result.outside_fraction,
                   written)
    if len(result.outside_fraction) >= 10:
        fit = fit_flux(result.outside_fraction)
        _write_json(out / "flux_fit.json",
                    {**asdict(fit), "K": spec.K}, written)
    return [spec.seed]


def _evolved_density(spec, op, rho0):
    if spec.decoherence == "none":
        return evolve_density(rho0, op, spec.kicks)
    if spec.decoherence == "emission":
        return run_decohered(rho0, op, EmissionModel(eta=spec.eta), spec.kicks)
    return run_decohered(rho0, op, ANTI_ZENO, spec.kicks)


def _write_distributions(path, basis, dists, kicks, written):
    rows = [[n, p, *dists[:, i]]
            for i, (n, p) in enumerate(zip(basis.indices, basis.momenta))]
    header = ["n", "p"] + [f"kick_{t}" for t in range(kicks + 1)]
    _write_csv(path, header, rows, written)


def _run_quantum(spec, out, written, workers):
    cfg = spec.kick_config()
    basis = spec.basis()
    op = build_period_operator(cfg, basis)
    result = _evolved_density(spec, op, initial_density(cfg, basis))
    _write_distributions(out / "momentum_distribution.csv", basis,
                         result.distributions, spec.kicks, written)
    _write_outside(out / "outside_fraction.csv", result.outside_fraction,
                   written)
    _write_json(out / "operator_diagnostics.json", {
        "K": spec.K, "hbar": spec.hbar, "basis_size": spec.basis_size,
        "decoherence": spec.decoherence, "eta": spec.eta,
        "unitarity_defect": unitarity_defect(op.U),
        "edge_population": edge_population(result.distributions),
    }, written)
    return []


def _run_floquet(spec, out, written, workers):
    cfg = spec.kick_config()
    basis = spec.basis()
    op = build_period_operator(cfg, basis)
    dec = decompose(op)
    order = np.argsort(dec.quasi_energies)
    _write_csv(out / "quasi_energies.csv", ("state", "quasi_energy"),
               [(int(i), dec.quasi_energies[i]) for i in order], written)
    M = asymptotic_matrix(dec)
    header = ["n"] + [f"n0_{n}" for n in basis.indices]
    rows = [[n, *M[i]] for i, n in enumerate(basis.indices)]
    _write_csv(out / "asymptotic_matrix.csv", header, rows, written)
    logM = np.log10(np.maximum(M, MATRIX_LOG_FLOOR))
    rows = [[n, *logM[i]] for i, n in enumerate(basis.indices)]
    _write_csv(out / "asymptotic_matrix_log10.csv", header, rows, written)
    _write_json(out / "floquet_diagnostics.json", {
        "K": spec.K, "hbar": spec.hbar, "basis_size": spec.basis_size,
        "unitarity_defect": unitarity_defect(op.U),
        "degenerate_clusters": len(dec.degenerate_clusters),
    }, written)
    return []


def _run_wigner(spec, out, written, workers):
    cfg = spec.kick_config()
    basis = spec.basis()
    op = build_period_operator(cfg, basis)
    result = _evolved_density(spec, op, initial_density(cfg, basis))
    grid = wigner_transform(result.final_density, basis)
    header = ["P\\X"] + [_fmt(x) for x in grid.coarse_positions]
    rows = [[p, *grid.coarse[l]] for l, p in enumerate(grid.coarse_momenta)]
    _write_csv(out / "wigner_coarse.csv", header, rows, written)
    _write_json(out / "strangeness.json", {
        "K": spec.K, "eta": spec.eta, "kicks": spec.kicks,
        "decoherence": spec.decoherence, "S": strangeness(grid),
        "norm_constant": grid.norm_constant,
    }, written)
    return []


def _run_mc(spec, out, written, workers):
    cfg = spec.kick_config()
    basis = spec.basis()
    result = mc_wavefunction_run(cfg, basis, spec.eta, spec.kicks, spec.seed,
                                 realizations=spec.realizations,
                                 workers=workers)
    _write_distributions(out / "momentum_distribution.csv", basis,
                         result.distributions, spec.kicks, written)
    _write_outside(out / "outside_fraction.csv", result.outside_fraction,
                   written, stderr=result.outside_stderr,
                   realizations=result.realizations)
    return [spec.seed]


def _run_compare(spec, out, written, workers):
    cfg = spec.kick_config()
    basis = spec.basis()
    ensemble = sample_initial(cfg, spec.ensemble, spec.seed)
    classical = propagate_ensemble(ensemble, cfg, spec.kicks).outside_fraction
    op = build_period_operator(cfg, basis)
    rho0 = initial_density(cfg, basis)
    curves = [
        ("classical", classical),
        ("coherent", evolve_density(rho0, op, spec.kicks).outside_fraction),
        ("eta_002", run_decohered(rho0, op, EmissionModel(eta=0.02),
                                  spec.kicks).outside_fraction),
        ("eta_005", run_decohered(rho0, op, EmissionModel(eta=0.05),
                                  spec.kicks).outside_fraction),
        ("anti_zeno", run_decohered(rho0, op, ANTI_ZENO,
                                    spec.kicks).outside_fraction),
    ]
    header = ["kick"] + [name for name, _ in curves]
    rows = [[t, *(curve[t] for _, curve in curves)]
            for t in range(spec.kicks + 1)]
    _write_csv(out / "comparison.csv", header, rows, written)
    return [spec.seed]


_MODE_RUNNERS = {
    "classical": _run_classical,
    "quantum": _run_quantum,
    "floquet": _run_floquet,
    "wigner": _run_wigner,
    "mc-wavefunction": _run_mc,
    "compare": _run_compare,
}


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def run(spec: ExperimentSpec, workers: int = 1) -> RunManifest:
    """Execute one pipeline; on failure remove partial outputs and re-raise."""
    validate(spec)
    out = Path(spec.out)
    out.mkdir(parents=True, exist_ok=True)
    written: list = []
    start = time.perf_counter()
    try:
        seeds = _MODE_RUNNERS[spec.mode](spec, out, written, workers)
    except Exception:
        for path in written:
            path.unlink(missing_ok=True)
        raise
    from . import __version__
    manifest = RunManifest(
        spec={key: getattr(spec, key) for _, key, _ in CONFIG_FIELDS},
        version=__version__,
        wall_time=time.perf_counter() - start,
        seeds=seeds,
        files={path.name: _sha256(path) for path in sorted(written)})
    (out / "manifest.json").write_text(
        json.dumps(_json_safe(manifest.to_dict()), indent=2, sort_keys=True)
        + "\n")
    return manifest


def _run_named(name, spec, root, workers):
    sub = replace(spec, out=str(Path(root) / name))
    try:
        return name, run(sub, workers=workers), None
    except SpecError as exc:
        return name, None, exc.report()
    except Exception as exc:
        return name, None, {"error": "runtime", "message": str(exc)}


def sweep(pairs, root, workers: int = 1) -> list:
    """Run named specs under root/<name>; failures are isolated per run.

    Returns (name, manifest-or-None, error-or-None) triples and writes
    sweep_report.json plus any cross-run aggregate tables.
    """
    pairs = list(pairs)
    if not pairs:
        raise ValueError("empty sweep")
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(
                lambda item: _run_named(item[0], item[1], root, 1), pairs))
    else:
        results = [_run_named(name, spec, root, 1) for name, spec in pairs]
    _aggregate_sweep(results, root)
    report = {"runs": [{"name": name,
                        "status": "ok" if err is None else "failed",
                        "error": err}
                       for name, _, err in results],
              "failed": sum(1 for _, _, err in results if err is not None)}
    (root / "sweep_report.json").write_text(
        json.dumps(_json_safe(report), indent=2, sort_keys=True) + "\n")
    return results


def _aggregate_sweep(results, root: Path) -> None:
    """Collect per-run scalars into plot-ready tables."""
    flux_rows, s_rows = [], []
    for name, manifest, err in results:
        if err is not None:
            continue
        run_dir = root / name
        fit_path = run_dir / "flux_fit.json"
        if fit_path.exists():
            fit = json.loads(fit_path.read_text())
            flux_rows.append((fit["K"], fit["F"], fit["a"], fit["valid"]))
        s_path = run_dir / "strangeness.json"
        if s_path.exists():
            info = json.loads(s_path.read_text())
            s_rows.append((info["K"], info["eta"], info["S"]))
    sink: list = []
    if flux_rows:
        flux_rows.sort(key=lambda r: r[0])
        _write_csv(root / "flux_vs_K.csv", ("K", "F", "a", "valid"),
                   flux_rows, sink)
    if s_rows:
        s_rows.sort(key=lambda r: (r[0], r[1]))
        _write_csv(root / "strangeness.csv", ("K", "eta", "S"), s_rows, sink)


def _apply_overrides(spec, args):
    if args.seed is not None:
        spec = replace(spec, seed=args.seed)
    if args.out is not None:
        spec = replace(spec, out=args.out)
    return spec


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="dkrotor",
        description="kicked-rotor transport experiments: run, sweep, validate")
    sub = parser.add_subparsers(dest="verb", required=True)
    for verb in ("run", "sweep", "validate"):
        p = sub.add_parser(verb)
        p.add_argument("--config", required=True, help="INI experiment config")
        p.add_argument("--seed", type=int, default=None,
                       help="override [run] seed")
        p.add_argument("--out", default=None, help="override output directory")
        p.add_argument("--workers", type=int, default=1,
                       help="concurrent runs (sweep) or MC workers (run)")
    args = parser.parse_args(argv)

    try:
        if args.verb == "run":
            spec = _apply_overrides(load_spec(args.config), args)
            manifest = run(spec, workers=args.workers)
            print(json.dumps(_json_safe(manifest.to_dict()), indent=2,
                             sort_keys=True))
            return 0
        if args.verb == "sweep":
            pairs = load_sweep(args.config)
            if args.seed is not None:
                pairs = [(name, replace(spec, seed=args.seed))
                         for name, spec in pairs]
            for _, spec in pairs:
                validate(spec)
            root = args.out if args.out is not None else "sweep"
            results = sweep(pairs, root, workers=args.workers)
            failed = [name for name, _, err in results if err is not None]
            print(json.dumps({"runs": len(results), "failed": failed},
                             indent=2, sort_keys=True))
            return 1 if failed else 0
        pairs = load_sweep(args.config)
        for _, spec in pairs:
            validate(spec)
        specs = [{**{key: getattr(spec, key) for _, key, _ in CONFIG_FIELDS},
                  "name": name} for name, spec in pairs]
        print(json.dumps(_json_safe({"valid": True, "specs": specs}),
                         indent=2, sort_keys=True))
        return 0
    except SpecError as exc:
        print(json.dumps(exc.report(), indent=2, sort_keys=True),
              file=sys.stderr)
        return 2
    except ValueError as exc:
        print(json.dumps({"error": "invalid-value", "message": str(exc)},
                         indent=2, sort_keys=True), file=sys.stderr)
        return 2
    except Exception as exc:
        print(json.dumps({"error": "runtime", "message": str(exc)},
                         indent=2, sort_keys=True), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
