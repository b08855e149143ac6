"""Configuration-driven command line: parse, dispatch, deterministic output.

Subcommands
-----------
simulate   propagate the configured scenario, write trajectory CSVs
map        dynamical-map tensor elements vs time
rates      relaxation-tensor elements and generator eigenvalues
regime     dipole-scaling eigenvalue scan with regime classification
figure     dataset bundle for one catalogued figure (--fig 1..10)
turnon     slow turn-on run (alpha from the config or --override)

All physical quantities in the config carry explicit unit tags
({value: ..., unit: ...}); bare numbers are rejected.  CSV bodies are
deterministic: identical configs give byte-identical files, and the
JSON manifest (written atomically after all data files) records a
sha256 per output so ``--check`` can re-verify a bundle.

Exit codes: 0 success, 2 configuration error, 3 numerical error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time

import numpy as np
import yaml

from . import __version__
from .dynamics import NumericalError, Trajectory, compute_damping_basis, map_tensor
from .model import Chromophore, ModelError
from .redfield import assemble_tensor, liouvillian
from .scenarios import (FIGURE_IDS, Scenario, ScenarioConfig, build_scenario,
                        excitation_sectors, run_figure, single_exciton_indices)
from .units import UnitError, to_internal

__all__ = ["ConfigError", "parse_config", "dispatch", "main"]


class ConfigError(ValueError):
    """Invalid configuration file; message lists every violation found."""


# ---------------------------------------------------------------------------
# config parsing

_EXPECTED_UNITS = {
    "energy": ("eV", "cm^-1"),
    "frequency": ("cm^-1", "eV"),
    "dipole": ("D",),
    "temperature": ("K",),
    "time": ("ps", "s"),
}


def _quantity(node, kind: str, path: str, errors: list) -> float | None:
    """Read a {value, unit} pair; record an error instead of raising."""
    if not isinstance(node, dict) or "value" not in node or "unit" not in node:
        errors.append(f"{path}: expected a tagged quantity {{value, unit}}, got {node!r}")
        return None
    unit = node["unit"]
    if unit not in _EXPECTED_UNITS[kind]:
        errors.append(f"{path}: unit {unit!r} not valid for {kind} "
                      f"(expected one of {_EXPECTED_UNITS[kind]})")
        return None
    try:
        return to_internal(float(node["value"]), unit)
    except (UnitError, TypeError, ValueError) as exc:
        errors.append(f"{path}: {exc}")
        return None


def _raw_number(node, path, errors) -> float | None:
    try:
        return float(node)
    except (TypeError, ValueError):
        errors.append(f"{path}: expected a number, got {node!r}")
        return None


def parse_config(path: str) -> ScenarioConfig:
    """Load and validate a YAML scenario config.

    Collects every violation (unit tags, signs, missing couplings) and
    raises one ConfigError listing all of them, so a bad file is fixed
    in one pass rather than error by error.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = yaml.safe_load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"config parse error in {path}: {exc}") from exc
    return config_from_dict(raw if raw is not None else {})


def config_from_dict(raw: dict) -> ScenarioConfig:
    errors: list[str] = []
    if not isinstance(raw, dict):
        raise ConfigError(f"top level must be a mapping, got {type(raw).__name__}")
    cfg = ScenarioConfig()
    known = {"model", "chromophores", "couplings", "use_placeholder_couplings",
             "phonon", "radiation", "grid", "initial_state", "turn_on", "output"}
    for key in raw:
        if key not in known:
            errors.append(f"{key}: unknown configuration key")

    cfg.model = raw.get("model", "single_chromophore")

    if "chromophores" in raw:
        chroms = []
        for i, node in enumerate(raw["chromophores"] or []):
            label = node.get("label", f"site{i}")
            energy = _quantity(node.get("energy"), "energy", f"chromophores[{i}].energy", errors)
            dipole = _quantity(node.get("dipole"), "dipole", f"chromophores[{i}].dipole", errors)
            if energy is not None and dipole is not None:
                try:
                    chroms.append(Chromophore(label, energy, dipole))
                except ModelError as exc:
                    errors.append(f"chromophores[{i}]: {exc}")
        cfg.chromophores = chroms

    if "couplings" in raw:
        table = {}
        for i, node in enumerate(raw["couplings"] or []):
            pair = node.get("pair")
            if not (isinstance(pair, (list, tuple)) and len(pair) == 2):
                errors.append(f"couplings[{i}].pair: expected two site labels")
                continue
            val = node.get("value")
            if not isinstance(val, dict):
                errors.append(f"couplings[{i}].value: expected a tagged quantity")
                continue
            if val.get("unit") != "cm^-1":
                errors.append(f"couplings[{i}].value: couplings must be given in cm^-1")
                continue
            num = _raw_number(val.get("value"), f"couplings[{i}].value.value", errors)
            if num is not None:
                table[tuple(pair)] = num
        cfg.couplings_cm1 = table or None
    cfg.use_placeholder_couplings = bool(raw.get("use_placeholder_couplings", False))

    phonon = raw.get("phonon", {}) or {}
    reorg = phonon.get("reorganization", [{"value": 0.0, "unit": "cm^-1"}])
    if isinstance(reorg, dict):
        reorg = [reorg]
    lams = []
    for i, node in enumerate(reorg):
        v = _quantity(node, "frequency", f"phonon.reorganization[{i}]", errors)
        if v is not None:
            lams.append(v / to_internal(1.0, "cm^-1"))
    if lams:
        cfg.reorganizations_cm1 = lams
    if "cutoff" in phonon:
        v = _quantity(phonon["cutoff"], "frequency", "phonon.cutoff", errors)
        if v is not None:
            cfg.cutoff_cm1 = v / to_internal(1.0, "cm^-1")
    if "temperature" in phonon:
        v = _quantity(phonon["temperature"], "temperature", "phonon.temperature", errors)
        if v is not None:
            cfg.t_phonon = v

    radiation = raw.get("radiation", {}) or {}
    if "temperature" in radiation:
        v = _quantity(radiation["temperature"], "temperature", "radiation.temperature", errors)
        if v is not None:
            cfg.t_radiation = v
    if "mask" in radiation:
        cfg.light_mask = {str(k): bool(v) for k, v in (radiation["mask"] or {}).items()}
    # note: the key is "enabled", not "on" (YAML 1.1 reads a bare "on" as a boolean key)
    if "enabled" in radiation:
        cfg.radiation_on = bool(radiation["enabled"])

    grid = raw.get("grid", {}) or {}
    for key, attr in (("start", "t_start"), ("stop", "t_stop"), ("step", "t_step")):
        if key in grid:
            v = _quantity(grid[key], "time", f"grid.{key}", errors)
            if v is not None:
                setattr(cfg, attr, v)

    if "initial_state" in raw:
        cfg.initial_state = raw["initial_state"]

    turn_on = raw.get("turn_on", {}) or {}
    if "alpha" in turn_on:
        v = _raw_number(turn_on["alpha"], "turn_on.alpha", errors)
        if v is not None:
            cfg.alpha = v
    if "mode" in turn_on:
        cfg.turn_on_mode = str(turn_on["mode"])

    output = raw.get("output", {}) or {}
    if "basis" in output:
        cfg.output_basis = str(output["basis"])
    if "elements" in output:
        cfg.elements = output["elements"]

    errors.extend(cfg.validate())
    if errors:
        raise ConfigError("invalid configuration:\n  " + "\n  ".join(errors))
    return cfg


# ---------------------------------------------------------------------------
# deterministic writers

def _format(x) -> str:
    if isinstance(x, (np.floating, float)):
        return f"{float(x):.17g}"
    return str(x)


def write_csv(path: str, names: list[str], cols: dict) -> int:
    """Write named columns; complex arrays are split into re_/im_ pairs."""
    out_names: list[str] = []
    out_cols: list[np.ndarray] = []
    for name in names:
        arr = np.asarray(cols[name])
        if np.iscomplexobj(arr):
            out_names += [f"re_{name}", f"im_{name}"]
            out_cols += [arr.real, arr.imag]
        else:
            out_names.append(name)
            out_cols.append(arr)
    n_rows = len(out_cols[0]) if out_cols else 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(out_names) + "\n")
        for i in range(n_rows):
            fh.write(",".join(_format(col[i]) for col in out_cols) + "\n")
    return n_rows


def _sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def _json_safe(obj):
    """Coerce manifests to JSON: arrays to lists, tuple/frozenset keys to strings."""
    if isinstance(obj, dict):
        return {("-".join(map(str, k)) if isinstance(k, (tuple, frozenset)) else str(k)):
                _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    return obj


def write_manifest(out_dir: str, subcommand: str, config_echo: dict,
                   files: list[str], extra: dict | None = None,
                   wall_clock: float = 0.0) -> str:
    """Manifest sidecar, written atomically after all data files exist."""
    manifest = {
        "tool": "excitonlight",
        "version": __version__,
        "subcommand": subcommand,
        "config": config_echo,
        "outputs": [{"path": os.path.basename(f), "sha256": _sha256(f)}
                    for f in sorted(files)],
        "wall_clock_s": wall_clock,
        "seed": 0,  # reserved; the numerics are deterministic and use no RNG
    }
    if extra:
        manifest.update(extra)
    path = os.path.join(out_dir, "manifest.json")
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(_json_safe(manifest), fh, indent=2, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, path)
    return path


def check_manifest(out_dir: str) -> list[str]:
    """Re-hash the bundle; returns a list of mismatch messages (empty = ok)."""
    path = os.path.join(out_dir, "manifest.json")
    if not os.path.exists(path):
        return [f"missing manifest: {path}"]
    with open(path, "r", encoding="utf-8") as fh:
        manifest = json.load(fh)
    problems = []
    for entry in manifest.get("outputs", []):
        fpath = os.path.join(out_dir, entry["path"])
        if not os.path.exists(fpath):
            problems.append(f"missing output file: {entry['path']}")
        elif _sha256(fpath) != entry["sha256"]:
            problems.append(f"hash mismatch: {entry['path']}")
    return problems


# ---------------------------------------------------------------------------
# subcommand implementations

def _config_echo(cfg: ScenarioConfig) -> dict:
    echo = dict(vars(cfg))
    echo["chromophores"] = [c.label for c in (cfg.chromophores or [])] or cfg.model
    if echo.get("couplings_cm1"):
        echo["couplings_cm1"] = {"-".join(k): v for k, v in echo["couplings_cm1"].items()}
    return echo


def _element_pairs(cfg: ScenarioConfig, scen: Scenario) -> list[tuple[int, int]]:
    d = scen.basis.dimension
    if cfg.elements == "populations":
        return [(a, a) for a in range(d)]
    if cfg.elements == "all":
        return [(a, b) for a in range(d) for b in range(a, d)]
    pairs = []
    for node in cfg.elements:
        a, b = int(node[0]), int(node[1])
        pairs.append((a - 1, b - 1))  # config uses 1-based eigenstate labels
    return pairs


def _trajectory_table(traj: Trajectory, pairs, label_fmt="e{}") -> tuple[list, dict]:
    names = ["t_ps"]
    cols = {"t_ps": traj.times}
    for (a, b) in pairs:
        la, lb = label_fmt.format(a + 1), label_fmt.format(b + 1)
        if a == b:
            nm = f"pop_{la}"
            names.append(nm)
            cols[nm] = traj.states[:, a, a].real
        else:
            nm = f"coh_{la}_{lb}"
            names.append(nm)
            cols[nm] = traj.states[:, a, b]
    return names, cols


def _cmd_simulate(cfg: ScenarioConfig, out_dir: str, t0: float) -> int:
    scen = build_scenario(cfg)
    pairs = _element_pairs(cfg, scen)
    files = []
    for lam in cfg.reorganizations_cm1:
        traj = scen.run(lam)
        if cfg.output_basis == "site":
            u = scen.basis.transform
            states = np.einsum("ij,tjk,lk->til", u, traj.states, u.conj())
            traj = Trajectory(traj.times, states, "site", traj.metadata)
        names, cols = _trajectory_table(traj, pairs,
                                        label_fmt="s{}" if cfg.output_basis == "site" else "e{}")
        path = os.path.join(out_dir, f"trajectory_lambda{lam:g}.csv")
        write_csv(path, names, cols)
        files.append(path)
    write_manifest(out_dir, "simulate", _config_echo(cfg), files,
                   extra={"model_hash": scen.hash,
                          "basis": cfg.output_basis,
                          "exciton_sectors": excitation_sectors(scen.model, scen.basis).tolist()},
                   wall_clock=time.monotonic() - t0)
    return 0


def _cmd_map(cfg: ScenarioConfig, out_dir: str, t0: float) -> int:
    scen = build_scenario(cfg)
    d = scen.basis.dimension
    files = []
    for lam in cfg.reorganizations_cm1:
        liou = scen.template(lam).build()
        db = compute_damping_basis(liou)
        names = ["t_ps"]
        cols: dict = {"t_ps": scen.times}
        if d == 2:
            targets = [(a, b, c, e) for a in range(2) for b in range(2)
                       for c in range(2) for e in range(2)]
        else:
            targets = [(a, b, d - 1, d - 1) for a in range(d) for b in range(d)]
        series = {t: np.empty(scen.times.size, complex) for t in targets}
        for i, t in enumerate(scen.times):
            chi = map_tensor(db, float(t))
            for tg in targets:
                series[tg][i] = chi.elements[tg]
        for (a, b, c, e) in targets:
            nm = f"chi_{a + 1}{b + 1}_{c + 1}{e + 1}"
            names.append(nm)
            cols[nm] = series[(a, b, c, e)]
        path = os.path.join(out_dir, f"map_lambda{lam:g}.csv")
        write_csv(path, names, cols)
        files.append(path)
    write_manifest(out_dir, "map", _config_echo(cfg), files,
                   extra={"model_hash": scen.hash},
                   wall_clock=time.monotonic() - t0)
    return 0


def _cmd_rates(cfg: ScenarioConfig, out_dir: str, t0: float) -> int:
    scen = build_scenario(cfg)
    d = scen.basis.dimension
    files = []
    for lam in cfg.reorganizations_cm1:
        tensor = assemble_tensor(scen.channels(lam), scen.basis)
        liou = liouvillian(scen.basis, tensor)
        db = compute_damping_basis(liou)
        rows = {"index": [], "re_L_per_ps": [], "im_L_radps": []}
        for i, val in enumerate(db.eigenvalues):
            rows["index"].append(float(i))
            rows["re_L_per_ps"].append(val.real)
            rows["im_L_radps"].append(val.imag)
        path = os.path.join(out_dir, f"eigenvalues_lambda{lam:g}.csv")
        write_csv(path, list(rows), {k: np.array(v) for k, v in rows.items()})
        files.append(path)

        singles = single_exciton_indices(scen.model, scen.basis)
        sel = []
        for a in range(d):
            for b in range(d):
                if a != b:
                    sel.append((a, a, b, b))       # population transfer
        for i, a in enumerate(singles):
            for b in singles[i + 1:]:
                sel.append((a, b, a, b))           # coherence decay
        erows = {"a": [], "b": [], "c": [], "d": [], "value": []}
        for (a, b, c, e) in sel:
            erows["a"].append(float(a + 1))
            erows["b"].append(float(b + 1))
            erows["c"].append(float(c + 1))
            erows["d"].append(float(e + 1))
            erows["value"].append(complex(tensor.elements[a, b, c, e]))
        path = os.path.join(out_dir, f"tensor_elements_lambda{lam:g}.csv")
        write_csv(path, list(erows), {k: np.array(v) for k, v in erows.items()})
        files.append(path)
    write_manifest(out_dir, "rates", _config_echo(cfg), files,
                   extra={"model_hash": scen.hash},
                   wall_clock=time.monotonic() - t0)
    return 0


def _cmd_regime(cfg: ScenarioConfig, out_dir: str, t0: float) -> int:
    from .analytic import classify_regime
    bundle = run_figure(3, {"t_radiation": cfg.t_radiation,
                            "couplings_cm1": cfg.couplings_cm1})
    names, cols = bundle.tables["fig03_mu_scan"]
    tags = []
    for i in range(len(cols["mu_scale"])):
        rep = classify_regime(cols["omega_eeprime_radps"][i],
                              cols["r_bb_eeprime_per_ps"][i])
        tags.append({"Coherent": 1.0, "Critical": 0.0, "Incoherent": -1.0}[rep.regime])
    names = names + ["coherent_flag"]
    cols = dict(cols)
    cols["coherent_flag"] = np.array(tags)
    path = os.path.join(out_dir, "regime_scan.csv")
    write_csv(path, names, cols)
    write_manifest(out_dir, "regime", _config_echo(cfg), [path],
                   extra=bundle.metadata, wall_clock=time.monotonic() - t0)
    return 0


def _cmd_figure(cfg: ScenarioConfig | None, out_dir: str, fig: int, t0: float,
                overrides: dict | None = None) -> int:
    o = dict(overrides or {})
    if cfg is not None:
        o.setdefault("t_phonon", cfg.t_phonon)
        o.setdefault("t_radiation", cfg.t_radiation)
        o.setdefault("cutoff_cm1", cfg.cutoff_cm1)
        if cfg.couplings_cm1:
            o.setdefault("couplings_cm1", cfg.couplings_cm1)
    bundle = run_figure(fig, o)
    files = []
    for name in sorted(bundle.tables):
        names, cols = bundle.tables[name]
        path = os.path.join(out_dir, f"{name}.csv")
        write_csv(path, names, cols)
        files.append(path)
    write_manifest(out_dir, f"figure {fig}",
                   _config_echo(cfg) if cfg else {"figure_defaults": True},
                   files, extra={"figure": fig, **bundle.metadata},
                   wall_clock=time.monotonic() - t0)
    return 0


def _cmd_turnon(cfg: ScenarioConfig, out_dir: str, t0: float) -> int:
    if cfg.alpha <= 0.0:
        raise ConfigError("turnon requires turn_on.alpha > 0 in the config")
    return _cmd_simulate(cfg, out_dir, t0)


# ---------------------------------------------------------------------------
# entry point

def _apply_overrides(raw: dict, overrides: list[str]) -> dict:
    for spec in overrides:
        if "=" not in spec:
            raise ConfigError(f"--override expects key=value, got {spec!r}")
        key, _, value = spec.partition("=")
        node = raw
        parts = key.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigError(f"--override {key}: {part} is not a mapping")
        node[parts[-1]] = yaml.safe_load(value)
    return raw


def dispatch(subcommand: str, args) -> int:
    t0 = time.monotonic()
    out_dir = args.out
    os.makedirs(out_dir, exist_ok=True)
    if getattr(args, "check", False):
        problems = check_manifest(out_dir)
        for p in problems:
            print(p, file=sys.stderr)
        return 0 if not problems else 2

    cfg = None
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            raw = yaml.safe_load(fh) or {}
        raw = _apply_overrides(raw, args.override or [])
        cfg = config_from_dict(raw)
    elif args.override:
        cfg = config_from_dict(_apply_overrides({}, args.override))

    if subcommand == "figure":
        if args.fig is None:
            raise ConfigError("figure requires --fig <1..10>")
        if args.fig not in FIGURE_IDS:
            raise ConfigError(f"unknown figure id {args.fig}; expected 1..10")
        return _cmd_figure(cfg, out_dir, args.fig, t0)
    if cfg is None:
        raise ConfigError(f"{subcommand} requires --config <path>")
    handler = {"simulate": _cmd_simulate, "map": _cmd_map, "rates": _cmd_rates,
               "regime": _cmd_regime, "turnon": _cmd_turnon}[subcommand]
    return handler(cfg, out_dir, t0)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="excitonlight",
        description="Open-system exciton dynamics under phonon baths and thermal light")
    parser.add_argument("subcommand",
                        choices=["simulate", "map", "rates", "regime", "figure", "turnon"])
    parser.add_argument("--config", help="scenario configuration file (YAML)")
    parser.add_argument("--out", default="out", help="output directory")
    parser.add_argument("--fig", type=int, help="figure id for the figure subcommand")
    parser.add_argument("--override", action="append",
                        help="dotted-path config override, e.g. turn_on.alpha=10")
    parser.add_argument("--check", action="store_true",
                        help="verify the manifest hashes in --out and exit")
    args = parser.parse_args(argv)
    try:
        return dispatch(args.subcommand, args)
    except (ConfigError, UnitError, ModelError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (NumericalError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
