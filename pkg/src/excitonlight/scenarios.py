"""Built-in model systems, turn-on schedules, and figure-dataset runners.

The chromophore energies and transition dipoles are the published PC645
values; the inter-site couplings are NOT published for this system and
ship here only as documented placeholders of plausible magnitude
(tens of cm^-1).  Every dataset that depends on them carries a
``couplings_provenance: placeholder-non-paper`` marker in its metadata,
and quantitative cross-checks against them are order-of-magnitude only.

Figure ids (see README for the full catalog):

1   dimer: radiative coherence decay rate vs donor-acceptor gap
2   dimer: same vs coupling/gap ratio
3   dimer: eigenvalue scan vs dipole scaling + map-tensor time series
    (phonon-only per reorganization energy, radiation-only per dipole scale)
4   dimer: map-tensor time series with both baths
5   four-site: sudden illumination from the ground state (exciton + site bases)
6   four-site: MBV sites decoupled from the light, reorganization 0 and 13
7   same as 6 at reorganization 130
8   four-site: artificially prepared in eigenstate 13
9   trace distance radiation-on vs radiation-off for the setup of 8
10  four-site: slow turn-on, peak coherences vs turn-on parameter alpha
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import erf as _erf

from . import analytic, bath, dynamics, redfield
from .model import (AggregateModel, Chromophore, ExcitonBasis, build_hamiltonian,
                    diagonalize, dipole_operator, transform)
from .units import to_internal

__all__ = [
    "CHROMOPHORE_TABLE",
    "PLACEHOLDER_COUPLINGS_CM1",
    "ScenarioConfig",
    "Scenario",
    "TurnOnSchedule",
    "builtin_model",
    "build_scenario",
    "erf_schedule",
    "run_figure",
    "observables_report",
    "relative_phase",
    "FIGURE_IDS",
]

# transition energy [eV], transition dipole [D]
CHROMOPHORE_TABLE = {
    "DBV_C": (2.112, 13.2),
    "DBV_D": (2.122, 13.1),
    "MBV_A": (1.990, 14.5),
    "MBV_B": (2.030, 14.5),
}

# Placeholder couplings [cm^-1]; NOT published values, order-of-magnitude
# stand-ins only (flagged in all metadata).
PLACEHOLDER_COUPLINGS_CM1 = {
    frozenset(("DBV_C", "DBV_D")): 40.0,
    frozenset(("DBV_C", "MBV_A")): 18.0,
    frozenset(("DBV_C", "MBV_B")): 34.0,
    frozenset(("DBV_D", "MBV_A")): 34.0,
    frozenset(("DBV_D", "MBV_B")): 18.0,
    frozenset(("MBV_A", "MBV_B")): 12.0,
}

_MODEL_SITES = {
    "single_chromophore": ["DBV_C"],
    "dbv_dimer": ["DBV_C", "DBV_D"],
    "pc645": ["DBV_C", "DBV_D", "MBV_A", "MBV_B"],
}

FIGURE_IDS = tuple(range(1, 11))


def builtin_model(model_id: str, couplings_cm1: dict | None = None,
                  light_mask: dict | None = None,
                  use_placeholder_couplings: bool = True) -> AggregateModel:
    """Construct one of the catalogued aggregates.

    ``couplings_cm1`` maps frozenset label pairs (or 2-tuples) to values
    in cm^-1 and overrides the placeholder set.  ``light_mask`` maps
    labels to booleans (missing labels stay coupled).
    """
    if model_id not in _MODEL_SITES:
        raise ValueError(f"unknown model id {model_id!r}")
    labels = _MODEL_SITES[model_id]
    chroms = [
        Chromophore(label=lab,
                    energy=to_internal(CHROMOPHORE_TABLE[lab][0], "eV"),
                    dipole=to_internal(CHROMOPHORE_TABLE[lab][1], "D"))
        for lab in labels
    ]
    n = len(labels)
    d = np.zeros((n, n))
    if n > 1:
        table = dict(PLACEHOLDER_COUPLINGS_CM1) if use_placeholder_couplings else {}
        if couplings_cm1:
            for key, val in couplings_cm1.items():
                table[frozenset(key)] = float(val)
        for j in range(n):
            for k in range(j + 1, n):
                key = frozenset((labels[j], labels[k]))
                if key not in table:
                    raise ValueError(
                        f"coupling {labels[j]}-{labels[k]} is required; these values "
                        "are not published for this system and must be supplied "
                        "(or accept the documented placeholders)")
                d[j, k] = d[k, j] = to_internal(table[key], "cm^-1")
    mask = None
    if light_mask:
        mask = [bool(light_mask.get(lab, True)) for lab in labels]
    return AggregateModel(chroms, d, light_mask=mask)


# ---------------------------------------------------------------------------
# scenario configuration


@dataclass
class ScenarioConfig:
    """Validated inputs of one run (or one reorganization-energy sweep)."""

    model: str = "single_chromophore"
    chromophores: list | None = None          # custom models: list of Chromophore
    couplings_cm1: dict | None = None
    use_placeholder_couplings: bool = False
    reorganizations_cm1: list = field(default_factory=lambda: [0.0])
    cutoff_cm1: float = 100.0
    t_phonon: float = 300.0
    t_radiation: float = 5600.0
    t_start: float = 0.0
    t_stop: float = 2.0
    t_step: float = 0.002
    initial_state: object = "ground"
    alpha: float = 0.0
    turn_on_mode: str = "erf"
    light_mask: dict | None = None
    radiation_on: bool = True
    output_basis: str = "exciton"
    elements: object = "populations"

    def validate(self) -> list[str]:
        """All violations at once, not fail-fast."""
        errors = []
        if self.model not in (*_MODEL_SITES, "custom"):
            errors.append(f"model: unknown id {self.model!r}")
        if self.model == "custom" and not self.chromophores:
            errors.append("chromophores: required for custom models")
        for i, lam in enumerate(self.reorganizations_cm1):
            if lam < 0:
                errors.append(f"phonon.reorganization[{i}]: must be >= 0, got {lam}")
        if self.cutoff_cm1 <= 0:
            errors.append(f"phonon.cutoff: must be > 0, got {self.cutoff_cm1}")
        if self.t_phonon <= 0:
            errors.append(f"phonon.temperature: must be > 0, got {self.t_phonon}")
        if self.t_radiation <= 0:
            errors.append(f"radiation.temperature: must be > 0, got {self.t_radiation}")
        if self.t_step <= 0:
            errors.append(f"grid.step: must be > 0, got {self.t_step}")
        if self.t_stop <= self.t_start:
            errors.append(f"grid: stop ({self.t_stop}) must exceed start ({self.t_start})")
        if self.alpha < 0:
            errors.append(f"turn_on.alpha: must be >= 0, got {self.alpha}")
        if self.turn_on_mode not in ("erf", "linear"):
            errors.append(f"turn_on.mode: must be erf or linear, got {self.turn_on_mode!r}")
        if self.output_basis not in ("exciton", "site"):
            errors.append(f"output.basis: must be exciton or site, got {self.output_basis!r}")
        if self.model in ("dbv_dimer", "pc645") and not (
                self.couplings_cm1 or self.use_placeholder_couplings):
            errors.append(
                "couplings: required for this model (they are not published; supply "
                "values or set use_placeholder_couplings: true to accept documented "
                "placeholders)")
        return errors


def model_hash(model: AggregateModel) -> str:
    payload = {
        "labels": model.labels,
        "energies": [c.energy for c in model.chromophores],
        "ground": [c.ground_energy for c in model.chromophores],
        "dipoles": [c.dipole for c in model.chromophores],
        "couplings": model.couplings.tolist(),
        "light_mask": model.light_mask,
    }
    return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()


def excitation_sectors(model: AggregateModel, basis: ExcitonBasis) -> np.ndarray:
    """Excitation number of each exciton state (exact block structure)."""
    numbers = model.space.excitation_numbers()
    weights = np.abs(basis.transform) ** 2
    return np.array([int(numbers[np.argmax(weights[:, k])]) for k in range(basis.dimension)])


def single_exciton_indices(model: AggregateModel, basis: ExcitonBasis) -> list[int]:
    """Exciton indices of the single-excitation manifold, descending energy."""
    sectors = excitation_sectors(model, basis)
    return [int(k) for k in range(basis.dimension) if sectors[k] == 1]


@dataclass
class Scenario:
    """Executable run: model, basis, channel factory, and initial state."""

    config: ScenarioConfig
    model: AggregateModel
    basis: ExcitonBasis
    times: np.ndarray
    rho0: np.ndarray  # exciton basis

    @property
    def hash(self) -> str:
        return model_hash(self.model)

    def channels(self, reorganization_cm1: float) -> list[redfield.CouplingChannel]:
        chans: list[redfield.CouplingChannel] = []
        if reorganization_cm1 > 0.0:
            dl = bath.DrudeLorentzParams.from_wavenumbers(
                reorganization_cm1, self.config.cutoff_cm1, self.config.t_phonon)
            chans.extend(redfield.phonon_channels(self.model, self.basis, dl))
        if self.config.radiation_on and any(self.model.light_mask):
            bb = bath.BlackbodyParams(self.config.t_radiation)
            chans.append(redfield.radiation_channel(self.model, self.basis, bb))
        return chans

    def template(self, reorganization_cm1: float) -> redfield.LiouvillianTemplate:
        return redfield.LiouvillianTemplate(self.basis, self.channels(reorganization_cm1))

    def turn_on_schedule(self) -> "TurnOnSchedule":
        v_exc = transform(dipole_operator(self.model, masked=True),
                          self.basis, "site_to_exciton")
        return TurnOnSchedule.for_coupling(self.config.alpha, self.basis, v_exc,
                                           mode=self.config.turn_on_mode)

    def run(self, reorganization_cm1: float) -> dynamics.Trajectory:
        meta = {"model_hash": self.hash,
                "reorganization_cm1": reorganization_cm1,
                "alpha": self.config.alpha}
        template = self.template(reorganization_cm1)
        if self.config.alpha > 0.0:
            traj = dynamics.propagate_timedep(self.rho0, template,
                                              self.turn_on_schedule(), self.times,
                                              metadata=meta)
        else:
            traj = dynamics.propagate(self.rho0, template.build(), self.times,
                                      metadata=meta)
        return traj


def _initial_state(spec, model: AggregateModel, basis: ExcitonBasis) -> np.ndarray:
    d = basis.dimension
    if spec == "ground" or spec is None:
        rho = np.zeros((d, d), dtype=complex)
        rho[d - 1, d - 1] = 1.0  # lowest-energy eigenstate is the last index
        return rho
    if isinstance(spec, dict) and "eigenstate" in spec:
        k = int(spec["eigenstate"])  # 1-based descending-energy label
        if not 1 <= k <= d:
            raise ValueError(f"eigenstate index must be in 1..{d}, got {k}")
        rho = np.zeros((d, d), dtype=complex)
        rho[k - 1, k - 1] = 1.0
        return rho
    if isinstance(spec, dict) and "site" in spec:
        j = model.site_index(str(spec["site"]))
        rho_site = np.zeros((d, d), dtype=complex)
        idx = 1 << j
        rho_site[idx, idx] = 1.0
        return transform(rho_site, basis, "site_to_exciton")
    if isinstance(spec, dict) and "matrix" in spec:
        rho_site = np.asarray(spec["matrix"], dtype=complex)
        return transform(rho_site, basis, "site_to_exciton")
    raise ValueError(f"unrecognized initial state {spec!r}")


def build_scenario(config: ScenarioConfig) -> Scenario:
    """Validate a config and assemble the deterministic runnable."""
    errors = config.validate()
    if errors:
        raise ValueError("invalid scenario configuration:\n  " + "\n  ".join(errors))
    if config.model == "custom":
        n = len(config.chromophores)
        d = np.zeros((n, n))
        if config.couplings_cm1:
            labels = [c.label for c in config.chromophores]
            for key, val in config.couplings_cm1.items():
                pair = tuple(key)
                j, k = labels.index(pair[0]), labels.index(pair[1])
                d[j, k] = d[k, j] = to_internal(float(val), "cm^-1")
        mask = None
        if config.light_mask:
            mask = [bool(config.light_mask.get(c.label, True)) for c in config.chromophores]
        model = AggregateModel(config.chromophores, d, light_mask=mask)
    else:
        model = builtin_model(config.model, config.couplings_cm1, config.light_mask,
                              use_placeholder_couplings=(
                                  config.use_placeholder_couplings
                                  or config.model == "single_chromophore"))
    basis = diagonalize(build_hamiltonian(model))
    n_steps = int(round((config.t_stop - config.t_start) / config.t_step))
    times = config.t_start + config.t_step * np.arange(n_steps + 1)
    rho0 = _initial_state(config.initial_state, model, basis)
    return Scenario(config=config, model=model, basis=basis, times=times, rho0=rho0)


# ---------------------------------------------------------------------------
# turn-on schedules


def erf_schedule(alpha: float, omega: float, t, mode: str = "erf"):
    """Dipole turn-on factor in [0, 1] at time ``t``.

    ``erf`` mode evaluates erf(|omega| t / alpha); ``linear`` mode uses
    the slope interpretation 2 |omega| t / (pi alpha) clamped at one.
    ``alpha = 0`` in erf mode means sudden turn-on (factor 1 for t >= 0).
    """
    t = np.asarray(t, dtype=float)
    if mode == "erf":
        if alpha == 0.0:
            out = np.ones_like(t)
        else:
            out = _erf(abs(omega) * np.clip(t, 0.0, None) / alpha)
    elif mode == "linear":
        if alpha <= 0.0:
            raise ValueError("linear turn-on requires alpha > 0")
        out = np.clip(2.0 * abs(omega) * np.clip(t, 0.0, None) / (math.pi * alpha), 0.0, 1.0)
    else:
        raise ValueError(f"unknown turn-on mode {mode!r}")
    return out if out.ndim else float(out)


@dataclass
class TurnOnSchedule:
    """Per-transition dipole ramp: each allowed pair (a, b) follows its
    own |omega_ab| through the common turn-on parameter alpha."""

    alpha: float
    omega_abs: np.ndarray      # |omega_ab| where scheduled, 0 where inert
    mode: str = "erf"

    @classmethod
    def for_coupling(cls, alpha: float, basis: ExcitonBasis, coupling: np.ndarray,
                     mode: str = "erf") -> "TurnOnSchedule":
        scale = np.abs(coupling).max()
        allowed = np.abs(coupling) > 1e-12 * max(scale, 1e-300)
        omega_abs = np.where(allowed, np.abs(basis.omega_matrix), 0.0)
        return cls(alpha=alpha, omega_abs=omega_abs, mode=mode)

    def scales(self, t: float) -> np.ndarray:
        s = np.ones_like(self.omega_abs)
        if self.alpha == 0.0:
            return s
        mask = self.omega_abs > 0.0
        if self.mode == "erf":
            s[mask] = _erf(self.omega_abs[mask] * max(t, 0.0) / self.alpha)
        else:
            s[mask] = np.clip(2.0 * self.omega_abs[mask] * max(t, 0.0)
                              / (math.pi * self.alpha), 0.0, 1.0)
        return s

    def saturation_time(self) -> float:
        if self.alpha == 0.0:
            return 0.0
        w_min = self.omega_abs[self.omega_abs > 0.0]
        if w_min.size == 0:
            return 0.0
        wm = float(w_min.min())
        if self.mode == "erf":
            return 6.0 * self.alpha / wm   # erfc(6) ~ 2e-17: saturated
        return math.pi * self.alpha / (2.0 * wm)

    def step_hint(self, t: float, max_delta: float) -> float:
        """Largest step over which no factor moves by more than max_delta."""
        w = self.omega_abs[self.omega_abs > 0.0]
        if self.alpha == 0.0 or w.size == 0:
            return math.inf
        z = w * max(t, 0.0) / self.alpha
        if self.mode == "erf":
            slopes = (2.0 / math.sqrt(math.pi)) * (w / self.alpha) * np.exp(-z * z)
        else:
            slopes = 2.0 * w / (math.pi * self.alpha)
        smax = float(slopes.max())
        if smax <= 0.0:
            return math.inf
        return max_delta / smax


# ---------------------------------------------------------------------------
# observables


def observables_report(traj: dynamics.Trajectory, elements=None) -> dict:
    """Peak amplitudes, decay fits, frequencies and stationary values.

    Decay rates come from a linear regression of log |signal| (on
    envelope maxima when the signal oscillates); frequencies from
    zero-crossing counting of the real part, omitted when fewer than
    three full periods are present.  Degenerate fits are flagged rather
    than silently returned.
    """
    t = traj.times
    if elements is None:
        d = traj.states.shape[1]
        elements = [(a, b) for a in range(d) for b in range(a, d)]
    report = {}
    for (a, b) in elements:
        series = traj.element(a, b)
        report[f"{a},{b}"] = _series_summary(t, series)
    return report


def _series_summary(t: np.ndarray, y: np.ndarray) -> dict:
    mag = np.abs(y)
    peak = float(mag.max())
    out: dict = {
        "peak_amplitude": peak,
        "t_peak": float(t[int(np.argmax(mag))]),
        "stationary_value": complex(np.mean(y[max(1, int(0.95 * y.size)):])),
        "decay_rate": None, "decay_residual": None,
        "frequency": None, "zero_crossings": 0, "flags": [],
    }
    if peak < 1e-300:
        out["flags"].append("zero_signal")
        return out
    # envelope samples: interior maxima of |y|, else the raw decay
    idx = [i for i in range(1, mag.size - 1)
           if mag[i] >= mag[i - 1] and mag[i] >= mag[i + 1] and mag[i] > peak * 1e-12]
    if len(idx) >= 3:
        tt, yy = t[idx], np.log(mag[idx])
    else:
        keep = mag > peak * 1e-12
        tt, yy = t[keep], np.log(mag[keep])
    if tt.size >= 2 and np.ptp(tt) > 0:
        slope, intercept = np.polyfit(tt, yy, 1)
        resid = float(np.sqrt(np.mean((yy - (slope * tt + intercept)) ** 2)))
        out["decay_rate"] = float(-slope)
        out["decay_residual"] = resid
        if resid > 0.5:
            out["flags"].append("poor_decay_fit")
    else:
        out["flags"].append("degenerate_decay_fit")
    re = np.real(y)
    signs = np.sign(re[np.abs(re) > peak * 1e-9])
    crossings = int(np.count_nonzero(np.diff(signs) != 0)) if signs.size else 0
    out["zero_crossings"] = crossings
    if crossings >= 6:
        # mean crossing spacing is half a period
        cross_t = t[np.abs(re) > peak * 1e-9][np.flatnonzero(np.diff(signs) != 0)]
        span = cross_t[-1] - cross_t[0]
        if span > 0:
            out["frequency"] = float(math.pi * (crossings - 1) / span)
    return out


def relative_phase(times: np.ndarray, a: np.ndarray, b: np.ndarray) -> float:
    """Phase angle between two co-rotating oscillatory series.

    arg of the amplitude-weighted cross correlation sum_t a conj(b);
    near 0 for in-phase signals and near +/- pi for sign-flipped ones.
    """
    z = np.sum(a * np.conj(b))
    if abs(z) == 0.0:
        raise ValueError("signals have no overlapping support")
    return float(np.angle(z))


# ---------------------------------------------------------------------------
# figure runners


def _grid(start, stop, step) -> np.ndarray:
    n = int(round((stop - start) / step))
    return start + step * np.arange(n + 1)


def _dimer_scenario_parts(couplings_cm1=None, t_bb=5600.0):
    model = builtin_model("dbv_dimer", couplings_cm1)
    basis = diagonalize(build_hamiltonian(model))
    bb = bath.BlackbodyParams(t_bb)
    return model, basis, bb


def _dimer_indices(model, basis):
    singles = single_exciton_indices(model, basis)
    e_idx, ep_idx = singles[0], singles[1]  # descending energy
    sectors = excitation_sectors(model, basis)
    f_idx = int(np.flatnonzero(sectors == 2)[0])
    g_idx = int(np.flatnonzero(sectors == 0)[0])
    return e_idx, ep_idx, f_idx, g_idx


def _tracked_dimer_rates(model, basis, bb, mu_scale=1.0):
    scaled = AggregateModel(
        [Chromophore(c.label, c.energy, c.dipole * mu_scale, c.ground_energy)
         for c in model.chromophores],
        model.couplings, light_mask=model.light_mask)
    chan = redfield.radiation_channel(scaled, basis, bb)
    tensor = redfield.assemble_tensor([chan], basis)
    liou = redfield.liouvillian(basis, tensor)
    e_idx, ep_idx, _, _ = _dimer_indices(model, basis)
    omega = float(basis.omega_matrix[e_idx, ep_idx])
    return analytic.dimer_rate_estimates(tensor.elements, liou.matrix,
                                         e_idx, ep_idx, omega)


def _chi_series(liou, row_pair, col_pairs, times):
    """Selected map-tensor elements chi[row, col](t) on a time grid."""
    db = dynamics.compute_damping_basis(liou)
    d = liou.dimension
    (a, b) = row_pair
    out = {}
    if db.accepted:
        row = db.eigenvectors[a * d + b, :]
        phases = np.exp(np.outer(times, db.eigenvalues))
        for (c, dd) in col_pairs:
            col = db.inverse[:, c * d + dd]
            out[(a, b, c, dd)] = phases @ (row * col)
    else:
        series = {pair: np.empty(times.size, dtype=complex) for pair in col_pairs}
        for i, t in enumerate(times):
            chi = dynamics.map_tensor(db, float(t))
            for (c, dd) in col_pairs:
                series[(c, dd)][i] = chi.elements[a, b, c, dd]
        for (c, dd) in col_pairs:
            out[(a, b, c, dd)] = series[(c, dd)]
    return out


def _fig_defaults(overrides):
    o = dict(overrides or {})
    o.setdefault("t_phonon", 300.0)
    o.setdefault("t_radiation", 5600.0)
    o.setdefault("cutoff_cm1", 100.0)
    return o


@dataclass
class FigureBundle:
    """In-memory dataset bundle: named tables plus sidecar metadata."""

    fig: int
    tables: dict            # name -> (column names, column arrays)
    metadata: dict


def run_figure(fig: int, overrides: dict | None = None) -> FigureBundle:
    """Produce the dataset bundle for one catalogued figure."""
    if fig not in FIGURE_IDS:
        raise ValueError(f"unknown figure id {fig}; expected 1..10")
    o = _fig_defaults(overrides)
    runner = {1: _run_fig1, 2: _run_fig2, 3: _run_fig3, 4: _run_fig4,
              5: _run_fig5, 6: _run_fig6, 7: _run_fig7, 8: _run_fig8,
              9: _run_fig9, 10: _run_fig10}[fig]
    bundle = runner(o)
    bundle.metadata.setdefault("couplings_provenance", "placeholder-non-paper")
    bundle.metadata.setdefault("overrides", {k: v for k, v in (overrides or {}).items()})
    return bundle


def _scan_columns(rows):
    names = list(rows[0].keys())
    cols = {n: np.array([r[n] for r in rows]) for n in names}
    return names, cols


def _run_fig1(o):
    deltas = o.get("delta_scan_cm1", np.linspace(5.0, 800.0, 40))
    bbp = bath.BlackbodyParams(o["t_radiation"])
    rows = []
    for delta in deltas:
        couplings = {("DBV_C", "DBV_D"): o.get("coupling_cm1",
                                               PLACEHOLDER_COUPLINGS_CM1[frozenset(("DBV_C", "DBV_D"))])}
        e_c = CHROMOPHORE_TABLE["DBV_C"][0]
        chroms = [
            Chromophore("DBV_C", to_internal(e_c, "eV"), to_internal(13.2, "D")),
            Chromophore("DBV_D", to_internal(e_c, "eV") + to_internal(delta, "cm^-1"),
                        to_internal(13.1, "D")),
        ]
        dmat = np.zeros((2, 2))
        dmat[0, 1] = dmat[1, 0] = to_internal(couplings[("DBV_C", "DBV_D")], "cm^-1")
        model = AggregateModel(chroms, dmat)
        basis = diagonalize(build_hamiltonian(model))
        rates = _tracked_dimer_rates(model, basis, bbp)
        rows.append({
            "delta_cm1": delta,
            "omega_eeprime_radps": rates.omega,
            "re_L_eeprime_per_ps": rates.eigenvalue.real,
            "im_L_eeprime_radps": rates.eigenvalue.imag,
            "gamma_eeprime_per_ps": abs(rates.eigenvalue.real),
            "r_bb_eeprime_per_ps": rates.gamma_estimate,
            "two_r_bb_eeprime_per_ps": rates.transfer_estimate,
        })
    names, cols = _scan_columns(rows)
    return FigureBundle(1, {"fig01_gap_scan": (names, cols)},
                        {"model": "dbv_dimer", "scan": "donor-acceptor gap"})


def _run_fig2(o):
    gap_cm1 = (CHROMOPHORE_TABLE["DBV_D"][0] - CHROMOPHORE_TABLE["DBV_C"][0]) * 8065.543937
    ratios = o.get("ratio_scan", np.linspace(0.05, 4.0, 40))
    bbp = bath.BlackbodyParams(o["t_radiation"])
    rows = []
    for ratio in ratios:
        model = builtin_model("dbv_dimer",
                              {("DBV_C", "DBV_D"): ratio * gap_cm1})
        basis = diagonalize(build_hamiltonian(model))
        rates = _tracked_dimer_rates(model, basis, bbp)
        rows.append({
            "ratio_coupling_over_gap": ratio,
            "coupling_cm1": ratio * gap_cm1,
            "omega_eeprime_radps": rates.omega,
            "re_L_eeprime_per_ps": rates.eigenvalue.real,
            "im_L_eeprime_radps": rates.eigenvalue.imag,
            "gamma_eeprime_per_ps": abs(rates.eigenvalue.real),
            "r_bb_eeprime_per_ps": rates.gamma_estimate,
            "two_r_bb_eeprime_per_ps": rates.transfer_estimate,
        })
    names, cols = _scan_columns(rows)
    return FigureBundle(2, {"fig02_coupling_scan": (names, cols)},
                        {"model": "dbv_dimer", "scan": "coupling over gap",
                         "gap_cm1": gap_cm1})


def _dimer_chi_tables(o, with_tb: bool, with_bb: bool, tag: str,
                      lambdas=(0.0, 13.0, 130.0), mu_scales=(1.0,)):
    model, basis, bbp = _dimer_scenario_parts(o.get("couplings_cm1"), o["t_radiation"])
    e_idx, ep_idx, f_idx, g_idx = _dimer_indices(model, basis)
    times = _grid(0.0, o.get("t_stop", 2.0), o.get("t_step", 0.002))
    col_pairs = [(g_idx, g_idx), (e_idx, e_idx), (ep_idx, ep_idx), (f_idx, f_idx)]
    col_tags = ["gg", "ee", "epep", "ff"]
    tables = {}
    cases = []
    if with_tb and not with_bb:
        cases = [(f"lambda{int(lam)}", lam, 1.0) for lam in lambdas]
    elif with_bb and not with_tb:
        cases = [(f"mu{int(s)}", 0.0, s) for s in mu_scales]
    else:
        cases = [(f"lambda{int(lam)}", lam, 1.0) for lam in lambdas]
    for label, lam, mu_scale in cases:
        chans = []
        if (with_tb and lam > 0.0):
            dl = bath.DrudeLorentzParams.from_wavenumbers(lam, o["cutoff_cm1"], o["t_phonon"])
            chans.extend(redfield.phonon_channels(model, basis, dl))
        if with_bb:
            scaled = AggregateModel(
                [Chromophore(c.label, c.energy, c.dipole * mu_scale) for c in model.chromophores],
                model.couplings, light_mask=model.light_mask)
            chans.append(redfield.radiation_channel(scaled, basis, bbp))
        if chans:
            liou = redfield.liouvillian(basis, redfield.assemble_tensor(chans, basis))
        else:
            liou = redfield.liouvillian(
                basis, redfield.RedfieldTensor(
                    np.zeros((4, 4, 4, 4), complex), basis, ()))
        series = _chi_series(liou, (e_idx, ep_idx), col_pairs, times)
        names = ["t_ps"]
        cols = {"t_ps": times}
        for (c, dd), ctag in zip(col_pairs, col_tags):
            vals = series[(e_idx, ep_idx, c, dd)]
            names += [f"re_chi_eep_{ctag}", f"im_chi_eep_{ctag}"]
            cols[f"re_chi_eep_{ctag}"] = vals.real
            cols[f"im_chi_eep_{ctag}"] = vals.imag
        tables[f"{tag}_{label}"] = (names, cols)
    return model, basis, tables


def _run_fig3(o):
    model, basis, bbp = _dimer_scenario_parts(o.get("couplings_cm1"), o["t_radiation"])
    scales = o.get("mu_scan", np.geomspace(1.0, 400.0, 60))
    rows = []
    for s in scales:
        rates = _tracked_dimer_rates(model, basis, bbp, mu_scale=s)
        rows.append({
            "mu_scale": s,
            "mu_c_debye": 13.2 * s,
            "omega_eeprime_radps": rates.omega,
            "re_L_eeprime_per_ps": rates.eigenvalue.real,
            "im_L_eeprime_radps": rates.eigenvalue.imag,
            "r_bb_eeprime_per_ps": rates.gamma_estimate,
            "two_r_bb_eeprime_per_ps": rates.transfer_estimate,
        })
    names, cols = _scan_columns(rows)
    tables = {"fig03_mu_scan": (names, cols)}
    _, _, tb_tables = _dimer_chi_tables(o, with_tb=True, with_bb=False,
                                        tag="fig03_chi_tb")
    _, _, bb_tables = _dimer_chi_tables(o, with_tb=False, with_bb=True,
                                        tag="fig03_chi_bb", mu_scales=(1.0, 2.0, 4.0))
    tables.update(tb_tables)
    tables.update(bb_tables)
    return FigureBundle(3, tables, {"model": "dbv_dimer",
                                    "scan": "dipole scaling + map tensor elements"})


def _run_fig4(o):
    model, basis, tables = _dimer_chi_tables(o, with_tb=True, with_bb=True,
                                             tag="fig04_chi_tbbb")
    return FigureBundle(4, tables, {"model": "dbv_dimer",
                                    "content": "map tensor elements, both baths"})


def _pc645_labels():
    return _MODEL_SITES["pc645"]


def _pc645_exciton_names(model, basis):
    """1-based descending labels for the single-exciton manifold."""
    singles = single_exciton_indices(model, basis)
    return {idx: f"e{idx + 1}" for idx in singles}


def _pc645_traj_tables(traj_exciton, model, basis, prefix):
    """Exciton-basis and site-basis tables for a four-site trajectory."""
    singles = single_exciton_indices(model, basis)
    names_map = _pc645_exciton_names(model, basis)
    times = traj_exciton.times
    names = ["t_ps"]
    cols = {"t_ps": times}
    for idx in singles:
        nm = f"pop_{names_map[idx]}"
        names.append(nm)
        cols[nm] = traj_exciton.states[:, idx, idx].real
    for i, a in enumerate(singles):
        for b in singles[i + 1:]:
            nm = f"coh_{names_map[a]}_{names_map[b]}"
            series = traj_exciton.states[:, a, b]
            names += [f"re_{nm}", f"im_{nm}"]
            cols[f"re_{nm}"] = series.real
            cols[f"im_{nm}"] = series.imag
    exciton_table = (names, cols)

    u = basis.transform
    site_states = np.einsum("ij,tjk,lk->til", u, traj_exciton.states, u.conj())
    labels = model.labels
    names_s = ["t_ps"]
    cols_s = {"t_ps": times}
    for j, lab in enumerate(labels):
        idx = 1 << j
        nm = f"pop_site_{lab}"
        names_s.append(nm)
        cols_s[nm] = site_states[:, idx, idx].real
    site_pairs = [("DBV_C", "DBV_D"), ("MBV_A", "MBV_B")]
    for la, lb in site_pairs:
        ja, jb = model.site_index(la), model.site_index(lb)
        series = site_states[:, 1 << ja, 1 << jb]
        nm = f"coh_site_{la}_{lb}"
        names_s += [f"re_{nm}", f"im_{nm}"]
        cols_s[f"re_{nm}"] = series.real
        cols_s[f"im_{nm}"] = series.imag
    site_table = (names_s, cols_s)
    return {f"{prefix}_exciton": exciton_table, f"{prefix}_site": site_table}


def _pc645_config(o, **kw) -> ScenarioConfig:
    cfg = ScenarioConfig(model="pc645", use_placeholder_couplings=True,
                         couplings_cm1=o.get("couplings_cm1"),
                         cutoff_cm1=o["cutoff_cm1"], t_phonon=o["t_phonon"],
                         t_radiation=o["t_radiation"],
                         t_stop=o.get("t_stop", 2.0), t_step=o.get("t_step", 0.002))
    for k, v in kw.items():
        setattr(cfg, k, v)
    return cfg


def _run_fig5(o):
    tables = {}
    meta = {"model": "pc645", "initial_state": "ground"}
    for lam in o.get("lambdas", (0.0, 13.0, 130.0)):
        cfg = _pc645_config(o, initial_state="ground")
        scen = build_scenario(cfg)
        traj = scen.run(lam)
        tables.update(_pc645_traj_tables(traj, scen.model, scen.basis,
                                         f"fig05_lambda{int(lam)}"))
        meta["model_hash"] = scen.hash
        meta["site_index_map"] = {lab: 1 << j for j, lab in enumerate(scen.model.labels)}
        meta["single_exciton_labels"] = list(
            _pc645_exciton_names(scen.model, scen.basis).values())
    return FigureBundle(5, tables, meta)


def _run_fig6(o, lambdas=(0.0, 13.0)):
    tables = {}
    mask = {"MBV_A": False, "MBV_B": False}
    meta = {"model": "pc645", "light_mask": mask, "initial_state": "ground"}
    for lam in lambdas:
        cfg = _pc645_config(o, initial_state="ground", light_mask=mask)
        scen = build_scenario(cfg)
        traj = scen.run(lam)
        tag = 6 if len(lambdas) > 1 else 7
        tables.update(_pc645_traj_tables(traj, scen.model, scen.basis,
                                         f"fig{tag:02d}_lambda{int(lam)}"))
        meta["model_hash"] = scen.hash
    return FigureBundle(6 if len(lambdas) > 1 else 7, tables, meta)


def _run_fig7(o):
    return _run_fig6(o, lambdas=(130.0,))


def _run_fig8(o):
    tables = {}
    meta = {"model": "pc645", "initial_state": "eigenstate 13"}
    for lam in o.get("lambdas", (0.0, 13.0, 130.0)):
        cfg = _pc645_config(o, initial_state={"eigenstate": 13})
        scen = build_scenario(cfg)
        traj = scen.run(lam)
        tables.update(_pc645_traj_tables(traj, scen.model, scen.basis,
                                         f"fig08_lambda{int(lam)}"))
        meta["model_hash"] = scen.hash
    return FigureBundle(8, tables, meta)


def _run_fig9(o):
    names = ["t_ps"]
    cols = {}
    meta = {"model": "pc645", "initial_state": "eigenstate 13",
            "comparison": "radiation on vs radiation off"}
    for lam in o.get("lambdas", (0.0, 13.0)):
        cfg_on = _pc645_config(o, initial_state={"eigenstate": 13})
        scen_on = build_scenario(cfg_on)
        traj_on = scen_on.run(lam)
        cfg_off = _pc645_config(o, initial_state={"eigenstate": 13}, radiation_on=False)
        scen_off = build_scenario(cfg_off)
        traj_off = scen_off.run(lam)
        cols.setdefault("t_ps", traj_on.times)
        dist = np.array([dynamics.trace_distance(a, b)
                         for a, b in zip(traj_on.states, traj_off.states)])
        nm = f"trace_distance_lambda{int(lam)}"
        names.append(nm)
        cols[nm] = dist
        meta["model_hash"] = scen_on.hash
    return FigureBundle(9, {"fig09_trace_distance": (names, cols)}, meta)


def _run_fig10(o):
    tables = {}
    meta = {"model": "pc645", "initial_state": "ground", "reorganization_cm1": 0.0}
    for alpha in o.get("alphas", (0.0, 1.0, 10.0, 100.0)):
        cfg = _pc645_config(o, initial_state="ground", alpha=float(alpha))
        scen = build_scenario(cfg)
        traj = scen.run(0.0)
        tables.update(_pc645_traj_tables(traj, scen.model, scen.basis,
                                         f"fig10_alpha{int(alpha)}"))
        meta["model_hash"] = scen.hash
    meta["alphas"] = list(o.get("alphas", (0.0, 1.0, 10.0, 100.0)))
    return FigureBundle(10, tables, meta)
