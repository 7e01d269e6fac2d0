"""Experiment runners behind the command line.

Each runner takes a validated config dict, writes its artifacts into an
output directory and returns an :class:`ExperimentResult`.  Work is split
into independent units (runs, sweep points, shot chunks) that only depend on
``(seed, unit index)``; a thread pool maps them in order and reductions
happen afterwards on the ordered results, so outputs do not depend on the
number of threads.
"""
from __future__ import annotations

import copy
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema
import numpy as np

from . import io
from .channel import average_gate_fidelity, exact_ptm, ptm_diagnostics
from .circuit import Circuit, EasyLayer, propagate_error_front, simulate_exact
from .geometry import error_curves, first_order_error
from .metrics import (ScalingSeries, basis_state, bare_fidelity, fit_scaling_exponent, layer_unitaries,
                      rc_average_fidelity, twirled_unitary, worst_case_state)
from .optimize import TARGETS, optimize_first_order_pulse
from .pauli import pauli_labels, pauli_sum
from .schedule import (SQ_CLIFFORDS, ControlTerm, HamiltonianSchedule, NoiseTerm, PulseShape, embed,
                       export_pulse, import_pulse, make_gate)
from .spectra import (default_omega_grid, filter_function, process_from_dict, second_moment, synthesize,
                      white_noise_time_integral)
from .twirl import TwirlAssignment, apply_twirls, enumerate_twirl_average, layer_rng, sample_twirls

log = logging.getLogger(__name__)

EXPERIMENTS = ("error-walk", "fidelity-sweep", "ptm", "filter-function", "pulse-opt")

DEFAULT_NOISE = {"cnot": {"IZ": 1.0, "ZI": -1.0, "ZZ": 0.5}, "xx_halfpi": {"IZ": 1.0, "ZI": -1.0, "ZZ": 0.5},
                 "iswap": {"XX": 1.0, "YY": 1.0}}


class ConfigError(ValueError):
    """Invalid or inconsistent experiment configuration (exit code 2)."""


class NumericalCheckError(RuntimeError):
    """A numerical assertion of an experiment failed (exit code 3)."""


@dataclass
class ExperimentResult:
    name: str
    files: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)  # name -> (passed, detail)

    @property
    def passed(self) -> bool:
        return all(ok for ok, _ in self.checks.values())


# ---------------------------------------------------------------------------
# configuration

_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_posint = {"type": "integer", "minimum": 1}
_range = {"type": "object", "properties": {"start": _posint, "stop": _posint, "step": _posint},
          "required": ["start", "stop"], "additionalProperties": False}
_terms = {"type": "object", "additionalProperties": _num, "propertyNames": {"pattern": "^[IXYZ]+$"}, "minProperties": 1}
# "cosine", "constant", "optimize" or a pulse file path
_pulse = {"type": "string", "minLength": 1}
_process = {"type": "object", "properties": {"kind": {"enum": ["quasi-static", "ornstein-uhlenbeck", "white", "tabulated"]}},
            "required": ["kind"]}
_common = {"experiment": {"enum": list(EXPERIMENTS)}, "seed": {"type": "integer", "minimum": 0},
           "description": {"type": "string"}}

SCHEMAS = {
    "error-walk": {
        "gate": {"enum": ["iswap", "cnot"]}, "delta": _num, "noise_terms": _terms,
        "depths": {"oneOf": [{"type": "array", "items": _posint, "minItems": 1}, _range]},
        "runs": _posint, "second_order": {"type": "boolean"}, "top_k": _posint,
        "interleave_hadamard": {"type": "boolean"}, "exclude_first": {"type": "integer", "minimum": 0},
        "twirl_set": {"type": "array", "items": {"type": "string"}},
        "assert": {"type": "object", "properties": {"bare_exponent": {"type": "array", "items": _num, "minItems": 2, "maxItems": 2},
                                                    "rms_exponent": {"type": "array", "items": _num, "minItems": 2, "maxItems": 2},
                                                    "mean_square_sigmas": _pos},
                   "additionalProperties": False},
    },
    "fidelity-sweep": {
        "gate": {"enum": ["iswap", "cnot"]}, "deltas": {"type": "array", "items": _num, "minItems": 1},
        "noise_terms": _terms, "depth": _posint, "initial_state": {"type": "string"},
        "twirl_mode": {"enum": ["enumerate", "layerwise", "sample"]}, "shots": _posint,
        "robust_pulse": {"oneOf": [_pulse, {"type": "null"}]}, "assert_ordering": {"type": "boolean"},
    },
    "ptm": {
        "gate": {"enum": ["cnot", "iswap", "xx_halfpi"]}, "delta": _num, "noise_terms": _terms,
        "twirl_mode": {"enum": ["enumerate", "sample"]}, "shots": _posint,
        "robust_pulse": {"oneOf": [_pulse, {"type": "null"}]},
    },
    "filter-function": {
        "target": {"enum": list(TARGETS)}, "pulse": _pulse, "duration": _pos, "n_steps": {"type": "integer", "minimum": 16},
        "noise_axis": {"type": "string", "pattern": "^[IXYZ]+$"}, "process": _process,
        "coupled_to_control": {"type": "boolean"}, "omega_points": {"type": "integer", "minimum": 16},
        "cutoff_periods": _posint, "shots": {"type": "integer", "minimum": 0},
        "mc_tolerance": _pos, "parseval_tolerance": _pos,
    },
    "pulse-opt": {
        "target": {"enum": list(TARGETS)}, "noise_axes": {"type": "array", "items": {"type": "string", "pattern": "^[IXYZ]+$"}, "minItems": 1},
        "n_coefficients": {"type": "integer", "minimum": 3}, "duration": _pos,
        "n_steps": {"type": "integer", "minimum": 16}, "max_iter": _posint, "n_starts": _posint,
    },
}

DEFAULTS = {
    "error-walk": {"gate": "iswap", "delta": 0.01, "depths": {"start": 4, "stop": 256, "step": 4}, "runs": 200,
                   "second_order": False, "top_k": 3, "interleave_hadamard": False, "exclude_first": 2},
    "fidelity-sweep": {"gate": "iswap", "deltas": [0.0, 0.02, 0.05, 0.1, 0.15, 0.2], "depth": 1,
                       "initial_state": "worst_case", "twirl_mode": "enumerate", "shots": 1000,
                       "robust_pulse": None, "assert_ordering": False},
    "ptm": {"gate": "cnot", "delta": 0.05, "twirl_mode": "enumerate", "shots": 1000, "robust_pulse": "optimize"},
    "filter-function": {"target": "x_pi", "pulse": "cosine", "duration": 1.0, "n_steps": 512, "noise_axis": "Z",
                        "process": {"kind": "quasi-static", "std": 0.01}, "coupled_to_control": False,
                        "omega_points": 4096, "cutoff_periods": 64, "shots": 0, "mc_tolerance": 0.05,
                        "parseval_tolerance": 1e-6},
    "pulse-opt": {"target": "xx_halfpi", "noise_axes": ["IZ", "ZI"], "n_coefficients": 5, "duration": 1.0,
                  "n_steps": 512, "max_iter": 10000, "n_starts": 8},
}


def _error_path(err) -> str:
    return "/" + "/".join(str(p) for p in err.absolute_path) if err.absolute_path else "<root>"


def parse_config_text(text: str, source: str = "<config>") -> dict:
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{source}: line {e.lineno}, column {e.colno}: {e.msg}") from None
    if not isinstance(cfg, dict):
        raise ConfigError(f"{source}: top level must be a JSON object")
    return cfg


def resolve_config(experiment: str, cfg: dict | None = None, seed: int | None = None) -> dict:
    """Validate ``cfg`` against the experiment schema and fill defaults."""
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {experiment!r}")
    cfg = copy.deepcopy(cfg or {})
    named = cfg.get("experiment", experiment)
    if named != experiment:
        raise ConfigError(f"config is for experiment {named!r}, not {experiment!r}")
    schema = {"type": "object", "properties": {**_common, **SCHEMAS[experiment]}, "additionalProperties": False}
    errors = sorted(jsonschema.Draft202012Validator(schema).iter_errors(cfg), key=lambda e: list(e.absolute_path))
    if errors:
        raise ConfigError("; ".join(f"at {_error_path(e)}: {e.message}" for e in errors))
    out = {**copy.deepcopy(DEFAULTS[experiment]), **cfg, "experiment": experiment}
    if seed is not None:
        out["seed"] = int(seed)
    out.setdefault("seed", 0)
    if experiment in ("error-walk", "fidelity-sweep", "ptm"):
        out.setdefault("noise_terms", DEFAULT_NOISE[out["gate"]])
        if experiment == "ptm" and out["gate"] == "iswap" and out.get("robust_pulse"):
            raise ConfigError("at /robust_pulse: the iswap layer has no shaped pulse")
        if experiment == "fidelity-sweep" and out["gate"] == "iswap" and out.get("robust_pulse"):
            raise ConfigError("at /robust_pulse: the iswap layer has no shaped pulse")
    if experiment == "error-walk" and isinstance(out["depths"], dict):
        r = out["depths"]
        out["depths"] = list(range(r["start"], r["stop"] + 1, r.get("step", 1)))
    if experiment == "filter-function":
        try:
            process_from_dict(out["process"])
        except (TypeError, ValueError) as e:
            raise ConfigError(f"at /process: {e}") from None
    return out


def _meta(cfg: dict) -> dict:
    return {"experiment": cfg["experiment"], "config_sha256": io.config_hash(cfg), "seed": cfg["seed"]}


def _pool_map(fn, items, threads: int):
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))


# ---------------------------------------------------------------------------
# shared builders

def _load_pulse(spec, noise_axes, seed: int, target: str = "xx_halfpi") -> PulseShape | None:
    if spec is None or spec in ("cosine", "none"):
        return None
    if spec == "optimize":
        res = optimize_first_order_pulse(target, tuple(noise_axes), seed=seed)
        if not res.success:
            raise NumericalCheckError(f"robust pulse optimization failed: {res.message}")
        return res.pulse
    path = Path(spec)
    if not path.is_file():
        raise ConfigError(f"at /robust_pulse: pulse file {spec!r} not found")
    try:
        return import_pulse(path)
    except ValueError as e:
        raise ConfigError(f"at /robust_pulse: {e}") from None


def _robust_axes(terms: dict) -> tuple[str, ...]:
    """Noise axes an ``XX`` amplitude can address (those anticommuting with XX)."""
    from .pauli import commutes

    return tuple(lab for lab in terms if not commutes(lab, "XX"))


def build_layer_circuit(gate: str, terms: dict, pulse: PulseShape | None = None) -> Circuit:
    """One noisy layer (with its local Cliffords for ``cnot``) as a circuit."""
    noise = (NoiseTerm(dict(terms)),)
    if gate == "cnot":
        return Circuit.from_gates(make_gate("cnot_composite", noise=noise, pulse=pulse))
    if gate == "xx_halfpi":
        return Circuit.from_gates([make_gate("xx_halfpi", noise=noise, pulse=pulse)])
    if gate == "iswap":
        return Circuit.from_gates([make_gate("iswap", noise=noise)])
    raise ConfigError(f"unknown gate {gate!r}")


def build_chain(layer: Circuit, depth: int, interleave_hadamard: bool = False, seed: int = 0) -> Circuit:
    """``depth`` copies of ``layer``; optionally a seeded random Hadamard after each copy."""
    if not interleave_hadamard:
        return layer.repeat(depth)
    layers = []
    h = SQ_CLIFFORDS["H"]
    for k in range(depth):
        layers += list(layer.layers)
        q = int(layer_rng(seed, 0, 1_000_000 + k).integers(layer.n_qubits + 1))
        if q < layer.n_qubits:
            layers.append(EasyLayer(embed(h, q, layer.n_qubits), f"H{q}"))
    return Circuit(layer.n_qubits, layers)


def _initial_state(spec: str, circuit: Circuit, delta: float) -> np.ndarray:
    if spec == "worst_case":
        return worst_case_state(circuit, delta if delta else 1.0)
    if spec == "bell_input":
        return np.kron([1, 1], [1, 0]).astype(complex) / np.sqrt(2)
    if set(spec) <= {"0", "1"} and len(spec) == circuit.n_qubits:
        return basis_state(spec)
    raise ConfigError(f"at /initial_state: expected 'worst_case', 'bell_input' or a {circuit.n_qubits}-bit string")


# ---------------------------------------------------------------------------
# error-walk

def run_error_walk(cfg: dict, out: Path, threads: int = 1) -> ExperimentResult:
    res = ExperimentResult("error-walk")
    meta = _meta(cfg)
    depths = sorted(set(cfg["depths"]))
    n_max = depths[-1]
    layer = build_layer_circuit(cfg["gate"], cfg["noise_terms"])
    chain = build_chain(layer, n_max, cfg["interleave_hadamard"], cfg["seed"])
    hard = chain.layers[chain.hard_indices[0]]
    r_lo = hard.local_error(cfg["delta"], cfg["second_order"])
    local = np.tile(r_lo, (chain.n_hard, 1))

    bare = propagate_error_front(chain, None, local_steps=local)
    twirl_set = cfg.get("twirl_set")

    def one_run(run):
        a = sample_twirls(chain, cfg["seed"], twirl_set, run_index=run)
        return a, propagate_error_front(apply_twirls(chain, a), None, local_steps=local)

    runs = _pool_map(one_run, range(cfg["runs"]), threads)
    assignments = [a for a, _ in runs]
    idx = np.array(depths) - 1
    sq = np.array([np.sum(t.cumulative[idx] ** 2, axis=1) for _, t in runs])  # (runs, depths)
    mean_sq = np.mean(sq, axis=0)
    se_sq = sq.std(axis=0, ddof=1) / np.sqrt(len(sq)) if len(sq) > 1 else np.zeros_like(mean_sq)
    rms = np.sqrt(mean_sq)
    expected = np.array(depths) * float(r_lo @ r_lo)

    res.files.append(io.export_trajectory(out / "bare_trajectory.csv", bare, cfg["top_k"], meta))
    res.files.append(io.export_trajectory(out / "twirled_trajectory.csv", runs[0][1], cfg["top_k"], meta))
    res.files.append(io.export_twirls(out / "twirls.jsonl", assignments))
    res.files.append(io.write_csv(
        out / "ensemble.csv",
        ["depth", "bare_distance", "twirled_single", "rms_distance", "mean_sq", "mean_sq_se", "walk_mean_sq"],
        [[d, bare.distances[d - 1], runs[0][1].distances[d - 1], r, m, s, e]
         for d, r, m, s, e in zip(depths, rms, mean_sq, se_sq, expected)], meta))

    fits = {}
    zero = not np.any(r_lo)
    if not zero:
        for name, y in (("bare", bare.distances[idx]), ("rms", rms)):
            try:
                f = fit_scaling_exponent(ScalingSeries(depths, y), exclude_first=cfg["exclude_first"])
                fits[name] = {"exponent": f.exponent, "stderr": f.stderr, "ci95": f.ci95, "prefactor": f.prefactor,
                              "n_points": f.n_points, "excluded_first": f.excluded}
            except ValueError as e:
                fits[name] = {"error": str(e)}
    summary = {"local_error_norm": float(np.linalg.norm(r_lo)), "fits": fits, "runs": cfg["runs"],
               "max_depth": n_max, "mean_sq_at_max": float(mean_sq[-1]), "mean_sq_se_at_max": float(se_sq[-1]),
               "walk_mean_sq_at_max": float(expected[-1]), "config": cfg, "meta": meta}
    checks = cfg.get("assert", {})
    for key, name in (("bare_exponent", "bare"), ("rms_exponent", "rms")):
        if key in checks:
            lo, hi = checks[key]
            e = fits.get(name, {}).get("exponent", float("nan"))
            res.checks[key] = (bool(lo <= e <= hi), f"{e:.4f} in [{lo}, {hi}]")
    if "mean_square_sigmas" in checks:
        z = abs(mean_sq[-1] - expected[-1]) / se_sq[-1] if se_sq[-1] > 0 else 0.0
        res.checks["mean_square"] = (bool(z <= checks["mean_square_sigmas"]), f"{z:.3f} standard errors")
    summary["checks"] = {k: {"passed": ok, "detail": d} for k, (ok, d) in res.checks.items()}
    res.summary = summary
    res.files.append(io.write_json(out / "error_walk.json", summary))
    return res


# ---------------------------------------------------------------------------
# fidelity-sweep

def run_fidelity_sweep(cfg: dict, out: Path, threads: int = 1) -> ExperimentResult:
    res = ExperimentResult("fidelity-sweep")
    meta = _meta(cfg)
    terms = cfg["noise_terms"]
    robust = _load_pulse(cfg["robust_pulse"], _robust_axes(terms), cfg["seed"])
    layer = build_layer_circuit(cfg["gate"], terms)
    chain = layer.repeat(cfg["depth"])
    chain_r = build_layer_circuit(cfg["gate"], terms, robust).repeat(cfg["depth"]) if robust is not None else None
    deltas = [float(d) for d in cfg["deltas"]]
    nonzero = [d for d in deltas if d] or [1.0]
    psi = _initial_state(cfg["initial_state"], chain, max(nonzero, key=abs))
    mode = cfg["twirl_mode"]

    def point(d):
        row = [d]
        b = bare_fidelity(chain, [d], psi)
        r = rc_average_fidelity(chain, [d], psi, mode=mode, shots=cfg["shots"], seed=cfg["seed"])
        row += [b.value, r.value, r.stderr]
        u = chain.ideal_unitary().conj().T @ simulate_exact(chain, d)
        row.append(average_gate_fidelity(exact_ptm(u)))
        if chain_r is not None:
            rr = rc_average_fidelity(chain_r, [d], psi, mode=mode, shots=cfg["shots"], seed=cfg["seed"])
            ur = chain_r.ideal_unitary().conj().T @ simulate_exact(chain_r, d)
            row += [rr.value, rr.stderr, average_gate_fidelity(exact_ptm(ur))]
        return row

    rows = _pool_map(point, deltas, threads)
    cols = ["delta", "bare", "rc", "rc_se", "favg"]
    if chain_r is not None:
        cols += ["rc_robust", "rc_robust_se", "favg_robust"]
        res.files.append(_write_pulse(out / "robust_pulse.txt", robust, meta))
    res.files.append(io.write_csv(out / "fidelity_sweep.csv", cols, rows, meta))
    arr = np.array(rows)
    if cfg["assert_ordering"]:
        slack = 1e-12 if mode != "sample" else 0.0
        se = arr[:, 3] if mode == "sample" else 0.0
        ok = np.all(arr[:, 2] + 3 * se + slack >= arr[:, 1])
        res.checks["rc_ge_bare"] = (bool(ok), f"min(rc - bare) = {np.min(arr[:, 2] - arr[:, 1]):.3g}")
        if chain_r is not None:
            ok = np.all(arr[:, 5] + slack >= arr[:, 2])
            res.checks["robust_ge_rc"] = (bool(ok), f"min(rc_robust - rc) = {np.min(arr[:, 5] - arr[:, 2]):.3g}")
    res.summary = {"columns": cols, "rows": rows, "initial_state": [psi.real, psi.imag], "config": cfg, "meta": meta,
                   "checks": {k: {"passed": ok, "detail": d} for k, (ok, d) in res.checks.items()}}
    res.files.append(io.write_json(out / "fidelity_sweep.json", res.summary))
    return res


def _write_pulse(path: Path, pulse: PulseShape, meta: dict) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    export_pulse(pulse, path, comment=", ".join(f"{k}: {v}" for k, v in meta.items()))
    return path


# ---------------------------------------------------------------------------
# ptm

def noise_channel_ptm(circuit: Circuit, delta: float, assignments) -> np.ndarray:
    """Average PTM of ``C_ideal^dag U_twirled`` over the given assignments."""
    noisy = layer_unitaries(circuit, delta)
    ideal_dag = circuit.ideal_unitary().conj().T
    return exact_ptm([ideal_dag @ twirled_unitary(circuit, noisy, a) for a in assignments])


def run_ptm(cfg: dict, out: Path, threads: int = 1) -> ExperimentResult:
    res = ExperimentResult("ptm")
    meta = _meta(cfg)
    terms = cfg["noise_terms"]
    circuits = {"trivial": build_layer_circuit(cfg["gate"], terms)}
    if cfg["gate"] != "iswap":
        robust = _load_pulse(cfg["robust_pulse"], _robust_axes(terms), cfg["seed"])
        if robust is not None:
            circuits["robust"] = build_layer_circuit(cfg["gate"], terms, robust)
            res.files.append(_write_pulse(out / "robust_pulse.txt", robust, meta))
    any_c = circuits["trivial"]
    ident = [TwirlAssignment(("I" * any_c.n_qubits,) * any_c.n_hard)]
    if cfg["twirl_mode"] == "enumerate":
        rc = [a for a, _ in enumerate_twirl_average(any_c)]
        tol = 1e-12
    else:
        rc = [sample_twirls(any_c, cfg["seed"], run_index=r) for r in range(cfg["shots"])]
        tol = 3 / np.sqrt(cfg["shots"])
    jobs = [(f"{tw}_{pulse}", circ, assigns) for pulse, circ in circuits.items()
            for tw, assigns in (("bare", ident), ("rc", rc))]
    ptms = _pool_map(lambda j: noise_channel_ptm(j[1], cfg["delta"], j[2]), jobs, threads)
    diag = {}
    for (name, _, _), p in zip(jobs, ptms):
        d = ptm_diagnostics(p)
        diag[name] = d
        res.files += io.export_ptm(out / f"ptm_{name}", p, meta, d)
    for name in diag:
        if name.startswith("rc_"):
            m = diag[name]["max_offdiagonal"]
            res.checks[f"{name}_diagonal"] = (bool(m <= tol), f"max off-diagonal {m:.3g} (tolerance {tol:.3g})")
    if "rc_robust" in diag and cfg["delta"]:
        gain = np.abs(1 - diag["rc_trivial"]["diagonal"]) - np.abs(1 - diag["rc_robust"]["diagonal"])
        diag["robust_gain"] = gain
        log.info("robust-pulse diagonal gain: min %.3g", gain.min())
    res.summary = {"labels": list(pauli_labels(any_c.n_qubits)), "diagnostics": diag, "config": cfg, "meta": meta,
                   "checks": {k: {"passed": ok, "detail": d} for k, (ok, d) in res.checks.items()}}
    res.files.append(io.write_json(out / "ptm_diagnostics.json", res.summary))
    return res


# ---------------------------------------------------------------------------
# filter-function

def filter_function_schedule(cfg: dict) -> HamiltonianSchedule:
    n_qubits, ctrl_terms, area = TARGETS[cfg["target"]]
    axis = cfg["noise_axis"]
    if len(axis) != n_qubits:
        raise ConfigError(f"at /noise_axis: {axis!r} does not act on {n_qubits} qubit(s)")
    if cfg["pulse"] == "cosine":
        pulse = PulseShape.cosine(cfg["duration"], area, cfg["n_steps"])
    elif cfg["pulse"] == "constant":
        pulse = PulseShape.constant(area / cfg["duration"], cfg["duration"], cfg["n_steps"])
    elif cfg["pulse"] == "optimize":
        r = optimize_first_order_pulse(cfg["target"], (axis,), duration=cfg["duration"], n_steps=cfg["n_steps"],
                                       seed=cfg["seed"])
        if not r.success:
            raise NumericalCheckError(f"robust pulse optimization failed: {r.message}")
        pulse = r.pulse
    else:
        pulse = _load_pulse(cfg["pulse"], (axis,), cfg["seed"])
    process = process_from_dict(cfg["process"])
    noise = NoiseTerm({axis: 1.0}, process=process, control=0 if cfg["coupled_to_control"] else None)
    return HamiltonianSchedule(n_qubits, (ControlTerm(pulse, pauli_sum(ctrl_terms)),), (noise,))


def run_filter_function(cfg: dict, out: Path, threads: int = 1) -> ExperimentResult:
    res = ExperimentResult("filter-function")
    meta = _meta(cfg)
    sched = filter_function_schedule(cfg)
    curve = error_curves(sched)[0]
    omega = default_omega_grid(sched.duration, cfg["omega_points"], cfg["cutoff_periods"])
    ff = filter_function(curve, omega)
    report = second_moment([curve], omega=omega)
    res.files.append(io.export_filter_function(out / "filter_function.csv", omega, ff, curve.axes, meta))
    axes = list(curve.axes)
    summary = {"axes": axes, "mean_components": report.mean_components, "mean_term": report.mean_term,
               "fluctuation": report.fluctuation, "truncation": report.truncation, "total": report.total,
               "first_order_unit": first_order_error(curve, 1.0), "config": cfg, "meta": meta}
    process = curve.process
    if process.tail_level() and not process.delta_weight():
        time_route = white_noise_time_integral(curve, process.tail_level())
        rel = float(np.linalg.norm(report.fluctuation - time_route) / np.linalg.norm(time_route))
        summary["parseval"] = {"time_route": time_route, "relative_difference": rel}
        res.checks["parseval"] = (rel <= cfg["parseval_tolerance"], f"relative difference {rel:.3g}")
    if cfg["shots"]:
        chunk = 500
        starts = range(0, cfg["shots"], chunk)

        def mc(s0):
            return np.array([first_order_error(curve, synthesize(
                sched, np.random.SeedSequence(cfg["seed"], spawn_key=(k,)))) for k in range(s0, min(s0 + chunk, cfg["shots"]))])

        r = np.concatenate(_pool_map(mc, starts, threads))
        m2 = np.mean(r**2, axis=0)
        se = np.std(r**2, axis=0, ddof=1) / np.sqrt(len(r))
        rel = float(np.sum(np.abs(m2 - report.total)) / np.sum(report.total)) if np.sum(report.total) else 0.0
        summary["monte_carlo"] = {"shots": cfg["shots"], "mean_square": m2, "standard_error": se,
                                  "relative_difference": rel}
        res.checks["monte_carlo"] = (rel <= cfg["mc_tolerance"], f"relative difference {rel:.3g}")
    summary["checks"] = {k: {"passed": bool(ok), "detail": d} for k, (ok, d) in res.checks.items()}
    res.summary = summary
    res.files.append(io.write_json(out / "moments.json", summary))
    return res


# ---------------------------------------------------------------------------
# pulse-opt

def run_pulse_opt(cfg: dict, out: Path, threads: int = 1) -> ExperimentResult:
    res = ExperimentResult("pulse-opt")
    meta = _meta(cfg)
    n_qubits = TARGETS[cfg["target"]][0]
    bad = [a for a in cfg["noise_axes"] if len(a) != n_qubits]
    if bad:
        raise ConfigError(f"at /noise_axes: {bad} do not act on {n_qubits} qubit(s)")
    r = optimize_first_order_pulse(cfg["target"], tuple(cfg["noise_axes"]), cfg["n_coefficients"], cfg["duration"],
                                   cfg["n_steps"], cfg["seed"], cfg["max_iter"], cfg["n_starts"])
    res.files.append(_write_pulse(out / "pulse.txt", r.pulse, meta))
    res.checks["optimized"] = (r.success, r.message)
    res.summary = {"success": r.success, "message": r.message, "cost": r.cost, "baseline_cost": r.baseline_cost,
                   "gate_error": r.gate_error, "coefficients": r.coefficients, "config": cfg, "meta": meta}
    res.files.append(io.write_json(out / "pulse_opt.json", res.summary))
    return res


RUNNERS = {"error-walk": run_error_walk, "fidelity-sweep": run_fidelity_sweep, "ptm": run_ptm,
           "filter-function": run_filter_function, "pulse-opt": run_pulse_opt}


def run_experiment(name: str, cfg: dict | None, out, seed: int | None = None, threads: int = 1) -> ExperimentResult:
    """Resolve the config, run, echo the resolved config, and return the result."""
    resolved = resolve_config(name, cfg, seed)
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    io.write_json(out / "config.resolved.json", resolved)
    return RUNNERS[name](resolved, out, max(1, int(threads)))
