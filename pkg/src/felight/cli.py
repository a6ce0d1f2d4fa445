"""Command-line surface: scans, emission runs and optimizations driven by a
JSON config, with machine-readable CSV/JSON outputs.

Every command is deterministic under a fixed seed/config: numeric fields are
written with 17 significant digits, files are written atomically
(write-then-rename) and each data file gets a metadata sidecar echoing the
resolved config.  Progress goes to stderr; stdout carries one final JSON
summary.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys


import numpy as np

from . import __version__
from .electron import (ElectronPulse, IELSStage, PreFilter, coherence_factor,
                       coherence_factor_closed_drift, electron_wigner,
                       iels_modulate, prefilter_cf)
from .emission import (WindowFilter, cat_closed_form, cf_pair_physical,
                       emission_stats, emit_exact, emit_single_window,
                       single_electron_state)
from .errors import EmptyPreFilterError, FelightError, UnphysicalInputError
from .fock import (Cat, Custom, PhotonicState, SqueezedVacuum, TriangularCat,
                   coherent_vector, default_n_max, expectation, purity,
                   target_factory, wigner)
from .synthesis import SynthesisProblem, optimize, ring_coefficients

FULL_BUDGET = (3000, 2000)  # restarts, max_iters


# ---------------------------------------------------------------------------
# config parsing
# ---------------------------------------------------------------------------

class ConfigError(ValueError):
    pass


def _axis(value, name: str) -> np.ndarray:
    """A scan axis: scalar, explicit list, or {min, max, n, scale}."""
    if isinstance(value, (int, float)):
        return np.array([float(value)])
    if isinstance(value, list):
        return np.array([float(v) for v in value])
    if isinstance(value, dict):
        extra = set(value) - {"min", "max", "n", "scale"}
        if extra:
            raise ConfigError(f"{name}: unknown keys {sorted(extra)}")
        try:
            lo, hi, n = float(value["min"]), float(value["max"]), int(value["n"])
        except KeyError as exc:
            raise ConfigError(f"{name}: missing {exc}") from None
        if n < 1:
            raise ConfigError(f"{name}: n must be >= 1")
        scale = value.get("scale", "linear")
        if scale == "linear":
            return np.linspace(lo, hi, n)
        if scale == "log":
            if lo <= 0:
                raise ConfigError(f"{name}: log scale needs min > 0")
            return np.geomspace(lo, hi, n)
        raise ConfigError(f"{name}: unknown scale {scale!r}")
    raise ConfigError(f"{name}: expected number, list or scan spec")


def _require(cfg: dict, key: str, typ=None):
    if key not in cfg:
        raise ConfigError(f"missing config key {key!r}")
    val = cfg[key]
    if typ is not None and not isinstance(val, typ):
        raise ConfigError(f"config key {key!r} has wrong type")
    return val


def _check_keys(cfg: dict, allowed: set) -> None:
    extra = set(cfg) - allowed - {"command", "io", "seed"}
    if extra:
        raise ConfigError(f"unknown config keys: {sorted(extra)}")


def _complexify(value) -> complex:
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, list) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    raise ConfigError("complex values are a number or a [re, im] pair")


# ---------------------------------------------------------------------------
# output plumbing
# ---------------------------------------------------------------------------

def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if x is None:
        return "nan"
    xf = float(x)
    if math.isnan(xf):
        return "nan"
    return f"{xf:.17g}"


def _atomic_write(path: str, text: str) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _dump_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=1) + "\n"


class Emitter:
    """Writes one table (+sidecar) per logical output, in csv or json."""

    def __init__(self, out_dir: str, fmt: str, cfg: dict, seed: int):
        if fmt not in ("csv", "json"):
            raise ConfigError(f"unknown format {fmt!r}")
        self.out_dir = out_dir
        self.fmt = fmt
        self.cfg = cfg
        self.seed = seed
        self.outputs: list[str] = []
        os.makedirs(out_dir, exist_ok=True)

    def table(self, name: str, columns: list[str], rows) -> str:
        path = os.path.join(self.out_dir, f"{name}.{self.fmt}")
        if self.fmt == "csv":
            lines = [",".join(columns)]
            lines += [",".join(_fmt(v) for v in row) for row in rows]
            _atomic_write(path, "\n".join(lines) + "\n")
        else:
            payload = {"columns": columns,
                       "rows": [[_fmt(v) for v in row] for row in rows]}
            _atomic_write(path, _dump_json(payload))
        cfg_echo = dict(self.cfg)
        io_echo = dict(cfg_echo.get("io", {}))
        io_echo.pop("out", None)  # keep sidecars location independent
        cfg_echo["io"] = io_echo
        meta = {"artifact": {"name": "felight", "version": __version__},
                "command": self.cfg.get("command"),
                "config": cfg_echo, "seed": self.seed, "table": name,
                "columns": columns}
        _atomic_write(os.path.join(self.out_dir, f"{name}.meta.json"),
                      _dump_json(meta))
        self.outputs.append(path)
        return path

    def blob(self, name: str, obj) -> str:
        path = os.path.join(self.out_dir, f"{name}.json")
        _atomic_write(path, _dump_json(obj))
        self.outputs.append(path)
        return path

    def wigner_table(self, name: str, grid) -> str:
        rows = [(x, p, grid.values[i, j])
                for i, x in enumerate(grid.xs)
                for j, p in enumerate(grid.ps)]
        return self.table(name, ["x", "p", "w"], rows)


def _progress(msg: str) -> None:
    print(msg, file=sys.stderr, flush=True)


def _wigner_axes(cfg: dict) -> tuple[np.ndarray, np.ndarray]:
    grid = cfg.get("wigner_grid", {"x": {"min": -4.0, "max": 4.0, "n": 81},
                                   "p": {"min": -4.0, "max": 4.0, "n": 81}})
    extra = set(grid) - {"x", "p"}
    if extra:
        raise ConfigError(f"wigner_grid: unknown keys {sorted(extra)}")
    return _axis(grid["x"], "wigner_grid.x"), _axis(grid["p"], "wigner_grid.p")


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _cmd_cf(cfg: dict, em: Emitter) -> None:
    mode = _require(cfg, "mode", str)
    orders = [int(m) for m in cfg.get("orders", [1, 2])]
    if mode == "iels":
        _check_keys(cfg, {"mode", "orders", "beta_abs", "drift"})
        betas = _axis(_require(cfg, "beta_abs"), "beta_abs")
        drifts = _axis(_require(cfg, "drift"), "drift")
        rows = []
        for b in betas:
            for d in drifts:
                for m in orders:
                    v = coherence_factor_closed_drift(float(b), float(d), m)
                    rows.append((b, d, m, v.real, v.imag, abs(v) ** 2))
        em.table("cf_scan", ["beta_abs", "drift", "m", "re", "im", "abs2"], rows)
    elif mode == "prefilter":
        _check_keys(cfg, {"mode", "orders", "beta_abs", "drift", "delta_max",
                          "delta_d"})
        beta = float(_require(cfg, "beta_abs"))
        drifts = _axis(_require(cfg, "drift"), "drift")
        dmax = float(_require(cfg, "delta_max"))
        dds = _axis(_require(cfg, "delta_d"), "delta_d")
        rows = []
        nan = float("nan")
        for d in drifts:
            stage = IELSStage(beta_abs=beta, drift=float(d))
            for dd in dds:
                filt = PreFilter(delta_max=dmax, delta_d=float(dd))
                for m in orders:
                    try:
                        v, m0 = prefilter_cf(stage, filt, m)
                        rows.append((beta, dd, d, m, v.real, v.imag,
                                     abs(v) ** 2, m0))
                    except EmptyPreFilterError:
                        rows.append((beta, dd, d, m, nan, nan, nan, 0.0))
        em.table("cf_scan", ["beta_abs", "delta_d", "drift", "m", "re", "im",
                             "abs2", "m0"], rows)
    else:
        raise ConfigError(f"cf: unknown mode {mode!r}")


def _state_scalars(state: PhotonicState) -> tuple[float, complex]:
    return purity(state), expectation(state, "a")


def _cmd_emit(cfg: dict, em: Emitter) -> None:
    mode = _require(cfg, "mode", str)
    beta0 = float(_require(cfg, "beta0"))
    n_max = int(cfg["n_max"]) if "n_max" in cfg else None
    harmonic = int(cfg.get("harmonic", 1))
    beta = float(_require(cfg, "beta_abs"))
    phase = float(cfg.get("beta_phase", 0.0))
    drift = float(cfg.get("drift", 0.0))
    dds = _axis(_require(cfg, "delta_d"), "delta_d")
    xs, ps = _wigner_axes(cfg)
    wigner_at = [float(v) for v in cfg.get("wigner_at", [])]

    if mode == "postfilter":
        _check_keys(cfg, {"mode", "beta0", "n_max", "harmonic", "beta_abs",
                          "beta_phase", "drift", "delta_d", "sigma_t",
                          "delta_t", "s", "wigner_at", "wigner_grid"})
        sigma_t = float(_require(cfg, "sigma_t"))
        delta_t = float(cfg.get("delta_t", 0.0))
        s = int(cfg.get("s", 0))
        pulse = ElectronPulse(
            spectrum=iels_modulate(IELSStage(beta, phase, harmonic, drift)),
            sigma_t=sigma_t, delta_t=delta_t)
        rows = []
        for i, dd in enumerate(dds):
            out = emit_single_window(pulse, beta0,
                                     WindowFilter(s=s, delta_d=float(dd)), n_max)
            pur, fld = _state_scalars(out.state)
            rows.append((dd, pur, fld.real, fld.imag, abs(fld), out.p_success))
            if (i + 1) % 8 == 0:
                _progress(f"emit postfilter {i + 1}/{len(dds)}")
        em.table("emit_scan", ["delta_d", "purity", "field_re", "field_im",
                               "field_abs", "p_success"], rows)
        for k, dd in enumerate(wigner_at):
            out = emit_single_window(pulse, beta0,
                                     WindowFilter(s=s, delta_d=dd), n_max)
            em.wigner_table(f"emit_wigner_{k}", wigner(out.state, xs, ps))
    elif mode == "prefilter":
        _check_keys(cfg, {"mode", "beta0", "n_max", "harmonic", "beta_abs",
                          "beta_phase", "drift", "delta_d", "delta_max",
                          "beta_scan", "wigner_at", "wigner_grid"})
        dmax = float(_require(cfg, "delta_max"))
        betas = _axis(cfg.get("beta_scan", beta), "beta_scan")
        rows = []
        nan = float("nan")
        for b in betas:
            stage = IELSStage(float(b), phase, harmonic, drift)
            for dd in dds:
                filt = PreFilter(delta_max=dmax, delta_d=float(dd))
                try:
                    cf = _prefiltered_cf_fn(stage, filt)
                    state = single_electron_state(cf, beta0, n_max)
                    pur, fld = _state_scalars(state)
                    _, m0 = prefilter_cf(stage, filt, 0)
                    rows.append((b, dd, pur, fld.real, fld.imag, abs(fld), m0))
                except EmptyPreFilterError:
                    rows.append((b, dd, nan, nan, nan, nan, 0.0))
        em.table("emit_scan", ["beta_abs", "delta_d", "purity", "field_re",
                               "field_im", "field_abs", "m0"], rows)
        for k, dd in enumerate(wigner_at):
            stage = IELSStage(beta, phase, harmonic, drift)
            filt = PreFilter(delta_max=dmax, delta_d=dd)
            state = single_electron_state(_prefiltered_cf_fn(stage, filt),
                                          beta0, n_max)
            em.wigner_table(f"emit_wigner_{k}", wigner(state, xs, ps))
    else:
        raise ConfigError(f"emit: unknown mode {mode!r}")


def _prefiltered_cf_fn(stage: IELSStage, filt: PreFilter):
    cache: dict[int, complex] = {}

    def cf(m: int) -> complex:
        if m not in cache:
            cache[m], _ = prefilter_cf(stage, filt, m)
        return cache[m]

    return cf


def _cmd_stats(cfg: dict, em: Emitter) -> None:
    mode = _require(cfg, "mode", str)
    n_el = int(_require(cfg, "n_electrons"))
    beta0 = float(_require(cfg, "beta0"))
    if mode == "cfplane":
        _check_keys(cfg, {"mode", "n_electrons", "beta0", "m1_im", "m2_re"})
        ys = _axis(_require(cfg, "m1_im"), "m1_im")
        xs = _axis(_require(cfg, "m2_re"), "m2_re")
        rows = []
        for y in ys:
            for x in xs:
                m1, m2 = 1j * float(y), complex(float(x))
                ok = cf_pair_physical(m1, m2)
                try:
                    st = emission_stats([(m1, m2)] * n_el, beta0)
                    g_over = st.g_factor / st.intensity ** 2
                except UnphysicalInputError:
                    ok = False
                    g_over = float("nan")
                if not ok:
                    g_over = float("nan")
                rows.append((y, x, g_over, ok))
        em.table("stats_grid", ["m1_im", "m2_re", "g_over_i2", "physical"], rows)
    elif mode == "iels":
        _check_keys(cfg, {"mode", "n_electrons", "beta0", "beta_abs", "drift"})
        betas = _axis(_require(cfg, "beta_abs"), "beta_abs")
        drifts = _axis(_require(cfg, "drift"), "drift")
        rows = []
        for b in betas:
            for d in drifts:
                m1 = coherence_factor_closed_drift(float(b), float(d), 1)
                m2 = coherence_factor_closed_drift(float(b), float(d), 2)
                st = emission_stats([(m1, m2)] * n_el, beta0)
                rows.append((b, d, m1.imag, m2.real,
                             st.g_factor / st.intensity ** 2, True))
        em.table("stats_grid", ["beta_abs", "drift", "m1_im", "m2_re",
                                "g_over_i2", "physical"], rows)
    else:
        raise ConfigError(f"stats: unknown mode {mode!r}")


def _cmd_cat(cfg: dict, em: Emitter) -> None:
    _check_keys(cfg, {"beta0", "beta_phase", "beta_abs", "s", "n_trunc",
                      "n_max", "wigner_at", "wigner_grid"})
    beta0 = float(_require(cfg, "beta0"))
    phase = float(cfg.get("beta_phase", 0.0))
    betas = _axis(_require(cfg, "beta_abs"), "beta_abs")
    s_list = [int(s) for s in _require(cfg, "s", list)]
    n_trunc = int(cfg.get("n_trunc", 10))
    n_max = int(cfg.get("n_max", default_n_max(beta0)))
    xs, ps = _wigner_axes(cfg)

    rows = []
    for i, b in enumerate(betas):
        spectrum = iels_modulate(IELSStage(float(b), phase))
        for s in s_list:
            out = emit_exact([spectrum], beta0, [s], n_max=n_max)
            fid = _cat_fidelity(out.state, float(b), phase, s, beta0)
            closed = cat_closed_form(float(b), phase, s, n_trunc, beta0)
            pf_direct = _cat_direct_sum(beta0, float(b), s, n_trunc)
            rows.append((b, s, fid, out.p_success, closed.pf_raw, pf_direct))
        if (i + 1) % 8 == 0:
            _progress(f"cat scan {i + 1}/{len(betas)}")
    em.table("cat_grid", ["beta_abs", "s", "fidelity", "p_success",
                          "pf_gamma", "pf_direct"], rows)
    for k, pair in enumerate(cfg.get("wigner_at", [])):
        b, s = float(pair[0]), int(pair[1])
        out = emit_exact([iels_modulate(IELSStage(b, phase))], beta0, [s],
                         n_max=n_max)
        em.wigner_table(f"cat_wigner_{k}", wigner(out.state, xs, ps))


def _cat_target(beta_abs: float, beta_phase: float, s: int, beta0: float,
                n_max: int) -> PhotonicState:
    theta = s * math.pi + math.pi / 2.0 - 4.0 * beta_abs
    chi = -1j * beta0 * np.exp(1j * beta_phase)
    return target_factory(Cat(alpha=complex(chi), theta=theta), n_max)


def _cat_fidelity(state: PhotonicState, beta_abs: float, beta_phase: float,
                  s: int, beta0: float) -> float:
    target = _cat_target(beta_abs, beta_phase, s, beta0, state.n_max)
    return float(np.abs(np.vdot(target.amps, state.amps)) ** 2)


def _cat_direct_sum(beta0: float, beta_abs: float, s: int, n_trunc: int) -> float:
    theta = s * math.pi + math.pi / 2.0 - 4.0 * beta_abs
    n = np.arange(n_trunc + 1)
    mag2 = coherent_vector(beta0, n_trunc) ** 2
    return float(np.sum(mag2 * np.abs(1.0 + np.exp(1j * theta) * (-1.0) ** n) ** 2))


def _parse_target(spec: dict, sweep_value: float):
    kind = spec.get("kind")
    if kind == "squeezed":
        return SqueezedVacuum(r=sweep_value)
    if kind == "cat":
        return Cat(alpha=complex(sweep_value), theta=float(spec.get("theta", math.pi / 2)))
    if kind == "tricat":
        return TriangularCat(alpha=complex(sweep_value),
                             theta=float(spec.get("theta", 2 * math.pi / 3)))
    raise ConfigError(f"optimize: unknown target kind {kind!r}")


def _cmd_optimize(cfg: dict, em: Emitter, seed: int, full_budget: bool) -> None:
    _check_keys(cfg, {"target", "m_list", "beta0", "harmonic", "n_max_coeff",
                      "restarts", "max_iters", "beta_cap", "s_range",
                      "wigner_at", "wigner_grid"})
    tspec = _require(cfg, "target", dict)
    extra = set(tspec) - {"kind", "sweep", "theta"}
    if extra:
        raise ConfigError(f"target: unknown keys {sorted(extra)}")
    sweep = _axis(_require(tspec, "sweep"), "target.sweep")
    m_list = [int(m) for m in _require(cfg, "m_list", list)]
    beta0 = float(_require(cfg, "beta0"))
    harmonic = int(cfg.get("harmonic", 1))
    n_max_coeff = int(cfg.get("n_max_coeff", 10))
    restarts = int(cfg.get("restarts", 64))
    max_iters = int(cfg.get("max_iters", 500))
    if full_budget:
        restarts, max_iters = FULL_BUDGET
    beta_cap = float(cfg.get("beta_cap", 14.0))
    s_range = tuple(int(v) for v in cfg["s_range"]) if "s_range" in cfg else None
    xs, ps = _wigner_axes(cfg)
    m_max = max(m_list)

    columns = (["sweep_param", "M", "fidelity", "p_success", "s", "drift"]
               + [f"beta_abs_{i + 1}" for i in range(m_max)]
               + [f"beta_phase_{i + 1}" for i in range(m_max)])
    rows = []
    profiles = []
    results = {}
    for i_sw, val in enumerate(sweep):
        for i_m, m in enumerate(m_list):
            problem = SynthesisProblem(
                target=_parse_target(tspec, float(val)), beta0=beta0, rings=m,
                harmonic=harmonic, n_max_coeff=n_max_coeff, s_range=s_range,
                beta_cap=beta_cap, restarts=restarts, max_iters=max_iters,
                seed=seed + 9973 * (i_sw * len(m_list) + i_m))
            res = optimize(problem)
            results[(float(val), m)] = (res, problem)
            absv = [a for a, _ in res.best.betas]
            phv = [p for _, p in res.best.betas]
            pad = [None] * (m_max - m)
            rows.append([val, m, res.fidelity, res.p_success, res.s,
                         res.best.drift] + absv + pad + phv + pad)
            profiles.append({
                "sweep_param": float(val), "rings": m, "s": res.s,
                "fidelity": res.fidelity, "p_success": res.p_success,
                "drift": res.best.drift,
                "betas": [[a, p] for a, p in res.best.betas],
                "seed": res.seed,
                "trace": list(res.trace)})
            _progress(f"optimize sweep={val:.3g} M={m}: "
                      f"fidelity={res.fidelity:.6f} s={res.s}")
    em.table("optimize_scan", columns, rows)
    em.blob("profiles", profiles)
    for k, val in enumerate(cfg.get("wigner_at", [])):
        deltas = np.abs(sweep - float(val))
        hit = int(np.argmin(deltas))
        if deltas[hit] > 1e-9 * max(1.0, abs(float(val))):
            raise ConfigError(f"wigner_at value {val} not in the sweep")
        res, problem = results[(float(sweep[hit]), m_max)]
        n_work = max(default_n_max(beta0), n_max_coeff)
        target = target_factory(problem.target, n_max=max(n_work, 200))
        tgt_amps = target.amps[: n_work + 1]
        tgt = PhotonicState.pure(tgt_amps / np.linalg.norm(tgt_amps))
        em.wigner_table(f"optimize_wigner_target_{k}", wigner(tgt, xs, ps))
        out = emit_exact([ring_coefficients(res.best)], beta0, [res.s],
                         n_max=n_work)
        em.wigner_table(f"optimize_wigner_achieved_{k}", wigner(out.state, xs, ps))


def _cmd_wigner(cfg: dict, em: Emitter) -> None:
    _check_keys(cfg, {"kind", "n", "alpha", "theta", "r", "n_max", "x", "p",
                      "beta_abs", "beta_phase", "drift", "harmonic", "sigma_t",
                      "delta_t"})
    kind = _require(cfg, "kind", str)
    xs = _axis(cfg.get("x", {"min": -4.0, "max": 4.0, "n": 81}), "x")
    ps = _axis(cfg.get("p", {"min": -4.0, "max": 4.0, "n": 81}), "p")
    if kind == "electron":
        stage = IELSStage(float(_require(cfg, "beta_abs")),
                          float(cfg.get("beta_phase", 0.0)),
                          int(cfg.get("harmonic", 1)),
                          float(cfg.get("drift", 0.0)))
        pulse = ElectronPulse(spectrum=iels_modulate(stage),
                              sigma_t=float(_require(cfg, "sigma_t")),
                              delta_t=float(cfg.get("delta_t", 0.0)))
        vals = electron_wigner(pulse, xs, ps)
        rows = [(x, p, vals[i, j]) for i, x in enumerate(xs)
                for j, p in enumerate(ps)]
        em.table("wigner", ["x", "p", "w"], rows)
        return
    n_max = int(cfg.get("n_max", 40))
    if kind == "vacuum":
        amps = np.zeros(n_max + 1, dtype=complex)
        amps[0] = 1.0
        state = PhotonicState.pure(amps)
    elif kind == "fock":
        amps = np.zeros(n_max + 1, dtype=complex)
        amps[int(_require(cfg, "n"))] = 1.0
        state = PhotonicState.pure(amps)
    elif kind == "coherent":
        alpha = _complexify(_require(cfg, "alpha"))
        state = target_factory(Custom(tuple(
            coherent_vector(abs(alpha), n_max)
            * (alpha / abs(alpha) if alpha != 0 else 1.0) ** np.arange(n_max + 1))),
            n_max)
    elif kind == "cat":
        state = target_factory(Cat(alpha=_complexify(_require(cfg, "alpha")),
                                   theta=float(cfg.get("theta", 0.0))), n_max)
    elif kind == "tricat":
        state = target_factory(
            TriangularCat(alpha=_complexify(_require(cfg, "alpha")),
                          theta=float(cfg.get("theta", 2 * math.pi / 3))), n_max)
    elif kind == "squeezed":
        state = target_factory(SqueezedVacuum(r=float(_require(cfg, "r"))), n_max)
    else:
        raise ConfigError(f"wigner: unknown kind {kind!r}")
    em.wigner_table("wigner", wigner(state, xs, ps))


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

COMMANDS = ("cf", "emit", "stats", "cat", "optimize", "wigner")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="felight",
        description="quantum light from modulated free electrons")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON run configuration")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--format", choices=("csv", "json"), default=None)
        if name == "optimize":
            p.add_argument("--full-budget", action="store_true",
                           help="run 3000 restarts x 2000 iterations")
    return parser


def run(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        with open(args.config, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 2
    if not isinstance(cfg, dict):
        print("error: config must be a JSON object", file=sys.stderr)
        return 2
    if cfg.get("command", args.command) != args.command:
        print("error: config command does not match the CLI command",
              file=sys.stderr)
        return 2
    cfg["command"] = args.command
    io = dict(cfg.get("io", {}))
    if set(io) - {"out", "format", "seed"}:
        print("error: io block accepts out/format/seed", file=sys.stderr)
        return 2
    out_dir = args.out or io.get("out") or "."
    fmt = args.format or io.get("format", "csv")
    seed = args.seed if args.seed is not None else int(io.get("seed", cfg.get("seed", 0)))
    cfg["io"] = {"out": out_dir, "format": fmt, "seed": seed}

    try:
        em = Emitter(out_dir, fmt, cfg, seed)
        if args.command == "cf":
            _cmd_cf(cfg, em)
        elif args.command == "emit":
            _cmd_emit(cfg, em)
        elif args.command == "stats":
            _cmd_stats(cfg, em)
        elif args.command == "cat":
            _cmd_cat(cfg, em)
        elif args.command == "optimize":
            _cmd_optimize(cfg, em, seed, getattr(args, "full_budget", False))
        else:
            _cmd_wigner(cfg, em)
    except (ConfigError, FelightError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    summary = {"command": args.command, "outputs": sorted(em.outputs),
               "seed": seed, "version": __version__}
    print(json.dumps(summary, sort_keys=True))
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
