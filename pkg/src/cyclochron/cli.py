"""``cyclochron`` command-line entry point.

Every subcommand prints one JSON envelope::

    {"schema_version": 1, "command": ..., "constants_used": {...}, "payload": ...}

or, with ``--format csv``, the payload as CSV preceded by ``#`` provenance
lines. Exit codes: 0 success, 1 domain / physical-validity errors, 2 usage
errors. Errors are written to stderr as a JSON object.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import enum
import io
import json
import math
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from . import constants as _constants
from . import cycles as _cycles
from . import kinematics as _kin
from . import modulation as _mod
from . import quantum as _quantum
from . import relational_time as _rt
from ._numerics import simplest_within
from .errors import CyclochronError, UsageError

SCHEMA_VERSION = 1

# Library operation(s) behind each subcommand; audited by the test suite.
COMMAND_OPERATIONS: dict[str, tuple[str, ...]] = {
    "constants": ("constants_from_config",),
    "particles": ("load_particle_table",),
    "clock": ("compton_period", "four_momentum", "periodicity_of", "phase_harmony_residual"),
    "boost": ("boost_momentum",),
    "ticks": ("tick_count", "clock_from_particle"),
    "phase": ("phase_at", "invert_helicity"),
    "fingerprint": ("fingerprint_at",),
    "classify": ("classify",),
    "decode": ("decode_time",),
    "recurrence": ("recurrence_time",),
    "gap": ("distinguishability_gap",),
    "simulate": ("apply_events",),
    "detect": ("detect_regime_changes",),
    "order": ("causal_order",),
    "regime": ("regime_classify",),
    "spectrum": ("harmonic_spectrum",),
    "verify-propagator": ("winding_sum_propagator", "mode_sum_propagator"),
    "density": ("phase_density_sample",),
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        _emit_error(UsageError(message))
        raise SystemExit(2)


# -- encoding -----------------------------------------------------------------

def _plain(x: Any) -> Any:
    if isinstance(x, bool) or x is None or isinstance(x, (str, int)):
        return x
    if isinstance(x, Fraction):
        return x.numerator if x.denominator == 1 else float(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isfinite(x):
            return x
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, enum.Enum):
        return x.value
    if isinstance(x, np.ndarray):
        return [_plain(v) for v in x.tolist()]
    if dataclasses.is_dataclass(x):
        return {f.name: _plain(getattr(x, f.name)) for f in dataclasses.fields(x)}
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    raise TypeError(f"cannot encode {type(x).__name__}")


def _emit_error(exc: Exception) -> None:
    code = exc.exit_code if isinstance(exc, CyclochronError) else 1
    doc = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    best = getattr(exc, "best", None)
    if best is not None:
        doc["best"] = _plain(best)
    print(json.dumps(doc), file=sys.stderr)


def _rows(payload: Any) -> tuple[list[str], list[list[Any]]]:
    if isinstance(payload, dict) and "columns" in payload and "rows" in payload:
        return payload["columns"], payload["rows"]
    if isinstance(payload, list) and payload and all(isinstance(r, dict) for r in payload):
        cols = list(payload[0])
        return cols, [[r.get(c) for c in cols] for r in payload]
    if isinstance(payload, list):
        return ["value"], [[v] for v in payload]
    if isinstance(payload, dict):
        return ["key", "value"], [[k, json.dumps(v) if isinstance(v, (dict, list)) else v]
                                  for k, v in payload.items()]
    return ["value"], [[payload]]


def _write(out, command: str, k: _constants.Constants, payload: Any, fmt: str) -> None:
    payload = _plain(payload)
    if fmt == "json":
        env = {"schema_version": SCHEMA_VERSION, "command": command,
               "constants_used": _plain(k.as_dict()), "payload": payload}
        out.write(json.dumps(env) + "\n")
        return
    cols, rows = _rows(payload)
    buf = io.StringIO()
    buf.write(f"# command={command} schema_version={SCHEMA_VERSION}\n")
    buf.write("# constants " + " ".join(f"{n}={v!r}" for n, v in k.as_dict().items()) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(cols)
    for r in rows:
        writer.writerow([repr(v) if isinstance(v, float) else v for v in r])
    out.write(buf.getvalue())


# -- argument helpers ---------------------------------------------------------

def _floats(text: str, n: int | None = None) -> list[float]:
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from exc
    if n is not None and len(vals) != n:
        raise UsageError(f"expected {n} values, got {text!r}")
    return vals


def _exacts(text: str) -> list[Fraction]:
    try:
        return [Fraction(v.strip()) for v in text.split(",") if v.strip()]
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"expected comma-separated rationals, got {text!r}") from exc


def _numbers(text: str, exact: bool) -> list:
    return _exacts(text) if exact else _floats(text)


def _number(text: str):
    """Exact rational when the text is one (``1/9192631770``, ``3``), else float."""
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        try:
            return float(text)
        except ValueError as exc:
            raise UsageError(f"not a number: {text!r}") from exc


def _boost(text: str | None) -> _kin.Boost:
    return _kin.Boost() if text is None else _kin.Boost(_floats(text, 3))


def _particle(args, name: str) -> _constants.ParticleSpec:
    try:
        return _constants.particle_by_name(name, args.table)
    except KeyError:
        raise UsageError(f"unknown particle {name!r}; known: {[p.name for p in args.table]}") from None


def _clock_arg(args) -> _cycles.CycleClock:
    if (args.particle is None) == (args.period is None):
        raise UsageError("give exactly one of <particle> or --period")
    if args.period is not None:
        period = _number(args.period)
        return _cycles.CycleClock(period, 0, 1, "clock")
    return _cycles.clock_from_particle(_particle(args, args.particle), _boost(args.beta), args.k)


def _ensemble(args, exact: bool) -> _cycles.ClockEnsemble:
    periods = _numbers(args.periods, exact)
    n = len(periods)
    phases0 = _numbers(args.phases0, exact) if getattr(args, "phases0", None) else None
    hel = [int(h) for h in _floats(args.helicities, n)] if getattr(args, "helicities", None) else None
    return _cycles.ClockEnsemble.from_periods(periods, phases0, hel)


def _kinematic_state(m: _kin.FourMomentum, k) -> dict:
    T = _kin.periodicity_of(m, k)
    return {"E_eV": m.energy, "p_eVc": list(m.momentum), "T_t_s": T.temporal_period,
            "lambda_m": list(T.spatial_wavelengths), "T_tau_s": T.proper_period}


# -- subcommands --------------------------------------------------------------

def cmd_constants(args):
    return args.k.as_dict()


def cmd_particles(args):
    return [{"name": p.name, "mass_ev": p.rest_mass_energy, "charge": p.charge, "spin": str(p.spin),
             "compton_period_s": _kin.compton_period(p, args.k)} for p in args.table]


def cmd_clock(args):
    p = _particle(args, args.particle)
    b = _boost(args.beta)
    T_tau = _kin.compton_period(p, args.k)
    if p.massless:
        energy = args.energy if args.energy is not None else 1.0
        state = _kinematic_state(_kin.photon_momentum(energy, b.velocity if b.speed else (1, 0, 0)), args.k)
        return {"particle": p.name, **state, "T_tau_s": T_tau, "phase_harmony_residual": None}
    state = _kinematic_state(_kin.four_momentum(p, b, args.k), args.k)
    state["T_tau_s"] = T_tau
    t = args.t if args.t is not None else 1e6 * T_tau
    residual = _kin.phase_harmony_residual(p, b, t, args.k)
    return {"particle": p.name, "beta": list(b.velocity), "gamma": b.gamma, **state,
            "harmony_t_s": t, "phase_harmony_residual": residual}


def cmd_boost(args):
    p = _particle(args, args.particle)
    before = _kin.four_momentum(p, _boost(args.beta), args.k)
    after = _kin.boost_momentum(before, _boost(args.boost), args.k)
    return {"particle": p.name, "before": _kinematic_state(before, args.k),
            "after": _kinematic_state(after, args.k)}


def cmd_ticks(args):
    clock = _clock_arg(args)
    parts = args.interval.split(",")
    if len(parts) != 2:
        raise UsageError("--interval takes t0,t1")
    t0, t1 = (_number(v) for v in parts)
    return {"ticks": _cycles.tick_count(clock, t0, t1), "period_s": float(clock.period)}


def cmd_phase(args):
    clock = _clock_arg(args)
    clock = dataclasses.replace(clock, initial_phase=_number(args.phase0), helicity=args.helicity)
    if args.antiparticle:
        clock = _cycles.invert_helicity(clock)
    phase = _cycles.phase_at(clock, _number(args.t))
    return {"phase": phase, "helicity": clock.helicity, "period_s": float(clock.period)}


def cmd_fingerprint(args):
    e = _ensemble(args, args.exact)
    t = _number(args.t) if args.exact else float(args.t)
    f = _rt.fingerprint_at(e, t)
    return {"labels": list(f.labels), "phases": list(f.phases)}


def cmd_classify(args):
    exact = args.exact or args.tolerance == 0
    c = _rt.classify(_ensemble(args, exact), args.tolerance)
    return c


def cmd_decode(args):
    e = _ensemble(args, args.exact)
    raw = _numbers(args.phases, args.exact)
    if args.exact:
        raw = [simplest_within(p, args.tolerance) for p in raw]
    f = _rt.Fingerprint(raw, e.labels)
    window = _floats(args.window, 2)
    instants = _rt.decode_time(e, f, window, args.tolerance)
    return {"instants": instants, "exact": bool(e.exact and f.exact)}


def cmd_recurrence(args):
    e = _ensemble(args, args.exact)
    return {"recurrence_s": _rt.recurrence_time(e, args.epsilon, args.horizon)}


def cmd_gap(args):
    e = _ensemble(args, args.exact)
    return {"gap_s": _rt.distinguishability_gap(e, args.epsilon, args.window)}


def _scenario(args):
    return _mod.load_scenario(Path(args.scenario).read_text("utf-8"), args.k, args.table)


def cmd_simulate(args):
    system, events = _scenario(args)
    timelines = _mod.apply_events(system, events, args.k)
    times, phases = _mod.sample_timelines(timelines, args.until, args.sample)
    labels = list(timelines)
    rows = [[t, *(phases[label][i] for label in labels)] for i, t in enumerate(times.tolist())]
    if args.format == "csv":
        return {"columns": ["t", *labels], "rows": rows}
    return {"timelines": {label: tl for label, tl in timelines.items()},
            "columns": ["t", *labels], "rows": rows}


def cmd_detect(args):
    text = Path(args.history).read_text("utf-8")
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    reader = csv.reader(lines)
    header = next(reader)
    if not header or header[0] != "t":
        raise UsageError("history CSV must start with a 't' column")
    data = np.array([[float(v) for v in row] for row in reader])
    out = {}
    for j, label in enumerate(header[1:], start=1):
        out[label] = _mod.detect_regime_changes(data[:, 0], data[:, j], args.sample)
    return out


def cmd_order(args):
    system, events = _scenario(args)
    return _mod.causal_order(events, system, args.k)


def cmd_regime(args):
    system, events = _scenario(args)
    return _mod.regime_classify(system, events, args.tolerance)


def cmd_spectrum(args):
    p = _particle(args, args.particle)
    lines = _quantum.harmonic_spectrum(p, _boost(args.beta), args.k, args.n)
    return [{"n": ln.n, "energy_eV": ln.energy} for ln in lines]


def cmd_verify_propagator(args):
    cfg = _quantum.CompactPropagatorConfig(args.L, args.m, args.beta, args.truncation)
    grid = (np.arange(args.grid) / args.grid * args.L).tolist()
    worst = 0.0
    terms = {"winding": 0, "mode": 0}
    for x in grid:
        for x0 in grid:
            w = _quantum.winding_sum(cfg, x, x0)
            m = _quantum.mode_sum(cfg, x, x0)
            worst = max(worst, abs(w.value - m.value) / abs(m.value))
            terms["winding"] = max(terms["winding"], w.terms)
            terms["mode"] = max(terms["mode"], m.terms)
    return {"max_abs_rel_diff": worst, "grid": [args.grid, args.grid], "terms_used": terms,
            "tolerance": args.tol, "passed": worst < args.tol}


def cmd_density(args):
    clock = _clock_arg(args)
    h = _quantum.phase_density_sample(clock, args.step, args.n, args.seed, args.bins)
    return {"edges": h.edges, "counts": h.counts, "n_samples": h.n_samples,
            "total_mass": h.total_mass, "period_s": float(clock.period)}


# -- parser -------------------------------------------------------------------

def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--constants", metavar="PATH", default=argparse.SUPPRESS,
                   help="key = value file overriding h, c, electronvolt")
    p.add_argument("--particles", metavar="PATH", default=argparse.SUPPRESS,
                   help="particle table CSV (name,mass_ev,charge,spin)")
    p.add_argument("--format", choices=("json", "csv"), default=argparse.SUPPRESS)
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="cyclochron", description=__doc__.splitlines()[0], parents=[common])
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    def add(name: str, func: Callable, help: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help, parents=[common])
        p.set_defaults(func=func)
        return p

    add("constants", cmd_constants, "show the constants in use")
    add("particles", cmd_particles, "list the particle table")

    p = add("clock", cmd_clock, "internal-clock periods of a particle")
    p.add_argument("particle")
    p.add_argument("--beta", help="velocity bx,by,bz")
    p.add_argument("--t", type=float, help="time for the phase-harmony residual (s)")
    p.add_argument("--energy", type=float, help="photon energy in eV (massless particles)")

    p = add("boost", cmd_boost, "Lorentz-boost a particle state")
    p.add_argument("particle")
    p.add_argument("--beta", help="initial velocity bx,by,bz")
    p.add_argument("--boost", required=True, help="boost velocity bx,by,bz")

    def clock_source(p):
        p.add_argument("particle", nargs="?")
        p.add_argument("--period", help="clock period in s (rational allowed, e.g. 1/9192631770)")
        p.add_argument("--beta", help="particle velocity bx,by,bz")

    p = add("ticks", cmd_ticks, "count clock ticks in [t0, t1)")
    clock_source(p)
    p.add_argument("--interval", required=True, help="t0,t1")

    p = add("phase", cmd_phase, "clock phase at time t")
    clock_source(p)
    p.add_argument("--t", required=True)
    p.add_argument("--phase0", default="0")
    p.add_argument("--helicity", type=int, choices=(1, -1), default=1)
    p.add_argument("--antiparticle", action="store_true", help="invert the helicity")

    def ensemble(p, phases0=True):
        p.add_argument("--periods", required=True)
        p.add_argument("--exact", action="store_true", help="treat numbers as exact rationals")
        if phases0:
            p.add_argument("--phases0", help="initial phases")
            p.add_argument("--helicities", help="+1/-1 per clock")

    p = add("fingerprint", cmd_fingerprint, "phase fingerprint of an ensemble at t")
    ensemble(p)
    p.add_argument("--t", required=True)

    p = add("classify", cmd_classify, "periodic or ergodic ensemble")
    ensemble(p, phases0=False)
    p.add_argument("--tolerance", type=float, default=1e-12)

    p = add("decode", cmd_decode, "instants matching a fingerprint")
    ensemble(p)
    p.add_argument("--phases", required=True)
    p.add_argument("--window", required=True, help="t_lo,t_hi")
    p.add_argument("--tolerance", type=float, default=1e-6, help="phase tolerance in cycles")

    p = add("recurrence", cmd_recurrence, "first epsilon-return time")
    ensemble(p, phases0=False)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--horizon", type=float)

    p = add("gap", cmd_gap, "time-resolution floor of the relational encoding")
    ensemble(p, phases0=False)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--window", type=float, required=True)

    p = add("simulate", cmd_simulate, "phase history of a scenario (CSV)")
    p.add_argument("scenario")
    p.add_argument("--until", type=float, required=True)
    p.add_argument("--sample", type=float, required=True)

    p = add("detect", cmd_detect, "regime changes in a phase-history CSV")
    p.add_argument("history")
    p.add_argument("--sample", type=float)

    p = add("order", cmd_order, "per-observer arrival order of scenario events")
    p.add_argument("scenario")

    p = add("regime", cmd_regime, "cyclic, ergodic or chaotic scenario")
    p.add_argument("scenario")
    p.add_argument("--tolerance", type=float, default=1e-12)

    p = add("spectrum", cmd_spectrum, "harmonic spectrum of a particle")
    p.add_argument("particle")
    p.add_argument("--n", type=int, default=5)
    p.add_argument("--beta")

    p = add("verify-propagator", cmd_verify_propagator, "winding sum vs mode sum on a grid")
    p.add_argument("--L", type=float, default=1.0)
    p.add_argument("--m", type=float, default=1.0)
    p.add_argument("--beta", type=float, default=0.1, help="imaginary time")
    p.add_argument("--tol", type=float, default=1e-10, help="pass threshold on relative difference")
    p.add_argument("--truncation", type=float, default=1e-13)
    p.add_argument("--grid", type=int, default=32)

    p = add("density", cmd_density, "stroboscopic phase histogram of a clock")
    clock_source(p)
    p.add_argument("--step", type=float, required=True)
    p.add_argument("--n", type=int, default=100_000)
    p.add_argument("--bins", type=int, default=50)
    return parser


def run(argv: Sequence[str], out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv))
    except SystemExit as exc:
        return int(exc.code or 0)
    # global flags may appear on either side of the subcommand
    for name, default in (("constants", None), ("particles", None), ("format", None), ("seed", 0)):
        if not hasattr(args, name):
            setattr(args, name, default)
    try:
        args.k = _constants.constants_from_config(
            Path(args.constants).read_bytes() if args.constants else None)
        args.table = (_constants.load_particle_table(Path(args.particles).read_bytes())
                      if args.particles else _constants.default_particles())
        fmt = args.format or ("csv" if args.command == "simulate" else "json")
        args.format = fmt
        payload = args.func(args)
        _write(out, args.command, args.k, payload, fmt)
    except CyclochronError as exc:
        _emit_error(exc)
        return exc.exit_code
    except OSError as exc:
        _emit_error(UsageError(str(exc)))
        return 2
    return 0


def main(argv: Sequence[str] | None = None) -> None:
    raise SystemExit(run(sys.argv[1:] if argv is None else argv))


if __name__ == "__main__":
    main()
