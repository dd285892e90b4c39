"""Command-line drivers: solve, sweep, table reproduction, and selftest.

Result records are deterministic JSON (identical config -> identical file);
wall-clock timings are printed but never serialized into the record.

Exit codes: 0 success, 1 configuration/validation error, 2 numerical
breakdown (Wood refusal, forbidden shift, singular stage), 3 internal error.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys
import time
from importlib import resources

import numpy as np

from .config import ConfigError, RunConfig, load_config
from .green import ForbiddenShiftError, WoodFrequencyError
from .linalg import SingularMatrixError
from .post import solve_stack

__all__ = [
    "run_solve",
    "run_sweep",
    "run_table",
    "run_selftest",
    "main",
]

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2
EXIT_INTERNAL = 3


# ---------------------------------------------------------------------------
# solve driver


def _rayleigh_record(table):
    return [
        {
            "r": e.r,
            "c": [float(np.real(e.c)), float(np.imag(e.c))],
            "beta": [float(np.real(e.beta)), float(np.imag(e.beta))],
            "classification": e.classification,
            "weight": e.weight,
        }
        for e in table.entries
    ]


def _c0_from_record(record):
    for entry in record["rayleigh"]["up"]:
        if entry["r"] == 0:
            return complex(entry["c"][0], entry["c"][1])
    raise ConfigError("reference", "reference record has no order-0 reflected coefficient")


def run_solve(config: RunConfig, reference=None):
    """Solve one configuration; returns (record, timings).

    reference: path of a previously written result record; when given, the
    relative error of C_0^+ against it is reported as eps_1.
    """
    res = solve_stack(
        config.stack(),
        config.incident(),
        config.radius,
        prefer=config.prefer,
        j_shifts=config.j_shifts,
        shifts=config.shift_list(),
        wood_tol=config.wood_tol,
        window=config.window,
        rayleigh_route=config.rayleigh_route,
    )
    record = {
        "schema_version": 1,
        "config": config.resolved(),
        "resolved_solver": {
            "window_radius": config.radius,
            "green_modes": res.metadata["green_modes"],
            "shifts": res.metadata["shifts"],
            "j_shifts": res.metadata["j_shifts"],
            "c_r": res.metadata["c_r"],
            "incident_convention": res.metadata["incident_convention"],
        },
        "rayleigh": {
            "up": _rayleigh_record(res.rayleigh_up),
            "down": _rayleigh_record(res.rayleigh_down),
        },
        "eps_en": res.eps_en,
        "eps_1": None,
        "conditions": {
            "s_top": res.metadata["s_top_conds"],
            "final": res.metadata["final_cond"],
        },
    }
    if reference is not None:
        with open(reference) as fh:
            ref = json.load(fh)
        c0_ref = _c0_from_record(ref)
        c0 = res.rayleigh_up.coefficient(0)
        record["eps_1"] = abs(c0 - c0_ref) / abs(c0_ref)
    return record, dict(res.timings)


def write_record(record, path):
    with open(path, "w") as fh:
        json.dump(record, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# sweep driver


def _with_axis(config: RunConfig, axis, value):
    if axis == "A":
        return dataclasses.replace(config, window_a=float(value))
    if axis == "M":
        m = int(value)
        if m != value or m % 2:
            raise ConfigError("sweep.values", f"M values must be even integers, got {value}")
        return dataclasses.replace(config, M=m)
    if axis == "j_shifts":
        return dataclasses.replace(config, j_shifts=int(value))
    if axis == "h":
        # magnitude applied with the role-appropriate sign: downward-facing
        # bottom layer gets -h, every other layer +h
        n = len(config.layers)
        shifts = tuple([float(value)] * (n - 1) + [-float(value)])
        return dataclasses.replace(config, shifts=shifts, prefer="shifted")
    raise ConfigError("sweep.axis", f"unknown axis {axis!r}")


def run_sweep(config: RunConfig, axis, values, reference=None):
    """One solve per axis value (ascending); returns a list of row dicts."""
    values = list(values)
    if not values:
        raise ConfigError("sweep.values", "need at least one value")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ConfigError("sweep.values", f"values must be strictly ascending, got {values}")
    rows = []
    for v in values:
        t0 = time.perf_counter()
        record, _ = run_solve(_with_axis(config, axis, v), reference=reference)
        rows.append(
            {
                "axis": axis,
                "value": v,
                "eps_en": record["eps_en"],
                "eps_1": record["eps_1"],
                "seconds": time.perf_counter() - t0,
            }
        )
    return rows


def write_sweep_csv(rows, path):
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=["axis", "value", "eps_en", "eps_1", "seconds"])
        writer.writeheader()
        writer.writerows(rows)


# ---------------------------------------------------------------------------
# shipped table configurations


def table_config(name) -> RunConfig:
    ref = resources.files("qpscat.configs").joinpath(f"{name}.json")
    if not ref.is_file():
        shipped = sorted(p.stem for p in resources.files("qpscat.configs").iterdir()
                         if p.name.endswith(".json"))
        raise ConfigError("table", f"unknown table {name!r}; shipped: {shipped}")
    with resources.as_file(ref) as path:
        return load_config(path)


def run_table(name, reference=None):
    config = table_config(name)
    if config.sweep_axis is None:
        record, timings = run_solve(config, reference=reference)
        return config, [
            {
                "axis": "A",
                "value": config.window_a,
                "eps_en": record["eps_en"],
                "eps_1": record["eps_1"],
                "seconds": sum(timings.values()),
            }
        ]
    return config, run_sweep(config, config.sweep_axis, config.sweep_values, reference=reference)


# ---------------------------------------------------------------------------
# selftest


def _selftest_checks():
    """Fast invariant suite; each check returns (ok, detail)."""
    import numpy as np

    from .bie import OperatorRequest, assemble, jump_relation_check
    from .ddm import (
        IncidentWave,
        Layer,
        LayerStack,
        build_rhs,
        dense_reference_solve,
        prepare_blocks,
        schur_sweep,
    )
    from .geometry import Profile, sample
    from .green import GreenParams
    from .linalg import weighted_norm
    from .post import evaluate_field, solve_stack
    from .specfun import bessel_j0j1y0y1, window_chi

    D = 2 * np.pi

    def check_wronskian():
        x = np.linspace(0.3, 25.0, 64)
        j0, j1, y0, y1 = bessel_j0j1y0y1(x)
        defect = np.max(np.abs(j1 * y0 - j0 * y1 - 2.0 / (np.pi * x)))
        return defect < 1e-13, f"max defect {defect:.2e}"

    def check_window_derivative():
        s = np.linspace(0.51, 0.99, 33)
        h = 1e-6
        val, der = window_chi(s)
        fd = (window_chi(s + h)[0] - window_chi(s - h)[0]) / (2 * h)
        defect = np.max(np.abs(der - fd))
        return defect < 1e-6, f"max defect {defect:.2e}"

    def check_jump_relation():
        curve = sample(Profile.cosine(D, 0.6), 64)
        green = GreenParams(k=2.3, d=D, alpha=0.25, A=20.0 * D)
        density = np.exp(1j * curve.t) + 0.5
        defect = jump_relation_check(curve, green, density)
        return defect < 1e-4, f"jump defect {defect:.2e}"

    def check_diagonal_fault_guard():
        # the singular-quadrature diagonal is the classic sign pitfall: a
        # corrupted diagonal must be caught by the flat-symbol oracle
        M, k = 32, 1.5
        curve = sample(Profile.flat(D), M)
        green = GreenParams(k=k, d=D, alpha=0.0, A=20.0 * D)
        sl = assemble(OperatorRequest("single_layer", green, curve, curve, self_interaction=True))
        mode = np.ones(M)
        exact = 1j / (2.0 * k)
        good = np.max(np.abs(sl @ mode - exact * mode))
        bad_sl = sl.copy()
        np.fill_diagonal(bad_sl, -np.diag(sl))
        bad = np.max(np.abs(bad_sl @ mode - exact * mode))
        return good < 1e-4 and bad > 1e-3, f"good {good:.2e}, corrupted {bad:.2e}"

    def check_sweep_vs_dense():
        stack = LayerStack(
            d=D,
            layers=(Layer(1.5), Layer(2.3), Layer(3.4), Layer(4.6)),
            profiles=(
                Profile.cosine(D, 0.6),
                Profile.flat(D, level=-1.2),
                Profile.cosine(D, 0.4, offset=-2.5),
            ),
            M=32,
        )
        blocks = prepare_blocks(stack, 0.0, 20.0 * D)
        rhs = build_rhs(blocks, IncidentWave(k=1.5))
        swept = schur_sweep(blocks, rhs)
        dense, _ = dense_reference_solve(blocks, rhs)
        rel = np.max(np.abs(swept.robin - dense)) / np.max(np.abs(dense))
        return rel < 1e-10, f"relative gap {rel:.2e}"

    def check_rtr_spectrum():
        from .rtr import rtr_middle, rtr_semi_infinite

        top = sample(Profile.cosine(D, 0.6), 32)
        bot = sample(Profile.flat(D, level=-1.2), 32)
        green = GreenParams(k=2.3, d=D, alpha=0.0, A=30.0 * D)
        semi = rtr_semi_infinite("top", top, green)
        mid = rtr_middle(top, bot, green)
        w2 = np.concatenate([top.weights, bot.weights])
        rng = np.random.default_rng(12345)
        worst_semi, worst_mid = 0.0, 0.0
        for _ in range(10):
            v = rng.standard_normal(32) + 1j * rng.standard_normal(32)
            worst_semi = max(
                worst_semi,
                weighted_norm(semi.s @ v, top.weights) / weighted_norm(v, top.weights) - 1.0,
            )
            v2 = rng.standard_normal(64) + 1j * rng.standard_normal(64)
            worst_mid = max(
                worst_mid,
                abs(weighted_norm(mid.full @ v2, w2) / weighted_norm(v2, w2) - 1.0),
            )
        ok = worst_semi <= 5e-3 and worst_mid <= 5e-3
        return ok, f"semi excess {worst_semi:.2e}, middle defect {worst_mid:.2e}"

    def check_flat_oracle():
        stack = LayerStack(
            d=D, layers=(Layer(1.5), Layer(2.5)), profiles=(Profile.flat(D),), M=32
        )
        res = solve_stack(stack, IncidentWave(k=1.5), 40.0 * D)
        err = max(
            abs(res.rayleigh_up.coefficient(0) + 0.25),
            abs(res.rayleigh_down.coefficient(0) - 0.75),
        )
        return err < 1e-5 and res.eps_en < 1e-6, f"C0 err {err:.2e}, eps_en {res.eps_en:.2e}"

    def check_rayleigh_routes():
        stack = LayerStack(
            d=D, layers=(Layer(2.3), Layer(3.4)), profiles=(Profile.cosine(D, 0.6),), M=32
        )
        inc = IncidentWave(k=2.3, alpha=0.4)
        line = solve_stack(stack, inc, 20.0 * D, rayleigh_route="line")
        dens = solve_stack(stack, inc, 20.0 * D, rayleigh_route="density")
        gap = max(
            abs(e.c - dens.rayleigh_up.coefficient(e.r))
            for e in line.rayleigh_up.entries
            if e.classification == "propagating"
        )
        return gap < 1e-5, f"route gap {gap:.2e}"

    def check_translation_phase():
        s = 2.0 * np.pi / 7.0
        base_stack = LayerStack(
            d=D, layers=(Layer(2.3), Layer(3.4)), profiles=(Profile.cosine(D, 0.6),), M=32
        )
        moved_stack = LayerStack(
            d=D,
            layers=(Layer(2.3), Layer(3.4)),
            profiles=(Profile(D, cos_coeffs=(0.3 * np.cos(s),), sin_coeffs=(0.3 * np.sin(s),)),),
            M=32,
        )
        inc = IncidentWave(k=2.3)
        base = solve_stack(base_stack, inc, 20.0 * D)
        moved = solve_stack(moved_stack, inc, 20.0 * D)
        gap = max(
            abs(moved.rayleigh_up.coefficient(e.r) - e.c * np.exp(-1j * e.r * s))
            for e in base.rayleigh_up.entries
            if e.classification == "propagating"
        )
        return gap < 1e-8, f"phase-law gap {gap:.2e}"

    def check_quasi_periodicity():
        stack = LayerStack(
            d=D, layers=(Layer(2.3), Layer(3.4)), profiles=(Profile.cosine(D, 0.6),), M=32
        )
        inc = IncidentWave(k=2.3, alpha=0.4)
        res = solve_stack(stack, inc, 20.0 * D)
        pts = np.array([[1.0, 1.4], [1.0 + D, 1.4]])
        v, _, _ = evaluate_field(res, pts, total=False)
        defect = abs(v[1] - np.exp(1j * inc.alpha * D) * v[0])
        return defect < 1e-8, f"defect {defect:.2e}"

    return [
        ("bessel-wronskian", check_wronskian),
        ("window-derivative", check_window_derivative),
        ("jump-relation", check_jump_relation),
        ("quadrature-diagonal-fault-guard", check_diagonal_fault_guard),
        ("sweep-vs-dense", check_sweep_vs_dense),
        ("rtr-spectrum", check_rtr_spectrum),
        ("flat-oracle", check_flat_oracle),
        ("rayleigh-routes", check_rayleigh_routes),
        ("translation-phase-law", check_translation_phase),
        ("quasi-periodicity", check_quasi_periodicity),
    ]


def run_selftest(stream=None):
    """Execute the fast invariant suite; returns True iff everything passed."""
    if stream is None:
        stream = sys.stdout
    all_ok = True
    t_total = time.perf_counter()
    for name, check in _selftest_checks():
        t0 = time.perf_counter()
        try:
            ok, detail = check()
        except Exception as exc:  # a crash is a failure, not an abort
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        all_ok = bool(all_ok and ok)
        status = "PASS" if ok else "FAIL"
        print(f"[{status}] {name}: {detail} ({time.perf_counter() - t0:.1f}s)", file=stream)
    print(f"selftest {'passed' if all_ok else 'FAILED'} in {time.perf_counter() - t_total:.1f}s",
          file=stream)
    return all_ok


# ---------------------------------------------------------------------------
# entry point


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="qpscat",
        description="Quasi-periodic layered-media transmission solver",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="run one configuration")
    p_solve.add_argument("--config", required=True)
    p_solve.add_argument("--reference", default=None)
    p_solve.add_argument("--out", default=None)

    p_sweep = sub.add_parser("sweep", help="solve along one parameter axis")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--axis", required=True, choices=["A", "M", "j_shifts", "h"])
    p_sweep.add_argument("--values", required=True,
                         help="comma-separated ascending values, e.g. 20,40,80")
    p_sweep.add_argument("--reference", default=None)
    p_sweep.add_argument("--out", default=None)

    p_table = sub.add_parser("table", help="reproduce a shipped table configuration")
    p_table.add_argument("--name", required=True)
    p_table.add_argument("--reference", default=None)
    p_table.add_argument("--out", default=None)

    sub.add_parser("selftest", help="run the fast invariant suite")
    return parser


def _print_rows(rows, stream=sys.stdout):
    print(f"{'axis':>8} {'value':>10} {'eps_en':>12} {'eps_1':>12} {'seconds':>9}", file=stream)
    for row in rows:
        eps1 = f"{row['eps_1']:.3e}" if row["eps_1"] is not None else "-"
        print(
            f"{row['axis']:>8} {row['value']:>10g} {row['eps_en']:>12.3e} "
            f"{eps1:>12} {row['seconds']:>9.2f}",
            file=stream,
        )


def _out_path(out_dir, filename):
    import os

    if out_dir is None:
        return filename
    os.makedirs(out_dir, exist_ok=True)
    return os.path.join(out_dir, filename)


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "solve":
            config = load_config(args.config)
            record, timings = run_solve(config, reference=args.reference)
            path = _out_path(args.out, f"{config.name}_result.json")
            write_record(record, path)
            eps1 = f", eps_1 {record['eps_1']:.3e}" if record["eps_1"] is not None else ""
            print(f"eps_en {record['eps_en']:.3e}{eps1}")
            print("timings " + ", ".join(f"{k} {v:.2f}s" for k, v in timings.items()))
            print(f"wrote {path}")
            return EXIT_OK
        if args.command == "sweep":
            config = load_config(args.config)
            values = [float(v) for v in args.values.split(",") if v.strip()]
            rows = run_sweep(config, args.axis, values, reference=args.reference)
            _print_rows(rows)
            path = _out_path(args.out, f"{config.name}_sweep.csv")
            write_sweep_csv(rows, path)
            print(f"wrote {path}")
            return EXIT_OK
        if args.command == "table":
            config, rows = run_table(args.name, reference=args.reference)
            _print_rows(rows)
            path = _out_path(args.out, f"{config.name}_sweep.csv")
            write_sweep_csv(rows, path)
            print(f"wrote {path}")
            return EXIT_OK
        if args.command == "selftest":
            return EXIT_OK if run_selftest() else EXIT_NUMERICAL
        raise AssertionError(f"unhandled command {args.command}")
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (WoodFrequencyError, ForbiddenShiftError, SingularMatrixError) as exc:
        print(f"numerical breakdown: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except np.linalg.LinAlgError as exc:
        print(f"numerical breakdown: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except Exception as exc:
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
