"""Command-line front end.

Inputs are JSON files or generator specs of the form `name:key=val,...`
(powerlaw, cantor, bd, berezanskii), so every worked example can be run as a
one-liner.  Output is CSV or JSON with repr-exact floats; grid evaluations
may be parallelized over threads, but rows are always assembled in grid
order, so runs are byte-identical regardless of thread count.

Exit codes: 0 success, 1 computation error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import certificates, jacobi, model, monodromy, orders, stringorder


class UsageError(ValueError):
    pass


def _parse_kv(body: str) -> dict:
    out = {}
    if body:
        for part in body.replace(";", ",").split(","):
            if "=" not in part:
                raise UsageError(f"bad generator parameter {part!r}")
            k, v = part.split("=", 1)
            out[k.strip()] = v.strip()
    return out


def _parse_gen_string(spec: str) -> model.StringSpec:
    name, _, body = spec.partition(":")
    kv = _parse_kv(body)
    if name == "powerlaw":
        p = float(kv.get("p", 0.5))
        J = int(float(kv.get("J", 10000)))
        return model.power_law_string(p, J)
    if name == "cantor":
        return model.cantor_string(int(float(kv.get("depth", 14))))
    raise UsageError(f"unknown string generator {name!r}")


def _parse_jacobi_spec(spec: str) -> jacobi.JacobiMatrix:
    name, _, body = spec.partition(":")
    if name == "bd":
        # bd:A=0,0,0;B=1,0.5,0  (';' and ',' both accepted as separators,
        # so A/B lists are split on the A=/B= markers instead)
        parts = {}
        for chunk in body.split(";"):
            k, _, vals = chunk.partition("=")
            parts[k.strip()] = [float(v) for v in vals.split(",") if v.strip()]
        if "A" not in parts or "B" not in parts:
            raise UsageError("bd: needs A=... and B=...")
        return jacobi.birth_death(parts["A"], parts["B"])
    if name == "berezanskii":
        kv = _parse_kv(body)
        base = float(kv.get("base", 2.0))
        return jacobi.JacobiMatrix(generator=lambda j: (0.0, base**j))
    raise UsageError(f"unknown Jacobi generator {name!r}")


def _load_hamiltonian(args) -> model.FiniteRankHamiltonian:
    n_specified = sum(x is not None for x in (args.input, args.gen, getattr(args, "jacobi", None)))
    if n_specified != 1:
        raise UsageError("exactly one of --input, --gen, --jacobi is required")
    if args.input is not None:
        with open(args.input) as fh:
            doc = json.load(fh)
        if "segments" in doc:
            return model.FiniteRankHamiltonian.from_json_dict(doc)
        if "intervals" in doc:
            return model.string_to_hamiltonian(model.StringSpec.from_json_dict(doc))
        if "q" in doc or "birth_death" in doc:
            jm = jacobi.JacobiMatrix.from_json_dict(doc)
            return jacobi.jacobi_to_hamiltonian(jm, n_max=int(args.n))
        raise UsageError("unrecognized input JSON schema")
    if args.gen is not None:
        return model.string_to_hamiltonian(_parse_gen_string(args.gen))
    jm = _parse_jacobi_spec(args.jacobi)
    return jacobi.jacobi_to_hamiltonian(jm, n_max=int(args.n))


def _parse_grid(spec: str) -> np.ndarray:
    """lo:hi:per_decade geometric grid (per-decade points, endpoints on the
    decade lattice of lo)."""
    parts = spec.split(":")
    if len(parts) != 3:
        raise UsageError("grid must be lo:hi:points_per_decade")
    lo, hi, per = float(parts[0]), float(parts[1]), int(parts[2])
    if not (0 < lo < hi) or per < 4:
        raise UsageError("grid needs 0 < lo < hi and points_per_decade >= 4")
    return orders.geometric_grid(lo, hi, per_decade=per)


def _threads(args) -> int:
    env = os.environ.get("CANON_THREADS")
    if env:
        return max(1, int(env))
    if args.threads is not None:
        return max(1, args.threads)
    return os.cpu_count() or 1


def _grid_map(fn, values, n_threads):
    if n_threads <= 1 or len(values) <= 1:
        return [fn(v) for v in values]
    with ThreadPoolExecutor(max_workers=n_threads) as pool:
        return list(pool.map(fn, values))


def _emit(args, text: str):
    if getattr(args, "output", None):
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_monodromy(args) -> int:
    ham = _load_hamiltonian(args)
    if args.z is not None:
        z = complex(args.z)
        m = monodromy.monodromy_eval(ham, z)
        _emit(args, "tau,log_norm,det_residual\n"
              f"{abs(z)!r},{m.log_norm()!r},{monodromy.det_residual(m)!r}\n")
        return 0
    taus = _parse_grid(args.tau)

    def row(tau):
        m = monodromy.monodromy_eval(ham, 1j * tau if args.imaginary else complex(tau))
        return float(tau), m.log_norm(), monodromy.det_residual(m)

    rows = _grid_map(row, taus, _threads(args))
    lines = ["tau,log_norm,det_residual"]
    for tau, ln, dr in rows:
        lines.append(f"{tau!r},{ln!r},{dr!r}")
    _emit(args, "\n".join(lines) + "\n")
    return 0


def cmd_type(args) -> int:
    ham = _load_hamiltonian(args)
    _emit(args, json.dumps({"type": orders.kdb_type(ham)}) + "\n")
    return 0


def cmd_order(args) -> int:
    method = args.method
    if method == "coeff":
        if args.jacobi is not None or (args.input and args.input.endswith(".json")
                                       and _looks_jacobi(args.input)):
            if args.jacobi is not None:
                jm = _parse_jacobi_spec(args.jacobi)
            else:
                with open(args.input) as fh:
                    jm = jacobi.JacobiMatrix.from_json_dict(json.load(fh))
            est = orders.jacobi_order_lower_bound(jm, int(args.n))
        else:
            spec = _parse_gen_string(args.gen) if args.gen else None
            if spec is None or spec.meta.get("kind") != "powerlaw":
                raise UsageError("--method coeff needs --jacobi or --gen powerlaw:...")
            coeffs = orders.alternating_string_coefficients(spec, spec.meta["J"])
            est = orders.order_from_coefficients(coeffs)
    elif method == "growth":
        ham = _load_hamiltonian(args)
        taus = _parse_grid(args.tau) if args.tau else orders.geometric_grid(
            1e1, 0.1 * orders.default_tau_cap(ham), per_decade=20)
        pts = _grid_map(lambda t: (t, monodromy.monodromy_eval(ham, 1j * t).log_norm()),
                        taus, _threads(args))
        est = orders.order_fit(pts)
    elif method == "kats":
        spec = _require_string(args)
        taus = _parse_grid(args.tau) if args.tau else orders.geometric_grid(1e2, 1e8, 20)
        est = stringorder.kats_order_functional(spec, taus)
    elif method == "covering":
        spec = _require_string(args)
        est = stringorder.string_order_upper(spec)
    else:
        raise UsageError(f"unknown method {method!r}")
    doc = {"value": est.value, "method": est.method,
           "slope_ci": list(est.slope_ci), "window": list(est.window)}
    _emit(args, json.dumps(doc) + "\n")
    return 0


def _looks_jacobi(path: str) -> bool:
    with open(path) as fh:
        doc = json.load(fh)
    return "q" in doc or "birth_death" in doc


def _require_string(args) -> model.StringSpec:
    if args.gen is not None:
        return _parse_gen_string(args.gen)
    if args.input is not None:
        with open(args.input) as fh:
            return model.StringSpec.from_json_dict(json.load(fh))
    raise UsageError("this method needs a string (--gen or --input)")


def cmd_certificate(args) -> int:
    if args.d is None:
        raise UsageError("--d is required")
    ham = _load_hamiltonian(args)
    lo, _, hi = args.R.partition(":")
    R_grid = orders.geometric_grid(float(lo), float(hi or lo), per_decade=4)
    d = args.d
    if args.builder == "powerlaw":
        spec = _require_string(args)
        family = lambda R: certificates.builder_power_law(spec, R, d)
    elif args.builder == "threshold":
        family = lambda R: certificates.builder_threshold(ham, R, d)
    elif args.builder == "two-level":
        if args.Delta is None or args.D is None:
            raise UsageError("--builder two-level needs --Delta and --D")
        family = lambda R: certificates.builder_two_level(
            ham, R, d, Delta=args.Delta, D=args.D)
    else:
        raise UsageError(f"unknown builder {args.builder!r}")
    report = certificates.fit_certificate(ham, family, R_grid, d)
    _emit(args, certificates.report_to_json(report) + "\n")
    return 0


def cmd_string_cover(args) -> int:
    spec = _require_string(args)
    lo, _, hi = args.R.partition(":")
    R_grid = orders.geometric_grid(float(lo), float(hi or lo), per_decade=4)
    rows = []
    for R in R_grid:
        cov = stringorder.greedy_covering(spec, R)
        rows.append((float(R), cov.n, stringorder.covering_sum(None, cov)))
    _emit(args, stringorder.covering_csv(rows))
    return 0


def cmd_jacobi_convert(args) -> int:
    if args.jacobi is not None:
        jm = _parse_jacobi_spec(args.jacobi)
    elif args.input is not None:
        with open(args.input) as fh:
            jm = jacobi.JacobiMatrix.from_json_dict(json.load(fh))
    else:
        raise UsageError("jacobi-convert needs --jacobi or --input")
    ham = jacobi.jacobi_to_hamiltonian(jm, n_max=int(args.n))
    doc = ham.to_json_dict()
    doc["n_kept"] = len(ham.segments)
    _emit(args, json.dumps(doc) + "\n")
    return 0


def _add_common(sp):
    sp.add_argument("--input", help="JSON input file")
    sp.add_argument("--gen", help="string generator spec, e.g. powerlaw:p=0.5,J=1000")
    sp.add_argument("--jacobi", help="Jacobi generator spec, e.g. bd:A=0,0,0;B=1,0.5,0")
    sp.add_argument("--n", default=100000, type=float,
                    help="Jacobi truncation length (default 1e5)")
    sp.add_argument("--output", help="write output here instead of stdout")
    sp.add_argument("--threads", type=int, default=None,
                    help="grid parallelism (default: all cores; env CANON_THREADS wins)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="canonsys",
                                 description="canonical systems: monodromy, type, order")
    sub = ap.add_subparsers(dest="cmd", required=True)

    sp = sub.add_parser("monodromy", help="log-norm curve of M(i tau)")
    _add_common(sp)
    sp.add_argument("--tau", default="1e2:1e6:40", help="grid lo:hi:per_decade")
    sp.add_argument("--z", help="single spectral point (complex literal) instead of a grid")
    sp.add_argument("--imaginary", action="store_true", default=True,
                    help="evaluate at z = i tau (default)")
    sp.set_defaults(fn=cmd_monodromy)

    sp = sub.add_parser("order", help="order estimate")
    _add_common(sp)
    sp.add_argument("--method", required=True,
                    choices=["growth", "coeff", "kats", "covering"])
    sp.add_argument("--tau", help="grid lo:hi:per_decade")
    sp.set_defaults(fn=cmd_order)

    sp = sub.add_parser("certificate", help="order certificate fit")
    _add_common(sp)
    sp.add_argument("--builder", default="powerlaw",
                    choices=["powerlaw", "threshold", "two-level"])
    sp.add_argument("--d", type=float)
    sp.add_argument("--R", default="1e2:1e6", help="R range lo:hi")
    sp.add_argument("--Delta", type=float)
    sp.add_argument("--D", type=float)
    sp.set_defaults(fn=cmd_certificate)

    sp = sub.add_parser("string-cover", help="greedy covering table")
    _add_common(sp)
    sp.add_argument("--R", default="1e2:1e4", help="R range lo:hi")
    sp.set_defaults(fn=cmd_string_cover)

    sp = sub.add_parser("jacobi-convert", help="Jacobi matrix to Hamiltonian JSON")
    _add_common(sp)
    sp.set_defaults(fn=cmd_jacobi_convert)

    sp = sub.add_parser("type", help="Krein-de Branges exponential type")
    _add_common(sp)
    sp.set_defaults(fn=cmd_type)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.fn(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
